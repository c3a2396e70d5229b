//! Command-line surface. [`run`] is the whole program minus process exit, so it can be tested in-process.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::energy::{derivative_identity_check, energy_trace, formula_signs_consistent, monotonicity_verdict, MonotonicityVerdict};
use crate::error::Error;
use crate::extension::{barrier_refinement, neumann_flux, ExtensionField, GridSpec, DEFAULT_PSI_GRADING};
use crate::fraclap::{verify_fall_identity, QuadratureConfig, RadialProfile};
use crate::kelvin::{constant_invariance, kelvin_exponent, verify_equivalences_with_tol};
use crate::params::{classify_regime_with_tol, ProblemParams, DEFAULT_THRESHOLD_TOL};
use crate::report::{
    csv_table, json_num, serialize_report, to_rounded_value, Check, Comparison, Format, RunReport,
};
use crate::specialfn::{all_constants, hypersingular_normalizer, kappa_sigma, poisson_normalizer, singular_constant};
use crate::suite;

#[derive(Debug, Parser)]
#[command(name = "hardy-henon", version, about = "Numerical checks for the fractional Hardy-Henon equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Regime label, applicable theorems and threshold equalities.
    Classify {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD_TOL)]
        tol_threshold: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Closed-form constants.
    Constants {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 1e-12)]
        tol_normalizer: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Quadrature check of the fractional Laplacian of the singular solution.
    VerifyLemma {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
        radii: Vec<f64>,
        #[arg(long, default_value_t = 1e-6)]
        tol_lemma: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Poisson extension of the singular trace; CSV `r,psi,value` to --out.
    Extend {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
        radii: Vec<f64>,
        #[arg(long, default_value_t = 9)]
        npsi: usize,
        #[arg(long, default_value_t = 1e-7)]
        tol_homogeneity: f64,
        #[arg(long, default_value_t = 1e-5)]
        tol_flux: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Newton solve of the cylinder problem; CSV `s,psi,value` to --out.
    SolveCylinder {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        cyl: CylinderArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Energy trace of a solved cylinder field; CSV `s,E,dE_formula,dE_fd` to --out.
    Energy {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        cyl: CylinderArgs,
        /// Allowed violation of the expected sign by dE_fd.
        #[arg(long, default_value_t = 1e-6)]
        tol_sign: f64,
        /// Energy drift allowed when J1 = 0.
        #[arg(long, default_value_t = 1e-6)]
        tol_drift: f64,
        /// Checks the pointwise derivative identity when given.
        #[arg(long)]
        tol_identity: Option<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Residuals of the barrier identities under step halving; CSV `h,interior,neumann` to --out.
    Barrier {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 1.0)]
        xi: f64,
        #[arg(long, default_value_t = 0.5)]
        t: f64,
        #[arg(long, default_value_t = 0.04)]
        h0: f64,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long, default_value_t = 1.8)]
        tol_order: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Kelvin exponent map, exponent equivalences and constant invariance.
    Kelvin {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD_TOL)]
        tol_threshold: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol_invariance: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Acceptance battery.
    Suite {
        /// Subset of criteria to run, e.g. `1,3,8`.
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u8>,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    #[arg(long)]
    pub n: i64,
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub p: f64,
}

#[derive(Debug, Clone, Args)]
pub struct CylinderArgs {
    /// `s_min,s_max`
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true, default_value = "-4,4")]
    pub s_range: (f64, f64),
    /// `ns,npsi`
    #[arg(long, value_parser = parse_grid, default_value = "161,65")]
    pub grid: (usize, usize),
    /// Relative raise of the Dirichlet data at `s_min`.
    #[arg(long, allow_hyphen_values = true, default_value_t = suite::PERTURBATION)]
    pub perturbation: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol_residual: f64,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn pair<T: std::str::FromStr>(s: &str) -> Result<(T, T), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(format!("expected two comma-separated values, got `{s}`"));
    }
    let a = parts[0].parse().map_err(|_| format!("malformed number `{}`", parts[0]))?;
    let b = parts[1].parse().map_err(|_| format!("malformed number `{}`", parts[1]))?;
    Ok((a, b))
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    pair(s)
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    pair(s)
}

/// Exit status and captured output of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::DimensionBelowTwo(_)
            | Error::SigmaOutOfRange(_)
            | Error::ExponentNotSuperlinear(_)
            | Error::NonFinite(_)
            | Error::Precondition(_)
            | Error::Grid(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

type CmdResult = std::result::Result<RunReport, Failure>;

pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let mut text = e.render().to_string();
            if e.use_stderr() && !text.contains("Usage:") {
                text = format!("{text}\n{}\n", Cli::usage());
            }
            return if e.use_stderr() {
                Outcome { code: 2, stdout: String::new(), stderr: text }
            } else {
                Outcome { code: 0, stdout: text, stderr: String::new() }
            };
        }
    };
    let t0 = Instant::now();
    let format = output_args(&cli.command).format;
    match dispatch(&cli.command) {
        Ok(mut report) => {
            report.elapsed = t0.elapsed().as_secs_f64();
            let stdout = serialize_report(&report, format);
            let failed: Vec<String> = report
                .failed_checks()
                .map(|c| format!("check failed: {} = {} (needs {} {})", c.name, c.value, cmp_str(c.comparison), c.tolerance))
                .collect();
            let code = if failed.is_empty() { 0 } else { 1 };
            let stderr = failed.iter().map(|l| format!("{l}\n")).collect();
            Outcome { code, stdout, stderr }
        }
        Err(Failure::Usage(m)) => {
            Outcome { code: 2, stdout: String::new(), stderr: format!("error: {m}\n\n{}\n", Cli::usage()) }
        }
        Err(Failure::Numerical(m)) => Outcome { code: 1, stdout: String::new(), stderr: format!("error: {m}\n") },
    }
}

impl Cli {
    fn usage() -> String {
        use clap::CommandFactory;
        Self::command().render_usage().to_string()
    }
}

fn cmp_str(c: Comparison) -> &'static str {
    match c {
        Comparison::Less => "<",
        Comparison::LessEqual => "<=",
        Comparison::GreaterEqual => ">=",
    }
}

fn output_args(c: &Command) -> &OutputArgs {
    match c {
        Command::Classify { out, .. }
        | Command::Constants { out, .. }
        | Command::VerifyLemma { out, .. }
        | Command::Extend { out, .. }
        | Command::SolveCylinder { out, .. }
        | Command::Energy { out, .. }
        | Command::Barrier { out, .. }
        | Command::Kelvin { out, .. }
        | Command::Suite { out, .. } => out,
    }
}

impl ParamArgs {
    fn validate(&self) -> std::result::Result<ProblemParams, Failure> {
        Ok(ProblemParams::new(self.n, self.sigma, self.alpha, self.p)?)
    }
}

impl CylinderArgs {
    fn grid(&self) -> GridSpec {
        GridSpec {
            s_min: self.s_range.0,
            s_max: self.s_range.1,
            ns: self.grid.0,
            npsi: self.grid.1,
            psi_grading: DEFAULT_PSI_GRADING,
        }
    }
}

fn write_out(path: Option<&Path>, header: &[&str], rows: &[Vec<f64>]) -> std::result::Result<Option<String>, Failure> {
    match path {
        None => Ok(None),
        Some(p) => {
            std::fs::write(p, csv_table(header, rows))
                .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display())))?;
            Ok(Some(p.display().to_string()))
        }
    }
}

fn dispatch(cmd: &Command) -> CmdResult {
    match cmd {
        Command::Classify { params, tol_threshold, .. } => {
            let pp = params.validate()?;
            let verdict = classify_regime_with_tol(&pp, *tol_threshold);
            let results = json!({
                "verdict": to_rounded_value(&verdict),
                "derived": to_rounded_value(&pp.derived()),
            });
            Ok(RunReport::new("classify", Some(pp), results, vec![]))
        }
        Command::Constants { params, tol_normalizer, .. } => {
            let pp = params.validate()?;
            let c = all_constants(&pp);
            let kappa = kappa_sigma(pp.sigma);
            let ratio = 2.0 * pp.sigma * poisson_normalizer(pp.n, pp.sigma) / hypersingular_normalizer(pp.n, pp.sigma);
            let identity = (ratio - kappa).abs() / kappa;
            let results = json!({
                "C": c.c_p_sigma_alpha.map_or(Value::Null, json_num),
                "kappa": json_num(kappa),
                "constants": to_rounded_value(&c),
                "normalizer_identity_rel_error": json_num(identity),
            });
            let checks =
                vec![Check::new("normalizer_identity_rel_error", identity, Comparison::Less, "tol-normalizer", *tol_normalizer)];
            Ok(RunReport::new("constants", Some(pp), results, checks))
        }
        Command::VerifyLemma { params, radii, tol_lemma, .. } => {
            let pp = params.validate()?;
            if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
                return Err(Failure::Usage("--radii must be positive".into()));
            }
            let rep = verify_fall_identity(&pp, radii, &QuadratureConfig::default())?;
            let checks = vec![Check::new("max_rel_error", rep.max_rel_error, Comparison::Less, "tol-lemma", *tol_lemma)];
            Ok(RunReport::new("verify-lemma", Some(pp), to_rounded_value(&rep), checks))
        }
        Command::Extend { params, radii, npsi, tol_homogeneity, tol_flux, out } => {
            let pp = params.validate()?;
            pp.require_singular_range()?;
            if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
                return Err(Failure::Usage("--radii must be positive".into()));
            }
            if *npsi < 2 {
                return Err(Failure::Usage("--npsi must be at least 2".into()));
            }
            let cfg = QuadratureConfig::default();
            let c = singular_constant(&pp)?;
            let beta = pp.beta();
            let trace = RadialProfile::power(c, beta);
            let psi = GridSpec { npsi: *npsi, ..GridSpec::default() }.psi_nodes();
            let field = ExtensionField::from_trace(&trace, &pp, radii, &psi, &cfg)?;
            // r^β U(r, ψ) must not depend on r
            let reference: Vec<f64> = field.values[0].iter().map(|v| v * radii[0].powf(beta)).collect();
            let mut homogeneity: f64 = 0.0;
            for (r, row) in radii.iter().zip(&field.values) {
                for (v, w) in row.iter().zip(&reference) {
                    homogeneity = homogeneity.max((v * r.powf(beta) - w).abs() / w);
                }
            }
            let flux = neumann_flux(&trace, 1.0, &pp, 0.125, 9, 1e-6, &cfg)?;
            let target = kappa_sigma(pp.sigma) * c.powf(pp.p);
            let flux_err = (flux.value - target).abs() / target;
            let rows: Vec<Vec<f64>> = radii
                .iter()
                .zip(&field.values)
                .flat_map(|(&r, row)| psi.iter().zip(row).map(move |(&ps, &v)| vec![r, ps, v]))
                .collect();
            let written = write_out(out.out.as_deref(), &["r", "psi", "value"], &rows)?;
            let results = json!({
                "C": json_num(c),
                "beta": json_num(beta),
                "psi": to_rounded_value(&psi),
                "sphere_profile": to_rounded_value(&reference),
                "homogeneity_rel_error": json_num(homogeneity),
                "boundary_flux": json_num(flux.value),
                "boundary_flux_target": json_num(target),
                "boundary_flux_rel_error": json_num(flux_err),
                "csv": written,
            });
            let checks = vec![
                Check::new("homogeneity_rel_error", homogeneity, Comparison::Less, "tol-homogeneity", *tol_homogeneity),
                Check::new("boundary_flux_rel_error", flux_err, Comparison::Less, "tol-flux", *tol_flux),
            ];
            Ok(RunReport::new("extend", Some(pp), results, checks))
        }
        Command::SolveCylinder { params, cyl, out } => {
            let pp = params.validate()?;
            let run = suite::perturbed_run(&pp, &cyl.grid(), cyl.perturbation)?;
            let f = &run.field;
            let rows: Vec<Vec<f64>> = f
                .s
                .iter()
                .zip(&f.values)
                .flat_map(|(&s, row)| f.psi.iter().zip(row).map(move |(&ps, &v)| vec![s, ps, v]))
                .collect();
            let written = write_out(out.out.as_deref(), &["s", "psi", "value"], &rows)?;
            let boundary: Vec<f64> = f.values.iter().map(|row| row[0]).collect();
            let results = json!({
                "grid": to_rounded_value(&cyl.grid()),
                "perturbation": json_num(cyl.perturbation),
                "final_residual": json_num(run.final_residual),
                "boundary_trace": to_rounded_value(&boundary),
                "csv": written,
            });
            let checks =
                vec![Check::new("final_residual", run.final_residual, Comparison::Less, "tol-residual", cyl.tol_residual)];
            Ok(RunReport::new("solve-cylinder", Some(pp), results, checks))
        }
        Command::Energy { params, cyl, tol_sign, tol_drift, tol_identity, out } => {
            let pp = params.validate()?;
            let run = suite::perturbed_run(&pp, &cyl.grid(), cyl.perturbation)?;
            let tr = energy_trace(&run.field, None)?;
            let rows: Vec<Vec<f64>> =
                (0..tr.s.len()).map(|k| vec![tr.s[k], tr.e[k], tr.de_formula[k], tr.de_fd[k]]).collect();
            let written = write_out(out.out.as_deref(), &["s", "E", "dE_formula", "dE_fd"], &rows)?;
            let verdict = monotonicity_verdict(&tr, *tol_sign);
            let expected = if tr.j1 > 0.0 {
                MonotonicityVerdict::NonDecreasing
            } else if tr.j1 < 0.0 {
                MonotonicityVerdict::NonIncreasing
            } else {
                MonotonicityVerdict::Constant
            };
            let sign = tr.j1.signum();
            let fd_violations = if tr.j1 == 0.0 {
                tr.de_fd.iter().filter(|d| d.abs() > *tol_sign).count()
            } else {
                tr.de_fd.iter().filter(|&&d| d * sign < -tol_sign).count()
            };
            let mismatch = derivative_identity_check(&tr);
            let mut checks = vec![
                Check::new("final_residual", run.final_residual, Comparison::Less, "tol-residual", cyl.tol_residual),
                Check::zero(
                    "formula_sign_violations",
                    if formula_signs_consistent(&tr) { 0 } else { 1 },
                    "exact",
                ),
                Check::zero("fd_sign_violations", fd_violations, "tol-sign"),
            ];
            if tr.j1 == 0.0 {
                checks.push(Check::new("energy_drift", tr.drift(), Comparison::Less, "tol-drift", *tol_drift));
            }
            if let Some(tol) = tol_identity {
                checks.push(Check::new("identity_max_rel", mismatch.max_rel, Comparison::Less, "tol-identity", *tol));
            }
            let results = json!({
                "J1": json_num(tr.j1),
                "verdict": verdict,
                "expected_verdict": expected,
                "energy_drift": json_num(tr.drift()),
                "fd_sign_violations": fd_violations,
                "identity": to_rounded_value(&mismatch),
                "identity_normwise": json_num(suite::normwise_mismatch(&tr)),
                "final_residual": json_num(run.final_residual),
                "csv": written,
            });
            Ok(RunReport::new("energy", Some(pp), results, checks))
        }
        Command::Barrier { params, mu, delta, xi, t, h0, levels, tol_order, out } => {
            let pp = params.validate()?;
            if *levels < 2 {
                return Err(Failure::Usage("--levels must be at least 2".into()));
            }
            let (rows, orders) = barrier_refinement(*mu, *delta, *xi, *t, &pp, *h0, *levels)?;
            let table: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.step, r.interior, r.neumann]).collect();
            let written = write_out(out.out.as_deref(), &["h", "interior", "neumann"], &table)?;
            let min_interior = orders.iter().map(|o| o.0).fold(f64::INFINITY, f64::min);
            let min_neumann = orders.iter().map(|o| o.1).fold(f64::INFINITY, f64::min);
            let results = json!({
                "residuals": to_rounded_value(&rows),
                "orders": orders.iter().map(|o| json!({"interior": json_num(o.0), "neumann": json_num(o.1)})).collect::<Vec<_>>(),
                "csv": written,
            });
            let checks = vec![
                Check::new("min_order_interior", min_interior, Comparison::GreaterEqual, "tol-order", *tol_order),
                Check::new("min_order_neumann", min_neumann, Comparison::GreaterEqual, "tol-order", *tol_order),
            ];
            Ok(RunReport::new("barrier", Some(pp), results, checks))
        }
        Command::Kelvin { params, tol_threshold, tol_invariance, .. } => {
            let pp = params.validate()?;
            let k = kelvin_exponent(&pp);
            let eqs = verify_equivalences_with_tol(&pp, *tol_threshold);
            let violations = eqs.iter().filter(|e| !e.agrees()).count();
            let mut checks = vec![Check::zero("equivalence_violations", violations, "exact")];
            // only defined when both α and ϑ lie above -2σ
            let invariance = constant_invariance(&pp).ok();
            if let Some(v) = invariance {
                checks.push(Check::new("constant_invariance", v, Comparison::Less, "tol-invariance", *tol_invariance));
            }
            let results = json!({
                "vartheta": json_num(k.vartheta),
                "mapped": to_rounded_value(&k.mapped),
                "equivalences": to_rounded_value(&eqs),
                "constant_invariance": invariance.map_or(Value::Null, json_num),
            });
            Ok(RunReport::new("kelvin", Some(pp), results, checks))
        }
        Command::Suite { criteria, .. } => {
            if let Some(bad) = criteria.iter().find(|&&c| !(1..=10).contains(&c)) {
                return Err(Failure::Usage(format!("unknown criterion {bad}")));
            }
            let outcomes = if criteria.is_empty() { suite::run_all() } else { run_selected(criteria) };
            let checks = outcomes
                .iter()
                .map(|o| Check::zero(&format!("criterion_{}", o.id), usize::from(!o.passed), "pass"))
                .collect();
            let results = json!({
                "criteria": outcomes
                    .iter()
                    .map(|o| json!({"id": o.id, "title": o.title, "passed": o.passed, "detail": o.detail}))
                    .collect::<Vec<_>>(),
            });
            Ok(RunReport::new("suite", None, results, checks))
        }
    }
}

fn run_selected(ids: &[u8]) -> Vec<suite::CriterionOutcome> {
    let mut ids = ids.to_vec();
    ids.sort_unstable();
    ids.dedup();
    let runs = ids.iter().any(|&i| i == 6 || i == 7).then(suite::MonotonicityRuns::compute);
    ids.iter()
        .map(|&i| match i {
            1 => suite::criterion_1(),
            2 => suite::criterion_2(),
            3 => suite::criterion_3(),
            4 => suite::criterion_4(),
            5 => suite::criterion_5(),
            6 => suite::criterion_6(runs.as_ref().expect("runs computed")),
            7 => suite::criterion_7(runs.as_ref().expect("runs computed")),
            8 => suite::criterion_8(),
            9 => suite::criterion_9(),
            _ => suite::criterion_10(),
        })
        .collect()
}
