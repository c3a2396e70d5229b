//! The acceptance battery: ten numbered criteria, each returning a pass/fail outcome with detail.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::energy::{
    derivative_identity_check, energy_halfsphere, energy_trace, formula_signs_consistent, homogeneous_energy,
    monotonicity_verdict, EnergyTrace, MonotonicityVerdict,
};
use crate::error::Result;
use crate::extension::{
    barrier_refinement, exact_sphere_profile, poisson_kernel_mass, solve_cylinder_pde, ExtensionField, FowlerField,
    GridSpec, SolverOptions,
};
use crate::fraclap::{verify_fall_identity, QuadratureConfig, RadialProfile};
use crate::kelvin::{constant_invariance, kelvin_exponent, kelvin_profile, verify_equivalences};
use crate::params::{classify_regime, tol_cmp, ProblemParams, RegimeLabel, TheoremTag, Threshold};
use crate::specialfn::{classical_limit_power, kappa_sigma, lambda_multiplier, singular_constant, PoleStatus};

/// Parameter tuples shared by the quadrature and energy criteria.
pub const TUPLES: [(i64, f64, f64, f64); 7] = [
    (3, 0.5, 0.0, 2.0),
    (3, 0.5, 0.0, 1.8),
    (4, 0.75, -0.5, 1.9),
    (2, 0.3, 0.2, 3.0),
    (5, 0.1, 0.1, 1.5),
    (3, 0.9, -1.0, 4.0),
    (2, 0.75, 0.5, 6.0),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "{} criterion {:>2} ({}): {} [{:.2} s]",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail,
            self.seconds
        )
    }
}

fn params(t: (i64, f64, f64, f64)) -> ProblemParams {
    ProblemParams::new(t.0, t.1, t.2, t.3).expect("valid tuple")
}

fn timed<F: FnOnce() -> (bool, String)>(id: u8, title: &'static str, f: F) -> CriterionOutcome {
    let t0 = Instant::now();
    let (passed, detail) = f();
    CriterionOutcome { id, title, passed, detail, seconds: t0.elapsed().as_secs_f64() }
}

fn err_outcome(e: crate::Error) -> (bool, String) {
    (false, format!("error: {e}"))
}

pub fn criterion_1() -> CriterionOutcome {
    timed(1, "Lambda symmetry", || {
        let mut worst: f64 = 0.0;
        let mut count = 0usize;
        for n in 2u32..=5 {
            for &s in &[0.1, 0.25, 0.5, 0.75, 0.9] {
                let half = (n as f64 - 2.0 * s) / 2.0;
                let (lo, hi) = (-half + 0.01, half - 0.01);
                for k in 0..=200 {
                    let tau = lo + (hi - lo) * k as f64 / 200.0;
                    let a = lambda_multiplier(tau, n, s);
                    let b = lambda_multiplier(-tau, n, s);
                    if a.status != PoleStatus::Regular || b.status != PoleStatus::Regular {
                        if a.status != b.status {
                            return (false, format!("pole status differs at n={n} sigma={s} tau={tau}"));
                        }
                        continue;
                    }
                    worst = worst.max((a.value - b.value).abs() / a.value.abs().max(1e-300));
                    count += 1;
                }
            }
        }
        (worst < 1e-12, format!("max relative asymmetry {worst:.3e} over {count} points (tol 1e-12)"))
    })
}

pub fn criterion_2() -> CriterionOutcome {
    timed(2, "Fall identity", || {
        let cfg = QuadratureConfig::default();
        let c = match singular_constant(&params(TUPLES[0])) {
            Ok(c) => c,
            Err(e) => return err_outcome(e),
        };
        let c_err = (c - 2.0 / PI).abs() / (2.0 / PI);
        let mut worst: f64 = 0.0;
        let mut slowest: f64 = 0.0;
        for &t in &TUPLES {
            let t0 = Instant::now();
            match verify_fall_identity(&params(t), &[0.5, 1.0, 2.0], &cfg) {
                Ok(r) => worst = worst.max(r.max_rel_error),
                Err(e) => return err_outcome(e),
            }
            slowest = slowest.max(t0.elapsed().as_secs_f64());
        }
        (
            worst < 1e-6 && c_err < 1e-14 && slowest < 10.0,
            format!(
                "max relative error {worst:.3e} over {} tuples (tol 1e-6); |C - 2/pi|/(2/pi) = {c_err:.1e}; slowest tuple {slowest:.2} s",
                TUPLES.len()
            ),
        )
    })
}

pub fn criterion_3() -> CriterionOutcome {
    timed(3, "kappa and Poisson unit mass", || {
        let k = (kappa_sigma(0.5) - 1.0).abs();
        let cfg = QuadratureConfig::default();
        let worst = [(2u32, 0.3), (3, 0.5), (4, 0.75)]
            .iter()
            .map(|&(n, s)| (poisson_kernel_mass(n, s, &cfg) - 1.0).abs())
            .fold(0.0, f64::max);
        (
            k < 1e-14 && worst < 1e-8,
            format!("|kappa_1/2 - 1| = {k:.1e} (tol 1e-14); max |mass - 1| = {worst:.3e} (tol 1e-8)"),
        )
    })
}

/// Relative gap between `C^{p-1}` at `σ = 0.999` and the local-case value, per `(n, α)`.
pub fn classical_limit_gaps() -> Vec<(u32, f64, f64, f64)> {
    let mut out = Vec::new();
    for n in [3u32, 4] {
        for alpha in [-0.5, 0.0, 0.5] {
            let nf = n as f64;
            let p = 0.5 * ((nf + alpha) / (nf - 2.0) + (nf + 2.0) / (nf - 2.0));
            let pp = ProblemParams::new(n as i64, 0.999, alpha, p).expect("valid");
            let gap = match singular_constant(&pp) {
                Ok(c) => {
                    let c0 = classical_limit_power(n, alpha, p);
                    (c.powf(p - 1.0) - c0).abs() / c0
                }
                Err(_) => f64::INFINITY,
            };
            out.push((n, alpha, p, gap));
        }
    }
    out
}

pub fn criterion_4() -> CriterionOutcome {
    timed(4, "classical limit at sigma = 0.999", || {
        let gaps = classical_limit_gaps();
        let worst = gaps.iter().map(|g| g.3).fold(0.0, f64::max);
        let list: Vec<String> = gaps.iter().map(|(n, a, _, g)| format!("n={n},a={a}:{g:.2e}")).collect();
        (worst < 5e-3, format!("max relative gap {worst:.3e} (tol 5e-3); {}", list.join(" ")))
    })
}

pub fn criterion_5() -> CriterionOutcome {
    timed(5, "exact-solution energy", || {
        let cfg = QuadratureConfig::default();
        let grid = GridSpec::default();
        let h = (16f64).ln() / 32.0;
        let radii: Vec<f64> = (-2..=34).map(|k| 0.25 * (k as f64 * h).exp()).collect();
        let mut worst_drift: f64 = 0.0;
        let mut worst_value: f64 = 0.0;
        let mut head = String::new();
        for (i, &t) in TUPLES.iter().enumerate() {
            let pp = params(t);
            let run = || -> Result<(f64, f64, f64)> {
                let prof = exact_sphere_profile(&pp, &grid.psi_nodes(), &cfg)?;
                let field = ExtensionField::exact_homogeneous(&pp, &radii, &prof)?;
                let es: Vec<f64> = radii[2..radii.len() - 2]
                    .iter()
                    .map(|&r| energy_halfsphere(&field, r))
                    .collect::<Result<_>>()?;
                let target = homogeneous_energy(&pp, singular_constant(&pp)?);
                let mx = es.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mn = es.iter().cloned().fold(f64::INFINITY, f64::min);
                let drift = (mx - mn) / target.abs();
                let value = es.iter().map(|e| (e - target).abs() / target.abs()).fold(0.0, f64::max);
                Ok((drift, value, es[es.len() / 2]))
            };
            match run() {
                Ok((d, v, e)) => {
                    worst_drift = worst_drift.max(d);
                    worst_value = worst_value.max(v);
                    if i == 0 {
                        head = format!("E(3,0.5,0,2) = {e:.6}");
                    }
                }
                Err(e) => return err_outcome(e),
            }
        }
        (
            worst_drift < 1e-3 && worst_value < 1e-3,
            format!(
                "over r in [0.25, 4] and {} tuples: max drift {worst_drift:.2e}, max deviation from closed form {worst_value:.2e} (tol 1e-3); {head}",
                TUPLES.len()
            ),
        )
    })
}

/// A perturbed cylinder solve and its energy trace on one grid.
#[derive(Debug, Clone)]
pub struct PerturbedRun {
    pub field: FowlerField,
    pub trace: EnergyTrace,
    pub final_residual: f64,
}

/// Solves with `(1 + ε)φ` at `s_min` and `φ` at `s_max`, `φ` the exact sphere profile.
pub fn perturbed_run(pp: &ProblemParams, grid: &GridSpec, eps: f64) -> Result<PerturbedRun> {
    let prof = exact_sphere_profile(pp, &grid.psi_nodes(), &QuadratureConfig::default())?;
    let init = FowlerField::constant_in_s(pp, &grid.s_nodes(), &prof)?;
    let left: Vec<f64> = prof.phi.iter().map(|v| (1.0 + eps) * v).collect();
    let sol = solve_cylinder_pde(pp, &left, &prof.phi, grid, Some(&init), &SolverOptions::default())?;
    let trace = energy_trace(&sol.field, None)?;
    let final_residual = *sol.residual_history.last().unwrap_or(&f64::NAN);
    Ok(PerturbedRun { field: sol.field, trace, final_residual })
}

/// Subcritical, critical and supercritical monotonicity configurations.
pub const MONOTONICITY_CONFIGS: [(&str, (i64, f64, f64, f64), MonotonicityVerdict); 3] = [
    ("subcritical", (3, 0.5, 0.0, 1.8), MonotonicityVerdict::NonDecreasing),
    ("critical", (3, 0.5, -0.25, 1.75), MonotonicityVerdict::Constant),
    ("supercritical", (3, 0.5, -0.5, 1.8), MonotonicityVerdict::NonIncreasing),
];

pub const PERTURBATION: f64 = 0.05;

/// Default-grid and refined-grid runs for every monotonicity configuration.
pub struct MonotonicityRuns {
    pub runs: Vec<(ProblemParams, Result<PerturbedRun>, Result<PerturbedRun>)>,
    /// Wall time of all solves.
    pub seconds: f64,
}

impl MonotonicityRuns {
    pub fn compute() -> Self {
        let t0 = Instant::now();
        let grid = GridSpec::default();
        let fine = grid.refined();
        let runs = std::thread::scope(|sc| {
            let handles: Vec<_> = MONOTONICITY_CONFIGS
                .iter()
                .map(|&(_, t, _)| {
                    let pp = params(t);
                    let (g, f) = (&grid, &fine);
                    let a = sc.spawn(move || perturbed_run(&pp, g, PERTURBATION));
                    let b = sc.spawn(move || perturbed_run(&pp, f, PERTURBATION));
                    (pp, a, b)
                })
                .collect();
            handles
                .into_iter()
                .map(|(pp, a, b)| (pp, a.join().expect("solver thread"), b.join().expect("solver thread")))
                .collect()
        });
        Self { runs, seconds: t0.elapsed().as_secs_f64() }
    }
}

/// `max |dE_fd(h) - dE_fd(h/2)|` over the nodes both traces share.
pub fn refinement_budget(coarse: &EnergyTrace, fine: &EnergyTrace) -> f64 {
    let mut budget: f64 = 0.0;
    for (s, d) in coarse.s.iter().zip(&coarse.de_fd) {
        if let Some(j) = fine.s.iter().position(|x| (x - s).abs() < 1e-9) {
            budget = budget.max((d - fine.de_fd[j]).abs());
        }
    }
    budget
}

/// Includes the wall time of the shared solves.
pub fn criterion_6(runs: &MonotonicityRuns) -> CriterionOutcome {
    let mut out = criterion_6_checks(runs);
    out.seconds += runs.seconds;
    out
}

fn criterion_6_checks(runs: &MonotonicityRuns) -> CriterionOutcome {
    timed(6, "monotonicity signs", || {
        let mut ok = true;
        let mut parts = Vec::new();
        for ((name, _, expected), (_, coarse, fine)) in MONOTONICITY_CONFIGS.iter().zip(&runs.runs) {
            let (c, f) = match (coarse, fine) {
                (Ok(c), Ok(f)) => (c, f),
                (Err(e), _) | (_, Err(e)) => return err_outcome(e.clone()),
            };
            let t = &c.trace;
            let signs = formula_signs_consistent(t);
            if t.j1 == 0.0 {
                let drift = t.drift();
                let pass = drift < 1e-6 && signs;
                ok &= pass;
                parts.push(format!("{name}: J1=0, drift {drift:.2e} (tol 1e-6)"));
            } else {
                let budget = refinement_budget(t, &f.trace);
                let worst = t.de_fd.iter().map(|d| -d * t.j1.signum()).fold(f64::NEG_INFINITY, f64::max);
                let verdict = monotonicity_verdict(t, budget);
                let pass = signs && worst <= budget && verdict == *expected;
                ok &= pass;
                parts.push(format!(
                    "{name}: J1={:.3}, formula signs {}, worst opposing dE_fd {:.2e} vs budget {budget:.2e}, verdict {verdict:?}",
                    t.j1,
                    if signs { "ok" } else { "WRONG" },
                    worst.max(0.0)
                ));
            }
        }
        (ok, parts.join("; "))
    })
}

/// `max |dE_fd - dE_formula| / max |dE_formula|`.
pub fn normwise_mismatch(t: &EnergyTrace) -> f64 {
    let num = t.de_fd.iter().zip(&t.de_formula).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let den = t.de_formula.iter().map(|b| b.abs()).fold(0.0, f64::max);
    num / den
}

/// Smooth field that does not solve the cylinder equation.
pub fn negative_control_field(pp: &ProblemParams, grid: &GridSpec) -> Result<FowlerField> {
    let prof = exact_sphere_profile(pp, &grid.psi_nodes(), &QuadratureConfig::default())?;
    let s = grid.s_nodes();
    let values = s
        .iter()
        .map(|&x| prof.phi.iter().map(|&v| v * (1.0 + 0.3 * (-x * x).exp())).collect())
        .collect();
    FowlerField::new(s, prof.psi.clone(), values, *pp)
}

pub fn criterion_7(runs: &MonotonicityRuns) -> CriterionOutcome {
    timed(7, "derivative identity", || {
        let mut ok = true;
        let mut parts = Vec::new();
        for ((name, _, _), (pp, coarse, fine)) in MONOTONICITY_CONFIGS.iter().zip(&runs.runs) {
            if pp.derived().j1 == 0.0 {
                continue;
            }
            let (c, f) = match (coarse, fine) {
                (Ok(c), Ok(f)) => (c, f),
                (Err(e), _) | (_, Err(e)) => return err_outcome(e.clone()),
            };
            let mc = derivative_identity_check(&c.trace).max_rel;
            let mf = derivative_identity_check(&f.trace).max_rel;
            let pass = mc < 0.05 && mf <= 0.5 * mc;
            ok &= pass;
            parts.push(format!(
                "{name}: max relative mismatch {mc:.3e} -> {mf:.3e} under refinement (tol 5e-2, halving); normwise {:.2e} -> {:.2e}",
                normwise_mismatch(&c.trace),
                normwise_mismatch(&f.trace)
            ));
        }
        let pp = params(MONOTONICITY_CONFIGS[0].1);
        match negative_control_field(&pp, &GridSpec::default()).and_then(|f| energy_trace(&f, None)) {
            Ok(t) => {
                let m = derivative_identity_check(&t).max_rel;
                ok &= m > 0.5;
                parts.push(format!("negative control mismatch {m:.2e} (must be O(1))"));
            }
            Err(e) => return err_outcome(e),
        }
        (ok, parts.join("; "))
    })
}

fn random_params(rng: &mut ChaCha8Rng) -> ProblemParams {
    let n = rng.gen_range(2i64..=8);
    let s = rng.gen_range(0.01..0.99);
    let mut a = rng.gen_range(-3.0..3.0);
    match rng.gen_range(0..10) {
        0 => a = 0.0,
        1 => a = -2.0 * s,
        2 => a = 2.0 * s,
        _ => {}
    }
    let base = ProblemParams::new(n, s, a, 2.0).expect("valid");
    let d = base.derived();
    let mut p = rng.gen_range(1.01..8.0);
    let snap = match rng.gen_range(0..10) {
        0 => d.serrin,
        1 => d.hardy_sobolev_crit,
        2 => d.thm11_upper,
        3 => d.sobolev_crit,
        _ => p,
    };
    if snap > 1.0 {
        p = snap;
    }
    base.with_p(p)
}

pub fn criterion_8() -> CriterionOutcome {
    timed(8, "exponent equivalences and Kelvin map", || {
        let mut rng = ChaCha8Rng::seed_from_u64(20240101);
        let draws = 100_000;
        let mut violations = 0usize;
        for _ in 0..draws {
            let pp = random_params(&mut rng);
            violations += verify_equivalences(&pp).iter().filter(|e| !e.agrees()).count();
            let d = pp.derived();
            let tol = 1e-9;
            let beta_pos = tol_cmp(d.beta, 0.0, tol) == std::cmp::Ordering::Greater;
            let alpha_ok = tol_cmp(pp.alpha, -2.0 * pp.sigma, tol) == std::cmp::Ordering::Greater;
            let beta_small = tol_cmp(d.beta, pp.n_minus_2s(), tol) == std::cmp::Ordering::Less;
            let above_serrin = tol_cmp(pp.p, d.serrin, tol) == std::cmp::Ordering::Greater;
            if beta_pos != alpha_ok || (alpha_ok && beta_small != above_serrin) {
                violations += 1;
            }
        }
        let mut worst_c: f64 = 0.0;
        let mut worst_inv: f64 = 0.0;
        for _ in 0..100 {
            let n = rng.gen_range(2i64..=8);
            let s = rng.gen_range(0.05..0.95);
            let a = rng.gen_range(-2.0 * s + 0.05..2.0);
            let serrin = (n as f64 + a) / (n as f64 - 2.0 * s);
            let p = (serrin + rng.gen_range(0.05..3.0)).max(1.01);
            let pp = match ProblemParams::new(n, s, a, p) {
                Ok(pp) => pp,
                Err(e) => return err_outcome(e),
            };
            match constant_invariance(&pp) {
                Ok(v) => worst_c = worst_c.max(v),
                Err(e) => return err_outcome(e),
            }
            let u = RadialProfile::from_fn(|r| (1.0 + r * r).powf(-0.7) * (2.0 + r.sin()), 0.0, 1.4);
            let twice = kelvin_profile(&kelvin_profile(&u, pp.n, s), pp.n, s);
            for _ in 0..5 {
                let r = (rng.gen_range(-4.0..4.0f64)).exp();
                worst_inv = worst_inv.max((twice.evaluate(r) / u.evaluate(r) - 1.0).abs());
            }
            let back = kelvin_exponent(&kelvin_exponent(&pp).mapped).vartheta;
            worst_inv = worst_inv.max((back - a).abs() / (1.0 + p * n as f64));
        }
        (
            violations == 0 && worst_c < 1e-12 && worst_inv < 1e-12,
            format!(
                "{violations} violations over {draws} draws; constant invariance {worst_c:.2e} (tol 1e-12); involution {worst_inv:.2e} (tol 1e-12)"
            ),
        )
    })
}

/// `(params, μ, δ, |x|, t)` configurations of the barrier criterion.
pub fn barrier_configs() -> Vec<(ProblemParams, f64, f64, f64, f64)> {
    vec![
        (params((3, 0.6, 0.0, 2.0)), 0.7, 0.3, 1.0, 0.6),
        (params((3, 0.5, 0.0, 1.8)), 1.2, 0.1, 0.8, 0.5),
        (params((2, 0.3, 0.2, 3.0)), 0.5, 0.25, 1.3, 0.9),
        (params((4, 0.75, -0.5, 1.9)), 1.5, 0.4, 0.7, 1.1),
    ]
}

pub fn criterion_9() -> CriterionOutcome {
    timed(9, "barrier identities", || {
        let mut min_order = f64::INFINITY;
        for (pp, mu, delta, xi, t) in barrier_configs() {
            match barrier_refinement(mu, delta, xi, t, &pp, 0.04, 3) {
                Ok((_, orders)) => {
                    for (a, b) in orders {
                        min_order = min_order.min(a).min(b);
                    }
                }
                Err(e) => return err_outcome(e),
            }
        }
        (min_order >= 1.8, format!("minimum observed order {min_order:.3} over two refinements (needs >= 1.8)"))
    })
}

/// Hand-checked classifier truth table.
pub struct CuratedPoint {
    pub params: (i64, f64, f64, f64),
    pub label: RegimeLabel,
    pub tags: &'static [TheoremTag],
    pub thresholds: &'static [Threshold],
}

pub fn curated_points() -> Vec<CuratedPoint> {
    use RegimeLabel::*;
    use TheoremTag::*;
    use Threshold::*;
    vec![
        CuratedPoint { params: (3, 0.5, -1.5, 1.5), label: NonexistenceAlphaBelowMinus2Sigma, tags: &[Cor2_1], thresholds: &[] },
        CuratedPoint {
            params: (3, 0.5, -1.0, 1.5),
            label: Supercritical,
            tags: &[],
            thresholds: &[AlphaEqualsMinus2Sigma, PEqualsThm11Upper],
        },
        CuratedPoint { params: (3, 0.5, 0.0, 1.2), label: ExteriorTriviality, tags: &[Thm1_3_1], thresholds: &[AlphaEqualsZero] },
        CuratedPoint {
            params: (3, 0.5, 0.0, 1.5),
            label: SerrinCritical,
            tags: &[],
            thresholds: &[AlphaEqualsZero, PEqualsSerrin, PEqualsLaneEmdenSerrin],
        },
        CuratedPoint {
            params: (3, 0.5, 0.0, 1.8),
            label: Subcritical,
            tags: &[Thm1_1, Thm1_2, Thm1_3_2, Thm1_4, Cor1_1],
            thresholds: &[AlphaEqualsZero],
        },
        CuratedPoint {
            params: (3, 0.5, 0.0, 2.0),
            label: HardySobolevCritical,
            tags: &[],
            thresholds: &[AlphaEqualsZero, PEqualsHardySobolev, PEqualsThm11Upper, PEqualsSobolev],
        },
        CuratedPoint { params: (3, 0.5, -0.25, 1.75), label: HardySobolevCritical, tags: &[Thm1_2, Thm1_3_2], thresholds: &[PEqualsHardySobolev] },
        CuratedPoint { params: (3, 0.5, -0.5, 1.8), label: Supercritical, tags: &[Thm1_2, Thm1_3_2], thresholds: &[] },
        CuratedPoint {
            params: (3, 0.5, -0.5, 1.75),
            label: Supercritical,
            tags: &[Thm1_1, Thm1_2, Thm1_3_2, Thm1_4],
            thresholds: &[PEqualsThm11Upper],
        },
        CuratedPoint { params: (3, 0.5, 1.0, 1.9), label: ExteriorTriviality, tags: &[Thm1_3_1], thresholds: &[AlphaEquals2Sigma] },
        CuratedPoint { params: (3, 0.5, 0.3, 2.5), label: Supercritical, tags: &[], thresholds: &[] },
        CuratedPoint { params: (4, 0.75, 0.5, 2.0), label: Subcritical, tags: &[Thm1_2, Thm1_3_2], thresholds: &[] },
    ]
}

pub fn criterion_10() -> CriterionOutcome {
    timed(10, "classifier truth table", || {
        let pts = curated_points();
        let mut wrong = Vec::new();
        for pt in &pts {
            let v = classify_regime(&params(pt.params));
            let tags: BTreeSet<_> = pt.tags.iter().copied().collect();
            let ths: BTreeSet<_> = pt.thresholds.iter().copied().collect();
            if v.label != pt.label || v.applicable_theorems != tags || v.thresholds_hit != ths {
                wrong.push(format!("{:?}", pt.params));
            }
        }
        (wrong.is_empty(), format!("{} of {} points match; mismatches: [{}]", pts.len() - wrong.len(), pts.len(), wrong.join(" ")))
    })
}

/// Runs every criterion in order.
pub fn run_all() -> Vec<CriterionOutcome> {
    let mut out = vec![criterion_1(), criterion_2(), criterion_3(), criterion_4(), criterion_5()];
    let runs = MonotonicityRuns::compute();
    out.push(criterion_6(&runs));
    out.push(criterion_7(&runs));
    out.extend([criterion_8(), criterion_9(), criterion_10()]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_criteria_pass() {
        for o in [criterion_1(), criterion_3(), criterion_8(), criterion_9(), criterion_10()] {
            assert!(o.passed, "{}", o.line());
        }
    }

    #[test]
    fn curated_points_cover_every_threshold() {
        let hit: BTreeSet<Threshold> = curated_points().iter().flat_map(|p| p.thresholds.iter().copied()).collect();
        assert_eq!(hit.len(), 8);
    }

    #[test]
    fn refinement_budget_uses_shared_nodes() {
        let a = EnergyTrace { s: vec![0.0, 1.0], e: vec![0.0; 2], de_formula: vec![0.0; 2], de_fd: vec![1.0, 2.0], j1: 1.0 };
        let b = EnergyTrace {
            s: vec![0.0, 0.5, 1.0],
            e: vec![0.0; 3],
            de_formula: vec![0.0; 3],
            de_fd: vec![1.5, 9.0, 2.25],
            j1: 1.0,
        };
        assert_eq!(refinement_budget(&a, &b), 0.5);
    }
}
