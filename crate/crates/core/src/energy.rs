//! Monotonicity energy in half-sphere and Fowler-cylinder form, its derivative identity and
//! monotonicity verdicts.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extension::{AngularGrid, ExtensionField, FowlerField};
use crate::params::ProblemParams;
use crate::specialfn::kappa_sigma;

fn node_index(nodes: &[f64], x: f64, what: &str) -> Result<usize> {
    let h = if nodes.len() > 1 { (nodes[1] - nodes[0]).abs() } else { 1.0 };
    nodes
        .iter()
        .position(|&v| (v - x).abs() <= 1e-9 * h)
        .ok_or_else(|| Error::Grid(format!("{what} = {x} is not a grid node")))
}

fn uniform_step(nodes: &[f64], what: &str) -> Result<f64> {
    if nodes.len() < 3 {
        return Err(Error::Grid(format!("{what} grid needs at least 3 nodes")));
    }
    let h = (nodes[nodes.len() - 1] - nodes[0]) / (nodes.len() - 1) as f64;
    for (k, &x) in nodes.iter().enumerate() {
        if (x - (nodes[0] + k as f64 * h)).abs() > 1e-9 * h.abs() {
            return Err(Error::Grid(format!("{what} grid must be uniform")));
        }
    }
    Ok(h)
}

/// Centered derivative along the first index at row `k`; fourth order where two neighbours
/// exist on each side.
fn centered_derivative(rows: &[Vec<f64>], k: usize, h: f64) -> Result<Vec<f64>> {
    let n = rows.len();
    if k == 0 || k + 1 >= n {
        return Err(Error::Grid("no centered difference at the grid edge".into()));
    }
    let m = rows[k].len();
    if k >= 2 && k + 2 < n {
        Ok((0..m)
            .map(|i| (rows[k - 2][i] - 8.0 * rows[k - 1][i] + 8.0 * rows[k + 1][i] - rows[k + 2][i]) / (12.0 * h))
            .collect())
    } else {
        Ok((0..m).map(|i| (rows[k + 1][i] - rows[k - 1][i]) / (2.0 * h)).collect())
    }
}

fn quad(grid: &AngularGrid, a: &[f64], b: &[f64]) -> f64 {
    grid.mass.iter().zip(a).zip(b).map(|((m, x), y)| m * x * y).sum()
}

fn potential(v0: f64, p: f64) -> f64 {
    v0.max(0.0).powf(p + 1.0) / (p + 1.0)
}

/// `Ẽ(s)` at an interior grid node `s`.
pub fn energy_cylinder(field: &FowlerField, s: f64) -> Result<f64> {
    let params = field.params;
    let h = uniform_step(&field.s, "s")?;
    let k = node_index(&field.s, s, "s")?;
    let vs = centered_derivative(&field.values, k, h)?;
    let grid = AngularGrid::new(field.psi.clone(), params.n, params.sigma)?;
    let v = &field.values[k];
    let j2 = params.derived().j2;
    let e = 0.5 * quad(&grid, &vs, &vs) - 0.5 * j2 * quad(&grid, v, v) - 0.5 * grid.dirichlet_form(v, v) / grid.area
        + kappa_sigma(params.sigma) * potential(v[0], params.p);
    Ok(grid.area * e)
}

/// `E(r; U)` as the sum of the five weighted surface integrals over `∂⁺B_r⁺` and `∂B_r`.
///
/// `U_r` comes from centered differences in `ln r`, so the radii must be log-uniform.
pub fn energy_halfsphere(field: &ExtensionField, r: f64) -> Result<f64> {
    let params = field.params;
    let logs: Vec<f64> = field.radii.iter().map(|x| x.ln()).collect();
    let h = uniform_step(&logs, "ln r")?;
    let k = node_index(&logs, r.ln(), "ln r")?;
    let r = field.radii[k];
    let du = centered_derivative(&field.values, k, h)?;
    let ur: Vec<f64> = du.iter().map(|d| d / r).collect();
    let u = &field.values[k];
    let grid = AngularGrid::new(field.psi.clone(), params.n, params.sigma)?;
    let nf = params.nf();
    let s = params.sigma;
    let p = params.p;
    let beta = params.beta();
    // ∫_{∂⁺B_r⁺} t^{1-2σ} f = r^{n+1-2σ} |S^{n-1}| Σ m_i f_i
    let surf = r.powf(nf + 1.0 - 2.0 * s) * grid.area;
    let a = (2.0 * (p + 1.0) * s + 2.0 * params.alpha) / (p - 1.0) - nf;
    let grad2 = quad(&grid, &ur, &ur) + grid.dirichlet_form(u, u) / grid.area / (r * r);
    let t1 = r.powf(a) * (r * surf * quad(&grid, &ur, &ur) + beta * surf * quad(&grid, &ur, u));
    let t2 = beta * (beta - 0.5 * params.n_minus_2s()) * r.powf(a - 1.0) * surf * quad(&grid, u, u);
    let t3 = -0.5 * r.powf(a + 1.0) * surf * grad2;
    let bnd = r.powf(nf - 1.0) * grid.area * u[0].max(0.0).powf(p + 1.0);
    let t4 = kappa_sigma(s) / (p + 1.0) * r.powf(beta * (p + 1.0) - nf + 1.0) * bnd;
    Ok(t1 + t2 + t3 + t4)
}

/// `κ_σ (1/(p+1) - 1/2) C^{p+1} |S^{n-1}|` for a profile with boundary value `c`.
pub fn homogeneous_energy(params: &ProblemParams, c: f64) -> f64 {
    let p = params.p;
    kappa_sigma(params.sigma) * (1.0 / (p + 1.0) - 0.5) * c.powf(p + 1.0) * crate::specialfn::sphere_area(params.n)
}

/// Energy samples along `s` with the derivative identity evaluated both ways.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyTrace {
    pub s: Vec<f64>,
    #[serde(rename = "E")]
    pub e: Vec<f64>,
    #[serde(rename = "dE_formula")]
    pub de_formula: Vec<f64>,
    #[serde(rename = "dE_fd")]
    pub de_fd: Vec<f64>,
    #[serde(rename = "J1")]
    pub j1: f64,
}

/// Energy trace on the nodes of `field` lying in `[s_lo, s_hi]` (two nodes from each end at least).
///
/// `E` at node `k` is the mean of the two adjacent staggered energies
/// `|S|[½ D₊ᵀMD₊ - ½ V_kᵀ(J₂M + A)V_{k+1} + κ_σ(G(V_{k,0}) + G(V_{k+1,0}))/2]`, `G(v) = v^{p+1}/(p+1)`.
/// `dE_formula = J₁ |S| cᵀMc` with the centered `V_s` and `dE_fd` is the centered difference of `E`.
pub fn energy_trace(field: &FowlerField, range: Option<(f64, f64)>) -> Result<EnergyTrace> {
    let params = field.params;
    let h = uniform_step(&field.s, "s")?;
    let ns = field.s.len();
    if ns < 5 {
        return Err(Error::Grid("energy trace needs at least 5 s nodes".into()));
    }
    let grid = AngularGrid::new(field.psi.clone(), params.n, params.sigma)?;
    let d = params.derived();
    let kappa = kappa_sigma(params.sigma);
    let v = &field.values;
    let half: Vec<f64> = (0..ns - 1)
        .map(|k| {
            let dp: Vec<f64> = v[k + 1].iter().zip(&v[k]).map(|(a, b)| (a - b) / h).collect();
            let av = grid.stiffness(&v[k + 1]);
            let q = d.j2 * quad(&grid, &v[k], &v[k + 1]) + v[k].iter().zip(&av).map(|(x, y)| x * y).sum::<f64>();
            grid.area
                * (0.5 * quad(&grid, &dp, &dp) - 0.5 * q
                    + 0.5 * kappa * (potential(v[k][0], params.p) + potential(v[k + 1][0], params.p)))
        })
        .collect();
    let e_node = |k: usize| 0.5 * (half[k - 1] + half[k]);
    let (lo, hi) = range.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    let mut out = EnergyTrace { s: vec![], e: vec![], de_formula: vec![], de_fd: vec![], j1: d.j1 };
    for k in 2..ns - 2 {
        let s = field.s[k];
        if s < lo - 1e-9 * h || s > hi + 1e-9 * h {
            continue;
        }
        let c: Vec<f64> = v[k + 1].iter().zip(&v[k - 1]).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        out.s.push(s);
        out.e.push(e_node(k));
        out.de_formula.push(d.j1 * grid.area * quad(&grid, &c, &c));
        out.de_fd.push((e_node(k + 1) - e_node(k - 1)) / (2.0 * h));
    }
    if out.s.is_empty() {
        return Err(Error::Grid("range contains no interior node".into()));
    }
    Ok(out)
}

impl EnergyTrace {
    /// `max |E|`, floored at 1.
    pub fn scale(&self) -> f64 {
        self.e.iter().fold(1.0f64, |a, b| a.max(b.abs()))
    }

    /// `max E - min E`
    pub fn drift(&self) -> f64 {
        let mx = self.e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mn = self.e.iter().cloned().fold(f64::INFINITY, f64::min);
        mx - mn
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityMismatch {
    pub max_abs: f64,
    pub max_rel: f64,
    pub floor: f64,
}

/// `max |dE_fd - dE_formula| / (|dE_formula| + ε)`, `ε = 1e-10 · scale`.
pub fn derivative_identity_check(trace: &EnergyTrace) -> IdentityMismatch {
    let floor = 1e-10 * trace.scale();
    let mut max_abs: f64 = 0.0;
    let mut max_rel: f64 = 0.0;
    for (a, b) in trace.de_fd.iter().zip(&trace.de_formula) {
        let d = (a - b).abs();
        max_abs = max_abs.max(d);
        max_rel = max_rel.max(d / (b.abs() + floor));
    }
    IdentityMismatch { max_abs, max_rel, floor }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MonotonicityVerdict {
    NonDecreasing,
    NonIncreasing,
    Constant,
    Violated,
}

/// Verdict against `sign(J₁)`; `budget` is the absolute slack allowed on `dE_fd` and on the drift.
pub fn monotonicity_verdict(trace: &EnergyTrace, budget: f64) -> MonotonicityVerdict {
    let flat = trace.de_fd.iter().all(|d| d.abs() <= budget) && trace.drift() <= budget;
    if flat {
        return MonotonicityVerdict::Constant;
    }
    if trace.j1 > 0.0 && trace.de_fd.iter().all(|&d| d >= -budget) {
        MonotonicityVerdict::NonDecreasing
    } else if trace.j1 < 0.0 && trace.de_fd.iter().all(|&d| d <= budget) {
        MonotonicityVerdict::NonIncreasing
    } else {
        MonotonicityVerdict::Violated
    }
}

/// Whether every `dE_formula` entry has the sign of `J₁` or vanishes.
pub fn formula_signs_consistent(trace: &EnergyTrace) -> bool {
    trace.de_formula.iter().all(|&d| d == 0.0 || d.signum() == trace.j1.signum())
}
