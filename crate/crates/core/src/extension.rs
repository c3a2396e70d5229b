//! Extension problem: Poisson extension of radial traces, weighted Neumann flux, Fowler
//! variables, the homogeneous sphere profile, barrier identities and the cylinder solver.
//!
//! Every field is cylindrically symmetric. Points of the upper half-space are written as
//! `X = (x, t)` with `|X| = r`, `|x| = r cos ψ` and `t = r sin ψ`, `ψ ∈ [0, π/2]`.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::banded::BandMatrix;
use crate::error::{Error, Result};
use crate::fraclap::{check_lsigma_membership, difference_integral, value_integral, QuadratureConfig, RadialProfile};
use crate::params::ProblemParams;
use crate::quadrature;
use crate::specialfn::{kappa_sigma, poisson_normalizer, singular_constant, sphere_area};

/// Finite-volume data on a `ψ`-grid for the weight `w(ψ) = sin^{1-2σ}ψ cos^{n-1}ψ`.
///
/// Cells are bounded by the midpoints between nodes. `mass[i]` is the exact weighted measure of
/// cell `i`; `resistance[i]` couples nodes `i` and `i+1` and is exact for the `sin^{2σ-1}` factor.
#[derive(Debug, Clone)]
pub struct AngularGrid {
    pub psi: Vec<f64>,
    pub mass: Vec<f64>,
    pub resistance: Vec<f64>,
    /// `|S^{n-1}|`
    pub area: f64,
    pub n: u32,
    pub sigma: f64,
}

impl AngularGrid {
    pub fn new(psi: Vec<f64>, n: u32, sigma: f64) -> Result<Self> {
        let m = psi.len();
        if m < 3 {
            return Err(Error::Grid("psi grid needs at least 3 nodes".into()));
        }
        if psi[0] != 0.0 || (psi[m - 1] - FRAC_PI_2).abs() > 1e-14 {
            return Err(Error::Grid("psi grid must run from 0 to pi/2".into()));
        }
        if psi.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Grid("psi grid must be strictly increasing".into()));
        }
        let gl = quadrature::rule(24);
        let nf = n as f64;
        let w = |x: f64| x.sin().powf(1.0 - 2.0 * sigma) * x.cos().powf(nf - 1.0);
        let faces: Vec<f64> = psi.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect();
        let mut mass = Vec::with_capacity(m);
        for i in 0..m {
            let a = if i == 0 { 0.0 } else { faces[i - 1] };
            let b = if i == m - 1 { FRAC_PI_2 } else { faces[i] };
            let v = if i == 0 {
                quadrature::power_map_origin(&gl, b, 1.0 - 2.0 * sigma, w)
            } else {
                quadrature::uniform(&gl, a, b, 2, w)
            };
            mass.push(v);
        }
        let mut resistance = Vec::with_capacity(m - 1);
        for i in 0..m - 1 {
            let s = |x: f64| x.sin().powf(2.0 * sigma - 1.0);
            let num = if i == 0 {
                quadrature::power_map_origin(&gl, psi[1], 2.0 * sigma - 1.0, s)
            } else {
                quadrature::uniform(&gl, psi[i], psi[i + 1], 2, s)
            };
            resistance.push(num / faces[i].cos().powf(nf - 1.0));
        }
        Ok(Self { psi, mass, resistance, area: sphere_area(n), n, sigma })
    }

    /// `N` equally spaced nodes on `[0, π/2]`.
    pub fn uniform(npsi: usize, n: u32, sigma: f64) -> Result<Self> {
        Self::new(uniform_psi(npsi), n, sigma)
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    /// `∫_{S^n_+} θ_1^{1-2σ} f`.
    pub fn weighted_integral(&self, f: &[f64]) -> f64 {
        self.area * self.mass.iter().zip(f).map(|(m, v)| m * v).sum::<f64>()
    }

    /// `∫_{S^n_+} θ_1^{1-2σ} ∇u·∇v`.
    pub fn dirichlet_form(&self, u: &[f64], v: &[f64]) -> f64 {
        let s: f64 = (0..self.len() - 1)
            .map(|i| (u[i + 1] - u[i]) * (v[i + 1] - v[i]) / self.resistance[i])
            .sum();
        self.area * s
    }

    /// Stiffness action `(A v)_i`, the discrete `-d/dψ(w dv/dψ)` integrated over cell `i`
    /// with zero flux at both ends.
    pub fn stiffness(&self, v: &[f64]) -> Vec<f64> {
        let m = self.len();
        let mut out = vec![0.0; m];
        for i in 0..m - 1 {
            let f = (v[i + 1] - v[i]) / self.resistance[i];
            out[i] -= f;
            out[i + 1] += f;
        }
        out
    }
}

pub fn uniform_psi(npsi: usize) -> Vec<f64> {
    graded_psi(npsi, 1.0)
}

/// `ψ_i = (π/2)(i/(N-1))^γ`; `γ > 1` concentrates nodes at the degenerate edge `ψ = 0`.
pub fn graded_psi(npsi: usize, gamma: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..npsi)
        .map(|i| FRAC_PI_2 * (i as f64 / (npsi - 1) as f64).powf(gamma))
        .collect();
    v[npsi - 1] = FRAC_PI_2;
    v
}

/// Default grading exponent of the `ψ` grid.
pub const DEFAULT_PSI_GRADING: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    PoissonEvaluated,
    CylinderSolved,
    ExactHomogeneous,
}

/// Samples of `U(r, ψ)`; `values[k][i]` sits at `radii[k]`, `psi[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionField {
    pub radii: Vec<f64>,
    pub psi: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub params: ProblemParams,
    pub representation: Representation,
}

/// Samples of `V(s, ψ) = e^{βs} U(e^s, ψ)`; `values[k][i]` sits at `s[k]`, `psi[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FowlerField {
    pub s: Vec<f64>,
    pub psi: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub params: ProblemParams,
}

/// Angular profile `φ(ψ)` of a homogeneous extension `U = |X|^{-β} φ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereProfile {
    pub psi: Vec<f64>,
    pub phi: Vec<f64>,
    pub boundary_value: f64,
}

fn check_grid(rows: &[Vec<f64>], len: usize) -> Result<()> {
    if rows.iter().any(|r| r.len() != len) {
        return Err(Error::Grid("row length differs from psi grid".into()));
    }
    Ok(())
}

impl ExtensionField {
    pub fn new(
        radii: Vec<f64>,
        psi: Vec<f64>,
        values: Vec<Vec<f64>>,
        params: ProblemParams,
        representation: Representation,
    ) -> Result<Self> {
        if values.len() != radii.len() {
            return Err(Error::Grid("one row of values per radius required".into()));
        }
        check_grid(&values, psi.len())?;
        if radii.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::Grid("radii must be positive".into()));
        }
        if values.iter().flatten().any(|&v| !(v >= 0.0)) {
            return Err(Error::Grid("extension values must be nonnegative".into()));
        }
        Ok(Self { radii, psi, values, params, representation })
    }

    /// `U = r^{-β} φ(ψ)` on the given radii.
    pub fn exact_homogeneous(params: &ProblemParams, radii: &[f64], profile: &SphereProfile) -> Result<Self> {
        let beta = params.beta();
        let values = radii
            .iter()
            .map(|&r| profile.phi.iter().map(|&f| r.powf(-beta) * f).collect())
            .collect();
        Self::new(radii.to_vec(), profile.psi.clone(), values, *params, Representation::ExactHomogeneous)
    }

    /// Poisson extension of `trace` evaluated at every node; `ψ = 0` takes the trace value.
    pub fn from_trace(
        trace: &RadialProfile,
        params: &ProblemParams,
        radii: &[f64],
        psi: &[f64],
        cfg: &QuadratureConfig,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(radii.len());
        for &r in radii {
            let mut row = Vec::with_capacity(psi.len());
            for &ps in psi {
                row.push(if ps == 0.0 {
                    trace.evaluate(r)
                } else {
                    poisson_extend_radial(trace, r, ps, params.n, params.sigma, cfg)?
                });
            }
            values.push(row);
        }
        Self::new(radii.to_vec(), psi.to_vec(), values, *params, Representation::PoissonEvaluated)
    }

    /// `U_λ(X) = λ^β U(λX)`, sampled on `radii / λ`.
    pub fn rescaled(&self, lambda: f64) -> Self {
        let f = lambda.powf(self.params.beta());
        Self {
            radii: self.radii.iter().map(|r| r / lambda).collect(),
            psi: self.psi.clone(),
            values: self.values.iter().map(|row| row.iter().map(|v| v * f).collect()).collect(),
            params: self.params,
            representation: self.representation,
        }
    }
}

impl FowlerField {
    pub fn new(s: Vec<f64>, psi: Vec<f64>, values: Vec<Vec<f64>>, params: ProblemParams) -> Result<Self> {
        if values.len() != s.len() {
            return Err(Error::Grid("one row of values per s node required".into()));
        }
        check_grid(&values, psi.len())?;
        Ok(Self { s, psi, values, params })
    }

    /// `V(s, ψ) = φ(ψ)` for every `s`.
    pub fn constant_in_s(params: &ProblemParams, s: &[f64], profile: &SphereProfile) -> Result<Self> {
        Self::new(s.to_vec(), profile.psi.clone(), vec![profile.phi.clone(); s.len()], *params)
    }

    /// Uniform spacing of the `s` grid, if uniform.
    pub fn spacing(&self) -> Result<f64> {
        if self.s.len() < 2 {
            return Err(Error::Grid("s grid needs at least 2 nodes".into()));
        }
        let h = (self.s[self.s.len() - 1] - self.s[0]) / (self.s.len() - 1) as f64;
        for (k, &sk) in self.s.iter().enumerate() {
            if (sk - (self.s[0] + k as f64 * h)).abs() > 1e-9 * h.abs().max(1.0) {
                return Err(Error::Grid("s grid must be uniform".into()));
            }
        }
        Ok(h)
    }
}

pub fn fowler_map(field: &ExtensionField) -> FowlerField {
    let beta = field.params.beta();
    FowlerField {
        s: field.radii.iter().map(|r| r.ln()).collect(),
        psi: field.psi.clone(),
        values: field
            .radii
            .iter()
            .zip(&field.values)
            .map(|(r, row)| {
                let f = r.powf(beta);
                row.iter().map(|u| f * u).collect()
            })
            .collect(),
        params: field.params,
    }
}

pub fn fowler_unmap(field: &FowlerField, representation: Representation) -> ExtensionField {
    let beta = field.params.beta();
    ExtensionField {
        radii: field.s.iter().map(|s| s.exp()).collect(),
        psi: field.psi.clone(),
        values: field
            .s
            .iter()
            .zip(&field.values)
            .map(|(s, row)| {
                let f = (-beta * s).exp();
                row.iter().map(|v| f * v).collect()
            })
            .collect(),
        params: field.params,
        representation,
    }
}

/// `U(X)` for `X = (r cos ψ, r sin ψ)`, `0 < ψ ≤ π/2`, as a Poisson convolution of `trace`.
pub fn poisson_extend_radial(
    trace: &RadialProfile,
    r: f64,
    psi: f64,
    n: u32,
    sigma: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let coarse = poisson_unchecked(trace, r, psi, n, sigma, cfg)?;
    let fine = poisson_unchecked(trace, r, psi, n, sigma, &cfg.refined(1.5))?;
    let err = (fine - coarse).abs();
    if err > cfg.convergence_tol * fine.abs().max(trace.evaluate(r).abs()) {
        return Err(Error::Quadrature { estimate: fine, error: err });
    }
    Ok(fine)
}

fn poisson_unchecked(trace: &RadialProfile, r: f64, psi: f64, n: u32, sigma: f64, cfg: &QuadratureConfig) -> Result<f64> {
    cfg.validate()?;
    if !(psi > 0.0 && psi <= FRAC_PI_2) {
        return Err(Error::Precondition(format!("psi must lie in (0, pi/2]; use the trace at psi = 0 (psi = {psi})")));
    }
    if !(r > 0.0) {
        return Err(Error::Precondition(format!("radius must be positive (r = {r})")));
    }
    if !check_lsigma_membership(trace, n, sigma) {
        return Err(Error::Precondition("trace not in L_sigma".into()));
    }
    let c = if psi == FRAC_PI_2 { 0.0 } else { r * psi.cos() };
    let t = r * psi.sin();
    let pn = poisson_normalizer(n, sigma);
    if c >= t {
        Ok(trace.evaluate(c) - pn * t.powf(2.0 * sigma) * difference_integral(trace, c, t, n, sigma, cfg))
    } else {
        Ok(pn * t.powf(2.0 * sigma) * value_integral(trace, c, t, n, sigma, cfg))
    }
}

/// `∫_{R^n} P_σ(x, 1) dx` by radial quadrature.
pub fn poisson_kernel_mass(n: u32, sigma: f64, cfg: &QuadratureConfig) -> f64 {
    let one = RadialProfile::from_fn(|_| 1.0, 0.0, 0.0);
    poisson_normalizer(n, sigma) * value_integral(&one, 0.0, 1.0, n, sigma, cfg)
}

/// Weighted Neumann flux with the Richardson table that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluxEstimate {
    pub value: f64,
    pub error_estimate: f64,
    pub t_values: Vec<f64>,
    /// Difference quotients `2σ(u - U(t))/t^{2σ}`.
    pub quotients: Vec<f64>,
}

/// Correction exponents of the quotient `2σ(u - U)/t^{2σ}` for a smooth trace.
pub fn flux_correction_exponents(sigma: f64) -> [f64; 4] {
    [2.0 - 2.0 * sigma, 2.0, 4.0 - 2.0 * sigma, 4.0]
}

/// Richardson extrapolation of `q(t_k)`, `t_k = t_0 2^{-k}`, assuming
/// `q(t) = L + Σ a_j t^{e_j}`. Returns the entry with the smallest change between levels.
pub fn richardson_limit(q: &[f64], exponents: &[f64]) -> (f64, f64) {
    let mut best = (q[q.len() - 1], f64::INFINITY);
    if q.len() >= 2 {
        best.1 = (q[q.len() - 1] - q[q.len() - 2]).abs();
    }
    let mut col = q.to_vec();
    for &e in exponents {
        if col.len() < 2 {
            break;
        }
        let f = 2f64.powf(e);
        let next: Vec<f64> = col.windows(2).map(|w| (f * w[1] - w[0]) / (f - 1.0)).collect();
        for w in next.windows(2) {
            let d = (w[1] - w[0]).abs();
            if d < best.1 {
                best = (w[1], d);
            }
        }
        col = next;
    }
    best
}

/// `-lim_{t→0} t^{1-2σ} ∂_t U(x, t)` at `|x| = r` for the Poisson extension of `trace`.
pub fn neumann_flux(
    trace: &RadialProfile,
    r: f64,
    params: &ProblemParams,
    t0: f64,
    levels: usize,
    rel_tol: f64,
    cfg: &QuadratureConfig,
) -> Result<FluxEstimate> {
    cfg.validate()?;
    if !(t0 > 0.0 && r > 0.0) || levels < 2 {
        return Err(Error::Precondition("need t0 > 0, r > 0 and at least 2 levels".into()));
    }
    let s = params.sigma;
    let n = params.n;
    let pn = poisson_normalizer(n, s);
    let t_values: Vec<f64> = (0..levels).map(|k| t0 * 0.5f64.powi(k as i32)).collect();
    let quotients: Vec<f64> = t_values
        .iter()
        .map(|&t| 2.0 * s * pn * difference_integral(trace, r, t, n, s, cfg))
        .collect();
    let (value, err) = richardson_limit(&quotients, &flux_correction_exponents(s));
    let scale = value.abs().max(trace.evaluate(r).abs() * r.powf(-2.0 * s));
    if err > rel_tol * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Extrapolation { estimates: quotients });
    }
    Ok(FluxEstimate { value, error_estimate: err, t_values, quotients })
}

/// Angular profile of the Poisson extension of `C r^{-β}` on the unit half-sphere.
pub fn exact_sphere_profile(params: &ProblemParams, psi: &[f64], cfg: &QuadratureConfig) -> Result<SphereProfile> {
    let s = params.sigma;
    if !(params.alpha > -2.0 * s && params.alpha < 2.0 * s) {
        return Err(Error::Precondition(format!(
            "-2 sigma < alpha < 2 sigma required (alpha = {})",
            params.alpha
        )));
    }
    let c = singular_constant(params)?;
    let trace = RadialProfile::power(c, params.beta());
    let mut phi = Vec::with_capacity(psi.len());
    for &ps in psi {
        phi.push(if ps == 0.0 {
            c
        } else {
            poisson_extend_radial(&trace, 1.0, ps, params.n, s, cfg)?
        });
    }
    let boundary_value = phi.first().copied().unwrap_or(c);
    Ok(SphereProfile { psi: psi.to_vec(), phi, boundary_value })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereResiduals {
    /// Max of `|-θ_1^{2σ-1} div(θ_1^{1-2σ}∇φ) + J_2 φ|` over nodes with `ψ ≥ psi_floor`.
    pub interior: f64,
    /// Same maximum over every node except `ψ = 0`.
    pub interior_all: f64,
    pub psi_floor: f64,
    /// Fitted `-lim θ_1^{1-2σ} ∂_{θ_1} φ`.
    pub flux: f64,
    /// `κ_σ φ(0)^p`
    pub flux_target: f64,
    /// `|flux - flux_target| / flux_target`
    pub boundary_rel: f64,
}

/// Default lower end of the node set used for the interior residual.
pub const SPHERE_RESIDUAL_PSI_FLOOR: f64 = std::f64::consts::PI / 16.0;

/// Residuals of the sphere equation and its weighted Neumann condition for `profile`.
pub fn verify_sphere_ode(profile: &SphereProfile, params: &ProblemParams) -> Result<SphereResiduals> {
    verify_sphere_ode_with_floor(profile, params, SPHERE_RESIDUAL_PSI_FLOOR)
}

pub fn verify_sphere_ode_with_floor(profile: &SphereProfile, params: &ProblemParams, psi_floor: f64) -> Result<SphereResiduals> {
    let grid = AngularGrid::new(profile.psi.clone(), params.n, params.sigma)?;
    if grid.len() < 5 {
        return Err(Error::Grid("sphere residual needs at least 5 nodes".into()));
    }
    let j2 = params.derived().j2;
    let a = grid.stiffness(&profile.phi);
    let mut interior: f64 = 0.0;
    let mut interior_all: f64 = 0.0;
    for i in 1..grid.len() {
        let res = (a[i] / grid.mass[i] + j2 * profile.phi[i]).abs();
        interior_all = interior_all.max(res);
        if grid.psi[i] >= psi_floor {
            interior = interior.max(res);
        }
    }
    let flux = fit_boundary_flux(&profile.psi, &profile.phi, params.sigma)?;
    let target = kappa_sigma(params.sigma) * profile.phi[0].powf(params.p);
    Ok(SphereResiduals {
        interior,
        interior_all,
        psi_floor,
        flux,
        flux_target: target,
        boundary_rel: (flux - target).abs() / target.abs(),
    })
}

/// Fits `φ_i - φ_0 = a_1 s^{2σ} + a_2 s² + a_3 s^{2+2σ} + a_4 s⁴`, `s = sin ψ`, on nodes 1..=4
/// and returns the flux `-2σ a_1`.
fn fit_boundary_flux(psi: &[f64], phi: &[f64], sigma: f64) -> Result<f64> {
    let e = [2.0 * sigma, 2.0, 2.0 + 2.0 * sigma, 4.0];
    let mut m = [[0.0; 4]; 4];
    let mut rhs = [0.0; 4];
    for r in 0..4 {
        let s = psi[r + 1].sin();
        for c in 0..4 {
            m[r][c] = s.powf(e[c]);
        }
        rhs[r] = phi[r + 1] - phi[0];
    }
    let x = solve_dense4(m, rhs)?;
    Ok(-2.0 * sigma * x[0])
}

fn solve_dense4(mut m: [[f64; 4]; 4], mut b: [f64; 4]) -> Result<[f64; 4]> {
    for k in 0..4 {
        let p = (k..4)
            .max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))
            .unwrap_or(k);
        if m[p][k] == 0.0 {
            return Err(Error::SingularMatrix(k));
        }
        m.swap(k, p);
        b.swap(k, p);
        for i in k + 1..4 {
            let l = m[i][k] / m[k][k];
            for j in k..4 {
                m[i][j] -= l * m[k][j];
            }
            b[i] -= l * b[k];
        }
    }
    let mut x = [0.0; 4];
    for k in (0..4).rev() {
        let s: f64 = (k + 1..4).map(|j| m[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / m[k][k];
    }
    Ok(x)
}

/// `Ψ_μ(X) = |X|^{-μ}(1 - δ (t/|X|)^{2σ})` at `|x| = xi`.
pub fn barrier(mu: f64, delta: f64, sigma: f64, xi: f64, t: f64) -> f64 {
    let r = xi.hypot(t);
    r.powf(-mu) * (1.0 - delta * (t / r).powf(2.0 * sigma))
}

/// `t^{1-2σ}|X|^{-(μ+2)}(μ(n-2σ-μ) - δ(μ+2σ)(n-μ) t^{2σ}/|X|^{2σ})`.
pub fn barrier_operator_exact(mu: f64, delta: f64, params: &ProblemParams, xi: f64, t: f64) -> f64 {
    let s = params.sigma;
    let n = params.nf();
    let r = xi.hypot(t);
    t.powf(1.0 - 2.0 * s)
        * r.powf(-(mu + 2.0))
        * (mu * (n - 2.0 * s - mu) - delta * (mu + 2.0 * s) * (n - mu) * (t / r).powf(2.0 * s))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BarrierResiduals {
    pub step: f64,
    /// `|-div(t^{1-2σ}∇Ψ)|_FD - exact|`
    pub interior: f64,
    /// `|Neumann limit estimate - 2σδ|x|^{-2σ}Ψ(x, 0)|`
    pub neumann: f64,
}

fn check_barrier_args(mu: f64, delta: f64, params: &ProblemParams, xi: f64, t: f64) -> Result<()> {
    if !(mu > 0.0 && mu < params.n_minus_2s()) {
        return Err(Error::Precondition(format!("0 < mu < n - 2 sigma required (mu = {mu})")));
    }
    if !(0.0..0.5).contains(&delta) {
        return Err(Error::Precondition(format!("0 <= delta < 1/2 required (delta = {delta})")));
    }
    if !(xi > 0.0 && t > 0.0) {
        return Err(Error::Precondition("need |x| > 0 and t > 0".into()));
    }
    Ok(())
}

/// Both barrier residuals at step `h`: centered differences of spacing `h` for the interior
/// operator, and one Richardson step on `t ∈ {h, h/2}` for the Neumann limit.
pub fn verify_barrier_identity(
    mu: f64,
    delta: f64,
    xi: f64,
    t: f64,
    params: &ProblemParams,
    h: f64,
) -> Result<BarrierResiduals> {
    check_barrier_args(mu, delta, params, xi, t)?;
    if !(h > 0.0 && h < 0.5 * xi.min(t)) {
        return Err(Error::Precondition("step must be positive and below half of min(|x|, t)".into()));
    }
    let s = params.sigma;
    let n = params.nf();
    let psi = |a: f64, b: f64| barrier(mu, delta, s, a, b);
    let c = psi(xi, t);
    let d2x = (psi(xi + h, t) - 2.0 * c + psi(xi - h, t)) / (h * h);
    let d1x = (psi(xi + h, t) - psi(xi - h, t)) / (2.0 * h);
    let wp = (t + 0.5 * h).powf(1.0 - 2.0 * s);
    let wm = (t - 0.5 * h).powf(1.0 - 2.0 * s);
    let dt = (wp * (psi(xi, t + h) - c) - wm * (c - psi(xi, t - h))) / (h * h);
    let fd = -(t.powf(1.0 - 2.0 * s) * (d2x + (n - 1.0) / xi * d1x) + dt);
    let interior = (fd - barrier_operator_exact(mu, delta, params, xi, t)).abs();

    let q = |tt: f64| {
        // 2σ(Ψ(x,0) - Ψ(x,t))/t^{2σ} without cancellation
        let r = xi.hypot(tt);
        let head = -xi.powf(-mu) * (-0.5 * mu * (tt * tt / (xi * xi)).ln_1p()).exp_m1();
        2.0 * s * (head / tt.powf(2.0 * s) + delta * r.powf(-mu - 2.0 * s))
    };
    let f = 2f64.powf(2.0 - 2.0 * s);
    let limit = (f * q(0.5 * h) - q(h)) / (f - 1.0);
    let target = 2.0 * s * delta * xi.powf(-2.0 * s) * xi.powf(-mu);
    Ok(BarrierResiduals { step: h, interior, neumann: (limit - target).abs() })
}

/// Residuals at `h0, h0/2, …` and the observed orders between successive levels.
pub fn barrier_refinement(
    mu: f64,
    delta: f64,
    xi: f64,
    t: f64,
    params: &ProblemParams,
    h0: f64,
    levels: usize,
) -> Result<(Vec<BarrierResiduals>, Vec<(f64, f64)>)> {
    let rows: Vec<BarrierResiduals> = (0..levels)
        .map(|k| verify_barrier_identity(mu, delta, xi, t, params, h0 * 0.5f64.powi(k as i32)))
        .collect::<Result<_>>()?;
    let orders = rows
        .windows(2)
        .map(|w| ((w[0].interior / w[1].interior).log2(), (w[0].neumann / w[1].neumann).log2()))
        .collect();
    Ok((rows, orders))
}

/// Uniform `s`-grid and `ψ`-grid for the cylinder solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub s_min: f64,
    pub s_max: f64,
    pub ns: usize,
    pub npsi: usize,
    #[serde(default = "default_grading")]
    pub psi_grading: f64,
}

fn default_grading() -> f64 {
    DEFAULT_PSI_GRADING
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { s_min: -4.0, s_max: 4.0, ns: 161, npsi: 65, psi_grading: DEFAULT_PSI_GRADING }
    }
}

impl GridSpec {
    pub fn s_nodes(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.ns).map(|k| self.s_min + k as f64 * h).collect()
    }

    pub fn step(&self) -> f64 {
        (self.s_max - self.s_min) / (self.ns - 1) as f64
    }

    pub fn psi_nodes(&self) -> Vec<f64> {
        graded_psi(self.npsi, self.psi_grading)
    }

    /// Halves both spacings.
    pub fn refined(&self) -> Self {
        Self { ns: 2 * self.ns - 1, npsi: 2 * self.npsi - 1, ..self.clone() }
    }

    fn validate(&self) -> Result<()> {
        if self.ns < 3 || self.npsi < 5 || !(self.s_max > self.s_min) || !(self.psi_grading >= 1.0) {
            return Err(Error::Grid("grid needs ns >= 3, npsi >= 5, s_max > s_min and grading >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 40 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CylinderSolution {
    pub field: FowlerField,
    /// Scaled residual after each Newton step, starting with the initial guess.
    pub residual_history: Vec<f64>,
    pub iterations: usize,
    /// Number of node values projected back to positive after a Newton step.
    pub clamped: usize,
}

/// `(b^{p+1} - a^{p+1}) / ((p+1)(b - a))` and its partial derivatives in `a` and `b`.
///
/// The mean of `v^p` over `[a, b]`; the boundary nonlinearity of the discrete cylinder equation.
pub fn mean_power(a: f64, b: f64, p: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let d = 0.5 * (b - a);
    if d.abs() <= 1e-3 * m.abs() {
        let c2 = p * (p - 1.0) / 6.0;
        let c4 = p * (p - 1.0) * (p - 2.0) * (p - 3.0) / 120.0;
        let x = d / m;
        let mp = m.powf(p);
        let g = mp * (1.0 + c2 * x * x + c4 * x.powi(4));
        let gm = mp / m * (p + c2 * (p - 2.0) * x * x + c4 * (p - 4.0) * x.powi(4));
        let gd = mp / m * (2.0 * c2 * x + 4.0 * c4 * x.powi(3));
        (g, 0.5 * (gm - gd), 0.5 * (gm + gd))
    } else {
        let ga = a.powf(p);
        let gb = b.powf(p);
        let g = (b.powf(p + 1.0) - a.powf(p + 1.0)) / ((p + 1.0) * (b - a));
        (g, (g - ga) / (b - a), (gb - g) / (b - a))
    }
}

struct CylinderSystem<'a> {
    grid: &'a AngularGrid,
    h: f64,
    j1: f64,
    j2: f64,
    kappa: f64,
    p: f64,
    ns: usize,
}

impl CylinderSystem<'_> {
    fn npsi(&self) -> usize {
        self.grid.len()
    }

    /// Residual rows for interior `s`-nodes `1..ns-1`, each divided by its diagonal scale.
    fn residual(&self, v: &[Vec<f64>]) -> Vec<f64> {
        let m = self.npsi();
        let mut out = Vec::with_capacity((self.ns - 2) * m);
        for k in 1..self.ns - 1 {
            let a = self.grid.stiffness(&v[k]);
            let (g, _, _) = mean_power(v[k - 1][0], v[k + 1][0], self.p);
            for i in 0..m {
                let mi = self.grid.mass[i];
                let mut f = mi
                    * ((v[k + 1][i] - 2.0 * v[k][i] + v[k - 1][i]) / (self.h * self.h)
                        - self.j1 * (v[k + 1][i] - v[k - 1][i]) / (2.0 * self.h)
                        - self.j2 * v[k][i])
                    - a[i];
                if i == 0 {
                    f += self.kappa * g;
                }
                out.push(f / self.row_scale(i));
            }
        }
        out
    }

    fn row_scale(&self, i: usize) -> f64 {
        let mut d = self.grid.mass[i] * (2.0 / (self.h * self.h) + self.j2.abs());
        if i > 0 {
            d += 1.0 / self.grid.resistance[i - 1];
        }
        if i + 1 < self.npsi() {
            d += 1.0 / self.grid.resistance[i];
        }
        d
    }

    fn jacobian(&self, v: &[Vec<f64>]) -> BandMatrix {
        let m = self.npsi();
        let nk = self.ns - 2;
        let mut jac = BandMatrix::zeros(nk * m, m, m);
        let hh = self.h * self.h;
        for k in 1..self.ns - 1 {
            let (_, da, db) = mean_power(v[k - 1][0], v[k + 1][0], self.p);
            for i in 0..m {
                let row = (k - 1) * m + i;
                let sc = 1.0 / self.row_scale(i);
                let mi = self.grid.mass[i];
                let mut diag = mi * (-2.0 / hh - self.j2);
                if i > 0 {
                    let g = 1.0 / self.grid.resistance[i - 1];
                    diag -= g;
                    jac.add(row, row - 1, g * sc);
                }
                if i + 1 < m {
                    let g = 1.0 / self.grid.resistance[i];
                    diag -= g;
                    jac.add(row, row + 1, g * sc);
                }
                jac.add(row, row, diag * sc);
                let up = mi * (1.0 / hh - self.j1 / (2.0 * self.h));
                let dn = mi * (1.0 / hh + self.j1 / (2.0 * self.h));
                let (mut up_nl, mut dn_nl) = (0.0, 0.0);
                if i == 0 {
                    up_nl = self.kappa * db;
                    dn_nl = self.kappa * da;
                }
                if k + 1 < self.ns - 1 {
                    jac.add(row, row + m, (up + up_nl) * sc);
                }
                if k > 1 {
                    jac.add(row, row - m, (dn + dn_nl) * sc);
                }
            }
        }
        jac
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, b| a.max(b.abs()))
}

/// Solves the Fowler cylinder problem with Dirichlet data at `s_min`, `s_max` by damped Newton.
///
/// `initial` supplies the starting iterate on the same grid; without it the boundary data are
/// interpolated linearly in `s`.
pub fn solve_cylinder_pde(
    params: &ProblemParams,
    left: &[f64],
    right: &[f64],
    grid: &GridSpec,
    initial: Option<&FowlerField>,
    opts: &SolverOptions,
) -> Result<CylinderSolution> {
    grid.validate()?;
    let m = grid.npsi;
    if left.len() != m || right.len() != m {
        return Err(Error::Grid("boundary data must match the psi grid".into()));
    }
    if left.iter().chain(right).any(|&v| !(v > 0.0)) {
        return Err(Error::Precondition("boundary data must be strictly positive".into()));
    }
    let psi = grid.psi_nodes();
    let ang = AngularGrid::new(psi.clone(), params.n, params.sigma)?;
    let d = params.derived();
    let sys = CylinderSystem {
        grid: &ang,
        h: grid.step(),
        j1: d.j1,
        j2: d.j2,
        kappa: kappa_sigma(params.sigma),
        p: params.p,
        ns: grid.ns,
    };
    let s_nodes = grid.s_nodes();
    let mut v: Vec<Vec<f64>> = match initial {
        Some(f) => {
            if f.values.len() != grid.ns || f.psi.len() != m {
                return Err(Error::Grid("initial field does not match the grid".into()));
            }
            f.values.clone()
        }
        None => (0..grid.ns)
            .map(|k| {
                let w = k as f64 / (grid.ns - 1) as f64;
                (0..m).map(|i| (1.0 - w) * left[i] + w * right[i]).collect()
            })
            .collect(),
    };
    v[0] = left.to_vec();
    v[grid.ns - 1] = right.to_vec();

    let vscale = |v: &[Vec<f64>]| v.iter().map(|r| max_abs(r)).fold(0.0, f64::max);
    let mut res = sys.residual(&v);
    let mut rnorm = max_abs(&res) / vscale(&v);
    let mut history = vec![rnorm];
    let mut clamped = 0usize;
    let mut iterations = 0usize;
    while rnorm > opts.tol {
        if iterations >= opts.max_iter {
            return Err(Error::SolverDivergence { iterations, history });
        }
        iterations += 1;
        let lu = sys.jacobian(&v).factor()?;
        let neg: Vec<f64> = res.iter().map(|x| -x).collect();
        let step = lu.solve(&neg);
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..12 {
            let mut trial = v.clone();
            let mut nclamp = 0;
            let floor = 1e-12 * vscale(&v);
            for k in 1..grid.ns - 1 {
                for i in 0..m {
                    let x = trial[k][i] + lambda * step[(k - 1) * m + i];
                    trial[k][i] = if x > 0.0 {
                        x
                    } else {
                        nclamp += 1;
                        floor
                    };
                }
            }
            let r = sys.residual(&trial);
            let nr = max_abs(&r) / vscale(&trial);
            if nr.is_finite() && nr < rnorm {
                accepted = Some((trial, r, nr, nclamp));
                break;
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((trial, r, nr, nclamp)) => {
                v = trial;
                res = r;
                rnorm = nr;
                clamped += nclamp;
                history.push(rnorm);
            }
            None => return Err(Error::SolverDivergence { iterations, history }),
        }
    }
    let field = FowlerField::new(s_nodes, psi, v, *params)?;
    Ok(CylinderSolution { field, residual_history: history, iterations, clamped })
}

/// Scaled discrete residual of an arbitrary field on a uniform grid.
pub fn cylinder_residual(field: &FowlerField) -> Result<f64> {
    let h = field.spacing()?;
    let p = field.params;
    let ang = AngularGrid::new(field.psi.clone(), p.n, p.sigma)?;
    let d = p.derived();
    let sys = CylinderSystem {
        grid: &ang,
        h,
        j1: d.j1,
        j2: d.j2,
        kappa: kappa_sigma(p.sigma),
        p: p.p,
        ns: field.s.len(),
    };
    let scale = field.values.iter().map(|r| max_abs(r)).fold(0.0, f64::max);
    Ok(max_abs(&sys.residual(&field.values)) / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn pp(n: i64, s: f64, a: f64, p: f64) -> ProblemParams {
        ProblemParams::new(n, s, a, p).unwrap()
    }

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let params = pp(3, 0.5, 0.0, 1.8);
        let d = params.derived();
        let ang = AngularGrid::new(graded_psi(9, DEFAULT_PSI_GRADING), 3, 0.5).unwrap();
        let sys = CylinderSystem { grid: &ang, h: 0.1, j1: d.j1, j2: d.j2, kappa: 1.0, p: 1.8, ns: 7 };
        let v: Vec<Vec<f64>> =
            (0..7).map(|k| (0..9).map(|i| 1.0 + 0.1 * k as f64 + 0.05 * (i as f64).sin()).collect()).collect();
        let jac = sys.jacobian(&v);
        let r0 = sys.residual(&v);
        let eps = 1e-7;
        let mut worst: f64 = 0.0;
        for col in 0..5 * 9 {
            let mut w = v.clone();
            w[1 + col / 9][col % 9] += eps;
            let r1 = sys.residual(&w);
            for row in 0..5 * 9 {
                let fd = (r1[row] - r0[row]) / eps;
                worst = worst.max((fd - jac.get(row, col)).abs());
            }
        }
        assert!(worst < 1e-5, "{worst}");
    }

    #[test]
    fn angular_grid_measures() {
        for &(n, s) in &[(2u32, 0.3), (3, 0.5), (4, 0.75), (5, 0.1)] {
            let g = AngularGrid::uniform(65, n, s).unwrap();
            // ∫_0^{π/2} sin^{1-2σ} cos^{n-1} = B(1-σ, n/2)/2
            let nf = n as f64;
            let exact = 0.5 * crate::specialfn::gamma(1.0 - s) * crate::specialfn::gamma(nf / 2.0)
                / crate::specialfn::gamma(1.0 - s + nf / 2.0);
            let total: f64 = g.mass.iter().sum();
            assert!((total / exact - 1.0).abs() < 1e-12, "n={n} s={s}");
            let ones = vec![1.0; g.len()];
            assert!(g.stiffness(&ones).iter().all(|x| x.abs() < 1e-12));
        }
        assert!(AngularGrid::new(vec![0.0, 1.0], 3, 0.5).is_err());
        assert!(AngularGrid::new(vec![0.0, 0.7, 0.5, FRAC_PI_2], 3, 0.5).is_err());
    }

    #[test]
    fn unit_mass_of_poisson_kernel() {
        for &(n, s) in &[(2u32, 0.3), (3, 0.5), (4, 0.75), (5, 0.1), (2, 0.9)] {
            let m = poisson_kernel_mass(n, s, &cfg());
            assert!((m - 1.0).abs() < 1e-10, "n={n} s={s} m={m}");
        }
    }

    #[test]
    fn constant_trace_extends_to_constant() {
        let one = RadialProfile::from_fn(|_| 1.0, 0.0, 0.0);
        for &ps in &[0.1, 0.7, 1.2, FRAC_PI_2] {
            let u = poisson_extend_radial(&one, 1.3, ps, 3, 0.4, &cfg()).unwrap();
            assert!((u - 1.0).abs() < 1e-9, "psi={ps}");
        }
        assert!(poisson_extend_radial(&one, 1.0, 0.0, 3, 0.4, &cfg()).is_err());
    }

    #[test]
    fn exact_extension_is_homogeneous() {
        let params = pp(3, 0.5, 0.0, 2.0);
        let c = singular_constant(&params).unwrap();
        let tr = RadialProfile::power(c, 1.0);
        for &ps in &[0.05, 0.4, 1.0, 1.5, FRAC_PI_2] {
            let a = poisson_extend_radial(&tr, 1.0, ps, 3, 0.5, &cfg()).unwrap();
            let b = poisson_extend_radial(&tr, 2.0, ps, 3, 0.5, &cfg()).unwrap();
            assert!((b / a / 0.5 - 1.0).abs() < 1e-8, "psi={ps}");
        }
    }

    #[test]
    fn n3_half_laplacian_closed_form() {
        // σ = 1/2, n = 3: U is harmonic in R^4_+ and for u = |x|^{-1} the extension is
        // U(x,t) = (2/π) arctan-type closed form; use the axis value U(0,t) = 2/(π t)
        let tr = RadialProfile::power(1.0, 1.0);
        let u = poisson_extend_radial(&tr, 1.0, FRAC_PI_2, 3, 0.5, &cfg()).unwrap();
        // ∫ P(y,1)|y|^{-1} dy = (1/π²)·4π ∫ ρ/(ρ²+1)² dρ = 2/π
        assert!((u - 2.0 / PI).abs() < 1e-10);
    }

    #[test]
    fn trace_recovery_is_monotone() {
        let params = pp(3, 0.5, 0.0, 1.8);
        let c = singular_constant(&params).unwrap();
        let tr = RadialProfile::power(c, params.beta());
        let mut prev = f64::INFINITY;
        for k in 1..6 {
            let ps = 10f64.powi(-k);
            let u = poisson_extend_radial(&tr, 1.0, ps, 3, 0.5, &cfg()).unwrap();
            let e = (u - c).abs();
            assert!(e < prev);
            prev = e;
        }
        assert!(prev < 1e-4 * c);
    }

    #[test]
    fn flux_of_exact_trace() {
        let params = pp(3, 0.5, 0.0, 2.0);
        let c = singular_constant(&params).unwrap();
        let tr = RadialProfile::power(c, 1.0);
        let f = neumann_flux(&tr, 1.0, &params, 0.125, 9, 1e-6, &cfg()).unwrap();
        assert!((f.value / (4.0 / (PI * PI)) - 1.0).abs() < 1e-7, "{f:?}");
        // homogeneity r^{α - βp}
        let f2 = neumann_flux(&tr, 2.0, &params, 0.25, 9, 1e-6, &cfg()).unwrap();
        assert!((f2.value / f.value / 2f64.powf(-2.0) - 1.0).abs() < 1e-7);
        for &(n, s, a, p) in &[(4i64, 0.75, -0.5, 1.9), (2, 0.3, 0.2, 3.0), (3, 0.9, -1.0, 4.0)] {
            let params = pp(n, s, a, p);
            let c = singular_constant(&params).unwrap();
            let tr = RadialProfile::power(c, params.beta());
            let f = neumann_flux(&tr, 1.0, &params, 0.125, 9, 1e-6, &cfg()).unwrap();
            let target = kappa_sigma(s) * c.powf(p);
            assert!((f.value / target - 1.0).abs() < 1e-6, "n={n} s={s}: {} vs {target}", f.value);
        }
        let one = RadialProfile::constant(1.0);
        let f = neumann_flux(&one, 1.0, &params, 0.125, 9, 1e-6, &cfg()).unwrap();
        assert_eq!(f.value, 0.0);
    }

    #[test]
    fn fowler_round_trip() {
        let params = pp(3, 0.4, 0.1, 2.2);
        let radii: Vec<f64> = (0..7).map(|k| 0.3 * 1.5f64.powi(k)).collect();
        let psi = uniform_psi(9);
        let values: Vec<Vec<f64>> = radii
            .iter()
            .enumerate()
            .map(|(k, _)| psi.iter().enumerate().map(|(i, _)| 1.0 + ((k * 7 + i * 3) % 11) as f64).collect())
            .collect();
        let f = ExtensionField::new(radii, psi, values, params, Representation::PoissonEvaluated).unwrap();
        let back = fowler_unmap(&fowler_map(&f), Representation::PoissonEvaluated);
        for (a, b) in f.values.iter().flatten().zip(back.values.iter().flatten()) {
            assert!((a / b - 1.0).abs() < 1e-12);
        }
        for (a, b) in f.radii.iter().zip(&back.radii) {
            assert!((a / b - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn homogeneous_field_is_constant_in_s() {
        let params = pp(3, 0.5, 0.0, 2.0);
        let prof = SphereProfile { psi: uniform_psi(5), phi: vec![1.0, 0.9, 0.8, 0.7, 0.6], boundary_value: 1.0 };
        let radii = [0.5, 1.0, 2.0, 4.0];
        let f = ExtensionField::exact_homogeneous(&params, &radii, &prof).unwrap();
        let v = fowler_map(&f);
        for row in &v.values {
            for (a, b) in row.iter().zip(&prof.phi) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn sphere_ode_exact_profile() {
        let params = pp(3, 0.5, 0.0, 1.8);
        let p33 = exact_sphere_profile(&params, &uniform_psi(33), &cfg()).unwrap();
        let p65 = exact_sphere_profile(&params, &uniform_psi(65), &cfg()).unwrap();
        assert_eq!(p65.boundary_value, singular_constant(&params).unwrap());
        assert!(p65.phi.iter().all(|&x| x > 0.0 && x.is_finite()));
        let r33 = verify_sphere_ode(&p33, &params).unwrap();
        let r65 = verify_sphere_ode(&p65, &params).unwrap();
        let order = (r33.interior / r65.interior).log2();
        assert!(order > 1.8, "order {order}: {r33:?} {r65:?}");
        assert!(r65.boundary_rel < 1e-3, "{r65:?}");
    }

    #[test]
    fn sphere_ode_constant_profile() {
        let params = pp(3, 0.5, 0.0, 1.8);
        let j2 = params.derived().j2;
        let prof = SphereProfile { psi: uniform_psi(17), phi: vec![2.0; 17], boundary_value: 2.0 };
        let r = verify_sphere_ode(&prof, &params).unwrap();
        assert!((r.interior - 2.0 * j2).abs() < 1e-12);
        assert!(r.flux.abs() < 1e-9);
    }

    #[test]
    fn barrier_second_order() {
        let params = pp(3, 0.6, 0.0, 2.0);
        for &(mu, delta) in &[(0.7, 0.3), (1.2, 0.1), (0.5, 0.0)] {
            let (rows, orders) = barrier_refinement(mu, delta, 1.0, 0.6, &params, 0.04, 3).unwrap();
            for (oi, on) in &orders {
                assert!(*oi > 1.8 && *oi < 2.3, "interior order {oi} {rows:?}");
                assert!(*on > 1.7, "neumann order {on} {rows:?}");
            }
        }
        assert!(verify_barrier_identity(2.0, 0.1, 1.0, 0.5, &params, 0.01).is_err());
    }

    #[test]
    fn barrier_leading_term_positive() {
        let params = pp(4, 0.3, 0.0, 2.0);
        let nm = params.n_minus_2s();
        for k in 1..100 {
            let mu = nm * k as f64 / 100.0;
            assert!(mu * (nm - mu) > 0.0);
        }
        // vanishes at δ = 0 only through μ(n-2σ-μ)
        let e = barrier_operator_exact(nm / 2.0, 0.0, &params, 1.0, 1.0);
        assert!(e > 0.0);
    }

    #[test]
    fn mean_power_branches_agree() {
        for &p in &[1.5, 2.0, 3.7] {
            let a = 0.8;
            for &b in &[0.8 + 1e-4, 0.8 + 2e-3, 0.8 + 0.1] {
                let (g, ga, gb) = mean_power(a, b, p);
                let direct = (b.powf(p + 1.0) - a.powf(p + 1.0)) / ((p + 1.0) * (b - a));
                assert!((g / direct - 1.0).abs() < 1e-9);
                let e = 1e-7;
                let na = (mean_power(a + e, b, p).0 - mean_power(a - e, b, p).0) / (2.0 * e);
                let nb = (mean_power(a, b + e, p).0 - mean_power(a, b - e, p).0) / (2.0 * e);
                assert!((ga - na).abs() < 1e-5 && (gb - nb).abs() < 1e-5);
            }
            let (g, _, _) = mean_power(0.7, 0.7, p);
            assert!((g - 0.7f64.powf(p)).abs() < 1e-15);
        }
    }

    #[test]
    fn cylinder_exact_data_gives_flat_solution() {
        let params = pp(3, 0.5, 0.0, 1.8);
        let grid = GridSpec { s_min: -2.0, s_max: 2.0, ns: 41, ..GridSpec::default() };
        let prof = exact_sphere_profile(&params, &grid.psi_nodes(), &cfg()).unwrap();
        let init = FowlerField::constant_in_s(&params, &grid.s_nodes(), &prof).unwrap();
        let sol = solve_cylinder_pde(&params, &prof.phi, &prof.phi, &grid, Some(&init), &SolverOptions::default()).unwrap();
        assert!(*sol.residual_history.last().unwrap() < 1e-8);
        for row in &sol.field.values {
            for (a, b) in row.iter().zip(&prof.phi) {
                assert!((a / b - 1.0).abs() < 1e-3, "dev {}", a / b - 1.0);
            }
        }
        // without an initial guess
        let sol2 = solve_cylinder_pde(&params, &prof.phi, &prof.phi, &grid, None, &SolverOptions::default()).unwrap();
        for (a, b) in sol.field.values.iter().flatten().zip(sol2.field.values.iter().flatten()) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn cylinder_rejects_bad_data() {
        let params = pp(3, 0.5, 0.0, 1.8);
        let grid = GridSpec { s_min: -1.0, s_max: 1.0, ns: 11, npsi: 9, psi_grading: 1.0 };
        let mut left = vec![1.0; 9];
        left[3] = 0.0;
        assert!(solve_cylinder_pde(&params, &left, &[1.0; 9], &grid, None, &SolverOptions::default()).is_err());
        assert!(solve_cylinder_pde(&params, &[1.0; 8], &[1.0; 9], &grid, None, &SolverOptions::default()).is_err());
    }
}
