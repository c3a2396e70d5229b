//! Gamma function and the closed-form constants of the problem.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::ProblemParams;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln|Γ(x)|` with the sign of `Γ(x)`. Poles carry `log_abs = +∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignedLogValue {
    pub log_abs: f64,
    pub sign: f64,
}

impl SignedLogValue {
    pub const POLE: Self = Self { log_abs: f64::INFINITY, sign: 1.0 };

    pub fn is_pole(&self) -> bool {
        self.log_abs == f64::INFINITY
    }

    pub fn value(&self) -> f64 {
        self.sign * self.log_abs.exp()
    }
}

/// `sin(πx)` with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    // r in [-1, 1]
    let (sgn, a) = if r < 0.0 { (-1.0, -r) } else { (1.0, r) };
    let a = if a > 0.5 { 1.0 - a } else { a };
    sgn * (PI * a).sin()
}

fn is_pole(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

fn lanczos_core(x: f64) -> (f64, f64) {
    let z = x - 1.0;
    let mut a = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    (z + LANCZOS_G + 0.5, a)
}

/// `(ln Γ, Γ)` for `x >= 0.5`; `Γ` is infinite once it overflows.
fn lanczos(x: f64) -> (f64, f64) {
    if x <= 171.0 {
        // shift to [1, 2) and multiply back up
        let m = (x - 1.0).floor().max(0.0) as usize;
        let y = x - m as f64;
        let (t, a) = lanczos_core(y);
        let mut g = (2.0 * PI).sqrt() * t.powf(y - 0.5) * (-t).exp() * a;
        for i in 0..m {
            g *= y + i as f64;
        }
        (g.ln(), g)
    } else {
        let (t, a) = lanczos_core(x);
        let ln = 0.5 * (2.0 * PI).ln() + (x - 0.5) * t.ln() - t + a.ln();
        (ln, f64::INFINITY)
    }
}

/// `Γ(x)`; non-finite at the poles.
pub fn gamma(x: f64) -> f64 {
    if is_pole(x) {
        return f64::NAN;
    }
    if x < 0.5 {
        PI / (sin_pi(x) * gamma(1.0 - x))
    } else {
        lanczos(x).1
    }
}

pub fn log_gamma_signed(x: f64) -> SignedLogValue {
    if x.is_nan() || is_pole(x) {
        return SignedLogValue::POLE;
    }
    if x < 0.5 {
        let s = sin_pi(x);
        let r = log_gamma_signed(1.0 - x);
        SignedLogValue {
            log_abs: PI.ln() - s.abs().ln() - r.log_abs,
            sign: s.signum() * r.sign,
        }
    } else {
        SignedLogValue { log_abs: lanczos(x).0, sign: 1.0 }
    }
}

pub fn ln_gamma(x: f64) -> f64 {
    log_gamma_signed(x).log_abs
}

/// Surface area `|S^{n-1}| = 2π^{n/2}/Γ(n/2)` of the unit sphere in `R^n`.
pub fn sphere_area(n: u32) -> f64 {
    let h = n as f64 / 2.0;
    2.0 * (h * PI.ln() - ln_gamma(h)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PoleStatus {
    Regular,
    /// A denominator Gamma sits on a pole; the value is exactly 0.
    ZeroViaPole,
    /// A numerator Gamma sits on a pole.
    Infinite,
    /// Poles in numerator and denominator simultaneously.
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaValue {
    pub value: f64,
    pub status: PoleStatus,
}

/// `Λ(τ) = 2^{2σ} Γ((n+2σ+2τ)/4)Γ((n+2σ-2τ)/4) / (Γ((n-2σ-2τ)/4)Γ((n-2σ+2τ)/4))`.
pub fn lambda_multiplier(tau: f64, n: u32, sigma: f64) -> LambdaValue {
    let n = n as f64;
    let num = [
        log_gamma_signed((n + 2.0 * sigma + 2.0 * tau) / 4.0),
        log_gamma_signed((n + 2.0 * sigma - 2.0 * tau) / 4.0),
    ];
    let den = [
        log_gamma_signed((n - 2.0 * sigma - 2.0 * tau) / 4.0),
        log_gamma_signed((n - 2.0 * sigma + 2.0 * tau) / 4.0),
    ];
    let num_pole = num.iter().any(SignedLogValue::is_pole);
    let den_pole = den.iter().any(SignedLogValue::is_pole);
    match (num_pole, den_pole) {
        (true, true) => LambdaValue { value: f64::NAN, status: PoleStatus::Indeterminate },
        (true, false) => LambdaValue { value: f64::INFINITY, status: PoleStatus::Infinite },
        (false, true) => LambdaValue { value: 0.0, status: PoleStatus::ZeroViaPole },
        (false, false) => {
            let log = 2.0 * sigma * std::f64::consts::LN_2 + num[0].log_abs + num[1].log_abs
                - den[0].log_abs
                - den[1].log_abs;
            let sign = num[0].sign * num[1].sign * den[0].sign * den[1].sign;
            LambdaValue { value: sign * log.exp(), status: PoleStatus::Regular }
        }
    }
}

/// `C_{p,σ,α} = Λ((n-2σ)/2 - β)^{1/(p-1)}`.
pub fn singular_constant(pp: &ProblemParams) -> Result<f64> {
    pp.require_singular_range()?;
    let d = pp.derived();
    let lam = lambda_multiplier(d.tau, pp.n, pp.sigma);
    if lam.status != PoleStatus::Regular || !(lam.value > 0.0) {
        return Err(Error::Precondition(format!("Lambda(tau) not positive at tau = {}", d.tau)));
    }
    Ok((lam.value.ln() / (pp.p - 1.0)).exp())
}

/// `κ_σ = Γ(1-σ)/(2^{2σ-1}Γ(σ))`.
pub fn kappa_sigma(sigma: f64) -> f64 {
    if sigma == 0.5 {
        return 1.0;
    }
    (ln_gamma(1.0 - sigma) - (2.0 * sigma - 1.0) * std::f64::consts::LN_2 - ln_gamma(sigma)).exp()
}

/// Poisson-kernel normalizer `p_{n,σ} = Γ((n+2σ)/2)/(π^{n/2}Γ(σ))`.
pub fn poisson_normalizer(n: u32, sigma: f64) -> f64 {
    let n = n as f64;
    (ln_gamma((n + 2.0 * sigma) / 2.0) - 0.5 * n * PI.ln() - ln_gamma(sigma)).exp()
}

/// Hypersingular normalizer `c_{n,σ} = 2^{2σ}σΓ((n+2σ)/2)/(π^{n/2}Γ(1-σ))`.
pub fn hypersingular_normalizer(n: u32, sigma: f64) -> f64 {
    let n = n as f64;
    sigma
        * (2.0 * sigma * std::f64::consts::LN_2 + ln_gamma((n + 2.0 * sigma) / 2.0)
            - 0.5 * n * PI.ln()
            - ln_gamma(1.0 - sigma))
        .exp()
}

/// `C0^{p-1} = (2+α)((n-2)p-n-α)/(p-1)²`, the local-case value of `C^{p-1}`.
pub fn classical_limit_power(n: u32, alpha: f64, p: f64) -> f64 {
    let nf = n as f64;
    (2.0 + alpha) * ((nf - 2.0) * p - nf - alpha) / ((p - 1.0) * (p - 1.0))
}

/// Constant of the singular solution of `-Δu = |x|^α u^p`.
pub fn classical_limit_constant(n: u32, alpha: f64, p: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::Precondition(format!("n >= 3 required (n = {n})")));
    }
    if !(alpha > -2.0 && alpha < 2.0) {
        return Err(Error::Precondition(format!("-2 < alpha < 2 required (alpha = {alpha})")));
    }
    let nf = n as f64;
    let lo = (nf + alpha) / (nf - 2.0);
    let hi = (nf + 2.0) / (nf - 2.0);
    if !(p > lo && p < hi) {
        return Err(Error::Precondition(format!(
            "(n + alpha)/(n - 2) < p < (n + 2)/(n - 2) required (p = {p}, interval = ({lo}, {hi}))"
        )));
    }
    Ok(classical_limit_power(n, alpha, p).powf(1.0 / (p - 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantsReport {
    pub kappa_sigma: f64,
    pub c_n_sigma: f64,
    pub p_n_sigma: f64,
    pub lambda_tau: f64,
    #[serde(rename = "C_p_sigma_alpha")]
    pub c_p_sigma_alpha: Option<f64>,
    #[serde(rename = "C0_classical")]
    pub c0_classical: Option<f64>,
}

pub fn all_constants(pp: &ProblemParams) -> ConstantsReport {
    let d = pp.derived();
    ConstantsReport {
        kappa_sigma: kappa_sigma(pp.sigma),
        c_n_sigma: hypersingular_normalizer(pp.n, pp.sigma),
        p_n_sigma: poisson_normalizer(pp.n, pp.sigma),
        lambda_tau: lambda_multiplier(d.tau, pp.n, pp.sigma).value,
        c_p_sigma_alpha: singular_constant(pp).ok(),
        c0_classical: classical_limit_constant(pp.n, pp.alpha, pp.p).ok(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn gamma_factorials() {
        let mut f = 1.0f64;
        for k in 1..=170u32 {
            let g = log_gamma_signed(k as f64).value();
            assert!(rel(g, f) < 1e-13, "k={k} rel={}", rel(g, f));
            assert!(rel(gamma(k as f64), f) < 1e-13);
            f *= k as f64;
        }
        assert!(rel(gamma(1.0), 1.0) < 1e-15);
        assert!(rel(gamma(5.0), 24.0) < 1e-15);
    }

    #[test]
    fn gamma_half_integers() {
        // Γ(k+1/2) = (2k)!/(4^k k!) √π
        let mut g = PI.sqrt();
        for k in 0..160u32 {
            let x = k as f64 + 0.5;
            let v = log_gamma_signed(x).value();
            assert!(rel(v, g) < 1e-13, "x={x} rel={}", rel(v, g));
            assert!(rel(gamma(x), g) < 1e-13);
            g *= x;
        }
    }

    #[test]
    fn gamma_negative_arguments() {
        let g = log_gamma_signed(-0.5);
        assert_eq!(g.sign, -1.0);
        assert!(rel(g.value(), -3.544_907_701_811_032) < 1e-14);
        assert!(rel(gamma(-1.5), 4.0 / 3.0 * PI.sqrt()) < 1e-14);
        assert!(log_gamma_signed(0.0).is_pole());
        assert!(log_gamma_signed(-3.0).is_pole());
        assert!(!log_gamma_signed(-2.5).is_pole());
    }

    #[test]
    fn gamma_small_arguments() {
        // Γ(x) = Γ(x+1)/x on [1e-3, 1]
        for i in 0..=200 {
            let x = 1e-3 * (1e3f64).powf(i as f64 / 200.0);
            let a = log_gamma_signed(x).value();
            let b = log_gamma_signed(x + 1.0).value() / x;
            assert!(rel(a, b) < 2e-14, "x={x}");
        }
    }

    #[test]
    fn lambda_closed_forms() {
        let l = lambda_multiplier(0.0, 3, 0.5);
        assert_eq!(l.status, PoleStatus::Regular);
        assert!(rel(l.value, 2.0 / PI) < 1e-14);
        let z = lambda_multiplier(1.0, 3, 0.5);
        assert_eq!(z.status, PoleStatus::ZeroViaPole);
        assert_eq!(z.value, 0.0);
        let inf = lambda_multiplier(2.0, 3, 0.5);
        assert_eq!(inf.status, PoleStatus::Infinite);
        let inf = lambda_multiplier(3.0, 2, 0.75);
        // numerator (2+1.5-6)/4 = -0.625 regular, denominator (0.5-6)/4 regular
        assert_eq!(inf.status, PoleStatus::Regular);
    }

    #[test]
    fn lambda_symmetry_grid() {
        for n in 2..=5u32 {
            for &s in &[0.1, 0.25, 0.5, 0.75, 0.9] {
                let h = (n as f64 - 2.0 * s) / 2.0;
                let lo = -h + 0.01;
                let hi = h - 0.01;
                for i in 0..=200 {
                    let t = lo + (hi - lo) * i as f64 / 200.0;
                    let a = lambda_multiplier(t, n, s).value;
                    let b = lambda_multiplier(-t, n, s).value;
                    assert!((a - b).abs() / a.abs().max(1e-300) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn singular_constant_values() {
        let c = singular_constant(&ProblemParams::new(3, 0.5, 0.0, 2.0).unwrap()).unwrap();
        assert!(rel(c, 2.0 / PI) < 1e-14);
        let c = singular_constant(&ProblemParams::new(3, 0.5, 0.0, 1.8).unwrap()).unwrap();
        assert!(rel(c, 0.531_979_157_720_293) < 1e-13);
        let c = singular_constant(&ProblemParams::new(4, 0.75, -0.5, 1.9).unwrap()).unwrap();
        assert!(rel(c, 1.082_253_264_227_696) < 1e-13);
        let e = singular_constant(&ProblemParams::new(3, 0.5, 0.0, 1.2).unwrap()).unwrap_err();
        assert!(e.to_string().contains("p > (n + alpha)/(n - 2 sigma)"));
        let e = singular_constant(&ProblemParams::new(3, 0.5, -1.2, 1.2).unwrap()).unwrap_err();
        assert!(e.to_string().contains("alpha > -2 sigma"));
    }

    #[test]
    fn kappa_values() {
        assert_eq!(kappa_sigma(0.5), 1.0);
        assert!(rel(kappa_sigma(0.25), 0.477_988_797_486_125) < 1e-13);
        let direct = gamma(0.75) / (2f64.powf(-0.5) * gamma(0.25));
        assert!(rel(kappa_sigma(0.25), direct) < 1e-14);
    }

    #[test]
    fn normalizers() {
        let inv_pi2 = 1.0 / (PI * PI);
        assert!(rel(poisson_normalizer(3, 0.5), inv_pi2) < 1e-14);
        assert!(rel(hypersingular_normalizer(3, 0.5), inv_pi2) < 1e-14);
        // n = 1, σ = 1/2: c = 1/π, the Hilbert-transform constant
        assert!(rel(hypersingular_normalizer(1, 0.5), 1.0 / PI) < 1e-14);
        assert!(rel(sphere_area(3), 4.0 * PI) < 1e-15);
        assert!(rel(sphere_area(2), 2.0 * PI) < 1e-15);
        assert!(rel(sphere_area(4), 2.0 * PI * PI) < 1e-15);
    }

    #[test]
    fn classical_constant() {
        let c = classical_limit_constant(3, 0.0, 4.0).unwrap();
        assert!(rel(c, 0.605_706_864_277_380) < 1e-14);
        assert!(classical_limit_constant(4, 0.0, 2.0).is_err());
        assert!(classical_limit_constant(2, 0.0, 2.0).is_err());
        let c = classical_limit_constant(4, 0.5, 2.5).unwrap();
        let direct = (2.5f64 / 2.25 * 2.0 * (2.5 - 4.5 / 2.0)).powf(1.0 / 1.5);
        assert!(rel(c, direct) < 1e-14);
    }

    #[test]
    fn local_limit_convergence() {
        // C^{p-1} → C0^{p-1} as σ → 1
        for n in [3u32, 4] {
            for alpha in [-0.5, 0.0, 0.5] {
                let nf = n as f64;
                let p = 0.5 * ((nf + alpha) / (nf - 2.0) + (nf + 2.0) / (nf - 2.0));
                let target = classical_limit_power(n, alpha, p);
                let mut prev = f64::INFINITY;
                for k in 3..=6 {
                    let s = 1.0 - 10f64.powi(-k);
                    let pp = ProblemParams::new(n as i64, s, alpha, p).unwrap();
                    let c = singular_constant(&pp).unwrap();
                    let dev = rel(c.powf(p - 1.0), target);
                    assert!(dev < prev);
                    prev = dev;
                }
                assert!(prev < 1e-4, "n={n} alpha={alpha} dev={prev}");
            }
        }
    }

    proptest! {
        #[test]
        fn singular_constant_positive(n in 2i64..8, s in 0.01f64..0.99, a in -1.99f64..3.0, f in 0.01f64..0.99) {
            let alpha = a * s;
            let nm = n as f64 - 2.0 * s;
            // β = f·(n-2σ) ∈ (0, n-2σ)
            let beta = f * nm;
            let p = 1.0 + (2.0 * s + alpha) / beta;
            let pp = ProblemParams::new(n, s, alpha, p).unwrap();
            let c = singular_constant(&pp).unwrap();
            prop_assert!(c > 0.0 && c.is_finite());
        }

        #[test]
        fn kappa_positive(s in 0.001f64..0.999) {
            prop_assert!(kappa_sigma(s) > 0.0);
            prop_assert!(hypersingular_normalizer(3, s) > 0.0);
        }

        #[test]
        fn reflection_identity(x in -20.0f64..20.0) {
            prop_assume!((x - x.round()).abs() > 1e-3);
            let prod = gamma(x) * gamma(1.0 - x) * sin_pi(x);
            prop_assert!((prod - PI).abs() / PI < 1e-12);
        }
    }
}
