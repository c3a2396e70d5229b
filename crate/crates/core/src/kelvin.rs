//! Kelvin transform of radial traces, the exponent map `α ↦ ϑ` and the exponent equivalences
//! it induces.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fraclap::RadialProfile;
use crate::params::{tol_cmp, ProblemParams, DEFAULT_THRESHOLD_TOL};
use crate::specialfn::singular_constant;

/// `ϑ = p(n-2σ) - (n+2σ+α)` together with the source and mapped parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KelvinMap {
    pub source: ProblemParams,
    pub vartheta: f64,
    pub mapped: ProblemParams,
}

pub fn kelvin_exponent(params: &ProblemParams) -> KelvinMap {
    let vartheta = params.p * params.n_minus_2s() - (params.nf() + 2.0 * params.sigma + params.alpha);
    KelvinMap { source: *params, vartheta, mapped: params.with_alpha(vartheta) }
}

/// `ρ^{-(n-2σ)} u(1/ρ)`.
pub fn kelvin_point_transform(u: &RadialProfile, rho: f64, n: u32, sigma: f64) -> Result<f64> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::Precondition(format!("rho must be positive and finite (rho = {rho})")));
    }
    Ok(rho.powf(-(n as f64 - 2.0 * sigma)) * u.evaluate(1.0 / rho))
}

/// The transformed trace as a profile.
pub fn kelvin_profile(u: &RadialProfile, n: u32, sigma: f64) -> RadialProfile {
    let d = n as f64 - 2.0 * sigma;
    let src = u.clone();
    RadialProfile::from_fn(
        move |rho| rho.powf(-d) * src.evaluate(1.0 / rho),
        d - u.outer_exponent,
        d - u.inner_exponent,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Equivalence {
    pub predicate: &'static str,
    pub left: bool,
    pub right: bool,
}

impl Equivalence {
    pub fn agrees(&self) -> bool {
        self.left == self.right
    }
}

/// Evaluates the exponent equivalences under `α ↦ ϑ`; every pair should agree.
///
/// Comparisons against thresholds use [`tol_cmp`] with `tol`.
pub fn verify_equivalences_with_tol(params: &ProblemParams, tol: f64) -> Vec<Equivalence> {
    let k = kelvin_exponent(params);
    let (n, s, a, p, th) = (params.nf(), params.sigma, params.alpha, params.p, k.vartheta);
    let nm = params.n_minus_2s();
    let lt = |x: f64, y: f64| tol_cmp(x, y, tol) == Ordering::Less;
    let le = |x: f64, y: f64| tol_cmp(x, y, tol) != Ordering::Greater;
    let ne = |x: f64, y: f64| tol_cmp(x, y, tol) != Ordering::Equal;
    vec![
        Equivalence {
            predicate: "-2 sigma < vartheta <=> (n + alpha)/(n - 2 sigma) < p",
            left: lt(-2.0 * s, th),
            right: lt((n + a) / nm, p),
        },
        Equivalence {
            predicate: "vartheta <= 0 <=> p <= (n + 2 sigma + alpha)/(n - 2 sigma)",
            left: le(th, 0.0),
            right: le(p, (n + 2.0 * s + a) / nm),
        },
        Equivalence {
            predicate: "(n + vartheta)/(n - 2 sigma) < p <=> -2 sigma < alpha",
            left: lt((n + th) / nm, p),
            right: lt(-2.0 * s, a),
        },
        Equivalence {
            predicate: "p <= (n + 2 sigma + vartheta)/(n - 2 sigma) <=> alpha <= 0",
            left: le(p, (n + 2.0 * s + th) / nm),
            right: le(a, 0.0),
        },
        Equivalence {
            predicate: "p != (n + 2 sigma + 2 vartheta)/(n - 2 sigma) <=> p != (n + 2 sigma + 2 alpha)/(n - 2 sigma)",
            left: ne(p, (n + 2.0 * s + 2.0 * th) / nm),
            right: ne(p, (n + 2.0 * s + 2.0 * a) / nm),
        },
        Equivalence {
            predicate: "p > (n + vartheta)/(n - 2 sigma) <=> alpha > -2 sigma",
            left: lt((n + th) / nm, p),
            right: lt(-2.0 * s, a),
        },
        Equivalence {
            predicate: "p < (n + 2 sigma + 2 vartheta)/(n - 2 sigma) <=> p > (n + 2 sigma + 2 alpha)/(n - 2 sigma)",
            left: lt(p, (n + 2.0 * s + 2.0 * th) / nm),
            right: lt((n + 2.0 * s + 2.0 * a) / nm, p),
        },
    ]
}

pub fn verify_equivalences(params: &ProblemParams) -> Vec<Equivalence> {
    verify_equivalences_with_tol(params, DEFAULT_THRESHOLD_TOL)
}

/// `|C_{p,σ,ϑ} - C_{p,σ,α}| / C_{p,σ,α}`.
pub fn constant_invariance(params: &ProblemParams) -> Result<f64> {
    let k = kelvin_exponent(params);
    let c = singular_constant(params)?;
    let cm = singular_constant(&k.mapped).map_err(|e| match e {
        Error::Precondition(m) => Error::Precondition(format!("mapped exponent vartheta = {}: {m}", k.vartheta)),
        other => other,
    })?;
    Ok((cm - c).abs() / c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pp(n: i64, s: f64, a: f64, p: f64) -> ProblemParams {
        ProblemParams::new(n, s, a, p).unwrap()
    }

    #[test]
    fn exponent_examples() {
        assert_eq!(kelvin_exponent(&pp(3, 0.5, 0.0, 2.0)).vartheta, 0.0);
        assert!((kelvin_exponent(&pp(3, 0.5, 0.0, 1.8)).vartheta + 0.4).abs() < 1e-15);
        let base = pp(4, 0.3, 0.7, 2.0);
        let upper = base.derived().thm11_upper;
        assert!(kelvin_exponent(&base.with_p(upper)).vartheta.abs() < 1e-14);
    }

    #[test]
    fn point_transform_examples() {
        let (n, s) = (3u32, 0.5);
        let params = pp(3, 0.5, 0.0, 1.8);
        let beta = params.beta();
        let u = RadialProfile::power(1.0, beta);
        let k = kelvin_exponent(&params);
        for &rho in &[0.3, 1.0, 2.7] {
            let v = kelvin_point_transform(&u, rho, n, s).unwrap();
            assert!((v / rho.powf(-k.mapped.beta()) - 1.0).abs() < 1e-13);
        }
        let fast = RadialProfile::power(1.0, 2.0);
        for &rho in &[0.1, 5.0] {
            assert!((kelvin_point_transform(&fast, rho, n, s).unwrap() - 1.0).abs() < 1e-13);
        }
        assert!(kelvin_point_transform(&u, 0.0, n, s).is_err());
    }

    #[test]
    fn transform_is_involution() {
        let u = RadialProfile::from_fn(|r| (1.0 + r * r).powf(-0.8) * (2.0 + r.sin()), 0.0, 1.6);
        let once = kelvin_profile(&u, 4, 0.35);
        let twice = kelvin_profile(&once, 4, 0.35);
        for &r in &[0.01, 0.4, 1.0, 3.3, 70.0] {
            assert!((twice.evaluate(r) / u.evaluate(r) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_trace_is_fixed_by_the_transform() {
        let params = pp(3, 0.5, 0.0, 1.8);
        let c = singular_constant(&params).unwrap();
        let k = kelvin_exponent(&params);
        let cm = singular_constant(&k.mapped).unwrap();
        let u = RadialProfile::power(c, params.beta());
        for &rho in &[0.2, 1.0, 6.0] {
            let v = kelvin_point_transform(&u, rho, 3, 0.5).unwrap();
            let w = cm * rho.powf(-k.mapped.beta());
            assert!((v / w - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_invariance_examples() {
        assert!(constant_invariance(&pp(3, 0.5, 0.0, 1.8)).unwrap() < 1e-12);
        let base = pp(4, 0.4, 0.3, 2.0);
        let fixed = base.with_p(base.derived().hardy_sobolev_crit);
        assert!(constant_invariance(&fixed).unwrap() < 1e-15);
        // α ≤ -2σ leaves the admissible range
        assert!(matches!(constant_invariance(&pp(3, 0.5, -1.5, 2.0)), Err(Error::Precondition(_))));
    }

    #[test]
    fn threshold_cases() {
        let base = pp(3, 0.5, -0.25, 2.0);
        let at = base.with_p(base.derived().hardy_sobolev_crit);
        let eqs = verify_equivalences(&at);
        assert!(!eqs[4].left && !eqs[4].right);
        assert!(eqs.iter().all(Equivalence::agrees));
        let zero = pp(3, 0.5, 0.0, 1.7);
        let eqs = verify_equivalences(&zero);
        assert!(eqs[3].right && eqs[3].agrees());
    }

    proptest! {
        #[test]
        fn equivalences_agree(n in 2i64..9, s in 0.01f64..0.99, a in -3.0f64..3.0, p in 1.01f64..8.0) {
            let params = pp(n, s, a, p);
            for e in verify_equivalences(&params) {
                prop_assert!(e.agrees(), "{} at {params}", e.predicate);
            }
        }

        #[test]
        fn exponent_map_is_involution(n in 2i64..9, s in 0.01f64..0.99, a in -3.0f64..3.0, p in 1.01f64..8.0) {
            let params = pp(n, s, a, p);
            let back = kelvin_exponent(&kelvin_exponent(&params).mapped).vartheta;
            prop_assert!((back - a).abs() < 1e-12 * (1.0 + p * n as f64));
        }

        #[test]
        fn tau_changes_sign(n in 2i64..9, s in 0.01f64..0.99, a in -3.0f64..3.0, p in 1.01f64..8.0) {
            let params = pp(n, s, a, p);
            let t = params.derived().tau;
            let tm = kelvin_exponent(&params).mapped.derived().tau;
            prop_assert!((t + tm).abs() < 1e-12 * (1.0 + t.abs() + n as f64));
        }
    }
}
