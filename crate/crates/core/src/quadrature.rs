//! Gauss–Legendre panels, geometric grading and power-substitution tails.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(m: usize) -> Self {
        assert!(m >= 1);
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        let mf = m as f64;
        for i in 0..m.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(m, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[m - 1 - i] = x;
            weights[i] = w;
            weights[m - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Integral of `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(c + h * x);
        }
        s * h
    }
}

/// `(P_m(x), P_m'(x))` by the three-term recurrence.
fn legendre(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shared, cached rule of order `m`.
pub fn rule(m: usize) -> Arc<GaussLegendre> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
    map.entry(m).or_insert_with(|| Arc::new(GaussLegendre::new(m))).clone()
}

/// Integral over `[a, b]` using panels that grow geometrically away from `a`.
///
/// The first panel has width `first`; each following one is `ratio` times wider.
pub fn graded<F: FnMut(f64) -> f64>(gl: &GaussLegendre, a: f64, b: f64, first: f64, ratio: f64, mut f: F) -> f64 {
    let len = b - a;
    if len == 0.0 {
        return 0.0;
    }
    let mut w = first.abs().min(len.abs()) * len.signum();
    let mut x = a;
    let mut s = 0.0;
    loop {
        let next = x + w;
        if (next - a).abs() >= len.abs() * (1.0 - 1e-12) {
            s += gl.integrate(x, b, &mut f);
            break;
        }
        s += gl.integrate(x, next, &mut f);
        x = next;
        w *= ratio;
        if (b - x).abs() < w.abs() * 0.5 {
            // merge a sliver into the last panel
            w = b - x;
        }
    }
    s
}

/// Integral over `[a, b]` with `k` equal panels.
pub fn uniform<F: FnMut(f64) -> f64>(gl: &GaussLegendre, a: f64, b: f64, k: usize, mut f: F) -> f64 {
    let h = (b - a) / k as f64;
    (0..k).map(|i| gl.integrate(a + i as f64 * h, a + (i + 1) as f64 * h, &mut f)).sum()
}

/// Smallest `y` reached by the geometric panels of the power substitutions.
pub const Y_MIN: f64 = 1e-15;

/// `∫_0^1 g(y) dy` for `g` bounded near 0, by panels `[q^{j+1}, q^j]` down to [`Y_MIN`].
fn unit_toward_zero<G: FnMut(f64) -> f64>(gl: &GaussLegendre, ratio: f64, mut g: G) -> f64 {
    let mut hi = 1.0;
    let mut s = 0.0;
    while hi > Y_MIN {
        let lo = hi / ratio;
        s += gl.integrate(lo, hi, &mut g);
        hi = lo;
    }
    // leading-order remainder on [0, hi]
    s + g(hi) * hi
}

/// `∫_0^R f(ρ) dρ` for an integrand behaving like `ρ^c` (`c > -1`) near 0.
///
/// Uses `ρ = R y^k` with `k = 1/(c+1)`, which makes the leading term constant in `y`.
pub fn power_map_origin<F: FnMut(f64) -> f64>(gl: &GaussLegendre, r_max: f64, c: f64, mut f: F) -> f64 {
    assert!(c > -1.0, "integrand exponent must exceed -1");
    let k = 1.0 / (c + 1.0);
    unit_toward_zero(gl, 4.0, |y| {
        let rho = r_max * (k * y.ln()).exp();
        if rho == 0.0 {
            return 0.0;
        }
        f(rho) * k * rho / y
    })
}

/// `∫_T^∞ f(ρ) dρ` for an integrand decaying like `ρ^{-d}` (`d > 1`).
///
/// Uses `ρ = T y^{-k}` with `k = 1/(d-1)`.
pub fn power_map_infinity<F: FnMut(f64) -> f64>(gl: &GaussLegendre, t: f64, d: f64, mut f: F) -> f64 {
    assert!(d > 1.0, "integrand decay exponent must exceed 1");
    let k = 1.0 / (d - 1.0);
    unit_toward_zero(gl, 4.0, |y| {
        let rho = t * (-k * y.ln()).exp();
        if !rho.is_finite() {
            return 0.0;
        }
        let v = f(rho) * k * rho / y;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    })
}
