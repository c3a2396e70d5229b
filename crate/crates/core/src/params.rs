//! Problem parameters, derived exponents and the regime classifier.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default equality tolerance used when comparing exponents against thresholds.
pub const DEFAULT_THRESHOLD_TOL: f64 = 1e-12;

/// One instance `(n, σ, α, p)` of the Hardy–Hénon problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub n: u32,
    pub sigma: f64,
    pub alpha: f64,
    pub p: f64,
}

impl ProblemParams {
    /// Validates raw input. Each violated invariant has its own error.
    pub fn new(n: i64, sigma: f64, alpha: f64, p: f64) -> Result<Self> {
        for (name, v) in [("sigma", sigma), ("alpha", alpha), ("p", p)] {
            if !v.is_finite() {
                return Err(Error::NonFinite(name));
            }
        }
        if n < 2 {
            return Err(Error::DimensionBelowTwo(n));
        }
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(Error::SigmaOutOfRange(sigma));
        }
        if p <= 1.0 {
            return Err(Error::ExponentNotSuperlinear(p));
        }
        let n = u32::try_from(n).map_err(|_| Error::Precondition(format!("dimension {n} too large")))?;
        Ok(Self { n, sigma, alpha, p })
    }

    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    /// `n - 2σ`
    pub fn n_minus_2s(&self) -> f64 {
        self.nf() - 2.0 * self.sigma
    }

    /// Singular rate `β = (2σ + α)/(p - 1)`.
    pub fn beta(&self) -> f64 {
        (2.0 * self.sigma + self.alpha) / (self.p - 1.0)
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        Self { alpha, ..*self }
    }

    pub fn with_p(&self, p: f64) -> Self {
        Self { p, ..*self }
    }

    pub fn derived(&self) -> DerivedExponents {
        DerivedExponents::from_params(self)
    }

    /// Checks `α > -2σ` and `p > (n+α)/(n-2σ)`, i.e. `0 < β < n - 2σ`.
    pub fn require_singular_range(&self) -> Result<()> {
        let d = self.derived();
        if !(self.alpha > -2.0 * self.sigma) {
            return Err(Error::Precondition(format!(
                "alpha > -2 sigma required (alpha = {}, -2 sigma = {})",
                self.alpha,
                -2.0 * self.sigma
            )));
        }
        if !(self.p > d.serrin) {
            return Err(Error::Precondition(format!(
                "p > (n + alpha)/(n - 2 sigma) required (p = {}, threshold = {})",
                self.p, d.serrin
            )));
        }
        Ok(())
    }
}

impl fmt::Display for ProblemParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(n={}, sigma={}, alpha={}, p={})", self.n, self.sigma, self.alpha, self.p)
    }
}

/// Exponents and coefficients derived from [`ProblemParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedExponents {
    pub beta: f64,
    /// `(n+α)/(n-2σ)`
    pub serrin: f64,
    /// `(n+2σ)/(n-2σ)`
    pub sobolev_crit: f64,
    /// `p_S(α) = (n+2σ+2α)/(n-2σ)`
    pub hardy_sobolev_crit: f64,
    /// `(n+2σ+α)/(n-2σ)`
    pub thm11_upper: f64,
    #[serde(rename = "J1")]
    pub j1: f64,
    #[serde(rename = "J2")]
    pub j2: f64,
    /// Kelvin-mapped weight exponent `p(n-2σ) - (n+2σ+α)`.
    pub vartheta: f64,
    /// `(n-2σ)/2 - β`
    pub tau: f64,
}

impl DerivedExponents {
    pub fn from_params(pp: &ProblemParams) -> Self {
        let n = pp.nf();
        let s = pp.sigma;
        let a = pp.alpha;
        let p = pp.p;
        let nm = n - 2.0 * s;
        let beta = pp.beta();
        let hs = (n + 2.0 * s + 2.0 * a) / nm;
        // p within the threshold tolerance of p_S counts as p = p_S.
        let j1 = if tol_cmp(p, hs, DEFAULT_THRESHOLD_TOL) == Ordering::Equal {
            0.0
        } else {
            nm / (p - 1.0) * (hs - p)
        };
        Self {
            beta,
            serrin: (n + a) / nm,
            sobolev_crit: (n + 2.0 * s) / nm,
            hardy_sobolev_crit: hs,
            thm11_upper: (n + 2.0 * s + a) / nm,
            j1,
            j2: beta * (nm - beta),
            vartheta: p * nm - (n + 2.0 * s + a),
            tau: nm / 2.0 - beta,
        }
    }
}

/// Tolerant three-way comparison; values within `tol·max(1,|a|,|b|)` are equal.
pub fn tol_cmp(a: f64, b: f64, tol: f64) -> Ordering {
    let scale = 1f64.max(a.abs()).max(b.abs());
    if (a - b).abs() <= tol * scale {
        Ordering::Equal
    } else if a < b {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RegimeLabel {
    NonexistenceAlphaBelowMinus2Sigma,
    ExteriorTriviality,
    /// `p` equals the Serrin-type exponent `(n+α)/(n-2σ)` exactly.
    SerrinCritical,
    Subcritical,
    HardySobolevCritical,
    Supercritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TheoremTag {
    #[serde(rename = "Thm1.1")]
    Thm1_1,
    #[serde(rename = "Thm1.2")]
    Thm1_2,
    #[serde(rename = "Thm1.3(1)")]
    Thm1_3_1,
    #[serde(rename = "Thm1.3(2)")]
    Thm1_3_2,
    #[serde(rename = "Thm1.4")]
    Thm1_4,
    #[serde(rename = "Cor1.1")]
    Cor1_1,
    #[serde(rename = "Cor2.1")]
    Cor2_1,
}

/// Threshold equalities detected by the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Threshold {
    AlphaEqualsMinus2Sigma,
    AlphaEqualsZero,
    AlphaEquals2Sigma,
    PEqualsSerrin,
    PEqualsHardySobolev,
    PEqualsThm11Upper,
    PEqualsSobolev,
    PEqualsLaneEmdenSerrin,
}

/// Candidate decay/blow-up exponents: the fast rate `n-2σ` and the singular rate `β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictedRates {
    pub fast: f64,
    pub singular: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeVerdict {
    pub label: RegimeLabel,
    pub applicable_theorems: BTreeSet<TheoremTag>,
    pub predicted_rates: PredictedRates,
    pub thresholds_hit: BTreeSet<Threshold>,
    pub notes: Vec<String>,
}

impl RegimeVerdict {
    pub fn has(&self, tag: TheoremTag) -> bool {
        self.applicable_theorems.contains(&tag)
    }
}

pub fn classify_regime(pp: &ProblemParams) -> RegimeVerdict {
    classify_regime_with_tol(pp, DEFAULT_THRESHOLD_TOL)
}

pub fn classify_regime_with_tol(pp: &ProblemParams, tol: f64) -> RegimeVerdict {
    use Ordering::*;

    let d = pp.derived();
    let s = pp.sigma;
    let a = pp.alpha;
    let p = pp.p;
    let n = pp.nf();

    let alpha_vs_m2s = tol_cmp(a, -2.0 * s, tol);
    let alpha_vs_0 = tol_cmp(a, 0.0, tol);
    let alpha_vs_2s = tol_cmp(a, 2.0 * s, tol);
    let p_vs_serrin = tol_cmp(p, d.serrin, tol);
    let p_vs_hs = tol_cmp(p, d.hardy_sobolev_crit, tol);
    let p_vs_upper = tol_cmp(p, d.thm11_upper, tol);
    let p_vs_sob = tol_cmp(p, d.sobolev_crit, tol);
    let le_serrin = n / (n - 2.0 * s);
    let p_vs_le = tol_cmp(p, le_serrin, tol);

    let mut hit = BTreeSet::new();
    for (ord, th) in [
        (alpha_vs_m2s, Threshold::AlphaEqualsMinus2Sigma),
        (alpha_vs_0, Threshold::AlphaEqualsZero),
        (alpha_vs_2s, Threshold::AlphaEquals2Sigma),
        (p_vs_serrin, Threshold::PEqualsSerrin),
        (p_vs_hs, Threshold::PEqualsHardySobolev),
        (p_vs_upper, Threshold::PEqualsThm11Upper),
        (p_vs_sob, Threshold::PEqualsSobolev),
    ] {
        if ord == Equal {
            hit.insert(th);
        }
    }
    if alpha_vs_0 == Equal && p_vs_le == Equal {
        hit.insert(Threshold::PEqualsLaneEmdenSerrin);
    }

    let label = if alpha_vs_m2s == Less {
        RegimeLabel::NonexistenceAlphaBelowMinus2Sigma
    } else {
        match p_vs_serrin {
            Less => RegimeLabel::ExteriorTriviality,
            Equal => RegimeLabel::SerrinCritical,
            Greater => match p_vs_hs {
                Less => RegimeLabel::Subcritical,
                Equal => RegimeLabel::HardySobolevCritical,
                Greater => RegimeLabel::Supercritical,
            },
        }
    };

    let alpha_gt_m2s = alpha_vs_m2s == Greater;
    let below_sobolev = p_vs_sob == Less;
    let mut tags = BTreeSet::new();
    let mut notes = Vec::new();

    if below_sobolev {
        // Theorems 1.1 and 1.4 share their hypotheses (singularity at 0 / at ∞).
        let thm11 = alpha_gt_m2s
            && alpha_vs_0 != Greater
            && p_vs_serrin == Greater
            && p_vs_upper != Greater
            && p_vs_hs != Equal;
        if thm11 {
            tags.insert(TheoremTag::Thm1_1);
            tags.insert(TheoremTag::Thm1_4);
        }
        if alpha_gt_m2s && alpha_vs_2s == Less && p_vs_serrin == Greater {
            tags.insert(TheoremTag::Thm1_2);
        }
        if alpha_gt_m2s && p_vs_serrin == Less {
            tags.insert(TheoremTag::Thm1_3_1);
        }
        if alpha_gt_m2s && p_vs_serrin == Greater {
            tags.insert(TheoremTag::Thm1_3_2);
        }
        if alpha_vs_0 == Equal && p_vs_le == Greater {
            tags.insert(TheoremTag::Cor1_1);
        }
        if alpha_vs_m2s == Less {
            tags.insert(TheoremTag::Cor2_1);
        }
    } else {
        notes.push("p >= (n+2sigma)/(n-2sigma): no theorem hypotheses hold".to_string());
    }
    if alpha_vs_2s == Equal {
        notes.push("alpha = 2sigma: outside covered range of Thm1.2".to_string());
    }
    if alpha_vs_m2s == Equal {
        notes.push("alpha = -2sigma: beta = 0, outside every theorem's hypotheses".to_string());
    }

    RegimeVerdict {
        label,
        applicable_theorems: tags,
        predicted_rates: PredictedRates { fast: pp.n_minus_2s(), singular: d.beta },
        thresholds_hit: hit,
        notes,
    }
}
