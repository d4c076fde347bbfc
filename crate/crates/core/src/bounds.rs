//! Closed-form mutual-information and maximal-leakage bounds for ε-DP
//! algorithms, and their translation into generalization guarantees.
//!
//! Every bound with a grid parameter `t` is minimized by an exhaustive scan of
//! its full range. The objectives are not convex (the overlap credit switches
//! on at `t = 2` and `Δ_t` moves in integer steps), so no search shortcut is
//! taken. Ties go to the smallest `t`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::mechanisms::PrivacyBudget;
use crate::numeric::log1p_exp_neg;
use crate::typespace::type_count_claim2_log;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundFamily {
    Eq8,
    Eq9,
    Thm1,
    Thm2,
    Thm3,
    Thm4,
    Thm4Sharp,
    Thm5,
    MlBaseline,
}

impl BoundFamily {
    pub const ALL: [BoundFamily; 9] = [
        Self::Eq8,
        Self::Eq9,
        Self::Thm1,
        Self::Thm2,
        Self::Thm3,
        Self::Thm4,
        Self::Thm4Sharp,
        Self::Thm5,
        Self::MlBaseline,
    ];

    /// Families plotted in the bound-comparison sweeps.
    pub const FIGURE: [BoundFamily; 7] = [
        Self::Eq8,
        Self::Eq9,
        Self::Thm1,
        Self::Thm2,
        Self::Thm3,
        Self::Thm4,
        Self::Thm5,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Eq8 => "eq8",
            Self::Eq9 => "eq9",
            Self::Thm1 => "thm1",
            Self::Thm2 => "thm2",
            Self::Thm3 => "thm3",
            Self::Thm4 => "thm4",
            Self::Thm4Sharp => "thm4_sharp",
            Self::Thm5 => "thm5",
            Self::MlBaseline => "ml_baseline",
        }
    }

    /// Bounds on mutual information (as opposed to maximal leakage).
    pub fn bounds_mutual_information(self) -> bool {
        matches!(self, Self::Eq8 | Self::Eq9 | Self::Thm1 | Self::Thm2 | Self::Thm3)
    }

    pub fn depends_on_epsilon(self) -> bool {
        !matches!(self, Self::Eq8 | Self::Thm4 | Self::Thm4Sharp)
    }

    pub fn has_grid_parameter(self) -> bool {
        matches!(self, Self::Thm1 | Self::Thm2 | Self::Thm3)
    }
}

impl fmt::Display for BoundFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|f| f.name() == key)
            .ok_or_else(|| Error::Domain(format!("unknown bound family '{s}'")))
    }
}

/// Problem size, privacy level, and sub-Gaussian constant a bound is evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundQuery {
    pub n: u64,
    pub m: usize,
    pub epsilon: PrivacyBudget,
    pub sigma: f64,
}

impl BoundQuery {
    pub fn new(n: u64, m: usize, epsilon: f64, sigma: f64) -> Result<Self> {
        Self::with_budget(n, m, PrivacyBudget::pure(epsilon)?, sigma)
    }

    pub fn with_budget(n: u64, m: usize, epsilon: PrivacyBudget, sigma: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::Domain("dataset size n must be at least 1".into()));
        }
        if m < 2 {
            return Err(Error::Domain(format!("alphabet size must be at least 2, got {m}")));
        }
        if !(sigma > 0.0) {
            return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
        }
        if epsilon.delta != 0.0 {
            return Err(Error::Domain(format!(
                "bounds are defined for pure DP only; got delta = {}",
                epsilon.delta
            )));
        }
        Ok(Self { n, m, epsilon, sigma })
    }

    pub fn eps(&self) -> f64 {
        self.epsilon.epsilon
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    fn k(&self) -> f64 {
        self.m as f64 - 1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub name: String,
    #[serde(with = "crate::numeric::extended_f64")]
    pub value: f64,
}

impl Term {
    fn new(name: &str, value: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
        }
    }
}

/// A bound's value in nats together with the minimizing grid parameter and
/// the additive terms it is made of.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub family: BoundFamily,
    #[serde(with = "crate::numeric::extended_f64")]
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub argmin_t: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_t: Option<u64>,
    pub terms: Vec<Term>,
}

impl BoundReport {
    fn from_terms(family: BoundFamily, terms: Vec<Term>) -> Self {
        let value = sum_left(terms.iter().map(|t| t.value));
        Self {
            family,
            value,
            argmin_t: None,
            delta_t: None,
            terms,
        }
    }

    pub fn terms_sum(&self) -> f64 {
        sum_left(self.terms.iter().map(|t| t.value))
    }
}

// Left fold from 0.0; the scan and the reported breakdown both use it so the
// reported value is bit-identical to the minimized objective.
fn sum_left(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, |a, b| a + b)
}

fn require_finite_eps(q: &BoundQuery, family: BoundFamily) -> Result<()> {
    if q.eps() > 1.0 {
        return Err(Error::Domain(format!(
            "{family} requires epsilon <= 1, got {}",
            PrivacyBudget {
                epsilon: q.eps(),
                delta: 0.0
            }
        )));
    }
    Ok(())
}

/// Exhaustive scan of `t in 1..=t_max`, keeping the first minimizer.
fn scan<const K: usize>(t_max: u64, objective: impl Fn(u64) -> [f64; K]) -> (u64, [f64; K]) {
    let mut best_t = 1;
    let mut best_terms = objective(1);
    let mut best = sum_left(best_terms);
    for t in 2..=t_max {
        let terms = objective(t);
        let v = sum_left(terms);
        if v < best {
            best = v;
            best_t = t;
            best_terms = terms;
        }
    }
    (best_t, best_terms)
}

fn grid_report<const K: usize>(
    family: BoundFamily,
    names: [&str; K],
    t: u64,
    terms: [f64; K],
    delta_t: Option<u64>,
) -> BoundReport {
    let mut r = BoundReport::from_terms(family, names.iter().zip(terms).map(|(n, v)| Term::new(n, v)).collect());
    r.argmin_t = Some(t);
    r.delta_t = delta_t;
    r
}

/// `(m-1) log(n+1)`: KL bound for any discrete algorithm.
pub fn bound_eq8(q: &BoundQuery) -> BoundReport {
    BoundReport::from_terms(BoundFamily::Eq8, vec![Term::new("log_types", q.k() * q.nf().ln_1p())])
}

/// `(m-1) log(1 + e ε n)` for ε <= 1.
pub fn bound_eq9(q: &BoundQuery) -> Result<BoundReport> {
    require_finite_eps(q, BoundFamily::Eq9)?;
    let v = q.k() * (std::f64::consts::E * q.eps() * q.nf()).ln_1p();
    Ok(BoundReport::from_terms(
        BoundFamily::Eq9,
        vec![Term::new("log_cells", v)],
    ))
}

/// Full-cube representative set with the overlap credit:
/// `min_t (m-1)εn/t + (m-1) log t - 1{t>=2} log(1 + e^{-εn})`.
pub fn bound_thm1(q: &BoundQuery) -> Result<BoundReport> {
    let (t, terms) = scan(q.n, |t| thm1_terms(q, t));
    Ok(grid_report(
        BoundFamily::Thm1,
        ["privacy", "log_cells", "overlap"],
        t,
        terms,
        None,
    ))
}

fn thm1_terms(q: &BoundQuery, t: u64) -> [f64; 3] {
    let (k, n, eps) = (q.k(), q.nf(), q.eps());
    let tf = t as f64;
    let overlap = if t >= 2 { 0.0 - log1p_exp_neg(eps * n) } else { 0.0 };
    [k * eps * n / tf, k * tf.ln(), overlap]
}

/// `Δ_t = ⌈n/t⌉ + 1`.
pub fn simplex_delta_t(n: u64, t: u64) -> u64 {
    n.div_ceil(t) + 1
}

/// Simplex-pruned representative set:
/// `min_t (m-1)εn/t + (m-1) log(t + (m-2)/2) - log((m-1)!) - 1{t>=2} log(1 + e^{-εΔ_t})`.
pub fn bound_thm2(q: &BoundQuery) -> Result<BoundReport> {
    let (t, terms) = scan(q.n, |t| thm2_terms(q, t));
    Ok(grid_report(
        BoundFamily::Thm2,
        ["privacy", "log_cells", "log_factorial", "overlap"],
        t,
        terms,
        Some(simplex_delta_t(q.n, t)),
    ))
}

fn thm2_terms(q: &BoundQuery, t: u64) -> [f64; 4] {
    let (k, n, eps) = (q.k(), q.nf(), q.eps());
    let tf = t as f64;
    let half_gap = (q.m as f64 - 2.0) / 2.0;
    let log_fact = crate::numeric::ln_factorial(q.m as u64 - 1);
    let overlap = if t >= 2 {
        0.0 - log1p_exp_neg(eps * simplex_delta_t(q.n, t) as f64)
    } else {
        0.0
    };
    [k * eps * n / tf, k * (tf + half_gap).ln(), -log_fact, overlap]
}

/// `√(n log n)`, half the side of the cube holding every strongly typical count vector.
pub fn typical_radius(n: u64) -> f64 {
    let nf = n as f64;
    (nf * nf.ln()).sqrt()
}

/// Largest grid parameter of the typicality construction, `⌊2√(n log n)⌋`.
pub fn typical_t_max(n: u64) -> u64 {
    (2.0 * typical_radius(n)).floor() as u64
}

/// `Δ_t = ⌈2√(n log n)/t⌉ + 1`.
pub fn typical_delta_t(n: u64, t: u64) -> u64 {
    (2.0 * typical_radius(n) / t as f64).ceil() as u64 + 1
}

/// Typicality-restricted representative set; bounds `I(S;W)` directly:
/// `min_t εm√(n log n)/t - 1{t>=2} log(1+e^{-εΔ_t}) + 2mε/n + 1{t>=2} min{m log t, log(m t^{m-1})}`.
pub fn bound_thm3(q: &BoundQuery) -> Result<BoundReport> {
    if q.n < 2 {
        return Err(Error::Domain("n must be ≥ 2 for thm3".into()));
    }
    let (t, terms) = scan(typical_t_max(q.n), |t| thm3_terms(q, t));
    Ok(grid_report(
        BoundFamily::Thm3,
        ["privacy", "overlap", "atypical", "log_cells"],
        t,
        terms,
        Some(typical_delta_t(q.n, t)),
    ))
}

fn thm3_terms(q: &BoundQuery, t: u64) -> [f64; 4] {
    let (n, eps) = (q.nf(), q.eps());
    let m = q.m as f64;
    let tf = t as f64;
    let lt = tf.ln();
    let (overlap, cells) = if t >= 2 {
        (
            0.0 - log1p_exp_neg(eps * typical_delta_t(q.n, t) as f64),
            (m * lt).min(m.ln() + (m - 1.0) * lt),
        )
    } else {
        (0.0, 0.0)
    };
    [eps * m * typical_radius(q.n) / tf, overlap, 2.0 * m * eps / n, cells]
}

/// Objective of a grid-parameterized family at a fixed `t`, before minimization.
pub fn objective_at(family: BoundFamily, q: &BoundQuery, t: u64) -> Result<f64> {
    let t_max = match family {
        BoundFamily::Thm1 | BoundFamily::Thm2 => q.n,
        BoundFamily::Thm3 if q.n >= 2 => typical_t_max(q.n),
        BoundFamily::Thm3 => return Err(Error::Domain("n must be ≥ 2 for thm3".into())),
        other => return Err(Error::Domain(format!("{other} has no grid parameter"))),
    };
    if t < 1 || t > t_max {
        return Err(Error::Domain(format!("t must lie in 1..={t_max}, got {t}")));
    }
    Ok(match family {
        BoundFamily::Thm1 => sum_left(thm1_terms(q, t)),
        BoundFamily::Thm2 => sum_left(thm2_terms(q, t)),
        _ => sum_left(thm3_terms(q, t)),
    })
}

/// Maximal leakage of any permutation-invariant algorithm: `(m-1) log(n+1)`.
pub fn bound_thm4(q: &BoundQuery) -> BoundReport {
    BoundReport::from_terms(BoundFamily::Thm4, vec![Term::new("log_types", q.k() * q.nf().ln_1p())])
}

/// `(m-1)(1 + log((n + m/2)/(m-1))) - ½ log(2π(m-1))`.
pub fn bound_thm4_sharpened(q: &BoundQuery) -> BoundReport {
    let k = q.k();
    BoundReport::from_terms(
        BoundFamily::Thm4Sharp,
        vec![
            Term::new("stirling_power", k * (1.0 + ((q.nf() + q.m as f64 / 2.0) / k).ln())),
            Term::new("stirling_prefactor", -0.5 * (2.0 * std::f64::consts::PI * k).ln()),
        ],
    )
}

/// Maximal leakage of an ε-DP algorithm, ε <= 1: `(m-1)nε` when `ε <= 1/n`,
/// otherwise `(m-1) log(e(nε + 1))`.
pub fn bound_thm5(q: &BoundQuery) -> Result<BoundReport> {
    require_finite_eps(q, BoundFamily::Thm5)?;
    let (k, n, eps) = (q.k(), q.nf(), q.eps());
    let term = if n * eps <= 1.0 {
        Term::new("linear_regime", k * n * eps)
    } else {
        Term::new("log_regime", k * (1.0 + (n * eps).ln_1p()))
    };
    Ok(BoundReport::from_terms(BoundFamily::Thm5, vec![term]))
}

/// `min{nε, log |W|}` (just `nε` when the hypothesis count is unknown).
pub fn ml_dp_baseline(q: &BoundQuery, w_size: Option<u64>) -> BoundReport {
    let linear = q.nf() * q.eps();
    let value = match w_size {
        Some(w) => linear.min((w as f64).ln()),
        None => linear,
    };
    BoundReport::from_terms(BoundFamily::MlBaseline, vec![Term::new("leakage", value)])
}

/// Evaluates any family. `w_size` only affects [`BoundFamily::MlBaseline`].
pub fn evaluate(family: BoundFamily, q: &BoundQuery, w_size: Option<u64>) -> Result<BoundReport> {
    match family {
        BoundFamily::Eq8 => Ok(bound_eq8(q)),
        BoundFamily::Eq9 => bound_eq9(q),
        BoundFamily::Thm1 => bound_thm1(q),
        BoundFamily::Thm2 => bound_thm2(q),
        BoundFamily::Thm3 => bound_thm3(q),
        BoundFamily::Thm4 => Ok(bound_thm4(q)),
        BoundFamily::Thm4Sharp => Ok(bound_thm4_sharpened(q)),
        BoundFamily::Thm5 => bound_thm5(q),
        BoundFamily::MlBaseline => Ok(ml_dp_baseline(q, w_size)),
    }
}

/// Like [`evaluate`], but an infinite ε swaps ε-dependent families for their
/// ε-free counterpart (`eq8` for mutual information, `thm4` for leakage).
pub fn evaluate_with_fallback(family: BoundFamily, q: &BoundQuery, w_size: Option<u64>) -> Result<BoundReport> {
    if q.eps().is_infinite() && family.depends_on_epsilon() && family != BoundFamily::MlBaseline {
        return Ok(if family.bounds_mutual_information() {
            bound_eq8(q)
        } else {
            bound_thm4(q)
        });
    }
    evaluate(family, q, w_size)
}

/// Average generalization error bound `√(2σ² I / n)`.
pub fn gen_avg_bound(mi_nats: f64, q: &BoundQuery) -> Result<f64> {
    if !(mi_nats >= 0.0) {
        return Err(Error::Domain(format!(
            "mutual information must be non-negative, got {mi_nats}"
        )));
    }
    Ok((2.0 * q.sigma * q.sigma * mi_nats / q.nf()).sqrt())
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Domain(format!("eta must lie in (0,1), got {eta}")));
    }
    Ok(())
}

/// Log of the tail bound `2 exp(L - nη²/(2σ²))`.
pub fn gen_tail_bound_log(ml_nats: f64, q: &BoundQuery, eta: f64) -> Result<f64> {
    check_eta(eta)?;
    Ok(std::f64::consts::LN_2 + ml_nats - q.nf() * eta * eta / (2.0 * q.sigma * q.sigma))
}

/// `P(|gen| >= η) <= 2 exp(L - nη²/(2σ²))`, unclamped.
pub fn gen_tail_bound(ml_nats: f64, q: &BoundQuery, eta: f64) -> Result<f64> {
    Ok(gen_tail_bound_log(ml_nats, q, eta)?.exp())
}

/// A probability bound carried in both log and linear form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailValue {
    pub log_value: f64,
    pub value: f64,
}

/// Tail bound with the leakage replaced by the Stirling-refined type count.
pub fn gen_tail_explicit(q: &BoundQuery, eta: f64) -> Result<TailValue> {
    let log_value = gen_tail_bound_log(type_count_claim2_log(q.n, q.m), q, eta)?;
    Ok(TailValue {
        log_value,
        value: log_value.exp(),
    })
}
