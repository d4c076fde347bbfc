//! Permutation-invariant mechanisms over the type space and the exact
//! information-theoretic oracles used to check every bound: KL divergence,
//! mutual information, maximal leakage, pure-DP auditing, and the two
//! mixture-KL lemmas.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::numeric::{log_sum_exp, TINY_PROB};
use crate::typespace::{dataset_distance, type_log_probability, SourceDistribution, TypeSpace};
use crate::{Error, Result};

/// Row-stochasticity tolerance applied when a table is constructed or loaded.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Pure (δ = 0) or approximate privacy level. ε may be `+inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget {
    #[serde(with = "crate::numeric::extended_f64")]
    pub epsilon: f64,
    #[serde(default)]
    pub delta: f64,
}

impl PrivacyBudget {
    pub fn pure(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, 0.0)
    }

    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon >= 0.0) {
            return Err(Error::Domain(format!("epsilon must be non-negative, got {epsilon}")));
        }
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::Domain(format!("delta must lie in [0,1], got {delta}")));
        }
        Ok(Self { epsilon, delta })
    }

    pub fn is_finite(&self) -> bool {
        self.epsilon.is_finite()
    }
}

impl fmt::Display for PrivacyBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.epsilon.is_finite() {
            write!(f, "{}", self.epsilon)
        } else {
            write!(f, "infinity")
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MechanismFile {
    n: u64,
    m: usize,
    labels: Vec<String>,
    rows: Vec<Vec<f64>>,
}

/// Conditional pmf `P(w | t)` for every type `t` (rows, canonical order) over a
/// finite hypothesis set (columns).
#[derive(Debug, Clone)]
pub struct MechanismTable {
    space: TypeSpace,
    labels: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl MechanismTable {
    pub fn new(n: u64, m: usize, labels: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let space = TypeSpace::new(n, m)?;
        Self::with_space(space, labels, rows)
    }

    pub fn with_space(space: TypeSpace, labels: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Validation("hypothesis set is empty".into()));
        }
        if rows.len() != space.len() {
            return Err(Error::Validation(format!(
                "expected {} rows (one per type of n={}, m={}), got {}",
                space.len(),
                space.n(),
                space.m(),
                rows.len()
            )));
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != labels.len() {
                return Err(Error::Validation(format!(
                    "row {r} has {} columns, expected {}",
                    row.len(),
                    labels.len()
                )));
            }
            if let Some((c, v)) = row.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
                return Err(Error::Validation(format!(
                    "row {r}, column {c}: entry {v} outside [0,1]"
                )));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::Validation(format!("row {r} sums to {s}, not 1")));
            }
        }
        Ok(Self { space, labels, rows })
    }

    pub fn n(&self) -> u64 {
        self.space.n()
    }

    pub fn m(&self) -> usize {
        self.space.m()
    }

    pub fn space(&self) -> &TypeSpace {
        &self.space
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn num_hypotheses(&self) -> usize {
        self.labels.len()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: MechanismFile = serde_json::from_str(s)?;
        Self::new(f.n, f.m, f.labels, f.rows)
    }

    pub fn to_json(&self) -> Result<String> {
        let f = MechanismFile {
            n: self.n(),
            m: self.m(),
            labels: self.labels.clone(),
            rows: self.rows.clone(),
        };
        Ok(serde_json::to_string_pretty(&f)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn store(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

/// Hypothesis label for a released type, e.g. `"1,0,3"`.
pub fn type_label(counts: &[u64]) -> String {
    counts.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

fn type_labels(space: &TypeSpace) -> Vec<String> {
    space.types().iter().map(|t| type_label(t.counts())).collect()
}

/// `P(w|t) = stay·1{w=t} + (1-stay)/M` over the `M` types.
pub fn make_randomized_response(n: u64, m: usize, stay_prob: f64) -> Result<MechanismTable> {
    if !(0.0..=1.0).contains(&stay_prob) {
        return Err(Error::Domain(format!(
            "stay probability must lie in [0,1], got {stay_prob}"
        )));
    }
    let space = TypeSpace::new(n, m)?;
    let size = space.len();
    let base = (1.0 - stay_prob) / size as f64;
    let rows = (0..size)
        .map(|i| {
            let mut row = vec![base; size];
            row[i] += stay_prob;
            row
        })
        .collect();
    let labels = type_labels(&space);
    MechanismTable::with_space(space, labels, rows)
}

/// Every row is the uniform distribution over the types.
pub fn make_constant(n: u64, m: usize) -> Result<MechanismTable> {
    make_randomized_response(n, m, 0.0)
}

/// Releases the input type exactly.
pub fn make_identity(n: u64, m: usize) -> Result<MechanismTable> {
    make_randomized_response(n, m, 1.0)
}

/// Exponential mechanism with utility `-d(t, w)` (sensitivity 1):
/// `P(w|t) ∝ exp(-eps·d(t,w)/2)`.
pub fn make_exponential_mechanism(n: u64, m: usize, eps_target: f64) -> Result<MechanismTable> {
    if !(eps_target > 0.0) {
        return Err(Error::Domain(format!(
            "target epsilon must be positive, got {eps_target}"
        )));
    }
    let space = TypeSpace::new(n, m)?;
    let types = space.types();
    let rows = types
        .iter()
        .map(|t| {
            let logits: Vec<f64> = types
                .iter()
                .map(|w| -eps_target * dataset_distance(t, w).expect("same space") as f64 / 2.0)
                .collect();
            let z = log_sum_exp(&logits);
            logits.iter().map(|l| (l - z).exp()).collect()
        })
        .collect();
    let labels = type_labels(&space);
    MechanismTable::with_space(space, labels, rows)
}

/// Built-in mechanism families whose hypotheses are released types.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "param", rename_all = "snake_case")]
pub enum MechanismFamily {
    Constant,
    Identity,
    RandomizedResponse(f64),
    Exponential(f64),
}

impl MechanismFamily {
    pub fn build(&self, n: u64, m: usize) -> Result<MechanismTable> {
        match *self {
            Self::Constant => make_constant(n, m),
            Self::Identity => make_identity(n, m),
            Self::RandomizedResponse(stay) => make_randomized_response(n, m, stay),
            Self::Exponential(eps) => make_exponential_mechanism(n, m, eps),
        }
    }

    /// Parses the CLI spelling (`constant`, `identity`, `rr`, `exp`).
    pub fn from_name(name: &str, param: Option<f64>) -> Result<Self> {
        let need =
            |p: Option<f64>| p.ok_or_else(|| Error::Domain(format!("mechanism family '{name}' requires a parameter")));
        match name {
            "constant" => Ok(Self::Constant),
            "identity" => Ok(Self::Identity),
            "rr" | "randomized_response" => Ok(Self::RandomizedResponse(need(param)?)),
            "exp" | "exponential" => Ok(Self::Exponential(need(param)?)),
            other => Err(Error::Domain(format!("unknown mechanism family '{other}'"))),
        }
    }
}

impl fmt::Display for MechanismFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant => write!(f, "constant"),
            Self::Identity => write!(f, "identity"),
            Self::RandomizedResponse(p) => write!(f, "rr({p})"),
            Self::Exponential(e) => write!(f, "exp({e})"),
        }
    }
}

/// Smallest ε with `P(w|t) <= e^ε P(w|t')` over all outputs and all type pairs
/// at dataset distance 1.
pub fn audit_epsilon(mech: &MechanismTable) -> PrivacyBudget {
    let space = mech.space();
    let mut eps: f64 = 0.0;
    for i in 0..space.len() {
        let row_i = mech.row(i);
        for j in space.neighbors(i) {
            let row_j = mech.row(j);
            for (&p, &q) in row_i.iter().zip(row_j) {
                if p <= TINY_PROB {
                    continue;
                }
                if q <= TINY_PROB {
                    return PrivacyBudget {
                        epsilon: f64::INFINITY,
                        delta: 0.0,
                    };
                }
                eps = eps.max(p.ln() - q.ln());
            }
        }
    }
    PrivacyBudget {
        epsilon: eps,
        delta: 0.0,
    }
}

/// KL bound between output distributions of datasets at distance `k` under
/// ε-DP: `(kε·tanh(kε/2), kε)`.
pub fn group_privacy_kl_bound(k: u64, eps: f64) -> (f64, f64) {
    let x = k as f64 * eps;
    if x == 0.0 {
        return (0.0, 0.0);
    }
    (x * (x / 2.0).tanh(), x)
}

fn same_len(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(format!(
            "pmfs of length {} and {}",
            p.len(),
            q.len()
        )));
    }
    Ok(())
}

/// `KL(p || q)` in nats, `+inf` when `p` is not absolutely continuous w.r.t. `q`.
pub fn exact_kl(p: &[f64], q: &[f64]) -> Result<f64> {
    same_len(p, q)?;
    let mut kl = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Ok(f64::INFINITY);
        }
        kl += pi * (pi.ln() - qi.ln());
    }
    Ok(kl.max(0.0))
}

/// Types carrying positive probability under `pz`.
pub fn support_mask(space: &TypeSpace, pz: &SourceDistribution) -> Result<Vec<bool>> {
    space
        .types()
        .iter()
        .map(|t| Ok(type_log_probability(t, pz)? > f64::NEG_INFINITY))
        .collect()
}

/// `I(T; W)` for `T` the type of an i.i.d. dataset from `pz`. For a
/// permutation-invariant mechanism this equals `I(S; W)`.
pub fn exact_mutual_information(mech: &MechanismTable, pz: &SourceDistribution) -> Result<f64> {
    let space = mech.space();
    let log_pt: Vec<f64> = space
        .types()
        .iter()
        .map(|t| type_log_probability(t, pz))
        .collect::<Result<_>>()?;
    let nw = mech.num_hypotheses();
    let mut pw = vec![0.0; nw];
    for (lp, row) in log_pt.iter().zip(mech.rows()) {
        let pt = lp.exp();
        for (acc, &r) in pw.iter_mut().zip(row) {
            *acc += pt * r;
        }
    }
    let log_pw: Vec<f64> = pw.iter().map(|p| p.ln()).collect();
    let mut mi = 0.0;
    for (lp, row) in log_pt.iter().zip(mech.rows()) {
        if *lp == f64::NEG_INFINITY {
            continue;
        }
        let inner: f64 = row
            .iter()
            .zip(&log_pw)
            .filter(|(&r, _)| r > 0.0)
            .map(|(&r, &lq)| r * (r.ln() - lq))
            .sum();
        mi += lp.exp() * inner;
    }
    Ok(mi.max(0.0))
}

/// `log Σ_w max_{t in mask} P(w|t)`.
pub fn exact_max_leakage(mech: &MechanismTable, mask: &[bool]) -> Result<f64> {
    if mask.len() != mech.rows().len() {
        return Err(Error::DimensionMismatch(format!(
            "support mask has {} entries, mechanism has {} rows",
            mask.len(),
            mech.rows().len()
        )));
    }
    let selected: Vec<&[f64]> = mech
        .rows()
        .iter()
        .zip(mask)
        .filter(|(_, &keep)| keep)
        .map(|(r, _)| r.as_slice())
        .collect();
    if selected.is_empty() {
        return Err(Error::EmptySupport);
    }
    let total: f64 = (0..mech.num_hypotheses())
        .map(|w| selected.iter().map(|r| r[w]).fold(0.0, f64::max))
        .sum();
    Ok(total.ln().max(0.0))
}

/// `Σ_w max_i P_i(w)` and whether the supports are pairwise disjoint (the
/// equality case of the `<= M` bound).
pub fn sum_cover(pmfs: &[Vec<f64>]) -> (f64, bool) {
    let width = pmfs.iter().map(Vec::len).max().unwrap_or(0);
    let mut value = 0.0;
    let mut disjoint = true;
    for w in 0..width {
        let col = pmfs.iter().map(|p| p.get(w).copied().unwrap_or(0.0));
        let (mx, positive) = col.fold((0.0f64, 0usize), |(mx, c), v| (mx.max(v), c + (v > 0.0) as usize));
        value += mx;
        if positive > 1 {
            disjoint = false;
        }
    }
    (value, disjoint)
}

/// Pointwise mixture `Σ_b ω_b Q_b`.
pub fn mixture(components: &[Vec<f64>], weights: &[f64]) -> Result<Vec<f64>> {
    if components.len() != weights.len() || components.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "{} components, {} weights",
            components.len(),
            weights.len()
        )));
    }
    let width = components[0].len();
    let mut out = vec![0.0; width];
    for (c, &wt) in components.iter().zip(weights) {
        same_len(c, &out)?;
        for (o, &v) in out.iter_mut().zip(c) {
            *o += wt * v;
        }
    }
    Ok(out)
}

fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::Validation("mixture has no components".into()));
    }
    if let Some(w) = weights.iter().find(|w| !(**w > 0.0)) {
        return Err(Error::Validation(format!("mixture weight {w} is not positive")));
    }
    let s: f64 = weights.iter().sum();
    if (s - 1.0).abs() > 1e-12 {
        return Err(Error::Validation(format!("mixture weights sum to {s}, not 1")));
    }
    Ok(())
}

/// The two upper bounds on `KL(p || Σ_b ω_b Q_b)` from the finite-mixture lemma.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma1Bound {
    /// `-log Σ_b ω_b exp(-KL(p || Q_b))`
    pub soft: f64,
    /// `min_b { KL(p || Q_b) - log ω_b }`
    pub hard: f64,
}

pub fn mixture_kl_bound_lemma1(p: &[f64], components: &[Vec<f64>], weights: &[f64]) -> Result<Lemma1Bound> {
    check_weights(weights)?;
    if components.len() != weights.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} components, {} weights",
            components.len(),
            weights.len()
        )));
    }
    let kls: Vec<f64> = components.iter().map(|q| exact_kl(p, q)).collect::<Result<_>>()?;
    let terms: Vec<f64> = kls.iter().zip(weights).map(|(kl, w)| w.ln() - kl).collect();
    let soft = -log_sum_exp(&terms);
    let hard = kls
        .iter()
        .zip(weights)
        .map(|(kl, w)| kl - w.ln())
        .fold(f64::INFINITY, f64::min);
    Ok(Lemma1Bound { soft, hard })
}

/// Weights and overlap constants `α_{b,i}` for a fixed anchor component `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSpec {
    pub weights: Vec<f64>,
    pub alphas: Vec<f64>,
    pub anchor: usize,
}

impl MixtureSpec {
    pub fn new(weights: Vec<f64>, alphas: Vec<f64>, anchor: usize) -> Result<Self> {
        check_weights(&weights)?;
        if alphas.len() != weights.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights, {} overlap constants",
                weights.len(),
                alphas.len()
            )));
        }
        if anchor >= weights.len() {
            return Err(Error::Validation(format!("anchor {anchor} out of range")));
        }
        if let Some(a) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::Validation(format!("overlap constant {a} outside [0,1]")));
        }
        if alphas[anchor] != 1.0 {
            return Err(Error::Validation(format!(
                "anchor overlap constant must be 1, got {}",
                alphas[anchor]
            )));
        }
        Ok(Self {
            weights,
            alphas,
            anchor,
        })
    }

    /// Uniform weights over `alphas.len()` components.
    pub fn uniform(alphas: Vec<f64>, anchor: usize) -> Result<Self> {
        let k = alphas.len().max(1);
        Self::new(vec![1.0 / k as f64; alphas.len()], alphas, anchor)
    }
}

/// Largest `α <= 1` with `q_b(E) >= α q_i(E)` for every event `E`; on a finite
/// set this is `min_{w: q_i(w) > 0} q_b(w) / q_i(w)`.
pub fn largest_overlap_constant(q_b: &[f64], q_i: &[f64]) -> Result<f64> {
    same_len(q_b, q_i)?;
    Ok(q_b
        .iter()
        .zip(q_i)
        .filter(|(_, &qi)| qi > 0.0)
        .map(|(&qb, &qi)| qb / qi)
        .fold(1.0, f64::min))
}

/// `KL(p || Q_i) - log Σ_b ω_b α_{b,i}`.
pub fn mixture_kl_bound_lemma2(p: &[f64], components: &[Vec<f64>], spec: &MixtureSpec) -> Result<f64> {
    if components.len() != spec.weights.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} components, {} weights",
            components.len(),
            spec.weights.len()
        )));
    }
    let anchor = &components[spec.anchor];
    for (b, (q, &alpha)) in components.iter().zip(&spec.alphas).enumerate() {
        same_len(q, anchor)?;
        for (w, (&qb, &qi)) in q.iter().zip(anchor).enumerate() {
            if qb < alpha * qi * (1.0 - 1e-12) - 1e-300 {
                return Err(Error::Validation(format!(
                    "overlap constant {alpha} for component {b} is too large: Q_b({w}) = {qb} < α·Q_i({w}) = {}",
                    alpha * qi
                )));
            }
        }
    }
    let c: f64 = spec.weights.iter().zip(&spec.alphas).map(|(w, a)| w * a).sum();
    Ok(exact_kl(p, anchor)? - c.ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn audit_examples() {
        assert_eq!(audit_epsilon(&make_constant(3, 2).unwrap()).epsilon, 0.0);
        assert_eq!(audit_epsilon(&make_identity(2, 2).unwrap()).epsilon, f64::INFINITY);
        let rr = make_randomized_response(2, 2, 0.5).unwrap();
        assert!((audit_epsilon(&rr).epsilon - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn randomized_response_audit_formula() {
        for (n, m, rho) in [(3u64, 2usize, 0.25), (2, 3, 0.9), (4, 3, 0.5)] {
            let mech = make_randomized_response(n, m, rho).unwrap();
            let size = mech.space().len() as f64;
            let expected = (1.0 + rho * size / (1.0 - rho)).ln();
            assert!((audit_epsilon(&mech).epsilon - expected).abs() < 1e-12);
            for row in mech.rows() {
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn exponential_mechanism_respects_target() {
        for eps in [1e-6, 0.1, 1.0, 3.0] {
            let mech = make_exponential_mechanism(2, 2, eps).unwrap();
            assert!(audit_epsilon(&mech).epsilon <= eps + 1e-12);
        }
        let tiny = make_exponential_mechanism(3, 2, 1e-9).unwrap();
        assert!(audit_epsilon(&tiny).epsilon < 1e-8);
        let single = make_exponential_mechanism(0, 2, 1.0).unwrap();
        assert_eq!(single.rows().len(), 1);
        assert_eq!(audit_epsilon(&single).epsilon, 0.0);
        assert!(make_exponential_mechanism(2, 2, 0.0).is_err());
    }

    #[test]
    fn group_privacy_examples() {
        assert_eq!(group_privacy_kl_bound(0, 0.7), (0.0, 0.0));
        assert_eq!(group_privacy_kl_bound(4, 0.0), (0.0, 0.0));
        let (tight, loose) = group_privacy_kl_bound(2, 1.0);
        assert!((tight - 1.523_188_311_911_529_8).abs() < 1e-14);
        assert_eq!(loose, 2.0);
    }

    #[test]
    fn kl_examples() {
        let p = [0.3, 0.7];
        assert_eq!(exact_kl(&p, &p).unwrap(), 0.0);
        assert!((exact_kl(&[1.0, 0.0], &[0.5, 0.5]).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(exact_kl(&[0.5, 0.5], &[1.0, 0.0]).unwrap(), f64::INFINITY);
        assert!(exact_kl(&[1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn mutual_information_examples() {
        let fair = SourceDistribution::uniform(2);
        let constant = make_constant(3, 2).unwrap();
        assert!(exact_mutual_information(&constant, &fair).unwrap().abs() < 1e-12);
        let identity = make_identity(1, 2).unwrap();
        assert!((exact_mutual_information(&identity, &fair).unwrap() - 2f64.ln()).abs() < 1e-12);
        // Brute force over the 4 ordered datasets and 3 outputs (40-digit reference).
        let rr = make_randomized_response(2, 2, 0.5).unwrap();
        let mi = exact_mutual_information(&rr, &fair).unwrap();
        assert!((mi - 0.215_965_892_836_699_24).abs() < 1e-12);
        assert!(mi > 0.0 && mi < 3f64.ln());
    }

    #[test]
    fn max_leakage_examples() {
        let full = |mech: &MechanismTable| vec![true; mech.rows().len()];
        let constant = make_constant(3, 2).unwrap();
        assert!(exact_max_leakage(&constant, &full(&constant)).unwrap().abs() < 1e-12);
        let identity = make_identity(3, 3).unwrap();
        let ml = exact_max_leakage(&identity, &full(&identity)).unwrap();
        assert!((ml - 10f64.ln()).abs() < 1e-12);
        let rr = make_randomized_response(2, 2, 0.5).unwrap();
        assert!((exact_max_leakage(&rr, &full(&rr)).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert!(matches!(
            exact_max_leakage(&rr, &[false, false, false]),
            Err(Error::EmptySupport)
        ));
    }

    #[test]
    fn max_leakage_depends_only_on_support() {
        let mech = make_exponential_mechanism(3, 2, 0.7).unwrap();
        let a = SourceDistribution::new(vec![0.1, 0.9]).unwrap();
        let b = SourceDistribution::new(vec![0.6, 0.4]).unwrap();
        let ma = support_mask(mech.space(), &a).unwrap();
        let mb = support_mask(mech.space(), &b).unwrap();
        assert_eq!(ma, mb);
        let point = SourceDistribution::new(vec![0.0, 1.0]).unwrap();
        let mp = support_mask(mech.space(), &point).unwrap();
        assert_eq!(mp.iter().filter(|&&x| x).count(), 1);
        assert!(exact_max_leakage(&mech, &mp).unwrap().abs() < 1e-12);
    }

    #[test]
    fn sum_cover_examples() {
        let same = vec![vec![0.2, 0.8]; 3];
        let (v, eq) = sum_cover(&same);
        assert!((v - 1.0).abs() < 1e-15);
        assert!(!eq);
        let disjoint = vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.5, 0.5]];
        assert_eq!(sum_cover(&disjoint), (2.0, true));
        assert_eq!(sum_cover(&[vec![0.5, 0.5], vec![1.0, 0.0]]), (1.5, false));
        assert_eq!(sum_cover(&[vec![0.25, 0.75]]), (1.0, true));
    }

    #[test]
    fn lemma1_examples() {
        let p = vec![0.2, 0.5, 0.3];
        let q = vec![0.4, 0.4, 0.2];
        let single = mixture_kl_bound_lemma1(&p, std::slice::from_ref(&q), &[1.0]).unwrap();
        let kl = exact_kl(&p, &q).unwrap();
        assert!((single.soft - kl).abs() < 1e-14);
        assert!((single.hard - kl).abs() < 1e-14);
        let two = mixture_kl_bound_lemma1(&p, &[q, p.clone()], &[0.7, 0.3]).unwrap();
        assert!(two.soft <= -(0.3f64.ln()) + 1e-15);
        assert!(two.soft <= two.hard);
        assert!(mixture_kl_bound_lemma1(&p, std::slice::from_ref(&p), &[0.5]).is_err());
    }

    #[test]
    fn lemma2_examples() {
        let p = vec![0.2, 0.5, 0.3];
        let q = vec![0.4, 0.4, 0.2];
        let one = MixtureSpec::new(vec![1.0], vec![1.0], 0).unwrap();
        let v = mixture_kl_bound_lemma2(&p, std::slice::from_ref(&q), &one).unwrap();
        assert!((v - exact_kl(&p, &q).unwrap()).abs() < 1e-15);

        // Uniform weights, common overlap α0 against the anchor.
        let anchor = vec![0.5, 0.3, 0.2];
        let a0 = 0.6;
        let comps = vec![
            anchor.clone(),
            vec![0.5 * a0, 0.3 * a0 + (1.0 - a0), 0.2 * a0],
            vec![0.5 * a0, 0.3 * a0, 0.2 * a0 + (1.0 - a0)],
        ];
        let spec = MixtureSpec::uniform(vec![1.0, a0, a0], 0).unwrap();
        let got = mixture_kl_bound_lemma2(&p, &comps, &spec).unwrap();
        let expected = exact_kl(&p, &anchor).unwrap() - (a0 + (1.0 - a0) / 3.0).ln();
        assert!((got - expected).abs() < 1e-14);
        let mix = mixture(&comps, &spec.weights).unwrap();
        assert!(exact_kl(&p, &mix).unwrap() <= got);

        let too_big = MixtureSpec::uniform(vec![1.0, 0.9, a0], 0).unwrap();
        assert!(matches!(
            mixture_kl_bound_lemma2(&p, &comps, &too_big),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn mixture_spec_validation() {
        assert!(MixtureSpec::new(vec![0.5, 0.5], vec![0.5, 1.0], 0).is_err());
        assert!(MixtureSpec::new(vec![0.5, 0.4], vec![1.0, 1.0], 0).is_err());
        assert!(MixtureSpec::new(vec![0.5, 0.5], vec![1.0, 1.5], 0).is_err());
        assert!(MixtureSpec::new(vec![1.0], vec![1.0], 1).is_err());
    }

    #[test]
    fn overlap_constant_of_dp_rows() {
        let mech = make_exponential_mechanism(4, 2, 0.8).unwrap();
        let eps = audit_epsilon(&mech).epsilon;
        let types = mech.space().types();
        for (b, tb) in types.iter().enumerate() {
            for (i, ti) in types.iter().enumerate() {
                let d = dataset_distance(tb, ti).unwrap() as f64;
                let alpha = largest_overlap_constant(mech.row(b), mech.row(i)).unwrap();
                assert!(alpha >= (-eps * d).exp() * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn json_round_trip_and_validation() {
        let mech = make_randomized_response(2, 2, 0.5).unwrap();
        let json = mech.to_json().unwrap();
        let back = MechanismTable::from_json(&json).unwrap();
        assert_eq!(back.rows(), mech.rows());
        assert_eq!(back.labels(), mech.labels());

        let bad = r#"{"n":2,"m":2,"labels":["a","b"],"rows":[[0.5,0.5],[0.5,0.4],[1.0,0.0]]}"#;
        let err = MechanismTable::from_json(bad).unwrap_err().to_string();
        assert!(err.contains("row 1"), "{err}");
        let short = r#"{"n":2,"m":2,"labels":["a"],"rows":[[1.0],[1.0]]}"#;
        assert!(MechanismTable::from_json(short).is_err());
    }

    #[test]
    fn family_parsing() {
        assert_eq!(
            MechanismFamily::from_name("rr", Some(0.5)).unwrap(),
            MechanismFamily::RandomizedResponse(0.5)
        );
        assert!(MechanismFamily::from_name("rr", None).is_err());
        assert!(MechanismFamily::from_name("laplace", Some(1.0)).is_err());
        assert_eq!(
            MechanismFamily::from_name("constant", None).unwrap(),
            MechanismFamily::Constant
        );
    }
}
