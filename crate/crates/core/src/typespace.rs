//! Method-of-types combinatorics over a finite alphabet.
//!
//! A dataset of `n` i.i.d. samples from an alphabet of `m` symbols is reduced
//! to its type: the vector of per-symbol counts. Permutation-invariant
//! algorithms only see this vector, so every exact oracle in the crate works on
//! the type space instead of on ordered sequences.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::numeric::{ln_factorial, log_binomial_stars};
use crate::{Error, Result};

/// Default ceiling on the number of types any enumeration may produce.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

/// Per-symbol occurrence counts of a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct CountVector {
    counts: Vec<u64>,
    n: u64,
}

impl CountVector {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::Validation(format!(
                "alphabet size must be at least 2, got {}",
                counts.len()
            )));
        }
        let n = counts.iter().sum();
        Ok(Self { counts, n })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Alphabet size.
    pub fn m(&self) -> usize {
        self.counts.len()
    }

    /// Relative frequencies `counts / n`; all zeros for the empty dataset.
    pub fn frequencies(&self) -> Vec<f64> {
        if self.n == 0 {
            return vec![0.0; self.m()];
        }
        let n = self.n as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }
}

impl TryFrom<Vec<u64>> for CountVector {
    type Error = Error;

    fn try_from(counts: Vec<u64>) -> Result<Self> {
        Self::new(counts)
    }
}

impl From<CountVector> for Vec<u64> {
    fn from(v: CountVector) -> Self {
        v.counts
    }
}

/// Source distribution `P_Z` over the alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceDistribution {
    probs: Vec<f64>,
}

impl SourceDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::Validation("source distribution needs at least 2 symbols".into()));
        }
        if let Some((i, p)) = probs.iter().enumerate().find(|(_, &p)| !(0.0..=1.0).contains(&p)) {
            return Err(Error::Validation(format!(
                "probability {p} at symbol {i} is outside [0,1]"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Validation(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { probs })
    }

    pub fn uniform(m: usize) -> Self {
        Self {
            probs: vec![1.0 / m as f64; m],
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn m(&self) -> usize {
        self.probs.len()
    }
}

/// Width of the strongly typical set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypicalSetSpec {
    pub eta: f64,
    pub n: u64,
}

impl TypicalSetSpec {
    pub fn new(eta: f64, n: u64) -> Result<Self> {
        if !(eta >= 0.0) {
            return Err(Error::Domain(format!(
                "typicality width must be non-negative, got {eta}"
            )));
        }
        Ok(Self { eta, n })
    }

    /// `eta = sqrt(log(n) / n)`.
    pub fn default_for(n: u64) -> Self {
        let eta = if n == 0 {
            0.0
        } else {
            ((n as f64).ln() / n as f64).sqrt()
        };
        Self { eta, n }
    }
}

fn check_alphabet(m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::Domain(format!("alphabet size must be at least 2, got {m}")));
    }
    Ok(())
}

/// All types of `n` samples over `m` symbols, lexicographically ordered, with
/// the default enumeration cap.
pub fn enumerate_types(n: u64, m: usize) -> Result<Vec<CountVector>> {
    enumerate_types_capped(n, m, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_types_capped(n: u64, m: usize, cap: u64) -> Result<Vec<CountVector>> {
    check_alphabet(m)?;
    let size = type_count_exact_log(n, m).exp();
    if size > cap as f64 + 0.5 {
        return Err(Error::Capacity { size, limit: cap });
    }
    let mut out = Vec::with_capacity(size.round() as usize);
    let mut counts = vec![0u64; m];
    counts[m - 1] = n;
    loop {
        out.push(CountVector {
            counts: counts.clone(),
            n,
        });
        // Rightmost free coordinate whose increment keeps the prefix within n.
        let mut prefix: u64 = counts[..m - 1].iter().sum();
        let mut advanced = false;
        for i in (0..m - 1).rev() {
            if prefix < n {
                counts[i] += 1;
                for c in &mut counts[i + 1..m - 1] {
                    *c = 0;
                }
                let head: u64 = counts[..m - 1].iter().sum();
                counts[m - 1] = n - head;
                advanced = true;
                break;
            }
            prefix -= counts[i];
        }
        if !advanced {
            break;
        }
    }
    Ok(out)
}

/// Enumerated type space with a type-to-index lookup.
#[derive(Debug, Clone)]
pub struct TypeSpace {
    n: u64,
    m: usize,
    types: Vec<CountVector>,
    index: HashMap<Vec<u64>, usize>,
}

impl TypeSpace {
    pub fn new(n: u64, m: usize) -> Result<Self> {
        Self::with_cap(n, m, DEFAULT_ENUMERATION_CAP)
    }

    pub fn with_cap(n: u64, m: usize, cap: u64) -> Result<Self> {
        let types = enumerate_types_capped(n, m, cap)?;
        let index = types.iter().enumerate().map(|(i, t)| (t.counts.clone(), i)).collect();
        Ok(Self { n, m, types, index })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn types(&self) -> &[CountVector] {
        &self.types
    }

    pub fn get(&self, i: usize) -> &CountVector {
        &self.types[i]
    }

    /// Position of `t` in the canonical order.
    pub fn rank(&self, t: &CountVector) -> Option<usize> {
        self.index.get(&t.counts).copied()
    }

    /// Indices of the types at dataset distance exactly 1 from type `i`.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        let counts = self.types[i].counts();
        let mut out = Vec::new();
        let mut moved = counts.to_vec();
        for from in 0..self.m {
            if counts[from] == 0 {
                continue;
            }
            for to in 0..self.m {
                if to == from {
                    continue;
                }
                moved[from] -= 1;
                moved[to] += 1;
                if let Some(&j) = self.index.get(&moved) {
                    out.push(j);
                }
                moved[from] += 1;
                moved[to] -= 1;
            }
        }
        out.sort_unstable();
        out
    }
}

/// `log C(n+m-1, m-1)`, the exact number of types.
pub fn type_count_exact_log(n: u64, m: usize) -> f64 {
    log_binomial_stars(n, m as u64 - 1)
}

/// `(m-1) log(n+1)`.
pub fn type_count_claim1_log(n: u64, m: usize) -> f64 {
    (m as f64 - 1.0) * (n as f64).ln_1p()
}

/// Log of `(2πk)^{-1/2} ((e/k)(n + (k+1)/2))^k` with `k = m-1`: the AM-GM plus
/// Stirling upper bound on the number of types.
pub fn type_count_claim2_log(n: u64, m: usize) -> f64 {
    let k = m as f64 - 1.0;
    let n = n as f64;
    k * (1.0 + ((n + (k + 1.0) / 2.0) / k).ln()) - 0.5 * (2.0 * std::f64::consts::PI * k).ln()
}

/// Minimum number of sample replacements turning one dataset into the other.
pub fn dataset_distance(a: &CountVector, b: &CountVector) -> Result<u64> {
    if a.n != b.n || a.m() != b.m() {
        return Err(Error::DimensionMismatch(format!(
            "datasets (n={}, m={}) and (n={}, m={})",
            a.n,
            a.m(),
            b.n,
            b.m()
        )));
    }
    Ok(l1_counts(a.counts(), b.counts()) / 2)
}

pub(crate) fn l1_counts(a: &[u64], b: &[u64]) -> u64 {
    a.iter().zip(b).map(|(&x, &y)| x.abs_diff(y)).sum()
}

/// Multinomial log-mass of observing type `t` under i.i.d. sampling from `pz`.
pub fn type_log_probability(t: &CountVector, pz: &SourceDistribution) -> Result<f64> {
    if t.m() != pz.m() {
        return Err(Error::DimensionMismatch(format!(
            "type has {} symbols, distribution has {}",
            t.m(),
            pz.m()
        )));
    }
    let mut lp = ln_factorial(t.n);
    for (&c, &p) in t.counts.iter().zip(pz.probs()) {
        if c == 0 {
            continue;
        }
        if p == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        lp += c as f64 * p.ln() - ln_factorial(c);
    }
    Ok(lp)
}

pub fn is_strongly_typical(t: &CountVector, pz: &SourceDistribution, spec: &TypicalSetSpec) -> Result<bool> {
    if t.m() != pz.m() {
        return Err(Error::DimensionMismatch(format!(
            "type has {} symbols, distribution has {}",
            t.m(),
            pz.m()
        )));
    }
    let freqs = t.frequencies();
    Ok(t.counts.iter().zip(&freqs).zip(pz.probs()).all(
        |((&c, &f), &p)| {
            if p > 0.0 {
                (f - p).abs() <= spec.eta
            } else {
                c == 0
            }
        },
    ))
}

/// Union-bound plus Hoeffding ceiling on the probability of an atypical
/// dataset, `min(1, 2m exp(-2 n eta^2))`.
pub fn atypical_mass_bound(n: u64, m: usize, eta: f64) -> f64 {
    (2.0 * m as f64 * (-2.0 * n as f64 * eta * eta).exp()).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cv(c: &[u64]) -> CountVector {
        CountVector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn enumerates_binary_simplex_in_order() {
        let ts = enumerate_types(2, 2).unwrap();
        assert_eq!(ts, vec![cv(&[0, 2]), cv(&[1, 1]), cv(&[2, 0])]);
    }

    #[test]
    fn enumeration_sizes() {
        assert_eq!(enumerate_types(4, 3).unwrap().len(), 15);
        assert_eq!(enumerate_types(5, 2).unwrap().len(), 6);
        assert_eq!(enumerate_types(0, 4).unwrap(), vec![cv(&[0, 0, 0, 0])]);
    }

    #[test]
    fn enumeration_is_strictly_increasing() {
        let ts = enumerate_types(5, 4).unwrap();
        assert!(ts.windows(2).all(|w| w[0].counts() < w[1].counts()));
        assert!(ts.iter().all(|t| t.n() == 5));
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let err = enumerate_types_capped(10, 4, 100).unwrap_err();
        assert!(matches!(err, Error::Capacity { .. }));
        assert!(enumerate_types_capped(10, 4, 286).is_ok());
    }

    #[test]
    fn rejects_unary_alphabet() {
        assert!(enumerate_types(3, 1).is_err());
        assert!(CountVector::new(vec![3]).is_err());
    }

    #[test]
    fn exact_count_examples() {
        assert!((type_count_exact_log(4, 3) - 15f64.ln()).abs() < 1e-14);
        assert_eq!(type_count_exact_log(0, 5), 0.0);
        assert!((type_count_exact_log(5, 2) - 6f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn claim1_examples() {
        assert!((type_count_claim1_log(5, 2) - type_count_exact_log(5, 2)).abs() < 1e-14);
        assert!((type_count_claim1_log(10, 3) - 121f64.ln()).abs() < 1e-13);
        assert!(type_count_claim1_log(10, 3) > 66f64.ln());
        assert_eq!(type_count_claim1_log(0, 2), 0.0);
    }

    #[test]
    fn claim2_examples() {
        // Values frozen from a 40-digit evaluation.
        let v = type_count_claim2_log(10, 3);
        assert!((v - 68.915_945_864_002_5f64.ln()).abs() < 1e-12);
        assert!(v > 66f64.ln() && v < 121f64.ln());
        assert!((type_count_claim2_log(1, 2) - 2.168_875_102_838_455f64.ln()).abs() < 1e-12);
        assert!((type_count_claim2_log(5, 2) - 6.506_625_308_515_365f64.ln()).abs() < 1e-12);
        // At a binary alphabet the refinement is looser than (n+1).
        assert!(type_count_claim2_log(5, 2) > type_count_claim1_log(5, 2));
    }

    #[test]
    fn distance_examples() {
        assert_eq!(dataset_distance(&cv(&[2, 1]), &cv(&[1, 2])).unwrap(), 1);
        assert_eq!(dataset_distance(&cv(&[2, 1]), &cv(&[2, 1])).unwrap(), 0);
        assert_eq!(dataset_distance(&cv(&[3, 0, 0]), &cv(&[0, 0, 3])).unwrap(), 3);
        assert!(matches!(
            dataset_distance(&cv(&[3, 0]), &cv(&[1, 1])),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(dataset_distance(&cv(&[1, 1]), &cv(&[1, 1, 0])).is_err());
    }

    #[test]
    fn log_probability_examples() {
        let point = SourceDistribution::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(type_log_probability(&cv(&[2, 0]), &point).unwrap(), 0.0);
        assert_eq!(type_log_probability(&cv(&[0, 2]), &point).unwrap(), f64::NEG_INFINITY);
        let fair = SourceDistribution::uniform(2);
        let lp = type_log_probability(&cv(&[1, 1]), &fair).unwrap();
        assert!((lp - 0.5f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn typicality_examples() {
        let fair = SourceDistribution::uniform(2);
        let spec = TypicalSetSpec::new(0.25, 4).unwrap();
        assert!(!is_strongly_typical(&cv(&[4, 0]), &fair, &spec).unwrap());
        assert!(is_strongly_typical(&cv(&[2, 2]), &fair, &TypicalSetSpec::new(0.0, 4).unwrap()).unwrap());
        let skew = SourceDistribution::new(vec![1.0, 0.0]).unwrap();
        let wide = TypicalSetSpec::new(10.0, 4).unwrap();
        assert!(!is_strongly_typical(&cv(&[3, 1]), &skew, &wide).unwrap());
        assert!(is_strongly_typical(&cv(&[4, 0]), &skew, &wide).unwrap());
        assert!(TypicalSetSpec::new(-0.1, 4).is_err());
    }

    #[test]
    fn atypical_bound_examples() {
        assert_eq!(atypical_mass_bound(100, 2, 0.0), 1.0);
        let eta = TypicalSetSpec::default_for(100).eta;
        assert!((atypical_mass_bound(100, 2, eta) - 4e-4).abs() < 1e-15);
        let mut prev = 1.0;
        for n in [10u64, 100, 1000, 10000] {
            let b = atypical_mass_bound(n, 3, 0.2);
            assert!(b <= prev);
            prev = b;
        }
        assert!(prev < 1e-100);
    }

    #[test]
    fn neighbors_are_at_distance_one() {
        let space = TypeSpace::new(4, 3).unwrap();
        for i in 0..space.len() {
            let nb = space.neighbors(i);
            for j in 0..space.len() {
                let d = dataset_distance(space.get(i), space.get(j)).unwrap();
                assert_eq!(d == 1, nb.contains(&j));
            }
        }
        assert_eq!(space.rank(&cv(&[0, 0, 4])), Some(0));
        assert_eq!(space.rank(&cv(&[4, 0, 0])), Some(14));
    }

    #[test]
    fn count_vector_serde_is_a_plain_array() {
        let t = cv(&[1, 2, 3]);
        assert_eq!(serde_json::to_string(&t).unwrap(), "[1,2,3]");
        let back: CountVector = serde_json::from_str("[1,2,3]").unwrap();
        assert_eq!(back, t);
        assert_eq!(back.n(), 6);
    }
}
