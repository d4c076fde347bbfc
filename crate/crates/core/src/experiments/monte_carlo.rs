use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{evaluate_with_fallback, gen_avg_bound, gen_tail_bound, BoundFamily, BoundQuery};
use crate::mechanisms::{
    audit_epsilon, exact_max_leakage, exact_mutual_information, support_mask, MechanismFamily, MechanismTable,
};
use crate::numeric::extended_f64;
use crate::typespace::{CountVector, SourceDistribution};
use crate::{Error, Result};

/// Sub-Gaussian constant of the bounded loss `1 - w(z)`, which lies in `[0, 1]`.
pub const LOSS_SIGMA: f64 = 0.5;

/// Absolute slack allowed in every comparison, for floating-point rounding.
pub const CHECK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: u64,
    pub m: usize,
    pub mechanism: MechanismFamily,
    pub prior: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub eta: f64,
}

impl ExperimentConfig {
    /// Uniform prior, `η = 0.3`.
    pub fn new(n: u64, m: usize, mechanism: MechanismFamily, trials: u64, seed: u64) -> Self {
        Self {
            n,
            m,
            mechanism,
            prior: vec![1.0 / m as f64; m],
            trials,
            seed,
            eta: 0.3,
        }
    }
}

/// Empirical quantity compared against a theoretical ceiling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationCheck {
    pub name: String,
    #[serde(with = "extended_f64")]
    pub observed: f64,
    #[serde(with = "extended_f64")]
    pub limit: f64,
    /// Failures of informational checks do not fail the experiment.
    pub asserted: bool,
    pub passed: bool,
}

impl GenerationCheck {
    fn new(name: &str, observed: f64, limit: f64, asserted: bool) -> Self {
        Self {
            name: name.into(),
            observed,
            limit,
            asserted,
            passed: observed <= limit + CHECK_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationReport {
    pub config: ExperimentConfig,
    pub sigma: f64,
    #[serde(with = "extended_f64")]
    pub audited_epsilon: f64,
    pub mutual_information: f64,
    pub maximal_leakage: f64,
    /// Tightest applicable mutual-information bound at the audited ε.
    #[serde(with = "extended_f64")]
    pub mi_bound: f64,
    /// Tightest applicable maximal-leakage bound at the audited ε.
    #[serde(with = "extended_f64")]
    pub ml_bound: f64,
    pub mean_gen: f64,
    pub mean_gen_se: f64,
    pub mean_abs_gen: f64,
    pub mean_abs_gen_se: f64,
    pub tail_frequency: f64,
    pub tail_frequency_se: f64,
    pub gen_avg_bound: f64,
    #[serde(with = "extended_f64")]
    pub gen_avg_bound_from_mi_bound: f64,
    /// Unclamped `2 exp(L - nη²/(2σ²))` at the exact leakage.
    pub tail_bound: f64,
    pub checks: Vec<GenerationCheck>,
    pub passed: bool,
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// Generalization error of releasing `w` on a dataset of type `s`, for the loss
/// `1 - w(z)`: `Σ_z w(z) (T_s(z) - P(z))`.
fn generalization_error(w: &CountVector, s: &CountVector, prior: &[f64]) -> f64 {
    let wf = w.frequencies();
    let sf = s.frequencies();
    wf.iter().zip(&sf).zip(prior).map(|((a, b), p)| a * (b - p)).sum()
}

fn tightest(families: &[BoundFamily], q: &BoundQuery, w_size: u64) -> f64 {
    families
        .iter()
        .filter_map(|&f| evaluate_with_fallback(f, q, Some(w_size)).ok())
        .map(|r| r.value)
        .fold(f64::INFINITY, f64::min)
}

/// Samples datasets, runs the mechanism, and compares the empirical
/// generalization error with the bounds implied by the exact mutual
/// information and maximal leakage.
///
/// Trial `i` draws from its own ChaCha stream, so results do not depend on
/// the thread count.
pub fn run_monte_carlo(cfg: &ExperimentConfig) -> Result<GenerationReport> {
    if cfg.trials == 0 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    if !(cfg.eta > 0.0 && cfg.eta < 1.0) {
        return Err(Error::Domain(format!("eta must lie in (0,1), got {}", cfg.eta)));
    }
    let prior = SourceDistribution::new(cfg.prior.clone())?;
    if prior.m() != cfg.m {
        return Err(Error::DimensionMismatch(format!(
            "prior has {} symbols, m = {}",
            prior.m(),
            cfg.m
        )));
    }
    let mech = cfg.mechanism.build(cfg.n, cfg.m)?;
    run_with_table(cfg, &mech, &prior)
}

fn run_with_table(
    cfg: &ExperimentConfig,
    mech: &MechanismTable,
    prior: &SourceDistribution,
) -> Result<GenerationReport> {
    let space = mech.space();
    let symbol = WeightedIndex::new(prior.probs()).map_err(|e| Error::Domain(format!("prior: {e}")))?;
    let outputs: Vec<WeightedIndex<f64>> = mech
        .rows()
        .iter()
        .map(|r| WeightedIndex::new(r).map_err(|e| Error::Validation(format!("mechanism row: {e}"))))
        .collect::<Result<_>>()?;
    let gens: Vec<f64> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(trial);
            let mut counts = vec![0u64; cfg.m];
            for _ in 0..cfg.n {
                counts[symbol.sample(&mut rng)] += 1;
            }
            let s = CountVector::new(counts).expect("m >= 2");
            let i = space.rank(&s).expect("sampled type lies in the space");
            let w = outputs[i].sample(&mut rng);
            generalization_error(space.get(w), &s, prior.probs())
        })
        .collect();

    let abs: Vec<f64> = gens.iter().map(|g| g.abs()).collect();
    let (mean_gen, mean_gen_se) = mean_and_se(&gens);
    let (mean_abs_gen, mean_abs_gen_se) = mean_and_se(&abs);
    let hits: Vec<f64> = abs.iter().map(|&a| if a >= cfg.eta { 1.0 } else { 0.0 }).collect();
    let (tail_frequency, tail_frequency_se) = mean_and_se(&hits);

    let mi = exact_mutual_information(mech, prior)?;
    let ml = exact_max_leakage(mech, &support_mask(space, prior)?)?;
    let budget = audit_epsilon(mech);
    let q = BoundQuery::with_budget(cfg.n, cfg.m, budget, LOSS_SIGMA)?;
    let w_size = mech.num_hypotheses() as u64;
    let mi_families: Vec<BoundFamily> = BoundFamily::ALL
        .into_iter()
        .filter(|f| f.bounds_mutual_information())
        .collect();
    let ml_families: Vec<BoundFamily> = BoundFamily::ALL
        .into_iter()
        .filter(|f| !f.bounds_mutual_information())
        .collect();
    let mi_bound = tightest(&mi_families, &q, w_size);
    let ml_bound = tightest(&ml_families, &q, w_size);

    let gen_avg = gen_avg_bound(mi, &q)?;
    let gen_avg_from_bound = if mi_bound.is_finite() {
        gen_avg_bound(mi_bound, &q)?
    } else {
        f64::INFINITY
    };
    let tail_bound = gen_tail_bound(ml, &q, cfg.eta)?;

    let checks = vec![
        GenerationCheck::new(
            "mean_gen_within_mi_bound",
            mean_gen.abs(),
            gen_avg + 3.0 * mean_gen_se,
            true,
        ),
        GenerationCheck::new(
            "tail_frequency_within_ml_bound",
            tail_frequency,
            tail_bound.min(1.0) + 3.0 * tail_frequency_se,
            true,
        ),
        GenerationCheck::new("mutual_information_within_bound", mi, mi_bound, true),
        GenerationCheck::new("maximal_leakage_within_bound", ml, ml_bound, true),
        GenerationCheck::new(
            "mean_abs_gen_within_mi_bound",
            mean_abs_gen,
            gen_avg + 3.0 * mean_abs_gen_se,
            false,
        ),
    ];
    let passed = checks.iter().all(|c| c.passed || !c.asserted);
    Ok(GenerationReport {
        config: cfg.clone(),
        sigma: LOSS_SIGMA,
        audited_epsilon: budget.epsilon,
        mutual_information: mi,
        maximal_leakage: ml,
        mi_bound,
        ml_bound,
        mean_gen,
        mean_gen_se,
        mean_abs_gen,
        mean_abs_gen_se,
        tail_frequency,
        tail_frequency_se,
        gen_avg_bound: gen_avg,
        gen_avg_bound_from_mi_bound: gen_avg_from_bound,
        tail_bound,
        checks,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gen_error_of_matching_prior_is_zero() {
        let w = CountVector::new(vec![3, 1]).unwrap();
        let s = CountVector::new(vec![2, 2]).unwrap();
        assert_eq!(generalization_error(&w, &s, &[0.5, 0.5]), 0.0);
        let s = CountVector::new(vec![4, 0]).unwrap();
        assert!((generalization_error(&w, &s, &[0.5, 0.5]) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn reproducible_for_fixed_seed() {
        let cfg = ExperimentConfig::new(10, 2, MechanismFamily::RandomizedResponse(0.5), 500, 3);
        let a = run_monte_carlo(&cfg).unwrap();
        let b = run_monte_carlo(&cfg).unwrap();
        assert_eq!(a, b);
        let c = run_monte_carlo(&ExperimentConfig { seed: 4, ..cfg }).unwrap();
        assert_ne!(a.mean_gen, c.mean_gen);
    }

    #[test]
    fn constant_mechanism_has_zero_information() {
        let cfg = ExperimentConfig::new(8, 3, MechanismFamily::Constant, 200, 1);
        let r = run_monte_carlo(&cfg).unwrap();
        assert!(r.mutual_information < 1e-12);
        assert!(r.maximal_leakage < 1e-12);
        assert_eq!(r.audited_epsilon, 0.0);
        assert!(r.passed);
    }

    #[test]
    fn rejects_bad_configuration() {
        let mut cfg = ExperimentConfig::new(8, 2, MechanismFamily::Constant, 0, 1);
        assert!(run_monte_carlo(&cfg).is_err());
        cfg.trials = 10;
        cfg.eta = 1.5;
        assert!(run_monte_carlo(&cfg).is_err());
        cfg.eta = 0.3;
        cfg.prior = vec![0.2, 0.2, 0.6];
        assert!(run_monte_carlo(&cfg).is_err());
    }
}
