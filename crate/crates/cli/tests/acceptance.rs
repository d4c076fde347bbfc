//! End-to-end acceptance criteria. Prints one PASS/FAIL line per criterion
//! and exits nonzero if any fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use genbound::bounds::{bound_thm1, evaluate, gen_avg_bound, gen_tail_bound, BoundFamily, BoundQuery};
use genbound::experiments::{log_grid, run_monte_carlo, sweep_figure, ExperimentConfig, FigurePreset, SweepConfig};
use genbound::mechanisms::{
    audit_epsilon, exact_kl, exact_max_leakage, exact_mutual_information, group_privacy_kl_bound,
    largest_overlap_constant, mixture, mixture_kl_bound_lemma1, mixture_kl_bound_lemma2, support_mask, MechanismFamily,
    MechanismTable, MixtureSpec,
};
use genbound::repset::{build_grid, nearest_representative, neighbor_distance_check, GridVariant};
use genbound::typespace::{
    dataset_distance, enumerate_types, type_count_claim1_log, type_count_exact_log, SourceDistribution, TypeSpace,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, || {
        format!("took {:.2} s, limit {limit_s} s", elapsed.as_secs_f64())
    })
}

fn q(n: u64, m: usize, eps: f64) -> Result<BoundQuery, String> {
    BoundQuery::new(n, m, eps, 0.5).map_err(|e| e.to_string())
}

fn value(f: BoundFamily, query: &BoundQuery) -> Result<f64, String> {
    evaluate(f, query, None).map(|r| r.value).map_err(|e| e.to_string())
}

fn small_figure_ordering() -> Outcome {
    let start = Instant::now();
    let grid = log_grid(1e-2, 1.0, 25).map_err(|e| e.to_string())?;
    let mut largest_gap: f64 = 0.0;
    for &eps in &grid {
        let query = q(1000, 2, eps)?;
        let thm1 = value(BoundFamily::Thm1, &query)?;
        let eq9 = value(BoundFamily::Eq9, &query)?;
        let thm2 = value(BoundFamily::Thm2, &query)?;
        let thm3 = value(BoundFamily::Thm3, &query)?;
        ensure(thm1 <= eq9 + TOL, || format!("eps={eps}: thm1 {thm1} > eq9 {eq9}"))?;
        ensure(thm3 <= thm1.min(thm2) + TOL, || {
            format!("eps={eps}: thm3 {thm3} > min(thm1 {thm1}, thm2 {thm2})")
        })?;
        largest_gap = largest_gap.max(eq9 - thm1);
    }
    ensure(largest_gap > TOL, || "thm1 never strictly below eq9".into())?;
    within(start.elapsed(), 10.0)?;
    Ok(format!("25 points, largest eq9 - thm1 gap {largest_gap:.4} nats"))
}

fn large_figure_finite() -> Outcome {
    let start = Instant::now();
    let query = q(10_000_000, 1_000_000, 0.1)?;
    bound_thm1(&query).map_err(|e| e.to_string())?;
    let single = start.elapsed();
    within(single, 5.0)?;
    let rows = sweep_figure(&SweepConfig::preset(FigurePreset::Large)).map_err(|e| e.to_string())?;
    let mut cells = 0;
    for row in &rows {
        for c in &row.cells {
            let v = c
                .value
                .ok_or_else(|| format!("eps={}: {} missing", row.epsilon, c.family))?;
            ensure(v.is_finite(), || format!("eps={}: {} = {v}", row.epsilon, c.family))?;
            cells += 1;
        }
    }
    Ok(format!(
        "{cells} finite cells; single thm1 in {:.2} s",
        single.as_secs_f64()
    ))
}

fn dp_mechanisms() -> Vec<MechanismFamily> {
    let mut v = vec![MechanismFamily::Constant];
    v.extend([0.25, 0.5, 0.9].map(MechanismFamily::RandomizedResponse));
    v.extend([0.1, 0.5, 1.0].map(MechanismFamily::Exponential));
    v
}

fn dp_instances() -> Result<Vec<MechanismTable>, String> {
    let mut out = Vec::new();
    for n in 1..=6 {
        for m in [2, 3] {
            for f in dp_mechanisms() {
                out.push(f.build(n, m).map_err(|e| e.to_string())?);
            }
        }
    }
    Ok(out)
}

fn oracle_dominance() -> Outcome {
    let start = Instant::now();
    let mut comparisons = 0;
    for mech in dp_instances()? {
        let pz = SourceDistribution::uniform(mech.m());
        let mi = exact_mutual_information(&mech, &pz).map_err(|e| e.to_string())?;
        let mask = support_mask(mech.space(), &pz).map_err(|e| e.to_string())?;
        let ml = exact_max_leakage(&mech, &mask).map_err(|e| e.to_string())?;
        let tag = format!("n={} m={}", mech.n(), mech.m());
        ensure(ml + TOL >= mi, || format!("{tag}: ML {ml} < MI {mi}"))?;
        let budget = audit_epsilon(&mech);
        let query = BoundQuery::with_budget(mech.n(), mech.m(), budget, 0.5).map_err(|e| e.to_string())?;
        for f in BoundFamily::ALL {
            let Ok(r) = evaluate(f, &query, Some(mech.num_hypotheses() as u64)) else {
                continue;
            };
            let exact = if f.bounds_mutual_information() { mi } else { ml };
            ensure(exact <= r.value + TOL, || {
                format!("{tag} eps={}: {f} {} < exact {exact}", budget.epsilon, r.value)
            })?;
            comparisons += 1;
        }
    }
    within(start.elapsed(), 60.0)?;
    Ok(format!("{comparisons} bound comparisons over 84 mechanisms"))
}

fn binomial(n: u64, k: u64) -> u64 {
    (1..=k).fold(1u64, |acc, i| acc * (n - k + i) / i)
}

fn combinatorial_exactness() -> Outcome {
    let mut checked = 0;
    for m in 2..=4usize {
        for n in 0..=10u64 {
            let count = enumerate_types(n, m).map_err(|e| e.to_string())?.len() as u64;
            let expected = binomial(n + m as u64 - 1, m as u64 - 1);
            ensure(count == expected, || {
                format!("n={n} m={m}: {count} types, expected {expected}")
            })?;
            // At n = 0 both sides are 0 for every m, so the "iff" is read over n >= 1.
            if n >= 1 {
                let equal = type_count_exact_log(n, m) == type_count_claim1_log(n, m)
                    || (type_count_exact_log(n, m) - type_count_claim1_log(n, m)).abs() < 1e-12;
                ensure(equal == (m == 2), || format!("n={n} m={m}: equality {equal}"))?;
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} (n, m) pairs"))
}

fn covering_properties() -> Outcome {
    let start = Instant::now();
    let mut grids = 0;
    for n in 1..=12u64 {
        for m in [2usize, 3] {
            let space = TypeSpace::new(n, m).map_err(|e| e.to_string())?;
            for t in 1..=n {
                for variant in [GridVariant::FullCube, GridVariant::Simplex] {
                    let g = build_grid(n, m, t, variant, None).map_err(|e| e.to_string())?;
                    let limit = (m - 1) as f64 * n as f64 / t as f64;
                    for s in space.types() {
                        let near = nearest_representative(s, &g)
                            .map_err(|e| e.to_string())?
                            .ok_or_else(|| format!("n={n} m={m} t={t}: {:?} uncovered", s.counts()))?;
                        ensure(near.distance as f64 <= limit, || {
                            format!("n={n} m={m} t={t} {variant}: distance {} > {limit}", near.distance)
                        })?;
                    }
                    if t >= 2 {
                        let d = neighbor_distance_check(&g)
                            .ok_or_else(|| format!("n={n} m={m} t={t}: single representative"))?;
                        ensure(d <= g.delta_t, || {
                            format!("n={n} m={m} t={t} {variant}: neighbor {d} > {}", g.delta_t)
                        })?;
                    }
                    grids += 1;
                }
            }
        }
    }
    within(start.elapsed(), 30.0)?;
    Ok(format!("{grids} grids"))
}

fn random_pmf(rng: &mut ChaCha8Rng, width: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..width).map(|_| rng.random_range(0.01..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|x| x / s).collect()
}

/// KL to the mixture <= soft <= hard, KL <= overlap bound <= anchor term.
fn lemma_chain(p: &[f64], comps: &[Vec<f64>], weights: &[f64], anchor: usize) -> Result<(), String> {
    let err = |e: genbound::Error| e.to_string();
    let kl = exact_kl(p, &mixture(comps, weights).map_err(err)?).map_err(err)?;
    let l1 = mixture_kl_bound_lemma1(p, comps, weights).map_err(err)?;
    let alphas: Vec<f64> = comps
        .iter()
        .map(|c| largest_overlap_constant(c, &comps[anchor]))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    let l2 = mixture_kl_bound_lemma2(
        p,
        comps,
        &MixtureSpec::new(weights.to_vec(), alphas, anchor).map_err(err)?,
    )
    .map_err(err)?;
    let anchor_term = exact_kl(p, &comps[anchor]).map_err(err)? - weights[anchor].ln();
    ensure(kl <= l1.soft + TOL, || format!("KL {kl} > soft {}", l1.soft))?;
    ensure(l1.soft <= l1.hard + TOL, || {
        format!("soft {} > hard {}", l1.soft, l1.hard)
    })?;
    ensure(kl <= l2 + TOL, || format!("KL {kl} > overlap bound {l2}"))?;
    ensure(l2 <= anchor_term + TOL, || {
        format!("overlap bound {l2} > anchor term {anchor_term}")
    })
}

fn group_privacy_and_lemmas() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..100 {
        let width = rng.random_range(2..=6);
        let k = rng.random_range(1..=5);
        let p = random_pmf(&mut rng, width);
        let comps: Vec<Vec<f64>> = (0..k).map(|_| random_pmf(&mut rng, width)).collect();
        let weights = random_pmf(&mut rng, k);
        let anchor = rng.random_range(0..k);
        lemma_chain(&p, &comps, &weights, anchor).map_err(|e| format!("random instance {i}: {e}"))?;
    }
    let mut pairs = 0;
    for mech in dp_instances()? {
        let eps = audit_epsilon(&mech).epsilon;
        let space = mech.space();
        for i in 0..space.len() {
            for j in 0..space.len() {
                let k = dataset_distance(space.get(i), space.get(j)).map_err(|e| e.to_string())?;
                let (tight, loose) = group_privacy_kl_bound(k, eps);
                let kl = exact_kl(mech.row(i), mech.row(j)).map_err(|e| e.to_string())?;
                ensure(kl <= tight + TOL && tight <= loose + TOL, || {
                    format!(
                        "n={} m={} pair ({i},{j}): KL {kl}, bounds ({tight}, {loose})",
                        mech.n(),
                        mech.m()
                    )
                })?;
                pairs += 1;
            }
            // Each dataset against a uniform mixture of all rows, anchored at itself.
            let weights = vec![1.0 / space.len() as f64; space.len()];
            lemma_chain(mech.row(i), mech.rows(), &weights, i)
                .map_err(|e| format!("n={} m={} row {i}: {e}", mech.n(), mech.m()))?;
        }
    }
    Ok(format!("100 random mixtures, {pairs} DP dataset pairs"))
}

fn monte_carlo() -> Outcome {
    let start = Instant::now();
    let cfg = ExperimentConfig::new(50, 2, MechanismFamily::RandomizedResponse(0.5), 10_000, 1);
    let r = run_monte_carlo(&cfg).map_err(|e| e.to_string())?;
    let query = q(50, 2, r.audited_epsilon)?;
    let avg = gen_avg_bound(r.mutual_information, &query).map_err(|e| e.to_string())?;
    let tail = gen_tail_bound(r.maximal_leakage, &query, 0.3)
        .map_err(|e| e.to_string())?
        .min(1.0);
    ensure(r.mean_gen.abs() <= avg + 3.0 * r.mean_gen_se, || {
        format!("|mean gen| {} > {avg} + 3·{}", r.mean_gen.abs(), r.mean_gen_se)
    })?;
    ensure(r.tail_frequency <= tail + 3.0 * r.tail_frequency_se, || {
        format!(
            "tail frequency {} > {tail} + 3·{}",
            r.tail_frequency, r.tail_frequency_se
        )
    })?;
    within(start.elapsed(), 60.0)?;
    Ok(format!(
        "|mean gen| {:.5} <= {:.5}; tail {:.5} <= {:.5}",
        r.mean_gen.abs(),
        avg + 3.0 * r.mean_gen_se,
        r.tail_frequency,
        tail + 3.0 * r.tail_frequency_se
    ))
}

fn determinism() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_genbound"))
            .args(["verify", "--full", "--seed", "7"])
            .output()
            .map_err(|e| e.to_string())
    };
    let a = run()?;
    let b = run()?;
    ensure(a.status.success() && b.status.success(), || {
        format!("exit codes {:?} and {:?}", a.status.code(), b.status.code())
    })?;
    ensure(a.stdout == b.stdout, || "reports differ".into())?;
    Ok(format!("{} identical bytes, exit 0", a.stdout.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 small-alphabet figure ordering", small_figure_ordering),
        ("2 large-alphabet sweep finite", large_figure_finite),
        ("3 oracle dominance", oracle_dominance),
        ("4 combinatorial exactness", combinatorial_exactness),
        ("5 covering properties", covering_properties),
        ("6 group privacy and mixture lemmas", group_privacy_and_lemmas),
        ("7 Monte Carlo generalization", monte_carlo),
        ("8 verification determinism", determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        match run() {
            Ok(detail) => println!(
                "PASS criterion {name} ({:.2} s): {detail}",
                start.elapsed().as_secs_f64()
            ),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name} ({:.2} s): {why}", start.elapsed().as_secs_f64());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
