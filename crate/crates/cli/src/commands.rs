use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use genbound::bounds::{evaluate_with_fallback, BoundFamily, BoundQuery, BoundReport};
use genbound::experiments::{
    log_grid, run_monte_carlo, run_verification_battery, sweep_figure, write_sweep_csv, BatteryRanges,
    ExperimentConfig, FigurePreset, SweepCell, SweepConfig, SweepRow,
};
use genbound::mechanisms::{
    audit_epsilon, exact_max_leakage, exact_mutual_information, support_mask, MechanismFamily, MechanismTable,
};
use genbound::repset::{build_grid, GridVariant};
use genbound::typespace::SourceDistribution;
use genbound::Error;
use serde_json::{json, Value};

use crate::args::{AuditArgs, BoundArgs, Format, GenExpArgs, GridArgs, SweepArgs, VerifyArgs};
use crate::CliError;

/// Presentation settings shared by every subcommand.
pub struct Output {
    pub format: Option<Format>,
    pub bits: bool,
}

impl Output {
    fn scale(&self) -> f64 {
        if self.bits {
            std::f64::consts::LOG2_E
        } else {
            1.0
        }
    }

    fn unit(&self) -> &'static str {
        if self.bits {
            "bits"
        } else {
            "nats"
        }
    }
}

fn emit(target: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match target {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Lib(Error::Io(e))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|e| CliError::Lib(Error::Io(e)))?;
            out.flush().map_err(|e| CliError::Lib(Error::Io(e)))
        }
    }
}

fn json_text(v: &Value) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Lib(e.into()))?;
    s.push('\n');
    Ok(s)
}

fn number(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v > 0.0 {
        json!("infinity")
    } else {
        json!("-infinity")
    }
}

fn load_prior(spec: &str, m: usize) -> Result<SourceDistribution, CliError> {
    if spec == "uniform" {
        return Ok(SourceDistribution::uniform(m));
    }
    let text = std::fs::read_to_string(spec).map_err(|e| CliError::Lib(Error::Io(e)))?;
    let probs: Vec<f64> = serde_json::from_str(&text).map_err(|e| CliError::Lib(e.into()))?;
    let prior = SourceDistribution::new(probs)?;
    if prior.m() != m {
        return Err(Error::DimensionMismatch(format!("prior has {} symbols, alphabet has {m}", prior.m())).into());
    }
    Ok(prior)
}

fn report_json(r: &BoundReport, scale: f64) -> Value {
    let mut v = json!({
        "family": r.family.name(),
        "value": number(r.value * scale),
        "terms": r.terms.iter().map(|t| json!({"name": t.name, "value": number(t.value * scale)})).collect::<Vec<_>>(),
    });
    if let Some(t) = r.argmin_t {
        v["argmin_t"] = json!(t);
    }
    if let Some(d) = r.delta_t {
        v["delta_t"] = json!(d);
    }
    v
}

fn report_line(r: &BoundReport, out: &Output) -> String {
    let scale = out.scale();
    let mut line = format!("{:<12} {:>22} {}", r.family.name(), r.value * scale, out.unit());
    if let Some(t) = r.argmin_t {
        let _ = write!(line, "  t={t}");
    }
    if let Some(d) = r.delta_t {
        let _ = write!(line, "  delta_t={d}");
    }
    let terms: Vec<String> = r
        .terms
        .iter()
        .map(|t| format!("{}={}", t.name, t.value * scale))
        .collect();
    let _ = write!(line, "  [{}]", terms.join(", "));
    line
}

fn csv_text(rows: &[SweepRow]) -> Result<String, CliError> {
    let mut buf = Vec::new();
    write_sweep_csv(rows, 1.0, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
}

pub fn bound(a: &BoundArgs, out: &Output) -> Result<(), CliError> {
    let q = BoundQuery::new(a.n, a.m, a.eps, a.sigma)?;
    let families: Vec<BoundFamily> = if a.family.eq_ignore_ascii_case("all") {
        BoundFamily::ALL.to_vec()
    } else {
        vec![a.family.parse().map_err(|e: Error| CliError::Usage(e.to_string()))?]
    };
    let single = families.len() == 1;
    let mut reports = Vec::new();
    for f in families {
        match evaluate_with_fallback(f, &q, a.w_size) {
            Ok(r) => reports.push(r),
            Err(Error::Domain(msg)) if !single => eprintln!("{f}: skipped ({msg})"),
            Err(e) => return Err(e.into()),
        }
    }
    let text = match out.format.unwrap_or(Format::Human) {
        Format::Human => reports.iter().map(|r| report_line(r, out) + "\n").collect(),
        Format::Json => {
            let items: Vec<Value> = reports.iter().map(|r| report_json(r, out.scale())).collect();
            json_text(&if single { items[0].clone() } else { Value::Array(items) })?
        }
        Format::Csv => {
            warn_csv_units(out);
            let cells = reports
                .iter()
                .map(|r| SweepCell {
                    family: r.family,
                    value: Some(r.value),
                    argmin_t: r.argmin_t,
                    note: None,
                })
                .collect();
            csv_text(&[SweepRow { epsilon: a.eps, cells }])?
        }
    };
    emit(&a.out, &text)
}

fn warn_csv_units(out: &Output) {
    if out.bits {
        eprintln!("note: CSV values are always in nats");
    }
}

fn parse_eps_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || CliError::Usage(format!("--eps-grid expects lo:hi:points, got '{spec}'"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let points: usize = parts[2].trim().parse().map_err(|_| bad())?;
    Ok(log_grid(lo, hi, points)?)
}

pub fn sweep(a: &SweepArgs, out: &Output) -> Result<(), CliError> {
    let mut cfg = match (&a.preset, a.n, a.m) {
        (Some(p), _, _) => SweepConfig::preset(p.parse::<FigurePreset>().map_err(|e| CliError::Usage(e.to_string()))?),
        (None, Some(n), Some(m)) => SweepConfig::new(
            n,
            m,
            genbound::experiments::default_epsilon_grid(),
            BoundFamily::FIGURE.to_vec(),
        ),
        _ => SweepConfig::preset(FigurePreset::Small),
    };
    cfg.sigma = a.sigma;
    if let Some(spec) = &a.eps_grid {
        cfg.epsilons = parse_eps_grid(spec)?;
    }
    if let Some(names) = &a.families {
        cfg.families = names
            .iter()
            .map(|s| s.parse::<BoundFamily>().map_err(|e| CliError::Usage(e.to_string())))
            .collect::<Result<_, _>>()?;
    }
    // Fail on an unwritable target before the computation starts.
    if let Some(path) = &a.out {
        check_writable(path)?;
    }
    let rows = sweep_figure(&cfg)?;
    let text = match out.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            warn_csv_units(out);
            csv_text(&rows)?
        }
        Format::Json => {
            let items: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "epsilon": r.epsilon,
                        "bounds": r.cells.iter().map(|c| json!({
                            "family": c.family.name(),
                            "value": c.value.map(|v| number(v * out.scale())),
                            "argmin_t": c.argmin_t,
                        })).collect::<Vec<_>>(),
                    })
                })
                .collect();
            json_text(&json!({"n": cfg.n, "m": cfg.m, "unit": out.unit(), "rows": items}))?
        }
        Format::Human => {
            let mut s = format!("{:>24}", "epsilon");
            for f in &cfg.families {
                let _ = write!(s, " {:>22}", f.name());
            }
            s.push('\n');
            for r in &rows {
                let _ = write!(s, "{:>24}", r.epsilon);
                for c in &r.cells {
                    match c.value {
                        Some(v) => {
                            let _ = write!(s, " {:>22}", v * out.scale());
                        }
                        None => {
                            let _ = write!(s, " {:>22}", "-");
                        }
                    }
                }
                s.push('\n');
            }
            s
        }
    };
    emit(&a.out, &text)
}

fn check_writable(path: &Path) -> Result<(), CliError> {
    std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map(|_| ())
        .map_err(|e| CliError::Lib(Error::Io(e)))
}

pub fn audit(a: &AuditArgs, out: &Output) -> Result<(), CliError> {
    let mech = MechanismTable::load(&a.mechanism)?;
    let prior = load_prior(&a.prior, mech.m())?;
    let budget = audit_epsilon(&mech);
    let mi = exact_mutual_information(&mech, &prior)?;
    let ml = exact_max_leakage(&mech, &support_mask(mech.space(), &prior)?)?;
    let q = BoundQuery::with_budget(mech.n(), mech.m(), budget, a.sigma)?;
    let w_size = mech.num_hypotheses() as u64;
    let mut bounds = Vec::new();
    for f in BoundFamily::ALL {
        if let Ok(r) = evaluate_with_fallback(f, &q, Some(w_size)) {
            let exact = if f.bounds_mutual_information() { mi } else { ml };
            bounds.push((r, exact));
        }
    }
    let scale = out.scale();
    let text = match out.format.unwrap_or(Format::Human) {
        Format::Json => json_text(&json!({
            "n": mech.n(),
            "m": mech.m(),
            "hypotheses": w_size,
            "epsilon": number(budget.epsilon),
            "mutual_information": mi * scale,
            "maximal_leakage": ml * scale,
            "unit": out.unit(),
            "bounds": bounds.iter().map(|(r, exact)| json!({
                "family": r.family.name(),
                "bounds": if r.family.bounds_mutual_information() { "mutual_information" } else { "maximal_leakage" },
                "value": number(r.value * scale),
                "argmin_t": r.argmin_t,
                "slack": number((r.value - exact) * scale),
            })).collect::<Vec<_>>(),
        }))?,
        _ => {
            let mut s = String::new();
            let _ = writeln!(s, "mechanism: n={} m={} hypotheses={}", mech.n(), mech.m(), w_size);
            let _ = writeln!(s, "epsilon: {budget}");
            let _ = writeln!(s, "mutual_information: {} {}", mi * scale, out.unit());
            let _ = writeln!(s, "maximal_leakage: {} {}", ml * scale, out.unit());
            for (r, exact) in &bounds {
                let _ = writeln!(s, "{}  slack={}", report_line(r, out), (r.value - exact) * scale);
            }
            s
        }
    };
    emit(&a.out, &text)
}

pub fn grid(a: &GridArgs, out: &Output) -> Result<(), CliError> {
    let variant: GridVariant = a.variant.parse().map_err(|e: Error| CliError::Usage(e.to_string()))?;
    let prior = if variant == GridVariant::Typical {
        Some(load_prior(&a.prior, a.m)?)
    } else {
        None
    };
    let g = build_grid(a.n, a.m, a.t, variant, prior.as_ref())?;
    let text = match out.format.unwrap_or(Format::Json) {
        Format::Human => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "variant: {}  t={}  delta_t={}  M={}",
                g.variant, g.t, g.delta_t, g.raw_cell_count
            );
            let _ = writeln!(s, "representatives: {}", g.representatives.len());
            for r in &g.representatives {
                let _ = writeln!(s, "  {:?}", r.counts());
            }
            s
        }
        _ => {
            let mut s = g.to_json()?;
            s.push('\n');
            s
        }
    };
    emit(&a.out, &text)
}

pub fn verify(a: &VerifyArgs, out: &Output) -> Result<(), CliError> {
    let mut ranges = if a.full {
        BatteryRanges::full(a.seed)
    } else {
        BatteryRanges::quick(a.seed)
    };
    if let Some(tol) = a.tolerance {
        ranges.tolerance = tol;
    }
    let extra: Vec<MechanismTable> = a.mechanism.iter().map(MechanismTable::load).collect::<Result<_, _>>()?;
    let report = run_verification_battery(&ranges, &extra)?;
    let text = match out.format.unwrap_or(Format::Human) {
        Format::Json => json_text(&serde_json::to_value(&report).map_err(|e| CliError::Lib(e.into()))?)?,
        _ => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "profile: {}  seed: {}  tolerance: {:e}",
                ranges.profile, ranges.seed, ranges.tolerance
            );
            for c in &report.checks {
                let status = match (c.passed, c.asserted) {
                    (true, _) => "PASS",
                    (false, true) => "FAIL",
                    (false, false) => "INFO",
                };
                let _ = writeln!(
                    s,
                    "{status} {:<52} instances={:<7} failures={:<5} worst_slack={:e}",
                    c.name, c.instances, c.failures, c.worst_slack
                );
            }
            let _ = writeln!(s, "failures: {}", report.failures);
            s
        }
    };
    emit(&a.out, &text)?;
    if report.failures > 0 {
        return Err(CliError::Failures(report.failures));
    }
    Ok(())
}

pub fn gen_exp(a: &GenExpArgs, out: &Output) -> Result<(), CliError> {
    let family = MechanismFamily::from_name(&a.mechanism_family, a.param)?;
    let prior = load_prior(&a.prior, a.m)?;
    let cfg = ExperimentConfig {
        prior: prior.probs().to_vec(),
        eta: a.eta,
        ..ExperimentConfig::new(a.n, a.m, family, a.trials, a.seed)
    };
    let report = run_monte_carlo(&cfg)?;
    let text = match out.format.unwrap_or(Format::Json) {
        Format::Human => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "mechanism: {family}  n={} m={} trials={} seed={}",
                a.n, a.m, a.trials, a.seed
            );
            let _ = writeln!(s, "mean_gen: {} (se {})", report.mean_gen, report.mean_gen_se);
            let _ = writeln!(
                s,
                "tail_frequency: {} (se {})",
                report.tail_frequency, report.tail_frequency_se
            );
            for c in &report.checks {
                let status = if c.passed {
                    "PASS"
                } else if c.asserted {
                    "FAIL"
                } else {
                    "INFO"
                };
                let _ = writeln!(s, "{status} {} observed={} limit={}", c.name, c.observed, c.limit);
            }
            s
        }
        _ => json_text(&serde_json::to_value(&report).map_err(|e| CliError::Lib(e.into()))?)?,
    };
    emit(&a.out, &text)?;
    let failed = report.checks.iter().filter(|c| c.asserted && !c.passed).count() as u64;
    if failed > 0 {
        return Err(CliError::Failures(failed));
    }
    Ok(())
}
