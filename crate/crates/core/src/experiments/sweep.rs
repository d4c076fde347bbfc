use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{evaluate_with_fallback, BoundFamily, BoundQuery};
use crate::{Error, Result};

pub const SWEEP_CSV_HEADER: [&str; 4] = ["epsilon", "family", "value_nats", "argmin_t"];

/// Named `(n, m)` settings of the bound-comparison figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigurePreset {
    /// `n = 10^3`, binary alphabet.
    Small,
    /// `n = 10^7`, `m = 10^6`.
    Large,
}

impl FigurePreset {
    pub fn size(self) -> (u64, usize) {
        match self {
            Self::Small => (1_000, 2),
            Self::Large => (10_000_000, 1_000_000),
        }
    }
}

impl FromStr for FigurePreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fig1" | "small" => Ok(Self::Small),
            "fig2" | "large" => Ok(Self::Large),
            _ => Err(Error::Domain(format!("unknown preset '{s}' (expected fig1 or fig2)"))),
        }
    }
}

/// `points` values log-spaced over `[lo, hi]`. A single point yields `[lo]`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if points == 0 {
        return Err(Error::Domain("grid needs at least one point".into()));
    }
    if points == 1 {
        if !(lo >= 0.0) {
            return Err(Error::Domain(format!("epsilon must be non-negative, got {lo}")));
        }
        return Ok(vec![lo]);
    }
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(Error::Domain(format!(
            "log grid needs 0 < lo <= hi < inf, got [{lo}, {hi}]"
        )));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (points - 1) as f64;
    let mut grid: Vec<f64> = (0..points).map(|i| (a + step * i as f64).exp()).collect();
    grid[0] = lo;
    grid[points - 1] = hi;
    Ok(grid)
}

/// 50 log-spaced points over `[1e-3, 1]`.
pub fn default_epsilon_grid() -> Vec<f64> {
    log_grid(1e-3, 1.0, 50).expect("valid default grid")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub n: u64,
    pub m: usize,
    pub sigma: f64,
    pub epsilons: Vec<f64>,
    pub families: Vec<BoundFamily>,
}

impl SweepConfig {
    pub fn new(n: u64, m: usize, epsilons: Vec<f64>, families: Vec<BoundFamily>) -> Self {
        Self {
            n,
            m,
            sigma: 0.5,
            epsilons,
            families,
        }
    }

    pub fn preset(preset: FigurePreset) -> Self {
        let (n, m) = preset.size();
        Self::new(n, m, default_epsilon_grid(), BoundFamily::FIGURE.to_vec())
    }
}

/// One family at one ε. `value` is `None` outside the family's domain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub family: BoundFamily,
    pub value: Option<f64>,
    pub argmin_t: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub cells: Vec<SweepCell>,
}

/// Evaluates every family at every ε (in parallel, output order preserved).
/// Domain errors become empty cells; any other error aborts the sweep.
pub fn sweep_figure(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    if cfg.epsilons.is_empty() {
        return Err(Error::Domain("epsilon grid is empty".into()));
    }
    if cfg.families.is_empty() {
        return Err(Error::Domain("no bound families selected".into()));
    }
    for &eps in &cfg.epsilons {
        BoundQuery::new(cfg.n, cfg.m, eps, cfg.sigma)?;
    }
    let jobs: Vec<(usize, BoundFamily)> = (0..cfg.epsilons.len())
        .flat_map(|i| cfg.families.iter().map(move |&f| (i, f)))
        .collect();
    let cells: Vec<SweepCell> = jobs
        .par_iter()
        .map(|&(i, family)| {
            let q = BoundQuery::new(cfg.n, cfg.m, cfg.epsilons[i], cfg.sigma)?;
            match evaluate_with_fallback(family, &q, None) {
                Ok(r) => Ok(SweepCell {
                    family,
                    value: Some(r.value),
                    argmin_t: r.argmin_t,
                    note: None,
                }),
                Err(Error::Domain(msg)) => Ok(SweepCell {
                    family,
                    value: None,
                    argmin_t: None,
                    note: Some(msg),
                }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let width = cfg.families.len();
    Ok(cfg
        .epsilons
        .iter()
        .zip(cells.chunks(width))
        .map(|(&epsilon, chunk)| SweepRow {
            epsilon,
            cells: chunk.to_vec(),
        })
        .collect())
}

/// Long-format CSV, one record per `(ε, family)`. `scale` converts nats to the
/// output unit (1 for nats, `1/ln 2` for bits).
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], scale: f64, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_CSV_HEADER)?;
    for row in rows {
        for cell in &row.cells {
            let value = cell.value.map(|v| format_float(v * scale)).unwrap_or_default();
            let t = cell.argmin_t.map(|t| t.to_string()).unwrap_or_default();
            w.write_record([format_float(row.epsilon).as_str(), cell.family.name(), &value, &t])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else if v > 0.0 {
        "inf".into()
    } else if v < 0.0 {
        "-inf".into()
    } else {
        "nan".into()
    }
}
