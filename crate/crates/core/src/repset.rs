//! Representative-set grids over the count space.
//!
//! The first `m-1` count coordinates of a size-`n` dataset live in `[0, n]^{m-1}`.
//! Splitting each axis into `t` cells of side `l = n/t` and picking one
//! representative dataset per cell gives the finite mixture used as the
//! auxiliary output distribution in the KL bounds. Three constructions are
//! supported:
//!
//! * [`GridVariant::FullCube`]: every one of the `t^{m-1}` cells.
//! * [`GridVariant::Simplex`]: only the `S_{m-1}(t)` cells under the simplex
//!   `Σ counts <= n`.
//! * [`GridVariant::Typical`]: an `m`-dimensional cube of side `2√(n log n)`
//!   around `n·P_Z`, holding every strongly typical count vector.
//!
//! Cells are closed on the right: an axis value `x > 0` belongs to cell
//! `⌈x t / n⌉ - 1`, and `x = 0` to cell 0, so boundary values go to the
//! lower-index cell.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bounds::{simplex_delta_t, typical_delta_t, typical_radius};
use crate::typespace::{
    dataset_distance, enumerate_types, is_strongly_typical, l1_counts, CountVector, SourceDistribution, TypicalSetSpec,
    DEFAULT_ENUMERATION_CAP,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridVariant {
    FullCube,
    Simplex,
    Typical,
}

impl fmt::Display for GridVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::FullCube => "full_cube",
            Self::Simplex => "simplex",
            Self::Typical => "typical",
        })
    }
}

impl FromStr for GridVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "full" | "full_cube" => Ok(Self::FullCube),
            "simplex" => Ok(Self::Simplex),
            "typical" => Ok(Self::Typical),
            other => Err(Error::Domain(format!("unknown grid variant '{other}'"))),
        }
    }
}

/// Geometry of the typicality cube: per-coordinate lower corner and cell side.
#[derive(Debug, Clone, PartialEq)]
struct TypicalFrame {
    lower: Vec<f64>,
    side: f64,
    prior: SourceDistribution,
}

/// A representative-set construction.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub t: u64,
    pub n: u64,
    pub m: usize,
    /// `n/t` for the count-cube variants, `2√(n log n)/t` for the typical one.
    pub cell_side: f64,
    pub delta_t: u64,
    pub variant: GridVariant,
    pub representatives: Vec<CountVector>,
    /// Number of cells `M` entering the `log M` counting term.
    pub raw_cell_count: u64,
    cells: Vec<Vec<u64>>,
    cell_lookup: HashMap<Vec<u64>, usize>,
    typical: Option<TypicalFrame>,
}

#[derive(Serialize)]
struct GridExport<'a> {
    t: u64,
    variant: GridVariant,
    delta_t: u64,
    #[serde(rename = "M")]
    m_cells: u64,
    representatives: Vec<&'a [u64]>,
}

impl GridSpec {
    /// Cell index of each representative, parallel to `representatives`.
    pub fn cells(&self) -> &[Vec<u64>] {
        &self.cells
    }

    pub fn to_json(&self) -> Result<String> {
        let export = GridExport {
            t: self.t,
            variant: self.variant,
            delta_t: self.delta_t,
            m_cells: self.raw_cell_count,
            representatives: self.representatives.iter().map(|r| r.counts()).collect(),
        };
        Ok(serde_json::to_string_pretty(&export)?)
    }

    /// Cell of `s`, or `None` when `s` falls outside the typicality cube.
    fn cell_of(&self, s: &CountVector) -> Option<Vec<u64>> {
        match &self.typical {
            None => Some(
                s.counts()[..self.m - 1]
                    .iter()
                    .map(|&x| axis_cell(x, self.n, self.t))
                    .collect(),
            ),
            Some(frame) => {
                let spec = TypicalSetSpec::default_for(self.n);
                if !is_strongly_typical(s, &frame.prior, &spec).ok()? {
                    return None;
                }
                Some(typical_cell(s, frame, self.t))
            }
        }
    }
}

fn axis_cell(x: u64, n: u64, t: u64) -> u64 {
    let scaled = (x as u128 * t as u128).div_ceil(n as u128) as u64;
    scaled.max(1) - 1
}

fn typical_cell(s: &CountVector, frame: &TypicalFrame, t: u64) -> Vec<u64> {
    s.counts()
        .iter()
        .zip(&frame.lower)
        .map(|(&x, &lo)| {
            let c = ((x as f64 - lo) / frame.side).floor();
            (c.max(0.0) as u64).min(t - 1)
        })
        .collect()
}

/// Smallest integer owned by axis cell `c`.
fn axis_lowest(c: u64, n: u64, t: u64) -> u64 {
    if c == 0 {
        0
    } else {
        (c as u128 * n as u128 / t as u128) as u64 + 1
    }
}

/// Center atom of axis cell `c`: with `l' = ⌊n/t⌋ + 1` atoms starting at
/// `⌈c n/t⌉`, the middle atom when `l'` is odd, or the middle of the cell
/// enlarged by one atom when `l'` is even; clipped to `n`.
fn axis_center(c: u64, n: u64, t: u64) -> u64 {
    let start = (c as u128 * n as u128).div_ceil(t as u128) as u64;
    let atoms = n / t + 1;
    let offset = if atoms % 2 == 1 { (atoms - 1) / 2 } else { atoms / 2 };
    (start + offset).min(n)
}

/// Nearest valid type (in half-L1) to an integer point with arbitrary signs.
/// Negative coordinates are raised to zero; any surplus is then removed from
/// the earliest coordinates and any deficit added to the last one, which is
/// the lexicographically smallest of the equidistant choices.
pub fn project_to_type(point: &[i64], n: u64) -> Result<CountVector> {
    let mut counts: Vec<u64> = point.iter().map(|&x| x.max(0) as u64).collect();
    let total: u64 = counts.iter().sum();
    if total > n {
        let mut surplus = total - n;
        for c in counts.iter_mut() {
            let take = surplus.min(*c);
            *c -= take;
            surplus -= take;
            if surplus == 0 {
                break;
            }
        }
    } else if let Some(last) = counts.last_mut() {
        *last += n - total;
    }
    CountVector::new(counts)
}

fn validate(n: u64, m: usize, t: u64) -> Result<()> {
    if m < 2 {
        return Err(Error::Domain(format!("alphabet size must be at least 2, got {m}")));
    }
    if n < 1 || t < 1 || t > n {
        return Err(Error::Domain(format!(
            "grid parameter t must satisfy 1 <= t <= n; got t={t}, n={n}"
        )));
    }
    Ok(())
}

/// Calls `f` on every cell index in `[0, t)^{dims}` whose coordinates sum to at
/// most `max_sum`, in lexicographic order.
fn for_each_cell(dims: usize, t: u64, max_sum: u64, f: &mut impl FnMut(&[u64])) {
    fn rec(prefix: &mut Vec<u64>, dims: usize, t: u64, budget: u64, f: &mut impl FnMut(&[u64])) {
        if prefix.len() == dims {
            f(prefix);
            return;
        }
        for c in 0..t.min(budget + 1) {
            prefix.push(c);
            rec(prefix, dims, t, budget - c, f);
            prefix.pop();
        }
    }
    rec(&mut Vec::with_capacity(dims), dims, t, max_sum, f);
}

fn count_cube_grid(n: u64, m: usize, t: u64, variant: GridVariant) -> Result<GridSpec> {
    let dims = m - 1;
    let full = (t as f64).powi(dims as i32);
    let simplex = simplex_cell_count(m, t);
    let raw = match variant {
        GridVariant::FullCube => full,
        _ => simplex.exact.map(|e| e as f64).unwrap_or(simplex.upper),
    };
    // Only cells under the simplex can own a valid type, so both variants
    // visit the same S_{m-1}(t) cells.
    let visited = simplex.exact.map(|e| e as f64).unwrap_or(f64::INFINITY);
    if visited > DEFAULT_ENUMERATION_CAP as f64 {
        return Err(Error::Capacity {
            size: visited,
            limit: DEFAULT_ENUMERATION_CAP,
        });
    }
    let mut representatives = Vec::new();
    let mut cells = Vec::new();
    let mut failure = None;
    for_each_cell(dims, t, t - 1, &mut |cell| {
        let lowest: u64 = cell.iter().map(|&c| axis_lowest(c, n, t)).sum();
        if lowest > n || failure.is_some() {
            return;
        }
        let mut point: Vec<i64> = cell.iter().map(|&c| axis_center(c, n, t) as i64).collect();
        let head: i64 = point.iter().sum();
        point.push(n as i64 - head);
        match project_to_type(&point, n) {
            Ok(rep) => {
                representatives.push(rep);
                cells.push(cell.to_vec());
            }
            Err(e) => failure = Some(e),
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let cell_lookup = cells.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
    Ok(GridSpec {
        t,
        n,
        m,
        cell_side: n as f64 / t as f64,
        delta_t: simplex_delta_t(n, t),
        variant,
        representatives,
        raw_cell_count: raw.round() as u64,
        cells,
        cell_lookup,
        typical: None,
    })
}

fn typical_grid(n: u64, m: usize, t: u64, prior: &SourceDistribution) -> Result<GridSpec> {
    if n < 2 {
        return Err(Error::Domain("the typical grid needs n >= 2".into()));
    }
    if prior.m() != m {
        return Err(Error::DimensionMismatch(format!(
            "prior has {} symbols, alphabet has {m}",
            prior.m()
        )));
    }
    let radius = typical_radius(n);
    let side = 2.0 * radius / t as f64;
    let frame = TypicalFrame {
        lower: prior.probs().iter().map(|p| n as f64 * p - radius).collect(),
        side,
        prior: prior.clone(),
    };
    let spec = TypicalSetSpec::default_for(n);
    // cell -> (distance to the cell center, representative)
    let mut best: BTreeMap<Vec<u64>, (f64, CountVector)> = BTreeMap::new();
    for s in enumerate_types(n, m)? {
        if !is_strongly_typical(&s, prior, &spec)? {
            continue;
        }
        let cell = typical_cell(&s, &frame, t);
        let dist: f64 = s
            .counts()
            .iter()
            .zip(&frame.lower)
            .zip(&cell)
            .map(|((&x, &lo), &c)| (x as f64 - (lo + (c as f64 + 0.5) * side)).abs())
            .sum();
        match best.get(&cell) {
            Some((d, _)) if *d <= dist => {}
            _ => {
                best.insert(cell, (dist, s));
            }
        }
    }
    let (cells, representatives): (Vec<_>, Vec<_>) = best.into_iter().map(|(c, (_, s))| (c, s)).unzip();
    let cell_lookup = cells
        .iter()
        .enumerate()
        .map(|(i, c): (usize, &Vec<u64>)| (c.clone(), i))
        .collect();
    Ok(GridSpec {
        t,
        n,
        m,
        cell_side: side,
        delta_t: typical_delta_t(n, t),
        variant: GridVariant::Typical,
        raw_cell_count: representatives.len() as u64,
        representatives,
        cells,
        cell_lookup,
        typical: Some(frame),
    })
}

/// Builds a representative set. `prior` is required for
/// [`GridVariant::Typical`] and ignored otherwise.
pub fn build_grid(
    n: u64,
    m: usize,
    t: u64,
    variant: GridVariant,
    prior: Option<&SourceDistribution>,
) -> Result<GridSpec> {
    validate(n, m, t)?;
    match variant {
        GridVariant::FullCube | GridVariant::Simplex => count_cube_grid(n, m, t, variant),
        GridVariant::Typical => {
            let prior = prior.ok_or_else(|| Error::Domain("the typical grid needs a source distribution".into()))?;
            typical_grid(n, m, t, prior)
        }
    }
}

/// Representative assigned to a dataset and its distance from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nearest {
    pub index: usize,
    pub representative: CountVector,
    pub distance: u64,
}

/// Representative of `s`'s cell. `Ok(None)` flags an atypical `s` on a
/// typical grid.
pub fn nearest_representative(s: &CountVector, g: &GridSpec) -> Result<Option<Nearest>> {
    if s.n() != g.n || s.m() != g.m {
        return Err(Error::DimensionMismatch(format!(
            "dataset (n={}, m={}) against grid (n={}, m={})",
            s.n(),
            s.m(),
            g.n,
            g.m
        )));
    }
    let Some(cell) = g.cell_of(s) else {
        return Ok(None);
    };
    let index = *g.cell_lookup.get(&cell).ok_or_else(|| {
        Error::Validation(format!(
            "type {:?} lies in cell {cell:?}, which has no representative",
            s.counts()
        ))
    })?;
    let representative = g.representatives[index].clone();
    let distance = dataset_distance(s, &representative)?;
    Ok(Some(Nearest {
        index,
        representative,
        distance,
    }))
}

/// Exact and upper-bound counts of cells under the simplex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimplexCellCount {
    /// `C(t+m-2, m-1)`; `None` when it overflows 64 bits.
    pub exact: Option<u64>,
    /// `(t + (m-2)/2)^{m-1} / (m-1)!`
    pub upper: f64,
    pub log_exact: f64,
    pub log_upper: f64,
}

pub fn simplex_cell_count(m: usize, t: u64) -> SimplexCellCount {
    let k = m as u64 - 1;
    let mut exact: Option<u128> = Some(1);
    for i in 1..=k {
        exact = exact
            .and_then(|e| e.checked_mul((t - 1 + i) as u128))
            .map(|e| e / i as u128);
    }
    let exact = exact.and_then(|e| u64::try_from(e).ok());
    let log_exact = crate::numeric::log_binomial_stars(t - 1, k);
    let log_upper = k as f64 * (t as f64 + (m as f64 - 2.0) / 2.0).ln() - crate::numeric::ln_factorial(k);
    SimplexCellCount {
        exact,
        upper: log_upper.exp(),
        log_exact,
        log_upper,
    }
}

/// Largest, over representatives, of the distance to the closest other
/// representative. `None` when the grid has a single representative.
pub fn neighbor_distance_check(g: &GridSpec) -> Option<u64> {
    let reps = &g.representatives;
    if reps.len() < 2 {
        return None;
    }
    let worst = (0..reps.len())
        .map(|i| {
            (0..reps.len())
                .filter(|&j| j != i)
                .map(|j| l1_counts(reps[i].counts(), reps[j].counts()) / 2)
                .min()
                .unwrap_or(0)
        })
        .max()
        .unwrap_or(0);
    Some(worst)
}
