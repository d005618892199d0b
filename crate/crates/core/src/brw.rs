//! Streaming branching random walk: only the current generation's positions
//! are kept, and extremes are read off the final frontier.

use alloc::vec::Vec;
use rand_core::RngCore;

use crate::distributions::{DisplacementLaw, ProgenyLaw};
use crate::error::{domain, Error, Result};
use crate::math::{log, log_plus};
use crate::population::{PathMode, PopulationPath};
use crate::rng::open01;

/// Positions `S_v` of every particle in one generation.
#[derive(Debug, Clone, PartialEq)]
pub struct Frontier {
    pub generation: usize,
    pub positions: Vec<f64>,
    pub log_size: f64,
}

impl Frontier {
    /// Generation 0: a single particle at the origin.
    pub fn root() -> Self {
        Frontier {
            generation: 0,
            positions: alloc::vec![0.0],
            log_size: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Result of advancing a frontier by one generation.
#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Advanced(Frontier),
    /// The next generation would hold more than `cap` particles. The parent
    /// frontier is handed back untouched.
    Overflow { parent: Frontier },
}

/// Advance `f` by one generation.
///
/// Every parent's progeny count is drawn first, in parent order, bailing out
/// as soon as the running total passes `cap`; then each child's displacement
/// is drawn in parent order. Parents are dropped once children exist.
pub fn step_frontier<R: RngCore + ?Sized>(
    f: Frontier,
    progeny: &ProgenyLaw,
    disp: &DisplacementLaw,
    cap: u64,
    rng: &mut R,
) -> Result<Step> {
    if f.positions.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    if cap < 1 {
        return Err(domain("population cap", 0.0));
    }
    // Counts beyond u32 would overflow any realistic cap anyway.
    let cap = cap.min(u32::MAX as u64);
    let mut counts: Vec<u32> = Vec::with_capacity(f.positions.len());
    let mut total: u64 = 0;
    for _ in 0..f.positions.len() {
        let m = progeny.offspring(open01(rng));
        total = total.saturating_add(m);
        if total > cap {
            return Ok(Step::Overflow { parent: f });
        }
        counts.push(m as u32);
    }
    let mut children = Vec::with_capacity(total as usize);
    for (&s, &m) in f.positions.iter().zip(&counts) {
        for _ in 0..m {
            children.push(s + disp.sample(open01(rng)));
        }
    }
    Ok(Step::Advanced(Frontier {
        generation: f.generation + 1,
        log_size: log(children.len() as f64),
        positions: children,
    }))
}

/// Top order statistics of one generation and the scalings used to
/// normalize them.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremeRecord {
    pub generation: usize,
    /// The `k` largest positions, nonincreasing (fewer if the generation is
    /// smaller than `k`).
    pub top_k: Vec<f64>,
    pub z_n: u64,
    /// `F^←(1 - 1/z_n)`; regularly varying displacements with `z_n >= 2`.
    pub c_n: Option<f64>,
    /// `L(log z_n)`; light-tailed displacements when defined.
    pub l_log_zn: Option<f64>,
}

impl ExtremeRecord {
    /// `M_n`, the maximal position.
    pub fn max(&self) -> Option<f64> {
        self.top_k.first().copied()
    }
}

/// Exceedance counts of scaled positions over an increasing threshold grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSample {
    pub thresholds: Vec<f64>,
    pub counts: Vec<u64>,
}

/// Number of points in the default threshold grid.
pub const DEFAULT_GRID_LEN: usize = 12;

/// The grid `0.25 · 2^j` for `j = 0..12`.
pub fn default_thresholds() -> Vec<f64> {
    (0..DEFAULT_GRID_LEN).map(|j| 0.25 * (1u64 << j) as f64).collect()
}

/// The `k` largest values of `xs`, nonincreasing.
pub fn top_k(xs: &[f64], k: usize) -> Vec<f64> {
    let desc = |a: &f64, b: &f64| b.total_cmp(a);
    let mut out = if xs.len() > k && k > 0 {
        let mut v = xs.to_vec();
        v.select_nth_unstable_by(k - 1, desc);
        v.truncate(k);
        v
    } else {
        xs.to_vec()
    };
    out.truncate(k);
    // The copy above may hold a whole generation; keep only k slots.
    out.shrink_to_fit();
    out.sort_by(desc);
    out
}

/// `#{i : positions[i] / scale > x_j}` for each threshold `x_j`.
pub fn exceedance_counts(positions: &[f64], scale: f64, thresholds: &[f64]) -> Vec<u64> {
    // bucket[m] counts points exceeding exactly the first m thresholds.
    let mut bucket = alloc::vec![0u64; thresholds.len() + 1];
    for &p in positions {
        let s = p / scale;
        bucket[thresholds.partition_point(|&x| x < s)] += 1;
    }
    let mut counts = alloc::vec![0u64; thresholds.len()];
    let mut above = 0;
    for j in (0..thresholds.len()).rev() {
        above += bucket[j + 1];
        counts[j] = above;
    }
    counts
}

/// Everything a single run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct BrwRun {
    pub record: ExtremeRecord,
    /// Present for regularly varying displacements when `c_n` is defined.
    pub points: Option<PointSample>,
    pub path: PopulationPath,
    /// Generation that would have exceeded the cap, if the run stopped early.
    pub truncated_at: Option<usize>,
}

impl BrwRun {
    pub fn completed(&self) -> bool {
        self.truncated_at.is_none()
    }
}

fn record_for(f: &Frontier, disp: &DisplacementLaw, k: usize) -> ExtremeRecord {
    let z_n = f.positions.len() as u64;
    let (c_n, l_log_zn) = if disp.is_regularly_varying() {
        (disp.scale_for_population(z_n as f64).ok(), None)
    } else {
        (None, disp.inverse_hazard(log(z_n as f64)).ok())
    };
    ExtremeRecord {
        generation: f.generation,
        top_k: top_k(&f.positions, k),
        z_n,
        c_n,
        l_log_zn,
    }
}

/// Run `n` generations from a single particle at 0 and summarize the last
/// one. On cap overflow the summary describes the last completed generation
/// and `truncated_at` is set.
pub fn run_brw<R: RngCore + ?Sized>(
    progeny: &ProgenyLaw,
    disp: &DisplacementLaw,
    n: usize,
    k: usize,
    thresholds: &[f64],
    cap: u64,
    rng: &mut R,
) -> Result<BrwRun> {
    if n < 1 {
        return Err(domain("number of generations", n as f64));
    }
    if k < 1 {
        return Err(domain("number of order statistics", k as f64));
    }
    if let Some(w) = thresholds.windows(2).find(|w| !(w[0] < w[1])) {
        return Err(domain("threshold grid must increase", w[1]));
    }
    let mut frontier = Frontier::root();
    let mut log_sizes = Vec::with_capacity(n + 1);
    log_sizes.push(0.0);
    let mut truncated_at = None;
    while frontier.generation < n {
        match step_frontier(frontier, progeny, disp, cap, rng)? {
            Step::Advanced(next) => {
                log_sizes.push(next.log_size);
                frontier = next;
            }
            Step::Overflow { parent } => {
                truncated_at = Some(parent.generation + 1);
                frontier = parent;
                break;
            }
        }
    }
    let record = record_for(&frontier, disp, k);
    let points = record.c_n.map(|c| PointSample {
        thresholds: thresholds.to_vec(),
        counts: exceedance_counts(&frontier.positions, c, thresholds),
    });
    Ok(BrwRun {
        record,
        points,
        path: PopulationPath {
            log_sizes,
            mode: PathMode::Exact,
            alpha: progeny.alpha(),
            truncated_at,
        },
        truncated_at,
    })
}

/// `M_n^{(j)} / C_n` for every retained order statistic.
pub fn scale_positions(rec: &ExtremeRecord, disp: &DisplacementLaw) -> Result<Vec<f64>> {
    let c = disp.scale_for_population(rec.z_n as f64)?;
    Ok(rec.top_k.iter().map(|&m| m / c).collect())
}

/// `M_n / L(log Z_n)` for a light-tailed displacement law.
pub fn scaled_max_ratio(rec: &ExtremeRecord, disp: &DisplacementLaw) -> Result<f64> {
    if rec.z_n < 2 {
        return Err(Error::Undefined {
            what: "L(log Z_n) needs z_n >= 2",
        });
    }
    let m = rec.max().ok_or(Error::InsufficientData { needed: 1, got: 0 })?;
    max_ratio_at_log_size(m, log(rec.z_n as f64), disp)
}

/// `m / L(log_z)`, for population sizes given on the log scale.
pub fn max_ratio_at_log_size(m: f64, log_z: f64, disp: &DisplacementLaw) -> Result<f64> {
    if disp.is_regularly_varying() {
        return Err(Error::WrongTailClass {
            expected: "light-tailed",
        });
    }
    if !(log_z >= core::f64::consts::LN_2) {
        return Err(Error::Undefined {
            what: "L(log Z_n) needs z_n >= 2",
        });
    }
    Ok(m / disp.inverse_hazard(log_z)?)
}

/// Which cloud-speed normalization to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpeedMode {
    /// `(1/n) log⁺ log⁺ M_n`.
    Heavy,
    /// `(1/n) log⁺ M_n`.
    Light,
}

/// Cloud-speed statistic of the record's maximum, with `log⁺ x = max(log x, 0)`.
pub fn cloud_speed_stat(rec: &ExtremeRecord, mode: SpeedMode) -> Result<f64> {
    if rec.generation < 1 {
        return Err(domain("generation", 0.0));
    }
    let m = rec.max().ok_or(Error::InsufficientData { needed: 1, got: 0 })?;
    let n = rec.generation as f64;
    Ok(match mode {
        SpeedMode::Heavy => log_plus(log_plus(m)) / n,
        SpeedMode::Light => log_plus(m) / n,
    })
}
