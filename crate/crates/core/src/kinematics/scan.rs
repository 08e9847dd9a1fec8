//! Solution counts of the DKP over a grid of `(r1, r2)` at fixed `r3`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use super::dkp::{dkp, DkpOptions};
use super::JointLengths;
use crate::error::{Error, Result};
use crate::robots::{ModeId, PlatformGeometry};

#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub mode: ModeId,
    pub r3: f64,
    /// Range of `r1` and of `r2`.
    pub window: (f64, f64),
    /// Cells per side.
    pub resolution: usize,
    /// Per-cell solver budget; `options.seed` is the scan seed.
    pub options: DkpOptions,
    pub jobs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Ok,
    /// The count is not trustworthy (odd count in a mirror-symmetric mode,
    /// or a start stalled close to a root).
    Unknown,
    /// A root is near singular or two roots nearly coincide.
    Critical,
}

impl CellStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CellStatus::Ok => "ok",
            CellStatus::Unknown => "unknown",
            CellStatus::Critical => "critical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanCell {
    pub i: usize,
    pub j: usize,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub count: usize,
    pub status: CellStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub config: ScanConfig,
    /// Row-major: `r1` index outer, `r2` index inner.
    pub cells: Vec<ScanCell>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the RNG stream of cell `index`.
pub fn cell_seed(seed: u64, index: usize) -> u64 {
    splitmix64(splitmix64(seed) ^ index as u64)
}

fn cell_center(window: (f64, f64), n: usize, k: usize) -> f64 {
    window.0 + (k as f64 + 0.5) * (window.1 - window.0) / n as f64
}

/// Rounds to six significant digits and prints the shortest representation.
fn sig6(v: f64) -> String {
    let rounded: f64 = format!("{v:.5e}").parse().unwrap();
    format!("{rounded}")
}

fn run_cell(g: &PlatformGeometry, cfg: &ScanConfig, index: usize) -> Result<ScanCell> {
    let n = cfg.resolution;
    let (i, j) = (index / n, index % n);
    let r1 = cell_center(cfg.window, n, i);
    let r2 = cell_center(cfg.window, n, j);
    let r = JointLengths::new(r1, r2, cfg.r3)?;
    let opts = DkpOptions {
        seed: cell_seed(cfg.options.seed, index),
        ..cfg.options
    };
    let rep = dkp(g, cfg.mode, &r, &opts)?;
    let count = rep.solutions.len();
    let symmetric = matches!(cfg.mode, ModeId::I1 | ModeId::I2);
    let status = if rep.solutions.iter().any(|s| s.near_singular || s.near_coincident) {
        CellStatus::Critical
    } else if (symmetric && count % 2 == 1) || rep.best_unconverged < 1e-6 {
        CellStatus::Unknown
    } else {
        CellStatus::Ok
    };
    Ok(ScanCell { i, j, r1, r2, r3: cfg.r3, count, status })
}

/// Runs the scan on `cfg.jobs` worker threads. Cells are independent and
/// seeded from `(seed, cell index)`, so the result does not depend on the
/// number of workers.
pub fn scan_grid(g: &PlatformGeometry, cfg: &ScanConfig) -> Result<ScanResult> {
    if cfg.resolution == 0 || !(cfg.window.0 > 0.0 && cfg.window.1 > cfg.window.0) || !(cfg.r3 > 0.0) {
        return Err(Error::InvalidLengths("scan window must be positive and nonempty".into()));
    }
    let total = cfg.resolution * cfg.resolution;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .map_err(|e| Error::Solver(format!("cannot start worker pool: {e}")))?;
    let cells = pool.install(|| {
        (0..total)
            .into_par_iter()
            .map(|k| run_cell(g, cfg, k))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(ScanResult { config: cfg.clone(), cells })
}

impl ScanResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r1,r2,r3,count,status\n");
        for c in &self.cells {
            let _ = writeln!(s, "{},{},{},{},{}", sig6(c.r1), sig6(c.r2), sig6(c.r3), c.count, c.status.as_str());
        }
        s
    }

    pub fn histogram(&self) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for c in &self.cells {
            *h.entry(c.count).or_insert(0) += 1;
        }
        h
    }

    /// Cells with `count == k` as `(d1, d2) = (r1 - r3, r2 - r3)`.
    pub fn cells_with_count(&self, k: usize) -> Vec<(f64, f64)> {
        self.cells
            .iter()
            .filter(|c| c.count == k)
            .map(|c| (c.r1 - c.r3, c.r2 - c.r3))
            .collect()
    }

    /// Whether every cell with count `inner` lies strictly inside the convex
    /// hull of the cells with count `outer`. False when either set is empty.
    pub fn region_inside_hull(&self, inner: usize, outer: usize) -> bool {
        let pts = self.cells_with_count(inner);
        let hull = convex_hull(&self.cells_with_count(outer));
        !pts.is_empty() && hull.len() >= 3 && pts.iter().all(|p| strictly_inside(&hull, *p))
    }
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Convex hull in counter-clockwise order (monotone chain), without
/// collinear points.
pub fn convex_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        for &p in &pts {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
        if pass == 0 {
            pts.reverse();
        }
    }
    hull
}

/// `p` strictly inside the counter-clockwise convex polygon `hull`.
pub fn strictly_inside(hull: &[(f64, f64)], p: (f64, f64)) -> bool {
    let n = hull.len();
    n >= 3 && (0..n).all(|i| cross(hull[i], hull[(i + 1) % n], p) > 0.0)
}
