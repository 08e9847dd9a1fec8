//! Self-check battery: algebraic laws, mode/geometry consistency, the
//! degenerate systems and the published numbers, each reported as one line.

use std::fmt;
use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::compactify::{beta, lift, sigma, tau, BoundaryPoint, ProductPoint};
use crate::kinematics::{
    degenerate_dkp, degenerate_dkp_oriented, degenerate_ikm, dkp, dkp_refine, scan_grid, BoundaryJointCoords, DkpOptions, JointLengths,
    Orientation, ScanConfig,
};
use crate::poly::{generator_sets, GeneratorSet};
use crate::proj;
use crate::robots::{
    boundary_component, involution, mode_membership, modes_of, normalized_constraint_residuals, sample_mode_point,
    Architecture, BoundaryComponentId, ModeId, PlatformGeometry,
};
use crate::study::{dualrot_from_motion, rotation_matrix, study_from_motion, RigidMotion};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    /// Disagrees with a published value for a documented reason.
    KnownMismatch,
}

impl Outcome {
    fn label(self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "FAIL",
            Outcome::KnownMismatch => "known-mismatch",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub outcome: Outcome,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", self.outcome.label(), self.name, self.detail)
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Skip the grid scans.
    pub quick: bool,
    /// Count known mismatches as failures.
    pub strict: bool,
    pub seed: u64,
    /// Random samples per property check.
    pub samples: usize,
    /// Also check generator files from this directory (`NAME.txt`).
    pub data_dir: Option<std::path::PathBuf>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { quick: false, strict: false, seed: 0, samples: 1000, data_dir: None }
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self, strict: bool) -> bool {
        self.checks.iter().all(|c| match c.outcome {
            Outcome::Pass => true,
            Outcome::Fail => false,
            Outcome::KnownMismatch => !strict,
        })
    }

    fn push(&mut self, name: &str, ok: bool, detail: String) {
        self.record(name, if ok { Outcome::Pass } else { Outcome::Fail }, detail);
    }

    fn record(&mut self, name: &str, outcome: Outcome, detail: String) {
        self.checks.push(Check { name: name.to_string(), outcome, detail });
    }
}

pub fn run(opts: &VerifyOptions) -> VerifyReport {
    let mut rep = VerifyReport::default();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let n = opts.samples.max(1);

    check_generators(&mut rep, opts.data_dir.as_deref());
    check_compactification(&mut rep, &mut rng, n);
    check_dual_rotations(&mut rep, &mut rng, n);
    check_modes(&mut rep, &mut rng, n);
    check_degenerate_systems(&mut rep, &mut rng, n);
    check_published(&mut rep);
    if !opts.quick {
        check_scans(&mut rep, opts.seed);
    }
    rep
}

fn check_generators(rep: &mut VerifyReport, dir: Option<&Path>) {
    let mut bad = Vec::new();
    for gs in generator_sets() {
        if let Err(e) = gs.verify_checksum() {
            bad.push(e.to_string());
        }
    }
    if let Some(dir) = dir {
        for gs in generator_sets() {
            let path = dir.join(format!("{}.txt", gs.name));
            let parsed = std::fs::read_to_string(&path)
                .map_err(|e| format!("{}: {e}", path.display()))
                .and_then(|t| GeneratorSet::from_text(&t).map_err(|e| format!("{}: {e}", path.display())))
                .and_then(|g| g.verify_checksum().map_err(|e| format!("{}: {e}", path.display())));
            if let Err(e) = parsed {
                bad.push(e);
            }
        }
    }
    let detail = if bad.is_empty() {
        format!("{} sets match term counts and fingerprints", generator_sets().len())
    } else {
        bad.join("; ")
    };
    rep.push("generator checksums", bad.is_empty(), detail);
}

fn gauss<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn random_unit4<R: Rng>(rng: &mut R) -> [f64; 4] {
    loop {
        let mut q: [f64; 4] = std::array::from_fn(|_| gauss(rng));
        if proj::norm(&q) > 1e-6 && proj::normalize_in_place(&mut q) {
            return q;
        }
    }
}

/// Uniform rotation and a Gaussian translation of scale `scale`.
pub fn random_motion<R: Rng>(rng: &mut R, scale: f64) -> RigidMotion {
    let q = random_unit4(rng);
    let t = Vector3::new(gauss(rng), gauss(rng), gauss(rng)) * scale;
    RigidMotion::new(rotation_matrix(&q).expect("nonzero quaternion"), t).expect("rotation of a unit quaternion")
}

/// Random point of the exceptional divisor.
fn random_boundary<R: Rng>(rng: &mut R) -> BoundaryPoint {
    let w = random_unit4(rng);
    let mut y: [f64; 4] = std::array::from_fn(|_| gauss(rng));
    let c = proj::dot(&w, &y);
    for i in 0..4 {
        y[i] -= c * w[i];
    }
    BoundaryPoint::new(w, y).expect("y orthogonal to w")
}

fn check_compactification<R: Rng>(rep: &mut VerifyReport, rng: &mut R, n: usize) {
    let mut worst = 0.0f64;
    for _ in 0..n {
        let p = ProductPoint::new(random_unit4(rng), std::array::from_fn(|_| gauss(rng))).unwrap();
        let back = tau(&sigma(&p), 1e-9).map(|b| {
            proj::proj_dist(&b.w, &p.w).max(proj::proj_dist(&b.rstu, &p.rstu))
        });
        worst = worst.max(back.unwrap_or(f64::INFINITY));
    }
    rep.push("tau after sigma", worst < 1e-10, format!("max error {worst:.2e} on {n} points"));

    let mut worst = 0.0f64;
    for k in 0..n {
        let b = if k % 2 == 0 {
            lift(&study_from_motion(&random_motion(rng, 3.0)).unwrap()).unwrap()
        } else {
            random_boundary(rng).to_blowup()
        };
        let err = tau(&b, 1e-9)
            .map(|p| {
                let s = sigma(&p);
                proj::proj_dist(&s.xy, &b.xy).max(proj::proj_dist(&s.w, &b.w))
            })
            .unwrap_or(f64::INFINITY);
        worst = worst.max(err);
    }
    rep.push("sigma after tau", worst < 1e-10, format!("max error {worst:.2e} on {n} points"));

    let mut worst = 0.0f64;
    for _ in 0..n {
        let m = random_motion(rng, 3.0);
        let a = lift(&study_from_motion(&m).unwrap()).unwrap();
        let s = sigma(&beta(&m));
        worst = worst.max(proj::proj_dist(&a.xy, &s.xy).max(proj::proj_dist(&a.w, &s.w)));
    }
    rep.push("alpha = sigma . beta", worst < 1e-10, format!("max error {worst:.2e} on {n} motions"));
}

fn check_dual_rotations<R: Rng>(rep: &mut VerifyReport, rng: &mut R, n: usize) {
    let mut worst = 0.0f64;
    for _ in 0..n {
        let (a, b) = (random_motion(rng, 3.0), random_motion(rng, 3.0));
        let prod = dualrot_from_motion(&a).mul(&dualrot_from_motion(&b));
        let direct = dualrot_from_motion(&a.compose(&b));
        let err = |x: &Matrix3<f64>, y: &Matrix3<f64>| (x - y).amax() / (1.0 + y.amax());
        worst = worst.max(err(&prod.r, &direct.r)).max(err(&prod.m, &direct.m));
    }
    rep.push("dual rotation product law", worst < 1e-10, format!("max error {worst:.2e} on {n} pairs"));
}

fn check_modes<R: Rng>(rep: &mut VerifyReport, rng: &mut R, n: usize) {
    let per_mode = (n / 2).max(1);
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for arch in Architecture::ALL {
        let g = PlatformGeometry::default_for(arch);
        for &m in modes_of(arch).iter().filter(|m| m.is_complete()) {
            for _ in 0..per_mode {
                let p = sample_mode_point(&g, m, rng).unwrap();
                let c = normalized_constraint_residuals(&g, &p);
                let cmax = c.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                worst = worst.max(cmax);
                if cmax >= 1e-8 || !mode_membership(&g, m, &p, 1e-8).unwrap() {
                    failures.push(format!("{m}/{arch}"));
                    break;
                }
            }
        }
    }
    rep.push(
        "mode generators vs constraints",
        failures.is_empty(),
        if failures.is_empty() {
            format!("{per_mode} samples per complete mode, max constraint residual {worst:.2e}")
        } else {
            format!("inconsistent: {}", failures.join(", "))
        },
    );

    let pairs = [
        (Architecture::Rps3, ModeId::I1, ModeId::I2),
        (Architecture::Rps3, ModeId::I2, ModeId::I1),
        (Architecture::Upu3Snu, ModeId::K1, ModeId::K2),
        (Architecture::Upu3Snu, ModeId::K2, ModeId::K1),
        (Architecture::Upu3Snu, ModeId::K5, ModeId::K6),
        (Architecture::Upu3Snu, ModeId::K6, ModeId::K5),
    ];
    let mut failures = Vec::new();
    for (arch, from, to) in pairs {
        let g = PlatformGeometry::default_for(arch);
        for _ in 0..per_mode {
            let p = sample_mode_point(&g, from, rng).unwrap();
            if !mode_membership(&g, to, &involution(&p), 1e-8).unwrap() {
                failures.push(format!("{from}->{to}"));
                break;
            }
        }
    }
    rep.push(
        "mode involution",
        failures.is_empty(),
        if failures.is_empty() {
            "I1<->I2, K1<->K2, K5<->K6 sample-wise".to_string()
        } else {
            format!("not mapped: {}", failures.join(", "))
        },
    );
}

/// The specialized degenerate systems as printed, `(d1, d2)` on the unit
/// chart coordinates of each component.
pub fn printed_degenerate_system(id: BoundaryComponentId, c: [f64; 3], k2: f64) -> Option<(f64, f64)> {
    let s3 = 3f64.sqrt();
    let [a, b, d] = c;
    match id {
        BoundaryComponentId::J1 => Some((3.0 * k2 * a * d + s3 * k2 * a * b, 2.0 * s3 * k2 * a * b)),
        BoundaryComponentId::L5 => Some(((s3 * b - 3.0 * d) / 4.0, s3 * b / 2.0)),
        BoundaryComponentId::L6 => Some(((-15.0 * b + 5.0 * s3 * d) / 4.0, 5.0 * s3 * d / 2.0)),
        _ => None,
    }
}

/// Max deviation of the general boundary IKM from the printed system on `n`
/// random unit chart points.
pub fn degenerate_system_error<R: Rng>(id: BoundaryComponentId, rng: &mut R, n: usize) -> Result<f64> {
    let g = PlatformGeometry::default_for(id.architecture());
    let comp = boundary_component(id);
    let mut worst = 0.0f64;
    for _ in 0..n {
        let mut c: [f64; 3] = std::array::from_fn(|_| gauss(rng));
        if proj::norm(&c) < 1e-6 || !proj::normalize_in_place(&mut c) {
            continue;
        }
        let d = degenerate_ikm(&g, &comp.point(c)?).canonical;
        let (p1, p2) = printed_degenerate_system(id, c, g.k2).expect("component has a printed system");
        worst = worst.max((d.d1 - p1).abs()).max((d.d2 - p2).abs());
    }
    Ok(worst)
}

fn check_degenerate_systems<R: Rng>(rep: &mut VerifyReport, rng: &mut R, n: usize) {
    for id in [BoundaryComponentId::J1, BoundaryComponentId::L5, BoundaryComponentId::L6] {
        let err = degenerate_system_error(id, rng, n).unwrap_or(f64::INFINITY);
        let name = format!("degenerate system {id}");
        let detail = format!("max deviation from printed system {err:.2e} on {n} points");
        if err < 1e-12 {
            rep.push(&name, true, detail);
        } else if id == BoundaryComponentId::L5 {
            // The printed L5 system has the opposite sign of the w3 term; no
            // layout reproduces the J1, L6 and L5 systems together.
            rep.record(&name, Outcome::KnownMismatch, format!("{detail} (sign of the w3 term)"));
        } else {
            rep.push(&name, false, detail);
        }
    }
}

/// Distance between the vectors `a` and `b` up to sign.
fn sign_dist(a: &[f64], b: &[f64]) -> f64 {
    let p: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let m: f64 = a.iter().zip(b).map(|(x, y)| (x + y) * (x + y)).sum::<f64>().sqrt();
    p.min(m)
}

fn all_near(found: &[Vec<f64>], targets: &[[f64; 3]], tol: f64) -> bool {
    targets.iter().all(|t| found.iter().any(|f| f.iter().zip(t).all(|(a, b)| (a.abs() - b).abs() <= tol)))
}

fn check_published(rep: &mut VerifyReport) {
    let rps = PlatformGeometry::default_for(Architecture::Rps3);
    let tsai = PlatformGeometry::default_for(Architecture::Upu3Tsai);

    // Degenerate DKP of J1 at (2, 1).
    match degenerate_dkp(&rps, BoundaryComponentId::J1, BoundaryJointCoords::new(2.0, 1.0)) {
        Ok(sol) => {
            let found: Vec<Vec<f64>> = sol.solutions.iter().map(|s| s.chart.to_vec()).collect();
            let ok = found.len() == 2 && all_near(&found, &[[0.90, 0.21, 0.36], [0.42, 0.45, 0.78]], 0.01);
            rep.push("degenerate DKP J1 (2,1)", ok, format!("{found:.4?}"));
        }
        Err(e) => rep.push("degenerate DKP J1 (2,1)", false, e.to_string()),
    }

    // Degenerate DKP of the Tsai robot on d2 = 0.
    let mut counts = Vec::new();
    for d1 in [-5.0, -2.0, -0.5, 0.3, 1.0, 3.7, 4.0] {
        let d = BoundaryJointCoords::new(d1, 0.0);
        let n: usize = [BoundaryComponentId::L5, BoundaryComponentId::L6, BoundaryComponentId::L7]
            .iter()
            .map(|&id| degenerate_dkp(&tsai, id, d).map(|s| s.solutions.len()).unwrap_or(usize::MAX / 4))
            .sum();
        counts.push(n);
    }
    rep.push(
        "degenerate DKP Tsai d2=0 counts",
        counts == [0, 2, 4, 4, 2, 2, 0],
        format!("{counts:?} at d1 = -5, -2, -0.5, 0.3, 1, 3.7, 4"),
    );

    // Full DKP of I1 at (52, 51, 50).
    let r = JointLengths::new(52.0, 51.0, 50.0).unwrap();
    match dkp(&rps, ModeId::I1, &r, &DkpOptions::default()) {
        Ok(report) => {
            let z: Vec<f64> = report.solutions.iter().map(|s| s.z).collect();
            let heights_ok = z.len() == 4 && z.iter().all(|z| (z.abs() - 50.9).abs() <= 0.1);
            rep.push("full DKP I1 (52,51,50)", heights_ok, format!("{} solutions, z = {z:.3?}", z.len()));
            let rots: Vec<Vec<f64>> = report
                .solutions
                .iter()
                .map(|s| {
                    let x = s.point.normalized().x;
                    let n = proj::norm(&x[1..]);
                    x[1..].iter().map(|v| v / n).collect()
                })
                .collect();
            let first = all_near(&rots, &[[0.90, 0.20, 0.37]], 0.01);
            let second = all_near(&rots, &[[0.42, 0.45, 0.78]], 0.01);
            let outcome = match (first, second) {
                (true, true) => Outcome::Pass,
                // The printed second pair equals the degenerate J1 solution,
                // which the full solution only approaches like 1/r3.
                (true, false) if heights_ok => Outcome::KnownMismatch,
                _ => Outcome::Fail,
            };
            rep.record("full DKP I1 published rotations", outcome, format!("{rots:.4?}"));
        }
        Err(e) => rep.push("full DKP I1 (52,51,50)", false, e.to_string()),
    }

    // Separation of L5 and L6 inside K8.
    let r = JointLengths::new(100.6, 100.0, 100.0).unwrap();
    let mut details = Vec::new();
    let mut ok = true;
    for q in [[0.98, 0.0, 0.15, 0.0], [0.0, 0.73, 0.0, 0.68]] {
        let mut hit = false;
        for upper in [true, false] {
            let Ok(seed) = crate::kinematics::seed_from_rotation(&tsai, &r, &q, upper) else { continue };
            if let Ok(sol) = dkp_refine(&tsai, ModeId::K8, &r, &seed) {
                let x = sol.point.normalized().x;
                let n = proj::norm(&x);
                let x = x.map(|v| v / n);
                let near = (0..4).all(|i| (x[i].abs() - q[i]).abs() <= 0.02);
                details.push(format!("{x:.3?}"));
                if near {
                    hit = true;
                    break;
                }
            }
        }
        ok &= hit;
    }
    rep.push("K8 mode separation (100.6,100,100)", ok, details.join(" "));

    // Asymptotic convergence of the full DKP to the degenerate one.
    match convergence_slope(&rps, &[10.0, 50.0, 200.0]) {
        Ok((slope, errs)) => rep.push(
            "convergence to degenerate DKP",
            (slope + 1.0).abs() <= 0.3,
            format!("log-log slope {slope:.3}, errors {errs:?}"),
        ),
        Err(e) => rep.push("convergence to degenerate DKP", false, e.to_string()),
    }
}

/// Max over the full DKP solutions of `I1` at `d = (2, 1)` of the distance
/// of their rotation to the nearest degenerate `J1` rotation, for each `r3`,
/// and the least-squares slope of `log(error)` against `log(r3)`.
pub fn convergence_slope(g: &PlatformGeometry, r3s: &[f64]) -> Result<(f64, Vec<f64>)> {
    // Mirror partners approach the two orientation classes.
    let d = BoundaryJointCoords::new(2.0, 1.0);
    let mut targets = Vec::new();
    for o in [Orientation::Canonical, Orientation::Flipped] {
        for s in degenerate_dkp_oriented(g, BoundaryComponentId::J1, d, o)?.solutions {
            targets.push(s.point.w.map(|v| v / proj::norm(&s.point.w)));
        }
    }
    let mut errs = Vec::new();
    for &r3 in r3s {
        let r = JointLengths::new(r3 + 2.0, r3 + 1.0, r3)?;
        let rep = dkp(g, ModeId::I1, &r, &DkpOptions::default())?;
        let mut worst = 0.0f64;
        for s in &rep.solutions {
            let x = s.point.normalized().x;
            let xn = x.map(|v| v / proj::norm(&x));
            let best = targets.iter().map(|w| sign_dist(&xn, w)).fold(f64::INFINITY, f64::min);
            worst = worst.max(best);
        }
        if rep.solutions.is_empty() {
            worst = f64::NAN;
        }
        errs.push(worst);
    }
    let pts: Vec<(f64, f64)> = r3s.iter().zip(&errs).map(|(r, e)| (r.ln(), e.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok((sxy / sxx, errs))
}

fn check_scans(rep: &mut VerifyReport, seed: u64) {
    let g = PlatformGeometry::default_for(Architecture::Rps3);
    let options = DkpOptions { starts: 64, seed, ..Default::default() };
    let mut eights = Vec::new();
    let mut nested = true;
    for r3 in [50.0, 10.0] {
        let cfg = ScanConfig { mode: ModeId::I1, r3, window: (r3 - 3.0, r3 + 3.0), resolution: 40, options, jobs: 1 };
        match scan_grid(&g, &cfg) {
            Ok(res) => {
                eights.push(res.cells_with_count(8).len());
                if r3 == 50.0 {
                    nested = res.region_inside_hull(8, 4);
                }
            }
            Err(e) => {
                rep.push("scan deltoid region", false, e.to_string());
                return;
            }
        }
    }
    rep.push(
        "scan deltoid region",
        nested && eights[0] > 0 && eights[0] < eights[1],
        format!(
            "8-count cells {} at r3=50 (inside hull of 4-count: {nested}), {} at r3=10, 40x40 grid",
            eights[0], eights[1]
        ),
    );
}
