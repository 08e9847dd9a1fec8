//! Numerical direct kinematics: multistart damped Newton on the unknowns
//! `(q, t)` with `q` a unit quaternion and `t` the translation.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::newton::{solve, NewtonOptions, System, N};
use super::{ikm, JointLengths};
use crate::error::{Error, Result};
use crate::poly::{point12, GeneratorSet, NVARS};
use crate::quaternion::qmul;
use crate::robots::{constraint_forms, limb_forms, rps_planar_translation, ModeId, PlatformGeometry, RADIAL};
use crate::scalar::Scalar;
use crate::study::{delta, motion_from_study, rotation_matrix_of, to_matrix, StudyPoint};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DkpOptions {
    pub starts: usize,
    pub seed: u64,
    pub newton: NewtonOptions,
    /// A Newton run counts as converged below this residual.
    pub accept_tol: f64,
    /// Projective distance below which two roots are merged.
    pub dedup_tol: f64,
}

impl Default for DkpOptions {
    fn default() -> Self {
        DkpOptions {
            starts: 512,
            seed: 0,
            newton: NewtonOptions::default(),
            accept_tol: 1e-10,
            dedup_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DkpSolution {
    pub point: StudyPoint,
    pub mode: ModeId,
    pub residual: f64,
    /// First coordinate of the image of the platform centroid.
    pub z: f64,
    /// Jacobian close to rank deficient at the root.
    pub near_singular: bool,
    /// Another root lies within `1e-3` projective distance.
    pub near_coincident: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DkpReport {
    pub solutions: Vec<DkpSolution>,
    pub starts: usize,
    pub converged: usize,
    /// Smallest residual among runs that did not converge.
    pub best_unconverged: f64,
    pub diagnostic: Option<String>,
}

struct DkpSystem<'a> {
    g: &'a PlatformGeometry,
    gens: Option<&'a GeneratorSet>,
    constraints: bool,
    r: [f64; 3],
}

impl DkpSystem<'_> {
    fn r_scale(&self) -> f64 {
        (self.r.iter().sum::<f64>() / 3.0).max(1.0)
    }

    fn n_gens(&self) -> usize {
        self.gens.map_or(0, |g| g.polys.len())
    }
}

impl System for DkpSystem<'_> {
    fn len(&self) -> usize {
        4 + self.n_gens() + if self.constraints { 3 } else { 0 }
    }

    fn eval<T: Scalar>(&self, v: &[T; N], out: &mut [T]) {
        let x = [v[0], v[1], v[2], v[3]];
        let tq = [T::zero(), v[4], v[5], v[6]];
        let y = qmul(&tq, &x).map(|c| c.scale(0.5));
        let d = delta(&x);
        out[0] = d - T::cst(1.0);
        let limbs = limb_forms(self.g, &x, &y);
        for i in 0..3 {
            let l = &limbs[i];
            let sq = (l[0] * l[0] + l[1] * l[1] + l[2] * l[2]) / (d * d);
            out[1 + i] = (sq - T::cst(self.r[i] * self.r[i])).scale(0.5 / self.r[i]);
        }
        let np = (d + delta(&y)).sqrt();
        let mut k = 4;
        if let Some(gens) = self.gens {
            let mut p = [T::zero(); NVARS];
            p[..4].copy_from_slice(&x);
            p[4..8].copy_from_slice(&y);
            let m = gens.polys.len();
            gens.eval_into(&p, &mut out[k..k + m]);
            for (j, &(deg, _)) in gens.degrees.iter().enumerate() {
                out[k + j] = out[k + j] / np.powi(deg);
            }
            k += m;
        }
        if self.constraints {
            // Affine constraint values relative to the limb length; dividing
            // by |p|^deg instead would shrink them like r^(1-deg).
            let c = constraint_forms(self.g, &x, &y);
            let deg = self.g.architecture.constraint_degree();
            let s = d.powi(deg / 2).scale(self.r_scale());
            for i in 0..3 {
                out[k + i] = c[i] / s;
            }
        }
    }

    fn project(&self, v: &mut [f64; N]) {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]).sqrt();
        if n > 0.0 {
            for c in v.iter_mut().take(4) {
                *c /= n;
            }
        }
    }
}

fn system_for<'a>(g: &'a PlatformGeometry, mode: ModeId, r: &JointLengths) -> Result<DkpSystem<'a>> {
    if !mode.belongs_to(g.architecture) {
        return Err(Error::ModeArchitecture {
            mode: mode.name().into(),
            architecture: g.architecture.name().into(),
        });
    }
    g.require_default()?;
    match mode {
        ModeId::K7 => Err(Error::Unsupported("K7 has no real 3-dimensional part".into())),
        ModeId::K8 => Ok(DkpSystem {
            g,
            gens: None,
            constraints: true,
            r: r.to_array(),
        }),
        m => Ok(DkpSystem {
            g,
            gens: m.generator_set(),
            constraints: false,
            r: r.to_array(),
        }),
    }
}

fn unknowns_to_point(v: &[f64; N]) -> StudyPoint {
    let x = [v[0], v[1], v[2], v[3]];
    let y = qmul(&[0.0, v[4], v[5], v[6]], &x).map(|c| 0.5 * c);
    StudyPoint { x, y }
}

fn point_to_unknowns(p: &StudyPoint) -> Result<[f64; N]> {
    let m = motion_from_study(p)?;
    let n = p.delta().sqrt();
    let t = m.translation;
    Ok([p.x[0] / n, p.x[1] / n, p.x[2] / n, p.x[3] / n, t.x, t.y, t.z])
}

/// Intersection of the spheres `|t - cᵢ| = rᵢ`; `upper` selects the branch.
/// Falls back to the least-squares foot point when the spheres miss.
pub(crate) fn trilaterate(c: &[Vector3<f64>; 3], r: &[f64; 3], upper: bool) -> Vector3<f64> {
    let e01 = c[1] - c[0];
    let d = e01.norm();
    if d < 1e-12 {
        return c[0] + Vector3::x() * r[0];
    }
    let ex = e01 / d;
    let e02 = c[2] - c[0];
    let i = ex.dot(&e02);
    let rest = e02 - ex * i;
    let jn = rest.norm();
    if jn < 1e-12 {
        return c[0] + ex * ((r[0] * r[0] - r[1] * r[1] + d * d) / (2.0 * d));
    }
    let ey = rest / jn;
    let ez = ex.cross(&ey);
    let px = (r[0] * r[0] - r[1] * r[1] + d * d) / (2.0 * d);
    let py = (r[0] * r[0] - r[2] * r[2] + i * i + jn * jn) / (2.0 * jn) - i * px / jn;
    let pz = (r[0] * r[0] - px * px - py * py).max(0.0).sqrt();
    let s = if upper { 1.0 } else { -1.0 };
    c[0] + ex * px + ey * py + ez * (s * pz)
}

/// A seed with rotation `q` and translation placing the limbs at lengths `r`.
pub(crate) fn seed_unknowns(g: &PlatformGeometry, r: &JointLengths, q: &[f64; 4], upper: bool) -> [f64; N] {
    let n = (delta(q)).sqrt();
    let q = q.map(|v| v / n);
    let rot = to_matrix(&rotation_matrix_of(&q));
    let c: [Vector3<f64>; 3] = std::array::from_fn(|i| {
        let rho = Vector3::from(RADIAL[i]);
        rho * g.k1 - rot * rho * g.k2
    });
    let t = trilaterate(&c, &r.to_array(), upper);
    [q[0], q[1], q[2], q[3], t.x, t.y, t.z]
}

/// 3-RPS seed: for rotation `q`, the horizontal translation solves the
/// tangent constraints (linear in `t`) in least squares, and the height fits
/// the limb lengths on the branch `upper`.
pub(crate) fn seed_unknowns_rps(g: &PlatformGeometry, r: &JointLengths, q: &[f64; 4], upper: bool) -> [f64; N] {
    let n = (delta(q)).sqrt();
    let q = q.map(|v| v / n);
    let rot = to_matrix(&rotation_matrix_of(&q));
    let yz = rps_planar_translation(g, &rot);
    let rb: [Vector3<f64>; 3] = std::array::from_fn(|i| rot * Vector3::from(RADIAL[i]) * g.k2);
    let s = if upper { 1.0 } else { -1.0 };
    let rr = r.to_array();
    let mut h = 0.0;
    for i in 0..3 {
        let rho = Vector3::from(RADIAL[i]);
        let off = Vector3::new(0.0, yz.x, yz.y) + rb[i] - rho * g.k1;
        let horiz = off.y * off.y + off.z * off.z;
        h += -rb[i].x + s * (rr[i] * rr[i] - horiz).max(0.0).sqrt();
    }
    [q[0], q[1], q[2], q[3], h / 3.0, yz.x, yz.y]
}

/// Study point with rotation `q` and a translation realizing the lengths `r`
/// as nearly as possible (one of the two mirror branches).
pub fn seed_from_rotation(g: &PlatformGeometry, r: &JointLengths, q: &[f64; 4], upper: bool) -> Result<StudyPoint> {
    if q.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroQuaternion);
    }
    Ok(unknowns_to_point(&seed_unknowns(g, r, q, upper)))
}

fn random_rotation<R: Rng>(rng: &mut R, zeros: &[usize]) -> [f64; 4] {
    loop {
        let mut q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        for &z in zeros {
            q[z] = 0.0;
        }
        let n = delta(&q).sqrt();
        if n > 1e-6 {
            return q.map(|v| v / n);
        }
        if zeros.len() == 4 {
            return [1.0, 0.0, 0.0, 0.0];
        }
    }
}

/// True when `p` lies on one of the 3-plane modes `K1..K4`.
fn in_planar_tsai_mode(p: &StudyPoint, tol: f64) -> bool {
    let pt = point12(&p.x, &p.y, &[0.0; 4]);
    [ModeId::K1, ModeId::K2, ModeId::K3, ModeId::K4]
        .iter()
        .any(|m| m.generator_set().unwrap().residual_norm(&pt) < tol)
}

struct Candidate {
    sol: DkpSolution,
}

fn finish(
    sys: &DkpSystem<'_>,
    mode: ModeId,
    r: &JointLengths,
    res: &super::newton::NewtonResult,
    opts: &DkpOptions,
) -> Option<DkpSolution> {
    if !(res.residual < opts.accept_tol) {
        return None;
    }
    let raw = unknowns_to_point(&res.x);
    let got = ikm(sys.g, &raw).ok()?;
    if got.rel_error(r) > 1e-8 {
        return None;
    }
    if mode == ModeId::K8 && in_planar_tsai_mode(&raw, 1e-8) {
        return None;
    }
    let z = res.x[4];
    Some(DkpSolution {
        point: raw.normalized(),
        mode,
        residual: res.residual,
        z,
        near_singular: res.conditioning < 1e-8,
        near_coincident: false,
    })
}

fn insert(cands: &mut Vec<Candidate>, sol: DkpSolution, dedup: f64) {
    for c in cands.iter_mut() {
        if c.sol.point.proj_dist(&sol.point) < dedup {
            if sol.residual < c.sol.residual {
                c.sol = sol;
            }
            return;
        }
    }
    cands.push(Candidate { sol });
}

fn multistart(sys: &DkpSystem<'_>, mode: ModeId, r: &JointLengths, opts: &DkpOptions) -> DkpReport {
    let zeros: Vec<usize> = sys
        .gens
        .map(|g| g.coordinate_zeros().into_iter().filter(|&i| i < 4).collect())
        .unwrap_or_default();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut cands: Vec<Candidate> = Vec::new();
    let mut converged = 0;
    let mut best_unconverged = f64::INFINITY;
    for _ in 0..opts.starts {
        let q = random_rotation(&mut rng, &zeros);
        let upper = rng.gen::<bool>();
        let start = if sys.g.architecture == crate::robots::Architecture::Rps3 {
            seed_unknowns_rps(sys.g, r, &q, upper)
        } else {
            seed_unknowns(sys.g, r, &q, upper)
        };
        let res = solve(sys, start, &opts.newton);
        match finish(sys, mode, r, &res, opts) {
            Some(sol) => {
                converged += 1;
                insert(&mut cands, sol, opts.dedup_tol);
            }
            None => best_unconverged = best_unconverged.min(res.residual),
        }
    }
    let mut solutions: Vec<DkpSolution> = cands.into_iter().map(|c| c.sol).collect();
    let n = solutions.len();
    for a in 0..n {
        for b in 0..n {
            if a != b && solutions[a].point.proj_dist(&solutions[b].point) < 1e-3 {
                solutions[a].near_coincident = true;
            }
        }
    }
    solutions.sort_by(|a, b| {
        a.z.partial_cmp(&b.z)
            .unwrap()
            .then_with(|| a.point.coords().partial_cmp(&b.point.coords()).unwrap())
    });
    let diagnostic = (converged == 0).then(|| {
        format!(
            "no start converged in {} starts (best residual {:.3e})",
            opts.starts, best_unconverged
        )
    });
    DkpReport {
        solutions,
        starts: opts.starts,
        converged,
        best_unconverged,
        diagnostic,
    }
}

/// All real solutions of the DKP of `mode` at lengths `r` found by
/// multistart Newton. `K8` only supports [`dkp_refine`] and [`k8_sweep`].
pub fn dkp(g: &PlatformGeometry, mode: ModeId, r: &JointLengths, opts: &DkpOptions) -> Result<DkpReport> {
    if mode == ModeId::K8 {
        return Err(Error::Unsupported(
            "global DKP of K8 is not supported; use dkp_refine or k8_sweep".into(),
        ));
    }
    let sys = system_for(g, mode, r)?;
    Ok(multistart(&sys, mode, r, opts))
}

/// Newton refinement from `seed`.
pub fn dkp_refine(g: &PlatformGeometry, mode: ModeId, r: &JointLengths, seed: &StudyPoint) -> Result<DkpSolution> {
    let sys = system_for(g, mode, r)?;
    let opts = DkpOptions::default();
    let start = point_to_unknowns(seed)?;
    let res = solve(&sys, start, &opts.newton);
    finish(&sys, mode, r, &res, &opts).ok_or_else(|| {
        if res.residual < opts.accept_tol && mode == ModeId::K8 {
            Error::Solver("refinement converged to a point of K1..K4".into())
        } else {
            Error::Solver(format!(
                "refinement diverged (residual {:.3e} after {} iterations)",
                res.residual, res.iterations
            ))
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub r1: f64,
    /// Number of distinct roots found; a lower bound on the real count.
    pub count_lower_bound: usize,
    pub solutions: Vec<DkpSolution>,
}

/// DKP of `K8` along `r = (r1, r23, r23)` with the constraint equations
/// (the printed generator list is partial), excluding roots on `K1..K4`.
pub fn k8_sweep(g: &PlatformGeometry, r1_values: &[f64], r23: f64, opts: &DkpOptions) -> Result<Vec<SweepPoint>> {
    r1_values
        .iter()
        .map(|&r1| {
            let r = JointLengths::new(r1, r23, r23)?;
            let sys = system_for(g, ModeId::K8, &r)?;
            let rep = multistart(&sys, ModeId::K8, &r, opts);
            Ok(SweepPoint {
                r1,
                count_lower_bound: rep.solutions.len(),
                solutions: rep.solutions,
            })
        })
        .collect()
}
