//! The blow-up `Bl_E(S)` of the Study quadric along the exceptional 3-plane
//! `E = {x = 0}`, the product compactification `P³ × P³`, and the maps
//! `σ: P³ × P³ → Bl_E(S)` and `τ = σ⁻¹`.

use nalgebra::Vector3;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::proj;
use crate::study::{quaternion_from_rotation, RigidMotion, StudyPoint, EXCEPTIONAL_EPS};
use crate::DEFAULT_TOL;

/// A point `([x, y], [w])` of `P⁷ × P³`, on the blow-up when its
/// [`residuals`](BlowupPoint::residuals) vanish.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupPoint {
    pub xy: [f64; 8],
    pub w: [f64; 4],
}

impl BlowupPoint {
    pub fn new(xy: [f64; 8], w: [f64; 4]) -> Result<Self> {
        if xy.iter().all(|v| *v == 0.0) || w.iter().all(|v| *v == 0.0) {
            return Err(Error::ZeroPoint);
        }
        Ok(BlowupPoint { xy, w })
    }

    pub fn x(&self) -> [f64; 4] {
        [self.xy[0], self.xy[1], self.xy[2], self.xy[3]]
    }

    pub fn y(&self) -> [f64; 4] {
        [self.xy[4], self.xy[5], self.xy[6], self.xy[7]]
    }

    pub fn normalized(&self) -> Self {
        BlowupPoint {
            xy: proj::canonical(&self.xy).expect("nonzero"),
            w: proj::canonical(&self.w).expect("nonzero"),
        }
    }

    /// The eight defining equations on unit representatives:
    /// `Σxᵢyᵢ`, `Σyᵢwᵢ`, then `xᵢwⱼ - xⱼwᵢ` for `i < j`.
    pub fn residuals(&self) -> [f64; 8] {
        let mut xy = self.xy;
        let mut w = self.w;
        proj::normalize_in_place(&mut xy);
        proj::normalize_in_place(&mut w);
        let x = &xy[..4];
        let y = &xy[4..];
        let mut out = [0.0; 8];
        out[0] = proj::dot(x, y);
        out[1] = proj::dot(y, &w);
        let mut k = 2;
        for i in 0..4 {
            for j in (i + 1)..4 {
                out[k] = x[i] * w[j] - x[j] * w[i];
                k += 1;
            }
        }
        out
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals().iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        self.max_residual() <= tol
    }

    pub fn is_boundary(&self, tol: f64) -> bool {
        let n = proj::norm(&self.xy);
        proj::norm(&self.x()) <= tol * n
    }

    /// The boundary point `(w, y)` when `x = 0`, with the representative of
    /// `(w, y)` as stored.
    pub fn boundary_point(&self, tol: f64) -> Option<BoundaryPoint> {
        if !self.is_boundary(tol) {
            return None;
        }
        BoundaryPoint::new(self.w, self.y()).ok()
    }

    pub fn proj_eq(&self, other: &BlowupPoint, tol: f64) -> bool {
        proj::proj_eq(&self.xy, &other.xy, tol) && proj::proj_eq(&self.w, &other.w, tol)
    }
}

#[derive(Serialize, Deserialize)]
struct BlowupRepr {
    xy: [f64; 8],
    w: [f64; 4],
}

impl Serialize for BlowupPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.normalized();
        BlowupRepr { xy: n.xy, w: n.w }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BlowupPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = BlowupRepr::deserialize(d)?;
        BlowupPoint::new(r.xy, r.w).map_err(serde::de::Error::custom)
    }
}

/// A point `(w, y)` of the exceptional divisor with `|w| = |y| = 1` and
/// `Σwᵢyᵢ = 0`.
///
/// The joint sign of the pair is meaningful: `(w, y)` and `(w, -y)` have
/// opposite translation directions. Constructors keep the sign given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub w: [f64; 4],
    pub y: [f64; 4],
}

impl BoundaryPoint {
    /// Normalizes both factors; fails when either is zero or the bilinear
    /// residual exceeds the default tolerance.
    pub fn new(w: [f64; 4], y: [f64; 4]) -> Result<Self> {
        let mut w = w;
        let mut y = y;
        if !proj::normalize_in_place(&mut w) || !proj::normalize_in_place(&mut y) {
            return Err(Error::ZeroPoint);
        }
        let b = BoundaryPoint { w, y };
        let r = b.bilinear_residual();
        if r.abs() > DEFAULT_TOL {
            return Err(Error::NotOnBlowup(r));
        }
        Ok(b)
    }

    pub fn bilinear_residual(&self) -> f64 {
        proj::dot(&self.w, &self.y)
    }

    /// The same boundary point with the opposite orientation of `u`.
    pub fn flipped(&self) -> Self {
        BoundaryPoint {
            w: self.w,
            y: self.y.map(|v| -v),
        }
    }

    pub fn to_blowup(&self) -> BlowupPoint {
        let y = self.y;
        BlowupPoint {
            xy: [0.0, 0.0, 0.0, 0.0, y[0], y[1], y[2], y[3]],
            w: self.w,
        }
    }

    /// Equality as points of the divisor (independent signs on `w` and `y`).
    pub fn proj_eq(&self, other: &BoundaryPoint, tol: f64) -> bool {
        proj::proj_eq(&self.w, &other.w, tol) && proj::proj_eq(&self.y, &other.y, tol)
    }
}

/// A point `([w], [r, s, t, u])` of `P³ × P³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductPoint {
    pub w: [f64; 4],
    pub rstu: [f64; 4],
}

impl ProductPoint {
    pub fn new(w: [f64; 4], rstu: [f64; 4]) -> Result<Self> {
        if w.iter().all(|v| *v == 0.0) || rstu.iter().all(|v| *v == 0.0) {
            return Err(Error::ZeroPoint);
        }
        Ok(ProductPoint { w, rstu })
    }

    pub fn normalized(&self) -> Self {
        ProductPoint {
            w: proj::canonical(&self.w).expect("nonzero"),
            rstu: proj::canonical(&self.rstu).expect("nonzero"),
        }
    }

    pub fn proj_eq(&self, other: &ProductPoint, tol: f64) -> bool {
        proj::proj_eq(&self.w, &other.w, tol) && proj::proj_eq(&self.rstu, &other.rstu, tol)
    }
}

/// `β(m)`: the rotation quaternion and `[1, t]`.
pub fn beta(m: &RigidMotion) -> ProductPoint {
    let t = m.translation;
    ProductPoint {
        w: quaternion_from_rotation(&m.rotation),
        rstu: [1.0, t.x, t.y, t.z],
    }
}

pub fn lift(p: &StudyPoint) -> Result<BlowupPoint> {
    let rel = p.relative_delta();
    if rel <= EXCEPTIONAL_EPS {
        return Err(Error::ExceptionalPoint(rel));
    }
    Ok(BlowupPoint {
        xy: p.coords(),
        w: p.x,
    })
}

pub fn sigma(p: &ProductPoint) -> BlowupPoint {
    let w = p.w;
    let [r, s, t, u] = p.rstu;
    let x = w.map(|v| v * r);
    let y = [
        0.5 * (-w[1] * s - w[2] * t - w[3] * u),
        0.5 * (w[0] * s + w[3] * t - w[2] * u),
        0.5 * (-w[3] * s + w[0] * t + w[1] * u),
        0.5 * (w[2] * s - w[1] * t + w[0] * u),
    ];
    BlowupPoint {
        xy: [x[0], x[1], x[2], x[3], y[0], y[1], y[2], y[3]],
        w,
    }
}

/// Inverse of [`sigma`]; `b` must satisfy the blow-up equations to `tol`.
pub fn tau(b: &BlowupPoint, tol: f64) -> Result<ProductPoint> {
    let res = b.max_residual();
    if res > tol {
        return Err(Error::NotOnBlowup(res));
    }
    let w = b.w;
    let x = b.x();
    let y = b.y();
    let rstu = [
        proj::dot(&w, &x),
        2.0 * (-w[1] * y[0] + w[0] * y[1] - w[3] * y[2] + w[2] * y[3]),
        2.0 * (-w[2] * y[0] + w[3] * y[1] + w[0] * y[2] - w[1] * y[3]),
        2.0 * (-w[3] * y[0] - w[2] * y[1] + w[1] * y[2] + w[0] * y[3]),
    ];
    ProductPoint::new(w, rstu)
}

/// Translation direction `u(w, y)` of a boundary point.
pub fn direction_vector(b: &BoundaryPoint) -> Vector3<f64> {
    let (w, y) = (&b.w, &b.y);
    Vector3::new(
        w[0] * y[1] - w[1] * y[0] + w[2] * y[3] - w[3] * y[2],
        w[0] * y[2] - w[1] * y[3] - w[2] * y[0] + w[3] * y[1],
        w[0] * y[3] + w[1] * y[2] - w[2] * y[1] - w[3] * y[0],
    )
}

/// Default scale schedule for [`boundary_limit`]: `10⁰, 10¹, …, 10¹²`.
pub fn default_schedule() -> Vec<f64> {
    (0..=12).map(|k| 10f64.powi(k)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryLimit {
    pub point: BoundaryPoint,
    /// Distance of each lifted motion in the schedule to the limit point.
    pub distances: Vec<f64>,
}

/// Limit on the exceptional divisor of the lifts of `v ↦ R v + t + s·dir` as
/// `s → ∞` along `schedule`.
pub fn boundary_limit(m: &RigidMotion, dir: &Vector3<f64>, schedule: &[f64]) -> Result<BoundaryLimit> {
    const STEP_TOL: f64 = 1e-8;
    let n = dir.norm();
    if (n - 1.0).abs() > 1e-9 || schedule.len() < 2 {
        return Err(Error::Unsupported("direction must be a unit vector and schedule nonempty".into()));
    }
    let q = quaternion_from_rotation(&m.rotation);
    let lifted: Vec<[f64; 8]> = schedule
        .iter()
        .map(|&s| {
            let t = m.translation + dir * s;
            let y = crate::quaternion::qmul(&[0.0, t.x, t.y, t.z], &q).map(|v| 0.5 * v);
            let mut c = [q[0], q[1], q[2], q[3], y[0], y[1], y[2], y[3]];
            proj::normalize_in_place(&mut c);
            c
        })
        .collect();
    let last = lifted[lifted.len() - 1];
    let step = proj::proj_dist(&lifted[lifted.len() - 2], &last);
    if step >= STEP_TOL {
        return Err(Error::NoConvergence(step));
    }
    let y = [last[4], last[5], last[6], last[7]];
    let point = BoundaryPoint::new(q, y)?;
    let limit = point.to_blowup();
    let distances = lifted
        .iter()
        .map(|c| proj::proj_dist(c, &limit.xy))
        .collect();
    Ok(BoundaryLimit { point, distances })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::study::study_from_motion;
    use nalgebra::Matrix3;

    #[test]
    fn lift_examples() {
        let b = lift(&StudyPoint::IDENTITY).unwrap();
        assert_eq!(b.w, [1.0, 0.0, 0.0, 0.0]);
        let p = StudyPoint::from_coords([1.0, 0.0, 0.0, 0.0, 0.0, 0.3, -0.2, 4.0]).unwrap();
        let b = lift(&p).unwrap();
        assert_eq!(b.w, [1.0, 0.0, 0.0, 0.0]);
        assert!(b.is_valid(1e-15));
        let e = StudyPoint::from_coords([0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(lift(&e).is_err());
    }

    #[test]
    fn sigma_examples() {
        let b = sigma(&ProductPoint::new([1.0, 0.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0]).unwrap());
        assert_eq!(b.xy, [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(b.w, [1.0, 0.0, 0.0, 0.0]);

        let b = sigma(&ProductPoint::new([0.3, -0.1, 0.5, 0.2], [0.0, 1.0, 2.0, -1.0]).unwrap());
        assert_eq!(b.x(), [0.0; 4]);
        assert!(b.is_valid(1e-14));
    }

    #[test]
    fn tau_examples() {
        let p = tau(&lift(&StudyPoint::IDENTITY).unwrap(), DEFAULT_TOL).unwrap();
        assert_eq!(p.w, [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(p.rstu, [1.0, 0.0, 0.0, 0.0]);

        let t = Vector3::new(1.5, -2.0, 0.25);
        let s = study_from_motion(&RigidMotion::translation(t)).unwrap();
        let p = tau(&lift(&s).unwrap(), DEFAULT_TOL).unwrap();
        assert!(proj::proj_eq(&p.rstu, &[1.0, 1.5, -2.0, 0.25], 1e-14));

        let b = BlowupPoint::new([0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(tau(&b, DEFAULT_TOL).unwrap().rstu[0], 0.0);

        let bad = BlowupPoint::new([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(tau(&bad, DEFAULT_TOL), Err(Error::NotOnBlowup(_))));
    }

    #[test]
    fn direction_vector_examples() {
        let b = BoundaryPoint::new([1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(direction_vector(&b), Vector3::new(1.0, 0.0, 0.0));
        let (w1, w2, w3) = (0.6, 0.48, 0.64);
        let b = BoundaryPoint::new([0.0, w1, w2, w3], [w1, 0.0, w3, -w2]).unwrap();
        assert!((direction_vector(&b) - Vector3::new(-1.0, 0.0, 0.0)).norm() < 1e-15);
        let b = BoundaryPoint::new([0.0, w1, w2, w3], [1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((direction_vector(&b) + Vector3::new(w1, w2, w3)).norm() < 1e-15);
    }

    #[test]
    fn boundary_limit_examples() {
        let v = Vector3::new(0.0, 0.0, 1.0);
        let l = boundary_limit(&RigidMotion::identity(), &v, &default_schedule()).unwrap();
        assert!(proj::proj_eq(&l.point.w, &[1.0, 0.0, 0.0, 0.0], 1e-14));
        assert!((direction_vector(&l.point) - v).norm() < 1e-12);

        let half_z = RigidMotion::new(Matrix3::from_diagonal(&Vector3::new(-1.0, -1.0, 1.0)), Vector3::new(0.3, 0.0, 2.0)).unwrap();
        let l = boundary_limit(&half_z, &v, &default_schedule()).unwrap();
        assert!(proj::proj_eq(&l.point.w, &[0.0, 0.0, 0.0, 1.0], 1e-14));
        assert!((direction_vector(&l.point) - v).norm() < 1e-9);
        assert!(l.distances.windows(2).all(|d| d[1] <= d[0]));
    }

    #[test]
    fn boundary_limit_reports_nonconvergence() {
        let v = Vector3::new(1.0, 0.0, 0.0);
        let m = RigidMotion::translation(Vector3::new(5.0, 5.0, 5.0));
        let short = [1.0, 10.0, 100.0];
        assert!(matches!(boundary_limit(&m, &v, &short), Err(Error::NoConvergence(_))));
    }
}
