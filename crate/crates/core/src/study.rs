//! Study coordinates `[x0..x3, y0..y3]` of rigid motions, the rigid motions
//! themselves and their representation as rotations over the dual numbers.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::proj;
use crate::quaternion::{qconj, qmul};
use crate::scalar::Scalar;
use crate::DEFAULT_TOL;

/// Relative size `Δ(x)/|(x,y)|²` below which a point counts as exceptional.
pub const EXCEPTIONAL_EPS: f64 = 1e-12;

/// `Δ(x) = x0² + x1² + x2² + x3²`.
#[inline]
pub fn delta<T: Scalar>(x: &[T; 4]) -> T {
    x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]
}

/// Homogeneous rotation matrix `R(x)`; `R(x)/Δ(x)` is a proper rotation.
#[inline]
pub fn rotation_matrix_of<T: Scalar>(x: &[T; 4]) -> [[T; 3]; 3] {
    let [x0, x1, x2, x3] = *x;
    let (s0, s1, s2, s3) = (x0 * x0, x1 * x1, x2 * x2, x3 * x3);
    [
        [
            s0 + s1 - s2 - s3,
            (x1 * x2 - x0 * x3).scale(2.0),
            (x1 * x3 + x0 * x2).scale(2.0),
        ],
        [
            (x1 * x2 + x0 * x3).scale(2.0),
            s0 - s1 + s2 - s3,
            (x2 * x3 - x0 * x1).scale(2.0),
        ],
        [
            (x1 * x3 - x0 * x2).scale(2.0),
            (x2 * x3 + x0 * x1).scale(2.0),
            s0 - s1 - s2 + s3,
        ],
    ]
}

/// Homogeneous translation vector `t(x,y)`; `t(x,y)/Δ(x)` is the translation.
#[inline]
pub fn translation_vector_of<T: Scalar>(x: &[T; 4], y: &[T; 4]) -> [T; 3] {
    [
        (x[0] * y[1] - x[1] * y[0] + x[2] * y[3] - x[3] * y[2]).scale(2.0),
        (x[0] * y[2] - x[1] * y[3] - x[2] * y[0] + x[3] * y[1]).scale(2.0),
        (x[0] * y[3] + x[1] * y[2] - x[2] * y[1] - x[3] * y[0]).scale(2.0),
    ]
}

/// [`rotation_matrix_of`] as a matrix; divide by `Δ(x)` for the rotation.
pub fn rotation_matrix(x: &[f64; 4]) -> Result<Matrix3<f64>> {
    if x.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroQuaternion);
    }
    Ok(to_matrix(&rotation_matrix_of(x)))
}

/// [`translation_vector_of`] as a vector; divide by `Δ(x)` for the translation.
pub fn translation_vector(x: &[f64; 4], y: &[f64; 4]) -> Result<Vector3<f64>> {
    if x.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroQuaternion);
    }
    Ok(Vector3::from(translation_vector_of(x, y)))
}

pub(crate) fn to_matrix(m: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::new(
        m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
    )
}

/// Skew matrix `Ω_t` with `Ω_t v = t × v`.
pub fn skew(t: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -t.z, t.y, t.z, 0.0, -t.x, -t.y, t.x, 0.0)
}

/// A point of `P⁷` with coordinates `[x0..x3, y0..y3]`.
///
/// Coordinates are kept as given; [`StudyPoint::normalized`] returns the
/// canonical representative (unit norm, first nonzero coordinate positive).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyPoint {
    pub x: [f64; 4],
    pub y: [f64; 4],
}

impl StudyPoint {
    pub const IDENTITY: StudyPoint = StudyPoint {
        x: [1.0, 0.0, 0.0, 0.0],
        y: [0.0; 4],
    };

    pub fn new(x: [f64; 4], y: [f64; 4]) -> Result<Self> {
        if x.iter().chain(&y).all(|v| *v == 0.0) {
            return Err(Error::ZeroPoint);
        }
        Ok(StudyPoint { x, y })
    }

    pub fn from_coords(c: [f64; 8]) -> Result<Self> {
        StudyPoint::new([c[0], c[1], c[2], c[3]], [c[4], c[5], c[6], c[7]])
    }

    pub fn coords(&self) -> [f64; 8] {
        let (x, y) = (self.x, self.y);
        [x[0], x[1], x[2], x[3], y[0], y[1], y[2], y[3]]
    }

    pub fn normalized(&self) -> Self {
        let c = proj::canonical(&self.coords()).expect("nonzero study point");
        StudyPoint::from_coords(c).expect("nonzero")
    }

    pub fn delta(&self) -> f64 {
        delta(&self.x)
    }

    /// `Δ(x) / |(x,y)|²`.
    pub fn relative_delta(&self) -> f64 {
        let n = proj::norm(&self.coords());
        self.delta() / (n * n)
    }

    /// `Σ xᵢyᵢ` on the unit representative.
    pub fn quadric_residual(&self) -> f64 {
        let n = proj::norm(&self.coords());
        proj::dot(&self.x, &self.y) / (n * n)
    }

    pub fn on_quadric(&self, tol: f64) -> bool {
        self.quadric_residual().abs() <= tol
    }

    pub fn is_exceptional(&self) -> bool {
        self.relative_delta() <= EXCEPTIONAL_EPS
    }

    pub fn proj_eq(&self, other: &StudyPoint, tol: f64) -> bool {
        proj::proj_eq(&self.coords(), &other.coords(), tol)
    }

    pub fn proj_dist(&self, other: &StudyPoint) -> f64 {
        proj::proj_dist(&self.coords(), &other.coords())
    }

    pub(crate) fn check_motion(&self) -> Result<()> {
        let rel = self.relative_delta();
        if rel <= EXCEPTIONAL_EPS {
            Err(Error::ExceptionalPoint(rel))
        } else {
            Ok(())
        }
    }
}

impl Serialize for StudyPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.normalized().coords().serialize(s)
    }
}

impl<'de> Deserialize<'de> for StudyPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let c = <[f64; 8]>::deserialize(d)?;
        StudyPoint::from_coords(c).map_err(serde::de::Error::custom)
    }
}

/// The rigid motion `v ↦ R v + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidMotion {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

fn rotation_error(r: &Matrix3<f64>) -> f64 {
    let orth = (r.transpose() * r - Matrix3::identity()).abs().max();
    orth.max((r.determinant() - 1.0).abs())
}

impl RigidMotion {
    pub fn identity() -> Self {
        RigidMotion {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        RigidMotion::with_tolerance(rotation, translation, DEFAULT_TOL)
    }

    pub fn with_tolerance(rotation: Matrix3<f64>, translation: Vector3<f64>, tol: f64) -> Result<Self> {
        let err = rotation_error(&rotation);
        if !(err <= tol) {
            return Err(Error::NotRotation(err));
        }
        Ok(RigidMotion { rotation, translation })
    }

    pub fn translation(t: Vector3<f64>) -> Self {
        RigidMotion {
            rotation: Matrix3::identity(),
            translation: t,
        }
    }

    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * v + self.translation
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &RigidMotion) -> RigidMotion {
        RigidMotion {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidMotion {
        let rt = self.rotation.transpose();
        RigidMotion {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }
}

impl Serialize for RigidMotion {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            rotation: [[f64; 3]; 3],
            translation: [f64; 3],
        }
        let r = &self.rotation;
        Repr {
            rotation: [
                [r[(0, 0)], r[(0, 1)], r[(0, 2)]],
                [r[(1, 0)], r[(1, 1)], r[(1, 2)]],
                [r[(2, 0)], r[(2, 1)], r[(2, 2)]],
            ],
            translation: [self.translation.x, self.translation.y, self.translation.z],
        }
        .serialize(s)
    }
}

/// JSON form of a rigid motion, validated on conversion.
#[derive(Debug, Clone, Deserialize)]
pub struct RigidMotionRepr {
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
}

impl RigidMotionRepr {
    pub fn into_motion(self, tol: f64) -> Result<RigidMotion> {
        RigidMotion::with_tolerance(to_matrix(&self.rotation), Vector3::from(self.translation), tol)
    }
}

pub fn motion_from_study(p: &StudyPoint) -> Result<RigidMotion> {
    p.check_motion()?;
    let d = p.delta();
    let r = to_matrix(&rotation_matrix_of(&p.x)) / d;
    let t = Vector3::from(translation_vector_of(&p.x, &p.y)) / d;
    Ok(RigidMotion {
        rotation: r,
        translation: t,
    })
}

/// Unit quaternion of a rotation matrix, by the largest-pivot method.
pub fn quaternion_from_rotation(r: &Matrix3<f64>) -> [f64; 4] {
    let tr = r.trace();
    let diag = [tr, r[(0, 0)], r[(1, 1)], r[(2, 2)]];
    let k = (0..4)
        .max_by(|&a, &b| diag[a].partial_cmp(&diag[b]).unwrap())
        .unwrap();
    let q = match k {
        0 => {
            let s = 2.0 * (1.0 + tr).sqrt();
            [
                0.25 * s,
                (r[(2, 1)] - r[(1, 2)]) / s,
                (r[(0, 2)] - r[(2, 0)]) / s,
                (r[(1, 0)] - r[(0, 1)]) / s,
            ]
        }
        1 => {
            let s = 2.0 * (1.0 + r[(0, 0)] - r[(1, 1)] - r[(2, 2)]).sqrt();
            [
                (r[(2, 1)] - r[(1, 2)]) / s,
                0.25 * s,
                (r[(0, 1)] + r[(1, 0)]) / s,
                (r[(0, 2)] + r[(2, 0)]) / s,
            ]
        }
        2 => {
            let s = 2.0 * (1.0 - r[(0, 0)] + r[(1, 1)] - r[(2, 2)]).sqrt();
            [
                (r[(0, 2)] - r[(2, 0)]) / s,
                (r[(0, 1)] + r[(1, 0)]) / s,
                0.25 * s,
                (r[(1, 2)] + r[(2, 1)]) / s,
            ]
        }
        _ => {
            let s = 2.0 * (1.0 - r[(0, 0)] - r[(1, 1)] + r[(2, 2)]).sqrt();
            [
                (r[(1, 0)] - r[(0, 1)]) / s,
                (r[(0, 2)] + r[(2, 0)]) / s,
                (r[(1, 2)] + r[(2, 1)]) / s,
                0.25 * s,
            ]
        }
    };
    let n = proj::norm(&q);
    q.map(|v| v / n)
}

pub fn study_from_motion(m: &RigidMotion) -> Result<StudyPoint> {
    let err = rotation_error(&m.rotation);
    if !(err <= DEFAULT_TOL.max(1e-9)) {
        return Err(Error::NotRotation(err));
    }
    let q = quaternion_from_rotation(&m.rotation);
    let t = [0.0, m.translation.x, m.translation.y, m.translation.z];
    let y = qmul(&t, &q).map(|v| 0.5 * v);
    Ok(StudyPoint::new(q, y)?.normalized())
}

/// Dual quaternion product `(x_p + ε y_p)(x_q + ε y_q)`; corresponds to
/// `motion(p) ∘ motion(q)`.
pub fn compose(p: &StudyPoint, q: &StudyPoint) -> Result<StudyPoint> {
    p.check_motion()?;
    q.check_motion()?;
    Ok(compose_raw(p, q))
}

pub(crate) fn compose_raw(p: &StudyPoint, q: &StudyPoint) -> StudyPoint {
    let x = qmul(&p.x, &q.x);
    let a = qmul(&p.x, &q.y);
    let b = qmul(&p.y, &q.x);
    let y = [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]];
    StudyPoint { x, y }
}

/// Inverse motion: the dual quaternion conjugate.
pub fn inverse(p: &StudyPoint) -> Result<StudyPoint> {
    p.check_motion()?;
    Ok(StudyPoint {
        x: qconj(&p.x),
        y: qconj(&p.y),
    })
}

/// `R + εM` with `R` a rotation and `M Rᵀ` skew-symmetric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualRotation {
    pub r: Matrix3<f64>,
    pub m: Matrix3<f64>,
}

impl DualRotation {
    pub fn new(r: Matrix3<f64>, m: Matrix3<f64>) -> Result<Self> {
        let err = rotation_error(&r);
        if !(err <= DEFAULT_TOL) {
            return Err(Error::NotRotation(err));
        }
        let s = m * r.transpose();
        let skew_err = (s + s.transpose()).abs().max() / (1.0 + m.abs().max());
        if !(skew_err <= DEFAULT_TOL) {
            return Err(Error::NotSkew(skew_err));
        }
        Ok(DualRotation { r, m })
    }

    /// Product over the dual numbers: `R1R2 + ε(R1M2 + M1R2)`.
    pub fn mul(&self, other: &DualRotation) -> DualRotation {
        DualRotation {
            r: self.r * other.r,
            m: self.r * other.m + self.m * other.r,
        }
    }

    /// Residual of `(R + εM)(R + εM)ᵀ = I`.
    pub fn orthogonality_error(&self) -> f64 {
        let real = (self.r * self.r.transpose() - Matrix3::identity()).abs().max();
        let dual = (self.r * self.m.transpose() + self.m * self.r.transpose()).abs().max();
        real.max(dual)
    }
}

pub fn dualrot_from_motion(m: &RigidMotion) -> DualRotation {
    DualRotation {
        r: m.rotation,
        m: skew(&m.translation) * m.rotation,
    }
}

pub fn motion_from_dualrot(d: &DualRotation) -> Result<RigidMotion> {
    let d = DualRotation::new(d.r, d.m)?;
    let omega = d.m * d.r.transpose();
    let t = Vector3::new(
        0.5 * (omega[(2, 1)] - omega[(1, 2)]),
        0.5 * (omega[(0, 2)] - omega[(2, 0)]),
        0.5 * (omega[(1, 0)] - omega[(0, 1)]),
    );
    Ok(RigidMotion {
        rotation: d.r,
        translation: t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn rotation_matrix_examples() {
        assert_eq!(rotation_matrix(&[1.0, 0.0, 0.0, 0.0]).unwrap(), Matrix3::identity());
        assert_eq!(
            rotation_matrix(&[0.0, 0.0, 0.0, 1.0]).unwrap(),
            Matrix3::from_diagonal(&Vector3::new(-1.0, -1.0, 1.0))
        );
        assert_eq!(rotation_matrix(&[0.0; 4]), Err(Error::ZeroQuaternion));
        let s = 0.5f64.sqrt();
        let r = rotation_matrix(&[s, s, 0.0, 0.0]).unwrap();
        let axis = nalgebra::Rotation3::from_axis_angle(&Vector3::x_axis(), FRAC_PI_2);
        assert_relative_eq!(r, *axis.matrix(), epsilon = 1e-15);
    }

    #[test]
    fn translation_vector_examples() {
        let t = translation_vector(&[1.0, 0.0, 0.0, 0.0], &[0.0, 0.5, 1.5, -2.0]).unwrap();
        assert_eq!(t, Vector3::new(1.0, 3.0, -4.0));
        let t = translation_vector(&[0.3, 0.1, -0.2, 0.7], &[0.0; 4]).unwrap();
        assert_eq!(t, Vector3::zeros());
    }

    #[test]
    fn study_from_motion_examples() {
        let p = study_from_motion(&RigidMotion::identity()).unwrap();
        assert_eq!(p.coords(), [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);

        let p = study_from_motion(&RigidMotion::translation(Vector3::new(2.0, -4.0, 6.0))).unwrap();
        let expected = StudyPoint::from_coords([1.0, 0.0, 0.0, 0.0, 0.0, 1.0, -2.0, 3.0]).unwrap();
        assert!(p.proj_eq(&expected, 1e-14));

        let half = RigidMotion::new(Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, -1.0)), Vector3::zeros()).unwrap();
        let p = study_from_motion(&half).unwrap();
        assert_eq!(p.coords(), [0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn exceptional_points_are_rejected() {
        let p = StudyPoint::from_coords([0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(motion_from_study(&p), Err(Error::ExceptionalPoint(_))));
        assert!(StudyPoint::from_coords([0.0; 8]).is_err());
    }

    #[test]
    fn non_rotation_is_rejected() {
        let m = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, 1.1));
        assert!(RigidMotion::new(m, Vector3::zeros()).is_err());
        let mirror = Matrix3::from_diagonal(&Vector3::new(-1.0, 1.0, 1.0));
        assert!(RigidMotion::new(mirror, Vector3::zeros()).is_err());
    }

    #[test]
    fn dual_rotation_examples() {
        let d = dualrot_from_motion(&RigidMotion::identity());
        assert_eq!(d.m, Matrix3::zeros());
        let t = Vector3::new(1.0, 0.0, 0.0);
        let d = dualrot_from_motion(&RigidMotion::translation(t));
        assert_eq!(d.m, skew(&t));
        assert!(DualRotation::new(Matrix3::identity(), Matrix3::identity()).is_err());
    }

    #[test]
    fn serialization_is_normalized() {
        let p = StudyPoint::from_coords([-2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(serde_json::to_string(&p).unwrap(), "[1.0,0.0,0.0,0.0,0.0,0.0,0.0,0.0]");
        let back: StudyPoint = serde_json::from_str("[0,1,0,0,0,0,0,0]").unwrap();
        assert_eq!(back.x, [0.0, 1.0, 0.0, 0.0]);
    }
}
