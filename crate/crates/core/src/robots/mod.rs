//! Platform geometry and architecture constraints of the 3-RPS, SNU 3-UPU and
//! Tsai 3-UPU, their operation modes and the boundary components of those
//! modes.
//!
//! The vertical axis is the `x`-axis of the fixed frame. Base anchors are
//! `Aᵢ = k1 ρᵢ` and platform anchors `bᵢ = k2 ρᵢ` with
//! `ρ1 = (0, 0, -1)`, `ρ2 = (0, -√3/2, 1/2)`, `ρ3 = (0, √3/2, 1/2)`.

mod boundary;
mod modes;

pub use boundary::{boundary_component, BoundaryComponent, BoundaryComponentId, L7_REAL_POINTS};
pub use modes::{involution, mode_membership, modes_of, sample_mode_point, ModeId};

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::study::{delta, rotation_matrix_of, translation_vector_of, StudyPoint};

pub const DEFAULT_K1: f64 = 1.0;
pub const DEFAULT_K2: f64 = 1.5;

const S3_2: f64 = 0.866_025_403_784_438_6;

/// Unit radial directions of the three anchors.
pub const RADIAL: [[f64; 3]; 3] = [[0.0, 0.0, -1.0], [0.0, -S3_2, 0.5], [0.0, S3_2, 0.5]];

/// Unit tangents `e_x × ρᵢ`, counterclockwise seen from `+x`.
pub const TANGENT: [[f64; 3]; 3] = [[0.0, 1.0, 0.0], [0.0, -0.5, -S3_2], [0.0, -0.5, S3_2]];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Architecture {
    #[serde(rename = "RPS3")]
    Rps3,
    #[serde(rename = "UPU3_SNU")]
    Upu3Snu,
    #[serde(rename = "UPU3_TSAI")]
    Upu3Tsai,
}

impl Architecture {
    pub const ALL: [Architecture; 3] = [Architecture::Rps3, Architecture::Upu3Snu, Architecture::Upu3Tsai];

    pub fn name(self) -> &'static str {
        match self {
            Architecture::Rps3 => "RPS3",
            Architecture::Upu3Snu => "UPU3_SNU",
            Architecture::Upu3Tsai => "UPU3_TSAI",
        }
    }

    /// Degree in `(x, y)` of the homogeneous constraint forms.
    pub fn constraint_degree(self) -> u32 {
        match self {
            Architecture::Rps3 => 2,
            _ => 4,
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Architecture {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Architecture::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidGeometry(format!("unknown architecture '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlatformGeometry {
    pub architecture: Architecture,
    pub k1: f64,
    pub k2: f64,
}

impl PlatformGeometry {
    pub fn new(architecture: Architecture, k1: f64, k2: f64) -> Result<Self> {
        if !(k1 > 0.0 && k1.is_finite() && k2 > 0.0 && k2.is_finite()) {
            return Err(Error::InvalidGeometry(format!("radii must be positive, got k1={k1}, k2={k2}")));
        }
        Ok(PlatformGeometry { architecture, k1, k2 })
    }

    /// `k1 = 1`, `k2 = 3/2`.
    pub fn default_for(architecture: Architecture) -> Self {
        PlatformGeometry {
            architecture,
            k1: DEFAULT_K1,
            k2: DEFAULT_K2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        PlatformGeometry::new(self.architecture, self.k1, self.k2).map(|_| ())
    }

    pub fn is_default(&self) -> bool {
        self.k1 == DEFAULT_K1 && self.k2 == DEFAULT_K2
    }

    pub(crate) fn require_default(&self) -> Result<()> {
        if self.is_default() {
            Ok(())
        } else {
            Err(Error::NonDefaultGeometry)
        }
    }

    pub fn base_anchor(&self, i: usize) -> Vector3<f64> {
        Vector3::from(RADIAL[i]) * self.k1
    }

    pub fn platform_anchor(&self, i: usize) -> Vector3<f64> {
        Vector3::from(RADIAL[i]) * self.k2
    }

    /// Axis 1 at `Aᵢ` and axis 4 at `bᵢ` (platform frame) of a U-joint limb.
    fn joint_axes(&self, i: usize) -> [f64; 3] {
        match self.architecture {
            Architecture::Upu3Tsai => TANGENT[i],
            _ => RADIAL[i],
        }
    }
}

fn mat_vec<T: Scalar>(m: &[[T; 3]; 3], v: &[f64; 3]) -> [T; 3] {
    std::array::from_fn(|r| m[r][0].scale(v[0]) + m[r][1].scale(v[1]) + m[r][2].scale(v[2]))
}

fn dot_c<T: Scalar>(a: &[T; 3], c: &[f64; 3]) -> T {
    a[0].scale(c[0]) + a[1].scale(c[1]) + a[2].scale(c[2])
}

/// `Δ(x)·(Bᵢ - Aᵢ)`, homogeneous of degree 2 in `(x, y)`.
pub fn limb_forms<T: Scalar>(g: &PlatformGeometry, x: &[T; 4], y: &[T; 4]) -> [[T; 3]; 3] {
    let r = rotation_matrix_of(x);
    let t = translation_vector_of(x, y);
    let d = delta(x);
    std::array::from_fn(|i| {
        let b = [RADIAL[i][0] * g.k2, RADIAL[i][1] * g.k2, RADIAL[i][2] * g.k2];
        let rb = mat_vec(&r, &b);
        std::array::from_fn(|c| rb[c] + t[c] - d.scale(RADIAL[i][c] * g.k1))
    })
}

/// Homogeneous architecture constraints, of degree
/// [`Architecture::constraint_degree`].
pub fn constraint_forms<T: Scalar>(g: &PlatformGeometry, x: &[T; 4], y: &[T; 4]) -> [T; 3] {
    let limbs = limb_forms(g, x, y);
    match g.architecture {
        Architecture::Rps3 => std::array::from_fn(|i| dot_c(&limbs[i], &TANGENT[i])),
        _ => {
            let r = rotation_matrix_of(x);
            std::array::from_fn(|i| {
                let a = g.joint_axes(i);
                let b = mat_vec(&r, &a);
                let l = &limbs[i];
                // det[a, b, l] = a · (b × l)
                let cross = [
                    b[1] * l[2] - b[2] * l[1],
                    b[2] * l[0] - b[0] * l[2],
                    b[0] * l[1] - b[1] * l[0],
                ];
                dot_c(&cross, &a)
            })
        }
    }
}

/// Horizontal translation `(t_y, t_z)` fitting the three revolute
/// constraints of the 3-RPS for the rotation `rot` in least squares. The
/// constraints do not involve `t_x`; they are consistent exactly on the
/// rotations of the operation modes.
pub(crate) fn rps_planar_translation(g: &PlatformGeometry, rot: &Matrix3<f64>) -> Vector2<f64> {
    let mut ata = Matrix2::zeros();
    let mut atb = Vector2::zeros();
    for i in 0..3 {
        let rho = Vector3::from(RADIAL[i]);
        let tau = Vector3::from(TANGENT[i]);
        let rhs = (rho * g.k1 - rot * rho * g.k2).dot(&tau);
        let t2 = Vector2::new(tau.y, tau.z);
        ata += t2 * t2.transpose();
        atb += t2 * rhs;
    }
    ata.try_inverse().map(|m| m * atb).unwrap_or_else(Vector2::zeros)
}

/// Platform anchors `Bᵢ` in the fixed frame.
pub fn platform_points(g: &PlatformGeometry, p: &StudyPoint) -> Result<[Vector3<f64>; 3]> {
    p.check_motion()?;
    let (x, y) = (p.x, p.y);
    let r = rotation_matrix_of(&x);
    let t = translation_vector_of(&x, &y);
    let d = delta(&x);
    Ok(std::array::from_fn(|i| {
        let rb = mat_vec(&r, &[RADIAL[i][0] * g.k2, RADIAL[i][1] * g.k2, RADIAL[i][2] * g.k2]);
        Vector3::new(rb[0] + t[0], rb[1] + t[1], rb[2] + t[2]) / d
    }))
}

/// Affine constraint values: `(Bᵢ - Aᵢ)·τᵢ` for the 3-RPS and
/// `det[axis1ᵢ, axis4ᵢ, Bᵢ - Aᵢ]` for the 3-UPU architectures.
pub fn constraint_residuals(g: &PlatformGeometry, p: &StudyPoint) -> Result<[f64; 3]> {
    p.check_motion()?;
    let c = constraint_forms(g, &p.x, &p.y);
    let d = p.delta();
    let scale = d.powi(g.architecture.constraint_degree() as i32 / 2);
    Ok(c.map(|v| v / scale))
}

/// Constraint forms on the unit representative of `p`; defined on all of
/// `P⁷` and scale invariant.
pub fn normalized_constraint_residuals(g: &PlatformGeometry, p: &StudyPoint) -> [f64; 3] {
    let n = p.normalized();
    constraint_forms(g, &n.x, &n.y)
}
