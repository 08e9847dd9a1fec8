//! Inverse kinematics, its degeneration on the boundary, and the direct
//! kinematic problem.

mod degenerate;
mod dkp;
pub mod newton;
mod reconcile;
mod scan;

pub use degenerate::{
    degenerate_critical_values, degenerate_dkp, degenerate_dkp_oriented, Conic, CriticalKind, CriticalSet,
    DegenerateDkp, DegenerateDkpSolution, DegenerateMap, CRITICAL_TOL,
};
pub use dkp::{dkp, dkp_refine, k8_sweep, seed_from_rotation, DkpOptions, DkpReport, DkpSolution, SweepPoint};
pub use reconcile::{mirror, reconcile_counts, MirrorPair, Reconciliation};
pub use scan::{convex_hull, scan_grid, strictly_inside, CellStatus, ScanCell, ScanConfig, ScanResult};

use serde::{Deserialize, Serialize};

use crate::compactify::{direction_vector, BoundaryPoint};
use crate::error::{Error, Result};
use crate::robots::{platform_points, PlatformGeometry, RADIAL};
use crate::study::{rotation_matrix_of, to_matrix, StudyPoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointLengths {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

impl JointLengths {
    pub fn new(r1: f64, r2: f64, r3: f64) -> Result<Self> {
        if [r1, r2, r3].iter().all(|r| *r > 0.0 && r.is_finite()) {
            Ok(JointLengths { r1, r2, r3 })
        } else {
            Err(Error::InvalidLengths(format!("({r1}, {r2}, {r3}) must be positive")))
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.r1, self.r2, self.r3]
    }

    /// Largest relative deviation from `other`.
    pub fn rel_error(&self, other: &JointLengths) -> f64 {
        let a = self.to_array();
        let b = other.to_array();
        (0..3).fold(0.0f64, |m, i| m.max((a[i] - b[i]).abs() / b[i].abs().max(1e-300)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryJointCoords {
    pub d1: f64,
    pub d2: f64,
}

impl BoundaryJointCoords {
    pub fn new(d1: f64, d2: f64) -> Self {
        BoundaryJointCoords { d1, d2 }
    }

    pub fn negated(self) -> Self {
        BoundaryJointCoords::new(-self.d1, -self.d2)
    }
}

/// Which representative `(w, ±y)` of a boundary point fixes the direction of
/// `u`. `Canonical` is the representative as given (for chart points: the
/// chart map), `Flipped` its negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    Canonical,
    Flipped,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Canonical => 1.0,
            Orientation::Flipped => -1.0,
        }
    }
}

/// Degenerate joint coordinates of a boundary point for both orientations
/// of `u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientedCoords {
    pub canonical: BoundaryJointCoords,
    pub flipped: BoundaryJointCoords,
}

impl OrientedCoords {
    pub fn get(&self, o: Orientation) -> BoundaryJointCoords {
        match o {
            Orientation::Canonical => self.canonical,
            Orientation::Flipped => self.flipped,
        }
    }
}

pub fn ikm(g: &PlatformGeometry, p: &StudyPoint) -> Result<JointLengths> {
    let b = platform_points(g, p)?;
    let r: [f64; 3] = std::array::from_fn(|i| (b[i] - g.base_anchor(i)).norm());
    Ok(JointLengths { r1: r[0], r2: r[1], r3: r[2] })
}

/// `dᵢ = (R(w)bᵢ - Aᵢ)·u - (R(w)b₃ - A₃)·u`, `i = 1, 2`, with `R(w)` the
/// rotation of the unit quaternion `w` and `u` the direction vector.
pub fn degenerate_ikm(g: &PlatformGeometry, b: &BoundaryPoint) -> OrientedCoords {
    let r = to_matrix(&rotation_matrix_of(&b.w));
    let u = direction_vector(b);
    let v: [f64; 3] = std::array::from_fn(|i| {
        let rho = nalgebra::Vector3::from(RADIAL[i]);
        (r * rho * g.k2 - rho * g.k1).dot(&u)
    });
    let canonical = BoundaryJointCoords::new(v[0] - v[2], v[1] - v[2]);
    OrientedCoords {
        canonical,
        flipped: canonical.negated(),
    }
}
