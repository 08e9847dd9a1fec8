//! Study-quadric model of the group of rigid motions, its blow-up along the
//! exceptional 3-plane, and the direct kinematics (full and degenerate) of
//! three 3-DOF parallel robots: the 3-RPS, the SNU 3-UPU and the Tsai 3-UPU.
//!
//! The crate is organised bottom-up:
//!
//! * [`quaternion`] and [`study`]: quaternions, Study coordinates, rigid
//!   motions and rotations over the dual numbers.
//! * [`compactify`]: the blow-up `Bl_E(S)`, the product compactification
//!   `P3 x P3` and the maps between them, boundary points and their
//!   translation direction.
//! * [`poly`]: exact sparse polynomials in `x0..x3, y0..y3, w0..w3` and the
//!   shipped generator sets of the operation modes and their boundaries.
//! * [`robots`]: platform geometry, architecture constraints, operation modes
//!   and boundary components.
//! * [`kinematics`]: inverse kinematics, the degenerate direct kinematic
//!   problem on the boundary, the numerical full DKP and grid scans.

pub mod compactify;
pub mod error;
pub mod kinematics;
pub mod poly;
pub mod proj;
pub mod quaternion;
pub mod robots;
pub mod scalar;
pub mod study;
pub mod verify;

pub use error::{Error, Result};

/// Default tolerance for "lies on the variety" predicates, applied to
/// normalized coordinates.
pub const DEFAULT_TOL: f64 = 1e-10;
