use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{normalized_constraint_residuals, rps_planar_translation, Architecture, PlatformGeometry};
use crate::error::{Error, Result};
use crate::poly::{generator_set, point12, GeneratorSet};
use crate::quaternion::qmul;
use crate::study::{delta, rotation_matrix_of, to_matrix, StudyPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModeId {
    I1,
    I2,
    K0,
    K1,
    K2,
    K3,
    K4,
    K5,
    K6,
    K7,
    K8,
}

impl ModeId {
    pub const ALL: [ModeId; 11] = [
        ModeId::I1,
        ModeId::I2,
        ModeId::K0,
        ModeId::K1,
        ModeId::K2,
        ModeId::K3,
        ModeId::K4,
        ModeId::K5,
        ModeId::K6,
        ModeId::K7,
        ModeId::K8,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModeId::I1 => "I1",
            ModeId::I2 => "I2",
            ModeId::K0 => "K0",
            ModeId::K1 => "K1",
            ModeId::K2 => "K2",
            ModeId::K3 => "K3",
            ModeId::K4 => "K4",
            ModeId::K5 => "K5",
            ModeId::K6 => "K6",
            ModeId::K7 => "K7",
            ModeId::K8 => "K8",
        }
    }

    /// Shipped generators; `None` for the non-real `K7`.
    pub fn generator_set(self) -> Option<&'static GeneratorSet> {
        match self {
            ModeId::K7 => None,
            m => generator_set(m.name()),
        }
    }

    /// The generator list characterizes the mode (not `K7`, not `K8`).
    pub fn is_complete(self) -> bool {
        !matches!(self, ModeId::K7 | ModeId::K8)
    }

    pub fn belongs_to(self, arch: Architecture) -> bool {
        modes_of(arch).contains(&self)
    }

    fn check_architecture(self, arch: Architecture) -> Result<()> {
        if self.belongs_to(arch) {
            Ok(())
        } else {
            Err(Error::ModeArchitecture {
                mode: self.name().into(),
                architecture: arch.name().into(),
            })
        }
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModeId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ModeId::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Unsupported(format!("unknown mode '{s}'")))
    }
}

pub fn modes_of(arch: Architecture) -> &'static [ModeId] {
    use ModeId::*;
    match arch {
        Architecture::Rps3 => &[I1, I2],
        Architecture::Upu3Snu => &[K0, K1, K2, K3, K4, K5, K6, K7],
        Architecture::Upu3Tsai => &[K1, K2, K3, K4, K8],
    }
}

/// Distance of the unit representative of `p` to the real points of `K7`:
/// the 2-planes spanned by `x0, y1` and by `x1, y0`.
fn k7_residual(p: &StudyPoint) -> f64 {
    let c = p.normalized().coords();
    let off_a = [c[1], c[2], c[3], c[4], c[6], c[7]];
    let off_b = [c[0], c[2], c[3], c[5], c[6], c[7]];
    let n = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    n(&off_a).min(n(&off_b))
}

pub fn mode_membership(g: &PlatformGeometry, mode: ModeId, p: &StudyPoint, tol: f64) -> Result<bool> {
    mode.check_architecture(g.architecture)?;
    g.require_default()?;
    let pt = point12(&p.x, &p.y, &[0.0; 4]);
    match mode {
        ModeId::K7 => Ok(k7_residual(p) < tol),
        ModeId::K8 => {
            let c = normalized_constraint_residuals(g, p);
            if c.iter().any(|v| v.abs() >= tol) {
                return Ok(false);
            }
            for m in [ModeId::K1, ModeId::K2, ModeId::K3, ModeId::K4] {
                if m.generator_set().unwrap().residual_norm(&pt) <= tol {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        m => Ok(m.generator_set().unwrap().residual_norm(&pt) < tol),
    }
}

/// A random point of `mode`, drawn independently of its generators where
/// possible: the 3-RPS modes from the revolute constraints on the rotations
/// with the vanishing coordinate of the mode, the planar modes from Gaussian
/// coordinates on the plane. `K8` has no explicit parametrization.
pub fn sample_mode_point<R: Rng + ?Sized>(g: &PlatformGeometry, mode: ModeId, rng: &mut R) -> Result<StudyPoint> {
    mode.check_architecture(g.architecture)?;
    g.require_default()?;
    let mut gauss = || -> f64 { rng.sample(StandardNormal) };
    match mode {
        ModeId::I1 | ModeId::I2 => {
            let zero = if mode == ModeId::I1 { 0 } else { 1 };
            let x = loop {
                let mut x: [f64; 4] = std::array::from_fn(|_| gauss());
                x[zero] = 0.0;
                let n = delta(&x).sqrt();
                if n > 1e-3 {
                    break x.map(|v| v / n);
                }
            };
            let rot = to_matrix(&rotation_matrix_of(&x));
            let yz = rps_planar_translation(g, &rot);
            let t = [0.0, 2.0 * gauss(), yz.x, yz.y];
            let y = qmul(&t, &x).map(|v| 0.5 * v);
            StudyPoint::new(x, y)
        }
        ModeId::K7 => {
            let (a, b) = (gauss(), gauss());
            let mut c = [0.0; 8];
            if gauss() > 0.0 {
                c[0] = a;
                c[5] = b;
            } else {
                c[1] = a;
                c[4] = b;
            }
            StudyPoint::from_coords(c)
        }
        ModeId::K8 => Err(Error::Unsupported("no parametrization of K8 for sampling".into())),
        m => {
            let zeros = m.generator_set().unwrap().coordinate_zeros();
            loop {
                let mut c: [f64; 8] = std::array::from_fn(|_| gauss());
                for &z in &zeros {
                    c[z] = 0.0;
                }
                if delta(&[c[0], c[1], c[2], c[3]]) > 1e-6 {
                    return StudyPoint::from_coords(c);
                }
            }
        }
    }
}

/// `p ↦ i·p`: the half-turn about the vertical axis composed after the
/// motion. An involution of `P⁷`.
pub fn involution(p: &StudyPoint) -> StudyPoint {
    let i = [0.0, 1.0, 0.0, 0.0];
    StudyPoint {
        x: qmul(&i, &p.x),
        y: qmul(&i, &p.y),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::study::{study_from_motion, RigidMotion};
    use nalgebra::Vector3;

    fn rps() -> PlatformGeometry {
        PlatformGeometry::default_for(Architecture::Rps3)
    }

    fn snu() -> PlatformGeometry {
        PlatformGeometry::default_for(Architecture::Upu3Snu)
    }

    #[test]
    fn half_turn_about_vertical_axis() {
        let p = StudyPoint::from_coords([0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(mode_membership(&rps(), ModeId::I1, &p, 1e-10).unwrap());
        assert!(mode_membership(&snu(), ModeId::K5, &p, 1e-10).unwrap());
    }

    #[test]
    fn identity_and_translations() {
        let g = snu();
        let id = StudyPoint::IDENTITY;
        assert!(mode_membership(&g, ModeId::K0, &id, 1e-10).unwrap());
        assert!(mode_membership(&g, ModeId::K1, &id, 1e-10).unwrap());
        let p = study_from_motion(&RigidMotion::translation(Vector3::new(1.0, 2.0, -0.5))).unwrap();
        for m in modes_of(Architecture::Upu3Snu).iter().filter(|m| m.is_complete()) {
            assert_eq!(mode_membership(&g, *m, &p, 1e-10).unwrap(), *m == ModeId::K1, "{m}");
        }
    }

    #[test]
    fn samples_satisfy_generators_and_constraints() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for arch in Architecture::ALL {
            let g = PlatformGeometry::default_for(arch);
            for &m in modes_of(arch).iter().filter(|m| **m != ModeId::K8) {
                for _ in 0..20 {
                    let p = sample_mode_point(&g, m, &mut rng).unwrap();
                    assert!(p.on_quadric(1e-12), "{m}");
                    assert!(mode_membership(&g, m, &p, 1e-10).unwrap(), "{m}");
                    let c = normalized_constraint_residuals(&g, &p);
                    assert!(c.iter().all(|v| v.abs() < 1e-10), "{m} {c:?}");
                }
            }
        }
        assert!(sample_mode_point(&PlatformGeometry::default_for(Architecture::Upu3Tsai), ModeId::K8, &mut rng).is_err());
    }

    #[test]
    fn guards() {
        assert!(matches!(
            mode_membership(&rps(), ModeId::K1, &StudyPoint::IDENTITY, 1e-10),
            Err(Error::ModeArchitecture { .. })
        ));
        let g = PlatformGeometry::new(Architecture::Rps3, 1.0, 2.0).unwrap();
        assert_eq!(
            mode_membership(&g, ModeId::I1, &StudyPoint::IDENTITY, 1e-10),
            Err(Error::NonDefaultGeometry)
        );
    }

    #[test]
    fn involution_examples() {
        let j = involution(&StudyPoint::IDENTITY);
        assert_eq!(j.coords(), [0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let p = StudyPoint::from_coords([0.3, -0.2, 0.5, 0.1, 0.2, 0.4, -0.1, 0.0]).unwrap();
        assert!(involution(&involution(&p)).proj_eq(&p, 1e-14));
    }

    #[test]
    fn k7_real_points() {
        let g = snu();
        let up = StudyPoint::from_coords([1.0, 0.0, 0.0, 0.0, 0.0, 3.0, 0.0, 0.0]).unwrap();
        let up_turned = StudyPoint::from_coords([0.0, 1.0, 0.0, 0.0, -2.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(mode_membership(&g, ModeId::K7, &up, 1e-10).unwrap());
        assert!(mode_membership(&g, ModeId::K7, &up_turned, 1e-10).unwrap());
        let side = study_from_motion(&RigidMotion::translation(Vector3::new(0.0, 1.0, 0.0))).unwrap();
        assert!(!mode_membership(&g, ModeId::K7, &side, 1e-10).unwrap());
    }
}
