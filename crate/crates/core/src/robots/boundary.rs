use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Architecture, ModeId};
use crate::compactify::BoundaryPoint;
use crate::error::{Error, Result};
use crate::poly::{generator_set, point12, GeneratorSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryComponentId {
    J1,
    J2,
    L5,
    L6,
    L7,
}

impl BoundaryComponentId {
    pub const ALL: [BoundaryComponentId; 5] = [
        BoundaryComponentId::J1,
        BoundaryComponentId::J2,
        BoundaryComponentId::L5,
        BoundaryComponentId::L6,
        BoundaryComponentId::L7,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundaryComponentId::J1 => "J1",
            BoundaryComponentId::J2 => "J2",
            BoundaryComponentId::L5 => "L5",
            BoundaryComponentId::L6 => "L6",
            BoundaryComponentId::L7 => "L7",
        }
    }

    pub fn architecture(self) -> Architecture {
        match self {
            BoundaryComponentId::J1 | BoundaryComponentId::J2 => Architecture::Rps3,
            _ => Architecture::Upu3Tsai,
        }
    }

    /// The mode whose boundary contains this component, for its architecture.
    pub fn mode(self) -> ModeId {
        match self {
            BoundaryComponentId::J1 => ModeId::I1,
            BoundaryComponentId::J2 => ModeId::I2,
            _ => ModeId::K8,
        }
    }

    /// `true` for `J1`, `J2` (the degenerate IKM is bilinear in the pivot
    /// coordinate and the other two), `false` for `L5`, `L6` (linear).
    pub fn is_product_chart(self) -> bool {
        matches!(self, BoundaryComponentId::J1 | BoundaryComponentId::J2)
    }

    pub fn is_real(self) -> bool {
        self != BoundaryComponentId::L7
    }
}

impl fmt::Display for BoundaryComponentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundaryComponentId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BoundaryComponentId::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Unsupported(format!("unknown boundary component '{s}'")))
    }
}

/// The two real points of `L7`: the first lies on `L5`, the second on `L6`.
pub const L7_REAL_POINTS: [BoundaryPoint; 2] = [
    BoundaryPoint {
        w: [0.0, 1.0, 0.0, 0.0],
        y: [1.0, 0.0, 0.0, 0.0],
    },
    BoundaryPoint {
        w: [1.0, 0.0, 0.0, 0.0],
        y: [0.0, 1.0, 0.0, 0.0],
    },
];

#[derive(Debug, Clone, Copy)]
pub struct BoundaryComponent {
    pub id: BoundaryComponentId,
    pub equations: &'static GeneratorSet,
    /// Indices into `w` of the chart coordinates `(c0, c1, c2)`; `c0` is the
    /// pivot coordinate.
    pub chart_w: Option<[usize; 3]>,
}

pub fn boundary_component(id: BoundaryComponentId) -> BoundaryComponent {
    let chart_w = match id {
        BoundaryComponentId::J1 | BoundaryComponentId::L5 => Some([1, 2, 3]),
        BoundaryComponentId::J2 | BoundaryComponentId::L6 => Some([0, 2, 3]),
        BoundaryComponentId::L7 => None,
    };
    BoundaryComponent {
        id,
        equations: generator_set(id.name()).expect("shipped boundary set"),
        chart_w,
    }
}

impl BoundaryComponent {
    /// Chart map from homogeneous chart coordinates to a normalized boundary
    /// point:
    ///
    /// * `J1`: `w = (0, c0, c1, c2)`, `y = (c0, 0, c2, -c1)`
    /// * `J2`: `w = (c0, 0, c1, c2)`, `y = (0, c0, -c2, c1)`
    /// * `L5`: `w = (0, c0, c1, c2)`, `y = (1, 0, 0, 0)`
    /// * `L6`: `w = (c0, 0, c1, c2)`, `y = (0, 1, 0, 0)`
    pub fn point(&self, c: [f64; 3]) -> Result<BoundaryPoint> {
        let [a, b, d] = c;
        let (w, y) = match self.id {
            BoundaryComponentId::J1 => ([0.0, a, b, d], [a, 0.0, d, -b]),
            BoundaryComponentId::J2 => ([a, 0.0, b, d], [0.0, a, -d, b]),
            BoundaryComponentId::L5 => ([0.0, a, b, d], [1.0, 0.0, 0.0, 0.0]),
            BoundaryComponentId::L6 => ([a, 0.0, b, d], [0.0, 1.0, 0.0, 0.0]),
            BoundaryComponentId::L7 => {
                return Err(Error::Unsupported("L7 has no real chart; use L7_REAL_POINTS".into()))
            }
        };
        BoundaryPoint::new(w, y)
    }

    /// Chart coordinates of a boundary point of this component.
    pub fn chart_coords(&self, b: &BoundaryPoint) -> Option<[f64; 3]> {
        self.chart_w.map(|idx| idx.map(|i| b.w[i]))
    }

    pub fn residual(&self, b: &BoundaryPoint) -> f64 {
        self.equations.residual_norm(&point12(&[0.0; 4], &b.y, &b.w))
    }

    pub fn contains(&self, b: &BoundaryPoint, tol: f64) -> bool {
        self.residual(b) < tol
    }

    pub fn real_points(&self) -> Vec<BoundaryPoint> {
        match self.id {
            BoundaryComponentId::L7 => L7_REAL_POINTS.to_vec(),
            _ => Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compactify::direction_vector;

    #[test]
    fn charts_land_on_components() {
        let samples = [[1.0, 0.0, 0.0], [0.3, -0.8, 0.52], [0.0, 0.6, 0.8], [-0.1, 0.2, 0.9]];
        for id in [BoundaryComponentId::J1, BoundaryComponentId::J2, BoundaryComponentId::L5, BoundaryComponentId::L6] {
            let comp = boundary_component(id);
            for c in samples {
                let b = comp.point(c).unwrap();
                assert!(comp.contains(&b, 1e-14), "{id} {c:?}");
                assert!((direction_vector(&b).norm() - 1.0).abs() < 1e-14);
                let cc = comp.chart_coords(&b).unwrap();
                assert!(crate::proj::proj_eq(&cc, &c, 1e-14));
            }
        }
    }

    #[test]
    fn j1_at_pivot() {
        let b = boundary_component(BoundaryComponentId::J1).point([1.0, 0.0, 0.0]).unwrap();
        assert_eq!(b.w, [0.0, 1.0, 0.0, 0.0]);
        assert_eq!(b.y, [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(direction_vector(&b), nalgebra::Vector3::new(-1.0, 0.0, 0.0));
    }

    #[test]
    fn l5_direction() {
        let b = boundary_component(BoundaryComponentId::L5).point([0.0, 0.0, 1.0]).unwrap();
        assert_eq!(direction_vector(&b), nalgebra::Vector3::new(0.0, 0.0, -1.0));
    }

    #[test]
    fn l7_real_points_lie_on_l5_and_l6() {
        let l7 = boundary_component(BoundaryComponentId::L7);
        let pts = l7.real_points();
        assert_eq!(pts.len(), 2);
        for p in &pts {
            assert!(l7.contains(p, 1e-15));
        }
        assert!(boundary_component(BoundaryComponentId::L5).contains(&pts[0], 1e-15));
        assert!(boundary_component(BoundaryComponentId::L6).contains(&pts[1], 1e-15));
        assert!(l7.point([1.0, 0.0, 0.0]).is_err());
    }
}
