//! Closed-form degenerate DKP on the boundary components.
//!
//! On the `J` charts the degenerate IKM is `d = M (c0 c1, c0 c2)` and on the
//! `L` charts `d = N (c1, c2)`, with `(c0, c1, c2)` unit chart coordinates.
//! The matrices are read off [`degenerate_ikm`] at chart points, so the
//! solvers hold for any radii.

use nalgebra::{Matrix2, Vector2};
use serde::Serialize;

use super::{degenerate_ikm, BoundaryJointCoords, Orientation};
use crate::compactify::BoundaryPoint;
use crate::error::{Error, Result};
use crate::robots::{boundary_component, BoundaryComponentId, PlatformGeometry};

/// Discriminants within this distance of zero count as critical.
pub const CRITICAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DegenerateMap {
    Product(Matrix2<f64>),
    Linear(Matrix2<f64>),
}

impl DegenerateMap {
    pub fn of(g: &PlatformGeometry, id: BoundaryComponentId) -> Result<Self> {
        if !id.is_real() {
            return Err(Error::Unsupported(format!("{id} has no real chart")));
        }
        let comp = boundary_component(id);
        let d_at = |c: [f64; 3]| -> Result<Vector2<f64>> {
            let d = degenerate_ikm(g, &comp.point(c)?).canonical;
            Ok(Vector2::new(d.d1, d.d2))
        };
        if id.is_product_chart() {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let a = d_at([h, h, 0.0])? * 2.0;
            let b = d_at([h, 0.0, h])? * 2.0;
            Ok(DegenerateMap::Product(Matrix2::from_columns(&[a, b])))
        } else {
            let a = d_at([0.0, 1.0, 0.0])?;
            let b = d_at([0.0, 0.0, 1.0])?;
            Ok(DegenerateMap::Linear(Matrix2::from_columns(&[a, b])))
        }
    }

    pub fn matrix(&self) -> Matrix2<f64> {
        match self {
            DegenerateMap::Product(m) | DegenerateMap::Linear(m) => *m,
        }
    }

    /// `d` at unit chart coordinates `c`.
    pub fn apply(&self, c: [f64; 3]) -> BoundaryJointCoords {
        let v = match self {
            DegenerateMap::Product(m) => m * Vector2::new(c[0] * c[1], c[0] * c[2]),
            DegenerateMap::Linear(n) => n * Vector2::new(c[1], c[2]),
        };
        BoundaryJointCoords::new(v.x, v.y)
    }

    /// `G = M⁻ᵀ M⁻¹`, so that `dᵀ G d` is `P² + Q²` (product charts) or
    /// `c1² + c2²` (linear charts).
    fn gram_inverse(&self) -> Result<Matrix2<f64>> {
        let inv = self
            .matrix()
            .try_inverse()
            .ok_or_else(|| Error::Solver("degenerate IKM chart map is singular".into()))?;
        Ok(inv.transpose() * inv)
    }

    /// Discriminant whose sign decides the number of real solutions at `d`:
    /// `1 - 4(P² + Q²)` for product charts, `1 - c1² - c2²` for linear ones.
    pub fn discriminant(&self, d: BoundaryJointCoords) -> Result<f64> {
        let inv = self.matrix().try_inverse().ok_or_else(|| Error::Solver("singular chart map".into()))?;
        let pq = inv * Vector2::new(d.d1, d.d2);
        Ok(match self {
            DegenerateMap::Product(_) => 1.0 - 4.0 * pq.norm_squared(),
            DegenerateMap::Linear(_) => 1.0 - pq.norm_squared(),
        })
    }
}

/// `a d1² + b d1 d2 + c d2² = rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Conic {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub rhs: f64,
}

impl Conic {
    /// `a d1² + b d1 d2 + c d2² - rhs`.
    pub fn eval(&self, d: BoundaryJointCoords) -> f64 {
        self.a * d.d1 * d.d1 + self.b * d.d1 * d.d2 + self.c * d.d2 * d.d2 - self.rhs
    }

    fn normalized(self) -> Self {
        Conic {
            a: 1.0,
            b: self.b / self.a,
            c: self.c / self.a,
            rhs: self.rhs / self.a,
        }
    }

    /// Points of the conic at angle `theta` (the conic must be an ellipse).
    pub fn point_at(&self, theta: f64) -> BoundaryJointCoords {
        let (s, c) = theta.sin_cos();
        let q = self.a * c * c + self.b * c * s + self.c * s * s;
        let r = (self.rhs / q).sqrt();
        BoundaryJointCoords::new(r * c, r * s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalSet {
    pub component: BoundaryComponentId,
    /// Curve of critical values, normalized so that `a = 1`.
    pub conic: Conic,
    /// Isolated critical values.
    pub isolated: Vec<BoundaryJointCoords>,
    /// Number of degenerate solutions (one orientation class) strictly
    /// inside / outside the curve, away from isolated critical values.
    pub count_inside: usize,
    pub count_outside: usize,
}

pub fn degenerate_critical_values(g: &PlatformGeometry, id: BoundaryComponentId) -> Result<CriticalSet> {
    let map = DegenerateMap::of(g, id)?;
    let gi = map.gram_inverse()?;
    let rhs = if id.is_product_chart() { 0.25 } else { 1.0 };
    let conic = Conic {
        a: gi[(0, 0)],
        b: 2.0 * gi[(0, 1)],
        c: gi[(1, 1)],
        rhs,
    }
    .normalized();
    let isolated = if id.is_product_chart() {
        vec![BoundaryJointCoords::new(0.0, 0.0)]
    } else {
        Vec::new()
    };
    Ok(CriticalSet {
        component: id,
        conic,
        isolated,
        count_inside: 2,
        count_outside: 0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegenerateDkpSolution {
    pub component: BoundaryComponentId,
    /// Unit chart coordinates.
    pub chart: [f64; 3],
    pub point: BoundaryPoint,
    pub orientation: Orientation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CriticalKind {
    /// Two solutions merged into one (discriminant zero).
    DoubleRoot,
    /// `d = 0` on a `J` component: the listed isolated solution plus the
    /// projective line `c0 = 0` (half-turns about horizontal axes).
    SelfMotionLine,
    /// `d` on the boundary of the image strip of an `L` component.
    StripBoundary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegenerateDkp {
    pub solutions: Vec<DegenerateDkpSolution>,
    pub critical: Option<CriticalKind>,
}

/// Real solutions of the degenerate DKP on `id` in the canonical orientation
/// class, one representative per antipodal pair.
pub fn degenerate_dkp(g: &PlatformGeometry, id: BoundaryComponentId, d: BoundaryJointCoords) -> Result<DegenerateDkp> {
    degenerate_dkp_oriented(g, id, d, Orientation::Canonical)
}

pub fn degenerate_dkp_oriented(
    g: &PlatformGeometry,
    id: BoundaryComponentId,
    d: BoundaryJointCoords,
    orientation: Orientation,
) -> Result<DegenerateDkp> {
    if !id.is_real() {
        let solutions = if d.d1.abs().max(d.d2.abs()) < CRITICAL_TOL {
            boundary_component(id)
                .real_points()
                .into_iter()
                .map(|p| DegenerateDkpSolution {
                    component: id,
                    chart: [1.0, 0.0, 0.0],
                    point: match orientation {
                        Orientation::Canonical => p,
                        Orientation::Flipped => p.flipped(),
                    },
                    orientation,
                })
                .collect()
        } else {
            Vec::new()
        };
        return Ok(DegenerateDkp { solutions, critical: None });
    }
    let target = match orientation {
        Orientation::Canonical => d,
        Orientation::Flipped => d.negated(),
    };
    let map = DegenerateMap::of(g, id)?;
    let inv = map
        .matrix()
        .try_inverse()
        .ok_or_else(|| Error::Solver("singular chart map".into()))?;
    let pq = inv * Vector2::new(target.d1, target.d2);
    let mut charts = Vec::new();
    let mut critical = None;
    match map {
        DegenerateMap::Product(_) => {
            let k = pq.norm_squared();
            let disc = 1.0 - 4.0 * k;
            if k.sqrt() < CRITICAL_TOL {
                charts.push([1.0, 0.0, 0.0]);
                critical = Some(CriticalKind::SelfMotionLine);
            } else if disc.abs() <= CRITICAL_TOL {
                let c0 = 0.5f64.sqrt();
                charts.push([c0, pq.x / c0, pq.y / c0]);
                critical = Some(CriticalKind::DoubleRoot);
            } else if disc > 0.0 {
                let sq = disc.sqrt();
                for s in [(1.0 + sq) / 2.0, (1.0 - sq) / 2.0] {
                    let c0 = s.sqrt();
                    charts.push([c0, pq.x / c0, pq.y / c0]);
                }
            }
        }
        DegenerateMap::Linear(_) => {
            let rem = 1.0 - pq.norm_squared();
            if rem.abs() <= CRITICAL_TOL {
                charts.push([0.0, pq.x, pq.y]);
                critical = Some(CriticalKind::StripBoundary);
            } else if rem > 0.0 {
                let c0 = rem.sqrt();
                charts.push([c0, pq.x, pq.y]);
                charts.push([-c0, pq.x, pq.y]);
            }
        }
    }
    let comp = boundary_component(id);
    let solutions = charts
        .into_iter()
        .map(|c| {
            let n = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
            let chart = c.map(|v| v / n);
            let p = comp.point(chart)?;
            Ok(DegenerateDkpSolution {
                component: id,
                chart,
                point: match orientation {
                    Orientation::Canonical => p,
                    Orientation::Flipped => p.flipped(),
                },
                orientation,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DegenerateDkp { solutions, critical })
}
