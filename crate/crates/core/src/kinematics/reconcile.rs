//! Matching full DKP solutions at large limb lengths with the degenerate DKP
//! on the boundary.

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use super::{degenerate_dkp_oriented, ikm, BoundaryJointCoords, DegenerateDkpSolution, DkpSolution, Orientation};
use crate::compactify::direction_vector;
use crate::error::{Error, Result};
use crate::proj;
use crate::robots::{BoundaryComponentId, ModeId, PlatformGeometry};
use crate::study::{motion_from_study, study_from_motion, RigidMotion, StudyPoint};

/// Reflection of a configuration through the base plane `x = 0`:
/// `R ↦ MRM`, `t ↦ Mt` with `M = diag(-1, 1, 1)`.
pub fn mirror(p: &StudyPoint) -> Result<StudyPoint> {
    let m = motion_from_study(p)?;
    let refl = Matrix3::from_diagonal(&Vector3::new(-1.0, 1.0, 1.0));
    let mm = RigidMotion {
        rotation: refl * m.rotation * refl,
        translation: refl * m.translation,
    };
    study_from_motion(&mm)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MirrorPair {
    /// Indices into the full solution list; the first has `z < 0`.
    pub members: [usize; 2],
    /// Index into `Reconciliation::degenerate` of the limit of the member
    /// in the canonical orientation class.
    pub degenerate: usize,
    /// Which member tends to the canonical-class boundary point.
    pub canonical_member: usize,
    /// Projective distance between that member's rotation and the boundary
    /// point's `w`.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reconciliation {
    pub component: BoundaryComponentId,
    pub d: BoundaryJointCoords,
    pub degenerate: Vec<DegenerateDkpSolution>,
    pub pairs: Vec<MirrorPair>,
    pub unpaired: Vec<usize>,
    /// Every solution paired and `count(full) = 2 count(degenerate)`.
    pub consistent: bool,
}

fn boundary_of(mode: ModeId) -> Result<BoundaryComponentId> {
    match mode {
        ModeId::I1 => Ok(BoundaryComponentId::J1),
        ModeId::I2 => Ok(BoundaryComponentId::J2),
        m => Err(Error::Unsupported(format!("no reconciliation for mode {m}"))),
    }
}

/// Groups `full` (solutions of one DKP instance) into base-plane mirror
/// pairs and maps each pair to a degenerate solution at
/// `d = (r1 - r3, r2 - r3)`.
pub fn reconcile_counts(full: &[DkpSolution], g: &PlatformGeometry, mode: ModeId) -> Result<Reconciliation> {
    let comp = boundary_of(mode)?;
    let first = full
        .first()
        .ok_or_else(|| Error::Solver("no full solutions to reconcile".into()))?;
    let r = ikm(g, &first.point)?;
    let d = BoundaryJointCoords::new(r.r1 - r.r3, r.r2 - r.r3);
    let canonical = degenerate_dkp_oriented(g, comp, d, Orientation::Canonical)?.solutions;
    let flipped = degenerate_dkp_oriented(g, comp, d, Orientation::Flipped)?.solutions;

    let mut partner: Vec<Option<usize>> = vec![None; full.len()];
    for a in 0..full.len() {
        let ma = mirror(&full[a].point)?;
        for b in 0..full.len() {
            if b != a && ma.proj_dist(&full[b].point) < 1e-5 {
                partner[a] = Some(b);
            }
        }
    }

    // Orientation class and nearest boundary point of each full solution.
    let classify = |s: &DkpSolution| -> Result<Option<(Orientation, usize, f64)>> {
        let m = motion_from_study(&s.point)?;
        let dir = m.translation.normalize();
        let x = s.point.x;
        let mut best: Option<(Orientation, usize, f64)> = None;
        for (o, list) in [(Orientation::Canonical, &canonical), (Orientation::Flipped, &flipped)] {
            for (k, ds) in list.iter().enumerate() {
                if direction_vector(&ds.point).dot(&dir) <= 0.0 {
                    continue;
                }
                let dist = proj::proj_dist(&x, &ds.point.w);
                if best.is_none_or(|b| dist < b.2) {
                    best = Some((o, k, dist));
                }
            }
        }
        Ok(best)
    };

    let mut pairs = Vec::new();
    let mut unpaired = Vec::new();
    let mut seen = vec![false; full.len()];
    for a in 0..full.len() {
        if seen[a] {
            continue;
        }
        let Some(b) = partner[a].filter(|&b| !seen[b]) else {
            unpaired.push(a);
            seen[a] = true;
            continue;
        };
        seen[a] = true;
        seen[b] = true;
        let members = if full[a].z <= full[b].z { [a, b] } else { [b, a] };
        let ca = classify(&full[members[0]])?;
        let cb = classify(&full[members[1]])?;
        let pick = match (ca, cb) {
            (Some((Orientation::Canonical, k, dist)), _) => Some((members[0], k, dist)),
            (_, Some((Orientation::Canonical, k, dist))) => Some((members[1], k, dist)),
            _ => None,
        };
        match pick {
            Some((m, k, dist)) => pairs.push(MirrorPair {
                members,
                degenerate: k,
                canonical_member: m,
                distance: dist,
            }),
            None => unpaired.extend(members),
        }
    }
    unpaired.sort_unstable();
    let consistent = unpaired.is_empty() && full.len() == 2 * canonical.len();
    Ok(Reconciliation {
        component: comp,
        d,
        degenerate: canonical,
        pairs,
        unpaired,
        consistent,
    })
}
