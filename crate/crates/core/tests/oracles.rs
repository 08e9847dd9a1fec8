//! Solvers in the library checked against independent elementary solvers
//! written here: the 3-RPS first mode parametrized by half-turn axes, the
//! translational mode by trilateration, and the boundary systems solved by
//! brute force on the unit sphere.

use nalgebra::{DMatrix, DVector, Matrix3, Quaternion, SVector, UnitQuaternion, Vector2, Vector3};
use studykin::kinematics::{
    degenerate_dkp, dkp, BoundaryJointCoords, DkpOptions, JointLengths,
};
use studykin::robots::{Architecture, BoundaryComponentId, ModeId, PlatformGeometry};
use studykin::study::motion_from_study;

const K1: f64 = 1.0;
const K2: f64 = 1.5;

fn rho(i: usize) -> Vector3<f64> {
    let a = [0.0, -2.0 * std::f64::consts::FRAC_PI_3, 2.0 * std::f64::consts::FRAC_PI_3][i];
    // Unit vectors in the horizontal (y, z) plane at 120° spacing, the first
    // pointing along -z.
    Vector3::new(0.0, a.sin(), -a.cos())
}

fn tangent(i: usize) -> Vector3<f64> {
    Vector3::x().cross(&rho(i))
}

/// Square Newton with a forward-difference Jacobian.
fn newton<const M: usize>(f: impl Fn(&SVector<f64, M>) -> SVector<f64, M>, mut x: SVector<f64, M>) -> Option<SVector<f64, M>> {
    for _ in 0..60 {
        let fx = f(&x);
        if fx.amax() < 1e-12 {
            return Some(x);
        }
        let mut jac = DMatrix::<f64>::zeros(M, M);
        for j in 0..M {
            let h = 1e-7 * (1.0 + x[j].abs());
            let mut xp = x;
            xp[j] += h;
            jac.set_column(j, &((f(&xp) - fx) / h));
        }
        let rhs = DVector::from_iterator(M, fx.iter().map(|v| -v));
        let step = jac.lu().solve(&rhs)?;
        // Damp long steps.
        let s = step.amax();
        let scale = if s > 0.5 { 0.5 / s } else { 1.0 };
        for j in 0..M {
            x[j] += step[j] * scale;
        }
    }
    let fx = f(&x);
    (fx.amax() < 1e-10).then_some(x)
}

/// Points spread over the unit sphere.
fn fibonacci_sphere(n: usize) -> Vec<Vector3<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let a = golden * k as f64;
            Vector3::new(r * a.cos(), r * a.sin(), z)
        })
        .collect()
}

// ---------------------------------------------------------------- I1 oracle

/// Configurations of the first 3-RPS mode: the platform is turned by a
/// half-turn `R = 2nnᵀ - I`; the revolute constraints fix the horizontal
/// translation, the lengths fix `n` and the height.
struct HalfTurnConfig {
    n: Vector3<f64>,
    t: Vector3<f64>,
}

fn half_turn(n: &Vector3<f64>) -> Matrix3<f64> {
    2.0 * n * n.transpose() / n.norm_squared() - Matrix3::identity()
}

fn horizontal_translation(rot: &Matrix3<f64>) -> Vector2<f64> {
    // Three equations (t + R bᵢ - Aᵢ)·τᵢ = 0 in (t_y, t_z); use the first two
    // and check the third afterwards.
    let rows: Vec<(Vector2<f64>, f64)> = (0..3)
        .map(|i| {
            let tau = tangent(i);
            (Vector2::new(tau.y, tau.z), (rho(i) * K1 - rot * rho(i) * K2).dot(&tau))
        })
        .collect();
    let a = nalgebra::Matrix2::new(rows[0].0.x, rows[0].0.y, rows[1].0.x, rows[1].0.y);
    let t = a.lu().solve(&Vector2::new(rows[0].1, rows[1].1)).unwrap();
    assert!((rows[2].0.dot(&t) - rows[2].1).abs() < 1e-9, "half-turns satisfy all three constraints");
    t
}

fn i1_oracle(r: [f64; 3]) -> Vec<HalfTurnConfig> {
    let residual = |v: &SVector<f64, 4>| -> SVector<f64, 4> {
        let n = Vector3::new(v[0], v[1], v[2]);
        let rot = half_turn(&n);
        let yz = horizontal_translation(&rot);
        let t = Vector3::new(v[3], yz.x, yz.y);
        let mut out = SVector::<f64, 4>::zeros();
        out[0] = n.norm_squared() - 1.0;
        for i in 0..3 {
            let limb = rot * rho(i) * K2 + t - rho(i) * K1;
            out[i + 1] = (limb.norm_squared() - r[i] * r[i]) / (2.0 * r[i]);
        }
        out
    };
    let mut found: Vec<HalfTurnConfig> = Vec::new();
    for n in fibonacci_sphere(300) {
        if n.z < 0.0 {
            continue; // n and -n give the same half-turn
        }
        for h in [r[2], -r[2]] {
            let Some(v) = newton(residual, SVector::<f64, 4>::new(n.x, n.y, n.z, h)) else { continue };
            let n = Vector3::new(v[0], v[1], v[2]).normalize();
            let n = if n.z < 0.0 || (n.z == 0.0 && n.y < 0.0) { -n } else { n };
            let yz = horizontal_translation(&half_turn(&n));
            let t = Vector3::new(v[3], yz.x, yz.y);
            if !found.iter().any(|c| (c.n - n).norm() < 1e-6 && (c.t - t).norm() < 1e-5) {
                found.push(HalfTurnConfig { n, t });
            }
        }
    }
    found
}

fn check_i1(r: [f64; 3]) -> usize {
    let g = PlatformGeometry::default_for(Architecture::Rps3);
    let oracle = i1_oracle(r);
    let rep = dkp(&g, ModeId::I1, &JointLengths::new(r[0], r[1], r[2]).unwrap(), &DkpOptions::default()).unwrap();
    assert_eq!(rep.solutions.len(), oracle.len(), "solution count at {r:?}");
    for s in &rep.solutions {
        let m = motion_from_study(&s.point).unwrap();
        let x = s.point.x;
        let n = Vector3::new(x[1], x[2], x[3]);
        assert!(x[0].abs() < 1e-9 * n.norm(), "half-turn");
        let hit = oracle.iter().any(|c| {
            (half_turn(&c.n) - m.rotation).amax() < 1e-7 && (c.t - m.translation).amax() < 1e-6 * (1.0 + r[2])
        });
        assert!(hit, "solution at {r:?} with t {:?} not found by the oracle", m.translation);
        assert!((s.z - m.translation.x).abs() < 1e-12);
    }
    oracle.len()
}

#[test]
fn first_rps_mode_matches_half_turn_parametrization() {
    assert_eq!(check_i1([52.0, 51.0, 50.0]), 4);
    assert_eq!(check_i1([10.2, 9.9, 10.0]), 8);
    let counts: Vec<usize> = [[5.9, 4.2, 5.0], [7.0, 6.0, 5.0], [14.0, 3.0, 10.0], [200.5, 201.2, 200.0]]
        .into_iter()
        .map(check_i1)
        .collect();
    assert_eq!(counts, [8, 4, 0, 4]);
}

// ---------------------------------------------------------------- K1 oracle

/// Pure translations with all three limb lengths prescribed.
fn trilateration_oracle(r: [f64; 3]) -> Vec<Vector3<f64>> {
    // |t - cᵢ| = rᵢ with cᵢ = (k1 - k2) ρᵢ in the horizontal plane.
    let c: Vec<Vector3<f64>> = (0..3).map(|i| rho(i) * (K1 - K2)).collect();
    let row = |i: usize| Vector2::new(2.0 * (c[i].y - c[2].y), 2.0 * (c[i].z - c[2].z));
    let rhs = |i: usize| r[2] * r[2] - r[i] * r[i] + c[i].norm_squared() - c[2].norm_squared();
    let a = nalgebra::Matrix2::from_rows(&[row(0).transpose(), row(1).transpose()]);
    let yz = a.lu().solve(&Vector2::new(rhs(0), rhs(1))).unwrap();
    let h2 = r[0] * r[0] - (yz.x - c[0].y).powi(2) - (yz.y - c[0].z).powi(2);
    if h2 < 0.0 {
        return vec![];
    }
    vec![Vector3::new(-h2.sqrt(), yz.x, yz.y), Vector3::new(h2.sqrt(), yz.x, yz.y)]
}

#[test]
fn translational_mode_matches_trilateration() {
    for arch in [Architecture::Upu3Snu, Architecture::Upu3Tsai] {
        let g = PlatformGeometry::default_for(arch);
        for r in [[3.0, 3.2, 2.9], [20.0, 20.5, 19.7], [1.0, 1.1, 0.9]] {
            let oracle = trilateration_oracle(r);
            let rep = dkp(&g, ModeId::K1, &JointLengths::new(r[0], r[1], r[2]).unwrap(), &DkpOptions::default()).unwrap();
            assert_eq!(rep.solutions.len(), oracle.len(), "{arch} {r:?}");
            for (s, t) in rep.solutions.iter().zip(&oracle) {
                let m = motion_from_study(&s.point).unwrap();
                assert!((m.rotation - Matrix3::identity()).amax() < 1e-10);
                assert!((m.translation - t).amax() < 1e-8, "{arch} {r:?}: {:?} vs {t:?}", m.translation);
            }
        }
    }
}

#[test]
fn unreachable_translations_have_no_solutions() {
    let g = PlatformGeometry::default_for(Architecture::Upu3Tsai);
    let r = [1.0, 4.0, 1.0];
    assert!(trilateration_oracle(r).is_empty());
    let rep = dkp(&g, ModeId::K1, &JointLengths::new(r[0], r[1], r[2]).unwrap(), &DkpOptions { starts: 64, ..Default::default() })
        .unwrap();
    assert!(rep.solutions.is_empty());
    assert!(rep.diagnostic.is_some());
}

// ------------------------------------------------------- boundary oracles

/// Boundary IKM evaluated from scratch: rotation of the unit quaternion `w`,
/// direction `u = vec(y w̄)`, and the length differences along `u`.
fn boundary_ikm(w: [f64; 4], y: [f64; 4]) -> Vector2<f64> {
    let wq = Quaternion::new(w[0], w[1], w[2], w[3]);
    let rot = UnitQuaternion::from_quaternion(wq).to_rotation_matrix();
    let u = (Quaternion::new(y[0], y[1], y[2], y[3]) * wq.conjugate()).imag();
    let v: Vec<f64> = (0..3).map(|i| (rot * rho(i) * K2 - rho(i) * K1).dot(&u)).collect();
    Vector2::new(v[0] - v[2], v[1] - v[2])
}

/// Chart parametrizations, `c` a unit vector.
fn chart(id: BoundaryComponentId, c: &Vector3<f64>) -> ([f64; 4], [f64; 4]) {
    let (a, b, d) = (c.x, c.y, c.z);
    match id {
        BoundaryComponentId::J1 => ([0.0, a, b, d], [a, 0.0, d, -b]),
        BoundaryComponentId::L5 => ([0.0, a, b, d], [1.0, 0.0, 0.0, 0.0]),
        BoundaryComponentId::L6 => ([a, 0.0, b, d], [0.0, 1.0, 0.0, 0.0]),
        _ => unreachable!(),
    }
}

/// All unit `c` with `boundary_ikm(chart(c)) = target`, found from a grid of
/// starts; `antipodal` merges `c` with `-c` (same boundary point).
fn sphere_oracle(id: BoundaryComponentId, target: Vector2<f64>, antipodal: bool) -> Vec<Vector3<f64>> {
    let f = |v: &SVector<f64, 3>| {
        let c = Vector3::new(v[0], v[1], v[2]);
        let (w, y) = chart(id, &c);
        let d = boundary_ikm(w, y) - target;
        SVector::<f64, 3>::new(c.norm_squared() - 1.0, d.x, d.y)
    };
    let mut found: Vec<Vector3<f64>> = Vec::new();
    for s in fibonacci_sphere(400) {
        let Some(v) = newton(f, s) else { continue };
        let c = Vector3::new(v[0], v[1], v[2]).normalize();
        let same = |e: &Vector3<f64>| (e - c).norm() < 1e-6 || (antipodal && (e + c).norm() < 1e-6);
        if !found.iter().any(same) {
            found.push(c);
        }
    }
    found
}

fn matches_up_to_sign(a: &[f64; 3], b: &Vector3<f64>, antipodal: bool) -> bool {
    let a = Vector3::from(*a);
    (a - b).norm() < 1e-7 || (antipodal && (a + b).norm() < 1e-7)
}

#[test]
fn j1_degenerate_dkp_matches_sphere_oracle() {
    let g = PlatformGeometry::default_for(Architecture::Rps3);
    let ds = [(2.0, 1.0), (-1.0, 0.5), (0.3, -1.7), (1.2, 2.0), (2.4, 2.2), (3.0, 0.0), (-2.5, -2.5)];
    for (d1, d2) in ds {
        let oracle = sphere_oracle(BoundaryComponentId::J1, Vector2::new(d1, d2), true);
        let lib = degenerate_dkp(&g, BoundaryComponentId::J1, BoundaryJointCoords::new(d1, d2)).unwrap();
        assert_eq!(lib.solutions.len(), oracle.len(), "count at ({d1}, {d2})");
        for s in &lib.solutions {
            assert!(oracle.iter().any(|c| matches_up_to_sign(&s.chart, c, true)), "({d1}, {d2}): {:?}", s.chart);
        }
        // Inside the ellipse two solutions, outside none.
        let inside = d1 * d1 + d2 * d2 - d1 * d2 < 81.0 / 16.0;
        assert_eq!(oracle.len(), if inside { 2 } else { 0 }, "({d1}, {d2})");
    }
}

#[test]
fn tsai_degenerate_dkp_matches_sphere_oracle() {
    let g = PlatformGeometry::default_for(Architecture::Upu3Tsai);
    let ds = [(0.5, 0.0), (-0.5, 0.0), (2.0, 0.0), (-3.0, 0.0), (5.0, 0.0), (0.4, 0.3), (1.0, -2.0), (-2.0, 4.0)];
    for (d1, d2) in ds {
        for id in [BoundaryComponentId::L5, BoundaryComponentId::L6] {
            let oracle = sphere_oracle(id, Vector2::new(d1, d2), false);
            let lib = degenerate_dkp(&g, id, BoundaryJointCoords::new(d1, d2)).unwrap();
            assert_eq!(lib.solutions.len(), oracle.len(), "{id} count at ({d1}, {d2})");
            for s in &lib.solutions {
                assert!(oracle.iter().any(|c| matches_up_to_sign(&s.chart, c, false)), "{id} ({d1}, {d2}): {:?}", s.chart);
            }
        }
    }
}
