//! Damped Gauss-Newton (Levenberg-Marquardt) for small overdetermined
//! systems with forward-mode derivatives.

use nalgebra::{SMatrix, SVector};

use crate::scalar::{Jet, Scalar};

/// Maximum number of residuals of a system.
pub const MAX_RESIDUALS: usize = 20;

pub const N: usize = 7;
pub type J7 = Jet<N>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub max_iter: usize,
    /// Stop when the max-norm of the residual drops below this.
    pub tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { max_iter: 100, tol: 1e-13 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonResult {
    pub x: [f64; N],
    /// Max-norm of the residual at `x`.
    pub residual: f64,
    pub iterations: usize,
    /// Ratio of the smallest to the largest singular value of the Jacobian
    /// at `x`.
    pub conditioning: f64,
}

/// A residual function `F: R⁷ → R^m` written once over any scalar type.
pub trait System {
    fn len(&self) -> usize;
    fn eval<T: Scalar>(&self, v: &[T; N], out: &mut [T]);
    /// Applied after every accepted step (e.g. renormalization).
    fn project(&self, _v: &mut [f64; N]) {}
}

fn residual_jet<S: System>(sys: &S, v: &[f64; N], buf: &mut [J7; MAX_RESIDUALS]) -> usize {
    let m = sys.len();
    let vars = J7::vars(v);
    sys.eval(&vars, &mut buf[..m]);
    m
}

fn residual_val<S: System>(sys: &S, v: &[f64; N], buf: &mut [f64; MAX_RESIDUALS]) -> (usize, f64, f64) {
    let m = sys.len();
    sys.eval(v, &mut buf[..m]);
    let sq = buf[..m].iter().map(|r| r * r).sum::<f64>();
    let mx = buf[..m].iter().fold(0.0f64, |a, r| a.max(r.abs()));
    (m, sq, mx)
}

fn normal_equations(jets: &[J7]) -> (SMatrix<f64, N, N>, SVector<f64, N>) {
    let mut a = SMatrix::<f64, N, N>::zeros();
    let mut g = SVector::<f64, N>::zeros();
    for r in jets {
        for i in 0..N {
            g[i] += r.d[i] * r.v;
            for j in 0..=i {
                a[(i, j)] += r.d[i] * r.d[j];
            }
        }
    }
    for i in 0..N {
        for j in 0..i {
            a[(j, i)] = a[(i, j)];
        }
    }
    (a, g)
}

const STALL_WINDOW: usize = 8;
const STALL_RESIDUAL: f64 = 1e-3;
const STALL_RATIO: f64 = 0.9;

pub fn solve<S: System>(sys: &S, start: [f64; N], opts: &NewtonOptions) -> NewtonResult {
    let mut x = start;
    sys.project(&mut x);
    let mut jbuf = [J7::cst(0.0); MAX_RESIDUALS];
    let mut vbuf = [0.0; MAX_RESIDUALS];
    let (_, mut cost, mut mx) = residual_val(sys, &x, &mut vbuf);
    let mut lambda = 1e-3;
    let mut nu = 2.0;
    let mut iterations = 0;
    let mut history = [f64::INFINITY; STALL_WINDOW];
    while iterations < opts.max_iter && mx > opts.tol && cost.is_finite() {
        iterations += 1;
        let m = residual_jet(sys, &x, &mut jbuf);
        let (a, g) = normal_equations(&jbuf[..m]);
        let diag_max = (0..N).map(|i| a[(i, i)]).fold(0.0f64, f64::max).max(1e-300);
        let mut keep_going = false;
        for _ in 0..12 {
            let mut damped = a;
            for i in 0..N {
                damped[(i, i)] += lambda * diag_max;
            }
            let Some(chol) = damped.cholesky() else {
                lambda *= nu;
                nu *= 2.0;
                continue;
            };
            let step = chol.solve(&(-g));
            let mut trial = x;
            for i in 0..N {
                trial[i] += step[i];
            }
            sys.project(&mut trial);
            let (_, tcost, tmx) = residual_val(sys, &trial, &mut vbuf);
            let predicted = -(step.dot(&g) * 2.0 + (step.transpose() * a * step)[(0, 0)]);
            let rho = if predicted > 0.0 { (cost - tcost) / predicted } else { -1.0 };
            if tcost.is_finite() && (tcost < cost || tmx <= opts.tol) {
                let step_norm = step.amax();
                x = trial;
                let converged_step = step_norm < 1e-15 * (1.0 + x.iter().fold(0.0f64, |a, v| a.max(v.abs())));
                history[iterations % STALL_WINDOW] = tcost;
                // Creeping toward a nonzero local minimum far from any root.
                let stalled = iterations >= STALL_WINDOW
                    && tmx > STALL_RESIDUAL
                    && tcost > STALL_RATIO * history[(iterations + 1) % STALL_WINDOW];
                cost = tcost;
                mx = tmx;
                lambda *= f64::max(1.0 / 3.0, 1.0 - (2.0 * rho - 1.0).powi(3));
                lambda = lambda.max(1e-15);
                nu = 2.0;
                keep_going = !(converged_step || stalled);
                break;
            }
            lambda *= nu;
            nu *= 2.0;
        }
        if !keep_going {
            break;
        }
    }
    let m = residual_jet(sys, &x, &mut jbuf);
    NewtonResult {
        x,
        residual: mx,
        iterations,
        conditioning: conditioning(&jbuf[..m]),
    }
}

fn conditioning(jets: &[J7]) -> f64 {
    let (a, _) = normal_equations(jets);
    let eig = a.symmetric_eigenvalues();
    let max = eig.max();
    let min = eig.min().max(0.0);
    if max <= 0.0 {
        0.0
    } else {
        (min / max).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Intersection of the unit sphere in the first three coordinates with
    /// two planes; the other coordinates pinned.
    struct Toy;

    impl System for Toy {
        fn len(&self) -> usize {
            7
        }
        fn eval<T: Scalar>(&self, v: &[T; N], out: &mut [T]) {
            out[0] = v[0] * v[0] + v[1] * v[1] + v[2] * v[2] - T::cst(1.0);
            out[1] = v[0] - v[1];
            out[2] = v[2] - T::cst(0.5);
            for k in 3..7 {
                out[k] = v[k] - T::cst(k as f64);
            }
        }
    }

    #[test]
    fn converges_quadratically_on_a_regular_root() {
        let r = solve(&Toy, [1.0, 0.2, 0.1, 0.0, 0.0, 0.0, 0.0], &NewtonOptions::default());
        let a = (0.75f64 / 2.0).sqrt();
        assert!(r.residual < 1e-13);
        assert!((r.x[0] - a).abs() < 1e-12 && (r.x[1] - a).abs() < 1e-12);
        assert!(r.iterations < 20);
        assert!(r.conditioning > 1e-3);
    }

    #[test]
    fn exact_root_is_a_fixed_point() {
        let a = (0.75f64 / 2.0).sqrt();
        let root = [a, a, 0.5, 3.0, 4.0, 5.0, 6.0];
        let r = solve(&Toy, root, &NewtonOptions::default());
        for i in 0..N {
            assert!((r.x[i] - root[i]).abs() < 1e-15);
        }
    }
}
