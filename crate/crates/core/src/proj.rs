//! Helpers for homogeneous coordinate tuples.

/// Absolute threshold below which a coordinate counts as zero when fixing the
/// sign of a normalized tuple.
pub const SIGN_EPS: f64 = 1e-12;

pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Scales `a` in place to unit Euclidean norm. Returns `false` on the zero tuple.
pub fn normalize_in_place(a: &mut [f64]) -> bool {
    let n = norm(a);
    if n == 0.0 || !n.is_finite() {
        return false;
    }
    for v in a.iter_mut() {
        *v /= n;
    }
    true
}

/// Unit norm and first coordinate with `|c| > SIGN_EPS` positive.
pub fn fix_sign_in_place(a: &mut [f64]) {
    if let Some(first) = a.iter().find(|v| v.abs() > SIGN_EPS) {
        if *first < 0.0 {
            for v in a.iter_mut() {
                *v = -*v;
            }
        }
    }
    for v in a.iter_mut() {
        *v += 0.0;
    }
}

pub fn canonical<const N: usize>(a: &[f64; N]) -> Option<[f64; N]> {
    let mut out = *a;
    if !normalize_in_place(&mut out) {
        return None;
    }
    fix_sign_in_place(&mut out);
    Some(out)
}

/// Projective equality: `|<a,b>| / (|a||b|) > 1 - tol`.
pub fn proj_eq(a: &[f64], b: &[f64], tol: f64) -> bool {
    let na = norm(a);
    let nb = norm(b);
    if na == 0.0 || nb == 0.0 {
        return na == nb;
    }
    dot(a, b).abs() / (na * nb) > 1.0 - tol
}

/// Distance between the projective points `[a]` and `[b]`: the smaller of
/// `|â - b̂|` and `|â + b̂|` for the unit representatives.
pub fn proj_dist(a: &[f64], b: &[f64]) -> f64 {
    let na = norm(a);
    let nb = norm(b);
    let mut minus = 0.0;
    let mut plus = 0.0;
    for (x, y) in a.iter().zip(b) {
        let (x, y) = (x / na, y / nb);
        minus += (x - y) * (x - y);
        plus += (x + y) * (x + y);
    }
    minus.min(plus).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaling_is_invisible() {
        let a = [1.0, -2.0, 0.5, 3.0];
        let b = a.map(|v| -7.5 * v);
        assert!(proj_eq(&a, &b, 1e-10));
        assert!(proj_dist(&a, &b) < 1e-15);
        assert_eq!(canonical(&a).unwrap(), canonical(&b).unwrap());
    }

    #[test]
    fn sign_fixing_skips_tiny_leading_entries() {
        let c = canonical(&[1e-14, -1.0, 0.0]).unwrap();
        assert!(c[1] > 0.0);
        assert!(canonical(&[0.0, 0.0]).is_none());
    }
}
