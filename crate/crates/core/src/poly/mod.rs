//! Sparse polynomials with exact rational coefficients in the twelve
//! variables `x0..x3, y0..y3, w0..w3`.

mod generators;
mod parse;

pub use generators::{generator_set, generator_sets, point12, GeneratorSet, SetKind, EXPECTED_FINGERPRINTS, EXPECTED_TERM_COUNTS};
pub use parse::parse;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::scalar::Scalar;

pub const NVARS: usize = 12;
pub const VAR_NAMES: [&str; NVARS] = [
    "x0", "x1", "x2", "x3", "y0", "y1", "y2", "y3", "w0", "w1", "w2", "w3",
];
pub const X: [usize; 4] = [0, 1, 2, 3];
pub const Y: [usize; 4] = [4, 5, 6, 7];
pub const W: [usize; 4] = [8, 9, 10, 11];

pub type Monomial = [u8; NVARS];

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Poly::zero();
        p.add_term([0; NVARS], c);
        p
    }

    pub fn one() -> Self {
        Poly::constant(BigRational::one())
    }

    pub fn var(i: usize) -> Self {
        let mut m = [0; NVARS];
        m[i] = 1;
        let mut p = Poly::zero();
        p.add_term(m, BigRational::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.iter().map(|&e| e as u32).sum())
            .max()
            .unwrap_or(0)
    }

    /// Common degree of all terms in the variables `vars`, if there is one.
    pub fn degree_in(&self, vars: &[usize]) -> Option<u32> {
        let mut degs = self
            .terms
            .keys()
            .map(|m| vars.iter().map(|&v| m[v] as u32).sum::<u32>());
        let first = degs.next().unwrap_or(0);
        degs.all(|d| d == first).then_some(first)
    }

    /// Bit `i` set when variable `i` occurs.
    pub fn variables_used(&self) -> u16 {
        let mut mask = 0u16;
        for m in self.terms.keys() {
            for (i, &e) in m.iter().enumerate() {
                if e > 0 {
                    mask |= 1 << i;
                }
            }
        }
        mask
    }

    pub fn eval_rational(&self, point: &[BigRational; NVARS]) -> BigRational {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.iter().enumerate() {
                for _ in 0..e {
                    t *= &point[i];
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval(&self, point: &[f64; NVARS]) -> f64 {
        self.compile().eval(point)
    }

    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let factors = m
                        .iter()
                        .enumerate()
                        .filter(|(_, &e)| e > 0)
                        .map(|(i, &e)| (i as u8, e))
                        .collect();
                    (c.to_f64().expect("finite coefficient"), factors)
                })
                .collect(),
        }
    }
}

/// Floating-point evaluation form of a [`Poly`].
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledPoly {
    terms: Vec<(f64, Vec<(u8, u8)>)>,
}

impl CompiledPoly {
    pub fn eval<T: Scalar>(&self, point: &[T; NVARS]) -> T {
        let mut acc = T::zero();
        for (c, factors) in &self.terms {
            let mut t: Option<T> = None;
            for &(i, e) in factors {
                let p = point[i as usize].powi(e as u32);
                t = Some(match t {
                    None => p,
                    Some(t) => t * p,
                });
            }
            acc = acc + match t {
                None => T::cst(*c),
                Some(t) => t.scale(*c),
            };
        }
        acc
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, -c.clone());
        }
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let mut m = *ma;
                for i in 0..NVARS {
                    m[i] += mb[i];
                }
                out.add_term(m, ca * cb);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (*m, -c.clone())).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for Poly {
            type Output = Poly;
            fn $f(self, rhs: Poly) -> Poly {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

fn fmt_rational(c: &BigRational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mut factors = Vec::new();
            for (i, &e) in m.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(VAR_NAMES[i].to_string()),
                    _ => factors.push(format!("{}^{}", VAR_NAMES[i], e)),
                }
            }
            if factors.is_empty() || !abs.is_one() {
                factors.insert(0, fmt_rational(&abs));
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Embeds a float point exactly as rationals.
pub fn rational_point(p: &[f64; NVARS]) -> [BigRational; NVARS] {
    std::array::from_fn(|i| BigRational::from_float(p[i]).expect("finite coordinate"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small_rational() -> impl Strategy<Value = BigRational> {
        (-20i64..20, 1i64..7).prop_map(|(n, d)| rational(n, d))
    }

    fn rational_vec() -> impl Strategy<Value = [BigRational; NVARS]> {
        prop::collection::vec(small_rational(), NVARS).prop_map(|v| std::array::from_fn(|i| v[i].clone()))
    }

    fn random_poly() -> impl Strategy<Value = Poly> {
        prop::collection::vec((prop::array::uniform12(0u8..3), -9i64..9), 1..6).prop_map(|terms| {
            let mut p = Poly::zero();
            for (m, c) in terms {
                p.add_term(m, rational(c, 1));
            }
            p
        })
    }

    #[test]
    fn quadric_vanishes_at_identity() {
        let q = parse("x0*y0 + x1*y1 + x2*y2 + x3*y3").unwrap();
        let mut p = [0.0; NVARS];
        p[0] = 1.0;
        assert_eq!(q.eval(&p), 0.0);
        assert_eq!(q.num_terms(), 4);
    }

    #[test]
    fn no_zero_terms_are_stored() {
        let p = parse("x0 - x0 + 2*y1 - y1 - y1").unwrap();
        assert!(p.is_zero());
        assert_eq!(p.to_string(), "0");
    }

    proptest! {
        #[test]
        fn evaluation_is_a_ring_homomorphism(p in random_poly(), q in random_poly(), v in rational_vec()) {
            prop_assert_eq!((&p + &q).eval_rational(&v), p.eval_rational(&v) + q.eval_rational(&v));
            prop_assert_eq!((&p * &q).eval_rational(&v), p.eval_rational(&v) * q.eval_rational(&v));
            prop_assert_eq!((&p - &q).eval_rational(&v), p.eval_rational(&v) - q.eval_rational(&v));
        }

        #[test]
        fn display_round_trips(p in random_poly()) {
            prop_assert_eq!(parse(&p.to_string()).unwrap(), p);
        }
    }
}
