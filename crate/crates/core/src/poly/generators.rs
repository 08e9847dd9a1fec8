use std::sync::OnceLock;

use super::{parse, CompiledPoly, Poly, NVARS, W, X, Y};
use crate::error::{Error, Result};
use crate::proj;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetKind {
    /// Generators homogeneous in `(x, y)` jointly.
    Mode,
    /// Generators bihomogeneous in `(w; y)`.
    Boundary,
}

/// A named list of generators.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    pub name: String,
    pub kind: SetKind,
    /// The printed list is incomplete.
    pub partial: bool,
    pub polys: Vec<Poly>,
    compiled: Vec<CompiledPoly>,
    /// Joint `(x, y)` degree (mode sets) or `(w, y)` bidegree (boundary sets).
    pub degrees: Vec<(u32, u32)>,
    pub variables_used: u16,
}

/// `(name, file contents)` of the shipped generator files.
const SOURCES: [(&str, &str); 15] = [
    ("I1", include_str!("../../data/generators/I1.txt")),
    ("I2", include_str!("../../data/generators/I2.txt")),
    ("K0", include_str!("../../data/generators/K0.txt")),
    ("K1", include_str!("../../data/generators/K1.txt")),
    ("K2", include_str!("../../data/generators/K2.txt")),
    ("K3", include_str!("../../data/generators/K3.txt")),
    ("K4", include_str!("../../data/generators/K4.txt")),
    ("K5", include_str!("../../data/generators/K5.txt")),
    ("K6", include_str!("../../data/generators/K6.txt")),
    ("K8", include_str!("../../data/generators/K8.txt")),
    ("J1", include_str!("../../data/generators/J1.txt")),
    ("J2", include_str!("../../data/generators/J2.txt")),
    ("L5", include_str!("../../data/generators/L5.txt")),
    ("L6", include_str!("../../data/generators/L6.txt")),
    ("L7", include_str!("../../data/generators/L7.txt")),
];

/// Number of terms of each generator, per set, as transcribed.
pub const EXPECTED_TERM_COUNTS: [(&str, &[usize]); 15] = [
    ("I1", &[1, 3, 4, 5, 9, 10]),
    ("I2", &[1, 3, 4, 5, 10, 13]),
    ("K0", &[1, 1, 1, 1]),
    ("K1", &[1, 1, 1, 1]),
    ("K2", &[1, 1, 1, 1]),
    ("K3", &[1, 1, 1, 1]),
    ("K4", &[1, 1, 1, 1]),
    ("K5", &[1, 1, 1, 1]),
    ("K6", &[1, 1, 1, 1]),
    ("K8", &[3, 3, 6]),
    ("J1", &[1, 1, 2, 2, 2]),
    ("J2", &[1, 1, 2, 2, 2]),
    ("L5", &[1, 1, 1, 1]),
    ("L6", &[1, 1, 1, 1]),
    ("L7", &[2, 2, 2, 2, 2, 2]),
];

/// Content fingerprints of the shipped sets, see [`GeneratorSet::fingerprint`].
pub const EXPECTED_FINGERPRINTS: [(&str, u64); 15] = [
    ("I1", 0xba40_8639_3b53_0398),
    ("I2", 0xc51b_503a_a4d4_afaa),
    ("K0", 0x56e0_ff8d_07ee_9b95),
    ("K1", 0x2cf7_6c58_b210_e1e8),
    ("K2", 0x3c3c_71ec_eec4_f342),
    ("K3", 0xa51f_385f_e2ae_907b),
    ("K4", 0x0bcd_d0e3_37e8_26d7),
    ("K5", 0x8b02_8abf_c9f8_4b60),
    ("K6", 0x38a2_8c43_8315_e11e),
    ("K8", 0xb335_b8a9_9966_3af9),
    ("J1", 0x2a1a_cc0f_84f4_a9de),
    ("J2", 0xf3a7_5f84_da3e_e802),
    ("L5", 0x255e_a6e3_924b_54eb),
    ("L6", 0x84c7_6c1d_1027_d887),
    ("L7", 0xe81a_277e_ad3f_f3f5),
];

impl GeneratorSet {
    /// Parses the text format: `# key: value` header lines (`name`, `kind`,
    /// `partial`), other `#` lines ignored, then one generator per line.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut name = None;
        let mut kind = None;
        let mut partial = false;
        let mut polys = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                if let Some((k, v)) = meta.split_once(':') {
                    match (k.trim(), v.trim()) {
                        ("name", v) => name = Some(v.to_string()),
                        ("kind", "mode") => kind = Some(SetKind::Mode),
                        ("kind", "boundary") => kind = Some(SetKind::Boundary),
                        ("partial", v) => partial = v == "true",
                        _ => {}
                    }
                }
                continue;
            }
            let p = parse(line).map_err(|e| match e {
                Error::Parse { pos, msg } => Error::Parse {
                    pos,
                    msg: format!("line {}: {msg}", lineno + 1),
                },
                e => e,
            })?;
            polys.push(p);
        }
        let name = name.ok_or_else(|| Error::Parse { pos: 0, msg: "missing '# name:' header".into() })?;
        let kind = kind.ok_or_else(|| Error::Parse { pos: 0, msg: "missing '# kind:' header".into() })?;
        GeneratorSet::new(name, kind, partial, polys)
    }

    pub fn new(name: String, kind: SetKind, partial: bool, polys: Vec<Poly>) -> Result<Self> {
        let xy: Vec<usize> = X.iter().chain(&Y).copied().collect();
        let mut degrees = Vec::with_capacity(polys.len());
        for (k, p) in polys.iter().enumerate() {
            let d = match kind {
                SetKind::Mode => p.degree_in(&xy).map(|d| (d, 0)).filter(|_| p.degree_in(&W) == Some(0)),
                SetKind::Boundary => p
                    .degree_in(&W)
                    .zip(p.degree_in(&Y))
                    .filter(|_| p.degree_in(&X) == Some(0)),
            };
            let d = d.ok_or_else(|| Error::Parse {
                pos: 0,
                msg: format!("{name}: generator {} is not homogeneous", k + 1),
            })?;
            degrees.push(d);
        }
        let variables_used = polys.iter().fold(0, |m, p| m | p.variables_used());
        let compiled = polys.iter().map(Poly::compile).collect();
        Ok(GeneratorSet {
            name,
            kind,
            partial,
            polys,
            compiled,
            degrees,
            variables_used,
        })
    }

    pub fn term_counts(&self) -> Vec<usize> {
        self.polys.iter().map(Poly::num_terms).collect()
    }

    pub fn eval_all<T: Scalar>(&self, point: &[T; NVARS]) -> Vec<T> {
        self.compiled.iter().map(|c| c.eval(point)).collect()
    }

    pub fn eval_into<T: Scalar>(&self, point: &[T; NVARS], out: &mut [T]) {
        for (o, c) in out.iter_mut().zip(&self.compiled) {
            *o = c.eval(point);
        }
    }

    /// Max of `|g(p)|` over generators after normalizing `p`: the `(x, y)`
    /// block to unit norm for mode sets, the `w` and `y` blocks separately
    /// for boundary sets.
    pub fn residual_norm(&self, point: &[f64; NVARS]) -> f64 {
        let mut p = *point;
        match self.kind {
            SetKind::Mode => {
                proj::normalize_in_place(&mut p[0..8]);
            }
            SetKind::Boundary => {
                proj::normalize_in_place(&mut p[4..8]);
                proj::normalize_in_place(&mut p[8..12]);
            }
        }
        self.compiled.iter().fold(0.0, |m, c| m.max(c.eval(&p).abs()))
    }

    /// Indices `i` such that `xᵢ` or `yᵢ` (as variable index) is one of the
    /// generators, i.e. coordinates forced to zero.
    pub fn coordinate_zeros(&self) -> Vec<usize> {
        self.polys
            .iter()
            .filter(|p| p.num_terms() == 1 && p.total_degree() == 1)
            .map(|p| {
                let (m, _) = p.terms().next().unwrap();
                m.iter().position(|&e| e == 1).unwrap()
            })
            .collect()
    }

    /// FNV-1a hash of the canonical text of the generators, independent of
    /// the formatting of the source file.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for p in &self.polys {
            for b in p.to_string().bytes().chain(std::iter::once(b'\n')) {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        h
    }

    /// Checks the term counts against [`EXPECTED_TERM_COUNTS`] and the
    /// content against [`EXPECTED_FINGERPRINTS`].
    pub fn verify_checksum(&self) -> Result<()> {
        let expected = EXPECTED_TERM_COUNTS
            .iter()
            .find(|(n, _)| *n == self.name)
            .map(|(_, c)| *c)
            .ok_or_else(|| Error::Unsupported(format!("no checksum for set {}", self.name)))?;
        let got = self.term_counts();
        if got != expected {
            return Err(Error::Parse {
                pos: 0,
                msg: format!("{}: term counts {:?}, expected {:?}", self.name, got, expected),
            });
        }
        let fp = EXPECTED_FINGERPRINTS.iter().find(|(n, _)| *n == self.name).map(|(_, f)| *f);
        if fp != Some(self.fingerprint()) {
            return Err(Error::Parse {
                pos: 0,
                msg: format!("{}: content fingerprint {:016x} does not match", self.name, self.fingerprint()),
            });
        }
        Ok(())
    }
}

/// Point with `x`, `y` and `w` blocks for generator evaluation.
pub fn point12(x: &[f64; 4], y: &[f64; 4], w: &[f64; 4]) -> [f64; NVARS] {
    let mut p = [0.0; NVARS];
    p[0..4].copy_from_slice(x);
    p[4..8].copy_from_slice(y);
    p[8..12].copy_from_slice(w);
    p
}

pub fn generator_sets() -> &'static [GeneratorSet] {
    static SETS: OnceLock<Vec<GeneratorSet>> = OnceLock::new();
    SETS.get_or_init(|| {
        SOURCES
            .iter()
            .map(|(name, text)| {
                let gs = GeneratorSet::from_text(text).unwrap_or_else(|e| panic!("shipped set {name}: {e}"));
                assert_eq!(gs.name, *name);
                gs
            })
            .collect()
    })
}

pub fn generator_set(name: &str) -> Option<&'static GeneratorSet> {
    generator_sets().iter().find(|g| g.name == name)
}
