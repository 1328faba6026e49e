//! Direct and reciprocal lattices, reciprocal-lattice vectors and folding of
//! wave vectors into the first Brillouin zone.
//!
//! Vectors are stored as `[f64; 3]` regardless of dimension; the components
//! beyond `dim` are always zero.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

/// Default threshold on `|det|` below which a basis is considered degenerate.
pub const DEGENERATE_EPS: f64 = 1e-12;

/// Candidate reciprocal vectors are searched with indices in `-SHELLS..=SHELLS`.
pub const SHELLS: i64 = 3;

/// Relative band inside which two candidate norms count as a tie.
const TIE_REL: f64 = 1e-10;

pub(crate) fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn axpy(acc: &mut Vec3, s: f64, x: &Vec3) {
    for i in 0..3 {
        acc[i] += s * x[i];
    }
}

fn pad(dim: usize, v: &[f64]) -> Result<Vec3> {
    if v.len() != dim {
        return Err(Error::SizeMismatch {
            expected: dim,
            got: v.len(),
        });
    }
    let mut out = [0.0; 3];
    out[..dim].copy_from_slice(v);
    Ok(out)
}

fn check_dim(dim: usize) -> Result<()> {
    if (1..=3).contains(&dim) {
        Ok(())
    } else {
        Err(Error::InvalidDimension(dim))
    }
}

/// Direct-lattice basis `a, b, c` in one to three dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeBasis {
    dim: usize,
    vectors: Vec<Vec3>,
}

/// On-disk form of a basis: `{"dim": 3, "vectors": [[..], [..], [..]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSpec {
    pub dim: usize,
    pub vectors: Vec<Vec<f64>>,
}

impl TryFrom<BasisSpec> for LatticeBasis {
    type Error = Error;

    fn try_from(spec: BasisSpec) -> Result<Self> {
        if spec.vectors.len() != spec.dim {
            return Err(Error::ShapeMismatch(format!(
                "dim is {} but {} basis vectors were given",
                spec.dim,
                spec.vectors.len()
            )));
        }
        LatticeBasis::new(&spec.vectors)
    }
}

impl LatticeBasis {
    /// Builds a basis from `dim` vectors of `dim` components each.
    pub fn new<V: AsRef<[f64]>>(vectors: &[V]) -> Result<Self> {
        Self::with_threshold(vectors, DEGENERATE_EPS)
    }

    pub fn with_threshold<V: AsRef<[f64]>>(vectors: &[V], eps: f64) -> Result<Self> {
        let dim = vectors.len();
        check_dim(dim)?;
        let vectors = vectors
            .iter()
            .map(|v| pad(dim, v.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        let basis = LatticeBasis { dim, vectors };
        let det = basis.determinant();
        if det.is_nan() || det.abs() <= eps {
            return Err(Error::DegenerateBasis {
                det,
                threshold: eps,
            });
        }
        Ok(basis)
    }

    /// Simple cubic (or square, or uniform chain) lattice with spacing `a0`.
    pub fn cubic(dim: usize, a0: f64) -> Result<Self> {
        check_dim(dim)?;
        let vectors: Vec<Vec<f64>> = (0..dim)
            .map(|i| {
                let mut v = vec![0.0; dim];
                v[i] = a0;
                v
            })
            .collect();
        Self::new(&vectors)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vectors(&self) -> &[Vec3] {
        &self.vectors
    }

    /// Signed volume (length, area) of the unit cell.
    pub fn determinant(&self) -> f64 {
        let v = &self.vectors;
        match self.dim {
            1 => v[0][0],
            2 => v[0][0] * v[1][1] - v[0][1] * v[1][0],
            _ => dot(&v[0], &cross(&v[1], &v[2])),
        }
    }

    /// Cartesian position `m a + n b + p c` for (possibly fractional) coordinates.
    pub fn point(&self, coords: &[f64]) -> Result<Vec3> {
        let c = pad(self.dim, coords)?;
        let mut out = [0.0; 3];
        for (ci, v) in c.iter().zip(&self.vectors) {
            axpy(&mut out, *ci, v);
        }
        Ok(out)
    }

    pub fn reciprocal(&self) -> ReciprocalBasis {
        reciprocal_basis(self)
    }
}

/// Reciprocal basis `A, B, C` with `A_i · a_j = 2π δ_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReciprocalBasis {
    dim: usize,
    vectors: Vec<Vec3>,
    direct: Vec<Vec3>,
}

impl ReciprocalBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vectors(&self) -> &[Vec3] {
        &self.vectors
    }

    /// The direct basis this was built from.
    pub fn direct(&self) -> &[Vec3] {
        &self.direct
    }

    fn combine(&self, idx: &[i64; 3]) -> Vec3 {
        let mut out = [0.0; 3];
        for (i, v) in self.vectors.iter().enumerate() {
            axpy(&mut out, idx[i] as f64, v);
        }
        out
    }
}

/// Reciprocal-lattice vector `G = hA + kB + lC`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GVector {
    pub indices: [i64; 3],
    pub cartesian: Vec3,
}

impl GVector {
    pub fn is_zero(&self) -> bool {
        self.indices == [0, 0, 0]
    }
}

/// A wave vector split as `k = k_folded + g` with `k_folded` in the first zone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldedVector {
    pub k_folded: Vec3,
    pub g: GVector,
}

/// Cross-product construction of the reciprocal basis; lower dimensions are
/// handled by the equivalent planar and scalar formulas.
pub fn reciprocal_basis(basis: &LatticeBasis) -> ReciprocalBasis {
    let v = &basis.vectors;
    let det = basis.determinant();
    let two_pi = 2.0 * PI;
    let vectors = match basis.dim {
        1 => vec![[two_pi / v[0][0], 0.0, 0.0]],
        2 => {
            let s = two_pi / det;
            vec![
                [v[1][1] * s, -v[1][0] * s, 0.0],
                [-v[0][1] * s, v[0][0] * s, 0.0],
            ]
        }
        _ => {
            let s = two_pi / det;
            vec![
                scale(&cross(&v[1], &v[2]), s),
                scale(&cross(&v[2], &v[0]), s),
                scale(&cross(&v[0], &v[1]), s),
            ]
        }
    };
    ReciprocalBasis {
        dim: basis.dim,
        vectors,
        direct: v.clone(),
    }
}

/// `G = hA + kB + lC`. Indices beyond the lattice dimension are ignored.
pub fn g_vector(recip: &ReciprocalBasis, h: i64, k: i64, l: i64) -> GVector {
    let mut indices = [h, k, l];
    indices[recip.dim..].fill(0);
    GVector {
        indices,
        cartesian: recip.combine(&indices),
    }
}

/// `exp(i G·ρ)` for the direct-lattice point with coordinates `coords`.
///
/// Equals one whenever the coordinates are integers.
pub fn lattice_phase(g: &GVector, basis: &LatticeBasis, coords: &[f64]) -> Result<Complex64> {
    if g.is_zero() {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let rho = basis.point(coords)?;
    Ok(Complex64::from_polar(1.0, dot(&g.cartesian, &rho)))
}

fn lex_greater(a: &Vec3, b: &Vec3) -> bool {
    for i in 0..3 {
        match a[i].total_cmp(&b[i]) {
            std::cmp::Ordering::Greater => return true,
            std::cmp::Ordering::Less => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    false
}

/// Folds `k` into the first Brillouin zone.
///
/// `k` is first reduced by rounding its fractional coordinates, then the
/// shortest `k - G` is picked over `G` with indices in `[-3, 3]^dim`. Ties on
/// the zone boundary go to the lexicographically largest representative.
pub fn fold_to_bz(recip: &ReciprocalBasis, k: &[f64]) -> Result<FoldedVector> {
    let k = pad(recip.dim, k)?;
    let dim = recip.dim;

    let mut base = [0i64; 3];
    for (i, a) in recip.direct.iter().enumerate() {
        base[i] = (dot(&k, a) / (2.0 * PI)).round() as i64;
    }
    let shift = recip.combine(&base);
    let k0 = [k[0] - shift[0], k[1] - shift[1], k[2] - shift[2]];

    let span = |d: usize| if d < dim { -SHELLS..=SHELLS } else { 0..=0 };
    let mut best: Option<(f64, Vec3, [i64; 3])> = None;
    for h in span(0) {
        for kk in span(1) {
            for l in span(2) {
                let idx = [h, kk, l];
                let g = recip.combine(&idx);
                let cand = [k0[0] - g[0], k0[1] - g[1], k0[2] - g[2]];
                let n2 = dot(&cand, &cand);
                let replace = match &best {
                    None => true,
                    Some((b2, bv, _)) => {
                        let band = TIE_REL * b2.max(f64::MIN_POSITIVE);
                        if n2 < b2 - band {
                            true
                        } else if (n2 - b2).abs() <= band {
                            lex_greater(&cand, bv)
                        } else {
                            false
                        }
                    }
                };
                if replace {
                    best = Some((n2, cand, idx));
                }
            }
        }
    }
    let (_, k_folded, idx) = best.expect("search space is never empty");
    let total = [base[0] + idx[0], base[1] + idx[1], base[2] + idx[2]];
    Ok(FoldedVector {
        k_folded,
        g: g_vector(recip, total[0], total[1], total[2]),
    })
}

/// Folds a batch of wave vectors, in parallel when the `parallel` feature is on.
pub fn fold_many(recip: &ReciprocalBasis, ks: &[Vec<f64>]) -> Result<Vec<FoldedVector>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        ks.par_iter().map(|k| fold_to_bz(recip, k)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        fold_many_sequential(recip, ks)
    }
}

pub fn fold_many_sequential(recip: &ReciprocalBasis, ks: &[Vec<f64>]) -> Result<Vec<FoldedVector>> {
    ks.iter().map(|k| fold_to_bz(recip, k)).collect()
}

/// Absolute tolerance used to compare folded representatives.
pub const EQUIVALENCE_TOL: f64 = 1e-9;

/// Two wave vectors are equivalent when they fold onto the same point.
pub fn is_equivalent(recip: &ReciprocalBasis, k1: &[f64], k2: &[f64]) -> Result<bool> {
    let a = fold_to_bz(recip, k1)?.k_folded;
    let b = fold_to_bz(recip, k2)?.k_folded;
    Ok((0..3).all(|i| (a[i] - b[i]).abs() <= EQUIVALENCE_TOL))
}
