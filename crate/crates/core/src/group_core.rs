//! Elements of `SL(d, R)`, vectors of the Cartan subspace `a`, and the Cartan, Jordan and
//! Iwasawa projections.
//!
//! Conventions: `K = SO(d)`, `A` = positive diagonal, `N` = upper unitriangular. The Cartan
//! subspace is the space of trace-zero real `d`-vectors with the Euclidean norm; its positive
//! chamber consists of non-increasing vectors.

use crate::flags_hopf::Flag;
use crate::linalg::{qr_positive, sorted_eigenvalues, Mat, Vector};
use nalgebra::Complex;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::OnceLock;
use thiserror::Error;

/// Default absolute tolerance.
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is {rows}x{cols}, expected a square matrix of size at least 2")]
    Shape { rows: usize, cols: usize },
    #[error("determinant {det} cannot be normalized to 1")]
    Determinant { det: f64 },
    #[error("trace of Cartan vector is {sum}, expected 0")]
    NotTraceZero { sum: f64 },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("degenerate flag frame")]
    InvalidFlag,
}

/// A vector in the Cartan subspace: a real `d`-vector with zero coordinate sum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct CartanVector(Vec<f64>);

impl CartanVector {
    /// Checks the trace-zero condition to `1e-9` (relative to the vector's size).
    pub fn new(coords: Vec<f64>) -> Result<Self, GroupError> {
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(GroupError::NonFinite);
        }
        let sum: f64 = coords.iter().sum();
        let scale = coords.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
        if sum.abs() > 1e-9 * scale {
            return Err(GroupError::NotTraceZero { sum });
        }
        Ok(CartanVector(coords))
    }

    /// Orthogonal projection of an arbitrary vector onto the trace-zero subspace.
    pub fn project(coords: Vec<f64>) -> Self {
        let mean = coords.iter().sum::<f64>() / coords.len().max(1) as f64;
        CartanVector(coords.into_iter().map(|x| x - mean).collect())
    }

    pub fn zeros(d: usize) -> Self {
        CartanVector(vec![0.0; d])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        crate::linalg::norm(&self.0)
    }

    pub fn dot(&self, other: &CartanVector) -> f64 {
        crate::linalg::dot(&self.0, &other.0)
    }

    pub fn distance(&self, other: &CartanVector) -> f64 {
        (self - other).norm()
    }

    /// Unit vector in the same direction, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<CartanVector> {
        let n = self.norm();
        (n > 0.0).then(|| self * (1.0 / n))
    }

    /// `true` when the coordinates are non-increasing (closed positive chamber).
    pub fn in_positive_chamber(&self) -> bool {
        self.0.windows(2).all(|w| w[0] >= w[1])
    }

    /// `true` when every consecutive gap exceeds `tol` (open positive chamber).
    pub fn strictly_regular(&self, tol: f64) -> bool {
        self.0.windows(2).all(|w| w[0] - w[1] > tol)
    }

    /// Image under the opposition involution `v -> -w0 v` (reverse and negate).
    pub fn opposition(&self) -> CartanVector {
        CartanVector(self.0.iter().rev().map(|x| -x).collect())
    }

    /// Sum of the first `k` coordinates: the highest weight of the `k`-th exterior power.
    pub fn partial_sum(&self, k: usize) -> f64 {
        self.0[..k].iter().sum()
    }

    /// Rebuild a vector from its partial sums `chi_1, ..., chi_{d-1}`.
    ///
    /// The functionals `v -> v_1 + ... + v_k` have dual basis `e_k - e_{k+1}` in the
    /// trace-zero space, so the coordinates are consecutive differences.
    pub fn from_partial_sums(chi: &[f64]) -> CartanVector {
        let d = chi.len() + 1;
        let mut v = vec![0.0; d];
        for i in 0..d {
            let hi = if i < d - 1 { chi[i] } else { 0.0 };
            let lo = if i > 0 { chi[i - 1] } else { 0.0 };
            v[i] = hi - lo;
        }
        CartanVector(v)
    }
}

impl TryFrom<Vec<f64>> for CartanVector {
    type Error = GroupError;
    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        CartanVector::new(v)
    }
}

impl From<CartanVector> for Vec<f64> {
    fn from(v: CartanVector) -> Self {
        v.0
    }
}

impl fmt::Display for CartanVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x:.6}")?;
        }
        write!(f, ")")
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr<&CartanVector> for &CartanVector {
            type Output = CartanVector;
            fn $m(self, rhs: &CartanVector) -> CartanVector {
                assert_eq!(self.dim(), rhs.dim(), "Cartan vector dimension mismatch");
                CartanVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a $op b).collect())
            }
        }
        impl $tr<CartanVector> for CartanVector {
            type Output = CartanVector;
            fn $m(self, rhs: CartanVector) -> CartanVector {
                &self $op &rhs
            }
        }
    };
}
binop!(Add, add, +);
binop!(Sub, sub, -);

impl AddAssign<&CartanVector> for CartanVector {
    fn add_assign(&mut self, rhs: &CartanVector) {
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            *a += b;
        }
    }
}

impl Mul<f64> for &CartanVector {
    type Output = CartanVector;
    fn mul(self, s: f64) -> CartanVector {
        CartanVector(self.0.iter().map(|x| x * s).collect())
    }
}

impl Mul<f64> for CartanVector {
    type Output = CartanVector;
    fn mul(self, s: f64) -> CartanVector {
        &self * s
    }
}

impl Neg for &CartanVector {
    type Output = CartanVector;
    fn neg(self) -> CartanVector {
        self * -1.0
    }
}

/// Singular value decomposition `g = u diag(s) v^T`.
#[derive(Clone, Debug)]
pub struct SvdData {
    pub u: Mat,
    pub singular_values: Vec<f64>,
    pub v_t: Mat,
}

/// Iwasawa decomposition `g = k exp(a) n`.
#[derive(Clone, Debug)]
pub struct Iwasawa {
    pub k: Mat,
    pub a: CartanVector,
    pub n: Mat,
}

/// Eigenvalues ordered by descending modulus (ties: descending real part), and the
/// corresponding eigenbasis when all eigenvalues are real and distinct.
#[derive(Clone, Debug)]
pub struct EigenData {
    pub eigenvalues: Vec<Complex<f64>>,
    pub eigenbasis: Option<Mat>,
}

/// Lazily computed decompositions of a group element.
#[derive(Clone, Debug, Default)]
pub struct DecompositionCache {
    svd: OnceLock<SvdData>,
    iwasawa: OnceLock<Iwasawa>,
    eigen: OnceLock<EigenData>,
}

/// An element of `SL(d, R)`.
#[derive(Clone, Debug)]
pub struct GroupElement {
    m: Mat,
    cache: DecompositionCache,
}

impl PartialEq for GroupElement {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m
    }
}

impl GroupElement {
    /// Rescales a matrix of positive determinant to determinant one.
    pub fn new(m: Mat) -> Result<Self, GroupError> {
        let (rows, cols) = m.shape();
        if rows != cols || rows < 2 {
            return Err(GroupError::Shape { rows, cols });
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(GroupError::NonFinite);
        }
        let det = m.determinant();
        if !(det > 0.0) || !det.is_finite() {
            return Err(GroupError::Determinant { det });
        }
        // Rounding in the determinant grows with the Hadamard bound (product of column norms).
        let tol = |m: &Mat| {
            let hadamard: f64 = m.column_iter().map(|c| c.norm()).product();
            1e-9f64.max(64.0 * f64::EPSILON * rows as f64 * hadamard)
        };
        // A determinant equal to one up to rounding carries no information to rescale by.
        if (det - 1.0).abs() <= tol(&m) {
            return Ok(GroupElement {
                m,
                cache: DecompositionCache::default(),
            });
        }
        let m = m * det.powf(-1.0 / rows as f64);
        let det1 = m.determinant();
        if (det1 - 1.0).abs() > tol(&m) {
            return Err(GroupError::Determinant { det: det1 });
        }
        Ok(GroupElement {
            m,
            cache: DecompositionCache::default(),
        })
    }

    /// Row-major nested arrays, as used by the JSON interface.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, GroupError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(GroupError::Shape {
                rows: n,
                cols: rows.first().map_or(0, |r| r.len()),
            });
        }
        GroupElement::new(Mat::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| self.m.row(i).iter().copied().collect())
            .collect()
    }

    pub fn identity(d: usize) -> Self {
        GroupElement {
            m: Mat::identity(d, d),
            cache: DecompositionCache::default(),
        }
    }

    /// `exp(v)` for a Cartan vector `v`.
    pub fn exp_diag(v: &CartanVector) -> Self {
        let d = v.dim();
        GroupElement {
            m: Mat::from_diagonal(&Vector::from_iterator(d, v.coords().iter().map(|x| x.exp()))),
            cache: DecompositionCache::default(),
        }
    }

    pub fn matrix(&self) -> &Mat {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        GroupElement {
            m: &self.m * &other.m,
            cache: DecompositionCache::default(),
        }
    }

    pub fn inverse(&self) -> GroupElement {
        let inv = self
            .m
            .clone()
            .try_inverse()
            .expect("determinant-one matrices are invertible");
        GroupElement {
            m: inv,
            cache: DecompositionCache::default(),
        }
    }

    /// Plain matrix power; entries grow like `exp(n * lambda_1)`.
    pub fn pow(&self, n: u64) -> GroupElement {
        let p = crate::linalg::ScaledMatrix::new(self.m.clone()).pow(n);
        GroupElement {
            m: p.mat * p.log_scale.exp(),
            cache: DecompositionCache::default(),
        }
    }

    pub fn svd(&self) -> &SvdData {
        self.cache.svd.get_or_init(|| {
            let svd = self.m.clone().svd(true, true);
            let mut order: Vec<usize> = (0..self.dim()).collect();
            order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
            let u = svd.u.expect("u requested");
            let v_t = svd.v_t.expect("v_t requested");
            let d = self.dim();
            SvdData {
                u: Mat::from_fn(d, d, |i, j| u[(i, order[j])]),
                singular_values: order.iter().map(|&i| svd.singular_values[i]).collect(),
                v_t: Mat::from_fn(d, d, |i, j| v_t[(order[i], j)]),
            }
        })
    }

    pub fn iwasawa(&self) -> &Iwasawa {
        self.cache.iwasawa.get_or_init(|| {
            let (k, r) = qr_positive(&self.m);
            let d = self.dim();
            let diag: Vec<f64> = (0..d).map(|i| r[(i, i)]).collect();
            let n = Mat::from_fn(d, d, |i, j| r[(i, j)] / diag[i]);
            Iwasawa {
                k,
                a: CartanVector::project(diag.iter().map(|x| x.ln()).collect()),
                n,
            }
        })
    }

    pub fn eigen(&self) -> &EigenData {
        self.cache.eigen.get_or_init(|| {
            let eigenvalues = sorted_eigenvalues(&self.m);
            let d = self.dim();
            let real_distinct = eigenvalues.iter().all(|z| z.im.abs() <= 1e-8)
                && eigenvalues
                    .windows(2)
                    .all(|w| (w[0].re - w[1].re).abs() > 1e-10 * w[0].norm().max(1.0));
            let eigenbasis = real_distinct.then(|| {
                let mut basis = Mat::zeros(d, d);
                for (j, z) in eigenvalues.iter().enumerate() {
                    let shifted = &self.m - Mat::identity(d, d) * z.re;
                    let (v, _) = crate::linalg::null_vector(&shifted);
                    basis.column_mut(j).copy_from(&v);
                }
                basis
            });
            EigenData {
                eigenvalues,
                eigenbasis,
            }
        })
    }
}

impl Serialize for GroupElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for GroupElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        GroupElement::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Cartan projection: log singular values in non-increasing order.
pub fn cartan_projection(g: &GroupElement) -> CartanVector {
    CartanVector::project(g.svd().singular_values.iter().map(|s| s.ln()).collect())
}

/// Jordan projection: log moduli of the eigenvalues in non-increasing order.
///
/// Unipotent parts are ignored: only moduli enter.
pub fn jordan_projection(g: &GroupElement) -> CartanVector {
    CartanVector::project(g.eigen().eigenvalues.iter().map(|z| z.norm().ln()).collect())
}

/// Iwasawa cocycle: the `A`-part of `g k_eta` in the decomposition `K exp(a) N`.
pub fn iwasawa_cocycle(g: &GroupElement, eta: &Flag) -> Result<CartanVector, GroupError> {
    if eta.dim() != g.dim() {
        return Err(GroupError::DimensionMismatch(eta.dim(), g.dim()));
    }
    if !eta.is_orthonormal(1e-10) {
        return Err(GroupError::InvalidFlag);
    }
    let (_, r) = qr_positive(&(g.matrix() * eta.frame()));
    let d = g.dim();
    Ok(CartanVector::project(
        (0..d).map(|i| r[(i, i)].ln()).collect(),
    ))
}

/// `true` when the eigenvalues are real (imaginary parts at most `1e-8`) and the Jordan
/// projection has every consecutive gap above `gap_tol`.
pub fn is_loxodromic(g: &GroupElement, gap_tol: f64) -> bool {
    let eig = g.eigen();
    eig.eigenvalues.iter().all(|z| z.im.abs() <= 1e-8)
        && jordan_projection(g).strictly_regular(gap_tol)
}

/// Norms `|a^{-n} h a^n - id|` (Frobenius) for `n = 0..=n_max`.
///
/// `a` must be diagonal with strictly decreasing positive entries and `h` unitriangular.
/// For lower-unitriangular `h` the conjugation runs the other way, `a^n h a^{-n}`, which is
/// the direction in which it contracts.
pub fn unipotent_contraction_check(
    a: &GroupElement,
    h: &GroupElement,
    n_max: usize,
) -> Result<Vec<f64>, GroupError> {
    let d = a.dim();
    if h.dim() != d {
        return Err(GroupError::DimensionMismatch(h.dim(), d));
    }
    let am = a.matrix();
    let off_diag = (0..d).any(|i| (0..d).any(|j| i != j && am[(i, j)] != 0.0));
    let diag: Vec<f64> = (0..d).map(|i| am[(i, i)]).collect();
    if off_diag || diag.iter().any(|&x| x <= 0.0) || diag.windows(2).any(|w| w[0] <= w[1]) {
        return Err(GroupError::Precondition(
            "a must be diagonal with strictly decreasing positive entries".into(),
        ));
    }
    let hm = h.matrix();
    let unit_diag = (0..d).all(|i| (hm[(i, i)] - 1.0).abs() <= 1e-12);
    let upper = (0..d).all(|i| (0..i).all(|j| hm[(i, j)] == 0.0));
    let lower = (0..d).all(|i| (i + 1..d).all(|j| hm[(i, j)] == 0.0));
    if !unit_diag || !(upper || lower) {
        return Err(GroupError::Precondition("h must be unitriangular".into()));
    }
    let log_a: Vec<f64> = diag.iter().map(|x| x.ln()).collect();
    // Conjugation acts entrywise: (a^{-n} h a^n)_{ij} = h_ij (a_j / a_i)^n.
    let sign = if upper { 1.0 } else { -1.0 };
    Ok((0..=n_max)
        .map(|n| {
            let mut acc = 0.0;
            for i in 0..d {
                for j in 0..d {
                    if i != j && hm[(i, j)] != 0.0 {
                        let f = (sign * n as f64 * (log_a[j] - log_a[i])).exp();
                        acc += (hm[(i, j)] * f).powi(2);
                    }
                }
            }
            acc.sqrt()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_conjugated_diagonal, random_regular_vector, random_rotation, random_sl, rng};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn ge(rows: &[&[f64]]) -> GroupElement {
        GroupElement::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            GroupElement::from_rows(&[vec![f64::NAN, 0.0], vec![0.0, 1.0]]),
            Err(GroupError::NonFinite)
        );
        assert!(matches!(
            GroupElement::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]),
            Err(GroupError::Determinant { .. })
        ));
        assert!(matches!(
            GroupElement::from_rows(&[vec![1.0]]),
            Err(GroupError::Shape { .. })
        ));
        assert!(CartanVector::new(vec![1.0, 0.5]).is_err());
    }

    #[test]
    fn normalizes_determinant() {
        let g = ge(&[&[8.0, 0.0, 0.0], &[0.0, 2.0, 0.0], &[0.0, 0.0, 1.0]]);
        assert_abs_diff_eq!(g.matrix().determinant(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn cartan_examples() {
        assert_eq!(cartan_projection(&GroupElement::identity(3)).coords(), &[0.0, 0.0, 0.0]);
        let e = std::f64::consts::E;
        let mu = cartan_projection(&ge(&[&[e, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0 / e]]));
        for (a, b) in mu.coords().iter().zip([1.0, 0.0, -1.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        // Oracle: singular values squared are the roots of x^2 - 3x + 1 (char. polynomial of g^T g).
        let mu = cartan_projection(&ge(&[&[1.0, 1.0], &[0.0, 1.0]]));
        let top = ((3.0 + 5f64.sqrt()) / 2.0).sqrt().ln();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert_abs_diff_eq!(top, phi.ln(), epsilon = 1e-14);
        assert_abs_diff_eq!(mu.coords()[0], phi.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(mu.coords()[1], -phi.ln(), epsilon = 1e-12);
    }

    #[test]
    fn jordan_examples() {
        let lam = jordan_projection(&ge(&[&[2.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 0.5]]));
        for (a, b) in lam.coords().iter().zip([2f64.ln(), 0.0, -(2f64.ln())]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let lam = jordan_projection(&ge(&[&[c, -s], &[s, c]]));
        assert!(lam.norm() < 1e-12);
        // Defective matrix: moduli only.
        let lam = jordan_projection(&ge(&[&[1.0, 5.0], &[0.0, 1.0]]));
        assert!(lam.norm() < 1e-7);
    }

    #[test]
    fn loxodromic_examples() {
        assert!(is_loxodromic(&ge(&[&[4.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 0.25]]), 1e-8));
        assert!(!is_loxodromic(&GroupElement::identity(3), 1e-8));
        assert!(!is_loxodromic(&ge(&[&[1.0, 1.0], &[0.0, 1.0]]), 1e-8));
    }

    #[test]
    fn iwasawa_reconstructs() {
        let mut r = rng(3);
        for d in 2..6 {
            let g = GroupElement::new(random_sl(&mut r, d)).unwrap();
            let iw = g.iwasawa();
            let a = GroupElement::exp_diag(&iw.a);
            let rebuilt = &iw.k * a.matrix() * &iw.n;
            assert!((rebuilt - g.matrix()).amax() < 1e-8);
            assert_abs_diff_eq!(iw.k.determinant(), 1.0, epsilon = 1e-10);
            for i in 0..d {
                assert_abs_diff_eq!(iw.n[(i, i)], 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn iwasawa_cocycle_examples() {
        let v = CartanVector::new(vec![0.7, 0.1, -0.8]).unwrap();
        let s = iwasawa_cocycle(&GroupElement::exp_diag(&v), &Flag::standard(3)).unwrap();
        assert!((s - v).norm() < 1e-12);
    }

    #[test]
    fn cocycle_agrees_with_exterior_norms() {
        let mut r = rng(11);
        for _ in 0..20 {
            let g = GroupElement::new(random_sl(&mut r, 4)).unwrap();
            let eta = Flag::from_basis(&random_sl(&mut r, 4)).unwrap();
            let sigma = iwasawa_cocycle(&g, &eta).unwrap();
            for k in 1..4 {
                let cols = eta.subspace(k);
                let v = crate::linalg::wedge_columns(&cols);
                let w = crate::linalg::wedge_columns(&(g.matrix() * &cols));
                assert_abs_diff_eq!(sigma.partial_sum(k), (w.norm() / v.norm()).ln(), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn unipotent_contraction_examples() {
        let a = ge(&[&[2.0, 0.0], &[0.0, 0.5]]);
        let h = ge(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let norms = unipotent_contraction_check(&a, &h, 10).unwrap();
        for (n, x) in norms.iter().enumerate() {
            assert_abs_diff_eq!(*x, 4f64.powi(-(n as i32)), epsilon = 1e-15);
        }
        let id = unipotent_contraction_check(&a, &GroupElement::identity(2), 5).unwrap();
        assert!(id.iter().all(|&x| x == 0.0));
        let lower = ge(&[&[1.0, 0.0], &[3.0, 1.0]]);
        let norms = unipotent_contraction_check(&a, &lower, 6).unwrap();
        assert!(norms.windows(2).all(|w| w[1] <= w[0]));
        assert!(norms[6] < 1e-3);
        let not_regular = ge(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!(unipotent_contraction_check(&not_regular, &h, 3).is_err());
    }

    #[test]
    fn spectral_radius_formula_single() {
        let mut r = rng(5);
        let v = random_regular_vector(&mut r, 3, 0.5, 1.0);
        let (m, _) = random_conjugated_diagonal(&mut r, &v, 5.0);
        let g = GroupElement::new(m).unwrap();
        let lam = jordan_projection(&g);
        let mu = crate::word::GradedProduct::from_matrix(g.matrix()).pow(64).cartan() * (1.0 / 64.0);
        assert!((mu - lam.clone()).norm() < 0.05 * lam.norm());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn cartan_is_bi_invariant(seed in any::<u64>(), d in 2usize..6) {
            let mut r = rng(seed);
            let g = GroupElement::new(random_sl(&mut r, d)).unwrap();
            let k1 = GroupElement::new(random_rotation(&mut r, d)).unwrap();
            let k2 = GroupElement::new(random_rotation(&mut r, d)).unwrap();
            let lhs = cartan_projection(&k1.mul(&g).mul(&k2));
            prop_assert!((lhs - cartan_projection(&g)).norm() <= 1e-8);
        }

        #[test]
        fn cartan_of_inverse_is_opposition(seed in any::<u64>(), d in 2usize..6) {
            let mut r = rng(seed);
            let g = GroupElement::new(random_sl(&mut r, d)).unwrap();
            let lhs = cartan_projection(&g.inverse());
            prop_assert!((lhs - cartan_projection(&g).opposition()).norm() <= 1e-8);
        }

        #[test]
        fn cocycle_relation(seed in any::<u64>(), d in 2usize..5) {
            let mut r = rng(seed);
            let g1 = GroupElement::new(random_sl(&mut r, d)).unwrap();
            let g2 = GroupElement::new(random_sl(&mut r, d)).unwrap();
            let eta = Flag::from_basis(&random_sl(&mut r, d)).unwrap();
            let lhs = iwasawa_cocycle(&g1.mul(&g2), &eta).unwrap();
            let rhs = iwasawa_cocycle(&g1, &eta.act(g2.matrix())).unwrap()
                + iwasawa_cocycle(&g2, &eta).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-7);
        }

        #[test]
        fn jordan_is_conjugation_invariant(seed in any::<u64>()) {
            let mut r = rng(seed);
            let v = random_regular_vector(&mut r, 3, 0.2, 1.0);
            let (m, _) = random_conjugated_diagonal(&mut r, &v, 50.0);
            let g = GroupElement::new(m).unwrap();
            let h = GroupElement::new(random_sl(&mut r, 3)).unwrap();
            let conj = h.mul(&g).mul(&h.inverse());
            prop_assert!((jordan_projection(&conj) - jordan_projection(&g)).norm() <= 1e-7);
        }
    }
}
