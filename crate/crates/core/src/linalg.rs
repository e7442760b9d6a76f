//! Dense linear-algebra helpers shared by the projection, flag and certificate code.
//!
//! Everything here works on `nalgebra` dynamic matrices. The `ScaledMatrix` type keeps
//! long products representable by carrying a separate logarithmic scale.

use nalgebra::{Complex, DMatrix, DVector};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// QR factorization `m = q r` with the diagonal of `r` made non-negative.
///
/// Works for square and tall matrices; `q` has orthonormal columns.
pub fn qr_positive(m: &Mat) -> (Mat, Mat) {
    let qr = m.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    for i in 0..r.nrows().min(r.ncols()) {
        if r[(i, i)] < 0.0 {
            r.row_mut(i).neg_mut();
            q.column_mut(i).neg_mut();
        }
    }
    (q, r)
}

/// In-place modified Gram-Schmidt with one re-orthogonalization pass.
///
/// Returns the diagonal of the triangular factor (the column norms after projection).
/// Much cheaper than a Householder QR for the small frames pushed through long words.
pub fn orthonormalize_columns(q: &mut Mat) -> Vec<f64> {
    let (n, k) = q.shape();
    let mut diag = vec![0.0; k];
    for j in 0..k {
        for _pass in 0..2 {
            for i in 0..j {
                let mut dot = 0.0;
                for row in 0..n {
                    dot += q[(row, i)] * q[(row, j)];
                }
                for row in 0..n {
                    let v = q[(row, i)];
                    q[(row, j)] -= dot * v;
                }
            }
        }
        let mut norm = 0.0;
        for row in 0..n {
            norm += q[(row, j)] * q[(row, j)];
        }
        let norm = norm.sqrt();
        diag[j] = norm;
        if norm > 0.0 {
            for row in 0..n {
                q[(row, j)] /= norm;
            }
        }
    }
    diag
}

/// Right singular vectors spanning the approximate kernel of `a`.
///
/// Returns the `dim` right singular vectors belonging to the smallest singular values,
/// as columns, together with the largest of those singular values.
pub fn null_space(a: &Mat, dim: usize) -> (Mat, f64) {
    let (rows, cols) = a.shape();
    let padded = if rows < cols {
        let mut p = Mat::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut out = Mat::zeros(cols, dim);
    for j in 0..dim {
        let row = cols - dim + j;
        out.column_mut(j).copy_from(&v_t.row(row).transpose());
    }
    let worst = svd.singular_values[cols - dim];
    (out, worst)
}

/// Unit vector spanning the approximate kernel of `a` and the smallest singular value.
pub fn null_vector(a: &Mat) -> (Vector, f64) {
    let (basis, sv) = null_space(a, 1);
    (basis.column(0).into_owned(), sv)
}

/// Largest singular value.
pub fn operator_norm(m: &Mat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// Singular values, non-increasing.
pub fn singular_values(m: &Mat) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Eigenvalues ordered by descending modulus, ties broken by descending real part.
///
/// The matrix is scaled to unit largest entry first; the Schur iteration misbehaves on
/// matrices with very large entries.
pub fn sorted_eigenvalues(m: &Mat) -> Vec<Complex<f64>> {
    let s = m.amax();
    let s = if s > 0.0 && s.is_finite() { s } else { 1.0 };
    let mut ev: Vec<Complex<f64>> = (m / s).complex_eigenvalues().iter().map(|z| z * s).collect();
    ev.sort_by(|a, b| {
        b.norm()
            .total_cmp(&a.norm())
            .then(b.re.total_cmp(&a.re))
            .then(b.im.total_cmp(&a.im))
    });
    ev
}

/// Lexicographically ordered `k`-subsets of `0..n`.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Binomial coefficient.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn minor(m: &Mat, rows: &[usize], cols: &[usize]) -> f64 {
    let k = rows.len();
    match k {
        0 => 1.0,
        1 => m[(rows[0], cols[0])],
        2 => {
            m[(rows[0], cols[0])] * m[(rows[1], cols[1])]
                - m[(rows[0], cols[1])] * m[(rows[1], cols[0])]
        }
        _ => Mat::from_fn(k, k, |i, j| m[(rows[i], cols[j])]).determinant(),
    }
}

/// The `k`-th compound matrix: `k x k` minors indexed by lexicographic row/column subsets.
///
/// Accepts any square matrix and `0 <= k <= n`.
pub fn compound(m: &Mat, k: usize) -> Mat {
    let n = m.nrows();
    let subs = subsets(n, k);
    let size = subs.len();
    Mat::from_fn(size, size, |i, j| minor(m, &subs[i], &subs[j]))
}

/// Coordinates of `c_1 ∧ ... ∧ c_k` for the columns of an `n x k` matrix.
pub fn wedge_columns(cols: &Mat) -> Vector {
    let (n, k) = cols.shape();
    let all: Vec<usize> = (0..k).collect();
    let subs = subsets(n, k);
    Vector::from_iterator(subs.len(), subs.iter().map(|s| minor(cols, s, &all)))
}

/// A matrix `exp(log_scale) * mat` whose stored part is kept at unit max-entry size.
#[derive(Clone, Debug)]
pub struct ScaledMatrix {
    pub mat: Mat,
    pub log_scale: f64,
}

impl ScaledMatrix {
    pub fn new(mat: Mat) -> Self {
        let mut s = ScaledMatrix { mat, log_scale: 0.0 };
        s.rescale();
        s
    }

    pub fn identity(n: usize) -> Self {
        ScaledMatrix {
            mat: Mat::identity(n, n),
            log_scale: 0.0,
        }
    }

    fn rescale(&mut self) {
        let s = self.mat.amax();
        if s > 0.0 && s.is_finite() {
            self.mat /= s;
            self.log_scale += s.ln();
        }
    }

    pub fn mul(&self, other: &ScaledMatrix) -> ScaledMatrix {
        let mut out = ScaledMatrix {
            mat: &self.mat * &other.mat,
            log_scale: self.log_scale + other.log_scale,
        };
        out.rescale();
        out
    }

    /// `self^n` by repeated squaring.
    pub fn pow(&self, mut n: u64) -> ScaledMatrix {
        let mut result = ScaledMatrix::identity(self.mat.nrows());
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Logarithm of the operator norm.
    pub fn log_norm(&self) -> f64 {
        operator_norm(&self.mat).ln() + self.log_scale
    }

    /// Logarithm of the spectral radius.
    pub fn log_spectral_radius(&self) -> f64 {
        let ev = sorted_eigenvalues(&self.mat);
        ev[0].norm().ln() + self.log_scale
    }
}

/// Euclidean norm of a slice.
pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Dot product of two slices.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
