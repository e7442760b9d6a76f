//! Deterministic point sets and seeded random matrices.
//!
//! Grids are Halton sequences, optionally with a seeded Cranley-Patterson shift, so that a
//! "fresh grid seed" changes the points while keeping their low-discrepancy structure.

use crate::linalg::{qr_positive, Mat, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const PRIMES: [u64; 24] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while i > 0 {
        out += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    out
}

/// `n` Halton points in `[0,1)^dim`, starting at index 1.
///
/// With `seed = Some(s)` every coordinate is shifted by a seeded offset modulo 1.
pub fn halton(dim: usize, n: usize, seed: Option<u64>) -> Vec<Vec<f64>> {
    assert!(dim <= PRIMES.len(), "halton: dimension {dim} too large");
    let shift: Vec<f64> = match seed {
        Some(s) => {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            (0..dim).map(|_| rng.gen::<f64>()).collect()
        }
        None => vec![0.0; dim],
    };
    (1..=n as u64)
        .map(|i| {
            (0..dim)
                .map(|j| {
                    let x = radical_inverse(i, PRIMES[j]) + shift[j];
                    x - x.floor()
                })
                .collect()
        })
        .collect()
}

/// `n` unit vectors in `R^d` from a Halton sequence pushed through Box-Muller.
pub fn sphere_grid(d: usize, n: usize, seed: Option<u64>) -> Vec<Vector> {
    let pairs = d.div_ceil(2);
    halton(2 * pairs, n, seed)
        .into_iter()
        .map(|u| {
            let mut g = Vec::with_capacity(2 * pairs);
            for p in 0..pairs {
                let u1 = u[2 * p].max(1e-300);
                let u2 = u[2 * p + 1];
                let rad = (-2.0 * u1.ln()).sqrt();
                let ang = 2.0 * std::f64::consts::PI * u2;
                g.push(rad * ang.cos());
                g.push(rad * ang.sin());
            }
            let v = Vector::from_iterator(d, g.into_iter().take(d));
            let nrm = v.norm();
            if nrm > 0.0 {
                v / nrm
            } else {
                let mut e = Vector::zeros(d);
                e[0] = 1.0;
                e
            }
        })
        .collect()
}

/// Seeded random number generator used across the crate.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix with independent standard normal entries.
pub fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Uniformly distributed unit vector.
pub fn random_unit<R: Rng>(rng: &mut R, d: usize) -> Vector {
    loop {
        let v = Vector::from_fn(d, |_, _| rng.sample(StandardNormal));
        let n = v.norm();
        if n > 1e-8 {
            return v / n;
        }
    }
}

/// Haar-distributed rotation in `SO(d)`.
pub fn random_rotation<R: Rng>(rng: &mut R, d: usize) -> Mat {
    let (mut q, _) = qr_positive(&gaussian_matrix(rng, d, d));
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

/// Gaussian matrix rescaled to determinant one (a column is negated when needed).
pub fn random_sl<R: Rng>(rng: &mut R, d: usize) -> Mat {
    loop {
        let mut m = gaussian_matrix(rng, d, d);
        let det = m.determinant();
        if det.abs() < 1e-3 {
            continue;
        }
        if det < 0.0 {
            m.column_mut(0).neg_mut();
        }
        let s = det.abs().powf(-1.0 / d as f64);
        return m * s;
    }
}

/// Strictly decreasing trace-zero vector with consecutive gaps in `[min_gap, max_gap]`.
pub fn random_regular_vector<R: Rng>(rng: &mut R, d: usize, min_gap: f64, max_gap: f64) -> Vec<f64> {
    let mut v = vec![0.0; d];
    for i in 1..d {
        v[i] = v[i - 1] - rng.gen_range(min_gap..=max_gap);
    }
    let mean = v.iter().sum::<f64>() / d as f64;
    v.iter().map(|x| x - mean).collect()
}

/// `h diag(exp(v)) h^{-1}` for a random determinant-one `h` with condition number below `max_cond`.
///
/// Returns the matrix together with the conjugating `h`.
pub fn random_conjugated_diagonal<R: Rng>(rng: &mut R, v: &[f64], max_cond: f64) -> (Mat, Mat) {
    let d = v.len();
    loop {
        let h = random_sl(rng, d);
        let s = crate::linalg::singular_values(&h);
        if s[0] / s[d - 1] > max_cond {
            continue;
        }
        let diag = Mat::from_diagonal(&Vector::from_iterator(d, v.iter().map(|x| x.exp())));
        let inv = h.clone().try_inverse().expect("determinant one");
        return (&h * diag * inv, h);
    }
}
