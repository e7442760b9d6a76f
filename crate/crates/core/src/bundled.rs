//! The bundled `SL(3, R)` example: three loxodromic generators with non-parallel Jordan
//! projections whose small words form a strong Schottky family.
//!
//! A third generator is needed for a usable density scale: in a strongly contracting pair
//! every word satisfies `lambda(w) ~ #a lambda(a) + #b lambda(b) + k delta` with one fixed
//! `delta`, so the spectrum is close to a rank-three subgroup of the plane.

use crate::group_core::{CartanVector, GroupElement};
use crate::linalg::{Mat, Vector};
use crate::proximality::DEFAULT_GRID;
use crate::word::{Alphabet, Word};
use serde::{Deserialize, Serialize};

/// Contraction scale of the generators.
pub const SCALE: f64 = 3000.0;
/// Rotation angle (radians) about `(1, 1, 1)` conjugating the second generator.
pub const ANGLE: f64 = 0.8;
/// Rotation angle (radians) about `(2, 1, -1)` conjugating the third generator.
pub const ANGLE_C: f64 = 0.7;
pub const R: f64 = 0.12;
pub const EPS: f64 = 0.12;
pub const ETA: f64 = 0.25;
/// The bracketing element of mixing witnesses, `a b`.
pub const H_WORD: &str = "1 2";

/// Rotation by `angle` about the unit vector `axis` (Rodrigues' formula).
pub fn rotation(axis: [f64; 3], angle: f64) -> Mat {
    let n = Vector::from_column_slice(&axis).normalize();
    let k = Mat::from_row_slice(3, 3, &[0.0, -n[2], n[1], n[2], 0.0, -n[0], -n[1], n[0], 0.0]);
    Mat::identity(3, 3) + &k * angle.sin() + &k * &k * (1.0 - angle.cos())
}

/// `a = diag(s^1.2, s^-0.2, s^-1)`, `b = K diag(s, s^0.2, s^-1.2) K^T` and
/// `c = K' diag(s^1.1, s^0.1, s^-1.2) K'^T`.
pub fn sl3_generators() -> Vec<GroupElement> {
    let s = SCALE;
    let diag = |e: [f64; 3]| Mat::from_diagonal(&Vector::from_column_slice(&e.map(|x| s.powf(x))));
    let conj = |k: Mat, m: Mat| GroupElement::new(&k * m * k.transpose()).expect("determinant one");
    vec![
        GroupElement::new(diag([1.2, -0.2, -1.0])).expect("determinant one"),
        conj(rotation([1.0, 1.0, 1.0], ANGLE), diag([1.0, 0.2, -1.2])),
        conj(rotation([2.0, 1.0, -1.0], ANGLE_C), diag([1.1, 0.1, -1.2])),
    ]
}

pub fn sl3_alphabet() -> Alphabet {
    Alphabet::new(sl3_generators()).expect("generators share a dimension")
}

/// Normalized sum of the generators' Jordan projections, interior to the limit cone.
pub fn interior_theta() -> CartanVector {
    let base = sl3_alphabet();
    let mut sum = CartanVector::zeros(3);
    for i in 0..base.len() {
        sum += &base.jordan(&Word::letter(i)).expect("valid word");
    }
    sum.normalized().expect("nonzero")
}

/// A direction outside the limit cone: the wall direction `(1, 1, -2)`.
pub fn exterior_theta() -> CartanVector {
    CartanVector::project(vec![1.0, 1.0, -2.0]).normalized().expect("nonzero")
}

/// Serializable form of the bundled example, as shipped in the CLI data directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BundledConfig {
    pub generators: Vec<Vec<Vec<f64>>>,
    pub r: f64,
    pub eps: f64,
    pub grid_n: usize,
    pub eta: f64,
    pub h: String,
    pub theta: Vec<f64>,
}

pub fn bundled_config() -> BundledConfig {
    BundledConfig {
        generators: sl3_generators().iter().map(|g| g.to_rows()).collect(),
        r: R,
        eps: EPS,
        grid_n: DEFAULT_GRID,
        eta: ETA,
        h: H_WORD.to_string(),
        theta: interior_theta().coords().to_vec(),
    }
}
