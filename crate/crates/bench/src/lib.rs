//! Fixtures shared by the benchmarks.

use chamberflow_core::bundled::{interior_theta, sl3_alphabet, H_WORD};
use chamberflow_core::linalg::Mat;
use chamberflow_core::mixing_witness::{build_direction_family, DirectionFamily, DirectionOptions, WitnessOptions, WitnessPlan};
use chamberflow_core::sampling::{random_sl, rng};
use chamberflow_core::{GroupElement, Word};

/// Seeded random matrices of determinant one.
pub fn sl_matrices(d: usize, count: usize, seed: u64) -> Vec<Mat> {
    let mut r = rng(seed);
    (0..count).map(|_| random_sl(&mut r, d)).collect()
}

/// A fresh element, so that no decomposition is cached.
pub fn fresh(m: &Mat) -> GroupElement {
    GroupElement::new(m.clone()).expect("determinant one")
}

pub fn bundled_direction_family() -> DirectionFamily {
    build_direction_family(&sl3_alphabet(), &interior_theta(), 2, &DirectionOptions::default()).expect("bundled theta is interior")
}

pub fn bundled_plan() -> WitnessPlan {
    let h = Word::parse(H_WORD, 3).expect("bundled h parses");
    WitnessPlan::prepare(&bundled_direction_family(), &h, &WitnessOptions::default()).expect("bundled plan")
}
