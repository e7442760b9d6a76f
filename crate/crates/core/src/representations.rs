//! Fundamental representations of `SL(d, R)` realized as exterior powers.
//!
//! The basis of `Λ^k R^d` is `e_{i_1} ∧ ... ∧ e_{i_k}` with index sets in lexicographic order;
//! the Euclidean norm on it is `SO(d)`-invariant.

use crate::group_core::{cartan_projection, jordan_projection, CartanVector, GroupElement};
use crate::linalg::{binomial, compound, operator_norm, sorted_eigenvalues, Mat};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RepError {
    #[error("exterior degree {k} out of range 1..={max}")]
    Degree { k: usize, max: usize },
}

/// The `k`-th fundamental representation `Λ^k R^d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FundamentalRep {
    pub k: usize,
    pub d: usize,
}

impl FundamentalRep {
    pub fn new(d: usize, k: usize) -> Result<FundamentalRep, RepError> {
        if k == 0 || k >= d {
            return Err(RepError::Degree { k, max: d.saturating_sub(1) });
        }
        Ok(FundamentalRep { k, d })
    }

    pub fn dim(&self) -> usize {
        binomial(self.d, self.k)
    }

    /// Highest weight `v_1 + ... + v_k`.
    pub fn highest_weight(&self, v: &CartanVector) -> f64 {
        v.partial_sum(self.k)
    }

    pub fn apply(&self, g: &GroupElement) -> Mat {
        compound(g.matrix(), self.k)
    }
}

/// `Λ^k g`, the matrix of `k x k` minors.
pub fn exterior_power(g: &GroupElement, k: usize) -> Result<Mat, RepError> {
    Ok(FundamentalRep::new(g.dim(), k)?.apply(g))
}

/// Residuals of the highest-weight identities for each exterior degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightReport {
    /// `|chi_k(mu(g)) - log |Λ^k g||`.
    pub cartan: Vec<f64>,
    /// `|chi_k(lambda(g)) - log spectral radius(Λ^k g)|`.
    pub jordan: Vec<f64>,
}

impl WeightReport {
    pub fn max(&self) -> f64 {
        self.cartan.iter().chain(&self.jordan).fold(0.0, |a, &b| a.max(b))
    }
}

pub fn weight_identities_check(g: &GroupElement) -> WeightReport {
    let mu = cartan_projection(g);
    let lambda = jordan_projection(g);
    let mut cartan = Vec::new();
    let mut jordan = Vec::new();
    for k in 1..g.dim() {
        let rep = FundamentalRep { k, d: g.dim() };
        let m = rep.apply(g);
        cartan.push((rep.highest_weight(&mu) - operator_norm(&m).ln()).abs());
        let radius = sorted_eigenvalues(&m)[0].norm();
        jordan.push((rep.highest_weight(&lambda) - radius.ln()).abs());
    }
    WeightReport { cartan, jordan }
}

/// Radius `C_h` of a ball around 0 containing `mu(gh) - mu(g)` and `mu(hg) - mu(g)` for all `g`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductBound {
    pub value: f64,
    /// `h_k = max(chi_k(mu(h)), chi_k(mu(h^{-1})))`.
    pub per_root: Vec<f64>,
}

/// The differences have partial sums in `[-h_k, h_k]`; `C_h` is the largest norm of a
/// vertex of that box mapped back to the Cartan subspace.
pub fn cartan_product_bound(h: &GroupElement) -> ProductBound {
    let d = h.dim();
    let mu = cartan_projection(h);
    let mu_inv = cartan_projection(&h.inverse());
    let per_root: Vec<f64> = (1..d)
        .map(|k| mu.partial_sum(k).max(mu_inv.partial_sum(k)).max(0.0))
        .collect();
    let mut value: f64 = 0.0;
    for signs in 0u32..(1 << (d - 1)) {
        let chi: Vec<f64> = per_root
            .iter()
            .enumerate()
            .map(|(i, &x)| if signs >> i & 1 == 1 { -x } else { x })
            .collect();
        value = value.max(CartanVector::from_partial_sums(&chi).norm());
    }
    ProductBound { value, per_root }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flags_hopf::Flag;
    use crate::group_core::iwasawa_cocycle;
    use crate::linalg::{singular_values, Vector};
    use crate::sampling::{random_rotation, random_sl, rng};
    use proptest::prelude::*;

    #[test]
    fn degree_range() {
        let g = GroupElement::identity(3);
        assert!(exterior_power(&g, 0).is_err());
        assert!(exterior_power(&g, 3).is_err());
        assert_eq!(exterior_power(&g, 2).unwrap(), Mat::identity(3, 3));
        assert_eq!(FundamentalRep::new(5, 2).unwrap().dim(), 10);
    }

    #[test]
    fn first_power_and_diagonal() {
        let mut r = rng(1);
        let g = GroupElement::new(random_sl(&mut r, 4)).unwrap();
        assert_eq!(&exterior_power(&g, 1).unwrap(), g.matrix());
        let a = [2.0, 1.5, 0.5, 1.0 / 1.5];
        let g = GroupElement::new(Mat::from_diagonal(&Vector::from_column_slice(&a))).unwrap();
        let m = exterior_power(&g, 2).unwrap();
        let mut expect = Vec::new();
        for i in 0..4 {
            for j in i + 1..4 {
                expect.push(g.matrix()[(i, i)] * g.matrix()[(j, j)]);
            }
        }
        for (idx, e) in expect.iter().enumerate() {
            assert!((m[(idx, idx)] - e).abs() < 1e-14);
        }
        assert!((m.clone() - Mat::from_diagonal(&m.diagonal())).amax() == 0.0);
    }

    #[test]
    fn norm_is_product_of_singular_values() {
        let mut r = rng(2);
        for _ in 0..20 {
            let g = GroupElement::new(random_sl(&mut r, 4)).unwrap();
            let s = singular_values(g.matrix());
            for k in 1..4 {
                let top: f64 = s[..k].iter().product();
                let m = exterior_power(&g, k).unwrap();
                assert!((operator_norm(&m) - top).abs() < 1e-9 * top);
            }
        }
    }

    #[test]
    fn identities_on_simple_inputs() {
        assert_eq!(weight_identities_check(&GroupElement::identity(3)).max(), 0.0);
        let v = CartanVector::new(vec![0.7, 0.1, -0.8]).unwrap();
        assert!(weight_identities_check(&GroupElement::exp_diag(&v)).max() < 1e-15);
        let mut r = rng(3);
        for _ in 0..50 {
            let g = GroupElement::new(random_sl(&mut r, 4)).unwrap();
            assert!(weight_identities_check(&g).max() < 1e-6);
        }
    }

    #[test]
    fn product_bound_examples() {
        assert_eq!(cartan_product_bound(&GroupElement::identity(3)).value, 0.0);
        let mut r = rng(4);
        let k = GroupElement::new(random_rotation(&mut r, 3)).unwrap();
        assert!(cartan_product_bound(&k).value < 1e-9);
        let h = GroupElement::new(random_sl(&mut r, 3)).unwrap();
        let bound = cartan_product_bound(&h);
        for _ in 0..100 {
            let g = GroupElement::new(random_sl(&mut r, 3)).unwrap();
            let mu = cartan_projection(&g);
            assert!(cartan_projection(&g.mul(&h)).distance(&mu) <= bound.value + 1e-12);
            assert!(cartan_projection(&h.mul(&g)).distance(&mu) <= bound.value + 1e-12);
            let eta = Flag::from_basis(&random_sl(&mut r, 3)).unwrap();
            assert!(iwasawa_cocycle(&h, &eta).unwrap().norm() <= bound.value + 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn exterior_power_is_multiplicative(seed in any::<u64>(), d in 2usize..6) {
            let mut r = rng(seed);
            let g = GroupElement::new(random_sl(&mut r, d)).unwrap();
            let h = GroupElement::new(random_sl(&mut r, d)).unwrap();
            for k in 1..d {
                let lhs = exterior_power(&g.mul(&h), k).unwrap();
                let rhs = exterior_power(&g, k).unwrap() * exterior_power(&h, k).unwrap();
                prop_assert!((lhs - &rhs).amax() <= 1e-7 * rhs.amax().max(1.0));
            }
        }

        #[test]
        fn weights_of_inverse_are_dual(seed in any::<u64>(), d in 2usize..6) {
            let mut r = rng(seed);
            let g = GroupElement::new(random_sl(&mut r, d)).unwrap();
            let mu = cartan_projection(&g);
            let mu_inv = cartan_projection(&g.inverse());
            for k in 1..d {
                prop_assert!((mu_inv.partial_sum(k) - mu.partial_sum(d - k)).abs() < 1e-7);
            }
        }
    }
}
