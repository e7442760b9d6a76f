//! Full flags, flag pairs in general position, Hopf coordinates and the Weyl chamber flow.
//!
//! A flag is stored as an orthonormal frame whose leading `k` columns span its
//! `k`-dimensional subspace. Column signs carry no meaning.

use crate::group_core::{
    is_loxodromic, iwasawa_cocycle, jordan_projection, CartanVector, GroupElement, DEFAULT_TOL,
};
use crate::linalg::{null_vector, operator_norm, qr_positive, singular_values, wedge_columns, Mat};
use crate::proximality::{ProjHyperplane, ProjPoint};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlagError {
    #[error("frame is not a basis")]
    Degenerate,
    #[error("frame is not orthonormal")]
    NotOrthonormal,
    #[error("element is not loxodromic")]
    NotLoxodromic,
    #[error("flags are not in general position (opposition margin {margin:.3e})")]
    NotOpposite { margin: f64 },
    #[error("direction must be a unit vector in the open positive chamber: {0}")]
    Direction(String),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

/// A full flag in `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct Flag {
    frame: Mat,
}

impl Flag {
    /// The flag spanned by the leading columns of an invertible matrix.
    pub fn from_basis(b: &Mat) -> Result<Flag, FlagError> {
        let (rows, cols) = b.shape();
        if rows != cols || rows == 0 {
            return Err(FlagError::Degenerate);
        }
        let (q, r) = qr_positive(b);
        let scale = r.amax();
        if !(scale > 0.0) || (0..rows).any(|i| r[(i, i)] <= 1e-13 * scale) {
            return Err(FlagError::Degenerate);
        }
        Ok(Flag { frame: q })
    }

    /// Wraps an orthonormal frame (checked to `1e-10`).
    pub fn from_frame(frame: Mat) -> Result<Flag, FlagError> {
        let f = Flag { frame };
        if f.frame.nrows() != f.frame.ncols() {
            return Err(FlagError::Degenerate);
        }
        if !f.is_orthonormal(1e-10) {
            return Err(FlagError::NotOrthonormal);
        }
        Ok(f)
    }

    /// The standard flag `span(e_1) ⊂ span(e_1, e_2) ⊂ ...`.
    pub fn standard(d: usize) -> Flag {
        Flag {
            frame: Mat::identity(d, d),
        }
    }

    /// The flag opposite to the standard one: `span(e_d) ⊂ span(e_d, e_{d-1}) ⊂ ...`.
    pub fn opposite_standard(d: usize) -> Flag {
        Flag {
            frame: Mat::from_fn(d, d, |i, j| if i + j == d - 1 { 1.0 } else { 0.0 }),
        }
    }

    pub fn dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn frame(&self) -> &Mat {
        &self.frame
    }

    pub fn is_orthonormal(&self, tol: f64) -> bool {
        let d = self.dim();
        (self.frame.transpose() * &self.frame - Mat::identity(d, d)).amax() <= tol
    }

    /// Orthonormal basis (as columns) of the `k`-dimensional subspace.
    pub fn subspace(&self, k: usize) -> Mat {
        self.frame.columns(0, k).into_owned()
    }

    /// The image flag `g . eta`.
    pub fn act(&self, g: &Mat) -> Flag {
        Flag::from_basis(&(g * &self.frame)).expect("invertible matrices map flags to flags")
    }

    /// Largest projection gap over the nested subspaces.
    pub fn distance(&self, other: &Flag) -> f64 {
        (1..self.dim())
            .map(|k| subspace_gap(&self.subspace(k), &other.subspace(k)))
            .fold(0.0, f64::max)
    }

    /// Line of `Λ^k R^d` spanned by the wedge of the first `k` frame vectors.
    pub fn y_embedding(&self, k: usize) -> ProjPoint {
        ProjPoint::new(wedge_columns(&self.subspace(k))).expect("wedge of an orthonormal set is a unit vector")
    }

    /// Hyperplane of `Λ^k R^d` of `k`-vectors meeting the `(d-k)`-subspace non-trivially.
    ///
    /// Its normal is the wedge of an orthonormal basis of the orthogonal complement of
    /// that subspace, i.e. of the last `k` frame vectors.
    pub fn repelling_hyperplane(&self, k: usize) -> ProjHyperplane {
        let d = self.dim();
        let tail = self.frame.columns(d - k, k).into_owned();
        ProjHyperplane::new(wedge_columns(&tail)).expect("wedge of an orthonormal set is a unit vector")
    }
}

/// `|P_A - P_B|` for subspaces of equal dimension given by orthonormal columns.
pub fn subspace_gap(a: &Mat, b: &Mat) -> f64 {
    let resid = b - a * (a.transpose() * b);
    operator_norm(&resid).min(1.0)
}

/// Sine of the smallest angle between two subspaces of complementary dimension.
pub fn transversality(v: &Mat, w: &Mat) -> f64 {
    let resid = v - w * (w.transpose() * v);
    singular_values(&resid).last().copied().unwrap_or(1.0)
}

fn opposition_margin(plus: &Flag, minus: &Flag) -> f64 {
    let d = plus.dim();
    (1..d)
        .map(|k| transversality(&plus.subspace(k), &minus.subspace(d - k)))
        .fold(1.0, f64::min)
}

/// A pair of flags together with their opposition margin.
#[derive(Clone, Debug, PartialEq)]
pub struct FlagPair {
    pub plus: Flag,
    pub minus: Flag,
    pub opposition_margin: f64,
}

impl FlagPair {
    pub fn new(plus: Flag, minus: Flag) -> FlagPair {
        let opposition_margin = opposition_margin(&plus, &minus);
        FlagPair {
            plus,
            minus,
            opposition_margin,
        }
    }

    /// `(eta_0, eta_0 opposite)`.
    pub fn standard(d: usize) -> FlagPair {
        FlagPair::new(Flag::standard(d), Flag::opposite_standard(d))
    }

    pub fn act(&self, g: &Mat) -> FlagPair {
        FlagPair::new(self.plus.act(g), self.minus.act(g))
    }

    pub fn swap(&self) -> FlagPair {
        FlagPair::new(self.minus.clone(), self.plus.clone())
    }

    /// Larger of the two flag distances.
    pub fn distance(&self, other: &FlagPair) -> f64 {
        self.plus.distance(&other.plus).max(self.minus.distance(&other.minus))
    }
}

/// Hopf coordinates `(xi, eta; v)` of a Weyl chamber.
#[derive(Clone, Debug, PartialEq)]
pub struct HopfPoint {
    pub pair: FlagPair,
    pub apart: CartanVector,
}

impl HopfPoint {
    /// Left action: flags move by `h`, the `a`-coordinate by `sigma(h, xi)`.
    pub fn act(&self, h: &GroupElement) -> HopfPoint {
        let inc = iwasawa_cocycle(h, &self.pair.plus).expect("frames are orthonormal");
        HopfPoint {
            pair: self.pair.act(h.matrix()),
            apart: &self.apart + &inc,
        }
    }

    /// A group element with these Hopf coordinates (unique up to the diagonal sign group).
    pub fn representative(&self) -> Result<GroupElement, FlagError> {
        let d = self.apart.dim();
        if self.pair.opposition_margin <= 0.0 {
            return Err(FlagError::NotOpposite {
                margin: self.pair.opposition_margin,
            });
        }
        let mut b = Mat::zeros(d, d);
        for k in 1..=d {
            // b_k spans the line plus_k ∩ minus_{d-k+1}.
            let q1 = self.pair.plus.subspace(k);
            let q2 = self.pair.minus.subspace(d - k + 1);
            let resid = &q1 - &q2 * (q2.transpose() * &q1);
            let (a, _) = null_vector(&resid);
            b.column_mut(k - 1).copy_from(&(&q1 * a));
        }
        let (q, r) = qr_positive(&b);
        if q.determinant() < 0.0 {
            b.column_mut(0).neg_mut();
        }
        let mut g = b;
        for i in 0..d {
            let s = self.apart.coords()[i].exp() / r[(i, i)];
            g.column_mut(i).scale_mut(s);
        }
        GroupElement::new(g).map_err(|_| FlagError::Degenerate)
    }
}

/// Neighbourhood of a flag pair: both flags within `radius` in flag distance.
#[derive(Clone, Debug, PartialEq)]
pub struct FlagBox {
    pub center: FlagPair,
    pub radius: f64,
}

impl FlagBox {
    pub fn contains(&self, pair: &FlagPair) -> bool {
        self.center.distance(pair) < self.radius
    }
}

/// Product neighbourhood `U x B(u, r)` in Hopf coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct HopfBox {
    pub flags: FlagBox,
    pub apart_center: CartanVector,
    pub apart_radius: f64,
}

impl HopfBox {
    pub fn contains(&self, p: &HopfPoint) -> bool {
        self.flags.contains(&p.pair) && p.apart.distance(&self.apart_center) < self.apart_radius
    }
}

/// `(g eta_0, g eta_0 opposite; sigma(g, eta_0))`.
pub fn hopf_coordinates(g: &GroupElement) -> HopfPoint {
    let d = g.dim();
    let (q, r) = qr_positive(g.matrix());
    let plus = Flag { frame: q };
    let minus = Flag::opposite_standard(d).act(g.matrix());
    let apart = CartanVector::project((0..d).map(|i| r[(i, i)].ln()).collect());
    HopfPoint {
        pair: FlagPair::new(plus, minus),
        apart,
    }
}

fn check_direction(theta: &CartanVector) -> Result<(), FlagError> {
    if (theta.norm() - 1.0).abs() > 1e-9 {
        return Err(FlagError::Direction(format!("norm {}", theta.norm())));
    }
    if !theta.strictly_regular(1e-12) {
        return Err(FlagError::Direction(format!("{theta} lies on a wall")));
    }
    Ok(())
}

/// Weyl chamber flow in direction `theta`: translate the `a`-coordinate by `t theta`.
pub fn flow_action(p: &HopfPoint, theta: &CartanVector, t: f64) -> Result<HopfPoint, FlagError> {
    check_direction(theta)?;
    if theta.dim() != p.apart.dim() {
        return Err(FlagError::DimensionMismatch(theta.dim(), p.apart.dim()));
    }
    Ok(HopfPoint {
        pair: p.pair.clone(),
        apart: &p.apart + &(theta * t),
    })
}

/// Attracting and repelling flags of a loxodromic element, from its eigenbasis.
pub fn lox_fixed_flags(g: &GroupElement) -> Result<FlagPair, FlagError> {
    if !is_loxodromic(g, DEFAULT_TOL) {
        return Err(FlagError::NotLoxodromic);
    }
    let basis = g.eigen().eigenbasis.clone().ok_or(FlagError::NotLoxodromic)?;
    let d = g.dim();
    let reversed = Mat::from_fn(d, d, |i, j| basis[(i, d - 1 - j)]);
    Ok(FlagPair::new(Flag::from_basis(&basis)?, Flag::from_basis(&reversed)?))
}

/// `|lambda(g) - sigma(g, g+)|`.
pub fn check_lambda_sigma(g: &GroupElement) -> Result<f64, FlagError> {
    let pair = lox_fixed_flags(g)?;
    let sigma = iwasawa_cocycle(g, &pair.plus).map_err(|_| FlagError::Degenerate)?;
    Ok((jordan_projection(g) - sigma).norm())
}

/// Flag distances `d(g^n eta, g+)` for `n = 0..=n_max`.
pub fn contraction_to_fixed_flag(g: &GroupElement, eta: &Flag, n_max: usize) -> Result<Vec<f64>, FlagError> {
    let pair = lox_fixed_flags(g)?;
    let margin = opposition_margin(eta, &pair.minus);
    if margin <= 1e-10 {
        return Err(FlagError::NotOpposite { margin });
    }
    let mut cur = eta.clone();
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n > 0 {
            cur = cur.act(g.matrix());
        }
        out.push(cur.distance(&pair.plus));
    }
    Ok(out)
}
