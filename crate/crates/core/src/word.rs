//! Words in a finite set of generators and their numerically stable evaluation.
//!
//! A word `"1^3 2^5 1^2"` denotes the matrix product `g1^3 g2^5 g1^2` (left to right).
//! Long products are never formed entrywise. Projections come from per-`k` exterior-power
//! chains kept in log-scaled form, and flags and cocycles from orthonormal frames pushed
//! through the factors one at a time (re-orthonormalized after every multiplication).

use crate::flags_hopf::{Flag, FlagPair};
use crate::group_core::{is_loxodromic, CartanVector, GroupElement};
use crate::linalg::{compound, orthonormalize_columns, Mat, ScaledMatrix};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WordError {
    #[error("cannot parse word token {0:?}")]
    Parse(String),
    #[error("generator index {index} out of range 1..={count}")]
    Index { index: usize, count: usize },
    #[error("empty word")]
    Empty,
    #[error("generators have different dimensions")]
    Dimension,
    #[error("word product is not loxodromic")]
    NotLoxodromic,
    #[error("product too large to store entrywise (log scale {0:.1})")]
    Overflow(f64),
    #[error("invalid product: {0}")]
    Group(String),
}

/// A positive word: blocks `(generator index, power)` read as a left-to-right product.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    blocks: Vec<(usize, u64)>,
}

impl Word {
    /// Builds a word, dropping zero powers and merging equal neighbours.
    pub fn new(blocks: impl IntoIterator<Item = (usize, u64)>) -> Word {
        let mut out: Vec<(usize, u64)> = Vec::new();
        for (g, n) in blocks {
            if n == 0 {
                continue;
            }
            match out.last_mut() {
                Some(last) if last.0 == g => last.1 += n,
                _ => out.push((g, n)),
            }
        }
        Word { blocks: out }
    }

    pub fn letter(g: usize) -> Word {
        Word::new([(g, 1)])
    }

    /// Parses whitespace-separated tokens `i` or `i^n` with 1-based generator indices.
    pub fn parse(text: &str, generators: usize) -> Result<Word, WordError> {
        let mut blocks = Vec::new();
        for tok in text.split_whitespace() {
            let (idx, pow) = match tok.split_once('^') {
                Some((a, b)) => (a, b),
                None => (tok, "1"),
            };
            let index: usize = idx.parse().map_err(|_| WordError::Parse(tok.into()))?;
            let power: u64 = pow.parse().map_err(|_| WordError::Parse(tok.into()))?;
            if index == 0 || index > generators {
                return Err(WordError::Index {
                    index,
                    count: generators,
                });
            }
            if power == 0 {
                return Err(WordError::Parse(tok.into()));
            }
            blocks.push((index - 1, power));
        }
        if blocks.is_empty() {
            return Err(WordError::Empty);
        }
        Ok(Word::new(blocks))
    }

    pub fn blocks(&self) -> &[(usize, u64)] {
        &self.blocks
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Total number of letters.
    pub fn len(&self) -> u64 {
        self.blocks.iter().map(|b| b.1).sum()
    }

    /// Concatenation `self * other`.
    pub fn concat(&self, other: &Word) -> Word {
        Word::new(self.blocks.iter().chain(&other.blocks).copied())
    }

    pub fn pow(&self, n: u64) -> Word {
        if self.blocks.len() == 1 {
            return Word::new([(self.blocks[0].0, self.blocks[0].1 * n)]);
        }
        Word::new((0..n).flat_map(|_| self.blocks.iter().copied()))
    }

    /// Replaces each letter `i` by the word `images[i]`.
    pub fn substitute(&self, images: &[Word]) -> Word {
        Word::new(
            self.blocks
                .iter()
                .flat_map(|&(g, n)| images[g].pow(n).blocks.into_iter()),
        )
    }

    /// All words of length exactly `len` over `generators` letters, in lexicographic order.
    pub fn all_of_length(generators: usize, len: usize) -> Vec<Word> {
        let mut out = Vec::new();
        let mut idx = vec![0usize; len];
        if len == 0 || generators == 0 {
            return out;
        }
        loop {
            out.push(Word::new(idx.iter().map(|&g| (g, 1))));
            let mut pos = len;
            loop {
                if pos == 0 {
                    return out;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < generators {
                    break;
                }
                idx[pos] = 0;
            }
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (g, n)) in self.blocks.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            if *n == 1 {
                write!(f, "{}", g + 1)?;
            } else {
                write!(f, "{}^{}", g + 1, n)?;
            }
        }
        Ok(())
    }
}

/// Product of exterior powers `Λ^k P` for `k = 1..d-1`, each in log-scaled form.
#[derive(Clone, Debug)]
pub struct GradedProduct {
    parts: Vec<ScaledMatrix>,
}

impl GradedProduct {
    pub fn identity(d: usize) -> GradedProduct {
        GradedProduct {
            parts: (1..d)
                .map(|k| ScaledMatrix::identity(crate::linalg::binomial(d, k)))
                .collect(),
        }
    }

    pub fn from_matrix(m: &Mat) -> GradedProduct {
        GradedProduct {
            parts: (1..m.nrows()).map(|k| ScaledMatrix::new(compound(m, k))).collect(),
        }
    }

    /// Product of the given matrices, left to right.
    pub fn from_matrices(ms: &[Mat]) -> GradedProduct {
        let d = ms.first().map_or(2, |m| m.nrows());
        ms.iter()
            .fold(GradedProduct::identity(d), |acc, m| acc.mul(&GradedProduct::from_matrix(m)))
    }

    pub fn dim(&self) -> usize {
        self.parts.len() + 1
    }

    pub fn mul(&self, other: &GradedProduct) -> GradedProduct {
        GradedProduct {
            parts: self.parts.iter().zip(&other.parts).map(|(a, b)| a.mul(b)).collect(),
        }
    }

    pub fn pow(&self, n: u64) -> GradedProduct {
        GradedProduct {
            parts: self.parts.iter().map(|p| p.pow(n)).collect(),
        }
    }

    /// `Λ^k P` divided by its largest entry.
    pub fn part(&self, k: usize) -> &Mat {
        &self.parts[k - 1].mat
    }

    /// Cartan projection from `log |Λ^k P|`.
    pub fn cartan(&self) -> CartanVector {
        let chi: Vec<f64> = self.parts.iter().map(|p| p.log_norm()).collect();
        CartanVector::from_partial_sums(&chi)
    }

    /// Jordan projection from the spectral radii of `Λ^k P`.
    pub fn jordan(&self) -> CartanVector {
        let chi: Vec<f64> = self.parts.iter().map(|p| p.log_spectral_radius()).collect();
        CartanVector::from_partial_sums(&chi)
    }

    /// Largest log scale among the parts, a proxy for the size of the entries of `P`.
    pub fn log_size(&self) -> f64 {
        self.parts[0].log_scale
    }
}

/// Real eigendecomposition `g = V diag(mu) V^{-1}` used to apply large powers in one step.
#[derive(Clone, Debug)]
struct RealEigen {
    v: Mat,
    v_inv: Mat,
    log_abs: Vec<f64>,
    negative: Vec<bool>,
}

impl RealEigen {
    fn of(g: &GroupElement) -> Option<RealEigen> {
        let eig = g.eigen();
        let v = eig.eigenbasis.clone()?;
        let v_inv = v.clone().try_inverse()?;
        Some(RealEigen {
            v,
            v_inv,
            log_abs: eig.eigenvalues.iter().map(|z| z.re.abs().ln()).collect(),
            negative: eig.eigenvalues.iter().map(|z| z.re < 0.0).collect(),
        })
    }
}

/// Unpivoted LU of a small square matrix; `None` when a pivot is negligible.
fn lu_unpivoted(m: &Mat) -> Option<(Mat, Mat)> {
    let n = m.nrows();
    let mut l = Mat::identity(n, n);
    let mut u = m.clone();
    let scale = m.amax();
    for j in 0..n {
        let piv = u[(j, j)];
        if piv.abs() <= 1e-9 * scale {
            return None;
        }
        for i in j + 1..n {
            let f = u[(i, j)] / piv;
            l[(i, j)] = f;
            for c in j..n {
                u[(i, c)] -= f * u[(j, c)];
            }
        }
    }
    Some((l, u))
}

/// Cached data for evaluating words in a fixed list of generators.
#[derive(Clone, Debug)]
pub struct Alphabet {
    d: usize,
    gens: Vec<GroupElement>,
    inverses: Vec<GroupElement>,
    graded: Vec<GradedProduct>,
    graded_inv: Vec<GradedProduct>,
    eigen: Vec<Option<RealEigen>>,
    eigen_inv: Vec<Option<RealEigen>>,
}

/// Powers at or above this size are applied to frames through the eigendecomposition.
const CLOSED_FORM_POWER: u64 = 8;

impl Alphabet {
    pub fn new(gens: Vec<GroupElement>) -> Result<Alphabet, WordError> {
        let d = gens.first().ok_or(WordError::Empty)?.dim();
        if gens.iter().any(|g| g.dim() != d) {
            return Err(WordError::Dimension);
        }
        let inverses: Vec<GroupElement> = gens.iter().map(|g| g.inverse()).collect();
        Ok(Alphabet {
            d,
            graded: gens.iter().map(|g| GradedProduct::from_matrix(g.matrix())).collect(),
            graded_inv: inverses.iter().map(|g| GradedProduct::from_matrix(g.matrix())).collect(),
            eigen: gens.iter().map(RealEigen::of).collect(),
            eigen_inv: inverses.iter().map(RealEigen::of).collect(),
            gens,
            inverses,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.gens
    }

    fn check(&self, w: &Word) -> Result<(), WordError> {
        if w.is_empty() {
            return Err(WordError::Empty);
        }
        if let Some(&(g, _)) = w.blocks().iter().find(|b| b.0 >= self.gens.len()) {
            return Err(WordError::Index {
                index: g + 1,
                count: self.gens.len(),
            });
        }
        Ok(())
    }

    /// Exterior-power chain of the word (or of its inverse).
    pub fn graded(&self, w: &Word, inverse: bool) -> Result<GradedProduct, WordError> {
        self.check(w)?;
        let mut acc = GradedProduct::identity(self.d);
        if inverse {
            for &(g, n) in w.blocks().iter().rev() {
                acc = acc.mul(&self.graded_inv[g].pow(n));
            }
        } else {
            for &(g, n) in w.blocks() {
                acc = acc.mul(&self.graded[g].pow(n));
            }
        }
        Ok(acc)
    }

    pub fn jordan(&self, w: &Word) -> Result<CartanVector, WordError> {
        Ok(self.graded(w, false)?.jordan())
    }

    pub fn cartan(&self, w: &Word) -> Result<CartanVector, WordError> {
        Ok(self.graded(w, false)?.cartan())
    }

    /// The product as a group element, when its entries stay representable.
    pub fn element(&self, w: &Word) -> Result<GroupElement, WordError> {
        self.check(w)?;
        let mut acc = ScaledMatrix::identity(self.d);
        for &(g, n) in w.blocks() {
            acc = acc.mul(&ScaledMatrix::new(self.gens[g].matrix().clone()).pow(n));
        }
        if acc.log_scale > 600.0 {
            return Err(WordError::Overflow(acc.log_scale));
        }
        GroupElement::new(acc.mat * acc.log_scale.exp()).map_err(|e| WordError::Group(e.to_string()))
    }

    /// Applies `g^n` to an orthonormal frame in place and returns the increment of the
    /// Iwasawa cocycle.
    fn apply_power(&self, g: usize, n: u64, inverse: bool, frame: &mut Mat, sigma: &mut [f64]) {
        let (m, eig) = if inverse {
            (&self.inverses[g], &self.eigen_inv[g])
        } else {
            (&self.gens[g], &self.eigen[g])
        };
        if n >= CLOSED_FORM_POWER {
            if let Some(e) = eig {
                if self.apply_closed_form(e, n, frame, sigma) {
                    return;
                }
            }
        }
        for _ in 0..n {
            *frame = m.matrix() * &*frame;
            let diag = orthonormalize_columns(frame);
            for (s, r) in sigma.iter_mut().zip(diag) {
                *s += r.ln();
            }
        }
    }

    /// `g^n F = V L_n D^n U` with `V^{-1} F = L U` and `L_n = D^n L D^{-n}`, whose
    /// off-diagonal entries only decay.
    fn apply_closed_form(&self, e: &RealEigen, n: u64, frame: &mut Mat, sigma: &mut [f64]) -> bool {
        let d = self.d;
        let Some((l, u)) = lu_unpivoted(&(&e.v_inv * &*frame)) else {
            return false;
        };
        let nf = n as f64;
        let ln = Mat::from_fn(d, d, |i, j| {
            if i <= j {
                l[(i, j)]
            } else {
                let sign = if (e.negative[i] != e.negative[j]) && n % 2 == 1 { -1.0 } else { 1.0 };
                l[(i, j)] * sign * (nf * (e.log_abs[i] - e.log_abs[j])).exp()
            }
        });
        let mut b = &e.v * ln;
        let diag = orthonormalize_columns(&mut b);
        if diag.iter().any(|&x| !(x > 0.0)) {
            return false;
        }
        for i in 0..d {
            sigma[i] += diag[i].ln() + nf * e.log_abs[i] + u[(i, i)].abs().ln();
        }
        *frame = b;
        true
    }

    /// `(P eta, sigma(P, eta))` for the word product `P` (or its inverse).
    pub fn act(&self, w: &Word, eta: &Flag, inverse: bool) -> Result<(Flag, CartanVector), WordError> {
        self.check(w)?;
        let mut frame = eta.frame().clone();
        let mut sigma = vec![0.0; self.d];
        // Factors act right to left; the inverse word reverses the order.
        if inverse {
            for &(g, n) in w.blocks() {
                self.apply_power(g, n, true, &mut frame, &mut sigma);
            }
        } else {
            for &(g, n) in w.blocks().iter().rev() {
                self.apply_power(g, n, false, &mut frame, &mut sigma);
            }
        }
        let flag = Flag::from_frame(frame).map_err(|_| WordError::NotLoxodromic)?;
        Ok((flag, CartanVector::project(sigma)))
    }

    /// Attracting flag of the word (or its inverse) by orthogonal iteration.
    fn attracting_flag(&self, w: &Word, inverse: bool) -> Result<Flag, WordError> {
        let lead = if inverse { w.blocks()[w.blocks().len() - 1].0 } else { w.blocks()[0].0 };
        let lead_elem = if inverse { &self.inverses[lead] } else { &self.gens[lead] };
        let mut cur = match crate::flags_hopf::lox_fixed_flags(lead_elem) {
            Ok(p) => p.plus,
            Err(_) => Flag::standard(self.d),
        };
        let mut prev = f64::INFINITY;
        for _ in 0..400 {
            let (next, _) = self.act(w, &cur, inverse)?;
            let moved = next.distance(&cur);
            cur = next;
            // Converged, or stalled at rounding level.
            if moved < 1e-14 || (moved < 1e-9 && moved >= prev) {
                return Ok(cur);
            }
            prev = moved;
        }
        Err(WordError::NotLoxodromic)
    }

    /// `(P+, P-)` for a loxodromic word product `P`.
    pub fn fixed_flags(&self, w: &Word) -> Result<FlagPair, WordError> {
        self.check(w)?;
        let lambda = self.jordan(w)?;
        if !lambda.strictly_regular(1e-9) {
            return Err(WordError::NotLoxodromic);
        }
        let plus = self.attracting_flag(w, false)?;
        let minus = self.attracting_flag(w, true)?;
        Ok(FlagPair::new(plus, minus))
    }

    /// `true` when the graded Jordan projection is regular with gaps above `gap_tol`.
    pub fn is_loxodromic(&self, w: &Word, gap_tol: f64) -> bool {
        if let Ok(g) = self.element(w) {
            if g.matrix().amax() < 1e6 {
                return is_loxodromic(&g, gap_tol);
            }
        }
        self.jordan(w).map(|l| l.strictly_regular(gap_tol)).unwrap_or(false)
    }
}
