//! Products of proximal and loxodromic elements: the `alpha` coefficients, the `nu`
//! correction, the spectral estimate for products and strong Schottky certification.
//!
//! Lists of elements are given in application order: `gs[0]` acts first, so `[g1, .., gl]`
//! stands for the product `gl ... g1`, and cyclic indices use `g0 = gl`.

use crate::flags_hopf::FlagPair;
use crate::group_core::{CartanVector, GroupElement};
use crate::proximality::{attract_repel, certify_proximal, ProjHyperplane, ProjPoint, ProxError, ProximalityCertificate};
use crate::sampling::rng;
use crate::word::{Alphabet, Word, WordError};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// `|<n, v>|` below this makes `alpha` degenerate.
pub const DEGENERATE_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchottkyError {
    #[error("attracting point lies on the repelling hyperplane (|<n, v>| = {value:.3e})")]
    Degenerate { value: f64 },
    #[error("empty list")]
    Empty,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("generator {index} is not ({r}, {eps})-proximal on exterior power {k}: {reason}")]
    Generator {
        index: usize,
        k: usize,
        r: f64,
        eps: f64,
        reason: ProxError,
    },
    #[error("margin d(x+(h{i}), X-(h{j})) = {found:.6} on exterior power {k} is below 6r = {required:.6}")]
    Margin {
        k: usize,
        i: usize,
        j: usize,
        found: f64,
        required: f64,
    },
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Prox(#[from] ProxError),
}

/// `alpha` from the data of `g` and the attracting point of `h`: the real number with
/// `v+(h) - alpha v+(g)` in the repelling hyperplane of `g`.
pub fn alpha_from(g_attract: &ProjPoint, g_repel: &ProjHyperplane, h_attract: &ProjPoint) -> Result<f64, SchottkyError> {
    let num = g_repel.normal().dot(h_attract.vec());
    let den = g_repel.normal().dot(g_attract.vec());
    if num.abs() < DEGENERATE_TOL {
        return Err(SchottkyError::Degenerate { value: num.abs() });
    }
    if den.abs() < DEGENERATE_TOL {
        return Err(SchottkyError::Degenerate { value: den.abs() });
    }
    Ok(num / den)
}

/// `alpha(g, h)` for proximal `g`, `h`; only its absolute value is meaningful.
pub fn alpha_coeff(g: &crate::linalg::Mat, h: &crate::linalg::Mat) -> Result<f64, SchottkyError> {
    let (xg, yg) = attract_repel(g)?;
    let (xh, _) = attract_repel(h)?;
    alpha_from(&xg, &yg, &xh)
}

/// `nu_1 = sum_j log |alpha(g_j, g_{j-1})|` from attracting/repelling data in application order.
pub fn nu1_from(data: &[(ProjPoint, ProjHyperplane)]) -> Result<f64, SchottkyError> {
    if data.is_empty() {
        return Err(SchottkyError::Empty);
    }
    let l = data.len();
    let mut sum = 0.0;
    for j in 0..l {
        let prev = &data[(j + l - 1) % l];
        sum += alpha_from(&data[j].0, &data[j].1, &prev.0)?.abs().ln();
    }
    Ok(sum)
}

/// `nu_1` of proximal matrices given in application order.
pub fn nu1(gs: &[crate::linalg::Mat]) -> Result<f64, SchottkyError> {
    let data = gs.iter().map(attract_repel).collect::<Result<Vec<_>, _>>()?;
    nu1_from(&data)
}

/// The correction `nu` in the Cartan subspace, with `chi_k(nu)` the `nu_1` of the `k`-th
/// exterior powers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NuCorrection {
    pub vec: CartanVector,
    pub per_root: Vec<f64>,
}

/// `nu` from the fixed flag pairs of loxodromic elements in application order.
pub fn nu_from_flags(pairs: &[FlagPair]) -> Result<NuCorrection, SchottkyError> {
    let d = pairs.first().ok_or(SchottkyError::Empty)?.plus.dim();
    let per_root = (1..d)
        .map(|k| {
            let data: Vec<_> = pairs
                .iter()
                .map(|p| (p.plus.y_embedding(k), p.minus.repelling_hyperplane(k)))
                .collect();
            nu1_from(&data)
        })
        .collect::<Result<Vec<f64>, _>>()?;
    Ok(NuCorrection {
        vec: CartanVector::from_partial_sums(&per_root),
        per_root,
    })
}

/// `nu` of loxodromic elements in application order.
pub fn nu_vector(gs: &[GroupElement]) -> Result<NuCorrection, SchottkyError> {
    let pairs = gs
        .iter()
        .map(|g| crate::flags_hopf::lox_fixed_flags(g).map_err(|e| SchottkyError::Precondition(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    nu_from_flags(&pairs)
}

/// A certified strong `(r, eps)`-Schottky family whose generators are words in a base
/// alphabet.
#[derive(Clone, Debug)]
pub struct SchottkyFamily {
    pub base: Alphabet,
    pub gens: Vec<Word>,
    pub r: f64,
    pub eps: f64,
    pub grid_n: usize,
    /// `certs[i][k - 1]` certifies `Λ^k h_i`.
    pub certs: Vec<Vec<ProximalityCertificate>>,
    /// `margins[k - 1][i][j] = d(x+(Λ^k h_i), X-(Λ^k h_j))`.
    pub margins: Vec<Vec<Vec<f64>>>,
    pub flags: Vec<FlagPair>,
    pub lambdas: Vec<CartanVector>,
}

/// Serializable view of a family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySummary {
    pub generators: Vec<String>,
    pub r: f64,
    pub eps: f64,
    pub grid_n: usize,
    pub min_margin: f64,
    pub margins: Vec<Vec<Vec<f64>>>,
    pub jordan: Vec<CartanVector>,
    pub certificates: Vec<Vec<ProximalityCertificate>>,
}

impl SchottkyFamily {
    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    /// A word in the family generators rewritten over the base alphabet.
    pub fn expand(&self, w: &Word) -> Word {
        w.substitute(&self.gens)
    }

    pub fn min_margin(&self) -> f64 {
        self.margins.iter().flatten().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn summary(&self) -> FamilySummary {
        FamilySummary {
            generators: self.gens.iter().map(|w| w.to_string()).collect(),
            r: self.r,
            eps: self.eps,
            grid_n: self.grid_n,
            min_margin: self.min_margin(),
            margins: self.margins.clone(),
            jordan: self.lambdas.clone(),
            certificates: self.certs.clone(),
        }
    }

    /// The family generated by the `n`-th powers of the generators, recertified at
    /// `(r, eps)`.
    pub fn powers(&self, n: u64, r: f64, eps: f64) -> Result<SchottkyFamily, SchottkyError> {
        let gens = self.gens.iter().map(|w| w.pow(n)).collect();
        certify_schottky(&self.base, gens, r, eps, self.grid_n)
    }
}

/// Certifies that the words `gens` generate a strong `(r, eps)`-Schottky semigroup: every
/// exterior power of every generator is `(r, eps)`-proximal and
/// `d(x+(Λ^k h), X-(Λ^k h')) >= 6r` for all generators `h, h'` (including `h = h'`).
pub fn certify_schottky(
    base: &Alphabet,
    gens: Vec<Word>,
    r: f64,
    eps: f64,
    grid_n: usize,
) -> Result<SchottkyFamily, SchottkyError> {
    if gens.is_empty() {
        return Err(SchottkyError::Empty);
    }
    if !(eps > 0.0 && eps <= r) {
        return Err(SchottkyError::Precondition(format!("need 0 < eps <= r, got r = {r}, eps = {eps}")));
    }
    let d = base.dim();
    let mut certs = Vec::with_capacity(gens.len());
    let mut lambdas = Vec::with_capacity(gens.len());
    for (index, w) in gens.iter().enumerate() {
        let graded = base.graded(w, false)?;
        lambdas.push(graded.jordan());
        let mut row = Vec::with_capacity(d - 1);
        for k in 1..d {
            let cert = certify_proximal(graded.part(k), r, eps, grid_n).map_err(|reason| SchottkyError::Generator {
                index,
                k,
                r,
                eps,
                reason,
            })?;
            row.push(cert);
        }
        certs.push(row);
    }
    let mut margins = Vec::with_capacity(d - 1);
    for k in 1..d {
        let mut table = vec![vec![0.0; gens.len()]; gens.len()];
        for i in 0..gens.len() {
            for j in 0..gens.len() {
                let found = certs[j][k - 1].repel.distance_to(&certs[i][k - 1].attract);
                if found < 6.0 * r {
                    return Err(SchottkyError::Margin {
                        k,
                        i,
                        j,
                        found,
                        required: 6.0 * r,
                    });
                }
                table[i][j] = found;
            }
        }
        margins.push(table);
    }
    let flags = gens.iter().map(|w| base.fixed_flags(w)).collect::<Result<Vec<_>, _>>()?;
    Ok(SchottkyFamily {
        base: base.clone(),
        gens,
        r,
        eps,
        grid_n,
        certs,
        margins,
        flags,
        lambdas,
    })
}

/// [`certify_schottky`] for explicit group elements, each its own generator.
pub fn certify_schottky_elements(
    gens: Vec<GroupElement>,
    r: f64,
    eps: f64,
    grid_n: usize,
) -> Result<SchottkyFamily, SchottkyError> {
    let words = (0..gens.len()).map(Word::letter).collect();
    let base = Alphabet::new(gens)?;
    certify_schottky(&base, words, r, eps, grid_n)
}

/// Smallest `n <= max_power` for which the `n`-th powers of `gens` certify at `(r, eps)`.
///
/// Margins do not change with `n`, so a margin refusal ends the search at once.
pub fn power_until_schottky(
    base: &Alphabet,
    gens: &[Word],
    r: f64,
    eps: f64,
    grid_n: usize,
    max_power: u64,
) -> Result<(u64, SchottkyFamily), SchottkyError> {
    let mut last = SchottkyError::Empty;
    for n in 1..=max_power {
        let words = gens.iter().map(|w| w.pow(n)).collect();
        match certify_schottky(base, words, r, eps, grid_n) {
            Ok(f) => return Ok((n, f)),
            Err(e @ SchottkyError::Margin { .. }) => return Err(e),
            Err(e @ SchottkyError::Generator { .. }) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// Outcome of comparing `lambda` of a product with `sum n_i lambda(h_i) + nu`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub word: String,
    /// Number of blocks `l`.
    pub blocks: usize,
    pub jordan: CartanVector,
    pub predicted: CartanVector,
    pub nu: NuCorrection,
    pub residual: f64,
    /// `residual / l`.
    pub c_empirical: f64,
    /// The product is `(2r, 2eps)`-proximal on every exterior power.
    pub loxodromic_2r_2eps: bool,
    /// `d(y(g+), y(h_l+))` per exterior power, `h_l` the leftmost block.
    pub attract_offset: Vec<f64>,
    /// Excess of the repelling hyperplane of the product over that of `h_1`, the rightmost block.
    pub repel_offset: Vec<f64>,
    /// Both offsets are at most `eps` on every exterior power.
    pub localized: bool,
}

/// Checks the spectral estimate on a word in the family generators.
pub fn product_estimate_check(family: &SchottkyFamily, word: &Word) -> Result<EstimateReport, SchottkyError> {
    if word.is_empty() {
        return Err(SchottkyError::Empty);
    }
    if let Some(&(g, _)) = word.blocks().iter().find(|b| b.0 >= family.len()) {
        return Err(WordError::Index {
            index: g + 1,
            count: family.len(),
        }
        .into());
    }
    let d = family.dim();
    let blocks = word.blocks();
    let graded = family.base.graded(&family.expand(word), false)?;
    let jordan = graded.jordan();
    let order: Vec<usize> = blocks.iter().rev().map(|b| b.0).collect();
    let pairs: Vec<FlagPair> = order.iter().map(|&i| family.flags[i].clone()).collect();
    let nu = nu_from_flags(&pairs)?;
    let mut predicted = nu.vec.clone();
    for &(i, n) in blocks {
        predicted += &(&family.lambdas[i] * n as f64);
    }
    let residual = jordan.distance(&predicted);
    let (first, last) = (blocks[0].0, blocks[blocks.len() - 1].0);
    let mut loxodromic = true;
    let mut attract_offset = Vec::with_capacity(d - 1);
    let mut repel_offset = Vec::with_capacity(d - 1);
    for k in 1..d {
        match certify_proximal(graded.part(k), 2.0 * family.r, 2.0 * family.eps, family.grid_n) {
            Ok(_) => {}
            Err(ProxError::Refused(_)) | Err(ProxError::NotProximal { .. }) => loxodromic = false,
            Err(e) => return Err(e.into()),
        }
        match attract_repel(graded.part(k)) {
            Ok((x, y)) => {
                attract_offset.push(crate::proximality::proj_distance(&x, &family.certs[first][k - 1].attract));
                repel_offset.push(y.excess_over(&family.certs[last][k - 1].repel));
            }
            Err(_) => {
                attract_offset.push(f64::INFINITY);
                repel_offset.push(f64::INFINITY);
            }
        }
    }
    let localized = attract_offset.iter().chain(&repel_offset).all(|&x| x <= family.eps);
    Ok(EstimateReport {
        word: word.to_string(),
        blocks: blocks.len(),
        jordan,
        predicted,
        nu,
        residual,
        c_empirical: residual / blocks.len() as f64,
        loxodromic_2r_2eps: loxodromic,
        attract_offset,
        repel_offset,
        localized,
    })
}

/// Seeded corpus of words alternating between distinct generators, with `1..=max_blocks`
/// blocks and powers in `1..=max_power`.
pub fn alternating_words(generators: usize, count: usize, max_blocks: usize, max_power: u64, seed: u64) -> Vec<Word> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let l = r.gen_range(1..=max_blocks.max(1));
            let mut blocks: Vec<(usize, u64)> = Vec::with_capacity(l);
            for _ in 0..l {
                let mut g = r.gen_range(0..generators);
                if generators > 1 {
                    while blocks.last().is_some_and(|b| b.0 == g) {
                        g = r.gen_range(0..generators);
                    }
                }
                blocks.push((g, r.gen_range(1..=max_power.max(1))));
            }
            Word::new(blocks)
        })
        .collect()
}

/// Largest and mean `residual / l` over a corpus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub words: usize,
    pub c_max: f64,
    pub c_mean: f64,
    pub all_localized: bool,
    pub all_loxodromic: bool,
}

pub fn empirical_c(family: &SchottkyFamily, words: &[Word]) -> Result<CorpusReport, SchottkyError> {
    let reports = words
        .iter()
        .map(|w| product_estimate_check(family, w))
        .collect::<Result<Vec<_>, _>>()?;
    let n = reports.len().max(1) as f64;
    Ok(CorpusReport {
        words: reports.len(),
        c_max: reports.iter().map(|r| r.c_empirical).fold(0.0, f64::max),
        c_mean: reports.iter().map(|r| r.c_empirical).sum::<f64>() / n,
        all_localized: reports.iter().all(|r| r.localized),
        all_loxodromic: reports.iter().all(|r| r.loxodromic_2r_2eps),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flags_hopf::check_lambda_sigma;
        use crate::linalg::{Mat, Vector};
    use crate::proximality::DEFAULT_GRID;
    
    fn diag(v: &[f64]) -> Mat {
        Mat::from_diagonal(&Vector::from_column_slice(v))
    }

    fn rotation(t: f64) -> Mat {
        Mat::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()])
    }

    fn conj(h: &Mat, g: &Mat) -> Mat {
        h * g * h.clone().try_inverse().unwrap()
    }

    fn elem(m: Mat) -> GroupElement {
        GroupElement::new(m).unwrap()
    }

    /// Two strongly contracting elements of SL(3) with well separated fixed flags.
    fn pair3(scale: f64) -> Vec<GroupElement> {
        let a = diag(&[scale, 1.0, 1.0 / scale]);
        let axis = Vector::from_column_slice(&[1.0, 1.0, 1.0]).normalize();
        let k = nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(nalgebra::Vector3::new(axis[0], axis[1], axis[2])), 0.8);
        let k = Mat::from_fn(3, 3, |i, j| k.matrix()[(i, j)]);
        vec![elem(a.clone()), elem(conj(&k, &a))]
    }

    #[test]
    fn alpha_examples() {
        let g = diag(&[4.0, 0.25]);
        assert!((alpha_coeff(&g, &g).unwrap().abs() - 1.0).abs() < 1e-12);
        let h = conj(&rotation(std::f64::consts::FRAC_PI_4), &g);
        assert!((alpha_coeff(&g, &h).unwrap().abs() - 0.5f64.sqrt()).abs() < 1e-12);
        let flipped = alpha_from(
            &ProjPoint::from_slice(&[-1.0, 0.0]).unwrap(),
            &ProjHyperplane::from_slice(&[1.0, 0.0]).unwrap(),
            &ProjPoint::from_slice(&[-1.0, -1.0]).unwrap(),
        )
        .unwrap();
        assert!((flipped.abs() - 0.5f64.sqrt()).abs() < 1e-12);
        let degenerate = conj(&rotation(std::f64::consts::FRAC_PI_2), &g);
        assert!(matches!(alpha_coeff(&g, &degenerate), Err(SchottkyError::Degenerate { .. })));
    }

    #[test]
    fn nu1_examples() {
        let g = diag(&[4.0, 0.25]);
        assert_eq!(nu1(std::slice::from_ref(&g)).unwrap(), 0.0);
        assert!(nu1(&[g.clone(), diag(&[3.0, 1.0 / 3.0])]).unwrap().abs() < 1e-15);
        let h = conj(&rotation(std::f64::consts::FRAC_PI_4), &g);
        let v = nu1(&[g.clone(), h.clone()]).unwrap();
        assert!((v - 2.0 * 0.5f64.sqrt().ln()).abs() < 1e-12);
        let k = conj(&rotation(0.3), &diag(&[5.0, 0.2]));
        let a = nu1(&[g.clone(), h.clone(), k.clone()]).unwrap();
        let b = nu1(&[h.clone(), k.clone(), g.clone()]).unwrap();
        let c = nu1(&[k, g, h]).unwrap();
        assert!((a - b).abs() < 1e-9 && (a - c).abs() < 1e-9);
    }

    #[test]
    fn nu_vector_examples() {
        let g = pair3(2e3);
        assert_eq!(nu_vector(&g[..1]).unwrap().vec.norm(), 0.0);
        let commuting = [elem(diag(&[3.0, 1.0, 1.0 / 3.0])), elem(diag(&[5.0, 0.5, 0.4]))];
        assert!(nu_vector(&commuting).unwrap().vec.norm() < 1e-14);
        let a = diag(&[4.0, 0.25]);
        let pair2 = [elem(a.clone()), elem(conj(&rotation(std::f64::consts::FRAC_PI_4), &a))];
        let nu = nu_vector(&pair2).unwrap();
        let n1 = 2.0 * 0.5f64.sqrt().ln();
        assert!(nu.vec.distance(&CartanVector::new(vec![n1, -n1]).unwrap()) < 1e-12);
        // Sign flips in the frames leave nu unchanged.
        let pairs: Vec<FlagPair> = g.iter().map(|x| crate::flags_hopf::lox_fixed_flags(x).unwrap()).collect();
        let flip = |p: &FlagPair| {
            let mut f = p.plus.frame().clone();
            f.column_mut(0).neg_mut();
            let mut m = p.minus.frame().clone();
            m.column_mut(2).neg_mut();
            FlagPair::new(
                crate::flags_hopf::Flag::from_frame(f).unwrap(),
                crate::flags_hopf::Flag::from_frame(m).unwrap(),
            )
        };
        let flipped: Vec<FlagPair> = pairs.iter().map(flip).collect();
        let a = nu_from_flags(&pairs).unwrap();
        let b = nu_from_flags(&flipped).unwrap();
        assert!(a.vec.distance(&b.vec) < 1e-10);
    }

    #[test]
    fn nu_matches_alpha_of_exterior_powers() {
        let g = pair3(2e3);
        let nu = nu_vector(&g).unwrap();
        for k in 1..3 {
            let ms: Vec<Mat> = g.iter().map(|x| crate::linalg::compound(x.matrix(), k)).collect();
            assert!((nu.per_root[k - 1] - nu1(&ms).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn certify_single_and_refusals() {
        let g = elem(diag(&[1e3, 1.0, 1e-3]));
        let fam = certify_schottky_elements(vec![g.clone()], 0.2, 0.1, DEFAULT_GRID).unwrap();
        assert_eq!(fam.len(), 1);
        assert!(fam.min_margin() >= 1.2);
        // Margin 6r exceeds the separation sqrt(2) of a diagonal element.
        assert!(matches!(
            certify_schottky_elements(vec![g.clone()], 0.25, 0.1, DEFAULT_GRID),
            Err(SchottkyError::Margin { .. })
        ));
        // x+(h) lies on X-(g).
        let p = Mat::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
        let g = elem(diag(&[1e4, 1.0, 1e-4]));
        let h = elem(conj(&p.transpose(), g.matrix()));
        let err = certify_schottky_elements(vec![g.clone(), h], 0.1, 0.1, DEFAULT_GRID).unwrap_err();
        assert!(matches!(err, SchottkyError::Margin { found, .. } if found < 1e-12));
        assert!(matches!(
            certify_schottky_elements(vec![elem(diag(&[1.5, 1.0, 1.0 / 1.5]))], 0.1, 0.05, DEFAULT_GRID),
            Err(SchottkyError::Generator { .. })
        ));
    }

    #[test]
    fn closing_construction_certifies() {
        // Transverse loxodromics with margins >= 7r, powered until (r/2, eps/2)-loxodromic.
        let (r, eps) = (0.08, 0.05);
        let gens = pair3(30.0);
        let base = Alphabet::new(gens).unwrap();
        let letters = vec![Word::letter(0), Word::letter(1)];
        let (n, half) = power_until_schottky(&base, &letters, r / 2.0, eps / 2.0, DEFAULT_GRID, 64).unwrap();
        assert!(half.min_margin() >= 7.0 * r);
        let fam = certify_schottky(&base, half.gens.clone(), r, eps, DEFAULT_GRID).unwrap();
        assert_eq!(fam.gens[0], Word::new([(0, n)]));
        for w in alternating_words(2, 20, 4, 3, 9) {
            let rep = product_estimate_check(&fam, &w).unwrap();
            assert!(rep.loxodromic_2r_2eps, "{w}");
        }
    }

    #[test]
    fn estimate_exact_cases() {
        let fam = certify_schottky_elements(pair3(2e3), 0.1, 0.1, DEFAULT_GRID).unwrap();
        for n in [1, 5, 40] {
            let rep = product_estimate_check(&fam, &Word::new([(1, n)])).unwrap();
            assert!(rep.residual < 1e-8, "{n}: {}", rep.residual);
            assert!(rep.localized);
        }
        let t = 2f64.cbrt();
        let commuting = [elem(diag(&[1e4, 1.0, 1e-4])), elem(diag(&[5e3 * t, t, t / 1e4]))];
        let fam = certify_schottky_elements(commuting.to_vec(), 0.2, 0.1, DEFAULT_GRID).unwrap();
        let rep = product_estimate_check(&fam, &Word::parse("1^3 2^5 1^2", 2).unwrap()).unwrap();
        assert!(rep.residual < 1e-10);
    }

    #[test]
    fn estimate_against_direct_product() {
        let gens = pair3(2e3);
        let fam = certify_schottky_elements(gens.clone(), 0.1, 0.1, DEFAULT_GRID).unwrap();
        let w = Word::parse("1^2 2 1 2^3", 2).unwrap();
        let rep = product_estimate_check(&fam, &w).unwrap();
        // The smallest eigenvalue is out of reach of a direct eigensolver, so the oracle
        // uses the top eigenvalues of g and of g^-1.
        let g = fam.base.element(&w).unwrap();
        let g_inv = w.blocks().iter().fold(GroupElement::identity(3), |acc, &(i, n)| {
            gens[i].inverse().pow(n).mul(&acc)
        });
        let radius = |m: &Mat| crate::linalg::sorted_eigenvalues(m)[0].norm().ln();
        let top = radius(g.matrix());
        let bottom = -radius(g_inv.matrix());
        assert!((rep.jordan.coords()[0] - top).abs() < 1e-9);
        // The inverse product is formed with cancellation, so its top eigenvalue is coarser.
        assert!((rep.jordan.coords()[2] - bottom).abs() < 1e-7);
        assert!(check_lambda_sigma(&fam.base.element(&Word::parse("1 2", 2).unwrap()).unwrap()).unwrap() < 1e-6);
        assert!(rep.residual < 0.01 * rep.blocks as f64);
        assert!(rep.localized && rep.loxodromic_2r_2eps);
    }

    #[test]
    fn c_decreases_with_powers() {
        let fam = certify_schottky_elements(pair3(2e3), 0.1, 0.1, DEFAULT_GRID).unwrap();
        let words = alternating_words(2, 30, 5, 4, 3);
        let c1 = empirical_c(&fam, &words).unwrap();
        let fam4 = fam.powers(4, 0.1, 0.025).unwrap();
        let c4 = empirical_c(&fam4, &words).unwrap();
        assert!(c4.c_max < c1.c_max, "{} vs {}", c4.c_max, c1.c_max);
        assert!(c1.all_loxodromic && c4.all_loxodromic);
    }

    #[test]
    fn c_stable_across_block_lengths() {
        let fam = certify_schottky_elements(pair3(2e3), 0.1, 0.1, DEFAULT_GRID).unwrap();
        let mut cs = Vec::new();
        for l in 1..=5usize {
            let words: Vec<Word> = alternating_words(2, 200, 5, 3, 17 + l as u64)
                .into_iter()
                .filter(|w| w.blocks().len() == l && l > 1)
                .take(10)
                .collect();
            if words.is_empty() {
                continue;
            }
            cs.push(empirical_c(&fam, &words).unwrap().c_max);
        }
        let (lo, hi) = cs.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &c| (a.min(c), b.max(c)));
        assert!(hi <= 3.0 * lo, "{cs:?}");
    }

    #[test]
    fn corpus_is_alternating_and_seeded() {
        let a = alternating_words(3, 50, 6, 5, 1);
        assert_eq!(a, alternating_words(3, 50, 6, 5, 1));
        for w in &a {
            assert!(w.blocks().windows(2).all(|p| p[0].0 != p[1].0));
            assert!(w.blocks().iter().all(|b| (1..=5).contains(&b.1)));
        }
    }
}
