//! Density of finitely generated additive subgroups of `R^d`: resolution-relative density
//! checks, completion of a basis by at most `2d` extra generators, and non-negative integer
//! approximation of targets inside a cone.
//!
//! Every group considered contains the lattice spanned by a designated basis, so it is
//! periodic modulo that lattice and all distance questions reduce to the torus
//! `R^d / Z B`, handled in basis coordinates.

use crate::linalg::{Mat, Vector};
use crate::lp::{cone_combination, solve, LinearProgram, LpError, LpOutcome};
use crate::sampling::{random_unit, rng};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use thiserror::Error;

/// Largest number of group elements enumerated by a density check.
pub const DEFAULT_CHECK_CAP: usize = 200_000;
/// Largest number of pigeonhole points per completion step.
pub const PIGEONHOLE_CAP: usize = 10_000;
pub const DEFAULT_GRID: usize = 64;
pub const DEFAULT_DOMAIN: f64 = 10.0;
/// Largest number of candidates examined by [`nonneg_integer_approx`].
pub const DEFAULT_SEARCH_BUDGET: usize = 400_000;
/// Half-width of the perturbation box used when every generator is a basis vector.
pub const DEFAULT_BOX: i64 = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DenseError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("generators are not certified dense at resolution {}: {:?}, estimate {:.6}", .report.eps, .report.status, .report.covering_radius_estimate)]
    NotDense { report: DensityReport },
    #[error("completed set failed its own density check (estimate {:.6})", .report.covering_radius_estimate)]
    Unverified { report: DensityReport },
    #[error("no short vector found at level {level}: the generators are exhausted")]
    InsufficientGenerators { level: usize },
    #[error("target lies outside the cone spanned by the generators")]
    OutsideCone,
    #[error("search exhausted with best distance {best:.6}")]
    Exhausted { best: f64, coeffs: Vec<u64> },
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Finite generator list with a designated basis of `R^d` inside it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSet {
    pub vectors: Vec<Vec<f64>>,
    pub basis_idx: Vec<usize>,
}

impl GeneratorSet {
    pub fn new(vectors: Vec<Vec<f64>>, basis_idx: Vec<usize>) -> Result<GeneratorSet, DenseError> {
        let d = vectors.first().map(|v| v.len()).ok_or_else(|| DenseError::Shape("no vectors".into()))?;
        if d == 0 || vectors.iter().any(|v| v.len() != d) {
            return Err(DenseError::Shape("vectors must share a positive dimension".into()));
        }
        if vectors.iter().flatten().any(|x| !x.is_finite()) {
            return Err(DenseError::Shape("non-finite entry".into()));
        }
        if basis_idx.len() != d || basis_idx.iter().any(|&i| i >= vectors.len()) {
            return Err(DenseError::Shape(format!("basis needs {d} valid indices")));
        }
        let set = GeneratorSet { vectors, basis_idx };
        let cond = set.condition_number();
        if !(cond < 1e12) {
            return Err(DenseError::Precondition(format!("designated basis is singular (condition {cond:.3e})")));
        }
        Ok(set)
    }

    /// Designates the first linearly independent vectors as the basis.
    pub fn auto(vectors: Vec<Vec<f64>>) -> Result<GeneratorSet, DenseError> {
        let d = vectors.first().map(|v| v.len()).ok_or_else(|| DenseError::Shape("no vectors".into()))?;
        let idx = independent_subset(&vectors, d);
        if idx.len() < d {
            return Err(DenseError::Precondition("vectors do not span".into()));
        }
        GeneratorSet::new(vectors, idx)
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    /// Basis vectors as columns.
    pub fn basis_matrix(&self) -> Mat {
        let d = self.dim();
        Mat::from_fn(d, d, |i, j| self.vectors[self.basis_idx[j]][i])
    }

    pub fn condition_number(&self) -> f64 {
        let s = self.basis_matrix().singular_values();
        s.max() / s.min()
    }

    /// Indices of the generators outside the basis.
    pub fn extra_idx(&self) -> Vec<usize> {
        (0..self.vectors.len()).filter(|i| !self.basis_idx.contains(i)).collect()
    }
}

/// Greedy choice of up to `d` independent vectors, in list order.
fn independent_subset(vectors: &[Vec<f64>], d: usize) -> Vec<usize> {
    let scale = vectors.iter().map(|v| crate::linalg::norm(v)).fold(0.0, f64::max);
    let mut q: Vec<Vector> = Vec::new();
    let mut idx = Vec::new();
    for (i, v) in vectors.iter().enumerate() {
        let mut r = Vector::from_column_slice(v);
        for b in &q {
            r -= b * b.dot(&r);
        }
        if r.norm() > 1e-9 * scale.max(1e-300) {
            q.push(r.normalize());
            idx.push(i);
            if idx.len() == d {
                break;
            }
        }
    }
    idx
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityStatus {
    /// Covering radius estimate at most `eps`.
    Certified,
    /// The estimate stopped improving above `eps`: the group is not `eps`-dense.
    Refused,
    /// The estimate was still improving when the enumeration cap was reached.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub eps: f64,
    pub covering_radius_estimate: f64,
    /// Number of target points.
    pub samples: usize,
    pub status: DensityStatus,
    pub domain_radius: f64,
    pub seed: u64,
    /// Distinct group elements modulo the basis lattice that were enumerated.
    pub elements: usize,
    /// Largest absolute coefficient on the extra generators.
    pub coefficient_bound: i64,
}

impl DensityReport {
    pub fn certified(&self) -> bool {
        self.status == DensityStatus::Certified
    }
}

/// Options shared by the density check and the completion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityOptions {
    pub domain_radius: f64,
    pub grid_n: usize,
    pub seed: u64,
    pub cap: usize,
}

impl Default for DensityOptions {
    fn default() -> Self {
        DensityOptions {
            domain_radius: DEFAULT_DOMAIN,
            grid_n: DEFAULT_GRID,
            seed: 0,
            cap: DEFAULT_CHECK_CAP,
        }
    }
}

fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Nearest-point queries on the torus `R^d / Z B` for points given in basis coordinates.
struct TorusIndex<'a> {
    basis: &'a Mat,
    sigma_min: f64,
    g: usize,
    cells: Vec<Vec<u32>>,
    points: &'a [Vec<f64>],
}

impl<'a> TorusIndex<'a> {
    fn new(basis: &'a Mat, points: &'a [Vec<f64>]) -> TorusIndex<'a> {
        let d = basis.nrows();
        let max_cells = 4_000_000f64;
        let g = (points.len() as f64).powf(1.0 / d as f64).floor().clamp(1.0, max_cells.powf(1.0 / d as f64).floor()) as usize;
        let mut cells = vec![Vec::new(); g.pow(d as u32)];
        for (i, p) in points.iter().enumerate() {
            cells[Self::cell_of(p, g)].push(i as u32);
        }
        TorusIndex {
            basis,
            sigma_min: basis.singular_values().min(),
            g,
            cells,
            points,
        }
    }

    fn cell_of(p: &[f64], g: usize) -> usize {
        p.iter().fold(0, |acc, &x| acc * g + ((x * g as f64) as usize).min(g - 1))
    }

    /// Euclidean distance between two torus points, minimized over lattice translates.
    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let d = a.len();
        let base: Vec<f64> = a.iter().zip(b).map(|(x, y)| {
            let t = x - y;
            t - t.round()
        }).collect();
        let mut best = f64::INFINITY;
        for code in 0..3usize.pow(d as u32) {
            let mut c = code;
            let mut shifted = Vector::zeros(d);
            for k in 0..d {
                shifted[k] = base[k] + (c % 3) as f64 - 1.0;
                c /= 3;
            }
            best = best.min((self.basis * shifted).norm());
        }
        best
    }

    fn nearest(&self, t: &[f64]) -> f64 {
        let d = t.len();
        let g = self.g as i64;
        let centre: Vec<i64> = t.iter().map(|&x| ((x * g as f64) as i64).min(g - 1)).collect();
        let mut best = f64::INFINITY;
        let mut r = 0i64;
        loop {
            if 2 * r + 1 >= g {
                for p in self.points {
                    best = best.min(self.distance(t, p));
                }
                return best;
            }
            let side = (2 * r + 1) as usize;
            for code in 0..side.pow(d as u32) {
                let mut c = code;
                let mut offs = Vec::with_capacity(d);
                for _ in 0..d {
                    offs.push((c % side) as i64 - r);
                    c /= side;
                }
                if offs.iter().map(|o| o.abs()).max().unwrap_or(0) != r {
                    continue;
                }
                let cell = centre
                    .iter()
                    .zip(&offs)
                    .fold(0usize, |acc, (&c0, &o)| acc * self.g + (c0 + o).rem_euclid(g) as usize);
                for &i in &self.cells[cell] {
                    best = best.min(self.distance(t, &self.points[i as usize]));
                }
            }
            // Points in farther rings differ by at least r/g in some basis coordinate.
            if self.sigma_min * r as f64 / g as f64 >= best {
                return best;
            }
            r += 1;
        }
    }
}

/// All integer vectors in the product of the inclusive ranges, last coordinate fastest.
fn box_points(ranges: &[(i64, i64)]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::with_capacity(ranges.len())];
    for &(lo, hi) in ranges {
        out = out
            .into_iter()
            .flat_map(|v| {
                (lo..=hi).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

/// Coefficient vectors in `[-m, m]^k` with sup-norm exactly `m`.
///
/// Grouped by the first coordinate reaching `|m|`: earlier coordinates range over
/// `[-(m-1), m-1]`, later ones over `[-m, m]`.
fn shell(k: usize, m: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for j in 0..k {
        for lead in [-m, m] {
            let ranges: Vec<(i64, i64)> = (0..k)
                .map(|i| match i.cmp(&j) {
                    std::cmp::Ordering::Less => (1 - m, m - 1),
                    std::cmp::Ordering::Equal => (lead, lead),
                    std::cmp::Ordering::Greater => (-m, m),
                })
                .collect();
            out.extend(box_points(&ranges));
        }
    }
    out
}

/// Estimates the covering radius of `<gens>` on the ball of radius `domain_radius`.
///
/// Targets are `grid_n` seeded uniform points of the ball, reduced modulo the basis lattice.
/// Group elements are enumerated by growing coefficient bounds on the extra generators until
/// `cap` elements have been produced; the estimate is the largest distance from a target to
/// the nearest enumerated element.
pub fn eps_density_check(set: &GeneratorSet, eps: f64, opts: &DensityOptions) -> Result<DensityReport, DenseError> {
    if !(eps > 0.0) {
        return Err(DenseError::Precondition(format!("eps must be positive, got {eps}")));
    }
    if !(opts.domain_radius > 0.0) || opts.grid_n == 0 || opts.cap == 0 {
        return Err(DenseError::Precondition("domain radius, grid and cap must be positive".into()));
    }
    let d = set.dim();
    let basis = set.basis_matrix();
    let inv = basis.clone().try_inverse().ok_or_else(|| DenseError::Precondition("singular basis".into()))?;
    let coords = |v: &[f64]| -> Vec<f64> { (&inv * Vector::from_column_slice(v)).iter().copied().collect() };
    let extras: Vec<Vec<f64>> = set.extra_idx().iter().map(|&i| coords(&set.vectors[i])).collect();

    let mut r = rng(opts.seed);
    let targets: Vec<Vec<f64>> = (0..opts.grid_n)
        .map(|_| {
            let dir = random_unit(&mut r, d);
            let rad = opts.domain_radius * r.gen::<f64>().powf(1.0 / d as f64);
            coords((dir * rad).as_slice()).into_iter().map(frac).collect()
        })
        .collect();

    // Distinct elements modulo the lattice, keyed at 1e-10 resolution.
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut push = |p: Vec<f64>, points: &mut Vec<Vec<f64>>| {
        let key: Vec<i64> = p.iter().map(|x| ((x * 1e10).round() as i64).rem_euclid(10_000_000_000)).collect();
        if seen.insert(key) {
            points.push(p);
        }
    };
    push(vec![0.0; d], &mut points);
    let estimate = |points: &[Vec<f64>]| -> f64 {
        let index = TorusIndex::new(&basis, points);
        targets.iter().map(|t| index.nearest(t)).fold(0.0, f64::max)
    };

    let k = extras.len();
    let stages = [opts.cap / 16, opts.cap / 4, opts.cap];
    let mut estimates: Vec<f64> = Vec::new();
    let mut enumerated = 1usize;
    let mut m = 0i64;
    let mut stage = 0usize;
    if k > 0 {
        'grow: loop {
            m += 1;
            for c in shell(k, m) {
                let p: Vec<f64> = (0..d)
                    .map(|i| frac(c.iter().zip(&extras).map(|(ci, e)| *ci as f64 * e[i]).sum()))
                    .collect();
                push(p, &mut points);
                enumerated += 1;
                while stage < stages.len() && enumerated >= stages[stage] {
                    estimates.push(estimate(&points));
                    stage += 1;
                }
                if enumerated >= opts.cap {
                    break 'grow;
                }
            }
        }
    }
    while estimates.len() < 2 {
        estimates.push(estimate(&points));
    }
    let last = estimates[estimates.len() - 1];
    let prev = estimates[estimates.len() - 2];
    let status = if last <= eps {
        DensityStatus::Certified
    } else if k == 0 || last >= prev - 1e-12 {
        DensityStatus::Refused
    } else {
        DensityStatus::Inconclusive
    };
    Ok(DensityReport {
        eps,
        covering_radius_estimate: last,
        samples: targets.len(),
        status,
        domain_radius: opts.domain_radius,
        seed: opts.seed,
        elements: points.len(),
        coefficient_bound: m,
    })
}

/// Result of [`dense_completion`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Completion {
    /// Indices into the generator list of the chosen extra generators, ascending.
    pub f_idx: Vec<usize>,
    pub f: Vec<Vec<f64>>,
    /// The short group elements found, one per level.
    pub short_vectors: Vec<Vec<f64>>,
    /// Lengths of their components orthogonal to the earlier ones.
    pub residual_lengths: Vec<f64>,
    /// Density check of the basis together with `f`.
    pub report: DensityReport,
}

/// Pigeonhole points `sum a_i f_i` for one or two generators, in increasing total degree.
fn pigeonhole_coeffs(arity: usize, count: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::with_capacity(count);
    let mut s = 0i64;
    while out.len() < count {
        if arity == 1 {
            out.push(vec![s]);
        } else {
            for a in 0..=s {
                if out.len() == count {
                    break;
                }
                out.push(vec![a, s - a]);
            }
        }
        s += 1;
    }
    out
}

/// Completes the designated basis by at most `2d` generators so that the result is
/// `eps`-dense.
///
/// One short vector is produced per level: projections to the complement of the earlier
/// short vectors are reduced modulo a projected sub-basis, the quotient torus is cut into
/// `N^m` cells with `N > 2 sqrt(d) |B| / eps`, and two pigeonhole points in one cell give a
/// short group element. Pigeonhole points are combinations of two unused generators, or
/// multiples of one generator when fewer remain.
pub fn dense_completion(set: &GeneratorSet, eps: f64, opts: &DensityOptions) -> Result<Completion, DenseError> {
    let pre = eps_density_check(set, eps / 4.0, opts)?;
    if !pre.certified() {
        return Err(DenseError::NotDense { report: pre });
    }
    let d = set.dim();
    let extra = set.extra_idx();
    let mut shorts: Vec<Vector> = Vec::new();
    let mut ortho: Vec<Vector> = Vec::new();
    let mut lengths = Vec::new();
    let mut chosen: Vec<usize> = Vec::new();
    for level in 0..d {
        let m = d - level;
        // Orthonormal basis of the complement of the short vectors so far.
        let mut q: Vec<Vector> = Vec::new();
        for i in 0..d {
            let mut e = Vector::zeros(d);
            e[i] = 1.0;
            for b in ortho.iter().chain(&q) {
                e -= b * b.dot(&e);
            }
            if e.norm() > 1e-6 {
                q.push(e.normalize());
            }
        }
        let qm = Mat::from_columns(&q[..m]);
        let proj = |v: &[f64]| -> Vector { qm.transpose() * Vector::from_column_slice(v) };
        let projected: Vec<Vec<f64>> = set.basis_idx.iter().map(|&i| proj(&set.vectors[i]).iter().copied().collect()).collect();
        let sub: Vec<usize> = independent_subset(&projected, m).iter().map(|&k| set.basis_idx[k]).collect();
        let bj = Mat::from_fn(m, m, |i, j| proj(&set.vectors[sub[j]])[i]);
        let Some(bj_inv) = bj.clone().try_inverse() else {
            return Err(DenseError::InsufficientGenerators { level });
        };
        let norm_b = bj.singular_values().max();
        let n_cells = (2.0 * (d as f64).sqrt() * norm_b / eps).floor() as usize + 1;
        let needed = n_cells.checked_pow(m as u32).map_or(PIGEONHOLE_CAP, |c| (c + 1).min(PIGEONHOLE_CAP));

        let unused: Vec<usize> = extra.iter().copied().filter(|i| !chosen.contains(i)).collect();
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for (a, &i) in unused.iter().enumerate() {
            for &j in &unused[a + 1..] {
                groups.push(vec![i, j]);
            }
        }
        groups.extend(chosen.iter().chain(&unused).map(|&i| vec![i]));

        let mut found = None;
        'groups: for group in &groups {
            let gc: Vec<Vector> = group.iter().map(|&i| &bj_inv * proj(&set.vectors[i])).collect();
            let mut cells: HashMap<Vec<usize>, Vec<(Vec<i64>, Vector)>> = HashMap::new();
            for coeff in pigeonhole_coeffs(group.len(), needed) {
                let c: Vector = coeff.iter().zip(&gc).fold(Vector::zeros(m), |acc, (&a, v)| acc + v * a as f64);
                let key: Vec<usize> = c.iter().map(|&x| ((frac(x) * n_cells as f64) as usize).min(n_cells - 1)).collect();
                let entry = cells.entry(key).or_default();
                for (other, oc) in entry.iter() {
                    let delta: Vec<i64> = coeff.iter().zip(other).map(|(a, b)| a - b).collect();
                    let diff = &c - oc;
                    let lattice: Vec<f64> = diff.iter().map(|x| x.round()).collect();
                    let mut u = Vector::zeros(d);
                    for (&a, &i) in delta.iter().zip(group) {
                        u += Vector::from_column_slice(&set.vectors[i]) * a as f64;
                    }
                    for (&n, &b) in lattice.iter().zip(&sub) {
                        u -= Vector::from_column_slice(&set.vectors[b]) * n;
                    }
                    let mut perp = u.clone();
                    for b in &ortho {
                        perp -= b * b.dot(&perp);
                    }
                    if perp.norm() > 1e-9 * (1.0 + u.norm()) {
                        found = Some((group.clone(), u, perp));
                        break 'groups;
                    }
                }
                entry.push((coeff, c));
            }
        }
        let Some((group, u, perp)) = found else {
            return Err(DenseError::InsufficientGenerators { level });
        };
        for i in group {
            if !chosen.contains(&i) {
                chosen.push(i);
            }
        }
        lengths.push(perp.norm());
        ortho.push(perp.normalize());
        shorts.push(u);
    }
    chosen.sort_unstable();
    let mut vectors: Vec<Vec<f64>> = set.basis_idx.iter().map(|&i| set.vectors[i].clone()).collect();
    vectors.extend(chosen.iter().map(|&i| set.vectors[i].clone()));
    let completed = GeneratorSet::new(vectors, (0..d).collect())?;
    let report = eps_density_check(&completed, eps, opts)?;
    if !report.certified() {
        return Err(DenseError::Unverified { report });
    }
    Ok(Completion {
        f: chosen.iter().map(|&i| set.vectors[i].clone()).collect(),
        f_idx: chosen,
        short_vectors: shorts.iter().map(|u| u.iter().copied().collect()).collect(),
        residual_lengths: lengths,
        report,
    })
}

/// Search settings for [`nonneg_integer_approx`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxOptions {
    /// Perturbation half-width around the rounded relaxation on the basis coordinates.
    pub box_bound: i64,
    /// Largest number of extra-coefficient vectors enumerated.
    pub budget: usize,
}

impl Default for ApproxOptions {
    fn default() -> Self {
        ApproxOptions {
            box_bound: DEFAULT_BOX,
            budget: DEFAULT_SEARCH_BUDGET,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Approximation {
    pub coeffs: Vec<u64>,
    pub error: f64,
    pub candidates: usize,
}

/// Largest value of `x_i` over `{x >= 0 : sum x_j ls_j = target}`.
fn max_coefficient(ls: &[Vec<f64>], target: &[f64], i: usize) -> Result<f64, DenseError> {
    let dim = target.len();
    let mut c = vec![0.0; ls.len()];
    c[i] = -1.0;
    let lp = LinearProgram {
        c,
        a_eq: (0..dim).map(|k| ls.iter().map(|l| l[k]).collect()).collect(),
        b_eq: target.to_vec(),
        ..Default::default()
    };
    Ok(match solve(&lp)? {
        LpOutcome::Optimal { x, .. } => x[i],
        LpOutcome::Unbounded => f64::INFINITY,
        LpOutcome::Infeasible => return Err(DenseError::OutsideCone),
    })
}

/// Finds `n` in `N^l` with `|sum n_i ls_i - target| <= eta`.
///
/// Generators are split into a basis of their span and extras. Extra coefficients are
/// enumerated in lexicographic order inside the box allowed by the cone constraints, clamped
/// to a cube when that box exceeds the budget; for each,
/// the basis coefficients are the roundings of the exact solution, perturbed by at most
/// `box_bound`. The candidate of smallest error wins, ties going to the lexicographically
/// smallest coefficient vector.
pub fn nonneg_integer_approx(ls: &[Vec<f64>], target: &[f64], eta: f64, opts: &ApproxOptions) -> Result<Approximation, DenseError> {
    let dim = target.len();
    if ls.is_empty() || ls.iter().any(|l| l.len() != dim) {
        return Err(DenseError::Shape("generators and target must share a dimension".into()));
    }
    if !(eta > 0.0) {
        return Err(DenseError::Precondition(format!("eta must be positive, got {eta}")));
    }
    if cone_combination(ls, target, 0.0)?.is_none() {
        return Err(DenseError::OutsideCone);
    }
    let basis = independent_subset(ls, dim);
    let extras: Vec<usize> = (0..ls.len()).filter(|i| !basis.contains(i)).collect();
    let r = basis.len();
    let bmat = Mat::from_fn(dim, r, |i, j| ls[basis[j]][i]);
    let pinv = bmat.clone().pseudo_inverse(1e-12).map_err(|e| DenseError::Precondition(e.to_string()))?;

    // Bounds beyond the budget are clamped to a cube of `budget` points.
    let cube = (opts.budget as f64).powf(1.0 / extras.len().max(1) as f64).floor().max(1.0) as u64 - 1;
    let mut bounds = Vec::with_capacity(extras.len());
    for &i in &extras {
        let b = max_coefficient(ls, target, i)?;
        bounds.push(if b.is_finite() { b.floor().max(0.0) as u64 } else { u64::MAX });
    }
    let fits = |bounds: &[u64]| bounds.iter().try_fold(1usize, |acc, &b| acc.checked_mul(usize::try_from(b).ok()?.checked_add(1)?)).filter(|&t| t <= opts.budget);
    if fits(&bounds).is_none() {
        for b in &mut bounds {
            *b = (*b).min(cube);
        }
    }
    let total = fits(&bounds).ok_or_else(|| DenseError::Precondition(format!("search budget {} admits no candidates", opts.budget)))?;

    let side = (2 * opts.box_bound + 1) as usize;
    let perturbations = side.pow(r as u32);
    let mut best: Option<(f64, Vec<u64>)> = None;
    let mut candidates = 0usize;
    let mut m = vec![0u64; extras.len()];
    let mut v = vec![0i64; r];
    let mut diff = vec![0.0; dim];
    for code in 0..total {
        let mut c = code;
        for (slot, &b) in m.iter_mut().zip(&bounds).rev() {
            *slot = (c % (b as usize + 1)) as u64;
            c /= b as usize + 1;
        }
        let mut rest = Vector::from_column_slice(target);
        for (&mi, &i) in m.iter().zip(&extras) {
            rest -= Vector::from_column_slice(&ls[i]) * mi as f64;
        }
        let x = &pinv * &rest;
        'perturb: for p in 0..perturbations {
            let mut pc = p;
            for (k, vk) in v.iter_mut().enumerate() {
                let off = (pc % side) as i64 - opts.box_bound;
                pc /= side;
                *vk = x[k].round() as i64 + off;
                if *vk < 0 {
                    continue 'perturb;
                }
            }
            candidates += 1;
            diff.copy_from_slice(rest.as_slice());
            for (&vk, &bi) in v.iter().zip(&basis) {
                for (dk, lk) in diff.iter_mut().zip(&ls[bi]) {
                    *dk -= vk as f64 * lk;
                }
            }
            let err = diff.iter().map(|x| x * x).sum::<f64>().sqrt();
            if best.as_ref().is_some_and(|(e, _)| err > *e + 1e-15) {
                continue;
            }
            let mut n = vec![0u64; ls.len()];
            for (&vk, &bi) in v.iter().zip(&basis) {
                n[bi] = vk as u64;
            }
            for (&mi, &i) in m.iter().zip(&extras) {
                n[i] = mi;
            }
            let better = match &best {
                None => true,
                Some((e, bn)) => err < *e - 1e-15 || n < *bn,
            };
            if better {
                best = Some((err, n));
            }
        }
    }
    let (error, coeffs) = best.ok_or(DenseError::Exhausted {
        best: f64::INFINITY,
        coeffs: Vec::new(),
    })?;
    if error > eta {
        return Err(DenseError::Exhausted { best: error, coeffs });
    }
    Ok(Approximation { coeffs, error, candidates })
}

/// `|sum n_i ls_i - target|`.
pub fn residual(ls: &[Vec<f64>], n: &[u64], target: &[f64]) -> f64 {
    let mut s: Vec<f64> = target.iter().map(|t| -t).collect();
    for (l, &ni) in ls.iter().zip(n) {
        for (sk, lk) in s.iter_mut().zip(l) {
            *sk += ni as f64 * lk;
        }
    }
    crate::linalg::norm(&s)
}
