//! Explicit mixing witnesses for the Weyl chamber flow: semigroup elements
//! `gamma_t = h^n g_l^{n_l} ... g_1^{n_1} h^n` with Jordan projection within `eta` of
//! `x + t theta` and fixed flags near those of `h`, and the resulting overlaps
//! `gamma_t U ∩ phi_t(V)` in Hopf coordinates.

use crate::dense_subgroup::{dense_completion, nonneg_integer_approx, ApproxOptions, Completion, DenseError, DensityOptions, GeneratorSet};
use crate::flags_hopf::{FlagPair, HopfBox, HopfPoint};
use crate::group_core::CartanVector;
use crate::limit_cone::{contains_report, sample_cone, ConeError, ConeKind, ConeModel};
use crate::linalg::{subsets, Mat, Vector};
use crate::lp::{cone_combination, LpError};
use crate::proximality::DEFAULT_GRID;
use crate::schottky::{alternating_words, certify_schottky, empirical_c, nu_from_flags, power_until_schottky, SchottkyError, SchottkyFamily};
use crate::word::{Alphabet, Word, WordError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MixError {
    #[error("theta is not interior to the sampled cone (margin {margin:.6})")]
    Direction { margin: f64 },
    #[error("search failed: {0}")]
    Search(String),
    #[error("target at t = {t} is not deep in the cone; smallest feasible t is {t_min}")]
    NeedsLargerT { t: f64, t_min: f64 },
    #[error("no feasible t up to {t_max}: the direction is outside the cone")]
    NoFeasibleT { t_max: f64 },
    #[error("integer search exhausted at t = {t}, best lambda error {best:.6}")]
    Budget { t: f64, best: f64 },
    #[error("witness failed verification: lambda error {lambda_err:.6}, flag error {flag_err:.6}")]
    Unverified { lambda_err: f64, flag_err: f64 },
    #[error("overlap point misses a box: {0}")]
    Overlap(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Schottky(#[from] SchottkyError),
    #[error(transparent)]
    Cone(#[from] ConeError),
    #[error(transparent)]
    Dense(#[from] DenseError),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Orthonormal basis of the trace-zero subspace of `R^d`, as columns.
pub fn cartan_basis(d: usize) -> Mat {
    let mut cols: Vec<Vector> = Vec::with_capacity(d - 1);
    for k in 0..d - 1 {
        let mut v = Vector::zeros(d);
        v[k] = 1.0;
        v[k + 1] = -1.0;
        for c in &cols {
            v -= c * c.dot(&v);
        }
        cols.push(v.normalize());
    }
    Mat::from_columns(&cols)
}

fn to_coords(basis: &Mat, v: &CartanVector) -> Vec<f64> {
    (basis.transpose() * Vector::from_column_slice(v.coords())).iter().copied().collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionOptions {
    pub r: f64,
    pub eps: f64,
    pub grid_n: usize,
    /// Required facet margin of `theta` in both the sampled cone and the selected simplex.
    pub margin: f64,
    pub max_power: u64,
}

impl Default for DirectionOptions {
    fn default() -> Self {
        DirectionOptions {
            r: crate::bundled::R,
            eps: crate::bundled::EPS,
            grid_n: DEFAULT_GRID,
            margin: 1e-2,
            max_power: 8,
        }
    }
}

/// `d - 1` Schottky generators whose Jordan rays span a simplicial cone around `theta`.
#[derive(Clone, Debug)]
pub struct DirectionFamily {
    pub family: SchottkyFamily,
    /// The selected words before powering.
    pub words: Vec<Word>,
    pub power: u64,
    pub theta: CartanVector,
    pub cone_margin: f64,
}

/// Chooses `d - 1` loxodromic words of length at most `depth` maximizing the facet margin of
/// `theta` in the cone of their Jordan rays, then powers them until they certify as strong
/// Schottky. Ties keep the earlier (shorter) words.
pub fn build_direction_family(base: &Alphabet, theta: &CartanVector, depth: usize, opts: &DirectionOptions) -> Result<DirectionFamily, MixError> {
    let d = base.dim();
    if theta.dim() != d {
        return Err(MixError::Precondition(format!("theta has dimension {}, expected {d}", theta.dim())));
    }
    let theta = theta.normalized().ok_or_else(|| MixError::Precondition("theta is zero".into()))?;
    let cone = sample_cone(base, depth, ConeKind::Jordan)?;
    let report = contains_report(&cone, &theta, opts.margin)?;
    if !report.inside {
        return Err(MixError::Direction { margin: report.min_slack });
    }
    let mut candidates: Vec<(Word, CartanVector)> = Vec::new();
    for len in 1..=depth {
        for w in Word::all_of_length(base.len(), len) {
            let lambda = base.jordan(&w)?;
            if !lambda.strictly_regular(1e-9) {
                continue;
            }
            let ray = lambda.normalized().expect("regular vectors are nonzero");
            if candidates.iter().all(|(_, r)| r.distance(&ray) > 1e-9) {
                candidates.push((w, ray));
            }
        }
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for subset in subsets(candidates.len(), d - 1) {
        let rays: Vec<CartanVector> = subset.iter().map(|&i| candidates[i].1.clone()).collect();
        let model = ConeModel::from_rays(rays, depth, ConeKind::Jordan)?;
        if model.dimension != d - 1 {
            continue;
        }
        let margin = model.facet_slacks(&theta).into_iter().fold(f64::INFINITY, f64::min);
        if best.as_ref().map_or(true, |(m, _)| margin > m + 1e-12) {
            best = Some((margin, subset));
        }
    }
    let Some((cone_margin, subset)) = best.filter(|(m, _)| *m >= opts.margin) else {
        return Err(MixError::Search(format!("no simplex of rays contains theta with margin {}", opts.margin)));
    };
    let words: Vec<Word> = subset.iter().map(|&i| candidates[i].0.clone()).collect();
    let (power, family) = power_until_schottky(base, &words, opts.r, opts.eps, opts.grid_n, opts.max_power)?;
    Ok(DirectionFamily {
        family,
        words,
        power,
        theta,
        cone_margin,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessOptions {
    pub eta: f64,
    /// Largest power `n` tried for the bracketing and direction generators.
    pub max_power: u64,
    /// Longest word considered for the density pool.
    pub pool_depth: usize,
    /// Number of pool words kept.
    pub pool_size: usize,
    pub corpus_size: usize,
    pub corpus_seed: u64,
    /// Every LP coefficient must reach this value for `t` to count as feasible.
    pub depth_coeff: f64,
    /// Feasibility search gives up beyond this `t`.
    pub t_max: f64,
    pub density: DensityOptions,
    pub approx: ApproxOptions,
}

impl Default for WitnessOptions {
    fn default() -> Self {
        WitnessOptions {
            eta: crate::bundled::ETA,
            max_power: 6,
            pool_depth: 3,
            pool_size: 5,
            corpus_size: 50,
            corpus_seed: 0,
            depth_coeff: 8.0,
            t_max: 1e7,
            density: DensityOptions {
                cap: 1_000_000,
                ..DensityOptions::default()
            },
            approx: ApproxOptions::default(),
        }
    }
}

/// Everything about a witness that does not depend on `(x, t)`.
#[derive(Clone, Debug)]
pub struct WitnessPlan {
    /// Letter 0 is `h^n`; letters `1..=l` are the powered direction and completion words.
    pub family: SchottkyFamily,
    pub n: u64,
    pub c_empirical: f64,
    pub theta: CartanVector,
    pub eta: f64,
    /// Jordan projections of letters `1..=l` in orthonormal Cartan coordinates.
    pub ls: Vec<Vec<f64>>,
    /// `nu + 2 lambda(h^n) + sum lambda(g_i)`, the part of the estimate fixed by `n_i >= 1`.
    pub offset: CartanVector,
    pub completion: Completion,
    basis: Mat,
    depth_coeff: f64,
    t_max: f64,
    approx: ApproxOptions,
}

fn pool_words(base: &Alphabet, exclude: &[Word], depth: usize) -> Result<Vec<Word>, MixError> {
    let mut rays: Vec<CartanVector> = Vec::new();
    for w in exclude {
        if let Some(r) = base.jordan(w)?.normalized() {
            rays.push(r);
        }
    }
    let mut out = Vec::new();
    for len in 1..=depth {
        for w in Word::all_of_length(base.len(), len) {
            if exclude.contains(&w) {
                continue;
            }
            let lambda = base.jordan(&w)?;
            if !lambda.strictly_regular(1e-9) {
                continue;
            }
            let ray = lambda.normalized().expect("regular vectors are nonzero");
            if rays.iter().all(|r| r.distance(&ray) > 1e-6) {
                rays.push(ray);
                out.push(w);
            }
        }
    }
    Ok(out)
}

impl WitnessPlan {
    /// Chooses `n`, the density completion and the assembled family for the bracketing word `h`.
    ///
    /// `n` is the least power for which `(3(d-1) + 2) C <= eta / 2`, with `C` measured on a
    /// seeded corpus over the family of `h^n`, the direction generators and the pool words.
    pub fn prepare(df: &DirectionFamily, h: &Word, opts: &WitnessOptions) -> Result<WitnessPlan, MixError> {
        let base = &df.family.base;
        let d = base.dim();
        if !(opts.eta > 0.0) {
            return Err(MixError::Precondition(format!("eta must be positive, got {}", opts.eta)));
        }
        if !base.jordan(h)?.strictly_regular(1e-9) {
            return Err(MixError::Precondition(format!("h = {h} is not loxodromic")));
        }
        let (r, eps, grid_n) = (df.family.r, df.family.eps, df.family.grid_n);
        let mut exclude = df.family.gens.clone();
        exclude.push(h.clone());
        let pool = pool_words(base, &exclude, opts.pool_depth)?;
        let blocks = 3 * (d - 1) + 2;

        let mut chosen: Option<(u64, SchottkyFamily, f64, usize)> = None;
        let mut last_c = f64::INFINITY;
        for n in 1..=opts.max_power {
            let mut words: Vec<Word> = vec![h.pow(n)];
            words.extend(df.family.gens.iter().map(|w| w.pow(n)));
            let core = words.len();
            match certify_schottky(base, words.clone(), r, eps, grid_n) {
                Ok(_) => {}
                Err(SchottkyError::Generator { .. }) => continue,
                Err(e) => return Err(e.into()),
            }
            for p in &pool {
                if words.len() - core == opts.pool_size {
                    break;
                }
                let mut trial = words.clone();
                trial.push(p.pow(n));
                if certify_schottky(base, trial.clone(), r, eps, grid_n).is_ok() {
                    words = trial;
                }
            }
            let family = certify_schottky(base, words, r, eps, grid_n)?;
            let corpus = alternating_words(family.len(), opts.corpus_size, blocks, 3, opts.corpus_seed);
            let c = empirical_c(&family, &corpus)?.c_max;
            last_c = c;
            if blocks as f64 * c <= opts.eta / 2.0 {
                chosen = Some((n, family, c, core));
                break;
            }
        }
        let Some((n, pooled, c_empirical, core)) = chosen else {
            return Err(MixError::Search(format!(
                "no power up to {} brings the product estimate below eta / 2 (last C = {last_c:.3e})",
                opts.max_power
            )));
        };

        let basis = cartan_basis(d);
        let vectors: Vec<Vec<f64>> = pooled.lambdas[1..].iter().map(|l| to_coords(&basis, l)).collect();
        let set = GeneratorSet::new(vectors, (0..d - 1).collect())?;
        let completion = dense_completion(&set, opts.eta / 2.0, &opts.density)?;

        let mut words: Vec<Word> = pooled.gens[..core].to_vec();
        words.extend(completion.f_idx.iter().map(|&i| pooled.gens[i + 1].clone()));
        let family = certify_schottky(base, words, r, eps, grid_n)?;
        let l = family.len() - 1;
        let mut pairs = vec![family.flags[0].clone()];
        pairs.extend(family.flags[1..].iter().cloned());
        pairs.push(family.flags[0].clone());
        let mut offset = nu_from_flags(&pairs)?.vec;
        offset += &(&family.lambdas[0] * 2.0);
        for i in 1..=l {
            offset += &family.lambdas[i];
        }
        let ls = family.lambdas[1..].iter().map(|v| to_coords(&basis, v)).collect();
        Ok(WitnessPlan {
            family,
            n,
            c_empirical,
            theta: df.theta.clone(),
            eta: opts.eta,
            ls,
            offset,
            completion,
            basis,
            depth_coeff: opts.depth_coeff,
            t_max: opts.t_max,
            approx: opts.approx,
        })
    }

    /// Number of generators `l` between the two `h` blocks.
    pub fn len(&self) -> usize {
        self.ls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ls.is_empty()
    }

    fn target(&self, x: &CartanVector, t: f64) -> Vec<f64> {
        let goal = x + &(&self.theta * t);
        to_coords(&self.basis, &(&goal - &self.offset))
    }

    /// The target at `t` admits a cone combination with every coefficient at least
    /// `depth_coeff`.
    pub fn feasible(&self, x: &CartanVector, t: f64) -> Result<bool, MixError> {
        Ok(cone_combination(&self.ls, &self.target(x, t), self.depth_coeff)?.is_some())
    }

    /// Least feasible `t >= 0`, up to `1e-6` relative, by doubling then bisection.
    pub fn t_min(&self, x: &CartanVector) -> Result<f64, MixError> {
        if self.feasible(x, 0.0)? {
            return Ok(0.0);
        }
        let mut hi = 1.0;
        while !self.feasible(x, hi)? {
            hi *= 2.0;
            if hi > self.t_max {
                return Err(MixError::NoFeasibleT { t_max: self.t_max });
            }
        }
        let mut lo = hi / 2.0;
        if hi == 1.0 {
            lo = 0.0;
        }
        while hi - lo > 1e-6 * hi.max(1.0) {
            let mid = 0.5 * (lo + hi);
            if self.feasible(x, mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// Word `h g_l^{n_l} ... g_1^{n_1} h` in the family letters.
    pub fn assemble(&self, n: &[u64]) -> Word {
        let mut blocks = vec![(0usize, 1u64)];
        blocks.extend((1..=n.len()).rev().map(|i| (i, n[i - 1])));
        blocks.push((0, 1));
        Word::new(blocks)
    }

    /// Builds and verifies the witness for `(x, t)`.
    ///
    /// `lambda_err` is recomputed from the assembled product, never from the estimate; the
    /// fixed flags are compared with those of `h^n`.
    pub fn witness(&self, x: &CartanVector, t: f64) -> Result<MixingWitness, MixError> {
        if !self.feasible(x, t)? {
            let t_min = self.t_min(x)?;
            return Err(MixError::NeedsLargerT { t, t_min });
        }
        let target = self.target(x, t);
        let approx = match nonneg_integer_approx(&self.ls, &target, self.eta / 2.0, &self.approx) {
            Ok(a) => a,
            Err(DenseError::Exhausted { best, .. }) => return Err(MixError::Budget { t, best }),
            Err(e) => return Err(e.into()),
        };
        let n: Vec<u64> = approx.coeffs.iter().map(|m| m + 1).collect();
        let word = self.assemble(&n);
        let expanded = self.family.expand(&word);
        let base = &self.family.base;
        let lambda = base.jordan(&expanded)?;
        let goal = x + &(&self.theta * t);
        let lambda_err = lambda.distance(&goal);
        let mut estimate = self.offset.clone();
        for (i, &m) in approx.coeffs.iter().enumerate() {
            estimate += &(&self.family.lambdas[i + 1] * m as f64);
        }
        let flags = base.fixed_flags(&expanded)?;
        let flag_err = flags.distance(&self.family.flags[0]);
        if !(lambda_err <= self.eta && flag_err <= self.family.eps) {
            return Err(MixError::Unverified { lambda_err, flag_err });
        }
        Ok(MixingWitness {
            t,
            x: x.coords().to_vec(),
            theta: self.theta.coords().to_vec(),
            word: word.to_string(),
            coeffs: n,
            lambda: lambda.coords().to_vec(),
            lambda_err,
            flag_err,
            approx_error: approx.error,
            estimate_residual: lambda.distance(&estimate),
            flags,
        })
    }
}

/// A verified `gamma_t`; `word` uses the plan's family letters, 1-based with `h^n` first.
#[derive(Clone, Debug, Serialize)]
pub struct MixingWitness {
    pub t: f64,
    pub x: Vec<f64>,
    pub theta: Vec<f64>,
    pub word: String,
    pub coeffs: Vec<u64>,
    pub lambda: Vec<f64>,
    pub lambda_err: f64,
    pub flag_err: f64,
    /// `|sum m_i lambda(g_i) - target|` achieved by the integer search.
    pub approx_error: f64,
    /// `|lambda(gamma_t) - estimate|`, the product-estimate error actually incurred.
    pub estimate_residual: f64,
    #[serde(skip)]
    pub flags: FlagPair,
}

/// [`WitnessPlan::prepare`] followed by one witness.
pub fn make_witness(df: &DirectionFamily, h: &Word, x: &CartanVector, t: f64, opts: &WitnessOptions) -> Result<MixingWitness, MixError> {
    WitnessPlan::prepare(df, h, opts)?.witness(x, t)
}

/// One grid entry of [`mixing_overlap_demo`].
#[derive(Clone, Debug)]
pub struct Overlap {
    pub witness: MixingWitness,
    /// A point of `U`.
    pub preimage: HopfPoint,
    /// `gamma_t` applied to the preimage; it lies in `phi_t(V)`.
    pub point: HopfPoint,
    /// Distance of `point.apart - t theta` from the centre of `V`'s Cartan ball.
    pub apart_err: f64,
}

/// For each `t`, a witness `gamma_t` and a Hopf point in `gamma_t U ∩ phi_t(V)`.
///
/// With `x = v - u` (the Cartan centres), the preimage is `(gamma_t+, gamma_t-; u)` and its
/// image is `(gamma_t+, gamma_t-; u + sigma(gamma_t, gamma_t+))`.
pub fn mixing_overlap_demo(plan: &WitnessPlan, u_box: &HopfBox, v_box: &HopfBox, t_grid: &[f64]) -> Vec<(f64, Result<Overlap, MixError>)> {
    let x = &v_box.apart_center - &u_box.apart_center;
    t_grid.iter().map(|&t| (t, overlap_at(plan, u_box, v_box, &x, t))).collect()
}

fn overlap_at(plan: &WitnessPlan, u_box: &HopfBox, v_box: &HopfBox, x: &CartanVector, t: f64) -> Result<Overlap, MixError> {
    let witness = plan.witness(x, t)?;
    let preimage = HopfPoint {
        pair: witness.flags.clone(),
        apart: u_box.apart_center.clone(),
    };
    if !u_box.contains(&preimage) {
        return Err(MixError::Overlap(format!(
            "fixed flags at distance {:.6} from the centre of U",
            u_box.flags.center.distance(&preimage.pair)
        )));
    }
    let base = &plan.family.base;
    let word = Word::parse(&witness.word, plan.family.len())?;
    let (plus, sigma) = base.act(&plan.family.expand(&word), &preimage.pair.plus, false)?;
    let point = HopfPoint {
        pair: FlagPair::new(plus, preimage.pair.minus.clone()),
        apart: &preimage.apart + &sigma,
    };
    let shifted = &point.apart - &(&plan.theta * t);
    let apart_err = shifted.distance(&v_box.apart_center);
    if !v_box.flags.contains(&point.pair) {
        return Err(MixError::Overlap(format!(
            "image flags at distance {:.6} from the centre of V",
            v_box.flags.center.distance(&point.pair)
        )));
    }
    if !(apart_err < v_box.apart_radius) {
        return Err(MixError::Overlap(format!("Cartan coordinate off by {apart_err:.6}")));
    }
    Ok(Overlap {
        witness,
        preimage,
        point,
        apart_err,
    })
}
