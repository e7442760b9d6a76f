//! Dense two-phase simplex for small linear programs.
//!
//! Problems have the form: minimize `c.x` subject to `A_ub x <= b_ub`, `A_eq x = b_eq`,
//! `x >= 0`. Pivoting uses Bland's rule, so the method terminates on degenerate problems.

use thiserror::Error;

/// Pivot and feasibility tolerance, relative to the problem scale.
const TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("row {row} has {found} coefficients, expected {expected}")]
    Shape { row: usize, found: usize, expected: usize },
    #[error("non-finite coefficient")]
    NonFinite,
    #[error("pivot limit reached")]
    IterationLimit,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinearProgram {
    pub c: Vec<f64>,
    pub a_ub: Vec<Vec<f64>>,
    pub b_ub: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn solution(&self) -> Option<&[f64]> {
        match self {
            LpOutcome::Optimal { x, .. } => Some(x),
            _ => None,
        }
    }
}

struct Tableau {
    /// Constraint rows followed by the objective row; the last column is the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    tol: f64,
}

impl Tableau {
    fn rows(&self) -> usize {
        self.basis.len()
    }

    fn cols(&self) -> usize {
        self.t[0].len() - 1
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[row][col];
        for v in self.t[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[row].clone();
        for (i, r) in self.t.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col];
            if f != 0.0 {
                for (v, pv) in r.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Runs simplex iterations on the objective row over the allowed columns.
    fn optimize(&mut self, allowed: usize) -> Result<bool, LpError> {
        let m = self.rows();
        for _ in 0..50_000 {
            let obj = &self.t[m];
            let Some(col) = (0..allowed).find(|&j| obj[j] < -self.tol) else {
                return Ok(true);
            };
            let rhs = self.cols();
            let mut best: Option<(usize, f64)> = None;
            for i in 0..m {
                let a = self.t[i][col];
                if a > self.tol {
                    let ratio = self.t[i][rhs] / a;
                    match best {
                        Some((bi, br)) if ratio > br + self.tol || (ratio >= br - self.tol && self.basis[i] > self.basis[bi]) => {}
                        _ => best = Some((i, ratio)),
                    }
                }
            }
            match best {
                Some((row, _)) => self.pivot(row, col),
                None => return Ok(false),
            }
        }
        Err(LpError::IterationLimit)
    }
}

fn check_rows(rows: &[Vec<f64>], n: usize) -> Result<(), LpError> {
    for (row, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(LpError::Shape {
                row,
                found: r.len(),
                expected: n,
            });
        }
        if r.iter().any(|x| !x.is_finite()) {
            return Err(LpError::NonFinite);
        }
    }
    Ok(())
}

pub fn solve(lp: &LinearProgram) -> Result<LpOutcome, LpError> {
    let n = lp.c.len();
    check_rows(&lp.a_ub, n)?;
    check_rows(&lp.a_eq, n)?;
    if lp.a_ub.len() != lp.b_ub.len() || lp.a_eq.len() != lp.b_eq.len() {
        return Err(LpError::Shape {
            row: lp.a_ub.len().min(lp.a_eq.len()),
            found: lp.b_ub.len() + lp.b_eq.len(),
            expected: lp.a_ub.len() + lp.a_eq.len(),
        });
    }
    if lp.c.iter().chain(&lp.b_ub).chain(&lp.b_eq).any(|x| !x.is_finite()) {
        return Err(LpError::NonFinite);
    }
    let n_ub = lp.a_ub.len();
    let m = n_ub + lp.a_eq.len();
    let scale = lp
        .a_ub
        .iter()
        .chain(&lp.a_eq)
        .flatten()
        .chain(&lp.b_ub)
        .chain(&lp.b_eq)
        .fold(1.0f64, |a, &b| a.max(b.abs()));
    let tol = TOL * scale;
    // Columns: x (n), slacks (n_ub), artificials (m), rhs.
    let width = n + n_ub + m + 1;
    let mut t = vec![vec![0.0; width]; m + 1];
    for i in 0..m {
        let (a, b) = if i < n_ub {
            (&lp.a_ub[i], lp.b_ub[i])
        } else {
            (&lp.a_eq[i - n_ub], lp.b_eq[i - n_ub])
        };
        let sign = if b < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = sign * a[j];
        }
        if i < n_ub {
            t[i][n + i] = sign;
        }
        t[i][n + n_ub + i] = 1.0;
        t[i][width - 1] = sign * b;
    }
    // Phase one objective: sum of artificials, expressed in the non-basic columns.
    let artificial = n + n_ub..n + n_ub + m;
    for i in 0..m {
        let (rows, objective) = t.split_at_mut(m);
        for (j, (o, x)) in objective[0].iter_mut().zip(&rows[i]).enumerate() {
            if !artificial.contains(&j) {
                *o -= x;
            }
        }
    }
    let mut tab = Tableau {
        t,
        basis: (0..m).map(|i| n + n_ub + i).collect(),
        tol,
    };
    tab.optimize(n + n_ub + m)?;
    if -tab.t[m][width - 1] > tol * (m as f64 + 1.0) {
        return Ok(LpOutcome::Infeasible);
    }
    // Drive remaining artificials out of the basis; rows where that fails are redundant.
    let mut i = 0;
    while i < tab.rows() {
        if tab.basis[i] >= n + n_ub {
            if let Some(col) = (0..n + n_ub).find(|&j| tab.t[i][j].abs() > tol) {
                tab.pivot(i, col);
            } else {
                tab.t.remove(i);
                tab.basis.remove(i);
                continue;
            }
        }
        i += 1;
    }
    let m = tab.rows();
    let objective: Vec<f64> = (0..width)
        .map(|j| if j < n { lp.c[j] } else { 0.0 })
        .collect();
    tab.t[m] = objective;
    for i in 0..m {
        let f = tab.t[m][tab.basis[i]];
        if f != 0.0 {
            let row = tab.t[i].clone();
            for (v, rv) in tab.t[m].iter_mut().zip(&row) {
                *v -= f * rv;
            }
        }
    }
    if !tab.optimize(n + n_ub)? {
        return Ok(LpOutcome::Unbounded);
    }
    let mut x = vec![0.0; n];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.t[i][width - 1].max(0.0);
        }
    }
    let value = lp.c.iter().zip(&x).map(|(c, x)| c * x).sum();
    Ok(LpOutcome::Optimal { x, value })
}

/// Coefficients `c_i >= min_coeff` with `sum c_i rays_i = target`, if any exist.
pub fn cone_combination(rays: &[Vec<f64>], target: &[f64], min_coeff: f64) -> Result<Option<Vec<f64>>, LpError> {
    let dim = target.len();
    // Substitute c = min_coeff + y with y >= 0.
    let a_eq: Vec<Vec<f64>> = (0..dim).map(|k| rays.iter().map(|r| r[k]).collect()).collect();
    let b_eq: Vec<f64> = (0..dim)
        .map(|k| target[k] - min_coeff * rays.iter().map(|r| r[k]).sum::<f64>())
        .collect();
    let lp = LinearProgram {
        c: vec![0.0; rays.len()],
        a_eq,
        b_eq,
        ..Default::default()
    };
    Ok(solve(&lp)?.solution().map(|y| y.iter().map(|v| v + min_coeff).collect()))
}

/// Minimizes `|sum c_i vectors_i - target|_1` over `c >= 0`; returns `(c, residual)`.
pub fn nonneg_l1_fit(vectors: &[Vec<f64>], target: &[f64]) -> Result<(Vec<f64>, f64), LpError> {
    let l = vectors.len();
    let dim = target.len();
    // Variables: c (l), then u+ and u- (dim each) with sum c_i v_i + u+ - u- = target.
    let n = l + 2 * dim;
    let mut c = vec![0.0; n];
    for v in c.iter_mut().skip(l) {
        *v = 1.0;
    }
    let a_eq: Vec<Vec<f64>> = (0..dim)
        .map(|k| {
            let mut row = vec![0.0; n];
            for (i, v) in vectors.iter().enumerate() {
                row[i] = v[k];
            }
            row[l + k] = 1.0;
            row[l + dim + k] = -1.0;
            row
        })
        .collect();
    let lp = LinearProgram {
        c,
        a_eq,
        b_eq: target.to_vec(),
        ..Default::default()
    };
    match solve(&lp)? {
        LpOutcome::Optimal { x, value } => Ok((x[..l].to_vec(), value)),
        // Always feasible and bounded below by zero.
        _ => unreachable!("l1 fit is feasible and bounded"),
    }
}

/// Non-negative least squares: minimizes `|A c - b|_2` over `c >= 0` (Lawson-Hanson active set).
///
/// `columns` are the columns of `A`.
pub fn nnls(columns: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    use crate::linalg::{Mat, Vector};
    let n = columns.len();
    let m = b.len();
    let a = Mat::from_fn(m, n, |i, j| columns[j][i]);
    let b = Vector::from_column_slice(b);
    let scale = a.amax().max(b.amax()).max(1.0);
    let tol = 1e-12 * scale * scale * (m.max(n) as f64);
    let mut x = Vector::zeros(n);
    let mut passive = vec![false; n];
    let solve_passive = |passive: &[bool]| -> Vector {
        let idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
        let sub = Mat::from_fn(m, idx.len(), |i, k| a[(i, idx[k])]);
        let sol = sub.clone().svd(true, true).solve(&b, 1e-13).unwrap_or_else(|_| Vector::zeros(idx.len()));
        let mut z = Vector::zeros(n);
        for (k, &j) in idx.iter().enumerate() {
            z[j] = sol[k];
        }
        z
    };
    for _ in 0..3 * n + 10 {
        let w = a.transpose() * (&b - &a * &x);
        let Some(t) = (0..n).filter(|&j| !passive[j] && w[j] > tol).max_by(|&i, &j| w[i].total_cmp(&w[j])) else {
            break;
        };
        passive[t] = true;
        loop {
            let z = solve_passive(&passive);
            if (0..n).filter(|&j| passive[j]).all(|j| z[j] > 0.0) {
                x = z;
                break;
            }
            let mut alpha = f64::INFINITY;
            for j in (0..n).filter(|&j| passive[j] && z[j] <= 0.0) {
                alpha = alpha.min(x[j] / (x[j] - z[j]));
            }
            x += (z - &x) * alpha;
            for j in 0..n {
                if passive[j] && x[j] <= 1e-15 * scale {
                    passive[j] = false;
                    x[j] = 0.0;
                }
            }
        }
    }
    x.iter().copied().collect()
}
