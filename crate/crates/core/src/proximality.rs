//! Projective-space geometry and certification of `(r, eps)`-proximality.
//!
//! The distance on `P(V)` is the chordal one, `d(x, y) = min |v_x -+ v_y|` over unit
//! representatives. Certificates are issued either from the singular-value gap or from a
//! deterministic grid over the complement of the `eps`-neighbourhood of the repelling
//! hyperplane.

use crate::linalg::{compound, null_vector, singular_values, sorted_eigenvalues, Mat, Vector};
use crate::sampling::sphere_grid;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Minimal ratio between the two largest eigenvalue moduli.
pub const PROXIMAL_RATIO: f64 = 1.0 + 1e-6;

/// Relative slack in the separation test, absorbing rounding when `r` is derived from the
/// separation itself.
const SEPARATION_RTOL: f64 = 1e-9;

/// Grid size used when a caller does not choose one.
pub const DEFAULT_GRID: usize = 400;

/// Number of probe points used to measure how finely a grid covers its region.
const MESH_PROBES: usize = 256;

/// Chordal Lipschitz constant of a map that is `angular`-Lipschitz for the angle metric and
/// whose image has angular diameter at most `image_diameter`.
///
/// Projective angles are at most `pi/2`, so this is the supremum over `theta` in `(0, pi/2]` of
/// `sin(min(angular * theta, image_diameter) / 2) / sin(theta / 2)`.
pub fn chordal_lipschitz(angular: f64, image_diameter: f64) -> f64 {
    if !angular.is_finite() {
        return f64::INFINITY;
    }
    let half_pi = std::f64::consts::FRAC_PI_2;
    let cap = image_diameter.clamp(0.0, half_pi);
    let ratio = |theta: f64| ((angular * theta).min(cap) / 2.0).sin() / (theta / 2.0).sin();
    let mut best = if cap > 0.0 { angular } else { 0.0 };
    if angular > 0.0 && cap / angular < half_pi {
        best = best.max(ratio(cap / angular));
    }
    const STEPS: usize = 1024;
    for i in 1..=STEPS {
        best = best.max(ratio(half_pi * i as f64 / STEPS as f64));
    }
    best
}

/// Angular radius of a chordal ball of radius `d`.
fn angle_of_chord(d: f64) -> f64 {
    2.0 * (d / 2.0).clamp(0.0, 1.0).asin()
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProxError {
    #[error("vector is zero or not finite")]
    BadVector,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("not proximal: dominant modulus ratio {ratio:.6e}")]
    NotProximal { ratio: f64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("geometry: d(x, Y) = {found:.6} is below {required:.6}")]
    Geometry { found: f64, required: f64 },
    #[error("refused: {0}")]
    Refused(Refusal),
    #[error("no power up to {cap} certifies")]
    SearchExhausted { cap: u64 },
}

/// The condition of the proximality definition that could not be verified.
#[derive(Debug, Error, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum Refusal {
    #[error("separation d(x+, X-) = {found:.6} < 2r = {required:.6}")]
    Separation { found: f64, required: f64 },
    #[error("containment bound {found:.6e} is not below eps = {eps}")]
    Containment { found: f64, eps: f64 },
    #[error("Lipschitz bound {found:.6e} exceeds eps = {eps}")]
    Lipschitz { found: f64, eps: f64 },
}

fn unit(v: Vector) -> Result<Vector, ProxError> {
    let n = v.norm();
    if !(n > 0.0) || !n.is_finite() {
        return Err(ProxError::BadVector);
    }
    Ok(v / n)
}

/// A point of projective space, stored as a unit vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProjPoint {
    vec: Vector,
}

impl ProjPoint {
    pub fn new(v: Vector) -> Result<ProjPoint, ProxError> {
        Ok(ProjPoint { vec: unit(v)? })
    }

    pub fn from_slice(v: &[f64]) -> Result<ProjPoint, ProxError> {
        ProjPoint::new(Vector::from_column_slice(v))
    }

    pub fn vec(&self) -> &Vector {
        &self.vec
    }

    pub fn dim(&self) -> usize {
        self.vec.len()
    }

    /// Image under a linear map.
    pub fn image(&self, g: &Mat) -> Result<ProjPoint, ProxError> {
        ProjPoint::new(g * &self.vec)
    }
}

impl TryFrom<Vec<f64>> for ProjPoint {
    type Error = ProxError;
    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        ProjPoint::from_slice(&v)
    }
}

impl From<ProjPoint> for Vec<f64> {
    fn from(p: ProjPoint) -> Vec<f64> {
        p.vec.iter().copied().collect()
    }
}

/// A projective hyperplane, stored by a unit normal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProjHyperplane {
    normal: Vector,
}

impl ProjHyperplane {
    pub fn new(normal: Vector) -> Result<ProjHyperplane, ProxError> {
        Ok(ProjHyperplane { normal: unit(normal)? })
    }

    pub fn from_slice(v: &[f64]) -> Result<ProjHyperplane, ProxError> {
        ProjHyperplane::new(Vector::from_column_slice(v))
    }

    pub fn normal(&self) -> &Vector {
        &self.normal
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    /// Distance from a point to the hyperplane.
    pub fn distance_to(&self, x: &ProjPoint) -> f64 {
        distance_from_cosine(x.vec.dot(&self.normal).abs())
    }

    /// Largest distance from a point of `self` to `other`.
    pub fn excess_over(&self, other: &ProjHyperplane) -> f64 {
        let c = self.normal.dot(&other.normal).abs().min(1.0);
        distance_from_cosine((1.0 - c * c).max(0.0).sqrt())
    }
}

impl TryFrom<Vec<f64>> for ProjHyperplane {
    type Error = ProxError;
    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        ProjHyperplane::from_slice(&v)
    }
}

impl From<ProjHyperplane> for Vec<f64> {
    fn from(p: ProjHyperplane) -> Vec<f64> {
        p.normal.iter().copied().collect()
    }
}

/// `d(Rx, Ry) = min |x -+ y|` for unit representatives.
pub fn proj_distance(x: &ProjPoint, y: &ProjPoint) -> f64 {
    let c = x.vec.dot(&y.vec).abs().min(1.0);
    // |x - y|^2 = 2 - 2c, written to avoid cancellation for nearby points.
    let diff = (&x.vec - &y.vec).norm();
    let sum = (&x.vec + &y.vec).norm();
    let direct = diff.min(sum);
    if direct < 1e-4 {
        direct
    } else {
        (2.0 - 2.0 * c).max(0.0).sqrt()
    }
}

/// Distance from a unit vector to a hyperplane given `|<x, normal>| = c`.
pub fn distance_from_cosine(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    c * (2.0 / (1.0 + (1.0 - c * c).sqrt())).sqrt()
}

/// Inverse of [`distance_from_cosine`]: the cosine at which the distance equals `delta`.
pub fn cosine_from_distance(delta: f64) -> f64 {
    let delta = delta.clamp(0.0, std::f64::consts::SQRT_2);
    delta * (1.0 - delta * delta / 4.0).max(0.0).sqrt()
}

fn normalized(g: &Mat) -> Mat {
    let s = g.amax();
    if s > 0.0 && s.is_finite() {
        g / s
    } else {
        g.clone()
    }
}

/// Ratio of the two largest eigenvalue moduli (infinite when the second vanishes).
pub fn modulus_ratio(g: &Mat) -> f64 {
    let ev = sorted_eigenvalues(&normalized(g));
    if ev.len() < 2 {
        return f64::INFINITY;
    }
    ev[0].norm() / ev[1].norm()
}

/// Attracting eigenline and repelling invariant hyperplane of a proximal matrix.
///
/// The hyperplane is the kernel of the dominant left eigenvector.
pub fn attract_repel(g: &Mat) -> Result<(ProjPoint, ProjHyperplane), ProxError> {
    if g.nrows() != g.ncols() {
        return Err(ProxError::DimensionMismatch(g.nrows(), g.ncols()));
    }
    let m = normalized(g);
    let n = m.nrows();
    let ev = sorted_eigenvalues(&m);
    let top = ev[0];
    let ratio = if n > 1 { top.norm() / ev[1].norm() } else { f64::INFINITY };
    if !(ratio > PROXIMAL_RATIO) || top.im.abs() > 1e-8 * top.norm() {
        return Err(ProxError::NotProximal {
            ratio: if ratio.is_nan() { 1.0 } else { ratio },
        });
    }
    let shift = Mat::identity(n, n) * top.re;
    let (right, _) = null_vector(&(&m - &shift));
    let (left, _) = null_vector(&(m.transpose() - &shift));
    Ok((ProjPoint::new(right)?, ProjHyperplane::new(left)?))
}

/// How a certificate was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CertMethod {
    /// From the ratio of the two largest singular values.
    GapBound { singular_ratio: f64 },
    /// From a deterministic grid of `grid_n` points whose mesh (largest distance from a
    /// probe point to the grid) is `mesh`.
    GridSample { grid_n: usize, mesh: f64 },
}

/// Evidence that a matrix is `(r, eps)`-proximal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProximalityCertificate {
    pub r: f64,
    pub eps: f64,
    pub attract: ProjPoint,
    pub repel: ProjHyperplane,
    pub separation: f64,
    pub containment_bound: f64,
    pub lipschitz_bound: f64,
    pub method: CertMethod,
}

struct GridStats {
    containment: f64,
    lipschitz: f64,
    mesh: f64,
}

/// Moves a unit vector into `{ |<x, n>| >= c }` along the great circle through `n`.
fn clamp_to_region(x: &Vector, n: &Vector, c: f64) -> Vector {
    let along = x.dot(n);
    if along.abs() >= c {
        return x.clone();
    }
    let tangent = x - n * along;
    let tn = tangent.norm();
    let sign = if along < 0.0 { -1.0 } else { 1.0 };
    if tn < 1e-300 {
        return n * sign;
    }
    n * (sign * c) + tangent * ((1.0 - c * c).sqrt() / tn)
}

fn region_samples(n: &Vector, c: f64, count: usize, seed: Option<u64>) -> Vec<Vector> {
    sphere_grid(n.len(), count, seed)
        .iter()
        .map(|x| clamp_to_region(x, n, c))
        .collect()
}

/// Grid verification of the image of `{ d(., Y) >= eps }` under `g` around `x`.
fn grid_verify(g: &Mat, x: &ProjPoint, normal: &Vector, eps: f64, grid_n: usize) -> GridStats {
    let m = normalized(g);
    let dim = m.nrows();
    let c = cosine_from_distance(eps);
    let samples = region_samples(normal, c, grid_n, None);
    let mut containment: f64 = 0.0;
    let mut deriv: f64 = 0.0;
    for s in &samples {
        let gs = &m * s;
        let nrm = gs.norm();
        if !(nrm > 0.0) {
            containment = f64::INFINITY;
            deriv = f64::INFINITY;
            continue;
        }
        let y = &gs / nrm;
        let d = proj_distance(&ProjPoint { vec: y.clone() }, x);
        containment = containment.max(d);
        let px = Mat::identity(dim, dim) - s * s.transpose();
        let py = Mat::identity(dim, dim) - &y * y.transpose();
        let local = singular_values(&(py * &m * px))[0] / nrm;
        deriv = deriv.max(local);
    }
    let probe_pts = region_samples(normal, c, MESH_PROBES, Some(0x5eed));
    let mesh = probe_pts
        .iter()
        .map(|p| {
            samples
                .iter()
                .map(|s| (p - s).norm().min((p + s).norm()))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    let image = (2.0 * angle_of_chord(containment)).min(std::f64::consts::FRAC_PI_2);
    let lipschitz = chordal_lipschitz(deriv, image);
    GridStats {
        containment: containment + lipschitz * mesh,
        lipschitz,
        mesh,
    }
}

/// Bounds from the singular-value gap `delta = s2/s1`.
///
/// Points with `|<x, n->| >= c_eps` have `|<x, v1>| >= c_s = c_eps - |v1 -+ n-|`, where `v1` is
/// the top right singular vector. There the image lies within angle `phi` of `u1` with
/// `tan(phi) <= delta sqrt(1 - c_s^2) / c_s`, and the angular derivative
/// `|gx ∧ gt| / |gx|^2` is at most `delta / c_s^2`. The region is a geodesically convex
/// ball, so the angular Lipschitz constant is at most `delta / c_s^2`; see
/// [`chordal_lipschitz`] for the conversion.
fn gap_bounds(g: &Mat, attract: &ProjPoint, repel: &ProjHyperplane, eps: f64) -> Option<(f64, f64, f64)> {
    let m = normalized(g);
    let svd = m.svd(true, true);
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let s1 = svd.singular_values[order[0]];
    let s2 = svd.singular_values[order[1]];
    let u1 = svd.u.as_ref()?.column(order[0]).into_owned();
    let v1 = svd.v_t.as_ref()?.row(order[0]).transpose();
    let ratio = s2 / s1;
    let n = repel.normal();
    let offset = (&v1 - n).norm().min((&v1 + n).norm());
    let c_s = cosine_from_distance(eps) - offset;
    if !(c_s > 0.0) {
        return None;
    }
    let tan_phi = ratio * (1.0 - c_s * c_s).max(0.0).sqrt() / c_s;
    let phi = tan_phi.atan();
    let lipschitz = chordal_lipschitz(ratio / (c_s * c_s), 2.0 * phi);
    let u1_dist = proj_distance(&ProjPoint { vec: u1 }, attract);
    let containment = 2.0 * (phi / 2.0).sin() + u1_dist;
    Some((ratio, containment, lipschitz))
}

fn check_r_eps(r: f64, eps: f64) -> Result<(), ProxError> {
    if !(eps > 0.0 && eps <= r) {
        return Err(ProxError::Precondition(format!("need 0 < eps <= r, got r = {r}, eps = {eps}")));
    }
    Ok(())
}

/// Certifies that `g` is `(r, eps)`-proximal, or names the condition that failed.
pub fn certify_proximal(g: &Mat, r: f64, eps: f64, grid_n: usize) -> Result<ProximalityCertificate, ProxError> {
    check_r_eps(r, eps)?;
    if grid_n < 100 {
        return Err(ProxError::Precondition(format!("grid_n = {grid_n} is below 100")));
    }
    let (attract, repel) = attract_repel(g)?;
    let separation = repel.distance_to(&attract);
    if separation < 2.0 * r * (1.0 - SEPARATION_RTOL) {
        return Err(ProxError::Refused(Refusal::Separation {
            found: separation,
            required: 2.0 * r,
        }));
    }
    if let Some((ratio, containment, lipschitz)) = gap_bounds(g, &attract, &repel, eps) {
        if containment < eps && lipschitz <= eps {
            return Ok(ProximalityCertificate {
                r,
                eps,
                attract,
                repel,
                separation,
                containment_bound: containment,
                lipschitz_bound: lipschitz,
                method: CertMethod::GapBound { singular_ratio: ratio },
            });
        }
    }
    let stats = grid_verify(g, &attract, repel.normal(), eps, grid_n);
    if !(stats.containment < eps) {
        return Err(ProxError::Refused(Refusal::Containment {
            found: stats.containment,
            eps,
        }));
    }
    if !(stats.lipschitz <= eps) {
        return Err(ProxError::Refused(Refusal::Lipschitz {
            found: stats.lipschitz,
            eps,
        }));
    }
    Ok(ProximalityCertificate {
        r,
        eps,
        attract,
        repel,
        separation,
        containment_bound: stats.containment,
        lipschitz_bound: stats.lipschitz,
        method: CertMethod::GridSample {
            grid_n,
            mesh: stats.mesh,
        },
    })
}

/// Least `n0 <= 10^4` such that `g^n0` and `g^(2 n0)` are `(r, eps_target)`-proximal, where
/// `r` is half the distance between the attracting point and the repelling hyperplane.
pub fn power_proximality(g: &Mat, eps_target: f64) -> Result<(u64, f64), ProxError> {
    const CAP: u64 = 10_000;
    let (attract, repel) = attract_repel(g)?;
    let r = repel.distance_to(&attract) / 2.0;
    check_r_eps(r, eps_target)?;
    let base = crate::linalg::ScaledMatrix::new(g.clone());
    let mut cur = crate::linalg::ScaledMatrix::identity(g.nrows());
    let ok = |m: &Mat| certify_proximal(m, r, eps_target, DEFAULT_GRID).is_ok();
    for n in 1..=CAP {
        cur = cur.mul(&base);
        if ok(&cur.mat) && ok(&base.pow(2 * n).mat) {
            return Ok((n, r));
        }
    }
    Err(ProxError::SearchExhausted { cap: CAP })
}

/// Grid check of the hypotheses of the Tits criterion for `(x, Y)`.
///
/// Returns `true` when `g` maps `{ d(., Y) >= eps }` into `B(x, eps)` and is `eps`-Lipschitz
/// there; then `g` is `(2r, 2 eps)`-proximal.
pub fn tits_criterion(
    g: &Mat,
    x: &ProjPoint,
    y: &ProjHyperplane,
    r: f64,
    eps: f64,
    grid_n: usize,
) -> Result<bool, ProxError> {
    check_r_eps(r, eps)?;
    if x.dim() != g.nrows() || y.dim() != g.nrows() {
        return Err(ProxError::DimensionMismatch(x.dim(), g.nrows()));
    }
    let sep = y.distance_to(x);
    if sep < 6.0 * r {
        return Err(ProxError::Geometry {
            found: sep,
            required: 6.0 * r,
        });
    }
    let stats = grid_verify(g, x, y.normal(), eps, grid_n.max(100));
    Ok(stats.containment < eps && stats.lipschitz <= eps)
}

/// Certificates for every exterior power `1 <= k < d`, given those powers as matrices.
pub fn certify_exterior_powers(
    powers: &[Mat],
    r: f64,
    eps: f64,
    grid_n: usize,
) -> Result<Vec<ProximalityCertificate>, ProxError> {
    powers.iter().map(|m| certify_proximal(m, r, eps, grid_n)).collect()
}

/// `true` iff every exterior power of `g` is `(r, eps)`-proximal.
pub fn is_loxodromic_cert(g: &crate::group_core::GroupElement, r: f64, eps: f64) -> Result<bool, ProxError> {
    check_r_eps(r, eps)?;
    let powers: Vec<Mat> = (1..g.dim()).map(|k| compound(g.matrix(), k)).collect();
    match certify_exterior_powers(&powers, r, eps, DEFAULT_GRID) {
        Ok(_) => Ok(true),
        Err(ProxError::Refused(_)) | Err(ProxError::NotProximal { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_core::GroupElement;
    use crate::sampling::{random_conjugated_diagonal, random_unit, rng};
    use proptest::prelude::*;

    fn p(v: &[f64]) -> ProjPoint {
        ProjPoint::from_slice(v).unwrap()
    }

    fn diag(v: &[f64]) -> Mat {
        Mat::from_diagonal(&Vector::from_column_slice(v))
    }

    #[test]
    fn distance_examples() {
        assert_eq!(proj_distance(&p(&[1.0, 0.0]), &p(&[-2.0, 0.0])), 0.0);
        assert!((proj_distance(&p(&[1.0, 0.0]), &p(&[0.0, 1.0])) - 2f64.sqrt()).abs() < 1e-15);
        // Oracle: minimize |x - s y| over both signs explicitly.
        let x = Vector::from_vec(vec![1.0, 0.0]);
        let y = Vector::from_vec(vec![1.0, 1.0]) / 2f64.sqrt();
        let oracle = (&x - &y).norm().min((&x + &y).norm());
        let d = proj_distance(&p(&[1.0, 0.0]), &p(&[1.0, 1.0]));
        assert!((d - oracle).abs() < 1e-15);
        assert!((d - 0.76537).abs() < 1e-5);
    }

    #[test]
    fn hyperplane_distance_matches_nearest_point() {
        let mut r = rng(3);
        for _ in 0..50 {
            let x = random_unit(&mut r, 4);
            let n = random_unit(&mut r, 4);
            let nearest = &x - &n * x.dot(&n);
            let oracle = proj_distance(&ProjPoint::new(x.clone()).unwrap(), &ProjPoint::new(nearest).unwrap());
            let h = ProjHyperplane::new(n).unwrap();
            let d = h.distance_to(&ProjPoint::new(x).unwrap());
            assert!((d - oracle).abs() < 1e-12);
            let c = cosine_from_distance(d);
            assert!((distance_from_cosine(c) - d).abs() < 1e-12);
        }
    }

    #[test]
    fn attract_repel_examples() {
        let (x, h) = attract_repel(&diag(&[2.0, 0.5])).unwrap();
        assert!(proj_distance(&x, &p(&[1.0, 0.0])) < 1e-14);
        assert!((h.normal()[0].abs() - 1.0).abs() < 1e-14);
        let rot = Mat::from_row_slice(2, 2, &[0.6, -0.8, 0.8, 0.6]);
        assert!(matches!(attract_repel(&rot), Err(ProxError::NotProximal { .. })));

        let mut r = rng(5);
        for _ in 0..10 {
            let (g, h) = random_conjugated_diagonal(&mut r, &[3f64.ln(), 0.0, -(3f64.ln())], 20.0);
            let (x, hyp) = attract_repel(&g).unwrap();
            let hinv = h.clone().try_inverse().unwrap();
            let e1 = ProjPoint::new(h.column(0).into_owned()).unwrap();
            let row = ProjPoint::new(hinv.row(0).transpose()).unwrap();
            assert!(proj_distance(&x, &e1) < 1e-8);
            assert!(proj_distance(&ProjPoint::new(hyp.normal().clone()).unwrap(), &row) < 1e-8);
            // Invariance of both objects.
            assert!(proj_distance(&x.image(&g).unwrap(), &x) < 1e-8);
            let gt_n = ProjPoint::new(g.transpose() * hyp.normal()).unwrap();
            assert!(proj_distance(&gt_n, &ProjPoint::new(hyp.normal().clone()).unwrap()) < 1e-8);
        }
    }

    #[test]
    fn certify_examples() {
        let t = 1e3;
        let cert = certify_proximal(&diag(&[t, 1.0 / t]), 0.5, 0.1, 200).unwrap();
        match cert.method {
            CertMethod::GapBound { singular_ratio } => assert!((singular_ratio - 1e-6).abs() < 1e-12),
            _ => panic!("expected the gap bound"),
        }
        assert!(cert.lipschitz_bound <= 0.1);
        assert!(matches!(
            certify_proximal(&Mat::identity(3, 3), 0.5, 0.1, 200),
            Err(ProxError::NotProximal { .. })
        ));
        for r2 in [0.1, 0.3, 0.5] {
            assert!(certify_proximal(&diag(&[t, 1.0 / t]), r2, 0.1, 200).is_ok());
        }
        assert!(matches!(certify_proximal(&diag(&[t, 1.0 / t]), 0.5, 0.6, 200), Err(ProxError::Precondition(_))));
        assert!(matches!(certify_proximal(&diag(&[t, 1.0 / t]), 0.5, 0.1, 50), Err(ProxError::Precondition(_))));
    }

    #[test]
    fn refusals_name_the_condition() {
        // Attracting point close to the repelling hyperplane.
        let g = Mat::from_row_slice(2, 2, &[4.0, 3.9, 0.0, 0.25]);
        let err = certify_proximal(&g, 0.5, 0.1, 200).unwrap_err();
        assert!(matches!(err, ProxError::Refused(Refusal::Separation { .. })), "{err:?}");
        // Weak contraction.
        let err = certify_proximal(&diag(&[1.2, 1.0 / 1.2]), 0.5, 0.1, 200).unwrap_err();
        assert!(matches!(err, ProxError::Refused(Refusal::Containment { .. } | Refusal::Lipschitz { .. })));
    }

    #[test]
    fn grid_route_on_moderate_gap() {
        // Top singular direction is far from the repelling line, so the gap bound refuses.
        let g = Mat::from_row_slice(2, 2, &[3.0, 1.0, 0.0, 1.0 / 3.0]);
        let cert = certify_proximal(&g, 0.5, 0.5, 800).unwrap();
        assert!(matches!(cert.method, CertMethod::GridSample { grid_n: 800, .. }));
        assert!(cert.containment_bound <= 0.5 && cert.lipschitz_bound <= 0.5);
    }

    #[test]
    fn certificate_soundness_on_fresh_points() {
        let mut r = rng(77);
        for _ in 0..8 {
            let (g, _) = random_conjugated_diagonal(&mut r, &[2.0, 0.0, -2.0], 5.0);
            let Ok(cert) = certify_proximal(&g, 0.1, 0.1, 400) else { continue };
            let c = cosine_from_distance(cert.eps);
            let mut checked = 0;
            while checked < 1000 {
                let x = random_unit(&mut r, 3);
                if x.dot(cert.repel.normal()).abs() < c {
                    continue;
                }
                checked += 1;
                let img = ProjPoint::new(&g * x).unwrap();
                assert!(proj_distance(&img, &cert.attract) < cert.eps * (1.0 + 1e-6));
            }
        }
    }

    #[test]
    fn breuillard_gelander_bound_holds_empirically() {
        // Measured Lipschitz constant on { d(., v1-perp) >= r } against (s2/s1)/r^2.
        let mut rg = rng(9);
        for _ in 0..50 {
            let g = crate::sampling::random_sl(&mut rg, 3);
            let svd = g.clone().svd(true, true);
            let mut s = svd.singular_values.iter().copied().collect::<Vec<_>>();
            s.sort_by(|a, b| b.total_cmp(a));
            let v1 = {
                let idx = (0..3).max_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b])).unwrap();
                svd.v_t.as_ref().unwrap().row(idx).transpose()
            };
            let radius = 0.5;
            let c = cosine_from_distance(radius);
            let pts = region_samples(&v1, c, 300, Some(1));
            let mut worst: f64 = 0.0;
            for a in pts.iter().take(60) {
                for b in pts.iter().skip(60).take(60) {
                    let da = proj_distance(&ProjPoint::new(a.clone()).unwrap(), &ProjPoint::new(b.clone()).unwrap());
                    if da < 1e-9 {
                        continue;
                    }
                    let ga = ProjPoint::new(&g * a).unwrap();
                    let gb = ProjPoint::new(&g * b).unwrap();
                    worst = worst.max(proj_distance(&ga, &gb) / da);
                }
            }
            assert!(worst <= s[1] / s[0] / (radius * radius) * (1.0 + 1e-3));
        }
    }

    #[test]
    fn power_proximality_examples() {
        // Closed form: the gap bound needs 4^-n <= eps^3 up to the cosine correction.
        let (n0, r) = power_proximality(&diag(&[2.0, 0.5]), 0.1).unwrap();
        assert_eq!(n0, 5);
        assert!((r - 2f64.sqrt() / 2.0).abs() < 1e-12);
        let (n0, _) = power_proximality(&diag(&[1e3, 1e-3]), 0.1).unwrap();
        assert_eq!(n0, 1);
        let mut rg = rng(6);
        let (g, _) = random_conjugated_diagonal(&mut rg, &[1.0, 0.0, -1.0], 10.0);
        let (n0, r) = power_proximality(&g, 0.05).unwrap();
        let gn = crate::linalg::ScaledMatrix::new(g).pow(n0).mat;
        assert!(certify_proximal(&gn, r, 0.05, DEFAULT_GRID).is_ok());
    }

    #[test]
    fn tits_examples() {
        let g = diag(&[1e6, 1.0, 1e-6]);
        let x = p(&[1.0, 0.0, 0.0]);
        let y = ProjHyperplane::from_slice(&[1.0, 0.0, 0.0]).unwrap();
        assert!(tits_criterion(&g, &x, &y, 0.2, 0.1, 400).unwrap());
        let cert = certify_proximal(&g, 0.4, 0.2, 400).unwrap();
        assert!(proj_distance(&cert.attract, &x) < 0.1);
        assert!(cert.repel.excess_over(&y) < 0.1);

        let c = 0.6f64;
        let s = 0.8f64;
        let rot = Mat::from_row_slice(3, 3, &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0]);
        assert!(!tits_criterion(&rot, &x, &y, 0.2, 0.1, 400).unwrap());
        assert!(matches!(tits_criterion(&g, &x, &y, 0.3, 0.1, 400), Err(ProxError::Geometry { .. })));
    }

    #[test]
    fn perturbed_product_stays_proximal() {
        // Product with a near-identity factor keeps a certificate near the original point.
        let mut rg = rng(31);
        let eps = 0.1;
        let r = 0.15;
        let g = diag(&[1e4, 1.0, 1e-4]);
        let cert = certify_proximal(&g, r, eps / 2.0, 400).unwrap();
        assert!(cert.separation >= 7.0 * r);
        for _ in 0..10 {
            let pert = crate::sampling::gaussian_matrix(&mut rg, 3, 3);
            let pert = &pert * (eps / 2.0 / crate::linalg::operator_norm(&pert));
            let h = Mat::identity(3, 3) + pert;
            let gh = &g * &h;
            let cert2 = certify_proximal(&gh, 2.0 * r, 2.0 * eps, 400).unwrap();
            let (x2, _) = attract_repel(&gh).unwrap();
            assert!(proj_distance(&x2, &cert.attract) < eps);
            assert!(proj_distance(&cert2.attract, &x2) < 1e-12);
        }
    }

    #[test]
    fn loxodromic_certificates() {
        let g = GroupElement::new(diag(&[8.0, 2.0, 1.0 / 16.0])).unwrap();
        // Per-k gap ratios are 1/4 and 1/32; the powers reach the gap bound quickly.
        let g6 = g.pow(6);
        assert!(is_loxodromic_cert(&g6, 0.3, 0.1).unwrap());
        assert!(is_loxodromic_cert(&g6.pow(3), 0.3, 0.1).unwrap());
        let wall = GroupElement::new(diag(&[4.0, 0.5, 0.5])).unwrap();
        assert!(!is_loxodromic_cert(&wall, 0.3, 0.1).unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn metric_axioms(seed in any::<u64>(), d in 2usize..6) {
            let mut r = rng(seed);
            let a = ProjPoint::new(random_unit(&mut r, d)).unwrap();
            let b = ProjPoint::new(random_unit(&mut r, d)).unwrap();
            let c = ProjPoint::new(random_unit(&mut r, d)).unwrap();
            let ab = proj_distance(&a, &b);
            prop_assert!((ab - proj_distance(&b, &a)).abs() < 1e-15);
            prop_assert!(ab >= 0.0 && ab <= 2f64.sqrt() + 1e-12);
            prop_assert!(ab <= proj_distance(&a, &c) + proj_distance(&c, &b) + 1e-10);
            prop_assert!(proj_distance(&a, &a) < 1e-12);
        }
    }
}
