//! Convex geometry on the probability simplex.
//!
//! Affine functionals on the simplex are identified only up to an additive
//! constant, so every [`Hyperplane`] is stored in the gauge `Σα = 0`,
//! `‖α‖₂ = 1`. Hull projection uses exhaustive face enumeration, which is
//! exact and cheap for the handful of generators involved here.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::Belief;
use crate::linalg::{dot, norm2, rank, solve, sub};

/// Projection distance at or below which a query is inside the hull.
pub const INSIDE_TOL: f64 = 1e-9;
/// Pivot threshold for affine-independence tests.
pub const PIVOT_TOL: f64 = 1e-9;
/// Weight tolerance for a face candidate to count as feasible.
const WEIGHT_TOL: f64 = 1e-12;
/// More generators than this would make face enumeration impractical.
pub const MAX_GENERATORS: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("empty generator set")]
    EmptyGenerators,
    #[error("too many generators ({0}) for face enumeration")]
    TooManyGenerators(usize),
    #[error("points are affinely dependent")]
    AffineDependence,
    #[error("index {index} out of range for {len} generators")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// The affine functional `x ↦ α·x − β`, gauge-normalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    pub alpha: Vec<f64>,
    pub beta: f64,
}

impl Hyperplane {
    /// Re-gauges an arbitrary `(α, β)` so that `Σα = 0` and `‖α‖ = 1`. The
    /// functional is unchanged on the simplex up to positive scaling.
    /// Returns `None` if `α` is constant.
    pub fn gauged(alpha: &[f64], beta: f64) -> Option<Hyperplane> {
        let mean = alpha.iter().sum::<f64>() / alpha.len() as f64;
        let centered: Vec<f64> = alpha.iter().map(|a| a - mean).collect();
        let norm = norm2(&centered);
        if norm <= 1e-300 {
            return None;
        }
        Some(Hyperplane {
            alpha: centered.iter().map(|a| a / norm).collect(),
            beta: (beta - mean) / norm,
        })
    }

    /// α·x − β.
    pub fn eval(&self, x: &[f64]) -> f64 {
        dot(&self.alpha, x) - self.beta
    }

    /// Payoff vector `u(θ) = α_θ − β` whose expected value at any belief is
    /// `α·x − β`.
    pub fn payoff_vector(&self) -> Vec<f64> {
        self.alpha.iter().map(|a| a - self.beta).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Inside,
    Outside,
}

/// Result of a hull-membership query, with a witness either way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullCertificate {
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    pub separator: Option<Hyperplane>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    pub distance: f64,
}

impl HullCertificate {
    pub fn is_inside(&self) -> bool {
        self.verdict == Verdict::Inside
    }
}

/// Nearest point of a convex hull to a query.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub nearest: Vec<f64>,
    pub distance: f64,
    /// Convex weights on the generators, in input order.
    pub weights: Vec<f64>,
}

/// True iff the points are affinely independent. More than `n` points in
/// R^n simplex coordinates are never independent.
pub fn affinely_independent(points: &[Belief]) -> Result<bool, GeometryError> {
    affinely_independent_with_pivot(points, PIVOT_TOL)
}

pub fn affinely_independent_with_pivot(
    points: &[Belief],
    pivot_tol: f64,
) -> Result<bool, GeometryError> {
    let first = points.first().ok_or(GeometryError::EmptyGenerators)?;
    if points.len() > first.dim() {
        return Ok(false);
    }
    let diffs: Vec<Vec<f64>> = points[1..]
        .iter()
        .map(|p| sub(p.probs(), first.probs()))
        .collect();
    Ok(rank(&diffs, pivot_tol) == diffs.len())
}

/// Euclidean projection of `query` onto `conv(generators)`.
///
/// Every nonempty subset of generators is tried as a face: the affine
/// least-squares problem is solved on it, candidates with a negative weight
/// are discarded, and the closest survivor wins. Affinely dependent subsets
/// are skipped; the optimum is always attained on an independent face.
pub fn project_to_hull(query: &Belief, generators: &[Belief]) -> Result<Projection, GeometryError> {
    let k = generators.len();
    if k == 0 {
        return Err(GeometryError::EmptyGenerators);
    }
    if k > MAX_GENERATORS {
        return Err(GeometryError::TooManyGenerators(k));
    }
    check_dims(query, generators)?;
    let q = query.probs();
    let mut best: Option<Projection> = None;
    for mask in 1u32..(1u32 << k) {
        let members: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        let Some(face_weights) = face_least_squares(q, generators, &members) else {
            continue;
        };
        if face_weights.iter().any(|w| *w < -WEIGHT_TOL) {
            continue;
        }
        let mut weights = vec![0.0; k];
        for (&i, &w) in members.iter().zip(&face_weights) {
            weights[i] = w.max(0.0);
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let nearest = combine(generators, &weights);
        let distance = norm2(&sub(q, &nearest));
        if best.as_ref().is_none_or(|b| distance < b.distance) {
            best = Some(Projection {
                nearest,
                distance,
                weights,
            });
        }
    }
    // Singletons are always feasible, so some candidate exists.
    Ok(best.expect("singleton faces are always feasible"))
}

fn check_dims(query: &Belief, generators: &[Belief]) -> Result<(), GeometryError> {
    let n = query.dim();
    match generators.iter().find(|g| g.dim() != n) {
        Some(g) => Err(GeometryError::DimensionMismatch {
            expected: n,
            got: g.dim(),
        }),
        None => Ok(()),
    }
}

fn combine(generators: &[Belief], weights: &[f64]) -> Vec<f64> {
    let n = generators[0].dim();
    let mut out = vec![0.0; n];
    for (g, w) in generators.iter().zip(weights) {
        for (o, x) in out.iter_mut().zip(g.probs()) {
            *o += w * x;
        }
    }
    out
}

/// Affine weights (summing to one) of the point of `aff{generators[i] : i ∈
/// members}` nearest to `q`, or `None` if the face is affinely dependent.
fn face_least_squares(q: &[f64], generators: &[Belief], members: &[usize]) -> Option<Vec<f64>> {
    let base = generators[members[0]].probs();
    if members.len() == 1 {
        return Some(vec![1.0]);
    }
    let dirs: Vec<Vec<f64>> = members[1..]
        .iter()
        .map(|&i| sub(generators[i].probs(), base))
        .collect();
    let r = sub(q, base);
    let gram: Vec<Vec<f64>> = dirs
        .iter()
        .map(|a| dirs.iter().map(|b| dot(a, b)).collect())
        .collect();
    let rhs: Vec<f64> = dirs.iter().map(|a| dot(a, &r)).collect();
    let scale = gram
        .iter()
        .enumerate()
        .map(|(i, row)| row[i])
        .fold(0.0, f64::max);
    let t = solve(&gram, &rhs, 1e-12 * scale.max(1e-300))?;
    let mut w = Vec::with_capacity(members.len());
    w.push(1.0 - t.iter().sum::<f64>());
    w.extend(t);
    Some(w)
}

/// Decides whether `query` lies in `conv(generators)`.
///
/// Inside certificates carry reconstructing weights. Outside certificates
/// carry the hyperplane through the midpoint of the query and its projection,
/// normal to their difference; the reported margin is the smallest slack
/// actually observed on either side, which is half the projection distance up
/// to rounding.
pub fn hull_membership(query: &Belief, generators: &[Belief]) -> Result<HullCertificate, GeometryError> {
    let proj = project_to_hull(query, generators)?;
    if proj.distance <= INSIDE_TOL {
        return Ok(HullCertificate {
            verdict: Verdict::Inside,
            weights: Some(proj.weights),
            separator: None,
            margin: None,
            distance: proj.distance,
        });
    }
    let q = query.probs();
    let diff = sub(q, &proj.nearest);
    let mid: Vec<f64> = q
        .iter()
        .zip(&proj.nearest)
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    let sep = separator_through(&diff, &mid);
    let margin = certified_margin(&sep, q, generators);
    Ok(HullCertificate {
        verdict: Verdict::Outside,
        weights: None,
        separator: Some(sep),
        margin: Some(margin),
        distance: proj.distance,
    })
}

/// Gauged hyperplane with normal direction `normal` passing through `point`.
fn separator_through(normal: &[f64], point: &[f64]) -> Hyperplane {
    let mean = normal.iter().sum::<f64>() / normal.len() as f64;
    let centered: Vec<f64> = normal.iter().map(|a| a - mean).collect();
    let norm = norm2(&centered);
    let alpha: Vec<f64> = centered.iter().map(|a| a / norm).collect();
    let beta = dot(&alpha, point);
    Hyperplane { alpha, beta }
}

/// Smallest slack of `sep` over the query side and the generator side.
fn certified_margin(sep: &Hyperplane, query: &[f64], generators: &[Belief]) -> f64 {
    generators
        .iter()
        .map(|g| -sep.eval(g.probs()))
        .fold(sep.eval(query), f64::min)
}

/// Hyperplane touching `conv(generators)` exactly at `generators[index]`.
///
/// Solves for the minimum-norm `(α, β)` with `α·x_i − β = 0`,
/// `α·x_j − β = −1` for every other generator and `Σα = 0`, then re-gauges.
pub fn exposing_hyperplane(generators: &[Belief], index: usize) -> Result<Hyperplane, GeometryError> {
    let k = generators.len();
    if k == 0 {
        return Err(GeometryError::EmptyGenerators);
    }
    if index >= k {
        return Err(GeometryError::IndexOutOfRange { index, len: k });
    }
    check_dims(&generators[0], generators)?;
    if !affinely_independent(generators)? {
        return Err(GeometryError::AffineDependence);
    }
    let n = generators[0].dim();
    let target = generators[index].probs();
    if k == 1 {
        // Any gauged direction supports a single point.
        let mut alpha = vec![0.0; n];
        alpha[0] = 1.0;
        alpha[1] = -1.0;
        let h = Hyperplane::gauged(&alpha, 0.0).expect("nonconstant");
        let beta = dot(&h.alpha, target);
        return Ok(Hyperplane { alpha: h.alpha, beta });
    }
    // Rows of A act on z = (α, β) ∈ R^{n+1}.
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(k + 1);
    let mut rhs: Vec<f64> = Vec::with_capacity(k + 1);
    for (j, g) in generators.iter().enumerate() {
        let mut row = g.probs().to_vec();
        row.push(-1.0);
        rows.push(row);
        rhs.push(if j == index { 0.0 } else { -1.0 });
    }
    let mut gauge = vec![1.0; n];
    gauge.push(0.0);
    rows.push(gauge);
    rhs.push(0.0);

    let aat: Vec<Vec<f64>> = rows
        .iter()
        .map(|a| rows.iter().map(|b| dot(a, b)).collect())
        .collect();
    let y = solve(&aat, &rhs, 1e-14).ok_or(GeometryError::AffineDependence)?;
    let mut z = vec![0.0; n + 1];
    for (yi, row) in y.iter().zip(&rows) {
        for (zj, r) in z.iter_mut().zip(row) {
            *zj += yi * r;
        }
    }
    let beta = z.pop().expect("n + 1 entries");
    let h = Hyperplane::gauged(&z, beta).ok_or(GeometryError::AffineDependence)?;
    // Pin β to the exposed point so the contact is as exact as rounding allows.
    let beta = dot(&h.alpha, target);
    Ok(Hyperplane { alpha: h.alpha, beta })
}
