//! Finite metric spaces and exact comparison machinery.
//!
//! A [`FiniteMetricSpace`] is a labelled point set with an explicit distance
//! matrix. Construction validates the full axiom set — symmetry, zero
//! diagonal, positivity between distinct points, and the triangle
//! inequality — and reports *every* violated entry rather than the first.
//!
//! Submodules provide map pairs and correspondences with their distortion
//! functionals ([`maps`]) and the Gromov–Hausdorff solvers ([`gh`]).

pub mod gh;
pub mod maps;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One violated metric axiom, with the entries that witness it.
#[derive(Clone, Debug, PartialEq, Error)]
pub enum MetricViolation {
    /// `d[i][j] != d[j][i]`.
    #[error("asymmetry at ({i},{j}): {dij} vs {dji}")]
    Asymmetry { i: usize, j: usize, dij: f64, dji: f64 },
    /// A distance below zero.
    #[error("negative entry at ({i},{j}): {value}")]
    NegativeEntry { i: usize, j: usize, value: f64 },
    /// `d[i][i] != 0`.
    #[error("nonzero diagonal at ({i},{i}): {value}")]
    NonzeroDiagonal { i: usize, value: f64 },
    /// `d[i][k] > d[i][j] + d[j][k]` beyond the numerical slack.
    #[error("triangle violation at ({i},{j},{k}): d({i},{k}) = {lhs} > {rhs} = d({i},{j}) + d({j},{k})")]
    TriangleViolation {
        i: usize,
        j: usize,
        k: usize,
        lhs: f64,
        rhs: f64,
    },
    /// Distinct points at distance zero.
    #[error("duplicate points at ({i},{j}): distance is zero but points are distinct")]
    DuplicatePoints { i: usize, j: usize },
}

/// Errors from metric-space construction and queries.
#[derive(Clone, Debug, Error)]
pub enum MetricError {
    #[error("distance matrix must be square: {rows} rows but row {row} has {cols} columns")]
    NotSquare { rows: usize, row: usize, cols: usize },
    #[error("{labels} labels provided for {points} points")]
    LabelMismatch { labels: usize, points: usize },
    #[error("a metric space needs at least one point")]
    Empty,
    #[error("metric axioms violated ({} issue(s)): {}", .0.len(), format_violations(.0))]
    Invalid(Vec<MetricViolation>),
    #[error("subset must be non-empty")]
    EmptySubset,
    #[error("point index {index} out of bounds for a space of {size} points")]
    IndexOutOfBounds { index: usize, size: usize },
    #[error("scale factor must be positive and finite, got {factor}")]
    InvalidScale { factor: f64 },
    #[error(
        "enumeration needs about {needed:.3e} evaluations but the budget is {budget:.3e}; \
         use the branch-and-bound solver for instances of this size"
    )]
    BudgetExceeded { needed: f64, budget: f64 },
    #[error("exhaustive permutation search is limited to {limit} points, got {n}")]
    PermutationTooLarge { n: usize, limit: usize },
    #[error("map must assign every point: got {got} assignments for {expected} points")]
    MapSizeMismatch { got: usize, expected: usize },
    #[error("map value {value} out of bounds for a target space of {size} points")]
    MapValueOutOfBounds { value: usize, size: usize },
    #[error("relation is not a correspondence: {reason}")]
    NotACorrespondence { reason: String },
}

fn format_violations(violations: &[MetricViolation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// A finite metric space: labelled points and a validated distance matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    /// Row-major `n x n` distances.
    dist: Vec<f64>,
    n: usize,
}

/// Wire format: `{"labels": [...], "dist": [[...], ...]}`.
#[derive(Serialize, Deserialize)]
struct WireMetricSpace {
    labels: Vec<String>,
    #[serde(with = "crate::real::matrix")]
    dist: Vec<Vec<f64>>,
}

impl FiniteMetricSpace {
    /// Validates a distance matrix and builds the space.
    ///
    /// Checks run over the whole matrix and every violation is collected:
    /// asymmetry, negative entries, nonzero diagonal, triangle violations,
    /// and zero distances between distinct points. The triangle check allows
    /// an absolute slack of `1e-12 * (1 + max_entry)` so that matrices
    /// computed from coordinates in floating point are not rejected for
    /// last-bit rounding.
    pub fn from_matrix(labels: Vec<String>, matrix: Vec<Vec<f64>>) -> Result<Self, MetricError> {
        let n = matrix.len();
        if n == 0 {
            return Err(MetricError::Empty);
        }
        for (row, r) in matrix.iter().enumerate() {
            if r.len() != n {
                return Err(MetricError::NotSquare {
                    rows: n,
                    row,
                    cols: r.len(),
                });
            }
        }
        if labels.len() != n {
            return Err(MetricError::LabelMismatch {
                labels: labels.len(),
                points: n,
            });
        }

        let mut violations = Vec::new();
        let mut max_entry = 0.0f64;
        for row in &matrix {
            for &v in row {
                if v.is_finite() {
                    max_entry = max_entry.max(v.abs());
                }
            }
        }
        let slack = 1e-12 * (1.0 + max_entry);

        for i in 0..n {
            if matrix[i][i] != 0.0 {
                violations.push(MetricViolation::NonzeroDiagonal {
                    i,
                    value: matrix[i][i],
                });
            }
            for j in 0..n {
                let v = matrix[i][j];
                if !v.is_finite() || v < 0.0 {
                    violations.push(MetricViolation::NegativeEntry { i, j, value: v });
                }
                if j > i {
                    if matrix[i][j] != matrix[j][i] {
                        violations.push(MetricViolation::Asymmetry {
                            i,
                            j,
                            dij: matrix[i][j],
                            dji: matrix[j][i],
                        });
                    }
                    if matrix[i][j] == 0.0 {
                        violations.push(MetricViolation::DuplicatePoints { i, j });
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if j == i {
                    continue;
                }
                for k in 0..n {
                    if k == i || k == j {
                        continue;
                    }
                    let lhs = matrix[i][k];
                    let rhs = matrix[i][j] + matrix[j][k];
                    if lhs > rhs + slack {
                        violations.push(MetricViolation::TriangleViolation { i, j, k, lhs, rhs });
                    }
                }
            }
        }
        if !violations.is_empty() {
            return Err(MetricError::Invalid(violations));
        }

        let mut dist = Vec::with_capacity(n * n);
        for row in &matrix {
            dist.extend_from_slice(row);
        }
        Ok(FiniteMetricSpace { labels, dist, n })
    }

    /// Builds the space induced by a norm on a finite point list.
    ///
    /// Distances are `N(p_i - p_j)`, computed once per unordered pair so the
    /// matrix is symmetric bit-for-bit.
    pub fn from_points(
        labels: Vec<String>,
        points: &[Vec<f64>],
        norm: &crate::norm::NormDescriptor,
    ) -> Result<Self, MetricError> {
        let n = points.len();
        let mut matrix = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let diff: Vec<f64> = points[i]
                    .iter()
                    .zip(&points[j])
                    .map(|(a, b)| a - b)
                    .collect();
                let d = norm
                    .eval(&diff)
                    .expect("points must match the norm dimension");
                matrix[i][j] = d;
                matrix[j][i] = d;
            }
        }
        Self::from_matrix(labels, matrix)
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.n
    }

    /// True when the space has no points (never, for a validated space).
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Point labels, in index order.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Distance between points `i` and `j`.
    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    /// Row `i` of the distance matrix (the coordinate vector used by the
    /// exact embedding into `l_inf^n`).
    pub fn row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    /// Largest pairwise distance (0 for a single point).
    pub fn diam(&self) -> f64 {
        let mut best = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                best = best.max(self.d(i, j));
            }
        }
        best
    }

    /// Largest distance from point `i` to any other point.
    pub fn eccentricity(&self, i: usize) -> f64 {
        (0..self.n).map(|j| self.d(i, j)).fold(0.0, f64::max)
    }

    /// All off-diagonal distances, one entry per unordered pair.
    pub fn pair_distances(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n * (self.n - 1) / 2);
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                out.push(self.d(i, j));
            }
        }
        out
    }

    /// The rescaled space `lambda * X` (every distance multiplied by
    /// `lambda`). Rejects non-positive and non-finite factors.
    pub fn scale(&self, lambda: f64) -> Result<Self, MetricError> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(MetricError::InvalidScale { factor: lambda });
        }
        Ok(FiniteMetricSpace {
            labels: self.labels.clone(),
            dist: self.dist.iter().map(|&v| v * lambda).collect(),
            n: self.n,
        })
    }

    /// Parses and validates the JSON wire format.
    pub fn from_json_str(text: &str) -> Result<Self, String> {
        let wire: WireMetricSpace = serde_json::from_str(text).map_err(|e| e.to_string())?;
        Self::from_matrix(wire.labels, wire.dist).map_err(|e| e.to_string())
    }

    /// Serialises to the JSON wire format with full-precision reals.
    pub fn to_json_string(&self) -> String {
        let wire = WireMetricSpace {
            labels: self.labels.clone(),
            dist: (0..self.n).map(|i| self.row(i).to_vec()).collect(),
        };
        serde_json::to_string(&wire).expect("wire format serialises")
    }
}

impl Serialize for FiniteMetricSpace {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let wire = WireMetricSpace {
            labels: self.labels.clone(),
            dist: (0..self.n).map(|i| self.row(i).to_vec()).collect(),
        };
        wire.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for FiniteMetricSpace {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let wire = WireMetricSpace::deserialize(de)?;
        Self::from_matrix(wire.labels, wire.dist).map_err(serde::de::Error::custom)
    }
}

/// Hausdorff distance between two index subsets of a common ambient space.
///
/// Returns the larger of the two one-sided gaps
/// `sup_{a in A} inf_{b in B} d(a,b)` and `sup_{b in B} inf_{a in A} d(a,b)`.
pub fn hausdorff_distance(
    ambient: &FiniteMetricSpace,
    a: &[usize],
    b: &[usize],
) -> Result<f64, MetricError> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricError::EmptySubset);
    }
    for &idx in a.iter().chain(b) {
        if idx >= ambient.len() {
            return Err(MetricError::IndexOutOfBounds {
                index: idx,
                size: ambient.len(),
            });
        }
    }
    let one_sided = |from: &[usize], to: &[usize]| -> f64 {
        from.iter()
            .map(|&p| {
                to.iter()
                    .map(|&q| ambient.d(p, q))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    Ok(one_sided(a, b).max(one_sided(b, a)))
}

/// Searches for a distance-preserving bijection between two spaces.
///
/// Backtracking over point assignments; entries must match within `tol`.
/// Returns the permutation `p` with `d_X(i,j) ≈ d_Y(p(i),p(j))` when one
/// exists. Limited to 10 points — beyond that the factorial search is not
/// worth running and callers should compare distance multisets instead.
pub fn isometric_by_permutation(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    tol: f64,
) -> Result<Option<Vec<usize>>, MetricError> {
    const LIMIT: usize = 10;
    if x.len() > LIMIT || y.len() > LIMIT {
        return Err(MetricError::PermutationTooLarge {
            n: x.len().max(y.len()),
            limit: LIMIT,
        });
    }
    if x.len() != y.len() {
        return Ok(None);
    }
    let n = x.len();
    let mut assignment = vec![usize::MAX; n];
    let mut used = vec![false; n];

    fn backtrack(
        x: &FiniteMetricSpace,
        y: &FiniteMetricSpace,
        tol: f64,
        pos: usize,
        assignment: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        let n = x.len();
        if pos == n {
            return true;
        }
        for cand in 0..n {
            if used[cand] {
                continue;
            }
            let consistent = (0..pos)
                .all(|prev| (x.d(prev, pos) - y.d(assignment[prev], cand)).abs() <= tol);
            if consistent {
                assignment[pos] = cand;
                used[cand] = true;
                if backtrack(x, y, tol, pos + 1, assignment, used) {
                    return true;
                }
                used[cand] = false;
                assignment[pos] = usize::MAX;
            }
        }
        false
    }

    if backtrack(x, y, tol, 0, &mut assignment, &mut used) {
        Ok(Some(assignment))
    } else {
        Ok(None)
    }
}

/// Convenience constructor for test and demo instances: labels `p0..p{n-1}`.
pub fn space_from_matrix(matrix: Vec<Vec<f64>>) -> Result<FiniteMetricSpace, MetricError> {
    let labels = (0..matrix.len()).map(|i| format!("p{i}")).collect();
    FiniteMetricSpace::from_matrix(labels, matrix)
}
