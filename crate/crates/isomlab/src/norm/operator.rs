//! Linear maps between normed spaces and net-based operator-norm brackets.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::linalg;
use super::net::SphereNet;
use super::NormDescriptor;

/// Errors from operator-norm computations.
#[derive(Clone, Debug, Error)]
pub enum OperatorError {
    #[error("matrix is {rows}x{cols} but domain dim is {domain} and codomain dim is {codomain}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        domain: usize,
        codomain: usize,
    },
    #[error("net covers the sphere of a {net_dim}-dimensional norm, domain is {domain}-dimensional")]
    NetDomainMismatch { net_dim: usize, domain: usize },
    #[error("net is on a different norm than the map's domain")]
    NetNormMismatch,
    #[error("net covering radius {eps} must be below 1 for an upper bound")]
    EpsTooCoarse { eps: f64 },
    #[error("matrix must be non-empty and rectangular")]
    MalformedMatrix,
}

/// A linear map with explicit domain and codomain norms.
///
/// Wire format carries the matrix only (`{"matrix": [[...], ...]}`, row
/// major, `codomain.dim x domain.dim`); norms are attached by context.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMap {
    matrix: Vec<Vec<f64>>,
    domain: NormDescriptor,
    codomain: NormDescriptor,
}

/// Wire format for [`LinearMap`].
#[derive(Serialize, Deserialize)]
pub struct WireMatrix {
    #[serde(with = "crate::real::matrix")]
    pub matrix: Vec<Vec<f64>>,
}

impl LinearMap {
    /// Builds a map, checking the matrix shape against the two norms.
    pub fn new(
        matrix: Vec<Vec<f64>>,
        domain: NormDescriptor,
        codomain: NormDescriptor,
    ) -> Result<Self, OperatorError> {
        let rows = matrix.len();
        if rows == 0 || matrix.iter().any(|r| r.len() != matrix[0].len()) {
            return Err(OperatorError::MalformedMatrix);
        }
        let cols = matrix[0].len();
        if rows != codomain.dim() || cols != domain.dim() {
            return Err(OperatorError::ShapeMismatch {
                rows,
                cols,
                domain: domain.dim(),
                codomain: codomain.dim(),
            });
        }
        Ok(LinearMap {
            matrix,
            domain,
            codomain,
        })
    }

    /// Identity on a space.
    pub fn identity(norm: NormDescriptor) -> Self {
        let dim = norm.dim();
        let matrix = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        LinearMap {
            matrix,
            domain: norm.clone(),
            codomain: norm,
        }
    }

    pub fn matrix(&self) -> &Vec<Vec<f64>> {
        &self.matrix
    }

    pub fn domain(&self) -> &NormDescriptor {
        &self.domain
    }

    pub fn codomain(&self) -> &NormDescriptor {
        &self.codomain
    }

    /// Applies the map.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        linalg::mat_vec(&self.matrix, v)
    }

    /// The inverse map (square matrices only); `None` when singular.
    pub fn inverse(&self) -> Option<LinearMap> {
        if self.matrix.len() != self.matrix[0].len() {
            return None;
        }
        let inv = linalg::invert(&self.matrix)?;
        Some(LinearMap {
            matrix: inv,
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
        })
    }

    /// Wire form (matrix only).
    pub fn to_wire(&self) -> WireMatrix {
        WireMatrix {
            matrix: self.matrix.clone(),
        }
    }
}

/// Net-based operator-norm bracket `(lower, upper)`.
///
/// `lower` is the exact maximum of `||T v||` over the net points (all of
/// norm 1 up to 1e-12). For a net of covering radius `eps < 1` the true
/// norm obeys `||T|| <= lower * (1 + eps) / (1 - eps)`: any unit `u` has a
/// net point `v` within `eps`, so
/// `||Tu|| <= ||Tv|| + ||T|| eps <= lower + ||T|| eps`, giving
/// `||T|| <= lower / (1 - eps) <= lower (1 + eps) / (1 - eps)`.
///
/// Between Euclidean spaces the exact value is the largest singular value;
/// in debug builds the bracket is checked to contain it.
pub fn operator_norm(map: &LinearMap, net: &SphereNet) -> Result<(f64, f64), OperatorError> {
    if net.norm().dim() != map.domain().dim() {
        return Err(OperatorError::NetDomainMismatch {
            net_dim: net.norm().dim(),
            domain: map.domain().dim(),
        });
    }
    if net.norm() != map.domain() {
        return Err(OperatorError::NetNormMismatch);
    }
    let eps = net.epsilon();
    if !(eps < 1.0) {
        return Err(OperatorError::EpsTooCoarse { eps });
    }
    let codomain = map.codomain();
    let lower = net
        .points()
        .iter()
        .map(|v| codomain.eval_unchecked(&map.apply(v)))
        .fold(0.0f64, f64::max);
    let upper = lower * (1.0 + eps) / (1.0 - eps);

    #[cfg(debug_assertions)]
    if map.domain().is_lp(2.0) && codomain.is_lp(2.0) {
        let sigma = linalg::largest_singular_value(&map.matrix);
        debug_assert!(
            lower <= sigma + 1e-9 && sigma <= upper + 1e-9,
            "operator-norm bracket [{lower}, {upper}] must contain the singular value {sigma}"
        );
    }

    Ok((lower, upper))
}
