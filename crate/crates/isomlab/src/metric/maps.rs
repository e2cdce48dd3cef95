//! Maps and correspondences between finite metric spaces, with their
//! distortion functionals.
//!
//! For `f : X -> Y` the *distortion* is the worst additive defect
//! `max |d_Y(f(x), f(x')) - d_X(x, x')|` over point pairs. For a pair of
//! opposite maps `f : X -> Y`, `g : Y -> X` the *codistortion* couples the
//! two directions: `max |d_Y(f(x), y) - d_X(x, g(y))|` over `(x, y)`.
//! A *correspondence* is a relation covering both sides; its distortion is
//! the worst defect over pairs of related pairs. These three functionals are
//! the raw material of every Gromov–Hausdorff formulation in [`super::gh`].

use serde::{Deserialize, Serialize};

use super::{FiniteMetricSpace, MetricError};

/// A pair of opposite maps between two spaces, stored as index tables.
///
/// `fwd[i]` is the image in `Y` of point `i` of `X`; `bwd[j]` the image in
/// `X` of point `j` of `Y`. Both tables are total.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapPair {
    pub fwd: Vec<usize>,
    pub bwd: Vec<usize>,
}

impl MapPair {
    /// Validates table sizes and ranges against the two spaces.
    pub fn validate(
        &self,
        x: &FiniteMetricSpace,
        y: &FiniteMetricSpace,
    ) -> Result<(), MetricError> {
        check_map(&self.fwd, x.len(), y.len())?;
        check_map(&self.bwd, y.len(), x.len())
    }

    /// The correspondence induced by the two graphs
    /// `{(i, fwd[i])} ∪ {(bwd[j], j)}`, sorted and deduplicated.
    pub fn induced_correspondence(&self) -> Correspondence {
        let mut pairs: Vec<(usize, usize)> = self
            .fwd
            .iter()
            .enumerate()
            .map(|(i, &fi)| (i, fi))
            .chain(self.bwd.iter().enumerate().map(|(j, &gj)| (gj, j)))
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        Correspondence { pairs }
    }
}

fn check_map(map: &[usize], domain: usize, codomain: usize) -> Result<(), MetricError> {
    if map.len() != domain {
        return Err(MetricError::MapSizeMismatch {
            got: map.len(),
            expected: domain,
        });
    }
    if let Some(&bad) = map.iter().find(|&&v| v >= codomain) {
        return Err(MetricError::MapValueOutOfBounds {
            value: bad,
            size: codomain,
        });
    }
    Ok(())
}

/// A relation between two spaces that covers both point sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Correspondence {
    /// Related index pairs `(i, j)`, sorted lexicographically.
    pub pairs: Vec<(usize, usize)>,
}

impl Correspondence {
    /// Builds from a pair list, sorting, deduplicating, and checking that
    /// every point of both spaces is covered.
    pub fn new(
        mut pairs: Vec<(usize, usize)>,
        x: &FiniteMetricSpace,
        y: &FiniteMetricSpace,
    ) -> Result<Self, MetricError> {
        pairs.sort_unstable();
        pairs.dedup();
        let mut x_covered = vec![false; x.len()];
        let mut y_covered = vec![false; y.len()];
        for &(i, j) in &pairs {
            if i >= x.len() {
                return Err(MetricError::IndexOutOfBounds {
                    index: i,
                    size: x.len(),
                });
            }
            if j >= y.len() {
                return Err(MetricError::IndexOutOfBounds {
                    index: j,
                    size: y.len(),
                });
            }
            x_covered[i] = true;
            y_covered[j] = true;
        }
        if let Some(miss) = x_covered.iter().position(|&c| !c) {
            return Err(MetricError::NotACorrespondence {
                reason: format!("left point {miss} is unmatched"),
            });
        }
        if let Some(miss) = y_covered.iter().position(|&c| !c) {
            return Err(MetricError::NotACorrespondence {
                reason: format!("right point {miss} is unmatched"),
            });
        }
        Ok(Correspondence { pairs })
    }

    /// Distortion of the relation: the worst additive defect over pairs of
    /// related pairs, `max |d_X(i, i') - d_Y(j, j')|`.
    pub fn distortion(&self, x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> f64 {
        let mut worst = 0.0f64;
        for (a, &(i1, j1)) in self.pairs.iter().enumerate() {
            for &(i2, j2) in &self.pairs[a + 1..] {
                worst = worst.max((x.d(i1, i2) - y.d(j1, j2)).abs());
            }
        }
        worst
    }
}

/// Distortion of a single map given as an index table `fwd : X -> Y`.
pub fn distortion(
    fwd: &[usize],
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
) -> Result<f64, MetricError> {
    check_map(fwd, x.len(), y.len())?;
    let mut worst = 0.0f64;
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            worst = worst.max((y.d(fwd[i], fwd[j]) - x.d(i, j)).abs());
        }
    }
    Ok(worst)
}

/// Codistortion of a map pair:
/// `max over (x, y) of |d_Y(f(x), y) - d_X(x, g(y))|`.
///
/// Swapping the roles of the two maps and the two spaces leaves the value
/// unchanged, which the tests pin down.
pub fn codistortion(
    pair: &MapPair,
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
) -> Result<f64, MetricError> {
    pair.validate(x, y)?;
    let mut worst = 0.0f64;
    for i in 0..x.len() {
        for j in 0..y.len() {
            worst = worst.max((y.d(pair.fwd[i], j) - x.d(i, pair.bwd[j])).abs());
        }
    }
    Ok(worst)
}
