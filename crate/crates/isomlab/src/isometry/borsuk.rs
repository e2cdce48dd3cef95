//! Antipodal-collapse witnesses and distance-to-slice measurements.
//!
//! When a continuous map drops dimension, some pair of antipodal points on
//! any sphere must land (almost) together; finding such a pair certifies a
//! large distortion, because the pair is `2R` apart in the domain while its
//! images nearly coincide. This module searches for the collapsing
//! direction (net scan plus local descent) and, separately, measures how
//! far a map's image drifts from an affine slice of the codomain.

use serde::Serialize;

use super::{ball_probes, IsometryError, MapFormula};
use crate::norm::net::SphereNet;
use crate::norm::{linalg, NormDescriptor};
use crate::optim::{
    child_seed, mixed_proposal, perturbation_descent, rng_from_seed, DescentSchedule,
};

/// A near-collapsing antipodal pair and the distortion it certifies.
#[derive(Clone, Debug, Serialize)]
pub struct BorsukWitness {
    /// Point on the radius-`R` sphere whose antipode lands nearby.
    #[serde(with = "crate::real::vector")]
    pub point: Vec<f64>,
    /// Achieved image gap `‖f(v) - f(-v)‖`.
    #[serde(with = "crate::real")]
    pub gap: f64,
    /// Certified lower bound `2R - gap` on the map's distortion: the pair
    /// `(v, -v)` is `2R` apart but its images are only `gap` apart.
    #[serde(with = "crate::real")]
    pub distortion_lb: f64,
}

/// Searches the radius-`radius` sphere for a direction whose antipodal
/// image gap is smallest.
///
/// Requires the domain dimension to exceed the codomain dimension — that
/// is the regime where a collapse is guaranteed for continuous maps — and
/// a net on the domain norm to seed the search. The net's best point is
/// refined by perturbation descent with renormalisation onto the sphere.
/// The search seed is fixed, so the result is a function of the inputs.
pub fn borsuk_witness(
    f: &MapFormula,
    radius: f64,
    net: &SphereNet,
) -> Result<BorsukWitness, IsometryError> {
    let domain = f.domain().clone();
    let codomain = f.codomain().clone();
    if domain.dim() <= codomain.dim() {
        return Err(IsometryError::NoDimensionDrop {
            domain: domain.dim(),
            codomain: codomain.dim(),
        });
    }
    if net.norm() != &domain {
        return Err(IsometryError::NetMismatch);
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(IsometryError::BadRadius(radius));
    }

    let gap_at = |unit: &[f64]| -> f64 {
        let plus: Vec<f64> = unit.iter().map(|x| x * radius).collect();
        let minus: Vec<f64> = unit.iter().map(|x| -x * radius).collect();
        let image_plus = f.eval(&plus);
        let image_minus = f.eval(&minus);
        let diff: Vec<f64> = image_plus
            .iter()
            .zip(&image_minus)
            .map(|(a, b)| a - b)
            .collect();
        codomain.eval_unchecked(&diff)
    };

    let (start_idx, _) = net
        .points()
        .iter()
        .enumerate()
        .map(|(i, p)| (i, gap_at(p)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .expect("nets are non-empty");
    let start = net.points()[start_idx].clone();

    let renormalize = |v: &mut Vec<f64>| {
        let n = domain.eval_unchecked(v);
        if n > 1e-9 {
            for slot in v.iter_mut() {
                *slot /= n;
            }
        } else {
            for slot in v.iter_mut() {
                *slot = 0.0;
            }
            v[0] = 1.0 / domain.eval_unchecked(&unit_vector(domain.dim()));
        }
    };

    let mut rng = rng_from_seed(0xb0b0);
    let refined = perturbation_descent(
        start,
        DescentSchedule::fine(0.2),
        &mut rng,
        |unit| gap_at(unit),
        mixed_proposal,
        renormalize,
    );

    let gap = refined.value;
    Ok(BorsukWitness {
        point: refined.point.iter().map(|x| x * radius).collect(),
        gap,
        distortion_lb: 2.0 * radius - gap,
    })
}

fn unit_vector(dim: usize) -> Vec<f64> {
    let mut e = vec![0.0; dim];
    e[0] = 1.0;
    e
}

/// One radius of an affine-deviation sweep.
#[derive(Clone, Debug, Serialize)]
pub struct DeviationRow {
    /// Probe ball radius in the domain.
    #[serde(with = "crate::real")]
    pub radius: f64,
    /// Largest measured distance from an image point to the subspace.
    #[serde(with = "crate::real")]
    pub deviation: f64,
}

/// Distance (in `w`) from `y` to the affine set `offset + span(basis)`,
/// by least-squares start plus descent over the span coefficients.
fn distance_to_affine(
    y: &[f64],
    offset: &[f64],
    basis: &[Vec<f64>],
    w: &NormDescriptor,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> f64 {
    let shifted: Vec<f64> = y.iter().zip(offset).map(|(a, b)| a - b).collect();
    if basis.is_empty() {
        return w.eval_unchecked(&shifted);
    }
    let k = basis.len();

    // Euclidean least squares gives the exact minimiser when `w` is the
    // Euclidean norm and a strong starting point otherwise.
    let mut gram = vec![vec![0.0f64; k]; k];
    let mut rhs = vec![0.0f64; k];
    for i in 0..k {
        for j in 0..k {
            gram[i][j] = basis[i].iter().zip(&basis[j]).map(|(a, b)| a * b).sum();
        }
        rhs[i] = basis[i].iter().zip(&shifted).map(|(a, b)| a * b).sum();
    }
    let start = match linalg::invert(&gram) {
        Some(inv) => linalg::mat_vec(&inv, &rhs),
        None => vec![0.0; k],
    };

    let residual_norm = |coeffs: &[f64]| -> f64 {
        let mut r = shifted.clone();
        for (c, b) in coeffs.iter().zip(basis) {
            for (slot, x) in r.iter_mut().zip(b) {
                *slot -= c * x;
            }
        }
        w.eval_unchecked(&r)
    };

    let scale = 0.5 * w.eval_unchecked(&shifted).max(1.0);
    let refined = perturbation_descent(
        start,
        DescentSchedule::fine(scale),
        rng,
        |c| residual_norm(c),
        mixed_proposal,
        |_| {},
    );
    refined.value
}

/// Largest distance from the image of a radius-`R` probe ball to the
/// affine subspace `offset + span(basis)` of the codomain, for each radius.
///
/// The subspace must be a proper subspace; distance per probe is computed
/// by minimising over the span coefficients (least-squares start, then the
/// shared fixed-schedule descent). Each reported number is an upper bound
/// on the true distance per probe and a lower bound on the supremum over
/// the full ball.
pub fn affine_deviation(
    f: &MapFormula,
    basis: &[Vec<f64>],
    offset: &[f64],
    radii: &[f64],
    sample: usize,
    seed: u64,
) -> Result<Vec<DeviationRow>, IsometryError> {
    let codomain = f.codomain().clone();
    if basis.len() >= codomain.dim() {
        return Err(IsometryError::SubspaceTooLarge {
            subspace: basis.len(),
            space: codomain.dim(),
        });
    }
    if offset.len() != codomain.dim() {
        return Err(IsometryError::DimensionMismatch {
            expected: codomain.dim(),
            got: offset.len(),
        });
    }
    for b in basis {
        if b.len() != codomain.dim() {
            return Err(IsometryError::DimensionMismatch {
                expected: codomain.dim(),
                got: b.len(),
            });
        }
    }
    for &r in radii {
        if !(r.is_finite() && r > 0.0) {
            return Err(IsometryError::BadRadius(r));
        }
    }

    let domain = f.domain().clone();
    let mut rows = Vec::with_capacity(radii.len());
    for (idx, &radius) in radii.iter().enumerate() {
        let probes = ball_probes(&domain, radius, sample, child_seed(seed, idx as u64));
        let mut rng = rng_from_seed(child_seed(seed, 0x6465_7600 + idx as u64));
        let mut deviation = 0.0f64;
        for probe in &probes {
            let image = f.eval(probe);
            deviation =
                deviation.max(distance_to_affine(&image, offset, basis, &codomain, &mut rng));
        }
        rows.push(DeviationRow { radius, deviation });
    }
    Ok(rows)
}
