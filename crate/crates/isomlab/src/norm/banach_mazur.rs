//! Multiplicative-distance estimation between normed spaces of equal
//! dimension, plus a sampled-ball comparison report.
//!
//! The distance estimated here is `log inf_T ‖T‖·‖T⁻¹‖` over invertible
//! linear maps `T` between the two spaces. The infimum is non-convex, so
//! the estimate is produced by multi-start perturbation descent over
//! matrices and is an *upper* estimate of the true distance up to the
//! net-induced measurement error carried in [`BmEstimate::value_upper`].

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::metric::gh::{gh_branch_and_bound, DEFAULT_NODE_BUDGET};
use crate::metric::{FiniteMetricSpace, MetricError};
use crate::norm::net::{sample_ball_point, sphere_net, NetError, SphereNet};
use crate::norm::operator::{operator_norm, LinearMap, OperatorError};
use crate::norm::{linalg, NormDescriptor};
use crate::optim::{
    child_seed, gaussian, perturbation_descent, rng_from_seed, stable_hash, DescentSchedule,
};

/// Failures of the distance estimator.
#[derive(Debug, Error)]
pub enum BmError {
    /// At least one restart is required.
    #[error("at least one restart is required")]
    NoRestarts,
    /// Every restart ended on a singular matrix (pathological).
    #[error("all {0} restarts ended on singular matrices")]
    AllSingular(u32),
    /// Sphere-net construction failed.
    #[error(transparent)]
    Net(#[from] NetError),
    /// Operator-norm evaluation failed.
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// Result of [`banach_mazur_estimate`].
///
/// `value` is the measured objective `max(0, ln(‖T‖·‖T⁻¹‖))` at the best
/// matrix found, evaluated with net *lower* operator norms; `value_upper`
/// re-evaluates it with the bracket uppers, so `value_upper - value` is the
/// net-induced error bar. The floor at zero is sound because the product of
/// the operator norms of mutually inverse maps is at least one (their
/// composition is the identity); a negative measured logarithm can only be
/// net undersampling.
#[derive(Clone, Debug, Serialize)]
pub struct BmEstimate {
    /// Measured objective at the reported witness (net lower norms).
    #[serde(with = "crate::real")]
    pub value: f64,
    /// Same objective evaluated with the bracket upper norms.
    #[serde(with = "crate::real")]
    pub value_upper: f64,
    /// Declared covering radius of the sphere nets used.
    #[serde(with = "crate::real")]
    pub net_epsilon: f64,
    /// Number of descent restarts executed.
    pub restarts_used: u32,
    /// Best matrix found, as a map from the first space to the second;
    /// absent when the spaces have different dimensions.
    #[serde(serialize_with = "serialize_witness")]
    pub witness: Option<LinearMap>,
}

impl BmEstimate {
    /// Width of the net-induced error bar.
    pub fn error_bar(&self) -> f64 {
        if self.value.is_finite() && self.value_upper.is_finite() {
            self.value_upper - self.value
        } else {
            0.0
        }
    }
}

fn serialize_witness<S: Serializer>(
    witness: &Option<LinearMap>,
    serializer: S,
) -> Result<S::Ok, S::Error> {
    match witness {
        Some(map) => map.to_wire().serialize(serializer),
        None => serializer.serialize_none(),
    }
}

/// Default net covering radius per dimension.
///
/// Dimension 2 uses a fine net so that the two-sided measurement error
/// `2·eps/(1-eps)` stays below 1e-2, tight enough for golden-value
/// comparisons; dimension 3 trades accuracy for net size. Dimension 1
/// spheres are exact two-point sets, so the radius only affects the
/// reported bracket width.
pub fn default_net_epsilon(dim: usize) -> f64 {
    match dim {
        0 | 1 => 1e-9,
        2 => 0.0035,
        3 => 0.08,
        _ => 0.25,
    }
}

fn identity_flat(dim: usize) -> Vec<f64> {
    let mut flat = vec![0.0; dim * dim];
    for i in 0..dim {
        flat[i * dim + i] = 1.0;
    }
    flat
}

fn unflatten(flat: &[f64], dim: usize) -> Vec<Vec<f64>> {
    (0..dim).map(|r| flat[r * dim..(r + 1) * dim].to_vec()).collect()
}

/// Largest image norm over the net points: the net lower operator norm.
fn sup_image_norm(matrix: &[Vec<f64>], net: &SphereNet, codomain: &NormDescriptor) -> f64 {
    net.points()
        .iter()
        .map(|p| codomain.eval_unchecked(&linalg::mat_vec(matrix, p)))
        .fold(0.0, f64::max)
}

/// Applies a plane rotation by `angle` in coordinates `(i, j)` to the
/// matrix, on the left (mixing rows) or the right (mixing columns).
fn rotate_flat(flat: &mut [f64], dim: usize, i: usize, j: usize, angle: f64, left: bool) {
    let (sin, cos) = angle.sin_cos();
    for k in 0..dim {
        let (a, b) = if left {
            (flat[i * dim + k], flat[j * dim + k])
        } else {
            (flat[k * dim + i], flat[k * dim + j])
        };
        let na = cos * a - sin * b;
        let nb = sin * a + cos * b;
        if left {
            flat[i * dim + k] = na;
            flat[j * dim + k] = nb;
        } else {
            flat[k * dim + i] = na;
            flat[k * dim + j] = nb;
        }
    }
}

/// Proposal kernel for matrix descent: single-entry nudges, whole-matrix
/// Gaussian noise, and left/right plane rotations. Rotations matter because
/// the objective is scale-invariant — from an identity start the optimum is
/// often a pure rotation away.
fn propose_matrix(current: &[f64], step: f64, dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut candidate = current.to_vec();
    let kind = if dim >= 2 { rng.gen_range(0..4u8) } else { 0 };
    match kind {
        0 => {
            let idx = rng.gen_range(0..candidate.len());
            candidate[idx] += step * gaussian(rng);
        }
        1 => {
            let scale = step / dim as f64;
            for slot in candidate.iter_mut() {
                *slot += scale * gaussian(rng);
            }
        }
        _ => {
            let i = rng.gen_range(0..dim);
            let mut j = rng.gen_range(0..dim - 1);
            if j >= i {
                j += 1;
            }
            let (i, j) = (i.min(j), i.max(j));
            let angle = 0.5 * step * gaussian(rng);
            rotate_flat(&mut candidate, dim, i, j, angle, kind == 2);
        }
    }
    candidate
}

fn random_invertible_flat(dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    for _ in 0..64 {
        let flat: Vec<f64> = (0..dim * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if linalg::det(&unflatten(&flat, dim)).abs() > 0.05 {
            return flat;
        }
    }
    identity_flat(dim)
}

/// Estimates the multiplicative distance between `v` and `w`.
///
/// Spaces of different dimensions are never isomorphic, so the estimate is
/// reported as infinite with no witness. Otherwise the objective
/// `ln(‖T‖·‖T⁻¹‖)` (norms measured as net lowers, singular matrices scored
/// as infinite, result floored at zero) is minimised by perturbation
/// descent from the identity plus `restarts - 1` seeded random invertible
/// starts, followed by a fine polish from the best start. Restarts run in
/// parallel; the winner is the minimum value with ties broken by the lowest
/// restart index, so the result does not depend on thread count.
pub fn banach_mazur_estimate(
    v: &NormDescriptor,
    w: &NormDescriptor,
    restarts: u32,
    seed: u64,
) -> Result<BmEstimate, BmError> {
    if restarts == 0 {
        return Err(BmError::NoRestarts);
    }
    let dim = v.dim();
    if dim != w.dim() {
        return Ok(BmEstimate {
            value: f64::INFINITY,
            value_upper: f64::INFINITY,
            net_epsilon: default_net_epsilon(dim.max(w.dim())),
            restarts_used: 0,
            witness: None,
        });
    }

    let eps = default_net_epsilon(dim);
    let net_v = sphere_net(v, eps, child_seed(seed, 0x6e65_7456))?;
    let net_w = sphere_net(w, eps, child_seed(seed, 0x6e65_7457))?;

    let objective = |flat: &[f64]| -> f64 {
        let matrix = unflatten(flat, dim);
        let inverse = match linalg::invert(&matrix) {
            Some(inv) => inv,
            None => return f64::INFINITY,
        };
        let low_fwd = sup_image_norm(&matrix, &net_v, w);
        let low_bwd = sup_image_norm(&inverse, &net_w, v);
        let product = low_fwd * low_bwd;
        if product.is_finite() && product > 0.0 {
            product.ln().max(0.0)
        } else {
            f64::INFINITY
        }
    };

    let runs: Vec<(f64, Vec<f64>)> = (0..restarts)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng_from_seed(child_seed(seed, 1000 + u64::from(k)));
            let start = if k == 0 {
                identity_flat(dim)
            } else {
                random_invertible_flat(dim, &mut rng)
            };
            let result = perturbation_descent(
                start,
                DescentSchedule::banach_mazur(),
                &mut rng,
                |flat| objective(flat),
                |current, step, rng| propose_matrix(current, step, dim, rng),
                |_| {},
            );
            (result.value, result.point)
        })
        .collect();

    let (best_value, best_point) = runs
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("at least one restart ran");
    if !best_value.is_finite() {
        return Err(BmError::AllSingular(restarts));
    }

    let mut polish_rng = rng_from_seed(child_seed(seed, 0x706f_6c69));
    let polished = perturbation_descent(
        best_point,
        DescentSchedule::fine(0.05),
        &mut polish_rng,
        |flat| objective(flat),
        |current, step, rng| propose_matrix(current, step, dim, rng),
        |_| {},
    );

    let matrix = unflatten(&polished.point, dim);
    let inverse = linalg::invert(&matrix).expect("polished matrix stayed invertible");
    let fwd = LinearMap::new(matrix, v.clone(), w.clone())
        .expect("matrix shape matches the descent dimension");
    let bwd = LinearMap::new(inverse, w.clone(), v.clone())
        .expect("inverse shape matches the descent dimension");
    let (low_fwd, up_fwd) = operator_norm(&fwd, &net_v)?;
    let (low_bwd, up_bwd) = operator_norm(&bwd, &net_w)?;
    let value = (low_fwd * low_bwd).ln().max(0.0);
    let value_upper = (up_fwd * up_bwd).ln().max(value);

    Ok(BmEstimate {
        value,
        value_upper,
        net_epsilon: eps,
        restarts_used: restarts,
        witness: Some(fwd),
    })
}

/// Failures of [`kadets_gh_relation_report`].
#[derive(Debug, Error)]
pub enum KadetsError {
    /// Sample sizes outside `2..=64` are rejected.
    #[error("sample size {0} is outside the supported range 2..=64")]
    BadSampleSize(usize),
    /// Dimensions above 3 are rejected (solver budgets are sized for ≤3).
    #[error("dimension {0} exceeds the supported maximum of 3")]
    DimensionTooLarge(usize),
    /// Sampled points failed metric validation.
    #[error(transparent)]
    Metric(#[from] MetricError),
    /// The embedded distance estimate failed.
    #[error(transparent)]
    Bm(#[from] BmError),
}

/// Comparison of two unit balls through finite samples.
///
/// `gh_lower`/`gh_upper` bracket the distance between the *sampled* finite
/// subsets of the two balls; [`KadetsReport::limitation`] spells out that
/// this estimates, but does not certify, the distance between the full
/// balls — and that the ball-matching infimum distance itself is not
/// computed at all.
#[derive(Clone, Debug, Serialize)]
pub struct KadetsReport {
    /// Points sampled in each unit ball.
    pub sample_count: usize,
    /// Seed the sample streams were derived from.
    pub seed: u64,
    /// Lower end of the sampled distance bracket.
    #[serde(with = "crate::real")]
    pub gh_lower: f64,
    /// Upper end of the sampled distance bracket.
    #[serde(with = "crate::real")]
    pub gh_upper: f64,
    /// True when the bracket collapsed to an exact value within budget.
    pub gh_exact: bool,
    /// Linear-isomorphism distance context between the ambient spaces.
    pub bm: BmEstimate,
    /// Scope statement for the numbers above.
    pub limitation: &'static str,
}

fn sample_ball_space(
    norm: &NormDescriptor,
    count: usize,
    seed: u64,
    prefix: &str,
) -> Result<FiniteMetricSpace, MetricError> {
    let mut rng = rng_from_seed(seed);
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(count);
    while points.len() < count {
        let candidate = sample_ball_point(norm, &mut rng);
        let distinct = points.iter().all(|p| {
            norm.eval_unchecked(
                &p.iter().zip(&candidate).map(|(a, b)| a - b).collect::<Vec<_>>(),
            ) > 1e-9
        });
        if distinct {
            points.push(candidate);
        }
    }
    let labels = (0..count).map(|i| format!("{prefix}{i}")).collect();
    FiniteMetricSpace::from_points(labels, &points, norm)
}

/// Samples the unit balls of `v` and `w`, brackets the distance between the
/// sampled finite spaces, and attaches the linear-isomorphism distance
/// between the ambient spaces as context.
///
/// Sample streams are keyed by a hash of each space's description, so
/// `v == w` produces bit-identical samples and a bracket that collapses to
/// zero — the correct value for identical balls.
pub fn kadets_gh_relation_report(
    v: &NormDescriptor,
    w: &NormDescriptor,
    sample: usize,
    seed: u64,
) -> Result<KadetsReport, KadetsError> {
    if !(2..=64).contains(&sample) {
        return Err(KadetsError::BadSampleSize(sample));
    }
    for norm in [v, w] {
        if norm.dim() > 3 {
            return Err(KadetsError::DimensionTooLarge(norm.dim()));
        }
    }

    let key_v = stable_hash(
        serde_json::to_string(v)
            .expect("norm descriptors serialize")
            .as_bytes(),
    );
    let key_w = stable_hash(
        serde_json::to_string(w)
            .expect("norm descriptors serialize")
            .as_bytes(),
    );
    let space_v = sample_ball_space(v, sample, child_seed(seed, key_v), "b")?;
    let space_w = sample_ball_space(w, sample, child_seed(seed, key_w), "b")?;

    let bracket = gh_branch_and_bound(&space_v, &space_w, DEFAULT_NODE_BUDGET);
    let bm = banach_mazur_estimate(v, w, 4, child_seed(seed, 0x626d))?;

    Ok(KadetsReport {
        sample_count: sample,
        seed,
        gh_lower: bracket.lower,
        gh_upper: bracket.upper,
        gh_exact: bracket.is_exact(),
        bm,
        limitation: "bracket applies to the sampled finite subsets of the unit balls; \
                     the distance between the full balls is estimated, not certified, \
                     and the common-ambient-embedding distance is not computed",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norm::builtin_norms;

    #[test]
    fn identity_pair_estimates_zero() {
        let l2 = NormDescriptor::l2(2);
        let est = banach_mazur_estimate(&l2, &l2, 1, 5).unwrap();
        assert!(est.value <= 1e-6, "self distance measured {}", est.value);
        assert!(est.witness.is_some());
        assert!(est.value_upper >= est.value);
        assert!(est.error_bar() >= 0.0);
    }

    #[test]
    fn hadamard_matrix_is_an_exact_isometry_from_l1_to_linf() {
        let l1 = NormDescriptor::l1(2);
        let linf = NormDescriptor::linf(2);
        let map = LinearMap::new(
            vec![vec![1.0, 1.0], vec![1.0, -1.0]],
            l1.clone(),
            linf.clone(),
        )
        .unwrap();
        let net = sphere_net(&l1, 0.01, 77).unwrap();
        let (lower, _upper) = operator_norm(&map, &net).unwrap();
        assert!(
            (lower - 1.0).abs() <= 1e-9,
            "forward sup on the sphere was {lower}"
        );
        let inv = map.inverse().unwrap();
        let net_back = sphere_net(&linf, 0.01, 78).unwrap();
        let (lower_back, _) = operator_norm(&inv, &net_back).unwrap();
        assert!(
            (lower_back - 1.0).abs() <= 1e-9,
            "backward sup on the sphere was {lower_back}"
        );
    }

    #[test]
    fn plane_l1_and_linf_are_isometric_to_the_optimizer() {
        let l1 = NormDescriptor::l1(2);
        let linf = NormDescriptor::linf(2);
        let est = banach_mazur_estimate(&l1, &linf, 8, 11).unwrap();
        assert!(
            est.value <= 1e-3,
            "optimizer should find the isometry; measured {}",
            est.value
        );
    }

    #[test]
    fn euclidean_to_l1_matches_the_sharp_planar_value() {
        let est = banach_mazur_estimate(&NormDescriptor::l2(2), &NormDescriptor::l1(2), 8, 3)
            .unwrap();
        let expected = 2.0f64.sqrt().ln();
        assert!(
            (est.value - expected).abs() <= 1e-2,
            "measured {} expected {expected}",
            est.value
        );
    }

    #[test]
    fn incomparable_dimensions_report_infinite_distance() {
        let est = banach_mazur_estimate(&NormDescriptor::l2(2), &NormDescriptor::l2(3), 4, 7)
            .unwrap();
        assert!(est.value.is_infinite());
        assert!(est.value_upper.is_infinite());
        assert!(est.witness.is_none());
        assert_eq!(est.restarts_used, 0);
    }

    #[test]
    fn zero_restarts_is_rejected() {
        let err = banach_mazur_estimate(&NormDescriptor::l2(2), &NormDescriptor::l2(2), 0, 1);
        assert!(matches!(err, Err(BmError::NoRestarts)));
    }

    #[test]
    fn estimate_is_symmetric_within_net_noise() {
        let l1 = NormDescriptor::l1(2);
        let l2 = NormDescriptor::l2(2);
        let ab = banach_mazur_estimate(&l1, &l2, 6, 19).unwrap();
        let ba = banach_mazur_estimate(&l2, &l1, 6, 19).unwrap();
        let tolerance = 2.0 * (ab.error_bar().max(ba.error_bar()) + 1e-3);
        assert!(
            (ab.value - ba.value).abs() <= tolerance,
            "asymmetry {} exceeds {tolerance}",
            (ab.value - ba.value).abs()
        );
    }

    #[test]
    fn one_dimensional_spaces_are_all_isometric() {
        let est = banach_mazur_estimate(&NormDescriptor::l1(1), &NormDescriptor::linf(1), 2, 13)
            .unwrap();
        assert!(est.value <= 1e-9, "measured {}", est.value);
    }

    #[test]
    fn self_distance_is_zero_for_every_builtin_plane_norm() {
        for (name, norm) in builtin_norms(2) {
            let est = banach_mazur_estimate(&norm, &norm, 1, 23).unwrap();
            assert!(
                est.value <= 1e-6,
                "self distance for {name} measured {}",
                est.value
            );
        }
    }

    #[test]
    fn kadets_report_on_identical_spaces_gives_zero_lower_bound() {
        let l2 = NormDescriptor::l2(2);
        let report = kadets_gh_relation_report(&l2, &l2, 12, 9).unwrap();
        assert_eq!(report.gh_lower, 0.0);
        assert_eq!(report.gh_upper, 0.0);
        assert!(report.gh_exact);
        assert!(report.bm.value <= 1e-6);
    }

    #[test]
    fn kadets_report_flags_diameter_gap_between_scaled_balls() {
        let linf = NormDescriptor::linf(2);
        let double = NormDescriptor::polytope(vec![vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        let report = kadets_gh_relation_report(&linf, &double, 32, 21).unwrap();
        assert!(
            report.gh_lower > 0.0,
            "differently sized balls must separate; lower was {}",
            report.gh_lower
        );
        assert!(report.gh_lower <= report.gh_upper);
        // Scaling is a linear isometry, so the ambient-space distance stays 0.
        assert!(report.bm.value <= 1e-3, "bm measured {}", report.bm.value);
    }

    #[test]
    fn kadets_report_brackets_are_ordered_across_dimensions() {
        let report =
            kadets_gh_relation_report(&NormDescriptor::l2(2), &NormDescriptor::l1(3), 20, 33)
                .unwrap();
        assert!(report.gh_lower <= report.gh_upper);
        assert!(report.bm.value.is_infinite());
    }

    #[test]
    fn kadets_report_rejects_oversized_requests() {
        let l2 = NormDescriptor::l2(2);
        assert!(matches!(
            kadets_gh_relation_report(&l2, &l2, 65, 1),
            Err(KadetsError::BadSampleSize(65))
        ));
        assert!(matches!(
            kadets_gh_relation_report(&l2, &l2, 1, 1),
            Err(KadetsError::BadSampleSize(1))
        ));
        let l2_4 = NormDescriptor::l2(4);
        assert!(matches!(
            kadets_gh_relation_report(&l2_4, &l2_4, 8, 1),
            Err(KadetsError::DimensionTooLarge(4))
        ));
    }
}
