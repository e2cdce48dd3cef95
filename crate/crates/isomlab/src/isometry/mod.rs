//! Almost-isometric maps between normed spaces: construction, sampling,
//! and diagnostics.
//!
//! The central objects are formula-backed maps (evaluable at any point)
//! and sampled maps (finite lists of domain/image points). The headline
//! construction lifts a space `V` into the product `V ⊕ ℝ` by
//! `v ↦ (v, φ(‖v‖))` for a chosen scalar profile `φ`; depending on `φ`
//! this is an exact nonlinear isometry, a small-distortion map, or a
//! linear embedding. Companion modules recover approximating linear
//! isometries ([`recover`]) and produce antipodal-collapse distortion
//! witnesses ([`borsuk`]).

pub mod borsuk;
pub mod recover;

use rand::Rng;
use thiserror::Error;

use crate::norm::operator::LinearMap;
use crate::norm::{NormError, NormDescriptor};
use crate::optim::{rng_from_seed, stable_hash};

/// Failures in map construction and sampling.
#[derive(Debug, Error)]
pub enum IsometryError {
    /// Sampled distortion needs at least two domain points.
    #[error("at least two sampled points are required, got {0}")]
    TooFewPoints(usize),
    /// Domain and image lists must pair up.
    #[error("domain has {domain} points but image has {image}")]
    LengthMismatch {
        /// Domain point count.
        domain: usize,
        /// Image point count.
        image: usize,
    },
    /// An operation received an empty sample.
    #[error("sample must be non-empty")]
    EmptySample,
    /// A vector did not match the expected dimension.
    #[error("expected dimension {expected}, got {got}")]
    DimensionMismatch {
        /// Dimension required by the operation.
        expected: usize,
        /// Dimension actually supplied.
        got: usize,
    },
    /// The domain must have strictly larger dimension than the codomain.
    #[error("domain dimension {domain} must exceed codomain dimension {codomain}")]
    NoDimensionDrop {
        /// Domain dimension.
        domain: usize,
        /// Codomain dimension.
        codomain: usize,
    },
    /// A net was built for a different norm than the map's domain.
    #[error("net norm does not match the map's domain")]
    NetMismatch,
    /// Sphere radii must be positive and finite.
    #[error("radius {0} must be positive and finite")]
    BadRadius(f64),
    /// The affine subspace must be a proper subspace of the codomain.
    #[error("subspace of dimension {subspace} does not fit strictly inside dimension {space}")]
    SubspaceTooLarge {
        /// Number of spanning vectors supplied.
        subspace: usize,
        /// Dimension of the ambient space.
        space: usize,
    },
    /// Underlying norm error.
    #[error(transparent)]
    Norm(#[from] NormError),
}

/// Scalar profile for the lift `v ↦ (v, φ(‖v‖))`.
#[derive(Clone, Debug, PartialEq)]
pub enum Phi {
    /// `φ(t) = 0`: the linear isometric embedding.
    Zero,
    /// `φ(t) = |t|`: exact nonlinear isometry when the norms are max-like.
    Abs,
    /// `φ(t) = sqrt(eps · max(t, 0))`: small-distortion, unbounded drift.
    SqrtScaled {
        /// Distortion scale of the profile.
        eps: f64,
    },
    /// Piecewise-linear interpolation through `(t, φ(t))` knots, clamped
    /// to the end values outside the knot range. Knots must be sorted by
    /// `t`.
    Table {
        /// Interpolation knots, ascending in the first component.
        knots: Vec<(f64, f64)>,
    },
}

impl Phi {
    /// Evaluates the profile at `t`.
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Phi::Zero => 0.0,
            Phi::Abs => t.abs(),
            Phi::SqrtScaled { eps } => (eps * t.max(0.0)).sqrt(),
            Phi::Table { knots } => {
                if knots.is_empty() {
                    return 0.0;
                }
                let first = knots[0];
                let last = knots[knots.len() - 1];
                if t <= first.0 {
                    return first.1;
                }
                if t >= last.0 {
                    return last.1;
                }
                let idx = knots.partition_point(|&(x, _)| x <= t);
                let (x0, y0) = knots[idx - 1];
                let (x1, y1) = knots[idx];
                if x1 == x0 {
                    y0
                } else {
                    y0 + (y1 - y0) * (t - x0) / (x1 - x0)
                }
            }
        }
    }

    /// Short name used in report rows.
    pub fn name(&self) -> &'static str {
        match self {
            Phi::Zero => "zero",
            Phi::Abs => "abs",
            Phi::SqrtScaled { .. } => "sqrt_scaled",
            Phi::Table { .. } => "table",
        }
    }
}

/// A map that can be evaluated at any domain point.
#[derive(Clone, Debug)]
pub enum MapFormula {
    /// A matrix acting between two normed spaces.
    Linear {
        /// The underlying linear map.
        map: LinearMap,
    },
    /// `v ↦ inner(v) + offset`.
    Translate {
        /// Map being translated.
        inner: Box<MapFormula>,
        /// Constant shift in the codomain.
        offset: Vec<f64>,
    },
    /// The lift `v ↦ (v, φ(‖v‖_domain))` into `domain ⊕ ℝ`.
    FPhi {
        /// Space being lifted.
        domain: NormDescriptor,
        /// Product norm on `domain ⊕ ℝ`.
        codomain: NormDescriptor,
        /// Scalar profile applied to the norm.
        phi: Phi,
    },
    /// `v ↦ T v + noise(v)` with `‖noise(v)‖ < amplitude`, noise drawn
    /// deterministically from a hash of `v`'s bits (same `v`, same noise).
    LinearNoise {
        /// Underlying linear map.
        map: LinearMap,
        /// Strict bound on the codomain norm of the added noise.
        amplitude: f64,
        /// Seed mixed into the per-point noise stream.
        seed: u64,
    },
    /// Projection onto the leading coordinates.
    CoordProjection {
        /// Space being projected.
        domain: NormDescriptor,
        /// Norm on the kept coordinates.
        codomain: NormDescriptor,
    },
}

/// Builds the lift `v ↦ (v, φ(‖v‖_V))` into the product of `domain` with
/// the real line, normed by the two-dimensional `plane` norm.
pub fn make_f_phi(
    domain: NormDescriptor,
    plane: NormDescriptor,
    phi: Phi,
) -> Result<MapFormula, NormError> {
    let codomain = NormDescriptor::product(domain.clone(), plane)?;
    Ok(MapFormula::FPhi {
        domain,
        codomain,
        phi,
    })
}

impl MapFormula {
    /// Wraps a linear map.
    pub fn linear(map: LinearMap) -> Self {
        MapFormula::Linear { map }
    }

    /// Translates a map by a constant codomain vector.
    pub fn translation(inner: MapFormula, offset: Vec<f64>) -> Result<Self, IsometryError> {
        let expected = inner.codomain().dim();
        if offset.len() != expected {
            return Err(IsometryError::DimensionMismatch {
                expected,
                got: offset.len(),
            });
        }
        Ok(MapFormula::Translate {
            inner: Box::new(inner),
            offset,
        })
    }

    /// Adds deterministic bounded noise to a linear map.
    pub fn linear_noise(map: LinearMap, amplitude: f64, seed: u64) -> Self {
        MapFormula::LinearNoise {
            map,
            amplitude,
            seed,
        }
    }

    /// Projects onto the first `codomain.dim()` coordinates.
    pub fn projection(
        domain: NormDescriptor,
        codomain: NormDescriptor,
    ) -> Result<Self, IsometryError> {
        if codomain.dim() > domain.dim() {
            return Err(IsometryError::DimensionMismatch {
                expected: domain.dim(),
                got: codomain.dim(),
            });
        }
        Ok(MapFormula::CoordProjection { domain, codomain })
    }

    /// Domain norm of the map.
    pub fn domain(&self) -> &NormDescriptor {
        match self {
            MapFormula::Linear { map } => map.domain(),
            MapFormula::Translate { inner, .. } => inner.domain(),
            MapFormula::FPhi { domain, .. } => domain,
            MapFormula::LinearNoise { map, .. } => map.domain(),
            MapFormula::CoordProjection { domain, .. } => domain,
        }
    }

    /// Codomain norm of the map.
    pub fn codomain(&self) -> &NormDescriptor {
        match self {
            MapFormula::Linear { map } => map.codomain(),
            MapFormula::Translate { inner, .. } => inner.codomain(),
            MapFormula::FPhi { codomain, .. } => codomain,
            MapFormula::LinearNoise { map, .. } => map.codomain(),
            MapFormula::CoordProjection { codomain, .. } => codomain,
        }
    }

    /// Evaluates the map at `v`.
    pub fn eval(&self, v: &[f64]) -> Vec<f64> {
        match self {
            MapFormula::Linear { map } => map.apply(v),
            MapFormula::Translate { inner, offset } => {
                let mut image = inner.eval(v);
                for (slot, o) in image.iter_mut().zip(offset) {
                    *slot += o;
                }
                image
            }
            MapFormula::FPhi { domain, phi, .. } => {
                let r = domain.eval_unchecked(v);
                let mut image = v.to_vec();
                image.push(phi.eval(r));
                image
            }
            MapFormula::LinearNoise {
                map,
                amplitude,
                seed,
            } => {
                let mut image = map.apply(v);
                let noise = point_noise(v, map.codomain(), *amplitude, *seed);
                for (slot, n) in image.iter_mut().zip(noise) {
                    *slot += n;
                }
                image
            }
            MapFormula::CoordProjection { codomain, .. } => v[..codomain.dim()].to_vec(),
        }
    }

    /// Short name used in report rows.
    pub fn name(&self) -> &'static str {
        match self {
            MapFormula::Linear { .. } => "linear",
            MapFormula::Translate { .. } => "translate",
            MapFormula::FPhi { .. } => "f_phi",
            MapFormula::LinearNoise { .. } => "linear_noise",
            MapFormula::CoordProjection { .. } => "projection",
        }
    }
}

/// Deterministic noise vector for a point: direction and magnitude come
/// from a ChaCha stream keyed by a hash of the point's bits, magnitude is
/// strictly below `amplitude` in the codomain norm.
fn point_noise(v: &[f64], codomain: &NormDescriptor, amplitude: f64, seed: u64) -> Vec<f64> {
    // No noise at the origin: the map keeps f(0) = 0, the hypothesis under
    // which the recovery bounds are stated.
    if amplitude <= 0.0 || v.iter().all(|x| *x == 0.0) {
        return vec![0.0; codomain.dim()];
    }
    let mut bytes = Vec::with_capacity(8 * (v.len() + 1));
    bytes.extend_from_slice(&seed.to_le_bytes());
    for x in v {
        bytes.extend_from_slice(&x.to_bits().to_le_bytes());
    }
    let mut rng = rng_from_seed(stable_hash(&bytes));
    let raw: Vec<f64> = (0..codomain.dim())
        .map(|_| rng.gen::<f64>() * 2.0 - 1.0)
        .collect();
    let scale = codomain.eval_unchecked(&raw);
    if scale <= 1e-12 {
        return vec![0.0; codomain.dim()];
    }
    let magnitude = amplitude * 0.999 * rng.gen::<f64>();
    raw.iter().map(|x| x * magnitude / scale).collect()
}

/// How a sampled map came to be.
#[derive(Clone, Debug, PartialEq)]
pub enum MapSource {
    /// Evaluated from a named formula.
    Formula(&'static str),
    /// Supplied as raw data.
    Data,
}

/// A map known only through finitely many (point, image) pairs.
#[derive(Clone, Debug)]
pub struct SampledMap {
    /// Points where the map was evaluated.
    pub domain_points: Vec<Vec<f64>>,
    /// Corresponding images, index-aligned with `domain_points`.
    pub image_points: Vec<Vec<f64>>,
    /// Provenance tag.
    pub source: MapSource,
}

impl SampledMap {
    /// Samples a formula-backed map at the given points.
    pub fn from_formula(f: &MapFormula, points: &[Vec<f64>]) -> Self {
        SampledMap {
            domain_points: points.to_vec(),
            image_points: points.iter().map(|p| f.eval(p)).collect(),
            source: MapSource::Formula(f.name()),
        }
    }

    /// Wraps raw (point, image) data.
    pub fn from_data(
        domain_points: Vec<Vec<f64>>,
        image_points: Vec<Vec<f64>>,
    ) -> Result<Self, IsometryError> {
        if domain_points.len() != image_points.len() {
            return Err(IsometryError::LengthMismatch {
                domain: domain_points.len(),
                image: image_points.len(),
            });
        }
        Ok(SampledMap {
            domain_points,
            image_points,
            source: MapSource::Data,
        })
    }

    /// Number of sampled points.
    pub fn len(&self) -> usize {
        self.domain_points.len()
    }

    /// True when no points were sampled.
    pub fn is_empty(&self) -> bool {
        self.domain_points.is_empty()
    }
}

/// Largest distance change over all sampled pairs:
/// `max_{i<j} | ‖f(v_i)-f(v_j)‖_W - ‖v_i-v_j‖_V |`.
///
/// This is a lower bound for the map's true distortion — the supremum runs
/// over every pair of domain points, the sample only over finitely many.
pub fn sampled_distortion(
    map: &SampledMap,
    v: &NormDescriptor,
    w: &NormDescriptor,
) -> Result<f64, IsometryError> {
    if map.len() < 2 {
        return Err(IsometryError::TooFewPoints(map.len()));
    }
    let mut worst = 0.0f64;
    for i in 0..map.len() {
        for j in (i + 1)..map.len() {
            let d_domain = v.distance(&map.domain_points[i], &map.domain_points[j])?;
            let d_image = w.distance(&map.image_points[i], &map.image_points[j])?;
            worst = worst.max((d_image - d_domain).abs());
        }
    }
    Ok(worst)
}

/// One-sided sampled gap from a target set to the map's image:
/// `max over targets of min over image points of ‖target - image‖_W`.
///
/// A sampled stand-in for "the image comes within δ of the target set".
pub fn delta_surjectivity(
    map: &SampledMap,
    target_sample: &[Vec<f64>],
    w: &NormDescriptor,
) -> Result<f64, IsometryError> {
    if map.is_empty() || target_sample.is_empty() {
        return Err(IsometryError::EmptySample);
    }
    let mut worst = 0.0f64;
    for target in target_sample {
        let mut nearest = f64::INFINITY;
        for image in &map.image_points {
            nearest = nearest.min(w.distance(target, image)?);
        }
        worst = worst.max(nearest);
    }
    Ok(worst)
}

/// Seeded probe set in the radius-`radius` ball of `norm`.
///
/// Alongside `count` random ball points the set always contains the unit
/// basis vectors, their negatives, and the same directions pushed out to
/// norm exactly `radius` — so a supremum attained on the sphere of radius
/// `radius` in a basis direction is hit exactly rather than approached.
pub fn ball_probes(norm: &NormDescriptor, radius: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let dim = norm.dim();
    let mut probes: Vec<Vec<f64>> = Vec::with_capacity(count + 4 * dim);
    for i in 0..dim {
        for sign in [1.0f64, -1.0] {
            let mut unit = vec![0.0; dim];
            unit[i] = sign;
            let basis_norm = norm.eval_unchecked(&unit);
            let scaled: Vec<f64> = unit.iter().map(|x| x * radius / basis_norm).collect();
            probes.push(unit);
            probes.push(scaled);
        }
    }
    let mut rng = rng_from_seed(seed);
    for _ in 0..count {
        let p = crate::norm::net::sample_ball_point(norm, &mut rng);
        probes.push(p.iter().map(|x| x * radius).collect());
    }
    probes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::child_seed;

    fn hadamard_l1_to_linf() -> LinearMap {
        LinearMap::new(
            vec![vec![1.0, 1.0], vec![1.0, -1.0]],
            NormDescriptor::l1(2),
            NormDescriptor::linf(2),
        )
        .unwrap()
    }

    #[test]
    fn zero_profile_lift_is_a_linear_isometric_embedding() {
        let f = make_f_phi(
            NormDescriptor::l2(2),
            NormDescriptor::l2(2),
            Phi::Zero,
        )
        .unwrap();
        let probes = ball_probes(&NormDescriptor::l2(2), 5.0, 60, 3);
        let sampled = SampledMap::from_formula(&f, &probes);
        let dis = sampled_distortion(&sampled, f.domain(), f.codomain()).unwrap();
        assert!(dis <= 1e-12, "distortion of the zero lift was {dis}");
    }

    #[test]
    fn abs_profile_lift_is_an_exact_isometry_on_max_norms() {
        for dim in 1..=3 {
            let f = make_f_phi(
                NormDescriptor::linf(dim),
                NormDescriptor::linf(2),
                Phi::Abs,
            )
            .unwrap();
            let probes = ball_probes(&NormDescriptor::linf(dim), 1000.0, 80, 11 + dim as u64);
            let sampled = SampledMap::from_formula(&f, &probes);
            let dis = sampled_distortion(&sampled, f.domain(), f.codomain()).unwrap();
            assert!(
                dis <= 1e-12,
                "abs lift in dimension {dim} had distortion {dis}"
            );
        }
    }

    #[test]
    fn sqrt_profile_lift_stays_within_its_declared_distortion() {
        let eps = 0.01;
        let f = make_f_phi(
            NormDescriptor::l2(2),
            NormDescriptor::l2(2),
            Phi::SqrtScaled { eps },
        )
        .unwrap();
        // Dense audit across several radii, including points near the origin
        // where the profile's slope blows up.
        let mut worst = 0.0f64;
        for (idx, radius) in [0.01, 1.0, 31.6, 1000.0].iter().enumerate() {
            let probes = ball_probes(&NormDescriptor::l2(2), *radius, 120, 100 + idx as u64);
            let sampled = SampledMap::from_formula(&f, &probes);
            worst = worst.max(sampled_distortion(&sampled, f.domain(), f.codomain()).unwrap());
        }
        assert!(
            worst <= eps,
            "sqrt lift exceeded its declared distortion: {worst} > {eps}"
        );
        assert!(worst > 0.0, "audit should detect some distortion");
    }

    #[test]
    fn linear_isometry_witness_has_zero_sampled_distortion() {
        let f = MapFormula::linear(hadamard_l1_to_linf());
        let probes = ball_probes(&NormDescriptor::l1(2), 10.0, 100, 7);
        let sampled = SampledMap::from_formula(&f, &probes);
        let dis = sampled_distortion(&sampled, f.domain(), f.codomain()).unwrap();
        assert!(dis <= 1e-12, "sampled distortion was {dis}");
    }

    #[test]
    fn translations_are_isometries() {
        let identity = LinearMap::identity(NormDescriptor::l2(3));
        let f = MapFormula::translation(MapFormula::linear(identity), vec![2.0, -1.0, 0.5])
            .unwrap();
        let probes = ball_probes(&NormDescriptor::l2(3), 4.0, 50, 9);
        let sampled = SampledMap::from_formula(&f, &probes);
        let dis = sampled_distortion(&sampled, f.domain(), f.codomain()).unwrap();
        assert!(dis <= 1e-12, "translation distortion was {dis}");
    }

    #[test]
    fn translation_with_wrong_offset_dimension_is_rejected() {
        let identity = LinearMap::identity(NormDescriptor::l2(3));
        let err = MapFormula::translation(MapFormula::linear(identity), vec![1.0]);
        assert!(matches!(
            err,
            Err(IsometryError::DimensionMismatch {
                expected: 3,
                got: 1
            })
        ));
    }

    #[test]
    fn noise_respects_its_amplitude_and_is_reproducible() {
        let map = LinearMap::identity(NormDescriptor::l2(2));
        let f = MapFormula::linear_noise(map, 0.05, 42);
        let probes = ball_probes(&NormDescriptor::l2(2), 10.0, 200, 13);
        let codomain = f.codomain().clone();
        for p in &probes {
            let image_a = f.eval(p);
            let image_b = f.eval(p);
            assert_eq!(image_a, image_b, "noise must be a function of the point");
            let noise: Vec<f64> = image_a.iter().zip(p).map(|(a, b)| a - b).collect();
            let magnitude = codomain.eval_unchecked(&noise);
            assert!(
                magnitude < 0.05,
                "noise magnitude {magnitude} breached the amplitude"
            );
        }
        // The noisy identity is an eps-isometry for eps = twice the amplitude.
        let sampled = SampledMap::from_formula(&f, &probes);
        let dis = sampled_distortion(&sampled, f.domain(), f.codomain()).unwrap();
        assert!(dis <= 0.1 + 1e-12, "noisy identity distortion was {dis}");
    }

    #[test]
    fn distortion_grows_with_the_sample() {
        let f = make_f_phi(
            NormDescriptor::l2(2),
            NormDescriptor::l2(2),
            Phi::SqrtScaled { eps: 0.01 },
        )
        .unwrap();
        let probes = ball_probes(&NormDescriptor::l2(2), 10.0, 80, 17);
        let small = SampledMap::from_formula(&f, &probes[..20]);
        let large = SampledMap::from_formula(&f, &probes);
        let dis_small = sampled_distortion(&small, f.domain(), f.codomain()).unwrap();
        let dis_large = sampled_distortion(&large, f.domain(), f.codomain()).unwrap();
        assert!(
            dis_large >= dis_small,
            "supremum over a superset cannot shrink: {dis_large} < {dis_small}"
        );
    }

    #[test]
    fn sampled_distortion_needs_two_points() {
        let f = MapFormula::linear(LinearMap::identity(NormDescriptor::l2(2)));
        let sampled = SampledMap::from_formula(&f, &[vec![1.0, 0.0]]);
        assert!(matches!(
            sampled_distortion(&sampled, f.domain(), f.codomain()),
            Err(IsometryError::TooFewPoints(1))
        ));
    }

    #[test]
    fn surjectivity_gap_is_zero_on_covered_targets() {
        let f = MapFormula::linear(LinearMap::identity(NormDescriptor::linf(2)));
        let probes = ball_probes(&NormDescriptor::linf(2), 2.0, 30, 5);
        let sampled = SampledMap::from_formula(&f, &probes);
        let targets = sampled.image_points[..10].to_vec();
        let gap = delta_surjectivity(&sampled, &targets, f.codomain()).unwrap();
        assert_eq!(gap, 0.0);
    }

    #[test]
    fn surjectivity_gap_sees_the_missing_slice() {
        // Lift with zero profile, then measure targets on the t = 1 slice:
        // in the max norm every such target is exactly 1 away from the
        // t = 0 image slice.
        let f = make_f_phi(
            NormDescriptor::linf(2),
            NormDescriptor::linf(2),
            Phi::Zero,
        )
        .unwrap();
        let probes = ball_probes(&NormDescriptor::linf(2), 1.0, 200, 23);
        let sampled = SampledMap::from_formula(&f, &probes);
        let targets: Vec<Vec<f64>> = probes[..40]
            .iter()
            .map(|p| {
                let mut t = p.clone();
                t.push(1.0);
                t
            })
            .collect();
        let gap = delta_surjectivity(&sampled, &targets, f.codomain()).unwrap();
        assert!(
            (gap - 1.0).abs() <= 1e-12,
            "slice gap should be exactly 1, got {gap}"
        );
    }

    #[test]
    fn surjectivity_gap_rejects_empty_samples() {
        let f = MapFormula::linear(LinearMap::identity(NormDescriptor::l2(2)));
        let sampled = SampledMap::from_formula(&f, &[]);
        assert!(matches!(
            delta_surjectivity(&sampled, &[vec![0.0, 0.0]], f.codomain()),
            Err(IsometryError::EmptySample)
        ));
    }

    #[test]
    fn probe_sets_reach_the_requested_radius_exactly() {
        for radius in [1.0, 10.0, 100.0] {
            let probes = ball_probes(&NormDescriptor::linf(2), radius, 50, child_seed(1, 2));
            let norm = NormDescriptor::linf(2);
            let max_norm = probes
                .iter()
                .map(|p| norm.eval_unchecked(p))
                .fold(0.0, f64::max);
            assert_eq!(
                max_norm, radius,
                "scaled basis probes must sit on the sphere bit-exactly"
            );
        }
    }

    #[test]
    fn table_profile_interpolates_and_clamps() {
        let phi = Phi::Table {
            knots: vec![(0.0, 0.0), (1.0, 2.0), (3.0, 1.0)],
        };
        assert_eq!(phi.eval(-5.0), 0.0);
        assert_eq!(phi.eval(0.5), 1.0);
        assert_eq!(phi.eval(1.0), 2.0);
        assert_eq!(phi.eval(2.0), 1.5);
        assert_eq!(phi.eval(7.0), 1.0);
    }
}
