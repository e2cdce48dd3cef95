//! Shared fixed-schedule perturbation descent and seed-stable randomness.
//!
//! Every numerical search in this crate (Banach–Mazur estimation, finite
//! embedding, antipodal-collapse witnesses, affine-deviation distances) runs
//! the same derivative-free loop: propose a perturbation at the current step
//! size, accept it if the objective strictly improves, and halve the step
//! once a full round of proposals fails. The schedule is fixed up front —
//! iteration count, proposals per round, initial step, and a stagnation
//! threshold — so a run is a pure function of its seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Creates the crate-wide deterministic generator for a seed.
///
/// ChaCha is specified independently of platform and library version, so the
/// same seed yields the same stream everywhere.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent child seed from a base seed and a stream index.
///
/// Restart fans use one child per restart so that parallel execution can
/// hand restarts to worker threads in any order and still reproduce the
/// sequential result.
pub fn child_seed(seed: u64, stream: u64) -> u64 {
    // SplitMix64 finalizer: bijective, well-dispersed, and cheap.
    let mut z = seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable 64-bit FNV-1a hash over raw bytes.
///
/// Used wherever a seed must be derived from data (a space description, a
/// point's coordinates) so that identical inputs reproduce identical
/// streams across runs, platforms, and library versions.
pub fn stable_hash(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &byte in bytes {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Standard normal draw by the Box–Muller transform.
pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let u: f64 = rng.gen::<f64>();
        if u > f64::MIN_POSITIVE {
            let v: f64 = rng.gen::<f64>();
            return (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos();
        }
    }
}

/// Fixed schedule for [`perturbation_descent`].
#[derive(Clone, Copy, Debug)]
pub struct DescentSchedule {
    /// Maximum number of proposal rounds.
    pub max_rounds: usize,
    /// Proposals attempted per round before the step is halved.
    pub trials_per_round: usize,
    /// Initial step size (in the caller's coordinates).
    pub init_step: f64,
    /// The loop stops once the step falls below this fraction of `init_step`.
    pub stagnation: f64,
}

impl DescentSchedule {
    /// Schedule used by Banach–Mazur estimation: 200 rounds, step halving,
    /// stop when the step has shrunk below 1e-10 of its initial value.
    pub fn banach_mazur() -> Self {
        DescentSchedule {
            max_rounds: 200,
            trials_per_round: 8,
            init_step: 1.0,
            stagnation: 1e-10,
        }
    }

    /// Schedule used by finite-embedding searches: 400 rounds with a wider
    /// proposal fan, initial step set by the caller to the instance scale.
    pub fn embedding(init_step: f64) -> Self {
        DescentSchedule {
            max_rounds: 400,
            trials_per_round: 16,
            init_step,
            stagnation: 1e-13,
        }
    }

    /// Schedule used by constrained sphere searches and affine projections,
    /// where the minimum may sit in a kink and very small steps pay off.
    pub fn fine(init_step: f64) -> Self {
        DescentSchedule {
            max_rounds: 400,
            trials_per_round: 8,
            init_step,
            stagnation: 1e-14,
        }
    }
}

/// Outcome of a descent run.
#[derive(Clone, Debug)]
pub struct DescentResult {
    /// Best point found.
    pub point: Vec<f64>,
    /// Objective value at `point`.
    pub value: f64,
    /// Rounds actually executed.
    pub rounds_used: usize,
}

/// Derivative-free minimisation with a fixed perturbation schedule.
///
/// `objective` scores a candidate; `propose` produces a perturbed candidate
/// from the current point and step size; `repair` projects a proposal back
/// onto the feasible set (identity for unconstrained problems). A proposal
/// is accepted only on strict improvement, so the trajectory — and therefore
/// the result — is a deterministic function of the starting point and seed.
pub fn perturbation_descent<O, P, R>(
    start: Vec<f64>,
    schedule: DescentSchedule,
    rng: &mut ChaCha8Rng,
    mut objective: O,
    mut propose: P,
    mut repair: R,
) -> DescentResult
where
    O: FnMut(&[f64]) -> f64,
    P: FnMut(&[f64], f64, &mut ChaCha8Rng) -> Vec<f64>,
    R: FnMut(&mut Vec<f64>),
{
    let mut best = start;
    repair(&mut best);
    let mut best_value = objective(&best);
    let mut step = schedule.init_step;
    let floor = schedule.init_step * schedule.stagnation;
    let mut rounds_used = 0;

    for round in 0..schedule.max_rounds {
        rounds_used = round + 1;
        let mut improved = false;
        for _ in 0..schedule.trials_per_round {
            let mut candidate = propose(&best, step, rng);
            repair(&mut candidate);
            let value = objective(&candidate);
            if value < best_value {
                best = candidate;
                best_value = value;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
            if step < floor {
                break;
            }
        }
    }

    DescentResult {
        point: best,
        value: best_value,
        rounds_used,
    }
}

/// A generic proposal: perturb one coordinate or the whole vector.
///
/// Half of the proposals move a single random coordinate by `±step`; the
/// other half add a Gaussian vector scaled to `step`. Mixing both handles
/// axis-aligned kinks and smooth valleys with the same machinery.
pub fn mixed_proposal(current: &[f64], step: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut candidate = current.to_vec();
    if rng.gen::<bool>() {
        let idx = rng.gen_range(0..candidate.len());
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        candidate[idx] += sign * step;
    } else {
        for slot in candidate.iter_mut() {
            *slot += step * gaussian(rng);
        }
    }
    candidate
}
