//! A desk-scale numerical laboratory for metric geometry.
//!
//! The crate is organised around four pillars:
//!
//! * [`metric`] — finite metric spaces with exact Gromov–Hausdorff distance
//!   solvers (map-pair enumeration, correspondence enumeration, and a pruned
//!   branch-and-bound), plus distortion, codistortion, and Hausdorff distance.
//! * [`norm`] — finite-dimensional normed spaces described by data
//!   (`l_p`, polytope, and product norms), sphere nets with audited covering
//!   radii, net-based operator-norm brackets, and Banach–Mazur distance
//!   estimation by multi-start descent.
//! * [`isometry`] — approximate isometries: formula-backed maps, sampled
//!   distortion and surjectivity defects, recovery of a nearby linear map
//!   from a bounded-distortion map, classical sup-bound checks, antipodal
//!   collapse witnesses, and affine-deviation measurement.
//! * [`embed`] — embeddings of finite metric spaces into normed spaces:
//!   the exact coordinate embedding into `l_inf^n`, numerical embedding by
//!   multi-start descent, and equilateral-set search.
//!
//! Everything is deterministic given a seed: random draws go through
//! seed-stable generators, and parallel evaluation (used for restart fans)
//! merges results in a thread-count-independent way.

pub mod embed;
pub mod isometry;
pub mod metric;
pub mod norm;
pub mod optim;
pub mod real;

pub use metric::FiniteMetricSpace;
pub use norm::NormDescriptor;
