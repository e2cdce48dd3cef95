//! Finite-dimensional normed spaces described by data.
//!
//! A [`NormDescriptor`] is one of:
//!
//! * `lp` — the `l_p` norm for `1 <= p <= inf` (exponents below 1 are
//!   rejected: they fail subadditivity);
//! * `polytope` — `max_k |<phi_k, v>|` over a functional list that must span
//!   the dual space, otherwise the unit ball is unbounded;
//! * `product` — a one-dimension extension: `N(v, t) = P(B(v), t)` where `B`
//!   is any base norm and `P` is a norm on the plane. Positive homogeneity
//!   and subadditivity are inherited from `B` and `P` (monotonicity of `P`
//!   in the first coordinate holds for every plane norm used here because
//!   the evaluation takes `B(v) >= 0`).
//!
//! Submodules: [`net`] (sphere nets with audited covering radii),
//! [`operator`] (net-based operator-norm brackets), [`banach_mazur`]
//! (distance estimation between normed spaces), [`linalg`] (small dense
//! matrix helpers shared across the crate).

pub mod banach_mazur;
pub mod linalg;
pub mod net;
pub mod operator;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from norm construction and evaluation.
#[derive(Clone, Debug, Error)]
pub enum NormError {
    #[error("vector length {got} does not match norm dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("lp exponent must satisfy 1 <= p (or inf), got {p}")]
    InvalidExponent { p: f64 },
    #[error("norm dimension must be at least 1")]
    ZeroDimension,
    #[error("polytope norm needs at least one functional")]
    EmptyFunctionals,
    #[error("functional {index} has length {got}, expected {expected}")]
    BadFunctionalLength {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error(
        "functionals span a {rank}-dimensional subspace of the {dim}-dimensional dual; \
         the induced unit ball would be unbounded"
    )]
    FunctionalsDoNotSpan { rank: usize, dim: usize },
    #[error("product plane norm must be 2-dimensional, got {got}")]
    PlaneDimension { got: usize },
    #[error("descriptor dimension {declared} disagrees with derived dimension {derived}")]
    DimensionDisagreement { declared: usize, derived: usize },
    #[error("non-finite entry in norm data")]
    NonFiniteEntry,
}

/// The shape of a norm.
#[derive(Clone, Debug, PartialEq)]
pub enum NormKind {
    /// `l_p`; `p = f64::INFINITY` selects the max norm.
    Lp { p: f64 },
    /// `max_k |<phi_k, v>|`.
    Polytope { functionals: Vec<Vec<f64>> },
    /// `N(v, t) = plane(base(v), t)`.
    Product {
        base: Box<NormDescriptor>,
        plane: Box<NormDescriptor>,
    },
}

/// A validated norm on `R^dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormDescriptor {
    dim: usize,
    kind: NormKind,
}

impl NormDescriptor {
    /// The `l_p` norm on `R^dim`. `p` may be `f64::INFINITY`.
    pub fn lp(dim: usize, p: f64) -> Result<Self, NormError> {
        if dim == 0 {
            return Err(NormError::ZeroDimension);
        }
        if p.is_nan() || p < 1.0 {
            return Err(NormError::InvalidExponent { p });
        }
        Ok(NormDescriptor {
            dim,
            kind: NormKind::Lp { p },
        })
    }

    /// Shorthand for `l_1`.
    pub fn l1(dim: usize) -> Self {
        Self::lp(dim, 1.0).expect("p = 1 is valid")
    }

    /// Shorthand for `l_2`.
    pub fn l2(dim: usize) -> Self {
        Self::lp(dim, 2.0).expect("p = 2 is valid")
    }

    /// Shorthand for `l_inf`.
    pub fn linf(dim: usize) -> Self {
        Self::lp(dim, f64::INFINITY).expect("p = inf is valid")
    }

    /// Polytope norm from a functional list; the dimension is the common
    /// functional length. Fails when the functionals do not span the dual.
    pub fn polytope(functionals: Vec<Vec<f64>>) -> Result<Self, NormError> {
        if functionals.is_empty() {
            return Err(NormError::EmptyFunctionals);
        }
        let dim = functionals[0].len();
        if dim == 0 {
            return Err(NormError::ZeroDimension);
        }
        for (index, f) in functionals.iter().enumerate() {
            if f.len() != dim {
                return Err(NormError::BadFunctionalLength {
                    index,
                    expected: dim,
                    got: f.len(),
                });
            }
            if f.iter().any(|v| !v.is_finite()) {
                return Err(NormError::NonFiniteEntry);
            }
        }
        let rank = linalg::rank(&functionals, dim);
        if rank < dim {
            return Err(NormError::FunctionalsDoNotSpan { rank, dim });
        }
        Ok(NormDescriptor {
            dim,
            kind: NormKind::Polytope { functionals },
        })
    }

    /// Product norm `N(v, t) = plane(base(v), t)` on `R^{base.dim + 1}`.
    pub fn product(base: NormDescriptor, plane: NormDescriptor) -> Result<Self, NormError> {
        if plane.dim() != 2 {
            return Err(NormError::PlaneDimension { got: plane.dim() });
        }
        Ok(NormDescriptor {
            dim: base.dim + 1,
            kind: NormKind::Product {
                base: Box::new(base),
                plane: Box::new(plane),
            },
        })
    }

    /// Dimension of the underlying space.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Access to the shape (read-only).
    pub fn kind(&self) -> &NormKind {
        &self.kind
    }

    /// True for the `l_p` norm with this exact exponent.
    pub fn is_lp(&self, p: f64) -> bool {
        matches!(self.kind, NormKind::Lp { p: q } if q == p)
    }

    /// Evaluates the norm, checking the vector length.
    pub fn eval(&self, v: &[f64]) -> Result<f64, NormError> {
        if v.len() != self.dim {
            return Err(NormError::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        Ok(self.eval_unchecked(v))
    }

    /// Evaluates without the length check (callers guarantee it).
    pub(crate) fn eval_unchecked(&self, v: &[f64]) -> f64 {
        match &self.kind {
            NormKind::Lp { p } => {
                if p.is_infinite() {
                    v.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()))
                } else if *p == 1.0 {
                    v.iter().map(|x| x.abs()).sum()
                } else if *p == 2.0 {
                    v.iter().map(|x| x * x).sum::<f64>().sqrt()
                } else {
                    // Scale by the max to avoid overflow for large exponents.
                    let m = v.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()));
                    if m == 0.0 {
                        0.0
                    } else {
                        m * v
                            .iter()
                            .map(|x| (x.abs() / m).powf(*p))
                            .sum::<f64>()
                            .powf(1.0 / *p)
                    }
                }
            }
            NormKind::Polytope { functionals } => functionals
                .iter()
                .map(|f| f.iter().zip(v).map(|(a, b)| a * b).sum::<f64>().abs())
                .fold(0.0, f64::max),
            NormKind::Product { base, plane } => {
                let split = base.dim;
                let b = base.eval_unchecked(&v[..split]);
                plane.eval_unchecked(&[b, v[split]])
            }
        }
    }

    /// Distance `N(a - b)`.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> Result<f64, NormError> {
        if a.len() != self.dim || b.len() != self.dim {
            return Err(NormError::DimensionMismatch {
                expected: self.dim,
                got: a.len().max(b.len()),
            });
        }
        let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        Ok(self.eval_unchecked(&diff))
    }

    /// Parses the JSON wire format and validates the result.
    pub fn from_json_str(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }
}

// ---------------------------------------------------------------------------
// Wire format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum WireExponent {
    Number(f64),
    Text(String),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum WireKind {
    Lp {
        p: WireExponent,
    },
    Polytope {
        #[serde(with = "crate::real::matrix")]
        functionals: Vec<Vec<f64>>,
    },
    Product {
        base: Box<WireNorm>,
        plane: Box<WireNorm>,
    },
}

#[derive(Serialize, Deserialize)]
struct WireNorm {
    dim: usize,
    #[serde(flatten)]
    kind: WireKind,
}

fn to_wire(n: &NormDescriptor) -> WireNorm {
    let kind = match &n.kind {
        NormKind::Lp { p } => WireKind::Lp {
            p: if p.is_infinite() {
                WireExponent::Text("inf".to_owned())
            } else {
                WireExponent::Number(*p)
            },
        },
        NormKind::Polytope { functionals } => WireKind::Polytope {
            functionals: functionals.clone(),
        },
        NormKind::Product { base, plane } => WireKind::Product {
            base: Box::new(to_wire(base)),
            plane: Box::new(to_wire(plane)),
        },
    };
    WireNorm { dim: n.dim, kind }
}

fn from_wire(wire: WireNorm) -> Result<NormDescriptor, NormError> {
    let norm = match wire.kind {
        WireKind::Lp { p } => {
            let p = match p {
                WireExponent::Number(x) => x,
                WireExponent::Text(t) if t == "inf" => f64::INFINITY,
                WireExponent::Text(t) => {
                    return Err(NormError::InvalidExponent {
                        p: t.parse().unwrap_or(f64::NAN),
                    })
                }
            };
            NormDescriptor::lp(wire.dim, p)?
        }
        WireKind::Polytope { functionals } => NormDescriptor::polytope(functionals)?,
        WireKind::Product { base, plane } => {
            NormDescriptor::product(from_wire(*base)?, from_wire(*plane)?)?
        }
    };
    if norm.dim() != wire.dim {
        return Err(NormError::DimensionDisagreement {
            declared: wire.dim,
            derived: norm.dim(),
        });
    }
    Ok(norm)
}

impl Serialize for NormDescriptor {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        to_wire(self).serialize(ser)
    }
}

impl<'de> Deserialize<'de> for NormDescriptor {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let wire = WireNorm::deserialize(de)?;
        from_wire(wire).map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Built-in catalogue and axiom sampling
// ---------------------------------------------------------------------------

/// The named norms the laboratory ships for a given dimension.
///
/// Dimensions 2 and 3 carry the full catalogue used by the comparison
/// experiments; other dimensions get the four `l_p` staples.
pub fn builtin_norms(dim: usize) -> Vec<(String, NormDescriptor)> {
    let mut out = vec![
        ("l1".to_owned(), NormDescriptor::l1(dim)),
        ("l2".to_owned(), NormDescriptor::l2(dim)),
        ("l4".to_owned(), NormDescriptor::lp(dim, 4.0).expect("p = 4 is valid")),
        ("linf".to_owned(), NormDescriptor::linf(dim)),
    ];
    if dim == 2 {
        let s = 3.0f64.sqrt() / 2.0;
        out.push((
            "hexagon".to_owned(),
            NormDescriptor::polytope(vec![
                vec![1.0, 0.0],
                vec![0.5, s],
                vec![-0.5, s],
            ])
            .expect("hexagon functionals span the plane"),
        ));
    }
    if dim == 3 {
        out.push((
            "cylinder".to_owned(),
            NormDescriptor::product(NormDescriptor::l2(2), NormDescriptor::linf(2))
                .expect("cylinder product is valid"),
        ));
        out.push((
            "spindle".to_owned(),
            NormDescriptor::product(NormDescriptor::l2(2), NormDescriptor::l1(2))
                .expect("spindle product is valid"),
        ));
    }
    out
}

/// Worst observed defects of the norm axioms over a seeded sample.
#[derive(Clone, Copy, Debug)]
pub struct NormAxiomReport {
    /// `max |N(lambda v) - |lambda| N(v)|`.
    pub homogeneity_defect: f64,
    /// `max (N(u + v) - N(u) - N(v))_+`.
    pub subadditivity_defect: f64,
    /// `N(0)`.
    pub norm_at_zero: f64,
}

/// Samples homogeneity and subadditivity defects with `samples` seeded draws.
pub fn sample_axioms(norm: &NormDescriptor, samples: usize, seed: u64) -> NormAxiomReport {
    use rand::Rng;
    let mut rng = crate::optim::rng_from_seed(seed);
    let dim = norm.dim();
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
        (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
    };
    let mut homogeneity: f64 = 0.0;
    let mut subadditivity: f64 = 0.0;
    for _ in 0..samples {
        let u = draw(&mut rng);
        let v = draw(&mut rng);
        let lambda: f64 = rng.gen_range(-3.0..3.0);
        let nu = norm.eval_unchecked(&u);
        let nv = norm.eval_unchecked(&v);
        let scaled: Vec<f64> = u.iter().map(|x| lambda * x).collect();
        homogeneity = homogeneity.max((norm.eval_unchecked(&scaled) - lambda.abs() * nu).abs());
        let sum: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        subadditivity = subadditivity.max(norm.eval_unchecked(&sum) - nu - nv);
    }
    NormAxiomReport {
        homogeneity_defect: homogeneity,
        subadditivity_defect: subadditivity.max(0.0),
        norm_at_zero: norm.eval_unchecked(&vec![0.0; dim]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lp_evaluations_match_hand_values() {
        let l1 = NormDescriptor::l1(2);
        let l2 = NormDescriptor::l2(2);
        let linf = NormDescriptor::linf(2);
        assert_eq!(l1.eval(&[3.0, -4.0]).unwrap(), 7.0);
        assert_eq!(l2.eval(&[3.0, -4.0]).unwrap(), 5.0);
        assert_eq!(linf.eval(&[3.0, -4.0]).unwrap(), 4.0);
        let l3 = NormDescriptor::lp(1, 3.0).unwrap();
        assert!((l3.eval(&[-2.0]).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn exponents_below_one_are_rejected() {
        assert!(matches!(
            NormDescriptor::lp(2, 0.5),
            Err(NormError::InvalidExponent { .. })
        ));
        assert!(matches!(
            NormDescriptor::lp(2, f64::NAN),
            Err(NormError::InvalidExponent { .. })
        ));
    }

    #[test]
    fn polytope_norm_evaluates_support_maximum() {
        // Unit square ball: functionals e1, e2 give the max norm.
        let n = NormDescriptor::polytope(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(n.eval(&[0.25, -0.75]).unwrap(), 0.75);
        // Scaling a functional scales its slab.
        let half = NormDescriptor::polytope(vec![vec![0.5, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(half.eval(&[1.0, 0.0]).unwrap(), 0.5);
    }

    #[test]
    fn degenerate_functionals_are_rejected() {
        let err = NormDescriptor::polytope(vec![vec![1.0, 0.0], vec![2.0, 0.0]]).unwrap_err();
        assert!(matches!(err, NormError::FunctionalsDoNotSpan { rank: 1, dim: 2 }));
    }

    #[test]
    fn product_norm_composes_base_and_plane() {
        // max(|v|_2, |t|): a cylinder over the Euclidean disc.
        let cyl = NormDescriptor::product(NormDescriptor::l2(2), NormDescriptor::linf(2)).unwrap();
        assert_eq!(cyl.dim(), 3);
        assert_eq!(cyl.eval(&[3.0, 4.0, 2.0]).unwrap(), 5.0);
        assert_eq!(cyl.eval(&[0.3, 0.4, 2.0]).unwrap(), 2.0);
        // Product with l_inf plane over an l_inf base is the max norm again.
        let wv = NormDescriptor::product(NormDescriptor::linf(2), NormDescriptor::linf(2)).unwrap();
        assert_eq!(wv.eval(&[1.0, -2.0, 1.5]).unwrap(), 2.0);
    }

    #[test]
    fn plane_must_be_two_dimensional() {
        assert!(matches!(
            NormDescriptor::product(NormDescriptor::l2(2), NormDescriptor::l2(3)),
            Err(NormError::PlaneDimension { got: 3 })
        ));
    }

    #[test]
    fn eval_checks_dimension() {
        let n = NormDescriptor::l2(3);
        assert!(matches!(
            n.eval(&[1.0, 2.0]),
            Err(NormError::DimensionMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn axiom_defects_are_tiny_for_all_builtins() {
        for dim in [1, 2, 3] {
            for (name, norm) in builtin_norms(dim) {
                let report = sample_axioms(&norm, 1000, 12345);
                assert!(
                    report.homogeneity_defect <= 1e-9,
                    "{name} dim {dim}: homogeneity defect {}",
                    report.homogeneity_defect
                );
                assert!(
                    report.subadditivity_defect <= 1e-9,
                    "{name} dim {dim}: subadditivity defect {}",
                    report.subadditivity_defect
                );
                assert_eq!(report.norm_at_zero, 0.0, "{name} dim {dim}: norm at zero");
            }
        }
    }

    #[test]
    fn wire_format_round_trips() {
        let samples = vec![
            NormDescriptor::lp(3, 2.5).unwrap(),
            NormDescriptor::linf(2),
            NormDescriptor::polytope(vec![vec![1.0, 0.5], vec![0.0, 2.0]]).unwrap(),
            NormDescriptor::product(NormDescriptor::l1(2), NormDescriptor::l2(2)).unwrap(),
        ];
        for n in samples {
            let json = serde_json::to_string(&n).unwrap();
            let back: NormDescriptor = serde_json::from_str(&json).unwrap();
            assert_eq!(n, back, "round trip through {json}");
        }
        // The max-norm exponent serialises as the token "inf".
        let json = serde_json::to_string(&NormDescriptor::linf(2)).unwrap();
        assert!(json.contains("\"p\":\"inf\""), "got {json}");
    }

    #[test]
    fn invalid_wire_input_is_rejected() {
        assert!(NormDescriptor::from_json_str(r#"{"dim":2,"kind":"lp","p":0.5}"#).is_err());
        assert!(NormDescriptor::from_json_str(
            r#"{"dim":3,"kind":"lp","p":2,"extra":true}"#
        )
        .is_ok_and(|n| n.dim() == 3));
        // Declared dimension must match the functional length.
        assert!(NormDescriptor::from_json_str(
            r#"{"dim":3,"kind":"polytope","functionals":[[1,0],[0,1]]}"#
        )
        .is_err());
    }
}
