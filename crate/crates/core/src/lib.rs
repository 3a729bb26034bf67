//! Model checking and evidence calculation for probabilistic algorithmic
//! knowledge.
//!
//! Structures carry finite derandomizer spaces, so every probability,
//! weight of evidence and reliability pair is computed by exhaustive
//! enumeration. All of it is generic over [`Scalar`]; use the [`Rational`]
//! aliases for exact answers and the `F64` ones for speed.
//!
//! ```
//! use algknow::{scenarios, semantics::Evaluator, syntax::parse_formula, Rational};
//!
//! let n = scenarios::coin_structure::<Rational>();
//! let e = Evaluator::new(&n);
//! let s2 = n.state_index("s2").unwrap();
//! let p = e.probability(s2, &parse_formula("X1 dh").unwrap()).unwrap();
//! assert_eq!(p, Rational::new(1.into(), 2.into()));
//! ```

pub mod dolevyao;
pub mod error;
pub mod evidence;
pub mod model;
pub mod reliability;
pub mod scalar;
pub mod scenarios;
pub mod semantics;
pub mod syntax;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Exact arbitrary-precision rational.
pub type Rational = num_rational::BigRational;

pub type Structure = model::ProbabilisticStructure<Rational>;
pub type StructureF64 = model::ProbabilisticStructure<f64>;
pub type StructureF32 = model::ProbabilisticStructure<f32>;
pub type Space = evidence::EvidenceSpace<Rational>;
pub type SpaceF64 = evidence::EvidenceSpace<f64>;
pub type Distribution = semantics::AnswerDistribution<Rational>;
pub type Reliability = reliability::ReliabilityReport<Rational>;
pub type Audit = reliability::AuditReport<Rational>;
