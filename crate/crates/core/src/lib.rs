//! Eliciting reference probabilities from law-invariant functionals and games
//! on finite probability spaces.
//!
//! The pipeline runs from exact probability spaces ([`space`]) through games
//! and distortions ([`games`]) and Choquet functionals ([`choquet`]) to the
//! extrema of cores and supporting sets ([`supports`]), which [`elicit`] turns
//! into a candidate reference probability. Value-at-Risk capacities, whose
//! extrema are trivial, go through a dedicated recursion in [`elicit`].
//!
//! ```
//! use refmeasure::games::{build_family, Family};
//! use refmeasure::space::ProbabilityCharge;
//! use refmeasure::supports::{loose_extremum, GameSide};
//! use refmeasure::elicit::{candidate_from_extremum, CandidateStatus};
//!
//! let p = ProbabilityCharge::uniform(8).unwrap();
//! let v = build_family(&Family::Es { beta: 0.75 }, &p).unwrap();
//! let report = loose_extremum(&v, GameSide::CoreInf);
//! let candidate = candidate_from_extremum(&report).unwrap();
//! assert_eq!(candidate.status, CandidateStatus::Ok);
//! assert_eq!(candidate.candidate.unwrap(), p);
//! assert!((candidate.scale.unwrap() - 4.0).abs() < 1e-12);
//! ```

pub mod charge_lattice;
pub mod choquet;
pub mod cli;
pub mod elicit;
pub mod error;
pub mod games;
pub mod lp;
pub mod space;
pub mod supports;

pub use charge_lattice::SignedCharge;
pub use choquet::{Dictionary, FunctionalOracle, SimpleRandomVariable};
pub use error::{Error, Result};
pub use games::{DistortionFunction, Game};
pub use space::{Event, FiniteSpace, ProbabilityCharge, Rational};

/// Default absolute tolerance for comparisons of real game and charge values.
pub const TOL: f64 = 1e-9;
