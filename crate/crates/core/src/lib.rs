//! Algebraic differences of M-adic random Cantor sets.
//!
//! The crate covers the exact side of the theory (marginals, cyclic
//! cross-correlations, expectation matrices, growth-condition witnesses,
//! verdicts) with rational arithmetic, and the empirical side (sampling
//! realizations, counting triangles and projected columns) with seeded,
//! replayable Monte Carlo.
//!
//! Modules map onto the workflow:
//!
//! * [`distribution`], [`letters`], [`sampling`], [`literal`]: joint survival
//!   distributions and their alphabets.
//! * [`spectra`]: correlation coefficients, expectation matrices and lower
//!   spectral radius estimates.
//! * [`dgc`]: distributed growth condition witnesses.
//! * [`simulate`]: realizations, diagonal and triangle counts, occupancy,
//!   branching diagnostics and rendering.
//! * [`classify`]: verdicts on whether the difference set contains an interval.
//! * [`experiment`]: configurable Monte Carlo runs and reports.

pub mod classify;
pub mod dgc;
pub mod distribution;
pub mod error;
pub mod experiment;
pub mod letters;
pub mod limits;
pub mod literal;
pub mod par;
pub mod rational;
pub mod sampling;
pub mod simulate;
pub mod spectra;

pub use distribution::{JointSurvivalDistribution, MarginalVector, SurvivalLaw};
pub use error::{Error, Result};
pub use letters::{gamma_indicator, Alphabet, LetterSet, Word};
pub use limits::Limits;
pub use par::Execution;
pub use rational::Rational;
