//! Exact q-expansions of the level-N Eisenstein series `E^(k;N)_a` over the
//! cyclotomic field `Q(zeta_N)`, exact verification of the three-term product
//! relations among them, and an independent floating-point evaluator for the
//! continuous-parameter series `E^(k)_z(tau)`.
//!
//! Module map:
//! - [`cyclotomic`]: rationals, `Q(zeta_N)` elements, cyclotomic polynomials.
//! - [`qseries`]: truncated series in `q^(1/N)` with cyclotomic coefficients.
//! - [`eisenstein`]: Bernoulli values and the exact expansions.
//! - [`relations`]: homogeneous polynomial symbols, relation residuals, scans.
//! - [`kernel`]: scaled-integer convolution used by the scans.
//! - [`numeric`]: Fourier and lattice evaluators plus the analytic checks.
//! - [`cli`]: command-line front end.

pub mod cli;
pub mod cyclotomic;
pub mod eisenstein;
mod error;
pub mod kernel;
pub mod numeric;
pub mod qseries;
pub mod relations;

pub use cyclotomic::{CycNum, Rat, RatPoly};
pub use eisenstein::EisensteinIndex;
pub use error::{Error, Result};
pub use qseries::QExpansion;
pub use relations::{HomPoly, RelationInstance};
