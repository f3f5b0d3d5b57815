//! Order estimates, certified two-sided bounds, and small-dimension numerical
//! oracles for Gelfand (and, where applicable, Kolmogorov and linear) widths
//! of intersections of scaled `l_p` balls in `R^N`, plus a width-exponent
//! calculator for intersections of Sobolev classes.
//!
//! The crate is organized around a pipeline:
//!
//! * [`exponents`] — exact arithmetic on extended exponents `p ∈ [1, ∞]` and
//!   the interpolation parameter `λ` tying two exponents to a target one.
//! * [`balls`] — scaled-ball intersections, canonicalization, and regime
//!   classification for the closed-form estimates.
//! * [`norms`] — `l_p` norms, intersection norms, dual norms (support
//!   functions) with certified primal/dual gaps, supporting functionals, and
//!   closed-form embedding norms.
//! * [`order`] — the closed-form order estimates and a certified upper bound
//!   built from ball inclusions.
//! * [`gluskin`] — certified lower bounds from a sign-permutation averaging
//!   argument, with re-verifiable certificates.
//! * [`oracle`] — heuristic numerical width estimation at desk scale
//!   (`N ≤ 16`) used to cross-check formulas and certificates.
//! * [`sobolev`] — width decay exponents for intersections of Sobolev
//!   classes, in exact rational arithmetic.
//! * [`harness`] — the verification suites tying everything together; these
//!   back both the acceptance tests and the CLI `verify` command.
//!
//! Data-parallel loops (sweeps, sampling suites, optimizer restarts) run on
//! rayon when the default `parallel` feature is enabled and fall back to
//! sequential iteration otherwise; results are identical either way.

pub mod balls;
pub mod exponents;
pub mod gluskin;
pub mod harness;
pub mod norms;
pub mod oracle;
pub mod order;
mod par;
pub mod sobolev;

pub use balls::{Ball, BallIntersection, RegimeFlags, RegimeParams, WidthKind, WidthQuery};
pub use exponents::Exponent;
pub use gluskin::GluskinCertificate;
pub use norms::NormSpec;
pub use oracle::{OracleBudget, OracleEstimate};
pub use order::BoundReport;
