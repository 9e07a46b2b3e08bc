//! Exact-arithmetic toolkit for little-lip indicator functions.
//!
//! Given a nested chain of closed sets `E_1 ⊆ … ⊆ E_N`, [`builder`] constructs
//! a continuous function whose little Lipschitz constant is the indicator of
//! `E = ⋃ E_n` (for strongly one-sided dense stages), evaluated exactly at
//! rational points. Around it sit the supporting pieces:
//!
//! * [`interval`]: canonical interval sets with exact Lebesgue measure.
//! * [`density`]: one-sided densities and finite-range SOSD scans.
//! * [`estimator`]: rigorous enclosures of `M_f(x, r)` and lip/Lip surrogates.
//! * [`cantor`]: the 3/11–4/11–7/11–8/11 Cantor-type constructions, their
//!   measure ledgers and density-window checks.
//! * [`verify`]: the invariant suite driven by the `verify` subcommand.
//!
//! No floating point is used in any computation; decimals appear only in
//! exported display columns.

pub mod builder;
pub mod cantor;
pub mod density;
pub mod error;
pub mod estimator;
pub mod export;
pub mod interval;
pub mod rational;
pub mod verify;

pub use builder::{BreakpointRule, BreakpointStream, LipFunction, NestedChain};
pub use cantor::{CantorStage, LevelSchedule};
pub use density::{DensityProfile, SosdReport};
pub use error::{Error, Result};
pub use estimator::{LipEstimate, OscillationQuery};
pub use interval::{ExtendedPoint, Interval, IntervalSet, MeasuredSet, RawInterval};
pub use rational::Rational;
