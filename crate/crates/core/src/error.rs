use alloc::string::String;
use alloc::vec::Vec;

use crate::map::ValidationReport;

/// Errors raised by the analyses. Conditions that are part of a result
/// (validation violations, failed checks, inconclusive verdicts) are report
/// entries instead.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid map parameters: {0}")]
    InvalidMap(ValidationReport),
    #[error("invalid tolerances: {0}")]
    InvalidTolerances(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("derivative requested at the critical point (|x - c| = {distance:e})")]
    CriticalPointDerivative { distance: f64 },
    #[error("value {y} lies outside the {side} branch image [{lo}, {hi}]")]
    ValueOutsideBranchImage {
        side: crate::map::Side,
        y: f64,
        lo: f64,
        hi: f64,
    },
    #[error("no periodic orbit of period <= {max_period} meets the window")]
    NoPeriodicOrbitInWindow { max_period: usize },
    #[error("preimage tree of {x} is empty")]
    PreimageTreeEmpty { x: f64 },
    #[error("interval ({lo}, {hi}) is not nice: boundary orbit enters it at iterate {iterate}")]
    NotNice { lo: f64, hi: f64, iterate: usize },
    #[error("niceness of ({lo}, {hi}) could not be decided")]
    NicenessUndetermined { lo: f64, hi: f64 },
    #[error("no periodic approximant of the boundary found up to period {max_period}")]
    NoApproximantFound { max_period: usize },
    #[error("renormalization record ({lo}, {hi}) failed re-verification: {reason}")]
    RecordInvalid { lo: f64, hi: f64, reason: String },
    #[error("renormalization intervals are linked: {witnesses:?}")]
    LinkedIntervalsDetected { witnesses: Vec<((f64, f64), (f64, f64))> },
    #[error("return map has {found} branches, a gap map needs exactly 2")]
    WrongBranchCount { found: usize },
    #[error("branch images overlap on the circle ({overlap:e}), not a gap map")]
    BranchOverlap { overlap: f64 },
    #[error("rotation orbit kept hitting the critical puncture after {attempts} seeds")]
    OrbitHitGap { attempts: usize },
    #[error("no return to the base interval within {horizon} iterates ({side} side)")]
    NoReturnWithinHorizon { side: crate::map::Side, horizon: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
