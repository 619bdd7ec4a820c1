use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("physical.{field} must be positive and finite, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("physical.{field} must be at least 1, got {value}")]
    QualityFactorBelowOne { field: &'static str, value: f64 },
    #[error("knob {knob} = {value} outside its domain {domain}")]
    KnobOutOfRange { knob: &'static str, value: f64, domain: &'static str },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("time grid must be uniform and increasing with at least 2 points")]
    BadGrid,
    #[error("grid spacing {spacing} round trips cannot resolve the round-trip comb (need <= {max})")]
    Aliasing { spacing: f64, max: f64 },
    #[error("grid [{start}, {end}] does not cover the pulse and ring response [{need_start}, {need_end}]")]
    WindowTooShort { start: f64, end: f64, need_start: f64, need_end: f64 },
    #[error("oracle transform would need {points} points, over the {limit} limit")]
    TooLarge { points: usize, limit: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrationError {
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("tolerance not met within {steps} steps, stopped at t = {t}")]
    MaxStepsExceeded { t: f64, steps: usize },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("invalid integration window: {0}")]
    Window(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EventError {
    #[error("{which} extremum at the edge of the window (t = {t}); use a longer window")]
    AtBoundary { which: &'static str, t: f64 },
    #[error("antisqueezing still rising at the end of the window; use a longer window")]
    StillRising,
    #[error("trajectory has fewer than 3 samples")]
    TooShort,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error("{what} outside its domain: {value}")]
    Domain { what: &'static str, value: f64 },
}

/// Any failure of a single simulate-and-summarize evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error(transparent)]
    Event(#[from] EventError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    Invalid(String),
    #[error(transparent)]
    Param(#[from] ParamError),
}
