//! Pseudospectral simulator and singularity-analysis toolkit for the
//! nonlocal system
//!
//! ```text
//!     u_t = alpha * u * v  (+ nu * u_xx)
//!     v_t = beta  * H(u^2) (+ nu * v_xx)
//! ```
//!
//! where `H` is the Hilbert transform. The crate integrates the system on
//! periodic and compactly supported line domains, fits the finite-time
//! blow-up of the sup norm, extracts dynamically rescaled self-similar
//! profiles, and verifies blow-up-time bounds and global-regularity decay
//! numerically.
//!
//! Modules mirror the pipeline: [`grid`] (domains, fields, norms),
//! [`hilbert`] (transform operators and weighted bilinear functionals),
//! [`dynamics`] (right-hand sides and coefficient scaling), [`integrator`]
//! (RK4, integrating-factor RK4, adaptive run loop), [`analysis`]
//! (singularity fits, profile extraction, collapse), [`theory`]
//! (certificates for blow-up bounds and global regularity), and [`config`]
//! / [`output`] (presets, JSON configs, CSV/JSON artifacts).

pub mod analysis;
pub mod config;
pub mod dynamics;
pub(crate) mod fft;
pub mod grid;
pub mod hilbert;
pub mod integrator;
pub mod output;
pub mod theory;

pub use grid::{Field, Grid, GridKind, NormRecord, SolutionState};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("periodic grids require a power-of-two point count >= 8, got {0}")]
    InvalidGridSize(usize),
    #[error("grids require at least 8 points, got {0}")]
    GridTooSmall(usize),
    #[error("domain extent must be positive, got [{lo}, {hi}]")]
    EmptyDomain { lo: f64, hi: f64 },
    #[error("support [{a}, {b}] must lie strictly inside the domain ({lo}, {hi})")]
    SupportOutsideDomain { a: f64, b: f64, lo: f64, hi: f64 },
    #[error("operation requires a periodic grid")]
    PeriodicGridRequired,
    #[error("operation requires a line grid")]
    LineGridRequired,
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("initial condition `{ic}` requires a {kind} grid")]
    InitialConditionGrid { ic: String, kind: &'static str },
    #[error("test weight is not periodic on this grid (max mismatch {0:.3e})")]
    WeightNotPeriodic(f64),
    #[error("scaling normalization needs alpha*beta > 0, got alpha={alpha}, beta={beta}")]
    InvalidScaling { alpha: f64, beta: f64 },
    #[error("viscous runs require a periodic grid")]
    ViscousLineRun,
    #[error("time step must be positive, got {0}")]
    NonPositiveDt(f64),
    #[error("non-finite values produced during time stepping")]
    NonFinite,
    #[error("blow-up fit window holds {0} samples, need at least 10")]
    FitWindowTooSmall(usize),
    #[error("1/sup_u is not decreasing over the fit window")]
    FitNotDecreasing,
    #[error("fitted slope is not negative; no blow-up trend in window")]
    FitNoBlowupTrend,
    #[error("blow-up fit time T={t} does not exceed snapshot time t={snapshot}")]
    FitPrecedesSnapshot { t: f64, snapshot: f64 },
    #[error("|u| peaks too close to the line-domain boundary for profile extraction")]
    PeakAtBoundary,
    #[error("self-similar frames have no overlapping xi range")]
    NoProfileOverlap,
    #[error("lambda estimation needs at least 3 frames, got {0}")]
    TooFewFrames(usize),
    #[error("field carries no compact-support tag")]
    MissingSupportTag,
    #[error("periodic certificate requires support narrower than half the period, got {width} of {period}")]
    SupportTooWide { width: f64, period: f64 },
    #[error("run was not configured to track the weighted mass F(t)")]
    WeightedMassNotTracked,
    #[error("certificate/run mismatch: {0}")]
    CertificateMismatch(String),
    #[error("improper-integral argument must be nonnegative, got {0}")]
    NegativeIntegralArgument(f64),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("invalid initial-condition expression `{expr}`: {msg}")]
    InvalidExpression { expr: String, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
