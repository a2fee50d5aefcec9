use thiserror::Error;

/// Errors raised by parameter validation, the analytic engine, the oracles
/// and the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("source flip probability must lie in (0, 1/2], got {0}")]
    FlipProbability(f64),

    #[error("t_max must be at least 1, got {0}")]
    TmaxZero(usize),

    #[error("t_max = 1 reduces to the unit-delay system and is outside the analytic engine's scope; only the simulator accepts it")]
    DegenerateTmax,

    #[error("delay pmf entry p_{index} is invalid: {value}")]
    PmfEntry { index: usize, value: f64 },

    #[error("overflow mass is invalid: {0}")]
    OverflowMass(f64),

    #[error("overflow mass must be zero under assumption 1, got {0}")]
    OverflowUnderA1(f64),

    #[error("delay pmf{with_overflow} must sum to 1 within 1e-12, got {sum}")]
    PmfSum {
        sum: f64,
        with_overflow: &'static str,
    },

    #[error("geometric success probability must lie in (0, 1], got {0}")]
    SuccessProbability(f64),

    #[error("zipf exponent must be positive, got {0}")]
    ZipfExponent(f64),

    #[error("zipf delay needs t_max >= 2, got {0}")]
    ZipfTmax(usize),

    #[error("delay file line {line}: {reason}")]
    DelayFile { line: usize, reason: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("conditional kernel duration t={t} outside [1, {t_max}]")]
    DurationOutOfRange { t: usize, t_max: usize },

    #[error("the discard-branch kernel is only defined under assumption 2")]
    DiscardKernelUnderA1,

    #[error("step index k={k} outside [0, {max}]")]
    StepOutOfRange { k: usize, max: usize },

    #[error("threshold tau={0} is not handled by this solver path")]
    UnsupportedThreshold(String),

    #[error("stationary system is singular or ill-conditioned for {context} (pivot ratio {pivot_ratio:.3e})")]
    SingularSystem { context: String, pivot_ratio: f64 },

    #[error("stationary solve produced component {index} = {value}, below the -1e-12 noise floor for {context}")]
    NegativeComponent {
        index: usize,
        value: f64,
        context: String,
    },

    #[error("stationary solve residual {residual:.3e} exceeds 1e-10 for {context}")]
    ResidualTooLarge { residual: f64, context: String },

    #[error("tail series denominator {0} is not positive; kernel bug")]
    TailDenominator(f64),

    #[error("stationary solution has omega={got}, expected {expected} for this (params, tau)")]
    OmegaMismatch { got: usize, expected: usize },

    #[error("path enumeration limited to t <= 12, got {0}")]
    EnumerationTooLong(usize),

    #[error("delta_cap={got} too small; need at least omega + 10*t_max = {need}")]
    CapTooSmall { got: usize, need: usize },

    #[error("truncated chain would have {0} states, over the 1e7 guard")]
    ChainTooLarge(usize),

    #[error("power iteration did not reach tol={tol} within {max_iter} iterations (residual {residual:.3e})")]
    PowerIterationDiverged {
        tol: f64,
        max_iter: usize,
        residual: f64,
    },

    #[error("simulation needs epochs >= 1000, got {0}")]
    TooFewEpochs(u64),

    #[error("simulation needs runs >= 2 for a standard error, got {0}")]
    TooFewRuns(u32),
}
