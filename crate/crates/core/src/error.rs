use thiserror::Error;

use crate::evolve::Trajectory;


pub type Result<T, E = LabError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("field is in {found} representation, expected {expected}")]
    Representation {
        expected: &'static str,
        found: &'static str,
    },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("multiplier `{label}` is not finite at frequency {xi}")]
    NonFiniteSymbol { label: String, xi: f64 },

    #[error("Littlewood-Paley block {0} lies above the Nyquist frequency")]
    BlockAboveNyquist(u64),

    #[error("pad factor {pad} cannot dealias a degree-{degree} product (needs {needed})")]
    InsufficientPadding {
        pad: usize,
        degree: usize,
        needed: f64,
    },

    #[error("gauge weight overflow: sup of exponent is {sup:.3} (limit {limit})")]
    GaugeOverflow { sup: f64, limit: f64 },

    #[error("gauge precondition violated: {0}")]
    GaugePrecondition(String),

    #[error("unknown field `{0}`")]
    UnknownField(String),

    #[error("inconsistent state: {0}")]
    State(String),

    #[error("invalid parameter: {0}")]
    Invalid(String),

    #[error("exponent triple (q={q}, r={r}, s={s}) is not admissible: {reason}")]
    Inadmissible {
        q: f64,
        r: f64,
        s: f64,
        reason: String,
    },

    #[error("time {t} lies outside the trajectory [0, {end}]")]
    TimeOutOfRange { t: f64, end: f64 },

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("blow-up at t = {time}: sup|u| = {sup:.3e} exceeds {threshold:.3e}")]
    BlowUp {
        time: f64,
        sup: f64,
        threshold: f64,
        partial: Box<Trajectory>,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl LabError {
    /// True for numerical aborts as opposed to input validation failures.
    pub fn is_numerical(&self) -> bool {
        matches!(self, LabError::BlowUp { .. } | LabError::GaugeOverflow { .. })
    }
}
