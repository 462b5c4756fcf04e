use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("length mismatch: expected {expected}, got {got} ({what})")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("y is decreasing at cell {cell} (slope {slope:.3e})")]
    NonMonotone { cell: usize, slope: f64 },
    #[error("invalid relabeling: {0}")]
    InvalidRelabeling(String),
    #[error("f'' changes sign on [{lo}, {hi}]")]
    CoefficientSignChange { lo: f64, hi: f64 },
    #[error("y+H is not strictly increasing at cell {0}")]
    NotInF(usize),
    #[error("constraint collapse (y_xi + H_xi <= 0) at cell {cell}, t = {t}")]
    ConstraintCollapse { t: f64, cell: usize },
    #[error("time step underflow at t = {t}: dt = {dt:.3e} below minimum")]
    StepUnderflow { t: f64, dt: f64 },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid Eulerian pair: {0}")]
    InvalidPair(String),
    #[error("invalid peakon configuration: {0}")]
    InvalidPeakons(String),
    #[error("test function support exceeds the window: {0}")]
    SupportOutsideWindow(String),
    #[error("energy {energy} exceeds the bound M = {bound}")]
    EnergyBound { energy: f64, bound: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
