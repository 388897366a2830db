use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grids do not match")]
    GridMismatch,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("field contains non-finite values")]
    NonFinite,

    #[error("hermitian symmetry defect {defect:.3e} exceeds tolerance")]
    SymmetryViolation { defect: f64 },

    #[error("invalid Lebesgue exponent p = {p}")]
    InvalidExponent { p: f64 },

    #[error("invalid nonlinearity exponent q = {q}")]
    InvalidQ { q: f64 },

    #[error("padding factor must be at least 2, got {0}")]
    InvalidPadFactor(usize),

    #[error("negative time t = {t}")]
    NegativeTime { t: f64 },

    #[error("time must be positive, got t = {t}")]
    NonPositiveTime { t: f64 },

    #[error("derivative order {order} exceeds the supported maximum of 8")]
    OrderTooHigh { order: usize },

    #[error("invalid spectral order beta = {beta}")]
    InvalidBeta { beta: f64 },

    #[error("field has non-zero mass {mass:.3e} (L1 norm {l1:.3e})")]
    NonZeroMass { mass: f64, l1: f64 },

    #[error("symbol is not homogeneous of degree {degree}: relative defect {defect:.3e}")]
    NotHomogeneous { degree: f64, defect: f64 },

    #[error("bump width {width} exceeds limit {limit}")]
    WidthTooLarge { width: f64, limit: f64 },

    #[error("support radius {radius} exceeds limit {limit}")]
    SupportTooLarge { radius: f64, limit: f64 },

    #[error("low-frequency shells disagree by {spread:.1}% (order misdeclared?)")]
    InconsistentShells { spread: f64 },

    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(String),

    #[error("solution blew up at t = {t}: sup norm {sup:.3e}")]
    Blowup { t: f64, sup: f64 },

    #[error("Picard iteration failed to contract at iteration {iteration} (ratios {ratios:?})")]
    NoContraction { iteration: usize, ratios: Vec<f64> },

    #[error("q = {q} is not the balanced exponent q* = {q_star}")]
    NotBalanced { q: f64, q_star: f64 },

    #[error("Besov norm {norm:.3e} of the datum is not below epsilon = {epsilon:.3e}")]
    DataTooLarge { norm: f64, epsilon: f64 },

    #[error("Cole-Hopf denominator {value:.6e} below bound {bound:.6e} at x = {x}")]
    DenominatorBreach { x: f64, value: f64, bound: f64 },

    #[error("quadrature not converged: change {change:.3e} under node doubling")]
    QuadratureUnconverged { change: f64 },

    #[error("Riesz kernel constant failed calibration: kernel/spectral ratio {ratio}")]
    RieszCalibration { ratio: f64 },

    #[error("unsupported kind: {0}")]
    UnsupportedKind(String),

    #[error("fit window too narrow: {points} points spanning factor {span:.3}")]
    WindowTooNarrow { points: usize, span: f64 },

    #[error("series value at t = {t} is not positive")]
    NonPositiveSeries { t: f64 },

    #[error("times t1 = {t1}, t2 = {t2} do not give a supported scale factor")]
    UnsupportedScale { t1: f64, t2: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
