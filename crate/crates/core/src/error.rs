use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid manifold parameter `{key}`: {reason}")]
    InvalidParameter { key: &'static str, reason: String },

    #[error("degenerate frame: column {column} has norm {norm:e} after projection")]
    DegenerateFrame { column: usize, norm: f64 },

    #[error("frame is not adapted: lower-left block entry {0:e}")]
    NotAdapted(f64),

    #[error("group element is not block orthogonal (residual {residual:e})")]
    NotOrthogonal { residual: f64 },

    #[error("flow produced non-finite values at time {time}")]
    NonFinite { time: f64 },

    #[error("transverse flow requires zero leaf coefficients, got {value} in slot {slot}")]
    LeafCoefficient { slot: usize, value: f64 },

    #[error("driving path has dimension {got}, expected {expected_q} (transverse) or {expected_n} (full)")]
    PathDimension {
        got: usize,
        expected_q: usize,
        expected_n: usize,
    },

    #[error("number of paths must be positive")]
    NoPaths,

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("1-form is not basic: {0}")]
    NotBasic(String),

    #[error("atlases have different transverse metrics: {0}")]
    TransverseMismatch(String),

    #[error("dilating function must be strictly positive, found {value} at t = {t}")]
    NonPositiveDilation { t: f64, value: f64 },

    #[error("non-simple kernel: second singular value estimate {0:e}")]
    NonSimpleKernel(f64),

    #[error("grid size {0} is too small")]
    GridTooSmall(usize),
}
