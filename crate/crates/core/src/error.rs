use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("foci are degenerate: |tx - rx| = {distance:e} m")]
    DegenerateFoci { distance: f64 },

    #[error("points coincide: distance {distance:e} m")]
    CoincidentPoints { distance: f64 },

    #[error("point is {offset:e} m off the plane")]
    OffPlane { offset: f64 },

    #[error("invalid plane frame: {0}")]
    InvalidFrame(String),

    #[error("invalid RIS grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("threshold xi = {xi:e} m outside [0, {max:e}] m")]
    XiOutOfRange { xi: f64, max: f64 },

    #[error("exhaustive search limited to {max} elements, got {n}")]
    TooManyElements { n: usize, max: usize },

    #[error("location error of magnitude {0:e} m needs at least one enabled axis")]
    EmptyAxisMask(f64),

    #[error("overhead of {overhead} symbols exceeds frame length {frame_length}")]
    OverheadExceedsFrame { overhead: u64, frame_length: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
