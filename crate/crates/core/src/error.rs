use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Oscillator constants outside `alpha > 0, beta > 0, gamma >= 0, a < b < 0`.
    InvalidParams(&'static str),
    /// The `A0` block has no positive decay rate.
    NonPositiveDecayRate(f64),
    IndexOutOfRange {
        index: usize,
        len: usize,
    },
    TooFewNodes(usize),
    InvalidTopology(&'static str),
    NonPositiveGain(f64),
    InvalidSector {
        k1: f64,
        k2: f64,
    },
    InvalidArgument(&'static str),
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
    NonFiniteInput,
    DimensionTooLarge(usize),
    EigensolverFailure {
        iterations: usize,
    },
    /// Integration left the finite range (or the divergence guard) at `time`.
    NonFiniteState {
        time: f64,
    },
    DegenerateWindow,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParams(why) => write!(f, "invalid Chua parameters: {why}"),
            Error::NonPositiveDecayRate(mu) => {
                write!(f, "decay rate mu0 = {mu} is not positive; cannot certify")
            }
            Error::IndexOutOfRange { index, len } => {
                write!(f, "node index {index} out of range for {len} nodes")
            }
            Error::TooFewNodes(n) => write!(f, "at least 2 nodes required, got {n}"),
            Error::InvalidTopology(why) => write!(f, "invalid topology: {why}"),
            Error::NonPositiveGain(k) => write!(f, "coupling gain must be positive, got {k}"),
            Error::InvalidSector { k1, k2 } => {
                write!(
                    f,
                    "sector constants must satisfy k2 >= k1 >= 0, got k1 = {k1}, k2 = {k2}"
                )
            }
            Error::InvalidArgument(why) => write!(f, "invalid argument: {why}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NonFiniteInput => f.write_str("matrix contains non-finite entries"),
            Error::DimensionTooLarge(n) => write!(f, "dimension {n} too large for this routine"),
            Error::EigensolverFailure { iterations } => {
                write!(
                    f,
                    "eigensolver did not converge after {iterations} iterations"
                )
            }
            Error::NonFiniteState { time } => {
                write!(f, "integration diverged at t = {time}")
            }
            Error::DegenerateWindow => {
                f.write_str("fit window holds too few samples or norms below the floating floor")
            }
        }
    }
}

impl core::error::Error for Error {}
