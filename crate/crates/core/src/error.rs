use alloc::string::String;
use core::fmt;

/// Errors raised by the simulation core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// The Euler-rate transform is singular: |cos(pitch)| fell to the tolerance.
    GimbalLock { pitch: f64 },
    /// A decoded box ended up with non-positive width or height.
    DegenerateBox { w: f64, h: f64 },
    /// A configuration value violated its invariant.
    InvalidConfig(String),
    /// The simulated state stopped being finite.
    NonFinite { tick: u64, what: &'static str },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::GimbalLock { pitch } => {
                write!(
                    f,
                    "gimbal lock: pitch {pitch} rad leaves the Euler-rate transform singular"
                )
            }
            Error::DegenerateBox { w, h } => {
                write!(f, "decoded box has non-positive size (w = {w}, h = {h})")
            }
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::NonFinite { tick, what } => {
                write!(f, "non-finite {what} at tick {tick}")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
