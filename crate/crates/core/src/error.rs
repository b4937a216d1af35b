use crate::material::Polarization;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} outside valid window [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("no guided {pol} mode at {wavelength_um} um: {detail}")]
    NoMode {
        pol: Polarization,
        wavelength_um: f64,
        detail: String,
    },

    #[error("coupler supports {found} guided {pol} modes at {wavelength_um} um, expected {expected}")]
    ModeCount {
        pol: Polarization,
        wavelength_um: f64,
        found: usize,
        expected: usize,
    },

    #[error("invalid mode composition: {0}")]
    Composition(String),

    #[error("quadrature did not converge on [{lo}, {hi}]: last relative change {change:e}")]
    Quadrature { lo: f64, hi: f64, change: f64 },

    #[error("root search did not converge: {0}")]
    NonConvergence(String),

    #[error("contrast calibration failed: best residual {residual:e} um^-1 at (dn_H, dn_V) = ({delta_n_h}, {delta_n_v})")]
    Calibration {
        residual: f64,
        delta_n_h: f64,
        delta_n_v: f64,
    },

    #[error("pump mode {0} is not supported (only 0 and 1)")]
    UnsupportedPump(usize),

    #[error("all process coefficients vanish; state cannot be normalised")]
    DegenerateState,

    #[error("state is not normalised (sum |amp|^2 = {0})")]
    NotNormalized(f64),

    #[error("no crossing: efficiency spread never drops below 1")]
    NoCrossing,

    #[error("{0}")]
    InvalidInput(String),

    #[error("config: {0}")]
    Config(String),

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures coming out of the mode solvers (including propagated ones).
    pub fn is_solver(&self) -> bool {
        matches!(
            self,
            Error::NoMode { .. }
                | Error::ModeCount { .. }
                | Error::Composition(_)
                | Error::Quadrature { .. }
                | Error::NonConvergence(_)
                | Error::OutOfRange { .. }
        )
    }
}
