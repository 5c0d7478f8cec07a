use thiserror::Error;

/// Every failure the simulator can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// γv − Δc·u vanishes: the critical coupling diverges.
    #[error("singular point: gamma*v - detuning*u = {denominator:e} at detuning {detuning:e} rad/s")]
    Singular { detuning: f64, denominator: f64 },

    #[error("no minimum: {0}")]
    NoMinimum(String),

    #[error(
        "no sign change of G - gamma_m on [{lo:e}, {hi:e}] rad/s \
         (G - gamma_m = {f_lo:e} at lo, {f_hi:e} at hi)"
    )]
    Bracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("step size underflow at t = {t:e} s (h = {h:e} s)")]
    Stiffness { t: f64, h: f64 },

    #[error("step limit reached at t = {t:e} s after {steps} steps")]
    StepLimit { t: f64, steps: u64 },

    #[error("non-finite state at t = {t:e} s")]
    Divergence { t: f64 },

    #[error("no convergence by t = {t:e} s (residual {residual:e})")]
    NoConvergence { t: f64, residual: f64 },

    #[error("config error at line {line}{}: {message}", key.as_ref().map(|k| format!(" (key `{k}`)")).unwrap_or_default())]
    Config { line: usize, key: Option<String>, message: String },

    #[error("invalid sweep: {0}")]
    Spec(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(line: usize, key: Option<&str>, message: impl Into<String>) -> Self {
        Error::Config { line, key: key.map(str::to_owned), message: message.into() }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
