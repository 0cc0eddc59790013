use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The implicit midpoint fixed-point iteration stalled, usually because
    /// the step is too large for the field strength.
    #[error("fixed-point iteration did not converge at step {step} (residual {residual:e})")]
    NonConverged { step: usize, residual: f64 },

    #[error("macro fixed-point iteration did not converge at macro step {step}{} (residual {residual:e})",
        cell.map(|c| format!(", cell {c}")).unwrap_or_default())]
    MacroNonConverged {
        step: usize,
        cell: Option<usize>,
        residual: f64,
    },

    #[error("quadratic interpolant of the macro state vanishes (|value| = {norm:e})")]
    DegenerateInterpolant { norm: f64 },

    #[error("trajectory covers [{have_start}, {have_end}] but the averaging window needs [{need_start}, {need_end}]")]
    WindowOutOfRange {
        need_start: f64,
        need_end: f64,
        have_start: f64,
        have_end: f64,
    },

    #[error("log-log slope fit needs at least two strictly positive points")]
    NonPositiveData,

    #[error("kernel moment system is singular for p = {p}, q = {q}")]
    SingularMomentSystem { p: u32, q: i32 },
}

impl Error {
    /// Attaches a macro step index to errors raised inside a step.
    pub(crate) fn at_macro_step(self, step: usize) -> Self {
        match self {
            Error::MacroNonConverged { cell, residual, .. } => {
                Error::MacroNonConverged { step, cell, residual }
            }
            other => other,
        }
    }
}
