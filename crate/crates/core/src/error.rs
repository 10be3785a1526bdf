use thiserror::Error;

/// Errors shared by all layers of the crate.
///
/// Indeterminacy of a valuation is a *value* (`Valuation::AtLeast`), not an
/// error; `Precision` is raised only when an operation would have to guess,
/// e.g. inverting an element that is indistinguishable from zero.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// The computation needs more ϖ-adic digits than are available.
    /// `needed` is a hint for the retry loop.
    #[error("insufficient precision: need about {needed} digits, have {have}")]
    Precision { needed: i64, have: i64 },

    /// Input outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Squarefreeness / regular-semisimplicity failure.
    #[error("not regular semisimple (characteristic polynomial is not squarefree at working precision)")]
    NotRegularSemisimple,

    /// Incompatible field towers in `extend` or cross-field arithmetic.
    #[error("tower mismatch: {0}")]
    TowerMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),

    /// A case the artifact deliberately does not cover.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }
    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}

/// Run `f` at increasing precision, doubling on `Error::Precision`.
///
/// `start` is the initial absolute precision (callers usually take
/// `2 * predicted_bound + 8`). Gives up after `max_doublings`.
pub fn with_precision_retry<T>(
    start: i64,
    max_doublings: u32,
    mut f: impl FnMut(i64) -> Result<T>,
) -> Result<T> {
    let mut n = start;
    let mut last = None;
    for _ in 0..=max_doublings {
        match f(n) {
            Err(Error::Precision { needed, have }) => {
                last = Some(Error::Precision { needed, have });
                n = (2 * n).max(needed + 4);
            }
            other => return other,
        }
    }
    Err(last.unwrap_or(Error::Precision { needed: n, have: 0 }))
}
