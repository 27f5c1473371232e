use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    /// A parameter hits a pole (e.g. a non-positive integer denominator parameter).
    #[error("pole in {func}: {detail}")]
    Pole { func: &'static str, detail: String },

    /// `x_i = 1` in the `F_B` argument transformation.
    #[error("singular transformation: argument {index} equals 1")]
    SingularTransform { index: usize },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("too many branches for the series path: L = {branches}, maximum is {max}")]
    TooManyBranches { branches: usize, max: usize },

    #[error("mismatched argument lengths: {0}")]
    Length(String),
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }

    pub(crate) fn pole(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Pole {
            func,
            detail: detail.into(),
        }
    }
}
