use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the formula it feeds.
    #[error("{name} = {value:e} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// A covariance matrix produced a symplectic eigenvalue below the
    /// uncertainty bound.
    #[error("unphysical symplectic eigenvalue {value} (must be >= 1)")]
    Unphysical { value: f64 },

    /// The worst-case transmissivity fell to zero or below.
    #[error("worst-case transmissivity {t_wc:e} leaves no usable channel")]
    DegenerateChannel { t_wc: f64 },

    #[error("rate model for {expected} protocols was given a {found} budget")]
    FamilyMismatch {
        expected: crate::budget::Family,
        found: crate::budget::Family,
    },

    #[error("degenerate block: {n} key bits and {m} estimation bits")]
    DegenerateBlock { n: u64, m: u64 },

    #[error("parent pool has {finite} finite-fitness members, need at least 2")]
    DegeneratePool { finite: usize },

    /// Every invariant that a configuration violates, one per entry.
    #[error("invalid configuration: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("failed to parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            expected,
        }
    }

    /// True for errors caused by bad user input rather than by the run itself.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Validation(_) | Error::Parse { .. })
    }
}
