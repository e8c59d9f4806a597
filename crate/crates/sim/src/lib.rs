//! Batch runner for the `scqc-core` models: TOML configuration, parallel
//! grid sweeps, secure-altitude searches and self-describing CSV output.

pub mod config;
pub mod run;

pub use config::Config;
pub use run::{run, write_csv, Scenario, Table};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{0}")]
    Infeasible(scqc_core::Error),

    #[error("model error: {0}")]
    Model(scqc_core::Error),

    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl SimError {
    /// Process exit status: 2 for configuration problems, 3 for an
    /// infeasible scenario, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Config(_) => 2,
            SimError::Infeasible(_) => 3,
            SimError::Model(_) | SimError::Io { .. } => 1,
        }
    }

    pub(crate) fn config(key: &str, e: scqc_core::Error) -> Self {
        SimError::Config(format!("{key}: {e}"))
    }
}

impl From<scqc_core::Error> for SimError {
    fn from(e: scqc_core::Error) -> Self {
        match e {
            scqc_core::Error::Infeasible { .. } => SimError::Infeasible(e),
            // every physical input comes from the configuration
            scqc_core::Error::Domain { .. } => SimError::Config(e.to_string()),
            other => SimError::Model(other),
        }
    }
}
