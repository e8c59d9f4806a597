use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{quantity} out of domain: {value}")]
    Domain { quantity: &'static str, value: f64 },

    #[error("no single-photon signal extractable (single-photon yield bound {y1_lower})")]
    NoSinglePhotonSignal { y1_lower: f64 },

    #[error("non-physical covariance matrix: symplectic eigenvalue {eigenvalue} < 1")]
    NonPhysicalCovariance { eigenvalue: f64 },

    #[error("infeasible scenario: key rate is zero at the lowest altitude ({altitude_km} km)")]
    Infeasible { altitude_km: f64 },

    #[error("line table, line {line}: {reason}")]
    LineTableParse { line: usize, reason: &'static str },

    #[error("line table checksum mismatch")]
    ChecksumMismatch,

    #[error("atmosphere profile: {0}")]
    Profile(&'static str),
}
