//! Physical-layer and protocol-rate models for simultaneous classical and
//! quantum communication (SCQC) links.
//!
//! The crate is `no_std` and only needs `alloc` (for line tables and
//! atmosphere profiles). Everything is a pure function over immutable
//! parameter records, so grid sweeps can fan out across threads freely.
//!
//! Modules, bottom-up:
//!
//! * [`phys_math`]: constants plus the entropy / tail / concentration helpers.
//! * [`atmosphere`]: line-by-line gaseous attenuation, slant-path integration
//!   and Bose-Einstein thermal occupancy.
//! * [`fso_channel`]: satellite-to-ground optical downlink transmissivity.
//! * [`dv_qkd`]: two-decoy BB84 finite-size key rate and QSDC payload rate.
//! * [`cv_qkd`]: displaced-GMCS classical rate, Holevo bound and composable
//!   key rate over a thermal-loss channel.
//! * [`sweep`]: altitude sweeps and bisection for the maximum secure altitude.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod atmosphere;
pub mod cv_qkd;
pub mod dv_qkd;
mod error;
pub mod fso_channel;
pub mod phys_math;
pub mod sweep;

pub use error::{Error, Result};

/// Block size of a finite-key analysis, or the asymptotic limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlockSize {
    /// Number of channel uses (pulses / quadrature samples) in one block.
    Finite(f64),
    Asymptotic,
}

impl BlockSize {
    pub fn is_asymptotic(&self) -> bool {
        matches!(self, BlockSize::Asymptotic)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        match *self {
            BlockSize::Finite(n) if !(n >= 1.0) || !n.is_finite() => Err(Error::Domain {
                quantity: "block size",
                value: n,
            }),
            _ => Ok(()),
        }
    }
}

impl core::fmt::Display for BlockSize {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            BlockSize::Finite(n) => write!(f, "{n:e}"),
            BlockSize::Asymptotic => f.write_str("inf"),
        }
    }
}
