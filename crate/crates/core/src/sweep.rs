//! Composition of the downlink channel with the two protocols: per-altitude
//! rate evaluation and bisection for the highest altitude that still gives
//! a positive key rate.

use alloc::vec::Vec;

use crate::cv_qkd::{
    composable_key_rate, CvProtocolParams, CvRateResult, PhaseEncodingNoise, ThermalLossChannel,
};
use crate::dv_qkd::{finite_key_rate, DecoyProtocolParams, DvRateResult, FiniteSizeConfig};
use crate::fso_channel::{channel_transmissivity, ChannelOutput, FsoChannelParams};
use crate::{BlockSize, Error, Result};

pub const ALTITUDE_MIN_KM: f64 = 100.0;
pub const ALTITUDE_MAX_KM: f64 = 2000.0;
pub const ALTITUDE_TOLERANCE_KM: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Protocol {
    Dv,
    Cv,
}

/// Everything needed to turn an altitude into key rates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LinkScenario {
    pub channel: FsoChannelParams,
    pub dv: DecoyProtocolParams,
    /// block size is ignored; it comes with each evaluation
    pub dv_finite: FiniteSizeConfig,
    pub cv: CvProtocolParams,
    pub cv_noise: PhaseEncodingNoise,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DvPoint {
    pub altitude_km: f64,
    pub block_size: BlockSize,
    pub channel: ChannelOutput,
    pub rate: DvRateResult,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvPoint {
    pub altitude_km: f64,
    pub block_size: BlockSize,
    pub channel: ChannelOutput,
    pub rate: CvRateResult,
}

impl LinkScenario {
    pub fn dv_point(&self, altitude_km: f64, block_size: BlockSize) -> Result<DvPoint> {
        let channel = channel_transmissivity(&self.channel, altitude_km)?;
        let fs = FiniteSizeConfig {
            block_size,
            ..self.dv_finite
        };
        let rate = finite_key_rate(
            self.dv.total_efficiency(channel.transmissivity),
            &self.dv,
            &fs,
        )?;
        Ok(DvPoint {
            altitude_km,
            block_size,
            channel,
            rate,
        })
    }

    pub fn cv_point(&self, altitude_km: f64, block_size: BlockSize) -> Result<CvPoint> {
        let channel = channel_transmissivity(&self.channel, altitude_km)?;
        let ch = ThermalLossChannel::new(channel.transmissivity, self.cv.n_bg)?;
        let rate = composable_key_rate(&ch, &self.cv, &self.cv_noise, block_size)?;
        Ok(CvPoint {
            altitude_km,
            block_size,
            channel,
            rate,
        })
    }

    pub fn key_rate(
        &self,
        protocol: Protocol,
        altitude_km: f64,
        block_size: BlockSize,
    ) -> Result<f64> {
        Ok(match protocol {
            Protocol::Dv => self.dv_point(altitude_km, block_size)?.rate.key_rate,
            Protocol::Cv => self.cv_point(altitude_km, block_size)?.rate.key_rate,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecureAltitudeResult {
    pub block_size: BlockSize,
    pub max_secure_altitude_km: f64,
    /// key rate at `max_secure_altitude_km`
    pub rate_at_max: f64,
    pub iterations: u32,
    /// the rate is still positive at the top of the search range
    pub unbounded: bool,
}

/// Bisection over [`ALTITUDE_MIN_KM`, `ALTITUDE_MAX_KM`] down to
/// [`ALTITUDE_TOLERANCE_KM`]. The key rate must be positive at the lower end.
pub fn max_secure_altitude(
    protocol: Protocol,
    block_size: BlockSize,
    scenario: &LinkScenario,
) -> Result<SecureAltitudeResult> {
    let rate = |h: f64| scenario.key_rate(protocol, h, block_size);
    let mut lo = ALTITUDE_MIN_KM;
    let mut hi = ALTITUDE_MAX_KM;
    let mut rate_lo = rate(lo)?;
    if !(rate_lo > 0.0) {
        return Err(Error::Infeasible { altitude_km: lo });
    }
    let rate_hi = rate(hi)?;
    if rate_hi > 0.0 {
        return Ok(SecureAltitudeResult {
            block_size,
            max_secure_altitude_km: hi,
            rate_at_max: rate_hi,
            iterations: 0,
            unbounded: true,
        });
    }
    let mut iterations = 0;
    while hi - lo > ALTITUDE_TOLERANCE_KM {
        let mid = 0.5 * (lo + hi);
        let r = rate(mid)?;
        if r > 0.0 {
            lo = mid;
            rate_lo = r;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(SecureAltitudeResult {
        block_size,
        max_secure_altitude_km: lo,
        rate_at_max: rate_lo,
        iterations,
        unbounded: false,
    })
}

/// `start, start + step, ...` up to `stop` inclusive (with a relative slack
/// of 1e-9 steps for rounding).
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Domain {
            quantity: "grid step",
            value: step,
        });
    }
    if !(start.is_finite() && stop.is_finite() && stop >= start) {
        return Err(Error::Domain {
            quantity: "grid range",
            value: stop - start,
        });
    }
    let count = libm::floor((stop - start) / step + 1e-9) as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

/// `count` points spaced evenly in log10 between `start` and `stop`.
pub fn log_grid(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    if !(start > 0.0 && stop >= start && stop.is_finite()) || count == 0 {
        return Err(Error::Domain {
            quantity: "log grid range",
            value: start,
        });
    }
    if count == 1 {
        return Ok(alloc::vec![start]);
    }
    let (a, b) = (libm::log10(start), libm::log10(stop));
    Ok((0..count)
        .map(|i| libm::pow(10.0, a + (b - a) * i as f64 / (count - 1) as f64))
        .collect())
}
