//! Satellite-to-ground optical downlink: mean (long-term beam) transmissivity
//! from diffraction, turbulence broadening, pointing jitter, aperture capture
//! and airmass extinction.

use libm::{cos, exp, pow, sin, sqrt};

use crate::phys_math::EARTH_RADIUS_KM;
use crate::{Error, Result};

pub const MAX_ZENITH_DEG: f64 = 80.0;
/// Turbulence above this altitude is ignored, km.
pub const TURBULENCE_CEILING_KM: f64 = 30.0;
const RHO0_INTERVALS: usize = 3000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DownlinkGeometry {
    pub altitude_km: f64,
    pub zenith_deg: f64,
    pub earth_radius_km: f64,
}

impl DownlinkGeometry {
    pub fn new(altitude_km: f64, zenith_deg: f64) -> Self {
        DownlinkGeometry {
            altitude_km,
            zenith_deg,
            earth_radius_km: EARTH_RADIUS_KM,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.altitude_km > 0.0 && self.altitude_km.is_finite()) {
            return Err(Error::Domain {
                quantity: "satellite altitude",
                value: self.altitude_km,
            });
        }
        if !(0.0..=MAX_ZENITH_DEG).contains(&self.zenith_deg) {
            return Err(Error::Domain {
                quantity: "zenith angle",
                value: self.zenith_deg,
            });
        }
        if !(self.earth_radius_km > 0.0) {
            return Err(Error::Domain {
                quantity: "earth radius",
                value: self.earth_radius_km,
            });
        }
        Ok(())
    }

    fn sec_zenith(&self) -> f64 {
        1.0 / cos(self.zenith_deg.to_radians())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalBeam {
    pub wavelength_nm: f64,
    /// waist radius at the transmitter
    pub initial_spot_w0_m: f64,
}

impl Default for OpticalBeam {
    fn default() -> Self {
        OpticalBeam {
            wavelength_nm: 800.0,
            initial_spot_w0_m: 0.20,
        }
    }
}

impl OpticalBeam {
    fn validate(&self) -> Result<()> {
        positive("wavelength", self.wavelength_nm)?;
        positive("beam waist", self.initial_spot_w0_m)
    }

    fn wavelength_m(&self) -> f64 {
        self.wavelength_nm * 1e-9
    }

    pub fn rayleigh_range_m(&self) -> f64 {
        core::f64::consts::PI * self.initial_spot_w0_m * self.initial_spot_w0_m
            / self.wavelength_m()
    }

    /// Vacuum Gaussian-beam radius after `range_m` of propagation.
    pub fn diffraction_radius_m(&self, range_m: f64) -> f64 {
        let r = range_m / self.rayleigh_range_m();
        self.initial_spot_w0_m * sqrt(1.0 + r * r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiverAperture {
    pub radius_m: f64,
}

impl Default for ReceiverAperture {
    fn default() -> Self {
        ReceiverAperture { radius_m: 0.70 }
    }
}

/// Hufnagel-Valley refractive-index structure profile plus radial pointing
/// jitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurbulenceModel {
    /// ground-level Cn², m^(-2/3)
    pub hv_ground_cn2: f64,
    /// rms high-altitude wind speed, m/s
    pub hv_wind: f64,
    /// multiplies the whole profile; 0 switches turbulence off
    pub cn2_scale: f64,
    /// radial std. dev., µrad
    pub pointing_jitter_urad: f64,
}

impl Default for TurbulenceModel {
    fn default() -> Self {
        TurbulenceModel {
            hv_ground_cn2: 1.7e-13,
            hv_wind: 21.0,
            cn2_scale: 1.0,
            pointing_jitter_urad: 2.0,
        }
    }
}

impl TurbulenceModel {
    pub fn off() -> Self {
        TurbulenceModel {
            cn2_scale: 0.0,
            pointing_jitter_urad: 0.0,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        non_negative("ground Cn2", self.hv_ground_cn2)?;
        non_negative("wind speed", self.hv_wind)?;
        non_negative("Cn2 scale", self.cn2_scale)?;
        non_negative("pointing jitter", self.pointing_jitter_urad)
    }

    /// Cn² at `altitude_m` above ground, m^(-2/3).
    pub fn cn2(&self, altitude_m: f64) -> f64 {
        let h = altitude_m;
        let w = self.hv_wind / 27.0;
        let hv = 0.00594 * w * w * pow(1e-5 * h, 10.0) * exp(-h / 1000.0)
            + 2.7e-16 * exp(-h / 1500.0)
            + self.hv_ground_cn2 * exp(-h / 100.0);
        self.cn2_scale * hv
    }
}

/// Every input of the mean-channel model except the satellite altitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FsoChannelParams {
    pub beam: OpticalBeam,
    pub aperture: ReceiverAperture,
    pub turbulence: TurbulenceModel,
    pub zenith_deg: f64,
    /// vertical clear-sky transmissivity
    pub tau_zenith: f64,
}

impl Default for FsoChannelParams {
    fn default() -> Self {
        FsoChannelParams {
            beam: OpticalBeam::default(),
            aperture: ReceiverAperture::default(),
            turbulence: TurbulenceModel::default(),
            zenith_deg: MAX_ZENITH_DEG,
            tau_zenith: 0.91,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelComponents {
    pub geometric_collection: f64,
    pub extinction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelOutput {
    pub transmissivity: f64,
    pub components: ChannelComponents,
    pub slant_range_km: f64,
    pub long_term_beam_radius_m: f64,
}

/// Ground-to-satellite distance on a spherical Earth, km.
pub fn slant_range(geom: &DownlinkGeometry) -> f64 {
    let re = geom.earth_radius_km;
    let r = re + geom.altitude_km;
    let z = geom.zenith_deg.to_radians();
    let s = sin(z);
    sqrt(r * r - re * re * s * s) - re * cos(z)
}

/// Spherical-wave coherence length at the ground receiver, m. Infinite when
/// the Cn² profile vanishes.
pub fn coherence_length(
    beam: &OpticalBeam,
    turb: &TurbulenceModel,
    geom: &DownlinkGeometry,
) -> Result<f64> {
    beam.validate()?;
    turb.validate()?;
    geom.validate()?;
    let k = 2.0 * core::f64::consts::PI / beam.wavelength_m();
    let z = slant_range(geom) * 1e3;
    let sec = geom.sec_zenith();
    let top = geom.altitude_km.min(TURBULENCE_CEILING_KM) * 1e3;

    // path weight ((z - s)/z)^(5/3) with s measured from the satellite
    let integrand = |h: f64| turb.cn2(h) * pow(h * sec / z, 5.0 / 3.0);
    let n = RHO0_INTERVALS;
    let step = top / n as f64;
    let mut acc = integrand(0.0) + integrand(top);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * integrand(i as f64 * step);
    }
    let integral = acc * step / 3.0;

    if integral == 0.0 {
        return Ok(f64::INFINITY);
    }
    let rho0 = pow(1.46 * k * k * sec * integral, -0.6);
    if !(rho0 > 0.0) {
        return Err(Error::Domain {
            quantity: "coherence length",
            value: rho0,
        });
    }
    Ok(rho0)
}

/// Long-term beam radius at the receiver: diffraction, turbulence
/// broadening and pointing jitter added in quadrature, m.
pub fn long_term_beam_radius(
    beam: &OpticalBeam,
    turb: &TurbulenceModel,
    geom: &DownlinkGeometry,
) -> Result<f64> {
    let rho0 = coherence_length(beam, turb, geom)?;
    let z = slant_range(geom) * 1e3;
    let wd = beam.diffraction_radius_m(z);
    let spread = beam.wavelength_m() * z / (core::f64::consts::PI * rho0);
    let jitter = z * turb.pointing_jitter_urad * 1e-6;
    Ok(sqrt(wd * wd + 2.0 * spread * spread + jitter * jitter))
}

/// Fraction of a Gaussian beam of radius `w_lt_m` captured by a centred
/// circular aperture.
pub fn collection_efficiency(w_lt_m: f64, aperture: &ReceiverAperture) -> Result<f64> {
    positive("beam radius", w_lt_m)?;
    positive("aperture radius", aperture.radius_m)?;
    let a = aperture.radius_m / w_lt_m;
    Ok(-libm::expm1(-2.0 * a * a))
}

pub fn extinction_transmissivity(
    geom: &DownlinkGeometry,
    zenith_transmissivity: f64,
) -> Result<f64> {
    geom.validate()?;
    if !(zenith_transmissivity > 0.0 && zenith_transmissivity <= 1.0) {
        return Err(Error::Domain {
            quantity: "zenith transmissivity",
            value: zenith_transmissivity,
        });
    }
    Ok(pow(zenith_transmissivity, geom.sec_zenith()))
}

pub fn channel_transmissivity(
    params: &FsoChannelParams,
    altitude_km: f64,
) -> Result<ChannelOutput> {
    params.aperture.validate()?;
    let geom = DownlinkGeometry::new(altitude_km, params.zenith_deg);
    let w_lt = long_term_beam_radius(&params.beam, &params.turbulence, &geom)?;
    let geometric_collection = collection_efficiency(w_lt, &params.aperture)?;
    let extinction = extinction_transmissivity(&geom, params.tau_zenith)?;
    Ok(ChannelOutput {
        transmissivity: geometric_collection * extinction,
        components: ChannelComponents {
            geometric_collection,
            extinction,
        },
        slant_range_km: slant_range(&geom),
        long_term_beam_radius_m: w_lt,
    })
}

impl ReceiverAperture {
    fn validate(&self) -> Result<()> {
        positive("aperture radius", self.radius_m)
    }
}

fn positive(quantity: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { quantity, value })
    }
}

fn non_negative(quantity: &'static str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { quantity, value })
    }
}
