//! Gaseous absorption along slant paths and thermal background occupancy
//! for the microwave / mmWave / THz bands.

mod attenuation;
mod lines;
mod profile;

pub use attenuation::{
    GaseousAttenuation, SlantPathSpec, FINE_STEP_CEILING_KM, HIGH_STEP_KM, LOW_STEP_KM,
    MAX_FREQUENCY_GHZ, MIN_FREQUENCY_GHZ,
};
pub use lines::{
    parse_lines, sha256_hex, SpectralLine, SpectralLineTable, OXYGEN_FILE, OXYGEN_LINE_COUNT,
    WATER_FILE, WATER_LINE_COUNT,
};
pub use profile::{
    mean_annual_global_state, AtmosphericState, ProfileNode, ReferenceAtmosphereProfile,
    PROFILE_TOP_KM, SURFACE_PRESSURE_HPA, SURFACE_TEMPERATURE_K, SURFACE_WATER_VAPOUR,
};

use crate::phys_math::CONSTANTS;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalOccupancyQuery {
    pub frequency_hz: f64,
    pub temperature_k: f64,
}

/// Bose-Einstein mean photon number per mode.
pub fn thermal_photon_number(q: ThermalOccupancyQuery) -> Result<f64> {
    if !(q.frequency_hz > 0.0 && q.frequency_hz.is_finite()) {
        return Err(Error::Domain {
            quantity: "frequency (Hz)",
            value: q.frequency_hz,
        });
    }
    if !(q.temperature_k > 0.0 && q.temperature_k.is_finite()) {
        return Err(Error::Domain {
            quantity: "temperature",
            value: q.temperature_k,
        });
    }
    let x = CONSTANTS.planck_constant * q.frequency_hz
        / (CONSTANTS.boltzmann_constant * q.temperature_k);
    Ok(1.0 / libm::expm1(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nbar(f: f64, t: f64) -> f64 {
        thermal_photon_number(ThermalOccupancyQuery {
            frequency_hz: f,
            temperature_k: t,
        })
        .unwrap()
    }

    #[test]
    fn closed_form_values() {
        assert!((nbar(1e12, 295.0) - 5.66).abs() < 0.01);
        assert!(nbar(193e12, 298.15) < 1e-5);
        assert_eq!(nbar(193e12, 1e-3), 0.0);
        // Rayleigh-Jeans limit kT/hf
        let rj = CONSTANTS.boltzmann_constant * 300.0 / (CONSTANTS.planck_constant * 1e6);
        assert!((nbar(1e6, 300.0) / rj - 1.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_non_positive() {
        for (f, t) in [(0.0, 300.0), (1e9, 0.0), (-1.0, 1.0), (f64::NAN, 1.0)] {
            assert!(thermal_photon_number(ThermalOccupancyQuery {
                frequency_hz: f,
                temperature_k: t
            })
            .is_err());
        }
    }
}
