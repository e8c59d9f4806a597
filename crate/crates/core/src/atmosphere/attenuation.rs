use alloc::vec::Vec;

use libm::{exp, pow, sin, sqrt};

use super::lines::{SpectralLine, SpectralLineTable};
use super::profile::{AtmosphericState, ReferenceAtmosphereProfile, PROFILE_TOP_KM};
use crate::{Error, Result};

pub const MIN_FREQUENCY_GHZ: f64 = 1.0;
pub const MAX_FREQUENCY_GHZ: f64 = 1000.0;

/// Path-length step limits for slant integration, km.
pub const LOW_STEP_KM: f64 = 0.1;
pub const HIGH_STEP_KM: f64 = 1.0;
/// Altitude below which the fine step applies, km.
pub const FINE_STEP_CEILING_KM: f64 = 10.0;

/// Straight ray from `start_altitude_km` at a fixed elevation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlantPathSpec {
    /// degrees, in (0, 90]
    pub elevation_deg: f64,
    pub start_altitude_km: f64,
    /// path length along the ray, km
    pub slant_distance_km: f64,
}

impl SlantPathSpec {
    pub fn from_ground(elevation_deg: f64, slant_distance_km: f64) -> Self {
        SlantPathSpec {
            elevation_deg,
            start_altitude_km: 0.0,
            slant_distance_km,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.elevation_deg > 0.0 && self.elevation_deg <= 90.0) {
            return Err(Error::Domain {
                quantity: "elevation angle",
                value: self.elevation_deg,
            });
        }
        if !(self.start_altitude_km >= 0.0) {
            return Err(Error::Domain {
                quantity: "start altitude",
                value: self.start_altitude_km,
            });
        }
        if !(self.slant_distance_km >= 0.0) || !self.slant_distance_km.is_finite() {
            return Err(Error::Domain {
                quantity: "slant distance",
                value: self.slant_distance_km,
            });
        }
        Ok(())
    }

    fn sin_elevation(&self) -> f64 {
        sin(self.elevation_deg.to_radians())
    }

    pub fn end_altitude_km(&self) -> f64 {
        self.start_altitude_km + self.slant_distance_km * self.sin_elevation()
    }
}

/// Line-by-line gaseous attenuation (oxygen + water vapour + dry-air
/// continuum) backed by a checksummed line table.
#[derive(Debug, Clone, PartialEq)]
pub struct GaseousAttenuation {
    lines: SpectralLineTable,
}

impl GaseousAttenuation {
    pub fn new(lines: SpectralLineTable) -> Self {
        GaseousAttenuation { lines }
    }

    pub fn bundled() -> Result<Self> {
        Ok(Self::new(SpectralLineTable::bundled()?))
    }

    pub fn lines(&self) -> &SpectralLineTable {
        &self.lines
    }

    /// Specific attenuation in dB/km at `frequency_ghz` for a local state.
    pub fn specific_attenuation(
        &self,
        frequency_ghz: f64,
        state: &AtmosphericState,
    ) -> Result<f64> {
        check_frequency(frequency_ghz)?;
        state.validate()?;
        Ok(self.specific_attenuation_unchecked(frequency_ghz, state))
    }

    fn specific_attenuation_unchecked(&self, f: f64, state: &AtmosphericState) -> f64 {
        let theta = 300.0 / state.temperature_k;
        let e = state.water_vapour_pressure();
        let p = state.dry_pressure();

        let oxygen: f64 = self
            .lines
            .oxygen
            .iter()
            .map(|l| oxygen_line(l, f, p, e, theta))
            .sum();
        let water: f64 = self
            .lines
            .water_vapour
            .iter()
            .map(|l| water_line(l, f, p, e, theta))
            .sum();
        let continuum = dry_continuum(f, p, e, theta);

        (0.1820 * f * (oxygen + continuum + water)).max(0.0)
    }

    /// Total attenuation (dB) along a straight slant path, integrating the
    /// specific attenuation with Simpson's rule. Nothing is absorbed above
    /// 100 km or above the top of the profile table.
    pub fn slant_attenuation(
        &self,
        path: &SlantPathSpec,
        frequency_ghz: f64,
        profile: &ReferenceAtmosphereProfile,
    ) -> Result<f64> {
        self.slant_attenuation_scaled(path, frequency_ghz, profile, 1.0)
    }

    /// As [`Self::slant_attenuation`] with both step limits multiplied by
    /// `step_scale` (convergence studies use 0.5 or 0.1).
    pub fn slant_attenuation_scaled(
        &self,
        path: &SlantPathSpec,
        frequency_ghz: f64,
        profile: &ReferenceAtmosphereProfile,
        step_scale: f64,
    ) -> Result<f64> {
        check_frequency(frequency_ghz)?;
        path.validate()?;
        if !(step_scale > 0.0 && step_scale <= 1.0) {
            return Err(Error::Domain {
                quantity: "integration step scale",
                value: step_scale,
            });
        }
        let sin_el = path.sin_elevation();
        let ceiling = profile.top_km().min(PROFILE_TOP_KM);
        // path length where the ray crosses the fine-step ceiling / the top
        let s_at = |alt: f64| ((alt - path.start_altitude_km) / sin_el).max(0.0);
        let s_end = path.slant_distance_km.min(s_at(ceiling));
        let s_fine = s_end.min(s_at(FINE_STEP_CEILING_KM));

        let gamma = |s: f64| {
            let alt = path.start_altitude_km + s * sin_el;
            profile
                .state_at(alt.min(ceiling))
                .map(|st| self.specific_attenuation_unchecked(frequency_ghz, &st))
                .unwrap_or(0.0)
        };
        Ok(simpson(&gamma, 0.0, s_fine, LOW_STEP_KM * step_scale)
            + simpson(&gamma, s_fine, s_end, HIGH_STEP_KM * step_scale))
    }

    /// Attenuation from the path start to each of the (ascending) slant
    /// distances, accumulated segment by segment.
    pub fn slant_attenuation_series(
        &self,
        elevation_deg: f64,
        start_altitude_km: f64,
        distances_km: &[f64],
        frequency_ghz: f64,
        profile: &ReferenceAtmosphereProfile,
    ) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(distances_km.len());
        let mut total = 0.0;
        let mut prev = 0.0;
        for &d in distances_km {
            if !(d >= prev) {
                return Err(Error::Domain {
                    quantity: "slant distance (must be ascending)",
                    value: d,
                });
            }
            let seg = SlantPathSpec {
                elevation_deg,
                start_altitude_km: start_altitude_km + prev * sin(elevation_deg.to_radians()),
                slant_distance_km: d - prev,
            };
            total += self.slant_attenuation(&seg, frequency_ghz, profile)?;
            out.push(total);
            prev = d;
        }
        Ok(out)
    }
}

fn check_frequency(f: f64) -> Result<()> {
    if !(MIN_FREQUENCY_GHZ..=MAX_FREQUENCY_GHZ).contains(&f) {
        return Err(Error::Domain {
            quantity: "frequency (GHz)",
            value: f,
        });
    }
    Ok(())
}

fn oxygen_line(l: &SpectralLine, f: f64, p: f64, e: f64, theta: f64) -> f64 {
    let [a1, a2, a3, a4, a5, a6] = l.coeffs;
    let fi = l.frequency_ghz;
    let strength = a1 * 1e-7 * p * theta * theta * theta * exp(a2 * (1.0 - theta));
    let width = a3 * 1e-4 * (p * pow(theta, 0.8 - a4) + 1.1 * e * theta);
    // Zeeman splitting floor
    let width = sqrt(width * width + 2.25e-6);
    let mixing = (a5 + a6 * theta) * 1e-4 * (p + e) * pow(theta, 0.8);
    strength * line_shape(f, fi, width, mixing)
}

fn water_line(l: &SpectralLine, f: f64, p: f64, e: f64, theta: f64) -> f64 {
    let [b1, b2, b3, b4, b5, b6] = l.coeffs;
    let fi = l.frequency_ghz;
    let strength = b1 * 1e-1 * e * pow(theta, 3.5) * exp(b2 * (1.0 - theta));
    let width = b3 * 1e-4 * (p * pow(theta, b4) + b5 * e * pow(theta, b6));
    // Doppler broadening
    let width = 0.535 * width + sqrt(0.217 * width * width + 2.1316e-12 * fi * fi / theta);
    strength * line_shape(f, fi, width, 0.0)
}

fn line_shape(f: f64, fi: f64, width: f64, mixing: f64) -> f64 {
    let below = fi - f;
    let above = fi + f;
    f / fi
        * ((width - mixing * below) / (below * below + width * width)
            + (width - mixing * above) / (above * above + width * width))
}

fn dry_continuum(f: f64, p: f64, e: f64, theta: f64) -> f64 {
    let d = 5.6e-4 * (p + e) * pow(theta, 0.8);
    let debye = if d > 0.0 {
        6.14e-5 / (d * (1.0 + (f / d) * (f / d)))
    } else {
        0.0
    };
    f * p * theta * theta * (debye + 1.4e-12 * p * pow(theta, 1.5) / (1.0 + 1.9e-5 * pow(f, 1.5)))
}

/// Simpson's rule on cells of width `step` anchored at `a`, the last cell
/// cut at `b`. Anchoring keeps the result monotone in `b` for a
/// non-negative integrand.
fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, step: f64) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let mut acc = 0.0;
    let mut left = a;
    let mut f_left = f(a);
    let mut k = 1usize;
    loop {
        let right = (a + k as f64 * step).min(b);
        let f_right = f(right);
        acc += (right - left) / 6.0 * (f_left + 4.0 * f(0.5 * (left + right)) + f_right);
        if right >= b {
            return acc;
        }
        left = right;
        f_left = f_right;
        k += 1;
    }
}
