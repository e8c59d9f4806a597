use alloc::vec::Vec;

use libm::{exp, log, pow, sqrt};

use crate::{Error, Result};

/// Local state of the atmosphere. Pressure is the total barometric
/// pressure; the dry-air part is `pressure - water_vapour_pressure()`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtmosphericState {
    /// K
    pub temperature_k: f64,
    /// hPa
    pub pressure_hpa: f64,
    /// g/m^3
    pub water_vapour_density: f64,
}

impl AtmosphericState {
    pub fn new(temperature_k: f64, pressure_hpa: f64, water_vapour_density: f64) -> Result<Self> {
        let s = AtmosphericState {
            temperature_k,
            pressure_hpa,
            water_vapour_density,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature_k > 0.0) || !self.temperature_k.is_finite() {
            return Err(Error::Domain {
                quantity: "temperature",
                value: self.temperature_k,
            });
        }
        if !(self.pressure_hpa >= 0.0) || !self.pressure_hpa.is_finite() {
            return Err(Error::Domain {
                quantity: "pressure",
                value: self.pressure_hpa,
            });
        }
        if !(self.water_vapour_density >= 0.0) || !self.water_vapour_density.is_finite() {
            return Err(Error::Domain {
                quantity: "water vapour density",
                value: self.water_vapour_density,
            });
        }
        Ok(())
    }

    /// Partial pressure of water vapour, hPa.
    pub fn water_vapour_pressure(&self) -> f64 {
        self.water_vapour_density * self.temperature_k / 216.7
    }

    /// Dry-air partial pressure, hPa (never negative).
    pub fn dry_pressure(&self) -> f64 {
        (self.pressure_hpa - self.water_vapour_pressure()).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileNode {
    pub altitude_km: f64,
    pub state: AtmosphericState,
}

/// Tabulated atmosphere from the ground up to (at most) 100 km.
///
/// Between nodes, temperature is interpolated linearly in altitude while
/// pressure and water-vapour density are interpolated exponentially.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceAtmosphereProfile {
    nodes: Vec<ProfileNode>,
}

pub const PROFILE_TOP_KM: f64 = 100.0;

pub const SURFACE_TEMPERATURE_K: f64 = 288.15;
pub const SURFACE_PRESSURE_HPA: f64 = 1013.25;
pub const SURFACE_WATER_VAPOUR: f64 = 7.5;
const WATER_VAPOUR_SCALE_HEIGHT_KM: f64 = 2.0;

impl ReferenceAtmosphereProfile {
    /// Mean annual global reference atmosphere tabulated every 0.5 km from
    /// 0 to 100 km (surface 288.15 K, 1013.25 hPa, 7.5 g/m^3).
    pub fn mean_annual_global() -> Self {
        let nodes = (0..=200)
            .map(|i| {
                let altitude_km = i as f64 * 0.5;
                ProfileNode {
                    altitude_km,
                    state: mean_annual_global_state(altitude_km),
                }
            })
            .collect();
        ReferenceAtmosphereProfile { nodes }
    }

    /// Builds a profile from user rows. Altitudes must start at 0 km and be
    /// strictly increasing; pressure must not increase with altitude.
    pub fn from_nodes(nodes: Vec<ProfileNode>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::Profile("need at least two nodes"));
        }
        if nodes[0].altitude_km != 0.0 {
            return Err(Error::Profile("first node must be at 0 km"));
        }
        for n in &nodes {
            n.state.validate()?;
            if !(n.altitude_km <= PROFILE_TOP_KM) {
                return Err(Error::Profile("node above 100 km"));
            }
        }
        for w in nodes.windows(2) {
            if !(w[1].altitude_km > w[0].altitude_km) {
                return Err(Error::Profile("altitudes must be strictly increasing"));
            }
            if w[1].state.pressure_hpa > w[0].state.pressure_hpa {
                return Err(Error::Profile("pressure increases with altitude"));
            }
        }
        Ok(ReferenceAtmosphereProfile { nodes })
    }

    pub fn nodes(&self) -> &[ProfileNode] {
        &self.nodes
    }

    /// Highest altitude covered by the table, km.
    pub fn top_km(&self) -> f64 {
        self.nodes.last().map(|n| n.altitude_km).unwrap_or(0.0)
    }

    /// Interpolated state, or `None` above the table / below ground.
    pub fn state_at(&self, altitude_km: f64) -> Option<AtmosphericState> {
        if !(altitude_km >= 0.0) || altitude_km > self.top_km() {
            return None;
        }
        let upper = self
            .nodes
            .partition_point(|n| n.altitude_km < altitude_km)
            .min(self.nodes.len() - 1);
        let hi = self.nodes[upper];
        if hi.altitude_km == altitude_km || upper == 0 {
            return Some(hi.state);
        }
        let lo = self.nodes[upper - 1];
        let t = (altitude_km - lo.altitude_km) / (hi.altitude_km - lo.altitude_km);
        Some(AtmosphericState {
            temperature_k: lo.state.temperature_k
                + t * (hi.state.temperature_k - lo.state.temperature_k),
            pressure_hpa: log_interp(lo.state.pressure_hpa, hi.state.pressure_hpa, t),
            water_vapour_density: log_interp(
                lo.state.water_vapour_density,
                hi.state.water_vapour_density,
                t,
            ),
        })
    }
}

impl Default for ReferenceAtmosphereProfile {
    fn default() -> Self {
        Self::mean_annual_global()
    }
}

fn log_interp(a: f64, b: f64, t: f64) -> f64 {
    if a > 0.0 && b > 0.0 {
        a * exp(t * log(b / a))
    } else {
        a + t * (b - a)
    }
}

/// Closed-form mean annual global reference atmosphere at a geometric
/// altitude (km). Temperature and pressure follow the layered lapse-rate
/// model in geopotential height below 86 km and the thermosphere fits
/// above; water vapour decays exponentially with a 2 km scale height.
pub fn mean_annual_global_state(altitude_km: f64) -> AtmosphericState {
    let z = altitude_km.clamp(0.0, PROFILE_TOP_KM);
    let (temperature_k, pressure_hpa) = if z < 86.0 {
        let h = 6356.766 * z / (6356.766 + z);
        lower_atmosphere(h)
    } else {
        upper_atmosphere(z)
    };
    AtmosphericState {
        temperature_k,
        pressure_hpa,
        water_vapour_density: SURFACE_WATER_VAPOUR * exp(-z / WATER_VAPOUR_SCALE_HEIGHT_KM),
    }
}

// h: geopotential height, km
fn lower_atmosphere(h: f64) -> (f64, f64) {
    const G: f64 = 34.1632;
    if h <= 11.0 {
        let t = 288.15 - 6.5 * h;
        (t, 1013.25 * pow(288.15 / t, -G / 6.5))
    } else if h <= 20.0 {
        (216.65, 226.3226 * exp(-G * (h - 11.0) / 216.65))
    } else if h <= 32.0 {
        let t = 216.65 + (h - 20.0);
        (t, 54.749_80 * pow(216.65 / t, G))
    } else if h <= 47.0 {
        let t = 228.65 + 2.8 * (h - 32.0);
        (t, 8.680_422 * pow(228.65 / t, G / 2.8))
    } else if h <= 51.0 {
        (270.65, 1.109_106 * exp(-G * (h - 47.0) / 270.65))
    } else if h <= 71.0 {
        let t = 270.65 - 2.8 * (h - 51.0);
        (t, 0.669_416_7 * pow(270.65 / t, -G / 2.8))
    } else {
        let h = h.min(84.852);
        let t = 214.65 - 2.0 * (h - 71.0);
        (t, 0.039_566_49 * pow(214.65 / t, -G / 2.0))
    }
}

// z: geometric height, km, 86..=100
fn upper_atmosphere(z: f64) -> (f64, f64) {
    let t = if z <= 91.0 {
        186.8673
    } else {
        let u = (z - 91.0) / 19.9429;
        263.1905 - 76.3232 * sqrt((1.0 - u * u).max(0.0))
    };
    let p = exp(
        95.571_899 - 4.011_801 * z + 6.424_731e-2 * z * z - 4.789_660e-4 * z * z * z
            + 1.340_543e-6 * z * z * z * z,
    );
    (t, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn surface_values_exact() {
        let p = ReferenceAtmosphereProfile::mean_annual_global();
        let s = p.state_at(0.0).unwrap();
        assert_eq!(s.temperature_k, SURFACE_TEMPERATURE_K);
        assert_eq!(s.pressure_hpa, SURFACE_PRESSURE_HPA);
        assert_eq!(s.water_vapour_density, SURFACE_WATER_VAPOUR);
    }

    #[test]
    fn reference_values() {
        // Values of the same closed forms as evaluated by ITU-Rpy 0.4 (P.835-6).
        let cases = [
            (
                1.0,
                281.651_022_371_694_7,
                898.762_835_269_479,
                4.548_979_947_844_75,
            ),
            (
                10.0,
                223.252_092_647_978_54,
                264.998_926_632_083_9,
                0.050_534_602_493_141,
            ),
            (
                20.0,
                216.65,
                55.293_585_835_329_92,
                3.404_994_732_186_364e-4,
            ),
            (
                50.0,
                270.65,
                0.797_821_781_035_221_9,
                1.041_595_789_872_301_6e-10,
            ),
            (
                80.0,
                198.638_576_250_868_85,
                0.010_525_341_342_482_796,
                3.186_265_691_468_692e-17,
            ),
        ];
        for (h, t, p, rho) in cases {
            let s = mean_annual_global_state(h);
            assert!((s.temperature_k - t).abs() < 1e-3, "T at {h}");
            assert!(
                (s.pressure_hpa / p - 1.0).abs() < 1e-4,
                "P at {h}: {}",
                s.pressure_hpa
            );
            assert!(
                (s.water_vapour_density / rho - 1.0).abs() < 1e-9,
                "rho at {h}"
            );
        }
    }

    #[test]
    fn interpolation_close_to_closed_form() {
        let p = ReferenceAtmosphereProfile::mean_annual_global();
        for i in 0..1000 {
            let h = i as f64 * 0.0997;
            let a = p.state_at(h).unwrap();
            let b = mean_annual_global_state(h);
            assert!((a.temperature_k - b.temperature_k).abs() < 0.5);
            assert!((a.pressure_hpa / b.pressure_hpa - 1.0).abs() < 2e-3);
            assert!((a.water_vapour_density / b.water_vapour_density - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn pressure_non_increasing() {
        let p = ReferenceAtmosphereProfile::mean_annual_global();
        assert!(p
            .nodes()
            .windows(2)
            .all(|w| w[1].state.pressure_hpa <= w[0].state.pressure_hpa));
        assert_eq!(p.top_km(), 100.0);
        assert!(p.state_at(100.5).is_none());
        assert!(p.state_at(-0.1).is_none());
    }

    #[test]
    fn user_profile_validation() {
        let node = |h: f64, t: f64, p: f64, r: f64| ProfileNode {
            altitude_km: h,
            state: AtmosphericState::new(t, p, r).unwrap(),
        };
        let ok = ReferenceAtmosphereProfile::from_nodes(alloc::vec![
            node(0.0, 300.0, 1000.0, 10.0),
            node(10.0, 230.0, 260.0, 0.1),
        ])
        .unwrap();
        let mid = ok.state_at(5.0).unwrap();
        assert!((mid.temperature_k - 265.0).abs() < 1e-12);
        assert!((mid.pressure_hpa - libm::sqrt(1000.0 * 260.0)).abs() < 1e-9);
        assert!(ReferenceAtmosphereProfile::from_nodes(alloc::vec![
            node(0.0, 300.0, 1000.0, 10.0),
            node(10.0, 230.0, 1100.0, 0.1),
        ])
        .is_err());
        assert!(ReferenceAtmosphereProfile::from_nodes(alloc::vec![
            node(1.0, 300.0, 1000.0, 10.0),
            node(10.0, 230.0, 260.0, 0.1),
        ])
        .is_err());
        assert!(AtmosphericState::new(0.0, 1.0, 1.0).is_err());
        assert!(AtmosphericState::new(10.0, -1.0, 1.0).is_err());
    }
}
