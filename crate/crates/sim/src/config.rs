//! TOML run configuration. Every section is optional and falls back to the
//! library defaults; unknown keys anywhere are rejected.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use scqc_core::atmosphere::{AtmosphericState, ProfileNode, ReferenceAtmosphereProfile};
use scqc_core::cv_qkd::{CvProtocolParams, PhaseEncodingNoise};
use scqc_core::dv_qkd::{DecoyProtocolParams, FiniteSizeConfig};
use scqc_core::fso_channel::{FsoChannelParams, OpticalBeam, ReceiverAperture, TurbulenceModel};
use scqc_core::sweep::{LinkScenario, Protocol};
use scqc_core::BlockSize;

use crate::SimError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub sweep: SweepSection,
    pub channel: ChannelSection,
    pub dv: DvSection,
    pub cv: CvSection,
    pub atmosphere: AtmosphereSection,
    pub thermal: ThermalSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub altitude_start_km: f64,
    pub altitude_stop_km: f64,
    pub altitude_step_km: f64,
    pub block_sizes: Vec<BlockSpec>,
    /// used by max-altitude
    pub protocols: Vec<ProtocolSpec>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            altitude_start_km: 100.0,
            altitude_stop_km: 800.0,
            altitude_step_km: 10.0,
            block_sizes: vec![
                BlockSpec(BlockSize::Asymptotic),
                BlockSpec(BlockSize::Finite(1e11)),
                BlockSpec(BlockSize::Finite(1e10)),
                BlockSpec(BlockSize::Finite(1e9)),
            ],
            protocols: vec![ProtocolSpec(Protocol::Dv), ProtocolSpec(Protocol::Cv)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    pub wavelength_nm: f64,
    pub w0_m: f64,
    pub aperture_m: f64,
    pub zenith_deg: f64,
    pub hv_ground_cn2: f64,
    pub hv_wind: f64,
    pub cn2_scale: f64,
    pub jitter_urad: f64,
    pub tau_zenith: f64,
}

impl Default for ChannelSection {
    fn default() -> Self {
        let p = FsoChannelParams::default();
        ChannelSection {
            wavelength_nm: p.beam.wavelength_nm,
            w0_m: p.beam.initial_spot_w0_m,
            aperture_m: p.aperture.radius_m,
            zenith_deg: p.zenith_deg,
            hv_ground_cn2: p.turbulence.hv_ground_cn2,
            hv_wind: p.turbulence.hv_wind,
            cn2_scale: p.turbulence.cn2_scale,
            jitter_urad: p.turbulence.pointing_jitter_urad,
            tau_zenith: p.tau_zenith,
        }
    }
}

impl ChannelSection {
    pub fn params(&self) -> FsoChannelParams {
        FsoChannelParams {
            beam: OpticalBeam {
                wavelength_nm: self.wavelength_nm,
                initial_spot_w0_m: self.w0_m,
            },
            aperture: ReceiverAperture {
                radius_m: self.aperture_m,
            },
            turbulence: TurbulenceModel {
                hv_ground_cn2: self.hv_ground_cn2,
                hv_wind: self.hv_wind,
                cn2_scale: self.cn2_scale,
                pointing_jitter_urad: self.jitter_urad,
            },
            zenith_deg: self.zenith_deg,
            tau_zenith: self.tau_zenith,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DvSection {
    pub mu: f64,
    pub nu: f64,
    pub vacuum_intensity: f64,
    pub eta_receiver: f64,
    pub e0: f64,
    pub y0_stray: f64,
    pub y0_dark: f64,
    pub f_ec: f64,
    pub e_mis: f64,
    pub sift_q: f64,
    pub check_fraction: f64,
    pub epsilon: f64,
    pub p_mu: f64,
    pub p_nu: f64,
    pub p_vac: f64,
}

impl Default for DvSection {
    fn default() -> Self {
        let p = DecoyProtocolParams::default();
        let fs = FiniteSizeConfig::default();
        DvSection {
            mu: p.mu,
            nu: p.nu,
            vacuum_intensity: p.vacuum_intensity,
            eta_receiver: p.eta_receiver,
            e0: p.e0,
            y0_stray: p.y0_stray,
            y0_dark: p.y0_dark,
            f_ec: p.f_ec,
            e_mis: p.e_mis,
            sift_q: p.sift_q,
            check_fraction: p.check_fraction,
            epsilon: fs.epsilon,
            p_mu: fs.intensity_probabilities[0],
            p_nu: fs.intensity_probabilities[1],
            p_vac: fs.intensity_probabilities[2],
        }
    }
}

impl DvSection {
    pub fn params(&self) -> (DecoyProtocolParams, FiniteSizeConfig) {
        (
            DecoyProtocolParams {
                mu: self.mu,
                nu: self.nu,
                vacuum_intensity: self.vacuum_intensity,
                eta_receiver: self.eta_receiver,
                e0: self.e0,
                y0_stray: self.y0_stray,
                y0_dark: self.y0_dark,
                f_ec: self.f_ec,
                e_mis: self.e_mis,
                sift_q: self.sift_q,
                check_fraction: self.check_fraction,
            },
            FiniteSizeConfig {
                block_size: BlockSize::Asymptotic,
                epsilon: self.epsilon,
                intensity_probabilities: [self.p_mu, self.p_nu, self.p_vac],
            },
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvSection {
    pub v_mod: f64,
    pub v_el: f64,
    pub shot_noise_variance: f64,
    pub eta_det: f64,
    pub eta_lo: f64,
    pub n_bg: f64,
    pub ber_target: f64,
    pub p_ec: f64,
    pub eps_cor: f64,
    pub beta: f64,
    pub eps_sec: f64,
    pub eps_hash: f64,
    pub d_bits: f64,
    pub key_fraction: f64,
    pub eps_classical: f64,
}

impl Default for CvSection {
    fn default() -> Self {
        let p = CvProtocolParams::default();
        CvSection {
            v_mod: p.v_mod,
            v_el: p.v_el,
            shot_noise_variance: p.shot_noise_variance,
            eta_det: p.eta_det,
            eta_lo: p.eta_lo,
            n_bg: p.n_bg,
            ber_target: p.ber_target,
            p_ec: p.p_ec,
            eps_cor: p.eps_cor,
            beta: p.beta,
            eps_sec: p.eps_sec,
            eps_hash: p.eps_hash,
            d_bits: p.d_bits,
            key_fraction: p.key_fraction,
            eps_classical: PhaseEncodingNoise::default().eps_classical,
        }
    }
}

impl CvSection {
    pub fn params(&self) -> (CvProtocolParams, PhaseEncodingNoise) {
        (
            CvProtocolParams {
                v_mod: self.v_mod,
                v_el: self.v_el,
                shot_noise_variance: self.shot_noise_variance,
                eta_det: self.eta_det,
                eta_lo: self.eta_lo,
                n_bg: self.n_bg,
                ber_target: self.ber_target,
                p_ec: self.p_ec,
                eps_cor: self.eps_cor,
                beta: self.beta,
                eps_sec: self.eps_sec,
                eps_hash: self.eps_hash,
                d_bits: self.d_bits,
                key_fraction: self.key_fraction,
            },
            PhaseEncodingNoise {
                eps_classical: self.eps_classical,
            },
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AtmosphereSection {
    pub frequency_start_ghz: f64,
    pub frequency_stop_ghz: f64,
    pub frequency_step_ghz: f64,
    pub slant_start_km: f64,
    pub slant_stop_km: f64,
    pub slant_step_km: f64,
    pub elevation_deg: f64,
    pub start_altitude_km: f64,
    /// rows of `[altitude_km, temperature_k, pressure_hpa, water_vapour_g_m3]`;
    /// empty selects the mean annual global reference atmosphere
    pub profile: Vec<[f64; 4]>,
}

impl Default for AtmosphereSection {
    fn default() -> Self {
        AtmosphereSection {
            frequency_start_ghz: 1.0,
            frequency_stop_ghz: 1000.0,
            frequency_step_ghz: 1.0,
            slant_start_km: 1.0,
            slant_stop_km: 30.0,
            slant_step_km: 1.0,
            elevation_deg: 45.0,
            start_altitude_km: 0.0,
            profile: Vec::new(),
        }
    }
}

impl AtmosphereSection {
    pub fn profile(&self) -> Result<ReferenceAtmosphereProfile, SimError> {
        if self.profile.is_empty() {
            return Ok(ReferenceAtmosphereProfile::mean_annual_global());
        }
        let nodes = self
            .profile
            .iter()
            .map(|&[altitude_km, t, p, rho]| {
                Ok(ProfileNode {
                    altitude_km,
                    state: AtmosphericState::new(t, p, rho)?,
                })
            })
            .collect::<Result<Vec<_>, scqc_core::Error>>()
            .map_err(|e| SimError::config("atmosphere.profile", e))?;
        ReferenceAtmosphereProfile::from_nodes(nodes)
            .map_err(|e| SimError::config("atmosphere.profile", e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThermalSection {
    pub frequency_start_hz: f64,
    pub frequency_stop_hz: f64,
    /// `log`: `frequency_count` points per the whole range, evenly in log10;
    /// `linear`: `frequency_step_hz` apart
    pub frequency_spacing: Spacing,
    pub frequency_count: usize,
    pub frequency_step_hz: f64,
    pub temperature_start_k: f64,
    pub temperature_stop_k: f64,
    pub temperature_step_k: f64,
}

impl Default for ThermalSection {
    fn default() -> Self {
        ThermalSection {
            frequency_start_hz: 1e9,
            frequency_stop_hz: 1e15,
            frequency_spacing: Spacing::Log,
            frequency_count: 61,
            frequency_step_hz: 1e12,
            temperature_start_k: 10.0,
            temperature_stop_k: 300.0,
            temperature_step_k: 10.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    /// CSV destination; standard output when absent
    pub path: Option<String>,
}

/// A block size as written in the config: a number or `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockSpec(pub BlockSize);

impl Serialize for BlockSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for BlockSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Int(i64),
            Text(String),
        }
        let n = match Raw::deserialize(d)? {
            Raw::Num(n) => n,
            Raw::Int(n) => n as f64,
            Raw::Text(t) => match t.trim().to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "asymptotic" => return Ok(BlockSpec(BlockSize::Asymptotic)),
                other => other
                    .parse()
                    .map_err(|_| serde::de::Error::custom(format!("invalid block size `{t}`")))?,
            },
        };
        if n.is_infinite() && n > 0.0 {
            return Ok(BlockSpec(BlockSize::Asymptotic));
        }
        if !(n >= 1.0 && n.is_finite()) {
            return Err(serde::de::Error::custom(format!("invalid block size {n}")));
        }
        Ok(BlockSpec(BlockSize::Finite(n)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolSpec(pub Protocol);

impl fmt::Display for ProtocolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.0 {
            Protocol::Dv => "dv",
            Protocol::Cv => "cv",
        })
    }
}

impl Serialize for ProtocolSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ProtocolSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        match s.as_str() {
            "dv" => Ok(ProtocolSpec(Protocol::Dv)),
            "cv" => Ok(ProtocolSpec(Protocol::Cv)),
            _ => Err(serde::de::Error::custom(format!(
                "unknown protocol `{s}` (expected dv or cv)"
            ))),
        }
    }
}

impl Config {
    /// Reads `path` (if any), applies `section.key=value` overrides and
    /// checks every physics parameter.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Config, SimError> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| {
                SimError::Config(format!("cannot read config {}: {e}", p.display()))
            })?,
            None => String::new(),
        };
        Self::from_toml(&text, overrides)
    }

    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Config, SimError> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| SimError::Config(format!("config syntax: {e}")))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        for (name, value) in &table {
            check_section(name, value)?;
        }
        let cfg: Config = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| SimError::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let (dv, fs) = self.dv.params();
        dv.validate().map_err(|e| SimError::config("dv", e))?;
        fs.validate().map_err(|e| SimError::config("dv", e))?;
        let (cv, _) = self.cv.params();
        cv.validate().map_err(|e| SimError::config("cv", e))?;
        if self.cv.eps_classical.is_nan() || self.cv.eps_classical < 0.0 {
            return Err(SimError::Config(format!(
                "cv.eps_classical must be non-negative, got {}",
                self.cv.eps_classical
            )));
        }
        let ch = self.channel.params();
        scqc_core::fso_channel::DownlinkGeometry::new(
            self.sweep.altitude_start_km.max(1.0),
            ch.zenith_deg,
        )
        .validate()
        .map_err(|e| SimError::config("channel.zenith_deg", e))?;
        self.atmosphere.profile()?;
        if self.sweep.block_sizes.is_empty() {
            return Err(SimError::Config(
                "sweep.block_sizes must not be empty".into(),
            ));
        }
        if self.sweep.protocols.is_empty() {
            return Err(SimError::Config("sweep.protocols must not be empty".into()));
        }
        Ok(())
    }

    pub fn scenario(&self) -> LinkScenario {
        let (dv, dv_finite) = self.dv.params();
        let (cv, cv_noise) = self.cv.params();
        LinkScenario {
            channel: self.channel.params(),
            dv,
            dv_finite,
            cv,
            cv_noise,
        }
    }

    /// The resolved configuration as TOML, for embedding in output headers.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// Deserializes one section on its own so that errors name it.
fn check_section(name: &str, value: &toml::Value) -> Result<(), SimError> {
    fn check<T: serde::de::DeserializeOwned>(
        name: &str,
        value: &toml::Value,
    ) -> Result<(), SimError> {
        value
            .clone()
            .try_into::<T>()
            .map(|_| ())
            .map_err(|e| SimError::Config(format!("[{name}] {}", e.message())))
    }
    match name {
        "sweep" => check::<SweepSection>(name, value),
        "channel" => check::<ChannelSection>(name, value),
        "dv" => check::<DvSection>(name, value),
        "cv" => check::<CvSection>(name, value),
        "atmosphere" => check::<AtmosphereSection>(name, value),
        "thermal" => check::<ThermalSection>(name, value),
        "output" => check::<OutputSection>(name, value),
        _ => Err(SimError::Config(format!(
            "unknown section `{name}`, expected one of sweep, channel, dv, cv, atmosphere, thermal, output"
        ))),
    }
}

fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), SimError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| SimError::Config(format!("override `{spec}` is not KEY=VALUE")))?;
    let key = key.trim();
    let (section, field) = key
        .split_once('.')
        .ok_or_else(|| SimError::Config(format!("override key `{key}` must be section.key")))?;
    let value = parse_value(raw.trim());
    let entry = table
        .entry(section.to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    match entry {
        toml::Value::Table(t) => {
            t.insert(field.to_string(), value);
            Ok(())
        }
        _ => Err(SimError::Config(format!("`{section}` is not a section"))),
    }
}

/// A TOML literal if it parses as one, a bare string otherwise.
fn parse_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ov(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn block_sizes_parse() {
        let cfg = Config::from_toml("[sweep]\nblock_sizes = [\"inf\", 1e9, 100, \"1e10\"]\n", &[]).unwrap();
        let got: Vec<BlockSize> = cfg.sweep.block_sizes.iter().map(|b| b.0).collect();
        assert_eq!(
            got,
            [
                BlockSize::Asymptotic,
                BlockSize::Finite(1e9),
                BlockSize::Finite(100.0),
                BlockSize::Finite(1e10)
            ]
        );
        assert!(Config::from_toml("[sweep]\nblock_sizes = [0.5]\n", &[]).is_err());
    }

    #[test]
    fn overrides_take_precedence() {
        let cfg = Config::from_toml("[dv]\nmu = 0.5\n", &ov(&["dv.mu=0.7", "output.path=out.csv"])).unwrap();
        assert_eq!(cfg.dv.mu, 0.7);
        assert_eq!(cfg.output.path.as_deref(), Some("out.csv"));
        assert!(Config::from_toml("", &ov(&["novalue"])).is_err());
        assert!(Config::from_toml("", &ov(&["dv=1"])).is_err());
    }

    #[test]
    fn errors_name_the_key() {
        let e = Config::from_toml("[channel]\nzenith = 80\n", &[]).unwrap_err();
        assert!(e.to_string().contains("zenith"), "{e}");
        assert_eq!(e.exit_code(), 2);
        let e = Config::from_toml("[extra]\n", &[]).unwrap_err();
        assert!(e.to_string().contains("extra"), "{e}");
    }

    #[test]
    fn resolved_config_round_trips() {
        let cfg = Config::from_toml("", &ov(&["cv.v_mod=7", "sweep.protocols=[\"cv\"]"])).unwrap();
        assert_eq!(Config::from_toml(&cfg.to_toml(), &[]).unwrap(), cfg);
    }
}
