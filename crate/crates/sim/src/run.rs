use std::io::Write;

use rayon::prelude::*;

use scqc_core::atmosphere::{thermal_photon_number, GaseousAttenuation, ThermalOccupancyQuery};
use scqc_core::sweep::{linear_grid, log_grid, max_secure_altitude, Protocol};
use scqc_core::BlockSize;

use crate::config::{Config, Spacing};
use crate::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    DvSweep,
    CvSweep,
    AtmosGrid,
    ThermalGrid,
    MaxAltitude,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::DvSweep => "dv-sweep",
            Scenario::CvSweep => "cv-sweep",
            Scenario::AtmosGrid => "atmos-grid",
            Scenario::ThermalGrid => "thermal-grid",
            Scenario::MaxAltitude => "max-altitude",
        }
    }

    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Scenario::DvSweep => &[
                "altitude_km",
                "block_size",
                "key_rate_bits_per_use",
                "payload_rate_bits_per_use",
                "transmissivity",
            ],
            Scenario::CvSweep => &[
                "altitude_km",
                "block_size",
                "key_rate_bits_per_use",
                "classical_rate_bits_per_use",
                "snr",
                "chi_e",
            ],
            Scenario::AtmosGrid => &["frequency_ghz", "slant_km", "attenuation_db"],
            Scenario::ThermalGrid => &["frequency_hz", "temperature_k", "mean_photons"],
            Scenario::MaxAltitude => &[
                "protocol",
                "block_size",
                "max_secure_altitude_km",
                "key_rate_at_max_bits_per_use",
                "companion_rate_bits_per_use",
                "transmissivity",
                "iterations",
                "unbounded",
            ],
        }
    }
}

/// Rows of formatted cells, ordered by the sweep variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub scenario: Scenario,
    pub rows: Vec<Vec<String>>,
}

pub fn run(scenario: Scenario, cfg: &Config, workers: Option<usize>) -> Result<Table, SimError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| SimError::Config(format!("cannot start {workers:?} workers: {e}")))?;
    let rows = pool.install(|| match scenario {
        Scenario::DvSweep => dv_sweep(cfg),
        Scenario::CvSweep => cv_sweep(cfg),
        Scenario::AtmosGrid => atmos_grid(cfg),
        Scenario::ThermalGrid => thermal_grid(cfg),
        Scenario::MaxAltitude => max_altitude(cfg),
    })?;
    Ok(Table { scenario, rows })
}

/// Shortest round-trip text, in exponent form outside [1e-4, 1e15).
fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Evaluates `f` on every point in parallel, then restores point order.
fn evaluate<P, R, F>(points: Vec<P>, f: F) -> Result<Vec<R>, SimError>
where
    P: Send + Sync,
    R: Send,
    F: Fn(&P) -> Result<R, SimError> + Send + Sync,
{
    let mut out: Vec<(usize, R)> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| f(p).map(|r| (i, r)))
        .collect::<Result<_, _>>()?;
    out.sort_by_key(|(i, _)| *i);
    Ok(out.into_iter().map(|(_, r)| r).collect())
}

fn altitude_block_points(cfg: &Config) -> Result<Vec<(f64, BlockSize)>, SimError> {
    let s = &cfg.sweep;
    let altitudes = linear_grid(s.altitude_start_km, s.altitude_stop_km, s.altitude_step_km)
        .map_err(|e| SimError::config("sweep.altitude_*", e))?;
    Ok(altitudes
        .iter()
        .flat_map(|&h| s.block_sizes.iter().map(move |b| (h, b.0)))
        .collect())
}

fn dv_sweep(cfg: &Config) -> Result<Vec<Vec<String>>, SimError> {
    let scenario = cfg.scenario();
    evaluate(altitude_block_points(cfg)?, |&(h, b)| {
        let pt = scenario.dv_point(h, b)?;
        Ok(vec![
            num(h),
            b.to_string(),
            num(pt.rate.key_rate),
            num(pt.rate.payload_rate),
            num(pt.channel.transmissivity),
        ])
    })
}

fn cv_sweep(cfg: &Config) -> Result<Vec<Vec<String>>, SimError> {
    let scenario = cfg.scenario();
    evaluate(altitude_block_points(cfg)?, |&(h, b)| {
        let pt = scenario.cv_point(h, b)?;
        Ok(vec![
            num(h),
            b.to_string(),
            num(pt.rate.key_rate),
            num(pt.rate.classical_rate),
            num(pt.rate.diagnostics.snr),
            num(pt.rate.diagnostics.chi_e),
        ])
    })
}

fn atmos_grid(cfg: &Config) -> Result<Vec<Vec<String>>, SimError> {
    let a = &cfg.atmosphere;
    let freqs = linear_grid(
        a.frequency_start_ghz,
        a.frequency_stop_ghz,
        a.frequency_step_ghz,
    )
    .map_err(|e| SimError::config("atmosphere.frequency_*", e))?;
    let slants = linear_grid(a.slant_start_km, a.slant_stop_km, a.slant_step_km)
        .map_err(|e| SimError::config("atmosphere.slant_*", e))?;
    let profile = a.profile()?;
    let model = GaseousAttenuation::bundled()?;
    let per_freq = evaluate(freqs, |&f| {
        let att = model.slant_attenuation_series(
            a.elevation_deg,
            a.start_altitude_km,
            &slants,
            f,
            &profile,
        )?;
        Ok(slants
            .iter()
            .zip(att)
            .map(|(&s, db)| vec![num(f), num(s), num(db)])
            .collect::<Vec<_>>())
    })?;
    Ok(per_freq.into_iter().flatten().collect())
}

fn thermal_grid(cfg: &Config) -> Result<Vec<Vec<String>>, SimError> {
    let t = &cfg.thermal;
    let freqs = match t.frequency_spacing {
        Spacing::Log => log_grid(t.frequency_start_hz, t.frequency_stop_hz, t.frequency_count),
        Spacing::Linear => linear_grid(
            t.frequency_start_hz,
            t.frequency_stop_hz,
            t.frequency_step_hz,
        ),
    }
    .map_err(|e| SimError::config("thermal.frequency_*", e))?;
    let temps = linear_grid(
        t.temperature_start_k,
        t.temperature_stop_k,
        t.temperature_step_k,
    )
    .map_err(|e| SimError::config("thermal.temperature_*", e))?;
    let points: Vec<(f64, f64)> = freqs
        .iter()
        .flat_map(|&f| temps.iter().map(move |&k| (f, k)))
        .collect();
    evaluate(points, |&(f, k)| {
        let n = thermal_photon_number(ThermalOccupancyQuery {
            frequency_hz: f,
            temperature_k: k,
        })?;
        Ok(vec![num(f), num(k), num(n)])
    })
}

fn max_altitude(cfg: &Config) -> Result<Vec<Vec<String>>, SimError> {
    let scenario = cfg.scenario();
    let points: Vec<(Protocol, BlockSize)> = cfg
        .sweep
        .protocols
        .iter()
        .flat_map(|p| cfg.sweep.block_sizes.iter().map(move |b| (p.0, b.0)))
        .collect();
    evaluate(points, |&(protocol, b)| {
        let r = max_secure_altitude(protocol, b, &scenario)?;
        let h = r.max_secure_altitude_km;
        let (name, companion, tau) = match protocol {
            Protocol::Dv => {
                let pt = scenario.dv_point(h, b)?;
                ("dv", pt.rate.payload_rate, pt.channel.transmissivity)
            }
            Protocol::Cv => {
                let pt = scenario.cv_point(h, b)?;
                ("cv", pt.rate.classical_rate, pt.channel.transmissivity)
            }
        };
        Ok(vec![
            name.to_string(),
            b.to_string(),
            num(h),
            num(r.rate_at_max),
            num(companion),
            num(tau),
            r.iterations.to_string(),
            r.unbounded.to_string(),
        ])
    })
}

/// CSV with a `#`-prefixed header carrying the scenario and the fully
/// resolved configuration.
pub fn write_csv<W: Write>(mut w: W, table: &Table, cfg: &Config) -> std::io::Result<()> {
    writeln!(
        w,
        "# scqc {} {}",
        env!("CARGO_PKG_VERSION"),
        table.scenario.name()
    )?;
    for line in cfg.to_toml().lines() {
        if line.is_empty() {
            writeln!(w, "#")?;
        } else {
            writeln!(w, "# {line}")?;
        }
    }
    writeln!(w, "{}", table.scenario.columns().join(","))?;
    for row in &table.rows {
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()
}
