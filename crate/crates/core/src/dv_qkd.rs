//! Two-decoy BB84 over a lossy channel: gains, decoy-state bounds on the
//! single-photon contribution, finite-size key rate and the derived QSDC
//! payload rate.
//!
//! Every function takes `eta_total`, the end-to-end detection probability
//! of one photon (channel transmissivity times `eta_receiver`); see
//! [`DecoyProtocolParams::total_efficiency`].

use libm::{exp, log, log2, sqrt};

use crate::phys_math::{binary_entropy_unchecked as h, hoeffding_delta};
use crate::{BlockSize, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoyProtocolParams {
    /// signal intensity, photons/pulse
    pub mu: f64,
    /// weak-decoy intensity
    pub nu: f64,
    pub vacuum_intensity: f64,
    pub eta_receiver: f64,
    /// error rate of background clicks
    pub e0: f64,
    pub y0_stray: f64,
    pub y0_dark: f64,
    pub f_ec: f64,
    pub e_mis: f64,
    pub sift_q: f64,
    /// fraction of rounds spent on eavesdropping checks
    pub check_fraction: f64,
}

impl Default for DecoyProtocolParams {
    fn default() -> Self {
        DecoyProtocolParams {
            mu: 0.6,
            nu: 0.2,
            vacuum_intensity: 0.0,
            eta_receiver: 0.2,
            e0: 0.5,
            y0_stray: 2e-4,
            y0_dark: 2.4e-6,
            f_ec: 1.05,
            e_mis: 0.03,
            sift_q: 0.5,
            check_fraction: 0.35,
        }
    }
}

impl DecoyProtocolParams {
    pub fn y0(&self) -> f64 {
        self.y0_stray + self.y0_dark
    }

    pub fn total_efficiency(&self, channel_transmissivity: f64) -> f64 {
        channel_transmissivity * self.eta_receiver
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.mu > self.nu && self.mu.is_finite()) {
            return Err(Error::Domain {
                quantity: "decoy intensities (need mu > nu > 0)",
                value: self.mu - self.nu,
            });
        }
        if self.vacuum_intensity != 0.0 {
            return Err(Error::Domain {
                quantity: "vacuum intensity",
                value: self.vacuum_intensity,
            });
        }
        for (quantity, value) in [
            ("receiver efficiency", self.eta_receiver),
            ("background error rate", self.e0),
            ("stray-light yield", self.y0_stray),
            ("dark-count yield", self.y0_dark),
            ("misalignment error", self.e_mis),
            ("sifting factor", self.sift_q),
            ("check fraction", self.check_fraction),
        ] {
            unit(quantity, value)?;
        }
        if self.y0() > 1.0 {
            return Err(Error::Domain {
                quantity: "background yield",
                value: self.y0(),
            });
        }
        if !(self.f_ec >= 1.0 && self.f_ec.is_finite()) {
            return Err(Error::Domain {
                quantity: "error-correction efficiency",
                value: self.f_ec,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteSizeConfig {
    pub block_size: BlockSize,
    /// total failure probability
    pub epsilon: f64,
    /// (signal, weak decoy, vacuum)
    pub intensity_probabilities: [f64; 3],
}

impl FiniteSizeConfig {
    pub fn new(block_size: BlockSize) -> Self {
        FiniteSizeConfig {
            block_size,
            epsilon: 1e-10,
            intensity_probabilities: [0.5, 0.25, 0.25],
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.block_size.validate()?;
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Domain {
                quantity: "failure probability",
                value: self.epsilon,
            });
        }
        let sum: f64 = self.intensity_probabilities.iter().sum();
        if self
            .intensity_probabilities
            .iter()
            .any(|&x| !(x > 0.0 && x <= 1.0))
            || (sum - 1.0).abs() > 1e-9
        {
            return Err(Error::Domain {
                quantity: "intensity probabilities (must be positive, sum to 1)",
                value: sum,
            });
        }
        Ok(())
    }
}

impl Default for FiniteSizeConfig {
    fn default() -> Self {
        Self::new(BlockSize::Asymptotic)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainQber {
    pub gain: f64,
    pub qber: f64,
}

/// Gain and QBER of a Poissonian source of mean `intensity`.
pub fn gains_and_qber(eta_total: f64, p: &DecoyProtocolParams, intensity: f64) -> Result<GainQber> {
    unit("total efficiency", eta_total)?;
    if !(intensity >= 0.0 && intensity.is_finite()) {
        return Err(Error::Domain {
            quantity: "intensity",
            value: intensity,
        });
    }
    let y0 = p.y0();
    let detected = -libm::expm1(-eta_total * intensity);
    let gain = y0 + detected;
    let errors = p.e0 * y0 + p.e_mis * detected;
    let qber = if gain > 0.0 { errors / gain } else { p.e0 };
    Ok(GainQber { gain, qber })
}

/// Per-pulse statistics fed to the decoy bounds. In a finite-size analysis
/// these are already shifted to their worst case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoyObservation {
    pub q_mu: f64,
    pub q_nu: f64,
    /// vacuum gain, the estimate of Y0
    pub q_vac: f64,
    /// E_nu Q_nu
    pub eq_nu: f64,
    /// E_0 Q_0 = e0 Y0
    pub eq_vac: f64,
}

impl DecoyObservation {
    pub fn expected(eta_total: f64, p: &DecoyProtocolParams) -> Result<Self> {
        let s = gains_and_qber(eta_total, p, p.mu)?;
        let w = gains_and_qber(eta_total, p, p.nu)?;
        let v = gains_and_qber(eta_total, p, p.vacuum_intensity)?;
        Ok(DecoyObservation {
            q_mu: s.gain,
            q_nu: w.gain,
            q_vac: v.gain,
            eq_nu: w.gain * w.qber,
            eq_vac: v.gain * v.qber,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoyBounds {
    pub y1_lower: f64,
    pub e1_upper: f64,
}

/// Lower bound on the single-photon yield and upper bound on its error
/// rate. Fails when the yield bound does not exceed the background yield,
/// i.e. nothing single-photon can be distilled.
pub fn decoy_bounds(obs: &DecoyObservation, p: &DecoyProtocolParams) -> Result<DecoyBounds> {
    for (quantity, value) in [
        ("signal gain", obs.q_mu),
        ("decoy gain", obs.q_nu),
        ("vacuum gain", obs.q_vac),
        ("decoy error gain", obs.eq_nu),
        ("vacuum error gain", obs.eq_vac),
    ] {
        unit(quantity, value)?;
    }
    let (mu, nu) = (p.mu, p.nu);
    let y1 = mu / (mu * nu - nu * nu)
        * (obs.q_nu * exp(nu)
            - obs.q_mu * exp(mu) * nu * nu / (mu * mu)
            - (mu * mu - nu * nu) / (mu * mu) * obs.q_vac);
    let y1_lower = y1.clamp(0.0, 1.0);
    if !(y1_lower > obs.q_vac) {
        return Err(Error::NoSinglePhotonSignal { y1_lower });
    }
    let e1 = (obs.eq_nu * exp(nu) - obs.eq_vac) / (y1_lower * nu);
    Ok(DecoyBounds {
        y1_lower,
        e1_upper: e1.clamp(0.0, 1.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DvDiagnostics {
    pub q_mu: f64,
    pub e_mu: f64,
    /// 0 when no single-photon signal could be bounded
    pub y1_lower: f64,
    pub e1_upper: f64,
    /// phase-error bound after the finite-size correction
    pub e1_phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DvRateResult {
    pub key_rate: f64,
    pub payload_rate: f64,
    /// false when the raw key-length bound was not positive
    pub secure: bool,
    pub diagnostics: DvDiagnostics,
}

/// Secret key bits per signal pulse of the key-generation rounds.
pub fn finite_key_rate(
    eta_total: f64,
    p: &DecoyProtocolParams,
    fs: &FiniteSizeConfig,
) -> Result<DvRateResult> {
    p.validate()?;
    fs.validate()?;
    let signal = gains_and_qber(eta_total, p, p.mu)?;
    let payload_rate = qsdc_payload_rate(eta_total, p)?;
    let single_photon = p.mu * exp(-p.mu);

    let mut diagnostics = DvDiagnostics {
        q_mu: signal.gain,
        e_mu: signal.qber,
        y1_lower: 0.0,
        e1_upper: 1.0,
        e1_phase: 0.5,
    };
    let leak = p.f_ec * h(signal.qber);

    let raw = match fs.block_size {
        BlockSize::Asymptotic => {
            let obs = DecoyObservation::expected(eta_total, p)?;
            match decoy_bounds(&obs, p) {
                Ok(b) => {
                    diagnostics.y1_lower = b.y1_lower;
                    diagnostics.e1_upper = b.e1_upper;
                    diagnostics.e1_phase = b.e1_upper.min(0.5);
                    p.sift_q
                        * (single_photon * b.y1_lower * (1.0 - h(b.e1_upper)) - signal.gain * leak)
                }
                Err(Error::NoSinglePhotonSignal { .. }) => f64::NEG_INFINITY,
                Err(e) => return Err(e),
            }
        }
        BlockSize::Finite(n) => {
            if !(p.check_fraction > 0.0) {
                return Err(Error::Domain {
                    quantity: "check fraction (finite block needs check rounds)",
                    value: p.check_fraction,
                });
            }
            finite_raw_rate(eta_total, p, fs, n, &mut diagnostics)?
        }
    };

    let secure = raw > 0.0;
    Ok(DvRateResult {
        key_rate: if secure { raw } else { 0.0 },
        payload_rate,
        secure,
        diagnostics,
    })
}

fn finite_raw_rate(
    eta_total: f64,
    p: &DecoyProtocolParams,
    fs: &FiniteSizeConfig,
    n: f64,
    diag: &mut DvDiagnostics,
) -> Result<f64> {
    let eps = fs.epsilon;
    let eps_pe = eps / 6.0;
    let [p_mu, p_nu, p_vac] = fs.intensity_probabilities;
    let single_photon = p.mu * exp(-p.mu);

    let s = gains_and_qber(eta_total, p, p.mu)?;
    let w = gains_and_qber(eta_total, p, p.nu)?;
    let v = gains_and_qber(eta_total, p, p.vacuum_intensity)?;

    // sifted check-round pulses per intensity
    let n_check = n * p.check_fraction * p.sift_q;
    let pulses = [n_check * p_mu, n_check * p_nu, n_check * p_vac];
    let clicks = [pulses[0] * s.gain, pulses[1] * w.gain, pulses[2] * v.gain];
    let errors = [clicks[0] * s.qber, clicks[1] * w.qber, clicks[2] * v.qber];
    let dn = hoeffding_delta(clicks.iter().sum(), eps_pe)?;
    let dm = hoeffding_delta(errors.iter().sum(), eps_pe)?;

    let obs = DecoyObservation {
        q_mu: ((clicks[0] + dn) / pulses[0]).min(1.0),
        q_nu: ((clicks[1] - dn) / pulses[1]).max(0.0),
        q_vac: ((clicks[2] + dn) / pulses[2]).min(1.0),
        eq_nu: ((errors[1] + dm) / pulses[1]).min(1.0),
        eq_vac: ((errors[2] - dm) / pulses[2]).max(0.0),
    };
    let b = match decoy_bounds(&obs, p) {
        Ok(b) => b,
        Err(Error::NoSinglePhotonSignal { .. }) => return Ok(f64::NEG_INFINITY),
        Err(e) => return Err(e),
    };
    diag.y1_lower = b.y1_lower;
    diag.e1_upper = b.e1_upper;

    let key_pulses = n * (1.0 - p.check_fraction) * p.sift_q * p_mu;
    let key_clicks = key_pulses * s.gain;
    let n1 = key_pulses * single_photon * b.y1_lower;
    let nz = pulses[0] * single_photon * b.y1_lower;
    if !(n1 > 1.0 && nz > 1.0) {
        return Ok(f64::NEG_INFINITY);
    }
    let e1_phase = (b.e1_upper + phase_error_correction(n1, nz, b.e1_upper, eps_pe)).min(0.5);
    diag.e1_phase = e1_phase;

    let key_length =
        n1 * (1.0 - h(e1_phase)) - p.f_ec * key_clicks * h(s.qber) - 6.0 * log2(19.0 / eps);
    Ok(key_length / (n * (1.0 - p.check_fraction) * p_mu))
}

/// Random-sampling deviation between the bit error rate measured on `nz`
/// single-photon check events and the phase error rate of `nx` key events.
fn phase_error_correction(nx: f64, nz: f64, e: f64, eps: f64) -> f64 {
    let e = e.clamp(1e-12, 0.5);
    let var = (1.0 - e) * e;
    let total = nx + nz;
    let arg = total / (nx * nz * var * eps * eps);
    sqrt(total * var / (nx * nz * log(2.0)) * log2(arg))
}

/// Net message bits per pulse of the quasi-QSDC mode: signal-state gain
/// after check rounds and error-correction leakage.
pub fn qsdc_payload_rate(eta_total: f64, p: &DecoyProtocolParams) -> Result<f64> {
    let s = gains_and_qber(eta_total, p, p.mu)?;
    Ok(((1.0 - p.check_fraction) * s.gain * (1.0 - p.f_ec * h(s.qber))).max(0.0))
}

fn unit(quantity: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain { quantity, value })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noiseless() -> DecoyProtocolParams {
        DecoyProtocolParams {
            y0_stray: 0.0,
            y0_dark: 0.0,
            e_mis: 0.0,
            ..DecoyProtocolParams::default()
        }
    }

    #[test]
    fn gains_closed_form() {
        let p = DecoyProtocolParams::default();
        let g = gains_and_qber(0.0, &p, p.mu).unwrap();
        assert_eq!(g.gain, p.y0());
        assert!((g.qber - 0.5).abs() < 1e-15);

        let q = DecoyProtocolParams {
            y0_stray: 0.0,
            y0_dark: 0.0,
            ..p
        };
        let g = gains_and_qber(1.0, &q, 0.6).unwrap();
        assert!((g.gain - 0.451_188_363_905_973_6).abs() < 1e-12);
        assert!((g.qber - q.e_mis).abs() < 1e-15);

        assert!(gains_and_qber(1.1, &p, 0.6).is_err());
    }

    #[test]
    fn lossless_noiseless_bounds() {
        let p = noiseless();
        let b = decoy_bounds(&DecoyObservation::expected(1.0, &p).unwrap(), &p).unwrap();
        assert!((0.9..=1.0).contains(&b.y1_lower), "{}", b.y1_lower);
        assert_eq!(b.e1_upper, 0.0);
    }

    #[test]
    fn background_only_has_no_signal() {
        for p in [DecoyProtocolParams::default(), noiseless()] {
            let obs = DecoyObservation::expected(0.0, &p).unwrap();
            assert!(matches!(
                decoy_bounds(&obs, &p),
                Err(Error::NoSinglePhotonSignal { .. })
            ));
            let r = finite_key_rate(0.0, &p, &FiniteSizeConfig::default()).unwrap();
            assert_eq!(r.key_rate, 0.0);
            assert!(!r.secure);
        }
    }

    #[test]
    fn high_qber_kills_key() {
        let p = DecoyProtocolParams {
            e_mis: 0.5,
            ..DecoyProtocolParams::default()
        };
        let r = finite_key_rate(0.01, &p, &FiniteSizeConfig::default()).unwrap();
        assert!(r.diagnostics.e1_upper >= 0.5);
        assert_eq!(r.key_rate, 0.0);
        assert_eq!(r.payload_rate, 0.0);
    }

    #[test]
    fn payload_edges() {
        let p = DecoyProtocolParams {
            check_fraction: 1.0,
            ..DecoyProtocolParams::default()
        };
        assert_eq!(qsdc_payload_rate(0.01, &p).unwrap(), 0.0);
        let p = DecoyProtocolParams::default();
        let pay = qsdc_payload_rate(0.01, &p).unwrap();
        let s = gains_and_qber(0.01, &p, p.mu).unwrap();
        let want = 0.65 * s.gain * (1.0 - 1.05 * h(s.qber));
        assert!((pay - want).abs() < 1e-15);
    }

    #[test]
    fn parameter_validation() {
        let bad = [
            DecoyProtocolParams {
                nu: 0.7,
                ..Default::default()
            },
            DecoyProtocolParams {
                f_ec: 0.9,
                ..Default::default()
            },
            DecoyProtocolParams {
                e0: 1.5,
                ..Default::default()
            },
            DecoyProtocolParams {
                vacuum_intensity: 0.1,
                ..Default::default()
            },
        ];
        for p in bad {
            assert!(p.validate().is_err());
        }
        let fs = FiniteSizeConfig {
            intensity_probabilities: [0.5, 0.5, 0.1],
            ..FiniteSizeConfig::default()
        };
        assert!(fs.validate().is_err());
        assert!(FiniteSizeConfig::new(BlockSize::Finite(0.0))
            .validate()
            .is_err());
    }

    #[test]
    fn finite_below_asymptotic_and_ordered() {
        let p = DecoyProtocolParams::default();
        for i in 1..60 {
            let eta = 0.2 * libm::pow(10.0, -(i as f64) * 0.06);
            let rate = |b| {
                finite_key_rate(eta, &p, &FiniteSizeConfig::new(b))
                    .unwrap()
                    .key_rate
            };
            let inf = rate(BlockSize::Asymptotic);
            let r11 = rate(BlockSize::Finite(1e11));
            let r10 = rate(BlockSize::Finite(1e10));
            let r9 = rate(BlockSize::Finite(1e9));
            assert!(inf >= r11 && r11 >= r10 && r10 >= r9, "eta={eta}");
        }
    }
}
