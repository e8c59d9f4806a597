//! Displaced Gaussian-modulated coherent states: a PSK classical bit rides on
//! a displacement of each Gaussian-modulated coherent state, both read out
//! by one homodyne detector.
//!
//! All variances are in shot-noise units (vacuum = 1). The receiver's
//! efficiency `eta_det * eta_lo` and electronic noise `v_el` are trusted.

use libm::{log2, sqrt};

use crate::phys_math::{bosonic_entropy, gaussian_tail_ber_inverse, SYMPLECTIC_CLAMP_TOL};
use crate::{BlockSize, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvProtocolParams {
    /// modulation variance, SNU
    pub v_mod: f64,
    /// electronic noise, SNU
    pub v_el: f64,
    /// raw-unit vacuum quadrature variance
    pub shot_noise_variance: f64,
    pub eta_det: f64,
    pub eta_lo: f64,
    /// background photons per mode
    pub n_bg: f64,
    pub ber_target: f64,
    pub p_ec: f64,
    pub eps_cor: f64,
    pub beta: f64,
    pub eps_sec: f64,
    pub eps_hash: f64,
    pub d_bits: f64,
    /// fraction of the block used for key generation
    pub key_fraction: f64,
}

impl Default for CvProtocolParams {
    fn default() -> Self {
        CvProtocolParams {
            v_mod: 5.0,
            v_el: 0.1,
            shot_noise_variance: 0.25,
            eta_det: 0.5,
            eta_lo: 0.63,
            n_bg: 9.31e-10,
            ber_target: 1e-6,
            p_ec: 0.9,
            eps_cor: 1e-10,
            beta: 0.98,
            eps_sec: 1e-10,
            eps_hash: 1e-10,
            d_bits: 5.0,
            key_fraction: 0.5,
        }
    }
}

impl CvProtocolParams {
    pub fn trusted_efficiency(&self) -> f64 {
        self.eta_det * self.eta_lo
    }

    pub fn raw_to_snu(&self, raw_variance: f64) -> f64 {
        raw_variance / self.shot_noise_variance
    }

    pub fn snu_to_raw(&self, snu: f64) -> f64 {
        snu * self.shot_noise_variance
    }

    pub fn validate(&self) -> Result<()> {
        for (quantity, value) in [
            ("detector efficiency", self.eta_det),
            ("LO loss factor", self.eta_lo),
            ("error-correction success probability", self.p_ec),
            ("reconciliation efficiency", self.beta),
            ("key fraction", self.key_fraction),
        ] {
            if !(value > 0.0 && value <= 1.0) {
                return Err(Error::Domain { quantity, value });
            }
        }
        for (quantity, value) in [
            ("correctness bound", self.eps_cor),
            ("security parameter", self.eps_sec),
            ("hashing parameter", self.eps_hash),
        ] {
            if !(value > 0.0 && value < 1.0) {
                return Err(Error::Domain { quantity, value });
            }
        }
        if !(self.ber_target > 0.0 && self.ber_target <= 0.5) {
            return Err(Error::Domain {
                quantity: "bit-error-rate target",
                value: self.ber_target,
            });
        }
        for (quantity, value) in [
            ("modulation variance", self.v_mod),
            ("shot-noise variance", self.shot_noise_variance),
            ("discretization bits", self.d_bits),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::Domain { quantity, value });
            }
        }
        for (quantity, value) in [
            ("electronic noise", self.v_el),
            ("background photons", self.n_bg),
        ] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::Domain { quantity, value });
            }
        }
        Ok(())
    }
}

/// Bosonic channel of transmissivity `tau` mixing in a thermal environment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalLossChannel {
    pub tau: f64,
    pub n_thermal: f64,
}

impl ThermalLossChannel {
    pub fn new(tau: f64, n_thermal: f64) -> Result<Self> {
        let ch = ThermalLossChannel { tau, n_thermal };
        ch.validate()?;
        Ok(ch)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Error::Domain {
                quantity: "channel transmissivity",
                value: self.tau,
            });
        }
        if !(self.n_thermal >= 0.0 && self.n_thermal.is_finite()) {
            return Err(Error::Domain {
                quantity: "thermal photons",
                value: self.n_thermal,
            });
        }
        Ok(())
    }

    pub fn output_variance(&self, input_variance: f64) -> f64 {
        self.tau * input_variance + (1.0 - self.tau) * (2.0 * self.n_thermal + 1.0)
    }
}

/// Residual noise of the classical phase encoding, carried as an extra
/// thermal environment of `eps_classical / 2` photons per mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseEncodingNoise {
    /// SNU
    pub eps_classical: f64,
}

impl Default for PhaseEncodingNoise {
    fn default() -> Self {
        PhaseEncodingNoise {
            eps_classical: 0.004,
        }
    }
}

impl PhaseEncodingNoise {
    pub fn equivalent_thermal_photons(&self) -> f64 {
        self.eps_classical / 2.0
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps_classical >= 0.0 && self.eps_classical.is_finite()) {
            return Err(Error::Domain {
                quantity: "classical-encoding noise",
                value: self.eps_classical,
            });
        }
        Ok(())
    }
}

/// Environment photons per mode seen by the key modulation.
pub fn total_thermal_photons(ch: &ThermalLossChannel, noise: &PhaseEncodingNoise) -> f64 {
    ch.n_thermal + noise.equivalent_thermal_photons()
}

/// Channel excess noise referred to the channel input, SNU.
pub fn input_referred_excess_noise(ch: &ThermalLossChannel, noise: &PhaseEncodingNoise) -> f64 {
    2.0 * total_thermal_photons(ch, noise) * (1.0 - ch.tau) / ch.tau
}

/// Displacement needed so that a sign decision on a Gaussian quadrature of
/// variance `sigma2` (SNU) after transmissivity `tau_total` meets `ber`.
pub fn displacement_for_ber(sigma2: f64, tau_total: f64, ber: f64) -> Result<f64> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::Domain {
            quantity: "quadrature noise variance",
            value: sigma2,
        });
    }
    if !(tau_total > 0.0 && tau_total <= 1.0) {
        return Err(Error::Domain {
            quantity: "total transmissivity",
            value: tau_total,
        });
    }
    Ok(gaussian_tail_ber_inverse(ber)? * sqrt(sigma2 / tau_total))
}

/// Quadrature noise seen by the classical bit decision, SNU: shot noise,
/// Gaussian key modulation, channel excess noise and electronic noise.
pub fn classical_noise_variance(
    ch: &ThermalLossChannel,
    p: &CvProtocolParams,
    noise: &PhaseEncodingNoise,
) -> f64 {
    let t = ch.tau * p.trusted_efficiency();
    1.0 + t * p.v_mod + t * input_referred_excess_noise(ch, noise) + p.v_el
}

pub fn classical_displacement(
    ch: &ThermalLossChannel,
    p: &CvProtocolParams,
    noise: &PhaseEncodingNoise,
) -> Result<f64> {
    ch.validate()?;
    p.validate()?;
    noise.validate()?;
    displacement_for_ber(
        classical_noise_variance(ch, p, noise),
        ch.tau * p.trusted_efficiency(),
        p.ber_target,
    )
}

/// Signal-to-noise ratio of the key quadrature at the homodyne output.
pub fn signal_to_noise(
    ch: &ThermalLossChannel,
    p: &CvProtocolParams,
    noise: &PhaseEncodingNoise,
) -> f64 {
    let t = ch.tau * p.trusted_efficiency();
    t * p.v_mod / (1.0 + t * input_referred_excess_noise(ch, noise) + p.v_el)
}

/// Reconciled mutual information `beta * I_AB`, bits/use.
pub fn mutual_information(
    ch: &ThermalLossChannel,
    p: &CvProtocolParams,
    noise: &PhaseEncodingNoise,
) -> Result<f64> {
    ch.validate()?;
    p.validate()?;
    noise.validate()?;
    Ok(p.beta * 0.5 * log2(1.0 + signal_to_noise(ch, p, noise)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolevoBound {
    /// bits/use
    pub chi_e: f64,
    /// symplectic eigenvalues: the two of Eve's joint state, then the two
    /// conditioned on the receiver's homodyne outcome
    pub nu: [f64; 4],
}

/// Eve's Holevo information on the receiver's homodyne data (reverse
/// reconciliation), with the receiver's inefficiency and electronic noise
/// trusted.
pub fn holevo_bound(
    ch: &ThermalLossChannel,
    p: &CvProtocolParams,
    noise: &PhaseEncodingNoise,
) -> Result<HolevoBound> {
    ch.validate()?;
    p.validate()?;
    noise.validate()?;
    let t = ch.tau;
    let v = p.v_mod + 1.0;
    let eta = p.trusted_efficiency();

    let chi_line = 1.0 / t - 1.0 + input_referred_excess_noise(ch, noise);
    let chi_hom = (1.0 + p.v_el) / eta - 1.0;
    let chi_tot = chi_line + chi_hom / t;

    let a = v * v * (1.0 - 2.0 * t) + 2.0 * t + t * t * (v + chi_line) * (v + chi_line);
    let b = t * t * (v * chi_line + 1.0) * (v * chi_line + 1.0);
    let [nu1, nu2] = symplectic_pair(a, b);

    let sqrt_b = sqrt(b);
    let denom = t * (v + chi_tot);
    let c = (v * sqrt_b + t * (v + chi_line) + a * chi_hom) / denom;
    let d = sqrt_b * (v + sqrt_b * chi_hom) / denom;
    let [nu3, nu4] = symplectic_pair(c, d);

    let chi = bosonic_entropy(nu1)? + bosonic_entropy(nu2)?
        - bosonic_entropy(nu3)?
        - bosonic_entropy(nu4)?;
    Ok(HolevoBound {
        chi_e: chi.max(0.0),
        nu: [nu1, nu2, nu3, nu4],
    })
}

/// Roots of `x^4 - sum x^2 + product = 0`, larger first.
fn symplectic_pair(sum: f64, product: f64) -> [f64; 2] {
    let disc = (sum * sum - 4.0 * product).max(0.0);
    let hi = sqrt((sum + sqrt(disc)) / 2.0);
    let lo = sqrt(product) / hi;
    let snap = |x: f64| {
        if (x - 1.0).abs() <= SYMPLECTIC_CLAMP_TOL {
            1.0
        } else {
            x
        }
    };
    [snap(hi), snap(lo)]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvDiagnostics {
    pub snr: f64,
    /// reconciled mutual information, bits/use
    pub i_ab: f64,
    pub chi_e: f64,
    pub nu: [f64; 4],
    /// SNU^(1/2)
    pub displacement_amplitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvRateResult {
    pub key_rate: f64,
    /// reconciled Shannon information of the classical channel, bits/use
    pub classical_rate: f64,
    pub secure: bool,
    pub diagnostics: CvDiagnostics,
}

/// Finite-size correction terms for a block of `n_key` key symbols:
/// `(Delta_aep, Theta)`.
pub fn finite_size_terms(p: &CvProtocolParams) -> (f64, f64) {
    let delta_aep = 4.0
        * log2(libm::exp2(p.d_bits / 2.0) + 2.0)
        * sqrt(log2(18.0 / (p.p_ec * p.p_ec * libm::pow(p.eps_sec, 4.0))));
    let theta = log2(p.p_ec * (1.0 - p.eps_sec * p.eps_sec / 3.0))
        + 2.0 * log2(core::f64::consts::SQRT_2 * p.eps_hash);
    (delta_aep, theta)
}

/// Composable secret key rate, bits per channel use. `Theta` is negative
/// and enters as a penalty.
pub fn composable_key_rate(
    ch: &ThermalLossChannel,
    p: &CvProtocolParams,
    noise: &PhaseEncodingNoise,
    block: BlockSize,
) -> Result<CvRateResult> {
    block.validate()?;
    let i_ab = mutual_information(ch, p, noise)?;
    let holevo = holevo_bound(ch, p, noise)?;
    let displacement = classical_displacement(ch, p, noise)?;

    let raw = match block {
        BlockSize::Asymptotic => p.p_ec * (i_ab - holevo.chi_e),
        BlockSize::Finite(n_total) => {
            let n = p.key_fraction * n_total;
            let (delta_aep, theta) = finite_size_terms(p);
            p.p_ec * p.key_fraction * (i_ab - holevo.chi_e - delta_aep / sqrt(n) + theta / n)
        }
    };
    let secure = raw > 0.0;
    Ok(CvRateResult {
        key_rate: if secure { raw } else { 0.0 },
        classical_rate: i_ab,
        secure,
        diagnostics: CvDiagnostics {
            snr: signal_to_noise(ch, p, noise),
            i_ab,
            chi_e: holevo.chi_e,
            nu: holevo.nu,
            displacement_amplitude: displacement,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn channel(tau: f64) -> ThermalLossChannel {
        ThermalLossChannel::new(tau, CvProtocolParams::default().n_bg).unwrap()
    }

    #[test]
    fn snu_round_trip() {
        let p = CvProtocolParams::default();
        assert_eq!(p.raw_to_snu(0.25), 1.0);
        assert_eq!(p.snu_to_raw(1.0), 0.25);
        assert_eq!(p.raw_to_snu(p.snu_to_raw(5.0)), 5.0);
    }

    #[test]
    fn output_variance_identity() {
        let ch = ThermalLossChannel::new(0.3, 2.0).unwrap();
        assert!((ch.output_variance(6.0) - (1.8 + 0.7 * 5.0)).abs() < 1e-15);
        assert!(ThermalLossChannel::new(0.0, 0.0).is_err());
    }

    #[test]
    fn displacement_values() {
        let d = displacement_for_ber(1.0, 1.0, 1e-6).unwrap();
        assert!((d - 4.7534).abs() < 1e-3);
        assert_eq!(displacement_for_ber(1.0, 1.0, 0.5).unwrap(), 0.0);
        let d4 = displacement_for_ber(1.0, 0.25, 1e-6).unwrap();
        assert!((d4 / d - 2.0).abs() < 1e-12);
    }

    #[test]
    fn unit_snr_gives_half_bit() {
        // tau_total = 1 with v_mod = 1 + v_el and no excess noise: SNR = 1
        let p = CvProtocolParams {
            beta: 1.0,
            eta_det: 1.0,
            eta_lo: 1.0,
            v_mod: 1.1,
            ..CvProtocolParams::default()
        };
        let ch = ThermalLossChannel::new(1.0, 0.0).unwrap();
        let i = mutual_information(&ch, &p, &PhaseEncodingNoise::default()).unwrap();
        assert!((i - 0.5).abs() < 1e-15);
    }

    #[test]
    fn lossless_channel_leaks_nothing() {
        let p = CvProtocolParams::default();
        let ch = ThermalLossChannel::new(1.0, 0.0).unwrap();
        let noise = PhaseEncodingNoise { eps_classical: 0.0 };
        let h = holevo_bound(&ch, &p, &noise).unwrap();
        assert!(h.chi_e.abs() < 1e-9);
        for nu in h.nu {
            assert!((nu - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn untrusted_receiver_matches_single_conditional_eigenvalue() {
        // ideal detector: the conditional state has one eigenvalue
        // sqrt(a (a - c^2/b)) and the other equals 1
        let p = CvProtocolParams {
            eta_det: 1.0,
            eta_lo: 1.0,
            v_el: 0.0,
            ..CvProtocolParams::default()
        };
        let ch = ThermalLossChannel::new(0.3, 0.01).unwrap();
        let noise = PhaseEncodingNoise { eps_classical: 0.0 };
        let h = holevo_bound(&ch, &p, &noise).unwrap();
        let v = p.v_mod + 1.0;
        let chi_line = (1.0 - 0.3) / 0.3 * (2.0 * 0.01 + 1.0);
        let a = v;
        let b = 0.3 * (v + chi_line);
        let c2 = 0.3 * (v * v - 1.0);
        let nu3 = sqrt(a * (a - c2 / b));
        assert!((h.nu[2] - nu3).abs() < 1e-9, "{} vs {nu3}", h.nu[2]);
        assert!((h.nu[3] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn finite_size_constants() {
        let (delta, theta) = finite_size_terms(&CvProtocolParams::default());
        // 4 log2(2^2.5 + 2) sqrt(log2(18 / (0.81e-40)))
        assert!(
            (delta - 4.0 * log2(libm::pow(2.0, 2.5) + 2.0) * sqrt(log2(18.0 / 0.81e-40))).abs()
                < 1e-9
        );
        assert!(theta < 0.0);
    }

    #[test]
    fn rates_ordered_and_clamped() {
        let p = CvProtocolParams::default();
        let noise = PhaseEncodingNoise::default();
        for i in 0..80 {
            let tau = libm::pow(10.0, -(i as f64) * 0.04);
            let ch = channel(tau);
            let rate = |b| composable_key_rate(&ch, &p, &noise, b).unwrap().key_rate;
            let (a, r11, r10, r9) = (
                rate(BlockSize::Asymptotic),
                rate(BlockSize::Finite(1e11)),
                rate(BlockSize::Finite(1e10)),
                rate(BlockSize::Finite(1e9)),
            );
            assert!(a >= r11 && r11 >= r10 && r10 >= r9, "tau={tau}");
            assert!(r9 >= 0.0);
        }
    }

    #[test]
    fn noise_monotonicity() {
        let p = CvProtocolParams::default();
        let ch = channel(0.3);
        let mut last_rate = f64::INFINITY;
        let mut last_disp = 0.0;
        for i in 0..20 {
            let noise = PhaseEncodingNoise {
                eps_classical: 0.001 * i as f64,
            };
            let r = composable_key_rate(&ch, &p, &noise, BlockSize::Asymptotic).unwrap();
            assert!(r.key_rate > 0.0 && r.key_rate < last_rate);
            assert!(r.diagnostics.displacement_amplitude > last_disp);
            last_rate = r.key_rate;
            last_disp = r.diagnostics.displacement_amplitude;
        }
    }
}
