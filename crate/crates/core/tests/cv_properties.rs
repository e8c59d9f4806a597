use proptest::prelude::*;
use scqc_core::cv_qkd::{
    composable_key_rate, holevo_bound, CvProtocolParams, PhaseEncodingNoise, ThermalLossChannel,
};
use scqc_core::phys_math::{bosonic_entropy, SYMPLECTIC_CLAMP_TOL};
use scqc_core::BlockSize;

prop_compose! {
    fn protocol()(
        v_mod in 0.5f64..40.0,
        v_el in 0.0f64..0.5,
        eta_det in 0.05f64..=1.0,
        eta_lo in 0.05f64..=1.0,
        beta in 0.8f64..=1.0,
    ) -> CvProtocolParams {
        CvProtocolParams { v_mod, v_el, eta_det, eta_lo, beta, ..CvProtocolParams::default() }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn holevo_non_negative_and_physical(
        p in protocol(),
        tau in 1e-4f64..=1.0,
        n in 0.0f64..5.0,
        eps in 0.0f64..0.1,
    ) {
        let ch = ThermalLossChannel::new(tau, n).unwrap();
        let h = holevo_bound(&ch, &p, &PhaseEncodingNoise { eps_classical: eps }).unwrap();
        prop_assert!(h.chi_e >= 0.0);
        for nu in h.nu {
            prop_assert!(nu >= 1.0 - SYMPLECTIC_CLAMP_TOL);
        }
        prop_assert!(bosonic_entropy(h.nu[2]).unwrap() >= 0.0);
    }

    #[test]
    fn finite_never_exceeds_asymptotic(
        p in protocol(),
        tau in 1e-4f64..=1.0,
        log_n in 6.0f64..14.0,
    ) {
        let ch = ThermalLossChannel::new(tau, p.n_bg).unwrap();
        let noise = PhaseEncodingNoise::default();
        let asym = composable_key_rate(&ch, &p, &noise, BlockSize::Asymptotic).unwrap();
        let fin = composable_key_rate(&ch, &p, &noise, BlockSize::Finite(10f64.powf(log_n))).unwrap();
        prop_assert!(fin.key_rate <= asym.key_rate);
        prop_assert!(fin.key_rate >= 0.0);
        if asym.rate_bracket_closed() {
            prop_assert_eq!(asym.key_rate, 0.0);
        }
    }

    #[test]
    fn rate_monotone_in_tau(
        p in protocol(),
        tau in 1e-3f64..=1.0,
        shrink in 0.5f64..0.999,
    ) {
        let noise = PhaseEncodingNoise::default();
        let at = |t: f64, b| {
            composable_key_rate(&ThermalLossChannel::new(t, p.n_bg).unwrap(), &p, &noise, b)
                .unwrap()
                .key_rate
        };
        for b in [BlockSize::Asymptotic, BlockSize::Finite(1e10)] {
            prop_assert!(at(tau * shrink, b) <= at(tau, b) + 1e-15);
        }
    }
}

trait Bracket {
    fn rate_bracket_closed(&self) -> bool;
}

impl Bracket for scqc_core::cv_qkd::CvRateResult {
    /// reconciled information no larger than the Holevo bound
    fn rate_bracket_closed(&self) -> bool {
        self.diagnostics.i_ab <= self.diagnostics.chi_e
    }
}

#[test]
fn lossless_noiseless_channel_leaks_nothing() {
    let ch = ThermalLossChannel::new(1.0, 0.0).unwrap();
    let h = holevo_bound(
        &ch,
        &CvProtocolParams::default(),
        &PhaseEncodingNoise { eps_classical: 0.0 },
    )
    .unwrap();
    assert!(h.chi_e.abs() <= 1e-9, "{}", h.chi_e);
}

#[test]
fn holevo_monotone_in_thermal_photons() {
    let p = CvProtocolParams::default();
    let noise = PhaseEncodingNoise { eps_classical: 0.0 };
    for i in 0..20 {
        let tau = 0.02 + 0.049 * i as f64;
        let mut last = -1.0;
        for j in 0..20 {
            let n = 1e-4 * 10f64.powf(0.2 * j as f64);
            let chi = holevo_bound(&ThermalLossChannel::new(tau, n).unwrap(), &p, &noise)
                .unwrap()
                .chi_e;
            assert!(chi >= last, "tau={tau} n={n}");
            last = chi;
        }
    }
}

#[test]
fn default_rate_decreases_on_descending_grid() {
    let p = CvProtocolParams::default();
    let noise = PhaseEncodingNoise::default();
    for b in [
        BlockSize::Asymptotic,
        BlockSize::Finite(1e11),
        BlockSize::Finite(1e10),
        BlockSize::Finite(1e9),
    ] {
        let mut last = f64::INFINITY;
        for i in 0..300 {
            let tau = 10f64.powf(-(i as f64) * 0.01);
            let r = composable_key_rate(
                &ThermalLossChannel::new(tau, p.n_bg).unwrap(),
                &p,
                &noise,
                b,
            )
            .unwrap()
            .key_rate;
            assert!(r <= last, "{b} tau={tau}");
            last = r;
        }
        assert_eq!(last, 0.0);
    }
}
