use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scqc_core::dv_qkd::{
    decoy_bounds, finite_key_rate, qsdc_payload_rate, DecoyObservation, DecoyProtocolParams,
    FiniteSizeConfig,
};
use scqc_core::BlockSize;

/// Gains and error gains summed over the photon-number distribution, with
/// n-photon yield Y0 + 1 - (1 - eta)^n and error yield
/// e0 Y0 + e_mis (1 - (1 - eta)^n).
fn poisson_observation(eta: f64, p: &DecoyProtocolParams) -> DecoyObservation {
    let sum = |k: f64, yield_of: &dyn Fn(i32) -> f64| {
        let mut term = (-k).exp();
        let mut acc = 0.0;
        for n in 0..120 {
            if n > 0 {
                term *= k / n as f64;
            }
            acc += term * yield_of(n);
        }
        acc
    };
    let y0 = p.y0();
    let y = |n: i32| y0 + 1.0 - (1.0 - eta).powi(n);
    let ey = |n: i32| p.e0 * y0 + p.e_mis * (1.0 - (1.0 - eta).powi(n));
    DecoyObservation {
        q_mu: sum(p.mu, &y),
        q_nu: sum(p.nu, &y),
        q_vac: y(0),
        eq_nu: sum(p.nu, &ey),
        eq_vac: ey(0),
    }
}

fn params(y0: f64, e_mis: f64) -> DecoyProtocolParams {
    DecoyProtocolParams {
        y0_stray: y0,
        y0_dark: 0.0,
        e_mis,
        ..DecoyProtocolParams::default()
    }
}

fn rate(eta: f64, p: &DecoyProtocolParams, b: BlockSize) -> f64 {
    finite_key_rate(eta, p, &FiniteSizeConfig::new(b))
        .unwrap()
        .key_rate
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn decoy_bounds_respect_poisson_oracle(
        eta in 1e-5f64..=1.0,
        y0 in 0.0f64..1e-3,
        e_mis in 0.0f64..0.1,
    ) {
        let p = params(y0, e_mis);
        let obs = poisson_observation(eta, &p);
        let expected = DecoyObservation::expected(eta, &p).unwrap();
        prop_assert!((obs.q_mu / expected.q_mu - 1.0).abs() < 1e-10);
        if let Ok(b) = decoy_bounds(&obs, &p) {
            let y1_true = y0 + eta;
            let e1_true = (p.e0 * y0 + e_mis * eta) / y1_true;
            prop_assert!(b.y1_lower <= y1_true * (1.0 + 1e-9));
            prop_assert!(b.e1_upper >= e1_true * (1.0 - 1e-9) - 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn finite_never_exceeds_asymptotic(
        log_eta in -5.0f64..0.0,
        y0 in 0.0f64..1e-3,
        e_mis in 0.0f64..0.08,
        log_n in 8.0f64..16.0,
    ) {
        let p = params(y0, e_mis);
        let eta = 10f64.powf(log_eta);
        let asym = rate(eta, &p, BlockSize::Asymptotic);
        let fin = rate(eta, &p, BlockSize::Finite(10f64.powf(log_n)));
        prop_assert!(fin <= asym);
        prop_assert!(fin >= 0.0);
        prop_assert!(qsdc_payload_rate(eta, &p).unwrap() >= 0.0);
    }

    #[test]
    fn rate_monotone_in_transmissivity(
        log_eta in -5.0f64..0.0,
        shrink in 0.5f64..0.999,
        y0 in 0.0f64..1e-3,
        e_mis in 0.0f64..0.08,
    ) {
        let p = params(y0, e_mis);
        let eta = 10f64.powf(log_eta);
        for b in [BlockSize::Asymptotic, BlockSize::Finite(1e11), BlockSize::Finite(1e9)] {
            prop_assert!(rate(eta * shrink, &p, b) <= rate(eta, &p, b));
        }
    }
}

#[test]
fn default_rate_decreases_on_descending_grid() {
    let p = DecoyProtocolParams::default();
    for b in [
        BlockSize::Asymptotic,
        BlockSize::Finite(1e11),
        BlockSize::Finite(1e10),
        BlockSize::Finite(1e9),
    ] {
        let mut last = f64::INFINITY;
        for i in 0..400 {
            let eta = 0.2 * 10f64.powf(-(i as f64) * 0.01);
            let r = rate(eta, &p, b);
            assert!(r <= last, "{b} eta={eta}");
            last = r;
        }
        assert_eq!(last, 0.0);
    }
}

/// Relative gap between the N = 1e15 and asymptotic rates over 500 random
/// draws, counting only draws whose asymptotic rate exceeds `floor`.
fn worst_large_block_gap(floor: f64) -> (usize, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut checked = 0;
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let p = params(rng.gen_range(0.0..1e-3), rng.gen_range(0.0..0.08));
        let eta = 10f64.powf(rng.gen_range(-4.0..0.0));
        let asym = rate(eta, &p, BlockSize::Asymptotic);
        if asym > floor {
            let fin = rate(eta, &p, BlockSize::Finite(1e15));
            worst = worst.max(1.0 - fin / asym);
            checked += 1;
        }
    }
    (checked, worst)
}

#[test]
fn large_block_approaches_asymptotic() {
    let (checked, worst) = worst_large_block_gap(1e-5);
    assert!(checked > 100);
    assert!(worst <= 0.05, "worst relative gap {worst}");
}

#[test]
#[ignore = "fails within ~1e-6 of the zero crossing, where any finite-size shift is a large relative change"]
fn large_block_approaches_asymptotic_near_threshold() {
    let (_, worst) = worst_large_block_gap(1e-6);
    assert!(worst <= 0.05, "worst relative gap {worst}");
}
