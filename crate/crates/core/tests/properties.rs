//! Randomized invariants of the closed-form building blocks.

use nfisac::bcd::{analog_update, digital_update};
use nfisac::crb::{crb_closed_form, hermitian_split, CrbParameter};
use nfisac::geometry::{build_channels, build_sensing_model, PolarPoint, Scenario, SystemGeometry};
use nfisac::harness::format_sig9;
use nfisac::linalg::{random_cmatrix, random_phases, random_psd};
use nfisac::rates::{best_common_split, evaluate};
use nfisac::{CMatrix, C64};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instance(r_u: f64, a_u: f64, r_t: f64, a_t: f64) -> (SystemGeometry, Scenario) {
    let g = SystemGeometry::half_wavelength(16, 8, 4, 30e9).unwrap();
    let users = vec![PolarPoint::new(r_u, a_u), PolarPoint::new(r_t + 1.0, a_t / 2.0)];
    let s = Scenario::new(&g, users, PolarPoint::new(r_t, a_t), 1e-11, 0.1, f64::INFINITY, f64::INFINITY, 64).unwrap();
    (g, s)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn crb_scales_inversely_with_power(seed in any::<u64>(), re in 0.1f64..10.0, im in -5.0f64..5.0,
                                       r in 10.0f64..20.0, a in 0.0f64..1.5) {
        let (g, s) = instance(15.0, 0.3, r, a);
        let sm = build_sensing_model(&g, &s).unwrap();
        let p = random_cmatrix(&mut ChaCha8Rng::seed_from_u64(seed), 16, 3);
        let c = C64::new(re, im);
        for which in [CrbParameter::Angle, CrbParameter::Range] {
            let base = crb_closed_form(&p, &sm, s.noise_eve, 64, which).unwrap();
            let scaled = crb_closed_form(&(&p * c), &sm, s.noise_eve, 64, which).unwrap();
            prop_assert!((scaled * c.norm_sqr() - base).abs() <= 1e-9 * base);
        }
    }

    #[test]
    fn rates_ignore_column_phases(seed in any::<u64>(), r in 10.0f64..20.0, a in 0.0f64..1.5) {
        let (g, s) = instance(12.0, 1.0, r, a);
        let ch = build_channels(&g, &s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_cmatrix(&mut rng, 16, 3) * C64::new(0.05, 0.0);
        let phases = random_phases(&mut rng, 1, 3);
        let rotated = CMatrix::from_fn(16, 3, |i, j| p[(i, j)] * phases[(0, j)]);
        let a0 = evaluate(&p, &ch, &s, &[0.0, 0.0]).unwrap();
        let a1 = evaluate(&rotated, &ch, &s, &[0.0, 0.0]).unwrap();
        for (x, y) in a0.secrecy_total.iter().zip(&a1.secrecy_total) {
            prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()));
            prop_assert!(*x >= 0.0);
        }
    }

    #[test]
    fn common_split_spends_the_budget_on_the_weakest(budget in 0.0f64..5.0,
                                                     base in prop::collection::vec(0.0f64..4.0, 1..6)) {
        let (split, value) = best_common_split(budget, &base);
        let total: f64 = split.iter().sum();
        prop_assert!(split.iter().all(|&c| c >= 0.0));
        prop_assert!((total - budget).abs() <= 1e-9 * (1.0 + budget));
        let lowest = base.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assert!(value >= lowest - 1e-12);
        // No split beats the water level: the mean bound is attained or exceeded by the min.
        let mean = (base.iter().sum::<f64>() + budget) / base.len() as f64;
        prop_assert!(value <= mean + 1e-9);
    }

    #[test]
    fn analog_sweep_is_unit_modulus_and_never_ascends(seed in any::<u64>(), n in 2usize..10, l in 1usize..4, k in 1usize..4) {
        let l = l.min(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f0 = random_phases(&mut rng, n, l);
        let w = random_cmatrix(&mut rng, l, k);
        let p = random_cmatrix(&mut rng, n, k);
        let f1 = analog_update(&f0, &p, &w);
        prop_assert!(f1.iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
        prop_assert!((&p - &f1 * &w).norm() <= (&p - &f0 * &w).norm() * (1.0 + 1e-12));
    }

    #[test]
    fn digital_update_solves_the_normal_equations(seed in any::<u64>(), n in 4usize..12, l in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_phases(&mut rng, n, l);
        let p = random_cmatrix(&mut rng, n, 3);
        let w = digital_update(&f, &p);
        let grad = f.adjoint() * (&p - &f * &w);
        prop_assert!(grad.norm() <= 1e-9 * f.norm() * p.norm());
    }

    #[test]
    fn hermitian_split_parts_are_psd(seed in any::<u64>(), n in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_cmatrix(&mut rng, n, n);
        let s = hermitian_split(&a);
        let x = random_psd(&mut rng, n, n);
        prop_assert!((&s.m_plus * &x).trace().re >= -1e-10);
        prop_assert!((&s.m_minus * &x).trace().re >= -1e-10);
        prop_assert!(s.m_plus.clone().symmetric_eigenvalues().min() >= -1e-10);
    }

    #[test]
    fn sig9_parses_back_within_format_precision(x in prop::num::f64::NORMAL) {
        let back: f64 = format_sig9(x).parse().unwrap();
        prop_assert!((back - x).abs() <= 5e-9 * x.abs());
    }
}
