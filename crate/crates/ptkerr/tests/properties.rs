use ptkerr::linear::{commutator, linear_mean_modes, noise_occupation, noise_occupation_quadrature, Channel, CommutatorKind, CommutatorVariant, Pair};
use ptkerr::meanfield::{integrate_meanfield, MeanFieldOptions};
use ptkerr::nonlinear::{mean_b, perturbative_correction, ClosedFormOptions, Variant};
use ptkerr::params::derive_from_rates;
use ptkerr::{derive_constants, Complex64, CouplerParams, Regime};
use proptest::prelude::*;

fn rates() -> impl Strategy<Value = (f64, f64)> {
    (0.1f64..2.0, prop_oneof![0.02f64..0.95, 1.05f64..3.0]).prop_map(|(k, r)| (k, k * r))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn zeta_sum_vanishes((kappa, j) in rates()) {
        let dc = derive_from_rates(kappa, j);
        prop_assert!((dc.zeta1 + dc.zeta2).norm() <= 1e-12 * dc.zeta1.norm().max(1.0));
    }

    #[test]
    fn equal_time_commutators((kappa, j) in rates(), s in 0.0f64..4.0) {
        let dc = derive_from_rates(kappa, j);
        let t = s / kappa;
        let full = |pair| commutator(&dc, CommutatorKind { pair, variant: CommutatorVariant::Full }, t, t).unwrap();
        prop_assert!((full(Pair::BB) - 1.0).norm() < 1e-10);
        prop_assert!((full(Pair::AA) - 1.0).norm() < 1e-10);
        prop_assert!(full(Pair::AB).norm() < 1e-10);
    }

    #[test]
    fn occupation_closed_form_matches_quadrature((kappa, j) in rates(), s in 0.01f64..4.0) {
        let dc = derive_from_rates(kappa, j);
        let t = s / kappa;
        for ch in [Channel::A, Channel::B] {
            let exact = noise_occupation(&dc, ch, t).unwrap();
            let quad = noise_occupation_quadrature(&dc, ch, t, 1e-12).unwrap();
            prop_assert!((exact - quad).abs() <= 1e-9 * exact.max(1e-6), "{exact} vs {quad}");
        }
    }

    #[test]
    fn linear_means_match_meanfield((kappa, j) in rates(), re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let alpha0 = Complex64::new(re, im);
        let p = CouplerParams::new(kappa, j, 0.0, alpha0).unwrap();
        let dc = derive_constants(&p);
        let times: Vec<f64> = (0..5).map(|k| 0.5 * k as f64 / kappa).collect();
        let run = integrate_meanfield(&p, alpha0, &times, &MeanFieldOptions::default()).unwrap();
        for (t, s) in times.iter().zip(&run.states) {
            let m = linear_mean_modes(&dc, alpha0, *t).unwrap();
            let scale = m.mean_a.norm().max(m.mean_b.norm()).max(1.0);
            prop_assert!((m.mean_a - s.alpha).norm() <= 1e-8 * scale);
            prop_assert!((m.mean_b - s.beta).norm() <= 1e-8 * scale);
        }
    }
}

#[test]
fn regimes_split_at_the_exceptional_point() {
    assert_eq!(derive_from_rates(1.0, 0.5).regime, Regime::Broken);
    assert_eq!(derive_from_rates(1.0, 1.5).regime, Regime::PtSymmetric);
    assert_eq!(derive_from_rates(1.0, 1.0).regime, Regime::Exceptional);
}

#[test]
fn closed_form_reduces_to_growing_part_without_kerr() {
    let p = CouplerParams::new(1.0, 0.4, 0.0, Complex64::new(3.0, 0.0)).unwrap();
    let dc = derive_constants(&p);
    for v in [Variant::Noisy, Variant::Noiseless] {
        for t in [0.0, 1.0, 5.0, 10.0] {
            let b = mean_b(&dc, 0.0, p.alpha0, t, v, &ClosedFormOptions::default()).unwrap();
            let lin = linear_mean_modes(&dc, p.alpha0, t).unwrap().mean_b;
            // only the decaying e^{-lambda t} component is dropped
            let decay = (-dc.lambda.re * t).exp() * lin.norm().max(1.0);
            assert!((b - lin).norm() <= 2.0 * decay, "t={t}: {b} vs {lin}");
        }
    }
}

#[test]
fn perturbative_correction_is_linear_in_chi() {
    let dc = derive_from_rates(0.3, 1.0);
    let a0 = Complex64::new(1.0, 0.0);
    let (a1, b1) = perturbative_correction(&dc, 1e-3, a0, 2.0, &Default::default()).unwrap();
    let (a2, b2) = perturbative_correction(&dc, 2e-3, a0, 2.0, &Default::default()).unwrap();
    assert!((a2 - 2.0 * a1).norm() < 1e-12 * a2.norm().max(1e-12));
    assert!((b2 - 2.0 * b1).norm() < 1e-12 * b2.norm().max(1e-12));
}
