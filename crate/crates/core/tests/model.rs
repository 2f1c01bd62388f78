mod common;

use approx::assert_relative_eq;
use common::{fig1, fig1_micro, log_grid};
use incomedist::model::{
    effective_from_micro, micro_from_effective, stationary_pdf, stationary_pdf_quadrature,
    yakovenko_pdf, QuadratureDensity, StationaryDensity,
};
use incomedist::{EffectiveParams, ErrorClass};
use proptest::prelude::*;

#[test]
fn closed_form_matches_quadrature_with_distinct_temperatures() {
    let e = EffectiveParams {
        t1: 5e4,
        m_init: 2e3,
        ..fig1()
    };
    let closed = StationaryDensity::new(e).unwrap();
    let quad = QuadratureDensity::new(micro_from_effective(&e, 0.3).unwrap()).unwrap();
    for m in log_grid(2e3 + 1.0, 1e3 * e.m1, 150) {
        assert_relative_eq!(
            quad.pdf(m).unwrap(),
            closed.pdf(m).unwrap(),
            max_relative = 1e-8
        );
    }
}

#[test]
fn density_continuous_at_threshold() {
    let d = StationaryDensity::new(fig1()).unwrap();
    let m1 = fig1().m1;
    let below = d.pdf(m1 * (1.0 - 1e-12)).unwrap();
    assert_relative_eq!(below, d.pdf(m1).unwrap(), max_relative = 1e-9);
}

#[test]
fn without_threshold_reduces_to_single_branch() {
    let e = EffectiveParams {
        m1: f64::INFINITY,
        alpha1: 1.0,
        ..fig1()
    };
    for m in [1e3, 1e5, 1e7] {
        assert_relative_eq!(
            stationary_pdf(m, &e).unwrap(),
            yakovenko_pdf(m, &e).unwrap(),
            max_relative = 1e-12
        );
    }
}

#[test]
fn below_domain_is_a_precondition_error() {
    let e = EffectiveParams {
        m_init: 10.0,
        ..fig1()
    };
    assert_eq!(
        stationary_pdf(5.0, &e).unwrap_err().class(),
        ErrorClass::Precondition
    );
    assert!(stationary_pdf_quadrature(-1.0, &fig1_micro(1.0)).is_err());
}

#[test]
fn invalid_parameters_rejected() {
    for e in [
        EffectiveParams { t: 0.0, ..fig1() },
        EffectiveParams {
            alpha: 1.0,
            ..fig1()
        },
        EffectiveParams {
            m0: f64::NAN,
            ..fig1()
        },
        EffectiveParams { m1: -1.0, ..fig1() },
    ] {
        assert!(StationaryDensity::new(e).is_err(), "{e:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn micro_effective_round_trip(
        t in 1e3f64..1e5,
        m0 in 1e4f64..1e6,
        alpha in 1.2f64..4.0,
        alpha1 in 0.3f64..3.0,
        b in 0.01f64..10.0,
    ) {
        let e = EffectiveParams { t, t1: t, m0, m1: 3.0 * m0, alpha, alpha1, m_init: 0.0 };
        let back = effective_from_micro(&micro_from_effective(&e, b).unwrap()).unwrap();
        prop_assert!(((back.t - t) / t).abs() < 1e-12);
        prop_assert!(((back.m0 - m0) / m0).abs() < 1e-12);
        prop_assert!(((back.alpha - alpha) / alpha).abs() < 1e-12);
        prop_assert!(((back.alpha1 - alpha1) / alpha1).abs() < 1e-12);
    }

    #[test]
    fn gauge_does_not_change_density(b in 0.05f64..20.0, x in 0.0f64..1.0) {
        let m = 1e3 * 1e6f64.powf(x);
        let reference = stationary_pdf_quadrature(m, &fig1_micro(1.0)).unwrap();
        let other = stationary_pdf_quadrature(m, &fig1_micro(b)).unwrap();
        prop_assert!(((other - reference) / reference).abs() < 1e-9);
    }

    #[test]
    fn density_positive_and_finite(x in 0.0f64..1.0) {
        let m = 1e15f64.powf(x) - 1.0;
        let p = stationary_pdf(m, &fig1()).unwrap();
        prop_assert!(p.is_finite() && p > 0.0);
    }
}
