use std::f64::consts::PI;

use heistheta::finite_heisenberg::PolarizationType;
use heistheta::numerics::checks::{equivariance, predicted_translate, torsion_scan};
use heistheta::numerics::theta::ThetaContext;
use heistheta::numerics::{build_isogeny, eval_sections, theta_char, PeriodMatrixConfig, SectionEvaluator};
use heistheta::schrodinger::represent_iota;
use heistheta::Error;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn omega2() -> DMatrix<Complex64> {
    DMatrix::from_row_slice(2, 2, &[c(0.2, 1.3), c(-0.3, 0.4), c(-0.3, 0.4), c(0.5, 1.1)])
}

#[test]
fn theta_at_i_matches_direct_sum() {
    let direct: f64 = (-30i64..=30).map(|n| (-PI * (n * n) as f64).exp()).sum();
    let v = theta_char(&[0.0], &[0.0], &[c(0.0, 0.0)], &DMatrix::from_element(1, 1, c(0.0, 1.0)), 1e-12).unwrap();
    assert!((v.value().re - direct).abs() < 1e-14);
    assert!((direct - 1.0864348112133082).abs() < 1e-15);
}

#[test]
fn invalid_period_matrices_are_rejected() {
    let mut bad = omega2();
    bad[(0, 1)] = c(0.0, 0.4);
    let d = PolarizationType::parse("1,4").unwrap();
    assert!(matches!(PeriodMatrixConfig::new(d.clone(), bad), Err(Error::InvalidPeriodMatrix(_))));
    let not_pd = DMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(0.0, 2.0), c(0.0, 2.0), c(0.0, 1.0)]);
    assert!(matches!(PeriodMatrixConfig::new(d, not_pd), Err(Error::InvalidPeriodMatrix(_))));
}

#[test]
fn config_json_round_trip() {
    let cfg = PeriodMatrixConfig::random(PolarizationType::parse("1,2,4").unwrap(), 11);
    let text = cfg.to_json().to_string();
    let back = PeriodMatrixConfig::from_json(&text).unwrap();
    assert_eq!(back.omega, cfg.omega);
    assert_eq!((back.seed, back.samples, back.epsilon), (11, cfg.samples, cfg.epsilon));
    let random = PeriodMatrixConfig::from_json(r#"{"g":3,"delta":[1,2,4],"omega":"random","seed":11}"#).unwrap();
    assert_eq!(random.omega, cfg.omega);
    assert!(PeriodMatrixConfig::from_json(r#"{"g":2,"delta":[1,2,4],"omega":"random"}"#).is_err());
}

#[test]
fn sections_vanish_nowhere_generic_and_are_reproducible() {
    let cfg = PeriodMatrixConfig::random(PolarizationType::parse("1,2,4").unwrap(), 3);
    let m = build_isogeny(&cfg).unwrap();
    let z = vec![c(0.1, 0.2), c(-0.3, 0.05), c(0.7, -0.4)];
    let a = eval_sections(&m, &z).unwrap();
    let b = eval_sections(&m, &z).unwrap();
    assert_eq!(a.coords(), b.coords());
    let e = SectionEvaluator::new(&m).unwrap();
    let r1 = serde_json::to_string(&equivariance(&m, &e, 4)).unwrap();
    let r2 = serde_json::to_string(&equivariance(&m, &e, 4)).unwrap();
    assert_eq!(r1, r2);
}

#[test]
fn iota_acts_as_negation() {
    let cfg = PeriodMatrixConfig::random(PolarizationType::parse("1,2,4").unwrap(), 5);
    let m = build_isogeny(&cfg).unwrap();
    let e = SectionEvaluator::new(&m).unwrap();
    let iota = m.basis.action(&represent_iota(m.delta())).unwrap();
    let z = vec![c(0.31, 0.2), c(-0.13, 0.55), c(0.27, -0.4)];
    let minus: Vec<Complex64> = z.iter().map(|x| -x).collect();
    let lhs = e.point(&minus).unwrap();
    let rhs = heistheta::numerics::ProjectivePoint::new(predicted_translate(&iota, &e.values(&z).unwrap())).unwrap();
    assert!(lhs.distance(&rhs) < 1e-10);
}

#[test]
fn torsion_scan_needs_one_two_four() {
    let cfg = PeriodMatrixConfig::random(PolarizationType::parse("1,4").unwrap(), 5);
    let m = build_isogeny(&cfg).unwrap();
    let e = SectionEvaluator::new(&m).unwrap();
    assert!(!torsion_scan(&m, &e).report.passed());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quasi_periodicity(
        a in prop::array::uniform2(0.0f64..1.0), b in prop::array::uniform2(0.0f64..1.0),
        zr in prop::array::uniform2(-0.5f64..0.5), zi in prop::array::uniform2(-0.5f64..0.5),
        m in prop::array::uniform2(-1i64..=1), k in prop::array::uniform2(-2i64..=2),
    ) {
        let om = omega2();
        let z: Vec<Complex64> = (0..2).map(|i| c(zr[i], zi[i])).collect();
        let shift: Vec<Complex64> = (0..2)
            .map(|i| c(k[i] as f64, 0.0) + (0..2).map(|j| om[(i, j)] * m[j] as f64).sum::<Complex64>())
            .collect();
        let zs: Vec<Complex64> = (0..2).map(|i| z[i] + shift[i]).collect();
        let ctx = ThetaContext::new(&om).unwrap();
        let lhs = ctx.eval(&a, &b, &zs, 1e-14).unwrap().value();
        let base = ctx.eval(&a, &b, &z, 1e-14).unwrap().value();
        let mf: Vec<f64> = m.iter().map(|&v| v as f64).collect();
        let mut quad = c(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                quad += om[(i, j)] * mf[i] * mf[j];
            }
        }
        let lin: Complex64 = (0..2).map(|i| (z[i] + b[i]) * mf[i]).sum();
        let ak: f64 = (0..2).map(|i| a[i] * k[i] as f64).sum();
        let factor = (c(0.0, 2.0 * PI * ak) - c(0.0, PI) * quad - c(0.0, 2.0 * PI) * lin).exp();
        let expected = factor * base;
        prop_assert!((lhs - expected).norm() < 1e-11 * lhs.norm().max(expected.norm()).max(1e-3));
    }

    #[test]
    fn truncation_certificate(
        a in prop::array::uniform2(0.0f64..1.0), zr in prop::array::uniform2(-1.0f64..1.0),
        zi in prop::array::uniform2(-1.0f64..1.0),
    ) {
        let ctx = ThetaContext::new(&omega2()).unwrap();
        let z: Vec<Complex64> = (0..2).map(|i| c(zr[i], zi[i])).collect();
        let coarse = ctx.eval(&a, &[0.0, 0.0], &z, 1e-8).unwrap();
        let fine = ctx.eval(&a, &[0.0, 0.0], &z, 1e-20).unwrap();
        prop_assert!(fine.radius > 1.3 * coarse.radius);
        prop_assert!(coarse.tail_bound <= 1e-8 * coarse.scale * (1.0 + 1e-9));
        let diff = (coarse.normalized - fine.normalized).norm();
        prop_assert!(diff <= coarse.tail_bound + fine.tail_bound + 1e-15 * coarse.scale);
    }
}
