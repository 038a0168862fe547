use asg_core::diagnostics::{acf, ess, ess_report, iact_geyer, logk_stationarity, TAU_FLOOR};
use asg_core::rng::chain_rng;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

fn ar1(phi: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = chain_rng(seed, 0);
    let mut x = 0.0;
    let scale = (1.0 - phi * phi).sqrt();
    (0..n)
        .map(|_| {
            let e: f64 = rng.sample(StandardNormal);
            x = phi * x + scale * e;
            x
        })
        .collect()
}

#[test]
fn ar1_calibration() {
    let x = ar1(0.5, 100_000, 1);
    let rho = acf(&x, 20).unwrap();
    for (k, r) in rho.iter().enumerate().take(11) {
        assert!((r - 0.5f64.powi(k as i32)).abs() < 0.02, "lag {k}: {r}");
    }
    let tau = iact_geyer(&acf(&x, 3162).unwrap()).unwrap().tau;
    assert!((2.4..=3.6).contains(&tau), "{tau}");
    let e = ess(&ar1(0.5, 3000, 2)).unwrap();
    assert!((e / 1000.0 - 1.0).abs() < 0.2, "{e}");
}

#[test]
fn iid_and_alternating() {
    let x = ar1(0.0, 100_000, 3);
    let rho = acf(&x, 20).unwrap();
    assert!(rho[1..].iter().all(|r| r.abs() <= 0.02));
    let tau = iact_geyer(&acf(&x, 3162).unwrap()).unwrap().tau;
    assert!((tau - 1.0).abs() < 0.05, "{tau}");
    let e = ess(&x[..1000]).unwrap();
    assert!((900.0..=1100.0).contains(&e), "{e}");

    let mut rng = chain_rng(4, 0);
    let alt: Vec<f64> = (0..1000)
        .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 } + 0.1 * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let rho = acf(&alt, 31).unwrap();
    assert!(rho[1] < -0.95);
    assert!(ess(&alt).unwrap() > 1000.0);
}

#[test]
fn stored_acf_reproduces_report() {
    let x = ar1(0.7, 2000, 5);
    let y = ar1(-0.3, 2000, 6);
    let rows: Vec<Vec<f64>> = x.iter().zip(&y).map(|(a, b)| vec![*a, *b]).collect();
    let rep = ess_report(&rows, 2.0).unwrap();
    for j in 0..2 {
        let tau = iact_geyer(&rep.acf[j]).unwrap().tau;
        assert_eq!((2000.0 / tau).to_bits(), rep.per_dim_ess[j].to_bits());
        assert_eq!(rep.per_dim_ess_per_second[j], rep.per_dim_ess[j] / 2.0);
    }
    assert_eq!(rep.min_ess, rep.per_dim_ess[0].min(rep.per_dim_ess[1]));
}

#[test]
fn stationarity_null_calibration_and_drift() {
    let mut rejections = 0;
    for rep in 0..100 {
        let mut rng = chain_rng(100, rep);
        let trace: Vec<f64> = (0..600).map(|_| rng.sample(StandardNormal)).collect();
        let s = logk_stationarity(&trace, 100).unwrap();
        rejections += usize::from(s.p_value < 0.05);
    }
    assert!((1..=12).contains(&rejections), "{rejections}/100");

    let mut rng = chain_rng(101, 0);
    let n = 1000;
    let drift: Vec<f64> = (0..n)
        .map(|i| rng.sample::<f64, _>(StandardNormal) + 2.0 * i as f64 / n as f64)
        .collect();
    assert!(logk_stationarity(&drift, 0).unwrap().p_value < 0.01);
    assert!(logk_stationarity(&drift[..10], 5).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn affine_invariance(seed in 0u64..1000, phi in -0.9..0.95f64, a in prop::sample::select(vec![-3.0, 0.5, 2.0, 1e3]), b in -100.0..100.0f64) {
        let x = ar1(phi, 500, seed);
        let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let (ex, ey) = (ess(&x).unwrap(), ess(&y).unwrap());
        prop_assert!((ex - ey).abs() <= 1e-9 * ex, "{ex} vs {ey}");
    }

    #[test]
    fn tau_is_floored_and_ess_finite(raw in prop::collection::vec(-1e3..1e3f64, 4..64)) {
        prop_assume!(raw.iter().any(|v| *v != raw[0]));
        let rho = acf(&raw, raw.len()).unwrap();
        let iact = iact_geyer(&rho).unwrap();
        prop_assert!(iact.tau >= TAU_FLOOR);
        prop_assert!(ess(&raw).unwrap().is_finite());
    }
}
