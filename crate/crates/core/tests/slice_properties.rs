use asg_core::kernels::{make_kernel, Conditional1D, Params};
use asg_core::rng::chain_rng;
use asg_core::slice::slice_1d_fixed_u;
use asg_core::support::{effective_support_1d, SupportOptions};
use statrs::distribution::{ChiSquared, ContinuousCDF};

const DRAWS: usize = 100_000;

fn chi2_uniform(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    let e = n as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    ChiSquared::new((counts.len() - 1) as f64).unwrap().sf(stat)
}

#[test]
fn rosenbrock_level_set_is_sampled_uniformly() {
    // x2 | x1 = 0 is N(0, 1/4.2) up to a constant: log g = -2.1 z^2
    let k = make_kernel("rosenbrock", &Params::new(), None).unwrap();
    let g = Conditional1D::new(&k, 1, &[0.0]).unwrap();
    let log_u = -1.0;
    let half = (1.0f64 / 2.1).sqrt();
    let est = effective_support_1d(&g, &SupportOptions::default()).unwrap();
    assert!(est.lower < -half && est.upper > half);
    let mut rng = chain_rng(5, 0);
    let mut counts = [0usize; 20];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut proposals = 0;
    for _ in 0..DRAWS {
        let (z, st) = slice_1d_fixed_u(&g, log_u, est.lower, est.upper, 0.0, &mut rng, 10_000).unwrap();
        assert!(!st.hit_cap);
        proposals += st.proposals;
        lo = lo.min(z);
        hi = hi.max(z);
        let bin = (((z + half) / (2.0 * half)) * 20.0).floor() as usize;
        counts[bin.min(19)] += 1;
    }
    assert!((lo + half).abs() < 1e-3 && (hi - half).abs() < 1e-3, "[{lo}, {hi}] vs ±{half}");
    let p = chi2_uniform(&counts);
    assert!(p > 1e-3, "chi-square p = {p}, counts {counts:?}");
    let expected = est.width() / (2.0 * half);
    let mean = proposals as f64 / DRAWS as f64;
    assert!((mean / expected - 1.0).abs() < 0.05, "{mean} vs {expected}");
}

#[test]
fn two_interval_slice_hits_each_piece_by_width() {
    // two unit bumps of different widths separated by a gap of zero density
    let g = |z: f64| {
        if (0.0..1.0).contains(&z) || (3.0..6.0).contains(&z) {
            0.0
        } else {
            -50.0
        }
    };
    let mut rng = chain_rng(9, 2);
    let mut right = 0usize;
    for _ in 0..DRAWS {
        let (z, _) = slice_1d_fixed_u(&g, -1.0, -1.0, 7.0, 0.5, &mut rng, 10_000).unwrap();
        assert!((0.0..1.0).contains(&z) || (3.0..6.0).contains(&z));
        right += usize::from(z >= 3.0);
    }
    let frac = right as f64 / DRAWS as f64;
    assert!((frac - 0.75).abs() < 0.02, "{frac}");
}

#[test]
fn beta_mixture_slice_spans_modes() {
    let k = make_kernel("beta_mixture", &Params::new(), None).unwrap();
    let g = |z: f64| k.log_eval(&[z]);
    let est = effective_support_1d(&g, &SupportOptions::default()).unwrap();
    // a low height: the slice covers all three components
    let log_u = g(0.0) - 3.0;
    let mut rng = chain_rng(1, 1);
    let mut seen = [0usize; 3];
    for _ in 0..20_000 {
        let (z, _) = slice_1d_fixed_u(&g, log_u, est.lower, est.upper, 0.0, &mut rng, 10_000).unwrap();
        seen[if z < -2.0 { 0 } else if z < 2.5 { 1 } else { 2 }] += 1;
    }
    assert!(seen.iter().all(|&c| c > 1000), "{seen:?}");
}
