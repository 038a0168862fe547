use std::sync::Arc;

use asg_core::kernels::{make_kernel, Conditional1D, LogKernel, Params, SyntheticSpec, KERNEL_NAMES};
use proptest::prelude::*;

fn lasso(lambda: f64, alpha: f64) -> LogKernel {
    let data = SyntheticSpec {
        n_obs: 40,
        n_pred: 6,
        sparsity: 2,
        ..Default::default()
    }
    .generate()
    .unwrap()
    .data;
    let p: Params = [("lambda".to_string(), lambda), ("alpha".to_string(), alpha)].into();
    make_kernel("lasso_bridge", &p, Some(Arc::new(data))).unwrap()
}

fn all_kernels() -> Vec<LogKernel> {
    KERNEL_NAMES
        .iter()
        .map(|&n| {
            if n == "lasso_bridge" {
                lasso(0.1, 1.0)
            } else {
                make_kernel(n, &Params::new(), None).unwrap()
            }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn never_nan(raw in prop::collection::vec(-1e3..1e3f64, 10), scale in prop::sample::select(vec![1e-3, 1.0, 1e2, 1e6])) {
        for k in all_kernels() {
            let x: Vec<f64> = raw.iter().cycle().take(k.dim()).map(|v| v * scale).collect();
            prop_assert!(!k.log_eval(&x).is_nan(), "{} at {x:?}", k.name());
        }
    }

    #[test]
    fn rosenbrock_mirror(x1 in -10.0..10.0f64, x2 in -10.0..10.0f64) {
        let k = make_kernel("rosenbrock", &Params::new(), None).unwrap();
        prop_assert_eq!(k.log_eval(&[x1, x2]), k.log_eval(&[-x1, x2]));
    }

    #[test]
    fn radial_signed_permutations(
        x in prop::collection::vec(-5.0..5.0f64, 10),
        perm in Just((0..10).collect::<Vec<usize>>()).prop_shuffle(),
        signs in prop::collection::vec(any::<bool>(), 10),
    ) {
        let k = make_kernel("radial_exp", &Params::new(), None).unwrap();
        let y: Vec<f64> = perm.iter().zip(&signs).map(|(&i, &s)| if s { -x[i] } else { x[i] }).collect();
        let (a, b) = (k.log_eval(&x), k.log_eval(&y));
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn conditionals_reassemble_exactly(
        which in 0..KERNEL_NAMES.len(),
        raw in prop::collection::vec(-3.0..3.0f64, 10),
        z in -3.0..3.0f64,
        j_raw in 0usize..100,
    ) {
        let kernels = all_kernels();
        let k = &kernels[which];
        let m = k.dim();
        let j = j_raw % m;
        let fixed: Vec<f64> = raw.iter().cycle().take(m - 1).copied().collect();
        let g = Conditional1D::new(k, j, &fixed).unwrap();
        let mut point = fixed.clone();
        point.insert(j, z);
        prop_assert_eq!(g.eval(z).to_bits(), k.log_eval(&point).to_bits());
        // the specialized evaluator agrees up to rounding
        if let Some(fast) = k.conditional_evaluator(j, &point) {
            let (a, b) = (fast(z), k.log_eval(&point));
            prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "{a} vs {b}");
        };
    }

    #[test]
    fn lasso_without_penalty_is_gaussian_loss(beta in prop::collection::vec(-3.0..3.0f64, 7), alpha in 0.1..2.0f64) {
        let k0 = lasso(0.0, alpha);
        let big = lasso(1.0, alpha);
        let pen: f64 = beta[1..].iter().map(|b| b.abs().powf(alpha)).sum();
        let (a, b) = (k0.log_eval(&beta), big.log_eval(&beta) + pen);
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
    }
}
