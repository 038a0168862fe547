mod common;

use asg_core::kernels::SyntheticSpec;
use common::{kkt_violation, lasso_cd, ols};

#[test]
fn coordinate_descent_satisfies_kkt() {
    let data = SyntheticSpec::default().generate().unwrap().data;
    for lambda in [0.0, 0.01, 0.1, 0.5, 5.0] {
        let b = lasso_cd(&data, lambda);
        assert!(kkt_violation(&data, lambda, &b) < 1e-10, "lambda {lambda}");
    }
    // a large penalty zeroes every slope
    assert!(lasso_cd(&data, 50.0)[1..].iter().all(|v| *v == 0.0));
}

#[test]
fn unpenalized_descent_matches_least_squares() {
    let data = SyntheticSpec::default().generate().unwrap().data;
    let a = lasso_cd(&data, 0.0);
    let b = ols(&data);
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-8, "{x} vs {y}");
    }
}
