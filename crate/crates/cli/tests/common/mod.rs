#![allow(dead_code)]

use asg_core::kernels::RegressionData;

/// Coordinate-descent solution of
/// `min (1/2n) ||y - b0 - X b||^2 + lambda ||b||_1` on the (centered,
/// standardized) design held by `data`. Returns `[b0, b_1 .. b_p]`.
pub fn lasso_cd(data: &RegressionData, lambda: f64) -> Vec<f64> {
    let n = data.n_obs();
    let p = data.n_pred();
    let nf = n as f64;
    let cols: Vec<Vec<f64>> = (0..p).map(|j| data.column(j)).collect();
    let y = data.response();
    let b0 = y.iter().sum::<f64>() / nf;
    let mut b = vec![0.0; p];
    let mut r: Vec<f64> = y.iter().map(|v| v - b0).collect();
    let norms: Vec<f64> = cols.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>() / nf).collect();
    for _ in 0..100_000 {
        let mut delta: f64 = 0.0;
        for j in 0..p {
            let rho = cols[j].iter().zip(&r).map(|(x, ri)| x * ri).sum::<f64>() / nf + norms[j] * b[j];
            let new = soft(rho, lambda) / norms[j];
            let d = new - b[j];
            if d != 0.0 {
                for (ri, x) in r.iter_mut().zip(&cols[j]) {
                    *ri -= d * x;
                }
                b[j] = new;
            }
            delta = delta.max(d.abs());
        }
        if delta < 1e-13 {
            break;
        }
    }
    // b0 absorbs any residual mean (columns are centered, so this is ~0)
    let shift = r.iter().sum::<f64>() / nf;
    let mut out = vec![b0 + shift];
    out.extend(b);
    out
}

fn soft(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Largest violation of the lasso optimality conditions at `beta`.
pub fn kkt_violation(data: &RegressionData, lambda: f64, beta: &[f64]) -> f64 {
    let n = data.n_obs() as f64;
    let resid: Vec<f64> = (0..data.n_obs())
        .map(|i| {
            let row = data.row(i);
            data.response()[i] - beta[0] - row.iter().zip(&beta[1..]).map(|(x, b)| x * b).sum::<f64>()
        })
        .collect();
    let mut worst = (resid.iter().sum::<f64>() / n).abs();
    for j in 0..data.n_pred() {
        let g = data.column(j).iter().zip(&resid).map(|(x, r)| x * r).sum::<f64>() / n;
        let v = if beta[j + 1] == 0.0 {
            (g.abs() - lambda).max(0.0)
        } else {
            (g - lambda * beta[j + 1].signum()).abs()
        };
        worst = worst.max(v);
    }
    worst
}

/// Ordinary least squares `[b0, b]` by normal equations (Gauss-Jordan).
pub fn ols(data: &RegressionData) -> Vec<f64> {
    let p = data.n_pred() + 1;
    let mut a = vec![vec![0.0; p + 1]; p];
    for i in 0..data.n_obs() {
        let mut z = vec![1.0];
        z.extend_from_slice(data.row(i));
        let y = data.response()[i];
        for r in 0..p {
            for c in 0..p {
                a[r][c] += z[r] * z[c];
            }
            a[r][p] += z[r] * y;
        }
    }
    for col in 0..p {
        let piv = (col..p).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        let d = a[col][col];
        for v in a[col].iter_mut() {
            *v /= d;
        }
        for r in 0..p {
            if r != col {
                let f = a[r][col];
                let pivot_row = a[col].clone();
                for (v, pv) in a[r].iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
    }
    a.iter().map(|row| row[p]).collect()
}
