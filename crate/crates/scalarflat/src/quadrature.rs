//! Gauss-Legendre quadrature on rectangles, with a stability check under
//! order doubling and deterministic pairwise accumulation.

use crate::error::{Error, Result};
use crate::linalg::pairwise_sum;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// computed by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n < 2 {
        return Err(Error::QuadratureOrder(n));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n(x) and P_n'(x) by the three-term recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Ok((nodes, weights))
}

/// Integrate `f` over the rectangle with an `n x n` tensor rule.
pub fn integrate_rect(f: &dyn Fn([f64; 2]) -> f64, domain: [[f64; 2]; 2], n: usize) -> Result<f64> {
    let (nodes, weights) = gauss_legendre(n)?;
    let mid = |d: [f64; 2]| 0.5 * (d[0] + d[1]);
    let half = |d: [f64; 2]| 0.5 * (d[1] - d[0]);
    let (c0, h0) = (mid(domain[0]), half(domain[0]));
    let (c1, h1) = (mid(domain[1]), half(domain[1]));
    let mut terms = Vec::with_capacity(n * n);
    for (xi, wi) in nodes.iter().zip(&weights) {
        for (yj, wj) in nodes.iter().zip(&weights) {
            let s = [c0 + h0 * xi, c1 + h1 * yj];
            terms.push(wi * wj * f(s));
        }
    }
    Ok(h0 * h1 * pairwise_sum(&terms))
}

/// Integrate and confirm that doubling the order changes the result by
/// less than `rel_tol` (relative to the integral's scale). Returns the
/// doubled-order value.
pub fn integrate_rect_checked(
    f: &dyn Fn([f64; 2]) -> f64,
    domain: [[f64; 2]; 2],
    n: usize,
    rel_tol: f64,
) -> Result<f64> {
    let coarse = integrate_rect(f, domain, n)?;
    let fine = integrate_rect(f, domain, 2 * n)?;
    let scale = fine.abs().max(1.0);
    let change = (fine - coarse).abs() / scale;
    if change > rel_tol {
        return Err(Error::QuadratureUnstable(change));
    }
    Ok(fine)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn low_order_rules_match_known_values() {
        let (nodes, weights) = gauss_legendre(2).unwrap();
        let r = 1.0 / 3.0_f64.sqrt();
        assert!((nodes[0] + r).abs() < 1e-15 && (nodes[1] - r).abs() < 1e-15);
        assert!((weights[0] - 1.0).abs() < 1e-15 && (weights[1] - 1.0).abs() < 1e-15);
        let (nodes, weights) = gauss_legendre(3).unwrap();
        assert!(nodes[1].abs() < 1e-15);
        assert!((weights[1] - 8.0 / 9.0).abs() < 1e-15);
        assert!((nodes[2] - (0.6_f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn polynomials_are_integrated_exactly() {
        // x^5 y^3 over [0,1] x [0,2] = (1/6)(16/4) = 2/3.
        let value = integrate_rect(
            &|s| s[0].powi(5) * s[1].powi(3),
            [[0.0, 1.0], [0.0, 2.0]],
            4,
        )
        .unwrap();
        assert!((value - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn smooth_integrand_converges_under_doubling() {
        let value = integrate_rect_checked(
            &|s| (s[0] * s[1]).sin().exp(),
            [[0.0, PI], [0.0, 1.0]],
            32,
            1e-12,
        )
        .unwrap();
        let reference =
            integrate_rect(&|s| (s[0] * s[1]).sin().exp(), [[0.0, PI], [0.0, 1.0]], 96).unwrap();
        assert!((value - reference).abs() < 1e-11);
    }

    #[test]
    fn order_one_is_rejected() {
        assert!(gauss_legendre(1).is_err());
    }

    #[test]
    fn weights_sum_to_interval_length() {
        let (_, weights) = gauss_legendre(40).unwrap();
        let total: f64 = weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-13);
    }
}
