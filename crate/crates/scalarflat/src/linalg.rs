//! Small dense linear-algebra helpers over fixed-size arrays.
//!
//! The geometry code works with plain `[[f64; 4]; 4]` arrays; this module
//! wraps nalgebra for the few dense operations that need care (inversion,
//! determinants, symmetric eigenvalues for the positive-definiteness guard).

use nalgebra::{Matrix4, SymmetricEigen};

use crate::error::{Error, Result};

pub type Mat4 = [[f64; 4]; 4];

/// Largest condition number tolerated before a metric is declared
/// numerically degenerate.
pub const CONDITION_LIMIT: f64 = 1e12;

fn to_na(m: &Mat4) -> Matrix4<f64> {
    Matrix4::from_fn(|i, j| m[i][j])
}

fn from_na(m: &Matrix4<f64>) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = m[(i, j)];
        }
    }
    out
}

pub fn det4(m: &Mat4) -> f64 {
    to_na(m).determinant()
}

/// Inverse of a symmetric positive-definite matrix, with an explicit
/// positivity and conditioning guard.
pub fn inv_spd(m: &Mat4) -> Result<(Mat4, f64)> {
    let na = to_na(m);
    let eig = SymmetricEigen::new(na);
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &l in eig.eigenvalues.iter() {
        min = min.min(l);
        max = max.max(l);
    }
    if min <= 0.0 {
        return Err(Error::MetricNotPositive);
    }
    let cond = max / min;
    if cond > CONDITION_LIMIT {
        return Err(Error::MetricIllConditioned(cond));
    }
    let inv = to_na(m).try_inverse().ok_or(Error::MetricNotPositive)?;
    Ok((from_na(&inv), det4(m)))
}

/// Matrix-vector product `m v`.
pub fn matvec(m: &Mat4, v: &[f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i] += m[i][j] * v[j];
        }
    }
    out
}

/// Inner product `u^T m v`.
pub fn bilinear(m: &Mat4, u: &[f64; 4], v: &[f64; 4]) -> f64 {
    let mut out = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            out += u[i] * m[i][j] * v[j];
        }
    }
    out
}

/// Pairwise (cascade) summation: deterministic and accurate independent of
/// how the inputs were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_diagonal_metric() {
        let g: Mat4 = [
            [2.0, 0.0, 0.0, 0.0],
            [0.0, 3.0, 0.0, 0.0],
            [0.0, 0.0, 4.0, 0.0],
            [0.0, 0.0, 0.0, 5.0],
        ];
        let (inv, det) = inv_spd(&g).unwrap();
        assert!((det - 120.0).abs() < 1e-12);
        assert!((inv[0][0] - 0.5).abs() < 1e-14);
        assert!((inv[3][3] - 0.2).abs() < 1e-14);
        assert!(inv[0][1].abs() < 1e-14);
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let g: Mat4 = [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, -1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ];
        assert!(matches!(inv_spd(&g), Err(Error::MetricNotPositive)));
    }

    #[test]
    fn pairwise_sum_matches_naive_on_small_input() {
        let xs: Vec<f64> = (0..101).map(|i| (i as f64) * 0.125).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-9);
    }
}
