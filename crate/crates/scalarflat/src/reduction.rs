//! Reduction of a geometry to its momentum level sets: the quotient
//! two-metric, its Gauss curvature and area, and integrals of pointwise
//! quantities over the reduced surface.

use crate::chart::Point;
use crate::error::{Error, Result};
use crate::families::{GeometryBundle, ReductionChart};
use crate::killing::cs_density;
use crate::linalg::pairwise_sum;
use crate::quadrature::gauss_legendre;

/// Quotient metric at parameter `s`: with `E_a` the coordinate tangents
/// of the section and `P` the projection orthogonal to the Killing
/// field, `h_ab = g(P E_a, P E_b)`.
pub fn reduced_metric(
    bundle: &GeometryBundle,
    chart: &ReductionChart,
    s: [f64; 2],
) -> Result<[[f64; 2]; 2]> {
    let p = Point::new(bundle.chart.id, chart.embed.value(s));
    bundle.require_regular(&p)?;
    let g = bundle.g(&p);
    let v = bundle.v(&p);
    let vsq = bundle.v_norm_sq(&p);
    let jac = chart.embed.jacobian(s);
    let pair = |a: &[f64; 4], b: &[f64; 4]| {
        let mut acc = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                acc += g[i][j] * a[i] * b[j];
            }
        }
        acc
    };
    let mut h = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            h[a][b] = pair(&jac[a], &jac[b]) - pair(&jac[a], &v) * pair(&jac[b], &v) / vsq;
        }
    }
    Ok(h)
}

/// Area density `sqrt(det h)` of the quotient metric at `s`.
pub fn area_density(bundle: &GeometryBundle, chart: &ReductionChart, s: [f64; 2]) -> Result<f64> {
    let h = reduced_metric(bundle, chart, s)?;
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    if det <= 0.0 {
        return Err(Error::MetricNotPositive);
    }
    Ok(det.sqrt())
}

fn d1(f: &dyn Fn(f64) -> Result<f64>, x: f64, h: f64) -> Result<f64> {
    Ok((8.0 * (f(x + h)? - f(x - h)?) - (f(x + 2.0 * h)? - f(x - 2.0 * h)?)) / (12.0 * h))
}

fn d2(f: &dyn Fn(f64) -> Result<f64>, x: f64, h: f64) -> Result<f64> {
    Ok(
        (16.0 * (f(x + h)? + f(x - h)?) - (f(x + 2.0 * h)? + f(x - 2.0 * h)?) - 30.0 * f(x)?)
            / (12.0 * h * h),
    )
}

/// Gauss curvature of the quotient metric at `s`, by the Brioschi
/// formula with fourth-order finite differences of half-width `step`.
pub fn gauss_curvature(
    bundle: &GeometryBundle,
    chart: &ReductionChart,
    s: [f64; 2],
    step: f64,
) -> Result<f64> {
    let comp = |a: usize, b: usize| {
        move |u: f64, v: f64| -> Result<f64> { Ok(reduced_metric(bundle, chart, [u, v])?[a][b]) }
    };
    let e = comp(0, 0);
    let f = comp(0, 1);
    let g = comp(1, 1);
    let [u, v] = s;
    let (ev, gv) = (e(u, v)?, g(u, v)?);
    let fv = f(u, v)?;
    let e_u = d1(&|x| e(x, v), u, step)?;
    let e_v = d1(&|y| e(u, y), v, step)?;
    let g_u = d1(&|x| g(x, v), u, step)?;
    let g_v = d1(&|y| g(u, y), v, step)?;
    let f_u = d1(&|x| f(x, v), u, step)?;
    let f_v = d1(&|y| f(u, y), v, step)?;
    let e_vv = d2(&|y| e(u, y), v, step)?;
    let g_uu = d2(&|x| g(x, v), u, step)?;
    let f_uv = d1(&|x| d1(&|y| f(x, y), v, step), u, step)?;

    let det3 = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let m1 = det3([
        [-0.5 * e_vv + f_uv - 0.5 * g_uu, 0.5 * e_u, f_u - 0.5 * e_v],
        [f_v - 0.5 * g_u, ev, fv],
        [0.5 * g_v, fv, gv],
    ]);
    let m2 = det3([
        [0.0, 0.5 * e_v, 0.5 * g_u],
        [0.5 * e_v, ev, fv],
        [0.5 * g_u, fv, gv],
    ]);
    let det = ev * gv - fv * fv;
    if det <= 0.0 {
        return Err(Error::MetricNotPositive);
    }
    Ok((m1 - m2) / (det * det))
}

/// Gauss-Legendre integral over the quotient surface at momentum `z`:
/// `\int f(p, s) sqrt(det h) ds`. The integrand is re-evaluated at twice
/// the order and the two values must agree to `rel_tol` relative error.
pub fn integrate_reduced(
    bundle: &GeometryBundle,
    z: f64,
    f: &dyn Fn(&Point, [f64; 2]) -> Result<f64>,
    order: usize,
    rel_tol: f64,
) -> Result<f64> {
    let chart = bundle.reduction_chart(z)?;
    let run = |n: usize| -> Result<f64> {
        let (nodes, weights) = gauss_legendre(n)?;
        let mid = |d: [f64; 2]| 0.5 * (d[0] + d[1]);
        let half = |d: [f64; 2]| 0.5 * (d[1] - d[0]);
        let (c0, h0) = (mid(chart.domain[0]), half(chart.domain[0]));
        let (c1, h1) = (mid(chart.domain[1]), half(chart.domain[1]));
        let mut terms = Vec::with_capacity(n * n);
        for (xi, wi) in nodes.iter().zip(&weights) {
            for (yj, wj) in nodes.iter().zip(&weights) {
                let s = [c0 + h0 * xi, c1 + h1 * yj];
                let p = Point::new(bundle.chart.id, chart.embed.value(s));
                let density = area_density(bundle, &chart, s)?;
                terms.push(wi * wj * f(&p, s)? * density);
            }
        }
        Ok(h0 * h1 * pairwise_sum(&terms))
    };
    let coarse = run(order)?;
    let fine = run(2 * order)?;
    let change = (fine - coarse).abs() / fine.abs().max(1.0);
    if change > rel_tol {
        return Err(Error::QuadratureUnstable(change));
    }
    Ok(fine)
}

/// Default quadrature order for reduced-surface integrals.
pub const DEFAULT_ORDER: usize = 32;
/// Default order-doubling agreement requirement.
pub const DEFAULT_QUAD_TOL: f64 = 1e-8;

/// Area of the reduced surface at momentum `z`.
pub fn vol2(bundle: &GeometryBundle, z: f64, order: usize) -> Result<f64> {
    integrate_reduced(bundle, z, &|_, _| Ok(1.0), order, DEFAULT_QUAD_TOL)
}

/// Euler characteristic from the Gauss-Bonnet integral
/// `(2 pi)^{-1} \int K dVol2`.
pub fn euler_characteristic(bundle: &GeometryBundle, z: f64, order: usize) -> Result<f64> {
    let chart = bundle.reduction_chart(z)?;
    let value = integrate_reduced(
        bundle,
        z,
        &|_, s| gauss_curvature(bundle, &chart, s, 1e-3),
        order,
        1e-6,
    )?;
    Ok(value / (2.0 * std::f64::consts::PI))
}

/// Degree of the quotient circle bundle from its Chern-Simons density,
/// `(2 pi)^{-1} \int |V|^{-3} phi dVol2`.
pub fn bundle_degree(bundle: &GeometryBundle, z: f64, order: usize) -> Result<f64> {
    let value = integrate_reduced(
        bundle,
        z,
        &|p, _| Ok(cs_density(bundle, p)? / bundle.v_norm_sq(p).powf(1.5)),
        order,
        DEFAULT_QUAD_TOL,
    )?;
    Ok(value / (2.0 * std::f64::consts::PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{flat_c2, lebrun_instanton, s2h2, FieldChoice, HyperbolicModel};
    use crate::killing::lap_z;
    use std::f64::consts::PI;

    #[test]
    fn instanton_reduced_surface_is_a_round_sphere() {
        let b = lebrun_instanton(3, 1.0).unwrap();
        let z = -0.8;
        let c = -2.0 * 3.0 * z + 1.0;
        let chart = b.reduction_chart(z).unwrap();
        // h = (C/4)(dtheta^2 + sin^2 theta dphi^2): a sphere of radius
        // sqrt(C)/2, so density (C/4) sin theta and K = 4/C.
        let s = [0.3, 1.1];
        assert!((area_density(&b, &chart, s).unwrap() - c / 4.0 * 0.3_f64.sin()).abs() < 1e-12);
        let k = gauss_curvature(&b, &chart, s, 1e-3).unwrap();
        assert!((k - 4.0 / c).abs() < 1e-8, "K = {k}");
        assert!((vol2(&b, z, 16).unwrap() - PI * c).abs() < 1e-10);
        assert!((euler_characteristic(&b, z, 16).unwrap() - 2.0).abs() < 1e-7);
    }

    #[test]
    fn instanton_bundle_degree_is_minus_k() {
        for k in [1u32, 2, 3] {
            let b = lebrun_instanton(k, 1.0).unwrap();
            let e = bundle_degree(&b, -1.1, 16).unwrap();
            assert!((e + f64::from(k)).abs() < 1e-9, "k={k}: e = {e}");
        }
    }

    #[test]
    fn flat_reduction_matches_declared_values() {
        let b = flat_c2(1.0, 1.0).unwrap();
        let z = -0.75;
        assert!((vol2(&b, z, 16).unwrap() - (-2.0 * PI * z)).abs() < 1e-10);
        assert!((euler_characteristic(&b, z, 16).unwrap() - 2.0).abs() < 1e-7);
        assert!((bundle_degree(&b, z, 16).unwrap() + 1.0).abs() < 1e-9);
    }

    #[test]
    fn product_reductions_match_declared_values() {
        let b = s2h2(HyperbolicModel::Parabolic, FieldChoice::HyperbolicAngle).unwrap();
        assert!((vol2(&b, 1.3, 16).unwrap() - 4.0 * PI).abs() < 1e-10);
        assert!((euler_characteristic(&b, 1.3, 16).unwrap() - 2.0).abs() < 1e-7);
        assert!(bundle_degree(&b, 1.3, 16).unwrap().abs() < 1e-9);

        let b = s2h2(HyperbolicModel::Hyperbolic, FieldChoice::Diagonal).unwrap();
        let z = 0.4;
        assert!((vol2(&b, z, 16).unwrap() - 4.0 * PI).abs() < 1e-10);
        assert!((euler_characteristic(&b, z, 16).unwrap() - 2.0).abs() < 1e-6);
        let declared = b.declared.int_v_sq.as_ref().unwrap()(z);
        let got = integrate_reduced(&b, z, &|p, _| Ok(b.v_norm_sq(p)), 16, 1e-8).unwrap();
        assert!(
            (got - declared).abs() < 1e-9,
            "got {got}, declared {declared}"
        );
    }

    #[test]
    fn momentum_laplacian_integrals_match_declared_values() {
        let b = lebrun_instanton(3, 0.5).unwrap();
        let z = -0.9;
        let int_lap = integrate_reduced(&b, z, &|p, _| lap_z(&b, p), 16, 1e-8).unwrap();
        assert!((int_lap - b.declared.int_lap_z.as_ref().unwrap()(z)).abs() < 1e-9);
        let int_lap_sq =
            integrate_reduced(&b, z, &|p, _| Ok(lap_z(&b, p)?.powi(2)), 16, 1e-8).unwrap();
        assert!((int_lap_sq - b.declared.int_lap_z_sq.as_ref().unwrap()(z)).abs() < 1e-9);
        let int_v = integrate_reduced(&b, z, &|p, _| Ok(b.v_norm_sq(p)), 16, 1e-8).unwrap();
        assert!((int_v - b.declared.int_v_sq.as_ref().unwrap()(z)).abs() < 1e-9);
    }
}
