//! The gravitational-instanton family on the line bundles O(-k).
//!
//! Chart coordinates `(w, psi, theta, phi)` with the left-invariant
//! coframe on the three-sphere
//!
//! ```text
//! eta1 = (d psi + cos(theta) d phi) / 2
//! eta2 = (cos(psi) d theta + sin(psi) sin(theta) d phi) / 2
//! eta3 = (-sin(psi) d theta + cos(psi) sin(theta) d phi) / 2
//! ```
//!
//! satisfying `d eta1 = -2 eta2 ^ eta3` (cyclic). The metric is
//!
//! ```text
//! g = C [ dw^2 / (4F) + F eta1^2 + eta2^2 + eta3^2 ],
//! C = e^{-w},  F = 1 + (k-2) m^2 e^w - (k-1) m^4 e^{2w},
//! ```
//!
//! which for `k = 2` is Eguchi-Hanson in its standard form and for
//! `k = 1, m > 0` the Burns metric. (Some presentations print the `dw^2`
//! coefficient as `C/(2F)`; compatibility of the fixed complex structure
//! `J dw = -2 F eta1` with the metric, and agreement with the original
//! radial form under `r = e^{-w/2}`, force `C/(4F)`.)
//!
//! The Killing field is `V = (2/k) d/d psi` with momentum
//! `z = -(e^{-w} - m^2) / (2k) <= 0`; `e^{-w} = -2kz + m^2`. The level
//! sets are lens spaces `L(k, 1)` and the reduced surface is a round
//! two-sphere of area `pi e^{-w}`, with bundle degree `-k` and Euler
//! number `2`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::chart::{Chart, Point};
use crate::error::{Error, Result};
use crate::fields::{
    EmbedField, EmbedMap, MatrixField, MatrixMap, ScalarField, ScalarMap, VectorField, VectorMap,
};
use crate::jet::Real;

use super::bundle::{
    orientation_from_omega, Declared, GeometryBundle, IsothermalChart, Reduction, ReductionChart,
};

/// Fraction of `m^2` kept clear of the singular momentum value `z = 0`.
pub const MOMENTUM_MARGIN: f64 = 0.05;

fn profile<T: Real>(k: f64, m: f64, w: T) -> (T, T) {
    let ew = w.exp();
    let c = (-w).exp();
    let m2 = T::constant(m * m);
    let f = T::constant(1.0) + T::constant(k - 2.0) * m2 * ew
        - T::constant((k - 1.0) * m.powi(4)) * ew * ew;
    (c, f)
}

struct InstantonMetric {
    k: f64,
    m: f64,
}

impl MatrixMap for InstantonMetric {
    fn eval<T: Real>(&self, x: [T; 4]) -> [[T; 4]; 4] {
        let (c, f) = profile(self.k, self.m, x[0]);
        let theta = x[2];
        let ct = theta.cos();
        let st = theta.sin();
        let zero = T::constant(0.0);
        let quarter = T::constant(0.25);
        let a = c * f; // eta1^2 coefficient
        let b = c; // eta2^2 + eta3^2 coefficient
        let g_ww = c / (T::constant(4.0) * f);
        let g_pp = a * quarter;
        let g_pf = a * ct * quarter;
        let g_tt = b * quarter;
        let g_ff = (a * ct * ct + b * st * st) * quarter;
        [
            [g_ww, zero, zero, zero],
            [zero, g_pp, zero, g_pf],
            [zero, zero, g_tt, zero],
            [zero, g_pf, zero, g_ff],
        ]
    }
}

/// Complex structure determined by `J dw = -2 F eta1`, `J eta2 = -eta3`.
struct InstantonJ {
    k: f64,
    m: f64,
}

impl MatrixMap for InstantonJ {
    fn eval<T: Real>(&self, x: [T; 4]) -> [[T; 4]; 4] {
        let (_, f) = profile(self.k, self.m, x[0]);
        let theta = x[2];
        let ct = theta.cos();
        let st = theta.sin();
        let zero = T::constant(0.0);
        // Rows are images of the coordinate covectors under eta -> eta o J:
        // J dw   = -F d psi - F cos(theta) d phi
        // J dpsi = dw / F - (cos/sin)(theta) d theta
        // J dth  = -sin(theta) d phi
        // J dphi = d theta / sin(theta)
        // and the vector matrix J^i_j is the transpose arrangement
        // J^a_i = (dx^a o J)_i.
        [
            [zero, -f, zero, -(f * ct)],
            [f.recip(), zero, -(ct / st), zero],
            [zero, zero, zero, -st],
            [zero, zero, st.recip(), zero],
        ]
    }
}

struct FiberField {
    k: f64,
}

impl VectorMap for FiberField {
    fn eval<T: Real>(&self, _: [T; 4]) -> [T; 4] {
        [
            T::constant(0.0),
            T::constant(2.0 / self.k),
            T::constant(0.0),
            T::constant(0.0),
        ]
    }
}

struct InstantonMomentum {
    k: f64,
    m: f64,
}

impl ScalarMap for InstantonMomentum {
    fn eval<T: Real>(&self, x: [T; 4]) -> T {
        let c = (-x[0]).exp();
        -(c - T::constant(self.m * self.m)) / T::constant(2.0 * self.k)
    }
}

/// Section of the reduced sphere at fixed `w`: parameters
/// `(theta, phi)`, with `psi` frozen.
struct SphereSection {
    w: f64,
}

impl EmbedMap for SphereSection {
    fn eval<T: Real>(&self, s: [T; 2]) -> [T; 4] {
        [T::constant(self.w), T::constant(0.4), s[0], s[1]]
    }
}

/// Stereographic `x = tan(theta/2) cos(phi)`.
struct StereoX;

impl ScalarMap for StereoX {
    fn eval<T: Real>(&self, x: [T; 4]) -> T {
        let half = T::constant(0.5);
        (x[2] * half).sin() / (x[2] * half).cos() * x[3].cos()
    }
}

struct StereoY;

impl ScalarMap for StereoY {
    fn eval<T: Real>(&self, x: [T; 4]) -> T {
        let half = T::constant(0.5);
        (x[2] * half).sin() / (x[2] * half).cos() * x[3].sin()
    }
}

/// `u = log(C^2 F / k^2) - 2 log(1 + tan^2(theta/2))`.
struct PotentialU {
    k: f64,
    m: f64,
}

impl ScalarMap for PotentialU {
    fn eval<T: Real>(&self, x: [T; 4]) -> T {
        let (c, f) = profile(self.k, self.m, x[0]);
        let half = T::constant(0.5);
        let t = (x[2] * half).sin() / (x[2] * half).cos();
        let rho_sq = t * t;
        (c * c * f / T::constant(self.k * self.k)).ln()
            - T::constant(2.0) * (T::constant(1.0) + rho_sq).ln()
    }
}

/// `w_potential = k^2 / (C F) = |grad z|^{-2}`.
struct PotentialW {
    k: f64,
    m: f64,
}

impl ScalarMap for PotentialW {
    fn eval<T: Real>(&self, x: [T; 4]) -> T {
        let (c, f) = profile(self.k, self.m, x[0]);
        T::constant(self.k * self.k) / (c * f)
    }
}

/// The instanton family. `k >= 1` is the bundle degree parameter (integer
/// valued; `k = 1` Burns, `k = 2` Eguchi-Hanson), `m > 0` the scale.
pub fn lebrun_instanton(k: u32, m: f64) -> Result<GeometryBundle> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if !(m > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "scale m must be positive (got {m})"
        )));
    }
    let kf = f64::from(k);
    let m2 = m * m;
    // Regular window: z <= -margin, i.e. e^{-w} >= m^2 + 2k * margin.
    let z_cut = -MOMENTUM_MARGIN * m2;
    let w_max = -(m2 - 2.0 * kf * z_cut).ln();
    let chart = Chart::new(
        "instanton",
        [
            [f64::NEG_INFINITY, w_max],
            [f64::NEG_INFINITY, f64::INFINITY],
            // The metric matrix extends smoothly through the polar values
            // theta = 0, pi (where it degenerates); curvature and Hodge
            // operations are only ever evaluated away from them.
            [-1.0, PI + 1.0],
            [f64::NEG_INFINITY, f64::INFINITY],
        ],
    );
    let metric = MatrixField::new(InstantonMetric { k: kf, m });
    let complex_structure = MatrixField::new(InstantonJ { k: kf, m });
    let killing = VectorField::new(FiberField { k: kf });
    let momentum = ScalarField::new(InstantonMomentum { k: kf, m });

    let basepoint = Point::new(chart.id, [w_max - 1.0, 0.3, 1.2, 0.7]);
    let orientation = orientation_from_omega(&metric, &complex_structure, &basepoint)?;

    let w_of_z = move |z: f64| -(-2.0 * kf * z + m2).ln();
    let c_of_z = move |z: f64| -2.0 * kf * z + m2;
    // C^2 F = C^2 + (k-2) m^2 C - (k-1) m^4.
    let c2f = move |z: f64| {
        let c = c_of_z(z);
        c * c + (kf - 2.0) * m2 * c - (kf - 1.0) * m2 * m2
    };
    let lap_z = move |z: f64| {
        let c = c_of_z(z);
        -2.0 * (2.0 * c + (kf - 2.0) * m2) / (kf * c)
    };

    let reduction = Reduction {
        z_range: (f64::NEG_INFINITY, z_cut),
        chart_at: Arc::new(move |z| ReductionChart {
            z,
            domain: [[0.0, PI], [0.0, 2.0 * PI]],
            embed: EmbedField::new(SphereSection { w: w_of_z(z) }),
        }),
        params_of: Arc::new(|p: &Point| [p.coords[2], p.coords[3].rem_euclid(2.0 * PI)]),
    };

    let declared = Declared {
        chi_g: Some(2.0),
        e_g: Some(-kf),
        lap_z: Some(Arc::new(lap_z)),
        vol2: Some(Arc::new(move |z| PI * c_of_z(z))),
        int_lap_z: Some(Arc::new(move |z| 2.0 * PI * (4.0 * z - m2))),
        int_lap_z_sq: Some(Arc::new(move |z| {
            let num = -4.0 * z + m2;
            4.0 * PI * num * num / c_of_z(z)
        })),
        int_v_sq: Some(Arc::new(move |z| PI * c2f(z) / (kf * kf))),
        int_ric_sq: Some(Arc::new(move |z| {
            16.0 * PI * m2 * m2 * (kf - 2.0) * (kf - 2.0) / c_of_z(z).powi(3)
        })),
    };

    let sample_w_lo = w_of_z(-3.0);
    Ok(GeometryBundle {
        name: format!("lebrun_instanton(k={k}, m={m})"),
        chart,
        metric,
        complex_structure,
        killing,
        momentum,
        orientation,
        scalar_flat_expected: true,
        compact_level_sets: true,
        reduction: Some(reduction),
        isothermal: Some(IsothermalChart {
            x: ScalarField::new(StereoX),
            y: ScalarField::new(StereoY),
            u: ScalarField::new(PotentialU { k: kf, m }),
            w: ScalarField::new(PotentialW { k: kf, m }),
        }),
        declared,
        sample_box: [
            [sample_w_lo, w_max - 0.05],
            [0.1, 3.5],
            [0.4, PI - 0.4],
            [0.1, 6.1],
        ],
        sample_filter: None,
        z_window: (-3.0, (-0.2_f64).min(2.0 * z_cut)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::{curvature_at, kahler_curvature_checks, DiffMode};
    use crate::forms::{exterior_derivative, FormField};

    #[test]
    fn scalar_flat_for_all_degrees() {
        for (k, m) in [(1, 1.0), (2, 0.6), (3, 1.3), (5, 0.9)] {
            let b = lebrun_instanton(k, m).unwrap();
            let p = Point::new(b.chart.id, [b.sample_box[0][0] + 0.4, 0.7, 1.1, 2.3]);
            let data =
                curvature_at(&b.metric, &p, &b.chart, b.orientation, DiffMode::Analytic).unwrap();
            assert!(data.scalar.abs() < 1e-9, "k={k}: scalar = {}", data.scalar);
            let res = kahler_curvature_checks(&data, &b.g(&p), &b.j_matrix(&p));
            assert!(res.block_residual < 1e-9, "k={k}: {}", res.block_residual);
            assert!(res.norm_residual < 1e-9);
            assert!(res.omega_antiselfdual_part < 1e-12);
        }
    }

    #[test]
    fn eguchi_hanson_is_ricci_flat() {
        let b = lebrun_instanton(2, 1.0).unwrap();
        for &w in &[-2.3, -1.0, -0.1] {
            let p = Point::new(b.chart.id, [w, 1.8, 0.6, 4.4]);
            let data =
                curvature_at(&b.metric, &p, &b.chart, b.orientation, DiffMode::Analytic).unwrap();
            assert!(
                data.ricci_norm_sq < 1e-18,
                "|Ric|^2 = {}",
                data.ricci_norm_sq
            );
        }
    }

    #[test]
    fn kahler_form_is_closed() {
        let b = lebrun_instanton(3, 0.8).unwrap();
        let b2 = lebrun_instanton(3, 0.8).unwrap();
        let field = FormField::new(2, move |q: &Point| b2.omega(q));
        let p = Point::new(b.chart.id, [-1.4, 0.9, 1.2, 3.0]);
        let d = exterior_derivative(&field, &p, &b.chart, 1e-4).unwrap();
        assert!(d.max_abs() < 1e-9, "d omega = {}", d.max_abs());
    }

    #[test]
    fn complex_structure_squares_to_minus_one() {
        let b = lebrun_instanton(3, 1.0).unwrap();
        let p = Point::new(b.chart.id, [-1.5, 0.7, 1.1, 2.0]);
        let j = b.j_matrix(&p);
        for i in 0..4 {
            for l in 0..4 {
                let mut acc = 0.0;
                for s in 0..4 {
                    acc += j[i][s] * j[s][l];
                }
                let expect = if i == l { -1.0 } else { 0.0 };
                assert!((acc - expect).abs() < 1e-12, "J^2 at ({i},{l}) = {acc}");
            }
        }
    }

    #[test]
    fn j_is_an_isometry() {
        let b = lebrun_instanton(2, 0.8).unwrap();
        let p = Point::new(b.chart.id, [-2.0, 1.4, 0.9, 0.3]);
        let g = b.g(&p);
        let j = b.j_matrix(&p);
        for a in 0..4 {
            for c in 0..4 {
                // (J^T g J)_{ac} = g_{ac}
                let mut acc = 0.0;
                for i in 0..4 {
                    for l in 0..4 {
                        acc += j[i][a] * g[i][l] * j[l][c];
                    }
                }
                assert!((acc - g[a][c]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn momentum_differential_matches_contraction() {
        let b = lebrun_instanton(3, 1.0).unwrap();
        let p = Point::new(b.chart.id, [-1.2, 0.5, 1.3, 4.0]);
        let omega = b.omega(&p);
        let ivo = omega.interior(&b.v(&p)).unwrap();
        let dz = b.momentum.jet(&p).grad;
        for i in 0..4 {
            assert!((dz[i] + ivo.comp(&[i])).abs() < 1e-13, "component {i}");
        }
    }

    #[test]
    fn killing_norm_matches_profile() {
        // |V|^2 = C F / k^2.
        let b = lebrun_instanton(2, 1.0).unwrap();
        let w = -1.7;
        let p = Point::new(b.chart.id, [w, 0.2, 0.8, 1.0]);
        let (c, f) = profile(2.0, 1.0, w);
        assert!((b.v_norm_sq(&p) - c * f / 4.0).abs() < 1e-12);
    }

    #[test]
    fn declared_momentum_laplacian_examples() {
        // k = 3, m = 1, z = -1: lap z = -10/7.
        let b = lebrun_instanton(3, 1.0).unwrap();
        let lap = b.declared.lap_z.as_ref().unwrap();
        assert!((lap(-1.0) + 10.0 / 7.0).abs() < 1e-14);
        // Eguchi-Hanson: lap z = -2 identically.
        let eh = lebrun_instanton(2, 1.0).unwrap();
        let lap = eh.declared.lap_z.as_ref().unwrap();
        assert!((lap(-0.4) + 2.0).abs() < 1e-14);
        assert!((lap(-2.7) + 2.0).abs() < 1e-14);
    }

    #[test]
    fn section_lies_in_the_level_set() {
        let b = lebrun_instanton(3, 0.5).unwrap();
        let chart = b.reduction_chart(-1.25).unwrap();
        for &s in &[[-0.6, 0.4], [0.3, 3.0]] {
            let p = Point::new(b.chart.id, chart.embed.value(s));
            assert!((b.z(&p) + 1.25).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(lebrun_instanton(0, 1.0).is_err());
        assert!(lebrun_instanton(2, 0.0).is_err());
        assert!(lebrun_instanton(2, -1.0).is_err());
    }

    #[test]
    fn momentum_outside_regular_window_is_rejected() {
        let b = lebrun_instanton(2, 1.0).unwrap();
        assert!(b.reduction_chart(-0.01).is_err());
        assert!(b.reduction_chart(-1.0).is_ok());
    }
}
