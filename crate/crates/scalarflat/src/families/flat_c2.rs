//! Flat C^2 with the rotational Killing fields.
//!
//! Coordinates `(x1, y1, x2, y2)`, Euclidean metric, standard complex
//! structure `J dx_i = -dy_i` on covectors. The Killing field is
//! `V = alpha (y1 dx1 - x1 dy1) + beta (y2 dx2 - x2 dy2)` (vector
//! components), with momentum
//! `z = -(alpha/2)(x1^2 + y1^2) - (beta/2)(x2^2 + y2^2)`.
//!
//! For `alpha = beta = 1` the level sets are round three-spheres of radius
//! `sqrt(-2z)` and the reduction is the Hopf quotient: a round two-sphere
//! of radius `sqrt(-z/2)`, circle-bundle degree `-1`, Euler number `2`,
//! and `lap z = -4` identically.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::chart::{Chart, Point};
use crate::error::{Error, Result};
use crate::fields::{
    EmbedField, EmbedMap, MatrixField, ScalarField, ScalarMap, VectorField, VectorMap,
};
use crate::jet::Real;

use super::bundle::{
    orientation_from_omega, Declared, GeometryBundle, IsothermalChart, Reduction, ReductionChart,
};

struct EuclideanMetric;

impl crate::fields::MatrixMap for EuclideanMetric {
    fn eval<T: Real>(&self, _: [T; 4]) -> [[T; 4]; 4] {
        let one = T::constant(1.0);
        let zero = T::constant(0.0);
        [
            [one, zero, zero, zero],
            [zero, one, zero, zero],
            [zero, zero, one, zero],
            [zero, zero, zero, one],
        ]
    }
}

/// `J e_{x_i} = e_{y_i}`, `J e_{y_i} = -e_{x_i}`.
struct StandardJ;

impl crate::fields::MatrixMap for StandardJ {
    fn eval<T: Real>(&self, _: [T; 4]) -> [[T; 4]; 4] {
        let one = T::constant(1.0);
        let zero = T::constant(0.0);
        [
            [zero, -one, zero, zero],
            [one, zero, zero, zero],
            [zero, zero, zero, -one],
            [zero, zero, one, zero],
        ]
    }
}

struct Rotation {
    alpha: f64,
    beta: f64,
}

impl VectorMap for Rotation {
    fn eval<T: Real>(&self, x: [T; 4]) -> [T; 4] {
        let a = T::constant(self.alpha);
        let b = T::constant(self.beta);
        [a * x[1], -(a * x[0]), b * x[3], -(b * x[2])]
    }
}

struct Momentum {
    alpha: f64,
    beta: f64,
}

impl ScalarMap for Momentum {
    fn eval<T: Real>(&self, x: [T; 4]) -> T {
        let half = T::constant(-0.5);
        half * (T::constant(self.alpha) * (x[0] * x[0] + x[1] * x[1])
            + T::constant(self.beta) * (x[2] * x[2] + x[3] * x[3]))
    }
}

/// Hopf-quotient section at momentum `z < 0`: parameters are the polar
/// angles `(theta, phi)` on the quotient sphere; the section fixes the
/// first complex coordinate real and nonnegative.
struct HopfSection {
    z: f64,
}

impl EmbedMap for HopfSection {
    fn eval<T: Real>(&self, s: [T; 2]) -> [T; 4] {
        let r = T::constant((-2.0 * self.z).sqrt());
        let half = T::constant(0.5);
        let c = (s[0] * half).cos();
        let q = (s[0] * half).sin();
        [
            r * c,
            T::constant(0.0),
            r * q * s[1].cos(),
            r * q * s[1].sin(),
        ]
    }
}

/// Real part of the Hopf stereographic coordinate `zeta = z2 / z1`.
struct StereoX;

impl ScalarMap for StereoX {
    fn eval<T: Real>(&self, x: [T; 4]) -> T {
        let denom = x[0] * x[0] + x[1] * x[1];
        (x[2] * x[0] + x[3] * x[1]) / denom
    }
}

/// Imaginary part of `zeta = z2 / z1`.
struct StereoY;

impl ScalarMap for StereoY {
    fn eval<T: Real>(&self, x: [T; 4]) -> T {
        let denom = x[0] * x[0] + x[1] * x[1];
        (x[3] * x[0] - x[2] * x[1]) / denom
    }
}

/// `u = 2 log(-2z) - 2 log(1 + |zeta|^2)` in ambient coordinates.
struct PotentialU;

impl ScalarMap for PotentialU {
    fn eval<T: Real>(&self, x: [T; 4]) -> T {
        let r1 = x[0] * x[0] + x[1] * x[1];
        let r2 = x[2] * x[2] + x[3] * x[3];
        let minus2z = r1 + r2;
        let rho_sq = r2 / r1;
        let two = T::constant(2.0);
        two * minus2z.ln() - two * (T::constant(1.0) + rho_sq).ln()
    }
}

/// `w = |grad z|^{-2} = 1 / (-2z)`.
struct PotentialW;

impl ScalarMap for PotentialW {
    fn eval<T: Real>(&self, x: [T; 4]) -> T {
        (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]).recip()
    }
}

/// The flat family. `alpha` and `beta` are the rotation weights; the
/// Hopf reduction and isothermal data are attached only for
/// `alpha = beta = 1`, where the orbit period is `2 pi`.
pub fn flat_c2(alpha: f64, beta: f64) -> Result<GeometryBundle> {
    if alpha < 0.0 || beta < 0.0 || (alpha == 0.0 && beta == 0.0) {
        return Err(Error::InvalidParameter(format!(
            "rotation weights must be nonnegative and not both zero (got {alpha}, {beta})"
        )));
    }
    let chart = Chart::unbounded("euclidean");
    let metric = MatrixField::new(EuclideanMetric);
    let complex_structure = MatrixField::new(StandardJ);
    let killing = VectorField::new(Rotation { alpha, beta });
    let momentum = ScalarField::new(Momentum { alpha, beta });

    let basepoint = Point::new(chart.id, [1.0, 0.3, -0.4, 0.8]);
    let orientation = orientation_from_omega(&metric, &complex_structure, &basepoint)?;

    let hopf = (alpha - 1.0).abs() < 1e-14 && (beta - 1.0).abs() < 1e-14;

    let reduction = hopf.then(|| Reduction {
        z_range: (f64::NEG_INFINITY, 0.0),
        chart_at: Arc::new(|z| ReductionChart {
            z,
            domain: [[0.0, PI], [0.0, 2.0 * PI]],
            embed: EmbedField::new(HopfSection { z }),
        }),
        params_of: Arc::new(|p: &Point| {
            let [x1, y1, x2, y2] = p.coords;
            let r_sq = x1 * x1 + y1 * y1 + x2 * x2 + y2 * y2;
            let cos_theta = (x1 * x1 + y1 * y1 - x2 * x2 - y2 * y2) / r_sq;
            let phi = (y2 * x1 - x2 * y1)
                .atan2(x2 * x1 + y2 * y1)
                .rem_euclid(2.0 * PI);
            [cos_theta.clamp(-1.0, 1.0).acos(), phi]
        }),
    });

    let isothermal = hopf.then(|| IsothermalChart {
        x: ScalarField::new(StereoX),
        y: ScalarField::new(StereoY),
        u: ScalarField::new(PotentialU),
        w: ScalarField::new(PotentialW),
    });

    let declared = if hopf {
        Declared {
            chi_g: Some(2.0),
            e_g: Some(-1.0),
            lap_z: Some(Arc::new(|_| -4.0)),
            vol2: Some(Arc::new(|z| -2.0 * PI * z)),
            int_lap_z: Some(Arc::new(|z| 8.0 * PI * z)),
            int_lap_z_sq: Some(Arc::new(|z| -32.0 * PI * z)),
            int_v_sq: Some(Arc::new(|z| 4.0 * PI * z * z)),
            int_ric_sq: Some(Arc::new(|_| 0.0)),
        }
    } else {
        Declared::default()
    };

    Ok(GeometryBundle {
        name: format!("flat_c2(alpha={alpha}, beta={beta})"),
        chart,
        metric,
        complex_structure,
        killing,
        momentum,
        orientation,
        scalar_flat_expected: true,
        compact_level_sets: hopf,
        reduction,
        isothermal,
        declared,
        sample_box: [[-2.0, 2.0]; 4],
        sample_filter: Some(Arc::new(|p: &Point| {
            let [x1, y1, x2, y2] = p.coords;
            // Keep away from the first complex axis (the isothermal chart
            // degenerates there) and from the origin.
            x1 * x1 + y1 * y1 > 0.09 && x1 * x1 + y1 * y1 + x2 * x2 + y2 * y2 > 0.25
        })),
        z_window: (-3.0, -0.2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orientation_is_positive_for_coordinate_order() {
        let b = flat_c2(1.0, 1.0).unwrap();
        assert_eq!(b.orientation, 1.0);
    }

    #[test]
    fn momentum_differential_matches_contraction() {
        // dz = -i_V omega pointwise.
        let b = flat_c2(1.0, 2.0).unwrap();
        let p = Point::new(b.chart.id, [0.7, -0.3, 1.1, 0.4]);
        let omega = b.omega(&p);
        let ivo = omega.interior(&b.v(&p)).unwrap();
        let dz = b.momentum.jet(&p).grad;
        for i in 0..4 {
            assert!(
                (dz[i] + ivo.comp(&[i])).abs() < 1e-13,
                "component {i}: dz = {}, -i_V omega = {}",
                dz[i],
                -ivo.comp(&[i])
            );
        }
    }

    #[test]
    fn killing_norm_is_minus_two_z_for_equal_weights() {
        let b = flat_c2(1.0, 1.0).unwrap();
        let p = Point::new(b.chart.id, [0.5, 0.5, -1.0, 0.25]);
        assert!((b.v_norm_sq(&p) + 2.0 * b.z(&p)).abs() < 1e-13);
    }

    #[test]
    fn hopf_section_lies_in_the_level_set() {
        let b = flat_c2(1.0, 1.0).unwrap();
        let chart = b.reduction_chart(-2.0).unwrap();
        for &s in &[[0.3, 0.3], [1.6, 2.0], [2.9, 5.5]] {
            let coords = chart.embed.value(s);
            let p = Point::new(b.chart.id, coords);
            assert!((b.z(&p) + 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn reduction_params_invert_the_section() {
        let b = flat_c2(1.0, 1.0).unwrap();
        let red = b.reduction.as_ref().unwrap();
        let chart = b.reduction_chart(-1.5).unwrap();
        let s = [0.4, 1.2];
        let p = Point::new(b.chart.id, chart.embed.value(s));
        let back = (red.params_of)(&p);
        assert!((back[0] - s[0]).abs() < 1e-12);
        assert!((back[1] - s[1]).abs() < 1e-12);
    }

    #[test]
    fn degenerate_weights_are_rejected() {
        assert!(flat_c2(0.0, 0.0).is_err());
        assert!(flat_c2(-1.0, 1.0).is_err());
        assert!(flat_c2(1.0, 0.0).is_ok()); // valid, just no reduction
        assert!(flat_c2(1.0, 0.0).unwrap().reduction.is_none());
    }

    #[test]
    fn potentials_satisfy_their_definitions() {
        // u = log|grad z|^2 - log|grad x|^2 and w = |grad z|^{-2}, checked
        // via the jets of the isothermal fields themselves.
        let b = flat_c2(1.0, 1.0).unwrap();
        let iso = b.isothermal.as_ref().unwrap();
        let p = Point::new(b.chart.id, [0.8, -0.2, 0.5, 1.1]);
        let gz = b.momentum.jet(&p).grad;
        let gx = iso.x.jet(&p).grad;
        let nz: f64 = gz.iter().map(|a| a * a).sum(); // flat metric
        let nx: f64 = gx.iter().map(|a| a * a).sum();
        assert!((iso.u.value(&p) - (nz.ln() - nx.ln())).abs() < 1e-12);
        assert!((iso.w.value(&p) - 1.0 / nz).abs() < 1e-12);
    }
}
