//! The scalar-flat product `S^2(+1) x N^2(-1)` where `N^2` is a constant
//! curvature `-1` surface, in momentum-angle coordinates on each factor:
//!
//! ```text
//! g = dz1^2 / G1 + G1 dth1^2 + dz2^2 / G2 + G2 dth2^2,
//! G1(z1) = 1 - z1^2,
//! G2(z2) = z2^2 - 1 | z2^2 | z2^2 + 1   (elliptic / parabolic / hyperbolic),
//! ```
//!
//! with the product complex structure and Kahler form
//! `omega = dz1 ^ dth1 + dz2 ^ dth2`. The three `G2` choices are the
//! rotation, translation, and boost Killing fields of the hyperbolic
//! factor expressed in their own momentum coordinates; all yield the
//! same local geometry. The verification field can be either angular
//! generator or their diagonal sum.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::chart::{Chart, Point};
use crate::error::{Error, Result};
use crate::fields::{
    EmbedField, EmbedMap, MatrixField, MatrixMap, ScalarField, ScalarMap, VectorField, VectorMap,
};
use crate::jet::Real;

use super::bundle::{Declared, GeometryBundle, IsothermalChart, Reduction, ReductionChart};

/// Constant-curvature profile of the second factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HyperbolicModel {
    /// `G2 = z2^2 - 1` on `z2 > 1` (rotation field, closed orbits).
    Elliptic,
    /// `G2 = z2^2` on `z2 > 0` (horocycle translation field).
    Parabolic,
    /// `G2 = z2^2 + 1` on all of `z2` (boost field).
    Hyperbolic,
}

/// Which Killing field drives the verification.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldChoice {
    /// `V = d/dth1`, momentum `z = z1`. Level sets are noncompact.
    SphereAngle,
    /// `V = d/dth2`, momentum `z = z2`. Reduces to the round sphere.
    HyperbolicAngle,
    /// `V = d/dth1 + d/dth2`, momentum `z = z1 + z2`.
    Diagonal,
}

impl HyperbolicModel {
    fn g2<T: Real>(self, z2: T) -> T {
        match self {
            HyperbolicModel::Elliptic => z2 * z2 - T::constant(1.0),
            HyperbolicModel::Parabolic => z2 * z2,
            HyperbolicModel::Hyperbolic => z2 * z2 + T::constant(1.0),
        }
    }

    fn z2_domain(self) -> [f64; 2] {
        match self {
            HyperbolicModel::Elliptic => [1.0 + 1e-9, f64::INFINITY],
            HyperbolicModel::Parabolic => [1e-9, f64::INFINITY],
            HyperbolicModel::Hyperbolic => [f64::NEG_INFINITY, f64::INFINITY],
        }
    }

    fn z2_sample_box(self) -> [f64; 2] {
        match self {
            HyperbolicModel::Elliptic => [1.2, 3.0],
            HyperbolicModel::Parabolic => [0.3, 3.0],
            HyperbolicModel::Hyperbolic => [-2.0, 2.0],
        }
    }
}

struct ProductMetric {
    model: HyperbolicModel,
}

impl MatrixMap for ProductMetric {
    fn eval<T: Real>(&self, x: [T; 4]) -> [[T; 4]; 4] {
        let g1 = T::constant(1.0) - x[0] * x[0];
        let g2 = self.model.g2(x[2]);
        let zero = T::constant(0.0);
        [
            [g1.recip(), zero, zero, zero],
            [zero, g1, zero, zero],
            [zero, zero, g2.recip(), zero],
            [zero, zero, zero, g2],
        ]
    }
}

struct ProductJ {
    model: HyperbolicModel,
}

impl MatrixMap for ProductJ {
    fn eval<T: Real>(&self, x: [T; 4]) -> [[T; 4]; 4] {
        let g1 = T::constant(1.0) - x[0] * x[0];
        let g2 = self.model.g2(x[2]);
        let zero = T::constant(0.0);
        [
            [zero, -g1, zero, zero],
            [g1.recip(), zero, zero, zero],
            [zero, zero, zero, -g2],
            [zero, zero, g2.recip(), zero],
        ]
    }
}

struct AngleField {
    th1: f64,
    th2: f64,
}

impl VectorMap for AngleField {
    fn eval<T: Real>(&self, _: [T; 4]) -> [T; 4] {
        [
            T::constant(0.0),
            T::constant(self.th1),
            T::constant(0.0),
            T::constant(self.th2),
        ]
    }
}

struct MomentumSum {
    c1: f64,
    c2: f64,
}

impl ScalarMap for MomentumSum {
    fn eval<T: Real>(&self, x: [T; 4]) -> T {
        x[0] * T::constant(self.c1) + x[2] * T::constant(self.c2)
    }
}

/// Level-set section for `V = d/dth2`: the sphere factor at fixed `z2`,
/// parameterised by the polar angle `t` with `z1 = cos t`.
struct SphereGraph {
    z2: f64,
}

impl EmbedMap for SphereGraph {
    fn eval<T: Real>(&self, s: [T; 2]) -> [T; 4] {
        [s[0].cos(), s[1], T::constant(self.z2), T::constant(0.0)]
    }
}

/// Level-set section for the diagonal field: parameters are the polar
/// angle of the sphere factor and the invariant angle difference
/// `th1 - th2`, graphed over `z2 = z - z1`.
struct DiagonalGraph {
    z: f64,
}

impl EmbedMap for DiagonalGraph {
    fn eval<T: Real>(&self, s: [T; 2]) -> [T; 4] {
        let z1 = s[0].cos();
        [z1, s[1], T::constant(self.z) - z1, T::constant(0.0)]
    }
}

/// Stereographic coordinates on the sphere factor,
/// `x + i y = sqrt((1 + z1)/(1 - z1)) e^{i th1}`.
struct SphereStereo {
    sin: bool,
}

impl ScalarMap for SphereStereo {
    fn eval<T: Real>(&self, x: [T; 4]) -> T {
        let r = ((T::constant(1.0) + x[0]) / (T::constant(1.0) - x[0])).sqrt();
        if self.sin {
            r * x[1].sin()
        } else {
            r * x[1].cos()
        }
    }
}

/// `u = log G2 - 2 log((1 + rho^2)/2)` with `rho^2 = (1 + z1)/(1 - z1)`.
struct ProductPotentialU {
    model: HyperbolicModel,
}

impl ScalarMap for ProductPotentialU {
    fn eval<T: Real>(&self, x: [T; 4]) -> T {
        let g2 = self.model.g2(x[2]);
        let rho_sq = (T::constant(1.0) + x[0]) / (T::constant(1.0) - x[0]);
        g2.ln() - T::constant(2.0) * ((T::constant(1.0) + rho_sq) * T::constant(0.5)).ln()
    }
}

struct ProductPotentialW {
    model: HyperbolicModel,
}

impl ScalarMap for ProductPotentialW {
    fn eval<T: Real>(&self, x: [T; 4]) -> T {
        self.model.g2(x[2]).recip()
    }
}

/// The product family with the requested profile and Killing field.
pub fn s2h2(model: HyperbolicModel, field: FieldChoice) -> Result<GeometryBundle> {
    let z2_dom = model.z2_domain();
    let chart = Chart::new(
        match model {
            HyperbolicModel::Elliptic => "s2h2_elliptic",
            HyperbolicModel::Parabolic => "s2h2_parabolic",
            HyperbolicModel::Hyperbolic => "s2h2_hyperbolic",
        },
        [
            [-1.0 + 1e-9, 1.0 - 1e-9],
            [f64::NEG_INFINITY, f64::INFINITY],
            z2_dom,
            [f64::NEG_INFINITY, f64::INFINITY],
        ],
    );

    let (killing, momentum) = match field {
        FieldChoice::SphereAngle => (
            AngleField { th1: 1.0, th2: 0.0 },
            MomentumSum { c1: 1.0, c2: 0.0 },
        ),
        FieldChoice::HyperbolicAngle => (
            AngleField { th1: 0.0, th2: 1.0 },
            MomentumSum { c1: 0.0, c2: 1.0 },
        ),
        FieldChoice::Diagonal => (
            AngleField { th1: 1.0, th2: 1.0 },
            MomentumSum { c1: 1.0, c2: 1.0 },
        ),
    };

    let mut reduction = None;
    let mut isothermal = None;
    let mut declared = Declared::default();
    let mut compact_level_sets = false;
    let mut z_window = (-0.9, 0.9);

    match field {
        FieldChoice::SphereAngle => {
            declared.lap_z = Some(Arc::new(|z: f64| -2.0 * z));
        }
        FieldChoice::HyperbolicAngle => {
            compact_level_sets = true;
            let z_range = (z2_dom[0].max(-1e18), z2_dom[1].min(1e18));
            reduction = Some(Reduction {
                z_range,
                chart_at: Arc::new(|z| ReductionChart {
                    z,
                    domain: [[0.0, PI], [0.0, 2.0 * PI]],
                    embed: EmbedField::new(SphereGraph { z2: z }),
                }),
                params_of: Arc::new(|p: &Point| {
                    [p.coords[0].acos(), p.coords[1].rem_euclid(2.0 * PI)]
                }),
            });
            isothermal = Some(IsothermalChart {
                x: ScalarField::new(SphereStereo { sin: false }),
                y: ScalarField::new(SphereStereo { sin: true }),
                u: ScalarField::new(ProductPotentialU { model }),
                w: ScalarField::new(ProductPotentialW { model }),
            });
            declared = Declared {
                chi_g: Some(2.0),
                e_g: Some(0.0),
                lap_z: Some(Arc::new(|z: f64| 2.0 * z)),
                vol2: Some(Arc::new(|_| 4.0 * PI)),
                int_lap_z: Some(Arc::new(|z: f64| 8.0 * PI * z)),
                int_lap_z_sq: Some(Arc::new(|z: f64| 16.0 * PI * z * z)),
                int_v_sq: Some(Arc::new(move |z: f64| 4.0 * PI * model.g2(z))),
                int_ric_sq: Some(Arc::new(|_| 16.0 * PI)),
            };
            let box2 = model.z2_sample_box();
            z_window = (box2[0], box2[1]);
        }
        FieldChoice::Diagonal => {
            if model != HyperbolicModel::Hyperbolic {
                return Err(Error::InvalidParameter(
                    "diagonal field reduction requires the hyperbolic (boost) model".into(),
                ));
            }
            compact_level_sets = true;
            reduction = Some(Reduction {
                z_range: (f64::NEG_INFINITY, f64::INFINITY),
                chart_at: Arc::new(|z| ReductionChart {
                    z,
                    domain: [[0.0, PI], [0.0, 2.0 * PI]],
                    embed: EmbedField::new(DiagonalGraph { z }),
                }),
                params_of: Arc::new(|p: &Point| {
                    [
                        p.coords[0].acos(),
                        (p.coords[1] - p.coords[3]).rem_euclid(2.0 * PI),
                    ]
                }),
            });
            declared = Declared {
                chi_g: Some(2.0),
                e_g: None,
                lap_z: None,
                vol2: Some(Arc::new(|_| 4.0 * PI)),
                int_lap_z: Some(Arc::new(|z: f64| 8.0 * PI * z)),
                int_lap_z_sq: Some(Arc::new(|z: f64| 16.0 * PI * z * z + 64.0 * PI / 3.0)),
                int_v_sq: Some(Arc::new(|z: f64| 4.0 * PI * (z * z + 2.0))),
                int_ric_sq: Some(Arc::new(|_| 16.0 * PI)),
            };
            z_window = (-1.5, 1.5);
        }
    }

    let box2 = model.z2_sample_box();
    Ok(GeometryBundle {
        name: format!("s2h2({model:?}, {field:?})"),
        chart,
        metric: MatrixField::new(ProductMetric { model }),
        complex_structure: MatrixField::new(ProductJ { model }),
        killing: VectorField::new(killing),
        momentum: ScalarField::new(momentum),
        orientation: 1.0,
        scalar_flat_expected: true,
        compact_level_sets,
        reduction,
        isothermal,
        declared,
        sample_box: [[-0.9, 0.9], [0.1, 6.1], box2, [0.1, 6.1]],
        sample_filter: None,
        z_window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::{curvature_at, DiffMode};

    #[test]
    fn scalar_flat_with_expected_curvature_norms() {
        for model in [
            HyperbolicModel::Elliptic,
            HyperbolicModel::Parabolic,
            HyperbolicModel::Hyperbolic,
        ] {
            let b = s2h2(model, FieldChoice::HyperbolicAngle).unwrap();
            let z2 = 0.5 * (model.z2_sample_box()[0] + model.z2_sample_box()[1]);
            let p = Point::new(b.chart.id, [0.3, 1.0, z2, 2.0]);
            let data =
                curvature_at(&b.metric, &p, &b.chart, b.orientation, DiffMode::Analytic).unwrap();
            assert!(data.scalar.abs() < 1e-10, "scalar = {}", data.scalar);
            assert!((data.ricci_norm_sq - 4.0).abs() < 1e-9);
            assert!((data.rm_norm_sq - 8.0).abs() < 1e-9);
        }
    }

    #[test]
    fn momentum_differential_matches_contraction() {
        for field in [
            FieldChoice::SphereAngle,
            FieldChoice::HyperbolicAngle,
            FieldChoice::Diagonal,
        ] {
            let b = s2h2(HyperbolicModel::Hyperbolic, field).unwrap();
            let p = Point::new(b.chart.id, [0.2, 0.7, -0.4, 1.9]);
            let omega = b.omega(&p);
            let ivo = omega.interior(&b.v(&p)).unwrap();
            let dz = b.momentum.jet(&p).grad;
            for i in 0..4 {
                assert!((dz[i] + ivo.comp(&[i])).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn diagonal_field_requires_boost_model() {
        assert!(s2h2(HyperbolicModel::Elliptic, FieldChoice::Diagonal).is_err());
        assert!(s2h2(HyperbolicModel::Hyperbolic, FieldChoice::Diagonal).is_ok());
    }

    #[test]
    fn diagonal_section_lies_in_the_level_set() {
        let b = s2h2(HyperbolicModel::Hyperbolic, FieldChoice::Diagonal).unwrap();
        let chart = b.reduction_chart(0.7).unwrap();
        let p = Point::new(b.chart.id, chart.embed.value([0.4, 1.0]));
        assert!((b.z(&p) - 0.7).abs() < 1e-14);
    }

    #[test]
    fn killing_norms() {
        let b = s2h2(HyperbolicModel::Hyperbolic, FieldChoice::Diagonal).unwrap();
        let p = Point::new(b.chart.id, [0.25, 0.0, 1.5, 0.0]);
        // |V|^2 = G1(z1) + G2(z2).
        let expect = (1.0 - 0.0625) + (2.25 + 1.0);
        assert!((b.v_norm_sq(&p) - expect).abs() < 1e-13);
    }
}
