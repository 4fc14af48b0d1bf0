//! Geometries built directly from ansatz data `(u, w, alpha)` in a chart
//! `(x, y, z, t)`:
//!
//! ```text
//! g = w e^u (dx^2 + dy^2) + w dz^2 + w^{-1} (dt + alpha)^2,
//! alpha = a1 dx + a2 dy + a3 dz,
//! ```
//!
//! with `d/dt` as the Killing field and the coordinate `z` as its
//! momentum. The metric is scalar-flat Kahler exactly when the data
//! solves the Toda-type system
//!
//! ```text
//! u_xx + u_yy + (e^u)_zz = 0,
//! w_xx + w_yy + (e^u w)_zz = 0,
//! d alpha = w_x dy^dz + w_y dz^dx + (e^u w)_z dx^dy,
//! ```
//!
//! which the verification engine checks numerically. Fixtures below
//! supply an exact flat solution, the ansatz presentation of the
//! degree-`k` instantons, and a deliberately broken non-solution used to
//! confirm that the scalar-curvature detector actually fires.

use std::sync::Arc;

use crate::chart::{Chart, Point};
use crate::error::Result;
use crate::fields::{MatrixField, MatrixMap, ScalarField, ScalarMap, VectorField, VectorMap};
use crate::jet::Real;

use super::bundle::{orientation_from_omega, Declared, GeometryBundle};

/// The free data of the ansatz, as functions of `(x, y, z)`.
pub trait LebrunAnsatz: Send + Sync + 'static {
    fn u<T: Real>(&self, x: T, y: T, z: T) -> T;
    fn w<T: Real>(&self, x: T, y: T, z: T) -> T;
    fn alpha<T: Real>(&self, x: T, y: T, z: T) -> [T; 3];
}

struct AnsatzMetric<D>(Arc<D>);

impl<D: LebrunAnsatz> MatrixMap for AnsatzMetric<D> {
    fn eval<T: Real>(&self, x: [T; 4]) -> [[T; 4]; 4] {
        let u = self.0.u(x[0], x[1], x[2]);
        let w = self.0.w(x[0], x[1], x[2]);
        let [a1, a2, a3] = self.0.alpha(x[0], x[1], x[2]);
        let e = w * u.exp();
        let wi = w.recip();
        [
            [e + a1 * a1 * wi, a1 * a2 * wi, a1 * a3 * wi, a1 * wi],
            [a1 * a2 * wi, e + a2 * a2 * wi, a2 * a3 * wi, a2 * wi],
            [a1 * a3 * wi, a2 * a3 * wi, w + a3 * a3 * wi, a3 * wi],
            [a1 * wi, a2 * wi, a3 * wi, wi],
        ]
    }
}

/// Complex structure sending `dx -> -dy` and `dz -> -(dt + alpha)/w`.
struct AnsatzJ<D>(Arc<D>);

impl<D: LebrunAnsatz> MatrixMap for AnsatzJ<D> {
    fn eval<T: Real>(&self, x: [T; 4]) -> [[T; 4]; 4] {
        let w = self.0.w(x[0], x[1], x[2]);
        let [a1, a2, a3] = self.0.alpha(x[0], x[1], x[2]);
        let wi = w.recip();
        let zero = T::constant(0.0);
        let one = T::constant(1.0);
        [
            [zero, -one, zero, zero],
            [one, zero, zero, zero],
            [-(a1 * wi), -(a2 * wi), -(a3 * wi), -wi],
            [
                a3 * a1 * wi - a2,
                a1 + a3 * a2 * wi,
                w + a3 * a3 * wi,
                a3 * wi,
            ],
        ]
    }
}

struct FiberField;

impl VectorMap for FiberField {
    fn eval<T: Real>(&self, _: [T; 4]) -> [T; 4] {
        [
            T::constant(0.0),
            T::constant(0.0),
            T::constant(0.0),
            T::constant(1.0),
        ]
    }
}

struct ThirdCoordinate;

impl ScalarMap for ThirdCoordinate {
    fn eval<T: Real>(&self, x: [T; 4]) -> T {
        x[2]
    }
}

struct UComponent<D>(Arc<D>);

impl<D: LebrunAnsatz> ScalarMap for UComponent<D> {
    fn eval<T: Real>(&self, x: [T; 4]) -> T {
        self.0.u(x[0], x[1], x[2])
    }
}

struct WComponent<D>(Arc<D>);

impl<D: LebrunAnsatz> ScalarMap for WComponent<D> {
    fn eval<T: Real>(&self, x: [T; 4]) -> T {
        self.0.w(x[0], x[1], x[2])
    }
}

struct AlphaComponent<D> {
    data: Arc<D>,
    index: usize,
}

impl<D: LebrunAnsatz> ScalarMap for AlphaComponent<D> {
    fn eval<T: Real>(&self, x: [T; 4]) -> T {
        self.data.alpha(x[0], x[1], x[2])[self.index]
    }
}

/// The ansatz data repackaged as scalar fields on the chart, for checking
/// the Toda-type system directly.
pub struct AnsatzFields {
    pub u: ScalarField,
    pub w: ScalarField,
    pub alpha: [ScalarField; 3],
}

/// Assemble a geometry and its raw data fields from ansatz functions.
///
/// `sample_box` must lie inside `domain`; `basepoint` is where the
/// orientation of the volume form is fixed.
pub fn from_lebrun_data<D: LebrunAnsatz>(
    data: D,
    name: &str,
    chart_id: &'static str,
    domain: [[f64; 2]; 4],
    sample_box: [[f64; 2]; 4],
    basepoint: [f64; 4],
    scalar_flat_expected: bool,
    declared: Declared,
    z_window: (f64, f64),
) -> Result<(GeometryBundle, AnsatzFields)> {
    let data = Arc::new(data);
    let chart = Chart::new(chart_id, domain);
    let metric = MatrixField::new(AnsatzMetric(Arc::clone(&data)));
    let complex_structure = MatrixField::new(AnsatzJ(Arc::clone(&data)));
    let orientation = orientation_from_omega(
        &metric,
        &complex_structure,
        &Point::new(chart.id, basepoint),
    )?;
    let fields = AnsatzFields {
        u: ScalarField::new(UComponent(Arc::clone(&data))),
        w: ScalarField::new(WComponent(Arc::clone(&data))),
        alpha: [
            ScalarField::new(AlphaComponent {
                data: Arc::clone(&data),
                index: 0,
            }),
            ScalarField::new(AlphaComponent {
                data: Arc::clone(&data),
                index: 1,
            }),
            ScalarField::new(AlphaComponent { data, index: 2 }),
        ],
    };
    let bundle = GeometryBundle {
        name: name.to_string(),
        chart,
        metric,
        complex_structure,
        killing: VectorField::new(FiberField),
        momentum: ScalarField::new(ThirdCoordinate),
        orientation,
        scalar_flat_expected,
        compact_level_sets: false,
        reduction: None,
        isothermal: None,
        declared,
        sample_box,
        sample_filter: None,
        z_window,
    };
    Ok((bundle, fields))
}

/// `u = 0`, `w = 1`, `alpha = 0`: flat space with a translational field.
struct FlatData;

impl LebrunAnsatz for FlatData {
    fn u<T: Real>(&self, _: T, _: T, _: T) -> T {
        T::constant(0.0)
    }
    fn w<T: Real>(&self, _: T, _: T, _: T) -> T {
        T::constant(1.0)
    }
    fn alpha<T: Real>(&self, _: T, _: T, _: T) -> [T; 3] {
        [T::constant(0.0), T::constant(0.0), T::constant(0.0)]
    }
}

pub fn flat_translational() -> Result<(GeometryBundle, AnsatzFields)> {
    from_lebrun_data(
        FlatData,
        "flat_translational",
        "ansatz_flat",
        [[f64::NEG_INFINITY, f64::INFINITY]; 4],
        [[-2.0, 2.0], [-2.0, 2.0], [-2.0, 2.0], [0.0, 1.0]],
        [0.1, -0.2, 0.3, 0.0],
        true,
        Declared {
            lap_z: Some(Arc::new(|_| 0.0)),
            ..Declared::default()
        },
        (-1.0, 1.0),
    )
}

/// The degree-`k` instanton in ansatz form: with `C = -2kz + m^2` and
/// `rho^2 = x^2 + y^2`,
///
/// ```text
/// e^u = (C^2 + (k-2) m^2 C - (k-1) m^4) / (k^2 (1 + rho^2)^2),
/// w   = k^2 / (C + (k-2) m^2 - (k-1) m^4 / C),
/// alpha = -k (x dy - y dx) / (1 + rho^2).
/// ```
struct InstantonData {
    k: f64,
    m2: f64,
}

impl InstantonData {
    fn cf<T: Real>(&self, z: T) -> (T, T) {
        let c = T::constant(self.m2) - z * T::constant(2.0 * self.k);
        let cf = c + T::constant((self.k - 2.0) * self.m2)
            - T::constant((self.k - 1.0) * self.m2 * self.m2) / c;
        (c, cf)
    }
}

impl LebrunAnsatz for InstantonData {
    fn u<T: Real>(&self, x: T, y: T, z: T) -> T {
        let (c, cf) = self.cf(z);
        let rho_sq = x * x + y * y;
        (c * cf / T::constant(self.k * self.k)).ln()
            - T::constant(2.0) * (T::constant(1.0) + rho_sq).ln()
    }
    fn w<T: Real>(&self, _: T, _: T, z: T) -> T {
        let (_, cf) = self.cf(z);
        T::constant(self.k * self.k) / cf
    }
    fn alpha<T: Real>(&self, x: T, y: T, _: T) -> [T; 3] {
        let s = T::constant(-self.k) / (T::constant(1.0) + x * x + y * y);
        [-(y * s), x * s, T::constant(0.0)]
    }
}

pub fn instanton_induced(k: u32, m: f64) -> Result<(GeometryBundle, AnsatzFields)> {
    let kf = f64::from(k);
    let m2 = m * m;
    let z_cut = -0.05 * m2;
    from_lebrun_data(
        InstantonData { k: kf, m2 },
        &format!("instanton_induced(k={k}, m={m})"),
        "ansatz_instanton",
        [
            [f64::NEG_INFINITY, f64::INFINITY],
            [f64::NEG_INFINITY, f64::INFINITY],
            [f64::NEG_INFINITY, z_cut],
            [f64::NEG_INFINITY, f64::INFINITY],
        ],
        [[-1.5, 1.5], [-1.5, 1.5], [-2.0, z_cut - 0.05], [0.0, 1.0]],
        [0.2, 0.4, -1.0, 0.0],
        true,
        Declared {
            lap_z: Some(Arc::new(move |z: f64| {
                let c = -2.0 * kf * z + m2;
                -2.0 * (2.0 * c + (kf - 2.0) * m2) / (kf * c)
            })),
            ..Declared::default()
        },
        (-2.0, 2.0 * z_cut),
    )
}

/// Smooth data that does not solve the system; its scalar curvature is
/// far from zero and the engine must say so.
struct BrokenData;

impl LebrunAnsatz for BrokenData {
    fn u<T: Real>(&self, x: T, y: T, z: T) -> T {
        x.sin() * y.cos() * T::constant(0.2) - z * z * T::constant(0.1)
    }
    fn w<T: Real>(&self, x: T, y: T, z: T) -> T {
        T::constant(1.0)
            + x * T::constant(0.1)
            + y * y * T::constant(0.05)
            + z.sin() * T::constant(0.1)
    }
    fn alpha<T: Real>(&self, _: T, _: T, _: T) -> [T; 3] {
        [T::constant(0.0), T::constant(0.0), T::constant(0.0)]
    }
}

pub fn perturbed_non_solution() -> Result<(GeometryBundle, AnsatzFields)> {
    from_lebrun_data(
        BrokenData,
        "perturbed_non_solution",
        "ansatz_broken",
        [[f64::NEG_INFINITY, f64::INFINITY]; 4],
        [[-1.0, 1.0], [-1.0, 1.0], [-1.0, 1.0], [0.0, 1.0]],
        [0.3, -0.1, 0.2, 0.0],
        false,
        Declared::default(),
        (-0.8, 0.8),
    )
}
