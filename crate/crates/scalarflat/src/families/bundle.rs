//! The container every family in the catalog produces: metric, complex
//! structure, Killing field and momentum function on one chart, together
//! with optional level-set reduction data, an optional isothermal
//! transversal chart, and whatever closed-form invariants the family
//! declares for cross-checking.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chart::{Chart, Point};
use crate::error::{Error, Result};
use crate::fields::{EmbedField, MatrixField, ScalarField, VectorField};
use crate::forms::FormValue;
use crate::linalg::Mat4;

/// `|V|` below this is treated as the singular locus of the circle action.
pub const KILLING_CUTOFF: f64 = 1e-8;

/// A function of the momentum value alone (closed-form level-set data).
pub type ZFunction = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Closed-form invariants a family declares for its level sets, used as
/// oracles by the integral checks. All are optional: families without
/// compact level sets declare nothing.
#[derive(Clone, Default)]
pub struct Declared {
    /// Euler number of the reduced surface.
    pub chi_g: Option<f64>,
    /// Degree of the circle bundle over the reduced surface.
    pub e_g: Option<f64>,
    /// Momentum Laplacian when it is constant on each level set.
    pub lap_z: Option<ZFunction>,
    /// Area of the reduced surface.
    pub vol2: Option<ZFunction>,
    /// Reduced integral of the momentum Laplacian.
    pub int_lap_z: Option<ZFunction>,
    /// Reduced integral of its square.
    pub int_lap_z_sq: Option<ZFunction>,
    /// Reduced integral of `|V|^2`.
    pub int_v_sq: Option<ZFunction>,
    /// Reduced integral of `|Ric|^2`.
    pub int_ric_sq: Option<ZFunction>,
}

/// A two-parameter chart for the reduced surface at a fixed momentum
/// value, embedded transversally to the Killing orbits inside the level
/// set.
#[derive(Clone)]
pub struct ReductionChart {
    pub z: f64,
    /// Parameter box `[lo, hi]` per parameter.
    pub domain: [[f64; 2]; 2],
    pub embed: EmbedField,
}

/// Level-set reduction data for a family whose regular level sets are
/// compact.
#[derive(Clone)]
pub struct Reduction {
    /// Open interval of momentum values with a regular compact level set.
    pub z_range: (f64, f64),
    /// Chart of the reduced surface at momentum `z`.
    pub chart_at: Arc<dyn Fn(f64) -> ReductionChart + Send + Sync>,
    /// Reduction parameters of an ambient point (inverse of the embedding
    /// up to the orbit direction).
    pub params_of: Arc<dyn Fn(&Point) -> [f64; 2] + Send + Sync>,
}

/// Isothermal transversal data: coordinates `x, y` that are invariant
/// under both the Killing flow and the momentum flow and isothermal on the
/// reduced surface, together with the ansatz potentials
/// `u = log |grad z|^2 - log |grad x|^2` and `w = |grad z|^{-2}` expressed
/// as functions of the chart coordinates.
#[derive(Clone)]
pub struct IsothermalChart {
    pub x: ScalarField,
    pub y: ScalarField,
    pub u: ScalarField,
    pub w: ScalarField,
}

/// A fully specified geometry from the catalog.
#[derive(Clone)]
pub struct GeometryBundle {
    pub name: String,
    pub chart: Chart,
    pub metric: MatrixField,
    /// `J^i_j` with `(J X)^i = J^i_j X^j`.
    pub complex_structure: MatrixField,
    /// The Killing field `V` in coordinate components.
    pub killing: VectorField,
    /// The momentum function `z` with `dz = -i_V omega`.
    pub momentum: ScalarField,
    /// Sign relating the coordinate order to the orientation fixed by
    /// `dVol = (1/2) omega ^ omega`.
    pub orientation: f64,
    /// Whether this geometry is expected to satisfy the scalar-flat
    /// equations (detector fixtures set this to false).
    pub scalar_flat_expected: bool,
    pub compact_level_sets: bool,
    pub reduction: Option<Reduction>,
    pub isothermal: Option<IsothermalChart>,
    pub declared: Declared,
    /// Box from which random regular points are drawn.
    pub sample_box: [[f64; 2]; 4],
    /// Extra predicate for sample rejection (e.g. staying away from a
    /// coordinate degeneracy that the Killing-norm cutoff does not see).
    pub sample_filter: Option<Arc<dyn Fn(&Point) -> bool + Send + Sync>>,
    /// Default momentum window for grid scans.
    pub z_window: (f64, f64),
}

impl GeometryBundle {
    pub fn g(&self, p: &Point) -> Mat4 {
        self.metric.value(p)
    }

    pub fn j_matrix(&self, p: &Point) -> Mat4 {
        self.complex_structure.value(p)
    }

    pub fn v(&self, p: &Point) -> [f64; 4] {
        self.killing.value(p)
    }

    pub fn z(&self, p: &Point) -> f64 {
        self.momentum.value(p)
    }

    pub fn v_norm_sq(&self, p: &Point) -> f64 {
        crate::linalg::bilinear(&self.g(p), &self.v(p), &self.v(p))
    }

    /// The Kähler form `omega = g(J . , .)` at `p`.
    pub fn omega(&self, p: &Point) -> FormValue {
        let g = self.g(p);
        let j = self.j_matrix(p);
        let mut m = [[0.0; 4]; 4];
        for i in 0..4 {
            for jj in 0..4 {
                // omega_{ij} = g(J e_i, e_j) = J^k_i g_{kj}
                let mut acc = 0.0;
                for k in 0..4 {
                    acc += j[k][i] * g[k][jj];
                }
                m[i][jj] = acc;
            }
        }
        FormValue::two_form_from_matrix(&m)
    }

    /// Volume form fixed by `dVol = (1/2) omega ^ omega`.
    pub fn dvol4(&self, p: &Point) -> Result<FormValue> {
        let g = self.g(p);
        let (_, det) = crate::linalg::inv_spd(&g)?;
        let mut out = FormValue::zero(4);
        out.set_antisym(&[0, 1, 2, 3], self.orientation * det.sqrt());
        Ok(out)
    }

    /// Reject points on or too near the singular locus of the action.
    pub fn require_regular(&self, p: &Point) -> Result<()> {
        let v2 = self.v_norm_sq(p);
        if v2.sqrt() < KILLING_CUTOFF {
            return Err(Error::NearSingularLocus(v2.sqrt()));
        }
        Ok(())
    }

    pub fn reduction(&self) -> Result<&Reduction> {
        self.reduction.as_ref().ok_or(Error::NoReduction)
    }

    pub fn isothermal(&self) -> Result<&IsothermalChart> {
        self.isothermal.as_ref().ok_or(Error::NoIsothermalChart)
    }

    /// Validate that `z` admits a reduction chart.
    pub fn reduction_chart(&self, z: f64) -> Result<ReductionChart> {
        let red = self.reduction()?;
        let (lo, hi) = red.z_range;
        if !(z > lo && z < hi) {
            return Err(Error::OutsideRegularRange { z, lo, hi });
        }
        Ok((red.chart_at)(z))
    }

    /// Deterministic sample of regular points from the declared box.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0usize;
        while out.len() < count && attempts < count * 1000 {
            attempts += 1;
            let mut coords = [0.0; 4];
            for (c, [lo, hi]) in coords.iter_mut().zip(self.sample_box.iter()) {
                *c = rng.gen_range(*lo..*hi);
            }
            let p = Point::new(self.chart.id, coords);
            if self.v_norm_sq(&p).sqrt() < 1e-3 {
                continue;
            }
            if let Some(filter) = &self.sample_filter {
                if !filter(&p) {
                    continue;
                }
            }
            out.push(p);
        }
        out
    }
}

/// Orientation sign from the defining requirement that
/// `(1/2) omega ^ omega` is the positive volume form.
pub fn orientation_from_omega(
    metric: &MatrixField,
    complex_structure: &MatrixField,
    basepoint: &Point,
) -> Result<f64> {
    let g = metric.value(basepoint);
    let j = complex_structure.value(basepoint);
    let mut m = [[0.0; 4]; 4];
    for i in 0..4 {
        for jj in 0..4 {
            let mut acc = 0.0;
            for k in 0..4 {
                acc += j[k][i] * g[k][jj];
            }
            m[i][jj] = acc;
        }
    }
    let omega = FormValue::two_form_from_matrix(&m);
    let top = omega.wedge(&omega)?;
    let c = 0.5 * top.comp(&[0, 1, 2, 3]);
    let (_, det) = crate::linalg::inv_spd(&g)?;
    let expected = det.sqrt();
    // c must equal +/- sqrt(det g); anything else means J is not
    // compatible with g.
    let ratio = c / expected;
    if (ratio.abs() - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidParameter(format!(
            "omega^2 / volume ratio is {ratio}, complex structure is not compatible"
        )));
    }
    Ok(ratio.signum())
}
