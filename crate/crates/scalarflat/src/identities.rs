//! The verification suite: evolution laws of reduced integrals along the
//! momentum, the global Toda equation, the Chern-Gauss-Bonnet
//! transgression forms, the Toda-ansatz equations, and the basic
//! integral inequalities.

use std::sync::Arc;

use crate::chart::Point;
use crate::curvature::{curvature_at, CurvatureData, DiffMode};
use crate::error::{Error, Result};
use crate::families::{AnsatzFields, GeometryBundle};
use crate::forms::{exterior_derivative, fd_gradient, FormField, FormValue};
use crate::killing::{dv_flat, dvol2, dvol3, j_on_one_form, lap_z, lie_derivative, v_flat, zdir};
use crate::reduction::{
    bundle_degree, euler_characteristic, gauss_curvature, integrate_reduced, vol2, DEFAULT_ORDER,
    DEFAULT_QUAD_TOL,
};

/// What kind of statement a check verifies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    PointwiseForm,
    IntegralEvolution,
    Inequality,
}

/// Outcome of one verification.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub kind: CheckKind,
    /// The relation being tested, written out.
    pub statement: String,
    /// Where it was tested (a momentum value or a sample point).
    pub location: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl IdentityCheck {
    fn new(
        name: &str,
        kind: CheckKind,
        statement: String,
        location: String,
        lhs: f64,
        rhs: f64,
        residual: f64,
        tolerance: f64,
    ) -> Self {
        IdentityCheck {
            name: name.to_string(),
            kind,
            statement,
            location,
            lhs,
            rhs,
            residual,
            tolerance,
            passed: residual <= tolerance,
        }
    }
}

/// Scale-free comparison: `|lhs - rhs|` relative to the larger side,
/// floored at 1e-12 so that exact zero relations pass trivially.
pub fn relative_residual(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1e-12)
}

/// Default tolerance for comparisons against closed forms.
pub const TOL_CLOSED_FORM: f64 = 1e-6;
/// Default tolerance for Richardson-differentiated evolution checks.
pub const TOL_EVOLUTION: f64 = 1e-4;
/// Default tolerance for pointwise form identities.
pub const TOL_POINTWISE: f64 = 1e-5;

/// Richardson-extrapolated central differences of functions of the
/// momentum (typically reduced-surface quadratures).
#[derive(Clone, Copy, Debug)]
pub struct ZDerivativeEstimator {
    pub base_step: f64,
    pub levels: usize,
}

impl ZDerivativeEstimator {
    pub fn new(base_step: f64, levels: usize) -> Result<Self> {
        if levels < 2 {
            return Err(Error::InvalidConfig(format!(
                "Richardson extrapolation needs at least 2 levels (got {levels})"
            )));
        }
        Ok(ZDerivativeEstimator { base_step, levels })
    }

    /// Step suited to a family's regular window.
    pub fn for_window(window: (f64, f64)) -> Self {
        ZDerivativeEstimator {
            base_step: 0.01 * (window.1 - window.0).abs().max(0.1),
            levels: 2,
        }
    }

    fn richardson(estimates: &[f64]) -> f64 {
        // Central differences have even-power error expansions, so each
        // halving of the step gains a factor of 4 per elimination.
        let mut table = estimates.to_vec();
        let mut factor = 4.0;
        for round in 1..table.len() {
            for i in (round..table.len()).rev() {
                table[i] = (factor * table[i] - table[i - 1]) / (factor - 1.0);
            }
            factor *= 4.0;
        }
        *table.last().unwrap()
    }

    /// `d/dz f` at `z`.
    pub fn first(&self, f: &dyn Fn(f64) -> Result<f64>, z: f64) -> Result<f64> {
        let mut estimates = Vec::with_capacity(self.levels);
        let mut h = self.base_step;
        for _ in 0..self.levels {
            estimates.push((f(z + h)? - f(z - h)?) / (2.0 * h));
            h *= 0.5;
        }
        Ok(Self::richardson(&estimates))
    }

    /// `d^2/dz^2 f` at `z`.
    pub fn second(&self, f: &dyn Fn(f64) -> Result<f64>, z: f64) -> Result<f64> {
        let center = f(z)?;
        let mut estimates = Vec::with_capacity(self.levels);
        let mut h = self.base_step;
        for _ in 0..self.levels {
            estimates.push((f(z + h)? - 2.0 * center + f(z - h)?) / (h * h));
            h *= 0.5;
        }
        Ok(Self::richardson(&estimates))
    }
}

fn grid_statement(z: f64) -> String {
    let text = format!("{z:.6}");
    let text = text.trim_end_matches('0').trim_end_matches('.');
    format!("z = {text}")
}

/// `d/dz Vol2 = 2 pi e^g`: the reduced area grows linearly with slope
/// given by the degree of the quotient circle bundle.
pub fn check_area_growth(bundle: &GeometryBundle, z: f64) -> Result<IdentityCheck> {
    let est = ZDerivativeEstimator::for_window(bundle.z_window);
    let dvol = est.first(&|t| vol2(bundle, t, DEFAULT_ORDER), z)?;
    let degree = bundle_degree(bundle, z, DEFAULT_ORDER)?;
    let rhs = 2.0 * std::f64::consts::PI * degree;
    // Degree-zero bundles have a constant area: measure the noise in the
    // derivative against the area itself rather than against zero.
    let scale = dvol
        .abs()
        .max(rhs.abs())
        .max(1e-3 * vol2(bundle, z, DEFAULT_ORDER)?)
        .max(1e-12);
    let residual = (dvol - rhs).abs() / scale;
    let mut statement = "d/dz Vol2(M2_z) = 2 pi e^g".to_string();
    // A variant with 4 pi appears in some accounts of the Ricci-flat
    // case; flag when that normalisation would have balanced instead.
    if residual > TOL_EVOLUTION && relative_residual(dvol, 2.0 * rhs) <= TOL_EVOLUTION {
        statement.push_str(" [note: the 4 pi variant would balance here]");
    }
    Ok(IdentityCheck::new(
        "area_growth",
        CheckKind::IntegralEvolution,
        statement,
        grid_statement(z),
        dvol,
        rhs,
        residual,
        TOL_EVOLUTION,
    ))
}

/// `d^2/dz^2 int |V|^2 = d/dz int lap z = 4 pi chi^g`: both momentum
/// derivatives recover the Euler characteristic of the reduction.
pub fn check_chi_evolution(bundle: &GeometryBundle, z: f64) -> Result<IdentityCheck> {
    let est = ZDerivativeEstimator::for_window(bundle.z_window);
    let d2_vsq = est.second(
        &|t| {
            integrate_reduced(
                bundle,
                t,
                &|p, _| Ok(bundle.v_norm_sq(p)),
                DEFAULT_ORDER,
                DEFAULT_QUAD_TOL,
            )
        },
        z,
    )?;
    let d_lap = est.first(
        &|t| {
            integrate_reduced(
                bundle,
                t,
                &|p, _| lap_z(bundle, p),
                DEFAULT_ORDER,
                DEFAULT_QUAD_TOL,
            )
        },
        z,
    )?;
    let chi = euler_characteristic(bundle, z, DEFAULT_ORDER)?;
    let rhs = 4.0 * std::f64::consts::PI * chi;
    let residual = relative_residual(d2_vsq, rhs).max(relative_residual(d_lap, rhs));
    Ok(IdentityCheck::new(
        "chi_evolution",
        CheckKind::IntegralEvolution,
        "d^2/dz^2 int |V|^2 dVol2 = d/dz int lap z dVol2 = 4 pi chi^g".to_string(),
        grid_statement(z),
        d_lap,
        rhs,
        residual,
        TOL_EVOLUTION,
    ))
}

/// `d^2/dz^2 int (lap z)^2 dVol2 = 2 int |Ric|^2 dVol2`: the
/// Chern-Gauss-Bonnet evolution law for scalar-flat metrics.
pub fn check_cgb_evolution(bundle: &GeometryBundle, z: f64) -> Result<IdentityCheck> {
    let est = ZDerivativeEstimator::for_window(bundle.z_window);
    let lhs = est.second(
        &|t| {
            integrate_reduced(
                bundle,
                t,
                &|p, _| Ok(lap_z(bundle, p)?.powi(2)),
                DEFAULT_ORDER,
                DEFAULT_QUAD_TOL,
            )
        },
        z,
    )?;
    let ric_int = integrate_reduced(
        bundle,
        z,
        &|p, _| {
            let data = curvature_at(
                &bundle.metric,
                p,
                &bundle.chart,
                bundle.orientation,
                DiffMode::Analytic,
            )?;
            Ok(data.ricci_norm_sq)
        },
        DEFAULT_ORDER,
        DEFAULT_QUAD_TOL,
    )?;
    let rhs = 2.0 * ric_int;
    // The second derivative of a quadrature carries noise at absolute
    // scale ~1e-6, so compare relative to the area scale as well.
    let scale = vol2(bundle, z, DEFAULT_ORDER)?
        .max(lhs.abs())
        .max(rhs.abs())
        .max(1e-12);
    let residual = (lhs - rhs).abs() / scale;
    Ok(IdentityCheck::new(
        "cgb_evolution",
        CheckKind::IntegralEvolution,
        "d^2/dz^2 int (lap z)^2 dVol2 = 2 int |Ric|^2 dVol2".to_string(),
        grid_statement(z),
        lhs,
        rhs,
        residual,
        TOL_EVOLUTION,
    ))
}

fn point_statement(p: &Point) -> String {
    let [a, b, c, d] = p.coords;
    format!("point ({a:.4}, {b:.4}, {c:.4}, {d:.4})")
}

fn curvature(bundle: &GeometryBundle, p: &Point) -> Result<CurvatureData> {
    curvature_at(
        &bundle.metric,
        p,
        &bundle.chart,
        bundle.orientation,
        DiffMode::Analytic,
    )
}

/// Analytic gradient of `|V|^2` from the metric and field jets.
fn grad_v_sq(bundle: &GeometryBundle, p: &Point) -> [f64; 4] {
    let gj = bundle.metric.jet(p);
    let vj = bundle.killing.jet(p);
    let mut out = [0.0; 4];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                acc += gj.d1[k][i][j] * vj.value[i] * vj.value[j]
                    + 2.0 * gj.value[i][j] * vj.partial[k][i] * vj.value[j];
            }
        }
        *slot = acc;
    }
    out
}

/// `eta = V^flat / |V|` and its exterior derivative, both analytic.
fn eta_and_deta(bundle: &GeometryBundle, p: &Point) -> Result<(FormValue, FormValue)> {
    let vf = v_flat(bundle, p);
    let vsq = bundle.v_norm_sq(p);
    let vnorm = vsq.sqrt();
    let eta = &vf * vnorm.recip();
    // d(|V|^{-1}) = -1/2 |V|^{-3} d(|V|^2)
    let gvsq = grad_v_sq(bundle, p);
    let scale = -0.5 / (vsq * vnorm);
    let dfinv = FormValue::one_form([
        scale * gvsq[0],
        scale * gvsq[1],
        scale * gvsq[2],
        scale * gvsq[3],
    ]);
    let deta = &dfinv.wedge(&vf)? + &(&dv_flat(bundle, p) * vnorm.recip());
    Ok((eta, deta))
}

/// The Ricci form `rho = Ric(J., .)` as a two-form.
fn ricci_form(data: &CurvatureData, j: &[[f64; 4]; 4]) -> FormValue {
    let mut m = [[0.0; 4]; 4];
    for i in 0..4 {
        for l in 0..4 {
            let mut acc = 0.0;
            for a in 0..4 {
                acc += j[a][i] * data.ricci[a][l];
            }
            m[i][l] = acc;
        }
    }
    FormValue::two_form_from_matrix(&m)
}

/// The three equivalent assemblies of the Ricci transgression three-form
/// `TP`, with `L = lap z / |V|` and `eta = V^flat / |V|`:
///
/// 1. `2 L eta ^ rho + (1/2) L^2 eta ^ d eta`
/// 2. `(1/2) * d(L^2) + L (s + (1/2) L^2) dVol3`
/// 3. `(1/2) Lie_{d/dz}((lap z)^2 |V|^{-1} dVol3)
///     - (1/2) (*dVol2) ^ J d(L^2) + s L dVol3`
///
/// Everywhere `lap z` means `*(dV^flat ^ omega)`, which also covers
/// fields that are not globally Hamiltonian.
pub struct TransgressionSteps {
    pub step1: FormValue,
    pub step2: FormValue,
    pub step3: FormValue,
}

fn l_squared_field(bundle: &Arc<GeometryBundle>) -> impl Fn(&Point) -> f64 {
    let b = Arc::clone(bundle);
    move |q: &Point| match lap_z(&b, q) {
        Ok(lap) => lap * lap / b.v_norm_sq(q),
        Err(_) => f64::NAN,
    }
}

pub fn transgression_steps(
    bundle: &Arc<GeometryBundle>,
    p: &Point,
    fd_step: f64,
) -> Result<TransgressionSteps> {
    bundle.require_regular(p)?;
    let g = bundle.g(p);
    let j = bundle.j_matrix(p);
    let vsq = bundle.v_norm_sq(p);
    let vnorm = vsq.sqrt();
    let lap = lap_z(bundle, p)?;
    let l = lap / vnorm;
    let data = curvature(bundle, p)?;
    let s = data.scalar;
    let d3 = dvol3(bundle, p)?;

    let (eta, deta) = eta_and_deta(bundle, p)?;
    let rho = ricci_form(&data, &j);
    let step1 = &(&eta.wedge(&rho)? * (2.0 * l)) + &(&eta.wedge(&deta)? * (0.5 * l * l));

    let dl_sq = {
        let f = l_squared_field(bundle);
        FormValue::one_form(fd_gradient(&f, p, &bundle.chart, fd_step)?)
    };
    let star_dl_sq = dl_sq.hodge(&g, bundle.orientation)?;
    let step2 = &(&star_dl_sq * 0.5) + &(&d3 * (l * (s + 0.5 * l * l)));

    // Lie derivative along d/dz of the 3-form (lap z)^2 |V|^{-1} dVol3.
    let lie = {
        let b = Arc::clone(bundle);
        let field = FormField::new(3, move |q: &Point| match (lap_z(&b, q), dvol3(&b, q)) {
            (Ok(lq), Ok(d3q)) => &d3q * (lq * lq / b.v_norm_sq(q).sqrt()),
            _ => FormValue::zero(3),
        });
        let b = Arc::clone(bundle);
        let zfield: Arc<dyn Fn(&Point) -> Result<[f64; 4]> + Send + Sync> =
            Arc::new(move |q: &Point| zdir(&b, q));
        lie_derivative(&field, zfield, p, &bundle.chart, fd_step)?
    };
    let star_d2 = dvol2(bundle, p)?.hodge(&g, bundle.orientation)?;
    let j_dl_sq = j_on_one_form(&dl_sq, &j);
    let step3 = &(&(&lie * 0.5) - &(&star_d2.wedge(&j_dl_sq)? * 0.5)) + &(&d3 * (s * l));

    Ok(TransgressionSteps {
        step1,
        step2,
        step3,
    })
}

/// Pairwise agreement of the three transgression assemblies.
pub fn check_transgression_steps(bundle: &Arc<GeometryBundle>, p: &Point) -> Result<IdentityCheck> {
    let steps = transgression_steps(bundle, p, 1e-3)?;
    let g = bundle.g(p);
    let norm = |f: &FormValue| -> Result<f64> { Ok(f.norm_sq(&g)?.max(0.0).sqrt()) };
    let n1 = norm(&steps.step1)?;
    let n2 = norm(&steps.step2)?;
    let n3 = norm(&steps.step3)?;
    let scale = n1.max(n2).max(n3).max(1e-12);
    let r12 = norm(&(&steps.step1 - &steps.step2))? / scale;
    let r13 = norm(&(&steps.step1 - &steps.step3))? / scale;
    let r23 = norm(&(&steps.step2 - &steps.step3))? / scale;
    let residual = r12.max(r13).max(r23);
    Ok(IdentityCheck::new(
        "transgression_steps",
        CheckKind::PointwiseForm,
        "the three assemblies of the Ricci transgression 3-form agree".to_string(),
        point_statement(p),
        n1,
        n3,
        residual,
        TOL_POINTWISE,
    ))
}

/// `d TP = (|Ric|^2 - (1/2) s^2) dVol4`: the exterior derivative of the
/// transgression recovers the Ricci curvature density. The transgression
/// is assembled in its Lie-derivative form and differentiated with an
/// outer numerical step one order coarser than the inner one.
pub fn check_p_ric(bundle: &Arc<GeometryBundle>, p: &Point) -> Result<IdentityCheck> {
    let inner_step = 1e-3;
    let outer_step = 1e-2;
    let field = {
        let b = Arc::clone(bundle);
        FormField::new(3, move |q: &Point| {
            transgression_steps(&b, q, inner_step)
                .map(|s| s.step3)
                .unwrap_or(FormValue::zero(3))
        })
    };
    let d_tp = exterior_derivative(&field, p, &bundle.chart, outer_step)?;
    let data = curvature(bundle, p)?;
    let density = data.ricci_norm_sq - 0.5 * data.scalar * data.scalar;
    let rhs_form = &bundle.dvol4(p)? * density;
    let g = bundle.g(p);
    let lhs_norm = d_tp.norm_sq(&g)?.max(0.0).sqrt();
    let rhs_norm = rhs_form.norm_sq(&g)?.max(0.0).sqrt();
    // When both sides vanish (Ricci-flat or flat members) the natural
    // yardstick for the FD noise in d(TP) is the size of TP itself.
    let tp_norm = transgression_steps(bundle, p, inner_step)?
        .step1
        .norm_sq(&g)?
        .max(0.0)
        .sqrt();
    let scale = lhs_norm.max(rhs_norm).max(tp_norm).max(1e-12);
    let residual = (&d_tp - &rhs_form).norm_sq(&g)?.max(0.0).sqrt() / scale;
    Ok(IdentityCheck::new(
        "p_ric",
        CheckKind::PointwiseForm,
        "d(transgression 3-form) = (|Ric|^2 - s^2/2) dVol4".to_string(),
        point_statement(p),
        lhs_norm * lhs_norm,
        density,
        residual,
        TOL_EVOLUTION,
    ))
}

/// Global Toda equation
/// `2 K dVol4 = d[ -(*dVol2) ^ J d log|V|^2 + (lap z / |V|) dVol3 ]`,
/// with `K` the Gauss curvature of the reduction pulled back to the
/// four-manifold.
pub fn check_toda_global(bundle: &Arc<GeometryBundle>, p: &Point) -> Result<IdentityCheck> {
    bundle.require_regular(p)?;
    let reduction = bundle.reduction()?;
    let chart = bundle.reduction_chart(bundle.z(p))?;
    let s = (reduction.params_of)(p);
    let k = gauss_curvature(bundle, &chart, s, 1e-3)?;
    let lhs = &bundle.dvol4(p)? * (2.0 * k);

    let field = {
        let b = Arc::clone(bundle);
        FormField::new(3, move |q: &Point| {
            let assemble = || -> Result<FormValue> {
                let g = b.g(q);
                let jm = b.j_matrix(q);
                let gvsq = grad_v_sq(&b, q);
                let vsq = b.v_norm_sq(q);
                let dlog = FormValue::one_form([
                    gvsq[0] / vsq,
                    gvsq[1] / vsq,
                    gvsq[2] / vsq,
                    gvsq[3] / vsq,
                ]);
                let jdlog = j_on_one_form(&dlog, &jm);
                let star_d2 = dvol2(&b, q)?.hodge(&g, b.orientation)?;
                let first = &star_d2.wedge(&jdlog)? * -1.0;
                let second = &dvol3(&b, q)? * (lap_z(&b, q)? / vsq.sqrt());
                Ok(&first + &second)
            };
            assemble().unwrap_or(FormValue::zero(3))
        })
    };
    let rhs = exterior_derivative(&field, p, &bundle.chart, 1e-3)?;
    let g = bundle.g(p);
    let lhs_norm = lhs.norm_sq(&g)?.max(0.0).sqrt();
    let rhs_norm = rhs.norm_sq(&g)?.max(0.0).sqrt();
    let scale = lhs_norm.max(rhs_norm).max(1e-6);
    let residual = (&lhs - &rhs).norm_sq(&g)?.max(0.0).sqrt() / scale;
    Ok(IdentityCheck::new(
        "toda_global",
        CheckKind::PointwiseForm,
        "2 K dVol4 = d[ -(*dVol2) ^ J d log|V|^2 + (lap z / |V|) dVol3 ]".to_string(),
        point_statement(p),
        2.0 * k,
        rhs_norm,
        residual,
        TOL_POINTWISE,
    ))
}

/// Residuals of the Toda-ansatz system for explicit `(u, w, alpha)` data
/// on an `(x, y, z, t)` chart: the `u`-equation, the linearised
/// `w`-equation, and the monopole equation for `alpha`.
pub fn ansatz_equation_residuals(fields: &AnsatzFields, p: &Point) -> (f64, f64, f64) {
    let uj = fields.u.jet(p);
    let wj = fields.w.jet(p);
    let eu = uj.value.exp();
    // (e^u)_zz = e^u (u_zz + u_z^2)
    let u_eq = uj.hess[0][0] + uj.hess[1][1] + eu * (uj.hess[2][2] + uj.grad[2] * uj.grad[2]);
    // (e^u w)_zz = e^u (w_zz + 2 u_z w_z + w (u_zz + u_z^2))
    let w_eq = wj.hess[0][0]
        + wj.hess[1][1]
        + eu * (wj.hess[2][2]
            + 2.0 * uj.grad[2] * wj.grad[2]
            + wj.value * (uj.hess[2][2] + uj.grad[2] * uj.grad[2]));
    // d alpha = w_x dy^dz + w_y dz^dx + (e^u w)_z dx^dy
    let a1 = fields.alpha[0].jet(p);
    let a2 = fields.alpha[1].jet(p);
    let a3 = fields.alpha[2].jet(p);
    let euw_z = eu * (wj.grad[2] + wj.value * uj.grad[2]);
    let m_xy = (a2.grad[0] - a1.grad[1]) - euw_z;
    let m_yz = (a3.grad[1] - a2.grad[2]) - wj.grad[0];
    let m_zx = (a1.grad[2] - a3.grad[0]) - wj.grad[1];
    let monopole = m_xy.abs().max(m_yz.abs()).max(m_zx.abs());
    (u_eq, w_eq, monopole)
}

/// Check the Toda-ansatz system on explicit data at a set of points.
pub fn check_ansatz_equations(fields: &AnsatzFields, points: &[Point]) -> IdentityCheck {
    let mut worst: f64 = 0.0;
    for p in points {
        let (u_eq, w_eq, monopole) = ansatz_equation_residuals(fields, p);
        worst = worst.max(u_eq.abs()).max(w_eq.abs()).max(monopole);
    }
    IdentityCheck::new(
        "ansatz_equations",
        CheckKind::PointwiseForm,
        "u_xx + u_yy + (e^u)_zz = 0, w_xx + w_yy + (e^u w)_zz = 0, d alpha = monopole form"
            .to_string(),
        format!("{} sample points", points.len()),
        worst,
        0.0,
        worst,
        TOL_CLOSED_FORM,
    )
}

/// Global form of the second ansatz equation: `d^2/dz^2 Vol2 = 0` at
/// regular momentum values.
pub fn check_area_linearity(bundle: &GeometryBundle, z: f64) -> Result<IdentityCheck> {
    let est = ZDerivativeEstimator::for_window(bundle.z_window);
    let d2 = est.second(&|t| vol2(bundle, t, DEFAULT_ORDER), z)?;
    let scale = vol2(bundle, z, DEFAULT_ORDER)?.max(1.0);
    let residual = d2.abs() / scale;
    Ok(IdentityCheck::new(
        "area_linearity",
        CheckKind::IntegralEvolution,
        "d^2/dz^2 Vol2(M2_z) = 0".to_string(),
        grid_statement(z),
        d2,
        0.0,
        residual,
        TOL_CLOSED_FORM.max(1e-6),
    ))
}

/// Consistency relation for Ricci-flat members: when `lap z` is constant
/// on the level set, `e^g . lap z = 2 chi^g`.
pub fn check_ricci_flat_relation(bundle: &GeometryBundle, z: f64) -> Result<IdentityCheck> {
    let chart = bundle.reduction_chart(z)?;
    let s_mid = [
        0.5 * (chart.domain[0][0] + chart.domain[0][1]),
        0.5 * (chart.domain[1][0] + chart.domain[1][1]),
    ];
    let p = Point::new(bundle.chart.id, chart.embed.value(s_mid));
    let lap = lap_z(bundle, &p)?;
    let degree = bundle_degree(bundle, z, DEFAULT_ORDER)?;
    let chi = euler_characteristic(bundle, z, DEFAULT_ORDER)?;
    let lhs = degree * lap;
    let rhs = 2.0 * chi;
    let residual = relative_residual(lhs, rhs);
    Ok(IdentityCheck::new(
        "ricci_flat_relation",
        CheckKind::IntegralEvolution,
        "e^g . lap z = 2 chi^g (constant lap z)".to_string(),
        grid_statement(z),
        lhs,
        rhs,
        residual,
        TOL_CLOSED_FORM,
    ))
}

/// Outcome of the integral-inequality scan at one momentum value.
pub struct InequalityScan {
    pub holder: IdentityCheck,
    /// Whether the Hoelder inequality is an equality to high precision,
    /// which happens exactly when `lap z` is constant on the level set.
    pub holder_equality: bool,
    pub sign_constraints: IdentityCheck,
}

/// Hoelder inequality `(int lap z)^2 <= Vol2 . int (lap z)^2` plus the
/// sign constraints `chi^g >= 0` and the end-adapted sign of `e^g`.
pub fn scan_basic_inequalities(bundle: &GeometryBundle, z: f64) -> Result<InequalityScan> {
    let a = integrate_reduced(
        bundle,
        z,
        &|p, _| lap_z(bundle, p),
        DEFAULT_ORDER,
        DEFAULT_QUAD_TOL,
    )?;
    let b = vol2(bundle, z, DEFAULT_ORDER)?;
    let c = integrate_reduced(
        bundle,
        z,
        &|p, _| Ok(lap_z(bundle, p)?.powi(2)),
        DEFAULT_ORDER,
        DEFAULT_QUAD_TOL,
    )?;
    let lhs = a * a;
    let rhs = b * c;
    let scale = lhs.abs().max(rhs.abs()).max(1e-12);
    // Violation amount, zero when the inequality holds.
    let violation = ((lhs - rhs) / scale).max(0.0);
    let holder = IdentityCheck::new(
        "holder",
        CheckKind::Inequality,
        "(int lap z dVol2)^2 <= Vol2 . int (lap z)^2 dVol2".to_string(),
        grid_statement(z),
        lhs,
        rhs,
        violation,
        TOL_CLOSED_FORM,
    );
    let holder_equality = (rhs - lhs).abs() / scale <= 1e-8;

    let chi = euler_characteristic(bundle, z, DEFAULT_ORDER)?;
    let degree = bundle_degree(bundle, z, DEFAULT_ORDER)?;
    // chi^g >= 0 always; e^g <= 0 on the z < 0 end, e^g >= 0 on z > 0.
    let chi_violation = (-chi).max(0.0);
    let degree_violation = if z < 0.0 {
        degree.max(0.0)
    } else {
        (-degree).max(0.0)
    };
    let violation = chi_violation.max(degree_violation);
    let sign_constraints = IdentityCheck::new(
        "euler_number_signs",
        CheckKind::Inequality,
        "chi^g >= 0, and e^g has the sign of the end".to_string(),
        grid_statement(z),
        chi,
        degree,
        violation,
        TOL_EVOLUTION,
    );
    Ok(InequalityScan {
        holder,
        holder_equality,
        sign_constraints,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{
        flat_c2, instanton_induced, lebrun_instanton, s2h2, FieldChoice, HyperbolicModel,
    };
    use std::f64::consts::PI;

    #[test]
    fn richardson_estimator_converges_on_smooth_data() {
        let est = ZDerivativeEstimator::new(0.05, 3).unwrap();
        let f = |z: f64| Ok(z.sin() * z.exp());
        let z = 0.7_f64;
        let exact_first = z.cos() * z.exp() + z.sin() * z.exp();
        assert!((est.first(&f, z).unwrap() - exact_first).abs() < 1e-10);
        let exact_second = 2.0 * z.cos() * z.exp();
        assert!((est.second(&f, z).unwrap() - exact_second).abs() < 1e-8);
        assert!(ZDerivativeEstimator::new(0.05, 1).is_err());
    }

    #[test]
    fn area_growth_on_the_instanton() {
        let b = lebrun_instanton(3, 1.0).unwrap();
        let check = check_area_growth(&b, -1.0).unwrap();
        assert!(check.passed, "{check:?}");
        assert!((check.lhs + 6.0 * PI).abs() < 1e-4);
    }

    #[test]
    fn chi_evolution_on_flat_space() {
        let b = flat_c2(1.0, 1.0).unwrap();
        let check = check_chi_evolution(&b, -1.2).unwrap();
        assert!(check.passed, "{check:?}");
        assert!((check.rhs - 8.0 * PI).abs() < 1e-6);
    }

    #[test]
    fn cgb_evolution_on_the_instanton() {
        let b = lebrun_instanton(3, 1.0).unwrap();
        let z = -1.0;
        let check = check_cgb_evolution(&b, z).unwrap();
        assert!(check.passed, "{check:?}");
        // Closed form: both sides 32 pi / C^3.
        let c = -2.0 * 3.0 * z + 1.0;
        assert!(
            (check.rhs - 32.0 * PI / c.powi(3)).abs() < 1e-7,
            "{check:?}"
        );
    }

    #[test]
    fn transgressions_agree_on_the_instanton() {
        let b = Arc::new(lebrun_instanton(3, 1.0).unwrap());
        let p = Point::new(b.chart.id, [-1.2, 0.7, 1.3, 2.1]);
        let check = check_transgression_steps(&b, &p).unwrap();
        assert!(check.passed, "{check:?}");
    }

    #[test]
    fn transgression_derivative_recovers_ricci_density() {
        let b = Arc::new(lebrun_instanton(3, 1.0).unwrap());
        let p = Point::new(b.chart.id, [-1.3, 0.6, 1.4, 2.0]);
        let check = check_p_ric(&b, &p).unwrap();
        assert!(check.passed, "{check:?}");
    }

    #[test]
    fn toda_global_on_two_families() {
        let b = Arc::new(lebrun_instanton(2, 0.9).unwrap());
        let p = Point::new(b.chart.id, [-1.0, 0.8, 1.2, 1.5]);
        let check = check_toda_global(&b, &p).unwrap();
        assert!(check.passed, "{check:?}");

        let b = Arc::new(s2h2(HyperbolicModel::Hyperbolic, FieldChoice::HyperbolicAngle).unwrap());
        let p = Point::new(b.chart.id, [0.3, 1.0, 0.4, 2.0]);
        let check = check_toda_global(&b, &p).unwrap();
        assert!(check.passed, "{check:?}");
    }

    #[test]
    fn ansatz_equations_hold_on_the_induced_instanton() {
        let (bundle, fields) = instanton_induced(2, 1.0).unwrap();
        let points = bundle.sample_points(20, 7);
        let check = check_ansatz_equations(&fields, &points);
        assert!(check.passed, "{check:?}");
    }

    #[test]
    fn eguchi_hanson_satisfies_the_ricci_flat_relation() {
        let b = lebrun_instanton(2, 1.0).unwrap();
        let check = check_ricci_flat_relation(&b, -0.9).unwrap();
        assert!(check.passed, "{check:?}");
        assert!((check.lhs - 4.0).abs() < 1e-6);
    }

    #[test]
    fn holder_equality_detected_exactly_when_lap_z_is_constant() {
        // Constant lap z on level sets: equality.
        let b = lebrun_instanton(3, 1.0).unwrap();
        let scan = scan_basic_inequalities(&b, -1.0).unwrap();
        assert!(scan.holder.passed);
        assert!(scan.holder_equality, "{:?}", scan.holder);
        assert!(scan.sign_constraints.passed);

        // Diagonal field: lap z varies across the level set, strict.
        let b = s2h2(HyperbolicModel::Hyperbolic, FieldChoice::Diagonal).unwrap();
        let scan = scan_basic_inequalities(&b, 0.5).unwrap();
        assert!(scan.holder.passed);
        assert!(!scan.holder_equality, "{:?}", scan.holder);
    }

    #[test]
    fn area_is_linear_in_the_momentum() {
        for bundle in [
            flat_c2(1.0, 1.0).unwrap(),
            lebrun_instanton(1, 1.0).unwrap(),
            s2h2(HyperbolicModel::Elliptic, FieldChoice::HyperbolicAngle).unwrap(),
        ] {
            let z = 0.5 * (bundle.z_window.0 + bundle.z_window.1);
            let check = check_area_linearity(&bundle, z).unwrap();
            assert!(check.passed, "{}: {check:?}", bundle.name);
        }
    }
}
