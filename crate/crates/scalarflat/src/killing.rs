//! Pointwise operations tying the Killing field, the momentum and the
//! Kahler structure together: musical duals, the momentum Laplacian, the
//! Hessian relations, self-dual projections, volume forms on level sets,
//! and the Chern-Simons density of the quotient circle bundle.

use std::sync::Arc;

use crate::chart::{Chart, Point};
use crate::curvature::{christoffel, curvature_at, DiffMode};
use crate::error::Result;
use crate::families::GeometryBundle;
use crate::forms::{exterior_derivative, fd_gradient, flat, FormField, FormValue, DEFAULT_FD_STEP};
use crate::linalg::{inv_spd, matvec, Mat4};

/// The metric dual `V^flat` of the Killing field.
pub fn v_flat(bundle: &GeometryBundle, p: &Point) -> FormValue {
    flat(&bundle.v(p), &bundle.g(p))
}

/// `d(V^flat)` from exact derivatives of the metric and field components:
/// `(dV^flat)_{ij} = d_i(g_{jk} V^k) - d_j(g_{ik} V^k)`.
pub fn dv_flat(bundle: &GeometryBundle, p: &Point) -> FormValue {
    let gj = bundle.metric.jet(p);
    let vj = bundle.killing.jet(p);
    // partial[i][j] = d_i (V^flat)_j
    let mut partial = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = 0.0;
            for k in 0..4 {
                acc += gj.d1[i][j][k] * vj.value[k] + gj.value[j][k] * vj.partial[i][k];
            }
            partial[i][j] = acc;
        }
    }
    let mut out = FormValue::zero(2);
    for i in 0..4 {
        for j in (i + 1)..4 {
            out.set_antisym(&[i, j], partial[i][j] - partial[j][i]);
        }
    }
    out
}

/// Gradient vector of the momentum.
pub fn grad_z(bundle: &GeometryBundle, p: &Point) -> Result<[f64; 4]> {
    let (ginv, _) = inv_spd(&bundle.g(p))?;
    Ok(matvec(&ginv, &bundle.momentum.jet(p).grad))
}

/// The four-dimensional Laplacian of the momentum, computed as
/// `*(dV^flat ^ omega)`.
pub fn lap_z(bundle: &GeometryBundle, p: &Point) -> Result<f64> {
    let top = dv_flat(bundle, p).wedge(&bundle.omega(p))?;
    let star = top.hodge(&bundle.g(p), bundle.orientation)?;
    Ok(star.comp(&[]))
}

/// The same Laplacian as the metric trace of the covariant Hessian,
/// serving as an independent cross-check of [`lap_z`].
pub fn lap_z_hessian(bundle: &GeometryBundle, p: &Point, mode: DiffMode) -> Result<f64> {
    let hess = hess_z(bundle, p, mode)?;
    let (ginv, _) = inv_spd(&bundle.g(p))?;
    let mut acc = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            acc += ginv[i][j] * hess[i][j];
        }
    }
    Ok(acc)
}

/// Covariant Hessian of the momentum,
/// `(Hess z)_{ij} = d_i d_j z - Gamma^k_{ij} d_k z`.
pub fn hess_z(bundle: &GeometryBundle, p: &Point, mode: DiffMode) -> Result<Mat4> {
    let zj = bundle.momentum.jet(p);
    let gamma = christoffel(&bundle.metric, p, &bundle.chart, mode)?;
    let mut hess = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = zj.hess[i][j];
            for k in 0..4 {
                acc -= gamma[k][i][j] * zj.grad[k];
            }
            hess[i][j] = acc;
        }
    }
    Ok(hess)
}

/// Self-dual part of a two-form, `(beta + *beta)/2`.
pub fn self_dual_part(beta: &FormValue, g: &Mat4, orientation: f64) -> Result<FormValue> {
    let star = beta.hodge(g, orientation)?;
    Ok(&(beta + &star) * 0.5)
}

/// Residuals of the pointwise relations between the Killing field, the
/// momentum and the complex structure. Each entry is the maximum absolute
/// component of the corresponding defect, so zero means the relation
/// holds exactly.
#[derive(Clone, Copy, Debug, Default)]
pub struct PointwiseResiduals {
    /// `J^2 + 1` and `g(J., J.) - g`.
    pub compatibility: f64,
    /// `d omega` (numerical exterior derivative).
    pub omega_closed: f64,
    /// Killing equation `nabla_i V_j + nabla_j V_i`.
    pub killing: f64,
    /// Momentum equation `dz + i_V omega`.
    pub momentum: f64,
    /// `grad z + J V`.
    pub grad_z_vs_jv: f64,
    /// `|grad z|^2 - |V|^2`.
    pub grad_norm: f64,
    /// `J`-invariance of the momentum Hessian.
    pub hess_invariance: f64,
    /// `(Hess z)(J., .) - (1/2) dV^flat`.
    pub hess_vs_dv: f64,
    /// `(dV^flat)^+ - (1/2)(lap z) omega`.
    pub dv_self_dual: f64,
    /// Contraction route vs Hessian-trace route for `lap z`.
    pub lap_z_cross: f64,
    /// `J (V^flat) + (JV)^flat` (action of `J` on one-forms).
    pub one_form_dual: f64,
}

impl PointwiseResiduals {
    pub fn max(&self) -> f64 {
        [
            self.compatibility,
            self.omega_closed,
            self.killing,
            self.momentum,
            self.grad_z_vs_jv,
            self.grad_norm,
            self.hess_invariance,
            self.hess_vs_dv,
            self.dv_self_dual,
            self.lap_z_cross,
            self.one_form_dual,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// `J` acting on a one-form: `(J eta)_i = eta_a J^a_i`.
pub fn j_on_one_form(eta: &FormValue, j: &Mat4) -> FormValue {
    let mut comps = [0.0; 4];
    for (i, c) in comps.iter_mut().enumerate() {
        for a in 0..4 {
            *c += eta.comp(&[a]) * j[a][i];
        }
    }
    FormValue::one_form(comps)
}

/// Evaluate all pointwise relations at `p`.
pub fn pointwise_residuals(bundle: &GeometryBundle, p: &Point) -> Result<PointwiseResiduals> {
    bundle.require_regular(p)?;
    let g = bundle.g(p);
    let j = bundle.j_matrix(p);
    let omega = bundle.omega(p);
    let v = bundle.v(p);
    let zj = bundle.momentum.jet(p);

    let mut res = PointwiseResiduals::default();

    for i in 0..4 {
        for l in 0..4 {
            let mut jsq = 0.0;
            let mut pullback = 0.0;
            for a in 0..4 {
                jsq += j[i][a] * j[a][l];
                for b in 0..4 {
                    pullback += j[a][i] * g[a][b] * j[b][l];
                }
            }
            let target = if i == l { -1.0 } else { 0.0 };
            res.compatibility = res
                .compatibility
                .max((jsq - target).abs())
                .max((pullback - g[i][l]).abs());
        }
    }

    let chart = bundle.chart.clone();
    res.omega_closed = {
        let omega_field = {
            let metric = bundle.metric.clone();
            let cx = bundle.complex_structure.clone();
            FormField::new(2, move |q: &Point| {
                let g = metric.value(q);
                let jm = cx.value(q);
                let mut m = [[0.0; 4]; 4];
                for i in 0..4 {
                    for l in 0..4 {
                        let mut acc = 0.0;
                        for k in 0..4 {
                            acc += jm[k][i] * g[k][l];
                        }
                        m[i][l] = acc;
                    }
                }
                FormValue::two_form_from_matrix(&m)
            })
        };
        exterior_derivative(&omega_field, p, &chart, DEFAULT_FD_STEP)?.max_abs()
    };

    // Killing equation from exact first derivatives.
    let gamma = christoffel(&bundle.metric, p, &bundle.chart, DiffMode::Analytic)?;
    let vf = v_flat(bundle, p);
    let gj = bundle.metric.jet(p);
    let vj = bundle.killing.jet(p);
    for i in 0..4 {
        for l in 0..4 {
            // nabla_i V_l = d_i V_l - Gamma^k_{il} V_k with V_l = (V^flat)_l.
            let di = |i: usize, l: usize| {
                let mut acc = 0.0;
                for k in 0..4 {
                    acc += gj.d1[i][l][k] * vj.value[k] + g[l][k] * vj.partial[i][k];
                }
                for k in 0..4 {
                    acc -= gamma[k][i][l] * vf.comp(&[k]);
                }
                acc
            };
            res.killing = res.killing.max((di(i, l) + di(l, i)).abs());
        }
    }

    let ivo = omega.interior(&v)?;
    for i in 0..4 {
        res.momentum = res.momentum.max((zj.grad[i] + ivo.comp(&[i])).abs());
    }

    let gz = grad_z(bundle, p)?;
    let jv = matvec(&j, &v);
    for i in 0..4 {
        res.grad_z_vs_jv = res.grad_z_vs_jv.max((gz[i] + jv[i]).abs());
    }
    let gz_form = flat(&gz, &g);
    let mut gz_norm = 0.0;
    for i in 0..4 {
        gz_norm += gz_form.comp(&[i]) * gz[i];
    }
    res.grad_norm = (gz_norm - bundle.v_norm_sq(p)).abs();

    let hess = hess_z(bundle, p, DiffMode::Analytic)?;
    let dv = dv_flat(bundle, p);
    for i in 0..4 {
        for l in 0..4 {
            let mut jj = 0.0;
            let mut hj = 0.0;
            for a in 0..4 {
                hj += j[a][i] * hess[a][l];
                for b in 0..4 {
                    jj += j[a][i] * j[b][l] * hess[a][b];
                }
            }
            res.hess_invariance = res.hess_invariance.max((jj - hess[i][l]).abs());
            let dv_il = if i == l { 0.0 } else { dv.comp(&[i, l]) };
            res.hess_vs_dv = res.hess_vs_dv.max((hj - 0.5 * dv_il).abs());
        }
    }

    let lap = lap_z(bundle, p)?;
    let plus = self_dual_part(&dv, &g, bundle.orientation)?;
    let defect = &plus - &(&omega * (0.5 * lap));
    res.dv_self_dual = defect.max_abs();
    res.lap_z_cross = (lap - lap_z_hessian(bundle, p, DiffMode::Analytic)?).abs();

    let jvf = j_on_one_form(&vf, &j);
    let jv_flat = flat(&jv, &g);
    res.one_form_dual = (&jvf + &jv_flat).max_abs();

    Ok(res)
}

/// One-form residual of the Bochner identity
/// `d(lap z) + 2 Ric(grad z, .) = 0` for a Killing momentum.
pub fn bochner_residual(bundle: &Arc<GeometryBundle>, p: &Point, step: f64) -> Result<f64> {
    let b = Arc::clone(bundle);
    let lap_field = move |q: &Point| lap_z(&b, q).unwrap_or(f64::NAN);
    let dlap = fd_gradient(&lap_field, p, &bundle.chart, step)?;
    let data = curvature_at(
        &bundle.metric,
        p,
        &bundle.chart,
        bundle.orientation,
        DiffMode::Analytic,
    )?;
    let gz = grad_z(bundle, p)?;
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        let mut ric_gz = 0.0;
        for a in 0..4 {
            ric_gz += data.ricci[i][a] * gz[a];
        }
        worst = worst.max((dlap[i] + 2.0 * ric_gz).abs());
    }
    Ok(worst)
}

/// Volume three-form of the momentum level set,
/// `dVol3 = i_{grad z / |grad z|} dVol4`.
pub fn dvol3(bundle: &GeometryBundle, p: &Point) -> Result<FormValue> {
    let gz = grad_z(bundle, p)?;
    let norm = bundle.v_norm_sq(p).sqrt();
    let unit = [gz[0] / norm, gz[1] / norm, gz[2] / norm, gz[3] / norm];
    bundle.dvol4(p)?.interior(&unit)
}

/// Area two-form of the reduced surface,
/// `dVol2 = i_{V/|V|} dVol3`.
pub fn dvol2(bundle: &GeometryBundle, p: &Point) -> Result<FormValue> {
    let v = bundle.v(p);
    let norm = bundle.v_norm_sq(p).sqrt();
    let unit = [v[0] / norm, v[1] / norm, v[2] / norm, v[3] / norm];
    dvol3(bundle, p)?.interior(&unit)
}

/// Residuals of the volume-form factorisations
/// `dVol3 = |V|^{-1} V^flat ^ dVol2` and
/// `dVol4 = |V|^{-2} dz ^ V^flat ^ dVol2`.
pub fn volume_splitting_residual(bundle: &GeometryBundle, p: &Point) -> Result<f64> {
    let vsq = bundle.v_norm_sq(p);
    let vf = v_flat(bundle, p);
    let d2 = dvol2(bundle, p)?;
    let d3 = dvol3(bundle, p)?;
    let d4 = bundle.dvol4(p)?;
    let r3 = (&(&vf.wedge(&d2)? * vsq.sqrt().recip()) - &d3).max_abs();
    let dz = FormValue::one_form(bundle.momentum.jet(p).grad);
    let r4 = (&(&dz.wedge(&vf)?.wedge(&d2)? * vsq.recip()) - &d4).max_abs();
    Ok(r3.max(r4))
}

/// Chern-Simons density `phi` of the quotient circle bundle, defined by
/// `V^flat ^ dV^flat = phi |grad z|^{-1} dz ^ dVol3`, i.e.
/// `phi = *(dz ^ V^flat ^ dV^flat) / |grad z|`. The bundle degree is
/// recovered as `e = (2 pi)^{-1} \int |V|^{-3} phi dVol2` over the
/// reduced surface.
pub fn cs_density(bundle: &GeometryBundle, p: &Point) -> Result<f64> {
    let dz = FormValue::one_form(bundle.momentum.jet(p).grad);
    let top = dz.wedge(&v_flat(bundle, p))?.wedge(&dv_flat(bundle, p))?;
    let star = top.hodge(&bundle.g(p), bundle.orientation)?;
    Ok(star.comp(&[]) / bundle.v_norm_sq(p).sqrt())
}

/// Transverse vector with `dz(Z) = 1`, `Z = grad z / |grad z|^2`, used to
/// differentiate level-set data along the momentum.
pub fn zdir(bundle: &GeometryBundle, p: &Point) -> Result<[f64; 4]> {
    let gz = grad_z(bundle, p)?;
    let nsq = bundle.v_norm_sq(p);
    Ok([gz[0] / nsq, gz[1] / nsq, gz[2] / nsq, gz[3] / nsq])
}

/// Lie derivative of a form field along a vector field by the Cartan
/// formula `L_Z beta = i_Z d beta + d(i_Z beta)`, with numerical exterior
/// derivatives of half-width `step`.
pub fn lie_derivative(
    beta: &FormField,
    zfield: Arc<dyn Fn(&Point) -> Result<[f64; 4]> + Send + Sync>,
    p: &Point,
    chart: &Chart,
    step: f64,
) -> Result<FormValue> {
    let dbeta = exterior_derivative(beta, p, chart, step)?;
    let first = dbeta.interior(&zfield(p)?)?;
    let degree = beta.degree();
    if degree == 0 {
        return Ok(first);
    }
    let inner = {
        let beta = beta.clone();
        let zfield = Arc::clone(&zfield);
        FormField::new(degree - 1, move |q: &Point| match zfield(q) {
            Ok(zv) => beta
                .at(q)
                .interior(&zv)
                .unwrap_or(FormValue::zero(degree - 1)),
            Err(_) => FormValue::zero(degree - 1),
        })
    };
    let second = exterior_derivative(&inner, p, chart, step)?;
    Ok(&first + &second)
}

/// Residuals of the isothermal-chart compatibility conditions: in
/// coordinates `(x, y, z, t)` adapted to the field the metric reads
/// `w e^u (dx^2 + dy^2) + w dz^2 + w^{-1}(dt + alpha)^2`, which is
/// equivalent to the chart-independent statements
/// `w |V|^2 = 1`, `w e^u |dx|^2 = w e^u |dy|^2 = w |dz|^2 = 1`, and
/// `<dx, dy> = <dx, dz> = <dy, dz> = 0`.
pub fn isothermal_residuals(bundle: &GeometryBundle, p: &Point) -> Result<f64> {
    let iso = bundle.isothermal()?;
    let (ginv, _) = inv_spd(&bundle.g(p))?;
    let inner = |a: &[f64; 4], b: &[f64; 4]| {
        let mut acc = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                acc += ginv[i][j] * a[i] * b[j];
            }
        }
        acc
    };
    let dx = iso.x.jet(p).grad;
    let dy = iso.y.jet(p).grad;
    let dz = bundle.momentum.jet(p).grad;
    let u = iso.u.value(p);
    let w = iso.w.value(p);
    let conformal = w * u.exp();
    let mut worst = (w * bundle.v_norm_sq(p) - 1.0).abs();
    worst = worst.max((conformal * inner(&dx, &dx) - 1.0).abs());
    worst = worst.max((conformal * inner(&dy, &dy) - 1.0).abs());
    worst = worst.max((w * inner(&dz, &dz) - 1.0).abs());
    worst = worst.max(inner(&dx, &dy).abs());
    worst = worst.max(inner(&dx, &dz).abs());
    worst = worst.max(inner(&dy, &dz).abs());
    Ok(worst)
}
