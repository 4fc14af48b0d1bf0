//! End-to-end acceptance gate. Each numbered criterion prints one
//! pass/fail line; the test fails if any criterion fails.

use std::f64::consts::PI;
use std::sync::Arc;

use scalarflat::chart::Point;
use scalarflat::curvature::{curvature_at, DiffMode};
use scalarflat::families::{
    by_name, instanton_induced, lebrun_instanton, GeometryBundle, FAMILY_NAMES,
};
use scalarflat::forms::{exterior_derivative, FormField};
use scalarflat::identities::{
    ansatz_equation_residuals, check_area_linearity, check_p_ric, check_ricci_flat_relation,
    check_transgression_steps, scan_basic_inequalities, ZDerivativeEstimator,
};
use scalarflat::killing::{
    bochner_residual, lap_z, pointwise_residuals, v_flat, volume_splitting_residual,
};
use scalarflat::reduction::{
    bundle_degree, euler_characteristic, integrate_reduced, vol2, DEFAULT_ORDER, DEFAULT_QUAD_TOL,
};
use scalarflat::report::{emit_csv, emit_json, run, RunConfig};

fn rel(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1e-12)
}

fn grid(bundle: &GeometryBundle, n: usize) -> Vec<f64> {
    let (lo, hi) = bundle.z_window;
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo + pad, hi - pad);
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Momentum Laplacian through the finite-difference route:
/// `*(dV^flat ^ omega)` with a numerical exterior derivative.
fn lap_z_fd(bundle: &Arc<GeometryBundle>, p: &Point) -> Result<f64, String> {
    let vf = {
        let b = Arc::clone(bundle);
        FormField::new(1, move |q: &Point| v_flat(&b, q))
    };
    let dv = exterior_derivative(&vf, p, &bundle.chart, 1e-5).map_err(|e| e.to_string())?;
    let g = bundle.g(p);
    let top = dv.wedge(&bundle.omega(p)).map_err(|e| e.to_string())?;
    Ok(top
        .hodge(&g, bundle.orientation)
        .map_err(|e| e.to_string())?
        .comp(&[]))
}

fn criterion_1_golden_table() -> Result<(), String> {
    for k in [1u32, 2, 3] {
        for m in [0.5, 1.0] {
            let bundle = Arc::new(lebrun_instanton(k, m).map_err(|e| e.to_string())?);
            let declared = &bundle.declared;
            let (vol2_cf, lap_cf, lap_sq_cf, ric_cf) = (
                declared.vol2.as_ref().unwrap(),
                declared.int_lap_z.as_ref().unwrap(),
                declared.int_lap_z_sq.as_ref().unwrap(),
                declared.int_ric_sq.as_ref().unwrap(),
            );
            for z in grid(&bundle, 5) {
                let label = format!("k={k} m={m} z={z:.3}");
                // Analytic-derivative path, 1e-6 relative.
                let area = vol2(&bundle, z, DEFAULT_ORDER).map_err(|e| e.to_string())?;
                let lap = integrate_reduced(
                    &bundle,
                    z,
                    &|p, _| lap_z(&bundle, p),
                    DEFAULT_ORDER,
                    DEFAULT_QUAD_TOL,
                )
                .map_err(|e| e.to_string())?;
                let lap_sq = integrate_reduced(
                    &bundle,
                    z,
                    &|p, _| Ok(lap_z(&bundle, p)?.powi(2)),
                    DEFAULT_ORDER,
                    DEFAULT_QUAD_TOL,
                )
                .map_err(|e| e.to_string())?;
                let ric = integrate_reduced(
                    &bundle,
                    z,
                    &|p, _| {
                        Ok(curvature_at(
                            &bundle.metric,
                            p,
                            &bundle.chart,
                            bundle.orientation,
                            DiffMode::Analytic,
                        )?
                        .ricci_norm_sq)
                    },
                    DEFAULT_ORDER,
                    DEFAULT_QUAD_TOL,
                )
                .map_err(|e| e.to_string())?;
                for (name, got, want) in [
                    ("Vol2", area, vol2_cf(z)),
                    ("int lap", lap, lap_cf(z)),
                    ("int lap^2", lap_sq, lap_sq_cf(z)),
                    ("int |Ric|^2", ric, ric_cf(z)),
                ] {
                    // |Ric|^2 vanishes identically at k=2: absolute scale.
                    let err = if want == 0.0 {
                        got.abs()
                    } else {
                        rel(got, want)
                    };
                    if err > 1e-6 {
                        return Err(format!("{label}: {name} analytic error {err:.3e}"));
                    }
                }
                // Finite-difference path, 1e-4 relative.
                let lap_fd = integrate_reduced(
                    &bundle,
                    z,
                    &|p, _| lap_z_fd(&bundle, p).map_err(scalarflat::Error::InvalidConfig),
                    DEFAULT_ORDER,
                    1e-6,
                )
                .map_err(|e| e.to_string())?;
                let ric_fd = integrate_reduced(
                    &bundle,
                    z,
                    &|p, _| {
                        Ok(curvature_at(
                            &bundle.metric,
                            p,
                            &bundle.chart,
                            bundle.orientation,
                            DiffMode::fd_default(),
                        )?
                        .ricci_norm_sq)
                    },
                    DEFAULT_ORDER,
                    1e-4,
                )
                .map_err(|e| e.to_string())?;
                if rel(lap_fd, lap_cf(z)) > 1e-4 {
                    return Err(format!(
                        "{label}: int lap FD error {:.3e}",
                        rel(lap_fd, lap_cf(z))
                    ));
                }
                let ric_scale = ric_cf(z).abs().max(1.0);
                if (ric_fd - ric_cf(z)).abs() / ric_scale > 1e-4 {
                    return Err(format!(
                        "{label}: int |Ric|^2 FD error {:.3e}",
                        (ric_fd - ric_cf(z)).abs() / ric_scale
                    ));
                }
            }
        }
    }
    Ok(())
}

fn criterion_2_evolution() -> Result<(), String> {
    for k in [1u32, 2, 3] {
        let bundle = lebrun_instanton(k, 1.0).map_err(|e| e.to_string())?;
        let est = ZDerivativeEstimator::for_window(bundle.z_window);
        for z in [-2.2, -1.0] {
            let label = format!("k={k} z={z}");
            let d_area = est
                .first(&|t| vol2(&bundle, t, DEFAULT_ORDER), z)
                .map_err(|e| e.to_string())?;
            if rel(d_area, -2.0 * PI * k as f64) > 1e-4 {
                return Err(format!("{label}: d/dz Vol2 vs -2 pi k"));
            }
            let d_lap = est
                .first(
                    &|t| {
                        integrate_reduced(
                            &bundle,
                            t,
                            &|p, _| lap_z(&bundle, p),
                            DEFAULT_ORDER,
                            DEFAULT_QUAD_TOL,
                        )
                    },
                    z,
                )
                .map_err(|e| e.to_string())?;
            if rel(d_lap, 8.0 * PI) > 1e-4 {
                return Err(format!("{label}: d/dz int lap vs 8 pi"));
            }
            let d2_lap_sq = est
                .second(
                    &|t| {
                        integrate_reduced(
                            &bundle,
                            t,
                            &|p, _| Ok(lap_z(&bundle, p)?.powi(2)),
                            DEFAULT_ORDER,
                            DEFAULT_QUAD_TOL,
                        )
                    },
                    z,
                )
                .map_err(|e| e.to_string())?;
            let c = -2.0 * k as f64 * z + 1.0;
            let closed = 32.0 * PI * ((k as f64) - 2.0).powi(2) / c.powi(3);
            let scale = closed.abs().max(vol2(&bundle, z, DEFAULT_ORDER).unwrap());
            if (d2_lap_sq - closed).abs() / scale > 1e-4 {
                return Err(format!("{label}: d2/dz2 int lap^2 vs 2 int |Ric|^2"));
            }
        }
    }
    Ok(())
}

fn criterion_3_euclidean() -> Result<(), String> {
    let bundle = by_name("flat").map_err(|e| e.to_string())?;
    for z in [-2.0, -0.9] {
        let chart = bundle.reduction_chart(z).map_err(|e| e.to_string())?;
        let p = Point::new(bundle.chart.id, chart.embed.value([1.1, 0.7]));
        let lap = lap_z(&bundle, &p).map_err(|e| e.to_string())?;
        if (lap + 4.0).abs() > 1e-6 {
            return Err(format!("lap z = {lap}, want -4"));
        }
        let area = vol2(&bundle, z, DEFAULT_ORDER).map_err(|e| e.to_string())?;
        if rel(area, -2.0 * PI * z) > 1e-6 {
            return Err(format!("Vol2({z}) = {area}, want -2 pi z"));
        }
        let v_sq = integrate_reduced(
            &bundle,
            z,
            &|p, _| Ok(bundle.v_norm_sq(p)),
            DEFAULT_ORDER,
            DEFAULT_QUAD_TOL,
        )
        .map_err(|e| e.to_string())?;
        if rel(v_sq, 4.0 * PI * z * z) > 1e-6 {
            return Err(format!("int |V|^2 = {v_sq}, want 4 pi z^2"));
        }
        let degree = bundle_degree(&bundle, z, DEFAULT_ORDER).map_err(|e| e.to_string())?;
        if (degree + 1.0).abs() > 1e-6 {
            return Err(format!("e^g = {degree}, want -1"));
        }
        let chi = euler_characteristic(&bundle, z, DEFAULT_ORDER).map_err(|e| e.to_string())?;
        if (chi - 2.0).abs() > 1e-6 {
            return Err(format!("chi^g = {chi}, want 2"));
        }
    }
    Ok(())
}

fn criterion_4_degree_cross_check() -> Result<(), String> {
    for name in [
        "flat",
        "instanton:k=2,m=1",
        "s2h2:hyperbolic,hyperbolic-angle",
    ] {
        let bundle = by_name(name).map_err(|e| e.to_string())?;
        let est = ZDerivativeEstimator::for_window(bundle.z_window);
        let z = 0.5 * (bundle.z_window.0 + bundle.z_window.1);
        let degree = bundle_degree(&bundle, z, DEFAULT_ORDER).map_err(|e| e.to_string())?;
        let slope = est
            .first(&|t| vol2(&bundle, t, DEFAULT_ORDER), z)
            .map_err(|e| e.to_string())?
            / (2.0 * PI);
        if (degree - slope).abs() / degree.abs().max(1.0) > 1e-4 {
            return Err(format!("{name}: e^g {degree} vs area slope {slope}"));
        }
    }
    Ok(())
}

fn criterion_5_ansatz_pde() -> Result<(), String> {
    let (bundle, fields) = instanton_induced(2, 1.0).map_err(|e| e.to_string())?;
    for p in bundle.sample_points(100, 11) {
        let (u_eq, w_eq, monopole) = ansatz_equation_residuals(&fields, &p);
        let worst = u_eq.abs().max(w_eq.abs()).max(monopole);
        if worst > 1e-6 {
            return Err(format!("Toda residual {worst:.3e} at {:?}", p.coords));
        }
    }
    for name in FAMILY_NAMES {
        let bundle = by_name(name).map_err(|e| e.to_string())?;
        if bundle.reduction.is_none() {
            continue;
        }
        let z = 0.5 * (bundle.z_window.0 + bundle.z_window.1);
        let check = check_area_linearity(&bundle, z).map_err(|e| e.to_string())?;
        if !check.passed {
            return Err(format!("{name}: d2/dz2 Vol2 = {:.3e}", check.lhs));
        }
    }
    Ok(())
}

fn criterion_6_pointwise_lemmas() -> Result<(), String> {
    for name in FAMILY_NAMES {
        let bundle = Arc::new(by_name(name).map_err(|e| e.to_string())?);
        if !bundle.scalar_flat_expected {
            continue;
        }
        for p in bundle.sample_points(50, 3) {
            let worst = pointwise_residuals(&bundle, &p)
                .map_err(|e| e.to_string())?
                .max()
                .max(volume_splitting_residual(&bundle, &p).map_err(|e| e.to_string())?)
                .max(bochner_residual(&bundle, &p, 1e-4).map_err(|e| e.to_string())?);
            if worst > 1e-5 {
                return Err(format!("{name}: residual {worst:.3e} at {:?}", p.coords));
            }
        }
    }
    Ok(())
}

fn criterion_7_transgression() -> Result<(), String> {
    let instanton = Arc::new(lebrun_instanton(3, 1.0).map_err(|e| e.to_string())?);
    for p in instanton.sample_points(3, 5) {
        let steps = check_transgression_steps(&instanton, &p).map_err(|e| e.to_string())?;
        if !steps.passed {
            return Err(format!("instanton step agreement {:.3e}", steps.residual));
        }
        let d_tp = check_p_ric(&instanton, &p).map_err(|e| e.to_string())?;
        if !d_tp.passed {
            return Err(format!("instanton d(TP) residual {:.3e}", d_tp.residual));
        }
    }
    let flat = Arc::new(by_name("flat").map_err(|e| e.to_string())?);
    for p in flat.sample_points(2, 5) {
        let data = curvature_at(
            &flat.metric,
            &p,
            &flat.chart,
            flat.orientation,
            DiffMode::Analytic,
        )
        .map_err(|e| e.to_string())?;
        let density = data.ricci_norm_sq - 0.5 * data.scalar * data.scalar;
        if density.abs() > 1e-12 {
            return Err(format!("flat density should vanish, got {density:.3e}"));
        }
        let d_tp = check_p_ric(&flat, &p).map_err(|e| e.to_string())?;
        if !d_tp.passed {
            return Err(format!("flat d(TP) residual {:.3e}", d_tp.residual));
        }
    }
    Ok(())
}

fn criterion_8_ricci_flat_relation() -> Result<(), String> {
    let bundle = lebrun_instanton(2, 1.0).map_err(|e| e.to_string())?;
    for z in [-1.5, -0.7] {
        let check = check_ricci_flat_relation(&bundle, z).map_err(|e| e.to_string())?;
        if !check.passed {
            return Err(format!(
                "z={z}: e^g lap z = {}, 2 chi^g = {}",
                check.lhs, check.rhs
            ));
        }
    }
    Ok(())
}

fn criterion_9_inequalities() -> Result<(), String> {
    // (family, whether lap z is constant on each level set).
    let cases = [
        ("flat", true),
        ("instanton:k=3,m=1", true),
        ("s2h2:hyperbolic,hyperbolic-angle", true),
        ("s2h2:hyperbolic,diagonal", false),
    ];
    for (name, constant_lap) in cases {
        let bundle = by_name(name).map_err(|e| e.to_string())?;
        for z in grid(&bundle, 4) {
            let scan = scan_basic_inequalities(&bundle, z).map_err(|e| e.to_string())?;
            if !scan.holder.passed {
                return Err(format!("{name} z={z}: Hoelder violated"));
            }
            if scan.holder_equality != constant_lap {
                return Err(format!(
                    "{name} z={z}: equality flag {} (want {constant_lap})",
                    scan.holder_equality
                ));
            }
            if !scan.sign_constraints.passed {
                return Err(format!("{name} z={z}: sign constraints violated"));
            }
        }
    }
    Ok(())
}

fn criterion_10_reproducibility() -> Result<(), String> {
    // Structural laws are exercised exhaustively in the property suite;
    // here: byte-identical reruns of the batch driver.
    for name in ["flat", "s2h2:hyperbolic,diagonal"] {
        let mut config = RunConfig::default();
        config.family.name = name.to_string();
        config.grid.count = 2;
        config.samples.count = 6;
        config.checks.deep_points = 1;
        config.checks.transgression = false;
        let a = run(&config).map_err(|e| e.to_string())?;
        let b = run(&config).map_err(|e| e.to_string())?;
        if emit_csv(&a) != emit_csv(&b) || emit_json(&a) != emit_json(&b) {
            return Err(format!("{name}: rerun output differs"));
        }
        if !a.all_passed() {
            return Err(format!("{name}: {} checks failed", a.summary.failed));
        }
    }
    Ok(())
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Result<(), String>); 10] = [
        (
            "instanton golden table: Vol2, int lap, int lap^2, int |Ric|^2 vs closed forms",
            criterion_1_golden_table,
        ),
        (
            "evolution identities: area slope, 8 pi law, Chern-Gauss-Bonnet second derivative",
            criterion_2_evolution,
        ),
        (
            "Euclidean example: lap z, Vol2, int |V|^2, e^g, chi^g",
            criterion_3_euclidean,
        ),
        (
            "Chern-Simons degree equals (1/2 pi) d/dz Vol2 on three families",
            criterion_4_degree_cross_check,
        ),
        (
            "Toda-ansatz PDE residuals < 1e-6 at 100 points; Vol2 linear in z everywhere",
            criterion_5_ansatz_pde,
        ),
        (
            "pointwise lemma suite < 1e-5 at 50 regular points per family",
            criterion_6_pointwise_lemmas,
        ),
        (
            "transgression steps agree pairwise; d(TP) recovers the Ricci density",
            criterion_7_transgression,
        ),
        (
            "Eguchi-Hanson relation e^g . lap z = 2 chi^g",
            criterion_8_ricci_flat_relation,
        ),
        (
            "Hoelder inequality with equality exactly at constant lap z",
            criterion_9_inequalities,
        ),
        (
            "byte-identical reruns of the batch driver",
            criterion_10_reproducibility,
        ),
    ];
    let mut failures = Vec::new();
    for (i, (label, criterion)) in criteria.iter().enumerate() {
        match criterion() {
            Ok(()) => println!("criterion {:02} [pass] {label}", i + 1),
            Err(message) => {
                println!("criterion {:02} [FAIL] {label}: {message}", i + 1);
                failures.push(format!("criterion {:02}: {message}", i + 1));
            }
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}
