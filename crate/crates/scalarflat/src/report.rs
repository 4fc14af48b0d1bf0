//! Batch driver: run a configured selection of checks over momentum
//! grids and point samples, and emit the results as an aligned table,
//! csv, or json.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chart::Point;
use crate::curvature::{curvature_at, kahler_curvature_checks, DiffMode};
use crate::error::{Error, Result};
use crate::families::{ansatz_by_name, by_name, GeometryBundle};
use crate::identities::{
    check_ansatz_equations, check_area_growth, check_area_linearity, check_cgb_evolution,
    check_chi_evolution, check_p_ric, check_ricci_flat_relation, check_toda_global,
    check_transgression_steps, scan_basic_inequalities, CheckKind, IdentityCheck, TOL_CLOSED_FORM,
    TOL_EVOLUTION, TOL_POINTWISE,
};
use crate::killing::{
    bochner_residual, isothermal_residuals, pointwise_residuals, volume_splitting_residual,
};
use crate::reduction::{bundle_degree, euler_characteristic, DEFAULT_ORDER};

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct GridConfig {
    /// Momentum grid bounds; when absent the family's regular window is used.
    pub z_min: Option<f64>,
    pub z_max: Option<f64>,
    pub count: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            z_min: None,
            z_max: None,
            count: 5,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct SampleConfig {
    pub count: usize,
    pub seed: u64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            count: 50,
            seed: 2026,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct CheckSelection {
    #[serde(default = "default_true")]
    pub pointwise: bool,
    #[serde(default = "default_true")]
    pub curvature: bool,
    #[serde(default = "default_true")]
    pub evolution: bool,
    #[serde(default = "default_true")]
    pub inequalities: bool,
    #[serde(default = "default_true")]
    pub toda: bool,
    #[serde(default = "default_true")]
    pub transgression: bool,
    #[serde(default = "default_true")]
    pub ansatz: bool,
    /// How many sample points receive the expensive nested-derivative
    /// checks (Toda, transgression).
    pub deep_points: usize,
}

impl Default for CheckSelection {
    fn default() -> Self {
        CheckSelection {
            pointwise: true,
            curvature: true,
            evolution: true,
            inequalities: true,
            toda: true,
            transgression: true,
            ansatz: true,
            deep_points: 2,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct Tolerances {
    pub closed_form: f64,
    pub evolution: f64,
    pub pointwise: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            closed_form: TOL_CLOSED_FORM,
            evolution: TOL_EVOLUTION,
            pointwise: TOL_POINTWISE,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Table,
    Csv,
    Json,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct OutputConfig {
    pub format: OutputFormat,
    /// Optional file path; stdout when absent.
    pub path: Option<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            format: OutputFormat::Table,
            path: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct FamilyConfig {
    /// Family spec string, e.g. `instanton:k=3,m=1`.
    pub name: String,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        FamilyConfig {
            name: "instanton:k=3,m=1".to_string(),
        }
    }
}

/// A full run configuration; every section has defaults so partial
/// files work.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct RunConfig {
    pub family: FamilyConfig,
    pub grid: GridConfig,
    pub samples: SampleConfig,
    pub checks: CheckSelection,
    pub tolerances: Tolerances,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    fn validate(&self) -> Result<()> {
        if self.grid.count == 0 {
            return Err(Error::InvalidConfig("grid count must be >= 1".into()));
        }
        if let (Some(lo), Some(hi)) = (self.grid.z_min, self.grid.z_max) {
            if lo > hi {
                return Err(Error::InvalidConfig(format!(
                    "empty momentum grid [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub config: RunConfig,
    pub records: Vec<IdentityCheck>,
    pub summary: Summary,
    /// Excluded from serialized output so reruns are byte-identical.
    #[serde(skip)]
    pub wall_time_ms: u64,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }
}

fn momentum_grid(bundle: &GeometryBundle, grid: &GridConfig) -> Result<Vec<f64>> {
    let (wlo, whi) = bundle.z_window;
    let lo = grid.z_min.unwrap_or(wlo);
    let hi = grid.z_max.unwrap_or(whi);
    if lo < wlo - 1e-12 || hi > whi + 1e-12 {
        return Err(Error::OutsideRegularRange {
            z: if lo < wlo { lo } else { hi },
            lo: wlo,
            hi: whi,
        });
    }
    let n = grid.count;
    if n == 1 {
        return Ok(vec![0.5 * (lo + hi)]);
    }
    // Keep a margin so derivative stencils stay inside the window.
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo + pad, hi - pad);
    Ok((0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect())
}

/// Maximum of a per-point residual over the sample set, in parallel
/// with a deterministic reduction order.
fn worst_over_points(points: &[Point], f: impl Fn(&Point) -> Result<f64> + Sync) -> Result<f64> {
    let residuals: Vec<f64> = points
        .par_iter()
        .map(&f)
        .collect::<Result<Vec<f64>>>()?;
    Ok(residuals.into_iter().fold(0.0, f64::max))
}

fn pointwise_check(
    name: &str,
    statement: &str,
    points: &[Point],
    tolerance: f64,
    f: impl Fn(&Point) -> Result<f64> + Sync,
) -> Result<IdentityCheck> {
    let worst = worst_over_points(points, f)?;
    Ok(IdentityCheck {
        name: name.to_string(),
        kind: CheckKind::PointwiseForm,
        statement: statement.to_string(),
        location: format!("{} sample points", points.len()),
        lhs: worst,
        rhs: 0.0,
        residual: worst,
        tolerance,
        passed: worst <= tolerance,
    })
}

fn run_pointwise(
    bundle: &Arc<GeometryBundle>,
    points: &[Point],
    tol: &Tolerances,
    records: &mut Vec<IdentityCheck>,
) -> Result<()> {
    records.push(pointwise_check(
        "kahler_killing_lemmas",
        "momentum, gradient, Hessian, and self-dual identities for (g, J, V, z)",
        points,
        tol.pointwise,
        |p| Ok(pointwise_residuals(bundle, p)?.max()),
    )?);
    records.push(pointwise_check(
        "volume_splittings",
        "dVol4, dVol3, dVol2 interior-product factorisations",
        points,
        tol.pointwise,
        |p| volume_splitting_residual(bundle, p),
    )?);
    records.push(pointwise_check(
        "bochner",
        "d(lap z) + 2 Ric(grad z) = 0",
        points,
        tol.pointwise,
        |p| bochner_residual(bundle, p, 1e-4),
    )?);
    if bundle.isothermal.is_some() {
        records.push(pointwise_check(
            "isothermal_chart",
            "(x, y, z) are w-orthonormal isothermal coordinates",
            points,
            tol.pointwise,
            |p| isothermal_residuals(bundle, p),
        )?);
    }
    Ok(())
}

fn run_curvature(
    bundle: &Arc<GeometryBundle>,
    points: &[Point],
    tol: &Tolerances,
    records: &mut Vec<IdentityCheck>,
) -> Result<()> {
    records.push(pointwise_check(
        "curvature_decomposition",
        "|Rm|^2 = s^2/6 + 2|Ric0|^2 + |W+|^2 + |W-|^2, operator block structure",
        points,
        tol.pointwise,
        |p| {
            let data = curvature_at(
                &bundle.metric,
                p,
                &bundle.chart,
                bundle.orientation,
                DiffMode::Analytic,
            )?;
            Ok(data
                .decomposition_residual()
                .max(data.symmetry_residual())
                .max(data.block_reassembly_residual()))
        },
    )?);
    if bundle.scalar_flat_expected {
        records.push(pointwise_check(
            "kahler_curvature_block",
            "Rm^{++} = (s/4) omega-projector; omega self-dual",
            points,
            tol.pointwise,
            |p| {
                let data = curvature_at(
                    &bundle.metric,
                    p,
                    &bundle.chart,
                    bundle.orientation,
                    DiffMode::Analytic,
                )?;
                let checks = kahler_curvature_checks(&data, &bundle.g(p), &bundle.j_matrix(p));
                Ok(checks
                    .block_residual
                    .max(checks.norm_residual)
                    .max(checks.omega_antiselfdual_part))
            },
        )?);
    }
    let worst_scalar = worst_over_points(points, |p| {
        let data = curvature_at(
            &bundle.metric,
            p,
            &bundle.chart,
            bundle.orientation,
            DiffMode::Analytic,
        )?;
        Ok(data.scalar.abs())
    })?;
    let (statement, residual, tolerance) = if bundle.scalar_flat_expected {
        (
            "scalar curvature vanishes".to_string(),
            worst_scalar,
            tol.pointwise,
        )
    } else {
        // Deliberately broken data: the engine must flag it.
        (
            "scalar curvature detected nonzero on non-solution data".to_string(),
            if worst_scalar > 1e-3 { 0.0 } else { 1.0 },
            0.5,
        )
    };
    records.push(IdentityCheck {
        name: "scalar_flat".to_string(),
        kind: CheckKind::PointwiseForm,
        statement,
        location: format!("{} sample points", points.len()),
        lhs: worst_scalar,
        rhs: 0.0,
        residual,
        tolerance,
        passed: residual <= tolerance,
    });
    Ok(())
}

fn run_evolution(
    bundle: &GeometryBundle,
    zs: &[f64],
    records: &mut Vec<IdentityCheck>,
) -> Result<()> {
    let per_z: Vec<Vec<IdentityCheck>> = zs
        .par_iter()
        .map(|&z| -> Result<Vec<IdentityCheck>> {
            Ok(vec![
                check_area_growth(bundle, z)?,
                check_area_linearity(bundle, z)?,
                check_chi_evolution(bundle, z)?,
                check_cgb_evolution(bundle, z)?,
            ])
        })
        .collect::<Result<_>>()?;
    records.extend(per_z.into_iter().flatten());

    // chi^g and e^g are topological: constant along the momentum.
    let invariants: Vec<(f64, f64)> = zs
        .par_iter()
        .map(|&z| -> Result<(f64, f64)> {
            Ok((
                euler_characteristic(bundle, z, DEFAULT_ORDER)?,
                bundle_degree(bundle, z, DEFAULT_ORDER)?,
            ))
        })
        .collect::<Result<_>>()?;
    let spread = |xs: &[f64]| -> f64 {
        let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    };
    let chis: Vec<f64> = invariants.iter().map(|v| v.0).collect();
    let degs: Vec<f64> = invariants.iter().map(|v| v.1).collect();
    let residual = spread(&chis).max(spread(&degs));
    records.push(IdentityCheck {
        name: "invariants_constant".to_string(),
        kind: CheckKind::IntegralEvolution,
        statement: "chi^g and e^g constant across the momentum grid".to_string(),
        location: format!("{} grid points", zs.len()),
        lhs: chis[0],
        rhs: degs[0],
        residual,
        tolerance: 1e-6,
        passed: residual <= 1e-6,
    });

    // Ricci-flat members additionally satisfy e^g . lap z = 2 chi^g.
    let declared = &bundle.declared;
    if let (Some(lap), Some(ric)) = (&declared.lap_z, &declared.int_ric_sq) {
        let z = zs[zs.len() / 2];
        if ric(z).abs() <= 1e-12 && lap(z).is_finite() {
            records.push(check_ricci_flat_relation(bundle, z)?);
        }
    }
    Ok(())
}

fn run_inequalities(
    bundle: &GeometryBundle,
    zs: &[f64],
    records: &mut Vec<IdentityCheck>,
) -> Result<()> {
    let per_z: Vec<Vec<IdentityCheck>> = zs
        .par_iter()
        .map(|&z| -> Result<Vec<IdentityCheck>> {
            let scan = scan_basic_inequalities(bundle, z)?;
            Ok(vec![scan.holder, scan.sign_constraints])
        })
        .collect::<Result<_>>()?;
    records.extend(per_z.into_iter().flatten());
    Ok(())
}

fn run_deep(
    bundle: &Arc<GeometryBundle>,
    points: &[Point],
    selection: &CheckSelection,
    records: &mut Vec<IdentityCheck>,
) -> Result<()> {
    let deep: Vec<&Point> = points.iter().take(selection.deep_points.max(1)).collect();
    for p in deep {
        if selection.toda && bundle.reduction.is_some() {
            records.push(check_toda_global(bundle, p)?);
        }
        if selection.transgression {
            records.push(check_transgression_steps(bundle, p)?);
            records.push(check_p_ric(bundle, p)?);
        }
    }
    Ok(())
}

fn run_ansatz(config: &RunConfig, records: &mut Vec<IdentityCheck>) -> Result<()> {
    let Some((bundle, fields)) = ansatz_by_name(&config.family.name)? else {
        return Ok(());
    };
    let points = bundle.sample_points(config.samples.count, config.samples.seed);
    let mut check = check_ansatz_equations(&fields, &points);
    if !bundle.scalar_flat_expected {
        // Non-solution data: the equations must be seen to fail.
        let detected = check.residual > 1e-3;
        check.statement = "Toda system residual detected nonzero on non-solution data".to_string();
        check.residual = if detected { 0.0 } else { 1.0 };
        check.tolerance = 0.5;
        check.passed = detected;
    }
    records.push(check);
    Ok(())
}

/// Execute the configured checks and assemble the report.
pub fn run(config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let start = Instant::now();
    let bundle = Arc::new(by_name(&config.family.name)?);
    let points = bundle.sample_points(config.samples.count, config.samples.seed);
    let mut records = Vec::new();

    // Non-solution fixtures deliberately break the structural hypotheses,
    // so only the detector checks (scalar curvature, ansatz equations)
    // are meaningful on them.
    if config.checks.pointwise && bundle.scalar_flat_expected {
        run_pointwise(&bundle, &points, &config.tolerances, &mut records)?;
    }
    if config.checks.curvature {
        run_curvature(&bundle, &points, &config.tolerances, &mut records)?;
    }
    let has_reduction = bundle.reduction.is_some();
    if has_reduction && (config.checks.evolution || config.checks.inequalities) {
        let zs = momentum_grid(&bundle, &config.grid)?;
        if config.checks.evolution {
            run_evolution(&bundle, &zs, &mut records)?;
        }
        if config.checks.inequalities {
            run_inequalities(&bundle, &zs, &mut records)?;
        }
    }
    if (config.checks.toda || config.checks.transgression) && bundle.scalar_flat_expected {
        run_deep(&bundle, &points, &config.checks, &mut records)?;
    }
    if config.checks.ansatz {
        run_ansatz(config, &mut records)?;
    }

    let passed = records.iter().filter(|r| r.passed).count();
    let summary = Summary {
        total: records.len(),
        passed,
        failed: records.len() - passed,
    };
    Ok(Report {
        version: ENGINE_VERSION.to_string(),
        config: config.clone(),
        records,
        summary,
        wall_time_ms: start.elapsed().as_millis() as u64,
    })
}

fn fmt_float(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x:.6e}")
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn emit_csv(report: &Report) -> String {
    let mut out = String::from("check,family,z_or_point,lhs,rhs,residual,tolerance,pass\n");
    for r in &report.records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            csv_escape(&r.name),
            csv_escape(&report.config.family.name),
            csv_escape(&r.location),
            fmt_float(r.lhs),
            fmt_float(r.rhs),
            fmt_float(r.residual),
            fmt_float(r.tolerance),
            r.passed,
        ));
    }
    out
}

pub fn emit_json(report: &Report) -> String {
    // Deterministic field order comes from the struct definitions.
    serde_json::to_string_pretty(report).expect("report serializes")
}

pub fn emit_table(report: &Report) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "family {}  (engine {})\n",
        report.config.family.name, report.version
    ));
    let name_w = report
        .records
        .iter()
        .map(|r| r.name.len())
        .max()
        .unwrap_or(4)
        .max(5);
    let loc_w = report
        .records
        .iter()
        .map(|r| r.location.len())
        .max()
        .unwrap_or(8)
        .max(8);
    out.push_str(&format!(
        "{:<name_w$}  {:<loc_w$}  {:>13}  {:>13}  {:>9}  result\n",
        "check", "location", "residual", "tolerance", "kind",
    ));
    for r in &report.records {
        let kind = match r.kind {
            CheckKind::PointwiseForm => "pointwise",
            CheckKind::IntegralEvolution => "evolution",
            CheckKind::Inequality => "ineq",
        };
        out.push_str(&format!(
            "{:<name_w$}  {:<loc_w$}  {:>13}  {:>13}  {:>9}  {}\n",
            r.name,
            r.location,
            fmt_float(r.residual),
            fmt_float(r.tolerance),
            kind,
            if r.passed { "pass" } else { "FAIL" },
        ));
    }
    out.push_str(&format!(
        "{} checks: {} passed, {} failed  ({} ms)\n",
        report.summary.total, report.summary.passed, report.summary.failed, report.wall_time_ms
    ));
    out
}

pub fn emit(report: &Report, format: OutputFormat) -> String {
    match format {
        OutputFormat::Table => emit_table(report),
        OutputFormat::Csv => emit_csv(report),
        OutputFormat::Json => emit_json(report),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_config(name: &str) -> RunConfig {
        let mut config = RunConfig::default();
        config.family.name = name.to_string();
        config.grid.count = 2;
        config.samples.count = 4;
        config.checks.deep_points = 1;
        config.checks.transgression = false; // exercised in identities tests
        config
    }

    #[test]
    fn toml_defaults_fill_missing_sections() {
        let config = RunConfig::from_toml("[family]\nname = \"flat\"\n").unwrap();
        assert_eq!(config.family.name, "flat");
        assert_eq!(config.grid.count, 5);
        assert_eq!(config.samples.seed, 2026);
        assert!(config.checks.evolution);
        assert!(RunConfig::from_toml("[grid]\ncount = \"three\"").is_err());
    }

    #[test]
    fn grid_outside_regular_window_is_rejected() {
        let mut config = quick_config("instanton:k=2,m=1");
        config.grid.z_min = Some(-1.0);
        config.grid.z_max = Some(0.5);
        assert!(matches!(
            run(&config),
            Err(Error::OutsideRegularRange { .. })
        ));
    }

    #[test]
    fn flat_space_report_is_clean() {
        let report = run(&quick_config("flat")).unwrap();
        assert!(report.all_passed(), "{}", emit_table(&report));
        assert_eq!(
            report.summary.passed + report.summary.failed,
            report.records.len()
        );
    }

    #[test]
    fn broken_ansatz_data_is_flagged_as_detected() {
        let report = run(&quick_config("ansatz-broken")).unwrap();
        let scalar = report
            .records
            .iter()
            .find(|r| r.name == "scalar_flat")
            .unwrap();
        assert!(
            scalar.passed,
            "detector should see the nonzero scalar curvature"
        );
        assert!(scalar.lhs > 1e-3);
        let ansatz = report
            .records
            .iter()
            .find(|r| r.name == "ansatz_equations")
            .unwrap();
        assert!(ansatz.passed, "detector should see the Toda residual");
    }

    #[test]
    fn emitters_are_deterministic_and_structured() {
        let config = quick_config("s2h2:hyperbolic,hyperbolic-angle");
        let a = run(&config).unwrap();
        let b = run(&config).unwrap();
        assert_eq!(emit_csv(&a), emit_csv(&b));
        assert_eq!(emit_json(&a), emit_json(&b));

        let json = emit_json(&a);
        let parsed: Report = serde_json::from_str(&json).unwrap();
        assert_eq!(emit_json(&parsed), json);

        let csv = emit_csv(&a);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "check,family,z_or_point,lhs,rhs,residual,tolerance,pass"
        );
        assert_eq!(lines.len(), a.records.len() + 1);
        let table = emit_table(&a);
        assert_eq!(table.lines().count(), a.records.len() + 3);
    }
}
