//! The catalogue of scalar-flat Kahler geometries the engine can verify.

pub mod bundle;
pub mod flat_c2;
pub mod lebrun;
pub mod lebrun_data;
pub mod s2h2;

pub use bundle::{
    Declared, GeometryBundle, IsothermalChart, Reduction, ReductionChart, KILLING_CUTOFF,
};
pub use flat_c2::flat_c2;
pub use lebrun::lebrun_instanton;
pub use lebrun_data::{
    flat_translational, from_lebrun_data, instanton_induced, perturbed_non_solution, AnsatzFields,
    LebrunAnsatz,
};
pub use s2h2::{s2h2, FieldChoice, HyperbolicModel};

use crate::error::{Error, Result};

/// Build a geometry from a textual name, e.g. `flat`, `instanton:k=2,m=1`,
/// `s2h2:hyperbolic,diagonal`, `ansatz-broken`.
pub fn by_name(spec: &str) -> Result<GeometryBundle> {
    let (head, args) = match spec.split_once(':') {
        Some((h, a)) => (h.trim(), a.trim()),
        None => (spec.trim(), ""),
    };
    let parse_kv = |args: &str| -> Result<Vec<(String, f64)>> {
        args.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|pair| {
                let (key, value) = pair.split_once('=').ok_or_else(|| {
                    Error::InvalidParameter(format!("expected key=value in `{pair}`"))
                })?;
                let value: f64 = value
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad number in `{pair}`")))?;
                Ok((key.trim().to_string(), value))
            })
            .collect()
    };
    match head {
        "flat" => {
            let mut alpha = 1.0;
            let mut beta = 1.0;
            for (key, value) in parse_kv(args)? {
                match key.as_str() {
                    "alpha" => alpha = value,
                    "beta" => beta = value,
                    other => {
                        return Err(Error::InvalidParameter(format!(
                            "unknown flat parameter `{other}`"
                        )))
                    }
                }
            }
            flat_c2(alpha, beta)
        }
        "instanton" => {
            let mut k = 2u32;
            let mut m = 1.0;
            for (key, value) in parse_kv(args)? {
                match key.as_str() {
                    "k" => k = value as u32,
                    "m" => m = value,
                    other => {
                        return Err(Error::InvalidParameter(format!(
                            "unknown instanton parameter `{other}`"
                        )))
                    }
                }
            }
            lebrun_instanton(k, m)
        }
        "s2h2" => {
            let mut model = HyperbolicModel::Hyperbolic;
            let mut field = FieldChoice::HyperbolicAngle;
            for word in args.split(',').filter(|s| !s.trim().is_empty()) {
                match word.trim() {
                    "elliptic" => model = HyperbolicModel::Elliptic,
                    "parabolic" => model = HyperbolicModel::Parabolic,
                    "hyperbolic" => model = HyperbolicModel::Hyperbolic,
                    "sphere-angle" => field = FieldChoice::SphereAngle,
                    "hyperbolic-angle" => field = FieldChoice::HyperbolicAngle,
                    "diagonal" => field = FieldChoice::Diagonal,
                    other => {
                        return Err(Error::InvalidParameter(format!(
                            "unknown s2h2 option `{other}`"
                        )))
                    }
                }
            }
            s2h2(model, field)
        }
        "ansatz-flat" => Ok(flat_translational()?.0),
        "ansatz-instanton" => {
            let mut k = 2u32;
            let mut m = 1.0;
            for (key, value) in parse_kv(args)? {
                match key.as_str() {
                    "k" => k = value as u32,
                    "m" => m = value,
                    other => {
                        return Err(Error::InvalidParameter(format!(
                            "unknown ansatz-instanton parameter `{other}`"
                        )))
                    }
                }
            }
            Ok(instanton_induced(k, m)?.0)
        }
        "ansatz-broken" => Ok(perturbed_non_solution()?.0),
        other => Err(Error::UnknownFamily(other.to_string())),
    }
}

/// For the explicit-data families, the `(u, w, alpha)` fields alongside
/// the geometry; `None` for families not given in that form.
pub fn ansatz_by_name(spec: &str) -> Result<Option<(GeometryBundle, AnsatzFields)>> {
    let head = spec.split_once(':').map_or(spec.trim(), |(h, _)| h.trim());
    match head {
        "ansatz-flat" => Ok(Some(flat_translational()?)),
        "ansatz-broken" => Ok(Some(perturbed_non_solution()?)),
        "ansatz-instanton" => {
            let args = spec.split_once(':').map_or("", |(_, a)| a);
            let mut k = 2u32;
            let mut m = 1.0;
            for pair in args.split(',').filter(|s| !s.trim().is_empty()) {
                let (key, value) = pair.split_once('=').ok_or_else(|| {
                    Error::InvalidParameter(format!("expected key=value in `{pair}`"))
                })?;
                match key.trim() {
                    "k" => {
                        k = value.trim().parse().map_err(|_| {
                            Error::InvalidParameter(format!("bad number in `{pair}`"))
                        })?
                    }
                    "m" => {
                        m = value.trim().parse().map_err(|_| {
                            Error::InvalidParameter(format!("bad number in `{pair}`"))
                        })?
                    }
                    other => {
                        return Err(Error::InvalidParameter(format!(
                            "unknown ansatz-instanton parameter `{other}`"
                        )))
                    }
                }
            }
            Ok(Some(instanton_induced(k, m)?))
        }
        _ => {
            by_name(spec)?;
            Ok(None)
        }
    }
}

/// Names accepted by [`by_name`], for help text and full scans.
pub const FAMILY_NAMES: &[&str] = &[
    "flat",
    "instanton:k=1,m=1",
    "instanton:k=2,m=1",
    "instanton:k=3,m=1",
    "s2h2:elliptic,hyperbolic-angle",
    "s2h2:parabolic,hyperbolic-angle",
    "s2h2:hyperbolic,hyperbolic-angle",
    "s2h2:hyperbolic,diagonal",
    "ansatz-flat",
    "ansatz-instanton:k=2,m=1",
    "ansatz-broken",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_listed_names_resolve() {
        for name in FAMILY_NAMES {
            by_name(name).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn unknown_names_are_rejected() {
        assert!(by_name("torus").is_err());
        assert!(by_name("flat:gamma=1").is_err());
    }
}
