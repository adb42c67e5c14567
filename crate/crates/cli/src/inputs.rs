//! Reading input files and shipped examples, recording a digest of each.

use std::collections::BTreeMap;
use std::path::Path;

use fracfact::datasets::{bundle, Bundle, BUNDLES};
use fracfact::design::{build_design_matrix, DesignSpec};
use fracfact::family::Family;
use fracfact::formats::parse_data;
use fracfact::model::{build_covariate_matrix, CovariateMatrix, ModelSpec};
use sha2::{Digest, Sha256};

use crate::args::{FamilyArg, Inputs};
use crate::error::{CliError, CliResult};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digests of everything read, keyed by path or `bundle:<name>/<part>`.
#[derive(Default)]
pub struct Sources {
    pub digests: BTreeMap<String, String>,
}

impl Sources {
    pub fn read(&mut self, path: &Path) -> CliResult<String> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        self.digests.insert(path.display().to_string(), sha256_hex(text.as_bytes()));
        Ok(text)
    }

    pub fn embedded(&mut self, bundle: &str, part: &str, text: &str) -> String {
        self.digests.insert(format!("bundle:{bundle}/{part}"), sha256_hex(text.as_bytes()));
        text.to_string()
    }
}

pub fn find_bundle(name: &str) -> CliResult<Bundle> {
    bundle(name).ok_or_else(|| {
        let known: Vec<&str> = BUNDLES.iter().map(|b| b.name).collect();
        CliError::Invalid(format!("unknown bundle \"{name}\" (available: {})", known.join(", ")))
    })
}

/// Text of an embedded bundle part, for digest checks on replay.
pub fn embedded_text(key: &str) -> Option<&'static str> {
    let (name, part) = key.strip_prefix("bundle:")?.split_once('/')?;
    let b = bundle(name)?;
    match part {
        "design" => Some(b.design),
        "model" => Some(b.model),
        "data" => Some(b.data),
        "basis" => b.basis,
        _ => None,
    }
}

pub fn load_design(sources: &mut Sources, file: Option<&Path>, bundle_name: Option<&str>) -> CliResult<DesignSpec> {
    let text = match (file, bundle_name) {
        (Some(path), _) => sources.read(path)?,
        (None, Some(name)) => sources.embedded(name, "design", find_bundle(name)?.design),
        (None, None) => return Err(CliError::Invalid("a design file or --bundle is required".into())),
    };
    Ok(DesignSpec::parse(&text)?)
}

pub struct Problem {
    pub spec: DesignSpec,
    pub model: ModelSpec,
    pub covariates: CovariateMatrix,
}

pub fn load_problem(sources: &mut Sources, inputs: &Inputs) -> CliResult<Problem> {
    let bundle_name = inputs.bundle.as_deref();
    let spec = load_design(sources, inputs.design.as_deref(), bundle_name)?;
    let model_text = match (&inputs.model, bundle_name) {
        (Some(path), _) => sources.read(path)?,
        (None, Some(name)) => sources.embedded(name, "model", find_bundle(name)?.model),
        (None, None) => return Err(CliError::Invalid("a model file or --bundle is required".into())),
    };
    let model = ModelSpec::parse(&model_text, !inputs.no_closure)?;
    if let Some(f) = model.max_factor() {
        if f >= spec.p() {
            return Err(CliError::Invalid(format!("model uses factor {} but the design has only {}", f + 1, spec.p())));
        }
    }
    let design = build_design_matrix(&spec);
    let covariates = build_covariate_matrix(&design, &model)?;
    Ok(Problem { spec, model, covariates })
}

/// Reads the observations and settles the family, checking the run count.
pub fn load_data(
    sources: &mut Sources,
    data: Option<&Path>,
    bundle_name: Option<&str>,
    family: Option<FamilyArg>,
    runs: usize,
) -> CliResult<(Vec<i64>, Family)> {
    let text = match (data, bundle_name) {
        (Some(path), _) => sources.read(path)?,
        (None, Some(name)) => sources.embedded(name, "data", find_bundle(name)?.data),
        (None, None) => return Err(CliError::Invalid("a data file or --bundle is required".into())),
    };
    let obs = parse_data(&text)?;
    if obs.len() != runs {
        return Err(fracfact::Error::Dimension(format!("data has {} runs, design has {runs}", obs.len())).into());
    }
    let (y, fam) = fracfact::datasets::observations_to_family(&obs);
    match (family, &fam) {
        (Some(FamilyArg::Binomial), Family::Poisson) => {
            return Err(CliError::Invalid("binomial family needs \"successes denominator\" on every data line".into()))
        }
        (Some(FamilyArg::Poisson), Family::Binomial { .. }) => {
            return Err(CliError::Invalid("data has denominators; use --family binomial".into()))
        }
        _ => {}
    }
    fam.check_observation(&y)?;
    Ok((y, fam))
}
