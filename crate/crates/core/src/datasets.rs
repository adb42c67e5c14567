//! Bundled example data sets.

use crate::design::{build_design_matrix, DesignMatrix, DesignSpec};
use crate::error::Result;
use crate::family::Family;
use crate::formats::{parse_data, Observation};
use crate::model::{build_covariate_matrix, CovariateMatrix, ModelSpec};
use crate::moves::{import_basis, MoveSet};

/// Text files making up one example: design, model, data and optionally a
/// precomputed basis for the model's configuration.
#[derive(Clone, Copy, Debug)]
pub struct Bundle {
    pub name: &'static str,
    pub design: &'static str,
    pub model: &'static str,
    pub data: &'static str,
    pub basis: Option<&'static str>,
}

/// Defect counts from a 2^(7-3) wave-soldering experiment (run totals).
/// The basis is a minimal Markov basis of the AC/BD/E/F/G configuration.
pub const WAVE_SOLDER: Bundle = Bundle {
    name: "wave_solder",
    design: include_str!("../data/wave_solder/design.txt"),
    model: include_str!("../data/wave_solder/model.txt"),
    data: include_str!("../data/wave_solder/data.txt"),
    basis: Some(include_str!("../data/wave_solder/basis.mar")),
};

/// The wave-solder configuration with its seventh row replaced by the CD
/// contrast, and a 35-move minimal Markov basis for it.
pub const WAVE_SOLDER_CD_VARIANT_MATRIX: &str = include_str!("../data/wave_solder/cd_variant_x0t.mat");
pub const WAVE_SOLDER_CD_VARIANT_BASIS: &str = include_str!("../data/wave_solder/cd_variant_basis.mar");

/// Successes out of 1000 trials in a 2^(4-1) experiment.
pub const WINDSHIELD: Bundle = Bundle {
    name: "windshield",
    design: include_str!("../data/windshield/design.txt"),
    model: include_str!("../data/windshield/model.txt"),
    data: include_str!("../data/windshield/data.txt"),
    basis: None,
};

pub const BUNDLES: [Bundle; 2] = [WAVE_SOLDER, WINDSHIELD];

pub fn bundle(name: &str) -> Option<Bundle> {
    BUNDLES.iter().copied().find(|b| b.name == name)
}

/// A bundle parsed into ready-to-use pieces.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub spec: DesignSpec,
    pub design: DesignMatrix,
    pub model: ModelSpec,
    pub covariates: CovariateMatrix,
    pub y: Vec<i64>,
    pub family: Family,
    pub basis: Option<MoveSet>,
}

/// Splits parsed observations into counts and the matching family.
pub fn observations_to_family(obs: &[Observation]) -> (Vec<i64>, Family) {
    let y = obs.iter().map(|o| o.count).collect();
    match obs.first().and_then(|o| o.denominator) {
        Some(_) => (y, Family::Binomial { denominators: obs.iter().map(|o| o.denominator.unwrap_or(0)).collect() }),
        None => (y, Family::Poisson),
    }
}

impl Bundle {
    pub fn load(&self) -> Result<Loaded> {
        let spec = DesignSpec::parse(self.design)?;
        let design = build_design_matrix(&spec);
        let model = ModelSpec::parse(self.model, true)?;
        let covariates = build_covariate_matrix(&design, &model)?;
        let (y, family) = observations_to_family(&parse_data(self.data)?);
        let basis = self.basis.map(|b| import_basis(b, &covariates.transpose_rows())).transpose()?;
        Ok(Loaded { spec, design, model, covariates, y, family, basis })
    }
}
