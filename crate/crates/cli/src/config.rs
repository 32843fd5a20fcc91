//! Run configuration: one versioned JSON document with `spec`, `data`,
//! `sampler` and `train` sections. Unknown keys are rejected (fail closed),
//! and parse errors name the offending key by its full path.

use hee_core::data::{Dataset2D, Generator2D};
use hee_core::error::{HeeError, Result};
use hee_core::expfam::{Activation, Family};
use hee_core::learn::{TrainConfig, UpdateMode};
use hee_core::model::ModelSpec;
use hee_core::sampler::SamplerConfig;
use serde::Deserialize;
use std::path::{Path, PathBuf};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub spec: SpecSection,
    pub data: DataSection,
    #[serde(default)]
    pub sampler: SamplerConfig,
    #[serde(default)]
    pub train: TrainSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecSection {
    pub sizes: Vec<usize>,
    pub families: Vec<Family>,
    pub activation: Activation,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase", tag = "generator")]
pub enum DataSection {
    Mog4 { n: usize, seed: u64 },
    Bananas4 { n: usize, seed: u64 },
    Pinwheel { n: usize, seed: u64 },
    Idx { images: PathBuf, labels: PathBuf, limit: Option<usize> },
}

/// The `train` section: the core training knobs minus the nested sampler
/// (the top-level `sampler` section covers every chain in the run).
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub lr: f64,
    pub lr_final: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub inference_steps: u64,
    pub update_mode: UpdateMode,
    pub eval_every: u64,
    pub seed: u64,
    pub learn_eta_top: bool,
    pub divergence_factor: f64,
    pub heldout_fraction: f64,
}

impl Default for TrainSection {
    fn default() -> Self {
        let d = TrainConfig::default();
        Self {
            lr: d.lr,
            lr_final: d.lr_final,
            epochs: d.epochs,
            batch_size: d.batch_size,
            inference_steps: d.inference_steps,
            update_mode: d.update_mode,
            eval_every: d.eval_every,
            seed: d.seed,
            learn_eta_top: d.learn_eta_top,
            divergence_factor: d.divergence_factor,
            heldout_fraction: d.heldout_fraction,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let body = std::fs::read_to_string(path)?;
        let mut de = serde_json::Deserializer::from_str(&body);
        let config: RunConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            // missing/unknown-field errors surface at the parent struct, so
            // splice the field name back onto the path: `spec` + missing
            // field `sizes` → `spec.sizes`
            let inner = e.inner().to_string();
            let mut key = e.path().to_string();
            if let Some(field) = inner
                .strip_prefix("missing field `")
                .or_else(|| inner.strip_prefix("unknown field `"))
                .and_then(|rest| rest.split('`').next())
            {
                if key == "." {
                    key = field.to_string();
                } else {
                    key = format!("{key}.{field}");
                }
            }
            HeeError::InvalidConfig(format!("{}: {} (at key `{key}`)", path.display(), inner))
        })?;
        if config.version != CONFIG_VERSION {
            return Err(HeeError::InvalidConfig(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                config.version
            )));
        }
        config.sampler.validate()?;
        Ok(config)
    }

    pub fn model_spec(&self) -> Result<ModelSpec> {
        ModelSpec::new(
            self.spec.sizes.clone(),
            self.spec.families.clone(),
            self.spec.activation,
        )
    }

    /// Materialize the dataset rows named by the `data` section.
    pub fn dataset(&self) -> Result<Vec<Vec<f64>>> {
        match &self.data {
            DataSection::Mog4 { n, seed } => {
                Ok(Dataset2D::generate(Generator2D::Mog4, *n, *seed).rows())
            }
            DataSection::Bananas4 { n, seed } => {
                Ok(Dataset2D::generate(Generator2D::Bananas4, *n, *seed).rows())
            }
            DataSection::Pinwheel { n, seed } => {
                Ok(Dataset2D::generate(Generator2D::Pinwheel, *n, *seed).rows())
            }
            DataSection::Idx { images, labels, limit } => {
                Ok(hee_core::data::load_idx(images, labels, *limit)?.images)
            }
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            lr: self.train.lr,
            lr_final: self.train.lr_final,
            epochs: self.train.epochs,
            batch_size: self.train.batch_size,
            inference_steps: self.train.inference_steps,
            update_mode: self.train.update_mode,
            sampler: self.sampler.clone(),
            eval_every: self.train.eval_every,
            seed: self.train.seed,
            learn_eta_top: self.train.learn_eta_top,
            divergence_factor: self.train.divergence_factor,
            heldout_fraction: self.train.heldout_fraction,
        }
    }
}
