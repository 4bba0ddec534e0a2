use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::metrics::EpochMetrics;
use super::trainer::TrainConfig;
use crate::equivariant_nn::ParamStore;
use crate::error::{Error, Result};
use crate::planner::{ModelSpec, Planner, PolicyModel};
use crate::symmetry::FieldTypeDescriptor;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedArray {
    pub name: String,
    pub values: Vec<f32>,
}

/// Model parameters plus everything needed to rebuild and audit the model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub version: u32,
    pub model: ModelSpec,
    pub field_types: Vec<(String, FieldTypeDescriptor)>,
    pub train: TrainConfig,
    /// Epoch whose parameters are stored; 0 for the initialization.
    pub epoch: usize,
    pub history: Vec<EpochMetrics>,
    pub params: Vec<NamedArray>,
}

impl Checkpoint {
    pub fn capture<M: PolicyModel>(
        model: &M,
        train: &TrainConfig,
        epoch: usize,
        history: Vec<EpochMetrics>,
    ) -> Result<Self> {
        Ok(Self {
            version: CHECKPOINT_VERSION,
            model: model.spec(),
            field_types: model.field_types()?,
            train: train.clone(),
            epoch,
            history,
            params: model
                .params()
                .iter()
                .map(|(name, v)| NamedArray { name: name.into(), values: v.to_vec() })
                .collect(),
        })
    }

    pub fn param_store(&self) -> ParamStore<f32> {
        let mut store = ParamStore::new();
        for p in &self.params {
            store.add(p.name.clone(), p.values.clone());
        }
        store
    }

    /// Rebuilds the model and loads the stored parameters.
    pub fn restore(&self) -> Result<Planner> {
        let mut model = self.model.build(self.train.seed)?;
        if model.field_types()? != self.field_types {
            return Err(Error::Model("stored field types do not match the rebuilt model".into()));
        }
        model.set_params(self.param_store())?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        Ok(fs::write(path, serde_json::to_vec_pretty(self)?)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingCheckpoint(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        let header: serde_json::Value = serde_json::from_slice(&bytes)?;
        let found = header.get("version").and_then(serde_json::Value::as_u64).unwrap_or(0) as u32;
        if found != CHECKPOINT_VERSION {
            return Err(Error::Version { found, expected: CHECKPOINT_VERSION });
        }
        Ok(serde_json::from_value(header)?)
    }
}
