use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use gpsurr_core::model_file;
use gpsurr_core::AnyModel;
use sha2::{Digest, Sha256};

use crate::api::ModelInfo;

#[derive(Debug, thiserror::Error)]
pub enum RegistryError {
    #[error("cannot read model directory {path}: {source}")]
    Dir {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("rejected model file {path}: {source}")]
    Model {
        path: PathBuf,
        source: gpsurr_core::Error,
    },
}

#[derive(Debug)]
pub struct ModelEntry {
    pub model: AnyModel,
    pub path: PathBuf,
    pub created_at: Option<String>,
    /// SHA-256 of the file bytes.
    pub file_sha256: String,
}

impl ModelEntry {
    pub fn info(&self, model_id: &str) -> ModelInfo {
        ModelInfo {
            model_id: model_id.to_string(),
            kind: self.model.kind().to_string(),
            feature_names: self.model.feature_names().to_vec(),
            target_name: self.model.target_name().to_string(),
            sweep_feature: self.model.sweep_feature(),
        }
    }
}

/// Models keyed by file stem. Written once, then read-only.
#[derive(Debug, Default)]
pub struct ModelRegistry {
    entries: BTreeMap<String, ModelEntry>,
}

impl ModelRegistry {
    /// Loads every `*.json` file in `dir`. Any unreadable or invalid file
    /// aborts the whole load.
    pub fn load_dir(dir: &Path) -> Result<Self, RegistryError> {
        let dir_err = |source| RegistryError::Dir { path: dir.to_path_buf(), source };
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(dir_err)?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()
            .map_err(dir_err)?;
        paths.retain(|p| p.is_file() && p.extension().is_some_and(|e| e == "json"));
        paths.sort();
        let mut reg = ModelRegistry::default();
        for path in paths {
            let model_err =
                |source| RegistryError::Model { path: path.clone(), source };
            let bytes = std::fs::read(&path)
                .map_err(|e| model_err(gpsurr_core::Error::Io { path: path.clone(), source: e }))?;
            let text = String::from_utf8(bytes.clone())
                .map_err(|e| model_err(gpsurr_core::Error::Corrupt(e.to_string())))?;
            let model = model_file::from_json(&text).map_err(model_err)?;
            let created_at = serde_json::from_str::<serde_json::Value>(&text)
                .ok()
                .and_then(|v| v.get("created_at")?.as_str().map(String::from));
            let id = path.file_stem().unwrap().to_string_lossy().into_owned();
            log::info!("loaded model '{id}' ({}) from {}", model.kind(), path.display());
            reg.entries.insert(
                id,
                ModelEntry {
                    model,
                    file_sha256: hex::encode(Sha256::digest(&bytes)),
                    path,
                    created_at,
                },
            );
        }
        Ok(reg)
    }

    pub fn insert(&mut self, model_id: impl Into<String>, model: AnyModel) {
        self.entries.insert(
            model_id.into(),
            ModelEntry { model, path: PathBuf::new(), created_at: None, file_sha256: String::new() },
        );
    }

    pub fn get(&self, model_id: &str) -> Option<&ModelEntry> {
        self.entries.get(model_id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sorted by model id.
    pub fn infos(&self) -> Vec<ModelInfo> {
        self.entries.iter().map(|(id, e)| e.info(id)).collect()
    }
}
