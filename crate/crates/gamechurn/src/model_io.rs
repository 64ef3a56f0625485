//! Self-describing JSON model files.

use std::io::{BufReader, Write};
use std::path::Path;

use gamechurn_core::models::{Model, MODEL_FORMAT_VERSION};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::{create, open};

/// What the model output means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetKind {
    /// Churn probability.
    Churn,
    /// Regression on `ln(1 + survival_days)`.
    SurvivalLog1p,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub target: TargetKind,
    /// Class threshold applied to churn probabilities.
    pub threshold: f64,
    #[serde(flatten)]
    pub model: Model,
}

impl ModelFile {
    pub fn new(target: TargetKind, threshold: f64, model: Model) -> Self {
        ModelFile { target, threshold, model }
    }
}

pub fn write_model_file(path: &Path, model: &ModelFile) -> Result<()> {
    let mut f = std::io::BufWriter::new(create(path)?);
    serde_json::to_writer_pretty(&mut f, model)?;
    writeln!(f).and_then(|_| f.flush()).map_err(|e| Error::io(path, e))
}

/// Reads a model file; tree depth is not limited by the JSON parser.
pub fn read_model_file(path: &Path) -> Result<ModelFile> {
    let mut de = serde_json::Deserializer::from_reader(BufReader::new(open(path)?));
    de.disable_recursion_limit();
    let model = ModelFile::deserialize(&mut de)?;
    de.end()?;
    if model.model.format_version() != MODEL_FORMAT_VERSION {
        return Err(Error::format(format!("unsupported model format_version {}", model.model.format_version())));
    }
    Ok(model)
}
