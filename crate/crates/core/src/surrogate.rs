//! Either kind of fitted surrogate, with JSON persistence.

use std::path::Path;

use crate::designs::Design;
use crate::error::{Error, Result};
use crate::gp::{GpModel, GpModelFile};
use crate::polychaos::{PceModel, PceModelFile};

pub enum Surrogate {
    Pce(PceModel),
    Gp(Box<GpModel>),
}

impl Surrogate {
    pub fn to_json(&self) -> Result<String> {
        Ok(match self {
            Surrogate::Pce(m) => serde_json::to_string_pretty(&PceModelFile::from(m))?,
            Surrogate::Gp(m) => serde_json::to_string_pretty(&GpModelFile::from(m.as_ref()))?,
        })
    }

    /// Parse a model file, dispatching on its `kind` field.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value.get("kind").and_then(|k| k.as_str()) {
            Some("pce") => Ok(Surrogate::Pce(serde_json::from_value::<PceModelFile>(value)?.try_into()?)),
            Some("gp") => Ok(Surrogate::Gp(Box::new(
                serde_json::from_value::<GpModelFile>(value)?.try_into()?,
            ))),
            Some(other) => Err(Error::InvalidInput(format!("unknown model kind '{other}'"))),
            None => Err(Error::InvalidInput("model file has no 'kind' field".into())),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn dim(&self) -> usize {
        match self {
            Surrogate::Pce(m) => m.basis().dim(),
            Surrogate::Gp(m) => m.design().dim(),
        }
    }

    pub fn predict(&self, z: &[f64]) -> f64 {
        match self {
            Surrogate::Pce(m) => m.predict(z),
            Surrogate::Gp(m) => m.predict_mean(z),
        }
    }

    pub fn predict_design(&self, design: &Design) -> Result<Vec<f64>> {
        match self {
            Surrogate::Pce(m) => m.predict_design(design),
            Surrogate::Gp(m) => {
                if design.dim() != m.design().dim() {
                    return Err(Error::DimensionMismatch {
                        expected: m.design().dim(),
                        got: design.dim(),
                    });
                }
                Ok(m.predict_design(design))
            }
        }
    }
}
