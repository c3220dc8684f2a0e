use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::simulator::SimulatorSpec;
use crate::designs::DesignClass;
use crate::domain::InputSpace;
use crate::error::{Error, Result};

/// Highest chaos order an experiment may request.
pub const MAX_ORDER: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurrogateMethod {
    /// Polynomial chaos by least squares on a Sobol design.
    PceReg,
    /// Polynomial chaos by spectral projection on a Gauss-Legendre grid.
    PceQuad,
    GpSe,
    GpMatern,
}

impl SurrogateMethod {
    pub const ALL: [SurrogateMethod; 4] = [
        SurrogateMethod::PceReg,
        SurrogateMethod::PceQuad,
        SurrogateMethod::GpSe,
        SurrogateMethod::GpMatern,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SurrogateMethod::PceReg => "pce-reg",
            SurrogateMethod::PceQuad => "pce-quad",
            SurrogateMethod::GpSe => "gp-se",
            SurrogateMethod::GpMatern => "gp-matern",
        }
    }

    pub fn is_gp(self) -> bool {
        matches!(self, SurrogateMethod::GpSe | SurrogateMethod::GpMatern)
    }

    /// Regression chaos runs on Sobol classes, projection only on grids.
    pub fn supports(self, class: DesignClass) -> bool {
        match self {
            SurrogateMethod::PceReg => class != DesignClass::TensorGrid,
            SurrogateMethod::PceQuad => class == DesignClass::TensorGrid,
            SurrogateMethod::GpSe | SurrogateMethod::GpMatern => true,
        }
    }
}

impl std::str::FromStr for SurrogateMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SurrogateMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown surrogate method '{s}'")))
    }
}

fn default_classes() -> Vec<DesignClass> {
    DesignClass::ALL.to_vec()
}

fn default_orders() -> Vec<u32> {
    vec![1, 2, 3, 4]
}

fn default_methods() -> Vec<SurrogateMethod> {
    SurrogateMethod::ALL.to_vec()
}

fn default_validation_size() -> usize {
    1000
}

fn default_replicates() -> usize {
    1000
}

fn default_gp_starts() -> usize {
    5
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("uqbench-out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Named inputs with bounds. Without it, `dimension` standard inputs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inputs: Option<InputSpace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    pub simulator: SimulatorSpec,
    #[serde(default = "default_classes")]
    pub classes: Vec<DesignClass>,
    #[serde(default = "default_orders")]
    pub orders: Vec<u32>,
    #[serde(default = "default_methods")]
    pub methods: Vec<SurrogateMethod>,
    #[serde(default = "default_validation_size")]
    pub validation_size: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_replicates")]
    pub bootstrap_replicates: usize,
    #[serde(default = "default_replicates")]
    pub posterior_samples: usize,
    #[serde(default = "default_gp_starts")]
    pub gp_starts: usize,
}

impl ExperimentConfig {
    /// Defaults for the given simulator on `n` standard inputs.
    pub fn new(simulator: SimulatorSpec, n: usize) -> Self {
        Self {
            inputs: None,
            dimension: Some(n),
            simulator,
            classes: default_classes(),
            orders: default_orders(),
            methods: default_methods(),
            validation_size: default_validation_size(),
            seed: 0,
            output_dir: default_output_dir(),
            bootstrap_replicates: default_replicates(),
            posterior_samples: default_replicates(),
            gp_starts: default_gp_starts(),
        }
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let config: Self = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn input_space(&self) -> Result<InputSpace> {
        match (&self.inputs, self.dimension) {
            (Some(space), Some(n)) if space.dim() != n => Err(Error::Config(format!(
                "'dimension' is {n} but 'inputs' has {} entries",
                space.dim()
            ))),
            (Some(space), _) => Ok(space.clone()),
            (None, Some(n)) => InputSpace::standard(n),
            (None, None) => Err(Error::Config("give either 'inputs' or 'dimension'".into())),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let space = self.input_space()?;
        self.simulator.validate(space.dim())?;
        if self.classes.is_empty() || self.orders.is_empty() || self.methods.is_empty() {
            return Err(Error::Config("classes, orders and methods must be non-empty".into()));
        }
        if let Some(p) = self.orders.iter().find(|&&p| p == 0 || p > MAX_ORDER) {
            return Err(Error::Config(format!("order {p} outside 1..={MAX_ORDER}")));
        }
        if self.validation_size < 2 {
            return Err(Error::Config("validation_size must be at least 2".into()));
        }
        if self.bootstrap_replicates < 100 {
            return Err(Error::Config("bootstrap_replicates must be at least 100".into()));
        }
        if self.gp_starts == 0 {
            return Err(Error::Config("gp_starts must be at least 1".into()));
        }
        if !self.cells().next().is_some() {
            return Err(Error::Config("no method is compatible with the chosen design classes".into()));
        }
        Ok(())
    }

    /// Every compatible (class, order, method) triple in output order.
    pub fn cells(&self) -> impl Iterator<Item = (DesignClass, u32, SurrogateMethod)> + '_ {
        let mut classes = self.classes.clone();
        classes.sort();
        classes.dedup();
        let mut orders = self.orders.clone();
        orders.sort();
        orders.dedup();
        let mut methods = self.methods.clone();
        methods.sort();
        methods.dedup();
        classes.into_iter().flat_map(move |c| {
            let methods = methods.clone();
            orders.clone().into_iter().flat_map(move |p| {
                methods
                    .clone()
                    .into_iter()
                    .filter(move |m| m.supports(c))
                    .map(move |m| (c, p, m))
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_cells() {
        let c: ExperimentConfig =
            serde_json::from_str(r#"{"dimension":2,"simulator":{"kind":"toy"}}"#).unwrap();
        c.validate().unwrap();
        // Per order: class 1 and 2 get pce-reg and two GPs, class 3 pce-quad and two GPs.
        assert_eq!(c.cells().count(), 4 * 9);
        assert!(c
            .cells()
            .all(|(class, _, m)| m != SurrogateMethod::PceQuad || class == DesignClass::TensorGrid));
        assert!(c
            .cells()
            .all(|(class, _, m)| m != SurrogateMethod::PceReg || class != DesignClass::TensorGrid));
    }

    #[test]
    fn rejects_bad_configs() {
        let parse = |s: &str| serde_json::from_str::<ExperimentConfig>(s).unwrap();
        assert!(parse(r#"{"dimension":2,"simulator":{"kind":"toy"},"orders":[5]}"#)
            .validate()
            .is_err());
        assert!(parse(r#"{"dimension":3,"simulator":{"kind":"toy"}}"#).validate().is_err());
        assert!(parse(r#"{"simulator":{"kind":"toy"}}"#).validate().is_err());
        assert!(parse(r#"{"dimension":2,"simulator":{"kind":"toy"},"classes":[3],"methods":["pce-reg"]}"#)
            .validate()
            .is_err());
        assert!(serde_json::from_str::<ExperimentConfig>(
            r#"{"dimension":2,"simulator":{"kind":"toy"},"classes":[4]}"#
        )
        .is_err());
    }
}
