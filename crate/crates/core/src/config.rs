//! Run settings shared by the command-line front end and the self-test harness.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{NumericConfig, VolumeEngine};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// `None` picks the per-dimension default of [`NumericConfig::for_dim`].
    pub tol: Option<f64>,
    pub mc_samples: u64,
    pub seed: u64,
    pub trials: usize,
    #[serde(default)]
    pub engine: VolumeEngine,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { tol: None, mc_samples: 2_000_000, seed: 42, trials: 10, engine: VolumeEngine::Auto }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::Config(format!("tol must be positive, got {t}")));
            }
        }
        if self.mc_samples < 1000 {
            return Err(Error::Config(format!("mc_samples must be at least 1000, got {}", self.mc_samples)));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        Ok(())
    }

    pub fn numeric(&self, n: usize) -> NumericConfig {
        let base = NumericConfig::for_dim(n);
        NumericConfig {
            tol: self.tol.unwrap_or(base.tol),
            mc_samples: self.mc_samples,
            seed: self.seed,
            engine: self.engine,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_dimension() {
        let c = RunConfig::default();
        c.validate().unwrap();
        assert_eq!(c.numeric(3).tol, 1e-9);
        assert_eq!(c.numeric(4).tol, 1e-3);
        let c = RunConfig { tol: Some(1e-5), ..c };
        assert_eq!(c.numeric(2).tol, 1e-5);
    }

    #[test]
    fn rejects_bad_values() {
        let bad = [
            RunConfig { tol: Some(0.0), ..Default::default() },
            RunConfig { tol: Some(f64::NAN), ..Default::default() },
            RunConfig { mc_samples: 999, ..Default::default() },
            RunConfig { trials: 0, ..Default::default() },
        ];
        for c in bad {
            assert!(matches!(c.validate(), Err(Error::Config(_))));
        }
    }
}
