use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Thresholds and weights shared across the pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CLConfig {
    /// Working-memory capacity in simultaneously live variables.
    pub capacity: usize,
    /// Maximum characters per line, indentation included.
    pub line_limit: usize,
    /// Call-stack frames tolerated before the score is charged.
    pub depth_budget: usize,
    pub w_nest: f64,
    pub w_wm: f64,
    pub w_call: f64,
    pub w_line: f64,
    pub max_iters: usize,
    pub fuzz_trials: usize,
    pub seed: u64,
}

impl Default for CLConfig {
    fn default() -> Self {
        CLConfig {
            capacity: 5,
            line_limit: 40,
            depth_budget: 3,
            w_nest: 1.0,
            w_wm: 1.0,
            w_call: 1.0,
            w_line: 1.0,
            max_iters: 100,
            fuzz_trials: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{0} must be positive")]
    NotPositive(&'static str),
    #[error("weight {0} must be a finite non-negative number")]
    BadWeight(&'static str),
    #[error("at least one weight must be non-zero")]
    AllWeightsZero,
}

impl CLConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, value) in [
            ("capacity", self.capacity),
            ("line_limit", self.line_limit),
            ("depth_budget", self.depth_budget),
        ] {
            if value == 0 {
                return Err(ConfigError::NotPositive(name));
            }
        }
        let weights = [("w_nest", self.w_nest), ("w_wm", self.w_wm), ("w_call", self.w_call), ("w_line", self.w_line)];
        for (name, w) in weights {
            if !w.is_finite() || w < 0.0 {
                return Err(ConfigError::BadWeight(name));
            }
        }
        if weights.iter().all(|(_, w)| *w == 0.0) {
            return Err(ConfigError::AllWeightsZero);
        }
        Ok(())
    }
}
