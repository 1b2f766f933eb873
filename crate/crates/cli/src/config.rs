//! Config-file overlays applied on top of the built-in presets.
//!
//! A config file is TOML whose keys mirror the experiment config structs
//! field for field; every key is optional and overrides the preset value.
//! The `estimator` table overrides individual hyperparameters the same way.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use rmbid_core::estimator::{EstimatorConfig, OutputActivation};
use rmbid_core::experiment::{BaselineConfig, RobustnessConfig};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverlay {
    pub n_scenarios: Option<u32>,
    pub n_flights: Option<u32>,
    pub capacity: Option<u32>,
    pub horizon_days: Option<u32>,
    pub n_dcps: Option<u32>,
    /// Baseline experiments only.
    pub lambda_range: Option<[f64; 2]>,
    /// Robustness experiments only.
    pub lambda_train_range: Option<[f64; 2]>,
    /// Robustness experiments only.
    pub lambda_test_range: Option<[f64; 2]>,
    pub alpha: Option<f64>,
    pub p0: Option<f64>,
    pub estimator: Option<EstimatorOverlay>,
    pub master_seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorOverlay {
    pub hidden_layers: Option<Vec<usize>>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
    pub regularization: Option<f64>,
    pub output_activation: Option<OutputActivation>,
    pub patience: Option<usize>,
    pub max_epochs: Option<usize>,
    pub validation_fraction: Option<f64>,
    pub seed: Option<u64>,
}

impl ConfigOverlay {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config file {}", path.display()))
    }

    pub fn apply_to_baseline(&self, config: &mut BaselineConfig) -> Result<()> {
        if self.lambda_train_range.is_some() || self.lambda_test_range.is_some() {
            bail!("lambda_train_range/lambda_test_range are robustness keys; baseline runs take lambda_range");
        }
        set(&mut config.n_scenarios, self.n_scenarios);
        set(&mut config.n_flights, self.n_flights);
        set(&mut config.capacity, self.capacity);
        set(&mut config.horizon_days, self.horizon_days);
        set(&mut config.n_dcps, self.n_dcps);
        set(&mut config.lambda_range, self.lambda_range);
        set(&mut config.alpha, self.alpha);
        set(&mut config.p0, self.p0);
        set(&mut config.master_seed, self.master_seed);
        if let Some(estimator) = &self.estimator {
            estimator.apply(&mut config.estimator);
        }
        Ok(())
    }

    pub fn apply_to_robustness(&self, config: &mut RobustnessConfig) -> Result<()> {
        if self.lambda_range.is_some() {
            bail!("lambda_range is a baseline key; robustness runs take lambda_train_range/lambda_test_range");
        }
        set(&mut config.n_scenarios, self.n_scenarios);
        set(&mut config.n_flights, self.n_flights);
        set(&mut config.capacity, self.capacity);
        set(&mut config.horizon_days, self.horizon_days);
        set(&mut config.n_dcps, self.n_dcps);
        set(&mut config.lambda_train_range, self.lambda_train_range);
        set(&mut config.lambda_test_range, self.lambda_test_range);
        set(&mut config.alpha, self.alpha);
        set(&mut config.p0, self.p0);
        set(&mut config.master_seed, self.master_seed);
        if let Some(estimator) = &self.estimator {
            estimator.apply(&mut config.estimator);
        }
        Ok(())
    }
}

impl EstimatorOverlay {
    pub fn apply(&self, config: &mut EstimatorConfig) {
        if let Some(layers) = &self.hidden_layers {
            config.hidden_layers = layers.clone();
        }
        set(&mut config.batch_size, self.batch_size);
        set(&mut config.learning_rate, self.learning_rate);
        set(&mut config.regularization, self.regularization);
        set(&mut config.output_activation, self.output_activation);
        set(&mut config.patience, self.patience);
        set(&mut config.max_epochs, self.max_epochs);
        set(&mut config.validation_fraction, self.validation_fraction);
        set(&mut config.seed, self.seed);
    }
}

fn set<T: Copy>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlay_overrides_only_present_keys() {
        let overlay: ConfigOverlay = toml::from_str(
            r#"
            n_scenarios = 3
            lambda_range = [1.0, 2.0]

            [estimator]
            max_epochs = 7
            output_activation = "relu"
            "#,
        )
        .unwrap();
        let mut config = BaselineConfig::desk();
        let flights_before = config.n_flights;
        overlay.apply_to_baseline(&mut config).unwrap();
        assert_eq!(config.n_scenarios, 3);
        assert_eq!(config.lambda_range, [1.0, 2.0]);
        assert_eq!(config.n_flights, flights_before);
        assert_eq!(config.estimator.max_epochs, 7);
        assert_eq!(config.estimator.output_activation, OutputActivation::Relu);
        assert_eq!(config.estimator.batch_size, EstimatorConfig::default().batch_size);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<ConfigOverlay>("n_scenario = 3").is_err());
    }

    #[test]
    fn lambda_keys_are_checked_per_experiment() {
        let overlay: ConfigOverlay =
            toml::from_str("lambda_train_range = [1.0, 2.0]").unwrap();
        assert!(overlay.apply_to_baseline(&mut BaselineConfig::desk()).is_err());
        let overlay: ConfigOverlay = toml::from_str("lambda_range = [1.0, 2.0]").unwrap();
        assert!(overlay.apply_to_robustness(&mut RobustnessConfig::desk()).is_err());
    }
}
