//! Bid-price estimators trained on observation sets.
//!
//! Two interchangeable estimators map `(seat index, checkpoint day)` to a
//! bid price: a feedforward network trained with minibatch Adam, and a
//! transparent per-cell average used as a sanity baseline. Fitted models
//! predict at checkpoint days; [`FittedEstimator::expand_to_daily`] fills the
//! remaining days of the horizon by linear interpolation to produce a full
//! bid-price matrix a simulator can consume.

mod network;

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::bid_matrix::{BidPriceMatrix, Origin};
use crate::error::{Error, Result};
use crate::observations::{DcpGrid, ObservationSet};
use crate::rng::{self, Rng};

use network::{Mlp, Trainer};

/// Output nonlinearity of the network; both keep predictions nonnegative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputActivation {
    Relu,
    Softplus,
}

/// Network architecture and training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// Hidden layer widths, input to output.
    pub hidden_layers: Vec<usize>,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// L2 penalty coefficient on weights (biases are not penalized).
    pub regularization: f64,
    pub output_activation: OutputActivation,
    /// Stop after this many epochs without validation improvement.
    pub patience: usize,
    pub max_epochs: usize,
    /// Fraction of flights (not rows) held out for validation.
    pub validation_fraction: f64,
    pub seed: u64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            hidden_layers: vec![512, 8, 32],
            batch_size: 128,
            learning_rate: 1e-3,
            regularization: 1e-3,
            output_activation: OutputActivation::Softplus,
            patience: 5,
            max_epochs: 500,
            validation_fraction: 0.2,
            seed: 0,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_layers.is_empty() || self.hidden_layers.contains(&0) {
            return Err(Error::invalid_parameter(
                "hidden layers must be nonempty with positive widths",
            ));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid_parameter("batch size must be positive"));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::invalid_parameter(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !self.regularization.is_finite() || self.regularization < 0.0 {
            return Err(Error::invalid_parameter(format!(
                "regularization must be nonnegative, got {}",
                self.regularization
            )));
        }
        if self.patience == 0 {
            return Err(Error::invalid_parameter("patience must be at least 1"));
        }
        if self.max_epochs == 0 {
            return Err(Error::invalid_parameter("max epochs must be at least 1"));
        }
        if !self.validation_fraction.is_finite()
            || !(0.0..1.0).contains(&self.validation_fraction)
        {
            return Err(Error::invalid_parameter(format!(
                "validation fraction must lie in [0, 1), got {}",
                self.validation_fraction
            )));
        }
        Ok(())
    }
}

/// Affine feature standardization fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FeatureScaler {
    mean: [f64; 2],
    std: [f64; 2],
}

impl FeatureScaler {
    fn fit(features: &[[f64; 2]]) -> FeatureScaler {
        let n = features.len().max(1) as f64;
        let mut mean = [0.0f64; 2];
        for f in features {
            mean[0] += f[0];
            mean[1] += f[1];
        }
        mean[0] /= n;
        mean[1] /= n;
        let mut var = [0.0f64; 2];
        for f in features {
            var[0] += (f[0] - mean[0]).powi(2);
            var[1] += (f[1] - mean[1]).powi(2);
        }
        let std = [
            (var[0] / n).sqrt().max(f64::EPSILON), // constant features pass through
            (var[1] / n).sqrt().max(f64::EPSILON),
        ];
        FeatureScaler { mean, std }
    }

    fn apply(&self, raw: [f64; 2]) -> [f32; 2] {
        [
            ((raw[0] - self.mean[0]) / self.std[0]) as f32,
            ((raw[1] - self.mean[1]) / self.std[1]) as f32,
        ]
    }
}

/// Network estimator: scaler plus trained weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeuralEstimator {
    capacity: u32,
    config: EstimatorConfig,
    scaler: FeatureScaler,
    net: Mlp,
}

/// Per-(seat, checkpoint) mean of the training targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageEstimator {
    capacity: u32,
    /// Sorted by (capacity_index, dcp) for binary search.
    cells: Vec<CellMean>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct CellMean {
    capacity_index: u32,
    dcp: u32,
    mean: f64,
}

/// A trained bid-price estimator of either kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FittedEstimator {
    Neural(NeuralEstimator),
    SimpleAverage(AverageEstimator),
}

/// Splits flight indices into (train, validation), deterministically in
/// `seed`. The validation side gets `floor(fraction * n)` flights, so tiny
/// sets may end up with no holdout at all.
pub fn flight_split(n_flights: usize, fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..n_flights).collect();
    let mut rng = rng::rng_from_seed(seed);
    shuffle(&mut order, &mut rng);
    let n_val = (fraction * n_flights as f64).floor() as usize;
    let val = order[..n_val].to_vec();
    let train = order[n_val..].to_vec();
    (train, val)
}

/// Fisher-Yates shuffle driven by our portable generator.
fn shuffle<T>(items: &mut [T], rng: &mut Rng) {
    for i in (1..items.len()).rev() {
        // Unbiased enough for shuffling: 53-bit uniform scaled to i+1.
        let j = (rng::unit(rng) * (i + 1) as f64) as usize;
        items.swap(i, j.min(i));
    }
}

/// Trains the network estimator on an observation set.
///
/// Flights (not rows) are split into train and validation sides; features
/// are standardized with training-side statistics; minibatch Adam runs until
/// `max_epochs` or until validation loss stops improving for `patience`
/// epochs, whichever is first; the weights kept are the ones from the best
/// validation epoch. With no validation flights (tiny sets) the training
/// loss is monitored instead.
pub fn fit(set: &ObservationSet, config: &EstimatorConfig) -> Result<FittedEstimator> {
    config.validate()?;
    if set.rows().is_empty() {
        return Err(Error::invalid_input("observation set has no rows"));
    }

    let (train_flights, val_flights) =
        flight_split(set.n_flights(), config.validation_fraction, rng::sub_seed(config.seed, 0));
    let in_val = {
        let mut mask = vec![false; set.n_flights()];
        for &f in &val_flights {
            mask[f] = true;
        }
        mask
    };
    debug_assert!(
        train_flights.iter().all(|f| !in_val[*f]),
        "train and validation flights must be disjoint"
    );

    let mut train_features: Vec<[f64; 2]> = Vec::new();
    let mut train_targets: Vec<f32> = Vec::new();
    let mut val_features: Vec<[f64; 2]> = Vec::new();
    let mut val_targets: Vec<f32> = Vec::new();
    for row in set.rows() {
        let feature = [f64::from(row.capacity_index), f64::from(row.dcp)];
        if in_val[row.flight] {
            val_features.push(feature);
            val_targets.push(row.target as f32);
        } else {
            train_features.push(feature);
            train_targets.push(row.target as f32);
        }
    }
    let scaler = FeatureScaler::fit(&train_features);
    let to_matrix = |features: &[[f64; 2]]| {
        let mut x = Array2::<f32>::zeros((features.len(), 2));
        for (i, f) in features.iter().enumerate() {
            let s = scaler.apply(*f);
            x[[i, 0]] = s[0];
            x[[i, 1]] = s[1];
        }
        x
    };
    let x_train = to_matrix(&train_features);
    let x_val = to_matrix(&val_features);

    let mut sizes = Vec::with_capacity(config.hidden_layers.len() + 2);
    sizes.push(2);
    sizes.extend_from_slice(&config.hidden_layers);
    sizes.push(1);
    let mut init_rng = rng::rng_from_seed(rng::sub_seed(config.seed, 1));
    let net = Mlp::new(&sizes, config.output_activation, &mut init_rng);
    let mut trainer = Trainer::new(net, config.learning_rate, config.regularization);

    let n_train = train_targets.len();
    let mut order: Vec<usize> = (0..n_train).collect();
    let mut shuffle_rng = rng::rng_from_seed(rng::sub_seed(config.seed, 2));
    let monitor_validation = !val_targets.is_empty();

    let mut best_loss = f64::INFINITY;
    let mut best_net = trainer.net.clone();
    let mut stale_epochs = 0usize;
    for epoch in 0..config.max_epochs {
        shuffle(&mut order, &mut shuffle_rng);
        for batch in order.chunks(config.batch_size) {
            let mut xb = Array2::<f32>::zeros((batch.len(), 2));
            let mut yb = Array2::<f32>::zeros((batch.len(), 1));
            for (r, &idx) in batch.iter().enumerate() {
                xb[[r, 0]] = x_train[[idx, 0]];
                xb[[r, 1]] = x_train[[idx, 1]];
                yb[[r, 0]] = train_targets[idx];
            }
            let loss = trainer.train_batch(&xb, &yb);
            if !loss.is_finite() {
                return Err(Error::Estimator(format!(
                    "training diverged at epoch {epoch}: batch loss {loss}"
                )));
            }
        }
        let monitored = if monitor_validation {
            trainer.net.mse(&x_val, &val_targets)
        } else {
            trainer.net.mse(&x_train, &train_targets)
        };
        if !monitored.is_finite() {
            return Err(Error::Estimator(format!(
                "training diverged at epoch {epoch}: monitored loss {monitored}"
            )));
        }
        if monitored < best_loss {
            best_loss = monitored;
            best_net = trainer.net.clone();
            stale_epochs = 0;
        } else {
            stale_epochs += 1;
            if stale_epochs >= config.patience {
                break;
            }
        }
    }

    Ok(FittedEstimator::Neural(NeuralEstimator {
        capacity: set.capacity(),
        config: config.clone(),
        scaler,
        net: best_net,
    }))
}

/// Per-cell target means: the transparent baseline estimator.
pub fn fit_simple_average(set: &ObservationSet) -> Result<FittedEstimator> {
    if set.rows().is_empty() {
        return Err(Error::invalid_input("observation set has no rows"));
    }
    let mut sums: std::collections::BTreeMap<(u32, u32), (f64, u64)> =
        std::collections::BTreeMap::new();
    for row in set.rows() {
        let entry = sums.entry((row.capacity_index, row.dcp)).or_insert((0.0, 0));
        entry.0 += row.target;
        entry.1 += 1;
    }
    let cells = sums
        .into_iter()
        .map(|((capacity_index, dcp), (sum, count))| CellMean {
            capacity_index,
            dcp,
            mean: sum / count as f64,
        })
        .collect();
    Ok(FittedEstimator::SimpleAverage(AverageEstimator { capacity: set.capacity(), cells }))
}

impl FittedEstimator {
    /// Seats covered by the training data.
    pub fn capacity(&self) -> u32 {
        match self {
            FittedEstimator::Neural(n) => n.capacity,
            FittedEstimator::SimpleAverage(a) => a.capacity,
        }
    }

    /// Predicted bid price for the given seat index at a checkpoint day.
    ///
    /// The seat index must lie within the trained capacity range; the
    /// network extrapolates freely over days, while the average estimator
    /// only answers at checkpoints it saw during training.
    pub fn predict_bid(&self, remaining: u32, dcp: u32) -> Result<f64> {
        if remaining == 0 || remaining > self.capacity() {
            return Err(Error::out_of_range(format!(
                "seat index {remaining} outside 1..={}",
                self.capacity()
            )));
        }
        match self {
            FittedEstimator::Neural(model) => {
                let scaled = model.scaler.apply([f64::from(remaining), f64::from(dcp)]);
                let x = Array2::from_shape_vec((1, 2), scaled.to_vec())
                    .expect("1x2 shape matches data");
                Ok(f64::from(model.net.forward(&x)[[0, 0]]))
            }
            FittedEstimator::SimpleAverage(model) => model
                .cells
                .binary_search_by_key(&(remaining, dcp), |c| (c.capacity_index, c.dcp))
                .map(|i| model.cells[i].mean)
                .map_err(|_| {
                    Error::out_of_range(format!(
                        "no training cell for seat {remaining} at checkpoint day {dcp}"
                    ))
                }),
        }
    }

    /// Builds a full daily bid-price matrix from checkpoint predictions:
    /// linear interpolation between checkpoints, held constant outside the
    /// checkpoint range, floored at zero.
    pub fn expand_to_daily(
        &self,
        capacity: u32,
        horizon_days: u32,
        grid: &DcpGrid,
    ) -> Result<BidPriceMatrix> {
        if capacity == 0 || horizon_days == 0 {
            return Err(Error::invalid_input("matrix dimensions must be at least 1x1"));
        }
        if grid.days()[0] >= horizon_days {
            return Err(Error::invalid_input(format!(
                "checkpoint day {} outside a {horizon_days}-day horizon",
                grid.days()[0]
            )));
        }
        let days = grid.days();
        let t = horizon_days as usize;
        let mut values = vec![0.0f64; capacity as usize * t];
        for x in 1..=capacity {
            let preds: Vec<f64> =
                days.iter().map(|&d| self.predict_bid(x, d)).collect::<Result<_>>()?;
            let row = &mut values[(x as usize - 1) * t..x as usize * t];
            for (day, slot) in row.iter_mut().enumerate() {
                let day = day as u32;
                let value = if day >= days[0] {
                    preds[0]
                } else if day <= *days.last().expect("grid is nonempty") {
                    *preds.last().expect("grid is nonempty")
                } else {
                    // Bracketing checkpoints: days[j] > day > days[j+1].
                    let j = days.windows(2).position(|w| w[0] > day && day > w[1]).map_or_else(
                        || {
                            days.iter()
                                .position(|&d| d == day)
                                .expect("day is inside the checkpoint range")
                        },
                        |j| j,
                    );
                    if days[j] == day {
                        preds[j]
                    } else {
                        let span = f64::from(days[j] - days[j + 1]);
                        let w = f64::from(day - days[j + 1]) / span;
                        w * preds[j] + (1.0 - w) * preds[j + 1]
                    }
                };
                *slot = value.max(0.0);
            }
        }
        BidPriceMatrix::from_values(capacity, horizon_days, Origin::DataDriven, values)
    }

    /// Serializes the model as versioned JSON.
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path)?;
        let writer = BufWriter::new(file);
        serde_json::to_writer(writer, &ModelFile { format_version: FORMAT_VERSION, model: self })
            .map_err(|e| Error::Parse(format!("serializing model: {e}")))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<FittedEstimator> {
        let file = File::open(path)?;
        let reader = BufReader::new(file);
        let parsed: OwnedModelFile = serde_json::from_reader(reader)
            .map_err(|e| Error::Parse(format!("reading model: {e}")))?;
        if parsed.format_version != FORMAT_VERSION {
            return Err(Error::parse(format!(
                "unsupported model format version {} (expected {FORMAT_VERSION})",
                parsed.format_version
            )));
        }
        Ok(parsed.model)
    }
}

const FORMAT_VERSION: u32 = 1;

#[derive(Serialize)]
struct ModelFile<'a> {
    format_version: u32,
    model: &'a FittedEstimator,
}

#[derive(Deserialize)]
struct OwnedModelFile {
    format_version: u32,
    model: FittedEstimator,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observations::{assemble_training_set, FlightBookings};

    fn small_config() -> EstimatorConfig {
        EstimatorConfig {
            hidden_layers: vec![32, 16],
            batch_size: 64,
            learning_rate: 0.01,
            max_epochs: 800,
            patience: 50,
            ..EstimatorConfig::default()
        }
    }

    fn constant_target_set(n_flights: usize, capacity: u32, value: f64) -> ObservationSet {
        // Flights fully booked at one price produce constant targets at
        // every seat that sold; keep bookings = capacity so all targets
        // equal `value`.
        let grid = DcpGrid::new(vec![9, 4, 0]).unwrap();
        let flights: Vec<FlightBookings> = (0..n_flights)
            .map(|i| {
                let prices = vec![value; capacity as usize];
                let days = vec![0u32; capacity as usize];
                FlightBookings::new(format!("f{i}"), prices, days)
            })
            .collect();
        assemble_training_set(&flights, capacity, &grid).unwrap()
    }

    #[test]
    fn default_config_matches_published_taste() {
        let config = EstimatorConfig::default();
        assert_eq!(config.hidden_layers, vec![512, 8, 32]);
        assert_eq!(config.batch_size, 128);
        assert_eq!(config.learning_rate, 1e-3);
        assert_eq!(config.regularization, 1e-3);
        assert_eq!(config.output_activation, OutputActivation::Softplus);
        assert_eq!(config.patience, 5);
        config.validate().unwrap();
    }

    #[test]
    fn config_validation_rejects_nonsense() {
        let ok = EstimatorConfig::default();
        assert!(EstimatorConfig { hidden_layers: vec![], ..ok.clone() }.validate().is_err());
        assert!(EstimatorConfig { hidden_layers: vec![8, 0], ..ok.clone() }.validate().is_err());
        assert!(EstimatorConfig { batch_size: 0, ..ok.clone() }.validate().is_err());
        assert!(EstimatorConfig { learning_rate: 0.0, ..ok.clone() }.validate().is_err());
        assert!(EstimatorConfig { regularization: -0.1, ..ok.clone() }.validate().is_err());
        assert!(EstimatorConfig { patience: 0, ..ok.clone() }.validate().is_err());
        assert!(EstimatorConfig { max_epochs: 0, ..ok.clone() }.validate().is_err());
        assert!(EstimatorConfig { validation_fraction: 1.0, ..ok }.validate().is_err());
    }

    #[test]
    fn flight_split_is_disjoint_deterministic_and_sized() {
        let (train, val) = flight_split(10, 0.2, 7);
        assert_eq!(val.len(), 2);
        assert_eq!(train.len(), 8);
        let mut all: Vec<usize> = train.iter().chain(&val).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        assert_eq!(flight_split(10, 0.2, 7), (train, val));
        // Tiny sets may have no holdout.
        let (train, val) = flight_split(2, 0.2, 7);
        assert_eq!(train.len(), 2);
        assert!(val.is_empty());
    }

    #[test]
    fn simple_average_reproduces_cell_means() {
        let grid = DcpGrid::new(vec![2]).unwrap();
        let flights = vec![
            FlightBookings::new("f1", vec![80.0, 70.0, 90.0], vec![2, 1, 0]),
            FlightBookings::new("f2", vec![80.0, 90.0, 70.0, 70.0], vec![2, 2, 1, 0]),
        ];
        let set = assemble_training_set(&flights, 5, &grid).unwrap();
        let model = fit_simple_average(&set).unwrap();
        assert_eq!(model.predict_bid(1, 2).unwrap(), 90.0);
        assert_eq!(model.predict_bid(2, 2).unwrap(), 80.0);
        assert_eq!(model.predict_bid(3, 2).unwrap(), 70.0);
        assert_eq!(model.predict_bid(4, 2).unwrap(), 35.0);
        assert_eq!(model.predict_bid(5, 2).unwrap(), 0.0);
        // Unseen checkpoint or seat index: out of range.
        assert!(model.predict_bid(1, 3).is_err());
        assert!(model.predict_bid(6, 2).is_err());
        assert!(model.predict_bid(0, 2).is_err());
    }

    #[test]
    fn simple_average_matches_brute_force_grouping() {
        use std::collections::HashMap;
        let grid = DcpGrid::new(vec![7, 3, 1]).unwrap();
        let mut rng = rng::rng_from_seed(41);
        let flights: Vec<FlightBookings> = (0..6)
            .map(|i| {
                let n = 2 + (rng::unit(&mut rng) * 6.0) as usize;
                let prices: Vec<f64> =
                    (0..n).map(|_| (rng::unit(&mut rng) * 200.0).round()).collect();
                let days: Vec<u32> = (0..n).map(|_| (rng::unit(&mut rng) * 8.0) as u32).collect();
                FlightBookings::new(format!("f{i}"), prices, days)
            })
            .collect();
        let set = assemble_training_set(&flights, 4, &grid).unwrap();
        let model = fit_simple_average(&set).unwrap();
        let mut groups: HashMap<(u32, u32), Vec<f64>> = HashMap::new();
        for row in set.rows() {
            groups.entry((row.capacity_index, row.dcp)).or_default().push(row.target);
        }
        for ((x, d), targets) in groups {
            let mean = targets.iter().sum::<f64>() / targets.len() as f64;
            assert!((model.predict_bid(x, d).unwrap() - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn network_learns_a_constant_target() {
        let value = 77.0;
        let set = constant_target_set(10, 5, value);
        let model = fit(&set, &small_config()).unwrap();
        for x in 1..=5u32 {
            for d in [9, 4, 0] {
                let pred = model.predict_bid(x, d).unwrap();
                assert!(
                    (pred - value).abs() <= 0.01 * value,
                    "prediction {pred} at ({x}, {d}) should be within 1% of {value}"
                );
            }
        }
    }

    #[test]
    fn network_trained_on_zeros_predicts_near_zero() {
        let grid = DcpGrid::new(vec![9, 4, 0]).unwrap();
        let flights: Vec<FlightBookings> =
            (0..10).map(|i| FlightBookings::new(format!("f{i}"), vec![], vec![])).collect();
        let set = assemble_training_set(&flights, 5, &grid).unwrap();
        let config = EstimatorConfig { max_epochs: 300, ..small_config() };
        let model = fit(&set, &config).unwrap();
        for x in 1..=5u32 {
            let pred = model.predict_bid(x, 4).unwrap();
            assert!((0.0..=1.0).contains(&pred), "prediction {pred} should collapse toward 0");
        }
    }

    #[test]
    fn network_fit_is_deterministic_in_seed() {
        let set = constant_target_set(6, 4, 50.0);
        let config = EstimatorConfig { max_epochs: 40, ..small_config() };
        let a = fit(&set, &config).unwrap();
        let b = fit(&set, &config).unwrap();
        for x in 1..=4u32 {
            for d in 0..10u32 {
                assert_eq!(
                    a.predict_bid(x, d).unwrap(),
                    b.predict_bid(x, d).unwrap(),
                    "refitting with one seed must reproduce predictions exactly"
                );
            }
        }
        let other = fit(&set, &EstimatorConfig { seed: 1, ..config }).unwrap();
        let same = (1..=4u32)
            .all(|x| other.predict_bid(x, 5).unwrap() == a.predict_bid(x, 5).unwrap());
        assert!(!same, "a different seed should move the fit");
    }

    #[test]
    fn predictions_are_nonnegative_everywhere() {
        let set = constant_target_set(5, 4, 120.0);
        let config = EstimatorConfig { max_epochs: 30, ..small_config() };
        for output_activation in [OutputActivation::Softplus, OutputActivation::Relu] {
            let model = fit(&set, &EstimatorConfig { output_activation, ..config.clone() }).unwrap();
            for x in 1..=4u32 {
                for d in (0..200u32).step_by(17) {
                    assert!(model.predict_bid(x, d).unwrap() >= 0.0);
                }
            }
        }
    }

    #[test]
    fn expansion_interpolates_between_checkpoints() {
        // The average estimator gives exact control over checkpoint values.
        let grid = DcpGrid::new(vec![8, 4, 2]).unwrap();
        let cells = vec![
            CellMean { capacity_index: 1, dcp: 2, mean: 10.0 },
            CellMean { capacity_index: 1, dcp: 4, mean: 20.0 },
            CellMean { capacity_index: 1, dcp: 8, mean: 60.0 },
        ];
        let model = FittedEstimator::SimpleAverage(AverageEstimator { capacity: 1, cells });
        let matrix = model.expand_to_daily(1, 12, &grid).unwrap();
        // Checkpoint days match predictions exactly.
        assert_eq!(matrix.lookup(1, 8).unwrap(), 60.0);
        assert_eq!(matrix.lookup(1, 4).unwrap(), 20.0);
        assert_eq!(matrix.lookup(1, 2).unwrap(), 10.0);
        // Interior days interpolate linearly.
        assert_eq!(matrix.lookup(1, 6).unwrap(), 40.0);
        assert_eq!(matrix.lookup(1, 3).unwrap(), 15.0);
        // Outside the checkpoint range the ends are held constant.
        assert_eq!(matrix.lookup(1, 0).unwrap(), 10.0);
        assert_eq!(matrix.lookup(1, 1).unwrap(), 10.0);
        assert_eq!(matrix.lookup(1, 9).unwrap(), 60.0);
        assert_eq!(matrix.lookup(1, 11).unwrap(), 60.0);
        assert_eq!(matrix.origin(), Origin::DataDriven);
    }

    #[test]
    fn expansion_validates_geometry() {
        let set = constant_target_set(3, 2, 30.0);
        let model = fit_simple_average(&set).unwrap();
        let grid = DcpGrid::new(vec![9, 4, 0]).unwrap();
        // Checkpoint day 9 does not fit a 5-day horizon.
        assert!(model.expand_to_daily(2, 5, &grid).is_err());
        assert!(model.expand_to_daily(0, 10, &grid).is_err());
        // Seats beyond the trained capacity surface as out-of-range.
        assert!(model.expand_to_daily(3, 10, &grid).is_err());
    }

    #[test]
    fn estimator_example_fixture_recovers_top_seat_price() {
        let grid = DcpGrid::new(vec![2, 1, 0]).unwrap();
        let flights = vec![
            FlightBookings::new("f1", vec![90.0, 70.0, 80.0], vec![2, 1, 0]),
            FlightBookings::new("f2", vec![80.0, 90.0, 70.0, 70.0], vec![2, 2, 1, 0]),
        ];
        let set = assemble_training_set(&flights, 5, &grid).unwrap();
        // 30 rows in a single batch need a hotter learning rate and more
        // epochs than the production defaults to converge.
        let config = EstimatorConfig {
            learning_rate: 0.02,
            batch_size: 32,
            max_epochs: 4000,
            patience: 200,
            ..EstimatorConfig::default()
        };
        let model = fit(&set, &config).unwrap();
        let pred = model.predict_bid(1, 2).unwrap();
        assert!(
            (pred - 90.0).abs() <= 10.0,
            "top seat at the widest checkpoint should predict near 90, got {pred}"
        );
    }

    #[test]
    fn model_json_round_trip_preserves_predictions() {
        let dir = tempfile::tempdir().unwrap();
        let set = constant_target_set(5, 3, 64.0);
        let config = EstimatorConfig { max_epochs: 25, ..small_config() };
        for model in [fit(&set, &config).unwrap(), fit_simple_average(&set).unwrap()] {
            let path = dir.path().join("model.json");
            model.save(&path).unwrap();
            let back = FittedEstimator::load(&path).unwrap();
            assert_eq!(model, back);
            for x in 1..=3u32 {
                assert_eq!(back.predict_bid(x, 4).unwrap(), model.predict_bid(x, 4).unwrap());
            }
            // Serialization is stable byte for byte.
            let again = dir.path().join("model2.json");
            back.save(&again).unwrap();
            assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
        }
    }

    #[test]
    fn model_load_rejects_unknown_versions() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        std::fs::write(&path, r#"{"format_version":99,"model":{"kind":"simple_average","capacity":1,"cells":[]}}"#)
            .unwrap();
        assert!(FittedEstimator::load(&path).is_err());
    }

    #[test]
    fn fit_rejects_empty_sets_and_bad_configs() {
        let set = constant_target_set(3, 2, 10.0);
        let bad = EstimatorConfig { batch_size: 0, ..EstimatorConfig::default() };
        assert!(fit(&set, &bad).is_err());
    }
}
