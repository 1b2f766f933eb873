//! End-to-end experiment harness.
//!
//! Two study shapes are supported. The *baseline* study measures how much
//! revenue a booking-data-driven control gives up against the exact DP
//! control in the very market that generated its training data. The
//! *robustness* study shifts the market between training and evaluation
//! (different arrival rates) and adds a third contender: the DP control
//! solved with the stale training-period rate, i.e. what a forecast-based
//! system would fly with after a demand shift.

mod io;
mod run;
mod summary;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::EstimatorConfig;

pub use io::{read_results_csv, write_results_csv, write_summary_csv};
pub use run::{run_baseline, run_robustness};
pub use summary::{summarize, GroupBy, SummaryRow};

/// Time step used for every DP solve in the harness, in days.
pub const DP_TIME_STEP: f64 = 0.01;

/// Which control generated a result row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// Exact DP under the evaluation-period demand parameters.
    Optimal,
    /// Estimator trained on booking data, no demand parameters given.
    DataDriven,
    /// Exact DP under the training-period demand parameters.
    MisspecifiedDp,
}

impl Policy {
    pub const ALL: [Policy; 3] = [Policy::Optimal, Policy::DataDriven, Policy::MisspecifiedDp];

    pub fn as_str(&self) -> &'static str {
        match self {
            Policy::Optimal => "optimal",
            Policy::DataDriven => "data_driven",
            Policy::MisspecifiedDp => "misspecified_dp",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optimal" => Ok(Policy::Optimal),
            "data_driven" => Ok(Policy::DataDriven),
            "misspecified_dp" => Ok(Policy::MisspecifiedDp),
            other => Err(Error::parse(format!("unknown policy {other:?}"))),
        }
    }
}

/// Baseline study configuration: train and evaluate in the same market.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub n_scenarios: u32,
    /// Flights simulated per scenario, reused for training and evaluation.
    pub n_flights: u32,
    pub capacity: u32,
    pub horizon_days: u32,
    /// Number of checkpoint days the estimator trains on.
    pub n_dcps: u32,
    /// Arrival rate per day is drawn uniformly from this range per scenario.
    pub lambda_range: [f64; 2],
    /// Mean WTP increment above the floor.
    pub alpha: f64,
    /// WTP floor price.
    pub p0: f64,
    pub estimator: EstimatorConfig,
    pub master_seed: u64,
}

impl BaselineConfig {
    /// Workstation-sized study: minutes, not hours, on one core.
    pub fn desk() -> Self {
        BaselineConfig {
            n_scenarios: 20,
            n_flights: 100,
            capacity: 50,
            horizon_days: 100,
            n_dcps: 10,
            lambda_range: [3.6, 5.4],
            alpha: 100.0,
            p0: 50.0,
            estimator: EstimatorConfig::default(),
            master_seed: 42,
        }
    }

    /// Full-size study matching the published experiment dimensions.
    pub fn paper_scale() -> Self {
        BaselineConfig {
            n_scenarios: 100,
            n_flights: 300,
            capacity: 100,
            horizon_days: 300,
            lambda_range: [2.4, 3.6],
            ..BaselineConfig::desk()
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_common(
            self.n_scenarios,
            self.n_flights,
            self.capacity,
            self.horizon_days,
            self.n_dcps,
            self.alpha,
            self.p0,
        )?;
        validate_lambda_range("lambda_range", self.lambda_range)?;
        self.estimator.validate()
    }
}

/// Robustness study configuration: train in one market, evaluate in another.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessConfig {
    pub n_scenarios: u32,
    /// Flights per scenario, for the training phase and again for evaluation.
    pub n_flights: u32,
    pub capacity: u32,
    pub horizon_days: u32,
    pub n_dcps: u32,
    /// Training-period arrival rate range.
    pub lambda_train_range: [f64; 2],
    /// Evaluation-period arrival rate range, drawn independently.
    pub lambda_test_range: [f64; 2],
    pub alpha: f64,
    pub p0: f64,
    pub estimator: EstimatorConfig,
    pub master_seed: u64,
}

impl RobustnessConfig {
    /// Workstation-sized study. The training range is kept narrow and the
    /// test range wide so that 50 scenarios still populate the interesting
    /// demand-shift ratios (around 1, below 0.7, above 1.3) while the ratio
    /// support stays inside [0.5, 1.5].
    ///
    /// The training rate sits just above the point where capacity starts to
    /// bind (unconstrained-optimal sales of roughly 1.15x capacity at these
    /// alpha/p0/horizon settings). That straddles the regimes the ratio
    /// sweep is meant to exercise: when test demand collapses the seats go
    /// slack and every sensible control converges on the same revenue-
    /// maximizing price, while a demand surge makes capacity scarce enough
    /// that a control still assuming the training rate underprices badly.
    pub fn desk() -> Self {
        RobustnessConfig {
            n_scenarios: 50,
            n_flights: 100,
            capacity: 50,
            horizon_days: 100,
            n_dcps: 10,
            lambda_train_range: [0.93, 0.97],
            lambda_test_range: [0.49, 1.39],
            alpha: 100.0,
            p0: 50.0,
            estimator: EstimatorConfig::default(),
            master_seed: 42,
        }
    }

    /// Full-size study matching the published experiment dimensions.
    pub fn paper_scale() -> Self {
        RobustnessConfig {
            n_scenarios: 500,
            n_flights: 500,
            capacity: 100,
            horizon_days: 300,
            lambda_train_range: [2.4, 3.6],
            lambda_test_range: [1.8, 3.6],
            ..RobustnessConfig::desk()
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_common(
            self.n_scenarios,
            self.n_flights,
            self.capacity,
            self.horizon_days,
            self.n_dcps,
            self.alpha,
            self.p0,
        )?;
        validate_lambda_range("lambda_train_range", self.lambda_train_range)?;
        validate_lambda_range("lambda_test_range", self.lambda_test_range)?;
        self.estimator.validate()
    }
}

fn validate_common(
    n_scenarios: u32,
    n_flights: u32,
    capacity: u32,
    horizon_days: u32,
    n_dcps: u32,
    alpha: f64,
    p0: f64,
) -> Result<()> {
    if n_scenarios == 0 || n_flights == 0 {
        return Err(Error::invalid_parameter("need at least one scenario and one flight"));
    }
    if capacity == 0 || horizon_days == 0 {
        return Err(Error::invalid_parameter("capacity and horizon must be at least 1"));
    }
    if n_dcps == 0 || n_dcps > horizon_days {
        return Err(Error::invalid_parameter(format!(
            "checkpoint count {n_dcps} must lie in 1..={horizon_days}"
        )));
    }
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::invalid_parameter(format!(
            "WTP mean increment must be finite and positive, got {alpha}"
        )));
    }
    if !p0.is_finite() || p0 < 0.0 {
        return Err(Error::invalid_parameter(format!(
            "WTP floor must be finite and nonnegative, got {p0}"
        )));
    }
    Ok(())
}

fn validate_lambda_range(name: &str, range: [f64; 2]) -> Result<()> {
    let [lo, hi] = range;
    if !lo.is_finite() || !hi.is_finite() || lo <= 0.0 || hi < lo {
        return Err(Error::invalid_parameter(format!(
            "{name} must satisfy 0 < low <= high, got [{lo}, {hi}]"
        )));
    }
    if hi * DP_TIME_STEP > 0.1 {
        return Err(Error::invalid_parameter(format!(
            "{name} upper end {hi} too large for the DP time step {DP_TIME_STEP}"
        )));
    }
    Ok(())
}

/// Per-scenario, per-policy aggregate over the scenario's flights.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub scenario_id: u32,
    /// Arrival rate that generated the training data.
    pub lambda_train: f64,
    /// Arrival rate of the evaluation streams (same as `lambda_train` in the
    /// baseline study).
    pub lambda_test: f64,
    pub policy: Policy,
    pub mean_revenue: f64,
    pub mean_load_factor: f64,
    /// `(policy revenue - optimal revenue) / optimal revenue`.
    pub revenue_gap_vs_optimal: f64,
    /// Load-factor difference against the optimal policy, in fraction points.
    pub load_factor_gap_vs_optimal: f64,
}

/// A scenario the harness could not complete; the rest of the run proceeds.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFailure {
    pub scenario_id: u32,
    pub message: String,
}

/// Everything a study produced.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRun {
    /// Ordered by (scenario_id, policy).
    pub results: Vec<ExperimentResult>,
    pub failures: Vec<ScenarioFailure>,
}
