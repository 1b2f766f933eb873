//! Scenario execution for the baseline and robustness studies.
//!
//! Seeds: scenario `i` of a run owns `sub_seed(master_seed, i)`, and
//! everything inside the scenario (rate draws, arrival streams, the model
//! fit) derives tagged children of that, so any scenario can be reproduced
//! in isolation and results are independent of thread scheduling. Scenario
//! failures are collected, not fatal: one degenerate draw should not sink a
//! night-long sweep.

use std::path::Path;

use crate::bid_matrix::BidPriceMatrix;
use crate::demand::DemandScenario;
use crate::dp::compute_bid_matrix;
use crate::error::Result;
use crate::estimator::{fit, EstimatorConfig, FittedEstimator};
use crate::exec;
use crate::observations::{
    assemble_training_set, build_dcp_grid, write_observations_csv, FlightBookings, ObservationSet,
};
use crate::rng;
use crate::simulator::{
    load_factor_gap, revenue_gap, sample_scenario_streams, simulate_on_streams, FlightOutcome,
    PolicyHandle,
};

use super::{
    BaselineConfig, ExperimentResult, ExperimentRun, Policy, RobustnessConfig, ScenarioFailure,
    DP_TIME_STEP,
};

// Tags for per-scenario child seeds.
const SEED_RATES: u64 = 0;
const SEED_TRAIN_STREAMS: u64 = 1;
const SEED_MODEL: u64 = 2;
const SEED_TEST_STREAMS: u64 = 3;

/// Runs the baseline study. When `artifact_dir` is given, per-scenario
/// observation sets and bid-price matrices are written there as they are
/// produced.
pub fn run_baseline(
    config: &BaselineConfig,
    artifact_dir: Option<&Path>,
) -> Result<ExperimentRun> {
    config.validate()?;
    if let Some(dir) = artifact_dir {
        std::fs::create_dir_all(dir)?;
    }
    let outcomes = exec::map_indexed(config.n_scenarios as usize, |i| {
        run_baseline_scenario(config, i as u32, artifact_dir)
    });
    Ok(collect(outcomes))
}

fn run_baseline_scenario(
    config: &BaselineConfig,
    scenario_id: u32,
    artifact_dir: Option<&Path>,
) -> Result<Vec<ExperimentResult>> {
    let scen_seed = rng::sub_seed(config.master_seed, u64::from(scenario_id));
    let mut rate_rng = rng::rng_from_seed(rng::sub_seed(scen_seed, SEED_RATES));
    let lambda =
        rng::uniform_in(&mut rate_rng, config.lambda_range[0], config.lambda_range[1]);
    let scenario = DemandScenario::new(
        lambda,
        config.alpha,
        config.p0,
        config.capacity,
        config.horizon_days,
    )?;

    let optimal_matrix = compute_bid_matrix(&scenario, DP_TIME_STEP)?;
    let optimal = PolicyHandle::new(optimal_matrix, config.alpha, config.p0)?;
    let streams = sample_scenario_streams(
        &scenario,
        config.n_flights,
        rng::sub_seed(scen_seed, SEED_TRAIN_STREAMS),
    )?;
    let optimal_outcomes = simulate_on_streams(&streams, std::slice::from_ref(&optimal))?
        .pop()
        .expect("one policy in, one outcome list out");

    let (model, observations) = train_on_outcomes(
        &optimal_outcomes,
        config.capacity,
        config.horizon_days,
        config.n_dcps,
        &config.estimator,
        scen_seed,
    )?;
    let grid = observations.grid().clone();
    let data_driven_matrix =
        model.expand_to_daily(config.capacity, config.horizon_days, &grid)?;
    let data_driven = PolicyHandle::new(data_driven_matrix, config.alpha, config.p0)?;
    let data_driven_outcomes = simulate_on_streams(&streams, std::slice::from_ref(&data_driven))?
        .pop()
        .expect("one policy in, one outcome list out");

    if let Some(dir) = artifact_dir {
        write_observations_csv(&observations, &dir.join(format!("observations_{scenario_id}.csv")))?;
        save_matrix(dir, scenario_id, Policy::Optimal, &optimal.matrix)?;
        save_matrix(dir, scenario_id, Policy::DataDriven, &data_driven.matrix)?;
    }

    let reference = Aggregate::over(&optimal_outcomes);
    let rows = [
        (Policy::Optimal, &optimal_outcomes),
        (Policy::DataDriven, &data_driven_outcomes),
    ]
    .into_iter()
    .map(|(policy, outcomes)| result_row(scenario_id, lambda, lambda, policy, outcomes, reference))
    .collect::<Result<Vec<_>>>()?;
    Ok(rows)
}

/// Runs the robustness study: train at one rate, evaluate at another, and
/// field the stale-parameter DP alongside.
pub fn run_robustness(
    config: &RobustnessConfig,
    artifact_dir: Option<&Path>,
) -> Result<ExperimentRun> {
    config.validate()?;
    if let Some(dir) = artifact_dir {
        std::fs::create_dir_all(dir)?;
    }
    let outcomes = exec::map_indexed(config.n_scenarios as usize, |i| {
        run_robustness_scenario(config, i as u32, artifact_dir)
    });
    Ok(collect(outcomes))
}

fn run_robustness_scenario(
    config: &RobustnessConfig,
    scenario_id: u32,
    artifact_dir: Option<&Path>,
) -> Result<Vec<ExperimentResult>> {
    let scen_seed = rng::sub_seed(config.master_seed, u64::from(scenario_id));
    let mut rate_rng = rng::rng_from_seed(rng::sub_seed(scen_seed, SEED_RATES));
    let lambda_train = rng::uniform_in(
        &mut rate_rng,
        config.lambda_train_range[0],
        config.lambda_train_range[1],
    );
    let lambda_test = rng::uniform_in(
        &mut rate_rng,
        config.lambda_test_range[0],
        config.lambda_test_range[1],
    );
    let train_scenario = DemandScenario::new(
        lambda_train,
        config.alpha,
        config.p0,
        config.capacity,
        config.horizon_days,
    )?;
    let test_scenario = DemandScenario { lambda_per_day: lambda_test, ..train_scenario };

    // Training phase: the carrier flies the DP tuned to the training-period
    // rate and records what books.
    let train_matrix = compute_bid_matrix(&train_scenario, DP_TIME_STEP)?;
    let train_policy = PolicyHandle::new(train_matrix, config.alpha, config.p0)?;
    let train_streams = sample_scenario_streams(
        &train_scenario,
        config.n_flights,
        rng::sub_seed(scen_seed, SEED_TRAIN_STREAMS),
    )?;
    let train_outcomes = simulate_on_streams(&train_streams, std::slice::from_ref(&train_policy))?
        .pop()
        .expect("one policy in, one outcome list out");
    let (model, observations) = train_on_outcomes(
        &train_outcomes,
        config.capacity,
        config.horizon_days,
        config.n_dcps,
        &config.estimator,
        scen_seed,
    )?;
    let grid = observations.grid().clone();
    let data_driven_matrix =
        model.expand_to_daily(config.capacity, config.horizon_days, &grid)?;

    // Evaluation phase: the demand level moves; the stale DP keeps its
    // training-period matrix while the optimal policy re-solves.
    let optimal_matrix = compute_bid_matrix(&test_scenario, DP_TIME_STEP)?;
    let policies = [
        PolicyHandle::new(optimal_matrix, config.alpha, config.p0)?,
        PolicyHandle::new(data_driven_matrix, config.alpha, config.p0)?,
        train_policy,
    ];
    let test_streams = sample_scenario_streams(
        &test_scenario,
        config.n_flights,
        rng::sub_seed(scen_seed, SEED_TEST_STREAMS),
    )?;
    let by_policy = simulate_on_streams(&test_streams, &policies)?;

    if let Some(dir) = artifact_dir {
        write_observations_csv(&observations, &dir.join(format!("observations_{scenario_id}.csv")))?;
        for (policy, handle) in Policy::ALL.iter().zip(&policies) {
            save_matrix(dir, scenario_id, *policy, &handle.matrix)?;
        }
    }

    let reference = Aggregate::over(&by_policy[0]);
    Policy::ALL
        .iter()
        .zip(&by_policy)
        .map(|(policy, outcomes)| {
            result_row(scenario_id, lambda_train, lambda_test, *policy, outcomes, reference)
        })
        .collect()
}

/// Builds the observation set from simulated bookings and fits the network,
/// seeding the fit from the scenario (offset by the configured seed so a
/// config-level seed change moves every scenario).
fn train_on_outcomes(
    outcomes: &[FlightOutcome],
    capacity: u32,
    horizon_days: u32,
    n_dcps: u32,
    estimator: &EstimatorConfig,
    scen_seed: u64,
) -> Result<(FittedEstimator, ObservationSet)> {
    let flights: Vec<FlightBookings> = outcomes
        .iter()
        .enumerate()
        .map(|(i, outcome)| {
            FlightBookings::new(
                i.to_string(),
                outcome.bookings.iter().map(|b| b.price).collect(),
                outcome.bookings.iter().map(|b| b.days_to_departure).collect(),
            )
        })
        .collect();
    let grid = build_dcp_grid(horizon_days, n_dcps)?;
    let observations = assemble_training_set(&flights, capacity, &grid)?;
    let config = EstimatorConfig {
        seed: rng::sub_seed(scen_seed, SEED_MODEL).wrapping_add(estimator.seed),
        ..estimator.clone()
    };
    let model = fit(&observations, &config)?;
    Ok((model, observations))
}

#[derive(Clone, Copy)]
struct Aggregate {
    mean_revenue: f64,
    mean_load_factor: f64,
}

impl Aggregate {
    fn over(outcomes: &[FlightOutcome]) -> Aggregate {
        let n = outcomes.len().max(1) as f64;
        Aggregate {
            mean_revenue: outcomes.iter().map(|o| o.revenue).sum::<f64>() / n,
            mean_load_factor: outcomes.iter().map(|o| o.load_factor).sum::<f64>() / n,
        }
    }
}

fn result_row(
    scenario_id: u32,
    lambda_train: f64,
    lambda_test: f64,
    policy: Policy,
    outcomes: &[FlightOutcome],
    reference: Aggregate,
) -> Result<ExperimentResult> {
    let own = Aggregate::over(outcomes);
    Ok(ExperimentResult {
        scenario_id,
        lambda_train,
        lambda_test,
        policy,
        mean_revenue: own.mean_revenue,
        mean_load_factor: own.mean_load_factor,
        revenue_gap_vs_optimal: revenue_gap(own.mean_revenue, reference.mean_revenue)?,
        load_factor_gap_vs_optimal: load_factor_gap(
            own.mean_load_factor,
            reference.mean_load_factor,
        )?,
    })
}

fn save_matrix(
    dir: &Path,
    scenario_id: u32,
    policy: Policy,
    matrix: &BidPriceMatrix,
) -> Result<()> {
    matrix.save(&dir.join(format!("bidprices_{scenario_id}_{policy}.csv")))
}

fn collect(outcomes: Vec<Result<Vec<ExperimentResult>>>) -> ExperimentRun {
    let mut results = Vec::new();
    let mut failures = Vec::new();
    for (i, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(rows) => results.extend(rows),
            Err(e) => {
                failures.push(ScenarioFailure { scenario_id: i as u32, message: e.to_string() })
            }
        }
    }
    ExperimentRun { results, failures }
}
