//! Bid-price controls for a single-leg seat inventory, with and without a
//! demand model.
//!
//! The crate covers the full loop: simulate Poisson arrivals with
//! exponential willingness-to-pay ([`demand`], [`simulator`]), solve the
//! continuous-pricing dynamic program for the exact bid-price surface
//! ([`dp`]), turn historical bookings into capacity-indexed training
//! observations ([`observations`]), fit a neural or tabular estimator on
//! those observations ([`estimator`]), and compare the resulting controls
//! head-to-head over many sampled scenarios ([`experiment`]). An
//! expected-marginal-seat-revenue curve for independent fare classes
//! ([`emsr`]) provides a classical reference point.
//!
//! Scenario batches run data-parallel via rayon when the default
//! `parallel` feature is enabled; disabling it yields a dependency-free
//! sequential build with identical output.

pub mod bid_matrix;
pub mod demand;
pub mod dp;
pub mod emsr;
pub mod error;
pub mod estimator;
pub mod exec;
pub mod experiment;
pub mod observations;
pub mod rng;
pub mod simulator;

pub use bid_matrix::{BidPriceMatrix, Origin};
pub use demand::{purchase_probability, sample_arrival_stream, Arrival, ArrivalStream, DemandScenario};
pub use dp::{compute_bid_matrix, compute_value_and_bid, optimal_price, ValueFunction};
pub use emsr::{emsr_curve, littlewood_accept, std_normal_ccdf, NormalDemandClass};
pub use error::{Error, Result};
pub use estimator::{fit, fit_simple_average, EstimatorConfig, FittedEstimator, OutputActivation};
pub use experiment::{
    run_baseline, run_robustness, summarize, BaselineConfig, ExperimentResult, ExperimentRun,
    GroupBy, Policy, RobustnessConfig, SummaryRow,
};
pub use observations::{
    assemble_training_set, build_dcp_grid, read_bookings_csv, BookingRecord, DcpGrid,
    FlightBookings, ObservationRow, ObservationSet,
};
pub use simulator::{simulate_scenario, FlightOutcome, PolicyHandle};
