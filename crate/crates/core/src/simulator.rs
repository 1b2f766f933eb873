//! Replay of arrival streams against bid-price policies.
//!
//! A policy is a bid-price matrix plus the WTP parameters used to post
//! prices: every arrival sees `max(p0, alpha + bid)` for the current
//! remaining capacity and whole day to departure, and books exactly when
//! their willingness to pay covers it. Streams are sampled once and replayed
//! against each policy, so comparisons are paired customer by customer.

use std::io::Write;

use crate::bid_matrix::BidPriceMatrix;
use crate::demand::{sample_arrival_stream, ArrivalStream, DemandScenario};
use crate::error::{Error, Result};
use crate::exec;
use crate::observations::BookingRecord;
use crate::rng;

/// A bid-price control ready to post prices.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyHandle {
    pub matrix: BidPriceMatrix,
    /// Mean WTP increment used to turn bids into posted prices.
    pub alpha: f64,
    /// WTP floor price.
    pub p0: f64,
}

impl PolicyHandle {
    pub fn new(matrix: BidPriceMatrix, alpha: f64, p0: f64) -> Result<Self> {
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
        Ok(PolicyHandle { matrix, alpha, p0 })
    }
}

/// What one flight did under one policy.
#[derive(Debug, Clone, PartialEq)]
pub struct FlightOutcome {
    /// Bookings in arrival order, with `flight_id` set by the caller's
    /// flight indexing.
    pub bookings: Vec<BookingRecord>,
    pub revenue: f64,
    /// Fraction of capacity sold, in `[0, 1]`.
    pub load_factor: f64,
    pub final_remaining: u32,
}

/// Replays one arrival stream against one policy.
pub fn simulate_flight(stream: &ArrivalStream, policy: &PolicyHandle) -> Result<FlightOutcome> {
    let scenario = &stream.scenario;
    scenario.validate()?;
    if policy.matrix.capacity() < scenario.capacity
        || policy.matrix.horizon_days() < scenario.horizon_days
    {
        return Err(Error::invalid_input(format!(
            "policy matrix {}x{} cannot price a {}x{} flight",
            policy.matrix.capacity(),
            policy.matrix.horizon_days(),
            scenario.capacity,
            scenario.horizon_days
        )));
    }
    let mut remaining = scenario.capacity;
    let mut revenue = 0.0f64;
    let mut bookings = Vec::new();
    for arrival in &stream.arrivals {
        if remaining == 0 {
            break; // sold out: every later arrival is turned away
        }
        let day = arrival.day();
        let bid = policy.matrix.value(remaining, day);
        // Bid matrices are validated nonnegative, so the optimal posted
        // price is always defined.
        let price = (policy.alpha + bid).max(policy.p0);
        if arrival.wtp >= price {
            revenue += price;
            remaining -= 1;
            bookings.push(BookingRecord { flight_id: 0, days_to_departure: day, price });
        }
    }
    let sold = scenario.capacity - remaining;
    Ok(FlightOutcome {
        bookings,
        revenue,
        load_factor: f64::from(sold) / f64::from(scenario.capacity),
        final_remaining: remaining,
    })
}

/// Replays every stream against every policy. The result is indexed
/// `[policy][flight]`, with booking records stamped with their flight index.
pub fn simulate_on_streams(
    streams: &[ArrivalStream],
    policies: &[PolicyHandle],
) -> Result<Vec<Vec<FlightOutcome>>> {
    let per_flight: Vec<Result<Vec<FlightOutcome>>> = exec::map_indexed(streams.len(), |i| {
        policies
            .iter()
            .map(|policy| {
                let mut outcome = simulate_flight(&streams[i], policy)?;
                for booking in &mut outcome.bookings {
                    booking.flight_id = i as u64;
                }
                Ok(outcome)
            })
            .collect()
    });
    let mut by_policy: Vec<Vec<FlightOutcome>> =
        std::iter::repeat_with(Vec::new).take(policies.len()).collect();
    for flight in per_flight {
        for (p, outcome) in flight?.into_iter().enumerate() {
            by_policy[p].push(outcome);
        }
    }
    Ok(by_policy)
}

/// Samples `n_flights` independent arrival streams for a scenario; stream
/// `i` always gets child seed `i` of `base_seed`, independent of thread
/// scheduling.
pub fn sample_scenario_streams(
    scenario: &DemandScenario,
    n_flights: u32,
    base_seed: u64,
) -> Result<Vec<ArrivalStream>> {
    scenario.validate()?;
    let streams: Vec<Result<ArrivalStream>> = exec::map_indexed(n_flights as usize, |i| {
        sample_arrival_stream(scenario, rng::sub_seed(base_seed, i as u64))
    });
    streams.into_iter().collect()
}

/// Samples fresh streams for a scenario and replays them against the given
/// policies.
pub fn simulate_scenario(
    scenario: &DemandScenario,
    n_flights: u32,
    base_seed: u64,
    policies: &[PolicyHandle],
) -> Result<Vec<Vec<FlightOutcome>>> {
    let streams = sample_scenario_streams(scenario, n_flights, base_seed)?;
    simulate_on_streams(&streams, policies)
}

/// Relative revenue shortfall of `candidate` against `reference`:
/// `(candidate - reference) / reference`.
pub fn revenue_gap(candidate: f64, reference: f64) -> Result<f64> {
    if !candidate.is_finite() || !reference.is_finite() || reference <= 0.0 {
        return Err(Error::invalid_input(format!(
            "revenue gap needs finite revenues with a positive reference, got {candidate} vs {reference}"
        )));
    }
    Ok((candidate - reference) / reference)
}

/// Load-factor difference in points of capacity fraction.
pub fn load_factor_gap(candidate: f64, reference: f64) -> Result<f64> {
    for v in [candidate, reference] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::invalid_input(format!(
                "load factors must lie in [0, 1], got {v}"
            )));
        }
    }
    Ok(candidate - reference)
}

/// Writes flight outcomes as CSV rows
/// `scenario_id,policy,flight_index,revenue,load_factor,bookings`.
pub fn write_outcomes_csv<W: Write>(
    mut w: W,
    sections: &[(&str, &str, &[FlightOutcome])],
) -> Result<()> {
    writeln!(w, "scenario_id,policy,flight_index,revenue,load_factor,bookings")?;
    for (scenario_id, policy, outcomes) in sections {
        for (i, outcome) in outcomes.iter().enumerate() {
            writeln!(
                w,
                "{scenario_id},{policy},{i},{},{},{}",
                outcome.revenue,
                outcome.load_factor,
                outcome.bookings.len()
            )?;
        }
    }
    Ok(())
}
