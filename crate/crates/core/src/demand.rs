//! Demand primitives: Poisson arrivals and shifted-exponential willingness to pay.
//!
//! A market is summarized by a stationary arrival rate and a willingness-to-pay
//! (WTP) distribution `p0 + Exp(alpha)`: nobody pays less than the floor `p0`,
//! and the excess above it is exponential with mean `alpha`. Under that model
//! the probability that a customer accepts a posted price has the closed form
//! implemented by [`purchase_probability`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Rng};

/// One simulated market and flight shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemandScenario {
    /// Expected customer arrivals per day.
    pub lambda_per_day: f64,
    /// Mean willingness-to-pay increment above the floor.
    pub alpha: f64,
    /// Willingness-to-pay floor price; every customer accepts prices below it.
    pub p0: f64,
    /// Seats available at the start of the booking horizon.
    pub capacity: u32,
    /// Length of the booking horizon in days.
    pub horizon_days: u32,
}

impl DemandScenario {
    pub fn new(
        lambda_per_day: f64,
        alpha: f64,
        p0: f64,
        capacity: u32,
        horizon_days: u32,
    ) -> Result<Self> {
        let scenario = DemandScenario { lambda_per_day, alpha, p0, capacity, horizon_days };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.lambda_per_day.is_finite() || self.lambda_per_day < 0.0 {
            return Err(Error::invalid_parameter(format!(
                "arrival rate must be finite and nonnegative, got {}",
                self.lambda_per_day
            )));
        }
        if !self.alpha.is_finite() || self.alpha <= 0.0 {
            return Err(Error::invalid_parameter(format!(
                "WTP mean increment must be finite and positive, got {}",
                self.alpha
            )));
        }
        if !self.p0.is_finite() || self.p0 < 0.0 {
            return Err(Error::invalid_parameter(format!(
                "WTP floor must be finite and nonnegative, got {}",
                self.p0
            )));
        }
        if self.capacity == 0 {
            return Err(Error::invalid_parameter("capacity must be at least 1"));
        }
        if self.horizon_days == 0 {
            return Err(Error::invalid_parameter("horizon must be at least 1 day"));
        }
        Ok(())
    }
}

/// A single customer arrival.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arrival {
    /// Continuous time before departure, in days; lies in `[0, horizon_days)`.
    pub time_to_departure: f64,
    /// The highest price this customer accepts.
    pub wtp: f64,
}

impl Arrival {
    /// The whole day-to-departure this arrival falls on.
    pub fn day(&self) -> u32 {
        self.time_to_departure as u32
    }
}

/// A reproducible arrival sequence for one flight.
///
/// Streams are sampled once and then replayed against every policy being
/// compared, so revenue differences come from pricing decisions alone.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalStream {
    pub scenario: DemandScenario,
    pub seed: u64,
    /// Arrivals ordered by decreasing time to departure (booking order).
    pub arrivals: Vec<Arrival>,
}

/// Probability that a customer accepts `price`: `exp(-(price - p0) / alpha)`,
/// clamped to 1 below the floor.
pub fn purchase_probability(price: f64, p0: f64, alpha: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::invalid_parameter(format!(
            "WTP mean increment must be finite and positive, got {alpha}"
        )));
    }
    if !price.is_finite() {
        return Err(Error::invalid_parameter(format!("price must be finite, got {price}")));
    }
    if price <= p0 {
        return Ok(1.0);
    }
    Ok((-(price - p0) / alpha).exp())
}

/// Draws one willingness to pay: `p0 + Exp(alpha)`.
pub fn sample_wtp(p0: f64, alpha: f64, rng: &mut Rng) -> f64 {
    p0 + rng::exponential(rng, alpha)
}

/// Samples a homogeneous Poisson arrival process over the booking horizon,
/// attaching an independent WTP draw to every arrival.
pub fn sample_arrival_stream(scenario: &DemandScenario, seed: u64) -> Result<ArrivalStream> {
    scenario.validate()?;
    let mut rng = rng::rng_from_seed(seed);
    let horizon = f64::from(scenario.horizon_days);
    let mut arrivals = Vec::new();
    if scenario.lambda_per_day > 0.0 {
        let mean_gap = 1.0 / scenario.lambda_per_day;
        let mut clock = rng::exponential(&mut rng, mean_gap);
        while clock < horizon {
            let wtp = sample_wtp(scenario.p0, scenario.alpha, &mut rng);
            let time_to_departure = horizon - clock;
            // A zero-probability gap of exactly 0 would land on the horizon
            // boundary itself; drop it rather than break the range invariant.
            if time_to_departure < horizon {
                arrivals.push(Arrival { time_to_departure, wtp });
            }
            clock += rng::exponential(&mut rng, mean_gap);
        }
    }
    Ok(ArrivalStream { scenario: *scenario, seed, arrivals })
}
