//! Exact value function and bid prices by backward induction.
//!
//! With demand parameters known, the expected revenue-to-come `V(x, t)` for
//! `x` remaining seats and `t` time to departure satisfies, per small step
//! `dt`,
//!
//! ```text
//! V(x, t) = V(x, t-dt) + lambda*dt * max_p Pw(p) * (p - b(x, t-dt))
//! b(x, t) = V(x, t) - V(x-1, t)
//! ```
//!
//! and under the exponential-tail WTP model the inner maximum has the closed
//! form `p* = max(p0, alpha + b)`. Rather than iterating `V` and differencing
//! it afterwards (which loses the structural ordering of bid prices to
//! cancellation), `solve` iterates the difference process itself:
//!
//! ```text
//! b(x, t) = b(x, t-dt) + g(b(x, t-dt)) - g(b(x-1, t-dt))
//! ```
//!
//! where `g(b)` is the one-step gain at bid `b`. `g` is nonincreasing and
//! `b + g(b)` is nondecreasing whenever `lambda*dt <= 0.1` (enforced below),
//! and both properties survive rounding because every floating-point
//! operation in `step_gain` is monotone in `b`. Together with a one-ulp
//! safety clamp this keeps bid prices exactly nonincreasing in capacity and
//! exactly nondecreasing in time, not merely up to rounding error.

use crate::bid_matrix::{BidPriceMatrix, Origin};
use crate::demand::DemandScenario;
use crate::error::{Error, Result};

/// Discretized expected revenue-to-come, recorded at every time step.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueFunction {
    capacity: u32,
    horizon_days: u32,
    steps_per_day: u32,
    /// Step-major: column for step `s` holds `capacity + 1` values
    /// (`x = 0..=capacity`), for `s = 0..=steps`.
    values: Vec<f64>,
}

impl ValueFunction {
    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    pub fn horizon_days(&self) -> u32 {
        self.horizon_days
    }

    pub fn steps_per_day(&self) -> u32 {
        self.steps_per_day
    }

    /// Total number of time steps across the horizon.
    pub fn steps(&self) -> usize {
        self.horizon_days as usize * self.steps_per_day as usize
    }

    /// Effective step length in days.
    pub fn dt(&self) -> f64 {
        1.0 / f64::from(self.steps_per_day)
    }

    /// `V(remaining, step)`; step 0 is departure. Panics outside the grid.
    pub fn value(&self, remaining: u32, step: usize) -> f64 {
        assert!(remaining <= self.capacity, "capacity {remaining} outside grid");
        assert!(step <= self.steps(), "step {step} outside grid");
        self.values[step * (self.capacity as usize + 1) + remaining as usize]
    }

    /// `V` at a whole-day boundary: `day` days to departure.
    pub fn value_at_day(&self, remaining: u32, day: u32) -> Result<f64> {
        if remaining > self.capacity {
            return Err(Error::out_of_range(format!(
                "remaining capacity {remaining} outside 0..={}",
                self.capacity
            )));
        }
        if day > self.horizon_days {
            return Err(Error::out_of_range(format!(
                "day {day} outside 0..={}",
                self.horizon_days
            )));
        }
        Ok(self.value(remaining, day as usize * self.steps_per_day as usize))
    }
}

/// Revenue-maximizing posted price against bid price `bid`:
/// `max(p0, alpha + bid)`.
pub fn optimal_price(bid: f64, alpha: f64, p0: f64) -> Result<f64> {
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
    if !bid.is_finite() || bid < 0.0 {
        return Err(Error::invalid_parameter(format!(
            "bid price must be finite and nonnegative, got {bid}"
        )));
    }
    Ok((alpha + bid).max(p0))
}

/// One-step expected gain of a seat whose bid price is `bid`, with the
/// optimal posted price substituted: `lambda*dt * Pw(p*) * (p* - bid)`.
///
/// Every operation here is monotone in `bid`, so the computed gain is
/// nonincreasing in `bid` even in floating point. `p0_minus_alpha` is the
/// precomputed branch threshold; passing it in keeps the branch boundary
/// identical across all capacity levels of a step.
#[inline]
fn step_gain(bid: f64, lambda_dt_alpha: f64, lambda_dt: f64, inv_alpha: f64, p0: f64, p0_minus_alpha: f64) -> f64 {
    if bid >= p0_minus_alpha {
        // Interior optimum p* = alpha + bid leaves a margin of exactly alpha.
        lambda_dt_alpha * (-((bid - p0) * inv_alpha + 1.0)).exp()
    } else {
        // The floor binds: everyone buys at p0.
        lambda_dt * (p0 - bid)
    }
}

fn steps_per_day_for(dt: f64) -> Result<u32> {
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::invalid_parameter(format!(
            "time step must be finite and positive, got {dt}"
        )));
    }
    // Snap to a whole number of steps per day, never coarser than requested;
    // the epsilon keeps 1/dt values that are integers up to rounding (e.g.
    // dt = 1/3) from being bumped an extra step.
    let raw = (1.0 / dt - 1e-9).ceil().max(1.0);
    if raw > 1e6 {
        return Err(Error::invalid_parameter(format!(
            "time step {dt} finer than 1e-6 days is not supported"
        )));
    }
    Ok(raw as u32)
}

/// Backward induction over the full horizon. Returns the value function on
/// the step grid and the bid-price matrix sampled at whole-day boundaries.
pub fn compute_value_and_bid(
    scenario: &DemandScenario,
    dt: f64,
) -> Result<(ValueFunction, BidPriceMatrix)> {
    let (vf, bids) = solve(scenario, dt, true)?;
    Ok((vf.expect("value recording was requested"), bids))
}

/// Bid-price matrix only, without materializing the per-step value table.
pub fn compute_bid_matrix(scenario: &DemandScenario, dt: f64) -> Result<BidPriceMatrix> {
    Ok(solve(scenario, dt, false)?.1)
}

fn solve(
    scenario: &DemandScenario,
    dt: f64,
    record_values: bool,
) -> Result<(Option<ValueFunction>, BidPriceMatrix)> {
    scenario.validate()?;
    let steps_per_day = steps_per_day_for(dt)?;
    let dt_eff = 1.0 / f64::from(steps_per_day);
    let lambda_dt = scenario.lambda_per_day * dt_eff;
    if lambda_dt > 0.1 {
        return Err(Error::invalid_parameter(format!(
            "time step too coarse: lambda*dt = {lambda_dt} exceeds 0.1"
        )));
    }

    let c = scenario.capacity as usize;
    let t_days = scenario.horizon_days as usize;
    let steps = steps_per_day as usize * t_days;
    let alpha = scenario.alpha;
    let p0 = scenario.p0;
    let p0_minus_alpha = p0 - alpha;
    let lambda_dt_alpha = lambda_dt * alpha;
    let inv_alpha = 1.0 / alpha;

    // bid[0] = +inf encodes the empty-capacity boundary: its gain is exactly
    // zero, which is also what makes bid[1] evolve as V(1, t) itself.
    let mut bid = vec![0.0f64; c + 1];
    bid[0] = f64::INFINITY;
    let mut value = vec![0.0f64; c + 1];
    let mut gain = vec![0.0f64; c + 1];

    let mut vf_values = record_values.then(|| {
        let mut v = Vec::with_capacity((c + 1) * (steps + 1));
        v.extend_from_slice(&value); // step 0: departure, all zeros
        v
    });
    let mut matrix = vec![0.0f64; c * t_days]; // day-0 column stays zero

    for step in 1..=steps {
        for x in 1..=c {
            gain[x] =
                step_gain(bid[x], lambda_dt_alpha, lambda_dt, inv_alpha, p0, p0_minus_alpha);
        }
        for x in 1..=c {
            value[x] += gain[x];
            let stepped = bid[x] + (gain[x] - gain[x - 1]);
            // The analytic argument gives stepped <= bid[x-1] already; the
            // clamp only ever binds on sub-ulp coincidences and makes the
            // capacity ordering unconditional.
            bid[x] = stepped.min(bid[x - 1]);
        }
        if let Some(v) = vf_values.as_mut() {
            v.extend_from_slice(&value);
        }
        if step % steps_per_day as usize == 0 {
            let day = step / steps_per_day as usize;
            if day < t_days {
                for x in 1..=c {
                    matrix[(x - 1) * t_days + day] = bid[x];
                }
            }
        }
    }

    let bids = BidPriceMatrix::from_values(
        scenario.capacity,
        scenario.horizon_days,
        Origin::DpOptimal,
        matrix,
    )?;
    let vf = vf_values.map(|values| ValueFunction {
        capacity: scenario.capacity,
        horizon_days: scenario.horizon_days,
        steps_per_day,
        values,
    });
    Ok((vf, bids))
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;
    use crate::demand::purchase_probability;

    fn scenario(lambda: f64, alpha: f64, p0: f64, capacity: u32, horizon: u32) -> DemandScenario {
        DemandScenario::new(lambda, alpha, p0, capacity, horizon).unwrap()
    }

    #[test]
    fn optimal_price_cases() {
        assert_eq!(optimal_price(0.0, 100.0, 100.0).unwrap(), 100.0);
        assert_eq!(optimal_price(200.0, 100.0, 100.0).unwrap(), 300.0);
        assert!(optimal_price(-5.0, 100.0, 100.0).is_err());
        assert!(optimal_price(f64::NAN, 100.0, 100.0).is_err());
        assert!(optimal_price(0.0, 0.0, 100.0).is_err());
    }

    #[test]
    fn single_step_value_matches_hand_computation() {
        // One seat, one day, one step: expected gain is
        // lambda*dt * alpha * exp(-(alpha - p0)/alpha) with p0 = 0.
        let s = scenario(0.1, 100.0, 0.0, 1, 1);
        let (vf, bids) = compute_value_and_bid(&s, 1.0).unwrap();
        assert_eq!(vf.steps(), 1);
        let expected = 0.1 * 100.0 * (-1.0f64).exp();
        assert!((vf.value(1, 1) - expected).abs() < 1e-12);
        // The day-0 bid is zero by the terminal condition.
        assert_eq!(bids.lookup(1, 0).unwrap(), 0.0);
    }

    #[test]
    fn boundary_conditions_hold() {
        let s = scenario(2.0, 100.0, 50.0, 6, 5);
        let (vf, bids) = compute_value_and_bid(&s, 0.05).unwrap();
        for step in 0..=vf.steps() {
            assert_eq!(vf.value(0, step), 0.0, "V(0, t) must vanish");
        }
        for x in 0..=s.capacity {
            assert_eq!(vf.value(x, 0), 0.0, "V(x, 0) must vanish");
        }
        for x in 1..=s.capacity {
            assert_eq!(bids.lookup(x, 0).unwrap(), 0.0, "day-0 bids must vanish");
        }
    }

    #[test]
    fn zero_rate_solves_to_zero() {
        let s = scenario(0.0, 100.0, 50.0, 3, 4);
        let (vf, bids) = compute_value_and_bid(&s, 0.1).unwrap();
        assert_eq!(vf.value(3, vf.steps()), 0.0);
        assert_eq!(bids.lookup(3, 3).unwrap(), 0.0);
    }

    #[test]
    fn bid_monotonicity_is_exact() {
        for (i, s) in [
            scenario(3.0, 100.0, 50.0, 20, 30),
            scenario(0.5, 80.0, 120.0, 8, 40), // floor above alpha exercises both branches
            scenario(5.0, 10.0, 0.0, 15, 10),
        ]
        .iter()
        .enumerate()
        {
            let bids = compute_bid_matrix(s, 0.02).unwrap();
            for t in 0..s.horizon_days {
                for x in 1..=s.capacity {
                    if x < s.capacity {
                        assert!(
                            bids.lookup(x + 1, t).unwrap() <= bids.lookup(x, t).unwrap(),
                            "capacity ordering violated in case {i} at x={x}, t={t}"
                        );
                    }
                    if t + 1 < s.horizon_days {
                        assert!(
                            bids.lookup(x, t + 1).unwrap() >= bids.lookup(x, t).unwrap(),
                            "time ordering violated in case {i} at x={x}, t={t}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn value_function_is_concave_in_capacity() {
        let s = scenario(3.0, 100.0, 50.0, 10, 20);
        let (vf, _) = compute_value_and_bid(&s, 0.02).unwrap();
        let steps = vf.steps();
        let scale = vf.value(s.capacity, steps).abs().max(1.0);
        for step in 0..=steps {
            for x in 2..=s.capacity {
                let d_hi = vf.value(x, step) - vf.value(x - 1, step);
                let d_lo = vf.value(x - 1, step) - vf.value(x - 2, step);
                // V is reconstructed by summation, so concavity holds up to
                // accumulated rounding, not exactly.
                assert!(
                    d_hi <= d_lo + 1e-9 * scale,
                    "concavity violated at x={x}, step={step}: {d_hi} > {d_lo}"
                );
            }
        }
    }

    #[test]
    fn matrix_agrees_with_value_differences() {
        let s = scenario(2.5, 90.0, 40.0, 12, 15);
        let (vf, bids) = compute_value_and_bid(&s, 0.04).unwrap();
        for day in 0..s.horizon_days {
            for x in 1..=s.capacity {
                let diff = vf.value_at_day(x, day).unwrap() - vf.value_at_day(x - 1, day).unwrap();
                let b = bids.lookup(x, day).unwrap();
                assert!(
                    (b - diff).abs() <= 1e-6 * b.abs().max(1.0),
                    "bid {b} vs value difference {diff} at x={x}, day={day}"
                );
            }
        }
    }

    #[test]
    fn lean_solve_matches_full_solve_bitwise() {
        let s = scenario(3.2, 110.0, 60.0, 9, 11);
        let (_, full) = compute_value_and_bid(&s, 0.03).unwrap();
        let lean = compute_bid_matrix(&s, 0.03).unwrap();
        assert_eq!(full, lean);
    }

    #[test]
    fn time_step_is_snapped_to_whole_day_divisions() {
        let s = scenario(0.05, 100.0, 50.0, 2, 3);
        let (vf, _) = compute_value_and_bid(&s, 1.0 / 3.0).unwrap();
        assert_eq!(vf.steps_per_day(), 3, "near-integer divisions must not be bumped");
        let (vf, _) = compute_value_and_bid(&s, 0.3).unwrap();
        assert_eq!(vf.steps_per_day(), 4, "0.3 days must tighten to 4 steps/day");
        assert!(vf.dt() <= 0.3);
        let (vf, _) = compute_value_and_bid(&s, 5.0).unwrap();
        assert_eq!(vf.steps_per_day(), 1, "steps never straddle day boundaries");
    }

    #[test]
    fn rejects_coarse_steps_and_bad_parameters() {
        let s = scenario(3.0, 100.0, 50.0, 5, 10);
        // lambda*dt = 0.3 > 0.1
        assert!(compute_bid_matrix(&s, 0.1).is_err());
        assert!(compute_bid_matrix(&s, 0.0).is_err());
        assert!(compute_bid_matrix(&s, -0.1).is_err());
        assert!(compute_bid_matrix(&s, f64::NAN).is_err());
        let bad = DemandScenario { lambda_per_day: -1.0, ..s };
        assert!(compute_bid_matrix(&bad, 0.01).is_err());
    }

    /// Brute-force reference: iterate V directly and optimize the posted
    /// price over a dense grid instead of using the closed form.
    fn grid_reference(
        s: &DemandScenario,
        steps_per_day: u32,
        price_hi: f64,
        price_step: f64,
    ) -> Vec<Vec<f64>> {
        let dt = 1.0 / f64::from(steps_per_day);
        let lambda_dt = s.lambda_per_day * dt;
        let n_prices = ((price_hi - s.p0) / price_step).ceil() as usize + 1;
        let prices: Vec<f64> = (0..n_prices).map(|i| s.p0 + i as f64 * price_step).collect();
        let pw: Vec<f64> =
            prices.iter().map(|p| purchase_probability(*p, s.p0, s.alpha).unwrap()).collect();
        let steps = steps_per_day as usize * s.horizon_days as usize;
        let c = s.capacity as usize;
        let mut v = vec![vec![0.0f64; c + 1]; steps + 1];
        for step in 1..=steps {
            for x in 1..=c {
                let b = v[step - 1][x] - v[step - 1][x - 1];
                let mut best = 0.0f64;
                for (p, w) in prices.iter().zip(&pw) {
                    best = best.max(w * (p - b));
                }
                v[step][x] = v[step - 1][x] + lambda_dt * best;
            }
        }
        v
    }

    #[test]
    fn small_instance_matches_grid_reference() {
        let s = scenario(1.0, 100.0, 50.0, 3, 2);
        let (vf, bids) = compute_value_and_bid(&s, 0.05).unwrap();
        let reference = grid_reference(&s, vf.steps_per_day(), 500.0, 0.01);
        for step in 0..=vf.steps() {
            for x in 1..=3u32 {
                let v_ref = reference[step][x as usize];
                assert_relative_eq!(vf.value(x, step), v_ref, max_relative = 1e-4, epsilon = 1e-7);
            }
        }
        for day in 0..2u32 {
            let step = day as usize * vf.steps_per_day() as usize;
            for x in 1..=3u32 {
                let b_ref = reference[step][x as usize] - reference[step][x as usize - 1];
                assert_relative_eq!(
                    bids.lookup(x, day).unwrap(),
                    b_ref,
                    max_relative = 1e-4,
                    epsilon = 1e-7
                );
            }
        }
    }
}
