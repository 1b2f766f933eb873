//! Randomized invariants over the library's core constructions.
//!
//! These complement the example-pinned unit tests: instead of checking known
//! answers, they assert structural guarantees (monotonicity, conservation,
//! determinism, exact round-trips) over wide random input ranges.

use std::collections::HashSet;

use proptest::prelude::*;

use rmbid_core::demand::{purchase_probability, sample_arrival_stream, DemandScenario};
use rmbid_core::dp::{compute_bid_matrix, optimal_price};
use rmbid_core::emsr::{emsr_curve, littlewood_accept, NormalDemandClass};
use rmbid_core::estimator::fit_simple_average;
use rmbid_core::experiment::{read_results_csv, write_results_csv, ExperimentResult, Policy};
use rmbid_core::observations::{
    assemble_training_set, build_dcp_grid, transform_flight, FlightBookings,
};
use rmbid_core::rng::sub_seed;
use rmbid_core::simulator::{simulate_flight, PolicyHandle};
use rmbid_core::BidPriceMatrix;

/// Small but otherwise unconstrained demand scenarios. The rate cap keeps
/// the 0.02-day solver step inside its stability bound.
fn scenario_strategy() -> impl Strategy<Value = DemandScenario> {
    (0.05f64..5.0, 5.0f64..250.0, 0.0f64..200.0, 1u32..=10, 1u32..=12)
        .prop_map(|(lambda, alpha, p0, capacity, horizon)| {
            DemandScenario::new(lambda, alpha, p0, capacity, horizon).unwrap()
        })
}

fn booking_strategy() -> impl Strategy<Value = Vec<(f64, u32)>> {
    prop::collection::vec((0.01f64..500.0, 0u32..120), 0..60)
}

const DT: f64 = 0.02;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    /// Bid-price surfaces are monotone without any tolerance: holding the
    /// day fixed they never increase with remaining seats, and holding the
    /// seat fixed they never decrease with days to departure.
    #[test]
    fn bid_surface_is_exactly_monotone(scenario in scenario_strategy()) {
        let matrix = compute_bid_matrix(&scenario, DT).unwrap();
        for day in 0..scenario.horizon_days {
            for x in 2..=scenario.capacity {
                prop_assert!(
                    matrix.lookup(x, day).unwrap() <= matrix.lookup(x - 1, day).unwrap(),
                    "seat monotonicity broke at x = {x}, day = {day}"
                );
            }
        }
        for x in 1..=scenario.capacity {
            for day in 1..scenario.horizon_days {
                prop_assert!(
                    matrix.lookup(x, day).unwrap() >= matrix.lookup(x, day - 1).unwrap(),
                    "time monotonicity broke at x = {x}, day = {day}"
                );
            }
        }
    }

    /// Each training column is the eligible prices sorted in descending
    /// order, truncated to capacity and zero-padded, and the construction
    /// does not care in what order bookings arrive.
    #[test]
    fn transform_sorts_pads_and_ignores_booking_order(
        bookings in booking_strategy(),
        capacity in 1u32..=20,
        n_groups in 1u32..=10,
    ) {
        let grid = build_dcp_grid(100, n_groups).unwrap();
        let prices: Vec<f64> = bookings.iter().map(|b| b.0).collect();
        let days: Vec<u32> = bookings.iter().map(|b| b.1).collect();
        let columns = transform_flight(&prices, &days, capacity, &grid).unwrap();
        prop_assert_eq!(columns.len(), grid.len());

        for (j, (&dcp, column)) in grid.days().iter().zip(&columns).enumerate() {
            prop_assert_eq!(column.len(), capacity as usize);
            let mut eligible: Vec<f64> = bookings
                .iter()
                .filter(|(_, day)| j == 0 || *day <= dcp)
                .map(|(price, _)| *price)
                .collect();
            eligible.sort_by(|a, b| b.partial_cmp(a).unwrap());
            eligible.truncate(capacity as usize);
            let filled = eligible.len();
            prop_assert_eq!(&column[..filled], &eligible[..]);
            prop_assert!(column[filled..].iter().all(|&v| v == 0.0));
        }

        let reversed: Vec<(f64, u32)> = bookings.iter().rev().copied().collect();
        let rev_prices: Vec<f64> = reversed.iter().map(|b| b.0).collect();
        let rev_days: Vec<u32> = reversed.iter().map(|b| b.1).collect();
        let rev_columns = transform_flight(&rev_prices, &rev_days, capacity, &grid).unwrap();
        prop_assert_eq!(columns, rev_columns);
    }

    /// The purchase model is the survival function of `p0 + Exp(alpha)`:
    /// certain below the floor, exponentially decaying above it.
    #[test]
    fn purchase_probability_is_exponential_survival(
        p0 in 0.0f64..300.0,
        alpha in 0.001f64..400.0,
        below in 0.0f64..1.0,
        above in 0.0f64..2000.0,
    ) {
        prop_assert_eq!(purchase_probability(p0 * below, p0, alpha).unwrap(), 1.0);
        let price = p0 + above;
        let p = purchase_probability(price, p0, alpha).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        if p > 0.0 {
            prop_assert!((p.ln() + (price - p0) / alpha).abs() <= 1e-9);
        }
        // Monotone: raising the price never raises the probability.
        let higher = purchase_probability(price + 1.0, p0, alpha).unwrap();
        prop_assert!(higher <= p);
    }

    /// Posted prices respect the floor and move with the bid price.
    #[test]
    fn optimal_price_respects_floor_and_bid_order(
        alpha in 0.001f64..400.0,
        p0 in 0.0f64..300.0,
        bid_lo in 0.0f64..1000.0,
        bump in 0.0f64..1000.0,
    ) {
        let lo = optimal_price(bid_lo, alpha, p0).unwrap();
        let hi = optimal_price(bid_lo + bump, alpha, p0).unwrap();
        prop_assert!(lo >= p0);
        prop_assert!(hi >= lo);
        if alpha + bid_lo >= p0 {
            prop_assert_eq!(lo, alpha + bid_lo);
        }
    }

    /// Replaying the same stream gives bit-identical outcomes, and the
    /// outcome's books balance: revenue is the sum of booked prices, the
    /// load factor is exactly the sold fraction, and bookings appear in
    /// arrival order (days to departure never increase).
    #[test]
    fn replay_is_deterministic_and_accounts_exactly(
        scenario in scenario_strategy(),
        seed in any::<u64>(),
    ) {
        let matrix = compute_bid_matrix(&scenario, DT).unwrap();
        let policy = PolicyHandle::new(matrix, scenario.alpha, scenario.p0).unwrap();
        let stream = sample_arrival_stream(&scenario, seed).unwrap();
        let once = simulate_flight(&stream, &policy).unwrap();
        let twice = simulate_flight(&stream, &policy).unwrap();
        prop_assert_eq!(&once, &twice);

        let mut replayed = 0.0f64;
        for b in &once.bookings {
            prop_assert!(b.price >= scenario.p0);
            replayed += b.price;
        }
        prop_assert_eq!(replayed, once.revenue);
        let sold = scenario.capacity - once.final_remaining;
        prop_assert_eq!(once.bookings.len(), sold as usize);
        prop_assert_eq!(once.load_factor, f64::from(sold) / f64::from(scenario.capacity));
        prop_assert!(once
            .bookings
            .windows(2)
            .all(|w| w[0].days_to_departure >= w[1].days_to_departure));
    }

    /// Child seeds never collide within a realistic fan-out and are stable.
    #[test]
    fn child_seeds_are_distinct_and_stable(base in any::<u64>()) {
        let children: Vec<u64> = (0..128).map(|i| sub_seed(base, i)).collect();
        let unique: HashSet<u64> = children.iter().copied().collect();
        prop_assert_eq!(unique.len(), children.len());
        prop_assert_eq!(children[7], sub_seed(base, 7));
    }

    /// Marginal seat values decline with seat index, stay within
    /// `[0, fare]`, and the acceptance rule agrees with the curve.
    #[test]
    fn emsr_curve_is_nonincreasing_and_matches_littlewood(
        fare in 0.0f64..1000.0,
        mean in -5.0f64..50.0,
        std_dev in 0.0f64..20.0,
        capacity in 1u32..=40,
        lower_fare in 0.0f64..1000.0,
    ) {
        let class = NormalDemandClass::new(fare, mean, std_dev).unwrap();
        let curve = emsr_curve(&class, capacity).unwrap();
        prop_assert_eq!(curve.len(), capacity as usize);
        for value in &curve {
            prop_assert!((0.0..=fare).contains(value));
        }
        for pair in curve.windows(2) {
            prop_assert!(pair[0] >= pair[1]);
        }
        for remaining in 1..=capacity {
            let accept = littlewood_accept(lower_fare, &class, remaining).unwrap();
            prop_assert_eq!(accept, lower_fare >= curve[remaining as usize - 1]);
        }
    }

    /// Daily expansion reproduces checkpoint predictions exactly and stays
    /// inside the bracketing predictions everywhere else.
    #[test]
    fn daily_expansion_interpolates_checkpoint_predictions(
        bookings in prop::collection::vec((0.01f64..500.0, 0u32..20), 1..40),
        capacity in 1u32..=6,
        n_groups in 1u32..=4,
    ) {
        let grid = build_dcp_grid(20, n_groups).unwrap();
        let flights = vec![FlightBookings {
            label: "f0".to_string(),
            prices: bookings.iter().map(|b| b.0).collect(),
            days: bookings.iter().map(|b| b.1).collect(),
        }];
        let set = assemble_training_set(&flights, capacity, &grid).unwrap();
        let model = fit_simple_average(&set).unwrap();
        let matrix = model.expand_to_daily(capacity, 20, &grid).unwrap();

        let days = grid.days();
        for x in 1..=capacity {
            let preds: Vec<f64> =
                days.iter().map(|&d| model.predict_bid(x, d).unwrap()).collect();
            for (&d, &pred) in days.iter().zip(&preds) {
                prop_assert_eq!(matrix.lookup(x, d).unwrap(), pred.max(0.0));
            }
            for day in 0..20u32 {
                let v = matrix.lookup(x, day).unwrap();
                if day >= days[0] {
                    prop_assert_eq!(v, preds[0].max(0.0));
                } else if day <= *days.last().unwrap() {
                    prop_assert_eq!(v, preds.last().unwrap().max(0.0));
                } else {
                    let j = days.windows(2).position(|w| w[0] >= day && day >= w[1]).unwrap();
                    let lo = preds[j].min(preds[j + 1]).max(0.0);
                    let hi = preds[j].max(preds[j + 1]).max(0.0);
                    prop_assert!(
                        (lo - 1e-12..=hi + 1e-12).contains(&v),
                        "day {day}: {v} outside [{lo}, {hi}]"
                    );
                }
            }
        }
    }

    /// Bid-price tables survive a CSV round trip bit for bit.
    #[test]
    fn bid_matrix_csv_round_trip_is_exact(
        values in prop::collection::vec(0.0f64..1e12, 1..60),
        capacity in 1u32..=6,
    ) {
        let capacity = capacity.min(values.len() as u32);
        let horizon = (values.len() as u32) / capacity;
        let cells = (capacity * horizon) as usize;
        let matrix = BidPriceMatrix::from_values(
            capacity,
            horizon,
            rmbid_core::Origin::DpOptimal,
            values[..cells].to_vec(),
        )
        .unwrap();
        let text = matrix.to_csv_string();
        let back = BidPriceMatrix::from_csv_str(&text).unwrap();
        prop_assert_eq!(matrix, back);
    }

    /// Experiment results survive a CSV round trip bit for bit.
    #[test]
    fn results_csv_round_trip_is_exact(
        rows in prop::collection::vec(
            (0u32..1000, 0.1f64..10.0, 0.1f64..10.0, 0usize..3, 0.0f64..1e7,
             0.0f64..=1.0, -1.0f64..1.0, -1.0f64..1.0),
            1..20,
        )
    ) {
        let results: Vec<ExperimentResult> = rows
            .into_iter()
            .map(|(id, lt, le, p, rev, lf, rg, lg)| ExperimentResult {
                scenario_id: id,
                lambda_train: lt,
                lambda_test: le,
                policy: Policy::ALL[p],
                mean_revenue: rev,
                mean_load_factor: lf,
                revenue_gap_vs_optimal: rg,
                load_factor_gap_vs_optimal: lg,
            })
            .collect();
        let mut buf = Vec::new();
        write_results_csv(&mut buf, &results).unwrap();
        let back = read_results_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(results, back);
    }
}
