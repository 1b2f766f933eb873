//! Grouped aggregation of experiment results.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

use super::{ExperimentResult, Policy};

/// How scenarios are bucketed before aggregation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupBy {
    /// Evaluation-period arrival rate, rounded to one decimal.
    Lambda,
    /// Demand-shift ratio `lambda_test / lambda_train`, rounded to one
    /// decimal.
    Ratio,
}

/// Aggregates for one (group, policy) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    /// Bucket value (a rate or a ratio, at one-decimal resolution).
    pub group: f64,
    pub policy: Policy,
    pub n_scenarios: usize,
    pub mean_revenue_gap: f64,
    pub min_revenue_gap: f64,
    pub max_revenue_gap: f64,
    pub mean_load_factor_gap: f64,
    pub min_load_factor_gap: f64,
    pub max_load_factor_gap: f64,
    /// Mean over scenarios of (data-driven revenue / stale-DP revenue);
    /// only present on data-driven rows when both policies were run.
    pub mean_revenue_ratio_vs_misspecified: Option<f64>,
    /// Same construction for load factors.
    pub mean_load_factor_ratio_vs_misspecified: Option<f64>,
}

fn bucket_key(value: f64) -> Result<i64> {
    if !value.is_finite() {
        return Err(Error::invalid_input(format!("cannot bucket non-finite value {value}")));
    }
    Ok((value * 10.0).round() as i64)
}

/// Buckets results at one-decimal resolution and aggregates revenue and
/// load-factor gaps per (bucket, policy). Single-member buckets reproduce
/// their member's gaps as mean, min and max alike.
pub fn summarize(results: &[ExperimentResult], group_by: GroupBy) -> Result<Vec<SummaryRow>> {
    if results.is_empty() {
        return Err(Error::invalid_input("no results to summarize"));
    }
    let key_of = |r: &ExperimentResult| -> Result<i64> {
        match group_by {
            GroupBy::Lambda => bucket_key(r.lambda_test),
            GroupBy::Ratio => {
                if r.lambda_train <= 0.0 {
                    return Err(Error::invalid_input(format!(
                        "scenario {} has nonpositive training rate {}",
                        r.scenario_id, r.lambda_train
                    )));
                }
                bucket_key(r.lambda_test / r.lambda_train)
            }
        }
    };

    // (bucket, policy) -> accumulators over scenarios.
    struct Cell {
        n: usize,
        sum_rev_gap: f64,
        min_rev_gap: f64,
        max_rev_gap: f64,
        sum_lf_gap: f64,
        min_lf_gap: f64,
        max_lf_gap: f64,
    }
    let mut cells: BTreeMap<(i64, Policy), Cell> = BTreeMap::new();
    // scenario -> per-policy means, for the head-to-head ratios.
    let mut per_scenario: BTreeMap<u32, BTreeMap<Policy, (f64, f64)>> = BTreeMap::new();
    let mut scenario_bucket: BTreeMap<u32, i64> = BTreeMap::new();

    for r in results {
        let key = key_of(r)?;
        let cell = cells.entry((key, r.policy)).or_insert(Cell {
            n: 0,
            sum_rev_gap: 0.0,
            min_rev_gap: f64::INFINITY,
            max_rev_gap: f64::NEG_INFINITY,
            sum_lf_gap: 0.0,
            min_lf_gap: f64::INFINITY,
            max_lf_gap: f64::NEG_INFINITY,
        });
        cell.n += 1;
        cell.sum_rev_gap += r.revenue_gap_vs_optimal;
        cell.min_rev_gap = cell.min_rev_gap.min(r.revenue_gap_vs_optimal);
        cell.max_rev_gap = cell.max_rev_gap.max(r.revenue_gap_vs_optimal);
        cell.sum_lf_gap += r.load_factor_gap_vs_optimal;
        cell.min_lf_gap = cell.min_lf_gap.min(r.load_factor_gap_vs_optimal);
        cell.max_lf_gap = cell.max_lf_gap.max(r.load_factor_gap_vs_optimal);
        per_scenario
            .entry(r.scenario_id)
            .or_default()
            .insert(r.policy, (r.mean_revenue, r.mean_load_factor));
        scenario_bucket.insert(r.scenario_id, key);
    }

    // Head-to-head data-driven vs stale-DP, averaged within each bucket.
    let mut ratio_sums: BTreeMap<i64, (f64, f64, usize)> = BTreeMap::new();
    for (scenario, policies) in &per_scenario {
        if let (Some((dd_rev, dd_lf)), Some((mis_rev, mis_lf))) =
            (policies.get(&Policy::DataDriven), policies.get(&Policy::MisspecifiedDp))
        {
            if *mis_rev > 0.0 && *mis_lf > 0.0 {
                let bucket = scenario_bucket[scenario];
                let entry = ratio_sums.entry(bucket).or_insert((0.0, 0.0, 0));
                entry.0 += dd_rev / mis_rev;
                entry.1 += dd_lf / mis_lf;
                entry.2 += 1;
            }
        }
    }

    Ok(cells
        .into_iter()
        .map(|((key, policy), cell)| {
            let n = cell.n as f64;
            let ratios = if policy == Policy::DataDriven {
                ratio_sums.get(&key).filter(|(_, _, n)| *n > 0).map(|(rev, lf, n)| {
                    (rev / *n as f64, lf / *n as f64)
                })
            } else {
                None
            };
            SummaryRow {
                group: key as f64 / 10.0,
                policy,
                n_scenarios: cell.n,
                mean_revenue_gap: cell.sum_rev_gap / n,
                min_revenue_gap: cell.min_rev_gap,
                max_revenue_gap: cell.max_rev_gap,
                mean_load_factor_gap: cell.sum_lf_gap / n,
                min_load_factor_gap: cell.min_lf_gap,
                max_load_factor_gap: cell.max_lf_gap,
                mean_revenue_ratio_vs_misspecified: ratios.map(|r| r.0),
                mean_load_factor_ratio_vs_misspecified: ratios.map(|r| r.1),
            }
        })
        .collect())
}
