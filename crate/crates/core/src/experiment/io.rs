//! CSV serialization for experiment results and summaries.

use std::io::{Read, Write};
use std::str::FromStr;

use crate::error::{Error, Result};

use super::summary::SummaryRow;
use super::{ExperimentResult, Policy};

const RESULTS_HEADER: &[&str] = &[
    "scenario_id",
    "lambda_train",
    "lambda_test",
    "policy",
    "mean_revenue",
    "mean_load_factor",
    "revenue_gap_vs_optimal",
    "load_factor_gap_vs_optimal",
];

const SUMMARY_HEADER: &[&str] = &[
    "group",
    "policy",
    "n_scenarios",
    "mean_revenue_gap",
    "min_revenue_gap",
    "max_revenue_gap",
    "mean_load_factor_gap",
    "min_load_factor_gap",
    "max_load_factor_gap",
    "mean_revenue_ratio_vs_misspecified",
    "mean_load_factor_ratio_vs_misspecified",
];

/// Writes one row per (scenario, policy), floats at full precision.
pub fn write_results_csv<W: Write>(writer: W, results: &[ExperimentResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(RESULTS_HEADER).map_err(csv_error)?;
    for r in results {
        w.write_record(&[
            r.scenario_id.to_string(),
            r.lambda_train.to_string(),
            r.lambda_test.to_string(),
            r.policy.to_string(),
            r.mean_revenue.to_string(),
            r.mean_load_factor.to_string(),
            r.revenue_gap_vs_optimal.to_string(),
            r.load_factor_gap_vs_optimal.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a results file produced by [`write_results_csv`].
pub fn read_results_csv<R: Read>(reader: R) -> Result<Vec<ExperimentResult>> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers().map_err(csv_error)?.clone();
    if header.iter().collect::<Vec<_>>() != RESULTS_HEADER {
        return Err(Error::parse(format!(
            "unexpected results header: {:?}",
            header.iter().collect::<Vec<_>>()
        )));
    }
    let mut results = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record.map_err(csv_error)?;
        if record.len() != RESULTS_HEADER.len() {
            return Err(Error::parse(format!(
                "results row {} has {} fields, expected {}",
                i + 1,
                record.len(),
                RESULTS_HEADER.len()
            )));
        }
        let field = |j: usize| record.get(j).unwrap_or_default();
        results.push(ExperimentResult {
            scenario_id: parse_field(field(0), i, "scenario_id")?,
            lambda_train: parse_field(field(1), i, "lambda_train")?,
            lambda_test: parse_field(field(2), i, "lambda_test")?,
            policy: Policy::from_str(field(3))
                .map_err(|e| Error::parse(format!("results row {}: {e}", i + 1)))?,
            mean_revenue: parse_field(field(4), i, "mean_revenue")?,
            mean_load_factor: parse_field(field(5), i, "mean_load_factor")?,
            revenue_gap_vs_optimal: parse_field(field(6), i, "revenue_gap_vs_optimal")?,
            load_factor_gap_vs_optimal: parse_field(field(7), i, "load_factor_gap_vs_optimal")?,
        });
    }
    Ok(results)
}

/// Writes one row per (group, policy); the head-to-head ratio columns are
/// empty on rows where they do not apply.
pub fn write_summary_csv<W: Write>(writer: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SUMMARY_HEADER).map_err(csv_error)?;
    for row in rows {
        w.write_record(&[
            format!("{:.1}", row.group),
            row.policy.to_string(),
            row.n_scenarios.to_string(),
            row.mean_revenue_gap.to_string(),
            row.min_revenue_gap.to_string(),
            row.max_revenue_gap.to_string(),
            row.mean_load_factor_gap.to_string(),
            row.min_load_factor_gap.to_string(),
            row.max_load_factor_gap.to_string(),
            row.mean_revenue_ratio_vs_misspecified
                .map(|v| v.to_string())
                .unwrap_or_default(),
            row.mean_load_factor_ratio_vs_misspecified
                .map(|v| v.to_string())
                .unwrap_or_default(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_field<T: FromStr>(value: &str, row: usize, name: &str) -> Result<T> {
    value.parse().map_err(|_| {
        Error::parse(format!("results row {}: bad {name} value {value:?}", row + 1))
    })
}

fn csv_error(e: csv::Error) -> Error {
    Error::parse(e.to_string())
}
