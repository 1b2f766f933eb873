//! Turning raw booking histories into estimator training sets.
//!
//! The construction needs no demand forecast: for each checkpoint day `d`
//! (data collection point, DCP), take the prices of the bookings made up to
//! `d` days before departure, sort them in descending order, and pad with
//! zeros up to capacity. The `k`-th entry of that vector is a price proxy for
//! the marginal value of the `k`-th remaining seat at checkpoint `d`: sold
//! seats answer with the price they fetched, unsold seats answer zero. The
//! training set pairs each `(seat index, checkpoint day)` with that proxy.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::exec;

/// One booking event, in the shape experiment artifacts use.
#[derive(Debug, Clone, PartialEq)]
pub struct BookingRecord {
    pub flight_id: u64,
    /// Whole days before departure when the booking was made.
    pub days_to_departure: u32,
    pub price: f64,
}

/// Checkpoint days, strictly decreasing (later checkpoints are closer to
/// departure; the last is usually day 0 area).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DcpGrid {
    days: Vec<u32>,
}

impl DcpGrid {
    pub fn new(days: Vec<u32>) -> Result<Self> {
        if days.is_empty() {
            return Err(Error::invalid_input("checkpoint grid must not be empty"));
        }
        if !days.windows(2).all(|w| w[0] > w[1]) {
            return Err(Error::invalid_input(format!(
                "checkpoint days must be strictly decreasing, got {days:?}"
            )));
        }
        Ok(DcpGrid { days })
    }

    pub fn days(&self) -> &[u32] {
        &self.days
    }

    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }
}

/// Divides a booking horizon into `n_groups` near-equal checkpoint intervals.
///
/// The first checkpoint is the day before the horizon opens relative to
/// departure (`horizon_days - 1`), the spacing is `horizon_days / n_groups`
/// rounded down, and any remainder is absorbed one day at a time by the
/// earliest intervals so the grid still ends close to departure.
pub fn build_dcp_grid(horizon_days: u32, n_groups: u32) -> Result<DcpGrid> {
    if n_groups == 0 {
        return Err(Error::invalid_parameter("need at least one checkpoint group"));
    }
    if horizon_days < n_groups {
        return Err(Error::invalid_parameter(format!(
            "cannot split a {horizon_days}-day horizon into {n_groups} checkpoint groups"
        )));
    }
    let base = horizon_days / n_groups;
    let mut remainder = horizon_days % n_groups;
    let mut days = Vec::with_capacity(n_groups as usize);
    let mut day = horizon_days - 1;
    days.push(day);
    for _ in 1..n_groups {
        let mut step = base;
        if remainder > 0 {
            step += 1;
            remainder -= 1;
        }
        day -= step;
        days.push(day);
    }
    DcpGrid::new(days)
}

/// Sorted-and-padded price proxies for one flight: one column per checkpoint,
/// each of length `capacity`.
///
/// The first checkpoint column includes every booking of the flight, even
/// ones made earlier than the checkpoint itself, so nothing observed is
/// discarded; later columns keep only bookings made at or after their
/// checkpoint (days-to-departure less than or equal to the checkpoint day).
/// If a flight somehow booked beyond capacity, the highest `capacity` prices
/// are kept.
pub fn transform_flight(
    prices: &[f64],
    days: &[u32],
    capacity: u32,
    grid: &DcpGrid,
) -> Result<Vec<Vec<f64>>> {
    if prices.len() != days.len() {
        return Err(Error::invalid_input(format!(
            "{} prices vs {} booking days",
            prices.len(),
            days.len()
        )));
    }
    if capacity == 0 {
        return Err(Error::invalid_input("capacity must be at least 1"));
    }
    if let Some(bad) = prices.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::invalid_input(format!(
            "booking prices must be finite and nonnegative, found {bad}"
        )));
    }
    let c = capacity as usize;
    let mut columns = Vec::with_capacity(grid.len());
    for (j, &dcp) in grid.days().iter().enumerate() {
        let mut column: Vec<f64> = prices
            .iter()
            .zip(days)
            .filter(|(_, &d)| j == 0 || d <= dcp)
            .map(|(p, _)| *p)
            .collect();
        column.sort_by(|a, b| b.partial_cmp(a).expect("prices are finite"));
        column.truncate(c);
        column.resize(c, 0.0);
        columns.push(column);
    }
    Ok(columns)
}

/// Bookings of one historical flight, ready for the transform.
#[derive(Debug, Clone, PartialEq)]
pub struct FlightBookings {
    /// External identifier, carried through to exported observations.
    pub label: String,
    pub prices: Vec<f64>,
    pub days: Vec<u32>,
}

impl FlightBookings {
    pub fn new(label: impl Into<String>, prices: Vec<f64>, days: Vec<u32>) -> Self {
        FlightBookings { label: label.into(), prices, days }
    }
}

/// One training example: seat index and checkpoint day in, price proxy out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationRow {
    /// Index into the flight list (not the external label).
    pub flight: usize,
    /// Seat index `1..=capacity`.
    pub capacity_index: u32,
    /// Checkpoint day to departure.
    pub dcp: u32,
    /// Price proxy for the marginal value of that seat at that checkpoint.
    pub target: f64,
}

/// A complete training set: `flights x checkpoints x capacity` rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    capacity: u32,
    grid: DcpGrid,
    flight_labels: Vec<String>,
    rows: Vec<ObservationRow>,
}

impl ObservationSet {
    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    pub fn grid(&self) -> &DcpGrid {
        &self.grid
    }

    pub fn n_flights(&self) -> usize {
        self.flight_labels.len()
    }

    pub fn flight_labels(&self) -> &[String] {
        &self.flight_labels
    }

    /// Rows ordered by (flight, checkpoint position, capacity index).
    pub fn rows(&self) -> &[ObservationRow] {
        &self.rows
    }
}

/// Runs the transform over a set of flights and stacks the results into one
/// training set.
pub fn assemble_training_set(
    flights: &[FlightBookings],
    capacity: u32,
    grid: &DcpGrid,
) -> Result<ObservationSet> {
    if flights.is_empty() {
        return Err(Error::invalid_input("need at least one flight to build observations"));
    }
    let per_flight: Vec<Result<Vec<Vec<f64>>>> = exec::map_indexed(flights.len(), |f| {
        transform_flight(&flights[f].prices, &flights[f].days, capacity, grid)
    });
    let mut rows = Vec::with_capacity(flights.len() * grid.len() * capacity as usize);
    let mut flight_labels = Vec::with_capacity(flights.len());
    for (f, (flight, columns)) in flights.iter().zip(per_flight).enumerate() {
        let columns = columns?;
        for (&dcp, column) in grid.days().iter().zip(&columns) {
            for (k, &target) in column.iter().enumerate() {
                rows.push(ObservationRow {
                    flight: f,
                    capacity_index: k as u32 + 1,
                    dcp,
                    target,
                });
            }
        }
        flight_labels.push(flight.label.clone());
    }
    Ok(ObservationSet { capacity, grid: grid.clone(), flight_labels, rows })
}

/// Groups unit booking rows read from a bookings CSV into flights.
///
/// Expected columns: `flight_id,days_to_departure,price` with an optional
/// fourth `quantity` column that expands into that many unit bookings.
/// Flights keep their first-appearance order.
pub fn read_bookings_csv(path: &Path) -> Result<Vec<FlightBookings>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)?;
    let headers = reader.headers().map_err(|e| Error::parse(e.to_string()))?.clone();
    let expected = ["flight_id", "days_to_departure", "price"];
    if headers.len() < 3
        || headers.iter().take(3).zip(expected).any(|(h, e)| h.trim() != e)
        || (headers.len() == 4 && headers.get(3).map(str::trim) != Some("quantity"))
        || headers.len() > 4
    {
        return Err(Error::parse(format!(
            "expected header flight_id,days_to_departure,price[,quantity], got {headers:?}"
        )));
    }
    let mut order: Vec<String> = Vec::new();
    let mut by_flight: HashMap<String, (Vec<f64>, Vec<u32>)> = HashMap::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::parse(e.to_string()))?;
        let line = i + 2; // header is line 1
        if record.len() < 3 || record.len() > 4 {
            return Err(Error::parse(format!("line {line}: expected 3 or 4 fields")));
        }
        let flight = record[0].trim().to_owned();
        let days: u32 = record[1]
            .trim()
            .parse()
            .map_err(|_| Error::parse(format!("line {line}: bad days_to_departure {:?}", &record[1])))?;
        let price: f64 = record[2]
            .trim()
            .parse()
            .map_err(|_| Error::parse(format!("line {line}: bad price {:?}", &record[2])))?;
        if !price.is_finite() || price < 0.0 {
            return Err(Error::parse(format!("line {line}: price must be nonnegative")));
        }
        let quantity: u32 = match record.get(3) {
            None | Some("") => 1,
            Some(q) => q
                .trim()
                .parse()
                .map_err(|_| Error::parse(format!("line {line}: bad quantity {q:?}")))?,
        };
        let entry = by_flight.entry(flight.clone()).or_insert_with(|| {
            order.push(flight.clone());
            (Vec::new(), Vec::new())
        });
        for _ in 0..quantity {
            entry.0.push(price);
            entry.1.push(days);
        }
    }
    if order.is_empty() {
        return Err(Error::invalid_input("bookings file contains no rows"));
    }
    Ok(order
        .into_iter()
        .map(|label| {
            let (prices, days) = by_flight.remove(&label).expect("label recorded on insert");
            FlightBookings { label, prices, days }
        })
        .collect())
}

/// Writes `flight_id,dcp,capacity_index,target` rows in set order.
pub fn write_observations_csv(set: &ObservationSet, path: &Path) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "flight_id,dcp,capacity_index,target")?;
    for row in set.rows() {
        writeln!(
            w,
            "{},{},{},{}",
            set.flight_labels[row.flight], row.dcp, row.capacity_index, row.target
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a file produced by [`write_observations_csv`] (or shaped like one)
/// back into a training set. The checkpoint grid and capacity are inferred
/// and the set must be complete: every flight needs a target for every
/// (checkpoint, seat) pair.
pub fn read_observations_csv(path: &Path) -> Result<ObservationSet> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let headers = reader.headers().map_err(|e| Error::parse(e.to_string()))?;
    let expected = ["flight_id", "dcp", "capacity_index", "target"];
    if headers.len() != 4 || headers.iter().zip(expected).any(|(h, e)| h.trim() != e) {
        return Err(Error::parse(format!(
            "expected header flight_id,dcp,capacity_index,target, got {headers:?}"
        )));
    }
    let mut flight_labels: Vec<String> = Vec::new();
    let mut flight_index: HashMap<String, usize> = HashMap::new();
    let mut grid_days: Vec<u32> = Vec::new();
    let mut rows: Vec<ObservationRow> = Vec::new();
    let mut capacity = 0u32;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::parse(e.to_string()))?;
        let line = i + 2;
        if record.len() != 4 {
            return Err(Error::parse(format!("line {line}: expected 4 fields")));
        }
        let label = record[0].trim().to_owned();
        let dcp: u32 = record[1]
            .trim()
            .parse()
            .map_err(|_| Error::parse(format!("line {line}: bad dcp {:?}", &record[1])))?;
        let capacity_index: u32 = record[2]
            .trim()
            .parse()
            .map_err(|_| Error::parse(format!("line {line}: bad capacity_index {:?}", &record[2])))?;
        let target: f64 = record[3]
            .trim()
            .parse()
            .map_err(|_| Error::parse(format!("line {line}: bad target {:?}", &record[3])))?;
        if capacity_index == 0 {
            return Err(Error::parse(format!("line {line}: capacity_index must be positive")));
        }
        if !target.is_finite() || target < 0.0 {
            return Err(Error::parse(format!("line {line}: target must be nonnegative")));
        }
        let flight = *flight_index.entry(label.clone()).or_insert_with(|| {
            flight_labels.push(label);
            flight_labels.len() - 1
        });
        if !grid_days.contains(&dcp) {
            grid_days.push(dcp);
        }
        capacity = capacity.max(capacity_index);
        rows.push(ObservationRow { flight, capacity_index, dcp, target });
    }
    if rows.is_empty() {
        return Err(Error::invalid_input("observations file contains no rows"));
    }
    let grid = DcpGrid::new(grid_days)?;
    let expected_rows = flight_labels.len() * grid.len() * capacity as usize;
    if rows.len() != expected_rows {
        return Err(Error::invalid_input(format!(
            "incomplete observation set: {} rows for {} flights x {} checkpoints x {} seats",
            rows.len(),
            flight_labels.len(),
            grid.len(),
            capacity
        )));
    }
    Ok(ObservationSet { capacity, grid, flight_labels, rows })
}
