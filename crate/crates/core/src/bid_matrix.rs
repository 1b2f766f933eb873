//! Bid-price matrices: the table a pricing policy consults at booking time.
//!
//! Entry `(x, t)` is the marginal value of the `x`-th remaining seat with `t`
//! whole days left to departure, so `x` runs over `1..=capacity` and `t` over
//! `0..horizon_days`. Day 0 is departure day.

use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a matrix was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    /// Exact dynamic program under known demand parameters.
    DpOptimal,
    /// Estimator trained on booking data.
    DataDriven,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Origin::DpOptimal => "dp_optimal",
            Origin::DataDriven => "data_driven",
        })
    }
}

impl FromStr for Origin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dp_optimal" => Ok(Origin::DpOptimal),
            "data_driven" => Ok(Origin::DataDriven),
            other => Err(Error::parse(format!("unknown matrix origin {other:?}"))),
        }
    }
}

/// Dense bid-price table over remaining capacity and days to departure.
#[derive(Debug, Clone, PartialEq)]
pub struct BidPriceMatrix {
    capacity: u32,
    horizon_days: u32,
    origin: Origin,
    /// Row-major: row for capacity `x` holds `horizon_days` day values.
    values: Vec<f64>,
}

impl BidPriceMatrix {
    /// Builds a matrix from row-major values (capacity rows of
    /// `horizon_days` entries each). Bid prices must be finite and
    /// nonnegative.
    pub fn from_values(
        capacity: u32,
        horizon_days: u32,
        origin: Origin,
        values: Vec<f64>,
    ) -> Result<Self> {
        if capacity == 0 || horizon_days == 0 {
            return Err(Error::invalid_input("matrix dimensions must be at least 1x1"));
        }
        let expected = capacity as usize * horizon_days as usize;
        if values.len() != expected {
            return Err(Error::invalid_input(format!(
                "expected {expected} values for a {capacity}x{horizon_days} matrix, got {}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::invalid_input(format!(
                "bid prices must be finite and nonnegative, found {bad}"
            )));
        }
        Ok(BidPriceMatrix { capacity, horizon_days, origin, values })
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    pub fn horizon_days(&self) -> u32 {
        self.horizon_days
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    /// Bid price for the `remaining`-th seat with `day` whole days left.
    pub fn lookup(&self, remaining: u32, day: u32) -> Result<f64> {
        if remaining == 0 || remaining > self.capacity {
            return Err(Error::out_of_range(format!(
                "remaining capacity {remaining} outside 1..={}",
                self.capacity
            )));
        }
        if day >= self.horizon_days {
            return Err(Error::out_of_range(format!(
                "day {day} outside 0..{}",
                self.horizon_days
            )));
        }
        Ok(self.value(remaining, day))
    }

    /// Unchecked variant of [`lookup`](Self::lookup) for validated callers.
    pub(crate) fn value(&self, remaining: u32, day: u32) -> f64 {
        debug_assert!(remaining >= 1 && remaining <= self.capacity);
        debug_assert!(day < self.horizon_days);
        self.values[(remaining as usize - 1) * self.horizon_days as usize + day as usize]
    }

    /// Writes the matrix as CSV: a named header line, a dimensions line, then
    /// one row per remaining-capacity level with full `f64` precision.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "capacity,horizon_days,origin")?;
        writeln!(w, "{},{},{}", self.capacity, self.horizon_days, self.origin)?;
        let t = self.horizon_days as usize;
        let mut line = String::new();
        for row in self.values.chunks_exact(t) {
            line.clear();
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    line.push(',');
                }
                // Display for f64 prints the shortest digits that round-trip.
                fmt::write(&mut line, format_args!("{v}")).expect("writing to String");
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::parse("empty bid-price file"))??;
        if header.trim() != "capacity,horizon_days,origin" {
            return Err(Error::parse(format!("unexpected header {header:?}")));
        }
        let dims = lines
            .next()
            .ok_or_else(|| Error::parse("missing dimensions line"))??;
        let fields: Vec<&str> = dims.trim().split(',').collect();
        if fields.len() != 3 {
            return Err(Error::parse(format!("expected 3 dimension fields, got {dims:?}")));
        }
        let capacity: u32 = fields[0]
            .parse()
            .map_err(|_| Error::parse(format!("bad capacity {:?}", fields[0])))?;
        let horizon_days: u32 = fields[1]
            .parse()
            .map_err(|_| Error::parse(format!("bad horizon {:?}", fields[1])))?;
        let origin: Origin = fields[2].parse()?;
        let mut values = Vec::with_capacity(capacity as usize * horizon_days as usize);
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row: Vec<f64> = line
                .trim()
                .split(',')
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| Error::parse(format!("bad bid price {f:?} in row {}", i + 1)))
                })
                .collect::<Result<_>>()?;
            if row.len() != horizon_days as usize {
                return Err(Error::parse(format!(
                    "row {} has {} values, expected {horizon_days}",
                    i + 1,
                    row.len()
                )));
            }
            values.extend_from_slice(&row);
        }
        BidPriceMatrix::from_values(capacity, horizon_days, origin, values)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path)?;
        let mut w = BufWriter::new(file);
        self.write_csv(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path)?;
        Self::read_csv(BufReader::new(file))
    }

    /// Serializes to an in-memory CSV string (mainly for tests and hashing).
    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }

    pub fn from_csv_str(s: &str) -> Result<Self> {
        Self::read_csv(io::Cursor::new(s))
    }
}
