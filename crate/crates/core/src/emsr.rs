//! Expected marginal seat revenue under Normal demand, and Littlewood's rule.
//!
//! For a fare class with Normal demand `D ~ N(mean, std^2)`, the expected
//! marginal revenue of holding the `s`-th seat for that class is
//! `fare * P(D > s)`. A lower-fare booking request should be accepted exactly
//! when its fare covers that marginal value.
//!
//! The Normal tail is computed locally (series + continued fraction for the
//! complementary error function) so the numerical behavior of this table
//! never changes underneath us; the test suite pins it against an independent
//! statistics library.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A fare class with normally distributed demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalDemandClass {
    pub fare: f64,
    pub mean: f64,
    pub std_dev: f64,
}

impl NormalDemandClass {
    pub fn new(fare: f64, mean: f64, std_dev: f64) -> Result<Self> {
        let class = NormalDemandClass { fare, mean, std_dev };
        class.validate()?;
        Ok(class)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.fare.is_finite() || self.fare < 0.0 {
            return Err(Error::invalid_parameter(format!(
                "fare must be finite and nonnegative, got {}",
                self.fare
            )));
        }
        if !self.mean.is_finite() {
            return Err(Error::invalid_parameter(format!(
                "demand mean must be finite, got {}",
                self.mean
            )));
        }
        if !self.std_dev.is_finite() || self.std_dev < 0.0 {
            return Err(Error::invalid_parameter(format!(
                "demand std dev must be finite and nonnegative, got {}",
                self.std_dev
            )));
        }
        Ok(())
    }

    /// `P(D > s)` for this class's demand distribution.
    pub fn demand_exceeds(&self, s: f64) -> f64 {
        if self.std_dev == 0.0 {
            // Degenerate demand concentrated at the mean.
            return if self.mean > s { 1.0 } else { 0.0 };
        }
        std_normal_ccdf((s - self.mean) / self.std_dev)
    }
}

/// Expected marginal revenue of seats `1..=capacity`:
/// entry `s-1` is `fare * P(D > s)`.
pub fn emsr_curve(class: &NormalDemandClass, capacity: u32) -> Result<Vec<f64>> {
    class.validate()?;
    if capacity == 0 {
        return Err(Error::invalid_parameter("capacity must be at least 1"));
    }
    Ok((1..=capacity).map(|s| class.fare * class.demand_exceeds(f64::from(s))).collect())
}

/// Littlewood's rule: accept a `lower_fare` request while `remaining` seats
/// are left exactly when the fare covers the marginal seat value. Ties
/// accept.
pub fn littlewood_accept(lower_fare: f64, class: &NormalDemandClass, remaining: u32) -> Result<bool> {
    class.validate()?;
    if !lower_fare.is_finite() || lower_fare < 0.0 {
        return Err(Error::invalid_parameter(format!(
            "fare must be finite and nonnegative, got {lower_fare}"
        )));
    }
    if remaining == 0 {
        return Err(Error::out_of_range("no seats remaining"));
    }
    Ok(lower_fare >= class.fare * class.demand_exceeds(f64::from(remaining)))
}

/// Standard normal upper tail `P(Z > z) = erfc(z / sqrt(2)) / 2`.
pub fn std_normal_ccdf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// Complementary error function, accurate to ~1e-15 relative over the range
/// the booking models use.
fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x <= 2.0 {
        1.0 - erf_series(x)
    } else {
        erfc_continued_fraction(x)
    }
}

/// Maclaurin series for erf, good for |x| <= 2:
/// `erf(x) = 2/sqrt(pi) * sum (-1)^n x^(2n+1) / (n! (2n+1))`.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut power = x; // (-1)^n x^(2n+1) / n!
    let mut sum = x;
    for n in 1..200 {
        power *= -x2 / n as f64;
        let term = power / (2 * n + 1) as f64;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum * 2.0 / std::f64::consts::PI.sqrt()
}

/// Classic continued fraction for the upper tail, evaluated with the
/// modified Lentz algorithm; converges quickly for x > 2:
/// `erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))`.
fn erfc_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = f;
    let mut d = 0.0;
    for n in 1..400 {
        let a = n as f64 / 2.0;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-17 {
            break;
        }
    }
    (-x * x).exp() / std::f64::consts::PI.sqrt() / f
}
