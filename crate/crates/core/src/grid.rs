//! Uniform grids with exact rational nodes, written `start:step:count`.

use std::fmt;

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("expected start:step:count, got '{0}'")]
    Format(String),
    #[error("cannot parse '{0}' as an exact rational")]
    Number(String),
    #[error("grid count must be at least 1")]
    EmptyGrid,
    #[error("grid step must be nonzero when count > 1")]
    ZeroStep,
}

/// `count` nodes `start + k * step`, `k = 0..count`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridSpec {
    pub start: Ratio<i64>,
    pub step: Ratio<i64>,
    pub count: usize,
}

/// Parses `3`, `-0.25`, `1e-2` or `1/3` exactly.
pub fn parse_rational(text: &str) -> Result<Ratio<i64>, GridError> {
    let t = text.trim();
    let err = || GridError::Number(text.to_string());
    if let Some((n, d)) = t.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| err())?;
        let d: i64 = d.trim().parse().map_err(|_| err())?;
        if d == 0 {
            return Err(err());
        }
        return Ok(Ratio::new(n, d));
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| err())?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(err());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let all = format!("{int}{frac}");
    let numer: i64 = if all.is_empty() {
        0
    } else {
        all.parse().map_err(|_| err())?
    };
    let scale = exponent - frac.len() as i32;
    let pow = |e: u32| 10i64.checked_pow(e).ok_or_else(err);
    let mut r = if scale >= 0 {
        Ratio::from_integer(numer.checked_mul(pow(scale as u32)?).ok_or_else(err)?)
    } else {
        Ratio::new(numer, pow((-scale) as u32)?)
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

pub fn ratio_to_f64(r: &Ratio<i64>) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

impl GridSpec {
    pub fn new(start: Ratio<i64>, step: Ratio<i64>, count: usize) -> Result<Self, GridError> {
        if count == 0 {
            return Err(GridError::EmptyGrid);
        }
        if count > 1 && step.is_zero() {
            return Err(GridError::ZeroStep);
        }
        Ok(Self { start, step, count })
    }

    pub fn parse(text: &str) -> Result<Self, GridError> {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(GridError::Format(text.to_string()));
        }
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| GridError::Format(text.to_string()))?;
        Self::new(parse_rational(parts[0])?, parse_rational(parts[1])?, count)
    }

    pub fn single(value: Ratio<i64>) -> Self {
        Self {
            start: value,
            step: Ratio::zero(),
            count: 1,
        }
    }

    pub fn points(&self) -> Vec<Ratio<i64>> {
        (0..self.count)
            .map(|k| self.start + self.step * Ratio::from_integer(k as i64))
            .collect()
    }

    pub fn points_f64(&self) -> Vec<f64> {
        self.points().iter().map(ratio_to_f64).collect()
    }

    fn last(&self) -> Ratio<i64> {
        self.start + self.step * Ratio::from_integer(self.count as i64 - 1)
    }

    /// Whether `x` lies between the first and last node, inclusive.
    pub fn contains_range(&self, x: &Ratio<i64>) -> bool {
        let (a, b) = (self.start, self.last());
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        *x >= lo && *x <= hi
    }

    /// Index of the node equal to `x`, if any.
    pub fn index_of(&self, x: &Ratio<i64>) -> Option<usize> {
        if self.step.is_zero() {
            return (*x == self.start).then_some(0);
        }
        let k = (x - self.start) / self.step;
        if !k.is_integer() {
            return None;
        }
        let k = k.to_integer();
        (k >= 0 && (k as usize) < self.count).then_some(k as usize)
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.step, self.count)
    }
}
