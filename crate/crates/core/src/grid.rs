//! `start:stop:step` grids over the modulus.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::special_fn::Modulus;

// Grid points are snapped to this resolution so that `0.1 + 2·0.1` prints as 0.3.
const SNAP: f64 = 1e12;

/// Inclusive start, exclusive stop, with `0 < start < stop ≤ 1` and `step > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GridSpec {
    /// `0.0001, 0.0002, …, 0.9999`.
    pub const SANDWICH: GridSpec = GridSpec {
        start: 1e-4,
        stop: 1.0,
        step: 1e-4,
    };

    /// `0.05, 0.10, …, 0.95`.
    pub const SHAPE: GridSpec = GridSpec {
        start: 0.05,
        stop: 1.0,
        step: 0.05,
    };

    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        let spec = Self { start, stop, step };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        let Self { start, stop, step } = *self;
        if !(start > 0.0 && start < stop && stop <= 1.0) {
            return Err(Error::InvalidGrid(format!(
                "need 0 < start < stop <= 1, got {start}:{stop}"
            )));
        }
        if !(step >= 1.0 / SNAP && step.is_finite()) {
            return Err(Error::InvalidGrid(format!("step must be at least 1e-12, got {step}")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        let quotient = (self.stop - self.start) / self.step;
        (quotient - 1e-7).ceil().max(0.0) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> Result<Vec<Modulus>> {
        self.validate()?;
        (0..self.len())
            .map(|i| {
                let r = ((self.start + i as f64 * self.step) * SNAP).round() / SNAP;
                Modulus::interior(r)
            })
            .collect()
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, c] = parts.as_slice() else {
            return Err(Error::InvalidGrid(format!("expected start:stop:step, got {s:?}")));
        };
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidGrid(format!("not a number: {t:?}")))
        };
        GridSpec::new(num(a)?, num(b)?, num(c)?)
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}

/// `r=first..last (n points)`.
pub fn describe(points: &[Modulus]) -> String {
    match (points.first(), points.last()) {
        (Some(a), Some(b)) => format!("r={a}..{b} ({} points)", points.len()),
        _ => "empty grid".to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grids() {
        let s = GridSpec::SANDWICH.points().unwrap();
        assert_eq!(s.len(), 9999);
        assert_eq!(s[0].value(), 1e-4);
        assert_eq!(s[9998].value(), 0.9999);
        assert_eq!(s[2].value(), 0.0003);
        let shape = GridSpec::SHAPE.points().unwrap();
        assert_eq!(shape.len(), 19);
        assert_eq!(shape[18].value(), 0.95);
    }

    #[test]
    fn exclusive_stop() {
        let g: GridSpec = "0.01:0.99:0.01".parse().unwrap();
        let pts = g.points().unwrap();
        assert_eq!(pts.len(), 98);
        assert_eq!(pts.last().unwrap().value(), 0.98);
        assert_eq!("0.01:1:0.01".parse::<GridSpec>().unwrap().len(), 99);
        assert_eq!("0.1:0.4:0.1".parse::<GridSpec>().unwrap().points().unwrap()[2].value(), 0.3);
    }

    #[test]
    fn rejects_bad_specs() {
        for bad in ["0:0.5:0.1", "0.5:0.4:0.1", "0.1:1.5:0.1", "0.1:0.5:0", "0.1:0.5", "a:b:c", "0.1:0.5:-1"] {
            assert!(matches!(bad.parse::<GridSpec>(), Err(Error::InvalidGrid(_))), "{bad}");
        }
    }
}
