use serde::Serialize;

/// Outcome of one checked claim. Serializes to the fixed JSON schema
/// `claim_id, range, min_margin, passed, digits_used`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub claim_id: String,
    pub range: String,
    /// Smallest slack observed; `null` in JSON when no finite margin exists.
    pub min_margin: f64,
    pub passed: bool,
    #[serde(skip)]
    pub first_failure: Option<String>,
    pub digits_used: u32,
}

/// Running min-margin reduction for one claim.
///
/// A margin counts as established only when it exceeds the error bound of
/// its own evaluation; anything else is recorded as a failure. Observations
/// fed in index order make `first_failure` the lowest failing location.
#[derive(Clone, Debug)]
pub struct Tally {
    min_margin: f64,
    failure: Option<String>,
    observed: usize,
}

impl Default for Tally {
    fn default() -> Self {
        Self::new()
    }
}

impl Tally {
    pub fn new() -> Self {
        Self {
            min_margin: f64::INFINITY,
            failure: None,
            observed: 0,
        }
    }

    pub fn observe<F: FnOnce() -> String>(&mut self, margin: f64, error_bound: f64, location: F) {
        self.observed += 1;
        if (margin.is_nan() || margin < self.min_margin) && !self.min_margin.is_nan() {
            self.min_margin = margin;
        }
        let established = margin > error_bound.max(0.0);
        if !established && self.failure.is_none() {
            self.failure = Some(location());
        }
    }

    /// Record a failure that has no numeric margin.
    pub fn fail(&mut self, location: String) {
        self.observed += 1;
        if self.failure.is_none() {
            self.failure = Some(location);
        }
    }

    pub fn merge(mut self, other: Tally) -> Tally {
        self.observed += other.observed;
        if other.min_margin.is_nan() || other.min_margin < self.min_margin {
            self.min_margin = other.min_margin;
        }
        if self.failure.is_none() {
            self.failure = other.failure;
        }
        self
    }

    pub fn min_margin(&self) -> f64 {
        self.min_margin
    }

    pub fn finish(self, claim_id: &str, range: impl Into<String>, digits_used: u32) -> VerificationReport {
        let failure = if self.observed == 0 {
            Some("no observations".to_string())
        } else {
            self.failure
        };
        let passed = failure.is_none() && self.min_margin > 0.0;
        VerificationReport {
            claim_id: claim_id.to_string(),
            range: range.into(),
            min_margin: self.min_margin,
            passed,
            first_failure: failure,
            digits_used,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margin_must_beat_error_bound() {
        let mut t = Tally::new();
        t.observe(0.5, 0.1, || "a".into());
        t.observe(1e-20, 1e-18, || "b".into());
        t.observe(1e-30, 1e-40, || "c".into());
        let r = t.finish("claim", "n=1..3", 50);
        assert!(!r.passed);
        assert_eq!(r.first_failure.as_deref(), Some("b"));
        assert_eq!(r.min_margin, 1e-30);
    }

    #[test]
    fn empty_and_nan_tallies_fail() {
        assert!(!Tally::new().finish("x", "", 16).passed);
        let mut t = Tally::new();
        t.observe(1.0, 0.0, || "ok".into());
        t.observe(f64::NAN, 0.0, || "nan".into());
        t.observe(2.0, 0.0, || "ok".into());
        let r = t.finish("x", "", 16);
        assert!(r.min_margin.is_nan() && !r.passed);
    }

    #[test]
    fn merge_is_order_independent_for_margins() {
        let mk = |m: f64| {
            let mut t = Tally::new();
            t.observe(m, 0.0, || format!("{m}"));
            t
        };
        let ab = mk(0.3).merge(mk(0.1)).finish("c", "", 16);
        let ba = mk(0.1).merge(mk(0.3)).finish("c", "", 16);
        assert_eq!(ab.min_margin, ba.min_margin);
        assert!(ab.passed && ba.passed);
    }

    #[test]
    fn json_field_order() {
        let mut t = Tally::new();
        t.observe(0.25, 0.0, String::new);
        let json = serde_json::to_string(&t.finish("q_exceeds_p", "n=1..1", 50)).unwrap();
        assert_eq!(
            json,
            r#"{"claim_id":"q_exceeds_p","range":"n=1..1","min_margin":0.25,"passed":true,"digits_used":50}"#
        );
    }
}
