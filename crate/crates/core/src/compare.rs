//! Side-by-side evaluation of every bound family over a grid.

use serde::Serialize;

use crate::bounds::{BoundFamily, BoundSet};
use crate::error::Result;
use crate::exec::Execution;
use crate::precision::{Arithmetic, Real};
use crate::special_fn::Modulus;
use crate::verify::{Certified, PointCertifier, SandwichCheck};

/// One grid point: `K`, every bound, the tightest family on each side, and
/// any bound that `K` certainly violates.
#[derive(Clone, Debug)]
pub struct ComparisonRow<R> {
    pub r: f64,
    pub k_value: R,
    pub bounds: BoundSet<R>,
    pub tightest_lower: BoundFamily,
    pub tightest_upper: BoundFamily,
    pub violations: Vec<BoundFamily>,
    /// `new_upper < ar_upper` could not be established.
    pub ar_not_dominated: bool,
    /// Error bound on the differences between entries of this row.
    pub error_bound: f64,
}

/// Family with the smallest upper bound; earlier entries win ties.
pub fn tightest_upper<R: Real>(b: &BoundSet<R>) -> BoundFamily {
    pick(&b.uppers(), |candidate, best| candidate < best)
}

/// Family with the largest lower bound; earlier entries win ties.
pub fn tightest_lower<R: Real>(b: &BoundSet<R>) -> BoundFamily {
    pick(&b.lowers(), |candidate, best| candidate > best)
}

fn pick<R: Real>(entries: &[(BoundFamily, &R)], better: impl Fn(f64, f64) -> bool) -> BoundFamily {
    let mut best: Option<(BoundFamily, f64)> = None;
    for &(family, value) in entries {
        let v = value.as_f64();
        if !v.is_finite() {
            continue;
        }
        match best {
            Some((_, b)) if !better(v, b) => {}
            _ => best = Some((family, v)),
        }
    }
    best.map(|(f, _)| f).unwrap_or(entries[0].0)
}

fn family_for(check: SandwichCheck) -> Option<BoundFamily> {
    match check {
        SandwichCheck::NewLower => Some(BoundFamily::NewLower),
        SandwichCheck::NewUpper => Some(BoundFamily::NewUpper),
        SandwichCheck::AvvUpper => Some(BoundFamily::AvvUpper),
        SandwichCheck::WclcLower => Some(BoundFamily::WclcLower),
        SandwichCheck::WclcUpper => Some(BoundFamily::WclcUpper),
        SandwichCheck::NewBelowAr => None,
    }
}

fn row_from<R: Real>(cert: &Certified, k_value: R, bounds: BoundSet<R>, working_error: f64) -> ComparisonRow<R> {
    let violations = SandwichCheck::ALL
        .iter()
        .filter(|&&c| cert.violated(c))
        .filter_map(|&c| family_for(c))
        .collect();
    ComparisonRow {
        r: cert.r,
        tightest_lower: tightest_lower(&bounds),
        tightest_upper: tightest_upper(&bounds),
        k_value,
        bounds,
        violations,
        ar_not_dominated: !cert.holds(SandwichCheck::NewBelowAr),
        error_bound: working_error,
    }
}

/// The row at one modulus, with signs certified in extended precision when
/// the working precision cannot resolve them.
pub fn comparison_row<A: Arithmetic>(
    certifier: &PointCertifier<A>,
    r: Modulus,
) -> Result<ComparisonRow<A::Real>> {
    let (cert, k, bounds) = certifier.evaluate(r)?;
    let working_error = certifier.working(r)?.error_bound;
    Ok(row_from(&cert, k, bounds, working_error))
}

/// Which family of a pair is tighter, as maximal runs of consecutive grid
/// points `(first_r, last_r)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairSummary {
    pub first: BoundFamily,
    pub second: BoundFamily,
    pub first_tighter: Vec<(f64, f64)>,
    pub second_tighter: Vec<(f64, f64)>,
    pub ties: usize,
}

/// Largest certified gap on each side of the new-versus-quartic upper comparison.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Witnesses {
    /// `(r, new_upper − wclc_upper)`.
    pub wclc_tighter: Option<(f64, f64)>,
    /// `(r, wclc_upper − new_upper)`.
    pub new_tighter: Option<(f64, f64)>,
}

#[derive(Clone, Debug)]
pub struct Comparison<R> {
    pub rows: Vec<ComparisonRow<R>>,
    pub pairs: Vec<PairSummary>,
    pub witnesses: Witnesses,
}

impl<R> Comparison<R> {
    pub fn violation_count(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| !r.violations.is_empty() || r.ar_not_dominated)
            .count()
    }
}

/// Upper pairs in family order, then the lower pair.
pub fn family_pairs() -> Vec<(BoundFamily, BoundFamily)> {
    use BoundFamily::*;
    let uppers = [NewUpper, ArUpper, AvvUpper, WclcUpper];
    let mut pairs = Vec::new();
    for (i, &a) in uppers.iter().enumerate() {
        for &b in &uppers[i + 1..] {
            pairs.push((a, b));
        }
    }
    pairs.push((NewLower, WclcLower));
    pairs
}

#[derive(Clone, Copy, PartialEq)]
enum Side {
    First,
    Second,
    Tie,
}

fn summarize_pair<R: Real>(rows: &[ComparisonRow<R>], first: BoundFamily, second: BoundFamily) -> PairSummary {
    let upper = first.is_upper();
    let mut summary = PairSummary {
        first,
        second,
        first_tighter: Vec::new(),
        second_tighter: Vec::new(),
        ties: 0,
    };
    let mut run: Option<(Side, f64, f64)> = None;
    let close = |run: Option<(Side, f64, f64)>, s: &mut PairSummary| match run {
        Some((Side::First, a, b)) => s.first_tighter.push((a, b)),
        Some((Side::Second, a, b)) => s.second_tighter.push((a, b)),
        _ => {}
    };
    for row in rows {
        let a = row.bounds.get(first);
        let b = row.bounds.get(second);
        let side = if a == b {
            Side::Tie
        } else if (a < b) == upper {
            Side::First
        } else {
            Side::Second
        };
        if side == Side::Tie {
            summary.ties += 1;
        }
        run = match run {
            Some((s, start, _)) if s == side => Some((s, start, row.r)),
            previous => {
                close(previous, &mut summary);
                Some((side, row.r, row.r))
            }
        };
    }
    close(run, &mut summary);
    summary
}

fn witnesses<R: Real>(rows: &[ComparisonRow<R>]) -> Witnesses {
    let mut w = Witnesses::default();
    for row in rows {
        let gap = (row.bounds.new_upper.value.clone() - row.bounds.wclc_upper.clone()).as_f64();
        if gap > row.error_bound && w.wclc_tighter.is_none_or(|(_, g)| gap > g) {
            w.wclc_tighter = Some((row.r, gap));
        }
        if -gap > row.error_bound && w.new_tighter.is_none_or(|(_, g)| -gap > g) {
            w.new_tighter = Some((row.r, -gap));
        }
    }
    w
}

/// Evaluate every row (in parallel if requested) and summarise in grid order.
pub fn compare<A: Arithmetic>(
    ctx: &A,
    grid: &[Modulus],
    escalation_digits: u32,
    exec: Execution,
) -> Result<Comparison<A::Real>> {
    let certifier = PointCertifier::new(ctx, escalation_digits)?;
    let rows: Vec<ComparisonRow<A::Real>> = exec
        .map(grid, |&r| comparison_row(&certifier, r))
        .into_iter()
        .collect::<Result<_>>()?;
    let pairs = family_pairs()
        .into_iter()
        .map(|(a, b)| summarize_pair(&rows, a, b))
        .collect();
    let witnesses = witnesses(&rows);
    Ok(Comparison {
        rows,
        pairs,
        witnesses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::precision::Hardware;

    #[test]
    fn half_modulus_row() {
        let certifier = PointCertifier::new(&Hardware, 50).unwrap();
        let row = comparison_row(&certifier, Modulus::new(0.5).unwrap()).unwrap();
        assert!(row.violations.is_empty() && !row.ar_not_dominated);
        assert_eq!(row.tightest_upper, BoundFamily::NewUpper);
        // The quartic-correction lower bound beats both new branches at r = 0.5.
        assert_eq!(row.tightest_lower, BoundFamily::WclcLower);
    }

    #[test]
    fn tags_follow_min_and_max() {
        let grid = GridSpec::new(0.01, 1.0, 0.01).unwrap().points().unwrap();
        let cmp = compare(&Hardware, &grid, 50, Execution::Parallel).unwrap();
        assert_eq!(cmp.rows.len(), 99);
        assert_eq!(cmp.violation_count(), 0);
        for row in &cmp.rows {
            let min = row.bounds.uppers().iter().map(|(_, v)| **v).fold(f64::INFINITY, f64::min);
            let max = row.bounds.lowers().iter().map(|(_, v)| **v).fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(*row.bounds.get(row.tightest_upper), min);
            assert_eq!(*row.bounds.get(row.tightest_lower), max);
            assert!(row.bounds.new_upper.value < row.bounds.ar_upper);
        }
        assert!(cmp.witnesses.new_tighter.is_some());
        assert!(cmp.witnesses.wclc_tighter.is_some());
        assert_eq!(cmp.pairs.len(), 7);
        let ar_pair = &cmp.pairs[0];
        assert_eq!((ar_pair.first, ar_pair.second), (BoundFamily::NewUpper, BoundFamily::ArUpper));
        assert_eq!(ar_pair.first_tighter, vec![(0.01, 0.99)]);
        assert!(ar_pair.second_tighter.is_empty());
    }

    #[test]
    fn infinite_entries_are_skipped() {
        assert_eq!(
            pick(&[(BoundFamily::NewUpper, &f64::NAN), (BoundFamily::ArUpper, &2.0)], |a, b| a < b),
            BoundFamily::ArUpper
        );
    }
}
