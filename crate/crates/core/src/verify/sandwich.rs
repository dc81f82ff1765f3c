use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Tally, VerificationReport};
use crate::bounds::{all_bounds, constants, BoundConstants, BoundSet};
use crate::error::Result;
use crate::exec::Execution;
use crate::grid::describe;
use crate::precision::{Arithmetic, Extended, Real};
use crate::special_fn::{ellipk_agm, log_one_minus_r_squared, Modulus};

/// The ordering claims checked at every grid point. Each margin is oriented
/// so that the claim holds iff it is positive.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SandwichCheck {
    /// `K − new_lower`
    NewLower,
    /// `new_upper − K`
    NewUpper,
    /// `ar_upper − new_upper`
    NewBelowAr,
    /// `avv_upper − K`
    AvvUpper,
    /// `K − wclc_lower`
    WclcLower,
    /// `wclc_upper − K`
    WclcUpper,
}

impl SandwichCheck {
    pub const ALL: [SandwichCheck; 6] = [
        SandwichCheck::NewLower,
        SandwichCheck::NewUpper,
        SandwichCheck::NewBelowAr,
        SandwichCheck::AvvUpper,
        SandwichCheck::WclcLower,
        SandwichCheck::WclcUpper,
    ];

    pub fn claim_id(self) -> &'static str {
        match self {
            SandwichCheck::NewLower => "sandwich_new_lower",
            SandwichCheck::NewUpper => "sandwich_new_upper",
            SandwichCheck::NewBelowAr => "new_upper_below_ar",
            SandwichCheck::AvvUpper => "avv_upper",
            SandwichCheck::WclcLower => "wclc_lower",
            SandwichCheck::WclcUpper => "wclc_upper",
        }
    }

    fn margin<R: Real>(self, k: &R, b: &BoundSet<R>) -> R {
        match self {
            SandwichCheck::NewLower => k.clone() - b.new_lower.value.clone(),
            SandwichCheck::NewUpper => b.new_upper.value.clone() - k.clone(),
            SandwichCheck::NewBelowAr => b.ar_upper.clone() - b.new_upper.value.clone(),
            SandwichCheck::AvvUpper => b.avv_upper.clone() - k.clone(),
            SandwichCheck::WclcLower => k.clone() - b.wclc_lower.clone(),
            SandwichCheck::WclcUpper => b.wclc_upper.clone() - k.clone(),
        }
    }
}

/// Margins at one modulus with a bound on the rounding error of each.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Certified {
    pub r: f64,
    pub margins: [f64; 6],
    pub error_bound: f64,
    /// Digits of the context the margins come from.
    pub digits: u32,
}

impl Certified {
    /// Every margin is either clearly positive or clearly negative.
    pub fn resolved(&self) -> bool {
        self.margins.iter().all(|m| m.abs() > self.error_bound)
    }

    pub fn holds(&self, check: SandwichCheck) -> bool {
        self.margins[check as usize] > self.error_bound
    }

    /// Certainly violated, as opposed to unresolved.
    pub fn violated(&self, check: SandwichCheck) -> bool {
        self.margins[check as usize] < -self.error_bound
    }
}

// Every bound and K are O(1) combinations of N/D, log terms and K itself;
// 64 roundings of the largest magnitude involved covers all of them.
fn margin_error<A: Arithmetic>(ctx: &A, k: f64, log_term: f64) -> f64 {
    64.0 * ctx.unit_roundoff() * (k.abs() + 8.0 * log_term.abs() + 8.0)
}

/// Margins at `r` evaluated entirely in `ctx`.
pub fn margins_at<A: Arithmetic>(
    ctx: &A,
    c: &BoundConstants<A::Real>,
    r: Modulus,
) -> Result<(Certified, A::Real, BoundSet<A::Real>)> {
    r.require_open("sandwich")?;
    let k = ellipk_agm(ctx, r)?;
    let bounds = all_bounds(ctx, r, c)?;
    let log_term = log_one_minus_r_squared(ctx, r)?.as_f64();
    let margins = SandwichCheck::ALL.map(|check| check.margin(&k, &bounds).as_f64());
    let certified = Certified {
        r: r.value(),
        margins,
        error_bound: margin_error(ctx, k.as_f64(), log_term),
        digits: ctx.digits(),
    };
    Ok((certified, k, bounds))
}

/// Evaluates in a working context and falls back to extended precision where
/// the working precision cannot decide a sign.
#[derive(Clone, Debug)]
pub struct PointCertifier<A: Arithmetic> {
    ctx: A,
    constants: BoundConstants<A::Real>,
    escalation: Extended,
    escalation_constants: BoundConstants<<Extended as Arithmetic>::Real>,
}

impl<A: Arithmetic> PointCertifier<A> {
    pub fn new(ctx: &A, escalation_digits: u32) -> Result<Self> {
        let digits = escalation_digits.max(2 * ctx.digits());
        let escalation = Extended::new(digits)?;
        Ok(Self {
            ctx: ctx.clone(),
            constants: constants(ctx),
            escalation_constants: constants(&escalation),
            escalation,
        })
    }

    pub fn constants(&self) -> &BoundConstants<A::Real> {
        &self.constants
    }

    /// Margins in the working context only.
    pub fn working(&self, r: Modulus) -> Result<Certified> {
        Ok(margins_at(&self.ctx, &self.constants, r)?.0)
    }

    /// Margins in the escalation context only.
    pub fn escalated(&self, r: Modulus) -> Result<Certified> {
        Ok(margins_at(&self.escalation, &self.escalation_constants, r)?.0)
    }

    /// Working margins, replaced by escalated ones if any sign is unresolved.
    pub fn certify(&self, r: Modulus) -> Result<Certified> {
        let first = self.working(r)?;
        if first.resolved() {
            Ok(first)
        } else {
            self.escalated(r)
        }
    }

    /// Working-precision values together with certified margins.
    pub fn evaluate(&self, r: Modulus) -> Result<(Certified, A::Real, BoundSet<A::Real>)> {
        let (first, k, bounds) = margins_at(&self.ctx, &self.constants, r)?;
        let certified = if first.resolved() {
            first
        } else {
            self.escalated(r)?
        };
        Ok((certified, k, bounds))
    }

    pub fn context(&self) -> &A {
        &self.ctx
    }

    pub fn escalation_digits(&self) -> u32 {
        self.escalation.digits()
    }
}

/// [`PointCertifier`] at one modulus with a fresh certifier.
pub fn certify_point<A: Arithmetic>(ctx: &A, r: Modulus, escalation_digits: u32) -> Result<Certified> {
    PointCertifier::new(ctx, escalation_digits)?.certify(r)
}

#[derive(Clone, Copy, Debug)]
pub struct SandwichOptions {
    pub escalation_digits: u32,
    /// Random moduli re-evaluated in extended precision; 0 disables.
    pub spot_checks: usize,
    pub seed: u64,
    pub exec: Execution,
}

impl Default for SandwichOptions {
    fn default() -> Self {
        Self {
            escalation_digits: 50,
            spot_checks: 100,
            seed: 0x5eed_2024,
            exec: Execution::default(),
        }
    }
}

/// One report per [`SandwichCheck`], plus an extended-precision spot check
/// that also validates the working-precision error bounds.
pub fn verify_sandwich<A: Arithmetic>(
    ctx: &A,
    grid: &[Modulus],
    opts: &SandwichOptions,
) -> Result<Vec<VerificationReport>> {
    let certifier = PointCertifier::new(ctx, opts.escalation_digits)?;
    let points: Vec<Certified> = opts
        .exec
        .map(grid, |&r| certifier.certify(r))
        .into_iter()
        .collect::<Result<_>>()?;
    let escalated = points.iter().filter(|p| p.digits != ctx.digits()).count();
    let range = format!(
        "{}, {escalated} escalated to {} digits",
        describe(grid),
        certifier.escalation_digits()
    );

    let mut reports: Vec<VerificationReport> = SandwichCheck::ALL
        .iter()
        .map(|&check| {
            let mut tally = Tally::new();
            for p in &points {
                tally.observe(p.margins[check as usize], p.error_bound, || format!("r={}", p.r));
            }
            tally.finish(check.claim_id(), range.clone(), ctx.digits())
        })
        .collect();

    if opts.spot_checks > 0 {
        reports.push(spot_checks(&certifier, opts)?);
    }
    Ok(reports)
}

fn spot_checks<A: Arithmetic>(
    certifier: &PointCertifier<A>,
    opts: &SandwichOptions,
) -> Result<VerificationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let sample: Vec<Modulus> = (0..opts.spot_checks)
        .map(|_| loop {
            let r: f64 = rng.gen();
            if r > 0.0 {
                break Modulus::interior(r);
            }
        })
        .collect::<Result<_>>()?;
    let pairs: Vec<(Certified, Certified)> = opts
        .exec
        .map(&sample, |&r| Ok((certifier.working(r)?, certifier.escalated(r)?)))
        .into_iter()
        .collect::<Result<_>>()?;

    let mut tally = Tally::new();
    for (work, ext) in &pairs {
        for check in SandwichCheck::ALL {
            let i = check as usize;
            tally.observe(ext.margins[i], ext.error_bound, || {
                format!("r={}: {}", ext.r, check.claim_id())
            });
            let drift = (work.margins[i] - ext.margins[i]).abs();
            if drift > work.error_bound + ext.error_bound {
                tally.fail(format!("r={}: working error bound exceeded for {}", work.r, check.claim_id()));
            }
        }
    }
    Ok(tally.finish(
        "extended_spot_checks",
        format!("{} random r, seed {:#x}", opts.spot_checks, opts.seed),
        certifier.escalation_digits(),
    ))
}

/// Witnesses that neither the quartic-correction upper bound nor the new
/// upper bound dominates the other.
#[derive(Clone, Debug)]
pub struct NonDominance {
    pub report: VerificationReport,
    /// `(r, new_upper − wclc_upper)` at the largest positive gap.
    pub wclc_tighter: Option<(f64, f64)>,
    /// `(r, wclc_upper − new_upper)` at the largest positive gap.
    pub new_tighter: Option<(f64, f64)>,
}

pub fn verify_non_dominance<A: Arithmetic>(
    ctx: &A,
    grid: &[Modulus],
    exec: Execution,
) -> Result<NonDominance> {
    let c = constants(ctx);
    let gaps: Vec<(f64, f64, f64)> = exec
        .map(grid, |&r| {
            let (cert, _, b) = margins_at(ctx, &c, r)?;
            let gap = (b.new_upper.value.clone() - b.wclc_upper.clone()).as_f64();
            Ok((r.value(), gap, cert.error_bound))
        })
        .into_iter()
        .collect::<Result<_>>()?;

    let best = |sign: f64| {
        gaps.iter()
            .filter(|(_, g, e)| sign * g > *e)
            .map(|&(r, g, e)| (r, sign * g, e))
            .fold(None, |acc: Option<(f64, f64, f64)>, x| match acc {
                Some(a) if a.1 >= x.1 => Some(a),
                _ => Some(x),
            })
    };
    let wclc = best(1.0);
    let new = best(-1.0);

    let mut tally = Tally::new();
    match wclc {
        Some((_, g, e)) => tally.observe(g, e, String::new),
        None => tally.fail("no r where the quartic-correction upper bound is tighter".into()),
    }
    match new {
        Some((_, g, e)) => tally.observe(g, e, String::new),
        None => tally.fail("no r where the new upper bound is tighter".into()),
    }
    Ok(NonDominance {
        report: tally.finish("upper_non_dominance", describe(grid), ctx.digits()),
        wclc_tighter: wclc.map(|(r, g, _)| (r, g)),
        new_tighter: new.map(|(r, g, _)| (r, g)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::precision::Hardware;

    #[test]
    fn half_modulus_margins() {
        let (cert, _, _) = margins_at(&Hardware, &constants(&Hardware), Modulus::new(0.5).unwrap()).unwrap();
        assert!(cert.resolved());
        // new_upper − K with new_upper = U_f ≈ 1.686012019.
        assert!((cert.margins[SandwichCheck::NewUpper as usize] - 2.6166e-4).abs() < 1e-7);
        assert!(SandwichCheck::ALL.iter().all(|&c| cert.holds(c)));
    }

    #[test]
    fn tiny_moduli_escalate() {
        let r = Modulus::new(1e-3).unwrap();
        let certifier = PointCertifier::new(&Hardware, 50).unwrap();
        assert!(!certifier.working(r).unwrap().resolved());
        let cert = certifier.certify(r).unwrap();
        assert_eq!(cert.digits, 50);
        assert!(SandwichCheck::ALL.iter().all(|&c| cert.holds(c)), "{cert:?}");
    }

    #[test]
    fn coarse_sandwich_passes() {
        let grid = GridSpec::new(0.001, 1.0, 0.01).unwrap().points().unwrap();
        let opts = SandwichOptions {
            spot_checks: 10,
            ..SandwichOptions::default()
        };
        let reports = verify_sandwich(&Hardware, &grid, &opts).unwrap();
        assert_eq!(reports.len(), 7);
        for r in reports {
            assert!(r.passed, "{r:?}");
        }
        assert!(verify_sandwich(&Hardware, &[Modulus::new(0.0).unwrap()], &opts).is_err());
    }

    #[test]
    fn witnesses_on_coarse_grid() {
        let grid = GridSpec::new(0.01, 1.0, 0.01).unwrap().points().unwrap();
        let nd = verify_non_dominance(&Hardware, &grid, Execution::Parallel).unwrap();
        assert!(nd.report.passed, "{nd:?}");
        assert!(nd.new_tighter.is_some() && nd.wclc_tighter.is_some());
    }
}
