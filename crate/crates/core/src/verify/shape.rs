use super::{Tally, VerificationReport};
use crate::bounds::{constants, f1_direct, f1_series_derivative, g1_direct, BoundConstants};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grid::describe;
use crate::oracle::{finite_difference, DerivativeOrder};
use crate::precision::{Arithmetic, Real};
use crate::special_fn::Modulus;

/// Central-difference step for the derivative cross-check.
pub const DERIVATIVE_STEP: f64 = 1e-4;
/// Relative agreement required between the difference quotient and the
/// term-wise differentiated series.
pub const DERIVATIVE_TOLERANCE: f64 = 1e-6;

/// Modulus at which the limits at zero are checked.
const NEAR_ZERO: f64 = 1e-4;
const LIMIT_TOLERANCE: f64 = 1e-6;

// Error bound on a direct evaluation of f₁ (power 4) or g₁ (power 2):
// cancellation between terms of size ~(π/2)(16 − 5 log(1 − r²)) divided by r^power.
fn value_error(u: f64, r: f64, power: i32) -> f64 {
    let log_part = std::f64::consts::FRAC_PI_2 * (16.0 - 5.0 * (-r * r).ln_1p());
    64.0 * u * 2.0 * log_part / r.powi(power)
}

// Smallest n with r^{2n} below 1e-15·(tolerance headroom).
fn derivative_terms(r: f64) -> usize {
    let x = r * r;
    ((-40.0 * std::f64::consts::LN_10) / x.ln()).ceil().max(3.0) as usize + 3
}

struct Sampled {
    r: f64,
    f1: f64,
    g1: f64,
    f_err: f64,
    g_err: f64,
}

fn sample<A: Arithmetic>(ctx: &A, c: &BoundConstants<A::Real>, r: Modulus) -> Result<Sampled> {
    let u = ctx.unit_roundoff();
    Ok(Sampled {
        r: r.value(),
        f1: f1_direct(ctx, r, c)?.as_f64(),
        g1: g1_direct(ctx, r, c)?.as_f64(),
        f_err: value_error(u, r.value(), 4),
        g_err: value_error(u, r.value(), 2),
    })
}

/// Divided-difference signs, ranges, limits at zero and the derivative
/// cross-check for `f₁` and `g₁`.
///
/// Values are rounded to `f64` before differencing; the error bounds include
/// that rounding.
pub fn verify_shape<A: Arithmetic>(
    ctx: &A,
    grid: &[Modulus],
    exec: Execution,
) -> Result<Vec<VerificationReport>> {
    if grid.len() < 3 {
        return Err(Error::InvalidGrid("shape checks need at least 3 points".into()));
    }
    if grid.windows(2).any(|w| !(w[0].value() < w[1].value())) {
        return Err(Error::InvalidGrid("shape grid must be strictly increasing".into()));
    }
    let c = constants(ctx);
    let digits = ctx.digits();
    let samples: Vec<Sampled> = exec
        .map(grid, |&r| sample(ctx, &c, r))
        .into_iter()
        .collect::<Result<_>>()?;
    // Rounding the big-float values to doubles.
    let rounding = f64::EPSILON;

    let mut f_shape = Tally::new();
    let mut g_shape = Tally::new();
    for w in samples.windows(2) {
        let h = w[1].r - w[0].r;
        let f_err = (w[0].f_err + w[1].f_err + rounding * 4.0) / h;
        let g_err = (w[0].g_err + w[1].g_err + rounding * 4.0) / h;
        let at = || format!("first difference at r={}..{}", w[0].r, w[1].r);
        f_shape.observe((w[1].f1 - w[0].f1) / h, f_err, at);
        g_shape.observe(-(w[1].g1 - w[0].g1) / h, g_err, at);
    }
    for w in samples.windows(3) {
        let (h1, h2) = (w[1].r - w[0].r, w[2].r - w[1].r);
        let second = |v: &dyn Fn(&Sampled) -> f64| {
            2.0 * ((v(&w[2]) - v(&w[1])) / h2 - (v(&w[1]) - v(&w[0])) / h1) / (h1 + h2)
        };
        let bound = |e: &dyn Fn(&Sampled) -> f64| {
            let e0 = e(&w[0]) + 2.0 * rounding;
            let e1 = e(&w[1]) + 2.0 * rounding;
            let e2 = e(&w[2]) + 2.0 * rounding;
            2.0 * ((e2 + e1) / h2 + (e1 + e0) / h1) / (h1 + h2)
        };
        let at = || format!("second difference at r={}", w[1].r);
        f_shape.observe(second(&|s| s.f1), bound(&|s| s.f_err), at);
        g_shape.observe(-second(&|s| s.g1), bound(&|s| s.g_err), at);
    }

    let (alpha, beta, delta) = (c.alpha.as_f64(), c.beta.as_f64(), c.delta.as_f64());
    let mut f_range = Tally::new();
    let mut g_range = Tally::new();
    for s in &samples {
        let at = || format!("r={}", s.r);
        f_range.observe(s.f1 - alpha, s.f_err + rounding, at);
        f_range.observe(beta - s.f1, s.f_err + rounding, at);
        g_range.observe(s.g1, s.g_err + rounding, at);
        g_range.observe(delta - s.g1, s.g_err + rounding, at);
    }

    let near = Modulus::new(NEAR_ZERO)?;
    let mut limits = Tally::new();
    let f0 = f1_direct(ctx, near, &c)?;
    let g0 = g1_direct(ctx, near, &c)?;
    limits.observe(LIMIT_TOLERANCE - (f0 - c.alpha.clone()).abs().as_f64(), 0.0, || "f1 - alpha".into());
    limits.observe(LIMIT_TOLERANCE - (g0 - c.delta.clone()).abs().as_f64(), 0.0, || "g1 - delta".into());

    let interior: Vec<Modulus> = grid
        .iter()
        .copied()
        .filter(|r| r.value() - DERIVATIVE_STEP > 0.0 && r.value() + DERIVATIVE_STEP < 1.0)
        .collect();
    let deviations: Vec<(f64, f64, f64)> = exec
        .map(&interior, |&r| {
            let fd = finite_difference(
                ctx,
                |m| f1_direct(ctx, m, &c),
                r.value(),
                DERIVATIVE_STEP,
                DerivativeOrder::First,
            )?;
            let series = f1_series_derivative(ctx, r, derivative_terms(r.value()))?;
            let rel = ((fd - series.clone()) / series.clone()).abs().as_f64();
            // Rounding in the quotient, relative to the derivative.
            let err = value_error(ctx.unit_roundoff(), r.value() - DERIVATIVE_STEP, 4)
                / DERIVATIVE_STEP
                / series.as_f64().abs();
            Ok((r.value(), rel, err))
        })
        .into_iter()
        .collect::<Result<_>>()?;
    let mut derivative = Tally::new();
    for &(r, rel, err) in &deviations {
        derivative.observe(DERIVATIVE_TOLERANCE - rel, err, || format!("r={r}"));
    }

    let range = describe(grid);
    Ok(vec![
        f_shape.finish("f1_increasing_convex", range.clone(), digits),
        g_shape.finish("g1_decreasing_concave", range.clone(), digits),
        f_range.finish("f1_range", range.clone(), digits),
        g_range.finish("g1_range", range.clone(), digits),
        limits.finish("limits_at_zero", format!("r={NEAR_ZERO}"), digits),
        derivative.finish(
            "f1_derivative",
            format!("{} interior points, step {DERIVATIVE_STEP}", interior.len()),
            digits,
        ),
    ])
}
