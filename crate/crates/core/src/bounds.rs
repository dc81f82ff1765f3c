//! Closed-form bounds for `K(r)` and the auxiliary functions behind the
//! sharp double inequality.
//!
//! With `N(r) = π[16 − 5 log(1 − r²)]` and `D(r) = 32 + 2(5π − 16)r²`:
//!
//! ```text
//! f(r) = (π/2)[16 − 5 log(1 − r²)] − [θr² + K(r)][16 + (5π − 16)r²],  f₁ = f/r⁴
//! g(r) = [λr² + K(r)][16 + (5π − 16)r²] − (π/2)[16 − 5 log(1 − r²)],  g₁ = g/r²
//! ```
//!
//! `f₁` increases convexly from `α` to `β` and `g₁` decreases concavely from
//! `δ` to `0`. Solving the definitions for `K` and replacing `f₁`, `g₁` by
//! their constant and chord bounds yields the four expressions combined by
//! [`new_lower`] and [`new_upper`].

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::precision::{Arithmetic, Real};
use crate::special_fn::{self, log_one_minus_r_squared, Method, Modulus};
use crate::verify::CoefficientStream;

/// The eight constants of the bound families, evaluated in one context.
#[derive(Clone, Debug)]
pub struct BoundConstants<R> {
    pub theta: R,
    pub lambda: R,
    pub alpha: R,
    pub beta: R,
    pub delta: R,
    pub zeta: R,
    pub alpha_star: R,
    pub beta_star: R,
}

/// Exact recipes, in field order.
pub const RECIPES: [(&str, &str); 8] = [
    ("theta", "pi*(17 - 5*pi)/32"),
    ("lambda", "8/5 - log(4)"),
    ("alpha", "85*pi/8 - 185*pi^2/32 + 25*pi^3/32"),
    ("beta", "(8 - 10*log(2))*pi - 85*pi^2/32 + 25*pi^3/32"),
    ("delta", "128/5 - 32*log(2) - 17*pi/2 + 5*pi^2/2"),
    ("zeta", "-128/5 + 32*log(2) + (47/8 - 10*log(2))*pi + 5*pi^2/8"),
    ("alpha_star", "9*pi/128 - 11/50"),
    ("beta_star", "2/5 + log(5) - 5*pi/8"),
];

/// Evaluate every constant from its recipe.
pub fn constants<A: Arithmetic>(ctx: &A) -> BoundConstants<A::Real> {
    let pi = ctx.pi();
    let pi2 = pi.clone() * pi.clone();
    let pi3 = pi2.clone() * pi.clone();
    let ln2 = ctx.ln2();
    let ln5 = ctx.int(5).ln();
    let q = |n: i64, d: i64| ctx.ratio(n, d);

    let theta = pi.clone() * (ctx.int(17) - ctx.int(5) * pi.clone()) / ctx.int(32);
    let lambda = q(8, 5) - ctx.int(2) * ln2.clone();
    let alpha = q(85, 8) * pi.clone() - q(185, 32) * pi2.clone() + q(25, 32) * pi3.clone();
    let beta = (ctx.int(8) - ctx.int(10) * ln2.clone()) * pi.clone() - q(85, 32) * pi2.clone()
        + q(25, 32) * pi3;
    let delta = q(128, 5) - ctx.int(32) * ln2.clone() - q(17, 2) * pi.clone()
        + q(5, 2) * pi2.clone();
    let zeta = -q(128, 5)
        + ctx.int(32) * ln2.clone()
        + (q(47, 8) - ctx.int(10) * ln2) * pi.clone()
        + q(5, 8) * pi2;
    let alpha_star = q(9, 128) * pi.clone() - q(11, 50);
    let beta_star = q(2, 5) + ln5 - q(5, 8) * pi;

    BoundConstants {
        theta,
        lambda,
        alpha,
        beta,
        delta,
        zeta,
        alpha_star,
        beta_star,
    }
}

impl<R: Real> BoundConstants<R> {
    /// `(name, recipe, value)` for every constant, in field order.
    pub fn entries(&self) -> [(&'static str, &'static str, &R); 8] {
        let values = [
            &self.theta,
            &self.lambda,
            &self.alpha,
            &self.beta,
            &self.delta,
            &self.zeta,
            &self.alpha_star,
            &self.beta_star,
        ];
        let mut i = 0;
        values.map(|v| {
            let (name, recipe) = RECIPES[i];
            i += 1;
            (name, recipe, v)
        })
    }
}

/// Tags for the implemented bound expressions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BoundFamily {
    ArUpper,
    AvvUpper,
    WclcLower,
    WclcUpper,
    NewLower,
    NewUpper,
}

impl BoundFamily {
    pub const ALL: [BoundFamily; 6] = [
        BoundFamily::ArUpper,
        BoundFamily::AvvUpper,
        BoundFamily::WclcLower,
        BoundFamily::WclcUpper,
        BoundFamily::NewLower,
        BoundFamily::NewUpper,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundFamily::ArUpper => "AR_UPPER",
            BoundFamily::AvvUpper => "AVV_UPPER",
            BoundFamily::WclcLower => "WCLC_LOWER",
            BoundFamily::WclcUpper => "WCLC_UPPER",
            BoundFamily::NewLower => "NEW_LOWER",
            BoundFamily::NewUpper => "NEW_UPPER",
        }
    }

    pub fn is_upper(self) -> bool {
        !matches!(self, BoundFamily::WclcLower | BoundFamily::NewLower)
    }
}

impl fmt::Display for BoundFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `(π/2)(16 − 5 log(1 − r²)) / (16 + (5π − 16)r²)`.
pub fn upper_ar<A: Arithmetic>(ctx: &A, r: Modulus) -> Result<A::Real> {
    r.require_open("upper_ar")?;
    let parts = Parts::new(ctx, r)?;
    Ok(parts.numerator / parts.denominator)
}

/// `log(1 + 4/√(1 − r²)) − (log 5 − π/2)(1 − r)`.
pub fn upper_avv<A: Arithmetic>(ctx: &A, r: Modulus) -> Result<A::Real> {
    r.require_open("upper_avv")?;
    let x = ctx.real(r.value());
    let head = log_one_plus_four_over_complement(ctx, &x);
    Ok(head - log5_minus_half_pi(ctx) * (ctx.one() - x))
}

/// Lower and upper bound of the quartic-correction family, with `α*` and `β*`
/// as the `r⁴` coefficients.
pub fn wclc_bounds<A: Arithmetic>(
    ctx: &A,
    r: Modulus,
    c: &BoundConstants<A::Real>,
) -> Result<(A::Real, A::Real)> {
    r.require_open("wclc_bounds")?;
    let x = ctx.real(r.value());
    let x2 = x.clone() * x.clone();
    let x4 = x2.clone() * x2.clone();
    let common = log_one_plus_four_over_complement(ctx, &x) - log5_minus_half_pi(ctx)
        + (ctx.pi() / ctx.int(8) - ctx.ratio(2, 5)) * x2;
    Ok((
        common.clone() + c.alpha_star.clone() * x4.clone(),
        common + c.beta_star.clone() * x4,
    ))
}

// log(1 + 4/√(1 − r²))
fn log_one_plus_four_over_complement<A: Arithmetic>(ctx: &A, x: &A::Real) -> A::Real {
    let one = ctx.one();
    let complement = ((one.clone() - x.clone()) * (one + x.clone())).sqrt();
    (ctx.int(4) / complement).ln_1p()
}

fn log5_minus_half_pi<A: Arithmetic>(ctx: &A) -> A::Real {
    ctx.int(5).ln() - ctx.pi() / ctx.int(2)
}

/// One side of the sharp double inequality with both of its branches.
///
/// `from_f` is the branch obtained from `f₁`, `from_g` the one from `g₁`;
/// `value` is their minimum (upper side) or maximum (lower side).
#[derive(Clone, Debug)]
pub struct BranchPair<R> {
    pub value: R,
    pub from_f: R,
    pub from_g: R,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Branch {
    F,
    G,
}

impl<R: Real> BranchPair<R> {
    fn upper(from_f: R, from_g: R) -> Self {
        let value = from_f.clone().min_of(from_g.clone());
        Self {
            value,
            from_f,
            from_g,
        }
    }

    fn lower(from_f: R, from_g: R) -> Self {
        let value = from_f.clone().max_of(from_g.clone());
        Self {
            value,
            from_f,
            from_g,
        }
    }

    /// Which branch supplies `value` (ties go to `F`).
    pub fn active(&self) -> Branch {
        if self.value == self.from_f {
            Branch::F
        } else {
            Branch::G
        }
    }
}

// N = π(16 − 5 log(1 − r²)) and D = 32 + 2(5π − 16)r² share every bound; the
// AR bound is N/D as well.
struct Parts<R> {
    x2: R,
    numerator: R,
    denominator: R,
}

impl<R: Real> Parts<R> {
    fn new<A: Arithmetic<Real = R>>(ctx: &A, r: Modulus) -> Result<Self> {
        let x = ctx.real(r.value());
        let x2 = x.clone() * x;
        let pi = ctx.pi();
        let l = log_one_minus_r_squared(ctx, r)?;
        let numerator = pi.clone() * (ctx.int(16) - ctx.int(5) * l);
        let denominator = ctx.int(32) + ctx.int(2) * (ctx.int(5) * pi - ctx.int(16)) * x2.clone();
        Ok(Self {
            x2,
            numerator,
            denominator,
        })
    }
}

/// `min{U_f, U_g}` with
/// `U_f = [N − 2αr⁴]/D − θr²` and `U_g = [N + 2δr²]/D − λr²`.
pub fn new_upper<A: Arithmetic>(
    ctx: &A,
    r: Modulus,
    c: &BoundConstants<A::Real>,
) -> Result<BranchPair<A::Real>> {
    r.require_open("new_upper")?;
    let Parts {
        x2,
        numerator,
        denominator,
    } = Parts::new(ctx, r)?;
    let x4 = x2.clone() * x2.clone();
    let two = ctx.int(2);
    let from_f = (numerator.clone() - two.clone() * c.alpha.clone() * x4) / denominator.clone()
        - c.theta.clone() * x2.clone();
    let from_g =
        (numerator + two * c.delta.clone() * x2.clone()) / denominator - c.lambda.clone() * x2;
    Ok(BranchPair::upper(from_f, from_g))
}

/// `max{L_f, L_g}` with
/// `L_f = [N − 2(α + (β − α)r)r⁴]/D − θr²` and `L_g = [N + 2δ(1 − r)r²]/D − λr²`.
pub fn new_lower<A: Arithmetic>(
    ctx: &A,
    r: Modulus,
    c: &BoundConstants<A::Real>,
) -> Result<BranchPair<A::Real>> {
    r.require_open("new_lower")?;
    let x = ctx.real(r.value());
    let Parts {
        x2,
        numerator,
        denominator,
    } = Parts::new(ctx, r)?;
    let x4 = x2.clone() * x2.clone();
    let two = ctx.int(2);
    let chord_f = c.alpha.clone() + (c.beta.clone() - c.alpha.clone()) * x.clone();
    let chord_g = c.delta.clone() * (ctx.one() - x);
    let from_f = (numerator.clone() - two.clone() * chord_f * x4) / denominator.clone()
        - c.theta.clone() * x2.clone();
    let from_g = (numerator + two * chord_g * x2.clone()) / denominator - c.lambda.clone() * x2;
    Ok(BranchPair::lower(from_f, from_g))
}

/// Every implemented bound at one modulus.
#[derive(Clone, Debug)]
pub struct BoundSet<R> {
    pub ar_upper: R,
    pub avv_upper: R,
    pub wclc_lower: R,
    pub wclc_upper: R,
    pub new_lower: BranchPair<R>,
    pub new_upper: BranchPair<R>,
}

impl<R: Real> BoundSet<R> {
    pub fn uppers(&self) -> [(BoundFamily, &R); 4] {
        [
            (BoundFamily::NewUpper, &self.new_upper.value),
            (BoundFamily::ArUpper, &self.ar_upper),
            (BoundFamily::AvvUpper, &self.avv_upper),
            (BoundFamily::WclcUpper, &self.wclc_upper),
        ]
    }

    pub fn lowers(&self) -> [(BoundFamily, &R); 2] {
        [
            (BoundFamily::NewLower, &self.new_lower.value),
            (BoundFamily::WclcLower, &self.wclc_lower),
        ]
    }

    pub fn get(&self, family: BoundFamily) -> &R {
        match family {
            BoundFamily::ArUpper => &self.ar_upper,
            BoundFamily::AvvUpper => &self.avv_upper,
            BoundFamily::WclcLower => &self.wclc_lower,
            BoundFamily::WclcUpper => &self.wclc_upper,
            BoundFamily::NewLower => &self.new_lower.value,
            BoundFamily::NewUpper => &self.new_upper.value,
        }
    }
}

pub fn all_bounds<A: Arithmetic>(
    ctx: &A,
    r: Modulus,
    c: &BoundConstants<A::Real>,
) -> Result<BoundSet<A::Real>> {
    let (wclc_lower, wclc_upper) = wclc_bounds(ctx, r, c)?;
    Ok(BoundSet {
        ar_upper: upper_ar(ctx, r)?,
        avv_upper: upper_avv(ctx, r)?,
        wclc_lower,
        wclc_upper,
        new_lower: new_lower(ctx, r, c)?,
        new_upper: new_upper(ctx, r, c)?,
    })
}

/// Below this modulus the direct forms of `f₁`, `g₁` hand over to the series.
pub const DIRECT_LOWER_LIMIT: f64 = 0.1;
/// Above this modulus likewise.
pub const DIRECT_UPPER_LIMIT: f64 = 0.98;
/// Term ceiling when a direct form delegates to the series.
pub const DELEGATED_MAX_TERMS: usize = 2_000_000;

/// Partial sum of the `f₁` or `g₁` series with an envelope bound on the tail.
#[derive(Clone, Debug)]
pub struct SeriesEvaluation<R> {
    pub value: R,
    pub tail_bound: f64,
    /// Highest coefficient index included.
    pub n_max: usize,
    /// Envelope constant `C` in `c_n ≤ C/n²`.
    pub envelope: f64,
    /// Whether `C` covered all of the probe terms following `n_max`.
    pub envelope_validated: bool,
}

/// Probe terms past the truncation point used to fit and check the envelope.
pub const ENVELOPE_WINDOW: usize = 10;

/// Fit `C` in `c_n ≤ C/n²` from `w_n = n²c_n` over a window starting at `n_first`.
///
/// `n²c_n` climbs towards its limit roughly like `L − k/n`; the window slope
/// `d ≈ k/n²` extrapolates the remaining rise as `d·n`, taken twice over.
pub(crate) fn fit_envelope(window: &[f64], n_first: usize) -> f64 {
    let max = window.iter().cloned().fold(f64::MIN, f64::max);
    let first = window[0];
    let last = *window.last().expect("non-empty window");
    let steps = (window.len() - 1).max(1) as f64;
    let slope = ((last - first) / steps).max(0.0);
    max + 2.0 * slope * (n_first + window.len()) as f64
}

// Σ_{n>m} C·x^{n+shift}/n² for x = r² ∈ [0, 1]; shift is −2 for f₁, −1 for g₁.
fn envelope_tail(c: f64, x: f64, m: usize, shift: i32) -> f64 {
    let lead = x.powi(m as i32 + 1 + shift);
    let p_series = c * lead / m as f64;
    if x < 1.0 {
        let geometric = c * lead / (((m + 1) * (m + 1)) as f64 * (1.0 - x));
        geometric.min(p_series)
    } else {
        p_series
    }
}

fn check_series_args(op: &'static str, r: Modulus, n_max: usize) -> Result<()> {
    if n_max < 3 {
        return Err(Error::domain(op, n_max as f64, "n_max >= 3"));
    }
    if r.value() > 1.0 {
        return Err(Error::domain(op, r.value(), "[0, 1]"));
    }
    Ok(())
}

// Σ_{n=3}^{n_max} c_n x^{n+shift}, plus the envelope probe.
fn coefficient_sum<A: Arithmetic>(
    ctx: &A,
    x: &A::Real,
    n_max: usize,
    shift: i64,
) -> (A::Real, f64, bool) {
    let mut sum = ctx.zero();
    let mut power = ctx.one();
    // x^{3+shift}
    for _ in 0..(3 + shift) {
        power = power * x.clone();
    }
    let mut window = Vec::with_capacity(ENVELOPE_WINDOW + 1);
    for term in CoefficientStream::new(ctx).skip(2).take(n_max - 2 + ENVELOPE_WINDOW) {
        let n = term.n as usize;
        if n <= n_max {
            sum = sum + term.c_n.clone() * power.clone();
            power = power * x.clone();
        }
        if n >= n_max {
            window.push(term.c_n.as_f64() * (n * n) as f64);
        }
    }
    let envelope = fit_envelope(&window, n_max);
    let validated = window.iter().all(|w| *w <= envelope);
    (sum, envelope, validated)
}

/// `f₁(r) = α + Σ_{n=3}^{n_max} c_n r^{2n−4}` with `c_n = (5πn² − 16n + 4)Q_n/(2n²)`.
///
/// Converges on the closed interval, including `r = 1` where the sum tends to `β`.
pub fn f1_series<A: Arithmetic>(
    ctx: &A,
    r: Modulus,
    n_max: usize,
    c: &BoundConstants<A::Real>,
) -> Result<SeriesEvaluation<A::Real>> {
    check_series_args("f1_series", r, n_max)?;
    let rr = ctx.real(r.value());
    let x = rr.clone() * rr;
    let (sum, envelope, envelope_validated) = coefficient_sum(ctx, &x, n_max, -2);
    let x2 = r.value() * r.value();
    Ok(SeriesEvaluation {
        value: c.alpha.clone() + sum,
        tail_bound: envelope_tail(envelope, x2, n_max, -2),
        n_max,
        envelope,
        envelope_validated,
    })
}

/// `g₁(r) = δ + ζr² − Σ_{n=3}^{n_max} c_n r^{2n−2}`.
pub fn g1_series<A: Arithmetic>(
    ctx: &A,
    r: Modulus,
    n_max: usize,
    c: &BoundConstants<A::Real>,
) -> Result<SeriesEvaluation<A::Real>> {
    check_series_args("g1_series", r, n_max)?;
    let rr = ctx.real(r.value());
    let x = rr.clone() * rr;
    let (sum, envelope, envelope_validated) = coefficient_sum(ctx, &x, n_max, -1);
    let x2 = r.value() * r.value();
    Ok(SeriesEvaluation {
        value: c.delta.clone() + c.zeta.clone() * x - sum,
        tail_bound: envelope_tail(envelope, x2, n_max, -1),
        n_max,
        envelope,
        envelope_validated,
    })
}

/// Term-wise derivative `f₁'(r) = Σ_{n=3}^{n_max} (2n − 4)c_n r^{2n−5}`.
pub fn f1_series_derivative<A: Arithmetic>(ctx: &A, r: Modulus, n_max: usize) -> Result<A::Real> {
    check_series_args("f1_series_derivative", r, n_max)?;
    let rr = ctx.real(r.value());
    let x = rr.clone() * rr.clone();
    let mut sum = ctx.zero();
    // r^{2·3−5} = r
    let mut power = rr;
    for term in CoefficientStream::new(ctx).skip(2).take(n_max - 2) {
        let weight = ctx.int(2 * term.n as i64 - 4);
        sum = sum + weight * term.c_n * power.clone();
        power = power * x.clone();
    }
    Ok(sum)
}

/// Sum a series to a tail tolerance, growing the truncation on the fly.
fn series_to_tolerance<A: Arithmetic>(
    ctx: &A,
    r: Modulus,
    tol: f64,
    shift: i64,
) -> Result<A::Real> {
    let rr = ctx.real(r.value());
    let x = rr.clone() * rr;
    let x2 = r.value() * r.value();
    let mut sum = ctx.zero();
    let mut power = ctx.one();
    for _ in 0..(3 + shift) {
        power = power * x.clone();
    }
    let mut window: Vec<f64> = Vec::with_capacity(ENVELOPE_WINDOW + 1);
    for term in CoefficientStream::new(ctx).skip(2).take(DELEGATED_MAX_TERMS) {
        let n = term.n as usize;
        sum = sum + term.c_n.clone() * power.clone();
        power = power * x.clone();
        if window.len() == ENVELOPE_WINDOW + 1 {
            window.remove(0);
        }
        window.push(term.c_n.as_f64() * (n * n) as f64);
        if window.len() == ENVELOPE_WINDOW + 1 {
            let envelope = fit_envelope(&window, n - ENVELOPE_WINDOW);
            if envelope_tail(envelope, x2, n, shift as i32) < tol {
                return Ok(sum);
            }
        }
    }
    Err(Error::ConvergenceTooSlow {
        terms: DELEGATED_MAX_TERMS,
    })
}

fn delegates_to_series(r: Modulus) -> bool {
    r.value() < DIRECT_LOWER_LIMIT || r.value() > DIRECT_UPPER_LIMIT
}

// Digits lost when subtracting two quantities of size `scale` to get `result`.
fn check_cancellation<A: Arithmetic>(
    ctx: &A,
    op: &'static str,
    scale: f64,
    result: f64,
) -> Result<()> {
    let available = ctx.digits();
    let lost = if result == 0.0 {
        f64::INFINITY
    } else {
        (scale.abs() / result.abs()).log10().max(0.0)
    };
    if lost > available as f64 / 2.0 {
        Err(Error::PrecisionLoss {
            op,
            lost,
            available,
        })
    } else {
        Ok(())
    }
}

struct DirectTerms<R> {
    x2: R,
    log_part: R,
    k: R,
    quadratic: R,
}

impl<R: Real> DirectTerms<R> {
    fn new<A: Arithmetic<Real = R>>(ctx: &A, r: Modulus) -> Result<Self> {
        let x = ctx.real(r.value());
        let x2 = x.clone() * x;
        let l = log_one_minus_r_squared(ctx, r)?;
        let log_part = ctx.pi() / ctx.int(2) * (ctx.int(16) - ctx.int(5) * l);
        let k = special_fn::ellipk(ctx, r, Method::Auto)?.value;
        let quadratic = ctx.int(16) + (ctx.int(5) * ctx.pi() - ctx.int(16)) * x2.clone();
        Ok(Self {
            x2,
            log_part,
            k,
            quadratic,
        })
    }
}

/// `f₁(r) = f(r)/r⁴` from `K` and the logarithm directly.
///
/// Outside `[0.1, 0.98]` the series is summed to working precision instead.
pub fn f1_direct<A: Arithmetic>(
    ctx: &A,
    r: Modulus,
    c: &BoundConstants<A::Real>,
) -> Result<A::Real> {
    r.require_open("f1_direct")?;
    if delegates_to_series(r) {
        let tol = ctx.unit_roundoff() * c.alpha.as_f64();
        return Ok(c.alpha.clone() + series_to_tolerance(ctx, r, tol, -2)?);
    }
    let t = DirectTerms::new(ctx, r)?;
    let product = (c.theta.clone() * t.x2.clone() + t.k) * t.quadratic;
    let f = t.log_part.clone() - product;
    check_cancellation(ctx, "f1_direct", t.log_part.as_f64(), f.as_f64())?;
    Ok(f / (t.x2.clone() * t.x2))
}

/// `g₁(r) = g(r)/r²` from `K` and the logarithm directly.
pub fn g1_direct<A: Arithmetic>(
    ctx: &A,
    r: Modulus,
    c: &BoundConstants<A::Real>,
) -> Result<A::Real> {
    r.require_open("g1_direct")?;
    if delegates_to_series(r) {
        let rr = ctx.real(r.value());
        let x = rr.clone() * rr;
        let tol = ctx.unit_roundoff() * c.delta.as_f64();
        let sum = series_to_tolerance(ctx, r, tol, -1)?;
        return Ok(c.delta.clone() + c.zeta.clone() * x - sum);
    }
    let t = DirectTerms::new(ctx, r)?;
    let product = (c.lambda.clone() * t.x2.clone() + t.k) * t.quadratic;
    let g = product - t.log_part.clone();
    check_cancellation(ctx, "g1_direct", t.log_part.as_f64(), g.as_f64())?;
    Ok(g / t.x2)
}
