//! Implementation-independent references for the verification jobs.
//!
//! The Maclaurin coefficients of `f` and `g` are rebuilt here by truncated
//! power-series arithmetic: the hypergeometric expansion of `K`, the
//! logarithmic series, and Cauchy products with the quadratic factor. Nothing
//! in this module touches the Gamma-ratio closed form used by
//! [`crate::verify`].

use std::fmt;
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::precision::{Arithmetic, Mode, Real};
use crate::special_fn::{pochhammer, Modulus};

/// Truncated series in powers of `r²`: `coefficients[k]` multiplies `r^{2k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSeries<R> {
    coefficients: Vec<R>,
}

impl<R: Real> PowerSeries<R> {
    /// Series with the given coefficients; the truncation order is `len − 1`.
    ///
    /// # Panics
    /// If `coefficients` is empty.
    pub fn new(coefficients: Vec<R>) -> Self {
        assert!(!coefficients.is_empty(), "a series needs at least one coefficient");
        Self { coefficients }
    }

    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficient(&self, k: usize) -> Option<&R> {
        self.coefficients.get(k)
    }

    pub fn coefficients(&self) -> &[R] {
        &self.coefficients
    }

    fn common_order(&self, other: &Self) -> usize {
        self.order().min(other.order())
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.common_order(other);
        Self::new(
            (0..=order)
                .map(|k| self.coefficients[k].clone() + other.coefficients[k].clone())
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        let order = self.common_order(other);
        Self::new(
            (0..=order)
                .map(|k| self.coefficients[k].clone() - other.coefficients[k].clone())
                .collect(),
        )
    }

    pub fn scale(&self, factor: &R) -> Self {
        Self::new(
            self.coefficients
                .iter()
                .map(|c| c.clone() * factor.clone())
                .collect(),
        )
    }

    /// Cauchy product truncated at the smaller order; coefficient `k` uses
    /// exactly the inputs `0..=k`.
    pub fn mul(&self, other: &Self) -> Self {
        let order = self.common_order(other);
        let coefficients = (0..=order)
            .map(|k| {
                (1..=k).fold(
                    self.coefficients[0].clone() * other.coefficients[k].clone(),
                    |acc, i| acc + self.coefficients[i].clone() * other.coefficients[k - i].clone(),
                )
            })
            .collect();
        Self::new(coefficients)
    }

    pub fn evaluate(&self, x: &R) -> R {
        let mut iter = self.coefficients.iter().rev();
        let first = iter.next().expect("non-empty").clone();
        iter.fold(first, |acc, c| acc * x.clone() + c.clone())
    }
}

/// `K(r) = (π/2)·Σ [(1/2)_k / k!]² r^{2k}` through `r^{2·order}`.
pub fn series_k<A: Arithmetic>(ctx: &A, order: usize) -> PowerSeries<A::Real> {
    let half_pi = ctx.pi() / ctx.int(2);
    let half = ctx.ratio(1, 2);
    let one = ctx.one();
    PowerSeries::new(
        (0..=order as u64)
            .map(|k| {
                let ratio = pochhammer(ctx, &half, k) / pochhammer(ctx, &one, k);
                half_pi.clone() * ratio.clone() * ratio
            })
            .collect(),
    )
}

/// `(π/2)(16 − 5 log(1 − r²)) = 8π + (5π/2)·Σ_{k≥1} r^{2k}/k`.
pub fn series_log_term<A: Arithmetic>(ctx: &A, order: usize) -> PowerSeries<A::Real> {
    let pi = ctx.pi();
    let five_half_pi = ctx.int(5) * pi.clone() / ctx.int(2);
    let mut coefficients = vec![ctx.int(8) * pi];
    coefficients.extend((1..=order as i64).map(|k| five_half_pi.clone() / ctx.int(k)));
    PowerSeries::new(coefficients)
}

/// `16 + (5π − 16)r²`, padded with zeros to `order`.
pub fn quadratic_factor<A: Arithmetic>(ctx: &A, order: usize) -> PowerSeries<A::Real> {
    let mut coefficients = vec![ctx.int(16), ctx.int(5) * ctx.pi() - ctx.int(16)];
    coefficients.resize(order.max(1) + 1, ctx.zero());
    coefficients.truncate(order + 1);
    PowerSeries::new(coefficients)
}

/// `c·r²` as a series of the given order.
fn monomial<A: Arithmetic>(ctx: &A, c: A::Real, order: usize) -> PowerSeries<A::Real> {
    let mut coefficients = vec![ctx.zero(); order + 1];
    if order >= 1 {
        coefficients[1] = c;
    }
    PowerSeries::new(coefficients)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesName {
    F,
    G,
    F1,
    G1,
}

impl fmt::Display for SeriesName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeriesName::F => "f",
            SeriesName::G => "g",
            SeriesName::F1 => "f1",
            SeriesName::G1 => "g1",
        })
    }
}

/// A named series; `shift` is the power of `r²` already divided out.
#[derive(Clone, Debug)]
pub struct SeriesTable<R> {
    pub name: SeriesName,
    pub series: PowerSeries<R>,
    pub shift: usize,
}

impl<R: Real> SeriesTable<R> {
    /// Divide out the vanishing head: `f₁ = f/r⁴`, `g₁ = g/r²`.
    pub fn reduced(&self) -> Self {
        let (name, shift) = match self.name {
            SeriesName::F => (SeriesName::F1, 2),
            SeriesName::G => (SeriesName::G1, 1),
            _ => return self.clone(),
        };
        Self {
            name,
            series: PowerSeries::new(self.series.coefficients()[shift..].to_vec()),
            shift,
        }
    }

    /// Write `index,coefficient` rows. `digits` applies to big-float values.
    pub fn write_csv<W: Write>(&self, mut out: W, digits: u32) -> io::Result<()> {
        writeln!(out, "index,coefficient")?;
        for (k, c) in self.series.coefficients().iter().enumerate() {
            writeln!(out, "{},{}", k, c.render(digits))?;
        }
        Ok(())
    }
}

/// Relative tolerance for the coefficients that must cancel exactly.
pub fn head_tolerance<A: Arithmetic>(ctx: &A) -> f64 {
    match ctx.context().mode() {
        Mode::Hardware => 64.0 * ctx.unit_roundoff(),
        Mode::Extended => 10f64.powi(-(ctx.digits() as i32) + 10),
    }
}

fn check_heads<A: Arithmetic>(
    ctx: &A,
    name: &'static str,
    series: &PowerSeries<A::Real>,
    vanishing: usize,
) -> Result<()> {
    let scale = 8.0 * std::f64::consts::PI;
    let tol = head_tolerance(ctx);
    for k in 0..vanishing.min(series.order() + 1) {
        let residual = series.coefficients()[k].abs().as_f64() / scale;
        if !(residual <= tol) {
            return Err(Error::AssemblyMismatch {
                series: name,
                index: k,
                residual,
            });
        }
    }
    Ok(())
}

fn check_order(order: usize) -> Result<()> {
    if order < 3 {
        return Err(Error::domain("series order", order as f64, "order >= 3"));
    }
    Ok(())
}

/// `f = (π/2)(16 − 5 log(1 − r²)) − [θr² + K][16 + (5π − 16)r²]`, with `θ`
/// recomputed from its recipe.
pub fn build_f_series<A: Arithmetic>(ctx: &A, order: usize) -> Result<SeriesTable<A::Real>> {
    check_order(order)?;
    let pi = ctx.pi();
    let theta = pi.clone() * (ctx.int(17) - ctx.int(5) * pi) / ctx.int(32);
    let bracket = monomial(ctx, theta, order).add(&series_k(ctx, order));
    let series = series_log_term(ctx, order).sub(&bracket.mul(&quadratic_factor(ctx, order)));
    check_heads(ctx, "f", &series, 2)?;
    Ok(SeriesTable {
        name: SeriesName::F,
        series,
        shift: 0,
    })
}

/// `g = [λr² + K][16 + (5π − 16)r²] − (π/2)(16 − 5 log(1 − r²))`.
pub fn build_g_series<A: Arithmetic>(ctx: &A, order: usize) -> Result<SeriesTable<A::Real>> {
    check_order(order)?;
    let lambda = ctx.ratio(8, 5) - ctx.int(2) * ctx.ln2();
    let bracket = monomial(ctx, lambda, order).add(&series_k(ctx, order));
    let series = bracket
        .mul(&quadratic_factor(ctx, order))
        .sub(&series_log_term(ctx, order));
    check_heads(ctx, "g", &series, 1)?;
    Ok(SeriesTable {
        name: SeriesName::G,
        series,
        shift: 0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivativeOrder {
    First,
    Second,
}

/// Default central-difference step: `1e-4` for doubles, `10^(−digits/3)` otherwise.
pub fn default_step<A: Arithmetic>(ctx: &A) -> f64 {
    match ctx.context().mode() {
        Mode::Hardware => 1e-4,
        Mode::Extended => 10f64.powf(-(ctx.digits() as f64) / 3.0),
    }
}

/// Central-difference estimate of the first or second derivative of `f` at
/// `r`. The stencil `[r − step, r + step]` must lie inside `(0, 1)`.
pub fn finite_difference<A, F>(
    ctx: &A,
    f: F,
    r: f64,
    step: f64,
    order: DerivativeOrder,
) -> Result<A::Real>
where
    A: Arithmetic,
    F: Fn(Modulus) -> Result<A::Real>,
{
    if !(step > 0.0) {
        return Err(Error::domain("finite_difference step", step, "(0, inf)"));
    }
    let lo = r - step;
    let hi = r + step;
    if !(lo > 0.0 && hi < 1.0) {
        return Err(Error::domain("finite_difference stencil", r, "[r - step, r + step] in (0, 1)"));
    }
    let f_lo = f(Modulus::new(lo)?)?;
    let f_hi = f(Modulus::new(hi)?)?;
    // Spacing of the stencil as actually represented.
    let h_lo = ctx.real(r) - ctx.real(lo);
    let h_hi = ctx.real(hi) - ctx.real(r);
    match order {
        DerivativeOrder::First => Ok((f_hi - f_lo) / (h_lo + h_hi)),
        DerivativeOrder::Second => {
            let f_mid = f(Modulus::new(r)?)?;
            let right = (f_hi - f_mid.clone()) / h_hi.clone();
            let left = (f_mid - f_lo) / h_lo.clone();
            Ok(ctx.int(2) * (right - left) / (h_lo + h_hi))
        }
    }
}
