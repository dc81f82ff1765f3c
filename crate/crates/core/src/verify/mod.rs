//! Lemma sequences, closed-form Maclaurin coefficients and the batch jobs that
//! check every claim behind the sharp bounds.
//!
//! ```text
//! Q_n = 5πn/(5πn² − 16n + 4) − [Γ(n − 1/2)/Γ(n)]²
//! P_n = 5πn/(5πn² − 16n + 4) − 4/(4n − 3)
//! c_n = (5πn² − 16n + 4)·Q_n/(2n²)
//! ```
//!
//! Every positivity claim is decided by comparing a margin with an a-priori
//! bound on its evaluation error; see [`Tally`].

mod jobs;
mod report;
mod sandwich;
mod shape;

pub use jobs::{
    verify_all, verify_coefficients, verify_constants, verify_gamma_ratio_bound, verify_kershaw,
    verify_lemma, verify_partial_sums, VerifyConfig, KERSHAW_S, KERSHAW_X, ORACLE_MAX_N,
    PRINTED_CONSTANTS,
};
pub use report::{Tally, VerificationReport};
pub use sandwich::{
    certify_point, margins_at, verify_non_dominance, verify_sandwich, Certified, NonDominance,
    PointCertifier, SandwichCheck, SandwichOptions,
};
pub use shape::{verify_shape, DERIVATIVE_STEP, DERIVATIVE_TOLERANCE};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle;
use crate::precision::{Arithmetic, Real};
use crate::special_fn::GammaHalfRatios;

/// `Q_n`, `P_n` and `c_n` at one index. `c_n` is evaluated for every `n` but
/// only enters the expansions from `n = 3` on.
#[derive(Clone, Debug, Serialize)]
pub struct CoefficientTerm<R> {
    pub n: u64,
    pub q_n: R,
    pub p_n: R,
    pub c_n: R,
}

/// `5πn² − 16n + 4`.
pub fn lemma_polynomial<A: Arithmetic>(ctx: &A, n: u64) -> A::Real {
    let n = n as i64;
    ctx.int(5) * ctx.pi() * ctx.int(n * n) - ctx.int(16 * n - 4)
}

/// `5πn/(5πn² − 16n + 4)`.
pub fn rational_term<A: Arithmetic>(ctx: &A, n: u64) -> A::Real {
    ctx.int(5) * ctx.pi() * ctx.int(n as i64) / lemma_polynomial(ctx, n)
}

/// `4/(4n − 3)`.
pub fn gamma_ratio_square_bound<A: Arithmetic>(ctx: &A, n: u64) -> A::Real {
    ctx.ratio(4, 4 * n as i64 - 3)
}

fn require_index(op: &'static str, n: u64, min: u64) -> Result<()> {
    if n < min {
        let expected = if min == 1 { "n >= 1" } else { "n >= 3" };
        return Err(Error::domain(op, n as f64, expected));
    }
    Ok(())
}

pub fn q_n<A: Arithmetic>(ctx: &A, n: u64) -> Result<A::Real> {
    require_index("q_n", n, 1)?;
    let ratio = crate::special_fn::gamma_half_ratio(ctx, n);
    Ok(rational_term(ctx, n) - ratio.clone() * ratio)
}

pub fn p_n<A: Arithmetic>(ctx: &A, n: u64) -> Result<A::Real> {
    require_index("p_n", n, 1)?;
    Ok(rational_term(ctx, n) - gamma_ratio_square_bound(ctx, n))
}

/// Build the term at `n` from `Γ(n − 1/2)/Γ(n)`.
pub(crate) fn term_from_ratio<A: Arithmetic>(
    ctx: &A,
    n: u64,
    ratio: &A::Real,
) -> CoefficientTerm<A::Real> {
    let poly = lemma_polynomial(ctx, n);
    let rational = ctx.int(5) * ctx.pi() * ctx.int(n as i64) / poly.clone();
    let q_n = rational.clone() - ratio.clone() * ratio.clone();
    let p_n = rational - gamma_ratio_square_bound(ctx, n);
    let n2 = (n * n) as i64;
    let c_n = poly * q_n.clone() / ctx.int(2 * n2);
    CoefficientTerm { n, q_n, p_n, c_n }
}

/// `Q_n`, `P_n`, `c_n` with the closed forms.
pub fn coefficient<A: Arithmetic>(ctx: &A, n: u64) -> Result<CoefficientTerm<A::Real>> {
    require_index("coefficient", n, 3)?;
    Ok(term_from_ratio(ctx, n, &crate::special_fn::gamma_half_ratio(ctx, n)))
}

/// Coefficient of `r^{2n−4}` in `f₁`, extracted from the power-series
/// assembly of `f` without the Gamma-ratio closed form.
pub fn coefficient_oracle<A: Arithmetic>(ctx: &A, n: u64) -> Result<A::Real> {
    require_index("coefficient_oracle", n, 3)?;
    let table = oracle::build_f_series(ctx, n as usize)?;
    Ok(table.series.coefficients()[n as usize].clone())
}

/// Terms for `n = 1, 2, 3, …`, one Gamma-ratio recurrence step each.
pub struct CoefficientStream<A: Arithmetic> {
    ctx: A,
    ratios: GammaHalfRatios<A>,
    n: u64,
}

impl<A: Arithmetic> CoefficientStream<A> {
    pub fn new(ctx: &A) -> Self {
        Self {
            ctx: ctx.clone(),
            ratios: GammaHalfRatios::new(ctx),
            n: 0,
        }
    }
}

impl<A: Arithmetic> Iterator for CoefficientStream<A> {
    type Item = CoefficientTerm<A::Real>;

    fn next(&mut self) -> Option<Self::Item> {
        let ratio = self.ratios.next()?;
        self.n += 1;
        Some(term_from_ratio(&self.ctx, self.n, &ratio))
    }
}

/// Terms `1..=n_max` with the per-term work spread over `exec`; the ratio
/// recurrence itself runs first, sequentially.
pub fn coefficient_terms<A: Arithmetic>(
    ctx: &A,
    n_max: u64,
    exec: crate::Execution,
) -> Vec<CoefficientTerm<A::Real>> {
    let ratios: Vec<A::Real> = GammaHalfRatios::new(ctx).take(n_max as usize).collect();
    exec.map_range(0, ratios.len(), |i| term_from_ratio(ctx, i as u64 + 1, &ratios[i]))
}

/// Kershaw's bracket `((x + s/2)^{1−s}, (x − 1/2 + √(1/4 + s))^{1−s})` for
/// `Γ(x + 1)/Γ(x + s)`.
pub fn kershaw<A: Arithmetic>(ctx: &A, x: f64, s: f64) -> Result<(A::Real, A::Real)> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::domain("kershaw x", x, "(0, inf)"));
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::domain("kershaw s", s, "(0, 1)"));
    }
    let xr = ctx.real(x);
    let sr = ctx.real(s);
    let exponent = ctx.one() - sr.clone();
    let half = ctx.ratio(1, 2);
    let lower = (xr.clone() + sr.clone() * half.clone()).powf(&exponent);
    let upper = (xr - half + (ctx.ratio(1, 4) + sr).sqrt()).powf(&exponent);
    Ok((lower, upper))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::{Extended, Hardware};
    use approx::assert_relative_eq;

    // mpmath, 60 digits.
    const Q1: f64 = 1.094_685_360_199_085_4;
    const Q3: f64 = 0.042_172_471_953_155_679;
    const P1: f64 = 0.236_278_013_788_878_66;
    const C3: f64 = 0.228_133_555_405_008_15;
    const C4: f64 = 0.129_166_816_966_029_54;

    #[test]
    fn lemma_sequences_at_small_n() {
        let h = Hardware;
        assert_relative_eq!(q_n(&h, 1).unwrap(), Q1, max_relative = 1e-14);
        assert_relative_eq!(q_n(&h, 3).unwrap(), Q3, max_relative = 1e-13);
        assert_relative_eq!(p_n(&h, 1).unwrap(), P1, max_relative = 1e-14);
        assert!(q_n(&h, 0).is_err());
    }

    #[test]
    fn closed_form_coefficients() {
        let x = Extended::new(40).unwrap();
        let t3 = coefficient(&x, 3).unwrap();
        assert_relative_eq!(t3.c_n.as_f64(), C3, max_relative = 1e-15);
        assert_relative_eq!(coefficient(&x, 4).unwrap().c_n.as_f64(), C4, max_relative = 1e-15);
        assert!(coefficient(&x, 2).is_err());
    }

    #[test]
    fn stream_matches_pointwise_terms() {
        let h = Hardware;
        let stream: Vec<_> = CoefficientStream::new(&h).take(20).collect();
        assert_eq!(stream[0].n, 1);
        for t in &stream {
            assert_relative_eq!(t.q_n, q_n(&h, t.n).unwrap(), max_relative = 1e-12);
        }
        let batch = coefficient_terms(&h, 20, crate::Execution::Parallel);
        assert_eq!(batch.len(), 20);
        assert_eq!(batch[19].c_n, stream[19].c_n);
    }

    #[test]
    fn n_squared_q_settles() {
        let h = Hardware;
        let terms = coefficient_terms(&h, 10_000, crate::Execution::Sequential);
        let w = |n: usize| terms[n - 1].q_n * (n * n) as f64;
        assert!((w(10_000) - w(1_000)).abs() < 1e-3);
        assert!(w(10_000) > 0.26 && w(10_000) < 0.28);
    }

    #[test]
    fn oracle_agrees_with_closed_form() {
        let x = Extended::new(50).unwrap();
        let oracle = coefficient_oracle(&x, 3).unwrap();
        let closed = coefficient(&x, 3).unwrap().c_n;
        let rel = ((oracle - closed.clone()) / closed).abs().as_f64();
        assert!(rel < 1e-45, "{rel}");
    }

    #[test]
    fn kershaw_bracket() {
        let h = Hardware;
        let (lo, hi) = kershaw(&h, 1.0, 0.5).unwrap();
        assert_relative_eq!(lo, 1.118_033_988_749_895, max_relative = 1e-14);
        assert_relative_eq!(hi, 1.168_770_894_480_367_6, max_relative = 1e-12);
        let ratio = 2.0 / std::f64::consts::PI.sqrt();
        assert!(lo < ratio && ratio < hi);
        let (lo, hi) = kershaw(&h, 3.0, 0.999_999).unwrap();
        assert!((lo - 1.0).abs() < 1e-5 && (hi - 1.0).abs() < 1e-5);
        assert!(kershaw(&h, 0.0, 0.5).is_err());
        assert!(kershaw(&h, 1.0, 1.0).is_err());
    }
}
