//! Complete elliptic integral of the first kind and the small special-function
//! kit around it.
//!
//! `K(r) = ∫₀^{π/2} (1 − r² sin²t)^{−1/2} dt = (π/2)·F(1/2, 1/2; 1; r²)`
//!
//! Three independent evaluators are provided: the hypergeometric power
//! series, the arithmetic–geometric mean, and adaptive Gauss–Kronrod
//! quadrature of the defining integral (hardware precision only). The
//! quadrature route shares no code with the other two and is used as the
//! oracle for them.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::precision::{Arithmetic, Real};

/// Elliptic modulus `r ∈ [0, 1]`.
///
/// Individual operations narrow the admissible range further; `r = 1` is
/// only meaningful as a limit and is rejected by every evaluator of `K`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Modulus(f64);

impl Modulus {
    pub fn new(r: f64) -> Result<Self> {
        if r.is_finite() && (0.0..=1.0).contains(&r) {
            Ok(Self(r))
        } else {
            Err(Error::domain("modulus", r, "[0, 1]"))
        }
    }

    /// A modulus in the open interval `(0, 1)`.
    pub fn interior(r: f64) -> Result<Self> {
        let m = Self::new(r)?;
        m.require_open("modulus")?;
        Ok(m)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_interior(self) -> bool {
        self.0 > 0.0 && self.0 < 1.0
    }

    pub(crate) fn require_open(self, op: &'static str) -> Result<()> {
        if self.is_interior() {
            Ok(())
        } else {
            Err(Error::domain(op, self.0, "(0, 1)"))
        }
    }

    pub(crate) fn require_below_one(self, op: &'static str) -> Result<()> {
        if self.0 < 1.0 {
            Ok(())
        } else {
            Err(Error::domain(op, self.0, "[0, 1)"))
        }
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Rising factorial `(a)_n = a(a+1)···(a+n−1)`, with `(a)_0 = 1`.
pub fn pochhammer<A: Arithmetic>(ctx: &A, a: &A::Real, n: u64) -> A::Real {
    let mut acc = ctx.one();
    let mut factor = a.clone();
    for _ in 0..n {
        acc = acc * factor.clone();
        factor = factor + ctx.one();
    }
    acc
}

/// `Γ(n − 1/2) / Γ(n)` for `n ≥ 1`, by the recurrence
/// `ratio(1) = √π`, `ratio(n) = ratio(n−1)·(n − 3/2)/(n − 1)`.
///
/// # Panics
/// If `n == 0`.
pub fn gamma_half_ratio<A: Arithmetic>(ctx: &A, n: u64) -> A::Real {
    assert!(n >= 1, "gamma_half_ratio needs n >= 1");
    GammaHalfRatios::new(ctx)
        .nth((n - 1) as usize)
        .expect("unbounded iterator")
}

/// The sequence `Γ(n − 1/2)/Γ(n)` for `n = 1, 2, 3, …`.
pub struct GammaHalfRatios<A: Arithmetic> {
    ctx: A,
    next_n: i64,
    current: A::Real,
}

impl<A: Arithmetic> GammaHalfRatios<A> {
    pub fn new(ctx: &A) -> Self {
        Self {
            ctx: ctx.clone(),
            next_n: 1,
            current: ctx.sqrt_pi(),
        }
    }
}

impl<A: Arithmetic> Iterator for GammaHalfRatios<A> {
    type Item = A::Real;

    fn next(&mut self) -> Option<A::Real> {
        let n = self.next_n;
        if n > 1 {
            // (n − 3/2)/(n − 1) = (2n − 3)/(2n − 2)
            self.current =
                self.current.clone() * self.ctx.int(2 * n - 3) / self.ctx.int(2 * n - 2);
        }
        self.next_n += 1;
        Some(self.current.clone())
    }
}

/// Default ceiling on the number of series terms.
pub const DEFAULT_MAX_SERIES_TERMS: usize = 200_000;

/// Partial sum of the hypergeometric series together with a rigorous bound on
/// the discarded tail.
#[derive(Clone, Debug)]
pub struct SeriesSum<R> {
    pub value: R,
    pub tail_bound: f64,
    pub terms: usize,
}

/// `K(r)` by the series `(π/2)·Σ [(1/2)_n / n!]² r^{2n}`.
pub fn ellipk_series<A: Arithmetic>(ctx: &A, r: Modulus, tol: f64) -> Result<A::Real> {
    ellipk_series_sum(ctx, r, tol, DEFAULT_MAX_SERIES_TERMS).map(|s| s.value)
}

/// Series evaluation with an explicit term cap.
///
/// Successive term ratios are `((n+1/2)/(n+1))²·r² < r²`, so the tail after
/// the last accepted term `t` is bounded by `t·r²/(1 − r²)`. Summation stops
/// once `(π/2)` times that bound drops below `tol`.
pub fn ellipk_series_sum<A: Arithmetic>(
    ctx: &A,
    r: Modulus,
    tol: f64,
    max_terms: usize,
) -> Result<SeriesSum<A::Real>> {
    r.require_below_one("ellipk_series")?;
    if !(tol > 0.0) {
        return Err(Error::domain("ellipk_series tolerance", tol, "(0, inf)"));
    }
    let x = ctx.real(r.value());
    let x2 = x.clone() * x;
    let half_pi = ctx.pi() / ctx.int(2);
    let geometric = 1.0 / (1.0 - r.value() * r.value());
    let mut term = ctx.one();
    let mut sum = ctx.one();
    for n in 0..max_terms {
        let k = n as i64;
        term = term * ctx.int((2 * k + 1) * (2 * k + 1)) / ctx.int((2 * k + 2) * (2 * k + 2))
            * x2.clone();
        sum = sum + term.clone();
        let tail = half_pi.as_f64() * term.as_f64() * r.value() * r.value() * geometric;
        if tail < tol {
            return Ok(SeriesSum {
                value: half_pi * sum,
                tail_bound: tail,
                terms: n + 2,
            });
        }
    }
    Err(Error::ConvergenceTooSlow { terms: max_terms })
}

const AGM_MAX_ITERATIONS: usize = 200;

/// `K(r) = π / (2·AGM(1, √(1 − r²)))`.
pub fn ellipk_agm<A: Arithmetic>(ctx: &A, r: Modulus) -> Result<A::Real> {
    r.require_below_one("ellipk_agm")?;
    let x = ctx.real(r.value());
    let one = ctx.one();
    let complement = ((one.clone() - x.clone()) * (one.clone() + x)).sqrt();
    let mut a = one;
    let mut b = complement;
    let tol = 4.0 * ctx.unit_roundoff();
    for _ in 0..AGM_MAX_ITERATIONS {
        let gap = (a.clone() - b.clone()).abs();
        if gap.as_f64() <= tol * a.as_f64() {
            break;
        }
        let next_a = (a.clone() + b.clone()) / ctx.int(2);
        b = (a * b).sqrt();
        a = next_a;
    }
    Ok(ctx.pi() / (a + b))
}

// Gauss–Kronrod 7/15 nodes on [-1, 1] (non-negative half) and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5 and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Default panel budget for [`ellipk_quadrature`].
pub const DEFAULT_MAX_PANELS: usize = 4_000;

/// Largest modulus the quadrature oracle accepts.
pub const QUADRATURE_MAX_MODULUS: f64 = 1.0 - 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod_panel<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Panel {
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(centre);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let pair = f(centre - half * x) + f(centre + half * x);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Panel {
        lo,
        hi,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Adaptive Gauss–Kronrod integration of `f` over `[lo, hi]` until the summed
/// rule-pair error estimate drops to `tol`.
pub fn adaptive_quadrature<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    tol: f64,
    max_panels: usize,
) -> Result<Estimate> {
    let mut heap = BinaryHeap::new();
    let first = kronrod_panel(&f, lo, hi);
    let mut error = first.error;
    heap.push(first);
    while error > tol {
        if heap.len() >= max_panels {
            return Err(Error::ToleranceNotMet {
                estimate: error,
                tol,
                panels: heap.len(),
            });
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.lo + worst.hi);
        let left = kronrod_panel(&f, worst.lo, mid);
        let right = kronrod_panel(&f, mid, worst.hi);
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // Re-sum to stop drift from the running update.
        if heap.len() % 64 == 0 {
            error = heap.iter().map(|p| p.error).sum();
        }
    }
    let value = heap.iter().map(|p| p.value).sum();
    Ok(Estimate { value, error })
}

/// `K(r)` by direct adaptive quadrature of the defining integral.
pub fn ellipk_quadrature(r: Modulus, tol: f64) -> Result<f64> {
    ellipk_quadrature_estimate(r, tol, DEFAULT_MAX_PANELS).map(|e| e.value)
}

pub fn ellipk_quadrature_estimate(r: Modulus, tol: f64, max_panels: usize) -> Result<Estimate> {
    if r.value() > QUADRATURE_MAX_MODULUS {
        return Err(Error::domain("ellipk_quadrature", r.value(), "[0, 1 - 1e-8]"));
    }
    if !(tol > 0.0) {
        return Err(Error::domain("ellipk_quadrature tolerance", tol, "(0, inf)"));
    }
    let r = r.value();
    let complement_sq = (1.0 - r) * (1.0 + r);
    // 1 − r² sin²t = cos²t + (1 − r²) sin²t, free of cancellation near t = π/2.
    let integrand = |t: f64| {
        let (s, c) = t.sin_cos();
        1.0 / (c * c + complement_sq * s * s).sqrt()
    };
    adaptive_quadrature(integrand, 0.0, std::f64::consts::FRAC_PI_2, tol, max_panels)
}

/// `log(1 − r²)` without cancellation at either end of `[0, 1)`.
pub fn log_one_minus_r_squared<A: Arithmetic>(ctx: &A, r: Modulus) -> Result<A::Real> {
    r.require_below_one("log_one_minus_r_squared")?;
    let x = ctx.real(r.value());
    if r.value() < 0.5 {
        Ok((-(x.clone() * x)).ln_1p())
    } else {
        let one = ctx.one();
        Ok(((one.clone() - x.clone()) * (one + x)).ln())
    }
}

/// `log(4/√(1 − r²))`, the leading behaviour of `K` as `r → 1`.
pub fn log_asymptote<A: Arithmetic>(ctx: &A, r: Modulus) -> Result<A::Real> {
    let l = log_one_minus_r_squared(ctx, r)?;
    Ok(ctx.int(2) * ctx.ln2() - l / ctx.int(2))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Agm,
    Series,
    Quadrature,
    Auto,
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "agm" => Ok(Method::Agm),
            "series" => Ok(Method::Series),
            "quadrature" => Ok(Method::Quadrature),
            "auto" => Ok(Method::Auto),
            other => Err(format!(
                "unknown method `{other}` (expected agm, series, quadrature or auto)"
            )),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Agm => "agm",
            Method::Series => "series",
            Method::Quadrature => "quadrature",
            Method::Auto => "auto",
        };
        f.write_str(s)
    }
}

/// Largest modulus for which [`Method::Auto`] picks the series.
pub const AUTO_SERIES_LIMIT: f64 = 0.9;

/// A value of `K` together with the method actually used and an error estimate.
#[derive(Clone, Debug)]
pub struct Evaluation<R> {
    pub value: R,
    pub method: Method,
    pub error_estimate: f64,
}

/// Evaluate `K(r)` with the requested method at the context's precision.
pub fn ellipk<A: Arithmetic>(ctx: &A, r: Modulus, method: Method) -> Result<Evaluation<A::Real>> {
    let method = match method {
        Method::Auto if r.value() <= AUTO_SERIES_LIMIT => Method::Series,
        Method::Auto => Method::Agm,
        m => m,
    };
    let u = ctx.unit_roundoff();
    match method {
        Method::Series => {
            let tol = u * std::f64::consts::FRAC_PI_2;
            let s = ellipk_series_sum(ctx, r, tol, DEFAULT_MAX_SERIES_TERMS)?;
            let error_estimate = s.tail_bound + (s.terms as f64) * u * s.value.as_f64();
            Ok(Evaluation {
                value: s.value,
                method,
                error_estimate,
            })
        }
        Method::Agm => {
            let value = ellipk_agm(ctx, r)?;
            let error_estimate = 16.0 * u * value.as_f64();
            Ok(Evaluation {
                value,
                method,
                error_estimate,
            })
        }
        Method::Quadrature => {
            let e = ellipk_quadrature_estimate(r, 1e-13, DEFAULT_MAX_PANELS)?;
            Ok(Evaluation {
                value: ctx.real(e.value),
                method,
                error_estimate: e.error,
            })
        }
        Method::Auto => unreachable!("resolved above"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::{Extended, Hardware};
    use approx::assert_relative_eq;

    const K_HALF: f64 = 1.685_750_354_812_596_0;

    #[test]
    fn pochhammer_values() {
        let h = Hardware;
        assert_eq!(pochhammer(&h, &0.5, 0), 1.0);
        assert_eq!(pochhammer(&h, &0.5, 2), 0.75);
        assert_eq!(pochhammer(&h, &0.5, 3), 1.875);
        assert_eq!(pochhammer(&h, &1.0, 5), 120.0);
    }

    #[test]
    fn pochhammer_extended_large_n_is_finite() {
        let x = Extended::new(20).unwrap();
        // (1)_2000 = 2000!, far beyond the double range.
        let v = pochhammer(&x, &x.one(), 2000);
        assert!(v.as_f64().is_infinite());
        let log10 = v.ln().as_f64() / std::f64::consts::LN_10;
        assert!((log10 - 5735.52).abs() < 0.01, "{log10}");
    }

    #[test]
    fn gamma_half_ratio_first_values() {
        let h = Hardware;
        assert_relative_eq!(gamma_half_ratio(&h, 1), 1.772_453_850_905_516, epsilon = 1e-15);
        assert_relative_eq!(gamma_half_ratio(&h, 2), 0.886_226_925_452_758, epsilon = 1e-15);
        assert_relative_eq!(gamma_half_ratio(&h, 3), 0.664_670_194_089_568_5, epsilon = 1e-15);
    }

    #[test]
    fn ellipk_at_zero_is_half_pi() {
        let h = Hardware;
        let half_pi = std::f64::consts::FRAC_PI_2;
        let zero = Modulus::new(0.0).unwrap();
        assert_eq!(ellipk_series(&h, zero, 1e-16).unwrap(), half_pi);
        assert_eq!(ellipk_agm(&h, zero).unwrap(), half_pi);
        assert_relative_eq!(ellipk_quadrature(zero, 1e-12).unwrap(), half_pi, epsilon = 1e-14);
    }

    #[test]
    fn ellipk_half_all_methods() {
        let h = Hardware;
        let r = Modulus::new(0.5).unwrap();
        assert_relative_eq!(ellipk_series(&h, r, 1e-17).unwrap(), K_HALF, max_relative = 1e-15);
        assert_relative_eq!(ellipk_agm(&h, r).unwrap(), K_HALF, max_relative = 1e-15);
        assert_relative_eq!(ellipk_quadrature(r, 1e-13).unwrap(), K_HALF, epsilon = 1e-12);
    }

    #[test]
    fn series_matches_agm_near_one() {
        let h = Hardware;
        let r = Modulus::new(0.99).unwrap();
        let s = ellipk_series(&h, r, 1e-14).unwrap();
        let a = ellipk_agm(&h, r).unwrap();
        assert!((s - a).abs() < 1e-13, "{s} vs {a}");
        assert_relative_eq!(a, 3.356_600_523_361_192_4, max_relative = 1e-15);
    }

    #[test]
    fn series_gives_up_when_too_slow() {
        let h = Hardware;
        let r = Modulus::new(1.0 - 1e-9).unwrap();
        assert!(matches!(
            ellipk_series_sum(&h, r, 1e-15, 1000),
            Err(Error::ConvergenceTooSlow { terms: 1000 })
        ));
    }

    #[test]
    fn quadrature_reaches_nine_tenths() {
        let h = Hardware;
        let r = Modulus::new(0.9).unwrap();
        let q = ellipk_quadrature(r, 1e-12).unwrap();
        assert!((q - ellipk_agm(&h, r).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn quadrature_budget_and_domain() {
        let r = Modulus::new(0.999).unwrap();
        assert!(matches!(
            ellipk_quadrature_estimate(r, 1e-14, 2),
            Err(Error::ToleranceNotMet { .. })
        ));
        let too_close = Modulus::new(1.0 - 1e-9).unwrap();
        assert!(matches!(
            ellipk_quadrature(too_close, 1e-10),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn agm_tracks_logarithmic_asymptote() {
        let h = Hardware;
        let r = Modulus::new(1.0 - 1e-10).unwrap();
        let k = ellipk_agm(&h, r).unwrap();
        let asym = log_asymptote(&h, r).unwrap();
        // K − log(4/r') ≈ (r'²/4)(log(4/r') − 1); mpmath at 40 digits.
        assert!((k - asym - 5.776_323_575_519_243e-10).abs() < 1e-13, "{}", k - asym);
    }

    #[test]
    fn agm_rejects_one() {
        let h = Hardware;
        assert!(matches!(
            ellipk_agm(&h, Modulus::new(1.0).unwrap()),
            Err(Error::Domain { .. })
        ));
        assert!(Modulus::new(1.5).is_err());
        assert!(Modulus::new(f64::NAN).is_err());
        assert!(Modulus::interior(0.0).is_err());
    }

    #[test]
    fn log_one_minus_r_squared_values() {
        let h = Hardware;
        assert_eq!(log_one_minus_r_squared(&h, Modulus::new(0.0).unwrap()).unwrap(), 0.0);
        assert_relative_eq!(
            log_one_minus_r_squared(&h, Modulus::new(0.5).unwrap()).unwrap(),
            -0.287_682_072_451_780_9,
            max_relative = 1e-15
        );
    }

    #[test]
    fn log_one_minus_r_squared_near_one_against_extended() {
        let r = Modulus::new(1.0 - 1e-15).unwrap();
        let hw = log_one_minus_r_squared(&Hardware, r).unwrap();
        let x = Extended::new(40).unwrap();
        let reference = log_one_minus_r_squared(&x, r).unwrap().as_f64();
        assert_relative_eq!(hw, reference, max_relative = 4.0 * f64::EPSILON);
        // The double nearest 1 − 1e-15 sits a little below it.
        assert!((hw - (2e-15f64).ln()).abs() < 0.06);
    }

    #[test]
    fn extended_evaluators_agree() {
        let x = Extended::new(50).unwrap();
        let r = Modulus::new(0.5).unwrap();
        let s = ellipk_series(&x, r, 1e-52).unwrap();
        let a = ellipk_agm(&x, r).unwrap();
        let diff = (s - a.clone()).abs().as_f64();
        assert!(diff < 1e-48, "{diff:e}");
        // mpmath, 60 digits
        assert_eq!(
            a.render(40),
            "1.685750354812596042871203657799076989501"
        );
    }

    #[test]
    fn auto_dispatch() {
        let h = Hardware;
        let lo = ellipk(&h, Modulus::new(0.9).unwrap(), Method::Auto).unwrap();
        let hi = ellipk(&h, Modulus::new(0.91).unwrap(), Method::Auto).unwrap();
        assert_eq!(lo.method, Method::Series);
        assert_eq!(hi.method, Method::Agm);
        assert!("simpson".parse::<Method>().is_err());
    }
}
