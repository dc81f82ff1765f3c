use statrs::function::gamma::ln_gamma;

use super::{
    coefficient_terms, gamma_ratio_square_bound, kershaw, lemma_polynomial, verify_non_dominance,
    verify_sandwich, verify_shape, CoefficientTerm, SandwichOptions, Tally, VerificationReport,
};
use crate::bounds::{constants, fit_envelope, ENVELOPE_WINDOW};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grid::GridSpec;
use crate::oracle::{build_f_series, build_g_series, head_tolerance};
use crate::precision::{Arithmetic, Hardware, Mode, Real, HARDWARE_DIGITS};
use crate::special_fn::{GammaHalfRatios, Modulus};

/// Oracle cross-checks stop at this index.
pub const ORACLE_MAX_N: u64 = 64;

/// Sample points for Kershaw's inequality.
pub const KERSHAW_X: [f64; 5] = [0.5, 1.0, 2.0, 5.0, 10.0];
pub const KERSHAW_S: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];

fn index_range(first: u64, last: u64) -> String {
    format!("n={first}..{last}")
}

// Rounding-error bounds for one term, from the operation counts of
// `term_from_ratio` and the Gamma-ratio recurrence (2 ops per step).
struct TermErrors {
    poly: f64,
    p: f64,
    q_minus_p: f64,
    c: f64,
}

fn term_errors<R: Real>(u: f64, t: &CoefficientTerm<R>) -> TermErrors {
    let n = t.n as f64;
    let bound = 4.0 / (4.0 * n - 3.0);
    let p = t.p_n.as_f64();
    let q = t.q_n.as_f64();
    let rational = p + bound;
    let ratio_sq = (rational - q).abs();
    let recurrence = (4.0 * n + 8.0) * ratio_sq;
    let q_err = u * (32.0 * rational + recurrence);
    let c = t.c_n.as_f64();
    TermErrors {
        poly: u * 8.0 * (5.0 * std::f64::consts::PI * n * n + 16.0 * n),
        p: u * (32.0 * rational + 8.0 * bound),
        q_minus_p: u * (64.0 * rational + 8.0 * bound + recurrence),
        c: c.abs() * (q_err / q.abs() + 8.0 * u),
    }
}

fn require_n(op: &'static str, n_max: u64, min: u64) -> Result<()> {
    if n_max < min {
        let expected = if min == 1 { "n_max >= 1" } else { "n_max >= 3" };
        return Err(Error::domain(op, n_max as f64, expected));
    }
    Ok(())
}

/// `Q_n > P_n > 0` and `5πn² − 16n + 4 > 0` for `n = 1..=n_max`, together
/// with the reduction `(64 − 15π)n − 16 > 0` that makes `P_n > 0` obvious.
pub fn verify_lemma<A: Arithmetic>(
    ctx: &A,
    n_max: u64,
    exec: Execution,
) -> Result<VerificationReport> {
    require_n("verify_lemma", n_max, 1)?;
    let u = ctx.unit_roundoff();
    let terms = coefficient_terms(ctx, n_max, exec);
    let reduction_slope = 64.0 - 15.0 * std::f64::consts::PI;
    let rows = exec.map(&terms, |t| {
        let e = term_errors(u, t);
        let n = t.n as f64;
        [
            ("p_n", t.p_n.as_f64(), e.p),
            ("q_n - p_n", (t.q_n.clone() - t.p_n.clone()).as_f64(), e.q_minus_p),
            ("5pi n^2 - 16n + 4", lemma_polynomial(ctx, t.n).as_f64(), e.poly),
            ("(64 - 15pi)n - 16", reduction_slope * n - 16.0, 1e-13 * n),
        ]
    });
    let mut tally = Tally::new();
    for (t, row) in terms.iter().zip(&rows) {
        for &(what, margin, err) in row {
            tally.observe(margin, err, || format!("n={}: {what}", t.n));
        }
    }
    Ok(tally.finish("q_exceeds_p_positive", index_range(1, n_max), ctx.digits()))
}

/// `[Γ(n − 1/2)/Γ(n)]² < 4/(4n − 3)`, the square-root case of Kershaw's
/// lower bound, for `n = 1..=n_max`.
pub fn verify_gamma_ratio_bound<A: Arithmetic>(
    ctx: &A,
    n_max: u64,
    exec: Execution,
) -> Result<VerificationReport> {
    require_n("verify_gamma_ratio_bound", n_max, 1)?;
    let u = ctx.unit_roundoff();
    let ratios: Vec<A::Real> = GammaHalfRatios::new(ctx).take(n_max as usize).collect();
    let margins = exec.map_range(0, ratios.len(), |i| {
        let n = i as u64 + 1;
        let sq = ratios[i].clone() * ratios[i].clone();
        let bound = gamma_ratio_square_bound(ctx, n);
        let err = u * (8.0 * bound.as_f64() + (4.0 * n as f64 + 8.0) * sq.as_f64());
        ((bound - sq).as_f64(), err)
    });
    let mut tally = Tally::new();
    for (i, &(m, e)) in margins.iter().enumerate() {
        tally.observe(m, e, || format!("n={}", i + 1));
    }
    Ok(tally.finish("gamma_ratio_square_bound", index_range(1, n_max), ctx.digits()))
}

/// Kershaw's bracket around `Γ(x + 1)/Γ(x + s)` on the fixed 5×5 sample,
/// with the Gamma ratio from an independent log-Gamma in double precision.
pub fn verify_kershaw() -> Result<VerificationReport> {
    let h = Hardware;
    let mut tally = Tally::new();
    for &x in &KERSHAW_X {
        for &s in &KERSHAW_S {
            let (lo, hi) = kershaw(&h, x, s)?;
            let ratio = (ln_gamma(x + 1.0) - ln_gamma(x + s)).exp();
            let err = 1e-13 * ratio;
            let at = || format!("x={x}, s={s}");
            tally.observe(ratio - lo, err, at);
            tally.observe(hi - ratio, err, at);
        }
    }
    Ok(tally.finish("kershaw_bracket", "x in {0.5,1,2,5,10}, s in {0.1,0.25,0.5,0.75,0.9}", HARDWARE_DIGITS))
}

/// Relative tolerance for closed form against oracle.
fn oracle_tolerance<A: Arithmetic>(ctx: &A) -> f64 {
    match ctx.context().mode() {
        Mode::Hardware => 1e4 * ctx.unit_roundoff(),
        Mode::Extended => 10f64.powi(-(ctx.digits() as i32) + 8),
    }
}

/// Positivity of `c_n` for `n = 3..=n_max`, the sign pattern of `g₁`'s
/// expansion, agreement with the power-series oracle up to
/// `min(n_max, 64)`, and the vanishing heads of the assembled series.
pub fn verify_coefficients<A: Arithmetic>(
    ctx: &A,
    n_max: u64,
    exec: Execution,
) -> Result<Vec<VerificationReport>> {
    require_n("verify_coefficients", n_max, 3)?;
    let u = ctx.unit_roundoff();
    let digits = ctx.digits();
    let c = constants(ctx);
    let terms = coefficient_terms(ctx, n_max, exec);
    let errors = exec.map(&terms[2..], |t| term_errors(u, t).c);

    let mut positive = Tally::new();
    for (t, &e) in terms[2..].iter().zip(&errors) {
        positive.observe(t.c_n.as_f64(), e, || format!("n={}", t.n));
    }

    // g₁ = δ + ζr² − Σ c_n r^{2n−2}: every coefficient after δ is negative.
    let mut negative = Tally::new();
    negative.observe(-c.zeta.as_f64(), 8.0 * u, || "zeta".to_string());
    for (t, &e) in terms[2..].iter().zip(&errors) {
        negative.observe(t.c_n.as_f64(), e, || format!("n={}", t.n));
    }

    let order = n_max.min(ORACLE_MAX_N);
    let f = build_f_series(ctx, order as usize)?;
    let g = build_g_series(ctx, order as usize)?;
    let tol = oracle_tolerance(ctx);
    let mut oracle = Tally::new();
    for t in &terms[2..order as usize] {
        let reference = &f.series.coefficients()[t.n as usize];
        let g_reference = -g.series.coefficients()[t.n as usize].clone();
        for other in [reference.clone(), g_reference] {
            let deviation = ((other - t.c_n.clone()) / t.c_n.clone()).abs().as_f64();
            oracle.observe(tol - deviation, 0.0, || format!("n={}", t.n));
        }
    }

    let head_tol = head_tolerance(ctx);
    let scale = 8.0 * std::f64::consts::PI;
    let mut heads = Tally::new();
    let f_coeff = f.series.coefficients();
    let g_coeff = g.series.coefficients();
    let checks = [
        ("f r^0", f_coeff[0].clone()),
        ("f r^2", f_coeff[1].clone()),
        ("g r^0", g_coeff[0].clone()),
        ("f r^4 - alpha", f_coeff[2].clone() - c.alpha.clone()),
        ("g r^2 - delta", g_coeff[1].clone() - c.delta.clone()),
        ("g r^4 - zeta", g_coeff[2].clone() - c.zeta.clone()),
    ];
    for (what, residual) in checks {
        heads.observe(head_tol - residual.abs().as_f64() / scale, 0.0, || what.to_string());
    }

    Ok(vec![
        positive.finish("coefficients_positive", index_range(3, n_max), digits),
        negative.finish("g1_coefficients_negative", index_range(3, n_max), digits),
        oracle.finish("coefficient_oracle", index_range(3, order), digits),
        heads.finish("series_heads", "r^0, r^2, r^4", digits),
    ])
}

/// `|Σ_{n=3}^{N} c_n − (β − α)| ≤ C/N` with `C` the envelope fitted past `N`,
/// and the same bound for `δ + ζ` (the telescoping of `g₁` to 0 at `r = 1`).
pub fn verify_partial_sums<A: Arithmetic>(
    ctx: &A,
    n_max: u64,
    exec: Execution,
) -> Result<VerificationReport> {
    require_n("verify_partial_sums", n_max, 3)?;
    let c = constants(ctx);
    let u = ctx.unit_roundoff();
    let terms = coefficient_terms(ctx, n_max + ENVELOPE_WINDOW as u64, exec);
    let partial = terms[2..n_max as usize]
        .iter()
        .fold(ctx.zero(), |acc, t| acc + t.c_n.clone());
    let window: Vec<f64> = terms[n_max as usize - 1..]
        .iter()
        .map(|t| t.c_n.as_f64() * (t.n * t.n) as f64)
        .collect();
    let envelope = fit_envelope(&window, n_max as usize);
    let tail_bound = envelope / n_max as f64;
    let err = 4.0 * n_max as f64 * u;

    let mut tally = Tally::new();
    let gaps = [
        ("beta - alpha", c.beta.clone() - c.alpha.clone() - partial.clone()),
        ("delta + zeta", c.delta.clone() + c.zeta.clone() - partial),
    ];
    for (what, gap) in gaps {
        let gap = gap.as_f64();
        // Positive terms: the partial sum stays below the limit.
        tally.observe(gap, err, || format!("{what}: partial sum not below limit"));
        tally.observe(tail_bound - gap.abs(), err, || format!("{what}: gap above C/N"));
    }
    Ok(tally.finish(
        "partial_sum_limit",
        format!("n=3..{n_max}, C={envelope:.6}"),
        ctx.digits(),
    ))
}

/// Decimal values and the number of decimals printed for each constant.
pub const PRINTED_CONSTANTS: [(&str, f64, i32); 8] = [
    ("theta", 0.126845, 6),
    ("lambda", 0.213705, 6),
    ("alpha", 0.544425, 6),
    ("beta", 1.364397, 6),
    ("delta", 1.389763, 6),
    ("zeta", -0.569791, 6),
    ("alpha_star", 0.000893, 6),
    ("beta_star", 0.0459, 4),
];

/// Printed prefixes of the constants, the identity `β − α = δ + ζ`, and `ζ < 0`.
pub fn verify_constants<A: Arithmetic>(ctx: &A) -> Vec<VerificationReport> {
    let c = constants(ctx);
    let digits = ctx.digits();
    let mut printed = Tally::new();
    for ((name, _, value), (printed_name, shown, decimals)) in
        c.entries().iter().zip(PRINTED_CONSTANTS.iter())
    {
        debug_assert_eq!(name, printed_name);
        let tol = 10f64.powi(-decimals);
        printed.observe(tol - (value.as_f64() - shown).abs(), 0.0, || name.to_string());
    }

    let identity_tol = head_tolerance(ctx);
    let residual = (c.beta.clone() - c.alpha.clone() - c.delta.clone() - c.zeta.clone())
        .abs()
        .as_f64();
    let mut identity = Tally::new();
    identity.observe(identity_tol - residual, 0.0, || "beta - alpha - delta - zeta".into());

    let mut zeta = Tally::new();
    zeta.observe(-c.zeta.as_f64(), 8.0 * ctx.unit_roundoff(), || "zeta".into());

    vec![
        printed.finish("printed_constants", "theta..beta_star", digits),
        identity.finish("constant_identity", "beta - alpha = delta + zeta", digits),
        zeta.finish("zeta_negative", "zeta", digits),
    ]
}

/// Inputs for [`verify_all`].
#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub n_max: u64,
    pub sandwich_grid: Vec<Modulus>,
    pub shape_grid: Vec<Modulus>,
    pub sandwich: SandwichOptions,
    /// Run the sandwich sweep in `f64` with escalation, instead of the
    /// job's own context.
    pub sandwich_in_hardware: bool,
    pub exec: Execution,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            n_max: 10_000,
            sandwich_grid: GridSpec::SANDWICH.points().expect("valid grid"),
            shape_grid: GridSpec::SHAPE.points().expect("valid grid"),
            sandwich: SandwichOptions::default(),
            sandwich_in_hardware: true,
            exec: Execution::default(),
        }
    }
}

/// Every job, in a fixed order.
pub fn verify_all<A: Arithmetic>(ctx: &A, cfg: &VerifyConfig) -> Result<Vec<VerificationReport>> {
    let mut reports = verify_constants(ctx);
    reports.push(verify_lemma(ctx, cfg.n_max, cfg.exec)?);
    reports.push(verify_gamma_ratio_bound(ctx, cfg.n_max, cfg.exec)?);
    reports.push(verify_kershaw()?);
    reports.extend(verify_coefficients(ctx, cfg.n_max, cfg.exec)?);
    reports.push(verify_partial_sums(ctx, cfg.n_max, cfg.exec)?);
    if cfg.sandwich_in_hardware {
        reports.extend(verify_sandwich(&Hardware, &cfg.sandwich_grid, &cfg.sandwich)?);
        reports.push(verify_non_dominance(&Hardware, &cfg.sandwich_grid, cfg.exec)?.report);
    } else {
        reports.extend(verify_sandwich(ctx, &cfg.sandwich_grid, &cfg.sandwich)?);
        reports.push(verify_non_dominance(ctx, &cfg.sandwich_grid, cfg.exec)?.report);
    }
    reports.extend(verify_shape(ctx, &cfg.shape_grid, cfg.exec)?);
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::Extended;

    #[test]
    fn lemma_single_index_margin_is_p1() {
        let x = Extended::new(50).unwrap();
        let r = verify_lemma(&x, 1, Execution::Sequential).unwrap();
        assert!(r.passed);
        assert!((r.min_margin - 0.236_278_013_788_878_66).abs() < 1e-15);
        assert_eq!(r.digits_used, 50);
    }

    #[test]
    fn lemma_in_hardware_resolves_small_margins() {
        let r = verify_lemma(&Hardware, 2_000, Execution::Parallel).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(verify_lemma(&Hardware, 0, Execution::Parallel).is_err());
    }

    #[test]
    fn gamma_bound_and_kershaw() {
        let x = Extended::new(30).unwrap();
        assert!(verify_gamma_ratio_bound(&x, 100, Execution::Parallel).unwrap().passed);
        let k = verify_kershaw().unwrap();
        assert!(k.passed, "{k:?}");
    }

    #[test]
    fn coefficient_reports_pass_at_small_scale() {
        let x = Extended::new(50).unwrap();
        for r in verify_coefficients(&x, 200, Execution::Parallel).unwrap() {
            assert!(r.passed, "{r:?}");
        }
        for r in verify_coefficients(&Hardware, 200, Execution::Parallel).unwrap() {
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn partial_sums_bracket_the_limit() {
        let r = verify_partial_sums(&Hardware, 2_000, Execution::Parallel).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn constants_reports() {
        for r in verify_constants(&Extended::new(50).unwrap()) {
            assert!(r.passed, "{r:?}");
        }
        for r in verify_constants(&Hardware) {
            assert!(r.passed, "{r:?}");
        }
    }
}
