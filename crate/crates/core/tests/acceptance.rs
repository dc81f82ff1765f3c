//! One line per acceptance criterion. Exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use ellipk_core::bounds::{constants, f1_series, g1_series};
use ellipk_core::compare::compare;
use ellipk_core::oracle::{build_f_series, build_g_series};
use ellipk_core::precision::{Arithmetic, BigReal, Extended, Hardware, Real};
use ellipk_core::verify::{
    coefficient_terms, verify_coefficients, verify_constants, verify_lemma, verify_sandwich,
    verify_shape, SandwichOptions, VerificationReport,
};
use ellipk_core::{Execution, GridSpec, Modulus};

const DIGITS: u32 = 50;
const N_MAX: u64 = 10_000;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn all_passed(reports: &[VerificationReport], ids: &[&str]) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for id in ids {
        match reports.iter().find(|r| r.claim_id == *id) {
            Some(r) => {
                ok &= r.passed;
                parts.push(format!("{id}: min margin {:.3e}", r.min_margin));
                if let Some(f) = &r.first_failure {
                    parts.push(format!("first failure {f}"));
                }
            }
            None => {
                ok = false;
                parts.push(format!("{id}: missing"));
            }
        }
    }
    (ok, parts.join("; "))
}

fn abs_f64(x: BigReal) -> f64 {
    x.abs().as_f64()
}

fn ctx() -> Extended {
    Extended::new(DIGITS).expect("valid digits")
}

fn constants_reproduction() -> Outcome {
    let printed: [(&str, f64, f64); 8] = [
        ("theta", 0.126845, 1e-6),
        ("lambda", 0.213705, 1e-6),
        ("alpha", 0.544425, 1e-6),
        ("beta", 1.364397, 1e-6),
        ("delta", 1.389763, 1e-6),
        ("zeta", -0.569791, 1e-6),
        ("alpha_star", 0.000893, 1e-6),
        ("beta_star", 0.0459, 1e-4),
    ];
    let x = ctx();
    let c = constants(&x);
    let mut worst = 0.0f64;
    let mut ok = true;
    for ((name, _, value), (expected_name, shown, tol)) in c.entries().iter().zip(printed) {
        assert_eq!(*name, expected_name);
        let dev = (value.as_f64() - shown).abs();
        ok &= dev < tol;
        worst = worst.max(dev / tol);
    }
    let reports = verify_constants(&x);
    let (job_ok, detail) = all_passed(&reports, &["printed_constants"]);
    outcome(ok && job_ok, format!("worst deviation {worst:.3} of tolerance; {detail}"))
}

fn lemma() -> Outcome {
    let report = verify_lemma(&ctx(), N_MAX, Execution::default()).expect("lemma job");
    let x = ctx();
    let last = coefficient_terms(&x, N_MAX, Execution::default()).pop().expect("terms");
    let q_margin = last.q_n.as_f64();
    outcome(
        report.passed && q_margin > 2.6e-9 && q_margin < 2.8e-9,
        format!("n=1..{N_MAX}: {} (min margin {:.3e}), q_n at n={N_MAX} = {q_margin:.4e}", report.passed, report.min_margin),
    )
}

fn coefficients() -> Outcome {
    let x = ctx();
    let reports = verify_coefficients(&x, N_MAX, Execution::default()).expect("coefficient job");
    let (ok, detail) = all_passed(&reports, &["coefficients_positive", "g1_coefficients_negative", "coefficient_oracle"]);
    // Independent restatement of the 1e-40 relative tolerance.
    let f = build_f_series(&x, 64).expect("f series");
    let terms = coefficient_terms(&x, 64, Execution::Sequential);
    let worst = terms[2..]
        .iter()
        .map(|t| abs_f64((f.series.coefficients()[t.n as usize].clone() - t.c_n.clone()) / t.c_n.clone()))
        .fold(0.0f64, f64::max);
    outcome(ok && worst <= 1e-40, format!("oracle max rel deviation {worst:.3e}; {detail}"))
}

fn series_heads() -> Outcome {
    let x = ctx();
    let c = constants(&x);
    let f = build_f_series(&x, 64).expect("f series");
    let g = build_g_series(&x, 64).expect("g series");
    let scale = 8.0 * std::f64::consts::PI;
    let fc = f.series.coefficients();
    let gc = g.series.coefficients();
    let residuals = [
        abs_f64(fc[0].clone()),
        abs_f64(fc[1].clone()),
        abs_f64(gc[0].clone()),
        abs_f64(fc[2].clone() - c.alpha.clone()),
        abs_f64(gc[1].clone() - c.delta.clone()),
        abs_f64(gc[2].clone() - c.zeta.clone()),
    ];
    let worst = residuals.iter().map(|r| r / scale).fold(0.0f64, f64::max);
    outcome(worst < 1e-40, format!("worst head residual / 8pi = {worst:.3e}"))
}

fn limits() -> Outcome {
    let x = ctx();
    let c = constants(&x);
    let terms = coefficient_terms(&x, N_MAX, Execution::default());
    let partial = terms[2..].iter().fold(x.zero(), |acc, t| acc + t.c_n.clone());
    let gap = abs_f64(partial - (c.beta.clone() - c.alpha.clone()));

    let near_zero = Modulus::new(1e-4).unwrap();
    let one = Modulus::new(1.0).unwrap();
    let f_zero = f1_series(&x, near_zero, 64, &c).unwrap().value;
    let g_zero = g1_series(&x, near_zero, 64, &c).unwrap().value;
    let f_one = f1_series(&x, one, N_MAX as usize, &c).unwrap().value;
    let g_one = g1_series(&x, one, N_MAX as usize, &c).unwrap().value;
    let f0 = abs_f64(f_zero - c.alpha.clone());
    let g0 = abs_f64(g_zero - c.delta.clone());
    let f1 = abs_f64(f_one - c.beta.clone());
    let g1 = abs_f64(g_one);
    let identity = abs_f64(c.beta.clone() - c.alpha.clone() - c.delta.clone() - c.zeta.clone());
    let ok = gap < 1e-3 && f0 < 1e-6 && g0 < 1e-6 && f1 < 1e-3 && g1 < 1e-3 && identity < 1e-40;
    outcome(
        ok,
        format!(
            "|sum - (beta-alpha)| = {gap:.3e}; f1(1e-4)-alpha {f0:.2e}; g1(1e-4)-delta {g0:.2e}; \
             f1(1)-beta {f1:.2e}; g1(1) {g1:.2e}; identity {identity:.2e}"
        ),
    )
}

fn sandwich() -> (Outcome, Outcome, Duration) {
    let grid = GridSpec::SANDWICH.points().unwrap();
    let opts = SandwichOptions::default();
    let start = Instant::now();
    let reports = verify_sandwich(&Hardware, &grid, &opts).expect("sandwich job");
    let elapsed = start.elapsed();
    let (ok, detail) = all_passed(
        &reports,
        &["sandwich_new_lower", "sandwich_new_upper", "new_upper_below_ar", "extended_spot_checks"],
    );
    let (prior_ok, prior_detail) = all_passed(&reports, &["avv_upper", "wclc_lower", "wclc_upper"]);
    let range = &reports[0].range;
    (
        outcome(ok && elapsed < Duration::from_secs(120), format!("{range}; {detail}")),
        outcome(prior_ok, prior_detail),
        elapsed,
    )
}

fn shape() -> Outcome {
    let grid = GridSpec::SHAPE.points().unwrap();
    let reports = verify_shape(&ctx(), &grid, Execution::default()).expect("shape job");
    let (ok, detail) = all_passed(&reports, &["f1_increasing_convex", "g1_decreasing_concave", "f1_derivative"]);
    outcome(ok, detail)
}

fn non_dominance() -> Outcome {
    let grid = GridSpec::SANDWICH.points().unwrap();
    let cmp = compare(&Hardware, &grid, DIGITS, Execution::default()).expect("compare");
    let w = cmp.witnesses;
    outcome(
        w.wclc_tighter.is_some() && w.new_tighter.is_some() && cmp.violation_count() == 0,
        format!(
            "quartic-correction tighter at {:?}, new tighter at {:?}, violations {}",
            w.wclc_tighter,
            w.new_tighter,
            cmp.violation_count()
        ),
    )
}

fn timed<F: FnOnce() -> Outcome>(f: F) -> (Outcome, Duration) {
    let start = Instant::now();
    let o = f();
    (o, start.elapsed())
}

fn main() {
    let mut failures = 0;
    let mut report = |id: u32, name: &str, (o, t): (Outcome, Duration), budget: Option<Duration>| {
        let in_budget = budget.is_none_or(|b| t <= b);
        let passed = o.passed && in_budget;
        if !passed {
            failures += 1;
        }
        let budget_note = budget.map_or(String::new(), |b| format!(" / budget {}s", b.as_secs()));
        println!(
            "{} [{id}] {name}: {} ({:.2}s{budget_note})",
            if passed { "PASS" } else { "FAIL" },
            o.detail,
            t.as_secs_f64()
        );
    };

    report(1, "constants reproduction", timed(constants_reproduction), None);
    report(2, "lemma q_n > p_n > 0", timed(lemma), Some(Duration::from_secs(60)));
    report(3, "coefficient positivity and oracle", timed(coefficients), Some(Duration::from_secs(120)));
    report(4, "series assembly heads", timed(series_heads), None);
    report(5, "limits and partial sums", timed(limits), None);
    let (sandwich_outcome, prior_art, elapsed) = sandwich();
    report(6, "sandwich on 0.0001..0.9999", (sandwich_outcome, elapsed), Some(Duration::from_secs(120)));
    report(7, "shape of f1 and g1", timed(shape), None);
    report(8, "upper-bound non-dominance", timed(non_dominance), None);
    report(9, "prior-art bounds hold", (prior_art, elapsed), None);

    if failures > 0 {
        println!("{failures} criterion(s) failed");
        std::process::exit(1);
    }
}
