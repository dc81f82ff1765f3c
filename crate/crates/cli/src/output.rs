//! Table, CSV and JSON rendering. Numbers are shortest round-trip decimals in
//! hardware mode and `digits` significant figures in extended mode.

use std::fmt::Write as _;

use clap::ValueEnum;
use ellipk_core::bounds::BoundFamily;
use ellipk_core::compare::{Comparison, ComparisonRow, PairSummary};
use ellipk_core::precision::{Arithmetic, Real};
use ellipk_core::special_fn::Evaluation;
use ellipk_core::verify::VerificationReport;
use ellipk_core::Modulus;
use serde::Serialize;
use serde_json::value::RawValue;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

pub const CSV_HEADER: &str =
    "r,k,new_lower,new_upper,ar_upper,avv_upper,wclc_lower,wclc_upper,tightest_lower,tightest_upper";

fn num<A: Arithmetic>(ctx: &A, x: &A::Real) -> String {
    x.render(ctx.digits())
}

fn raw(text: String) -> Box<RawValue> {
    RawValue::from_string(text).expect("valid JSON number")
}

fn json_num<A: Arithmetic>(ctx: &A, x: &A::Real) -> Box<RawValue> {
    if x.as_f64().is_finite() {
        raw(num(ctx, x))
    } else {
        raw("null".into())
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct EvalJson {
    r: f64,
    k: Box<RawValue>,
    method: String,
    error_estimate: f64,
    digits: u32,
}

pub fn evaluation<A: Arithmetic>(ctx: &A, r: Modulus, e: &Evaluation<A::Real>, format: Format) -> String {
    let k = num(ctx, &e.value);
    match format {
        Format::Table => format!(
            "K({r}) = {k}\nmethod: {}\nerror estimate: {:e}\nprecision: {}\n",
            e.method,
            e.error_estimate,
            ctx.context()
        ),
        Format::Csv => format!("r,k,method,error_estimate\n{r},{k},{},{:e}\n", e.method, e.error_estimate),
        Format::Json => to_json(&EvalJson {
            r: r.value(),
            k: json_num(ctx, &e.value),
            method: e.method.to_string(),
            error_estimate: e.error_estimate,
            digits: ctx.digits(),
        }),
    }
}

fn row_values<A: Arithmetic>(ctx: &A, row: &ComparisonRow<A::Real>) -> [String; 7] {
    let b = &row.bounds;
    [
        num(ctx, &row.k_value),
        num(ctx, &b.new_lower.value),
        num(ctx, &b.new_upper.value),
        num(ctx, &b.ar_upper),
        num(ctx, &b.avv_upper),
        num(ctx, &b.wclc_lower),
        num(ctx, &b.wclc_upper),
    ]
}

#[derive(Serialize)]
struct RowJson {
    r: f64,
    k: Box<RawValue>,
    new_lower: Box<RawValue>,
    new_upper: Box<RawValue>,
    ar_upper: Box<RawValue>,
    avv_upper: Box<RawValue>,
    wclc_lower: Box<RawValue>,
    wclc_upper: Box<RawValue>,
    tightest_lower: BoundFamily,
    tightest_upper: BoundFamily,
    violations: Vec<BoundFamily>,
}

fn row_json<A: Arithmetic>(ctx: &A, row: &ComparisonRow<A::Real>) -> RowJson {
    let b = &row.bounds;
    let mut violations = row.violations.clone();
    if row.ar_not_dominated {
        violations.push(BoundFamily::ArUpper);
    }
    RowJson {
        r: row.r,
        k: json_num(ctx, &row.k_value),
        new_lower: json_num(ctx, &b.new_lower.value),
        new_upper: json_num(ctx, &b.new_upper.value),
        ar_upper: json_num(ctx, &b.ar_upper),
        avv_upper: json_num(ctx, &b.avv_upper),
        wclc_lower: json_num(ctx, &b.wclc_lower),
        wclc_upper: json_num(ctx, &b.wclc_upper),
        tightest_lower: row.tightest_lower,
        tightest_upper: row.tightest_upper,
        violations,
    }
}

fn violation_note<R>(row: &ComparisonRow<R>) -> String {
    let mut names: Vec<&str> = row.violations.iter().map(|f| f.as_str()).collect();
    if row.ar_not_dominated {
        names.push("NEW_UPPER not below AR_UPPER");
    }
    if names.is_empty() {
        "none".into()
    } else {
        names.join(", ")
    }
}

pub fn rows<A: Arithmetic>(ctx: &A, rows: &[ComparisonRow<A::Real>], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Csv => {
            out.push_str(CSV_HEADER);
            out.push('\n');
            for row in rows {
                let v = row_values(ctx, row);
                let _ = writeln!(out, "{},{},{},{}", row.r, v.join(","), row.tightest_lower, row.tightest_upper);
            }
        }
        Format::Json if rows.len() == 1 => out = to_json(&row_json(ctx, &rows[0])),
        Format::Json => out = to_json(&rows.iter().map(|r| row_json(ctx, r)).collect::<Vec<_>>()),
        Format::Table if rows.len() == 1 => {
            let row = &rows[0];
            let v = row_values(ctx, row);
            let labels = ["k", "new_lower", "new_upper", "ar_upper", "avv_upper", "wclc_lower", "wclc_upper"];
            let _ = writeln!(out, "{:<15}{}", "r", row.r);
            for (label, value) in labels.iter().zip(v.iter()) {
                let _ = writeln!(out, "{label:<15}{value}");
            }
            let _ = writeln!(out, "{:<15}{}", "tightest_lower", row.tightest_lower);
            let _ = writeln!(out, "{:<15}{}", "tightest_upper", row.tightest_upper);
            let _ = writeln!(out, "{:<15}{:?}", "upper branch", row.bounds.new_upper.active());
            let _ = writeln!(out, "{:<15}{:?}", "lower branch", row.bounds.new_lower.active());
            let _ = writeln!(out, "{:<15}{}", "violations", violation_note(row));
        }
        Format::Table => {
            let header: Vec<&str> = CSV_HEADER.split(',').collect();
            let mut table: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
            for row in rows {
                let mut cells = vec![row.r.to_string()];
                cells.extend(row_values(ctx, row));
                cells.push(row.tightest_lower.to_string());
                cells.push(row.tightest_upper.to_string());
                table.push(cells);
            }
            let widths: Vec<usize> = (0..header.len())
                .map(|j| table.iter().map(|r| r[j].len()).max().unwrap_or(0))
                .collect();
            for cells in &table {
                let line: Vec<String> = cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:<w$}"))
                    .collect();
                let _ = writeln!(out, "{}", line.join("  ").trim_end());
            }
        }
    }
    out
}

fn ranges(runs: &[(f64, f64)]) -> String {
    if runs.is_empty() {
        return "nowhere".into();
    }
    runs.iter()
        .map(|(a, b)| if a == b { format!("{a}") } else { format!("[{a}, {b}]") })
        .collect::<Vec<_>>()
        .join(", ")
}

fn pair_lines(out: &mut String, p: &PairSummary) {
    let _ = writeln!(out, "{} vs {}:", p.first, p.second);
    let _ = writeln!(out, "  {} tighter on {}", p.first, ranges(&p.first_tighter));
    let _ = writeln!(out, "  {} tighter on {}", p.second, ranges(&p.second_tighter));
    if p.ties > 0 {
        let _ = writeln!(out, "  equal at {} points", p.ties);
    }
}

pub fn summary_text<R>(cmp: &Comparison<R>) -> String {
    let mut out = String::from("\nsummary\n");
    for p in &cmp.pairs {
        pair_lines(&mut out, p);
    }
    let w = &cmp.witnesses;
    let witness = |x: Option<(f64, f64)>| match x {
        Some((r, gap)) => format!("r={r} (gap {gap:e})"),
        None => "none found".into(),
    };
    let _ = writeln!(out, "witness WCLC_UPPER tighter than NEW_UPPER: {}", witness(w.wclc_tighter));
    let _ = writeln!(out, "witness NEW_UPPER tighter than WCLC_UPPER: {}", witness(w.new_tighter));
    let _ = writeln!(out, "rows with violations: {}", cmp.violation_count());
    out
}

#[derive(Serialize)]
struct ComparisonJson<'a> {
    rows: Vec<RowJson>,
    pairs: &'a [PairSummary],
    witnesses: WitnessJson,
    violations: usize,
}

#[derive(Serialize)]
struct WitnessJson {
    wclc_upper_tighter: Option<Witness>,
    new_upper_tighter: Option<Witness>,
}

#[derive(Serialize)]
struct Witness {
    r: f64,
    gap: f64,
}

pub fn comparison_json<A: Arithmetic>(ctx: &A, cmp: &Comparison<A::Real>) -> String {
    let w = |x: Option<(f64, f64)>| x.map(|(r, gap)| Witness { r, gap });
    to_json(&ComparisonJson {
        rows: cmp.rows.iter().map(|r| row_json(ctx, r)).collect(),
        pairs: &cmp.pairs,
        witnesses: WitnessJson {
            wclc_upper_tighter: w(cmp.witnesses.wclc_tighter),
            new_upper_tighter: w(cmp.witnesses.new_tighter),
        },
        violations: cmp.violation_count(),
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn reports(reports: &[VerificationReport], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Json => out = to_json(&reports),
        Format::Csv => {
            out.push_str("claim_id,range,min_margin,passed,digits_used\n");
            for r in reports {
                let _ = writeln!(
                    out,
                    "{},{},{:e},{},{}",
                    r.claim_id,
                    csv_field(&r.range),
                    r.min_margin,
                    r.passed,
                    r.digits_used
                );
            }
        }
        Format::Table => {
            let width = reports.iter().map(|r| r.claim_id.len()).max().unwrap_or(0);
            for r in reports {
                let _ = writeln!(
                    out,
                    "{}  {:<width$}  min margin {:>10.3e}  digits {:>3}  {}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.claim_id,
                    r.min_margin,
                    r.digits_used,
                    r.range
                );
                if let Some(f) = &r.first_failure {
                    let _ = writeln!(out, "      first failure: {f}");
                }
            }
            let failed = reports.iter().filter(|r| !r.passed).count();
            let _ = writeln!(out, "{} claims, {} failed", reports.len(), failed);
        }
    }
    out
}
