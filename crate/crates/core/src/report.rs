//! CSV and JSON serialization of reports. CSV files start with `# key=value` lines echoing the
//! run parameters; JSON documents carry them under "parameters".

use std::io::Write;

use serde::Serialize;

use crate::criterion::{ScanRow, Theorem1Trace, Theorem2Trace};
use crate::error::Result;
use crate::functionals::FunctionalReport;
use crate::harness::{ConstantFit, InequalityCheck};

/// Ordered run parameters.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Parameters(pub Vec<(String, String)>);

impl Parameters {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.0.push((key.into(), value.to_string()));
        self
    }

    pub fn with(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.push(key, value);
        self
    }

    fn json(&self) -> serde_json::Value {
        serde_json::Value::Object(self.0.iter().map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone()))).collect())
    }
}

/// Rows as RFC 4180 CSV after the parameter echo.
pub fn write_csv<W: Write, S: Serialize>(mut w: W, params: &Parameters, rows: &[S]) -> Result<()> {
    for (k, v) in &params.0 {
        writeln!(w, "# {k}={}", v.replace('\n', " "))?;
    }
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

/// CSV with an explicit header; used when there may be no rows but the columns must still appear.
pub fn write_csv_with_header<W: Write, S: Serialize>(mut w: W, params: &Parameters, header: &[&str], rows: &[S]) -> Result<()> {
    for (k, v) in &params.0 {
        writeln!(w, "# {k}={}", v.replace('\n', " "))?;
    }
    let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wr.write_record(header)?;
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

/// `{"parameters": {...}, key: value}` pretty-printed with a trailing newline.
pub fn write_json<W: Write, S: Serialize>(mut w: W, params: &Parameters, key: &str, value: &S) -> Result<()> {
    let mut doc = serde_json::Map::new();
    doc.insert("parameters".into(), params.json());
    doc.insert(key.into(), serde_json::to_value(value)?);
    serde_json::to_writer_pretty(&mut w, &serde_json::Value::Object(doc))?;
    writeln!(w)?;
    Ok(())
}

pub const FUNCTIONAL_COLUMNS: [&str; 14] = ["x1", "x2", "x3", "t", "r", "q", "A", "C", "C_tilde", "D", "E_q", "G", "P", "F"];

#[derive(Serialize)]
struct FunctionalCsvRow {
    x1: f64,
    x2: f64,
    x3: f64,
    t: f64,
    r: f64,
    q: f64,
    #[serde(rename = "A")]
    a: f64,
    #[serde(rename = "C")]
    c: f64,
    #[serde(rename = "C_tilde")]
    c_tilde: f64,
    #[serde(rename = "D")]
    d: Option<f64>,
    #[serde(rename = "E_q")]
    e_q: f64,
    #[serde(rename = "G")]
    g: f64,
    #[serde(rename = "P")]
    p: Option<f64>,
    #[serde(rename = "F")]
    f: f64,
}

pub fn write_functionals_csv<W: Write>(w: W, params: &Parameters, reports: &[FunctionalReport]) -> Result<()> {
    let rows: Vec<FunctionalCsvRow> = reports
        .iter()
        .map(|r| FunctionalCsvRow {
            x1: r.x1,
            x2: r.x2,
            x3: r.x3,
            t: r.t,
            r: r.r,
            q: r.q,
            a: r.a,
            c: r.c,
            c_tilde: r.c_tilde,
            d: r.d,
            e_q: r.e_q,
            g: r.g,
            p: r.p,
            f: r.f,
        })
        .collect();
    write_csv_with_header(w, params, &FUNCTIONAL_COLUMNS, &rows)
}

pub const SCAN_COLUMNS: [&str; 11] =
    ["x1", "x2", "x3", "t", "criterion", "epsilon", "E_bar", "E_under", "product", "decision", "error"];

pub fn write_scan_csv<W: Write>(w: W, params: &Parameters, rows: &[ScanRow]) -> Result<()> {
    write_csv_with_header(w, params, &SCAN_COLUMNS, rows)
}

#[derive(Serialize)]
struct CurveRow {
    #[serde(rename = "M")]
    m: f64,
    epsilon_over_m: f64,
}

pub fn write_epsilon_curve_csv<W: Write>(w: W, params: &Parameters, curve: &[(f64, f64)]) -> Result<()> {
    let rows: Vec<CurveRow> = curve.iter().map(|&(m, e)| CurveRow { m, epsilon_over_m: e }).collect();
    write_csv_with_header(w, params, &["M", "epsilon_over_M"], &rows)
}

#[derive(Serialize)]
struct SequenceRow {
    k: usize,
    #[serde(rename = "Y")]
    y: f64,
    error: f64,
    residual: Option<f64>,
}

pub fn write_iteration_csv<W: Write>(w: W, params: &Parameters, trace: &crate::criterion::IterationTrace) -> Result<()> {
    let rows: Vec<SequenceRow> = trace
        .sequence
        .iter()
        .enumerate()
        .map(|(k, &y)| SequenceRow { k, y, error: trace.errors[k], residual: k.checked_sub(1).map(|i| trace.residuals[i]) })
        .collect();
    let mut p = params.clone();
    p.push("gamma", trace.gamma).push("limit", trace.limit).push("theta", trace.theta);
    write_csv_with_header(w, &p, &["k", "Y", "error", "residual"], &rows)
}

#[derive(Serialize)]
struct StepRow<'a> {
    label: &'a str,
    value: f64,
}

pub fn write_theorem1_csv<W: Write>(w: W, params: &Parameters, trace: &Theorem1Trace) -> Result<()> {
    let rows: Vec<StepRow> = trace.chain.iter().map(|s| StepRow { label: &s.label, value: s.value }).collect();
    let branch = match trace.branch {
        crate::criterion::trace::Theorem1Branch::Positive => "positive",
        crate::criterion::trace::Theorem1Branch::Trivial => "trivial",
    };
    write_csv_with_header(w, &params.clone().with("branch", branch), &["label", "value"], &rows)
}

pub fn write_theorem2_csv<W: Write>(w: W, params: &Parameters, trace: &Theorem2Trace) -> Result<()> {
    let mut rows: Vec<StepRow> = trace.monomials.iter().map(|s| StepRow { label: &s.label, value: s.value }).collect();
    rows.push(StepRow { label: "sum", value: trace.sum });
    rows.push(StepRow { label: "beta * sum", value: trace.bound });
    rows.push(StepRow { label: "envelope", value: trace.envelope });
    rows.push(StepRow { label: "epsilon^(1/2)", value: trace.sqrt_epsilon });
    let p = params.clone().with("dominant", &trace.dominant).with("each_below_sqrt_epsilon", trace.each_below_sqrt_epsilon);
    write_csv_with_header(w, &p, &["label", "value"], &rows)
}

#[derive(Serialize)]
struct FitRow {
    lemma: String,
    samples: usize,
    degenerate: usize,
    max_ratio: f64,
    p95_ratio: f64,
    resolutions: String,
    per_resolution_max: String,
    stability: Option<f64>,
    stable: bool,
    theta_slope: Option<f64>,
    theta_consistent: Option<bool>,
}

pub fn write_fits_csv<W: Write>(w: W, params: &Parameters, fits: &[ConstantFit]) -> Result<()> {
    let join = |f: &ConstantFit, g: fn(&crate::harness::suite::ResolutionFit) -> String| {
        f.per_resolution.iter().map(g).collect::<Vec<_>>().join(";")
    };
    let rows: Vec<FitRow> = fits
        .iter()
        .map(|f| FitRow {
            lemma: f.lemma.code().to_string(),
            samples: f.samples,
            degenerate: f.degenerate,
            max_ratio: f.max_ratio,
            p95_ratio: f.p95_ratio,
            resolutions: join(f, |p| p.n.to_string()),
            per_resolution_max: join(f, |p| format!("{:e}", p.max_ratio)),
            stability: f.stability,
            stable: f.stable,
            theta_slope: f.theta_slope,
            theta_consistent: f.theta_consistent,
        })
        .collect();
    write_csv(w, params, &rows)
}

#[derive(Serialize)]
struct CheckRow {
    lemma: String,
    x1: f64,
    x2: f64,
    x3: f64,
    t: f64,
    r: f64,
    theta: Option<f64>,
    q: Option<f64>,
    k: Option<f64>,
    lhs: f64,
    rhs: f64,
    ratio: Option<f64>,
    degenerate: bool,
    pass: Option<bool>,
}

pub fn write_checks_csv<W: Write>(w: W, params: &Parameters, checks: &[InequalityCheck]) -> Result<()> {
    let rows: Vec<CheckRow> = checks
        .iter()
        .map(|c| CheckRow {
            lemma: c.lemma.code().to_string(),
            x1: c.config.x[0],
            x2: c.config.x[1],
            x3: c.config.x[2],
            t: c.config.t,
            r: c.config.r,
            theta: c.config.theta,
            q: c.config.q,
            k: c.config.k,
            lhs: c.lhs,
            rhs: c.rhs,
            ratio: c.ratio,
            degenerate: c.degenerate,
            pass: c.pass,
        })
        .collect();
    write_csv_with_header(
        w,
        params,
        &["lemma", "x1", "x2", "x3", "t", "r", "theta", "q", "k", "lhs", "rhs", "ratio", "degenerate", "pass"],
        &rows,
    )
}
