use crate::config::{Command, Output, RunConfig};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use sspec_core::asympt::general_trace_series;
use sspec_core::error::{Error, Result};
use sspec_core::extension::{ExtensionParams, SpectralPoint};
use sspec_core::resolvent::{trace_closed, trace_spectral_sum};
use sspec_core::spectrum::{eigenvalues, MIN_EXPLICIT};
use sspec_core::verify::{all_criteria, module_suites, CheckResult};
use sspec_core::zeta_heat::{
    heat_count, heat_difference, heat_expansion, heat_trace_table, pole_table, zeta_integral_with, zeta_sum_table, Precision, DEFAULT_SUBTRACT,
    EIGENVALUE_BUDGET,
};

/// Rendered output plus whether every check passed (always true outside `verify`).
pub struct Rendered {
    pub text: String,
    pub passed: bool,
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:.16e}")
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn budget(n: usize) -> Result<()> {
    if n > EIGENVALUE_BUDGET {
        return Err(Error::Budget {
            required: n,
            budget: EIGENVALUE_BUDGET,
        });
    }
    Ok(())
}

pub fn run(cfg: &RunConfig) -> Result<Rendered> {
    let cmd = cfg.validate()?;
    let (value, table, passed) = match cmd {
        Command::Verify => verify(),
        _ => {
            let ext = cfg.extension()?;
            let (v, t) = match cmd {
                Command::Spectrum => spectrum(cfg, &ext)?,
                Command::Trace => trace(cfg, &ext)?,
                Command::Zeta => zeta(cfg, &ext)?,
                Command::Poles => poles(cfg, &ext)?,
                Command::Heat => heat(cfg, &ext)?,
                Command::Asympt => asympt(cfg, &ext)?,
                Command::Verify => unreachable!(),
            };
            (v, t, true)
        }
    };
    let text = match cfg.output {
        Output::Json => {
            let mut s = serde_json::to_string_pretty(&json!({ "config": cfg, "result": value })).expect("json");
            s.push('\n');
            s
        }
        Output::Csv => csv_text(&table),
    };
    Ok(Rendered { text, passed })
}

fn csv_text(t: &Table) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(&t.header).expect("csv");
    for r in &t.rows {
        w.write_record(r).expect("csv");
    }
    String::from_utf8(w.into_inner().expect("csv")).expect("utf8")
}

fn spectrum(cfg: &RunConfig, ext: &ExtensionParams) -> Result<(Value, Table)> {
    let n = cfg.n.unwrap_or(10);
    budget(n)?;
    let table = eigenvalues(ext, n)?;
    let mut rows = Vec::new();
    // Index 0 is the state below the Bessel-type roots: λ₋ or the zero mode.
    if let Some(l) = table.negative {
        rows.push(vec!["0".into(), num(l)]);
    }
    if table.zero_mode {
        rows.push(vec!["0".into(), num(0.0)]);
    }
    for e in &table.entries {
        rows.push(vec![e.index.to_string(), num(e.lambda)]);
    }
    let eig: Vec<Value> = table
        .entries
        .iter()
        .map(|e| json!({ "n": e.index, "lambda": e.lambda, "mu": e.mu }))
        .collect();
    let v = json!({ "negative": table.negative, "zero_mode": table.zero_mode, "eigenvalues": eig });
    Ok((
        v,
        Table {
            header: vec!["n", "lambda"],
            rows,
        },
    ))
}

fn trace(cfg: &RunConfig, ext: &ExtensionParams) -> Result<(Value, Table)> {
    let lambda = Complex64::new(cfg.lambda.unwrap_or_default(), cfg.lambda_im.unwrap_or(0.0));
    let p = if lambda.im == 0.0 && lambda.re >= 0.0 {
        let sigma = cfg
            .sigma
            .ok_or_else(|| Error::MalformedInput("real non-negative lambda needs --sigma".into()))?;
        SpectralPoint::from_lambda_with_sigma(lambda, sigma)?
    } else {
        SpectralPoint::from_lambda(lambda)?
    };
    let closed = trace_closed(ext, &p)?;
    let sum = match cfg.n_explicit {
        Some(n) => {
            budget(n)?;
            Some(trace_spectral_sum(ext, &p, n)?)
        }
        None => None,
    };
    let mut row = vec![
        num(p.lambda.re),
        num(p.lambda.im),
        p.sigma.to_string(),
        num(closed.trace.re),
        num(closed.trace.im),
    ];
    let mut header = vec!["lambda_re", "lambda_im", "sigma", "trace_re", "trace_im"];
    if let Some(s) = &sum {
        header.extend(["sum_re", "sum_im"]);
        row.extend([num(s.trace.re), num(s.trace.im)]);
    }
    Ok((
        json!({ "closed_form": to_value(&closed), "spectral_sum": sum.map(|s| to_value(&s)) }),
        Table { header, rows: vec![row] },
    ))
}

fn zeta(cfg: &RunConfig, ext: &ExtensionParams) -> Result<(Value, Table)> {
    let ss = cfg.s_grid()?;
    let precision = Precision::from(cfg.precision);
    let table = match cfg.n_explicit {
        Some(n) => {
            budget(n)?;
            Some(eigenvalues(ext, n.max(MIN_EXPLICIT))?)
        }
        None => None,
    };
    let vals = ss
        .par_iter()
        .map(|&s| match &table {
            Some(t) => zeta_sum_table(t, Complex64::new(s, 0.0), precision),
            None => zeta_integral_with(ext, s, DEFAULT_SUBTRACT, precision),
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = vals
        .iter()
        .map(|z| {
            vec![
                num(z.s.re),
                num(z.value.re),
                num(z.value.im),
                to_value(&z.method).as_str().unwrap_or_default().to_string(),
            ]
        })
        .collect();
    Ok((
        to_value(&vals),
        Table {
            header: vec!["s", "zeta_re", "zeta_im", "method"],
            rows,
        },
    ))
}

fn poles(cfg: &RunConfig, ext: &ExtensionParams) -> Result<(Value, Table)> {
    let p = pole_table(ext, cfg.k.unwrap_or(4))?;
    let rows = p
        .iter()
        .map(|r| {
            vec![
                num(r.s0),
                num(r.residue),
                to_value(&r.kind).as_str().unwrap_or_default().to_string(),
                r.k.to_string(),
                to_value(&r.method).as_str().unwrap_or_default().to_string(),
            ]
        })
        .collect();
    Ok((
        to_value(&p),
        Table {
            header: vec!["s0", "residue", "kind", "k", "method"],
            rows,
        },
    ))
}

fn heat(cfg: &RunConfig, ext: &ExtensionParams) -> Result<(Value, Table)> {
    let ts = cfg.t_grid()?;
    let precision = Precision::from(cfg.precision);
    let points = ts
        .par_iter()
        .map(|&t| -> Result<(f64, f64, f64)> {
            let n = cfg.n_explicit.unwrap_or_else(|| heat_count(t));
            budget(n)?;
            let tr = heat_trace_table(&eigenvalues(ext, n.max(MIN_EXPLICIT))?, t, precision)?;
            Ok((t, tr, heat_difference(ext, t)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let expansion = match cfg.k {
        Some(k) => Some(heat_expansion(ext, k)?),
        None => None,
    };
    let traces: Vec<Value> = points.iter().map(|&(t, tr, d)| json!({ "t": t, "trace": tr, "difference": d })).collect();
    let rows = points.iter().map(|&(t, tr, d)| vec![num(t), num(tr), num(d)]).collect();
    Ok((
        json!({ "traces": traces, "expansion": expansion }),
        Table {
            header: vec!["t", "trace", "difference"],
            rows,
        },
    ))
}

fn asympt(cfg: &RunConfig, ext: &ExtensionParams) -> Result<(Value, Table)> {
    let series = general_trace_series(ext, cfg.sigma.unwrap_or(1), cfg.k.unwrap_or(4))?;
    let rows = series.terms().iter().map(|t| vec![num(t.exponent), num(t.re), num(t.im)]).collect();
    let v = json!({ "terms": to_value(&series.terms()), "truncation_order": series.truncation_order() });
    Ok((
        v,
        Table {
            header: vec!["exponent", "re", "im"],
            rows,
        },
    ))
}

#[derive(Serialize)]
struct CheckLine<'a> {
    id: &'a str,
    title: &'a str,
    passed: bool,
    measured: f64,
    tolerance: f64,
    time_limit: Option<f64>,
    detail: &'a str,
}

fn verify() -> (Value, Table, bool) {
    let mut checks: Vec<CheckResult> = Vec::new();
    for r in module_suites().into_iter().chain(all_criteria()) {
        eprintln!(
            "{} {}: measured {:.3e}, tolerance {:.1e}, {:.2} s",
            if r.passed { "PASS" } else { "FAIL" },
            r.id,
            r.measured,
            r.tolerance,
            r.seconds
        );
        checks.push(r);
    }
    let passed = checks.iter().all(|c| c.passed);
    let lines: Vec<CheckLine> = checks
        .iter()
        .map(|c| CheckLine {
            id: &c.id,
            title: &c.title,
            passed: c.passed,
            measured: c.measured,
            tolerance: c.tolerance,
            time_limit: c.time_limit,
            detail: &c.detail,
        })
        .collect();
    let rows = checks
        .iter()
        .map(|c| vec![c.id.clone(), c.passed.to_string(), num(c.measured), num(c.tolerance), c.title.clone()])
        .collect();
    let v = json!({ "passed": passed, "checks": lines });
    (
        v,
        Table {
            header: vec!["id", "passed", "measured", "tolerance", "title"],
            rows,
        },
        passed,
    )
}
