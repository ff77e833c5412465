//! Self-checks with measured errors, used by `sspec verify` and the acceptance harness.

use crate::asympt::trace_d_coefficients;
use crate::error::{Error, Result};
use crate::extension::{rho_crit, ExtensionParams, SpectralPoint};
use crate::numeric::quad::{integrate, QuadOptions};
use crate::resolvent::{primitive_nu_minus_nu, primitive_nu_nu, trace_closed, trace_d, trace_from_table, trace_quadrature};
use crate::specfun::{jv, jv_and_prime_scaled, yv_and_prime_scaled};
use crate::spectrum::{bessel_zeros, eigenvalues};
use crate::zeta_heat::{
    anomalous_residue, heat_difference, heat_expansion, pole_table, residue_numeric, scaling_check, zeta_integral, zeta_sum_table, PoleKind,
    Precision, ResidueOptions, DEFAULT_SUBTRACT,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, PI};
use std::time::Instant;

/// Outcome of one check. Composite checks report `measured` as the worst ratio of error to
/// its own tolerance, with `tolerance = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: String,
    pub title: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub seconds: f64,
    pub time_limit: Option<f64>,
    pub detail: String,
}

pub const CRITERIA: usize = 9;

fn run(id: &str, title: &str, tolerance: f64, time_limit: Option<f64>, f: impl FnOnce() -> Result<(f64, String)>) -> CheckResult {
    let start = Instant::now();
    let outcome = f();
    let seconds = start.elapsed().as_secs_f64();
    let in_time = time_limit.is_none_or(|l| seconds <= l);
    let (measured, detail, ok) = match outcome {
        Ok((m, d)) => (m, d, m <= tolerance),
        Err(e) => (f64::NAN, format!("error: {e}"), false),
    };
    let detail = if in_time { detail } else { format!("{detail}; exceeded time limit") };
    CheckResult {
        id: id.into(),
        title: title.into(),
        measured,
        tolerance,
        passed: ok && in_time,
        seconds,
        time_limit,
        detail,
    }
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

/// Acceptance criterion `n` (1-based).
pub fn criterion(n: usize) -> CheckResult {
    match n {
        1 => regular_residue_check(),
        2 => anomalous_residue_check(),
        3 => half_null_check(),
        4 => heat_fit_check(),
        5 => triangulation_check(),
        6 => asymptotic_check(),
        7 => spectrum_structure_check(),
        8 => scaling_law_check(),
        9 => special_function_check(),
        _ => CheckResult {
            id: format!("criterion-{n}"),
            title: "unknown criterion".into(),
            measured: f64::NAN,
            tolerance: 0.0,
            passed: false,
            seconds: 0.0,
            time_limit: None,
            detail: format!("criteria are numbered 1..={CRITERIA}"),
        },
    }
}

pub fn all_criteria() -> Vec<CheckResult> {
    (1..=CRITERIA).map(criterion).collect()
}

fn regular_residue_check() -> CheckResult {
    run("criterion-1", "regular residue of the D-extension at s = 1/2", 1e-5, Some(180.0), || {
        let want = 0.5 / PI;
        let mut worst = 0.0f64;
        let mut detail = Vec::new();
        for g in [0.6, 0.75, 1.0] {
            let start = Instant::now();
            let r = residue_numeric(&ExtensionParams::dirichlet(g)?, 0.5, PoleKind::Regular, ResidueOptions::default())?;
            let secs = start.elapsed().as_secs_f64();
            if secs > 60.0 {
                return Err(Error::Domain(format!("g = {g} took {secs:.1} s")));
            }
            let err = (r.residue - want).abs();
            worst = worst.max(err);
            detail.push(format!("g={g}: {:.12} ({secs:.2} s)", r.residue));
        }
        Ok((worst, detail.join(", ")))
    })
}

fn anomalous_residue_check() -> CheckResult {
    run("criterion-2", "anomalous residues at g = 3/4, rho = -3", 0.01, Some(300.0), || {
        let ext = ExtensionParams::from_rho(0.75, -3.0)?;
        let mut worst = 0.0f64;
        let mut detail = Vec::new();
        for (k, s0, want) in [(1, -0.25, 3.0 * 2f64.sqrt() / (8.0 * PI)), (2, -0.5, -9.0 / (4.0 * PI))] {
            let r = residue_numeric(&ext, s0, PoleKind::Anomalous, ResidueOptions::default())?;
            let err = (r.residue / want - 1.0).abs();
            worst = worst.max(err);
            detail.push(format!("k={k}: {:.10} vs {:.10}", r.residue, want));
        }
        Ok((worst, detail.join(", ")))
    })
}

fn half_null_check() -> CheckResult {
    run("criterion-3", "no anomalous poles at g = 1/2", 1e-6, Some(300.0), || {
        let mut worst = 0.0f64;
        for theta in [-1.0, 0.0, 3.0] {
            let ext = ExtensionParams::from_theta(theta)?;
            for s0 in [-0.25, -0.5] {
                let r = residue_numeric(&ext, s0, PoleKind::Anomalous, ResidueOptions::default())?;
                worst = worst.max(r.residue.abs());
            }
        }
        Ok((worst, "theta in {-1, 0, 3}, s in {-1/4, -1/2}".into()))
    })
}

fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Result<Vec<f64>> {
    let a = DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
    let x = a
        .svd(true, true)
        .solve(&DVector::from_column_slice(y), 1e-15)
        .map_err(|e| Error::Domain(format!("least squares: {e}")))?;
    Ok(x.iter().copied().collect())
}

/// Fitted `(constant, t^{g-1/2} coefficient)` of the heat-trace difference over `[1e-3, 1e-2]`.
pub fn fit_heat_difference(ext: &ExtensionParams) -> Result<(f64, f64)> {
    let nu = ext.nu();
    let ts: Vec<f64> = (0..41).map(|i| 1e-3 * 10f64.powf(i as f64 / 40.0)).collect();
    let ys = ts.par_iter().map(|&t| heat_difference(ext, t)).collect::<Result<Vec<f64>>>()?;
    let ymax = 1e-2f64.powf(nu);
    let rows: Vec<Vec<f64>> = ts
        .iter()
        .map(|&t| {
            let y = t.powf(nu) / ymax;
            let mut r: Vec<f64> = (0..=6).map(|k| y.powi(k)).collect();
            r.push(t / 1e-2);
            r
        })
        .collect();
    let c = least_squares(&rows, &ys)?;
    Ok((c[0], c[1] / ymax))
}

fn heat_fit_check() -> CheckResult {
    run(
        "criterion-4",
        "heat-trace difference: constant and first coefficient",
        1.0,
        Some(600.0),
        || {
            let cases = [(0.6, 0.3), (0.6, -0.3), (0.75, -1.0), (0.75, 0.5), (1.1, 1.0), (1.1, -1.0)];
            let mut worst = 0.0f64;
            let mut detail = Vec::new();
            for (g, ba) in cases {
                let ext = ExtensionParams::new(g, 1.0, ba)?;
                let (c0, c1) = fit_heat_difference(&ext)?;
                let h = heat_expansion(&ext, 1)?;
                let want0 = h.constant;
                let want1 = h.terms[0].coefficient;
                let e0 = (c0 / want0 - 1.0).abs();
                let e1 = (c1 / want1 - 1.0).abs();
                worst = worst.max(e0 / 0.02).max(e1 / 0.05);
                detail.push(format!("g={g} b/a={ba}: const err {e0:.1e}, coeff err {e1:.1e}"));
            }
            Ok((worst, detail.join("; ")))
        },
    )
}

/// The twelve `(g, extension)` pairs of the trace cross-check.
pub fn triangulation_cases() -> Result<Vec<ExtensionParams>> {
    let mut v = Vec::new();
    for (g, ba) in [(0.6, -1.5), (0.75, 2.0), (1.0, 0.7), (1.4, -0.4)] {
        v.push(ExtensionParams::dirichlet(g)?);
        v.push(ExtensionParams::neumann(g)?);
        v.push(ExtensionParams::new(g, 1.0, ba)?);
    }
    Ok(v)
}

fn triangulation_check() -> CheckResult {
    run(
        "criterion-5",
        "closed-form, quadrature and spectral-sum traces agree",
        1e-8,
        Some(120.0),
        || {
            let cases = triangulation_cases()?;
            let errs = cases
                .par_iter()
                .map(|ext| -> Result<f64> {
                    let table = eigenvalues(ext, 2000)?;
                    let mut worst = 0.0f64;
                    for l in [-1.0, -10.0, -100.0] {
                        let p = SpectralPoint::negative(l)?;
                        let a = trace_closed(ext, &p)?.trace;
                        let b = trace_quadrature(ext, &p)?.trace;
                        let s = trace_from_table(&table, &p)?.trace;
                        worst = worst.max(rel(b, a)).max(rel(s, a)).max(rel(s, b));
                    }
                    Ok(worst)
                })
                .collect::<Result<Vec<f64>>>()?;
            let worst = errs.iter().fold(0.0f64, |m, &e| m.max(e));
            Ok((worst, format!("{} pairs x 3 probes", cases.len())))
        },
    )
}

fn asymptotic_check() -> CheckResult {
    run(
        "criterion-6",
        "trace coefficients A_1..A_4 and the K = 4 remainder slope",
        1.0,
        None,
        || {
            let mut coeff_err = 0.0f64;
            for g in [0.5, 0.55, 0.6, 0.75, 1.0, 1.25, 1.4] {
                for sigma in [1i8, -1] {
                    let a = trace_d_coefficients(g, sigma, 4)?;
                    let sg = sigma as f64;
                    let want = [
                        Complex64::new(0.0, 0.5 * sg),
                        Complex64::new(0.5 * g, 0.0),
                        Complex64::new(0.0, -sg * g * (g - 1.0) / 4.0),
                        Complex64::new(g * (g - 1.0) / 4.0, 0.0),
                    ];
                    for (k, w) in want.iter().enumerate() {
                        let e = (a.coefficient(k + 1) - w).norm() / (f64::EPSILON * w.norm().max(1.0));
                        coeff_err = coeff_err.max(e);
                    }
                }
            }
            let mut half_err = 0.0f64;
            for sigma in [1i8, -1] {
                let sg = sigma as f64;
                let a = trace_d_coefficients(0.5, sigma, 4)?;
                let want = [
                    Complex64::new(0.0, 0.5 * sg),
                    Complex64::new(0.25, 0.0),
                    Complex64::new(0.0, sg / 16.0),
                    Complex64::new(-1.0 / 16.0, 0.0),
                ];
                for (k, w) in want.iter().enumerate() {
                    half_err = half_err.max((a.coefficient(k + 1) - w).norm() / f64::EPSILON);
                }
            }
            let mut slope_err = 0.0f64;
            let mut slopes = Vec::new();
            for g in [0.6, 0.75, 1.2, 1.4] {
                let a = trace_d_coefficients(g, 1, 4)?;
                let us: Vec<f64> = (0..=20).map(|i| 10.0 * 10f64.powf(i as f64 / 20.0)).collect();
                let pts: Vec<(f64, f64)> = us
                    .iter()
                    .map(|&u| {
                        let mu = Complex64::from_polar(u, FRAC_PI_4);
                        (u.ln(), (trace_d(g, mu) - a.evaluate(mu)).norm().ln())
                    })
                    .collect();
                let m = slope(&pts);
                slopes.push(format!("g={g}: {m:.3}"));
                slope_err = slope_err.max((m + 5.0).abs() / 0.2);
            }
            // Coefficients are computed in floating point; "exact" means within 4 ulp of the closed forms.
            let worst = (coeff_err / 4.0).max(half_err / 4.0).max(slope_err);
            Ok((
                worst,
                format!(
                    "max coefficient error {coeff_err:.1} ulp, g=1/2 listing {half_err:.1} ulp, slopes {}",
                    slopes.join(", ")
                ),
            ))
        },
    )
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn spectrum_structure_check() -> CheckResult {
    run("criterion-7", "interlacing, zero mode and negative eigenvalue", 0.0, None, || {
        let mut violations = 0usize;
        let mut detail = Vec::new();
        let mut exts = Vec::new();
        for g in [0.6, 0.75, 1.0, 1.4] {
            for ba in [-3.0, -0.4, 0.0, 0.5, 1.0, 1.2, 5.0] {
                exts.push(ExtensionParams::new(g, 1.0, ba)?);
            }
        }
        let mut checked = 0usize;
        for ext in &exts {
            let t = eigenvalues(ext, 500)?;
            let zs = bessel_zeros(ext.nu(), 501)?;
            let shift = usize::from(t.entries[0].mu > zs[0]);
            for (i, e) in t.entries.iter().enumerate() {
                let lo = if i + shift == 0 { 0.0 } else { zs[i + shift - 1] };
                let hi = zs[i + shift];
                checked += 1;
                if !(e.mu > lo && e.mu < hi) {
                    violations += 1;
                }
            }
            let zero_expected = (ext.alpha - ext.beta).abs() < 1e-15;
            if t.zero_mode != zero_expected {
                violations += 1;
                detail.push(format!("zero mode mismatch at {ext:?}"));
            }
        }
        // Near α = β, but not on it.
        for d in [1e-6, -1e-6] {
            let e = ExtensionParams::new(0.75, 1.0, 1.0 + d)?;
            if eigenvalues(&e, 30)?.zero_mode {
                violations += 1;
                detail.push(format!("spurious zero mode at beta/alpha = 1{d:+e}"));
            }
        }
        let mut previous = f64::INFINITY;
        for ba in [0.5, 1.2, 5.0] {
            let t = eigenvalues(&ExtensionParams::new(0.75, 1.0, ba)?, 30)?;
            match (ba > 1.0, t.negative) {
                (true, Some(l)) => {
                    if l >= previous {
                        violations += 1;
                        detail.push("lambda_- not decreasing".into());
                    }
                    previous = l;
                    detail.push(format!("beta/alpha={ba}: lambda_-={l:.10}"));
                }
                (false, None) => detail.push(format!("beta/alpha={ba}: no negative eigenvalue")),
                _ => {
                    violations += 1;
                    detail.push(format!("negative eigenvalue mismatch at beta/alpha={ba}"));
                }
            }
        }
        detail.insert(0, format!("{checked} eigenvalues interlaced"));
        Ok((violations as f64, detail.join("; ")))
    })
}

fn scaling_law_check() -> CheckResult {
    run("criterion-8", "scaling covariance of rho, residues and zeta", 1.0, None, || {
        let mut formula = 0.0f64;
        let mut numeric = 0.0f64;
        for ext in [
            ExtensionParams::from_rho(0.75, -3.0)?,
            ExtensionParams::from_rho(0.75, 2.0)?,
            ExtensionParams::new(1.2, 1.0, 0.4)?,
            ExtensionParams::neumann(0.9)?,
        ] {
            for c in [0.5, 2.0] {
                let r = scaling_check(&ext, c, 5, true)?;
                formula = formula.max(r.rho_residual);
                for x in &r.residues {
                    formula = formula.max(x.residual);
                }
                if let Some(z) = r.zeta {
                    numeric = numeric.max(z.relative_error);
                }
            }
        }
        Ok((
            (formula / 1e-12).max(numeric / 1e-7),
            format!("formula residual {formula:.1e} (tol 1e-12), zeta' check {numeric:.1e} (tol 1e-7)"),
        ))
    })
}

fn special_function_check() -> CheckResult {
    run("criterion-9", "Wronskian identity and Bessel primitives", 1.0, None, || {
        let mut wr = 0.0f64;
        for nu in [0.0, 0.1, -0.1, 0.25, -0.25, 0.45, -0.45, 0.9, -0.9, 1.0, 1.4, -1.4] {
            for i in 0..100 {
                let x = 0.05 * (2000f64).powf(i as f64 / 99.0);
                let z = Complex64::new(x, 0.0);
                let (j, jp) = jv_and_prime_scaled(nu, z);
                let (y, yp) = yv_and_prime_scaled(nu, z);
                let w = (j * yp - jp * y).re;
                let want = 2.0 / (PI * x);
                wr = wr.max((w - want).abs() / want);
            }
        }
        let opts = QuadOptions {
            abs_tol: 1e-16,
            rel_tol: 1e-13,
            max_intervals: 4000,
        };
        let pairs = [
            (0.1, Complex64::new(3.0, 0.0)),
            (0.25, Complex64::new(2.0, 0.0)),
            (0.45, Complex64::new(0.0, 4.0)),
            (0.7, Complex64::from_polar(6.0, FRAC_PI_4)),
            (0.9, Complex64::new(7.5, 0.0)),
        ];
        let mut prim = 0.0f64;
        for (nu, mu) in pairs {
            let x = 0.8;
            let q1 = integrate(|t| jv(nu, mu * t).powi(2) * t, 0.0, x, opts).value;
            let q2 = integrate(|t| jv(nu, mu * t) * jv(-nu, mu * t) * t, 0.0, x, opts).value;
            prim = prim
                .max(rel(primitive_nu_nu(nu, mu, x), q1))
                .max(rel(primitive_nu_minus_nu(nu, mu, x), q2));
        }
        Ok((
            (wr / 1e-10).max(prim / 1e-10),
            format!("Wronskian {wr:.1e} over 12 orders x 100 points; primitives {prim:.1e} at 5 (nu, mu) pairs"),
        ))
    })
}

/// Short invariant suites, one per computational module.
pub fn module_suites() -> Vec<CheckResult> {
    vec![
        run("specfun", "J recurrence for orders used", 1e-12, None, || {
            let mut worst = 0.0f64;
            for g in [0.55, 0.75, 1.0, 1.45] {
                let nu = g - 0.5;
                for ord in [nu, -nu, nu + 1.0, 1.0 - nu] {
                    for z in [
                        Complex64::new(0.3, 0.0),
                        Complex64::new(17.0, 0.0),
                        Complex64::new(0.0, 5.0),
                        Complex64::from_polar(30.0, FRAC_PI_4),
                    ] {
                        let lhs = jv(ord - 1.0, z) + jv(ord + 1.0, z);
                        let rhs = jv(ord, z) * (2.0 * ord) / z;
                        let scale = jv(ord - 1.0, z).norm() + jv(ord + 1.0, z).norm();
                        worst = worst.max((lhs - rhs).norm() / scale);
                    }
                }
            }
            Ok((worst, "J_{v-1} + J_{v+1} = (2v/z) J_v".into()))
        }),
        run("extension", "alpha = beta gives rho = rho_crit", 1e-14, None, || {
            let mut worst = 0.0f64;
            for g in [0.6, 0.75, 1.0, 1.3] {
                let r = ExtensionParams::new(g, 1.0, 1.0)?.rho()?;
                worst = worst.max((r / rho_crit(g) - 1.0).abs());
            }
            Ok((worst, "g in {0.6, 0.75, 1, 1.3}".into()))
        }),
        run("spectrum", "zeta(1) from eigenvalues equals Tr G(0)", 1e-9, None, || {
            let ext = ExtensionParams::from_rho(0.75, -3.0)?;
            let z = zeta_sum_table(&eigenvalues(&ext, 2000)?, Complex64::new(1.0, 0.0), Precision::Double)?.value;
            let t = trace_closed(&ext, &SpectralPoint::from_lambda_with_sigma(Complex64::new(0.0, 0.0), 1)?)?.trace;
            Ok((rel(z, t), format!("{} vs {}", z.re, t.re)))
        }),
        run("resolvent", "closed form vs quadrature at lambda = -10", 1e-8, None, || {
            let ext = ExtensionParams::new(0.8, 1.0, -0.6)?;
            let p = SpectralPoint::negative(-10.0)?;
            Ok((
                rel(trace_quadrature(&ext, &p)?.trace, trace_closed(&ext, &p)?.trace),
                "g=0.8, beta/alpha=-0.6".into(),
            ))
        }),
        run("asympt", "A_1 = i/2 and A_2 = g/2", 4.0 * f64::EPSILON, None, || {
            let a = trace_d_coefficients(0.8, 1, 2)?;
            let e = (a.coefficient(1) - Complex64::new(0.0, 0.5))
                .norm()
                .max((a.coefficient(2) - Complex64::new(0.4, 0.0)).norm());
            Ok((e, "g=0.8".into()))
        }),
        run("zeta_heat", "integral and spectral routes agree; formula residues", 1e-7, None, || {
            let ext = ExtensionParams::from_rho(0.75, -3.0)?;
            let a = zeta_sum_table(&eigenvalues(&ext, 4000)?, Complex64::new(0.75, 0.0), Precision::Double)?.value;
            let b = zeta_integral(&ext, 0.75, DEFAULT_SUBTRACT)?.value;
            let p = pole_table(&ext, 1)?;
            let r = p.iter().find(|p| p.kind == PoleKind::Anomalous).map(|p| p.residue).unwrap_or(f64::NAN);
            let dr = (r - anomalous_residue(0.75, -3.0, 1)).abs();
            let h = heat_expansion(&ext, 1)?;
            Ok((
                (a - b).norm().max(dr).max((h.constant - 0.25).abs()),
                format!("zeta(0.75): {} vs {}", a.re, b.re),
            ))
        }),
    ]
}
