//! Generalized power series in `μ` and the large-`|λ|` expansions of the resolvent traces.

use crate::error::{Error, Result};
use crate::extension::ExtensionParams;
use crate::specfun::{hankel_symbol, neg_i_sigma_half_pow};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Exponents closer than this are the same exponent.
pub const EXPONENT_TOL: f64 = 1e-12;
/// Largest order accepted by [`trace_d_coefficients`].
pub const MAX_TRACE_ORDER: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesTerm {
    pub exponent: f64,
    pub re: f64,
    pub im: f64,
}

impl SeriesTerm {
    pub fn coefficient(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// `Σ c_e μ^e + O(μ^{truncation_order})`, terms sorted by decreasing exponent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenPowerSeries {
    terms: Vec<SeriesTerm>,
    truncation_order: f64,
}

impl GenPowerSeries {
    /// Builds a series, merging equal exponents and dropping terms at or below the truncation.
    pub fn from_terms<I: IntoIterator<Item = (f64, Complex64)>>(terms: I, truncation_order: f64) -> GenPowerSeries {
        let mut v: Vec<(f64, Complex64)> = terms.into_iter().collect();
        v.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut out: Vec<SeriesTerm> = Vec::with_capacity(v.len());
        for (e, c) in v {
            if e <= truncation_order + EXPONENT_TOL {
                continue;
            }
            match out.last_mut() {
                Some(t) if (t.exponent - e).abs() <= EXPONENT_TOL => {
                    t.re += c.re;
                    t.im += c.im;
                }
                _ => out.push(SeriesTerm {
                    exponent: e,
                    re: c.re,
                    im: c.im,
                }),
            }
        }
        GenPowerSeries {
            terms: out,
            truncation_order,
        }
    }

    pub fn terms(&self) -> &[SeriesTerm] {
        &self.terms
    }

    pub fn truncation_order(&self) -> f64 {
        self.truncation_order
    }

    pub fn coefficient(&self, exponent: f64) -> Complex64 {
        self.terms
            .iter()
            .find(|t| (t.exponent - exponent).abs() <= EXPONENT_TOL)
            .map(|t| t.coefficient())
            .unwrap_or_default()
    }

    fn leading_exponent(&self) -> f64 {
        self.terms.first().map(|t| t.exponent).unwrap_or(f64::NEG_INFINITY)
    }

    pub fn add(&self, other: &GenPowerSeries) -> GenPowerSeries {
        let trunc = self.truncation_order.max(other.truncation_order);
        let it = self.terms.iter().chain(&other.terms).map(|t| (t.exponent, t.coefficient()));
        GenPowerSeries::from_terms(it, trunc)
    }

    pub fn scale(&self, c: Complex64) -> GenPowerSeries {
        let it = self.terms.iter().map(|t| (t.exponent, t.coefficient() * c));
        GenPowerSeries::from_terms(it, self.truncation_order)
    }

    pub fn sub(&self, other: &GenPowerSeries) -> GenPowerSeries {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &GenPowerSeries) -> GenPowerSeries {
        let trunc = (self.truncation_order + other.leading_exponent()).max(other.truncation_order + self.leading_exponent());
        let mut prods = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                prods.push((a.exponent + b.exponent, a.coefficient() * b.coefficient()));
            }
        }
        GenPowerSeries::from_terms(prods, trunc)
    }

    /// Reciprocal of a series whose leading term is a non-zero constant.
    pub fn recip_unit(&self) -> Result<GenPowerSeries> {
        let lead = self.terms.first().ok_or_else(|| Error::Domain("reciprocal of an empty series".into()))?;
        if lead.exponent.abs() > EXPONENT_TOL || lead.coefficient().norm() == 0.0 {
            return Err(Error::Domain("reciprocal needs a non-zero constant leading term".into()));
        }
        let c0 = lead.coefficient();
        let rest = GenPowerSeries::from_terms(self.terms[1..].iter().map(|t| (t.exponent, -t.coefficient() / c0)), self.truncation_order);
        let one = GenPowerSeries::from_terms([(0.0, Complex64::new(1.0, 0.0))], self.truncation_order);
        // 1/(1 - r) = 1 + r + r² + … until the powers fall below the truncation.
        let mut sum = one.clone();
        let mut pow = one;
        let step = rest.leading_exponent();
        if step.is_finite() {
            let n = ((self.truncation_order / step).ceil() as usize).min(10_000);
            for _ in 0..n {
                pow = pow.mul(&rest);
                if pow.terms.is_empty() {
                    break;
                }
                sum = sum.add(&pow);
            }
        }
        Ok(sum.scale(c0.inv()))
    }

    /// Sum of the retained terms at `μ` (principal powers).
    pub fn evaluate(&self, mu: Complex64) -> Complex64 {
        let l = mu.ln();
        self.terms.iter().map(|t| t.coefficient() * (l * t.exponent).exp()).sum()
    }

    /// Sum of the retained terms with exponent above `cut`.
    pub fn evaluate_above(&self, mu: Complex64, cut: f64) -> Complex64 {
        let l = mu.ln();
        self.terms
            .iter()
            .filter(|t| t.exponent > cut + EXPONENT_TOL)
            .map(|t| t.coefficient() * (l * t.exponent).exp())
            .sum()
    }
}

/// Coefficients of `Tr G ~ Σ_{k≥1} A_k μ^{-k}` on the half plane `σ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceAsymptotics {
    pub g: f64,
    pub sigma: i8,
    /// `a[k-1] = A_k`.
    pub a: Vec<Complex64>,
}

impl TraceAsymptotics {
    pub fn coefficient(&self, k: usize) -> Complex64 {
        self.a[k - 1]
    }

    pub fn series(&self) -> GenPowerSeries {
        let k = self.a.len();
        GenPowerSeries::from_terms(self.a.iter().enumerate().map(|(i, c)| (-(i as f64 + 1.0), *c)), -(k as f64 + 1.0))
    }

    pub fn evaluate(&self, mu: Complex64) -> Complex64 {
        let w = mu.inv();
        self.a.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| (acc + c) * w)
    }
}

fn check_sigma(sigma: i8) -> Result<()> {
    if sigma == 1 || sigma == -1 {
        Ok(())
    } else {
        Err(Error::Domain(format!("sigma must be +1 or -1, got {sigma}")))
    }
}

/// `T/(P - iσQ)` as a real power series in `w = -iσ/(2z)`: returns `r_0..r_n`.
fn log_derivative_ratio(nu: f64, n: usize) -> Vec<f64> {
    let p: Vec<f64> = (0..=n).map(|k| hankel_symbol(nu, k)).collect();
    let t: Vec<f64> = (0..=n)
        .map(|k| if k == 0 { 0.0 } else { (2 * k - 1) as f64 * hankel_symbol(nu, k - 1) })
        .collect();
    let mut r = vec![0.0; n + 1];
    for m in 1..=n {
        let s: f64 = (1..=m).map(|j| p[j] * r[m - j]).sum();
        r[m] = t[m] - s;
    }
    r
}

/// Expansion of `(2g-1)/(4μ²)·shift_sign - J'_ν/(2μJ_ν)` for an order `ν` and a `μ^{-2}` shift.
fn trace_coefficients_for(nu: f64, shift: f64, g: f64, sigma: i8, k_max: usize) -> Result<TraceAsymptotics> {
    check_sigma(sigma)?;
    if k_max > MAX_TRACE_ORDER {
        return Err(Error::Domain(format!("K = {k_max} exceeds {MAX_TRACE_ORDER}")));
    }
    let r = log_derivative_ratio(nu, k_max.max(1));
    let mut a = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let mut c = if k == 1 {
            Complex64::new(0.0, 0.5 * sigma as f64)
        } else {
            -neg_i_sigma_half_pow(k, sigma) * r[k - 1]
        };
        if k == 2 {
            c.re += shift;
        }
        a.push(c);
    }
    Ok(TraceAsymptotics { g, sigma, a })
}

/// `A_k(g, σ)`, `k = 1..K`, for the D-extension trace.
pub fn trace_d_coefficients(g: f64, sigma: i8, k_max: usize) -> Result<TraceAsymptotics> {
    trace_coefficients_for(g - 0.5, 0.25 * (2.0 * g - 1.0), g, sigma, k_max)
}

/// Expansion of the N-extension trace, built from the order `1/2 - g`.
pub fn trace_n_coefficients(g: f64, sigma: i8, k_max: usize) -> Result<TraceAsymptotics> {
    trace_coefficients_for(0.5 - g, -0.25 * (2.0 * g - 1.0), g, sigma, k_max)
}

fn check_general(ext: &ExtensionParams) -> Result<f64> {
    if ext.is_half() {
        return Err(Error::Domain("tau expansion needs 1/2 < g < 3/2".into()));
    }
    if ext.is_dirichlet() {
        return Err(Error::Domain("tau expansion needs alpha != 0".into()));
    }
    ext.rho()
}

/// `τ ~ Σ_{k=0}^{K} (e^{iσπ(g-1/2)} ρ)^k μ^{(1-2g)k}`.
pub fn tau_series(ext: &ExtensionParams, sigma: i8, k_max: usize) -> Result<GenPowerSeries> {
    check_sigma(sigma)?;
    let rho = check_general(ext)?;
    let nu = ext.nu();
    let one = Complex64::new(1.0, 0.0);
    if rho == 0.0 {
        return Ok(GenPowerSeries::from_terms([(0.0, one)], f64::NEG_INFINITY));
    }
    let q = Complex64::from_polar(rho, sigma as f64 * PI * nu);
    let mut c = one;
    let mut terms = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        terms.push((-2.0 * nu * k as f64, c));
        c *= q;
    }
    Ok(GenPowerSeries::from_terms(terms, -2.0 * nu * (k_max as f64 + 1.0)))
}

/// Expansion of `Tr G = Tr G_D - τ (Tr G_D - Tr G_N)` with `K` terms in each family.
pub fn general_trace_series(ext: &ExtensionParams, sigma: i8, k_max: usize) -> Result<GenPowerSeries> {
    check_sigma(sigma)?;
    if ext.is_dirichlet() || ext.is_half() {
        return Ok(trace_d_coefficients(ext.g, sigma, k_max)?.series());
    }
    let d = trace_d_coefficients(ext.g, sigma, k_max)?.series();
    let n = trace_n_coefficients(ext.g, sigma, k_max)?.series();
    let diff = GenPowerSeries::from_terms(
        d.sub(&n)
            .terms()
            .iter()
            .filter(|t| t.re != 0.0 || t.im != 0.0)
            .map(|t| (t.exponent, t.coefficient())),
        d.truncation_order(),
    );
    let tau = tau_series(ext, sigma, k_max)?;
    Ok(d.sub(&tau.mul(&diff)))
}
