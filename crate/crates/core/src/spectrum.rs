//! Eigenvalues of every extension: Bessel zeros, roots of `F(μ) = ρ`, the negative
//! eigenvalue, the zero mode and the logarithmic case `g = 1/2`; plus a phase-function
//! model of the high eigenvalues used for tail sums.

use crate::error::{Error, Result};
use crate::extension::{rho_crit, ExtensionParams};
use crate::numeric::quad::{integrate, QuadOptions};
use crate::numeric::roots::brent;
use crate::numeric::EULER_GAMMA;
use crate::specfun::{iv_scaled, jv, kv_scaled, reduced_j, yv, SWITCH_RADIUS};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, LN_2, PI};

const SCAN_LIMIT: f64 = 30.0;
const MAX_ITER: usize = 100;
/// Fewest explicit eigenvalues accepted by [`TailModel`].
pub const MIN_EXPLICIT: usize = 20;

fn c64(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn jv_real(nu: f64, x: f64) -> f64 {
    jv(nu, c64(x)).re
}

/// Sign-faithful `J_ν(x)` for `x > 0` without underflow near 0.
fn j_sign_value(nu: f64, x: f64) -> f64 {
    if x < SWITCH_RADIUS {
        reduced_j(nu, c64(x)).re
    } else {
        jv_real(nu, x)
    }
}

fn mcmahon(nu: f64, n: i64) -> f64 {
    let m = 4.0 * nu * nu;
    let b = (n as f64 + 0.5 * nu - 0.25) * PI;
    let e = 8.0 * b;
    b - (m - 1.0) / e
        - 4.0 * (m - 1.0) * (7.0 * m - 31.0) / (3.0 * e.powi(3))
        - 32.0 * (m - 1.0) * (83.0 * m * m - 982.0 * m + 3779.0) / (15.0 * e.powi(5))
}

fn refine_zero(nu: f64, lo: f64, hi: f64) -> Result<(f64, [f64; 2])> {
    brent(|x| j_sign_value(nu, x), lo, hi, 0.0, 200)
        .map(|r| (r.x, [lo, hi]))
        .map_err(|e| Error::Convergence {
            what: format!("zero of J_{nu}"),
            lo: e.bracket[0],
            hi: e.bracket[1],
        })
}

fn check_zero_order(nu: f64) -> Result<()> {
    if nu.is_finite() && nu.abs() <= 1.5 {
        Ok(())
    } else {
        Err(Error::Domain(format!("zeros are supported for |nu| <= 3/2, got {nu}")))
    }
}

/// The first `count` positive zeros of `J_ν` with their refinement brackets.
pub fn bessel_zeros_with_brackets(nu: f64, count: usize) -> Result<Vec<(f64, [f64; 2])>> {
    check_zero_order(nu)?;
    let mut out = Vec::with_capacity(count);
    let mut x = 1e-4;
    let mut fx = j_sign_value(nu, x);
    while x < SCAN_LIMIT && out.len() < count {
        let nx = (x + (0.25 * x).min(0.05)).min(SCAN_LIMIT);
        let fn_ = j_sign_value(nu, nx);
        if fx == 0.0 {
            out.push((x, [x, x]));
        } else if fx.signum() != fn_.signum() && fn_ != 0.0 {
            out.push(refine_zero(nu, x, nx)?);
        }
        x = nx;
        fx = fn_;
    }
    if out.len() >= count {
        out.truncate(count);
        return Ok(out);
    }
    let n0 = out.len() as i64;
    let last = out.last().map(|z| z.0).unwrap_or(0.0);
    // McMahon index matching the last scanned zero.
    let guess = (last / PI - 0.5 * nu + 0.25).round() as i64;
    let k0 = (guess - 1..=guess + 1)
        .min_by(|a, b| (mcmahon(nu, *a) - last).abs().total_cmp(&(mcmahon(nu, *b) - last).abs()))
        .unwrap();
    let offset = if n0 == 0 { 0 } else { n0 - k0 };
    let rest: Result<Vec<(f64, [f64; 2])>> = ((n0 + 1)..=(count as i64))
        .into_par_iter()
        .map(|n| {
            let g = mcmahon(nu, n - offset);
            refine_zero(nu, g - 0.3, g + 0.3)
        })
        .collect();
    out.extend(rest?);
    for w in out.windows(2) {
        if !(w[1].0 > w[0].0 + 1.0) {
            return Err(Error::Convergence {
                what: format!("zero sequence of J_{nu}"),
                lo: w[0].0,
                hi: w[1].0,
            });
        }
    }
    Ok(out)
}

pub fn bessel_zeros(nu: f64, count: usize) -> Result<Vec<f64>> {
    Ok(bessel_zeros_with_brackets(nu, count)?.into_iter().map(|z| z.0).collect())
}

/// `j_{ν,n}`, the n-th positive zero of `J_ν`.
pub fn bessel_zero(nu: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("zero index starts at 1".into()));
    }
    Ok(*bessel_zeros(nu, n)?.last().unwrap())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenEntry {
    pub index: usize,
    pub lambda: f64,
    pub mu: f64,
    /// `μ` interval the root was isolated in.
    pub bracket: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueTable {
    pub g: f64,
    pub ext: ExtensionParams,
    pub entries: Vec<EigenEntry>,
    pub negative: Option<f64>,
    pub zero_mode: bool,
    pub interval_length: f64,
}

impl EigenvalueTable {
    pub fn lambdas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.lambda).collect()
    }

    pub fn mus(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.mu).collect()
    }
}

fn validate_count(count: usize) -> Result<()> {
    if count == 0 {
        Err(Error::Domain("count must be at least 1".into()))
    } else {
        Ok(())
    }
}

fn zero_table(ext: ExtensionParams, nu: f64, count: usize, length: f64) -> Result<EigenvalueTable> {
    validate_count(count)?;
    let zs = bessel_zeros_with_brackets(nu, count)?;
    let entries = zs
        .iter()
        .enumerate()
        .map(|(i, (z, b))| {
            let mu = z / length;
            EigenEntry {
                index: i + 1,
                lambda: mu * mu,
                mu,
                bracket: [b[0] / length, b[1] / length],
            }
        })
        .collect();
    Ok(EigenvalueTable {
        g: ext.g,
        ext,
        entries,
        negative: None,
        zero_mode: false,
        interval_length: length,
    })
}

/// D-extension: `λ_n = j_{g-1/2,n}²`.
pub fn eigenvalues_d(g: f64, count: usize) -> Result<EigenvalueTable> {
    let ext = ExtensionParams::dirichlet(g)?;
    zero_table(ext, g - 0.5, count, 1.0)
}

/// N-extension: `λ_n = j_{1/2-g,n}²`.
pub fn eigenvalues_n(g: f64, count: usize) -> Result<EigenvalueTable> {
    if g == 0.5 {
        return Err(Error::Domain("at g = 1/2 use eigenvalues_half".into()));
    }
    let ext = ExtensionParams::neumann(g)?;
    zero_table(ext, 0.5 - g, count, 1.0)
}

/// `F(μ) = μ^{2g-1} J_{1/2-g}(μ) / J_{g-1/2}(μ)`; `F(0) = ρ_crit`.
pub fn spectral_function(g: f64, mu: f64) -> f64 {
    let nu = g - 0.5;
    if mu < SWITCH_RADIUS {
        2f64.powf(2.0 * nu) * reduced_j(-nu, c64(mu)).re / reduced_j(nu, c64(mu)).re
    } else {
        mu.powf(2.0 * nu) * jv_real(-nu, mu) / jv_real(nu, mu)
    }
}

/// `F(iκ) = κ^{2g-1} I_{1/2-g}(κ) / I_{g-1/2}(κ)`, increasing from `ρ_crit`.
pub fn spectral_function_imag(g: f64, kappa: f64) -> f64 {
    let nu = g - 0.5;
    let z = Complex64::new(0.0, kappa);
    if kappa < SWITCH_RADIUS {
        2f64.powf(2.0 * nu) * reduced_j(-nu, z).re / reduced_j(nu, z).re
    } else {
        kappa.powf(2.0 * nu) * iv_scaled(-nu, kappa) / iv_scaled(nu, kappa)
    }
}

/// Pole-free form of `F(μ) - ρ` on `(0, L)`: `μ^ν J_{-ν}(μL) - ρ μ^{-ν} J_ν(μL)`.
fn fhat(nu: f64, rho: f64, length: f64, mu: f64) -> f64 {
    let x = mu * length;
    if x < SWITCH_RADIUS {
        (0.5 * length).powf(-nu) * reduced_j(-nu, c64(x)).re - rho * (0.5 * length).powf(nu) * reduced_j(nu, c64(x)).re
    } else {
        mu.powf(nu) * jv_real(-nu, x) - rho * mu.powf(-nu) * jv_real(nu, x)
    }
}

fn fhat_imag(nu: f64, rho: f64, length: f64, kappa: f64) -> f64 {
    let x = kappa * length;
    if x < SWITCH_RADIUS {
        let z = Complex64::new(0.0, x);
        (0.5 * length).powf(-nu) * reduced_j(-nu, z).re - rho * (0.5 * length).powf(nu) * reduced_j(nu, z).re
    } else {
        // Divided by the positive factor e^{x}.
        kappa.powf(nu) * iv_scaled(-nu, x) - rho * kappa.powf(-nu) * iv_scaled(nu, x)
    }
}

fn root_in<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, what: &str) -> Result<(f64, [f64; 2])> {
    // Eight-point scan for the sign change, then Brent.
    let mut a = lo;
    let mut fa = f(a);
    for i in 1..=8 {
        let b = if i == 8 { hi } else { lo + (hi - lo) * i as f64 / 8.0 };
        let fb = f(b);
        if fa == 0.0 {
            return Ok((a, [lo, hi]));
        }
        if fa.signum() != fb.signum() {
            let r = brent(&f, a, b, 0.0, MAX_ITER).map_err(|e| Error::Convergence {
                what: what.into(),
                lo: e.bracket[0],
                hi: e.bracket[1],
            })?;
            return Ok((r.x, [lo, hi]));
        }
        a = b;
        fa = fb;
    }
    Err(Error::Convergence {
        what: format!("{what}: no sign change"),
        lo,
        hi,
    })
}

fn negative_root<F: Fn(f64) -> f64>(f: F, what: &str) -> Result<f64> {
    let mut hi = 1.0;
    let mut n = 0;
    while f(hi) <= 0.0 {
        hi *= 2.0;
        n += 1;
        if n > 2000 {
            return Err(Error::Convergence {
                what: what.into(),
                lo: 0.0,
                hi,
            });
        }
    }
    let r = brent(&f, 0.0, hi, 0.0, 400).map_err(|e| Error::Convergence {
        what: what.into(),
        lo: e.bracket[0],
        hi: e.bracket[1],
    })?;
    Ok(r.x)
}

fn general_table(ext: ExtensionParams, count: usize, length: f64) -> Result<EigenvalueTable> {
    validate_count(count)?;
    let nu = ext.nu();
    let rho = ext.rho()?;
    let rho_eff = rho * length.powf(2.0 * nu);
    let crit = rho_crit(ext.g);
    let zero_mode = if length == 1.0 {
        ext.has_zero_mode()
    } else {
        (rho_eff / crit - 1.0).abs() < 1e-13
    };
    let first = !zero_mode && rho_eff < crit;
    let n_zeros = if first { count - 1 } else { count } + 1;
    let zs: Vec<f64> = bessel_zeros(nu, n_zeros)?.into_iter().map(|z| z / length).collect();
    let mut intervals: Vec<(f64, f64)> = Vec::with_capacity(count);
    if first {
        intervals.push((0.0, zs[0]));
    }
    intervals.extend(zs.windows(2).map(|w| (w[0], w[1])));
    intervals.truncate(count);
    let f = |mu: f64| fhat(nu, rho, length, mu);
    let roots: Result<Vec<(f64, [f64; 2])>> = intervals.par_iter().map(|&(lo, hi)| root_in(f, lo, hi, "eigenvalue root")).collect();
    let entries = roots?
        .into_iter()
        .enumerate()
        .map(|(i, (mu, b))| EigenEntry {
            index: i + 1,
            lambda: mu * mu,
            mu,
            bracket: b,
        })
        .collect();
    let negative = if !zero_mode && rho_eff > crit {
        let k = negative_root(|k| fhat_imag(nu, rho, length, k), "negative eigenvalue")?;
        Some(-k * k)
    } else {
        None
    };
    Ok(EigenvalueTable {
        g: ext.g,
        ext,
        entries,
        negative,
        zero_mode,
        interval_length: length,
    })
}

/// Roots of `F(μ) = ρ`, the negative eigenvalue when `ρ > ρ_crit`, and the zero mode.
pub fn eigenvalues_general(ext: &ExtensionParams, count: usize) -> Result<EigenvalueTable> {
    if ext.is_half() {
        return Err(Error::Domain("at g = 1/2 use eigenvalues_half".into()));
    }
    if ext.is_dirichlet() {
        return eigenvalues_d(ext.g, count);
    }
    general_table(*ext, count, 1.0)
}

/// Spectrum of the extension on `(0, L)`, with boundary data read against `x^g`, `x^{1-g}`.
pub fn eigenvalues_on_interval(ext: &ExtensionParams, length: f64, count: usize) -> Result<EigenvalueTable> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::Domain(format!("interval length {length} must be positive")));
    }
    if ext.is_half() {
        return Err(Error::Domain("interval rescaling is implemented for 1/2 < g < 3/2".into()));
    }
    if ext.is_dirichlet() {
        return zero_table(*ext, ext.nu(), count, length);
    }
    general_table(*ext, count, length)
}

/// Critical `θ = log 2 - γ` separating the `g = 1/2` regimes.
pub fn theta_crit() -> f64 {
    LN_2 - EULER_GAMMA
}

/// `(θ - log μ) J₀(μ) + (π/2) Y₀(μ)`, finite as `μ → 0`.
pub fn half_spectral_function(theta: f64, mu: f64) -> f64 {
    if mu == 0.0 {
        return theta - theta_crit();
    }
    (theta - mu.ln()) * jv_real(0.0, mu) + FRAC_PI_2 * yv(0.0, c64(mu)).re
}

/// `g = 1/2`; `θ = -∞` selects the D-extension (zeros of `J₀`).
///
/// For `θ > log 2 - γ` there is one negative eigenvalue `-κ²` with
/// `log κ - θ + K₀(κ)/I₀(κ) = 0`; at `θ = log 2 - γ` there is a zero mode.
pub fn eigenvalues_half(theta: f64, count: usize) -> Result<EigenvalueTable> {
    let ext = ExtensionParams::from_theta(theta)?;
    if ext.is_dirichlet() {
        return zero_table(ext, 0.0, count, 1.0);
    }
    validate_count(count)?;
    let zero_mode = ext.has_zero_mode();
    let first = !zero_mode && ext.beta > 0.0;
    let n_zeros = if first { count - 1 } else { count } + 1;
    let zs = bessel_zeros(0.0, n_zeros)?;
    let mut intervals: Vec<(f64, f64)> = Vec::with_capacity(count);
    if first {
        intervals.push((0.0, zs[0]));
    }
    intervals.extend(zs.windows(2).map(|w| (w[0], w[1])));
    intervals.truncate(count);
    let f = |mu: f64| half_spectral_function(theta, mu);
    let roots: Result<Vec<(f64, [f64; 2])>> = intervals.par_iter().map(|&(lo, hi)| root_in(f, lo, hi, "eigenvalue root")).collect();
    let entries = roots?
        .into_iter()
        .enumerate()
        .map(|(i, (mu, b))| EigenEntry {
            index: i + 1,
            lambda: mu * mu,
            mu,
            bracket: b,
        })
        .collect();
    let negative = if !zero_mode && ext.beta < 0.0 {
        Some(half_negative_eigenvalue(theta)?)
    } else {
        None
    };
    Ok(EigenvalueTable {
        g: 0.5,
        ext,
        entries,
        negative,
        zero_mode,
        interval_length: 1.0,
    })
}

fn half_negative_eigenvalue(theta: f64) -> Result<f64> {
    let h = |k: f64| {
        if k == 0.0 {
            theta_crit() - theta
        } else {
            k.ln() + (-2.0 * k).exp() * kv_scaled(0.0, k) / iv_scaled(0.0, k) - theta
        }
    };
    let tiny = 1e-10;
    if h(tiny) >= 0.0 {
        // h(κ) ≈ (log 2 - γ - θ) + κ²/4 for small κ.
        return Ok(-4.0 * (theta - theta_crit()));
    }
    let mut hi = 1.0;
    while h(hi) <= 0.0 {
        hi *= 2.0;
    }
    let r = brent(h, tiny, hi, 0.0, 400).map_err(|e| Error::Convergence {
        what: "negative eigenvalue".into(),
        lo: e.bracket[0],
        hi: e.bracket[1],
    })?;
    Ok(-r.x * r.x)
}

/// Spectrum of any extension.
pub fn eigenvalues(ext: &ExtensionParams, count: usize) -> Result<EigenvalueTable> {
    if ext.is_half() {
        return eigenvalues_half(ext.theta.unwrap_or(f64::NEG_INFINITY), count);
    }
    eigenvalues_general(ext, count)
}

/// Coefficients `(a, b)` of the eigenfunction `√x (a J_ν(μx) + b J_{-ν}(μx))` vanishing at `x = 1`.
pub fn eigenfunction_coefficients(g: f64, mu: f64) -> (f64, f64) {
    let nu = g - 0.5;
    (jv_real(-nu, mu), -jv_real(nu, mu))
}

pub fn eigenfunction(g: f64, mu: f64, x: f64) -> f64 {
    let nu = g - 0.5;
    let (a, b) = eigenfunction_coefficients(g, mu);
    x.sqrt() * (a * jv_real(nu, mu * x) + b * jv_real(-nu, mu * x))
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Phase {
    Constant(f64),
    Mixed { rho: f64 },
    Half { theta: f64 },
}

/// Model of the high eigenvalues: `μ_n L = w` solves `θ_ν(w) + ψ(w) = π/2 + (n + k₀)π`,
/// with `θ_ν` the asymptotic Bessel phase and `ψ` fixed by the boundary condition.
#[derive(Clone, Debug)]
pub struct TailModel {
    nu: f64,
    phase: Phase,
    offset: f64,
    n_last: usize,
    w_last: f64,
    length: f64,
}

impl TailModel {
    pub fn from_table(table: &EigenvalueTable) -> Result<TailModel> {
        let n = table.entries.len();
        if n < MIN_EXPLICIT {
            return Err(Error::Domain(format!(
                "tail model needs at least {MIN_EXPLICIT} explicit eigenvalues, got {n}"
            )));
        }
        let ext = &table.ext;
        let length = table.interval_length;
        let (nu, phase) = if ext.is_half() {
            match ext.theta {
                Some(t) => (0.0, Phase::Half { theta: t }),
                None => (0.0, Phase::Constant(0.0)),
            }
        } else if ext.is_dirichlet() {
            (ext.nu(), Phase::Constant(0.0))
        } else {
            let rho = ext.rho()? * length.powf(2.0 * ext.nu());
            if rho == 0.0 {
                (ext.nu(), Phase::Constant(ext.nu() * PI))
            } else {
                (ext.nu(), Phase::Mixed { rho })
            }
        };
        let last = table.entries[n - 1];
        let w_last = last.mu * length;
        let mut model = TailModel {
            nu,
            phase,
            offset: 0.0,
            n_last: last.index,
            w_last,
            length,
        };
        let k = ((model.phase_total(w_last) - FRAC_PI_2) / PI).round();
        model.offset = k - last.index as f64;
        Ok(model)
    }

    fn bessel_phase(&self, w: f64) -> (f64, f64) {
        let m = 4.0 * self.nu * self.nu;
        let b1 = (m - 1.0) / 8.0;
        let b2 = (m - 1.0) * (m - 25.0) / 384.0;
        let b3 = (m - 1.0) * (m * m - 114.0 * m + 1073.0) / 5120.0;
        let iw = 1.0 / w;
        let iw2 = iw * iw;
        let th = w - (0.5 * self.nu + 0.25) * PI + iw * (b1 + iw2 * (b2 + iw2 * b3));
        let dth = 1.0 - iw2 * (b1 + iw2 * (3.0 * b2 + 5.0 * iw2 * b3));
        (th, dth)
    }

    fn boundary_phase(&self, w: f64) -> (f64, f64) {
        match self.phase {
            Phase::Constant(c) => (c, 0.0),
            Phase::Mixed { rho } => {
                let (s, c) = (self.nu * PI).sin_cos();
                let r = rho * w.powf(-2.0 * self.nu);
                let x = c - r;
                let psi = s.atan2(x);
                let dpsi = -2.0 * self.nu * r * s / (w * (x * x + s * s));
                (psi, dpsi)
            }
            Phase::Half { theta } => {
                let a = theta - w.ln();
                let psi = -FRAC_PI_2.atan2(a);
                let dpsi = -FRAC_PI_2 / (w * (a * a + FRAC_PI_2 * FRAC_PI_2));
                (psi, dpsi)
            }
        }
    }

    fn phase_total(&self, w: f64) -> f64 {
        self.bessel_phase(w).0 + self.boundary_phase(w).0
    }

    fn phase_prime_minus_one(&self, w: f64) -> f64 {
        (self.bessel_phase(w).1 - 1.0) + self.boundary_phase(w).1
    }

    /// Model `μ` at a real index `n` near or beyond the explicit range.
    pub fn mu_at(&self, n: f64) -> f64 {
        let target = FRAC_PI_2 + (n + self.offset) * PI;
        let mut w = self.w_last + (n - self.n_last as f64) * PI;
        for _ in 0..60 {
            let (th, dth) = self.bessel_phase(w);
            let (ps, dps) = self.boundary_phase(w);
            let step = (th + ps - target) / (dth + dps);
            w -= step;
            if step.abs() <= 1e-15 * w {
                break;
            }
        }
        w / self.length
    }

    pub fn n_last(&self) -> usize {
        self.n_last
    }

    /// `μ` of the last explicit eigenvalue.
    pub fn mu_last(&self) -> f64 {
        self.w_last / self.length
    }

    /// `Σ_{n > N} f(μ_n)` by Euler–Maclaurin on the model.
    ///
    /// `plain_integral(μ_N)` must return `∫_{μ_N}^∞ f(μ) dμ`.
    pub fn tail_sum<F, A>(&self, f: F, plain_integral: A) -> Result<Complex64>
    where
        F: Fn(f64) -> Complex64,
        A: Fn(f64) -> Complex64,
    {
        let a = self.n_last as f64;
        let mu_a = self.mu_at(a);
        let w_a = mu_a * self.length;
        let l = self.length;
        // ∫ f dn = (1/π) ∫ f(w/L) θ'(w) dw, split as 1 + (θ' - 1); the second part in log w.
        let g = |v: f64| {
            if v >= 1.0 {
                return Complex64::new(0.0, 0.0);
            }
            let u = w_a.ln() + v / (1.0 - v);
            let w = u.exp();
            if !w.is_finite() {
                return Complex64::new(0.0, 0.0);
            }
            let jac = w / ((1.0 - v) * (1.0 - v));
            let val = f(w / l) * (self.phase_prime_minus_one(w) * jac);
            if val.re.is_finite() && val.im.is_finite() {
                val
            } else {
                Complex64::new(0.0, 0.0)
            }
        };
        let q = integrate(
            g,
            0.0,
            1.0,
            QuadOptions {
                abs_tol: 1e-300,
                rel_tol: 1e-12,
                max_intervals: 2000,
            },
        );
        let integral = (plain_integral(mu_a) * l + q.value) / PI;
        let fa = f(mu_a);
        let fh = |n: f64| f(self.mu_at(n));
        let coarse = (fh(a + 0.5) - fh(a - 0.5)).norm();
        let scale = if coarse > 0.0 { fa.norm() / coarse } else { f64::INFINITY };
        let h = (0.05 * scale).clamp(0.01, 0.25);
        let (m2, m1, p1, p2) = (fh(a - 2.0 * h), fh(a - h), fh(a + h), fh(a + 2.0 * h));
        let d1 = (m2 - m1 * 8.0 + p1 * 8.0 - p2) / (12.0 * h);
        let d3 = (p2 - p1 * 2.0 + m1 * 2.0 - m2) / (2.0 * h * h * h);
        Ok(integral - fa * 0.5 - d1 / 12.0 + d3 / 720.0)
    }
}
