//! Resolvent kernels and traces.

use crate::error::{Error, Result};
use crate::extension::{ExtensionParams, SpectralPoint};
use crate::numeric::quad::{integrate, integrate_breaks, QuadOptions};
use crate::numeric::rgamma;
use crate::specfun::{iv_scaled, jv, jv_scaled, kv_scaled, reduced_j, yv, yv_scaled, SWITCH_RADIUS};
use crate::spectrum::{eigenvalues, EigenvalueTable, TailModel};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

const NEAR_TOL: f64 = 1e-12;
const QUAD_EPS: f64 = 1e-3;
const QUAD_ACCEPT: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceMethod {
    ClosedForm,
    Quadrature,
    SpectralSum,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceValue {
    pub lambda: SpectralPoint,
    pub trace: Complex64,
    pub method: TraceMethod,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelEval {
    pub x: f64,
    pub y: f64,
    pub value: Complex64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisSolutions {
    pub l_d: Complex64,
    pub l_n: Complex64,
    pub r: Complex64,
}

fn c64(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn check_g(g: f64) -> Result<()> {
    if !(g > 0.5 && g < 1.5) {
        return Err(Error::Domain(format!("g = {g} must lie in (1/2, 3/2)")));
    }
    Ok(())
}

fn check_x(x: f64) -> Result<()> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::Domain(format!("x = {x} must lie in (0, 1]")));
    }
    Ok(())
}

/// `L^D = √x J_ν(μx)`, `L^N = √x J_{-ν}(μx)`, `R = √x (J_{-ν}(μ) J_ν(μx) - J_ν(μ) J_{-ν}(μx))`.
pub fn basis_solutions(g: f64, mu: Complex64, x: f64) -> Result<BasisSolutions> {
    check_g(g)?;
    check_x(x)?;
    let nu = g - 0.5;
    let s = x.sqrt();
    let (jp, jm) = (jv(nu, mu * x), jv(-nu, mu * x));
    let r = if x == 1.0 {
        c64(0.0)
    } else if let Some(k) = positive_imaginary(mu) {
        // (2/π) sin νπ (K_ν(κ) I_ν(κx) - I_ν(κ) K_ν(κx)), free of cancellation.
        c64((2.0 / PI) * (nu * PI).sin() * s * ik_cross(nu, k, x))
    } else {
        (jv(-nu, mu) * jp - jv(nu, mu) * jm) * s
    };
    Ok(BasisSolutions { l_d: jp * s, l_n: jm * s, r })
}

fn positive_imaginary(mu: Complex64) -> Option<f64> {
    (mu.re == 0.0 && mu.im > 0.0).then_some(mu.im)
}

/// `K_ν(κ) I_ν(κx) - I_ν(κ) K_ν(κx)`.
fn ik_cross(nu: f64, k: f64, x: f64) -> f64 {
    let kx = k * x;
    let a = kv_scaled(nu, k) * iv_scaled(nu, kx) * (kx - k).exp();
    let b = iv_scaled(nu, k) * kv_scaled(nu, kx) * (k - kx).exp();
    a - b
}

/// `W[L^D, R] = (2 cos gπ / π) J_ν(μ)`, with `W[f, h] = f'h - fh'`.
pub fn wronskian_d(g: f64, mu: Complex64) -> Complex64 {
    jv(g - 0.5, mu) * (2.0 * (g * PI).cos() / PI)
}

/// `W[L^N, R] = (2 cos gπ / π) J_{-ν}(μ)`.
pub fn wronskian_n(g: f64, mu: Complex64) -> Complex64 {
    jv(0.5 - g, mu) * (2.0 * (g * PI).cos() / PI)
}

fn near_zero(nu: f64, mu: Complex64, lambda: Complex64) -> Result<()> {
    let (v, scale) = if mu.norm() < SWITCH_RADIUS {
        let m2 = mu.norm_sqr();
        (
            reduced_j(nu, mu).norm(),
            (1.0 + m2) * reduced_j(nu + 1.0, mu).norm() + rgamma(nu + 1.0).abs(),
        )
    } else {
        (jv_scaled(nu, mu).norm(), jv_scaled(nu + 1.0, mu).norm() + jv_scaled(nu - 1.0, mu).norm())
    };
    if v < NEAR_TOL * scale {
        return Err(Error::NearEigenvalue { lambda: lambda.re });
    }
    Ok(())
}

/// Half-line solutions at `g = 1/2`: `(L, R)` with `W[L, R] = L(1)` because `R'(1) = -1`.
fn half_basis(theta: Option<f64>, mu: Complex64, x: f64) -> (Complex64, Complex64) {
    let s = x.sqrt();
    if let Some(k) = positive_imaginary(mu) {
        let kx = k * x;
        let (i0, k0) = (iv_scaled(0.0, kx) * kx.exp(), kv_scaled(0.0, kx) * (-kx).exp());
        let l = match theta {
            None => i0,
            Some(t) => (2.0 / PI) * ((t - k.ln()) * i0 - k0),
        };
        let r = if x == 1.0 { 0.0 } else { -ik_cross(0.0, k, x) };
        return (c64(l * s), c64(r * s));
    }
    let z = mu * x;
    let j0 = jv(0.0, z);
    let l = match theta {
        None => j0,
        Some(t) => (c64(t) - mu.ln()) * (2.0 / PI) * j0 + yv(0.0, z),
    };
    let r = if x == 1.0 {
        c64(0.0)
    } else {
        (yv(0.0, mu) * j0 - jv(0.0, mu) * yv(0.0, z)) * FRAC_PI_2
    };
    (l * s, r * s)
}

/// Resolvent kernel `G(x, y; λ)` of the extension.
pub fn kernel(ext: &ExtensionParams, p: &SpectralPoint, x: f64, y: f64) -> Result<KernelEval> {
    check_x(x)?;
    check_x(y)?;
    let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
    let mu = p.mu;
    if ext.is_half() {
        let (l1, _) = half_basis(ext.theta, mu, 1.0);
        if l1.norm() < NEAR_TOL * (jv(0.0, mu).norm() + jv(1.0, mu).norm() + yv(0.0, mu).norm()) {
            return Err(Error::NearEigenvalue { lambda: p.lambda.re });
        }
        let (l, _) = half_basis(ext.theta, mu, lo);
        let (_, r) = half_basis(ext.theta, mu, hi);
        return Ok(KernelEval { x, y, value: l * r / l1 });
    }
    let g = ext.g;
    let nu = g - 0.5;
    let tau = ext.tau(p)?;
    let bl = basis_solutions(g, mu, lo)?;
    let bh = basis_solutions(g, mu, hi)?;
    let mut left = c64(0.0);
    if tau != c64(1.0) {
        near_zero(nu, mu, p.lambda)?;
        left += bl.l_d * ((c64(1.0) - tau) / wronskian_d(g, mu));
    }
    if tau != c64(0.0) {
        near_zero(-nu, mu, p.lambda)?;
        left += bl.l_n * (tau / wronskian_n(g, mu));
    }
    Ok(KernelEval { x, y, value: left * bh.r })
}

/// `Tr G_D = J_{g+1/2}(μ) / (2μ J_{g-1/2}(μ))`, finite at `μ = 0`.
pub fn trace_d(g: f64, mu: Complex64) -> Complex64 {
    bessel_trace(g - 0.5, mu)
}

/// `Tr G_N = J_{3/2-g}(μ) / (2μ J_{1/2-g}(μ))`.
pub fn trace_n(g: f64, mu: Complex64) -> Complex64 {
    bessel_trace(0.5 - g, mu)
}

fn bessel_trace(nu: f64, mu: Complex64) -> Complex64 {
    if mu.norm() < SWITCH_RADIUS {
        reduced_j(nu + 1.0, mu) / (reduced_j(nu, mu) * 4.0)
    } else {
        jv_scaled(nu + 1.0, mu) / (jv_scaled(nu, mu) * mu * 2.0)
    }
}

/// `Tr G_D - Tr G_N = (2g-1)/(2μ²) - sin(νπ) / (π μ² J_ν(μ) J_{-ν}(μ))`.
pub fn trace_dn_difference(g: f64, mu: Complex64) -> Complex64 {
    if mu.norm() < 8.0 {
        return trace_d(g, mu) - trace_n(g, mu);
    }
    let nu = g - 0.5;
    let mu2 = mu * mu;
    let damp = (-2.0 * mu.im.abs()).exp();
    c64(nu) / mu2 - c64((nu * PI).sin() * damp / PI) / (mu2 * jv_scaled(nu, mu) * jv_scaled(-nu, mu))
}

/// `Tr G = Tr G_D - τ (Tr G_D - Tr G_N)`.
pub fn trace_general(ext: &ExtensionParams, p: &SpectralPoint) -> Result<Complex64> {
    check_g(ext.g)?;
    let (g, mu) = (ext.g, p.mu);
    let tau = ext.tau(p)?;
    if tau != c64(1.0) {
        near_zero(g - 0.5, mu, p.lambda)?;
    }
    if tau == c64(0.0) {
        return Ok(trace_d(g, mu));
    }
    near_zero(0.5 - g, mu, p.lambda)?;
    Ok(trace_d(g, mu) - tau * trace_dn_difference(g, mu))
}

fn j0_minus_one(z: Complex64) -> Complex64 {
    let q = -z * z * 0.25;
    let mut term = c64(1.0);
    let mut sum = c64(0.0);
    for k in 1..40 {
        term *= q / ((k * k) as f64);
        sum += term;
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
    }
    sum
}

/// `Tr G_θ - Tr G_D` at `g = 1/2`: `(J₀² - 1) / (π μ² J₀ Z_θ)`, `Z_θ = (2/π)(θ - log μ) J₀ + Y₀`.
pub fn half_trace_difference(theta: f64, mu: Complex64) -> Result<Complex64> {
    let a = (c64(theta) - mu.ln()) * (2.0 / PI);
    let mu2 = mu * mu;
    if mu.norm() < 1.0 {
        let j0 = jv(0.0, mu);
        let z = a * j0 + yv(0.0, mu);
        let d = j0_minus_one(mu);
        return Ok(d * (d + 2.0) / (mu2 * j0 * z * PI));
    }
    let js = jv_scaled(0.0, mu);
    let zs = a * js + yv_scaled(0.0, mu);
    if zs.norm() < NEAR_TOL * (a.norm() * js.norm() + yv_scaled(0.0, mu).norm()) {
        return Err(Error::NearEigenvalue { lambda: mu2.re });
    }
    let damp = (-2.0 * mu.im.abs()).exp();
    Ok((js / zs - c64(damp) / (js * zs)) / (mu2 * PI))
}

fn half_trace(theta: Option<f64>, p: &SpectralPoint) -> Result<Complex64> {
    let mu = p.mu;
    let t = match theta {
        None => {
            near_zero(0.0, mu, p.lambda)?;
            return Ok(trace_d(0.5, mu));
        }
        Some(t) => t,
    };
    if mu.norm() == 0.0 {
        return Err(Error::Domain("the g = 1/2 θ-trace at λ = 0 is not implemented".into()));
    }
    if mu.norm() < 1.0 {
        return Ok(trace_d(0.5, mu) + half_trace_difference(t, mu)?);
    }
    let a = (c64(t) - mu.ln()) * (2.0 / PI);
    let (j0, j1) = (jv_scaled(0.0, mu), jv_scaled(1.0, mu));
    let (y0, y1) = (yv_scaled(0.0, mu), yv_scaled(1.0, mu));
    let z0 = a * j0 + y0;
    if z0.norm() < NEAR_TOL * (a.norm() * j0.norm() + y0.norm()) {
        return Err(Error::NearEigenvalue { lambda: p.lambda.re });
    }
    Ok((a * j1 + y1) / (z0 * mu * 2.0) + j0 / (z0 * mu * mu * PI))
}

/// `g = 1/2` traces; `theta = None` is the D-extension.
///
/// The θ-trace is `Z₁/(2μ Z₀) + J₀(μ)/(π μ² Z₀)`; the second term is the `x → 0`
/// endpoint of the `(Y₀, Y₀)` primitive.
pub fn trace_half(theta: Option<f64>, p: &SpectralPoint) -> Result<TraceValue> {
    Ok(TraceValue {
        lambda: *p,
        trace: half_trace(theta, p)?,
        method: TraceMethod::ClosedForm,
    })
}

/// Closed-form trace for any extension.
pub fn trace_closed(ext: &ExtensionParams, p: &SpectralPoint) -> Result<TraceValue> {
    let trace = if ext.is_half() {
        half_trace(ext.theta, p)?
    } else {
        trace_general(ext, p)?
    };
    Ok(TraceValue {
        lambda: *p,
        trace,
        method: TraceMethod::ClosedForm,
    })
}

/// `∫₀^ε x J_a(μx) J_b(μx) dx` from the product of ascending series.
fn product_integral(a: f64, b: f64, mu: Complex64, eps: f64) -> Complex64 {
    let q = -(mu * eps) * (mu * eps) * 0.25;
    // (με/2)^{a+b} ε² Σ_k c_k q^k / (2 + a + b + 2k)
    let mut ca = Vec::with_capacity(60);
    let mut cb = Vec::with_capacity(60);
    let (mut ta, mut tb) = (rgamma(a + 1.0), rgamma(b + 1.0));
    for k in 0..60usize {
        if k > 0 {
            let kf = k as f64;
            ta /= kf * (a + kf);
            tb /= kf * (b + kf);
        }
        ca.push(ta);
        cb.push(tb);
    }
    let mut sum = c64(0.0);
    let mut qk = c64(1.0);
    for k in 0..60usize {
        let ck: f64 = (0..=k).map(|j| ca[j] * cb[k - j]).sum();
        let term = qk * (ck / (2.0 + a + b + 2.0 * k as f64));
        sum += term;
        if k > 2 && term.norm() < 1e-18 * sum.norm() {
            break;
        }
        qk *= q;
    }
    let pw = if a + b == 0.0 {
        c64(1.0)
    } else {
        ((mu * eps * 0.5).ln() * (a + b)).exp()
    };
    pw * sum * (eps * eps)
}

fn quad_opts() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-300,
        rel_tol: 1e-12,
        max_intervals: 4000,
    }
}

fn quad_value(f: impl FnMut(f64) -> Complex64, a: f64, b: f64) -> Result<Complex64> {
    quad_checked(integrate(f, a, b, quad_opts()))
}

fn quad_checked(r: crate::numeric::quad::QuadResult) -> Result<Complex64> {
    let ok = r.converged || r.error <= QUAD_ACCEPT * r.value.norm();
    if !ok || !(r.value.re.is_finite() && r.value.im.is_finite()) {
        return Err(Error::Quadrature {
            estimate: r.value.re,
            error: r.error,
        });
    }
    Ok(r.value)
}

/// Trace by quadrature of the diagonal kernel; `(0, ε)` by term-wise series integration.
pub fn trace_quadrature(ext: &ExtensionParams, p: &SpectralPoint) -> Result<TraceValue> {
    let mu = p.mu;
    if mu.norm() == 0.0 {
        return Err(Error::Domain("quadrature trace needs λ ≠ 0".into()));
    }
    let eps = QUAD_EPS * (10.0 / mu.norm()).min(1.0);
    let trace = if ext.is_half() {
        // Check the Wronskian before integrating.
        half_trace(ext.theta, p)?;
        let (l1, _) = half_basis(ext.theta, mu, 1.0);
        let mut diag = |x: f64| {
            let (l, r) = half_basis(ext.theta, mu, x);
            l * r
        };
        // x log x at the origin: geometric panels.
        let breaks: Vec<f64> = std::iter::once(0.0).chain((0..=8).rev().map(|k| eps * 1e-2f64.powi(k))).collect();
        let head = quad_checked(integrate_breaks(&mut diag, &breaks, quad_opts()))?;
        let body = quad_value(diag, eps, 1.0)?;
        (head + body) / l1
    } else {
        let g = ext.g;
        let nu = g - 0.5;
        let tau = ext.tau(p)?;
        let (jp, jm) = (jv(nu, mu), jv(-nu, mu));
        let mut cd = c64(0.0);
        let mut cn = c64(0.0);
        if tau != c64(1.0) {
            near_zero(nu, mu, p.lambda)?;
            cd = (c64(1.0) - tau) / wronskian_d(g, mu);
        }
        if tau != c64(0.0) {
            near_zero(-nu, mu, p.lambda)?;
            cn = tau / wronskian_n(g, mu);
        }
        // x L R expanded in the products J_a J_b.
        let pnn = product_integral(nu, nu, mu, eps);
        let pnm = product_integral(nu, -nu, mu, eps);
        let pmm = product_integral(-nu, -nu, mu, eps);
        let head = cd * (jm * pnn - jp * pnm) + cn * (jm * pnm - jp * pmm);
        let diag = |x: f64| {
            let b = basis_solutions(g, mu, x).expect("x in (0, 1]");
            (b.l_d * cd + b.l_n * cn) * b.r
        };
        head + quad_value(diag, eps, 1.0)?
    };
    Ok(TraceValue {
        lambda: *p,
        trace,
        method: TraceMethod::Quadrature,
    })
}

/// `∫_M^∞ dμ / (μ² - λ)` with `m = √λ`, valid for `M > |m|`.
fn resolvent_tail_integral(m: Complex64, big_m: f64) -> Complex64 {
    if m.norm() < 1e-8 * big_m {
        return c64(1.0 / big_m);
    }
    (m / big_m).atanh() / m
}

/// `Σ_n 1/(λ_n - λ)` over a computed table plus the modeled tail.
pub fn trace_from_table(table: &EigenvalueTable, p: &SpectralPoint) -> Result<TraceValue> {
    let lambda = p.lambda;
    let tail = TailModel::from_table(table)?;
    if tail.mu_last() * tail.mu_last() < 4.0 * lambda.norm() {
        return Err(Error::Domain(format!(
            "{} explicit eigenvalues do not reach far enough past |λ| = {}",
            table.entries.len(),
            lambda.norm()
        )));
    }
    let mut sum = c64(0.0);
    let mut terms: Vec<f64> = table.lambdas();
    if let Some(neg) = table.negative {
        terms.push(neg);
    }
    if table.zero_mode {
        terms.push(0.0);
    }
    for l in terms {
        let d = c64(l) - lambda;
        if d.norm() < NEAR_TOL * (1.0 + l.abs()) {
            return Err(Error::NearEigenvalue { lambda: l });
        }
        sum += d.inv();
    }
    let m = p.mu;
    let rest = tail.tail_sum(|mu| (c64(mu * mu) - lambda).inv(), |a| resolvent_tail_integral(m, a))?;
    Ok(TraceValue {
        lambda: *p,
        trace: sum + rest,
        method: TraceMethod::SpectralSum,
    })
}

/// Spectral-sum trace with `n_explicit` computed eigenvalues.
pub fn trace_spectral_sum(ext: &ExtensionParams, p: &SpectralPoint, n_explicit: usize) -> Result<TraceValue> {
    let table = eigenvalues(ext, n_explicit)?;
    trace_from_table(&table, p)
}

/// `∫₀^x t J_ν(μt)² dt = (x²/2)(J_ν(μx)² - J_{ν-1}(μx) J_{ν+1}(μx))`.
pub fn primitive_nu_nu(nu: f64, mu: Complex64, x: f64) -> Complex64 {
    let z = mu * x;
    let j = jv(nu, z);
    (j * j - jv(nu - 1.0, z) * jv(nu + 1.0, z)) * (0.5 * x * x)
}

/// `₁F₂(-1/2; -ν, ν; -z²)` through its Bessel-product form.
pub fn hyp1f2_bessel_form(nu: f64, z: Complex64) -> Complex64 {
    let prod = jv(-1.0 - nu, z) * jv(nu - 1.0, z) + jv(-nu, z) * jv(nu, z) * 2.0 + jv(1.0 - nu, z) * jv(1.0 + nu, z);
    -prod * z * z * (PI / ((PI * nu).sin() * 4.0 * nu))
}

/// `∫₀^x t J_ν(μt) J_{-ν}(μt) dt = -ν² [₁F₂(-1/2; -ν, ν; -x²μ²) - 1] / (μ² Γ(1-ν) Γ(1+ν))`.
pub fn primitive_nu_minus_nu(nu: f64, mu: Complex64, x: f64) -> Complex64 {
    let f = hyp1f2_bessel_form(nu, mu * x);
    -(f - 1.0) * (nu * nu * rgamma(1.0 - nu) * rgamma(1.0 + nu)) / (mu * mu)
}
