//! ζ-functions, poles and residues, heat traces.

use crate::asympt::{tau_series, trace_d_coefficients, MAX_TRACE_ORDER};
use crate::error::{Error, Result};
use crate::extension::{ExtensionParams, SpectralPoint};
use crate::numeric::dd::{CDd, Dd};
use crate::numeric::quad::{integrate, QuadOptions};
use crate::numeric::{gamma, rgamma, EULER_GAMMA};
use crate::resolvent::{half_trace_difference, trace_d, trace_dn_difference};
use crate::spectrum::{eigenvalues, eigenvalues_on_interval, EigenvalueTable, TailModel, MIN_EXPLICIT};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

/// Largest eigenvalue count any single evaluation may request.
pub const EIGENVALUE_BUDGET: usize = 20_000;
/// Default count of `A_k` terms subtracted on the ray.
pub const DEFAULT_SUBTRACT: usize = 12;
/// `zeta_integral` refuses `|s - s₀| < POLE_GUARD` at a pole `s₀`.
pub const POLE_GUARD: f64 = 1e-3;

const U_MID: f64 = 4.0;
const U_FAR: f64 = 40.0;
const S_MAX: f64 = 2.5;

fn c64(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    Double,
    /// Double-double accumulation of spectral sums and tighter quadrature.
    Extended,
}

impl Precision {
    fn rel_tol(self) -> f64 {
        match self {
            Precision::Double => 1e-12,
            Precision::Extended => 1e-14,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZetaMethod {
    SpectralSum,
    Integral,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaValue {
    pub s: Complex64,
    pub value: Complex64,
    /// `λ₋^{-s} = |λ₋|^{-s}(cos πs - i sin πs)`, already included in `value`.
    pub negative_part: Option<Complex64>,
    /// A zero mode exists and was left out.
    pub zero_mode_excluded: bool,
    /// `Re s < 0.51`: the spectral tail converges too slowly for full accuracy.
    pub accuracy_warning: bool,
    pub method: ZetaMethod,
}

/// `λ₋^{-s}` on the principal branch, `λ₋ = |λ₋| e^{iπ}`.
pub fn negative_term(lambda_minus: f64, s: Complex64) -> Complex64 {
    (-(c64(lambda_minus.abs().ln()) + Complex64::new(0.0, PI)) * s).exp()
}

fn sum_terms(terms: impl Iterator<Item = Complex64>, precision: Precision) -> Complex64 {
    match precision {
        Precision::Double => terms.fold(c64(0.0), |a, b| a + b),
        Precision::Extended => terms.fold(CDd::ZERO, |a, b| a + CDd::from_c64(b)).to_c64(),
    }
}

fn sum_real(terms: impl Iterator<Item = f64>, precision: Precision) -> f64 {
    match precision {
        Precision::Double => terms.sum(),
        Precision::Extended => terms.fold(Dd::ZERO, |a, b| a + Dd::new(b)).to_f64(),
    }
}

/// `Σ λ_n^{-s}` over a table plus the modeled tail and `λ₋^{-s}`.
pub fn zeta_sum_table(table: &EigenvalueTable, s: Complex64, precision: Precision) -> Result<ZetaValue> {
    if !(s.re > 0.5) {
        return Err(Error::Domain(format!("spectral sum needs Re s > 1/2, got {s}")));
    }
    let tail = TailModel::from_table(table)?;
    let explicit = sum_terms(table.entries.iter().map(|e| (-c64(e.lambda.ln()) * s).exp()), precision);
    let rest = tail.tail_sum(
        |mu| (-c64(mu.ln()) * (s * 2.0)).exp(),
        |a| (c64(a.ln()) * (c64(1.0) - s * 2.0)).exp() / (s * 2.0 - 1.0),
    )?;
    let negative_part = table.negative.map(|l| negative_term(l, s));
    let value = explicit + rest + negative_part.unwrap_or(c64(0.0));
    Ok(ZetaValue {
        s,
        value,
        negative_part,
        zero_mode_excluded: table.zero_mode,
        accuracy_warning: s.re < 0.51,
        method: ZetaMethod::SpectralSum,
    })
}

pub fn zeta_sum(ext: &ExtensionParams, s: Complex64, n_explicit: usize) -> Result<ZetaValue> {
    check_budget(n_explicit)?;
    let table = eigenvalues(ext, n_explicit)?;
    zeta_sum_table(&table, s, Precision::Double)
}

fn check_budget(n: usize) -> Result<()> {
    if n > EIGENVALUE_BUDGET {
        return Err(Error::Budget {
            required: n,
            budget: EIGENVALUE_BUDGET,
        });
    }
    Ok(())
}

/// `E₁(z)` on the principal branch.
pub fn exp_integral_e1(z: Complex64) -> Complex64 {
    if z.norm() <= 4.0 || z.re <= 0.0 {
        let mut term = c64(1.0);
        let mut sum = c64(0.0);
        for k in 1..400 {
            term *= -z / (k as f64);
            let t = term / (k as f64);
            sum += t;
            if t.norm() < 1e-17 * sum.norm().max(1e-300) && k > 4 {
                break;
            }
        }
        return -c64(EULER_GAMMA) - z.ln() - sum;
    }
    // e^{-z} / (z + 1 - 1²/(z + 3 - 2²/(z + 5 - …))), modified Lentz.
    let tiny = Complex64::new(1e-300, 0.0);
    let mut f = z + 1.0;
    let mut c = f;
    let mut d = c64(0.0);
    for n in 1..500 {
        let a = -((n * n) as f64);
        let b = z + (2 * n + 1) as f64;
        d = b + d * a;
        if d.norm() == 0.0 {
            d = tiny;
        }
        c = b + c64(a) / c;
        if c.norm() == 0.0 {
            c = tiny;
        }
        d = d.inv();
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            break;
        }
    }
    (-z).exp() / f
}

/// One monomial `c μ^e` of the large-`μ` trace on the ray `μ = e^{iπ/4} u`.
#[derive(Clone, Copy, Debug)]
struct Monomial {
    exponent: f64,
    coeff: Complex64,
}

impl Monomial {
    fn eval(&self, mu: Complex64) -> Complex64 {
        self.coeff * mu.powf(self.exponent)
    }

    /// `B(s) = e^{-iπs/2} c e^{iπe/4}`, so that the tail is `(2/π) Re[B U^{-x}/x]`, `x = 2s - 2 - e`.
    fn phase(&self, s: f64) -> Complex64 {
        Complex64::from_polar(1.0, -FRAC_PI_2 * s + FRAC_PI_4 * self.exponent) * self.coeff
    }

    fn pole(&self) -> f64 {
        1.0 + 0.5 * self.exponent
    }

    /// `(2/π) ∫_U^∞ u^{1-2s} Re[e^{-iπs/2} c μ^e] du`, continued in `s`.
    fn tail(&self, s: f64, u: f64) -> Result<f64> {
        let s0 = self.pole();
        let x = 2.0 * (s - s0);
        let b0 = self.phase(s0);
        let removable = b0.re.abs() <= 1e-13 * b0.norm();
        if x.abs() < 2.0 * POLE_GUARD && !removable {
            return Err(Error::PoleProximity {
                s,
                pole: s0,
                distance: (s - s0).abs(),
            });
        }
        if removable && x.abs() < 1e-2 {
            // Re[B₀ (e^{y} - 1)/x] with y = -x(iπ/4 + log U), Re B₀ = 0.
            let y = -Complex64::new(u.ln(), FRAC_PI_4) * x;
            let ratio = expm1_over(y) * (y / x);
            return Ok((2.0 / PI) * (b0 * ratio).re);
        }
        Ok((2.0 / PI) * (self.phase(s) * u.powf(-x)).re / x)
    }
}

/// `(e^y - 1)/y`.
fn expm1_over(y: Complex64) -> Complex64 {
    if y.norm() < 1e-3 {
        c64(1.0) + y * 0.5 + y * y / 6.0 + y * y * y / 24.0
    } else {
        (y.exp() - 1.0) / y
    }
}

#[derive(Clone, Debug)]
enum Anomalous {
    None,
    /// `-τ (Tr G_D - Tr G_N)`; on the ray `-(ν/μ²)/(1 - q)`, `q = ρ e^{iπν} μ^{-2ν}`.
    Tau {
        rho: f64,
        series: Vec<Monomial>,
        k_max: usize,
    },
    /// `Tr G_θ - Tr G_D`; on the ray `1/(2μ²(θ - log μ + iπ/2))`.
    Half {
        theta: f64,
    },
}

/// Integrand bookkeeping for one `s`.
struct RayIntegral<'a> {
    ext: &'a ExtensionParams,
    s: f64,
    with_d: bool,
    d_sub: Vec<Monomial>,
    d_far: Vec<Monomial>,
    anomalous: Anomalous,
    arc_radius: f64,
    opts: QuadOptions,
}

fn d_monomials(g: f64, count: usize) -> Result<Vec<Monomial>> {
    let a = trace_d_coefficients(g, 1, MAX_TRACE_ORDER)?;
    Ok((1..=count)
        .map(|k| Monomial {
            exponent: -(k as f64),
            coeff: a.coefficient(k),
        })
        .collect())
}

fn tau_count(nu: f64, s: f64) -> usize {
    (((0.5 - 2.0 * s) / (2.0 * nu)).ceil() - 1.0).max(0.0) as usize
}

impl<'a> RayIntegral<'a> {
    fn new(ext: &'a ExtensionParams, s: f64, n_subtract: usize, with_d: bool, precision: Precision) -> Result<Self> {
        if !(s.is_finite() && s < S_MAX) {
            return Err(Error::Domain(format!("s = {s} outside the supported range (s_min, {S_MAX})")));
        }
        if n_subtract == 0 || n_subtract > MAX_TRACE_ORDER {
            return Err(Error::Domain(format!("n_subtract must be in 1..={MAX_TRACE_ORDER}")));
        }
        let g = ext.g;
        let n = n_subtract as f64;
        let s_min = if ext.is_half() {
            1.0 - (n + 1.0) / 2.0
        } else {
            (1.0 - (n + 1.0) / 2.0).min((0.5 - g) * (n + 1.0))
        };
        if s <= s_min {
            return Err(Error::Domain(format!("s = {s} is below s_min = {s_min} for n_subtract = {n_subtract}")));
        }
        let all = d_monomials(g, MAX_TRACE_ORDER)?;
        let d_sub = all[..n_subtract].to_vec();
        let d_far = all[n_subtract..].to_vec();
        let anomalous = if ext.is_half() {
            match ext.theta {
                Some(theta) => {
                    if s.abs() < POLE_GUARD {
                        return Err(Error::PoleProximity {
                            s,
                            pole: 0.0,
                            distance: s.abs(),
                        });
                    }
                    Anomalous::Half { theta }
                }
                None => Anomalous::None,
            }
        } else if ext.is_dirichlet() {
            Anomalous::None
        } else {
            let nu = ext.nu();
            let k_max = tau_count(nu, s);
            let series: Vec<Monomial> = tau_series(ext, 1, k_max)?
                .terms()
                .iter()
                .map(|t| Monomial {
                    exponent: t.exponent - 2.0,
                    coeff: t.coefficient() * (-nu),
                })
                .collect();
            Anomalous::Tau {
                rho: ext.rho()?,
                series,
                k_max,
            }
        };
        let arc_radius = arc_radius(ext)?;
        let opts = QuadOptions {
            abs_tol: 1e-300,
            rel_tol: precision.rel_tol(),
            max_intervals: 4000,
        };
        Ok(RayIntegral {
            ext,
            s,
            with_d,
            d_sub,
            d_far,
            anomalous,
            arc_radius,
            opts,
        })
    }

    fn exact(&self, mu: Complex64) -> Result<Complex64> {
        let g = self.ext.g;
        let mut v = if self.with_d { trace_d(g, mu) } else { c64(0.0) };
        match &self.anomalous {
            Anomalous::None => {}
            Anomalous::Tau { .. } => {
                let p = SpectralPoint::from_mu(mu, 1)?;
                v -= self.ext.tau(&p)? * trace_dn_difference(g, mu);
            }
            Anomalous::Half { theta } => v += half_trace_difference(*theta, mu)?,
        }
        Ok(v)
    }

    fn subtracted(&self, mu: Complex64) -> Complex64 {
        let mut v = c64(0.0);
        if self.with_d {
            v += self.d_sub.iter().map(|m| m.eval(mu)).sum::<Complex64>();
        }
        if let Anomalous::Tau { series, .. } = &self.anomalous {
            v += series.iter().map(|m| m.eval(mu)).sum::<Complex64>();
        }
        v
    }

    fn weight(&self, u: f64, f: Complex64) -> f64 {
        (2.0 / PI) * u.powf(1.0 - 2.0 * self.s) * (Complex64::from_polar(1.0, -FRAC_PI_2 * self.s) * f).re
    }

    /// `(value, error estimate)`; accuracy is judged once all pieces are summed.
    fn quad(&self, f: impl FnMut(f64) -> Complex64, a: f64, b: f64) -> Result<(f64, f64)> {
        let r = integrate(f, a, b, self.opts);
        if !r.value.re.is_finite() {
            return Err(Error::Quadrature {
                estimate: r.value.re,
                error: r.error,
            });
        }
        Ok((r.value.re, r.error))
    }

    fn evaluate(&self) -> Result<f64> {
        let s = self.s;
        let ray = |u: f64| Complex64::from_polar(u, FRAC_PI_4);
        let fail = std::cell::Cell::new(None);
        let guard = |r: Result<Complex64>| match r {
            Ok(v) => v,
            Err(e) => {
                fail.set(Some(e));
                c64(0.0)
            }
        };

        let m = self.arc_radius;
        let arc = self.quad(
            |phi| {
                let mu = Complex64::from_polar(m, 0.5 * phi);
                let t = guard(self.exact(mu));
                Complex64::from_polar(m.powf(2.0 - 2.0 * s), (1.0 - s) * phi) * t / (2.0 * PI)
            },
            -FRAC_PI_2,
            FRAC_PI_2,
        )?;
        let inner = self.quad(|u| c64(self.weight(u, guard(self.exact(ray(u))))), m, U_MID)?;
        let middle = self.quad(|u| c64(self.weight(u, guard(self.exact(ray(u))) - self.subtracted(ray(u)))), U_MID, U_FAR)?;
        if let Some(e) = fail.take() {
            return Err(e);
        }

        let mut analytic = 0.0;
        if self.with_d {
            for mono in &self.d_sub {
                analytic += mono.tail(s, U_MID)?;
            }
            for mono in &self.d_far {
                analytic += mono.tail(s, U_FAR)?;
            }
        }
        let far = match &self.anomalous {
            Anomalous::None => (0.0, 0.0),
            Anomalous::Tau { rho, series, k_max } => {
                for mono in series {
                    analytic += mono.tail(s, U_MID)?;
                }
                let nu = self.ext.nu();
                let q0 = Complex64::from_polar(*rho, PI * nu);
                let rem = |u: f64| {
                    let mu = ray(u);
                    let q = q0 * mu.powf(-2.0 * nu);
                    -q.powi(*k_max as i32 + 1) / (c64(1.0) - q) * nu / (mu * mu)
                };
                self.log_tail(rem, U_FAR)?
            }
            Anomalous::Half { theta } => {
                // (2/π) Re[e^{-iπs/2} · e^{-iπ/2}/2 · (-e^{-2sc} E₁(2s(log U - c)))], c = θ + iπ/4.
                let c = Complex64::new(*theta, FRAC_PI_4);
                let v = c64(U_FAR.ln());
                let inner = -(-c * (2.0 * s)).exp() * exp_integral_e1((v - c) * (2.0 * s));
                let f = Complex64::from_polar(0.5, -FRAC_PI_2 * s - FRAC_PI_2) * inner;
                ((2.0 / PI) * f.re, 0.0)
            }
        };
        let pieces = [arc, inner, middle, far];
        let total = pieces.iter().map(|p| p.0).sum::<f64>() + analytic;
        let error: f64 = pieces.iter().map(|p| p.1).sum();
        // Unconverged pieces are accepted when small against the magnitudes being summed.
        let scale = pieces.iter().map(|p| p.0.abs()).sum::<f64>() + analytic.abs();
        if error > 1e-10 * scale {
            return Err(Error::Quadrature { estimate: total, error });
        }
        Ok(total)
    }

    /// `(2/π) ∫_U^∞ u^{1-2s} Re[e^{-iπs/2} f(u)] du` in `v = log u`.
    fn log_tail(&self, f: impl Fn(f64) -> Complex64, u0: f64) -> Result<(f64, f64)> {
        let l0 = u0.ln();
        self.quad(
            |t: f64| {
                if t >= 1.0 {
                    return c64(0.0);
                }
                let v = l0 + t / (1.0 - t);
                let u = v.exp();
                if !u.is_finite() {
                    return c64(0.0);
                }
                let val = self.weight(u, f(u)) * u / ((1.0 - t) * (1.0 - t));
                c64(if val.is_finite() { val } else { 0.0 })
            },
            0.0,
            1.0,
        )
    }
}

/// Radius `M` of the arc through the right half plane, `M² < λ₁/2`.
fn arc_radius(ext: &ExtensionParams) -> Result<f64> {
    let l1 = eigenvalues(ext, 1)?.entries[0].lambda;
    let mut m = 1.0f64;
    while m * m >= 0.5 * l1 {
        m *= 0.5;
        if m < 1e-8 {
            return Err(Error::Domain(format!("first eigenvalue {l1:e} too close to zero for the contour")));
        }
    }
    Ok(m)
}

fn integral_value(ext: &ExtensionParams, s: f64, n_subtract: usize, with_d: bool, precision: Precision) -> Result<ZetaValue> {
    let ri = RayIntegral::new(ext, s, n_subtract, with_d, precision)?;
    let sc = c64(s);
    let negative_part = if ext.is_dirichlet() {
        None
    } else {
        eigenvalues(ext, 1)?.negative.map(|l| negative_term(l, sc))
    };
    let value = c64(ri.evaluate()?) + negative_part.unwrap_or(c64(0.0));
    Ok(ZetaValue {
        s: sc,
        value,
        negative_part,
        zero_mode_excluded: ext.has_zero_mode(),
        accuracy_warning: false,
        method: ZetaMethod::Integral,
    })
}

/// `ζ(s)` for real `s` from the contour integral along `arg λ = ±π/2` with the first
/// `n_subtract` trace coefficients subtracted and integrated analytically.
pub fn zeta_integral(ext: &ExtensionParams, s: f64, n_subtract: usize) -> Result<ZetaValue> {
    integral_value(ext, s, n_subtract, true, Precision::Double)
}

pub fn zeta_integral_with(ext: &ExtensionParams, s: f64, n_subtract: usize, precision: Precision) -> Result<ZetaValue> {
    integral_value(ext, s, n_subtract, true, precision)
}

/// `ζ_{(α,β)}(s) - ζ_D(s)`: only the extension-dependent poles remain.
pub fn zeta_difference(ext: &ExtensionParams, s: f64, n_subtract: usize) -> Result<ZetaValue> {
    integral_value(ext, s, n_subtract, false, Precision::Double)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoleKind {
    Regular,
    Anomalous,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoleMethod {
    Formula,
    Numeric,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleReport {
    pub s0: f64,
    pub residue: f64,
    pub kind: PoleKind,
    pub k: usize,
    pub method: PoleMethod,
    /// Extrapolation error estimate for numeric residues.
    pub error: Option<f64>,
}

/// `-(1/π) Re{i A_k(g, 1)}` at `s = 1 - k/2`.
pub fn regular_residue(g: f64, k: usize) -> Result<f64> {
    let a = trace_d_coefficients(g, 1, k)?;
    // + 0.0 turns -0 into 0
    Ok((Complex64::new(0.0, 1.0) * a.coefficient(k)).re / -PI + 0.0)
}

/// `-((2g-1)/2π) ρ^k sin(π(2g-1)k/2)` at `s = (1/2 - g)k`.
pub fn anomalous_residue(g: f64, rho: f64, k: usize) -> f64 {
    let nu = g - 0.5;
    -(nu / PI) * rho.powi(k as i32) * (PI * nu * k as f64).sin()
}

/// Predicted poles with `k = 1..=K` of each family.
pub fn pole_table(ext: &ExtensionParams, k_max: usize) -> Result<Vec<PoleReport>> {
    if k_max == 0 || k_max > MAX_TRACE_ORDER {
        return Err(Error::Domain(format!("K must be in 1..={MAX_TRACE_ORDER}")));
    }
    let g = ext.g;
    let mut out = Vec::new();
    for k in 1..=k_max {
        out.push(PoleReport {
            s0: 1.0 - 0.5 * k as f64,
            residue: regular_residue(g, k)?,
            kind: PoleKind::Regular,
            k,
            method: PoleMethod::Formula,
            error: None,
        });
    }
    if !ext.is_half() && !ext.is_dirichlet() {
        let rho = ext.rho()?;
        for k in 1..=k_max {
            out.push(PoleReport {
                s0: (0.5 - g) * k as f64,
                residue: anomalous_residue(g, rho, k),
                kind: PoleKind::Anomalous,
                k,
                method: PoleMethod::Formula,
                error: None,
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidueOptions {
    /// Largest probe offset.
    pub h: f64,
    /// Probe offsets `h·2^{-j}`, `j < levels`.
    pub levels: usize,
    pub n_subtract: usize,
}

impl Default for ResidueOptions {
    fn default() -> Self {
        ResidueOptions {
            h: 0.05,
            levels: 5,
            n_subtract: DEFAULT_SUBTRACT,
        }
    }
}

const POSITION_TOL: f64 = 1e-9;

/// `lim (s - s₀) F(s)` by Richardson extrapolation in `h²` of `h (F(s₀+h) - F(s₀-h))/2`.
///
/// Regular poles use `F = ζ`; anomalous poles use `F = ζ - ζ_D`, which carries no regular
/// poles. At `g = 1/2` an anomalous probe may sit anywhere: there is no predicted pole and
/// the estimate should vanish.
pub fn residue_numeric(ext: &ExtensionParams, s0: f64, kind: PoleKind, opts: ResidueOptions) -> Result<PoleReport> {
    if !(opts.h > 0.0 && opts.levels >= 2) {
        return Err(Error::Domain("residue extrapolation needs h > 0 and at least 2 levels".into()));
    }
    let g = ext.g;
    let nu = g - 0.5;
    let k = match kind {
        PoleKind::Regular => {
            let k = 2.0 * (1.0 - s0);
            if (k - k.round()).abs() > POSITION_TOL || k.round() < 1.0 {
                return Err(Error::Domain(format!("s0 = {s0} is not a regular pole position 1 - k/2")));
            }
            k.round() as usize
        }
        PoleKind::Anomalous if ext.is_half() => 0,
        PoleKind::Anomalous => {
            let k = -s0 / nu;
            if (k - k.round()).abs() > POSITION_TOL || k.round() < 1.0 {
                return Err(Error::Domain(format!("s0 = {s0} is not an anomalous pole position (1/2 - g)k")));
            }
            k.round() as usize
        }
    };
    // Singularities of F other than s₀ must stay outside the probe window.
    let mut others: Vec<f64> = Vec::new();
    if kind == PoleKind::Regular {
        for p in pole_table(ext, MAX_TRACE_ORDER)? {
            if p.residue != 0.0 && !(p.kind == PoleKind::Regular && p.k == k) {
                others.push(p.s0);
            }
        }
        if ext.is_half() && ext.theta.is_some() {
            // Log branch point of the θ-extension.
            others.push(0.0);
        }
    } else if ext.is_half() {
        if ext.theta.is_some() {
            others.push(0.0);
        }
    } else {
        let rho = ext.rho()?;
        for j in 1..=MAX_TRACE_ORDER {
            if j != k && anomalous_residue(g, rho, j) != 0.0 {
                others.push(-nu * j as f64);
            }
        }
    }
    for &o in &others {
        if (o - s0).abs() < 2.0 * opts.h {
            return Err(Error::PoleCollision { s0, other: o, h: opts.h });
        }
    }
    let with_d = kind == PoleKind::Regular;
    let points: Vec<f64> = (0..opts.levels)
        .flat_map(|j| {
            let h = opts.h * 0.5f64.powi(j as i32);
            [s0 + h, s0 - h]
        })
        .collect();
    let values = points
        .par_iter()
        .map(|&s| Ok(integral_value(ext, s, opts.n_subtract, with_d, Precision::Double)?.value))
        .collect::<Result<Vec<Complex64>>>()?;
    let mut table: Vec<Vec<Complex64>> = Vec::with_capacity(opts.levels);
    for j in 0..opts.levels {
        let h = opts.h * 0.5f64.powi(j as i32);
        let r = (values[2 * j] - values[2 * j + 1]) * (0.5 * h);
        let mut row = vec![r];
        for m in 1..=j {
            let p = 4f64.powi(m as i32);
            let v = (row[m - 1] * p - table[j - 1][m - 1]) / (p - 1.0);
            row.push(v);
        }
        table.push(row);
    }
    let last = table[opts.levels - 1][opts.levels - 1];
    let prev = table[opts.levels - 2][opts.levels - 2];
    Ok(PoleReport {
        s0,
        residue: last.re,
        kind,
        k,
        method: PoleMethod::Numeric,
        error: Some((last - prev).norm()),
    })
}

/// `Σ e^{-tλ_n}` over a table, the modeled tail, `e^{-tλ₋}`, and 1 for a zero mode.
pub fn heat_trace_table(table: &EigenvalueTable, t: f64, precision: Precision) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("t = {t} must be positive")));
    }
    let tail = TailModel::from_table(table)?;
    let explicit = sum_real(table.entries.iter().map(|e| (-t * e.lambda).exp()), precision);
    let st = t.sqrt();
    let rest = tail.tail_sum(|mu| c64((-t * mu * mu).exp()), |a| c64(0.5 * (PI / t).sqrt() * libm::erfc(a * st)))?;
    let neg = table.negative.map(|l| (-t * l).exp()).unwrap_or(0.0);
    let zero = if table.zero_mode { 1.0 } else { 0.0 };
    Ok(explicit + rest.re + neg + zero)
}

/// Eigenvalue count that makes the explicit part of a heat sum complete at `t`.
pub fn heat_count(t: f64) -> usize {
    ((7.0 / (PI * t.sqrt())).ceil() as usize + 10).max(MIN_EXPLICIT)
}

/// `Tr e^{-tD}`; `n_explicit = None` picks the count from `t` and enforces the budget.
pub fn heat_trace(ext: &ExtensionParams, t: f64, n_explicit: Option<usize>) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("t = {t} must be positive")));
    }
    let n = n_explicit.unwrap_or_else(|| heat_count(t));
    check_budget(n)?;
    let table = eigenvalues(ext, n.max(MIN_EXPLICIT))?;
    heat_trace_table(&table, t, Precision::Double)
}

/// `Tr e^{-tD_{(α,β)}} - Tr e^{-tD_D}` with both sums at the same truncation.
pub fn heat_difference(ext: &ExtensionParams, t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("t = {t} must be positive")));
    }
    let n = heat_count(t);
    check_budget(n)?;
    let d = if ext.is_half() {
        ExtensionParams::dirichlet(0.5)?
    } else {
        ExtensionParams::dirichlet(ext.g)?
    };
    let a = heat_trace_table(&eigenvalues(ext, n)?, t, Precision::Double)?;
    let b = heat_trace_table(&eigenvalues(&d, n)?, t, Precision::Double)?;
    Ok(a - b)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatTerm {
    pub k: usize,
    pub exponent: f64,
    pub coefficient: f64,
    /// `(1/2 - g)k` is a non-positive integer: `Γ` has a pole there and the term shares its
    /// power of `t` with the regular expansion. The coefficient is the finite limit in `g`.
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatExpansion {
    pub constant: f64,
    pub terms: Vec<HeatTerm>,
}

/// `Tr e^{-tD_{(α,β)}} - Tr e^{-tD_D} ~ (g - 1/2) + Σ_k H_k t^{(g-1/2)k}`,
/// `H_k = -Γ((1/2-g)k) ((2g-1)/2π) ρ^k sin(π(2g-1)k/2) = (g - 1/2) ρ^k / Γ(1 + (g-1/2)k)`.
pub fn heat_expansion(ext: &ExtensionParams, k_max: usize) -> Result<HeatExpansion> {
    if ext.is_half() || ext.is_dirichlet() {
        return Ok(HeatExpansion {
            constant: 0.0,
            terms: Vec::new(),
        });
    }
    let nu = ext.nu();
    let rho = ext.rho()?;
    let terms = (1..=k_max)
        .map(|k| {
            let x = nu * k as f64;
            HeatTerm {
                k,
                exponent: x,
                coefficient: nu * rho.powi(k as i32) * rgamma(1.0 + x),
                degenerate: is_nonpositive_integer(-x),
            }
        })
        .collect();
    Ok(HeatExpansion { constant: nu, terms })
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && (x - x.round()).abs() < 1e-12
}

/// `Res_{s₀} Γ(s)ζ(s) = Γ(s₀)·Res_{s₀} ζ`: the coefficient of `t^{-s₀}` in the heat trace.
pub fn heat_coeff_from_residue(pole: &PoleReport) -> Result<f64> {
    if is_nonpositive_integer(pole.s0) {
        return Err(Error::Domain(format!(
            "Γ has a pole at s0 = {}; the heat coefficient is not fixed by the residue",
            pole.s0
        )));
    }
    Ok(gamma(pole.s0) * pole.residue)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidueRatio {
    pub k: usize,
    pub residue: f64,
    pub residue_scaled: f64,
    pub expected_ratio: f64,
    /// `|Res' - c^{(2g-1)k} Res| / max(|Res'|, |Res|)`, zero when both vanish.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaScalingCheck {
    pub s: f64,
    pub zeta: f64,
    pub zeta_scaled: f64,
    pub expected: f64,
    pub relative_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub c: f64,
    pub rho: f64,
    pub rho_scaled: f64,
    /// `|ρ' c^{1-2g} - ρ| / |ρ|`.
    pub rho_residual: f64,
    pub residues: Vec<ResidueRatio>,
    pub zeta: Option<ZetaScalingCheck>,
}

/// Eigenvalues used by the numeric spot check in [`scaling_check`].
pub const SCALING_EIGENVALUES: usize = 4000;

/// Scaling covariance under `u(x) ↦ c^{1/2} u(cx)`.
///
/// Formula level: `ρ' = c^{2g-1} ρ` and anomalous residues scale by `c^{(2g-1)k}`.
/// Numerically: the spectrum of the image on `(0, 1/c)` gives `ζ'(1) = c^{-2} ζ(1)`.
pub fn scaling_check(ext: &ExtensionParams, c: f64, k_max: usize, numeric: bool) -> Result<ScalingReport> {
    let scaled = ext.scale(c)?;
    let g = ext.g;
    let rho = ext.rho()?;
    let rho_scaled = scaled.rho()?;
    let rho_residual = if rho == 0.0 || rho.is_infinite() {
        if rho_scaled == rho {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (rho_scaled * c.powf(1.0 - 2.0 * g) - rho).abs() / rho.abs()
    };
    let mut residues = Vec::new();
    if rho.is_finite() {
        for k in 1..=k_max {
            let r = anomalous_residue(g, rho, k);
            let rs = anomalous_residue(g, rho_scaled, k);
            let expected_ratio = c.powf((2.0 * g - 1.0) * k as f64);
            let scale = r.abs().max(rs.abs());
            let residual = if scale == 0.0 { 0.0 } else { (rs - expected_ratio * r).abs() / scale };
            residues.push(ResidueRatio {
                k,
                residue: r,
                residue_scaled: rs,
                expected_ratio,
                residual,
            });
        }
    }
    let zeta = if numeric {
        let s = 1.0;
        let a = zeta_sum_table(&eigenvalues(ext, SCALING_EIGENVALUES)?, c64(s), Precision::Double)?
            .value
            .re;
        let b = zeta_sum_table(
            &eigenvalues_on_interval(&scaled, 1.0 / c, SCALING_EIGENVALUES)?,
            c64(s),
            Precision::Double,
        )?
        .value
        .re;
        let expected = c.powf(-2.0 * s) * a;
        Some(ZetaScalingCheck {
            s,
            zeta: a,
            zeta_scaled: b,
            expected,
            relative_error: (b - expected).abs() / expected.abs(),
        })
    } else {
        None
    };
    Ok(ScalingReport {
        c,
        rho,
        rho_scaled,
        rho_residual,
        residues,
        zeta,
    })
}
