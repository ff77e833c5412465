//! Self-adjoint extensions `(g, α, β)`, the coupling `ρ`, the mixing function `τ(λ)`,
//! boundary coefficients and the scaling isometry.

use crate::error::{Error, Result};
use crate::numeric::{gamma, EULER_GAMMA};
use crate::specfun::{jv_scaled, reduced_j, SWITCH_RADIUS};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

/// Smallest admissible `g - 1/2` away from the logarithmic case.
pub const MIN_NU: f64 = 1e-6;
const ZERO_MODE_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtensionParams {
    pub g: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
}

fn validate_g(g: f64) -> Result<()> {
    if g == 0.5 || (0.5 + MIN_NU..1.5).contains(&g) {
        Ok(())
    } else {
        Err(Error::Domain(format!("g = {g} must be 1/2 or lie in [1/2 + 1e-6, 3/2)")))
    }
}

/// `2^{2g-1} Γ(1/2+g) / Γ(3/2-g)`, the factor turning `β/α` into `ρ`.
pub fn rho_factor(g: f64) -> f64 {
    (2.0f64).powf(2.0 * g - 1.0) * gamma(0.5 + g) / gamma(1.5 - g)
}

/// `ρ` of the extension with `α = β`; a root below the first Bessel zero exists iff `ρ` is smaller.
pub fn rho_crit(g: f64) -> f64 {
    rho_factor(g)
}

impl ExtensionParams {
    /// Canonicalizes `(α, β)` to unit norm with `α ≥ 0` (and `β = 1` when `α = 0`).
    pub fn new(g: f64, alpha: f64, beta: f64) -> Result<ExtensionParams> {
        validate_g(g)?;
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::Domain("alpha and beta must be finite".into()));
        }
        let n = alpha.hypot(beta);
        if n == 0.0 {
            return Err(Error::Domain("alpha and beta cannot both vanish".into()));
        }
        // Already-normalized input is kept bit-for-bit so canonicalization is a fixed point.
        let (mut a, mut b) = if (n - 1.0).abs() <= 4.0 * f64::EPSILON {
            (alpha, beta)
        } else {
            (alpha / n, beta / n)
        };
        if a < 0.0 {
            a = -a;
            b = -b;
        }
        if a == 0.0 {
            a = 0.0;
            b = 1.0;
        }
        let theta = if g == 0.5 && a != 0.0 { Some(-b / a + LN_2 - EULER_GAMMA) } else { None };
        Ok(ExtensionParams { g, alpha: a, beta: b, theta })
    }

    pub fn dirichlet(g: f64) -> Result<ExtensionParams> {
        ExtensionParams::new(g, 0.0, 1.0)
    }

    pub fn neumann(g: f64) -> Result<ExtensionParams> {
        ExtensionParams::new(g, 1.0, 0.0)
    }

    /// Extension with the given `ρ`; an infinite `ρ` gives the D-extension.
    pub fn from_rho(g: f64, rho: f64) -> Result<ExtensionParams> {
        validate_g(g)?;
        if g == 0.5 {
            return Err(Error::Domain("at g = 1/2 the extension is labelled by theta, not rho".into()));
        }
        if rho.is_infinite() {
            return ExtensionParams::dirichlet(g);
        }
        if rho.is_nan() {
            return Err(Error::Domain("rho is NaN".into()));
        }
        ExtensionParams::new(g, 1.0, rho / rho_factor(g))
    }

    /// `g = 1/2` extension with `θ = -β/α + log 2 - γ`; `θ = -∞` gives the D-extension.
    pub fn from_theta(theta: f64) -> Result<ExtensionParams> {
        if theta == f64::NEG_INFINITY {
            return ExtensionParams::dirichlet(0.5);
        }
        if !theta.is_finite() {
            return Err(Error::Domain(format!("theta = {theta} must be finite or -inf")));
        }
        let mut e = ExtensionParams::new(0.5, 1.0, LN_2 - EULER_GAMMA - theta)?;
        e.theta = Some(theta);
        Ok(e)
    }

    pub fn nu(&self) -> f64 {
        self.g - 0.5
    }

    pub fn is_half(&self) -> bool {
        self.g == 0.5
    }

    pub fn is_dirichlet(&self) -> bool {
        self.alpha == 0.0
    }

    pub fn is_neumann(&self) -> bool {
        self.beta == 0.0
    }

    /// `β/α`, infinite for the D-extension.
    pub fn beta_over_alpha(&self) -> f64 {
        if self.alpha == 0.0 {
            f64::INFINITY
        } else {
            self.beta / self.alpha
        }
    }

    /// Zero mode: `α = β` for `g > 1/2`, `β = 0` at `g = 1/2`.
    pub fn has_zero_mode(&self) -> bool {
        if self.is_half() {
            self.beta.abs() < ZERO_MODE_TOL
        } else {
            (self.alpha - self.beta).abs() < ZERO_MODE_TOL
        }
    }

    pub fn rho(&self) -> Result<f64> {
        if self.is_half() {
            return Err(Error::Domain("rho is undefined at g = 1/2; use theta".into()));
        }
        if self.alpha == 0.0 {
            return Ok(f64::INFINITY);
        }
        Ok(self.beta / self.alpha * rho_factor(self.g))
    }

    /// Image under `u(x) ↦ c^{1/2} u(cx)`: `α' ∝ c^{-g} α`, `β' ∝ c^{g-1} β`.
    pub fn scale(&self, c: f64) -> Result<ExtensionParams> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Domain(format!("scale factor {c} must be positive")));
        }
        if self.is_half() {
            return Err(Error::Domain("the scaling map is implemented for 1/2 < g < 3/2".into()));
        }
        if c == 1.0 {
            return Ok(*self);
        }
        ExtensionParams::new(self.g, c.powf(-self.g) * self.alpha, c.powf(self.g - 1.0) * self.beta)
    }

    /// Mixing function `τ = [1 - ρ μ^{1-2g} J_{g-1/2}(μ)/J_{1/2-g}(μ)]^{-1}`.
    pub fn tau(&self, p: &SpectralPoint) -> Result<Complex64> {
        if self.is_half() {
            return Err(Error::Domain("tau is defined for 1/2 < g < 3/2".into()));
        }
        let rho = self.rho()?;
        tau_from_rho(self.g, rho, p)
    }
}

pub(crate) fn tau_from_rho(g: f64, rho: f64, p: &SpectralPoint) -> Result<Complex64> {
    if rho.is_infinite() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if rho == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let nu = g - 0.5;
    let mu = p.mu;
    let (a, b) = if mu.norm() < SWITCH_RADIUS {
        let a = reduced_j(-nu, mu);
        (a, reduced_j(nu, mu) * (rho * 2f64.powf(-2.0 * nu)))
    } else {
        let a = jv_scaled(-nu, mu);
        (a, jv_scaled(nu, mu) * (mu.powf(-2.0 * nu) * rho))
    };
    let d = a - b;
    if d.norm() < 1e-10 * (a.norm() + b.norm()) {
        return Err(Error::NearEigenvalue { lambda: p.lambda.re });
    }
    Ok(a / d)
}

/// Spectral parameter `λ` with branch `μ = +√λ`, `-π/2 < arg μ ≤ π/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub lambda: Complex64,
    pub mu: Complex64,
    pub sigma: i8,
}

impl SpectralPoint {
    /// For `λ` off the non-negative real axis.
    pub fn from_lambda(lambda: Complex64) -> Result<SpectralPoint> {
        if lambda.im == 0.0 && lambda.re >= 0.0 {
            return Err(Error::Domain("real non-negative lambda needs an explicit sigma".into()));
        }
        let l = if lambda.im == 0.0 { Complex64::new(lambda.re, 0.0) } else { lambda };
        let mu = l.sqrt();
        Ok(SpectralPoint {
            lambda: l,
            mu,
            sigma: if mu.im > 0.0 { 1 } else { -1 },
        })
    }

    /// Negative real `λ`, the usual probe locus.
    pub fn negative(lambda: f64) -> Result<SpectralPoint> {
        if !(lambda < 0.0) {
            return Err(Error::Domain(format!("lambda = {lambda} is not negative")));
        }
        SpectralPoint::from_lambda(Complex64::new(lambda, 0.0))
    }

    /// Any `λ`; `sigma` is used only when `λ` is real and non-negative.
    pub fn from_lambda_with_sigma(lambda: Complex64, sigma: i8) -> Result<SpectralPoint> {
        if sigma != 1 && sigma != -1 {
            return Err(Error::Domain(format!("sigma must be +1 or -1, got {sigma}")));
        }
        if lambda.im == 0.0 && lambda.re >= 0.0 {
            let mu = Complex64::new(lambda.re.sqrt(), 0.0);
            return Ok(SpectralPoint {
                lambda: Complex64::new(lambda.re, 0.0),
                mu,
                sigma,
            });
        }
        SpectralPoint::from_lambda(lambda)
    }

    pub fn from_mu(mu: Complex64, sigma_if_real: i8) -> Result<SpectralPoint> {
        let arg = mu.arg();
        if mu.norm() == 0.0 || !(arg > -std::f64::consts::FRAC_PI_2 && arg <= std::f64::consts::FRAC_PI_2) {
            return Err(Error::Domain(format!("mu = {mu} is outside the principal half plane")));
        }
        let sigma = if mu.im > 0.0 {
            1
        } else if mu.im < 0.0 {
            -1
        } else {
            sigma_if_real
        };
        Ok(SpectralPoint { lambda: mu * mu, mu, sigma })
    }
}

/// Boundary functionals `(C₁, C₂)` of the small-x behaviour `(C₁ x^g + C₂ x^{1-g})/√(2g-1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    pub c1: Complex64,
    pub c2: Complex64,
}

impl BoundaryData {
    /// `α C₁ + β C₂`, zero for functions in the extension's domain.
    pub fn condition_residual(&self, ext: &ExtensionParams) -> Complex64 {
        self.c1 * ext.alpha + self.c2 * ext.beta
    }
}

fn check_open_g(g: f64) -> Result<()> {
    if (0.5 + MIN_NU..1.5).contains(&g) {
        Ok(())
    } else {
        Err(Error::Domain(format!("g = {g} must lie in (1/2, 3/2)")))
    }
}

/// `(C₁, C₂)` of `coeff_d·√x J_{g-1/2}(μx) + coeff_n·√x J_{1/2-g}(μx)`.
pub fn boundary_coefficients(g: f64, mu: Complex64, coeff_d: Complex64, coeff_n: Complex64) -> Result<BoundaryData> {
    check_open_g(g)?;
    let nu = g - 0.5;
    let s = (2.0 * g - 1.0).sqrt();
    // √x J_ν(μx) = x^g (μ/2)^ν / Γ(1+ν) + …
    let a = (mu * 0.5).powf(nu) * (s / gamma(1.0 + nu));
    let b = (mu * 0.5).powf(-nu) * (s / gamma(1.0 - nu));
    Ok(BoundaryData {
        c1: coeff_d * a,
        c2: coeff_n * b,
    })
}

/// Least-squares extraction of `(C₁, C₂)` from samples `(x, φ(x))` taken near `x = 0`.
///
/// Extra powers `x^{g+2}` and `x^{3-g}` absorb the leading corrections of solutions of
/// `(D - λ)φ = f` with smooth `f`.
pub fn fit_boundary_coefficients(g: f64, samples: &[(f64, Complex64)]) -> Result<BoundaryData> {
    fit_boundary_coefficients_with(g, samples, &[g + 2.0, 3.0 - g, 2.0, 3.0])
}

/// As [`fit_boundary_coefficients`] with caller-chosen nuisance exponents besides `g` and `1-g`.
pub fn fit_boundary_coefficients_with(g: f64, samples: &[(f64, Complex64)], nuisance: &[f64]) -> Result<BoundaryData> {
    check_open_g(g)?;
    let mut exps = vec![g, 1.0 - g];
    exps.extend_from_slice(nuisance);
    let n = samples.len();
    if n < exps.len() + 2 {
        return Err(Error::MalformedInput(format!("need at least {} samples, got {n}", exps.len() + 2)));
    }
    let xmax = samples.iter().fold(0.0f64, |m, s| m.max(s.0));
    let col_scale: Vec<f64> = exps.iter().map(|e| xmax.powf(*e)).collect();
    let a = DMatrix::from_fn(n, exps.len(), |i, j| (samples[i].0).powf(exps[j]) / col_scale[j]);
    let sv = a.clone().svd(true, true);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); exps.len()];
    let mut resid = 0.0f64;
    let mut norm = 0.0f64;
    for part in 0..2 {
        let rhs = DVector::from_fn(n, |i, _| if part == 0 { samples[i].1.re } else { samples[i].1.im });
        let sol = sv.solve(&rhs, 1e-14).map_err(|e| Error::MalformedInput(e.to_string()))?;
        let r = &a * &sol - &rhs;
        resid = resid.max(r.amax());
        norm = norm.max(rhs.amax());
        for j in 0..exps.len() {
            let v = sol[j] / col_scale[j];
            if part == 0 {
                coeffs[j].re = v;
            } else {
                coeffs[j].im = v;
            }
        }
    }
    if resid > 1e-7 * norm.max(1e-300) {
        return Err(Error::MalformedInput(format!(
            "boundary fit residual {resid:e} too large for the small-x model"
        )));
    }
    let s = (2.0 * g - 1.0).sqrt();
    Ok(BoundaryData {
        c1: coeffs[0] * s,
        c2: coeffs[1] * s,
    })
}
