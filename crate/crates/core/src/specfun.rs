//! Real-order Bessel functions for complex arguments with `|arg z| < π`.
//!
//! Small arguments use the ascending series summed in double-double arithmetic;
//! `|z| >= SWITCH_RADIUS` uses the Hankel expansions at optimal truncation.
//! The `*_scaled` variants return the value multiplied by `exp(-|Im z|)`.

use crate::error::{Error, Result};
use crate::numeric::dd::{CDd, Dd};
use crate::numeric::{rgamma, EULER_GAMMA};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

/// Largest order accepted by the checked entry points.
pub const MAX_ORDER: f64 = 2.5;
/// Radius separating the ascending series from the Hankel expansion.
pub const SWITCH_RADIUS: f64 = 20.0;

const EULER_GAMMA_LO: f64 = -4.942_915_152_430_645e-18;
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Order(f64);

impl Order {
    pub fn new(nu: f64) -> Result<Order> {
        if !nu.is_finite() || nu.abs() > MAX_ORDER {
            return Err(Error::Domain(format!("Bessel order {nu} outside [-5/2, 5/2]")));
        }
        Ok(Order(nu))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ray {
    PositiveReal,
    /// `arg z = π/4`
    UpperDiagonal,
    /// `arg z = -π/4`
    LowerDiagonal,
    PositiveImaginary,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayArgument {
    magnitude: f64,
    ray: Ray,
}

impl RayArgument {
    pub fn new(magnitude: f64, ray: Ray) -> Result<RayArgument> {
        if !(magnitude > 0.0 && magnitude.is_finite()) {
            return Err(Error::Domain(format!("ray argument magnitude {magnitude} must be positive")));
        }
        Ok(RayArgument { magnitude, ray })
    }

    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }

    pub fn ray(&self) -> Ray {
        self.ray
    }

    pub fn z(&self) -> Complex64 {
        let arg = match self.ray {
            Ray::PositiveReal => 0.0,
            Ray::UpperDiagonal => FRAC_PI_4,
            Ray::LowerDiagonal => -FRAC_PI_4,
            Ray::PositiveImaginary => FRAC_PI_2,
        };
        Complex64::from_polar(self.magnitude, arg)
    }

    /// Sign of `Im z`; `None` on the real axis.
    pub fn sigma(&self) -> Option<i8> {
        match self.ray {
            Ray::PositiveReal => None,
            Ray::LowerDiagonal => Some(-1),
            _ => Some(1),
        }
    }
}

pub fn bessel_j(nu: Order, z: RayArgument) -> Result<Complex64> {
    Ok(jv(nu.0, z.z()))
}

pub fn bessel_y(nu: Order, z: RayArgument) -> Result<Complex64> {
    Ok(yv(nu.0, z.z()))
}

pub fn bessel_j_prime(nu: Order, z: RayArgument) -> Result<Complex64> {
    Ok(jv_prime(nu.0, z.z()))
}

pub fn bessel_i(nu: Order, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("bessel_i needs a positive argument, got {x}")));
    }
    Ok(iv(nu.0, x))
}

fn as_integer(nu: f64) -> Option<i32> {
    if nu == nu.round() && nu.abs() < 1e6 {
        Some(nu as i32)
    } else {
        None
    }
}

fn neg_one_pow(n: i32) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn scale_factor(z: Complex64) -> f64 {
    (-z.im.abs()).exp()
}

/// Sums `Σ w^k / (k! (ν+1)_k)` and `Σ (ν+2k) w^k / (k! (ν+1)_k)` with `w = -z²/4`.
fn ascending(nu: f64, z: Complex64) -> (CDd, CDd) {
    let w = {
        let s = CDd::sqr_c64(z);
        CDd::new(s.re.mul_f64(-0.25), s.im.mul_f64(-0.25))
    };
    let mut t = CDd::from_c64(Complex64::new(1.0, 0.0));
    let mut s = t;
    let mut sd = CDd::from_c64(Complex64::new(nu, 0.0));
    let peak = 0.5 * z.norm();
    for k in 1..400 {
        let kf = k as f64;
        let denom = Dd::new(kf) * Dd::sum(nu, kf);
        t = (t * w).div_real(denom);
        s = s + t;
        sd = sd + t.scale(Dd::sum(nu, 2.0 * kf));
        let tn = t.norm_f64();
        if kf > peak && tn <= 1e-33 * s.norm_f64().max(1e-300) {
            break;
        }
    }
    (s, sd)
}

/// `(z/2)^ν` on the principal branch.
fn half_pow(nu: f64, z: Complex64) -> Complex64 {
    if nu == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    if z == Complex64::new(0.0, 0.0) {
        return if nu > 0.0 { z } else { Complex64::new(f64::INFINITY, 0.0) };
    }
    ((z * 0.5).ln() * nu).exp()
}

/// Entire function `(z/2)^{-ν} J_ν(z) = Σ (-z²/4)^k / (k! Γ(ν+k+1))`.
pub fn reduced_j(nu: f64, z: Complex64) -> Complex64 {
    if let Some(n) = as_integer(nu) {
        if n < 0 {
            let m = -n;
            return reduced_j(m as f64, z) * (z * 0.5).powi(2 * m) * neg_one_pow(m);
        }
    }
    if z.norm() < SWITCH_RADIUS {
        let (s, _) = ascending(nu, z);
        s.to_c64() * rgamma(nu + 1.0)
    } else {
        jv(nu, z) / half_pow(nu, z)
    }
}

struct Hankel {
    h1: Complex64,
    h2: Complex64,
    h1p: Complex64,
    h2p: Complex64,
}

/// Scaled Hankel functions and derivatives from the large-argument expansion.
fn hankel_scaled(nu: f64, z: Complex64) -> Hankel {
    let inv = (z * 2.0).inv();
    let up = I * inv;
    let um = -I * inv;
    let mu4 = 4.0 * nu * nu;
    let mut a = 1.0;
    let (mut pp, mut pm) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
    let (mut sp, mut sm) = (pp, pm);
    let (mut dp, mut dm) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    let zinv = z.inv();
    let r = inv.norm();
    let mut last = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        a *= (mu4 - odd * odd) / (4.0 * kf);
        if a == 0.0 {
            break;
        }
        let mag = a.abs() * r.powi(k);
        if mag > last {
            break;
        }
        last = mag;
        pp *= up;
        pm *= um;
        let tp = pp * a;
        let tm = pm * a;
        sp += tp;
        sm += tm;
        dp -= tp * (kf * zinv);
        dm -= tm * (kf * zinv);
        if mag < 1e-18 * sp.norm() {
            break;
        }
    }
    let pref = (Complex64::new(2.0 / PI, 0.0) / z).sqrt();
    let chi_re = z.re - (0.5 * nu + 0.25) * PI;
    let aim = z.im.abs();
    let e1 = Complex64::from_polar((-z.im - aim).exp(), chi_re) * pref;
    let e2 = Complex64::from_polar((z.im - aim).exp(), -chi_re) * pref;
    let half_zinv = zinv * 0.5;
    Hankel {
        h1: e1 * sp,
        h2: e2 * sm,
        h1p: e1 * (I * sp - sp * half_zinv + dp),
        h2p: e2 * (-I * sm - sm * half_zinv + dm),
    }
}

/// `J_ν(z)·exp(-|Im z|)`.
pub fn jv_scaled(nu: f64, z: Complex64) -> Complex64 {
    if let Some(n) = as_integer(nu) {
        if n < 0 {
            return jv_scaled(-nu, z) * neg_one_pow(-n);
        }
    }
    if z.norm() < SWITCH_RADIUS {
        let (s, _) = ascending(nu, z);
        half_pow(nu, z) * s.to_c64() * (rgamma(nu + 1.0) * scale_factor(z))
    } else {
        let h = hankel_scaled(nu, z);
        (h.h1 + h.h2) * 0.5
    }
}

pub fn jv(nu: f64, z: Complex64) -> Complex64 {
    jv_scaled(nu, z) * z.im.abs().exp()
}

/// Scaled `(J_ν, J'_ν)`.
pub fn jv_and_prime_scaled(nu: f64, z: Complex64) -> (Complex64, Complex64) {
    if let Some(n) = as_integer(nu) {
        if n < 0 {
            let (j, jp) = jv_and_prime_scaled(-nu, z);
            let s = neg_one_pow(-n);
            return (j * s, jp * s);
        }
    }
    if z.norm() < SWITCH_RADIUS {
        let (s, sd) = ascending(nu, z);
        let c = half_pow(nu, z) * (rgamma(nu + 1.0) * scale_factor(z));
        (c * s.to_c64(), c * sd.to_c64() / z)
    } else {
        let h = hankel_scaled(nu, z);
        ((h.h1 + h.h2) * 0.5, (h.h1p + h.h2p) * 0.5)
    }
}

pub fn jv_prime(nu: f64, z: Complex64) -> Complex64 {
    jv_and_prime_scaled(nu, z).1 * z.im.abs().exp()
}

/// Scaled `(Y_0, Y_1)` from the logarithmic series.
fn y01_series_scaled(z: Complex64) -> (Complex64, Complex64) {
    let s2 = CDd::sqr_c64(z);
    let u = CDd::new(s2.re.mul_f64(0.25), s2.im.mul_f64(0.25));
    let mu = CDd::new(-u.re, -u.im);
    let gamma = Dd {
        hi: EULER_GAMMA,
        lo: EULER_GAMMA_LO,
    };

    // Y_0 tail: Σ_{k≥1} (-1)^{k+1} H_k u^k / (k!)²
    let mut c = CDd::from_c64(Complex64::new(1.0, 0.0));
    let mut h = Dd::ZERO;
    let mut s0 = CDd::ZERO;
    // Y_1 tail: Σ_{k≥0} (ψ(k+1)+ψ(k+2)) (-u)^k / (k!(k+1)!)
    let mut d = CDd::from_c64(Complex64::new(1.0, 0.0));
    let mut hk = Dd::ZERO;
    let mut s1 = d.scale(Dd::ONE - gamma.mul_f64(2.0));
    let peak = 0.5 * z.norm();
    for k in 1..400 {
        let kf = k as f64;
        let rk = Dd::ONE / Dd::new(kf);
        c = (c * mu).div_real(Dd::prod(kf, kf));
        h = h + rk;
        s0 = s0 - c.scale(h);
        d = (d * mu).div_real(Dd::prod(kf, kf + 1.0));
        hk = hk + rk;
        let hk1 = hk + Dd::ONE / Dd::new(kf + 1.0);
        let t1 = d.scale(hk + hk1 - gamma.mul_f64(2.0));
        s1 = s1 + t1;
        let tn = c.norm_f64().max(t1.norm_f64());
        if kf > peak && tn <= 1e-33 * s0.norm_f64().max(s1.norm_f64()).max(1e-300) {
            break;
        }
    }
    let (a0, _) = ascending(0.0, z);
    let (a1, _) = ascending(1.0, z);
    let j0 = a0.to_c64();
    let j1 = a1.to_c64() * z * 0.5;
    let lg = (z * 0.5).ln();
    let y0 = ((lg + EULER_GAMMA) * j0 + s0.to_c64()) * (2.0 / PI);
    let y1 = -(z.inv() * (2.0 / PI)) + lg * j1 * (2.0 / PI) - z * 0.5 * s1.to_c64() / PI;
    let sc = scale_factor(z);
    (y0 * sc, y1 * sc)
}

fn yn_scaled(n: i32, z: Complex64) -> (Complex64, Complex64) {
    let m = n.unsigned_abs() as i32;
    let (y0, y1) = y01_series_scaled(z);
    let (mut a, mut b) = (y0, y1);
    for k in 1..m {
        let c = b * (2.0 * k as f64) / z - a;
        a = b;
        b = c;
    }
    let (y, yp) = match m {
        0 => (y0, -y1),
        _ => {
            let ym1 = a;
            let y = if m == 1 { y1 } else { b };
            (y, ym1 - y * (m as f64) / z)
        }
    };
    let s = if n < 0 { neg_one_pow(m) } else { 1.0 };
    (y * s, yp * s)
}

/// Scaled `(Y_ν, Y'_ν)`.
pub fn yv_and_prime_scaled(nu: f64, z: Complex64) -> (Complex64, Complex64) {
    if z.norm() >= SWITCH_RADIUS {
        let h = hankel_scaled(nu, z);
        let two_i = Complex64::new(0.0, 2.0);
        return ((h.h1 - h.h2) / two_i, (h.h1p - h.h2p) / two_i);
    }
    match as_integer(nu) {
        Some(n) => yn_scaled(n, z),
        None => {
            let (jp, jpp) = jv_and_prime_scaled(nu, z);
            let (jm, jmp) = jv_and_prime_scaled(-nu, z);
            let (s, c) = (nu * PI).sin_cos();
            ((jp * c - jm) / s, (jpp * c - jmp) / s)
        }
    }
}

pub fn yv_scaled(nu: f64, z: Complex64) -> Complex64 {
    yv_and_prime_scaled(nu, z).0
}

pub fn yv(nu: f64, z: Complex64) -> Complex64 {
    yv_scaled(nu, z) * z.im.abs().exp()
}

pub fn yv_prime(nu: f64, z: Complex64) -> Complex64 {
    yv_and_prime_scaled(nu, z).1 * z.im.abs().exp()
}

/// `J_a(z)/J_b(z)`, free of overflow for large `|Im z|`.
pub fn jv_ratio(a: f64, b: f64, z: Complex64) -> Complex64 {
    if z.norm() < SWITCH_RADIUS {
        half_pow(a - b, z) * reduced_j(a, z) / reduced_j(b, z)
    } else {
        jv_scaled(a, z) / jv_scaled(b, z)
    }
}

/// `I_ν(x)·exp(-x)` for `x > 0`.
pub fn iv_scaled(nu: f64, x: f64) -> f64 {
    if let Some(n) = as_integer(nu) {
        if n < 0 {
            return iv_scaled(-nu, x);
        }
    }
    if x <= 25.0 {
        let w = 0.25 * x * x;
        let mut t = rgamma(nu + 1.0);
        let mut k = 0.0;
        let mut s = t;
        while k < 500.0 {
            k += 1.0;
            t *= w / (k * (nu + k));
            s += t;
            if k > x && t.abs() < 1e-17 * s.abs() {
                break;
            }
        }
        s * (0.5 * x).powf(nu) * (-x).exp()
    } else {
        let mu4 = 4.0 * nu * nu;
        let mut a = 1.0;
        let mut s = 1.0;
        let mut last = 1.0;
        let inv = 1.0 / (2.0 * x);
        let mut p = 1.0;
        for k in 1..200 {
            let kf = k as f64;
            let odd = 2.0 * kf - 1.0;
            a *= (mu4 - odd * odd) / (4.0 * kf);
            p *= -inv;
            let t = a * p;
            if t.abs() > last || t == 0.0 {
                break;
            }
            last = t.abs();
            s += t;
            if last < 1e-18 {
                break;
            }
        }
        s / (2.0 * PI * x).sqrt()
    }
}

pub fn iv(nu: f64, x: f64) -> f64 {
    iv_scaled(nu, x) * x.exp()
}

/// `K_ν(x)·exp(x)` for `x > 0` by the trapezoidal rule on `∫₀^∞ exp(-x cosh t) cosh νt dt`.
pub fn kv_scaled(nu: f64, x: f64) -> f64 {
    let h = (0.2 / x.sqrt()).min(0.1);
    let mut s = 0.5;
    for j in 1..100_000 {
        let t = j as f64 * h;
        let term = (-x * (t.cosh() - 1.0)).exp() * (nu * t).cosh();
        s += term;
        if term < 1e-18 * s {
            break;
        }
    }
    s * h
}

pub fn kv(nu: f64, x: f64) -> f64 {
    kv_scaled(nu, x) * (-x).exp()
}

/// Hankel symbol `⟨ν,k⟩ = Γ(1/2+ν+k) / (k! Γ(1/2+ν-k))`, via the product form that is even in ν.
pub fn hankel_symbol(nu: f64, k: usize) -> f64 {
    let mu4 = 4.0 * nu * nu;
    let mut a = 1.0;
    for j in 1..=k {
        let odd = 2.0 * j as f64 - 1.0;
        a *= (mu4 - odd * odd) / (4.0 * j as f64);
    }
    a
}

/// `(-iσ/2)^k` with exactly zero real or imaginary part.
pub fn neg_i_sigma_half_pow(k: usize, sigma: i8) -> Complex64 {
    let mag = 0.5f64.powi(k as i32) * if sigma < 0 && k % 2 == 1 { -1.0 } else { 1.0 };
    match k % 4 {
        0 => Complex64::new(mag, 0.0),
        1 => Complex64::new(0.0, -mag),
        2 => Complex64::new(-mag, 0.0),
        _ => Complex64::new(0.0, mag),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HankelKind {
    /// `P - iσQ`
    PQ,
    /// `R - iσS = (P - iσQ) + T`
    RS,
    /// `T` with the phase of the same half plane as `PQ`
    T,
}

/// Coefficients `c_k` of a Hankel series in powers of `1/z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HankelSeries {
    pub nu: f64,
    pub sigma: i8,
    pub kind: HankelKind,
    pub coefficients: Vec<Complex64>,
}

impl HankelSeries {
    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        let w = z.inv();
        self.coefficients.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * w + c)
    }
}

fn check_series_args(sigma: i8, k: usize) -> Result<()> {
    if sigma != 1 && sigma != -1 {
        return Err(Error::Domain(format!("sigma must be +1 or -1, got {sigma}")));
    }
    if k > 40 {
        return Err(Error::Domain(format!("Hankel truncation {k} exceeds 40")));
    }
    Ok(())
}

pub fn hankel_pq(nu: f64, sigma: i8, k_max: usize) -> Result<HankelSeries> {
    check_series_args(sigma, k_max)?;
    let coefficients = (0..=k_max).map(|k| neg_i_sigma_half_pow(k, sigma) * hankel_symbol(nu, k)).collect();
    Ok(HankelSeries {
        nu,
        sigma,
        kind: HankelKind::PQ,
        coefficients,
    })
}

pub fn hankel_t(nu: f64, sigma: i8, k_max: usize) -> Result<HankelSeries> {
    check_series_args(sigma, k_max)?;
    let coefficients = (0..=k_max)
        .map(|k| {
            if k == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                neg_i_sigma_half_pow(k, sigma) * ((2 * k - 1) as f64 * hankel_symbol(nu, k - 1))
            }
        })
        .collect();
    Ok(HankelSeries {
        nu,
        sigma,
        kind: HankelKind::T,
        coefficients,
    })
}

pub fn hankel_rs(nu: f64, sigma: i8, k_max: usize) -> Result<HankelSeries> {
    let pq = hankel_pq(nu, sigma, k_max)?;
    let t = hankel_t(nu, sigma, k_max)?;
    let coefficients = pq.coefficients.iter().zip(&t.coefficients).map(|(a, b)| a + b).collect();
    Ok(HankelSeries {
        nu,
        sigma,
        kind: HankelKind::RS,
        coefficients,
    })
}
