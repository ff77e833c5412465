//! Internal numerical building blocks.

pub mod dd;
pub mod quad;
pub mod roots;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// 1/Γ(x), zero at the poles of Γ.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        0.0
    } else {
        1.0 / libm::tgamma(x)
    }
}
