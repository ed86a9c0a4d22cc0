//! Special functions. Evaluated in `f64` through `statrs` and converted back.

use crate::real::Real;
use statrs::function::{beta as sbeta, erf as serf, gamma as sgamma};

pub fn ln_gamma<F: Real>(x: F) -> F {
    F::lit(sgamma::ln_gamma(x.to_f64x()))
}

/// Gamma function, including negative non-integer arguments.
pub fn gamma<F: Real>(x: F) -> F {
    F::lit(sgamma::gamma(x.to_f64x()))
}

/// 1/Γ(x), which vanishes at the poles 0, -1, -2, ...
pub fn rgamma<F: Real>(x: F) -> F {
    let xf = x.to_f64x();
    if xf <= 0.0 && xf == xf.floor() {
        return F::zero();
    }
    if xf > 170.0 {
        return F::lit((-sgamma::ln_gamma(xf)).exp());
    }
    F::lit(1.0 / sgamma::gamma(xf))
}

fn stirling_tail(z: f64) -> f64 {
    let z2 = z * z;
    let inv = 1.0 / z;
    inv * (1.0 / 12.0
        - (1.0 / 360.0) / z2
        + (1.0 / 1260.0) / (z2 * z2)
        - (1.0 / 1680.0) / (z2 * z2 * z2)
        + (1.0 / 1188.0) / (z2 * z2 * z2 * z2))
}

/// ln Γ(x+d) − ln Γ(x) for x > 0, x + d > 0 without cancellation at large x.
pub fn ln_gamma_ratio<F: Real>(x: F, d: F) -> F {
    F::lit(ln_gamma_ratio_f64(x.to_f64x(), d.to_f64x()))
}

pub(crate) fn ln_gamma_ratio_f64(x: f64, d: f64) -> f64 {
    if d == 0.0 {
        return 0.0;
    }
    let mut shift = 0.0;
    let mut x = x;
    while x < 12.0 || x + d < 12.0 {
        shift -= (d / x).ln_1p();
        x += 1.0;
    }
    let main = (x + d - 0.5) * (d / x).ln_1p() + d * x.ln() - d;
    shift + main + stirling_tail(x + d) - stirling_tail(x)
}

pub fn erf<F: Real>(x: F) -> F {
    F::lit(serf::erf(x.to_f64x()))
}

pub fn erfc<F: Real>(x: F) -> F {
    F::lit(serf::erfc(x.to_f64x()))
}

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_p<F: Real>(a: F, x: F) -> F {
    let xf = x.to_f64x();
    if xf <= 0.0 {
        return F::zero();
    }
    F::lit(sgamma::gamma_lr(a.to_f64x(), xf))
}

/// Regularized incomplete beta I_x(a, b).
pub fn beta_reg<F: Real>(a: F, b: F, x: F) -> F {
    let xf = x.to_f64x();
    if xf <= 0.0 {
        return F::zero();
    }
    if xf >= 1.0 {
        return F::one();
    }
    F::lit(sbeta::beta_reg(a.to_f64x(), b.to_f64x(), xf))
}

/// ln(n!) for integer n.
pub fn ln_factorial(n: usize) -> f64 {
    sgamma::ln_gamma(n as f64 + 1.0)
}
