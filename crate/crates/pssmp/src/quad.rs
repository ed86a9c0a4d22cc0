//! Tanh-sinh quadrature and bracketing root finders.

use crate::real::Real;

const T_MAX: f64 = 4.0;

/// Integrates g(s, 1-s) over (0, 1). The complement is passed so integrands
/// singular at the right endpoint keep full precision there.
///
/// Returns (estimate, last level difference).
pub fn tanh_sinh01<F: Real, G: FnMut(F, F) -> F>(mut g: G, rel_tol: F, max_level: usize) -> (F, F) {
    let pi = F::PI();
    let half = F::lit(0.5);
    let mut h = half;
    // Centre node: s = 1/2, weight pi/4.
    let mut sum = g(half, half) * pi / F::lit(4.0);
    let mut k = 1usize;
    loop {
        let t = h * F::from_usize(k).unwrap();
        if t.to_f64x() > T_MAX {
            break;
        }
        sum = sum + pair(&mut g, t);
        k += 1;
    }
    let mut est = sum * h;
    let mut diff = F::infinity();
    for _level in 1..=max_level {
        h = h * half;
        let mut k = 1usize;
        loop {
            let t = h * F::from_usize(k).unwrap();
            if t.to_f64x() > T_MAX {
                break;
            }
            sum = sum + pair(&mut g, t);
            k += 2;
        }
        let next = sum * h;
        diff = (next - est).abs();
        est = next;
        if diff <= rel_tol * est.abs() || diff < F::min_positive_value() * F::lit(1e10) {
            break;
        }
    }
    (est, diff)
}

#[inline]
fn pair<F: Real, G: FnMut(F, F) -> F>(g: &mut G, t: F) -> F {
    let pi = F::PI();
    let e = (pi * t.sinh()).exp();
    let s = F::one() / (F::one() + e);
    if s <= F::zero() {
        return F::zero();
    }
    let cs = e * s;
    let w = pi * t.cosh() * s * cs;
    let left = g(s, cs);
    let right = g(cs, s);
    w * (left + right)
}

/// ∫_a^b f(x) dx. Integrable singularities at a are resolved to full precision;
/// at b the rounding of b − x limits the accuracy.
pub fn integrate<F: Real, G: FnMut(F) -> F>(mut f: G, a: F, b: F, rel_tol: F) -> F {
    if b <= a {
        return F::zero();
    }
    let w = b - a;
    tanh_sinh01(
        |s, cs| {
            let x = if s < cs { a + w * s } else { b - w * cs };
            // Nodes that round onto an endpoint carry negligible weight.
            if x <= a || x >= b {
                F::zero()
            } else {
                f(x)
            }
        },
        rel_tol,
        8,
    )
    .0 * w
}

/// ∫_a^∞ f(x) dx through x = a + L s/(1-s).
pub fn integrate_inf<F: Real, G: FnMut(F) -> F>(mut f: G, a: F, scale: F, rel_tol: F) -> F {
    tanh_sinh01(
        |s, cs| {
            let x = a + scale * s / cs;
            if !x.is_finite() {
                return F::zero();
            }
            let v = f(x);
            // 0·∞ far out in the tail.
            if v == F::zero() || v.is_nan() {
                F::zero()
            } else {
                v * scale / (cs * cs)
            }
        },
        rel_tol,
        8,
    )
    .0
}

/// Brent's method on a bracket with f(a), f(b) of opposite signs.
pub fn brent<F: Real, G: FnMut(F) -> F>(mut f: G, mut a: F, mut b: F, xtol: F, max_iter: usize) -> Option<F> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == F::zero() {
        return Some(a);
    }
    if fb == F::zero() {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    let two = F::lit(2.0);
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = two * F::epsilon() * b.abs() + xtol / two;
        let xm = (c - b) / two;
        if xm.abs() <= tol1 || fb == F::zero() {
            return Some(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * xm * s;
                q = F::one() - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (two * xm * qq * (qq - r) - (b - a) * (r - F::one()));
                q = (qq - F::one()) * (r - F::one()) * (s - F::one());
            }
            if p > F::zero() {
                q = -q;
            }
            p = p.abs();
            let min1 = F::lit(3.0) * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if two * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if d.abs() > tol1 {
            b = b + d;
        } else {
            b = b + tol1 * xm.signum();
        }
        fb = f(b);
    }
    Some(b)
}

/// Bisection on a monotone predicate boundary: returns x in [lo, hi] where
/// `pred` switches from false to true.
pub fn bisect_bool<F: Real, G: FnMut(F) -> bool>(mut pred: G, mut lo: F, mut hi: F, iters: usize) -> F {
    for _ in 0..iters {
        let mid = (lo + hi) * F::lit(0.5);
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo + hi) * F::lit(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn smooth_and_singular_integrals() {
        assert_relative_eq!(integrate(|x: f64| x.exp(), 0.0, 1.0, 1e-13), std::f64::consts::E - 1.0, max_relative = 1e-13);
        assert_relative_eq!(integrate(|x: f64| x.powf(-0.5), 0.0, 1.0, 1e-13), 2.0, max_relative = 1e-11);
        // Right-endpoint singularities are limited by the rounding of b − x.
        assert_relative_eq!(integrate(|x: f64| (1.0 - x).powf(-0.7), 0.0, 1.0, 1e-13), 1.0 / 0.3, max_relative = 1e-4);
        assert_relative_eq!(integrate_inf(|x: f64| (-x).exp(), 0.0, 1.0, 1e-13), 1.0, max_relative = 1e-12);
        assert_relative_eq!(integrate_inf(|x: f64| 1.0 / (1.0 + x * x), 0.0, 1.0, 1e-13), std::f64::consts::FRAC_PI_2, max_relative = 1e-11);
    }

    #[test]
    fn brent_finds_root() {
        let r = brent(|x: f64| x * x - 2.0, 0.0, 2.0, 1e-15, 100).unwrap();
        assert_relative_eq!(r, 2f64.sqrt(), max_relative = 1e-14);
        assert!(brent(|x: f64| x * x + 1.0, 0.0, 2.0, 1e-15, 100).is_none());
    }

    #[test]
    fn works_in_f32() {
        let v = integrate(|x: f32| x * x, 0.0, 1.0, 1e-6);
        assert!((v - 1.0 / 3.0).abs() < 1e-6);
    }
}
