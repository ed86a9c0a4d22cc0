//! Possibly killed real Lévy processes.
//!
//! ψ(θ) = bθ + σ²θ²/2 − q + E₊(θ) + E₋(−θ), where E± integrate (e^{sx} − 1) against each
//! side, compensated by s·x on x ≤ 1 when that side has infinite variation.

use crate::error::{Error, Result};
use crate::levy::measure::LevyMeasure;
use crate::quad::{brent, integrate};
use crate::real::Real;

#[derive(Debug, Clone)]
pub struct LevySpec<F: Real> {
    pub drift: F,
    pub sigma: F,
    pub jumps_pos: Option<LevyMeasure<F>>,
    pub jumps_neg: Option<LevyMeasure<F>>,
    pub killing: F,
}

/// Upper end of the Cramér bracket search.
pub const LAMBDA_MAX: f64 = 128.0;

fn lit<F: Real>(x: f64) -> F {
    F::lit(x)
}

fn side_exp<F: Real>(m: &Option<LevyMeasure<F>>, s: F) -> F {
    match m {
        Some(m) => m.exp_integral(s, !m.is_finite_variation()),
        None => F::zero(),
    }
}

/// ∫_0^1 x(e^{γx} − 1) Π(dx).
fn tilt_drift<F: Real>(m: &LevyMeasure<F>, gamma: F) -> F {
    if let LevyMeasure::Finite { atoms } = m {
        return atoms.iter().filter(|a| a.0 <= F::one()).map(|&(x, r)| r * x * (gamma * x).exp_m1()).sum();
    }
    integrate(|x| x * (gamma * x).exp_m1() * m.density(x).unwrap_or(F::zero()), F::zero(), F::one(), lit(1e-13))
}

impl<F: Real> LevySpec<F> {
    pub fn new(
        drift: F,
        sigma: F,
        jumps_pos: Option<LevyMeasure<F>>,
        jumps_neg: Option<LevyMeasure<F>>,
        killing: F,
    ) -> Result<Self> {
        let s = Self { drift, sigma, jumps_pos, jumps_neg, killing };
        s.validate()?;
        Ok(s)
    }

    /// −ξ is a subordinator with drift d and jump measure Π, killed at rate q.
    pub fn subordinator(d: F, jumps: Option<LevyMeasure<F>>, q: F) -> Result<Self> {
        if d < F::zero() {
            return Err(Error::InvalidParameter(format!("subordinator drift must be >= 0, got {d}")));
        }
        Self::new(-d, F::zero(), None, jumps, q)
    }

    pub fn brownian(sigma: F, drift: F) -> Result<Self> {
        Self::new(drift, sigma, None, None, F::zero())
    }

    pub fn validate(&self) -> Result<()> {
        if !self.drift.is_finite() || !(self.sigma >= F::zero()) || !(self.killing >= F::zero()) || !self.killing.is_finite() || !self.sigma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "need finite drift, sigma >= 0 and killing >= 0 (drift={}, sigma={}, killing={})",
                self.drift, self.sigma, self.killing
            )));
        }
        Ok(())
    }

    /// True when −ξ has nondecreasing paths.
    pub fn is_subordinator_neg(&self) -> bool {
        self.sigma == F::zero()
            && self.jumps_pos.is_none()
            && self.drift <= F::zero()
            && self.jumps_neg.as_ref().is_none_or(|m| m.is_finite_variation())
    }

    /// Drift d of the subordinator −ξ.
    pub fn sub_drift(&self) -> F {
        -self.drift
    }

    pub fn sub_measure(&self) -> Option<&LevyMeasure<F>> {
        self.jumps_neg.as_ref()
    }

    /// φ(λ) = q + dλ + ∫(1 − e^{−λx})Π(dx).
    pub fn laplace_exponent(&self, lambda: F) -> Result<F> {
        if !self.is_subordinator_neg() {
            return Err(Error::NotASubordinator(
                "spec has positive jumps, a Gaussian part, positive drift or infinite-variation jumps".into(),
            ));
        }
        if lambda < F::zero() {
            return Err(Error::OutOfDomain(format!("lambda must be >= 0, got {lambda}")));
        }
        let jumps = self.jumps_neg.as_ref().map_or(F::zero(), |m| m.laplace(lambda));
        Ok(self.killing + self.sub_drift() * lambda + jumps)
    }

    /// ψ(γ) = ln E[e^{γξ_1}, 1 < ζ]; `+∞` when the exponential moment diverges.
    pub fn mgf_exponent(&self, gamma: F) -> F {
        let pos = side_exp(&self.jumps_pos, gamma);
        let neg = side_exp(&self.jumps_neg, -gamma);
        if pos == F::infinity() || neg == F::infinity() {
            return F::infinity();
        }
        self.drift * gamma + self.sigma * self.sigma * gamma * gamma * lit(0.5) - self.killing + pos + neg
    }

    /// E[ξ_1] ignoring killing; may be ±∞.
    pub fn mean(&self) -> F {
        let side = |m: &Option<LevyMeasure<F>>| -> F {
            match m {
                None => F::zero(),
                Some(m) => {
                    let one = F::one();
                    let big = m.tail(one) + crate::quad::integrate_inf(|x| m.tail(x), one, one, lit(1e-12));
                    let big = if let LevyMeasure::Finite { atoms } = m {
                        atoms.iter().filter(|a| a.0 > one).map(|a| a.0 * a.1).sum()
                    } else {
                        big
                    };
                    if m.is_finite_variation() {
                        m.int_x_below(one) + big
                    } else {
                        big
                    }
                }
            }
        };
        self.drift + side(&self.jumps_pos) - side(&self.jumps_neg)
    }

    /// Whether the lifetime may be infinite with I = ∞ (no killing, no drift to −∞).
    pub fn may_diverge(&self) -> bool {
        self.killing == F::zero() && !(self.mean() < F::zero())
    }

    /// Abscissa of ψ on the positive axis.
    pub fn mgf_abscissa(&self) -> F {
        self.jumps_pos.as_ref().map_or(F::infinity(), |m| m.abscissa())
    }

    /// Positive root of ψ, if any.
    pub fn cramer_root(&self) -> Result<Option<F>> {
        if self.is_subordinator_neg() {
            return Ok(None);
        }
        if self.killing == F::zero() && !(self.mean() < F::zero()) {
            return Ok(None);
        }
        let lmax: F = lit(LAMBDA_MAX);
        let abscissa = self.mgf_abscissa();
        let limit = if abscissa.is_finite() { abscissa.min(lmax) } else { lmax };
        let psi = |g: F| self.mgf_exponent(g);

        let mut neg = F::zero();
        let mut hi = F::one().min(limit * lit(0.5));
        loop {
            let v = psi(hi);
            if v > F::zero() {
                break;
            }
            neg = hi;
            if hi >= limit {
                if abscissa <= lmax {
                    return Ok(None);
                }
                return Err(Error::NonConvergence(format!("no sign change of psi on (0, {lmax}]")));
            }
            hi = (hi * lit(2.0)).min(if abscissa <= lmax { abscissa * lit(1.0 - 1e-12) } else { lmax });
            if abscissa <= lmax && hi >= abscissa * lit(1.0 - 1e-12) {
                if psi(hi) <= F::zero() {
                    return Ok(None);
                }
                break;
            }
        }
        if neg == F::zero() && self.killing == F::zero() {
            // ψ(0) = 0: find an interior negative point.
            let mut lo = hi * lit(0.5);
            while psi(lo) >= F::zero() {
                lo = lo * lit(0.5);
                if lo < lit(1e-30) {
                    return Ok(None);
                }
            }
            neg = lo;
        }
        let root = brent(psi, neg, hi, F::epsilon() * lit(4.0), 400)
            .ok_or_else(|| Error::NonConvergence("cramer root bracket failed".into()))?;
        Ok(Some(root))
    }

    /// Spec of ξ under e^{γξ_t − ψ(γ)t}·P.
    pub fn esscher_tilt(&self, gamma: F) -> Result<Self> {
        let pv = self.mgf_exponent(gamma);
        if !pv.is_finite() {
            return Err(Error::TiltDiverges(format!("psi({gamma}) is infinite")));
        }
        let mut drift = self.drift + gamma * self.sigma * self.sigma;
        let jumps_pos = match &self.jumps_pos {
            Some(m) => {
                if !m.is_finite_variation() {
                    drift = drift + tilt_drift(m, gamma);
                }
                Some(m.tilted(gamma)?)
            }
            None => None,
        };
        let jumps_neg = match &self.jumps_neg {
            Some(m) => {
                if !m.is_finite_variation() {
                    drift = drift - tilt_drift(m, -gamma);
                }
                Some(m.tilted(-gamma)?)
            }
            None => None,
        };
        Ok(Self { drift, sigma: self.sigma, jumps_pos, jumps_neg, killing: F::zero() })
    }

    /// Spec of αξ.
    pub fn rescale_alpha(&self, alpha: F) -> Result<Self> {
        if !(alpha > F::zero()) {
            return Err(Error::InvalidParameter(format!("alpha must be > 0, got {alpha}")));
        }
        if alpha == F::one() {
            return Ok(self.clone());
        }
        let one = F::one();
        // Shift caused by moving the compensation window from x ≤ 1 to x ≤ 1/α.
        let shift = |m: &LevyMeasure<F>| -> F {
            if m.is_finite_variation() {
                F::zero()
            } else if alpha < one {
                alpha * m.int_x_between(one, one / alpha)
            } else {
                -alpha * m.int_x_between(one / alpha, one)
            }
        };
        let mut drift = alpha * self.drift;
        if let Some(m) = &self.jumps_pos {
            drift = drift + shift(m);
        }
        if let Some(m) = &self.jumps_neg {
            drift = drift - shift(m);
        }
        Ok(Self {
            drift,
            sigma: alpha * self.sigma,
            jumps_pos: self.jumps_pos.as_ref().map(|m| m.scaled(alpha)),
            jumps_neg: self.jumps_neg.as_ref().map(|m| m.scaled(alpha)),
            killing: self.killing,
        })
    }

    /// Spec of −ξ.
    pub fn negate(&self) -> Self {
        Self {
            drift: -self.drift,
            sigma: self.sigma,
            jumps_pos: self.jumps_neg.clone(),
            jumps_neg: self.jumps_pos.clone(),
            killing: self.killing,
        }
    }

    pub fn has_jumps(&self) -> bool {
        self.jumps_pos.is_some() || self.jumps_neg.is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::measure::LampertiShape;
    use crate::special::gamma;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn substable(alpha: f64) -> LevySpec<f64> {
        let c = alpha / gamma(1.0 - alpha);
        let m = LevyMeasure::lamperti(c, alpha, LampertiShape::Down).unwrap();
        LevySpec::subordinator(0.0, Some(m), c / alpha).unwrap()
    }

    fn rational(delta: f64, b: f64) -> LevySpec<f64> {
        LevySpec::new(1.0, 0.0, None, Some(LevyMeasure::exp(b, b - delta).unwrap()), 0.0).unwrap()
    }

    #[test]
    fn laplace_exponent_examples() {
        let drift = LevySpec::subordinator(1.0, None, 0.0).unwrap();
        assert_eq!(drift.laplace_exponent(3.0).unwrap(), 3.0);
        let s = substable(0.5);
        let want = gamma(2.0) / gamma(1.5);
        assert_relative_eq!(s.laplace_exponent(1.0).unwrap(), want, max_relative = 1e-12);
        assert!((want - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-7);
        let ej = LevySpec::subordinator(1.0, Some(LevyMeasure::exp(1.0, 2.0).unwrap()), 0.0).unwrap();
        assert_relative_eq!(ej.laplace_exponent(2.0).unwrap(), 2.5, max_relative = 1e-14);
        assert!(LevySpec::brownian(1.0, -1.0).unwrap().laplace_exponent(1.0).is_err());
    }

    #[test]
    fn mgf_and_cramer_examples() {
        let bm = LevySpec::brownian(1.0, -1.0).unwrap();
        assert_relative_eq!(bm.mgf_exponent(2.0), 0.0, epsilon = 1e-15);
        assert_relative_eq!(bm.cramer_root().unwrap().unwrap(), 2.0, max_relative = 1e-12);
        let r = rational(1.0, 2.0);
        assert!(r.mgf_exponent(1.0).abs() < 1e-14);
        for &l in &[0.0, 0.3, 1.0, 2.5, 7.0] {
            assert_relative_eq!(r.mgf_exponent(l), l * (l - 1.0) / (l + 1.0), epsilon = 1e-13);
        }
        let r2 = rational(1.5, 3.0);
        assert_relative_eq!(r2.cramer_root().unwrap().unwrap(), 1.5, max_relative = 1e-12);
        assert!(substable(0.5).cramer_root().unwrap().is_none());
        let heavy = LevySpec::new(-1.0, 0.0, Some(LevyMeasure::stable(1.0, 0.5).unwrap()), None, 0.0).unwrap();
        assert_eq!(heavy.mgf_exponent(0.1), f64::INFINITY);
    }

    #[test]
    fn esscher_examples() {
        let bm = LevySpec::brownian(1.0, -1.0).unwrap();
        let t = bm.esscher_tilt(2.0).unwrap();
        assert_relative_eq!(t.drift, 1.0, max_relative = 1e-15);
        let r = rational(1.0, 2.0);
        let t = r.esscher_tilt(1.0).unwrap();
        for &l in &[0.2, 1.0, 4.0] {
            assert_relative_eq!(t.mgf_exponent(l), l * (l + 1.0) / (l + 2.0), max_relative = 1e-12);
        }
        assert!(t.mean() > 0.0);
        let (r1, r2) = (1.0f64, 3.0f64);
        let cp = LevySpec::new(
            0.0,
            0.0,
            Some(LevyMeasure::finite(vec![(1.0, r1)]).unwrap()),
            Some(LevyMeasure::finite(vec![(1.0, r2)]).unwrap()),
            0.0,
        )
        .unwrap();
        let g = cp.cramer_root().unwrap().unwrap();
        assert_relative_eq!(g, (r2 / r1).ln(), max_relative = 1e-12);
        let t = cp.esscher_tilt(g).unwrap();
        match (&t.jumps_pos, &t.jumps_neg) {
            (Some(LevyMeasure::Finite { atoms: p }), Some(LevyMeasure::Finite { atoms: n })) => {
                assert_relative_eq!(p[0].1, r1 * g.exp(), max_relative = 1e-12);
                assert_relative_eq!(n[0].1, r2 * (-g).exp(), max_relative = 1e-12);
            }
            _ => panic!("finite tilt should stay finite"),
        }
    }

    #[test]
    fn rescale_examples() {
        let s = substable(0.5);
        let r = s.rescale_alpha(0.5).unwrap();
        assert_relative_eq!(r.laplace_exponent(1.0).unwrap(), std::f64::consts::PI.sqrt() / 2.0, max_relative = 1e-12);
        let d = LevySpec::subordinator(1.0, None, 0.0).unwrap().rescale_alpha(2.0).unwrap();
        assert_eq!(d.sub_drift(), 2.0);
    }

    #[test]
    fn tilt_consistency_infinite_variation() {
        let c: f64 = 0.7;
        let spec = LevySpec::new(
            -0.5,
            0.3,
            Some(LevyMeasure::lamperti(c, 1.5, LampertiShape::Up).unwrap()),
            Some(LevyMeasure::stable(0.4, 1.3).unwrap()),
            0.2,
        )
        .unwrap();
        let g = spec.cramer_root().unwrap().unwrap();
        assert!(spec.mgf_exponent(g).abs() < 1e-11);
        let t = spec.esscher_tilt(g).unwrap();
        for &l in &[0.1, 0.5, 1.0] {
            if l + g < 1.5 {
                assert_relative_eq!(t.mgf_exponent(l), spec.mgf_exponent(l + g), epsilon = 1e-9);
            }
        }
        for &l in &[-0.3, -1.0] {
            assert_relative_eq!(t.mgf_exponent(l), spec.mgf_exponent(l + g), epsilon = 1e-9);
        }
    }

    #[test]
    fn rescale_preserves_psi_of_scaled_argument() {
        let spec = LevySpec::new(
            0.2,
            0.5,
            Some(LevyMeasure::lamperti(0.7, 1.5, LampertiShape::Up).unwrap()),
            Some(LevyMeasure::stable(0.4, 1.3).unwrap()),
            0.1,
        )
        .unwrap();
        for &a in &[0.5, 2.0] {
            let r = spec.rescale_alpha(a).unwrap();
            for &l in &[-0.7, 0.2] {
                assert_relative_eq!(r.mgf_exponent(l), spec.mgf_exponent(a * l), max_relative = 1e-9, epsilon = 1e-11);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn phi_is_concave(alpha in 0.1f64..0.9, d in 0.0f64..2.0, q in 0.0f64..2.0, l1 in 0.01f64..20.0, l2 in 0.01f64..20.0) {
            let c = alpha / gamma(1.0 - alpha);
            let s = LevySpec::subordinator(d, Some(LevyMeasure::lamperti(c, alpha, LampertiShape::Down).unwrap()), q).unwrap();
            let mid = s.laplace_exponent((l1 + l2) / 2.0).unwrap();
            let avg = (s.laplace_exponent(l1).unwrap() + s.laplace_exponent(l2).unwrap()) / 2.0;
            prop_assert!(mid >= avg - 1e-12 * (1.0 + avg.abs()));
        }

        #[test]
        fn rescale_roundtrip(alpha in 0.1f64..0.9, a in 0.2f64..5.0, l in 0.0f64..10.0) {
            let c = alpha / gamma(1.0 - alpha);
            let s = LevySpec::subordinator(0.3, Some(LevyMeasure::stable(c, alpha).unwrap()), 0.5).unwrap();
            let back = s.rescale_alpha(a).unwrap().rescale_alpha(1.0 / a).unwrap();
            let (x, y) = (back.laplace_exponent(l).unwrap(), s.laplace_exponent(l).unwrap());
            prop_assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
        }

        #[test]
        fn stable_tail_identity(c in 0.01f64..10.0, alpha in 0.05f64..1.95, x in 1e-6f64..1e6) {
            let m = LevyMeasure::stable(c, alpha).unwrap();
            prop_assert!((m.tail(x) * x.powf(alpha) * alpha / c - 1.0).abs() < 1e-14);
        }

        #[test]
        fn tilt_matches_shifted_psi(sigma in 0.2f64..2.0, b in 0.1f64..2.0, mass in 0.1f64..2.0, rate in 1.0f64..4.0) {
            let s = LevySpec::new(-b, sigma, Some(LevyMeasure::exp(mass, rate).unwrap()), None, 0.0).unwrap();
            if let Ok(Some(g)) = s.cramer_root() {
                let t = s.esscher_tilt(g).unwrap();
                for l in [0.0, 0.1, 0.5] {
                    if l + g < rate {
                        prop_assert!((t.mgf_exponent(l) - s.mgf_exponent(l + g)).abs() < 1e-9);
                    }
                }
            }
        }
    }
}
