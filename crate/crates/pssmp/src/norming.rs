//! φ_{Π,q} and the regime normalizers g(t).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::levy::{LevyMeasure, LevySpec};
use crate::quad::brent;
use crate::real::Real;

/// Λ(u) = ∫(1 − e^{−ux})Π(dx).
fn big_lambda<F: Real>(m: Option<&LevyMeasure<F>>, u: F) -> F {
    m.map_or(F::zero(), |m| m.laplace(u))
}

/// ∫ x Π(dx), possibly infinite.
pub fn first_moment<F: Real>(m: Option<&LevyMeasure<F>>) -> F {
    let Some(m) = m else { return F::zero() };
    if let LevyMeasure::Finite { atoms } = m {
        return atoms.iter().map(|a| a.0 * a.1).sum();
    }
    if let LevyMeasure::Exp { mass, rate } = m {
        return *mass / *rate;
    }
    let one = F::one();
    let head = m.int_x_below(one);
    let tail = m.tail(one) + crate::quad::integrate_inf(|x| m.tail(x), one, one, F::lit(1e-12));
    head + tail
}

/// Lower end of the domain of φ_{Π,q}: 0 if q > 0, else 1/∫xΠ.
pub fn phi_inverse_domain<F: Real>(m: Option<&LevyMeasure<F>>, q: F) -> F {
    if q > F::zero() {
        F::zero()
    } else {
        let m1 = first_moment(m);
        if m1 > F::zero() {
            F::one() / m1
        } else {
            F::infinity()
        }
    }
}

/// u = φ_{Π,q}(t), the inverse of u ↦ u/(Λ(u) + q).
pub fn phi_inverse<F: Real>(m: Option<&LevyMeasure<F>>, q: F, t: F) -> Result<F> {
    let lo_dom = phi_inverse_domain(m, q);
    if !(t >= F::zero()) || t <= lo_dom && !(q > F::zero() && t == F::zero()) {
        return Err(Error::OutOfDomain(format!("phi inverse needs t > {lo_dom}, got {t}")));
    }
    if t == F::zero() {
        return Ok(F::zero());
    }
    if m.is_none() {
        return Ok(q * t);
    }
    let lt = t.ln();
    let g = |v: F| {
        let u = v.exp();
        v - (big_lambda(m, u) + q).ln() - lt
    };
    let tail_inv = m.map_or(F::zero(), |m| m.tail(F::one() / t));
    let u0 = (t * (tail_inv + q)).max(F::min_positive_value().sqrt());
    let mut lo = u0.ln();
    let mut hi = lo;
    let two = F::LN_2();
    let mut guard = 0;
    while g(hi) < F::zero() {
        hi = hi + two;
        guard += 1;
        if guard > 2000 {
            return Err(Error::NonConvergence("phi inverse bracket (upper)".into()));
        }
    }
    while g(lo) > F::zero() {
        lo = lo - two;
        guard += 1;
        if guard > 4000 {
            return Err(Error::NonConvergence("phi inverse bracket (lower)".into()));
        }
    }
    let v = brent(g, lo, hi, F::epsilon(), 300).ok_or_else(|| Error::NonConvergence("phi inverse".into()))?;
    Ok(v.exp())
}

/// Forward map u ↦ u/(Λ(u) + q).
pub fn phi_forward<F: Real>(m: Option<&LevyMeasure<F>>, q: F, u: F) -> F {
    u / (big_lambda(m, u) + q)
}

/// φ_{Π,q} of the subordinator −ξ.
pub fn phi_pi_q<F: Real>(spec: &LevySpec<F>, t: F) -> Result<F> {
    phi_inverse(spec.sub_measure(), spec.killing, t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizerKind {
    GumbelDriftFree,
    GumbelPosDrift,
    Weibull,
    Frechet,
}

/// g(t) for one regime, valid on (t_lo, t_hi).
#[derive(Debug, Clone)]
pub struct NormalizerFn<F: Real> {
    pub kind: NormalizerKind,
    pub t_lo: F,
    pub t_hi: F,
    measure: Option<LevyMeasure<F>>,
    q: F,
    d: F,
}

impl<F: Real> NormalizerFn<F> {
    pub fn gumbel_drift_free(measure: Option<LevyMeasure<F>>, q: F) -> Self {
        let t_lo = phi_inverse_domain(measure.as_ref(), q);
        Self { kind: NormalizerKind::GumbelDriftFree, t_lo, t_hi: F::infinity(), measure, q, d: F::zero() }
    }

    /// Uses φ_{Π,0} whatever the killing rate.
    pub fn gumbel_pos_drift(measure: LevyMeasure<F>, d: F) -> Self {
        let y_lo = phi_inverse_domain(Some(&measure), F::zero());
        // t/(1 − dt) > y_lo
        let t_lo = if y_lo.is_finite() { y_lo / (F::one() + d * y_lo) } else { F::one() / d };
        Self { kind: NormalizerKind::GumbelPosDrift, t_lo, t_hi: F::one() / d, measure: Some(measure), q: F::zero(), d }
    }

    pub fn weibull(d: F) -> Self {
        Self { kind: NormalizerKind::Weibull, t_lo: F::zero(), t_hi: F::one() / d, measure: None, q: F::zero(), d }
    }

    pub fn frechet() -> Self {
        Self { kind: NormalizerKind::Frechet, t_lo: F::zero(), t_hi: F::infinity(), measure: None, q: F::zero(), d: F::zero() }
    }

    pub fn eval(&self, t: F) -> Result<F> {
        if !(t > self.t_lo || (t == self.t_lo && self.kind != NormalizerKind::GumbelDriftFree && self.kind != NormalizerKind::GumbelPosDrift))
            || t >= self.t_hi
        {
            return Err(Error::OutOfDomain(format!("normalizer valid on ({}, {}), got t = {t}", self.t_lo, self.t_hi)));
        }
        match self.kind {
            NormalizerKind::GumbelDriftFree => Ok(t / phi_inverse(self.measure.as_ref(), self.q, t)?),
            NormalizerKind::GumbelPosDrift => {
                let y = t / (F::one() - self.d * t);
                Ok(F::one() / (self.d * phi_inverse(self.measure.as_ref(), F::zero(), y)?))
            }
            NormalizerKind::Weibull => Ok(F::one() / self.d - t),
            NormalizerKind::Frechet => Ok(t),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::LampertiShape;
    use crate::special::gamma;
    use proptest::prelude::*;

    fn killed_stable_measure() -> (LevyMeasure<f64>, f64) {
        let a = 0.5;
        let c = a / gamma(1.0 - a);
        (LevyMeasure::lamperti(c, a, LampertiShape::Down).unwrap().scaled(a), c / a)
    }

    #[test]
    fn pure_killing_is_identity() {
        for &t in &[0.1, 1.0, 50.0] {
            assert_eq!(phi_inverse::<f64>(None, 1.0, t).unwrap(), t);
        }
    }

    #[test]
    fn exp_closed_form() {
        let (mass, rho) = (1.7, 0.6);
        let m = LevyMeasure::exp(mass, rho).unwrap();
        assert!(phi_inverse(Some(&m), 0.0, rho / mass * 0.99).is_err());
        for &u in &[1.0f64, 3.0, 40.0, 1e4] {
            let got = phi_inverse(Some(&m), 0.0, u).unwrap();
            assert!((got - (mass * u - rho)).abs() <= 1e-12 * (mass * u), "{u}: {got}");
        }
    }

    #[test]
    fn killed_stable_round_trip() {
        let (m, q) = killed_stable_measure();
        for &t in &[1.0, 10.0, 100.0] {
            let u = phi_inverse(Some(&m), q, t).unwrap();
            assert!((phi_forward(Some(&m), q, u) / t - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn normalizer_examples() {
        let m = LevyMeasure::exp(1.5f64, 1.0).unwrap();
        let g = NormalizerFn::gumbel_drift_free(Some(m), 0.5);
        let v = g.eval(1e3).unwrap();
        assert!((0.49..=0.51).contains(&v), "{v}");
        let w = NormalizerFn::weibull(1.0f64);
        assert_eq!(w.eval(0.25).unwrap(), 0.75);
        assert_eq!(NormalizerFn::<f64>::frechet().eval(7.0).unwrap(), 7.0);
    }

    #[test]
    fn finite_measure_limit() {
        let m = LevyMeasure::exp(1.5f64, 1.0).unwrap();
        let t = 1e4 / 2.0;
        let r = phi_inverse(Some(&m), 0.5, t).unwrap() / t;
        assert!((r / 2.0 - 1.0).abs() < 0.01);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn round_trip_and_monotone(lt in -3.0f64..8.0) {
            let (m, q) = killed_stable_measure();
            let t = 10f64.powf(lt);
            let u = phi_inverse(Some(&m), q, t).unwrap();
            prop_assert!((phi_forward(Some(&m), q, u) / t - 1.0).abs() < 1e-10);
            let u2 = phi_inverse(Some(&m), q, t * 1.01).unwrap();
            prop_assert!(u2 > u);
        }
    }
}
