//! The exponential functional I = ∫_0^ζ e^{ξ_s} ds.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::levy::LevySpec;
use crate::mc::{collect_accepted, collect_all, Collected, RejectionBudget};
use crate::path::{Driver, Event, SimConfig, Walker};
use crate::real::Real;
use crate::stats::WeightedSample;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpFunctionalSample<F: Real> {
    pub value: F,
    /// Bound on the omitted remainder ∫_T^ζ e^{ξ}.
    pub tail_bound: F,
    pub killed: bool,
    pub replica: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentSource {
    Recursion,
    ClosedForm,
    Empirical,
}

/// μ_1..μ_N; entries past `finite_prefix` are +∞.
#[derive(Debug, Clone, Serialize)]
pub struct MomentSequence<F: Real + Serialize> {
    pub moments: Vec<F>,
    pub std_errors: Option<Vec<F>>,
    pub source: MomentSource,
    pub finite_prefix: usize,
}

impl<F: Real + Serialize> MomentSequence<F> {
    pub fn from_moments(moments: Vec<F>, source: MomentSource) -> Self {
        let finite_prefix = moments.iter().take_while(|m| m.is_finite()).count();
        Self { moments, std_errors: None, source, finite_prefix }
    }

    /// μ_n² ≤ μ_{n−1}μ_{n+1} with μ_0 = 1.
    pub fn is_log_convex(&self) -> bool {
        let mut m = vec![F::one()];
        m.extend(self.moments.iter().take(self.finite_prefix).copied());
        m.windows(3).all(|w| w[1] * w[1] <= w[0] * w[2] * (F::one() + F::lit(1e-12)))
    }

    pub fn get(&self, n: usize) -> F {
        if n == 0 {
            F::one()
        } else {
            self.moments[n - 1]
        }
    }
}

/// μ_n = ∏ i/φ(i).
pub fn moments_i<F: Real + Serialize>(spec: &LevySpec<F>, n: usize) -> Result<MomentSequence<F>> {
    let mut out = Vec::with_capacity(n);
    let mut m = F::one();
    for i in 1..=n {
        let fi = F::from_usize(i).unwrap();
        m = m * fi / spec.laplace_exponent(fi)?;
        out.push(m);
    }
    Ok(MomentSequence::from_moments(out, MomentSource::Recursion))
}

/// μ_n = n!/∏(−ψ(k)) while ψ(k) < 0.
pub fn moments_i_general<F: Real + Serialize>(spec: &LevySpec<F>, n: usize) -> MomentSequence<F> {
    let mut out = Vec::with_capacity(n);
    let mut m = F::one();
    let mut finite = true;
    for k in 1..=n {
        let fk = F::from_usize(k).unwrap();
        let psi = spec.mgf_exponent(fk);
        if finite && psi < F::zero() {
            m = m * fk / -psi;
        } else {
            finite = false;
            m = F::infinity();
        }
        out.push(m);
    }
    MomentSequence::from_moments(out, MomentSource::Recursion)
}

/// Supremum of the support of I.
pub fn support_tf<F: Real>(spec: &LevySpec<F>) -> F {
    if spec.is_subordinator_neg() && spec.sub_drift() > F::zero() {
        F::one() / spec.sub_drift()
    } else {
        F::infinity()
    }
}

/// Markov level for the remainder bound: P(Ĩ > E[I]/p) ≤ p.
const TAIL_PROB: f64 = 1e-4;
const PILOT_SIZE: usize = 2000;

/// How the omitted remainder is bounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailRule {
    /// Pathwise bound e^{ξ}/d.
    Support,
    /// e^{ξ}·E[I]/p.
    Markov,
    /// e^{ξ}·(10 × pilot maximum).
    Pilot,
}

/// Sampler for I with a precomputed plan.
#[derive(Debug, Clone)]
pub struct ExpFunctional<F: Real> {
    pub spec: LevySpec<F>,
    pub cfg: SimConfig<F>,
    pub driver: Driver<F>,
    /// Scale S with remainder ≤ e^{ξ_T}·S.
    pub s_tail: F,
    /// Typical size of I, used for step adaptation.
    pub scale: F,
    pub mean: Option<F>,
    pub t_f: F,
    pub tail_rule: TailRule,
}

impl<F: Real + Serialize> ExpFunctional<F> {
    pub fn new(spec: &LevySpec<F>, cfg: &SimConfig<F>) -> Result<Self> {
        let certified = spec.killing > F::zero() || spec.mean() < F::zero();
        if !certified {
            return Err(Error::MayDiverge("no killing and E[xi_1] >= 0".into()));
        }
        let driver = Driver::new(spec, cfg.jump_cutoff)?;
        let t_f = support_tf(spec);
        let mu = moments_i_general(spec, 1);
        let mean = if mu.finite_prefix >= 1 { Some(mu.moments[0]) } else { None };
        let mut me = Self {
            spec: spec.clone(),
            cfg: cfg.clone(),
            driver,
            s_tail: F::lit(1e8),
            scale: F::one(),
            mean,
            t_f,
            tail_rule: TailRule::Pilot,
        };
        if t_f.is_finite() {
            me.s_tail = t_f;
            me.scale = mean.unwrap_or(t_f);
            me.tail_rule = TailRule::Support;
        } else if let Some(m) = mean {
            me.s_tail = m / F::lit(TAIL_PROB);
            me.scale = m;
            me.tail_rule = TailRule::Markov;
        } else {
            let pilot_cfg = SimConfig { seed: cfg.seed ^ 0x9E37_79B9_7F4A_7C15, ..cfg.clone() };
            let pilot = Self { cfg: pilot_cfg, ..me.clone() };
            let mut v = collect_all(PILOT_SIZE, 0, |r| pilot.sample(r).map(|s| s.value))?;
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            me.s_tail = v[v.len() - 1] * F::lit(10.0);
            me.scale = v[v.len() / 2];
        }
        Ok(me)
    }

    /// Segment length at level ξ with `acc` accumulated so far.
    pub fn step_size(&self, xi: F, acc: F) -> F {
        let drv = &self.driver;
        if drv.is_diffusive() {
            let r = (acc.max(self.scale) / xi.exp()).max(F::one());
            self.cfg.step * r.sqrt().min(self.cfg.step_cap)
        } else if drv.drift != F::zero() {
            F::one() / drv.drift.abs()
        } else {
            F::infinity()
        }
    }

    /// One draw of I on replica stream `replica`.
    pub fn sample(&self, replica: u64) -> Result<ExpFunctionalSample<F>> {
        let mut rng = self.cfg.rng(replica);
        let drv = &self.driver;
        let mut w = Walker::new(drv);
        let mut acc = F::zero();
        loop {
            let h = self.step_size(w.xi, acc);
            let seg = w.step(h, &mut rng)?;
            acc = acc + seg.integral();
            if seg.event == Event::Kill {
                return Ok(ExpFunctionalSample { value: acc, tail_bound: F::zero(), killed: true, replica });
            }
            let bound = w.xi.exp() * self.s_tail;
            if bound < self.cfg.rel_tol * acc {
                return Ok(ExpFunctionalSample { value: acc, tail_bound: bound, killed: false, replica });
            }
            if w.segments > self.cfg.max_segments {
                return Err(Error::NoConvergence { iterations: w.segments, residual: (bound / acc).to_f64x() });
            }
        }
    }

    /// Values of I on replicas `first..first+n`.
    pub fn sample_values(&self, n: usize, first: u64) -> Result<Vec<F>> {
        collect_all(n, first, |r| self.sample(r).map(|s| s.value))
    }

    pub fn samples(&self, n: usize, first: u64) -> Result<Vec<ExpFunctionalSample<F>>> {
        collect_all(n, first, |r| self.sample(r))
    }
}

/// Residual lifetimes I − t on {I > t} by rejection.
#[derive(Debug, Clone)]
pub struct ResidualSample<F: Real> {
    pub sample: WeightedSample<F>,
    pub attempts: u64,
    pub acceptance: f64,
}

pub fn residual_life_samples<F: Real + Serialize>(
    spec: &LevySpec<F>,
    t: F,
    n: usize,
    cfg: &SimConfig<F>,
    budget: RejectionBudget,
) -> Result<ResidualSample<F>> {
    let ef = ExpFunctional::new(spec, cfg)?;
    residual_from(&ef, t, n, budget)
}

pub fn residual_from<F: Real + Serialize>(ef: &ExpFunctional<F>, t: F, n: usize, budget: RejectionBudget) -> Result<ResidualSample<F>> {
    if !(t >= F::zero()) || t >= ef.t_f {
        return Err(Error::OutOfDomain(format!("t = {t} must lie in [0, t_F = {})", ef.t_f)));
    }
    let c: Collected<F> = collect_accepted(n, 0, budget, |r| {
        let s = ef.sample(r)?;
        Ok((s.value > t).then(|| s.value - t))
    })?;
    let acceptance = c.acceptance();
    Ok(ResidualSample { sample: WeightedSample::unweighted(c.items), attempts: c.attempts, acceptance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::{LampertiShape, LevyMeasure};
    use crate::special::gamma;
    use crate::stats::{empirical_moments, ks_one_sample};

    fn substable_half() -> LevySpec<f64> {
        let a = 0.5;
        let c = a / gamma(1.0 - a);
        LevySpec::subordinator(0.0, Some(LevyMeasure::lamperti(c, a, LampertiShape::Down).unwrap()), c / a)
            .unwrap()
            .rescale_alpha(a)
            .unwrap()
    }

    #[test]
    fn recursion_examples() {
        let d = LevySpec::subordinator(1.0f64, None, 0.0).unwrap();
        assert!(moments_i(&d, 5).unwrap().moments.iter().all(|&m| m == 1.0));
        let kd = LevySpec::subordinator(1.0f64, None, 1.0).unwrap();
        let m = moments_i(&kd, 3).unwrap().moments;
        for (i, v) in m.iter().enumerate() {
            assert!((v - 1.0 / (i as f64 + 2.0)).abs() < 1e-15);
        }
        let s = moments_i(&substable_half(), 3).unwrap();
        assert!((s.moments[0] - 2.0 / std::f64::consts::PI.sqrt()).abs() < 1e-12);
        assert!((s.moments[1] - 2.0).abs() < 1e-12);
        assert!(s.is_log_convex());
        let g = moments_i_general(&substable_half(), 3);
        for i in 0..3 {
            assert!((g.moments[i] / s.moments[i] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn general_recursion_flags_infinite_moments() {
        let bm = LevySpec::brownian(1.0f64, -1.0).unwrap();
        let m = moments_i_general(&bm, 3);
        assert!((m.moments[0] - 2.0).abs() < 1e-15);
        assert_eq!(m.finite_prefix, 1);
        assert!(m.moments[1].is_infinite());
        let r = LevySpec::new(1.0f64, 0.0, None, Some(LevyMeasure::exp(4.0, 1.0).unwrap()), 0.0).unwrap();
        let m = moments_i_general(&r, 2);
        assert!((m.moments[0] - 1.0).abs() < 1e-14);
        assert!((m.moments[1] - 3.0).abs() < 1e-13);
    }

    #[test]
    fn support_endpoint() {
        assert_eq!(support_tf(&LevySpec::subordinator(2.0f64, None, 0.0).unwrap()), 0.5);
        assert!(support_tf(&substable_half()).is_infinite());
        assert!(support_tf(&LevySpec::brownian(1.0f64, -1.0).unwrap()).is_infinite());
    }

    #[test]
    fn pure_drift_converges_to_one() {
        let spec = LevySpec::subordinator(1.0f64, None, 0.0).unwrap();
        let ef = ExpFunctional::new(&spec, &SimConfig::default()).unwrap();
        let s = ef.sample(0).unwrap();
        assert!(s.value <= 1.0 && s.value >= 1.0 - 1e-6);
    }

    #[test]
    fn brownian_mean_and_killed_drift_law() {
        let bm = LevySpec::brownian(1.0f64, -1.0).unwrap();
        let ef = ExpFunctional::new(&bm, &SimConfig::with_seed(1)).unwrap();
        let v = ef.sample_values(20000, 0).unwrap();
        let m = empirical_moments(&WeightedSample::unweighted(v), 1).unwrap()[0];
        assert!((m.mean - 2.0).abs() < 3.0 * m.std_error, "{m:?}");

        let kd = LevySpec::subordinator(1.0f64, None, 1.0).unwrap();
        let r = residual_life_samples(&kd, 0.5, 10000, &SimConfig::with_seed(2), RejectionBudget::default()).unwrap();
        assert!(ks_one_sample(&r.sample, |x| (2.0 * x).clamp(0.0, 1.0)).unwrap() < 0.03);
        assert!((r.acceptance - 0.5).abs() < 0.03);
    }

    #[test]
    fn mittag_leffler_mean() {
        let ef = ExpFunctional::new(&substable_half(), &SimConfig::with_seed(3)).unwrap();
        let v = ef.sample_values(20000, 0).unwrap();
        let m = empirical_moments(&WeightedSample::unweighted(v), 2).unwrap();
        assert!((m[0].mean - 2.0 / std::f64::consts::PI.sqrt()).abs() < 3.0 * m[0].std_error, "{m:?}");
        assert!((m[1].mean - 2.0).abs() < 3.0 * m[1].std_error, "{m:?}");
    }

    #[test]
    fn divergent_specs_are_refused() {
        let up = LevySpec::brownian(1.0f64, 0.5).unwrap();
        assert!(matches!(ExpFunctional::new(&up, &SimConfig::default()), Err(Error::MayDiverge(_))));
    }
}
