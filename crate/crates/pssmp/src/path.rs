//! Skeleton paths of killed Lévy processes.
//!
//! Jumps above a cutoff ε are simulated exactly at Poisson event times. Below ε the jumps of a
//! finite-variation side are replaced by their mean; on an infinite-variation side the
//! compensated small jumps are replaced by a Gaussian of matching variance. Between events ξ is
//! advanced in linear segments, which makes ∫e^{ξ} exact on drift-only stretches.

use rand::Rng;

use crate::error::{Error, Result};
use crate::levy::{LevyMeasure, LevySpec};
use crate::real::Real;
use crate::rng::{replica_rng, ReplicaRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HorizonPolicy {
    Fixed,
    UntilKilled,
    UntilIntegralConverged,
}

#[derive(Debug, Clone)]
pub struct SimConfig<F: Real> {
    /// Base grid spacing Δ for diffusive parts.
    pub step: F,
    /// Jump cutoff ε; `None` picks one per side.
    pub jump_cutoff: Option<F>,
    pub horizon_policy: HorizonPolicy,
    pub seed: u64,
    pub replica: u64,
    /// Relative tolerance of the omitted ∫e^{ξ} remainder.
    pub rel_tol: F,
    /// Largest factor by which adaptive steps may exceed Δ.
    pub step_cap: F,
    pub max_segments: usize,
}

impl<F: Real> Default for SimConfig<F> {
    fn default() -> Self {
        Self {
            step: F::lit(0.01),
            jump_cutoff: None,
            horizon_policy: HorizonPolicy::Fixed,
            seed: 0,
            replica: 0,
            rel_tol: F::lit(1e-6),
            step_cap: F::lit(1e3),
            max_segments: 50_000_000,
        }
    }
}

impl<F: Real> SimConfig<F> {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn rng(&self, replica: u64) -> ReplicaRng {
        replica_rng(self.seed, replica)
    }
}

#[derive(Debug, Clone)]
pub struct PathSample<F: Real> {
    pub times: Vec<F>,
    pub values: Vec<F>,
    pub is_jump: Vec<bool>,
    pub killed: bool,
    pub kill_time: Option<F>,
    /// ∫_0^ε x Π(dx) summed over finite-variation sides, per unit time.
    pub truncation_bound: F,
}

/// Target std of the omitted jumps per unit time when picking ε.
const SMALL_JUMP_STD: f64 = 1e-3;
/// ε on infinite-variation sides, where the remainder is Gaussian-substituted.
const GAUSS_CUTOFF: f64 = 1e-2;

#[derive(Debug, Clone)]
struct Side<F: Real> {
    measure: LevyMeasure<F>,
    eps: F,
    rate: F,
}

/// Precomputed simulation plan for a spec.
#[derive(Debug, Clone)]
pub struct Driver<F: Real> {
    pos: Option<Side<F>>,
    neg: Option<Side<F>>,
    /// Drift after small-jump compensation.
    pub drift: F,
    /// Gaussian coefficient including substituted small jumps.
    pub sigma: F,
    pub killing: F,
    pub truncation_bound: F,
    event_rate: F,
}

fn auto_cutoff<F: Real>(m: &LevyMeasure<F>) -> F {
    if m.is_finite() {
        return F::zero();
    }
    if !m.is_finite_variation() {
        return F::lit(GAUSS_CUTOFF);
    }
    let target = F::lit(SMALL_JUMP_STD * SMALL_JUMP_STD);
    // Largest ε on a log scale with ∫_0^ε x²Π ≤ target.
    let (mut lo, mut hi) = (F::lit(-30.0), F::lit(2.0));
    if m.int_x2_below(hi.exp()) <= target {
        return hi.exp();
    }
    for _ in 0..60 {
        let mid = (lo + hi) * F::lit(0.5);
        if m.int_x2_below(mid.exp()) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo.exp()
}

impl<F: Real> Driver<F> {
    pub fn new(spec: &LevySpec<F>, cutoff: Option<F>) -> Result<Self> {
        let one = F::one();
        let mut drift = spec.drift;
        let mut var = spec.sigma * spec.sigma;
        let mut bound = F::zero();
        let mut build = |m: &Option<LevyMeasure<F>>, sign: F| -> Result<Option<Side<F>>> {
            let Some(m) = m else { return Ok(None) };
            let eps = if m.is_finite() { F::zero() } else { cutoff.unwrap_or_else(|| auto_cutoff(m)) };
            if !m.is_finite() && !(eps > F::zero()) {
                return Err(Error::InvalidParameter("jump cutoff must be > 0 for infinite measures".into()));
            }
            if m.is_finite_variation() {
                let small = if eps > F::zero() { m.int_x_below(eps) } else { F::zero() };
                drift = drift + sign * small;
                bound = bound + small;
            } else {
                var = var + m.int_x2_below(eps);
                if eps < one {
                    drift = drift - sign * m.int_x_between(eps, one);
                } else {
                    drift = drift + sign * m.int_x_between(one, eps);
                }
            }
            let rate = if eps > F::zero() { m.tail(eps) } else { m.total_mass() };
            if !rate.is_finite() {
                return Err(Error::InvalidMeasure("infinite jump rate above the cutoff".into()));
            }
            Ok(Some(Side { measure: m.clone(), eps, rate }))
        };
        let pos = build(&spec.jumps_pos, one)?;
        let neg = build(&spec.jumps_neg, -one)?;
        let event_rate = pos.as_ref().map_or(F::zero(), |s| s.rate) + neg.as_ref().map_or(F::zero(), |s| s.rate) + spec.killing;
        Ok(Self { pos, neg, drift, sigma: var.sqrt(), killing: spec.killing, truncation_bound: bound, event_rate })
    }

    pub fn cutoffs(&self) -> (Option<F>, Option<F>) {
        (self.pos.as_ref().map(|s| s.eps), self.neg.as_ref().map(|s| s.eps))
    }

    pub fn is_diffusive(&self) -> bool {
        self.sigma > F::zero()
    }
}

/// What happens at the end of a segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Event<F> {
    None,
    Jump(F),
    Kill,
}

/// Linear stretch of ξ from `v0` to `v1` over `dt`, followed by `event`.
#[derive(Debug, Clone, Copy)]
pub struct Segment<F> {
    pub dt: F,
    pub v0: F,
    pub v1: F,
    pub event: Event<F>,
}

impl<F: Real> Segment<F> {
    /// ∫ e^{ξ} over the segment.
    pub fn integral(&self) -> F {
        exp_integral(self.v0, self.v1 - self.v0, self.dt)
    }
}

/// ∫_0^dt e^{v0 + z s/dt} ds.
pub fn exp_integral<F: Real>(v0: F, z: F, dt: F) -> F {
    if z.abs() < F::lit(1e-8) {
        dt * v0.exp() * (F::one() + z * F::lit(0.5))
    } else {
        dt * v0.exp() * z.exp_m1() / z
    }
}

/// Solves ∫_0^s e^{v0 + z u/dt} du = target for s ≤ dt; returns (s, ξ at s).
pub fn invert_segment<F: Real>(v0: F, z: F, dt: F, target: F) -> (F, F) {
    let e0 = v0.exp();
    if z.abs() < F::lit(1e-12) {
        let s = target / e0;
        return (s.min(dt), v0 + z * s / dt);
    }
    let r = target * z / (dt * e0);
    let s = (dt / z * r.ln_1p()).min(dt).max(F::zero());
    (s, v0 + r.ln_1p())
}

/// Walks ξ from 0 segment by segment.
pub struct Walker<'a, F: Real> {
    drv: &'a Driver<F>,
    pub t: F,
    pub xi: F,
    until_event: Option<F>,
    pub segments: usize,
}

impl<'a, F: Real> Walker<'a, F> {
    pub fn new(drv: &'a Driver<F>) -> Self {
        Self { drv, t: F::zero(), xi: F::zero(), until_event: None, segments: 0 }
    }

    pub fn starting_at(drv: &'a Driver<F>, xi: F) -> Self {
        Self { xi, ..Self::new(drv) }
    }

    /// Advances by at most `hmax`, stopping early at the next event.
    pub fn step<R: Rng + ?Sized>(&mut self, hmax: F, rng: &mut R) -> Result<Segment<F>> {
        let d = self.drv;
        let wait = match self.until_event {
            Some(w) => w,
            None => {
                let w = if d.event_rate > F::zero() { F::std_exp(rng) / d.event_rate } else { F::infinity() };
                self.until_event = Some(w);
                w
            }
        };
        let hits = wait <= hmax;
        let dt = if hits { wait } else { hmax };
        let mut v1 = self.xi + d.drift * dt;
        if d.sigma > F::zero() && dt > F::zero() {
            v1 = v1 + d.sigma * dt.sqrt() * F::std_normal(rng);
        }
        let v0 = self.xi;
        let event = if hits {
            self.until_event = None;
            self.draw_event(rng)?
        } else {
            self.until_event = Some(wait - dt);
            Event::None
        };
        self.t = self.t + dt;
        self.xi = match event {
            Event::Jump(j) => v1 + j,
            _ => v1,
        };
        self.segments += 1;
        Ok(Segment { dt, v0, v1, event })
    }

    fn draw_event<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Event<F>> {
        let d = self.drv;
        let u = F::open01(rng) * d.event_rate;
        if u < d.killing {
            return Ok(Event::Kill);
        }
        let pr = d.pos.as_ref().map_or(F::zero(), |s| s.rate);
        if u < d.killing + pr {
            let s = d.pos.as_ref().unwrap();
            Ok(Event::Jump(s.measure.sample_above(s.eps, rng)?))
        } else {
            let s = d.neg.as_ref().ok_or(Error::EmptyTail)?;
            Ok(Event::Jump(-s.measure.sample_above(s.eps, rng)?))
        }
    }
}

/// Draws one jump size from Π restricted to (ε, ∞).
pub fn sample_jump<F: Real, R: Rng + ?Sized>(measure: &LevyMeasure<F>, min_size: F, rng: &mut R) -> Result<F> {
    measure.sample_above(min_size, rng)
}

/// Path on [0, horizon] with grid points every Δ and jump landings inserted.
pub fn sample_path<F: Real>(spec: &LevySpec<F>, cfg: &SimConfig<F>, horizon: F) -> Result<PathSample<F>> {
    let drv = Driver::new(spec, cfg.jump_cutoff)?;
    let mut rng = cfg.rng(cfg.replica);
    let mut w = Walker::new(&drv);
    let mut times = vec![F::zero()];
    let mut values = vec![F::zero()];
    let mut is_jump = vec![false];
    let mut killed = false;
    let mut kill_time = None;
    let until_killed = cfg.horizon_policy == HorizonPolicy::UntilKilled && spec.killing > F::zero();
    let drift_only = !drv.is_diffusive();
    loop {
        let left = horizon - w.t;
        if !until_killed && left <= F::zero() {
            break;
        }
        let h = if drift_only && !until_killed {
            left
        } else if until_killed && drift_only {
            F::infinity()
        } else if until_killed {
            cfg.step
        } else {
            cfg.step.min(left)
        };
        let seg = w.step(h, &mut rng)?;
        if w.segments > cfg.max_segments {
            return Err(Error::NoConvergence { iterations: w.segments, residual: f64::NAN });
        }
        times.push(w.t);
        values.push(seg.v1);
        is_jump.push(false);
        match seg.event {
            Event::Jump(j) => {
                times.push(w.t);
                values.push(seg.v1 + j);
                is_jump.push(true);
            }
            Event::Kill => {
                killed = true;
                kill_time = Some(w.t);
                break;
            }
            Event::None => {}
        }
    }
    Ok(PathSample { times, values, is_jump, killed, kill_time, truncation_bound: drv.truncation_bound })
}

impl<F: Real> PathSample<F> {
    /// CSV rows (time, value, is_jump).
    pub fn to_csv(&self) -> String {
        let mut s = String::from("time,value,is_jump\n");
        for i in 0..self.times.len() {
            s.push_str(&format!("{},{},{}\n", self.times[i], self.values[i], self.is_jump[i] as u8));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::LampertiShape;

    #[test]
    fn pure_drift_is_a_line() {
        let spec = LevySpec::subordinator(1.0f64, None, 0.0).unwrap();
        let p = sample_path(&spec, &SimConfig::default(), 2.0).unwrap();
        assert!(!p.killed);
        assert_eq!(*p.times.last().unwrap(), 2.0);
        assert!((p.values.last().unwrap() + 2.0).abs() < 1e-15);
    }

    #[test]
    fn stable_truncation_bound_is_reported() {
        let c = 0.5 / crate::special::gamma(0.5f64);
        let spec = LevySpec::subordinator(0.0, Some(LevyMeasure::stable(c, 0.5).unwrap()), 0.0).unwrap();
        let cfg = SimConfig { jump_cutoff: Some(1e-6), ..SimConfig::default() };
        let p = sample_path(&spec, &cfg, 1.0).unwrap();
        let want = c * 1e-6f64.powf(0.5) / 0.5;
        assert!((p.truncation_bound / want - 1.0).abs() < 1e-12);
    }

    #[test]
    fn poisson_jump_counts() {
        let spec = LevySpec::new(0.0f64, 0.0, Some(LevyMeasure::exp(1.0, 1.0).unwrap()), None, 0.0).unwrap();
        let t = 3.0;
        let n = 10000;
        let counts: Vec<f64> = (0..n)
            .map(|r| {
                let cfg = SimConfig { replica: r, seed: 5, ..SimConfig::default() };
                sample_path(&spec, &cfg, t).unwrap().is_jump.iter().filter(|&&j| j).count() as f64
            })
            .collect();
        let mean = counts.iter().sum::<f64>() / n as f64;
        assert!((mean - t).abs() < 3.0 * (t / n as f64).sqrt(), "{mean}");
    }

    #[test]
    fn subordinator_paths_are_monotone() {
        let spec = LevySpec::subordinator(
            0.3f64,
            Some(LevyMeasure::lamperti(0.4, 0.5, LampertiShape::Down).unwrap()),
            0.5,
        )
        .unwrap();
        for r in 0..50 {
            let cfg = SimConfig { replica: r, horizon_policy: HorizonPolicy::UntilKilled, ..SimConfig::default() };
            let p = sample_path(&spec, &cfg, 5.0).unwrap();
            assert!(p.values.windows(2).all(|w| w[1] <= w[0]));
            assert!(p.killed);
        }
    }

    #[test]
    fn segment_inversion_roundtrip() {
        for &(v0, z, dt) in &[(0.3f64, -1.2, 0.5), (-2.0, 3.0, 0.1), (1.0, 1e-14, 2.0)] {
            let a = exp_integral(v0, z, dt);
            let (s, v) = invert_segment(v0, z, dt, 0.6 * a);
            assert!((exp_integral(v0, z * s / dt, s) / (0.6 * a) - 1.0).abs() < 1e-12);
            assert!((v - (v0 + z * s / dt)).abs() < 1e-12);
        }
    }
}
