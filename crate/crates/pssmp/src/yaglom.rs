//! Regime classification of the Yaglom limit and the factor laws R with R·I equal in law to an
//! exponential, Beta(1, γ) or Pareto(γ) variable.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expfun::{moments_i_general, ExpFunctional, MomentSequence, MomentSource};
use crate::lamperti::Lamperti;
use crate::levy::{LevyMeasure, LevySpec};
use crate::mc::collect_all;
use crate::norming::NormalizerFn;
use crate::path::SimConfig;
use crate::real::Real;
use crate::special::ln_gamma;
use crate::stats::WeightedSample;

/// Margins for the numeric proxies of the small-jump conditions.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Margins {
    /// liminf proxy above this passes.
    pub lower_pass: f64,
    /// liminf proxy at or below this fails; in between is inconclusive.
    pub lower_fail: f64,
    /// limsup proxy below this passes (positive-drift case).
    pub upper_pass: f64,
    pub upper_fail: f64,
}

impl Default for Margins {
    fn default() -> Self {
        Self { lower_pass: 0.05, lower_fail: 0.01, upper_pass: 0.95, upper_fail: 0.99 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

/// x·Π̄(x)/∫₀^x Π̄ on a grid near 0.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub name: String,
    pub x: Vec<f64>,
    pub ratio: Vec<f64>,
    pub liminf: f64,
    pub limsup: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FrechetVia {
    CramerRoot,
    UserAssertedRegularVariation,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum Regime {
    NoYaglomKnown { reason: String },
    GumbelDriftFree { condition: Option<ConditionReport> },
    GumbelPosDrift { d: f64, condition: ConditionReport },
    Weibull { d: f64, gamma0: f64 },
    Frechet { gamma: f64, via: FrechetVia },
}

#[derive(Debug, Clone, Serialize)]
pub struct YaglomClassification {
    #[serde(flatten)]
    pub regime: Regime,
    /// A QS law exists iff −ξ is a subordinator.
    pub qs_exists: bool,
    pub t_f: f64,
}

impl YaglomClassification {
    pub fn name(&self) -> &'static str {
        match self.regime {
            Regime::NoYaglomKnown { .. } => "no_yaglom_known",
            Regime::GumbelDriftFree { .. } => "gumbel_drift_free",
            Regime::GumbelPosDrift { .. } => "gumbel_pos_drift",
            Regime::Weibull { .. } => "weibull",
            Regime::Frechet { .. } => "frechet",
        }
    }
}

/// Decade grid on [1e−8, 1e−2] with four points per decade.
fn small_grid() -> Vec<f64> {
    (0..=24).map(|k| 10f64.powf(-8.0 + k as f64 / 4.0)).collect()
}

pub fn small_jump_ratio<F: Real>(m: &LevyMeasure<F>, name: &str, margins: &Margins, upper: bool) -> ConditionReport {
    let x = small_grid();
    let ratio: Vec<f64> = x
        .iter()
        .map(|&x| {
            let xf = F::lit(x);
            let xt = xf * m.tail(xf);
            // ∫₀^x Π̄ = ∫₀^x uΠ(du) + xΠ̄(x)
            (xt / (m.int_x_below(xf) + xt)).to_f64x()
        })
        .collect();
    let liminf = ratio.iter().copied().fold(f64::INFINITY, f64::min);
    let limsup = ratio.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut verdict = if liminf > margins.lower_pass {
        Verdict::Holds
    } else if liminf <= margins.lower_fail {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    };
    if upper && verdict == Verdict::Holds {
        if limsup >= margins.upper_fail {
            verdict = Verdict::Fails;
        } else if limsup >= margins.upper_pass {
            verdict = Verdict::Inconclusive;
        }
    }
    ConditionReport { name: name.to_string(), x, ratio, liminf, limsup, verdict }
}

/// Decision tree over the monotone regimes and the Cramér route.
pub fn classify<F: Real + Serialize>(spec: &LevySpec<F>) -> Result<YaglomClassification> {
    classify_with(spec, &Margins::default(), None)
}

/// As `classify`, with a user-asserted regular-variation index for non-Cramér specs.
pub fn classify_with_assertion<F: Real + Serialize>(spec: &LevySpec<F>, gamma: F) -> Result<YaglomClassification> {
    classify_with(spec, &Margins::default(), Some(gamma))
}

pub fn classify_with<F: Real + Serialize>(spec: &LevySpec<F>, margins: &Margins, asserted: Option<F>) -> Result<YaglomClassification> {
    spec.validate()?;
    if spec.may_diverge() {
        return Err(Error::MayDiverge("I is not certified finite".into()));
    }
    let t_f = crate::expfun::support_tf(spec).to_f64x();
    if spec.is_subordinator_neg() {
        let d = spec.sub_drift();
        let m = spec.sub_measure();
        let finite = m.is_none_or(|m| m.is_finite());
        let regime = if d > F::zero() {
            if finite {
                let mass = m.map_or(F::zero(), |m| m.total_mass());
                Regime::Weibull { d: d.to_f64x(), gamma0: ((mass + spec.killing) / d).to_f64x() }
            } else {
                let rep = small_jump_ratio(m.unwrap(), "positive_increase_strict", margins, true);
                match rep.verdict {
                    Verdict::Holds => Regime::GumbelPosDrift { d: d.to_f64x(), condition: rep },
                    Verdict::Inconclusive => return Err(Error::Inconclusive(format!("small-jump ratio in [{:.3}, {:.3}]", rep.liminf, rep.limsup))),
                    Verdict::Fails => Regime::NoYaglomKnown { reason: format!("small-jump ratio range [{:.3}, {:.3}] outside (0, 1)", rep.liminf, rep.limsup) },
                }
            }
        } else {
            match m {
                // Finite Π: the ratio tends to 1.
                None => Regime::GumbelDriftFree { condition: None },
                Some(m) if m.is_finite() => Regime::GumbelDriftFree { condition: None },
                Some(m) => {
                    let rep = small_jump_ratio(m, "positive_increase", margins, false);
                    match rep.verdict {
                        Verdict::Holds => Regime::GumbelDriftFree { condition: Some(rep) },
                        Verdict::Inconclusive => return Err(Error::Inconclusive(format!("small-jump liminf proxy {:.3}", rep.liminf))),
                        Verdict::Fails => Regime::NoYaglomKnown { reason: format!("small-jump liminf proxy {:.3}", rep.liminf) },
                    }
                }
            }
        };
        return Ok(YaglomClassification { regime, qs_exists: true, t_f });
    }
    let regime = match spec.cramer_root()? {
        Some(g) if frechet_necessary(spec, g) => Regime::Frechet { gamma: g.to_f64x(), via: FrechetVia::CramerRoot },
        _ => match asserted {
            Some(g) if g > F::zero() => Regime::Frechet { gamma: g.to_f64x(), via: FrechetVia::UserAssertedRegularVariation },
            _ => Regime::NoYaglomKnown { reason: "no Cramer root and no asserted regular variation".into() },
        },
    };
    Ok(YaglomClassification { regime, qs_exists: false, t_f })
}

/// E[e^{γξ₁}] ≤ 1 and E[e^{(γ+δ)ξ₁}] > 1 for small δ.
fn frechet_necessary<F: Real>(spec: &LevySpec<F>, g: F) -> bool {
    let tol = F::lit(1e-9);
    let up = spec.mgf_exponent(g * (F::one() + F::lit(1e-3)));
    spec.mgf_exponent(g) <= tol && (up > F::zero() || !up.is_finite())
}

/// Normalizing function g(t) of the regime.
pub fn normalizer<F: Real>(spec: &LevySpec<F>, c: &YaglomClassification) -> Result<NormalizerFn<F>> {
    match &c.regime {
        Regime::GumbelDriftFree { .. } => Ok(NormalizerFn::gumbel_drift_free(spec.sub_measure().cloned(), spec.killing)),
        Regime::GumbelPosDrift { .. } => {
            let m = spec.sub_measure().cloned().ok_or(Error::NoYaglomRegime)?;
            Ok(NormalizerFn::gumbel_pos_drift(m, spec.sub_drift()))
        }
        Regime::Weibull { .. } => Ok(NormalizerFn::weibull(spec.sub_drift())),
        Regime::Frechet { .. } => Ok(NormalizerFn::frechet()),
        Regime::NoYaglomKnown { .. } => Err(Error::NoYaglomRegime),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FactorKind {
    Exp,
    Beta { gamma: f64 },
    Pareto { gamma: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct FactorLaw<F: Real + Serialize> {
    pub kind: FactorKind,
    pub moments: MomentSequence<F>,
    pub closed_form: Option<String>,
    pub support_sup: Option<F>,
}

/// E[R^n] = ∏_{i≤n} φ(i).
pub fn exp_factor_moments<F: Real + Serialize>(spec: &LevySpec<F>, n: usize) -> Result<FactorLaw<F>> {
    if !spec.is_subordinator_neg() {
        return Err(Error::NotASubordinator("exponential factor needs a subordinator".into()));
    }
    let mut m = Vec::with_capacity(n);
    let mut acc = F::one();
    for i in 1..=n {
        acc = acc * spec.laplace_exponent(F::from_usize(i).unwrap())?;
        m.push(acc);
    }
    Ok(FactorLaw { kind: FactorKind::Exp, moments: MomentSequence::from_moments(m, MomentSource::Recursion), closed_form: None, support_sup: None })
}

/// Either a factor law or the reason it does not exist.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Factorization<F: Real + Serialize> {
    Law(FactorLaw<F>),
    NotFactorizable { reason: String },
}

/// E[R^n] = ∏ φ(i)/(i+γ), supported on [0, d].
pub fn beta_factor<F: Real + Serialize>(spec: &LevySpec<F>, gamma: F, n: usize) -> Result<Factorization<F>> {
    if !(gamma > F::zero()) {
        return Err(Error::InvalidParameter(format!("gamma must be > 0, got {gamma}")));
    }
    let nf = |reason: &str| Ok(Factorization::NotFactorizable { reason: reason.to_string() });
    if !spec.is_subordinator_neg() {
        return nf("not a subordinator");
    }
    let d = spec.sub_drift();
    if !(d > F::zero()) {
        return nf("drift condition: d > 0 required");
    }
    let m = spec.sub_measure();
    if m.is_some_and(|m| !m.is_finite()) {
        return nf("finite Levy measure required");
    }
    let mass = m.map_or(F::zero(), |m| m.total_mass()) + spec.killing;
    if mass > d * gamma * (F::one() + F::lit(1e-12)) {
        return nf("mass condition: Pi(0,inf) + q <= d*gamma");
    }
    let mut mm = Vec::with_capacity(n);
    let mut acc = F::one();
    for i in 1..=n {
        let x = F::from_usize(i).unwrap();
        acc = acc * spec.laplace_exponent(x)? / (x + gamma);
        mm.push(acc);
    }
    Ok(Factorization::Law(FactorLaw {
        kind: FactorKind::Beta { gamma: gamma.to_f64x() },
        moments: MomentSequence::from_moments(mm, MomentSource::Recursion),
        closed_form: None,
        support_sup: Some(d),
    }))
}

/// Settings for the importance sampler over starting levels.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ParetoSamplerConfig {
    pub x_min: f64,
    pub x_max: f64,
}

impl Default for ParetoSamplerConfig {
    fn default() -> Self {
        Self { x_min: 1e-3, x_max: 1e4 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ParetoFactor<F: Real + Serialize> {
    pub law: FactorLaw<F>,
    #[serde(skip)]
    pub sample: WeightedSample<F>,
    pub ess: f64,
    /// True when the Cramér equation holds at γ (tilted sampler).
    pub cramer: bool,
    /// Bound on the mass lost to the [x_min, x_max] truncation, relative to the total.
    pub truncation: Option<f64>,
}

/// Moments E[J^n] = E[P^n]/E[I^n] for n < γ, with P Pareto(γ) on (0, ∞).
fn pareto_moments<F: Real + Serialize>(spec: &LevySpec<F>, gamma: F) -> MomentSequence<F> {
    let n = (gamma.to_f64x().ceil() as usize).saturating_sub(1).min(20);
    let mi = moments_i_general(spec, n);
    let g = gamma.to_f64x();
    let mut out = Vec::new();
    for k in 1..=n.min(mi.finite_prefix) {
        if (k as f64) >= g {
            break;
        }
        let kf = k as f64;
        // E[P^k] = Γ(k+1)Γ(γ−k)/Γ(γ)
        let ep = (ln_gamma(kf + 1.0) + ln_gamma(g - kf) - ln_gamma(g)).exp();
        out.push(F::lit(ep) / mi.moments[k - 1]);
    }
    MomentSequence::from_moments(out, MomentSource::Recursion)
}

/// Weighted sample of the Pareto factor J_γ.
pub fn pareto_factor<F: Real + Serialize>(spec: &LevySpec<F>, gamma: F, n: usize, cfg: &SimConfig<F>, ps: &ParetoSamplerConfig) -> Result<ParetoFactor<F>> {
    if !(gamma > F::zero()) {
        return Err(Error::InvalidParameter(format!("gamma must be > 0, got {gamma}")));
    }
    let psi = spec.mgf_exponent(gamma);
    let tol = F::lit(1e-9);
    if !(psi <= tol) {
        return Err(Error::NotFactorizable(format!("E[exp(gamma xi_1)] > 1 at gamma = {gamma}")));
    }
    let law = FactorLaw { kind: FactorKind::Pareto { gamma: gamma.to_f64x() }, moments: pareto_moments(spec, gamma), closed_form: None, support_sup: None };
    if psi.abs() <= tol {
        // J has law ∝ y^{1−γ} times the law of 1/I*, I* built from the tilted process.
        let star = spec.esscher_tilt(gamma)?.negate();
        let ef = ExpFunctional::new(&star, cfg)?;
        let istar = collect_all(n, 0, |r| ef.sample(r).map(|s| s.value))?;
        let values = istar.iter().map(|i| F::one() / *i).collect();
        let weights = istar.iter().map(|i| i.powf(gamma - F::one())).collect();
        let sample = WeightedSample::new(values, weights)?;
        let ess = sample.ess().to_f64x();
        return Ok(ParetoFactor { law, sample, ess, cramer: true, truncation: None });
    }
    // Start levels x log-uniform on [x_min, x_max]; weight x^{−γ}·1{1 < T₀}, emitting X₁.
    let lam = Lamperti::new(spec, cfg)?;
    let (lo, hi) = (F::lit(ps.x_min.ln()), F::lit(ps.x_max.ln()));
    let draws: Vec<Option<(F, F)>> = collect_all(n, 0, |r| {
        let mut rng = cfg.rng(r);
        let x = (lo + (hi - lo) * F::open01(&mut rng)).exp();
        Ok(lam.x_at(x, F::one(), &mut rng)?.map(|y| (y, x.powf(-gamma))))
    })?;
    let (values, weights): (Vec<F>, Vec<F>) = draws.into_iter().flatten().unzip();
    if values.is_empty() {
        return Err(Error::Empty);
    }
    // Total weight estimates ∫ x^{−1−γ}P(I > 1/x) dx = E[I^γ]/γ on the window.
    let total = weights.iter().fold(F::zero(), |a, w| a + *w).to_f64x() * (ps.x_max.ln() - ps.x_min.ln()) / n as f64;
    let g = gamma.to_f64x();
    let upper = ps.x_max.powf(-g) / g;
    let sample = WeightedSample::new(values, weights)?;
    let ess = sample.ess().to_f64x();
    Ok(ParetoFactor { law, sample, ess, cramer: false, truncation: Some(upper / (total + upper)) })
}

/// Doubles the sample size until the effective sample size reaches `ess_target`.
pub fn pareto_factor_with_ess<F: Real + Serialize>(
    spec: &LevySpec<F>,
    gamma: F,
    ess_target: f64,
    max_n: usize,
    cfg: &SimConfig<F>,
    ps: &ParetoSamplerConfig,
) -> Result<ParetoFactor<F>> {
    let mut n = (2.0 * ess_target).ceil() as usize;
    loop {
        let p = pareto_factor(spec, gamma, n, cfg, ps)?;
        if p.ess >= ess_target || n >= max_n {
            return Ok(p);
        }
        n = (n * 2).min(max_n);
    }
}
