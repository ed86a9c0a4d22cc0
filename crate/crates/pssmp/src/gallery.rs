//! Worked examples with closed-form laws.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::levy::json::spec_to_json;
use crate::levy::{LampertiShape, LevyMeasure, LevySpec};
use crate::quad::{integrate, integrate_inf};
use crate::real::Real;
use crate::rng::{self, ReplicaRng};
use crate::special::{beta_reg, erf, gamma, gamma_p, ln_gamma, rgamma};
use crate::yaglom::FactorKind;

pub type SamplerFn = Arc<dyn Fn(&mut ReplicaRng) -> f64 + Send + Sync>;
pub type CurveFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type MomentFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

/// A law known in closed form.
#[derive(Clone)]
pub struct RefLaw {
    pub closed_form: String,
    pub sampler: Option<SamplerFn>,
    pub cdf: Option<CurveFn>,
    pub density: Option<CurveFn>,
    pub moments: Option<MomentFn>,
}

impl RefLaw {
    fn new(closed_form: impl Into<String>) -> Self {
        Self { closed_form: closed_form.into(), sampler: None, cdf: None, density: None, moments: None }
    }

    fn sampler(mut self, f: impl Fn(&mut ReplicaRng) -> f64 + Send + Sync + 'static) -> Self {
        self.sampler = Some(Arc::new(f));
        self
    }

    fn cdf(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.cdf = Some(Arc::new(f));
        self
    }

    fn density(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.density = Some(Arc::new(f));
        self
    }

    fn moments(mut self, f: impl Fn(usize) -> f64 + Send + Sync + 'static) -> Self {
        self.moments = Some(Arc::new(f));
        self
    }

    pub fn sample(&self, n: usize, seed: u64) -> Option<Vec<f64>> {
        let s = self.sampler.as_ref()?;
        Some(rng::replicate(0, n, |i| s(&mut rng::replica_rng(seed, i))))
    }

    pub fn mean(&self) -> Option<f64> {
        self.moments.as_ref().map(|m| m(1))
    }

    fn to_json(&self) -> Value {
        json!({
            "closed_form": self.closed_form,
            "sampler": self.sampler.is_some(),
            "cdf": self.cdf.is_some(),
            "density": self.density.is_some(),
            "moments": self.moments.is_some(),
        })
    }
}

#[derive(Clone)]
pub struct GalleryEntry {
    pub name: &'static str,
    pub label: Option<char>,
    pub description: String,
    pub params: Value,
    /// Spec of the 1-pssMp (already rescaled by α).
    pub spec: LevySpec<f64>,
    pub i_law: Option<RefLaw>,
    /// Law of I* when it differs from the law of I.
    pub i_star_law: Option<RefLaw>,
    pub factor_kind: Option<FactorKind>,
    pub factor_law: Option<RefLaw>,
    /// Limit of X_t/t conditioned on survival.
    pub yaglom_law: Option<RefLaw>,
    pub expected_regime: &'static str,
    pub cramer_gamma: Option<f64>,
    /// Index a with P(I > x) regularly varying of index −a.
    pub tail_index: Option<f64>,
    /// False where path simulation is replaced by analytic checks.
    pub path_sim: bool,
}

impl std::fmt::Debug for GalleryEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GalleryEntry").field("name", &self.name).field("params", &self.params).finish()
    }
}

impl GalleryEntry {
    pub fn to_json(&self) -> Result<Value> {
        let law = |l: &Option<RefLaw>| l.as_ref().map_or(Value::Null, RefLaw::to_json);
        Ok(json!({
            "name": self.name,
            "label": self.label.map(|c| c.to_string()),
            "description": self.description,
            "params": self.params,
            "spec": spec_to_json(&self.spec)?,
            "i_law": law(&self.i_law),
            "i_star_law": law(&self.i_star_law),
            "factor_kind": self.factor_kind,
            "factor_law": law(&self.factor_law),
            "yaglom_law": law(&self.yaglom_law),
            "expected_regime": self.expected_regime,
            "cramer_gamma": self.cramer_gamma,
            "tail_index": self.tail_index,
            "path_sim": self.path_sim,
        }))
    }
}

fn bad(msg: String) -> Error {
    Error::InvalidParameter(msg)
}

/// Mittag-Leffler law with E[I^n] = n!/Γ(1+nα).
fn mittag_leffler(alpha: f64) -> RefLaw {
    let law = RefLaw::new(format!("tau^(-{alpha}) with tau positive {alpha}-stable"))
        .moments(move |n| (ln_gamma(n as f64 + 1.0) - ln_gamma(n as f64 * alpha + 1.0)).exp());
    if alpha == 0.5 {
        law.sampler(|r| 2f64.sqrt() * f64::std_normal(r).abs()).cdf(|x| if x <= 0.0 { 0.0 } else { erf(x / 2.0) })
    } else {
        law.sampler(move |r| rng::positive_stable(alpha, r).powf(-alpha))
    }
}

/// Killed stable subordinator with φ(λ) = Γ(λ+1)/Γ(λ+1−α), as a 1/α-pssMp.
pub fn killed_stable_sub(alpha: f64) -> Result<GalleryEntry> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(bad(format!("alpha must lie in (0,1), got {alpha}")));
    }
    let c = alpha * rgamma(1.0 - alpha);
    let xi = LevySpec::subordinator(0.0, Some(LevyMeasure::lamperti(c, alpha, LampertiShape::Down)?), c / alpha)?;
    let factor = RefLaw::new(format!("e^{alpha}, e standard exponential"))
        .sampler(move |r| f64::std_exp(r).powf(alpha))
        .cdf(move |x| if x <= 0.0 { 0.0 } else { -(-x.powf(1.0 / alpha)).exp_m1() })
        .moments(move |n| gamma(n as f64 * alpha + 1.0));
    Ok(GalleryEntry {
        name: "killed-stable-sub",
        label: Some('a'),
        description: "stable subordinator killed at an independent exponential time".into(),
        params: json!({ "alpha": alpha }),
        spec: xi.rescale_alpha(alpha)?,
        i_law: Some(mittag_leffler(alpha)),
        i_star_law: None,
        factor_kind: Some(FactorKind::Exp),
        factor_law: Some(factor),
        yaglom_law: None,
        expected_regime: "gumbel_drift_free",
        cramer_gamma: None,
        tail_index: None,
        path_sim: true,
    })
}

/// φ(λ) = cλ + qλ/(λ+ρ) (ρ > 0) or cλ + q (ρ = 0), as a 1/α-pssMp.
///
/// The Beta factor uses `gamma`; `None` picks ρ_α + q/c_α + 1.
pub fn drift_exp_jump(c: f64, q: f64, rho: f64, alpha: f64, gamma_factor: Option<f64>) -> Result<GalleryEntry> {
    if !(c > 0.0 && q > 0.0 && rho >= 0.0 && alpha > 0.0) {
        return Err(bad(format!("need c>0, q>0, rho>=0, alpha>0; got c={c}, q={q}, rho={rho}, alpha={alpha}")));
    }
    let xi = if rho > 0.0 {
        LevySpec::subordinator(c, Some(LevyMeasure::exp(q, rho)?), 0.0)?
    } else {
        LevySpec::subordinator(c, None, q)?
    };
    let ca = c * alpha;
    let ra = rho / alpha;
    let k = q / ca;
    let a = ra + k;
    let g = gamma_factor.unwrap_or(a + 1.0);
    if !(g >= k) {
        return Err(bad(format!("factor gamma must be >= q/c_alpha = {k}, got {g}")));
    }
    let i_law = RefLaw::new(format!("Beta({}, {k})/{ca}", ra + 1.0))
        .sampler(move |r| rng::beta(ra + 1.0, k, r) / ca)
        .cdf(move |x| if x <= 0.0 { 0.0 } else if x >= 1.0 / ca { 1.0 } else { beta_reg(ra + 1.0, k, x * ca) })
        .moments(move |n| {
            // E[I^n] = n!/∏ φ_α(i)
            (1..=n)
                .map(|i| {
                    let i = i as f64;
                    i / (ca * i + q * i / (i + ra))
                })
                .product()
        });
    let moments = move |n: usize| -> f64 {
        (1..=n)
            .map(|i| {
                let i = i as f64;
                ca * i / (i + g) * (i + a) / (i + ra)
            })
            .product()
    };
    let mut factor = RefLaw::new(format!("{ca}·BetaProd(1, {g}, {}, {})", a + 1.0, -k)).moments(moments);
    if rho == 0.0 && g == k {
        factor = RefLaw::new(format!("point mass at {ca}"))
            .sampler(move |_| ca)
            .cdf(move |x| if x < ca { 0.0 } else { 1.0 })
            .moments(move |n| ca.powi(n as i32));
    } else if rho == 0.0 {
        factor = factor
            .sampler(move |r| ca * rng::beta(1.0 + k, g - k, r))
            .cdf(move |x| if x <= 0.0 { 0.0 } else if x >= ca { 1.0 } else { beta_reg(1.0 + k, g - k, x / ca) });
    } else if g > a {
        // i/(i+ρ_α) are Beta(1, ρ_α) moments and (i+a)/(i+γ) are Beta(a+1, γ−a) moments.
        factor = factor.sampler(move |r| ca * rng::beta(1.0, ra, r) * rng::beta(a + 1.0, g - a, r));
    }
    Ok(GalleryEntry {
        name: if rho == 0.0 { "killed-drift" } else { "drift-exp-jump" },
        label: Some('b'),
        description: "subordinator with drift and exponential jumps (killing when rho = 0)".into(),
        params: json!({ "c": c, "q": q, "rho": rho, "alpha": alpha, "gamma": g }),
        spec: xi.rescale_alpha(alpha)?,
        i_law: Some(i_law),
        i_star_law: None,
        factor_kind: Some(FactorKind::Beta { gamma: g }),
        factor_law: Some(factor),
        yaglom_law: None,
        expected_regime: "weibull",
        cramer_gamma: None,
        tail_index: None,
        path_sim: true,
    })
}

/// ξ = σB − bt, as a 1/α-pssMp.
pub fn brownian_drift(sigma: f64, b: f64, alpha: f64) -> Result<GalleryEntry> {
    if !(sigma > 0.0 && b > 0.0 && alpha > 0.0) {
        return Err(bad(format!("need sigma>0, b>0, alpha>0; got {sigma}, {b}, {alpha}")));
    }
    let s2 = (alpha * sigma).powi(2);
    let k = 2.0 * b / (alpha * sigma * sigma);
    let i_law = RefLaw::new(format!("2/({s2}·Gamma({k}))"))
        .sampler(move |r| 2.0 / (s2 * rng::gamma(k, r)))
        .cdf(move |x| if x <= 0.0 { 0.0 } else { 1.0 - gamma_p(k, 2.0 / (s2 * x)) })
        .moments(move |n| {
            if (n as f64) < k {
                (2.0 / s2).powi(n as i32) * (ln_gamma(k - n as f64) - ln_gamma(k)).exp()
            } else {
                f64::INFINITY
            }
        });
    let c = s2 / 2.0;
    let factor = RefLaw::new(format!("{c}·Exp(1)"))
        .sampler(move |r| c * f64::std_exp(r))
        .cdf(move |x| if x <= 0.0 { 0.0 } else { -(-x / c).exp_m1() })
        .density(move |x| if x < 0.0 { 0.0 } else { (-x / c).exp() / c })
        .moments(move |n| c.powi(n as i32) * gamma(n as f64 + 1.0));
    // X_t/t^{1/α} has density (α/c)y^{α−1}e^{−y^α/c}; in the 1-pssMp scale this is X^α/t ~ c·Exp(1).
    let yaglom = factor.clone();
    Ok(GalleryEntry {
        name: "brownian-drift",
        label: Some('c'),
        description: "Brownian motion with negative drift".into(),
        params: json!({ "sigma": sigma, "b": b, "alpha": alpha }),
        spec: LevySpec::brownian(sigma, -b)?.rescale_alpha(alpha)?,
        i_law: Some(i_law.clone()),
        i_star_law: Some(i_law),
        factor_kind: Some(FactorKind::Pareto { gamma: k }),
        factor_law: Some(factor),
        yaglom_law: Some(yaglom),
        expected_regime: "frechet",
        cramer_gamma: Some(k),
        tail_index: Some(k),
        path_sim: true,
    })
}

/// Density of X_t/t^{1/α} in the original scale for [`brownian_drift`].
pub fn brownian_yaglom_density(sigma: f64, alpha: f64, y: f64) -> f64 {
    let c = (alpha * sigma).powi(2) / 2.0;
    if y <= 0.0 {
        return 0.0;
    }
    alpha / c * y.powf(alpha - 1.0) * (-y.powf(alpha) / c).exp()
}

/// Lamperti process of a stable CSBP with branching mechanism c₊u^α, 1 < α < 2, as a 1/(α−1)-pssMp.
pub fn stable_csbp(alpha: f64, c_plus: f64) -> Result<GalleryEntry> {
    if !(alpha > 1.0 && alpha < 2.0 && c_plus > 0.0) {
        return Err(bad(format!("need 1 < alpha < 2 and c_plus > 0, got {alpha}, {c_plus}")));
    }
    let beta = alpha - 1.0;
    let c = c_plus / gamma(-alpha);
    let m = LevyMeasure::lamperti(c, alpha, LampertiShape::Up)?;
    // Compensating against e^z − 1 instead of z 1_{z≤1}.
    let dens = |z: f64| c * z.exp() / z.exp_m1().powf(1.0 + alpha);
    let head = integrate(
        |z: f64| {
            let d = if z < 1e-4 { -z * z / 2.0 * (1.0 + z / 3.0 + z * z / 12.0) } else { z - z.exp_m1() };
            d * dens(z)
        },
        0.0,
        1.0,
        1e-13,
    );
    let tail = integrate_inf(|z: f64| -z.exp_m1() * dens(z), 1.0, 1.0, 1e-13);
    let xi = LevySpec::new(head + tail, 0.0, Some(m), None, 0.0)?;
    let scale = c_plus * beta;
    let shape = 1.0 / beta;
    let i_law = RefLaw::new(format!("Frechet({shape})/{scale}"))
        .sampler(move |r| f64::std_exp(r).powf(-beta) / scale)
        .cdf(move |x| if x <= 0.0 { 0.0 } else { (-(scale * x).powf(-shape)).exp() })
        .moments(move |n| if (n as f64) < shape { gamma(1.0 - n as f64 * beta) / scale.powi(n as i32) } else { f64::INFINITY });
    Ok(GalleryEntry {
        name: "stable-csbp",
        label: Some('d'),
        description: "stable continuous-state branching process".into(),
        params: json!({ "alpha": alpha, "c_plus": c_plus }),
        spec: xi.rescale_alpha(beta)?,
        i_law: Some(i_law),
        i_star_law: None,
        factor_kind: Some(FactorKind::Pareto { gamma: shape }),
        factor_law: None,
        yaglom_law: None,
        expected_regime: "frechet",
        cramer_gamma: Some(shape),
        tail_index: Some(shape),
        path_sim: false,
    })
}

/// ψ(θ) of the stable CSBP's Lamperti process before rescaling: c₊Γ(α−θ)/Γ(−θ).
pub fn csbp_exponent(alpha: f64, c_plus: f64, theta: f64) -> f64 {
    c_plus * gamma(alpha - theta) * rgamma(-theta)
}

/// Jump constants (c₊, c₋) of an α-stable process with positivity parameter ρ.
pub fn stable_constants(alpha: f64, rho: f64) -> Result<(f64, f64)> {
    let (lo, hi) = if alpha < 1.0 {
        (0.0, 1.0)
    } else if alpha == 1.0 {
        (0.5, 0.5)
    } else {
        (1.0 - 1.0 / alpha, 1.0 / alpha)
    };
    if !(alpha > 0.0 && alpha < 2.0) || rho < lo || rho > hi || (alpha != 1.0 && (rho == lo || rho == hi)) {
        return Err(bad(format!("positivity parameter {rho} not admissible for alpha {alpha} with two-sided jumps")));
    }
    let k = gamma(1.0 + alpha) / PI;
    Ok((k * (PI * alpha * rho).sin(), k * (PI * alpha * (1.0 - rho)).sin()))
}

/// (1+z)^θ − 1 − θz.
fn pow_rem(z: f64, theta: f64) -> f64 {
    if z.abs() < 1e-3 {
        let t = theta;
        let c2 = t * (t - 1.0) / 2.0;
        let c3 = c2 * (t - 2.0) / 3.0;
        let c4 = c3 * (t - 3.0) / 4.0;
        let c5 = c4 * (t - 4.0) / 5.0;
        z * z * (c2 + z * (c3 + z * (c4 + z * c5)))
    } else {
        (theta * z.ln_1p()).exp_m1() - theta * z
    }
}

/// Generator of the killed stable process applied to x^θ at x = 1, for 0 < θ < α.
pub fn killed_stable_exponent(alpha: f64, rho: f64, theta: f64) -> Result<f64> {
    let (cp, cm) = stable_constants(alpha, rho)?;
    if !(theta > 0.0 && theta < alpha) {
        return Err(Error::OutOfDomain(format!("theta must lie in (0, {alpha}), got {theta}")));
    }
    let by = if alpha == 1.0 { 0.0 } else { (cp - cm) / (1.0 - alpha) };
    let tol = 1e-12;
    let nu = |z: f64| z.abs().powf(-1.0 - alpha);
    let right_small = cp * integrate(|z: f64| pow_rem(z, theta) * nu(z), 0.0, 1.0, tol);
    // z = 1/t then v = t^{α−θ}: ∫_1^∞ ((1+z)^θ − 1) z^{−1−α} dz = (α−θ)^{-1}∫_0^1 (1 + v^{1/(α−θ)})^θ dv − 1/α.
    let e = alpha - theta;
    let right_big = cp * (integrate(|v: f64| (1.0 + v.powf(1.0 / e)).powf(theta), 0.0, 1.0, tol) / e - 1.0 / alpha);
    // Split at −1/2 so the (1+z)^θ endpoint is resolved in the variable 1+z.
    let left = cm
        * (integrate(|w: f64| pow_rem(-w, theta) * nu(w), 0.0, 0.5, tol)
            + integrate(|v: f64| ((theta * v.ln()).exp() - 1.0 + theta * (1.0 - v)) * nu(1.0 - v), 0.0, 0.5, tol));
    Ok(by * theta + right_small + right_big + left - cm / alpha)
}

/// Closed-form exponent c₊Γ(−α)Γ(α−θ)/Γ(−θ) + c₋Γ(−α)Γ(1+θ)/Γ(1+θ−α), α ≠ 1.
pub fn lamperti_stable_exponent(alpha: f64, rho: f64, theta: f64) -> Result<f64> {
    let (cp, cm) = stable_constants(alpha, rho)?;
    let g = gamma(-alpha);
    Ok(cp * g * gamma(alpha - theta) * rgamma(-theta) + cm * g * gamma(1.0 + theta) * rgamma(1.0 + theta - alpha))
}

/// α-stable process with positivity parameter ρ killed on entering (−∞, 0), as a 1/α-pssMp.
pub fn stable_killed(alpha: f64, rho: f64) -> Result<GalleryEntry> {
    let (cp, cm) = stable_constants(alpha, rho)?;
    let up = LevyMeasure::lamperti(cp, alpha, LampertiShape::Up)?;
    let down = LevyMeasure::lamperti(cm, alpha, LampertiShape::Down)?;
    let bare = LevySpec::new(0.0, 0.0, Some(up), Some(down), cm / alpha)?;
    let theta0 = 0.5 * alpha * (1.0 - rho);
    let drift = (killed_stable_exponent(alpha, rho, theta0)? - bare.mgf_exponent(theta0)) / theta0;
    let xi = LevySpec { drift, ..bare };
    Ok(GalleryEntry {
        name: "stable-killed",
        label: Some('e'),
        description: "stable process killed on entering the negative half-line".into(),
        params: json!({ "alpha": alpha, "rho": rho, "c_plus": cp, "c_minus": cm }),
        spec: xi.rescale_alpha(alpha)?,
        i_law: None,
        i_star_law: None,
        factor_kind: Some(FactorKind::Pareto { gamma: 1.0 - rho }),
        factor_law: None,
        yaglom_law: None,
        expected_regime: "frechet",
        cramer_gamma: Some(1.0 - rho),
        tail_index: Some(1.0 - rho),
        path_sim: true,
    })
}

/// Drift +1 and negative jumps with Π(−∞,−x) = b e^{−x(b−δ)}.
pub fn rational(delta: f64, b: f64) -> Result<GalleryEntry> {
    if !(delta > 0.0 && b > delta) {
        return Err(bad(format!("need 0 < delta < b, got {delta}, {b}")));
    }
    let r = b - delta;
    let spec = LevySpec::new(1.0, 0.0, None, Some(LevyMeasure::exp(b, r)?), 0.0)?;
    let i_law = RefLaw::new(format!("(1-B)/B, B ~ Beta({delta}, {})", r + 1.0))
        .sampler(move |g| {
            let x = rng::gamma(delta, g);
            let y = rng::gamma(r + 1.0, g);
            y / x
        })
        .cdf(move |x| if x <= 0.0 { 0.0 } else { 1.0 - beta_reg(delta, r + 1.0, 1.0 / (1.0 + x)) })
        .moments(move |n| {
            // (1−B)/B = G_{r+1}/G_δ
            if (n as f64) < delta {
                (ln_gamma(r + 1.0 + n as f64) - ln_gamma(r + 1.0) + ln_gamma(delta - n as f64) - ln_gamma(delta)).exp()
            } else {
                f64::INFINITY
            }
        });
    let i_star = RefLaw::new(format!("1/Beta({delta}, {r})"))
        .sampler(move |g| 1.0 / rng::beta(delta, r, g))
        .cdf(move |x| if x <= 1.0 { 0.0 } else { 1.0 - beta_reg(delta, r, 1.0 / x) });
    let j = RefLaw::new(format!("Beta(1, {r})"))
        .sampler(move |g| rng::beta(1.0, r, g))
        .cdf(move |x| if x <= 0.0 { 0.0 } else if x >= 1.0 { 1.0 } else { -(r * (-x).ln_1p()).exp_m1() })
        .moments(move |n| (ln_gamma(n as f64 + 1.0) + ln_gamma(1.0 + r) - ln_gamma(1.0 + r + n as f64)).exp());
    Ok(GalleryEntry {
        name: "rational",
        label: Some('f'),
        description: "spectrally negative process with rational Laplace exponent".into(),
        params: json!({ "delta": delta, "b": b }),
        spec,
        i_law: Some(i_law),
        i_star_law: Some(i_star),
        factor_kind: Some(FactorKind::Pareto { gamma: delta }),
        factor_law: Some(j.clone()),
        yaglom_law: Some(j),
        expected_regime: "frechet",
        cramer_gamma: Some(delta),
        tail_index: Some(delta),
        path_sim: true,
    })
}

/// Compound Poisson subordinator without drift, killed.
pub fn finite_drift_free(mass: f64, rate: f64, q: f64) -> Result<GalleryEntry> {
    Ok(GalleryEntry {
        name: "finite-drift-free",
        label: None,
        description: "killed compound Poisson subordinator without drift".into(),
        params: json!({ "mass": mass, "rate": rate, "q": q }),
        spec: LevySpec::subordinator(0.0, Some(LevyMeasure::exp(mass, rate)?), q)?,
        i_law: None,
        i_star_law: None,
        factor_kind: Some(FactorKind::Exp),
        factor_law: None,
        yaglom_law: None,
        expected_regime: "gumbel_drift_free",
        cramer_gamma: None,
        tail_index: None,
        path_sim: true,
    })
}

/// Killed stable subordinator with positive drift.
pub fn stable_sub_drift(d: f64, alpha: f64, q: f64) -> Result<GalleryEntry> {
    Ok(GalleryEntry {
        name: "stable-sub-drift",
        label: None,
        description: "killed stable subordinator with positive drift".into(),
        params: json!({ "d": d, "alpha": alpha, "q": q }),
        spec: LevySpec::subordinator(d, Some(LevyMeasure::stable(1.0, alpha)?), q)?,
        i_law: None,
        i_star_law: None,
        factor_kind: Some(FactorKind::Exp),
        factor_law: None,
        yaglom_law: None,
        expected_regime: "gumbel_pos_drift",
        cramer_gamma: None,
        tail_index: None,
        path_sim: true,
    })
}

/// Default instances of every example.
pub fn gallery() -> Result<Vec<GalleryEntry>> {
    Ok(vec![
        killed_stable_sub(0.5)?,
        drift_exp_jump(1.0, 1.0, 1.0, 1.0, None)?,
        drift_exp_jump(1.0, 1.0, 0.0, 1.0, Some(1.0))?,
        brownian_drift(1.0, 1.0, 1.0)?,
        stable_csbp(1.5, 1.0)?,
        stable_killed(1.0, 0.5)?,
        rational(3.0, 4.0)?,
        finite_drift_free(1.0, 1.0, 0.5)?,
        stable_sub_drift(1.0, 0.5, 0.5)?,
    ])
}

pub fn entry(name: &str) -> Result<GalleryEntry> {
    gallery()?
        .into_iter()
        .find(|e| e.name == name || e.label.is_some_and(|c| name.len() == 1 && name.starts_with(c)))
        .ok_or_else(|| Error::InvalidParameter(format!("unknown example {name:?}")))
}

pub fn gallery_json() -> Result<Value> {
    Ok(Value::Array(gallery()?.iter().map(GalleryEntry::to_json).collect::<Result<_>>()?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaTailMethod {
    Series,
    Contour,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SigmaTail {
    pub value: f64,
    pub method: SigmaTailMethod,
    pub error_bound: f64,
}

/// Largest series term tolerated before cancellation makes the sum unreliable.
const SERIES_MAX_TERM: f64 = 1e4;

fn check_alpha(alpha: f64, s: f64) -> Result<f64> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(bad(format!("alpha must lie in (1,2), got {alpha}")));
    }
    if !(s >= 0.0) {
        return Err(Error::OutOfDomain(format!("s must be >= 0, got {s}")));
    }
    Ok(alpha - 1.0)
}

/// P(Σ > s) by its power series in s^{α−1}.
pub fn csbp_sigma_tail_series(alpha: f64, s: f64) -> Result<SigmaTail> {
    let beta = check_alpha(alpha, s)?;
    if s == 0.0 {
        return Ok(SigmaTail { value: 1.0, method: SigmaTailMethod::Series, error_bound: 0.0 });
    }
    let lx = beta * s.ln();
    let a = 1.0 / beta;
    let lga = ln_gamma(a);
    let term = |k: usize| -> f64 {
        let kf = k as f64;
        let mag = (kf * lx + ln_gamma(a + kf) - ln_gamma(kf + 1.0) - ln_gamma(beta * kf + 1.0) - lga).exp();
        if k.is_multiple_of(2) {
            mag
        } else {
            -mag
        }
    };
    let mut sum = 0.0;
    let mut biggest = 0.0f64;
    let mut prev = f64::INFINITY;
    for k in 0..100_000 {
        let t = term(k);
        biggest = biggest.max(t.abs());
        if biggest > SERIES_MAX_TERM {
            return Err(Error::SeriesDivergence(format!(
                "terms exceed {SERIES_MAX_TERM:e} at s = {s}; series validated only while cancellation stays below that"
            )));
        }
        sum += t;
        let next = term(k + 1).abs();
        if next <= t.abs() && t.abs() <= prev && next <= 1e-14 * sum.abs().max(1e-300) {
            let bound = next + biggest * f64::EPSILON * (k as f64 + 1.0);
            return Ok(SigmaTail { value: sum, method: SigmaTailMethod::Series, error_bound: bound });
        }
        prev = t.abs();
    }
    Err(Error::SeriesDivergence(format!("no convergence at s = {s}")))
}

/// P(Σ > s) from the Hankel contour collapsed onto the negative axis:
/// −(1/π)∫_0^∞ e^{−r} r^{−1} Im[(1 + x r^{−β}e^{−iπβ})^{−1/β}]dr, x = s^β.
pub fn csbp_sigma_tail_contour(alpha: f64, s: f64) -> Result<SigmaTail> {
    let beta = check_alpha(alpha, s)?;
    if s == 0.0 {
        return Ok(SigmaTail { value: 1.0, method: SigmaTailMethod::Contour, error_bound: 0.0 });
    }
    let x = s.powf(beta);
    let (sb, cb) = (PI * beta).sin_cos();
    let f = |r: f64| -> f64 {
        let y = x * r.powf(-beta);
        let re = 1.0 + y * cb;
        let im = -y * sb;
        let arg = im.atan2(re);
        let ln_mod = 0.5 * (re * re + im * im).ln();
        let v = (-ln_mod / beta - r).exp() / r * (arg / beta).sin();
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let mut cuts = [x.powf(1.0 / beta).min(50.0), 1.0];
    cuts.sort_by(f64::total_cmp);
    let tol = 1e-13;
    let v = integrate(f, 0.0, cuts[0], tol) + integrate(f, cuts[0], cuts[1], tol) + integrate_inf(f, cuts[1], 1.0, tol);
    Ok(SigmaTail { value: -v / PI, method: SigmaTailMethod::Contour, error_bound: 1e-10 })
}

/// P(Σ > s), switching from the series to the contour integral once the series cancels.
pub fn csbp_sigma_tail(alpha: f64, s: f64) -> Result<SigmaTail> {
    match csbp_sigma_tail_series(alpha, s) {
        Err(Error::SeriesDivergence(_)) => csbp_sigma_tail_contour(alpha, s),
        other => other,
    }
}

/// P(W·Σ^{α−1} > s) for W Fréchet(1/(α−1)) independent of Σ, by quadrature over W = U^{−(α−1)}.
/// Should equal (1+s)^{−1/(α−1)}.
pub fn csbp_factorization_check(alpha: f64, s: f64) -> Result<f64> {
    let beta = check_alpha(alpha, s)?;
    let c = s.powf(1.0 / beta);
    let mut err = None;
    let v = integrate_inf(
        |u| match csbp_sigma_tail(alpha, c * u) {
            Ok(t) => (-u).exp() * t.value,
            Err(e) => {
                err = Some(e);
                0.0
            }
        },
        0.0,
        1.0,
        1e-10,
    );
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}
