//! Residual-lifetime shapes of I as a cross-check of the Yaglom classification.

use serde::Serialize;
use serde_json::{json, Value};

use crate::cpy::{default_x_max, solve_cpy, CpyConfig, DensityGrid};
use crate::error::{Error, Result};
use crate::expfun::{residual_from, ExpFunctional};
use crate::levy::LevySpec;
use crate::mc::RejectionBudget;
use crate::path::SimConfig;
use crate::real::Real;
use crate::rng::replicate;
use crate::stats::{fit_residual_shapes, pairwise_sum, MdaFamily, MdaFit};
use crate::yaglom::{classify, Regime};

#[derive(Debug, Clone, Copy, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResidualSource {
    Rejection { attempts: u64, acceptance: f64 },
    /// Inverse transform through the solved density.
    Density,
}

#[derive(Debug, Clone, Serialize)]
pub struct MdaPoint {
    pub t: f64,
    pub scale: f64,
    pub n: usize,
    pub source: ResidualSource,
    pub fit: MdaFit,
}

impl MdaPoint {
    pub fn gamma_hat(&self) -> f64 {
        match self.fit.winner {
            MdaFamily::Gumbel => self.fit.exp_scale,
            MdaFamily::Weibull => self.fit.gamma_weibull,
            MdaFamily::Frechet => self.fit.gamma_frechet,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "t": self.t,
            "family_scores": { "gumbel": self.fit.ks_gumbel, "weibull": self.fit.ks_weibull, "frechet": self.fit.ks_frechet },
            "winner": self.fit.winner,
            "gamma_hat": self.gamma_hat(),
            "ess": self.n,
            "scale": self.scale,
            "source": self.source,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MdaReport {
    pub regime: &'static str,
    pub expected: Option<MdaFamily>,
    pub t_f: f64,
    pub points: Vec<MdaPoint>,
}

impl MdaReport {
    /// Whether every fitted t picks the family implied by the classification.
    pub fn agrees(&self) -> Option<bool> {
        self.expected.map(|e| self.points.iter().all(|p| p.fit.winner == e))
    }
}

fn expected_family(r: &Regime) -> Option<MdaFamily> {
    match r {
        Regime::GumbelDriftFree { .. } | Regime::GumbelPosDrift { .. } => Some(MdaFamily::Gumbel),
        Regime::Weibull { .. } => Some(MdaFamily::Weibull),
        Regime::Frechet { .. } => Some(MdaFamily::Frechet),
        Regime::NoYaglomKnown { .. } => None,
    }
}

/// Fits the three residual shapes at each t, with residuals I − t scaled by t_F − t (Weibull),
/// t (Fréchet) or their mean (Gumbel and unclassified).
///
/// Rejection sampling is tried first; subordinators whose conditioning event is too rare fall back
/// to inverse-transform draws from the solved density.
pub fn residual_mda_fit<F: Real + Serialize>(
    spec: &LevySpec<F>,
    ts: &[F],
    n: usize,
    cfg: &SimConfig<F>,
    budget: RejectionBudget,
) -> Result<MdaReport> {
    let class = classify(spec)?;
    let expected = expected_family(&class.regime);
    let ef = ExpFunctional::new(spec, cfg)?;
    let t_f = ef.t_f;
    let mut density: Option<DensityGrid<F>> = None;
    let mut points = Vec::with_capacity(ts.len());
    for &t in ts {
        if !(t > F::zero()) || t >= t_f {
            return Err(Error::OutOfDomain(format!("t = {t} must lie in (0, t_F = {t_f})")));
        }
        let (raw, source) = match residual_from(&ef, t, n, budget) {
            Ok(r) => (r.sample.values, ResidualSource::Rejection { attempts: r.attempts, acceptance: r.acceptance }),
            Err(Error::RareEvent { .. }) if spec.is_subordinator_neg() => {
                if density.is_none() {
                    let t_max = ts.iter().copied().fold(t, F::max);
                    let x_max = default_x_max(spec)?.max(t_max * F::lit(3.0));
                    density = Some(solve_cpy(spec, &CpyConfig { x_max: Some(x_max), ..CpyConfig::default() })?);
                }
                let grid = density.as_ref().unwrap();
                let draws = replicate(0, n, |i| grid.residual_draw(t, F::std_exp(&mut cfg.rng(i))));
                (draws, ResidualSource::Density)
            }
            Err(e) => return Err(e),
        };
        let scale = match expected {
            Some(MdaFamily::Weibull) => t_f - t,
            Some(MdaFamily::Frechet) => t,
            _ => pairwise_sum(&raw) / F::from_usize(raw.len()).unwrap(),
        };
        let y: Vec<F> = raw.iter().map(|&v| v / scale).collect();
        points.push(MdaPoint { t: t.to_f64x(), scale: scale.to_f64x(), n: y.len(), source, fit: fit_residual_shapes(&y)? });
    }
    Ok(MdaReport { regime: class.name(), expected, t_f: t_f.to_f64x(), points })
}
