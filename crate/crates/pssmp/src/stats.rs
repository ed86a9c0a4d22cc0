//! Empirical statistics on (possibly weighted) samples.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::real::Real;

/// Values with nonnegative weights; unit weights for plain samples.
#[derive(Debug, Clone, Default)]
pub struct WeightedSample<F: Real> {
    pub values: Vec<F>,
    pub weights: Vec<F>,
}

impl<F: Real> WeightedSample<F> {
    pub fn unweighted(values: Vec<F>) -> Self {
        let weights = vec![F::one(); values.len()];
        Self { values, weights }
    }

    pub fn new(values: Vec<F>, weights: Vec<F>) -> Result<Self> {
        if values.len() != weights.len() {
            return Err(Error::InvalidParameter("values and weights differ in length".into()));
        }
        if weights.iter().any(|w| !(*w >= F::zero()) || !w.is_finite()) {
            return Err(Error::InvalidParameter("weights must be finite and nonnegative".into()));
        }
        if !values.is_empty() && weights.iter().all(|w| *w == F::zero()) {
            return Err(Error::InvalidParameter("weights are all zero".into()));
        }
        Ok(Self { values, weights })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// (Σw)²/Σw².
    pub fn ess(&self) -> F {
        let s: F = pairwise_sum(&self.weights);
        let s2: F = pairwise_sum(&self.weights.iter().map(|w| *w * *w).collect::<Vec<_>>());
        if s2 == F::zero() {
            F::zero()
        } else {
            s * s / s2
        }
    }

    pub fn equal_weights(&self) -> bool {
        self.weights.windows(2).all(|w| w[0] == w[1])
    }

    /// Pairs sorted by value.
    fn sorted(&self) -> Vec<(F, F)> {
        let mut v: Vec<(F, F)> = self.values.iter().copied().zip(self.weights.iter().copied()).collect();
        v.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("NaN in sample"));
        v
    }

    pub fn map(&self, f: impl Fn(F) -> F) -> Self {
        Self { values: self.values.iter().map(|&x| f(x)).collect(), weights: self.weights.clone() }
    }
}

/// Order-independent summation with bounded rounding growth.
pub fn pairwise_sum<F: Real>(xs: &[F]) -> F {
    if xs.len() <= 32 {
        return xs.iter().fold(F::zero(), |a, &b| a + b);
    }
    let m = xs.len() / 2;
    pairwise_sum(&xs[..m]) + pairwise_sum(&xs[m..])
}

/// Right-continuous step ECDF.
#[derive(Debug, Clone)]
pub struct Ecdf<F: Real> {
    pub x: Vec<F>,
    pub p: Vec<F>,
}

impl<F: Real> Ecdf<F> {
    pub fn new(s: &WeightedSample<F>) -> Result<Self> {
        let steps = steps(s)?;
        Ok(Self { x: steps.iter().map(|e| e.0).collect(), p: steps.iter().map(|e| e.1).collect() })
    }

    pub fn eval(&self, t: F) -> F {
        let k = self.x.partition_point(|&v| v <= t);
        if k == 0 {
            F::zero()
        } else {
            self.p[k - 1]
        }
    }
}

/// Distinct values with the ECDF value at each.
fn steps<F: Real>(s: &WeightedSample<F>) -> Result<Vec<(F, F)>> {
    if s.is_empty() {
        return Err(Error::Empty);
    }
    let v = s.sorted();
    let n = v.len();
    let count_path = s.equal_weights();
    let total = if count_path { F::zero() } else { pairwise_sum(&s.weights) };
    let mut out: Vec<(F, F)> = Vec::with_capacity(n);
    let mut acc = F::zero();
    for (i, &(x, w)) in v.iter().enumerate() {
        let p = if count_path {
            F::from_usize(i + 1).unwrap() / F::from_usize(n).unwrap()
        } else {
            acc = acc + w;
            (acc / total).min(F::one())
        };
        if i + 1 < n && v[i + 1].0 == x {
            continue;
        }
        out.push((x, if i + 1 == n { F::one() } else { p }));
    }
    Ok(out)
}

/// sup |F_a − F_b| over the pooled sample.
pub fn ks_two_sample<F: Real>(a: &WeightedSample<F>, b: &WeightedSample<F>) -> Result<F> {
    let sa = steps(a)?;
    let sb = steps(b)?;
    let (mut i, mut j) = (0, 0);
    let (mut fa, mut fb) = (F::zero(), F::zero());
    let mut d = F::zero();
    while i < sa.len() || j < sb.len() {
        let xa = if i < sa.len() { sa[i].0 } else { F::infinity() };
        let xb = if j < sb.len() { sb[j].0 } else { F::infinity() };
        let x = xa.min(xb);
        if xa == x {
            fa = sa[i].1;
            i += 1;
        }
        if xb == x {
            fb = sb[j].1;
            j += 1;
        }
        d = d.max((fa - fb).abs());
    }
    Ok(d)
}

/// sup |F_n − F| against a continuous reference CDF.
pub fn ks_one_sample<F: Real>(s: &WeightedSample<F>, cdf: impl Fn(F) -> F) -> Result<F> {
    let st = steps(s)?;
    let mut prev = F::zero();
    let mut d = F::zero();
    for &(x, p) in &st {
        let c = cdf(x);
        d = d.max((p - c).abs()).max((prev - c).abs());
        prev = p;
    }
    Ok(d)
}

/// Asymptotic 95% two-sample K-S critical value 1.36·√((n+m)/(nm)).
pub fn ks_critical_95(n: usize, m: usize) -> f64 {
    1.36 * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MomentEstimate {
    pub order: u32,
    pub mean: f64,
    pub std_error: f64,
}

/// Self-normalized moments E[X^k], k = 1..=n, with delta-method standard errors.
pub fn empirical_moments<F: Real>(s: &WeightedSample<F>, n: u32) -> Result<Vec<MomentEstimate>> {
    if s.is_empty() {
        return Err(Error::Empty);
    }
    let w: Vec<f64> = s.weights.iter().map(|w| w.to_f64x()).collect();
    let sw = pairwise_sum(&w);
    (1..=n)
        .map(|k| {
            let xk: Vec<f64> = s.values.iter().map(|x| x.to_f64x().powi(k as i32)).collect();
            let m = pairwise_sum(&xk.iter().zip(&w).map(|(x, w)| x * w).collect::<Vec<_>>()) / sw;
            let dev: Vec<f64> = xk.iter().zip(&w).map(|(x, w)| (w * (x - m)).powi(2)).collect();
            let mut se = pairwise_sum(&dev).sqrt() / sw;
            if s.equal_weights() && s.len() > 1 {
                let n = s.len() as f64;
                se *= (n / (n - 1.0)).sqrt();
            }
            Ok(MomentEstimate { order: k, mean: m, std_error: se })
        })
        .collect()
}

/// Weighted quantile by the left-continuous inverse of the ECDF.
pub fn quantile<F: Real>(s: &WeightedSample<F>, p: F) -> Result<F> {
    let st = steps(s)?;
    let k = st.partition_point(|e| e.1 < p);
    Ok(st[k.min(st.len() - 1)].0)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct HillEstimate {
    pub gamma: f64,
    pub std_error: f64,
    pub k: usize,
    pub top_fraction: f64,
}

/// γ̂ = k / Σ_{i≤k} ln(X_(i)/X_(k+1)) over the k largest values.
pub fn hill_estimator<F: Real>(values: &[F], top_fraction: f64) -> Result<HillEstimate> {
    if values.is_empty() {
        return Err(Error::Empty);
    }
    if !(top_fraction > 0.0 && top_fraction <= 0.2) {
        return Err(Error::InvalidParameter(format!("top fraction must lie in (0, 0.2], got {top_fraction}")));
    }
    let mut v: Vec<f64> = values.iter().map(|x| x.to_f64x()).filter(|x| *x > 0.0).collect();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let k = (v.len() as f64 * top_fraction).floor() as usize;
    if k < 50 || k >= v.len() {
        return Err(Error::TooFewExceedances(k));
    }
    let base = v[k].ln();
    let s: f64 = pairwise_sum(&v[..k].iter().map(|x| x.ln() - base).collect::<Vec<_>>());
    let gamma = k as f64 / s;
    Ok(HillEstimate { gamma, std_error: gamma / (k as f64).sqrt(), k, top_fraction })
}

#[derive(Debug, Clone, Serialize)]
pub struct HillStability {
    pub estimates: Vec<HillEstimate>,
    /// max/min of γ̂ across fractions.
    pub spread: f64,
    /// γ̂ grows steadily as the fraction shrinks.
    pub drifting: bool,
    pub plateau: bool,
}

/// Hill estimates across several fractions; a plateau suggests a Fréchet tail.
pub fn hill_stability<F: Real>(values: &[F], fractions: &[f64]) -> Result<HillStability> {
    let mut fr = fractions.to_vec();
    fr.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let estimates = fr.iter().map(|&f| hill_estimator(values, f)).collect::<Result<Vec<_>>>()?;
    let g: Vec<f64> = estimates.iter().map(|e| e.gamma).collect();
    let max = g.iter().cloned().fold(f64::MIN, f64::max);
    let min = g.iter().cloned().fold(f64::MAX, f64::min);
    let spread = max / min;
    let drifting = g.windows(2).all(|w| w[1] > w[0]) && spread > 1.25;
    Ok(HillStability { estimates, spread, drifting, plateau: spread <= 1.25 })
}

/// f(t)·∫_t^∞ P(U>u)du / P(U>t)² from analytic pieces.
pub fn von_mises_ratio<F: Real>(density: F, tail: F, tail_integral: F) -> F {
    density * tail_integral / (tail * tail)
}

/// Sample version: hazard from the spacing of the exceedances times the mean excess.
pub fn von_mises_ratio_samples<F: Real>(values: &[F], ts: &[F]) -> Result<Vec<F>> {
    let mut v: Vec<F> = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ts.iter()
        .map(|&t| {
            let k = v.partition_point(|&x| x <= t);
            let exc = &v[k..];
            if exc.len() < 50 {
                return Err(Error::TooFewExceedances(exc.len()));
            }
            let n = F::from_usize(exc.len()).unwrap();
            let mean_excess = exc.iter().fold(F::zero(), |a, &x| a + (x - t)) / n;
            // Hazard from the first decile of exceedances.
            let m = (exc.len() / 10).max(10);
            let width = exc[m - 1] - t;
            let frac = F::from_usize(m).unwrap() / n;
            let hazard = -(F::one() - frac).ln() / width;
            Ok(hazard * mean_excess)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MdaFamily {
    Gumbel,
    Weibull,
    Frechet,
}

#[derive(Debug, Clone, Serialize)]
pub struct MdaFit {
    pub ks_gumbel: f64,
    pub ks_weibull: f64,
    pub ks_frechet: f64,
    pub exp_scale: f64,
    pub gamma_weibull: f64,
    pub gamma_frechet: f64,
    pub winner: MdaFamily,
}

/// Fits e^{−y/s}, (1−y)^γ on [0,1) and (1+y)^{−γ} to rescaled residuals by maximum likelihood;
/// the family with the smallest K-S distance wins.
pub fn fit_residual_shapes<F: Real>(residuals: &[F]) -> Result<MdaFit> {
    if residuals.is_empty() {
        return Err(Error::Empty);
    }
    let y: Vec<f64> = residuals.iter().map(|v| v.to_f64x().max(0.0)).collect();
    let n = y.len() as f64;
    let s = WeightedSample::unweighted(y.clone());
    let scale = pairwise_sum(&y) / n;
    let ks_g = ks_one_sample(&s, |x| -(-x / scale).exp_m1())?;
    let (ks_w, gw) = if y.iter().all(|&v| v < 1.0) {
        let g = -n / pairwise_sum(&y.iter().map(|v| (-v).ln_1p()).collect::<Vec<_>>());
        (ks_one_sample(&s, |x| if x >= 1.0 { 1.0 } else { 1.0 - (1.0 - x).powf(g) })?, g)
    } else {
        (1.0, f64::NAN)
    };
    let gf = n / pairwise_sum(&y.iter().map(|v| v.ln_1p()).collect::<Vec<_>>());
    let ks_f = ks_one_sample(&s, |x| 1.0 - (1.0 + x).powf(-gf))?;
    let winner = if ks_g <= ks_w && ks_g <= ks_f {
        MdaFamily::Gumbel
    } else if ks_w <= ks_f {
        MdaFamily::Weibull
    } else {
        MdaFamily::Frechet
    };
    Ok(MdaFit { ks_gumbel: ks_g, ks_weibull: ks_w, ks_frechet: ks_f, exp_scale: scale, gamma_weibull: gw, gamma_frechet: gf, winner })
}
