use anyhow::Result;
use serde_json::{json, Value};

use pssmp::cpy::{solve_cpy, tail_asymptote_check, tail_iteration_hn, CpyConfig};
use pssmp::expfun::{moments_i, moments_i_general, ExpFunctional};
use pssmp::gallery::{self, RefLaw};
use pssmp::lamperti::{residual_identity_check, sample_x_conditioned};
use pssmp::mc::RejectionBudget;
use pssmp::mda::residual_mda_fit;
use pssmp::special::ln_gamma;
use pssmp::stats::{empirical_moments, ks_one_sample, ks_two_sample, WeightedSample};
use pssmp::yaglom::{
    beta_factor, classify_with, exp_factor_moments, normalizer, pareto_factor_with_ess, FactorKind, FactorLaw, Factorization, Margins,
    ParetoSamplerConfig, Regime, YaglomClassification,
};
use pssmp::{Error, LevySpec};

use crate::config::{usage, Experiment};
use crate::output::{num, opt, Artifacts, Table};

/// Seed offset for the stream independent of the I samples.
const FACTOR_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

pub const CLASSIFY_TOL: &[(&str, f64)] = &[("lower_pass", 0.05), ("lower_fail", 0.01), ("upper_pass", 0.95), ("upper_fail", 0.99)];

fn margins(ex: &Experiment) -> Margins {
    Margins {
        lower_pass: ex.tol.get("lower_pass"),
        lower_fail: ex.tol.get("lower_fail"),
        upper_pass: ex.tol.get("upper_pass"),
        upper_fail: ex.tol.get("upper_fail"),
    }
}

fn classification_json(c: &YaglomClassification) -> Result<Value> {
    let mut v = serde_json::to_value(c)?;
    if let Some(obj) = v.as_object_mut() {
        if let Some(tf) = obj.remove("t_f") {
            obj.insert("t_F".into(), tf);
        }
    }
    Ok(v)
}

pub fn classify(ex: &Experiment, assert_gamma: Option<f64>) -> Result<Artifacts> {
    match classify_with(&ex.spec, &margins(ex), assert_gamma) {
        Ok(c) => {
            let mut v = classification_json(&c)?;
            if let Some(e) = ex.gallery() {
                v["expected_regime"] = json!(e.expected_regime);
            }
            let mut art = Artifacts::new(v);
            art.pass = ex.gallery().map(|e| e.expected_regime == c.name());
            Ok(art)
        }
        Err(Error::Inconclusive(reason)) => {
            let mut art = Artifacts::new(json!({ "regime": "inconclusive", "reason": reason }));
            art.code = 3;
            Ok(art)
        }
        Err(e) => Err(e.into()),
    }
}

pub const YAGLOM_TOL: &[(&str, f64)] = &[
    ("ks", 0.05),
    ("mean", 0.05),
    ("variance", 0.02),
    ("acceptance_floor", pssmp::mc::ACCEPTANCE_FLOOR),
    ("min_attempts", 200_000.0),
    ("lower_pass", 0.05),
    ("lower_fail", 0.01),
    ("upper_pass", 0.95),
    ("upper_fail", 0.99),
];

enum Reference {
    Cdf(String, gallery::CurveFn),
    Sample(String, WeightedSample<f64>),
    PointMass,
    None,
}

impl Reference {
    fn name(&self) -> String {
        match self {
            Reference::Cdf(n, _) | Reference::Sample(n, _) => n.clone(),
            Reference::PointMass => "point mass at 1".into(),
            Reference::None => "none".into(),
        }
    }

    fn ks(&self, s: &WeightedSample<f64>) -> Result<Option<f64>> {
        Ok(match self {
            Reference::Cdf(_, f) => Some(ks_one_sample(s, |x| f(x))?),
            Reference::Sample(_, r) => Some(ks_two_sample(s, r)?),
            Reference::PointMass | Reference::None => None,
        })
    }
}

fn budget(ex: &Experiment) -> RejectionBudget {
    RejectionBudget { floor: ex.tol.get("acceptance_floor"), min_attempts: ex.tol.count("min_attempts") as u64, ..RejectionBudget::default() }
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (m, v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n)
}

pub fn yaglom(ex: &Experiment, x0: f64, assert_gamma: Option<f64>) -> Result<Artifacts> {
    let ts = ex.require_t()?;
    if x0.is_nan() || x0 <= 0.0 {
        return usage(format!("--x0 must be > 0, got {x0}"));
    }
    let class = classify_with(&ex.spec, &margins(ex), assert_gamma)?;
    let g = normalizer(&ex.spec, &class)?;
    let law = ex.gallery().and_then(|e| e.yaglom_law.as_ref());
    let reference = match (&class.regime, law) {
        (_, Some(RefLaw { closed_form, cdf: Some(f), .. })) => Reference::Cdf(closed_form.clone(), f.clone()),
        (_, Some(l @ RefLaw { sampler: Some(_), .. })) => {
            Reference::Sample(l.closed_form.clone(), WeightedSample::unweighted(l.sample(ex.n, ex.seed ^ FACTOR_STREAM).unwrap()))
        }
        (Regime::Weibull { .. }, _) => Reference::PointMass,
        (Regime::Frechet { gamma, via: pssmp::yaglom::FrechetVia::CramerRoot }, _) => {
            let cfg = pssmp::path::SimConfig::with_seed(ex.seed ^ FACTOR_STREAM);
            let p = pareto_factor_with_ess(&ex.spec, *gamma, ex.n as f64, 8 * ex.n, &cfg, &ParetoSamplerConfig::default())?;
            Reference::Sample(format!("weighted Pareto factor sample (ess {:.0})", p.ess), p.sample)
        }
        _ => Reference::None,
    };
    let mut data = Table::new(&["t", "g", "accepted", "attempts", "acceptance", "mean", "variance", "ks"]);
    let mut marginals = Table::new(&["t", "index", "value"]);
    let mut rows = Vec::new();
    let cfg = ex.sim();
    for &t in ts {
        let m = sample_x_conditioned(&ex.spec, x0, t, Some(&g), ex.n, &cfg, budget(ex))?;
        let (mean, var) = mean_var(&m.samples);
        let ks = reference.ks(&m.weighted())?;
        let gt = g.eval(t)?;
        data.push(vec![num(t), num(gt), m.samples.len().to_string(), m.attempts.to_string(), num(m.acceptance_rate), num(mean), num(var), opt(ks)]);
        for (i, v) in m.samples.iter().enumerate() {
            marginals.push(vec![num(t), i.to_string(), num(*v)]);
        }
        rows.push(json!({ "t": t, "g": gt, "accepted": m.samples.len(), "attempts": m.attempts, "acceptance": m.acceptance_rate, "mean": mean, "variance": var, "ks": ks }));
    }
    let last = rows.last().unwrap();
    let pass = match reference {
        Reference::Cdf(..) | Reference::Sample(..) => Some(last["ks"].as_f64().unwrap() < ex.tol.get("ks")),
        Reference::PointMass => {
            Some((last["mean"].as_f64().unwrap() - 1.0).abs() <= ex.tol.get("mean") && last["variance"].as_f64().unwrap() < ex.tol.get("variance"))
        }
        Reference::None => None,
    };
    let report = json!({
        "classification": classification_json(&class)?,
        "normalizer": format!("{:?}", g.kind),
        "reference": reference.name(),
        "rows": rows,
        "pass": pass,
    });
    Ok(Artifacts { data: Some(data), extra: vec![("marginals.csv", marginals)], pass, ..Artifacts::new(report) })
}

pub const VERIFY_TOL: &[(&str, f64)] = &[("ks", 0.04), ("moment_z", 4.0), ("moments", 3.0), ("ess_factor", 1.0)];

pub fn parse_factor(s: &str) -> Result<FactorKind> {
    let (kind, g) = match s.split_once(':') {
        Some((k, g)) => (k, Some(g.parse::<f64>().map_err(|e| crate::config::UsageError(format!("bad factor index {g:?}: {e}")))?)),
        None => (s, None),
    };
    match (kind, g) {
        ("exp", None) => Ok(FactorKind::Exp),
        ("beta", Some(gamma)) => Ok(FactorKind::Beta { gamma }),
        ("pareto", Some(gamma)) => Ok(FactorKind::Pareto { gamma }),
        _ => usage(format!("--factor must be exp, beta:GAMMA or pareto:GAMMA, got {s:?}")),
    }
}

type Curve = Box<dyn Fn(f64) -> f64>;
type Moments = Box<dyn Fn(usize) -> f64>;

/// Target law of factor × I: CDF and moments E[Y^n].
fn target(kind: FactorKind) -> (String, Curve, Moments) {
    match kind {
        FactorKind::Exp => (
            "Exp(1)".into(),
            Box::new(|y: f64| if y <= 0.0 { 0.0 } else { -(-y).exp_m1() }),
            Box::new(|n| ln_gamma(n as f64 + 1.0).exp()),
        ),
        FactorKind::Beta { gamma } => (
            format!("Beta(1, {gamma})"),
            Box::new(move |y: f64| if y <= 0.0 { 0.0 } else if y >= 1.0 { 1.0 } else { 1.0 - (1.0 - y).powf(gamma) }),
            Box::new(move |n| (ln_gamma(n as f64 + 1.0) + ln_gamma(gamma + 1.0) - ln_gamma(n as f64 + gamma + 1.0)).exp()),
        ),
        FactorKind::Pareto { gamma } => (
            format!("Pareto({gamma})"),
            Box::new(move |y: f64| if y <= 0.0 { 0.0 } else { 1.0 - (1.0 + y).powf(-gamma) }),
            Box::new(move |n| {
                let k = n as f64;
                if k >= gamma {
                    f64::INFINITY
                } else {
                    (ln_gamma(k + 1.0) + ln_gamma(gamma - k) - ln_gamma(gamma)).exp()
                }
            }),
        ),
    }
}

fn default_factor(ex: &Experiment) -> Result<FactorKind> {
    if let Some(k) = ex.gallery().and_then(|e| e.factor_kind) {
        return Ok(k);
    }
    let c = pssmp::yaglom::classify(&ex.spec)?;
    Ok(match c.regime {
        Regime::Weibull { gamma0, .. } => FactorKind::Beta { gamma: gamma0 },
        Regime::Frechet { gamma, .. } => FactorKind::Pareto { gamma },
        _ => FactorKind::Exp,
    })
}

/// I samples by path simulation, or from the exact law where paths are not simulated.
fn i_samples(ex: &Experiment) -> Result<(Vec<f64>, &'static str)> {
    if let Some(e) = ex.gallery() {
        if !e.path_sim {
            if let Some(v) = e.i_law.as_ref().and_then(|l| l.sample(ex.n, ex.seed)) {
                return Ok((v, "exact"));
            }
        }
    }
    Ok((ExpFunctional::new(&ex.spec, &ex.sim())?.sample_values(ex.n, 0)?, "path"))
}

pub fn verify_factorization(ex: &Experiment, factor: Option<&str>) -> Result<Artifacts> {
    let kind = match factor {
        Some(s) => parse_factor(s)?,
        None => default_factor(ex)?,
    };
    let n_mom = ex.tol.count("moments");
    let (tname, tcdf, tmom) = target(kind);
    let law: FactorLaw<f64> = match kind {
        FactorKind::Exp => match exp_factor_moments(&ex.spec, n_mom) {
            Ok(l) => l,
            Err(Error::NotASubordinator(r)) => return not_factorizable(kind, &r),
            Err(e) => return Err(e.into()),
        },
        FactorKind::Beta { gamma } => match beta_factor(&ex.spec, gamma, n_mom)? {
            Factorization::Law(l) => l,
            Factorization::NotFactorizable { reason } => return not_factorizable(kind, &reason),
        },
        FactorKind::Pareto { .. } => FactorLaw { kind, moments: moments_i_general(&ex.spec, 0), closed_form: None, support_sup: None },
    };
    let (i, i_source) = i_samples(ex)?;
    let gallery_sampler = ex.gallery().filter(|e| e.factor_kind == Some(kind)).and_then(|e| e.factor_law.as_ref()).filter(|l| l.sampler.is_some());
    let (product, factor_source, factor_moments) = match (kind, gallery_sampler) {
        (_, Some(l)) => {
            let r = l.sample(i.len(), ex.seed ^ FACTOR_STREAM).unwrap();
            let m: Vec<f64> = (1..=n_mom).map(|k| l.moments.as_ref().map_or(f64::NAN, |f| f(k))).collect();
            (Some(WeightedSample::unweighted(i.iter().zip(&r).map(|(a, b)| a * b).collect())), l.closed_form.clone(), m)
        }
        (FactorKind::Pareto { gamma }, None) => {
            let cfg = pssmp::path::SimConfig::with_seed(ex.seed ^ FACTOR_STREAM);
            let target_ess = ex.tol.get("ess_factor") * ex.n as f64;
            let p = pareto_factor_with_ess(&ex.spec, gamma, target_ess, 8 * ex.n, &cfg, &ParetoSamplerConfig::default())?;
            let m = (1..=n_mom).map(|k| if k <= p.law.moments.moments.len() { p.law.moments.get(k) } else { f64::NAN }).collect();
            let k = p.sample.len().min(i.len());
            let values = (0..k).map(|j| p.sample.values[j] * i[j]).collect();
            let prod = WeightedSample::new(values, p.sample.weights[..k].to_vec())?;
            (Some(prod), format!("weighted Pareto factor sample (ess {:.0})", p.ess), m)
        }
        _ => (None, "moments only".to_string(), law.moments.moments.clone()),
    };
    let ks = product.as_ref().map(|s| ks_one_sample(s, &tcdf)).transpose()?;
    // Moments of the product, either from the sample or as E[R^n]·Ê[I^n].
    let mut moment_rows = Vec::new();
    let mut worst_z = 0.0f64;
    let tail_bound = match kind {
        FactorKind::Pareto { gamma } => gamma,
        _ => f64::INFINITY,
    };
    let est = match &product {
        Some(p) => empirical_moments(p, n_mom as u32)?,
        None => empirical_moments(&WeightedSample::unweighted(i.clone()), n_mom as u32)?,
    };
    for (k, e) in est.iter().enumerate() {
        let order = k + 1;
        if 2.0 * order as f64 >= tail_bound {
            break;
        }
        let scale = if product.is_some() { 1.0 } else { factor_moments.get(k).copied().unwrap_or(f64::NAN) };
        let (m, se) = (e.mean * scale, e.std_error * scale);
        let want = tmom(order);
        let z = (m - want).abs() / se;
        if z.is_finite() {
            worst_z = worst_z.max(z);
        }
        moment_rows.push(json!({ "order": order, "estimate": m, "std_error": se, "target": want, "z": z }));
    }
    let pass = ks.is_none_or(|d| d < ex.tol.get("ks")) && worst_z < ex.tol.get("moment_z");
    let mut data = Table::new(&["order", "estimate", "std_error", "target"]);
    for r in &moment_rows {
        data.push(vec![
            r["order"].to_string(),
            num(r["estimate"].as_f64().unwrap()),
            num(r["std_error"].as_f64().unwrap()),
            num(r["target"].as_f64().unwrap()),
        ]);
    }
    let report = json!({
        "factor": kind,
        "target": tname,
        "i_source": i_source,
        "factor_source": factor_source,
        "ks": ks,
        "moments": moment_rows,
        "max_moment_z": worst_z,
        "pass": pass,
    });
    Ok(Artifacts { data: Some(data), pass: Some(pass), code: if pass { 0 } else { 1 }, ..Artifacts::new(report) })
}

fn not_factorizable(kind: FactorKind, reason: &str) -> Result<Artifacts> {
    let report = json!({ "factor": kind, "pass": false, "reason": reason });
    Ok(Artifacts { pass: Some(false), code: 1, ..Artifacts::new(report) })
}

pub const CPY_TOL: &[(&str, f64)] = &[("nodes", 2048.0), ("x_max", 0.0), ("tol", 1e-10), ("max_sweeps", 200.0)];

fn cpy_config(ex: &Experiment) -> CpyConfig<f64> {
    let x_max = ex.tol.get("x_max");
    CpyConfig {
        nodes: ex.tol.count("nodes"),
        x_max: (x_max > 0.0).then_some(x_max),
        tol: ex.tol.get("tol"),
        max_sweeps: ex.tol.count("max_sweeps"),
        ..CpyConfig::default()
    }
}

fn require_subordinator(spec: &LevySpec<f64>, what: &str) -> Result<()> {
    if !spec.is_subordinator_neg() {
        return Err(Error::NotASubordinator(format!("{what} needs -xi to be a subordinator")).into());
    }
    Ok(())
}

pub fn density(ex: &Experiment) -> Result<Artifacts> {
    require_subordinator(&ex.spec, "the density equation")?;
    let grid = solve_cpy(&ex.spec, &cpy_config(ex))?;
    let mut data = Table::new(&["x", "k", "hazard", "tail", "cumulative"]);
    for j in 0..grid.x.len() {
        data.push(vec![num(grid.x[j]), num(grid.k[j]), num(grid.hazard[j]), num((-grid.f[j]).exp()), num(grid.cumulative[j])]);
    }
    let rec = moments_i(&ex.spec, 3)?;
    let moments: Vec<Value> = (1..=3)
        .map(|k| grid.moment(k))
        .zip(&rec.moments)
        .enumerate()
        .map(|(k, (g, r))| json!({ "order": k + 1, "grid": g, "recursion": r, "rel_err": (g / r - 1.0).abs() }))
        .collect();
    let report = json!({
        "map": grid.map,
        "nodes": grid.x.len(),
        "x_min": grid.x[0],
        "x_max": grid.x[grid.x.len() - 1],
        "sweeps": grid.sweeps,
        "boundary_mass": grid.boundary_mass,
        "tail_mass": grid.tail_mass,
        "normalization_residual": grid.normalization_residual,
        "moments": moments,
    });
    Ok(Artifacts { data: Some(data), ..Artifacts::new(report) })
}

pub const TAIL_TOL: &[(&str, f64)] = &[
    ("nodes", 2048.0),
    ("x_max", 0.0),
    ("tol", 1e-10),
    ("max_sweeps", 200.0),
    ("ratio_lo", 0.8),
    ("ratio_hi", 1.25),
    ("hn_nodes", 256.0),
    ("hn_iter", 20.0),
];

pub fn tail(ex: &Experiment) -> Result<Artifacts> {
    require_subordinator(&ex.spec, "tail asymptotics")?;
    let grid = solve_cpy(&ex.spec, &cpy_config(ex))?;
    let rep = tail_asymptote_check(&ex.spec, &grid)?;
    let mut data = Table::new(&["x", "ratio"]);
    for (x, r) in rep.x.iter().zip(&rep.ratio) {
        data.push(vec![num(*x), num(*r)]);
    }
    let last = *rep.ratio.last().unwrap();
    let pass = (ex.tol.get("ratio_lo")..=ex.tol.get("ratio_hi")).contains(&last);
    let mut extra = Vec::new();
    let hn = if ex.spec.sub_drift() == 0.0 {
        let x_lo = grid.x[0];
        let x_hi = grid.x[grid.x.len() - 1];
        let h = tail_iteration_hn(&ex.spec, x_lo, x_hi, ex.tol.count("hn_nodes"), ex.tol.count("hn_iter"))?;
        let mut t = Table::new(&["x", "h"]);
        for (x, v) in h.x.iter().zip(&h.h) {
            t.push(vec![num(*x), num(*v)]);
        }
        extra.push(("hn.csv", t));
        json!({ "changes": h.changes, "max_monotonicity_violation": h.max_monotonicity_violation })
    } else {
        Value::Null
    };
    let report = json!({
        "ratio_min": rep.ratio_min,
        "ratio_max": rep.ratio_max,
        "ratio_at_top": last,
        "x_top": rep.x.last(),
        "hn_iteration": hn,
        "pass": pass,
    });
    Ok(Artifacts { data: Some(data), extra, pass: Some(pass), code: if pass { 0 } else { 1 }, ..Artifacts::new(report) })
}

pub const RESIDUAL_TOL: &[(&str, f64)] = &[("ks", 0.03), ("acceptance_floor", pssmp::mc::ACCEPTANCE_FLOOR), ("min_attempts", 200_000.0)];

pub fn residual(ex: &Experiment, mda: bool) -> Result<Artifacts> {
    let ts = ex.require_t()?;
    let cfg = ex.sim();
    let mut data = Table::new(&["t", "ks", "threshold", "pass", "n_a", "n_b"]);
    let mut rows = Vec::new();
    for &t in ts {
        let r = residual_identity_check(&ex.spec, t, ex.n, &cfg, ex.tol.get("ks"))?;
        data.push(vec![num(t), num(r.statistic), num(r.threshold), r.pass.to_string(), r.n_a.to_string(), r.n_b.to_string()]);
        rows.push(json!({ "t": t, "check": r }));
    }
    let pass = rows.iter().all(|r| r["check"]["pass"].as_bool() == Some(true));
    let mda = if mda {
        let rep = residual_mda_fit(&ex.spec, ts, ex.n, &cfg, budget(ex))?;
        json!({
            "regime": rep.regime,
            "expected": rep.expected,
            "t_F": rep.t_f,
            "agrees": rep.agrees(),
            "points": rep.points.iter().map(|p| p.to_json()).collect::<Vec<_>>(),
        })
    } else {
        Value::Null
    };
    let report = json!({ "rows": rows, "mda": mda, "pass": pass });
    Ok(Artifacts { data: Some(data), pass: Some(pass), code: if pass { 0 } else { 1 }, ..Artifacts::new(report) })
}

pub const SIMULATE_TOL: &[(&str, f64)] = &[("ks", 0.03), ("moments", 3.0)];

pub fn simulate(ex: &Experiment, exact: bool) -> Result<Artifacts> {
    let (i, source) = if exact {
        match ex.gallery().and_then(|e| e.i_law.as_ref()).and_then(|l| l.sample(ex.n, ex.seed)) {
            Some(v) => (v, "exact"),
            None => return usage("--exact needs a gallery example with an exact sampler for I"),
        }
    } else {
        i_samples(ex)?
    };
    let mut data = Table::new(&["replica", "value"]);
    for (k, v) in i.iter().enumerate() {
        data.push(vec![k.to_string(), num(*v)]);
    }
    let s = WeightedSample::unweighted(i);
    let n_mom = ex.tol.count("moments");
    let rec = moments_i_general(&ex.spec, n_mom);
    let moments: Vec<Value> = empirical_moments(&s, n_mom as u32)?
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let r = (k < rec.finite_prefix).then(|| rec.moments[k]);
            json!({ "order": k + 1, "mean": e.mean, "std_error": e.std_error, "recursion": r })
        })
        .collect();
    let law = ex.gallery().and_then(|e| e.i_law.as_ref());
    let ks = match law {
        Some(RefLaw { cdf: Some(f), .. }) => Some(ks_one_sample(&s, |x| f(x))?),
        Some(l @ RefLaw { sampler: Some(_), .. }) => {
            Some(ks_two_sample(&s, &WeightedSample::unweighted(l.sample(ex.n, ex.seed ^ FACTOR_STREAM).unwrap()))?)
        }
        _ => None,
    };
    let pass = ks.map(|d| d < ex.tol.get("ks"));
    let report = json!({
        "source": source,
        "n": s.len(),
        "moments": moments,
        "reference": law.map(|l| l.closed_form.clone()),
        "ks": ks,
        "pass": pass,
    });
    Ok(Artifacts { data: Some(data), pass, ..Artifacts::new(report) })
}

pub fn examples(n: usize, seed: u64, self_test: bool, ks_tol: f64) -> Result<Artifacts> {
    let entries = gallery::gallery()?;
    let mut data = Table::new(&["name", "label", "law", "closed_form", "ks"]);
    let mut checks = Vec::new();
    let mut pass = true;
    for e in &entries {
        let label = e.label.map(|c| c.to_string()).unwrap_or_default();
        let laws = [("i", &e.i_law), ("i_star", &e.i_star_law), ("factor", &e.factor_law), ("yaglom", &e.yaglom_law)];
        for (which, law) in laws {
            let Some(l) = law else { continue };
            let ks = match (&l.sampler, &l.cdf, self_test) {
                (Some(_), Some(cdf), true) if !l.closed_form.starts_with("point mass") => {
                    let d = ks_one_sample(&WeightedSample::unweighted(l.sample(n, seed).unwrap()), |x| cdf(x))?;
                    pass &= d < ks_tol;
                    Some(d)
                }
                _ => None,
            };
            data.push(vec![e.name.to_string(), label.clone(), which.to_string(), l.closed_form.clone(), opt(ks)]);
        }
        if self_test {
            let got = pssmp::yaglom::classify(&e.spec)?.name();
            pass &= got == e.expected_regime;
            checks.push(json!({ "name": e.name, "regime": got, "expected_regime": e.expected_regime }));
        }
    }
    let report = json!({ "examples": gallery::gallery_json()?, "self_test": self_test.then_some(checks), "pass": self_test.then_some(pass) });
    let ok = !self_test || pass;
    Ok(Artifacts { data: Some(data), pass: self_test.then_some(pass), code: if ok { 0 } else { 1 }, ..Artifacts::new(report) })
}
