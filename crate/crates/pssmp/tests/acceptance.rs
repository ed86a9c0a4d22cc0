//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run a subset with `cargo test --test acceptance -- 3 7`.

use std::f64::consts::PI;
use std::time::Instant;

use pssmp::cpy::{hazard_envelope, solve_cpy, CpyConfig};
use pssmp::expfun::{moments_i, moments_i_general, ExpFunctional};
use pssmp::gallery::*;
use pssmp::lamperti::{residual_identity_check, sample_u_from, sample_x_conditioned};
use pssmp::levy::LevyMeasure;
use pssmp::mc::RejectionBudget;
use pssmp::norming::{phi_forward, phi_inverse, phi_inverse_domain, NormalizerFn};
use pssmp::path::SimConfig;
use pssmp::rng::with_threads;
use pssmp::stats::{empirical_moments, hill_estimator, ks_one_sample, ks_two_sample, WeightedSample};
use pssmp::yaglom::classify;
use pssmp::{LevySpec, Real, Result};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

fn cfg(seed: u64) -> SimConfig<f64> {
    SimConfig::with_seed(seed)
}

fn sim_i(spec: &LevySpec<f64>, n: usize, seed: u64) -> Result<Vec<f64>> {
    ExpFunctional::new(spec, &cfg(seed))?.sample_values(n, 0)
}

fn exp_cdf(rate: f64) -> impl Fn(f64) -> f64 {
    move |y| if y <= 0.0 { 0.0 } else { -(-rate * y).exp_m1() }
}

fn pareto_cdf(gamma: f64) -> impl Fn(f64) -> f64 {
    move |y| if y <= 0.0 { 0.0 } else { 1.0 - (1.0 + y).powf(-gamma) }
}

fn c1_moments() -> Result<Outcome> {
    let mut ok = true;
    let mut notes = Vec::new();
    // Parameters for the MC comparison keep E[I^6] finite so that 3 s.e. is meaningful up to n = 3.
    let mc = [
        ("a", killed_stable_sub(0.5)?),
        ("b", drift_exp_jump(1.0, 1.0, 0.0, 1.0, Some(1.0))?),
        ("c", brownian_drift(1.0, 4.0, 1.0)?),
        ("f", rational(7.0, 8.0)?),
    ];
    for (k, (label, e)) in mc.iter().enumerate() {
        let rec = if e.spec.is_subordinator_neg() { moments_i(&e.spec, 3)? } else { moments_i_general(&e.spec, 3) };
        let est = empirical_moments(&WeightedSample::unweighted(sim_i(&e.spec, 100_000, 100 + k as u64)?), 3)?;
        let worst = est
            .iter()
            .zip(&rec.moments)
            .map(|(m, r)| (m.mean - r).abs() / m.std_error)
            .fold(0.0, f64::max);
        ok &= worst < 3.0;
        notes.push(format!("{label}: max |MC-rec|/se {worst:.2}"));
    }
    let oracles = [
        ("a", moments_i(&killed_stable_sub(0.5)?.spec, 1)?.moments[0], 2.0 / PI.sqrt()),
        ("b", moments_i(&drift_exp_jump(1.0, 1.0, 0.0, 1.0, Some(1.0))?.spec, 1)?.moments[0], 0.5),
        ("c", moments_i_general(&brownian_drift(1.0, 1.0, 1.0)?.spec, 1).moments[0], 2.0),
        ("f(3,4)", moments_i_general(&rational(3.0, 4.0)?.spec, 1).moments[0], 1.0),
    ];
    for (label, got, want) in oracles {
        let err = (got / want - 1.0).abs();
        ok &= err < 1e-10;
        notes.push(format!("E[I] {label} {got:.12} rel err {err:.1e}"));
    }
    outcome(ok, notes.join("; ") + " (tol 3 se, 1e-10)")
}

fn c2_mittag_leffler() -> Result<Outcome> {
    let e = killed_stable_sub(0.5)?;
    let sim = WeightedSample::unweighted(sim_i(&e.spec, 10_000, 2)?);
    let exact = WeightedSample::unweighted(e.i_law.unwrap().sample(10_000, 3).unwrap());
    let d = ks_two_sample(&sim, &exact)?;
    outcome(d < 0.03, format!("KS {d:.4} < 0.03"))
}

fn c3_cpy() -> Result<Outcome> {
    let kd = LevySpec::<f64>::subordinator(1.0, None, 1.0)?;
    let g = solve_cpy(&kd, &CpyConfig::default())?;
    let e1 = g.k.iter().map(|k| (k - 1.0).abs()).fold(0.0, f64::max);
    let et = LevySpec::<f64>::subordinator(1.0, Some(LevyMeasure::exp(1.0, 1.0)?), 0.0)?;
    let h = solve_cpy(&et, &CpyConfig::default())?;
    let e2 = h.x.iter().zip(&h.k).map(|(x, k)| (k - 2.0 * x).abs()).fold(0.0, f64::max);
    let mut e3 = 0.0f64;
    for (spec, grid) in [(&kd, &g), (&et, &h)] {
        let mu = moments_i(spec, 3)?;
        for n in 1..=3 {
            e3 = e3.max((grid.moment(n) / mu.moments[n as usize - 1] - 1.0).abs());
        }
    }
    outcome(e1 < 1e-3 && e2 < 1e-3 && e3 < 1e-2, format!("sup|k-1| {e1:.1e}, sup|k-2x| {e2:.1e} < 1e-3; moments rel {e3:.1e} < 1e-2"))
}

fn c4_phi() -> Result<Outcome> {
    let ks = killed_stable_sub(0.5)?.spec;
    let exp = LevyMeasure::exp(1.0, 1.0)?;
    let mut rt = 0.0f64;
    for (m, q) in [(ks.sub_measure(), ks.killing), (Some(&exp), 0.0), (Some(&exp), 0.5)] {
        let lo = phi_inverse_domain(m, q).max(1e-3) * 1.001;
        for j in 0..=60 {
            let t = lo * 10f64.powf(j as f64 / 10.0);
            let u = phi_inverse(m, q, t)?;
            rt = rt.max((phi_forward(m, q, u) / t - 1.0).abs());
        }
    }
    // Π = q ρ e^{−ρx}: φ_{Π,0}(u) = q u − ρ.
    let (q, rho) = (1.5f64, 1.0f64);
    let m = LevyMeasure::exp(q, rho)?;
    let mut cf = 0.0f64;
    for u in [1.0, 2.0, 5.0, 10.0, 100.0] {
        let want = q * u - rho;
        cf = cf.max((phi_inverse(Some(&m), 0.0, u)? - want).abs() / want.max(1.0));
    }
    outcome(rt < 1e-10 && cf < 1e-12, format!("round trip {rt:.1e} < 1e-10; closed form {cf:.1e} < 1e-12"))
}

fn c5_gumbel_tail() -> Result<Outcome> {
    let spec = killed_stable_sub(0.5)?.spec;
    let g = solve_cpy(&spec, &CpyConfig { x_max: Some(1e3), ..CpyConfig::default() })?;
    let x = 1e3;
    let ratio = g.hazard_at(x) / hazard_envelope(&spec, x)?;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for j in 0..=10 {
        let t = 100.0 * 10f64.powf(j as f64 / 10.0) * if j == 10 { 0.999 } else { 1.0 };
        let v = g.von_mises(t);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let ok = (0.8..=1.25).contains(&ratio) && lo >= 0.8 && hi <= 1.25;
    outcome(ok, format!("hazard ratio at 1e3 {ratio:.4}; von Mises on [1e2,1e3] in [{lo:.4}, {hi:.4}] (window [0.8, 1.25])"))
}

fn c6_weibull() -> Result<Outcome> {
    let spec = LevySpec::<f64>::subordinator(1.0, None, 1.0)?;
    let t = 0.95;
    let m = sample_x_conditioned(&spec, 1.0, t, Some(&NormalizerFn::weibull(1.0)), 10_000, &cfg(6), RejectionBudget::default())?;
    let n = m.samples.len() as f64;
    let mean = m.samples.iter().sum::<f64>() / n;
    let var = m.samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let g = solve_cpy(&spec, &CpyConfig::default())?;
    let lemma = (1.0 - t) * g.density_at(t) / g.tail_prob(t);
    let ok = (0.95..=1.05).contains(&mean) && var < 0.02 && (lemma - 1.0).abs() < 0.1;
    outcome(ok, format!("mean {mean:.4} in [0.95,1.05], var {var:.2e} < 0.02; (1/d-t)k/P {lemma:.4} within 10% of 1"))
}

fn c7_frechet() -> Result<Outcome> {
    let spec = LevySpec::<f64>::brownian(1.0, -1.0)?;
    let m = sample_x_conditioned(&spec, 1.0, 50.0, Some(&NormalizerFn::frechet()), 10_000, &cfg(7), RejectionBudget::default())?;
    let d1 = ks_one_sample(&m.weighted(), exp_cdf(2.0))?;
    let u = sample_u_from(&spec, |r| f64::std_exp(r) / 2.0, 1.0, 10_000, &cfg(11), RejectionBudget::default())?;
    let d2 = ks_one_sample(&u.weighted(), exp_cdf(2.0))?;
    outcome(d1 < 0.05 && d2 < 0.04, format!("Yaglom KS {d1:.4} < 0.05 (acceptance {:.2e}); OU KS {d2:.4} < 0.04", m.acceptance_rate))
}

fn c8_factorizations() -> Result<Outcome> {
    let n = 10_000;
    let a = killed_stable_sub(0.5)?;
    let ia = sim_i(&a.spec, n, 81)?;
    let ra = a.factor_law.unwrap().sample(n, 82).unwrap();
    let da = ks_one_sample(&WeightedSample::unweighted(ia.iter().zip(&ra).map(|(i, r)| i * r).collect()), exp_cdf(1.0))?;
    let f = rational(1.0, 2.0)?;
    let i_f = sim_i(&f.spec, n, 83)?;
    let jf = f.factor_law.unwrap().sample(n, 84).unwrap();
    let df = ks_one_sample(&WeightedSample::unweighted(i_f.iter().zip(&jf).map(|(i, j)| i * j).collect()), pareto_cdf(1.0))?;
    let c = brownian_drift(1.0, 1.0, 1.0)?;
    let ic = sim_i(&c.spec, n, 85)?;
    let jc = c.factor_law.unwrap().sample(n, 86).unwrap();
    let dc = ks_one_sample(&WeightedSample::unweighted(ic.iter().zip(&jc).map(|(i, j)| i * j).collect()), pareto_cdf(2.0))?;
    let ok = da < 0.04 && df < 0.04 && dc < 0.04;
    outcome(ok, format!("a: e^(1/2) I vs Exp(1) {da:.4}; f: I U vs Pareto(1) {df:.4}; c: I e/2 vs Pareto(2) {dc:.4} (each < 0.04)"))
}

fn c9_residual_identity() -> Result<Outcome> {
    let b = drift_exp_jump(1.0, 1.0, 0.0, 1.0, Some(1.0))?;
    let rb = residual_identity_check(&b.spec, 0.5, 10_000, &cfg(9), 0.03)?;
    let c = brownian_drift(1.0, 1.0, 1.0)?;
    let rc = residual_identity_check(&c.spec, 1.0, 10_000, &cfg(10), 0.03)?;
    outcome(rb.pass && rc.pass, format!("b at t=0.5 KS {:.4}; c at t=1 KS {:.4} (each < 0.03)", rb.statistic, rc.statistic))
}

fn c10_classification() -> Result<Outcome> {
    let suite = [
        killed_stable_sub(0.5)?,
        drift_exp_jump(1.0, 1.0, 1.0, 1.0, None)?,
        brownian_drift(1.0, 1.0, 1.0)?,
        stable_csbp(1.5, 1.0)?,
        stable_killed(1.0, 0.5)?,
        rational(3.0, 4.0)?,
        finite_drift_free(1.0, 1.0, 0.5)?,
        stable_sub_drift(1.0, 0.5, 0.5)?,
    ];
    let mut ok = true;
    let mut wrong = Vec::new();
    for e in &suite {
        let got = classify(&e.spec)?.name();
        if got != e.expected_regime {
            ok = false;
            wrong.push(format!("{}: {got} != {}", e.name, e.expected_regime));
        }
    }
    let bm = brownian_drift(1.0, 1.0, 1.0)?.spec.cramer_root()?.unwrap_or(f64::NAN);
    let bm2 = brownian_drift(0.5, 0.3, 1.0)?.spec.cramer_root()?.unwrap_or(f64::NAN);
    let rat = rational(3.0, 4.0)?.spec.cramer_root()?.unwrap_or(f64::NAN);
    let errs = [(bm - 2.0).abs(), (bm2 - 2.0 * 0.3 / 0.25).abs() / 2.4, (rat - 3.0).abs() / 3.0];
    let root_err = errs.iter().copied().fold(0.0, f64::max);
    ok &= root_err < 1e-12;
    let detail = if wrong.is_empty() { format!("{}/8 regimes correct", suite.len()) } else { wrong.join(", ") };
    outcome(ok, format!("{detail}; Cramer roots rel err {root_err:.1e} < 1e-12"))
}

fn c11_hill() -> Result<Outcome> {
    let c = brownian_drift(1.0, 1.0, 1.0)?;
    let hb = hill_estimator(&sim_i(&c.spec, 100_000, 111)?, 0.01)?;
    let e = stable_killed(1.0, 0.5)?;
    let hc = hill_estimator(&sim_i(&e.spec, 100_000, 112)?, 0.01)?;
    let ok = (1.6..=2.4).contains(&hb.gamma) && (0.35..=0.65).contains(&hc.gamma);
    outcome(ok, format!("Brownian {:.3} in [1.6,2.4]; Cauchy extinction time {:.3} in [0.35,0.65]", hb.gamma, hc.gamma))
}

fn c12_csbp() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for s in [0.5, 1.0, 2.0] {
        worst = worst.max((csbp_factorization_check(1.5, s)? - (1.0 + s).powi(-2)).abs());
    }
    outcome(worst < 1e-3, format!("max |quadrature - (1+s)^-2| {worst:.1e} < 1e-3"))
}

/// Bit patterns of reduced versions of criteria 1-9.
fn fingerprint() -> Result<Vec<u64>> {
    let mut out = Vec::new();
    let mut push = |v: &[f64]| out.extend(v.iter().map(|x| x.to_bits()));
    let a = killed_stable_sub(0.5)?;
    let b = drift_exp_jump(1.0, 1.0, 0.0, 1.0, Some(1.0))?;
    let c = brownian_drift(1.0, 1.0, 1.0)?;
    let f = rational(3.0, 4.0)?;
    for (k, e) in [&a, &b, &c, &f].into_iter().enumerate() {
        push(&sim_i(&e.spec, 2000, 300 + k as u64)?);
    }
    push(&a.factor_law.as_ref().unwrap().sample(2000, 7).unwrap());
    push(&c.factor_law.as_ref().unwrap().sample(2000, 8).unwrap());
    let g = solve_cpy(&LevySpec::<f64>::subordinator(1.0, None, 1.0)?, &CpyConfig { nodes: 256, ..CpyConfig::default() })?;
    push(&g.k);
    push(&[phi_inverse(a.spec.sub_measure(), a.spec.killing, 50.0)?]);
    let w = sample_x_conditioned(&b.spec, 1.0, 0.95, Some(&NormalizerFn::weibull(1.0)), 500, &cfg(6), RejectionBudget::default())?;
    push(&w.samples);
    let y = sample_x_conditioned(&c.spec, 1.0, 5.0, Some(&NormalizerFn::frechet()), 500, &cfg(7), RejectionBudget::default())?;
    push(&y.samples);
    let u = sample_u_from(&c.spec, |r| f64::std_exp(r) / 2.0, 1.0, 500, &cfg(11), RejectionBudget::default())?;
    push(&u.samples);
    push(&[residual_identity_check(&c.spec, 1.0, 1000, &cfg(10), 0.03)?.statistic]);
    Ok(out)
}

fn c13_determinism() -> Result<Outcome> {
    let base = with_threads(1, fingerprint)?;
    let mut ok = true;
    for threads in [4, 8] {
        ok &= with_threads(threads, fingerprint)? == base;
    }
    outcome(ok, format!("{} values bit-identical across 1, 4, 8 threads (reduced sizes)", base.len()))
}

type Criterion = fn() -> Result<Outcome>;

fn main() {
    let all: [(u32, &str, Criterion); 13] = [
        (1, "moment recursion", c1_moments),
        (2, "Mittag-Leffler law", c2_mittag_leffler),
        (3, "density equation", c3_cpy),
        (4, "phi inverse", c4_phi),
        (5, "Gumbel tail asymptotics", c5_gumbel_tail),
        (6, "Weibull Yaglom limit", c6_weibull),
        (7, "Frechet Yaglom limit", c7_frechet),
        (8, "factorizations", c8_factorizations),
        (9, "residual-lifetime identity", c9_residual_identity),
        (10, "classification", c10_classification),
        (11, "tail-index diagnostics", c11_hill),
        (12, "CSBP identity", c12_csbp),
        (13, "determinism", c13_determinism),
    ];
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, run) in all {
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        let t0 = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!("criterion {id:>2} {}: {name}: {detail} [{:.1}s]", if pass { "PASS" } else { "FAIL" }, t0.elapsed().as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
