use pssmp::expfun::{moments_i, ExpFunctional};
use pssmp::gallery::*;
use pssmp::path::SimConfig;
use pssmp::quad::integrate_inf;
use pssmp::stats::{ks_one_sample, ks_two_sample, WeightedSample};
use pssmp::yaglom::{beta_factor, exp_factor_moments, Factorization};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn samplers_match_their_own_cdfs() {
    let mut entries = gallery().unwrap();
    entries.push(killed_stable_sub(0.3).unwrap());
    entries.push(rational(1.0, 2.0).unwrap());
    for e in &entries {
        let laws = [&e.i_law, &e.i_star_law, &e.factor_law, &e.yaglom_law];
        for law in laws.into_iter().flatten() {
            let (Some(_), Some(cdf)) = (&law.sampler, &law.cdf) else { continue };
            if law.closed_form.starts_with("point mass") {
                continue;
            }
            let s = WeightedSample::unweighted(law.sample(10_000, 5).unwrap());
            let d = ks_one_sample(&s, |x| cdf(x)).unwrap();
            assert!(d < 0.02, "{} {}: KS {d}", e.name, law.closed_form);
        }
    }
}

#[test]
fn sampler_means_match_moments() {
    for e in gallery().unwrap() {
        let laws = [&e.i_law, &e.factor_law];
        for law in laws.into_iter().flatten() {
            let (Some(m), Some(v)) = (law.mean(), law.sample(40_000, 9)) else { continue };
            if !m.is_finite() || e.tail_index.is_some_and(|a| a <= 2.0) && std::ptr::eq(law, e.i_law.as_ref().unwrap()) {
                continue;
            }
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            assert!(rel(mean, m) < 0.03, "{} {}: {mean} vs {m}", e.name, law.closed_form);
        }
    }
}

#[test]
fn closed_form_means() {
    let a = killed_stable_sub(0.5).unwrap();
    assert!(rel(a.i_law.unwrap().mean().unwrap(), 2.0 / std::f64::consts::PI.sqrt()) < 1e-12);
    let c = brownian_drift(1.0, 1.0, 1.0).unwrap();
    assert!(rel(c.i_law.unwrap().mean().unwrap(), 2.0) < 1e-12);
    assert!(rel(c.factor_law.unwrap().mean().unwrap(), 0.5) < 1e-12);
    let b = drift_exp_jump(1.0, 1.0, 0.0, 1.0, None).unwrap();
    assert!(rel(b.i_law.unwrap().mean().unwrap(), 0.5) < 1e-12);
    let f = rational(3.0, 4.0).unwrap();
    let fi = f.i_law.unwrap();
    assert!(rel(fi.mean().unwrap(), 1.0) < 1e-12);
    assert!(rel(fi.moments.as_ref().unwrap()(2), 3.0) < 1e-12);
    // δ = 1: E[1/B] diverges for B ~ Beta(1, 2).
    assert!(rational(1.0, 2.0).unwrap().i_law.unwrap().mean().unwrap().is_infinite());
}

#[test]
fn moments_agree_with_recursion() {
    let entries = [
        killed_stable_sub(0.5).unwrap(),
        killed_stable_sub(0.3).unwrap(),
        drift_exp_jump(1.0, 1.0, 1.0, 1.0, None).unwrap(),
        drift_exp_jump(2.0, 0.5, 0.7, 0.6, None).unwrap(),
        drift_exp_jump(1.0, 1.0, 0.0, 1.0, Some(1.0)).unwrap(),
    ];
    for e in &entries {
        let rec = moments_i(&e.spec, 6).unwrap();
        let m = e.i_law.as_ref().unwrap().moments.as_ref().unwrap();
        for n in 1..=6 {
            assert!(rel(rec.get(n), m(n)) < 1e-10, "{} n={n}: {} vs {}", e.name, rec.get(n), m(n));
        }
        let fm = e.factor_law.as_ref().unwrap().moments.as_ref().unwrap();
        let law = match e.factor_kind.unwrap() {
            pssmp::yaglom::FactorKind::Beta { gamma } => match beta_factor(&e.spec, gamma, 6).unwrap() {
                Factorization::Law(l) => l,
                Factorization::NotFactorizable { reason } => panic!("{reason}"),
            },
            _ => exp_factor_moments(&e.spec, 6).unwrap(),
        };
        for n in 1..=6 {
            assert!(rel(law.moments.get(n), fm(n)) < 1e-10, "{} factor n={n}", e.name);
        }
    }
}

#[test]
fn beta_product_sampler_matches_moments() {
    let e = drift_exp_jump(1.0, 1.0, 1.0, 1.0, None).unwrap();
    let law = e.factor_law.unwrap();
    let v = law.sample(100_000, 4).unwrap();
    for n in 1..=3 {
        let emp = v.iter().map(|x| x.powi(n as i32)).sum::<f64>() / v.len() as f64;
        assert!(rel(emp, law.moments.as_ref().unwrap()(n)) < 0.02);
    }
}

#[test]
fn cramer_roots() {
    for (name, e) in [
        ("brownian", brownian_drift(1.0, 1.0, 1.0).unwrap()),
        ("brownian2", brownian_drift(0.8, 0.5, 1.5).unwrap()),
        ("csbp", stable_csbp(1.5, 1.0).unwrap()),
        ("csbp2", stable_csbp(1.3, 2.0).unwrap()),
        ("rational", rational(3.0, 4.0).unwrap()),
        ("cauchy", stable_killed(1.0, 0.5).unwrap()),
        ("stable-0.6", stable_killed(0.6, 0.3).unwrap()),
        ("stable-1.5", stable_killed(1.5, 0.5).unwrap()),
    ] {
        let g = e.spec.cramer_root().unwrap().unwrap();
        assert!((g - e.cramer_gamma.unwrap()).abs() < 1e-7, "{name}: {g}");
    }
}

#[test]
fn killed_stable_exponent_matches_closed_form() {
    for (alpha, rho) in [(0.6, 0.3), (0.8, 0.5), (1.5, 0.5), (1.7, 0.45)] {
        for theta in [0.1, 0.25, 0.4] {
            let a = killed_stable_exponent(alpha, rho, theta).unwrap();
            let b = lamperti_stable_exponent(alpha, rho, theta).unwrap();
            assert!((a - b).abs() < 1e-8 * b.abs().max(1.0), "{alpha} {rho} {theta}: {a} vs {b}");
        }
        // ψ(0) is minus the killing rate.
        let (_, cm) = stable_constants(alpha, rho).unwrap();
        assert!((lamperti_stable_exponent(alpha, rho, 0.0).unwrap() + cm / alpha).abs() < 1e-12);
    }
}

#[test]
fn csbp_spec_has_closed_form_exponent() {
    let (alpha, cp) = (1.5, 1.0);
    let e = stable_csbp(alpha, cp).unwrap();
    let beta = alpha - 1.0;
    for theta in [0.2, 0.7, 1.3] {
        let got = e.spec.mgf_exponent(theta / beta);
        let want = csbp_exponent(alpha, cp, theta);
        assert!((got - want).abs() < 1e-8, "{theta}: {got} vs {want}");
    }
}

#[test]
fn path_simulation_matches_i_laws() {
    let cfg = SimConfig::<f64>::with_seed(77);
    for e in gallery().unwrap() {
        let (true, Some(law)) = (e.path_sim, &e.i_law) else { continue };
        let ef = ExpFunctional::new(&e.spec, &cfg).unwrap();
        let sim = WeightedSample::unweighted(ef.sample_values(10_000, 0).unwrap());
        let exact = WeightedSample::unweighted(law.sample(10_000, 31).unwrap());
        let d = ks_two_sample(&sim, &exact).unwrap();
        assert!(d < 0.03, "{}: KS {d}", e.name);
    }
}

#[test]
fn sigma_tail_basics() {
    assert_eq!(csbp_sigma_tail(1.5, 0.0).unwrap().value, 1.0);
    let mut prev = 1.0;
    for k in 1..60 {
        let s = 0.1 * k as f64 * (1.0 + k as f64 / 10.0);
        let t = csbp_sigma_tail(1.5, s).unwrap().value;
        assert!(t < prev && t > 0.0, "s={s}: {t}");
        prev = t;
    }
    assert!(matches!(csbp_sigma_tail_series(1.5, 1e4), Err(pssmp::Error::SeriesDivergence(_))));
    assert_eq!(csbp_sigma_tail(1.5, 1e4).unwrap().method, SigmaTailMethod::Contour);
}

#[test]
fn sigma_tail_has_the_right_laplace_transform() {
    // ∫ e^{−λs} P(Σ > s) ds = (1 + λ^{−β})^{−1/β}/λ
    for alpha in [1.3, 1.5, 1.8] {
        let beta = alpha - 1.0;
        for lambda in [0.5, 1.0, 3.0] {
            let lhs = integrate_inf(|s: f64| (-lambda * s).exp() * csbp_sigma_tail(alpha, s).unwrap().value, 0.0, 1.0, 1e-10);
            let rhs = (1.0 + lambda.powf(-beta)).powf(-1.0 / beta) / lambda;
            assert!(rel(lhs, rhs) < 1e-7, "alpha={alpha} lambda={lambda}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn csbp_factorization_gives_pareto() {
    for s in [0.5, 1.0, 2.0] {
        let v = csbp_factorization_check(1.5, s).unwrap();
        assert!((v - (1.0 + s).powi(-2)).abs() < 1e-3, "s={s}: {v}");
    }
}
