use pssmp::gallery::{brownian_drift, drift_exp_jump, killed_stable_sub};
use pssmp::mc::RejectionBudget;
use pssmp::mda::{residual_mda_fit, ResidualSource};
use pssmp::path::SimConfig;
use pssmp::stats::{hill_estimator, MdaFamily};

#[test]
fn killed_drift_residuals_are_weibull_with_index_one() {
    let e = drift_exp_jump(1.0, 1.0, 0.0, 1.0, Some(1.0)).unwrap();
    let r = residual_mda_fit(&e.spec, &[0.9], 5000, &SimConfig::with_seed(3), RejectionBudget::default()).unwrap();
    let p = &r.points[0];
    assert_eq!(p.fit.winner, MdaFamily::Weibull);
    assert!((0.8..=1.2).contains(&p.gamma_hat()), "{}", p.gamma_hat());
    assert_eq!(r.agrees(), Some(true));
}

#[test]
fn dufresne_residuals_are_pareto_with_index_two() {
    let e = brownian_drift(1.0, 1.0, 1.0).unwrap();
    let r = residual_mda_fit(&e.spec, &[20.0], 3000, &SimConfig::with_seed(4), RejectionBudget::default()).unwrap();
    let p = &r.points[0];
    assert_eq!(p.fit.winner, MdaFamily::Frechet);
    assert!((1.6..=2.4).contains(&p.gamma_hat()), "{}", p.gamma_hat());
}

#[test]
fn killed_stable_residuals_are_exponential() {
    let e = killed_stable_sub(0.5).unwrap();
    let r = residual_mda_fit(&e.spec, &[10.0], 5000, &SimConfig::with_seed(5), RejectionBudget::default()).unwrap();
    let p = &r.points[0];
    assert!(matches!(p.source, ResidualSource::Density));
    assert_eq!(p.fit.winner, MdaFamily::Gumbel, "{:?}", p.fit);
    // Half-normal: ∫_10^∞ erfc(x/2)dx / erfc(5) = 0.192700...
    assert!((p.scale / 0.1927000548636815 - 1.0).abs() < 0.03, "{}", p.scale);
}

#[test]
fn hill_on_dufresne_samples() {
    let e = brownian_drift(1.0, 1.0, 1.0).unwrap();
    let v = e.i_law.unwrap().sample(100_000, 8).unwrap();
    let h = hill_estimator(&v, 0.01).unwrap();
    assert!((1.6..=2.4).contains(&h.gamma), "{}", h.gamma);
}
