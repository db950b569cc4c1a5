mod common;

use common::{integrate, stream, within_se};
use rsvi::distributions::{DirichletParams, GammaParams};
use rsvi::mathcore::{
    digamma, finite_diff_grad, ks_critical_value, ks_statistic, regularized_gamma_p, relative_error,
    std_normal_cdf,
};
use rsvi::rejection::*;
use statrs::distribution::{ContinuousCDF, Gamma as StatrsGamma};

fn gamma_cdf(p: GammaParams) -> impl Fn(f64) -> f64 {
    move |z| if z <= 0.0 { 0.0 } else { regularized_gamma_p(p.shape(), p.rate() * z).unwrap() }
}

#[test]
fn incomplete_gamma_agrees_with_statrs() {
    for &a in &[0.1, 0.5, 1.0, 2.0, 7.5, 40.0] {
        let reference = StatrsGamma::new(a, 1.0).unwrap();
        for &x in &[0.01, 0.3, 1.0, 2.5, 6.0, 20.0, 60.0] {
            let ours = regularized_gamma_p(a, x).unwrap();
            assert!((ours - reference.cdf(x)).abs() < 1e-12, "a={a} x={x}");
        }
    }
}

#[test]
fn transform_values_and_support() {
    assert!((h_gam(0.0, 2.0).unwrap() - 5.0 / 3.0).abs() < 1e-15);
    // (5/3)(1 + 1/√15)³
    assert!((h_gam(1.0, 2.0).unwrap() - 3.319_683_214_263_268).abs() < 1e-14);
    assert!(h_gam(-(6f64.sqrt()), 1.0).is_err());
    assert!((dh_deps(0.0, 2.0).unwrap() - 1.290_994_448_735_805_6).abs() < 1e-15);
    for a in [1.0, 3.0, 50.0] {
        assert_eq!(dh_dalpha(0.0, a).unwrap(), 1.0);
    }
}

#[test]
fn dh_dalpha_cross_check_at_point_three() {
    let fd = finite_diff_grad(|x| h_gam(0.3, x[0]).unwrap(), &[2.0], 1e-6).unwrap()[0];
    assert!(relative_error(dh_dalpha(0.3, 2.0).unwrap(), fd, 1e-12) <= 1e-5);
}

#[test]
fn transform_derivatives_match_finite_differences() {
    let mut s = stream(201);
    for _ in 0..50 {
        let a = 1.0 + 20.0 * s.draw_uniform();
        let root = (9.0 * a - 3.0).sqrt();
        let e = -0.8 * root + (0.8 * root + 4.0) * s.draw_uniform();
        let fd = finite_diff_grad(|x| h_gam(x[0], x[1]).unwrap(), &[e, a], 1e-6).unwrap();
        assert!(relative_error(dh_deps(e, a).unwrap(), fd[0], 1e-8) <= 1e-6, "e={e} a={a}");
        assert!(relative_error(dh_dalpha(e, a).unwrap(), fd[1], 1e-8) <= 1e-6, "e={e} a={a}");
    }
}

#[test]
fn grad_log_ratio_matches_finite_differences() {
    let mut s = stream(202);
    for _ in 0..50 {
        let a = 1.001 + 20.0 * s.draw_uniform();
        let e = -3.0 + 6.0 * s.draw_uniform();
        if h_gam(e, a - 1e-3).is_err() {
            continue;
        }
        // A wider step keeps roundoff in the log ratio below the tolerance when
        // the gradient itself is small.
        let fd = finite_diff_grad(|x| log_ratio_q_over_r(e, x[0]).unwrap(), &[a], 1e-4).unwrap()[0];
        let g = grad_log_ratio_gamma(e, a).unwrap();
        assert!(relative_error(g, fd, 1e-6) <= 1e-5, "e={e} a={a}: {g} vs {fd}");
    }
}

#[test]
fn log_ratio_defines_a_density() {
    let s = |e: f64| (-0.5 * e * e).exp() / (2.0 * std::f64::consts::PI).sqrt();
    for &a in &[1.0, 2.0, 10.0] {
        let lo = -(9.0f64 * a - 3.0).sqrt();
        let mass = integrate(
            |e| match log_ratio_q_over_r(e, a) {
                Ok(l) => l.exp() * s(e),
                Err(_) => 0.0,
            },
            lo,
            40.0,
            1e-12,
        );
        assert!((mass - 1.0).abs() < 1e-6, "a={a}: {mass}");
        // Same through the public density.
        let mass = integrate(|e| accepted_eps_log_density(e, a).map(f64::exp).unwrap_or(0.0), lo, 40.0, 1e-12);
        assert!((mass - 1.0).abs() < 1e-6);
        assert!(log_ratio_q_over_r(0.0, a).unwrap().is_finite());
    }
}

#[test]
fn correction_gradient_shrinks_with_shape() {
    let peak = |a: f64| {
        (0..=600)
            .map(|i| -3.0 + i as f64 * 0.01)
            .filter_map(|e| grad_log_ratio_gamma(e, a).ok())
            .fold(0.0f64, |m, g| m.max(g.abs()))
    };
    assert!(peak(10.0) < peak(1.0));
    let at_zero: Vec<f64> = [1.0, 2.0, 10.0, 100.0].iter().map(|&a| grad_log_ratio_gamma(0.0, a).unwrap().abs()).collect();
    assert!(at_zero.windows(2).all(|w| w[1] < w[0]), "{at_zero:?}");
    assert!(grad_log_ratio_gamma(0.0, 1e6).unwrap().abs() < 1e-4);
}

#[test]
fn envelope_acceptance_probabilities() {
    let p = |a: f64| (-envelope_log_m(a).unwrap()).exp();
    assert!((p(2.0) - 0.98).abs() < 0.005);
    assert!(p(1.0) >= 0.95);
    assert!(p(1e4) >= 0.999);
    let grid: Vec<f64> = [1.0, 2.0, 5.0, 10.0, 100.0].iter().map(|&a| p(a)).collect();
    assert!(grid.windows(2).all(|w| w[1] >= w[0]), "{grid:?}");
}

#[test]
fn log_ratio_never_exceeds_envelope() {
    for &a in &[1.0, 1.3, 2.0, 10.0, 250.0] {
        let log_m = envelope_log_m(a).unwrap();
        for i in 0..1000 {
            let e = -6.0 + 12.0 * i as f64 / 999.0;
            if let Ok(l) = log_ratio_q_over_r(e, a) {
                assert!(l <= log_m + 1e-9, "a={a} e={e}");
            }
        }
    }
}

#[test]
fn empirical_acceptance_rates() {
    let mut s = stream(203);
    for (a, check) in [
        (2.0, Box::new(|r: f64| (r - 0.98).abs() <= 0.005) as Box<dyn Fn(f64) -> bool>),
        (1e4, Box::new(|r: f64| r >= 0.999)),
    ] {
        let sampler = make_gamma_sampler(GammaParams::new(a, 1.0).unwrap(), 0).unwrap();
        let trials = if a > 100.0 { 1_000_000 } else { 100_000 };
        let accepted = (0..trials)
            .filter(|_| {
                let e = s.draw_std_normal();
                s.draw_open_uniform().ln() < sampler.log_acceptance(e)
            })
            .count();
        let rate = accepted as f64 / trials as f64;
        assert!(check(rate), "a={a}: {rate}");
    }
}

fn ks_passes(p: GammaParams, b: usize, seed: u64) -> (bool, f64) {
    let sampler = make_gamma_sampler(p, b).unwrap();
    let mut s = stream(seed);
    let mut zs: Vec<f64> = (0..100_000).map(|_| sampler.sample(&mut s).unwrap().z).collect();
    let d = ks_statistic(&mut zs, gamma_cdf(p));
    (d < ks_critical_value(zs.len(), 0.01), d)
}

#[test]
fn draws_follow_target_gamma() {
    let cases = [(2.0, 1.0, 0), (0.5, 2.0, 1), (0.5, 2.0, 0), (0.1, 1.0, 3)];
    for (i, &(a, b, aug)) in cases.iter().enumerate() {
        let (ok, d) = ks_passes(GammaParams::new(a, b).unwrap(), aug, 210 + i as u64);
        assert!(ok, "a={a} b={b} B={aug}: D={d}");
    }
}

#[test]
fn sampler_configuration() {
    let s = make_gamma_sampler(GammaParams::new(0.1, 1.0).unwrap(), 0).unwrap();
    assert_eq!(s.augmentation(), 1);
    assert!((s.effective_shape() - 1.1).abs() < 1e-15);
    let s = make_gamma_sampler(GammaParams::new(2.0, 1.0).unwrap(), 4).unwrap();
    assert_eq!(s.effective_shape(), 6.0);
}

#[test]
fn proposition_one_moments() {
    for &a in &[1.0, 2.0, 10.0] {
        for &b in &[0usize, 4] {
            let p = GammaParams::new(a, 1.0).unwrap();
            let sampler = make_gamma_sampler(p, b).unwrap();
            let mut s = stream(220 + b as u64);
            let zs: Vec<f64> = (0..100_000).map(|_| sampler.sample(&mut s).unwrap().z).collect();
            let logs: Vec<f64> = zs.iter().map(|z| z.ln()).collect();
            let (ok, z) = within_se(&zs, a, 4.0);
            assert!(ok, "mean a={a} B={b}: {z}");
            let (ok, z) = within_se(&logs, digamma(a).unwrap(), 4.0);
            assert!(ok, "mean log a={a} B={b}: {z}");
        }
    }
}

#[test]
fn accepted_eps_approach_normal() {
    let ks = |a: f64| {
        let sampler = make_gamma_sampler(GammaParams::new(a, 1.0).unwrap(), 0).unwrap();
        let mut s = stream(230);
        let mut es: Vec<f64> = (0..100_000).map(|_| sampler.sample_eps(&mut s).unwrap().0).collect();
        ks_statistic(&mut es, std_normal_cdf)
    };
    assert!(ks(1e4) < ks(1.0));
}

#[test]
fn draws_are_recomputable() {
    let sampler = make_gamma_sampler(GammaParams::new(0.7, 3.0).unwrap(), 2).unwrap();
    let mut s = stream(240);
    for _ in 0..10_000 {
        let d = sampler.sample(&mut s).unwrap();
        assert!(d.trials >= 1);
        assert!(d.aug_uniforms.iter().all(|u| *u > 0.0 && *u < 1.0));
        assert_eq!(sampler.compose_z(d.epsilon, &d.aug_uniforms).unwrap().to_bits(), d.z.to_bits());
    }
}

#[test]
fn dirichlet_sampling() {
    let n = 100_000;
    for (conc, means) in [
        (vec![2.0, 3.0, 5.0], vec![0.2, 0.3, 0.5]),
        (vec![1.5; 4], vec![0.25; 4]),
        (vec![0.4; 3], vec![1.0 / 3.0; 3]),
    ] {
        let p = DirichletParams::new(conc).unwrap();
        let mut s = stream(250);
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let (draws, z) = sample_dirichlet_eps(&p, 0, &mut s).unwrap();
                assert_eq!(draws.len(), z.len());
                assert!((z.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
                z
            })
            .collect();
        for (k, m) in means.iter().enumerate() {
            let col: Vec<f64> = pts.iter().map(|z| z[k]).collect();
            let (ok, zs) = within_se(&col, *m, 4.0);
            assert!(ok, "coordinate {k}: {zs}");
        }
    }
}

#[test]
fn extras() {
    let t = ExtraFamily::TruncatedNormalTail { a: 2.0 };
    assert_eq!(extras_transform(t, 1.0).unwrap(), 2.0);
    assert!((extras_transform(t, (-2f64).exp()).unwrap() - 8f64.sqrt()).abs() < 1e-15);
    assert!(extras_transform(ExtraFamily::TruncatedNormalTail { a: -1.0 }, 0.5).is_err());
    let mut s = stream(260);
    for _ in 0..1000 {
        let kappa = (6.0 * s.draw_uniform() - 3.0).exp();
        let e = 2.0 * s.draw_uniform() - 1.0;
        let x = extras_transform(ExtraFamily::VonMises { kappa }, e).unwrap();
        assert!((-std::f64::consts::PI..=std::f64::consts::PI).contains(&x));
    }
    assert!(extras_transform(ExtraFamily::VonMises { kappa: 0.0 }, 0.5).is_err());
}

#[test]
fn stall_reports_diagnostics() {
    let sampler = make_gamma_sampler(GammaParams::new(1.0, 1.0).unwrap(), 0).unwrap().with_trial_budget(1);
    let mut s = stream(270);
    let err = (0..10_000).find_map(|_| sampler.sample(&mut s).err()).expect("a one-trial budget stalls eventually");
    assert!(matches!(err, rsvi::Error::SamplerStall { trials: 1, .. }));
}
