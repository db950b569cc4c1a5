mod common;

use common::stream;
use rsvi::distributions::DirichletParams;
use rsvi::estimators::*;
use rsvi::mathcore::{mean_and_std_error, trigamma};
use rsvi::models::{ConjugateModel, Family, LatentBlock, ModelSpec};
use rsvi::par::Execution;

const N_UNBIASED: usize = 100_000;

fn five_category_model() -> ConjugateModel {
    ConjugateModel::with_uniform_prior(vec![7, 5, 4, 3, 1]).unwrap()
}

/// Per-coordinate z-scores of the mean total against `exact`.
fn z_scores(estimates: &[GradientEstimate], exact: &[f64]) -> Vec<f64> {
    (0..exact.len())
        .map(|j| {
            let col: Vec<f64> = estimates.iter().map(|e| e.total[j]).collect();
            let (m, se) = mean_and_std_error(&col);
            (m - exact[j]) / se
        })
        .collect()
}

fn assert_unbiased(model: &ConjugateModel, theta: &[f64], cfg: EstimatorConfig, seed: u64) {
    let exact = model.exact_elbo_grad(&DirichletParams::new(theta.to_vec()).unwrap()).unwrap();
    let est = replicate_estimates(model, theta, &cfg, N_UNBIASED, &stream(seed), Execution::Parallel).unwrap();
    let z = z_scores(&est, &exact);
    assert!(z.iter().all(|v| v.abs() <= 4.0), "{:?} B={}: z = {z:?}", cfg.kind, cfg.augmentation);
}

#[test]
fn rsvi_is_unbiased_on_conjugate_model() {
    let m = five_category_model();
    let theta = [1.5, 2.0, 1.2, 3.0, 1.1];
    assert_unbiased(&m, &theta, EstimatorConfig::new(EstimatorKind::Rsvi, 0, 1).unwrap(), 401);
    assert_unbiased(&m, &theta, EstimatorConfig::new(EstimatorKind::Rsvi, 2, 1).unwrap(), 402);
    // Shapes below one run through the augmented sampler.
    let small = [0.6, 0.9, 0.4, 2.0, 0.7];
    assert_unbiased(&m, &small, EstimatorConfig::new(EstimatorKind::Rsvi, 1, 1).unwrap(), 403);
}

#[test]
fn score_function_is_unbiased_on_conjugate_model() {
    let m = five_category_model();
    let cfg = EstimatorConfig::new(EstimatorKind::ScoreFunction, 0, 1).unwrap();
    assert_unbiased(&m, &[1.5, 2.0, 1.2, 3.0, 1.1], cfg, 404);
}

#[test]
fn importance_is_unbiased_on_conjugate_model() {
    let two = ConjugateModel::with_uniform_prior(vec![12, 8]).unwrap();
    let cfg = EstimatorConfig::new(EstimatorKind::Importance, 0, 1).unwrap();
    assert_unbiased(&two, &[2.5, 1.7], cfg, 405);
    assert_unbiased(&five_category_model(), &[1.5, 2.0, 1.2, 3.0, 1.1], cfg, 406);
}

/// `f(z) = c ln z - d z` for one gamma latent, whose ELBO gradient is known
/// in closed form under the (shape, mean) parameterization.
struct LogLinear {
    layout: Vec<LatentBlock>,
    c: f64,
    d: f64,
}

impl LogLinear {
    fn new(c: f64, d: f64) -> Self {
        Self {
            layout: vec![LatentBlock::new("z", Family::GammaMeanShape, 1)],
            c,
            d,
        }
    }

    fn expected_grad(&self, shape: f64, mean: f64) -> [f64; 2] {
        [self.c * (trigamma(shape).unwrap() - 1.0 / shape), self.c / mean - self.d]
    }
}

impl ModelSpec for LogLinear {
    fn layout(&self) -> &[LatentBlock] {
        &self.layout
    }
    fn log_joint(&self, z: &[f64]) -> rsvi::Result<f64> {
        Ok(self.c * z[0].ln() - self.d * z[0])
    }
    fn grad_latents(&self, z: &[f64]) -> rsvi::Result<Vec<f64>> {
        Ok(vec![self.c / z[0] - self.d])
    }
}

#[test]
fn gamma_mean_shape_paths_are_unbiased() {
    let model = LogLinear::new(-0.9, 0.3);
    let cases = [
        (EstimatorKind::Rsvi, 0, 2.0, 1.5),
        (EstimatorKind::Rsvi, 3, 0.5, 0.8),
        (EstimatorKind::Rsvi, 3, 2.0, 1.5),
        (EstimatorKind::ScoreFunction, 0, 2.0, 1.5),
        (EstimatorKind::Importance, 2, 0.2, 3.0),
    ];
    for (i, (kind, b, shape, mean)) in cases.into_iter().enumerate() {
        let theta = [shape, mean];
        let cfg = EstimatorConfig::new(kind, b, 1).unwrap();
        let family = VariationalFamily::new(model.layout(), &theta, b).unwrap();
        let h = family.entropy_grad();
        let g = model.expected_grad(shape, mean);
        let exact = [g[0] + h[0], g[1] + h[1]];
        let est = replicate_estimates(&model, &theta, &cfg, N_UNBIASED, &stream(410 + i as u64), Execution::Parallel)
            .unwrap();
        let z = z_scores(&est, &exact);
        assert!(z.iter().all(|v| v.abs() <= 4.0), "{kind:?} B={b} at {theta:?}: z = {z:?}");
    }
    // Sanity on the oracle itself: the mean gradient vanishes at c = d·mean.
    assert_eq!(LogLinear::new(0.6, 0.3).expected_grad(2.0, 2.0)[1], 0.0);
}

/// Constant log joint over a Dirichlet block and a gamma block.
struct Flat {
    layout: Vec<LatentBlock>,
    value: f64,
}

impl Flat {
    fn new(value: f64) -> Self {
        Self {
            layout: vec![
                LatentBlock::new("p", Family::Dirichlet, 3),
                LatentBlock::new("w", Family::GammaMeanShape, 2),
            ],
            value,
        }
    }
}

impl ModelSpec for Flat {
    fn layout(&self) -> &[LatentBlock] {
        &self.layout
    }
    fn log_joint(&self, _: &[f64]) -> rsvi::Result<f64> {
        Ok(self.value)
    }
    fn grad_latents(&self, z: &[f64]) -> rsvi::Result<Vec<f64>> {
        Ok(vec![0.0; z.len()])
    }
}

const FLAT_THETA: [f64; 7] = [1.3, 0.7, 2.2, 0.9, 1.4, 3.0, 0.5];

#[test]
fn zero_log_joint_leaves_only_entropy() {
    let model = Flat::new(0.0);
    for kind in [EstimatorKind::Rsvi, EstimatorKind::ScoreFunction, EstimatorKind::Importance] {
        for b in [0, 2] {
            let cfg = EstimatorConfig::new(kind, b, 3).unwrap();
            let mut s = stream(420);
            for _ in 0..50 {
                let e = estimate_gradient(&model, &FLAT_THETA, &cfg, &mut s).unwrap();
                assert_eq!(e.total, e.g_entropy, "{kind:?}");
            }
        }
    }
}

#[test]
fn decomposition_identity_holds_exactly() {
    let m = five_category_model();
    let mut s = stream(421);
    for kind in [EstimatorKind::Rsvi, EstimatorKind::ScoreFunction, EstimatorKind::Importance] {
        let cfg = EstimatorConfig::new(kind, 1, 2).unwrap();
        for _ in 0..200 {
            let e = estimate_gradient(&m, &[0.8, 1.0, 1.7, 2.5, 4.0], &cfg, &mut s).unwrap();
            for j in 0..5 {
                assert_eq!(e.total[j], e.g_rep[j] + e.g_cor[j] + e.g_entropy[j]);
            }
            if kind == EstimatorKind::ScoreFunction {
                assert!(e.g_rep.iter().all(|v| *v == 0.0));
            }
        }
    }
}

#[test]
fn constant_model_has_zero_variance() {
    // Only the zero constant: f·∇ln(q/r) and f·∇ln q have mean zero but are
    // not zero draw by draw, so any other constant leaves variance behind.
    let model = Flat::new(0.0);
    for kind in [EstimatorKind::Rsvi, EstimatorKind::ScoreFunction, EstimatorKind::Importance] {
        let cfg = EstimatorConfig::new(kind, 1, 1).unwrap();
        let p = variance_profile(&model, &FLAT_THETA, &cfg, 200, &stream(422), Execution::Parallel).unwrap();
        assert!(p.variances.iter().all(|v| *v == 0.0), "{kind:?}: {:?}", p.variances);
    }
    let shifted = Flat::new(-4.2);
    let cfg = EstimatorConfig::new(EstimatorKind::ScoreFunction, 0, 1).unwrap();
    let p = variance_profile(&shifted, &FLAT_THETA, &cfg, 200, &stream(422), Execution::Parallel).unwrap();
    assert!(p.max > 0.0);
}

#[test]
fn profiles_are_reproducible_across_execution_modes() {
    let m = five_category_model();
    let theta = [1.1; 5];
    let cfg = EstimatorConfig::new(EstimatorKind::Rsvi, 1, 1).unwrap();
    let a = variance_profile(&m, &theta, &cfg, 300, &stream(423), Execution::Parallel).unwrap();
    let b = variance_profile(&m, &theta, &cfg, 300, &stream(423), Execution::Parallel).unwrap();
    let c = variance_profile(&m, &theta, &cfg, 300, &stream(423), Execution::Sequential).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert_eq!(a.label, "rsvi(B=1)");
    assert!(a.min <= a.median && a.median <= a.max && a.min >= 0.0);
    assert!(variance_profile(&m, &theta, &cfg, 1, &stream(423), Execution::Parallel).is_err());
    assert!(variance_profile(&m, &theta, &cfg, 2, &stream(423), Execution::Parallel).is_ok());
}

fn median_variance(model: &ConjugateModel, theta: &[f64], kind: EstimatorKind, b: usize, draws: usize, seed: u64) -> f64 {
    let cfg = EstimatorConfig::new(kind, b, draws).unwrap();
    variance_profile(model, theta, &cfg, 1000, &stream(seed), Execution::Parallel)
        .unwrap()
        .median
}

#[test]
fn augmentation_and_score_function_variance_ordering() {
    let m = five_category_model();
    let theta = [1.05, 1.1, 1.0, 1.2, 1.02];
    let b0 = median_variance(&m, &theta, EstimatorKind::Rsvi, 0, 1, 430);
    let b1 = median_variance(&m, &theta, EstimatorKind::Rsvi, 1, 1, 431);
    let b10 = median_variance(&m, &theta, EstimatorKind::Rsvi, 10, 1, 432);
    let sf = median_variance(&m, &theta, EstimatorKind::ScoreFunction, 0, 1, 433);
    assert!(b10 < b0, "B=10 {b10} vs B=0 {b0}");
    assert!(b1 < sf, "B=1 {b1} vs score {sf}");
    assert!(b0 <= sf, "B=0 {b0} vs score {sf}");
}

#[test]
fn importance_weights_respect_the_envelope() {
    let m = five_category_model();
    let cfg = EstimatorConfig::new(EstimatorKind::Importance, 0, 4).unwrap();
    let mut s = stream(440);
    for theta in [[1.0; 5], [1.5, 2.0, 1.2, 3.0, 1.1], [20.0, 50.0, 1.0, 7.0, 300.0]] {
        for _ in 0..2000 {
            let e = estimate_gradient(&m, &theta, &cfg, &mut s).unwrap();
            let worst = e.meta.max_log_weight_over_envelope.unwrap();
            assert!(worst <= 1e-9, "{worst}");
        }
    }
}

#[test]
fn importance_variance_grows_with_dimension() {
    let counts: Vec<u64> = (0..100).map(|i| (i % 5) as u64).collect();
    let m = ConjugateModel::with_uniform_prior(counts).unwrap();
    let theta = vec![1.5; 100];
    let is = median_variance(&m, &theta, EstimatorKind::Importance, 0, 1, 441);
    let rs = median_variance(&m, &theta, EstimatorKind::Rsvi, 0, 1, 442);
    assert!(is >= rs, "importance {is} vs rsvi {rs}");
}

#[test]
fn averaging_draws_divides_variance() {
    let m = five_category_model();
    let theta = [1.5, 2.0, 1.2, 3.0, 1.1];
    let one = median_variance(&m, &theta, EstimatorKind::Rsvi, 1, 1, 450);
    let ten = median_variance(&m, &theta, EstimatorKind::Rsvi, 1, 10, 451);
    let ratio = one / ten;
    assert!((10.0 / 1.2..=10.0 * 1.2).contains(&ratio), "ratio {ratio}");
}

#[test]
fn correction_term_shrinks_with_shape() {
    let m = five_category_model();
    let cfg = EstimatorConfig::new(EstimatorKind::Rsvi, 0, 1).unwrap();
    let mut prev = f64::INFINITY;
    for shape in [1.0, 2.0, 10.0, 100.0] {
        let est = replicate_estimates(&m, &[shape; 5], &cfg, 20_000, &stream(460), Execution::Parallel).unwrap();
        let mean_abs =
            est.iter().flat_map(|e| e.g_cor.iter()).map(|v| v.abs()).sum::<f64>() / (5 * est.len()) as f64;
        assert!(mean_abs < prev, "shape {shape}: {mean_abs} vs {prev}");
        prev = mean_abs;
    }
}

#[test]
fn config_validation_and_labels() {
    assert!(EstimatorConfig::new(EstimatorKind::Rsvi, 0, 0).is_err());
    assert_eq!("score".parse::<EstimatorKind>().unwrap(), EstimatorKind::ScoreFunction);
    assert!("reinforce".parse::<EstimatorKind>().is_err());
    let m = five_category_model();
    let cfg = EstimatorConfig::new(EstimatorKind::ScoreFunction, 0, 1).unwrap();
    let p = variance_profile(&m, &[1.0; 5], &cfg, 5, &stream(470), Execution::Sequential).unwrap();
    assert_eq!(p.label, "score_function");
    assert!(estimate_gradient(&m, &[1.0; 4], &cfg, &mut stream(470)).is_err());
    assert!(estimate_gradient(&m, &[1.0, -1.0, 1.0, 1.0, 1.0], &cfg, &mut stream(470)).is_err());
}
