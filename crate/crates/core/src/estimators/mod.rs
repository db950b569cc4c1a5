//! Monte Carlo estimators of the ELBO gradient.
//!
//! Every estimate splits into a reparameterization part, a correction part
//! and the analytic entropy gradient, with `total = g_rep + g_cor + g_entropy`
//! evaluated elementwise in that order. Gradients are with respect to the
//! natural variational parameters (shape and mean for gammas, concentrations
//! for Dirichlets).

mod family;
mod variance;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mathcore::RandomStream;
use crate::models::{simplex_pullback, ModelSpec};

use family::{floor_latent, Factor};
pub use family::VariationalFamily;
pub use variance::{replicate_estimates, summarize_variances, variance_profile, VarianceProfile};

pub use crate::rejection::grad_log_ratio_gamma;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Rsvi,
    ScoreFunction,
    Importance,
}

impl EstimatorKind {
    pub fn label(self) -> &'static str {
        match self {
            EstimatorKind::Rsvi => "rsvi",
            EstimatorKind::ScoreFunction => "score_function",
            EstimatorKind::Importance => "importance",
        }
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rsvi" => Ok(EstimatorKind::Rsvi),
            "score_function" | "score" => Ok(EstimatorKind::ScoreFunction),
            "importance" => Ok(EstimatorKind::Importance),
            _ => Err(Error::Contract(format!("unknown estimator kind {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub kind: EstimatorKind,
    /// Shape-augmentation steps `B`.
    pub augmentation: usize,
    /// Draws averaged per estimate, `S ≥ 1`.
    pub draws: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            kind: EstimatorKind::Rsvi,
            augmentation: 0,
            draws: 1,
        }
    }
}

impl EstimatorConfig {
    pub fn new(kind: EstimatorKind, augmentation: usize, draws: usize) -> Result<Self> {
        let cfg = Self {
            kind,
            augmentation,
            draws,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.draws == 0 {
            return Err(Error::Contract("draws per estimate must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EstimateMeta {
    pub draws: usize,
    /// Proposals made by the rejection samplers, summed over latents.
    pub trials: u64,
    /// Proposals used: accepted ones for the rejection-based estimators,
    /// those inside the support for the importance estimator.
    pub accepted: u64,
    /// Largest `ln(q/r) - ln M` seen by the importance estimator; the
    /// envelope guarantees it is at most 0 up to roundoff.
    pub max_log_weight_over_envelope: Option<f64>,
}

impl EstimateMeta {
    pub fn acceptance_rate(&self) -> Option<f64> {
        (self.trials > 0).then(|| self.accepted as f64 / self.trials as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientEstimate {
    pub g_rep: Vec<f64>,
    pub g_cor: Vec<f64>,
    pub g_entropy: Vec<f64>,
    pub total: Vec<f64>,
    pub meta: EstimateMeta,
}

impl GradientEstimate {
    fn assemble(mut g_rep: Vec<f64>, mut g_cor: Vec<f64>, g_entropy: Vec<f64>, meta: EstimateMeta) -> Result<Self> {
        let s = meta.draws as f64;
        g_rep.iter_mut().for_each(|v| *v /= s);
        g_cor.iter_mut().for_each(|v| *v /= s);
        let total: Vec<f64> = g_rep
            .iter()
            .zip(&g_cor)
            .zip(&g_entropy)
            .map(|((r, c), e)| r + c + e)
            .collect();
        if let Some(i) = total.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "gradient estimate",
                coordinate: Some(i),
                value: total[i],
            });
        }
        Ok(Self {
            g_rep,
            g_cor,
            g_entropy,
            total,
            meta,
        })
    }
}

/// Estimate `∇_θ L(θ)` with the configured estimator.
pub fn estimate_gradient<M: ModelSpec + ?Sized>(
    model: &M,
    theta: &[f64],
    cfg: &EstimatorConfig,
    stream: &mut RandomStream,
) -> Result<GradientEstimate> {
    cfg.validate()?;
    let family = VariationalFamily::new(model.layout(), theta, cfg.augmentation)?;
    estimate_with_family(model, &family, cfg, stream)
}

/// [`estimate_gradient`] against an already prepared family.
pub fn estimate_with_family<M: ModelSpec + ?Sized>(
    model: &M,
    family: &VariationalFamily,
    cfg: &EstimatorConfig,
    stream: &mut RandomStream,
) -> Result<GradientEstimate> {
    cfg.validate()?;
    match cfg.kind {
        EstimatorKind::Rsvi => estimate_gradient_rsvi(model, family, cfg.draws, stream),
        EstimatorKind::ScoreFunction => estimate_gradient_score(model, family, cfg.draws, stream),
        EstimatorKind::Importance => estimate_gradient_importance(model, family, cfg.draws, stream),
    }
}

fn checked_log_joint<M: ModelSpec + ?Sized>(model: &M, z: &[f64], want_grad: bool) -> Result<(f64, Vec<f64>)> {
    let (f, g) = if want_grad {
        model.log_joint_and_grad(z)?
    } else {
        (model.log_joint(z)?, Vec::new())
    };
    if !f.is_finite() {
        return Err(Error::NonFinite {
            what: "log joint",
            coordinate: None,
            value: f,
        });
    }
    if let Some(i) = g.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "log joint gradient",
            coordinate: Some(i),
            value: g[i],
        });
    }
    Ok((f, g))
}

/// Per-latent quantities of one accepted (or proposed) draw.
struct Pathwise {
    /// Latents as the model sees them.
    z: Vec<f64>,
    /// `∂z/∂θ` along each factor's own parameters; indexed like `θ` for
    /// gammas, and by concentration (through `z̃`) for Dirichlets.
    dz: Vec<f64>,
    /// `∂/∂θ ln(q/r)` per shape-like parameter, indexed like `θ`.
    glr: Vec<f64>,
    /// Unnormalized totals of the Dirichlet blocks, in slot order.
    totals: Vec<f64>,
}

impl Pathwise {
    fn new(family: &VariationalFamily) -> Self {
        Self {
            z: vec![0.0; family.latent_len()],
            dz: vec![0.0; family.param_len()],
            glr: vec![0.0; family.param_len()],
            totals: Vec::new(),
        }
    }

    /// Fill in from per-gamma `(ε, uniforms)`; `None` when some `ε` lies
    /// outside its transform's support.
    fn fill(&mut self, family: &VariationalFamily, eps: &[f64], uniforms: &[Vec<f64>]) -> Result<bool> {
        self.totals.clear();
        let mut j = 0;
        for s in family.slots() {
            match &s.factor {
                Factor::Gamma { params, sampler } => {
                    let (e, u) = (eps[j], &uniforms[j]);
                    j += 1;
                    if sampler.log_ratio(e) == f64::NEG_INFINITY {
                        return Ok(false);
                    }
                    let (a, m) = (params.shape(), params.mean());
                    let z_unit = sampler.unit_z(e, u)?;
                    let z = z_unit * m / a;
                    self.z[s.latent_offset] = floor_latent(z);
                    self.dz[s.param_offset] = m / a * sampler.unit_z_dshape(e, u)? - z / a;
                    self.dz[s.param_offset + 1] = z / m;
                    self.glr[s.param_offset] = sampler.grad_log_ratio(e)?;
                }
                Factor::Dirichlet { samplers, .. } => {
                    let k = samplers.len();
                    for (c, sampler) in samplers.iter().enumerate() {
                        let (e, u) = (eps[j], &uniforms[j]);
                        j += 1;
                        if sampler.log_ratio(e) == f64::NEG_INFINITY {
                            return Ok(false);
                        }
                        self.z[s.latent_offset + c] = floor_latent(sampler.unit_z(e, u)?);
                        self.dz[s.param_offset + c] = sampler.unit_z_dshape(e, u)?;
                        self.glr[s.param_offset + c] = sampler.grad_log_ratio(e)?;
                    }
                    let block = &mut self.z[s.latent_offset..s.latent_offset + k];
                    let total: f64 = block.iter().sum();
                    block.iter_mut().for_each(|v| *v /= total);
                    self.totals.push(total);
                }
            }
        }
        Ok(true)
    }

    /// Add `weight · ∇_θ f(z(θ))` to `g_rep` and `weight · f · glr` to `g_cor`.
    fn accumulate(
        &self,
        family: &VariationalFamily,
        f: f64,
        gz: &[f64],
        weight: f64,
        g_rep: &mut [f64],
        g_cor: &mut [f64],
    ) {
        let mut d = 0;
        for s in family.slots() {
            match &s.factor {
                Factor::Gamma { .. } => {
                    let (p, l) = (s.param_offset, s.latent_offset);
                    g_rep[p] += weight * gz[l] * self.dz[p];
                    g_rep[p + 1] += weight * gz[l] * self.dz[p + 1];
                    g_cor[p] += weight * f * self.glr[p];
                }
                Factor::Dirichlet { samplers, .. } => {
                    let k = samplers.len();
                    let (p, l) = (s.param_offset, s.latent_offset);
                    let pulled = simplex_pullback(&self.z[l..l + k], &gz[l..l + k], self.totals[d]);
                    d += 1;
                    for c in 0..k {
                        g_rep[p + c] += weight * pulled[c] * self.dz[p + c];
                        g_cor[p + c] += weight * f * self.glr[p + c];
                    }
                }
            }
        }
    }
}

fn gamma_count(family: &VariationalFamily) -> usize {
    family
        .slots()
        .iter()
        .map(|s| match &s.factor {
            Factor::Gamma { .. } => 1,
            Factor::Dirichlet { samplers, .. } => samplers.len(),
        })
        .sum()
}

fn samplers(family: &VariationalFamily) -> impl Iterator<Item = &crate::rejection::GammaSampler> {
    family.slots().iter().flat_map(|s| match &s.factor {
        Factor::Gamma { sampler, .. } => std::slice::from_ref(sampler),
        Factor::Dirichlet { samplers, .. } => samplers.as_slice(),
    })
}

/// RSVI: accepted `ε` from the rejection sampler, pathwise term plus the
/// log-ratio correction, both from the same draw.
pub fn estimate_gradient_rsvi<M: ModelSpec + ?Sized>(
    model: &M,
    family: &VariationalFamily,
    draws: usize,
    stream: &mut RandomStream,
) -> Result<GradientEstimate> {
    let n = family.param_len();
    let (mut g_rep, mut g_cor) = (vec![0.0; n], vec![0.0; n]);
    let mut meta = EstimateMeta {
        draws,
        ..Default::default()
    };
    let mut path = Pathwise::new(family);
    let count = gamma_count(family);
    let mut eps = Vec::with_capacity(count);
    let mut uniforms = Vec::with_capacity(count);
    for _ in 0..draws {
        eps.clear();
        uniforms.clear();
        for sampler in samplers(family) {
            let d = sampler.sample(stream)?;
            meta.trials += d.trials;
            meta.accepted += 1;
            eps.push(d.epsilon);
            uniforms.push(d.aug_uniforms);
        }
        let inside = path.fill(family, &eps, &uniforms)?;
        debug_assert!(inside, "accepted proposals lie in the support");
        let (f, gz) = checked_log_joint(model, &path.z, true)?;
        path.accumulate(family, f, &gz, 1.0, &mut g_rep, &mut g_cor);
    }
    GradientEstimate::assemble(g_rep, g_cor, family.entropy_grad(), meta)
}

/// Score-function baseline `f(z) ∇_θ ln q(z; θ)`, stored in `g_cor`.
pub fn estimate_gradient_score<M: ModelSpec + ?Sized>(
    model: &M,
    family: &VariationalFamily,
    draws: usize,
    stream: &mut RandomStream,
) -> Result<GradientEstimate> {
    let n = family.param_len();
    let mut g_cor = vec![0.0; n];
    let mut meta = EstimateMeta {
        draws,
        ..Default::default()
    };
    let count = gamma_count(family) as u64;
    for _ in 0..draws {
        let (z, trials) = family.sample(stream)?;
        meta.trials += trials;
        meta.accepted += count;
        let (f, _) = checked_log_joint(model, &z, false)?;
        for (g, s) in g_cor.iter_mut().zip(family.score(&z)?) {
            *g += f * s;
        }
    }
    GradientEstimate::assemble(vec![0.0; n], g_cor, family.entropy_grad(), meta)
}

/// Importance-weighted variant: `ε ~ N(0, 1)` with no accept/reject step,
/// both terms weighted by `∏ q/r`. Proposals outside a transform's support
/// have weight 0.
pub fn estimate_gradient_importance<M: ModelSpec + ?Sized>(
    model: &M,
    family: &VariationalFamily,
    draws: usize,
    stream: &mut RandomStream,
) -> Result<GradientEstimate> {
    let n = family.param_len();
    let (mut g_rep, mut g_cor) = (vec![0.0; n], vec![0.0; n]);
    let mut meta = EstimateMeta {
        draws,
        max_log_weight_over_envelope: Some(f64::NEG_INFINITY),
        ..Default::default()
    };
    let mut path = Pathwise::new(family);
    let count = gamma_count(family);
    let mut eps = Vec::with_capacity(count);
    let mut uniforms = Vec::with_capacity(count);
    for _ in 0..draws {
        eps.clear();
        uniforms.clear();
        let mut log_w = 0.0;
        let mut margin = f64::NEG_INFINITY;
        for sampler in samplers(family) {
            let e = stream.draw_std_normal();
            let u: Vec<f64> = (0..sampler.augmentation()).map(|_| stream.draw_open_uniform()).collect();
            let lr = sampler.log_ratio(e);
            log_w += lr;
            margin = margin.max(lr - sampler.log_m());
            eps.push(e);
            uniforms.push(u);
        }
        meta.trials += count as u64;
        if let Some(m) = meta.max_log_weight_over_envelope.as_mut() {
            *m = m.max(margin);
        }
        if !path.fill(family, &eps, &uniforms)? {
            continue;
        }
        let w = log_w.exp();
        if !w.is_finite() {
            return Err(Error::NonFinite {
                what: "importance weight",
                coordinate: None,
                value: w,
            });
        }
        meta.accepted += count as u64;
        let (f, gz) = checked_log_joint(model, &path.z, true)?;
        path.accumulate(family, f, &gz, w, &mut g_rep, &mut g_cor);
    }
    GradientEstimate::assemble(g_rep, g_cor, family.entropy_grad(), meta)
}
