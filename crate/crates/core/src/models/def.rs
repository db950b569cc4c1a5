//! Sparse gamma deep exponential family with Poisson observations.
//!
//! Layer 0 sits next to the data. With `L` layers of sizes `K_0..K_{L-1}`:
//!
//! ```text
//! z^{L-1}_{n,k}  ~ Gam(top_shape, top_rate)
//! z^l_{n,k}      ~ Gam(α_z, α_z / Σ_k' w^{l+1}_{k,k'} z^{l+1}_{n,k'})
//! x_{n,d}        ~ Poisson(Σ_k w^0_{k,d} z^0_{n,k})
//! w^l            ~ Gam(weight_shape, weight_rate)
//! ```
//!
//! `w^0` is `K_0 × D` and `w^l` is `K_{l-1} × K_l` for `l ≥ 1`, all row-major.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mathcore::ln_gamma;

use super::{check_latent_len, Family, LatentBlock, ModelSpec};

/// Poisson rates below this are clamped before taking logs, so all-zero
/// weights yield a finite log-likelihood.
pub const POISSON_RATE_FLOOR: f64 = 1e-10;

/// Dense row-major matrix of non-negative counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl CountMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<u64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::Contract(format!(
                "count matrix {rows}×{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![0; rows * cols])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.data
    }

    pub fn total(&self) -> u64 {
        self.data.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefHyperparameters {
    pub alpha_z: f64,
    pub weight_shape: f64,
    pub weight_rate: f64,
    pub top_shape: f64,
    pub top_rate: f64,
}

impl Default for DefHyperparameters {
    fn default() -> Self {
        Self {
            alpha_z: 0.1,
            weight_shape: 0.1,
            weight_rate: 0.3,
            top_shape: 0.1,
            top_rate: 0.1,
        }
    }
}

impl DefHyperparameters {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("alpha_z", self.alpha_z),
            ("weight_shape", self.weight_shape),
            ("weight_rate", self.weight_rate),
            ("top_shape", self.top_shape),
            ("top_rate", self.top_rate),
        ];
        for (name, v) in all {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain("def_hyperparameters", format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SparseGammaDef {
    layer_sizes: Vec<usize>,
    data: CountMatrix,
    hyper: DefHyperparameters,
    layout: Vec<LatentBlock>,
    /// Offsets of `z^l` then `w^l` blocks in the flattened latent vector.
    z_off: Vec<usize>,
    w_off: Vec<usize>,
    log_x_factorial: f64,
}

impl SparseGammaDef {
    pub const DEFAULT_LAYERS: [usize; 2] = [10, 5];

    pub fn new(layer_sizes: Vec<usize>, data: CountMatrix, hyper: DefHyperparameters) -> Result<Self> {
        hyper.validate()?;
        if layer_sizes.is_empty() || layer_sizes.contains(&0) {
            return Err(Error::domain("sparse_gamma_def", "layer sizes must be non-empty and ≥ 1"));
        }
        let n = data.rows();
        let d = data.cols();
        let mut layout = Vec::new();
        let mut z_off = Vec::new();
        let mut w_off = Vec::new();
        let mut off = 0;
        for (l, &k) in layer_sizes.iter().enumerate() {
            z_off.push(off);
            layout.push(LatentBlock::new(format!("z{l}"), Family::GammaMeanShape, n * k));
            off += n * k;
        }
        for l in 0..layer_sizes.len() {
            let size = if l == 0 { layer_sizes[0] * d } else { layer_sizes[l - 1] * layer_sizes[l] };
            w_off.push(off);
            layout.push(LatentBlock::new(format!("w{l}"), Family::GammaMeanShape, size));
            off += size;
        }
        let log_x_factorial = data.as_slice().iter().map(|&x| ln_gamma(x as f64 + 1.0)).sum();
        Ok(Self {
            layer_sizes,
            data,
            hyper,
            layout,
            z_off,
            w_off,
            log_x_factorial,
        })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn data(&self) -> &CountMatrix {
        &self.data
    }

    pub fn hyperparameters(&self) -> &DefHyperparameters {
        &self.hyper
    }

    pub fn num_layers(&self) -> usize {
        self.layer_sizes.len()
    }

    /// Concatenate per-layer latents and weights into the flat vector the
    /// [`ModelSpec`] methods take.
    pub fn flatten(&self, z_layers: &[Vec<f64>], weights: &[Vec<f64>]) -> Result<Vec<f64>> {
        if z_layers.len() != self.num_layers() || weights.len() != self.num_layers() {
            return Err(Error::Contract(format!("expected {} layers", self.num_layers())));
        }
        let mut flat = Vec::with_capacity(super::latent_len(&self.layout));
        for (block, v) in self.layout.iter().zip(z_layers.iter().chain(weights)) {
            if v.len() != block.dim {
                return Err(Error::Contract(format!(
                    "block {} expects {} values, got {}",
                    block.name,
                    block.dim,
                    v.len()
                )));
            }
            flat.extend_from_slice(v);
        }
        Ok(flat)
    }

    /// `f` and its gradient in one pass. `want_grad == false` skips the
    /// gradient allocation.
    fn evaluate(&self, x: &[f64], want_grad: bool) -> Result<(f64, Vec<f64>)> {
        check_latent_len(&self.layout, x)?;
        if let Some(i) = x.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::domain(
                "def_log_joint",
                format!("latent {i} must be strictly positive and finite, got {}", x[i]),
            ));
        }
        let h = &self.hyper;
        let n_obs = self.data.rows();
        let dim = self.data.cols();
        let sizes = &self.layer_sizes;
        let nl = sizes.len();
        let mut g = if want_grad { vec![0.0; x.len()] } else { Vec::new() };
        let mut f = 0.0;

        // Weight priors.
        let w_norm = h.weight_shape * h.weight_rate.ln() - ln_gamma(h.weight_shape);
        for l in 0..nl {
            let start = self.w_off[l];
            let end = start + self.layout[nl + l].dim;
            for i in start..end {
                let w = x[i];
                f += w_norm + (h.weight_shape - 1.0) * w.ln() - h.weight_rate * w;
                if want_grad {
                    g[i] += (h.weight_shape - 1.0) / w - h.weight_rate;
                }
            }
        }

        // Top-layer prior.
        let top_norm = h.top_shape * h.top_rate.ln() - ln_gamma(h.top_shape);
        let top = self.z_off[nl - 1];
        for i in top..top + n_obs * sizes[nl - 1] {
            let z = x[i];
            f += top_norm + (h.top_shape - 1.0) * z.ln() - h.top_rate * z;
            if want_grad {
                g[i] += (h.top_shape - 1.0) / z - h.top_rate;
            }
        }

        // Layer-conditional terms: z^l | z^{l+1}, w^{l+1}.
        let a = h.alpha_z;
        let cond_norm = a * a.ln() - ln_gamma(a);
        for l in 0..nl.saturating_sub(1) {
            let (k_child, k_par) = (sizes[l], sizes[l + 1]);
            let (zc, zp, wo) = (self.z_off[l], self.z_off[l + 1], self.w_off[l + 1]);
            for n in 0..n_obs {
                for k in 0..k_child {
                    let mut m = 0.0;
                    for kp in 0..k_par {
                        m += x[wo + k * k_par + kp] * x[zp + n * k_par + kp];
                    }
                    let ci = zc + n * k_child + k;
                    let z = x[ci];
                    f += cond_norm - a * m.ln() + (a - 1.0) * z.ln() - a * z / m;
                    if want_grad {
                        g[ci] += (a - 1.0) / z - a / m;
                        let dm = -a / m + a * z / (m * m);
                        for kp in 0..k_par {
                            let wi = wo + k * k_par + kp;
                            let pi = zp + n * k_par + kp;
                            g[wi] += dm * x[pi];
                            g[pi] += dm * x[wi];
                        }
                    }
                }
            }
        }

        // Poisson likelihood.
        let k0 = sizes[0];
        let (z0, w0) = (self.z_off[0], self.w_off[0]);
        f -= self.log_x_factorial;
        for n in 0..n_obs {
            for d in 0..dim {
                let mut rate = 0.0;
                for k in 0..k0 {
                    rate += x[w0 + k * dim + d] * x[z0 + n * k0 + k];
                }
                let count = self.data.get(n, d) as f64;
                let floored = rate < POISSON_RATE_FLOOR;
                let lam = if floored { POISSON_RATE_FLOOR } else { rate };
                f += count * lam.ln() - lam;
                if want_grad && !floored {
                    let dl = count / lam - 1.0;
                    for k in 0..k0 {
                        let wi = w0 + k * dim + d;
                        let zi = z0 + n * k0 + k;
                        g[wi] += dl * x[zi];
                        g[zi] += dl * x[wi];
                    }
                }
            }
        }
        Ok((f, g))
    }
}

impl ModelSpec for SparseGammaDef {
    fn layout(&self) -> &[LatentBlock] {
        &self.layout
    }

    fn log_joint(&self, z: &[f64]) -> Result<f64> {
        Ok(self.evaluate(z, false)?.0)
    }

    fn grad_latents(&self, z: &[f64]) -> Result<Vec<f64>> {
        Ok(self.evaluate(z, true)?.1)
    }

    fn log_joint_and_grad(&self, z: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.evaluate(z, true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mathcore::RandomStream;
    use crate::models::{gradient_self_check, latent_len};

    fn tiny(x: u64) -> SparseGammaDef {
        SparseGammaDef::new(vec![1], CountMatrix::new(1, 1, vec![x]).unwrap(), DefHyperparameters::default())
            .unwrap()
    }

    #[test]
    fn one_by_one_plug_in() {
        let m = tiny(0);
        let f = m.log_joint(&[1.0, 1.0]).unwrap();
        // Poisson(0; 1) = e^-1; Gam(1; 0.1, 0.3) weight prior; Gam(1; 0.1, 0.1) top prior.
        let poisson = -1.0;
        let weight = 0.1 * 0.3f64.ln() - ln_gamma(0.1) - 0.3;
        let top = 0.1 * 0.1f64.ln() - ln_gamma(0.1) - 0.1;
        assert!((f - (poisson + weight + top)).abs() < 1e-12);
    }

    #[test]
    fn layout_sizes() {
        let data = CountMatrix::zeros(4, 6).unwrap();
        let m = SparseGammaDef::new(vec![3, 2], data, DefHyperparameters::default()).unwrap();
        assert_eq!(latent_len(m.layout()), 4 * 3 + 4 * 2 + 3 * 6 + 3 * 2);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut s = RandomStream::new(5, 0);
        let data: Vec<u64> = (0..5 * 4).map(|i| (i * 7 % 5) as u64).collect();
        let m = SparseGammaDef::new(vec![3, 2], CountMatrix::new(5, 4, data).unwrap(), DefHyperparameters::default())
            .unwrap();
        let r = gradient_self_check(&m, 20, 1e-4, &mut s).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn non_positive_latent_rejected() {
        let m = tiny(1);
        assert!(matches!(m.log_joint(&[0.0, 1.0]), Err(Error::Domain { .. })));
        assert!(m.grad_latents(&[1.0, -1.0]).is_err());
        assert!(m.log_joint(&[1.0]).is_err());
    }

    #[test]
    fn diverges_as_latent_vanishes_with_positive_count() {
        let m = tiny(3);
        let mut prev = f64::INFINITY;
        // Down to the rate floor; below it the likelihood term is frozen.
        for e in 1..10 {
            let f = m.log_joint(&[10f64.powi(-e), 1.0]).unwrap();
            assert!(f < prev);
            prev = f;
        }
        assert!(prev < -40.0);
    }

    #[test]
    fn bad_construction() {
        let data = CountMatrix::zeros(1, 1).unwrap();
        assert!(SparseGammaDef::new(vec![], data.clone(), DefHyperparameters::default()).is_err());
        assert!(SparseGammaDef::new(vec![2, 0], data.clone(), DefHyperparameters::default()).is_err());
        let bad = DefHyperparameters { alpha_z: 0.0, ..Default::default() };
        assert!(SparseGammaDef::new(vec![1], data, bad).is_err());
        assert!(CountMatrix::new(2, 2, vec![1]).is_err());
    }
}
