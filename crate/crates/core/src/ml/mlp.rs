//! One-hidden-layer perceptron: `tanh` hidden units, a sigmoid output and
//! mean binary cross-entropy, trained by mini-batch gradient descent on
//! standardized inputs.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::preprocess::Standardizer;
use super::FeatureMatrix;
use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::seed::rng_from_seed;
use crate::topical::SparseVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpParams {
    pub hidden: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden: 16,
            learning_rate: 0.05,
            epochs: 100,
            batch_size: 32,
        }
    }
}

impl MlpParams {
    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 {
            return Err(Error::InvalidParameter("MLP needs at least one hidden unit".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidParameter("learning rate must be positive".into()));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidParameter("epochs and batch size must be at least 1".into()));
        }
        Ok(())
    }
}

/// Parameters flattened as `[W1 (hidden x inputs, row-major), b1, w2, b2]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub n_inputs: usize,
    pub n_hidden: usize,
    pub params: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Cross-entropy of a logit against a 0/1 target, without overflow.
fn bce_with_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

impl Network {
    /// Xavier-uniform weights, zero biases.
    pub fn new(n_inputs: usize, n_hidden: usize, rng: &mut ChaCha8Rng) -> Result<Self> {
        if n_hidden == 0 {
            return Err(Error::InvalidParameter("MLP needs at least one hidden unit".into()));
        }
        let mut params = vec![0.0; n_hidden * n_inputs + 2 * n_hidden + 1];
        let a1 = (6.0 / (n_inputs + n_hidden) as f64).sqrt();
        for p in &mut params[..n_hidden * n_inputs] {
            *p = rng.gen_range(-a1..=a1);
        }
        let a2 = (6.0 / (n_hidden + 1) as f64).sqrt();
        let w2 = n_hidden * n_inputs + n_hidden;
        for p in &mut params[w2..w2 + n_hidden] {
            *p = rng.gen_range(-a2..=a2);
        }
        Ok(Network {
            n_inputs,
            n_hidden,
            params,
        })
    }

    fn offsets(&self) -> (usize, usize, usize) {
        let b1 = self.n_hidden * self.n_inputs;
        let w2 = b1 + self.n_hidden;
        (b1, w2, w2 + self.n_hidden)
    }

    fn hidden_into(&self, x: &[f64], a: &mut [f64]) {
        let (b1, _, _) = self.offsets();
        for (h, ah) in a.iter_mut().enumerate() {
            let row = &self.params[h * self.n_inputs..(h + 1) * self.n_inputs];
            let s: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum();
            *ah = (s + self.params[b1 + h]).tanh();
        }
    }

    pub fn logit(&self, x: &[f64]) -> f64 {
        let (_, w2, b2) = self.offsets();
        let mut a = vec![0.0; self.n_hidden];
        self.hidden_into(x, &mut a);
        a.iter().zip(&self.params[w2..b2]).map(|(a, w)| a * w).sum::<f64>() + self.params[b2]
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(self.logit(x))
    }

    pub fn loss(&self, xs: &[Vec<f64>], ys: &[f64]) -> f64 {
        let total: f64 = xs.iter().zip(ys).map(|(x, &y)| bce_with_logit(self.logit(x), y)).sum();
        total / xs.len() as f64
    }

    /// Mean loss and its gradient with respect to `params`.
    pub fn loss_and_gradient(&self, xs: &[Vec<f64>], ys: &[f64]) -> (f64, Vec<f64>) {
        let (b1, w2, b2) = self.offsets();
        let m = xs.len() as f64;
        let mut grad = vec![0.0; self.params.len()];
        let mut a = vec![0.0; self.n_hidden];
        let mut total = 0.0;
        for (x, &y) in xs.iter().zip(ys) {
            self.hidden_into(x, &mut a);
            let z = a.iter().zip(&self.params[w2..b2]).map(|(a, w)| a * w).sum::<f64>() + self.params[b2];
            total += bce_with_logit(z, y);
            let dz = (sigmoid(z) - y) / m;
            grad[b2] += dz;
            for h in 0..self.n_hidden {
                grad[w2 + h] += dz * a[h];
                let dh = dz * self.params[w2 + h] * (1.0 - a[h] * a[h]);
                grad[b1 + h] += dh;
                let row = &mut grad[h * self.n_inputs..(h + 1) * self.n_inputs];
                for (g, v) in row.iter_mut().zip(x) {
                    *g += dh * v;
                }
            }
        }
        (total / m, grad)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub network: Network,
    standardizer: Standardizer,
    /// Mean training loss per epoch.
    pub loss_history: Vec<f64>,
}

impl Mlp {
    pub fn fit(data: &FeatureMatrix, params: &MlpParams, seed: u64) -> Result<Self> {
        params.validate()?;
        data.require_non_empty()?;
        let mut rng = rng_from_seed(seed);
        let standardizer = Standardizer::fit(data);
        let mut network = Network::new(data.n_features(), params.hidden, &mut rng)?;
        let targets: Vec<f64> = data.labels.iter().map(|l| l.index() as f64).collect();
        let mut order: Vec<usize> = (0..data.len()).collect();
        let mut loss_history = Vec::with_capacity(params.epochs);
        for epoch in 0..params.epochs {
            order.shuffle(&mut rng);
            let mut epoch_loss = 0.0;
            for batch in order.chunks(params.batch_size) {
                let xs: Vec<Vec<f64>> = batch.iter().map(|&i| standardizer.transform(&data.rows[i])).collect();
                let ys: Vec<f64> = batch.iter().map(|&i| targets[i]).collect();
                let (loss, grad) = network.loss_and_gradient(&xs, &ys);
                if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                    return Err(Error::NonFiniteLoss { epoch, loss });
                }
                epoch_loss += loss * batch.len() as f64;
                for (p, g) in network.params.iter_mut().zip(&grad) {
                    *p -= params.learning_rate * g;
                }
            }
            let mean = epoch_loss / data.len() as f64;
            log::trace!("mlp epoch {epoch}: loss {mean:.6}");
            loss_history.push(mean);
        }
        Ok(Mlp {
            network,
            standardizer,
            loss_history,
        })
    }

    pub fn probability(&self, row: &SparseVector) -> f64 {
        self.network.probability(&self.standardizer.transform(row))
    }

    pub fn predict(&self, row: &SparseVector) -> Label {
        if self.probability(row) > 0.5 {
            Label::Productive
        } else {
            Label::ZeroPublications
        }
    }
}

/// Largest `|analytic - numeric| / max(|analytic|, |numeric|, floor)` over
/// all parameters, with central differences of step `h`.
pub fn gradient_check(net: &Network, xs: &[Vec<f64>], ys: &[f64], h: f64, floor: f64) -> f64 {
    let (_, analytic) = net.loss_and_gradient(xs, ys);
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    for i in 0..net.params.len() {
        let orig = probe.params[i];
        probe.params[i] = orig + h;
        let up = probe.loss(xs, ys);
        probe.params[i] = orig - h;
        let down = probe.loss(xs, ys);
        probe.params[i] = orig;
        let numeric = (up - down) / (2.0 * h);
        let denom = analytic[i].abs().max(numeric.abs()).max(floor);
        worst = worst.max((analytic[i] - numeric).abs() / denom);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Productive as P, ZeroPublications as Z};

    #[test]
    fn zero_hidden_units_rejected() {
        let p = MlpParams {
            hidden: 0,
            ..MlpParams::default()
        };
        assert!(p.validate().is_err());
        let m = FeatureMatrix::from_dense(&[vec![1.0], vec![-1.0]], &[P, Z]).unwrap();
        assert!(Mlp::fit(&m, &p, 0).is_err());
    }

    #[test]
    fn single_neuron_learns_sign() {
        let rows: Vec<Vec<f64>> = (0..100).map(|i| vec![(i as f64 - 49.5) / 10.0]).collect();
        let labels: Vec<Label> = rows.iter().map(|r| if r[0] > 0.0 { P } else { Z }).collect();
        let m = FeatureMatrix::from_dense(&rows, &labels).unwrap();
        let p = MlpParams {
            hidden: 1,
            learning_rate: 0.5,
            epochs: 200,
            batch_size: 10,
        };
        let mlp = Mlp::fit(&m, &p, 7).unwrap();
        let correct = m.rows.iter().zip(&m.labels).filter(|(r, l)| mlp.predict(r) == **l).count();
        assert!(correct >= 95, "{correct}");
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = rng_from_seed(11);
        let net = Network::new(1, 1, &mut rng).unwrap();
        let xs = vec![vec![0.5], vec![-1.2], vec![2.0]];
        let ys = vec![1.0, 0.0, 1.0];
        assert!(gradient_check(&net, &xs, &ys, 1e-5, 1e-6) <= 1e-4);
    }

    #[test]
    fn loss_is_stable_for_large_logits() {
        assert!(bce_with_logit(1000.0, 0.0).is_finite());
        assert!(bce_with_logit(-1000.0, 1.0).is_finite());
        assert!((bce_with_logit(0.0, 1.0) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn deterministic_under_seed() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, (i % 3) as f64]).collect();
        let labels: Vec<Label> = (0..20).map(|i| if i % 2 == 0 { P } else { Z }).collect();
        let m = FeatureMatrix::from_dense(&rows, &labels).unwrap();
        let a = Mlp::fit(&m, &MlpParams::default(), 4).unwrap();
        let b = Mlp::fit(&m, &MlpParams::default(), 4).unwrap();
        assert_eq!(a, b);
    }
}
