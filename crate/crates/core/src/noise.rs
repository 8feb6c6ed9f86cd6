//! Seeded synthetic noise.
//!
//! Draws come from `ChaCha8Rng::seed_from_u64(seed)`, one node at a time from
//! left to right, so a seed reproduces the same vector on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};

use crate::error::{Error, Result};
use crate::grid::{Grid, SampledFunction};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseModel {
    /// Normal with mean zero and standard deviation `sigma`.
    Gaussian { sigma: f64 },
    /// Uniform on `(-delta, delta)`.
    Uniform { delta: f64 },
    /// Per node: uniform `(-delta, delta)` with probability `mix_prob`, else
    /// normal with mean zero and standard deviation `delta`.
    MixtureUniformNormal { delta: f64, mix_prob: f64 },
    /// Per node: uniform `(-0.8 delta, 1.2 delta)` with probability `mix_prob`,
    /// else normal with mean `0.1` and standard deviation `delta`.
    NonzeroMeanMixture { delta: f64, mix_prob: f64 },
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        let (level, prob) = match *self {
            Self::Gaussian { sigma } => (sigma, 0.5),
            Self::Uniform { delta } => (delta, 0.5),
            Self::MixtureUniformNormal { delta, mix_prob } | Self::NonzeroMeanMixture { delta, mix_prob } => {
                (delta, mix_prob)
            }
        };
        if !(level > 0.0 && level.is_finite()) {
            return Err(Error::Config(format!("noise level must be positive, got {level}")));
        }
        if !(0.0..=1.0).contains(&prob) {
            return Err(Error::Config(format!("mixture probability must lie in [0, 1], got {prob}")));
        }
        Ok(())
    }

    /// Same model with its level parameter replaced.
    pub fn with_level(self, level: f64) -> Self {
        match self {
            Self::Gaussian { .. } => Self::Gaussian { sigma: level },
            Self::Uniform { .. } => Self::Uniform { delta: level },
            Self::MixtureUniformNormal { mix_prob, .. } => Self::MixtureUniformNormal { delta: level, mix_prob },
            Self::NonzeroMeanMixture { mix_prob, .. } => Self::NonzeroMeanMixture { delta: level, mix_prob },
        }
    }

    pub fn level(&self) -> f64 {
        match *self {
            Self::Gaussian { sigma } => sigma,
            Self::Uniform { delta }
            | Self::MixtureUniformNormal { delta, .. }
            | Self::NonzeroMeanMixture { delta, .. } => delta,
        }
    }
}

pub fn sample_noise<T: Scalar>(
    model: &NoiseModel,
    grid: &Grid<T>,
    seed: u64,
    pin_endpoints: bool,
) -> Result<SampledFunction<T>> {
    model.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.n();
    let draws: Vec<f64> = match *model {
        NoiseModel::Gaussian { sigma } => {
            let d = normal(0.0, sigma)?;
            (0..n).map(|_| d.sample(&mut rng)).collect()
        }
        NoiseModel::Uniform { delta } => {
            let d = uniform(-delta, delta)?;
            (0..n).map(|_| d.sample(&mut rng)).collect()
        }
        NoiseModel::MixtureUniformNormal { delta, mix_prob } => {
            mixture(&mut rng, n, mix_prob, uniform(-delta, delta)?, normal(0.0, delta)?)
        }
        NoiseModel::NonzeroMeanMixture { delta, mix_prob } => {
            mixture(&mut rng, n, mix_prob, uniform(-0.8 * delta, 1.2 * delta)?, normal(0.1, delta)?)
        }
    };
    let mut values: Vec<T> = draws.into_iter().map(T::lit).collect();
    if pin_endpoints {
        values[0] = T::zero();
        values[n - 1] = T::zero();
    }
    SampledFunction::new(*grid, values)
}

fn normal(mean: f64, sd: f64) -> Result<Normal<f64>> {
    Normal::new(mean, sd).map_err(|e| Error::Config(e.to_string()))
}

fn uniform(lo: f64, hi: f64) -> Result<Uniform<f64>> {
    Uniform::new(lo, hi).map_err(|e| Error::Config(e.to_string()))
}

fn mixture(rng: &mut ChaCha8Rng, n: usize, p: f64, first: Uniform<f64>, second: Normal<f64>) -> Vec<f64> {
    (0..n).map(|_| if rng.random::<f64>() < p { first.sample(rng) } else { second.sample(rng) }).collect()
}
