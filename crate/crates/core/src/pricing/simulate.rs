//! Exact and approximate samplers for branch-form Lévy laws.
//!
//! Each half-line branch `C e^{−κr}/r^{1+α}` is sampled as
//! * `α = 0`: a gamma subordinator, exact;
//! * `α < 0`: compound Poisson with gamma jump sizes, exact;
//! * `0 < α < 2`: compound Poisson above a cutoff `ε` (Pareto proposals with
//!   exponential rejection) plus a Gaussian with the variance of the jumps
//!   below `ε`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::{Branch, JumpWeight, Triplet};
use crate::quadrature::{integrate, Tolerance};

const BATCH: usize = 4096;

/// Monte Carlo settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub n_paths: usize,
    /// Time steps for path simulation; terminal sampling uses one step.
    pub n_steps: usize,
    pub seed: u64,
    pub small_jump_cutoff: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_paths: 100_000,
            n_steps: 1,
            seed: 0,
            small_jump_cutoff: 1e-3,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 || self.n_steps == 0 {
            return Err(Error::InvalidParameter("n_paths and n_steps must be positive".into()));
        }
        if !(self.small_jump_cutoff > 0.0 && self.small_jump_cutoff < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "small_jump_cutoff must lie in (0, 1), got {}",
                self.small_jump_cutoff
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
enum BranchSampler {
    Gamma { scale: f64, rate: f64 },
    FiniteActivity { intensity: f64, shape: f64, rate: f64 },
    Truncated { intensity: f64, alpha: f64, decay: f64, eps: f64 },
}

fn tol() -> Tolerance {
    Tolerance {
        rel: 1e-12,
        abs: 0.0,
        max_intervals: 4000,
    }
}

/// Returns the sampler, `∫_{ε<r≤1} r ν(dr)` and `∫_{r≤ε} r² ν(dr)` for the branch.
fn branch_sampler(b: &Branch, eps: f64) -> Result<(BranchSampler, f64, f64)> {
    let Branch { scale, decay, alpha } = *b;
    if alpha == 0.0 {
        if decay <= 0.0 {
            return Err(Error::Unsupported("gamma branch with zero decay".into()));
        }
        let comp = scale * (-(-decay).exp_m1()) / decay;
        return Ok((BranchSampler::Gamma { scale, rate: decay }, comp, 0.0));
    }
    if alpha < 0.0 {
        if decay <= 0.0 {
            return Err(Error::Unsupported(
                "finite-activity branch with zero decay has infinite mass".into(),
            ));
        }
        let shape = -alpha;
        let intensity = scale * statrs::function::gamma::gamma(shape) * decay.powf(alpha);
        let comp = integrate(|r: f64| scale * r.powf(-alpha) * (-decay * r).exp(), 0.0, 1.0, tol()).value;
        return Ok((BranchSampler::FiniteActivity { intensity, shape, rate: decay }, comp, 0.0));
    }
    // ∫_ε^∞ r^{−1−α}e^{−κr} dr with r = ε e^u.
    let upper = 60.0 / alpha;
    let mass = integrate(
        |u: f64| (-alpha * u - decay * eps * u.exp()).exp(),
        0.0,
        upper,
        tol(),
    )
    .value;
    let intensity = scale * eps.powf(-alpha) * mass;
    let comp = integrate(|r: f64| b.at(r) * r, eps, 1.0, tol()).value;
    let small_var = integrate(|r: f64| b.at(r) * r * r, 0.0, eps, tol()).value;
    Ok((
        BranchSampler::Truncated { intensity, alpha, decay, eps },
        comp,
        small_var,
    ))
}

impl BranchSampler {
    /// Sum of the branch's jumps (as positive sizes) over a horizon `h`.
    fn sample<R: Rng>(&self, h: f64, rng: &mut R) -> f64 {
        match *self {
            BranchSampler::Gamma { scale, rate } => Gamma::new(scale * h, 1.0 / rate)
                .expect("positive gamma parameters")
                .sample(rng),
            BranchSampler::FiniteActivity { intensity, shape, rate } => {
                let n = poisson(intensity * h, rng);
                if n == 0 {
                    0.0
                } else {
                    Gamma::new(shape * n as f64, 1.0 / rate)
                        .expect("positive gamma parameters")
                        .sample(rng)
                }
            }
            BranchSampler::Truncated { intensity, alpha, decay, eps } => {
                let n = poisson(intensity * h, rng);
                let mut total = 0.0;
                for _ in 0..n {
                    loop {
                        let u: f64 = 1.0 - rng.random::<f64>();
                        let x = eps * u.powf(-1.0 / alpha);
                        if decay == 0.0 || rng.random::<f64>() < (-decay * (x - eps)).exp() {
                            total += x;
                            break;
                        }
                    }
                }
                total
            }
        }
    }
}

fn poisson<R: Rng>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive mean").sample(rng) as u64
}

/// Sampler for increments of a branch-form Lévy process.
#[derive(Debug, Clone, Copy)]
pub struct LevySampler {
    drift: f64,
    gauss_var: f64,
    positive: Option<BranchSampler>,
    negative: Option<BranchSampler>,
}

impl LevySampler {
    pub fn new(t: &Triplet, cutoff: f64) -> Result<Self> {
        if t.weight != JumpWeight::Identity {
            return Err(Error::Unsupported(
                "simulation needs a closed-family law; price reweighted laws with the CF method".into(),
            ));
        }
        let mut drift = t.drift;
        let mut gauss_var = t.diffusion;
        let positive = match t.density.positive {
            Some(b) => {
                let (s, comp, var) = branch_sampler(&b, cutoff)?;
                drift -= comp;
                gauss_var += var;
                Some(s)
            }
            None => None,
        };
        let negative = match t.density.negative {
            Some(b) => {
                let (s, comp, var) = branch_sampler(&b, cutoff)?;
                drift += comp;
                gauss_var += var;
                Some(s)
            }
            None => None,
        };
        Ok(Self {
            drift,
            gauss_var,
            positive,
            negative,
        })
    }

    /// One increment over a horizon `h`.
    pub fn increment<R: Rng>(&self, h: f64, rng: &mut R) -> f64 {
        let mut x = self.drift * h;
        if self.gauss_var > 0.0 {
            let z: f64 = rng.sample(StandardNormal);
            x += (self.gauss_var * h).sqrt() * z;
        }
        if let Some(p) = &self.positive {
            x += p.sample(h, rng);
        }
        if let Some(n) = &self.negative {
            x -= n.sample(h, rng);
        }
        x
    }
}

/// Generator for batch `index` of a run with base seed `seed`.
pub fn batch_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Runs `per_path` for `n` paths in parallel batches with fixed seeds and
/// returns the results in path order.
pub(crate) fn run_batched<T, F>(n: usize, seed: u64, per_path: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    let batches = n.div_ceil(BATCH);
    (0..batches)
        .into_par_iter()
        .map(|i| {
            let mut rng = batch_rng(seed, i as u64);
            let len = BATCH.min(n - i * BATCH);
            (0..len).map(|_| per_path(&mut rng)).collect::<Vec<T>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// `n_paths` i.i.d. samples of `X_T`.
pub fn simulate_terminal(t: &Triplet, maturity: f64, cfg: &SimConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let sampler = LevySampler::new(t, cfg.small_jump_cutoff)?;
    Ok(run_batched(cfg.n_paths, cfg.seed, |rng| sampler.increment(maturity, rng)))
}

/// `n_paths` paths of `X` on the grid `k·T/n_steps`, each starting at 0.
pub fn simulate_paths(t: &Triplet, maturity: f64, cfg: &SimConfig) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    let sampler = LevySampler::new(t, cfg.small_jump_cutoff)?;
    let h = maturity / cfg.n_steps as f64;
    Ok(run_batched(cfg.n_paths, cfg.seed, |rng| {
        let mut path = Vec::with_capacity(cfg.n_steps + 1);
        let mut x = 0.0;
        path.push(x);
        for _ in 0..cfg.n_steps {
            x += sampler.increment(h, rng);
            path.push(x);
        }
        path
    }))
}
