//! Moment (cumulant) estimators from equally spaced log-returns, and the
//! sampling harness that produces estimator distributions.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::levy::{truncation, Family, IntegrandClass, JumpParams, LevyModel, QuadratureConfig};
use crate::pricing::{LevySampler, SimConfig};

/// Log-returns `X_{iΔ} − X_{(i−1)Δ}` on a grid of spacing `dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSample {
    pub increments: Vec<f64>,
    pub dt: f64,
}

impl ReturnSample {
    pub fn new(increments: Vec<f64>, dt: f64) -> Result<Self> {
        if increments.is_empty() {
            return Err(Error::InvalidParameter("empty return sample".into()));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
        }
        if let Some(i) = increments.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite return at row {i}")));
        }
        Ok(Self { increments, dt })
    }

    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }

    /// Single-column CSV with header `log_return`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        let io = |e: csv::Error| Error::InvalidParameter(format!("csv: {e}"));
        wr.write_record(["log_return"]).map_err(io)?;
        for x in &self.increments {
            wr.write_record([format!("{x:?}")]).map_err(io)?;
        }
        wr.flush().map_err(|e| Error::InvalidParameter(format!("csv: {e}")))
    }

    pub fn read_csv<R: Read>(r: R, dt: f64) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let io = |e: csv::Error| Error::InvalidParameter(format!("csv: {e}"));
        let headers = rd.headers().map_err(io)?;
        if headers.len() != 1 || &headers[0] != "log_return" {
            return Err(Error::InvalidParameter(
                "expected a single column with header 'log_return'".into(),
            ));
        }
        let mut xs = Vec::new();
        for (i, rec) in rd.records().enumerate() {
            let rec = rec.map_err(io)?;
            let x: f64 = rec[0]
                .trim()
                .parse()
                .map_err(|e| Error::InvalidParameter(format!("row {}: {e}", i + 1)))?;
            xs.push(x);
        }
        Self::new(xs, dt)
    }
}

/// `n` i.i.d. increments over `dt` under the physical law of `model`.
pub fn simulate_returns(model: &LevyModel, n: usize, dt: f64, seed: u64) -> Result<ReturnSample> {
    simulate_returns_with(model, n, dt, seed, SimConfig::default().small_jump_cutoff)
}

pub fn simulate_returns_with(model: &LevyModel, n: usize, dt: f64, seed: u64, cutoff: f64) -> Result<ReturnSample> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let sampler = LevySampler::new(&model.triplet(), cutoff)?;
    let xs = crate::pricing::run_batched(n, seed, |rng| sampler.increment(dt, rng));
    ReturnSample::new(xs, dt)
}

/// Unbiased k-statistics `k₁…k₄`.
pub fn sample_cumulants(xs: &[f64]) -> [f64; 4] {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for x in xs {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let k2 = n / (n - 1.0) * m2;
    let k3 = n * n / ((n - 1.0) * (n - 2.0)) * m3;
    let k4 = n * n * ((n + 1.0) * m4 - 3.0 * (n - 1.0) * m2 * m2) / ((n - 1.0) * (n - 2.0) * (n - 3.0));
    [mean, k2, k3, k4]
}

fn central_moment(xs: &[f64], mean: f64, p: i32) -> f64 {
    xs.iter().map(|x| (x - mean).powi(p)).sum::<f64>() / xs.len() as f64
}

/// `n`-th jump cumulant (`n ≥ 2`) of a branch: `C Γ(n−α) κ^{α−n}`.
fn branch_cumulant(scale: f64, decay: f64, alpha: f64, n: i32) -> f64 {
    scale * gamma(n as f64 - alpha) * decay.powf(alpha - n as f64)
}

/// Cumulants `κ₁…κ₄` of `X_1`.
pub fn theoretical_cumulants(model: &LevyModel, cfg: &QuadratureConfig) -> Result<[f64; 4]> {
    let d = model.density();
    for b in [d.positive, d.negative].into_iter().flatten() {
        if b.decay <= 0.0 {
            return Err(Error::Domain("cumulants are infinite when a tail decay is 0".into()));
        }
    }
    let big: f64 = model.integrate(|x| x - truncation(x), IntegrandClass::Quadratic, cfg)?;
    let mut k = [model.drift + big, model.diffusion, 0.0, 0.0];
    for n in 2..=4 {
        if let Some(b) = d.positive {
            k[n as usize - 1] += branch_cumulant(b.scale, b.decay, b.alpha, n);
        }
        if let Some(b) = d.negative {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            k[n as usize - 1] += sign * branch_cumulant(b.scale, b.decay, b.alpha, n);
        }
    }
    Ok(k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorReport {
    pub theta_hat: Vec<f64>,
    pub n: usize,
    pub converged: bool,
    /// Standardised residuals of the matched cumulants.
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

impl EstimatorReport {
    /// The estimated model, carrying over the template's fixed quantities.
    pub fn model(&self, template: &LevyModel) -> Result<LevyModel> {
        template.with_params(&self.theta_hat)
    }
}

fn jump_params(template: &LevyModel, z: &[f64]) -> JumpParams {
    let e = |i: usize| z[i].exp();
    match template.jumps {
        JumpParams::None => JumpParams::None,
        JumpParams::VarianceGamma { .. } => JumpParams::VarianceGamma { c: e(0), m: e(1), n: e(2) },
        JumpParams::Gmy { alpha, .. } => JumpParams::Gmy { c: e(0), n: e(1), alpha },
        JumpParams::Cgmy { alpha, .. } => JumpParams::Cgmy { c: e(0), m: e(1), n: e(2), alpha },
    }
}

/// Jump cumulants `κ₂…κ₄` (with `c` in `κ₂`) for log-parameters `z`.
fn jump_cumulants(template: &LevyModel, z: &[f64]) -> [f64; 3] {
    let m = LevyModel {
        drift: 0.0,
        diffusion: template.diffusion,
        jumps: jump_params(template, z),
    };
    let d = m.density();
    let mut k = [m.diffusion, 0.0, 0.0];
    for n in 2..=4 {
        if let Some(b) = d.positive {
            k[n as usize - 2] += branch_cumulant(b.scale, b.decay, b.alpha, n);
        }
        if let Some(b) = d.negative {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            k[n as usize - 2] += sign * branch_cumulant(b.scale, b.decay, b.alpha, n);
        }
    }
    k
}

/// Levenberg–Marquardt on `r(z)`; returns `(z, residuals, iterations, ok)`.
fn levenberg_marquardt<F>(r: F, z0: Vec<f64>, max_iter: usize) -> (Vec<f64>, Vec<f64>, usize, bool)
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let p = z0.len();
    let cost = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    let mut z = z0;
    let mut res = r(&z);
    let mut c = cost(&res);
    let mut mu = 1e-3;
    for it in 1..=max_iter {
        let m = res.len();
        let mut jac = DMatrix::<f64>::zeros(m, p);
        for j in 0..p {
            let h = 1e-7 * (1.0 + z[j].abs());
            let mut zp = z.clone();
            zp[j] += h;
            let rp = r(&zp);
            for i in 0..m {
                jac[(i, j)] = (rp[i] - res[i]) / h;
            }
        }
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * DVector::from_vec(res.clone());
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for i in 0..p {
                a[(i, i)] += mu * jtj[(i, i)].max(1e-12);
            }
            let Some(step) = a.lu().solve(&(-&g)) else {
                mu *= 10.0;
                continue;
            };
            let zn: Vec<f64> = z.iter().zip(step.iter()).map(|(a, b)| (a + b).clamp(-30.0, 30.0)).collect();
            let rn = r(&zn);
            let cn = cost(&rn);
            if cn.is_finite() && cn < c {
                let small = step.amax() < 1e-10;
                let flat = c - cn <= 1e-15 * c;
                z = zn;
                res = rn;
                c = cn;
                mu = (mu / 3.0).max(1e-12);
                improved = true;
                if small || flat || c < 1e-24 {
                    return (z, res, it, true);
                }
                break;
            }
            mu *= 4.0;
        }
        if !improved {
            // No descent direction left: a (local) minimum.
            return (z, res, it, true);
        }
    }
    (z, res, max_iter, false)
}

/// Matches sample cumulants to the family's theoretical cumulants.
///
/// `template` fixes the family and the quantities held constant (`c` for
/// jump families, `α` for GMY/CGMY); the drift is recovered from the mean.
pub fn cumulant_estimator(sample: &ReturnSample, template: &LevyModel, cfg: &QuadratureConfig) -> EstimatorReport {
    let xs = &sample.increments;
    let n = xs.len();
    let dt = sample.dt;
    let failed = |iterations| EstimatorReport {
        theta_hat: template.params().iter().map(|_| f64::NAN).collect(),
        n,
        converged: false,
        residuals: vec![],
        iterations,
    };
    if n < 4 {
        return failed(0);
    }
    let k = sample_cumulants(xs);
    if template.family() == Family::BlackScholes {
        return EstimatorReport {
            theta_hat: vec![k[0] / dt, k[1] / dt],
            n,
            converged: k[1] > 0.0,
            residuals: vec![0.0, 0.0],
            iterations: 0,
        };
    }
    let alpha = template.alpha().unwrap_or(0.0);
    let nf = n as f64;
    let scales: Vec<f64> = (2..=4)
        .map(|j| (central_moment(xs, k[0], 2 * j).max(f64::MIN_POSITIVE) / nf).sqrt())
        .collect();
    let target = [k[1], k[2], k[3]];
    let resid = |z: &[f64]| -> Vec<f64> {
        let th = jump_cumulants(template, z);
        (0..3).map(|i| (th[i] * dt - target[i]) / scales[i]).collect()
    };

    // Symmetric start from the variance and excess kurtosis.
    let var_rate = (k[1] / dt - template.diffusion).max(1e-3 * k[1] / dt);
    let k4_rate = (k[3] / dt).max(0.3 * var_rate * var_rate / (1.0 / dt));
    let decay = ((3.0 - alpha) * (2.0 - alpha) * var_rate / k4_rate).sqrt().clamp(1.2, 200.0);
    let sides = if template.family() == Family::Gmy { 1.0 } else { 2.0 };
    let scale = var_rate * decay.powf(2.0 - alpha) / (sides * gamma(2.0 - alpha));
    let z0 = if template.family() == Family::Gmy {
        vec![scale.ln(), decay.ln()]
    } else {
        vec![scale.ln(), decay.ln(), decay.ln()]
    };
    let (z, residuals, iterations, ok) = levenberg_marquardt(resid, z0, 300);
    let jumps = jump_params(template, &z);
    let mut model = LevyModel {
        drift: 0.0,
        diffusion: template.diffusion,
        jumps,
    };
    let big: Result<f64> = model.integrate(|x| x - truncation(x), IntegrandClass::Quadratic, cfg);
    let Ok(big) = big else {
        return failed(iterations);
    };
    model.drift = k[0] / dt - big;
    let valid = LevyModel::new(model.drift, model.diffusion, model.jumps).is_ok();
    let interior = z.iter().all(|v| v.abs() < 29.0);
    EstimatorReport {
        theta_hat: model.params(),
        n,
        converged: ok && valid && interior,
        residuals,
        iterations,
    }
}

/// Batch estimates of `θ` around a true model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorDistribution {
    pub theta: Vec<f64>,
    pub estimates: Vec<Vec<f64>>,
    pub failed: usize,
}

impl EstimatorDistribution {
    /// `‖θ̂ − θ‖_∞` per batch.
    pub fn errors(&self) -> Vec<f64> {
        self.estimates
            .iter()
            .map(|e| max_norm_distance(e, &self.theta))
            .collect()
    }

    /// Empirical `P(‖θ̂ − θ‖_∞ > ε)`.
    pub fn exceedance(&self, eps: f64) -> f64 {
        exceedance(&self.estimates, &self.theta, eps)
    }

    /// Empirical `p`-quantile of the max-norm error (nearest rank).
    pub fn error_quantile(&self, p: f64) -> f64 {
        quantile(&self.errors(), p)
    }

    /// Median over batches of `|θ̂ − θ|/|θ|` in max-norm.
    pub fn median_relative_error(&self) -> f64 {
        let norm = self.theta.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        quantile(&self.errors(), 0.5) / norm
    }
}

pub fn max_norm_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

pub fn exceedance(estimates: &[Vec<f64>], theta: &[f64], eps: f64) -> f64 {
    if estimates.is_empty() {
        return f64::NAN;
    }
    let over = estimates
        .iter()
        .filter(|e| max_norm_distance(e, theta) > eps)
        .count();
    over as f64 / estimates.len() as f64
}

/// Nearest-rank quantile.
pub fn quantile(xs: &[f64], p: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((p * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[rank - 1]
}

/// Seed of batch `i` derived from a run seed.
pub fn batch_seed(seed: u64, i: u64) -> u64 {
    let mut z = seed ^ (i.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws `batches` samples of `n` returns and applies `estimator` to each.
pub fn estimator_distribution<E>(
    model: &LevyModel,
    estimator: E,
    n: usize,
    batches: usize,
    dt: f64,
    seed: u64,
) -> Result<EstimatorDistribution>
where
    E: Fn(&ReturnSample) -> EstimatorReport + Sync,
{
    if batches < 2 {
        return Err(Error::InvalidParameter("need at least 2 batches".into()));
    }
    let results: Vec<Result<EstimatorReport>> = (0..batches)
        .into_par_iter()
        .map(|i| {
            let sample = simulate_returns(model, n, dt, batch_seed(seed, i as u64))?;
            Ok(estimator(&sample))
        })
        .collect();
    let mut estimates = Vec::new();
    let mut failed = 0;
    for r in results {
        let rep = r?;
        if rep.converged {
            estimates.push(rep.theta_hat);
        } else {
            failed += 1;
        }
    }
    Ok(EstimatorDistribution {
        theta: model.params(),
        estimates,
        failed,
    })
}
