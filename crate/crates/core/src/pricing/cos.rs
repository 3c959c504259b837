//! Fourier-cosine expansion of European payoffs on a truncated log-price
//! interval `[x̄ − L√(c₂T), x̄ + L√(c₂T)]`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::{QuadratureConfig, Triplet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CosConfig {
    pub truncation: f64,
    pub terms: usize,
}

impl Default for CosConfig {
    fn default() -> Self {
        Self {
            truncation: 10.0,
            terms: 1024,
        }
    }
}

/// Series coefficients of one law, reusable across strikes.
#[derive(Debug, Clone)]
pub struct CosPricer {
    lower: f64,
    upper: f64,
    maturity: f64,
    rate: f64,
    /// `Re(φ(u_k) e^{−iu_k a})`, first term already halved.
    weights: Vec<f64>,
    /// `log E e^{X_T}`, for the asset payoff.
    log_forward: f64,
}

// Stop evaluating φ once it has been negligible this many times in a row.
const NEGLIGIBLE_RUN: usize = 8;

impl CosPricer {
    pub fn new(
        t: &Triplet,
        maturity: f64,
        rate: f64,
        cos: &CosConfig,
        quad: &QuadratureConfig,
    ) -> Result<Self> {
        let positive = |v: f64| v > 0.0;
        if !positive(maturity) || cos.terms < 2 || !positive(cos.truncation) {
            return Err(Error::InvalidParameter("maturity, terms and truncation must be positive".into()));
        }
        if !t.exp_moment_domain().contains(1.0) {
            return Err(Error::Divergence(
                "E e^{X_T} = ∞: the pricing strip does not contain Im u = −1".into(),
            ));
        }
        let c1 = maturity * t.mean(quad)?;
        let c2 = maturity * t.variance(quad)?;
        let half = cos.truncation * c2.sqrt();
        let (lower, upper) = (c1 - half, c1 + half);
        let width = upper - lower;
        let log_forward = maturity * t.cumulant_generating(1.0, quad)?;

        // Evaluate φ in parallel chunks, stopping after a run of negligible terms.
        let chunk = 64;
        let mut weights: Vec<f64> = Vec::with_capacity(cos.terms);
        let mut run = 0;
        'outer: for start in (0..cos.terms).step_by(chunk) {
            let end = (start + chunk).min(cos.terms);
            let block: Vec<Result<(f64, f64)>> = (start..end)
                .into_par_iter()
                .map(|k| {
                    let u = k as f64 * std::f64::consts::PI / width;
                    let psi = t.characteristic_exponent(Complex64::new(u, 0.0), quad)?;
                    let phi = (psi * maturity).exp();
                    let w = (phi * Complex64::new(0.0, -u * lower).exp()).re;
                    Ok((w, phi.norm()))
                })
                .collect();
            for (k, item) in (start..end).zip(block) {
                let (w, size) = item?;
                weights.push(if k == 0 { 0.5 * w } else { w });
                run = if size < 1e-16 { run + 1 } else { 0 };
                if run >= NEGLIGIBLE_RUN {
                    break 'outer;
                }
            }
        }
        Ok(Self {
            lower,
            upper,
            maturity,
            rate,
            weights,
            log_forward,
        })
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    fn discount(&self) -> f64 {
        (-self.rate * self.maturity).exp()
    }

    /// `∫_c^d e^x cos(u(x − a)) dx` and `∫_c^d cos(u(x − a)) dx`.
    fn chi_psi(&self, u: f64, c: f64, d: f64) -> (f64, f64) {
        let a = self.lower;
        let (sd, cd) = (u * (d - a)).sin_cos();
        let (sc, cc) = (u * (c - a)).sin_cos();
        let (ed, ec) = (d.exp(), c.exp());
        let chi = (cd * ed - cc * ec + u * (sd * ed - sc * ec)) / (1.0 + u * u);
        let psi = if u == 0.0 { d - c } else { (sd - sc) / u };
        (chi, psi)
    }

    fn series<F: Fn(f64) -> f64>(&self, v: F) -> f64 {
        let width = self.upper - self.lower;
        let sum: f64 = self
            .weights
            .iter()
            .enumerate()
            .map(|(k, w)| w * v(k as f64 * std::f64::consts::PI / width))
            .sum();
        self.discount() * sum * 2.0 / width
    }

    /// Calls go through put-call parity: the direct series multiplies its
    /// error by `e^{upper}`, the put series is bounded by `K`.
    pub fn call(&self, strike: f64) -> f64 {
        if strike <= 0.0 {
            return self.asset();
        }
        self.put(strike) + self.asset() - strike * self.discount()
    }

    pub fn put(&self, strike: f64) -> f64 {
        if strike <= 0.0 {
            return 0.0;
        }
        let y = strike.ln();
        if y <= self.lower {
            return 0.0;
        }
        let d = y.min(self.upper);
        self.series(|u| {
            let (chi, psi) = self.chi_psi(u, self.lower, d);
            strike * psi - chi
        })
    }

    /// `e^{−rT} E S_T` with `S_0 = 1`, in closed form from the cumulant function.
    pub fn asset(&self) -> f64 {
        (self.log_forward - self.rate * self.maturity).exp()
    }
}
