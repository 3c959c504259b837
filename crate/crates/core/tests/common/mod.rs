//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use levystab::levy::{IntegrandClass, LevyDensity, LevyModel};
use statrs::distribution::{ContinuousCDF, Normal};

/// `∫ f dν` by the midpoint rule in `u = ln|x|` on each half-line.
///
/// The log grid resolves the `|x|^{−1−α}` pole without any change of
/// variables specific to `α`; `x_max` bounds the support that is kept.
pub fn riemann_levy<F: Fn(f64) -> f64>(d: &LevyDensity, f: F, x_max: f64) -> f64 {
    const STEPS: usize = 400_000;
    let (u_lo, u_hi) = (-46.0, x_max.ln());
    let h = (u_hi - u_lo) / STEPS as f64;
    let mut total = 0.0;
    for sign in [1.0, -1.0] {
        let mut s = 0.0;
        for j in 0..STEPS {
            let u = u_lo + (j as f64 + 0.5) * h;
            let x = sign * u.exp();
            s += f(x) * d.density(x) * u.exp();
        }
        total += s * h;
    }
    total
}

pub fn bs_call(sigma2: f64, t: f64, r: f64, k: f64) -> f64 {
    let n = Normal::new(0.0, 1.0).unwrap();
    let s = (sigma2 * t).sqrt();
    let d1 = (-k.ln() + (r + 0.5 * sigma2) * t) / s;
    n.cdf(d1) - k * (-r * t).exp() * n.cdf(d1 - s)
}

/// `∫|p − p̃|` for two Gaussian densities, by the trapezoid rule on a wide grid.
pub fn gaussian_l1_distance(m1: f64, v1: f64, m2: f64, v2: f64) -> f64 {
    let pdf = |x: f64, m: f64, v: f64| (-(x - m).powi(2) / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt();
    let sd = v1.max(v2).sqrt();
    let (lo, hi) = (m1.min(m2) - 12.0 * sd, m1.max(m2) + 12.0 * sd);
    let steps = 200_000;
    let h = (hi - lo) / steps as f64;
    let mut s = 0.0;
    for j in 0..=steps {
        let x = lo + j as f64 * h;
        let w = if j == 0 || j == steps { 0.5 } else { 1.0 };
        s += w * (pdf(x, m1, v1) - pdf(x, m2, v2)).abs();
    }
    s * h
}

fn sqrt_ratio_gap(m: f64, n: f64, mt: f64, nt: f64) -> impl Fn(f64) -> f64 {
    move |x: f64| {
        let shift = if x > 0.0 { nt - n } else { mt - m };
        (1.0 - (-0.5 * shift * x.abs()).exp()).powi(2)
    }
}

pub struct Case {
    pub name: &'static str,
    pub density: LevyDensity,
    pub f: Box<dyn Fn(f64) -> f64>,
    pub class: IntegrandClass,
}

/// Integrand/model combinations checked against [`riemann_levy`].
pub fn oracle_cases() -> Vec<Case> {
    let vg = LevyModel::variance_gamma(0.0, 0.0, 1.0, 5.0, 5.0).unwrap().density();
    let cg = LevyModel::cgmy(0.0, 0.0, 1.0, 5.0, 5.0, 0.5).unwrap().density();
    let cg15 = LevyModel::cgmy(0.0, 0.0, 1.0, 4.0, 6.0, 1.5).unwrap().density();
    let gmy = LevyModel::gmy(0.0, 0.0, 1.0, 5.0, 0.5).unwrap().density();
    let fin = LevyModel::cgmy(0.0, 0.0, 2.0, 3.0, 7.0, -0.5).unwrap().density();
    let abs_em1 = || Box::new(|x: f64| x.exp_m1().abs()) as Box<dyn Fn(f64) -> f64>;
    let sq = || Box::new(|x: f64| x * x) as Box<dyn Fn(f64) -> f64>;
    use IntegrandClass::*;
    vec![
        Case { name: "VG |e^x-1|", density: vg, f: abs_em1(), class: Linear },
        Case { name: "VG x^2", density: vg, f: sq(), class: Quadratic },
        Case { name: "VG (1-sqrt Y)^2", density: vg, f: Box::new(sqrt_ratio_gap(5.0, 5.0, 5.5, 4.5)), class: Quadratic },
        Case { name: "CGMY(0.5) |e^x-1|", density: cg, f: abs_em1(), class: Linear },
        Case { name: "CGMY(0.5) x^2", density: cg, f: sq(), class: Quadratic },
        Case { name: "CGMY(0.5) (1-sqrt Y)^2", density: cg, f: Box::new(sqrt_ratio_gap(5.0, 5.0, 4.8, 5.3)), class: Quadratic },
        Case { name: "CGMY(1.5) x^2", density: cg15, f: sq(), class: Quadratic },
        Case { name: "CGMY(1.5) (1-sqrt Y)^2", density: cg15, f: Box::new(sqrt_ratio_gap(4.0, 6.0, 4.4, 6.6)), class: Quadratic },
        Case { name: "GMY |e^x-1|", density: gmy, f: abs_em1(), class: Linear },
        Case { name: "GMY (e^x-1)^2", density: gmy, f: Box::new(|x: f64| x.exp_m1().powi(2)), class: Quadratic },
        Case { name: "finite |e^x-1|", density: fin, f: abs_em1(), class: Linear },
        Case { name: "finite mass", density: fin, f: Box::new(|_| 1.0), class: Bounded },
    ]
}
