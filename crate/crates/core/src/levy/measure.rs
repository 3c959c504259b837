//! Lévy measures with tempered-stable branches, Girsanov reweighting, and
//! quadrature of integrands against them.
//!
//! Every in-scope jump measure is a sum of at most two branches
//! `scale · exp(-decay·|x|) / |x|^(1+alpha)`, one per half-line. A measure
//! change multiplies the density by a weight `Y(x)`; the Esscher weight keeps
//! the branch form and is folded in directly, the others are kept symbolic.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, QuadValue, Tolerance};
use crate::roots::Interval;

/// `scale · exp(-decay·|x|) / |x|^(1+alpha)` on one half-line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub scale: f64,
    pub decay: f64,
    pub alpha: f64,
}

impl Branch {
    /// Density at distance `r = |x| > 0` from the origin.
    #[inline]
    pub fn at(&self, r: f64) -> f64 {
        self.scale * (-self.decay * r - (1.0 + self.alpha) * r.ln()).exp()
    }
}

/// A jump measure given by its Lebesgue density on each half-line.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LevyDensity {
    pub positive: Option<Branch>,
    pub negative: Option<Branch>,
}

impl LevyDensity {
    pub const ZERO: LevyDensity = LevyDensity {
        positive: None,
        negative: None,
    };

    pub fn is_zero(&self) -> bool {
        self.positive.is_none() && self.negative.is_none()
    }

    pub fn density(&self, x: f64) -> f64 {
        if x > 0.0 {
            self.positive.map_or(0.0, |b| b.at(x))
        } else if x < 0.0 {
            self.negative.map_or(0.0, |b| b.at(-x))
        } else {
            0.0
        }
    }

    /// Open set of `λ` with `∫_{|x|>1} e^{λx} ν(dx) < ∞`.
    pub fn exp_moment_domain(&self) -> Interval {
        let lower = self.negative.map_or(f64::NEG_INFINITY, |b| -b.decay);
        let upper = self.positive.map_or(f64::INFINITY, |b| b.decay);
        Interval::new(lower, upper)
    }

    /// The Esscher-tilted measure `e^{λx}·ν`, which stays in branch form.
    pub fn esscher(&self, lambda: f64) -> Result<LevyDensity> {
        let dom = self.exp_moment_domain();
        if !(lambda > dom.lower && lambda < dom.upper) {
            return Err(Error::Divergence(format!(
                "Esscher parameter {lambda} outside exponential-moment domain ({}, {})",
                dom.lower, dom.upper
            )));
        }
        Ok(LevyDensity {
            positive: self.positive.map(|b| Branch {
                decay: b.decay - lambda,
                ..b
            }),
            negative: self.negative.map(|b| Branch {
                decay: b.decay + lambda,
                ..b
            }),
        })
    }
}

/// Jump-density ratio `Y(x)` of a measure change.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JumpWeight {
    Identity,
    /// `e^{λx}`
    Esscher { lambda: f64 },
    /// `e^{λ(e^x-1)}`
    Entropy { lambda: f64 },
    /// `(1+(q-1)β(e^x-1))_+^{1/(q-1)}`
    Power { q: f64, beta: f64 },
}

impl JumpWeight {
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            JumpWeight::Identity => 1.0,
            JumpWeight::Esscher { lambda } => (lambda * x).exp(),
            JumpWeight::Entropy { lambda } => (lambda * x.exp_m1()).exp(),
            JumpWeight::Power { q, beta } => {
                let base = 1.0 + (q - 1.0) * beta * x.exp_m1();
                if base <= 0.0 {
                    0.0
                } else {
                    base.powf(1.0 / (q - 1.0))
                }
            }
        }
    }

    /// Effect of the weight on the exponential-moment domain of `density`.
    fn adjust_domain(&self, density: &LevyDensity, dom: Interval) -> Interval {
        let empty = Interval::new(0.0, 0.0);
        match *self {
            JumpWeight::Identity => dom,
            JumpWeight::Esscher { lambda } => Interval::new(dom.lower - lambda, dom.upper - lambda),
            JumpWeight::Entropy { lambda } => {
                if lambda < 0.0 && density.positive.is_some() {
                    Interval::new(dom.lower, f64::INFINITY)
                } else if lambda > 0.0 && density.positive.is_some() {
                    empty
                } else {
                    dom
                }
            }
            JumpWeight::Power { q, beta } => {
                let s = (q - 1.0) * beta;
                let exponent = 1.0 / (q - 1.0);
                let mut out = dom;
                if density.positive.is_some() {
                    if s > 0.0 {
                        out.upper -= exponent;
                    } else if s < 0.0 {
                        if q < 1.0 {
                            return empty;
                        }
                        out.upper = f64::INFINITY;
                    }
                }
                if density.negative.is_some() {
                    let floor = 1.0 - s;
                    if floor < 0.0 {
                        if q < 1.0 {
                            return empty;
                        }
                        out.lower = f64::NEG_INFINITY;
                    } else if floor == 0.0 {
                        out.lower -= exponent;
                    }
                }
                out
            }
        }
    }
}

/// Behaviour of an integrand near the origin, `|f(x)| = O(|x|^p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegrandClass {
    Bounded,
    Linear,
    Quadratic,
}

impl IntegrandClass {
    pub fn order(self) -> f64 {
        match self {
            IntegrandClass::Bounded => 0.0,
            IntegrandClass::Linear => 1.0,
            IntegrandClass::Quadratic => 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularityTransform {
    None,
    PowerTransform,
}

/// Accuracy and domain-splitting settings for [`integrate_levy`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub split_points: Vec<f64>,
    pub singularity_transform: SingularityTransform,
    pub max_subdivisions: usize,
    pub max_tail_panels: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            split_points: vec![-1.0, 0.0, 1.0],
            singularity_transform: SingularityTransform::PowerTransform,
            max_subdivisions: 4000,
            max_tail_panels: 48,
        }
    }
}

impl QuadratureConfig {
    /// Tighter settings used inside root-finders and bound computations.
    pub fn precise() -> Self {
        Self {
            rel_tol: 1e-11,
            abs_tol: 1e-14,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidParameter(
                "quadrature tolerances must be positive".into(),
            ));
        }
        Ok(())
    }

    fn tolerance(&self) -> Tolerance {
        Tolerance {
            rel: self.rel_tol,
            abs: self.abs_tol,
            max_intervals: self.max_subdivisions,
        }
    }

    /// Split points on one side, as ascending distances from the origin.
    fn side_splits(&self, sign: f64) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .split_points
            .iter()
            .filter(|p| **p * sign > 0.0 && p.is_finite())
            .map(|p| p.abs())
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        if pts.is_empty() {
            pts.push(1.0);
        }
        pts
    }
}

/// `∫ f dν` over `ℝ \ {0}` for a measure given by `density`.
///
/// Each half-line is split at the configured points. The innermost piece
/// `(0, p₁]` uses the substitution `x = p₁·t^{1/(p-α)}` so that an integrand of
/// declared order `p` against `|x|^{-1-α}` becomes bounded in `t`. Tails with
/// exponential decay are integrated on doubling panels until a panel's
/// contribution is negligible; pure power tails use `x = p_k·s^{-1/α}`.
pub fn integrate_levy<T, F>(
    density: &LevyDensity,
    f: F,
    class: IntegrandClass,
    cfg: &QuadratureConfig,
) -> Result<T>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let mut total = T::zero();
    if let Some(b) = density.positive {
        total = total + integrate_side(&b, 1.0, &f, class, cfg)?;
    }
    if let Some(b) = density.negative {
        total = total + integrate_side(&b, -1.0, &f, class, cfg)?;
    }
    if !total.is_finite_value() {
        return Err(Error::Divergence("integral is not finite".into()));
    }
    Ok(total)
}

fn side_name(sign: f64) -> &'static str {
    if sign > 0.0 {
        "positive half-line"
    } else {
        "negative half-line"
    }
}

fn checked<T: QuadValue>(est: quadrature::Estimate<T>, piece: String) -> Result<T> {
    if !est.value.is_finite_value() {
        return Err(Error::Divergence(format!("non-finite values on {piece}")));
    }
    if !est.converged {
        return Err(Error::Quadrature {
            piece,
            estimate: est.error,
        });
    }
    Ok(est.value)
}

fn integrate_side<T, F>(
    branch: &Branch,
    sign: f64,
    f: &F,
    class: IntegrandClass,
    cfg: &QuadratureConfig,
) -> Result<T>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let tol = cfg.tolerance();
    let splits = cfg.side_splits(sign);
    let name = side_name(sign);
    let p1 = splits[0];

    let exponent = class.order() - branch.alpha;
    if exponent <= 0.0 {
        return Err(Error::Divergence(format!(
            "integrand of order {} is not integrable at 0 against |x|^(-1-{}) on the {name}",
            class.order(),
            branch.alpha
        )));
    }

    let mut total = match cfg.singularity_transform {
        SingularityTransform::PowerTransform => {
            let gamma = 1.0 / exponent;
            let g = |t: f64| {
                let x = p1 * t.powf(gamma);
                let jac = p1 * gamma * t.powf(gamma - 1.0);
                f(sign * x) * (branch.at(x) * jac)
            };
            checked(
                quadrature::integrate(g, 0.0, 1.0, tol),
                format!("core (0, {p1}] of the {name}"),
            )?
        }
        SingularityTransform::None => {
            let g = |x: f64| f(sign * x) * branch.at(x);
            checked(
                quadrature::integrate(g, 0.0, p1, tol),
                format!("core (0, {p1}] of the {name}"),
            )?
        }
    };

    for w in splits.windows(2) {
        let g = |x: f64| f(sign * x) * branch.at(x);
        total = total
            + checked(
                quadrature::integrate(g, w[0], w[1], tol),
                format!("[{}, {}] of the {name}", w[0], w[1]),
            )?;
    }

    let start = *splits.last().unwrap();
    let tail = if branch.decay == 0.0 && branch.alpha > 0.0 {
        let factor = branch.scale * start.powf(-branch.alpha) / branch.alpha;
        let g = |s: f64| f(sign * start * s.powf(-1.0 / branch.alpha)) * factor;
        checked(
            quadrature::integrate(g, 0.0, 1.0, tol),
            format!("power tail of the {name}"),
        )?
    } else {
        integrate_panels(branch, sign, f, start, cfg, name)?
    };
    Ok(total + tail)
}

fn integrate_panels<T, F>(
    branch: &Branch,
    sign: f64,
    f: &F,
    start: f64,
    cfg: &QuadratureConfig,
    name: &str,
) -> Result<T>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let tol = cfg.tolerance();
    let g = |x: f64| {
        let d = branch.at(x);
        let v = f(sign * x);
        // Past the overflow of f the density has underflowed: the product
        // is far below anything the tolerance can see.
        if d < 1e-300 && !v.is_finite_value() {
            T::zero()
        } else {
            v * d
        }
    };
    let mut acc = T::zero();
    let mut x0 = start;
    let mut width = start.max(1.0);
    let mut prev_small = false;
    for j in 0..cfg.max_tail_panels {
        let est = quadrature::integrate(g, x0, x0 + width, tol);
        let value = checked(est, format!("tail panel [{x0}, {}] of the {name}", x0 + width))?;
        acc = acc + value;
        let small = est.abs_value <= 0.1 * cfg.abs_tol.max(cfg.rel_tol * acc.magnitude());
        if j >= 1 && small && prev_small {
            return Ok(acc);
        }
        prev_small = small;
        x0 += width;
        width *= 2.0;
    }
    Err(Error::Divergence(format!(
        "tail integral on the {name} does not settle before x = {x0:e}"
    )))
}

/// Truncation function `l(x) = x·1{|x|≤1}`.
#[inline]
pub fn truncation(x: f64) -> f64 {
    if x.abs() <= 1.0 {
        x
    } else {
        0.0
    }
}

/// A Lévy triplet `(b, c, Y·ν)` with `b` taken relative to [`truncation`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triplet {
    pub drift: f64,
    pub diffusion: f64,
    pub density: LevyDensity,
    pub weight: JumpWeight,
}

impl Triplet {
    pub fn new(drift: f64, diffusion: f64, density: LevyDensity) -> Self {
        Self {
            drift,
            diffusion,
            density,
            weight: JumpWeight::Identity,
        }
    }

    pub fn has_jumps(&self) -> bool {
        !self.density.is_zero()
    }

    /// Density of the (possibly reweighted) jump measure at `x ≠ 0`.
    pub fn jump_density(&self, x: f64) -> f64 {
        self.density.density(x) * self.weight.eval(x)
    }

    /// `∫ f dν` for the reweighted jump measure.
    pub fn integrate<T, F>(&self, f: F, class: IntegrandClass, cfg: &QuadratureConfig) -> Result<T>
    where
        T: QuadValue,
        F: Fn(f64) -> T,
    {
        if self.density.is_zero() {
            return Ok(T::zero());
        }
        match self.weight {
            JumpWeight::Identity => integrate_levy(&self.density, f, class, cfg),
            JumpWeight::Esscher { lambda } => integrate_levy(&self.density.esscher(lambda)?, f, class, cfg),
            w => integrate_levy(&self.density, |x| f(x) * w.eval(x), class, cfg),
        }
    }

    /// Open set of real `λ` with `E e^{λX_1} < ∞`.
    pub fn exp_moment_domain(&self) -> Interval {
        if self.density.is_zero() {
            return Interval::REAL_LINE;
        }
        self.weight
            .adjust_domain(&self.density, self.density.exp_moment_domain())
    }

    /// `ψ(u)` with `E e^{iuX_t} = e^{tψ(u)}`.
    pub fn characteristic_exponent(&self, u: Complex64, cfg: &QuadratureConfig) -> Result<Complex64> {
        let i = Complex64::i();
        let gauss = i * self.drift * u - 0.5 * u * u * self.diffusion;
        if self.density.is_zero() {
            return Ok(gauss);
        }
        let tilt = -u.im;
        let dom = self.exp_moment_domain();
        if tilt != 0.0 && !dom.contains(tilt) {
            return Err(Error::Divergence(format!(
                "Im(u) = {} outside the strip: need -Im(u) in ({}, {})",
                u.im, dom.lower, dom.upper
            )));
        }
        if self.weight == JumpWeight::Identity {
            let w = i * u;
            let pos = self.density.positive.map(|b| branch_exponent(&b, w));
            let neg = self.density.negative.map(|b| branch_exponent(&b, -w));
            if !matches!(pos, Some(None)) && !matches!(neg, Some(None)) {
                return Ok(gauss + pos.flatten().unwrap_or_default() + neg.flatten().unwrap_or_default());
            }
        }
        self.characteristic_exponent_quadrature(u, cfg)
    }

    /// `ψ(u)` with the jump part always computed by quadrature.
    pub fn characteristic_exponent_quadrature(&self, u: Complex64, cfg: &QuadratureConfig) -> Result<Complex64> {
        let i = Complex64::i();
        let gauss = i * self.drift * u - 0.5 * u * u * self.diffusion;
        if self.density.is_zero() {
            return Ok(gauss);
        }
        let jumps: Complex64 = self.integrate(
            |x| cexpm1(i * u * x) - i * u * truncation(x),
            IntegrandClass::Quadratic,
            cfg,
        )?;
        Ok(gauss + jumps)
    }

    /// Cumulant generating function `κ(θ) = ψ(-iθ) = log E e^{θX_1}` for real `θ`.
    pub fn cumulant_generating(&self, theta: f64, cfg: &QuadratureConfig) -> Result<f64> {
        let dom = self.exp_moment_domain();
        if theta != 0.0 && !dom.contains(theta) {
            return Err(Error::Divergence(format!(
                "θ = {theta} outside exponential-moment domain ({}, {})",
                dom.lower, dom.upper
            )));
        }
        let jumps: f64 = self.integrate(
            |x| (theta * x).exp_m1() - theta * truncation(x),
            IntegrandClass::Quadratic,
            cfg,
        )?;
        Ok(self.drift * theta + 0.5 * theta * theta * self.diffusion + jumps)
    }

    /// `E X_1`.
    pub fn mean(&self, cfg: &QuadratureConfig) -> Result<f64> {
        let big: f64 = self.integrate(|x| x - truncation(x), IntegrandClass::Quadratic, cfg)?;
        Ok(self.drift + big)
    }

    /// `Var X_1 = c + ∫x² dν`.
    pub fn variance(&self, cfg: &QuadratureConfig) -> Result<f64> {
        let jumps: f64 = self.integrate(|x| x * x, IntegrandClass::Quadratic, cfg)?;
        Ok(self.diffusion + jumps)
    }
}

/// `∫_0^∞ (e^{wx} − 1 − w·l(x)) C e^{−κx} x^{−1−α} dx` in closed form, for
/// `Re w < κ`. `None` when `κ = 0` or `α = 1`.
fn branch_exponent(b: &Branch, w: Complex64) -> Option<Complex64> {
    use statrs::function::gamma::{gamma, gamma_li, gamma_ui};
    let (c, k, a) = (b.scale, b.decay, b.alpha);
    if k <= 0.0 || a == 1.0 {
        return None;
    }
    let kc = Complex64::new(k, 0.0);
    if a == 0.0 {
        let near = c * (1.0 - (-k).exp()) / k;
        return Some(-c * (1.0 - w / k).ln() - w * near);
    }
    let g = c * gamma(-a);
    if a < 1.0 {
        // ∫_0^1 x·ν(dx) = C κ^{α−1} γ(1−α, κ)
        let near = c * k.powf(a - 1.0) * gamma_li(1.0 - a, k);
        Some(g * ((kc - w).powf(a) - k.powf(a)) - w * near)
    } else {
        // ∫_1^∞ x·ν(dx) = C κ^{α−1} Γ(1−α, κ), with Γ(s, κ) = (Γ(s+1, κ) − κ^s e^{−κ})/s
        let s = 1.0 - a;
        let upper = (gamma_ui(s + 1.0, k) - k.powf(s) * (-k).exp()) / s;
        let far = c * k.powf(a - 1.0) * upper;
        Some(g * ((kc - w).powf(a) - k.powf(a) + w * a * k.powf(a - 1.0)) + w * far)
    }
}

/// `e^z - 1` without cancellation for small `|z|`.
#[inline]
pub(crate) fn cexpm1(z: Complex64) -> Complex64 {
    if z.norm_sqr() < 1e-6 {
        z * (1.0 + z * (0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0 + z / 120.0))))
    } else if z.im == 0.0 {
        Complex64::new(z.re.exp_m1(), 0.0)
    } else {
        let (s, c) = z.im.sin_cos();
        let er = z.re.exp_m1();
        // e^{a}(cos b + i sin b) - 1 = (e^a - 1)cos b + (cos b - 1) + i e^a sin b
        let half = (0.5 * z.im).sin();
        Complex64::new(er * c - 2.0 * half * half, (er + 1.0) * s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vg(c: f64, m: f64, n: f64) -> LevyDensity {
        LevyDensity {
            positive: Some(Branch {
                scale: c,
                decay: n,
                alpha: 0.0,
            }),
            negative: Some(Branch {
                scale: c,
                decay: m,
                alpha: 0.0,
            }),
        }
    }

    #[test]
    fn closed_form_exponent_matches_quadrature() {
        let cfg = QuadratureConfig::precise();
        for alpha in [-0.5, 0.0, 0.5, 1.5] {
            let d = LevyDensity {
                positive: Some(Branch { scale: 0.7, decay: 4.0, alpha }),
                negative: Some(Branch { scale: 1.3, decay: 2.5, alpha }),
            };
            let t = Triplet::new(0.1, 0.02, d);
            for u in [Complex64::new(0.3, 0.0), Complex64::new(7.0, -1.2), Complex64::new(-40.0, 0.5)] {
                let a = t.characteristic_exponent(u, &cfg).unwrap();
                let b = t.characteristic_exponent_quadrature(u, &cfg).unwrap();
                assert!((a - b).norm() <= 1e-8 * (1.0 + b.norm()), "alpha={alpha} u={u}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn cexpm1_matches_exp() {
        for z in [
            Complex64::new(1e-9, 2e-9),
            Complex64::new(0.3, -0.7),
            Complex64::new(-2.0, 5.0),
            Complex64::new(0.0, 1e-4),
        ] {
            let direct = z.exp() - 1.0;
            assert!((cexpm1(z) - direct).norm() <= 1e-15 * (1.0 + direct.norm()) * 10.0);
        }
    }

    #[test]
    fn vg_second_moment_closed_form() {
        // ∫x² C e^{-Mx}/x dx over x>0 is C/M²
        let d = vg(1.0, 5.0, 4.0);
        let v: f64 = integrate_levy(&d, |x| x * x, IntegrandClass::Quadratic, &QuadratureConfig::default()).unwrap();
        let exact = 1.0 / 25.0 + 1.0 / 16.0;
        assert!((v - exact).abs() < 1e-12, "{v} vs {exact}");
    }

    #[test]
    fn zero_integrand_is_zero() {
        let d = vg(1.0, 5.0, 5.0);
        let v: f64 = integrate_levy(&d, |_| 0.0, IntegrandClass::Quadratic, &QuadratureConfig::default())
            .unwrap_or_else(|e| panic!("{e}"));
        assert_eq!(v, 0.0);
    }

    #[test]
    fn bounded_class_diverges_for_infinite_activity() {
        let d = vg(1.0, 5.0, 5.0);
        let r: Result<f64> = integrate_levy(&d, |_| 1.0, IntegrandClass::Bounded, &QuadratureConfig::default());
        assert!(matches!(r, Err(Error::Divergence(_))));
    }

    #[test]
    fn finite_activity_mass() {
        // alpha = -1: ∫ C e^{-Nx} dx = C/N on each side
        let b = Branch {
            scale: 2.0,
            decay: 3.0,
            alpha: -1.0,
        };
        let d = LevyDensity {
            positive: Some(b),
            negative: Some(b),
        };
        let v: f64 = integrate_levy(&d, |_| 1.0, IntegrandClass::Bounded, &QuadratureConfig::default()).unwrap();
        assert!((v - 4.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn power_tail_without_decay() {
        // symmetric stable, alpha=1.2: ∫_{|x|>1} C|x|^{-2.2} = 2C/1.2
        let b = Branch {
            scale: 1.0,
            decay: 0.0,
            alpha: 1.2,
        };
        let d = LevyDensity {
            positive: Some(b),
            negative: Some(b),
        };
        let v: f64 = integrate_levy(
            &d,
            |x: f64| if x.abs() > 1.0 { 1.0 } else { 0.0 },
            IntegrandClass::Quadratic,
            &QuadratureConfig::default(),
        )
        .unwrap();
        assert!((v - 2.0 / 1.2).abs() < 1e-9, "{v}");
    }

    #[test]
    fn growing_tail_detected() {
        // e^x against e^{-0.5x}/x on (1, ∞) diverges
        let d = vg(1.0, 5.0, 0.5);
        let r: Result<f64> = integrate_levy(&d, |x: f64| x.exp_m1(), IntegrandClass::Linear, &QuadratureConfig::default());
        assert!(r.is_err());
    }

    #[test]
    fn custom_split_points_agree() {
        let d = vg(1.0, 3.0, 6.0);
        let f = |x: f64| x.exp_m1().powi(2);
        let base: f64 = integrate_levy(&d, f, IntegrandClass::Quadratic, &QuadratureConfig::default()).unwrap();
        let cfg = QuadratureConfig {
            split_points: vec![-2.0, -1.0, -0.25, 0.0, 0.5, 1.0, 3.0],
            ..QuadratureConfig::default()
        };
        let split: f64 = integrate_levy(&d, f, IntegrandClass::Quadratic, &cfg).unwrap();
        assert!((base - split).abs() < 1e-10 * base.abs());
    }

    #[test]
    fn esscher_fold_matches_weight() {
        let d = vg(1.0, 5.0, 5.0);
        let tilted = Triplet::new(0.0, 0.0, d.esscher(-0.7).unwrap());
        let weighted = Triplet {
            weight: JumpWeight::Esscher { lambda: -0.7 },
            ..Triplet::new(0.0, 0.0, d)
        };
        let cfg = QuadratureConfig::precise();
        for u in [0.3, 1.0, 7.5] {
            let a = tilted.characteristic_exponent(Complex64::new(u, 0.0), &cfg).unwrap();
            let b = weighted.characteristic_exponent(Complex64::new(u, 0.0), &cfg).unwrap();
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn power_weight_truncates() {
        let w = JumpWeight::Power { q: 2.0, beta: -0.5 };
        // base = 1 - 0.5(e^x - 1) hits 0 at x = ln 3
        assert_eq!(w.eval(2.0), 0.0);
        assert!((w.eval(0.0) - 1.0).abs() < 1e-15);
        assert!(w.eval(1.0) > 0.0);
    }
}
