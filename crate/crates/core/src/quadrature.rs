//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.
//!
//! The integrand may be real or complex; anything implementing [`QuadValue`]
//! works. Interval bisection always refines the piece with the largest error
//! estimate, in the style of QUADPACK's `qag`.

#![allow(clippy::excessive_precision)]

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

// Kronrod abscissae; odd indices are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Values that can be integrated: real or complex scalars.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn zero() -> Self;
    fn magnitude(self) -> f64;
    fn is_finite_value(self) -> bool;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
    fn is_finite_value(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Stopping rule for one adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rel: 1e-10,
            abs: 1e-13,
            max_intervals: 4000,
        }
    }
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Estimate<T> {
    pub value: T,
    /// Estimated absolute error.
    pub error: f64,
    /// Integral of `|f|`, used by callers to decide when a tail is negligible.
    pub abs_value: f64,
    pub converged: bool,
}

#[derive(Clone, Copy)]
struct Piece<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
    abs_value: f64,
}

fn kronrod15<T: QuadValue, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> Piece<T> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_k = fc.magnitude() * WGK[7];

    let mut fv1 = [T::zero(); 7];
    let mut fv2 = [T::zero(); 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod = kronrod + (f1 + f2) * WGK[j];
        abs_k += WGK[j] * (f1.magnitude() + f2.magnitude());
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[j / 2];
        }
    }

    let mean = kronrod * 0.5;
    let mut asc = WGK[7] * (fc - mean).magnitude();
    for j in 0..7 {
        asc += WGK[j] * ((fv1[j] - mean).magnitude() + (fv2[j] - mean).magnitude());
    }

    let value = kronrod * half;
    let abs_value = abs_k * half.abs();
    let asc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).magnitude();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * abs_value;
    if abs_value > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && floor > error {
        error = floor;
    }

    Piece {
        a,
        b,
        value,
        error,
        abs_value,
    }
}

/// Adaptive integration of `f` over the finite interval `[a, b]`.
///
/// Never evaluates `f` at the endpoints, so integrable endpoint singularities
/// are allowed. On hitting `max_intervals` the best estimate is returned with
/// `converged = false`.
pub fn integrate<T, F>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Estimate<T>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    if a == b {
        return Estimate {
            value: T::zero(),
            error: 0.0,
            abs_value: 0.0,
            converged: true,
        };
    }

    let first = kronrod15(&mut f, a, b);
    let mut pieces = vec![first];
    let mut total = first.value;
    let mut total_err = first.error;
    let mut total_abs = first.abs_value;

    loop {
        let target = tol.abs.max(tol.rel * total.magnitude());
        if total_err <= target || !total.is_finite_value() {
            break;
        }
        if pieces.len() >= tol.max_intervals {
            return Estimate {
                value: total,
                error: total_err,
                abs_value: total_abs,
                converged: false,
            };
        }

        let (worst, _) = pieces
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, p)| {
                if p.error > acc.1 {
                    (i, p.error)
                } else {
                    acc
                }
            });
        let piece = pieces.swap_remove(worst);
        let mid = 0.5 * (piece.a + piece.b);
        // Interval can no longer be split in floating point.
        if mid <= piece.a.min(piece.b) || mid >= piece.a.max(piece.b) {
            pieces.push(piece);
            return Estimate {
                value: total,
                error: total_err,
                abs_value: total_abs,
                converged: false,
            };
        }
        let left = kronrod15(&mut f, piece.a, mid);
        let right = kronrod15(&mut f, mid, piece.b);

        total = total - piece.value + left.value + right.value;
        total_err += left.error + right.error - piece.error;
        total_abs += left.abs_value + right.abs_value - piece.abs_value;

        pieces.push(left);
        pieces.push(right);
    }

    // Re-sum to shed accumulated cancellation from the running updates.
    let value = pieces.iter().fold(T::zero(), |acc, p| acc + p.value);
    let error = pieces.iter().map(|p| p.error).sum();
    let abs_value = pieces.iter().map(|p| p.abs_value).sum();
    Estimate {
        value,
        error,
        abs_value,
        converged: value.is_finite_value(),
    }
}
