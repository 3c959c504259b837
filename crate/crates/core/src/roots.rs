//! Bracketing and Brent's method for monotone scalar equations.
//!
//! Callers supply an open admissible interval (possibly unbounded) on which
//! the function is finite and nondecreasing. The bracket search starts from a
//! point inside, walks in the direction of the sign change with doubling
//! steps, and stops at the interval edge shrunk by [`EDGE_MARGIN`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance kept from each finite edge of the admissible interval.
pub const EDGE_MARGIN: f64 = 1e-6;

const MAX_ABS_ARGUMENT: f64 = 1e8;

/// Open interval `(lower, upper)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
    };

    pub fn new(lower: f64, upper: f64) -> Self {
        Self { lower, upper }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lower && x < self.upper
    }

    pub fn is_empty(&self) -> bool {
        self.lower >= self.upper
    }

    /// Closed interval obtained by moving finite edges inward by `margin`.
    pub fn shrunk(&self, margin: f64) -> Option<(f64, f64)> {
        let lo = if self.lower.is_finite() {
            self.lower + margin
        } else {
            f64::NEG_INFINITY
        };
        let hi = if self.upper.is_finite() {
            self.upper - margin
        } else {
            f64::INFINITY
        };
        (lo <= hi).then_some((lo, hi))
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        Interval::new(self.lower.max(other.lower), self.upper.min(other.upper))
    }
}

/// A sign-changing pair `f(a) <= 0 <= f(b)` with `a < b` (or an exact root).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub a: f64,
    pub fa: f64,
    pub b: f64,
    pub fb: f64,
}

/// Result of a converged root search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootReport {
    pub root: f64,
    pub residual: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
}

/// Finds a sign change of a nondecreasing `f` inside `domain`.
pub fn bracket_monotone<F>(f: &mut F, domain: Interval, start: f64) -> Result<Bracket>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (lo, hi) = domain.shrunk(EDGE_MARGIN).ok_or_else(|| {
        Error::Divergence(format!(
            "admissible interval ({}, {}) is degenerate",
            domain.lower, domain.upper
        ))
    })?;
    let x0 = start.clamp(lo, hi);
    let f0 = f(x0)?;
    if f0 == 0.0 {
        return Ok(Bracket {
            a: x0,
            fa: f0,
            b: x0,
            fb: f0,
        });
    }
    let dir = if f0 > 0.0 { -1.0 } else { 1.0 };
    let edge = if dir < 0.0 { lo } else { hi };

    let (mut xg, mut fg) = (x0, f0);
    let mut step = 0.5;
    loop {
        if xg == edge {
            return Err(Error::NoSolution(format!(
                "no sign change on [{lo}, {hi}]; value {fg:.6e} at {xg}"
            )));
        }
        let mut x1 = xg + dir * step;
        if (dir < 0.0 && x1 < edge) || (dir > 0.0 && x1 > edge) {
            x1 = edge;
        }
        if x1.abs() > MAX_ABS_ARGUMENT {
            return Err(Error::NoSolution(format!(
                "no sign change within |x| <= {MAX_ABS_ARGUMENT:e}"
            )));
        }
        // Points close to the edge may be numerically unevaluable; back off
        // toward the last good point.
        let mut attempt = f(x1);
        let mut retries = 0;
        while attempt.is_err() && retries < 40 {
            x1 = 0.5 * (xg + x1);
            attempt = f(x1);
            retries += 1;
        }
        let f1 = attempt?;
        if f1 == 0.0 || (f1 > 0.0) != (fg > 0.0) {
            return Ok(if xg < x1 {
                Bracket {
                    a: xg,
                    fa: fg,
                    b: x1,
                    fb: f1,
                }
            } else {
                Bracket {
                    a: x1,
                    fa: f1,
                    b: xg,
                    fb: fg,
                }
            });
        }
        if retries > 0 {
            // Could not step as far as requested: the reachable edge is x1.
            if (x1 - xg).abs() < 1e-14 * (1.0 + xg.abs()) {
                return Err(Error::NoSolution(format!(
                    "no sign change before the function became unevaluable near {x1}"
                )));
            }
        }
        xg = x1;
        fg = f1;
        step *= 2.0;
    }
}

/// Brent's method on a bracket. `xtol` is an absolute tolerance on the root.
pub fn brent<F>(f: &mut F, bracket: Bracket, xtol: f64, max_iter: usize) -> Result<RootReport>
where
    F: FnMut(f64) -> Result<f64>,
{
    let Bracket {
        mut a,
        mut fa,
        mut b,
        mut fb,
    } = bracket;
    let original = (bracket.a, bracket.b);
    if fa == 0.0 {
        return Ok(RootReport {
            root: a,
            residual: 0.0,
            bracket: original,
            iterations: 0,
        });
    }
    if fb == 0.0 {
        return Ok(RootReport {
            root: b,
            residual: 0.0,
            bracket: original,
            iterations: 0,
        });
    }
    if (fa > 0.0) == (fb > 0.0) {
        return Err(Error::NoSolution("bracket has no sign change".into()));
    }

    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for iter in 1..=max_iter {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(RootReport {
                root: b,
                residual: fb,
                bracket: original,
                iterations: iter,
            });
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b)?;
    }
    Err(Error::NoSolution(format!(
        "Brent iteration did not converge in {max_iter} steps"
    )))
}

/// Bracket then polish: the usual entry point for monotone equations.
pub fn solve_monotone<F>(mut f: F, domain: Interval, start: f64, xtol: f64) -> Result<RootReport>
where
    F: FnMut(f64) -> Result<f64>,
{
    let bracket = bracket_monotone(&mut f, domain, start)?;
    if bracket.a == bracket.b {
        return Ok(RootReport {
            root: bracket.a,
            residual: bracket.fa,
            bracket: (bracket.a, bracket.b),
            iterations: 0,
        });
    }
    brent(&mut f, bracket, xtol, 200)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_root_unbounded_domain() {
        let rep = solve_monotone(|x| Ok(3.0 * x - 40.0), Interval::REAL_LINE, 0.0, 1e-12).unwrap();
        assert!((rep.root - 40.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn respects_open_domain() {
        // root at 2 lies outside (-1, 1)
        let err = solve_monotone(|x| Ok(x - 2.0), Interval::new(-1.0, 1.0), 0.0, 1e-12);
        assert!(matches!(err, Err(Error::NoSolution(_))));
    }

    #[test]
    fn degenerate_domain_is_divergence() {
        let err = solve_monotone(Ok, Interval::new(0.0, 0.0), 0.0, 1e-12);
        assert!(matches!(err, Err(Error::Divergence(_))));
    }

    #[test]
    fn backs_off_unevaluable_points() {
        // f blows up (errors) beyond 0.9; the root at 0.7 must still be found.
        let f = |x: f64| {
            if x > 0.9 {
                Err(Error::Divergence("edge".into()))
            } else {
                Ok((x - 0.7) / (1.0 - x))
            }
        };
        let rep = solve_monotone(f, Interval::new(-5.0, 1.0), 0.0, 1e-13).unwrap();
        assert!((rep.root - 0.7).abs() < 1e-12);
    }

    #[test]
    fn nonlinear_root() {
        let rep = solve_monotone(|x: f64| Ok(x.exp() - 5.0), Interval::REAL_LINE, 0.0, 1e-13).unwrap();
        assert!((rep.root - 5f64.ln()).abs() < 1e-12);
        assert!(rep.residual.abs() < 1e-11);
    }
}
