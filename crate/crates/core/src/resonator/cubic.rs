//! Self-consistent detuning of a Duffing (kinetic-inductance) resonator.
//!
//! With `y0 = Q_r (f − f0)/f0` the generator detuning and `a` the
//! nonlinearity, the resonator detuning `y` solves
//! `4y³ − 4y0 y² + y − y0 − a = 0`, equivalently `y − y0 = a / (1 + 4y²)`.
//! Every real root therefore lies in `[y0, y0 + a]`.

use serde::{Deserialize, Serialize};

use crate::units::A_CRIT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepDirection {
    #[default]
    Up,
    Down,
}

fn residual(y: f64, y0: f64, a: f64) -> f64 {
    y - y0 - a / (1.0 + 4.0 * y * y)
}

fn residual_slope(y: f64, a: f64) -> f64 {
    let s = 1.0 + 4.0 * y * y;
    1.0 + 8.0 * a * y / (s * s)
}

/// Root of the detuning equation inside `[lo, hi]`, where the residual
/// changes sign. Newton steps that leave the bracket fall back to bisection.
fn bracketed_root(y0: f64, a: f64, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = residual(lo, y0, a);
    if f_lo == 0.0 {
        return lo;
    }
    let f_hi = residual(hi, y0, a);
    if f_hi == 0.0 {
        return hi;
    }
    let rising = f_lo < 0.0;
    let mut y = 0.5 * (lo + hi);
    for _ in 0..200 {
        let f = residual(y, y0, a);
        if f == 0.0 {
            return y;
        }
        if (f < 0.0) == rising {
            lo = y;
        } else {
            hi = y;
        }
        let slope = residual_slope(y, a);
        let newton = y - f / slope;
        let next = if slope != 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        let tol = 4.0 * f64::EPSILON * next.abs().max(1e-300);
        if (next - y).abs() <= tol || hi - lo <= tol {
            return next;
        }
        y = next;
    }
    y
}

/// Stationary points of the cubic `4y³ − 4y0 y² + y − y0 − a`, if any.
fn stationary_points(y0: f64) -> Option<(f64, f64)> {
    let disc = 4.0 * y0 * y0 - 3.0;
    if disc <= 0.0 {
        return None;
    }
    let r = disc.sqrt();
    Some(((2.0 * y0 - r) / 6.0, (2.0 * y0 + r) / 6.0))
}

/// All real roots `y` of `4y³ − 4y0 y² + y − y0 − a = 0`, ascending.
///
/// Returns one root, or three when the drive sits inside the bistable window
/// (a double root is reported twice).
pub fn solve_detuning(y0: f64, a: f64) -> Vec<f64> {
    if a == 0.0 {
        return vec![y0];
    }
    let (lo, hi) = (y0.min(y0 + a), y0.max(y0 + a));
    let Some((s1, s2)) = stationary_points(y0) else {
        return vec![bracketed_root(y0, a, lo, hi)];
    };
    let f1 = residual(s1, y0, a);
    let f2 = residual(s2, y0, a);
    if f1 >= 0.0 && f2 <= 0.0 && s1 >= lo && s2 <= hi {
        let r1 = if f1 == 0.0 { s1 } else { bracketed_root(y0, a, lo, s1) };
        let r2 = if f1 == 0.0 {
            s1
        } else if f2 == 0.0 {
            s2
        } else {
            bracketed_root(y0, a, s1, s2)
        };
        let r3 = if f2 == 0.0 { s2 } else { bracketed_root(y0, a, s2, hi) };
        return vec![r1, r2, r3];
    }
    if f1 < 0.0 {
        vec![bracketed_root(y0, a, s2.max(lo), hi)]
    } else {
        vec![bracketed_root(y0, a, lo, s1.min(hi))]
    }
}

/// Root followed by an adiabatic sweep: the smallest root on the way up, the
/// largest on the way down.
pub fn branch_detuning(y0: f64, a: f64, direction: SweepDirection) -> f64 {
    let roots = solve_detuning(y0, a);
    match direction {
        SweepDirection::Up => roots[0],
        SweepDirection::Down => roots[roots.len() - 1],
    }
}

/// Interval of generator detuning `y0` with three roots, if `a > a_crit`.
///
/// The edges are the fold points where `(1 + 4y²)² + 8ay = 0`.
pub fn bistable_window(a: f64) -> Option<(f64, f64)> {
    if !(a > A_CRIT) {
        return None;
    }
    let fold = |y: f64| {
        let s = 1.0 + 4.0 * y * y;
        s * s + 8.0 * a * y
    };
    // fold(y) is smallest where 2y(1 + 4y²) = −a, somewhere in [−a/2, 0]
    let bisect = |mut lo: f64, mut hi: f64, g: &dyn Fn(f64) -> f64| {
        let rising = g(lo) < 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (g(mid) < 0.0) == rising {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let y_star = bisect(-0.5 * a, 0.0, &|y| 2.0 * y * (1.0 + 4.0 * y * y) + a);
    if fold(y_star) >= 0.0 {
        return None;
    }
    let far = -(0.5 * a).cbrt() - 1.0;
    let y_left = bisect(far, y_star, &fold);
    let y_right = bisect(y_star, 0.0, &fold);
    let to_y0 = |y: f64| y - a / (1.0 + 4.0 * y * y);
    let (e1, e2) = (to_y0(y_left), to_y0(y_right));
    Some((e1.min(e2), e1.max(e2)))
}
