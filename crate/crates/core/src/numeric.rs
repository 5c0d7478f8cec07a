//! One-dimensional minimization and root bracketing.

use crate::error::{Error, Result};

/// 1/φ, the golden-section contraction factor.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    /// Best point of the initial grid scan, before refinement.
    pub grid_x: f64,
    pub grid_value: f64,
}

/// Golden-section search for a minimum of `f` on `[a, b]`.
///
/// Assumes `f` is unimodal on the interval. Stops once the bracket is
/// narrower than `x_tol` (absolute) or after `max_iter` contractions.
pub fn golden_section<F: FnMut(f64) -> f64>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    x_tol: f64,
    max_iter: usize,
) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..max_iter {
        if (b - a).abs() <= x_tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Scan `grid` evenly spaced points of `[lo, hi]`, then refine the best
/// one by golden-section search between its neighbours.
///
/// Non-finite values of `f` are treated as excluded points. The refined
/// result is never worse than the best grid value.
pub fn minimize_scalar<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, grid: usize) -> Result<Minimum> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::domain(format!("invalid interval [{lo}, {hi}]")));
    }
    if grid < 3 {
        return Err(Error::domain(format!("grid must have at least 3 points, got {grid}")));
    }
    let step = (hi - lo) / (grid - 1) as f64;
    let xs: Vec<f64> = (0..grid).map(|i| if i == grid - 1 { hi } else { lo + step * i as f64 }).collect();

    let mut best: Option<(usize, f64)> = None;
    for (i, &x) in xs.iter().enumerate() {
        let v = f(x);
        if v.is_finite() && best.map_or(true, |(_, bv)| v < bv) {
            best = Some((i, v));
        }
    }
    let (i, grid_value) = best.ok_or_else(|| Error::NoMinimum(format!("no finite value on [{lo:e}, {hi:e}]")))?;
    let grid_x = xs[i];

    let a = xs[i.saturating_sub(1)];
    let b = xs[(i + 1).min(grid - 1)];
    let guarded = |x: f64, f: &mut F| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let x_tol = 1e-12 * (hi - lo).abs().max(lo.abs().max(hi.abs()) * 1e-3);
    let (x, value) = golden_section(|x| guarded(x, &mut f), a, b, x_tol, 200);

    Ok(if value <= grid_value {
        Minimum { x, value, grid_x, grid_value }
    } else {
        Minimum { x: grid_x, value: grid_value, grid_x, grid_value }
    })
}

/// Root of `f` on `[lo, hi]` by secant steps safeguarded with bisection.
///
/// Requires a sign change between the endpoints. Converges when the
/// bracket width drops below `rel_tol · |x|` or `f` hits zero exactly.
pub fn bisect_secant<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, rel_tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::Bracket { lo, hi, f_lo: fa, f_hi: fb });
    }

    for iter in 0..500 {
        let width = (b - a).abs();
        let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        if width <= rel_tol * scale {
            break;
        }
        // Secant through the bracket ends; fall back to bisection every
        // third iteration or when the secant point is outside the middle.
        let secant = b - fb * (b - a) / (fb - fa);
        let mid = 0.5 * (a + b);
        let margin = 0.01 * width;
        let lo_edge = a.min(b) + margin;
        let hi_edge = a.max(b) - margin;
        let x = if iter % 3 != 2 && secant.is_finite() && secant > lo_edge && secant < hi_edge { secant } else { mid };
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if !fx.is_finite() {
            return Err(Error::Bracket { lo: a, hi: b, f_lo: fa, f_hi: fb });
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
    }
    // Return the endpoint with the smaller residual.
    Ok(if fa.abs() < fb.abs() { a } else { b })
}

/// `n` points from `min` to `max` inclusive, linearly or logarithmically
/// spaced. The last point is exactly `max`.
pub fn spaced(min: f64, max: f64, n: usize, log: bool) -> Vec<f64> {
    if n == 1 {
        return vec![min];
    }
    let last = (n - 1) as f64;
    (0..n)
        .map(|i| {
            if i == n - 1 {
                max
            } else if log {
                (min.ln() + (max.ln() - min.ln()) * i as f64 / last).exp()
            } else {
                min + (max - min) * i as f64 / last
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_quadratic_vertex() {
        let (x, v) = golden_section(|x| (x - 1.3).powi(2) + 2.0, -5.0, 5.0, 1e-12, 500);
        assert!((x - 1.3).abs() < 1e-7);
        assert!((v - 2.0).abs() < 1e-13);
    }

    #[test]
    fn minimize_symmetric_quadratic() {
        let m = minimize_scalar(|x| 3.0 * (x + 0.25).powi(2) - 1.0, -2.0, 2.0, 7).unwrap();
        assert!((m.x + 0.25).abs() < 1e-7, "{m:?}");
        assert!(m.value <= m.grid_value);
    }

    #[test]
    fn minimize_skips_nonfinite_points() {
        let m =
            minimize_scalar(|x| if (x - 0.5).abs() < 0.11 { f64::NAN } else { (x - 0.8).abs() }, 0.0, 1.0, 11).unwrap();
        assert!((m.x - 0.8).abs() < 1e-7);
    }

    #[test]
    fn minimize_all_singular() {
        let r = minimize_scalar(|_| f64::INFINITY, 0.0, 1.0, 5);
        assert!(matches!(r, Err(Error::NoMinimum(_))));
    }

    #[test]
    fn minimize_rejects_bad_input() {
        assert!(minimize_scalar(|x| x, 1.0, 0.0, 5).is_err());
        assert!(minimize_scalar(|x| x, 0.0, 1.0, 2).is_err());
    }

    #[test]
    fn root_of_cubic() {
        let r = bisect_secant(|x| x * x * x - 2.0, 0.0, 3.0, 1e-14).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-13);
    }

    #[test]
    fn root_of_flat_then_steep() {
        // Piecewise function, zero below 1: secant alone would stall.
        let f = |x: f64| if x < 1.0 { -1.0 } else { (x - 1.0).powi(4) * 1e6 - 1.0 };
        let r = bisect_secant(f, 0.0, 2.0, 1e-12).unwrap();
        assert!((r - (1.0 + 1e-1f64.powf(1.5))).abs() < 1e-10, "{r}");
    }

    #[test]
    fn root_requires_sign_change() {
        match bisect_secant(|x| x * x + 1.0, -1.0, 1.0, 1e-10) {
            Err(Error::Bracket { f_lo, f_hi, .. }) => {
                assert_eq!(f_lo, 2.0);
                assert_eq!(f_hi, 2.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn spacing() {
        let lin = spaced(0.0, 1.0, 5, false);
        assert_eq!(lin, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let log = spaced(1.0, 1000.0, 4, true);
        assert!((log[1] - 10.0).abs() < 1e-12 && (log[2] - 100.0).abs() < 1e-10);
        assert_eq!(log[3], 1000.0);
    }
}
