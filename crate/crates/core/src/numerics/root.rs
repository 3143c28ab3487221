//! Bisection on monotone functions, in linear or logarithmic coordinates.

use crate::error::{KmodelError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }
}

/// Finds `x` in `bracket` with `f(x) = 0` by plain bisection. Stops when the
/// bracket width is at most `abs_tol`.
pub fn bisect<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    bracket: Bracket,
    abs_tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let Bracket { mut lo, mut hi } = bracket;
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    check_bracket(lo, hi, f_lo, f_hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= abs_tol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Err(KmodelError::Solver(format!(
        "bisection did not converge in {max_iter} iterations (bracket [{lo:e}, {hi:e}])"
    )))
}

/// Bisection on `ln x` for positive brackets spanning many decades. Stops when
/// `ln(hi/lo) <= rel_tol`, i.e. the root is known to relative precision `rel_tol`,
/// and returns the geometric midpoint.
pub fn bisect_log<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    bracket: Bracket,
    rel_tol: f64,
    max_iter: usize,
) -> Result<f64> {
    if !(bracket.lo > 0.0 && bracket.hi > bracket.lo) {
        return Err(KmodelError::Solver(format!(
            "log bisection needs 0 < lo < hi, got [{:e}, {:e}]",
            bracket.lo, bracket.hi
        )));
    }
    let lo = bracket.lo.ln();
    let hi = bracket.hi.ln();
    let log_root = bisect(|y| f(y.exp()), Bracket::new(lo, hi), rel_tol, max_iter)?;
    Ok(log_root.exp())
}

fn check_bracket(lo: f64, hi: f64, f_lo: f64, f_hi: f64) -> Result<()> {
    if !f_lo.is_finite() || !f_hi.is_finite() {
        return Err(KmodelError::Solver(format!(
            "function is not finite at the bracket ends ({f_lo:e}, {f_hi:e})"
        )));
    }
    if f_lo != 0.0 && f_hi != 0.0 && (f_lo > 0.0) == (f_hi > 0.0) {
        return Err(KmodelError::Solver(format!(
            "no sign change on [{lo:e}, {hi:e}]: f = {f_lo:e}, {f_hi:e}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_bisection_finds_sqrt2() {
        let r = bisect(|x| Ok(x * x - 2.0), Bracket::new(0.0, 2.0), 1e-14, 200).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-13);
    }

    #[test]
    fn log_bisection_spans_decades() {
        let target: f64 = 3.7e-17;
        let r = bisect_log(|x| Ok(x.cbrt() - target.cbrt()), Bracket::new(1e-40, 1e40), 1e-9, 200).unwrap();
        assert!(((r - target) / target).abs() < 1e-8);
    }

    #[test]
    fn reports_missing_bracket() {
        let err = bisect_log(|x| Ok(x - 1e50), Bracket::new(1e-40, 1e40), 1e-6, 200).unwrap_err();
        assert!(matches!(err, KmodelError::Solver(_)));
        assert!(bisect_log(Ok, Bracket::new(-1.0, 1.0), 1e-6, 10).is_err());
    }

    #[test]
    fn decreasing_functions_work() {
        let r = bisect(|x| Ok(1.0 - x), Bracket::new(0.0, 3.0), 1e-12, 200).unwrap();
        assert!((r - 1.0).abs() < 1e-11);
    }

    #[test]
    fn iteration_limit() {
        let err = bisect(|x| Ok(x - 0.3), Bracket::new(0.0, 1.0), 0.0, 5).unwrap_err();
        assert!(matches!(err, KmodelError::Solver(_)));
    }
}
