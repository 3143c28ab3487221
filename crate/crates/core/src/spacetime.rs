//! Structural uncertainty bounds of the Károlyházy space-time.
//!
//! Every relation here holds only up to an unfixed numerical factor; the
//! coefficient is taken to be exactly 1. The formulas assume worldlines moving
//! slowly relative to the cosmic rest frame, so no velocity enters.

use serde::Serialize;

use crate::error::{require_non_negative, require_positive, Result};
use crate::units::PhysicalConstants;

/// Inputs below this multiple of T_P (or Λ) are flagged as outside the domain
/// where the bounds are meaningful.
pub const DEFAULT_VALIDITY_MULTIPLE: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UncertaintyResult {
    /// Uncertainty [s].
    pub value: f64,
    pub in_validity_domain: bool,
}

/// Lower bound on the uncertainty of a time interval of length `t`:
/// `T_P^{2/3} T^{1/3}`.
pub fn time_interval_uncertainty(t: f64, constants: &PhysicalConstants) -> Result<UncertaintyResult> {
    time_interval_uncertainty_with(t, constants, DEFAULT_VALIDITY_MULTIPLE)
}

pub fn time_interval_uncertainty_with(
    t: f64,
    constants: &PhysicalConstants,
    validity_multiple: f64,
) -> Result<UncertaintyResult> {
    let t = require_positive("time interval", t)?;
    let tp = constants.planck_time;
    Ok(UncertaintyResult {
        value: tp.powf(2.0 / 3.0) * t.cbrt(),
        in_validity_domain: t >= validity_multiple * tp,
    })
}

/// Lower bound on the synchronization uncertainty of two static worldlines a
/// distance `r` apart: `Λ^{2/3} r^{1/3} / c`.
pub fn synchronization_uncertainty(r: f64, constants: &PhysicalConstants) -> Result<UncertaintyResult> {
    synchronization_uncertainty_with(r, constants, DEFAULT_VALIDITY_MULTIPLE)
}

pub fn synchronization_uncertainty_with(
    r: f64,
    constants: &PhysicalConstants,
    validity_multiple: f64,
) -> Result<UncertaintyResult> {
    let r = require_non_negative("distance", r)?;
    let lambda = constants.planck_length;
    Ok(UncertaintyResult {
        value: lambda.powf(2.0 / 3.0) * r.cbrt() / constants.c,
        in_validity_domain: r >= validity_multiple * lambda,
    })
}

/// Vacuum spread of the local-time difference along one worldline, `T_P^{4/3} T^{2/3}` [s²].
pub fn structure_function_time(t: f64, constants: &PhysicalConstants) -> Result<f64> {
    let t = require_non_negative("time interval", t)?;
    let u = constants.planck_time.powf(2.0 / 3.0) * t.cbrt();
    Ok(u * u)
}

/// Vacuum spread of the equal-time local-time difference between two points a
/// distance `r` apart, `Λ^{4/3} r^{2/3} / c²` [s²].
pub fn structure_function_space(r: f64, constants: &PhysicalConstants) -> Result<f64> {
    let r = require_non_negative("distance", r)?;
    let u = constants.planck_length.powf(2.0 / 3.0) * r.cbrt() / constants.c;
    Ok(u * u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::default_constants;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn one_second_is_order_1e_minus_29() {
        let k = default_constants();
        let r = time_interval_uncertainty(1.0, &k).unwrap();
        assert!(rel(r.value, 1.427e-29) < 1e-3, "{}", r.value);
        assert!(r.in_validity_domain);
    }

    #[test]
    fn planck_time_is_a_fixed_point() {
        let k = default_constants();
        let r = time_interval_uncertainty(k.planck_time, &k).unwrap();
        assert!(rel(r.value, k.planck_time) < 1e-12);
        assert!(!r.in_validity_domain);
    }

    #[test]
    fn validity_flag_threshold() {
        let k = default_constants();
        let tp = k.planck_time;
        assert!(!time_interval_uncertainty(99.0 * tp, &k).unwrap().in_validity_domain);
        assert!(time_interval_uncertainty(100.0 * tp, &k).unwrap().in_validity_domain);
        assert!(!time_interval_uncertainty_with(100.0 * tp, &k, 1e3).unwrap().in_validity_domain);
        let lambda = k.planck_length;
        assert!(!synchronization_uncertainty(50.0 * lambda, &k).unwrap().in_validity_domain);
        assert!(synchronization_uncertainty(1e3 * lambda, &k).unwrap().in_validity_domain);
    }

    #[test]
    fn cube_root_scaling() {
        let k = default_constants();
        let base = time_interval_uncertainty(1.0, &k).unwrap().value;
        let big = time_interval_uncertainty(1e6, &k).unwrap().value;
        assert!(rel(big, 100.0 * base) < 1e-12);
        for scale in [8.0, 1000.0] {
            for t in [1e-20, 3.0, 4e9] {
                let a = time_interval_uncertainty(t, &k).unwrap().value;
                let b = time_interval_uncertainty(scale * t, &k).unwrap().value;
                assert!(rel(b / a, f64::cbrt(scale)) < 1e-12);
                let a = synchronization_uncertainty(t, &k).unwrap().value;
                let b = synchronization_uncertainty(scale * t, &k).unwrap().value;
                assert!(rel(b / a, f64::cbrt(scale)) < 1e-12);
            }
        }
    }

    #[test]
    fn monotone() {
        let k = default_constants();
        let mut prev_t = 0.0;
        let mut prev_r = 0.0;
        for i in 0..40 {
            let x = 10f64.powf(-40.0 + 2.0 * i as f64);
            let t = time_interval_uncertainty(x, &k).unwrap().value;
            let r = synchronization_uncertainty(x, &k).unwrap().value;
            assert!(t > prev_t && r > prev_r);
            prev_t = t;
            prev_r = r;
        }
    }

    #[test]
    fn synchronization_examples() {
        let k = default_constants();
        let via_distance = synchronization_uncertainty(k.c, &k).unwrap().value;
        let via_time = time_interval_uncertainty(1.0, &k).unwrap().value;
        assert!(rel(via_distance, via_time) < 1e-12);
        assert_eq!(synchronization_uncertainty(0.0, &k).unwrap().value, 0.0);
        let one_cm = synchronization_uncertainty(1.0, &k).unwrap().value;
        assert!(rel(one_cm, 4.593e-33) < 1e-3, "{one_cm}");
    }

    #[test]
    fn domain_errors() {
        let k = default_constants();
        assert!(time_interval_uncertainty(0.0, &k).is_err());
        assert!(time_interval_uncertainty(-1.0, &k).is_err());
        assert!(synchronization_uncertainty(-1e-3, &k).is_err());
        assert!(structure_function_time(-1.0, &k).is_err());
        assert!(structure_function_space(-1.0, &k).is_err());
    }

    #[test]
    fn structure_functions() {
        let k = default_constants();
        let one = structure_function_time(1.0, &k).unwrap();
        assert!(rel(one, 2.037e-58) < 1e-3, "{one}");
        assert_eq!(structure_function_time(0.0, &k).unwrap(), 0.0);
        assert_eq!(structure_function_space(0.0, &k).unwrap(), 0.0);
        let space = structure_function_space(3e10, &k).unwrap();
        assert!(rel(space, 2.0e-58) < 0.03, "{space}");
        for i in 0..20 {
            let t = 10f64.powf(-30.0 + 2.5 * i as f64);
            let u = time_interval_uncertainty(t, &k).unwrap().value;
            let sf = structure_function_time(t, &k).unwrap();
            assert!(rel(sf, u * u) < 1e-15);
            let ss = structure_function_space(k.c * t, &k).unwrap();
            assert!(rel(ss, sf) < 1e-12);
        }
    }
}
