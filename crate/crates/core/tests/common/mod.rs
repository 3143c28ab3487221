//! Strategies and property checks shared by the proptest suite and the
//! acceptance runner.
#![allow(dead_code)]

use kmodel_core::numerics::QuadratureSpec;
use kmodel_core::phase::{phase_spread, phase_spread_fourier_oracle, ConfigurationPair, Vec3};
use kmodel_core::sim::weight_in_region;
use kmodel_core::units::default_constants;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.log10()..hi.log10()).prop_map(|e| 10f64.powf(e))
}

fn vector(scale: f64) -> impl Strategy<Value = Vec3> {
    prop::array::uniform3(-1.0..1.0f64).prop_map(move |v| [v[0] * scale, v[1] * scale, v[2] * scale])
}

/// Random pair of `n` particles: body of size 10⁻⁶–10⁶ cm, second
/// configuration displaced per particle on an independent scale.
pub fn pair_of_size(n: usize) -> impl Strategy<Value = ConfigurationPair> {
    (log_uniform(1e-6, 1e6), log_uniform(1e-6, 1e6)).prop_flat_map(move |(size, shift)| {
        (
            prop::collection::vec(log_uniform(1e-3, 1e3), n),
            prop::collection::vec(vector(size), n),
            prop::collection::vec(vector(shift), n),
        )
            .prop_map(|(m, a, d)| {
                let b = a.iter().zip(&d).map(|(x, s)| [x[0] + s[0], x[1] + s[1], x[2] + s[2]]).collect();
                ConfigurationPair::new(m, a, b).expect("valid pair")
            })
    })
}

pub fn pair_strategy(max_n: usize) -> impl Strategy<Value = ConfigurationPair> {
    (1..=max_n).prop_flat_map(pair_of_size)
}

pub fn equal_mass_pair_strategy(max_n: usize) -> impl Strategy<Value = (ConfigurationPair, Vec<usize>)> {
    (pair_strategy(max_n), log_uniform(1e-3, 1e3)).prop_flat_map(|(pair, m)| {
        let n = pair.len();
        let equal = ConfigurationPair::new(vec![m; n], pair.positions_a().to_vec(), pair.positions_b().to_vec())
            .expect("valid pair");
        (Just(equal), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
    })
}

/// Magnitude of the individual terms of the pairwise sum, used to scale
/// round-off tolerances.
pub fn gross_scale(pair: &ConfigurationPair) -> f64 {
    let k = default_constants();
    let pref = kmodel_core::phase::spread_prefactor(&k);
    let (m, a, b) = (pair.masses(), pair.positions_a(), pair.positions_b());
    let p = |u: &Vec3, v: &Vec3| {
        let d = [u[0] - v[0], u[1] - v[1], u[2] - v[2]];
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).cbrt()
    };
    let mut s = 0.0;
    for i in 0..m.len() {
        for l in 0..m.len() {
            s += m[i] * m[l] * (p(&b[i], &a[l]) + p(&a[i], &a[l]) + p(&b[i], &b[l]) + p(&a[i], &b[l]));
        }
    }
    pref * s
}

/// Ratio of the largest coordinate (after moving by `extra`) to the smallest
/// nonzero separation: rounding a coordinate perturbs separations by that
/// much relative to themselves.
pub fn conditioning(pair: &ConfigurationPair, extra: f64) -> f64 {
    let points: Vec<Vec3> = pair.positions_a().iter().chain(pair.positions_b()).copied().collect();
    let coords = points.iter().flat_map(|x| x.iter().map(|c| c.abs())).fold(0.0, f64::max) + extra;
    let mut min_sep = f64::INFINITY;
    for (i, u) in points.iter().enumerate() {
        for v in &points[i + 1..] {
            let d = ((u[0] - v[0]).powi(2) + (u[1] - v[1]).powi(2) + (u[2] - v[2]).powi(2)).sqrt();
            if d > 0.0 {
                min_sep = min_sep.min(d);
            }
        }
    }
    if min_sep.is_finite() {
        1.0 + coords / min_sep
    } else {
        1.0
    }
}

fn close(value: f64, expected: f64, scale: f64, tol: f64) -> Result<(), TestCaseError> {
    prop_assert!(
        (value - expected).abs() <= tol * scale,
        "{value:e} vs {expected:e} (scale {scale:e})"
    );
    Ok(())
}

pub fn check_symmetry(pair: &ConfigurationPair) -> Result<(), TestCaseError> {
    let k = default_constants();
    let forward = phase_spread(pair, &k).delta_phi_squared;
    let backward = phase_spread(&pair.swapped(), &k).delta_phi_squared;
    close(forward, backward, gross_scale(pair), 1e-13)
}

fn map_pair(pair: &ConfigurationPair, f: impl Fn(&Vec3) -> Vec3) -> ConfigurationPair {
    ConfigurationPair::new(
        pair.masses().to_vec(),
        pair.positions_a().iter().map(&f).collect(),
        pair.positions_b().iter().map(&f).collect(),
    )
    .expect("valid pair")
}

pub fn check_translation(pair: &ConfigurationPair, t: Vec3) -> Result<(), TestCaseError> {
    let k = default_constants();
    let moved = map_pair(pair, |x| [x[0] + t[0], x[1] + t[1], x[2] + t[2]]);
    let before = phase_spread(pair, &k).delta_phi_squared;
    let after = phase_spread(&moved, &k).delta_phi_squared;
    let t_norm = (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt();
    close(after, before, gross_scale(pair), 1e-12 * conditioning(pair, t_norm))
}

/// Rotation matrix from a (not necessarily normalized) quaternion.
pub fn rotation(q: [f64; 4]) -> [[f64; 3]; 3] {
    let n = (q.iter().map(|x| x * x).sum::<f64>()).sqrt();
    let [w, x, y, z] = [q[0] / n, q[1] / n, q[2] / n, q[3] / n];
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

pub fn check_rotation(pair: &ConfigurationPair, q: [f64; 4]) -> Result<(), TestCaseError> {
    let k = default_constants();
    let r = rotation(q);
    let turned = map_pair(pair, |v| {
        let mut out = [0.0; 3];
        for (i, row) in r.iter().enumerate() {
            out[i] = row[0] * v[0] + row[1] * v[1] + row[2] * v[2];
        }
        out
    });
    let before = phase_spread(pair, &k).delta_phi_squared;
    let after = phase_spread(&turned, &k).delta_phi_squared;
    close(after, before, gross_scale(pair), 1e-12 * conditioning(pair, 0.0))
}

/// Consistent relabeling of all three lists, plus (equal masses only)
/// permuting the unprimed positions alone.
pub fn check_permutation(pair: &ConfigurationPair, perm: &[usize]) -> Result<(), TestCaseError> {
    let k = default_constants();
    let pick = |v: &[Vec3]| perm.iter().map(|&i| v[i]).collect::<Vec<_>>();
    let masses: Vec<f64> = perm.iter().map(|&i| pair.masses()[i]).collect();
    let relabeled = ConfigurationPair::new(masses, pick(pair.positions_a()), pick(pair.positions_b())).unwrap();
    let base = phase_spread(pair, &k).delta_phi_squared;
    let scale = gross_scale(pair);
    close(phase_spread(&relabeled, &k).delta_phi_squared, base, scale, 1e-13)?;
    let m = pair.masses();
    if m.iter().all(|&x| x == m[0]) {
        let shuffled =
            ConfigurationPair::new(m.to_vec(), pick(pair.positions_a()), pair.positions_b().to_vec()).unwrap();
        close(phase_spread(&shuffled, &k).delta_phi_squared, base, scale, 1e-13)?;
    }
    Ok(())
}

pub fn single_particle(mass: f64, displacement: Vec3) -> ConfigurationPair {
    ConfigurationPair::new(vec![mass], vec![[0.0; 3]], vec![displacement]).unwrap()
}

pub fn check_scaling(mass: f64, displacement: Vec3, factor: f64) -> Result<(), TestCaseError> {
    let k = default_constants();
    let base = phase_spread(&single_particle(mass, displacement), &k).delta_phi;
    let scaled = [displacement[0] * 8.0, displacement[1] * 8.0, displacement[2] * 8.0];
    let far = phase_spread(&single_particle(mass, scaled), &k).delta_phi;
    prop_assert!(rel(far, 2.0 * base) < 1e-12, "a^(1/3): {far:e} vs {:e}", 2.0 * base);
    let heavy = phase_spread(&single_particle(mass * factor, displacement), &k).delta_phi;
    prop_assert!(rel(heavy, factor * base) < 1e-12, "mass linearity: {heavy:e} vs {:e}", factor * base);
    Ok(())
}

pub fn check_non_negative(pair: &ConfigurationPair) -> Result<(), TestCaseError> {
    let k = default_constants();
    let v = phase_spread(pair, &k);
    prop_assert!(v.delta_phi_squared >= 0.0 && v.delta_phi_squared.is_finite());
    prop_assert!(v.delta_phi == v.delta_phi_squared.sqrt());
    Ok(())
}

/// Normalization, range and additivity of the Born weight.
pub fn check_weight(center: f64, sigma: f64, cuts: [f64; 2]) -> Result<(), TestCaseError> {
    let (lo, hi) = (cuts[0].min(cuts[1]), cuts[0].max(cuts[1]));
    let w = |a: f64, b: f64| weight_in_region(center, sigma, a, b).unwrap();
    let inf = f64::INFINITY;
    prop_assert_eq!(w(-inf, inf), 1.0);
    let parts = [w(-inf, lo), w(lo, hi), w(hi, inf)];
    prop_assert!(parts.iter().all(|p| (0.0..=1.0).contains(p)));
    let total: f64 = parts.iter().sum();
    prop_assert!((total - 1.0).abs() < 1e-14, "partition sums to {total}");
    Ok(())
}

pub fn oracle_ratio(pair: &ConfigurationPair) -> f64 {
    let k = default_constants();
    let direct = phase_spread(pair, &k).delta_phi_squared;
    let oracle = phase_spread_fourier_oracle(pair, &k, &QuadratureSpec::default(), None)
        .unwrap()
        .delta_phi_squared;
    oracle / direct
}

pub fn pair_strategy_for_oracle() -> impl Strategy<Value = ConfigurationPair> {
    prop_oneof![pair_of_size(1), pair_of_size(2), pair_of_size(5)]
}
