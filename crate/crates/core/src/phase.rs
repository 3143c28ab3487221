//! Relative-phase spread between two configurations of point masses.
//!
//! The primary path is the x-space pairwise sum
//!
//! ```text
//! Δ_Φ² = Λ^{4/3} c²/ħ² Σ_{i,ℓ} M_i M_ℓ ( |x′_i − x_ℓ|^{2/3} − ½|x_i − x_ℓ|^{2/3} − ½|x′_i − x′_ℓ|^{2/3} )
//! ```
//!
//! [`phase_spread_fourier_oracle`] evaluates the k-space form
//! `Λ^{4/3} c²/ħ² ∫ d³k k^{-11/3} |μ_k(x′) − μ_k(x)|²` independently. The two
//! agree up to a global constant (`8πK₀`, see [`radial_kernel_constant`]).

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{require_positive, KmodelError, Result};
use crate::numerics::{integrate_with_breakpoints, QuadratureSpec};
use crate::units::PhysicalConstants;

pub type Vec3 = [f64; 3];

// Below this many particles the double sum runs on the calling thread.
const PARALLEL_THRESHOLD: usize = 64;

#[inline]
pub(crate) fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub(crate) fn norm2(v: &Vec3) -> f64 {
    v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
}

#[inline]
fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `|v|^{2/3}`
#[inline]
pub(crate) fn pow_two_thirds(v: &Vec3) -> f64 {
    norm2(v).cbrt()
}

fn validate_masses(masses: &[f64]) -> Result<()> {
    if masses.is_empty() {
        return Err(KmodelError::Structural("a configuration needs at least one mass".into()));
    }
    for &m in masses {
        require_positive("mass", m)?;
    }
    Ok(())
}

fn validate_positions(positions: &[Vec3]) -> Result<()> {
    if positions.iter().flatten().any(|c| !c.is_finite()) {
        return Err(KmodelError::Structural("position components must be finite".into()));
    }
    Ok(())
}

/// `N` point masses at fixed positions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointConfiguration {
    masses: Vec<f64>,
    positions: Vec<Vec3>,
}

impl PointConfiguration {
    pub fn new(masses: Vec<f64>, positions: Vec<Vec3>) -> Result<Self> {
        if masses.len() != positions.len() {
            return Err(KmodelError::Structural(format!(
                "{} masses but {} positions",
                masses.len(),
                positions.len()
            )));
        }
        validate_masses(&masses)?;
        validate_positions(&positions)?;
        Ok(Self { masses, positions })
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// The same masses, every position shifted by `shift`.
    pub fn translated(&self, shift: Vec3) -> Self {
        let positions = self
            .positions
            .iter()
            .map(|p| [p[0] + shift[0], p[1] + shift[1], p[2] + shift[2]])
            .collect();
        Self {
            masses: self.masses.clone(),
            positions,
        }
    }
}

/// Two placements `x`, `x′` of the same set of masses. Particle `i` in both
/// position lists is the same particle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigurationPair {
    shared_masses: Vec<f64>,
    positions_a: Vec<Vec3>,
    positions_b: Vec<Vec3>,
}

impl ConfigurationPair {
    pub fn new(shared_masses: Vec<f64>, positions_a: Vec<Vec3>, positions_b: Vec<Vec3>) -> Result<Self> {
        if shared_masses.len() != positions_a.len() || positions_a.len() != positions_b.len() {
            return Err(KmodelError::Structural(format!(
                "mismatched lengths: {} masses, {} positions_a, {} positions_b",
                shared_masses.len(),
                positions_a.len(),
                positions_b.len()
            )));
        }
        validate_masses(&shared_masses)?;
        validate_positions(&positions_a)?;
        validate_positions(&positions_b)?;
        Ok(Self {
            shared_masses,
            positions_a,
            positions_b,
        })
    }

    /// Pairs `config` with a copy of itself translated by `shift`.
    pub fn rigid_shift(config: &PointConfiguration, shift: Vec3) -> Self {
        Self {
            shared_masses: config.masses.clone(),
            positions_a: config.positions.clone(),
            positions_b: config.translated(shift).positions,
        }
    }

    pub fn masses(&self) -> &[f64] {
        &self.shared_masses
    }

    pub fn positions_a(&self) -> &[Vec3] {
        &self.positions_a
    }

    pub fn positions_b(&self) -> &[Vec3] {
        &self.positions_b
    }

    pub fn len(&self) -> usize {
        self.shared_masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shared_masses.is_empty()
    }

    /// Swaps the roles of `x` and `x′`.
    pub fn swapped(&self) -> Self {
        Self {
            shared_masses: self.shared_masses.clone(),
            positions_a: self.positions_b.clone(),
            positions_b: self.positions_a.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpreadValue {
    pub delta_phi_squared: f64,
    pub delta_phi: f64,
}

impl SpreadValue {
    /// Rounding can push a mathematically non-negative sum a few ulps below
    /// zero when the two configurations nearly coincide; such values are
    /// clamped to zero.
    pub fn from_squared(delta_phi_squared: f64) -> Self {
        let delta_phi_squared = delta_phi_squared.max(0.0);
        Self {
            delta_phi_squared,
            delta_phi: delta_phi_squared.sqrt(),
        }
    }
}

/// `Λ^{4/3} c² / ħ²`, the prefactor shared by both representations.
pub fn spread_prefactor(constants: &PhysicalConstants) -> f64 {
    let lambda23 = constants.planck_length.powf(2.0 / 3.0);
    let c_over_hbar = constants.c / constants.hbar;
    lambda23 * lambda23 * c_over_hbar * c_over_hbar
}

/// Sums `row(i)` over all rows with a fixed reduction order, so the result is
/// bit-identical however many worker threads run.
fn ordered_row_sum<F>(n: usize, row: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let rows: Vec<f64> = if n < PARALLEL_THRESHOLD {
        (0..n).map(&row).collect()
    } else {
        (0..n).into_par_iter().map(&row).collect()
    };
    rows.iter().sum()
}

/// The mass-weighted double sum of the x-space formula, without the prefactor.
pub(crate) fn pairwise_sum(pair: &ConfigurationPair) -> f64 {
    let m = &pair.shared_masses;
    let xa = &pair.positions_a;
    let xb = &pair.positions_b;
    ordered_row_sum(m.len(), |i| {
        let mut acc = 0.0;
        for l in 0..m.len() {
            let cross = pow_two_thirds(&sub(&xb[i], &xa[l]));
            let within_a = pow_two_thirds(&sub(&xa[i], &xa[l]));
            let within_b = pow_two_thirds(&sub(&xb[i], &xb[l]));
            acc += m[l] * (cross - 0.5 * within_a - 0.5 * within_b);
        }
        m[i] * acc
    })
}

/// Relative-phase vacuum spread between the two configurations of `pair`.
pub fn phase_spread(pair: &ConfigurationPair, constants: &PhysicalConstants) -> SpreadValue {
    SpreadValue::from_squared(spread_prefactor(constants) * pairwise_sum(pair))
}

/// `|d + a|^{2/3} + |d − a|^{2/3} − 2|d|^{2/3}`, evaluated without
/// cancellation for any ratio `|a|/|d|`.
///
/// With `s = |d|²`, `p = 2 d·a`, `q = |a|²`, `u± = |d ± a|^{2/3}`, `w = |d|^{2/3}`
/// and `D(x, y) = x² + xy + y²`, each cube-root difference is rationalized as
/// `A^{1/3} − B^{1/3} = (A − B)/D(A^{1/3}, B^{1/3})`, which gives
///
/// ```text
/// q (1/D(u+,w) + 1/D(u−,w)) − 2p² (u+ + u− + w) / (D(u+,u−) D(u+,w) D(u−,w))
/// ```
///
/// Both terms are O(a²) when `a ≪ d`, so shifts far below the double-precision
/// resolution of `d` are still resolved.
pub fn symmetric_second_difference(d: &Vec3, a: &Vec3) -> f64 {
    let q = norm2(a);
    if q == 0.0 {
        return 0.0;
    }
    let s = norm2(d);
    let p = 2.0 * dot(d, a);
    let plus = [d[0] + a[0], d[1] + a[1], d[2] + a[2]];
    let u_plus = norm2(&plus).cbrt();
    let u_minus = norm2(&sub(d, a)).cbrt();
    let w = s.cbrt();
    let dd = |x: f64, y: f64| x * x + x * y + y * y;
    let d_plus = dd(u_plus, w);
    let d_minus = dd(u_minus, w);
    let d_pm = dd(u_plus, u_minus);
    let first = q * (1.0 / d_plus + 1.0 / d_minus);
    let second = 2.0 * p * p * (u_plus + u_minus + w) / (d_pm * d_plus * d_minus);
    first - second
}

/// How the diagonal `i = ℓ` terms of a rigid-shift sum are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Discretization {
    /// Literal point masses: each particle contributes `M_i² |a|^{2/3}`.
    #[default]
    PointMasses,
    /// The points are quadrature nodes of a continuous mass density: the
    /// diagonal is dropped and the off-diagonal sum renormalized to the
    /// total mass squared.
    Continuum,
}

/// Phase spread between `config` and `config` rigidly translated by `shift`.
///
/// Mathematically identical to [`phase_spread`] on
/// [`ConfigurationPair::rigid_shift`] in the `PointMasses` mode, but computed
/// from relative positions so that shifts far smaller than the body are
/// resolved.
pub fn rigid_shift_spread(
    config: &PointConfiguration,
    shift: Vec3,
    constants: &PhysicalConstants,
    discretization: Discretization,
) -> Result<SpreadValue> {
    let m = &config.masses;
    let x = &config.positions;
    let n = m.len();
    let off_diagonal = ordered_row_sum(n, |i| {
        let mut acc = 0.0;
        for l in (i + 1)..n {
            acc += m[l] * symmetric_second_difference(&sub(&x[i], &x[l]), &shift);
        }
        m[i] * acc
    });
    let sum = match discretization {
        Discretization::PointMasses => {
            let diagonal: f64 = m.iter().map(|mi| mi * mi).sum::<f64>() * pow_two_thirds(&shift);
            diagonal + off_diagonal
        }
        Discretization::Continuum => {
            if n < 2 {
                return Err(KmodelError::Structural(
                    "a continuum discretization needs at least two points".into(),
                ));
            }
            let total = config.total_mass();
            let sum_sq: f64 = m.iter().map(|mi| mi * mi).sum();
            let off_weight = total * total - sum_sq;
            off_diagonal * total * total / off_weight
        }
    };
    Ok(SpreadValue::from_squared(spread_prefactor(constants) * sum))
}

/// Fourier transform `μ_k = Σ_ℓ M_ℓ exp(i k·x_ℓ)` of the point-mass density.
pub fn mass_distribution_fourier(config: &PointConfiguration, k: Vec3) -> Complex64 {
    config
        .masses
        .iter()
        .zip(&config.positions)
        .map(|(&m, x)| Complex64::from_polar(m, dot(&k, x)))
        .sum()
}

/// `1 − sin(u)/u`, accurate for small `u`.
fn one_minus_sinc(u: f64) -> f64 {
    if u.abs() < 0.1 {
        let u2 = u * u;
        u2 * (1.0 / 6.0 - u2 * (1.0 / 120.0 - u2 * (1.0 / 5040.0 - u2 / 362_880.0)))
    } else {
        1.0 - u.sin() / u
    }
}

// Beyond this the radial tail is summed from its asymptotic expansion.
const TAIL_START: f64 = 64.0 * PI;

/// `∫_U^∞ u^{-p} sin u du` for large `U`, by repeated integration by parts.
fn sine_tail(p: f64, upper: f64) -> f64 {
    let (sin, cos) = upper.sin_cos();
    let mut order = p;
    let mut coefficient = 1.0;
    let mut total = 0.0;
    let mut last = f64::INFINITY;
    for _ in 0..40 {
        let term = coefficient
            * (upper.powf(-order) * cos + order * upper.powf(-order - 1.0) * sin);
        if term.abs() > last {
            break;
        }
        total += term;
        last = term.abs();
        if term.abs() <= 1e-18 * total.abs() {
            break;
        }
        coefficient *= -order * (order + 1.0);
        order += 2.0;
    }
    total
}

/// `∫_U^∞ u^{-5/3} (1 − sin u/u) du` for `U ≥ TAIL_START`.
fn radial_tail(upper: f64) -> f64 {
    1.5 * upper.powf(-2.0 / 3.0) - sine_tail(8.0 / 3.0, upper)
}

/// `∫_0^U u^{-5/3} (1 − sin u/u) du` by adaptive quadrature, for finite `U`.
fn radial_head(upper: f64, spec: &QuadratureSpec) -> Result<f64> {
    // u = t³ on [0, 1] turns the u^{1/3} behaviour at the origin into t³.
    let near = |t: f64| {
        if t == 0.0 {
            return 0.0;
        }
        let t3 = t * t * t;
        3.0 * one_minus_sinc(t3) / t3
    };
    let far = |u: f64| u.powf(-5.0 / 3.0) * one_minus_sinc(u);
    let head_end = upper.min(1.0);
    let mut total = integrate_with_breakpoints(near, &[0.0, head_end.cbrt()], spec)?.value;
    if upper > 1.0 {
        let mut points = vec![1.0];
        let mut next = 2.0 * PI;
        while next < upper {
            points.push(next);
            next += 2.0 * PI;
        }
        points.push(upper);
        total += integrate_with_breakpoints(far, &points, spec)?.value;
    }
    Ok(total)
}

/// `I(U) = ∫_0^U u^{-5/3} (1 − sin u/u) du`; `U = ∞` gives the universal constant K₀.
pub fn radial_kernel_integral(upper: f64, spec: &QuadratureSpec) -> Result<f64> {
    if upper.is_nan() || upper < 0.0 {
        return Err(KmodelError::domain("radial upper limit", "non-negative", upper));
    }
    if upper == 0.0 {
        return Ok(0.0);
    }
    if upper <= TAIL_START {
        return radial_head(upper, spec);
    }
    let head = radial_head(TAIL_START, spec)?;
    let tail_full = radial_tail(TAIL_START);
    if upper.is_infinite() {
        Ok(head + tail_full)
    } else {
        Ok(head + tail_full - radial_tail(upper))
    }
}

/// K₀ = `∫_0^∞ u^{-5/3} (1 − sin u/u) du`, computed once with the default
/// quadrature settings.
pub fn radial_kernel_constant() -> f64 {
    static K0: OnceLock<f64> = OnceLock::new();
    *K0.get_or_init(|| {
        radial_kernel_integral(f64::INFINITY, &QuadratureSpec::default())
            .expect("default quadrature converges for the radial kernel")
    })
}

/// `∫_0^{k_max} dk k^{-5/3} (1 − sin(kr)/(kr)) = r^{2/3} I(k_max r)`.
fn radial_pair_integral(r: f64, k_max: Option<f64>, k0: f64, spec: &QuadratureSpec) -> Result<f64> {
    if r == 0.0 {
        return Ok(0.0);
    }
    let scale = r.powf(2.0 / 3.0);
    match k_max {
        None => Ok(scale * k0),
        Some(k) => {
            let upper = k * r;
            if upper > TAIL_START {
                Ok(scale * (k0 - radial_tail(upper)))
            } else {
                Ok(scale * radial_head(upper, spec)?)
            }
        }
    }
}

/// k-space evaluation of the phase spread with an optional UV cutoff `k_max`
/// [1/cm].
///
/// `|μ_k(x′) − μ_k(x)|²` is expanded into pairwise phase factors whose angular
/// integrals are `4π sin(kr)/(kr)`. The constant parts cancel between the four
/// terms of each pair, leaving the convergent radial integrals
/// `∫ dk k^{-5/3} (1 − sin(kr)/(kr))`.
pub fn phase_spread_fourier_oracle(
    pair: &ConfigurationPair,
    constants: &PhysicalConstants,
    quadrature: &QuadratureSpec,
    k_max: Option<f64>,
) -> Result<SpreadValue> {
    if let Some(k) = k_max {
        require_positive("k_max", k)?;
    }
    let k0 = if *quadrature == QuadratureSpec::default() {
        radial_kernel_constant()
    } else {
        radial_kernel_integral(f64::INFINITY, quadrature)?
    };
    let m = &pair.shared_masses;
    let xa = &pair.positions_a;
    let xb = &pair.positions_b;
    let radial = |u: &Vec3, v: &Vec3| radial_pair_integral(norm2(&sub(u, v)).sqrt(), k_max, k0, quadrature);
    let mut total = 0.0;
    for i in 0..m.len() {
        let mut row = 0.0;
        for l in 0..m.len() {
            let term = radial(&xb[i], &xa[l])? + radial(&xa[i], &xb[l])?
                - radial(&xb[i], &xb[l])?
                - radial(&xa[i], &xa[l])?;
            row += m[l] * term;
        }
        total += m[i] * row;
    }
    Ok(SpreadValue::from_squared(
        spread_prefactor(constants) * 4.0 * PI * total,
    ))
}
