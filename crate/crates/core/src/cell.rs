//! Coherence cells: cell lengths of point particles and homogeneous spheres,
//! the sphere double integral, the quantum/classical regime classifier and the
//! transition-region solver.
//!
//! A coherence cell is the largest configuration-space domain inside which the
//! phase spread stays below a threshold of order one. The closed forms
//! `(L/Λ)² L` (far, `a_c ≫ R`) and `(R/Λ)^{2/3} L` (near, `a_c ≪ R`) follow from
//! setting the spread to 1, which is also the default [`CellSolverOptions`]
//! threshold.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{require_non_negative, require_positive, KmodelError, Result};
use crate::numerics::{bisect_log, Bracket, KeyedStreams};
use crate::phase::{rigid_shift_spread, spread_prefactor, symmetric_second_difference, Discretization, PointConfiguration, Vec3};
use crate::units::{compton_wavelength, PhysicalConstants};

/// Spheres above this radius are outside the model's solid-body treatment
/// (elastic vibrations are no longer negligible).
pub const MAX_SPHERE_RADIUS_CM: f64 = 100.0;

/// Near-regime constant `C` in `Σ/N² ≈ C a²/R^{4/3}` for a uniform ball.
/// Equals `(5/27)·⟨(|r − r′|/R)^{-4/3}⟩` over two uniform points.
pub const NEAR_REGIME_CONSTANT: f64 = 0.2551;

const MC_CHUNK: u64 = 4096;
const MIN_SAMPLES: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Quantum,
    Transition,
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellMethod {
    ClosedFormFar,
    ClosedFormNear,
    RootFindMonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellResult {
    /// a_c [cm]
    pub cell_length: f64,
    pub regime: Regime,
    pub method: CellMethod,
    /// Relative error estimate of `cell_length`.
    pub error_estimate: f64,
}

/// Homogeneous solid sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphereBody {
    mass: f64,
    radius: f64,
    density: f64,
}

fn ball_volume(radius: f64) -> f64 {
    4.0 * PI / 3.0 * radius.powi(3)
}

impl SphereBody {
    pub fn new(mass: f64, radius: f64) -> Result<Self> {
        let mass = require_positive("mass", mass)?;
        let radius = require_positive("radius", radius)?;
        Ok(Self {
            mass,
            radius,
            density: mass / ball_volume(radius),
        })
    }

    /// As [`SphereBody::new`], checking that `density` agrees with mass and
    /// radius to 1e-9 relative.
    pub fn with_density(mass: f64, radius: f64, density: f64) -> Result<Self> {
        let body = Self::new(mass, radius)?;
        require_positive("density", density)?;
        if ((density - body.density) / body.density).abs() > 1e-9 {
            return Err(KmodelError::Structural(format!(
                "density {density:e} is inconsistent with mass {mass:e} g and radius {radius:e} cm (expected {:e})",
                body.density
            )));
        }
        Ok(body)
    }

    pub fn from_density(density: f64, radius: f64) -> Result<Self> {
        let density = require_positive("density", density)?;
        let radius = require_positive("radius", radius)?;
        Self::new(density * ball_volume(radius), radius)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn density(&self) -> f64 {
        self.density
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloSpec {
    pub samples: u64,
    pub seed: u64,
    pub target_rel_error: f64,
}

impl MonteCarloSpec {
    pub fn new(samples: u64, seed: u64, target_rel_error: f64) -> Result<Self> {
        let spec = Self {
            samples,
            seed,
            target_rel_error,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < MIN_SAMPLES {
            return Err(KmodelError::Config(format!(
                "Monte Carlo needs at least {MIN_SAMPLES} samples, got {}",
                self.samples
            )));
        }
        if !(self.target_rel_error > 0.0 && self.target_rel_error.is_finite()) {
            return Err(KmodelError::Config(format!(
                "target relative error must be positive, got {:e}",
                self.target_rel_error
            )));
        }
        Ok(())
    }
}

impl Default for MonteCarloSpec {
    fn default() -> Self {
        Self {
            samples: 200_000,
            seed: 0x6b6d_6f64,
            target_rel_error: 1e-2,
        }
    }
}

/// Threshold and tolerance for the coherence-cell root finders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellSolverOptions {
    /// Phase spread defining the cell boundary.
    pub threshold: f64,
    /// Relative tolerance on the cell length.
    pub rel_tol: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
}

impl Default for CellSolverOptions {
    fn default() -> Self {
        Self {
            threshold: 1.0,
            rel_tol: 1e-6,
            bracket_lo: 1e-40,
            bracket_hi: 1e40,
        }
    }
}

impl CellSolverOptions {
    /// The same options with the boundary at a spread of exactly π.
    pub fn pi_threshold() -> Self {
        Self {
            threshold: PI,
            ..Self::default()
        }
    }

    fn bracket(&self) -> Bracket {
        Bracket::new(self.bracket_lo, self.bracket_hi)
    }
}

/// `(L/Λ)² L` for a single point particle.
pub fn cell_length_point(mass: f64, constants: &PhysicalConstants) -> Result<f64> {
    let l = compton_wavelength(mass, constants)?;
    let ratio = l / constants.planck_length;
    Ok(ratio * ratio * l)
}

/// Far-regime cell length of a sphere, using the Compton wavelength of the
/// total mass.
pub fn cell_length_sphere_far(body: &SphereBody, constants: &PhysicalConstants) -> f64 {
    cell_length_point(body.mass, constants).expect("SphereBody mass is positive")
}

/// Near-regime cell length of a sphere, `(R/Λ)^{2/3} L`.
pub fn cell_length_sphere_near(body: &SphereBody, constants: &PhysicalConstants) -> f64 {
    let l = compton_wavelength(body.mass, constants).expect("SphereBody mass is positive");
    (body.radius / constants.planck_length).powf(2.0 / 3.0) * l
}

pub fn classify_regime(cell_length: f64, radius: f64) -> Regime {
    if cell_length > 10.0 * radius {
        Regime::Quantum
    } else if cell_length < radius / 10.0 {
        Regime::Classical
    } else {
        Regime::Transition
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphereSumEstimate {
    /// Σ/N² [cm^{2/3}]
    pub value: f64,
    pub std_error: f64,
    pub samples_used: u64,
    pub converged: bool,
}

impl SphereSumEstimate {
    pub fn rel_error(&self) -> f64 {
        if self.value == 0.0 {
            0.0
        } else {
            (self.std_error / self.value).abs()
        }
    }
}

/// Running mean and squared-deviation sum, merged in a fixed order.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.count as f64 / count as f64;
        let m2 = self.m2 + other.m2 + delta * delta * (self.count as f64 * other.count as f64) / count as f64;
        Moments { count, mean, m2 }
    }

    fn std_error(&self) -> f64 {
        if self.count < 2 {
            return f64::INFINITY;
        }
        (self.m2 / (self.count - 1) as f64 / self.count as f64).sqrt()
    }
}

fn unit_ball_point<R: Rng>(rng: &mut R) -> Vec3 {
    let radius = rng.random::<f64>().cbrt();
    let cos_theta = 2.0 * rng.random::<f64>() - 1.0;
    let phi = 2.0 * PI * rng.random::<f64>();
    let sin_theta = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
    [
        radius * sin_theta * phi.cos(),
        radius * sin_theta * phi.sin(),
        radius * cos_theta,
    ]
}

/// Difference vectors `r − r′` of point pairs drawn uniformly from a ball.
/// Chunk `j` of the sample sequence is drawn from stream `j` of the seed.
#[derive(Debug, Clone)]
pub struct BallPairSampler {
    radius: f64,
    streams: KeyedStreams,
    differences: Vec<Vec3>,
}

impl BallPairSampler {
    pub fn new(radius: f64, seed: u64) -> Self {
        Self {
            radius,
            streams: KeyedStreams::new(seed),
            differences: Vec::new(),
        }
    }

    fn chunk(&self, index: u64, len: u64) -> Vec<Vec3> {
        let mut rng = self.streams.stream(index);
        (0..len)
            .map(|_| {
                let p = unit_ball_point(&mut rng);
                let q = unit_ball_point(&mut rng);
                [
                    self.radius * (p[0] - q[0]),
                    self.radius * (p[1] - q[1]),
                    self.radius * (p[2] - q[2]),
                ]
            })
            .collect()
    }

    /// Extends the stored sample to at least `n` pairs (whole chunks only, plus
    /// the tail of the final chunk).
    pub fn ensure(&mut self, n: u64) {
        let have = self.differences.len() as u64;
        if have >= n {
            return;
        }
        let first_chunk = have / MC_CHUNK;
        debug_assert_eq!(have % MC_CHUNK, 0, "only the final chunk may be partial");
        let last_chunk = n.div_ceil(MC_CHUNK);
        let new: Vec<Vec<Vec3>> = (first_chunk..last_chunk)
            .into_par_iter()
            .map(|j| self.chunk(j, MC_CHUNK))
            .collect();
        for c in new {
            self.differences.extend(c);
        }
    }

    pub fn len(&self) -> usize {
        self.differences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.differences.is_empty()
    }

    /// Mean of `|d + a|^{2/3} − |d|^{2/3}` over the first `n` stored pairs,
    /// symmetrized over `±a`.
    fn moments(&self, shift: f64, n: u64) -> Moments {
        let a = [0.0, 0.0, shift];
        let n = (n as usize).min(self.differences.len());
        let chunks: Vec<Moments> = self.differences[..n]
            .par_chunks(MC_CHUNK as usize)
            .map(|chunk| {
                let mut m = Moments::default();
                for d in chunk {
                    m.push(0.5 * symmetric_second_difference(d, &a));
                }
                m
            })
            .collect();
        chunks.into_iter().fold(Moments::default(), Moments::merge)
    }

    pub fn estimate(&self, shift: f64, n: u64) -> SphereSumEstimate {
        let m = self.moments(shift, n);
        SphereSumEstimate {
            value: m.mean,
            std_error: m.std_error(),
            samples_used: m.count,
            converged: true,
        }
    }
}

/// Σ/N² for a uniform sphere of radius `radius` displaced by `shift`:
/// `(1/V²) ∫_V d³r ∫_V d³r′ (|r − r′ + a|^{2/3} − |r − r′|^{2/3})`.
///
/// Samples are added in doubling rounds until the relative standard error is
/// below `mc.target_rel_error` or `mc.samples` is used up. In the latter case
/// the best estimate is returned with `converged = false`.
pub fn sphere_sum(radius: f64, shift: f64, mc: &MonteCarloSpec) -> Result<SphereSumEstimate> {
    require_positive("radius", radius)?;
    require_non_negative("shift", shift)?;
    mc.validate()?;
    if shift == 0.0 {
        return Ok(SphereSumEstimate {
            value: 0.0,
            std_error: 0.0,
            samples_used: 0,
            converged: true,
        });
    }
    let mut sampler = BallPairSampler::new(radius, mc.seed);
    let mut n = (4 * MC_CHUNK).min(mc.samples);
    loop {
        sampler.ensure(n);
        let mut estimate = sampler.estimate(shift, n);
        if estimate.rel_error() <= mc.target_rel_error {
            return Ok(estimate);
        }
        if n >= mc.samples {
            estimate.converged = false;
            return Ok(estimate);
        }
        n = (2 * n).min(mc.samples);
    }
}

fn sphere_prefactor(body: &SphereBody, constants: &PhysicalConstants) -> f64 {
    // Λ^{4/3}/L² with L the Compton wavelength of the whole body
    spread_prefactor(constants) * body.mass * body.mass
}

fn validate_sphere(body: &SphereBody) -> Result<()> {
    if body.radius > MAX_SPHERE_RADIUS_CM {
        return Err(KmodelError::domain(
            "sphere radius [cm]",
            "at most 100 cm",
            body.radius,
        ));
    }
    Ok(())
}

/// Cell length from the Monte Carlo sphere integral and log-scale bisection,
/// without substituting closed forms.
pub fn solve_sphere_cell_numeric(
    body: &SphereBody,
    constants: &PhysicalConstants,
    mc: &MonteCarloSpec,
    options: &CellSolverOptions,
) -> Result<CellResult> {
    validate_sphere(body)?;
    mc.validate()?;
    let prefactor = sphere_prefactor(body, constants);
    let target = options.threshold * options.threshold;
    let mut sampler = BallPairSampler::new(body.radius, mc.seed);
    sampler.ensure(mc.samples);
    let n = mc.samples;
    let spread_sq = |a: f64| prefactor * sampler.estimate(a, n).value;

    let root = bisect_log(|a| Ok(spread_sq(a) - target), options.bracket(), options.rel_tol, 400)?;

    let at_root = sampler.estimate(root, n);
    let rel = at_root.rel_error();
    if rel > mc.target_rel_error {
        return Err(KmodelError::Numerical {
            message: format!(
                "sphere integral at a = {root:e} cm not converged with {n} samples (target {:e})",
                mc.target_rel_error
            ),
            error_estimate: rel,
        });
    }
    let step: f64 = 1.01;
    let up = sampler.estimate(root * step, n).value;
    let down = sampler.estimate(root / step, n).value;
    let slope = if up > 0.0 && down > 0.0 {
        (up / down).ln() / (2.0 * step.ln())
    } else {
        2.0 / 3.0
    };
    let error_estimate = rel / slope.abs().max(2.0 / 3.0) + options.rel_tol;
    Ok(CellResult {
        cell_length: root,
        regime: classify_regime(root, body.radius),
        method: CellMethod::RootFindMonteCarlo,
        error_estimate,
    })
}

fn closed_form_result(body: &SphereBody, constants: &PhysicalConstants, far: bool) -> CellResult {
    let (cell_length, method, error_estimate) = if far {
        let a = cell_length_sphere_far(body, constants);
        (a, CellMethod::ClosedFormFar, (body.radius / a).powf(2.0 / 3.0))
    } else {
        let a = cell_length_sphere_near(body, constants);
        (a, CellMethod::ClosedFormNear, (a / body.radius).powf(5.0 / 3.0))
    };
    CellResult {
        cell_length,
        regime: classify_regime(cell_length, body.radius),
        method,
        error_estimate,
    }
}

/// Cell length of a homogeneous sphere with the default solver options.
pub fn cell_length_sphere(
    body: &SphereBody,
    constants: &PhysicalConstants,
    mc: &MonteCarloSpec,
) -> Result<CellResult> {
    cell_length_sphere_with(body, constants, mc, &CellSolverOptions::default())
}

/// Solves for the cell length numerically; when the result lies more than
/// three decades from `R` the matching closed form is returned instead.
pub fn cell_length_sphere_with(
    body: &SphereBody,
    constants: &PhysicalConstants,
    mc: &MonteCarloSpec,
    options: &CellSolverOptions,
) -> Result<CellResult> {
    let radius = body.radius;
    match solve_sphere_cell_numeric(body, constants, mc, options) {
        Ok(result) => {
            let ratio = result.cell_length / radius;
            if ratio > 1e3 {
                Ok(closed_form_result(body, constants, true))
            } else if ratio < 1e-3 {
                Ok(closed_form_result(body, constants, false))
            } else {
                Ok(result)
            }
        }
        Err(KmodelError::Solver(message)) => {
            if cell_length_sphere_far(body, constants) / radius > 1e3 {
                Ok(closed_form_result(body, constants, true))
            } else if cell_length_sphere_near(body, constants) / radius < 1e-3 {
                Ok(closed_form_result(body, constants, false))
            } else {
                Err(KmodelError::Solver(message))
            }
        }
        Err(other) => Err(other),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Transition {
    /// R_tr [cm]
    pub radius: f64,
    /// M_tr [g]
    pub mass: f64,
}

/// Radius and mass at which the far-regime cell length of a sphere of the
/// given density equals its radius.
pub fn transition_solve(density: f64, constants: &PhysicalConstants) -> Result<Transition> {
    let density = require_positive("density", density)?;
    let mass_at = |r: f64| density * ball_volume(r);
    // ln a_c − ln R = 3 ln L − 2 ln Λ − ln R, in logs so extreme brackets stay finite
    let ln_volume_factor = (4.0 * PI / 3.0).ln();
    let ln_lambda = constants.planck_length.ln();
    let ln_hbar_over_c = (constants.hbar / constants.c).ln();
    let mismatch = |r: f64| {
        let ln_r = r.ln();
        let ln_mass = density.ln() + ln_volume_factor + 3.0 * ln_r;
        let ln_compton = ln_hbar_over_c - ln_mass;
        Ok(3.0 * ln_compton - 2.0 * ln_lambda - ln_r)
    };
    let radius = bisect_log(mismatch, Bracket::new(1e-100, 1e100), 1e-13, 400)?;
    Ok(Transition {
        radius,
        mass: mass_at(radius),
    })
}

/// `n` equal point masses summing to `mass`, placed uniformly at random in a
/// ball of radius `radius` centred on the origin.
pub fn uniform_ball_configuration(mass: f64, radius: f64, n: usize, seed: u64) -> Result<PointConfiguration> {
    require_positive("mass", mass)?;
    require_positive("radius", radius)?;
    if n == 0 {
        return Err(KmodelError::Structural("a ball needs at least one point".into()));
    }
    let mut rng = KeyedStreams::new(seed).stream(0);
    let positions = (0..n)
        .map(|_| {
            let p = unit_ball_point(&mut rng);
            [p[0] * radius, p[1] * radius, p[2] * radius]
        })
        .collect();
    PointConfiguration::new(vec![mass / n as f64; n], positions)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct RigidCellOptions {
    pub solver: CellSolverOptions,
    pub discretization: Discretization,
}

const AXES: [Vec3; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

/// Phase spread squared for a rigid translation of length `a`, averaged over
/// the three coordinate axes.
pub fn axis_averaged_spread_squared(
    config: &PointConfiguration,
    a: f64,
    constants: &PhysicalConstants,
    discretization: Discretization,
) -> Result<f64> {
    let mut total = 0.0;
    for axis in AXES {
        let shift = [a * axis[0], a * axis[1], a * axis[2]];
        total += rigid_shift_spread(config, shift, constants, discretization)?.delta_phi_squared;
    }
    Ok(total / 3.0)
}

/// Cell length of an arbitrary rigid point-mass body: the translation length
/// at which the axis-averaged phase spread reaches the threshold.
pub fn rigid_body_cell_length(
    config: &PointConfiguration,
    constants: &PhysicalConstants,
    options: &RigidCellOptions,
) -> Result<f64> {
    let target = options.solver.threshold * options.solver.threshold;
    bisect_log(
        |a| Ok(axis_averaged_spread_squared(config, a, constants, options.discretization)? - target),
        options.solver.bracket(),
        options.solver.rel_tol,
        400,
    )
}
