//! Expansion–localization dynamics of an isolated body's centre of mass.
//!
//! The packet is a Gaussian of width σ that spreads freely. Its size is the
//! diameter 2σ: once σ reaches the cell length a_c, the packet localizes
//! instantaneously. The new centre is drawn from the pre-localization Gaussian
//! and σ resets to a_c/2. Localizations fire at the exact crossing time, so
//! every cycle after the first lasts `√3 M (a_c/2)²/ħ`.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use libm::{erf, erfc};

use crate::error::{require_positive, KmodelError, Result};
use crate::numerics::{derive_seed, KeyedStreams};
use crate::phase::Vec3;
use crate::units::PhysicalConstants;

/// Minimum number of localization events for [`msd_analysis`].
pub const MIN_MSD_EVENTS: usize = 100;

/// Characteristic cycle time `M a_c²/ħ` (coefficient 1).
pub fn expansion_time(mass: f64, cell_length: f64, constants: &PhysicalConstants) -> Result<f64> {
    require_positive("mass", mass)?;
    require_positive("cell length", cell_length)?;
    Ok(mass * cell_length * cell_length / constants.hbar)
}

/// Velocity uncertainty `ħ/(M a_c)` of a body localized to one cell.
pub fn velocity_uncertainty(mass: f64, cell_length: f64, constants: &PhysicalConstants) -> Result<f64> {
    require_positive("mass", mass)?;
    require_positive("cell length", cell_length)?;
    Ok(constants.hbar / (mass * cell_length))
}

/// Width of a free Gaussian packet after time `t`:
/// `σ₀ √(1 + (ħt/(Mσ₀²))²)`.
pub fn free_sigma(sigma0: f64, t: f64, mass: f64, constants: &PhysicalConstants) -> Result<f64> {
    require_positive("initial width", sigma0)?;
    require_positive("mass", mass)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(KmodelError::domain("time", "non-negative and finite", t));
    }
    Ok(spread(sigma0, t, mass, constants.hbar))
}

#[inline]
fn spread(sigma0: f64, t: f64, mass: f64, hbar: f64) -> f64 {
    let x = hbar * t / (mass * sigma0 * sigma0);
    sigma0 * (1.0 + x * x).sqrt()
}

/// Time for a free packet to grow from `sigma0` to `sigma1 ≥ sigma0`.
pub fn spreading_time(sigma0: f64, sigma1: f64, mass: f64, constants: &PhysicalConstants) -> Result<f64> {
    require_positive("initial width", sigma0)?;
    require_positive("mass", mass)?;
    if sigma1 < sigma0 {
        return Err(KmodelError::domain("target width", "at least the initial width", sigma1));
    }
    Ok(crossing(sigma0, sigma1, mass, constants.hbar))
}

#[inline]
fn crossing(sigma0: f64, sigma1: f64, mass: f64, hbar: f64) -> f64 {
    let ratio = sigma1 / sigma0;
    mass * sigma0 * sigma0 / hbar * (ratio * ratio - 1.0).max(0.0).sqrt()
}

/// Analytic cycle length: growth from a_c/2 to a_c, `√3 M a_c²/(4ħ)`.
pub fn cycle_time(mass: f64, cell_length: f64, constants: &PhysicalConstants) -> Result<f64> {
    spreading_time(0.5 * cell_length, cell_length, mass, constants)
}

/// Born weight of a Gaussian packet inside `[lo, hi]`.
pub fn weight_in_region(center: f64, sigma: f64, lo: f64, hi: f64) -> Result<f64> {
    require_positive("sigma", sigma)?;
    if lo.is_nan() || hi.is_nan() || center.is_nan() {
        return Err(KmodelError::domain("interval bound", "a number", f64::NAN));
    }
    if hi < lo {
        return Err(KmodelError::Structural(format!(
            "interval [{lo:e}, {hi:e}] is not ordered"
        )));
    }
    if hi == lo {
        return Ok(0.0);
    }
    let scale = sigma * std::f64::consts::SQRT_2;
    let z_lo = (lo - center) / scale;
    let z_hi = (hi - center) / scale;
    let tail = |z: f64| {
        if z == f64::INFINITY {
            0.0
        } else if z == f64::NEG_INFINITY {
            2.0
        } else {
            erfc(z)
        }
    };
    let w = if z_lo >= 0.0 {
        0.5 * (tail(z_lo) - tail(z_hi))
    } else if z_hi <= 0.0 {
        0.5 * (tail(-z_hi) - tail(-z_lo))
    } else {
        let e = |z: f64| if z.is_infinite() { z.signum() } else { erf(z) };
        0.5 * (e(z_hi) - e(z_lo))
    };
    Ok(w.clamp(0.0, 1.0))
}

/// Weight of an isotropic Gaussian inside an axis-aligned box (product over the
/// first `dimensions` axes).
pub fn weight_in_box(center: &Vec3, sigma: f64, lo: &Vec3, hi: &Vec3, dimensions: usize) -> Result<f64> {
    let mut w = 1.0;
    for axis in 0..dimensions.min(3) {
        w *= weight_in_region(center[axis], sigma, lo[axis], hi[axis])?;
    }
    Ok(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    /// M [g]
    pub mass: f64,
    /// a_c [cm]
    pub cell_length: f64,
    /// σ at t = 0 [cm]
    pub initial_sigma: f64,
    /// [s]
    pub duration: f64,
    /// [s]
    pub time_step: f64,
    pub seed: u64,
    /// 1 or 3
    pub dimensions: usize,
}

impl SimConfig {
    pub fn validate(&self, constants: &PhysicalConstants) -> Result<()> {
        for (name, v) in [
            ("mass", self.mass),
            ("cell length", self.cell_length),
            ("initial sigma", self.initial_sigma),
            ("duration", self.duration),
            ("time step", self.time_step),
        ] {
            require_positive(name, v)?;
        }
        if self.dimensions != 1 && self.dimensions != 3 {
            return Err(KmodelError::Config(format!(
                "dimensions must be 1 or 3, got {}",
                self.dimensions
            )));
        }
        if self.time_step >= self.duration {
            return Err(KmodelError::Config(format!(
                "time step {:e} s must be shorter than the duration {:e} s",
                self.time_step, self.duration
            )));
        }
        if self.initial_sigma > 0.5 * self.cell_length {
            return Err(KmodelError::Config(format!(
                "initial sigma {:e} cm exceeds half the cell length {:e} cm",
                self.initial_sigma, self.cell_length
            )));
        }
        let tau = expansion_time(self.mass, self.cell_length, constants)?;
        if self.time_step > tau / 10.0 {
            return Err(KmodelError::Config(format!(
                "time step {:e} s cannot resolve the cycle time {tau:e} s (need at most tau/10)",
                self.time_step
            )));
        }
        let steps = self.duration / self.time_step;
        if steps > 1e9 {
            return Err(KmodelError::Config(format!(
                "{steps:e} time steps requested; at most 1e9 are supported"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalizationEvent {
    pub time: f64,
    pub old_center: Vec3,
    pub new_center: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub dimensions: usize,
    /// [s], strictly increasing
    pub times: Vec<f64>,
    /// [cm]; unused axes are zero in one dimension
    pub centers: Vec<Vec3>,
    /// [cm]
    pub sigmas: Vec<f64>,
    pub events: Vec<LocalizationEvent>,
}

impl Trajectory {
    fn push(&mut self, t: f64, center: Vec3, sigma: f64) {
        self.times.push(t);
        self.centers.push(center);
        self.sigmas.push(sigma);
    }

    /// Intervals between consecutive localizations.
    pub fn inter_event_times(&self) -> Vec<f64> {
        self.events.windows(2).map(|w| w[1].time - w[0].time).collect()
    }

    pub fn mean_cycle(&self) -> Option<f64> {
        let gaps = self.inter_event_times();
        if gaps.is_empty() {
            None
        } else {
            Some(gaps.iter().sum::<f64>() / gaps.len() as f64)
        }
    }
}

/// Runs one expansion–localization history. Grid points sit at multiples of
/// the time step; each localization adds a sample at its exact firing time,
/// holding the post-localization state.
pub fn run_simulation(config: &SimConfig, constants: &PhysicalConstants) -> Result<Trajectory> {
    config.validate(constants)?;
    let SimConfig {
        mass,
        cell_length,
        initial_sigma,
        duration,
        time_step,
        seed,
        dimensions,
    } = *config;
    let hbar = constants.hbar;
    let streams = KeyedStreams::new(seed);
    let reset_sigma = 0.5 * cell_length;
    let cycle = crossing(reset_sigma, cell_length, mass, hbar);

    let steps = (duration / time_step).ceil() as u64;
    let mut traj = Trajectory {
        dimensions,
        times: Vec::with_capacity(steps as usize + 1),
        centers: Vec::with_capacity(steps as usize + 1),
        sigmas: Vec::with_capacity(steps as usize + 1),
        events: Vec::new(),
    };

    let mut center = [0.0; 3];
    let mut sigma_start = initial_sigma;
    let mut last_reset = 0.0;
    let mut next_event = crossing(initial_sigma, cell_length, mass, hbar);
    traj.push(0.0, center, initial_sigma);

    for k in 1..=steps {
        let t_grid = (k as f64 * time_step).min(duration);
        while next_event <= t_grid {
            let mut rng = streams.stream(traj.events.len() as u64);
            let old = center;
            let mut new = old;
            for coord in new.iter_mut().take(dimensions) {
                let z: f64 = StandardNormal.sample(&mut rng);
                *coord += cell_length * z;
            }
            traj.events.push(LocalizationEvent {
                time: next_event,
                old_center: old,
                new_center: new,
            });
            center = new;
            sigma_start = reset_sigma;
            last_reset = next_event;
            if next_event > *traj.times.last().expect("trajectory starts at t = 0") {
                traj.push(next_event, center, reset_sigma);
            } else {
                // fired exactly on the previous grid point: that sample now holds the reset state
                let last = traj.times.len() - 1;
                traj.centers[last] = center;
                traj.sigmas[last] = reset_sigma;
            }
            next_event = last_reset + cycle;
        }
        if t_grid > *traj.times.last().expect("trajectory starts at t = 0") {
            let sigma = spread(sigma_start, t_grid - last_reset, mass, hbar);
            traj.push(t_grid, center, sigma);
        }
    }
    Ok(traj)
}

/// Independent runs with per-run seeds derived from the configured seed.
pub fn run_ensemble(config: &SimConfig, runs: usize, constants: &PhysicalConstants) -> Result<Vec<Trajectory>> {
    if runs == 0 {
        return Err(KmodelError::Config("an ensemble needs at least one run".into()));
    }
    config.validate(constants)?;
    (0..runs)
        .into_par_iter()
        .map(|i| {
            let member = SimConfig {
                seed: derive_seed(config.seed, i as u64),
                ..*config
            };
            run_simulation(&member, constants)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MsdResult {
    /// D_eff [cm²/s] from MSD = 2 d D_eff t
    pub d_eff: f64,
    /// Relative RMS residual of the linear fit.
    pub fit_residual: f64,
    /// Log-log slope of MSD against lag time.
    pub exponent: f64,
    /// (lag time [s], MSD [cm²])
    pub curve: Vec<(f64, f64)>,
}

/// Time-averaged mean-square displacement of the post-localization centres.
pub fn msd_analysis(trajectory: &Trajectory) -> Result<MsdResult> {
    let events = &trajectory.events;
    if events.len() < MIN_MSD_EVENTS {
        return Err(KmodelError::InsufficientData {
            needed: MIN_MSD_EVENTS,
            got: events.len(),
        });
    }
    let n = events.len();
    let max_lag = (n / 100).max(10);
    let mut lags: Vec<usize> = Vec::new();
    let mut lag = 1.0f64;
    while (lag as usize) <= max_lag {
        let l = lag as usize;
        if lags.last() != Some(&l) {
            lags.push(l);
        }
        lag *= 1.25;
    }
    let curve: Vec<(f64, f64)> = lags
        .iter()
        .map(|&k| {
            let count = (n - k) as f64;
            let (mut dt, mut msd) = (0.0, 0.0);
            for j in 0..(n - k) {
                let a = &events[j];
                let b = &events[j + k];
                dt += b.time - a.time;
                msd += (0..3).map(|c| (b.new_center[c] - a.new_center[c]).powi(2)).sum::<f64>();
            }
            (dt / count, msd / count)
        })
        .collect();

    let d = trajectory.dimensions as f64;
    let stt: f64 = curve.iter().map(|(t, _)| t * t).sum();
    let stm: f64 = curve.iter().map(|(t, m)| t * m).sum();
    let slope = stm / stt;
    let d_eff = slope / (2.0 * d);
    let ss_res: f64 = curve.iter().map(|(t, m)| (m - slope * t).powi(2)).sum();
    let ss_tot: f64 = curve.iter().map(|(_, m)| m * m).sum();
    let fit_residual = (ss_res / ss_tot).sqrt();

    let logs: Vec<(f64, f64)> = curve.iter().map(|(t, m)| (t.ln(), m.ln())).collect();
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / logs.len() as f64;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / logs.len() as f64;
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    Ok(MsdResult {
        d_eff,
        fit_residual,
        exponent: sxy / sxx,
        curve,
    })
}
