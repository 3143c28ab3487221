//! Typed requests and their execution. Both the flag parser and run manifests
//! build a [`Request`]; everything after that is shared.

use std::path::PathBuf;

use kmodel_core::cell::{
    cell_length_point, cell_length_sphere, transition_solve, CellMethod, MonteCarloSpec, Regime, SphereBody,
};
use kmodel_core::numerics::QuadratureSpec;
use kmodel_core::phase::{phase_spread, phase_spread_fourier_oracle, ConfigurationPair, Vec3};
use kmodel_core::sim::{cycle_time, expansion_time, msd_analysis, run_ensemble, SimConfig, Trajectory};
use kmodel_core::spacetime::{synchronization_uncertainty, time_interval_uncertainty};
use kmodel_core::{KmodelError, PhysicalConstants};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, EXIT_CHECK_FAILED, EXIT_OK};
use crate::reproduce::{reproduce_tables, ReproRow};

/// Seed used when neither a flag, a manifest parameter nor `KMODEL_SEED` sets one.
pub const DEFAULT_SEED: u64 = 0x6b6d6f64;
pub const DEFAULT_SPHERE_SAMPLES: u64 = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UncertaintyInput {
    Time(f64),
    Distance(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellRequest {
    Point { mass_g: f64 },
    Sphere { mass_g: f64, radius_cm: f64, samples: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateRequest {
    pub config: SimConfig,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Request {
    Constants,
    Uncertainty(UncertaintyInput),
    Spread { config: PathBuf, oracle: bool },
    Cell(CellRequest),
    Transition { density_g_cm3: f64 },
    Simulate(SimulateRequest),
    Reproduce,
}

/// Spread input file. Positions are `[x, y, z]` triples in cm.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpreadConfig {
    pub masses_g: Vec<f64>,
    pub positions_a_cm: Vec<Vec3>,
    pub positions_b_cm: Vec<Vec3>,
}

/// Serialized command output and the exit status to report.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub body: String,
    pub exit_code: i32,
}

impl Output {
    fn ok(body: String) -> Self {
        Output {
            body,
            exit_code: EXIT_OK,
        }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output values serialize");
    s.push('\n');
    s
}

fn csv_rows<T: Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::usage(format!("csv output failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn render<T: Serialize>(value: &T, format: OutputFormat) -> Result<String, CliError> {
    match format {
        OutputFormat::Json => Ok(json(value)),
        OutputFormat::Csv => csv_rows(std::slice::from_ref(value)),
    }
}

#[derive(Debug, Serialize)]
struct ConstantsOut {
    lambda_cm: f64,
    t_p_s: f64,
    hbar_erg_s: f64,
    c_cm_s: f64,
    g_cgs: f64,
    m_p_g: f64,
    rho_p_g_cm3: f64,
}

#[derive(Debug, Serialize)]
struct UncertaintyOut {
    quantity: &'static str,
    input: f64,
    input_unit: &'static str,
    value_s: f64,
    in_validity_domain: bool,
}

#[derive(Debug, Serialize)]
struct SpreadOut {
    delta_phi_squared: f64,
    delta_phi: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_delta_phi_squared: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_ratio: Option<f64>,
}

#[derive(Debug, Serialize)]
struct CellOut {
    a_c_cm: f64,
    regime: Option<Regime>,
    method: CellMethod,
    rel_error: f64,
}

#[derive(Debug, Serialize)]
struct TransitionOut {
    density_g_cm3: f64,
    r_tr_cm: f64,
    m_tr_g: f64,
}

#[derive(Debug, Serialize)]
struct RunSummary {
    run: usize,
    seed: u64,
    event_count: usize,
    mean_cycle_s: Option<f64>,
    d_eff_cm2_s: Option<f64>,
}

#[derive(Debug, Serialize)]
struct SimulateOut {
    mass_g: f64,
    cell_cm: f64,
    duration_s: f64,
    dimensions: usize,
    expansion_time_s: f64,
    analytic_cycle_s: f64,
    event_count: usize,
    mean_cycle_s: Option<f64>,
    d_eff_cm2_s: Option<f64>,
    runs: Vec<RunSummary>,
}

#[derive(Debug, Serialize)]
struct EventRow {
    run: usize,
    t_s: f64,
    old_x_cm: f64,
    old_y_cm: f64,
    old_z_cm: f64,
    new_x_cm: f64,
    new_y_cm: f64,
    new_z_cm: f64,
}

#[derive(Debug, Serialize)]
struct ReproduceOut<'a> {
    all_pass: bool,
    rows: &'a [ReproRow],
}

pub fn execute(request: &Request, format: OutputFormat, constants: &PhysicalConstants) -> Result<Output, CliError> {
    match request {
        Request::Constants => {
            let k = constants;
            render(
                &ConstantsOut {
                    lambda_cm: k.planck_length,
                    t_p_s: k.planck_time,
                    hbar_erg_s: k.hbar,
                    c_cm_s: k.c,
                    g_cgs: k.g,
                    m_p_g: k.planck_mass,
                    rho_p_g_cm3: k.planck_density,
                },
                format,
            )
            .map(Output::ok)
        }
        Request::Uncertainty(input) => {
            let out = match *input {
                UncertaintyInput::Time(t) => {
                    let r = time_interval_uncertainty(t, constants)?;
                    UncertaintyOut {
                        quantity: "time_interval",
                        input: t,
                        input_unit: "s",
                        value_s: r.value,
                        in_validity_domain: r.in_validity_domain,
                    }
                }
                UncertaintyInput::Distance(d) => {
                    let r = synchronization_uncertainty(d, constants)?;
                    UncertaintyOut {
                        quantity: "synchronization",
                        input: d,
                        input_unit: "cm",
                        value_s: r.value,
                        in_validity_domain: r.in_validity_domain,
                    }
                }
            };
            render(&out, format).map(Output::ok)
        }
        Request::Spread { config, oracle } => {
            let pair = load_spread_config(config)?;
            let value = phase_spread(&pair, constants);
            let (oracle_sq, ratio) = if *oracle {
                let o = phase_spread_fourier_oracle(&pair, constants, &QuadratureSpec::default(), None)?;
                let ratio = if value.delta_phi_squared > 0.0 {
                    Some(o.delta_phi_squared / value.delta_phi_squared)
                } else {
                    None
                };
                (Some(o.delta_phi_squared), ratio)
            } else {
                (None, None)
            };
            render(
                &SpreadOut {
                    delta_phi_squared: value.delta_phi_squared,
                    delta_phi: value.delta_phi,
                    oracle_delta_phi_squared: oracle_sq,
                    oracle_ratio: ratio,
                },
                format,
            )
            .map(Output::ok)
        }
        Request::Cell(cell) => {
            let out = match *cell {
                // the point formula is the far-regime form for a single mass
                CellRequest::Point { mass_g } => CellOut {
                    a_c_cm: cell_length_point(mass_g, constants)?,
                    regime: None,
                    method: CellMethod::ClosedFormFar,
                    rel_error: 0.0,
                },
                CellRequest::Sphere {
                    mass_g,
                    radius_cm,
                    samples,
                    seed,
                } => {
                    let body = SphereBody::new(mass_g, radius_cm)?;
                    let mc = MonteCarloSpec::new(samples, seed, MonteCarloSpec::default().target_rel_error)?;
                    let r = cell_length_sphere(&body, constants, &mc)?;
                    CellOut {
                        a_c_cm: r.cell_length,
                        regime: Some(r.regime),
                        method: r.method,
                        rel_error: r.error_estimate,
                    }
                }
            };
            render(&out, format).map(Output::ok)
        }
        Request::Transition { density_g_cm3 } => {
            let tr = transition_solve(*density_g_cm3, constants)?;
            render(
                &TransitionOut {
                    density_g_cm3: *density_g_cm3,
                    r_tr_cm: tr.radius,
                    m_tr_g: tr.mass,
                },
                format,
            )
            .map(Output::ok)
        }
        Request::Simulate(sim) => simulate(sim, format, constants).map(Output::ok),
        Request::Reproduce => {
            let rows = reproduce_tables(constants)?;
            let all_pass = rows.iter().all(|r| r.pass);
            let body = match format {
                OutputFormat::Json => json(&ReproduceOut {
                    all_pass,
                    rows: &rows,
                }),
                OutputFormat::Csv => csv_rows(&rows)?,
            };
            Ok(Output {
                body,
                exit_code: if all_pass { EXIT_OK } else { EXIT_CHECK_FAILED },
            })
        }
    }
}

fn load_spread_config(path: &PathBuf) -> Result<ConfigurationPair, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let cfg: SpreadConfig = serde_json::from_str(&text).map_err(|e| {
        CliError::usage(format!("invalid spread config: {e}"))
            .with_context(serde_json::json!({ "path": path.display().to_string() }))
    })?;
    Ok(ConfigurationPair::new(cfg.masses_g, cfg.positions_a_cm, cfg.positions_b_cm)?)
}

fn summarize(run: usize, seed: u64, traj: &Trajectory) -> Result<RunSummary, CliError> {
    let d_eff = match msd_analysis(traj) {
        Ok(m) => Some(m.d_eff),
        Err(KmodelError::InsufficientData { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(RunSummary {
        run,
        seed,
        event_count: traj.events.len(),
        mean_cycle_s: traj.mean_cycle(),
        d_eff_cm2_s: d_eff,
    })
}

fn mean_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    if v.is_empty() {
        None
    } else {
        Some(v.iter().sum::<f64>() / v.len() as f64)
    }
}

fn simulate(sim: &SimulateRequest, format: OutputFormat, constants: &PhysicalConstants) -> Result<String, CliError> {
    let c = &sim.config;
    let trajectories = run_ensemble(c, sim.runs, constants)?;
    match format {
        OutputFormat::Csv => {
            let rows: Vec<EventRow> = trajectories
                .iter()
                .enumerate()
                .flat_map(|(run, t)| {
                    t.events.iter().map(move |e| EventRow {
                        run,
                        t_s: e.time,
                        old_x_cm: e.old_center[0],
                        old_y_cm: e.old_center[1],
                        old_z_cm: e.old_center[2],
                        new_x_cm: e.new_center[0],
                        new_y_cm: e.new_center[1],
                        new_z_cm: e.new_center[2],
                    })
                })
                .collect();
            if rows.is_empty() {
                // header only, so downstream tools still see the schema
                return Ok("run,t_s,old_x_cm,old_y_cm,old_z_cm,new_x_cm,new_y_cm,new_z_cm\n".into());
            }
            csv_rows(&rows)
        }
        OutputFormat::Json => {
            let runs = trajectories
                .iter()
                .enumerate()
                .map(|(i, t)| summarize(i, kmodel_core::numerics::derive_seed(c.seed, i as u64), t))
                .collect::<Result<Vec<_>, _>>()?;
            let out = SimulateOut {
                mass_g: c.mass,
                cell_cm: c.cell_length,
                duration_s: c.duration,
                dimensions: c.dimensions,
                expansion_time_s: expansion_time(c.mass, c.cell_length, constants)?,
                analytic_cycle_s: cycle_time(c.mass, c.cell_length, constants)?,
                event_count: runs.iter().map(|r| r.event_count).sum(),
                mean_cycle_s: mean_of(runs.iter().map(|r| r.mean_cycle_s)),
                d_eff_cm2_s: mean_of(runs.iter().map(|r| r.d_eff_cm2_s)),
                runs,
            };
            Ok(json(&out))
        }
    }
}
