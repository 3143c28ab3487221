//! Order-of-magnitude regression against the published figures.

use kmodel_core::cell::{cell_length_point, cell_length_sphere_far, cell_length_sphere_near, transition_solve, SphereBody};
use kmodel_core::sim::velocity_uncertainty;
use kmodel_core::spacetime::time_interval_uncertainty;
use kmodel_core::units::ELECTRON_MASS_G;
use kmodel_core::{PhysicalConstants, Result};
use serde::Serialize;

/// Published values carry loose factors; a ratio within 10^±1.5 passes.
pub const RATIO_TOLERANCE: f64 = 31.622_776_601_683_793;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReproRow {
    pub name: String,
    pub computed: f64,
    #[serde(rename = "paper")]
    pub published: f64,
    pub ratio: f64,
    pub pass: bool,
}

impl ReproRow {
    fn order_of_magnitude(name: &str, computed: f64, published: f64) -> Self {
        let ratio = computed / published;
        ReproRow {
            name: name.into(),
            computed,
            published,
            ratio,
            pass: ratio.is_finite() && (1.0 / RATIO_TOLERANCE..=RATIO_TOLERANCE).contains(&ratio),
        }
    }

    fn lower_bound(name: &str, computed: f64, bound: f64) -> Self {
        let ratio = computed / bound;
        ReproRow {
            name: name.into(),
            computed,
            published: bound,
            ratio,
            pass: ratio > 1.0,
        }
    }
}

/// Recomputes the headline numbers with the given constants.
pub fn reproduce_tables(constants: &PhysicalConstants) -> Result<Vec<ReproRow>> {
    let k = constants;
    let ball = SphereBody::new(1.0, 1.0)?;
    let ball_cell = cell_length_sphere_near(&ball, k);
    let grain = SphereBody::new(1e-18, 1e-6)?;
    let tr = transition_solve(1.0, k)?;
    Ok(vec![
        ReproRow::order_of_magnitude("delta_t_1s_s", time_interval_uncertainty(1.0, k)?.value, 1e-29),
        ReproRow::order_of_magnitude("electron_a_c_cm", cell_length_point(ELECTRON_MASS_G, k)?, 1e33),
        ReproRow::order_of_magnitude("ball_1g_1cm_a_c_cm", ball_cell, 1e-16),
        ReproRow::order_of_magnitude("transition_radius_cm", tr.radius, 1e-5),
        ReproRow::order_of_magnitude("transition_mass_g", tr.mass, 1e-14),
        ReproRow::order_of_magnitude("ball_velocity_spread_cm_s", velocity_uncertainty(1.0, ball_cell, k)?, 1e-11),
        ReproRow::lower_bound(
            "grain_a_c_over_r_min",
            cell_length_sphere_far(&grain, k) / grain.radius(),
            1e10,
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use kmodel_core::units::{default_constants, GRAVITATIONAL_CONSTANT_CGS, SPEED_OF_LIGHT_CM_S};

    #[test]
    fn default_constants_reproduce_every_row() {
        let rows = reproduce_tables(&default_constants()).unwrap();
        assert_eq!(rows.len(), 7);
        for row in &rows {
            assert!(row.pass, "{row:?}");
        }
    }

    #[test]
    fn perturbed_constants_break_a_row() {
        let k = default_constants();
        let skewed = PhysicalConstants::from_base(
            10.0 * k.planck_length,
            10.0 * k.hbar,
            SPEED_OF_LIGHT_CM_S,
            GRAVITATIONAL_CONSTANT_CGS,
        );
        let rows = reproduce_tables(&skewed).unwrap();
        assert!(rows.iter().any(|r| !r.pass));
    }
}
