//! Approximate differentiability of sets: tangent planes, the iterated
//! homogeneous jet fit and its cross-checks.

mod checks;
mod fit;
mod iterate;
mod tangent;

pub use checks::{implied_orders, jet_gap, jet_uniqueness_crosscheck, order_monotonicity_check, shear_invariance_check, uniqueness_from_fit, verify_graph_residual, Uniqueness};
pub use fit::{fit_forms, fit_homogeneous_form, refine_plane, FormFit};
pub use iterate::{cylinder_condition, hoelder_constant_search, iterated_jet_fit, reduced_oracle, residual_condition, JetFit, StageReport};
pub use tangent::{estimate_tangent_plane, estimate_tangent_plane_with_dim, validate_plane, PlaneEstimate};

use crate::config::Config;
use crate::density::ScaleSchedule;
use crate::error::Result;
use crate::geometry::Vector;
use crate::measure::MeasureOracle;

/// Classification of a point at order (k, alpha): the verdict of the
/// iterated fit.
pub fn classify(oracle: &MeasureOracle, a: &Vector, k: usize, alpha: f64, schedule: &ScaleSchedule, cfg: &Config) -> Result<JetFit> {
    iterated_jet_fit(oracle, a, k, alpha, schedule, cfg)
}

#[cfg(test)]
mod tests;
