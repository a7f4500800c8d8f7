//! Numerical tolerances and grids. Every estimator reads its knobs from a
//! [`Config`]; the defaults are the values the test-suite is calibrated for.

use serde::{Deserialize, Serialize};

use crate::density::ScaleSchedule;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Config {
    /// Default scale schedule (r0 = 0.5, q = 2^-1/2, 24 scales).
    pub schedule: ScaleSchedule,
    /// Length of the sliding window used by the limit classifier.
    pub window: usize,
    /// Trailing statistics below this are candidates for a zero limit.
    pub tol_zero: f64,
    /// Inconclusive traces whose trailing minimum exceeds this are treated as
    /// bounded away from zero.
    pub tol_positive: f64,
    /// Relative spread allowed for a positive limit.
    pub spread_tol: f64,
    /// A strictly increasing trailing statistic beyond this diverges.
    pub diverge_threshold: f64,
    pub eps_grid: Vec<f64>,
    pub eta_grid: Vec<f64>,
    /// Exponents j of the lambda grid 2^j used for Hoelder remainders.
    pub lambda_exponents: Vec<i32>,
    /// Eigenvalue ratio that separates tangent from normal directions.
    pub eigen_gap: f64,
    /// Number of finest reliable scales used for the eigen-gap vote.
    pub pca_scales: usize,
    /// Number of finest reliable scales used for coefficient fits.
    pub fit_scales: usize,
    /// Samples with normal offset above c_trim * r are ignored by fits.
    pub c_trim: f64,
    pub ridge: f64,
    /// A scale r is reliable when r^m >= reliability * (largest atom nearby).
    pub reliability: f64,
    pub tol_unique: f64,
    pub kappa_inflation: f64,
    pub plane_angle_tol: f64,
    pub projector_tol: f64,
    pub minimize_tol: f64,
    pub bump_radius: f64,
    pub blowup_stability: f64,
    pub fd_steps: [f64; 3],
    pub identity_tol: f64,
    pub touching_tol: f64,
    pub emptiness_tol: f64,
    /// Nodes across a query ball for chart quadrature (1-dimensional charts).
    pub chart_resolution_1d: usize,
    /// Nodes across a query ball for chart quadrature (2-dimensional charts).
    pub chart_resolution_2d: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            schedule: ScaleSchedule::default(),
            window: 5,
            tol_zero: 1e-2,
            tol_positive: 1e-1,
            spread_tol: 0.05,
            diverge_threshold: 10.0,
            eps_grid: vec![0.3, 0.1, 0.03],
            eta_grid: vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
            lambda_exponents: (-6..=6).collect(),
            eigen_gap: 10.0,
            pca_scales: 3,
            fit_scales: 6,
            c_trim: 0.2,
            ridge: 1e-12,
            reliability: 10.0,
            tol_unique: 1e-2,
            kappa_inflation: 1e-2,
            plane_angle_tol: 1e-2,
            projector_tol: 1e-10,
            minimize_tol: 1e-10,
            bump_radius: 0.75,
            blowup_stability: 0.05,
            fd_steps: [1e-2, 1e-3, 1e-4],
            identity_tol: 1e-2,
            touching_tol: 1e-6,
            emptiness_tol: 1e-9,
            chart_resolution_1d: 256,
            chart_resolution_2d: 48,
        }
    }
}

impl Config {
    pub fn lambda_grid(&self) -> Vec<f64> {
        self.lambda_exponents.iter().map(|&j| 2f64.powi(j)).collect()
    }
}
