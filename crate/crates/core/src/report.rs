//! The analysis report written by `gmtjet analyze`: tangent plane, iterated
//! jet, second fundamental form, the density traces behind them and a verdict
//! per test.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::density::{lower_density, upper_density, DensityTrace, ScaleSchedule};
use crate::error::Result;
use crate::geometry::{JetJson, Vector};
use crate::jet::{iterated_jet_fit, uniqueness_from_fit};
use crate::measure::MeasureOracle;
use crate::sff::approximate_sff;
use crate::verdict::Status;

pub const REPORT_VERSION: &str = concat!("gmtjet-report/", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentJson {
    pub m: Option<usize>,
    pub basis: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub input: String,
    pub point: Vec<f64>,
    pub order: (usize, f64),
    pub schedule: ScaleSchedule,
    pub tangent: TangentJson,
    pub jet: Option<JetJson>,
    /// sff(t_i, t_j) on the tangent basis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sff: Option<Vec<Vec<Vec<f64>>>>,
    pub traces: Vec<DensityTrace>,
    pub verdicts: BTreeMap<String, Status>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// Seconds per stage. The only field that varies between identical runs.
    pub timings: BTreeMap<String, f64>,
}

impl Report {
    /// Overall status: the verdict of the order (k, alpha) classification.
    pub fn status(&self) -> Status {
        self.verdicts.get("classify").copied().unwrap_or(Status::Inconclusive)
    }

    pub fn trace(&self, label: &str) -> Option<&DensityTrace> {
        self.traces.iter().find(|t| t.label == label)
    }
}

/// Density traces, tangent plane, iterated jet of order (k, alpha) and, when
/// the jet has degree >= 2, the approximate sff.
pub fn analyze(oracle: &MeasureOracle, input: &str, a: &Vector, k: usize, alpha: f64, schedule: &ScaleSchedule, cfg: &Config) -> Result<Report> {
    let start = Instant::now();
    let mut timings = BTreeMap::new();
    let mut verdicts = BTreeMap::new();
    let mut notes = Vec::new();

    let upper = upper_density(oracle, a, schedule, cfg);
    let lower = lower_density(oracle, a, schedule, cfg);
    verdicts.insert("lower_density_positive".to_string(), lower.positivity(cfg));
    timings.insert("densities".to_string(), start.elapsed().as_secs_f64());

    let t = Instant::now();
    let fit = iterated_jet_fit(oracle, a, k, alpha, schedule, cfg)?;
    timings.insert("jet".to_string(), t.elapsed().as_secs_f64());
    verdicts.insert("tangent_plane".to_string(), fit.plane_estimate.verdict.status);
    for s in &fit.stages {
        verdicts.insert(format!("stage_{}", s.degree), s.status());
    }
    verdicts.insert("classify".to_string(), fit.verdict.status);
    notes.extend(fit.plane_estimate.verdict.notes.iter().cloned());
    notes.extend(fit.verdict.notes.iter().cloned());

    let tangent = match fit.jet.as_ref().map(|j| j.plane()).or(fit.plane_estimate.plane.as_ref()) {
        Some(p) => TangentJson { m: Some(p.dim()), basis: p.basis_vectors().iter().map(|v| v.iter().copied().collect()).collect() },
        None => TangentJson { m: fit.plane_estimate.dim, basis: Vec::new() },
    };

    let mut sff_table = None;
    if let Some(jet) = fit.jet.as_ref().filter(|_| fit.verdict.holds()) {
        let t = Instant::now();
        let u = uniqueness_from_fit(oracle, &fit, schedule, cfg)?;
        verdicts.insert("uniqueness".to_string(), u.verdict.status);
        if jet.degree() >= 2 {
            let sff = approximate_sff(jet)?;
            let basis = jet.plane().basis_vectors();
            let table = basis.iter().map(|u| basis.iter().map(|v| sff.eval(u, v).map(|x| x.iter().copied().collect())).collect::<Result<Vec<Vec<f64>>>>()).collect::<Result<Vec<_>>>()?;
            sff_table = Some(table);
            verdicts.insert("sff".to_string(), Status::Holds);
        }
        timings.insert("sff".to_string(), t.elapsed().as_secs_f64());
    }

    let mut traces = vec![upper, lower];
    traces.extend(fit.plane_estimate.verdict.traces.iter().cloned());
    traces.extend(fit.verdict.traces.iter().cloned());
    timings.insert("total".to_string(), start.elapsed().as_secs_f64());

    Ok(Report {
        version: REPORT_VERSION.to_string(),
        input: input.to_string(),
        point: a.iter().copied().collect(),
        order: (k, alpha),
        schedule: *schedule,
        tangent,
        jet: fit.jet.as_ref().map(|j| j.to_json()),
        sff: sff_table,
        traces,
        verdicts,
        notes,
        timings,
    })
}
