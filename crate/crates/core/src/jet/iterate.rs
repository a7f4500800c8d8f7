use rayon::prelude::*;
use serde::Serialize;

use super::fit::{fit_homogeneous_form, refine_plane};
use super::tangent::{estimate_tangent_plane, PlaneEstimate};
use crate::config::Config;
use crate::density::{ratio_trace, reliable_radii, ScaleSchedule, TraceKind};
use crate::error::{check_dim, Error, Result};
use crate::geometry::{unit_ball_volume, HomogeneousForm, Jet, Plane, Region, ShearMap, Vector};
use crate::measure::MeasureOracle;
use crate::verdict::{Status, Verdict};

/// Conditions (a) and (b) of one stage of the iterated scheme.
#[derive(Debug, Clone, Serialize)]
pub struct StageReport {
    pub degree: usize,
    /// Cylinder-mass condition over the probe grid on gr(P_i).
    pub cylinder: Status,
    /// Residual density of {dist(z, gr P_i) > eps r^i} tends to zero.
    pub residual: Status,
    /// Largest eta of the grid witnessed by the cylinder condition, per eps.
    pub eta: Vec<(f64, Option<f64>)>,
}

impl StageReport {
    pub fn status(&self) -> Status {
        self.cylinder.and(self.residual)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct JetFit {
    #[serde(skip)]
    pub jet: Option<Jet>,
    pub plane_estimate: PlaneEstimate,
    pub stages: Vec<StageReport>,
    /// Smallest lambda of the grid passing the Hoelder remainder test.
    pub lambda: Option<f64>,
    pub verdict: Verdict,
}

/// P_i as a jet with only that form (the zero jet for i = 1).
fn stage_jet(a: &Vector, plane: &Plane, form: Option<&HomogeneousForm>) -> Result<Jet> {
    match form {
        Some(f) => Jet::homogeneous(a.clone(), plane.clone(), f.clone()),
        None => Jet::zero(a.clone(), plane.clone(), 1, 0.0),
    }
}

/// The reduced measure A_i: the pushforward under x -> x - sum_j P_j(T(x - a)).
pub fn reduced_oracle(oracle: &MeasureOracle, a: &Vector, plane: &Plane, forms: &[HomogeneousForm]) -> Result<MeasureOracle> {
    if forms.is_empty() {
        return Ok(oracle.clone());
    }
    let map = ShearMap::new(plane.clone(), a.clone(), forms.iter().map(|f| (-1.0, f.clone())).collect())?;
    Ok(oracle.pushforward(&map))
}

/// Probe points a + chi + P_i(chi) for chi in {0, +-r/2 t_j}.
fn probe_grid(jet: &Jet, r: f64) -> Vec<Vector> {
    let m = jet.plane().dim();
    let mut chis = vec![vec![0.0; m]];
    for j in 0..m {
        for s in [0.5, -0.5] {
            let mut c = vec![0.0; m];
            c[j] = s * r;
            chis.push(c);
        }
    }
    chis.iter().map(|c| jet.graph_point(c)).collect()
}

/// Condition (a): for every eps some eta of the grid bounds
/// mass(C(T, z, eps r, eps r^i) and A_i) / (alpha(m) r^m) from below at all
/// probes z on the finest half of the reliable scales.
pub fn cylinder_condition(oracle_i: &MeasureOracle, jet_i: &Jet, degree: usize, radii: &[f64], cfg: &Config) -> (Status, Vec<(f64, Option<f64>)>) {
    let m = oracle_i.dim();
    let plane = jet_i.plane();
    let tested = &radii[radii.len() / 2..];
    let mut status = Status::Holds;
    let mut witnesses = Vec::new();
    for &eps in &cfg.eps_grid {
        let bounds: Vec<(f64, f64)> = tested
            .par_iter()
            .flat_map_iter(|&r| {
                let norm = unit_ball_volume(m) * r.powi(m as i32);
                probe_grid(jet_i, r).into_iter().map(move |z| {
                    let mass = oracle_i.mass(&Region::cylinder(plane, z, eps * r, eps * r.powi(degree as i32)));
                    ((mass.value - mass.error) / norm, (mass.value + mass.error) / norm)
                })
            })
            .collect();
        let lo = bounds.iter().map(|b| b.0).fold(f64::INFINITY, f64::min);
        let hi = bounds.iter().map(|b| b.1).fold(f64::INFINITY, f64::min);
        let eta = cfg.eta_grid.iter().copied().filter(|&e| lo >= e).fold(None, |acc: Option<f64>, e| Some(acc.map_or(e, |x| x.max(e))));
        let smallest = cfg.eta_grid.iter().copied().fold(f64::INFINITY, f64::min);
        let s = if eta.is_some() {
            Status::Holds
        } else if hi < smallest {
            Status::Fails
        } else {
            Status::Inconclusive
        };
        status = status.and(s);
        witnesses.push((eps, eta));
    }
    (status, witnesses)
}

/// Condition (b): the density of {dist(z, gr P_i) > eps r^exponent} in A_i
/// tends to zero, for every eps of `levels`.
pub fn residual_condition(oracle_i: &MeasureOracle, jet_i: &Jet, exponent: f64, levels: &[f64], schedule: &ScaleSchedule, cfg: &Config, verdict: &mut Verdict) -> Status {
    let a = jet_i.base();
    let mut status = Status::Holds;
    for &eps in levels {
        let t = ratio_trace(oracle_i, a, schedule, TraceKind::Upper, cfg, &format!("residual degree={} level={eps}", jet_i.degree()), |r| {
            Region::graph_far(jet_i, eps * r.powf(exponent))
        });
        status = status.and(t.vanishing(cfg));
        verdict.traces.push(t);
    }
    status
}

/// The smallest lambda of the grid for which {dist(z, gr P_k) > lambda
/// r^(k + alpha)} has vanishing density in A_k, with the combined status.
pub fn hoelder_constant_search(oracle_k: &MeasureOracle, jet_k: &Jet, exponent: f64, schedule: &ScaleSchedule, cfg: &Config, verdict: &mut Verdict) -> (Status, Option<f64>) {
    let mut lambdas = cfg.lambda_grid();
    lambdas.sort_by(f64::total_cmp);
    let mut seen = Vec::new();
    for lambda in lambdas {
        let mut scratch = Verdict::new(Status::Holds);
        let s = residual_condition(oracle_k, jet_k, exponent, &[lambda], schedule, cfg, &mut scratch);
        seen.push(s);
        if s == Status::Holds {
            verdict.traces.extend(scratch.traces);
            return (Status::Holds, Some(lambda));
        }
    }
    (Status::any(seen), None)
}

/// Iterated homogeneous fit of order (k, alpha) at a: tangent plane, then for
/// i = 1..k fit P_i on the reduced set A_i, check the cylinder and residual
/// conditions and reduce. With alpha > 0 the Hoelder remainder is tested on
/// A_k at exponent k + alpha.
pub fn iterated_jet_fit(oracle: &MeasureOracle, a: &Vector, k: usize, alpha: f64, schedule: &ScaleSchedule, cfg: &Config) -> Result<JetFit> {
    check_dim(oracle.ambient_dim(), a.len())?;
    if k == 0 || !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("need k >= 1 and 0 <= alpha <= 1 (got {k}, {alpha})")));
    }
    let est = estimate_tangent_plane(oracle, a, schedule, cfg)?;
    let Some((_, plane0)) = est.result() else {
        let status = match est.verdict.status {
            Status::Inconclusive => Status::Inconclusive,
            _ => Status::Fails,
        };
        let mut verdict = Verdict::new(status).note("tangent plane stage");
        verdict.notes.extend(est.verdict.notes.iter().cloned());
        return Ok(JetFit { jet: None, plane_estimate: est, stages: Vec::new(), lambda: None, verdict });
    };
    let radii = reliable_radii(oracle, a, schedule, cfg);
    let fit_radii = &radii[radii.len().saturating_sub(cfg.fit_scales)..];
    let mut plane = plane0.clone();
    for _ in 0..2 {
        match refine_plane(oracle, a, &plane, k, fit_radii, cfg) {
            Ok(p) => plane = p,
            Err(_) => break,
        }
    }

    let mut verdict = Verdict::new(Status::Holds);
    verdict.set_value("plane_refinement", plane.distance(plane0));
    let mut forms: Vec<HomogeneousForm> = Vec::new();
    let mut stages = Vec::new();
    let mut last = (oracle.clone(), stage_jet(a, &plane, None)?);
    for i in 1..=k {
        let oracle_i = reduced_oracle(oracle, a, &plane, &forms)?;
        let form = if i >= 2 {
            let reduced_radii = reliable_radii(&oracle_i, a, schedule, cfg);
            let rr = &reduced_radii[reduced_radii.len().saturating_sub(cfg.fit_scales)..];
            let f = fit_homogeneous_form(&oracle_i, a, &plane, i, k, rr, cfg)?;
            Some(if cfg!(feature = "fault-double-jet") { f.scaled(2.0) } else { f })
        } else {
            None
        };
        let jet_i = stage_jet(a, &plane, form.as_ref())?;
        let stage_radii = reliable_radii(&oracle_i, a, schedule, cfg);
        let (cylinder, eta) = if stage_radii.len() >= 2 { cylinder_condition(&oracle_i, &jet_i, i, &stage_radii, cfg) } else { (Status::Inconclusive, Vec::new()) };
        let residual = residual_condition(&oracle_i, &jet_i, i as f64, &cfg.eps_grid, schedule, cfg, &mut verdict);
        let report = StageReport { degree: i, cylinder, residual, eta };
        if report.status() != Status::Holds && verdict.status == Status::Holds {
            verdict.push_note(format!("stage {i}: cylinder {cylinder}, residual {residual}"));
        }
        verdict.status = verdict.status.and(report.status());
        stages.push(report);
        if let Some(f) = form {
            forms.push(f);
        }
        last = (oracle_i, jet_i);
    }

    let mut lambda = None;
    if alpha > 0.0 {
        let (s, l) = hoelder_constant_search(&last.0, &last.1, k as f64 + alpha, schedule, cfg, &mut verdict);
        if s != Status::Holds {
            verdict.push_note(format!("no lambda in the grid bounds the order {} remainder ({s})", k as f64 + alpha));
        }
        verdict.status = verdict.status.and(s);
        lambda = l;
        if let Some(l) = l {
            verdict.set_value("lambda", l);
        }
    }
    let mut jet = Jet::new(a.clone(), plane, k, alpha, forms)?;
    jet.set_hoelder_constant(lambda.unwrap_or(0.0));
    Ok(JetFit { jet: Some(jet), plane_estimate: est, stages, lambda, verdict })
}
