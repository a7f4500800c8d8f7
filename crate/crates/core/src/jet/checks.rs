use std::sync::Arc;

use serde::Serialize;

use super::fit::fit_forms;
use super::iterate::{iterated_jet_fit, residual_condition, JetFit};
use crate::config::Config;
use crate::density::{ratio_trace, reliable_radii, ScaleSchedule, TraceKind};
use crate::error::{check_dim, Result};
use crate::geometry::{Jet, Region, ShearMap, Vector};
use crate::measure::MeasureOracle;
use crate::verdict::{Status, Verdict};

/// Region {z : |T-perp(z - a) - P(T(z - a))| > level}.
fn vertical_above(jet: &Jet, level: f64) -> Region {
    let j = Arc::new(jet.clone());
    Region::predicate("vertical deviation", None, move |x| j.vertical_deviation(x) > level)
}

/// Graph-residual form of the characterization: given vanishing density of
/// {vertical > eps r^k} (every eps) and of {vertical > lambda r^(k+alpha)},
/// the complement of X_{k,alpha}(a, T, P, kappa) has vanishing density for
/// kappa = 2^(k+alpha) lambda (1 + kappa_inflation). lambda is the jet's
/// Hoelder constant, or the smallest eps of the grid when that is 0.
pub fn verify_graph_residual(oracle: &MeasureOracle, jet: &Jet, schedule: &ScaleSchedule, cfg: &Config) -> Result<Verdict> {
    let a = jet.base();
    check_dim(oracle.ambient_dim(), a.len())?;
    let k = jet.degree() as f64;
    let e = k + jet.hoelder();
    let lambda = if jet.hoelder_constant() > 0.0 {
        jet.hoelder_constant()
    } else {
        cfg.eps_grid.iter().copied().fold(f64::INFINITY, f64::min)
    };
    let mut v = Verdict::new(Status::Holds);
    let mut eps_status = Status::Holds;
    for &eps in &cfg.eps_grid {
        let t = ratio_trace(oracle, a, schedule, TraceKind::Upper, cfg, &format!("hypothesis eps={eps}"), |r| vertical_above(jet, eps * r.powf(k)));
        eps_status = eps_status.and(t.vanishing(cfg));
        v.traces.push(t);
    }
    let t = ratio_trace(oracle, a, schedule, TraceKind::Upper, cfg, &format!("hypothesis lambda={lambda}"), |r| vertical_above(jet, lambda * r.powf(e)));
    let lambda_status = t.vanishing(cfg);
    v.traces.push(t);

    let kappa = 2f64.powf(e) * lambda * (1.0 + cfg.kappa_inflation);
    let outside = Region::graph_nbhd(jet, kappa, e).not();
    let t = ratio_trace(oracle, a, schedule, TraceKind::Upper, cfg, &format!("outside X kappa={kappa}"), |_| outside.clone());
    let concl = t.vanishing(cfg);
    v.traces.push(t);
    v.set_value("lambda", lambda);
    v.set_value("kappa", kappa);

    let hyp = eps_status.and(lambda_status);
    v.status = match hyp {
        Status::Holds => concl,
        Status::Inconclusive => Status::Inconclusive,
        _ => Status::Fails,
    };
    v.push_note(format!("hypotheses: eps {eps_status}, lambda {lambda_status}; conclusion {concl}"));
    Ok(v)
}

#[derive(Debug, Clone, Serialize)]
pub struct Uniqueness {
    #[serde(skip)]
    pub direct: Option<Jet>,
    #[serde(skip)]
    pub iterated: Option<Jet>,
    /// max over i of |D^i P_direct - D^i P_iterated| / max(|D^i P|, 0.1).
    pub gap: f64,
    pub verdict: Verdict,
}

/// Relative gap between the full differentials of two jets of equal order.
pub fn jet_gap(a: &Jet, b: &Jet) -> Result<f64> {
    let mut gap: f64 = 0.0;
    for i in 2..=a.degree().min(b.degree()) {
        let da = a.full_differential(i)?;
        let db = b.full_differential(i)?;
        let scale = da.max_abs().max(db.max_abs()).max(0.1);
        gap = gap.max(da.max_abs_diff(&db) / scale);
    }
    Ok(gap)
}

/// Fits all degrees 1..=k in one solve on the original measure (over the
/// plane of the iterated jet) and compares with the iterated jet.
pub fn jet_uniqueness_crosscheck(oracle: &MeasureOracle, a: &Vector, k: usize, schedule: &ScaleSchedule, cfg: &Config) -> Result<Uniqueness> {
    let fit = iterated_jet_fit(oracle, a, k, 0.0, schedule, cfg)?;
    uniqueness_from_fit(oracle, &fit, schedule, cfg)
}

pub fn uniqueness_from_fit(oracle: &MeasureOracle, fit: &JetFit, schedule: &ScaleSchedule, cfg: &Config) -> Result<Uniqueness> {
    let Some(iterated) = fit.jet.clone().filter(|_| fit.verdict.holds()) else {
        return Ok(Uniqueness {
            direct: None,
            iterated: fit.jet.clone(),
            gap: f64::NAN,
            verdict: Verdict::new(Status::PreconditionFailed).note("iterated fit does not hold"),
        });
    };
    let a = iterated.base();
    let k = iterated.degree();
    let direct = if k >= 2 {
        let radii = reliable_radii(oracle, a, schedule, cfg);
        let fit_radii = &radii[radii.len().saturating_sub(cfg.fit_scales)..];
        let f = fit_forms(oracle, a, iterated.plane(), 1, k, fit_radii, cfg)?;
        Jet::new(a.clone(), iterated.plane().clone(), k, 0.0, f.forms[1..].to_vec())?
    } else {
        Jet::zero(a.clone(), iterated.plane().clone(), 1, 0.0)?
    };
    let gap = jet_gap(&direct, &iterated)?;
    let verdict = Verdict::new(Status::from_bool(gap <= cfg.tol_unique)).value("gap", gap);
    Ok(Uniqueness { direct: Some(direct), iterated: Some(iterated), gap, verdict })
}

/// The graph-residual condition before and after the shear that flattens gr(P)
/// onto T; holds when both verdicts agree.
pub fn shear_invariance_check(oracle: &MeasureOracle, jet: &Jet, schedule: &ScaleSchedule, cfg: &Config) -> Result<Verdict> {
    check_dim(oracle.ambient_dim(), jet.base().len())?;
    let k = jet.degree() as f64;
    let mut v = Verdict::new(Status::Holds);
    let before = residual_condition(oracle, jet, k, &cfg.eps_grid, schedule, cfg, &mut v);
    let map = ShearMap::flatten(jet);
    let flat = Jet::zero(jet.base().clone(), jet.plane().clone(), jet.degree(), 0.0)?;
    let after = residual_condition(&oracle.pushforward(&map), &flat, k, &cfg.eps_grid, schedule, cfg, &mut v);
    v.status = match (before, after) {
        (Status::Inconclusive, _) | (_, Status::Inconclusive) => Status::Inconclusive,
        (b, a) => Status::from_bool(b == a),
    };
    v.push_note(format!("before {before}, after {after}"));
    Ok(v)
}

/// Orders implied by (k, alpha): (l, 0) and (l, 1) for l < k and (k, beta)
/// for beta in {0, alpha/2, alpha}.
pub fn implied_orders(k: usize, alpha: f64) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for l in 1..k {
        out.push((l, 0.0));
        out.push((l, 1.0));
    }
    for beta in [0.0, alpha / 2.0, alpha] {
        if !out.contains(&(k, beta)) {
            out.push((k, beta));
        }
    }
    out
}

pub fn order_monotonicity_check(oracle: &MeasureOracle, a: &Vector, k: usize, alpha: f64, schedule: &ScaleSchedule, cfg: &Config) -> Result<Verdict> {
    let top = iterated_jet_fit(oracle, a, k, alpha, schedule, cfg)?;
    if !top.verdict.holds() {
        return Ok(Verdict::new(Status::PreconditionFailed).note(format!("order ({k}, {alpha}) does not hold")));
    }
    let mut v = Verdict::new(Status::Holds);
    for (l, beta) in implied_orders(k, alpha) {
        let s = iterated_jet_fit(oracle, a, l, beta, schedule, cfg)?.verdict.status;
        v.set_value(format!("({l},{beta})"), if s == Status::Holds { 1.0 } else { 0.0 });
        if s != Status::Holds {
            v.push_note(format!("order ({l}, {beta}): {s}"));
        }
        v.status = v.status.and(s);
    }
    Ok(v)
}
