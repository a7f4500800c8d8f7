use std::sync::Arc;

use super::{ratio_trace, reliable_radii, ScaleSchedule, TraceKind};
use crate::config::Config;
use crate::error::{check_dim, Result};
use crate::geometry::{Plane, Region, Vector};
use crate::measure::MeasureOracle;
use crate::verdict::{Status, Verdict};

fn check_direction(v: &Vector) -> Result<()> {
    let n = v.norm();
    if n != 0.0 && !(0.5..=2.0).contains(&n) {
        return Err(crate::Error::InvalidParameter(format!("|v| = {n} must be 0 or lie in [0.5, 2]")));
    }
    Ok(())
}

fn check_eps_grid(eps: &[f64]) -> Result<()> {
    if eps.len() < 3 || eps.windows(2).any(|w| w[1] >= w[0]) || eps.iter().any(|e| *e <= 0.0) {
        return Err(crate::Error::InvalidParameter("eps grid must be positive, decreasing, with at least 3 values".into()));
    }
    Ok(())
}

/// Directions are tested normalized, which makes every verdict invariant
/// under v -> s v.
fn unit(v: &Vector) -> Vector {
    let n = v.norm();
    if n > 0.0 {
        v / n
    } else {
        v.clone()
    }
}

/// v is in the upper cone when the restriction to E(a, v, eps) has positive
/// upper density for every eps of the grid.
pub fn in_upper_tangent_cone(oracle: &MeasureOracle, a: &Vector, v: &Vector, eps_grid: &[f64], schedule: &ScaleSchedule, cfg: &Config) -> Result<Verdict> {
    check_dim(oracle.ambient_dim(), a.len())?;
    check_dim(oracle.ambient_dim(), v.len())?;
    check_direction(v)?;
    check_eps_grid(eps_grid)?;
    let v = &unit(v);
    let mut verdict = Verdict::new(Status::Holds);
    for &eps in eps_grid {
        let cone = Region::cone(a.clone(), v.clone(), eps);
        let t = ratio_trace(oracle, a, schedule, TraceKind::Upper, cfg, &format!("upper_cone eps={eps}"), |_| cone.clone());
        let s = t.positivity(cfg);
        verdict.status = verdict.status.and(s);
        verdict.set_value(format!("eps={eps}"), t.trailing_min(cfg.window));
        verdict.traces.push(t);
    }
    Ok(verdict)
}

/// Radii at which the lower-cone inequality is tested: the reliable schedule
/// radii together with their geometric midpoints r_j q^(1/2).
fn lower_cone_radii(oracle: &MeasureOracle, a: &Vector, schedule: &ScaleSchedule, cfg: &Config) -> Vec<f64> {
    let reliable = reliable_radii(oracle, a, schedule, cfg);
    let h = schedule.q.sqrt();
    let mut out = Vec::with_capacity(2 * reliable.len());
    for (i, r) in reliable.iter().enumerate() {
        out.push(*r);
        if i + 1 < reliable.len() {
            out.push(r * h);
        }
    }
    out
}

/// v is in the lower cone when for every eps some eta of the grid satisfies
/// mass(U(a + r v, eps r)) >= eta r^m at all tested radii r <= eta.
pub fn in_lower_tangent_cone(oracle: &MeasureOracle, a: &Vector, v: &Vector, eps_grid: &[f64], schedule: &ScaleSchedule, cfg: &Config) -> Result<Verdict> {
    check_dim(oracle.ambient_dim(), a.len())?;
    check_dim(oracle.ambient_dim(), v.len())?;
    check_direction(v)?;
    check_eps_grid(eps_grid)?;
    let v = &unit(v);
    let radii = lower_cone_radii(oracle, a, schedule, cfg);
    let m = oracle.dim() as i32;
    // masses do not depend on eta, so compute them once per eps
    let mut verdict = Verdict::new(Status::Holds);
    for &eps in eps_grid {
        // the measured ball has radius eps r, so atoms are judged at that size
        let mut finest_unresolved = f64::INFINITY;
        let masses: Vec<(f64, f64, f64)> = radii
            .iter()
            .filter_map(|&r| {
                let (c, rho) = (a + v * r, eps * r);
                let g = oracle.granularity(&c, rho);
                if g > 0.0 && rho.powi(m) < cfg.reliability * g {
                    finest_unresolved = finest_unresolved.min(r);
                    return None;
                }
                let mass = oracle.mass(&Region::ball(c, rho));
                Some((r, mass.value / r.powi(m), mass.error / r.powi(m)))
            })
            .collect();
        let mut per_eta = Vec::new();
        for &eta in &cfg.eta_grid {
            let tested: Vec<_> = masses.iter().filter(|e| e.0 <= eta).collect();
            if tested.len() < cfg.window {
                // too few radii because atoms hide the small ones: undecided
                if finest_unresolved <= eta {
                    per_eta.push(Status::Inconclusive);
                }
                continue;
            }
            let s = if tested.iter().all(|(_, x, e)| x - e >= eta) {
                Status::Holds
            } else if tested.iter().any(|(_, x, e)| x + e < eta) {
                Status::Fails
            } else {
                Status::Inconclusive
            };
            per_eta.push(s);
            if s == Status::Holds {
                verdict.set_value(format!("eps={eps}"), eta);
                break;
            }
        }
        let s = if per_eta.is_empty() { Status::Inconclusive } else { Status::any(per_eta) };
        let min_ratio = masses.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
        verdict.set_value(format!("eps={eps} min_mass_ratio"), min_ratio);
        verdict.status = verdict.status.and(s);
    }
    Ok(verdict)
}

/// Membership of v in the cone picked by `kind`.
pub fn in_density_cone(oracle: &MeasureOracle, a: &Vector, v: &Vector, kind: TraceKind, eps_grid: &[f64], schedule: &ScaleSchedule, cfg: &Config) -> Result<Verdict> {
    match kind {
        TraceKind::Upper => in_upper_tangent_cone(oracle, a, v, eps_grid, schedule, cfg),
        TraceKind::Lower => in_lower_tangent_cone(oracle, a, v, eps_grid, schedule, cfg),
    }
}

/// The outside-cone and vertical-offset conditions for a plane T, which
/// should agree.
#[derive(Debug, Clone)]
pub struct ConeConditions {
    /// Zero density of the part outside X(a, T, eps), every eps.
    pub outside_cone: Verdict,
    /// Zero density of the part with |T-perp(z - a)| > eps r, every eps.
    pub vertical: Verdict,
}

pub fn cone_condition_check(oracle: &MeasureOracle, a: &Vector, plane: &Plane, eps_grid: &[f64], schedule: &ScaleSchedule, cfg: &Config) -> Result<ConeConditions> {
    check_dim(oracle.ambient_dim(), a.len())?;
    check_dim(oracle.ambient_dim(), plane.ambient_dim())?;
    if plane.dim() != oracle.dim() {
        return Err(crate::Error::DimensionMismatch { expected: oracle.dim(), got: plane.dim() });
    }
    check_eps_grid(eps_grid)?;
    let shared = Arc::new(plane.clone());
    let mut outside = Verdict::new(Status::Holds);
    let mut vertical = Verdict::new(Status::Holds);
    for &eps in eps_grid {
        let x = Region::plane_cone(a, plane, eps).not();
        let t = ratio_trace(oracle, a, schedule, TraceKind::Upper, cfg, &format!("outside_cone eps={eps}"), |_| x.clone());
        outside.status = outside.status.and(t.vanishing(cfg));
        outside.set_value(format!("eps={eps}"), t.entries.last().map_or(f64::NAN, |e| e.1));
        outside.traces.push(t);

        let t = ratio_trace(oracle, a, schedule, TraceKind::Upper, cfg, &format!("vertical eps={eps}"), |r| {
            Region::Cylinder { plane: shared.clone(), center: a.clone(), s: f64::INFINITY, t: eps * r }.not()
        });
        vertical.status = vertical.status.and(t.vanishing(cfg));
        vertical.set_value(format!("eps={eps}"), t.entries.last().map_or(f64::NAN, |e| e.1));
        vertical.traces.push(t);
    }
    Ok(ConeConditions { outside_cone: outside, vertical })
}
