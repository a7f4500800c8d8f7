//! Tangent cones through the distance function, pointwise differentiability
//! of order 1, the full-density carving and the touching-ball bound.

mod carve;
mod touching;

pub use carve::{carve_full_density_subset, Carving};
pub use touching::{tangent_net, touching_ball_check, SecondOrder, SecondOrderKind};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Config;
use crate::density::{pca_plane, reliable_radii, DensityTrace, Limit, ScaleSchedule, TraceKind};
use crate::error::{check_dim, Result};
use crate::geometry::{distance_to_graph, Jet, Plane, Vector};
use crate::measure::{MeasureOracle, SetDistance};
use crate::verdict::{Status, Verdict};

/// dist(x, support), searching outwards from `hint` until something is found.
pub fn distance_to_set(oracle: &MeasureOracle, x: &Vector, hint: f64) -> SetDistance {
    let mut radius = hint.max(1e-12);
    for _ in 0..60 {
        let d = oracle.distance(x, radius);
        if d.value.is_some() {
            return d;
        }
        radius *= 2.0;
    }
    SetDistance { value: None, floor: 0.0 }
}

/// Radii for the distance probes: reliable schedule radii and their geometric
/// midpoints.
fn probe_radii(oracle: &MeasureOracle, a: &Vector, schedule: &ScaleSchedule, cfg: &Config) -> Vec<f64> {
    let reliable = reliable_radii(oracle, a, schedule, cfg);
    let h = schedule.q.sqrt();
    let mut out = Vec::new();
    for (i, r) in reliable.iter().enumerate() {
        out.push(*r);
        if i + 1 < reliable.len() {
            out.push(r * h);
        }
    }
    out
}

/// (r, lower, upper) bounds of r^-1 dist(a + r v, B); distances under the
/// oracle floor count as 0.
fn distance_ratios(oracle: &MeasureOracle, a: &Vector, v: &Vector, radii: &[f64]) -> Vec<(f64, f64, f64)> {
    radii
        .par_iter()
        .map(|&r| {
            let x = a + v * r;
            let d = distance_to_set(oracle, &x, 1.01 * r * v.norm().max(1e-3));
            match d.value {
                Some(val) if val > d.floor => (r, (val - d.floor) / r, val / r),
                Some(_) => (r, 0.0, 0.0),
                None => (r, f64::INFINITY, f64::INFINITY),
            }
        })
        .collect()
}

fn unit(v: &Vector) -> Vector {
    let n = v.norm();
    if n > 0.0 {
        v / n
    } else {
        v.clone()
    }
}

fn in_closure(oracle: &MeasureOracle, a: &Vector, schedule: &ScaleSchedule) -> bool {
    let r = schedule.radii().last().copied().unwrap_or(1e-6);
    let d = oracle.distance(a, r);
    d.value.is_some_and(|v| v <= d.floor.max(r * 1e-3))
}

/// liminf of r^-1 dist(a + r v, B) is zero: the minimum over the trailing
/// window is at most tol_zero.
pub fn in_pt_upper_cone(oracle: &MeasureOracle, a: &Vector, v: &Vector, schedule: &ScaleSchedule, cfg: &Config) -> Result<Verdict> {
    pt_cone(oracle, a, v, schedule, cfg, TraceKind::Upper)
}

/// lim of r^-1 dist(a + r v, B) is zero: the maximum over the trailing window
/// is at most tol_zero.
pub fn in_pt_lower_cone(oracle: &MeasureOracle, a: &Vector, v: &Vector, schedule: &ScaleSchedule, cfg: &Config) -> Result<Verdict> {
    pt_cone(oracle, a, v, schedule, cfg, TraceKind::Lower)
}

fn pt_cone(oracle: &MeasureOracle, a: &Vector, v: &Vector, schedule: &ScaleSchedule, cfg: &Config, kind: TraceKind) -> Result<Verdict> {
    check_dim(oracle.ambient_dim(), a.len())?;
    check_dim(oracle.ambient_dim(), v.len())?;
    if !in_closure(oracle, a, schedule) {
        return Ok(Verdict::new(Status::PreconditionFailed).note("base point is not in the closure of the set"));
    }
    let radii = probe_radii(oracle, a, schedule, cfg);
    let ratios = distance_ratios(oracle, a, &unit(v), &radii);
    Ok(pt_cone_verdict(&ratios, kind, cfg))
}

fn pt_cone_verdict(ratios: &[(f64, f64, f64)], kind: TraceKind, cfg: &Config) -> Verdict {
    let w = cfg.window.min(ratios.len());
    if w == 0 {
        return Verdict::new(Status::Inconclusive).note("no probe radii");
    }
    let tail = &ratios[ratios.len() - w..];
    let (lo, hi) = match kind {
        TraceKind::Upper => (tail.iter().map(|t| t.1).fold(f64::INFINITY, f64::min), tail.iter().map(|t| t.2).fold(f64::INFINITY, f64::min)),
        TraceKind::Lower => (tail.iter().map(|t| t.1).fold(0.0, f64::max), tail.iter().map(|t| t.2).fold(0.0, f64::max)),
    };
    let status = if hi <= cfg.tol_zero {
        Status::Holds
    } else if lo > cfg.tol_zero {
        Status::Fails
    } else {
        Status::Inconclusive
    };
    Verdict::new(status).value("statistic", hi)
}

/// The 2n signed basis directions and all (+-e_i +-e_j) / sqrt 2.
pub fn direction_net(n: usize) -> Vec<Vector> {
    let mut out = Vec::new();
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut v = Vector::zeros(n);
            v[i] = s;
            out.push(v);
        }
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        for j in i + 1..n {
            for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let mut v = Vector::zeros(n);
                v[i] = si * h;
                v[j] = sj * h;
                out.push(v);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct PtTangent {
    #[serde(skip)]
    pub plane: Option<Plane>,
    pub dim: Option<usize>,
    /// (direction, upper, lower) for every probed direction.
    pub memberships: Vec<(Vec<f64>, Status, Status)>,
    pub verdict: Verdict,
}

/// Pointwise differentiability of order 1: upper and lower cones agree on a
/// direction net (plus `extra` directions and the PCA axes) and the accepted
/// directions form a linear space T; then both sup-distance conditions for
/// M = a + T are checked on the schedule.
pub fn pt_diff_order1_test(oracle: &MeasureOracle, a: &Vector, extra: &[Vector], schedule: &ScaleSchedule, cfg: &Config) -> Result<PtTangent> {
    let n = oracle.ambient_dim();
    check_dim(n, a.len())?;
    let mut out = PtTangent { plane: None, dim: None, memberships: Vec::new(), verdict: Verdict::new(Status::Fails) };
    if !in_closure(oracle, a, schedule) {
        out.verdict = Verdict::new(Status::PreconditionFailed).note("base point is not in the closure of the set");
        return Ok(out);
    }
    let mut dirs = direction_net(n);
    for e in extra {
        check_dim(n, e.len())?;
        let u = unit(e);
        dirs.push(u.clone());
        dirs.push(-u);
    }
    let radii = probe_radii(oracle, a, schedule, cfg);
    if let Some(&finest) = radii.last() {
        if let Ok((p, _)) = pca_plane(oracle, a, finest * 4.0, oracle.dim().min(n)) {
            for v in p.basis_vectors() {
                dirs.push(v.clone());
                dirs.push(-v);
            }
        }
    }
    let results: Vec<(Status, Status)> = dirs
        .iter()
        .map(|d| {
            let ratios = distance_ratios(oracle, a, d, &radii);
            (pt_cone_verdict(&ratios, TraceKind::Upper, cfg).status, pt_cone_verdict(&ratios, TraceKind::Lower, cfg).status)
        })
        .collect();
    out.memberships = dirs.iter().zip(&results).map(|(d, (u, l))| (d.iter().copied().collect(), *u, *l)).collect();

    if let Some((d, _)) = dirs.iter().zip(&results).find(|(_, (u, l))| u != l) {
        out.verdict = Verdict::new(Status::Fails).note(format!("upper and lower cones differ along {:?}", d.as_slice()));
        return Ok(out);
    }
    if results.iter().any(|(u, _)| *u == Status::Inconclusive) {
        out.verdict = Verdict::new(Status::Inconclusive).note("some cone memberships are inconclusive");
        return Ok(out);
    }
    let accepted: Vec<&Vector> = dirs.iter().zip(&results).filter(|(_, (u, _))| *u == Status::Holds).map(|(d, _)| d).collect();
    let plane = if accepted.is_empty() {
        Plane::zero(n)
    } else {
        let mut mat = DMatrix::zeros(n, accepted.len());
        for (j, d) in accepted.iter().enumerate() {
            mat.set_column(j, d);
        }
        let svd = mat.svd(true, false);
        let smax = svd.singular_values.max();
        let u = svd.u.expect("left singular vectors");
        let basis: Vec<Vector> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > 0.1 * smax).map(|i| u.column(i).into_owned()).collect();
        Plane::with_dim(n, basis.len(), &basis)?
    };
    // the accepted set must be exactly the unit sphere of the plane, up to
    // the angle tolerance
    for (d, (u, _)) in dirs.iter().zip(&results) {
        let off = plane.normal_norm(d);
        let bad = match u {
            Status::Holds => off > 2.0 * cfg.plane_angle_tol,
            _ => off < 0.5 * cfg.plane_angle_tol,
        };
        if bad {
            out.verdict = Verdict::new(Status::Fails).note(format!("the cone is not a plane (direction {:?})", d.as_slice()));
            return Ok(out);
        }
    }
    out.dim = Some(plane.dim());
    let (s1, t1) = sup_set_to_plane(oracle, a, &plane, schedule, cfg);
    let (s2, t2) = sup_plane_to_set(oracle, a, &plane, schedule, cfg);
    let status = s1.and(s2);
    out.verdict = Verdict::new(status).with_trace(t1).with_trace(t2);
    if status == Status::Holds {
        out.plane = Some(plane);
    }
    Ok(out)
}

fn limit_status(t: &DensityTrace, cfg: &Config) -> Status {
    t.vanishing(cfg)
}

/// r^-1 sup{dist(x, a + T) : x in B(a, r) and B} over the reliable radii.
fn sup_set_to_plane(oracle: &MeasureOracle, a: &Vector, plane: &Plane, schedule: &ScaleSchedule, cfg: &Config) -> (Status, DensityTrace) {
    let radii = reliable_radii(oracle, a, schedule, cfg);
    let entries: Vec<(f64, f64, f64)> = radii
        .par_iter()
        .map(|&r| {
            let s = oracle.samples(a, r).samples.iter().map(|s| plane.normal_norm(&(&s.point - a))).fold(0.0, f64::max);
            (r, s / r, 0.0)
        })
        .collect();
    let t = DensityTrace::from_entries("sup dist to plane", a, oracle.dim(), *schedule, TraceKind::Upper, entries, cfg);
    (limit_status(&t, cfg), t)
}

/// r^-1 sup{dist(x, B) : x in B(a, r) and (a + T)}, sampled on a net of the
/// plane at radii r/4, r/2, r.
fn sup_plane_to_set(oracle: &MeasureOracle, a: &Vector, plane: &Plane, schedule: &ScaleSchedule, cfg: &Config) -> (Status, DensityTrace) {
    let net = tangent_net(plane);
    let radii = reliable_radii(oracle, a, schedule, cfg);
    let entries: Vec<(f64, f64, f64)> = radii
        .par_iter()
        .map(|&r| {
            let mut worst: f64 = 0.0;
            let mut err: f64 = 0.0;
            for d in &net {
                for s in [0.25, 0.5, 1.0] {
                    let x = a + d * (s * r);
                    let dist = distance_to_set(oracle, &x, 1.01 * s * r);
                    let v = dist.effective(s * r);
                    if v > worst {
                        worst = v;
                        err = dist.floor;
                    }
                }
            }
            (r, worst / r, err / r)
        })
        .collect();
    let t = DensityTrace::from_entries("sup dist to set", a, oracle.dim(), *schedule, TraceKind::Upper, entries, cfg);
    (limit_status(&t, cfg), t)
}

/// r^-(k+alpha) sup{dist(x, gr P) : x in B(a, r) and B}, the order-k
/// condition of pointwise differentiability with M = gr P. For alpha > 0 the
/// ratio only has to stay bounded.
pub fn pt_order_k_trace(oracle: &MeasureOracle, jet: &Jet, schedule: &ScaleSchedule, cfg: &Config) -> (Status, DensityTrace) {
    let a = jet.base();
    let radii = reliable_radii(oracle, a, schedule, cfg);
    let e = jet.degree() as f64 + jet.hoelder();
    let entries: Vec<(f64, f64, f64)> = radii
        .par_iter()
        .map(|&r| {
            let s = oracle
                .samples(a, r)
                .samples
                .iter()
                .map(|s| {
                    let v = jet.vertical_deviation(&s.point);
                    if v <= 0.0 {
                        0.0
                    } else {
                        distance_to_graph(jet, &s.point, 2.0 * r, 1e-12).distance.min(v)
                    }
                })
                .fold(0.0, f64::max);
            // distances are resolved to minimize_tol relative to r
            (r, s / r.powf(e), cfg.minimize_tol * r / r.powf(e))
        })
        .collect();
    let t = DensityTrace::from_entries("sup dist to gr P", a, oracle.dim(), *schedule, TraceKind::Upper, entries, cfg);
    let status = if jet.hoelder() > 0.0 {
        match t.verdict {
            Limit::Diverges => Status::Fails,
            _ => Status::Holds,
        }
    } else {
        limit_status(&t, cfg)
    };
    (status, t)
}
