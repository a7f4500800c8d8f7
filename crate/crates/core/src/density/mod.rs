//! Density ratios over scale schedules, limit verdicts, and the approximate
//! tangent-cone tests built on them.

mod blowup;
mod cones;
mod transfer;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use blowup::{blow_up_tangent, bump_integral_on_plane, pca_plane, second_moment, BlowUp};
pub use cones::{cone_condition_check, in_density_cone, in_lower_tangent_cone, in_upper_tangent_cone, ConeConditions};
pub use transfer::density_transfer_check;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::geometry::{unit_ball_volume, Region, Vector};
use crate::measure::MeasureOracle;
use crate::verdict::Status;

/// Radii r_j = r0 q^j for j = 0..J-1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleSchedule {
    pub r0: f64,
    pub q: f64,
    #[serde(rename = "J")]
    pub count: usize,
}

impl Default for ScaleSchedule {
    fn default() -> Self {
        ScaleSchedule { r0: 0.5, q: std::f64::consts::FRAC_1_SQRT_2, count: 24 }
    }
}

impl ScaleSchedule {
    pub fn new(r0: f64, q: f64, count: usize) -> Result<ScaleSchedule> {
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(Error::InvalidParameter(format!("r0 = {r0} must be positive")));
        }
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidParameter(format!("q = {q} must lie in (0, 1)")));
        }
        if count < 8 {
            return Err(Error::InvalidParameter(format!("J = {count} must be at least 8")));
        }
        Ok(ScaleSchedule { r0, q, count })
    }

    /// The schedule aligned with dyadic constructions: q = 1/2.
    pub fn dyadic(r0: f64, count: usize) -> ScaleSchedule {
        ScaleSchedule { r0, q: 0.5, count }
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.count).map(|j| self.r0 * self.q.powi(j as i32)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    /// Statistic: running maximum over the window (limsup).
    Upper,
    /// Statistic: running minimum over the window (liminf).
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Limit {
    LimitZero,
    LimitPositive { theta: f64 },
    Diverges,
    Inconclusive,
}

impl Limit {
    pub fn name(&self) -> &'static str {
        match self {
            Limit::LimitZero => "limit_zero",
            Limit::LimitPositive { .. } => "limit_positive",
            Limit::Diverges => "diverges",
            Limit::Inconclusive => "inconclusive",
        }
    }
}

/// A sequence of (r, ratio, error) triples and the limit read off them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityTrace {
    #[serde(default)]
    pub label: String,
    pub point: Vec<f64>,
    pub m: usize,
    pub schedule: ScaleSchedule,
    pub kind: TraceKind,
    pub entries: Vec<(f64, f64, f64)>,
    pub verdict: Limit,
}

impl DensityTrace {
    pub fn from_entries(label: impl Into<String>, point: &Vector, m: usize, schedule: ScaleSchedule, kind: TraceKind, entries: Vec<(f64, f64, f64)>, cfg: &Config) -> DensityTrace {
        let verdict = classify(&entries, kind, cfg);
        DensityTrace { label: label.into(), point: point.iter().copied().collect(), m, schedule, kind, entries, verdict }
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.1).collect()
    }

    /// The windowed statistic S_t (running max or min) with its error.
    pub fn statistic(&self, window: usize) -> Vec<(f64, f64)> {
        statistic(&self.entries, self.kind, window)
    }

    /// Minimum of the trailing statistic values.
    pub fn trailing_min(&self, window: usize) -> f64 {
        let s = self.statistic(window);
        s.iter().rev().take(window).map(|x| x.0).fold(f64::INFINITY, f64::min)
    }

    /// Limit is zero.
    pub fn vanishing(&self, cfg: &Config) -> Status {
        match self.verdict {
            Limit::LimitZero => Status::Holds,
            Limit::LimitPositive { .. } | Limit::Diverges => Status::Fails,
            Limit::Inconclusive => {
                if self.bounded_away(cfg) {
                    Status::Fails
                } else {
                    Status::Inconclusive
                }
            }
        }
    }

    /// Limit is positive (or infinite).
    pub fn positivity(&self, cfg: &Config) -> Status {
        self.vanishing(cfg).negate()
    }

    fn bounded_away(&self, cfg: &Config) -> bool {
        let s = self.statistic(cfg.window);
        if s.is_empty() {
            return false;
        }
        s.iter().rev().take(cfg.window).all(|(v, e)| *v - *e > cfg.tol_positive)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,ratio,err\n");
        for (r, x, e) in &self.entries {
            out.push_str(&format!("{r:e},{x:e},{e:e}\n"));
        }
        out
    }
}

fn statistic(entries: &[(f64, f64, f64)], kind: TraceKind, window: usize) -> Vec<(f64, f64)> {
    let w = window.max(1);
    if entries.len() < w {
        return Vec::new();
    }
    (w - 1..entries.len())
        .map(|t| {
            let win = &entries[t + 1 - w..=t];
            let pick = match kind {
                TraceKind::Upper => win.iter().max_by(|a, b| a.1.total_cmp(&b.1)),
                TraceKind::Lower => win.iter().min_by(|a, b| a.1.total_cmp(&b.1)),
            };
            let p = pick.expect("non-empty window");
            (p.1, p.2)
        })
        .collect()
}

/// The finite-data limit rule. With S the windowed statistic, T its last
/// `window` values and P the block before:
/// zero if every value in T is below tol_zero and either max T <= max P / 2 or
/// every value in T lies within its error band; diverges if T strictly
/// increases past the divergence threshold; positive with theta = mean(T) if
/// the relative spread of T is below spread_tol; inconclusive otherwise.
pub fn classify(entries: &[(f64, f64, f64)], kind: TraceKind, cfg: &Config) -> Limit {
    let w = cfg.window;
    let s = statistic(entries, kind, w);
    if s.is_empty() {
        return Limit::Inconclusive;
    }
    let tail_len = w.min(s.len());
    let (head, tail) = s.split_at(s.len() - tail_len);
    let prev = &head[head.len().saturating_sub(w)..];
    let tmax = tail.iter().map(|x| x.0).fold(f64::NEG_INFINITY, f64::max);
    let tmin = tail.iter().map(|x| x.0).fold(f64::INFINITY, f64::min);
    if tail.iter().all(|x| x.0 < cfg.tol_zero) {
        let halving = !prev.is_empty() && tmax <= 0.5 * prev.iter().map(|x| x.0).fold(f64::NEG_INFINITY, f64::max);
        let in_band = tail.iter().all(|(v, e)| *v <= *e + 1e-12);
        if halving || in_band {
            return Limit::LimitZero;
        }
    }
    if tail.len() >= 2 && tail.windows(2).all(|p| p[1].0 > p[0].0) && tail[tail.len() - 1].0 > cfg.diverge_threshold {
        return Limit::Diverges;
    }
    let mean = tail.iter().map(|x| x.0).sum::<f64>() / tail.len() as f64;
    if mean > 0.0 && (tmax - tmin) / mean < cfg.spread_tol {
        return Limit::LimitPositive { theta: mean };
    }
    Limit::Inconclusive
}

/// mass(B(a, r)) / (alpha(m) r^m) with the propagated error.
pub fn density_ratio(oracle: &MeasureOracle, a: &Vector, r: f64) -> (f64, f64) {
    let norm = unit_ball_volume(oracle.dim()) * r.powi(oracle.dim() as i32);
    let m = oracle.mass(&Region::closed_ball(a.clone(), r));
    (m.value / norm, m.error / norm)
}

/// Schedule radii at which the oracle resolves m-dimensional mass near a:
/// r^m >= reliability * (largest atom in B(a, r)).
pub fn reliable_radii(oracle: &MeasureOracle, a: &Vector, schedule: &ScaleSchedule, cfg: &Config) -> Vec<f64> {
    schedule
        .radii()
        .into_iter()
        .filter(|&r| {
            let g = oracle.granularity(a, r);
            g == 0.0 || r.powi(oracle.dim() as i32) >= cfg.reliability * g
        })
        .collect()
}

/// Trace of mass(region(r) and B(a, r)) / (alpha(m) r^m) over the reliable
/// radii. Scales are evaluated in parallel and collected in order.
pub fn ratio_trace<F>(oracle: &MeasureOracle, a: &Vector, schedule: &ScaleSchedule, kind: TraceKind, cfg: &Config, label: &str, region: F) -> DensityTrace
where
    F: Fn(f64) -> Region + Sync,
{
    let radii = reliable_radii(oracle, a, schedule, cfg);
    let m = oracle.dim();
    let entries: Vec<(f64, f64, f64)> = radii
        .par_iter()
        .map(|&r| {
            let norm = unit_ball_volume(m) * r.powi(m as i32);
            let reg = region(r).and(Region::closed_ball(a.clone(), r));
            let mass = oracle.mass(&reg);
            (r, mass.value / norm, mass.error / norm)
        })
        .collect();
    DensityTrace::from_entries(label, a, m, *schedule, kind, entries, cfg)
}

pub fn upper_density(oracle: &MeasureOracle, a: &Vector, schedule: &ScaleSchedule, cfg: &Config) -> DensityTrace {
    ratio_trace(oracle, a, schedule, TraceKind::Upper, cfg, "upper_density", |_| Region::Everything)
}

pub fn lower_density(oracle: &MeasureOracle, a: &Vector, schedule: &ScaleSchedule, cfg: &Config) -> DensityTrace {
    ratio_trace(oracle, a, schedule, TraceKind::Lower, cfg, "lower_density", |_| Region::Everything)
}

#[cfg(test)]
mod tests;
