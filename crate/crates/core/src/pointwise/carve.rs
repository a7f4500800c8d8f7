use std::sync::Arc;

use serde::Serialize;

use super::{pt_diff_order1_test, pt_order_k_trace, PtTangent};
use crate::config::Config;
use crate::density::{ratio_trace, reliable_radii, DensityTrace, Limit, ScaleSchedule, TraceKind};
use crate::error::{check_dim, Result};
use crate::geometry::{CarveSpec, Jet, Region};
use crate::jet::{fit_forms, jet_gap};
use crate::measure::MeasureOracle;
use crate::verdict::{Status, Verdict};

/// The carved subset B of A and the checks run on it.
#[derive(Clone, Serialize)]
pub struct Carving {
    #[serde(skip)]
    pub oracle: MeasureOracle,
    #[serde(skip)]
    pub region: Region,
    /// Theta of the removed part A ~ B.
    pub removed: DensityTrace,
    pub pt: PtTangent,
    pub plane_gap: f64,
    #[serde(skip)]
    pub pointwise_jet: Option<Jet>,
    pub jet_gap: f64,
    pub order_k: Option<DensityTrace>,
    pub verdict: Verdict,
}

impl std::fmt::Debug for Carving {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Carving").field("removed", &self.removed.verdict).field("plane_gap", &self.plane_gap).field("jet_gap", &self.jet_gap).field("verdict", &self.verdict).finish()
    }
}

/// Shell radii for the carving: one coarser than r0, then the schedule.
fn shell_radii(schedule: &ScaleSchedule) -> Vec<f64> {
    let mut r = vec![schedule.r0 / schedule.q];
    r.extend(schedule.radii());
    r
}

/// Keeps, inside every shell r_j < |T(x - a)| <= r_(j-1), the points of
/// X(a, T, 1) whose vertical offset from P is at most kappa_j |T(x - a)|^(k+alpha),
/// with kappa_j = 1/(2j) for alpha = 0 and the jet's Hoelder constant otherwise.
/// `jet` is expected to be an approximate jet that holds at its base point.
pub fn carve_full_density_subset(oracle: &MeasureOracle, jet: &Jet, schedule: &ScaleSchedule, cfg: &Config) -> Result<Carving> {
    let a = jet.base();
    check_dim(oracle.ambient_dim(), a.len())?;
    let k = jet.degree();
    let spec = CarveSpec {
        jet: jet.clone(),
        radii: shell_radii(schedule),
        exponent: k as f64 + jet.hoelder(),
        fixed_kappa: (jet.hoelder() > 0.0).then(|| jet.hoelder_constant().max(f64::MIN_POSITIVE)),
    };
    let region = Region::Carved(Arc::new(spec));
    let b = oracle.restrict(region.clone());
    let removed = ratio_trace(oracle, a, schedule, TraceKind::Upper, cfg, "removed mass", |_| region.clone().not());
    let mut verdict = Verdict::new(Status::Holds);
    let removed_status = match removed.verdict {
        Limit::LimitZero => Status::Holds,
        Limit::Inconclusive => Status::Inconclusive,
        _ => Status::Fails,
    };
    if removed_status != Status::Holds {
        verdict.push_note(format!("removed mass has {} density", removed.verdict.name()));
    }

    let pt = pt_diff_order1_test(&b, a, &jet.plane().basis_vectors(), schedule, cfg)?;
    let (plane_status, plane_gap) = match &pt.plane {
        Some(p) if p.dim() == jet.plane().dim() => {
            let g = p.distance(jet.plane());
            (Status::from_bool(g <= cfg.plane_angle_tol), g)
        }
        Some(_) => (Status::Fails, f64::INFINITY),
        None => (if pt.verdict.status == Status::Inconclusive { Status::Inconclusive } else { Status::Fails }, f64::NAN),
    };
    if plane_status != Status::Holds {
        verdict.push_note(format!("pointwise tangent plane on B: {}", pt.verdict.status));
    }

    let radii = reliable_radii(&b, a, schedule, cfg);
    let fit_radii = &radii[radii.len().saturating_sub(cfg.fit_scales)..];
    let pointwise = if k >= 2 {
        let f = fit_forms(&b, a, jet.plane(), 1, k, fit_radii, cfg)?;
        Jet::new(a.clone(), jet.plane().clone(), k, jet.hoelder(), f.forms[1..].to_vec())?
    } else {
        Jet::zero(a.clone(), jet.plane().clone(), k, jet.hoelder())?
    };
    let mut pointwise = pointwise;
    pointwise.set_hoelder_constant(jet.hoelder_constant());
    let gap = jet_gap(&pointwise, jet)?;
    let gap_status = Status::from_bool(gap <= cfg.tol_unique);
    if gap_status != Status::Holds {
        verdict.push_note(format!("pointwise jet differs from the approximate jet by {gap:.3e}"));
    }
    let (order_status, order_trace) = pt_order_k_trace(&b, &pointwise, schedule, cfg);
    if order_status != Status::Holds {
        verdict.push_note(format!("order-{k} distance ratio on B: {}", order_trace.verdict.name()));
    }

    verdict.status = Status::all([removed_status, plane_status, gap_status, order_status]);
    verdict.set_value("plane_gap", plane_gap);
    verdict.set_value("jet_gap", gap);
    Ok(Carving {
        oracle: b,
        region,
        removed,
        pt,
        plane_gap,
        pointwise_jet: Some(pointwise),
        jet_gap: gap,
        order_k: Some(order_trace),
        verdict,
    })
}
