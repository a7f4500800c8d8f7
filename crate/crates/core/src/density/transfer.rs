use std::sync::Arc;

use super::{ratio_trace, ScaleSchedule, TraceKind};
use crate::config::Config;
use crate::error::{check_dim, Error, Result};
use crate::geometry::{Region, Vector};
use crate::measure::MeasureOracle;
use crate::verdict::{Status, Verdict};

/// Density transfer for a function f sampled on the support of `domain`
/// (an m-dimensional measure in R^m): if the sets {|f| > lambda r^gamma} have
/// density below `bound` at every schedule scale, then
/// {|f(x)| > 2^gamma lambda |x - a|^gamma} has density below
/// bound / (1 - 2^-m) at every schedule scale.
#[allow(clippy::too_many_arguments)]
pub fn density_transfer_check<F>(domain: &MeasureOracle, f: F, a: &Vector, gamma: f64, lambda: f64, bound: f64, schedule: &ScaleSchedule, cfg: &Config) -> Result<Verdict>
where
    F: Fn(&Vector) -> f64 + Send + Sync + 'static,
{
    check_dim(domain.ambient_dim(), a.len())?;
    if domain.dim() != domain.ambient_dim() {
        return Err(Error::InvalidParameter("the domain measure must be full-dimensional".into()));
    }
    if gamma < 1.0 || lambda < 0.0 || bound <= 0.0 {
        return Err(Error::InvalidParameter(format!("need gamma >= 1, lambda >= 0, M > 0 (got {gamma}, {lambda}, {bound})")));
    }
    let f = Arc::new(f);
    let m = domain.dim() as i32;
    let limit = bound / (1.0 - 2f64.powi(-m));

    let hyp = ratio_trace(domain, a, schedule, TraceKind::Upper, cfg, "hypothesis", |r| {
        let f = f.clone();
        let level = lambda * r.powf(gamma);
        Region::predicate("|f| > lambda r^gamma", None, move |x| f(x).abs() > level)
    });
    let hyp_status = Status::all(hyp.entries.iter().map(|(_, x, e)| {
        if x + e < bound {
            Status::Holds
        } else if x - e >= bound {
            Status::PreconditionFailed
        } else {
            Status::Inconclusive
        }
    }));
    let hyp_max = hyp.entries.iter().map(|e| e.1).fold(0.0, f64::max);

    let scale = 2f64.powf(gamma) * lambda;
    let centre = a.clone();
    let f2 = f.clone();
    let target = Region::predicate("|f| > 2^gamma lambda |x - a|^gamma", None, move |x| f2(x).abs() > scale * (x - &centre).norm().powf(gamma));
    let concl = ratio_trace(domain, a, schedule, TraceKind::Upper, cfg, "conclusion", |_| target.clone());
    let concl_max = concl.entries.iter().map(|e| e.1).fold(0.0, f64::max);

    let status = match hyp_status {
        Status::PreconditionFailed => Status::PreconditionFailed,
        hs => {
            let cs = Status::all(concl.entries.iter().map(|(_, x, e)| {
                if x + e < limit {
                    Status::Holds
                } else if x - e >= limit {
                    Status::Fails
                } else {
                    Status::Inconclusive
                }
            }));
            // an unproven hypothesis cannot certify the conclusion
            if hs == Status::Inconclusive && cs == Status::Holds {
                Status::Inconclusive
            } else {
                cs
            }
        }
    };
    Ok(Verdict::new(status)
        .value("hypothesis_max", hyp_max)
        .value("conclusion_max", concl_max)
        .value("bound", limit)
        .with_trace(hyp)
        .with_trace(concl))
}
