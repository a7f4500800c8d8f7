use nalgebra::SymmetricEigen;
use serde::Serialize;

use crate::config::Config;
use crate::density::{cone_condition_check, in_lower_tangent_cone, lower_density, reliable_radii, second_moment, Limit, ScaleSchedule};
use crate::error::{check_dim, Result};
use crate::geometry::{Plane, Vector};
use crate::measure::MeasureOracle;
use crate::verdict::{Status, Verdict};

/// Result of the tangent-plane search. `plane` is set only when the rank
/// rule picked a dimension and the plane passed validation.
#[derive(Debug, Clone, Serialize)]
pub struct PlaneEstimate {
    pub dim: Option<usize>,
    #[serde(skip)]
    pub plane: Option<Plane>,
    /// Eigenvalues of the scale-normalized second moment, finest scales last.
    pub spectra: Vec<(f64, Vec<f64>)>,
    pub verdict: Verdict,
}

impl PlaneEstimate {
    pub fn result(&self) -> Option<(usize, &Plane)> {
        Some((self.dim?, self.plane.as_ref()?))
    }
}

/// Normalized spectrum (descending) of the second moment in B(a, r) together
/// with its eigenvectors.
fn spectrum(oracle: &MeasureOracle, a: &Vector, r: f64) -> Option<(Vec<f64>, Vec<Vector>)> {
    let (mom, mass) = second_moment(oracle, a, r);
    if mass <= 0.0 {
        return None;
    }
    let eig = SymmetricEigen::new(mom / (mass * r * r));
    let mut idx: Vec<usize> = (0..a.len()).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    Some((
        idx.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect(),
        idx.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect(),
    ))
}

/// Smallest j with lambda_j / lambda_(j+1) >= gap, where a trailing
/// eigenvalue below 1e-14 lambda_1 counts as zero.
fn gap_rank(vals: &[f64], gap: f64) -> Option<usize> {
    let top = *vals.first()?;
    if top <= 0.0 {
        return None;
    }
    (1..=vals.len()).find(|&j| {
        let next = vals.get(j).copied().unwrap_or(0.0);
        next <= 1e-14 * top || vals[j - 1] / next >= gap
    })
}

/// Rank by eigen-gap at the finest reliable scales, plane from the top
/// eigenvectors at the finest one, then validation: both cone conditions and
/// lower-cone membership of +-basis vectors.
pub fn estimate_tangent_plane(oracle: &MeasureOracle, a: &Vector, schedule: &ScaleSchedule, cfg: &Config) -> Result<PlaneEstimate> {
    estimate(oracle, a, None, schedule, cfg)
}

/// Same as [`estimate_tangent_plane`] with the dimension imposed: the oracle
/// is read as an m-dimensional measure and the top m eigenvectors are used.
pub fn estimate_tangent_plane_with_dim(oracle: &MeasureOracle, a: &Vector, m: usize, schedule: &ScaleSchedule, cfg: &Config) -> Result<PlaneEstimate> {
    estimate(oracle, a, Some(m), schedule, cfg)
}

fn estimate(oracle: &MeasureOracle, a: &Vector, forced: Option<usize>, schedule: &ScaleSchedule, cfg: &Config) -> Result<PlaneEstimate> {
    check_dim(oracle.ambient_dim(), a.len())?;
    let oracle = &forced.map_or_else(|| oracle.clone(), |m| oracle.with_dim(m));
    let mut out = PlaneEstimate { dim: None, plane: None, spectra: Vec::new(), verdict: Verdict::new(Status::Fails) };

    let lower = lower_density(oracle, a, schedule, cfg);
    if lower.verdict == Limit::LimitZero {
        out.verdict = Verdict::new(Status::PreconditionFailed).note("lower density vanishes").with_trace(lower);
        return Ok(out);
    }
    let radii = reliable_radii(oracle, a, schedule, cfg);
    if radii.len() < cfg.pca_scales {
        out.verdict = Verdict::new(Status::Inconclusive).note("too few reliable scales");
        return Ok(out);
    }
    let mut ranks = Vec::new();
    let mut finest_vecs = Vec::new();
    for &r in &radii[radii.len() - cfg.pca_scales..] {
        let Some((vals, vecs)) = spectrum(oracle, a, r) else {
            out.verdict = Verdict::new(Status::Fails).note(format!("no mass in B(a, {r:e})"));
            return Ok(out);
        };
        ranks.push(gap_rank(&vals, cfg.eigen_gap));
        out.spectra.push((r, vals));
        finest_vecs = vecs;
    }
    let m = match forced {
        Some(m) => m,
        None => match ranks[0] {
            Some(m) if ranks.iter().all(|x| *x == Some(m)) => m,
            _ => {
                out.verdict = Verdict::new(Status::Fails).note(format!("rank ambiguous: {ranks:?}"));
                return Ok(out);
            }
        },
    };
    if m == 0 || m > oracle.ambient_dim() {
        out.verdict = Verdict::new(Status::Fails).note(format!("dimension {m} out of range"));
        return Ok(out);
    }
    if m != oracle.dim() {
        out.verdict = Verdict::new(Status::Fails).note(format!("eigen-gap dimension {m} differs from the measure dimension {}", oracle.dim()));
        return Ok(out);
    }
    out.dim = Some(m);
    let plane = Plane::from_orthonormal_basis(a.len(), &oriented(&finest_vecs[..m]))?;
    let validation = validate_plane(oracle, a, &plane, schedule, cfg)?;
    if validation.status == Status::Holds {
        out.plane = Some(plane);
    }
    out.verdict = validation;
    Ok(out)
}

/// Eigenvectors with sign fixed so that the largest entry is positive.
fn oriented(vs: &[Vector]) -> Vec<Vector> {
    vs.iter()
        .map(|v| {
            let i = v.iamax();
            if v[i] < 0.0 {
                -v
            } else {
                v.clone()
            }
        })
        .collect()
}

/// Both cone conditions for T and lower-cone membership of +-t_j.
pub fn validate_plane(oracle: &MeasureOracle, a: &Vector, plane: &Plane, schedule: &ScaleSchedule, cfg: &Config) -> Result<Verdict> {
    let cc = cone_condition_check(oracle, a, plane, &cfg.eps_grid, schedule, cfg)?;
    let mut v = Verdict::new(cc.outside_cone.status.and(cc.vertical.status));
    v.set_value("cone_outside", status_code(cc.outside_cone.status));
    v.set_value("cone_vertical", status_code(cc.vertical.status));
    if v.status == Status::Fails {
        v.push_note("plane fails the cone condition");
        return Ok(v);
    }
    for (j, t) in plane.basis_vectors().iter().enumerate() {
        for s in [1.0, -1.0] {
            let lc = in_lower_tangent_cone(oracle, a, &(t * s), &cfg.eps_grid, schedule, cfg)?;
            if lc.status != Status::Holds {
                v.push_note(format!("{}t_{j} not in the lower cone ({})", if s > 0.0 { "+" } else { "-" }, lc.status));
            }
            v.status = v.status.and(lc.status);
        }
    }
    Ok(v)
}

fn status_code(s: Status) -> f64 {
    match s {
        Status::Holds => 1.0,
        Status::Fails => 0.0,
        _ => 0.5,
    }
}
