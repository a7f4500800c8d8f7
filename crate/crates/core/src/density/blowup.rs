use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use super::{reliable_radii, ScaleSchedule};
use crate::config::Config;
use crate::error::{check_dim, Error, Result};
use crate::geometry::{unit_ball_volume, Plane, Vector};
use crate::measure::MeasureOracle;

/// Outcome of the blow-up search: the plane T and the common limit theta of
/// r^-m int f((x - a) / r) d phi / int_T f over the probe family.
#[derive(Debug, Clone, Serialize)]
pub struct BlowUp {
    #[serde(skip)]
    pub plane: Plane,
    pub theta: f64,
    /// Worst relative trailing spread over the probes.
    pub spread: f64,
    /// Relative disagreement of the per-probe limits.
    pub disagreement: f64,
}

/// Weighted second moment of the measure in B(a, r) about a, and the mass.
pub fn second_moment(oracle: &MeasureOracle, a: &Vector, r: f64) -> (DMatrix<f64>, f64) {
    let n = a.len();
    let mut m = DMatrix::zeros(n, n);
    let mut total = 0.0;
    for s in oracle.samples(a, r).samples {
        let d = &s.point - a;
        m.ger(s.weight, &d, &d, 1.0);
        total += s.weight;
    }
    (m, total)
}

/// The span of the top `m` eigenvectors of the second moment in B(a, r), with
/// the eigenvalues in decreasing order.
pub fn pca_plane(oracle: &MeasureOracle, a: &Vector, r: f64, m: usize) -> Result<(Plane, Vec<f64>)> {
    let (mom, _) = second_moment(oracle, a, r);
    let eig = SymmetricEigen::new(mom);
    let mut idx: Vec<usize> = (0..a.len()).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let vals: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs: Vec<Vector> = idx[..m].iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
    Ok((Plane::with_dim(a.len(), m, &vecs)?, vals))
}

fn bump(u: f64, rho: f64) -> f64 {
    let t = 1.0 - u / rho;
    if t > 0.0 {
        t * t
    } else {
        0.0
    }
}

/// int over an m-plane through 0 of max(0, 1 - |y - c| / rho)^2, where c sits
/// at distance d from the plane. Radial quadrature, composite Simpson.
pub fn bump_integral_on_plane(m: usize, d: f64, rho: f64) -> f64 {
    if d >= rho {
        return 0.0;
    }
    let smax = (rho * rho - d * d).sqrt();
    let n = 2000;
    let h = smax / n as f64;
    let g = |s: f64| bump((s * s + d * d).sqrt(), rho) * s.powi(m as i32 - 1);
    let mut acc = g(0.0) + g(smax);
    for i in 1..n {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * h);
    }
    m as f64 * unit_ball_volume(m) * acc * h / 3.0
}

fn probe_centres(n: usize, offset: f64) -> Vec<Vector> {
    let mut out = vec![Vector::zeros(n)];
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut c = Vector::zeros(n);
            c[i] = s * offset;
            out.push(c);
        }
    }
    out
}

/// Searches for a plane T with r^-m int f((x - a) / r) d phi -> theta int_T f
/// for every probe bump f. Candidates are the PCA plane at the finest
/// reliable scale and its rotations by +-0.02 rad. Returns `None` when no
/// candidate gives stable, agreeing limits.
pub fn blow_up_tangent(oracle: &MeasureOracle, a: &Vector, schedule: &ScaleSchedule, cfg: &Config) -> Result<Option<BlowUp>> {
    check_dim(oracle.ambient_dim(), a.len())?;
    let (n, m) = (oracle.ambient_dim(), oracle.dim());
    let radii = reliable_radii(oracle, a, schedule, cfg);
    if radii.len() < cfg.window {
        return Err(Error::InvalidParameter(format!("only {} reliable scales", radii.len())));
    }
    let rho = cfg.bump_radius;
    let centres = probe_centres(n, 0.5);
    let reach = 0.5 + rho;

    // I[j][c] = r_j^-m int f_c((x - a) / r_j) d phi
    let integrals: Vec<Vec<f64>> = radii
        .par_iter()
        .map(|&r| {
            let ss = oracle.samples(a, reach * r);
            let norm = r.powi(m as i32);
            centres
                .iter()
                .map(|c| ss.samples.iter().map(|s| s.weight * bump(((&s.point - a) / r - c).norm(), rho)).sum::<f64>() / norm)
                .collect()
        })
        .collect();

    let finest = *radii.last().expect("non-empty");
    let (pca, _) = pca_plane(oracle, a, finest, m)?;
    let mut candidates = vec![pca.clone()];
    for i in 0..m {
        for j in 0..n - m {
            for angle in [0.02, -0.02] {
                candidates.push(pca.rotated(i, j, angle));
            }
        }
    }

    let w = cfg.window;
    let mut best: Option<BlowUp> = None;
    for plane in candidates {
        let mut thetas = Vec::new();
        let mut spread: f64 = 0.0;
        for (ci, c) in centres.iter().enumerate() {
            let reference = bump_integral_on_plane(m, plane.normal_norm(c), rho);
            if reference < 1e-3 {
                continue;
            }
            let tail: Vec<f64> = integrals[integrals.len() - w..].iter().map(|row| row[ci] / reference).collect();
            let mean = tail.iter().sum::<f64>() / w as f64;
            let (lo, hi) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(*x), h.max(*x)));
            spread = spread.max(if mean > 0.0 { (hi - lo) / mean } else { f64::INFINITY });
            thetas.push(mean);
        }
        if thetas.is_empty() {
            continue;
        }
        let theta = thetas.iter().sum::<f64>() / thetas.len() as f64;
        let (lo, hi) = thetas.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(*x), h.max(*x)));
        let disagreement = if theta > 0.0 { (hi - lo) / theta } else { f64::INFINITY };
        let cand = BlowUp { plane, theta, spread, disagreement };
        let score = |b: &BlowUp| b.spread.max(b.disagreement);
        if best.as_ref().is_none_or(|b| score(&cand) < score(b)) {
            best = Some(cand);
        }
    }
    Ok(best.filter(|b| b.theta > 0.0 && b.spread < cfg.blowup_stability && b.disagreement < cfg.blowup_stability))
}
