use nalgebra::DMatrix;

use super::{Jet, Vector};
use crate::error::{check_dim, Error, Result};

#[derive(Debug, Clone)]
pub struct GraphDistance {
    pub distance: f64,
    /// Tangent coordinates of the nearest graph point found.
    pub foot: Vector,
    pub converged: bool,
}

fn objective(jet: &Jet, wt: &Vector, wn: &Vector, chi: &Vector) -> f64 {
    let p = jet.eval_coords(chi.as_slice());
    (wt - chi).norm_squared() + (wn - p).norm_squared()
}

fn clamp(chi: &mut Vector, radius: f64) {
    let n = chi.norm();
    if n > radius {
        *chi *= radius / n;
    }
}

/// Distance from z to the graph base + {x + P(x)}, with the foot restricted to
/// the tangent ball of radius `search_radius`. Damped Gauss-Newton from a
/// small cross of starting points; the best local minimum wins.
pub fn distance_to_graph(jet: &Jet, z: &Vector, search_radius: f64, tol: f64) -> GraphDistance {
    let plane = jet.plane();
    let w = z - jet.base();
    let wt = plane.tangent_coords(&w);
    let wn = plane.normal_coords(&w);
    if jet.is_flat() {
        return GraphDistance { distance: wn.norm(), foot: wt, converged: true };
    }
    let m = plane.dim();
    let r = search_radius.max(f64::MIN_POSITIVE);
    let mut starts = vec![wt.clone()];
    if m >= 1 {
        let mut e1 = Vector::zeros(m);
        e1[0] = 1.0;
        starts.push(&wt + &e1 * (0.5 * r));
        starts.push(&wt - &e1 * (0.5 * r));
        if m >= 2 {
            let mut e2 = Vector::zeros(m);
            e2[1] = 1.0;
            starts.push(&wt + &e2 * (0.5 * r));
            starts.push(&wt - &e2 * (0.5 * r));
        } else {
            starts.push(&wt + &e1 * (0.25 * r));
            starts.push(&wt - &e1 * (0.25 * r));
        }
    }
    let mut best: Option<GraphDistance> = None;
    for mut chi in starts {
        clamp(&mut chi, r);
        let mut f = objective(jet, &wt, &wn, &chi);
        let mut converged = false;
        for _ in 0..100 {
            let p = jet.eval_coords(chi.as_slice());
            let dp = jet.differential_coords(chi.as_slice());
            let lhs = DMatrix::identity(m, m) + dp.transpose() * &dp;
            let rhs = (&wt - &chi) + dp.transpose() * (&wn - p);
            let Some(step) = lhs.cholesky().map(|c| c.solve(&rhs)) else { break };
            let mut t = 1.0;
            let mut improved = false;
            for _ in 0..40 {
                let mut cand = &chi + &step * t;
                clamp(&mut cand, r);
                let fc = objective(jet, &wt, &wn, &cand);
                if fc <= f {
                    let moved = (&cand - &chi).norm();
                    chi = cand;
                    f = fc;
                    improved = true;
                    if moved <= tol * r {
                        converged = true;
                    }
                    break;
                }
                t *= 0.5;
            }
            if !improved {
                // no descent along the Gauss-Newton direction: stationary
                converged = step.norm() <= 1e-6 * r || f == 0.0;
                break;
            }
            if converged {
                break;
            }
        }
        let d = f.max(0.0).sqrt();
        if best.as_ref().is_none_or(|b| d < b.distance) {
            best = Some(GraphDistance { distance: d, foot: chi, converged });
        }
    }
    best.expect("at least one start")
}

#[derive(Debug, Clone)]
pub struct VerticalBounds {
    pub distance: f64,
    pub vertical: f64,
    pub lipschitz: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub converged: bool,
}

impl VerticalBounds {
    pub fn holds(&self) -> bool {
        self.lower_ok && self.upper_ok
    }
}

/// Compares the distance from w (relative to the jet base) to the graph with
/// the vertical offset |T-perp w - P(T w)|, which must lie between the
/// distance and (2 + Lip) times it when w lies in B(0, r).
pub fn vertical_vs_distance(jet: &Jet, lipschitz: f64, w: &Vector, r: f64, tol: f64) -> Result<VerticalBounds> {
    check_dim(jet.plane().ambient_dim(), w.len())?;
    if w.norm() > r * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!("|w| = {} exceeds r = {r}", w.norm())));
    }
    let z = jet.base() + w;
    let vertical = jet.vertical_deviation(&z);
    let gd = distance_to_graph(jet, &z, 2.0 * r, tol);
    let slack = 1e-9 * (1.0 + vertical);
    Ok(VerticalBounds {
        distance: gd.distance,
        vertical,
        lipschitz,
        lower_ok: gd.distance <= vertical + slack,
        upper_ok: vertical <= (2.0 + lipschitz) * gd.distance + slack,
        converged: gd.converged,
    })
}
