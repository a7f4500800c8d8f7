use std::sync::Arc;

use nalgebra::DMatrix;

use super::Sample;
use crate::geometry::Vector;

/// Parametrization u -> (psi(u), D psi(u)).
pub type ChartMap = Arc<dyn Fn(&[f64]) -> (Vector, DMatrix<f64>) + Send + Sync>;

/// A smooth chart over an axis-aligned parameter box. `lipschitz` must bound
/// |psi(u) - psi(u')| / |u - u'| on the box; it drives node culling.
#[derive(Clone)]
pub struct ChartSpec {
    pub name: String,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub map: ChartMap,
    pub lipschitz: f64,
    /// Quadrature nodes across the diameter of a query ball.
    pub resolution: usize,
}

impl std::fmt::Debug for ChartSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChartSpec")
            .field("name", &self.name)
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("lipschitz", &self.lipschitz)
            .field("resolution", &self.resolution)
            .finish()
    }
}

/// sqrt(det(J^T J)), the m-dimensional Jacobian.
pub fn jacobian_volume(j: &DMatrix<f64>) -> f64 {
    match j.ncols() {
        1 => j.column(0).norm(),
        _ => (j.transpose() * j).determinant().max(0.0).sqrt(),
    }
}

type Cell = (Vec<f64>, Vec<f64>);

impl ChartSpec {
    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn eval(&self, u: &[f64]) -> (Vector, DMatrix<f64>) {
        (self.map)(u)
    }

    pub fn point(&self, u: &[f64]) -> Vector {
        (self.map)(u).0
    }

    /// Parameter cells whose image may meet the ball; the whole box when no
    /// ball is given.
    pub fn cells(&self, ball: Option<(&Vector, f64)>) -> Vec<Cell> {
        let Some((c, rho)) = ball else {
            return vec![(self.lo.clone(), self.hi.clone())];
        };
        let m = self.dim();
        let mut out = Vec::new();
        let mut stack: Vec<(Cell, usize)> = vec![((self.lo.clone(), self.hi.clone()), 0)];
        while let Some(((lo, hi), depth)) = stack.pop() {
            let mid: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
            let half = 0.5 * lo.iter().zip(&hi).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt();
            let reach = self.lipschitz * half;
            if (self.point(&mid) - c).norm() > rho + reach {
                continue;
            }
            if reach <= 0.5 * rho || depth >= 60 {
                out.push((lo, hi));
                continue;
            }
            for corner in 0..(1usize << m) {
                let mut l = lo.clone();
                let mut h = hi.clone();
                for k in 0..m {
                    if corner & (1 << k) == 0 {
                        h[k] = mid[k];
                    } else {
                        l[k] = mid[k];
                    }
                }
                stack.push(((l, h), depth + 1));
            }
        }
        // deterministic order independent of the traversal
        out.sort_by(|a, b| a.0.iter().zip(&b.0).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
        out
    }

    /// Midpoint nodes with area weights. With a ball, `resolution` nodes span
    /// its diameter; without one, `resolution` nodes span each parameter axis.
    pub fn for_each_node(&self, cells: &[Cell], ball_radius: Option<f64>, resolution: usize, mut f: impl FnMut(&[f64], &Vector, f64)) {
        let m = self.dim();
        let res = resolution.max(1);
        let spacing = ball_radius.map(|rho| 2.0 * rho / (self.lipschitz * res as f64));
        let mut u = vec![0.0; m];
        let mut idx = vec![0usize; m];
        for (lo, hi) in cells {
            let counts: Vec<usize> = (0..m)
                .map(|k| match spacing {
                    Some(d) => (((hi[k] - lo[k]) / d).ceil() as usize).max(1),
                    None => res,
                })
                .collect();
            let widths: Vec<f64> = (0..m).map(|k| (hi[k] - lo[k]) / counts[k] as f64).collect();
            let cell_w: f64 = widths.iter().product();
            idx.iter_mut().for_each(|i| *i = 0);
            'outer: loop {
                for k in 0..m {
                    u[k] = lo[k] + (idx[k] as f64 + 0.5) * widths[k];
                }
                let (p, j) = self.eval(&u);
                f(&u, &p, cell_w * jacobian_volume(&j));
                for k in 0..m {
                    idx[k] += 1;
                    if idx[k] < counts[k] {
                        continue 'outer;
                    }
                    idx[k] = 0;
                }
                break;
            }
        }
    }

    /// Ambient spacing bound between neighbouring nodes for a ball query.
    pub fn node_spacing(&self, rho: f64, resolution: usize) -> f64 {
        2.0 * rho / resolution.max(1) as f64 * (self.dim() as f64).sqrt()
    }

    pub fn samples(&self, c: &Vector, rho: f64, resolution: usize, out: &mut Vec<Sample>) {
        let cells = self.cells(Some((c, rho)));
        self.for_each_node(&cells, Some(rho), resolution, |_, p, w| {
            if (p - c).norm() <= rho {
                out.push(Sample { point: p.clone(), weight: w });
            }
        });
    }

    /// Nearest chart point to x within `rho`: coarse node scan followed by
    /// Gauss-Newton refinement on the parameter box.
    pub fn distance(&self, x: &Vector, rho: f64) -> Option<f64> {
        let cells = self.cells(Some((x, rho)));
        if cells.is_empty() {
            return None;
        }
        let mut cands: Vec<(f64, Vec<f64>)> = Vec::new();
        self.for_each_node(&cells, Some(rho), 24, |u, p, _| {
            cands.push(((p - x).norm(), u.to_vec()));
        });
        cands.sort_by(|a, b| a.0.total_cmp(&b.0));
        cands.truncate(4);
        let mut best: Option<f64> = None;
        for (_, u0) in cands {
            let d = self.refine(x, u0);
            best = Some(best.map_or(d, |b: f64| b.min(d)));
        }
        best
    }

    fn refine(&self, x: &Vector, mut u: Vec<f64>) -> f64 {
        let m = self.dim();
        let clamp = |u: &mut Vec<f64>| {
            for k in 0..m {
                u[k] = u[k].clamp(self.lo[k], self.hi[k]);
            }
        };
        let (mut p, mut j) = self.eval(&u);
        let mut f = (&p - x).norm_squared();
        for _ in 0..60 {
            let g = j.transpose() * (x - &p);
            let h = j.transpose() * &j + DMatrix::identity(m, m) * 1e-14;
            let Some(step) = h.clone().cholesky().map(|c| c.solve(&g)) else { break };
            let mut t = 1.0;
            let mut moved = false;
            for _ in 0..30 {
                let mut cand: Vec<f64> = u.iter().zip(step.iter()).map(|(a, s)| a + t * s).collect();
                clamp(&mut cand);
                let (pc, jc) = self.eval(&cand);
                let fc = (&pc - x).norm_squared();
                if fc < f {
                    let delta: f64 = cand.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    u = cand;
                    p = pc;
                    j = jc;
                    f = fc;
                    moved = delta > 1e-15;
                    break;
                }
                t *= 0.5;
            }
            if !moved {
                break;
            }
        }
        f.sqrt()
    }
}
