use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::geometry::{monomials, HomogeneousForm, Plane, Vector};
use crate::measure::MeasureOracle;

/// Forms of degrees lo..=hi fitted jointly, aggregated over scales by the
/// per-coefficient median.
#[derive(Debug, Clone)]
pub struct FormFit {
    pub lo: usize,
    pub forms: Vec<HomogeneousForm>,
    /// (r, flattened coefficients) for each scale that could be solved.
    pub per_scale: Vec<(f64, Vec<f64>)>,
}

impl FormFit {
    pub fn form(&self, degree: usize) -> Option<&HomogeneousForm> {
        degree.checked_sub(self.lo).and_then(|i| self.forms.get(i))
    }

    /// Largest deviation of a single scale from the median, relative to
    /// max(|median|, 0.1).
    pub fn scale_spread(&self) -> f64 {
        let med = flatten(&self.forms);
        let denom = med.iter().fold(0.1f64, |m, c| m.max(c.abs()));
        self.per_scale
            .iter()
            .flat_map(|(_, c)| c.iter().zip(&med).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
            / denom
    }
}

fn flatten(forms: &[HomogeneousForm]) -> Vec<f64> {
    forms.iter().flat_map(|f| f.coeffs().iter().copied().collect::<Vec<_>>()).collect()
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Weighted least squares at one scale in normalized coordinates u = chi / r,
/// target y / r^lo; the degree-d columns carry the factor r^(d - lo).
fn fit_one_scale(oracle: &MeasureOracle, a: &Vector, plane: &Plane, lo: usize, hi: usize, r: f64, cfg: &Config) -> Result<Vec<DMatrix<f64>>> {
    let (m, c) = (plane.dim(), plane.codim());
    let blocks: Vec<(usize, Vec<Vec<usize>>)> = (lo..=hi).map(|d| (d, monomials(m, d))).collect();
    let p: usize = blocks.iter().map(|b| b.1.len()).sum();
    let mut g = DMatrix::<f64>::zeros(p, p);
    let mut b = DMatrix::<f64>::zeros(p, c);
    let mut active = 0usize;
    let mut phi = DVector::<f64>::zeros(p);
    for s in oracle.samples(a, r).samples {
        let w = &s.point - a;
        let y = plane.normal_coords(&w);
        if s.weight <= 0.0 || y.norm() > cfg.c_trim * r {
            continue;
        }
        let u = plane.tangent_coords(&w) / r;
        let mut k = 0;
        for (d, monos) in &blocks {
            let f = r.powi(*d as i32 - lo as i32);
            for beta in monos {
                phi[k] = f * beta.iter().map(|&i| u[i]).product::<f64>();
                k += 1;
            }
        }
        g.syger(s.weight, &phi, &phi, 1.0);
        let t = y / r.powi(lo as i32);
        for j in 0..c {
            b.column_mut(j).axpy(s.weight * t[j], &phi, 1.0);
        }
        active += 1;
    }
    if active < p {
        return Err(Error::Underdetermined { samples: active, unknowns: p });
    }
    g.fill_upper_triangle_with_lower_triangle();
    let scale: Vec<f64> = (0..p).map(|j| if g[(j, j)] > 0.0 { g[(j, j)].sqrt() } else { 1.0 }).collect();
    for i in 0..p {
        for j in 0..p {
            g[(i, j)] /= scale[i] * scale[j];
        }
        g[(i, i)] += cfg.ridge;
        for j in 0..c {
            b[(i, j)] /= scale[i];
        }
    }
    let x = match g.clone().cholesky() {
        Some(ch) => ch.solve(&b),
        None => g.svd(true, true).solve(&b, 1e-14).map_err(|e| Error::InvalidParameter(e.to_string()))?,
    };
    let mut out = Vec::new();
    let mut k = 0;
    for (_, monos) in &blocks {
        let mut coeffs = DMatrix::zeros(c, monos.len());
        for col in 0..monos.len() {
            for j in 0..c {
                coeffs[(j, col)] = x[(k, j)] / scale[k];
            }
            k += 1;
        }
        out.push(coeffs);
    }
    Ok(out)
}

/// Joint fit of the forms of degrees lo..=hi with the graph over `plane`
/// through `a`, one solve per radius.
pub fn fit_forms(oracle: &MeasureOracle, a: &Vector, plane: &Plane, lo: usize, hi: usize, radii: &[f64], cfg: &Config) -> Result<FormFit> {
    if lo == 0 || hi < lo {
        return Err(Error::InvalidParameter(format!("bad degree range {lo}..={hi}")));
    }
    let fits: Vec<(f64, Result<Vec<DMatrix<f64>>>)> =
        radii.par_iter().map(|&r| (r, fit_one_scale(oracle, a, plane, lo, hi, r, cfg))).collect();
    let mut ok = Vec::new();
    let mut last_err = None;
    for (r, f) in fits {
        match f {
            Ok(c) => ok.push((r, c)),
            Err(e) => last_err = Some(e),
        }
    }
    if ok.is_empty() {
        return Err(last_err.unwrap_or(Error::InvalidParameter("no fit scales".into())));
    }
    let mut forms = Vec::new();
    for (bi, d) in (lo..=hi).enumerate() {
        let shape = ok[0].1[bi].shape();
        let mut med = DMatrix::zeros(shape.0, shape.1);
        for i in 0..shape.0 {
            for j in 0..shape.1 {
                let mut xs: Vec<f64> = ok.iter().map(|(_, c)| c[bi][(i, j)]).collect();
                med[(i, j)] = median(&mut xs);
            }
        }
        forms.push(HomogeneousForm::from_coeffs(d, plane.dim(), med)?);
    }
    let per_scale = ok.into_iter().map(|(r, c)| (r, c.iter().flat_map(|m| m.iter().copied().collect::<Vec<_>>()).collect())).collect();
    Ok(FormFit { lo, forms, per_scale })
}

/// The degree-`degree` form of the set over `plane`; degrees up to
/// `aux_max_degree` are fitted alongside and discarded.
pub fn fit_homogeneous_form(oracle: &MeasureOracle, a: &Vector, plane: &Plane, degree: usize, aux_max_degree: usize, radii: &[f64], cfg: &Config) -> Result<HomogeneousForm> {
    let fit = fit_forms(oracle, a, plane, degree, aux_max_degree.max(degree), radii, cfg)?;
    Ok(fit.forms[0].clone())
}

/// Tilts the plane by the fitted linear part of the graph.
pub fn refine_plane(oracle: &MeasureOracle, a: &Vector, plane: &Plane, k: usize, radii: &[f64], cfg: &Config) -> Result<Plane> {
    let fit = fit_forms(oracle, a, plane, 1, k.max(2), radii, cfg)?;
    let lin = fit.forms[0].coeffs();
    let mut vs = Vec::new();
    for (j, t) in plane.basis_vectors().into_iter().enumerate() {
        // monomials of degree 1 are [j] in order
        let shift = plane.from_normal_coords(&lin.column(j).into_owned());
        let mut v = t + shift;
        // in-order Gram-Schmidt keeps the basis aligned with the input
        for q in &vs {
            let q: &Vector = q;
            v -= q * q.dot(&v);
        }
        let n = v.norm();
        if n < 1e-12 {
            return Err(Error::DegeneratePlane { rank: j, needed: plane.dim() });
        }
        vs.push(v / n);
    }
    Plane::from_orthonormal_basis(plane.ambient_dim(), &vs)
}
