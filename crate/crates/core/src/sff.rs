//! The approximate second fundamental form ap D^2 A(a) restricted to the
//! tangent plane, and the identity relating it to derivatives of a normal
//! field along the set.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::config::Config;
use crate::error::{check_dim, Error, Result};
use crate::geometry::{Jet, Plane, SymmetricMultilinear, Vector};
use crate::measure::ChartMap;
use crate::pointwise::tangent_net;
use crate::verdict::{Status, Verdict};

/// Bilinear map on T x T with values in T-perp.
#[derive(Debug, Clone)]
pub struct Sff {
    plane: Plane,
    form: SymmetricMultilinear,
}

impl Sff {
    pub fn plane(&self) -> &Plane {
        &self.plane
    }

    /// The underlying order-2 differential on all of R^n.
    pub fn form(&self) -> &SymmetricMultilinear {
        &self.form
    }

    /// Symmetrised evaluation, so that swapping the arguments is exact in
    /// floating point as well.
    pub fn eval(&self, u: &Vector, v: &Vector) -> Result<Vector> {
        Ok((self.form.eval(&[u, v])? + self.form.eval(&[v, u])?) * 0.5)
    }

    /// Gram matrix of sff(t_i, t_j) . nu on the plane basis.
    pub fn shape_operator(&self, nu: &Vector) -> Result<DMatrix<f64>> {
        check_dim(self.plane.ambient_dim(), nu.len())?;
        let b = self.plane.basis_vectors();
        let m = b.len();
        let mut s = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                s[(i, j)] = self.eval(&b[i], &b[j])?.dot(nu);
            }
        }
        Ok(s)
    }

    /// Principal curvatures along nu, ascending.
    pub fn principal_curvatures(&self, nu: &Vector) -> Result<Vec<f64>> {
        let s = self.shape_operator(nu)?;
        let mut ev: Vec<f64> = s.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        Ok(ev)
    }
}

/// Restriction of the order-2 differential of the jet to T x T.
pub fn approximate_sff(jet: &Jet) -> Result<Sff> {
    if jet.degree() < 2 {
        return Err(Error::InvalidParameter(format!("second fundamental form needs a jet of degree >= 2, got {}", jet.degree())));
    }
    let form = jet.full_differential(2)?;
    let plane = jet.plane().clone();
    let b = plane.basis_vectors();
    let scale = form.max_abs().max(1.0);
    for u in &b {
        for v in &b {
            let val = form.eval(&[u, v])?;
            let tangential = plane.tangent_norm(&val);
            if tangential > 1e-10 * scale {
                return Err(Error::InvalidParameter(format!("second differential has tangential part {tangential:.3e}")));
            }
        }
    }
    Ok(Sff { plane, form })
}

/// A unit normal field nu given along a chart; `at` is the chart parameter
/// of the base point.
#[derive(Clone)]
pub struct NormalField {
    pub chart: ChartMap,
    pub nu: Arc<dyn Fn(&[f64]) -> Vector + Send + Sync>,
    pub at: Vec<f64>,
}

fn param_direction(jac: &DMatrix<f64>, u: &Vector) -> Option<Vector> {
    let jt = jac.transpose();
    (&jt * jac).cholesky().map(|c| c.solve(&(&jt * u)))
}

fn add(p: &[f64], d: &Vector, h: f64) -> Vec<f64> {
    p.iter().zip(d.iter()).map(|(a, b)| a + h * b).collect()
}

fn normal_ok(field: &NormalField, p: &[f64]) -> bool {
    let (_, jac) = (field.chart)(p);
    let nu = (field.nu)(p);
    let tangential = (jac.transpose() * &nu).norm() / jac.norm().max(f64::MIN_POSITIVE);
    (nu.norm() - 1.0).abs() <= 1e-6 && tangential <= 1e-6
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityEntry {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// D nu(a)(u) . v by extrapolated central differences.
    pub lhs: f64,
    /// -sff(u, v) . nu(a)
    pub rhs: f64,
    pub gap: f64,
}

/// D nu(a)(u) . v = -sff(u, v) . nu(a) for u, v on the tangent net of the
/// jet plane. Differences are taken along the chart parameter d solving
/// J d = u in the least-squares sense, with Richardson extrapolation over
/// the configured steps.
pub fn normal_field_identity_check(field: &NormalField, jet: &Jet, cfg: &Config) -> Result<(Verdict, Vec<IdentityEntry>)> {
    let sff = approximate_sff(jet)?;
    let (x0, jac) = (field.chart)(&field.at);
    check_dim(jet.base().len(), x0.len())?;
    if (&x0 - jet.base()).norm() > 1e-9 * (1.0 + x0.norm()) {
        return Err(Error::InvalidParameter("chart parameter does not map to the jet base point".into()));
    }
    let nu0 = (field.nu)(&field.at);
    let h = cfg.fd_steps;
    let net = tangent_net(jet.plane());
    let mut probes = vec![field.at.clone()];
    let mut dirs = Vec::new();
    for u in &net {
        let d = param_direction(&jac, u).ok_or_else(|| Error::InvalidParameter("degenerate chart Jacobian".into()))?;
        for s in h {
            probes.push(add(&field.at, &d, s));
            probes.push(add(&field.at, &d, -s));
        }
        dirs.push(d);
    }
    if !probes.iter().all(|p| normal_ok(field, p)) {
        return Ok((Verdict::new(Status::PreconditionFailed).note("nu is not a unit normal along the chart"), Vec::new()));
    }
    let scale = sff.form().max_abs().max(1e-12);
    let mut entries = Vec::new();
    for (u, d) in net.iter().zip(&dirs) {
        let diff = |s: f64| ((field.nu)(&add(&field.at, d, s)) - (field.nu)(&add(&field.at, d, -s))) / (2.0 * s);
        let (d2, d3) = (diff(h[1]), diff(h[2]));
        let ratio = (h[1] / h[2]).powi(2);
        let rich = &d3 + (&d3 - &d2) / (ratio - 1.0);
        for v in &net {
            let lhs = rich.dot(v);
            let rhs = -sff.eval(u, v)?.dot(&nu0);
            let gap = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(scale);
            entries.push(IdentityEntry { u: u.iter().copied().collect(), v: v.iter().copied().collect(), lhs, rhs, gap });
        }
    }
    let worst = entries.iter().map(|e| e.gap).fold(0.0, f64::max);
    let v = Verdict::new(Status::from_bool(worst <= cfg.identity_tol)).value("max_relative_gap", worst);
    Ok((v, entries))
}
