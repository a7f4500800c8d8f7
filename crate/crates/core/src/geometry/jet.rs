use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{HomogeneousForm, Plane, Vector};
use crate::error::{check_dim, Error, Result};

/// Polynomial jet at a base point: the graph a + {x + P(x) : x in T} with
/// P = phi_2 + ... + phi_k expressed in the plane's tangent and normal bases.
#[derive(Debug, Clone)]
pub struct Jet {
    base: Vector,
    plane: Plane,
    degree: usize,
    hoelder: f64,
    hoelder_constant: f64,
    /// forms[j] has degree j + 2.
    forms: Vec<HomogeneousForm>,
}

impl Jet {
    pub fn new(base: Vector, plane: Plane, degree: usize, hoelder: f64, forms: Vec<HomogeneousForm>) -> Result<Jet> {
        check_dim(plane.ambient_dim(), base.len())?;
        if degree == 0 {
            return Err(Error::InvalidParameter("jet order must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&hoelder) {
            return Err(Error::InvalidParameter(format!("Hoelder exponent {hoelder} outside [0, 1]")));
        }
        check_dim(degree - 1, forms.len())?;
        for (j, f) in forms.iter().enumerate() {
            check_dim(j + 2, f.degree())?;
            check_dim(plane.dim(), f.tangent_dim())?;
            check_dim(plane.codim(), f.normal_dim())?;
        }
        Ok(Jet { base, plane, degree, hoelder, hoelder_constant: 0.0, forms })
    }

    pub fn zero(base: Vector, plane: Plane, degree: usize, hoelder: f64) -> Result<Jet> {
        let forms = (2..=degree).map(|d| HomogeneousForm::zero(d, plane.dim(), plane.codim())).collect();
        Jet::new(base, plane, degree, hoelder, forms)
    }

    /// The jet whose only non-zero form is `form`.
    pub fn homogeneous(base: Vector, plane: Plane, form: HomogeneousForm) -> Result<Jet> {
        let d = form.degree().max(1);
        let mut forms: Vec<HomogeneousForm> =
            (2..d).map(|i| HomogeneousForm::zero(i, plane.dim(), plane.codim())).collect();
        if form.degree() >= 2 {
            forms.push(form);
        }
        Jet::new(base, plane, d, 0.0, forms)
    }

    pub fn base(&self) -> &Vector {
        &self.base
    }

    pub fn plane(&self) -> &Plane {
        &self.plane
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn hoelder(&self) -> f64 {
        self.hoelder
    }

    pub fn hoelder_constant(&self) -> f64 {
        self.hoelder_constant
    }

    pub fn set_hoelder_constant(&mut self, lambda: f64) {
        self.hoelder_constant = lambda;
    }

    pub fn forms(&self) -> &[HomogeneousForm] {
        &self.forms
    }

    pub fn form(&self, degree: usize) -> Option<&HomogeneousForm> {
        if degree < 2 {
            return None;
        }
        self.forms.get(degree - 2)
    }

    pub fn is_flat(&self) -> bool {
        self.forms.iter().all(|f| f.is_zero())
    }

    pub fn with_base(&self, base: Vector) -> Jet {
        Jet { base, ..self.clone() }
    }

    pub fn truncated(&self, degree: usize) -> Result<Jet> {
        if degree == 0 || degree > self.degree {
            return Err(Error::InvalidParameter(format!("cannot truncate order {} jet to {degree}", self.degree)));
        }
        let mut j = Jet::new(self.base.clone(), self.plane.clone(), degree, self.hoelder, self.forms[..degree - 1].to_vec())?;
        j.hoelder_constant = self.hoelder_constant;
        Ok(j)
    }

    /// Same forms with a different order / exponent label.
    pub fn relabeled(&self, degree: usize, hoelder: f64) -> Result<Jet> {
        let mut forms = self.forms.clone();
        forms.truncate(degree.saturating_sub(1));
        while forms.len() + 1 < degree {
            forms.push(HomogeneousForm::zero(forms.len() + 2, self.plane.dim(), self.plane.codim()));
        }
        Jet::new(self.base.clone(), self.plane.clone(), degree, hoelder, forms)
    }

    pub fn scaled(&self, s: f64) -> Jet {
        let mut j = self.clone();
        j.forms = j.forms.iter().map(|f| f.scaled(s)).collect();
        j
    }

    /// P(chi) in normal coordinates.
    pub fn eval_coords(&self, chi: &[f64]) -> Vector {
        let mut out = Vector::zeros(self.plane.codim());
        for f in &self.forms {
            out += f.eval(chi);
        }
        out
    }

    pub fn differential_coords(&self, chi: &[f64]) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.plane.codim(), self.plane.dim());
        for f in &self.forms {
            out += f.differential(chi);
        }
        out
    }

    /// P(x) for an ambient vector x in T, as an ambient vector in T-perp.
    pub fn eval(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.plane.ambient_dim(), x.len())?;
        let chi = self.plane.tangent_coords(x);
        Ok(self.plane.from_normal_coords(&self.eval_coords(chi.as_slice())))
    }

    pub fn graph_point(&self, chi: &[f64]) -> Vector {
        let c = Vector::from_column_slice(chi);
        &self.base + self.plane.from_tangent_coords(&c) + self.plane.from_normal_coords(&self.eval_coords(chi))
    }

    /// |T-perp(z - a) - P(T(z - a))|.
    pub fn vertical_deviation(&self, z: &Vector) -> f64 {
        let w = z - &self.base;
        let chi = self.plane.tangent_coords(&w);
        let y = self.plane.normal_coords(&w);
        (y - self.eval_coords(chi.as_slice())).norm()
    }

    /// Lipschitz bound for P on the tangent ball of the given radius.
    pub fn lipschitz_bound(&self, radius: f64) -> f64 {
        self.forms.iter().map(|f| f.degree() as f64 * f.coeff_l1() * radius.powi(f.degree() as i32 - 1)).sum()
    }

    /// D^i (P o T-natural)(0) as a symmetric i-linear map R^n -> R^n.
    pub fn full_differential(&self, i: usize) -> Result<SymmetricMultilinear> {
        let n = self.plane.ambient_dim();
        let mut values = vec![Vector::zeros(n); n.pow(i as u32)];
        if let Some(f) = self.form(i) {
            let rows: Vec<Vec<f64>> = (0..n).map(|j| self.plane.basis().row(j).iter().copied().collect()).collect();
            for (flat, v) in values.iter_mut().enumerate() {
                let idx = SymmetricMultilinear::unflatten(flat, n, i);
                let args: Vec<&[f64]> = idx.iter().map(|&j| rows[j].as_slice()).collect();
                *v = self.plane.from_normal_coords(&f.polarized(&args)?);
            }
        } else if i == 0 || i > self.degree {
            return Err(Error::InvalidParameter(format!("no differential of order {i} in an order {} jet", self.degree)));
        }
        Ok(SymmetricMultilinear { n, order: i, values })
    }

    /// Largest entrywise difference of the full differentials of order i.
    pub fn differential_gap(&self, other: &Jet, i: usize) -> Result<f64> {
        let a = self.full_differential(i)?;
        let b = other.full_differential(i)?;
        Ok(a.max_abs_diff(&b))
    }

    pub fn to_json(&self) -> JetJson {
        let mut forms = BTreeMap::new();
        for f in &self.forms {
            let terms = f
                .monomials()
                .iter()
                .enumerate()
                .map(|(j, b)| (b.clone(), f.coeffs().column(j).iter().copied().collect()))
                .collect();
            forms.insert(f.degree().to_string(), terms);
        }
        JetJson {
            base: self.base.iter().copied().collect(),
            plane_basis: self.plane.basis_vectors().iter().map(|v| v.iter().copied().collect()).collect(),
            normal_basis: self.plane.normal_vectors().iter().map(|v| v.iter().copied().collect()).collect(),
            k: self.degree,
            alpha: self.hoelder,
            lambda: self.hoelder_constant,
            forms,
        }
    }

    pub fn from_json(j: &JetJson) -> Result<Jet> {
        let n = j.base.len();
        let tb: Vec<Vector> = j.plane_basis.iter().map(|v| Vector::from_column_slice(v)).collect();
        let plane = Plane::from_orthonormal_basis(n, &tb)?;
        // normal coefficients are re-expressed in our own normal basis
        let change = if j.normal_basis.is_empty() {
            DMatrix::identity(plane.codim(), plane.codim())
        } else {
            let nb: Vec<Vector> = j.normal_basis.iter().map(|v| Vector::from_column_slice(v)).collect();
            check_dim(plane.codim(), nb.len())?;
            let mut m = DMatrix::zeros(n, nb.len());
            for (c, v) in nb.iter().enumerate() {
                check_dim(n, v.len())?;
                m.set_column(c, v);
            }
            plane.normal_basis().transpose() * m
        };
        let mut forms = Vec::new();
        for d in 2..=j.k {
            let terms: Vec<(Vec<usize>, Vec<f64>)> = match j.forms.get(&d.to_string()) {
                Some(t) => t
                    .iter()
                    .map(|(b, c)| {
                        check_dim(change.ncols(), c.len())?;
                        let v = &change * Vector::from_column_slice(c);
                        Ok((b.clone(), v.iter().copied().collect()))
                    })
                    .collect::<Result<_>>()?,
                None => Vec::new(),
            };
            forms.push(HomogeneousForm::from_terms(d, plane.dim(), plane.codim(), &terms)?);
        }
        let mut jet = Jet::new(Vector::from_column_slice(&j.base), plane, j.k, j.alpha, forms)?;
        jet.hoelder_constant = j.lambda;
        Ok(jet)
    }
}

/// Serialized form of a [`Jet`]. `forms` maps a degree to its
/// (multi-index, normal coefficients) terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JetJson {
    pub base: Vec<f64>,
    pub plane_basis: Vec<Vec<f64>>,
    #[serde(default)]
    pub normal_basis: Vec<Vec<f64>>,
    pub k: usize,
    pub alpha: f64,
    #[serde(default)]
    pub lambda: f64,
    pub forms: BTreeMap<String, Vec<(Vec<usize>, Vec<f64>)>>,
}

/// Dense symmetric multilinear map (R^n)^order -> R^n.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMultilinear {
    n: usize,
    order: usize,
    values: Vec<Vector>,
}

impl SymmetricMultilinear {
    fn unflatten(mut flat: usize, n: usize, order: usize) -> Vec<usize> {
        let mut idx = vec![0; order];
        for slot in idx.iter_mut().rev() {
            *slot = flat % n;
            flat /= n;
        }
        idx
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn eval(&self, args: &[&Vector]) -> Result<Vector> {
        check_dim(self.order, args.len())?;
        for a in args {
            check_dim(self.n, a.len())?;
        }
        let mut out = Vector::zeros(self.n);
        for (flat, v) in self.values.iter().enumerate() {
            let idx = Self::unflatten(flat, self.n, self.order);
            let w: f64 = idx.iter().zip(args).map(|(&j, a)| a[j]).product();
            if w != 0.0 {
                out.axpy(w, v, 1.0);
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().flat_map(|v| v.iter()).fold(0.0, |a, x| a.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &SymmetricMultilinear) -> f64 {
        if self.n != other.n || self.order != other.order {
            return f64::INFINITY;
        }
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).amax()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::vector;

    fn parabola_jet() -> Jet {
        let plane = Plane::coordinate(2, &[0]).unwrap();
        let f = HomogeneousForm::from_terms(2, 1, 1, &[(vec![0, 0], vec![0.5])]).unwrap();
        Jet::new(vector(&[0.0, 0.0]), plane, 2, 0.0, vec![f]).unwrap()
    }

    #[test]
    fn parabola_evaluation() {
        let j = parabola_jet();
        let p = j.eval(&vector(&[0.5, 0.0])).unwrap();
        assert!((p - vector(&[0.0, 0.125])).norm() < 1e-15);
        assert!((j.vertical_deviation(&vector(&[0.5, 0.125]))).abs() < 1e-15);
    }

    #[test]
    fn second_differential_of_parabola() {
        let d = parabola_jet().full_differential(2).unwrap();
        let e1 = vector(&[1.0, 0.0]);
        let v = d.eval(&[&e1, &e1]).unwrap();
        assert!((v - vector(&[0.0, 1.0])).norm() < 1e-15);
    }

    #[test]
    fn wrong_form_dimension_rejected() {
        let plane = Plane::coordinate(3, &[0, 1]).unwrap();
        let f = HomogeneousForm::zero(2, 1, 1);
        assert!(matches!(Jet::new(Vector::zeros(3), plane, 2, 0.0, vec![f]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn json_round_trip() {
        let plane = Plane::from_spanning(3, &[vector(&[1.0, 1.0, 0.0]), vector(&[0.0, 1.0, 1.0])]).unwrap();
        let f2 = HomogeneousForm::from_terms(2, 2, 1, &[(vec![0, 0], vec![0.3]), (vec![0, 1], vec![-1.2])]).unwrap();
        let f3 = HomogeneousForm::from_terms(3, 2, 1, &[(vec![0, 1, 1], vec![0.7])]).unwrap();
        let mut j = Jet::new(vector(&[0.1, 0.2, 0.3]), plane, 3, 0.5, vec![f2, f3]).unwrap();
        j.set_hoelder_constant(0.25);
        let s = serde_json::to_string(&j.to_json()).unwrap();
        let back = Jet::from_json(&serde_json::from_str(&s).unwrap()).unwrap();
        for i in 2..=3 {
            assert!(j.differential_gap(&back, i).unwrap() < 1e-12);
        }
        assert_eq!(back.hoelder_constant(), 0.25);
        assert_eq!(back.hoelder(), 0.5);
    }
}
