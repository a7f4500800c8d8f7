use super::{HomogeneousForm, Jet, Plane, Vector};
use crate::error::{check_dim, Result};

/// x -> x + sum_j s_j phi_j(T(x - o)) with the forms valued in T-perp.
///
/// Such maps fix the tangential coordinate, so the inverse is the same map with
/// every sign flipped.
#[derive(Debug, Clone)]
pub struct ShearMap {
    plane: Plane,
    origin: Vector,
    terms: Vec<(f64, HomogeneousForm)>,
}

impl ShearMap {
    pub fn new(plane: Plane, origin: Vector, terms: Vec<(f64, HomogeneousForm)>) -> Result<ShearMap> {
        check_dim(plane.ambient_dim(), origin.len())?;
        for (_, f) in &terms {
            check_dim(plane.dim(), f.tangent_dim())?;
            check_dim(plane.codim(), f.normal_dim())?;
        }
        Ok(ShearMap { plane, origin, terms })
    }

    pub fn identity(plane: Plane, origin: Vector) -> ShearMap {
        ShearMap { plane, origin, terms: Vec::new() }
    }

    /// x -> x - Q(Tx) + P(Tx) where Q = lower + top and P = top. It carries the
    /// graph of Q onto the graph of P.
    pub fn replace_lower(lower: &Jet, top: &HomogeneousForm) -> Result<ShearMap> {
        let terms = lower.forms().iter().filter(|f| f.degree() < top.degree()).map(|f| (-1.0, f.clone())).collect();
        ShearMap::new(lower.plane().clone(), lower.base().clone(), terms)
    }

    /// x -> x - phi(T(x - o)), the reduction step of the iterated fit.
    pub fn subtract(plane: Plane, origin: Vector, form: HomogeneousForm) -> Result<ShearMap> {
        ShearMap::new(plane, origin, vec![(-1.0, form)])
    }

    /// Carries the graph of the jet onto its base plane.
    pub fn flatten(jet: &Jet) -> ShearMap {
        ShearMap {
            plane: jet.plane().clone(),
            origin: jet.base().clone(),
            terms: jet.forms().iter().map(|f| (-1.0, f.clone())).collect(),
        }
    }

    /// Carries graph(from) onto graph(to); both jets must share base and plane.
    pub fn between(from: &Jet, to: &Jet) -> Result<ShearMap> {
        let mut terms: Vec<(f64, HomogeneousForm)> = from.forms().iter().map(|f| (-1.0, f.clone())).collect();
        terms.extend(to.forms().iter().map(|f| (1.0, f.clone())));
        ShearMap::new(from.plane().clone(), from.base().clone(), terms)
    }

    pub fn plane(&self) -> &Plane {
        &self.plane
    }

    pub fn origin(&self) -> &Vector {
        &self.origin
    }

    pub fn displacement(&self, x: &Vector) -> Vector {
        let chi = self.plane.tangent_coords(&(x - &self.origin));
        let mut d = Vector::zeros(self.plane.codim());
        for (s, f) in &self.terms {
            d.axpy(*s, &f.eval(chi.as_slice()), 1.0);
        }
        self.plane.from_normal_coords(&d)
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        x + self.displacement(x)
    }

    pub fn inverse(&self) -> ShearMap {
        ShearMap {
            plane: self.plane.clone(),
            origin: self.origin.clone(),
            terms: self.terms.iter().map(|(s, f)| (-s, f.clone())).collect(),
        }
    }

    /// Lipschitz bound for the map (and its inverse) on B(center, radius).
    pub fn lipschitz_bound(&self, center: &Vector, radius: f64) -> f64 {
        let rho = self.plane.tangent_norm(&(center - &self.origin)) + radius;
        1.0 + self
            .terms
            .iter()
            .map(|(s, f)| s.abs() * f.degree() as f64 * f.coeff_l1() * rho.powi(f.degree() as i32 - 1))
            .sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::vector;
    use proptest::prelude::*;

    fn cubic_jet(c2: f64, c3: f64) -> Jet {
        let plane = Plane::coordinate(2, &[0]).unwrap();
        let f2 = HomogeneousForm::from_terms(2, 1, 1, &[(vec![0, 0], vec![c2])]).unwrap();
        let f3 = HomogeneousForm::from_terms(3, 1, 1, &[(vec![0, 0, 0], vec![c3])]).unwrap();
        Jet::new(vector(&[0.3, -0.2]), plane, 3, 0.0, vec![f2, f3]).unwrap()
    }

    #[test]
    fn flatten_maps_graph_to_plane() {
        let j = cubic_jet(0.5, -0.4);
        let f = ShearMap::flatten(&j);
        let p = j.graph_point(&[0.7]);
        let q = f.apply(&p);
        assert!(j.plane().normal_norm(&(q - j.base())).abs() < 1e-15);
    }

    #[test]
    fn replace_lower_carries_q_to_p() {
        let j = cubic_jet(0.5, -0.4);
        let top = j.form(3).unwrap().clone();
        let f = ShearMap::replace_lower(&j, &top).unwrap();
        let p_only = Jet::homogeneous(j.base().clone(), j.plane().clone(), top).unwrap();
        for t in [-0.5, 0.1, 0.9] {
            let q = f.apply(&j.graph_point(&[t]));
            assert!(p_only.vertical_deviation(&q) < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn inverse_round_trip(c2 in -3.0..3.0f64, c3 in -3.0..3.0f64, x in -2.0..2.0f64, y in -2.0..2.0f64) {
            let f = ShearMap::flatten(&cubic_jet(c2, c3));
            let p = vector(&[x, y]);
            let back = f.inverse().apply(&f.apply(&p));
            prop_assert!((back - p).norm() < 1e-12);
        }

        #[test]
        fn lipschitz_bound_is_valid(c2 in -3.0..3.0f64, c3 in -3.0..3.0f64, x in -1.0..1.0f64, dx in -0.1..0.1f64, dy in -0.1..0.1f64) {
            let f = ShearMap::flatten(&cubic_jet(c2, c3));
            let p = vector(&[x, 0.0]);
            let q = vector(&[x + dx, dy]);
            let l = f.lipschitz_bound(&p, 0.15);
            prop_assert!((f.apply(&p) - f.apply(&q)).norm() <= l * (p - q).norm() + 1e-12);
        }
    }
}
