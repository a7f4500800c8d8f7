use std::fmt;
use std::sync::Arc;

use super::{distance_to_graph, Jet, Plane, ShearMap, Vector};

/// Membership in the cone E(a, v, eps) = {x : |s(x - a) - v| < eps for some s > 0}.
pub fn cone_contains(apex: &Vector, direction: &Vector, eps: f64, x: &Vector) -> bool {
    let d = x - apex;
    let dn2 = d.norm_squared();
    let v2 = direction.norm_squared();
    if dn2 == 0.0 {
        return v2.sqrt() < eps;
    }
    let dv = d.dot(direction);
    let min = if dv > 0.0 { (v2 - dv * dv / dn2).max(0.0).sqrt() } else { v2.sqrt() };
    min < eps
}

/// The carved set of the full-density construction: inside the shell
/// r_j < |T(x - a)| <= r_(j-1) a point is kept when it lies in
/// X(a, T, 1) and |T-perp(x - a) - P(T(x - a))| <= kappa_j |T(x - a)|^exponent.
#[derive(Debug, Clone)]
pub struct CarveSpec {
    pub jet: Jet,
    /// Strictly decreasing shell radii r_0 > r_1 > ...
    pub radii: Vec<f64>,
    pub exponent: f64,
    /// `None`: kappa_j = 1 / (2j). `Some(lambda)`: kappa_j = lambda.
    pub fixed_kappa: Option<f64>,
}

impl CarveSpec {
    pub fn kappa(&self, shell: usize) -> f64 {
        self.fixed_kappa.unwrap_or(1.0 / (2.0 * shell as f64))
    }

    pub fn contains(&self, x: &Vector) -> bool {
        let plane = self.jet.plane();
        let w = x - self.jet.base();
        let chi = plane.tangent_coords(&w);
        let rho = chi.norm();
        if self.radii.is_empty() || rho > self.radii[0] {
            return false;
        }
        let y = plane.normal_coords(&w);
        if y.norm() > rho {
            return false;
        }
        let shell = self.radii.partition_point(|&r| r >= rho).max(1);
        let dev = (y - self.jet.eval_coords(chi.as_slice())).norm();
        dev <= self.kappa(shell) * rho.powf(self.exponent)
    }
}

pub type PredicateFn = Arc<dyn Fn(&Vector) -> bool + Send + Sync>;

/// Measurable regions understood by the measure oracles.
#[derive(Clone)]
pub enum Region {
    Everything,
    OpenBall { center: Vector, radius: f64 },
    ClosedBall { center: Vector, radius: f64 },
    /// C(T, c, s, t) = {|T(x - c)| < s, |T-perp(x - c)| < t}; s or t may be infinite.
    Cylinder { plane: Arc<Plane>, center: Vector, s: f64, t: f64 },
    Cone { apex: Vector, direction: Vector, eps: f64 },
    /// {x : normal . x > offset}
    HalfSpace { normal: Vector, offset: f64 },
    /// X_{k,alpha}(a, T, f, kappa): |P(T(x - a)) - T-perp(x - a)| <= kappa |T(x - a)|^exponent.
    GraphNbhd { jet: Arc<Jet>, kappa: f64, exponent: f64 },
    /// {x : dist(x, graph of the jet) > threshold}
    GraphFar { jet: Arc<Jet>, threshold: f64 },
    Carved(Arc<CarveSpec>),
    /// {x : map(x) in inner}
    Preimage { map: Arc<ShearMap>, inner: Box<Region> },
    Predicate { label: String, bounds: Option<(Vector, f64)>, test: PredicateFn },
    Complement(Box<Region>),
    Intersection(Vec<Region>),
    Union(Vec<Region>),
}

impl fmt::Debug for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Everything => write!(f, "Everything"),
            Region::OpenBall { center, radius } => write!(f, "U({:?}, {radius})", center.as_slice()),
            Region::ClosedBall { center, radius } => write!(f, "B({:?}, {radius})", center.as_slice()),
            Region::Cylinder { center, s, t, .. } => write!(f, "C({:?}, {s}, {t})", center.as_slice()),
            Region::Cone { apex, direction, eps } => write!(f, "E({:?}, {:?}, {eps})", apex.as_slice(), direction.as_slice()),
            Region::HalfSpace { normal, offset } => write!(f, "H({:?} > {offset})", normal.as_slice()),
            Region::GraphNbhd { kappa, exponent, .. } => write!(f, "X(kappa={kappa}, exp={exponent})"),
            Region::GraphFar { threshold, .. } => write!(f, "GraphFar({threshold})"),
            Region::Carved(c) => write!(f, "Carved({} shells)", c.radii.len()),
            Region::Preimage { inner, .. } => write!(f, "Preimage({inner:?})"),
            Region::Predicate { label, .. } => write!(f, "Predicate({label})"),
            Region::Complement(r) => write!(f, "Not({r:?})"),
            Region::Intersection(rs) => f.debug_tuple("And").field(rs).finish(),
            Region::Union(rs) => f.debug_tuple("Or").field(rs).finish(),
        }
    }
}

/// Roots of a t^2 + b t + c in (0, 1).
fn quadratic_roots(a: f64, b: f64, c: f64, out: &mut Vec<f64>) {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return;
    }
    if a.abs() <= 1e-14 * scale {
        if b != 0.0 {
            out.push(-c / b);
        }
        return;
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return;
    }
    let sq = disc.sqrt();
    // numerically stable pair
    let q = -0.5 * (b + b.signum() * sq);
    if q != 0.0 {
        out.push(q / a);
        out.push(c / q);
    } else {
        out.push(0.0);
    }
}

impl Region {
    pub fn ball(center: Vector, radius: f64) -> Region {
        Region::OpenBall { center, radius }
    }

    pub fn closed_ball(center: Vector, radius: f64) -> Region {
        Region::ClosedBall { center, radius }
    }

    pub fn cylinder(plane: &Plane, center: Vector, s: f64, t: f64) -> Region {
        Region::Cylinder { plane: Arc::new(plane.clone()), center, s, t }
    }

    pub fn cone(apex: Vector, direction: Vector, eps: f64) -> Region {
        Region::Cone { apex, direction, eps }
    }

    /// X(a, T, kappa) with f constant: |T-perp(x - a)| <= kappa |T(x - a)|.
    pub fn plane_cone(a: &Vector, plane: &Plane, kappa: f64) -> Region {
        let jet = Jet::zero(a.clone(), plane.clone(), 1, 0.0).expect("consistent dimensions");
        Region::GraphNbhd { jet: Arc::new(jet), kappa, exponent: 1.0 }
    }

    pub fn graph_nbhd(jet: &Jet, kappa: f64, exponent: f64) -> Region {
        Region::GraphNbhd { jet: Arc::new(jet.clone()), kappa, exponent }
    }

    pub fn graph_far(jet: &Jet, threshold: f64) -> Region {
        Region::GraphFar { jet: Arc::new(jet.clone()), threshold }
    }

    pub fn predicate(label: impl Into<String>, bounds: Option<(Vector, f64)>, test: impl Fn(&Vector) -> bool + Send + Sync + 'static) -> Region {
        Region::Predicate { label: label.into(), bounds, test: Arc::new(test) }
    }

    pub fn preimage(map: &ShearMap, inner: Region) -> Region {
        Region::Preimage { map: Arc::new(map.clone()), inner: Box::new(inner) }
    }

    pub fn and(self, other: Region) -> Region {
        match self {
            Region::Everything => other,
            Region::Intersection(mut v) => {
                v.push(other);
                Region::Intersection(v)
            }
            s => Region::Intersection(vec![s, other]),
        }
    }

    pub fn not(self) -> Region {
        Region::Complement(Box::new(self))
    }

    pub fn contains(&self, x: &Vector) -> bool {
        match self {
            Region::Everything => true,
            Region::OpenBall { center, radius } => (x - center).norm() < *radius,
            Region::ClosedBall { center, radius } => (x - center).norm() <= *radius,
            Region::Cylinder { plane, center, s, t } => {
                let d = x - center;
                plane.tangent_norm(&d) < *s && plane.normal_norm(&d) < *t
            }
            Region::Cone { apex, direction, eps } => cone_contains(apex, direction, *eps, x),
            Region::HalfSpace { normal, offset } => normal.dot(x) > *offset,
            Region::GraphNbhd { jet, kappa, exponent } => {
                let rho = jet.plane().tangent_norm(&(x - jet.base()));
                jet.vertical_deviation(x) <= kappa * rho.powf(*exponent)
            }
            Region::GraphFar { jet, threshold } => {
                let v = jet.vertical_deviation(x);
                if v <= *threshold {
                    return false;
                }
                if jet.is_flat() {
                    return true;
                }
                let r = (x - jet.base()).norm();
                let lip = jet.lipschitz_bound(2.0 * r);
                if v > (2.0 + lip) * threshold {
                    return true;
                }
                distance_to_graph(jet, x, 2.0 * r.max(*threshold), 1e-12).distance > *threshold
            }
            Region::Carved(c) => c.contains(x),
            Region::Preimage { map, inner } => inner.contains(&map.apply(x)),
            Region::Predicate { test, .. } => test(x),
            Region::Complement(r) => !r.contains(x),
            Region::Intersection(rs) => rs.iter().all(|r| r.contains(x)),
            Region::Union(rs) => rs.iter().any(|r| r.contains(x)),
        }
    }

    /// A ball containing the region, when one is known.
    pub fn bounding_ball(&self) -> Option<(Vector, f64)> {
        match self {
            Region::OpenBall { center, radius } | Region::ClosedBall { center, radius } => Some((center.clone(), *radius)),
            Region::Cylinder { center, s, t, .. } => {
                if s.is_finite() && t.is_finite() {
                    Some((center.clone(), s.hypot(*t)))
                } else {
                    None
                }
            }
            Region::Carved(c) => c.radii.first().map(|r| (c.jet.base().clone(), r * std::f64::consts::SQRT_2)),
            Region::Preimage { map, inner } => inner.bounding_ball().map(|(c, rho)| {
                let l = map.lipschitz_bound(&c, rho);
                (map.inverse().apply(&c), rho * l)
            }),
            Region::Predicate { bounds, .. } => bounds.clone(),
            Region::Intersection(rs) => rs
                .iter()
                .filter_map(|r| r.bounding_ball())
                .min_by(|a, b| a.1.total_cmp(&b.1)),
            Region::Union(rs) => {
                let balls: Option<Vec<_>> = rs.iter().map(|r| r.bounding_ball()).collect();
                let balls = balls?;
                let (c0, _) = balls.first()?.clone();
                let rad = balls.iter().map(|(c, r)| (c - &c0).norm() + r).fold(0.0, f64::max);
                Some((c0, rad))
            }
            _ => None,
        }
    }

    /// Parameters t in (0, 1) where the segment p0 + t (p1 - p0) may cross the
    /// boundary, for regions built only from quadric primitives. `None` when
    /// the region needs numeric root finding.
    pub fn segment_breakpoints(&self, p0: &Vector, p1: &Vector) -> Option<Vec<f64>> {
        let mut out = Vec::new();
        self.collect_breakpoints(p0, p1, &mut out)?;
        out.retain(|t| *t > 0.0 && *t < 1.0 && t.is_finite());
        Some(out)
    }

    fn collect_breakpoints(&self, p0: &Vector, p1: &Vector, out: &mut Vec<f64>) -> Option<()> {
        let e = p1 - p0;
        match self {
            Region::Everything => {}
            Region::OpenBall { center, radius } | Region::ClosedBall { center, radius } => {
                let d0 = p0 - center;
                quadratic_roots(e.dot(&e), 2.0 * d0.dot(&e), d0.dot(&d0) - radius * radius, out);
            }
            Region::Cylinder { plane, center, s, t } => {
                let d0 = p0 - center;
                if s.is_finite() {
                    let (dt, et) = (plane.tangent_coords(&d0), plane.tangent_coords(&e));
                    quadratic_roots(et.dot(&et), 2.0 * dt.dot(&et), dt.dot(&dt) - s * s, out);
                }
                if t.is_finite() {
                    let (dn, en) = (plane.normal_coords(&d0), plane.normal_coords(&e));
                    quadratic_roots(en.dot(&en), 2.0 * dn.dot(&en), dn.dot(&dn) - t * t, out);
                }
            }
            Region::Cone { apex, direction: v, eps } => {
                let d0 = p0 - apex;
                let (a, b, c) = (e.dot(&e), 2.0 * d0.dot(&e), d0.dot(&d0));
                let (ev, dv) = (e.dot(v), d0.dot(v));
                let k = v.norm_squared() - eps * eps;
                quadratic_roots(k * a - ev * ev, k * b - 2.0 * dv * ev, k * c - dv * dv, out);
                if ev != 0.0 {
                    out.push(-dv / ev);
                }
                if a > 0.0 {
                    out.push(-d0.dot(&e) / a);
                }
            }
            Region::HalfSpace { normal, offset } => {
                let ne = normal.dot(&e);
                if ne != 0.0 {
                    out.push((offset - normal.dot(p0)) / ne);
                }
            }
            Region::GraphNbhd { jet, kappa, exponent } if jet.is_flat() && *exponent == 1.0 => {
                let plane = jet.plane();
                let d0 = p0 - jet.base();
                let (dt, et) = (plane.tangent_coords(&d0), plane.tangent_coords(&e));
                let (dn, en) = (plane.normal_coords(&d0), plane.normal_coords(&e));
                let k2 = kappa * kappa;
                quadratic_roots(
                    k2 * et.dot(&et) - en.dot(&en),
                    2.0 * (k2 * dt.dot(&et) - dn.dot(&en)),
                    k2 * dt.dot(&dt) - dn.dot(&dn),
                    out,
                );
            }
            Region::GraphFar { jet, threshold } if jet.is_flat() => {
                let plane = jet.plane();
                let d0 = p0 - jet.base();
                let (dn, en) = (plane.normal_coords(&d0), plane.normal_coords(&e));
                quadratic_roots(en.dot(&en), 2.0 * dn.dot(&en), dn.dot(&dn) - threshold * threshold, out);
            }
            Region::Complement(r) => r.collect_breakpoints(p0, p1, out)?,
            Region::Intersection(rs) | Region::Union(rs) => {
                for r in rs {
                    r.collect_breakpoints(p0, p1, out)?;
                }
            }
            _ => return None,
        }
        Some(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{vector, HomogeneousForm};
    use proptest::prelude::*;

    // Oracle for cone membership: scan s over a fine logarithmic grid.
    fn cone_brute(a: &Vector, v: &Vector, eps: f64, x: &Vector) -> (bool, f64) {
        let d = x - a;
        let mut best = f64::INFINITY;
        for i in 0..=40_000 {
            let s = 10f64.powf(-6.0 + 12.0 * i as f64 / 40_000.0);
            best = best.min((&d * s - v).norm());
        }
        (best < eps, best)
    }

    #[test]
    fn cone_examples() {
        let a = vector(&[0.0, 0.0]);
        let v = vector(&[1.0, 0.0]);
        assert!(cone_contains(&a, &v, 0.1, &vector(&[1.0, 0.05])));
        assert!(!cone_contains(&a, &v, 0.1, &vector(&[-1.0, 0.0])));
        assert!(!cone_contains(&a, &v, 0.1, &a));
        assert!(cone_contains(&a, &vector(&[0.05, 0.0]), 0.1, &a));
    }

    #[test]
    fn cylinder_and_ball() {
        let p = Plane::coordinate(2, &[0]).unwrap();
        let c = Region::cylinder(&p, vector(&[0.0, 0.0]), 1.0, 0.1);
        assert!(c.contains(&vector(&[0.9, 0.05])));
        assert!(!c.contains(&vector(&[0.9, 0.15])));
        assert!(Region::closed_ball(vector(&[0.0, 0.0]), 1.0).contains(&vector(&[1.0, 0.0])));
        assert!(!Region::ball(vector(&[0.0, 0.0]), 1.0).contains(&vector(&[1.0, 0.0])));
    }

    #[test]
    fn graph_far_matches_distance() {
        let f = HomogeneousForm::from_terms(2, 1, 1, &[(vec![0, 0], vec![0.5])]).unwrap();
        let j = Jet::new(vector(&[0.0, 0.0]), Plane::coordinate(2, &[0]).unwrap(), 2, 0.0, vec![f]).unwrap();
        let r = Region::graph_far(&j, 0.1);
        assert!(!r.contains(&vector(&[0.0, 0.05])));
        assert!(r.contains(&vector(&[0.0, 0.2])));
        assert!(!r.contains(&vector(&[1.0, 0.55])));
    }

    #[test]
    fn carve_shells() {
        let j = Jet::zero(vector(&[0.0, 0.0]), Plane::coordinate(2, &[0]).unwrap(), 1, 0.0).unwrap();
        let spec = CarveSpec { jet: j, radii: vec![1.0, 0.5, 0.25], exponent: 1.0, fixed_kappa: None };
        // shell 1 keeps |y| <= rho / 2, shell 2 keeps |y| <= rho / 4
        assert!(spec.contains(&vector(&[0.8, 0.39])));
        assert!(!spec.contains(&vector(&[0.8, 0.41])));
        assert!(spec.contains(&vector(&[0.4, 0.09])));
        assert!(!spec.contains(&vector(&[0.4, 0.11])));
        assert!(!spec.contains(&vector(&[1.1, 0.0])));
        assert!(spec.contains(&vector(&[0.0, 0.0])));
    }

    fn v2() -> impl Strategy<Value = Vector> {
        prop::collection::vec(-1.0..1.0f64, 2).prop_map(Vector::from_vec)
    }

    proptest! {
        #[test]
        fn cone_closed_form_matches_scan(v in v2(), x in v2(), eps in 0.05..0.5f64) {
            let a = vector(&[0.1, -0.2]);
            let (brute, dist) = cone_brute(&a, &v, eps, &x);
            prop_assume!((dist - eps).abs() > 1e-3);
            prop_assert_eq!(cone_contains(&a, &v, eps, &x), brute);
        }

        // Membership is constant between consecutive breakpoints.
        #[test]
        fn breakpoints_separate_membership(p0 in v2(), p1 in v2(), v in v2(), eps in 0.05..0.9f64) {
            let p = Plane::coordinate(2, &[0]).unwrap();
            let region = Region::cone(vector(&[0.0, 0.0]), v, eps)
                .and(Region::closed_ball(vector(&[0.2, 0.1]), 0.6))
                .and(Region::cylinder(&p, vector(&[0.0, 0.0]), 0.7, 0.3).not());
            let mut ts = region.segment_breakpoints(&p0, &p1).unwrap();
            ts.push(0.0);
            ts.push(1.0);
            ts.sort_by(f64::total_cmp);
            let at = |t: f64| region.contains(&(&p0 + (&p1 - &p0) * t));
            for w in ts.windows(2) {
                if w[1] - w[0] < 1e-9 { continue; }
                let mid = at(0.5 * (w[0] + w[1]));
                for k in 1..8 {
                    let t = w[0] + (w[1] - w[0]) * (k as f64 / 8.0);
                    if (t - w[0]).min(w[1] - t) > 1e-7 {
                        prop_assert_eq!(at(t), mid);
                    }
                }
            }
        }
    }
}
