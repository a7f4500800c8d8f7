use std::sync::Arc;

use nalgebra::DMatrix;

use super::*;
use crate::geometry::{vector, HomogeneousForm, Jet, Plane};
use crate::measure::{ChartSpec, Segment};
use crate::verdict::Status;

fn cfg() -> Config {
    Config::default()
}

fn graph(c2: f64, c3: f64) -> MeasureOracle {
    let map: crate::measure::ChartMap = Arc::new(move |u: &[f64]| {
        let t = u[0];
        (vector(&[t, c2 * t * t / 2.0 + c3 * t * t * t / 6.0]), DMatrix::from_column_slice(2, 1, &[1.0, c2 * t + c3 * t * t / 2.0]))
    });
    let lip = (1.0 + (c2.abs() + c3.abs() / 2.0).powi(2)).sqrt();
    MeasureOracle::charts(vec![ChartSpec { name: "graph".into(), lo: vec![-1.0], hi: vec![1.0], map, lipschitz: lip, resolution: 256 }], 1).unwrap()
}

/// Upper hemisphere graph over a square, R = 1.
fn cap() -> MeasureOracle {
    let map: crate::measure::ChartMap = Arc::new(|u: &[f64]| {
        let (x, y) = (u[0], u[1]);
        let z = (1.0 - x * x - y * y).sqrt();
        (vector(&[x, y, z]), DMatrix::from_column_slice(3, 2, &[1.0, 0.0, -x / z, 0.0, 1.0, -y / z]))
    });
    MeasureOracle::charts(vec![ChartSpec { name: "cap".into(), lo: vec![-0.5, -0.5], hi: vec![0.5, 0.5], map, lipschitz: 1.5, resolution: 48 }], 2).unwrap()
}

fn x_axis() -> MeasureOracle {
    MeasureOracle::segments(vec![Segment::new(vector(&[-1.0, 0.0]), vector(&[1.0, 0.0]))]).unwrap()
}

fn truth(c2: f64, c3: f64) -> Jet {
    let plane = Plane::coordinate(2, &[0]).unwrap();
    let f2 = HomogeneousForm::from_terms(2, 1, 1, &[(vec![0, 0], vec![c2 / 2.0])]).unwrap();
    let f3 = HomogeneousForm::from_terms(3, 1, 1, &[(vec![0, 0, 0], vec![c3 / 6.0])]).unwrap();
    Jet::new(vector(&[0.0, 0.0]), plane, 3, 0.0, vec![f2, f3]).unwrap()
}

#[test]
fn line_plane_and_zero_jet() {
    let c = cfg();
    let o = x_axis();
    let a = vector(&[0.0, 0.0]);
    let est = estimate_tangent_plane(&o, &a, &c.schedule, &c).unwrap();
    let (m, p) = est.result().expect("plane");
    assert_eq!(m, 1);
    assert!(p.same_as(&Plane::coordinate(2, &[0]).unwrap(), 1e-9));
    let fit = iterated_jet_fit(&o, &a, 3, 0.0, &c.schedule, &c).unwrap();
    assert!(fit.verdict.holds(), "{:?}", fit.verdict.notes);
    assert!(fit.jet.unwrap().forms().iter().all(|f| f.max_abs_coeff() < 1e-8));
    // forcing one more dimension fails validation
    let forced = estimate_tangent_plane_with_dim(&o, &a, 2, &c.schedule, &c).unwrap();
    assert!(forced.plane.is_none());
}

#[test]
fn cap_plane() {
    let c = cfg();
    let est = estimate_tangent_plane(&cap(), &vector(&[0.0, 0.0, 1.0]), &c.schedule, &c).unwrap();
    let (m, p) = est.result().expect("plane");
    assert_eq!(m, 2);
    assert!(p.max_angle(&Plane::coordinate(3, &[0, 1]).unwrap()) < 1e-2);
}

#[test]
fn homogeneous_fit_coefficients() {
    let c = cfg();
    let a = vector(&[0.0, 0.0]);
    let t = Plane::coordinate(2, &[0]).unwrap();
    let f = fit_homogeneous_form(&graph(1.0, 0.0), &a, &t, 2, 2, &[0.05], &c).unwrap();
    assert!((f.coeffs()[(0, 0)] - 0.5).abs() < 1e-3);
    let f = fit_homogeneous_form(&graph(0.0, 1.0), &a, &t, 3, 3, &[0.05, 0.04], &c).unwrap();
    assert!((f.coeffs()[(0, 0)] - 1.0 / 6.0).abs() < 1e-2);
    let f = fit_homogeneous_form(&x_axis(), &a, &t, 2, 3, &[0.05], &c).unwrap();
    assert!(f.max_abs_coeff() <= 1e-8);
}

#[test]
fn iterated_recovers_graph_jets() {
    let c = cfg();
    let a = vector(&[0.0, 0.0]);
    for (c2, c3) in [(1.0, 0.0), (0.5, 2.0), (0.0, 1.0)] {
        let o = graph(c2, c3);
        let fit = iterated_jet_fit(&o, &a, 3, 0.0, &c.schedule, &c).unwrap();
        assert!(fit.verdict.holds(), "({c2},{c3}) {:?}", fit.verdict.notes);
        let gap = jet_gap(fit.jet.as_ref().unwrap(), &truth(c2, c3)).unwrap();
        assert!(gap < 1e-2, "({c2},{c3}) gap {gap}");
        let u = uniqueness_from_fit(&o, &fit, &c.schedule, &c).unwrap();
        assert!(u.verdict.holds(), "uniqueness gap {}", u.gap);
    }
}

#[test]
fn residual_bound_on_parabola() {
    let c = cfg();
    let o = graph(1.0, 0.0);
    let good = truth(1.0, 0.0).truncated(2).unwrap();
    assert!(verify_graph_residual(&o, &good, &c.schedule, &c).unwrap().holds());
    let bad = good.scaled(2.0);
    assert_eq!(verify_graph_residual(&o, &bad, &c.schedule, &c).unwrap().status, Status::Fails);
    assert!(shear_invariance_check(&o, &good, &c.schedule, &c).unwrap().holds());
    let wrong = shear_invariance_check(&o, &bad, &c.schedule, &c).unwrap();
    assert!(wrong.holds(), "{:?}", wrong.notes);
    assert!(wrong.notes[0].contains("before fails"));
}

#[test]
fn parabola_orders() {
    let c = cfg();
    let v = order_monotonicity_check(&graph(1.0, 0.0), &vector(&[0.0, 0.0]), 2, 0.0, &c.schedule, &c).unwrap();
    assert!(v.holds(), "{:?}", v.notes);
    let fit = iterated_jet_fit(&graph(1.0, 0.0), &vector(&[0.0, 0.0]), 2, 1.0, &c.schedule, &c).unwrap();
    assert!(fit.verdict.holds());
    assert!(fit.lambda.is_some());
}

#[test]
fn off_support_point_fails() {
    let c = cfg();
    let fit = iterated_jet_fit(&x_axis(), &vector(&[0.0, 0.5]), 2, 0.0, &c.schedule, &c).unwrap();
    assert_eq!(fit.verdict.status, Status::Fails);
    assert!(fit.jet.is_none());
}
