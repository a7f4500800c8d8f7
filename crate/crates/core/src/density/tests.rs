use super::*;
use crate::geometry::{vector, Plane};
use crate::measure::{ChartSpec, Segment};
use proptest::prelude::*;
use std::sync::Arc;

fn cfg() -> Config {
    Config::default()
}

fn x_axis() -> MeasureOracle {
    MeasureOracle::segments(vec![Segment::new(vector(&[-1.0, 0.0]), vector(&[1.0, 0.0]))]).unwrap()
}

fn entries(xs: &[f64]) -> Vec<(f64, f64, f64)> {
    xs.iter().enumerate().map(|(i, x)| (0.5f64.powi(i as i32), *x, 0.0)).collect()
}

/// Dyadic annuli 2^-2i-1 < |t| < 2^-2i on the real line.
fn dyadic() -> MeasureOracle {
    let mut segs = Vec::new();
    for i in 0..30 {
        let (lo, hi) = (0.5f64.powi(2 * i + 1), 0.5f64.powi(2 * i));
        segs.push(Segment::new(vector(&[lo]), vector(&[hi])));
        segs.push(Segment::new(vector(&[-hi]), vector(&[-lo])));
    }
    MeasureOracle::segments(segs).unwrap()
}

fn parabola() -> MeasureOracle {
    let map: crate::measure::ChartMap = Arc::new(|u: &[f64]| {
        let t = u[0];
        (vector(&[t, 0.5 * t * t]), nalgebra::DMatrix::from_column_slice(2, 1, &[1.0, t]))
    });
    let chart = ChartSpec { name: "parabola".into(), lo: vec![-1.0], hi: vec![1.0], map, lipschitz: 1.5, resolution: 256 };
    MeasureOracle::charts(vec![chart], 1).unwrap()
}

#[test]
fn classify_rules() {
    let c = cfg();
    let zero: Vec<f64> = (0..20).map(|i| 0.5f64.powi(i)).collect();
    assert_eq!(classify(&entries(&zero), TraceKind::Upper, &c), Limit::LimitZero);
    let pos = vec![1.0; 12];
    assert_eq!(classify(&entries(&pos), TraceKind::Upper, &c), Limit::LimitPositive { theta: 1.0 });
    let div: Vec<f64> = (0..12).map(|i| 2f64.powi(i)).collect();
    assert_eq!(classify(&entries(&div), TraceKind::Upper, &c), Limit::Diverges);
    let osc: Vec<f64> = (0..12).map(|i| if i % 2 == 0 { 1.0 } else { 0.2 }).collect();
    assert_eq!(classify(&entries(&osc), TraceKind::Upper, &c), Limit::LimitPositive { theta: 1.0 });
    assert!(matches!(classify(&entries(&osc), TraceKind::Lower, &c), Limit::LimitPositive { theta } if (theta - 0.2).abs() < 1e-12));
    assert_eq!(classify(&entries(&[1.0; 3]), TraceKind::Upper, &c), Limit::Inconclusive);
}

#[test]
fn full_line_ratio_is_one() {
    let o = x_axis();
    for r in [0.5, 0.1, 1e-3] {
        let (x, e) = density_ratio(&o, &vector(&[0.0, 0.0]), r);
        assert!((x - 1.0).abs() < 1e-9 && e == 0.0, "{x} {e}");
    }
    let far = density_ratio(&o, &vector(&[0.0, 0.5]), 0.25);
    assert_eq!(far.0, 0.0);
}

#[test]
fn dyadic_ratios_match_series() {
    // mass of (0, 2^-j) is sum over annuli below, giving 1/3 and 2/3 ratios
    let o = dyadic();
    for i in 1..8 {
        let odd = density_ratio(&o, &vector(&[0.0]), 0.5f64.powi(2 * i + 1)).0;
        let even = density_ratio(&o, &vector(&[0.0]), 0.5f64.powi(2 * i)).0;
        assert!((odd - 1.0 / 3.0).abs() < 1e-9, "{odd}");
        assert!((even - 2.0 / 3.0).abs() < 1e-9, "{even}");
    }
    let sched = ScaleSchedule::dyadic(0.5, 24);
    let lower = lower_density(&o, &vector(&[0.0]), &sched, &cfg());
    match lower.verdict {
        Limit::LimitPositive { theta } => assert!((theta - 1.0 / 3.0).abs() < 1e-9),
        v => panic!("{v:?}"),
    }
}

#[test]
fn line_densities_and_cones() {
    let o = x_axis();
    let a = vector(&[0.0, 0.0]);
    let c = cfg();
    let s = c.schedule;
    match upper_density(&o, &a, &s, &c).verdict {
        Limit::LimitPositive { theta } => assert!((theta - 1.0).abs() < 0.02),
        v => panic!("{v:?}"),
    }
    assert_eq!(upper_density(&o, &vector(&[0.0, 0.9]), &s, &c).verdict, Limit::LimitZero);
    let e1 = vector(&[1.0, 0.0]);
    let e2 = vector(&[0.0, 1.0]);
    assert!(in_upper_tangent_cone(&o, &a, &e1, &c.eps_grid, &s, &c).unwrap().holds());
    assert_eq!(in_upper_tangent_cone(&o, &a, &e2, &c.eps_grid, &s, &c).unwrap().status, Status::Fails);
    assert!(in_lower_tangent_cone(&o, &a, &e1, &c.eps_grid, &s, &c).unwrap().holds());
    assert_eq!(in_lower_tangent_cone(&o, &a, &e2, &c.eps_grid, &s, &c).unwrap().status, Status::Fails);
    assert!(in_upper_tangent_cone(&o, &a, &vector(&[0.0, 0.0]), &c.eps_grid, &s, &c).unwrap().holds());
}

#[test]
fn dyadic_cones_separate() {
    let o = dyadic();
    let a = vector(&[0.0]);
    let c = cfg();
    let s = ScaleSchedule::dyadic(0.5, 24);
    let eps = [0.15, 0.1, 0.05];
    assert!(in_upper_tangent_cone(&o, &a, &vector(&[1.0]), &eps, &s, &c).unwrap().holds());
    assert_eq!(in_lower_tangent_cone(&o, &a, &vector(&[1.0]), &eps, &s, &c).unwrap().status, Status::Fails);
    assert!(in_lower_tangent_cone(&o, &a, &vector(&[0.0]), &eps, &s, &c).unwrap().holds());
}

#[test]
fn parabola_cone_conditions() {
    let o = parabola();
    let a = vector(&[0.0, 0.0]);
    let c = cfg();
    let s = c.schedule;
    let good = cone_condition_check(&o, &a, &Plane::coordinate(2, &[0]).unwrap(), &c.eps_grid, &s, &c).unwrap();
    assert!(good.outside_cone.holds() && good.vertical.holds(), "{:?} {:?}", good.outside_cone.status, good.vertical.status);
    let bad = cone_condition_check(&o, &a, &Plane::coordinate(2, &[1]).unwrap(), &c.eps_grid, &s, &c).unwrap();
    assert_eq!(bad.outside_cone.status, Status::Fails);
    assert_eq!(bad.vertical.status, Status::Fails);
}

#[test]
fn transfer_on_power_function() {
    let dom = MeasureOracle::segments(vec![Segment::new(vector(&[-1.0]), vector(&[1.0]))]).unwrap();
    let c = cfg();
    let s = c.schedule;
    let a = vector(&[0.0]);
    // |x|^1.5 > r: |x| > r^(2/3) is outside B(0, r) once r < 1, hypothesis ratio 0
    let v = density_transfer_check(&dom, |x: &Vector| x[0].abs().powf(1.5), &a, 1.0, 1.0, 0.5, &s, &c).unwrap();
    assert!(v.holds(), "{:?}", v.values);
    let zero = density_transfer_check(&dom, |_: &Vector| 0.0, &a, 1.0, 1.0, 0.1, &s, &c).unwrap();
    assert!(zero.holds());
    // constant 1 violates any hypothesis below density 1
    let pre = density_transfer_check(&dom, |_: &Vector| 1.0, &a, 1.0, 1e-3, 0.5, &s, &c).unwrap();
    assert_eq!(pre.status, Status::PreconditionFailed);
}

#[test]
fn bump_reference_integral() {
    // 1-D, d = 0: 2 int_0^rho (1 - s/rho)^2 ds = 2 rho / 3
    assert!((bump_integral_on_plane(1, 0.0, 0.75) - 0.5).abs() < 1e-9);
    // 2-D, d = 0: 2 pi rho^2 / 12
    let want = 2.0 * std::f64::consts::PI * 0.75f64.powi(2) / 12.0;
    assert!((bump_integral_on_plane(2, 0.0, 0.75) - want).abs() < 1e-9);
    assert_eq!(bump_integral_on_plane(1, 0.8, 0.75), 0.0);
}

#[test]
fn blow_up_of_line_and_parabola() {
    let c = cfg();
    let b = blow_up_tangent(&x_axis(), &vector(&[0.0, 0.0]), &c.schedule, &c).unwrap().expect("line has a blow-up");
    assert!((b.theta - 1.0).abs() < 0.05);
    assert!(b.plane.same_as(&Plane::coordinate(2, &[0]).unwrap(), 0.03));
    let p = blow_up_tangent(&parabola(), &vector(&[0.0, 0.0]), &c.schedule, &c).unwrap().expect("parabola has a blow-up");
    assert!((p.theta - 1.0).abs() < 0.05);
}

#[test]
fn trace_json_and_csv() {
    let c = cfg();
    let t = upper_density(&x_axis(), &vector(&[0.0, 0.0]), &c.schedule, &c);
    let js = serde_json::to_value(&t).unwrap();
    assert_eq!(js["schedule"]["J"], 24);
    assert_eq!(js["entries"][0].as_array().unwrap().len(), 3);
    assert!(t.to_csv().starts_with("r,ratio,err\n"));
    let back: DensityTrace = serde_json::from_value(js).unwrap();
    assert_eq!(back.entries.len(), t.entries.len());
}

#[test]
fn schedule_validation() {
    assert!(ScaleSchedule::new(0.5, 0.5, 7).is_err());
    assert!(ScaleSchedule::new(0.5, 1.0, 10).is_err());
    let s = ScaleSchedule::new(0.5, 0.5, 8).unwrap();
    assert!(s.radii().windows(2).all(|w| w[1] < w[0]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // cones are cones: scaling v does not change membership
    #[test]
    fn cone_verdict_scale_invariant(angle in 0.0f64..std::f64::consts::PI) {
        let o = parabola();
        let a = vector(&[0.0, 0.0]);
        let c = cfg();
        let v = vector(&[0.6 * angle.cos(), 0.6 * angle.sin()]);
        let s1 = in_upper_tangent_cone(&o, &a, &v, &c.eps_grid, &c.schedule, &c).unwrap().status;
        let s2 = in_upper_tangent_cone(&o, &a, &(&v * 2.0), &c.eps_grid, &c.schedule, &c).unwrap().status;
        prop_assert_eq!(s1, s2);
    }

    // lower cone inside upper cone
    #[test]
    fn lower_implies_upper(angle in 0.0f64..std::f64::consts::TAU) {
        let o = x_axis();
        let a = vector(&[0.0, 0.0]);
        let c = cfg();
        let v = vector(&[angle.cos(), angle.sin()]);
        let lo = in_lower_tangent_cone(&o, &a, &v, &c.eps_grid, &c.schedule, &c).unwrap().status;
        let up = in_upper_tangent_cone(&o, &a, &v, &c.eps_grid, &c.schedule, &c).unwrap().status;
        prop_assert!(lo != Status::Holds || up == Status::Holds);
    }

    // restriction never increases the density
    #[test]
    fn restriction_monotone(dx in -0.5f64..0.5, dy in -0.5f64..0.5, eps in 0.05f64..0.5) {
        let o = parabola();
        let a = vector(&[0.0, 0.0]);
        let c = cfg();
        let r = o.restrict(Region::cone(a.clone(), vector(&[dx, dy]), eps));
        let full = upper_density(&o, &a, &c.schedule, &c);
        let part = upper_density(&r, &a, &c.schedule, &c);
        for (f, p) in full.entries.iter().zip(&part.entries) {
            prop_assert!(p.1 <= f.1 + f.2 + p.2 + 1e-12);
        }
    }
}
