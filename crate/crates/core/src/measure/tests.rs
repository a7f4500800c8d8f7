use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use proptest::prelude::*;

use super::*;
use crate::geometry::vector;

fn segment_chart(res: usize) -> ChartSpec {
    ChartSpec {
        name: "segment".into(),
        lo: vec![0.0],
        hi: vec![1.0],
        map: Arc::new(|u: &[f64]| (vector(&[u[0], 0.0]), DMatrix::from_column_slice(2, 1, &[1.0, 0.0]))),
        lipschitz: 1.0,
        resolution: res,
    }
}

fn circle_chart() -> ChartSpec {
    ChartSpec {
        name: "circle".into(),
        lo: vec![0.0],
        hi: vec![2.0 * PI],
        map: Arc::new(|u: &[f64]| {
            let (s, c) = u[0].sin_cos();
            (vector(&[c, s]), DMatrix::from_column_slice(2, 1, &[-s, c]))
        }),
        lipschitz: 1.0,
        resolution: 256,
    }
}

fn sphere_chart() -> ChartSpec {
    ChartSpec {
        name: "sphere".into(),
        lo: vec![0.0, 0.0],
        hi: vec![PI, 2.0 * PI],
        map: Arc::new(|u: &[f64]| {
            let (st, ct) = u[0].sin_cos();
            let (sp, cp) = u[1].sin_cos();
            let p = vector(&[st * cp, st * sp, ct]);
            let j = DMatrix::from_column_slice(3, 2, &[ct * cp, ct * sp, -st, -st * sp, st * cp, 0.0]);
            (p, j)
        }),
        lipschitz: 1.0,
        resolution: 48,
    }
}

#[test]
fn segment_chart_half_ball() {
    let o = MeasureOracle::charts(vec![segment_chart(256)], 1).unwrap();
    let m = o.mass(&Region::ball(vector(&[0.0, 0.0]), 0.5));
    assert!((m.value - 0.5).abs() <= 2.0 / 256.0);
}

#[test]
fn circle_and_sphere_areas() {
    let c = MeasureOracle::charts(vec![circle_chart()], 1).unwrap();
    let m = c.total_mass();
    assert!((m.value - 2.0 * PI).abs() < 1e-3);
    assert!((m.value - 2.0 * PI).abs() <= 3.0 * m.error.max(1e-12) || (m.value - 2.0 * PI).abs() < 1e-6);
    let s = MeasureOracle::charts(vec![sphere_chart()], 2).unwrap();
    let m = s.total_mass();
    assert!((m.value - 4.0 * PI).abs() < 1e-2, "{m:?}");
}

#[test]
fn circle_arc_in_small_ball() {
    // chord geometry: the arc of the unit circle inside B((1,0), r) has
    // length 2 * 2 asin(r / 2)
    let c = MeasureOracle::charts(vec![circle_chart()], 1).unwrap();
    for r in [0.3, 1e-2, 1e-4] {
        let m = c.mass(&Region::closed_ball(vector(&[1.0, 0.0]), r));
        let want = 4.0 * (r / 2.0).asin();
        assert!((m.value - want).abs() < 2e-2 * want, "r={r} {m:?} vs {want}");
    }
}

#[test]
fn cloud_basics() {
    let one = WeightedCloud::new(vec![vector(&[0.1, 0.2])], vec![1.0]).unwrap();
    let o = MeasureOracle::cloud(one, 1).unwrap();
    assert_eq!(o.mass(&Region::ball(vector(&[0.0, 0.0]), 1.0)).value, 1.0);
    assert_eq!(o.mass(&Region::ball(vector(&[5.0, 0.0]), 1.0)), Mass::exact(0.0));

    let n = 10_000;
    let pts: Vec<Vector> = (0..n).map(|i| vector(&[(i as f64 + 0.5) / n as f64, 0.0])).collect();
    let o = MeasureOracle::cloud(WeightedCloud::new(pts, vec![1.0 / n as f64; n]).unwrap(), 1).unwrap();
    let m = o.mass(&Region::ball(vector(&[0.5, 0.0]), 0.25));
    assert!((m.value - 0.5).abs() < 0.01);
    assert!(m.error <= 1.0 / n as f64 + 1e-15);
}

#[test]
fn restriction_semantics() {
    let o = MeasureOracle::segments(vec![Segment::new(vector(&[-1.0, 0.0]), vector(&[1.0, 0.0]))]).unwrap();
    let ball = |r: f64| Region::ball(vector(&[0.0, 0.0]), r);
    let full = o.restrict(Region::Everything);
    assert_eq!(full.mass(&ball(0.3)).value, o.mass(&ball(0.3)).value);
    let right = o.restrict(Region::HalfSpace { normal: vector(&[1.0, 0.0]), offset: 0.0 });
    for r in [0.1, 0.2] {
        assert!((right.mass(&ball(r)).value - 0.5 * o.mass(&ball(r)).value).abs() < 1e-15);
    }
}

#[test]
fn segments_against_chart() {
    let seg = MeasureOracle::segments(vec![Segment::new(vector(&[0.0, 0.0]), vector(&[1.0, 0.0]))]).unwrap();
    let ch = MeasureOracle::charts(vec![segment_chart(512)], 1).unwrap();
    let p = crate::geometry::Plane::coordinate(2, &[0]).unwrap();
    let r = Region::cylinder(&p, vector(&[0.3, 0.0]), 0.2, 1.0).and(Region::ball(vector(&[0.25, 0.0]), 0.4));
    let a = seg.mass(&r);
    let b = ch.mass(&r);
    assert!((a.value - 0.4).abs() < 1e-12, "{a:?}");
    assert!((a.value - b.value).abs() <= 3.0 * b.error + 2.0 / 512.0);
}

#[test]
fn pushforward_preserves_total_mass() {
    use crate::geometry::{HomogeneousForm, Plane, ShearMap};
    let o = MeasureOracle::charts(vec![circle_chart()], 1).unwrap();
    let f = HomogeneousForm::from_terms(2, 1, 1, &[(vec![0, 0], vec![0.7])]).unwrap();
    let map = ShearMap::subtract(Plane::coordinate(2, &[1]).unwrap(), vector(&[1.0, 0.0]), f).unwrap();
    let pushed = o.pushforward(&map);
    let ball = Region::closed_ball(vector(&[1.0, 0.0]), 0.1);
    let direct = o.mass(&ball);
    let back = pushed.mass(&Region::preimage(&map.inverse(), ball));
    assert!((direct.value - back.value).abs() <= 3.0 * (direct.error + back.error), "{direct:?} {back:?}");
}

fn random_region() -> impl Strategy<Value = Region> {
    (-1.2..1.2f64, -1.2..1.2f64, 0.05..0.8f64, 0usize..3).prop_map(|(x, y, r, kind)| match kind {
        0 => Region::ball(vector(&[x, y]), r),
        1 => Region::cone(vector(&[x, y]), vector(&[1.0, 0.5]), r.min(0.9)).and(Region::ball(vector(&[x, y]), 2.0 * r)),
        _ => Region::cylinder(&crate::geometry::Plane::coordinate(2, &[0]).unwrap(), vector(&[x, y]), r, 0.5 * r),
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn monotone_and_additive(a in random_region(), b in random_region()) {
        let o = MeasureOracle::charts(vec![circle_chart()], 1).unwrap();
        let ab = a.clone().and(b.clone());
        let ma = o.mass(&a);
        let mab = o.mass(&ab);
        prop_assert!(mab.value <= ma.value + ma.error + mab.error + 1e-12);
        // additivity: a = (a and b) + (a and not b)
        let rest = o.mass(&a.clone().and(b.clone().not()));
        let gap = (mab.value + rest.value - ma.value).abs();
        prop_assert!(gap <= ma.error + mab.error + rest.error + 1e-9, "gap {}", gap);
    }

    #[test]
    fn double_restriction(a in random_region(), b in random_region(), c in random_region()) {
        let o = MeasureOracle::segments(vec![
            Segment::new(vector(&[-1.0, 0.0]), vector(&[1.0, 0.0])),
            Segment::new(vector(&[0.0, -1.0]), vector(&[0.3, 1.0])),
        ]).unwrap();
        let twice = o.restrict(a.clone()).restrict(b.clone()).mass(&c).value;
        let once = o.restrict(a.and(b)).mass(&c).value;
        prop_assert!((twice - once).abs() < 1e-12);
    }
}

#[test]
fn cloud_and_chart_agree_on_random_balls() {
    use rand::{Rng, SeedableRng};
    let chart = MeasureOracle::charts(vec![circle_chart()], 1).unwrap();
    let n = 200_000;
    let pts: Vec<Vector> = (0..n)
        .map(|i| {
            let t = 2.0 * PI * (i as f64 + 0.5) / n as f64;
            vector(&[t.cos(), t.sin()])
        })
        .collect();
    let cloud = MeasureOracle::cloud(WeightedCloud::new(pts, vec![2.0 * PI / n as f64; n]).unwrap(), 1).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let c = vector(&[rng.random_range(-1.2..1.2), rng.random_range(-1.2..1.2)]);
        let r = rng.random_range(0.05..0.8);
        let ball = Region::ball(c, r);
        let a = chart.mass(&ball);
        let b = cloud.mass(&ball);
        assert!((a.value - b.value).abs() <= 3.0 * (a.error + 2.0 * b.error) + 1e-9, "{a:?} {b:?}");
    }
}

#[test]
fn distances() {
    let line = MeasureOracle::segments(vec![Segment::new(vector(&[-1.0, 0.0]), vector(&[1.0, 0.0]))]).unwrap();
    assert!((line.distance(&vector(&[0.0, 1.0]), 2.0).value.unwrap() - 1.0).abs() < 1e-15);
    let circle = MeasureOracle::charts(vec![circle_chart()], 1).unwrap();
    assert!((circle.distance(&vector(&[0.0, 0.0]), 2.0).value.unwrap() - 1.0).abs() < 1e-12);
    assert!((circle.distance(&vector(&[0.3, 0.9]), 1.0).value.unwrap() - (1.0 - 0.9f64.hypot(0.3))).abs() < 1e-10);
    assert!(circle.distance(&vector(&[0.0, 0.0]), 0.5).value.is_none());
}

#[test]
fn hurwitz_sums() {
    assert!((hurwitz(2.0, 1) - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-12);
    assert!((hurwitz(1.5, 1) - 2.612_375_348_685_488).abs() < 1e-12);
    let direct: f64 = (100..2_000_000u64).map(|k| (k as f64).powf(-1.5)).sum::<f64>() + hurwitz(1.5, 2_000_000);
    assert!((hurwitz(1.5, 100) - direct).abs() < 1e-12);
}

#[test]
fn hair_family_masses() {
    let h = HairFamily::new(0.75, 1.5, 1.0, true).unwrap();
    let o = MeasureOracle::hairs(h.clone());
    let total = o.total_mass();
    assert!((total.value - 2.0 * 2.612_375_348_685_488).abs() < 1e-9 + total.error, "{total:?}");
    // a ball around the origin holds every hair with x_n < r in full
    for r in [1e-2, 1e-4, 1e-6] {
        let m = o.mass(&Region::closed_ball(vector(&[0.0, 0.0]), r));
        let first = (r.powf(-1.0 / 0.75)).ceil() as u64;
        let want = 2.0 * h.tail_mass(first);
        assert!(m.error < 1e-12 * want.max(1.0), "{m:?}");
        assert!((m.value - want).abs() < 1e-8 * want, "{} {want}", m.value);
    }
    // explicit comparison against a brute-force segment set on a window
    let segs: Vec<Segment> = (1..=30_000u64)
        .flat_map(|n| {
            let x = (n as f64).powf(-0.75);
            let t = (n as f64).powf(-1.5);
            [Segment::new(vector(&[x, 0.0]), vector(&[x, t])), Segment::new(vector(&[-x, 0.0]), vector(&[-x, t]))]
        })
        .collect();
    let brute = MeasureOracle::segments(segs).unwrap();
    for (c, r) in [([0.05, 0.001], 0.01), ([0.001, 0.0], 0.0005), ([-0.001, 1e-6], 0.0004)] {
        let region = Region::ball(vector(&c), r);
        let a = o.mass(&region);
        let b = brute.mass(&region);
        assert!((a.value - b.value).abs() <= a.error + 1e-9 * b.value, "{a:?} {b:?}");
        assert!(a.error <= 0.05 * b.value, "{a:?} {b:?}");
    }
}
