use std::collections::BTreeMap;

use gmtjet_core::density::density_ratio;
use gmtjet_core::fixtures::{catalog, make_fixture};
use gmtjet_core::geometry::vector;
use gmtjet_core::report::analyze;
use gmtjet_core::{Config, Status};
use proptest::prelude::*;

fn no_params() -> BTreeMap<String, f64> {
    BTreeMap::new()
}

#[test]
fn catalog_builds_with_consistent_truth() {
    for e in catalog() {
        let f = make_fixture(e.name, &no_params()).unwrap();
        assert_eq!(f.truth.fixture, e.name);
        assert_eq!(f.oracle.ambient_dim(), f.truth.n, "{}", e.name);
        assert_eq!(f.oracle.dim(), f.truth.m, "{}", e.name);
        assert!(!f.truth.points.is_empty(), "{}", e.name);
        for p in &f.truth.points {
            assert_eq!(p.vector().len(), f.truth.n, "{}/{}", e.name, p.label);
        }
        if let Some(want) = f.truth.total_mass {
            let got = f.oracle.total_mass();
            assert!((got.value - want).abs() <= got.error + 1e-6 * want, "{}: {} vs {want}", e.name, got.value);
        }
    }
}

#[test]
fn report_keys_match_schema() {
    let schema: serde_json::Value = serde_json::from_str(include_str!("../../../docs/report.schema.json")).unwrap();
    let f = make_fixture("circle", &no_params()).unwrap();
    let cfg = Config::default();
    let a = f.truth.points[0].vector();
    let r = analyze(&f.oracle, "fixture:circle", &a, 2, 0.0, &cfg.schedule, &cfg).unwrap();
    assert_eq!(r.status(), Status::Holds);
    let json = serde_json::to_value(&r).unwrap();
    for key in schema["required"].as_array().unwrap() {
        assert!(json.get(key.as_str().unwrap()).is_some(), "{key} missing from report");
    }
    for key in json.as_object().unwrap().keys() {
        assert!(schema["properties"].get(key).is_some(), "{key} not in schema");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // a straight segment has density ratio exactly 1 inside, 0 off it
    #[test]
    fn segment_ratios(x in -0.5f64..0.5, r in 1e-6f64..0.4, h in 0.0f64..1.0) {
        let f = make_fixture("line", &no_params()).unwrap();
        let (on, err) = density_ratio(&f.oracle, &vector(&[x, 0.0]), r);
        prop_assert!((on - 1.0).abs() <= 1e-9 + err);
        let lift = r * (1.0 + h) + 1e-9;
        let (off, _) = density_ratio(&f.oracle, &vector(&[x, lift]), r);
        prop_assert_eq!(off, 0.0);
    }

    // analytic circle: the arc inside B(a, r) has length 4 asin(r/2)
    #[test]
    fn circle_ratios(t in 0.0f64..std::f64::consts::TAU, r in 1e-4f64..1.0) {
        let f = make_fixture("circle", &no_params()).unwrap();
        let (ratio, err) = density_ratio(&f.oracle, &vector(&[t.cos(), t.sin()]), r);
        let want = 4.0 * (r / 2.0).asin() / (2.0 * r);
        prop_assert!((ratio - want).abs() <= err + 1e-6, "{} vs {}", ratio, want);
    }
}
