use super::*;

#[test]
fn suite_names() {
    assert_eq!(Suite::parse_list("all").unwrap().len(), Suite::ALL.len());
    assert_eq!(Suite::parse_list("cones,sff").unwrap(), vec![Suite::Cones, Suite::Sff]);
    let err = "nope".parse::<Suite>().unwrap_err().to_string();
    assert!(err.contains("equivalence"), "{err}");
    for s in Suite::ALL {
        assert_eq!(s.name().parse::<Suite>().unwrap(), s);
    }
}

#[test]
fn check_builders() {
    let c = Check::bound("b", 0.5, 1.0).with("nan", f64::NAN);
    assert!(c.passed);
    assert_eq!(c.values.len(), 2);
    assert_eq!(c.notes, vec!["nan = NaN".to_string()]);
    assert!(!Check::status("s", Status::Holds, Status::Inconclusive).passed);
}

#[test]
fn touching_suite_is_deterministic() {
    let cfg = Config::default();
    let a = run(&[Suite::Touching], DEFAULT_SEED, &cfg);
    let b = run(&[Suite::Touching], DEFAULT_SEED, &cfg);
    assert!(a.passed, "{}", a.to_json());
    assert_eq!(a.to_json(), b.to_json());
    let back: VerifyResults = serde_json::from_str(&a.to_json()).unwrap();
    assert_eq!(back, a);
}
