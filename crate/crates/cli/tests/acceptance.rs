//! Acceptance criteria 1-10, one pass/fail line each. Runs as a plain binary
//! so the lines are always printed; exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::{Duration, Instant};

use gmtjet_core::density::{blow_up_tangent, density_ratio, in_lower_tangent_cone, in_upper_tangent_cone, lower_density};
use gmtjet_core::fixtures::{catalog, classify_key, make_fixture, Fixture};
use gmtjet_core::geometry::vector;
use gmtjet_core::jet::{estimate_tangent_plane, iterated_jet_fit, jet_gap, jet_uniqueness_crosscheck};
use gmtjet_core::pointwise::{carve_full_density_subset, touching_ball_check, SecondOrder, SecondOrderKind};
use gmtjet_core::sff::normal_field_identity_check;
use gmtjet_core::verify::{run_suite, Suite, DEFAULT_SEED};
use gmtjet_core::{Config, Limit, Plane, ScaleSchedule, Status};

type Outcome = Result<String, String>;

fn fixture(name: &str, params: &[(&str, f64)]) -> Fixture {
    let p: BTreeMap<String, f64> = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    make_fixture(name, &p).expect("fixture")
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(t: Instant, budget: Duration) -> Result<(), String> {
    ensure(t.elapsed() < budget, format!("took {:.1?}, budget {budget:?}", t.elapsed()))
}

fn dyadic_densities(cfg: &Config) -> Outcome {
    let t = Instant::now();
    let f = fixture("dyadic_annuli", &[]);
    let a = vector(&[0.0]);
    let mut worst: f64 = 0.0;
    for i in 2..=8 {
        worst = worst.max((density_ratio(&f.oracle, &a, 0.5f64.powi(2 * i + 1)).0 - 1.0 / 3.0).abs());
        worst = worst.max((density_ratio(&f.oracle, &a, 0.5f64.powi(2 * i)).0 - 2.0 / 3.0).abs());
    }
    ensure(worst <= 1e-9, format!("ratio error {worst:e}"))?;
    let s = ScaleSchedule::dyadic(0.5, 24);
    for v in [1.0, -1.0] {
        let v = vector(&[v]);
        let lo = in_lower_tangent_cone(&f.oracle, &a, &v, &cfg.eps_grid, &s, cfg).map_err(|e| e.to_string())?.status;
        let up = in_upper_tangent_cone(&f.oracle, &a, &v, &cfg.eps_grid, &s, cfg).map_err(|e| e.to_string())?.status;
        ensure(lo == Status::Fails && up == Status::Holds, format!("v = {}: lower {lo}, upper {up}", v[0]))?;
    }
    within(t, Duration::from_secs(5))?;
    Ok(format!("max ratio error {worst:.1e}, +-1 in the upper cone only, {:.2?}", t.elapsed()))
}

fn infinite_density(cfg: &Config) -> Outcome {
    let t = Instant::now();
    let f = fixture("a_alpha_gamma", &[("gamma", 2.0), ("alpha", 0.75)]);
    let a = vector(&[0.0, 0.0]);
    let s = ScaleSchedule::dyadic(0.5, 24);
    let tr = lower_density(&f.oracle, &a, &s, cfg);
    let tail = &tr.entries[tr.entries.len() - 10..];
    ensure(tail.windows(2).all(|w| w[1].1 > w[0].1), "lower density not strictly increasing over the last 10 scales")?;
    let last = tail[9].1;
    ensure(last > 10.0, format!("last ratio {last}"))?;
    let est = estimate_tangent_plane(&f.oracle, &a, &s, cfg).map_err(|e| e.to_string())?;
    let (_, plane) = est.result().ok_or_else(|| format!("no tangent plane: {:?}", est.verdict.notes))?;
    let angle = plane.max_angle(&Plane::coordinate(2, &[0]).map_err(|e| e.to_string())?);
    ensure(angle <= 1e-2, format!("tangent angle {angle}"))?;
    let b = blow_up_tangent(&f.oracle, &a, &s, cfg).map_err(|e| e.to_string())?;
    ensure(b.is_none(), "blow-up returned a plane")?;
    within(t, Duration::from_secs(30))?;
    Ok(format!("ratio {:.2} -> {last:.2}, tangent angle {angle:.1e}, no blow-up, {:.2?}", tail[0].1, t.elapsed()))
}

fn jet_recovery(cfg: &Config) -> Outcome {
    let t = Instant::now();
    let a = vector(&[0.0, 0.0]);
    let mut worst: (f64, f64) = (0.0, 0.0);
    for (c2, c3) in [(1.0, 0.0), (0.5, 2.0), (0.0, 1.0)] {
        let f = fixture("graph_poly", &[("c2", c2), ("c3", c3)]);
        let fit = iterated_jet_fit(&f.oracle, &a, 3, 0.0, &cfg.schedule, cfg).map_err(|e| e.to_string())?;
        ensure(fit.verdict.holds(), format!("({c2}, {c3}): fit {}", fit.verdict.status))?;
        let truth = f.truth.points[0].analytic_jet().expect("analytic jet");
        let gap = jet_gap(fit.jet.as_ref().expect("jet"), &truth).map_err(|e| e.to_string())?;
        let u = jet_uniqueness_crosscheck(&f.oracle, &a, 3, &cfg.schedule, cfg).map_err(|e| e.to_string())?;
        ensure(gap <= 1e-2 && u.gap <= 1e-2, format!("({c2}, {c3}): coefficient gap {gap:e}, uniqueness gap {:e}", u.gap))?;
        worst = (worst.0.max(gap), worst.1.max(u.gap));
    }
    within(t, Duration::from_secs(60))?;
    Ok(format!("coefficient gap {:.1e}, uniqueness gap {:.1e}, {:.2?}", worst.0, worst.1, t.elapsed()))
}

fn classification(cfg: &Config) -> Outcome {
    let t = Instant::now();
    let mut count = 0;
    for e in catalog() {
        let f = fixture(e.name, &[]);
        if !(f.truth.smooth || e.name == "comb") {
            continue;
        }
        for p in &f.truth.points {
            let orders: &[(usize, f64)] = if f.truth.smooth { &[(2, 0.0), (3, 0.0)] } else { &[(1, 0.0)] };
            for &(k, alpha) in orders {
                let want = p.expected.get(&classify_key(k, alpha)).copied().ok_or_else(|| format!("{}/{}: no expectation", e.name, p.label))?;
                if f.truth.smooth {
                    ensure(want == Status::Holds, format!("{}: ground truth expects {want}", e.name))?;
                } else {
                    ensure(want == Status::Fails, "comb ground truth must fail")?;
                }
                let got = iterated_jet_fit(&f.oracle, &p.vector(), k, alpha, &cfg.schedule, cfg).map_err(|e| e.to_string())?.verdict.status;
                ensure(got == want, format!("{}/{} order ({k}, {alpha}): {got}, expected {want}", e.name, p.label))?;
                count += 1;
            }
        }
    }
    Ok(format!("{count} verdicts match the ground truth, {:.2?}", t.elapsed()))
}

fn cone_equivalence(cfg: &Config) -> Outcome {
    let r = run_suite(Suite::Equivalence, DEFAULT_SEED, cfg);
    let bad: Vec<&str> = r.failures().map(|c| c.name.as_str()).collect();
    ensure(r.checks.len() >= 20, format!("only {} cases", r.checks.len()))?;
    ensure(bad.is_empty(), format!("disagreements: {bad:?}"))?;
    Ok(format!("{} fixture/plane cases, no disagreements", r.checks.len()))
}

fn touching_ball(cfg: &Config) -> Outcome {
    let f = fixture("parabola_touch", &[]);
    let p = &f.truth.points[0];
    let jet = p.analytic_jet().expect("analytic jet");
    let second = SecondOrder { kind: SecondOrderKind::Smooth, plane: jet.plane().clone(), form: jet.full_differential(2).map_err(|e| e.to_string())? };
    let up = vector(&[0.0, 1.0]);
    let check = |r: f64| touching_ball_check(&f.oracle, &p.vector(), &up, r, &second, cfg).map_err(|e| e.to_string());
    let eq = check(1.0)?;
    let slack = eq.values["slack"];
    ensure(eq.holds() && slack.abs() <= 1e-6, format!("r = 1: {} slack {slack:e}", eq.status))?;
    let inner = check(0.9)?;
    let inner_slack = inner.values["slack"];
    ensure(inner.holds() && inner_slack > 0.0, format!("r = 0.9: {} slack {inner_slack}", inner.status))?;
    let big = check(1.1)?;
    ensure(big.status == Status::PreconditionFailed, format!("r = 1.1: {}", big.status))?;
    Ok(format!("r = 1 |slack| {:.1e}, r = 0.9 slack {inner_slack:.4}, r = 1.1 ball meets the set", slack.abs()))
}

fn normal_identity(cfg: &Config) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for name in ["circle", "sphere", "parabola_touch"] {
        let f = fixture(name, &[]);
        for (i, field) in &f.normal_fields {
            let p = &f.truth.points[*i];
            let fit = iterated_jet_fit(&f.oracle, &p.vector(), 2, 0.0, &cfg.schedule, cfg).map_err(|e| e.to_string())?;
            let jet = fit.jet.ok_or_else(|| format!("{name}/{}: no jet", p.label))?;
            let (v, _) = normal_field_identity_check(field, &jet, cfg).map_err(|e| e.to_string())?;
            let gap = v.values["max_relative_gap"];
            ensure(gap <= 1e-2, format!("{name}/{}: gap {gap:e}", p.label))?;
            worst = worst.max(gap);
            n += 1;
        }
    }
    Ok(format!("{n} points, max relative gap {worst:.1e}"))
}

fn carving(cfg: &Config) -> Outcome {
    let f = fixture("noisy_parabola", &[("k", 2.0)]);
    let a = f.truth.points[0].vector();
    let fit = iterated_jet_fit(&f.oracle, &a, 2, 0.0, &cfg.schedule, cfg).map_err(|e| e.to_string())?;
    let jet = fit.jet.ok_or("no approximate jet")?;
    let c = carve_full_density_subset(&f.oracle, &jet, &cfg.schedule, cfg).map_err(|e| e.to_string())?;
    ensure(c.removed.verdict == Limit::LimitZero, format!("removed mass limit {}", c.removed.verdict.name()))?;
    ensure(c.pt.verdict.holds(), format!("carved set pointwise test {}", c.pt.verdict.status))?;
    let plane = c.pt.plane.as_ref().ok_or("no pointwise plane")?;
    let angle = plane.max_angle(jet.plane());
    ensure(angle <= cfg.plane_angle_tol, format!("plane angle {angle}"))?;
    ensure(c.jet_gap <= 1e-2, format!("jet gap {}", c.jet_gap))?;
    Ok(format!("removed mass limit_zero, plane angle {angle:.1e}, jet gap {:.1e}", c.jet_gap))
}

fn density_transfer(cfg: &Config) -> Outcome {
    let r = run_suite(Suite::Transfer, DEFAULT_SEED, cfg);
    let trials = r.checks.iter().filter(|c| c.name.starts_with("trial")).count();
    ensure(trials == 50, format!("{trials} trials"))?;
    let violations = r.checks.iter().filter(|c| c.name.starts_with("trial") && !c.passed).count();
    ensure(violations == 0 && r.passed, format!("{violations} violations"))?;
    Ok(format!("{trials} trials, 0 violations"))
}

fn determinism(_: &Config) -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("results{i}.json"));
        let t = Instant::now();
        let status = Command::new(env!("CARGO_BIN_EXE_gmtjet"))
            .args(["verify", "--suite", "all", "--seed", &DEFAULT_SEED.to_string(), "--out"])
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        let secs = t.elapsed().as_secs_f64();
        ensure(status.status.success(), format!("run {i} exited with {:?}: {}", status.status.code(), String::from_utf8_lossy(&status.stdout)))?;
        outputs.push((std::fs::read(&out).map_err(|e| e.to_string())?, secs));
    }
    ensure(outputs[0].0 == outputs[1].0, "results.json differs between runs")?;
    let total = outputs[0].1 + outputs[1].1;
    ensure(total <= 600.0, format!("two runs took {total:.0} s"))?;
    Ok(format!("{} identical bytes, runs took {:.0} s and {:.0} s", outputs[0].0.len(), outputs[0].1, outputs[1].1))
}

fn main() {
    // `cargo test -- <filter>` style arguments are accepted and ignored
    let cfg = Config::default();
    let criteria: [(&str, fn(&Config) -> Outcome); 10] = [
        ("dyadic-set densities and cones", dyadic_densities),
        ("infinite lower density with a tangent plane", infinite_density),
        ("jet recovery on graphs", jet_recovery),
        ("classification of smooth sets and the comb", classification),
        ("cone-condition equivalence", cone_equivalence),
        ("touching balls", touching_ball),
        ("normal-field identity", normal_identity),
        ("carving a pointwise differentiable subset", carving),
        ("density transfer", density_transfer),
        ("determinism of verify --suite all", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f(&cfg) {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
