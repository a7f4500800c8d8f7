//! Deterministic example sets with measure oracles and analytic ground truth.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{vector, HomogeneousForm, Jet, JetJson, Plane, Vector};
use crate::measure::{ChartMap, ChartSpec, HairFamily, MeasureOracle, Segment, WeightedCloud};
use crate::pointwise::direction_net;
use crate::sff::{approximate_sff, NormalField};
use crate::verdict::Status;

/// Name, parameter defaults and a one-line description.
#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub params: Vec<(&'static str, f64)>,
    pub description: &'static str,
}

pub fn catalog() -> Vec<CatalogEntry> {
    let e = |name, params: &[(&'static str, f64)], description| CatalogEntry { name, params: params.to_vec(), description };
    vec![
        e("line", &[], "segment [-1, 1] x {0} in the plane"),
        e("graph_poly", &[("c2", 1.0), ("c3", 0.0), ("c4", 0.0)], "graph of c2 x^2/2 + c3 x^3/6 + c4 x^4/24 over [-1, 1]"),
        e("circle", &[("R", 1.0)], "circle of radius R"),
        e("sphere", &[("R", 1.0)], "sphere of radius R in R^3"),
        e("torus", &[("R", 2.0), ("r", 0.5)], "torus of revolution, 0 < r < R"),
        e("dyadic_annuli", &[], "union of 2^(-2i-1) < |t| < 2^(-2i) in R"),
        e("a_alpha_gamma", &[("gamma", 2.0), ("alpha", 0.75)], "segment plus hairs of height n^(-alpha gamma) at +-n^(-alpha)"),
        e("comb", &[("teeth", 20000.0)], "teeth {1/n} x [0, 1] for n <= teeth, plus {0} x [0, 1]"),
        e("parabola_touch", &[], "parabola y = x^2/2 with touching-ball scenarios"),
        e("noisy_parabola", &[("k", 2.0), ("seed", 7.0)], "parabola plus isolated atoms of relative mass r^(k+1) per shell"),
        e("twisted_cubic", &[], "curve (t, t^2, t^3) in R^3"),
        e("crossing_lines", &[], "the two coordinate axes in the plane"),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeTruth {
    pub direction: Vec<f64>,
    pub upper: bool,
    pub lower: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TouchingCase {
    pub nu: Vec<f64>,
    pub r: f64,
    pub expected: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkedPoint {
    pub label: String,
    pub point: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tangent: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jet: Option<JetJson>,
    /// sff(t_i, t_j) on the tangent basis, as ambient vectors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sff: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cones: Vec<ConeTruth>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub touching: Vec<TouchingCase>,
    /// Expected status per test name.
    pub expected: BTreeMap<String, Status>,
}

impl MarkedPoint {
    pub fn vector(&self) -> Vector {
        Vector::from_column_slice(&self.point)
    }

    pub fn analytic_jet(&self) -> Option<Jet> {
        self.jet.as_ref().and_then(|j| Jet::from_json(j).ok())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub fixture: String,
    pub params: BTreeMap<String, f64>,
    pub m: usize,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_mass: Option<f64>,
    pub smooth: bool,
    pub points: Vec<MarkedPoint>,
}

#[derive(Clone)]
pub struct Fixture {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub oracle: MeasureOracle,
    pub truth: GroundTruth,
    /// Unit normal fields keyed by marked point index.
    pub normal_fields: BTreeMap<usize, NormalField>,
}

impl std::fmt::Debug for Fixture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fixture").field("name", &self.name).field("params", &self.params).field("oracle", &self.oracle).finish()
    }
}

/// The expected-results table of a fixture.
pub fn ground_truth_report(fixture: &Fixture) -> GroundTruth {
    fixture.truth.clone()
}

pub const CLASSIFY_ORDERS: [(usize, f64); 3] = [(1, 0.0), (2, 0.0), (3, 0.0)];

pub fn classify_key(k: usize, alpha: f64) -> String {
    format!("classify_{k}_{alpha}")
}

fn param(params: &BTreeMap<String, f64>, entry: &CatalogEntry, key: &str) -> f64 {
    params.get(key).copied().unwrap_or_else(|| entry.params.iter().find(|p| p.0 == key).map(|p| p.1).unwrap_or(f64::NAN))
}

fn range_check(ok: bool, msg: impl Into<String>) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg.into()))
    }
}

/// Builds a catalog fixture; missing parameters take their defaults.
pub fn make_fixture(name: &str, params: &BTreeMap<String, f64>) -> Result<Fixture> {
    let entry = catalog().into_iter().find(|e| e.name == name).ok_or_else(|| Error::UnknownFixture(name.to_string()))?;
    for k in params.keys() {
        if !entry.params.iter().any(|p| p.0 == k) {
            return Err(Error::InvalidParameter(format!("fixture `{name}` has no parameter `{k}`")));
        }
    }
    let mut p = BTreeMap::new();
    for (k, _) in &entry.params {
        let v = param(params, &entry, k);
        range_check(v.is_finite(), format!("parameter {k} must be finite"))?;
        p.insert(k.to_string(), v);
    }
    let g = |k: &str| p[k];
    let (oracle, mut truth, normals) = match name {
        "line" => line(),
        "graph_poly" => {
            for c in ["c2", "c3", "c4"] {
                range_check(g(c).abs() <= 10.0, format!("{c} must lie in [-10, 10]"))?;
            }
            graph_poly(g("c2"), g("c3"), g("c4"))
        }
        "circle" => {
            range_check(g("R") > 0.0 && g("R") <= 100.0, "R must lie in (0, 100]")?;
            circle(g("R"))
        }
        "sphere" => {
            range_check(g("R") > 0.0 && g("R") <= 100.0, "R must lie in (0, 100]")?;
            sphere(g("R"))
        }
        "torus" => {
            range_check(g("r") > 0.0 && g("r") < g("R") && g("R") <= 100.0, "torus needs 0 < r < R <= 100")?;
            torus(g("R"), g("r"))
        }
        "dyadic_annuli" => dyadic_annuli(),
        "a_alpha_gamma" => {
            let (gamma, alpha) = (g("gamma"), g("alpha"));
            range_check(gamma > 1.0 && gamma <= 10.0, format!("gamma must lie in (1, 10], got {gamma}"))?;
            let hi = if gamma > 1.0 { 1.0 / (gamma - 1.0) } else { f64::INFINITY };
            range_check(alpha > 1.0 / gamma && alpha < hi, format!("alpha must lie in ({}, {}) for gamma = {gamma}, got {alpha}", 1.0 / gamma, hi))?;
            a_alpha_gamma(gamma, alpha)?
        }
        "comb" => {
            let t = g("teeth");
            range_check((10.0..=1e5).contains(&t) && t.fract() == 0.0, "teeth must be an integer in [10, 100000]")?;
            comb(t as usize)
        }
        "parabola_touch" => parabola_touch(),
        "noisy_parabola" => {
            let (k, seed) = (g("k"), g("seed"));
            range_check((1.0..=4.0).contains(&k) && k.fract() == 0.0, "k must be an integer in [1, 4]")?;
            range_check(seed >= 0.0 && seed.fract() == 0.0 && seed < 2f64.powi(53), "seed must be a non-negative integer")?;
            noisy_parabola(k as usize, seed as u64)
        }
        "twisted_cubic" => twisted_cubic(),
        "crossing_lines" => crossing_lines(),
        _ => unreachable!("catalog and builders agree"),
    };
    truth.fixture = name.to_string();
    truth.params = p.clone();
    Ok(Fixture { name: name.to_string(), params: p, oracle, truth, normal_fields: normals })
}

type Built = (MeasureOracle, GroundTruth, BTreeMap<usize, NormalField>);

fn truth(m: usize, n: usize, smooth: bool, total_mass: Option<f64>, points: Vec<MarkedPoint>) -> GroundTruth {
    GroundTruth { fixture: String::new(), params: BTreeMap::new(), m, n, seed: None, total_mass, smooth, points }
}

fn chart(name: &str, lo: &[f64], hi: &[f64], lipschitz: f64, resolution: usize, map: ChartMap) -> ChartSpec {
    ChartSpec { name: name.into(), lo: lo.to_vec(), hi: hi.to_vec(), map, lipschitz, resolution }
}

/// Jet over the given orthonormal tangent vectors; `terms` are
/// (multi-index, ambient normal vector) pairs of degree 2..=3.
fn graph_jet(base: &Vector, tangent: &[Vector], terms: &[(Vec<usize>, Vector)]) -> Jet {
    let n = base.len();
    let plane = Plane::from_orthonormal_basis(n, tangent).expect("orthonormal tangent basis");
    let m = tangent.len();
    let mut forms = Vec::new();
    for d in 2..=3 {
        let t: Vec<(Vec<usize>, Vec<f64>)> =
            terms.iter().filter(|(b, _)| b.len() == d).map(|(b, v)| (b.clone(), plane.normal_coords(v).iter().copied().collect())).collect();
        forms.push(HomogeneousForm::from_terms(d, m, n - m, &t).expect("valid terms"));
    }
    Jet::new(base.clone(), plane, 3, 0.0, forms).expect("consistent jet")
}

fn e(n: usize, i: usize) -> Vector {
    let mut v = Vector::zeros(n);
    v[i] = 1.0;
    v
}

fn smooth_expectations() -> BTreeMap<String, Status> {
    let mut ex: BTreeMap<String, Status> = CLASSIFY_ORDERS.iter().map(|(k, a)| (classify_key(*k, *a), Status::Holds)).collect();
    ex.insert("pt_order1".into(), Status::Holds);
    ex
}

/// Marked point on a smooth submanifold: plane, jet, sff and cone table
/// all follow from the analytic jet.
fn smooth_point(label: &str, jet: Jet) -> MarkedPoint {
    let plane = jet.plane().clone();
    let n = plane.ambient_dim();
    let basis = plane.basis_vectors();
    let sff = approximate_sff(&jet).expect("degree 3 jet");
    let table = basis.iter().map(|u| basis.iter().map(|v| sff.eval(u, v).expect("dims").iter().copied().collect()).collect()).collect();
    let cones = direction_net(n)
        .into_iter()
        .map(|d| {
            let inside = plane.normal_norm(&d) < 1e-12;
            ConeTruth { direction: d.iter().copied().collect(), upper: inside, lower: inside }
        })
        .collect();
    MarkedPoint {
        label: label.into(),
        point: jet.base().iter().copied().collect(),
        m: Some(plane.dim()),
        tangent: Some(basis.iter().map(|v| v.iter().copied().collect()).collect()),
        jet: Some(jet.to_json()),
        sff: Some(table),
        cones,
        touching: Vec::new(),
        expected: smooth_expectations(),
    }
}

fn bare_point(label: &str, point: &[f64], expected: &[(&str, Status)]) -> MarkedPoint {
    MarkedPoint {
        label: label.into(),
        point: point.to_vec(),
        m: None,
        tangent: None,
        jet: None,
        sff: None,
        cones: Vec::new(),
        touching: Vec::new(),
        expected: expected.iter().map(|(k, s)| (k.to_string(), *s)).collect(),
    }
}

fn line() -> Built {
    let o = MeasureOracle::segments(vec![Segment::new(vector(&[-1.0, 0.0]), vector(&[1.0, 0.0]))]).expect("segment");
    let pts = [[0.0, 0.0], [0.3, 0.0]].iter().enumerate().map(|(i, p)| smooth_point(["origin", "interior"][i], graph_jet(&vector(p), &[e(2, 0)], &[]))).collect();
    (o, truth(1, 2, true, Some(2.0), pts), BTreeMap::new())
}

fn graph_chart(c2: f64, c3: f64, c4: f64) -> ChartMap {
    Arc::new(move |u: &[f64]| {
        let t = u[0];
        let y = c2 * t * t / 2.0 + c3 * t.powi(3) / 6.0 + c4 * t.powi(4) / 24.0;
        let dy = c2 * t + c3 * t * t / 2.0 + c4 * t.powi(3) / 6.0;
        (vector(&[t, y]), DMatrix::from_column_slice(2, 1, &[1.0, dy]))
    })
}

fn graph_poly(c2: f64, c3: f64, c4: f64) -> Built {
    let lip = (1.0 + (c2.abs() + c3.abs() / 2.0 + c4.abs() / 6.0).powi(2)).sqrt();
    let o = MeasureOracle::charts(vec![chart("graph", &[-1.0], &[1.0], lip, 256, graph_chart(c2, c3, c4))], 1).expect("chart");
    let jet = graph_jet(&vector(&[0.0, 0.0]), &[e(2, 0)], &[(vec![0, 0], e(2, 1) * (c2 / 2.0)), (vec![0, 0, 0], e(2, 1) * (c3 / 6.0))]);
    (o, truth(1, 2, true, None, vec![smooth_point("origin", jet)]), BTreeMap::new())
}

fn parabola_oracle() -> MeasureOracle {
    MeasureOracle::charts(vec![chart("parabola", &[-1.0], &[1.0], 1.5, 256, graph_chart(1.0, 0.0, 0.0))], 1).expect("chart")
}

fn parabola_normal() -> NormalField {
    NormalField { chart: graph_chart(1.0, 0.0, 0.0), nu: Arc::new(|u: &[f64]| vector(&[-u[0], 1.0]) / (1.0 + u[0] * u[0]).sqrt()), at: vec![0.0] }
}

fn parabola_point() -> MarkedPoint {
    smooth_point("origin", graph_jet(&vector(&[0.0, 0.0]), &[e(2, 0)], &[(vec![0, 0], e(2, 1) * 0.5)]))
}

fn circle(radius: f64) -> Built {
    let map: ChartMap = Arc::new(move |u: &[f64]| (vector(&[radius * u[0].cos(), radius * u[0].sin()]), DMatrix::from_column_slice(2, 1, &[-radius * u[0].sin(), radius * u[0].cos()])));
    let o = MeasureOracle::charts(vec![chart("circle", &[0.0], &[TAU], radius, 256, map.clone())], 1).expect("chart");
    let mut pts = Vec::new();
    let mut normals = BTreeMap::new();
    for (i, (label, t)) in [("theta_0", 0.0f64), ("theta_2", 2.0)].into_iter().enumerate() {
        let out = vector(&[t.cos(), t.sin()]);
        let tan = vector(&[-t.sin(), t.cos()]);
        pts.push(smooth_point(label, graph_jet(&(&out * radius), &[tan], &[(vec![0, 0], &out * (-0.5 / radius))])));
        normals.insert(i, NormalField { chart: map.clone(), nu: Arc::new(|u: &[f64]| vector(&[u[0].cos(), u[0].sin()])), at: vec![t] });
    }
    (o, truth(1, 2, true, Some(TAU * radius), pts), normals)
}

fn sphere_unit(t: f64, p: f64) -> Vector {
    vector(&[t.sin() * p.cos(), t.sin() * p.sin(), t.cos()])
}

fn sphere(radius: f64) -> Built {
    let map: ChartMap = Arc::new(move |u: &[f64]| {
        let (t, p) = (u[0], u[1]);
        let jac = DMatrix::from_column_slice(3, 2, &[t.cos() * p.cos(), t.cos() * p.sin(), -t.sin(), -t.sin() * p.sin(), t.sin() * p.cos(), 0.0]) * radius;
        (sphere_unit(t, p) * radius, jac)
    });
    // six cube-face charts; spherical coordinates degenerate at the poles
    let faces = (0..6)
        .map(|f| {
            let (axis, sign) = (f / 2, if f % 2 == 0 { 1.0 } else { -1.0 });
            let face: ChartMap = Arc::new(move |u: &[f64]| {
                let mut w = [0.0; 3];
                w[axis] = sign;
                w[(axis + 1) % 3] = u[0];
                w[(axis + 2) % 3] = u[1];
                let w = vector(&w);
                let len = w.norm();
                let mut jac = DMatrix::zeros(3, 2);
                for (c, x) in u.iter().enumerate() {
                    let mut col = &w * (-x / len.powi(3));
                    col[(axis + 1 + c) % 3] += 1.0 / len;
                    jac.set_column(c, &(col * radius));
                }
                (w * (radius / len), jac)
            });
            chart(&format!("sphere_face_{f}"), &[-1.0, -1.0], &[1.0, 1.0], radius, 48, face)
        })
        .collect();
    let o = MeasureOracle::charts(faces, 2).expect("chart");
    let mut pts = Vec::new();
    let mut normals = BTreeMap::new();
    for (i, (label, t, p)) in [("theta_1_phi_0.3", 1.0f64, 0.3f64), ("theta_2_phi_4", 2.0, 4.0)].into_iter().enumerate() {
        let out = sphere_unit(t, p);
        let et = vector(&[t.cos() * p.cos(), t.cos() * p.sin(), -t.sin()]);
        let ep = vector(&[-p.sin(), p.cos(), 0.0]);
        let h = &out * (-0.5 / radius);
        let jet = graph_jet(&(&out * radius), &[et, ep], &[(vec![0, 0], h.clone()), (vec![1, 1], h)]);
        pts.push(smooth_point(label, jet));
        normals.insert(i, NormalField { chart: map.clone(), nu: Arc::new(|u: &[f64]| sphere_unit(u[0], u[1])), at: vec![t, p] });
    }
    let h = e(3, 2) * (-0.5 / radius);
    pts.push(smooth_point("north_pole", graph_jet(&(e(3, 2) * radius), &[e(3, 0), e(3, 1)], &[(vec![0, 0], h.clone()), (vec![1, 1], h)])));
    (o, truth(2, 3, true, Some(2.0 * TAU * radius * radius), pts), normals)
}

fn torus(big: f64, small: f64) -> Built {
    let map: ChartMap = Arc::new(move |u: &[f64]| {
        let (a, b) = (u[0], u[1]);
        let w = big + small * b.cos();
        let x = vector(&[w * a.cos(), w * a.sin(), small * b.sin()]);
        let jac = DMatrix::from_column_slice(3, 2, &[-w * a.sin(), w * a.cos(), 0.0, -small * b.sin() * a.cos(), -small * b.sin() * a.sin(), small * b.cos()]);
        (x, jac)
    });
    let o = MeasureOracle::charts(vec![chart("torus", &[0.0, 0.0], &[TAU, TAU], big + small, 48, map)], 2).expect("chart");
    let outer = graph_jet(&vector(&[big + small, 0.0, 0.0]), &[e(3, 1), e(3, 2)], &[(vec![0, 0], e(3, 0) * (-0.5 / (big + small))), (vec![1, 1], e(3, 0) * (-0.5 / small))]);
    let top = graph_jet(&vector(&[big, 0.0, small]), &[e(3, 0), e(3, 1)], &[(vec![0, 0], e(3, 2) * (-0.5 / small)), (vec![0, 1, 1], e(3, 2) * (-0.5 / (small * big)))]);
    let pts = vec![smooth_point("outer_equator", outer), smooth_point("top", top)];
    (o, truth(2, 3, true, Some(4.0 * PI * PI * big * small), pts), BTreeMap::new())
}

fn dyadic_annuli() -> Built {
    let mut segs = Vec::new();
    for i in 0..40 {
        let (lo, hi) = (0.5f64.powi(2 * i + 1), 0.5f64.powi(2 * i));
        segs.push(Segment::new(vector(&[lo]), vector(&[hi])));
        segs.push(Segment::new(vector(&[-hi]), vector(&[-lo])));
    }
    let o = MeasureOracle::segments(segs).expect("segments");
    let mut p = bare_point("origin", &[0.0], &[("pt_order1", Status::Fails), (&classify_key(1, 0.0), Status::Fails)]);
    p.cones = [1.0, -1.0].iter().map(|s| ConeTruth { direction: vec![*s], upper: true, lower: false }).collect();
    (o, truth(1, 1, false, Some(4.0 / 3.0), vec![p]), BTreeMap::new())
}

fn a_alpha_gamma(gamma: f64, alpha: f64) -> Result<Built> {
    let base = MeasureOracle::segments(vec![Segment::new(vector(&[-1.0, 0.0]), vector(&[1.0, 0.0]))])?;
    let hairs = HairFamily::new(alpha, alpha * gamma, 1.0, true)?;
    let total = 2.0 + hairs.total_mass();
    let o = MeasureOracle::union(vec![base, MeasureOracle::hairs(hairs)])?;
    let mut p = bare_point("origin", &[0.0, 0.0], &[(&classify_key(1, 0.0), Status::Holds), ("blow_up", Status::Fails)]);
    p.m = Some(1);
    p.tangent = Some(vec![vec![1.0, 0.0]]);
    p.cones = direction_net(2)
        .into_iter()
        .map(|d| {
            let inside = d[1].abs() < 1e-12;
            ConeTruth { direction: d.iter().copied().collect(), upper: inside, lower: inside }
        })
        .collect();
    Ok((o, truth(1, 2, false, Some(total), vec![p]), BTreeMap::new()))
}

fn comb(teeth: usize) -> Built {
    let mut segs = vec![Segment::new(vector(&[0.0, 0.0]), vector(&[0.0, 1.0]))];
    for n in 1..=teeth {
        let x = 1.0 / n as f64;
        segs.push(Segment::new(vector(&[x, 0.0]), vector(&[x, 1.0])));
    }
    let o = MeasureOracle::segments(segs).expect("segments");
    let p = bare_point("limit_segment", &[0.0, 0.5], &[(&classify_key(1, 0.0), Status::Fails)]);
    (o, truth(1, 2, false, Some(teeth as f64 + 1.0), vec![p]), BTreeMap::new())
}

fn parabola_touch() -> Built {
    let mut p = parabola_point();
    let up = vec![0.0, 1.0];
    p.touching = vec![
        TouchingCase { nu: up.clone(), r: 0.9, expected: Status::Holds },
        TouchingCase { nu: up.clone(), r: 1.0, expected: Status::Holds },
        TouchingCase { nu: up, r: 1.1, expected: Status::PreconditionFailed },
        TouchingCase { nu: vec![0.0, -1.0], r: 3.0, expected: Status::Holds },
    ];
    (parabola_oracle(), truth(1, 2, true, None, vec![p]), BTreeMap::from([(0, parabola_normal())]))
}

fn noisy_parabola(k: usize, seed: u64) -> Built {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Vec::new();
    let mut ws = Vec::new();
    for j in 2..48 {
        let side = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let x = 0.75 * 0.5f64.powf(j as f64 / 2.0) * rng.random_range(0.9..1.1);
        let y = x * rng.random_range(0.2..0.4);
        pts.push(vector(&[side * x, y]));
        ws.push(x.powi(k as i32 + 2));
    }
    let noise = MeasureOracle::cloud(WeightedCloud::new(pts, ws).expect("cloud"), 1).expect("cloud oracle");
    let o = MeasureOracle::union(vec![parabola_oracle(), noise]).expect("union");
    let mut p = parabola_point();
    p.expected.insert("pt_order1".to_string(), Status::Fails);
    p.expected.insert("carve".to_string(), Status::Holds);
    let mut t = truth(1, 2, false, None, vec![p]);
    t.seed = Some(seed);
    (o, t, BTreeMap::new())
}

fn twisted_cubic() -> Built {
    let map: ChartMap = Arc::new(|u: &[f64]| {
        let t = u[0];
        (vector(&[t, t * t, t * t * t]), DMatrix::from_column_slice(3, 1, &[1.0, 2.0 * t, 3.0 * t * t]))
    });
    let o = MeasureOracle::charts(vec![chart("twisted_cubic", &[-1.0], &[1.0], 3.75, 256, map)], 1).expect("chart");
    let jet = graph_jet(&vector(&[0.0, 0.0, 0.0]), &[e(3, 0)], &[(vec![0, 0], e(3, 1)), (vec![0, 0, 0], e(3, 2))]);
    (o, truth(1, 3, true, None, vec![smooth_point("origin", jet)]), BTreeMap::new())
}

fn crossing_lines() -> Built {
    let o = MeasureOracle::segments(vec![Segment::new(vector(&[-1.0, 0.0]), vector(&[1.0, 0.0])), Segment::new(vector(&[0.0, -1.0]), vector(&[0.0, 1.0]))]).expect("segments");
    let mut p = bare_point("crossing", &[0.0, 0.0], &[("pt_order1", Status::Fails), (&classify_key(1, 0.0), Status::Fails)]);
    p.cones = direction_net(2)
        .into_iter()
        .map(|d| {
            let on_axis = (d[0].abs() - 1.0).abs() < 1e-12 || (d[1].abs() - 1.0).abs() < 1e-12;
            ConeTruth { direction: d.iter().copied().collect(), upper: on_axis, lower: on_axis }
        })
        .collect();
    (o, truth(1, 2, false, Some(4.0), vec![p]), BTreeMap::new())
}
