//! Measure oracles: H^m restricted to a set, queried through regions.

mod chart;
mod cloud;
mod hairs;
mod segments;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use chart::{jacobian_volume, ChartMap, ChartSpec};
pub use cloud::WeightedCloud;
pub use hairs::{hurwitz, HairFamily};
pub use segments::{Segment, SegmentSet};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{Region, ShearMap, Vector};

/// A mass value with an (advisory) error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mass {
    pub value: f64,
    pub error: f64,
}

impl Mass {
    pub fn exact(value: f64) -> Mass {
        Mass { value, error: 0.0 }
    }
}

impl std::ops::Add for Mass {
    type Output = Mass;
    fn add(self, o: Mass) -> Mass {
        Mass { value: self.value + o.value, error: self.error + o.error }
    }
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub point: Vector,
    pub weight: f64,
}

/// Samples of the measure inside a ball. `spacing` bounds the gap between
/// neighbouring samples of a continuous backend (0 for atoms).
#[derive(Debug, Clone, Default)]
pub struct SampleSet {
    pub samples: Vec<Sample>,
    pub spacing: f64,
}

/// Result of a distance query. `floor` is the resolution below which the
/// distance is indistinguishable from 0.
#[derive(Debug, Clone, Copy)]
pub struct SetDistance {
    /// `None` when the set has no point within the search radius.
    pub value: Option<f64>,
    pub floor: f64,
}

impl SetDistance {
    /// The distance, or the search radius when nothing was found.
    pub fn value_or(&self, radius: f64) -> f64 {
        self.value.unwrap_or(radius)
    }

    /// Distance with values under the floor snapped to 0.
    pub fn effective(&self, radius: f64) -> f64 {
        let v = self.value_or(radius);
        if v <= self.floor {
            0.0
        } else {
            v
        }
    }
}

enum Backend {
    Charts { charts: Vec<ChartSpec>, global_resolution: usize },
    Cloud(WeightedCloud),
    Segments(SegmentSet),
    Hairs(HairFamily),
    Restricted { inner: MeasureOracle, region: Region },
    Pushforward { inner: MeasureOracle, map: Arc<ShearMap> },
    Union(Vec<MeasureOracle>),
}

/// H^m restricted to a set, as an immutable, thread-safe query object.
#[derive(Clone)]
pub struct MeasureOracle {
    m: usize,
    n: usize,
    backend: Arc<Backend>,
}

impl std::fmt::Debug for MeasureOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match &*self.backend {
            Backend::Charts { charts, .. } => format!("charts({})", charts.len()),
            Backend::Cloud(c) => format!("cloud({})", c.len()),
            Backend::Segments(s) => format!("segments({})", s.segments().len()),
            Backend::Hairs(_) => "hairs".to_string(),
            Backend::Restricted { region, .. } => format!("restricted({region:?})"),
            Backend::Pushforward { .. } => "pushforward".to_string(),
            Backend::Union(p) => format!("union({})", p.len()),
        };
        write!(f, "MeasureOracle(m={}, n={}, {kind})", self.m, self.n)
    }
}

/// Nodes per query above which chart quadrature falls back to a coarser grid.
const NODE_BUDGET: usize = 4_000_000;

impl MeasureOracle {
    pub fn charts(charts: Vec<ChartSpec>, m: usize) -> Result<MeasureOracle> {
        let first = charts.first().ok_or_else(|| Error::InvalidParameter("no charts".into()))?;
        let n = first.point(&first.lo).len();
        for c in &charts {
            check_dim(m, c.dim())?;
            check_dim(n, c.point(&c.lo).len())?;
            if c.lo.iter().zip(&c.hi).any(|(a, b)| !(a < b)) {
                return Err(Error::InvalidParameter(format!("empty parameter box in chart {}", c.name)));
            }
        }
        let global_resolution = if m == 1 { 4096 } else { 384 };
        Ok(MeasureOracle { m, n, backend: Arc::new(Backend::Charts { charts, global_resolution }) })
    }

    pub fn cloud(cloud: WeightedCloud, m: usize) -> Result<MeasureOracle> {
        let n = cloud.ambient_dim();
        if m > n {
            return Err(Error::InvalidParameter(format!("measure dimension {m} exceeds ambient {n}")));
        }
        Ok(MeasureOracle { m, n, backend: Arc::new(Backend::Cloud(cloud)) })
    }

    pub fn segments(segs: Vec<Segment>) -> Result<MeasureOracle> {
        let n = segs.first().map(|s| s.p0.len()).ok_or_else(|| Error::InvalidParameter("no segments".into()))?;
        for s in &segs {
            check_dim(n, s.p0.len())?;
            check_dim(n, s.p1.len())?;
        }
        Ok(MeasureOracle { m: 1, n, backend: Arc::new(Backend::Segments(SegmentSet::new(segs))) })
    }

    pub fn hairs(family: HairFamily) -> MeasureOracle {
        MeasureOracle { m: 1, n: 2, backend: Arc::new(Backend::Hairs(family)) }
    }

    pub fn union(parts: Vec<MeasureOracle>) -> Result<MeasureOracle> {
        let first = parts.first().ok_or_else(|| Error::InvalidParameter("empty union".into()))?;
        let (m, n) = (first.m, first.n);
        for p in &parts {
            check_dim(m, p.m)?;
            check_dim(n, p.n)?;
        }
        Ok(MeasureOracle { m, n, backend: Arc::new(Backend::Union(parts)) })
    }

    pub fn restrict(&self, region: Region) -> MeasureOracle {
        MeasureOracle { m: self.m, n: self.n, backend: Arc::new(Backend::Restricted { inner: self.clone(), region }) }
    }

    /// The image measure under a shear map.
    pub fn pushforward(&self, map: &ShearMap) -> MeasureOracle {
        MeasureOracle {
            m: self.m,
            n: self.n,
            backend: Arc::new(Backend::Pushforward { inner: self.clone(), map: Arc::new(map.clone()) }),
        }
    }

    /// The same measure read as m-dimensional; only density normalizations
    /// change.
    pub fn with_dim(&self, m: usize) -> MeasureOracle {
        MeasureOracle { m, n: self.n, backend: self.backend.clone() }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn mass(&self, region: &Region) -> Mass {
        match &*self.backend {
            Backend::Charts { charts, global_resolution } => {
                let ball = region.bounding_ball();
                let mut total = Mass::exact(0.0);
                for chart in charts {
                    let cells = chart.cells(ball.as_ref().map(|(c, r)| (c, *r)));
                    if cells.is_empty() {
                        continue;
                    }
                    let rho = ball.as_ref().map(|b| b.1);
                    let mut res = if rho.is_some() { chart.resolution } else { *global_resolution };
                    let mut inflate = 1.0;
                    let per_cell = (res as f64 * if rho.is_some() { 0.5 } else { 1.0 }).powi(self.m as i32).max(1.0);
                    let estimate = cells.len() as f64 * per_cell;
                    if estimate > NODE_BUDGET as f64 {
                        let shrink = (NODE_BUDGET as f64 / estimate).powf(1.0 / self.m as f64);
                        res = ((res as f64 * shrink) as usize).max(4);
                        inflate = 4.0;
                    }
                    // Indicator quadrature: besides the refinement difference,
                    // every membership change between consecutive nodes can cost
                    // up to one node weight.
                    let integrate = |res: usize| {
                        let mut s = 0.0;
                        let mut boundary = 0.0;
                        let mut prev: Option<bool> = None;
                        chart.for_each_node(&cells, rho, res, |_, p, w| {
                            let inside = region.contains(p);
                            if inside {
                                s += w;
                            }
                            if prev.is_some_and(|q| q != inside) {
                                boundary += w;
                            }
                            prev = Some(inside);
                        });
                        (s, boundary)
                    };
                    let (fine, boundary) = integrate(res);
                    let (coarse, _) = integrate((res / 2).max(1));
                    let err = (fine - coarse).abs().max(boundary);
                    total = total + Mass { value: fine, error: inflate * err };
                }
                total
            }
            Backend::Cloud(cloud) => {
                let ball = region.bounding_ball();
                let mut value = 0.0;
                let mut error: f64 = 0.0;
                for i in cloud.candidates(ball.as_ref().map(|(c, r)| (c, *r))) {
                    if region.contains(&cloud.points()[i]) {
                        let w = cloud.weights()[i];
                        value += w;
                        error = error.max(w);
                    }
                }
                Mass { value, error }
            }
            Backend::Segments(s) => Mass::exact(s.mass(region)),
            Backend::Hairs(h) => h.mass(region),
            Backend::Restricted { inner, region: s } => inner.mass(&region.clone().and(s.clone())),
            Backend::Pushforward { inner, map } => {
                inner.mass(&Region::Preimage { map: map.clone(), inner: Box::new(region.clone()) })
            }
            Backend::Union(parts) => parts.iter().fold(Mass::exact(0.0), |acc, p| acc + p.mass(region)),
        }
    }

    pub fn total_mass(&self) -> Mass {
        self.mass(&Region::Everything)
    }

    /// Samples of the measure in the closed ball B(c, rho).
    pub fn samples(&self, c: &Vector, rho: f64) -> SampleSet {
        let mut out = SampleSet::default();
        self.collect_samples(c, rho, &mut out);
        out
    }

    fn collect_samples(&self, c: &Vector, rho: f64, out: &mut SampleSet) {
        match &*self.backend {
            Backend::Charts { charts, .. } => {
                for ch in charts {
                    ch.samples(c, rho, ch.resolution, &mut out.samples);
                    out.spacing = out.spacing.max(ch.node_spacing(rho, ch.resolution));
                }
            }
            Backend::Cloud(cloud) => cloud.samples(c, rho, &mut out.samples),
            Backend::Segments(s) => {
                let res = 256;
                s.samples(c, rho, res, &mut out.samples);
                out.spacing = out.spacing.max(2.0 * rho / res as f64);
            }
            Backend::Hairs(h) => {
                let res = 256;
                h.samples(c, rho, res, &mut out.samples);
                out.spacing = out.spacing.max(2.0 * rho / res as f64);
            }
            Backend::Restricted { inner, region } => {
                let mut tmp = SampleSet::default();
                inner.collect_samples(c, rho, &mut tmp);
                out.samples.extend(tmp.samples.into_iter().filter(|s| region.contains(&s.point)));
                out.spacing = out.spacing.max(tmp.spacing);
            }
            Backend::Pushforward { inner, map } => {
                let l = map.lipschitz_bound(c, rho);
                let mut tmp = SampleSet::default();
                inner.collect_samples(&map.inverse().apply(c), rho * l, &mut tmp);
                for s in tmp.samples {
                    let p = map.apply(&s.point);
                    if (&p - c).norm() <= rho {
                        out.samples.push(Sample { point: p, weight: s.weight });
                    }
                }
                out.spacing = out.spacing.max(tmp.spacing * l);
            }
            Backend::Union(parts) => {
                for p in parts {
                    p.collect_samples(c, rho, out);
                }
            }
        }
    }

    /// Largest atom of the measure inside B(c, rho); 0 for continuous backends.
    pub fn granularity(&self, c: &Vector, rho: f64) -> f64 {
        match &*self.backend {
            Backend::Charts { .. } | Backend::Segments(_) | Backend::Hairs(_) => 0.0,
            Backend::Cloud(cloud) => cloud.max_weight_in(c, rho),
            Backend::Restricted { inner, .. } => inner.granularity(c, rho),
            Backend::Pushforward { inner, map } => {
                let l = map.lipschitz_bound(c, rho);
                inner.granularity(&map.inverse().apply(c), rho * l)
            }
            Backend::Union(parts) => parts.iter().map(|p| p.granularity(c, rho)).fold(0.0, f64::max),
        }
    }

    /// dist(x, support) searched within `radius`.
    pub fn distance(&self, x: &Vector, radius: f64) -> SetDistance {
        match &*self.backend {
            Backend::Charts { charts, .. } => {
                let v = charts.iter().filter_map(|c| c.distance(x, radius)).fold(None, |a: Option<f64>, d| Some(a.map_or(d, |a| a.min(d))));
                SetDistance { value: v.filter(|d| *d <= radius), floor: 0.0 }
            }
            Backend::Segments(s) => SetDistance { value: s.distance(x, radius).filter(|d| *d <= radius), floor: 0.0 },
            Backend::Hairs(h) => h.distance(x, radius),
            Backend::Cloud(cloud) => match cloud.nearest(x, radius) {
                Some((i, d)) => SetDistance { value: Some(d), floor: 0.5 * cloud.neighbour_spacing(i, (2.0 * d).max(radius)) },
                None => SetDistance { value: None, floor: 0.0 },
            },
            Backend::Restricted { .. } | Backend::Pushforward { .. } => {
                let ss = self.samples(x, radius);
                let v = ss.samples.iter().map(|s| (&s.point - x).norm()).fold(None, |a: Option<f64>, d| Some(a.map_or(d, |a| a.min(d))));
                SetDistance { value: v, floor: 0.5 * ss.spacing }
            }
            Backend::Union(parts) => {
                let mut best = SetDistance { value: None, floor: 0.0 };
                for p in parts {
                    let d = p.distance(x, radius);
                    if let Some(v) = d.value {
                        if best.value.is_none_or(|b| v < b) {
                            best = d;
                        }
                    }
                }
                best
            }
        }
    }

    /// Sum of w f(p) over the samples in B(c, rho).
    pub fn integrate(&self, c: &Vector, rho: f64, f: impl Fn(&Vector) -> f64) -> f64 {
        self.samples(c, rho).samples.iter().map(|s| s.weight * f(&s.point)).sum()
    }

    /// A weighted cloud approximating the whole measure with roughly
    /// `count` points.
    pub fn discretize(&self, count: usize) -> Result<WeightedCloud> {
        let mut pts = Vec::new();
        let mut ws = Vec::new();
        self.collect_discrete(count, &mut pts, &mut ws);
        WeightedCloud::new(pts, ws)
    }

    fn collect_discrete(&self, count: usize, pts: &mut Vec<Vector>, ws: &mut Vec<f64>) {
        match &*self.backend {
            Backend::Charts { charts, .. } => {
                let per_axis = ((count.max(1) as f64 / charts.len() as f64).powf(1.0 / self.m as f64).ceil() as usize).max(1);
                for ch in charts {
                    let cells = ch.cells(None);
                    ch.for_each_node(&cells, None, per_axis, |_, p, w| {
                        pts.push(p.clone());
                        ws.push(w);
                    });
                }
            }
            Backend::Cloud(c) => {
                pts.extend(c.points().iter().cloned());
                ws.extend(c.weights().iter().copied());
            }
            Backend::Segments(s) => {
                let total: f64 = s.segments().iter().map(Segment::length).sum();
                for seg in s.segments() {
                    let k = ((count as f64 * seg.length() / total).round() as usize).max(1);
                    for i in 0..k {
                        pts.push(seg.at((i as f64 + 0.5) / k as f64));
                        ws.push(seg.mass() / k as f64);
                    }
                }
            }
            Backend::Hairs(h) => h.discretize(count, pts, ws),
            Backend::Restricted { inner, region } => {
                let (mut p2, mut w2) = (Vec::new(), Vec::new());
                inner.collect_discrete(count, &mut p2, &mut w2);
                for (p, w) in p2.into_iter().zip(w2) {
                    if region.contains(&p) {
                        pts.push(p);
                        ws.push(w);
                    }
                }
            }
            Backend::Pushforward { inner, map } => {
                let (mut p2, mut w2) = (Vec::new(), Vec::new());
                inner.collect_discrete(count, &mut p2, &mut w2);
                pts.extend(p2.iter().map(|p| map.apply(p)));
                ws.extend(w2);
            }
            Backend::Union(parts) => {
                for p in parts {
                    p.collect_discrete(count / parts.len().max(1), pts, ws);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests;
