use super::Sample;
use crate::geometry::{Region, Vector};

/// A straight segment carrying `density` units of H^1 per unit length.
#[derive(Debug, Clone)]
pub struct Segment {
    pub p0: Vector,
    pub p1: Vector,
    pub density: f64,
}

impl Segment {
    pub fn new(p0: Vector, p1: Vector) -> Segment {
        Segment { p0, p1, density: 1.0 }
    }

    pub fn length(&self) -> f64 {
        (&self.p1 - &self.p0).norm()
    }

    pub fn mass(&self) -> f64 {
        self.length() * self.density
    }

    pub fn at(&self, t: f64) -> Vector {
        &self.p0 + (&self.p1 - &self.p0) * t
    }

    /// Parameter interval of the part inside the closed ball.
    fn ball_range(&self, c: &Vector, rho: f64) -> Option<(f64, f64)> {
        let e = &self.p1 - &self.p0;
        let d0 = &self.p0 - c;
        let a = e.dot(&e);
        let b = 2.0 * d0.dot(&e);
        let cc = d0.dot(&d0) - rho * rho;
        if a == 0.0 {
            return (cc <= 0.0).then_some((0.0, 1.0));
        }
        let disc = b * b - 4.0 * a * cc;
        if disc < 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        let t0 = ((-b - sq) / (2.0 * a)).max(0.0);
        let t1 = ((-b + sq) / (2.0 * a)).min(1.0);
        (t1 > t0).then_some((t0, t1))
    }

    pub fn distance(&self, x: &Vector) -> f64 {
        let e = &self.p1 - &self.p0;
        let a = e.norm_squared();
        let t = if a == 0.0 { 0.0 } else { ((x - &self.p0).dot(&e) / a).clamp(0.0, 1.0) };
        (self.at(t) - x).norm()
    }
}

/// Exact backend for finite unions of segments: masses are sums of
/// interval-intersection lengths with breakpoints found in closed form.
#[derive(Debug, Clone)]
pub struct SegmentSet {
    segs: Vec<Segment>,
    short: Vec<usize>,
    short_keys: Vec<f64>,
    long: Vec<usize>,
    max_short_extent: f64,
}

const SHORT_EXTENT: f64 = 1e-2;
const NUMERIC_PIECES: usize = 64;

impl SegmentSet {
    pub fn new(segs: Vec<Segment>) -> SegmentSet {
        let mut short = Vec::new();
        let mut long = Vec::new();
        let mut max_short_extent: f64 = 0.0;
        for (i, s) in segs.iter().enumerate() {
            let ext = (s.p1[0] - s.p0[0]).abs();
            if ext <= SHORT_EXTENT {
                short.push(i);
                max_short_extent = max_short_extent.max(ext);
            } else {
                long.push(i);
            }
        }
        let key = |i: usize| segs[i].p0[0].min(segs[i].p1[0]);
        short.sort_by(|&a, &b| key(a).total_cmp(&key(b)).then(a.cmp(&b)));
        let short_keys = short.iter().map(|&i| key(i)).collect();
        SegmentSet { segs, short, short_keys, long, max_short_extent }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segs
    }

    pub fn ambient_dim(&self) -> usize {
        self.segs.first().map_or(0, |s| s.p0.len())
    }

    pub fn total_mass(&self) -> f64 {
        self.segs.iter().map(Segment::mass).sum()
    }

    fn candidates(&self, ball: Option<(&Vector, f64)>, mut f: impl FnMut(&Segment, (f64, f64))) {
        match ball {
            None => {
                for s in &self.segs {
                    f(s, (0.0, 1.0));
                }
            }
            Some((c, rho)) => {
                for &i in &self.long {
                    if let Some(r) = self.segs[i].ball_range(c, rho) {
                        f(&self.segs[i], r);
                    }
                }
                let lo = self.short_keys.partition_point(|&k| k < c[0] - rho - self.max_short_extent);
                let hi = self.short_keys.partition_point(|&k| k <= c[0] + rho);
                for &i in &self.short[lo..hi.max(lo)] {
                    if let Some(r) = self.segs[i].ball_range(c, rho) {
                        f(&self.segs[i], r);
                    }
                }
            }
        }
    }

    pub fn mass(&self, region: &Region) -> f64 {
        let ball = region.bounding_ball();
        let mut total = 0.0;
        let mut ts: Vec<f64> = Vec::new();
        self.candidates(ball.as_ref().map(|(c, r)| (c, *r)), |s, (t0, t1)| {
            ts.clear();
            ts.push(t0);
            match region.segment_breakpoints(&s.p0, &s.p1) {
                Some(bp) => ts.extend(bp.into_iter().filter(|t| *t > t0 && *t < t1)),
                None => numeric_crossings(region, s, t0, t1, &mut ts),
            }
            ts.push(t1);
            ts.sort_by(f64::total_cmp);
            let len = s.length();
            for w in ts.windows(2) {
                if w[1] > w[0] && region.contains(&s.at(0.5 * (w[0] + w[1]))) {
                    total += (w[1] - w[0]) * len * s.density;
                }
            }
        });
        total
    }

    pub fn samples(&self, c: &Vector, rho: f64, resolution: usize, out: &mut Vec<Sample>) {
        self.candidates(Some((c, rho)), |s, (t0, t1)| {
            let piece = (t1 - t0) * s.length();
            let count = ((resolution as f64 * piece / (2.0 * rho)).ceil() as usize).max(1);
            let w = piece / count as f64 * s.density;
            for k in 0..count {
                let t = t0 + (t1 - t0) * (k as f64 + 0.5) / count as f64;
                out.push(Sample { point: s.at(t), weight: w });
            }
        });
    }

    pub fn distance(&self, x: &Vector, rho: f64) -> Option<f64> {
        let mut best: Option<f64> = None;
        self.candidates(Some((x, rho)), |s, _| {
            let d = s.distance(x);
            best = Some(best.map_or(d, |b: f64| b.min(d)));
        });
        best
    }
}

/// Membership changes along the segment located by a uniform scan plus
/// bisection, for regions without closed-form breakpoints.
fn numeric_crossings(region: &Region, s: &Segment, t0: f64, t1: f64, out: &mut Vec<f64>) {
    let step = (t1 - t0) / NUMERIC_PIECES as f64;
    let mut prev = region.contains(&s.at(t0));
    for k in 1..=NUMERIC_PIECES {
        let t = t0 + step * k as f64;
        let cur = region.contains(&s.at(t));
        if cur != prev {
            let (mut a, mut b) = (t - step, t);
            for _ in 0..60 {
                let mid = 0.5 * (a + b);
                if region.contains(&s.at(mid)) == prev {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            out.push(0.5 * (a + b));
        }
        prev = cur;
    }
}
