use super::segments::{Segment, SegmentSet};
use super::{Mass, Sample, SetDistance};
use crate::error::{Error, Result};
use crate::geometry::{Region, Vector};

/// The planar family of vertical hairs {(s n^-a, t) : 0 <= t <= c n^-b},
/// n >= 1, one for each sign s in `sides`. Queries enumerate the hairs
/// near the query ball exactly; the (possibly infinite) remainder is grouped
/// into short runs of consecutive hairs, each carried by one representative
/// segment of the same total mass. A run whose bounding box straddles the
/// region boundary contributes its mass to the error.
#[derive(Debug, Clone)]
pub struct HairFamily {
    position_exp: f64,
    height_exp: f64,
    height_scale: f64,
    sides: Vec<f64>,
}

/// Hairs enumerated exactly at either end of a query range.
const EXPLICIT: usize = 512;
/// Relative index width of a run.
const RUN_RATIO: f64 = 0.02;
/// Runs stop at x below this fraction of the query radius; everything
/// closer to the axis is a single run.
const TAIL_FRACTION: f64 = 1e-6;
/// Open-ended runs stop here and the rest becomes one tail run.
const TAIL_INDEX: u64 = 1 << 50;

struct Piece {
    seg: Segment,
    /// Bounding box (x range, max height) of a run; `None` for exact hairs.
    run: Option<(f64, f64, f64)>,
}

impl HairFamily {
    pub fn new(position_exp: f64, height_exp: f64, height_scale: f64, both_sides: bool) -> Result<HairFamily> {
        if !(position_exp > 0.0 && height_exp > 1.0 && height_scale > 0.0) {
            return Err(Error::InvalidParameter(format!("hair family needs a > 0, b > 1, c > 0; got a = {position_exp}, b = {height_exp}, c = {height_scale}")));
        }
        let sides = if both_sides { vec![1.0, -1.0] } else { vec![1.0] };
        Ok(HairFamily { position_exp, height_exp, height_scale, sides })
    }

    pub fn x(&self, n: f64) -> f64 {
        n.powf(-self.position_exp)
    }

    pub fn height(&self, n: f64) -> f64 {
        self.height_scale * n.powf(-self.height_exp)
    }

    /// sum_{k >= n} height(k).
    pub fn tail_mass(&self, n: u64) -> f64 {
        self.height_scale * hurwitz(self.height_exp, n)
    }

    pub fn total_mass(&self) -> f64 {
        self.sides.len() as f64 * self.tail_mass(1)
    }

    fn run_mass(&self, first: u64, last: u64) -> f64 {
        if last - first < 64 {
            (first..=last).map(|n| self.height(n as f64)).sum()
        } else {
            self.tail_mass(first) - self.tail_mass(last + 1)
        }
    }

    fn hair(&self, s: f64, n: u64) -> Segment {
        let x = s * self.x(n as f64);
        Segment::new(Vector::from_column_slice(&[x, 0.0]), Vector::from_column_slice(&[x, self.height(n as f64)]))
    }

    /// Indices with x_n in [lo, hi]; `None` as upper end when lo <= 0.
    fn index_range(&self, lo: f64, hi: f64) -> Option<(u64, Option<u64>)> {
        if hi <= 0.0 {
            return None;
        }
        let inv = 1.0 / self.position_exp;
        let first = if hi >= 1.0 { 1 } else { (hi.powf(-inv) * (1.0 - 1e-12)).ceil().max(1.0) as u64 };
        let last = if lo <= 0.0 { None } else { Some((lo.powf(-inv) * (1.0 + 1e-12)).floor().min(u64::MAX as f64 / 4.0) as u64) };
        match last {
            Some(l) if l < first => None,
            _ => Some((first, last)),
        }
    }

    fn pieces(&self, ball: Option<(&Vector, f64)>) -> Vec<Piece> {
        let mut out = Vec::new();
        let top = self.height(1.0);
        let scale = ball.map_or(1.0, |b| b.1.max(1e-300));
        for &s in &self.sides {
            let (lo, hi) = match ball {
                Some((c, rho)) => {
                    if c[1] - rho > top || c[1] + rho < 0.0 {
                        continue;
                    }
                    (s * c[0] - rho, s * c[0] + rho)
                }
                None => (0.0, 1.0),
            };
            let Some((first, last)) = self.index_range(lo, hi) else { continue };
            let explicit = EXPLICIT as u64;
            match last {
                Some(l) if l - first < 2 * explicit => {
                    out.extend((first..=l).map(|n| Piece { seg: self.hair(s, n), run: None }));
                }
                _ => {
                    out.extend((first..first + explicit).map(|n| Piece { seg: self.hair(s, n), run: None }));
                    let mid_end = last.map(|l| l - explicit);
                    if let Some(l) = last {
                        out.extend((l - explicit + 1..=l).map(|n| Piece { seg: self.hair(s, n), run: None }));
                    }
                    self.runs(s, first + explicit, mid_end, scale * TAIL_FRACTION, &mut out);
                }
            }
        }
        out
    }

    fn runs(&self, s: f64, start: u64, end: Option<u64>, x_stop: f64, out: &mut Vec<Piece>) {
        let mut n = start;
        loop {
            if end.is_some_and(|e| n > e) {
                return;
            }
            if end.is_none() && (self.x(n as f64) < x_stop || n >= TAIL_INDEX) {
                // everything from n on, as one run
                let mass = self.tail_mass(n);
                let (xmax, hmax) = (self.x(n as f64), self.height(n as f64));
                let h = 0.5 * hmax;
                let x = s * 0.5 * xmax;
                let mut seg = Segment::new(Vector::from_column_slice(&[x, 0.0]), Vector::from_column_slice(&[x, h]));
                seg.density = mass / h;
                out.push(Piece { seg, run: Some((0.0, xmax, hmax)) });
                return;
            }
            let mut next = ((n as f64) * (1.0 + RUN_RATIO)).ceil() as u64;
            next = next.max(n + 1);
            if let Some(e) = end {
                next = next.min(e + 1);
            }
            let last = next - 1;
            let mass = self.run_mass(n, last);
            let count = (last - n + 1) as f64;
            let mid = ((n as f64) * (last as f64)).sqrt();
            let h = mass / count;
            let x = s * self.x(mid);
            let mut seg = Segment::new(Vector::from_column_slice(&[x, 0.0]), Vector::from_column_slice(&[x, h]));
            seg.density = count;
            out.push(Piece { seg, run: Some((self.x(last as f64), self.x(n as f64), self.height(n as f64))) });
            n = next;
        }
    }

    pub fn mass(&self, region: &Region) -> Mass {
        let ball = region.bounding_ball();
        let pieces = self.pieces(ball.as_ref().map(|(c, r)| (c, *r)));
        let mut error = 0.0;
        for p in &pieces {
            if let Some((x0, x1, h)) = p.run {
                let s = p.seg.p0[0].signum();
                let corners = [[x0, 0.0], [x1, 0.0], [x0, h], [x1, h]].map(|[x, y]| region.contains(&Vector::from_column_slice(&[s * x, y])));
                if corners.iter().any(|c| *c != corners[0]) {
                    error += p.seg.mass();
                }
            }
        }
        let set = SegmentSet::new(pieces.into_iter().map(|p| p.seg).collect());
        Mass { value: set.mass(region), error }
    }

    pub fn samples(&self, c: &Vector, rho: f64, resolution: usize, out: &mut Vec<Sample>) {
        let set = SegmentSet::new(self.pieces(Some((c, rho))).into_iter().map(|p| p.seg).collect());
        set.samples(c, rho, resolution, out);
    }

    pub fn distance(&self, x: &Vector, radius: f64) -> SetDistance {
        let pieces = self.pieces(Some((x, radius)));
        let floor = pieces.iter().filter_map(|p| p.run).map(|(x0, x1, h)| (x1 - x0).hypot(h)).fold(0.0, f64::max);
        let set = SegmentSet::new(pieces.into_iter().map(|p| p.seg).collect());
        SetDistance { value: set.distance(x, radius).filter(|d| *d <= radius), floor }
    }

    /// Every hair with n <= count explicitly, the rest as one run.
    pub fn discretize(&self, count: usize, pts: &mut Vec<Vector>, ws: &mut Vec<f64>) {
        let per_hair = 8;
        let hairs = (count / per_hair).max(1) as u64;
        for &s in &self.sides {
            for n in 1..=hairs {
                let seg = self.hair(s, n);
                for i in 0..per_hair {
                    pts.push(seg.at((i as f64 + 0.5) / per_hair as f64));
                    ws.push(seg.mass() / per_hair as f64);
                }
            }
            pts.push(Vector::from_column_slice(&[s * 0.5 * self.x(hairs as f64 + 1.0), 0.0]));
            ws.push(self.tail_mass(hairs + 1));
        }
    }
}

/// Hurwitz zeta sum_{k >= n} k^-p for p > 1: explicit terms up to 32, then
/// Euler-Maclaurin with three correction terms.
pub fn hurwitz(p: f64, n: u64) -> f64 {
    let mut s = 0.0;
    let mut k = n.max(1);
    while k < 32 {
        s += (k as f64).powf(-p);
        k += 1;
    }
    let x = k as f64;
    s + x.powf(1.0 - p) / (p - 1.0) + 0.5 * x.powf(-p) + p / 12.0 * x.powf(-p - 1.0) - p * (p + 1.0) * (p + 2.0) / 720.0 * x.powf(-p - 3.0)
        + p * (p + 1.0) * (p + 2.0) * (p + 3.0) * (p + 4.0) / 30240.0 * x.powf(-p - 5.0)
}
