use std::fmt::Write as _;
use std::io::BufRead;

use super::Sample;
use crate::error::{Error, Result};
use crate::geometry::Vector;

/// Weighted point cloud sorted by first coordinate for range pruning.
#[derive(Debug, Clone)]
pub struct WeightedCloud {
    points: Vec<Vector>,
    weights: Vec<f64>,
    keys: Vec<f64>,
}

impl WeightedCloud {
    pub fn new(points: Vec<Vector>, weights: Vec<f64>) -> Result<WeightedCloud> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("empty point cloud".into()));
        }
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch { expected: points.len(), got: weights.len() });
        }
        let n = points[0].len();
        if n == 0 {
            return Err(Error::InvalidParameter("zero-dimensional points".into()));
        }
        for p in &points {
            crate::error::check_dim(n, p.len())?;
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter("non-finite coordinate".into()));
            }
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameter("weights must be finite and non-negative".into()));
        }
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| points[a][0].total_cmp(&points[b][0]).then(a.cmp(&b)));
        let points: Vec<Vector> = order.iter().map(|&i| points[i].clone()).collect();
        let weights: Vec<f64> = order.iter().map(|&i| weights[i]).collect();
        let keys = points.iter().map(|p| p[0]).collect();
        Ok(WeightedCloud { points, weights, keys })
    }

    pub fn ambient_dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Indices whose first coordinate lies in [lo, hi].
    pub fn key_range(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let a = self.keys.partition_point(|&k| k < lo);
        let b = self.keys.partition_point(|&k| k <= hi);
        a..b.max(a)
    }

    pub fn candidates(&self, ball: Option<(&Vector, f64)>) -> std::ops::Range<usize> {
        match ball {
            Some((c, r)) => self.key_range(c[0] - r, c[0] + r),
            None => 0..self.points.len(),
        }
    }

    pub fn samples(&self, c: &Vector, rho: f64, out: &mut Vec<Sample>) {
        for i in self.key_range(c[0] - rho, c[0] + rho) {
            if (&self.points[i] - c).norm() <= rho {
                out.push(Sample { point: self.points[i].clone(), weight: self.weights[i] });
            }
        }
    }

    pub fn max_weight_in(&self, c: &Vector, rho: f64) -> f64 {
        self.key_range(c[0] - rho, c[0] + rho)
            .filter(|&i| (&self.points[i] - c).norm() <= rho)
            .map(|i| self.weights[i])
            .fold(0.0, f64::max)
    }

    /// Nearest point within rho, if any, with its index.
    pub fn nearest(&self, x: &Vector, rho: f64) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for i in self.key_range(x[0] - rho, x[0] + rho) {
            let d = (&self.points[i] - x).norm();
            if d <= rho && best.is_none_or(|(_, b)| d < b) {
                best = Some((i, d));
            }
        }
        best
    }

    /// Distance from point i to its nearest other point (searching up to rho).
    pub fn neighbour_spacing(&self, i: usize, rho: f64) -> f64 {
        let p = &self.points[i];
        let mut best = rho;
        for j in self.key_range(p[0] - rho, p[0] + rho) {
            if j != i {
                let d = (&self.points[j] - p).norm();
                if d > 0.0 {
                    best = best.min(d);
                }
            }
        }
        best
    }

    pub fn write_gmt(&self, m: usize) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "#gmt-cloud n={} m={}", self.ambient_dim(), m);
        for (p, w) in self.points.iter().zip(&self.weights) {
            let _ = write!(s, "{w:e}");
            for x in p.iter() {
                let _ = write!(s, " {x:e}");
            }
            s.push('\n');
        }
        s
    }

    /// Parses the `#gmt-cloud n=<n> m=<m>` format; returns the cloud and m.
    pub fn read_gmt(reader: impl BufRead) -> Result<(WeightedCloud, usize)> {
        let mut header: Option<(usize, usize)> = None;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            if let Some(rest) = t.strip_prefix("#gmt-cloud") {
                let mut n = None;
                let mut m = None;
                for tok in rest.split_whitespace() {
                    if let Some(v) = tok.strip_prefix("n=") {
                        n = v.parse().ok();
                    } else if let Some(v) = tok.strip_prefix("m=") {
                        m = v.parse().ok();
                    }
                }
                match (n, m) {
                    (Some(n), Some(m)) if n >= 1 && m <= n => header = Some((n, m)),
                    _ => return Err(Error::Parse(format!("line {}: bad header `{t}`", lineno + 1))),
                }
                continue;
            }
            if t.starts_with('#') {
                continue;
            }
            let Some((n, _)) = header else {
                return Err(Error::Parse("missing `#gmt-cloud n=<n> m=<m>` header".into()));
            };
            let vals: Vec<f64> = t
                .split_whitespace()
                .map(|x| x.parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1))))
                .collect::<Result<_>>()?;
            if vals.len() != n + 1 {
                return Err(Error::Parse(format!("line {}: expected {} fields, got {}", lineno + 1, n + 1, vals.len())));
            }
            weights.push(vals[0]);
            points.push(Vector::from_column_slice(&vals[1..]));
        }
        let Some((_, m)) = header else {
            return Err(Error::Parse("missing `#gmt-cloud n=<n> m=<m>` header".into()));
        };
        if points.is_empty() {
            return Err(Error::Parse("no records".into()));
        }
        Ok((WeightedCloud::new(points, weights)?, m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let c = WeightedCloud::new(
            vec![Vector::from_vec(vec![0.5, 1.0]), Vector::from_vec(vec![-0.25, 2.0])],
            vec![0.1, 0.2],
        )
        .unwrap();
        let text = c.write_gmt(1);
        assert!(text.starts_with("#gmt-cloud n=2 m=1\n"));
        let (back, m) = WeightedCloud::read_gmt(text.as_bytes()).unwrap();
        assert_eq!(m, 1);
        assert_eq!(back.points(), c.points());
        assert_eq!(back.weights(), c.weights());
    }

    #[test]
    fn parse_errors() {
        assert!(WeightedCloud::read_gmt("1 2 3\n".as_bytes()).is_err());
        assert!(WeightedCloud::read_gmt("#gmt-cloud n=2 m=1\n1 2\n".as_bytes()).is_err());
        assert!(WeightedCloud::read_gmt("#gmt-cloud n=2 m=1\n1 x 3\n".as_bytes()).is_err());
        assert!(WeightedCloud::read_gmt("#gmt-cloud n=2 m=1\n# only a comment\n".as_bytes()).is_err());
    }
}
