use nalgebra::{DMatrix, SymmetricEigen};

use super::Vector;
use crate::error::{check_dim, Error, Result};

/// An m-dimensional linear subspace of R^n with a deterministic orthonormal
/// basis and a matching basis of the orthogonal complement.
#[derive(Debug, Clone)]
pub struct Plane {
    basis: DMatrix<f64>,
    normal_basis: DMatrix<f64>,
    projector: DMatrix<f64>,
}

const RANK_TOL: f64 = 1e-10;

/// Modified Gram-Schmidt with largest-residual pivoting. Starts from the
/// already orthonormal `fixed` columns and returns the vectors it adds.
fn pivoted_gram_schmidt(fixed: &[Vector], candidates: &[Vector], max_new: usize) -> Vec<Vector> {
    let scale = candidates.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut rem: Vec<Vector> = candidates.to_vec();
    for q in fixed {
        for r in rem.iter_mut() {
            for _ in 0..2 {
                let c = q.dot(r);
                r.axpy(-c, q, 1.0);
            }
        }
    }
    let mut out: Vec<Vector> = Vec::new();
    while out.len() < max_new {
        let mut best = None;
        for (i, r) in rem.iter().enumerate() {
            let n = r.norm();
            match best {
                Some((_, bn)) if n <= bn => {}
                _ => best = Some((i, n)),
            }
        }
        let Some((idx, norm)) = best else { break };
        if norm <= RANK_TOL * scale.max(f64::MIN_POSITIVE) || norm == 0.0 {
            break;
        }
        let q = &rem[idx] / norm;
        rem[idx].fill(0.0);
        for r in rem.iter_mut() {
            for _ in 0..2 {
                let c = q.dot(r);
                r.axpy(-c, &q, 1.0);
            }
        }
        out.push(q);
    }
    out
}

fn columns(vs: &[Vector], n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, vs.len());
    for (j, v) in vs.iter().enumerate() {
        m.set_column(j, v);
    }
    m
}

impl Plane {
    /// Orthonormalizes a spanning set. The dimension is the numerical rank.
    pub fn from_spanning(n: usize, vectors: &[Vector]) -> Result<Plane> {
        for v in vectors {
            check_dim(n, v.len())?;
        }
        let basis = pivoted_gram_schmidt(&[], vectors, n);
        Ok(Self::from_orthonormal(n, basis))
    }

    /// Like [`Plane::from_spanning`] but insists on dimension `m`.
    pub fn with_dim(n: usize, m: usize, vectors: &[Vector]) -> Result<Plane> {
        let p = Self::from_spanning(n, vectors)?;
        if p.dim() != m {
            return Err(Error::DegeneratePlane { rank: p.dim(), needed: m });
        }
        Ok(p)
    }

    /// Keeps the given basis (and its order). The vectors must already be
    /// orthonormal up to `1e-8`; they are re-orthogonalized in order.
    pub fn from_orthonormal_basis(n: usize, vectors: &[Vector]) -> Result<Plane> {
        for v in vectors {
            check_dim(n, v.len())?;
        }
        for (i, a) in vectors.iter().enumerate() {
            for (j, b) in vectors.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                if (a.dot(b) - want).abs() > 1e-8 {
                    return Err(Error::InvalidParameter("basis is not orthonormal".into()));
                }
            }
        }
        let mut out: Vec<Vector> = Vec::new();
        for v in vectors {
            let mut r = v.clone();
            for q in &out {
                let c = q.dot(&r);
                r.axpy(-c, q, 1.0);
            }
            let nr = r.norm();
            out.push(r / nr);
        }
        Ok(Self::from_orthonormal(n, out))
    }

    pub fn coordinate(n: usize, axes: &[usize]) -> Result<Plane> {
        let vs: Vec<Vector> = axes
            .iter()
            .map(|&i| {
                if i >= n {
                    return Err(Error::InvalidParameter(format!("axis {i} out of range for R^{n}")));
                }
                let mut v = Vector::zeros(n);
                v[i] = 1.0;
                Ok(v)
            })
            .collect::<Result<_>>()?;
        Self::with_dim(n, axes.len(), &vs)
    }

    pub fn zero(n: usize) -> Plane {
        Self::from_orthonormal(n, Vec::new())
    }

    fn from_orthonormal(n: usize, basis: Vec<Vector>) -> Plane {
        let m = basis.len();
        let std: Vec<Vector> = (0..n)
            .map(|i| {
                let mut e = Vector::zeros(n);
                e[i] = 1.0;
                e
            })
            .collect();
        let normals = pivoted_gram_schmidt(&basis, &std, n - m);
        debug_assert_eq!(normals.len(), n - m);
        let b = columns(&basis, n);
        let projector = &b * b.transpose();
        Plane { basis: b, normal_basis: columns(&normals, n), projector }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn codim(&self) -> usize {
        self.normal_basis.ncols()
    }

    /// n x m matrix with orthonormal columns.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// n x (n-m) matrix with orthonormal columns spanning the complement.
    pub fn normal_basis(&self) -> &DMatrix<f64> {
        &self.normal_basis
    }

    pub fn basis_vectors(&self) -> Vec<Vector> {
        (0..self.dim()).map(|j| self.basis.column(j).into_owned()).collect()
    }

    pub fn normal_vectors(&self) -> Vec<Vector> {
        (0..self.codim()).map(|j| self.normal_basis.column(j).into_owned()).collect()
    }

    pub fn projector(&self) -> &DMatrix<f64> {
        &self.projector
    }

    pub fn complement_projector(&self) -> DMatrix<f64> {
        DMatrix::identity(self.ambient_dim(), self.ambient_dim()) - &self.projector
    }

    pub fn complement(&self) -> Plane {
        Self::from_orthonormal(self.ambient_dim(), self.normal_vectors())
    }

    /// Returns (T-natural x, T-perp-natural x).
    pub fn project(&self, x: &Vector) -> Result<(Vector, Vector)> {
        check_dim(self.ambient_dim(), x.len())?;
        let t = &self.projector * x;
        let n = x - &t;
        Ok((t, n))
    }

    pub fn tangent_coords(&self, x: &Vector) -> Vector {
        self.basis.tr_mul(x)
    }

    pub fn normal_coords(&self, x: &Vector) -> Vector {
        self.normal_basis.tr_mul(x)
    }

    pub fn from_tangent_coords(&self, c: &Vector) -> Vector {
        &self.basis * c
    }

    pub fn from_normal_coords(&self, c: &Vector) -> Vector {
        &self.normal_basis * c
    }

    /// |T-perp-natural x|.
    pub fn normal_norm(&self, x: &Vector) -> f64 {
        self.normal_coords(x).norm()
    }

    pub fn tangent_norm(&self, x: &Vector) -> f64 {
        self.tangent_coords(x).norm()
    }

    /// Operator norm of the projector difference: the sine of the largest
    /// principal angle. Planes of different dimension are at distance 1.
    pub fn distance(&self, other: &Plane) -> f64 {
        if self.ambient_dim() != other.ambient_dim() || self.dim() != other.dim() {
            return 1.0;
        }
        let d = &self.projector - &other.projector;
        let eig = SymmetricEigen::new(d);
        eig.eigenvalues.iter().fold(0.0f64, |a, &l| a.max(l.abs())).min(1.0)
    }

    pub fn max_angle(&self, other: &Plane) -> f64 {
        self.distance(other).asin()
    }

    pub fn same_as(&self, other: &Plane, tol: f64) -> bool {
        self.dim() == other.dim() && self.distance(other) <= tol
    }

    pub fn contains(&self, v: &Vector, tol: f64) -> bool {
        v.len() == self.ambient_dim() && self.normal_norm(v) <= tol * v.norm().max(1.0)
    }

    /// Rotates tangent basis vector `i` towards normal basis vector `j`.
    pub fn rotated(&self, i: usize, j: usize, angle: f64) -> Plane {
        let mut vs = self.basis_vectors();
        let nu = self.normal_basis.column(j).into_owned();
        vs[i] = &vs[i] * angle.cos() + nu * angle.sin();
        Self::from_orthonormal(self.ambient_dim(), pivoted_gram_schmidt(&[], &vs, vs.len()))
    }

    /// Image of the plane under an orthogonal map.
    pub fn transformed(&self, rot: &DMatrix<f64>) -> Plane {
        let vs: Vec<Vector> = self.basis_vectors().iter().map(|v| rot * v).collect();
        Self::from_orthonormal(self.ambient_dim(), pivoted_gram_schmidt(&[], &vs, vs.len()))
    }
}

impl PartialEq for Plane {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other, 1e-10)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::vector;
    use proptest::prelude::*;

    #[test]
    fn coordinate_plane_in_r3() {
        let p = Plane::coordinate(3, &[0, 1]).unwrap();
        let (t, n) = p.project(&vector(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(t.as_slice(), &[1.0, 2.0, 0.0]);
        assert_eq!(n.as_slice(), &[0.0, 0.0, 3.0]);
        assert_eq!(p.codim(), 1);
        assert!((p.normal_basis()[(2, 0)].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn line_at_45_degrees() {
        let p = Plane::from_spanning(2, &[vector(&[1.0, 1.0])]).unwrap();
        let (t, n) = p.project(&vector(&[1.0, 0.0])).unwrap();
        assert!((t - vector(&[0.5, 0.5])).norm() < 1e-15);
        assert!((n - vector(&[0.5, -0.5])).norm() < 1e-15);
    }

    #[test]
    fn projection_dimension_mismatch() {
        let p = Plane::coordinate(3, &[0]).unwrap();
        assert!(matches!(p.project(&vector(&[1.0, 2.0])), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn degenerate_spanning_set() {
        let r = Plane::with_dim(2, 2, &[vector(&[1.0, 0.0]), vector(&[2.0, 0.0])]);
        assert!(matches!(r, Err(Error::DegeneratePlane { rank: 1, needed: 2 })));
    }

    #[test]
    fn distance_of_rotated_line() {
        let p = Plane::coordinate(2, &[0]).unwrap();
        let q = p.rotated(0, 0, 0.3);
        assert!((p.max_angle(&q) - 0.3).abs() < 1e-12);
    }

    fn vec3() -> impl Strategy<Value = Vector> {
        prop::collection::vec(-1.0..1.0f64, 3).prop_map(|v| Vector::from_vec(v))
    }

    proptest! {
        #[test]
        fn projector_identities(a in vec3(), b in vec3(), x in vec3()) {
            prop_assume!(a.norm() > 0.1 && b.norm() > 0.1);
            let p = Plane::from_spanning(3, &[a, b]).unwrap();
            let (t, n) = p.project(&x).unwrap();
            prop_assert!((&t + &n - &x).norm() < 1e-12);
            prop_assert!(t.dot(&n).abs() < 1e-12);
            let (tt, _) = p.project(&t).unwrap();
            prop_assert!((tt - &t).norm() < 1e-12);
            // orthonormality of the full frame
            let mut frame = p.basis().clone().insert_columns(p.dim(), p.codim(), 0.0);
            frame.view_mut((0, p.dim()), (3, p.codim())).copy_from(p.normal_basis());
            let g = frame.transpose() * &frame;
            prop_assert!((g - DMatrix::identity(3, 3)).norm() < 1e-12);
        }
    }
}
