use nalgebra::DMatrix;

use super::Vector;
use crate::error::{check_dim, Error, Result};

/// Non-decreasing index tuples of length `degree` over `0..m`, in
/// lexicographic order. These label the monomials of a homogeneous form.
pub fn monomials(m: usize, degree: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if m == 0 {
        if degree == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    let mut cur = vec![0usize; degree];
    loop {
        out.push(cur.clone());
        // advance to the next non-decreasing tuple
        let mut pos = degree;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if cur[pos] + 1 < m {
                let v = cur[pos] + 1;
                for c in cur.iter_mut().skip(pos) {
                    *c = v;
                }
                break;
            }
        }
    }
}

/// A homogeneous polynomial map of degree i from tangent coordinates (R^m) to
/// normal coordinates (R^(n-m)).
///
/// `coeffs[(k, j)]` multiplies the monomial `monomials[j]` in normal
/// component k, so x^2/2 has coefficient 0.5.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousForm {
    degree: usize,
    tangent_dim: usize,
    monomials: Vec<Vec<usize>>,
    coeffs: DMatrix<f64>,
}

fn monomial_value(beta: &[usize], chi: &[f64]) -> f64 {
    beta.iter().map(|&b| chi[b]).product()
}

/// Sum over permutations sigma of prod_l w_l[beta_sigma(l)], i.e. the
/// permanent of the matrix (w_l[beta_p]).
fn permanent(beta: &[usize], args: &[&[f64]]) -> f64 {
    fn rec(l: usize, used: u32, beta: &[usize], args: &[&[f64]]) -> f64 {
        if l == beta.len() {
            return 1.0;
        }
        let mut s = 0.0;
        for p in 0..beta.len() {
            if used & (1 << p) == 0 {
                let w = args[l][beta[p]];
                if w != 0.0 {
                    s += w * rec(l + 1, used | (1 << p), beta, args);
                }
            }
        }
        s
    }
    rec(0, 0, beta, args)
}

impl HomogeneousForm {
    pub fn zero(degree: usize, tangent_dim: usize, normal_dim: usize) -> Self {
        let monomials = monomials(tangent_dim, degree);
        let coeffs = DMatrix::zeros(normal_dim, monomials.len());
        HomogeneousForm { degree, tangent_dim, monomials, coeffs }
    }

    pub fn from_coeffs(degree: usize, tangent_dim: usize, coeffs: DMatrix<f64>) -> Result<Self> {
        let monomials = monomials(tangent_dim, degree);
        check_dim(monomials.len(), coeffs.ncols())?;
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("non-finite form coefficient".into()));
        }
        Ok(HomogeneousForm { degree, tangent_dim, monomials, coeffs })
    }

    /// Builds a form from (multi-index, normal coefficient vector) pairs. Any
    /// ordering of an index tuple is accepted; repeated tuples accumulate.
    pub fn from_terms(degree: usize, tangent_dim: usize, normal_dim: usize, terms: &[(Vec<usize>, Vec<f64>)]) -> Result<Self> {
        let mut f = Self::zero(degree, tangent_dim, normal_dim);
        for (idx, c) in terms {
            check_dim(degree, idx.len())?;
            check_dim(normal_dim, c.len())?;
            let mut s = idx.clone();
            s.sort_unstable();
            let j = f
                .monomials
                .iter()
                .position(|b| *b == s)
                .ok_or_else(|| Error::InvalidParameter(format!("index {idx:?} out of range")))?;
            for (k, v) in c.iter().enumerate() {
                f.coeffs[(k, j)] += v;
            }
        }
        Ok(f)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn tangent_dim(&self) -> usize {
        self.tangent_dim
    }

    pub fn normal_dim(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn monomials(&self) -> &[Vec<usize>] {
        &self.monomials
    }

    pub fn coeffs(&self) -> &DMatrix<f64> {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut DMatrix<f64> {
        &mut self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |a, c| a.max(c.abs()))
    }

    /// Sum of |coefficient|, a bound for |phi(x)| / |x|^i.
    pub fn coeff_l1(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }

    pub fn eval(&self, chi: &[f64]) -> Vector {
        let mut out = Vector::zeros(self.normal_dim());
        for (j, beta) in self.monomials.iter().enumerate() {
            let v = monomial_value(beta, chi);
            if v != 0.0 {
                out.axpy(v, &self.coeffs.column(j), 1.0);
            }
        }
        out
    }

    /// Jacobian with respect to the tangent coordinates, (n-m) x m.
    pub fn differential(&self, chi: &[f64]) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.normal_dim(), self.tangent_dim);
        for (j, beta) in self.monomials.iter().enumerate() {
            for p in 0..beta.len() {
                // derivative of prod_l chi[beta_l] with respect to the p-th factor
                let mut d = 1.0;
                for (l, &b) in beta.iter().enumerate() {
                    if l != p {
                        d *= chi[b];
                    }
                }
                if d != 0.0 {
                    let col = self.coeffs.column(j);
                    let mut target = out.column_mut(beta[p]);
                    target.axpy(d, &col, 1.0);
                }
            }
        }
        out
    }

    /// The i-th differential D^i phi(0) evaluated on tangent-coordinate
    /// vectors w_1..w_i. For w_l all equal to x this is i! phi(x).
    pub fn polarized(&self, args: &[&[f64]]) -> Result<Vector> {
        check_dim(self.degree, args.len())?;
        for a in args {
            check_dim(self.tangent_dim, a.len())?;
        }
        let mut out = Vector::zeros(self.normal_dim());
        for (j, beta) in self.monomials.iter().enumerate() {
            let v = permanent(beta, args);
            if v != 0.0 {
                out.axpy(v, &self.coeffs.column(j), 1.0);
            }
        }
        Ok(out)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut f = self.clone();
        f.coeffs *= s;
        f
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.degree, other.degree)?;
        check_dim(self.tangent_dim, other.tangent_dim)?;
        check_dim(self.normal_dim(), other.normal_dim())?;
        let mut f = self.clone();
        f.coeffs += &other.coeffs;
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn monomial_counts() {
        for m in 1..4 {
            for d in 0..5 {
                assert_eq!(monomials(m, d).len(), binom(m + d - 1, d));
            }
        }
        assert_eq!(monomials(2, 2), vec![vec![0, 0], vec![0, 1], vec![1, 1]]);
    }

    #[test]
    fn parabola_form() {
        let f = HomogeneousForm::from_terms(2, 1, 1, &[(vec![0, 0], vec![0.5])]).unwrap();
        assert!((f.eval(&[3.0])[0] - 4.5).abs() < 1e-15);
        assert!((f.differential(&[3.0])[(0, 0)] - 3.0).abs() < 1e-15);
        // D^2 phi(e1, e1) = 2 * 0.5
        assert!((f.polarized(&[&[1.0], &[1.0]]).unwrap()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mixed_term_polarization() {
        // phi(x, y) = x*y: D^2 phi(e1, e2) = 1, D^2 phi(e1, e1) = 0
        let f = HomogeneousForm::from_terms(2, 2, 1, &[(vec![1, 0], vec![1.0])]).unwrap();
        assert_eq!(f.polarized(&[&[1.0, 0.0], &[0.0, 1.0]]).unwrap()[0], 1.0);
        assert_eq!(f.polarized(&[&[1.0, 0.0], &[1.0, 0.0]]).unwrap()[0], 0.0);
    }

    fn form_strategy(degree: usize) -> impl Strategy<Value = HomogeneousForm> {
        let n = monomials(2, degree).len();
        prop::collection::vec(-2.0..2.0f64, n).prop_map(move |c| {
            HomogeneousForm::from_coeffs(degree, 2, DMatrix::from_row_slice(1, c.len(), &c)).unwrap()
        })
    }

    proptest! {
        // D^i phi(x, ..., x) = i! phi(x) for homogeneous phi of degree i.
        #[test]
        fn polarization_diagonal(f in (1usize..5).prop_flat_map(form_strategy), x in -1.0..1.0f64, y in -1.0..1.0f64) {
            let chi = [x, y];
            let args: Vec<&[f64]> = (0..f.degree()).map(|_| &chi[..]).collect();
            let fact: f64 = (1..=f.degree()).map(|k| k as f64).product();
            let lhs = f.polarized(&args).unwrap()[0];
            let rhs = fact * f.eval(&chi)[0];
            prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + rhs.abs()));
        }

        // Euler: D phi(x) x = i phi(x)
        #[test]
        fn euler_identity(f in (1usize..5).prop_flat_map(form_strategy), x in -1.0..1.0f64, y in -1.0..1.0f64) {
            let chi = [x, y];
            let d = f.differential(&chi);
            let lhs = d[(0, 0)] * x + d[(0, 1)] * y;
            let rhs = f.degree() as f64 * f.eval(&chi)[0];
            prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + rhs.abs()));
        }
    }
}
