//! Row-pivoted LU factorization and the few dense kernels the solver and
//! condition checks need.

use crate::error::{Error, Result};
use crate::vector::{Matrix, Vector};

/// `P M = L U` with unit lower-triangular `L`, stored packed.
#[derive(Clone, Debug)]
pub struct LuFactorization {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    swaps: usize,
}

impl LuFactorization {
    /// Factors a square matrix. Fails with [`Error::SingularMatrix`] as soon
    /// as the best available pivot has magnitude `<= pivot_threshold`.
    pub fn factor(m: &Matrix, pivot_threshold: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Shape(format!(
                "LU needs a square matrix, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let n = m.rows();
        let mut lu = m.data().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        for k in 0..n {
            let (piv_row, piv_abs) = (k..n)
                .map(|r| (r, lu[r * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(piv_abs > pivot_threshold) {
                return Err(Error::SingularMatrix {
                    column: k,
                    pivot: piv_abs,
                    threshold: pivot_threshold,
                });
            }
            if piv_row != k {
                for c in 0..n {
                    lu.swap(k * n + c, piv_row * n + c);
                }
                perm.swap(k, piv_row);
                swaps += 1;
            }
            let pivot = lu[k * n + k];
            for r in k + 1..n {
                let f = lu[r * n + k] / pivot;
                lu[r * n + k] = f;
                if f != 0.0 {
                    for c in k + 1..n {
                        lu[r * n + c] -= f * lu[k * n + c];
                    }
                }
            }
        }
        Ok(LuFactorization { n, lu, perm, swaps })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if rhs.len() != n {
            return Err(Error::mismatch("linear solve", n, rhs.len()));
        }
        let mut y: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for r in 0..n {
            let s: f64 = (0..r).map(|c| self.lu[r * n + c] * y[c]).sum();
            y[r] -= s;
        }
        for r in (0..n).rev() {
            let s: f64 = (r + 1..n).map(|c| self.lu[r * n + c] * y[c]).sum();
            y[r] = (y[r] - s) / self.lu[r * n + r];
        }
        Ok(y)
    }

    pub fn determinant(&self) -> f64 {
        let d: f64 = (0..self.n).map(|i| self.lu[i * self.n + i]).product();
        if self.swaps.is_multiple_of(2) {
            d
        } else {
            -d
        }
    }

    pub fn inverse(&self) -> Matrix {
        let n = self.n;
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e).expect("dimension checked");
            for (i, v) in col.into_iter().enumerate() {
                inv.set(i, j, v);
            }
        }
        inv
    }
}

/// Solves `M d = rhs` through [`LuFactorization`].
pub fn linear_solve(m: &Matrix, rhs: &[f64], pivot_threshold: f64) -> Result<Vector> {
    if m.rows() != rhs.len() {
        return Err(Error::mismatch("linear solve", m.rows(), rhs.len()));
    }
    let lu = LuFactorization::factor(m, pivot_threshold)?;
    Ok(Vector::from_vec_unchecked(lu.solve(rhs)?))
}

/// Smallest singular value, as the square root of the smallest eigenvalue
/// of the Gram matrix `M^T M`.
pub fn min_singular_value(m: &Matrix) -> f64 {
    let gram = m.transpose().mul_mat(m).expect("shapes agree");
    let eig = nalgebra::SymmetricEigen::new(gram.to_nalgebra());
    eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_returns_rhs() {
        let rhs = [1.0, -2.0, 3.5];
        let d = linear_solve(&Matrix::identity(3), &rhs, 1e-12).unwrap();
        assert_eq!(d.as_slice(), &rhs);
    }

    #[test]
    fn random_well_conditioned_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 10;
        for _ in 0..20 {
            let mut data: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for i in 0..n {
                data[i * n + i] += n as f64;
            }
            let m = Matrix::new(n, n, data).unwrap();
            let rhs: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let d = linear_solve(&m, &rhs, 1e-12).unwrap();
            let r = m.mul_vec(&d).unwrap().sub(&Vector::new(rhs.clone()).unwrap()).unwrap();
            let rhs_norm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(r.norm() <= 1e-10 * rhs_norm);
        }
    }

    #[test]
    fn duplicate_rows_are_singular() {
        let m = Matrix::from_rows(&[&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], &[0.0, 1.0, 5.0]]).unwrap();
        assert!(matches!(
            linear_solve(&m, &[1.0, 1.0, 1.0], 1e-12),
            Err(Error::SingularMatrix { .. })
        ));
    }

    #[test]
    fn determinant_and_inverse() {
        let m = Matrix::from_rows(&[&[0.0, 2.0], &[3.0, 1.0]]).unwrap();
        let lu = LuFactorization::factor(&m, 0.0).unwrap();
        assert!((lu.determinant() + 6.0).abs() < 1e-14);
        let prod = m.mul_mat(&lu.inverse()).unwrap();
        for (a, e) in prod.data().iter().zip(Matrix::identity(2).data()) {
            assert!((a - e).abs() < 1e-15);
        }
    }

    #[test]
    fn singular_values_by_hand() {
        assert!((min_singular_value(&Matrix::identity(3).scaled(3.0)) - 3.0).abs() < 1e-12);
        let m = Matrix::diagonal(&[2.0, -0.5, 4.0]);
        assert!((min_singular_value(&m) - 0.5).abs() < 1e-12);
    }
}
