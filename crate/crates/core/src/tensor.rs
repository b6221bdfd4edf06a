//! Dense square tensors and the multilinear primitives built on them.
//!
//! A tensor of order `m` and dimension `n` holds `n^m` reals in row-major
//! order. In mathematical notation an entry is `a_{i1 i2 ... im}` with
//! 1-based indices and lives at flat offset `sum_k (i_k - 1) * n^(m-k)`.
//! The Rust API takes 0-based indices, so `get(&[0, 1, 1])` reads
//! `a_{122}`.
//!
//! Memory is `8 * n^m` bytes. Construction is refused above
//! [`DEFAULT_ELEMENT_CAP`] elements unless a larger cap is passed to
//! [`DenseTensor::with_cap`].
//!
//! Contractions form the rank-one weight `x ⊗ ... ⊗ x` over the trailing
//! multi-index (first factor varying slowest, products accumulated left to
//! right) and take a dot product with each contiguous slice, summing the
//! trailing multi-index in lexicographic order.

use crate::error::{Error, Result};
use crate::vector::{dot, Matrix, Vector};

pub const DEFAULT_ELEMENT_CAP: usize = 100_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    order: usize,
    dim: usize,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn new(order: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        Self::with_cap(order, dim, data, DEFAULT_ELEMENT_CAP)
    }

    pub fn with_cap(order: usize, dim: usize, data: Vec<f64>, cap: usize) -> Result<Self> {
        let len = checked_len(order, dim, cap)?;
        if data.len() != len {
            return Err(Error::Shape(format!(
                "order {order}, dim {dim} needs {len} entries, got {}",
                data.len()
            )));
        }
        if let Some(offset) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { offset });
        }
        Ok(DenseTensor { order, dim, data })
    }

    pub fn zeros(order: usize, dim: usize) -> Result<Self> {
        let len = checked_len(order, dim, DEFAULT_ELEMENT_CAP)?;
        Ok(DenseTensor {
            order,
            dim,
            data: vec![0.0; len],
        })
    }

    /// Builds a tensor entry by entry from 0-based multi-indices, visited in
    /// storage order.
    pub fn from_fn(order: usize, dim: usize, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let len = checked_len(order, dim, DEFAULT_ELEMENT_CAP)?;
        let mut data = Vec::with_capacity(len);
        let mut idx = vec![0usize; order];
        for _ in 0..len {
            data.push(f(&idx));
            advance(&mut idx, dim);
        }
        DenseTensor::new(order, dim, data)
    }

    /// The unit tensor: 1 where all indices agree, 0 elsewhere.
    pub fn unit(order: usize, dim: usize) -> Result<Self> {
        let mut t = DenseTensor::zeros(order, dim)?;
        let step = diagonal_stride(order, dim);
        for j in 0..dim {
            t.data[j * step] = 1.0;
        }
        Ok(t)
    }

    pub fn from_matrix(m: &Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Shape(format!(
                "a {}x{} matrix is not a square order-2 tensor",
                m.rows(),
                m.cols()
            )));
        }
        DenseTensor::new(2, m.rows(), m.data().to_vec())
    }

    pub fn from_vector(x: &Vector) -> Self {
        DenseTensor {
            order: 1,
            dim: x.dim(),
            data: x.as_slice().to_vec(),
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Flat offset of a 0-based multi-index.
    pub fn offset(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.order, "multi-index length must equal the order");
        idx.iter().fold(0, |acc, &i| {
            assert!(i < self.dim, "index {i} out of range for dim {}", self.dim);
            acc * self.dim + i
        })
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    /// Number of entries in one leading-index slice, `n^(m-1)`.
    pub fn row_len(&self) -> usize {
        self.data.len() / self.dim
    }

    /// The order-(m-1) slice `a_{i, ., ..., .}` as a flat slice.
    pub fn row(&self, i: usize) -> &[f64] {
        let r = self.row_len();
        &self.data[i * r..(i + 1) * r]
    }

    pub fn scaled(&self, factor: f64) -> DenseTensor {
        DenseTensor {
            order: self.order,
            dim: self.dim,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn add(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.check_same_shape(other, "tensor addition")?;
        Ok(DenseTensor {
            order: self.order,
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.add(&other.scaled(-1.0))
    }

    fn check_same_shape(&self, other: &DenseTensor, context: &'static str) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::mismatch(context, self.dim, other.dim));
        }
        if self.order != other.order {
            return Err(Error::Shape(format!(
                "{context}: orders {} and {} differ",
                self.order, other.order
            )));
        }
        Ok(())
    }

    /// `A x^{m-1}`: the vector with entries
    /// `sum_{i2..im} a_{i i2..im} x_{i2} ... x_{im}`.
    pub fn contract_to_vector(&self, x: &[f64]) -> Result<Vector> {
        self.check_contraction(x, "tensor-vector contraction")?;
        let w = outer_power(x, self.order - 1);
        Ok(Vector::from_vec_unchecked(
            (0..self.dim).map(|i| dot(self.row(i), &w)).collect(),
        ))
    }

    /// `A x^{m-2}`: the matrix with entries
    /// `sum_{i3..im} a_{i j i3..im} x_{i3} ... x_{im}`. For `m = 2` this is
    /// the tensor itself read as a matrix.
    pub fn contract_to_matrix(&self, x: &[f64]) -> Result<Matrix> {
        self.check_contraction(x, "tensor-matrix contraction")?;
        let n = self.dim;
        let w = outer_power(x, self.order - 2);
        let block = w.len();
        let data = self.data.chunks_exact(block).map(|s| dot(s, &w)).collect();
        Ok(Matrix::from_vec_unchecked(n, n, data))
    }

    /// Both `A x^{m-2}` and `A x^{m-1} = (A x^{m-2}) x` from one pass.
    pub(crate) fn contract_pair(&self, x: &[f64]) -> Result<(Matrix, Vec<f64>)> {
        let m = self.contract_to_matrix(x)?;
        let v = m.mul_slice(x);
        Ok((m, v))
    }

    fn check_contraction(&self, x: &[f64], context: &'static str) -> Result<()> {
        if self.order < 2 {
            return Err(Error::Order {
                context,
                requirement: ">= 2",
                order: self.order,
            });
        }
        if x.len() != self.dim {
            return Err(Error::mismatch(context, self.dim, x.len()));
        }
        Ok(())
    }

    /// `A x^m = x^T (A x^{m-1})`.
    pub fn form_value(&self, x: &[f64]) -> Result<f64> {
        let y = self.contract_to_vector(x)?;
        Ok(dot(&y, x))
    }

    /// `max_i sum_{i2..im} |a_{i i2..im}|`.
    pub fn inf_norm(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `M(A)_{ij} = a_{i j j ... j}`.
    pub fn majorization_matrix(&self) -> Result<Matrix> {
        if self.order < 2 {
            return Err(Error::Order {
                context: "majorization matrix",
                requirement: ">= 2",
                order: self.order,
            });
        }
        let n = self.dim;
        let stride = diagonal_stride(self.order - 1, n);
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            let row = self.row(i);
            for j in 0..n {
                m.set(i, j, row[j * stride]);
            }
        }
        Ok(m)
    }

    /// True when every entry whose trailing indices are not all equal has
    /// magnitude at most `tol`.
    pub fn is_row_diagonal(&self, tol: f64) -> bool {
        if self.order < 2 {
            return false;
        }
        let stride = diagonal_stride(self.order - 1, self.dim);
        (0..self.dim).all(|i| {
            self.row(i)
                .iter()
                .enumerate()
                .all(|(t, v)| t % stride == 0 || v.abs() <= tol)
        })
    }

    /// Averages each leading-index slice over all permutations of the
    /// trailing indices. Classes whose entries already agree are left
    /// bit-for-bit unchanged.
    pub fn semi_symmetrize(&self) -> Result<DenseTensor> {
        if self.order < 2 {
            return Err(Error::Order {
                context: "semi-symmetrization",
                requirement: ">= 2",
                order: self.order,
            });
        }
        let classes = permutation_classes(self.order - 1, self.dim);
        let mut data = Vec::with_capacity(self.data.len());
        for i in 0..self.dim {
            data.extend(average_classes(self.row(i), &classes));
        }
        Ok(DenseTensor {
            order: self.order,
            dim: self.dim,
            data,
        })
    }

    /// Averages over all permutations of all `m` indices.
    pub fn symmetrize(&self) -> DenseTensor {
        let classes = permutation_classes(self.order, self.dim);
        DenseTensor {
            order: self.order,
            dim: self.dim,
            data: average_classes(&self.data, &classes),
        }
    }

    pub fn is_semi_symmetric(&self, tol: f64) -> bool {
        if self.order < 2 {
            return false;
        }
        let classes = permutation_classes(self.order - 1, self.dim);
        (0..self.dim).all(|i| {
            let row = self.row(i);
            row.iter()
                .zip(&classes)
                .all(|(v, &c)| (v - row[c]).abs() <= tol)
        })
    }

    /// The product `A · B` of an order-`p` tensor with an order-`q` tensor:
    ///
    /// `C_{i j1 ... j(p-1)} = sum_{i2..ip} a_{i i2..ip} b_{i2 j1} ... b_{ip j(p-1)}`
    ///
    /// where every `j_k` is a (q-1)-multi-index. The result has order
    /// `(p-1)(q-1) + 1`. An order-1 `B` is a vector and gives `A x^{p-1}`;
    /// two matrices give the matrix product.
    pub fn shao_product(&self, other: &DenseTensor) -> Result<DenseTensor> {
        if self.order < 2 {
            return Err(Error::Order {
                context: "tensor product (left factor)",
                requirement: ">= 2",
                order: self.order,
            });
        }
        if self.dim != other.dim {
            return Err(Error::mismatch("tensor product", self.dim, other.dim));
        }
        let n = self.dim;
        let p = self.order;
        let q = other.order;
        let out_order = (p - 1) * (q - 1) + 1;
        let out_len = checked_len(out_order, n, DEFAULT_ELEMENT_CAP)?;

        // B viewed as an n x J matrix, J = n^(q-1).
        let cols = other.row_len();
        let tuples = out_len / n;
        let mut data = vec![0.0; out_len];
        let mut tuple = vec![0usize; p - 1];
        let mut columns: Vec<Vec<f64>> = vec![vec![0.0; n]; p - 1];
        for t in 0..tuples {
            for (k, &jj) in tuple.iter().enumerate() {
                for (l, c) in columns[k].iter_mut().enumerate() {
                    *c = other.data[l * cols + jj];
                }
            }
            let w = outer_product(&columns);
            for i in 0..n {
                data[i * tuples + t] = dot(self.row(i), &w);
            }
            advance(&mut tuple, cols);
        }
        Ok(DenseTensor {
            order: out_order,
            dim: n,
            data,
        })
    }
}

pub(crate) fn checked_len(order: usize, dim: usize, cap: usize) -> Result<usize> {
    if order == 0 || dim == 0 {
        return Err(Error::Shape(format!(
            "order and dim must be at least 1, got order {order}, dim {dim}"
        )));
    }
    let elements = (dim as u128).checked_pow(order as u32).unwrap_or(u128::MAX);
    if elements > cap as u128 {
        return Err(Error::TooLarge {
            order,
            dim,
            elements,
            cap,
        });
    }
    Ok(elements as usize)
}

/// Offset step between consecutive diagonal entries `(j, ..., j)` of an
/// order-`k` block: `1 + n + ... + n^(k-1)`.
fn diagonal_stride(k: usize, n: usize) -> usize {
    (0..k).fold(0, |acc, _| acc * n + 1)
}

/// Odometer increment of a multi-index, last position fastest.
pub(crate) fn advance(idx: &mut [usize], base: usize) {
    for slot in idx.iter_mut().rev() {
        *slot += 1;
        if *slot < base {
            return;
        }
        *slot = 0;
    }
}

/// `x ⊗ x ⊗ ... ⊗ x` (`k` factors), first factor varying slowest.
pub(crate) fn outer_power(x: &[f64], k: usize) -> Vec<f64> {
    let mut w = vec![1.0];
    for _ in 0..k {
        w = w.iter().flat_map(|&a| x.iter().map(move |&b| a * b)).collect();
    }
    w
}

pub(crate) fn outer_product(factors: &[Vec<f64>]) -> Vec<f64> {
    let mut w = vec![1.0];
    for f in factors {
        w = w.iter().flat_map(|&a| f.iter().map(move |&b| a * b)).collect();
    }
    w
}

/// For every flat offset of an order-`k` block, the offset of its
/// representative (indices sorted ascending).
fn permutation_classes(k: usize, n: usize) -> Vec<usize> {
    let len = n.pow(k as u32);
    let mut classes = Vec::with_capacity(len);
    let mut idx = vec![0usize; k];
    let mut sorted = vec![0usize; k];
    for _ in 0..len {
        sorted.copy_from_slice(&idx);
        sorted.sort_unstable();
        classes.push(sorted.iter().fold(0, |acc, &i| acc * n + i));
        advance(&mut idx, n);
    }
    classes
}

fn average_classes(values: &[f64], classes: &[usize]) -> Vec<f64> {
    let mut sum = vec![0.0; values.len()];
    let mut count = vec![0u32; values.len()];
    let mut uniform = vec![true; values.len()];
    for (v, &c) in values.iter().zip(classes) {
        sum[c] += v;
        count[c] += 1;
        if *v != values[c] {
            uniform[c] = false;
        }
    }
    values
        .iter()
        .zip(classes)
        .map(|(v, &c)| if uniform[c] { *v } else { sum[c] / count[c] as f64 })
        .collect()
}
