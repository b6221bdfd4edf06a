//! Nested-loop reference implementations. They index the flat data by hand
//! and never call the contraction or product routines under test.

#![allow(dead_code)]

use rand::distributions::{Distribution, Uniform};
use rand::Rng;
use tave_core::DenseTensor;

/// Calls `f` on every index tuple of length `len` over `0..n`, last index fastest.
pub fn for_each_tuple(len: usize, n: usize, mut f: impl FnMut(&[usize])) {
    let mut idx = vec![0usize; len];
    loop {
        f(&idx);
        let mut k = len;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < n {
                break;
            }
            idx[k] = 0;
        }
    }
}

pub fn flat(n: usize, idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * n + i)
}

pub fn at(t: &DenseTensor, idx: &[usize]) -> f64 {
    t.data()[flat(t.dim(), idx)]
}

pub fn abs_tensor(t: &DenseTensor) -> DenseTensor {
    DenseTensor::new(t.order(), t.dim(), t.data().iter().map(|v| v.abs()).collect()).unwrap()
}

pub fn random_tensor(rng: &mut impl Rng, m: usize, n: usize) -> DenseTensor {
    let d = Uniform::new(-1.0, 1.0);
    DenseTensor::new(m, n, (0..n.pow(m as u32)).map(|_| d.sample(rng)).collect()).unwrap()
}

pub fn random_vec(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let d = Uniform::new(-1.0, 1.0);
    (0..n).map(|_| d.sample(rng)).collect()
}

/// `(A x^{m-1})_i = sum a_{i i2..im} x_{i2} .. x_{im}`.
pub fn naive_vec(a: &DenseTensor, x: &[f64]) -> Vec<f64> {
    let (m, n) = (a.order(), a.dim());
    let mut y = vec![0.0; n];
    for (i, yi) in y.iter_mut().enumerate() {
        for_each_tuple(m - 1, n, |tail| {
            let mut idx = vec![i];
            idx.extend_from_slice(tail);
            *yi += at(a, &idx) * tail.iter().map(|&k| x[k]).product::<f64>();
        });
    }
    y
}

/// `(A x^{m-2})_{ij}`, row-major.
pub fn naive_mat(a: &DenseTensor, x: &[f64]) -> Vec<f64> {
    let (m, n) = (a.order(), a.dim());
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            for_each_tuple(m - 2, n, |tail| {
                let mut idx = vec![i, j];
                idx.extend_from_slice(tail);
                out[i * n + j] += at(a, &idx) * tail.iter().map(|&k| x[k]).product::<f64>();
            });
        }
    }
    out
}

/// Shao product, entry by entry from its defining sum.
pub fn naive_shao(a: &DenseTensor, b: &DenseTensor) -> DenseTensor {
    let (m, k, n) = (a.order(), b.order(), a.dim());
    let r = (m - 1) * (k - 1) + 1;
    let mut data = vec![0.0; n.pow(r as u32)];
    for_each_tuple(r, n, |out| {
        let i = out[0];
        let alphas: Vec<&[usize]> = (0..m - 1).map(|t| &out[1 + t * (k - 1)..1 + (t + 1) * (k - 1)]).collect();
        let mut s = 0.0;
        for_each_tuple(m - 1, n, |inner| {
            let mut aidx = vec![i];
            aidx.extend_from_slice(inner);
            let mut term = at(a, &aidx);
            for (t, &j) in inner.iter().enumerate() {
                let mut bidx = vec![j];
                bidx.extend_from_slice(alphas[t]);
                term *= at(b, &bidx);
            }
            s += term;
        });
        data[flat(n, out)] = s;
    });
    DenseTensor::new(r, n, data).unwrap()
}

pub fn naive_inf_norm(a: &DenseTensor) -> f64 {
    let n = a.dim();
    (0..n)
        .map(|i| {
            let mut s = 0.0;
            for_each_tuple(a.order() - 1, n, |tail| {
                let mut idx = vec![i];
                idx.extend_from_slice(tail);
                s += at(a, &idx).abs();
            });
            s
        })
        .fold(0.0, f64::max)
}

pub fn naive_frob(a: &DenseTensor) -> f64 {
    let mut s = 0.0;
    for_each_tuple(a.order(), a.dim(), |idx| s += at(a, idx).powi(2));
    s.sqrt()
}

pub fn naive_majorization(a: &DenseTensor) -> Vec<f64> {
    let n = a.dim();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut idx = vec![j; a.order()];
            idx[0] = i;
            out[i * n + j] = at(a, &idx);
        }
    }
    out
}

/// Largest `|got - want|` divided by the matching entry of `scale`
/// (a magnitude bound on the computation, floored at tiny).
pub fn max_rel_err(got: &[f64], want: &[f64], scale: &[f64]) -> f64 {
    assert_eq!(got.len(), want.len());
    got.iter()
        .zip(want)
        .zip(scale)
        .map(|((g, w), s)| (g - w).abs() / s.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
