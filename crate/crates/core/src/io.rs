//! JSON file formats for tensors and vectors.
//!
//! Tensor: `{"order": m, "dim": n, "data": [n^m numbers, row-major]}`
//! Vector: `{"dim": n, "data": [n numbers]}`
//!
//! Writers print every number with 17 significant digits, which round-trips
//! an `f64` exactly.

use std::fmt::Write as _;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::tensor::DenseTensor;
use crate::vector::Vector;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorFile {
    order: usize,
    dim: usize,
    data: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VectorFile {
    dim: usize,
    data: Vec<f64>,
}

pub fn tensor_from_json(text: &str) -> Result<DenseTensor> {
    let f: TensorFile = serde_json::from_str(text).map_err(|e| Error::Parse(format!("tensor file: {e}")))?;
    DenseTensor::new(f.order, f.dim, f.data)
}

pub fn vector_from_json(text: &str) -> Result<Vector> {
    let f: VectorFile = serde_json::from_str(text).map_err(|e| Error::Parse(format!("vector file: {e}")))?;
    if f.data.len() != f.dim {
        return Err(Error::Parse(format!(
            "vector file: field `data` has {} entries but `dim` is {}",
            f.data.len(),
            f.dim
        )));
    }
    Vector::new(f.data)
}

pub fn tensor_to_json(t: &DenseTensor) -> String {
    format!(
        "{{\"order\":{},\"dim\":{},\"data\":{}}}\n",
        t.order(),
        t.dim(),
        number_array(t.data())
    )
}

pub fn vector_to_json(x: &Vector) -> String {
    format!("{{\"dim\":{},\"data\":{}}}\n", x.dim(), number_array(x))
}

/// A JSON number with 17 significant digits.
pub fn full_precision(v: f64) -> String {
    format!("{v:.16e}")
}

fn number_array(values: &[f64]) -> String {
    let mut s = String::with_capacity(values.len() * 24 + 2);
    s.push('[');
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{v:.16e}");
    }
    s.push(']');
    s
}
