//! Norm conventions: vectors carry the ℓ∞ norm, matrices the induced max-row-sum norm.

use nalgebra::{DMatrix, DVector};

use crate::Samples;

pub fn vec_norm(v: &DVector<f64>) -> f64 {
    v.amax()
}

/// Induced ℓ∞ operator norm (maximum absolute row sum).
pub fn op_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Same as [`op_norm`] for a column-major `d × d` block stored in a slice.
pub fn op_norm_slice(data: &[f64], d: usize) -> f64 {
    let mut best = 0.0f64;
    for i in 0..d {
        let mut s = 0.0;
        for j in 0..d {
            s += data[i + j * d].abs();
        }
        best = best.max(s);
    }
    best
}

pub fn eye(d: usize) -> DMatrix<f64> {
    DMatrix::identity(d, d)
}

/// Sup norm of column-stacked samples.
pub fn sup_norm(s: &Samples) -> f64 {
    s.amax()
}

/// Sup norm of the columns in `range`.
pub fn sup_norm_cols(s: &Samples, range: std::ops::Range<usize>) -> f64 {
    s.columns(range.start, range.end - range.start).amax()
}

pub fn sup_dist(a: &Samples, b: &Samples) -> f64 {
    (a - b).amax()
}

pub fn sup_dist_cols(a: &Samples, b: &Samples, range: std::ops::Range<usize>) -> f64 {
    let n = range.end - range.start;
    (a.columns(range.start, n) - b.columns(range.start, n)).amax()
}

/// Stacks a list of equally sized vectors as columns.
pub fn stack(cols: &[DVector<f64>], d: usize) -> Samples {
    let mut out = Samples::zeros(d, cols.len());
    for (j, c) in cols.iter().enumerate() {
        out.set_column(j, c);
    }
    out
}

/// Serializes a vector as a plain list of numbers.
pub fn ser_vec<S: serde::Serializer>(v: &DVector<f64>, s: S) -> Result<S::Ok, S::Error> {
    serde::Serialize::serialize(v.as_slice(), s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn max_row_sum() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, -2.0, 0.5, 0.25]);
        assert_eq!(op_norm(&m), 3.0);
        assert_eq!(op_norm_slice(m.as_slice(), 2), 3.0);
    }

    #[test]
    fn sup_over_columns() {
        let s = Samples::from_column_slice(1, 4, &[1.0, -5.0, 2.0, 0.0]);
        assert_eq!(sup_norm(&s), 5.0);
        assert_eq!(sup_norm_cols(&s, 2..4), 2.0);
    }
}
