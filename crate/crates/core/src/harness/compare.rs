//! Matching oracle eigenvectors to predicted ones.
//!
//! Oracle eigenvectors are unique only up to a unimodular factor per column
//! and, inside a cluster, up to ordering. Within each cluster the oracle
//! columns are greedily assigned to predicted columns by largest
//! `|<oracle, predicted>|` (ties go to the lower predicted, then oracle,
//! index), then each column is rotated so its inner product with the
//! predicted column is real and nonnegative.

use std::ops::Range;

use num_complex::Complex64;

use crate::matrix::DenseMatrix;

fn inner(a: &DenseMatrix, ja: usize, b: &DenseMatrix, jb: usize) -> Complex64 {
    (0..a.rows()).map(|i| a[(i, ja)].conj() * b[(i, jb)]).sum()
}

/// Returns a copy of `oracle` with columns permuted within `clusters` and
/// re-phased to best match `predicted`.
pub fn align_columns(oracle: &DenseMatrix, predicted: &DenseMatrix, clusters: &[Range<usize>]) -> DenseMatrix {
    assert_eq!(
        (oracle.rows(), oracle.cols()),
        (predicted.rows(), predicted.cols()),
        "shape mismatch"
    );
    let n = oracle.cols();
    let mut assignment = vec![usize::MAX; n];
    for g in clusters {
        let mut free_pred: Vec<usize> = g.clone().collect();
        let mut free_orc: Vec<usize> = g.clone().collect();
        while !free_pred.is_empty() {
            let mut best = (0, 0, -1.0);
            for (a, &p) in free_pred.iter().enumerate() {
                for (b, &o) in free_orc.iter().enumerate() {
                    let v = inner(oracle, o, predicted, p).norm();
                    if v > best.2 {
                        best = (a, b, v);
                    }
                }
            }
            let p = free_pred.remove(best.0);
            let o = free_orc.remove(best.1);
            assignment[p] = o;
        }
    }
    for (p, slot) in assignment.iter_mut().enumerate() {
        if *slot == usize::MAX {
            *slot = p;
        }
    }
    let mut out = DenseMatrix::from_fn(oracle.rows(), n, |i, j| oracle[(i, assignment[j])]);
    for j in 0..n {
        let ip = inner(&out, j, predicted, j);
        let r = ip.norm();
        if r > 0.0 {
            // multiply column by ip/|ip| so that <out_j, pred_j> becomes |ip|
            let ph = ip / r;
            for i in 0..out.rows() {
                out[(i, j)] *= ph;
            }
        }
    }
    out
}
