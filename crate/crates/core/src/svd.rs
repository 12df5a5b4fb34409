//! Thin singular value decomposition and rank selection.
//!
//! The decomposition uses one-sided Jacobi rotations that orthogonalize the
//! rows of the input in place. For a T x L matrix with T <= L this yields all
//! T singular values, the full T x T left basis, and the right-singular
//! vectors for every numerically nonzero singular value. No external linear
//! algebra backend is involved, so results are bit-reproducible across runs.

use alloc::vec::Vec;

use thiserror::Error;

use crate::math;
use crate::matrix::{dot, Mat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SvdError {
    #[error("singular values are all zero")]
    AllZeroSigma,
    #[error("component index {index} out of range (rank {rank})")]
    IndexOutOfRange { index: usize, rank: usize },
    #[error("inconsistent dimensions for singular triplets")]
    DimensionMismatch,
}

/// Singular triplets of a T x L matrix, sorted by descending singular value.
///
/// `u_row(i)` is the i-th left-singular vector (length T), `v_row(i)` the
/// i-th right-singular vector (length L). Right vectors are only kept for the
/// `rank_kept` numerically nonzero singular values. The sign convention makes
/// the largest-magnitude entry of each kept right vector positive.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdResult {
    sigma: Vec<f64>,
    u_rows: Mat,
    v_rows: Mat,
    rank_kept: usize,
}

impl SvdResult {
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// Number of kept right-singular vectors (numerical rank).
    pub fn rank_kept(&self) -> usize {
        self.rank_kept
    }

    /// Number of days (rows) of the decomposed matrix.
    pub fn day_count(&self) -> usize {
        self.u_rows.cols()
    }

    /// Number of edges (columns) of the decomposed matrix.
    pub fn edge_count(&self) -> usize {
        self.v_rows.cols()
    }

    /// The i-th left-singular vector, defined for all i < day_count.
    pub fn u_row(&self, i: usize) -> &[f64] {
        self.u_rows.row(i)
    }

    /// The i-th right-singular vector, defined for i < rank_kept.
    pub fn v_row(&self, i: usize) -> &[f64] {
        self.v_rows.row(i)
    }

    /// Rebuilds from stored vectors; checks dimensions and unit norms.
    pub fn from_parts(sigma: Vec<f64>, u_rows: Mat, v_rows: Mat) -> Result<Self, SvdError> {
        let t = u_rows.rows();
        let rank = v_rows.rows();
        if u_rows.cols() != t || sigma.len() != t || rank > t {
            return Err(SvdError::DimensionMismatch);
        }
        for i in 0..rank {
            let norm = math::sqrt(dot(v_rows.row(i), v_rows.row(i)));
            if math::abs(norm - 1.0) > 1e-6 {
                return Err(SvdError::DimensionMismatch);
            }
        }
        Ok(SvdResult {
            sigma,
            u_rows,
            v_rows,
            rank_kept: rank,
        })
    }

    /// Relative Frobenius error of `U * Sigma * V^T` against `x`.
    pub fn reconstruction_error(&self, x: &Mat) -> f64 {
        let norm = x.frobenius_norm();
        let mut err = 0.0f64;
        for t in 0..x.rows() {
            for l in 0..x.cols() {
                let mut v = 0.0;
                for i in 0..self.rank_kept {
                    v += self.sigma[i] * self.u_rows.get(i, t) * self.v_rows.get(i, l);
                }
                let d = v - x.get(t, l);
                err += d * d;
            }
        }
        let err = math::sqrt(err);
        if norm == 0.0 {
            err
        } else {
            err / norm
        }
    }
}

const ORTH_EPS: f64 = 1e-14;
const MAX_SWEEPS: usize = 64;

/// Full thin SVD of `x` (any shape) by one-sided Jacobi on the rows.
pub fn jacobi_svd(x: &Mat) -> SvdResult {
    let t = x.rows();
    let l = x.cols();
    let mut w = x.clone();
    let mut q = Mat::identity(t);

    // Row norms squared, maintained across rotations.
    let mut norms: Vec<f64> = (0..t).map(|i| dot(w.row(i), w.row(i))).collect();

    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..t {
            for r in (p + 1)..t {
                let a = norms[p];
                let b = norms[r];
                if a == 0.0 || b == 0.0 {
                    continue;
                }
                let c = dot(w.row(p), w.row(r));
                if math::abs(c) <= ORTH_EPS * math::sqrt(a * b) {
                    continue;
                }
                rotated = true;
                let zeta = (b - a) / (2.0 * c);
                let tan = if zeta >= 0.0 {
                    1.0 / (zeta + math::sqrt(1.0 + zeta * zeta))
                } else {
                    -1.0 / (-zeta + math::sqrt(1.0 + zeta * zeta))
                };
                let cos = 1.0 / math::sqrt(1.0 + tan * tan);
                let sin = cos * tan;

                let (wp, wr) = w.two_rows_mut(p, r);
                rotate_pair(wp, wr, cos, sin);
                let (qp, qr) = q.two_rows_mut(p, r);
                rotate_pair(qp, qr, cos, sin);

                norms[p] = dot(w.row(p), w.row(p));
                norms[r] = dot(w.row(r), w.row(r));
            }
        }
        if !rotated {
            break;
        }
    }

    // Sort by descending row norm; stable on ties for reproducibility.
    let mut order: Vec<usize> = (0..t).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap().then(i.cmp(&j)));

    let sigma: Vec<f64> = order.iter().map(|&i| math::sqrt(norms[i])).collect();
    let tol = sigma.first().copied().unwrap_or(0.0) * (t.max(l) as f64) * f64::EPSILON;
    let rank_kept = sigma.iter().take_while(|&&s| s > tol && s > 0.0).count();

    let mut u_rows = Mat::zeros(t, t);
    for (new_i, &old_i) in order.iter().enumerate() {
        u_rows.row_mut(new_i).copy_from_slice(q.row(old_i));
    }
    let mut v_rows = Mat::zeros(rank_kept, l);
    for new_i in 0..rank_kept {
        let old_i = order[new_i];
        let inv = 1.0 / sigma[new_i];
        let src = w.row(old_i);
        let dst = v_rows.row_mut(new_i);
        for (d, s) in dst.iter_mut().zip(src) {
            *d = s * inv;
        }
    }

    // Sign convention: largest-magnitude element of each kept right vector
    // is positive; the paired left vector flips with it.
    for i in 0..rank_kept {
        let row = v_rows.row(i);
        let mut best = 0usize;
        let mut best_abs = 0.0;
        for (j, &v) in row.iter().enumerate() {
            let a = math::abs(v);
            if a > best_abs {
                best_abs = a;
                best = j;
            }
        }
        if row[best] < 0.0 {
            for v in v_rows.row_mut(i) {
                *v = -*v;
            }
            for u in u_rows.row_mut(i) {
                *u = -*u;
            }
        }
    }

    SvdResult {
        sigma,
        u_rows,
        v_rows,
        rank_kept,
    }
}

fn rotate_pair(a: &mut [f64], b: &mut [f64], cos: f64, sin: f64) {
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let new_x = cos * *x - sin * *y;
        let new_y = sin * *x + cos * *y;
        *x = new_x;
        *y = new_y;
    }
}

/// How many leading components to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankSelection {
    /// At most this many, clamped to the number of nonzero singular values.
    Fixed(usize),
    /// The point of largest perpendicular distance between the scree curve
    /// and the chord joining its endpoints.
    Elbow,
}

/// Picks the number of base networks to keep from a descending sigma curve.
pub fn select_rank(sigma: &[f64], method: RankSelection) -> Result<usize, SvdError> {
    let largest = sigma.first().copied().unwrap_or(0.0);
    if largest <= 0.0 {
        return Err(SvdError::AllZeroSigma);
    }
    let positive = sigma.iter().take_while(|&&s| s > largest * 1e-12).count();
    match method {
        RankSelection::Fixed(n) => Ok(n.min(positive)),
        RankSelection::Elbow => {
            if sigma.len() < 3 {
                return Ok(positive.min(sigma.len()));
            }
            let n = sigma.len();
            let (x1, y1) = (0.0f64, sigma[0]);
            let (x2, y2) = ((n - 1) as f64, sigma[n - 1]);
            let chord_len = math::sqrt((x2 - x1) * (x2 - x1) + (y2 - y1) * (y2 - y1));
            let mut best_idx = 0usize;
            let mut best_dist = -1.0;
            for (i, &s) in sigma.iter().enumerate() {
                let x = i as f64;
                let dist = math::abs((y2 - y1) * x - (x2 - x1) * s + x2 * y1 - y2 * x1) / chord_len;
                if dist > best_dist {
                    best_dist = dist;
                    best_idx = i;
                }
            }
            Ok((best_idx + 1).min(positive.max(1)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64, eps: f64) -> bool {
        (a - b).abs() <= eps
    }

    #[test]
    fn diagonal_matrix_recovers_its_entries() {
        // [[2,0,0],[0,1,0]]
        let x = Mat::from_rows(&[alloc::vec![2.0, 0.0, 0.0], alloc::vec![0.0, 1.0, 0.0]]);
        let svd = jacobi_svd(&x);
        assert!(approx(svd.sigma()[0], 2.0, 1e-12));
        assert!(approx(svd.sigma()[1], 1.0, 1e-12));
        assert_eq!(svd.rank_kept(), 2);
        // First base is the first axis.
        assert!(approx(svd.v_row(0)[0], 1.0, 1e-12));
        assert!(approx(svd.reconstruction_error(&x), 0.0, 1e-12));
    }

    #[test]
    fn zero_matrix_has_zero_sigma() {
        let x = Mat::zeros(3, 5);
        let svd = jacobi_svd(&x);
        assert!(svd.sigma().iter().all(|&s| s == 0.0));
        assert_eq!(svd.rank_kept(), 0);
    }

    #[test]
    fn left_basis_is_orthonormal() {
        let x = Mat::from_rows(&[
            alloc::vec![1.0, 2.0, 3.0, 4.0],
            alloc::vec![0.5, -1.0, 2.0, 0.0],
            alloc::vec![3.0, 3.0, -1.0, 1.0],
        ]);
        let svd = jacobi_svd(&x);
        for i in 0..3 {
            for j in 0..3 {
                let d = dot(svd.u_row(i), svd.u_row(j));
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!(approx(d, expected, 1e-10), "u{i}.u{j} = {d}");
            }
        }
        assert!(svd.reconstruction_error(&x) < 1e-12);
    }

    #[test]
    fn sign_convention_points_largest_entry_up() {
        let x = Mat::from_rows(&[alloc::vec![-3.0, 0.0], alloc::vec![0.0, 1.0]]);
        let svd = jacobi_svd(&x);
        for i in 0..svd.rank_kept() {
            let row = svd.v_row(i);
            let max = row.iter().cloned().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(row.iter().any(|&v| approx(v, max, 1e-12)));
        }
    }

    #[test]
    fn fixed_rank_clamps_to_positive_count() {
        assert_eq!(select_rank(&[5.0, 0.0, 0.0], RankSelection::Fixed(10)).unwrap(), 1);
        assert_eq!(select_rank(&[5.0, 3.0, 1.0], RankSelection::Fixed(2)).unwrap(), 2);
        assert_eq!(
            select_rank(&[0.0, 0.0], RankSelection::Fixed(2)),
            Err(SvdError::AllZeroSigma)
        );
    }

    #[test]
    fn elbow_finds_a_constructed_knee() {
        // Knee at the 4th value. Chord runs (0,100) -> (7,7.5); the
        // perpendicular-distance numerator |-92.5x - 7s + 700| evaluates to
        // 0, 187.5, 305, 352.5, 267, 178, ... so index 3 wins and the
        // selected count is 4.
        let sigma = [100.0, 60.0, 30.0, 10.0, 9.0, 8.5, 8.0, 7.5];
        assert_eq!(select_rank(&sigma, RankSelection::Elbow).unwrap(), 4);
    }
}
