//! SVD correctness against an independent eigendecomposition oracle, plus
//! the normalization and equivariance properties of the snapshot matrices.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use txgraph_core::classify::TxLabel;
use txgraph_core::date::{CivilDate, Timestamp};
use txgraph_core::matrix::{dot, Mat};
use txgraph_core::record::TransactionTuple;
use txgraph_core::svd::jacobi_svd;
use txgraph_core::temporal::{build_snapshot_series, compute_svd, normalize, DateWindow};
use txgraph_core::AccountId;

// ---------------------------------------------------------------------------
// Oracle: eigenvalues of X * X^T via a cyclic Jacobi eigensolver written
// here, independent of the one-sided row-rotation path in the library.
// ---------------------------------------------------------------------------

fn gram_matrix(x: &Mat) -> Vec<Vec<f64>> {
    let t = x.rows();
    let mut g = vec![vec![0.0; t]; t];
    for i in 0..t {
        for j in 0..t {
            g[i][j] = dot(x.row(i), x.row(j));
        }
    }
    g
}

fn symmetric_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _ in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p][q] * a[p][q];
            }
        }
        if off.sqrt() < 1e-14 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i][i].max(0.0)).collect();
    eig.sort_by(|x, y| y.partial_cmp(x).unwrap());
    eig
}

fn random_matrix(rng: &mut ChaCha8Rng, t: usize, l: usize) -> Mat {
    let mut x = Mat::zeros(t, l);
    for r in 0..t {
        for c in 0..l {
            x.set(r, c, rng.random::<f64>() * 2.0 - 1.0);
        }
    }
    x
}

#[test]
fn singular_values_match_gram_eigen_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let t = rng.random_range(2..=20);
        let l = rng.random_range(t..=50);
        let x = random_matrix(&mut rng, t, l);
        let svd = jacobi_svd(&x);
        let eig = symmetric_eigenvalues(gram_matrix(&x));
        let sigma0 = svd.sigma()[0];
        for (s, e) in svd.sigma().iter().zip(&eig) {
            assert!(
                (s - e.sqrt()).abs() <= 1e-8 * sigma0.max(1.0),
                "sigma {s} vs oracle {}",
                e.sqrt()
            );
        }
    }
}

#[test]
fn orthonormality_and_reconstruction_hold() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..10 {
        let t = rng.random_range(2..=15);
        let l = rng.random_range(t..=60);
        let x = random_matrix(&mut rng, t, l);
        let svd = jacobi_svd(&x);
        for i in 0..t {
            for j in 0..t {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot(svd.u_row(i), svd.u_row(j)) - expected).abs() < 1e-8);
            }
        }
        for i in 0..svd.rank_kept() {
            for j in 0..svd.rank_kept() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot(svd.v_row(i), svd.v_row(j)) - expected).abs() < 1e-8);
            }
        }
        assert!(svd.reconstruction_error(&x) <= 1e-6);
    }
}

// ---------------------------------------------------------------------------
// Snapshot-matrix pipeline properties
// ---------------------------------------------------------------------------

fn day(offset: i32) -> CivilDate {
    CivilDate::from_days(15_000 + offset)
}

fn random_market_tuples(rng: &mut ChaCha8Rng, days: i32, accounts: u64) -> Vec<TransactionTuple> {
    let mut tuples = Vec::new();
    for d in 0..days {
        // Guarantee at least one trade per day so no all-zero rows appear.
        let n = rng.random_range(1..=12usize);
        for _ in 0..n {
            let s = rng.random_range(1..=accounts);
            let b = rng.random_range(1..=accounts);
            tuples.push(TransactionTuple {
                seller: AccountId(s),
                buyer: AccountId(b),
                volume: (rng.random_range(1..=10_000u64)) as f64 / 100.0,
                timestamp: Timestamp::new(day(d), rng.random_range(0..86_400)),
                label: TxLabel::Normal,
            });
        }
    }
    tuples
}

#[test]
fn normalized_matrix_has_vanishing_sums_and_zero_mean_contributions() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..8 {
        let days = rng.random_range(3..=12);
        let tuples = random_market_tuples(&mut rng, days, 30);
        let window = DateWindow::new(day(0), day(days - 1)).unwrap();
        let m = build_snapshot_series(&tuples, window, |_| true).unwrap();
        if m.edge_count() < m.day_count() {
            continue;
        }
        let t = m.day_count();
        let m = normalize(m).unwrap();
        let x = m.matrix();
        let tol = 1e-9 * t as f64;
        for r in 0..x.rows() {
            let sum: f64 = x.row(r).iter().sum();
            assert!(sum.abs() <= tol, "row {r} sums to {sum}");
        }
        for c in 0..x.cols() {
            let sum: f64 = (0..x.rows()).map(|r| x.get(r, c)).sum();
            assert!(sum.abs() <= tol, "column {c} sums to {sum}");
        }

        let svd = compute_svd(&m).unwrap();
        // Eq-style identity: entries rebuild from the kept triplets.
        assert!(svd.reconstruction_error(x) <= 1e-6);
        for i in 0..svd.rank_kept() {
            let u = svd.u_row(i);
            let mean: f64 = u.iter().sum::<f64>() / u.len() as f64;
            assert!(mean.abs() < 1e-8, "component {i} mean {mean}");
        }
    }
}

#[test]
fn per_entry_identity_matches_normalized_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let tuples = random_market_tuples(&mut rng, 8, 25);
    let window = DateWindow::new(day(0), day(7)).unwrap();
    let m = normalize(build_snapshot_series(&tuples, window, |_| true).unwrap()).unwrap();
    let svd = compute_svd(&m).unwrap();
    let x = m.matrix();
    for t in 0..x.rows() {
        for l in 0..x.cols() {
            let mut rebuilt = 0.0;
            for i in 0..svd.rank_kept() {
                rebuilt += svd.sigma()[i] * svd.u_row(i)[t] * svd.v_row(i)[l];
            }
            assert!((rebuilt - x.get(t, l)).abs() <= 1e-6);
        }
    }
}

#[test]
fn day_permutation_permutes_contributions_only() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let days = 6;
    let tuples = random_market_tuples(&mut rng, days, 20);
    let window = DateWindow::new(day(0), day(days - 1)).unwrap();
    let m = normalize(build_snapshot_series(&tuples, window, |_| true).unwrap()).unwrap();
    let svd = compute_svd(&m).unwrap();

    // Permute the rows of the normalized matrix directly.
    let perm: Vec<usize> = vec![3, 0, 5, 1, 4, 2];
    let x = m.matrix();
    let rows: Vec<Vec<f64>> = perm.iter().map(|&r| x.row(r).to_vec()).collect();
    let permuted = Mat::from_rows(&rows);
    let svd_p = jacobi_svd(&permuted);

    let sigma0 = svd.sigma()[0];
    for i in 0..svd.rank_kept().min(svd_p.rank_kept()) {
        assert!((svd.sigma()[i] - svd_p.sigma()[i]).abs() <= 1e-8 * sigma0.max(1.0));
        // Right vectors are unchanged (the sign convention pins signs).
        for l in 0..x.cols() {
            assert!((svd.v_row(i)[l] - svd_p.v_row(i)[l]).abs() < 1e-7);
        }
        // Left vectors are permuted the same way.
        for (new_t, &old_t) in perm.iter().enumerate() {
            assert!((svd.u_row(i)[old_t] - svd_p.u_row(i)[new_t]).abs() < 1e-7);
        }
    }
}

#[test]
fn daily_volume_scaling_leaves_the_svd_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let days = 5;
    let tuples = random_market_tuples(&mut rng, days, 20);
    let window = DateWindow::new(day(0), day(days - 1)).unwrap();
    let base = normalize(build_snapshot_series(&tuples, window, |_| true).unwrap()).unwrap();

    // Scale all volumes on day 2 by a constant; the row normalization
    // divides it back out.
    let scaled_tuples: Vec<TransactionTuple> = tuples
        .iter()
        .map(|t| {
            let mut t = *t;
            if t.timestamp.date() == day(2) {
                t.volume *= 37.5;
            }
            t
        })
        .collect();
    let scaled = normalize(build_snapshot_series(&scaled_tuples, window, |_| true).unwrap()).unwrap();

    assert_eq!(base.edge_index(), scaled.edge_index());
    let (xa, xb) = (base.matrix(), scaled.matrix());
    for r in 0..xa.rows() {
        for c in 0..xa.cols() {
            assert!((xa.get(r, c) - xb.get(r, c)).abs() < 1e-12);
        }
    }
    let (sa, sb) = (compute_svd(&base).unwrap(), compute_svd(&scaled).unwrap());
    for (a, b) in sa.sigma().iter().zip(sb.sigma()) {
        assert!((a - b).abs() < 1e-10);
    }
}
