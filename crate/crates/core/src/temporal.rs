//! Daily graph snapshots over a frozen edge universe.
//!
//! The in-window aggregate graph fixes an ordered edge universe; each day's
//! trading is then flattened into an edge-weight vector over that universe,
//! giving a T x L matrix (days by edges). After row normalization and column
//! centering, its SVD yields base networks (right-singular vectors over the
//! edges) and their daily contribution series (left-singular vectors).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use thiserror::Error;

use crate::date::CivilDate;
use crate::matrix::Mat;
use crate::record::{AccountId, TransactionTuple};
use crate::svd::{jacobi_svd, SvdError, SvdResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum TemporalError {
    #[error("window start is after window end")]
    EmptyWindow,
    #[error("no tuples fall inside the window (after filtering)")]
    NoTuplesInWindow,
    #[error("matrix is already normalized")]
    AlreadyNormalized,
    #[error("matrix is not normalized yet")]
    NotNormalized,
    #[error("{days} days exceed {edges} edges; use a longer edge universe or a shorter window")]
    MoreDaysThanEdges { days: usize, edges: usize },
    #[error("day masks must match the day count")]
    BadDayMask,
    #[error(transparent)]
    Svd(#[from] SvdError),
}

/// Inclusive day window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DateWindow {
    pub start: CivilDate,
    pub end: CivilDate,
}

impl DateWindow {
    pub fn new(start: CivilDate, end: CivilDate) -> Result<Self, TemporalError> {
        if start > end {
            return Err(TemporalError::EmptyWindow);
        }
        Ok(DateWindow { start, end })
    }

    pub fn contains(&self, day: CivilDate) -> bool {
        self.start <= day && day <= self.end
    }

    pub fn day_count(&self) -> usize {
        (self.end.days() - self.start.days()) as usize + 1
    }
}

/// T x L matrix of daily edge weights plus its day and edge axes.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphTimeSeriesMatrix {
    days: Vec<CivilDate>,
    edge_index: Vec<(AccountId, AccountId)>,
    x: Mat,
    normalized: bool,
}

impl GraphTimeSeriesMatrix {
    pub fn days(&self) -> &[CivilDate] {
        &self.days
    }

    pub fn edge_index(&self) -> &[(AccountId, AccountId)] {
        &self.edge_index
    }

    pub fn matrix(&self) -> &Mat {
        &self.x
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn day_count(&self) -> usize {
        self.days.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_index.len()
    }

    /// Assembles a matrix directly; used by persistence round-trips.
    pub fn from_parts(
        days: Vec<CivilDate>,
        edge_index: Vec<(AccountId, AccountId)>,
        x: Mat,
        normalized: bool,
    ) -> Self {
        assert_eq!(days.len(), x.rows());
        assert_eq!(edge_index.len(), x.cols());
        GraphTimeSeriesMatrix {
            days,
            edge_index,
            x,
            normalized,
        }
    }
}

/// Builds the snapshot series for tuples inside `window` whose endpoints both
/// pass `node_filter`.
///
/// The edge universe is the aggregate graph of the selected tuples, ordered
/// lexicographically. Days cover the whole window, including days with no
/// activity (all-zero rows).
pub fn build_snapshot_series(
    tuples: &[TransactionTuple],
    window: DateWindow,
    mut node_filter: impl FnMut(AccountId) -> bool,
) -> Result<GraphTimeSeriesMatrix, TemporalError> {
    let selected: Vec<&TransactionTuple> = tuples
        .iter()
        .filter(|t| window.contains(t.timestamp.date()) && node_filter(t.seller) && node_filter(t.buyer))
        .collect();
    if selected.is_empty() {
        return Err(TemporalError::NoTuplesInWindow);
    }

    let edge_set: BTreeSet<(AccountId, AccountId)> =
        selected.iter().map(|t| (t.seller, t.buyer)).collect();
    let edge_index: Vec<(AccountId, AccountId)> = edge_set.into_iter().collect();
    let column: BTreeMap<(AccountId, AccountId), usize> = edge_index
        .iter()
        .enumerate()
        .map(|(i, e)| (*e, i))
        .collect();

    let t_days = window.day_count();
    let days: Vec<CivilDate> = (0..t_days)
        .map(|i| CivilDate::from_days(window.start.days() + i as i32))
        .collect();

    let mut x = Mat::zeros(t_days, edge_index.len());
    for t in selected {
        let row = (t.timestamp.date().days() - window.start.days()) as usize;
        let col = column[&(t.seller, t.buyer)];
        x.set(row, col, x.get(row, col) + t.volume);
    }

    Ok(GraphTimeSeriesMatrix {
        days,
        edge_index,
        x,
        normalized: false,
    })
}

/// Row-normalizes then column-centers the matrix.
///
/// Each nonzero row is divided by its sum; all-zero rows stay zero. Column
/// means are then subtracted from every column, so all column sums vanish and
/// (when no all-zero rows exist) all row sums vanish too.
pub fn normalize(m: GraphTimeSeriesMatrix) -> Result<GraphTimeSeriesMatrix, TemporalError> {
    if m.normalized {
        return Err(TemporalError::AlreadyNormalized);
    }
    let GraphTimeSeriesMatrix {
        days,
        edge_index,
        mut x,
        ..
    } = m;
    let rows = x.rows();
    let cols = x.cols();
    for r in 0..rows {
        let row = x.row_mut(r);
        let sum: f64 = row.iter().sum();
        if sum > 0.0 {
            for v in row {
                *v /= sum;
            }
        }
    }
    let mut means = alloc::vec![0.0f64; cols];
    for r in 0..rows {
        for (c, v) in x.row(r).iter().enumerate() {
            means[c] += v;
        }
    }
    for mean in &mut means {
        *mean /= rows as f64;
    }
    for r in 0..rows {
        let row = x.row_mut(r);
        for (c, v) in row.iter_mut().enumerate() {
            *v -= means[c];
        }
    }
    Ok(GraphTimeSeriesMatrix {
        days,
        edge_index,
        x,
        normalized: true,
    })
}

/// Drops the rows (days) whose mask entry is false. Only valid before
/// normalization, so centering happens over the rows that remain.
pub fn restrict_days(
    m: GraphTimeSeriesMatrix,
    keep: &[bool],
) -> Result<GraphTimeSeriesMatrix, TemporalError> {
    if m.normalized {
        return Err(TemporalError::AlreadyNormalized);
    }
    if keep.len() != m.day_count() {
        return Err(TemporalError::BadDayMask);
    }
    let kept_days: Vec<CivilDate> = m
        .days
        .iter()
        .zip(keep)
        .filter(|(_, &k)| k)
        .map(|(d, _)| *d)
        .collect();
    if kept_days.is_empty() {
        return Err(TemporalError::NoTuplesInWindow);
    }
    let mut x = Mat::zeros(kept_days.len(), m.edge_count());
    let mut out_row = 0;
    for (r, &k) in keep.iter().enumerate() {
        if k {
            x.row_mut(out_row).copy_from_slice(m.x.row(r));
            out_row += 1;
        }
    }
    Ok(GraphTimeSeriesMatrix {
        days: kept_days,
        edge_index: m.edge_index,
        x,
        normalized: false,
    })
}

/// Thin SVD of a normalized snapshot matrix. The day axis must not exceed
/// the edge axis; that regime needs a longer edge universe.
pub fn compute_svd(m: &GraphTimeSeriesMatrix) -> Result<SvdResult, TemporalError> {
    if !m.normalized {
        return Err(TemporalError::NotNormalized);
    }
    let (t, l) = (m.day_count(), m.edge_count());
    if t > l {
        return Err(TemporalError::MoreDaysThanEdges { days: t, edges: l });
    }
    Ok(jacobi_svd(&m.x))
}

/// One right-singular vector mapped back onto the edge universe.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseNetwork {
    /// Component index, 0 = dominant.
    pub index: usize,
    pub sigma: f64,
    /// Signed weight per edge, in edge-universe order.
    pub edge_weights: Vec<((AccountId, AccountId), f64)>,
}

/// Extracts base network `index` (0-based, < rank_kept).
pub fn base_network(
    svd: &SvdResult,
    index: usize,
    edge_index: &[(AccountId, AccountId)],
) -> Result<BaseNetwork, TemporalError> {
    if index >= svd.rank_kept() {
        return Err(TemporalError::Svd(SvdError::IndexOutOfRange {
            index,
            rank: svd.rank_kept(),
        }));
    }
    let weights = svd.v_row(index);
    debug_assert_eq!(weights.len(), edge_index.len());
    Ok(BaseNetwork {
        index,
        sigma: svd.sigma()[index],
        edge_weights: edge_index.iter().copied().zip(weights.iter().copied()).collect(),
    })
}

/// Daily contribution series of component `index` (0-based, < day count).
pub fn contribution_series(svd: &SvdResult, index: usize) -> Result<&[f64], TemporalError> {
    if index >= svd.day_count() {
        return Err(TemporalError::Svd(SvdError::IndexOutOfRange {
            index,
            rank: svd.day_count(),
        }));
    }
    Ok(svd.u_row(index))
}
