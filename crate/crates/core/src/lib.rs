//! Analytics core for exchange trade-log forensics.
//!
//! Everything in here is pure computation over in-memory data: the cleaning
//! pipeline that turns raw log rows into completed transactions, price-band
//! classification of transactions and accounts, weighted transaction graphs
//! and their metrics, daily snapshot matrices with their SVD base networks,
//! price fitting and correlation, and manipulation-motif detection. File
//! formats, CSV parsing, and the command-line front end live in the
//! companion crate.
//!
//! The crate is `no_std`-compatible (`--no-default-features --features
//! libm`); it only needs `alloc`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod classify;
pub mod date;
pub mod graph;
mod math;
pub mod matrix;
pub mod motif;
pub mod powerlaw;
pub mod pricefit;
pub mod record;
pub mod svd;
pub mod temporal;

pub use classify::{
    categorize_accounts, label_transaction, summarize_categories, AccountCategories,
    BandMultipliers, Category, CategoryFlags, CategoryRow, CategoryStats, RefEntry,
    ReferencePriceTable, TxLabel,
};
pub use date::{CivilDate, Timestamp};
pub use graph::{
    average_clustering, degree_distribution, degree_sequence, global_clustering, graph_stats,
    ClusteringKind, DegreeMode, GraphStats, WeightedDigraph,
};
pub use motif::{
    core_accounts, daily_subgraph, detect_motifs, CoreSet, DailySubgraph, MotifFinding,
    MotifPattern, MotifReport, MotifThresholds,
};
pub use powerlaw::{fit_power_law, fit_power_law_at, PowerLawFit};
pub use pricefit::{
    correlate, correlation_triple, evaluate_fit, fit_price, log_price, CorrelationMethod,
    CorrelationTriple, PriceFit, PriceSeries,
};
pub use record::{
    clean, dedup_rows, dedup_transactions, pair_transactions, to_tuples, AccountId,
    CleaningReport, CompleteTransaction, RawRecord, Side, TradeId, TransactionTuple,
};
pub use svd::{jacobi_svd, select_rank, RankSelection, SvdResult};
pub use temporal::{
    base_network, build_snapshot_series, compute_svd, contribution_series, normalize,
    restrict_days, BaseNetwork, DateWindow, GraphTimeSeriesMatrix,
};
