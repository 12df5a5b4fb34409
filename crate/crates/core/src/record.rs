//! Trade-log records and the cleaning pipeline.
//!
//! Raw exchange rows come in buy/sell pairs sharing a trade id. Cleaning runs
//! three passes: drop rows duplicated on the (date, user, side, volume) key,
//! drop rows that cannot be matched into a buy/sell pair, then drop duplicated
//! completed transactions. Every removal is counted in a [`CleaningReport`] so
//! the row ledger always balances.

use alloc::string::String;
use alloc::vec::Vec;

use alloc::collections::{BTreeMap, BTreeSet};

use crate::classify::TxLabel;
use crate::date::Timestamp;

/// Exchange account identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct AccountId(pub u64);

impl core::fmt::Display for AccountId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Identifier shared by the buy and sell rows of one transaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct TradeId(pub u64);

impl core::fmt::Display for TradeId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Side {
    Buy,
    Sell,
}

/// One raw trade-log row.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    pub trade_id: TradeId,
    pub timestamp: Timestamp,
    pub user_id: AccountId,
    pub side: Side,
    pub currency: String,
    pub bitcoins: f64,
    pub money: f64,
    pub country: Option<String>,
    pub state: Option<String>,
}

/// A matched buy/sell pair: one completed transaction.
#[derive(Debug, Clone, PartialEq)]
pub struct CompleteTransaction {
    pub trade_id: TradeId,
    pub timestamp: Timestamp,
    pub seller: AccountId,
    pub buyer: AccountId,
    pub currency: String,
    pub bitcoins: f64,
    pub money: f64,
}

impl CompleteTransaction {
    /// Fiat per BTC at the moment of the trade.
    pub fn unit_price(&self) -> f64 {
        self.money / self.bitcoins
    }
}

/// The pipeline's atomic record: seller, buyer, volume, time, label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransactionTuple {
    pub seller: AccountId,
    pub buyer: AccountId,
    pub volume: f64,
    pub timestamp: Timestamp,
    pub label: TxLabel,
}

/// Counter ledger for one cleaning run. Serialized as a flat JSON object.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CleaningReport {
    pub rows_in: u64,
    pub dropped_malformed: u64,
    pub dropped_nonpositive: u64,
    pub dropped_duplicate_rows: u64,
    pub rows_after_field_dedup: u64,
    pub dropped_single_row: u64,
    pub dropped_multi_row: u64,
    pub dropped_mismatched_pair: u64,
    pub rows_after_single_row_removal: u64,
    pub complete_transactions: u64,
    pub dropped_duplicate_transactions: u64,
    pub transactions_after_dedup: u64,
}

impl CleaningReport {
    /// Every input row is either still standing or accounted for by a drop
    /// counter.
    pub fn rows_conserved(&self) -> bool {
        self.rows_in
            == self.dropped_malformed
                + self.dropped_nonpositive
                + self.dropped_duplicate_rows
                + self.dropped_single_row
                + self.dropped_multi_row
                + self.dropped_mismatched_pair
                + self.rows_after_single_row_removal
            && self.rows_after_single_row_removal == 2 * self.complete_transactions
            && self.complete_transactions
                == self.transactions_after_dedup + self.dropped_duplicate_transactions
    }
}

/// Relative tolerance for the buy/sell rows of a pair to agree on volume and
/// turnover.
pub const PAIR_FIELD_TOLERANCE: f64 = 1e-8;

/// Drops rows with `bitcoins <= 0` or `money <= 0` (or non-finite values).
/// Unit price is undefined for them.
pub fn drop_nonpositive(records: Vec<RawRecord>) -> (Vec<RawRecord>, u64) {
    let before = records.len();
    let kept: Vec<RawRecord> = records
        .into_iter()
        .filter(|r| r.bitcoins > 0.0 && r.money > 0.0 && r.bitcoins.is_finite() && r.money.is_finite())
        .collect();
    let dropped = (before - kept.len()) as u64;
    (kept, dropped)
}

/// Removes rows duplicated on the (date, user id, side, bitcoins) key,
/// keeping the first occurrence. Returns the survivors and the removed count.
pub fn dedup_rows(records: Vec<RawRecord>) -> (Vec<RawRecord>, u64) {
    let mut seen: BTreeSet<(i64, u64, Side, u64)> = BTreeSet::new();
    let before = records.len();
    let kept: Vec<RawRecord> = records
        .into_iter()
        .filter(|r| {
            seen.insert((
                r.timestamp.epoch_seconds(),
                r.user_id.0,
                r.side,
                r.bitcoins.to_bits(),
            ))
        })
        .collect();
    let dropped = (before - kept.len()) as u64;
    (kept, dropped)
}

/// Row-level outcome of matching buy/sell pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairingDrops {
    /// Rows belonging to a trade id with only one row.
    pub single_rows: u64,
    /// Rows belonging to a trade id with more than two rows.
    pub multi_rows: u64,
    /// Rows of two-row trade ids that are not one buy plus one sell agreeing
    /// on currency, bitcoins, and money.
    pub mismatched_rows: u64,
}

fn fields_agree(a: f64, b: f64) -> bool {
    let scale = crate::math::abs(a).max(crate::math::abs(b));
    crate::math::abs(a - b) <= PAIR_FIELD_TOLERANCE * scale
}

/// Matches rows into completed transactions by trade id.
///
/// A trade id forms a transaction only when exactly two rows remain for it,
/// one buy and one sell, agreeing on currency, bitcoins, and money. Everything
/// else is dropped and counted, never guessed. The output is sorted by
/// (timestamp, trade id) so downstream results do not depend on input order.
pub fn pair_transactions(records: &[RawRecord]) -> (Vec<CompleteTransaction>, PairingDrops) {
    let mut groups: BTreeMap<TradeId, Vec<&RawRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.trade_id).or_default().push(r);
    }

    let mut drops = PairingDrops::default();
    let mut out = Vec::new();
    for (trade_id, rows) in groups {
        match rows.len() {
            1 => drops.single_rows += 1,
            2 => {
                let (buy, sell) = match (rows[0].side, rows[1].side) {
                    (Side::Buy, Side::Sell) => (rows[0], rows[1]),
                    (Side::Sell, Side::Buy) => (rows[1], rows[0]),
                    _ => {
                        drops.mismatched_rows += 2;
                        continue;
                    }
                };
                let consistent = buy.currency == sell.currency
                    && fields_agree(buy.bitcoins, sell.bitcoins)
                    && fields_agree(buy.money, sell.money);
                if !consistent {
                    drops.mismatched_rows += 2;
                    continue;
                }
                out.push(CompleteTransaction {
                    trade_id,
                    timestamp: sell.timestamp,
                    seller: sell.user_id,
                    buyer: buy.user_id,
                    currency: sell.currency.clone(),
                    bitcoins: sell.bitcoins,
                    money: sell.money,
                });
            }
            n => drops.multi_rows += n as u64,
        }
    }
    out.sort_by_key(|t| (t.timestamp, t.trade_id));
    (out, drops)
}

/// Collapses transactions identical in (trade id, timestamp, seller, buyer,
/// bitcoins, money), keeping the first.
pub fn dedup_transactions(transactions: Vec<CompleteTransaction>) -> (Vec<CompleteTransaction>, u64) {
    let mut seen: BTreeSet<(u64, i64, u64, u64, u64, u64)> = BTreeSet::new();
    let before = transactions.len();
    let kept: Vec<CompleteTransaction> = transactions
        .into_iter()
        .filter(|t| {
            seen.insert((
                t.trade_id.0,
                t.timestamp.epoch_seconds(),
                t.seller.0,
                t.buyer.0,
                t.bitcoins.to_bits(),
                t.money.to_bits(),
            ))
        })
        .collect();
    let dropped = (before - kept.len()) as u64;
    (kept, dropped)
}

/// Runs the whole cleaning pipeline over parsed rows.
///
/// `dropped_malformed` is the number of rows the parser already rejected; it
/// only feeds the report's ledger.
pub fn clean(records: Vec<RawRecord>, dropped_malformed: u64) -> (Vec<CompleteTransaction>, CleaningReport) {
    let rows_in = records.len() as u64 + dropped_malformed;
    let (records, dropped_nonpositive) = drop_nonpositive(records);
    let (records, dropped_duplicate_rows) = dedup_rows(records);
    let rows_after_field_dedup = records.len() as u64;
    let (transactions, pair_drops) = pair_transactions(&records);
    let complete_transactions = transactions.len() as u64;
    let (transactions, dropped_duplicate_transactions) = dedup_transactions(transactions);

    let report = CleaningReport {
        rows_in,
        dropped_malformed,
        dropped_nonpositive,
        dropped_duplicate_rows,
        rows_after_field_dedup,
        dropped_single_row: pair_drops.single_rows,
        dropped_multi_row: pair_drops.multi_rows,
        dropped_mismatched_pair: pair_drops.mismatched_rows,
        rows_after_single_row_removal: 2 * complete_transactions,
        complete_transactions,
        dropped_duplicate_transactions,
        transactions_after_dedup: transactions.len() as u64,
    };
    debug_assert!(report.rows_conserved());
    (transactions, report)
}

/// Turns completed transactions into (seller, buyer, volume, time, label)
/// tuples. One tuple per transaction.
pub fn to_tuples(
    transactions: &[CompleteTransaction],
    mut labeler: impl FnMut(&CompleteTransaction) -> TxLabel,
) -> Vec<TransactionTuple> {
    transactions
        .iter()
        .map(|t| TransactionTuple {
            seller: t.seller,
            buyer: t.buyer,
            volume: t.bitcoins,
            timestamp: t.timestamp,
            label: labeler(t),
        })
        .collect()
}
