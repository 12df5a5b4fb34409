//! Abnormal-transaction labeling and account categorization.
//!
//! A transaction is judged against the day's reference price band: unit price
//! above `high_mult * H_t` is extremely high, below `low_mult * L_t` extremely
//! low, anything in between (inclusive) normal. Accounts inherit flags from
//! the transactions they touch: one extremely-high trade makes an EHA, one
//! extremely-low trade an ELA, either makes the account abnormal.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::date::CivilDate;
use crate::record::{AccountId, CompleteTransaction, TransactionTuple};

/// Transaction label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum TxLabel {
    #[cfg_attr(feature = "serde", serde(rename = "EHT"))]
    ExtremelyHigh,
    #[cfg_attr(feature = "serde", serde(rename = "ELT"))]
    ExtremelyLow,
    #[cfg_attr(feature = "serde", serde(rename = "NMT"))]
    Normal,
    #[cfg_attr(feature = "serde", serde(rename = "UNCLASSIFIED"))]
    Unclassified,
}

impl TxLabel {
    pub fn is_abnormal(self) -> bool {
        matches!(self, TxLabel::ExtremelyHigh | TxLabel::ExtremelyLow)
    }
}

impl core::fmt::Display for TxLabel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let s = match self {
            TxLabel::ExtremelyHigh => "EHT",
            TxLabel::ExtremelyLow => "ELT",
            TxLabel::Normal => "NMT",
            TxLabel::Unclassified => "UNCLASSIFIED",
        };
        f.write_str(s)
    }
}

/// Band multipliers applied to the daily high/low reference prices.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BandMultipliers {
    pub high: f64,
    pub low: f64,
}

impl Default for BandMultipliers {
    fn default() -> Self {
        BandMultipliers { high: 1.5, low: 0.5 }
    }
}

/// One day's reference prices.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RefEntry {
    pub high: f64,
    pub low: f64,
    pub close: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RefTableError {
    #[error("duplicate reference entry for {0}")]
    DuplicateDay(CivilDate),
    #[error("reference low exceeds high on {0}")]
    InvertedBand(CivilDate),
    #[error("non-positive reference price on {0}")]
    NonPositivePrice(CivilDate),
}

/// Daily high/low/close reference prices for one currency.
///
/// `low <= high` and positivity are enforced on insert; close may sit outside
/// the [low, high] range since upstream sources are not always consistent.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePriceTable {
    currency: String,
    days: BTreeMap<CivilDate, RefEntry>,
}

impl ReferencePriceTable {
    pub fn new(currency: impl Into<String>) -> Self {
        ReferencePriceTable {
            currency: currency.into(),
            days: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, day: CivilDate, entry: RefEntry) -> Result<(), RefTableError> {
        if !(entry.high > 0.0 && entry.low > 0.0 && entry.close > 0.0) {
            return Err(RefTableError::NonPositivePrice(day));
        }
        if entry.low > entry.high {
            return Err(RefTableError::InvertedBand(day));
        }
        if self.days.contains_key(&day) {
            return Err(RefTableError::DuplicateDay(day));
        }
        self.days.insert(day, entry);
        Ok(())
    }

    pub fn get(&self, day: CivilDate) -> Option<&RefEntry> {
        self.days.get(&day)
    }

    pub fn currency(&self) -> &str {
        &self.currency
    }

    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (CivilDate, &RefEntry)> {
        self.days.iter().map(|(d, e)| (*d, e))
    }
}

/// Labels one transaction against the reference band.
///
/// Transactions in a currency other than the table's, or on a day without a
/// reference entry, stay unclassified: they count as traffic but never flag
/// an account.
pub fn label_transaction(
    tx: &CompleteTransaction,
    table: &ReferencePriceTable,
    bands: BandMultipliers,
) -> TxLabel {
    if tx.currency != table.currency() {
        return TxLabel::Unclassified;
    }
    let Some(entry) = table.get(tx.timestamp.date()) else {
        return TxLabel::Unclassified;
    };
    let price = tx.unit_price();
    if price > bands.high * entry.high {
        TxLabel::ExtremelyHigh
    } else if price < bands.low * entry.low {
        TxLabel::ExtremelyLow
    } else {
        TxLabel::Normal
    }
}

/// Per-account abnormality flags.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CategoryFlags {
    pub extremely_high: bool,
    pub extremely_low: bool,
}

impl CategoryFlags {
    pub fn abnormal(self) -> bool {
        self.extremely_high || self.extremely_low
    }

    pub fn normal(self) -> bool {
        !self.abnormal()
    }
}

/// Account id to category flags, for every account seen in the tuples.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AccountCategories(pub BTreeMap<AccountId, CategoryFlags>);

impl AccountCategories {
    /// Flags for an account; accounts never seen are normal.
    pub fn flags(&self, id: AccountId) -> CategoryFlags {
        self.0.get(&id).copied().unwrap_or_default()
    }

    pub fn is_eha(&self, id: AccountId) -> bool {
        self.flags(id).extremely_high
    }

    pub fn is_ela(&self, id: AccountId) -> bool {
        self.flags(id).extremely_low
    }

    pub fn is_abnormal(&self, id: AccountId) -> bool {
        self.flags(id).abnormal()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Accounts flagged abnormal, in id order.
    pub fn abnormal_accounts(&self) -> Vec<AccountId> {
        self.0
            .iter()
            .filter(|(_, f)| f.abnormal())
            .map(|(id, _)| *id)
            .collect()
    }
}

/// Flags every account appearing as seller or buyer in the labeled tuples.
pub fn categorize_accounts(tuples: &[TransactionTuple]) -> AccountCategories {
    let mut map: BTreeMap<AccountId, CategoryFlags> = BTreeMap::new();
    for t in tuples {
        for id in [t.seller, t.buyer] {
            let flags = map.entry(id).or_default();
            match t.label {
                TxLabel::ExtremelyHigh => flags.extremely_high = true,
                TxLabel::ExtremelyLow => flags.extremely_low = true,
                TxLabel::Normal | TxLabel::Unclassified => {}
            }
        }
    }
    AccountCategories(map)
}

/// The five account categories reported by the summary table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Category {
    #[cfg_attr(feature = "serde", serde(rename = "EHA"))]
    ExtremelyHighAccounts,
    #[cfg_attr(feature = "serde", serde(rename = "ELA"))]
    ExtremelyLowAccounts,
    #[cfg_attr(feature = "serde", serde(rename = "ABA"))]
    AbnormalAccounts,
    #[cfg_attr(feature = "serde", serde(rename = "NMA"))]
    NormalAccounts,
    #[cfg_attr(feature = "serde", serde(rename = "All"))]
    All,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::ExtremelyHighAccounts,
        Category::ExtremelyLowAccounts,
        Category::AbnormalAccounts,
        Category::NormalAccounts,
        Category::All,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            Category::ExtremelyHighAccounts => "EHA",
            Category::ExtremelyLowAccounts => "ELA",
            Category::AbnormalAccounts => "ABA",
            Category::NormalAccounts => "NMA",
            Category::All => "All",
        }
    }

    fn contains(self, flags: CategoryFlags) -> bool {
        match self {
            Category::ExtremelyHighAccounts => flags.extremely_high,
            Category::ExtremelyLowAccounts => flags.extremely_low,
            Category::AbnormalAccounts => flags.abnormal(),
            Category::NormalAccounts => flags.normal(),
            Category::All => true,
        }
    }
}

/// One row of the category summary. Transaction counters only include
/// transactions with BOTH endpoints inside the category.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CategoryRow {
    pub accounts: u64,
    pub transactions: u64,
    pub abnormal_transactions: u64,
    pub extremely_high_transactions: u64,
    pub extremely_low_transactions: u64,
}

/// Category summary mirroring the account/transaction statistics table.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CategoryStats {
    pub eha: CategoryRow,
    pub ela: CategoryRow,
    pub aba: CategoryRow,
    pub nma: CategoryRow,
    pub all: CategoryRow,
}

impl CategoryStats {
    pub fn row(&self, category: Category) -> &CategoryRow {
        match category {
            Category::ExtremelyHighAccounts => &self.eha,
            Category::ExtremelyLowAccounts => &self.ela,
            Category::AbnormalAccounts => &self.aba,
            Category::NormalAccounts => &self.nma,
            Category::All => &self.all,
        }
    }

    fn row_mut(&mut self, category: Category) -> &mut CategoryRow {
        match category {
            Category::ExtremelyHighAccounts => &mut self.eha,
            Category::ExtremelyLowAccounts => &mut self.ela,
            Category::AbnormalAccounts => &mut self.aba,
            Category::NormalAccounts => &mut self.nma,
            Category::All => &mut self.all,
        }
    }
}

/// Tallies accounts and transactions per category.
pub fn summarize_categories(
    tuples: &[TransactionTuple],
    categories: &AccountCategories,
) -> CategoryStats {
    let mut stats = CategoryStats::default();

    for (_, flags) in categories.0.iter() {
        for category in Category::ALL {
            if category.contains(*flags) {
                stats.row_mut(category).accounts += 1;
            }
        }
    }

    for t in tuples {
        let seller = categories.flags(t.seller);
        let buyer = categories.flags(t.buyer);
        for category in Category::ALL {
            if category.contains(seller) && category.contains(buyer) {
                let row = stats.row_mut(category);
                row.transactions += 1;
                match t.label {
                    TxLabel::ExtremelyHigh => {
                        row.abnormal_transactions += 1;
                        row.extremely_high_transactions += 1;
                    }
                    TxLabel::ExtremelyLow => {
                        row.abnormal_transactions += 1;
                        row.extremely_low_transactions += 1;
                    }
                    TxLabel::Normal | TxLabel::Unclassified => {}
                }
            }
        }
    }

    debug_assert_eq!(
        stats.all.abnormal_transactions,
        stats.all.extremely_high_transactions + stats.all.extremely_low_transactions
    );
    stats
}
