//! Discretization of daily lifelogs, sleep-quality grouping, Apriori
//! frequent-itemset mining and retention of the longest patterns.

mod apriori;
mod export;
mod items;
mod mine;
mod thresholds;

use thiserror::Error;

pub use apriori::{apriori, min_support_count, prune_retained, FrequentItemset};
pub use export::{read_patterns, write_group_patterns, write_patterns};
pub use items::{level_rank, Item, Level, MinedVariable, SqGroup, Transaction, MINED_VARIABLES};
pub use mine::{
    discretize, mine_all, split_groups, Discretized, GroupedTransactions, MiningOutcome, Pattern,
    PatternSets, DEFAULT_MIN_SUPPORT,
};
pub use thresholds::{
    default_thresholds, quantile, ThresholdConfig, SQ_HIGH_FRACTION, SQ_LOW_FRACTION,
};

#[derive(Debug, Error)]
pub enum PatternError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("invalid thresholds: {0}")]
    Thresholds(String),
    #[error("invalid item {0:?}")]
    Item(String),
    #[error("pattern file: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
}
