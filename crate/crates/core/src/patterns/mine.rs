use serde::{Deserialize, Serialize};

use super::apriori::{apriori, prune_retained};
use super::items::{
    profile_item, Item, Level, MinedVariable, SqGroup, Transaction, MINED_VARIABLES,
};
use super::thresholds::ThresholdConfig;
use super::PatternError;
use crate::ingest::{DayRecord, UserProfile, UserSeries};

pub const DEFAULT_MIN_SUPPORT: f64 = 0.20;

#[derive(Debug, Clone, PartialEq)]
pub struct Discretized {
    pub transaction: Transaction,
    /// Mined variables with no value on this day.
    pub missing: Vec<&'static str>,
}

/// One item per mined variable; variables without cut points are skipped
/// and variables without a value are reported in `missing`.
pub fn discretize(
    record: &DayRecord,
    profile: &UserProfile,
    thresholds: &ThresholdConfig,
) -> Discretized {
    let mut transaction = Transaction::new();
    let mut missing = Vec::new();
    for (name, variable) in MINED_VARIABLES {
        if variable == MinedVariable::Chronotype {
            transaction.insert(profile_item(profile));
            continue;
        }
        let Some(cuts) = thresholds.cuts(name).filter(|c| !c.is_empty()) else {
            continue;
        };
        match variable.value(record) {
            Some(x) => {
                transaction.insert(Item::new(name, Level::from_cuts(x, cuts).as_str()));
            }
            None => missing.push(name),
        }
    }
    Discretized {
        transaction,
        missing,
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroupedTransactions {
    pub low: Vec<Transaction>,
    pub normal: Vec<Transaction>,
    pub high: Vec<Transaction>,
}

impl GroupedTransactions {
    pub fn get(&self, group: SqGroup) -> &[Transaction] {
        match group {
            SqGroup::Low => &self.low,
            SqGroup::Normal => &self.normal,
            SqGroup::High => &self.high,
        }
    }

    pub fn sizes(&self) -> [usize; 3] {
        [self.low.len(), self.normal.len(), self.high.len()]
    }
}

/// Partitions transactions by the sleep-quality group of their night.
pub fn split_groups(
    samples: &[(Transaction, f64)],
    thresholds: &ThresholdConfig,
) -> GroupedTransactions {
    let mut groups = GroupedTransactions::default();
    for (tx, sq) in samples {
        let slot = match thresholds.sq_group(*sq) {
            SqGroup::Low => &mut groups.low,
            SqGroup::Normal => &mut groups.normal,
            SqGroup::High => &mut groups.high,
        };
        slot.push(tx.clone());
    }
    groups
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pattern {
    /// Items in canonical order.
    pub items: Vec<Item>,
    pub support_count: usize,
    pub group: SqGroup,
}

impl Pattern {
    /// Support descending, then length descending, then item order.
    pub fn canonical_cmp(&self, other: &Pattern) -> std::cmp::Ordering {
        other
            .support_count
            .cmp(&self.support_count)
            .then(other.items.len().cmp(&self.items.len()))
            .then_with(|| self.items.cmp(&other.items))
    }

    pub fn items_string(&self) -> String {
        self.items
            .iter()
            .map(Item::to_string)
            .collect::<Vec<_>>()
            .join(";")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PatternSets {
    pub low: Vec<Pattern>,
    pub normal: Vec<Pattern>,
    pub high: Vec<Pattern>,
}

impl PatternSets {
    pub fn get(&self, group: SqGroup) -> &[Pattern] {
        match group {
            SqGroup::Low => &self.low,
            SqGroup::Normal => &self.normal,
            SqGroup::High => &self.high,
        }
    }

    pub fn get_mut(&mut self, group: SqGroup) -> &mut Vec<Pattern> {
        match group {
            SqGroup::Low => &mut self.low,
            SqGroup::Normal => &mut self.normal,
            SqGroup::High => &mut self.high,
        }
    }

    pub fn sort(&mut self) {
        for group in SqGroup::ALL {
            self.get_mut(group).sort_by(Pattern::canonical_cmp);
        }
    }

    pub fn len(&self) -> usize {
        self.low.len() + self.normal.len() + self.high.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiningOutcome {
    pub patterns: PatternSets,
    pub groups: GroupedTransactions,
    /// User-days left out because they had no sleep-quality value.
    pub days_without_sq: usize,
}

/// Discretizes every scored day, splits by sleep-quality group, mines each
/// group and keeps its longest and second-longest itemsets.
pub fn mine_all(
    dataset: &[UserSeries],
    thresholds: &ThresholdConfig,
    min_support_fraction: f64,
) -> Result<MiningOutcome, PatternError> {
    if !(min_support_fraction > 0.0 && min_support_fraction <= 1.0) {
        return Err(PatternError::Argument(format!(
            "minimum support must be in (0, 1], got {min_support_fraction}"
        )));
    }
    let mut samples = Vec::new();
    let mut days_without_sq = 0;
    let mut incomplete = 0;
    for series in dataset {
        for day in series.days() {
            let Some(sq) = day.sq else {
                days_without_sq += 1;
                continue;
            };
            let d = discretize(day, series.profile(), thresholds);
            if !d.missing.is_empty() {
                incomplete += 1;
            }
            samples.push((d.transaction, sq));
        }
    }
    if incomplete > 0 {
        log::warn!("{incomplete} user-days lack some mined variables; their items are omitted");
    }
    let groups = split_groups(&samples, thresholds);
    let mut patterns = PatternSets::default();
    for group in SqGroup::ALL {
        let transactions = groups.get(group);
        if transactions.is_empty() {
            if !dataset.is_empty() {
                log::warn!("{group} sleep-quality group is empty; nothing mined");
            }
            continue;
        }
        let frequent = apriori(transactions, min_support_fraction)?;
        *patterns.get_mut(group) = prune_retained(&frequent)
            .into_iter()
            .map(|s| Pattern {
                items: s.items,
                support_count: s.count,
                group,
            })
            .collect();
    }
    patterns.sort();
    Ok(MiningOutcome {
        patterns,
        groups,
        days_without_sq,
    })
}
