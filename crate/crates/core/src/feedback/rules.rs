use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::catalog::Catalog;
use crate::patterns::{level_rank, Pattern, PatternSets, SqGroup, Transaction};

pub const UNKNOWN_LEVEL: &str = "unknown";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchResult {
    pub pattern: Pattern,
    /// Items the pattern shares with the user's day.
    pub co_occurrence: usize,
}

impl MatchResult {
    /// `(co_occurrence, support_count, item count)`, compared descending.
    pub fn rank_key(&self) -> (usize, usize, usize) {
        (
            self.co_occurrence,
            self.pattern.support_count,
            self.pattern.items.len(),
        )
    }

    fn rank_cmp(&self, other: &MatchResult) -> Ordering {
        other
            .rank_key()
            .cmp(&self.rank_key())
            .then_with(|| self.pattern.items.cmp(&other.pattern.items))
            .then_with(|| self.pattern.group.cmp(&other.pattern.group))
    }
}

/// Scores every candidate by shared items and ranks by [`MatchResult::rank_key`],
/// ties broken by canonical item order. Candidates sharing nothing are dropped.
pub fn match_rules(user_items: &Transaction, candidates: &[Pattern]) -> Vec<MatchResult> {
    let mut matches: Vec<MatchResult> = candidates
        .iter()
        .filter_map(|p| {
            let co_occurrence = p.items.iter().filter(|i| user_items.contains(*i)).count();
            (co_occurrence > 0).then(|| MatchResult {
                pattern: p.clone(),
                co_occurrence,
            })
        })
        .collect();
    matches.sort_by(MatchResult::rank_cmp);
    matches
}

/// Groups whose patterns a day predicted in `sq_group` is matched against.
pub fn candidate_groups(sq_group: SqGroup) -> Vec<SqGroup> {
    match sq_group {
        SqGroup::Low => vec![SqGroup::Normal, SqGroup::High],
        SqGroup::Normal | SqGroup::High => vec![SqGroup::High],
    }
}

pub fn select_candidate_groups(sq_group: SqGroup, patterns: &PatternSets) -> Vec<Pattern> {
    candidate_groups(sq_group)
        .into_iter()
        .flat_map(|g| patterns.get(g).iter().cloned())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackItem {
    pub parameter: String,
    pub current_level: String,
    pub target_level: String,
    pub message: String,
}

/// Pattern items the user could move up to. Variables the user has no item
/// for are included with `current_level = "unknown"`; lowering is never
/// suggested.
pub fn optimizable_params(user_items: &Transaction, matched: &Pattern) -> Vec<FeedbackItem> {
    let mut out = Vec::new();
    for target in &matched.items {
        let current = user_items.iter().find(|i| i.variable == target.variable);
        let suggest = match current {
            None => Some(UNKNOWN_LEVEL.to_string()),
            Some(cur) => match (cur.rank(), target.rank()) {
                (Some(c), Some(t)) if c < t => Some(cur.level.clone()),
                _ => None,
            },
        };
        if let Some(current_level) = suggest {
            out.push(FeedbackItem {
                parameter: target.variable.clone(),
                current_level,
                target_level: target.level.clone(),
                message: String::new(),
            });
        }
    }
    out
}

pub fn render_feedback(items: &[FeedbackItem], catalog: &Catalog) -> Vec<FeedbackItem> {
    items
        .iter()
        .map(|i| FeedbackItem {
            message: catalog.message(&i.parameter),
            ..i.clone()
        })
        .collect()
}

pub(crate) fn is_improvement(item: &FeedbackItem) -> bool {
    let target = level_rank(&item.parameter, &item.target_level);
    if item.current_level == UNKNOWN_LEVEL {
        return target.is_some();
    }
    matches!((level_rank(&item.parameter, &item.current_level), target), (Some(c), Some(t)) if c < t)
}
