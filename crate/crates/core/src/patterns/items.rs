use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::PatternError;
use crate::ingest::{Chronotype, DayRecord, UserProfile, Variable};

/// A day-level life-event variable as named in mined patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MinedVariable {
    Daily(Variable),
    Chronotype,
}

/// Pattern vocabulary: activity indicators, heart-rate zones 1–3, wellness
/// and chronotype. Sedentary time, zone 0 and sleep are not mined.
pub const MINED_VARIABLES: [(&str, MinedVariable); 15] = [
    ("numsteps", MinedVariable::Daily(Variable::Steps)),
    ("distance", MinedVariable::Daily(Variable::Distance)),
    ("calories", MinedVariable::Daily(Variable::Calories)),
    ("veryAct", MinedVariable::Daily(Variable::VeryActiveMin)),
    (
        "moderAct",
        MinedVariable::Daily(Variable::ModeratelyActiveMin),
    ),
    ("lightAct", MinedVariable::Daily(Variable::LightlyActiveMin)),
    ("InZone1", MinedVariable::Daily(Variable::Zone1Min)),
    ("InZone2", MinedVariable::Daily(Variable::Zone2Min)),
    ("InZone3", MinedVariable::Daily(Variable::Zone3Min)),
    ("fatigue", MinedVariable::Daily(Variable::Fatigue)),
    ("mood", MinedVariable::Daily(Variable::Mood)),
    ("readiness", MinedVariable::Daily(Variable::Readiness)),
    ("soreness", MinedVariable::Daily(Variable::Soreness)),
    ("stress", MinedVariable::Daily(Variable::Stress)),
    ("AorB", MinedVariable::Chronotype),
];

impl MinedVariable {
    pub fn from_name(name: &str) -> Option<MinedVariable> {
        MINED_VARIABLES
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, v)| *v)
    }

    pub fn name(self) -> &'static str {
        MINED_VARIABLES
            .iter()
            .find(|(_, v)| *v == self)
            .map(|(n, _)| *n)
            .expect("every mined variable is listed")
    }

    pub fn is_continuous(self) -> bool {
        matches!(self, MinedVariable::Daily(_))
    }

    pub fn value(self, record: &DayRecord) -> Option<f64> {
        match self {
            MinedVariable::Daily(v) => record.get(v),
            MinedVariable::Chronotype => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Low,
    Normal,
    High,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Low, Level::Normal, Level::High];

    pub fn as_str(self) -> &'static str {
        match self {
            Level::Low => "low",
            Level::Normal => "normal",
            Level::High => "high",
        }
    }

    /// Level of `x` given increasing cut points; a value on a cut belongs
    /// to the level above it.
    pub fn from_cuts(x: f64, cuts: &[f64]) -> Level {
        match cuts.iter().filter(|c| x >= **c).count() {
            0 => Level::Low,
            1 => Level::Normal,
            _ => Level::High,
        }
    }
}

impl FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Level::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| format!("unknown level {s:?}"))
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Sleep-quality group of a day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SqGroup {
    Low,
    Normal,
    High,
}

impl SqGroup {
    pub const ALL: [SqGroup; 3] = [SqGroup::Low, SqGroup::Normal, SqGroup::High];

    pub fn as_str(self) -> &'static str {
        match self {
            SqGroup::Low => "low",
            SqGroup::Normal => "normal",
            SqGroup::High => "high",
        }
    }

    pub fn from_level(level: Level) -> SqGroup {
        match level {
            Level::Low => SqGroup::Low,
            Level::Normal => SqGroup::Normal,
            Level::High => SqGroup::High,
        }
    }
}

impl FromStr for SqGroup {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SqGroup::ALL
            .into_iter()
            .find(|g| g.as_str() == s)
            .ok_or_else(|| format!("unknown group {s:?} (expected low, normal or high)"))
    }
}

impl fmt::Display for SqGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A `(variable, level)` pair rendered as `variable_level`, e.g. `numsteps_low`.
/// Ordered by variable name, then level label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Item {
    pub variable: String,
    pub level: String,
}

impl Item {
    pub fn new(variable: impl Into<String>, level: impl Into<String>) -> Self {
        Item {
            variable: variable.into(),
            level: level.into(),
        }
    }

    pub fn chronotype(c: Chronotype) -> Self {
        Item::new("AorB", c.as_str())
    }

    /// Position of the level in its variable's improvement order, if known.
    pub fn rank(&self) -> Option<u8> {
        level_rank(&self.variable, &self.level)
    }
}

/// Improvement order: `low < normal < high`, and `B < A` for chronotype.
pub fn level_rank(variable: &str, level: &str) -> Option<u8> {
    if variable == "AorB" {
        return match level {
            "B" => Some(0),
            "A" => Some(1),
            _ => None,
        };
    }
    level.parse::<Level>().ok().map(|l| l as u8)
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.variable, self.level)
    }
}

impl FromStr for Item {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().rsplit_once('_') {
            Some((v, l)) if !v.is_empty() && !l.is_empty() => Ok(Item::new(v, l)),
            _ => Err(PatternError::Item(s.to_string())),
        }
    }
}

impl Serialize for Item {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Item {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The discretized items of one user-day, at most one per variable.
pub type Transaction = BTreeSet<Item>;

pub(crate) fn profile_item(profile: &UserProfile) -> Item {
    Item::chronotype(profile.chronotype)
}
