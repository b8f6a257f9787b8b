use std::fmt;
use std::str::FromStr;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use super::IngestError;

/// Per-day lifelog variables carried by a [`DayRecord`].
///
/// The `column()` name is the canonical CSV header used by every file this
/// crate reads or writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    Calories,
    Distance,
    Steps,
    SedentaryMin,
    LightlyActiveMin,
    ModeratelyActiveMin,
    VeryActiveMin,
    Zone0Min,
    Zone1Min,
    Zone2Min,
    Zone3Min,
    Fatigue,
    Mood,
    Readiness,
    Soreness,
    Stress,
    MinutesAsleep,
    TimeInBed,
}

impl Variable {
    pub const ACTIVITY: [Variable; 11] = [
        Variable::Calories,
        Variable::Distance,
        Variable::Steps,
        Variable::SedentaryMin,
        Variable::LightlyActiveMin,
        Variable::ModeratelyActiveMin,
        Variable::VeryActiveMin,
        Variable::Zone0Min,
        Variable::Zone1Min,
        Variable::Zone2Min,
        Variable::Zone3Min,
    ];

    pub const WELLNESS: [Variable; 5] = [
        Variable::Fatigue,
        Variable::Mood,
        Variable::Readiness,
        Variable::Soreness,
        Variable::Stress,
    ];

    pub const SLEEP: [Variable; 2] = [Variable::MinutesAsleep, Variable::TimeInBed];

    /// The per-day variables that enter the regressor (activity then wellness).
    pub const MODELED: [Variable; 16] = [
        Variable::Calories,
        Variable::Distance,
        Variable::Steps,
        Variable::SedentaryMin,
        Variable::LightlyActiveMin,
        Variable::ModeratelyActiveMin,
        Variable::VeryActiveMin,
        Variable::Zone0Min,
        Variable::Zone1Min,
        Variable::Zone2Min,
        Variable::Zone3Min,
        Variable::Fatigue,
        Variable::Mood,
        Variable::Readiness,
        Variable::Soreness,
        Variable::Stress,
    ];

    pub const ALL: [Variable; 18] = [
        Variable::Calories,
        Variable::Distance,
        Variable::Steps,
        Variable::SedentaryMin,
        Variable::LightlyActiveMin,
        Variable::ModeratelyActiveMin,
        Variable::VeryActiveMin,
        Variable::Zone0Min,
        Variable::Zone1Min,
        Variable::Zone2Min,
        Variable::Zone3Min,
        Variable::Fatigue,
        Variable::Mood,
        Variable::Readiness,
        Variable::Soreness,
        Variable::Stress,
        Variable::MinutesAsleep,
        Variable::TimeInBed,
    ];

    pub fn column(self) -> &'static str {
        match self {
            Variable::Calories => "calories",
            Variable::Distance => "distance",
            Variable::Steps => "steps",
            Variable::SedentaryMin => "sedentary_min",
            Variable::LightlyActiveMin => "lightly_min",
            Variable::ModeratelyActiveMin => "moderately_min",
            Variable::VeryActiveMin => "very_min",
            Variable::Zone0Min => "zone0_min",
            Variable::Zone1Min => "zone1_min",
            Variable::Zone2Min => "zone2_min",
            Variable::Zone3Min => "zone3_min",
            Variable::Fatigue => "fatigue",
            Variable::Mood => "mood",
            Variable::Readiness => "readiness",
            Variable::Soreness => "soreness",
            Variable::Stress => "stress",
            Variable::MinutesAsleep => "minutes_asleep",
            Variable::TimeInBed => "time_in_bed",
        }
    }

    pub fn from_column(name: &str) -> Option<Variable> {
        Variable::ALL.into_iter().find(|v| v.column() == name)
    }

    /// Inclusive bounds for self-reported scales.
    pub fn likert_range(self) -> Option<(u8, u8)> {
        match self {
            Variable::Fatigue | Variable::Mood | Variable::Soreness | Variable::Stress => {
                Some((1, 5))
            }
            Variable::Readiness => Some((1, 10)),
            _ => None,
        }
    }

    pub fn is_wellness(self) -> bool {
        self.likert_range().is_some()
    }

    /// Checks a value against the variable's declared domain.
    pub fn check_value(self, value: f64) -> Result<(), String> {
        if !value.is_finite() {
            return Err(format!("{} must be finite, got {value}", self.column()));
        }
        match self.likert_range() {
            Some((lo, hi)) => {
                if value.fract() != 0.0 || value < f64::from(lo) || value > f64::from(hi) {
                    return Err(format!(
                        "{} must be an integer in {lo}..={hi}, got {value}",
                        self.column()
                    ));
                }
            }
            None => {
                if value < 0.0 {
                    return Err(format!(
                        "{} must be non-negative, got {value}",
                        self.column()
                    ));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
}

impl Gender {
    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Male => "male",
            Gender::Female => "female",
        }
    }
}

impl FromStr for Gender {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "male" | "m" => Ok(Gender::Male),
            "female" | "f" => Ok(Gender::Female),
            other => Err(format!("unknown gender {other:?}")),
        }
    }
}

/// Early riser (A) or late riser (B).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Chronotype {
    A,
    B,
}

impl Chronotype {
    pub fn as_str(self) -> &'static str {
        match self {
            Chronotype::A => "A",
            Chronotype::B => "B",
        }
    }
}

impl FromStr for Chronotype {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "A" | "a" => Ok(Chronotype::A),
            "B" | "b" => Ok(Chronotype::B),
            other => Err(format!("chronotype must be A or B, got {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    pub user_id: String,
    pub age: u32,
    pub gender: Gender,
    pub chronotype: Chronotype,
}

impl UserProfile {
    pub fn validate(&self) -> Result<(), IngestError> {
        if self.user_id.trim().is_empty() {
            return Err(IngestError::Profile("user_id must not be empty".into()));
        }
        if self.age == 0 {
            return Err(IngestError::Profile(format!(
                "user {}: age must be positive",
                self.user_id
            )));
        }
        Ok(())
    }
}

/// One user-day of fused lifelog variables.
///
/// `sq` is derived from the two sleep fields and is present exactly when both
/// are present with a positive time in bed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayRecord {
    pub date: NaiveDate,
    pub calories: Option<f64>,
    pub distance: Option<f64>,
    pub steps: Option<f64>,
    pub sedentary_min: Option<f64>,
    pub lightly_active_min: Option<f64>,
    pub moderately_active_min: Option<f64>,
    pub very_active_min: Option<f64>,
    pub hr_zone_min: [Option<f64>; 4],
    pub fatigue: Option<u8>,
    pub mood: Option<u8>,
    pub readiness: Option<u8>,
    pub soreness: Option<u8>,
    pub stress: Option<u8>,
    pub minutes_asleep: Option<f64>,
    pub time_in_bed: Option<f64>,
    pub sq: Option<f64>,
}

impl DayRecord {
    pub fn empty(date: NaiveDate) -> Self {
        DayRecord {
            date,
            calories: None,
            distance: None,
            steps: None,
            sedentary_min: None,
            lightly_active_min: None,
            moderately_active_min: None,
            very_active_min: None,
            hr_zone_min: [None; 4],
            fatigue: None,
            mood: None,
            readiness: None,
            soreness: None,
            stress: None,
            minutes_asleep: None,
            time_in_bed: None,
            sq: None,
        }
    }

    pub fn get(&self, variable: Variable) -> Option<f64> {
        let likert = |v: Option<u8>| v.map(f64::from);
        match variable {
            Variable::Calories => self.calories,
            Variable::Distance => self.distance,
            Variable::Steps => self.steps,
            Variable::SedentaryMin => self.sedentary_min,
            Variable::LightlyActiveMin => self.lightly_active_min,
            Variable::ModeratelyActiveMin => self.moderately_active_min,
            Variable::VeryActiveMin => self.very_active_min,
            Variable::Zone0Min => self.hr_zone_min[0],
            Variable::Zone1Min => self.hr_zone_min[1],
            Variable::Zone2Min => self.hr_zone_min[2],
            Variable::Zone3Min => self.hr_zone_min[3],
            Variable::Fatigue => likert(self.fatigue),
            Variable::Mood => likert(self.mood),
            Variable::Readiness => likert(self.readiness),
            Variable::Soreness => likert(self.soreness),
            Variable::Stress => likert(self.stress),
            Variable::MinutesAsleep => self.minutes_asleep,
            Variable::TimeInBed => self.time_in_bed,
        }
    }

    /// Sets a variable after checking its domain. Sleep fields refresh `sq`.
    pub fn set(&mut self, variable: Variable, value: Option<f64>) -> Result<(), String> {
        if let Some(v) = value {
            variable.check_value(v)?;
        }
        let likert = value.map(|v| v as u8);
        match variable {
            Variable::Calories => self.calories = value,
            Variable::Distance => self.distance = value,
            Variable::Steps => self.steps = value,
            Variable::SedentaryMin => self.sedentary_min = value,
            Variable::LightlyActiveMin => self.lightly_active_min = value,
            Variable::ModeratelyActiveMin => self.moderately_active_min = value,
            Variable::VeryActiveMin => self.very_active_min = value,
            Variable::Zone0Min => self.hr_zone_min[0] = value,
            Variable::Zone1Min => self.hr_zone_min[1] = value,
            Variable::Zone2Min => self.hr_zone_min[2] = value,
            Variable::Zone3Min => self.hr_zone_min[3] = value,
            Variable::Fatigue => self.fatigue = likert,
            Variable::Mood => self.mood = likert,
            Variable::Readiness => self.readiness = likert,
            Variable::Soreness => self.soreness = likert,
            Variable::Stress => self.stress = likert,
            Variable::MinutesAsleep => self.minutes_asleep = value,
            Variable::TimeInBed => self.time_in_bed = value,
        }
        if matches!(variable, Variable::MinutesAsleep | Variable::TimeInBed) {
            self.refresh_sq().map_err(|e| e.to_string())?;
        }
        Ok(())
    }

    /// Recomputes `sq` from the sleep fields.
    pub fn refresh_sq(&mut self) -> Result<(), IngestError> {
        self.sq = match (self.minutes_asleep, self.time_in_bed) {
            (Some(asleep), Some(in_bed)) if in_bed > 0.0 => {
                Some(super::compute_sq(asleep, in_bed)?)
            }
            _ => None,
        };
        Ok(())
    }

    pub fn has_all_modeled(&self) -> bool {
        Variable::MODELED.iter().all(|v| self.get(*v).is_some())
    }

    /// Checks every declared range invariant of the record.
    pub fn validate(&self) -> Result<(), IngestError> {
        for variable in Variable::ALL {
            if let Some(value) = self.get(variable) {
                variable
                    .check_value(value)
                    .map_err(|message| IngestError::Record {
                        date: self.date,
                        message,
                    })?;
            }
        }
        if let (Some(asleep), Some(in_bed)) = (self.minutes_asleep, self.time_in_bed) {
            if asleep > in_bed {
                return Err(IngestError::Record {
                    date: self.date,
                    message: format!("minutes_asleep {asleep} exceeds time_in_bed {in_bed}"),
                });
            }
        }
        let expected = match (self.minutes_asleep, self.time_in_bed) {
            (Some(_), Some(in_bed)) => in_bed > 0.0,
            _ => false,
        };
        if expected != self.sq.is_some() {
            return Err(IngestError::Record {
                date: self.date,
                message: "sq must be present exactly when both sleep fields are present".into(),
            });
        }
        if let Some(sq) = self.sq {
            if !(0.0..=100.0).contains(&sq) {
                return Err(IngestError::Record {
                    date: self.date,
                    message: format!("sq {sq} outside [0, 100]"),
                });
            }
        }
        Ok(())
    }
}

/// A user's date-ordered day records. Dates are strictly increasing; missing
/// calendar days are allowed and listed by [`UserSeries::gaps`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserSeries {
    profile: UserProfile,
    days: Vec<DayRecord>,
    gaps: Vec<NaiveDate>,
}

impl UserSeries {
    pub fn new(profile: UserProfile, days: Vec<DayRecord>) -> Result<Self, IngestError> {
        profile.validate()?;
        for pair in days.windows(2) {
            if pair[1].date <= pair[0].date {
                return Err(IngestError::Order {
                    user_id: profile.user_id.clone(),
                    date: pair[1].date,
                });
            }
        }
        let mut gaps = Vec::new();
        for pair in days.windows(2) {
            let mut d = pair[0].date;
            while let Some(next) = d.checked_add_days(Days::new(1)) {
                if next >= pair[1].date {
                    break;
                }
                gaps.push(next);
                d = next;
            }
        }
        Ok(UserSeries {
            profile,
            days,
            gaps,
        })
    }

    pub fn profile(&self) -> &UserProfile {
        &self.profile
    }

    pub fn user_id(&self) -> &str {
        &self.profile.user_id
    }

    pub fn days(&self) -> &[DayRecord] {
        &self.days
    }

    /// Calendar days between the first and last record that have no record.
    pub fn gaps(&self) -> &[NaiveDate] {
        &self.gaps
    }

    pub fn day(&self, date: NaiveDate) -> Option<&DayRecord> {
        self.days
            .binary_search_by_key(&date, |d| d.date)
            .ok()
            .map(|i| &self.days[i])
    }

    pub fn position(&self, date: NaiveDate) -> Option<usize> {
        self.days.binary_search_by_key(&date, |d| d.date).ok()
    }
}
