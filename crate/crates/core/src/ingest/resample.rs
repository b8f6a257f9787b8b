use std::collections::BTreeMap;

use chrono::{NaiveDate, NaiveDateTime};

use super::parse::{RawEntry, RawUserSeries, SleepEntry};
use super::record::{DayRecord, UserSeries, Variable};
use super::IngestError;

/// Folds sub-day entries into one [`DayRecord`] per calendar day.
///
/// Additive activity quantities are summed, wellness scores keep the latest
/// report of the day (per variable, ties broken by file order), and sleep
/// segments are summed per wake-up date. Days with no entry for a variable
/// leave it absent.
pub fn resample_daily(raw: &RawUserSeries) -> Result<UserSeries, IngestError> {
    let mut days: BTreeMap<NaiveDate, DayRecord> = BTreeMap::new();
    for date in raw.raw_days() {
        day(&mut days, date);
    }

    let mut sums: BTreeMap<(NaiveDate, Variable), f64> = BTreeMap::new();
    for entry in &raw.activity {
        for (variable, value) in &entry.values {
            *sums.entry((entry.date(), *variable)).or_insert(0.0) += value;
        }
    }
    for ((date, variable), total) in sums {
        set(day(&mut days, date), variable, total)?;
    }

    let mut latest: BTreeMap<(NaiveDate, Variable), (NaiveDateTime, f64)> = BTreeMap::new();
    for entry in &raw.wellness {
        for (variable, value) in &entry.values {
            let slot = latest
                .entry((entry.date(), *variable))
                .or_insert((entry.timestamp, *value));
            // Later lines win on equal timestamps.
            if entry.timestamp >= slot.0 {
                *slot = (entry.timestamp, *value);
            }
        }
    }
    for ((date, variable), (_, value)) in latest {
        set(day(&mut days, date), variable, value)?;
    }

    let mut nights: BTreeMap<NaiveDate, (f64, f64)> = BTreeMap::new();
    for SleepEntry {
        date,
        minutes_asleep,
        time_in_bed,
    } in &raw.sleep
    {
        let night = nights.entry(*date).or_insert((0.0, 0.0));
        night.0 += minutes_asleep;
        night.1 += time_in_bed;
    }
    for (date, (asleep, in_bed)) in nights {
        let record = day(&mut days, date);
        record.minutes_asleep = Some(asleep);
        record.time_in_bed = Some(in_bed);
        record.refresh_sq()?;
    }

    UserSeries::new(raw.profile.clone(), days.into_values().collect())
}

fn day(days: &mut BTreeMap<NaiveDate, DayRecord>, date: NaiveDate) -> &mut DayRecord {
    days.entry(date).or_insert_with(|| DayRecord::empty(date))
}

fn set(record: &mut DayRecord, variable: Variable, value: f64) -> Result<(), IngestError> {
    let date = record.date;
    record
        .set(variable, Some(value))
        .map_err(|message| IngestError::Record { date, message })
}

impl RawUserSeries {
    /// Re-expresses an already-daily series as raw entries (one per day and
    /// source), so that resampling it reproduces the series.
    pub fn from_daily(series: &UserSeries) -> RawUserSeries {
        let mut raw = RawUserSeries {
            profile: series.profile().clone(),
            activity: Vec::new(),
            wellness: Vec::new(),
            sleep: Vec::new(),
        };
        for record in series.days() {
            let timestamp = record.date.and_time(chrono::NaiveTime::MIN);
            let collect = |vars: &[Variable]| -> Vec<(Variable, f64)> {
                vars.iter()
                    .filter_map(|v| record.get(*v).map(|x| (*v, x)))
                    .collect()
            };
            raw.activity.push(RawEntry {
                timestamp,
                values: collect(&Variable::ACTIVITY),
            });
            raw.wellness.push(RawEntry {
                timestamp,
                values: collect(&Variable::WELLNESS),
            });
            if let (Some(minutes_asleep), Some(time_in_bed)) =
                (record.minutes_asleep, record.time_in_bed)
            {
                raw.sleep.push(SleepEntry {
                    date: record.date,
                    minutes_asleep,
                    time_in_bed,
                });
            }
        }
        raw
    }
}
