//! Adapter from the original PMData participant layout to [`RawUserSeries`].
//!
//! | PMData file                                  | field(s)                          | canonical variable   |
//! |----------------------------------------------|-----------------------------------|----------------------|
//! | `fitbit/calories.json` (per minute)          | `value`                           | `calories`           |
//! | `fitbit/distance.json` (per minute, cm)      | `value`                           | `distance`           |
//! | `fitbit/steps.json` (per minute)             | `value`                           | `steps`              |
//! | `fitbit/sedentary_minutes.json`              | `value`                           | `sedentary_min`      |
//! | `fitbit/lightly_active_minutes.json`         | `value`                           | `lightly_min`        |
//! | `fitbit/moderately_active_minutes.json`      | `value`                           | `moderately_min`     |
//! | `fitbit/very_active_minutes.json`            | `value`                           | `very_min`           |
//! | `fitbit/time_in_heart_rate_zones.json`       | `BELOW_DEFAULT_ZONE_1`            | `zone0_min`          |
//! |                                              | `IN_DEFAULT_ZONE_1..3`            | `zone1_min..zone3_min` |
//! | `fitbit/sleep.json`                          | `dateOfSleep`, `minutesAsleep`, `timeInBed` | sleep entry |
//! | `pmsys/wellness.csv`                         | `effective_time_frame`, `fatigue`, `mood`, `readiness`, `soreness`, `stress` | wellness entry |
//! | `profile.toml` (written by hand from `participant-overview.xlsx`) | `user_id`, `age`, `gender`, `chronotype` | profile |
//!
//! Fitbit stamps come as `MM/DD/YY HH:MM:SS` or ISO-8601. Wellness scores
//! outside the canonical scales (PMData readiness uses 0–10) are dropped with
//! a warning rather than failing the whole participant.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{NaiveDate, NaiveDateTime};
use serde::Deserialize;
use serde_json::Value;

use super::parse::{parse_profile, parse_timestamp, RawEntry, RawUserSeries, SleepEntry};
use super::record::Variable;
use super::IngestError;

const ACTIVITY_FILES: [(&str, Variable); 7] = [
    ("calories.json", Variable::Calories),
    ("distance.json", Variable::Distance),
    ("steps.json", Variable::Steps),
    ("sedentary_minutes.json", Variable::SedentaryMin),
    ("lightly_active_minutes.json", Variable::LightlyActiveMin),
    (
        "moderately_active_minutes.json",
        Variable::ModeratelyActiveMin,
    ),
    ("very_active_minutes.json", Variable::VeryActiveMin),
];

const ZONE_KEYS: [(&str, Variable); 4] = [
    ("BELOW_DEFAULT_ZONE_1", Variable::Zone0Min),
    ("IN_DEFAULT_ZONE_1", Variable::Zone1Min),
    ("IN_DEFAULT_ZONE_2", Variable::Zone2Min),
    ("IN_DEFAULT_ZONE_3", Variable::Zone3Min),
];

/// Lists participant directories (`p01`, `p02`, …) holding a `profile.toml`.
pub fn discover_participants(root: &Path) -> Result<Vec<PathBuf>, IngestError> {
    let mut dirs: Vec<PathBuf> = fs::read_dir(root)
        .map_err(|source| IngestError::Io {
            path: root.to_path_buf(),
            source,
        })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir() && p.join("profile.toml").is_file())
        .collect();
    dirs.sort();
    Ok(dirs)
}

pub fn parse_participant(dir: &Path) -> Result<RawUserSeries, IngestError> {
    let profile = parse_profile(&dir.join("profile.toml"))?;
    let fitbit = dir.join("fitbit");

    let mut activity = Vec::new();
    for (name, variable) in ACTIVITY_FILES {
        let path = fitbit.join(name);
        if !path.is_file() {
            continue;
        }
        for (line, item) in read_json_array(&path)?.into_iter().enumerate() {
            let timestamp = stamp(&path, line, &item, "dateTime")?;
            let value = number(&path, line, item.get("value"), "value")?;
            check(&path, line, variable, value)?;
            activity.push(RawEntry {
                timestamp,
                values: vec![(variable, value)],
            });
        }
    }

    let zones = fitbit.join("time_in_heart_rate_zones.json");
    if zones.is_file() {
        for (line, item) in read_json_array(&zones)?.into_iter().enumerate() {
            let timestamp = stamp(&zones, line, &item, "dateTime")?;
            let in_zones = item
                .get("value")
                .and_then(|v| v.get("valuesInZones"))
                .ok_or_else(|| malformed(&zones, line, "value", "missing valuesInZones".into()))?;
            let mut values = Vec::with_capacity(4);
            for (key, variable) in ZONE_KEYS {
                if let Some(raw) = in_zones.get(key) {
                    let value = number(&zones, line, Some(raw), key)?;
                    check(&zones, line, variable, value)?;
                    values.push((variable, value));
                }
            }
            activity.push(RawEntry { timestamp, values });
        }
    }

    let mut sleep = Vec::new();
    let sleep_path = fitbit.join("sleep.json");
    if sleep_path.is_file() {
        for (line, item) in read_json_array(&sleep_path)?.into_iter().enumerate() {
            let date = stamp(&sleep_path, line, &item, "dateOfSleep")?.date();
            let minutes_asleep = number(
                &sleep_path,
                line,
                item.get("minutesAsleep"),
                "minutesAsleep",
            )?;
            let time_in_bed = number(&sleep_path, line, item.get("timeInBed"), "timeInBed")?;
            if minutes_asleep < 0.0 || time_in_bed < 0.0 || minutes_asleep > time_in_bed {
                return Err(IngestError::Range {
                    file: sleep_path.clone(),
                    line: line as u64 + 1,
                    column: "minutesAsleep".into(),
                    message: format!("asleep {minutes_asleep} / in bed {time_in_bed}"),
                });
            }
            sleep.push(SleepEntry {
                date,
                minutes_asleep,
                time_in_bed,
            });
        }
    }

    let wellness_path = dir.join("pmsys").join("wellness.csv");
    let wellness = if wellness_path.is_file() {
        parse_wellness(&wellness_path)?
    } else {
        Vec::new()
    };

    Ok(RawUserSeries {
        profile,
        activity,
        wellness,
        sleep,
    })
}

fn parse_wellness(path: &Path) -> Result<Vec<RawEntry>, IngestError> {
    #[derive(Deserialize)]
    struct Row {
        effective_time_frame: String,
        fatigue: Option<f64>,
        mood: Option<f64>,
        readiness: Option<f64>,
        soreness: Option<f64>,
        stress: Option<f64>,
    }
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut entries = Vec::new();
    let mut dropped = 0usize;
    for (i, row) in reader.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let line = i as u64 + 2;
        let timestamp =
            parse_timestamp(&row.effective_time_frame).ok_or_else(|| IngestError::Malformed {
                file: path.to_path_buf(),
                line,
                column: "effective_time_frame".into(),
                message: format!("unparseable timestamp {:?}", row.effective_time_frame),
            })?;
        let mut values = Vec::with_capacity(5);
        for (variable, value) in [
            (Variable::Fatigue, row.fatigue),
            (Variable::Mood, row.mood),
            (Variable::Readiness, row.readiness),
            (Variable::Soreness, row.soreness),
            (Variable::Stress, row.stress),
        ] {
            if let Some(v) = value {
                if variable.check_value(v).is_ok() {
                    values.push((variable, v));
                } else {
                    dropped += 1;
                }
            }
        }
        entries.push(RawEntry { timestamp, values });
    }
    if dropped > 0 {
        log::warn!(
            "{}: dropped {dropped} wellness value(s) outside the canonical scales",
            path.display()
        );
    }
    Ok(entries)
}

fn read_json_array(path: &Path) -> Result<Vec<Value>, IngestError> {
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    match serde_json::from_str::<Value>(&text) {
        Ok(Value::Array(items)) => Ok(items),
        Ok(_) => Err(IngestError::Schema {
            file: path.to_path_buf(),
            message: "expected a JSON array".into(),
        }),
        Err(e) => Err(IngestError::Malformed {
            file: path.to_path_buf(),
            line: e.line() as u64,
            column: String::new(),
            message: e.to_string(),
        }),
    }
}

fn malformed(path: &Path, index: usize, column: &str, message: String) -> IngestError {
    IngestError::Malformed {
        file: path.to_path_buf(),
        // JSON arrays have no lines; report the 1-based element index.
        line: index as u64 + 1,
        column: column.into(),
        message,
    }
}

fn stamp(path: &Path, index: usize, item: &Value, key: &str) -> Result<NaiveDateTime, IngestError> {
    let raw = item
        .get(key)
        .and_then(Value::as_str)
        .ok_or_else(|| malformed(path, index, key, "missing timestamp".into()))?;
    parse_fitbit_timestamp(raw)
        .ok_or_else(|| malformed(path, index, key, format!("unparseable timestamp {raw:?}")))
}

/// Fitbit exports use `MM/DD/YY HH:MM:SS`; newer files use ISO-8601.
pub fn parse_fitbit_timestamp(raw: &str) -> Option<NaiveDateTime> {
    NaiveDateTime::parse_from_str(raw.trim(), "%m/%d/%y %H:%M:%S")
        .ok()
        .or_else(|| {
            NaiveDate::parse_from_str(raw.trim(), "%m/%d/%y")
                .ok()
                .map(|d| d.and_time(chrono::NaiveTime::MIN))
        })
        .or_else(|| parse_timestamp(raw))
}

fn number(path: &Path, index: usize, value: Option<&Value>, key: &str) -> Result<f64, IngestError> {
    let parsed = match value {
        Some(Value::Number(n)) => n.as_f64(),
        Some(Value::String(s)) => s.trim().parse().ok(),
        _ => None,
    };
    parsed.ok_or_else(|| malformed(path, index, key, format!("not a number: {value:?}")))
}

fn check(path: &Path, index: usize, variable: Variable, value: f64) -> Result<(), IngestError> {
    variable
        .check_value(value)
        .map_err(|message| IngestError::Range {
            file: path.to_path_buf(),
            line: index as u64 + 1,
            column: variable.column().into(),
            message,
        })
}

fn csv_error(path: &Path, e: csv::Error) -> IngestError {
    IngestError::Malformed {
        file: path.to_path_buf(),
        line: e.position().map(|p| p.line()).unwrap_or(0),
        column: String::new(),
        message: e.to_string(),
    }
}
