use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{NaiveDate, NaiveDateTime, NaiveTime};
use serde::Deserialize;

use super::record::{Chronotype, Gender, UserProfile, Variable};
use super::IngestError;

/// A timestamped reading of one or more variables, before daily aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct RawEntry {
    pub timestamp: NaiveDateTime,
    pub values: Vec<(Variable, f64)>,
}

impl RawEntry {
    pub fn date(&self) -> NaiveDate {
        self.timestamp.date()
    }
}

/// A night of sleep attributed to its wake-up date.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SleepEntry {
    pub date: NaiveDate,
    pub minutes_asleep: f64,
    pub time_in_bed: f64,
}

/// One user's parsed sources, still at their native granularity.
///
/// Entries keep file order; [`super::resample_daily`] folds them into days.
#[derive(Debug, Clone, PartialEq)]
pub struct RawUserSeries {
    pub profile: UserProfile,
    pub activity: Vec<RawEntry>,
    pub wellness: Vec<RawEntry>,
    pub sleep: Vec<SleepEntry>,
}

impl RawUserSeries {
    /// Distinct calendar days that carry at least one entry of any kind.
    pub fn raw_days(&self) -> Vec<NaiveDate> {
        let mut days: Vec<NaiveDate> = self
            .activity
            .iter()
            .chain(&self.wellness)
            .map(RawEntry::date)
            .chain(self.sleep.iter().map(|s| s.date))
            .collect();
        days.sort_unstable();
        days.dedup();
        days
    }
}

/// The files making up one user's lifelog.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceFiles {
    pub activity: Vec<PathBuf>,
    pub wellness: Option<PathBuf>,
    pub sleep: Option<PathBuf>,
    pub profile: PathBuf,
}

/// Finds per-user source directories under `data_dir`.
///
/// Each subdirectory holding a `profile.toml` is one user; `activity*.csv`,
/// `wellness.csv` and `sleep.csv` are picked up when present.
pub fn discover_sources(data_dir: &Path) -> Result<Vec<SourceFiles>, IngestError> {
    let io = |e| IngestError::Io {
        path: data_dir.to_path_buf(),
        source: e,
    };
    let mut dirs: Vec<PathBuf> = fs::read_dir(data_dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir() && p.join("profile.toml").is_file())
        .collect();
    dirs.sort();

    let mut sources = Vec::with_capacity(dirs.len());
    for dir in dirs {
        let mut activity: Vec<PathBuf> = fs::read_dir(&dir)
            .map_err(|e| IngestError::Io {
                path: dir.clone(),
                source: e,
            })?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("activity") && n.ends_with(".csv"))
            })
            .collect();
        activity.sort();
        let existing = |name: &str| Some(dir.join(name)).filter(|p| p.is_file());
        sources.push(SourceFiles {
            activity,
            wellness: existing("wellness.csv"),
            sleep: existing("sleep.csv"),
            profile: dir.join("profile.toml"),
        });
    }
    Ok(sources)
}

#[derive(Deserialize)]
struct ProfileFile {
    user_id: String,
    age: i64,
    gender: String,
    chronotype: String,
}

pub fn parse_profile(path: &Path) -> Result<UserProfile, IngestError> {
    let text = fs::read_to_string(path).map_err(|e| IngestError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let raw: ProfileFile = toml::from_str(&text).map_err(|e| IngestError::Schema {
        file: path.to_path_buf(),
        message: e.message().to_string(),
    })?;
    let bad = |message: String| IngestError::Schema {
        file: path.to_path_buf(),
        message,
    };
    let age = u32::try_from(raw.age)
        .ok()
        .filter(|a| *a > 0)
        .ok_or_else(|| bad(format!("age must be a positive integer, got {}", raw.age)))?;
    let profile = UserProfile {
        user_id: raw.user_id,
        age,
        gender: raw.gender.parse::<Gender>().map_err(bad)?,
        chronotype: raw.chronotype.parse::<Chronotype>().map_err(bad)?,
    };
    profile.validate()?;
    Ok(profile)
}

/// Parses one user's source files into a [`RawUserSeries`].
pub fn parse_sources(files: &SourceFiles) -> Result<RawUserSeries, IngestError> {
    let profile = parse_profile(&files.profile)?;
    let mut activity = Vec::new();
    for path in &files.activity {
        activity.extend(parse_entries(
            path,
            &Variable::ACTIVITY,
            &["date", "datetime"],
        )?);
    }
    let wellness = match &files.wellness {
        Some(path) => parse_entries(path, &Variable::WELLNESS, &["datetime"])?,
        None => Vec::new(),
    };
    let sleep = match &files.sleep {
        Some(path) => parse_sleep(path)?,
        None => Vec::new(),
    };
    Ok(RawUserSeries {
        profile,
        activity,
        wellness,
        sleep,
    })
}

/// Accepts `YYYY-MM-DD`, `YYYY-MM-DD HH:MM[:SS]` and RFC 3339-like stamps
/// (a trailing `Z` or offset is ignored: recordings are in local time).
pub fn parse_timestamp(raw: &str) -> Option<NaiveDateTime> {
    let s = raw.trim();
    if let Ok(date) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Some(date.and_time(NaiveTime::MIN));
    }
    let s = s.trim_end_matches('Z');
    let s = match s.rfind(['+', '-']) {
        Some(idx) if idx > 10 && s[idx..].contains(':') && s[..idx].contains(['T', ' ']) => {
            &s[..idx]
        }
        _ => s,
    };
    const FORMATS: [&str; 4] = [
        "%Y-%m-%dT%H:%M:%S%.f",
        "%Y-%m-%d %H:%M:%S%.f",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M",
    ];
    FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
}

struct CsvFile {
    path: PathBuf,
    headers: HashMap<String, usize>,
    reader: csv::Reader<fs::File>,
}

fn open_csv(path: &Path) -> Result<CsvFile, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .enumerate()
        .map(|(i, h)| (h.to_string(), i))
        .collect();
    Ok(CsvFile {
        path: path.to_path_buf(),
        headers,
        reader,
    })
}

fn csv_error(path: &Path, e: csv::Error) -> IngestError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => IngestError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => IngestError::Malformed {
            file: path.to_path_buf(),
            line,
            column: String::new(),
            message: format!("{other:?}"),
        },
    }
}

fn parse_number(
    file: &Path,
    line: u64,
    column: &str,
    raw: &str,
) -> Result<Option<f64>, IngestError> {
    if raw.is_empty() {
        return Ok(None);
    }
    raw.parse::<f64>()
        .map(Some)
        .map_err(|_| IngestError::Malformed {
            file: file.to_path_buf(),
            line,
            column: column.to_string(),
            message: format!("not a number: {raw:?}"),
        })
}

fn parse_entries(
    path: &Path,
    variables: &[Variable],
    time_columns: &[&str],
) -> Result<Vec<RawEntry>, IngestError> {
    let mut file = open_csv(path)?;
    let (time_name, time_idx) = time_columns
        .iter()
        .find_map(|name| file.headers.get(*name).map(|i| (*name, *i)))
        .ok_or_else(|| IngestError::Schema {
            file: path.to_path_buf(),
            message: format!("missing mandatory column {}", time_columns.join(" or ")),
        })?;
    let columns: Vec<(Variable, usize)> = variables
        .iter()
        .filter_map(|v| file.headers.get(v.column()).map(|i| (*v, *i)))
        .collect();

    let mut entries = Vec::new();
    for record in file.reader.records() {
        let record = record.map_err(|e| csv_error(&file.path, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let stamp = record.get(time_idx).unwrap_or("");
        let timestamp = parse_timestamp(stamp).ok_or_else(|| IngestError::Malformed {
            file: file.path.clone(),
            line,
            column: time_name.to_string(),
            message: format!("unparseable timestamp {stamp:?}"),
        })?;
        let mut values = Vec::with_capacity(columns.len());
        for (variable, idx) in &columns {
            let raw = record.get(*idx).unwrap_or("");
            if let Some(value) = parse_number(&file.path, line, variable.column(), raw)? {
                variable
                    .check_value(value)
                    .map_err(|message| IngestError::Range {
                        file: file.path.clone(),
                        line,
                        column: variable.column().to_string(),
                        message,
                    })?;
                values.push((*variable, value));
            }
        }
        entries.push(RawEntry { timestamp, values });
    }
    Ok(entries)
}

fn parse_sleep(path: &Path) -> Result<Vec<SleepEntry>, IngestError> {
    let mut file = open_csv(path)?;
    let index = |name: &str| {
        file.headers
            .get(name)
            .copied()
            .ok_or_else(|| IngestError::Schema {
                file: path.to_path_buf(),
                message: format!("missing mandatory column {name}"),
            })
    };
    let date_idx = index("date")?;
    let asleep_idx = index("minutes_asleep")?;
    let bed_idx = index("time_in_bed")?;

    let mut entries = Vec::new();
    for record in file.reader.records() {
        let record = record.map_err(|e| csv_error(&file.path, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let stamp = record.get(date_idx).unwrap_or("");
        let date =
            parse_timestamp(stamp)
                .map(|t| t.date())
                .ok_or_else(|| IngestError::Malformed {
                    file: file.path.clone(),
                    line,
                    column: "date".into(),
                    message: format!("unparseable date {stamp:?}"),
                })?;
        let asleep = parse_number(
            &file.path,
            line,
            "minutes_asleep",
            record.get(asleep_idx).unwrap_or(""),
        )?;
        let in_bed = parse_number(
            &file.path,
            line,
            "time_in_bed",
            record.get(bed_idx).unwrap_or(""),
        )?;
        let (Some(minutes_asleep), Some(time_in_bed)) = (asleep, in_bed) else {
            continue;
        };
        for (column, value) in [
            ("minutes_asleep", minutes_asleep),
            ("time_in_bed", time_in_bed),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(IngestError::Range {
                    file: file.path.clone(),
                    line,
                    column: column.into(),
                    message: format!("{column} must be non-negative, got {value}"),
                });
            }
        }
        if minutes_asleep > time_in_bed {
            return Err(IngestError::Range {
                file: file.path.clone(),
                line,
                column: "minutes_asleep".into(),
                message: format!(
                    "minutes_asleep {minutes_asleep} exceeds time_in_bed {time_in_bed}"
                ),
            });
        }
        entries.push(SleepEntry {
            date,
            minutes_asleep,
            time_in_bed,
        });
    }
    Ok(entries)
}
