//! Canonical on-disk dataset: `profiles.csv` plus one `days/<user_id>.csv`
//! per user, written with a fixed column order so reruns are byte-identical.

use std::fs;
use std::path::Path;

use chrono::NaiveDate;

use super::parse::parse_timestamp;
use super::record::{DayRecord, UserProfile, UserSeries, Variable};
use super::IngestError;

pub const DATASET_COLUMNS: [&str; 20] = [
    "date",
    "calories",
    "distance",
    "steps",
    "sedentary_min",
    "lightly_min",
    "moderately_min",
    "very_min",
    "zone0_min",
    "zone1_min",
    "zone2_min",
    "zone3_min",
    "fatigue",
    "mood",
    "readiness",
    "soreness",
    "stress",
    "minutes_asleep",
    "time_in_bed",
    "sq",
];

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> IngestError + '_ {
    move |source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> IngestError + '_ {
    move |e| IngestError::Malformed {
        file: path.to_path_buf(),
        line: e.position().map(|p| p.line()).unwrap_or(0),
        column: String::new(),
        message: e.to_string(),
    }
}

pub fn write_dataset(dir: &Path, dataset: &[UserSeries]) -> Result<(), IngestError> {
    let days_dir = dir.join("days");
    fs::create_dir_all(&days_dir).map_err(io_err(&days_dir))?;

    let profiles_path = dir.join("profiles.csv");
    let mut profiles = csv::Writer::from_path(&profiles_path).map_err(csv_err(&profiles_path))?;
    profiles
        .write_record(["user_id", "age", "gender", "chronotype"])
        .map_err(csv_err(&profiles_path))?;
    let mut sorted: Vec<&UserSeries> = dataset.iter().collect();
    sorted.sort_by(|a, b| a.user_id().cmp(b.user_id()));
    for series in &sorted {
        let p = series.profile();
        profiles
            .write_record([
                p.user_id.as_str(),
                &p.age.to_string(),
                p.gender.as_str(),
                p.chronotype.as_str(),
            ])
            .map_err(csv_err(&profiles_path))?;
    }
    profiles.flush().map_err(io_err(&profiles_path))?;

    for series in sorted {
        let path = days_dir.join(format!("{}.csv", series.user_id()));
        let mut writer = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
        writer
            .write_record(DATASET_COLUMNS)
            .map_err(csv_err(&path))?;
        for day in series.days() {
            let mut row = Vec::with_capacity(DATASET_COLUMNS.len());
            row.push(day.date.format("%Y-%m-%d").to_string());
            for variable in Variable::ALL {
                row.push(day.get(variable).map(|v| v.to_string()).unwrap_or_default());
            }
            row.push(day.sq.map(|v| v.to_string()).unwrap_or_default());
            writer.write_record(&row).map_err(csv_err(&path))?;
        }
        writer.flush().map_err(io_err(&path))?;
    }
    Ok(())
}

pub fn read_dataset(dir: &Path) -> Result<Vec<UserSeries>, IngestError> {
    let profiles_path = dir.join("profiles.csv");
    let mut reader = csv::Reader::from_path(&profiles_path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => IngestError::Io {
            path: profiles_path.clone(),
            source,
        },
        other => IngestError::Schema {
            file: profiles_path.clone(),
            message: format!("{other:?}"),
        },
    })?;
    let mut dataset = Vec::new();
    for row in reader.records() {
        let row = row.map_err(csv_err(&profiles_path))?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize, column: &str| {
            row.get(i).ok_or_else(|| IngestError::Malformed {
                file: profiles_path.clone(),
                line,
                column: column.into(),
                message: "missing field".into(),
            })
        };
        let malformed = |column: &str, message: String| IngestError::Malformed {
            file: profiles_path.clone(),
            line,
            column: column.into(),
            message,
        };
        let profile = UserProfile {
            user_id: field(0, "user_id")?.to_string(),
            age: field(1, "age")?
                .parse()
                .map_err(|_| malformed("age", "not a positive integer".into()))?,
            gender: field(2, "gender")?
                .parse()
                .map_err(|m| malformed("gender", m))?,
            chronotype: field(3, "chronotype")?
                .parse()
                .map_err(|m| malformed("chronotype", m))?,
        };
        let days_path = dir.join("days").join(format!("{}.csv", profile.user_id));
        let days = read_days(&days_path)?;
        dataset.push(UserSeries::new(profile, days)?);
    }
    Ok(dataset)
}

fn read_days(path: &Path) -> Result<Vec<DayRecord>, IngestError> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let headers = reader.headers().map_err(csv_err(path))?.clone();
    let index = |name: &str| headers.iter().position(|h| h == name);
    let date_idx = index("date").ok_or_else(|| IngestError::Schema {
        file: path.to_path_buf(),
        message: "missing mandatory column date".into(),
    })?;
    let columns: Vec<(Variable, usize)> = Variable::ALL
        .iter()
        .filter_map(|v| index(v.column()).map(|i| (*v, i)))
        .collect();

    let mut days = Vec::new();
    for row in reader.records() {
        let row = row.map_err(csv_err(path))?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let raw_date = row.get(date_idx).unwrap_or("");
        let date: NaiveDate =
            parse_timestamp(raw_date)
                .map(|t| t.date())
                .ok_or_else(|| IngestError::Malformed {
                    file: path.to_path_buf(),
                    line,
                    column: "date".into(),
                    message: format!("unparseable date {raw_date:?}"),
                })?;
        let mut record = DayRecord::empty(date);
        for (variable, idx) in &columns {
            let raw = row.get(*idx).unwrap_or("").trim();
            if raw.is_empty() {
                continue;
            }
            let value: f64 = raw.parse().map_err(|_| IngestError::Malformed {
                file: path.to_path_buf(),
                line,
                column: variable.column().into(),
                message: format!("not a number: {raw:?}"),
            })?;
            record
                .set(*variable, Some(value))
                .map_err(|message| IngestError::Range {
                    file: path.to_path_buf(),
                    line,
                    column: variable.column().into(),
                    message,
                })?;
        }
        days.push(record);
    }
    Ok(days)
}
