use std::io::{Read, Write};

use super::items::{Item, SqGroup};
use super::mine::{Pattern, PatternSets};
use super::PatternError;

/// `group,items,support_count` with semicolon-joined items.
pub fn write_patterns<W: Write>(out: W, patterns: &PatternSets) -> Result<(), PatternError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["group", "items", "support_count"])?;
    for group in SqGroup::ALL {
        for p in patterns.get(group) {
            w.write_record([
                group.as_str().to_string(),
                p.items_string(),
                p.support_count.to_string(),
            ])?;
        }
    }
    w.flush()
        .map_err(|e| PatternError::Io("patterns".into(), e))
}

/// Same layout as [`write_patterns`], restricted to one group.
pub fn write_group_patterns<W: Write>(
    out: W,
    patterns: &PatternSets,
    group: SqGroup,
) -> Result<(), PatternError> {
    let mut only = PatternSets::default();
    *only.get_mut(group) = patterns.get(group).to_vec();
    write_patterns(out, &only)
}

pub fn read_patterns<R: Read>(input: R) -> Result<PatternSets, PatternError> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["group", "items", "support_count"] {
        return Err(PatternError::Argument(format!(
            "pattern header must be group,items,support_count, got {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut sets = PatternSets::default();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let bad = |m: String| PatternError::Argument(format!("pattern row {}: {m}", line + 2));
        let group: SqGroup = record[0].parse().map_err(bad)?;
        let mut items = record[1]
            .split(';')
            .map(str::parse::<Item>)
            .collect::<Result<Vec<_>, _>>()?;
        items.sort();
        items.dedup();
        let support_count: usize = record[2]
            .trim()
            .parse()
            .map_err(|_| bad(format!("invalid support count {:?}", &record[2])))?;
        sets.get_mut(group).push(Pattern {
            items,
            support_count,
            group,
        });
    }
    sets.sort();
    Ok(sets)
}
