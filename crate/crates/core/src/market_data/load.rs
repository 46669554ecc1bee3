use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DailyObservation, DailyReturns, RawSeries};
use crate::error::{Error, Result};
use crate::month::MonthStamp;

/// Maps logical series names onto the columns of a monthly file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonthlySchema {
    pub date_column: String,
    pub delimiter: char,
    /// `(logical name, file column)` pairs, in output order.
    pub columns: Vec<(String, String)>,
    /// Multiplier applied after parsing, keyed by logical name (e.g. 0.01 for
    /// columns stored in percent).
    pub scale: BTreeMap<String, f64>,
}

impl Default for MonthlySchema {
    fn default() -> Self {
        let mut names = vec!["mkt", "rf"];
        names.extend(super::MACRO_PREDICTORS);
        names.push("npy");
        Self {
            date_column: "date".into(),
            delimiter: ',',
            columns: names.iter().map(|n| (n.to_string(), n.to_string())).collect(),
            scale: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DailySchema {
    pub date_column: String,
    pub value_column: String,
    pub delimiter: char,
    pub scale: f64,
}

impl Default for DailySchema {
    fn default() -> Self {
        Self {
            date_column: "date".into(),
            value_column: "mktrf".into(),
            delimiter: ',',
            scale: 1.0,
        }
    }
}

fn open_reader(path: &Path, delimiter: char) -> Result<csv::Reader<File>> {
    if !delimiter.is_ascii() {
        return Err(Error::Config(format!("delimiter {delimiter:?} is not ASCII")));
    }
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .delimiter(delimiter as u8)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn column_index(headers: &csv::StringRecord, column: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| Error::Schema {
            column: column.to_string(),
        })
}

fn parse_value(raw: &str) -> Option<Option<f64>> {
    match raw {
        "" | "NA" | "NaN" | "nan" | "." => Some(None),
        _ => raw.parse::<f64>().ok().filter(|v| v.is_finite()).map(Some),
    }
}

fn parse_error(path: &Path, record: &csv::StringRecord, message: String) -> Error {
    Error::Parse {
        file: path.display().to_string(),
        line: record.position().map_or(0, |p| p.line()),
        message,
    }
}

fn csv_error(path: &Path, err: csv::Error) -> Error {
    Error::Parse {
        file: path.display().to_string(),
        line: err.position().map_or(0, |p| p.line()),
        message: err.to_string(),
    }
}

/// Reads a delimited monthly file into one [`RawSeries`] per mapped column.
///
/// Dates must be `yyyymm`, strictly increasing and contiguous. A series may
/// start late or end early (empty cells at either edge), but an empty cell
/// between two observed values is reported as a gap.
pub fn load_monthly(path: impl AsRef<Path>, schema: &MonthlySchema) -> Result<Vec<RawSeries>> {
    let path = path.as_ref();
    let mut reader = open_reader(path, schema.delimiter)?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let date_idx = column_index(&headers, &schema.date_column)?;
    let indices = schema
        .columns
        .iter()
        .map(|(_, column)| column_index(&headers, column))
        .collect::<Result<Vec<_>>>()?;

    let mut months = Vec::new();
    let mut cells: Vec<Vec<Option<f64>>> = vec![Vec::new(); indices.len()];
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let raw_date = record.get(date_idx).unwrap_or("");
        let month = MonthStamp::parse_yyyymm(raw_date).ok_or_else(|| {
            parse_error(path, &record, format!("invalid yyyymm date \"{raw_date}\""))
        })?;
        if let Some(&prev) = months.last() {
            let expected = MonthStamp::succ(prev);
            if month > expected {
                return Err(Error::Gap {
                    series: schema.date_column.clone(),
                    missing: expected,
                });
            }
            if month < expected {
                return Err(parse_error(
                    path,
                    &record,
                    format!("month {month} is out of order or duplicated"),
                ));
            }
        }
        months.push(month);
        for (slot, (&idx, (logical, column))) in cells
            .iter_mut()
            .zip(indices.iter().zip(&schema.columns))
        {
            let raw = record.get(idx).unwrap_or("");
            let value = parse_value(raw).ok_or_else(|| {
                parse_error(path, &record, format!("invalid number \"{raw}\" in column \"{column}\""))
            })?;
            let scale = schema.scale.get(logical).copied().unwrap_or(1.0);
            slot.push(value.map(|v| v * scale));
        }
    }

    schema
        .columns
        .iter()
        .zip(cells)
        .map(|((logical, _), values)| {
            let first = values.iter().position(Option::is_some);
            let last = values.iter().rposition(Option::is_some);
            let (Some(first), Some(last)) = (first, last) else {
                return Err(Error::InsufficientData {
                    what: format!("series \"{logical}\""),
                    needed: 1,
                    got: 0,
                });
            };
            let mut obs = Vec::with_capacity(last - first + 1);
            for i in first..=last {
                match values[i] {
                    Some(v) => obs.push((months[i], v)),
                    None => {
                        return Err(Error::Gap {
                            series: logical.clone(),
                            missing: months[i],
                        })
                    }
                }
            }
            RawSeries::from_observations(logical.clone(), obs)
        })
        .collect()
}

/// Reads a daily file with `yyyymmdd` dates, grouping observations by month.
pub fn load_daily(path: impl AsRef<Path>, schema: &DailySchema) -> Result<DailyReturns> {
    let path = path.as_ref();
    let mut reader = open_reader(path, schema.delimiter)?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let date_idx = column_index(&headers, &schema.date_column)?;
    let value_idx = column_index(&headers, &schema.value_column)?;

    let mut groups: Vec<(MonthStamp, Vec<DailyObservation>)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let raw_date = record.get(date_idx).unwrap_or("");
        let parsed = (raw_date.len() == 8)
            .then(|| {
                let month = MonthStamp::parse_yyyymm(&raw_date[..6])?;
                let day: u8 = raw_date[6..].parse().ok()?;
                (1..=31).contains(&day).then_some((month, day))
            })
            .flatten();
        let (month, day) = parsed.ok_or_else(|| {
            parse_error(path, &record, format!("invalid yyyymmdd date \"{raw_date}\""))
        })?;
        let raw = record.get(value_idx).unwrap_or("");
        let value = parse_value(raw).flatten().ok_or_else(|| {
            parse_error(path, &record, format!("invalid daily return \"{raw}\""))
        })?;
        let obs = DailyObservation {
            day,
            excess_return: value * schema.scale,
        };
        match groups.last_mut() {
            Some((last, days)) if *last == month => {
                if day <= days.last().map_or(0, |d| d.day) {
                    return Err(parse_error(path, &record, format!("day {raw_date} out of order")));
                }
                days.push(obs);
            }
            Some((last, _)) if *last > month => {
                return Err(parse_error(path, &record, format!("month {month} out of order")));
            }
            _ => groups.push((month, vec![obs])),
        }
    }
    DailyReturns::new(groups)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn schema(cols: &[&str]) -> MonthlySchema {
        MonthlySchema {
            columns: cols.iter().map(|c| (c.to_string(), c.to_string())).collect(),
            ..MonthlySchema::default()
        }
    }

    #[test]
    fn parses_contiguous_months() {
        let f = write("date,mkt,rf\n192701,0.01,0.003\n192702,0.02,0.003\n192703,-0.01,0.002\n");
        let series = load_monthly(f.path(), &schema(&["mkt", "rf"])).unwrap();
        assert_eq!(series.len(), 2);
        assert!(series.iter().all(|s| s.len() == 3));
        assert_eq!(series[0].name(), "mkt");
        assert_eq!(series[1].values(), &[0.003, 0.003, 0.002]);
    }

    #[test]
    fn missing_row_is_a_gap() {
        let f = write("date,mkt,rf\n192701,0.01,0.003\n192703,-0.01,0.002\n");
        let err = load_monthly(f.path(), &schema(&["mkt", "rf"])).unwrap_err();
        match err {
            Error::Gap { missing, .. } => assert_eq!(missing, MonthStamp::new(1927, 2).unwrap()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_column_names_the_column() {
        let f = write("date,mkt,rf\n192701,0.01,0.003\n");
        let err = load_monthly(f.path(), &schema(&["mkt", "dp"])).unwrap_err();
        assert!(matches!(err, Error::Schema { ref column } if column == "dp"));
    }

    #[test]
    fn interior_blank_is_a_gap_but_edges_are_trimmed() {
        let f = write("date,a,b\n192701,,1\n192702,1,\n192703,2,3\n192704,3,\n");
        let err = load_monthly(f.path(), &schema(&["a", "b"])).unwrap_err();
        assert!(matches!(err, Error::Gap { ref series, .. } if series == "b"));

        let f = write("date,a\n192701,\n192702,1\n192703,2\n192704,\n");
        let s = load_monthly(f.path(), &schema(&["a"])).unwrap();
        assert_eq!(s[0].start(), MonthStamp::new(1927, 2).unwrap());
        assert_eq!(s[0].len(), 2);
    }

    #[test]
    fn scale_and_custom_delimiter() {
        let f = write("yyyymm;MKT\n192701;1.5\n192702;-2\n");
        let schema = MonthlySchema {
            date_column: "yyyymm".into(),
            delimiter: ';',
            columns: vec![("mkt".into(), "MKT".into())],
            scale: [("mkt".to_string(), 0.01)].into_iter().collect(),
        };
        let s = load_monthly(f.path(), &schema).unwrap();
        assert_eq!(s[0].values(), &[0.015, -0.02]);
    }

    #[test]
    fn daily_groups_by_month() {
        let mut content = String::from("date,mktrf\n");
        for d in 1..=12 {
            content.push_str(&format!("192701{d:02},0.001\n"));
        }
        for d in 1..=11 {
            content.push_str(&format!("192702{d:02},-0.002\n"));
        }
        let f = write(&content);
        let daily = load_daily(f.path(), &DailySchema::default()).unwrap();
        assert_eq!(daily.len(), 2);
        assert_eq!(daily.group(MonthStamp::new(1927, 2).unwrap()).unwrap().len(), 11);
    }

    #[test]
    fn daily_short_month_rejected() {
        let f = write("date,mktrf\n19270103,0.001\n19270104,0.002\n");
        assert!(matches!(
            load_daily(f.path(), &DailySchema::default()),
            Err(Error::InsufficientData { .. })
        ));
    }
}
