//! Delimited-text ingestion of check-in, POI and social files.
//!
//! Check-ins: `user_id, poi_id, timestamp` where the timestamp is integer
//! epoch seconds or an ISO-8601 date/datetime. POIs:
//! `poi_id, latitude, longitude[, category_id]`. Social: `user_id, friend_id`,
//! undirected. Each file may start with a header row.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use super::{CheckIn, Dataset, Poi, SocialGraph};
use crate::error::{Error, Result};
use crate::ids::{PoiId, UserId};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Delimiter {
    #[default]
    Tab,
    Comma,
}

impl Delimiter {
    pub fn byte(self) -> u8 {
        match self {
            Delimiter::Tab => b'\t',
            Delimiter::Comma => b',',
        }
    }
}

impl FromStr for Delimiter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tab" | "\\t" | "tsv" => Ok(Delimiter::Tab),
            "comma" | "," | "csv" => Ok(Delimiter::Comma),
            other => Err(Error::Config(format!(
                "unknown delimiter `{other}` (expected tab or comma)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    pub delimiter: Delimiter,
}

struct RowReader {
    path: PathBuf,
    reader: csv::Reader<File>,
}

impl RowReader {
    fn open(path: &Path, delimiter: Delimiter) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let reader = csv::ReaderBuilder::new()
            .delimiter(delimiter.byte())
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(file);
        Ok(Self {
            path: path.to_owned(),
            reader,
        })
    }

    /// Yields `(line, fields)` for every non-empty row.
    fn rows(&mut self) -> impl Iterator<Item = Result<(usize, Vec<String>)>> + '_ {
        let path = self.path.clone();
        self.reader.records().filter_map(move |rec| match rec {
            Ok(r) => {
                let line = r.position().map(|p| p.line() as usize).unwrap_or(0);
                if r.iter().all(str::is_empty) {
                    None
                } else {
                    Some(Ok((line, r.iter().map(str::to_owned).collect())))
                }
            }
            Err(e) => {
                let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
                Some(Err(Error::Parse {
                    file: path.clone(),
                    line,
                    column: 0,
                    message: e.to_string(),
                }))
            }
        })
    }

    fn err(&self, line: usize, column: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            file: self.path.clone(),
            line,
            column,
            message: message.into(),
        }
    }
}

/// Parses epoch seconds or an ISO-8601 date/datetime into epoch seconds.
pub(crate) fn parse_timestamp(s: &str) -> Option<i64> {
    if let Ok(v) = s.parse::<i64>() {
        return Some(v);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.timestamp());
    }
    for fmt in [
        "%Y-%m-%dT%H:%M:%S",
        "%Y-%m-%d %H:%M:%S",
        "%Y-%m-%dT%H:%M:%S%.f",
    ] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(dt.and_utc().timestamp());
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|dt| dt.and_utc().timestamp())
}

fn check_width(
    rows: &RowReader,
    line: usize,
    fields: &[String],
    min: usize,
    max: usize,
) -> Result<()> {
    if fields.len() < min {
        return Err(rows.err(
            line,
            fields.len() + 1,
            format!("expected at least {min} columns, found {}", fields.len()),
        ));
    }
    if fields.len() > max {
        return Err(rows.err(
            line,
            max + 1,
            format!("expected at most {max} columns, found {}", fields.len()),
        ));
    }
    Ok(())
}

fn read_pois(path: &Path, delimiter: Delimiter) -> Result<BTreeMap<PoiId, Poi>> {
    let mut rows = RowReader::open(path, delimiter)?;
    let mut out = BTreeMap::new();
    let mut first = true;
    let collected: Vec<_> = rows.rows().collect();
    for row in collected {
        let (line, f) = row?;
        let is_first = std::mem::replace(&mut first, false);
        if is_first && f.len() >= 2 && f[1].parse::<f64>().is_err() {
            continue;
        }
        check_width(&rows, line, &f, 3, 4)?;
        let lat: f64 = f[1]
            .parse()
            .map_err(|_| rows.err(line, 2, format!("invalid latitude `{}`", f[1])))?;
        let lon: f64 = f[2]
            .parse()
            .map_err(|_| rows.err(line, 3, format!("invalid longitude `{}`", f[2])))?;
        let mut poi = Poi::new(f[0].as_str(), lat, lon);
        if !(-90.0..=90.0).contains(&lat) {
            return Err(rows.err(line, 2, format!("latitude {lat} outside [-90, 90]")));
        }
        if !(lon > -180.0 && lon <= 180.0) {
            // -180 and 180 are the same meridian
            if lon == -180.0 {
                poi.longitude = 180.0;
            } else {
                return Err(rows.err(line, 3, format!("longitude {lon} outside (-180, 180]")));
            }
        }
        if let Some(cat) = f.get(3).filter(|c| !c.is_empty()) {
            poi.category = Some(cat.clone());
        }
        if out.insert(poi.id.clone(), poi).is_some() {
            return Err(rows.err(line, 1, format!("duplicate POI id `{}`", f[0])));
        }
    }
    Ok(out)
}

fn read_checkins(path: &Path, delimiter: Delimiter) -> Result<Vec<CheckIn>> {
    let mut rows = RowReader::open(path, delimiter)?;
    let mut out = Vec::new();
    let mut first = true;
    let collected: Vec<_> = rows.rows().collect();
    for row in collected {
        let (line, f) = row?;
        let is_first = std::mem::replace(&mut first, false);
        if is_first && f.len() >= 3 && parse_timestamp(&f[2]).is_none() {
            continue;
        }
        check_width(&rows, line, &f, 3, 3)?;
        let ts = parse_timestamp(&f[2])
            .ok_or_else(|| rows.err(line, 3, format!("invalid timestamp `{}`", f[2])))?;
        if ts < 0 {
            return Err(rows.err(line, 3, format!("timestamp {ts} before the epoch")));
        }
        if f[0].is_empty() {
            return Err(rows.err(line, 1, "empty user id"));
        }
        if f[1].is_empty() {
            return Err(rows.err(line, 2, "empty POI id"));
        }
        out.push(CheckIn::new(f[0].as_str(), f[1].as_str(), ts));
    }
    Ok(out)
}

fn read_social(path: &Path, delimiter: Delimiter) -> Result<Vec<(UserId, UserId)>> {
    let mut rows = RowReader::open(path, delimiter)?;
    let mut out = Vec::new();
    let mut first = true;
    let collected: Vec<_> = rows.rows().collect();
    for row in collected {
        let (line, f) = row?;
        let is_first = std::mem::replace(&mut first, false);
        if is_first
            && f.len() == 2
            && f[0].eq_ignore_ascii_case("user_id")
            && f[1].eq_ignore_ascii_case("friend_id")
        {
            continue;
        }
        check_width(&rows, line, &f, 2, 2)?;
        out.push((UserId::new(f[0].as_str()), UserId::new(f[1].as_str())));
    }
    Ok(out)
}

/// Loads a dataset from delimited files. Users are the users appearing in
/// the check-in file; social edges touching other users are dropped.
pub fn load_dataset(
    checkin_path: &Path,
    poi_path: &Path,
    social_path: Option<&Path>,
    opts: LoadOptions,
) -> Result<Dataset> {
    let pois = read_pois(poi_path, opts.delimiter)?;
    let checkins = read_checkins(checkin_path, opts.delimiter)?;
    if let Some(bad) = checkins.iter().find(|c| !pois.contains_key(&c.poi)) {
        return Err(Error::unknown("POI", &bad.poi));
    }
    let users: BTreeSet<UserId> = checkins.iter().map(|c| c.user.clone()).collect();
    let mut social = SocialGraph::new();
    if let Some(path) = social_path {
        let mut dropped = 0usize;
        for (a, b) in read_social(path, opts.delimiter)? {
            if users.contains(&a) && users.contains(&b) {
                social.insert(a, b);
            } else {
                dropped += 1;
            }
        }
        if dropped > 0 {
            log::debug!("dropped {dropped} social edges with users outside the check-in file");
        }
    }
    Ok(Dataset {
        users,
        pois,
        checkins,
        social,
    })
}

/// Writes `checkins.tsv`, `pois.tsv` and `social.tsv` (with headers) into
/// `dir`, in a form [`load_dataset`] reads back.
pub fn write_dataset(dir: &Path, d: &Dataset, delimiter: Delimiter) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let ext = match delimiter {
        Delimiter::Tab => "tsv",
        Delimiter::Comma => "csv",
    };
    let writer = |name: &str| -> Result<csv::Writer<File>> {
        let path = dir.join(format!("{name}.{ext}"));
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        Ok(csv::WriterBuilder::new()
            .delimiter(delimiter.byte())
            .from_writer(file))
    };

    let mut w = writer("checkins")?;
    w.write_record(["user_id", "poi_id", "timestamp"])?;
    for c in &d.checkins {
        w.write_record([c.user.as_str(), c.poi.as_str(), &c.timestamp.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(dir, e))?;

    let mut w = writer("pois")?;
    w.write_record(["poi_id", "latitude", "longitude", "category_id"])?;
    for p in d.pois.values() {
        w.write_record([
            p.id.as_str(),
            &p.latitude.to_string(),
            &p.longitude.to_string(),
            p.category.as_deref().unwrap_or(""),
        ])?;
    }
    w.flush().map_err(|e| Error::io(dir, e))?;

    let mut w = writer("social")?;
    w.write_record(["user_id", "friend_id"])?;
    for (a, b) in d.social.edges() {
        w.write_record([a.as_str(), b.as_str()])?;
    }
    w.flush().map_err(|e| Error::io(dir, e))?;
    Ok(())
}
