//! Event tuples, event logs and demographics, with their TSV formats.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventGroup {
    /// Page view.
    Pv,
    /// Search query.
    Sq,
    /// Search link click.
    Slc,
    /// Organic link click.
    Olc,
    /// Ad view.
    Adv,
    /// Ad click.
    Adc,
}

impl EventGroup {
    pub const ALL: [EventGroup; 6] = [
        EventGroup::Pv,
        EventGroup::Sq,
        EventGroup::Slc,
        EventGroup::Olc,
        EventGroup::Adv,
        EventGroup::Adc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EventGroup::Pv => "pv",
            EventGroup::Sq => "sq",
            EventGroup::Slc => "slc",
            EventGroup::Olc => "olc",
            EventGroup::Adv => "adv",
            EventGroup::Adc => "adc",
        }
    }
}

impl fmt::Display for EventGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EventGroup {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        EventGroup::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| format!("unknown event group '{s}'"))
    }
}

/// One logged event. `category` is 0-based; files use 1-based ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventTuple {
    pub user: u64,
    pub timestamp: i64,
    pub group: EventGroup,
    pub category: usize,
}

/// Events over `num_labels` categories.
///
/// TSV format: an optional `#events L=<L>` header (other `#` lines are
/// comments), then `user<TAB>group<TAB>category<TAB>timestamp` per line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventLog {
    pub num_labels: usize,
    pub events: Vec<EventTuple>,
}

impl EventLog {
    /// Validates categories and sorts the events, so that everything
    /// derived from the log is independent of input order.
    pub fn new(num_labels: usize, mut events: Vec<EventTuple>) -> Result<Self> {
        if let Some(e) = events.iter().find(|e| e.category >= num_labels) {
            return Err(Error::LabelOutOfRange {
                label: e.category + 1,
                num_labels,
            });
        }
        events.sort_unstable();
        Ok(EventLog { num_labels, events })
    }

    /// Parses a log. `num_labels` overrides the header; without either, the
    /// largest category id is used.
    pub fn read<R: BufRead>(reader: R, num_labels: Option<usize>) -> Result<Self> {
        let mut header_labels = None;
        let mut events = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            let line_no = n + 1;
            let text = line.trim();
            if text.is_empty() {
                continue;
            }
            if let Some(comment) = text.strip_prefix('#') {
                if let Some(rest) = comment.strip_prefix("events") {
                    header_labels = Some(parse_label_count(rest, line_no)?);
                }
                continue;
            }
            events.push(parse_event(text, line_no)?);
        }
        let num_labels = num_labels
            .or(header_labels)
            .unwrap_or_else(|| events.iter().map(|e| e.category + 1).max().unwrap_or(0));
        EventLog::new(num_labels, events)
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "#events L={}", self.num_labels)?;
        for e in &self.events {
            writeln!(
                w,
                "{}\t{}\t{}\t{}",
                e.user,
                e.group,
                e.category + 1,
                e.timestamp
            )?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = Vec::new();
        self.write(&mut out).expect("writing to memory cannot fail");
        String::from_utf8(out).expect("log text is UTF-8")
    }

    /// Events grouped by user, each group in log order.
    pub fn by_user(&self) -> BTreeMap<u64, Vec<EventTuple>> {
        let mut users: BTreeMap<u64, Vec<EventTuple>> = BTreeMap::new();
        for e in &self.events {
            users.entry(e.user).or_default().push(*e);
        }
        users
    }
}

fn parse_label_count(rest: &str, line: usize) -> Result<usize> {
    rest.split_whitespace()
        .find_map(|kv| kv.strip_prefix("L="))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::parse(line, "events header needs L=<count>"))
}

fn parse_event(text: &str, line: usize) -> Result<EventTuple> {
    let fields: Vec<&str> = text.split('\t').map(str::trim).collect();
    let [user, group, category, timestamp] = fields.as_slice() else {
        return Err(Error::parse(
            line,
            format!("expected 4 tab-separated fields, found {}", fields.len()),
        ));
    };
    let user = user
        .parse()
        .map_err(|_| Error::parse(line, format!("bad user id '{user}'")))?;
    let group = group.parse().map_err(|e: String| Error::parse(line, e))?;
    let category = match category.parse::<usize>() {
        Ok(c) if c >= 1 => c - 1,
        _ => return Err(Error::parse(line, format!("bad category '{category}'"))),
    };
    let timestamp = timestamp
        .parse()
        .map_err(|_| Error::parse(line, format!("bad timestamp '{timestamp}'")))?;
    Ok(EventTuple {
        user,
        timestamp,
        group,
        category,
    })
}

pub const AGE_BUCKETS: usize = crate::baselines::central::AGE_BUCKETS;
pub const GENDERS: usize = crate::baselines::central::GENDERS;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Demographic {
    pub age: usize,
    pub gender: usize,
}

/// Demographics keyed by user id; TSV `user<TAB>age(0-8)<TAB>gender(0-1)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Demographics(pub BTreeMap<u64, Demographic>);

impl Demographics {
    pub fn get(&self, user: u64) -> Option<Demographic> {
        self.0.get(&user).copied()
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            let text = line.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = text.split('\t').map(str::trim).collect();
            let parsed = match fields.as_slice() {
                [u, a, g] => match (u.parse::<u64>(), a.parse::<usize>(), g.parse::<usize>()) {
                    (Ok(u), Ok(age), Ok(gender)) if age < AGE_BUCKETS && gender < GENDERS => {
                        Some((u, Demographic { age, gender }))
                    }
                    _ => None,
                },
                _ => None,
            };
            let (user, demo) = parsed
                .ok_or_else(|| Error::parse(n + 1, "expected user, age 0-8 and gender 0-1"))?;
            if map.insert(user, demo).is_some() {
                return Err(Error::parse(n + 1, format!("duplicate user {user}")));
            }
        }
        Ok(Demographics(map))
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        for (user, d) in &self.0 {
            writeln!(w, "{user}\t{}\t{}", d.age, d.gender)?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = Vec::new();
        self.write(&mut out).expect("writing to memory cannot fail");
        String::from_utf8(out).expect("demographics text is UTF-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_round_trip() {
        let text = "#events L=5\n7\tpv\t3\t10\n7\tadc\t5\t12\n\n# note\n2\tolc\t1\t-4\n";
        let log = EventLog::read(text.as_bytes(), None).unwrap();
        assert_eq!(log.num_labels, 5);
        assert_eq!(log.events.len(), 3);
        assert_eq!(log.events[0].timestamp, -4);
        assert_eq!(log.events[2].group, EventGroup::Adc);
        assert_eq!(log.events[2].category, 4);
        let back = EventLog::read(log.to_text().as_bytes(), None).unwrap();
        assert_eq!(back, log);
    }

    #[test]
    fn log_errors() {
        let bad = |t: &str| EventLog::read(t.as_bytes(), None).unwrap_err().to_string();
        assert!(bad("1\tclick\t2\t3\n").contains("unknown event group"));
        assert!(bad("1\tpv\t0\t3\n").contains("bad category"));
        assert!(bad("1\tpv\t2\n").contains("4 tab-separated"));
        assert!(bad("1\tpv\t2\t3\n1\tpv\tx\t3\n").contains("line 2"));
        assert!(EventLog::read("#events L=2\n1\tpv\t3\t0\n".as_bytes(), None).is_err());
        let inferred = EventLog::read("1\tpv\t4\t0\n".as_bytes(), None).unwrap();
        assert_eq!(inferred.num_labels, 4);
    }

    #[test]
    fn demographics_round_trip() {
        let d = Demographics::read("3\t8\t1\n1\t0\t0\n".as_bytes()).unwrap();
        assert_eq!(d.get(3), Some(Demographic { age: 8, gender: 1 }));
        assert_eq!(d.get(2), None);
        assert_eq!(Demographics::read(d.to_text().as_bytes()).unwrap(), d);
        assert!(Demographics::read("3\t9\t1\n".as_bytes()).is_err());
        assert!(Demographics::read("3\t1\t1\n3\t2\t0\n".as_bytes()).is_err());
    }
}
