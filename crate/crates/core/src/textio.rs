//! Helpers shared by the tagged text model files.
//!
//! Every model file starts with `#<tag> key=value ...` followed by
//! whitespace-separated rows. Floats are written in Rust's shortest
//! round-trip form, so saving and loading is lossless.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::BufRead;

use crate::error::{Error, Result};
use crate::ranking::Ranking;

pub(crate) struct Header {
    pub tag: String,
    fields: BTreeMap<String, String>,
}

impl Header {
    pub fn parse(line: &str) -> Result<Header> {
        let rest = line
            .trim()
            .strip_prefix('#')
            .ok_or_else(|| Error::parse(1, "model file must start with a '#' header"))?;
        let mut tokens = rest.split_whitespace();
        let tag = tokens
            .next()
            .ok_or_else(|| Error::parse(1, "missing model tag"))?
            .to_string();
        let mut fields = BTreeMap::new();
        for tok in tokens {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| Error::parse(1, format!("malformed header token '{tok}'")))?;
            fields.insert(k.to_string(), v.to_string());
        }
        Ok(Header { tag, fields })
    }

    pub fn expect_tag(&self, tag: &str) -> Result<()> {
        if self.tag != tag {
            return Err(Error::parse(
                1,
                format!("expected '#{tag}' model, found '#{}'", self.tag),
            ));
        }
        Ok(())
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        self.fields
            .get(key)
            .ok_or_else(|| Error::parse(1, format!("header missing '{key}'")))?
            .parse()
            .map_err(|_| Error::parse(1, format!("bad header value for '{key}'")))
    }

    pub fn flag(&self, key: &str) -> bool {
        self.fields.get(key).is_some_and(|v| v == "1")
    }
}

/// Reads the header line and the remaining non-empty lines with their
/// 1-based line numbers.
pub(crate) fn read_lines<R: BufRead>(reader: R) -> Result<(Header, Vec<(usize, String)>)> {
    let mut lines = reader.lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty model file"))??;
    let header = Header::parse(&first)?;
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        if !line.trim().is_empty() {
            rows.push((n + 2, line));
        }
    }
    Ok((header, rows))
}

pub(crate) fn parse_floats(tokens: &[&str], line: usize) -> Result<Vec<f64>> {
    tokens
        .iter()
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(line, format!("bad number '{t}'")))
        })
        .collect()
}

pub(crate) fn parse_index(token: &str, max: usize, line: usize) -> Result<usize> {
    match token.parse::<usize>() {
        Ok(v) if (1..=max).contains(&v) => Ok(v - 1),
        _ => Err(Error::parse(
            line,
            format!("bad index '{token}' (expected 1..={max})"),
        )),
    }
}

pub(crate) fn parse_ranking(token: &str, num_labels: usize, line: usize) -> Result<Ranking> {
    let labels = token
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::parse(line, format!("bad ranking '{token}'")))?;
    let r = Ranking::from_one_based(&labels, num_labels)
        .map_err(|e| Error::parse(line, e.to_string()))?;
    if !r.is_full(num_labels) {
        return Err(Error::parse(line, "expected a full ranking"));
    }
    Ok(r)
}

pub(crate) fn push_floats(out: &mut String, values: &[f64]) {
    for v in values {
        write!(out, " {v:?}").expect("writing to a String cannot fail");
    }
}
