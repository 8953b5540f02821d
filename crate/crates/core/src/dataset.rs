//! Ranked datasets and the rank-extended sparse text format.
//!
//! ```text
//! #L=4 d=3
//! 3,1 | 1:0.5 3:1.0
//! 2 | 2:0.25
//! ```
//!
//! The header is optional; without it the label count and dimension are the
//! largest label and feature index seen. Labels and indices are 1-based.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::ranking::Ranking;
use crate::sparse::SparseVector;

#[derive(Debug, Clone, PartialEq)]
pub struct RankedInstance {
    pub features: SparseVector,
    pub truth: Ranking,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedDataset {
    num_labels: usize,
    dim: usize,
    instances: Vec<RankedInstance>,
}

impl RankedDataset {
    pub fn new(num_labels: usize, dim: usize, instances: Vec<RankedInstance>) -> Result<Self> {
        for inst in &instances {
            if inst.features.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: inst.features.dim(),
                });
            }
            // Re-validating also rejects empty rankings.
            Ranking::new(inst.truth.labels().to_vec(), num_labels)?;
        }
        Ok(RankedDataset {
            num_labels,
            dim,
            instances,
        })
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn instances(&self) -> &[RankedInstance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn truths(&self) -> Vec<Ranking> {
        self.instances.iter().map(|i| i.truth.clone()).collect()
    }

    /// New dataset holding the instances at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> RankedDataset {
        RankedDataset {
            num_labels: self.num_labels,
            dim: self.dim,
            instances: indices.iter().map(|&i| self.instances[i].clone()).collect(),
        }
    }

    /// Reads the rank-extended sparse format.
    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut rows: Vec<ParsedLine> = Vec::new();
        let mut max_label = 0;
        let mut max_index = 0;

        for (n, line) in reader.lines().enumerate() {
            let line_no = n + 1;
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if header.is_some() || !rows.is_empty() {
                    return Err(Error::parse(line_no, "header must be the first line"));
                }
                header = Some(parse_header(rest, line_no)?);
                continue;
            }
            let (labels, features) = parse_line(line, line_no)?;
            if let Some((num_labels, dim)) = header {
                if let Some(&l) = labels.iter().find(|&&l| l > num_labels) {
                    return Err(Error::parse(
                        line_no,
                        format!("label {l} out of range 1..={num_labels}"),
                    ));
                }
                if let Some(&(i, _)) = features.iter().find(|&&(i, _)| i > dim) {
                    return Err(Error::parse(
                        line_no,
                        format!("feature index {i} out of range 1..={dim}"),
                    ));
                }
            }
            max_label = max_label.max(labels.iter().copied().max().unwrap_or(0));
            max_index = max_index.max(features.iter().map(|&(i, _)| i).max().unwrap_or(0));
            rows.push((labels, features));
        }

        let (num_labels, dim) = header.unwrap_or((max_label, max_index));
        let instances = rows
            .into_iter()
            .map(|(labels, features)| {
                let truth = Ranking::from_vec_unchecked(labels.iter().map(|l| l - 1).collect());
                let features = SparseVector::from_pairs(
                    dim,
                    features.into_iter().map(|(i, v)| (i - 1, v)).collect(),
                )
                .expect("indices validated during parsing");
                RankedInstance { features, truth }
            })
            .collect();
        Ok(RankedDataset {
            num_labels,
            dim,
            instances,
        })
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        Self::read(text.as_bytes())
    }

    /// Writes the dataset with a header line.
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "#L={} d={}", self.num_labels, self.dim)?;
        for inst in &self.instances {
            write_instance(&mut w, &inst.truth, &inst.features)?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ASCII output")
    }
}

pub(crate) fn write_instance<W: Write>(
    w: &mut W,
    truth: &Ranking,
    features: &SparseVector,
) -> std::io::Result<()> {
    write!(w, "{truth} |")?;
    for (i, v) in features.iter() {
        write!(w, " {}:{:?}", i + 1, v)?;
    }
    writeln!(w)
}

fn parse_header(rest: &str, line_no: usize) -> Result<(usize, usize)> {
    let mut num_labels = None;
    let mut dim = None;
    for token in rest.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| Error::parse(line_no, format!("malformed header token '{token}'")))?;
        let value: usize = value
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad header value '{value}'")))?;
        match key {
            "L" => num_labels = Some(value),
            "d" => dim = Some(value),
            _ => return Err(Error::parse(line_no, format!("unknown header key '{key}'"))),
        }
    }
    match (num_labels, dim) {
        (Some(l), Some(d)) if l > 0 => Ok((l, d)),
        _ => Err(Error::parse(line_no, "header needs L>0 and d")),
    }
}

/// Returns 1-based labels and 1-based `(index, value)` pairs.
/// One-based labels and `(index, value)` pairs of a data line.
type ParsedLine = (Vec<usize>, Vec<(usize, f64)>);

fn parse_line(line: &str, line_no: usize) -> Result<ParsedLine> {
    let (label_part, feature_part) = line
        .split_once('|')
        .ok_or_else(|| Error::parse(line_no, "missing '|' separator"))?;

    let label_part = label_part.trim();
    if label_part.is_empty() {
        return Err(Error::parse(line_no, "empty ranking"));
    }
    let mut labels = Vec::new();
    for tok in label_part.split(',') {
        let tok = tok.trim();
        let label: usize = tok
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad label '{tok}'")))?;
        if label == 0 {
            return Err(Error::parse(line_no, "labels are 1-based"));
        }
        if labels.contains(&label) {
            return Err(Error::parse(line_no, format!("duplicate label {label}")));
        }
        labels.push(label);
    }

    let mut features = Vec::new();
    for term in feature_part.split_whitespace() {
        let (idx, val) = term
            .split_once(':')
            .ok_or_else(|| Error::parse(line_no, format!("malformed feature '{term}'")))?;
        let idx: usize = idx
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad feature index '{idx}'")))?;
        let val: f64 = val
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad feature value '{val}'")))?;
        if idx == 0 {
            return Err(Error::parse(line_no, "feature indices are 1-based"));
        }
        if !val.is_finite() {
            return Err(Error::parse(
                line_no,
                format!("non-finite value at index {idx}"),
            ));
        }
        if features.iter().any(|&(i, _)| i == idx) {
            return Err(Error::parse(
                line_no,
                format!("duplicate feature index {idx}"),
            ));
        }
        features.push((idx, val));
    }
    Ok((labels, features))
}
