//! `#amm L=<L> d=<d> [norm=1]` followed by one `<class> <w_1> ... <w_d>`
//! line per stored weight. Saved weights are literal (shrink folded in).

use std::fmt::Write as _;
use std::io::BufRead;

use super::AmmModel;
use crate::error::{Error, Result};
use crate::textio::{parse_floats, parse_index, push_floats, read_lines};

impl AmmModel {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        write!(out, "#amm L={} d={}", self.num_labels(), self.dim()).unwrap();
        if self.normalizes_input() {
            out.push_str(" norm=1");
        }
        out.push('\n');
        let scale = self.scale();
        for (c, weights) in self.raw_classes().iter().enumerate() {
            for w in weights {
                write!(out, "{}", c + 1).unwrap();
                if scale == 1.0 {
                    push_floats(&mut out, w);
                } else {
                    let scaled: Vec<f64> = w.iter().map(|v| v * scale).collect();
                    push_floats(&mut out, &scaled);
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let (header, rows) = read_lines(reader)?;
        header.expect_tag("amm")?;
        let num_labels = header.usize("L")?;
        let dim = header.usize("d")?;
        let mut classes = vec![Vec::new(); num_labels];
        for (line, text) in rows {
            let tokens: Vec<&str> = text.split_whitespace().collect();
            let class = parse_index(tokens[0], num_labels, line)?;
            let w = parse_floats(&tokens[1..], line)?;
            if w.len() != dim {
                return Err(Error::parse(
                    line,
                    format!("expected {dim} weights, found {}", w.len()),
                ));
            }
            classes[class].push(w);
        }
        let mut model = AmmModel::from_weights(dim, classes)?;
        model.set_normalize_input(header.flag("norm"));
        Ok(model)
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        Self::read(text.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amm::WeightSlot;
    use crate::sparse::SparseVector;

    #[test]
    fn round_trip_folds_scale() {
        let mut m = AmmModel::new(3, 2, 20);
        let x = SparseVector::from_dense(&[0.1, -3.0]);
        m.promote_or_update(2, WeightSlot::Zero, 1.0, &x);
        m.shrink(0.3);
        let text = m.to_text();
        assert!(text.starts_with("#amm L=3 d=2\n3 "), "{text}");
        let back = AmmModel::parse_str(&text).unwrap();
        assert_eq!(back.weights(2), m.weights(2));
        assert_eq!(back.num_weights(0), 0);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn normalize_flag_survives() {
        let mut m = AmmModel::new(2, 1, 20);
        m.set_normalize_input(true);
        let back = AmmModel::parse_str(&m.to_text()).unwrap();
        assert!(back.normalizes_input());
    }

    #[test]
    fn rejects_malformed() {
        assert!(AmmModel::parse_str("#lr L=2 d=1\n").is_err());
        assert!(AmmModel::parse_str("#amm L=2 d=2\n1 0.5\n").is_err());
        assert!(AmmModel::parse_str("#amm L=2 d=1\n3 0.5\n").is_err());
        assert!(AmmModel::parse_str("#amm L=2\n").is_err());
    }
}
