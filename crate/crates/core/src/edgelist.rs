//! Plain-text edge lists.
//!
//! ```text
//! # converging path
//! n 3
//! 0 1
//! 1 2 0.5
//! ```
//!
//! The first non-comment line is `n <count>`; each further line is
//! `<source> <target> [weight]` with the weight defaulting to 1. Lines whose
//! first non-blank character is `#` are comments, blank lines are ignored.

use std::fmt::Write;

use thiserror::Error;

use crate::digraph::{Arc, Digraph};
use crate::error::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EdgeListError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Invalid(#[from] Error),
}

fn parse_err(line: usize, reason: impl Into<String>) -> EdgeListError {
    EdgeListError::Parse {
        line,
        reason: reason.into(),
    }
}

pub fn parse_edge_list(text: &str) -> Result<Digraph, EdgeListError> {
    let mut order: Option<usize> = None;
    let mut arcs = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match order {
            None => {
                if fields.len() != 2 || fields[0] != "n" {
                    return Err(parse_err(line_no, "expected header `n <count>`"));
                }
                let n = fields[1].parse::<usize>().map_err(|_| {
                    parse_err(line_no, format!("invalid node count `{}`", fields[1]))
                })?;
                order = Some(n);
            }
            Some(_) => {
                if !(2..=3).contains(&fields.len()) {
                    return Err(parse_err(line_no, "expected `<source> <target> [weight]`"));
                }
                let node = |s: &str| {
                    s.parse::<usize>()
                        .map_err(|_| parse_err(line_no, format!("invalid node index `{s}`")))
                };
                let source = node(fields[0])?;
                let target = node(fields[1])?;
                let weight = match fields.get(2) {
                    Some(w) => w
                        .parse::<f64>()
                        .map_err(|_| parse_err(line_no, format!("invalid weight `{w}`")))?,
                    None => 1.0,
                };
                arcs.push(Arc::new(source, target, weight));
            }
        }
    }

    let n = order
        .ok_or_else(|| parse_err(text.lines().count().max(1), "missing header `n <count>`"))?;
    Ok(Digraph::new(n, arcs)?)
}

/// Serializes a digraph so that [`parse_edge_list`] reproduces it exactly.
pub fn write_edge_list(g: &Digraph) -> String {
    let mut out = format!("n {}\n", g.order());
    for a in g.arcs() {
        // `{}` on f64 is the shortest representation that round-trips.
        writeln!(out, "{} {} {}", a.source, a.target, a.weight).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_default_weights() {
        let g = parse_edge_list("# path\n\nn 3\n0 1\n  # mid\n1 2 0.25\n").unwrap();
        assert_eq!(g, Digraph::new(3, [(0, 1, 1.0), (1, 2, 0.25)]).unwrap());
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_edge_list("n 2\n0 x\n").unwrap_err();
        assert_eq!(
            err,
            EdgeListError::Parse {
                line: 2,
                reason: "invalid node index `x`".into()
            }
        );
        assert!(matches!(
            parse_edge_list("0 1\n"),
            Err(EdgeListError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_edge_list("# nothing\n"),
            Err(EdgeListError::Parse { .. })
        ));
        assert!(matches!(
            parse_edge_list("n 2\n0 1 1 1\n"),
            Err(EdgeListError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn validation_errors_pass_through() {
        assert!(matches!(
            parse_edge_list("n 2\n0 1 0\n"),
            Err(EdgeListError::Invalid(Error::NonPositiveWeight { .. }))
        ));
        assert_eq!(
            parse_edge_list("n 0\n"),
            Err(EdgeListError::Invalid(Error::EmptyGraphOrder))
        );
    }
}
