//! Plain-text graph files.
//!
//! ```text
//! n 4
//! 0 1 1
//! 1 2 0.5
//! ```
//!
//! A header `n <order>` followed by `<i> <j> <weight>` lines for the nonzero
//! upper-triangle entries (`i <= j`, 0-based). Blank lines and lines starting
//! with `#` are ignored. Labels are not stored; read graphs use index labels.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use super::{ParseError, WeightedGraph};

pub fn write_graph(g: &WeightedGraph) -> String {
    let n = g.order();
    let mut out = format!("n {n}\n");
    for i in 0..n {
        for j in i..n {
            let w = g.weight(i, j);
            if w != 0.0 {
                writeln!(out, "{i} {j} {w}").unwrap();
            }
        }
    }
    out
}

pub fn read_graph(text: &str) -> Result<WeightedGraph, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let err = |line: usize, msg: String| ParseError::new(line, format!("line {line}: {msg}"));

    let (hline, header) = lines.next().ok_or_else(|| err(1, "missing header".into()))?;
    let n = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["n", k] => k
            .parse::<usize>()
            .map_err(|_| err(hline, format!("bad order {k:?}")))?,
        _ => return Err(err(hline, format!("expected `n <order>`, got {header:?}"))),
    };
    if n == 0 {
        return Err(err(hline, "order must be positive".into()));
    }
    let mut w = DMatrix::zeros(n, n);
    for (ln, line) in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [i, j, x] = parts.as_slice() else {
            return Err(err(ln, format!("expected `<i> <j> <weight>`, got {line:?}")));
        };
        let i: usize = i.parse().map_err(|_| err(ln, format!("bad index {i:?}")))?;
        let j: usize = j.parse().map_err(|_| err(ln, format!("bad index {j:?}")))?;
        let x: f64 = x.parse().map_err(|_| err(ln, format!("bad weight {x:?}")))?;
        if i >= n || j >= n {
            return Err(err(ln, format!("index out of range for order {n}")));
        }
        if i > j {
            return Err(err(ln, "entries must be upper-triangle (i <= j)".into()));
        }
        w[(i, j)] = x;
        w[(j, i)] = x;
    }
    WeightedGraph::from_signed_matrix(w, None).map_err(|e| err(hline, e.to_string()))
}
