//! Graph expressions used on the command line.
//!
//! ```text
//! path:4  cycle:6  star:16  cube:3  cocktail:4  complete:5  empty:3
//! antipodal:3            antipodal matching on the vertices of Q_3
//! wpath:0.5/1            weighted path with the given edge weights
//! cone2:<graph>          double cone
//! prod(<a>,<b>)          Cartesian product
//! overlay(<a>,<b>)       union on a shared vertex set
//! join(<a>,<b>)  comp(<a>)  scale(<a>,<factor>)
//! ```
//!
//! Anything that does not start with a known keyword is read as a graph file.

use std::fmt;

use super::{
    antipodal_matching, cartesian_product, cocktail_party, complement, complete, cycle,
    double_cone, empty, hypercube, join, path, read_graph, star, union_overlay, weighted_path,
    WeightedGraph,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// Byte offset into the expression, or the line number for graph files.
    pub position: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(position: usize, message: impl Into<String>) -> Self {
        Self {
            position,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at {}: {}", self.position, self.message)
    }
}

impl std::error::Error for ParseError {}

const FAMILIES: &[&str] = &[
    "path", "cycle", "star", "cube", "cocktail", "complete", "empty", "antipodal", "wpath",
    "cone2",
];
const FUNCTIONS: &[&str] = &["prod", "overlay", "join", "comp", "scale"];

pub fn parse_graph_spec(spec: &str) -> Result<WeightedGraph, ParseError> {
    let trimmed = spec.trim();
    let head: String = trimmed
        .chars()
        .take_while(|c| c.is_ascii_alphanumeric())
        .collect();
    let rest = &trimmed[head.len()..];
    let is_expr = (FAMILIES.contains(&head.as_str()) && rest.starts_with(':'))
        || (FUNCTIONS.contains(&head.as_str()) && rest.starts_with('('));
    if !is_expr {
        return match std::fs::read_to_string(trimmed) {
            Ok(text) => read_graph(&text),
            Err(e) => Err(ParseError::new(
                0,
                format!("{trimmed:?} is neither a graph expression nor a readable file ({e})"),
            )),
        };
    }
    let mut p = Parser {
        src: trimmed,
        pos: 0,
    };
    let g = p.expr()?;
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(g)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError::new(self.pos, msg)
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {c:?}")))
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &str {
        let start = self.pos;
        while self.peek().is_some_and(&f) {
            self.pos += 1;
        }
        &self.src[start..self.pos]
    }

    fn integer(&mut self) -> Result<usize, ParseError> {
        let at = self.pos;
        let digits = self.take_while(|c| c.is_ascii_digit());
        digits
            .parse()
            .map_err(|_| ParseError::new(at, "expected a non-negative integer"))
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        let at = self.pos;
        let text = self.take_while(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-'));
        text.parse()
            .map_err(|_| ParseError::new(at, format!("expected a number, got {text:?}")))
    }

    fn expr(&mut self) -> Result<WeightedGraph, ParseError> {
        let at = self.pos;
        let name = self.take_while(|c| c.is_ascii_alphanumeric()).to_string();
        let built = |r: Result<WeightedGraph, super::GraphError>| {
            r.map_err(|e| ParseError::new(at, e.to_string()))
        };
        if FUNCTIONS.contains(&name.as_str()) {
            self.expect('(')?;
            let g = match name.as_str() {
                "comp" => built(complement(&self.expr()?))?,
                "scale" => {
                    let g = self.expr()?;
                    self.expect(',')?;
                    let f = self.number()?;
                    built(g.scaled(f))?
                }
                _ => {
                    let a = self.expr()?;
                    self.expect(',')?;
                    let b = self.expr()?;
                    match name.as_str() {
                        "prod" => cartesian_product(&a, &b),
                        "join" => join(&a, &b),
                        _ => built(union_overlay(&a, &b))?,
                    }
                }
            };
            self.expect(')')?;
            return Ok(g);
        }
        if !FAMILIES.contains(&name.as_str()) {
            return Err(ParseError::new(at, format!("unknown graph family {name:?}")));
        }
        self.expect(':')?;
        match name.as_str() {
            "cone2" => Ok(double_cone(&self.expr()?)),
            "wpath" => {
                let mut ws = vec![self.number()?];
                while self.peek() == Some('/') {
                    self.pos += 1;
                    ws.push(self.number()?);
                }
                built(weighted_path(&ws))
            }
            family => {
                let k = self.integer()?;
                built(match family {
                    "path" => path(k),
                    "cycle" => cycle(k),
                    "star" => star(k),
                    "cube" => hypercube(k),
                    "cocktail" => cocktail_party(k),
                    "complete" => complete(k),
                    "empty" => empty(k),
                    _ => antipodal_matching(k),
                })
            }
        }
    }
}
