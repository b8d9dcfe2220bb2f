//! Edge-list text format: one `tail head conductance` triple per line,
//! separated by single spaces. Lines starting with `#` and blank lines are
//! skipped. The vertex count is the largest id plus one.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Edge, Graph};
use crate::error::{Error, Result};

pub fn read_graph(path: impl AsRef<Path>) -> Result<Graph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_owned(), source })?;
    parse_edge_list(&text, path)
}

/// Parses edge-list text; `origin` is only used in error messages.
pub fn parse_edge_list(text: &str, origin: impl AsRef<Path>) -> Result<Graph> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: origin.as_ref().to_owned(),
        line,
        message,
    };
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(parse_err(i + 1, format!("expected `tail head conductance`, got `{line}`")));
        }
        let tail = fields[0]
            .parse()
            .map_err(|_| parse_err(i + 1, format!("bad vertex id `{}`", fields[0])))?;
        let head = fields[1]
            .parse()
            .map_err(|_| parse_err(i + 1, format!("bad vertex id `{}`", fields[1])))?;
        let conductance = fields[2]
            .parse()
            .map_err(|_| parse_err(i + 1, format!("bad conductance `{}`", fields[2])))?;
        edges.push(Edge::new(tail, head, conductance));
    }
    let n = edges.iter().map(|e| e.tail.max(e.head) + 1).max().unwrap_or(0);
    Graph::new(n, edges)
}

/// Serializes `g`; conductances use the shortest representation that parses
/// back to the same `f64`.
pub fn write_edge_list(g: &Graph) -> String {
    let mut out = String::with_capacity(16 * g.n_edges());
    for e in g.edges() {
        writeln!(out, "{} {} {:?}", e.tail, e.head, e.conductance).expect("writing to a String");
    }
    out
}

pub fn write_graph(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, write_edge_list(g)).map_err(|source| Error::Io { path: path.to_owned(), source })
}
