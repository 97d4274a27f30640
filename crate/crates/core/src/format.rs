//! Line-oriented text formats.
//!
//! UGRAPH v1:
//! ```text
//! graph <n>
//! node <id> <weight|inf>
//! edge <u> <v> <multiplicity>
//! selfloop <v> <count>
//! ```
//! BNDAG v1:
//! ```text
//! dag <n>
//! node <id> <domain_size>
//! arc <parent> <child>
//! ```
//! `#` starts a comment. The header must come first and the node count must
//! match it.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use crate::graph::{GraphError, MultiGraph, VertexId, Weight};
use crate::loop_cutset::{Dag, DagError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Graph { line: usize, source: GraphError },
    #[error(transparent)]
    Dag(#[from] DagError),
    #[error("header declares {declared} nodes but {found} were listed")]
    NodeCount { declared: usize, found: usize },
    #[error("missing header")]
    MissingHeader,
}

fn syntax(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        message: message.into(),
    }
}

/// Non-empty lines with comments stripped, paired with 1-based line numbers.
fn directives(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let content = raw.split('#').next().unwrap_or("");
        let fields: Vec<&str> = content.split_whitespace().collect();
        (!fields.is_empty()).then_some((i + 1, fields))
    })
}

fn field<T: FromStr>(
    fields: &[&str],
    at: usize,
    line: usize,
    what: &str,
) -> Result<T, FormatError> {
    let raw = fields
        .get(at)
        .ok_or_else(|| syntax(line, format!("missing {what}")))?;
    raw.parse()
        .map_err(|_| syntax(line, format!("invalid {what} '{raw}'")))
}

fn arity(fields: &[&str], n: usize, line: usize) -> Result<(), FormatError> {
    if fields.len() == n {
        Ok(())
    } else {
        Err(syntax(
            line,
            format!("'{}' takes {} arguments", fields[0], n - 1),
        ))
    }
}

fn header<'a>(
    lines: &mut impl Iterator<Item = (usize, Vec<&'a str>)>,
    keyword: &str,
) -> Result<usize, FormatError> {
    let (line, fields) = lines.next().ok_or(FormatError::MissingHeader)?;
    if fields[0] != keyword {
        return Err(syntax(line, format!("expected '{keyword} <n>' header")));
    }
    arity(&fields, 2, line)?;
    field(&fields, 1, line, "node count")
}

pub fn parse_ugraph(text: &str) -> Result<MultiGraph, FormatError> {
    let mut lines = directives(text);
    let declared = header(&mut lines, "graph")?;
    let mut g = MultiGraph::new();
    let mut pairs = BTreeSet::new();
    let graph_err = |line| move |source| FormatError::Graph { line, source };
    for (line, fields) in lines {
        match fields[0] {
            "node" => {
                arity(&fields, 3, line)?;
                let v = VertexId(field(&fields, 1, line, "vertex id")?);
                let weight = match fields[2] {
                    "inf" => Weight::Infinite,
                    _ => Weight::finite(field(&fields, 2, line, "weight")?)
                        .map_err(graph_err(line))?,
                };
                g.add_vertex(v, weight).map_err(graph_err(line))?;
            }
            "edge" => {
                arity(&fields, 4, line)?;
                let u = VertexId(field(&fields, 1, line, "vertex id")?);
                let v = VertexId(field(&fields, 2, line, "vertex id")?);
                let m: u32 = field(&fields, 3, line, "multiplicity")?;
                if u == v {
                    return Err(syntax(line, "use 'selfloop' for self-loops"));
                }
                if !pairs.insert((u.min(v), u.max(v))) {
                    return Err(syntax(line, format!("pair {u} {v} listed twice")));
                }
                g.add_edge(u, v, m).map_err(graph_err(line))?;
            }
            "selfloop" => {
                arity(&fields, 3, line)?;
                let v = VertexId(field(&fields, 1, line, "vertex id")?);
                let count: u32 = field(&fields, 2, line, "self-loop count")?;
                if count > 0 {
                    g.add_self_loops(v, count).map_err(graph_err(line))?;
                }
            }
            other => return Err(syntax(line, format!("unknown directive '{other}'"))),
        }
    }
    if g.vertex_count() != declared {
        return Err(FormatError::NodeCount {
            declared,
            found: g.vertex_count(),
        });
    }
    Ok(g)
}

pub fn write_ugraph(g: &MultiGraph) -> String {
    let mut out = format!("graph {}\n", g.vertex_count());
    for v in g.vertices() {
        writeln!(out, "node {v} {}", g.weight(v).unwrap()).unwrap();
    }
    for (u, v, m) in g.edges() {
        writeln!(out, "edge {u} {v} {m}").unwrap();
    }
    for v in g.vertices() {
        let loops = g.self_loops(v).unwrap();
        if loops > 0 {
            writeln!(out, "selfloop {v} {loops}").unwrap();
        }
    }
    out
}

pub fn parse_bndag(text: &str) -> Result<Dag, FormatError> {
    let mut lines = directives(text);
    let declared = header(&mut lines, "dag")?;
    let mut nodes = Vec::new();
    let mut arcs = Vec::new();
    for (line, fields) in lines {
        match fields[0] {
            "node" => {
                arity(&fields, 3, line)?;
                nodes.push((
                    VertexId(field(&fields, 1, line, "vertex id")?),
                    field(&fields, 2, line, "domain size")?,
                ));
            }
            "arc" => {
                arity(&fields, 3, line)?;
                arcs.push((
                    VertexId(field(&fields, 1, line, "vertex id")?),
                    VertexId(field(&fields, 2, line, "vertex id")?),
                ));
            }
            other => return Err(syntax(line, format!("unknown directive '{other}'"))),
        }
    }
    if nodes.len() != declared {
        return Err(FormatError::NodeCount {
            declared,
            found: nodes.len(),
        });
    }
    Ok(Dag::new(nodes, arcs)?)
}

pub fn write_bndag(d: &Dag) -> String {
    let mut out = format!("dag {}\n", d.vertex_count());
    for v in d.vertices() {
        writeln!(out, "node {v} {}", d.domain_size(v).unwrap()).unwrap();
    }
    for (p, c) in d.arcs() {
        writeln!(out, "arc {p} {c}").unwrap();
    }
    out
}
