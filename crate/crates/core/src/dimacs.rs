//! DIMACS ".col" text format: `p edge N M` header, `e u v` edge lines with
//! 1-based vertex indices, `c` comment lines.

use thiserror::Error;

use crate::graph::{Graph, GraphError};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("dimacs parse error at line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError { line, message: message.into() }
}

pub fn read_dimacs(text: &str) -> Result<Graph, ParseError> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        match tokens.first().copied() {
            None | Some("c") => continue,
            Some("p") => {
                if header.is_some() {
                    return Err(err(line, "duplicate problem line"));
                }
                if tokens.len() != 4 || tokens[1] != "edge" {
                    return Err(err(line, format!("expected 'p edge N M', got '{raw}'")));
                }
                let n = tokens[2]
                    .parse::<usize>()
                    .map_err(|_| err(line, format!("bad vertex count '{}'", tokens[2])))?;
                let m = tokens[3]
                    .parse::<usize>()
                    .map_err(|_| err(line, format!("bad edge count '{}'", tokens[3])))?;
                header = Some((n, m));
            }
            Some("e") => {
                let (n, _) = header.ok_or_else(|| err(line, "edge before problem line"))?;
                if tokens.len() != 3 {
                    return Err(err(line, format!("expected 'e u v', got '{raw}'")));
                }
                let u = parse_vertex(tokens[1], n, line)?;
                let v = parse_vertex(tokens[2], n, line)?;
                if u == v {
                    return Err(err(line, format!("self-loop at vertex {}", u + 1)));
                }
                edges.push((u, v));
            }
            Some(other) => return Err(err(line, format!("unknown line type '{other}'"))),
        }
    }
    let (n, m) = header.ok_or_else(|| err(last_line.max(1), "missing problem line"))?;
    if edges.len() != m {
        return Err(err(
            last_line,
            format!("header declares {m} edges but {} were given", edges.len()),
        ));
    }
    Graph::build(&edges, n).map_err(|e| match e {
        GraphError::DuplicateEdge(u, v) => {
            err(last_line, format!("duplicate edge ({}, {})", u + 1, v + 1))
        }
        other => err(last_line, other.to_string()),
    })
}

fn parse_vertex(token: &str, n: usize, line: usize) -> Result<usize, ParseError> {
    let v = token
        .parse::<usize>()
        .map_err(|_| err(line, format!("bad vertex '{token}'")))?;
    if v == 0 || v > n {
        return Err(err(line, format!("vertex {v} out of range 1..={n}")));
    }
    Ok(v - 1)
}

pub fn write_dimacs(g: &Graph) -> String {
    let mut out = String::new();
    out.push_str(&format!("p edge {} {}\n", g.vertex_count(), g.edge_count()));
    for (u, v) in g.edges() {
        out.push_str(&format!("e {} {}\n", u + 1, v + 1));
    }
    out
}
