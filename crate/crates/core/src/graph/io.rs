//! Reading and writing graph files.
//!
//! Two formats are understood. The structured format is a JSON document
//!
//! ```text
//! {"format": "walkernel-graph", "version": 1, "n": 3, "directed": false,
//!  "label_mode": "discrete", "d": 2,
//!  "edges": [[0, 1, 1.0, 0], [1, 2, 1.0, 1]]}
//! ```
//!
//! where each edge is `[i, j]`, `[i, j, w]` or `[i, j, w, label]`;
//! `label_mode` is `none`, `discrete` (label is an id below `d`) or
//! `vector` (label is an array of `d` numbers). `format` and `version`
//! may be omitted.
//!
//! The plain edge list starts with a `#n=<count>` header and has one
//! `i j [w] [label]` line per edge. Optional `#directed=true` and
//! `#d=<alphabet>` headers are honoured; other `#` lines are comments.

use std::path::Path;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graph::{Edge, EdgeLabels, Graph};

pub const FORMAT_NAME: &str = "walkernel-graph";
pub const FORMAT_VERSION: u64 = 1;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Parses either format, choosing by the first non-blank character.
pub fn parse_graph(text: &str) -> Result<Graph> {
    if text.trim_start().starts_with('{') {
        parse_json(text)
    } else {
        parse_edge_list(text)
    }
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<Graph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_graph(&text)
}

pub fn write_graph(path: impl AsRef<Path>, g: &Graph) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_json(g)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn parse_json(text: &str) -> Result<Graph> {
    let doc: Value = serde_json::from_str(text).map_err(|e| parse_err(e.line(), e.to_string()))?;
    let obj = doc.as_object().ok_or_else(|| parse_err(1, "graph document must be an object"))?;
    if let Some(f) = obj.get("format") {
        if f.as_str() != Some(FORMAT_NAME) {
            return Err(parse_err(1, format!("unknown format {f}")));
        }
    }
    if let Some(v) = obj.get("version") {
        if v.as_u64() != Some(FORMAT_VERSION) {
            return Err(parse_err(1, format!("unsupported version {v}")));
        }
    }
    let n = obj.get("n").and_then(Value::as_u64).ok_or_else(|| parse_err(1, "missing vertex count n"))? as usize;
    let directed = match obj.get("directed") {
        None => false,
        Some(v) => v.as_bool().ok_or_else(|| parse_err(1, "directed must be a boolean"))?,
    };
    let mode = obj.get("label_mode").map(|v| v.as_str().unwrap_or("?")).unwrap_or("none");
    let d = obj.get("d").and_then(Value::as_u64).map(|d| d as usize);
    let raw = obj.get("edges").and_then(Value::as_array).ok_or_else(|| parse_err(1, "missing edges array"))?;

    let mut edges = Vec::with_capacity(raw.len());
    let mut discrete = Vec::new();
    let mut vectors = Vec::new();
    for (k, e) in raw.iter().enumerate() {
        let item = e.as_array().ok_or_else(|| parse_err(1, format!("edge {k} is not an array")))?;
        if item.len() < 2 || item.len() > 4 {
            return Err(parse_err(1, format!("edge {k} must have 2 to 4 entries")));
        }
        let idx = |v: &Value| v.as_u64().map(|x| x as usize).ok_or_else(|| parse_err(1, format!("edge {k}: bad vertex index")));
        let (i, j) = (idx(&item[0])?, idx(&item[1])?);
        let w = match item.get(2) {
            None => 1.0,
            Some(v) => v.as_f64().ok_or_else(|| parse_err(1, format!("edge {k}: bad weight")))?,
        };
        edges.push(Edge { source: i, target: j, weight: w });
        match (mode, item.get(3)) {
            ("none", None) => {}
            ("discrete", Some(l)) => {
                discrete.push(l.as_u64().ok_or_else(|| parse_err(1, format!("edge {k}: bad label")))? as usize)
            }
            ("vector", Some(Value::Array(f))) => vectors.push(
                f.iter()
                    .map(|x| x.as_f64().ok_or_else(|| parse_err(1, format!("edge {k}: bad feature"))))
                    .collect::<Result<Vec<f64>>>()?,
            ),
            ("none" | "discrete" | "vector", _) => {
                return Err(parse_err(1, format!("edge {k}: label does not fit label_mode {mode}")))
            }
            _ => return Err(parse_err(1, format!("unknown label_mode {mode}"))),
        }
    }
    let labels = match mode {
        "discrete" => {
            let alphabet = d.unwrap_or_else(|| discrete.iter().max().map_or(1, |m| m + 1));
            EdgeLabels::Discrete { alphabet, labels: discrete }
        }
        "vector" => {
            let dim = d.or_else(|| vectors.first().map(Vec::len)).unwrap_or(1);
            EdgeLabels::Vector { dim, features: vectors }
        }
        _ => EdgeLabels::None,
    };
    Graph::new(n, directed, edges, labels)
}

pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut n = None;
    let mut directed = false;
    let mut alphabet = None;
    let mut edges = Vec::new();
    let mut labels: Vec<Option<usize>> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let ln = ln + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('#') {
            let header = header.trim();
            if let Some(v) = header.strip_prefix("n=") {
                n = Some(v.trim().parse::<usize>().map_err(|_| parse_err(ln, "bad vertex count"))?);
            } else if let Some(v) = header.strip_prefix("directed=") {
                directed = v.trim().parse::<bool>().map_err(|_| parse_err(ln, "bad directed flag"))?;
            } else if let Some(v) = header.strip_prefix("d=") {
                alphabet = Some(v.trim().parse::<usize>().map_err(|_| parse_err(ln, "bad alphabet size"))?);
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 2 || fields.len() > 4 {
            return Err(parse_err(ln, "expected `i j [w] [label]`"));
        }
        let idx = |s: &str| s.parse::<usize>().map_err(|_| parse_err(ln, format!("bad vertex index {s:?}")));
        let w = match fields.get(2) {
            Some(s) => s.parse::<f64>().map_err(|_| parse_err(ln, format!("bad weight {s:?}")))?,
            None => 1.0,
        };
        let label = match fields.get(3) {
            Some(s) => Some(s.parse::<usize>().map_err(|_| parse_err(ln, format!("bad label {s:?}")))?),
            None => None,
        };
        edges.push(Edge { source: idx(fields[0])?, target: idx(fields[1])?, weight: w });
        labels.push(label);
    }
    let n = n.ok_or_else(|| parse_err(1, "missing `#n=<count>` header"))?;
    let labels = if labels.iter().all(Option::is_none) && alphabet.is_none() {
        EdgeLabels::None
    } else {
        let ids: Vec<usize> =
            labels.iter().map(|l| l.ok_or_else(|| parse_err(0, "either every edge or no edge has a label"))).collect::<Result<_>>()?;
        let alphabet = alphabet.unwrap_or_else(|| ids.iter().max().map_or(1, |m| m + 1));
        EdgeLabels::Discrete { alphabet, labels: ids }
    };
    Graph::new(n, directed, edges, labels)
}

/// Structured document with one edge per line; output is a pure function
/// of the graph.
pub fn to_json(g: &Graph) -> String {
    let (mode, d) = match g.labels() {
        EdgeLabels::None => ("none", 0),
        EdgeLabels::Discrete { alphabet, .. } => ("discrete", *alphabet),
        EdgeLabels::Vector { dim, .. } => ("vector", *dim),
    };
    let mut out = format!(
        "{{\"format\": \"{FORMAT_NAME}\", \"version\": {FORMAT_VERSION}, \"n\": {}, \"directed\": {}, \"label_mode\": \"{mode}\", \"d\": {d},\n \"edges\": [",
        g.num_vertices(),
        g.is_directed()
    );
    for (k, e) in g.edges().iter().enumerate() {
        let item = match g.labels() {
            EdgeLabels::None => json!([e.source, e.target, e.weight]),
            EdgeLabels::Discrete { labels, .. } => json!([e.source, e.target, e.weight, labels[k]]),
            EdgeLabels::Vector { features, .. } => json!([e.source, e.target, e.weight, features[k]]),
        };
        out.push_str(if k == 0 { "\n  " } else { ",\n  " });
        out.push_str(&item.to_string());
    }
    out.push_str("\n]}\n");
    out
}

/// Plain edge list; vector-labeled graphs cannot be expressed.
pub fn to_edge_list(g: &Graph) -> Result<String> {
    let mut out = format!("#n={}\n", g.num_vertices());
    if g.is_directed() {
        out.push_str("#directed=true\n");
    }
    match g.labels() {
        EdgeLabels::Vector { .. } => {
            return Err(Error::InvalidArgument("edge lists cannot hold vector labels".into()));
        }
        EdgeLabels::Discrete { alphabet, labels } => {
            out.push_str(&format!("#d={alphabet}\n"));
            for (e, l) in g.edges().iter().zip(labels) {
                out.push_str(&format!("{} {} {:?} {l}\n", e.source, e.target, e.weight));
            }
        }
        EdgeLabels::None => {
            for e in g.edges() {
                out.push_str(&format!("{} {} {:?}\n", e.source, e.target, e.weight));
            }
        }
    }
    Ok(out)
}
