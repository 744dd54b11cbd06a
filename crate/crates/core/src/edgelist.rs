// SPDX-License-Identifier: Apache-2.0

//! The `multiplex-edgelist v1` text format.
//!
//! ```text
//! #multiplex-edgelist v1 n=4
//! #rng chacha8 seed=7
//! A 0 1
//! A 1 2
//! B 1 2
//! ```
//!
//! The first line is mandatory. Further lines starting with `#` carry
//! metadata and are preserved on load. Every edge line is `<layer> <u> <v>`
//! with `u < v`; a shared edge appears once per layer.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::multiplex::MultiplexGraph;

pub const MAGIC: &str = "#multiplex-edgelist v1";

/// A graph together with the metadata comment lines of its file (without
/// the leading `#`).
#[derive(Debug, Clone, PartialEq)]
pub struct EdgelistFile {
    pub graph: MultiplexGraph,
    pub metadata: Vec<String>,
}

fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line,
        msg: msg.into(),
    })
}

pub fn write<W: Write>(mut w: W, g: &MultiplexGraph, metadata: &[String]) -> Result<()> {
    writeln!(w, "{MAGIC} n={}", g.n())?;
    for m in metadata {
        writeln!(w, "#{m}")?;
    }
    for &(u, v) in g.edges_a() {
        writeln!(w, "A {u} {v}")?;
    }
    for &(u, v) in g.edges_b() {
        writeln!(w, "B {u} {v}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read<R: BufRead>(r: R) -> Result<EdgelistFile> {
    let mut lines = r.lines();
    let header = match lines.next() {
        Some(l) => l?,
        None => return parse_err(1, "empty file"),
    };
    let n = parse_header(header.trim_end())?;

    let mut metadata = Vec::new();
    let (mut edges_a, mut edges_b) = (Vec::new(), Vec::new());
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            metadata.push(meta.to_string());
            continue;
        }
        let mut fields = line.split_whitespace();
        let (Some(layer), Some(u), Some(v), None) =
            (fields.next(), fields.next(), fields.next(), fields.next())
        else {
            return parse_err(lineno, "expected `<layer> <u> <v>`");
        };
        let parse_id = |s: &str| -> Result<usize> {
            s.parse::<usize>().or_else(|_| parse_err(lineno, format!("bad node id `{s}`")))
        };
        let (u, v) = (parse_id(u)?, parse_id(v)?);
        if u >= v {
            return parse_err(lineno, format!("edge ({u}, {v}) must satisfy u < v"));
        }
        if v >= n {
            return parse_err(lineno, format!("node {v} out of range for n = {n}"));
        }
        match layer {
            "A" => edges_a.push((u, v)),
            "B" => edges_b.push((u, v)),
            other => return parse_err(lineno, format!("unknown layer `{other}`")),
        }
    }
    // Range, loops and ordering are checked above; this catches duplicates.
    let graph = MultiplexGraph::new(n, edges_a, edges_b).or_else(|e| match e {
        Error::Input(msg) => parse_err(0, msg),
        other => Err(other),
    })?;
    Ok(EdgelistFile { graph, metadata })
}

fn parse_header(line: &str) -> Result<usize> {
    let Some(rest) = line.strip_prefix(MAGIC) else {
        return parse_err(1, format!("missing `{MAGIC}` header"));
    };
    let Some(n) = rest.trim().strip_prefix("n=") else {
        return parse_err(1, "header lacks `n=<N>`");
    };
    n.parse()
        .or_else(|_| parse_err(1, format!("bad node count `{n}`")))
}
