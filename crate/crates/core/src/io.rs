//! Shared text formats.
//!
//! Edge lists: first line `n m`, then m lines `u v w` with 0-based vertex ids
//! and positive decimal weights; `#` starts a comment. Weights are written
//! with 17 significant digits so round trips are exact.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};
use crate::resistance::ResistanceBounds;
use crate::tree::{RootedTree, NO_PARENT};

fn fmt_weight(w: f64) -> String {
    format!("{:.16e}", w)
}

pub fn write_graph<W: Write>(g: &Graph, mut out: W) -> Result<()> {
    writeln!(out, "{} {}", g.n(), g.m())?;
    for e in g.edges() {
        writeln!(out, "{} {} {}", e.u, e.v, fmt_weight(e.w))?;
    }
    Ok(())
}

pub fn write_graph_path<P: AsRef<Path>>(g: &Graph, path: P) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_graph(g, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn read_graph<R: BufRead>(reader: R) -> Result<Graph> {
    let mut lines = content_lines(reader);
    let (line_no, header) = lines
        .next()
        .transpose()?
        .ok_or_else(|| Error::Parse {
            line: 0,
            msg: "empty input".into(),
        })?;
    let mut parts = header.split_whitespace();
    let n: usize = parse_field(&mut parts, line_no, "n")?;
    let m: usize = parse_field(&mut parts, line_no, "m")?;
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let (line_no, line) = lines.next().transpose()?.ok_or_else(|| Error::Parse {
            line: line_no,
            msg: format!("expected {} edges, input ended early", m),
        })?;
        let mut parts = line.split_whitespace();
        let u: usize = parse_field(&mut parts, line_no, "u")?;
        let v: usize = parse_field(&mut parts, line_no, "v")?;
        let w: f64 = parse_field(&mut parts, line_no, "w")?;
        edges.push(Edge::new(u, v, w));
    }
    Graph::new(n, edges)
}

pub fn read_graph_path<P: AsRef<Path>>(path: P) -> Result<Graph> {
    read_graph(BufReader::new(File::open(path)?))
}

/// Bounds serialize as `u v r` in edge order with a trailing total comment.
pub fn write_bounds<W: Write>(g: &Graph, b: &ResistanceBounds, mut out: W) -> Result<()> {
    for (e, &r) in g.edges().iter().zip(b.resistances()) {
        writeln!(out, "{} {} {}", e.u, e.v, fmt_weight(r))?;
    }
    writeln!(out, "# total_tau {}", fmt_weight(b.sum_tau()))?;
    Ok(())
}

/// Trees serialize as `v parent w` per vertex; roots carry parent -1.
pub fn write_tree<W: Write>(t: &RootedTree, mut out: W) -> Result<()> {
    for v in 0..t.n() {
        if t.parent(v) == NO_PARENT {
            writeln!(out, "{} -1 0", v)?;
        } else {
            writeln!(out, "{} {} {}", v, t.parent(v), fmt_weight(t.parent_weight(v)))?;
        }
    }
    Ok(())
}

fn content_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    reader
        .lines()
        .enumerate()
        .filter_map(|(i, line)| match line {
            Err(e) => Some(Err(Error::Io(e))),
            Ok(line) => {
                let content = line.split('#').next().unwrap_or("").trim().to_string();
                if content.is_empty() {
                    None
                } else {
                    Some(Ok((i + 1, content)))
                }
            }
        })
}

fn parse_field<'a, T: std::str::FromStr>(
    parts: &mut impl Iterator<Item = &'a str>,
    line: usize,
    name: &str,
) -> Result<T> {
    let tok = parts.next().ok_or_else(|| Error::Parse {
        line,
        msg: format!("missing field {}", name),
    })?;
    tok.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("cannot parse {} from '{}'", name, tok),
    })
}
