//! Plain-text instance and graph files.
//!
//! ```text
//! metric <n> <k> <matrix | line | euclid <dim>>
//! <n rows of n distances, or n coordinate lines>
//! <k lines "s t">
//! ```
//!
//! Graph files are `graph <n> <m>` followed by `m` lines `u v`. Vertices
//! are 0-indexed. Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::instance::{Metric, MetricInstance};
use crate::oracle::Graph;

/// Largest vertex count a graph file may declare; graphs are dense bitsets.
pub const MAX_GRAPH_VERTICES: usize = 1 << 15;

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
            last: 0,
        }
    }

    /// Next meaningful line with its 1-based number.
    fn next(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            let line = line.trim();
            if !line.is_empty() && !line.starts_with('#') {
                return Some((i + 1, line.split_whitespace().collect()));
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        let after = self.last;
        self.next()
            .ok_or_else(|| Error::parse(after + 1, format!("expected {what}, found end of input")))
    }

    fn finish(&mut self) -> Result<()> {
        match self.next() {
            Some((line, _)) => Err(Error::parse(line, "unexpected trailing content")),
            None => Ok(()),
        }
    }
}

fn num<T: FromStr>(line: usize, token: &str, what: &str) -> Result<T> {
    token
        .parse()
        .map_err(|_| Error::parse(line, format!("{what} `{token}` is not a valid number")))
}

fn exact_len(line: usize, tokens: &[&str], want: usize, what: &str) -> Result<()> {
    if tokens.len() != want {
        return Err(Error::parse(
            line,
            format!("{what} has {} entries, expected {want}", tokens.len()),
        ));
    }
    Ok(())
}

fn pair_line(lines: &mut Lines<'_>, what: &str) -> Result<(usize, usize)> {
    let (line, tokens) = lines.expect(what)?;
    exact_len(line, &tokens, 2, what)?;
    Ok((
        num(line, tokens[0], "vertex")?,
        num(line, tokens[1], "vertex")?,
    ))
}

pub fn parse_instance(text: &str) -> Result<MetricInstance> {
    let mut lines = Lines::new(text);
    let (hline, header) = lines.expect("header `metric <n> <k> <format>`")?;
    if header.first() != Some(&"metric") || header.len() < 4 {
        return Err(Error::parse(
            hline,
            "header must be `metric <n> <k> <format>`",
        ));
    }
    let n: usize = num(hline, header[1], "vertex count")?;
    let k: usize = num(hline, header[2], "pair count")?;
    let kind = header[3];
    let expected_header = if kind == "euclid" { 5 } else { 4 };
    if header.len() != expected_header {
        return Err(Error::parse(
            hline,
            format!("malformed header for format `{kind}`"),
        ));
    }

    let metric = match kind {
        "matrix" => {
            let mut dist = Vec::new();
            for row in 0..n {
                let (line, tokens) = lines.expect(&format!("matrix row {row}"))?;
                exact_len(line, &tokens, n, &format!("matrix row {row}"))?;
                for t in tokens {
                    dist.push(num(line, t, "distance")?);
                }
            }
            Metric::Matrix { n, dist }
        }
        "line" => {
            let mut xs = Vec::new();
            for v in 0..n {
                let (line, tokens) = lines.expect(&format!("coordinate of vertex {v}"))?;
                exact_len(line, &tokens, 1, &format!("coordinate line {v}"))?;
                xs.push(num(line, tokens[0], "coordinate")?);
            }
            Metric::Line(xs)
        }
        "euclid" => {
            let dim: usize = num(hline, header[4], "dimension")?;
            if dim == 0 {
                return Err(Error::parse(hline, "dimension must be at least 1"));
            }
            let mut coords = Vec::new();
            for v in 0..n {
                let (line, tokens) = lines.expect(&format!("coordinates of vertex {v}"))?;
                exact_len(line, &tokens, dim, &format!("coordinate line {v}"))?;
                for t in tokens {
                    coords.push(num(line, t, "coordinate")?);
                }
            }
            Metric::Euclid { dim, coords }
        }
        other => {
            return Err(Error::parse(
                hline,
                format!("unknown metric format `{other}`"),
            ))
        }
    };

    let mut pairs = Vec::new();
    for j in 0..k {
        pairs.push(pair_line(&mut lines, &format!("pair {j}"))?);
    }
    lines.finish()?;
    MetricInstance::new(metric, pairs)
}

fn push_row(out: &mut String, values: impl Iterator<Item = f64>) {
    let mut first = true;
    for x in values {
        if !first {
            out.push(' ');
        }
        first = false;
        write!(out, "{x}").unwrap();
    }
    out.push('\n');
}

pub fn write_instance(instance: &MetricInstance) -> String {
    let n = instance.n();
    let mut out = String::new();
    match instance.metric() {
        Metric::Matrix { dist, .. } => {
            writeln!(out, "metric {n} {} matrix", instance.k()).unwrap();
            for row in dist.chunks(n) {
                push_row(&mut out, row.iter().copied());
            }
        }
        Metric::Line(xs) => {
            writeln!(out, "metric {n} {} line", instance.k()).unwrap();
            for &x in xs {
                push_row(&mut out, std::iter::once(x));
            }
        }
        Metric::Euclid { dim, coords } => {
            writeln!(out, "metric {n} {} euclid {dim}", instance.k()).unwrap();
            for row in coords.chunks(*dim) {
                push_row(&mut out, row.iter().copied());
            }
        }
    }
    for &(s, t) in instance.pairs() {
        writeln!(out, "{s} {t}").unwrap();
    }
    out
}

pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut lines = Lines::new(text);
    let (hline, header) = lines.expect("header `graph <n> <m>`")?;
    if header.len() != 3 || header[0] != "graph" {
        return Err(Error::parse(hline, "header must be `graph <n> <m>`"));
    }
    let n: usize = num(hline, header[1], "vertex count")?;
    let m: usize = num(hline, header[2], "edge count")?;
    if n > MAX_GRAPH_VERTICES {
        return Err(Error::parse(
            hline,
            format!("{n} vertices exceed the limit {MAX_GRAPH_VERTICES}"),
        ));
    }
    let mut graph = Graph::empty(n);
    for j in 0..m {
        let what = format!("edge {j}");
        let (line, tokens) = lines.expect(&what)?;
        exact_len(line, &tokens, 2, &what)?;
        let (u, v) = (
            num(line, tokens[0], "vertex")?,
            num(line, tokens[1], "vertex")?,
        );
        graph
            .add_edge(u, v)
            .map_err(|e| Error::parse(line, e.to_string()))?;
    }
    lines.finish()?;
    Ok(graph)
}

pub fn write_graph(graph: &Graph) -> String {
    let edges: Vec<(usize, usize)> = graph.edges().collect();
    let mut out = format!("graph {} {}\n", graph.n(), edges.len());
    for (u, v) in edges {
        writeln!(out, "{u} {v}").unwrap();
    }
    out
}
