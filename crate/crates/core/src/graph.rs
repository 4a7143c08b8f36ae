//! The index divisibility graph: vertices reachable from 1 through edges
//! `(n, np)` of type 1 (`v_p(W_n) > v_p(n)`) or type 2 (`p in P`, `p ∤ n`).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{primes_up_to, valuation_u64};
use crate::divisibility::in_p;
use crate::error::{Error, Result};
use crate::orbit::{w_valuation_exceeds, Map};

/// Nonempty subset of {type 1, type 2}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeLabel {
    type1: bool,
    type2: bool,
}

impl EdgeLabel {
    pub fn new(type1: bool, type2: bool) -> Option<Self> {
        (type1 || type2).then_some(EdgeLabel { type1, type2 })
    }

    pub fn type1(&self) -> bool {
        self.type1
    }

    pub fn type2(&self) -> bool {
        self.type2
    }

    pub fn names(&self) -> Vec<&'static str> {
        let mut v = Vec::with_capacity(2);
        if self.type1 {
            v.push("1");
        }
        if self.type2 {
            v.push("2");
        }
        v
    }
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.names().join(","))
    }
}

fn label_with(map: Map, n: u64, p: u64, p_member: bool) -> Result<Option<EdgeLabel>> {
    let v_n = valuation_u64(n, p).unwrap_or(0);
    let type1 = w_valuation_exceeds(map, n, p, v_n)?;
    let type2 = p_member && v_n == 0;
    Ok(EdgeLabel::new(type1, type2))
}

/// The label of the candidate edge `(n, np)`, or `None` when neither rule fires.
pub fn edge_label(map: Map, n: u64, p: u64) -> Result<Option<EdgeLabel>> {
    if n == 0 {
        return Err(Error::InvalidIndex { min: 1, got: 0 });
    }
    let member = in_p(map, p)?.member;
    label_with(map, n, p, member)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivGraph {
    pub map: Map,
    pub bound: u64,
    pub vertices: BTreeSet<u64>,
    /// Keyed by `(source, target)`.
    pub edges: BTreeMap<(u64, u64), EdgeLabel>,
}

impl DivGraph {
    pub fn edge(&self, from: u64, to: u64) -> Option<EdgeLabel> {
        self.edges.get(&(from, to)).copied()
    }
}

/// Breadth-first construction from `{1}`, trying every prime `p <= bound / n`
/// at each vertex `n`.
pub fn build_graph(map: Map, bound: u64) -> Result<DivGraph> {
    if bound == 0 {
        return Err(Error::InvalidConfig(
            "graph bound must be at least 1".into(),
        ));
    }
    let primes = primes_up_to(bound);
    let members: HashMap<u64, bool> = primes
        .par_iter()
        .map(|&p| in_p(map, p).map(|v| (p, v.member)))
        .collect::<Result<_>>()?;

    let mut vertices = BTreeSet::from([1u64]);
    let mut edges = BTreeMap::new();
    let mut frontier = vec![1u64];
    while !frontier.is_empty() {
        let found: Vec<(u64, u64, EdgeLabel)> = frontier
            .par_iter()
            .flat_map_iter(|&n| {
                let limit = bound / n;
                primes
                    .iter()
                    .take_while(move |&&p| p <= limit)
                    .map(move |&p| (n, p))
            })
            .filter_map(|(n, p)| match label_with(map, n, p, members[&p]) {
                Ok(Some(l)) => Some(Ok((n, n * p, l))),
                Ok(None) => None,
                Err(e) => Some(Err(e)),
            })
            .collect::<Result<_>>()?;
        let mut next = BTreeSet::new();
        for (from, to, label) in found {
            edges.insert((from, to), label);
            if vertices.insert(to) {
                next.insert(to);
            }
        }
        frontier = next.into_iter().collect();
    }
    Ok(DivGraph {
        map,
        bound,
        vertices,
        edges,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Dot,
    Json,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dot" => Ok(ExportFormat::Dot),
            "json" => Ok(ExportFormat::Json),
            _ => Err(Error::UnsupportedFormat(s.to_string())),
        }
    }
}

#[derive(Serialize)]
struct JsonGraph<'a> {
    d: u32,
    c: i64,
    bound: u64,
    vertices: Vec<u64>,
    edges: Vec<(u64, u64, Vec<&'a str>)>,
}

/// Deterministic text rendering: vertices ascending, edges lexicographic.
pub fn export_graph(g: &DivGraph, format: ExportFormat) -> String {
    match format {
        ExportFormat::Dot => {
            let mut out = String::from("digraph D {\n");
            for v in &g.vertices {
                let _ = writeln!(out, "  {v};");
            }
            for (&(from, to), label) in &g.edges {
                let _ = writeln!(out, "  {from} -> {to} [label=\"{label}\"];");
            }
            out.push_str("}\n");
            out
        }
        ExportFormat::Json => {
            let doc = JsonGraph {
                d: g.map.d(),
                c: g.map.c(),
                bound: g.bound,
                vertices: g.vertices.iter().copied().collect(),
                edges: g
                    .edges
                    .iter()
                    .map(|(&(from, to), l)| (from, to, l.names()))
                    .collect(),
            };
            let mut s = serde_json::to_string(&doc).expect("graph serializes");
            s.push('\n');
            s
        }
    }
}
