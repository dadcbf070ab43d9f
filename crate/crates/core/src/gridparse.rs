//! MATPOWER case ingestion.
//!
//! Only the `mpc.bus` and `mpc.branch` matrices are read. Bus ids come from
//! column 1 of the bus table, and `(fbus, tbus, r, x)` from columns 1-4 of the
//! branch table. Transmission lines become MaxCut edges weighted by the inverse
//! impedance magnitude `1 / sqrt(r^2 + x^2)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchRecord {
    pub from_bus: i64,
    pub to_bus: i64,
    /// Per-unit resistance.
    pub r: f64,
    /// Per-unit reactance.
    pub x: f64,
}

impl BranchRecord {
    /// Inverse impedance magnitude.
    pub fn weight(&self) -> Result<f64> {
        let z = self.r.hypot(self.x);
        if z == 0.0 || !z.is_finite() {
            return Err(Error::Domain(format!(
                "branch {}-{} has zero or non-finite impedance (r={}, x={})",
                self.from_bus, self.to_bus, self.r, self.x
            )));
        }
        Ok(1.0 / z)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseData {
    pub name: String,
    pub bus_ids: Vec<i64>,
    pub branches: Vec<BranchRecord>,
}

impl CaseData {
    /// Bus id -> vertex index, in `bus_ids` order.
    pub fn bus_index(&self) -> BTreeMap<i64, usize> {
        self.bus_ids.iter().enumerate().map(|(k, &id)| (id, k)).collect()
    }
}

/// Sidecar written next to a converted graph: `{"bus_index": {busId: vertexIndex}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BusIndexJson {
    pub bus_index: BTreeMap<String, usize>,
}

impl BusIndexJson {
    pub fn from_case(case: &CaseData) -> Self {
        Self {
            bus_index: case
                .bus_index()
                .into_iter()
                .map(|(id, k)| (id.to_string(), k))
                .collect(),
        }
    }
}

struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

enum Item<'a> {
    Num(Token<'a>),
    RowEnd,
    BlockEnd,
}

/// Byte offset -> 1-based (line, column) lookup.
struct Lines {
    starts: Vec<usize>,
}

impl Lines {
    fn new(text: &str) -> Self {
        let mut starts = vec![0];
        starts.extend(text.match_indices('\n').map(|(i, _)| i + 1));
        Self { starts }
    }

    fn locate(&self, offset: usize) -> (usize, usize) {
        let line = self.starts.partition_point(|&s| s <= offset);
        (line, offset - self.starts[line - 1] + 1)
    }

    fn count(&self) -> usize {
        self.starts.len()
    }
}

/// Source with `%` comments blanked out (same length, so offsets stay valid).
fn strip_comments(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut in_comment = false;
    let mut in_string = false;
    for c in text.chars() {
        match c {
            '\n' => {
                in_comment = false;
                in_string = false;
                out.push('\n');
            }
            _ if in_comment => out.extend(std::iter::repeat_n(' ', c.len_utf8())),
            '%' if !in_string => {
                in_comment = true;
                out.push(' ');
            }
            '\'' => {
                in_string = !in_string;
                out.push(c);
            }
            _ => out.push(c),
        }
    }
    out
}

/// Finds `mpc.<name> = [` and returns the byte offset just after `[`.
fn find_block(clean: &str, name: &str) -> Option<usize> {
    let key = format!("mpc.{name}");
    let mut from = 0;
    while let Some(pos) = clean[from..].find(&key) {
        let start = from + pos;
        let rest = &clean[start + key.len()..];
        let ident_continues = rest
            .chars()
            .next()
            .is_some_and(|c| c.is_alphanumeric() || c == '_');
        let preceded_ok = start == 0
            || !clean[..start]
                .chars()
                .next_back()
                .is_some_and(|c| c.is_alphanumeric() || c == '_' || c == '.');
        if !ident_continues && preceded_ok {
            let trimmed = rest.trim_start();
            if let Some(after_eq) = trimmed.strip_prefix('=') {
                let after_eq_trim = after_eq.trim_start();
                if let Some(body) = after_eq_trim.strip_prefix('[') {
                    return Some(clean.len() - body.len());
                }
            }
        }
        from = start + key.len();
    }
    None
}

fn tokenize_block<'a>(clean: &'a str, start: usize, lines: &Lines) -> Result<Vec<Item<'a>>> {
    let bytes = clean.as_bytes();
    let mut items = Vec::new();
    let mut i = start;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b']' => {
                items.push(Item::RowEnd);
                items.push(Item::BlockEnd);
                return Ok(items);
            }
            b';' | b'\n' => {
                items.push(Item::RowEnd);
                i += 1;
            }
            b' ' | b'\t' | b'\r' | b',' => i += 1,
            b'.' if clean[i..].starts_with("...") => {
                // line continuation: skip to end of line without ending the row
                i = clean[i..].find('\n').map_or(bytes.len(), |p| i + p + 1);
            }
            _ => {
                let end = clean[i..]
                    .find(|ch: char| ch.is_whitespace() || matches!(ch, ';' | ',' | ']'))
                    .map_or(bytes.len(), |p| i + p);
                let (line, column) = lines.locate(i);
                items.push(Item::Num(Token {
                    text: &clean[i..end],
                    line,
                    column,
                }));
                i = end;
            }
        }
    }
    let (line, column) = lines.locate(bytes.len().saturating_sub(1));
    Err(Error::Parse {
        line,
        column,
        message: "unterminated matrix block (missing `]`)".into(),
    })
}

fn parse_rows(clean: &str, name: &str, lines: &Lines) -> Result<Vec<Vec<(f64, usize, usize)>>> {
    let start = find_block(clean, name).ok_or_else(|| Error::Parse {
        line: lines.count(),
        column: 1,
        message: format!("missing `mpc.{name} = [...]` block"),
    })?;
    let mut rows = Vec::new();
    let mut row = Vec::new();
    for item in tokenize_block(clean, start, lines)? {
        match item {
            Item::Num(tok) => {
                let v: f64 = tok.text.parse().map_err(|_| Error::Parse {
                    line: tok.line,
                    column: tok.column,
                    message: format!("non-numeric token `{}` in mpc.{name}", tok.text),
                })?;
                row.push((v, tok.line, tok.column));
            }
            Item::RowEnd => {
                if !row.is_empty() {
                    rows.push(std::mem::take(&mut row));
                }
            }
            Item::BlockEnd => break,
        }
    }
    Ok(rows)
}

fn as_bus_id(v: f64, line: usize, column: usize) -> Result<i64> {
    if v.fract() != 0.0 || !v.is_finite() {
        return Err(Error::Parse {
            line,
            column,
            message: format!("bus id {v} is not an integer"),
        });
    }
    Ok(v as i64)
}

fn case_name(text: &str) -> Option<String> {
    text.lines().find_map(|l| {
        let l = l.trim();
        let rest = l.strip_prefix("function")?;
        let (_, name) = rest.split_once('=')?;
        let name = name.trim();
        (!name.is_empty()).then(|| name.to_string())
    })
}

/// Parses MATPOWER case text. Comments (`%`) are ignored, rows end at `;` or a
/// newline, and a block ends at `]`.
pub fn parse_matpower(text: &str) -> Result<CaseData> {
    let clean = strip_comments(text);
    let lines = Lines::new(&clean);

    let mut bus_ids = Vec::new();
    for row in parse_rows(&clean, "bus", &lines)? {
        let (v, line, column) = row[0];
        let id = as_bus_id(v, line, column)?;
        if bus_ids.contains(&id) {
            return Err(Error::Semantic(format!("bus {id} listed twice (line {line})")));
        }
        bus_ids.push(id);
    }

    let mut branches = Vec::new();
    for row in parse_rows(&clean, "branch", &lines)? {
        if row.len() < 4 {
            let (_, line, _) = row[0];
            return Err(Error::Parse {
                line,
                column: 1,
                message: format!("branch row has {} columns, need at least 4", row.len()),
            });
        }
        let from_bus = as_bus_id(row[0].0, row[0].1, row[0].2)?;
        let to_bus = as_bus_id(row[1].0, row[1].1, row[1].2)?;
        for id in [from_bus, to_bus] {
            if !bus_ids.contains(&id) {
                return Err(Error::Semantic(format!(
                    "branch on line {} references unknown bus {id}",
                    row[0].1
                )));
            }
        }
        if from_bus == to_bus {
            return Err(Error::Semantic(format!(
                "branch on line {} connects bus {from_bus} to itself",
                row[0].1
            )));
        }
        branches.push(BranchRecord {
            from_bus,
            to_bus,
            r: row[2].0,
            x: row[3].0,
        });
    }

    Ok(CaseData {
        name: case_name(text).unwrap_or_else(|| "case".into()),
        bus_ids,
        branches,
    })
}

/// Buses become vertices `0..n` in `bus_ids` order; parallel branches between
/// the same pair of buses are merged by summing their weights.
pub fn case_to_graph(case: &CaseData) -> Result<WeightedGraph> {
    let index = case.bus_index();
    let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut order = Vec::new();
    for b in &case.branches {
        let w = b.weight()?;
        let (Some(&i), Some(&j)) = (index.get(&b.from_bus), index.get(&b.to_bus)) else {
            return Err(Error::Semantic(format!(
                "branch {}-{} references an unknown bus",
                b.from_bus, b.to_bus
            )));
        };
        let key = (i.min(j), i.max(j));
        match merged.get_mut(&key) {
            Some(total) => *total += w,
            None => {
                merged.insert(key, w);
                order.push(key);
            }
        }
    }
    WeightedGraph::new(
        case.bus_ids.len(),
        order.into_iter().map(|k| (k.0, k.1, merged[&k])),
    )
}
