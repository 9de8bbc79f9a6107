//! AMBP v1: a line-oriented text format for [`Program`]s.
//!
//! ```text
//! AMBP v1
//! n <n> m <m> pruned <0|1>
//! node <id> seg <FWD1|FWD2|REVA|REVB> level <l> func <hex> replica <r> kind <kind>
//! edge <src> x<k> <0|1> <dst>
//! starts <id...>
//! accepts <id...>
//! rejects <id...>
//! ```
//!
//! Dead sinks and unreachable roots are recovered from node kinds, in node
//! order. Start, accept and reject lists are ordered: position `i` is copy `i`.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::{Edge, NodeId, NodeKind, NodeRef, Program, Segment};
use crate::truthtable::FuncId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AmbpError {
    #[error("line {line}: {msg}")]
    ParseError { line: usize, msg: String },
    #[error("unsupported format header {found:?}, expected \"AMBP v1\"")]
    VersionMismatch { found: String },
    #[error("line {line}: edge references unknown node {id}")]
    DanglingEdge { line: usize, id: String },
}

pub fn serialize(program: &Program) -> String {
    let mut out = String::with_capacity(64 * (program.nodes.len() + program.edges.len()) + 64);
    out.push_str("AMBP v1\n");
    let _ = writeln!(out, "n {} m {} pruned {}", program.n, program.m, program.pruned as u8);
    for (i, (r, kind)) in program.nodes.iter().zip(program.node_kinds()).enumerate() {
        let _ = writeln!(
            out,
            "node {i} seg {} level {} func {:x} replica {} kind {}",
            r.segment,
            r.level,
            r.func.0,
            r.replica,
            kind.name()
        );
    }
    for e in &program.edges {
        let _ = writeln!(out, "edge {} x{} {} {}", e.src, e.var, e.bit as u8, e.dst);
    }
    for (name, list) in [("starts", &program.starts), ("accepts", &program.accepts), ("rejects", &program.rejects)] {
        out.push_str(name);
        for id in list {
            let _ = write!(out, " {id}");
        }
        out.push('\n');
    }
    out
}

fn err(line: usize, msg: impl Into<String>) -> AmbpError {
    AmbpError::ParseError { line, msg: msg.into() }
}

/// Parses `key value key value ...` pairs, checking keys in order.
fn fields<'a>(line: usize, tokens: &[&'a str], keys: &[&str]) -> Result<Vec<&'a str>, AmbpError> {
    if tokens.len() != 2 * keys.len() {
        return Err(err(line, format!("expected {} fields, got {}", 2 * keys.len(), tokens.len())));
    }
    keys.iter()
        .enumerate()
        .map(|(i, k)| {
            if tokens[2 * i] == *k {
                Ok(tokens[2 * i + 1])
            } else {
                Err(err(line, format!("expected {k:?}, got {:?}", tokens[2 * i])))
            }
        })
        .collect()
}

fn num<T: std::str::FromStr>(line: usize, s: &str, what: &str) -> Result<T, AmbpError> {
    s.parse().map_err(|_| err(line, format!("bad {what} {s:?}")))
}

pub fn deserialize(text: &str) -> Result<Program, AmbpError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| !l.trim().is_empty());

    let (_, header) = lines.next().ok_or_else(|| err(1, "empty input"))?;
    if header.trim() != "AMBP v1" {
        return Err(AmbpError::VersionMismatch { found: header.trim().to_string() });
    }
    let (ln, params) = lines.next().ok_or_else(|| err(2, "missing parameter line"))?;
    let tokens: Vec<&str> = params.split_whitespace().collect();
    let vals = fields(ln, &tokens, &["n", "m", "pruned"])?;
    let n: u32 = num(ln, vals[0], "n")?;
    let m: usize = num(ln, vals[1], "m")?;
    let pruned = match vals[2] {
        "0" => false,
        "1" => true,
        other => return Err(err(ln, format!("bad pruned flag {other:?}"))),
    };

    let mut program = Program { n, m, pruned, ..Default::default() };
    let mut ids: HashMap<&str, NodeId> = HashMap::new();
    let mut kinds: Vec<(usize, NodeKind)> = Vec::new();
    let mut lists: [Option<Vec<NodeId>>; 3] = [None, None, None];
    let mut last_line = ln;

    for (ln, line) in lines {
        last_line = ln;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens[0] {
            "node" => {
                if tokens.len() < 2 {
                    return Err(err(ln, "node line without id"));
                }
                let vals = fields(ln, &tokens[2..], &["seg", "level", "func", "replica", "kind"])?;
                let segment =
                    Segment::from_name(vals[0]).ok_or_else(|| err(ln, format!("bad segment {:?}", vals[0])))?;
                let func = u64::from_str_radix(vals[2], 16).map_err(|_| err(ln, format!("bad func {:?}", vals[2])))?;
                let kind = NodeKind::from_name(vals[4]).ok_or_else(|| err(ln, format!("bad kind {:?}", vals[4])))?;
                let id = NodeId(program.nodes.len() as u32);
                if ids.insert(tokens[1], id).is_some() {
                    return Err(err(ln, format!("duplicate node id {}", tokens[1])));
                }
                program.nodes.push(NodeRef {
                    segment,
                    level: num(ln, vals[1], "level")?,
                    func: FuncId(func),
                    replica: num(ln, vals[3], "replica")?,
                });
                kinds.push((ln, kind));
                match kind {
                    NodeKind::Dead => program.dead_sinks.push(id),
                    NodeKind::Root => program.unreachable_roots.push(id),
                    _ => {}
                }
            }
            "edge" => {
                if tokens.len() != 5 {
                    return Err(err(ln, "edge line needs 4 fields"));
                }
                let lookup = |s: &str| {
                    ids.get(s).copied().ok_or_else(|| AmbpError::DanglingEdge { line: ln, id: s.to_string() })
                };
                let var = tokens[2]
                    .strip_prefix('x')
                    .ok_or_else(|| err(ln, format!("bad variable {:?}", tokens[2])))
                    .and_then(|v| num(ln, v, "variable"))?;
                let bit = match tokens[3] {
                    "0" => false,
                    "1" => true,
                    other => return Err(err(ln, format!("bad bit {other:?}"))),
                };
                program.edges.push(Edge { src: lookup(tokens[1])?, var, bit, dst: lookup(tokens[4])? });
            }
            name @ ("starts" | "accepts" | "rejects") => {
                let slot = ["starts", "accepts", "rejects"].iter().position(|s| *s == name).unwrap();
                if lists[slot].is_some() {
                    return Err(err(ln, format!("duplicate {name} line")));
                }
                let list = tokens[1..]
                    .iter()
                    .map(|s| ids.get(s).copied().ok_or_else(|| err(ln, format!("{name} references unknown node {s}"))))
                    .collect::<Result<Vec<_>, _>>()?;
                if list.len() != m {
                    return Err(err(ln, format!("{name} has {} entries, m = {m}", list.len())));
                }
                lists[slot] = Some(list);
            }
            other => return Err(err(ln, format!("unknown record {other:?}"))),
        }
    }

    let [starts, accepts, rejects] = lists;
    let missing = |name: &str| err(last_line + 1, format!("missing {name} line (truncated file?)"));
    program.starts = starts.ok_or_else(|| missing("starts"))?;
    program.accepts = accepts.ok_or_else(|| missing("accepts"))?;
    program.rejects = rejects.ok_or_else(|| missing("rejects"))?;

    for ((ln, declared), derived) in kinds.iter().zip(program.node_kinds()) {
        if *declared != derived {
            return Err(err(*ln, format!("node kind {} disagrees with lists ({})", declared.name(), derived.name())));
        }
    }
    Ok(program)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;

    #[test]
    fn round_trip_fixture() {
        let p = identity_program();
        let text = serialize(&p);
        assert!(text.starts_with("AMBP v1\nn 1 m 1 pruned 0\n"));
        assert_eq!(deserialize(&text).unwrap(), p);
    }

    #[test]
    fn truncated_is_parse_error() {
        let text = serialize(&identity_program());
        let cut: String = text.lines().take(5).map(|l| format!("{l}\n")).collect();
        assert!(matches!(deserialize(&cut), Err(AmbpError::ParseError { .. })));
        let half = &text[..text.len() / 2];
        assert!(matches!(deserialize(half), Err(AmbpError::ParseError { .. })));
    }

    #[test]
    fn dangling_edge() {
        let text = serialize(&identity_program()).replace("edge 0 x1 1 1", "edge 0 x1 1 77");
        assert_eq!(deserialize(&text), Err(AmbpError::DanglingEdge { line: 7, id: "77".into() }));
    }

    #[test]
    fn version_mismatch() {
        let text = serialize(&identity_program()).replace("AMBP v1", "AMBP v2");
        assert!(matches!(deserialize(&text), Err(AmbpError::VersionMismatch { .. })));
    }

    #[test]
    fn kind_mismatch_reported_with_line() {
        let text = serialize(&identity_program()).replace("kind accept", "kind internal");
        assert_eq!(
            deserialize(&text).unwrap_err(),
            AmbpError::ParseError { line: 4, msg: "node kind internal disagrees with lists (accept)".into() }
        );
    }
}
