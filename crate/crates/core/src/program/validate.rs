use std::fmt;

use super::{NodeId, Program};

/// One structural defect. Violations are data: a report lists all of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptyProgram,
    ListLength { list: &'static str, len: usize, m: usize },
    BadNodeIndex { context: &'static str, id: NodeId },
    VarOutOfRange { node: NodeId, var: u32 },
    BadOutdegree { node: NodeId, outdegree: usize },
    DuplicateLabel { node: NodeId, var: u32, bit: bool },
    MismatchedLabels { node: NodeId },
    LevelViolation { src: NodeId, dst: NodeId, src_level: u32, dst_level: u32 },
    UnclassifiedSink { node: NodeId },
    MultiplyClassified { node: NodeId },
    ClassifiedNonSink { node: NodeId },
    DuplicateStart { node: NodeId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyProgram => write!(f, "m = 0"),
            Violation::ListLength { list, len, m } => write!(f, "{list} list has {len} entries, m = {m}"),
            Violation::BadNodeIndex { context, id } => write!(f, "{context} references unknown node {id}"),
            Violation::VarOutOfRange { node, var } => write!(f, "node {node} reads x{var}, out of range"),
            Violation::BadOutdegree { node, outdegree } => {
                write!(f, "node {node} has outdegree {outdegree}")
            }
            Violation::DuplicateLabel { node, var, bit } => {
                write!(f, "node {node} has two x{var}={} edges", *bit as u8)
            }
            Violation::MismatchedLabels { node } => {
                write!(f, "node {node} out-edges do not read one variable with both values")
            }
            Violation::LevelViolation { src, dst, src_level, dst_level } => {
                write!(f, "edge {src} -> {dst} goes from level {src_level} to level {dst_level}")
            }
            Violation::UnclassifiedSink { node } => {
                write!(f, "node {node} has outdegree 0 but is not an accept, reject or dead sink")
            }
            Violation::MultiplyClassified { node } => {
                write!(f, "node {node} appears more than once among accepts/rejects/dead sinks")
            }
            Violation::ClassifiedNonSink { node } => {
                write!(f, "node {node} is listed as a sink but has out-edges")
            }
            Violation::DuplicateStart { node } => write!(f, "node {node} is listed as a start twice"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Lists every way `program` fails to be a branching program with `m`
/// indexed copies. An empty report means the structure is well formed.
pub fn validate_structure(program: &Program) -> ValidationReport {
    let mut out = Vec::new();
    let len = program.nodes.len();
    let in_range = |id: NodeId| id.index() < len;

    if program.m == 0 {
        out.push(Violation::EmptyProgram);
    }
    for (list, name) in [(&program.starts, "starts"), (&program.accepts, "accepts"), (&program.rejects, "rejects")] {
        if list.len() != program.m {
            out.push(Violation::ListLength { list: name, len: list.len(), m: program.m });
        }
    }

    // Out-edges grouped by source; edges with a dangling endpoint are skipped.
    let mut out_edges: Vec<Vec<(u32, bool)>> = vec![Vec::new(); len];
    for e in &program.edges {
        if !in_range(e.src) {
            out.push(Violation::BadNodeIndex { context: "edge source", id: e.src });
            continue;
        }
        if !in_range(e.dst) {
            out.push(Violation::BadNodeIndex { context: "edge target", id: e.dst });
            continue;
        }
        if e.var == 0 || e.var > program.n {
            out.push(Violation::VarOutOfRange { node: e.src, var: e.var });
        }
        let (sl, dl) = (program.nodes[e.src.index()].level, program.nodes[e.dst.index()].level);
        if dl != sl + 1 {
            out.push(Violation::LevelViolation { src: e.src, dst: e.dst, src_level: sl, dst_level: dl });
        }
        out_edges[e.src.index()].push((e.var, e.bit));
    }

    let mut sink_class = vec![0u8; len];
    for (list, name) in
        [(&program.accepts, "accepts"), (&program.rejects, "rejects"), (&program.dead_sinks, "dead_sinks")]
    {
        for &id in list.iter() {
            if !in_range(id) {
                out.push(Violation::BadNodeIndex { context: name, id });
                continue;
            }
            sink_class[id.index()] += 1;
        }
    }
    let mut start_seen = vec![false; len];
    for &id in program.starts.iter().chain(&program.unreachable_roots) {
        if !in_range(id) {
            out.push(Violation::BadNodeIndex { context: "starts/roots", id });
        }
    }
    for &id in &program.starts {
        if in_range(id) && std::mem::replace(&mut start_seen[id.index()], true) {
            out.push(Violation::DuplicateStart { node: id });
        }
    }

    for (i, edges) in out_edges.iter().enumerate() {
        let node = NodeId(i as u32);
        match edges.as_slice() {
            [] => {
                if sink_class[i] == 0 {
                    out.push(Violation::UnclassifiedSink { node });
                }
            }
            [(v0, b0), (v1, b1)] => {
                if v0 == v1 && b0 == b1 {
                    out.push(Violation::DuplicateLabel { node, var: *v0, bit: *b0 });
                } else if v0 != v1 {
                    out.push(Violation::MismatchedLabels { node });
                }
                if sink_class[i] > 0 {
                    out.push(Violation::ClassifiedNonSink { node });
                }
            }
            more => {
                let mut seen = std::collections::HashSet::new();
                for &(var, bit) in more {
                    if !seen.insert((var, bit)) {
                        out.push(Violation::DuplicateLabel { node, var, bit });
                    }
                }
                out.push(Violation::BadOutdegree { node, outdegree: more.len() });
            }
        }
        if sink_class[i] > 1 {
            out.push(Violation::MultiplyClassified { node });
        }
    }

    ValidationReport { violations: out }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::*;
    use super::*;

    #[test]
    fn identity_program_is_valid() {
        assert!(validate_structure(&identity_program()).is_ok());
    }

    #[test]
    fn duplicate_label_detected() {
        let mut p = identity_program();
        p.edges[1].bit = false;
        let r = validate_structure(&p);
        assert!(r.violations.contains(&Violation::DuplicateLabel { node: NodeId(0), var: 1, bit: false }));
    }

    #[test]
    fn single_node_constant_program() {
        // start = accept; the reject node is never reached.
        let p = Program {
            n: 1,
            m: 1,
            nodes: vec![node(0), NodeRef { replica: 1, ..node(0) }],
            starts: vec![NodeId(0)],
            accepts: vec![NodeId(0)],
            rejects: vec![NodeId(1)],
            ..Default::default()
        };
        assert!(validate_structure(&p).is_ok(), "{:?}", validate_structure(&p));
    }

    #[test]
    fn other_violations() {
        let mut p = identity_program();
        p.edges[1].var = 2;
        assert!(validate_structure(&p).violations.iter().any(|v| matches!(v, Violation::VarOutOfRange { .. })));
        assert!(validate_structure(&p).violations.iter().any(|v| matches!(v, Violation::MismatchedLabels { .. })));

        let mut p = identity_program();
        p.rejects.clear();
        let vs = validate_structure(&p).violations;
        assert!(vs.contains(&Violation::ListLength { list: "rejects", len: 0, m: 1 }));
        assert!(vs.contains(&Violation::UnclassifiedSink { node: NodeId(2) }));

        let mut p = identity_program();
        p.nodes[1].level = 0;
        assert!(validate_structure(&p).violations.iter().any(|v| matches!(v, Violation::LevelViolation { .. })));

        let mut p = identity_program();
        p.edges.push(Edge { src: NodeId(0), var: 1, bit: true, dst: NodeId(9) });
        assert!(validate_structure(&p).violations.iter().any(|v| matches!(v, Violation::BadNodeIndex { .. })));

        let mut p = identity_program();
        p.edges.pop();
        assert!(validate_structure(&p).violations.contains(&Violation::BadOutdegree { node: NodeId(0), outdegree: 1 }));

        let mut p = identity_program();
        p.dead_sinks.push(NodeId(1));
        assert!(validate_structure(&p).violations.contains(&Violation::MultiplyClassified { node: NodeId(1) }));
    }
}
