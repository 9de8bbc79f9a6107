//! The branching-program graph model: labeled layered DAGs with ordered
//! start, accept and reject lists.

mod ambp;
mod dot;
mod eval;
mod validate;

use std::fmt;

use thiserror::Error;

use crate::truthtable::FuncId;

pub use ambp::{deserialize, serialize, AmbpError};
pub use dot::{export_dot, size_warning, DotOptions};
pub use eval::{walk, Evaluator, SinkOutcome};
pub use validate::{validate_structure, ValidationReport, Violation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("program is not a well-formed branching program ({0} violations, first: {1})")]
    StructureInvalid(usize, Violation),
    #[error("variable count mismatch: {0} vs {1}")]
    ArityMismatch(u32, u32),
    #[error("program has no copies (m = 0)")]
    EmptyProgram,
    #[error("start index {index} out of range 1..={m}")]
    StartIndexOutOfRange { index: usize, m: usize },
    #[error("input has {got} bits, program reads {n} variables")]
    InputLength { n: u32, got: usize },
}

/// Which part of the construction a node belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Segment {
    /// Identification part: levels `0..=n`.
    Fwd1,
    /// Evaluation part: levels `n+1..=2n`.
    Fwd2,
    /// Reversed copy routed to the accept nodes.
    RevA,
    /// Reversed copy routed to the reject nodes.
    RevB,
}

impl Segment {
    pub const ALL: [Segment; 4] = [Segment::Fwd1, Segment::Fwd2, Segment::RevA, Segment::RevB];

    pub fn name(self) -> &'static str {
        match self {
            Segment::Fwd1 => "FWD1",
            Segment::Fwd2 => "FWD2",
            Segment::RevA => "REVA",
            Segment::RevB => "REVB",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|seg| seg.name() == s)
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Structured identity of a node: the function it stands for at its level
/// and which of that function's replicas it is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeRef {
    pub segment: Segment,
    pub level: u32,
    pub func: FuncId,
    pub replica: u64,
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}[{}#{}]", self.segment, self.level, self.func, self.replica)
    }
}

/// Dense index of a node within a [`Program`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A labeled edge: taken from `src` when `x_var == bit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub src: NodeId,
    pub var: u32,
    pub bit: bool,
    pub dst: NodeId,
}

/// Serialized role of a node. Derived from the program's lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Start,
    Accept,
    Reject,
    Dead,
    Root,
    Internal,
}

impl NodeKind {
    pub fn name(self) -> &'static str {
        match self {
            NodeKind::Start => "start",
            NodeKind::Accept => "accept",
            NodeKind::Reject => "reject",
            NodeKind::Dead => "dead",
            NodeKind::Root => "root",
            NodeKind::Internal => "internal",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [NodeKind::Start, NodeKind::Accept, NodeKind::Reject, NodeKind::Dead, NodeKind::Root, NodeKind::Internal]
            .into_iter()
            .find(|k| k.name() == s)
    }
}

/// A branching program on `n` variables with `m` indexed copies.
///
/// Copy `i` (1-based) starts at `starts[i-1]` and should end at
/// `accepts[i-1]` or `rejects[i-1]`. Other outdegree-0 nodes belong in
/// `dead_sinks`; indegree-0 nodes that are not starts are recorded in
/// `unreachable_roots`. Neither list is required to be non-empty.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub n: u32,
    pub m: usize,
    pub nodes: Vec<NodeRef>,
    pub edges: Vec<Edge>,
    pub starts: Vec<NodeId>,
    pub accepts: Vec<NodeId>,
    pub rejects: Vec<NodeId>,
    pub dead_sinks: Vec<NodeId>,
    pub unreachable_roots: Vec<NodeId>,
    pub pruned: bool,
}

impl Program {
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, id: NodeId) -> &NodeRef {
        &self.nodes[id.index()]
    }

    /// Highest level present, or 0 for an empty program.
    pub fn depth(&self) -> u32 {
        self.nodes.iter().map(|r| r.level).max().unwrap_or(0)
    }

    /// Role of every node, with start taking precedence over accept/reject.
    pub fn node_kinds(&self) -> Vec<NodeKind> {
        let mut kinds = vec![NodeKind::Internal; self.nodes.len()];
        let lists = [
            (&self.unreachable_roots, NodeKind::Root),
            (&self.dead_sinks, NodeKind::Dead),
            (&self.rejects, NodeKind::Reject),
            (&self.accepts, NodeKind::Accept),
            (&self.starts, NodeKind::Start),
        ];
        for (list, kind) in lists {
            for id in list.iter() {
                if let Some(k) = kinds.get_mut(id.index()) {
                    *k = kind;
                }
            }
        }
        kinds
    }

    /// Node counts per level, indexed by level.
    pub fn level_histogram(&self) -> Vec<u64> {
        let mut hist = vec![0u64; self.depth() as usize + 1];
        for r in &self.nodes {
            hist[r.level as usize] += 1;
        }
        hist
    }

    pub fn validate(&self) -> ValidationReport {
        validate_structure(self)
    }

    pub fn evaluator(&self) -> Result<Evaluator, ProgramError> {
        Evaluator::new(self)
    }
}

/// Node-disjoint union: `a`'s copies first, then `b`'s copies shifted by `a.m`.
pub fn disjoint_union(a: &Program, b: &Program) -> Result<Program, ProgramError> {
    if a.n != b.n {
        return Err(ProgramError::ArityMismatch(a.n, b.n));
    }
    if a.m == 0 || b.m == 0 {
        return Err(ProgramError::EmptyProgram);
    }
    let offset = a.nodes.len() as u32;
    let shift = |id: &NodeId| NodeId(id.0 + offset);
    let chain = |x: &[NodeId], y: &[NodeId]| x.iter().copied().chain(y.iter().map(shift)).collect();
    Ok(Program {
        n: a.n,
        m: a.m + b.m,
        nodes: a.nodes.iter().chain(&b.nodes).copied().collect(),
        edges: a
            .edges
            .iter()
            .copied()
            .chain(b.edges.iter().map(|e| Edge { src: shift(&e.src), dst: shift(&e.dst), ..*e }))
            .collect(),
        starts: chain(&a.starts, &b.starts),
        accepts: chain(&a.accepts, &b.accepts),
        rejects: chain(&a.rejects, &b.rejects),
        dead_sinks: chain(&a.dead_sinks, &b.dead_sinks),
        unreachable_roots: chain(&a.unreachable_roots, &b.unreachable_roots),
        pruned: a.pruned && b.pruned,
    })
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn node(level: u32) -> NodeRef {
        NodeRef { segment: Segment::Fwd1, level, func: FuncId(0), replica: 0 }
    }

    /// One copy of `x_1`: a root reading `x_1` into an accept or a reject.
    pub fn identity_program() -> Program {
        Program {
            n: 1,
            m: 1,
            nodes: vec![node(0), node(1), NodeRef { replica: 1, ..node(1) }],
            edges: vec![
                Edge { src: NodeId(0), var: 1, bit: false, dst: NodeId(2) },
                Edge { src: NodeId(0), var: 1, bit: true, dst: NodeId(1) },
            ],
            starts: vec![NodeId(0)],
            accepts: vec![NodeId(1)],
            rejects: vec![NodeId(2)],
            ..Default::default()
        }
    }
}
