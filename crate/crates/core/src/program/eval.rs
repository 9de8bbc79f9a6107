use std::fmt;

use serde::Serialize;

use super::{validate_structure, NodeId, Program, ProgramError};

/// Where a walk ends. Accept and reject carry the 1-based copy index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", content = "index", rename_all = "lowercase")]
pub enum SinkOutcome {
    Accept(usize),
    Reject(usize),
    Dead,
}

impl SinkOutcome {
    pub fn index(&self) -> Option<usize> {
        match *self {
            SinkOutcome::Accept(i) | SinkOutcome::Reject(i) => Some(i),
            SinkOutcome::Dead => None,
        }
    }

    pub fn shifted(self, by: usize) -> Self {
        match self {
            SinkOutcome::Accept(i) => SinkOutcome::Accept(i + by),
            SinkOutcome::Reject(i) => SinkOutcome::Reject(i + by),
            SinkOutcome::Dead => SinkOutcome::Dead,
        }
    }

    /// The outcome copy `index` must produce on an input where `f(x) = value`.
    pub fn expected(index: usize, value: bool) -> Self {
        if value {
            SinkOutcome::Accept(index)
        } else {
            SinkOutcome::Reject(index)
        }
    }
}

impl fmt::Display for SinkOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SinkOutcome::Accept(i) => write!(f, "accept {i}"),
            SinkOutcome::Reject(i) => write!(f, "reject {i}"),
            SinkOutcome::Dead => f.write_str("dead"),
        }
    }
}

const NO_VAR: u8 = 0;

/// Adjacency of a structurally valid program, ready for repeated walks.
#[derive(Debug, Clone)]
pub struct Evaluator {
    n: u32,
    var: Vec<u8>,
    next: Vec<[u32; 2]>,
    sink: Vec<Option<SinkOutcome>>,
    starts: Vec<NodeId>,
}

impl Evaluator {
    pub fn new(program: &Program) -> Result<Self, ProgramError> {
        let report = validate_structure(program);
        if let Some(first) = report.violations.first() {
            return Err(ProgramError::StructureInvalid(report.violations.len(), first.clone()));
        }
        let len = program.nodes.len();
        let mut var = vec![NO_VAR; len];
        let mut next = vec![[u32::MAX; 2]; len];
        for e in &program.edges {
            var[e.src.index()] = e.var as u8;
            next[e.src.index()][e.bit as usize] = e.dst.0;
        }
        let mut sink = vec![None; len];
        for &id in &program.dead_sinks {
            sink[id.index()] = Some(SinkOutcome::Dead);
        }
        for (i, &id) in program.rejects.iter().enumerate() {
            sink[id.index()] = Some(SinkOutcome::Reject(i + 1));
        }
        for (i, &id) in program.accepts.iter().enumerate() {
            sink[id.index()] = Some(SinkOutcome::Accept(i + 1));
        }
        Ok(Self { n: program.n, var, next, sink, starts: program.starts.clone() })
    }

    pub fn m(&self) -> usize {
        self.starts.len()
    }

    pub fn start(&self, index: usize) -> Result<NodeId, ProgramError> {
        if index == 0 || index > self.starts.len() {
            return Err(ProgramError::StartIndexOutOfRange { index, m: self.starts.len() });
        }
        Ok(self.starts[index - 1])
    }

    /// Outgoing edge taken from `node` on input `x`, or `None` at a sink.
    pub fn step(&self, node: NodeId, x: &[bool]) -> Option<NodeId> {
        let i = node.index();
        if self.sink[i].is_some() || self.var[i] == NO_VAR {
            return None;
        }
        let b = x[self.var[i] as usize - 1];
        Some(NodeId(self.next[i][b as usize]))
    }

    /// Follows the path from start `index` (1-based) whose labels match `x`.
    pub fn walk(&self, index: usize, x: &[bool]) -> Result<SinkOutcome, ProgramError> {
        self.check_input(x)?;
        let mut node = self.start(index)?;
        while let Some(next) = self.step(node, x) {
            node = next;
        }
        Ok(self.outcome(node))
    }

    /// Like [`Evaluator::walk`], also returning every visited node.
    pub fn walk_trace(&self, index: usize, x: &[bool]) -> Result<(SinkOutcome, Vec<NodeId>), ProgramError> {
        self.check_input(x)?;
        let mut node = self.start(index)?;
        let mut trace = vec![node];
        while let Some(next) = self.step(node, x) {
            node = next;
            trace.push(node);
        }
        Ok((self.outcome(node), trace))
    }

    pub fn outcome(&self, node: NodeId) -> SinkOutcome {
        // validate_structure guarantees every outdegree-0 node is classified.
        self.sink[node.index()].unwrap_or(SinkOutcome::Dead)
    }

    pub fn is_sink(&self, node: NodeId) -> bool {
        self.sink[node.index()].is_some() || self.var[node.index()] == NO_VAR
    }

    pub fn check_input(&self, x: &[bool]) -> Result<(), ProgramError> {
        if x.len() != self.n as usize {
            return Err(ProgramError::InputLength { n: self.n, got: x.len() });
        }
        Ok(())
    }
}

/// One-shot walk; validates the program first.
pub fn walk(program: &Program, index: usize, x: &[bool]) -> Result<SinkOutcome, ProgramError> {
    Evaluator::new(program)?.walk(index, x)
}
