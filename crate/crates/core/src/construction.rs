//! Construction of a single branching program computing `f` on
//! `m = 2^(2^n - 1)` indexed copies with `(6n + 2) 2^(2^n)` nodes.
//!
//! The program has four parts, laid out on global levels `0..=4n`:
//!
//! * `FWD1`, levels `0..=n`: level `j` holds `R(j) = 2^(2^n - 2^j)` replicas of
//!   every function on `x_1..x_j`. The edge for `x_j = b` out of `(g, r)` goes
//!   to a function `g'` whose `x_j = b` half is `g`; the other half and the new
//!   replica come from splitting `r` (see [`part1_target`]). On input `x` the
//!   nodes reached at level `j` are exactly the functions true on `x_1..x_j`.
//! * `FWD2`, levels `n..=2n`: the level-`n` node for `g` doubles as the node
//!   for `G = xnor(f, g)` and each step restricts the highest variable (see
//!   [`part2_target`]). Every live path lands on a constant-1 sink exactly
//!   when `f(x) = 1`.
//! * `REVA` and `REVB`, levels `2n..=4n`: edge-reversed copies of the forward
//!   program, glued onto the constant-1 and constant-0 sinks respectively.
//!   Running a path backwards returns it to the replica it started from, so
//!   start `i` ends at accept `i` or reject `i`.

use std::mem::size_of;

use num::rational::Ratio;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::program::{Edge, Evaluator, NodeId, NodeRef, Program, ProgramError, Segment};
use crate::truthtable::{input_from_index, FuncId, TableError, TruthTable};

/// Largest `n` built without [`BuildOptions::allow_large`].
pub const DEFAULT_MAX_N: u32 = 4;
pub const DEFAULT_MEMORY_LIMIT: u64 = 2 << 30;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error("n = {0} is out of range (supported: 1..=5)")]
    ArityOutOfRange(u32),
    #[error("building n = {n} needs about {estimate_bytes} bytes ({nodes} nodes), limit is {limit} bytes")]
    MemoryGuardExceeded { n: u32, nodes: u64, estimate_bytes: u64, limit: u64 },
    #[error("argument out of range: {0}")]
    RangeError(String),
    #[error("edge set is not reversible at {witness}")]
    ReversibilityViolation { witness: String },
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Program(#[from] ProgramError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildOptions {
    /// Drop every node no start reaches on any input.
    pub prune: bool,
    /// Refuse builds whose estimated footprint exceeds this many bytes.
    pub memory_limit: u64,
    /// Permit `n = 5` (the memory limit still applies).
    pub allow_large: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self { prune: false, memory_limit: DEFAULT_MEMORY_LIMIT, allow_large: false }
    }
}

/// Replicas per function at arity `j`: `2^(2^n - 2^j)`.
pub fn replicas(n: u32, j: u32) -> u64 {
    debug_assert!(j <= n && n <= 5);
    1u64 << ((1u64 << n) - (1u64 << j))
}

/// Nodes per full level: `2^(2^n)`.
pub fn level_width(n: u32) -> u64 {
    FuncId::count(n)
}

/// Number of copies: `2^(2^n - 1)`.
pub fn copies(n: u32) -> u64 {
    replicas(n, 0)
}

/// Unpruned node count `(6n + 2) 2^(2^n)`.
pub fn formula_size(n: u32) -> u64 {
    (6 * n as u64 + 2) * level_width(n)
}

/// `32 n 2^(2^n)`: the stated upper bound on `b_m(f)`.
pub fn size_bound(n: u32) -> u64 {
    32 * n as u64 * level_width(n)
}

/// `64 n`: the stated bound on the amortized per-copy size.
pub fn per_copy_bound(n: u32) -> u64 {
    64 * n as u64
}

/// Arity of the functions labelling a node, given where it sits.
pub fn arity_at(n: u32, segment: Segment, level: u32) -> u32 {
    let forward = match segment {
        Segment::Fwd1 | Segment::Fwd2 => level,
        Segment::RevA | Segment::RevB => 4 * n - level,
    };
    if forward <= n {
        forward
    } else {
        2 * n - forward
    }
}

/// Variable read by the transition from global level `level` to `level + 1`.
pub fn transition_var(n: u32, level: u32) -> u32 {
    let forward = if level < 2 * n { level } else { 4 * n - level - 1 };
    if forward < n {
        forward + 1
    } else {
        2 * n - forward
    }
}

fn check_n(n: u32) -> Result<(), ConstructionError> {
    if n == 0 || n > 5 {
        return Err(ConstructionError::ArityOutOfRange(n));
    }
    Ok(())
}

fn range_error(what: impl Into<String>) -> ConstructionError {
    ConstructionError::RangeError(what.into())
}

/// Identification-part edge: from `(g, r)` at level `j - 1` along `x_j = b`.
///
/// With `q = r div R(j)` and `r' = r mod R(j)`, the target function has `g` as
/// its `x_j = b` half and table `q` as its other half. For fixed `(j, b)` this
/// is a bijection between the two levels.
pub fn part1_target(n: u32, j: u32, b: bool, g: FuncId, r: u64) -> Result<(FuncId, u64), ConstructionError> {
    check_n(n)?;
    if j == 0 || j > n {
        return Err(range_error(format!("level {j} not in 1..={n}")));
    }
    if r >= replicas(n, j - 1) {
        return Err(range_error(format!("replica {r} >= R({}) = {}", j - 1, replicas(n, j - 1))));
    }
    let g = TruthTable::from_id(j - 1, g)?;
    let (q, r_next) = (r / replicas(n, j), r % replicas(n, j));
    let other = TruthTable::from_id(j - 1, FuncId(q))?;
    let target = if b { TruthTable::combine(&other, &g)? } else { TruthTable::combine(&g, &other)? };
    Ok((target.id(), r_next))
}

/// Evaluation-part edge: from `(G, r)` on `j` variables along `x_j = b`.
///
/// The target is `G` restricted to `x_j = b`; the discarded half is stored in
/// the high digits of the new replica, `id(G|x_j=1-b) R(j) + r`.
pub fn part2_target(n: u32, j: u32, b: bool, g: FuncId, r: u64) -> Result<(FuncId, u64), ConstructionError> {
    check_n(n)?;
    if j == 0 || j > n {
        return Err(range_error(format!("arity {j} not in 1..={n}")));
    }
    if r >= replicas(n, j) {
        return Err(range_error(format!("replica {r} >= R({j}) = {}", replicas(n, j))));
    }
    let g = TruthTable::from_id(j, g)?;
    let kept = g.restrict(b)?;
    let dropped = g.restrict(!b)?;
    Ok((kept.id(), dropped.id().0 * replicas(n, j) + r))
}

/// Relabels the identification part's end node `t_g` as the evaluation
/// part's start node for `xnor(f, g)`. Its own inverse for fixed `f`.
pub fn glue_map(f: &TruthTable, g: FuncId) -> Result<FuncId, ConstructionError> {
    let g = TruthTable::from_id(f.arity(), g)?;
    Ok(f.xnor_glue(&g)?.id())
}

/// An edge of a layered segment, with endpoints named by any node key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LayeredEdge<K> {
    pub src: K,
    pub var: u32,
    pub bit: bool,
    pub dst: K,
}

/// Flips every edge, after checking that each node with in-edges has exactly
/// two, reading one variable with both values. Under that condition the
/// reversed edges again form a branching-program segment.
pub fn reverse_segment<K>(edges: &[LayeredEdge<K>]) -> Result<Vec<LayeredEdge<K>>, ConstructionError>
where
    K: Copy + Ord + std::fmt::Debug,
{
    let mut incoming: Vec<(K, u32, bool)> = edges.iter().map(|e| (e.dst, e.var, e.bit)).collect();
    incoming.sort_unstable();
    for group in incoming.chunk_by(|a, b| a.0 == b.0) {
        let ok = matches!(group, [(_, v0, false), (_, v1, true)] if v0 == v1);
        if !ok {
            let labels: Vec<String> = group.iter().map(|(_, v, b)| format!("x{v}={}", *b as u8)).collect();
            return Err(ConstructionError::ReversibilityViolation {
                witness: format!("{:?} with in-edges [{}]", group[0].0, labels.join(", ")),
            });
        }
    }
    Ok(edges.iter().map(|e| LayeredEdge { src: e.dst, var: e.var, bit: e.bit, dst: e.src }).collect())
}

/// Nodes with outgoing edges per copy in an unpruned build: everything but
/// the `2W` level-0 sinks of the reversed copies.
pub fn non_end_per_copy(n: u32) -> u64 {
    12 * n as u64
}

/// Rough peak footprint of an unpruned build, in bytes.
pub fn estimate_bytes(n: u32) -> u64 {
    let nodes = formula_size(n);
    let edges = 2 * 6 * n as u64 * level_width(n);
    nodes * size_of::<NodeRef>() as u64 + edges * (size_of::<Edge>() + size_of::<LayeredEdge<u32>>()) as u64 * 2
}

/// Index arithmetic for the unpruned layout. Forward level `L` occupies ids
/// `L W .. (L + 1) W`, position `func R(arity) + replica` within the level.
#[derive(Debug, Clone, Copy)]
struct Layout {
    n: u32,
    width: u64,
    m: u64,
}

impl Layout {
    fn new(n: u32) -> Self {
        Self { n, width: level_width(n), m: copies(n) }
    }

    fn forward_nodes(&self) -> u64 {
        (2 * self.n as u64 + 1) * self.width
    }

    fn rev_base(&self, seg: Segment) -> u64 {
        let per_copy = self.m + 2 * self.n as u64 * self.width;
        match seg {
            Segment::RevA => self.forward_nodes(),
            _ => self.forward_nodes() + per_copy,
        }
    }

    fn total(&self) -> u64 {
        self.rev_base(Segment::RevB) + self.m + 2 * self.n as u64 * self.width
    }

    fn forward_id(&self, level: u32, pos: u64) -> u64 {
        level as u64 * self.width + pos
    }

    fn split(&self, arity: u32, pos: u64) -> (FuncId, u64) {
        let r = replicas(self.n, arity);
        (FuncId(pos / r), pos % r)
    }

    fn merged(&self, seg: Segment, pos: u64) -> bool {
        // REVA is glued onto the constant-1 sinks, REVB onto constant-0.
        (pos >= self.m) == (seg == Segment::RevA)
    }

    /// Id of the mirror image of forward node `(level, pos)` in a reversed copy.
    fn mirror_id(&self, seg: Segment, level: u32, pos: u64) -> u64 {
        let top = 2 * self.n;
        if level == top {
            if self.merged(seg, pos) {
                return self.forward_id(level, pos);
            }
            let unmerged = if seg == Segment::RevA { pos } else { pos - self.m };
            return self.rev_base(seg) + unmerged;
        }
        self.rev_base(seg) + self.m + (top - level - 1) as u64 * self.width + pos
    }

    /// Reference for every id, in id order.
    fn node_refs(&self) -> Vec<NodeRef> {
        let n = self.n;
        let mut refs = Vec::with_capacity(self.total() as usize);
        for level in 0..=2 * n {
            let segment = if level <= n { Segment::Fwd1 } else { Segment::Fwd2 };
            let arity = arity_at(n, segment, level);
            refs.extend((0..self.width).map(|pos| {
                let (func, replica) = self.split(arity, pos);
                NodeRef { segment, level, func, replica }
            }));
        }
        for segment in [Segment::RevA, Segment::RevB] {
            let top: Vec<u64> = (0..self.width).filter(|&p| !self.merged(segment, p)).collect();
            for pos in top {
                let (func, replica) = self.split(0, pos);
                refs.push(NodeRef { segment, level: 2 * n, func, replica });
            }
            for level in 2 * n + 1..=4 * n {
                let arity = arity_at(n, segment, level);
                refs.extend((0..self.width).map(|pos| {
                    let (func, replica) = self.split(arity, pos);
                    NodeRef { segment, level, func, replica }
                }));
            }
        }
        refs
    }
}

/// Forward edges (`FWD1` then `FWD2`), keyed by forward node id.
fn forward_edges(f: &TruthTable, layout: &Layout) -> Result<Vec<LayeredEdge<u64>>, ConstructionError> {
    let n = layout.n;
    let mut edges = Vec::with_capacity((4 * n as u64 * layout.width) as usize);
    for level in 0..2 * n {
        let var = transition_var(n, level);
        for pos in 0..layout.width {
            for bit in [false, true] {
                let dst_pos = if level < n {
                    let (g, r) = layout.split(level, pos);
                    let (g2, r2) = part1_target(n, level + 1, bit, g, r)?;
                    g2.0 * replicas(n, level + 1) + r2
                } else {
                    let arity = 2 * n - level;
                    let (g, r) = layout.split(arity, pos);
                    let g = if level == n { glue_map(f, g)? } else { g };
                    let (h, r2) = part2_target(n, arity, bit, g, r)?;
                    h.0 * replicas(n, arity - 1) + r2
                };
                edges.push(LayeredEdge {
                    src: layout.forward_id(level, pos),
                    var,
                    bit,
                    dst: layout.forward_id(level + 1, dst_pos),
                });
            }
        }
    }
    Ok(edges)
}

/// Builds the multi-copy program for `f`, where `n = f.arity()`.
pub fn build_amortized(f: &TruthTable, opts: &BuildOptions) -> Result<Program, ConstructionError> {
    let n = f.arity();
    check_n(n)?;
    let estimate = estimate_bytes(n);
    if (n > DEFAULT_MAX_N && !opts.allow_large) || estimate > opts.memory_limit {
        return Err(ConstructionError::MemoryGuardExceeded {
            n,
            nodes: formula_size(n),
            estimate_bytes: estimate,
            limit: opts.memory_limit,
        });
    }

    let layout = Layout::new(n);
    let forward = forward_edges(f, &layout)?;
    let reversed = reverse_segment(&forward)?;
    let to_node = |id: u64| NodeId(id as u32);
    let level_pos = |id: u64| ((id / layout.width) as u32, id % layout.width);

    let mut edges: Vec<Edge> = Vec::with_capacity(3 * forward.len());
    edges.extend(forward.iter().map(|e| Edge { src: to_node(e.src), var: e.var, bit: e.bit, dst: to_node(e.dst) }));
    for seg in [Segment::RevA, Segment::RevB] {
        edges.extend(reversed.iter().map(|e| {
            let (sl, sp) = level_pos(e.src);
            let (dl, dp) = level_pos(e.dst);
            Edge {
                src: to_node(layout.mirror_id(seg, sl, sp)),
                var: e.var,
                bit: e.bit,
                dst: to_node(layout.mirror_id(seg, dl, dp)),
            }
        }));
    }
    drop(reversed);
    edges.sort_unstable_by_key(|e| (e.src, e.bit));

    let m = layout.m;
    let bottom = 0;
    let mirrored = |seg, range: std::ops::Range<u64>| -> Vec<NodeId> {
        range.map(|p| to_node(layout.mirror_id(seg, bottom, p))).collect()
    };
    let mut dead_sinks = mirrored(Segment::RevA, 0..m);
    dead_sinks.extend(mirrored(Segment::RevB, 0..m));
    let mut unreachable_roots: Vec<NodeId> = (0..m).map(|p| to_node(layout.forward_id(0, p))).collect();
    for seg in [Segment::RevA, Segment::RevB] {
        let top = (0..layout.width).filter(|&p| !layout.merged(seg, p));
        unreachable_roots.extend(top.map(|p| to_node(layout.mirror_id(seg, 2 * n, p))));
    }
    dead_sinks.sort_unstable();
    unreachable_roots.sort_unstable();

    let program = Program {
        n,
        m: m as usize,
        nodes: layout.node_refs(),
        edges,
        starts: (m..2 * m).map(|p| to_node(layout.forward_id(0, p))).collect(),
        accepts: mirrored(Segment::RevA, m..2 * m),
        rejects: mirrored(Segment::RevB, m..2 * m),
        dead_sinks,
        unreachable_roots,
        pruned: false,
    };
    debug_assert_eq!(program.nodes.len() as u64, layout.total());

    if opts.prune {
        prune_unreachable(&program)
    } else {
        Ok(program)
    }
}

/// Keeps the nodes some start reaches on some input, plus the listed starts,
/// accepts and rejects. Ids are renumbered in their original order.
pub fn prune_unreachable(program: &Program) -> Result<Program, ConstructionError> {
    let eval = Evaluator::new(program)?;
    let mut keep = vec![false; program.nodes.len()];
    for id in program.starts.iter().chain(&program.accepts).chain(&program.rejects) {
        keep[id.index()] = true;
    }
    for index in 0..1usize << program.n {
        let x = input_from_index(index, program.n);
        for &start in &program.starts {
            let mut node = start;
            keep[node.index()] = true;
            while let Some(next) = eval.step(node, &x) {
                node = next;
                keep[node.index()] = true;
            }
        }
    }

    // An edge into a dropped node is never taken; it is redirected to the
    // sibling edge's target so outdegree stays 2.
    let mut taken = vec![u32::MAX; program.nodes.len()];
    for e in &program.edges {
        if keep[e.src.index()] && keep[e.dst.index()] {
            taken[e.src.index()] = e.dst.0;
        }
    }

    let mut remap = vec![u32::MAX; program.nodes.len()];
    let mut nodes = Vec::new();
    for (i, r) in program.nodes.iter().enumerate().filter(|(i, _)| keep[*i]) {
        remap[i] = nodes.len() as u32;
        nodes.push(*r);
    }
    let map = |id: &NodeId| NodeId(remap[id.index()]);
    let map_kept = |list: &[NodeId]| list.iter().filter(|id| keep[id.index()]).map(map).collect();
    Ok(Program {
        n: program.n,
        m: program.m,
        nodes,
        edges: program
            .edges
            .iter()
            .filter(|e| keep[e.src.index()])
            .map(|e| {
                let dst = if keep[e.dst.index()] { e.dst } else { NodeId(taken[e.src.index()]) };
                Edge { src: map(&e.src), dst: map(&dst), ..*e }
            })
            .collect(),
        starts: program.starts.iter().map(map).collect(),
        accepts: program.accepts.iter().map(map).collect(),
        rejects: program.rejects.iter().map(map).collect(),
        dead_sinks: map_kept(&program.dead_sinks),
        unreachable_roots: map_kept(&program.unreachable_roots),
        pruned: true,
    })
}

fn ratio_as_string<S: Serializer>(r: &Ratio<u64>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// Sizes counted from the graph, compared against the stated bounds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SizeReport {
    pub n: u32,
    pub m: u64,
    pub total_nodes: u64,
    pub total_edges: u64,
    #[serde(serialize_with = "ratio_as_string")]
    pub per_copy: Ratio<u64>,
    /// `32 n 2^(2^n)`
    pub bound_total: u64,
    /// `64 n`
    pub bound_per_copy: u64,
    pub within_total_bound: bool,
    pub within_per_copy_bound: bool,
    /// `(6n + 2) 2^(2^n)`, for comparison with `total_nodes`.
    pub formula_total: u64,
    pub per_level_histogram: Vec<u64>,
    pub dead_sink_count: u64,
    pub unreachable_root_count: u64,
    pub pruned: bool,
}

impl SizeReport {
    pub fn bounds_hold(&self) -> bool {
        self.within_total_bound && self.within_per_copy_bound
    }
}

pub fn size_report(program: &Program) -> SizeReport {
    let n = program.n;
    let total = program.nodes.len() as u64;
    let m = program.m as u64;
    let per_copy = Ratio::new(total, m.max(1));
    let (bound_total, bound_per_copy, formula_total) =
        if (1..=5).contains(&n) { (size_bound(n), per_copy_bound(n), formula_size(n)) } else { (0, 0, 0) };
    SizeReport {
        n,
        m,
        total_nodes: total,
        total_edges: program.edges.len() as u64,
        per_copy,
        bound_total,
        bound_per_copy,
        within_total_bound: total <= bound_total,
        within_per_copy_bound: m > 0 && per_copy <= Ratio::from_integer(bound_per_copy),
        formula_total,
        per_level_histogram: program.level_histogram(),
        dead_sink_count: program.dead_sinks.len() as u64,
        unreachable_root_count: program.unreachable_roots.len() as u64,
        pruned: program.pruned,
    }
}
