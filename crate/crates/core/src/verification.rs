//! Exhaustive checkers for the behaviour of constructed programs.
//!
//! Every checker is a pure reader of the program and returns a
//! [`VerificationReport`]; a failing report carries the first witness found.

use std::time::Instant;

use num::rational::Ratio;
use rand::Rng;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::construction::{arity_at, formula_size, per_copy_bound};
use crate::program::{Edge, Evaluator, NodeId, NodeRef, Program, ProgramError, Segment, SinkOutcome};
use crate::truthtable::{format_input, input_from_index, TruthTable};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("this check needs the unpruned construction layout")]
    RequiresUnpruned,
    #[error("program does not have the construction layout: {0}")]
    LayoutMismatch(String),
    #[error("level {level} reads more than one variable: {vars:?}")]
    NotOblivious { level: u32, vars: Vec<u32> },
    #[error("input {input}: level {level} x-consistent map is not injective at node {node}")]
    NotInjective { input: String, level: u32, node: NodeId },
    #[error("function has {got} variables, program reads {n}")]
    ArityMismatch { n: u32, got: u32 },
    #[error(transparent)]
    Program(#[from] ProgramError),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Witness {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start_index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node: Option<u32>,
    pub expected: String,
    pub got: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub paths_checked: u64,
    pub nodes_checked: u64,
}

/// Outcome of one check. `pass` holds exactly when `witness` is absent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub check: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub counts: Counts,
    pub millis: u64,
}

impl VerificationReport {
    fn finish(check: &str, witness: Option<Witness>, counts: Counts, started: Instant) -> Self {
        Self {
            check: check.to_string(),
            pass: witness.is_none(),
            witness,
            counts,
            millis: started.elapsed().as_millis() as u64,
        }
    }

    /// Conjunction of pass flags; the first witness wins.
    pub fn merge(check: &str, reports: impl IntoIterator<Item = VerificationReport>) -> Self {
        let mut out =
            Self { check: check.to_string(), pass: true, witness: None, counts: Counts::default(), millis: 0 };
        for r in reports {
            out.counts.paths_checked += r.counts.paths_checked;
            out.counts.nodes_checked += r.counts.nodes_checked;
            out.millis += r.millis;
            if out.witness.is_none() {
                out.witness = r.witness;
            }
        }
        out.pass = out.witness.is_none();
        out
    }
}

fn check_arity(program: &Program, f: &TruthTable) -> Result<(), VerifyError> {
    if f.arity() != program.n {
        return Err(VerifyError::ArityMismatch { n: program.n, got: f.arity() });
    }
    Ok(())
}

fn all_inputs(n: u32) -> impl Iterator<Item = (usize, Vec<bool>)> {
    (0..1usize << n).map(move |i| (i, input_from_index(i, n)))
}

/// Every start on every input lands on the accept or reject with its own index.
pub fn verify_m_copies(program: &Program, f: &TruthTable) -> Result<VerificationReport, VerifyError> {
    let started = Instant::now();
    check_arity(program, f)?;
    let eval = Evaluator::new(program)?;
    let mut counts = Counts::default();
    let mut witness = None;
    'outer: for (xi, x) in all_inputs(program.n) {
        for i in 1..=program.m {
            let got = eval.walk(i, &x)?;
            counts.paths_checked += 1;
            let expected = SinkOutcome::expected(i, f.get(xi));
            if got != expected {
                witness = Some(Witness {
                    start_index: Some(i),
                    input: Some(format_input(&x)),
                    node: None,
                    expected: expected.to_string(),
                    got: got.to_string(),
                });
                break 'outer;
            }
        }
    }
    Ok(VerificationReport::finish("copies", witness, counts, started))
}

/// The `m` walks on input `x` visit pairwise disjoint node sets.
pub fn verify_disjoint_paths(program: &Program, x: &[bool]) -> Result<VerificationReport, VerifyError> {
    let started = Instant::now();
    let eval = Evaluator::new(program)?;
    Ok(disjoint_with(&eval, program, x, started))
}

fn disjoint_with(eval: &Evaluator, program: &Program, x: &[bool], started: Instant) -> VerificationReport {
    let mut owner = vec![0usize; program.nodes.len()];
    let mut counts = Counts::default();
    let mut witness = None;
    'outer: for i in 1..=program.m {
        let mut node = program.starts[i - 1];
        loop {
            counts.nodes_checked += 1;
            let prev = std::mem::replace(&mut owner[node.index()], i);
            if prev != 0 {
                witness = Some(Witness {
                    start_index: Some(i),
                    input: Some(format_input(x)),
                    node: Some(node.0),
                    expected: "node visited by one path".into(),
                    got: format!("node also on the path of start {prev}"),
                });
                break 'outer;
            }
            match eval.step(node, x) {
                Some(next) => node = next,
                None => break,
            }
        }
        counts.paths_checked += 1;
    }
    VerificationReport::finish("disjoint", witness, counts, started)
}

/// [`verify_disjoint_paths`] over every input.
pub fn verify_disjoint_all(program: &Program) -> Result<VerificationReport, VerifyError> {
    let eval = Evaluator::new(program)?;
    let reports = all_inputs(program.n).map(|(_, x)| disjoint_with(&eval, program, &x, Instant::now()));
    Ok(VerificationReport::merge("disjoint", reports))
}

fn require_layout(program: &Program) -> Result<(), VerifyError> {
    if program.pruned {
        return Err(VerifyError::RequiresUnpruned);
    }
    if !(1..=5).contains(&program.n) || program.nodes.len() as u64 != formula_size(program.n) {
        return Err(VerifyError::LayoutMismatch(format!(
            "{} nodes, expected {}",
            program.nodes.len(),
            if (1..=5).contains(&program.n) { formula_size(program.n) } else { 0 }
        )));
    }
    Ok(())
}

/// Whether a node of the unpruned construction is reached from some start
/// on `x`, predicted from its label alone.
///
/// * `FWD1` node for `g` on `j` variables: `g(x_1..x_j) = 1`.
/// * `FWD2` node for `G` on `j` variables: `G(x_1..x_j) = f(x)`; the glue
///   sends `t_g` to `xnor(f, g)`, so the live functions are those agreeing
///   with `f` on `x`.
/// * Reversed nodes: the mirrored forward node is live and `f(x)` selects
///   that copy (1 for `REVA`, 0 for `REVB`).
pub fn predicted_reachable(n: u32, node: &NodeRef, f: &TruthTable, x: &[bool], fx: bool) -> bool {
    let forward_live = |segment_is_fwd1: bool, arity: u32| {
        let g = TruthTable::from_id(arity, node.func).expect("function id in range");
        let value = g.evaluate(&x[..arity as usize]).expect("prefix length");
        if segment_is_fwd1 {
            value
        } else {
            value == fx
        }
    };
    debug_assert_eq!(f.arity(), n);
    let arity = arity_at(n, node.segment, node.level);
    match node.segment {
        Segment::Fwd1 => forward_live(true, arity),
        Segment::Fwd2 => forward_live(false, arity),
        Segment::RevA | Segment::RevB => {
            let forward_level = 4 * n - node.level;
            let live = forward_live(forward_level <= n, arity);
            live && (fx == (node.segment == Segment::RevA))
        }
    }
}

/// Reachability from the starts matches [`predicted_reachable`] for every
/// node and input; in particular accepts have `f_v = f`, rejects `f_v = ¬f`
/// and dead sinks `f_v = 0`.
pub fn verify_node_semantics(program: &Program, f: &TruthTable) -> Result<VerificationReport, VerifyError> {
    let started = Instant::now();
    require_layout(program)?;
    check_arity(program, f)?;
    let eval = Evaluator::new(program)?;
    let mut counts = Counts::default();
    let mut witness = None;
    let accept_set: Vec<bool> = membership(program, &program.accepts);
    let reject_set: Vec<bool> = membership(program, &program.rejects);
    let dead_set: Vec<bool> = membership(program, &program.dead_sinks);

    'outer: for (xi, x) in all_inputs(program.n) {
        let fx = f.get(xi);
        let mut reached = vec![false; program.nodes.len()];
        for &start in &program.starts {
            let mut node = start;
            reached[node.index()] = true;
            while let Some(next) = eval.step(node, &x) {
                node = next;
                reached[node.index()] = true;
            }
            counts.paths_checked += 1;
        }
        for (i, r) in program.nodes.iter().enumerate() {
            counts.nodes_checked += 1;
            let predicted = predicted_reachable(program.n, r, f, &x, fx);
            let sink_rule = if accept_set[i] {
                Some(fx)
            } else if reject_set[i] {
                Some(!fx)
            } else if dead_set[i] {
                Some(false)
            } else {
                None
            };
            let mismatch = reached[i] != predicted || sink_rule.is_some_and(|v| v != reached[i]);
            if mismatch {
                witness = Some(Witness {
                    start_index: None,
                    input: Some(format_input(&x)),
                    node: Some(i as u32),
                    expected: format!("f_v = {} at {r}", predicted as u8),
                    got: format!("f_v = {}", reached[i] as u8),
                });
                break 'outer;
            }
        }
    }
    Ok(VerificationReport::finish("semantics", witness, counts, started))
}

fn membership(program: &Program, list: &[NodeId]) -> Vec<bool> {
    let mut set = vec![false; program.nodes.len()];
    for id in list {
        set[id.index()] = true;
    }
    set
}

/// Nodes grouped by level, with each node's rank inside its level.
struct Levels {
    members: Vec<Vec<NodeId>>,
    rank: Vec<u32>,
}

impl Levels {
    fn new(program: &Program) -> Self {
        let mut members = vec![Vec::new(); program.depth() as usize + 1];
        let mut rank = vec![0u32; program.nodes.len()];
        for (i, r) in program.nodes.iter().enumerate() {
            let level = &mut members[r.level as usize];
            rank[i] = level.len() as u32;
            level.push(NodeId(i as u32));
        }
        Self { members, rank }
    }
}

const NONE: u32 = u32::MAX;

/// Outcome of every start on `x`, computed by building each level's
/// x-consistent map directly from the edge list (checking it is injective)
/// and composing the maps level by level.
pub fn eval_all_fast(program: &Program, x: &[bool]) -> Result<Vec<SinkOutcome>, VerifyError> {
    if program.pruned {
        return Err(VerifyError::RequiresUnpruned);
    }
    if x.len() != program.n as usize {
        return Err(ProgramError::InputLength { n: program.n, got: x.len() }.into());
    }
    let levels = Levels::new(program);
    if let Some(s) = program.starts.iter().find(|s| program.node(**s).level != 0) {
        return Err(VerifyError::LayoutMismatch(format!("start {s} is not on level 0")));
    }

    // maps[t][rank at level t] = rank at level t + 1 along the x-edge.
    let mut maps: Vec<Vec<u32>> = levels.members.iter().map(|l| vec![NONE; l.len()]).collect();
    let mut hit: Vec<Vec<bool>> = levels.members.iter().map(|l| vec![false; l.len()]).collect();
    for e in program.edges.iter().filter(|e| e.var >= 1 && x.get(e.var as usize - 1) == Some(&e.bit)) {
        let t = program.node(e.src).level as usize;
        let (sr, dr) = (levels.rank[e.src.index()] as usize, levels.rank[e.dst.index()] as usize);
        if program.node(e.dst).level as usize != t + 1 || maps[t][sr] != NONE || hit[t + 1][dr] {
            return Err(VerifyError::NotInjective { input: format_input(x), level: t as u32, node: e.dst });
        }
        maps[t][sr] = dr as u32;
        hit[t + 1][dr] = true;
    }

    let mut outcome_at = vec![None; program.nodes.len()];
    for (i, id) in program.accepts.iter().enumerate() {
        outcome_at[id.index()] = Some(SinkOutcome::Accept(i + 1));
    }
    for (i, id) in program.rejects.iter().enumerate() {
        outcome_at[id.index()] = Some(SinkOutcome::Reject(i + 1));
    }

    // Compose: track (level, rank) for every start until its map runs out.
    let mut current: Vec<(usize, u32)> = program.starts.iter().map(|s| (0, levels.rank[s.index()])).collect();
    for (t, map) in maps.iter().enumerate() {
        for state in current.iter_mut().filter(|(lvl, _)| *lvl == t) {
            let next = map[state.1 as usize];
            if next != NONE && outcome_at[levels.members[t][state.1 as usize].index()].is_none() {
                *state = (t + 1, next);
            }
        }
    }
    Ok(current
        .into_iter()
        .map(|(t, r)| outcome_at[levels.members[t][r as usize].index()].unwrap_or(SinkOutcome::Dead))
        .collect())
}

/// Agreement of [`eval_all_fast`] with the expected outcome on every input,
/// plus a sample of `spot_checks` random walks compared against it.
pub fn verify_fast(
    program: &Program,
    f: &TruthTable,
    spot_checks: usize,
    rng: &mut impl Rng,
) -> Result<VerificationReport, VerifyError> {
    let started = Instant::now();
    check_arity(program, f)?;
    let eval = Evaluator::new(program)?;
    let mut counts = Counts::default();
    let mut witness = None;
    let mut all = Vec::new();
    for (xi, x) in all_inputs(program.n) {
        let outcomes = match eval_all_fast(program, &x) {
            Ok(outcomes) => outcomes,
            Err(VerifyError::NotInjective { input, level, node }) => {
                let witness = Witness {
                    start_index: None,
                    input: Some(input),
                    node: Some(node.0),
                    expected: format!("injective x-consistent map out of level {level}"),
                    got: format!("two edges into node {node}"),
                };
                return Ok(VerificationReport::finish("fast", Some(witness), counts, started));
            }
            Err(e) => return Err(e),
        };
        for (i, got) in outcomes.iter().enumerate() {
            counts.paths_checked += 1;
            let expected = SinkOutcome::expected(i + 1, f.get(xi));
            if *got != expected && witness.is_none() {
                witness = Some(Witness {
                    start_index: Some(i + 1),
                    input: Some(format_input(&x)),
                    node: None,
                    expected: expected.to_string(),
                    got: got.to_string(),
                });
            }
        }
        all.push(outcomes);
    }
    for _ in 0..spot_checks {
        let xi = rng.gen_range(0..1usize << program.n);
        let i = rng.gen_range(1..=program.m);
        let x = input_from_index(xi, program.n);
        let walked = eval.walk(i, &x)?;
        counts.paths_checked += 1;
        if walked != all[xi][i - 1] && witness.is_none() {
            witness = Some(Witness {
                start_index: Some(i),
                input: Some(format_input(&x)),
                node: None,
                expected: format!("walk agrees with fast evaluation ({})", all[xi][i - 1]),
                got: walked.to_string(),
            });
        }
    }
    Ok(VerificationReport::finish("fast", witness, counts, started))
}

/// Variable read at each level transition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReadSchedule {
    /// `vars[t]` is read on the transition from level `t` to `t + 1`.
    pub vars: Vec<u32>,
}

impl ReadSchedule {
    /// How often each variable `1..=n` is read among the first `len` transitions.
    pub fn counts(&self, n: u32, len: usize) -> Vec<usize> {
        (1..=n).map(|v| self.vars.iter().take(len).filter(|&&w| w == v).count()).collect()
    }

    /// `x_1..x_n, x_n..x_1`, repeated twice.
    pub fn expected(n: u32) -> Self {
        let up: Vec<u32> = (1..=n).collect();
        let down: Vec<u32> = (1..=n).rev().collect();
        Self { vars: [up.clone(), down.clone(), up, down].concat() }
    }
}

/// Reads the schedule off the edges, failing if any level reads two variables.
pub fn read_schedule(program: &Program) -> Result<ReadSchedule, VerifyError> {
    let depth = program.depth();
    let mut vars: Vec<Option<u32>> = vec![None; depth as usize];
    for e in &program.edges {
        let level = program.node(e.src).level;
        match vars.get_mut(level as usize) {
            Some(slot @ None) => *slot = Some(e.var),
            Some(Some(v)) if *v != e.var => {
                return Err(VerifyError::NotOblivious { level, vars: vec![*v, e.var] });
            }
            _ => {}
        }
    }
    Ok(ReadSchedule { vars: vars.into_iter().map(|v| v.unwrap_or(0)).collect() })
}

/// The schedule is oblivious, equals [`ReadSchedule::expected`], reads every
/// variable 4 times overall and twice in the forward half.
pub fn verify_read_schedule(program: &Program) -> Result<VerificationReport, VerifyError> {
    let started = Instant::now();
    let n = program.n;
    let counts = Counts { paths_checked: 0, nodes_checked: program.nodes.len() as u64 };
    let schedule = match read_schedule(program) {
        Ok(s) => s,
        Err(VerifyError::NotOblivious { level, vars }) => {
            let witness = Witness {
                expected: format!("one variable at level {level}"),
                got: format!("{vars:?}"),
                ..Default::default()
            };
            return Ok(VerificationReport::finish("schedule", Some(witness), counts, started));
        }
        Err(e) => return Err(e),
    };
    let expected = ReadSchedule::expected(n);
    let all_four = schedule.counts(n, schedule.vars.len()).iter().all(|&c| c == 4);
    let prefix_two = schedule.counts(n, 2 * n as usize).iter().all(|&c| c == 2);
    let witness = (schedule != expected || !all_four || !prefix_two).then(|| Witness {
        expected: format!("{:?}", expected.vars),
        got: format!("{:?}", schedule.vars),
        ..Default::default()
    });
    Ok(VerificationReport::finish("schedule", witness, counts, started))
}

fn ratio_as_string<S: Serializer>(r: &Ratio<u64>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

fn ratios_as_strings<S: Serializer>(rs: &[Ratio<u64>], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(rs.iter().map(|r| r.to_string()))
}

/// How many inputs of a designated set route some start through each node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrafficTable {
    pub input_count: u64,
    #[serde(skip)]
    pub counts: Vec<u64>,
    pub total_visits: u64,
    /// Visits per input on each level.
    #[serde(serialize_with = "ratios_as_strings")]
    pub level_visits: Vec<Ratio<u64>>,
    /// `size / m`: the largest `S` a bottleneck criterion could certify here.
    #[serde(serialize_with = "ratio_as_string")]
    pub s_emp: Ratio<u64>,
    /// Minimum over visited levels of `level width / visits per input`.
    #[serde(serialize_with = "ratio_as_string")]
    pub min_level_ratio: Ratio<u64>,
    pub max_node_traffic: u64,
}

pub fn vertex_traffic(program: &Program, inputs: &[Vec<bool>]) -> Result<TrafficTable, VerifyError> {
    let eval = Evaluator::new(program)?;
    let mut counts = vec![0u64; program.nodes.len()];
    for x in inputs {
        eval.check_input(x)?;
        let mut seen = vec![false; program.nodes.len()];
        for &start in &program.starts {
            let mut node = start;
            seen[node.index()] = true;
            while let Some(next) = eval.step(node, x) {
                node = next;
                seen[node.index()] = true;
            }
        }
        for (c, s) in counts.iter_mut().zip(&seen) {
            *c += *s as u64;
        }
    }
    let k = (inputs.len() as u64).max(1);
    let hist = program.level_histogram();
    let mut per_level = vec![0u64; hist.len()];
    for (i, r) in program.nodes.iter().enumerate() {
        per_level[r.level as usize] += counts[i];
    }
    let level_visits: Vec<Ratio<u64>> = per_level.iter().map(|&v| Ratio::new(v, k)).collect();
    let min_level_ratio = hist
        .iter()
        .zip(&per_level)
        .filter(|(_, &v)| v > 0)
        .map(|(&w, &v)| Ratio::new(w * k, v))
        .min()
        .unwrap_or_default();
    Ok(TrafficTable {
        input_count: inputs.len() as u64,
        total_visits: counts.iter().sum(),
        max_node_traffic: counts.iter().copied().max().unwrap_or(0),
        counts,
        level_visits,
        s_emp: Ratio::new(program.nodes.len() as u64, program.m.max(1) as u64),
        min_level_ratio,
    })
}

/// The inputs on which `f` is 1, or all inputs when there are none.
pub fn yes_inputs(f: &TruthTable) -> Vec<Vec<bool>> {
    let yes: Vec<Vec<bool>> = all_inputs(f.arity()).filter(|(i, _)| f.get(*i)).map(|(_, x)| x).collect();
    if yes.is_empty() {
        all_inputs(f.arity()).map(|(_, x)| x).collect()
    } else {
        yes
    }
}

/// Traffic accounting over the yes-inputs of `f`:
/// node traffic is at most `|I|`, total traffic at least `m |I|`, and
/// `size / m <= 64 n`. On the unpruned layout, every forward level carries
/// exactly `m` paths per input and each `FWD1` node `(g, r)` on `j`
/// variables carries `|{x in I : g(x_1..x_j) = 1}|`.
pub fn verify_traffic(program: &Program, f: &TruthTable) -> Result<VerificationReport, VerifyError> {
    let started = Instant::now();
    check_arity(program, f)?;
    let inputs = yes_inputs(f);
    let table = vertex_traffic(program, &inputs)?;
    let k = inputs.len() as u64;
    let m = program.m as u64;
    let counts = Counts { paths_checked: m * k, nodes_checked: program.nodes.len() as u64 };
    let fail = |expected: String, got: String| Some(Witness { expected, got, ..Default::default() });

    let mut witness = None;
    if table.max_node_traffic > k {
        witness = fail(format!("node traffic <= {k}"), table.max_node_traffic.to_string());
    } else if table.total_visits < m * k {
        witness = fail(format!("total traffic >= {}", m * k), table.total_visits.to_string());
    } else if table.s_emp > Ratio::from_integer(per_copy_bound(program.n)) {
        witness = fail(format!("size / m <= {}", per_copy_bound(program.n)), table.s_emp.to_string());
    } else if require_layout(program).is_ok() {
        for level in 0..=2 * program.n as usize {
            if table.level_visits[level] != Ratio::from_integer(m) {
                witness = fail(format!("{m} visits per input on level {level}"), table.level_visits[level].to_string());
                break;
            }
        }
        if witness.is_none() {
            for (i, r) in program.nodes.iter().enumerate().filter(|(_, r)| r.segment == Segment::Fwd1) {
                let g = TruthTable::from_id(r.level, r.func).expect("function id in range");
                let expect = inputs.iter().filter(|x| g.evaluate(&x[..r.level as usize]).unwrap()).count() as u64;
                if table.counts[i] != expect {
                    witness = Some(Witness {
                        node: Some(i as u32),
                        expected: format!("traffic {expect} at {r}"),
                        got: table.counts[i].to_string(),
                        ..Default::default()
                    });
                    break;
                }
            }
        }
    }
    Ok(VerificationReport::finish("traffic", witness, counts, started))
}

/// Every node has indegree 0 or 2, its in-edges reading one variable with
/// both values. Equivalently, each level transition restricted to one label
/// is a bijection onto the nodes it reaches.
pub fn verify_bijections(program: &Program) -> VerificationReport {
    let started = Instant::now();
    let mut incoming: Vec<(NodeId, u32, bool)> = program.edges.iter().map(|e| (e.dst, e.var, e.bit)).collect();
    incoming.sort_unstable();
    let mut witness = None;
    for group in incoming.chunk_by(|a, b| a.0 == b.0) {
        let ok = matches!(group, [(_, v0, false), (_, v1, true)] if v0 == v1);
        if !ok {
            let labels: Vec<String> = group.iter().map(|(_, v, b)| format!("x{v}={}", *b as u8)).collect();
            witness = Some(Witness {
                node: Some(group[0].0 .0),
                expected: "in-edges [xk=0, xk=1]".into(),
                got: format!("in-edges [{}]", labels.join(", ")),
                ..Default::default()
            });
            break;
        }
    }
    let counts = Counts { paths_checked: 0, nodes_checked: program.nodes.len() as u64 };
    VerificationReport::finish("bijection", witness, counts, started)
}

/// For every input, the x-consistent edges between consecutive levels form a
/// perfect matching between the non-sinks of one level and the nodes with
/// in-edges on the next.
pub fn verify_matchings(program: &Program) -> VerificationReport {
    let started = Instant::now();
    let len = program.nodes.len();
    let mut has_in = vec![false; len];
    let mut has_out = vec![false; len];
    for e in &program.edges {
        has_in[e.dst.index()] = true;
        has_out[e.src.index()] = true;
    }
    let mut counts = Counts::default();
    let mut witness = None;
    'outer: for (_, x) in all_inputs(program.n) {
        let mut indeg = vec![0u8; len];
        let mut outdeg = vec![0u8; len];
        for e in program.edges.iter().filter(|e| x[e.var as usize - 1] == e.bit) {
            indeg[e.dst.index()] += 1;
            outdeg[e.src.index()] += 1;
        }
        for i in 0..len {
            counts.nodes_checked += 1;
            let bad_in = has_in[i] && indeg[i] != 1;
            let bad_out = has_out[i] && outdeg[i] != 1;
            if bad_in || bad_out {
                witness = Some(Witness {
                    input: Some(format_input(&x)),
                    node: Some(i as u32),
                    expected: "one matched x-edge in and out".into(),
                    got: format!("{} in, {} out", indeg[i], outdeg[i]),
                    ..Default::default()
                });
                break 'outer;
            }
        }
        counts.paths_checked += 1;
    }
    VerificationReport::finish("matching", witness, counts, started)
}

/// Redirects one random edge to a different node on the same level as its
/// old target. Returns `None` when no such node exists.
pub fn redirect_random_edge(program: &Program, rng: &mut impl Rng) -> Option<(Program, usize, NodeId)> {
    if program.edges.is_empty() {
        return None;
    }
    let levels = Levels::new(program);
    for _ in 0..64 {
        let k = rng.gen_range(0..program.edges.len());
        let Edge { dst, .. } = program.edges[k];
        let peers = &levels.members[program.node(dst).level as usize];
        if peers.len() < 2 {
            continue;
        }
        let mut new_dst = peers[rng.gen_range(0..peers.len())];
        while new_dst == dst {
            new_dst = peers[rng.gen_range(0..peers.len())];
        }
        let mut mutated = program.clone();
        mutated.edges[k].dst = new_dst;
        return Some((mutated, k, new_dst));
    }
    None
}

/// Checks selectable on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Structure,
    Copies,
    Disjoint,
    Semantics,
    Schedule,
    Traffic,
    Bijection,
    Fast,
}

impl Check {
    pub const ALL: [Check; 8] = [
        Check::Structure,
        Check::Copies,
        Check::Disjoint,
        Check::Semantics,
        Check::Schedule,
        Check::Traffic,
        Check::Bijection,
        Check::Fast,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Structure => "structure",
            Check::Copies => "copies",
            Check::Disjoint => "disjoint",
            Check::Semantics => "semantics",
            Check::Schedule => "schedule",
            Check::Traffic => "traffic",
            Check::Bijection => "bijection",
            Check::Fast => "fast",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }

    /// Checks that assume the unpruned construction layout.
    pub fn needs_layout(self) -> bool {
        matches!(self, Check::Semantics | Check::Fast | Check::Bijection)
    }
}

/// Structural validity as a report.
pub fn verify_structure(program: &Program) -> VerificationReport {
    let started = Instant::now();
    let report = program.validate();
    let witness = report.violations.first().map(|v| Witness {
        expected: "well-formed branching program".into(),
        got: format!("{} violations, first: {v}", report.violations.len()),
        ..Default::default()
    });
    let counts = Counts { paths_checked: 0, nodes_checked: program.nodes.len() as u64 };
    VerificationReport::finish("structure", witness, counts, started)
}

/// Runs the requested checks in order. Structural failure stops the run,
/// since the remaining checks need a well-formed program.
pub fn run_checks(
    program: &Program,
    f: &TruthTable,
    checks: &[Check],
    rng: &mut impl Rng,
) -> Result<Vec<VerificationReport>, VerifyError> {
    let structure = verify_structure(program);
    if !structure.pass {
        return Ok(vec![structure]);
    }
    let mut out = Vec::new();
    for &check in checks {
        out.push(match check {
            Check::Structure => structure.clone(),
            Check::Copies => verify_m_copies(program, f)?,
            Check::Disjoint => verify_disjoint_all(program)?,
            Check::Semantics => verify_node_semantics(program, f)?,
            Check::Schedule => verify_read_schedule(program)?,
            Check::Traffic => verify_traffic(program, f)?,
            Check::Bijection => {
                VerificationReport::merge("bijection", [verify_bijections(program), verify_matchings(program)])
            }
            Check::Fast => verify_fast(program, f, 1024, rng)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::construction::{build_amortized, BuildOptions};
    use crate::truthtable::{named_function, FunctionSpec};

    fn build(spec: FunctionSpec, n: u32) -> (Program, TruthTable) {
        let f = named_function(&spec, n).unwrap();
        (build_amortized(&f, &BuildOptions::default()).unwrap(), f)
    }

    #[test]
    fn all_checks_pass_on_n2_xor() {
        let (p, f) = build(FunctionSpec::Xor, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for r in run_checks(&p, &f, &Check::ALL, &mut rng).unwrap() {
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn wrong_function_fails_copies() {
        let (p, _) = build(FunctionSpec::Xor, 2);
        let and = named_function(&FunctionSpec::And, 2).unwrap();
        let r = verify_m_copies(&p, &and).unwrap();
        assert!(!r.pass);
        let w = r.witness.unwrap();
        assert_eq!(w.start_index, Some(1));
        assert_eq!(w.input.as_deref(), Some("10"));
        assert_eq!(w.expected, "reject 1");
        assert_eq!(w.got, "accept 1");
    }

    #[test]
    fn schedules() {
        let (p, _) = build(FunctionSpec::And, 2);
        assert_eq!(read_schedule(&p).unwrap().vars, vec![1, 2, 2, 1, 1, 2, 2, 1]);
        let (p, _) = build(FunctionSpec::Xor, 1);
        assert_eq!(read_schedule(&p).unwrap().vars, vec![1, 1, 1, 1]);
        assert!(verify_read_schedule(&p).unwrap().pass);
    }

    #[test]
    fn not_oblivious_detected() {
        let (mut p, _) = build(FunctionSpec::And, 2);
        let k = p.edges.iter().position(|e| p.node(e.src).level == 0).unwrap();
        let src = p.edges[k].src;
        for e in p.edges.iter_mut().filter(|e| e.src == src) {
            e.var = 2;
        }
        assert!(matches!(read_schedule(&p), Err(VerifyError::NotOblivious { level: 0, .. })));
        assert!(!verify_read_schedule(&p).unwrap().pass);
    }

    #[test]
    fn merged_accepts_break_disjointness() {
        // Point every edge into accept 2 at accept 1 instead.
        let (mut p, f) = build(FunctionSpec::Or, 2);
        let (a1, a2) = (p.accepts[0], p.accepts[1]);
        for e in p.edges.iter_mut().filter(|e| e.dst == a2) {
            e.dst = a1;
        }
        let x = vec![true, true];
        assert!(f.evaluate(&x).unwrap());
        let r = verify_disjoint_paths(&p, &x).unwrap();
        assert!(!r.pass);
        assert!(!verify_bijections(&p).pass);
    }

    #[test]
    fn semantics_requires_unpruned() {
        let f = named_function(&FunctionSpec::Xor, 2).unwrap();
        let p = build_amortized(&f, &BuildOptions { prune: true, ..Default::default() }).unwrap();
        assert_eq!(verify_node_semantics(&p, &f), Err(VerifyError::RequiresUnpruned));
        assert_eq!(eval_all_fast(&p, &[true, true]), Err(VerifyError::RequiresUnpruned));
    }

    #[test]
    fn fast_evaluation_is_a_permutation_of_indices() {
        let (p, f) = build(FunctionSpec::Maj, 3);
        for (xi, x) in all_inputs(3) {
            let out = eval_all_fast(&p, &x).unwrap();
            let mut idx: Vec<usize> = out.iter().map(|o| o.index().unwrap()).collect();
            idx.sort_unstable();
            assert_eq!(idx, (1..=p.m).collect::<Vec<_>>());
            assert!(out.iter().all(|o| matches!(o, SinkOutcome::Accept(_)) == f.get(xi)));
        }
    }

    #[test]
    fn traffic_levels_carry_m_paths() {
        let (p, f) = build(FunctionSpec::Random(2), 2);
        let r = verify_traffic(&p, &f).unwrap();
        assert!(r.pass, "{r:?}");
        let t = vertex_traffic(&p, &yes_inputs(&f)).unwrap();
        assert_eq!(t.s_emp, Ratio::from_integer(28));
        for level in 0..=4 {
            assert_eq!(t.level_visits[level], Ratio::from_integer(p.m as u64));
        }
    }

    #[test]
    fn mutation_is_caught() {
        let (p, f) = build(FunctionSpec::Xor, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (mutated, _, _) = redirect_random_edge(&p, &mut rng).unwrap();
        assert!(!verify_bijections(&mutated).pass);
        let _ = f;
    }

    #[test]
    fn report_json_shape() {
        let (p, f) = build(FunctionSpec::Xor, 1);
        let r = verify_m_copies(&p, &f).unwrap();
        assert!(r.pass && r.witness.is_none());
        assert_eq!(r.counts.paths_checked, 4);
    }
}
