use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

use ambp_core::construction::{arity_at, transition_var};
use ambp_core::truthtable::format_input;
use ambp_core::{build_amortized, export_dot, size_report, BuildOptions, DotOptions, FuncId, Segment, TruthTable};

/// Prints the level table, the FWD1 occupancy on `x`, one traced path per
/// start, and writes `fwd1.dot`, `fwd2.dot` and `full.dot` into `out_dir`.
pub fn run(f: &TruthTable, x: &[bool], out_dir: &Path) -> Result<()> {
    let n = f.arity();
    let program = build_amortized(f, &BuildOptions::default())?;
    let report = size_report(&program);
    println!("f = {f} on n = {n} variables, m = {} copies, {} nodes", program.m, report.total_nodes);
    println!();

    println!("segment  level  arity  reads  nodes");
    for segment in [Segment::Fwd1, Segment::Fwd2] {
        for level in 0..=2 * n {
            let count = program.nodes.iter().filter(|r| r.segment == segment && r.level == level).count();
            if count == 0 {
                continue;
            }
            let reads = if level < 2 * n { format!("x{}", transition_var(n, level)) } else { "-".into() };
            println!("{:<7}  {level:>5}  {:>5}  {reads:>5}  {count:>5}", segment.name(), arity_at(n, segment, level));
        }
    }
    println!();

    let eval = program.evaluator()?;
    let mut visited = vec![BTreeSet::new(); n as usize + 1];
    let mut traces = Vec::new();
    for i in 1..=program.m {
        let (outcome, path) = eval.walk_trace(i, x)?;
        for id in &path {
            let r = program.node(*id);
            if r.segment == Segment::Fwd1 {
                visited[r.level as usize].insert(r.func);
            }
        }
        traces.push((i, outcome, path));
    }
    println!("FWD1 occupancy on x = {}: functions g with g(x_1..x_j) = 1", format_input(x));
    for (j, seen) in visited.iter().enumerate() {
        let j = j as u32;
        let predicted: BTreeSet<FuncId> = (0..FuncId::count(j))
            .map(|id| TruthTable::from_bits(j, id).expect("id in range"))
            .filter(|g| g.evaluate(&x[..j as usize]).expect("prefix length"))
            .map(|g| g.id())
            .collect();
        let tables: Vec<String> = seen.iter().map(|id| TruthTable::from_bits(j, id.0).unwrap().to_string()).collect();
        let status = if *seen == predicted { "matches" } else { "DIFFERS" };
        println!("  level {j}: {{{}}} {status}", tables.join(", "));
    }
    println!();

    println!("paths on x = {}:", format_input(x));
    for (i, outcome, path) in &traces {
        let steps: Vec<String> = path.iter().map(|id| program.node(*id).to_string()).collect();
        println!("  start {i} -> {outcome}");
        println!("    {}", steps.join(" "));
    }
    println!();

    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let files = [
        ("fwd1.dot", DotOptions { title: Some("FWD1".into()), segments: Some(vec![Segment::Fwd1]), levels: None }),
        ("fwd2.dot", DotOptions { title: Some("FWD2".into()), segments: Some(vec![Segment::Fwd2]), levels: None }),
        ("full.dot", DotOptions { title: Some("full".into()), ..Default::default() }),
    ];
    for (name, options) in files {
        let path = out_dir.join(name);
        fs::write(&path, export_dot(&program, &options)).with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
