//! `ambp`: build, verify, inspect and export multi-copy branching programs.
//!
//! Exit codes: 0 pass, 1 verification failure, 2 usage or parse error,
//! 3 refused by the memory guard.

mod demo;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use ambp_core::construction::{non_end_per_copy, DEFAULT_MEMORY_LIMIT};
use ambp_core::measures::{
    accounting_check, audit_branching, audit_submodular, ceiling_check, load_measure, AccountingReport, AxiomViolation,
    CeilingReport,
};
use ambp_core::program::size_warning;
use ambp_core::truthtable::parse_input;
use ambp_core::verification::{read_schedule, run_checks, Check};
use ambp_core::{
    build_amortized, deserialize, disjoint_union, export_dot, serialize, size_report, BuildOptions, ConstructionError,
    DotOptions, FunctionSpec, Program, Segment,
};

#[derive(Debug, Parser)]
#[command(name = "ambp", version, about = "Branching programs computing many copies of one Boolean function")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the construction for an n-variable function and print its size report.
    Build {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        function: FunctionSpec,
        /// Drop nodes no start reaches on any input.
        #[arg(long)]
        prune: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MEMORY_LIMIT)]
        memory_limit: u64,
        /// Permit n = 5 if the memory limit allows it.
        #[arg(long)]
        allow_large: bool,
    },
    /// Check a program file against a function.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        function: FunctionSpec,
        /// `all` or a comma-separated list of: structure, copies, disjoint,
        /// semantics, schedule, traffic, bijection, fast.
        #[arg(long, default_value = "all")]
        checks: String,
        #[arg(long)]
        json: bool,
        /// Seed for the random spot checks of `fast`.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print size, level histogram and read schedule of a program file.
    Stats {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Follow copy `start` of a program on one input.
    Eval {
        #[arg(long = "in")]
        input: PathBuf,
        /// 1-based copy index.
        #[arg(long)]
        start: usize,
        /// Input bits `x_1 x_2 ... x_n`, e.g. `101`.
        #[arg(long = "x")]
        x: String,
        /// Print every visited node.
        #[arg(long)]
        trace: bool,
    },
    /// Write a Graphviz rendering of a program file.
    ExportDot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Restrict to these segments (fwd1, fwd2, reva, revb).
        #[arg(long = "segment", value_parser = parse_segment)]
        segments: Vec<Segment>,
        /// Restrict to an inclusive level range `lo..hi`.
        #[arg(long, value_parser = parse_levels)]
        levels: Option<(u32, u32)>,
        #[arg(long)]
        title: Option<String>,
    },
    /// Disjoint union of two program files on the same variables.
    Union {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Audit a measure file against the measure axioms.
    AuditMeasure {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, value_enum, default_value_t = Kind::Both)]
        kind: Kind,
        /// Pruned program file for the node-count inequality.
        #[arg(long, requires = "function")]
        bp: Option<PathBuf>,
        #[arg(long)]
        function: Option<FunctionSpec>,
        /// Allow the pairwise scan at n = 4.
        #[arg(long)]
        allow_long: bool,
        #[arg(long)]
        json: bool,
    },
    /// Small worked example: level tables, traced paths and DOT files.
    Demo {
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, default_value = "xor")]
        function: FunctionSpec,
        /// Input used for the traces; all ones when omitted.
        #[arg(long = "x")]
        x: Option<String>,
        #[arg(long, default_value = "demo")]
        out_dir: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Branching,
    Submodular,
    Both,
}

fn parse_segment(s: &str) -> Result<Segment, String> {
    Segment::from_name(&s.to_ascii_uppercase()).ok_or_else(|| format!("unknown segment {s:?}"))
}

fn parse_levels(s: &str) -> Result<(u32, u32), String> {
    let (lo, hi) = s.split_once("..").ok_or_else(|| format!("expected lo..hi, got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<u32>().map_err(|e| format!("{v:?}: {e}"));
    let (lo, hi) = (parse(lo)?, parse(hi)?);
    if lo > hi {
        return Err(format!("empty level range {s:?}"));
    }
    Ok((lo, hi))
}

const PASS: u8 = 0;
const FAIL: u8 = 1;
const USAGE: u8 = 2;
const GUARD: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let guard = matches!(e.downcast_ref(), Some(ConstructionError::MemoryGuardExceeded { .. }));
            ExitCode::from(if guard { GUARD } else { USAGE })
        }
    }
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Build { n, function, prune, out, memory_limit, allow_large } => {
            let f = function.table(n)?;
            let program = build_amortized(&f, &BuildOptions { prune, memory_limit, allow_large })?;
            if let Some(path) = out {
                write(&path, &serialize(&program))?;
            }
            let report = size_report(&program);
            print_json(&report)?;
            Ok(if report.bounds_hold() { PASS } else { FAIL })
        }
        Command::Verify { input, function, checks, json, seed } => {
            let program = load(&input)?;
            let f = function.table(program.n)?;
            let checks = select_checks(&checks, &program)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let reports = run_checks(&program, &f, &checks, &mut rng)?;
            if json {
                print_json(&reports)?;
            } else {
                for r in &reports {
                    let status = if r.pass { "pass" } else { "FAIL" };
                    println!(
                        "{status} {} ({} paths, {} nodes, {} ms)",
                        r.check, r.counts.paths_checked, r.counts.nodes_checked, r.millis
                    );
                    if let Some(w) = &r.witness {
                        println!("  witness: {}", serde_json::to_string(w)?);
                    }
                }
            }
            Ok(if reports.iter().all(|r| r.pass) { PASS } else { FAIL })
        }
        Command::Stats { input, json } => {
            let program = load(&input)?;
            let stats = Stats::of(&program)?;
            if json {
                print_json(&stats)?;
            } else {
                stats.print();
            }
            Ok(PASS)
        }
        Command::Eval { input, start, x, trace } => {
            let program = load(&input)?;
            let x = parse_input(&x)?;
            let eval = program.evaluator()?;
            let (outcome, path) = eval.walk_trace(start, &x)?;
            if trace {
                for id in &path {
                    println!("{id} {}", program.node(*id));
                }
            }
            println!("{outcome}");
            Ok(PASS)
        }
        Command::ExportDot { input, out, segments, levels, title } => {
            let program = load(&input)?;
            if let Some(w) = size_warning(&program) {
                eprintln!("{w}");
            }
            let options = DotOptions { title, segments: (!segments.is_empty()).then_some(segments), levels };
            let dot = export_dot(&program, &options);
            match out {
                Some(path) => write(&path, &dot)?,
                None => print!("{dot}"),
            }
            Ok(PASS)
        }
        Command::Union { a, b, out } => {
            let union = disjoint_union(&load(&a)?, &load(&b)?)?;
            if let Some(path) = out {
                write(&path, &serialize(&union))?;
            }
            print_json(&serde_json::json!({ "n": union.n, "m": union.m, "total_nodes": union.size() }))?;
            Ok(PASS)
        }
        Command::AuditMeasure { measure, kind, bp, function, allow_long, json } => {
            let text = fs::read_to_string(&measure).with_context(|| format!("reading {}", measure.display()))?;
            let mu = load_measure(&text).with_context(|| format!("parsing {}", measure.display()))?;
            let mut audit = Audit::default();
            if kind != Kind::Submodular {
                audit.branching = Some(audit_branching(&mu, allow_long)?);
            }
            if kind != Kind::Branching {
                audit.submodular = Some(audit_submodular(&mu, allow_long)?);
            }
            if audit.branching.as_ref().is_some_and(Vec::is_empty) {
                let per_copy = num::BigRational::from_integer(non_end_per_copy(mu.n()).into());
                audit.ceiling = Some(ceiling_check(&mu, &per_copy, allow_long)?);
            }
            if let (Some(path), Some(spec)) = (bp, function) {
                let program = load(&path)?;
                let f = spec.table(program.n)?;
                audit.accounting = Some(accounting_check(&program, &mu, &f)?);
            }
            if json {
                print_json(&audit)?;
            } else {
                audit.print();
            }
            Ok(if audit.pass() { PASS } else { FAIL })
        }
        Command::Demo { n, function, x, out_dir } => {
            if !(1..=2).contains(&n) {
                bail!("demo supports n = 1 or n = 2, got {n}");
            }
            let f = function.table(n)?;
            let x = match x {
                Some(x) => parse_input(&x)?,
                None => vec![true; n as usize],
            };
            demo::run(&f, &x, &out_dir)?;
            Ok(PASS)
        }
    }
}

fn select_checks(spec: &str, program: &Program) -> Result<Vec<Check>> {
    if spec == "all" {
        return Ok(Check::ALL.into_iter().filter(|c| !(program.pruned && c.needs_layout())).collect());
    }
    let mut out = Vec::new();
    for name in spec.split(',').map(str::trim) {
        let check = Check::from_name(name).with_context(|| format!("unknown check {name:?}"))?;
        if program.pruned && check.needs_layout() {
            bail!("check {name} needs an unpruned program");
        }
        out.push(check);
    }
    Ok(out)
}

fn load(path: &Path) -> Result<Program> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    deserialize(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn print_json(value: &impl Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

#[derive(Debug, Serialize)]
struct Stats {
    size: ambp_core::SizeReport,
    read_schedule: Option<Vec<u32>>,
}

impl Stats {
    fn of(program: &Program) -> Result<Self> {
        Ok(Self { size: size_report(program), read_schedule: read_schedule(program).ok().map(|s| s.vars) })
    }

    fn print(&self) {
        let s = &self.size;
        println!("n {}  m {}  pruned {}", s.n, s.m, s.pruned);
        println!("nodes {}  edges {}  per copy {}", s.total_nodes, s.total_edges, s.per_copy);
        println!("bound 32nW = {}  holds {}", s.bound_total, s.within_total_bound);
        println!("bound 64n = {}  holds {}", s.bound_per_copy, s.within_per_copy_bound);
        println!("dead sinks {}  unreachable roots {}", s.dead_sink_count, s.unreachable_root_count);
        println!("level  nodes");
        for (level, count) in s.per_level_histogram.iter().enumerate() {
            println!("{level:>5}  {count}");
        }
        if let Some(vars) = &self.read_schedule {
            let names: Vec<String> = vars.iter().map(|v| format!("x{v}")).collect();
            println!("reads {}", names.join(" "));
        }
    }
}

#[derive(Debug, Default, Serialize)]
struct Audit {
    #[serde(skip_serializing_if = "Option::is_none")]
    branching: Option<Vec<AxiomViolation>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    submodular: Option<Vec<AxiomViolation>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ceiling: Option<CeilingReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    accounting: Option<AccountingReport>,
}

impl Audit {
    fn pass(&self) -> bool {
        self.branching.as_ref().is_none_or(Vec::is_empty)
            && self.submodular.as_ref().is_none_or(Vec::is_empty)
            && self.ceiling.as_ref().is_none_or(|c| c.pass)
            && self.accounting.as_ref().is_none_or(|a| a.pass)
    }

    fn print(&self) {
        for (name, list) in [("branching", &self.branching), ("submodular", &self.submodular)] {
            let Some(list) = list else { continue };
            println!("{name}: {} violations", list.len());
            for v in list.iter().take(10) {
                println!("  {v}");
            }
            if list.len() > 10 {
                println!("  ... {} more", list.len() - 10);
            }
        }
        if let Some(c) = &self.ceiling {
            println!("ceiling: max {} <= {} ({}), construction bound {}", c.max, c.bound, c.pass, c.construction_bound);
        }
        if let Some(a) = &self.accounting {
            println!(
                "accounting: ({} - {}) / 2 = {} <= {} non-end nodes ({})",
                a.end_sum, a.start_sum, a.lhs, a.non_end_nodes, a.pass
            );
        }
    }
}
