//! Criterion benchmarks for construction and verification; see `benches/`.

use ambp_core::{build_amortized, BuildOptions, FunctionSpec, Program, TruthTable};

/// Unpruned build of a named function, for benchmark setup.
pub fn fixture(spec: &FunctionSpec, n: u32) -> (Program, TruthTable) {
    let f = spec.table(n).expect("valid spec");
    let program = build_amortized(&f, &BuildOptions::default()).expect("buildable");
    (program, f)
}
