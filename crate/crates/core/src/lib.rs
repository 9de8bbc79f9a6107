//! Branching programs that compute `m = 2^(2^n - 1)` copies of an arbitrary
//! `n`-variable Boolean function with `O(n)` nodes per copy, together with
//! exhaustive checkers for every structural and semantic property of the
//! construction and an auditor for complexity measures on functions.

pub mod construction;
pub mod measures;
pub mod program;
pub mod truthtable;
pub mod verification;

pub use construction::{build_amortized, size_report, BuildOptions, ConstructionError, SizeReport};
pub use measures::{MeasureError, MeasureTable};
pub use program::{
    deserialize, disjoint_union, export_dot, serialize, walk, DotOptions, Edge, Evaluator, NodeId, NodeRef, Program,
    ProgramError, Segment, SinkOutcome,
};
pub use truthtable::{FuncId, FunctionSpec, TableError, TruthTable};
pub use verification::VerificationReport;
