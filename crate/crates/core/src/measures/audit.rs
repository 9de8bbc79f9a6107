use std::fmt;

use num::{BigInt, BigRational, One, Zero};
use serde::{Serialize, Serializer};

use super::{MeasureError, MeasureTable, DEFAULT_AUDIT_MAX_N};
use crate::program::{Evaluator, Program};
use crate::truthtable::{input_from_index, FuncId, TruthTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Axiom {
    /// `μ(x_i) = μ(¬x_i) = 1`
    Literal,
    /// `μ(f) >= 0`
    Nonnegative,
    /// `μ(f ∧ x_i) + μ(f ∧ ¬x_i) <= μ(f) + 2`
    Restriction,
    /// `μ(f ∨ g) <= μ(f) + μ(g)`
    OrSubadditive,
    /// `μ(f ∨ g) + μ(f ∧ g) <= μ(f) + μ(g)`
    Submodular,
}

fn rational_string<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// A concrete failure: evaluating the axiom at the witness gives
/// `lhs > rhs`. For the literal axiom `lhs`/`rhs` are `μ(lit)` and 1 in
/// whichever order makes the inequality strict.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct AxiomViolation {
    pub axiom: Axiom,
    pub f: FuncId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<FuncId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub var: Option<u32>,
    #[serde(serialize_with = "rational_string")]
    pub lhs: BigRational,
    #[serde(serialize_with = "rational_string")]
    pub rhs: BigRational,
}

impl fmt::Display for AxiomViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: f={}", self.axiom, self.f)?;
        if let Some(g) = self.g {
            write!(f, " g={g}")?;
        }
        if let Some(v) = self.var {
            write!(f, " i={v}")?;
        }
        write!(f, " lhs={} > rhs={}", self.lhs, self.rhs)
    }
}

fn two() -> BigRational {
    BigRational::from_integer(BigInt::from(2))
}

fn table(n: u32, id: FuncId) -> TruthTable {
    TruthTable::from_bits(n, id.0).expect("id in range")
}

/// Both sides of an axiom instance, recomputed from scratch.
fn sides(
    mu: &MeasureTable,
    axiom: Axiom,
    f: FuncId,
    g: Option<FuncId>,
    var: Option<u32>,
) -> (BigRational, BigRational) {
    let n = mu.n();
    let ft = table(n, f);
    match axiom {
        Axiom::Literal => (mu.get(f).clone(), BigRational::one()),
        Axiom::Nonnegative => (BigRational::zero(), mu.get(f).clone()),
        Axiom::Restriction => {
            let lit = TruthTable::literal(n, var.expect("restriction witness has a variable"));
            let lhs = mu.of(&ft.and(&lit).unwrap()) + mu.of(&ft.and(&lit.not()).unwrap());
            (lhs, mu.get(f) + two())
        }
        Axiom::OrSubadditive => {
            let gt = table(n, g.expect("pair witness"));
            (mu.of(&ft.or(&gt).unwrap()).clone(), mu.get(f) + mu.of(&gt))
        }
        Axiom::Submodular => {
            let gt = table(n, g.expect("pair witness"));
            (mu.of(&ft.or(&gt).unwrap()) + mu.of(&ft.and(&gt).unwrap()), mu.get(f) + mu.of(&gt))
        }
    }
}

impl AxiomViolation {
    /// Recomputes the axiom at the witness; true iff it still fails.
    pub fn reverify(&self, mu: &MeasureTable) -> bool {
        let (lhs, rhs) = sides(mu, self.axiom, self.f, self.g, self.var);
        if self.axiom == Axiom::Literal {
            return lhs != rhs && {
                let (hi, lo) = if lhs > rhs { (lhs, rhs) } else { (rhs, lhs) };
                hi == self.lhs && lo == self.rhs
            };
        }
        lhs > rhs && lhs == self.lhs && rhs == self.rhs
    }
}

fn check_size(mu: &MeasureTable, allow_long: bool) -> Result<(), MeasureError> {
    mu.check_complete()?;
    if mu.n() > DEFAULT_AUDIT_MAX_N && !allow_long {
        return Err(MeasureError::LongRunRequired(mu.n()));
    }
    Ok(())
}

fn literal_and_sign(mu: &MeasureTable, out: &mut Vec<AxiomViolation>) {
    let n = mu.n();
    for i in 1..=n {
        let lit = TruthTable::literal(n, i);
        for id in [lit.id(), lit.not().id()] {
            let v = mu.get(id);
            if !v.is_one() {
                let (lhs, rhs) = if *v > BigRational::one() {
                    (v.clone(), BigRational::one())
                } else {
                    (BigRational::one(), v.clone())
                };
                out.push(AxiomViolation { axiom: Axiom::Literal, f: id, g: None, var: Some(i), lhs, rhs });
            }
        }
    }
    for (id, v) in mu.values().iter().enumerate() {
        if *v < BigRational::zero() {
            out.push(AxiomViolation {
                axiom: Axiom::Nonnegative,
                f: FuncId(id as u64),
                g: None,
                var: None,
                lhs: BigRational::zero(),
                rhs: v.clone(),
            });
        }
    }
}

/// Scans all unordered pairs `f <= g` with the given two-sided check.
fn pairs(mu: &MeasureTable, axiom: Axiom, out: &mut Vec<AxiomViolation>) {
    let count = mu.values().len() as u64;
    for a in 0..count {
        for b in a..count {
            let (f, g) = (FuncId(a), FuncId(b));
            let (lhs, rhs) = sides(mu, axiom, f, Some(g), None);
            if lhs > rhs {
                out.push(AxiomViolation { axiom, f, g: Some(g), var: None, lhs, rhs });
            }
        }
    }
}

/// All violations of the four branching-measure axioms, sorted. Axiom 4 is
/// checked over every pair of functions, axiom 3 over every `(f, i)`.
pub fn audit_branching(mu: &MeasureTable, allow_long: bool) -> Result<Vec<AxiomViolation>, MeasureError> {
    check_size(mu, allow_long)?;
    let mut out = Vec::new();
    literal_and_sign(mu, &mut out);
    for a in 0..mu.values().len() as u64 {
        for i in 1..=mu.n() {
            let (lhs, rhs) = sides(mu, Axiom::Restriction, FuncId(a), None, Some(i));
            if lhs > rhs {
                out.push(AxiomViolation { axiom: Axiom::Restriction, f: FuncId(a), g: None, var: Some(i), lhs, rhs });
            }
        }
    }
    pairs(mu, Axiom::OrSubadditive, &mut out);
    out.sort();
    Ok(out)
}

/// All violations of the submodular-measure axioms, sorted.
pub fn audit_submodular(mu: &MeasureTable, allow_long: bool) -> Result<Vec<AxiomViolation>, MeasureError> {
    check_size(mu, allow_long)?;
    let mut out = Vec::new();
    literal_and_sign(mu, &mut out);
    pairs(mu, Axiom::Submodular, &mut out);
    out.sort();
    Ok(out)
}

/// The node-count inequality on a concrete program:
/// `(Σ_end μ(f_t) − Σ_start μ(f_s)) / 2 <= #non-end nodes`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AccountingReport {
    #[serde(serialize_with = "rational_string")]
    pub end_sum: BigRational,
    #[serde(serialize_with = "rational_string")]
    pub start_sum: BigRational,
    #[serde(serialize_with = "rational_string")]
    pub lhs: BigRational,
    pub non_end_nodes: u64,
    pub end_nodes: u64,
    /// `m (μ(f) + μ(¬f) − μ(1)) / 2`, which `lhs` equals on a correct program.
    #[serde(serialize_with = "rational_string")]
    pub closed_form: BigRational,
    pub pass: bool,
}

/// Computes every start's and end node's reachability function `f_v` by
/// walking all inputs, then evaluates both sides exactly. A failing
/// inequality is reported, not raised.
pub fn accounting_check(
    program: &Program,
    mu: &MeasureTable,
    f: &TruthTable,
) -> Result<AccountingReport, MeasureError> {
    if !program.pruned {
        return Err(MeasureError::RequiresPruned);
    }
    mu.check_complete()?;
    if mu.n() != program.n || f.arity() != program.n {
        return Err(MeasureError::ArityMismatch { measure: mu.n(), program: program.n });
    }
    let eval = Evaluator::new(program)?;
    let n = program.n;
    let len = program.nodes.len();
    let mut fv = vec![0u64; len];
    for xi in 0..1usize << n {
        let x = input_from_index(xi, n);
        for &start in &program.starts {
            let mut node = start;
            fv[node.index()] |= 1 << xi;
            while let Some(next) = eval.step(node, &x) {
                node = next;
                fv[node.index()] |= 1 << xi;
            }
        }
    }
    let mut has_out = vec![false; len];
    for e in &program.edges {
        has_out[e.src.index()] = true;
    }
    let mu_of = |bits: u64| mu.of(&TruthTable::from_bits(n, bits).expect("reachability table")).clone();
    let end_nodes: Vec<usize> = (0..len).filter(|&i| !has_out[i]).collect();
    let end_sum: BigRational = end_nodes.iter().map(|&i| mu_of(fv[i])).sum();
    let start_sum: BigRational = program.starts.iter().map(|s| mu_of(fv[s.index()])).sum();
    let lhs = (&end_sum - &start_sum) / two();
    let non_end = (len - end_nodes.len()) as u64;
    let m = BigRational::from_integer(BigInt::from(program.m));
    let closed_form = m * (mu.of(f) + mu.of(&f.not()) - mu.of(&TruthTable::constant(n, true))) / two();
    let pass = lhs <= BigRational::from_integer(BigInt::from(non_end));
    Ok(AccountingReport {
        end_sum,
        start_sum,
        lhs,
        non_end_nodes: non_end,
        end_nodes: end_nodes.len() as u64,
        closed_form,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CeilingReport {
    #[serde(serialize_with = "rational_string")]
    pub max: BigRational,
    pub bound: u64,
    /// `2 (non-end nodes per copy) + μ(1)`.
    #[serde(serialize_with = "rational_string")]
    pub construction_bound: BigRational,
    pub pass: bool,
    pub within_construction_bound: bool,
}

/// `max_f μ(f) <= 130 n` for a measure that passes [`audit_branching`].
/// `non_end_per_copy` is the non-end node count per copy of a construction
/// on `n` variables, used for the sharper bound.
pub fn ceiling_check(
    mu: &MeasureTable,
    non_end_per_copy: &BigRational,
    allow_long: bool,
) -> Result<CeilingReport, MeasureError> {
    let violations = audit_branching(mu, allow_long)?;
    if !violations.is_empty() {
        return Err(MeasureError::AuditNotPassed(violations.len()));
    }
    let max = mu.max();
    let bound = 130 * mu.n() as u64;
    let construction_bound = two() * non_end_per_copy + mu.of(&TruthTable::constant(mu.n(), true));
    Ok(CeilingReport {
        pass: max <= BigRational::from_integer(BigInt::from(bound)),
        within_construction_bound: max <= construction_bound,
        max,
        bound,
        construction_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{build_amortized, BuildOptions};
    use crate::truthtable::{named_function, FunctionSpec};

    fn int(v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }

    #[test]
    fn constant_one_passes_both() {
        for n in 1..=3 {
            let mu = MeasureTable::constant(n, int(1)).unwrap();
            assert!(audit_branching(&mu, false).unwrap().is_empty());
            assert!(audit_submodular(&mu, false).unwrap().is_empty());
        }
    }

    #[test]
    fn dependency_count_violates_submodularity() {
        let mu = MeasureTable::dependency_count(2).unwrap();
        let vs = audit_submodular(&mu, false).unwrap();
        let x1 = TruthTable::literal(2, 1).id();
        let x2 = TruthTable::literal(2, 2).id();
        let (f, g) = if x1 < x2 { (x1, x2) } else { (x2, x1) };
        let w = vs.iter().find(|v| v.f == f && v.g == Some(g)).expect("x1, x2 witness");
        assert_eq!((w.lhs.clone(), w.rhs.clone()), (int(4), int(2)));
        assert!(vs.iter().all(|v| v.reverify(&mu)));
        let bs = audit_branching(&mu, false).unwrap();
        assert!(!bs.is_empty());
        assert!(bs.iter().all(|v| v.reverify(&mu)));
        assert!(bs.iter().all(|v| v.axiom == Axiom::Restriction));
    }

    #[test]
    fn negative_entry_violates_nonnegativity() {
        let mut mu = MeasureTable::constant(2, int(1)).unwrap();
        mu.set(FuncId(0), int(-1));
        let vs = audit_branching(&mu, false).unwrap();
        assert!(vs.iter().any(|v| v.axiom == Axiom::Nonnegative && v.f == FuncId(0)));
        assert!(vs.iter().all(|v| v.reverify(&mu)));
    }

    #[test]
    fn literal_violation_sides() {
        let mut mu = MeasureTable::constant(1, int(1)).unwrap();
        let lit = TruthTable::literal(1, 1).id();
        mu.set(lit, int(3));
        let vs = audit_branching(&mu, false).unwrap();
        let v = vs.iter().find(|v| v.axiom == Axiom::Literal).unwrap();
        assert_eq!((v.lhs.clone(), v.rhs.clone()), (int(3), int(1)));
        assert!(v.reverify(&mu));
    }

    #[test]
    fn long_run_gate() {
        let mu = MeasureTable::constant(4, int(1)).unwrap();
        assert_eq!(audit_branching(&mu, false), Err(MeasureError::LongRunRequired(4)));
    }

    #[test]
    fn accounting_on_pruned_build() {
        let f = named_function(&FunctionSpec::Xor, 2).unwrap();
        let full = build_amortized(&f, &BuildOptions::default()).unwrap();
        let mu = MeasureTable::constant(2, int(1)).unwrap();
        assert_eq!(accounting_check(&full, &mu, &f), Err(MeasureError::RequiresPruned));
        let p = build_amortized(&f, &BuildOptions { prune: true, ..Default::default() }).unwrap();
        let rep = accounting_check(&p, &mu, &f).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.lhs, int(p.m as i64) / int(2));
        assert_eq!(rep.lhs, rep.closed_form);
        assert_eq!(rep.end_nodes, 2 * p.m as u64);
    }

    #[test]
    fn accounting_can_fail_for_non_measures() {
        let f = named_function(&FunctionSpec::Xor, 2).unwrap();
        let p = build_amortized(&f, &BuildOptions { prune: true, ..Default::default() }).unwrap();
        let mut mu = MeasureTable::constant(2, int(1)).unwrap();
        mu.set(f.id(), int(1000));
        let rep = accounting_check(&p, &mu, &f).unwrap();
        assert!(!rep.pass);
    }

    #[test]
    fn ceiling() {
        let mu = MeasureTable::constant(2, int(1)).unwrap();
        let rep = ceiling_check(&mu, &int(24), false).unwrap();
        assert!(rep.pass && rep.within_construction_bound);
        assert_eq!(rep.bound, 260);
        assert_eq!(rep.max, int(1));
        assert_eq!(rep.construction_bound, int(49));
        let dep = MeasureTable::dependency_count(2).unwrap();
        assert!(matches!(ceiling_check(&dep, &int(24), false), Err(MeasureError::AuditNotPassed(_))));
    }
}
