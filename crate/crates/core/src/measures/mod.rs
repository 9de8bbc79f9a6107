//! Complexity measures on the lattice of all `n`-variable functions, stored
//! as exact rationals and audited against the branching and submodular
//! measure axioms.

mod audit;

use std::fmt::Write as _;

use num::{BigInt, BigRational, One, Signed, Zero};
use thiserror::Error;

use crate::program::ProgramError;
use crate::truthtable::{FuncId, TruthTable};

pub use audit::{
    accounting_check, audit_branching, audit_submodular, ceiling_check, AccountingReport, Axiom, AxiomViolation,
    CeilingReport,
};

/// Largest `n` a measure table may have (`2^16` entries).
pub const MAX_MEASURE_N: u32 = 4;
/// Largest `n` for the pairwise scans without the long-run flag.
pub const DEFAULT_AUDIT_MAX_N: u32 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MeasureError {
    #[error("line {line}: {msg}")]
    ParseError { line: usize, msg: String },
    #[error("expected {expected} values for n = {n}, got {got}")]
    WrongCount { n: u32, expected: usize, got: usize },
    #[error("line {line}: negative value {value}")]
    NegativeValue { line: usize, value: String },
    #[error("measure table has {got} entries, needs {expected}")]
    IncompleteTable { expected: usize, got: usize },
    #[error("accounting needs a pruned program")]
    RequiresPruned,
    #[error("measure fails the branching axioms ({0} violations)")]
    AuditNotPassed(usize),
    #[error("pairwise audit at n = {0} needs the long-run flag")]
    LongRunRequired(u32),
    #[error("measure is on {measure} variables, program on {program}")]
    ArityMismatch { measure: u32, program: u32 },
    #[error("unsupported measure arity {0} (maximum {MAX_MEASURE_N})")]
    UnsupportedArity(u32),
    #[error(transparent)]
    Program(#[from] ProgramError),
}

/// A value for every function on `n` variables, indexed by [`FuncId`].
///
/// Values may be negative when built programmatically so the nonnegativity
/// axiom can be audited; files with negative values are rejected on load.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasureTable {
    n: u32,
    values: Vec<BigRational>,
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

impl MeasureTable {
    pub fn from_values(n: u32, values: Vec<BigRational>) -> Result<Self, MeasureError> {
        if n > MAX_MEASURE_N {
            return Err(MeasureError::UnsupportedArity(n));
        }
        let expected = FuncId::count(n) as usize;
        if values.len() != expected {
            return Err(MeasureError::IncompleteTable { expected, got: values.len() });
        }
        Ok(Self { n, values })
    }

    pub fn from_fn(n: u32, mut f: impl FnMut(&TruthTable) -> BigRational) -> Result<Self, MeasureError> {
        if n > MAX_MEASURE_N {
            return Err(MeasureError::UnsupportedArity(n));
        }
        let values = (0..FuncId::count(n)).map(|id| f(&TruthTable::from_bits(n, id).unwrap())).collect();
        Ok(Self { n, values })
    }

    /// `μ ≡ value` everywhere except the literals, which are 1.
    pub fn constant(n: u32, value: BigRational) -> Result<Self, MeasureError> {
        let literals = literal_ids(n);
        Self::from_fn(n, |f| if literals.contains(&f.id()) { BigRational::one() } else { value.clone() })
    }

    /// `μ(f)` = number of variables `f` depends on.
    pub fn dependency_count(n: u32) -> Result<Self, MeasureError> {
        Self::from_fn(n, |f| int(f.dependency_count() as i64))
    }

    /// `μ(f) = φ(|f^{-1}(1)|)`; submodular whenever `φ` is concave.
    pub fn cardinality(n: u32, phi: impl Fn(u32) -> BigRational) -> Result<Self, MeasureError> {
        Self::from_fn(n, |f| phi(f.count_ones()))
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    pub fn get(&self, f: FuncId) -> &BigRational {
        &self.values[f.0 as usize]
    }

    pub fn of(&self, f: &TruthTable) -> &BigRational {
        self.get(f.id())
    }

    pub fn set(&mut self, f: FuncId, value: BigRational) {
        self.values[f.0 as usize] = value;
    }

    pub fn max(&self) -> BigRational {
        self.values.iter().max().cloned().unwrap_or_else(BigRational::zero)
    }

    pub(crate) fn check_complete(&self) -> Result<(), MeasureError> {
        let expected = FuncId::count(self.n) as usize;
        if self.values.len() != expected {
            return Err(MeasureError::IncompleteTable { expected, got: self.values.len() });
        }
        Ok(())
    }
}

/// Ids of `x_i` and `¬x_i` for every `i`.
pub fn literal_ids(n: u32) -> Vec<FuncId> {
    (1..=n)
        .flat_map(|i| {
            let lit = TruthTable::literal(n, i);
            [lit.id(), lit.not().id()]
        })
        .collect()
}

/// Parses `p/q`, an integer, or a decimal such as `-1.25`.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        return (!q.is_zero()).then(|| BigRational::new(p, q));
    }
    let (neg, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let numer: BigInt = format!("{whole}{frac}").parse().ok()?;
    let denom = num::pow(BigInt::from(10), frac.len());
    let value = BigRational::new(numer, denom);
    Some(if neg { -value } else { value })
}

/// Parses a `MEASURE v1` file. All `2^(2^n)` ids must appear exactly once.
pub fn load_measure(text: &str) -> Result<MeasureTable, MeasureError> {
    let err = |line: usize, msg: String| MeasureError::ParseError { line, msg };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let (ln, header) = lines.next().ok_or_else(|| err(1, "empty input".into()))?;
    let n: u32 = header
        .strip_prefix("MEASURE v1 n ")
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| err(ln, format!("bad header {header:?}, expected \"MEASURE v1 n <n>\"")))?;
    if n > MAX_MEASURE_N {
        return Err(MeasureError::UnsupportedArity(n));
    }
    let expected = FuncId::count(n) as usize;
    let mut values: Vec<Option<BigRational>> = vec![None; expected];
    let mut got = 0usize;
    for (ln, line) in lines {
        let mut parts = line.split_whitespace();
        let (Some(id), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(err(ln, "expected \"<funcid-hex> <value>\"".into()));
        };
        let id = u64::from_str_radix(id, 16).map_err(|_| err(ln, format!("bad function id {id:?}")))?;
        let parsed = parse_rational(value).ok_or_else(|| err(ln, format!("bad value {value:?}")))?;
        if parsed.is_negative() {
            return Err(MeasureError::NegativeValue { line: ln, value: value.to_string() });
        }
        got += 1;
        let slot = values
            .get_mut(id as usize)
            .ok_or_else(|| err(ln, format!("function id {id:x} out of range for n = {n}")))?;
        if slot.replace(parsed).is_some() {
            return Err(err(ln, format!("duplicate function id {id:x}")));
        }
    }
    if got != expected {
        return Err(MeasureError::WrongCount { n, expected, got });
    }
    Ok(MeasureTable { n, values: values.into_iter().map(Option::unwrap).collect() })
}

pub fn store_measure(table: &MeasureTable) -> String {
    let mut out = format!("MEASURE v1 n {}\n", table.n);
    for (id, v) in table.values.iter().enumerate() {
        let _ = writeln!(out, "{id:x} {v}");
    }
    out
}
