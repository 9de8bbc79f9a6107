//! Explicit truth tables for Boolean functions on a handful of variables.
//!
//! Position `i` of a table on `j` variables holds `f(x)` for
//! `i = x_1 + 2 x_2 + ... + 2^{j-1} x_j`, so `x_1` is the least significant
//! index bit and fixing the highest variable `x_j` selects a contiguous half.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Largest arity a [`TruthTable`] can hold (64 bits of storage).
pub const MAX_ARITY: u32 = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("expected {expected} characters for arity {arity}, got {got}")]
    LengthMismatch { arity: u32, expected: usize, got: usize },
    #[error("bad character {ch:?} at position {pos}; only '0' and '1' are allowed")]
    BadCharacter { pos: usize, ch: char },
    #[error("arity mismatch: {left} vs {right}")]
    ArityMismatch { left: u32, right: u32 },
    #[error("cannot restrict a table of arity 0")]
    ArityZero,
    #[error("unsupported arity {0} (maximum {MAX_ARITY})")]
    UnsupportedArity(u32),
    #[error("function id {id} out of range for arity {arity}")]
    IdOutOfRange { arity: u32, id: u64 },
    #[error("unknown function name {0:?}")]
    UnknownName(String),
    #[error("majority is only defined for an odd number of variables, got {0}")]
    EvenMajority(u32),
}

/// Canonical index of a function at a fixed arity: the little-endian integer
/// reading of its truth table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct FuncId(pub u64);

impl FuncId {
    /// Number of distinct functions on `arity` variables, `2^(2^arity)`.
    pub fn count(arity: u32) -> u64 {
        assert!(arity <= 5, "2^(2^{arity}) does not fit in u64");
        1u64 << (1u64 << arity)
    }
}

impl fmt::Display for FuncId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:x}", self.0)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct TruthTable {
    arity: u32,
    bits: u64,
}

fn mask(arity: u32) -> u64 {
    if arity >= MAX_ARITY {
        u64::MAX
    } else {
        (1u64 << (1u32 << arity)) - 1
    }
}

impl TruthTable {
    pub fn from_bits(arity: u32, bits: u64) -> Result<Self, TableError> {
        if arity > MAX_ARITY {
            return Err(TableError::UnsupportedArity(arity));
        }
        if bits & !mask(arity) != 0 {
            return Err(TableError::IdOutOfRange { arity, id: bits });
        }
        Ok(Self { arity, bits })
    }

    /// Inverse of [`TruthTable::id`].
    pub fn from_id(arity: u32, id: FuncId) -> Result<Self, TableError> {
        Self::from_bits(arity, id.0)
    }

    pub fn constant(arity: u32, value: bool) -> Self {
        assert!(arity <= MAX_ARITY);
        Self { arity, bits: if value { mask(arity) } else { 0 } }
    }

    /// The literal `x_var` (1-based) on `arity` variables.
    pub fn literal(arity: u32, var: u32) -> Self {
        assert!((1..=arity).contains(&var) && arity <= MAX_ARITY);
        Self::from_fn(arity, |i| (i >> (var - 1)) & 1 == 1)
    }

    /// Tabulates `f` over input indices `0..2^arity`.
    pub fn from_fn(arity: u32, f: impl Fn(usize) -> bool) -> Self {
        assert!(arity <= MAX_ARITY);
        let bits = (0..1usize << arity).filter(|&i| f(i)).fold(0u64, |acc, i| acc | (1 << i));
        Self { arity, bits }
    }

    pub fn arity(&self) -> u32 {
        self.arity
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        1 << self.arity
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id(&self) -> FuncId {
        FuncId(self.bits)
    }

    /// Value at a packed input index.
    pub fn get(&self, index: usize) -> bool {
        debug_assert!(index < self.len());
        (self.bits >> index) & 1 == 1
    }

    pub fn evaluate(&self, x: &[bool]) -> Result<bool, TableError> {
        if x.len() != self.arity as usize {
            return Err(TableError::ArityMismatch { left: self.arity, right: x.len() as u32 });
        }
        Ok(self.get(input_index(x)))
    }

    /// Fixes the highest variable `x_j` to `b`, keeping the matching half.
    pub fn restrict(&self, b: bool) -> Result<Self, TableError> {
        if self.arity == 0 {
            return Err(TableError::ArityZero);
        }
        let half = 1u32 << (self.arity - 1);
        let shift = if b { half } else { 0 };
        Ok(Self { arity: self.arity - 1, bits: (self.bits >> shift) & mask(self.arity - 1) })
    }

    /// Builds the table on one more variable whose `x_j = 0` half is `low`
    /// and whose `x_j = 1` half is `high`.
    pub fn combine(low: &Self, high: &Self) -> Result<Self, TableError> {
        if low.arity != high.arity {
            return Err(TableError::ArityMismatch { left: low.arity, right: high.arity });
        }
        if low.arity >= MAX_ARITY {
            return Err(TableError::UnsupportedArity(low.arity + 1));
        }
        let half = 1u32 << low.arity;
        Ok(Self { arity: low.arity + 1, bits: low.bits | (high.bits << half) })
    }

    /// `(f ∧ g) ∨ (¬f ∧ ¬g)`: true exactly where the two tables agree.
    pub fn xnor_glue(&self, other: &Self) -> Result<Self, TableError> {
        self.check_same_arity(other)?;
        Ok(Self { arity: self.arity, bits: !(self.bits ^ other.bits) & mask(self.arity) })
    }

    pub fn and(&self, other: &Self) -> Result<Self, TableError> {
        self.check_same_arity(other)?;
        Ok(Self { arity: self.arity, bits: self.bits & other.bits })
    }

    pub fn or(&self, other: &Self) -> Result<Self, TableError> {
        self.check_same_arity(other)?;
        Ok(Self { arity: self.arity, bits: self.bits | other.bits })
    }

    pub fn not(&self) -> Self {
        Self { arity: self.arity, bits: !self.bits & mask(self.arity) }
    }

    pub fn count_ones(&self) -> u32 {
        self.bits.count_ones()
    }

    /// Whether the function changes with `x_var` (1-based).
    pub fn depends_on(&self, var: u32) -> bool {
        assert!((1..=self.arity).contains(&var));
        let step = 1usize << (var - 1);
        (0..self.len()).any(|i| i & step == 0 && self.get(i) != self.get(i | step))
    }

    pub fn dependency_count(&self) -> u32 {
        (1..=self.arity).filter(|&v| self.depends_on(v)).count() as u32
    }

    /// Parses a `'0'`/`'1'` string of length exactly `2^arity`.
    pub fn parse(text: &str, arity: u32) -> Result<Self, TableError> {
        if arity > MAX_ARITY {
            return Err(TableError::UnsupportedArity(arity));
        }
        let expected = 1usize << arity;
        let got = text.chars().count();
        if got != expected {
            return Err(TableError::LengthMismatch { arity, expected, got });
        }
        let mut bits = 0u64;
        for (pos, ch) in text.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => bits |= 1 << pos,
                _ => return Err(TableError::BadCharacter { pos, ch }),
            }
        }
        Ok(Self { arity, bits })
    }

    /// Like [`TruthTable::parse`] but infers the arity from the length.
    pub fn parse_any(text: &str) -> Result<Self, TableError> {
        let len = text.chars().count();
        let arity = len.max(1).trailing_zeros();
        if !len.is_power_of_two() || arity > MAX_ARITY {
            return Err(TableError::LengthMismatch { arity, expected: len.next_power_of_two(), got: len });
        }
        Self::parse(text, arity)
    }

    fn check_same_arity(&self, other: &Self) -> Result<(), TableError> {
        if self.arity != other.arity {
            return Err(TableError::ArityMismatch { left: self.arity, right: other.arity });
        }
        Ok(())
    }
}

/// Packs an assignment `(x_1, ..., x_j)` into a table index.
pub fn input_index(x: &[bool]) -> usize {
    x.iter().enumerate().fold(0, |acc, (k, &b)| acc | ((b as usize) << k))
}

/// Unpacks a table index into `(x_1, ..., x_arity)`.
pub fn input_from_index(index: usize, arity: u32) -> Vec<bool> {
    (0..arity).map(|k| (index >> k) & 1 == 1).collect()
}

/// Parses an assignment written `x_1` first, e.g. `"10"` means `x_1 = 1, x_2 = 0`.
pub fn parse_input(text: &str) -> Result<Vec<bool>, TableError> {
    text.chars()
        .enumerate()
        .map(|(pos, ch)| match ch {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(TableError::BadCharacter { pos, ch }),
        })
        .collect()
}

pub fn format_input(x: &[bool]) -> String {
    x.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

impl fmt::Display for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruthTable({}: {})", self.arity, self)
    }
}

/// A named family of functions, or an explicit table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FunctionSpec {
    And,
    Or,
    Xor,
    Maj,
    Const0,
    Const1,
    Random(u64),
    Table(TruthTable),
}

impl FunctionSpec {
    pub fn table(&self, n: u32) -> Result<TruthTable, TableError> {
        match self {
            FunctionSpec::Table(t) if t.arity() != n => Err(TableError::ArityMismatch { left: t.arity(), right: n }),
            FunctionSpec::Table(t) => Ok(*t),
            _ => named_function(self, n),
        }
    }
}

impl FromStr for FunctionSpec {
    type Err = TableError;

    /// Accepts `and`, `or`, `xor`, `maj`, `const0`, `const1`, `random:<seed>`
    /// (or `random(<seed>)`) and `table:<bits>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(bits) = s.strip_prefix("table:") {
            return TruthTable::parse_any(bits).map(FunctionSpec::Table);
        }
        let seed = s.strip_prefix("random:").or_else(|| s.strip_prefix("random(").and_then(|r| r.strip_suffix(')')));
        if let Some(seed) = seed {
            return seed.parse().map(FunctionSpec::Random).map_err(|_| TableError::UnknownName(s.to_string()));
        }
        match s {
            "and" => Ok(FunctionSpec::And),
            "or" => Ok(FunctionSpec::Or),
            "xor" => Ok(FunctionSpec::Xor),
            "maj" => Ok(FunctionSpec::Maj),
            "const0" => Ok(FunctionSpec::Const0),
            "const1" => Ok(FunctionSpec::Const1),
            _ => Err(TableError::UnknownName(s.to_string())),
        }
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpec::And => f.write_str("and"),
            FunctionSpec::Or => f.write_str("or"),
            FunctionSpec::Xor => f.write_str("xor"),
            FunctionSpec::Maj => f.write_str("maj"),
            FunctionSpec::Const0 => f.write_str("const0"),
            FunctionSpec::Const1 => f.write_str("const1"),
            FunctionSpec::Random(seed) => write!(f, "random:{seed}"),
            FunctionSpec::Table(t) => write!(f, "table:{t}"),
        }
    }
}

/// Canonical table for a named family on `n` variables. `random` tables are
/// a pure function of `(seed, n)`.
pub fn named_function(spec: &FunctionSpec, n: u32) -> Result<TruthTable, TableError> {
    if n > MAX_ARITY {
        return Err(TableError::UnsupportedArity(n));
    }
    let pop = |i: usize| i.count_ones();
    Ok(match spec {
        FunctionSpec::And => TruthTable::from_fn(n, |i| pop(i) == n),
        FunctionSpec::Or => TruthTable::from_fn(n, |i| pop(i) > 0),
        FunctionSpec::Xor => TruthTable::from_fn(n, |i| pop(i) % 2 == 1),
        FunctionSpec::Maj => {
            if n.is_multiple_of(2) {
                return Err(TableError::EvenMajority(n));
            }
            TruthTable::from_fn(n, |i| 2 * pop(i) > n)
        }
        FunctionSpec::Const0 => TruthTable::constant(n, false),
        FunctionSpec::Const1 => TruthTable::constant(n, true),
        FunctionSpec::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ n as u64);
            let raw: u64 = rng.gen();
            TruthTable::from_bits(n, raw & mask(n))?
        }
        FunctionSpec::Table(t) => {
            if t.arity() != n {
                return Err(TableError::ArityMismatch { left: t.arity(), right: n });
            }
            *t
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(s: &str) -> TruthTable {
        TruthTable::parse_any(s).unwrap()
    }

    #[test]
    fn parse_examples() {
        let and = TruthTable::parse("0001", 2).unwrap();
        assert!(and.evaluate(&[true, true]).unwrap());
        assert!(!and.evaluate(&[true, false]).unwrap());
        assert!(!and.evaluate(&[false, true]).unwrap());
        let id = TruthTable::parse("01", 1).unwrap();
        assert!(id.evaluate(&[true]).unwrap());
        assert!(!id.evaluate(&[false]).unwrap());
        assert!(matches!(TruthTable::parse("011", 2), Err(TableError::LengthMismatch { expected: 4, got: 3, .. })));
        assert!(matches!(TruthTable::parse("01a1", 2), Err(TableError::BadCharacter { pos: 2, .. })));
    }

    #[test]
    fn evaluate_examples() {
        let xor = t("0110");
        assert!(xor.evaluate(&[true, false]).unwrap());
        assert!(!xor.evaluate(&[true, true]).unwrap());
        assert!(TruthTable::constant(0, true).evaluate(&[]).unwrap());
        assert!(matches!(xor.evaluate(&[true]), Err(TableError::ArityMismatch { .. })));
    }

    #[test]
    fn restrict_and_combine_examples() {
        assert_eq!(t("0110").restrict(true).unwrap(), t("10"));
        assert_eq!(t("0001").restrict(false).unwrap(), t("00"));
        assert_eq!(TruthTable::constant(0, true).restrict(false), Err(TableError::ArityZero));
        assert_eq!(TruthTable::combine(&t("01"), &t("01")).unwrap(), t("0101"));
        assert_eq!(TruthTable::combine(&t("00"), &t("11")).unwrap(), t("0011"));
        assert!(TruthTable::combine(&t("01"), &t("0110")).is_err());
    }

    #[test]
    fn combine_gives_xnor() {
        // Hand oracle: XNOR is 1 on (0,0) and (1,1), i.e. indices 0 and 3.
        let xnor = TruthTable::from_fn(2, |i| (i & 1) == (i >> 1));
        assert_eq!(TruthTable::combine(&t("10"), &t("01")).unwrap(), xnor);
        assert_eq!(xnor.to_string(), "1001");
    }

    #[test]
    fn xnor_glue_examples() {
        for id in 0..16 {
            let f = TruthTable::from_bits(2, id).unwrap();
            assert_eq!(f.xnor_glue(&f).unwrap(), TruthTable::constant(2, true));
            assert_eq!(f.xnor_glue(&f.not()).unwrap(), TruthTable::constant(2, false));
        }
        // Bitwise oracle over the characters of the two strings.
        let (a, b) = ("0001", "0110");
        let expect: String = a.chars().zip(b.chars()).map(|(p, q)| if p == q { '1' } else { '0' }).collect();
        assert_eq!(expect, "1000");
        assert_eq!(t(a).xnor_glue(&t(b)).unwrap(), t(&expect));
    }

    #[test]
    fn named_examples() {
        assert_eq!(named_function(&FunctionSpec::Xor, 2).unwrap(), t("0110"));
        assert_eq!(named_function(&FunctionSpec::Const1, 1).unwrap(), t("11"));
        assert_eq!(named_function(&FunctionSpec::Maj, 3).unwrap(), t("00010111"));
        assert_eq!(named_function(&FunctionSpec::Maj, 2), Err(TableError::EvenMajority(2)));
        let r1 = named_function(&FunctionSpec::Random(7), 3).unwrap();
        let r2 = named_function(&FunctionSpec::Random(7), 3).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(r1.arity(), 3);
        assert!("frob".parse::<FunctionSpec>().is_err());
        assert_eq!(named_function(&FunctionSpec::And, 7), Err(TableError::UnsupportedArity(7)));
    }

    #[test]
    fn spec_parsing() {
        assert_eq!("random:5".parse::<FunctionSpec>().unwrap(), FunctionSpec::Random(5));
        assert_eq!("random(5)".parse::<FunctionSpec>().unwrap(), FunctionSpec::Random(5));
        assert_eq!(
            "table:0110".parse::<FunctionSpec>().unwrap().table(2).unwrap(),
            named_function(&FunctionSpec::Xor, 2).unwrap()
        );
        for s in ["and", "or", "xor", "maj", "const0", "const1", "random:3", "table:0110"] {
            assert_eq!(s.parse::<FunctionSpec>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn restrict_combine_round_trip_exhaustive() {
        for j in 1..=3 {
            for id in 0..FuncId::count(j) {
                let g = TruthTable::from_id(j, FuncId(id)).unwrap();
                let lo = g.restrict(false).unwrap();
                let hi = g.restrict(true).unwrap();
                assert_eq!(TruthTable::combine(&lo, &hi).unwrap(), g);
            }
        }
    }

    #[test]
    fn restrict_matches_evaluation_exhaustive() {
        for j in 1..=4 {
            for id in 0..FuncId::count(j) {
                let g = TruthTable::from_id(j, FuncId(id)).unwrap();
                for b in [false, true] {
                    let h = g.restrict(b).unwrap();
                    for i in 0..1usize << (j - 1) {
                        let mut x = input_from_index(i, j - 1);
                        let lhs = h.evaluate(&x).unwrap();
                        x.push(b);
                        assert_eq!(lhs, g.evaluate(&x).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn xnor_glue_agreement_exhaustive() {
        for n in 0..=3 {
            for a in 0..FuncId::count(n) {
                for b in 0..FuncId::count(n) {
                    let f = TruthTable::from_bits(n, a).unwrap();
                    let g = TruthTable::from_bits(n, b).unwrap();
                    let h = f.xnor_glue(&g).unwrap();
                    for i in 0..f.len() {
                        assert_eq!(h.get(i), f.get(i) == g.get(i));
                    }
                }
            }
        }
    }

    #[test]
    fn id_bijection_exhaustive() {
        for j in 0..=4 {
            let mut seen = std::collections::HashSet::new();
            for id in 0..FuncId::count(j) {
                let table = TruthTable::from_id(j, FuncId(id)).unwrap();
                assert_eq!(table.id(), FuncId(id));
                assert!(seen.insert(table.to_string()));
            }
            assert!(TruthTable::from_id(j, FuncId(FuncId::count(j))).is_err());
        }
    }

    proptest! {
        #[test]
        fn id_bijection_arity5(id in 0u64..(1u64 << 32)) {
            let table = TruthTable::from_id(5, FuncId(id)).unwrap();
            prop_assert_eq!(table.id(), FuncId(id));
            prop_assert_eq!(TruthTable::parse(&table.to_string(), 5).unwrap(), table);
        }
    }
}
