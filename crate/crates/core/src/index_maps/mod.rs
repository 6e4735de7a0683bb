//! Finitely-presented self-maps of an index set and the functional-graph
//! questions the decision procedures reduce to.

mod analysis;
mod rule;
mod verdict;

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use analysis::{
    class_type, confluence, decide_injective, decide_periodic_free, first_meeting, orbit_fate, period,
    same_class, Confluence, Meeting, OrbitFate,
};
pub use rule::{Guard, Piecewise, Solutions, SubRule};
pub use verdict::{Certificate, Decision, Verdict};

/// Indices are exact integers. Finite domains use positions `0..n`.
pub type Index = BigInt;

/// Convenience conversion used throughout tests and builders.
pub fn idx(v: i64) -> Index {
    BigInt::from(v)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IndexSet {
    /// Named atoms; atom `k` is the index `k`.
    Finite(Vec<String>),
    Integers,
}

impl IndexSet {
    pub fn finite<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::InvalidMap("finite index set must be nonempty".into()));
        }
        let mut seen = BTreeSet::new();
        for n in &names {
            if !seen.insert(n.as_str()) {
                return Err(Error::InvalidMap(format!("duplicate atom `{n}`")));
            }
        }
        Ok(IndexSet::Finite(names))
    }

    /// Atoms named `a`, `b`, … (or `x26`, `x27`, … past the alphabet).
    pub fn atoms(n: usize) -> Result<Self> {
        IndexSet::finite((0..n).map(atom_name))
    }

    pub fn contains(&self, i: &Index) -> bool {
        match self {
            IndexSet::Finite(names) => i.to_usize().is_some_and(|k| k < names.len()),
            IndexSet::Integers => true,
        }
    }

    pub fn len(&self) -> Option<usize> {
        match self {
            IndexSet::Finite(names) => Some(names.len()),
            IndexSet::Integers => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, IndexSet::Finite(_))
    }

    pub fn position(&self, name: &str) -> Option<Index> {
        match self {
            IndexSet::Finite(names) => names.iter().position(|n| n == name).map(Index::from),
            IndexSet::Integers => name.trim().parse().ok(),
        }
    }

    pub fn label(&self, i: &Index) -> String {
        match self {
            IndexSet::Finite(names) => i
                .to_usize()
                .and_then(|k| names.get(k))
                .cloned()
                .unwrap_or_else(|| format!("#{i}")),
            IndexSet::Integers => i.to_string(),
        }
    }
}

pub fn atom_name(k: usize) -> String {
    if k < 26 {
        ((b'a' + k as u8) as char).to_string()
    } else {
        format!("x{k}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    /// `images[k]` is the image of atom `k`.
    Table(Vec<usize>),
    Affine { a: BigInt, b: BigInt },
    SquarePlus { c: BigInt },
    Piecewise(Piecewise),
}

/// Exploration limits for integer-domain searches.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Budget {
    /// Integer searches stay inside `[-magnitude, magnitude]`.
    pub magnitude: BigInt,
    pub steps: u64,
    /// Representation guard for iterates.
    pub max_bits: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { magnitude: BigInt::from(1_000_000), steps: 10_000, max_bits: 1 << 16 }
    }
}

impl Budget {
    pub fn with_magnitude(mut self, m: u64) -> Self {
        self.magnitude = m.into();
        self
    }

    pub fn with_steps(mut self, s: u64) -> Self {
        self.steps = s;
        self
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "magnitude {}, {} steps", self.magnitude, self.steps)
    }
}

/// Exact preimage set of a single index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Preimages {
    Finite(Vec<Index>),
    /// Every integer except the listed ones.
    Cofinite(Vec<Index>),
    Unknown,
}

impl Preimages {
    pub fn contains(&self, i: &Index) -> Option<bool> {
        match self {
            Preimages::Finite(v) => Some(v.contains(i)),
            Preimages::Cofinite(ex) => Some(!ex.contains(i)),
            Preimages::Unknown => None,
        }
    }

    pub fn is_empty(&self) -> Option<bool> {
        match self {
            Preimages::Finite(v) => Some(v.is_empty()),
            Preimages::Cofinite(_) => Some(false),
            Preimages::Unknown => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FunctionalMap {
    domain: IndexSet,
    rule: Rule,
    pub budget: Budget,
}

impl FunctionalMap {
    pub fn new(domain: IndexSet, rule: Rule) -> Result<Self> {
        match (&domain, &rule) {
            (IndexSet::Finite(names), Rule::Table(images)) => {
                if images.len() != names.len() {
                    return Err(Error::InvalidMap(format!(
                        "table lists {} images for {} atoms",
                        images.len(),
                        names.len()
                    )));
                }
                if let Some(bad) = images.iter().find(|&&k| k >= names.len()) {
                    return Err(Error::InvalidMap(format!("table image #{bad} is outside the domain")));
                }
            }
            (IndexSet::Finite(_), _) => {
                return Err(Error::InvalidMap("integer rules need the integer index set".into()));
            }
            (IndexSet::Integers, Rule::Table(_)) => {
                return Err(Error::InvalidMap("table rules need a finite index set".into()));
            }
            (IndexSet::Integers, Rule::Piecewise(pw)) => {
                // re-run guard validation for hand-built values
                Piecewise::new(pw.branches.clone(), pw.default.clone())?;
            }
            (IndexSet::Integers, _) => {}
        }
        Ok(FunctionalMap { domain, rule, budget: Budget::default() })
    }

    /// Table on atoms `a, b, c, …`.
    pub fn table(images: &[usize]) -> Result<Self> {
        FunctionalMap::new(IndexSet::atoms(images.len())?, Rule::Table(images.to_vec()))
    }

    pub fn named_table<S: Into<String>>(names: impl IntoIterator<Item = S>, images: &[usize]) -> Result<Self> {
        FunctionalMap::new(IndexSet::finite(names)?, Rule::Table(images.to_vec()))
    }

    pub fn affine(a: i64, b: i64) -> Self {
        FunctionalMap {
            domain: IndexSet::Integers,
            rule: Rule::Affine { a: a.into(), b: b.into() },
            budget: Budget::default(),
        }
    }

    pub fn square_plus(c: i64) -> Self {
        FunctionalMap { domain: IndexSet::Integers, rule: Rule::SquarePlus { c: c.into() }, budget: Budget::default() }
    }

    pub fn piecewise(pw: Piecewise) -> Self {
        FunctionalMap { domain: IndexSet::Integers, rule: Rule::Piecewise(pw), budget: Budget::default() }
    }

    pub fn with_budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self
    }

    pub fn domain(&self) -> &IndexSet {
        &self.domain
    }

    pub fn rule(&self) -> &Rule {
        &self.rule
    }

    pub fn is_finite(&self) -> bool {
        self.domain.is_finite()
    }

    /// Table images, when the map is a table.
    pub fn table_images(&self) -> Option<&[usize]> {
        match &self.rule {
            Rule::Table(t) => Some(t),
            _ => None,
        }
    }

    /// The integer rule as a piecewise presentation (plain rules have no guards).
    pub fn integer_view(&self) -> Option<Piecewise> {
        match &self.rule {
            Rule::Table(_) => None,
            Rule::Affine { a, b } => Some(Piecewise::plain(SubRule::Affine { a: a.clone(), b: b.clone() })),
            Rule::SquarePlus { c } => Some(Piecewise::plain(SubRule::SquarePlus { c: c.clone() })),
            Rule::Piecewise(pw) => Some(pw.clone()),
        }
    }

    /// Finite domain as a list of indices.
    pub fn atoms(&self) -> Option<Vec<Index>> {
        self.domain.len().map(|n| (0..n).map(Index::from).collect())
    }

    pub fn label(&self, i: &Index) -> String {
        self.domain.label(i)
    }

    pub fn apply(&self, i: &Index) -> Result<Index> {
        let image = match &self.rule {
            Rule::Table(t) => {
                let k = i
                    .to_usize()
                    .filter(|&k| k < t.len())
                    .ok_or_else(|| Error::Domain { index: i.clone() })?;
                return Ok(Index::from(t[k]));
            }
            Rule::Affine { a, b } => a * i + b,
            Rule::SquarePlus { c } => i * i + c,
            Rule::Piecewise(pw) => pw.eval(i),
        };
        if image.bits() > self.budget.max_bits {
            return Err(Error::Overflow { bits: self.budget.max_bits });
        }
        Ok(image)
    }

    pub fn iterate(&self, i: &Index, t: u64) -> Result<Index> {
        let mut cur = i.clone();
        if !self.domain.contains(&cur) {
            return Err(Error::Domain { index: cur });
        }
        for _ in 0..t {
            cur = self.apply(&cur)?;
        }
        Ok(cur)
    }

    /// Forward orbit `i, φ(i), …, φ^len(i)` (length `len + 1`).
    pub fn orbit(&self, i: &Index, len: u64) -> Result<Vec<Index>> {
        let mut out = Vec::with_capacity(len as usize + 1);
        let mut cur = i.clone();
        out.push(cur.clone());
        for _ in 0..len {
            cur = self.apply(&cur)?;
            out.push(cur.clone());
        }
        Ok(out)
    }

    pub fn preimages(&self, y: &Index) -> Preimages {
        match &self.rule {
            Rule::Table(t) => Preimages::Finite(
                t.iter()
                    .enumerate()
                    .filter(|(_, &img)| Index::from(img) == *y)
                    .map(|(k, _)| Index::from(k))
                    .collect(),
            ),
            _ => {
                let pw = self.integer_view().expect("integer rule");
                self.piecewise_preimages(&pw, y)
            }
        }
    }

    fn piecewise_preimages(&self, pw: &Piecewise, y: &Index) -> Preimages {
        let mut found = BTreeSet::new();
        for (g, r) in &pw.branches {
            match r.solve(y) {
                Solutions::Finite(v) => found.extend(v.into_iter().filter(|n| g.contains(n))),
                Solutions::All => match g.bounds() {
                    Some((lo, hi)) if &hi - &lo <= self.budget.magnitude => {
                        let mut n = lo;
                        while n <= hi {
                            found.insert(n.clone());
                            n += 1;
                        }
                    }
                    _ => return Preimages::Unknown,
                },
            }
        }
        match pw.default.solve(y) {
            Solutions::Finite(v) => {
                found.extend(v.into_iter().filter(|n| !pw.in_any_guard(n)));
                Preimages::Finite(found.into_iter().collect())
            }
            Solutions::All => {
                let Some(radius) = pw.core_radius() else {
                    return Preimages::Unknown;
                };
                if radius > self.budget.magnitude {
                    return Preimages::Unknown;
                }
                let mut excluded = Vec::new();
                let mut n = -radius.clone();
                while n <= radius {
                    if pw.in_any_guard(&n) && !found.contains(&n) {
                        excluded.push(n.clone());
                    }
                    n += 1;
                }
                Preimages::Cofinite(excluded)
            }
        }
    }

    pub fn describe(&self) -> String {
        match &self.rule {
            Rule::Table(t) => {
                let parts: Vec<String> = t
                    .iter()
                    .enumerate()
                    .map(|(k, &img)| format!("{}→{}", self.label(&k.into()), self.label(&img.into())))
                    .collect();
                format!("table {{{}}}", parts.join(", "))
            }
            Rule::Affine { a, b } => format!("{}", SubRule::Affine { a: a.clone(), b: b.clone() }),
            Rule::SquarePlus { c } => format!("{}", SubRule::SquarePlus { c: c.clone() }),
            Rule::Piecewise(pw) => {
                let mut parts: Vec<String> = pw.branches.iter().map(|(g, r)| format!("{g}: {r}")).collect();
                parts.push(format!("otherwise: {}", pw.default));
                format!("piecewise [{}]", parts.join("; "))
            }
        }
    }
}

impl fmt::Display for FunctionalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

/// Remark-style trichotomy of an orbit class under an injective map.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassKind {
    Cycle { period: u64 },
    /// The class is the forward orbit of `root`, which has no preimage.
    ChainN { root: Index },
    /// Every element of the class has exactly one preimage.
    ChainZ,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassDescriptor {
    pub representative: Index,
    pub kind: ClassKind,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apply_examples() {
        assert_eq!(FunctionalMap::affine(1, 1).apply(&idx(5)).unwrap(), idx(6));
        let id = FunctionalMap::table(&[0]).unwrap();
        assert_eq!(id.apply(&idx(0)).unwrap(), idx(0));
        assert_eq!(FunctionalMap::square_plus(1).apply(&idx(-3)).unwrap(), idx(10));
        assert!(matches!(id.apply(&idx(1)), Err(Error::Domain { .. })));
    }

    #[test]
    fn iterate_examples() {
        assert_eq!(FunctionalMap::affine(1, 1).iterate(&idx(0), 4).unwrap(), idx(4));
        assert_eq!(FunctionalMap::square_plus(1).iterate(&idx(1), 2).unwrap(), idx(5));
        let absorb = FunctionalMap::table(&[1, 1]).unwrap();
        assert_eq!(absorb.iterate(&idx(0), 3).unwrap(), idx(1));
        assert_eq!(absorb.iterate(&idx(0), 0).unwrap(), idx(0));
    }

    #[test]
    fn iterate_reports_overflow() {
        let m = FunctionalMap::square_plus(1);
        assert!(matches!(m.iterate(&idx(2), 40), Err(Error::Overflow { .. })));
    }

    #[test]
    fn preimage_examples() {
        assert_eq!(FunctionalMap::square_plus(1).preimages(&idx(2)), Preimages::Finite(vec![idx(-1), idx(1)]));
        assert_eq!(FunctionalMap::affine(1, 1).preimages(&idx(0)), Preimages::Finite(vec![idx(-1)]));
        assert_eq!(FunctionalMap::affine(2, 0).preimages(&idx(3)), Preimages::Finite(vec![]));
        let absorb = FunctionalMap::table(&[1, 1]).unwrap();
        assert_eq!(absorb.preimages(&idx(1)), Preimages::Finite(vec![idx(0), idx(1)]));
    }

    #[test]
    fn constant_default_gives_cofinite_preimage() {
        let pw = Piecewise::new(vec![(Guard::Point(idx(0)), SubRule::affine(1, 5))], SubRule::constant(3)).unwrap();
        let m = FunctionalMap::piecewise(pw);
        assert_eq!(m.preimages(&idx(3)), Preimages::Cofinite(vec![idx(0)]));
        assert_eq!(m.preimages(&idx(5)), Preimages::Finite(vec![idx(0)]));
    }

    #[test]
    fn rejects_bad_presentations() {
        assert!(FunctionalMap::table(&[0, 2]).is_err());
        assert!(FunctionalMap::table(&[]).is_err());
        assert!(IndexSet::finite(["a", "a"]).is_err());
        assert!(FunctionalMap::new(IndexSet::Integers, Rule::Table(vec![0])).is_err());
        assert!(FunctionalMap::new(IndexSet::atoms(1).unwrap(), Rule::Affine { a: idx(1), b: idx(0) }).is_err());
    }
}
