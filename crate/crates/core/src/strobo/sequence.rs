//! Strictly increasing time sequences, consumed as finite prefixes, and the
//! two refinements the stroboscopical constructions need.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SequenceKind {
    Explicit(Vec<u64>),
    Arithmetic { start: u64, step: u64 },
    /// `1, 2, 3, …`
    AllNaturals,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SequenceSpec {
    pub kind: SequenceKind,
    /// How many leading terms are available.
    pub prefix_budget: usize,
}

pub const DEFAULT_PREFIX: usize = 1000;

impl SequenceSpec {
    pub fn new(kind: SequenceKind, prefix_budget: usize) -> Result<Self> {
        match &kind {
            SequenceKind::Explicit(v) => {
                if v.is_empty() {
                    return Err(Error::Instance("explicit sequence is empty".into()));
                }
                if let Some(w) = v.windows(2).find(|w| w[0] >= w[1]) {
                    return Err(Error::Instance(format!("sequence is not strictly increasing at {} ≥ {}", w[0], w[1])));
                }
            }
            SequenceKind::Arithmetic { step, .. } if *step == 0 => {
                return Err(Error::Instance("arithmetic step must be at least 1".into()));
            }
            _ => {}
        }
        if prefix_budget == 0 {
            return Err(Error::Instance("prefix budget must be positive".into()));
        }
        Ok(SequenceSpec { kind, prefix_budget })
    }

    pub fn naturals(prefix_budget: usize) -> Self {
        SequenceSpec { kind: SequenceKind::AllNaturals, prefix_budget }
    }

    pub fn arithmetic(start: u64, step: u64, prefix_budget: usize) -> Result<Self> {
        SequenceSpec::new(SequenceKind::Arithmetic { start, step }, prefix_budget)
    }

    pub fn explicit(terms: Vec<u64>) -> Result<Self> {
        let n = terms.len();
        SequenceSpec::new(SequenceKind::Explicit(terms), n.max(1))
    }

    /// The available terms.
    pub fn prefix(&self) -> Vec<u64> {
        match &self.kind {
            SequenceKind::Explicit(v) => v.iter().copied().take(self.prefix_budget).collect(),
            SequenceKind::Arithmetic { start, step } => {
                (0..self.prefix_budget as u64).map(|i| start + i * step).collect()
            }
            SequenceKind::AllNaturals => (1..=self.prefix_budget as u64).collect(),
        }
    }
}

impl std::fmt::Display for SequenceSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.kind {
            SequenceKind::Explicit(v) => write!(f, "explicit {v:?}"),
            SequenceKind::Arithmetic { start, step } => {
                write!(f, "arithmetic {start} + {step}·i ({} terms)", self.prefix_budget)
            }
            SequenceKind::AllNaturals => write!(f, "naturals 1..={}", self.prefix_budget),
        }
    }
}

/// Residues `f(m)` with `1 ≤ f(m) ≤ m` and a subsequence `n_1, n_2, …` such
/// that `n_i ≡ f(m) (mod m)` whenever `i ≥ m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueTable {
    pub residues: BTreeMap<u64, u64>,
    pub subsequence: Vec<u64>,
}

impl ResidueTable {
    pub fn modulus_bound(&self) -> u64 {
        self.residues.keys().next_back().copied().unwrap_or(0)
    }

    /// Post-hoc check of the defining congruences over the produced prefix.
    pub fn check(&self) -> bool {
        let increasing = self.subsequence.windows(2).all(|w| w[0] < w[1]);
        increasing
            && self.residues.iter().all(|(&m, &f)| {
                m >= 1
                    && (1..=m).contains(&f)
                    && self.subsequence.iter().skip(m as usize - 1).all(|n| n % m == f % m)
            })
    }
}

/// Nested pigeonhole refinement with diagonal picks.
pub fn congruence_subsequence(a: &SequenceSpec, modulus_bound: u64) -> Result<ResidueTable> {
    congruence_refine(&a.prefix(), modulus_bound)
}

/// Stage `s` keeps, among the terms after `n_{s-1}`, the residue class mod `s`
/// of the earliest term whose class holds at least `⌈remaining/s⌉` of them, and
/// takes its first term as `n_s`. After stage `M` the surviving terms follow.
pub fn congruence_refine(terms: &[u64], modulus_bound: u64) -> Result<ResidueTable> {
    if modulus_bound == 0 {
        return Err(Error::Instance("modulus bound must be at least 1".into()));
    }
    if terms.is_empty() {
        return Err(Error::Budget("stage 1: no terms available".into()));
    }
    let mut residues = BTreeMap::from([(1, 1)]);
    let mut picks = vec![terms[0]];
    let mut pool: Vec<u64> = terms.to_vec();
    for s in 2..=modulus_bound {
        let last = *picks.last().expect("nonempty");
        pool.retain(|&n| n > last);
        if pool.is_empty() {
            return Err(Error::Budget(format!("prefix exhausted at stage {s} of {modulus_bound}")));
        }
        let mut counts: HashMap<u64, usize> = HashMap::new();
        for &n in &pool {
            *counts.entry(n % s).or_default() += 1;
        }
        let need = pool.len().div_ceil(s as usize);
        let class = pool
            .iter()
            .map(|n| n % s)
            .find(|r| counts[r] >= need)
            .expect("pigeonhole leaves a large class");
        pool.retain(|n| n % s == class);
        residues.insert(s, if class == 0 { s } else { class });
        picks.push(pool[0]);
    }
    let last = *picks.last().expect("nonempty");
    picks.extend(pool.into_iter().filter(|&n| n > last));
    let table = ResidueTable { residues, subsequence: picks };
    if !table.check() {
        return Err(Error::Invariant("congruence refinement broke its own residues".into()));
    }
    Ok(table)
}

/// First `count` terms of the greedy subsequence with `m_{i+1} - m_i > 2i`.
pub fn gap_subsequence(a: &SequenceSpec, count: usize) -> Result<Vec<u64>> {
    let out = gap_refine(&a.prefix(), count);
    if out.len() < count {
        return Err(Error::Budget(format!(
            "prefix of {} terms yields only {} of {count} gap terms",
            a.prefix_budget,
            out.len()
        )));
    }
    Ok(out)
}

/// Greedy gap subsequence of at most `limit` terms (`usize::MAX` for all the
/// prefix allows).
pub fn gap_refine(terms: &[u64], limit: usize) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::new();
    for &n in terms {
        if out.len() >= limit {
            break;
        }
        match out.last() {
            None => out.push(n),
            Some(&prev) => {
                let i = out.len() as u64 - 1;
                if n - prev > 2 * i {
                    out.push(n);
                }
            }
        }
    }
    out
}

/// `m_{i+1} - m_i > 2i` for every consecutive pair (0-based `i`).
pub fn has_growing_gaps(terms: &[u64]) -> bool {
    terms.windows(2).enumerate().all(|(i, w)| w[1] > w[0] && w[1] - w[0] > 2 * i as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn naturals_mod_two() {
        let t = congruence_subsequence(&SequenceSpec::naturals(100), 2).unwrap();
        assert_eq!(t.residues[&1], 1);
        assert!(matches!(t.residues[&2], 1 | 2));
        assert!(t.check());
        let parity = t.subsequence[1] % 2;
        assert!(t.subsequence[1..].iter().all(|n| n % 2 == parity));
    }

    #[test]
    fn arithmetic_three_six() {
        let t = congruence_subsequence(&SequenceSpec::arithmetic(3, 6, 50).unwrap(), 3).unwrap();
        assert_eq!(t.residues[&2], 1);
        assert_eq!(t.residues[&3], 3);
        assert!(t.check());
    }

    #[test]
    fn short_prefix_exhausts() {
        let a = SequenceSpec::explicit(vec![5, 10, 15, 20]).unwrap();
        match congruence_subsequence(&a, 5) {
            Err(Error::Budget(msg)) => assert!(msg.contains("stage 4"), "{msg}"),
            other => panic!("expected a budget error, got {other:?}"),
        }
    }

    #[test]
    fn gap_examples() {
        assert_eq!(gap_subsequence(&SequenceSpec::naturals(100), 4).unwrap(), vec![1, 2, 5, 10]);
        assert_eq!(gap_subsequence(&SequenceSpec::arithmetic(1, 100, 10).unwrap(), 3).unwrap(), vec![1, 101, 201]);
        assert!(matches!(gap_subsequence(&SequenceSpec::explicit(vec![1, 2]).unwrap(), 5), Err(Error::Budget(_))));
        assert!(has_growing_gaps(&gap_subsequence(&SequenceSpec::naturals(3000), 50).unwrap()));
    }

    #[test]
    fn residue_check_catches_perturbation() {
        let mut t = congruence_subsequence(&SequenceSpec::naturals(2000), 6).unwrap();
        assert!(t.check());
        let f4 = t.residues[&4];
        t.residues.insert(4, f4 % 4 + 1);
        assert!(!t.check());
    }

    #[test]
    fn refining_gap_output_keeps_gaps() {
        let g = gap_refine(&SequenceSpec::naturals(20_000).prefix(), usize::MAX);
        let t = congruence_refine(&g, 4).unwrap();
        assert!(t.check() && has_growing_gaps(&t.subsequence));
    }

    #[test]
    fn sequence_validation() {
        assert!(SequenceSpec::explicit(vec![3, 3]).is_err());
        assert!(SequenceSpec::arithmetic(1, 0, 5).is_err());
        assert_eq!(SequenceSpec::arithmetic(2, 2, 3).unwrap().prefix(), vec![2, 4, 6]);
    }
}
