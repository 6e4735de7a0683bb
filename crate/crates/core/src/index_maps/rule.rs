//! Integer rule presentations: affine maps, `n² + c`, and guarded piecewise
//! combinations of the two.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single integer formula used as a whole map or as one branch of a
/// piecewise map.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SubRule {
    /// `n ↦ a·n + b`
    Affine { a: BigInt, b: BigInt },
    /// `n ↦ n² + c`
    SquarePlus { c: BigInt },
}

/// Exact solution set of `rule(n) = y` over the integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solutions {
    Finite(Vec<BigInt>),
    /// Every integer solves the equation (constant rule hitting `y`).
    All,
}

impl SubRule {
    pub fn affine(a: i64, b: i64) -> Self {
        SubRule::Affine { a: a.into(), b: b.into() }
    }

    pub fn square_plus(c: i64) -> Self {
        SubRule::SquarePlus { c: c.into() }
    }

    pub fn constant(v: i64) -> Self {
        SubRule::affine(0, v)
    }

    pub fn eval(&self, n: &BigInt) -> BigInt {
        match self {
            SubRule::Affine { a, b } => a * n + b,
            SubRule::SquarePlus { c } => n * n + c,
        }
    }

    pub fn solve(&self, y: &BigInt) -> Solutions {
        match self {
            SubRule::Affine { a, b } => {
                if a.is_zero() {
                    if y == b {
                        Solutions::All
                    } else {
                        Solutions::Finite(vec![])
                    }
                } else {
                    let (q, r) = (y - b).div_rem(a);
                    if r.is_zero() {
                        Solutions::Finite(vec![q])
                    } else {
                        Solutions::Finite(vec![])
                    }
                }
            }
            SubRule::SquarePlus { c } => {
                let sq = y - c;
                if sq.is_negative() {
                    return Solutions::Finite(vec![]);
                }
                let root = sq.sqrt();
                if &root * &root != sq {
                    Solutions::Finite(vec![])
                } else if root.is_zero() {
                    Solutions::Finite(vec![root])
                } else {
                    Solutions::Finite(vec![-&root, root])
                }
            }
        }
    }

    pub(crate) fn is_injective(&self) -> bool {
        matches!(self, SubRule::Affine { a, .. } if !a.is_zero())
    }
}

impl fmt::Display for SubRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubRule::Affine { a, b } => {
                let lin = match a.to_string().as_str() {
                    "0" => String::new(),
                    "1" => "n".into(),
                    "-1" => "-n".into(),
                    s => format!("{s}n"),
                };
                match (lin.is_empty(), b.sign()) {
                    (true, _) => write!(f, "n ↦ {b}"),
                    (false, num_bigint::Sign::NoSign) => write!(f, "n ↦ {lin}"),
                    (false, num_bigint::Sign::Minus) => write!(f, "n ↦ {lin} - {}", -b),
                    (false, num_bigint::Sign::Plus) => write!(f, "n ↦ {lin} + {b}"),
                }
            }
            SubRule::SquarePlus { c } => write!(f, "n ↦ n² + {c}"),
        }
    }
}

/// Branch selector of a piecewise rule.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Guard {
    Point(BigInt),
    /// Closed interval; a missing end is unbounded.
    Interval { lo: Option<BigInt>, hi: Option<BigInt> },
    /// `n ≡ residue (mod modulus)`
    Residue { residue: BigInt, modulus: BigInt },
}

impl Guard {
    pub fn contains(&self, n: &BigInt) -> bool {
        match self {
            Guard::Point(p) => p == n,
            Guard::Interval { lo, hi } => {
                lo.as_ref().is_none_or(|lo| n >= lo) && hi.as_ref().is_none_or(|hi| n <= hi)
            }
            Guard::Residue { residue, modulus } => n.mod_floor(modulus) == residue.mod_floor(modulus),
        }
    }

    /// Finite bounds `(lo, hi)` when the guard selects a bounded set.
    pub fn bounds(&self) -> Option<(BigInt, BigInt)> {
        match self {
            Guard::Point(p) => Some((p.clone(), p.clone())),
            Guard::Interval { lo: Some(lo), hi: Some(hi) } => Some((lo.clone(), hi.clone())),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Guard::Interval { lo: Some(lo), hi: Some(hi) } if lo > hi => Err(Error::InvalidMap(format!(
                "empty interval guard [{lo}, {hi}]"
            ))),
            Guard::Residue { modulus, .. } if !modulus.is_positive() => Err(Error::InvalidMap(format!(
                "residue guard needs a positive modulus, got {modulus}"
            ))),
            _ => Ok(()),
        }
    }

    fn overlaps(&self, other: &Guard) -> bool {
        use Guard::*;
        match (self, other) {
            (Residue { residue: r1, modulus: m1 }, Residue { residue: r2, modulus: m2 }) => {
                let g = m1.gcd(m2);
                (r1 - r2).mod_floor(&g).is_zero()
            }
            (Residue { residue, modulus }, interval) | (interval, Residue { residue, modulus }) => {
                let (lo, hi) = interval.as_interval();
                match (lo, hi) {
                    (Some(lo), Some(hi)) => {
                        let first = &lo + (residue - &lo).mod_floor(modulus);
                        first <= hi
                    }
                    _ => true,
                }
            }
            (a, b) => {
                let (alo, ahi) = a.as_interval();
                let (blo, bhi) = b.as_interval();
                let lo_ok = match (&alo, &bhi) {
                    (Some(alo), Some(bhi)) => alo <= bhi,
                    _ => true,
                };
                let hi_ok = match (&blo, &ahi) {
                    (Some(blo), Some(ahi)) => blo <= ahi,
                    _ => true,
                };
                lo_ok && hi_ok
            }
        }
    }

    fn as_interval(&self) -> (Option<BigInt>, Option<BigInt>) {
        match self {
            Guard::Point(p) => (Some(p.clone()), Some(p.clone())),
            Guard::Interval { lo, hi } => (lo.clone(), hi.clone()),
            Guard::Residue { .. } => (None, None),
        }
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Guard::Point(p) => write!(f, "n = {p}"),
            Guard::Interval { lo, hi } => {
                let lo = lo.as_ref().map_or("-∞".to_string(), |v| v.to_string());
                let hi = hi.as_ref().map_or("+∞".to_string(), |v| v.to_string());
                write!(f, "n ∈ [{lo}, {hi}]")
            }
            Guard::Residue { residue, modulus } => write!(f, "n ≡ {residue} (mod {modulus})"),
        }
    }
}

/// Guarded branches plus a default sub-rule for integers no guard selects.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Piecewise {
    pub branches: Vec<(Guard, SubRule)>,
    pub default: SubRule,
}

impl Piecewise {
    pub fn new(branches: Vec<(Guard, SubRule)>, default: SubRule) -> Result<Self> {
        for (g, _) in &branches {
            g.validate()?;
        }
        for (i, (g1, _)) in branches.iter().enumerate() {
            for (g2, _) in &branches[i + 1..] {
                if g1.overlaps(g2) {
                    return Err(Error::InvalidMap(format!("guards `{g1}` and `{g2}` overlap")));
                }
            }
        }
        Ok(Piecewise { branches, default })
    }

    /// Branches with no guard: a plain formula.
    pub fn plain(rule: SubRule) -> Self {
        Piecewise { branches: vec![], default: rule }
    }

    pub fn select(&self, n: &BigInt) -> &SubRule {
        self.branches
            .iter()
            .find(|(g, _)| g.contains(n))
            .map_or(&self.default, |(_, r)| r)
    }

    pub fn eval(&self, n: &BigInt) -> BigInt {
        self.select(n).eval(n)
    }

    pub fn in_any_guard(&self, n: &BigInt) -> bool {
        self.branches.iter().any(|(g, _)| g.contains(n))
    }

    /// Radius `R` with every guarded integer in `[-R, R]`, or `None` when
    /// some guard is unbounded. `-1` encodes "no guards at all".
    pub fn core_radius(&self) -> Option<BigInt> {
        let mut radius = -BigInt::one();
        for (g, _) in &self.branches {
            let (lo, hi) = g.bounds()?;
            radius = radius.max(lo.abs()).max(hi.abs());
        }
        Some(radius)
    }
}
