use std::fmt;

use num_bigint::BigInt;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use super::analysis::{orbit_fate, OrbitFate};
use super::{FunctionalMap, Index, Preimages, Rule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    Yes,
    No,
    Unknown,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::Yes => "Yes",
            Decision::No => "No",
            Decision::Unknown => "Unknown",
        })
    }
}

/// Which points a growth statement declares escaping.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EscapeRegion {
    /// `|x| > bound` implies `|φ(x)| > |x|`.
    Magnitude,
    /// `x > bound` implies `φ(x) > x`.
    Upward,
    /// `x < -bound` implies `φ(x) < x`.
    Downward,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Certificate {
    /// `φ^period(index) = index` with `period` minimal.
    PeriodicWitness { index: Index, period: u64 },
    InjectivityCollision { first: Index, second: Index },
    /// No cycle meets `[-bound, bound]` and the region beyond it escapes.
    EscapeCertificate { bound: Index, region: EscapeRegion, statement: String },
    /// Exhaustive scan of a finite domain of the given size.
    FiniteExhaustive { size: usize },
    /// Injectivity of a guarded integer rule: an injective default outside
    /// `[-radius, radius]` and singleton fibers for every image of that core.
    InjectiveCore { radius: Index },
    /// `φ^steps_a(a) = φ^steps_b(b)`.
    OrbitMeeting { a: Index, b: Index, steps_a: u64, steps_b: u64 },
    /// The orbits of `a` and `b` end in different cycles.
    DistinctCycles { a: Index, b: Index, anchor_a: Index, anchor_b: Index },
    /// The point never returns to itself.
    NotPeriodic { point: Index },
    /// An argument tied to the rule class, re-derived by the owning module.
    Analytic { reason: String },
    Conjunction(Vec<Certificate>),
    BudgetExhausted { budget: String },
}

impl Certificate {
    /// Independent re-check against `map`. Analytic certificates are accepted
    /// as stated; budget markers certify nothing.
    pub fn verify(&self, map: &FunctionalMap) -> bool {
        match self {
            Certificate::PeriodicWitness { index, period } => {
                if *period == 0 || !map.domain().contains(index) {
                    return false;
                }
                let mut cur = index.clone();
                for k in 1..=*period {
                    match map.apply(&cur) {
                        Ok(next) => cur = next,
                        Err(_) => return false,
                    }
                    if cur == *index {
                        return k == *period;
                    }
                }
                false
            }
            Certificate::InjectivityCollision { first, second } => {
                first != second
                    && map.domain().contains(first)
                    && map.domain().contains(second)
                    && matches!((map.apply(first), map.apply(second)), (Ok(x), Ok(y)) if x == y)
            }
            Certificate::EscapeCertificate { bound, region, .. } => verify_escape(map, bound, region),
            Certificate::FiniteExhaustive { size } => match map.table_images() {
                Some(t) => {
                    let mut seen = vec![false; t.len()];
                    t.len() == *size && t.iter().all(|&k| !std::mem::replace(&mut seen[k], true))
                }
                None => false,
            },
            Certificate::InjectiveCore { radius } => verify_injective_core(map, radius),
            Certificate::OrbitMeeting { a, b, steps_a, steps_b } => {
                matches!((map.iterate(a, *steps_a), map.iterate(b, *steps_b)), (Ok(x), Ok(y)) if x == y)
            }
            Certificate::DistinctCycles { a, b, anchor_a, anchor_b } => {
                match (orbit_fate(map, a), orbit_fate(map, b)) {
                    (
                        Ok(OrbitFate::Cycle { anchor: x, period: p, .. }),
                        Ok(OrbitFate::Cycle { anchor: y, .. }),
                    ) => {
                        x == *anchor_a
                            && y == *anchor_b
                            && x != y
                            && map.orbit(&x, p.saturating_sub(1)).is_ok_and(|cyc| !cyc.contains(&y))
                    }
                    _ => false,
                }
            }
            Certificate::NotPeriodic { point } => match orbit_fate(map, point) {
                Ok(OrbitFate::Escapes { .. }) => true,
                Ok(OrbitFate::Cycle { anchor, period, .. }) => {
                    map.orbit(&anchor, period.saturating_sub(1)).is_ok_and(|cyc| !cyc.contains(point))
                }
                _ => false,
            },
            Certificate::Analytic { .. } => true,
            Certificate::Conjunction(parts) => parts.iter().all(|c| c.verify(map)),
            Certificate::BudgetExhausted { .. } => false,
        }
    }
}

fn verify_escape(map: &FunctionalMap, bound: &BigInt, region: &EscapeRegion) -> bool {
    let Some(pw) = map.integer_view() else { return false };
    let Some(radius) = pw.core_radius() else { return false };
    if bound < &radius || bound > &map.budget.magnitude {
        return false;
    }
    let escaped = |x: &BigInt| match region {
        EscapeRegion::Magnitude => x.abs() > *bound,
        EscapeRegion::Upward => x > bound,
        EscapeRegion::Downward => *x < -bound,
    };
    // spot-check the growth statement just past the bound
    for k in 1..=64i64 {
        for x in [bound + k, -bound - k] {
            if !escaped(&x) {
                continue;
            }
            let Ok(y) = map.apply(&x) else { return false };
            let grows = match region {
                EscapeRegion::Magnitude => y.abs() > x.abs(),
                EscapeRegion::Upward => y > x,
                EscapeRegion::Downward => y < x,
            };
            if !grows {
                return false;
            }
        }
    }
    // plain iteration from every non-escaped start must leave without repeating
    let mut x = -bound.clone();
    let steps = map.budget.steps.max(4 * (bound.magnitude().bits() + 2));
    while &x <= bound {
        if !escaped(&x) {
            let mut seen = std::collections::HashSet::new();
            let mut cur = x.clone();
            let mut left = false;
            for _ in 0..steps {
                if !seen.insert(cur.clone()) {
                    return false;
                }
                match map.apply(&cur) {
                    Ok(next) => cur = next,
                    Err(_) => return false,
                }
                if escaped(&cur) {
                    left = true;
                    break;
                }
            }
            if !left {
                return false;
            }
        }
        x += 1;
    }
    true
}

fn verify_injective_core(map: &FunctionalMap, radius: &BigInt) -> bool {
    if !matches!(map.rule(), Rule::Piecewise(_) | Rule::Affine { .. }) {
        return false;
    }
    let Some(pw) = map.integer_view() else { return false };
    if !pw.default.is_injective() || pw.core_radius().is_none_or(|r| &r > radius) {
        return false;
    }
    let mut p = -radius.clone();
    while &p <= radius {
        let Ok(y) = map.apply(&p) else { return false };
        if map.preimages(&y) != Preimages::Finite(vec![p.clone()]) {
            return false;
        }
        p += 1;
    }
    true
}

fn core(r: &BigInt) -> String {
    if r.is_negative() {
        "the empty core".into()
    } else {
        format!("the core [-{r}, {r}]")
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Certificate::PeriodicWitness { index, period } => write!(f, "periodic point {index} of period {period}"),
            Certificate::InjectivityCollision { first, second } => {
                write!(f, "collision: {first} and {second} share an image")
            }
            Certificate::EscapeCertificate { bound, statement, .. } => {
                write!(f, "no cycle within {}; {statement}", core(bound))
            }
            Certificate::FiniteExhaustive { size } => write!(f, "exhaustive check over {size} atoms"),
            Certificate::InjectiveCore { radius } => {
                write!(f, "injective default rule; singleton fibers over {}", core(radius))
            }
            Certificate::OrbitMeeting { a, b, steps_a, steps_b } => {
                write!(f, "φ^{steps_a}({a}) = φ^{steps_b}({b})")
            }
            Certificate::DistinctCycles { a, b, anchor_a, anchor_b } => {
                write!(f, "{a} falls into the cycle through {anchor_a}, {b} into the one through {anchor_b}")
            }
            Certificate::NotPeriodic { point } => write!(f, "{point} never returns to itself"),
            Certificate::Analytic { reason } => f.write_str(reason),
            Certificate::Conjunction(parts) => {
                let parts: Vec<String> = parts.iter().map(ToString::to_string).collect();
                write!(f, "{}", parts.join(" & "))
            }
            Certificate::BudgetExhausted { budget } => write!(f, "budget exhausted ({budget})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub decision: Decision,
    pub certificate: Certificate,
}

impl Verdict {
    pub fn yes(certificate: Certificate) -> Self {
        Verdict { decision: Decision::Yes, certificate }
    }

    pub fn no(certificate: Certificate) -> Self {
        Verdict { decision: Decision::No, certificate }
    }

    pub fn unknown(budget: impl fmt::Display) -> Self {
        Verdict { decision: Decision::Unknown, certificate: Certificate::BudgetExhausted { budget: budget.to_string() } }
    }

    pub fn is_yes(&self) -> bool {
        self.decision == Decision::Yes
    }

    pub fn is_no(&self) -> bool {
        self.decision == Decision::No
    }

    pub fn is_unknown(&self) -> bool {
        self.decision == Decision::Unknown
    }

    /// Conjunction: `No` wins, then `Unknown`, else `Yes` with both certificates.
    pub fn and(self, other: Verdict) -> Verdict {
        match (self.decision, other.decision) {
            (Decision::No, _) => self,
            (_, Decision::No) => other,
            (Decision::Unknown, _) => self,
            (_, Decision::Unknown) => other,
            _ => Verdict::yes(Certificate::Conjunction(vec![self.certificate, other.certificate])),
        }
    }

    /// Decided verdicts must carry an accepted certificate; Unknown carries
    /// the budget marker.
    pub fn check(&self, map: &FunctionalMap) -> bool {
        match self.decision {
            Decision::Unknown => matches!(self.certificate, Certificate::BudgetExhausted { .. }),
            _ => self.certificate.verify(map),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.decision, self.certificate)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index_maps::idx;

    #[test]
    fn periodic_witness_requires_minimal_period() {
        let swap = FunctionalMap::table(&[1, 0]).unwrap();
        assert!(Certificate::PeriodicWitness { index: idx(0), period: 2 }.verify(&swap));
        assert!(!Certificate::PeriodicWitness { index: idx(0), period: 4 }.verify(&swap));
        assert!(!Certificate::PeriodicWitness { index: idx(0), period: 3 }.verify(&swap));
    }

    #[test]
    fn collision_needs_distinct_points() {
        let m = FunctionalMap::square_plus(1);
        assert!(Certificate::InjectivityCollision { first: idx(1), second: idx(-1) }.verify(&m));
        assert!(!Certificate::InjectivityCollision { first: idx(1), second: idx(1) }.verify(&m));
        assert!(!Certificate::InjectivityCollision { first: idx(1), second: idx(2) }.verify(&m));
    }

    #[test]
    fn conjunction_prefers_no() {
        let y = Verdict::yes(Certificate::Analytic { reason: "r".into() });
        let n = Verdict::no(Certificate::NotPeriodic { point: idx(0) });
        assert!(y.clone().and(n.clone()).is_no());
        assert!(Verdict::unknown("b").and(n).is_no());
        assert!(y.clone().and(Verdict::unknown("b")).is_unknown());
        assert!(y.clone().and(y).is_yes());
    }
}
