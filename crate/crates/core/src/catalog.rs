//! Canned counterexample systems and their classification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fort::{
    decide_fort_spec, decide_fort_strobo, decide_fort_strong_strobo, decide_fort_weak_spec, eventual_image,
    FortSystem, PointSet,
};
use crate::index_maps::{idx, Decision, FunctionalMap, Guard, Piecewise, SubRule, Verdict};
use crate::specification::{decide_spec, decide_weak_spec};
use crate::strobo::{decide_strobo, decide_strong_strobo};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum System {
    Shift(FunctionalMap),
    Fort(FortSystem),
}

impl std::fmt::Display for System {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            System::Shift(m) => write!(f, "generalized shift over {}", m.describe()),
            System::Fort(s) => write!(f, "{s}"),
        }
    }
}

/// Where a system sits in the two region diagrams.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub weak_spec: bool,
    pub strobo: bool,
    pub spec: bool,
}

impl std::fmt::Display for Placement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let yn = |b: bool| if b { "Yes" } else { "No" };
        write!(f, "weak spec {}, strobo {}, spec {}", yn(self.weak_spec), yn(self.strobo), yn(self.spec))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Builtin {
    pub name: &'static str,
    pub summary: &'static str,
    pub system: System,
    /// Placement drawn in the diagram.
    pub diagram: Placement,
}

/// Decisions for the four property pairs. Weak spec also answers almost weak
/// spec, strobo also answers uniform strobo.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub weak_spec: Verdict,
    pub spec: Verdict,
    pub strobo: Verdict,
    pub strong_strobo: Verdict,
    /// `⋂ 𝔥ⁿ(F)` for Fort systems.
    pub eventual_image: Option<PointSet>,
}

impl Classification {
    pub fn decisions(&self) -> [Decision; 4] {
        [self.weak_spec.decision, self.spec.decision, self.strobo.decision, self.strong_strobo.decision]
    }

    pub fn any_unknown(&self) -> bool {
        self.decisions().contains(&Decision::Unknown)
    }

    /// Computed placement, when every decision is settled.
    pub fn placement(&self) -> Option<Placement> {
        if self.any_unknown() {
            return None;
        }
        Some(Placement {
            weak_spec: self.weak_spec.is_yes(),
            strobo: self.strobo.is_yes(),
            spec: self.spec.is_yes(),
        })
    }
}

fn settle(v: Result<Verdict>) -> Verdict {
    v.unwrap_or_else(Verdict::unknown)
}

pub fn classify(system: &System) -> Classification {
    match system {
        System::Shift(m) => Classification {
            weak_spec: decide_weak_spec(m),
            spec: decide_spec(m),
            strobo: decide_strobo(m),
            strong_strobo: decide_strong_strobo(m),
            eventual_image: None,
        },
        System::Fort(s) => Classification {
            weak_spec: settle(decide_fort_weak_spec(s)),
            spec: decide_fort_spec(s),
            strobo: settle(decide_fort_strobo(s)),
            strong_strobo: decide_fort_strong_strobo(s),
            eventual_image: eventual_image(s).ok().map(|e| e.set),
        },
    }
}

/// Mismatch between the computed placement and the diagram.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub name: String,
    pub diagram: Placement,
    pub computed: Placement,
    pub note: String,
}

/// Only settled placements are compared; an exhausted budget is not a mismatch.
pub fn discrepancy(b: &Builtin, c: &Classification) -> Option<Discrepancy> {
    let computed = c.placement()?;
    if computed == b.diagram {
        return None;
    }
    let mut note = format!("diagram places {} at ({}), computed ({computed})", b.name, b.diagram);
    if let Some(set) = &c.eventual_image {
        note.push_str(&format!("; eventual image {}", describe_set(set)));
    }
    Some(Discrepancy { name: b.name.to_string(), diagram: b.diagram, computed, note })
}

pub fn describe_set(set: &PointSet) -> String {
    let list = |v: &[crate::index_maps::Index]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ");
    match set {
        PointSet::Finite(v) => format!("{{{}}}", list(v)),
        PointSet::AllExcept(v) if v.is_empty() => "F".into(),
        PointSet::AllExcept(v) => format!("F ∖ {{{}}}", list(v)),
        PointSet::Infinite(d) => format!("infinite ({d})"),
    }
}

/// `n ↦ 1 − n` off the exceptional index 1, which goes to `target`; `b = 0`
/// is fixed. Index `n` stands for the point `1/n` of `{±1/n} ∪ {0}`.
fn mobius(target: i64) -> FortSystem {
    let pw = Piecewise::new(
        vec![(Guard::Point(idx(0)), SubRule::constant(0)), (Guard::Point(idx(1)), SubRule::constant(target))],
        SubRule::affine(-1, 1),
    )
    .expect("disjoint point guards");
    FortSystem::integers(pw, 0).expect("0 is an integer")
}

/// Translation by one on the integers except a fixed point at 0 and a
/// bridge `-1 ↦ 1`: a bijection mixing a cycle and a two-sided chain.
pub fn mixed_piecewise() -> FunctionalMap {
    let pw = Piecewise::new(
        vec![(Guard::Point(idx(0)), SubRule::affine(1, 0)), (Guard::Point(idx(-1)), SubRule::constant(1))],
        SubRule::affine(1, 1),
    )
    .expect("disjoint point guards");
    FunctionalMap::piecewise(pw)
}

pub const BUILTIN_NAMES: [&str; 6] = ["C1", "C2", "C3", "D1", "D2", "D3"];

pub fn builtin(name: &str) -> Result<Builtin> {
    let p = |weak_spec, strobo, spec| Placement { weak_spec, strobo, spec };
    let b = match name {
        "C1" => Builtin {
            name: "C1",
            summary: "n ↦ n² + 1 on Z",
            system: System::Shift(FunctionalMap::square_plus(1)),
            diagram: p(true, false, false),
        },
        "C2" => Builtin {
            name: "C2",
            summary: "n ↦ −n on Z",
            system: System::Shift(FunctionalMap::affine(-1, 0)),
            diagram: p(false, true, false),
        },
        "C3" => Builtin {
            name: "C3",
            summary: "n ↦ n + 1 on Z",
            system: System::Shift(FunctionalMap::affine(1, 1)),
            diagram: p(true, true, true),
        },
        "D1" => Builtin {
            name: "D1",
            summary: "x ↦ x/(x−1) off x = 1, 1 ↦ 0, on {±1/n} ∪ {0}",
            system: System::Fort(mobius(0)),
            diagram: p(true, false, false),
        },
        "D2" => Builtin {
            name: "D2",
            summary: "x ↦ x/(x−1) off x = 1, 1 ↦ −1, on {±1/n} ∪ {0}",
            system: System::Fort(mobius(-1)),
            diagram: p(false, false, false),
        },
        "D3" => Builtin {
            name: "D3",
            summary: "x ↦ −x on {±1/n} ∪ {0}",
            system: System::Fort(
                FortSystem::integers(Piecewise::plain(SubRule::affine(-1, 0)), 0).expect("0 is an integer"),
            ),
            diagram: p(false, true, false),
        },
        other => {
            return Err(Error::Instance(format!(
                "unknown builtin `{other}` (expected one of {})",
                BUILTIN_NAMES.join(", ")
            )))
        }
    };
    Ok(b)
}

pub fn builtins() -> Vec<Builtin> {
    BUILTIN_NAMES.iter().map(|n| builtin(n).expect("listed")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_builtins_match_diagram() {
        for name in ["C1", "C2", "C3"] {
            let b = builtin(name).unwrap();
            let c = classify(&b.system);
            assert_eq!(c.placement(), Some(b.diagram), "{name}");
            assert!(discrepancy(&b, &c).is_none());
        }
        let c = classify(&builtin("C2").unwrap().system);
        assert!(c.strong_strobo.is_no());
    }

    #[test]
    fn fort_builtins() {
        for name in ["D2", "D3"] {
            let b = builtin(name).unwrap();
            assert!(discrepancy(&b, &classify(&b.system)).is_none(), "{name}");
        }
        let d1 = builtin("D1").unwrap();
        let c = classify(&d1.system);
        assert_eq!(c.eventual_image, Some(PointSet::AllExcept(vec![idx(1)])));
        let d = discrepancy(&d1, &c).expect("D1 disagrees with its drawn placement");
        assert!(d.note.contains("F ∖ {1}"), "{}", d.note);
    }

    #[test]
    fn mixed_map_is_bijective_with_a_cycle() {
        let m = mixed_piecewise();
        assert!(decide_strobo(&m).is_yes());
        assert!(decide_weak_spec(&m).is_no());
        assert_eq!(m.apply(&idx(-1)).unwrap(), idx(1));
        assert_eq!(m.apply(&idx(0)).unwrap(), idx(0));
    }

    #[test]
    fn unknown_name() {
        assert!(builtin("C4").is_err());
    }
}
