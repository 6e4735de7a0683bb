//! Specification-type properties of `(X^Γ, σ_φ)`: decisions, tracing points
//! for gap-separated orbit segments, and the refutation for periodic points.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index_maps::{
    confluence, decide_injective, decide_periodic_free, Certificate, FunctionalMap, Index, Verdict,
};
use crate::shift::{eval_orbit, Alphabet, Configuration, Symbol, Window};

/// Orbit segments `y_s` on time windows `[l_s, k_s]`, traced up to `α_H`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecInstance {
    segments: Vec<Configuration>,
    windows: Vec<(u64, u64)>,
    target: Window,
}

impl SpecInstance {
    pub fn new(segments: Vec<Configuration>, windows: Vec<(u64, u64)>, target: Window) -> Result<Self> {
        if segments.is_empty() || segments.len() != windows.len() {
            return Err(Error::Instance(format!(
                "need matching nonempty segment and window lists, got {} and {}",
                segments.len(),
                windows.len()
            )));
        }
        for (s, &(l, k)) in windows.iter().enumerate() {
            if l > k {
                return Err(Error::Instance(format!("window {} has l = {l} > k = {k}", s + 1)));
            }
            if s > 0 && windows[s - 1].1 >= l {
                return Err(Error::Instance(format!("window {} starts before window {s} ends", s + 1)));
            }
        }
        let alphabet = segments[0].alphabet();
        if segments.iter().any(|y| y.alphabet() != alphabet) {
            return Err(Error::Instance("segments use different alphabets".into()));
        }
        Ok(SpecInstance { segments, windows, target })
    }

    pub fn segments(&self) -> &[Configuration] {
        &self.segments
    }

    pub fn windows(&self) -> &[(u64, u64)] {
        &self.windows
    }

    pub fn target(&self) -> &Window {
        &self.target
    }

    pub fn alphabet(&self) -> Alphabet {
        self.segments[0].alphabet()
    }

    /// Smallest gap `l_{s+1} - k_s`, or `None` for a single segment.
    pub fn min_gap(&self) -> Option<u64> {
        self.windows.windows(2).map(|w| w[1].0 - w[0].1).min()
    }

    pub fn horizon(&self) -> u64 {
        self.windows.last().map_or(0, |w| w.1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowCheck {
    pub segment: usize,
    pub t: u64,
    pub agrees: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TracingReport {
    pub tracer: Configuration,
    pub gap_bound_used: u64,
    pub checks: Vec<WindowCheck>,
    /// Single-segment instance: traced by the segment itself.
    pub degenerate: bool,
}

impl TracingReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.agrees)
    }
}

/// Weak and almost weak specification coincide for shifts: both hold exactly
/// when `φ` has no periodic point.
pub fn decide_weak_spec(map: &FunctionalMap) -> Verdict {
    decide_periodic_free(map)
}

pub fn decide_spec(map: &FunctionalMap) -> Verdict {
    decide_injective(map).and(decide_periodic_free(map))
}

/// `N + 1` for the confluence depth `N` of `H`.
pub fn gap_bound(map: &FunctionalMap, h: &Window) -> Result<u64> {
    Ok(confluence(map, &h.coords())?.depth + 1)
}

/// Does `z` shadow every segment on its window, up to `α_H`?
pub fn window_checks(map: &FunctionalMap, inst: &SpecInstance, z: &Configuration) -> Result<Vec<WindowCheck>> {
    let mut out = Vec::new();
    for (s, (y, &(l, k))) in inst.segments.iter().zip(&inst.windows).enumerate() {
        for t in l..=k {
            let agrees = eval_orbit(map, z, &inst.target, t)? == eval_orbit(map, y, &inst.target, t)?;
            out.push(WindowCheck { segment: s, t, agrees });
        }
    }
    Ok(out)
}

pub fn build_tracing_point(map: &FunctionalMap, inst: &SpecInstance, fill: Symbol) -> Result<TracingReport> {
    let pf = decide_periodic_free(map);
    if !pf.is_yes() {
        return Err(Error::Precondition(format!("tracing needs a map without periodic points ({pf})")));
    }
    let bound = gap_bound(map, &inst.target)?;
    if let Some(gap) = inst.min_gap() {
        if gap < bound {
            return Err(Error::Instance(format!("gap {gap} between windows is below the bound {bound}")));
        }
    }
    // coordinate -> (symbol, segment, t, γ) of its first assignment
    let mut assigned: BTreeMap<Index, (Symbol, usize, u64, Index)> = BTreeMap::new();
    for gamma in inst.target.iter() {
        let orbit = map.orbit(gamma, inst.horizon())?;
        for (s, (y, &(l, k))) in inst.segments.iter().zip(&inst.windows).enumerate() {
            for t in l..=k {
                let coord = &orbit[t as usize];
                let sym = y.value_at(coord);
                match assigned.get(coord) {
                    Some((prev, s0, t0, g0)) if *prev != sym => {
                        return Err(Error::Invariant(format!(
                            "coordinate {coord} gets {prev} from (segment {s0}, t = {t0}, γ = {g0}) and {sym} from (segment {s}, t = {t}, γ = {gamma})"
                        )));
                    }
                    Some(_) => {}
                    None => {
                        assigned.insert(coord.clone(), (sym, s, t, gamma.clone()));
                    }
                }
            }
        }
    }
    let tracer = Configuration::new(inst.alphabet(), fill, assigned.into_iter().map(|(c, (s, ..))| (c, s)))?;
    let checks = window_checks(map, inst, &tracer)?;
    let report = TracingReport { tracer, gap_bound_used: bound, checks, degenerate: inst.segments.len() == 1 };
    if !report.passed() {
        return Err(Error::Invariant("constructed tracer disagrees with a segment on its window".into()));
    }
    Ok(report)
}

/// The two-segment instance that no configuration traces when `λ` has
/// period `m`: constant `p` at time 1, constant `q` on `[N+2, N+2+m]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Refutation {
    pub lambda: Index,
    pub period: u64,
    pub claimed_gap: u64,
    pub p: Symbol,
    pub q: Symbol,
    pub instance: SpecInstance,
    /// Time `j ≡ 1 (mod m)` in the second window with `φ^j(λ) = φ(λ)`.
    pub forced: u64,
}

impl Refutation {
    /// Symbolic check: a tracer would need `x_{φ(λ)} = p` at time 1 and
    /// `x_{φ^j(λ)} = q` at time `j`, yet these coordinates coincide.
    pub fn verify(&self, map: &FunctionalMap) -> bool {
        let windows = self.instance.windows();
        if windows.len() != 2 || self.instance.segments().len() != 2 {
            return false;
        }
        let target_ok = self.instance.target().len() == 1 && self.instance.target().contains(&self.lambda);
        let shape_ok = windows[0] == (1, 1)
            && windows[1] == (self.claimed_gap + 2, self.claimed_gap + 2 + self.period)
            && windows[1].0 - windows[0].1 > self.claimed_gap;
        let segments_ok = self.p != self.q
            && self.instance.segments()[0] == constant(self.instance.alphabet(), self.p)
            && self.instance.segments()[1] == constant(self.instance.alphabet(), self.q);
        let forced_ok = self.period >= 1
            && (windows[1].0..=windows[1].1).contains(&self.forced)
            && self.forced % self.period == 1 % self.period;
        let periodic = map.iterate(&self.lambda, self.period).is_ok_and(|x| x == self.lambda);
        let collide = matches!(
            (map.iterate(&self.lambda, self.forced), map.apply(&self.lambda)),
            (Ok(a), Ok(b)) if a == b
        );
        target_ok && shape_ok && segments_ok && forced_ok && periodic && collide
    }
}

fn constant(alphabet: Alphabet, s: Symbol) -> Configuration {
    Configuration::constant(alphabet, s).expect("symbol in alphabet")
}

pub fn refute_weak_spec(
    map: &FunctionalMap,
    witness: &Certificate,
    alphabet: Alphabet,
    claimed_gap: u64,
) -> Result<Refutation> {
    let Certificate::PeriodicWitness { index, period } = witness else {
        return Err(Error::Precondition(format!("expected a periodic witness, got {witness}")));
    };
    if *period == 0 || map.iterate(index, *period)? != *index {
        return Err(Error::Precondition(format!("{index} does not return after {period} steps")));
    }
    let (p, q) = (0, 1);
    let l2 = claimed_gap + 2;
    let instance = SpecInstance::new(
        vec![constant(alphabet, p), constant(alphabet, q)],
        vec![(1, 1), (l2, l2 + period)],
        Window::new([index.clone()])?,
    )?;
    let forced = (l2..=l2 + period).find(|j| j % period == 1 % period).expect("m+1 consecutive times");
    Ok(Refutation { lambda: index.clone(), period: *period, claimed_gap, p, q, instance, forced })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index_maps::{idx, Decision};

    fn bin(fill: Symbol) -> Configuration {
        Configuration::constant(Alphabet::binary(), fill).unwrap()
    }

    #[test]
    fn decision_examples() {
        assert_eq!(decide_weak_spec(&FunctionalMap::affine(1, 1)).decision, Decision::Yes);
        assert_eq!(decide_weak_spec(&FunctionalMap::affine(-1, 0)).decision, Decision::No);
        assert_eq!(decide_weak_spec(&FunctionalMap::table(&[1, 2, 0]).unwrap()).decision, Decision::No);
        assert_eq!(decide_spec(&FunctionalMap::affine(1, 1)).decision, Decision::Yes);
        let v = decide_spec(&FunctionalMap::square_plus(1));
        assert!(matches!(v.certificate, Certificate::InjectivityCollision { .. }));
        let v = decide_spec(&FunctionalMap::affine(-1, 0));
        assert!(matches!(v.certificate, Certificate::PeriodicWitness { .. }));
    }

    #[test]
    fn gap_bound_examples() {
        let m = FunctionalMap::affine(1, 1);
        assert_eq!(gap_bound(&m, &Window::from_ints(&[0]).unwrap()).unwrap(), 1);
        assert_eq!(gap_bound(&m, &Window::from_ints(&[0, 5]).unwrap()).unwrap(), 6);
        let m = FunctionalMap::square_plus(1);
        assert_eq!(gap_bound(&m, &Window::from_ints(&[1, -1]).unwrap()).unwrap(), 2);
    }

    #[test]
    fn tracer_for_translation() {
        let m = FunctionalMap::affine(1, 1);
        let inst = SpecInstance::new(vec![bin(1), bin(0)], vec![(0, 1), (3, 4)], Window::from_ints(&[0]).unwrap())
            .unwrap();
        let r = build_tracing_point(&m, &inst, 0).unwrap();
        assert_eq!(r.tracer, Configuration::new(Alphabet::binary(), 0, [(idx(0), 1), (idx(1), 1)]).unwrap());
        assert!(r.passed() && !r.degenerate);
    }

    #[test]
    fn tracer_single_segment() {
        let m = FunctionalMap::affine(1, 1);
        let y = Configuration::new(Alphabet::binary(), 0, [(idx(0), 1), (idx(9), 1)]).unwrap();
        let inst = SpecInstance::new(vec![y], vec![(0, 0)], Window::from_ints(&[0]).unwrap()).unwrap();
        let r = build_tracing_point(&m, &inst, 0).unwrap();
        assert!(r.degenerate && r.passed());
        assert_eq!(r.tracer.value_at(&idx(0)), 1);
    }

    #[test]
    fn tracer_for_square_plus() {
        let m = FunctionalMap::square_plus(1);
        let inst = SpecInstance::new(vec![bin(1), bin(0)], vec![(0, 0), (2, 3)], Window::from_ints(&[1]).unwrap())
            .unwrap();
        let r = build_tracing_point(&m, &inst, 0).unwrap();
        assert_eq!(r.tracer.overrides().keys().cloned().collect::<Vec<_>>(), vec![idx(1)]);
        assert_eq!(r.tracer.value_at(&idx(5)), 0);
        assert_eq!(r.tracer.value_at(&idx(26)), 0);
        assert!(r.passed());
    }

    #[test]
    fn tracer_rejects_short_gaps() {
        let m = FunctionalMap::affine(1, 1);
        let inst = SpecInstance::new(vec![bin(1), bin(0)], vec![(0, 1), (3, 4)], Window::from_ints(&[0, 5]).unwrap())
            .unwrap();
        assert!(matches!(build_tracing_point(&m, &inst, 0), Err(Error::Instance(_))));
        assert!(matches!(
            build_tracing_point(&FunctionalMap::affine(-1, 0), &inst, 0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn instance_validation() {
        let h = Window::from_ints(&[0]).unwrap();
        assert!(SpecInstance::new(vec![bin(0), bin(1)], vec![(0, 2), (2, 3)], h.clone()).is_err());
        assert!(SpecInstance::new(vec![bin(0)], vec![(0, 2), (3, 3)], h.clone()).is_err());
        assert!(SpecInstance::new(vec![bin(0)], vec![(3, 2)], h).is_err());
    }

    #[test]
    fn refutation_examples() {
        let cases = [
            (FunctionalMap::table(&[0]).unwrap(), idx(0), 1),
            (FunctionalMap::affine(-1, 0), idx(0), 1),
            (FunctionalMap::table(&[1, 0]).unwrap(), idx(0), 2),
        ];
        for (m, lambda, period) in cases {
            for n in [0, 1, 5] {
                let w = Certificate::PeriodicWitness { index: lambda.clone(), period };
                let r = refute_weak_spec(&m, &w, Alphabet::binary(), n).unwrap();
                assert!(r.verify(&m));
                let mut bad = r.clone();
                bad.forced = r.instance.windows()[1].1 + 1;
                assert!(!bad.verify(&m));
                if period > 1 {
                    let mut bad = r.clone();
                    bad.forced += 1;
                    assert!(!bad.verify(&m));
                }
            }
        }
        let w = Certificate::PeriodicWitness { index: idx(1), period: 1 };
        assert!(refute_weak_spec(&FunctionalMap::affine(1, 1), &w, Alphabet::binary(), 0).is_err());
    }
}
