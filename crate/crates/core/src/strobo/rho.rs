//! ρ-maps: coordinate relocations `ρ(z)_α = z_{r(α)}` with
//! `σ_φ^{n_i}(ρ(z))` agreeing with `z` on a window for every selected `i`
//! past a threshold.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sequence::{congruence_refine, gap_refine, has_growing_gaps, ResidueTable, SequenceSpec};
use crate::error::{Error, Result};
use crate::index_maps::{
    class_type, decide_injective, decide_periodic_free, first_meeting, orbit_fate, period, ClassKind, FunctionalMap,
    Index, Meeting, OrbitFate,
};
use crate::shift::{Configuration, Symbol, Window};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RhoKind {
    AllPeriodic,
    Aperiodic,
    Product,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainType {
    /// Forward orbit of a root without preimage.
    Lambda1,
    /// Two-sided chain.
    Lambda2,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicPart {
    pub residues: ResidueTable,
    /// `k_α` for the periodic window coordinates.
    pub periods: BTreeMap<Index, u64>,
    relocation: HashMap<Index, Index>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassPlan {
    pub representative: Index,
    pub chain: ChainType,
    /// `forward[k] = φ^k(μ)`
    forward: Vec<Index>,
    /// `backward[k] = φ^{-(k+1)}(μ)` for two-sided chains
    backward: Vec<Index>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AperiodicPart {
    pub classes: Vec<ClassPlan>,
    /// Every window coordinate is `φ^t(μ)` with `0 ≤ t ≤ spread` for its class.
    pub spread: u64,
    offsets: HashMap<Index, (usize, i64)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RhoMap {
    pub kind: RhoKind,
    /// Selected times `n_1, n_2, …` (stored 0-based).
    pub subsequence: Vec<u64>,
    pub window: Window,
    /// Least `i` from which every selected term in the prefix satisfies the
    /// guarantee (1-based).
    pub threshold: usize,
    /// Index from which the construction guarantees convergence for the
    /// whole infinite tail.
    pub proof_bound: usize,
    pub periodic: Option<PeriodicPart>,
    pub aperiodic: Option<AperiodicPart>,
}

impl RhoMap {
    /// Source coordinate for `ρ(z)_α`, or `None` where `ρ(z)` takes the fill.
    pub fn relocate(&self, alpha: &Index) -> Option<Index> {
        if let Some(p) = &self.periodic {
            if let Some(t) = p.relocation.get(alpha) {
                return Some(t.clone());
            }
        }
        let ap = self.aperiodic.as_ref()?;
        let &(c, k) = ap.offsets.get(alpha)?;
        let plan = &ap.classes[c];
        let terms = &self.subsequence;
        let j = match plan.chain {
            ChainType::Lambda1 => {
                // n_i ≤ k < n_{i+1}; past the prefix, gaps exceed 2i
                let pos = terms.partition_point(|&n| (n as i64) <= k);
                if pos == 0 {
                    return None;
                }
                let i = pos; // 1-based index of n_i
                let ni = terms[pos - 1] as i64;
                if pos == terms.len() && k - ni > 2 * i as i64 {
                    return None;
                }
                k - ni
            }
            ChainType::Lambda2 => {
                let (i, ni) = terms
                    .iter()
                    .enumerate()
                    .map(|(p, &n)| (p as i64 + 1, n as i64))
                    .find(|&(i, n)| (k - n).abs() < i)?;
                debug_assert!(i >= 1);
                k - ni
            }
        };
        if j >= 0 {
            plan.forward.get(j as usize).cloned()
        } else {
            plan.backward.get((-j - 1) as usize).cloned()
        }
    }

    /// `ρ(z)_α`
    pub fn value(&self, z: &Configuration, alpha: &Index) -> Symbol {
        self.relocate(alpha).map_or(z.default_symbol(), |b| z.value_at(&b))
    }

    /// Index arithmetic: `r(φ^{n_i}(θ)) = θ` for all `θ ∈ H`, `i ≥ threshold`.
    pub fn check_guarantee(&self, map: &FunctionalMap) -> Result<bool> {
        Ok(self.first_good_index(map)? <= self.threshold.max(1))
    }

    /// Least 1-based `i0` with every `i ≥ i0` in the prefix passing.
    fn first_good_index(&self, map: &FunctionalMap) -> Result<usize> {
        let mut good_from = 1;
        for theta in self.window.iter() {
            let mut cur = theta.clone();
            let mut t = 0u64;
            for (p, &n) in self.subsequence.iter().enumerate() {
                cur = map.iterate(&cur, n - t)?;
                t = n;
                if self.relocate(&cur).as_ref() != Some(theta) {
                    good_from = good_from.max(p + 2);
                }
            }
        }
        Ok(good_from)
    }

    pub fn guarantee(&self) -> String {
        format!(
            "for every θ in the window and every selected i ≥ {} (proved for i ≥ {}): σ^(n_i)(ρ(z))_θ = z_θ",
            self.threshold, self.proof_bound
        )
    }
}

fn periodic_part(map: &FunctionalMap, coords: &[Index], terms: &[u64]) -> Result<(PeriodicPart, Vec<u64>, usize)> {
    let mut periods = BTreeMap::new();
    for a in coords {
        let k = period(map, a).map_err(|e| Error::Precondition(format!("{} is not periodic: {e}", map.label(a))))?;
        periods.insert(a.clone(), k);
    }
    let m = periods.values().copied().max().unwrap_or(1);
    let residues = congruence_refine(terms, m)?;
    let mut relocation = HashMap::new();
    for (a, &k) in &periods {
        let shift = k - residues.residues[&k] % k;
        let shift = if shift == k { 0 } else { shift };
        let cycle = map.orbit(a, k - 1)?;
        for (p, alpha) in cycle.iter().enumerate() {
            relocation.insert(alpha.clone(), cycle[(p + shift as usize) % k as usize].clone());
        }
    }
    let subsequence = residues.subsequence.clone();
    Ok((PeriodicPart { residues, periods, relocation }, subsequence, m as usize))
}

/// Class descriptor and its window members with offsets from the first one.
type ClassGroup = (ClassKind, Index, Vec<(Index, i64)>);

fn aperiodic_part(map: &FunctionalMap, coords: &[Index], terms: &[u64]) -> Result<(AperiodicPart, usize)> {
    // class descriptor -> members with offsets relative to the first member
    let mut groups: Vec<ClassGroup> = Vec::new();
    for theta in coords {
        let d = class_type(map, theta)?;
        if matches!(d.kind, ClassKind::Cycle { .. }) {
            return Err(Error::Precondition(format!("{} is periodic", map.label(theta))));
        }
        match groups.iter_mut().find(|(kind, rep, _)| *kind == d.kind && *rep == d.representative) {
            Some((_, _, members)) => {
                let first = members[0].0.clone();
                let Meeting::Met { steps_a, steps_b, .. } = first_meeting(map, &first, theta)? else {
                    return Err(Error::Invariant(format!("{first} and {theta} share a class but never meet")));
                };
                members.push((theta.clone(), steps_a as i64 - steps_b as i64));
            }
            None => groups.push((d.kind, d.representative, vec![(theta.clone(), 0)])),
        }
    }
    let n_last = terms.last().copied().unwrap_or(0);
    let mut classes = Vec::new();
    let mut offsets = HashMap::new();
    let mut spread = 0u64;
    for (c, (kind, _, members)) in groups.into_iter().enumerate() {
        let (mu, chain, base) = match kind {
            ClassKind::ChainN { root } => {
                // offsets measured from the root
                let first = &members[0].0;
                let mut cur = root.clone();
                let mut d = 0i64;
                while &cur != first {
                    if d as u64 > map.budget.steps {
                        return Err(Error::Undecided(format!("distance from root {root} to {first}")));
                    }
                    cur = map.apply(&cur)?;
                    d += 1;
                }
                (root, ChainType::Lambda1, d)
            }
            _ => {
                let (mu, off) = members.iter().min_by_key(|(_, o)| *o).cloned().expect("nonempty");
                (mu, ChainType::Lambda2, -off)
            }
        };
        let max_off = members.iter().map(|(_, o)| o + base).max().unwrap_or(0);
        spread = spread.max(max_off as u64);
        let horizon = n_last + max_off as u64 + 2 * terms.len() as u64 + 2;
        let forward = map.orbit(&mu, horizon)?;
        let mut backward = Vec::new();
        if chain == ChainType::Lambda2 {
            let mut cur = mu.clone();
            for _ in 0..terms.len() + 1 {
                match map.preimages(&cur) {
                    crate::index_maps::Preimages::Finite(v) if v.len() == 1 => {
                        cur = v[0].clone();
                        backward.push(cur.clone());
                    }
                    _ => break,
                }
            }
        }
        for (k, x) in forward.iter().enumerate() {
            offsets.entry(x.clone()).or_insert((c, k as i64));
        }
        for (k, x) in backward.iter().enumerate() {
            offsets.entry(x.clone()).or_insert((c, -(k as i64) - 1));
        }
        classes.push(ClassPlan { representative: mu, chain, forward, backward });
    }
    let proof = spread as usize + 2;
    Ok((AperiodicPart { classes, spread, offsets }, proof))
}

fn finish(map: &FunctionalMap, mut rho: RhoMap) -> Result<RhoMap> {
    let tight = rho.first_good_index(map)?;
    if tight > rho.proof_bound {
        return Err(Error::Invariant(format!(
            "guarantee fails at index {} although the construction proves it from {}",
            tight - 1,
            rho.proof_bound
        )));
    }
    rho.threshold = tight;
    Ok(rho)
}

pub fn build_rho_all_periodic(map: &FunctionalMap, a: &SequenceSpec, h: &Window) -> Result<RhoMap> {
    let terms = a.prefix();
    let (part, subsequence, proof_bound) = periodic_part(map, &h.coords(), &terms)?;
    finish(
        map,
        RhoMap {
            kind: RhoKind::AllPeriodic,
            subsequence,
            window: h.clone(),
            threshold: proof_bound,
            proof_bound,
            periodic: Some(part),
            aperiodic: None,
        },
    )
}

pub fn build_rho_aperiodic(map: &FunctionalMap, a: &SequenceSpec, h: &Window) -> Result<RhoMap> {
    for (what, v) in [("injective", decide_injective(map)), ("free of periodic points", decide_periodic_free(map))] {
        if !v.is_yes() {
            return Err(Error::Precondition(format!("map must be {what} ({v})")));
        }
    }
    let subsequence = gap_refine(&a.prefix(), usize::MAX);
    let (part, proof_bound) = aperiodic_part(map, &h.coords(), &subsequence)?;
    finish(
        map,
        RhoMap {
            kind: RhoKind::Aperiodic,
            subsequence,
            window: h.clone(),
            threshold: proof_bound,
            proof_bound,
            periodic: None,
            aperiodic: Some(part),
        },
    )
}

pub fn build_rho(map: &FunctionalMap, a: &SequenceSpec, h: &Window) -> Result<RhoMap> {
    let inj = decide_injective(map);
    if !inj.is_yes() {
        return Err(Error::Precondition(format!("map must be injective ({inj})")));
    }
    let mut periodic = Vec::new();
    let mut aperiodic = Vec::new();
    for theta in h.iter() {
        match orbit_fate(map, theta)? {
            OrbitFate::Cycle { .. } => periodic.push(theta.clone()),
            OrbitFate::Escapes { .. } => aperiodic.push(theta.clone()),
            OrbitFate::Unknown => {
                return Err(Error::Undecided(format!("periodicity of {} within {}", map.label(theta), map.budget)));
            }
        }
    }
    if aperiodic.is_empty() {
        return build_rho_all_periodic(map, a, h);
    }
    if periodic.is_empty() && decide_periodic_free(map).is_yes() {
        return build_rho_aperiodic(map, a, h);
    }
    let gaps = gap_refine(&a.prefix(), usize::MAX);
    let (ppart, subsequence, pbound) = periodic_part(map, &periodic, &gaps)?;
    if !has_growing_gaps(&subsequence) {
        return Err(Error::Invariant("congruence refinement lost the growing gaps".into()));
    }
    let (apart, abound) = aperiodic_part(map, &aperiodic, &subsequence)?;
    let proof_bound = pbound.max(abound);
    finish(
        map,
        RhoMap {
            kind: RhoKind::Product,
            subsequence,
            window: h.clone(),
            threshold: proof_bound,
            proof_bound,
            periodic: Some(ppart),
            aperiodic: Some(apart),
        },
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergenceFailure {
    pub trial: usize,
    /// 1-based subsequence index
    pub i: usize,
    pub theta: Index,
    pub expected: Symbol,
    pub got: Symbol,
    pub configuration: Configuration,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergenceOutcome {
    pub trials: usize,
    pub checked_indices: usize,
    pub failure: Option<ConvergenceFailure>,
}

impl ConvergenceOutcome {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Random-configuration check of `(z, σ^{n_i}(ρ(z))) ∈ α_H` for every selected
/// `i ≥ threshold` among the first terms of `a` that `ρ` selected.
pub fn verify_uniform_convergence(
    map: &FunctionalMap,
    rho: &RhoMap,
    a: &SequenceSpec,
    h: &Window,
    trials: usize,
    seed: u64,
    alphabet: crate::shift::Alphabet,
) -> Result<ConvergenceOutcome> {
    let available: std::collections::HashSet<u64> = a.prefix().into_iter().collect();
    // (i, θ, φ^{n_i}(θ), relocation)
    let mut probes = Vec::new();
    for theta in h.iter() {
        let mut cur = theta.clone();
        let mut t = 0u64;
        for (p, &n) in rho.subsequence.iter().enumerate() {
            cur = map.iterate(&cur, n - t)?;
            t = n;
            if p + 1 >= rho.threshold.max(1) && available.contains(&n) {
                probes.push((p + 1, theta.clone(), rho.relocate(&cur)));
            }
        }
    }
    let mut relevant: Vec<Index> = h.coords();
    relevant.extend(probes.iter().filter_map(|(_, _, r)| r.clone()));
    relevant.sort();
    relevant.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let fill = rng.gen_range(0..alphabet.size());
        let z = Configuration::new(alphabet, fill, relevant.iter().map(|c| (c.clone(), rng.gen_range(0..alphabet.size()))))?;
        for (i, theta, target) in &probes {
            let expected = z.value_at(theta);
            let got = target.as_ref().map_or(z.default_symbol(), |b| z.value_at(b));
            if got != expected {
                return Ok(ConvergenceOutcome {
                    trials: trial + 1,
                    checked_indices: probes.len(),
                    failure: Some(ConvergenceFailure {
                        trial,
                        i: *i,
                        theta: theta.clone(),
                        expected,
                        got,
                        configuration: z,
                    }),
                });
            }
        }
    }
    Ok(ConvergenceOutcome { trials, checked_indices: probes.len(), failure: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index_maps::{idx, Guard, Piecewise, SubRule};
    use crate::shift::Alphabet;

    fn converges(map: &FunctionalMap, rho: &RhoMap, a: &SequenceSpec) -> bool {
        verify_uniform_convergence(map, rho, a, &rho.window, 50, 7, Alphabet::binary()).unwrap().passed()
    }

    #[test]
    fn three_cycle() {
        let m = FunctionalMap::table(&[1, 2, 0]).unwrap();
        let a = SequenceSpec::naturals(500);
        let h = Window::from_ints(&[0, 1, 2]).unwrap();
        let rho = build_rho(&m, &a, &h).unwrap();
        assert_eq!(rho.kind, RhoKind::AllPeriodic);
        let f3 = rho.periodic.as_ref().unwrap().residues.residues[&3];
        for (p, &n) in rho.subsequence.iter().enumerate().skip(2) {
            for th in 0..3 {
                assert_eq!(m.iterate(&idx(th), 3 - f3 + n).unwrap(), idx(th), "i = {}", p + 1);
            }
        }
        assert!(rho.check_guarantee(&m).unwrap());
        assert!(converges(&m, &rho, &a));
    }

    #[test]
    fn fixed_point_is_identity() {
        let m = FunctionalMap::table(&[0]).unwrap();
        let a = SequenceSpec::arithmetic(4, 7, 30).unwrap();
        let rho = build_rho(&m, &a, &Window::from_ints(&[0]).unwrap()).unwrap();
        assert_eq!(rho.relocate(&idx(0)), Some(idx(0)));
        assert_eq!(rho.threshold, 1);
    }

    #[test]
    fn negation_on_even_times() {
        let m = FunctionalMap::affine(-1, 0);
        let a = SequenceSpec::arithmetic(2, 2, 40).unwrap();
        let rho = build_rho(&m, &a, &Window::from_ints(&[3, -3]).unwrap()).unwrap();
        let p = rho.periodic.as_ref().unwrap();
        assert_eq!(p.residues.residues[&2], 2);
        assert_eq!(rho.relocate(&idx(3)), Some(idx(3)));
        assert!(converges(&m, &rho, &a));
    }

    #[test]
    fn translation_chain() {
        let m = FunctionalMap::affine(1, 1);
        let a = SequenceSpec::naturals(1000);
        let rho = build_rho(&m, &a, &Window::from_ints(&[0]).unwrap()).unwrap();
        assert_eq!(rho.kind, RhoKind::Aperiodic);
        let ap = rho.aperiodic.as_ref().unwrap();
        assert_eq!((ap.spread, rho.proof_bound), (0, 2));
        assert_eq!(ap.classes[0].chain, ChainType::Lambda2);
        assert!(rho.check_guarantee(&m).unwrap());
        assert!(converges(&m, &rho, &a));
        let m2 = FunctionalMap::affine(1, 2);
        let rho = build_rho(&m2, &a, &Window::from_ints(&[0, 2]).unwrap()).unwrap();
        assert_eq!((rho.aperiodic.as_ref().unwrap().spread, rho.proof_bound), (1, 3));
        assert!(converges(&m2, &rho, &a));
    }

    #[test]
    fn rooted_chain() {
        let m = FunctionalMap::affine(2, 0);
        let a = SequenceSpec::naturals(200);
        let rho = build_rho(&m, &a, &Window::from_ints(&[12, 5]).unwrap()).unwrap();
        let ap = rho.aperiodic.as_ref().unwrap();
        assert!(ap.classes.iter().all(|c| c.chain == ChainType::Lambda1));
        assert!(rho.check_guarantee(&m).unwrap());
        assert!(converges(&m, &rho, &a));
    }

    #[test]
    fn mixed_product() {
        let pw = Piecewise::new(
            vec![(Guard::Point(idx(0)), SubRule::affine(1, 0)), (Guard::Point(idx(-1)), SubRule::constant(1))],
            SubRule::affine(1, 1),
        )
        .unwrap();
        let m = FunctionalMap::piecewise(pw);
        let a = SequenceSpec::naturals(3000);
        let rho = build_rho(&m, &a, &Window::from_ints(&[0, 1, 5]).unwrap()).unwrap();
        assert_eq!(rho.kind, RhoKind::Product);
        assert!(rho.check_guarantee(&m).unwrap());
        assert!(converges(&m, &rho, &a));
    }

    #[test]
    fn lowered_threshold_is_caught() {
        let m = FunctionalMap::table(&[1, 2, 0]).unwrap();
        let a = SequenceSpec::naturals(500);
        let mut rho = build_rho(&m, &a, &Window::from_ints(&[0, 1, 2]).unwrap()).unwrap();
        assert!(rho.threshold > 1);
        rho.threshold -= 1;
        assert!(!rho.check_guarantee(&m).unwrap());
        assert!(!converges(&m, &rho, &a));
    }

    #[test]
    fn preconditions() {
        let a = SequenceSpec::naturals(100);
        let h = Window::from_ints(&[0]).unwrap();
        assert!(matches!(build_rho(&FunctionalMap::square_plus(1), &a, &h), Err(Error::Precondition(_))));
        assert!(build_rho_aperiodic(&FunctionalMap::affine(-1, 0), &a, &h).is_err());
        assert!(build_rho_all_periodic(&FunctionalMap::affine(1, 1), &a, &h).is_err());
    }
}
