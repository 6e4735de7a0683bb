//! Brute-force checkers working straight from the definitions, used to
//! validate decisions and witnesses on small instances.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::{builtins, classify, discrepancy, Discrepancy};
use crate::error::{Error, Result};
use crate::fort::{
    build_fort_rho, decide_fort_spec, decide_fort_strobo, decide_fort_weak_spec, eventual_image, fort_gap_constant,
    validate_continuity, FortSystem, FortWindow, PointSet,
};
use crate::index_maps::{Certificate, Decision, FunctionalMap, Index};
use crate::shift::{Alphabet, Configuration, Symbol, Window};
use crate::specification::{decide_spec, decide_weak_spec, refute_weak_spec, SpecInstance};
use crate::strobo::{build_rho, decide_strobo, decide_strong_strobo, verify_uniform_convergence, SequenceSpec};

/// Largest search space the enumerations accept.
pub const SEARCH_LIMIT: u64 = 1 << 20;

/// `φ^t(h)` by plain repeated application.
fn walk(map: &FunctionalMap, h: &Index, t: u64) -> Result<Index> {
    let mut cur = h.clone();
    for _ in 0..t {
        cur = map.apply(&cur)?;
    }
    Ok(cur)
}

/// Coordinates any window check of the instance reads.
pub fn relevant_support(map: &FunctionalMap, inst: &SpecInstance) -> Result<Vec<Index>> {
    let mut out = BTreeSet::new();
    for h in inst.target().iter() {
        let mut cur = h.clone();
        out.insert(cur.clone());
        for _ in 0..inst.horizon() {
            cur = map.apply(&cur)?;
            out.insert(cur.clone());
        }
    }
    Ok(out.into_iter().collect())
}

/// First configuration (lexicographic over `support`, off-support value
/// `fill`) that traces every segment of `inst` on its window.
pub fn exhaustive_tracer_search(
    map: &FunctionalMap,
    inst: &SpecInstance,
    support: &[Index],
    fill: Symbol,
) -> Result<Option<Configuration>> {
    let support: Vec<Index> = support.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let q = inst.alphabet().size() as u64;
    let space = (q as f64).powi(support.len() as i32);
    if space > SEARCH_LIMIT as f64 {
        return Err(Error::Budget(format!("{q}^{} configurations exceed {SEARCH_LIMIT}", support.len())));
    }
    let slot: BTreeMap<&Index, usize> = support.iter().enumerate().map(|(k, c)| (c, k)).collect();
    // (slot or fill marker, required symbol)
    let mut constraints: Vec<(Option<usize>, Symbol)> = Vec::new();
    for (y, &(l, k)) in inst.segments().iter().zip(inst.windows()) {
        for h in inst.target().iter() {
            let mut pos = walk(map, h, l)?;
            for t in l..=k {
                if t > l {
                    pos = map.apply(&pos)?;
                }
                let need = y.value_at(&pos);
                match slot.get(&pos) {
                    Some(&s) => constraints.push((Some(s), need)),
                    None => {
                        return Err(Error::Precondition(format!("coordinate {pos} read at time {t} is off the support")));
                    }
                }
            }
        }
    }
    constraints.sort_unstable();
    constraints.dedup();
    let n = support.len();
    let mut digits = vec![0 as Symbol; n];
    let total = q.pow(n as u32);
    for _ in 0..total {
        if constraints.iter().all(|&(s, need)| s.map_or(fill, |s| digits[s]) == need) {
            let z = Configuration::new(inst.alphabet(), fill, support.iter().cloned().zip(digits.iter().copied()))?;
            return Ok(Some(z));
        }
        // odometer, last coordinate fastest
        for d in digits.iter_mut().rev() {
            *d += 1;
            if u64::from(*d) < q {
                break;
            }
            *d = 0;
        }
    }
    Ok(None)
}

/// All `nⁿ` tables on `n ≤ 5` atoms, images ordered lexicographically.
pub fn enumerate_small_maps(n: usize) -> Result<impl Iterator<Item = FunctionalMap>> {
    if n == 0 || n > 5 {
        return Err(Error::Precondition(format!("enumeration supports 1 to 5 atoms, got {n}")));
    }
    let total = n.pow(n as u32);
    Ok((0..total).map(move |mut code| {
        let mut images = vec![0; n];
        for slot in images.iter_mut().rev() {
            *slot = code % n;
            code /= n;
        }
        FunctionalMap::table(&images).expect("images in range")
    }))
}

fn is_permutation(images: &[usize]) -> bool {
    let mut seen = vec![false; images.len()];
    images.iter().all(|&k| !std::mem::replace(&mut seen[k], true))
}

/// Finite-window surrogate for `z ∈ ω(A, x)`: some selected time past
/// `horizon` (a position in the prefix) brings `σ^{n_i}(x)` into agreement
/// with `z` on `H`.
pub fn omega_window_check(
    map: &FunctionalMap,
    x: &Configuration,
    z: &Configuration,
    a: &SequenceSpec,
    h: &Window,
    horizon: usize,
) -> Result<bool> {
    let mut pos: Vec<(Index, Index)> = h.iter().map(|c| (c.clone(), c.clone())).collect();
    let mut t = 0u64;
    for (i, n) in a.prefix().into_iter().enumerate() {
        for (_, p) in pos.iter_mut() {
            *p = walk(map, p, n - t)?;
        }
        t = n;
        if i >= horizon && pos.iter().all(|(c, p)| x.value_at(p) == z.value_at(c)) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// For a collision `φ(β) = φ(λ)` every configuration has
/// `σⁿ(x)_β = σⁿ(x)_λ` for `n ≥ 1`. Checked over all binary
/// configurations on the atoms, for `n ≤ |Γ| + 1`.
pub fn collision_obstruction(map: &FunctionalMap, beta: &Index, lambda: &Index) -> Result<bool> {
    let atoms = map.atoms().ok_or_else(|| Error::Precondition("needs a finite domain".into()))?;
    if atoms.len() > 16 {
        return Err(Error::Budget("more than 16 atoms".into()));
    }
    let bin = Alphabet::binary();
    for mask in 0u32..(1 << atoms.len()) {
        let x = Configuration::new(bin, 0, atoms.iter().enumerate().map(|(k, a)| (a.clone(), (mask >> k) & 1)))?;
        for n in 1..=atoms.len() as u64 + 1 {
            if x.value_at(&walk(map, beta, n)?) != x.value_at(&walk(map, lambda, n)?) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `⋂ 𝔥ⁿ(F)` of a finite Fort system by iterating images until stable.
pub fn literal_eventual_image(images: &[usize]) -> BTreeSet<usize> {
    let mut cur: BTreeSet<usize> = (0..images.len()).collect();
    loop {
        let next: BTreeSet<usize> = cur.iter().map(|&k| images[k]).collect();
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomStats {
    pub atoms: usize,
    pub maps: usize,
    pub strobo_yes: usize,
    pub weak_spec_yes: usize,
    pub fort_weak_spec_yes: usize,
    pub fort_strobo_yes: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrosscheckReport {
    pub stats: Vec<AtomStats>,
    pub checks: usize,
    pub disagreements: Vec<String>,
    /// Diagram placements the computation contradicts; reported, not failures.
    pub discrepancies: Vec<Discrepancy>,
}

impl CrosscheckReport {
    pub fn passed(&self) -> bool {
        self.disagreements.is_empty()
    }

    fn expect(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.disagreements.push(what());
        }
    }

    fn expect_ok<T>(&mut self, r: Result<T>, what: impl FnOnce() -> String) -> Option<T> {
        self.checks += 1;
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.disagreements.push(format!("{}: {e}", what()));
                None
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CrosscheckOptions {
    pub atoms: usize,
    pub seed: u64,
    /// Random sequence prefixes per bijective table.
    pub sequences: usize,
}

impl CrosscheckOptions {
    pub fn new(atoms: usize, seed: u64) -> Self {
        CrosscheckOptions { atoms, seed, sequences: 20 }
    }
}

/// Random strictly increasing prefix with steps in `1..=4`.
fn random_sequence(rng: &mut ChaCha8Rng, len: usize) -> SequenceSpec {
    let mut terms = Vec::with_capacity(len);
    let mut cur = rng.gen_range(0..5u64);
    for _ in 0..len {
        terms.push(cur);
        cur += rng.gen_range(1..=4);
    }
    SequenceSpec::explicit(terms).expect("strictly increasing")
}

fn check_shift_table(map: &FunctionalMap, images: &[usize], rng: &mut ChaCha8Rng, opts: &CrosscheckOptions, r: &mut CrosscheckReport, st: &mut AtomStats) {
    let name = || format!("table {images:?}");
    let weak = decide_weak_spec(map);
    r.expect(weak.is_no() && weak.check(map), || format!("{}: weak spec should be a certified No, got {weak}", name()));
    if weak.is_yes() {
        st.weak_spec_yes += 1;
    }
    r.expect(decide_spec(map).is_no(), || format!("{}: spec should be No", name()));
    r.expect(decide_strong_strobo(map).is_no(), || format!("{}: strong strobo should be No", name()));
    let strobo = decide_strobo(map);
    let bij = is_permutation(images);
    r.expect(strobo.is_yes() == bij && strobo.check(map), || format!("{}: strobo {strobo} but bijective = {bij}", name()));
    if strobo.is_yes() {
        st.strobo_yes += 1;
    }
    // refutation instance admits no tracer
    if let Certificate::PeriodicWitness { .. } = &weak.certificate {
        for gap in [0, 2] {
            let Some(rf) = r.expect_ok(refute_weak_spec(map, &weak.certificate, Alphabet::binary(), gap), || {
                format!("{}: refutation", name())
            }) else {
                continue;
            };
            r.expect(rf.verify(map), || format!("{}: refutation rejected", name()));
            let support = relevant_support(map, &rf.instance);
            if let Some(found) = r.expect_ok(
                support.and_then(|s| exhaustive_tracer_search(map, &rf.instance, &s, 0)),
                || format!("{}: tracer search", name()),
            ) {
                r.expect(found.is_none(), || format!("{}: refutation instance has a tracer {found:?}", name()));
            }
        }
    }
    if bij {
        let h = Window::new(map.atoms().expect("finite")).expect("nonempty");
        for _ in 0..opts.sequences {
            let a = random_sequence(rng, 80);
            let seed = rng.gen();
            let outcome = build_rho(map, &a, &h).and_then(|rho| {
                let exact = rho.check_guarantee(map)?;
                let conv = verify_uniform_convergence(map, &rho, &a, &h, 4, seed, Alphabet::binary())?;
                Ok(exact && conv.passed())
            });
            if let Some(ok) = r.expect_ok(outcome, || format!("{}: ρ on {a}", name())) {
                r.expect(ok, || format!("{}: ρ verification failed on {a}", name()));
            }
        }
    } else {
        let (beta, lambda) = collision(images).expect("non-injective");
        if let Some(ok) = r.expect_ok(collision_obstruction(map, &beta, &lambda), || format!("{}: obstruction", name())) {
            r.expect(ok, || format!("{}: collision coordinates separate", name()));
        }
    }
}

fn collision(images: &[usize]) -> Option<(Index, Index)> {
    for i in 0..images.len() {
        for j in i + 1..images.len() {
            if images[i] == images[j] {
                return Some((Index::from(i), Index::from(j)));
            }
        }
    }
    None
}

fn check_fort_table(images: &[usize], rng: &mut ChaCha8Rng, r: &mut CrosscheckReport, st: &mut AtomStats) {
    let name = || format!("Fort table {images:?} with b = atom 0");
    let Some(sys) = r.expect_ok(FortSystem::finite(images, 0), name) else { return };
    r.expect(validate_continuity(&sys).is_yes(), || format!("{}: finite map not continuous", name()));
    let literal = literal_eventual_image(images);
    let Some(ev) = r.expect_ok(eventual_image(&sys), || format!("{}: eventual image", name())) else { return };
    let computed: BTreeSet<usize> = match &ev.set {
        PointSet::Finite(v) => v.iter().map(|i| usize::try_from(i).expect("atom")).collect(),
        other => {
            r.expect(false, || format!("{}: non-finite eventual image {other:?}", name()));
            return;
        }
    };
    r.expect(computed == literal, || format!("{}: eventual image {computed:?} vs literal {literal:?}", name()));
    let weak = decide_fort_weak_spec(&sys).unwrap_or_else(crate::index_maps::Verdict::unknown);
    r.expect(weak.is_yes() == (literal.len() == 1), || format!("{}: weak spec {weak}", name()));
    let strobo = decide_fort_strobo(&sys).unwrap_or_else(crate::index_maps::Verdict::unknown);
    let bij = is_permutation(images);
    r.expect(strobo.is_yes() == bij && strobo.check(sys.map()), || format!("{}: strobo {strobo}", name()));
    let spec = decide_fort_spec(&sys);
    r.expect(spec.is_yes() == (images.len() == 1), || format!("{}: spec {spec}", name()));
    if spec.is_yes() {
        r.expect(weak.is_yes() && strobo.is_yes(), || format!("{}: spec without its consequences", name()));
    }
    if weak.is_yes() {
        st.fort_weak_spec_yes += 1;
    }
    if strobo.is_yes() {
        st.fort_strobo_yes += 1;
    }
    let window: Vec<Index> = (1..images.len()).map(Index::from).collect();
    if window.is_empty() {
        return;
    }
    let Some(w) = r.expect_ok(FortWindow::new(&sys, window), name) else { return };
    if weak.is_yes() {
        if let Some(gap) = r.expect_ok(fort_gap_constant(&sys, &w), || format!("{}: gap constant", name())) {
            // independent replay: 𝔥^i(F) avoids the window (b-case) or is {c}
            let c = *literal.iter().next().expect("singleton");
            let mut img: BTreeSet<usize> = (0..images.len()).collect();
            for _ in 0..gap.m {
                img = img.iter().map(|&k| images[k]).collect();
            }
            let mut ok = true;
            for _ in 0..=images.len() {
                ok &= if c == 0 { w.iter().all(|y| !img.contains(&usize::try_from(y).expect("atom"))) } else { img == BTreeSet::from([c]) };
                img = img.iter().map(|&k| images[k]).collect();
            }
            r.expect(ok, || format!("{}: gap constant {} fails", name(), gap.m));
            let verified = gap.verify(&sys, &w);
            r.expect(matches!(verified, Ok(true)), || format!("{}: gap verifier {verified:?}", name()));
        }
    }
    if bij {
        let a = random_sequence(rng, 120);
        if let Some(rho) = r.expect_ok(build_fort_rho(&sys, &a, &w), || format!("{}: Fort ρ", name())) {
            let exact = rho.verify_exact(&sys);
            r.expect(rho.check_arithmetic() && matches!(exact, Ok(true)), || format!("{}: Fort ρ fails", name()));
        }
    }
}

/// Runs every decision procedure, witness builder and oracle over all tables
/// on `1..=atoms` atoms, the same tables as Fort systems with `b` the first
/// atom, and the builtin systems.
pub fn crosscheck(opts: CrosscheckOptions) -> Result<CrosscheckReport> {
    let mut r = CrosscheckReport::default();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for n in 1..=opts.atoms {
        let mut st = AtomStats { atoms: n, ..AtomStats::default() };
        for map in enumerate_small_maps(n)? {
            let images = map.table_images().expect("table").to_vec();
            st.maps += 1;
            check_shift_table(&map, &images, &mut rng, &opts, &mut r, &mut st);
            check_fort_table(&images, &mut rng, &mut r, &mut st);
        }
        let perms = (1..=n).product::<usize>();
        r.expect(st.strobo_yes == perms, || format!("{n} atoms: {} bijections found, expected {perms}", st.strobo_yes));
        r.stats.push(st);
    }
    for b in builtins() {
        let c = classify(&b.system);
        r.expect(!c.any_unknown(), || format!("{}: undecided {:?}", b.name, c.decisions()));
        if let Some(d) = discrepancy(&b, &c) {
            // the drawn placement of D1 contradicts its eventual image; any other mismatch is a failure
            let known = b.name == "D1"
                && c.eventual_image.as_ref().is_some_and(|s| *s == PointSet::AllExcept(vec![Index::from(1)]));
            r.expect(known, || format!("{}: {}", b.name, d.note));
            r.discrepancies.push(d);
        }
        let weak_shift = matches!(b.system, crate::catalog::System::Shift(_)) && c.weak_spec.is_yes();
        if weak_shift {
            if let crate::catalog::System::Shift(m) = &b.system {
                tracing_crosscheck(b.name, m, &mut r);
            }
        }
    }
    Ok(r)
}

/// Builds a tracer on a small two-segment instance and confirms it against
/// the exhaustive search.
fn tracing_crosscheck(name: &str, map: &FunctionalMap, r: &mut CrosscheckReport) {
    let bin = Alphabet::binary();
    let run = || -> Result<bool> {
        let h = Window::from_ints(&[1])?;
        let gap = crate::specification::gap_bound(map, &h)?;
        let y1 = Configuration::new(bin, 0, [(crate::index_maps::idx(1), 1)])?;
        let y2 = Configuration::constant(bin, 1)?;
        let inst = SpecInstance::new(vec![y1, y2], vec![(0, 1), (1 + gap, 2 + gap)], h)?;
        let report = crate::specification::build_tracing_point(map, &inst, 0)?;
        let support = relevant_support(map, &inst)?;
        let found = exhaustive_tracer_search(map, &inst, &support, 0)?;
        Ok(report.passed() && found.is_some())
    };
    let outcome = run();
    r.expect(matches!(outcome, Ok(true)), || format!("{name}: tracing cross-check {outcome:?}"));
}

/// Decision shorthand used by reports.
pub fn decision_label(d: Decision) -> &'static str {
    match d {
        Decision::Yes => "Yes",
        Decision::No => "No",
        Decision::Unknown => "Unknown",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index_maps::idx;
    use crate::specification::build_tracing_point;

    #[test]
    fn small_map_counts() {
        assert_eq!(enumerate_small_maps(1).unwrap().count(), 1);
        assert_eq!(enumerate_small_maps(2).unwrap().count(), 4);
        assert_eq!(enumerate_small_maps(3).unwrap().count(), 27);
        let first: Vec<_> = enumerate_small_maps(2).unwrap().map(|m| m.table_images().unwrap().to_vec()).collect();
        assert_eq!(first, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert!(enumerate_small_maps(6).is_err());
    }

    #[test]
    fn tracer_matches_construction() {
        let m = FunctionalMap::affine(1, 1);
        let bin = Alphabet::binary();
        let y1 = Configuration::new(bin, 0, [(idx(0), 1), (idx(1), 1)]).unwrap();
        let y2 = Configuration::constant(bin, 0).unwrap();
        let inst = SpecInstance::new(vec![y1, y2], vec![(0, 1), (3, 4)], Window::from_ints(&[0]).unwrap()).unwrap();
        let built = build_tracing_point(&m, &inst, 0).unwrap().tracer;
        let support = relevant_support(&m, &inst).unwrap();
        let found = exhaustive_tracer_search(&m, &inst, &support, 0).unwrap().unwrap();
        for c in &support {
            assert_eq!(found.value_at(c), built.value_at(c));
        }
    }

    #[test]
    fn single_segment_is_its_own_tracer() {
        let m = FunctionalMap::affine(1, 1);
        let y = Configuration::new(Alphabet::binary(), 0, [(idx(2), 1)]).unwrap();
        let inst = SpecInstance::new(vec![y.clone()], vec![(0, 3)], Window::from_ints(&[0]).unwrap()).unwrap();
        let support = relevant_support(&m, &inst).unwrap();
        let z = exhaustive_tracer_search(&m, &inst, &support, 0).unwrap().unwrap();
        assert_eq!(z, y);
    }

    #[test]
    fn fixed_point_refutation_has_no_tracer() {
        let m = FunctionalMap::table(&[0]).unwrap();
        let w = decide_weak_spec(&m);
        let rf = refute_weak_spec(&m, &w.certificate, Alphabet::binary(), 3).unwrap();
        let support = relevant_support(&m, &rf.instance).unwrap();
        assert_eq!(exhaustive_tracer_search(&m, &rf.instance, &support, 0).unwrap(), None);
    }

    #[test]
    fn omega_examples() {
        let bin = Alphabet::binary();
        let neg = FunctionalMap::affine(-1, 0);
        let x = Configuration::new(bin, 0, [(idx(2), 1), (idx(-3), 1)]).unwrap();
        let evens = SequenceSpec::arithmetic(2, 2, 20).unwrap();
        let h = Window::from_ints(&[2, 3, -3]).unwrap();
        assert!(omega_window_check(&neg, &x, &x, &evens, &h, 10).unwrap());
        let collapse = FunctionalMap::table(&[1, 1]).unwrap();
        let x = Configuration::new(bin, 0, [(idx(0), 1)]).unwrap();
        let z = Configuration::new(bin, 0, [(idx(1), 1)]).unwrap();
        let h = Window::from_ints(&[0, 1]).unwrap();
        assert!(!omega_window_check(&collapse, &x, &z, &SequenceSpec::naturals(30), &h, 0).unwrap());
        let with_zero = SequenceSpec::explicit(vec![0, 5]).unwrap();
        assert!(omega_window_check(&collapse, &x, &x, &with_zero, &h, 0).unwrap());
    }

    #[test]
    fn obstruction_on_collision() {
        let m = FunctionalMap::table(&[2, 2, 0]).unwrap();
        assert!(collision_obstruction(&m, &idx(0), &idx(1)).unwrap());
        let bij = FunctionalMap::table(&[1, 0]).unwrap();
        assert!(!collision_obstruction(&bij, &idx(0), &idx(1)).unwrap());
    }

    #[test]
    fn crosscheck_three_atoms() {
        let r = crosscheck(CrosscheckOptions { atoms: 3, seed: 1, sequences: 3 }).unwrap();
        assert!(r.passed(), "{:#?}", r.disagreements);
        assert_eq!(r.stats[2].maps, 27);
        assert_eq!(r.stats[2].strobo_yes, 6);
        assert_eq!(r.stats[2].weak_spec_yes, 0);
        assert_eq!(r.discrepancies.len(), 1);
        assert_eq!(r.discrepancies[0].name, "D1");
    }
}
