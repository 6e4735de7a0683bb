//! Dynamical systems on Fort spaces: a discrete set `F ∖ {b}` compactified by
//! the particular point `b`.
//!
//! Points are indices of a [`FunctionalMap`] whose domain is all of `F`, with
//! `b` one of them. Integer systems are certified only for guarded rules with
//! bounded guards; everything else answers Unknown.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index_maps::{
    idx, orbit_fate, Certificate, Decision, FunctionalMap, Index, OrbitFate, Piecewise, Preimages, SubRule, Verdict,
};
use crate::strobo::{congruence_refine, ResidueTable, SequenceSpec};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FortSystem {
    map: FunctionalMap,
    base: Index,
    /// Outcome of [`validate_continuity`] at construction.
    pub continuity: Decision,
}

impl FortSystem {
    pub fn new(map: FunctionalMap, base: Index) -> Result<Self> {
        if !map.domain().contains(&base) {
            return Err(Error::Domain { index: base });
        }
        let mut sys = FortSystem { map, base, continuity: Decision::Unknown };
        sys.continuity = validate_continuity(&sys).decision;
        Ok(sys)
    }

    /// Finite `F` as atoms `0..n`; `images[k]` is the image of atom `k`.
    pub fn finite(images: &[usize], base: usize) -> Result<Self> {
        FortSystem::new(FunctionalMap::table(images)?, Index::from(base))
    }

    /// `F = {b}`.
    pub fn singleton() -> Self {
        FortSystem::finite(&[0], 0).expect("one atom")
    }

    pub fn integers(pw: Piecewise, base: i64) -> Result<Self> {
        FortSystem::new(FunctionalMap::piecewise(pw), idx(base))
    }

    pub fn map(&self) -> &FunctionalMap {
        &self.map
    }

    pub fn base(&self) -> &Index {
        &self.base
    }

    pub fn label(&self, p: &Index) -> String {
        if *p == self.base {
            "b".into()
        } else {
            self.map.label(p)
        }
    }

    /// `𝔥(p)`
    pub fn apply(&self, p: &Index) -> Result<Index> {
        self.map.apply(p)
    }

    fn require_continuous(&self) -> Result<()> {
        match self.continuity {
            Decision::Yes => Ok(()),
            Decision::No => Err(Error::Precondition("map is not continuous on the Fort space".into())),
            Decision::Unknown => Err(Error::Undecided("continuity of the map".into())),
        }
    }

    fn integer_rule(&self) -> Option<(Piecewise, BigInt)> {
        let pw = self.map.integer_view()?;
        let radius = pw.core_radius()?;
        Some((pw, radius))
    }
}

impl fmt::Display for FortSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fort system on {} with b = {}", self.map.describe(), self.map.label(&self.base))
    }
}

/// Finite set of points of `F ∖ {b}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FortWindow {
    coords: BTreeSet<Index>,
}

impl FortWindow {
    pub fn new(sys: &FortSystem, coords: impl IntoIterator<Item = Index>) -> Result<Self> {
        let coords: BTreeSet<Index> = coords.into_iter().collect();
        for c in &coords {
            if *c == sys.base {
                return Err(Error::Instance("a Fort window cannot contain the particular point".into()));
            }
            if !sys.map.domain().contains(c) {
                return Err(Error::Domain { index: c.clone() });
            }
        }
        Ok(FortWindow { coords })
    }

    pub fn from_ints(sys: &FortSystem, coords: &[i64]) -> Result<Self> {
        FortWindow::new(sys, coords.iter().map(|&c| idx(c)))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Index> {
        self.coords.iter()
    }

    pub fn contains(&self, p: &Index) -> bool {
        self.coords.contains(p)
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

/// `(x, y) ∈ γ_H`: equal, or both off the window.
pub fn fort_entourage_check(x: &Index, y: &Index, h: &FortWindow) -> bool {
    x == y || (!h.contains(x) && !h.contains(y))
}

fn is_constant(r: &SubRule) -> Option<&BigInt> {
    match r {
        SubRule::Affine { a, b } if a.is_zero() => Some(b),
        _ => None,
    }
}

/// Continuity on the Fort space: either `𝔥(b) = b` with finite fibers over
/// every other point, or `𝔥(b) ≠ b` with all but finitely many points sent to
/// `𝔥(b)`.
pub fn validate_continuity(sys: &FortSystem) -> Verdict {
    if sys.map.is_finite() {
        return Verdict::yes(Certificate::Analytic { reason: "finite space: every fiber is finite".into() });
    }
    let Some(pw) = sys.map.integer_view() else {
        return Verdict::unknown("rule class");
    };
    let hb = match sys.map.apply(&sys.base) {
        Ok(v) => v,
        Err(e) => return Verdict::unknown(e),
    };
    // (guard description, constant value) for every branch over an infinite set
    let mut infinite_parts: Vec<(String, Option<BigInt>)> = pw
        .branches
        .iter()
        .filter(|(g, _)| g.bounds().is_none())
        .map(|(g, r)| (g.to_string(), is_constant(r).cloned()))
        .collect();
    infinite_parts.push(("outside the guards".into(), is_constant(&pw.default).cloned()));
    if hb == sys.base {
        for (place, c) in &infinite_parts {
            if let Some(c) = c {
                if *c != sys.base {
                    return Verdict::no(Certificate::Analytic {
                        reason: format!("b is fixed but {} has an infinite fiber ({place})", sys.label(c)),
                    });
                }
            }
        }
        Verdict::yes(Certificate::Analytic {
            reason: "b is fixed and every branch over an infinite set is injective or constant b".into(),
        })
    } else {
        for (place, c) in &infinite_parts {
            if c.as_ref() != Some(&hb) {
                return Verdict::no(Certificate::Analytic {
                    reason: format!(
                        "𝔥(b) = {} but infinitely many points ({place}) avoid its fiber",
                        sys.label(&hb)
                    ),
                });
            }
        }
        Verdict::yes(Certificate::Analytic {
            reason: format!("all but finitely many points map to 𝔥(b) = {}", sys.label(&hb)),
        })
    }
}

/// Set of points of `F`, described finitely.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointSet {
    Finite(Vec<Index>),
    /// Every point of `F` except the listed ones.
    AllExcept(Vec<Index>),
    /// Infinite, with a certified description.
    Infinite(String),
}

impl PointSet {
    pub fn singleton(&self) -> Option<&Index> {
        match self {
            PointSet::Finite(v) if v.len() == 1 => Some(&v[0]),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventualImage {
    /// `⋂ 𝔥ⁿ(F)`
    pub set: PointSet,
    pub singleton: Verdict,
}

/// Minimal period, `None` when the point never returns.
fn period_of(map: &FunctionalMap, x: &Index) -> Result<Option<u64>> {
    match orbit_fate(map, x)? {
        OrbitFate::Cycle { period, .. } => {
            let mut cur = x.clone();
            for k in 1..=period {
                cur = map.apply(&cur)?;
                if &cur == x {
                    return Ok(Some(k));
                }
            }
            Ok(None)
        }
        OrbitFate::Escapes { .. } => Ok(None),
        OrbitFate::Unknown => Err(Error::Undecided(format!("periodicity of {} within {}", map.label(x), map.budget))),
    }
}

fn range(r: &BigInt) -> impl Iterator<Item = BigInt> {
    let lo = -r.clone();
    let hi = r.clone();
    num_iter(lo, hi)
}

fn num_iter(lo: BigInt, hi: BigInt) -> impl Iterator<Item = BigInt> {
    let mut cur = lo;
    std::iter::from_fn(move || {
        if cur > hi {
            return None;
        }
        let out = cur.clone();
        cur += 1;
        Some(out)
    })
}

/// Shape of an integer system with `𝔥(b) = b` beyond a scan radius.
enum Far {
    /// Every point beyond the radius lies on a cycle.
    Periodic,
    /// Points beyond the radius have no periodic points; `⋂` is `Per(𝔥)`.
    Transient,
    /// Translation by `b`: the source side survives, never periodic.
    Source { step: BigInt },
}

fn far_shape(pw: &Piecewise, radius: &BigInt, base: &Index) -> (Far, BigInt) {
    let r = radius.max(&base.abs()).clone();
    match &pw.default {
        SubRule::Affine { a, b } if a == &BigInt::from(1) && b.is_zero() => (Far::Periodic, r + 1),
        SubRule::Affine { a, b } if a == &BigInt::from(-1) => (Far::Periodic, r + b.abs() + 1),
        SubRule::Affine { a, b } if a == &BigInt::from(1) => (Far::Source { step: b.clone() }, r + b.abs() + 1),
        SubRule::Affine { a, b } if a.is_zero() => (Far::Transient, r.max(b.abs()) + 1),
        SubRule::Affine { b, .. } => (Far::Transient, r.max(b.abs()) + 1),
        SubRule::SquarePlus { c } => (Far::Transient, r.max(c.abs() + 1) + 1),
    }
}

/// Periodic points among `[-k, k]`, and the non-periodic ones.
fn scan(map: &FunctionalMap, k: &BigInt) -> Result<(Vec<Index>, Vec<Index>)> {
    let mut per = Vec::new();
    let mut not = Vec::new();
    for x in range(k) {
        match period_of(map, &x)? {
            Some(_) => per.push(x),
            None => not.push(x),
        }
    }
    Ok((per, not))
}

fn finite_eventual_image(map: &FunctionalMap, atoms: usize) -> Result<Vec<Index>> {
    // finite maps: the eventual image is exactly the set of periodic points
    let mut out = Vec::new();
    for k in 0..atoms {
        let x = Index::from(k);
        if period_of(map, &x)?.is_some() {
            out.push(x);
        }
    }
    Ok(out)
}

/// `⋂_{n≥1} 𝔥ⁿ(F)` and whether it is a single point.
pub fn eventual_image(sys: &FortSystem) -> Result<EventualImage> {
    sys.require_continuous()?;
    let set = if let Some(t) = sys.map.table_images() {
        PointSet::Finite(finite_eventual_image(&sys.map, t.len())?)
    } else {
        let (pw, radius) = sys
            .integer_rule()
            .ok_or_else(|| Error::Undecided("eventual image of a rule with unbounded guards".into()))?;
        let hb = sys.map.apply(&sys.base)?;
        if hb != sys.base {
            // 𝔥(F) is 𝔥(b) together with the images of the core
            let mut cur: BTreeSet<Index> = range(&radius).map(|x| sys.map.apply(&x)).collect::<Result<_>>()?;
            cur.insert(hb);
            cur.insert(is_constant(&pw.default).cloned().expect("continuity forces a constant default"));
            loop {
                let next: BTreeSet<Index> = cur.iter().map(|x| sys.map.apply(x)).collect::<Result<_>>()?;
                if next == cur {
                    break;
                }
                cur = next;
            }
            PointSet::Finite(cur.into_iter().collect())
        } else {
            let (far, k) = far_shape(&pw, &radius, &sys.base);
            match far {
                Far::Periodic => PointSet::AllExcept(scan(&sys.map, &k)?.1),
                Far::Transient => PointSet::Finite(scan(&sys.map, &k)?.0),
                Far::Source { step } => PointSet::Infinite(format!(
                    "every point beyond {}{k} has an unbounded backward orbit under n ↦ n + {step}",
                    if step.is_positive() { "-" } else { "" }
                )),
            }
        }
    };
    let singleton = match (&set, set.singleton()) {
        (_, Some(c)) => {
            Verdict::yes(Certificate::Analytic { reason: format!("eventual image is {{{}}}", sys.label(c)) })
        }
        (PointSet::Finite(v), None) if v.is_empty() => {
            return Err(Error::Invariant("eventual image of a nonempty compact space is empty".into()));
        }
        (PointSet::Finite(v), None) => Verdict::no(two_periodic(sys, &v[0], &v[1])?),
        (PointSet::AllExcept(ex), None) => {
            let pts: Vec<Index> = num_iter(BigInt::zero(), BigInt::from(ex.len() + 2))
                .filter(|x| !ex.contains(x))
                .take(2)
                .collect();
            Verdict::no(two_periodic(sys, &pts[0], &pts[1])?)
        }
        (PointSet::Infinite(d), None) => Verdict::no(Certificate::Analytic { reason: d.clone() }),
    };
    Ok(EventualImage { set, singleton })
}

fn two_periodic(sys: &FortSystem, a: &Index, b: &Index) -> Result<Certificate> {
    let wit = |x: &Index| -> Result<Certificate> {
        let period = period_of(&sys.map, x)?
            .ok_or_else(|| Error::Invariant(format!("{} survives but is not periodic", sys.label(x))))?;
        Ok(Certificate::PeriodicWitness { index: x.clone(), period })
    };
    Ok(Certificate::Conjunction(vec![wit(a)?, wit(b)?]))
}

/// Weak (and almost weak) specification: the eventual image is one point.
pub fn decide_fort_weak_spec(sys: &FortSystem) -> Result<Verdict> {
    Ok(eventual_image(sys)?.singleton)
}

/// `F = {b}`.
fn is_trivial(sys: &FortSystem) -> Verdict {
    match sys.map.table_images() {
        Some(t) if t.len() == 1 => Verdict::yes(Certificate::Analytic { reason: "F = {b}".into() }),
        Some(t) => {
            let other = (0..t.len()).map(Index::from).find(|x| *x != sys.base).expect("two atoms");
            Verdict::no(Certificate::Analytic { reason: format!("{} ≠ b lies in F", sys.label(&other)) })
        }
        None => Verdict::no(Certificate::Analytic { reason: "F is infinite".into() }),
    }
}

/// Specification holds only on the one-point space.
pub fn decide_fort_spec(sys: &FortSystem) -> Verdict {
    is_trivial(sys)
}

pub fn decide_fort_strong_strobo(sys: &FortSystem) -> Verdict {
    is_trivial(sys)
}

/// Stroboscopical (plain and uniform): every point is periodic.
pub fn decide_fort_strobo(sys: &FortSystem) -> Result<Verdict> {
    sys.require_continuous()?;
    let not_periodic = |p: Index| Verdict::no(Certificate::NotPeriodic { point: p });
    if let Some(t) = sys.map.table_images() {
        for k in 0..t.len() {
            let x = Index::from(k);
            if period_of(&sys.map, &x)?.is_none() {
                return Ok(not_periodic(x));
            }
        }
        return Ok(Verdict::yes(Certificate::Analytic { reason: format!("all {} points are periodic", t.len()) }));
    }
    let Some((pw, radius)) = sys.integer_rule() else {
        return Ok(Verdict::unknown("periodicity of a rule with unbounded guards"));
    };
    let (far, k) = far_shape(&pw, &radius, &sys.base);
    if sys.map.apply(&sys.base)? != sys.base || !matches!(far, Far::Periodic) {
        // far points are transient: probe just past the scan radius
        let p = k + 1;
        return match period_of(&sys.map, &p)? {
            None => Ok(not_periodic(p)),
            Some(_) => Err(Error::Invariant(format!("{p} is periodic beyond the scan radius"))),
        };
    }
    let (_, not) = scan(&sys.map, &k)?;
    Ok(match not.into_iter().next() {
        Some(p) => not_periodic(p),
        None => Verdict::yes(Certificate::Analytic {
            reason: format!("every point in [-{k}, {k}] is periodic and the tail pairs the rest into cycles"),
        }),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GapCase {
    /// `⋂ = {b}`: each window point drains, `𝔥^{-m_y}(y) = ∅`.
    Drained { per_point: BTreeMap<Index, u64> },
    /// `⋂ = {c}` with `c ≠ b`: `𝔥^m(F) = {c}`.
    Collapsed { point: Index },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FortGap {
    pub m: u64,
    pub case: GapCase,
}

/// Gap constant certifying weak specification for the window `a`.
pub fn fort_gap_constant(sys: &FortSystem, a: &FortWindow) -> Result<FortGap> {
    let ev = eventual_image(sys)?;
    let Some(c) = ev.set.singleton().cloned() else {
        return Err(Error::Precondition(format!("weak specification fails ({})", ev.singleton)));
    };
    if c == sys.base {
        let mut per_point = BTreeMap::new();
        for y in a.iter() {
            per_point.insert(y.clone(), drain_depth(sys, y)?);
        }
        let m = per_point.values().sum();
        Ok(FortGap { m, case: GapCase::Drained { per_point } })
    } else {
        let mut cur = image_of_space(sys)?;
        let mut m = 1;
        while cur.len() > 1 {
            cur = cur.iter().map(|x| sys.map.apply(x)).collect::<Result<_>>()?;
            m += 1;
            if m > sys.map.budget.steps {
                return Err(Error::Budget(format!("image chain not collapsed after {m} steps")));
            }
        }
        Ok(FortGap { m, case: GapCase::Collapsed { point: c } })
    }
}

/// `𝔥(F)` when it is finite.
fn image_of_space(sys: &FortSystem) -> Result<BTreeSet<Index>> {
    if let Some(t) = sys.map.table_images() {
        return Ok(t.iter().map(|&k| Index::from(k)).collect());
    }
    let (pw, radius) = sys.integer_rule().ok_or_else(|| Error::Undecided("image of the space".into()))?;
    let c = is_constant(&pw.default).ok_or_else(|| Error::Precondition("image of F is infinite".into()))?;
    let mut out: BTreeSet<Index> = range(&radius).map(|x| sys.map.apply(&x)).collect::<Result<_>>()?;
    out.insert(c.clone());
    Ok(out)
}

/// Least `m` with `𝔥^{-m}(y) = ∅`.
fn drain_depth(sys: &FortSystem, y: &Index) -> Result<u64> {
    let mut layer: BTreeSet<Index> = BTreeSet::from([y.clone()]);
    let mut m = 0u64;
    while !layer.is_empty() {
        let mut next = BTreeSet::new();
        for x in &layer {
            match sys.map.preimages(x) {
                Preimages::Finite(v) => next.extend(v),
                Preimages::Cofinite(_) => {
                    return Err(Error::Invariant(format!("{} has an infinite fiber", sys.label(x))));
                }
                Preimages::Unknown => return Err(Error::Undecided(format!("preimages of {}", sys.label(x)))),
            }
        }
        layer = next;
        m += 1;
        if m > sys.map.budget.steps {
            return Err(Error::Budget(format!("backward orbit of {} not drained", sys.label(y))));
        }
    }
    Ok(m)
}

impl FortGap {
    /// Replays the gap argument: for `i ≥ m` the image `𝔥^i(F)` misses the
    /// window (drained case) or equals `{c}` (collapsed case). Checked exactly
    /// on finite spaces for `i ∈ [m, m + |F|]`; integer spaces check the
    /// drained depths by preimage emptiness.
    pub fn verify(&self, sys: &FortSystem, a: &FortWindow) -> Result<bool> {
        if let Some(t) = sys.map.table_images() {
            let mut img: BTreeSet<Index> = (0..t.len()).map(Index::from).collect();
            for _ in 0..self.m {
                img = img.iter().map(|x| sys.map.apply(x)).collect::<Result<_>>()?;
            }
            for _ in 0..=t.len() {
                let ok = match &self.case {
                    GapCase::Drained { .. } => a.iter().all(|y| !img.contains(y)),
                    GapCase::Collapsed { point } => img.len() == 1 && img.contains(point),
                };
                if !ok {
                    return Ok(false);
                }
                img = img.iter().map(|x| sys.map.apply(x)).collect::<Result<_>>()?;
            }
            return Ok(true);
        }
        match &self.case {
            GapCase::Drained { per_point } => {
                for y in a.iter() {
                    let Some(&d) = per_point.get(y) else { return Ok(false) };
                    if d > self.m || drain_depth(sys, y)? > d {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            GapCase::Collapsed { point } => {
                let mut img = image_of_space(sys)?;
                for _ in 1..self.m {
                    img = img.iter().map(|x| sys.map.apply(x)).collect::<Result<_>>()?;
                }
                Ok(img.len() == 1 && img.contains(point))
            }
        }
    }
}

/// `ρ(z) = 𝔥^{m_z − r_{m_z}}(z)` on a periodic Fort system.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FortRho {
    pub residues: ResidueTable,
    /// Minimal periods of the window points and of `b`.
    pub periods: BTreeMap<Index, u64>,
    /// `N`; the guarantee covers selected indices `k ≥ N` (1-based).
    pub threshold: usize,
}

impl FortRho {
    pub fn subsequence(&self) -> &[u64] {
        &self.residues.subsequence
    }

    /// Exponent `m_z − r_{m_z}`.
    pub fn exponent(&self, period: u64) -> Option<u64> {
        let r = *self.residues.residues.get(&period)?;
        Some((period - r % period) % period)
    }

    pub fn apply(&self, sys: &FortSystem, z: &Index) -> Result<Index> {
        let m = match self.periods.get(z) {
            Some(&m) => m,
            None => period_of(&sys.map, z)?
                .ok_or_else(|| Error::Precondition(format!("{} is not periodic", sys.label(z))))?,
        };
        let e = self
            .exponent(m)
            .ok_or_else(|| Error::Precondition(format!("period {m} of {} exceeds N", sys.label(z))))?;
        sys.map.iterate(z, e)
    }

    /// Index arithmetic: `m_z − r_{m_z} + n_k ≡ 0 (mod m_z)` for `k ≥ N`.
    pub fn check_arithmetic(&self) -> bool {
        self.periods.values().all(|&m| {
            self.exponent(m).is_some_and(|e| {
                self.subsequence().iter().skip(self.threshold.max(1) - 1).all(|&n| (e + n) % m == 0)
            })
        })
    }

    /// Direct iteration: `𝔥^{n_k}(ρ(z)) = z` for every tracked point and `k ≥ N`.
    pub fn verify_exact(&self, sys: &FortSystem) -> Result<bool> {
        for z in self.periods.keys() {
            let mut cur = self.apply(sys, z)?;
            let mut t = 0;
            for (p, &n) in self.subsequence().iter().enumerate() {
                cur = sys.map.iterate(&cur, n - t)?;
                t = n;
                if p + 1 >= self.threshold.max(1) && cur != *z {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

pub fn build_fort_rho(sys: &FortSystem, a: &SequenceSpec, h: &FortWindow) -> Result<FortRho> {
    let strobo = decide_fort_strobo(sys)?;
    if !strobo.is_yes() {
        return Err(Error::Precondition(format!("not every point is periodic ({strobo})")));
    }
    let mut periods = BTreeMap::new();
    for z in h.iter().chain(std::iter::once(&sys.base)) {
        let m = period_of(&sys.map, z)?.ok_or_else(|| Error::Invariant(format!("{} not periodic", sys.label(z))))?;
        periods.insert(z.clone(), m);
    }
    let n = *periods.values().max().expect("b is tracked");
    let residues = congruence_refine(&a.prefix(), n)?;
    let rho = FortRho { residues, periods, threshold: n as usize };
    if !rho.check_arithmetic() {
        return Err(Error::Invariant("residue arithmetic fails past N".into()));
    }
    Ok(rho)
}
