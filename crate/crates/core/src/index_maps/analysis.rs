//! Orbit fates, cycle search and class structure.
//!
//! Integer rules with bounded guards agree with their default sub-rule outside
//! a core `[-R, R]`; the default's shape (the tail) gives the growth facts that
//! turn finite scans into certificates. Rules with unbounded or residue
//! guards only get bounded exploration, which can refute but never certify.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::verdict::EscapeRegion;
use super::{
    Certificate, ClassDescriptor, ClassKind, FunctionalMap, Index, Preimages, SubRule, Verdict,
};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum TailKind {
    Identity,
    /// `n ↦ -n + b`
    Reflection { b: BigInt },
    /// `n ↦ n + b`, `b ≠ 0`
    Translation { b: BigInt },
    Constant { c: BigInt },
    /// `|φ(n)| > |n|` once `|n| > escape`
    Expanding { escape: BigInt, square: bool },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Tail {
    pub radius: BigInt,
    pub kind: TailKind,
}

pub(crate) fn tail_model(map: &FunctionalMap) -> Option<Tail> {
    let pw = map.integer_view()?;
    let radius = pw.core_radius()?;
    let kind = match &pw.default {
        SubRule::Affine { a, b } => {
            if a.is_one() && b.is_zero() {
                TailKind::Identity
            } else if a.is_one() {
                TailKind::Translation { b: b.clone() }
            } else if *a == -BigInt::one() {
                TailKind::Reflection { b: b.clone() }
            } else if a.is_zero() {
                TailKind::Constant { c: b.clone() }
            } else {
                TailKind::Expanding { escape: b.abs(), square: false }
            }
        }
        SubRule::SquarePlus { c } => TailKind::Expanding { escape: c.abs() + 1, square: true },
    };
    Some(Tail { radius, kind })
}

impl Tail {
    /// Radius beyond which expanding tails escape.
    fn outer(&self) -> BigInt {
        match &self.kind {
            TailKind::Expanding { escape, .. } => self.radius.clone().max(escape.clone()),
            _ => self.radius.clone(),
        }
    }

    fn escaped(&self, x: &BigInt) -> bool {
        match &self.kind {
            TailKind::Translation { b } if b.is_positive() => x > &self.radius,
            TailKind::Translation { .. } => *x < -&self.radius,
            TailKind::Expanding { .. } => x.abs() > self.outer(),
            _ => false,
        }
    }

    /// Translation tails: first value reached when entering the core from
    /// the source side (`T` for `b > 0`, mirrored for `b < 0`).
    fn source_threshold(&self, b: &BigInt) -> BigInt {
        if b.is_positive() {
            (-&self.radius).min(&self.radius + 1)
        } else {
            self.radius.clone().max(-&self.radius - 1)
        }
    }

    fn on_source_side(&self, x: &BigInt) -> bool {
        match &self.kind {
            TailKind::Translation { b } => {
                let t = self.source_threshold(b);
                if b.is_positive() {
                    x < &t
                } else {
                    x > &t
                }
            }
            _ => false,
        }
    }
}

/// One forward move, jumping across long translation runs toward the core.
fn advance(map: &FunctionalMap, tail: Option<&Tail>, x: &Index) -> Result<(Index, u64)> {
    if let Some(t) = tail {
        if let TailKind::Translation { b } = &t.kind {
            if t.on_source_side(x) {
                let target = t.source_threshold(b);
                let dist = (&target - x).abs();
                let step = b.abs();
                let k = dist.div_ceil(&step);
                if k > BigInt::one() {
                    let k64 = k.to_u64().ok_or_else(|| Error::Budget("translation run too long".into()))?;
                    let next = x + b * (&k - 1);
                    return Ok((next, k64 - 1));
                }
            }
        }
    }
    Ok((map.apply(x)?, 1))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrbitFate {
    /// The orbit enters a cycle; `anchor` is its least recorded point and
    /// `entry` the step at which the first recorded cycle point is reached.
    Cycle { anchor: Index, period: u64, entry: u64 },
    /// `point = φ^step(x)` lies in a region the tail certifies as escaping.
    Escapes { point: Index, step: u64 },
    Unknown,
}

pub fn orbit_fate(map: &FunctionalMap, x: &Index) -> Result<OrbitFate> {
    if !map.domain().contains(x) {
        return Err(Error::Domain { index: x.clone() });
    }
    let tail = tail_model(map);
    let mut visited: HashMap<Index, u64> = HashMap::new();
    let mut cur = x.clone();
    let mut step = 0u64;
    let mut iters = 0u64;
    loop {
        if let Some(t) = &tail {
            if t.escaped(&cur) {
                return Ok(OrbitFate::Escapes { point: cur, step });
            }
        }
        if let Some(&s) = visited.get(&cur) {
            let anchor = visited
                .iter()
                .filter(|(_, &v)| v >= s)
                .map(|(k, _)| k)
                .min()
                .cloned()
                .expect("cycle has a recorded point");
            return Ok(OrbitFate::Cycle { anchor, period: step - s, entry: s });
        }
        if iters >= map.budget.steps || (!map.is_finite() && tail.is_none() && cur.abs() > map.budget.magnitude) {
            return Ok(OrbitFate::Unknown);
        }
        visited.insert(cur.clone(), step);
        let (next, k) = advance(map, tail.as_ref(), &cur)?;
        cur = next;
        step += k;
        iters += 1;
    }
}

pub fn decide_periodic_free(map: &FunctionalMap) -> Verdict {
    match decide_periodic_free_inner(map) {
        Ok(v) => v,
        Err(e) => Verdict::unknown(format!("{}; {e}", map.budget)),
    }
}

fn witness_from(map: &FunctionalMap, x: &Index) -> Result<Option<Verdict>> {
    Ok(match orbit_fate(map, x)? {
        OrbitFate::Cycle { anchor, period, .. } => {
            Some(Verdict::no(Certificate::PeriodicWitness { index: anchor, period }))
        }
        _ => None,
    })
}

fn decide_periodic_free_inner(map: &FunctionalMap) -> Result<Verdict> {
    if map.is_finite() {
        return Ok(witness_from(map, &Index::zero())?.expect("finite orbits cycle"));
    }
    let Some(tail) = tail_model(map) else {
        // bounded exploration: may refute, never certifies
        let w = map.budget.magnitude.clone().min(BigInt::from(1000));
        let mut x = -w.clone();
        while x <= w {
            if let Some(v) = witness_from(map, &x)? {
                return Ok(v);
            }
            x += 1;
        }
        return Ok(Verdict::unknown(format!("{}; no certificate for unbounded guards", map.budget)));
    };
    let r = tail.radius.clone();
    match &tail.kind {
        TailKind::Identity => {
            Ok(Verdict::no(Certificate::PeriodicWitness { index: r + 1, period: 1 }))
        }
        TailKind::Reflection { b } => {
            let x = r + b.abs() + 1;
            Ok(witness_from(map, &x)?.expect("reflection tails pair points"))
        }
        TailKind::Constant { c } => Ok(witness_from(map, c)?.expect("constant tails collapse")),
        TailKind::Translation { b } => scan_for_cycles(map, &tail, &r, EscapeRegion::from_translation(b)),
        TailKind::Expanding { .. } => scan_for_cycles(map, &tail, &tail.outer(), EscapeRegion::Magnitude),
    }
}

impl EscapeRegion {
    fn from_translation(b: &BigInt) -> Self {
        if b.is_positive() {
            EscapeRegion::Upward
        } else {
            EscapeRegion::Downward
        }
    }
}

/// Every cycle meets `[-k, k]`; look for one there.
fn scan_for_cycles(map: &FunctionalMap, tail: &Tail, k: &BigInt, region: EscapeRegion) -> Result<Verdict> {
    if k > &map.budget.magnitude {
        return Ok(Verdict::unknown(format!("{}; core radius {k} too large", map.budget)));
    }
    let mut escaping: std::collections::HashSet<Index> = std::collections::HashSet::new();
    let mut x = -k.clone();
    while &x <= k {
        if !escaping.contains(&x) {
            let mut path: Vec<Index> = Vec::new();
            let mut on_path = std::collections::HashSet::new();
            let mut cur = x.clone();
            let mut iters = 0u64;
            loop {
                if tail.escaped(&cur) || escaping.contains(&cur) {
                    break;
                }
                if !on_path.insert(cur.clone()) {
                    return Ok(witness_from(map, &cur)?.expect("revisited point lies on a cycle"));
                }
                path.push(cur.clone());
                iters += 1;
                if iters > map.budget.steps {
                    return Ok(Verdict::unknown(format!("{}; orbit of {x} undecided", map.budget)));
                }
                cur = advance(map, Some(tail), &cur)?.0;
            }
            escaping.extend(path);
        }
        x += 1;
    }
    let statement = match (&tail.kind, &region) {
        (TailKind::Expanding { .. }, _) => format!("|φ(n)| > |n| whenever |n| > {k}, so orbits leaving the core never return"),
        (TailKind::Translation { b }, _) => {
            format!("φ(n) = n + {b} outside the core, so orbits that pass it never return")
        }
        _ => String::new(),
    };
    Ok(Verdict::yes(Certificate::EscapeCertificate { bound: k.clone(), region, statement }))
}

pub fn decide_injective(map: &FunctionalMap) -> Verdict {
    if let Some(t) = map.table_images() {
        let mut first_with: HashMap<usize, usize> = HashMap::new();
        for (k, &img) in t.iter().enumerate() {
            if let Some(&j) = first_with.get(&img) {
                return Verdict::no(Certificate::InjectivityCollision { first: j.into(), second: k.into() });
            }
            first_with.insert(img, k);
        }
        return Verdict::yes(Certificate::FiniteExhaustive { size: t.len() });
    }
    let pw = map.integer_view().expect("integer rule");
    let Some(r) = pw.core_radius() else {
        return injective_by_search(map);
    };
    let outside: BigInt = r.clone() + 1;
    match &pw.default {
        SubRule::Affine { a, .. } if a.is_zero() => Verdict::no(Certificate::InjectivityCollision {
            first: outside.clone(),
            second: outside + 1,
        }),
        SubRule::SquarePlus { .. } => {
            let x = outside.max(BigInt::one());
            Verdict::no(Certificate::InjectivityCollision { first: x.clone(), second: -x })
        }
        SubRule::Affine { .. } => {
            if r > map.budget.magnitude {
                return Verdict::unknown(format!("{}; core radius {r} too large", map.budget));
            }
            let mut p = -r.clone();
            while p <= r {
                let Ok(y) = map.apply(&p) else {
                    return Verdict::unknown(map.budget.to_string());
                };
                match map.preimages(&y) {
                    Preimages::Finite(v) => {
                        if let Some(q) = v.iter().find(|&q| q != &p) {
                            return Verdict::no(Certificate::InjectivityCollision { first: p, second: q.clone() });
                        }
                    }
                    Preimages::Cofinite(excluded) => {
                        let mut q = -r.clone() - 1;
                        while q == p || excluded.contains(&q) {
                            q -= 1;
                        }
                        return Verdict::no(Certificate::InjectivityCollision { first: p, second: q });
                    }
                    Preimages::Unknown => return Verdict::unknown(map.budget.to_string()),
                }
                p += 1;
            }
            Verdict::yes(Certificate::InjectiveCore { radius: r })
        }
    }
}

fn injective_by_search(map: &FunctionalMap) -> Verdict {
    let w = map.budget.magnitude.clone().min(BigInt::from(10_000));
    let mut seen: HashMap<Index, Index> = HashMap::new();
    let mut x = -w.clone();
    while x <= w {
        if let Ok(y) = map.apply(&x) {
            if let Some(prev) = seen.get(&y) {
                return Verdict::no(Certificate::InjectivityCollision { first: prev.clone(), second: x });
            }
            seen.insert(y, x.clone());
        }
        x += 1;
    }
    Verdict::unknown(format!("{}; no collision in [-{w}, {w}]", map.budget))
}

/// Minimal period of a periodic index.
pub fn period(map: &FunctionalMap, x: &Index) -> Result<u64> {
    match orbit_fate(map, x)? {
        OrbitFate::Cycle { period, .. } => {
            let mut cur = x.clone();
            for k in 1..=period {
                cur = map.apply(&cur)?;
                if &cur == x {
                    return Ok(k);
                }
            }
            Err(Error::Precondition(format!("{} is not periodic", map.label(x))))
        }
        OrbitFate::Escapes { .. } => Err(Error::Precondition(format!("{} is not periodic", map.label(x)))),
        OrbitFate::Unknown => Err(Error::Precondition(format!(
            "periodicity of {} undecided within {}",
            map.label(x),
            map.budget
        ))),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Meeting {
    /// `point` is the first element of the orbit of `a` lying on the orbit of
    /// `b`; `point = φ^steps_a(a) = φ^steps_b(b)`.
    Met { point: Index, steps_a: u64, steps_b: u64 },
    Disjoint(Certificate),
    Unknown,
}

/// First steps at which the orbit of `x` visits each point, until `stop` fires
/// (inclusive). `None` when the step budget runs out first.
fn orbit_steps(
    map: &FunctionalMap,
    x: &Index,
    limit: u64,
    mut stop: impl FnMut(&Index, u64) -> bool,
) -> Result<Option<HashMap<Index, u64>>> {
    let mut seen = HashMap::new();
    let mut cur = x.clone();
    for step in 0..=limit {
        seen.entry(cur.clone()).or_insert(step);
        if stop(&cur, step) {
            return Ok(Some(seen));
        }
        cur = map.apply(&cur)?;
    }
    Ok(None)
}

/// Walk the orbit of `a` until it hits `targets`.
fn walk_into(
    map: &FunctionalMap,
    a: &Index,
    targets: &HashMap<Index, u64>,
    limit: u64,
) -> Result<Option<(Index, u64, u64)>> {
    let mut cur = a.clone();
    for step in 0..=limit {
        if let Some(&j) = targets.get(&cur) {
            return Ok(Some((cur, step, j)));
        }
        cur = map.apply(&cur)?;
    }
    Ok(None)
}

pub fn first_meeting(map: &FunctionalMap, a: &Index, b: &Index) -> Result<Meeting> {
    if a == b {
        return Ok(Meeting::Met { point: a.clone(), steps_a: 0, steps_b: 0 });
    }
    let limit = map.budget.steps;
    let met = |found: Option<(Index, u64, u64)>| match found {
        Some((point, steps_a, steps_b)) => Meeting::Met { point, steps_a, steps_b },
        None => Meeting::Unknown,
    };
    let fa = orbit_fate(map, a)?;
    let fb = orbit_fate(map, b)?;
    match (&fa, &fb) {
        (
            OrbitFate::Cycle { anchor: xa, period: pa, entry: ea },
            OrbitFate::Cycle { anchor: xb, period: pb, entry: eb },
        ) => {
            if xa != xb {
                return Ok(Meeting::Disjoint(Certificate::DistinctCycles {
                    a: a.clone(),
                    b: b.clone(),
                    anchor_a: xa.clone(),
                    anchor_b: xb.clone(),
                }));
            }
            let lb = (eb + pb).min(limit);
            let targets = orbit_steps(map, b, lb, |_, s| s == lb)?.unwrap_or_default();
            Ok(met(walk_into(map, a, &targets, (ea + pa).min(limit))?))
        }
        (OrbitFate::Cycle { .. }, OrbitFate::Escapes { .. }) | (OrbitFate::Escapes { .. }, OrbitFate::Cycle { .. }) => {
            Ok(Meeting::Disjoint(Certificate::Analytic {
                reason: "one orbit is eventually periodic while the other escapes".into(),
            }))
        }
        (OrbitFate::Escapes { point: pa, .. }, OrbitFate::Escapes { point: pb, .. }) => {
            let tail = tail_model(map).expect("escapes need a tail");
            match &tail.kind {
                TailKind::Translation { b: shift } => {
                    if !(pa - pb).mod_floor(shift).is_zero() {
                        return Ok(Meeting::Disjoint(Certificate::Analytic {
                            reason: format!("escape points {pa} and {pb} differ modulo {shift}"),
                        }));
                    }
                    let far = if shift.is_positive() { pa.max(pb).clone() } else { pa.min(pb).clone() };
                    let beyond = |x: &Index| if shift.is_positive() { *x >= far } else { *x <= far };
                    let targets = orbit_steps(map, b, limit, |x, _| tail.escaped(x) && beyond(x))?;
                    let Some(targets) = targets else { return Ok(Meeting::Unknown) };
                    Ok(met(walk_into(map, a, &targets, limit)?))
                }
                TailKind::Expanding { square, .. } => {
                    let deep = |e: &Index| -> Result<Index> { if *square { map.apply(e) } else { Ok(e.clone()) } };
                    let (da, db) = (deep(pa)?, deep(pb)?);
                    let top = da.abs().max(db.abs());
                    let done = |x: &Index, passed: &mut bool, d: &Index| {
                        if x == d {
                            *passed = true;
                        }
                        *passed && x.abs() > top
                    };
                    let mut passed_b = false;
                    let targets = orbit_steps(map, b, limit, |x, _| done(x, &mut passed_b, &db))?;
                    let Some(targets) = targets else { return Ok(Meeting::Unknown) };
                    let mut passed_a = false;
                    let mut cur = a.clone();
                    for step in 0..=limit {
                        if let Some(&j) = targets.get(&cur) {
                            return Ok(Meeting::Met { point: cur, steps_a: step, steps_b: j });
                        }
                        if done(&cur, &mut passed_a, &da) {
                            return Ok(Meeting::Disjoint(Certificate::Analytic {
                                reason: format!(
                                    "orbits of {a} and {b} share no point up to magnitude {top}, past which the map is injective and increasing in magnitude"
                                ),
                            }));
                        }
                        cur = map.apply(&cur)?;
                    }
                    Ok(Meeting::Unknown)
                }
                _ => Ok(Meeting::Unknown),
            }
        }
        _ => {
            // lockstep search, then recover the first meeting point along a
            let mut oa: HashMap<Index, u64> = HashMap::new();
            let mut ob: HashMap<Index, u64> = HashMap::new();
            let (mut xa, mut xb) = (a.clone(), b.clone());
            for step in 0..=limit {
                oa.entry(xa.clone()).or_insert(step);
                ob.entry(xb.clone()).or_insert(step);
                if ob.contains_key(&xa) || oa.contains_key(&xb) {
                    let targets = orbit_steps(map, b, 2 * step, |_, s| s == 2 * step)?.unwrap_or_default();
                    return Ok(met(walk_into(map, a, &targets, step)?));
                }
                xa = map.apply(&xa)?;
                xb = map.apply(&xb)?;
            }
            Ok(Meeting::Unknown)
        }
    }
}

/// Orbit equivalence: the forward orbits of `a` and `b` meet.
pub fn same_class(map: &FunctionalMap, a: &Index, b: &Index) -> Verdict {
    match first_meeting(map, a, b) {
        Ok(Meeting::Met { steps_a, steps_b, .. }) => {
            Verdict::yes(Certificate::OrbitMeeting { a: a.clone(), b: b.clone(), steps_a, steps_b })
        }
        Ok(Meeting::Disjoint(c)) => Verdict::no(c),
        Ok(Meeting::Unknown) => Verdict::unknown(map.budget.to_string()),
        Err(e) => Verdict::unknown(format!("{}; {e}", map.budget)),
    }
}

/// Trichotomy of the class of `x` under an injective map. Representatives
/// are canonical: the least cycle point, the chain root, or the last
/// source-side point of a translation chain.
pub fn class_type(map: &FunctionalMap, x: &Index) -> Result<ClassDescriptor> {
    let inj = decide_injective(map);
    if inj.is_no() {
        return Err(Error::Precondition(format!("map is not injective: {}", inj.certificate)));
    }
    if inj.is_unknown() {
        return Err(Error::Undecided(format!("injectivity of the map: {}", inj.certificate)));
    }
    match orbit_fate(map, x)? {
        OrbitFate::Cycle { anchor, .. } => {
            let p = period(map, x)?;
            Ok(ClassDescriptor { representative: anchor, kind: ClassKind::Cycle { period: p } })
        }
        OrbitFate::Unknown => Err(Error::Undecided(format!("orbit of {} within {}", map.label(x), map.budget))),
        OrbitFate::Escapes { .. } => {
            let tail = tail_model(map).expect("escapes need a tail");
            let mut cur = x.clone();
            for _ in 0..map.budget.steps {
                if let TailKind::Translation { b } = &tail.kind {
                    if tail.on_source_side(&cur) {
                        let t = tail.source_threshold(b);
                        let k = (&t - &cur).abs().div_ceil(&b.abs());
                        let last = &cur + b * (k - 1);
                        return Ok(ClassDescriptor { representative: last, kind: ClassKind::ChainZ });
                    }
                    // jump back along the escaped run
                    let r = &tail.radius;
                    let room: BigInt = if b.is_positive() { &cur - r - 1 } else { -r - 1 - &cur };
                    if room.is_positive() {
                        let k = room.div_floor(&b.abs());
                        if k.is_positive() {
                            cur -= b * k;
                            continue;
                        }
                    }
                }
                match map.preimages(&cur) {
                    Preimages::Finite(v) if v.is_empty() => {
                        return Ok(ClassDescriptor { representative: cur.clone(), kind: ClassKind::ChainN { root: cur } });
                    }
                    Preimages::Finite(v) if v.len() == 1 => cur = v[0].clone(),
                    Preimages::Unknown => {
                        return Err(Error::Undecided(format!("preimages of {cur}")));
                    }
                    _ => return Err(Error::Invariant(format!("injective map has several preimages of {cur}"))),
                }
            }
            Err(Error::Undecided(format!("backward chain of {} within {}", map.label(x), map.budget)))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Confluence {
    /// One merge point per orbit class meeting the set.
    pub representatives: Vec<Index>,
    /// Every input reaches its representative within `depth` steps.
    pub depth: u64,
    /// `(point, class number, steps to the representative)`
    pub steps: Vec<(Index, usize, u64)>,
}

pub fn confluence(map: &FunctionalMap, points: &[Index]) -> Result<Confluence> {
    let pf = decide_periodic_free(map);
    if !pf.is_yes() {
        return Err(Error::Precondition(format!("confluence needs a map without periodic points ({pf})")));
    }
    let mut reps: Vec<Index> = Vec::new();
    let mut class_of: Vec<usize> = Vec::new();
    for g in points {
        let mut joined = None;
        for (k, rep) in reps.iter_mut().enumerate() {
            match first_meeting(map, rep, g)? {
                Meeting::Met { point, .. } => {
                    *rep = point;
                    joined = Some(k);
                    break;
                }
                Meeting::Disjoint(_) => {}
                Meeting::Unknown => {
                    return Err(Error::Undecided(format!("orbit classes of {rep} and {g} within {}", map.budget)));
                }
            }
        }
        match joined {
            Some(k) => class_of.push(k),
            None => {
                reps.push(g.clone());
                class_of.push(reps.len() - 1);
            }
        }
    }
    let mut steps = Vec::with_capacity(points.len());
    let mut depth = 0;
    for (g, &k) in points.iter().zip(&class_of) {
        let target = &reps[k];
        let mut cur = g.clone();
        let mut n = 0u64;
        while &cur != target {
            if n >= map.budget.steps {
                return Err(Error::Invariant(format!("{g} does not reach its merge point {target}")));
            }
            cur = map.apply(&cur)?;
            n += 1;
        }
        depth = depth.max(n);
        steps.push((g.clone(), k, n));
    }
    Ok(Confluence { representatives: reps, depth, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index_maps::{idx, Decision, Guard, Piecewise};

    fn d1_like() -> FunctionalMap {
        let pw = Piecewise::new(
            vec![(Guard::Point(idx(0)), SubRule::constant(0)), (Guard::Point(idx(1)), SubRule::constant(0))],
            SubRule::affine(-1, 1),
        )
        .unwrap();
        FunctionalMap::piecewise(pw)
    }

    #[test]
    fn injectivity_examples() {
        let v = decide_injective(&FunctionalMap::affine(-1, 0));
        assert_eq!(v.decision, Decision::Yes);
        let v = decide_injective(&FunctionalMap::square_plus(1));
        assert_eq!(v.certificate, Certificate::InjectivityCollision { first: idx(1), second: idx(-1) });
        let v = decide_injective(&FunctionalMap::table(&[1, 1]).unwrap());
        assert_eq!(v.certificate, Certificate::InjectivityCollision { first: idx(0), second: idx(1) });
        let v = decide_injective(&d1_like());
        assert!(v.is_no() && v.check(&d1_like()));
    }

    #[test]
    fn periodic_free_examples() {
        let m = FunctionalMap::affine(1, 1);
        let v = decide_periodic_free(&m);
        assert!(v.is_yes() && v.check(&m));
        let m = FunctionalMap::affine(-1, 0);
        let v = decide_periodic_free(&m);
        assert_eq!(v.certificate, Certificate::PeriodicWitness { index: idx(0), period: 1 });
        let m = FunctionalMap::square_plus(1);
        let v = decide_periodic_free(&m);
        assert!(matches!(v.certificate, Certificate::EscapeCertificate { .. }));
        assert!(v.check(&m));
        let m = FunctionalMap::square_plus(-1);
        let v = decide_periodic_free(&m);
        assert!(v.is_no() && v.check(&m));
        let m = FunctionalMap::affine(2, 0);
        assert!(decide_periodic_free(&m).is_no());
        let m = FunctionalMap::affine(-2, 3);
        let v = decide_periodic_free(&m);
        assert!(v.is_no() && v.check(&m), "{v}");
        let m = FunctionalMap::affine(3, 1);
        let v = decide_periodic_free(&m);
        assert!(v.is_yes() && v.check(&m), "{v}");
    }

    #[test]
    fn guarded_translation_with_a_cycle() {
        // 0 ↦ -5 sends the orbit back toward the core: a cycle of length 6
        let pw = Piecewise::new(vec![(Guard::Point(idx(0)), SubRule::constant(-5))], SubRule::affine(1, 1)).unwrap();
        let m = FunctionalMap::piecewise(pw);
        let v = decide_periodic_free(&m);
        assert_eq!(v.certificate, Certificate::PeriodicWitness { index: idx(-5), period: 6 });
        assert!(v.check(&m));
        // a long excursion is accelerated but the period stays exact
        let pw = Piecewise::new(vec![(Guard::Point(idx(0)), SubRule::constant(-1_000_000_000))], SubRule::affine(1, 1))
            .unwrap();
        let m = FunctionalMap::piecewise(pw);
        let fate = orbit_fate(&m, &idx(3)).unwrap();
        assert!(matches!(fate, OrbitFate::Escapes { .. }));
        let fate = orbit_fate(&m, &idx(-7)).unwrap();
        assert!(matches!(fate, OrbitFate::Cycle { period: 1_000_000_001, .. }), "{fate:?}");
    }

    #[test]
    fn period_examples() {
        assert_eq!(period(&FunctionalMap::table(&[1, 0]).unwrap(), &idx(0)).unwrap(), 2);
        assert_eq!(period(&FunctionalMap::affine(-1, 0), &idx(0)).unwrap(), 1);
        assert_eq!(period(&FunctionalMap::affine(-1, 3), &idx(1)).unwrap(), 2);
        assert!(matches!(period(&FunctionalMap::affine(1, 1), &idx(0)), Err(Error::Precondition(_))));
        assert!(period(&FunctionalMap::table(&[1, 1]).unwrap(), &idx(0)).is_err());
    }

    #[test]
    fn same_class_examples() {
        let m = FunctionalMap::affine(1, 1);
        let v = same_class(&m, &idx(0), &idx(5));
        assert_eq!(v.certificate, Certificate::OrbitMeeting { a: idx(0), b: idx(5), steps_a: 5, steps_b: 0 });
        let m = FunctionalMap::table(&[0, 1]).unwrap();
        let v = same_class(&m, &idx(0), &idx(1));
        assert!(v.is_no() && v.check(&m));
        let m = FunctionalMap::affine(-1, 0);
        assert!(same_class(&m, &idx(3), &idx(-3)).is_yes());
        let m = FunctionalMap::affine(1, 2);
        let v = same_class(&m, &idx(0), &idx(3));
        assert!(v.is_no(), "{v}");
        let m = FunctionalMap::square_plus(1);
        assert!(same_class(&m, &idx(1), &idx(-1)).is_yes());
        assert!(same_class(&m, &idx(0), &idx(-2)).is_yes()); // 0→1→2→5, -2→5
        assert!(same_class(&m, &idx(3), &idx(4)).is_no());
        let m = FunctionalMap::affine(2, 0);
        assert!(same_class(&m, &idx(3), &idx(12)).is_yes());
        assert!(same_class(&m, &idx(3), &idx(5)).is_no());
    }

    #[test]
    fn class_type_examples() {
        let c = class_type(&FunctionalMap::affine(1, 1), &idx(7)).unwrap();
        assert_eq!(c.kind, ClassKind::ChainZ);
        assert_eq!(c, class_type(&FunctionalMap::affine(1, 1), &idx(-40)).unwrap());
        let c = class_type(&FunctionalMap::table(&[1, 0]).unwrap(), &idx(0)).unwrap();
        assert_eq!(c.kind, ClassKind::Cycle { period: 2 });
        let c = class_type(&FunctionalMap::affine(2, 0), &idx(12)).unwrap();
        assert_eq!(c.kind, ClassKind::ChainN { root: idx(3) });
        let c = class_type(&FunctionalMap::affine(-1, 0), &idx(4)).unwrap();
        assert_eq!(c.kind, ClassKind::Cycle { period: 2 });
        assert!(matches!(class_type(&FunctionalMap::square_plus(1), &idx(1)), Err(Error::Precondition(_))));
        // 13 ← 4 ← 1 ← 0 and nothing maps to 0
        let c = class_type(&FunctionalMap::affine(3, 1), &idx(13)).unwrap();
        assert_eq!(c.kind, ClassKind::ChainN { root: idx(0) });
    }

    #[test]
    fn confluence_examples() {
        let m = FunctionalMap::affine(1, 1);
        let c = confluence(&m, &[idx(0), idx(5)]).unwrap();
        assert_eq!((c.representatives.clone(), c.depth), (vec![idx(5)], 5));
        let c = confluence(&m, &[idx(0)]).unwrap();
        assert_eq!((c.representatives, c.depth), (vec![idx(0)], 0));
        let m = FunctionalMap::square_plus(1);
        let c = confluence(&m, &[idx(1), idx(-1)]).unwrap();
        assert_eq!((c.representatives, c.depth), (vec![idx(2)], 1));
        let m = FunctionalMap::affine(1, 2);
        let c = confluence(&m, &[idx(0), idx(1), idx(4)]).unwrap();
        assert_eq!((c.representatives, c.depth), (vec![idx(4), idx(1)], 2));
        assert!(confluence(&FunctionalMap::affine(-1, 0), &[idx(0)]).is_err());
    }
}
