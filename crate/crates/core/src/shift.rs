//! Configurations of `X^Γ` with finite descriptions and window evaluation of
//! the generalized shift `σ_φ(x)_α = x_{φ(α)}`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index_maps::{FunctionalMap, Index};

pub type Symbol = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    size: u32,
}

impl Alphabet {
    pub fn new(size: u32) -> Result<Self> {
        if size < 2 {
            return Err(Error::Instance(format!("alphabet needs at least two symbols, got {size}")));
        }
        Ok(Alphabet { size })
    }

    pub fn binary() -> Self {
        Alphabet { size: 2 }
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn contains(&self, s: Symbol) -> bool {
        s < self.size
    }

    fn check(&self, s: Symbol) -> Result<()> {
        if self.contains(s) {
            Ok(())
        } else {
            Err(Error::Instance(format!("symbol {s} outside alphabet of size {}", self.size)))
        }
    }
}

/// A point of `X^Γ`: a fill symbol plus finitely many exceptions. Overrides
/// never repeat the fill, so equal configurations compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Configuration {
    alphabet: Alphabet,
    default: Symbol,
    overrides: BTreeMap<Index, Symbol>,
}

impl Configuration {
    pub fn constant(alphabet: Alphabet, fill: Symbol) -> Result<Self> {
        alphabet.check(fill)?;
        Ok(Configuration { alphabet, default: fill, overrides: BTreeMap::new() })
    }

    pub fn new(alphabet: Alphabet, fill: Symbol, overrides: impl IntoIterator<Item = (Index, Symbol)>) -> Result<Self> {
        let mut cfg = Configuration::constant(alphabet, fill)?;
        for (i, s) in overrides {
            cfg.set(i, s)?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, i: Index, s: Symbol) -> Result<()> {
        self.alphabet.check(s)?;
        if s == self.default {
            self.overrides.remove(&i);
        } else {
            self.overrides.insert(i, s);
        }
        Ok(())
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn default_symbol(&self) -> Symbol {
        self.default
    }

    pub fn overrides(&self) -> &BTreeMap<Index, Symbol> {
        &self.overrides
    }

    pub fn value_at(&self, i: &Index) -> Symbol {
        self.overrides.get(i).copied().unwrap_or(self.default)
    }

    pub fn restrict(&self, h: &Window) -> BTreeMap<Index, Symbol> {
        h.iter().map(|a| (a.clone(), self.value_at(a))).collect()
    }
}

/// Finite nonempty coordinate set `H` defining the entourage `α_H`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    coords: BTreeSet<Index>,
}

impl Window {
    pub fn new(coords: impl IntoIterator<Item = Index>) -> Result<Self> {
        let coords: BTreeSet<Index> = coords.into_iter().collect();
        if coords.is_empty() {
            return Err(Error::Instance("window must be nonempty".into()));
        }
        Ok(Window { coords })
    }

    pub fn from_ints(coords: &[i64]) -> Result<Self> {
        Window::new(coords.iter().map(|&c| Index::from(c)))
    }

    /// Rejects coordinates outside the map's domain.
    pub fn for_map(map: &FunctionalMap, coords: impl IntoIterator<Item = Index>) -> Result<Self> {
        let w = Window::new(coords)?;
        if let Some(bad) = w.coords.iter().find(|c| !map.domain().contains(c)) {
            return Err(Error::Domain { index: bad.clone() });
        }
        Ok(w)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Index> {
        self.coords.iter()
    }

    pub fn coords(&self) -> Vec<Index> {
        self.coords.iter().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn contains(&self, i: &Index) -> bool {
        self.coords.contains(i)
    }

    pub fn union(&self, other: &Window) -> Window {
        Window { coords: self.coords.union(&other.coords).cloned().collect() }
    }
}

pub fn value_at(cfg: &Configuration, i: &Index) -> Symbol {
    cfg.value_at(i)
}

/// `σ_φ^t(cfg)` restricted to `H`, by pullback: `α ↦ cfg(φ^t(α))`.
pub fn eval_orbit(map: &FunctionalMap, cfg: &Configuration, h: &Window, t: u64) -> Result<BTreeMap<Index, Symbol>> {
    h.iter()
        .map(|a| Ok((a.clone(), cfg.value_at(&map.iterate(a, t)?))))
        .collect()
}

/// `(a, b) ∈ α_H`: agreement on every coordinate of `H`.
pub fn entourage_check(a: &Configuration, b: &Configuration, h: &Window) -> Result<bool> {
    if a.alphabet != b.alphabet {
        return Err(Error::Instance("configurations use different alphabets".into()));
    }
    Ok(h.iter().all(|i| a.value_at(i) == b.value_at(i)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index_maps::idx;

    fn bin(fill: Symbol, ov: &[(i64, Symbol)]) -> Configuration {
        Configuration::new(Alphabet::binary(), fill, ov.iter().map(|&(i, s)| (idx(i), s))).unwrap()
    }

    #[test]
    fn value_at_examples() {
        let c = bin(0, &[(3, 1)]);
        assert_eq!(value_at(&c, &idx(3)), 1);
        assert_eq!(value_at(&c, &idx(4)), 0);
        assert_eq!(value_at(&bin(1, &[]), &idx(-17)), 1);
    }

    #[test]
    fn overrides_are_canonical() {
        let c = bin(0, &[(3, 1), (4, 0)]);
        assert_eq!(c.overrides().len(), 1);
        assert_eq!(c, bin(0, &[(3, 1)]));
        assert!(Configuration::constant(Alphabet::binary(), 2).is_err());
        assert!(Alphabet::new(1).is_err());
    }

    #[test]
    fn eval_orbit_examples() {
        let m = FunctionalMap::affine(1, 1);
        let c = bin(0, &[(2, 1)]);
        let h = Window::from_ints(&[0]).unwrap();
        assert_eq!(eval_orbit(&m, &c, &h, 2).unwrap(), BTreeMap::from([(idx(0), 1)]));
        assert_eq!(eval_orbit(&m, &c, &Window::from_ints(&[2, 5]).unwrap(), 0).unwrap(), c.restrict(&Window::from_ints(&[2, 5]).unwrap()));
        let fixed = FunctionalMap::table(&[0]).unwrap();
        let one = bin(1, &[]);
        assert_eq!(eval_orbit(&fixed, &one, &Window::from_ints(&[0]).unwrap(), 9).unwrap(), BTreeMap::from([(idx(0), 1)]));
    }

    #[test]
    fn entourage_examples() {
        let c = bin(0, &[(5, 1)]);
        let h = Window::from_ints(&[1, 2]).unwrap();
        assert!(entourage_check(&c, &c, &h).unwrap());
        assert!(!entourage_check(&bin(0, &[]), &bin(1, &[]), &Window::from_ints(&[0]).unwrap()).unwrap());
        assert!(entourage_check(&c, &bin(0, &[]), &h).unwrap());
        let ternary = Configuration::constant(Alphabet::new(3).unwrap(), 0).unwrap();
        assert!(entourage_check(&c, &ternary, &h).is_err());
    }

    #[test]
    fn window_rejects_foreign_coords() {
        let m = FunctionalMap::table(&[0, 1]).unwrap();
        assert!(Window::for_map(&m, [idx(2)]).is_err());
        assert!(Window::new(Vec::<Index>::new()).is_err());
    }
}
