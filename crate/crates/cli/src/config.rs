//! TOML system descriptions.
//!
//! ```toml
//! kind = "fort"                 # or "generalized_shift"
//! alphabet_size = 2             # shifts only
//! base = 0                      # Fort only: the particular point
//! window = [1, -1]
//!
//! [index_set]
//! kind = "integers"             # or "atoms" with `count` or `names`
//!
//! [map]
//! rule = "piecewise"            # table / affine / negate / square_plus / piecewise
//! default = { rule = "affine", a = -1, b = 1 }
//! branches = [
//!   { guard = { type = "point", at = 0 }, then = { rule = "constant", value = 0 } },
//! ]
//! ```

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use genshift_core::catalog::{builtin, System};
use genshift_core::index_maps::{atom_name, Guard, IndexSet, Piecewise, Rule, SubRule};
use genshift_core::shift::{Alphabet, Configuration, Window};
use genshift_core::strobo::{SequenceKind, SequenceSpec, DEFAULT_PREFIX};
use genshift_core::{Budget, FortSystem, FunctionalMap, Index, SpecInstance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    GeneralizedShift,
    Fort,
}

/// A point given by position (or integer value) or by atom name.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointRef {
    Int(i64),
    Name(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IndexSetConfig {
    Integers,
    Atoms {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        count: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        names: Option<Vec<String>>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum SubRuleConfig {
    Affine { a: i64, b: i64 },
    Negate,
    SquarePlus { c: i64 },
    Constant { value: i64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GuardConfig {
    Point {
        at: i64,
    },
    Interval {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lo: Option<i64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hi: Option<i64>,
    },
    Residue {
        residue: i64,
        modulus: i64,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchConfig {
    pub guard: GuardConfig,
    pub then: SubRuleConfig,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum RuleConfig {
    Table { images: Vec<PointRef> },
    Affine { a: i64, b: i64 },
    Negate,
    SquarePlus { c: i64 },
    Piecewise { branches: Vec<BranchConfig>, default: SubRuleConfig },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub magnitude: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolAt {
    pub at: PointRef,
    pub symbol: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentConfig {
    #[serde(default)]
    pub fill: u32,
    #[serde(default)]
    pub set: Vec<SymbolAt>,
    /// `[l, k]`
    pub window: [u64; 2],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    pub target: Vec<PointRef>,
    pub segments: Vec<SegmentConfig>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceConfig {
    /// `naturals`, `arithmetic:START:STEP` or `explicit:1,2,3`
    pub spec: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefix: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet_size: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<PointRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Vec<PointRef>>,
    pub index_set: IndexSetConfig,
    pub map: RuleConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<BudgetConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<SequenceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceConfig>,
}

/// Problem with a configuration, with a 1-based position when known.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn plain(message: impl Into<String>) -> Self {
        ConfigError { line: None, column: None, message: message.into() }
    }
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: {}", self.message),
            _ => f.write_str(&self.message),
        }
    }
}

impl From<genshift_core::Error> for ConfigError {
    fn from(e: genshift_core::Error) -> Self {
        ConfigError::plain(e.to_string())
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

pub fn parse_config(text: &str) -> Result<SystemConfig, ConfigError> {
    toml::from_str(text).map_err(|e| {
        let (line, column) = match e.span() {
            Some(span) => {
                let (l, c) = line_col(text, span.start);
                (Some(l), Some(c))
            }
            None => (None, None),
        };
        ConfigError { line, column, message: e.message().trim().to_string() }
    })
}

pub fn render_config(cfg: &SystemConfig) -> String {
    toml::to_string(cfg).expect("configs serialize")
}

/// Resolved system plus the optional blocks.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub config: SystemConfig,
    pub system: System,
    pub alphabet: Alphabet,
    /// Set for builtins.
    pub builtin: Option<&'static str>,
}

impl Loaded {
    pub fn map(&self) -> &FunctionalMap {
        match &self.system {
            System::Shift(m) => m,
            System::Fort(s) => s.map(),
        }
    }

    pub fn resolve(&self, p: &PointRef) -> Result<Index, ConfigError> {
        resolve_point(self.map().domain(), p)
    }

    pub fn window(&self) -> Result<Option<Vec<Index>>, ConfigError> {
        self.config.window.as_ref().map(|w| w.iter().map(|p| self.resolve(p)).collect()).transpose()
    }

    pub fn sequence(&self) -> Result<Option<SequenceSpec>, ConfigError> {
        self.config.sequence.as_ref().map(|s| parse_sequence(&s.spec, s.prefix)).transpose()
    }

    pub fn instance(&self) -> Result<Option<SpecInstance>, ConfigError> {
        self.config.instance.as_ref().map(|i| build_instance(self, i)).transpose()
    }
}

pub fn build_instance(loaded: &Loaded, inst: &InstanceConfig) -> Result<SpecInstance, ConfigError> {
    let target = Window::new(inst.target.iter().map(|p| loaded.resolve(p)).collect::<Result<Vec<_>, _>>()?)?;
    let mut segments = Vec::new();
    let mut windows = Vec::new();
    for s in &inst.segments {
        let set = s.set.iter().map(|v| Ok((loaded.resolve(&v.at)?, v.symbol))).collect::<Result<Vec<_>, ConfigError>>()?;
        segments.push(Configuration::new(loaded.alphabet, s.fill, set)?);
        windows.push((s.window[0], s.window[1]));
    }
    Ok(SpecInstance::new(segments, windows, target)?)
}

fn resolve_point(domain: &IndexSet, p: &PointRef) -> Result<Index, ConfigError> {
    let i = match (domain, p) {
        (_, PointRef::Int(v)) => Index::from(*v),
        (IndexSet::Finite(_), PointRef::Name(n)) => {
            domain.position(n).ok_or_else(|| ConfigError::plain(format!("unknown atom `{n}`")))?
        }
        (IndexSet::Integers, PointRef::Name(n)) => n
            .parse::<BigInt>()
            .map_err(|_| ConfigError::plain(format!("`{n}` is not an integer")))?,
    };
    if !domain.contains(&i) {
        return Err(ConfigError::plain(format!("point {i} is outside the index set")));
    }
    Ok(i)
}

/// `naturals`, `arithmetic:START:STEP` or `explicit:1,2,3`.
pub fn parse_sequence(spec: &str, prefix: Option<usize>) -> Result<SequenceSpec, ConfigError> {
    let budget = prefix.unwrap_or(DEFAULT_PREFIX);
    let bad = |why: &str| ConfigError::plain(format!("sequence `{spec}`: {why}"));
    let num = |s: &str| s.trim().parse::<u64>().map_err(|_| bad(&format!("`{s}` is not a nonnegative integer")));
    let mut parts = spec.splitn(2, ':');
    let head = parts.next().unwrap_or_default().trim();
    let rest = parts.next();
    let out = match (head, rest) {
        ("naturals", None) => SequenceSpec::naturals(budget),
        ("arithmetic", Some(r)) => {
            let (s, t) = r.split_once(':').ok_or_else(|| bad("expected arithmetic:START:STEP"))?;
            SequenceSpec::arithmetic(num(s)?, num(t)?, budget)?
        }
        ("explicit", Some(r)) => {
            let terms = r.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
            let n = prefix.unwrap_or(terms.len());
            SequenceSpec::new(SequenceKind::Explicit(terms), n)?
        }
        _ => return Err(bad("expected naturals, arithmetic:START:STEP or explicit:LIST")),
    };
    Ok(out)
}

fn sub_rule(r: &SubRuleConfig) -> SubRule {
    match r {
        SubRuleConfig::Affine { a, b } => SubRule::affine(*a, *b),
        SubRuleConfig::Negate => SubRule::affine(-1, 0),
        SubRuleConfig::SquarePlus { c } => SubRule::square_plus(*c),
        SubRuleConfig::Constant { value } => SubRule::constant(*value),
    }
}

fn guard(g: &GuardConfig) -> Guard {
    match g {
        GuardConfig::Point { at } => Guard::Point(BigInt::from(*at)),
        GuardConfig::Interval { lo, hi } => Guard::Interval { lo: lo.map(BigInt::from), hi: hi.map(BigInt::from) },
        GuardConfig::Residue { residue, modulus } => {
            Guard::Residue { residue: BigInt::from(*residue), modulus: BigInt::from(*modulus) }
        }
    }
}

fn domain(cfg: &IndexSetConfig) -> Result<IndexSet, ConfigError> {
    match cfg {
        IndexSetConfig::Integers => Ok(IndexSet::Integers),
        IndexSetConfig::Atoms { count: Some(n), names: None } => Ok(IndexSet::atoms(*n)?),
        IndexSetConfig::Atoms { count, names: Some(names) } => {
            if count.is_some_and(|n| n != names.len()) {
                return Err(ConfigError::plain("atom count disagrees with the number of names"));
            }
            Ok(IndexSet::finite(names.iter().cloned())?)
        }
        IndexSetConfig::Atoms { count: None, names: None } => Err(ConfigError::plain("atoms need `count` or `names`")),
    }
}

pub fn load_config(cfg: SystemConfig, budget_steps: Option<u64>) -> Result<Loaded, ConfigError> {
    let dom = domain(&cfg.index_set)?;
    let rule = match (&cfg.map, &dom) {
        (RuleConfig::Table { images }, IndexSet::Finite(_)) => {
            let imgs = images
                .iter()
                .map(|p| {
                    let i = resolve_point(&dom, p)?;
                    Ok(usize::try_from(&i).expect("atoms are small"))
                })
                .collect::<Result<Vec<_>, ConfigError>>()?;
            Rule::Table(imgs)
        }
        (RuleConfig::Table { .. }, IndexSet::Integers) => {
            return Err(ConfigError::plain("a table rule needs an atoms index set"));
        }
        (_, IndexSet::Finite(_)) => return Err(ConfigError::plain("integer rules need the integers index set")),
        (RuleConfig::Affine { a, b }, _) => Rule::Affine { a: BigInt::from(*a), b: BigInt::from(*b) },
        (RuleConfig::Negate, _) => Rule::Affine { a: BigInt::from(-1), b: BigInt::from(0) },
        (RuleConfig::SquarePlus { c }, _) => Rule::SquarePlus { c: BigInt::from(*c) },
        (RuleConfig::Piecewise { branches, default }, _) => Rule::Piecewise(Piecewise::new(
            branches.iter().map(|b| (guard(&b.guard), sub_rule(&b.then))).collect(),
            sub_rule(default),
        )?),
    };
    let mut budget = Budget::default();
    if let Some(b) = &cfg.budget {
        if let Some(m) = b.magnitude {
            budget = budget.with_magnitude(m);
        }
        if let Some(s) = b.steps {
            budget = budget.with_steps(s);
        }
    }
    if let Some(s) = budget_steps {
        budget = budget.with_steps(s);
    }
    let map = FunctionalMap::new(dom, rule)?.with_budget(budget);
    let alphabet = Alphabet::new(cfg.alphabet_size.unwrap_or(2))?;
    let system = match cfg.kind {
        Kind::GeneralizedShift => {
            if cfg.base.is_some() {
                return Err(ConfigError::plain("`base` only applies to Fort systems"));
            }
            System::Shift(map)
        }
        Kind::Fort => {
            if cfg.alphabet_size.is_some() {
                return Err(ConfigError::plain("`alphabet_size` only applies to generalized shifts"));
            }
            let base = cfg.base.as_ref().ok_or_else(|| ConfigError::plain("Fort systems need a `base` point"))?;
            let base = resolve_point(map.domain(), base)?;
            System::Fort(FortSystem::new(map, base)?)
        }
    };
    Ok(Loaded { config: cfg, system, alphabet, builtin: None })
}

fn small(v: &BigInt) -> Result<i64, ConfigError> {
    i64::try_from(v).map_err(|_| ConfigError::plain(format!("{v} does not fit a config integer")))
}

fn sub_rule_config(r: &SubRule) -> Result<SubRuleConfig, ConfigError> {
    Ok(match r {
        SubRule::Affine { a, b } if a == &BigInt::from(0) => SubRuleConfig::Constant { value: small(b)? },
        SubRule::Affine { a, b } => SubRuleConfig::Affine { a: small(a)?, b: small(b)? },
        SubRule::SquarePlus { c } => SubRuleConfig::SquarePlus { c: small(c)? },
    })
}

fn guard_config(g: &Guard) -> Result<GuardConfig, ConfigError> {
    Ok(match g {
        Guard::Point(p) => GuardConfig::Point { at: small(p)? },
        Guard::Interval { lo, hi } => GuardConfig::Interval {
            lo: lo.as_ref().map(small).transpose()?,
            hi: hi.as_ref().map(small).transpose()?,
        },
        Guard::Residue { residue, modulus } => GuardConfig::Residue { residue: small(residue)?, modulus: small(modulus)? },
    })
}

/// Config text describing `system`.
pub fn config_for(system: &System) -> Result<SystemConfig, ConfigError> {
    let (kind, map, base) = match system {
        System::Shift(m) => (Kind::GeneralizedShift, m, None),
        System::Fort(s) => (Kind::Fort, s.map(), Some(s.base().clone())),
    };
    let index_set = match map.domain() {
        IndexSet::Integers => IndexSetConfig::Integers,
        IndexSet::Finite(names) => {
            if names.iter().enumerate().all(|(k, n)| *n == atom_name(k)) {
                IndexSetConfig::Atoms { count: Some(names.len()), names: None }
            } else {
                IndexSetConfig::Atoms { count: None, names: Some(names.clone()) }
            }
        }
    };
    let rule = match map.rule() {
        Rule::Table(t) => RuleConfig::Table { images: t.iter().map(|&k| PointRef::Int(k as i64)).collect() },
        Rule::Affine { a, b } => RuleConfig::Affine { a: small(a)?, b: small(b)? },
        Rule::SquarePlus { c } => RuleConfig::SquarePlus { c: small(c)? },
        Rule::Piecewise(pw) => RuleConfig::Piecewise {
            branches: pw
                .branches
                .iter()
                .map(|(g, r)| Ok(BranchConfig { guard: guard_config(g)?, then: sub_rule_config(r)? }))
                .collect::<Result<_, ConfigError>>()?,
            default: sub_rule_config(&pw.default)?,
        },
    };
    let budget = (map.budget != Budget::default()).then(|| BudgetConfig {
        magnitude: i64::try_from(&map.budget.magnitude).ok().map(|m| m as u64),
        steps: Some(map.budget.steps),
    });
    Ok(SystemConfig {
        kind,
        alphabet_size: (kind == Kind::GeneralizedShift).then_some(2),
        base: base.map(|b| small(&b)).transpose()?.map(PointRef::Int),
        window: None,
        index_set,
        map: rule,
        budget,
        sequence: None,
        instance: None,
    })
}

/// `builtin:NAME` or a path to a config file.
pub fn load_source(source: &str, budget_steps: Option<u64>) -> Result<Loaded, ConfigError> {
    if let Some(name) = source.strip_prefix("builtin:") {
        let b = builtin(name)?;
        let cfg = config_for(&b.system)?;
        let mut loaded = load_config(cfg, budget_steps)?;
        loaded.builtin = Some(b.name);
        return Ok(loaded);
    }
    let text = std::fs::read_to_string(source).map_err(|e| ConfigError::plain(format!("{source}: {e}")))?;
    let cfg = parse_config(&text).map_err(|e| ConfigError { message: format!("{source}: {}", e.message), ..e })?;
    load_config(cfg, budget_steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use genshift_core::catalog::{builtins, classify};

    #[test]
    fn builtins_round_trip() {
        for b in builtins() {
            let text = render_config(&config_for(&b.system).unwrap());
            let back = load_config(parse_config(&text).unwrap(), None).unwrap();
            assert_eq!(back.system, b.system, "{}:\n{text}", b.name);
            assert_eq!(classify(&back.system).decisions(), classify(&b.system).decisions());
        }
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_config("kind = \"fort\"\nbase = 0\n[index_set]\nkind = \"reals\"\n").unwrap_err();
        assert_eq!(e.line, Some(4));
        let e = parse_config("kind = \n").unwrap_err();
        assert_eq!((e.line, e.column), (Some(1), Some(8)));
    }

    #[test]
    fn named_table() {
        let cfg = parse_config(
            "kind = \"generalized_shift\"\n[index_set]\nkind = \"atoms\"\nnames = [\"p\", \"q\"]\n[map]\nrule = \"table\"\nimages = [\"q\", \"q\"]\n",
        )
        .unwrap();
        let l = load_config(cfg, None).unwrap();
        assert_eq!(l.map().table_images(), Some(&[1usize, 1][..]));
    }

    #[test]
    fn sequences() {
        assert_eq!(parse_sequence("naturals", Some(5)).unwrap().prefix(), vec![1, 2, 3, 4, 5]);
        assert_eq!(parse_sequence("arithmetic:3:6", Some(3)).unwrap().prefix(), vec![3, 9, 15]);
        assert_eq!(parse_sequence("explicit:1,4,9", None).unwrap().prefix(), vec![1, 4, 9]);
        assert!(parse_sequence("explicit:4,1", None).is_err());
        assert!(parse_sequence("primes", None).is_err());
    }

    #[test]
    fn mismatched_rule_and_domain() {
        let cfg = parse_config("kind = \"generalized_shift\"\n[index_set]\nkind = \"integers\"\n[map]\nrule = \"table\"\nimages = [0]\n").unwrap();
        assert!(load_config(cfg, None).is_err());
    }
}
