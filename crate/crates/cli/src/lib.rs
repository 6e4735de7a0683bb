//! Command-line front end: config ingestion, analysis reports, witness files
//! and the cross-check gate.

pub mod config;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use config::{load_source, parse_sequence, ConfigError, Loaded};
use genshift_core::catalog::{builtin, builtins, classify, describe_set, discrepancy, Classification, System};
use genshift_core::fort::{build_fort_rho, validate_continuity, FortWindow};
use genshift_core::oracle::{crosscheck, exhaustive_tracer_search, relevant_support, CrosscheckOptions};
use genshift_core::shift::{eval_orbit, Configuration};
use genshift_core::specification::{build_tracing_point, decide_weak_spec, gap_bound};
use genshift_core::strobo::{build_rho, decide_strobo, verify_uniform_convergence, DEFAULT_PREFIX};
use genshift_core::{idx, Decision, Error, FunctionalMap, Index, IndexSet, SequenceSpec, SpecInstance, Verdict, Window};

pub const EXIT_DECIDED: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_UNKNOWN: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

/// Largest support the witness command hands to the exhaustive search.
const ORACLE_SUPPORT: usize = 16;

#[derive(Parser, Debug)]
#[command(name = "genshift", version, about = "Specification and stroboscopical properties of generalized shifts and Fort systems")]
pub struct Cli {
    /// Seed for every randomized check.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Step budget for orbit exploration on integer rules.
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide every property of a system.
    Analyze {
        /// Config path or `builtin:NAME` (C1, C2, C3, D1, D2, D3).
        source: String,
        #[arg(long)]
        json: bool,
    },
    /// Build and verify a tracing point or a ρ-map.
    Witness {
        source: String,
        #[arg(long, value_enum)]
        kind: WitnessKind,
        /// TOML file holding `target` and `[[segments]]`.
        #[arg(long)]
        instance: Option<String>,
        /// `naturals`, `arithmetic:START:STEP` or `explicit:1,2,3`.
        #[arg(long)]
        sequence: Option<String>,
        /// Number of sequence terms to use.
        #[arg(long)]
        prefix: Option<usize>,
        /// Comma-separated window coordinates.
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
        /// Write the witness JSON here instead of stdout.
        #[arg(long)]
        out: Option<String>,
    },
    /// The property table with the builtin systems classified.
    TableA {
        #[arg(long)]
        json: bool,
        #[arg(long)]
        no_builtins: bool,
    },
    /// Decisions, witnesses and brute-force oracles over all small tables.
    Crosscheck {
        #[arg(long, default_value_t = 3)]
        atoms: usize,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum WitnessKind {
    Trace,
    Rho,
}

/// What a command run produced.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Failure {
    code: i32,
    message: String,
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure { code: EXIT_INPUT, message: format!("config error: {e}") }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Invariant(_) => EXIT_INVARIANT,
            Error::Undecided(_) => EXIT_UNKNOWN,
            _ => EXIT_INPUT,
        };
        Failure { code, message: e.to_string() }
    }
}

type Run = Result<Outcome, Failure>;

pub fn run<I, S>(args: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_DECIDED };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code, stdout: String::new(), stderr: text }
            } else {
                Outcome { code, stdout: text, stderr: String::new() }
            };
        }
    };
    let result = match &cli.command {
        Command::Analyze { source, json } => analyze(&cli, source, *json),
        Command::Witness { source, kind, instance, sequence, prefix, window, out } => {
            witness(&cli, source, *kind, instance.as_deref(), sequence.as_deref(), *prefix, window.as_deref(), out.as_deref())
        }
        Command::TableA { json, no_builtins } => table_a(*json, *no_builtins),
        Command::Crosscheck { atoms, json } => cmd_crosscheck(&cli, *atoms, *json),
    };
    result.unwrap_or_else(|f| Outcome { code: f.code, stdout: String::new(), stderr: format!("error: {}\n", f.message) })
}

fn verdict_json(v: &Verdict) -> Value {
    json!({ "decision": v.decision.to_string(), "certificate": v.certificate.to_string() })
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize") + "\n"
}

/// Property names, paired with the verdict that answers them.
fn property_lines(c: &Classification) -> Vec<(&'static str, &Verdict)> {
    vec![
        ("almost weak specification", &c.weak_spec),
        ("weak specification", &c.weak_spec),
        ("specification", &c.spec),
        ("uniform stroboscopical", &c.strobo),
        ("stroboscopical", &c.strobo),
        ("strongly stroboscopical", &c.strong_strobo),
    ]
}

fn analyze(cli: &Cli, source: &str, as_json: bool) -> Run {
    let loaded = load_source(source, cli.budget)?;
    let c = classify(&loaded.system);
    let continuity = match &loaded.system {
        System::Fort(s) => Some(validate_continuity(s)),
        System::Shift(_) => None,
    };
    let disc = loaded.builtin.and_then(|n| discrepancy(&builtin(n).expect("loaded builtin"), &c));
    let unknown = c.any_unknown() || continuity.as_ref().is_some_and(Verdict::is_unknown);
    let code = if unknown { EXIT_UNKNOWN } else { EXIT_DECIDED };
    let stdout = if as_json {
        let props: BTreeMap<&str, Value> = property_lines(&c).into_iter().map(|(k, v)| (k, verdict_json(v))).collect();
        to_json(&json!({
            "system": loaded.system.to_string(),
            "builtin": loaded.builtin,
            "properties": props,
            "continuity": continuity.as_ref().map(verdict_json),
            "eventual_image": c.eventual_image.as_ref().map(describe_set),
            "discrepancy": disc.as_ref().map(|d| d.note.clone()),
        }))
    } else {
        let mut s = String::new();
        let _ = writeln!(s, "system: {}", loaded.system);
        if let Some(v) = &continuity {
            let _ = writeln!(s, "{:<28}{v}", "continuity");
        }
        if let Some(set) = &c.eventual_image {
            let _ = writeln!(s, "{:<28}{}", "eventual image", describe_set(set));
        }
        for (name, v) in property_lines(&c) {
            let _ = writeln!(s, "{name:<28}{v}");
        }
        if let Some(d) = &disc {
            let _ = writeln!(s, "DISCREPANCY: {}", d.note);
        }
        s
    };
    Ok(Outcome { code, stdout, stderr: String::new() })
}

fn require(property: &str, v: &Verdict) -> Result<(), Failure> {
    match v.decision {
        Decision::Yes => Ok(()),
        Decision::No => Err(Failure { code: EXIT_INPUT, message: format!("refused: {property} fails ({})", v.certificate) }),
        Decision::Unknown => Err(Failure { code: EXIT_UNKNOWN, message: format!("{property} undecided ({})", v.certificate) }),
    }
}

fn parse_window(loaded: &Loaded, text: Option<&str>) -> Result<Option<Vec<Index>>, Failure> {
    match text {
        Some(t) => {
            let pts = t
                .split(',')
                .map(|p| {
                    let p = p.trim();
                    let r = match p.parse::<i64>() {
                        Ok(v) => config::PointRef::Int(v),
                        Err(_) => config::PointRef::Name(p.to_string()),
                    };
                    loaded.resolve(&r)
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Some(pts))
        }
        None => Ok(loaded.window()?),
    }
}

fn first_point(map: &FunctionalMap) -> Index {
    match map.domain() {
        IndexSet::Integers => idx(0),
        IndexSet::Finite(_) => idx(0),
    }
}

/// Two segments on the target window: a marker pattern, then the constant
/// second symbol after the smallest admissible gap.
pub fn bundled_instance(map: &FunctionalMap, target: Window, alphabet: genshift_core::Alphabet) -> genshift_core::Result<SpecInstance> {
    let gap = gap_bound(map, &target)?;
    let y1 = Configuration::new(alphabet, 0, target.iter().map(|c| (c.clone(), 1)))?;
    let y2 = Configuration::constant(alphabet, 1)?;
    SpecInstance::new(vec![y1, y2], vec![(0, 1), (1 + gap, 2 + gap)], target)
}

#[allow(clippy::too_many_arguments)]
fn witness(
    cli: &Cli,
    source: &str,
    kind: WitnessKind,
    instance: Option<&str>,
    sequence: Option<&str>,
    prefix: Option<usize>,
    window: Option<&str>,
    out: Option<&str>,
) -> Run {
    let loaded = load_source(source, cli.budget)?;
    let window = parse_window(&loaded, window)?;
    let (doc, ok, summary) = match (kind, &loaded.system) {
        (WitnessKind::Trace, System::Shift(map)) => trace_witness(&loaded, map, instance, window)?,
        (WitnessKind::Trace, System::Fort(_)) => {
            return Err(Failure { code: EXIT_INPUT, message: "tracing points are built for generalized shifts".into() })
        }
        (WitnessKind::Rho, _) => {
            let seq = match sequence {
                Some(s) => parse_sequence(s, prefix)?,
                None => match loaded.sequence()? {
                    Some(s) => s,
                    None => SequenceSpec::naturals(prefix.unwrap_or(DEFAULT_PREFIX)),
                },
            };
            rho_witness(cli, &loaded, &seq, window)?
        }
    };
    let text = to_json(&doc);
    let mut stdout = String::new();
    match out {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| Failure { code: EXIT_INPUT, message: format!("{path}: {e}") })?;
            let _ = writeln!(stdout, "witness written to {path}");
        }
        None => stdout.push_str(&text),
    }
    let stderr = summary.iter().map(|l| format!("{l}\n")).collect::<String>();
    if !ok {
        return Ok(Outcome { code: EXIT_INVARIANT, stdout, stderr: stderr + "verification FAILED\n" });
    }
    Ok(Outcome { code: EXIT_DECIDED, stdout, stderr })
}

type WitnessDoc = (Value, bool, Vec<String>);

fn trace_witness(loaded: &Loaded, map: &FunctionalMap, instance: Option<&str>, window: Option<Vec<Index>>) -> Result<WitnessDoc, Failure> {
    require("weak specification", &decide_weak_spec(map))?;
    let inst = match instance {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure { code: EXIT_INPUT, message: format!("{path}: {e}") })?;
            let cfg: config::InstanceConfig = toml::from_str(&text)
                .map_err(|e| Failure { code: EXIT_INPUT, message: format!("{path}: {}", e.message().trim()) })?;
            config::build_instance(loaded, &cfg)?
        }
        None => match loaded.instance()? {
            Some(i) => i,
            None => {
                let target = Window::new(window.unwrap_or_else(|| vec![first_point(map)]))?;
                bundled_instance(map, target, loaded.alphabet)?
            }
        },
    };
    let report = build_tracing_point(map, &inst, 0)?;
    // independent re-evaluation of every window
    let mut recheck = true;
    for (y, &(l, k)) in inst.segments().iter().zip(inst.windows()) {
        for t in l..=k {
            recheck &= eval_orbit(map, &report.tracer, inst.target(), t)? == eval_orbit(map, y, inst.target(), t)?;
        }
    }
    let support = relevant_support(map, &inst)?;
    let oracle = if support.len() <= ORACLE_SUPPORT {
        let found = exhaustive_tracer_search(map, &inst, &support, 0)?;
        Some(found.is_some())
    } else {
        None
    };
    let ok = report.passed() && recheck && oracle != Some(false);
    let overrides: Vec<Value> =
        report.tracer.overrides().iter().map(|(c, s)| json!([map.label(c), s])).collect();
    let doc = json!({
        "kind": "trace",
        "system": map.describe(),
        "target": inst.target().iter().map(|c| map.label(c)).collect::<Vec<_>>(),
        "windows": inst.windows(),
        "gap_bound": report.gap_bound_used,
        "tracer": { "fill": report.tracer.default_symbol(), "overrides": overrides },
        "verification": {
            "window_checks": report.checks.len(),
            "passed": report.passed(),
            "independent_recheck": recheck,
            "support": support.len(),
            "exhaustive_search": oracle.map_or("skipped".to_string(), |f| if f { "tracer exists".into() } else { "no tracer".into() }),
        },
    });
    let summary = vec![
        format!("gap bound {} over {} segments", report.gap_bound_used, inst.segments().len()),
        format!("{} window checks passed: {}", report.checks.len(), report.passed()),
        format!("independent re-check: {recheck}"),
        format!("exhaustive search over {} coordinates: {}", support.len(), oracle.map_or("skipped", |f| if f { "tracer exists" } else { "none" })),
    ];
    Ok((doc, ok, summary))
}

fn rho_witness(cli: &Cli, loaded: &Loaded, seq: &SequenceSpec, window: Option<Vec<Index>>) -> Result<WitnessDoc, Failure> {
    match &loaded.system {
        System::Shift(map) => {
            require("stroboscopical property", &decide_strobo(map))?;
            let coords = window.unwrap_or_else(|| map.atoms().unwrap_or_else(|| vec![idx(0)]));
            let h = Window::new(coords)?;
            let rho = build_rho(map, seq, &h)?;
            let exact = rho.check_guarantee(map)?;
            let conv = verify_uniform_convergence(map, &rho, seq, &h, 50, cli.seed, loaded.alphabet)?;
            let mut relocations = Vec::new();
            for theta in h.iter() {
                let mut cur = theta.clone();
                let mut t = 0;
                for (p, &n) in rho.subsequence.iter().enumerate().take(rho.threshold + 4) {
                    cur = map.iterate(&cur, n - t)?;
                    t = n;
                    if p + 1 >= rho.threshold {
                        relocations.push(json!({
                            "theta": map.label(theta), "i": p + 1, "n_i": n,
                            "alpha": map.label(&cur),
                            "relocated": rho.relocate(&cur).map(|b| map.label(&b)),
                        }));
                    }
                }
            }
            let residues: BTreeMap<String, u64> = rho
                .periodic
                .as_ref()
                .map(|p| p.residues.residues.iter().map(|(m, f)| (m.to_string(), *f)).collect())
                .unwrap_or_default();
            let doc = json!({
                "kind": "rho",
                "system": map.describe(),
                "construction": format!("{:?}", rho.kind),
                "sequence": seq.to_string(),
                "window": h.iter().map(|c| map.label(c)).collect::<Vec<_>>(),
                "subsequence_head": rho.subsequence.iter().take(30).collect::<Vec<_>>(),
                "selected_terms": rho.subsequence.len(),
                "threshold": rho.threshold,
                "proof_bound": rho.proof_bound,
                "residues": residues,
                "relocations": relocations,
                "guarantee": rho.guarantee(),
                "verification": {
                    "index_arithmetic": exact,
                    "random_configurations": conv.trials,
                    "probes": conv.checked_indices,
                    "convergence": conv.passed(),
                    "counterexample": conv.failure.as_ref().map(|f| format!("trial {} at i = {}, θ = {}", f.trial, f.i, f.theta)),
                },
            });
            let summary = vec![
                format!("{:?} ρ-map, threshold {} (proved from {})", rho.kind, rho.threshold, rho.proof_bound),
                format!("index arithmetic: {exact}"),
                format!("uniform convergence over {} configurations: {}", conv.trials, conv.passed()),
            ];
            Ok((doc, exact && conv.passed(), summary))
        }
        System::Fort(sys) => {
            let coords = match window {
                Some(w) => w,
                None => match sys.map().atoms() {
                    Some(a) => a.into_iter().filter(|p| p != sys.base()).collect(),
                    None => vec![idx(1), idx(-1)],
                },
            };
            let h = FortWindow::new(sys, coords)?;
            let rho = build_fort_rho(sys, seq, &h)?;
            let arithmetic = rho.check_arithmetic();
            let exact = rho.verify_exact(sys)?;
            let points: Vec<Value> = rho
                .periods
                .iter()
                .map(|(z, m)| {
                    Ok(json!({
                        "point": sys.label(z), "period": m,
                        "exponent": rho.exponent(*m),
                        "rho": sys.label(&rho.apply(sys, z)?),
                    }))
                })
                .collect::<Result<_, Error>>()?;
            let doc = json!({
                "kind": "fort_rho",
                "system": sys.to_string(),
                "sequence": seq.to_string(),
                "threshold": rho.threshold,
                "subsequence_head": rho.subsequence().iter().take(30).collect::<Vec<_>>(),
                "residues": rho.residues.residues.iter().map(|(m, f)| (m.to_string(), *f)).collect::<BTreeMap<_, _>>(),
                "points": points,
                "verification": { "index_arithmetic": arithmetic, "exact_iteration": exact },
            });
            let summary = vec![
                format!("Fort ρ with threshold N = {}", rho.threshold),
                format!("index arithmetic: {arithmetic}"),
                format!("exact iteration: {exact}"),
            ];
            Ok((doc, arithmetic && exact, summary))
        }
    }
}

const TABLE_ROWS: [(&str, &str, &str); 3] = [
    ("almost weak specification / weak specification", "Per(φ) = ∅", "⋂ 𝔥ⁿ(F) is a singleton"),
    ("uniform stroboscopical / stroboscopical", "φ is one-to-one", "Per(𝔥) = F"),
    ("specification / strongly stroboscopical", "Per(φ) = ∅ and φ one-to-one", "F = {b}"),
];

fn table_a(as_json: bool, no_builtins: bool) -> Run {
    let systems: Vec<_> = if no_builtins {
        Vec::new()
    } else {
        builtins().into_iter().map(|b| {
            let c = classify(&b.system);
            let d = discrepancy(&b, &c);
            (b, c, d)
        }).collect()
    };
    let holders = |row: usize, fort: bool| -> Vec<&str> {
        systems
            .iter()
            .filter(|(b, _, _)| matches!(b.system, System::Fort(_)) == fort)
            .filter(|(_, c, _)| match row {
                0 => c.weak_spec.is_yes(),
                1 => c.strobo.is_yes(),
                _ => c.spec.is_yes() && c.strong_strobo.is_yes(),
            })
            .map(|(b, _, _)| b.name)
            .collect()
    };
    let any_unknown = systems.iter().any(|(_, c, _)| c.any_unknown());
    let code = if any_unknown { EXIT_UNKNOWN } else { EXIT_DECIDED };
    if as_json {
        let rows: Vec<Value> = TABLE_ROWS
            .iter()
            .enumerate()
            .map(|(k, (p, s, f))| json!({ "properties": p, "shift": s, "fort": f, "shift_systems": holders(k, false), "fort_systems": holders(k, true) }))
            .collect();
        let sys: Vec<Value> = systems
            .iter()
            .map(|(b, c, d)| json!({
                "name": b.name, "summary": b.summary,
                "weak_spec": c.weak_spec.decision.to_string(),
                "strobo": c.strobo.decision.to_string(),
                "spec": c.spec.decision.to_string(),
                "strong_strobo": c.strong_strobo.decision.to_string(),
                "eventual_image": c.eventual_image.as_ref().map(describe_set),
                "diagram": { "weak_spec": b.diagram.weak_spec, "strobo": b.diagram.strobo, "spec": b.diagram.spec },
                "discrepancy": d.as_ref().map(|d| d.note.clone()),
            }))
            .collect();
        return Ok(Outcome { code, stdout: to_json(&json!({ "rows": rows, "systems": sys })), stderr: String::new() });
    }
    let mut s = String::new();
    let _ = writeln!(s, "{:<50}| {:<30}| {:<26}", "property", "(X^Γ, σ_φ)", "(F, 𝔥)");
    let _ = writeln!(s, "{}", "-".repeat(108));
    for (k, (p, sh, f)) in TABLE_ROWS.iter().enumerate() {
        let _ = writeln!(s, "{p:<50}| {sh:<30}| {f:<26}");
        if !systems.is_empty() {
            let _ = writeln!(s, "{:<50}| {:<30}| {:<26}", "  holds for", holders(k, false).join(" "), holders(k, true).join(" "));
        }
    }
    if !systems.is_empty() {
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<5}{:<11}{:<11}{:<11}{:<15}summary", "", "weak spec", "strobo", "spec", "strong strobo");
        for (b, c, d) in &systems {
            let _ = writeln!(
                s,
                "{:<5}{:<11}{:<11}{:<11}{:<15}{}",
                b.name,
                c.weak_spec.decision.to_string(),
                c.strobo.decision.to_string(),
                c.spec.decision.to_string(),
                c.strong_strobo.decision.to_string(),
                b.summary
            );
            if let Some(d) = d {
                let _ = writeln!(s, "     DISCREPANCY: {}", d.note);
            }
        }
    }
    Ok(Outcome { code, stdout: s, stderr: String::new() })
}

fn cmd_crosscheck(cli: &Cli, atoms: usize, as_json: bool) -> Run {
    let start = Instant::now();
    let report = crosscheck(CrosscheckOptions::new(atoms, cli.seed))?;
    let elapsed = start.elapsed().as_secs_f64();
    let code = if report.passed() { EXIT_DECIDED } else { EXIT_INVARIANT };
    let stdout = if as_json {
        to_json(&json!({
            "atoms": atoms,
            "stats": report.stats,
            "checks": report.checks,
            "disagreements": report.disagreements,
            "discrepancies": report.discrepancies.iter().map(|d| d.note.clone()).collect::<Vec<_>>(),
            "seconds": elapsed,
        }))
    } else {
        let mut s = String::new();
        for st in &report.stats {
            let _ = writeln!(
                s,
                "{} atoms: {} maps, strobo Yes {}, weak spec Yes {}, Fort weak spec Yes {}, Fort strobo Yes {}",
                st.atoms, st.maps, st.strobo_yes, st.weak_spec_yes, st.fort_weak_spec_yes, st.fort_strobo_yes
            );
        }
        for d in &report.discrepancies {
            let _ = writeln!(s, "DISCREPANCY (reported, not a disagreement): {}", d.note);
        }
        for d in &report.disagreements {
            let _ = writeln!(s, "DISAGREEMENT: {d}");
        }
        let _ = writeln!(s, "{} checks, {} disagreements, {elapsed:.2}s", report.checks, report.disagreements.len());
        s
    };
    Ok(Outcome { code, stdout, stderr: String::new() })
}
