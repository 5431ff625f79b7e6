//! The `prefcomm` command line: argument parsing, network documents and
//! report rendering. [`run`] is the whole program minus process exit.

pub mod document;
pub mod report;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use prefcomm_core::aggregation::{Aggregator, Harmonious, WeightSchema};
use prefcomm_core::axioms::{
    find_violation, test_aggregation_axiom, weighted_gs_gauntlet, with_jobs, AggregationAxiom, AxiomId, Context, Counterexample,
    FalsifyConfig, Origin,
};
use prefcomm_core::dimacs::parse_dimacs;
use prefcomm_core::generators::{
    cubic_1in3_gadget, hero_sidekick, one_in_three_assignment, pad_network, planted_network, random_network, rng, sat_assignment,
    sat_to_network, GadgetOutput, SatInstance,
};
use prefcomm_core::lexpref::{gs_witness, gs_witness_forced, sa_witness, sa_witness_forced, GsWitness, MemberBijection, SaWitness};
use prefcomm_core::stability::{
    alpha_beta, b3ct_perturbation_bounds, b3ct_perturbation_breaker, delta_stable_harmonious, delta_strong_b3ct,
    delta_strong_fixed_point, delta_strong_harmonious, identify, perturbation_report, sample_stable_harmonious, SampleMode,
    PERTURBATION_CAP,
};
use prefcomm_core::{enumerate_rule, falsify_axiom, instances, parse_ratio, EnumerateOptions, PreferenceNetwork, Ratio, Rule, SubsetMask};
use serde_json::{json, Value};

use crate::document::{parse_network, NetworkDocument};
use crate::report::{table, Report};

#[derive(Debug, Parser)]
#[command(name = "prefcomm", version, about = "Community rules, axioms and stability in preference networks")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Master seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "PREFCOMM_JOBS")]
    pub jobs: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Lift the size caps on exhaustive searches.
    #[arg(long, global = true)]
    pub force: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Args)]
pub struct Input {
    /// Network document (JSON); `-` reads stdin.
    #[arg(value_name = "NETWORK")]
    pub network: Option<PathBuf>,
    /// Use a built-in example network instead of a file.
    #[arg(long, value_name = "NAME", conflicts_with = "network")]
    pub instance: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a network document and report every problem found.
    Validate {
        #[command(flatten)]
        input: Input,
    },
    /// Test whether a subset is a community under a rule.
    Check {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        rule: String,
        /// Comma-separated member labels.
        #[arg(long)]
        set: String,
    },
    /// List every community of a network under a rule.
    Enumerate {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        rule: String,
    },
    /// Search for axiom violations, check one axiom instance, test
    /// aggregation axioms, or run the weighted-schema gauntlet.
    Axioms(AxiomsArgs),
    /// Perturbation margins and δ-strength of a subset.
    Stability {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        set: String,
        /// Rational such as `1/4` or `0.25`.
        #[arg(long, default_value = "0")]
        delta: String,
        /// Fixed-point rule for the generic δ-strong test.
        #[arg(long)]
        rule: Option<String>,
        /// A second profile to measure as a perturbation.
        #[arg(long, value_name = "FILE")]
        perturbed: Option<PathBuf>,
        /// Search all δ-perturbations for one that breaks the community.
        #[arg(long)]
        exhaustive: bool,
    },
    /// Find δ-stable harmonious communities by identification.
    Identify {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "1/4")]
        delta: String,
        /// Random identifying multisets to draw.
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        /// Try every subset of members instead of sampling.
        #[arg(long)]
        enumerate: bool,
        /// Identify from this multiset of labels (repeats allowed).
        #[arg(long, requires = "size")]
        from: Option<String>,
        /// Target community size for `--from`.
        #[arg(long)]
        size: Option<usize>,
    },
    /// Build networks: gadgets, padding and random instances.
    Generate {
        #[command(subcommand)]
        kind: Generate,
    },
    /// Brute-force satisfiability of a DIMACS instance.
    Oracle {
        #[command(subcommand)]
        kind: Oracle,
    },
}

#[derive(Debug, Args)]
pub struct AxiomsArgs {
    #[command(flatten)]
    pub input: Input,
    /// Community rule under test.
    #[arg(long)]
    pub rule: Option<String>,
    /// Axiom or property name; repeatable. Defaults to the eight axioms.
    #[arg(long = "axiom")]
    pub axioms: Vec<String>,
    /// Random trials per axiom.
    #[arg(long, default_value_t = 1000)]
    pub budget: u64,
    /// Largest random network size.
    #[arg(long, default_value_t = 6)]
    pub max_n: usize,
    /// Check the built-in worked examples before random trials.
    #[arg(long = "builtin-instances", visible_alias = "paper-instances")]
    pub builtin_instances: bool,
    /// Subset for a single-instance check.
    #[arg(long)]
    pub set: Option<String>,
    /// Second profile for transform axioms.
    #[arg(long, value_name = "FILE")]
    pub transformed: Option<PathBuf>,
    /// Image labels of members in order, for anonymity.
    #[arg(long)]
    pub permutation: Option<String>,
    /// Embedded ground set.
    #[arg(long)]
    pub sub_ground: Option<String>,
    #[arg(long)]
    pub outsider: Option<String>,
    /// Test aggregation axioms of `harmonious`, `b3ct` or `borda`.
    #[arg(long, conflicts_with = "rule")]
    pub aggregator: Option<String>,
    /// `U`, `ND` or `IIA`; repeatable. Defaults to all three.
    #[arg(long = "aggregation-axiom", requires = "aggregator")]
    pub aggregation_axioms: Vec<String>,
    #[arg(long, default_value_t = 3)]
    pub candidates: usize,
    #[arg(long, default_value_t = 3)]
    pub voters: usize,
    /// Weights w1..w5 for the weighted-schema gauntlet.
    #[arg(long, conflicts_with_all = ["rule", "aggregator"])]
    pub gauntlet: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Generate {
    /// `d` hero-sidekick duos.
    HeroSidekick {
        #[arg(long)]
        duos: usize,
    },
    /// Uniform random orders, optionally with a planted subset.
    Random {
        #[arg(long)]
        members: usize,
        /// Plant a subset of this size on the first members.
        #[arg(long)]
        planted: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        loyalty: f64,
    },
    /// Self-approval gadget for a 3-SAT instance.
    FromSat { cnf: PathBuf },
    /// λ-harmonious gadget for a cubic 1-in-3 SAT instance.
    CubicGadget {
        cnf: PathBuf,
        #[arg(long, default_value = "0")]
        lambda: String,
    },
    /// Pad a subset with mirrored members.
    Pad {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        set: String,
        /// Number of added members; defaults to `|S|`.
        #[arg(long)]
        size: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum Oracle {
    Sat { cnf: PathBuf },
    #[command(name = "1in3")]
    OneInThree { cnf: PathBuf },
}

/// Input or usage problem; always exit code 2.
#[derive(Debug)]
pub struct CliError(pub String);

impl From<prefcomm_core::Error> for CliError {
    fn from(e: prefcomm_core::Error) -> Self {
        CliError(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

/// A finished command: its JSON result, text rendering and exit code.
pub struct Output {
    pub result: Value,
    pub text: String,
    pub exit: i32,
    /// Text output is the bare text, without the report header.
    pub bare: bool,
}

impl Output {
    fn new(result: Value, text: String, exit: i32) -> Self {
        Output { result, text, exit, bare: false }
    }
}

/// Parses `args` (program name first), runs the command and writes the
/// report. Returns the exit code: 0 success, 1 violation or counterexample
/// found, 2 usage or input error.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    let argv: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let done = match with_jobs(cli.global.jobs, || execute(&cli)) {
        Ok(r) => r,
        Err(e) => Err(CliError(e.to_string())),
    };
    let output = match done {
        Ok(o) => o,
        Err(CliError(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            return 2;
        }
    };
    let report = Report::new(argv, cli.global.seed, command_name(&cli.command), output.result);
    let rendered = match cli.global.format {
        Format::Json => report.to_json(),
        Format::Text if output.bare => output.text,
        Format::Text => format!("{}{}", report.header(), output.text),
    };
    match &cli.global.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, rendered) {
                let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
                return 2;
            }
        }
        None => {
            let _ = out.write_all(rendered.as_bytes());
        }
    }
    output.exit
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Validate { .. } => "validate",
        Command::Check { .. } => "check",
        Command::Enumerate { .. } => "enumerate",
        Command::Axioms(_) => "axioms",
        Command::Stability { .. } => "stability",
        Command::Identify { .. } => "identify",
        Command::Generate { .. } => "generate",
        Command::Oracle { .. } => "oracle",
    }
}

fn execute(cli: &Cli) -> CliResult<Output> {
    let g = &cli.global;
    match &cli.command {
        Command::Validate { input } => validate(input),
        Command::Check { input, rule, set } => check(&load(input)?, rule, set, g.force),
        Command::Enumerate { input, rule } => enumerate(&load(input)?, rule, g.force),
        Command::Axioms(a) => axioms(a, g),
        Command::Stability { input, set, delta, rule, perturbed, exhaustive } => {
            stability(&load(input)?, set, delta, rule.as_deref(), perturbed.as_deref(), *exhaustive)
        }
        Command::Identify { input, delta, samples, enumerate, from, size } => {
            identify_cmd(&load(input)?, delta, *samples, *enumerate, from.as_deref(), *size, g.seed)
        }
        Command::Generate { kind } => generate(kind, g.seed),
        Command::Oracle { kind } => oracle(kind),
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| CliError(format!("cannot read stdin: {e}")))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| CliError(format!("cannot read {}: {e}", path.display())))
}

fn diagnostics_error(path: &str, diags: &[document::Diagnostic]) -> CliError {
    let lines: Vec<String> = diags.iter().map(|d| format!("{path}: {d}")).collect();
    CliError(format!("invalid network document\n{}", lines.join("\n")))
}

fn load_path(path: &Path) -> CliResult<PreferenceNetwork> {
    parse_network(&read_text(path)?).map_err(|d| diagnostics_error(&path.display().to_string(), &d))
}

fn load(input: &Input) -> CliResult<PreferenceNetwork> {
    match (&input.network, &input.instance) {
        (_, Some(name)) => instances::by_name(name)
            .ok_or_else(|| CliError(format!("unknown built-in instance {name:?}; known: {}", instances::NAMES.join(", ")))),
        (Some(path), None) => load_path(path),
        (None, None) => Err(CliError("no network given: pass a document path or --instance NAME".into())),
    }
}

fn labels_of(net: &PreferenceNetwork, s: SubsetMask) -> Vec<String> {
    s.iter().map(|m| net.label(m).to_string()).collect()
}

fn member(net: &PreferenceNetwork, label: &str) -> CliResult<usize> {
    net.id_of(label.trim()).ok_or_else(|| CliError(format!("{:?} is not a member", label.trim())))
}

fn member_list(net: &PreferenceNetwork, text: &str) -> CliResult<Vec<usize>> {
    let body = text.trim().trim_start_matches('{').trim_end_matches('}');
    if body.trim().is_empty() {
        return Err(CliError("empty member list".into()));
    }
    body.split(',').map(|l| member(net, l)).collect()
}

fn parse_set(net: &PreferenceNetwork, text: &str) -> CliResult<SubsetMask> {
    Ok(member_list(net, text)?.into_iter().collect())
}

fn parse_rule(text: &str) -> CliResult<Rule> {
    Ok(Rule::parse(text)?)
}

fn bijections_json(net: &PreferenceNetwork, b: &[MemberBijection]) -> Value {
    b.iter()
        .map(|mb| {
            let pairs: Vec<[&str; 2]> = mb.pairs.iter().map(|&(u, f)| [net.label(u), net.label(f)]).collect();
            json!({ "member": net.label(mb.member), "pairs": pairs })
        })
        .collect()
}

fn gs_json(net: &PreferenceNetwork, w: &GsWitness) -> Value {
    json!({ "g": labels_of(net, w.g), "g_prime": labels_of(net, w.g_prime), "bijections": bijections_json(net, &w.bijections) })
}

fn sa_json(net: &PreferenceNetwork, w: &SaWitness) -> Value {
    json!({ "g_prime": labels_of(net, w.g_prime), "bijections": bijections_json(net, &w.bijections) })
}

fn doc_json(net: &PreferenceNetwork) -> Value {
    serde_json::to_value(NetworkDocument::from_network(net)).expect("documents serialize")
}

fn ratio_str(r: Ratio) -> String {
    r.to_string()
}

fn counterexample_json(cx: &Counterexample) -> Value {
    let net = &cx.network;
    let origin = match &cx.origin {
        Origin::Given => json!({ "kind": "given" }),
        Origin::BuiltIn(name) => json!({ "kind": "built-in", "instance": name }),
        Origin::Trial { index, seed } => json!({ "kind": "trial", "index": index, "seed": seed }),
    };
    let c = &cx.context;
    json!({
        "axiom": cx.axiom.name(),
        "origin": origin,
        "network": doc_json(net),
        "subset": c.subset.map(|s| labels_of(net, s)),
        "transformed": c.transformed.as_ref().map(doc_json),
        "permutation": c.permutation.as_ref().map(|p| p.iter().map(|&m| net.label(m).to_string()).collect::<Vec<_>>()),
        "sub_ground": c.sub_ground.map(|s| labels_of(net, s)),
        "outsider": c.outsider.map(|v| net.label(v).to_string()),
        "trace": cx.trace,
    })
}

fn origin_text(o: &Origin) -> String {
    match o {
        Origin::Given => "given".into(),
        Origin::BuiltIn(name) => format!("built-in {name}"),
        Origin::Trial { index, seed } => format!("trial {index} (seed {seed})"),
    }
}

fn validate(input: &Input) -> CliResult<Output> {
    let (name, parsed) = match (&input.network, &input.instance) {
        (Some(path), None) => (path.display().to_string(), parse_network(&read_text(path)?)),
        _ => ("built-in".to_string(), Ok(load(input)?)),
    };
    Ok(match parsed {
        Ok(net) => Output::new(
            json!({ "valid": true, "members": net.n(), "diagnostics": [] }),
            format!("{name}: valid network with {} members\n", net.n()),
            0,
        ),
        Err(diags) => {
            let mut text = String::new();
            for d in &diags {
                let _ = writeln!(text, "{name}: {d}");
            }
            Output::new(json!({ "valid": false, "members": Value::Null, "diagnostics": diags }), text, 1)
        }
    })
}

fn check(net: &PreferenceNetwork, rule_text: &str, set: &str, force: bool) -> CliResult<Output> {
    let rule = parse_rule(rule_text)?;
    let s = parse_set(net, set)?;
    let is_member = rule.contains_with(net, s, force)?;
    let mut witnesses = serde_json::Map::new();
    let mut text = format!("rule {rule}\nset {}\nmember {is_member}\n", net.fmt_set(s));
    let (want_gs, want_sa) = match rule {
        Rule::GroupStable => (true, false),
        Rule::SelfApproving => (false, true),
        Rule::Comprehensive => (true, true),
        _ => (false, false),
    };
    if !is_member {
        let gs = if !want_gs { None } else if force { gs_witness_forced(net, s)? } else { gs_witness(net, s)? };
        if let Some(w) = gs {
            let _ = writeln!(text, "GS witness: G = {}, G' = {}", net.fmt_set(w.g), net.fmt_set(w.g_prime));
            witnesses.insert("gs".into(), gs_json(net, &w));
        }
        let sa = if !want_sa { None } else if force { sa_witness_forced(net, s)? } else { sa_witness(net, s)? };
        if let Some(w) = sa {
            let _ = writeln!(text, "SA witness: G' = {}", net.fmt_set(w.g_prime));
            witnesses.insert("sa".into(), sa_json(net, &w));
        }
    }
    let result = json!({ "rule": rule.to_string(), "set": labels_of(net, s), "member": is_member, "witnesses": witnesses });
    Ok(Output::new(result, text, if is_member { 0 } else { 1 }))
}

fn enumerate(net: &PreferenceNetwork, rule_text: &str, force: bool) -> CliResult<Output> {
    let rule = parse_rule(rule_text)?;
    let sets = enumerate_rule(&rule, net, EnumerateOptions { force, ..Default::default() })?;
    let mut text = format!("rule {rule}\n{} communities\n", sets.len());
    for &s in &sets {
        let _ = writeln!(text, "{}", net.fmt_set(s));
    }
    let listed: Vec<Vec<String>> = sets.iter().map(|&s| labels_of(net, s)).collect();
    Ok(Output::new(json!({ "rule": rule.to_string(), "count": sets.len(), "sets": listed }), text, 0))
}

fn parse_axioms(names: &[String]) -> CliResult<Vec<AxiomId>> {
    if names.is_empty() {
        return Ok(AxiomId::AXIOMS.to_vec());
    }
    names.iter().map(|n| n.parse::<AxiomId>().map_err(CliError::from)).collect()
}

fn axioms(a: &AxiomsArgs, g: &Global) -> CliResult<Output> {
    if let Some(w) = &a.gauntlet {
        return gauntlet(w);
    }
    if let Some(f) = &a.aggregator {
        return aggregation_axioms(a, f, g.seed);
    }
    let rule_text = a.rule.as_deref().ok_or_else(|| CliError("--rule is required".into()))?;
    let rule = parse_rule(rule_text)?;
    let list = parse_axioms(&a.axioms)?;
    if a.input.network.is_some() || a.input.instance.is_some() {
        return axiom_instance(a, &rule, &list);
    }
    let cfg = FalsifyConfig { budget: a.budget, seed: g.seed, jobs: g.jobs, include_builtin: a.builtin_instances, max_n: a.max_n };
    let mut rows = Vec::new();
    let mut results = Vec::new();
    let mut details = String::new();
    let mut found = false;
    for ax in list {
        let rep = falsify_axiom(&rule, ax, &cfg)?;
        let cx = rep.counterexample.as_ref();
        found |= cx.is_some();
        rows.push(vec![
            ax.name().to_string(),
            if cx.is_some() { "violated" } else { "no counterexample" }.to_string(),
            rep.builtin_checked.to_string(),
            cx.map_or(String::new(), |c| origin_text(&c.origin)),
        ]);
        if let Some(c) = cx {
            let _ = writeln!(details, "\n{} counterexample ({}):", ax.name(), origin_text(&c.origin));
            for t in &c.trace {
                let _ = writeln!(details, "  {t}");
            }
        }
        results.push(json!({
            "axiom": ax.name(),
            "violated": cx.is_some(),
            "builtin_checked": rep.builtin_checked,
            "counterexample": cx.map(counterexample_json),
        }));
    }
    let text = format!(
        "rule {rule}, budget {}, seed {}\n{}{details}",
        a.budget,
        g.seed,
        table(&["axiom", "result", "built-in", "origin"], &rows)
    );
    let result = json!({ "rule": rule.to_string(), "budget": a.budget, "max_n": a.max_n, "builtin_instances": a.builtin_instances, "axioms": results });
    Ok(Output::new(result, text, i32::from(found)))
}

fn axiom_instance(a: &AxiomsArgs, rule: &Rule, list: &[AxiomId]) -> CliResult<Output> {
    let net = load(&a.input)?;
    let mut ctx = Context::default();
    if let Some(s) = &a.set {
        ctx.subset = Some(parse_set(&net, s)?);
    }
    if let Some(p) = &a.transformed {
        let t = load_path(p)?;
        if t.labels() != net.labels() {
            return Err(CliError("the transformed profile must list the same members in the same order".into()));
        }
        ctx.transformed = Some(t);
    }
    if let Some(p) = &a.permutation {
        ctx.permutation = Some(member_list(&net, p)?);
    }
    if let Some(v) = &a.sub_ground {
        ctx.sub_ground = Some(parse_set(&net, v)?);
    }
    if let Some(v) = &a.outsider {
        ctx.outsider = Some(member(&net, v)?);
    }
    let mut results = Vec::new();
    let mut text = format!("rule {rule}\n");
    let mut found = false;
    for &ax in list {
        let cx = find_violation(rule, ax, &net, &ctx)?;
        found |= cx.is_some();
        match &cx {
            Some(c) => {
                let _ = writeln!(text, "{}: violated", ax.name());
                for t in &c.trace {
                    let _ = writeln!(text, "  {t}");
                }
            }
            None => {
                let _ = writeln!(text, "{}: holds", ax.name());
            }
        }
        results.push(json!({ "axiom": ax.name(), "violated": cx.is_some(), "counterexample": cx.as_ref().map(counterexample_json) }));
    }
    Ok(Output::new(json!({ "rule": rule.to_string(), "axioms": results }), text, i32::from(found)))
}

fn aggregator(name: &str, n: usize) -> CliResult<Box<dyn Aggregator>> {
    Ok(match name.to_ascii_lowercase().as_str() {
        "harmonious" => Box::new(Harmonious),
        "b3ct" => Box::new(WeightSchema::b3ct(n)),
        "borda" => Box::new(WeightSchema::borda(n)),
        other => return Err(CliError(format!("unknown aggregator {other:?}; use harmonious, b3ct or borda"))),
    })
}

fn aggregation_axioms(a: &AxiomsArgs, name: &str, seed: u64) -> CliResult<Output> {
    let f = aggregator(name, a.candidates)?;
    let list: Vec<AggregationAxiom> = if a.aggregation_axioms.is_empty() {
        vec![AggregationAxiom::Unanimity, AggregationAxiom::NonDictatorship, AggregationAxiom::Iia]
    } else {
        a.aggregation_axioms.iter().map(|s| s.parse().map_err(CliError::from)).collect::<CliResult<_>>()?
    };
    let mut rows = Vec::new();
    let mut results = Vec::new();
    let mut violated = false;
    for ax in list {
        let finding = test_aggregation_axiom(f.as_ref(), ax, a.candidates, a.voters, a.budget, seed)?;
        violated |= finding.is_some();
        rows.push(vec![format!("{ax:?}"), if finding.is_some() { "violated" } else { "holds" }.to_string()]);
        results.push(json!({ "axiom": ax, "violated": finding.is_some(), "finding": finding }));
    }
    let text = format!(
        "aggregator {}, {} candidates, {} voters\n{}",
        f.name(),
        a.candidates,
        a.voters,
        table(&["axiom", "result"], &rows)
    );
    let result = json!({ "aggregator": f.name(), "candidates": a.candidates, "voters": a.voters, "budget": a.budget, "axioms": results });
    Ok(Output::new(result, text, i32::from(violated)))
}

fn gauntlet(w: &str) -> CliResult<Output> {
    let parts: Vec<f64> = w
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| CliError(format!("bad weight {x:?}"))))
        .collect::<CliResult<_>>()?;
    let w3: [f64; 5] = parts.try_into().map_err(|_| CliError("--gauntlet needs exactly five weights".into()))?;
    let hit = weighted_gs_gauntlet(w3)?;
    Ok(match hit {
        None => Output::new(json!({ "weights": w3, "hit": Value::Null }), "no GS-violating fixed point found\n".into(), 0),
        Some(h) => {
            let net = &h.network;
            let text = format!(
                "profile {} with positions {:?}: {} is a fixed point, scores {:?}\nGS witness: G = {}, G' = {}\n",
                h.profile,
                h.positions.map(|p| p + 1),
                net.fmt_set(instances::IMPOSSIBILITY_S),
                h.scores,
                net.fmt_set(h.witness.g),
                net.fmt_set(h.witness.g_prime)
            );
            let result = json!({
                "weights": w3,
                "hit": {
                    "profile": h.profile,
                    "positions": h.positions.map(|p| p + 1),
                    "network": doc_json(net),
                    "scores": h.scores,
                    "witness": gs_json(net, &h.witness),
                }
            });
            Output::new(result, text, 1)
        }
    })
}

fn fixed_point_aggregator(rule: &Rule, n: usize) -> CliResult<Box<dyn Aggregator>> {
    match rule {
        Rule::Harmonious => Ok(Box::new(Harmonious)),
        Rule::Weighted(schema) => Ok(Box::new(schema.resolve(n)?)),
        other => Err(CliError(format!("{other} is not a fixed-point rule"))),
    }
}

fn stability(
    net: &PreferenceNetwork,
    set: &str,
    delta_text: &str,
    rule: Option<&str>,
    perturbed: Option<&Path>,
    exhaustive: bool,
) -> CliResult<Output> {
    let s = parse_set(net, set)?;
    let delta = parse_ratio(delta_text)?;
    prefcomm_core::ratio::check_unit(delta, "delta")?;
    let ab = alpha_beta(net, s)?;
    let mut text = format!("set {}\ndelta {delta}\n", net.fmt_set(s));
    let _ = writeln!(
        text,
        "alpha* {} (member {}), beta* {}{}",
        ab.alpha,
        net.label(ab.weakest_member),
        ab.beta,
        ab.strongest_outsider.map_or(" (no outsiders)".to_string(), |v| format!(" (outsider {})", net.label(v)))
    );
    let mut result = json!({
        "set": labels_of(net, s),
        "delta": ratio_str(delta),
        "alpha": ratio_str(ab.alpha),
        "beta": ratio_str(ab.beta),
        "weakest_member": net.label(ab.weakest_member),
        "strongest_outsider": ab.strongest_outsider.map(|v| net.label(v).to_string()),
        "b3ct_community": ab.is_community(),
    });
    if ab.is_community() && !ab.no_outsiders {
        let b = b3ct_perturbation_bounds(net, s)?;
        let _ = writeln!(text, "stable under delta-perturbations for delta < {}; broken at delta = {} ({})", b.certified, b.refuted, b.construction);
        result["perturbation"] = json!({
            "certified": ratio_str(b.certified),
            "refuted": ratio_str(b.refuted),
            "construction": b.construction,
            "witness": doc_json(&b.witness),
        });
    }
    let strong_b3ct = delta_strong_b3ct(net, s, delta)?;
    let strong_h = delta_strong_harmonious(net, s, delta)?;
    let stable_h = if delta <= Ratio::new(1, 2) { Some(delta_stable_harmonious(net, s, delta)?) } else { None };
    let _ = writeln!(text, "delta-strong B3CT {strong_b3ct}\ndelta-strong harmonious {strong_h}");
    if let Some(h) = stable_h {
        let _ = writeln!(text, "delta-stable harmonious {h}");
    }
    result["strong_b3ct"] = json!(strong_b3ct);
    result["strong_harmonious"] = json!(strong_h);
    result["stable_harmonious"] = json!(stable_h);
    if let Some(r) = rule {
        let rule = parse_rule(r)?;
        let f = fixed_point_aggregator(&rule, net.n())?;
        let strong = delta_strong_fixed_point(f.as_ref(), net, s, delta)?;
        let _ = writeln!(text, "delta-strong fixed point of {rule} {strong}");
        result["strong_fixed_point"] = json!({ "rule": rule.to_string(), "strong": strong });
    }
    if let Some(p) = perturbed {
        let other = load_path(p)?;
        let rep = perturbation_report(net, &other, s)?;
        let kept = alpha_beta(&other, s)?.is_community();
        let _ = writeln!(
            text,
            "perturbation size {} (membership preserving {}), B3CT community afterwards {kept}",
            rep.max_fraction, rep.membership_preserving
        );
        result["perturbed"] = json!({
            "max_fraction": ratio_str(rep.max_fraction),
            "within_delta": rep.within(delta),
            "membership_preserving": rep.membership_preserving,
            "disagreements": rep.disagreements,
            "b3ct_community": kept,
        });
    }
    if exhaustive {
        if net.n() > PERTURBATION_CAP {
            return Err(CliError(format!("exhaustive perturbation search is limited to {PERTURBATION_CAP} members")));
        }
        let free = b3ct_perturbation_breaker(net, s, delta, false)?;
        let kept = b3ct_perturbation_breaker(net, s, delta, true)?;
        let _ = writeln!(
            text,
            "breaking delta-perturbation exists {}; membership-preserving one exists {}",
            free.is_some(),
            kept.is_some()
        );
        result["exhaustive"] = json!({
            "breaker": free.as_ref().map(doc_json),
            "membership_preserving_breaker": kept.as_ref().map(doc_json),
        });
    }
    Ok(Output::new(result, text, 0))
}

fn identify_cmd(
    net: &PreferenceNetwork,
    delta_text: &str,
    samples: u64,
    all: bool,
    from: Option<&str>,
    size: Option<usize>,
    seed: u64,
) -> CliResult<Output> {
    if let Some(f) = from {
        let t = member_list(net, f)?;
        let size = size.expect("clap enforces --size with --from");
        let got = identify(net, &t, size)?;
        let text = match got {
            Some(s) => format!("identified {}\n", net.fmt_set(s)),
            None => "no community of that size identified\n".into(),
        };
        return Ok(Output::new(json!({ "size": size, "set": got.map(|s| labels_of(net, s)) }), text, 0));
    }
    let delta = parse_ratio(delta_text)?;
    let mode = if all { SampleMode::Enumerate } else { SampleMode::Random { draws: samples } };
    let found = sample_stable_harmonious(net, delta, mode, seed)?;
    let mut text = format!("{} delta-stable harmonious communities (delta {delta})\n", found.len());
    for &s in &found {
        let _ = writeln!(text, "{}", net.fmt_set(s));
    }
    let sets: Vec<Vec<String>> = found.iter().map(|&s| labels_of(net, s)).collect();
    let result = json!({ "delta": ratio_str(delta), "mode": if all { "enumerate" } else { "random" }, "samples": samples, "sets": sets });
    Ok(Output::new(result, text, 0))
}

fn read_cnf(path: &Path) -> CliResult<SatInstance> {
    parse_dimacs(&read_text(path)?).map_err(|e| CliError(format!("{}: {e}", path.display())))
}

fn gadget_output(g: &GadgetOutput) -> Output {
    let net = &g.network;
    let blocks: serde_json::Map<String, Value> = g.blocks.iter().map(|(n, b)| (n.clone(), json!(labels_of(net, *b)))).collect();
    let result = json!({ "network": doc_json(net), "subset": labels_of(net, g.s), "blocks": blocks, "notes": g.notes });
    let mut text = NetworkDocument::from_network(net).to_json();
    text.push('\n');
    Output { result, text, exit: 0, bare: true }
}

fn network_output(net: &PreferenceNetwork, subset: Option<SubsetMask>) -> Output {
    let result = json!({ "network": doc_json(net), "subset": subset.map(|s| labels_of(net, s)) });
    let mut text = NetworkDocument::from_network(net).to_json();
    text.push('\n');
    Output { result, text, exit: 0, bare: true }
}

fn generate(kind: &Generate, seed: u64) -> CliResult<Output> {
    Ok(match kind {
        Generate::HeroSidekick { duos } => network_output(&hero_sidekick(*duos)?, None),
        Generate::Random { members, planted, loyalty } => {
            if !(1..=64).contains(members) {
                return Err(CliError("--members must be within 1..=64".into()));
            }
            match planted {
                None => network_output(&random_network(*members, seed), None),
                Some(k) => {
                    if !(1..=*members).contains(k) || !(0.0..=1.0).contains(loyalty) {
                        return Err(CliError("--planted must be within 1..=members and --loyalty within [0, 1]".into()));
                    }
                    let (net, s) = planted_network(*members, *k, *loyalty, &mut rng(seed));
                    network_output(&net, Some(s))
                }
            }
        }
        Generate::FromSat { cnf } => gadget_output(&sat_to_network(&read_cnf(cnf)?, seed)?),
        Generate::CubicGadget { cnf, lambda } => gadget_output(&cubic_1in3_gadget(&read_cnf(cnf)?, parse_ratio(lambda)?, seed)?),
        Generate::Pad { input, set, size } => {
            let net = load(input)?;
            let s = parse_set(&net, set)?;
            gadget_output(&pad_network(&net, s, size.unwrap_or(s.len()), seed)?)
        }
    })
}

fn oracle(kind: &Oracle) -> CliResult<Output> {
    let (name, inst, found) = match kind {
        Oracle::Sat { cnf } => {
            let inst = read_cnf(cnf)?;
            let a = sat_assignment(&inst)?;
            ("3-SAT", inst, a)
        }
        Oracle::OneInThree { cnf } => {
            let inst = read_cnf(cnf)?;
            let a = one_in_three_assignment(&inst)?;
            ("1-in-3 SAT", inst, a)
        }
    };
    let assignment: Option<Vec<bool>> = found.map(|a| (0..inst.vars).map(|i| a >> i & 1 == 1).collect());
    let text = match &assignment {
        Some(a) => {
            let lits: Vec<String> = a.iter().enumerate().map(|(i, &v)| format!("{}{}", if v { "" } else { "-" }, i + 1)).collect();
            format!("{name}: satisfiable\nassignment {}\n", lits.join(" "))
        }
        None => format!("{name}: unsatisfiable\n"),
    };
    let result = json!({
        "problem": name,
        "variables": inst.vars,
        "clauses": inst.clauses.len(),
        "satisfiable": assignment.is_some(),
        "assignment": assignment,
    });
    Ok(Output::new(result, text, 0))
}
