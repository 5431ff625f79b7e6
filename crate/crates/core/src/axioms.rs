//! Axiom and property checkers for community rules, a seeded counterexample
//! search over admissible profile transformations, and testers for the
//! aggregation axioms.
//!
//! Axioms quantify over all networks, so the search can only refute them.
//! An empty result means "no counterexample in N trials", nothing more.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::aggregation::{is_fixed_point, Aggregator, WeightSchema};
use crate::error::{Error, Result};
use crate::generators::{derive_seed, permutations, planted_network, random_network_with, rng};
use crate::instances;
use crate::lexpref::{gs_witness, sa_witness, weak_gs_witness, GsWitness};
use crate::model::{LinearOrder, MemberId, OrderedPartition, PreferenceNetwork};
use crate::rules::{clique_member, enumerate_rule, EnumerateOptions, Rule};
use crate::subset::SubsetMask;

/// The eight axioms and the derived properties.
#[allow(clippy::upper_case_acronyms)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum AxiomId {
    GS,
    SA,
    A,
    Mon,
    CRNM,
    CRM,
    WC,
    Emb,
    IOO,
    PE,
    Cq,
    OD,
    SmallWorld,
    ORM,
    WeakGS,
}

impl AxiomId {
    pub const AXIOMS: [AxiomId; 8] =
        [AxiomId::GS, AxiomId::SA, AxiomId::A, AxiomId::Mon, AxiomId::CRNM, AxiomId::CRM, AxiomId::WC, AxiomId::Emb];

    pub const ALL: [AxiomId; 15] = [
        AxiomId::GS,
        AxiomId::SA,
        AxiomId::A,
        AxiomId::Mon,
        AxiomId::CRNM,
        AxiomId::CRM,
        AxiomId::WC,
        AxiomId::Emb,
        AxiomId::IOO,
        AxiomId::PE,
        AxiomId::Cq,
        AxiomId::OD,
        AxiomId::SmallWorld,
        AxiomId::ORM,
        AxiomId::WeakGS,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AxiomId::GS => "GS",
            AxiomId::SA => "SA",
            AxiomId::A => "A",
            AxiomId::Mon => "Mon",
            AxiomId::CRNM => "CRNM",
            AxiomId::CRM => "CRM",
            AxiomId::WC => "WC",
            AxiomId::Emb => "Emb",
            AxiomId::IOO => "IOO",
            AxiomId::PE => "PE",
            AxiomId::Cq => "Cq",
            AxiomId::OD => "OD",
            AxiomId::SmallWorld => "SmallWorld",
            AxiomId::ORM => "ORM",
            AxiomId::WeakGS => "WeakGS",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            AxiomId::GS => "group stability",
            AxiomId::SA => "self-approval",
            AxiomId::A => "anonymity",
            AxiomId::Mon => "monotonicity",
            AxiomId::CRNM => "coherence robustness of non-members",
            AxiomId::CRM => "coherence robustness of members",
            AxiomId::WC => "world community",
            AxiomId::Emb => "embedding",
            AxiomId::IOO => "independence of outside opinions",
            AxiomId::PE => "Pareto efficiency",
            AxiomId::Cq => "clique property",
            AxiomId::OD => "outsider departure",
            AxiomId::SmallWorld => "small world",
            AxiomId::ORM => "outsider respecting monotonicity",
            AxiomId::WeakGS => "weak group stability",
        }
    }

    /// Whether the check compares against a second profile.
    pub fn needs_transformed(self) -> bool {
        matches!(self, AxiomId::Mon | AxiomId::CRNM | AxiomId::CRM | AxiomId::IOO | AxiomId::ORM)
    }
}

impl fmt::Display for AxiomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AxiomId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| !matches!(c, '-' | '_' | ' ')).collect::<String>().to_ascii_lowercase();
        AxiomId::ALL
            .into_iter()
            .find(|a| a.name().to_ascii_lowercase() == key)
            .ok_or_else(|| Error::Precondition(format!("unknown axiom {s:?}")))
    }
}

/// The quantified objects of one axiom instance. Which fields are required
/// depends on the axiom; see [`find_violation`].
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Context {
    pub subset: Option<SubsetMask>,
    /// The second profile `Π'` over the same ground set.
    pub transformed: Option<PreferenceNetwork>,
    /// `sigma[v]` is the image of member `v`.
    pub permutation: Option<Vec<MemberId>>,
    /// The embedded ground set `V'`.
    pub sub_ground: Option<SubsetMask>,
    pub outsider: Option<MemberId>,
}

impl Context {
    pub fn with_subset(s: SubsetMask) -> Self {
        Context { subset: Some(s), ..Default::default() }
    }

    pub fn transformed(mut self, p: PreferenceNetwork) -> Self {
        self.transformed = Some(p);
        self
    }

    pub fn permutation(mut self, sigma: Vec<MemberId>) -> Self {
        self.permutation = Some(sigma);
        self
    }

    pub fn sub_ground(mut self, v: SubsetMask) -> Self {
        self.sub_ground = Some(v);
        self
    }

    pub fn outsider(mut self, v: MemberId) -> Self {
        self.outsider = Some(v);
        self
    }
}

/// Where a counterexample came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Given,
    BuiltIn(String),
    Trial { index: u64, seed: u64 },
}

/// A concrete instance on which an axiom's implication fails.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub axiom: AxiomId,
    pub network: PreferenceNetwork,
    pub context: Context,
    pub origin: Origin,
    pub trace: Vec<String>,
}

impl Counterexample {
    pub fn subset(&self) -> Option<SubsetMask> {
        self.context.subset
    }

    pub fn transformed(&self) -> Option<&PreferenceNetwork> {
        self.context.transformed.as_ref()
    }

    /// Re-evaluates the recorded instance; true iff it still violates.
    pub fn replay(&self, rule: &Rule) -> Result<bool> {
        Ok(find_violation(rule, self.axiom, &self.network, &self.context)?.is_some())
    }
}

fn missing(axiom: AxiomId, what: &str) -> Error {
    Error::Precondition(format!("{axiom} needs {what}"))
}

fn inadmissible(axiom: AxiomId, msg: String) -> Error {
    Error::Precondition(format!("transformed profile is not admissible for {axiom}: {msg}"))
}

fn need_subset(net: &PreferenceNetwork, axiom: AxiomId, ctx: &Context) -> Result<SubsetMask> {
    let s = ctx.subset.ok_or_else(|| missing(axiom, "a subset"))?;
    net.check_subset(s)?;
    Ok(s)
}

fn need_transformed<'a>(net: &PreferenceNetwork, axiom: AxiomId, ctx: &'a Context) -> Result<&'a PreferenceNetwork> {
    let t = ctx.transformed.as_ref().ok_or_else(|| missing(axiom, "a transformed profile"))?;
    if t.n() != net.n() {
        return Err(Error::GroundSetMismatch(net.n(), t.n()));
    }
    Ok(t)
}

/// Membership of `s` in the projection of `net` onto `within`.
fn member_in(rule: &Rule, net: &PreferenceNetwork, within: SubsetMask, s: SubsetMask) -> Result<bool> {
    if within == net.ground() {
        return rule.contains(net, s);
    }
    rule.contains(&net.project(within)?, s.compress(within))
}

/// For `s` in `S`: `u >'_s v` implies `u >_s v` for `u` in `S`.
fn check_mon(net: &PreferenceNetwork, t: &PreferenceNetwork, s: SubsetMask) -> Result<()> {
    for m in s.iter() {
        for u in s.iter() {
            for v in 0..net.n() {
                if u != v && t.order(m).prefers(u, v) && !net.order(m).prefers(u, v) {
                    return Err(inadmissible(
                        AxiomId::Mon,
                        format!("{} ranks {} above {} only in the transformed profile", net.label(m), net.label(u), net.label(v)),
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Members keep their wins, and the order among outsiders is preserved.
fn check_orm(net: &PreferenceNetwork, t: &PreferenceNetwork, s: SubsetMask) -> Result<()> {
    let outsiders = net.ground().difference(s);
    for m in s.iter() {
        let (o, p) = (net.order(m), t.order(m));
        for u in s.iter() {
            for x in 0..net.n() {
                if u != x && o.prefers(u, x) && !p.prefers(u, x) {
                    return Err(inadmissible(
                        AxiomId::ORM,
                        format!("{} no longer ranks {} above {}", net.label(m), net.label(u), net.label(x)),
                    ));
                }
            }
        }
        for v in outsiders.iter() {
            for w in outsiders.iter() {
                if o.prefers(v, w) && !p.prefers(v, w) {
                    return Err(inadmissible(
                        AxiomId::ORM,
                        format!("{} reorders outsiders {} and {}", net.label(m), net.label(v), net.label(w)),
                    ));
                }
            }
        }
    }
    Ok(())
}

/// All of `S` order `coherent` identically in `t`; every member keeps the
/// rank of each element of `fixed`.
fn check_coherent(axiom: AxiomId, net: &PreferenceNetwork, t: &PreferenceNetwork, s: SubsetMask, coherent: SubsetMask, fixed: SubsetMask) -> Result<()> {
    let lead = s.first().expect("non-empty subset");
    let reference = t.order(lead).sorted(coherent);
    for m in s.iter() {
        if t.order(m).sorted(coherent) != reference {
            return Err(inadmissible(axiom, format!("{} and {} disagree on {}", net.label(lead), net.label(m), net.fmt_set(coherent))));
        }
        for x in fixed.iter() {
            if t.order(m).rank(x) != net.order(m).rank(x) {
                return Err(inadmissible(axiom, format!("{} moves {}", net.label(m), net.label(x))));
            }
        }
    }
    Ok(())
}

fn fmt_gs(net: &PreferenceNetwork, w: &GsWitness) -> Vec<String> {
    let mut out = vec![format!("group-stability witness G = {}, G' = {}", net.fmt_set(w.g), net.fmt_set(w.g_prime))];
    for b in &w.bijections {
        let pairs: Vec<String> = b.pairs.iter().map(|&(u, f)| format!("{}->{}", net.label(u), net.label(f))).collect();
        out.push(format!("  {} prefers each image: {}", net.label(b.member), pairs.join(", ")));
    }
    out
}

/// Evaluates the axiom's implication on exactly the instance in `ctx` and
/// returns a counterexample when it fails. Required context: a subset for
/// every axiom except WC and Emb; a transformed profile for Mon, CRNM, CRM,
/// IOO and ORM; a permutation for A; a sub-ground for Emb. OD checks
/// `ctx.outsider` or every outsider; Emb checks `ctx.subset` or every
/// subset of `V'`. Missing or inadmissible context is an input error.
pub fn find_violation(rule: &Rule, axiom: AxiomId, net: &PreferenceNetwork, ctx: &Context) -> Result<Option<Counterexample>> {
    let hit = |context: Context, trace: Vec<String>| {
        Some(Counterexample { axiom, network: net.clone(), context, origin: Origin::Given, trace })
    };
    let fs = |s: SubsetMask| net.fmt_set(s);
    Ok(match axiom {
        AxiomId::GS => {
            let s = need_subset(net, axiom, ctx)?;
            if !rule.contains(net, s)? {
                return Ok(None);
            }
            match gs_witness(net, s)? {
                None => None,
                Some(w) => {
                    let mut trace = vec![format!("{} is a community", fs(s))];
                    trace.extend(fmt_gs(net, &w));
                    hit(ctx.clone(), trace)
                }
            }
        }
        AxiomId::SA => {
            let s = need_subset(net, axiom, ctx)?;
            if !rule.contains(net, s)? {
                return Ok(None);
            }
            sa_witness(net, s)?.and_then(|w| {
                hit(
                    ctx.clone(),
                    vec![
                        format!("{} is a community", fs(s)),
                        format!("every member lex-prefers outsiders {} to {}", fs(w.g_prime), fs(s)),
                    ],
                )
            })
        }
        AxiomId::A => {
            let s = need_subset(net, axiom, ctx)?;
            let sigma = ctx.permutation.as_ref().ok_or_else(|| missing(axiom, "a permutation"))?;
            let image = net.apply_isomorphism(sigma)?;
            let s2: SubsetMask = s.iter().map(|m| sigma[m]).collect();
            let (a, b) = (rule.contains(net, s)?, rule.contains(&image, s2)?);
            if a == b {
                return Ok(None);
            }
            hit(ctx.clone(), vec![format!("{} membership {a}, relabelled image {} membership {b}", fs(s), image.fmt_set(s2))])
        }
        AxiomId::Mon | AxiomId::CRNM | AxiomId::CRM => {
            let s = need_subset(net, axiom, ctx)?;
            let t = need_transformed(net, axiom, ctx)?;
            let outsiders = net.ground().difference(s);
            match axiom {
                AxiomId::Mon => check_mon(net, t, s)?,
                AxiomId::CRNM => check_coherent(axiom, net, t, s, outsiders, s)?,
                _ => check_coherent(axiom, net, t, s, s, outsiders)?,
            }
            if rule.contains(t, s)? && !rule.contains(net, s)? {
                hit(ctx.clone(), vec![format!("{} is a community of the transformed profile but not of the original", fs(s))])
            } else {
                None
            }
        }
        AxiomId::ORM => {
            let s = need_subset(net, axiom, ctx)?;
            let t = need_transformed(net, axiom, ctx)?;
            check_orm(net, t, s)?;
            if rule.contains(net, s)? && !rule.contains(t, s)? {
                hit(ctx.clone(), vec![format!("{} is a community but not after members are promoted", fs(s))])
            } else {
                None
            }
        }
        AxiomId::IOO => {
            let s = need_subset(net, axiom, ctx)?;
            let t = need_transformed(net, axiom, ctx)?;
            if let Some(m) = s.iter().find(|&m| t.order(m) != net.order(m)) {
                return Err(inadmissible(axiom, format!("member {} changed its order", net.label(m))));
            }
            let (a, b) = (rule.contains(net, s)?, rule.contains(t, s)?);
            if a == b {
                return Ok(None);
            }
            hit(ctx.clone(), vec![format!("{} membership {a} before and {b} after outsiders changed their orders", fs(s))])
        }
        AxiomId::WC => {
            let v = net.ground();
            if rule.contains(net, v)? {
                None
            } else {
                hit(Context { subset: Some(v), ..ctx.clone() }, vec!["the whole ground set is not a community".into()])
            }
        }
        AxiomId::Emb => {
            let vp = ctx.sub_ground.ok_or_else(|| missing(axiom, "a sub-ground"))?;
            net.check_subset(vp)?;
            if !clique_member(net, vp) {
                return Err(Error::Precondition(format!("members of {} do not rank it first", fs(vp))));
            }
            let sub = net.project(vp)?;
            let candidates: Vec<SubsetMask> = match ctx.subset {
                Some(s) if !s.is_subset_of(vp) => {
                    return Err(Error::Precondition(format!("{} is not inside {}", fs(s), fs(vp))));
                }
                Some(s) => vec![s],
                None => vp.subsets().filter(|t| !t.is_empty()).collect(),
            };
            let mut found = None;
            for t in candidates {
                let (a, b) = (rule.contains(net, t)?, rule.contains(&sub, t.compress(vp))?);
                if a != b {
                    found = hit(
                        Context { subset: Some(t), ..ctx.clone() },
                        vec![format!("{} membership {a} in the network but {b} in the embedded network on {}", fs(t), fs(vp))],
                    );
                    break;
                }
            }
            found
        }
        AxiomId::PE => {
            let s = need_subset(net, axiom, ctx)?;
            if !rule.contains(net, s)? {
                return Ok(None);
            }
            let outsiders = net.ground().difference(s);
            let bad = s.iter().flat_map(|u| outsiders.iter().map(move |v| (u, v))).find(|&(u, v)| s.iter().all(|m| net.order(m).prefers(v, u)));
            bad.and_then(|(u, v)| {
                hit(ctx.clone(), vec![format!("{} is a community yet every member prefers {} to {}", fs(s), net.label(v), net.label(u))])
            })
        }
        AxiomId::Cq => {
            let s = need_subset(net, axiom, ctx)?;
            if clique_member(net, s) && !rule.contains(net, s)? {
                hit(ctx.clone(), vec![format!("{} is a clique but not a community", fs(s))])
            } else {
                None
            }
        }
        AxiomId::OD => {
            let s = need_subset(net, axiom, ctx)?;
            if !rule.contains(net, s)? {
                return Ok(None);
            }
            let outsiders = net.ground().difference(s);
            let vs: Vec<MemberId> = match ctx.outsider {
                Some(v) if !outsiders.contains(v) => {
                    return Err(Error::Precondition(format!("member {v} is not an outsider of {}", fs(s))));
                }
                Some(v) => vec![v],
                None => outsiders.iter().collect(),
            };
            let mut found = None;
            for v in vs {
                if !member_in(rule, net, net.ground().without(v), s)? {
                    found = hit(
                        Context { outsider: Some(v), ..ctx.clone() },
                        vec![format!("{} is a community but not after {} leaves", fs(s), net.label(v))],
                    );
                    break;
                }
            }
            found
        }
        AxiomId::SmallWorld => {
            let s = need_subset(net, axiom, ctx)?;
            let whole = rule.contains(net, s)?;
            let outsiders = net.ground().difference(s);
            let mut failing = None;
            for u in outsiders.subsets() {
                if u.len() < s.len() && !member_in(rule, net, s.union(u), s)? {
                    failing = Some(u);
                    break;
                }
            }
            match (whole, failing) {
                (true, Some(u)) => hit(
                    ctx.clone(),
                    vec![format!("{} is a community but not inside {}", fs(s), fs(s.union(u)))],
                ),
                (false, None) => hit(
                    ctx.clone(),
                    vec![format!("{} is a community of every S ∪ U with |U| < |S| but not of the whole network", fs(s))],
                ),
                _ => None,
            }
        }
        AxiomId::WeakGS => {
            let s = need_subset(net, axiom, ctx)?;
            if !rule.contains(net, s)? {
                return Ok(None);
            }
            weak_gs_witness(net, s)?.and_then(|w| {
                let pairs: Vec<String> = w.pairs.iter().map(|&(u, f)| format!("{}->{}", net.label(u), net.label(f))).collect();
                hit(
                    ctx.clone(),
                    vec![
                        format!("{} is a community", fs(s)),
                        format!("S - G prefers G' = {} to G = {} under {}", fs(w.g_prime), fs(w.g), pairs.join(", ")),
                    ],
                )
            })
        }
    })
}

/// True iff the axiom's implication holds on this instance.
pub fn check_instance_axiom(rule: &Rule, axiom: AxiomId, net: &PreferenceNetwork, ctx: &Context) -> Result<bool> {
    Ok(find_violation(rule, axiom, net, ctx)?.is_none())
}

/// Property check for one subset, for properties that need no second
/// profile.
pub fn check_property(rule: &Rule, property: AxiomId, net: &PreferenceNetwork, s: SubsetMask) -> Result<bool> {
    check_instance_axiom(rule, property, net, &Context::with_subset(s))
}

/// Recorded instances tried before random trials: the known violations
/// first, then every subset of every built-in network where the axiom needs
/// no second profile.
pub fn builtin_instances(axiom: AxiomId) -> Vec<(String, PreferenceNetwork, Context)> {
    let set = |ids: &[usize]| -> SubsetMask { ids.iter().map(|&x| x - 1).collect() };
    let mut out = Vec::new();
    match axiom {
        AxiomId::Mon => out.push((
            "b3ct-alt vs b3ct".into(),
            instances::b3ct_profile_alt(),
            Context::with_subset(set(&[1, 2, 3])).transformed(instances::b3ct_profile()),
        )),
        AxiomId::GS => out.push(("b3ct".into(), instances::b3ct_profile(), Context::with_subset(set(&[1, 5, 6])))),
        AxiomId::OD => out.push(("b3ct".into(), instances::b3ct_profile(), Context::with_subset(set(&[1, 2, 3])).outsider(4))),
        AxiomId::WeakGS => out.push(("weak-gs".into(), instances::weak_gs_profile(), Context::with_subset(set(&[1, 2, 3, 4])))),
        _ => {}
    }
    for name in instances::NAMES {
        let net = instances::by_name(name).expect("known name");
        match axiom {
            AxiomId::WC => out.push((name.to_string(), net.clone(), Context::default())),
            AxiomId::Emb => {
                for vp in net.ground().subsets().filter(|v| !v.is_empty() && clique_member(&net, *v)) {
                    out.push((name.to_string(), net.clone(), Context::default().sub_ground(vp)));
                }
            }
            a if a.needs_transformed() || a == AxiomId::A => {}
            _ => {
                for s in net.ground().subsets().filter(|s| !s.is_empty()) {
                    out.push((name.to_string(), net.clone(), Context::with_subset(s)));
                }
            }
        }
    }
    out
}

/// Settings for [`falsify_axiom`].
#[derive(Debug, Clone)]
pub struct FalsifyConfig {
    pub budget: u64,
    pub seed: u64,
    /// Worker threads; `None` uses the global pool. Results do not depend
    /// on it.
    pub jobs: Option<usize>,
    pub include_builtin: bool,
    /// Largest random network size.
    pub max_n: usize,
}

impl Default for FalsifyConfig {
    fn default() -> Self {
        FalsifyConfig { budget: 1000, seed: 0, jobs: None, include_builtin: true, max_n: 6 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FalsifyReport {
    pub axiom: AxiomId,
    pub rule: String,
    pub seed: u64,
    pub budget: u64,
    pub builtin_checked: usize,
    pub counterexample: Option<Counterexample>,
}

/// Runs `f` on a pool of `jobs` threads, or inline on the global pool.
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j.max(1))
                .build()
                .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Searches built-in instances, then `budget` random trials, for a
/// violation. Trial `i` draws everything from `derive_seed(seed, i)`, and
/// the lowest violating trial index is reported regardless of threads.
pub fn falsify_axiom(rule: &Rule, axiom: AxiomId, cfg: &FalsifyConfig) -> Result<FalsifyReport> {
    if cfg.budget == 0 {
        return Err(Error::Precondition("budget must be at least 1".into()));
    }
    if !(2..=12).contains(&cfg.max_n) {
        return Err(Error::Precondition("random network size must be within 2..=12".into()));
    }
    let mut report = FalsifyReport {
        axiom,
        rule: rule.to_string(),
        seed: cfg.seed,
        budget: cfg.budget,
        builtin_checked: 0,
        counterexample: None,
    };
    if cfg.include_builtin {
        for (name, net, ctx) in builtin_instances(axiom) {
            report.builtin_checked += 1;
            if let Some(mut cx) = find_violation(rule, axiom, &net, &ctx)? {
                cx.origin = Origin::BuiltIn(name);
                report.counterexample = Some(cx);
                return Ok(report);
            }
        }
    }
    let found = with_jobs(cfg.jobs, || {
        (0..cfg.budget).into_par_iter().find_map_first(|i| trial(rule, axiom, cfg, i).transpose())
    })?;
    report.counterexample = found.transpose()?;
    Ok(report)
}

fn random_subset(n: usize, r: &mut ChaCha8Rng) -> SubsetMask {
    SubsetMask(r.gen_range(1..(1u64 << n)))
}

fn random_order(n: usize, r: &mut ChaCha8Rng) -> LinearOrder {
    let mut l: Vec<MemberId> = (0..n).collect();
    l.shuffle(r);
    LinearOrder::new(l).expect("permutation")
}

/// Voters outside `s` each get a fresh random order with probability 1/2.
fn scramble_outsiders(orders: &mut [LinearOrder], s: SubsetMask, r: &mut ChaCha8Rng) {
    let n = orders.len();
    for (v, o) in orders.iter_mut().enumerate() {
        if !s.contains(v) && r.gen_bool(0.5) {
            *o = random_order(n, r);
        }
    }
}

/// Random adjacent swaps in which the element moving down is never a member
/// of `s`. With `strict`, only a member may move up past a non-member, so
/// the outsiders keep their relative order too.
fn promote(order: &LinearOrder, s: SubsetMask, strict: bool, r: &mut ChaCha8Rng) -> LinearOrder {
    let n = order.len();
    let mut list = order.list().to_vec();
    if n >= 2 {
        for _ in 0..r.gen_range(0..=2 * n) {
            let i = r.gen_range(0..n - 1);
            let (a, b) = (list[i], list[i + 1]);
            if !s.contains(a) && (!strict || s.contains(b)) {
                list.swap(i, i + 1);
            }
        }
    }
    LinearOrder::new(list).expect("permutation")
}

/// Rewrites the slots of `coherent` in each member's order with one shared
/// random order, leaving every other slot in place.
fn make_coherent(net: &PreferenceNetwork, s: SubsetMask, coherent: SubsetMask, r: &mut ChaCha8Rng) -> Vec<LinearOrder> {
    let mut shared: Vec<MemberId> = coherent.iter().collect();
    shared.shuffle(r);
    let mut orders = net.orders().to_vec();
    for m in s.iter() {
        let mut next = shared.iter();
        let list = net.order(m).list().iter().map(|&x| if coherent.contains(x) { *next.next().expect("same size") } else { x }).collect();
        orders[m] = LinearOrder::new(list).expect("permutation");
    }
    orders
}

fn pick(v: &[SubsetMask], r: &mut ChaCha8Rng) -> Option<SubsetMask> {
    v.choose(r).copied()
}

fn trial(rule: &Rule, axiom: AxiomId, cfg: &FalsifyConfig, index: u64) -> Result<Option<Counterexample>> {
    let seed = derive_seed(cfg.seed, index);
    let mut r = rng(seed);
    let n = r.gen_range(2..=cfg.max_n);
    let (net, planted) = if r.gen_bool(0.5) {
        let k = r.gen_range(1..=n);
        planted_network(n, k, 0.7, &mut r)
    } else {
        let net = random_network_with(n, &mut r);
        let s = random_subset(n, &mut r);
        (net, s)
    };
    let opts = EnumerateOptions::default();
    let community = |r: &mut ChaCha8Rng| -> Result<Option<SubsetMask>> { Ok(pick(&enumerate_rule(rule, &net, opts)?, r)) };
    let (base, ctx) = match axiom {
        AxiomId::GS | AxiomId::SA | AxiomId::PE | AxiomId::OD | AxiomId::WeakGS => {
            let Some(s) = community(&mut r)? else { return Ok(None) };
            (net.clone(), Context::with_subset(s))
        }
        AxiomId::Cq => {
            let cliques = enumerate_rule(&Rule::Clique, &net, opts)?;
            let Some(s) = pick(&cliques, &mut r) else { return Ok(None) };
            (net.clone(), Context::with_subset(s))
        }
        AxiomId::SmallWorld => {
            let s = if r.gen_bool(0.5) { community(&mut r)?.unwrap_or(planted) } else { planted };
            (net.clone(), Context::with_subset(s))
        }
        AxiomId::WC => (net.clone(), Context::default()),
        AxiomId::A => {
            let mut sigma: Vec<MemberId> = (0..n).collect();
            sigma.shuffle(&mut r);
            (net.clone(), Context::with_subset(planted).permutation(sigma))
        }
        AxiomId::IOO => {
            let mut orders = net.orders().to_vec();
            scramble_outsiders(&mut orders, planted, &mut r);
            (net.clone(), Context::with_subset(planted).transformed(net.with_orders(orders)?))
        }
        AxiomId::Mon => {
            // The sampled network plays Π'; Π promotes the members.
            let s = community(&mut r)?.unwrap_or(planted);
            let mut orders = net.orders().to_vec();
            for m in s.iter() {
                orders[m] = promote(net.order(m), s, false, &mut r);
            }
            scramble_outsiders(&mut orders, s, &mut r);
            (net.with_orders(orders)?, Context::with_subset(s).transformed(net.clone()))
        }
        AxiomId::ORM => {
            let Some(s) = community(&mut r)? else { return Ok(None) };
            let mut orders = net.orders().to_vec();
            for m in s.iter() {
                orders[m] = promote(net.order(m), s, true, &mut r);
            }
            scramble_outsiders(&mut orders, s, &mut r);
            (net.clone(), Context::with_subset(s).transformed(net.with_orders(orders)?))
        }
        AxiomId::CRNM | AxiomId::CRM => {
            let s = community(&mut r)?.unwrap_or(planted);
            let outsiders = net.ground().difference(s);
            let coherent = if axiom == AxiomId::CRNM { outsiders } else { s };
            let mut orders = make_coherent(&net, s, coherent, &mut r);
            scramble_outsiders(&mut orders, s, &mut r);
            (net.clone(), Context::with_subset(s).transformed(net.with_orders(orders)?))
        }
        AxiomId::Emb => {
            let k = r.gen_range(1..=n);
            let (clustered, vp) = planted_network(n, k, 1.0, &mut r);
            let mut sigma: Vec<MemberId> = (0..n).collect();
            sigma.shuffle(&mut r);
            let moved = clustered.apply_isomorphism(&sigma)?;
            let vp: SubsetMask = vp.iter().map(|m| sigma[m]).collect();
            (moved, Context::default().sub_ground(vp))
        }
    };
    Ok(find_violation(rule, axiom, &base, &ctx)?.map(|mut cx| {
        cx.origin = Origin::Trial { index, seed };
        cx
    }))
}

/// A proof profile on which `S = {a,b,c}` is a weighted fixed point yet
/// fails group stability.
#[derive(Debug, Clone, Serialize)]
pub struct GauntletHit {
    /// 1-based index into the three proof profiles.
    pub profile: usize,
    /// Position permutation applied to the ballots of `a, b, c`:
    /// new position `i` holds the candidate formerly at `positions[i]`.
    pub positions: [usize; 5],
    pub network: PreferenceNetwork,
    pub scores: Vec<f64>,
    pub witness: GsWitness,
}

/// Tries the three impossibility profiles under each of the 12 position
/// permutations that fix `{1,2,3}` and `{4,5}` (identity first), returning
/// the first where `S = {a,b,c}` is a fixed point of `w³` but has a
/// group-stability witness. `w³` must give every top-3 position more weight
/// than every bottom-2 position.
pub fn weighted_gs_gauntlet(w3: [f64; 5]) -> Result<Option<GauntletHit>> {
    if w3.iter().any(|w| !w.is_finite()) {
        return Err(Error::Precondition("weights must be finite".into()));
    }
    let low_top = w3[..3].iter().copied().fold(f64::INFINITY, f64::min);
    let high_bottom = w3[3..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if low_top <= high_bottom {
        return Err(Error::Precondition("weights violate the clique condition: each of w1..w3 must exceed w4 and w5".into()));
    }
    let schema = WeightSchema::uniform("w3", w3.to_vec())?;
    let s = instances::IMPOSSIBILITY_S;
    let profiles = instances::impossibility_profiles();
    for p3 in permutations(3) {
        for p2 in permutations(2) {
            let sigma = [p3[0], p3[1], p3[2], 3 + p2[0], 3 + p2[1]];
            for (idx, base) in profiles.iter().enumerate() {
                let mut orders = base.orders().to_vec();
                for m in s.iter() {
                    let old = base.order(m).list();
                    orders[m] = LinearOrder::new(sigma.iter().map(|&j| old[j]).collect())?;
                }
                let net = base.with_orders(orders)?;
                if !is_fixed_point(&schema, &net, s)? {
                    continue;
                }
                if let Some(witness) = gs_witness(&net, s)? {
                    let scores = schema.scores(&net.ballots(s))?;
                    return Ok(Some(GauntletHit { profile: idx + 1, positions: sigma, network: net, scores, witness }));
                }
            }
        }
    }
    Ok(None)
}

/// The three axioms of preference aggregation that are tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AggregationAxiom {
    Unanimity,
    NonDictatorship,
    Iia,
}

impl FromStr for AggregationAxiom {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "u" | "unanimity" => Ok(AggregationAxiom::Unanimity),
            "nd" | "non-dictatorship" => Ok(AggregationAxiom::NonDictatorship),
            "iia" => Ok(AggregationAxiom::Iia),
            _ => Err(Error::Precondition(format!("unknown aggregation axiom {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregationFinding {
    /// Every ballot ranks `preferred` above `other`, the aggregate does not.
    NotUnanimous { profile: Vec<LinearOrder>, preferred: MemberId, other: MemberId, aggregate: OrderedPartition },
    /// `voter`'s ballot equalled the aggregate on every profile examined.
    Dictator { voter: usize, profiles: u64 },
    /// Both profiles order `a` and `b` identically per voter, yet the
    /// aggregates compare them differently.
    NotIndependent { first: Vec<LinearOrder>, second: Vec<LinearOrder>, a: MemberId, b: MemberId },
}

/// First unanimous pair `(i, j)` the aggregate fails to rank strictly.
pub fn unanimity_violation(f: &dyn Aggregator, n: usize, ballots: &[&LinearOrder]) -> Result<Option<(MemberId, MemberId, OrderedPartition)>> {
    let agg = f.aggregate(n, ballots)?;
    for i in 0..n {
        for j in 0..n {
            if i != j && ballots.iter().all(|b| b.prefers(i, j)) && !agg.above(i, j) {
                return Ok(Some((i, j, agg)));
            }
        }
    }
    Ok(None)
}

fn factorial_pow(n: usize, m: usize) -> Option<u64> {
    let f = (1..=n as u64).try_fold(1u64, |a, b| a.checked_mul(b))?;
    (0..m).try_fold(1u64, |a, _| a.checked_mul(f))
}

/// Tests one aggregation axiom for `voters` ballots over `n` candidates.
/// All `(n!)^voters` profiles are examined when that is at most `budget`;
/// otherwise `budget` seeded random profiles.
pub fn test_aggregation_axiom(
    f: &dyn Aggregator,
    axiom: AggregationAxiom,
    n: usize,
    voters: usize,
    budget: u64,
    seed: u64,
) -> Result<Option<AggregationFinding>> {
    if budget == 0 || n == 0 || voters == 0 {
        return Err(Error::Precondition("budget, candidates and voters must be positive".into()));
    }
    if voters > 64 || n > 64 {
        return Err(Error::TooLarge { what: "aggregation test", n: n.max(voters), cap: 64 });
    }
    let exhaustive = factorial_pow(n, voters).filter(|&t| t <= budget);
    let perms = if exhaustive.is_some() { permutations(n) } else { Vec::new() };
    let count = exhaustive.unwrap_or(budget);
    let profile = |idx: u64| -> Vec<LinearOrder> {
        if exhaustive.is_some() {
            let mut rest = idx as usize;
            (0..voters)
                .map(|_| {
                    let p = LinearOrder::new(perms[rest % perms.len()].clone()).expect("permutation");
                    rest /= perms.len();
                    p
                })
                .collect()
        } else {
            let mut r = rng(derive_seed(seed, idx));
            (0..voters).map(|_| random_order(n, &mut r)).collect()
        }
    };
    match axiom {
        AggregationAxiom::Unanimity => {
            for idx in 0..count {
                let p = profile(idx);
                let refs: Vec<&LinearOrder> = p.iter().collect();
                if let Some((i, j, aggregate)) = unanimity_violation(f, n, &refs)? {
                    return Ok(Some(AggregationFinding::NotUnanimous { profile: p, preferred: i, other: j, aggregate }));
                }
            }
            Ok(None)
        }
        AggregationAxiom::NonDictatorship => {
            let mut alive = SubsetMask::full(voters);
            for idx in 0..count {
                let p = profile(idx);
                let refs: Vec<&LinearOrder> = p.iter().collect();
                let agg = f.aggregate(n, &refs)?;
                for d in alive.iter() {
                    if agg != OrderedPartition::singletons(&p[d]) {
                        alive = alive.without(d);
                    }
                }
                if alive.is_empty() {
                    return Ok(None);
                }
            }
            Ok(alive.first().map(|voter| AggregationFinding::Dictator { voter, profiles: count }))
        }
        AggregationAxiom::Iia => {
            let mut seen: HashMap<(MemberId, MemberId, u64), (std::cmp::Ordering, u64)> = HashMap::new();
            for idx in 0..count {
                let p = profile(idx);
                let refs: Vec<&LinearOrder> = p.iter().collect();
                let agg = f.aggregate(n, &refs)?;
                for a in 0..n {
                    for b in a + 1..n {
                        let pattern = p.iter().enumerate().fold(0u64, |acc, (i, o)| acc | (o.prefers(a, b) as u64) << i);
                        let outcome = agg.block_of(a).cmp(&agg.block_of(b));
                        let entry = seen.entry((a, b, pattern)).or_insert((outcome, idx));
                        if entry.0 != outcome {
                            return Ok(Some(AggregationFinding::NotIndependent { first: profile(entry.1), second: p, a, b }));
                        }
                    }
                }
            }
            Ok(None)
        }
    }
}
