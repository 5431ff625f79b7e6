//! Community rules: membership predicates, lattice combinators and
//! brute-force enumeration.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::aggregation::{is_fixed_point, WeightSchema};
use crate::error::{Error, Result};
use crate::lexpref::{gs_witness, gs_witness_forced, sa_witness, sa_witness_forced};
use crate::model::PreferenceNetwork;
use crate::ratio::{at_least_fraction, check_unit, parse_ratio};
use crate::subset::SubsetMask;
use crate::Ratio;

/// Default largest ground set [`enumerate_rule`] accepts.
pub const ENUMERATION_CAP: usize = 20;

/// True iff every member of `s` ranks exactly `s` in its top `|s|`.
pub fn clique_member(net: &PreferenceNetwork, s: SubsetMask) -> bool {
    clique_g_member(net, s, 0)
}

/// True iff every member of `s` ranks all of `s` within its top `|s| + g`.
pub fn clique_g_member(net: &PreferenceNetwork, s: SubsetMask, g: usize) -> bool {
    let k = s.len().saturating_add(g);
    s.iter().all(|m| s.is_subset_of(net.order(m).top(k)))
}

/// Ballots of `voters` preferring `u` to `v`.
#[inline]
fn support(net: &PreferenceNetwork, voters: SubsetMask, u: usize, v: usize) -> usize {
    voters.iter().filter(|&s| net.order(s).prefers(u, v)).count()
}

/// Smallest support among cross pairs `(u in s, v outside s)` from the
/// ballots of `voters`; `None` when `s` has no outsiders.
pub fn min_cross_support(net: &PreferenceNetwork, s: SubsetMask, voters: SubsetMask) -> Option<usize> {
    let outsiders = net.ground().difference(s);
    let mut best: Option<usize> = None;
    for u in s.iter() {
        for v in outsiders.iter() {
            let c = support(net, voters, u, v);
            best = Some(best.map_or(c, |b| b.min(c)));
        }
    }
    best
}

/// Strict majority of `s`'s ballots prefers each member to each outsider.
pub fn harmonious_member(net: &PreferenceNetwork, s: SubsetMask) -> bool {
    min_cross_support(net, s, s).is_none_or(|c| 2 * c > s.len())
}

/// At least `λ|S|` ballots of `S` carry every cross pair.
pub fn lambda_harmonious_member(net: &PreferenceNetwork, s: SubsetMask, lambda: Ratio) -> bool {
    min_cross_support(net, s, s).is_none_or(|c| at_least_fraction(c, lambda, s.len()))
}

pub fn weighted_member(net: &PreferenceNetwork, s: SubsetMask, w: &WeightSchema) -> Result<bool> {
    is_fixed_point(w, net, s)
}

pub fn comprehensive_member(net: &PreferenceNetwork, s: SubsetMask) -> Result<bool> {
    Ok(gs_witness(net, s)?.is_none() && sa_witness(net, s)?.is_none())
}

/// The slack `g` of the relaxed clique rule, as a function of `|S|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Slack {
    Const(usize),
    /// `table[k - 1]` is `g(k)`; sizes past the end reuse the last entry.
    Table(Vec<usize>),
}

impl Slack {
    pub fn at(&self, k: usize) -> usize {
        match self {
            Slack::Const(g) => *g,
            Slack::Table(t) => t.get(k.saturating_sub(1)).or(t.last()).copied().unwrap_or(0),
        }
    }
}

/// Weight schema choice, resolved against a network's size at evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum Schema {
    B3ct,
    Borda,
    /// One vector used for every ballot count; its length fixes `n`.
    Uniform(Vec<f64>),
    Custom(WeightSchema),
}

impl Schema {
    pub fn resolve(&self, n: usize) -> Result<WeightSchema> {
        let w = match self {
            Schema::B3ct => WeightSchema::b3ct(n),
            Schema::Borda => WeightSchema::borda(n),
            Schema::Uniform(v) => WeightSchema::uniform("weighted", v.clone())?,
            Schema::Custom(w) => w.clone(),
        };
        if w.n() != n {
            return Err(Error::GroundSetMismatch(n, w.n()));
        }
        Ok(w)
    }
}

pub type PredicateFn = dyn Fn(&PreferenceNetwork, SubsetMask) -> bool + Send + Sync;

/// A community rule: a named membership predicate, closed under union and
/// intersection.
#[derive(Clone)]
pub enum Rule {
    All,
    Clique,
    CliqueG(Slack),
    Harmonious,
    LambdaHarmonious(Ratio),
    Weighted(Schema),
    GroupStable,
    SelfApproving,
    Comprehensive,
    Predicate { name: String, f: Arc<PredicateFn> },
    Union(Box<Rule>, Box<Rule>),
    Intersection(Box<Rule>, Box<Rule>),
}

impl Rule {
    pub fn b3ct() -> Rule {
        Rule::Weighted(Schema::B3ct)
    }

    pub fn borda() -> Rule {
        Rule::Weighted(Schema::Borda)
    }

    pub fn predicate(name: impl Into<String>, f: impl Fn(&PreferenceNetwork, SubsetMask) -> bool + Send + Sync + 'static) -> Rule {
        Rule::Predicate { name: name.into(), f: Arc::new(f) }
    }

    pub fn union(self, other: Rule) -> Rule {
        Rule::Union(Box::new(self), Box::new(other))
    }

    pub fn intersect(self, other: Rule) -> Rule {
        Rule::Intersection(Box::new(self), Box::new(other))
    }

    /// Fixed-point rules (weighted schemas and harmonious).
    pub fn is_fixed_point_rule(&self) -> bool {
        matches!(self, Rule::Harmonious | Rule::Weighted(_))
    }

    /// Membership of `s`. Witness searches respect the exhaustive size cap.
    pub fn contains(&self, net: &PreferenceNetwork, s: SubsetMask) -> Result<bool> {
        self.contains_with(net, s, false)
    }

    pub fn contains_with(&self, net: &PreferenceNetwork, s: SubsetMask, force: bool) -> Result<bool> {
        net.check_subset(s)?;
        Ok(match self {
            Rule::All => true,
            Rule::Clique => clique_member(net, s),
            Rule::CliqueG(g) => clique_g_member(net, s, g.at(s.len())),
            Rule::Harmonious => harmonious_member(net, s),
            Rule::LambdaHarmonious(l) => {
                check_unit(*l, "lambda")?;
                lambda_harmonious_member(net, s, *l)
            }
            Rule::Weighted(schema) => weighted_member(net, s, &schema.resolve(net.n())?)?,
            Rule::GroupStable => {
                if force { gs_witness_forced(net, s)? } else { gs_witness(net, s)? }.is_none()
            }
            Rule::SelfApproving => {
                if force { sa_witness_forced(net, s)? } else { sa_witness(net, s)? }.is_none()
            }
            Rule::Comprehensive => {
                Rule::GroupStable.contains_with(net, s, force)? && Rule::SelfApproving.contains_with(net, s, force)?
            }
            Rule::Predicate { f, .. } => f(net, s),
            Rule::Union(a, b) => a.contains_with(net, s, force)? || b.contains_with(net, s, force)?,
            Rule::Intersection(a, b) => a.contains_with(net, s, force)? && b.contains_with(net, s, force)?,
        })
    }

    /// Parses `name[:param]` atoms joined by `&` (binds tighter) and `|`,
    /// with parentheses. Names: all, clique, clique-g:G, harmonious,
    /// lambda-harmonious:λ, b3ct, borda, weighted:w1,w2,..., gs, sa,
    /// comprehensive.
    pub fn parse(text: &str) -> Result<Rule> {
        let mut p = Parser { src: text, pos: 0 };
        let r = p.expr()?;
        p.skip_ws();
        if p.pos != text.len() {
            return Err(p.err("trailing input"));
        }
        Ok(r)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::All => f.write_str("all"),
            Rule::Clique => f.write_str("clique"),
            Rule::CliqueG(Slack::Const(g)) => write!(f, "clique-g:{g}"),
            Rule::CliqueG(Slack::Table(t)) => write!(f, "clique-g:{t:?}"),
            Rule::Harmonious => f.write_str("harmonious"),
            Rule::LambdaHarmonious(l) => write!(f, "lambda-harmonious:{l}"),
            Rule::Weighted(Schema::B3ct) => f.write_str("b3ct"),
            Rule::Weighted(Schema::Borda) => f.write_str("borda"),
            Rule::Weighted(Schema::Uniform(w)) => {
                let parts: Vec<String> = w.iter().map(|x| x.to_string()).collect();
                write!(f, "weighted:{}", parts.join(","))
            }
            Rule::Weighted(Schema::Custom(w)) => write!(f, "weighted[{}]", w.name),
            Rule::GroupStable => f.write_str("gs"),
            Rule::SelfApproving => f.write_str("sa"),
            Rule::Comprehensive => f.write_str("comprehensive"),
            Rule::Predicate { name, .. } => f.write_str(name),
            Rule::Union(a, b) => write!(f, "({a} | {b})"),
            Rule::Intersection(a, b) => write!(f, "({a} & {b})"),
        }
    }
}

impl fmt::Debug for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Precondition(format!("rule {:?}: {msg} at offset {}", self.src, self.pos))
    }

    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Rule> {
        let mut r = self.term()?;
        while self.eat('|') {
            r = r.union(self.term()?);
        }
        Ok(r)
    }

    fn term(&mut self) -> Result<Rule> {
        let mut r = self.atom()?;
        while self.eat('&') {
            r = r.intersect(self.atom()?);
        }
        Ok(r)
    }

    fn atom(&mut self) -> Result<Rule> {
        let src: &'a str = self.src;
        if self.eat('(') {
            let r = self.expr()?;
            if !self.eat(')') {
                return Err(self.err("expected ')'"));
            }
            return Ok(r);
        }
        self.skip_ws();
        let rest = &src[self.pos..];
        let end = rest.find(['|', '&', '(', ')']).unwrap_or(rest.len());
        let word = rest[..end].trim();
        self.pos += end;
        let (name, param) = match word.split_once(':') {
            Some((n, p)) => (n.trim(), Some(p.trim())),
            None => (word, None),
        };
        let missing = self.err(&format!("{name} needs a parameter"));
        let need = |p: Option<&'a str>| p.ok_or(missing.clone());
        let rule = match name.to_ascii_lowercase().as_str() {
            "all" => Rule::All,
            "clique" => Rule::Clique,
            "clique-g" | "clique_g" | "relaxed-clique" => {
                let p = need(param)?;
                if p.contains(',') {
                    let t = p.split(',').map(|x| x.trim().parse()).collect::<Result<Vec<usize>, _>>();
                    Rule::CliqueG(Slack::Table(t.map_err(|_| self.err("bad slack table"))?))
                } else {
                    Rule::CliqueG(Slack::Const(p.parse().map_err(|_| self.err("bad slack"))?))
                }
            }
            "harmonious" | "h" => Rule::Harmonious,
            "lambda-harmonious" | "lambda_harmonious" | "h-lambda" => {
                let l = parse_ratio(need(param)?)?;
                check_unit(l, "lambda")?;
                Rule::LambdaHarmonious(l)
            }
            "b3ct" => Rule::b3ct(),
            "borda" => Rule::borda(),
            "weighted" => {
                let w = need(param)?
                    .split(',')
                    .map(|x| x.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| self.err("bad weight vector"))?;
                Rule::Weighted(Schema::Uniform(w))
            }
            "gs" | "group-stable" => Rule::GroupStable,
            "sa" | "self-approving" => Rule::SelfApproving,
            "comprehensive" => Rule::Comprehensive,
            "" => return Err(self.err("expected a rule name")),
            other => return Err(self.err(&format!("unknown rule {other:?}"))),
        };
        if param.is_some() && !matches!(rule, Rule::CliqueG(_) | Rule::LambdaHarmonious(_) | Rule::Weighted(Schema::Uniform(_))) {
            return Err(self.err(&format!("{name} takes no parameter")));
        }
        Ok(rule)
    }
}

/// Options for [`enumerate_rule`].
#[derive(Debug, Clone, Copy)]
pub struct EnumerateOptions {
    pub cap: usize,
    pub force: bool,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        EnumerateOptions { cap: ENUMERATION_CAP, force: false }
    }
}

/// Every non-empty member subset, ordered by size then mask.
pub fn enumerate_rule(rule: &Rule, net: &PreferenceNetwork, opts: EnumerateOptions) -> Result<Vec<SubsetMask>> {
    let n = net.n();
    if n > opts.cap && !opts.force {
        return Err(Error::TooLarge { what: "enumeration", n, cap: opts.cap });
    }
    if n >= 63 {
        return Err(Error::TooLarge { what: "enumeration", n, cap: 62 });
    }
    let total = 1u64 << n;
    let hits: Result<Vec<Option<SubsetMask>>> = (1..total)
        .into_par_iter()
        .map(|m| {
            let s = SubsetMask(m);
            rule.contains_with(net, s, opts.force).map(|b| b.then_some(s))
        })
        .collect();
    let mut out: Vec<SubsetMask> = hits?.into_iter().flatten().collect();
    out.sort_by_key(|s| (s.len(), s.0));
    Ok(out)
}
