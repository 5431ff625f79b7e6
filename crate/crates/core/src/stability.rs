//! Stability of communities: preference perturbations, the `(α, β)` margin
//! of a B³CT community, δ-strong fixed points, and δ-stable harmonious
//! communities with their sampling-based identification.
//!
//! Every threshold of the form `|T| >= (1 - δ)|S|` or `c >= x|S|` is
//! compared exactly in rationals.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::aggregation::{aggregate_harmonious, phi_all, Aggregator};
use crate::error::{Error, Result};
use crate::generators::{derive_seed, permutations, rng};
use crate::model::{LinearOrder, MemberId, PreferenceNetwork};
use crate::ratio::{at_least_fraction, check_unit};
use crate::rules::min_cross_support;
use crate::subset::SubsetMask;
use crate::Ratio;

/// Largest ground set for the exhaustive perturbation search.
pub const PERTURBATION_CAP: usize = 6;

/// How far `Π'` is from `Π` on the ballots of `S`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PerturbationReport {
    /// `disagreements[v]` counts members `s` of `S` with `π_s(v) != π'_s(v)`.
    pub disagreements: Vec<usize>,
    /// `max_v disagreements[v] / |S|`.
    #[serde(serialize_with = "crate::ratio::serialize")]
    pub max_fraction: Ratio,
    /// Every member of `S` keeps the positions occupied by `S`.
    pub membership_preserving: bool,
}

impl PerturbationReport {
    /// True iff `Π'` is a δ-perturbation of `Π` with respect to `S`.
    pub fn within(&self, delta: Ratio) -> bool {
        self.max_fraction <= delta
    }
}

pub fn perturbation_report(base: &PreferenceNetwork, other: &PreferenceNetwork, s: SubsetMask) -> Result<PerturbationReport> {
    if base.n() != other.n() {
        return Err(Error::GroundSetMismatch(base.n(), other.n()));
    }
    base.check_subset(s)?;
    let n = base.n();
    let mut disagreements = vec![0usize; n];
    let mut membership_preserving = true;
    for m in s.iter() {
        let (p, q) = (base.order(m), other.order(m));
        for (v, d) in disagreements.iter_mut().enumerate() {
            if p.rank(v) != q.rank(v) {
                *d += 1;
            }
        }
        let slots = |o: &LinearOrder| s.iter().fold(0u64, |acc, u| acc | 1u64 << (o.rank(u) - 1));
        membership_preserving &= slots(p) == slots(q);
    }
    let worst = disagreements.iter().copied().max().unwrap_or(0);
    Ok(PerturbationReport {
        disagreements,
        max_fraction: Ratio::new(worst as i64, s.len() as i64),
        membership_preserving,
    })
}

/// True iff for every candidate `v`, at most `δ|S|` members of `S` moved it.
pub fn is_delta_perturbation(base: &PreferenceNetwork, other: &PreferenceNetwork, s: SubsetMask, delta: Ratio) -> Result<bool> {
    check_unit(delta, "delta")?;
    Ok(perturbation_report(base, other, s)?.within(delta))
}

/// The B³CT margin of `S`: `α* = min_{u in S} φ_S(u)/|S|` and
/// `β* = max_{v outside S} φ_S(v)/|S|`, with `k = |S|` votes per member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlphaBeta {
    #[serde(serialize_with = "crate::ratio::serialize")]
    pub alpha: Ratio,
    /// Zero when `S` has no outsiders; see `no_outsiders`.
    #[serde(serialize_with = "crate::ratio::serialize")]
    pub beta: Ratio,
    pub weakest_member: MemberId,
    pub strongest_outsider: Option<MemberId>,
    pub no_outsiders: bool,
}

impl AlphaBeta {
    pub fn gap(&self) -> Ratio {
        self.alpha - self.beta
    }

    /// `S` is a B³CT community iff `α* > β*`.
    pub fn is_community(&self) -> bool {
        self.no_outsiders || self.alpha > self.beta
    }
}

pub fn alpha_beta(net: &PreferenceNetwork, s: SubsetMask) -> Result<AlphaBeta> {
    net.check_subset(s)?;
    let k = s.len();
    let phi = phi_all(net, s, k);
    let size = k as i64;
    // Ties go to the lowest id.
    let weakest_member = s.iter().min_by_key(|&u| phi[u]).expect("non-empty");
    let strongest_outsider = net.ground().difference(s).iter().max_by_key(|&v| (phi[v], std::cmp::Reverse(v)));
    Ok(AlphaBeta {
        alpha: Ratio::new(phi[weakest_member] as i64, size),
        beta: strongest_outsider.map_or(Ratio::zero(), |v| Ratio::new(phi[v] as i64, size)),
        weakest_member,
        strongest_outsider,
        no_outsiders: strongest_outsider.is_none(),
    })
}

/// Perturbation radii of a B³CT community.
#[derive(Debug, Clone, Serialize)]
pub struct PerturbationBounds {
    pub margin: AlphaBeta,
    /// `(α* - β*) / 2`: every δ-perturbation with `δ` strictly below it
    /// keeps `S` a community.
    #[serde(serialize_with = "crate::ratio::serialize")]
    pub certified: Ratio,
    /// The size of the cheaper of the two breaking constructions.
    #[serde(serialize_with = "crate::ratio::serialize")]
    pub refuted: Ratio,
    /// A δ-perturbation with `δ = refuted` under which `S` is no longer a
    /// community.
    pub witness: PreferenceNetwork,
    pub construction: String,
}

fn move_to(order: &LinearOrder, m: MemberId, pos: usize) -> LinearOrder {
    let mut list: Vec<MemberId> = order.list().iter().copied().filter(|&x| x != m).collect();
    list.insert(pos, m);
    LinearOrder::new(list).expect("permutation")
}

fn b3ct_member(net: &PreferenceNetwork, s: SubsetMask) -> Result<bool> {
    Ok(alpha_beta(net, s)?.is_community())
}

/// Certified and refuted perturbation radii for a B³CT community `S` with
/// outsiders. The refutation runs two constructions and keeps the one with
/// the smaller measured δ: drop the weakest member `u*` to the bottom for
/// every member voting for it (δ = α*), or lift the strongest outsider
/// `v*` to the top for `(α* - β*)|S|` members not voting for it
/// (δ = α* - β*).
pub fn b3ct_perturbation_bounds(net: &PreferenceNetwork, s: SubsetMask) -> Result<PerturbationBounds> {
    let margin = alpha_beta(net, s)?;
    if !margin.is_community() {
        return Err(Error::Precondition(format!("{} is not a B3CT community", net.fmt_set(s))));
    }
    let Some(v_star) = margin.strongest_outsider else {
        return Err(Error::Precondition("a community without outsiders cannot be broken".into()));
    };
    let k = s.len();
    let u_star = margin.weakest_member;
    let n = net.n();

    let mut demote = net.orders().to_vec();
    for m in s.iter() {
        if net.order(m).rank(u_star) <= k {
            demote[m] = move_to(net.order(m), u_star, n - 1);
        }
    }
    let demote = net.with_orders(demote)?;

    let gap = ((margin.alpha - margin.beta) * Ratio::from_integer(k as i64)).to_integer() as usize;
    let mut lift = net.orders().to_vec();
    for m in s.iter().filter(|&m| net.order(m).rank(v_star) > k).take(gap) {
        lift[m] = move_to(net.order(m), v_star, 0);
    }
    let lift = net.with_orders(lift)?;

    let mut options = Vec::new();
    for (name, p) in [
        (format!("move {} to the bottom for its voters", net.label(u_star)), demote),
        (format!("move {} to the top for {gap} non-voters", net.label(v_star)), lift),
    ] {
        if !b3ct_member(&p, s)? {
            let d = perturbation_report(net, &p, s)?.max_fraction;
            options.push((d, name, p));
        }
    }
    let (refuted, construction, witness) = options.into_iter().min_by_key(|o| o.0).expect("the lift construction always breaks S");
    Ok(PerturbationBounds { certified: margin.gap() / Ratio::from_integer(2), refuted, witness, construction, margin })
}

/// Depth-first choice of one option per member of `S`, keeping every
/// candidate's moved count within `cap`.
struct Search<'a> {
    options: &'a [Vec<(SubsetMask, SubsetMask, usize)>],
    cap: usize,
    s: SubsetMask,
    outsiders: SubsetMask,
    load: Vec<usize>,
    votes: Vec<usize>,
    chosen: Vec<usize>,
}

impl Search<'_> {
    fn run(&mut self, i: usize) -> bool {
        if i == self.options.len() {
            let worst_in = self.s.iter().map(|u| self.votes[u]).min().unwrap_or(0);
            let best_out = self.outsiders.iter().map(|v| self.votes[v]).max();
            return best_out.is_some_and(|b| worst_in <= b);
        }
        for (j, &(top, moved, _)) in self.options[i].iter().enumerate() {
            if moved.iter().any(|v| self.load[v] >= self.cap) {
                continue;
            }
            moved.iter().for_each(|v| self.load[v] += 1);
            top.iter().for_each(|v| self.votes[v] += 1);
            self.chosen[i] = j;
            if self.run(i + 1) {
                return true;
            }
            moved.iter().for_each(|v| self.load[v] -= 1);
            top.iter().for_each(|v| self.votes[v] -= 1);
        }
        false
    }
}

/// Exhaustive search for a δ-perturbation of the ballots of `S` (optionally
/// membership-preserving) under which `S` stops being a B³CT community.
/// Only `S`'s ballots matter, so outsiders keep theirs. Limited to
/// `n <= 6`.
pub fn b3ct_perturbation_breaker(net: &PreferenceNetwork, s: SubsetMask, delta: Ratio, membership_preserving: bool) -> Result<Option<PreferenceNetwork>> {
    net.check_subset(s)?;
    check_unit(delta, "delta")?;
    let n = net.n();
    if n > PERTURBATION_CAP {
        return Err(Error::TooLarge { what: "exhaustive perturbation search", n, cap: PERTURBATION_CAP });
    }
    let k = s.len();
    let cap = (delta * Ratio::from_integer(k as i64)).floor().to_integer() as usize;
    let perms = permutations(n);
    let members: Vec<MemberId> = s.iter().collect();

    // Per member: for each achievable top-k set, the minimal sets of moved
    // candidates, each with one order realising it.
    let options: Vec<Vec<(SubsetMask, SubsetMask, usize)>> = members
        .iter()
        .map(|&m| {
            let base = net.order(m);
            let slots = |o: &[MemberId]| s.iter().fold(0u64, |acc, u| acc | 1u64 << o.iter().position(|&x| x == u).expect("member"));
            let base_slots = slots(base.list());
            let mut found: Vec<(SubsetMask, SubsetMask, usize)> = Vec::new();
            for (idx, p) in perms.iter().enumerate() {
                if membership_preserving && slots(p) != base_slots {
                    continue;
                }
                let moved: SubsetMask = p.iter().enumerate().filter(|&(pos, &v)| base.rank(v) != pos + 1).map(|(_, &v)| v).collect();
                if !moved.is_empty() && cap == 0 {
                    continue;
                }
                let top: SubsetMask = p[..k].iter().copied().collect();
                if found.iter().any(|&(t, c, _)| t == top && c.is_subset_of(moved)) {
                    continue;
                }
                found.retain(|&(t, c, _)| !(t == top && moved.is_subset_of(c)));
                found.push((top, moved, idx));
            }
            found
        })
        .collect();

    let mut search = Search {
        options: &options,
        cap,
        s,
        outsiders: net.ground().difference(s),
        load: vec![0; n],
        votes: vec![0; n],
        chosen: vec![0; members.len()],
    };
    if !search.run(0) {
        return Ok(None);
    }
    let chosen = search.chosen;
    let mut orders = net.orders().to_vec();
    for (i, &m) in members.iter().enumerate() {
        orders[m] = LinearOrder::new(perms[options[i][chosen[i]].2].clone())?;
    }
    Ok(Some(net.with_orders(orders)?))
}

/// Sizes `t` of subsets `T ⊆ S` with `t >= (1 - δ)|S|`, including `0`
/// when `δ = 1`.
fn admissible_sizes(s_len: usize, delta: Ratio) -> impl Iterator<Item = usize> {
    let keep = Ratio::one() - delta;
    (0..=s_len).filter(move |&t| at_least_fraction(t, keep, s_len))
}

fn subsets_at_least(s: SubsetMask, delta: Ratio) -> impl Iterator<Item = SubsetMask> {
    admissible_sizes(s.len(), delta).flat_map(move |t| s.subsets_of_size(t))
}

/// For every `T ⊆ S` with `|T| >= (1 - δ)|S|`, `F(Π_T)` ranks all of `S`
/// strictly above every outsider. Aggregates are recomputed for each `T`,
/// so weight vectors that depend on the ballot count change with `|T|`.
/// The empty `T` (only reachable at `δ = 1`) ranks nothing above anything.
pub fn delta_strong_fixed_point(f: &dyn Aggregator, net: &PreferenceNetwork, s: SubsetMask, delta: Ratio) -> Result<bool> {
    net.check_subset(s)?;
    check_unit(delta, "delta")?;
    let outsiders = net.ground().difference(s);
    if outsiders.is_empty() {
        return Ok(true);
    }
    for t in subsets_at_least(s, delta) {
        if t.is_empty() {
            return Ok(false);
        }
        if !f.aggregate(net.n(), &net.ballots(t))?.ranks_strictly_first(s) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// For every `T ⊆ S` with `|T| >= (1 - δ)|S|`, each member of `S` gets
/// more top-`|S|` votes from `T` than each outsider.
pub fn delta_strong_b3ct(net: &PreferenceNetwork, s: SubsetMask, delta: Ratio) -> Result<bool> {
    net.check_subset(s)?;
    check_unit(delta, "delta")?;
    let outsiders = net.ground().difference(s);
    if outsiders.is_empty() {
        return Ok(true);
    }
    let k = s.len();
    for t in subsets_at_least(s, delta) {
        let phi = phi_all(net, t, k);
        let worst_in = s.iter().map(|u| phi[u]).min().expect("non-empty");
        let best_out = outsiders.iter().map(|v| phi[v]).max().expect("outsiders exist");
        if worst_in <= best_out {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Every cross pair is carried by at least `(1/2 + δ)|S|` ballots of `S`.
pub fn delta_stable_harmonious(net: &PreferenceNetwork, s: SubsetMask, delta: Ratio) -> Result<bool> {
    net.check_subset(s)?;
    if delta < Ratio::zero() || delta > Ratio::new(1, 2) {
        return Err(Error::Precondition(format!("delta = {delta} must lie in [0, 1/2]")));
    }
    let need = Ratio::new(1, 2) + delta;
    Ok(min_cross_support(net, s, s).is_none_or(|c| at_least_fraction(c, need, s.len())))
}

/// For every `T ⊆ S` with `|T| >= (1 - δ)|S|`, a strict majority of `T`
/// carries every cross pair.
pub fn delta_strong_harmonious(net: &PreferenceNetwork, s: SubsetMask, delta: Ratio) -> Result<bool> {
    net.check_subset(s)?;
    check_unit(delta, "delta")?;
    if net.ground() == s {
        return Ok(true);
    }
    for t in subsets_at_least(s, delta) {
        let c = min_cross_support(net, s, t).expect("outsiders exist");
        if 2 * c <= t.len() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Aggregates the multiset `t` of ballots harmoniously and returns the
/// union of leading blocks of size `size`, if the blocks split there. The
/// result is re-checked: a strict majority of `t` prefers each of its
/// members to each outsider.
pub fn identify(net: &PreferenceNetwork, t: &[MemberId], size: usize) -> Result<Option<SubsetMask>> {
    if t.is_empty() {
        return Err(Error::EmptySubset);
    }
    for &m in t {
        net.check_member(m)?;
    }
    if size == 0 || size > net.n() {
        return Err(Error::Precondition(format!("target size {size} outside 1..={}", net.n())));
    }
    let ballots: Vec<&LinearOrder> = t.iter().map(|&m| net.order(m)).collect();
    let Some(s) = aggregate_harmonious(net.n(), &ballots)?.prefix_of_size(size) else {
        return Ok(None);
    };
    let outsiders = net.ground().difference(s);
    let carried = s.iter().all(|u| outsiders.iter().all(|v| 2 * ballots.iter().filter(|b| b.prefers(u, v)).count() > ballots.len()));
    Ok(carried.then_some(s))
}

/// Sample size `⌈12 ln n / δ²⌉`, at least 1.
pub fn identification_size(n: usize, delta: f64) -> usize {
    let k = (12.0 * (n as f64).ln() / (delta * delta)).ceil();
    if k.is_finite() && k >= 1.0 {
        k as usize
    } else {
        1
    }
}

/// How [`sample_stable_harmonious`] chooses identifying multisets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    /// `draws` multisets of [`identification_size`] members drawn
    /// uniformly with replacement from the whole ground set.
    Random { draws: u64 },
    /// Every non-empty subset of members once. Since `T = S` identifies a
    /// δ-stable `S` whenever `δ > 0`, the output is complete.
    Enumerate,
}

/// Candidate δ-stable harmonious communities found by identification.
/// Every multiset is tried against each target size and each hit is kept
/// only if [`delta_stable_harmonious`] confirms it. Deterministic in
/// `seed`; draws are independent of scheduling.
pub fn sample_stable_harmonious(net: &PreferenceNetwork, delta: Ratio, mode: SampleMode, seed: u64) -> Result<BTreeSet<SubsetMask>> {
    if delta <= Ratio::zero() || delta > Ratio::new(1, 2) {
        return Err(Error::Precondition(format!("delta = {delta} must lie in (0, 1/2]")));
    }
    let n = net.n();
    let probe = |t: Vec<MemberId>| -> Result<Vec<SubsetMask>> {
        let mut out = Vec::new();
        for size in 1..=n {
            if let Some(s) = identify(net, &t, size)? {
                if delta_stable_harmonious(net, s, delta)? {
                    out.push(s);
                }
            }
        }
        Ok(out)
    };
    let found: Result<Vec<Vec<SubsetMask>>> = match mode {
        SampleMode::Random { draws } => {
            let k = identification_size(n, crate::ratio::to_f64(delta));
            (0..draws)
                .into_par_iter()
                .map(|i| {
                    let mut r = rng(derive_seed(seed, i));
                    probe((0..k).map(|_| r.gen_range(0..n)).collect())
                })
                .collect()
        }
        SampleMode::Enumerate => {
            if n > 20 {
                return Err(Error::TooLarge { what: "identification enumeration", n, cap: 20 });
            }
            (1..(1u64 << n)).into_par_iter().map(|m| probe(SubsetMask(m).iter().collect())).collect()
        }
    };
    Ok(found?.into_iter().flatten().collect())
}

/// Every δ-stable harmonious community, by brute force over subsets.
pub fn stable_harmonious_all(net: &PreferenceNetwork, delta: Ratio) -> Result<BTreeSet<SubsetMask>> {
    let n = net.n();
    if n > 20 {
        return Err(Error::TooLarge { what: "brute-force enumeration", n, cap: 20 });
    }
    let mut out = BTreeSet::new();
    for m in 1..(1u64 << n) {
        if delta_stable_harmonious(net, SubsetMask(m), delta)? {
            out.insert(SubsetMask(m));
        }
    }
    Ok(out)
}
