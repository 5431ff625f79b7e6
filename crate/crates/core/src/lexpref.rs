//! Lexicographic preference between equal-size groups, and witness searches
//! for Group Stability and Self-Approval.
//!
//! A member lex-prefers `G'` to `G` iff the i-th best element of `G'` beats
//! the i-th best element of `G` for every i. The searches below never
//! enumerate bijections; one is rebuilt (i-th best to i-th best) only when a
//! witness is emitted.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{LinearOrder, MemberId, PreferenceNetwork};
use crate::rules::{clique_g_member, lambda_harmonious_member};
use crate::subset::SubsetMask;
use crate::Ratio;

/// Largest ground set the exhaustive searches accept without forcing.
pub const EXHAUSTIVE_CAP: usize = 24;

/// Below this size the searches stay on the calling thread.
const PAR_THRESHOLD: usize = 14;

/// Bijection `f_s` of one member, as `(u, f_s(u))` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MemberBijection {
    pub member: MemberId,
    pub pairs: Vec<(MemberId, MemberId)>,
}

/// Certificate that `S` is not group stable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GsWitness {
    pub g: SubsetMask,
    pub g_prime: SubsetMask,
    pub bijections: Vec<MemberBijection>,
}

/// Certificate that `S` is not self-approving.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SaWitness {
    pub g_prime: SubsetMask,
    pub bijections: Vec<MemberBijection>,
}

impl GsWitness {
    fn build(net: &PreferenceNetwork, s: SubsetMask, g: SubsetMask, g_prime: SubsetMask) -> Self {
        let bijections = s.difference(g).iter().map(|r| pair_up(net.order(r), r, g, g_prime)).collect();
        GsWitness { g, g_prime, bijections }
    }

    /// Replays every inequality `f_r(u) > u` and the shape constraints.
    pub fn verify(&self, net: &PreferenceNetwork, s: SubsetMask) -> bool {
        let rest = s.difference(self.g);
        !self.g.is_empty()
            && self.g.is_subset_of(s)
            && !rest.is_empty()
            && self.g_prime.is_disjoint(s)
            && self.g_prime.fits(net.n())
            && self.g_prime.len() == self.g.len()
            && self.bijections.iter().map(|b| b.member).eq(rest.iter())
            && self.bijections.iter().all(|b| replay(net.order(b.member), &b.pairs, self.g, self.g_prime))
    }
}

impl SaWitness {
    fn build(net: &PreferenceNetwork, s: SubsetMask, g_prime: SubsetMask) -> Self {
        let bijections = s.iter().map(|r| pair_up(net.order(r), r, s, g_prime)).collect();
        SaWitness { g_prime, bijections }
    }

    pub fn verify(&self, net: &PreferenceNetwork, s: SubsetMask) -> bool {
        self.g_prime.is_disjoint(s)
            && self.g_prime.fits(net.n())
            && self.g_prime.len() == s.len()
            && self.bijections.iter().map(|b| b.member).eq(s.iter())
            && self.bijections.iter().all(|b| replay(net.order(b.member), &b.pairs, s, self.g_prime))
    }
}

fn pair_up(order: &LinearOrder, member: MemberId, g: SubsetMask, g_prime: SubsetMask) -> MemberBijection {
    let pairs = order.sorted(g).into_iter().zip(order.sorted(g_prime)).collect();
    MemberBijection { member, pairs }
}

fn replay(order: &LinearOrder, pairs: &[(MemberId, MemberId)], g: SubsetMask, g_prime: SubsetMask) -> bool {
    let dom: SubsetMask = pairs.iter().map(|p| p.0).collect();
    let img: SubsetMask = pairs.iter().map(|p| p.1).collect();
    pairs.len() == g.len() && dom == g && img == g_prime && pairs.iter().all(|&(u, fu)| order.prefers(fu, u))
}

/// Positions (0-based bits) occupied by `set` under `order`.
#[inline]
fn positions(order: &LinearOrder, set: SubsetMask) -> u64 {
    set.iter().fold(0u64, |acc, m| acc | 1u64 << (order.rank(m) - 1))
}

/// Sorted-pair test on position masks: the i-th lowest bit of `better`
/// must sit below the i-th lowest bit of `worse`.
#[inline]
fn beats_positions(mut better: u64, mut worse: u64) -> bool {
    while worse != 0 {
        let w = worse & worse.wrapping_neg();
        let b = better & better.wrapping_neg();
        if b == 0 || b > w {
            return false;
        }
        worse ^= w;
        better ^= b;
    }
    true
}

#[inline]
pub(crate) fn lex_prefers_unchecked(order: &LinearOrder, g: SubsetMask, g_prime: SubsetMask) -> bool {
    beats_positions(positions(order, g_prime), positions(order, g))
}

/// True iff `order` lexicographically prefers `g_prime` to `g`, i.e. some
/// bijection `f: G -> G'` has `f(u)` ranked above `u` for every `u`.
pub fn lex_prefers(order: &LinearOrder, g: SubsetMask, g_prime: SubsetMask) -> Result<bool> {
    let n = order.len();
    g.check_fits(n)?;
    g_prime.check_fits(n)?;
    if g.is_empty() {
        return Err(Error::EmptySubset);
    }
    if g.len() != g_prime.len() {
        return Err(Error::Precondition(format!("groups of sizes {} and {}", g.len(), g_prime.len())));
    }
    if !g.is_disjoint(g_prime) {
        return Err(Error::Precondition("groups overlap".into()));
    }
    Ok(lex_prefers_unchecked(order, g, g_prime))
}

fn guard(net: &PreferenceNetwork, s: SubsetMask, what: &'static str, force: bool) -> Result<()> {
    net.check_subset(s)?;
    if !force && net.n() > EXHAUSTIVE_CAP {
        return Err(Error::TooLarge { what, n: net.n(), cap: EXHAUSTIVE_CAP });
    }
    Ok(())
}

/// Outsiders that `order` ranks above its worst member of `g`.
#[inline]
fn above_worst(order: &LinearOrder, g: SubsetMask, outsiders: SubsetMask) -> SubsetMask {
    let worst = g.iter().map(|m| order.rank(m)).max().unwrap_or(0);
    order.top(worst.saturating_sub(1)).intersection(outsiders)
}

/// Best `k` members of `cand` under `order`, if there are that many.
fn best_k(order: &LinearOrder, cand: SubsetMask, k: usize) -> Option<SubsetMask> {
    let mut out = SubsetMask::EMPTY;
    for &m in order.list() {
        if out.len() == k {
            break;
        }
        if cand.contains(m) {
            out = out.with(m);
        }
    }
    (out.len() == k).then_some(out)
}

/// First `G'` (ascending mask) among the `k`-subsets of `cand` that every
/// voter lex-prefers to `g`.
fn first_common(net: &PreferenceNetwork, voters: SubsetMask, g: SubsetMask, cand: SubsetMask, k: usize) -> Option<SubsetMask> {
    let mut cand = cand;
    for r in voters.iter() {
        cand = cand.intersection(above_worst(net.order(r), g, cand));
        if cand.len() < k {
            return None;
        }
    }
    // A voter whose best k candidates fail rules out every subset.
    for r in voters.iter() {
        let best = best_k(net.order(r), cand, k)?;
        if !lex_prefers_unchecked(net.order(r), g, best) {
            return None;
        }
    }
    let worse: Vec<(&LinearOrder, u64)> = voters.iter().map(|r| (net.order(r), positions(net.order(r), g))).collect();
    cand.subsets_of_size(k)
        .find(|&gp| worse.iter().all(|&(o, wg)| beats_positions(positions(o, gp), wg)))
}

fn gs_search(net: &PreferenceNetwork, s: SubsetMask, max_k: usize, restrict: impl Fn(SubsetMask) -> SubsetMask + Sync) -> Option<GsWitness> {
    let outsiders = net.ground().difference(s);
    let top_k = max_k.min(s.len().saturating_sub(1)).min(outsiders.len());
    for k in 1..=top_k {
        let probe = |g: SubsetMask| {
            let rest = s.difference(g);
            first_common(net, rest, g, restrict(g).intersection(outsiders), k).map(|gp| (g, gp))
        };
        let found = if net.n() >= PAR_THRESHOLD {
            let gs: Vec<SubsetMask> = s.subsets_of_size(k).collect();
            gs.into_par_iter().find_map_first(probe)
        } else {
            s.subsets_of_size(k).find_map(probe)
        };
        if let Some((g, gp)) = found {
            return Some(GsWitness::build(net, s, g, gp));
        }
    }
    None
}

/// Exhaustive GS witness search. Returns the first witness in canonical
/// order: `|G|` ascending, then `G` by mask, then `G'` by mask.
pub fn gs_witness(net: &PreferenceNetwork, s: SubsetMask) -> Result<Option<GsWitness>> {
    guard(net, s, "exhaustive GS search", false)?;
    Ok(gs_search(net, s, usize::MAX, |_| SubsetMask(u64::MAX)))
}

/// [`gs_witness`] without the size cap.
pub fn gs_witness_forced(net: &PreferenceNetwork, s: SubsetMask) -> Result<Option<GsWitness>> {
    guard(net, s, "exhaustive GS search", true)?;
    Ok(gs_search(net, s, usize::MAX, |_| SubsetMask(u64::MAX)))
}

fn sa_search(net: &PreferenceNetwork, s: SubsetMask, cand: SubsetMask) -> Option<SaWitness> {
    let outsiders = net.ground().difference(s);
    if s.len() > outsiders.len() {
        return None;
    }
    first_common(net, s, s, cand.intersection(outsiders), s.len()).map(|gp| SaWitness::build(net, s, gp))
}

/// Exhaustive SA witness search; first `G'` by ascending mask.
pub fn sa_witness(net: &PreferenceNetwork, s: SubsetMask) -> Result<Option<SaWitness>> {
    guard(net, s, "exhaustive SA search", false)?;
    Ok(sa_search(net, s, SubsetMask(u64::MAX)))
}

pub fn sa_witness_forced(net: &PreferenceNetwork, s: SubsetMask) -> Result<Option<SaWitness>> {
    guard(net, s, "exhaustive SA search", true)?;
    Ok(sa_search(net, s, SubsetMask(u64::MAX)))
}

/// Outsiders in the top `|S| + g` positions of `s`'s own order.
fn window(net: &PreferenceNetwork, s: SubsetMask, member: MemberId, g: usize) -> SubsetMask {
    net.order(member).top(s.len().saturating_add(g)).difference(s)
}

fn check_clique_g(net: &PreferenceNetwork, s: SubsetMask, g: usize) -> Result<()> {
    net.check_subset(s)?;
    if !clique_g_member(net, s, g) {
        return Err(Error::Precondition(format!("subset is not in Clique({g})")));
    }
    Ok(())
}

/// GS search for `S` in Clique(g). Every witness `G'` lies in the window
/// of each remaining member, so `|G| <= g` and candidates come from a
/// `g`-element set. Returns the same witness as [`gs_witness`].
pub fn gs_witness_pruned(net: &PreferenceNetwork, s: SubsetMask, g: usize) -> Result<Option<GsWitness>> {
    check_clique_g(net, s, g)?;
    Ok(gs_search(net, s, g, |grp| {
        let lead = s.difference(grp).first().expect("G is a proper subset");
        window(net, s, lead, g)
    }))
}

/// SA search for `S` in Clique(g); candidates restricted to the window of
/// the first member.
pub fn sa_witness_pruned(net: &PreferenceNetwork, s: SubsetMask, g: usize) -> Result<Option<SaWitness>> {
    check_clique_g(net, s, g)?;
    if s.len() > g {
        return Ok(None);
    }
    let lead = s.first().expect("non-empty");
    Ok(sa_search(net, s, window(net, s, lead, g)))
}

/// Polynomial GS check for a λ-harmonious `S` with `(1-λ)|S| < 2`. Only
/// groups leaving a single member `r` can be witnesses; for each the best
/// `|S|-1` outsiders under `r`'s order are tried.
pub fn gs_check_harmonious(net: &PreferenceNetwork, s: SubsetMask, lambda: Ratio) -> Result<Option<GsWitness>> {
    net.check_subset(s)?;
    crate::ratio::check_unit(lambda, "lambda")?;
    if (Ratio::from_integer(1) - lambda) * Ratio::from_integer(s.len() as i64) >= Ratio::from_integer(2) {
        return Err(Error::Precondition("(1 - lambda)|S| must be below 2".into()));
    }
    if !lambda_harmonious_member(net, s, lambda) {
        return Err(Error::Precondition("subset is not lambda-harmonious".into()));
    }
    let outsiders = net.ground().difference(s);
    let k = s.len() - 1;
    if k == 0 || outsiders.len() < k {
        return Ok(None);
    }
    for r in s.iter() {
        let g = s.without(r);
        let gp = best_k(net.order(r), outsiders, k).expect("enough outsiders");
        if lex_prefers_unchecked(net.order(r), g, gp) {
            return Ok(Some(GsWitness::build(net, s, g, gp)));
        }
    }
    Ok(None)
}

/// Certificate that `S` is not weakly group stable: one global bijection
/// `f: G -> G'` with every member of `S - G` preferring `f(u)` to `u`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WeakGsWitness {
    pub g: SubsetMask,
    pub g_prime: SubsetMask,
    pub pairs: Vec<(MemberId, MemberId)>,
}

impl WeakGsWitness {
    pub fn verify(&self, net: &PreferenceNetwork, s: SubsetMask) -> bool {
        let rest = s.difference(self.g);
        !self.g.is_empty()
            && self.g.is_subset_of(s)
            && 2 * self.g.len() <= s.len()
            && self.g_prime.is_disjoint(s)
            && self.g_prime.fits(net.n())
            && self.pairs.len() == self.g.len()
            && self.pairs.iter().map(|p| p.0).collect::<SubsetMask>() == self.g
            && self.pairs.iter().map(|p| p.1).collect::<SubsetMask>() == self.g_prime
            && self.pairs.iter().all(|&(u, fu)| rest.iter().all(|r| net.order(r).prefers(fu, u)))
    }
}

/// Kuhn's augmenting path step for the bipartite matching below.
fn augment(u: usize, adj: &[SubsetMask], owner: &mut [Option<usize>], seen: &mut SubsetMask) -> bool {
    for v in adj[u].iter() {
        if seen.contains(v) {
            continue;
        }
        *seen = seen.with(v);
        if owner[v].is_none_or(|w| augment(w, adj, owner, seen)) {
            owner[v] = Some(u);
            return true;
        }
    }
    false
}

/// Searches `G` with `0 < |G| <= |S|/2` (size, then mask) for a global
/// bijection into outsiders that all of `S - G` prefer pointwise. Existence
/// reduces to a matching saturating `G` in the graph `u -> v` where every
/// remaining member prefers `v` to `u`.
pub fn weak_gs_witness(net: &PreferenceNetwork, s: SubsetMask) -> Result<Option<WeakGsWitness>> {
    net.check_subset(s)?;
    let outsiders = net.ground().difference(s);
    for k in 1..=(s.len() / 2).min(outsiders.len()) {
        for g in s.subsets_of_size(k) {
            let rest = s.difference(g);
            let members: Vec<MemberId> = g.iter().collect();
            let adj: Vec<SubsetMask> = members
                .iter()
                .map(|&u| outsiders.iter().filter(|&v| rest.iter().all(|r| net.order(r).prefers(v, u))).collect())
                .collect();
            let mut owner = vec![None; net.n()];
            let matched = (0..members.len()).all(|i| {
                let mut seen = SubsetMask::EMPTY;
                augment(i, &adj, &mut owner, &mut seen)
            });
            if matched {
                let mut pairs: Vec<(MemberId, MemberId)> =
                    owner.iter().enumerate().filter_map(|(v, o)| o.map(|i| (members[i], v))).collect();
                pairs.sort_unstable();
                let g_prime = pairs.iter().map(|p| p.1).collect();
                return Ok(Some(WeakGsWitness { g, g_prime, pairs }));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;
    use proptest::prelude::*;

    fn set(ids: &[usize]) -> SubsetMask {
        ids.iter().map(|&x| x - 1).collect()
    }

    /// Brute force over all bijections.
    fn has_bijection(order: &LinearOrder, g: &[usize], gp: &[usize]) -> bool {
        fn go(order: &LinearOrder, g: &[usize], gp: &[usize], used: &mut Vec<bool>, i: usize) -> bool {
            if i == g.len() {
                return true;
            }
            for j in 0..gp.len() {
                if !used[j] && order.prefers(gp[j], g[i]) {
                    used[j] = true;
                    if go(order, g, gp, used, i + 1) {
                        return true;
                    }
                    used[j] = false;
                }
            }
            false
        }
        go(order, g, gp, &mut vec![false; gp.len()], 0)
    }

    #[test]
    fn lex_examples() {
        let abcd = LinearOrder::identity(4);
        assert!(lex_prefers(&abcd, SubsetMask(0b1100), SubsetMask(0b0011)).unwrap());
        assert!(!lex_prefers(&abcd, SubsetMask(0b0011), SubsetMask(0b1100)).unwrap());
        let pi1 = instances::b3ct_profile().order(0).clone();
        assert!(lex_prefers(&pi1, set(&[5, 6]), set(&[2, 4])).unwrap());
        assert!(lex_prefers(&pi1, SubsetMask(0b11), SubsetMask(0b1)).is_err());
        assert!(lex_prefers(&pi1, SubsetMask(0b11), SubsetMask(0b110)).is_err());
    }

    #[test]
    fn b3ct_network_witnesses() {
        let net = instances::b3ct_profile();
        let t = set(&[1, 5, 6]);
        let w = gs_witness(&net, t).unwrap().unwrap();
        assert!(w.verify(&net, t));
        assert_eq!(w.g, set(&[5, 6]));
        assert_eq!(sa_witness(&net, set(&[1, 2, 3])).unwrap(), None);
        assert_eq!(gs_witness(&net, net.ground()).unwrap(), None);
        assert_eq!(gs_witness(&net, set(&[4])).unwrap(), None);
        // |S| > |V - S|
        assert_eq!(sa_witness(&net, set(&[1, 2, 3, 4])).unwrap(), None);
    }

    #[test]
    fn harmonious_check_rejects_bad_lambda() {
        let net = instances::b3ct_profile();
        let t = set(&[1, 5, 6]);
        assert!(gs_check_harmonious(&net, t, Ratio::new(1, 10)).is_err());
        assert!(gs_check_harmonious(&net, net.ground(), Ratio::from_integer(1)).unwrap().is_none());
    }

    fn arb_lex_case() -> impl Strategy<Value = (LinearOrder, Vec<usize>, Vec<usize>)> {
        (2usize..=10).prop_flat_map(|n| {
            (Just((0..n).collect::<Vec<_>>()).prop_shuffle(), Just((0..n).collect::<Vec<_>>()).prop_shuffle(), 1..=n / 2)
                .prop_map(|(order, pick, k)| {
                    let g = pick[..k].to_vec();
                    let gp = pick[k..2 * k].to_vec();
                    (LinearOrder::new(order).unwrap(), g, gp)
                })
        })
    }

    proptest! {
        #[test]
        fn sorted_pair_criterion_matches_bijection_search((order, g, gp) in arb_lex_case()) {
            let gm: SubsetMask = g.iter().copied().collect();
            let gpm: SubsetMask = gp.iter().copied().collect();
            prop_assert_eq!(lex_prefers(&order, gm, gpm).unwrap(), has_bijection(&order, &g, &gp));
        }

        #[test]
        fn witnesses_replay_and_vacuous_cases(seed in any::<u64>(), n in 2usize..=8, mask in any::<u64>()) {
            let net = crate::generators::random_network(n, seed);
            let s = SubsetMask(mask).intersection(net.ground());
            prop_assume!(!s.is_empty());
            if let Some(w) = gs_witness(&net, s).unwrap() {
                prop_assert!(w.verify(&net, s));
            }
            if let Some(w) = sa_witness(&net, s).unwrap() {
                prop_assert!(w.verify(&net, s));
            }
            if s.len() > n - s.len() {
                prop_assert!(sa_witness(&net, s).unwrap().is_none());
            }
            prop_assert!(gs_witness(&net, net.ground()).unwrap().is_none());
        }
    }
}
