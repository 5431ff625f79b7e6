//! Preference networks, linear orders and ordered partitions.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::subset::{SubsetMask, MAX_MEMBERS};

/// Dense member index into a network's ground set.
pub type MemberId = usize;

/// A total ranking of `0..n`. Ranks are 1-based.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<MemberId>", into = "Vec<MemberId>")]
pub struct LinearOrder {
    list: Vec<MemberId>,
    rank: Vec<usize>,
}

impl LinearOrder {
    /// Builds an order from its list view `[x_1, ..., x_n]`.
    pub fn new(list: Vec<MemberId>) -> Result<Self> {
        let n = list.len();
        let mut rank = vec![0usize; n];
        for (pos, &m) in list.iter().enumerate() {
            if m >= n {
                return Err(Error::NotLinearOrder(format!("member {m} out of range 0..{n}")));
            }
            if rank[m] != 0 {
                return Err(Error::NotLinearOrder(format!("member {m} listed twice")));
            }
            rank[m] = pos + 1;
        }
        Ok(LinearOrder { list, rank })
    }

    /// Builds an order from its rank mapping (`ranks[m]` is the 1-based position of `m`).
    pub fn from_ranks(ranks: &[usize]) -> Result<Self> {
        let n = ranks.len();
        let mut list = vec![usize::MAX; n];
        for (m, &r) in ranks.iter().enumerate() {
            if r == 0 || r > n {
                return Err(Error::NotLinearOrder(format!("rank {r} of member {m} outside 1..={n}")));
            }
            if list[r - 1] != usize::MAX {
                return Err(Error::NotLinearOrder(format!("rank {r} used twice")));
            }
            list[r - 1] = m;
        }
        Ok(LinearOrder { list, rank: ranks.to_vec() })
    }

    pub fn identity(n: usize) -> Self {
        LinearOrder { list: (0..n).collect(), rank: (1..=n).collect() }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.list.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    /// 1-based rank of `m`. Panics on an unknown id.
    #[inline]
    pub fn rank(&self, m: MemberId) -> usize {
        self.rank[m]
    }

    /// Member at 1-based position `pos`.
    #[inline]
    pub fn at(&self, pos: usize) -> MemberId {
        self.list[pos - 1]
    }

    #[inline]
    pub fn list(&self) -> &[MemberId] {
        &self.list
    }

    #[inline]
    pub fn ranks(&self) -> &[usize] {
        &self.rank
    }

    /// True iff `u` is ranked strictly before `v`.
    #[inline]
    pub fn prefers(&self, u: MemberId, v: MemberId) -> bool {
        self.rank[u] < self.rank[v]
    }

    /// Members in positions `1..=k`.
    pub fn top(&self, k: usize) -> SubsetMask {
        self.list[..k.min(self.len())].iter().copied().collect()
    }

    /// Members of `set` in rank order.
    pub fn sorted(&self, set: SubsetMask) -> Vec<MemberId> {
        self.list.iter().copied().filter(|&m| set.contains(m)).collect()
    }

    /// Relative order of `within`, renumbered densely.
    pub fn restrict(&self, within: SubsetMask) -> LinearOrder {
        let mut dense = vec![usize::MAX; self.len()];
        for (i, m) in within.iter().enumerate() {
            dense[m] = i;
        }
        let list: Vec<_> = self.list.iter().filter(|&&m| within.contains(m)).map(|&m| dense[m]).collect();
        LinearOrder::new(list).expect("restriction of a linear order is linear")
    }
}

impl fmt::Debug for LinearOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.list).finish()
    }
}

impl TryFrom<Vec<MemberId>> for LinearOrder {
    type Error = Error;
    fn try_from(list: Vec<MemberId>) -> Result<Self> {
        LinearOrder::new(list)
    }
}

impl From<LinearOrder> for Vec<MemberId> {
    fn from(o: LinearOrder) -> Self {
        o.list
    }
}

/// Checked form of [`LinearOrder::prefers`].
pub fn prefers(order: &LinearOrder, u: MemberId, v: MemberId) -> Result<bool> {
    let n = order.len();
    for id in [u, v] {
        if id >= n {
            return Err(Error::UnknownMember { id, n });
        }
    }
    Ok(order.prefers(u, v))
}

/// A structural problem found by [`validate_parts`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub member: Option<String>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.member {
            Some(m) => write!(f, "{m}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Checks raw labels and rank lists. One violation per malformed order or
/// duplicated label; an empty result means the parts form a valid network.
pub fn validate_parts(labels: &[String], lists: &[Vec<MemberId>]) -> Vec<Violation> {
    let n = labels.len();
    let mut out = Vec::new();
    if n == 0 {
        out.push(Violation { member: None, message: "network has no members".into() });
    }
    if n > MAX_MEMBERS {
        out.push(Violation { member: None, message: format!("{n} members exceeds the limit of {MAX_MEMBERS}") });
    }
    let mut seen = HashMap::new();
    for (i, l) in labels.iter().enumerate() {
        if let Some(j) = seen.insert(l.as_str(), i) {
            out.push(Violation { member: Some(l.clone()), message: format!("label used by members {j} and {i}") });
        }
    }
    if lists.len() != n {
        out.push(Violation { member: None, message: format!("{} orders for {n} members", lists.len()) });
    }
    for (s, list) in lists.iter().enumerate() {
        let who = labels.get(s).cloned().unwrap_or_else(|| s.to_string());
        let mut count = vec![0usize; n];
        let mut bad = Vec::new();
        for &m in list {
            match count.get_mut(m) {
                Some(c) => *c += 1,
                None => bad.push(format!("unknown member id {m}")),
            }
        }
        let dup: Vec<_> = (0..n).filter(|&m| count[m] > 1).map(|m| labels[m].clone()).collect();
        let missing: Vec<_> = (0..n).filter(|&m| count[m] == 0).map(|m| labels[m].clone()).collect();
        if !dup.is_empty() {
            bad.push(format!("duplicate rank for {}", dup.join(", ")));
        }
        if !missing.is_empty() {
            bad.push(format!("missing {}", missing.join(", ")));
        }
        if !bad.is_empty() {
            out.push(Violation { member: Some(who), message: bad.join("; ") });
        }
    }
    out
}

/// Ground set plus one linear order per member. Immutable; variants are new values.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PreferenceNetwork {
    labels: Vec<String>,
    orders: Vec<LinearOrder>,
}

impl PreferenceNetwork {
    pub fn new(labels: Vec<String>, orders: Vec<LinearOrder>) -> Result<Self> {
        let lists: Vec<Vec<MemberId>> = orders.iter().map(|o| o.list.clone()).collect();
        let v = validate_parts(&labels, &lists);
        if let Some(first) = v.first() {
            return Err(Error::InvalidNetwork(first.to_string()));
        }
        Ok(PreferenceNetwork { labels, orders })
    }

    /// Network with labels `"1".."n"` from list views.
    pub fn from_lists(lists: Vec<Vec<MemberId>>) -> Result<Self> {
        let labels = (1..=lists.len()).map(|i| i.to_string()).collect();
        Self::from_labeled_lists(labels, lists)
    }

    pub fn from_labeled_lists(labels: Vec<String>, lists: Vec<Vec<MemberId>>) -> Result<Self> {
        let v = validate_parts(&labels, &lists);
        if let Some(first) = v.first() {
            return Err(Error::InvalidNetwork(first.to_string()));
        }
        let orders = lists.into_iter().map(LinearOrder::new).collect::<Result<_>>()?;
        Ok(PreferenceNetwork { labels, orders })
    }

    /// Network whose orders are given by 1-based labels `1..=n` (the usual
    /// way worked examples are written).
    pub fn from_one_based(lists: &[&[usize]]) -> Result<Self> {
        let lists = lists
            .iter()
            .map(|l| l.iter().map(|&x| x.checked_sub(1).ok_or_else(|| Error::NotLinearOrder("label 0".into()))).collect())
            .collect::<Result<Vec<Vec<_>>>>()?;
        Self::from_lists(lists)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.orders.len()
    }

    pub fn ground(&self) -> SubsetMask {
        SubsetMask::full(self.n())
    }

    #[inline]
    pub fn order(&self, s: MemberId) -> &LinearOrder {
        &self.orders[s]
    }

    pub fn orders(&self) -> &[LinearOrder] {
        &self.orders
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, m: MemberId) -> &str {
        &self.labels[m]
    }

    pub fn id_of(&self, label: &str) -> Option<MemberId> {
        self.labels.iter().position(|l| l == label)
    }

    /// Ballots of the members of `s`, in id order.
    pub fn ballots(&self, s: SubsetMask) -> Vec<&LinearOrder> {
        s.iter().map(|m| &self.orders[m]).collect()
    }

    pub fn check_subset(&self, s: SubsetMask) -> Result<()> {
        if s.is_empty() {
            return Err(Error::EmptySubset);
        }
        s.check_fits(self.n())
    }

    pub fn check_member(&self, m: MemberId) -> Result<()> {
        if m < self.n() {
            Ok(())
        } else {
            Err(Error::UnknownMember { id: m, n: self.n() })
        }
    }

    /// Renders a subset with labels, e.g. `{1,5,6}`.
    pub fn fmt_set(&self, s: SubsetMask) -> String {
        let parts: Vec<&str> = s.iter().map(|m| self.label(m)).collect();
        format!("{{{}}}", parts.join(","))
    }

    /// Renders an order with labels, e.g. `[1 4 2 3 5 6]`.
    pub fn fmt_order(&self, o: &LinearOrder) -> String {
        let parts: Vec<&str> = o.list().iter().map(|&m| self.label(m)).collect();
        format!("[{}]", parts.join(" "))
    }

    /// Same network with member `s` holding `order` instead.
    pub fn with_order(&self, s: MemberId, order: LinearOrder) -> Result<Self> {
        self.check_member(s)?;
        if order.len() != self.n() {
            return Err(Error::GroundSetMismatch(self.n(), order.len()));
        }
        let mut orders = self.orders.clone();
        orders[s] = order;
        Ok(PreferenceNetwork { labels: self.labels.clone(), orders })
    }

    /// Same labels, new orders.
    pub fn with_orders(&self, orders: Vec<LinearOrder>) -> Result<Self> {
        if orders.len() != self.n() || orders.iter().any(|o| o.len() != self.n()) {
            return Err(Error::GroundSetMismatch(self.n(), orders.len()));
        }
        Ok(PreferenceNetwork { labels: self.labels.clone(), orders })
    }

    /// Sub-network on `within`, relative orders preserved. Member ids are
    /// renumbered densely in ascending order; labels carry over.
    pub fn project(&self, within: SubsetMask) -> Result<Self> {
        self.check_subset(within)?;
        let labels = within.iter().map(|m| self.labels[m].clone()).collect();
        let orders = within.iter().map(|s| self.orders[s].restrict(within)).collect();
        Ok(PreferenceNetwork { labels, orders })
    }

    /// Relabels by `sigma` so that `pi'_{sigma(s)}(sigma(v)) = pi_s(v)`.
    /// Member `sigma(s)` of the result carries the label of `s`.
    pub fn apply_isomorphism(&self, sigma: &[MemberId]) -> Result<Self> {
        let n = self.n();
        check_bijection(sigma, n)?;
        let mut labels = vec![String::new(); n];
        let mut orders = vec![LinearOrder::identity(0); n];
        for s in 0..n {
            labels[sigma[s]] = self.labels[s].clone();
            let list = self.orders[s].list().iter().map(|&v| sigma[v]).collect();
            orders[sigma[s]] = LinearOrder::new(list)?;
        }
        Ok(PreferenceNetwork { labels, orders })
    }

    /// Like [`apply_isomorphism`](Self::apply_isomorphism) but keeps the
    /// original label of each id, i.e. permutes preferences over a fixed
    /// ground set.
    pub fn permute(&self, sigma: &[MemberId]) -> Result<Self> {
        let mut out = self.apply_isomorphism(sigma)?;
        out.labels = self.labels.clone();
        Ok(out)
    }

    /// Always empty for a constructed network; kept for symmetry with
    /// [`validate_parts`].
    pub fn validate(&self) -> Vec<Violation> {
        let lists: Vec<Vec<MemberId>> = self.orders.iter().map(|o| o.list.clone()).collect();
        validate_parts(&self.labels, &lists)
    }
}

impl fmt::Debug for PreferenceNetwork {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for s in 0..self.n() {
            m.entry(&self.labels[s], &format_args!("{}", self.fmt_order(&self.orders[s])));
        }
        m.finish()
    }
}

pub(crate) fn check_bijection(sigma: &[MemberId], n: usize) -> Result<()> {
    if sigma.len() != n {
        return Err(Error::NotBijection(format!("length {} for {n} members", sigma.len())));
    }
    let mut hit = vec![false; n];
    for (i, &t) in sigma.iter().enumerate() {
        if t >= n || std::mem::replace(&mut hit[t], true) {
            return Err(Error::NotBijection(format!("image of {i} is {t}")));
        }
    }
    Ok(())
}

/// Ordered sequence of disjoint non-empty blocks covering `0..n`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
pub struct OrderedPartition {
    blocks: Vec<SubsetMask>,
    #[serde(skip)]
    block_of: Vec<usize>,
}

impl OrderedPartition {
    pub fn new(blocks: Vec<SubsetMask>, n: usize) -> Result<Self> {
        let mut block_of = vec![usize::MAX; n];
        for (b, &mask) in blocks.iter().enumerate() {
            if mask.is_empty() {
                return Err(Error::Precondition(format!("block {b} is empty")));
            }
            mask.check_fits(n)?;
            for m in mask.iter() {
                if block_of[m] != usize::MAX {
                    return Err(Error::Precondition(format!("member {m} in two blocks")));
                }
                block_of[m] = b;
            }
        }
        if let Some(m) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(Error::Precondition(format!("member {m} in no block")));
        }
        Ok(OrderedPartition { blocks, block_of })
    }

    /// Groups members by key, blocks ordered by ascending key.
    pub fn from_keys<K: Ord + Copy>(keys: &[K]) -> Self {
        let mut ids: Vec<usize> = (0..keys.len()).collect();
        ids.sort_by_key(|&i| keys[i]);
        let mut blocks: Vec<SubsetMask> = Vec::new();
        let mut last = None;
        for i in ids {
            if last == Some(keys[i]) {
                let b = blocks.last_mut().unwrap();
                *b = b.with(i);
            } else {
                blocks.push(SubsetMask::singleton(i));
                last = Some(keys[i]);
            }
        }
        OrderedPartition::new(blocks, keys.len()).expect("keys induce a partition")
    }

    pub fn singletons(order: &LinearOrder) -> Self {
        OrderedPartition::from_keys(order.ranks())
    }

    pub fn blocks(&self) -> &[SubsetMask] {
        &self.blocks
    }

    pub fn n(&self) -> usize {
        self.block_of.len()
    }

    #[inline]
    pub fn block_of(&self, m: MemberId) -> usize {
        self.block_of[m]
    }

    /// Strict preference: `u`'s block precedes `v`'s.
    #[inline]
    pub fn above(&self, u: MemberId, v: MemberId) -> bool {
        self.block_of[u] < self.block_of[v]
    }

    /// True iff every member of `s` is strictly above every outsider.
    pub fn ranks_strictly_first(&self, s: SubsetMask) -> bool {
        let worst_in = s.iter().map(|m| self.block_of[m]).max();
        let best_out = (0..self.n()).filter(|&m| !s.contains(m)).map(|m| self.block_of[m]).min();
        match (worst_in, best_out) {
            (Some(w), Some(b)) => w < b,
            _ => true,
        }
    }

    /// Union of the first blocks when it has exactly `t` members.
    pub fn prefix_of_size(&self, t: usize) -> Option<SubsetMask> {
        let mut acc = SubsetMask::EMPTY;
        for &b in &self.blocks {
            if acc.len() == t {
                break;
            }
            acc = acc.union(b);
        }
        (acc.len() == t).then_some(acc)
    }
}

impl fmt::Debug for OrderedPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.blocks).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_order(n: usize) -> impl Strategy<Value = LinearOrder> {
        Just((0..n).collect::<Vec<_>>()).prop_shuffle().prop_map(|l| LinearOrder::new(l).unwrap())
    }

    fn arb_network(max_n: usize) -> impl Strategy<Value = PreferenceNetwork> {
        (1..=max_n).prop_flat_map(|n| {
            proptest::collection::vec(arb_order(n), n).prop_map(|o| {
                let labels = (0..o.len()).map(|i| format!("m{i}")).collect();
                PreferenceNetwork::new(labels, o).unwrap()
            })
        })
    }

    #[test]
    fn prefers_examples() {
        let p1 = LinearOrder::new(vec![0, 3, 1, 2, 4, 5]).unwrap();
        assert!(prefers(&p1, 3, 1).unwrap());
        assert!(!prefers(&p1, 2, 2).unwrap());
        assert!(prefers(&p1, 9, 1).is_err());
        let id = LinearOrder::identity(5);
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(id.prefers(i, j), i < j);
            }
        }
    }

    #[test]
    fn project_examples() {
        // [a,c,b] on {a,b,c}, keep {a,b}
        let net = PreferenceNetwork::from_lists(vec![vec![0, 2, 1], vec![1, 0, 2], vec![2, 1, 0]]).unwrap();
        let p = net.project(SubsetMask::from_members([0, 1])).unwrap();
        assert_eq!(p.order(0).list(), &[0, 1]);
        assert_eq!(net.project(net.ground()).unwrap(), net);
        assert_eq!(net.project(SubsetMask::EMPTY), Err(Error::EmptySubset));
    }

    #[test]
    fn validate_reports_named_member() {
        let labels: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let v = validate_parts(&labels, &[vec![0, 1, 2], vec![1, 1, 2], vec![2, 0, 1]]);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].member.as_deref(), Some("b"));
        let v = validate_parts(&labels, &[vec![0, 1, 2], vec![1, 0, 2], vec![2, 0]]);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].member.as_deref(), Some("c"));
    }

    #[test]
    fn isomorphism_swap() {
        let net = PreferenceNetwork::from_lists(vec![vec![0, 1], vec![0, 1]]).unwrap();
        let sw = net.apply_isomorphism(&[1, 0]).unwrap();
        assert_eq!(sw.order(0).list(), &[1, 0]);
        assert_eq!(sw.order(1).list(), &[1, 0]);
        assert_eq!(sw.label(0), "2");
        assert!(net.apply_isomorphism(&[0, 0]).is_err());
        assert_eq!(net.apply_isomorphism(&[0, 1]).unwrap(), net);
    }

    #[test]
    fn partition_prefix() {
        let p = OrderedPartition::from_keys(&[2, 0, 2, 1]);
        assert_eq!(p.blocks(), &[SubsetMask(0b0010), SubsetMask(0b1000), SubsetMask(0b0101)]);
        assert_eq!(p.prefix_of_size(2), Some(SubsetMask(0b1010)));
        assert_eq!(p.prefix_of_size(3), None);
        assert!(p.ranks_strictly_first(SubsetMask(0b1010)));
        assert!(!p.ranks_strictly_first(SubsetMask(0b0011)));
    }

    proptest! {
        #[test]
        fn rank_list_round_trip(o in (1usize..12).prop_flat_map(arb_order)) {
            let back = LinearOrder::from_ranks(o.ranks()).unwrap();
            prop_assert_eq!(back.list(), o.list());
            for pos in 1..=o.len() {
                prop_assert_eq!(o.rank(o.at(pos)), pos);
            }
        }

        #[test]
        fn projection_composes(net in arb_network(7), a in any::<u64>(), b in any::<u64>()) {
            let n = net.n();
            let outer = SubsetMask(a).intersection(net.ground());
            let inner = SubsetMask(b).intersection(outer);
            prop_assume!(!inner.is_empty());
            let direct = net.project(inner).unwrap();
            let via = net.project(outer).unwrap().project(inner.compress(outer)).unwrap();
            prop_assert_eq!(direct, via);
            prop_assert!(n <= 7);
        }

        #[test]
        fn isomorphism_definition_and_validity(
            (net, sigma) in arb_network(6).prop_flat_map(|net| {
                let n = net.n();
                (Just(net), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
            })
        ) {
            let img = net.apply_isomorphism(&sigma).unwrap();
            prop_assert!(img.validate().is_empty());
            for s in 0..net.n() {
                for v in 0..net.n() {
                    prop_assert_eq!(img.order(sigma[s]).rank(sigma[v]), net.order(s).rank(v));
                }
            }
        }

        #[test]
        fn project_commutes_with_relabeling(
            (net, sigma, keep) in arb_network(6).prop_flat_map(|net| {
                let n = net.n();
                (Just(net), Just((0..n).collect::<Vec<_>>()).prop_shuffle(), 1u64..(1u64 << n))
            })
        ) {
            // Project then relabel equals relabel then project on the image.
            let keep = SubsetMask(keep);
            let image: SubsetMask = keep.iter().map(|m| sigma[m]).collect();
            let left = net.apply_isomorphism(&sigma).unwrap().project(image).unwrap();
            let p = net.project(keep).unwrap();
            // Induced bijection keep -> image on dense ids.
            let members: Vec<_> = keep.iter().collect();
            let tau: Vec<usize> = members.iter().map(|&m| SubsetMask::singleton(sigma[m]).compress(image).first().unwrap()).collect();
            let right = p.apply_isomorphism(&tau).unwrap();
            prop_assert_eq!(left, right);
        }
    }
}
