//! Aggregation functions and fixed-point membership.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{LinearOrder, MemberId, OrderedPartition, PreferenceNetwork};
use crate::subset::SubsetMask;

/// Maps a profile of ballots over `0..n` to an ordered partition.
pub trait Aggregator: Send + Sync {
    fn name(&self) -> String;
    fn aggregate(&self, n: usize, ballots: &[&LinearOrder]) -> Result<OrderedPartition>;
}

/// Positional weights: ballot count `k` uses `vectors[k - 1]`, and a
/// member at 1-based position `p` on a ballot scores `vectors[k - 1][p - 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightSchema {
    pub name: String,
    vectors: Vec<Vec<f64>>,
}

impl WeightSchema {
    pub fn new(name: impl Into<String>, vectors: Vec<Vec<f64>>) -> Result<Self> {
        let n = vectors.len();
        if n == 0 {
            return Err(Error::Precondition("weight schema needs n >= 1".into()));
        }
        if let Some((k, v)) = vectors.iter().enumerate().find(|(_, v)| v.len() != n) {
            return Err(Error::Precondition(format!("w^{} has length {}, expected {n}", k + 1, v.len())));
        }
        if vectors.iter().flatten().any(|w| !w.is_finite()) {
            return Err(Error::Precondition("weights must be finite".into()));
        }
        Ok(WeightSchema { name: name.into(), vectors })
    }

    /// Same vector for every ballot count.
    pub fn uniform(name: impl Into<String>, w: Vec<f64>) -> Result<Self> {
        let n = w.len();
        Self::new(name, vec![w; n])
    }

    /// `w^k` is `k` ones followed by zeros.
    pub fn b3ct(n: usize) -> Self {
        let vectors = (1..=n).map(|k| (0..n).map(|p| if p < k { 1.0 } else { 0.0 }).collect()).collect();
        WeightSchema { name: "b3ct".into(), vectors }
    }

    /// `w^k = (n, n-1, ..., 1)` for every `k`.
    pub fn borda(n: usize) -> Self {
        let w: Vec<f64> = (0..n).map(|p| (n - p) as f64).collect();
        WeightSchema { name: "borda".into(), vectors: vec![w; n] }
    }

    pub fn n(&self) -> usize {
        self.vectors.len()
    }

    /// `w^k`, 1-based `k`.
    pub fn weights(&self, k: usize) -> &[f64] {
        &self.vectors[k - 1]
    }

    /// Total score of each member.
    pub fn scores(&self, ballots: &[&LinearOrder]) -> Result<Vec<f64>> {
        let n = self.n();
        let k = ballots.len();
        if k == 0 || k > n {
            return Err(Error::Precondition(format!("{k} ballots for a schema over {n} members")));
        }
        if let Some(b) = ballots.iter().find(|b| b.len() != n) {
            return Err(Error::GroundSetMismatch(n, b.len()));
        }
        let w = self.weights(k);
        let mut score = vec![0.0; n];
        for b in ballots {
            for (p, &m) in b.list().iter().enumerate() {
                score[m] += w[p];
            }
        }
        Ok(score)
    }
}

impl Aggregator for WeightSchema {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn aggregate(&self, n: usize, ballots: &[&LinearOrder]) -> Result<OrderedPartition> {
        if n != self.n() {
            return Err(Error::GroundSetMismatch(self.n(), n));
        }
        aggregate_weighted(self, ballots)
    }
}

/// Members by descending total score; equal scores share a block.
pub fn aggregate_weighted(w: &WeightSchema, ballots: &[&LinearOrder]) -> Result<OrderedPartition> {
    let score = w.scores(ballots)?;
    Ok(partition_by_score(&score))
}

pub(crate) fn partition_by_score(score: &[f64]) -> OrderedPartition {
    let mut ids: Vec<MemberId> = (0..score.len()).collect();
    ids.sort_by(|&a, &b| score[b].partial_cmp(&score[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    let mut blocks: Vec<SubsetMask> = Vec::new();
    let mut last: Option<f64> = None;
    for m in ids {
        if last == Some(score[m]) {
            let b = blocks.last_mut().expect("block open");
            *b = b.with(m);
        } else {
            blocks.push(SubsetMask::singleton(m));
            last = Some(score[m]);
        }
    }
    OrderedPartition::new(blocks, score.len()).expect("scores induce a partition")
}

/// `counts[u][v]` = number of ballots ranking `u` above `v`.
pub fn pair_counts(n: usize, ballots: &[&LinearOrder]) -> Vec<Vec<u32>> {
    let mut c = vec![vec![0u32; n]; n];
    for b in ballots {
        let l = b.list();
        for i in 0..n {
            for j in i + 1..n {
                c[l[i]][l[j]] += 1;
            }
        }
    }
    c
}

/// Edge `(i, j)` iff at least half of the ballots rank `i` above `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MajorityDigraph {
    out: Vec<u64>,
}

impl MajorityDigraph {
    pub fn new(n: usize, ballots: &[&LinearOrder]) -> Self {
        let c = pair_counts(n, ballots);
        let m = ballots.len() as u32;
        let out = (0..n)
            .map(|i| (0..n).filter(|&j| j != i && 2 * c[i][j] >= m).fold(0u64, |acc, j| acc | 1u64 << j))
            .collect();
        MajorityDigraph { out }
    }

    pub fn n(&self) -> usize {
        self.out.len()
    }

    #[inline]
    pub fn has_edge(&self, i: MemberId, j: MemberId) -> bool {
        self.out[i] >> j & 1 == 1
    }

    pub fn successors(&self, i: MemberId) -> SubsetMask {
        SubsetMask(self.out[i])
    }

    /// Strongly connected components (Tarjan), in discovery order.
    pub fn components(&self) -> Vec<SubsetMask> {
        Tarjan::run(self)
    }
}

struct Tarjan<'a> {
    g: &'a MajorityDigraph,
    index: Vec<usize>,
    low: Vec<usize>,
    on_stack: Vec<bool>,
    stack: Vec<usize>,
    next: usize,
    comps: Vec<SubsetMask>,
}

impl<'a> Tarjan<'a> {
    fn run(g: &'a MajorityDigraph) -> Vec<SubsetMask> {
        let n = g.n();
        let mut t = Tarjan {
            g,
            index: vec![usize::MAX; n],
            low: vec![0; n],
            on_stack: vec![false; n],
            stack: Vec::new(),
            next: 0,
            comps: Vec::new(),
        };
        for v in 0..n {
            if t.index[v] == usize::MAX {
                t.visit(v);
            }
        }
        t.comps
    }

    // Recursion depth is bounded by n <= 64.
    fn visit(&mut self, v: usize) {
        self.index[v] = self.next;
        self.low[v] = self.next;
        self.next += 1;
        self.stack.push(v);
        self.on_stack[v] = true;
        for w in self.g.successors(v).iter() {
            if self.index[w] == usize::MAX {
                self.visit(w);
                self.low[v] = self.low[v].min(self.low[w]);
            } else if self.on_stack[w] {
                self.low[v] = self.low[v].min(self.index[w]);
            }
        }
        if self.low[v] == self.index[v] {
            let mut comp = SubsetMask::EMPTY;
            loop {
                let w = self.stack.pop().expect("tarjan stack");
                self.on_stack[w] = false;
                comp = comp.with(w);
                if w == v {
                    break;
                }
            }
            self.comps.push(comp);
        }
    }
}

/// Harmonious aggregation: components of the majority digraph ordered along
/// the Hamiltonian path of the condensation. The condensation is an acyclic
/// tournament, so sorting by out-degree recovers that path.
pub fn aggregate_harmonious(n: usize, ballots: &[&LinearOrder]) -> Result<OrderedPartition> {
    if ballots.is_empty() {
        return Err(Error::Precondition("harmonious aggregation needs at least one ballot".into()));
    }
    if let Some(b) = ballots.iter().find(|b| b.len() != n) {
        return Err(Error::GroundSetMismatch(n, b.len()));
    }
    let g = MajorityDigraph::new(n, ballots);
    let comps = g.components();
    let reach: Vec<SubsetMask> =
        comps.iter().map(|c| c.iter().fold(SubsetMask::EMPTY, |acc, m| acc.union(g.successors(m)))).collect();
    let mut keyed: Vec<(usize, SubsetMask)> = comps
        .iter()
        .enumerate()
        .map(|(i, &c)| (comps.iter().filter(|&&d| d != c && !reach[i].is_disjoint(d)).count(), c))
        .collect();
    keyed.sort_by_key(|k| std::cmp::Reverse(k.0));
    OrderedPartition::new(keyed.into_iter().map(|(_, c)| c).collect(), n)
}

/// The harmonious aggregation function as an [`Aggregator`].
#[derive(Debug, Clone, Copy, Default)]
pub struct Harmonious;

impl Aggregator for Harmonious {
    fn name(&self) -> String {
        "harmonious".into()
    }

    fn aggregate(&self, n: usize, ballots: &[&LinearOrder]) -> Result<OrderedPartition> {
        aggregate_harmonious(n, ballots)
    }
}

/// True iff `F(Π_S)` ranks every member of `S` strictly above every outsider.
pub fn is_fixed_point(f: &dyn Aggregator, net: &PreferenceNetwork, s: SubsetMask) -> Result<bool> {
    net.check_subset(s)?;
    let agg = f.aggregate(net.n(), &net.ballots(s))?;
    Ok(agg.ranks_strictly_first(s))
}

/// Number of voters in `T` ranking `i` within their top `k`.
pub fn phi_votes(net: &PreferenceNetwork, t: SubsetMask, k: usize, i: MemberId) -> Result<usize> {
    net.check_member(i)?;
    t.check_fits(net.n())?;
    if k == 0 || k > net.n() {
        return Err(Error::Precondition(format!("k = {k} outside 1..={}", net.n())));
    }
    Ok(t.iter().filter(|&s| net.order(s).rank(i) <= k).count())
}

/// `phi_votes` for every member at once.
pub fn phi_all(net: &PreferenceNetwork, t: SubsetMask, k: usize) -> Vec<usize> {
    let mut v = vec![0usize; net.n()];
    for s in t.iter() {
        for &m in &net.order(s).list()[..k.min(net.n())] {
            v[m] += 1;
        }
    }
    v
}
