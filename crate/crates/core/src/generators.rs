//! Instance generators: hardness gadgets, padding, hero-and-sidekick,
//! random networks, and brute-force SAT oracles.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{MemberId, PreferenceNetwork};
use crate::subset::{SubsetMask, MAX_MEMBERS};
use crate::Ratio;

pub use crate::dimacs::{parse_dimacs, to_dimacs};

/// Largest variable count the brute-force oracles accept.
pub const ORACLE_CAP: usize = 24;

/// Seeded generator used throughout the crate.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes a master seed with a stream index (splitmix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A 3-CNF formula. Literals are DIMACS-style: `v` or `-v` for 1-based `v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SatInstance {
    pub vars: usize,
    pub clauses: Vec<[i32; 3]>,
}

impl SatInstance {
    pub fn new(vars: usize, clauses: Vec<[i32; 3]>) -> Result<Self> {
        let inst = SatInstance { vars, clauses };
        inst.check()?;
        Ok(inst)
    }

    pub fn check(&self) -> Result<()> {
        for (j, c) in self.clauses.iter().enumerate() {
            for &l in c {
                if l == 0 || l.unsigned_abs() as usize > self.vars {
                    return Err(Error::Precondition(format!("clause {}: literal {l} not over 1..={}", j + 1, self.vars)));
                }
            }
            if c[0] == c[1] || c[0] == c[2] || c[1] == c[2] {
                return Err(Error::Precondition(format!("clause {}: literals must be distinct", j + 1)));
            }
        }
        Ok(())
    }

    /// Literal value under an assignment bitmask (bit `v - 1` = variable `v`).
    #[inline]
    pub fn literal_true(lit: i32, assignment: u64) -> bool {
        let v = assignment >> (lit.unsigned_abs() - 1) & 1 == 1;
        if lit > 0 {
            v
        } else {
            !v
        }
    }
}

fn oracle_guard(inst: &SatInstance) -> Result<()> {
    inst.check()?;
    if inst.vars > ORACLE_CAP {
        return Err(Error::TooLarge { what: "brute-force SAT oracle", n: inst.vars, cap: ORACLE_CAP });
    }
    Ok(())
}

/// First satisfying assignment in ascending bitmask order.
pub fn sat_assignment(inst: &SatInstance) -> Result<Option<u64>> {
    oracle_guard(inst)?;
    Ok((0..1u64 << inst.vars)
        .find(|&a| inst.clauses.iter().all(|c| c.iter().any(|&l| SatInstance::literal_true(l, a)))))
}

pub fn brute_force_sat(inst: &SatInstance) -> Result<bool> {
    Ok(sat_assignment(inst)?.is_some())
}

/// First assignment making exactly one literal per clause true.
pub fn one_in_three_assignment(inst: &SatInstance) -> Result<Option<u64>> {
    oracle_guard(inst)?;
    Ok((0..1u64 << inst.vars).find(|&a| {
        inst.clauses.iter().all(|c| c.iter().filter(|&&l| SatInstance::literal_true(l, a)).count() == 1)
    }))
}

pub fn brute_force_1in3(inst: &SatInstance) -> Result<bool> {
    Ok(one_in_three_assignment(inst)?.is_some())
}

/// `m` clauses over `vars >= 3` variables; each clause has three distinct
/// variables with random signs.
pub fn random_3sat(vars: usize, m: usize, seed: u64) -> Result<SatInstance> {
    if vars < 3 {
        return Err(Error::Precondition("random 3-SAT needs at least 3 variables".into()));
    }
    let mut r = rng(seed);
    let pool: Vec<i32> = (1..=vars as i32).collect();
    let clauses = (0..m)
        .map(|_| {
            let pick: Vec<i32> = pool.choose_multiple(&mut r, 3).copied().collect();
            let mut c = [0i32; 3];
            for (slot, v) in c.iter_mut().zip(pick) {
                *slot = if r.gen_bool(0.5) { v } else { -v };
            }
            c
        })
        .collect();
    SatInstance::new(vars, clauses)
}

/// All eight sign patterns over variables 1..3 (unsatisfiable), plus
/// `extra` random clauses over `vars` variables.
pub fn unsat_3sat(vars: usize, extra: usize, seed: u64) -> Result<SatInstance> {
    let mut inst = random_3sat(vars.max(3), extra, seed)?;
    for signs in 0..8 {
        let c = [1, 2, 3].map(|v: i32| if signs >> (v - 1) & 1 == 1 { -v } else { v });
        inst.clauses.push(c);
    }
    Ok(inst)
}

/// Network plus the construction's distinguished subset.
#[derive(Debug, Clone, Serialize)]
pub struct GadgetOutput {
    pub network: PreferenceNetwork,
    pub s: SubsetMask,
    /// Named blocks of the construction (e.g. `A`, `B`, `D`, `X`).
    pub blocks: Vec<(String, SubsetMask)>,
    pub notes: Vec<String>,
}

impl GadgetOutput {
    pub fn block(&self, name: &str) -> Option<SubsetMask> {
        self.blocks.iter().find(|(n, _)| n == name).map(|b| b.1)
    }
}

/// Appends the members of each group, shuffled, to `out`.
fn push_shuffled(out: &mut Vec<MemberId>, set: SubsetMask, r: &mut ChaCha8Rng) {
    let mut v: Vec<_> = set.iter().collect();
    v.shuffle(r);
    out.extend(v);
}

fn chain(groups: &[SubsetMask], r: &mut ChaCha8Rng) -> Vec<MemberId> {
    let mut out = Vec::new();
    for &g in groups {
        push_shuffled(&mut out, g, r);
    }
    out
}

fn check_size(n: usize) -> Result<()> {
    if n > MAX_MEMBERS {
        return Err(Error::TooLarge { what: "generated network", n, cap: MAX_MEMBERS });
    }
    Ok(())
}

/// Self-approval gadget for a 3-SAT instance. `S = A ∪ B` is not
/// self-approving iff the formula is satisfiable. Orders inside each block,
/// and all outsider orders, are drawn from `seed`.
pub fn sat_to_network(inst: &SatInstance, seed: u64) -> Result<GadgetOutput> {
    inst.check()?;
    let (m, n) = (inst.clauses.len(), inst.vars);
    let total = 2 * m + 3 * n;
    check_size(total)?;
    if total == 0 {
        return Err(Error::Precondition("empty instance".into()));
    }
    let a = |j: usize| j;
    let b = |i: usize| m + i;
    let d0 = m + n;
    let x0 = 2 * m + n;
    let lit = |l: i32| x0 + 2 * (l.unsigned_abs() as usize - 1) + usize::from(l < 0);
    let range = |lo: usize, len: usize| SubsetMask::from_members(lo..lo + len);
    let (am, bm, dm, xm) = (range(0, m), range(m, n), range(d0, m), range(x0, 2 * n));

    let mut labels = vec![String::new(); total];
    for j in 0..m {
        labels[a(j)] = format!("a{}", j + 1);
        labels[d0 + j] = format!("d{}", j + 1);
    }
    for i in 0..n {
        labels[b(i)] = format!("b{}", i + 1);
        labels[x0 + 2 * i] = format!("x{}", i + 1);
        labels[x0 + 2 * i + 1] = format!("~x{}", i + 1);
    }

    let mut r = rng(seed);
    let mut lists = vec![Vec::new(); total];
    for i in 0..n {
        let pair = SubsetMask::from_members([x0 + 2 * i, x0 + 2 * i + 1]);
        lists[b(i)] = chain(
            &[dm, am, pair, SubsetMask::singleton(b(i)), xm.difference(pair), bm.without(b(i))],
            &mut r,
        );
    }
    for (j, c) in inst.clauses.iter().enumerate() {
        let cj: SubsetMask = c.iter().map(|&l| lit(l)).collect();
        lists[a(j)] = chain(
            &[cj, SubsetMask::singleton(a(j)), dm.union(xm).difference(cj), bm.union(am).without(a(j))],
            &mut r,
        );
    }
    for u in dm.union(xm).iter() {
        let mut l: Vec<_> = (0..total).collect();
        l.shuffle(&mut r);
        lists[u] = l;
    }
    let network = PreferenceNetwork::from_labeled_lists(labels, lists)?;
    Ok(GadgetOutput {
        network,
        s: am.union(bm),
        blocks: vec![("A".into(), am), ("B".into(), bm), ("D".into(), dm), ("X".into(), xm)],
        notes: vec![format!("{m} clauses, {n} variables, |V| = {total}")],
    })
}

/// Pads `(net, S)` with `p >= |S|` new members `S~`. With `S' = S ∪ S~`,
/// `S'` is always self-approving and is group stable iff `S` is
/// self-approving in `net`. New members are appended after the old ids and
/// map onto `S` cyclically.
pub fn pad_network(net: &PreferenceNetwork, s: SubsetMask, p: usize, seed: u64) -> Result<GadgetOutput> {
    net.check_subset(s)?;
    if p < s.len() {
        return Err(Error::Precondition(format!("pad size {p} is below |S| = {}", s.len())));
    }
    let n = net.n();
    let total = n + p;
    check_size(total)?;
    let tilde = SubsetMask::from_members(n..total);
    let s_prime = s.union(tilde);
    let rest = SubsetMask::full(total).difference(s_prime);
    let members: Vec<MemberId> = s.iter().collect();
    let g = |t: usize| members[(t - n) % members.len()];

    let mut labels: Vec<String> = net.labels().to_vec();
    for t in 0..p {
        let mut l = format!("~{}", t + 1);
        while labels.contains(&l) {
            l.insert(0, '~');
        }
        labels.push(l);
    }
    let mut r = rng(seed);
    let mut lists = vec![Vec::new(); total];
    for (u, slot) in lists.iter_mut().enumerate().take(n) {
        *slot = if s.contains(u) {
            chain(&[s_prime, rest], &mut r)
        } else {
            let mut l: Vec<_> = (0..total).collect();
            l.shuffle(&mut r);
            l
        };
    }
    for (t, slot) in lists.iter_mut().enumerate().skip(n) {
        push_shuffled(slot, tilde, &mut r);
        slot.extend_from_slice(net.order(g(t)).list());
    }
    Ok(GadgetOutput {
        network: PreferenceNetwork::from_labeled_lists(labels, lists)?,
        s: s_prime,
        blocks: vec![("S".into(), s), ("S~".into(), tilde)],
        notes: vec![format!("padded by {p}")],
    })
}

/// `d` hero-sidekick duos. Heroes have ids `0..d`, sidekick `i` has id
/// `d + i`. Each member of duo `i` ranks hero `i`, sidekick `i`, the other
/// heroes, then the other sidekicks (index order).
pub fn hero_sidekick(d: usize) -> Result<PreferenceNetwork> {
    if d == 0 {
        return Err(Error::Precondition("need at least one duo".into()));
    }
    check_size(2 * d)?;
    let labels = (1..=d).map(|i| format!("h{i}")).chain((1..=d).map(|i| format!("s{i}"))).collect();
    let mut lists = vec![Vec::new(); 2 * d];
    for i in 0..d {
        let mut l = vec![i, d + i];
        l.extend((0..d).filter(|&h| h != i));
        l.extend((0..d).filter(|&h| h != i).map(|h| d + h));
        lists[i] = l.clone();
        lists[d + i] = l;
    }
    PreferenceNetwork::from_labeled_lists(labels, lists)
}

/// Greedy colouring of the clause conflict graph (clauses sharing a
/// variable conflict). Returns the classes as clause indices.
pub fn partition_clauses(inst: &SatInstance) -> Vec<Vec<usize>> {
    let vars = |c: &[i32; 3]| c.iter().fold(0u64, |acc, &l| acc | 1u64 << (l.unsigned_abs() - 1));
    let mut classes: Vec<(u64, Vec<usize>)> = Vec::new();
    for (j, c) in inst.clauses.iter().enumerate() {
        let vc = vars(c);
        match classes.iter_mut().find(|(used, _)| used & vc == 0) {
            Some((used, members)) => {
                *used |= vc;
                members.push(j);
            }
            None => classes.push((vc, vec![j])),
        }
    }
    classes.into_iter().map(|c| c.1).collect()
}

/// 1-in-3 SAT gadget for λ-harmonious group stability. `S = Y ∪ T` is
/// λ-harmonious and self-approving; it fails group stability (only via
/// `G = Y`) iff the formula has a 1-in-3 assignment.
pub fn cubic_1in3_gadget(inst: &SatInstance, lambda: Ratio, seed: u64) -> Result<GadgetOutput> {
    inst.check()?;
    crate::ratio::check_unit(lambda, "lambda")?;
    for (j, c) in inst.clauses.iter().enumerate() {
        let v = c.map(|l| l.unsigned_abs());
        if v[0] == v[1] || v[0] == v[2] || v[1] == v[2] {
            return Err(Error::Precondition(format!("clause {} repeats a variable", j + 1)));
        }
    }
    let classes = partition_clauses(inst);
    let k = classes.len();
    let n = inst.vars;
    let t_len = 2 * k + 2;
    let s_len = n + t_len;
    let total = s_len + 2 * n;
    check_size(total)?;
    if (Ratio::from_integer(1) - lambda) * Ratio::from_integer(s_len as i64) < Ratio::from_integer(t_len as i64) {
        return Err(Error::Precondition(format!("(1 - lambda)|S| must be at least 2k + 2 = {t_len}")));
    }
    let y = |i: usize| i;
    let t0 = n;
    let x0 = s_len;
    let lit = |l: i32| x0 + 2 * (l.unsigned_abs() as usize - 1) + usize::from(l < 0);
    let ym = SubsetMask::from_members(0..n);
    let tm = SubsetMask::from_members(t0..t0 + t_len);
    let xm = SubsetMask::from_members(x0..total);

    let mut labels = vec![String::new(); total];
    for i in 0..n {
        labels[y(i)] = format!("y{}", i + 1);
        labels[x0 + 2 * i] = format!("x{}", i + 1);
        labels[x0 + 2 * i + 1] = format!("~x{}", i + 1);
    }
    for t in 0..t_len {
        labels[t0 + t] = format!("t{}", t + 1);
    }

    let mut r = rng(seed);
    let mut lists = vec![Vec::new(); total];
    for i in 0..n {
        lists[y(i)] = chain(&[tm, ym, xm], &mut r);
    }
    // Tails over Y ∪ X for the T members.
    let mut tails: Vec<Vec<MemberId>> = Vec::with_capacity(t_len);
    let forward: Vec<MemberId> = (0..n).flat_map(|i| [x0 + 2 * i, x0 + 2 * i + 1, y(i)]).collect();
    let backward: Vec<MemberId> = (0..n).rev().flat_map(|i| [x0 + 2 * i, x0 + 2 * i + 1, y(i)]).collect();
    tails.push(forward);
    tails.push(backward);
    for class in &classes {
        let l = class.len();
        let groups: Vec<Vec<MemberId>> = class
            .iter()
            .enumerate()
            .map(|(j, &c)| {
                let mut g: Vec<_> = inst.clauses[c].iter().map(|&z| lit(z)).collect();
                g.push(y(j));
                g
            })
            .collect();
        let used: SubsetMask = groups.iter().flatten().copied().collect();
        let mut q = Vec::new();
        push_shuffled(&mut q, xm.difference(used), &mut r);
        q.extend(l..n);
        let mut up: Vec<MemberId> = groups.iter().flatten().copied().collect();
        up.extend(&q);
        let mut down = q;
        down.extend(groups.iter().rev().flatten());
        tails.push(up);
        tails.push(down);
    }
    for (t, tail) in tails.into_iter().enumerate() {
        let mut l = Vec::with_capacity(total);
        push_shuffled(&mut l, tm, &mut r);
        l.extend(tail);
        lists[t0 + t] = l;
    }
    for u in xm.iter() {
        let mut l: Vec<_> = (0..total).collect();
        l.shuffle(&mut r);
        lists[u] = l;
    }
    Ok(GadgetOutput {
        network: PreferenceNetwork::from_labeled_lists(labels, lists)?,
        s: ym.union(tm),
        blocks: vec![("Y".into(), ym), ("T".into(), tm), ("X".into(), xm)],
        notes: vec![format!("{k} clause classes, |S| = {s_len}, |V| = {total}")],
    })
}

/// Every member's order an independent uniform permutation.
pub fn random_network(n: usize, seed: u64) -> PreferenceNetwork {
    let mut r = rng(seed);
    random_network_with(n, &mut r)
}

pub fn random_network_with<R: Rng + ?Sized>(n: usize, r: &mut R) -> PreferenceNetwork {
    assert!((1..=MAX_MEMBERS).contains(&n), "network size {n} outside 1..={MAX_MEMBERS}");
    let lists = (0..n)
        .map(|_| {
            let mut l: Vec<_> = (0..n).collect();
            l.shuffle(r);
            l
        })
        .collect();
    PreferenceNetwork::from_lists(lists).expect("permutations are valid")
}

/// Random network with a planted subset `S` of size `k` (ids `0..k`): each
/// member of `S` independently, with probability `loyalty`, ranks `S`
/// first (shuffled) and the rest after; otherwise its order is uniform.
pub fn planted_network<R: Rng + ?Sized>(n: usize, k: usize, loyalty: f64, r: &mut R) -> (PreferenceNetwork, SubsetMask) {
    assert!(k >= 1 && k <= n);
    let s = SubsetMask::from_members(0..k);
    let mut lists = Vec::with_capacity(n);
    for m in 0..n {
        if m < k && r.gen_bool(loyalty) {
            let mut head: Vec<_> = (0..k).collect();
            let mut tail: Vec<_> = (k..n).collect();
            head.shuffle(r);
            tail.shuffle(r);
            head.extend(tail);
            lists.push(head);
        } else {
            let mut l: Vec<_> = (0..n).collect();
            l.shuffle(r);
            lists.push(l);
        }
    }
    (PreferenceNetwork::from_lists(lists).expect("permutations are valid"), s)
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        // next_permutation
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else { break };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).expect("successor exists");
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

/// Every network on `n` members, `(n!)^n` in total. Intended for `n <= 3`.
pub fn all_networks(n: usize) -> impl Iterator<Item = PreferenceNetwork> {
    let perms = permutations(n);
    let f = perms.len();
    let count = f.pow(n as u32);
    (0..count).map(move |mut idx| {
        let mut lists = Vec::with_capacity(n);
        for _ in 0..n {
            lists.push(perms[idx % f].clone());
            idx /= f;
        }
        PreferenceNetwork::from_lists(lists).expect("permutations are valid")
    })
}
