//! Fixtures shared by the benchmarks.

use prefcomm_core::generators::{random_network, sat_to_network, unsat_3sat};
use prefcomm_core::{LinearOrder, PreferenceNetwork, SubsetMask};

/// Random network on `n` members where `S = {0..k}` is in Clique(g): each
/// member of `S` moves `S` and the first `g` outsiders of its random order
/// to the front, keeping their relative order.
pub fn clique_g_fixture(n: usize, k: usize, g: usize, seed: u64) -> (PreferenceNetwork, SubsetMask) {
    let s = SubsetMask::from_members(0..k);
    let base = random_network(n, seed);
    let orders = (0..n)
        .map(|m| {
            let list = base.order(m).list();
            if !s.contains(m) {
                return base.order(m).clone();
            }
            let window: Vec<usize> = list.iter().copied().filter(|v| !s.contains(*v)).take(g).collect();
            let front = |v: &usize| s.contains(*v) || window.contains(v);
            let mut out: Vec<usize> = list.iter().copied().filter(front).collect();
            out.extend(list.iter().copied().filter(|v| !front(v)));
            LinearOrder::new(out).expect("permutation")
        })
        .collect();
    (base.with_orders(orders).expect("same ground set"), s)
}

/// Self-approval gadget of an unsatisfiable instance, so searches run to
/// completion.
pub fn unsat_gadget(seed: u64) -> (PreferenceNetwork, SubsetMask) {
    let inst = unsat_3sat(3, 0, seed).expect("valid instance");
    let g = sat_to_network(&inst, seed).expect("valid gadget");
    (g.network, g.s)
}
