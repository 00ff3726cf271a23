//! Shared generators and brute-force references for the integration tests.
#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};
use std::sync::Arc;

use pdpaths::algebra::{ConflictGraph, GroupElement, Symbol};
use rand::Rng;

/// A conflict graph on `k` generators with each pair present with chance 1/2.
pub fn random_graph(rng: &mut impl Rng, k: usize) -> Arc<ConflictGraph> {
    let pairs: Vec<(usize, usize)> =
        (1..=k).flat_map(|i| (i + 1..=k).map(move |j| (i, j))).filter(|_| rng.random_bool(0.5)).collect();
    Arc::new(ConflictGraph::new(k, pairs).unwrap())
}

pub fn random_symbol(rng: &mut impl Rng, k: usize) -> Symbol {
    let g = rng.random_range(1..=k);
    if rng.random_bool(0.5) {
        Symbol::pos(g)
    } else {
        Symbol::neg(g)
    }
}

pub fn random_raw(rng: &mut impl Rng, k: usize, max_len: usize) -> Vec<Symbol> {
    let n = rng.random_range(0..=max_len);
    (0..n).map(|_| random_symbol(rng, k)).collect()
}

pub fn element(g: &Arc<ConflictGraph>, raw: &[Symbol]) -> GroupElement {
    GroupElement::normal_form(g, raw).unwrap()
}

/// A random element of length at most `max_len`.
pub fn random_element(rng: &mut impl Rng, g: &Arc<ConflictGraph>, max_len: usize) -> GroupElement {
    loop {
        let x = element(g, &random_raw(rng, g.k(), max_len + 2));
        if x.len() <= max_len {
            return x;
        }
    }
}

/// `a` and `b` commute as letters: distinct generators outside `F`.
pub fn independent(g: &ConflictGraph, a: Symbol, b: Symbol) -> bool {
    a.generator() != b.generator() && !g.conflicts(a.generator(), b.generator())
}

/// Every word reachable from `raw` by swapping adjacent independent letters
/// and, when `cancel` is set, deleting adjacent inverse pairs.
pub fn reachable(g: &ConflictGraph, raw: &[Symbol], cancel: bool) -> HashSet<Vec<Symbol>> {
    let mut seen = HashSet::from([raw.to_vec()]);
    let mut queue = VecDeque::from([raw.to_vec()]);
    while let Some(w) = queue.pop_front() {
        for i in 0..w.len().saturating_sub(1) {
            let (a, b) = (w[i], w[i + 1]);
            let mut next = Vec::new();
            if independent(g, a, b) {
                let mut v = w.clone();
                v.swap(i, i + 1);
                next.push(v);
            }
            if cancel && a == b.inverse() {
                let mut v = w.clone();
                v.drain(i..i + 2);
                next.push(v);
            }
            for v in next {
                if seen.insert(v.clone()) {
                    queue.push_back(v);
                }
            }
        }
    }
    seen
}

/// Shortest, then lexicographically least, word reachable from `raw`.
pub fn reachable_key(g: &ConflictGraph, raw: &[Symbol], cancel: bool) -> Vec<Symbol> {
    reachable(g, raw, cancel).into_iter().min_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b))).unwrap()
}

pub fn syms(text: &str) -> Vec<Symbol> {
    pdpaths::algebra::parse_symbols(text).unwrap()
}
