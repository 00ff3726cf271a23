//! Closed sets, ideals, and the order oracles built on them.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::algebra::{AlgebraError, ConflictGraph, GroupElement, Peeler, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrderError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("the set does not contain 1, so it is not an ideal")]
    NotAnIdeal,
    #[error("translation element {0} is not in the ideal")]
    TranslateOutside(String),
    #[error("cannot parse closed set {0:?}")]
    Parse(String),
}

/// A closed subset of `G_F` from the supported grammar.
///
/// Generator sets are bit masks (bit `i-1` for `g_i`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ClosedSet {
    /// `{1}`
    Unit,
    /// Products of pairwise commuting distinct positive generators from `K`.
    Stable(u64),
    /// Like `Stable`, with each generator taken with either sign.
    SignedStable(u64),
    Inverse(Box<ClosedSet>),
    /// `H_1 H_2 ... H_t`.
    Chain(Vec<ClosedSet>),
}

pub fn gen_mask(gens: impl IntoIterator<Item = usize>) -> u64 {
    gens.into_iter().fold(0, |m, g| m | 1 << (g - 1))
}

pub fn mask_gens(mask: u64) -> Vec<usize> {
    (0..64).filter(|i| mask & (1 << i) != 0).map(|i| i + 1).collect()
}

impl ClosedSet {
    pub fn stable(gens: impl IntoIterator<Item = usize>) -> Self {
        Self::Stable(gen_mask(gens))
    }

    pub fn signed_stable(gens: impl IntoIterator<Item = usize>) -> Self {
        Self::SignedStable(gen_mask(gens))
    }

    /// `H^{-1}`, collapsing double inverses and self-inverse sets.
    pub fn inverted(&self) -> Self {
        match self {
            Self::Unit | Self::SignedStable(_) => self.clone(),
            Self::Inverse(inner) => (**inner).clone(),
            other => Self::Inverse(Box::new(other.clone())),
        }
    }

    pub fn contains(&self, x: &GroupElement) -> bool {
        match self {
            Self::Unit => x.is_identity(),
            Self::Stable(k) => {
                x.word().iter().all(|s| !s.is_inverse()) && stable_word(x, *k)
            }
            Self::SignedStable(k) => stable_word(x, *k),
            Self::Inverse(inner) => inner.contains(&x.inverse()),
            Self::Chain(parts) => {
                let mut memo = HashMap::new();
                chain_contains(parts, x, &mut memo)
            }
        }
    }

    /// All members; every set in the grammar is finite.
    pub fn members(&self, graph: &Arc<ConflictGraph>) -> Vec<GroupElement> {
        let mut out = match self {
            Self::Unit => vec![GroupElement::identity(graph)],
            Self::Stable(k) => stable_subsets(graph, *k)
                .into_iter()
                .map(|s| {
                    let raw: Vec<Symbol> = mask_gens(s).into_iter().map(Symbol::pos).collect();
                    GroupElement::from_valid(graph, &raw)
                })
                .collect(),
            Self::SignedStable(k) => {
                let mut v = Vec::new();
                for s in stable_subsets(graph, *k) {
                    let gens = mask_gens(s);
                    for signs in 0u64..(1 << gens.len()) {
                        let raw: Vec<Symbol> = gens
                            .iter()
                            .enumerate()
                            .map(|(n, &g)| if signs & (1 << n) != 0 { Symbol::neg(g) } else { Symbol::pos(g) })
                            .collect();
                        v.push(GroupElement::from_valid(graph, &raw));
                    }
                }
                v
            }
            Self::Inverse(inner) => inner.members(graph).iter().map(GroupElement::inverse).collect(),
            Self::Chain(parts) => {
                let mut acc = vec![GroupElement::identity(graph)];
                for part in parts {
                    let ms = part.members(graph);
                    acc = acc.iter().flat_map(|a| ms.iter().map(move |m| a * m)).collect();
                    acc.sort();
                    acc.dedup();
                }
                acc
            }
        };
        out.sort();
        out.dedup();
        out
    }

    pub fn parse(text: &str) -> Result<Self, OrderError> {
        let t = text.trim();
        let err = || OrderError::Parse(text.to_string());
        if t == "unit" || t == "1" {
            return Ok(Self::Unit);
        }
        let (head, rest) = t.split_once('(').ok_or_else(err)?;
        let body = rest.strip_suffix(')').ok_or_else(err)?;
        let gens = |b: &str| -> Result<Vec<usize>, OrderError> {
            b.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<usize>().ok().filter(|&g| (1..=64).contains(&g)).ok_or_else(err))
                .collect()
        };
        match head.trim() {
            "stable" => Ok(Self::stable(gens(body)?)),
            "sstable" => Ok(Self::signed_stable(gens(body)?)),
            "inv" => Ok(Self::Inverse(Box::new(Self::parse(body)?))),
            "chain" => Ok(Self::Chain(split_top_level(body).into_iter().map(Self::parse).collect::<Result<_, _>>()?)),
            _ => Err(err()),
        }
    }

    /// Largest generator mentioned, for range checks against `k`.
    pub fn max_generator(&self) -> usize {
        match self {
            Self::Unit => 0,
            Self::Stable(k) | Self::SignedStable(k) => 64 - k.leading_zeros() as usize,
            Self::Inverse(inner) => inner.max_generator(),
            Self::Chain(parts) => parts.iter().map(Self::max_generator).max().unwrap_or(0),
        }
    }
}

fn split_top_level(body: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in body.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ';' if depth == 0 => {
                parts.push(&body[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&body[start..]);
    parts
}

fn stable_word(x: &GroupElement, k: u64) -> bool {
    let support = x.support();
    support & !k == 0 && support.count_ones() as usize == x.len() && x.graph().is_stable(support)
}

fn stable_subsets(graph: &ConflictGraph, k: u64) -> Vec<u64> {
    let gens = mask_gens(k & ((1u128 << graph.k()) - 1) as u64);
    let mut out = Vec::new();
    for pick in 0u64..(1 << gens.len()) {
        let mask = gens.iter().enumerate().filter(|(n, _)| pick & (1 << n) != 0).fold(0, |m, (_, &g)| m | 1 << (g - 1));
        if graph.is_stable(mask) {
            out.push(mask);
        }
    }
    out
}

fn chain_contains(parts: &[ClosedSet], x: &GroupElement, memo: &mut HashMap<(usize, GroupElement), bool>) -> bool {
    match parts {
        [] => x.is_identity(),
        [only] => only.contains(x),
        [first, rest @ ..] => {
            if let Some(&v) = memo.get(&(parts.len(), x.clone())) {
                return v;
            }
            let found = first
                .members(x.graph())
                .iter()
                .any(|h| chain_contains(rest, &(&h.inverse() * x), memo));
            memo.insert((parts.len(), x.clone()), found);
            found
        }
    }
}

impl fmt::Display for ClosedSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |m: u64| mask_gens(m).iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        match self {
            Self::Unit => f.write_str("unit"),
            Self::Stable(k) => write!(f, "stable({})", list(*k)),
            Self::SignedStable(k) => write!(f, "sstable({})", list(*k)),
            Self::Inverse(inner) => write!(f, "inv({inner})"),
            Self::Chain(parts) => {
                let parts: Vec<String> = parts.iter().map(ToString::to_string).collect();
                write!(f, "chain({})", parts.join(";"))
            }
        }
    }
}

/// Membership test for a downward-closed, join-closed set containing `1`.
pub trait IdealMembership {
    fn contains(&self, y: &GroupElement) -> bool;

    /// Whether `y s` is in the ideal, given the reduced word `y` of a member
    /// and that `y s` is reduced.
    fn extends(&self, graph: &Arc<ConflictGraph>, y: &[Symbol], s: Symbol) -> bool {
        let mut w = y.to_vec();
        w.push(s);
        self.contains(&GroupElement::from_valid(graph, &w))
    }
}

impl IdealMembership for ClosedSet {
    fn contains(&self, y: &GroupElement) -> bool {
        ClosedSet::contains(self, y)
    }

    fn extends(&self, graph: &Arc<ConflictGraph>, y: &[Symbol], s: Symbol) -> bool {
        let stable_step = |k: u64| {
            let support = y.iter().fold(0u64, |m, t| m | 1 << (t.generator() - 1));
            k & (1 << (s.generator() - 1)) != 0 && support & graph.dependents(s.generator()) == 0
        };
        match self {
            Self::Unit => false,
            Self::Stable(k) => !s.is_inverse() && y.iter().all(|t| !t.is_inverse()) && stable_step(*k),
            Self::SignedStable(k) => stable_step(*k),
            _ => {
                let mut w = y.to_vec();
                w.push(s);
                self.contains(&GroupElement::from_valid(graph, &w))
            }
        }
    }
}

/// `x^{-1} x↑ = { c : |xc| = |x| + |c| }`.
pub struct UpsetResidual<'a>(pub &'a GroupElement);

impl IdealMembership for UpsetResidual<'_> {
    fn contains(&self, y: &GroupElement) -> bool {
        self.0.product(y).reduction_free
    }

    fn extends(&self, graph: &Arc<ConflictGraph>, y: &[Symbol], s: Symbol) -> bool {
        !graph.cancels(self.0.word(), y, s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IdealOracle {
    Whole,
    Trivial,
    /// `x↓`
    Divisors(GroupElement),
    /// `x^{-1} x↑`
    UpsetResidual(GroupElement),
    Closed(ClosedSet),
    /// `a^{-1} I` for `a ∈ I`.
    Translate { by: GroupElement, of: Box<IdealOracle> },
}

impl IdealOracle {
    pub fn translate(by: GroupElement, of: IdealOracle) -> Result<Self, OrderError> {
        if !of.contains(&by) {
            return Err(OrderError::TranslateOutside(by.to_string()));
        }
        Ok(Self::Translate { by, of: Box::new(of) })
    }
}

impl IdealMembership for IdealOracle {
    fn contains(&self, y: &GroupElement) -> bool {
        match self {
            Self::Whole => true,
            Self::Trivial => y.is_identity(),
            Self::Divisors(x) => y.le(x),
            Self::UpsetResidual(x) => UpsetResidual(x).contains(y),
            Self::Closed(h) => h.contains(y),
            Self::Translate { by, of } => of.contains(&(by * y)),
        }
    }
}

/// Largest `y <= x` with `y ∈ I`, built greedily from minimal symbols.
pub fn max_divisor_in_ideal<I: IdealMembership + ?Sized>(x: &GroupElement, ideal: &I) -> Result<GroupElement, OrderError> {
    let one = GroupElement::identity(x.graph());
    if !ideal.contains(&one) {
        return Err(OrderError::NotAnIdeal);
    }
    Ok(max_divisor_raw(x, ideal))
}

pub(crate) fn max_divisor_raw<I: IdealMembership + ?Sized>(x: &GroupElement, ideal: &I) -> GroupElement {
    let graph = x.graph();
    let mut y = Vec::new();
    let mut rest = Peeler::new(graph, x.word());
    while let Some(s) = rest.minimal().into_iter().find(|&s| ideal.extends(graph, &y, s)) {
        y.push(s);
        rest.pop(s);
    }
    GroupElement::from_valid(graph, &y)
}

/// `min(z I)`.
pub fn min_coset<I: IdealMembership + ?Sized>(z: &GroupElement, ideal: &I) -> Result<GroupElement, OrderError> {
    Ok(z * &max_divisor_in_ideal(&z.inverse(), ideal)?)
}

pub(crate) fn min_coset_raw<I: IdealMembership + ?Sized>(z: &GroupElement, ideal: &I) -> GroupElement {
    z * &max_divisor_raw(&z.inverse(), ideal)
}

/// `min(y^{-1} x↑)`.
pub fn min_upset_translate(y: &GroupElement, x: &GroupElement) -> Result<GroupElement, OrderError> {
    check(y, x)?;
    Ok(min_upset_raw(y, x))
}

fn min_upset_raw(y: &GroupElement, x: &GroupElement) -> GroupElement {
    min_coset_raw(&(&y.inverse() * x), &UpsetResidual(x))
}

/// `μ_{a,H}(x) = min(a^{-1} x↑ H)`.
pub fn mu(a: &GroupElement, h: &ClosedSet, x: &GroupElement) -> Result<GroupElement, OrderError> {
    check(a, x)?;
    Ok(mu_raw(a, h, x))
}

pub(crate) fn mu_raw(a: &GroupElement, h: &ClosedSet, x: &GroupElement) -> GroupElement {
    min_coset_raw(&min_upset_raw(a, x), h)
}

/// `y ∈ x↑ H z↑^{-1}`, tested as `z <= ... ` via `μ_{yz,H}(x) ∈ z^{-1} z↑`.
pub fn member_sandwich(y: &GroupElement, x: &GroupElement, h: &ClosedSet, z: &GroupElement) -> Result<bool, OrderError> {
    check(y, x)?;
    check(y, z)?;
    Ok(sandwich_raw(y, x, h, z))
}

pub(crate) fn sandwich_raw(y: &GroupElement, x: &GroupElement, h: &ClosedSet, z: &GroupElement) -> bool {
    let m = mu_raw(&(y * z), h, x);
    UpsetResidual(z).contains(&m)
}

fn check(a: &GroupElement, b: &GroupElement) -> Result<(), OrderError> {
    if a.same_group(b) {
        Ok(())
    } else {
        Err(OrderError::Algebra(AlgebraError::MismatchedGraph))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g3() -> Arc<ConflictGraph> {
        Arc::new(ConflictGraph::parse("k=3; F={1-2}").unwrap())
    }

    fn el(g: &Arc<ConflictGraph>, s: &str) -> GroupElement {
        GroupElement::parse(g, s).unwrap()
    }

    #[test]
    fn closed_set_membership() {
        let g = g3();
        let h = ClosedSet::stable([1, 3]);
        assert!(h.contains(&el(&g, "g1 g3")));
        assert!(!h.contains(&el(&g, "g1 g2")));
        let s = ClosedSet::stable([1, 2]);
        assert!(!s.contains(&el(&g, "g1 g2")));
        assert!(ClosedSet::signed_stable([1, 3]).contains(&el(&g, "G1 g3")));
        assert!(!ClosedSet::stable([1, 3]).contains(&el(&g, "G1")));
        assert!(ClosedSet::stable([1]).inverted().contains(&el(&g, "G1")));
    }

    #[test]
    fn chain_membership() {
        let g = g3();
        let h = ClosedSet::Chain(vec![ClosedSet::stable([1]), ClosedSet::stable([2])]);
        assert!(h.contains(&el(&g, "g1 g2")));
        assert!(h.contains(&el(&g, "g2")));
        assert!(!h.contains(&el(&g, "g2 g1")));
        assert_eq!(h.members(&g).len(), 4);
    }

    #[test]
    fn parse_round_trip() {
        for text in ["unit", "stable(1,3)", "sstable(2)", "inv(stable(1))", "chain(stable(1);inv(stable(2)))"] {
            assert_eq!(ClosedSet::parse(text).unwrap().to_string(), text);
        }
        assert!(ClosedSet::parse("stable(1").is_err());
    }

    #[test]
    fn ideal_examples() {
        let g = g3();
        let x = el(&g, "g2 g3");
        assert_eq!(max_divisor_in_ideal(&x, &IdealOracle::Divisors(el(&g, "g1 g3"))).unwrap(), el(&g, "g3"));
        assert_eq!(max_divisor_in_ideal(&x, &IdealOracle::Whole).unwrap(), x);
        assert!(max_divisor_in_ideal(&el(&g, "g1"), &IdealOracle::Trivial).unwrap().is_identity());
        let d1 = IdealOracle::Divisors(el(&g, "g1"));
        assert!(min_coset(&el(&g, "1"), &d1).unwrap().is_identity());
        assert!(min_coset(&el(&g, "G1"), &d1).unwrap().is_identity());
        assert_eq!(min_coset(&el(&g, "g2"), &d1).unwrap(), el(&g, "g2"));
    }

    #[test]
    fn upset_translate_examples() {
        let g = g3();
        let x = el(&g, "g1 G2 g3");
        assert_eq!(min_upset_translate(&el(&g, "1"), &x).unwrap(), x);
        assert!(min_upset_translate(&x, &x).unwrap().is_identity());
        assert_eq!(min_upset_translate(&el(&g, "g2"), &el(&g, "g1")).unwrap(), el(&g, "G2 g1"));
    }

    #[test]
    fn mu_examples() {
        let g = g3();
        let one = el(&g, "1");
        let x = el(&g, "g1 g2");
        assert_eq!(mu(&one, &ClosedSet::Unit, &x).unwrap(), x);
        assert!(mu(&el(&g, "g1"), &ClosedSet::stable([1]), &one).unwrap().is_identity());
        assert_eq!(mu(&el(&g, "g2"), &ClosedSet::Unit, &el(&g, "g1")).unwrap(), el(&g, "G2 g1"));
    }

    #[test]
    fn sandwich_examples() {
        let g = g3();
        let g1 = el(&g, "g1");
        let one = el(&g, "1");
        assert!(member_sandwich(&one, &g1, &ClosedSet::Unit, &g1).unwrap());
        assert!(!member_sandwich(&el(&g, "g2"), &g1, &ClosedSet::Unit, &g1).unwrap());
        assert!(member_sandwich(&el(&g, "G1 g2 g3"), &one, &ClosedSet::Unit, &one).unwrap());
    }

    #[test]
    fn non_ideal_is_rejected() {
        let g = g3();
        let not_ideal = IdealOracle::Closed(ClosedSet::Chain(vec![]));
        assert!(not_ideal.contains(&el(&g, "1")));
        struct Empty;
        impl IdealMembership for Empty {
            fn contains(&self, _: &GroupElement) -> bool {
                false
            }
        }
        assert_eq!(max_divisor_in_ideal(&el(&g, "g1"), &Empty), Err(OrderError::NotAnIdeal));
        assert!(IdealOracle::translate(el(&g, "g2"), IdealOracle::Divisors(el(&g, "g1"))).is_err());
    }
}
