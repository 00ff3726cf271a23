//! Exact arithmetic in the graph group `G_F`.
//!
//! The group is generated by `g_1 .. g_k` with `g_i g_j = g_j g_i` for every
//! pair `{i, j}` that is *not* an edge of the conflict graph `([k], F)`.
//! Elements are stored as canonical words: fully reduced, then the
//! lexicographically least ordering among all commutation-equivalent words,
//! with symbols ordered by `(generator, sign)` and `+1 < -1`.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::Mul;
use std::sync::Arc;

use thiserror::Error;

/// Largest supported number of generators (dependency sets are `u64` masks).
pub const MAX_GENERATORS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("generator g{gen} is out of range 1..={k}")]
    GeneratorOutOfRange { gen: usize, k: usize },
    #[error("invalid conflict pair {{{0},{1}}}")]
    InvalidPair(usize, usize),
    #[error("{0} generators requested; at most {MAX_GENERATORS} are supported")]
    TooManyGenerators(usize),
    #[error("elements belong to different graph groups")]
    MismatchedGraph,
    #[error("cannot parse {what}: {input:?}")]
    Parse { what: &'static str, input: String },
}

/// The undirected graph `([k], F)` whose edges mark the *non*-commuting
/// generator pairs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConflictGraph {
    k: usize,
    pairs: Vec<(usize, usize)>,
    // dep[i] has bit j set iff g_{i+1} and g_{j+1} do not commute (i == j included)
    dep: Vec<u64>,
}

impl ConflictGraph {
    pub fn new(k: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, AlgebraError> {
        if k > MAX_GENERATORS {
            return Err(AlgebraError::TooManyGenerators(k));
        }
        let mut norm = BTreeSet::new();
        for (a, b) in pairs {
            if a == b || a == 0 || b == 0 || a > k || b > k {
                return Err(AlgebraError::InvalidPair(a, b));
            }
            norm.insert((a.min(b), a.max(b)));
        }
        let mut dep: Vec<u64> = (0..k).map(|i| 1u64 << i).collect();
        for &(a, b) in &norm {
            dep[a - 1] |= 1 << (b - 1);
            dep[b - 1] |= 1 << (a - 1);
        }
        Ok(Self { k, pairs: norm.into_iter().collect(), dep })
    }

    /// Parses `k=3; F={1-2,2-3}`.
    pub fn parse(text: &str) -> Result<Self, AlgebraError> {
        let err = || AlgebraError::Parse { what: "conflict graph", input: text.to_string() };
        let mut k = None;
        let mut pairs = Vec::new();
        for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part.split_once('=').ok_or_else(err)?;
            match key.trim() {
                "k" => k = Some(value.trim().parse::<usize>().map_err(|_| err())?),
                "F" => {
                    let inner = value.trim().strip_prefix('{').and_then(|v| v.strip_suffix('}')).ok_or_else(err)?;
                    for pair in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                        let (a, b) = pair.split_once('-').ok_or_else(err)?;
                        let a = a.trim().parse().map_err(|_| err())?;
                        let b = b.trim().parse().map_err(|_| err())?;
                        pairs.push((a, b));
                    }
                }
                _ => return Err(err()),
            }
        }
        Self::new(k.ok_or_else(err)?, pairs)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// True iff `{i, j}` is a conflict pair (1-based).
    pub fn conflicts(&self, i: usize, j: usize) -> bool {
        i != j && self.dep[i - 1] & (1 << (j - 1)) != 0
    }

    /// True iff the generator set (bit `i-1` for `g_i`) contains no conflict pair.
    pub fn is_stable(&self, mask: u64) -> bool {
        let mut rest = mask;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if self.dep[i] & mask & !(1 << i) != 0 {
                return false;
            }
        }
        true
    }

    /// Generators not commuting with `g_gen`, itself included, as a bit mask.
    pub fn dependents(&self, gen: usize) -> u64 {
        self.dep[gen - 1]
    }

    pub fn independent(&self, a: Symbol, b: Symbol) -> bool {
        self.dep[a.index()] & b.bit() == 0
    }

    fn dep_mask(&self, s: Symbol) -> u64 {
        self.dep[s.index()]
    }

    fn check(&self, s: Symbol) -> Result<(), AlgebraError> {
        if s.gen == 0 || s.gen as usize > self.k {
            Err(AlgebraError::GeneratorOutOfRange { gen: s.gen as usize, k: self.k })
        } else {
            Ok(())
        }
    }

    /// Appends `s` to a reduced word, cancelling against the last occurrence
    /// of `s^{-1}` if everything after it commutes with `s`.
    fn push_reduced(&self, word: &mut Vec<Symbol>, s: Symbol) {
        let mask = self.dep_mask(s);
        for p in (0..word.len()).rev() {
            let t = word[p];
            if t.bit() & mask != 0 {
                if t == s.inverse() {
                    word.remove(p);
                    return;
                }
                break;
            }
        }
        word.push(s);
    }

    /// Lexicographically least commutation-equivalent word.
    ///
    /// An occurrence can be emitted next iff it heads its generator's queue
    /// and every conflicting generator's queue head comes later.
    fn canonical(&self, word: Vec<Symbol>) -> Vec<Symbol> {
        if word.len() < 2 {
            return word;
        }
        let mut queues: Vec<Vec<usize>> = vec![Vec::new(); self.k];
        for (p, s) in word.iter().enumerate() {
            queues[s.index()].push(p);
        }
        let mut heads = vec![0usize; self.k];
        let mut live: u64 = word.iter().fold(0, |m, s| m | s.bit());
        let mut out = Vec::with_capacity(word.len());
        while live != 0 {
            let mut best: Option<(Symbol, usize)> = None;
            let mut rest = live;
            while rest != 0 {
                let g = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let p = queues[g][heads[g]];
                let mut others = self.dep[g] & live & !(1 << g);
                let mut minimal = true;
                while others != 0 {
                    let h = others.trailing_zeros() as usize;
                    others &= others - 1;
                    if queues[h][heads[h]] < p {
                        minimal = false;
                        break;
                    }
                }
                if minimal && best.is_none_or(|(b, _)| word[p] < b) {
                    best = Some((word[p], g));
                }
            }
            let (s, g) = best.expect("nonempty word has a minimal occurrence");
            out.push(s);
            heads[g] += 1;
            if heads[g] == queues[g].len() {
                live &= !(1 << g);
            }
        }
        out
    }

    fn reduce(&self, raw: &[Symbol]) -> Vec<Symbol> {
        let mut word = Vec::with_capacity(raw.len());
        for &s in raw {
            self.push_reduced(&mut word, s);
        }
        word
    }

    /// True iff appending `s` to the reduced word `prefix ++ word` cancels.
    pub(crate) fn cancels(&self, prefix: &[Symbol], word: &[Symbol], s: Symbol) -> bool {
        let mask = self.dep_mask(s);
        match word.iter().rev().chain(prefix.iter().rev()).find(|t| t.bit() & mask != 0) {
            Some(&t) => t == s.inverse(),
            None => false,
        }
    }

    /// Symbols that can be commuted to the front of a reduced word.
    pub(crate) fn minimal_of(&self, word: &[Symbol]) -> Vec<Symbol> {
        let mut seen = 0u64;
        let mut out = Vec::new();
        for &s in word {
            if seen & self.dep_mask(s) == 0 {
                out.push(s);
            }
            seen |= s.bit();
        }
        out.sort();
        out
    }
}

impl fmt::Display for ConflictGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k={}; F={{", self.k)?;
        for (n, (a, b)) in self.pairs.iter().enumerate() {
            if n > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}-{b}")?;
        }
        f.write_str("}")
    }
}

/// `g_i` or `g_i^{-1}`. Ordered by generator, then `+1 < -1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol {
    gen: u16,
    inv: bool,
}

impl Symbol {
    pub fn pos(gen: usize) -> Self {
        Self { gen: gen as u16, inv: false }
    }

    pub fn neg(gen: usize) -> Self {
        Self { gen: gen as u16, inv: true }
    }

    pub fn new(gen: usize, sign: i8) -> Self {
        Self { gen: gen as u16, inv: sign < 0 }
    }

    pub fn generator(self) -> usize {
        self.gen as usize
    }

    pub fn sign(self) -> i8 {
        if self.inv {
            -1
        } else {
            1
        }
    }

    pub fn is_inverse(self) -> bool {
        self.inv
    }

    pub fn inverse(self) -> Self {
        Self { gen: self.gen, inv: !self.inv }
    }

    fn index(self) -> usize {
        self.gen as usize - 1
    }

    fn bit(self) -> u64 {
        1 << (self.gen - 1)
    }

    /// Parses `g3` (positive) or `G3` (inverse).
    pub fn parse(token: &str) -> Result<Self, AlgebraError> {
        let err = || AlgebraError::Parse { what: "symbol", input: token.to_string() };
        let (inv, digits) = if let Some(d) = token.strip_prefix('g') {
            (false, d)
        } else if let Some(d) = token.strip_prefix('G') {
            (true, d)
        } else {
            return Err(err());
        };
        let gen: u16 = digits.parse().map_err(|_| err())?;
        Ok(Self { gen, inv })
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letter = if self.inv { 'G' } else { 'g' };
        write!(f, "{letter}{}", self.gen)
    }
}

/// Parses a whitespace-separated raw word; `1` and the empty string denote
/// the empty word.
pub fn parse_symbols(text: &str) -> Result<Vec<Symbol>, AlgebraError> {
    let text = text.trim();
    if text.is_empty() || text == "1" {
        return Ok(Vec::new());
    }
    text.split_whitespace().map(Symbol::parse).collect()
}

/// An element of `G_F`, held as its canonical word.
#[derive(Clone)]
pub struct GroupElement {
    graph: Arc<ConflictGraph>,
    word: Vec<Symbol>,
}

/// Result of `x * y` together with whether the concatenation was reduced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Product {
    pub value: GroupElement,
    pub reduction_free: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum JoinResult {
    Finite(GroupElement),
    Infinity,
}

impl JoinResult {
    pub fn finite(self) -> Option<GroupElement> {
        match self {
            Self::Finite(x) => Some(x),
            Self::Infinity => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Self::Infinity)
    }
}

impl GroupElement {
    pub fn identity(graph: &Arc<ConflictGraph>) -> Self {
        Self { graph: Arc::clone(graph), word: Vec::new() }
    }

    pub fn generator(graph: &Arc<ConflictGraph>, s: Symbol) -> Result<Self, AlgebraError> {
        graph.check(s)?;
        Ok(Self { graph: Arc::clone(graph), word: vec![s] })
    }

    /// Canonical reduced representative of a raw word.
    pub fn normal_form(graph: &Arc<ConflictGraph>, raw: &[Symbol]) -> Result<Self, AlgebraError> {
        for &s in raw {
            graph.check(s)?;
        }
        Ok(Self::from_valid(graph, raw))
    }

    pub fn parse(graph: &Arc<ConflictGraph>, text: &str) -> Result<Self, AlgebraError> {
        Self::normal_form(graph, &parse_symbols(text)?)
    }

    pub(crate) fn from_valid(graph: &Arc<ConflictGraph>, raw: &[Symbol]) -> Self {
        let word = graph.canonical(graph.reduce(raw));
        Self { graph: Arc::clone(graph), word }
    }

    fn with_word(&self, word: Vec<Symbol>) -> Self {
        Self { graph: Arc::clone(&self.graph), word }
    }

    pub fn graph(&self) -> &Arc<ConflictGraph> {
        &self.graph
    }

    pub fn word(&self) -> &[Symbol] {
        &self.word
    }

    /// `|x|`, the size of any reduced representative.
    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_identity(&self) -> bool {
        self.word.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn inverse(&self) -> Self {
        let rev = self.word.iter().rev().map(|s| s.inverse()).collect();
        self.with_word(self.graph.canonical(rev))
    }

    pub fn same_group(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.graph, &other.graph) || self.graph == other.graph
    }

    fn check_same(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.same_group(other) {
            Ok(())
        } else {
            Err(AlgebraError::MismatchedGraph)
        }
    }

    pub fn multiply(&self, other: &Self) -> Result<Product, AlgebraError> {
        self.check_same(other)?;
        Ok(self.product(other))
    }

    pub(crate) fn product(&self, other: &Self) -> Product {
        let mut word = self.word.clone();
        for &s in &other.word {
            self.graph.push_reduced(&mut word, s);
        }
        let reduction_free = word.len() == self.len() + other.len();
        Product { value: self.with_word(self.graph.canonical(word)), reduction_free }
    }

    /// Left divisibility: `x <= y` iff `|y| = |x| + |x^{-1} y|`.
    pub fn leq(&self, other: &Self) -> Result<bool, AlgebraError> {
        self.check_same(other)?;
        Ok(self.le(other))
    }

    pub(crate) fn le(&self, other: &Self) -> bool {
        if self.len() > other.len() {
            return false;
        }
        if self.is_identity() {
            return true;
        }
        (&self.inverse() * other).len() + self.len() == other.len()
    }

    pub fn meet(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_same(other)?;
        Ok(self.meet_of(other))
    }

    /// Greedy meet: repeatedly strip the least common minimal symbol.
    pub(crate) fn meet_of(&self, other: &Self) -> Self {
        let g = &*self.graph;
        let mut a = Peeler::new(g, &self.word);
        let mut b = Peeler::new(g, &other.word);
        let mut out = Vec::new();
        loop {
            let mb = b.minimal();
            let Some(s) = a.minimal().into_iter().find(|s| mb.contains(s)) else {
                break;
            };
            out.push(s);
            a.pop(s);
            b.pop(s);
        }
        self.with_word(g.canonical(out))
    }

    pub fn join(&self, other: &Self) -> Result<JoinResult, AlgebraError> {
        self.check_same(other)?;
        Ok(self.join_of(other))
    }

    /// `x v y = (x ^ y) . x' . y'` when the residuals are independent.
    pub(crate) fn join_of(&self, other: &Self) -> JoinResult {
        if self.is_identity() {
            return JoinResult::Finite(other.clone());
        }
        if other.le(self) {
            return JoinResult::Finite(self.clone());
        }
        if self.le(other) {
            return JoinResult::Finite(other.clone());
        }
        let m = self.meet_of(other);
        let mi = m.inverse();
        let xr = &mi * self;
        let yr = &mi * other;
        let g = &*self.graph;
        let independent = xr.word.iter().all(|&a| yr.word.iter().all(|&b| g.independent(a, b)));
        if !independent {
            return JoinResult::Infinity;
        }
        let mut raw = m.word;
        raw.extend_from_slice(&xr.word);
        raw.extend_from_slice(&yr.word);
        JoinResult::Finite(self.with_word(g.canonical(raw)))
    }

    /// Symbols `a` with `a <= x`, sorted.
    pub fn minimal_symbols(&self) -> Vec<Symbol> {
        self.graph.minimal_of(&self.word)
    }

    /// Symbols `a` with `x a^{-1} <= x`, sorted.
    pub fn maximal_symbols(&self) -> Vec<Symbol> {
        let mut seen = 0u64;
        let mut out = Vec::new();
        for &s in self.word.iter().rev() {
            if seen & self.graph.dep_mask(s) == 0 {
                out.push(s);
            }
            seen |= s.bit();
        }
        out.sort();
        out
    }

    /// For each symbol occurring in `x`, the largest peak below `x` whose only
    /// maximal symbol is that symbol.
    pub fn peaks(&self) -> BTreeSet<GroupElement> {
        let g = &*self.graph;
        let mut seen_syms = BTreeSet::new();
        let mut out = BTreeSet::new();
        for p in (0..self.word.len()).rev() {
            if !seen_syms.insert(self.word[p]) {
                continue;
            }
            let mut included = vec![false; p + 1];
            included[p] = true;
            let mut gens = self.word[p].bit();
            for q in (0..p).rev() {
                if g.dep_mask(self.word[q]) & gens != 0 {
                    included[q] = true;
                    gens |= self.word[q].bit();
                }
            }
            let sub = (0..=p).filter(|&q| included[q]).map(|q| self.word[q]).collect();
            out.insert(self.with_word(g.canonical(sub)));
        }
        out
    }

    /// Number of occurrences of exactly `s` (sign-sensitive).
    pub fn occ_count(&self, s: Symbol) -> usize {
        self.word.iter().filter(|&&t| t == s).count()
    }

    /// Generators occurring in `x`, as a bit mask (bit `i-1` for `g_i`).
    pub fn support(&self) -> u64 {
        self.word.iter().fold(0, |m, s| m | s.bit())
    }

    /// `(connected, cyclically_reduced)`.
    pub fn classify(&self) -> (bool, bool) {
        let support = self.support();
        let connected = support == 0 || {
            let start = support.trailing_zeros() as usize;
            let mut reached = 1u64 << start;
            let mut frontier = reached;
            while frontier != 0 {
                let i = frontier.trailing_zeros() as usize;
                frontier &= frontier - 1;
                let next = self.graph.dep[i] & support & !reached;
                reached |= next;
                frontier |= next;
            }
            reached == support
        };
        let cyclically_reduced = self.meet_of(&self.inverse()).is_identity();
        (connected, cyclically_reduced)
    }

    /// A cyclically reduced conjugate, obtained by stripping a minimal symbol
    /// together with its inverse at the end while possible.
    pub fn cyclic_core(&self) -> Self {
        let mut x = self.clone();
        loop {
            let m = x.meet_of(&x.inverse());
            let Some(&a) = m.word.first() else { return x };
            let s = self.with_word(vec![a]);
            x = &(&s.inverse() * &x) * &s;
        }
    }

    /// True iff every symbol of `self` is independent of every symbol of `other`.
    pub fn independent_of(&self, other: &Self) -> bool {
        self.word.iter().all(|&a| other.word.iter().all(|&b| self.graph.independent(a, b)))
    }

    /// `x^n` for `n >= 0`.
    pub fn pow(&self, n: usize) -> Self {
        (0..n).fold(Self::identity(&self.graph), |acc, _| &acc * self)
    }
}

/// Removing the first occurrence of a minimal symbol keeps a word reduced.
/// A reduced word consumed from the front one minimal symbol at a time,
/// with per-generator occurrence queues so each step costs `O(k^2)`.
pub(crate) struct Peeler<'a> {
    graph: &'a ConflictGraph,
    word: &'a [Symbol],
    queues: Vec<Vec<usize>>,
    heads: Vec<usize>,
    live: u64,
}

impl<'a> Peeler<'a> {
    pub(crate) fn new(graph: &'a ConflictGraph, word: &'a [Symbol]) -> Self {
        let mut queues = vec![Vec::new(); graph.k];
        for (p, s) in word.iter().enumerate() {
            queues[s.index()].push(p);
        }
        let live = word.iter().fold(0, |m, s| m | s.bit());
        Self { graph, word, queues, heads: vec![0; graph.k], live }
    }

    /// Minimal symbols of the remaining word, sorted.
    pub(crate) fn minimal(&self) -> Vec<Symbol> {
        let mut out = Vec::new();
        let mut rest = self.live;
        while rest != 0 {
            let g = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let p = self.queues[g][self.heads[g]];
            let mut others = self.graph.dep[g] & self.live & !(1 << g);
            let mut minimal = true;
            while others != 0 {
                let h = others.trailing_zeros() as usize;
                others &= others - 1;
                if self.queues[h][self.heads[h]] < p {
                    minimal = false;
                    break;
                }
            }
            if minimal {
                out.push(self.word[p]);
            }
        }
        out.sort();
        out
    }

    /// Removes the minimal symbol `s`.
    pub(crate) fn pop(&mut self, s: Symbol) {
        let g = s.index();
        debug_assert_eq!(self.word[self.queues[g][self.heads[g]]], s);
        self.heads[g] += 1;
        if self.heads[g] == self.queues[g].len() {
            self.live &= !(1 << g);
        }
    }
}

impl Mul for &GroupElement {
    type Output = GroupElement;

    /// Group multiplication.
    ///
    /// # Panics
    /// If the operands belong to different graph groups.
    fn mul(self, rhs: &GroupElement) -> GroupElement {
        assert!(self.same_group(rhs), "{}", AlgebraError::MismatchedGraph);
        self.product(rhs).value
    }
}

impl PartialEq for GroupElement {
    fn eq(&self, other: &Self) -> bool {
        self.word == other.word && self.same_group(other)
    }
}

impl Eq for GroupElement {}

impl Hash for GroupElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.word.hash(state);
    }
}

impl PartialOrd for GroupElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortlex on canonical words; used for deterministic containers only,
/// not the divisibility order.
impl Ord for GroupElement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.word
            .len()
            .cmp(&other.word.len())
            .then_with(|| self.word.cmp(&other.word))
            .then_with(|| self.graph.cmp(&other.graph))
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_empty() {
            return f.write_str("1");
        }
        for (n, s) in self.word.iter().enumerate() {
            if n > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{self}>")
    }
}
