//! The cohomology feasibility problem: given `φ` and closed sets `H(e)`,
//! find `f: V → G_F` with `f(u)^{-1} φ(e) f(w) ∈ H(e)` on every edge.

mod two_sat;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use thiserror::Error;

use crate::algebra::{ConflictGraph, GroupElement, JoinResult};
use crate::order::{mu_raw, sandwich_raw, ClosedSet};
use crate::par;

pub use two_sat::{Lit, TwoSat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CfpError {
    #[error("edge {edge} references vertex {vertex}, but there are only {count} vertices")]
    BadEndpoint { edge: usize, vertex: usize, count: usize },
    #[error("edge {0} uses a different graph group")]
    MismatchedGraph(usize),
    #[error("edge {edge}: closed set mentions g{gen} but k = {k}")]
    GeneratorOutOfRange { edge: usize, gen: usize, k: usize },
    #[error("internal error: certificate check failed on edge {0}")]
    Verification(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfpEdge {
    pub tail: usize,
    pub head: usize,
    pub phi: GroupElement,
    pub allowed: ClosedSet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfpInstance {
    pub graph: Arc<ConflictGraph>,
    pub vertex_count: usize,
    pub edges: Vec<CfpEdge>,
}

impl CfpInstance {
    pub fn new(graph: Arc<ConflictGraph>, vertex_count: usize, edges: Vec<CfpEdge>) -> Result<Self, CfpError> {
        for (i, e) in edges.iter().enumerate() {
            for v in [e.tail, e.head] {
                if v >= vertex_count {
                    return Err(CfpError::BadEndpoint { edge: i, vertex: v, count: vertex_count });
                }
            }
            if !e.phi.graph().as_ref().eq(&graph) {
                return Err(CfpError::MismatchedGraph(i));
            }
            let gen = e.allowed.max_generator();
            if gen > graph.k() {
                return Err(CfpError::GeneratorOutOfRange { edge: i, gen, k: graph.k() });
            }
        }
        Ok(Self { graph, vertex_count, edges })
    }

    /// `f(u)^{-1} φ(e) f(w)` for every edge.
    pub fn cohomologous(&self, f: &[GroupElement]) -> Vec<GroupElement> {
        self.edges.iter().map(|e| &(&f[e.tail].inverse() * &e.phi) * &f[e.head]).collect()
    }

    pub fn is_feasible_labeling(&self, f: &[GroupElement]) -> bool {
        self.cohomologous(f).iter().zip(&self.edges).all(|(psi, e)| e.allowed.contains(psi))
    }
}

/// An instance with `|φ(e)| <= 1` everywhere, where edges `2p` and `2p+1`
/// are mutual reverses.
#[derive(Debug, Clone)]
pub struct NormalizedCfp {
    inst: CfpInstance,
    original: CfpInstance,
    incident: Vec<Vec<usize>>,
}

impl NormalizedCfp {
    pub fn instance(&self) -> &CfpInstance {
        &self.inst
    }

    pub fn original(&self) -> &CfpInstance {
        &self.original
    }

    pub fn reverse(e: usize) -> usize {
        e ^ 1
    }

    /// Forgets subdivision vertices.
    pub fn project(&self, f: &[GroupElement]) -> Vec<GroupElement> {
        f[..self.original.vertex_count].to_vec()
    }

    pub fn identity_labeling(&self) -> Vec<GroupElement> {
        vec![GroupElement::identity(&self.inst.graph); self.inst.vertex_count]
    }
}

pub fn normalize_instance(inst: &CfpInstance) -> NormalizedCfp {
    let graph = &inst.graph;
    let mut n = inst.vertex_count;
    let mut edges = Vec::new();
    let mut push_pair = |tail: usize, head: usize, phi: GroupElement, allowed: ClosedSet| {
        let back = CfpEdge { tail: head, head: tail, phi: phi.inverse(), allowed: allowed.inverted() };
        edges.push(CfpEdge { tail, head, phi, allowed });
        edges.push(back);
    };
    // repeated constraints (or an edge repeating another's reverse) add nothing
    let mut seen = HashSet::new();
    for e in &inst.edges {
        if !seen.insert((e.tail, e.head, e.phi.clone(), e.allowed.clone())) {
            continue;
        }
        seen.insert((e.head, e.tail, e.phi.inverse(), e.allowed.inverted()));
        let word = e.phi.word();
        if word.len() <= 1 {
            push_pair(e.tail, e.head, e.phi.clone(), e.allowed.clone());
            continue;
        }
        let mut from = e.tail;
        for (j, &s) in word.iter().enumerate() {
            let to = if j + 1 == word.len() {
                e.head
            } else {
                n += 1;
                n - 1
            };
            let allowed = if j == 0 { e.allowed.clone() } else { ClosedSet::Unit };
            push_pair(from, to, GroupElement::from_valid(graph, &[s]), allowed);
            from = to;
        }
    }
    let mut incident = vec![Vec::new(); n];
    for (i, e) in edges.iter().enumerate() {
        incident[e.tail].push(i);
        if e.head != e.tail {
            incident[e.head].push(i);
        }
    }
    NormalizedCfp {
        inst: CfpInstance { graph: Arc::clone(graph), vertex_count: n, edges },
        original: inst.clone(),
        incident,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VertexLabeling {
    Finite(Vec<GroupElement>),
    Infinity,
}

impl VertexLabeling {
    pub fn finite(&self) -> Option<&[GroupElement]> {
        match self {
            Self::Finite(f) => Some(f),
            Self::Infinity => None,
        }
    }
}

fn edge_ok(e: &CfpEdge, f: &[GroupElement]) -> bool {
    mu_raw(&e.phi, &e.allowed, &f[e.tail]).le(&f[e.head])
}

pub fn is_prefeasible(inst: &NormalizedCfp, f: &[GroupElement]) -> bool {
    inst.inst.edges.iter().all(|e| edge_ok(e, f))
}

pub fn in_script_f(inst: &NormalizedCfp, f: &[GroupElement]) -> bool {
    inst.inst.edges.iter().all(|e| sandwich_raw(&e.phi, &f[e.tail], &e.allowed, &f[e.head]))
}

#[derive(Debug, Clone)]
pub struct ClosureRun {
    pub labeling: VertexLabeling,
    pub iterations: usize,
    pub cap_exceeded: bool,
}

/// Least pre-feasible labeling above `f`, or `Infinity`.
pub fn prefeasible_closure(inst: &NormalizedCfp, f: &[GroupElement], cap: usize) -> VertexLabeling {
    closure_run(inst, f, cap).labeling
}

/// Repeatedly picks the lowest-indexed violated edge `(u, w)` and resets
/// `f(w) := μ(f(u)) ∨ f(w)`.
pub fn closure_run(inst: &NormalizedCfp, f: &[GroupElement], cap: usize) -> ClosureRun {
    let edges = &inst.inst.edges;
    let mut f = f.to_vec();
    let mut mus: Vec<GroupElement> = edges.iter().map(|e| mu_raw(&e.phi, &e.allowed, &f[e.tail])).collect();
    let mut violated: BTreeSet<usize> = (0..edges.len()).filter(|&i| !mus[i].le(&f[edges[i].head])).collect();
    let mut iterations = 0;
    while let Some(&i) = violated.first() {
        if iterations >= cap {
            return ClosureRun { labeling: VertexLabeling::Infinity, iterations, cap_exceeded: true };
        }
        let w = edges[i].head;
        let JoinResult::Finite(joined) = mus[i].join_of(&f[w]) else {
            return ClosureRun { labeling: VertexLabeling::Infinity, iterations, cap_exceeded: false };
        };
        f[w] = joined;
        iterations += 1;
        for &j in &inst.incident[w] {
            let e = &edges[j];
            if e.tail == w {
                mus[j] = mu_raw(&e.phi, &e.allowed, &f[w]);
            } else if !violated.contains(&j) {
                // f(w) only grows, so a satisfied in-edge stays satisfied
                continue;
            }
            if mus[j].le(&f[e.head]) {
                violated.remove(&j);
            } else {
                violated.insert(j);
            }
        }
    }
    ClosureRun { labeling: VertexLabeling::Finite(f), iterations, cap_exceeded: false }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfeasibleReason {
    TwoSatUnsat,
    IterationCapExceeded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfpSolution {
    /// Labeling of the original vertices.
    pub f: Vec<GroupElement>,
    /// `ψ` on the original edges.
    pub psi: Vec<GroupElement>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CfpOutcome {
    Feasible(CfpSolution),
    Infeasible(InfeasibleReason),
}

#[derive(Debug, Clone, Copy)]
pub struct CfpOptions {
    pub max_iterations: Option<usize>,
    pub theoretical_cap: bool,
    pub parallel: bool,
}

impl Default for CfpOptions {
    fn default() -> Self {
        Self { max_iterations: None, theoretical_cap: false, parallel: true }
    }
}

impl CfpOptions {
    /// Iteration cap for a starting labeling of total length `f_len`.
    pub fn cap(&self, inst: &NormalizedCfp, f_len: usize) -> usize {
        let k = inst.inst.graph.k();
        let n = inst.inst.vertex_count;
        let m = inst.inst.edges.len();
        if self.theoretical_cap {
            let base = (2 * n * k) as u128;
            let bound = (k as u128).saturating_mul(f_len as u128).saturating_add(
                220u128.saturating_mul(k as u128).saturating_mul(base.saturating_pow(9)),
            );
            return usize::try_from(bound).unwrap_or(usize::MAX);
        }
        let default = k * f_len.max(1) * m + 1000;
        default.max(self.max_iterations.unwrap_or(0))
    }
}

/// Decides a normalized instance and returns a certified labeling when one exists.
pub fn solve_cfp(inst: &NormalizedCfp, opts: &CfpOptions) -> Result<CfpOutcome, CfpError> {
    if cycle_blocked(&inst.original) {
        return Ok(CfpOutcome::Infeasible(InfeasibleReason::TwoSatUnsat));
    }
    let edges = &inst.inst.edges;
    let l_pairs: Vec<usize> = (0..edges.len() / 2).filter(|&p| !edges[2 * p].allowed.contains(&edges[2 * p].phi)).collect();
    let l_edges: Vec<usize> = l_pairs.iter().flat_map(|&p| [2 * p, 2 * p + 1]).collect();

    let cap = opts.cap(inst, 1);
    let closure_of = |e: usize| {
        let mut start = inst.identity_labeling();
        start[edges[e].tail] = edges[e].phi.clone();
        closure_run(inst, &start, cap)
    };
    // A pair whose closures are both infinite already forces unsatisfiability.
    // The first such pair decides the outcome whatever the chunk width.
    let mut closures: Vec<ClosureRun> = Vec::with_capacity(l_edges.len());
    for chunk in l_pairs.chunks(par::width(opts.parallel)) {
        let runs = par::map(opts.parallel, chunk, |&p| (closure_of(2 * p), closure_of(2 * p + 1)));
        for (a, b) in runs {
            if a.labeling == VertexLabeling::Infinity && b.labeling == VertexLabeling::Infinity {
                let reason = if a.cap_exceeded || b.cap_exceeded {
                    InfeasibleReason::IterationCapExceeded
                } else {
                    InfeasibleReason::TwoSatUnsat
                };
                return Ok(CfpOutcome::Infeasible(reason));
            }
            closures.push(a);
            closures.push(b);
        }
    }
    let capped: Vec<bool> = closures.iter().map(|c| c.cap_exceeded).collect();

    let mut sat = TwoSat::new(l_edges.len());
    let mut optimistic = TwoSat::new(l_edges.len());
    for p in 0..l_pairs.len() {
        sat.clause(Lit::pos(2 * p), Lit::pos(2 * p + 1));
        optimistic.clause(Lit::pos(2 * p), Lit::pos(2 * p + 1));
    }
    let mut memo = HashMap::new();
    for a in 0..l_edges.len() {
        for b in a..l_edges.len() {
            let bad = match (closures[a].labeling.finite(), closures[b].labeling.finite()) {
                (Some(fa), Some(fb)) => match join_labelings(fa, fb) {
                    Some(joined) => !in_script_f_cached(inst, &joined, &mut memo),
                    None => true,
                },
                _ => true,
            };
            if bad {
                sat.clause(Lit::neg(a), Lit::neg(b));
                if !capped[a] && !capped[b] {
                    optimistic.clause(Lit::neg(a), Lit::neg(b));
                }
            }
        }
    }
    let Some(assign) = sat.solve() else {
        // Dropping every clause that rests on a capped closure tells whether
        // the verdict depends on the cap.
        let reason = if capped.iter().any(|&c| c) && optimistic.solve().is_some() {
            InfeasibleReason::IterationCapExceeded
        } else {
            InfeasibleReason::TwoSatUnsat
        };
        return Ok(CfpOutcome::Infeasible(reason));
    };

    let mut f = inst.identity_labeling();
    for (a, &chosen) in assign.iter().enumerate() {
        if chosen {
            let fa = closures[a].labeling.finite().expect("chosen closures are finite");
            f = join_labelings(&f, fa).expect("pairwise joins of chosen closures are finite");
        }
    }
    for (i, psi) in inst.inst.cohomologous(&f).iter().enumerate() {
        if !edges[i].allowed.contains(psi) {
            return Err(CfpError::Verification(i));
        }
    }
    let f = inst.project(&f);
    let psi = inst.original.cohomologous(&f);
    for (i, p) in psi.iter().enumerate() {
        if !inst.original.edges[i].allowed.contains(p) {
            return Err(CfpError::Verification(i));
        }
    }
    Ok(CfpOutcome::Feasible(CfpSolution { f, psi }))
}

/// Edges with `H = {1}` pin `f` on each component they span up to one
/// common right factor: `f(v) = a_v g`. Every edge inside such a component
/// then needs a conjugate of `a_u^{-1} φ a_w` in `H`. For the built-in
/// families `H` holds cyclically reduced elements closed under cyclic
/// permutation, so this is decided by the cyclic core.
fn cycle_blocked(inst: &CfpInstance) -> bool {
    fn conjugation_closed(h: &ClosedSet) -> bool {
        match h {
            ClosedSet::Unit | ClosedSet::Stable(_) | ClosedSet::SignedStable(_) => true,
            ClosedSet::Inverse(inner) => conjugation_closed(inner),
            ClosedSet::Chain(_) => false,
        }
    }
    let n = inst.vertex_count;
    let mut unit_adj: Vec<Vec<(usize, GroupElement)>> = vec![Vec::new(); n];
    for e in &inst.edges {
        if e.allowed == ClosedSet::Unit {
            // f(w) = φ^{-1} f(u)
            unit_adj[e.tail].push((e.head, e.phi.inverse()));
            unit_adj[e.head].push((e.tail, e.phi.clone()));
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut a: Vec<Option<GroupElement>> = vec![None; n];
    for root in 0..n {
        if comp[root] != usize::MAX {
            continue;
        }
        comp[root] = root;
        a[root] = Some(GroupElement::identity(&inst.graph));
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            let av = a[v].clone().expect("visited vertices are labeled");
            for (w, x) in &unit_adj[v] {
                if comp[*w] == usize::MAX {
                    comp[*w] = root;
                    a[*w] = Some(x * &av);
                    stack.push(*w);
                }
            }
        }
    }
    inst.edges.iter().any(|e| {
        if comp[e.tail] != comp[e.head] || !conjugation_closed(&e.allowed) {
            return false;
        }
        let (au, aw) = (a[e.tail].as_ref().expect("labeled"), a[e.head].as_ref().expect("labeled"));
        let c = &(&au.inverse() * &e.phi) * aw;
        !e.allowed.contains(&c.cyclic_core())
    })
}

/// Pointwise join, `None` if any vertex joins to infinity.
pub fn join_labelings(a: &[GroupElement], b: &[GroupElement]) -> Option<Vec<GroupElement>> {
    a.iter().zip(b).map(|(x, y)| x.join_of(y).finite()).collect()
}

type SandwichMemo = HashMap<(usize, GroupElement, GroupElement), bool>;

fn in_script_f_cached(inst: &NormalizedCfp, f: &[GroupElement], memo: &mut SandwichMemo) -> bool {
    for (i, e) in inst.inst.edges.iter().enumerate() {
        let (x, z) = (&f[e.tail], &f[e.head]);
        // 1↑ H (1↑)^{-1} is all of G
        if x.is_identity() && z.is_identity() {
            continue;
        }
        let ok = *memo
            .entry((i, x.clone(), z.clone()))
            .or_insert_with(|| sandwich_raw(&e.phi, x, &e.allowed, z));
        if !ok {
            return false;
        }
    }
    true
}
