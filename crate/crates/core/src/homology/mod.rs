//! Candidate edge labelings up to homology, built from multiplicities of
//! walks along the path classes of a pruned spanning tree.

mod reconstruct;
mod tuples;

use std::collections::{HashSet, VecDeque};

use thiserror::Error;

use crate::algebra::GroupElement;
use crate::planar::{reduce_degree, End, Lifted, PlanarInstance};

pub use reconstruct::{merge_words, reconstruct_phi, split_counts, ReconstructionFailure};
pub use tuples::{enumerate_h_tuples, HTuples, MultiplicityTuple};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HomologyError {
    #[error("the graph is not connected")]
    Disconnected,
    #[error("pruned tree has {leaves} leaves, {branches} branch vertices and {classes} path classes for k = {k}")]
    Structure { k: usize, leaves: usize, branches: usize, classes: usize },
    #[error("commodity {0} is in no conflict pair")]
    Uncovered(usize),
    #[error("vertex {0} has degree above 3 in the tree")]
    Degree(usize),
}

/// One end of a path class at a vertex of `T_0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arm {
    pub class: usize,
    /// The class starts (rather than ends) at this vertex.
    pub at_start: bool,
}

/// A maximal path of `T_0` whose inner vertices have degree 2; `edges`
/// holds each edge with whether it points from `start` towards `end`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathClass {
    pub start: usize,
    pub end: usize,
    pub edges: Vec<(usize, bool)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    pub vertex: usize,
    /// Clockwise.
    pub arms: [Arm; 3],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Leaf {
    pub vertex: usize,
    /// 0-based commodity owning this terminal.
    pub commodity: usize,
    pub source: bool,
    pub arm: Arm,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrunedTree {
    pub tree_edges: Vec<usize>,
    pub in_t0: Vec<bool>,
    pub classes: Vec<PathClass>,
    pub branches: Vec<Branch>,
    pub leaves: Vec<Leaf>,
}

impl PrunedTree {
    pub fn leaf(&self, commodity: usize, source: bool) -> &Leaf {
        self.leaves.iter().find(|l| l.commodity == commodity && l.source == source).expect("every terminal is a leaf")
    }
}

/// BFS spanning tree from vertex 0 (neighbours by edge index), pruned of
/// non-terminal leaves, split into path classes.
pub fn build_pruned_tree(inst: &PlanarInstance) -> Result<PrunedTree, HomologyError> {
    let n = inst.vertex_count();
    let m = inst.edge_count();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (e, edge) in inst.edges.iter().enumerate() {
        incident[edge.tail].push(e);
        if edge.head != edge.tail {
            incident[edge.head].push(e);
        }
    }
    let other = |e: usize, v: usize| {
        let edge = inst.edges[e];
        if edge.tail == v {
            edge.head
        } else {
            edge.tail
        }
    };
    let mut in_tree = vec![false; m];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    if n > 0 {
        seen[0] = true;
        queue.push_back(0);
    }
    while let Some(v) = queue.pop_front() {
        for &e in &incident[v] {
            let w = other(e, v);
            if !seen[w] {
                seen[w] = true;
                in_tree[e] = true;
                queue.push_back(w);
            }
        }
    }
    if seen.iter().any(|&s| !s) {
        return Err(HomologyError::Disconnected);
    }
    let tree_edges: Vec<usize> = (0..m).filter(|&e| in_tree[e]).collect();

    let mut in_t0 = in_tree.clone();
    let mut degree = vec![0usize; n];
    for &e in &tree_edges {
        degree[inst.edges[e].tail] += 1;
        degree[inst.edges[e].head] += 1;
    }
    let mut stack: Vec<usize> = (0..n).filter(|&v| degree[v] == 1 && !inst.is_terminal(v)).collect();
    while let Some(v) = stack.pop() {
        if degree[v] != 1 {
            continue;
        }
        let e = incident[v].iter().copied().find(|&e| in_t0[e]).expect("leaf has an edge");
        in_t0[e] = false;
        degree[v] = 0;
        let w = other(e, v);
        degree[w] -= 1;
        if degree[w] == 1 && !inst.is_terminal(w) {
            stack.push(w);
        }
    }

    // T_0 edges at each vertex, in clockwise order
    let t0_rot: Vec<Vec<(usize, End)>> = inst
        .rotation
        .iter()
        .map(|rot| rot.iter().filter(|h| in_t0[h.edge]).map(|h| (h.edge, h.end)).collect())
        .collect();
    if let Some(v) = (0..n).find(|&v| t0_rot[v].len() > 3) {
        return Err(HomologyError::Degree(v));
    }
    let mut classes: Vec<PathClass> = Vec::new();
    let mut class_at: Vec<Option<(usize, bool)>> = vec![None; 2 * m];
    let mut used = vec![false; m];
    for u in 0..n {
        let d = t0_rot[u].len();
        if d == 0 || d == 2 {
            continue;
        }
        for &(e0, _) in &t0_rot[u] {
            if used[e0] {
                continue;
            }
            let id = classes.len();
            let mut edges = Vec::new();
            let (mut v, mut e) = (u, e0);
            class_at[2 * e0 + usize::from(inst.edges[e0].tail != u)] = Some((id, true));
            loop {
                used[e] = true;
                edges.push((e, inst.edges[e].tail == v));
                let w = other(e, v);
                if t0_rot[w].len() != 2 {
                    class_at[2 * e + usize::from(inst.edges[e].tail != w)] = Some((id, false));
                    classes.push(PathClass { start: u, end: w, edges });
                    break;
                }
                let next = t0_rot[w].iter().map(|&(x, _)| x).find(|&x| x != e).expect("degree two");
                v = w;
                e = next;
            }
        }
    }
    let arm_of = |v: usize, e: usize| {
        let (class, at_start) = class_at[2 * e + usize::from(inst.edges[e].tail != v)].expect("class end recorded");
        Arm { class, at_start }
    };
    let mut branches = Vec::new();
    let mut leaves = Vec::new();
    for v in 0..n {
        match t0_rot[v].len() {
            3 => {
                let a: Vec<Arm> = t0_rot[v].iter().map(|&(e, _)| arm_of(v, e)).collect();
                branches.push(Branch { vertex: v, arms: [a[0], a[1], a[2]] });
            }
            1 => {
                let arm = arm_of(v, t0_rot[v][0].0);
                for (i, &(r, s)) in inst.terminals.iter().enumerate() {
                    if r == v {
                        leaves.push(Leaf { vertex: v, commodity: i, source: true, arm });
                    }
                    if s == v {
                        leaves.push(Leaf { vertex: v, commodity: i, source: false, arm });
                    }
                }
            }
            _ => {}
        }
    }
    let k = inst.k();
    let distinct_leaves = (0..n).filter(|&v| t0_rot[v].len() == 1).count();
    if leaves.len() != 2 * k || distinct_leaves != 2 * k || branches.len() + 2 != 2 * k || classes.len() + 3 > 4 * k {
        return Err(HomologyError::Structure { k, leaves: distinct_leaves, branches: branches.len(), classes: classes.len() });
    }
    Ok(PrunedTree { tree_edges, in_t0, classes, branches, leaves })
}

/// Candidate labelings on the edges of a terminal-normalized instance.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    pub candidates: Vec<Vec<GroupElement>>,
    pub truncated: bool,
    pub tuples_tried: usize,
}

/// Streams deduplicated candidates: degree reduction, pruned tree,
/// multiplicity tuples, reconstruction, then restriction to the edges of
/// the instance it was built from.
pub struct CandidateStream {
    reduced: Lifted,
    tree: PrunedTree,
    tuples: HTuples,
    edge_count: usize,
    seen: HashSet<Vec<GroupElement>>,
    pub tuples_tried: usize,
}

impl CandidateStream {
    pub fn new(inst: &PlanarInstance, max_multiplicity: u32) -> Result<Self, HomologyError> {
        for i in 1..=inst.k() {
            if !inst.graph.pairs().iter().any(|&(a, b)| a == i || b == i) {
                return Err(HomologyError::Uncovered(i));
            }
        }
        let reduced = reduce_degree(inst);
        let tree = build_pruned_tree(&reduced.inst)?;
        let tuples = enumerate_h_tuples(&tree, inst.k(), max_multiplicity);
        Ok(Self { reduced, tree, tuples, edge_count: inst.edge_count(), seen: HashSet::new(), tuples_tried: 0 })
    }

    pub fn tree(&self) -> &PrunedTree {
        &self.tree
    }

    pub fn reduced(&self) -> &Lifted {
        &self.reduced
    }

    /// Up to `n` new candidates; fewer means the stream is exhausted.
    pub fn next_batch(&mut self, n: usize) -> Vec<Vec<GroupElement>> {
        let mut out = Vec::new();
        while out.len() < n {
            let Some(h) = self.tuples.next() else { break };
            self.tuples_tried += 1;
            let Ok(phi) = reconstruct_phi(&self.reduced.inst, &self.tree, &h) else { continue };
            let mut shrunk = vec![GroupElement::identity(&self.reduced.inst.graph); self.edge_count];
            for (e, x) in phi.into_iter().enumerate() {
                if let Some(orig) = self.reduced.edge_origin[e] {
                    shrunk[orig] = x;
                }
            }
            if self.seen.insert(shrunk.clone()) {
                out.push(shrunk);
            }
        }
        out
    }
}

/// All candidates for `inst` (terminal-normalized, every commodity in some
/// conflict pair), stopping after `limit` distinct ones.
pub fn enumerate_candidates(inst: &PlanarInstance, max_multiplicity: u32, limit: usize) -> Result<CandidateSet, HomologyError> {
    let mut stream = CandidateStream::new(inst, max_multiplicity)?;
    let candidates = stream.next_batch(limit);
    let truncated = candidates.len() == limit && !stream.next_batch(1).is_empty();
    Ok(CandidateSet { candidates, truncated, tuples_tried: stream.tuples_tried })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planar::normalize_terminals;

    use crate::planar::fixtures::*;

    #[test]
    fn single_commodity_tree_is_one_class() {
        let inst = build(1, &[], &[(0, 1), (1, 2), (1, 3)], &[&[1], &[-1, 2, 3], &[-2], &[-3]], &[(0, 2)]);
        let pt = build_pruned_tree(&inst).unwrap();
        assert_eq!(pt.classes.len(), 1);
        assert_eq!(pt.classes[0].edges, vec![(0, true), (1, true)]);
        assert!(!pt.in_t0[2]);
        assert!(pt.branches.is_empty());
    }

    #[test]
    fn two_commodity_star() {
        let inst = normalize_terminals(&star4(&[(1, 2)])).inst;
        let red = reduce_degree(&inst);
        let pt = build_pruned_tree(&red.inst).unwrap();
        assert_eq!(pt.leaves.len(), 4);
        assert_eq!(pt.branches.len(), 2);
        assert!(pt.classes.len() <= 5);
    }

    #[test]
    fn disconnected_is_rejected() {
        let inst = build(1, &[], &[(0, 1), (2, 3)], &[&[1], &[-1], &[2], &[-2]], &[(0, 1)]);
        assert_eq!(build_pruned_tree(&inst), Err(HomologyError::Disconnected));
    }

    #[test]
    fn zero_multiplicity_gives_nothing() {
        let inst = star4(&[(1, 2)]);
        let set = enumerate_candidates(&inst, 0, 100).unwrap();
        assert!(set.candidates.is_empty());
    }

    #[test]
    fn uncovered_commodity_is_rejected() {
        let inst = star4(&[]);
        assert!(matches!(enumerate_candidates(&inst, 2, 100), Err(HomologyError::Uncovered(1))));
    }
}
