use thiserror::Error;

use crate::algebra::GroupElement;
use crate::order::ClosedSet;

use super::PlanarInstance;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

/// One path per commodity, in commodity order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathSolution {
    pub paths: Vec<Path>,
}

impl PathSolution {
    /// `χ`: each edge gets the product of `g_i` over the paths using it.
    pub fn edge_labels(&self, inst: &PlanarInstance) -> Vec<GroupElement> {
        let mut masks = vec![0u64; inst.edge_count()];
        for (i, p) in self.paths.iter().enumerate() {
            for &e in &p.edges {
                masks[e] |= 1 << i;
            }
        }
        masks
            .into_iter()
            .map(|m| {
                let raw: Vec<_> = crate::order::mask_gens(m).into_iter().map(crate::algebra::Symbol::pos).collect();
                GroupElement::normal_form(&inst.graph, &raw).expect("commodities are generators")
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("expected {expected} paths, found {found}")]
    PathCount { expected: usize, found: usize },
    #[error("path {0} does not run from its source to its sink")]
    Endpoints(usize),
    #[error("path {0} is not a directed walk along its edges")]
    NotAWalk(usize),
    #[error("path {0} repeats a vertex")]
    NotSimple(usize),
    #[error("path {commodity} uses edge {edge}, which does not admit it")]
    Forbidden { commodity: usize, edge: usize },
    #[error("paths {0} and {1} conflict but share vertex {2}")]
    Conflict(usize, usize, usize),
}

/// Checks simplicity, endpoints, `K_e` compliance and `F`-disjointness.
/// Commodities are reported 1-based.
pub fn validate_solution(inst: &PlanarInstance, sol: &PathSolution) -> Result<(), ValidationError> {
    let k = inst.k();
    if sol.paths.len() != k {
        return Err(ValidationError::PathCount { expected: k, found: sol.paths.len() });
    }
    for (i, p) in sol.paths.iter().enumerate() {
        let c = i + 1;
        let (r, s) = inst.terminals[i];
        if p.vertices.first() != Some(&r) || p.vertices.last() != Some(&s) {
            return Err(ValidationError::Endpoints(c));
        }
        if p.vertices.len() != p.edges.len() + 1 {
            return Err(ValidationError::NotAWalk(c));
        }
        for (j, &e) in p.edges.iter().enumerate() {
            let edge = inst.edges.get(e).ok_or(ValidationError::NotAWalk(c))?;
            if edge.tail != p.vertices[j] || edge.head != p.vertices[j + 1] {
                return Err(ValidationError::NotAWalk(c));
            }
            if edge.allowed & (1 << i) == 0 {
                return Err(ValidationError::Forbidden { commodity: c, edge: e });
            }
        }
        let mut seen = p.vertices.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(ValidationError::NotSimple(c));
        }
    }
    for &(a, b) in inst.graph.pairs() {
        let pa = &sol.paths[a - 1].vertices;
        if let Some(&v) = sol.paths[b - 1].vertices.iter().find(|v| pa.contains(v)) {
            return Err(ValidationError::Conflict(a, b, v));
        }
    }
    Ok(())
}

/// Why a candidate's `ψ` did not describe a path system.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractionFailure {
    #[error("edge {0}: label is not a product of distinct commuting generators")]
    NotStable(usize),
    #[error("commodity {commodity}: {count} continuations at vertex {vertex}")]
    Branching { commodity: usize, vertex: usize, count: usize },
    #[error("commodity {commodity}: walk returns to vertex {vertex}")]
    Revisit { commodity: usize, vertex: usize },
    #[error(transparent)]
    Invalid(#[from] ValidationError),
}

/// Reads `ψ(e)` as the set of commodities traversing `e` forward and follows
/// each commodity from its source; edges of a commodity off its walk are
/// ignored. The result is validated before it is returned.
pub fn extract_paths(inst: &PlanarInstance, psi: &[GroupElement]) -> Result<PathSolution, ExtractionFailure> {
    let all = ClosedSet::Stable(inst.full_mask());
    let mut carriers = Vec::with_capacity(psi.len());
    for (e, x) in psi.iter().enumerate() {
        if !all.contains(x) {
            return Err(ExtractionFailure::NotStable(e));
        }
        carriers.push(x.support());
    }
    let mut out_edges = vec![Vec::new(); inst.vertex_count()];
    for (e, edge) in inst.edges.iter().enumerate() {
        out_edges[edge.tail].push(e);
    }
    let mut paths = Vec::with_capacity(inst.k());
    for (i, &(r, s)) in inst.terminals.iter().enumerate() {
        let c = i + 1;
        let mut vertices = vec![r];
        let mut edges = Vec::new();
        let mut v = r;
        while v != s {
            let next: Vec<usize> = out_edges[v].iter().copied().filter(|&e| carriers[e] & (1 << i) != 0).collect();
            if next.len() != 1 {
                return Err(ExtractionFailure::Branching { commodity: c, vertex: v, count: next.len() });
            }
            let e = next[0];
            v = inst.edges[e].head;
            if vertices.contains(&v) {
                return Err(ExtractionFailure::Revisit { commodity: c, vertex: v });
            }
            vertices.push(v);
            edges.push(e);
        }
        paths.push(Path { vertices, edges });
    }
    let sol = PathSolution { paths };
    validate_solution(inst, &sol)?;
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;

    fn labels(inst: &PlanarInstance, words: &[&str]) -> Vec<GroupElement> {
        words.iter().map(|w| GroupElement::parse(&inst.graph, w).unwrap()).collect()
    }

    #[test]
    fn single_chain_is_extracted() {
        let inst = build(1, &[], &[(0, 1), (1, 2), (1, 3)], &[&[1], &[-1, 2, 3], &[-2], &[-3]], &[(0, 2)]);
        let sol = extract_paths(&inst, &labels(&inst, &["g1", "g1", "1"])).unwrap();
        assert_eq!(sol.paths[0], Path { vertices: vec![0, 1, 2], edges: vec![0, 1] });
    }

    #[test]
    fn trivial_labels_fail() {
        let inst = build(1, &[], &[(0, 1)], &[&[1], &[-1]], &[(0, 1)]);
        assert!(matches!(
            extract_paths(&inst, &labels(&inst, &["1"])),
            Err(ExtractionFailure::Branching { count: 0, .. })
        ));
    }

    #[test]
    fn shared_edge_for_commuting_commodities() {
        // both commodities run 0 -> 1 -> {2, 3}; allowed only because {1,2} is not a conflict
        let edges = [(4, 0), (5, 0), (0, 1), (1, 2), (1, 3)];
        let inst = build(2, &[], &edges, &[&[-1, -2, 3], &[-3, 4, 5], &[-4], &[-5], &[1], &[2]], &[(4, 2), (5, 3)]);
        let psi = labels(&inst, &["g1", "g2", "g1 g2", "g1", "g2"]);
        let sol = extract_paths(&inst, &psi).unwrap();
        assert_eq!(sol.paths[0].vertices, vec![4, 0, 1, 2]);
        assert_eq!(sol.paths[1].vertices, vec![5, 0, 1, 3]);
        assert_eq!(sol.edge_labels(&inst), psi);

        let conflicting = build(2, &[(1, 2)], &edges, &[&[-1, -2, 3], &[-3, 4, 5], &[-4], &[-5], &[1], &[2]], &[(4, 2), (5, 3)]);
        let psi = labels(&conflicting, &["g1", "g2", "g1 g2", "g1", "g2"]);
        assert_eq!(extract_paths(&conflicting, &psi), Err(ExtractionFailure::NotStable(2)));
    }

    #[test]
    fn validation_catches_violations() {
        let mut inst = build(1, &[], &[(0, 1), (1, 2)], &[&[1], &[-1, 2], &[-2]], &[(0, 2)]);
        let good = PathSolution { paths: vec![Path { vertices: vec![0, 1, 2], edges: vec![0, 1] }] };
        validate_solution(&inst, &good).unwrap();
        let short = PathSolution { paths: vec![Path { vertices: vec![0, 1], edges: vec![0] }] };
        assert_eq!(validate_solution(&inst, &short), Err(ValidationError::Endpoints(1)));
        inst.edges[1].allowed = 0;
        assert_eq!(validate_solution(&inst, &good), Err(ValidationError::Forbidden { commodity: 1, edge: 1 }));
    }
}
