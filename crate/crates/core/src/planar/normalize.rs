use std::sync::Arc;

use crate::algebra::ConflictGraph;

use super::{End, HalfEdge, Id, Path, PathSolution, PlanarEdge, PlanarInstance};

/// An instance derived from another, with the origin of every vertex and
/// edge (`None` for added pendant ones).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lifted {
    pub inst: PlanarInstance,
    pub vertex_origin: Vec<Option<usize>>,
    pub edge_origin: Vec<Option<usize>>,
}

impl Lifted {
    fn identity(inst: &PlanarInstance) -> Self {
        Self {
            inst: inst.clone(),
            vertex_origin: (0..inst.vertex_count()).map(Some).collect(),
            edge_origin: (0..inst.edge_count()).map(Some).collect(),
        }
    }

    /// Maps a solution of the derived instance to the source instance:
    /// added edges are dropped, merged vertices contracted and any cycle the
    /// contraction creates is shortcut.
    pub fn map_back(&self, sol: &PathSolution, source: &PlanarInstance) -> PathSolution {
        let paths = sol
            .paths
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let edges: Vec<usize> = p.edges.iter().filter_map(|&e| self.edge_origin[e]).collect();
                shortcut(source, source.terminals[i].0, &edges)
            })
            .collect();
        PathSolution { paths }
    }

    /// Composes `self` (derived from `mid`) with `outer` (which derived `mid`).
    pub fn compose(&self, outer: &Lifted) -> Lifted {
        Lifted {
            inst: self.inst.clone(),
            vertex_origin: self.vertex_origin.iter().map(|v| v.and_then(|v| outer.vertex_origin[v])).collect(),
            edge_origin: self.edge_origin.iter().map(|e| e.and_then(|e| outer.edge_origin[e])).collect(),
        }
    }
}

/// Walks `edges` from `start`, removing any closed sub-walk.
fn shortcut(inst: &PlanarInstance, start: usize, edges: &[usize]) -> Path {
    let mut vertices = vec![start];
    let mut kept: Vec<usize> = Vec::new();
    for &e in edges {
        let head = inst.edges[e].head;
        if let Some(p) = vertices.iter().position(|&v| v == head) {
            vertices.truncate(p + 1);
            kept.truncate(p);
        } else {
            vertices.push(head);
            kept.push(e);
        }
    }
    Path { vertices, edges: kept }
}

fn terminal_ok(inst: &PlanarInstance, v: usize, source: bool, uses: &[usize]) -> bool {
    let (out_deg, in_deg) = (inst.out_degree(v), inst.in_degree(v));
    uses[v] == 1 && if source { out_deg == 1 && in_deg == 0 } else { out_deg == 0 && in_deg == 1 }
}

/// Attaches pendant terminals wherever a terminal is shared or has the
/// wrong degrees. The new edge end is inserted just before the
/// lowest-indexed edge end already at the old terminal; pendant edges
/// only admit their own commodity.
pub fn normalize_terminals(inst: &PlanarInstance) -> Lifted {
    let mut uses = vec![0usize; inst.vertex_count()];
    for &(r, s) in &inst.terminals {
        uses[r] += 1;
        uses[s] += 1;
    }
    let mut lifted = Lifted::identity(inst);
    for i in 0..inst.k() {
        let (r, s) = inst.terminals[i];
        if !terminal_ok(inst, r, true, &uses) {
            let t = attach_pendant(&mut lifted, r, i, true);
            lifted.inst.terminals[i].0 = t;
        }
        if !terminal_ok(inst, s, false, &uses) {
            let t = attach_pendant(&mut lifted, s, i, false);
            lifted.inst.terminals[i].1 = t;
        }
    }
    lifted
}

fn attach_pendant(lifted: &mut Lifted, v: usize, commodity: usize, source: bool) -> usize {
    let inst = &mut lifted.inst;
    let t = inst.vertex_count();
    let e = inst.edge_count();
    let tag = if source { 'r' } else { 's' };
    inst.vertex_ids.push(Id::Str(format!("~{tag}{}", commodity + 1)));
    inst.edge_ids.push(Id::Str(format!("~{tag}{}", commodity + 1)));
    let allowed = 1u64 << commodity;
    let (edge, at_v, at_t) = if source {
        (PlanarEdge { tail: t, head: v, allowed }, HalfEdge::head(e), HalfEdge::tail(e))
    } else {
        (PlanarEdge { tail: v, head: t, allowed }, HalfEdge::tail(e), HalfEdge::head(e))
    };
    inst.edges.push(edge);
    let rot = &mut inst.rotation[v];
    let at = rot.iter().enumerate().min_by_key(|(_, h)| **h).map_or(0, |(j, _)| j);
    rot.insert(at, at_v);
    inst.rotation.push(vec![at_t]);
    lifted.vertex_origin.push(None);
    lifted.edge_origin.push(None);
    t
}

/// Replaces every non-terminal vertex of degree `d > 3` by a directed
/// clockwise circuit `c_0 -> c_1 -> ... -> c_0`, attaching the `j`-th edge
/// end of the rotation to `c_j`. Circuit edges admit every commodity.
pub fn reduce_degree(inst: &PlanarInstance) -> Lifted {
    let mut lifted = Lifted::identity(inst);
    for v in 0..inst.vertex_count() {
        let d = inst.degree(v);
        if d <= 3 || inst.is_terminal(v) {
            continue;
        }
        let out = &mut lifted.inst;
        let ends = out.rotation[v].clone();
        let mut circuit = vec![v];
        for j in 1..d {
            out.vertex_ids.push(Id::Str(format!("{}~{j}", inst.vertex_ids[v])));
            out.rotation.push(Vec::new());
            lifted.vertex_origin.push(Some(v));
            circuit.push(out.vertex_count() - 1);
        }
        let first_edge = out.edge_count();
        let full = out.full_mask();
        for j in 0..d {
            out.edges.push(PlanarEdge { tail: circuit[j], head: circuit[(j + 1) % d], allowed: full });
            out.edge_ids.push(Id::Str(format!("{}~{j}>", inst.vertex_ids[v])));
            lifted.edge_origin.push(None);
        }
        for (j, h) in ends.iter().enumerate() {
            let c = circuit[j];
            match h.end {
                End::Tail => out.edges[h.edge].tail = c,
                End::Head => out.edges[h.edge].head = c,
            }
            let leaving = first_edge + j;
            let entering = first_edge + (j + d - 1) % d;
            out.rotation[c] = vec![*h, HalfEdge::tail(leaving), HalfEdge::head(entering)];
        }
    }
    lifted
}

/// The sub-instance on the commodities in `keep` (0-based, increasing),
/// renumbered `1..=keep.len()`.
pub fn restrict_commodities(inst: &PlanarInstance, keep: &[usize]) -> PlanarInstance {
    let new_of = |i: usize| keep.iter().position(|&c| c == i);
    let pairs: Vec<(usize, usize)> = inst
        .graph
        .pairs()
        .iter()
        .filter_map(|&(a, b)| Some((new_of(a - 1)? + 1, new_of(b - 1)? + 1)))
        .collect();
    let graph = Arc::new(ConflictGraph::new(keep.len(), pairs).expect("restriction of a valid graph"));
    let remask = |m: u64| keep.iter().enumerate().fold(0u64, |acc, (j, &c)| acc | (((m >> c) & 1) << j));
    PlanarInstance {
        graph,
        vertex_ids: inst.vertex_ids.clone(),
        edge_ids: inst.edge_ids.clone(),
        edges: inst.edges.iter().map(|e| PlanarEdge { allowed: remask(e.allowed), ..*e }).collect(),
        rotation: inst.rotation.clone(),
        terminals: keep.iter().map(|&c| inst.terminals[c]).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::trace_faces;
    use super::*;

    #[test]
    fn normalized_instance_is_unchanged() {
        let inst = star4(&[(1, 2)]);
        assert_eq!(normalize_terminals(&inst).inst, inst);
    }

    #[test]
    fn shared_source_gets_two_pendants() {
        let inst = build(2, &[], &[(0, 1), (0, 2)], &[&[1, 2], &[-1], &[-2]], &[(0, 1), (0, 2)]);
        let n = normalize_terminals(&inst);
        assert_eq!(n.inst.vertex_count(), 5);
        let (r1, r2) = (n.inst.terminals[0].0, n.inst.terminals[1].0);
        assert!(r1 != r2 && r1 >= 3 && r2 >= 3);
        assert_eq!(n.inst.out_degree(r1), 1);
        assert_eq!(n.inst.edges[n.inst.rotation[r1][0].edge].allowed, 0b01);
        assert_eq!(n.inst.edges[n.inst.rotation[r2][0].edge].allowed, 0b10);
        // both pendants go in front of edge 0's tail end
        assert_eq!(n.inst.rotation[0].len(), 4);
        trace_faces(&n.inst).unwrap();
    }

    #[test]
    fn source_with_indegree_gets_pendant() {
        let inst = build(1, &[], &[(1, 0), (2, 0), (0, 3)], &[&[-1, -2, 3], &[1], &[2], &[-3]], &[(0, 3)]);
        let n = normalize_terminals(&inst);
        assert_eq!(n.inst.vertex_count(), 5);
        assert_eq!(n.inst.terminals[0], (4, 3));
        assert_eq!(n.inst.rotation[0][0], HalfEdge::head(3));
    }

    #[test]
    fn degree_four_becomes_circuit() {
        let inst = star4(&[(1, 2)]);
        let red = reduce_degree(&inst);
        assert_eq!(red.inst.vertex_count(), 8);
        assert_eq!(red.inst.edge_count(), 8);
        for v in [0, 5, 6, 7] {
            assert_eq!(red.inst.degree(v), 3);
        }
        assert_eq!(red.vertex_origin[5..], [Some(0), Some(0), Some(0)]);
        red.inst.validate().unwrap();
    }

    #[test]
    fn degree_three_unchanged() {
        let inst = build(1, &[], &[(0, 1), (1, 2), (1, 3)], &[&[1], &[-1, 2, 3], &[-2], &[-3]], &[(0, 2)]);
        assert_eq!(reduce_degree(&inst).inst, inst);
    }

    #[test]
    fn restriction_renumbers() {
        let mut inst = build(3, &[(1, 3), (2, 3)], &[(0, 1)], &[&[1], &[-1]], &[(0, 1), (0, 1), (0, 1)]);
        inst.edges[0].allowed = 0b101;
        let r = restrict_commodities(&inst, &[0, 2]);
        assert_eq!(r.k(), 2);
        assert_eq!(r.graph.pairs(), &[(1, 2)]);
        assert_eq!(r.edges[0].allowed, 0b11);
    }

    #[test]
    fn map_back_contracts_circuit() {
        let inst = star4(&[]);
        let red = reduce_degree(&inst);
        // commodity 1 enters c_0 via edge 0, walks the circuit to c_2 and leaves via edge 1
        let circuit: Vec<usize> = (4..8).collect();
        let p1 = Path { vertices: vec![1, 0, 5, 6, 3], edges: vec![0, circuit[0], circuit[1], 1] };
        let p2 = Path { vertices: vec![2, 5, 6, 7, 4], edges: vec![2, circuit[1], circuit[2], 3] };
        let back = red.map_back(&PathSolution { paths: vec![p1, p2] }, &inst);
        assert_eq!(back.paths[0], Path { vertices: vec![1, 0, 3], edges: vec![0, 1] });
        assert_eq!(back.paths[1], Path { vertices: vec![2, 0, 4], edges: vec![2, 3] });
    }
}
