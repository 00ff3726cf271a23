//! Brute-force references: exhaustive path search for planar instances and
//! divisor and ball enumeration for the group algebra.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::sync::Arc;

use thiserror::Error;

use crate::algebra::{ConflictGraph, GroupElement, Symbol};
use crate::planar::{validate_solution, Path, PathSolution, PlanarInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_paths_per_commodity: usize,
    pub max_combination_nodes: usize,
    pub max_ball_radius: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self { max_paths_per_commodity: 100_000, max_combination_nodes: 10_000_000, max_ball_radius: 12 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleVerdict {
    Feasible(PathSolution),
    Infeasible,
    Unknown,
}

impl OracleVerdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Self::Feasible(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("length {len} exceeds the ball radius budget {max}")]
    Budget { len: usize, max: usize },
}

/// All simple directed `r -> s` paths admitting `commodity`, by DFS with
/// out-edges in edge-index order; `None` once more than `limit` are found.
pub fn simple_paths(inst: &PlanarInstance, commodity: usize, limit: usize) -> Option<Vec<Path>> {
    let mut out_edges = vec![Vec::new(); inst.vertex_count()];
    for (e, edge) in inst.edges.iter().enumerate() {
        if edge.allowed & (1 << commodity) != 0 {
            out_edges[edge.tail].push(e);
        }
    }
    let (r, s) = inst.terminals[commodity];
    let mut found = Vec::new();
    let mut on_path = vec![false; inst.vertex_count()];
    let mut vertices = vec![r];
    let mut edges = Vec::new();
    on_path[r] = true;
    fn dfs(
        inst: &PlanarInstance,
        out_edges: &[Vec<usize>],
        s: usize,
        limit: usize,
        on_path: &mut [bool],
        vertices: &mut Vec<usize>,
        edges: &mut Vec<usize>,
        found: &mut Vec<Path>,
    ) -> bool {
        let v = *vertices.last().expect("path starts at the source");
        if v == s {
            found.push(Path { vertices: vertices.clone(), edges: edges.clone() });
            return found.len() <= limit;
        }
        for &e in &out_edges[v] {
            let w = inst.edges[e].head;
            if on_path[w] {
                continue;
            }
            on_path[w] = true;
            vertices.push(w);
            edges.push(e);
            let ok = dfs(inst, out_edges, s, limit, on_path, vertices, edges, found);
            edges.pop();
            vertices.pop();
            on_path[w] = false;
            if !ok {
                return false;
            }
        }
        true
    }
    dfs(inst, &out_edges, s, limit, &mut on_path, &mut vertices, &mut edges, &mut found).then_some(found)
}

/// Exhaustive search: every commodity's simple paths, then backtracking over
/// combinations for `F`-disjointness. Exact unless a budget runs out.
pub fn brute_force_solve(inst: &PlanarInstance, budget: &OracleBudget) -> OracleVerdict {
    let k = inst.k();
    let mut options = Vec::with_capacity(k);
    for i in 0..k {
        match simple_paths(inst, i, budget.max_paths_per_commodity) {
            Some(p) if p.is_empty() => return OracleVerdict::Infeasible,
            Some(p) => options.push(p),
            None => return OracleVerdict::Unknown,
        }
    }
    let words = inst.vertex_count().div_ceil(64);
    let sets: Vec<Vec<Vec<u64>>> = options
        .iter()
        .map(|ps| {
            ps.iter()
                .map(|p| {
                    let mut b = vec![0u64; words];
                    for &v in &p.vertices {
                        b[v / 64] |= 1 << (v % 64);
                    }
                    b
                })
                .collect()
        })
        .collect();
    // fewest options first
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&i| (options[i].len(), i));
    let mut chosen = vec![usize::MAX; k];
    let mut nodes = 0usize;
    fn rec(
        depth: usize,
        order: &[usize],
        inst: &PlanarInstance,
        sets: &[Vec<Vec<u64>>],
        chosen: &mut [usize],
        nodes: &mut usize,
        max_nodes: usize,
    ) -> Option<bool> {
        if depth == order.len() {
            return Some(true);
        }
        let i = order[depth];
        for (p, set) in sets[i].iter().enumerate() {
            *nodes += 1;
            if *nodes > max_nodes {
                return None;
            }
            let clash = order[..depth].iter().any(|&j| {
                inst.graph.conflicts(i + 1, j + 1) && set.iter().zip(&sets[j][chosen[j]]).any(|(a, b)| a & b != 0)
            });
            if clash {
                continue;
            }
            chosen[i] = p;
            if rec(depth + 1, order, inst, sets, chosen, nodes, max_nodes)? {
                return Some(true);
            }
        }
        Some(false)
    }
    match rec(0, &order, inst, &sets, &mut chosen, &mut nodes, budget.max_combination_nodes) {
        None => OracleVerdict::Unknown,
        Some(false) => OracleVerdict::Infeasible,
        Some(true) => {
            let sol = PathSolution { paths: (0..k).map(|i| options[i][chosen[i]].clone()).collect() };
            debug_assert!(validate_solution(inst, &sol).is_ok());
            OracleVerdict::Feasible(sol)
        }
    }
}

/// All left divisors of `x`, grown from 1 by appending minimal symbols of the
/// remaining quotient.
pub fn enumerate_divisors(x: &GroupElement, budget: &OracleBudget) -> Result<BTreeSet<GroupElement>, OracleError> {
    if x.len() > budget.max_ball_radius {
        return Err(OracleError::Budget { len: x.len(), max: budget.max_ball_radius });
    }
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([GroupElement::identity(x.graph())]);
    while let Some(y) = queue.pop_front() {
        if seen.contains(&y) {
            continue;
        }
        let rest = &y.inverse() * x;
        for s in rest.minimal_symbols() {
            let next = &y * &GroupElement::from_valid(x.graph(), &[s]);
            if !seen.contains(&next) {
                queue.push_back(next);
            }
        }
        seen.insert(y);
    }
    Ok(seen)
}

/// Every element of length at most `radius`.
pub fn ball(graph: &Arc<ConflictGraph>, radius: usize, budget: &OracleBudget) -> Result<Vec<GroupElement>, OracleError> {
    if radius > budget.max_ball_radius {
        return Err(OracleError::Budget { len: radius, max: budget.max_ball_radius });
    }
    let symbols: Vec<Symbol> = (1..=graph.k()).flat_map(|g| [Symbol::pos(g), Symbol::neg(g)]).collect();
    let mut seen: HashSet<GroupElement> = HashSet::new();
    let mut layer = vec![GroupElement::identity(graph)];
    seen.insert(layer[0].clone());
    let mut all = layer.clone();
    for _ in 0..radius {
        let mut next = Vec::new();
        for x in &layer {
            for &s in &symbols {
                let y = x * &GroupElement::from_valid(graph, &[s]);
                if y.len() == x.len() + 1 && seen.insert(y.clone()) {
                    next.push(y);
                }
            }
        }
        all.extend(next.iter().cloned());
        layer = next;
    }
    all.sort();
    Ok(all)
}
