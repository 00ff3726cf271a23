//! Seeded generator of small plane instances for cross-checking.

use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::ConflictGraph;
use crate::planar::{trace_faces, End, HalfEdge, Id, PlanarEdge, PlanarInstance};

#[derive(Debug, Clone, Copy)]
pub struct CorpusSpec {
    pub max_vertices: usize,
    pub max_edges: usize,
    pub commodities: &'static [usize],
    /// Chance that an instance restricts some edges with `K`.
    pub restrict_chance: f64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self { max_vertices: 8, max_edges: 14, commodities: &[2, 3], restrict_chance: 0.5 }
    }
}

/// `count` instances from `seed`; instance `i` depends only on `(seed, i)`.
pub fn generate(seed: u64, count: usize, spec: &CorpusSpec) -> Vec<PlanarInstance> {
    (0..count).map(|i| generate_one(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(i as u64), spec)).collect()
}

pub fn generate_one(seed: u64, spec: &CorpusSpec) -> PlanarInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(4.min(spec.max_vertices)..=spec.max_vertices);
    let mut edges: Vec<PlanarEdge> = Vec::new();
    let mut rotation: Vec<Vec<HalfEdge>> = vec![Vec::new()];
    let orient = |rng: &mut ChaCha8Rng, a: usize, b: usize| if rng.random_bool(0.5) { (a, b) } else { (b, a) };
    // random plane tree
    for v in 1..n {
        let p = rng.random_range(0..v);
        let (tail, head) = orient(&mut rng, p, v);
        let e = edges.len();
        edges.push(PlanarEdge { tail, head, allowed: 0 });
        let at_p = if tail == p { HalfEdge::tail(e) } else { HalfEdge::head(e) };
        let pos = rng.random_range(0..=rotation[p].len());
        rotation[p].insert(pos, at_p);
        rotation.push(vec![at_p.twin()]);
    }
    // chords inside faces
    let max_edges = spec.max_edges.min(3 * n - 6);
    let target = rng.random_range(n - 1..=max_edges.max(n - 1));
    let mut attempts = 0;
    while edges.len() < target && attempts < 200 {
        attempts += 1;
        let inst = assemble(&edges, &rotation, 1, &[], &[(0, 1)]);
        let Ok(faces) = trace_faces(&inst) else { break };
        let walk = faces.faces.choose(&mut rng).expect("at least one face").clone();
        if walk.len() < 3 {
            continue;
        }
        let a = rng.random_range(0..walk.len());
        let b = rng.random_range(0..walk.len());
        let dart_half = |d: usize| HalfEdge { edge: d / 2, end: if d % 2 == 0 { End::Tail } else { End::Head } };
        let (ha, hb) = (dart_half(walk[a]), dart_half(walk[b]));
        let (u, w) = (inst.vertex_of(ha), inst.vertex_of(hb));
        let (tail, head) = orient(&mut rng, u, w);
        if u == w || edges.iter().any(|e| e.tail == tail && e.head == head) {
            continue;
        }
        let e = edges.len();
        edges.push(PlanarEdge { tail, head, allowed: 0 });
        // the corner before each chosen dart belongs to this face
        for (v, h) in [(u, ha), (w, hb)] {
            let new = if tail == v { HalfEdge::tail(e) } else { HalfEdge::head(e) };
            let pos = rotation[v].iter().position(|&x| x == h).expect("dart leaves its vertex");
            rotation[v].insert(pos, new);
        }
    }
    let k = *spec.commodities.choose(&mut rng).expect("commodity choices");
    let full = (1u64 << k) - 1;
    let restrict = rng.random_bool(spec.restrict_chance);
    for e in &mut edges {
        e.allowed = if restrict && rng.random_bool(0.3) { rng.random_range(1..=full) } else { full };
    }
    let all_pairs: Vec<(usize, usize)> = (1..=k).flat_map(|i| (i + 1..=k).map(move |j| (i, j))).collect();
    let want = rng.random_range(1..=all_pairs.len().min(3));
    let pairs: Vec<(usize, usize)> = all_pairs.choose_multiple(&mut rng, want).copied().collect();
    // terminals avoid each other while vertices last, and each sink is drawn
    // among the vertices its source reaches when there are any
    let mut used = vec![false; n];
    let mut terminals = Vec::with_capacity(k);
    for i in 0..k {
        let free: Vec<usize> = (0..n).filter(|&v| !used[v]).collect();
        let r = *free.choose(&mut rng).unwrap_or(&rng.random_range(0..n));
        used[r] = true;
        let reach = reachable(&edges, n, r, 1 << i);
        let fresh: Vec<usize> = reach.iter().copied().filter(|&v| !used[v]).collect();
        let s = match (fresh.choose(&mut rng), reach.choose(&mut rng)) {
            (Some(&s), _) | (None, Some(&s)) => s,
            _ => (r + rng.random_range(1..n)) % n,
        };
        used[s] = true;
        terminals.push((r, s));
    }
    let inst = assemble(&edges, &rotation, k, &pairs, &terminals);
    debug_assert!(inst.validate().is_ok());
    inst
}

fn reachable(edges: &[PlanarEdge], n: usize, from: usize, mask: u64) -> Vec<usize> {
    let mut seen = vec![false; n];
    seen[from] = true;
    let mut stack = vec![from];
    while let Some(v) = stack.pop() {
        for e in edges.iter().filter(|e| e.tail == v && e.allowed & mask != 0) {
            if !seen[e.head] {
                seen[e.head] = true;
                stack.push(e.head);
            }
        }
    }
    (0..n).filter(|&v| v != from && seen[v]).collect()
}

fn assemble(edges: &[PlanarEdge], rotation: &[Vec<HalfEdge>], k: usize, pairs: &[(usize, usize)], terminals: &[(usize, usize)]) -> PlanarInstance {
    PlanarInstance {
        graph: Arc::new(ConflictGraph::new(k, pairs.iter().copied()).expect("pairs within range")),
        vertex_ids: (0..rotation.len()).map(Id::from).collect(),
        edge_ids: (0..edges.len()).map(|e| Id::Str(format!("e{e}"))).collect(),
        edges: edges.to_vec(),
        rotation: rotation.to_vec(),
        terminals: terminals.to_vec(),
    }
}
