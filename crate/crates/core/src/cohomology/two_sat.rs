//! 2-SAT through strongly connected components of the implication graph.

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lit {
    pub var: usize,
    pub positive: bool,
}

impl Lit {
    pub fn pos(var: usize) -> Self {
        Self { var, positive: true }
    }

    pub fn neg(var: usize) -> Self {
        Self { var, positive: false }
    }

    fn negate(self) -> Self {
        Self { var: self.var, positive: !self.positive }
    }

    fn node(self) -> NodeIndex {
        NodeIndex::new(2 * self.var + usize::from(!self.positive))
    }
}

#[derive(Debug, Clone, Default)]
pub struct TwoSat {
    vars: usize,
    clauses: Vec<(Lit, Lit)>,
}

impl TwoSat {
    pub fn new(vars: usize) -> Self {
        Self { vars, clauses: Vec::new() }
    }

    /// `a ∨ b`; pass the same literal twice for a unit clause.
    pub fn clause(&mut self, a: Lit, b: Lit) {
        self.clauses.push((a, b));
    }

    pub fn solve(&self) -> Option<Vec<bool>> {
        let mut g = DiGraph::<(), ()>::with_capacity(2 * self.vars, 2 * self.clauses.len());
        for _ in 0..2 * self.vars {
            g.add_node(());
        }
        for &(a, b) in &self.clauses {
            g.add_edge(a.negate().node(), b.node(), ());
            g.add_edge(b.negate().node(), a.node(), ());
        }
        // tarjan_scc yields components in reverse topological order
        let mut comp = vec![0usize; 2 * self.vars];
        for (c, scc) in tarjan_scc(&g).into_iter().enumerate() {
            for n in scc {
                comp[n.index()] = c;
            }
        }
        (0..self.vars)
            .map(|v| {
                let (p, n) = (comp[Lit::pos(v).node().index()], comp[Lit::neg(v).node().index()]);
                (p != n).then_some(p < n)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(vars: usize, clauses: &[(Lit, Lit)]) -> bool {
        (0u32..1 << vars).any(|m| {
            let val = |l: Lit| (m >> l.var & 1 == 1) == l.positive;
            clauses.iter().all(|&(a, b)| val(a) || val(b))
        })
    }

    #[test]
    fn unit_clauses_conflict() {
        let mut s = TwoSat::new(1);
        s.clause(Lit::pos(0), Lit::pos(0));
        s.clause(Lit::neg(0), Lit::neg(0));
        assert_eq!(s.solve(), None);
    }

    #[test]
    fn agrees_with_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let vars = rng.random_range(1..6);
            let n = rng.random_range(0..10);
            let lit = |rng: &mut rand_chacha::ChaCha8Rng| Lit { var: rng.random_range(0..vars), positive: rng.random() };
            let clauses: Vec<_> = (0..n).map(|_| (lit(&mut rng), lit(&mut rng))).collect();
            let mut s = TwoSat::new(vars);
            for &(a, b) in &clauses {
                s.clause(a, b);
            }
            match s.solve() {
                Some(assign) => {
                    assert!(clauses.iter().all(|&(a, b)| assign[a.var] == a.positive || assign[b.var] == b.positive))
                }
                None => assert!(!brute(vars, &clauses)),
            }
        }
    }
}
