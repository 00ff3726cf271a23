use thiserror::Error;

use crate::algebra::{GroupElement, Symbol};
use crate::planar::PlanarInstance;

use super::{Arm, MultiplicityTuple, PrunedTree};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReconstructionFailure {
    #[error("strand counts at vertex {0} admit no non-crossing pairing")]
    Split(usize),
    #[error("terminal of commodity {0} has no free strand")]
    Parity(usize),
    #[error("walk of commodity {0} does not reach its sink")]
    Walk(usize),
    #[error("strands of pair ({0}, {1}) are not all used by the two walks")]
    Coverage(usize, usize),
    #[error("class {0}: pair words do not merge")]
    Merge(usize),
}

/// Pairs between arms `(A, B, C)` at a degree-3 vertex as `(a, b, c)`:
/// `a` between B and C, `b` between C and A, `c` between A and B.
pub fn split_counts(na: u32, nb: u32, nc: u32) -> Option<(u32, u32, u32)> {
    let sum = na + nb + nc;
    if sum % 2 != 0 || na > nb + nc || nb > na + nc || nc > na + nb {
        return None;
    }
    Some(((nb + nc - na) / 2, (na + nc - nb) / 2, (na + nb - nc) / 2))
}

/// Merges words, each over the generators in its mask, into one word whose
/// projection on every mask is that word; the least available generator goes
/// first.
pub fn merge_words(parts: &[(u64, Vec<Symbol>)]) -> Option<Vec<Symbol>> {
    let union = parts.iter().fold(0u64, |m, (g, _)| m | g);
    let mut pos = vec![0usize; parts.len()];
    let mut out = Vec::new();
    loop {
        if parts.iter().zip(&pos).all(|((_, w), &p)| p == w.len()) {
            return Some(out);
        }
        let mut emitted = false;
        for gen in crate::order::mask_gens(union) {
            let bit = 1u64 << (gen - 1);
            let mut sym = None;
            let ok = parts.iter().zip(&pos).filter(|((m, _), _)| m & bit != 0).all(|((_, w), &p)| match w.get(p) {
                Some(&s) if s.generator() == gen && sym.is_none_or(|x| x == s) => {
                    sym = Some(s);
                    true
                }
                _ => false,
            });
            if let (true, Some(s)) = (ok, sym) {
                for ((m, _), p) in parts.iter().zip(pos.iter_mut()) {
                    if m & bit != 0 {
                        *p += 1;
                    }
                }
                out.push(s);
                emitted = true;
                break;
            }
        }
        if !emitted {
            return None;
        }
    }
}

/// Strand end `(strand, side)`, side 0 at the class start.
type StrandEnd = (usize, usize);

struct PairLayout<'a> {
    tree: &'a PrunedTree,
    counts: Vec<u32>,
    offset: Vec<usize>,
}

impl PairLayout<'_> {
    /// Strand end at position `p` counted left to right looking out along `arm`.
    fn end(&self, arm: Arm, p: u32) -> StrandEnd {
        let n = self.counts[arm.class];
        let (t, side) = if arm.at_start { (p, 0) } else { (n - 1 - p, 1) };
        (self.offset[arm.class] + t as usize, side)
    }

    fn class_of(&self, strand: usize) -> usize {
        self.offset.partition_point(|&o| o <= strand) - 1
    }
}

/// Class words of the two walks of a conflicting pair (0-based commodities),
/// or why the tuple does not describe them.
fn pair_words(tree: &PrunedTree, h: &MultiplicityTuple, i: usize, j: usize) -> Result<Vec<Vec<Symbol>>, ReconstructionFailure> {
    let c = tree.classes.len();
    let counts: Vec<u32> = (0..c).map(|x| h.h[i][x] + h.h[j][x]).collect();
    let mut offset = Vec::with_capacity(c + 1);
    let mut acc = 0usize;
    for &n in &counts {
        offset.push(acc);
        acc += n as usize;
    }
    offset.push(acc);
    let total = acc;
    let layout = PairLayout { tree, counts, offset };
    let mut partner: Vec<Option<StrandEnd>> = vec![None; 2 * total];
    let mut link = |a: StrandEnd, b: StrandEnd| {
        partner[2 * a.0 + a.1] = Some(b);
        partner[2 * b.0 + b.1] = Some(a);
    };
    for br in &layout.tree.branches {
        let [x, y, z] = br.arms;
        let (na, nb, nc) = (layout.counts[x.class], layout.counts[y.class], layout.counts[z.class]);
        let (a, b, cc) = split_counts(na, nb, nc).ok_or(ReconstructionFailure::Split(br.vertex))?;
        for q in 0..cc {
            link(layout.end(x, na - 1 - q), layout.end(y, q));
        }
        for q in 0..a {
            link(layout.end(y, nb - 1 - q), layout.end(z, q));
        }
        for q in 0..b {
            link(layout.end(z, nc - 1 - q), layout.end(x, q));
        }
    }
    let mut free: Vec<(usize, bool, StrandEnd)> = Vec::new();
    for leaf in &layout.tree.leaves {
        let n = layout.counts[leaf.arm.class];
        for p in 0..n / 2 {
            link(layout.end(leaf.arm, p), layout.end(leaf.arm, n - 1 - p));
        }
        if n % 2 == 1 {
            if leaf.commodity != i && leaf.commodity != j {
                return Err(ReconstructionFailure::Parity(leaf.commodity + 1));
            }
            free.push((leaf.commodity, leaf.source, layout.end(leaf.arm, n / 2)));
        }
    }
    let free_end = |comm: usize, source: bool| free.iter().find(|f| f.0 == comm && f.1 == source).map(|f| f.2);
    // per strand: (owner generator, runs along the class)
    let mut owner: Vec<Option<(usize, bool)>> = vec![None; total];
    for comm in [i, j] {
        let start = free_end(comm, true).ok_or(ReconstructionFailure::Parity(comm + 1))?;
        let sink = free_end(comm, false).ok_or(ReconstructionFailure::Parity(comm + 1))?;
        let mut at = start;
        loop {
            let (strand, side) = at;
            if owner[strand].is_some() {
                return Err(ReconstructionFailure::Walk(comm + 1));
            }
            owner[strand] = Some((comm + 1, side == 0));
            let exit = (strand, 1 - side);
            match partner[2 * exit.0 + exit.1] {
                Some(next) => at = next,
                None if exit == sink => break,
                None => return Err(ReconstructionFailure::Walk(comm + 1)),
            }
        }
    }
    let mut words = vec![Vec::new(); c];
    let mut seen = vec![[0u32; 2]; c];
    for (strand, o) in owner.iter().enumerate() {
        let (gen, forward) = o.ok_or(ReconstructionFailure::Coverage(i + 1, j + 1))?;
        let x = layout.class_of(strand);
        seen[x][usize::from(gen == j + 1)] += 1;
        words[x].push(Symbol::new(gen, if forward { 1 } else { -1 }));
    }
    for (x, s) in seen.iter().enumerate() {
        if s[0] != h.h[i][x] || s[1] != h.h[j][x] {
            return Err(ReconstructionFailure::Coverage(i + 1, j + 1));
        }
    }
    Ok(words)
}

/// Edge labels realizing `h` on the tree: per class the merge of the pair
/// words, read along each edge's direction; edges off `T_0` get 1.
pub fn reconstruct_phi(inst: &PlanarInstance, tree: &PrunedTree, h: &MultiplicityTuple) -> Result<Vec<GroupElement>, ReconstructionFailure> {
    let graph = &inst.graph;
    let mut per_pair = Vec::with_capacity(graph.pairs().len());
    for &(a, b) in graph.pairs() {
        per_pair.push(((1u64 << (a - 1)) | (1u64 << (b - 1)), pair_words(tree, h, a - 1, b - 1)?));
    }
    let mut phi = vec![GroupElement::identity(graph); inst.edge_count()];
    for (x, class) in tree.classes.iter().enumerate() {
        let parts: Vec<(u64, Vec<Symbol>)> = per_pair.iter().map(|(m, w)| (*m, w[x].clone())).collect();
        let merged = merge_words(&parts).ok_or(ReconstructionFailure::Merge(x))?;
        let along = GroupElement::from_valid(graph, &merged);
        let against = along.inverse();
        for &(e, forward) in &class.edges {
            phi[e] = if forward { along.clone() } else { against.clone() };
        }
    }
    Ok(phi)
}

#[cfg(test)]
mod tests {
    use super::super::{build_pruned_tree, enumerate_h_tuples};
    use super::*;
    use crate::planar::fixtures::{build, star4};
    use crate::planar::{normalize_terminals, reduce_degree};

    fn syms(text: &str) -> Vec<Symbol> {
        crate::algebra::parse_symbols(text).unwrap()
    }

    #[test]
    fn split_examples() {
        assert_eq!(split_counts(2, 1, 1), Some((0, 1, 1)));
        assert_eq!(split_counts(3, 1, 1), None);
        assert_eq!(split_counts(4, 1, 1), None);
        assert_eq!(split_counts(0, 0, 0), Some((0, 0, 0)));
    }

    #[test]
    fn merge_interleaves() {
        let m = merge_words(&[(0b011, syms("g1 g2 G1")), (0b110, syms("g2 g3"))]).unwrap();
        assert_eq!(m, syms("g1 g2 G1 g3"));
        // disagreeing order of g2 relative to g1 and g3
        assert_eq!(merge_words(&[(0b011, syms("g1 g2")), (0b110, syms("g2 g3")), (0b101, syms("g3 g1"))]), None);
        // a generator missing from one of its words
        assert_eq!(merge_words(&[(0b011, syms("g1")), (0b101, syms(""))]), None);
        assert_eq!(merge_words(&[]), Some(Vec::new()));
    }

    /// r1 -> a -> s1 above r2 -> b -> s2, with a -> b between them.
    fn ladder() -> PlanarInstance {
        build(
            2,
            &[(1, 2)],
            &[(0, 1), (1, 2), (3, 4), (4, 5), (1, 4)],
            &[&[1], &[-1, 2, 5], &[-2], &[3], &[-3, -5, 4], &[-4]],
            &[(0, 2), (3, 5)],
        )
    }

    #[test]
    fn ladder_straight_walks() {
        let inst = ladder();
        let tree = build_pruned_tree(&inst).unwrap();
        let built: Vec<Vec<String>> = enumerate_h_tuples(&tree, 2, 2)
            .filter_map(|h| reconstruct_phi(&inst, &tree, &h).ok())
            .map(|phi| phi.iter().map(|x| x.to_string()).collect())
            .collect();
        assert_eq!(built[0], ["g1", "g1", "g2", "g2", "1"]);
        // g2 may also wind around r1, giving g2 g1 G2 on its edge
        assert!(built.iter().any(|phi| phi[0] == "g2 g1 G2"));
    }

    #[test]
    fn interleaved_terminals_need_winding() {
        // terminals alternate around the star centre, so no tuple with
        // entries at most 1 gives non-crossing walks
        let inst = normalize_terminals(&star4(&[(1, 2)])).inst;
        let red = reduce_degree(&inst);
        let tree = build_pruned_tree(&red.inst).unwrap();
        assert!(enumerate_h_tuples(&tree, 2, 1).all(|h| reconstruct_phi(&red.inst, &tree, &h).is_err()));
    }
}
