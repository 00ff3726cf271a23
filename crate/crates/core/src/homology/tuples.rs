use super::PrunedTree;

/// `h[i][c]`: how many times commodity `i` (0-based) runs along class `c`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiplicityTuple {
    pub h: Vec<Vec<u32>>,
}

/// Per-commodity assignments satisfying the leaf parities and the
/// branch-vertex triangle conditions, sorted by total then lexicographically.
fn commodity_assignments(tree: &PrunedTree, commodity: usize, max: u32) -> Vec<Vec<u32>> {
    let c = tree.classes.len();
    let mut parity: Vec<Option<u32>> = vec![None; c];
    for leaf in &tree.leaves {
        let odd = u32::from(leaf.commodity == commodity);
        match parity[leaf.arm.class] {
            Some(p) if p != odd => return Vec::new(),
            _ => parity[leaf.arm.class] = Some(odd),
        }
    }
    // branch constraints become checkable once their highest class is set
    let mut checks: Vec<Vec<[usize; 3]>> = vec![Vec::new(); c];
    for b in &tree.branches {
        let cls = [b.arms[0].class, b.arms[1].class, b.arms[2].class];
        checks[*cls.iter().max().expect("three arms")].push(cls);
    }
    let mut out = Vec::new();
    let mut cur = vec![0u32; c];
    fn rec(j: usize, cur: &mut Vec<u32>, parity: &[Option<u32>], checks: &[Vec<[usize; 3]>], max: u32, out: &mut Vec<Vec<u32>>) {
        if j == cur.len() {
            out.push(cur.clone());
            return;
        }
        for x in 0..=max {
            if parity[j].is_some_and(|p| x % 2 != p) {
                continue;
            }
            cur[j] = x;
            let ok = checks[j].iter().all(|&[a, b, c]| {
                let (a, b, c) = (cur[a], cur[b], cur[c]);
                (a + b + c) % 2 == 0 && a <= b + c && b <= a + c && c <= a + b
            });
            if ok {
                rec(j + 1, cur, parity, checks, max, out);
            }
        }
    }
    rec(0, &mut cur, &parity, &checks, max, &mut out);
    out.sort_by_key(|h| (h.iter().sum::<u32>(), h.clone()));
    out
}

/// Lazy product of the per-commodity assignment lists.
#[derive(Debug, Clone)]
pub struct HTuples {
    lists: Vec<Vec<Vec<u32>>>,
    index: Vec<usize>,
    done: bool,
}

impl HTuples {
    /// Number of tuples in the full product.
    pub fn total(&self) -> u128 {
        self.lists.iter().map(|l| l.len() as u128).product()
    }
}

impl Iterator for HTuples {
    type Item = MultiplicityTuple;

    fn next(&mut self) -> Option<MultiplicityTuple> {
        if self.done {
            return None;
        }
        let h = self.lists.iter().zip(&self.index).map(|(l, &i)| l[i].clone()).collect();
        self.done = true;
        for p in (0..self.index.len()).rev() {
            self.index[p] += 1;
            if self.index[p] < self.lists[p].len() {
                self.done = false;
                break;
            }
            self.index[p] = 0;
        }
        Some(MultiplicityTuple { h })
    }
}

/// All tuples with entries in `0..=max`.
pub fn enumerate_h_tuples(tree: &PrunedTree, k: usize, max: u32) -> HTuples {
    let lists: Vec<Vec<Vec<u32>>> = (0..k).map(|i| commodity_assignments(tree, i, max)).collect();
    let done = lists.is_empty() || lists.iter().any(|l| l.is_empty());
    HTuples { index: vec![0; lists.len()], lists, done }
}

#[cfg(test)]
mod tests {
    use super::super::{build_pruned_tree, Arm, Branch, Leaf, PathClass};
    use super::*;
    use crate::planar::fixtures::build;

    fn path_tree() -> PrunedTree {
        let inst = build(1, &[], &[(0, 1), (1, 2)], &[&[1], &[-1, 2], &[-2]], &[(0, 2)]);
        build_pruned_tree(&inst).unwrap()
    }

    #[test]
    fn single_path_counts() {
        let t = path_tree();
        let all: Vec<_> = enumerate_h_tuples(&t, 1, 2).collect();
        assert_eq!(all, vec![MultiplicityTuple { h: vec![vec![1]] }]);
        assert_eq!(enumerate_h_tuples(&t, 1, 3).count(), 2);
        assert_eq!(enumerate_h_tuples(&t, 1, 0).count(), 0);
    }

    fn tripod(owner: [usize; 3]) -> PrunedTree {
        let arm = |class| Arm { class, at_start: false };
        PrunedTree {
            tree_edges: vec![0, 1, 2],
            in_t0: vec![true; 3],
            classes: (0..3).map(|c| PathClass { start: c + 1, end: 0, edges: vec![(c, true)] }).collect(),
            branches: vec![Branch { vertex: 0, arms: [arm(0), arm(1), arm(2)] }],
            leaves: (0..3).map(|c| Leaf { vertex: c + 1, commodity: owner[c], source: c == 0, arm: Arm { class: c, at_start: true } }).collect(),
        }
    }

    #[test]
    fn triangle_and_parity() {
        let t = tripod([0, 0, 1]);
        for h in commodity_assignments(&t, 0, 3) {
            assert!(h[0] % 2 == 1 && h[1] % 2 == 1 && h[2] % 2 == 0);
            assert!(h[0] <= h[1] + h[2] && h[1] <= h[0] + h[2] && h[2] <= h[0] + h[1]);
        }
        assert!(commodity_assignments(&t, 0, 3).contains(&vec![1, 1, 0]));
        assert!(!commodity_assignments(&t, 0, 3).contains(&vec![3, 1, 0]));
    }
}
