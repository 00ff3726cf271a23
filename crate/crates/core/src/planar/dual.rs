use std::sync::Arc;

use crate::algebra::GroupElement;
use crate::cohomology::{CfpEdge, CfpInstance};
use crate::order::ClosedSet;

use super::{End, FaceStructure, PlanarInstance};

/// A nonplanar edge of the extended dual, from the face in corner `from`
/// to the face in corner `to` at `vertex` (corners indexed by rotation entry).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NonplanarEdge {
    pub vertex: usize,
    pub from: usize,
    pub to: usize,
}

/// The cohomology instance on the faces. Edge `e` of the instance is the
/// dual of primal edge `e`; the nonplanar edges follow.
#[derive(Debug, Clone)]
pub struct ExtendedDual {
    pub cfp: CfpInstance,
    pub nonplanar: Vec<NonplanarEdge>,
}

/// `∏ φ(e_j)^{σ_j}` over the edge ends met when turning clockwise at `v`
/// from corner `from` to corner `to`; `σ_j = +1` for edges leaving `v`.
pub fn nonplanar_label(inst: &PlanarInstance, phi: &[GroupElement], v: usize, from: usize, to: usize) -> GroupElement {
    let rot = &inst.rotation[v];
    let d = rot.len();
    let mut acc = GroupElement::identity(&inst.graph);
    let mut j = from;
    loop {
        j = (j + 1) % d;
        let h = rot[j];
        let x = &phi[h.edge];
        acc = match h.end {
            End::Tail => &acc * x,
            End::Head => &acc * &x.inverse(),
        };
        if j == to {
            return acc;
        }
    }
}

/// The signed product once around `v`.
pub fn vertex_product(inst: &PlanarInstance, phi: &[GroupElement], v: usize) -> GroupElement {
    let d = inst.rotation[v].len();
    if d == 0 {
        return GroupElement::identity(&inst.graph);
    }
    nonplanar_label(inst, phi, v, d - 1, d - 1)
}

/// Dual edges run from the left to the right face of their primal edge with
/// `H = StableProduct(K_e)`. For each non-terminal vertex and each ordered
/// pair of distinct corners a nonplanar edge with `H = SignedStableProduct`
/// over the commodities allowed on some incident edge. A pair is skipped
/// when its label is the inverse of the already emitted opposite pair, since
/// normalization adds that reverse anyway.
pub fn build_extended_dual(inst: &PlanarInstance, faces: &FaceStructure, phi: &[GroupElement]) -> ExtendedDual {
    let graph = Arc::clone(&inst.graph);
    let mut edges: Vec<CfpEdge> = inst
        .edges
        .iter()
        .enumerate()
        .map(|(e, pe)| CfpEdge {
            tail: faces.left_face(e),
            head: faces.right_face(e),
            phi: phi[e].clone(),
            allowed: ClosedSet::Stable(pe.allowed),
        })
        .collect();
    let mut nonplanar = Vec::new();
    for v in 0..inst.vertex_count() {
        if inst.is_terminal(v) {
            continue;
        }
        let rot = &inst.rotation[v];
        let d = rot.len();
        let allowed = ClosedSet::SignedStable(rot.iter().fold(0, |m, h| m | inst.edges[h.edge].allowed));
        let labels: Vec<Vec<GroupElement>> =
            (0..d).map(|a| (0..d).map(|b| if a == b { GroupElement::identity(&inst.graph) } else { nonplanar_label(inst, phi, v, a, b) }).collect()).collect();
        for a in 0..d {
            for b in 0..d {
                if a == b || (b < a && labels[b][a].inverse() == labels[a][b]) {
                    continue;
                }
                edges.push(CfpEdge {
                    tail: faces.corner_face(inst, v, a),
                    head: faces.corner_face(inst, v, b),
                    phi: labels[a][b].clone(),
                    allowed: allowed.clone(),
                });
                nonplanar.push(NonplanarEdge { vertex: v, from: a, to: b });
            }
        }
    }
    let cfp = CfpInstance { graph, vertex_count: faces.len(), edges };
    ExtendedDual { cfp, nonplanar }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::trace_faces;
    use super::*;

    fn phi_of(inst: &PlanarInstance, words: &[&str]) -> Vec<GroupElement> {
        words.iter().map(|w| GroupElement::parse(&inst.graph, w).unwrap()).collect()
    }

    #[test]
    fn sign_follows_edge_direction() {
        // vertex 1 of degree 3: edge 0 enters, edges 1 and 2 leave
        let inst = build(1, &[], &[(0, 1), (1, 2), (1, 3)], &[&[1], &[-1, 2, 3], &[-2], &[-3]], &[(0, 2)]);
        let phi = phi_of(&inst, &["g1", "g1", "1"]);
        assert_eq!(nonplanar_label(&inst, &phi, 1, 0, 1).to_string(), "g1");
        assert_eq!(nonplanar_label(&inst, &phi, 1, 2, 0).to_string(), "G1");
        assert!(vertex_product(&inst, &phi, 1).is_identity());
    }

    #[test]
    fn trivial_labels_give_trivial_duals() {
        let inst = star4(&[(1, 2)]);
        let faces = trace_faces(&inst).unwrap();
        let phi = phi_of(&inst, &["1", "1", "1", "1"]);
        let dual = build_extended_dual(&inst, &faces, &phi);
        assert!(dual.cfp.edges.iter().all(|e| e.phi.is_identity()));
        // one nonplanar edge per unordered corner pair at the centre
        assert_eq!(dual.nonplanar.len(), 6);
    }

    #[test]
    fn dual_edges_match_sides() {
        let inst = star4(&[]);
        let faces = trace_faces(&inst).unwrap();
        let phi = phi_of(&inst, &["g1", "g1", "g2", "g2"]);
        let dual = build_extended_dual(&inst, &faces, &phi);
        for e in 0..4 {
            assert_eq!(dual.cfp.edges[e].tail, faces.left_face(e));
            assert_eq!(dual.cfp.edges[e].head, faces.right_face(e));
            assert_eq!(dual.cfp.edges[e].allowed, ClosedSet::Stable(0b11));
        }
        // reversing the corner pair inverts the label when the vertex product is 1
        assert!(vertex_product(&inst, &phi, 0).is_identity());
        for a in 0..4 {
            for b in 0..4 {
                if a != b {
                    assert_eq!(nonplanar_label(&inst, &phi, 0, b, a), nonplanar_label(&inst, &phi, 0, a, b).inverse());
                }
            }
        }
    }
}
