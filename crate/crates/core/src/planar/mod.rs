//! Embedded digraphs with terminals, and the constructions that turn a
//! candidate edge labeling into a cohomology instance on the faces.

mod dual;
mod extract;
mod faces;
mod normalize;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::ConflictGraph;

pub use dual::{build_extended_dual, nonplanar_label, vertex_product, ExtendedDual, NonplanarEdge};
pub use extract::{extract_paths, validate_solution, ExtractionFailure, Path, PathSolution, ValidationError};
pub use faces::{trace_faces, FaceStructure};
pub use normalize::{normalize_terminals, reduce_degree, restrict_commodities, Lifted};

/// A vertex or edge identifier as given in an input file.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Id {
    Num(i64),
    Str(String),
}

impl fmt::Display for Id {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Num(n) => write!(f, "{n}"),
            Self::Str(s) => f.write_str(s),
        }
    }
}

impl From<usize> for Id {
    fn from(n: usize) -> Self {
        Self::Num(n as i64)
    }
}

impl From<&str> for Id {
    fn from(s: &str) -> Self {
        Self::Str(s.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum End {
    Tail,
    Head,
}

/// One end of an edge, seen from the vertex it is attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfEdge {
    pub edge: usize,
    pub end: End,
}

impl HalfEdge {
    pub fn tail(edge: usize) -> Self {
        Self { edge, end: End::Tail }
    }

    pub fn head(edge: usize) -> Self {
        Self { edge, end: End::Head }
    }

    /// Dart leaving the attached vertex along this edge: `2e` forward, `2e+1` backward.
    pub fn dart(self) -> usize {
        2 * self.edge + usize::from(self.end == End::Head)
    }

    pub fn twin(self) -> Self {
        let end = if self.end == End::Tail { End::Head } else { End::Tail };
        Self { edge: self.edge, end }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlanarEdge {
    pub tail: usize,
    pub head: usize,
    /// Commodities allowed on the edge (bit `i-1` for commodity `i`).
    pub allowed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanarError {
    #[error("vertex {vertex}: rotation lists {found} of the edge ends attached to it, expected each exactly once")]
    Rotation { vertex: Id, found: String },
    #[error("expected {expected} terminal pairs, found {found}")]
    TerminalCount { expected: usize, found: usize },
    #[error("terminal {0} is not a vertex")]
    UnknownTerminal(String),
    #[error("edge {edge}: K mentions commodity {commodity} but k = {k}")]
    CommodityOutOfRange { edge: Id, commodity: usize, k: usize },
    #[error("Euler check failed: {vertices} - {edges} + {faces} != 2 (embedded graph is not connected and planar)")]
    Euler { vertices: usize, edges: usize, faces: usize },
    #[error("edge {edge}: endpoint index {vertex} out of range")]
    BadEndpoint { edge: usize, vertex: usize },
}

/// A plane digraph with commodities `1..=k`; commodity `i` routes from
/// `terminals[i-1].0` to `terminals[i-1].1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanarInstance {
    pub graph: Arc<ConflictGraph>,
    pub vertex_ids: Vec<Id>,
    pub edge_ids: Vec<Id>,
    pub edges: Vec<PlanarEdge>,
    /// Clockwise order of edge ends at each vertex.
    pub rotation: Vec<Vec<HalfEdge>>,
    pub terminals: Vec<(usize, usize)>,
}

impl PlanarInstance {
    pub fn k(&self) -> usize {
        self.graph.k()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_of(&self, h: HalfEdge) -> usize {
        let e = self.edges[h.edge];
        match h.end {
            End::Tail => e.tail,
            End::Head => e.head,
        }
    }

    pub fn degree(&self, v: usize) -> usize {
        self.rotation[v].len()
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.rotation[v].iter().filter(|h| h.end == End::Tail).count()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.rotation[v].iter().filter(|h| h.end == End::Head).count()
    }

    pub fn is_terminal(&self, v: usize) -> bool {
        self.terminals.iter().any(|&(r, s)| r == v || s == v)
    }

    pub fn full_mask(&self) -> u64 {
        if self.k() == 64 {
            u64::MAX
        } else {
            (1u64 << self.k()) - 1
        }
    }

    /// Checks the rotation system, terminals and `K` sets, then the Euler
    /// formula on the traced faces.
    pub fn validate(&self) -> Result<(), PlanarError> {
        let k = self.k();
        if self.terminals.len() != k {
            return Err(PlanarError::TerminalCount { expected: k, found: self.terminals.len() });
        }
        let n = self.vertex_count();
        for &(r, s) in &self.terminals {
            for t in [r, s] {
                if t >= n {
                    return Err(PlanarError::UnknownTerminal(t.to_string()));
                }
            }
        }
        for (i, e) in self.edges.iter().enumerate() {
            for v in [e.tail, e.head] {
                if v >= n {
                    return Err(PlanarError::BadEndpoint { edge: i, vertex: v });
                }
            }
            if e.allowed & !self.full_mask() != 0 {
                let commodity = 64 - e.allowed.leading_zeros() as usize;
                return Err(PlanarError::CommodityOutOfRange { edge: self.edge_ids[i].clone(), commodity, k });
            }
        }
        let mut expected: Vec<Vec<HalfEdge>> = vec![Vec::new(); n];
        for (i, e) in self.edges.iter().enumerate() {
            expected[e.tail].push(HalfEdge::tail(i));
            expected[e.head].push(HalfEdge::head(i));
        }
        for v in 0..n {
            let mut have = self.rotation[v].clone();
            have.sort();
            expected[v].sort();
            if have != expected[v] {
                let found = have.iter().map(|h| format!("{}:{:?}", self.edge_ids[h.edge], h.end)).collect::<Vec<_>>().join(",");
                return Err(PlanarError::Rotation { vertex: self.vertex_ids[v].clone(), found });
            }
        }
        trace_faces(self).map(|_| ())
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn validation_accepts_star() {
        star4(&[(1, 2)]).validate().unwrap();
    }

    #[test]
    fn validation_rejects_bad_rotation() {
        let mut inst = star4(&[(1, 2)]);
        inst.rotation[0].pop();
        assert!(matches!(inst.validate(), Err(PlanarError::Rotation { .. })));
    }

    #[test]
    fn validation_rejects_disconnected() {
        let inst = build(1, &[], &[(0, 1), (2, 3)], &[&[1], &[-1], &[2], &[-2]], &[(0, 1)]);
        assert!(matches!(inst.validate(), Err(PlanarError::Euler { .. })));
    }
}
