//! Vertex-disjoint paths with conflicts in planar digraphs, decided through
//! graph-group cohomology.

pub mod algebra;
pub mod order;
pub mod cohomology;
pub mod par;
pub mod planar;
pub mod homology;
pub mod oracle;
pub mod pipeline;
pub mod io;
pub mod corpus;
