//! JSON instance files and result documents.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::algebra::{AlgebraError, ConflictGraph, GroupElement, Symbol};
use crate::cohomology::{CfpEdge, CfpError, CfpInstance};
use crate::oracle::OracleVerdict;
use crate::order::{ClosedSet, OrderError};
use crate::pipeline::{Certificate, Report, Verdict};
use crate::planar::{End, HalfEdge, Id, PathSolution, PlanarEdge, PlanarError, PlanarInstance};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("duplicate {what} id {id}")]
    Duplicate { what: &'static str, id: Id },
    #[error("unknown {what} id {id}")]
    Unknown { what: &'static str, id: Id },
    #[error("commodity {0} in a K list is not in 1..=k")]
    Commodity(usize),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Planar(#[from] PlanarError),
    #[error(transparent)]
    Cfp(#[from] CfpError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanarFile {
    pub k: usize,
    #[serde(rename = "F", default)]
    pub conflicts: Vec<[usize; 2]>,
    pub vertices: Vec<VertexEntry>,
    pub edges: Vec<EdgeEntry>,
    pub terminals: TerminalEntry,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VertexEntry {
    pub id: Id,
    pub rotation: Vec<(Id, End)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeEntry {
    pub id: Id,
    pub tail: Id,
    pub head: Id,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub allowed: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TerminalEntry {
    pub r: Vec<Id>,
    pub s: Vec<Id>,
}

fn index(ids: impl Iterator<Item = Id>, what: &'static str) -> Result<HashMap<Id, usize>, IoError> {
    let mut map = HashMap::new();
    for (i, id) in ids.enumerate() {
        if map.insert(id.clone(), i).is_some() {
            return Err(IoError::Duplicate { what, id });
        }
    }
    Ok(map)
}

fn lookup(map: &HashMap<Id, usize>, id: &Id, what: &'static str) -> Result<usize, IoError> {
    map.get(id).copied().ok_or_else(|| IoError::Unknown { what, id: id.clone() })
}

/// Parses and validates a planar instance document.
pub fn parse_planar(text: &str) -> Result<PlanarInstance, IoError> {
    let file: PlanarFile = serde_json::from_str(text)?;
    planar_from_file(&file)
}

pub fn planar_from_file(file: &PlanarFile) -> Result<PlanarInstance, IoError> {
    let graph = Arc::new(ConflictGraph::new(file.k, file.conflicts.iter().map(|p| (p[0], p[1])))?);
    let vmap = index(file.vertices.iter().map(|v| v.id.clone()), "vertex")?;
    let emap = index(file.edges.iter().map(|e| e.id.clone()), "edge")?;
    let full = if file.k == 64 { u64::MAX } else { (1u64 << file.k) - 1 };
    let mut edges = Vec::with_capacity(file.edges.len());
    for e in &file.edges {
        let allowed = match &e.allowed {
            None => full,
            Some(list) => {
                let mut m = 0u64;
                for &c in list {
                    if c == 0 || c > file.k {
                        return Err(IoError::Commodity(c));
                    }
                    m |= 1 << (c - 1);
                }
                m
            }
        };
        edges.push(PlanarEdge { tail: lookup(&vmap, &e.tail, "vertex")?, head: lookup(&vmap, &e.head, "vertex")?, allowed });
    }
    let mut rotation = Vec::with_capacity(file.vertices.len());
    for v in &file.vertices {
        let mut rot = Vec::with_capacity(v.rotation.len());
        for (id, end) in &v.rotation {
            rot.push(HalfEdge { edge: lookup(&emap, id, "edge")?, end: *end });
        }
        rotation.push(rot);
    }
    let t = &file.terminals;
    if t.r.len() != file.k || t.s.len() != file.k {
        return Err(PlanarError::TerminalCount { expected: file.k, found: t.r.len().min(t.s.len()) }.into());
    }
    let mut terminals = Vec::with_capacity(file.k);
    for (r, s) in t.r.iter().zip(&t.s) {
        let term = |id: &Id| vmap.get(id).copied().ok_or_else(|| PlanarError::UnknownTerminal(id.to_string()));
        terminals.push((term(r)?, term(s)?));
    }
    let inst = PlanarInstance {
        graph,
        vertex_ids: file.vertices.iter().map(|v| v.id.clone()).collect(),
        edge_ids: file.edges.iter().map(|e| e.id.clone()).collect(),
        edges,
        rotation,
        terminals,
    };
    inst.validate()?;
    Ok(inst)
}

pub fn planar_to_file(inst: &PlanarInstance) -> PlanarFile {
    let full = inst.full_mask();
    PlanarFile {
        k: inst.k(),
        conflicts: inst.graph.pairs().iter().map(|&(a, b)| [a, b]).collect(),
        vertices: inst
            .vertex_ids
            .iter()
            .zip(&inst.rotation)
            .map(|(id, rot)| VertexEntry { id: id.clone(), rotation: rot.iter().map(|h| (inst.edge_ids[h.edge].clone(), h.end)).collect() })
            .collect(),
        edges: inst
            .edges
            .iter()
            .zip(&inst.edge_ids)
            .map(|(e, id)| EdgeEntry {
                id: id.clone(),
                tail: inst.vertex_ids[e.tail].clone(),
                head: inst.vertex_ids[e.head].clone(),
                allowed: (e.allowed != full).then(|| crate::order::mask_gens(e.allowed)),
            })
            .collect(),
        terminals: TerminalEntry {
            r: inst.terminals.iter().map(|&(r, _)| inst.vertex_ids[r].clone()).collect(),
            s: inst.terminals.iter().map(|&(_, s)| inst.vertex_ids[s].clone()).collect(),
        },
    }
}

pub fn planar_to_json(inst: &PlanarInstance) -> String {
    serde_json::to_string_pretty(&planar_to_file(inst)).expect("plain data serializes")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CfpFile {
    pub k: usize,
    #[serde(rename = "F", default)]
    pub conflicts: Vec<[usize; 2]>,
    pub vertices: Vec<Id>,
    pub edges: Vec<CfpEdgeEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CfpEdgeEntry {
    pub id: Id,
    pub tail: Id,
    pub head: Id,
    pub phi: String,
    #[serde(rename = "H")]
    pub allowed: String,
}

/// A parsed CFP document with its vertex and edge ids.
#[derive(Debug, Clone)]
pub struct CfpDocument {
    pub instance: CfpInstance,
    pub vertex_ids: Vec<Id>,
    pub edge_ids: Vec<Id>,
}

pub fn parse_cfp(text: &str) -> Result<CfpDocument, IoError> {
    let file: CfpFile = serde_json::from_str(text)?;
    let graph = Arc::new(ConflictGraph::new(file.k, file.conflicts.iter().map(|p| (p[0], p[1])))?);
    let vmap = index(file.vertices.iter().cloned(), "vertex")?;
    index(file.edges.iter().map(|e| e.id.clone()), "edge")?;
    let mut edges = Vec::with_capacity(file.edges.len());
    for e in &file.edges {
        edges.push(CfpEdge {
            tail: lookup(&vmap, &e.tail, "vertex")?,
            head: lookup(&vmap, &e.head, "vertex")?,
            phi: GroupElement::parse(&graph, &e.phi)?,
            allowed: ClosedSet::parse(&e.allowed)?,
        });
    }
    let instance = CfpInstance::new(graph, file.vertices.len(), edges)?;
    Ok(CfpDocument { instance, vertex_ids: file.vertices, edge_ids: file.edges.iter().map(|e| e.id.clone()).collect() })
}

/// Word text with generator `j` printed as `names[j-1]`.
pub fn render_word(x: &GroupElement, names: &[usize]) -> String {
    if x.is_identity() {
        return "1".into();
    }
    x.word()
        .iter()
        .map(|s| Symbol::new(names[s.generator() - 1], s.sign()).to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn paths_json(inst: &PlanarInstance, sol: &PathSolution) -> Value {
    Value::Array(
        sol.paths
            .iter()
            .map(|p| Value::Array(p.vertices.iter().map(|&v| json!(inst.vertex_ids[v])).collect()))
            .collect(),
    )
}

fn certificate_json(cert: &Certificate) -> Value {
    let inst = &cert.instance;
    let names = &cert.commodities;
    let word = |x: &GroupElement| Value::String(render_word(x, names));
    let by_edge = |labels: &[GroupElement]| {
        let mut m = Map::new();
        for (e, x) in labels.iter().enumerate() {
            m.insert(inst.edge_ids[e].to_string(), word(x));
        }
        Value::Object(m)
    };
    let faces: Vec<Value> = cert
        .faces
        .faces
        .iter()
        .map(|walk| {
            Value::Array(
                walk.iter().map(|&d| json!([inst.edge_ids[d / 2], if d % 2 == 0 { "tail" } else { "head" }])).collect(),
            )
        })
        .collect();
    let m = inst.edge_count();
    let nonplanar: Vec<Value> = cert
        .dual
        .nonplanar
        .iter()
        .zip(&cert.psi[m..])
        .zip(&cert.dual.cfp.edges[m..])
        .map(|((np, psi), edge)| {
            json!({
                "vertex": inst.vertex_ids[np.vertex],
                "from": np.from,
                "to": np.to,
                "phi": word(&edge.phi),
                "psi": word(psi),
            })
        })
        .collect();
    json!({
        "commodities": names,
        "phi": by_edge(&cert.phi),
        "faces": faces,
        "f": cert.f.iter().map(word).collect::<Vec<_>>(),
        "psi": by_edge(&cert.psi[..m]),
        "nonplanar": nonplanar,
    })
}

pub fn report_json(inst: &PlanarInstance, report: &Report) -> Value {
    let mut out = Map::new();
    match &report.verdict {
        Verdict::Feasible(sol) => {
            out.insert("status".into(), json!("feasible"));
            out.insert("paths".into(), paths_json(inst, sol));
            if let Some(cert) = &report.certificate {
                out.insert("certificate".into(), certificate_json(cert));
            }
        }
        Verdict::Infeasible => {
            out.insert("status".into(), json!("infeasible"));
        }
        Verdict::InfeasibleAtCap => {
            out.insert("status".into(), json!("infeasible-at-cap"));
            out.insert("truncated".into(), json!(report.truncated));
            out.insert("cap_hits".into(), json!(report.cap_hits));
        }
    }
    out.insert("multiplicity".into(), json!(report.multiplicity));
    out.insert("candidates_tried".into(), json!(report.candidates_tried));
    Value::Object(out)
}

pub fn oracle_json(inst: &PlanarInstance, verdict: &OracleVerdict) -> Value {
    match verdict {
        OracleVerdict::Feasible(sol) => json!({"status": "feasible", "paths": paths_json(inst, sol)}),
        OracleVerdict::Infeasible => json!({"status": "infeasible"}),
        OracleVerdict::Unknown => json!({"status": "unknown"}),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planar::fixtures::star4;

    const TRIANGLE: &str = r#"{
        "k": 1, "F": [],
        "vertices": [
            {"id": "a", "rotation": [["ab", "tail"], ["ca", "head"]]},
            {"id": "b", "rotation": [["bc", "tail"], ["ab", "head"]]},
            {"id": "c", "rotation": [["ca", "tail"], ["bc", "head"]]}
        ],
        "edges": [
            {"id": "ab", "tail": "a", "head": "b"},
            {"id": "bc", "tail": "b", "head": "c", "K": [1]},
            {"id": "ca", "tail": "c", "head": "a"}
        ],
        "terminals": {"r": ["a"], "s": ["c"]}
    }"#;

    #[test]
    fn parses_triangle() {
        let inst = parse_planar(TRIANGLE).unwrap();
        assert_eq!(inst.edge_count(), 3);
        assert_eq!(inst.terminals, vec![(0, 2)]);
        assert_eq!(inst.rotation[0], vec![HalfEdge::tail(0), HalfEdge::head(2)]);
    }

    #[test]
    fn round_trip() {
        let inst = star4(&[(1, 2)]);
        let back = parse_planar(&planar_to_json(&inst)).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn bad_references() {
        let text = TRIANGLE.replace(r#"["ca", "head"]]"#, r#"["zz", "head"]]"#);
        assert!(matches!(parse_planar(&text), Err(IoError::Unknown { what: "edge", .. })));
        let text = TRIANGLE.replace(r#""K": [1]"#, r#""K": [2]"#);
        assert!(matches!(parse_planar(&text), Err(IoError::Commodity(2))));
    }

    #[test]
    fn parses_cfp() {
        let text = r#"{"k": 2, "F": [[1, 2]], "vertices": [0, 1],
            "edges": [{"id": "e", "tail": 0, "head": 1, "phi": "g1 G2", "H": "stable(1,2)"}]}"#;
        let doc = parse_cfp(text).unwrap();
        assert_eq!(doc.instance.edges[0].phi.to_string(), "g1 G2");
        assert_eq!(doc.instance.edges[0].allowed, ClosedSet::Stable(0b11));
    }

    #[test]
    fn renamed_words() {
        let g = Arc::new(ConflictGraph::parse("k=2; F={1-2}").unwrap());
        let x = GroupElement::parse(&g, "g1 G2").unwrap();
        assert_eq!(render_word(&x, &[2, 3]), "g2 G3");
    }
}
