//! The end-to-end decision procedure for planar instances.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicBool, Ordering};

use thiserror::Error;

use crate::algebra::GroupElement;
use crate::cohomology::{normalize_instance, solve_cfp, CfpOptions, CfpOutcome, InfeasibleReason};
use crate::homology::{CandidateStream, HomologyError};
use crate::par;
use crate::planar::{
    build_extended_dual, extract_paths, normalize_terminals, reduce_degree, restrict_commodities, trace_faces, validate_solution,
    vertex_product, ExtendedDual, FaceStructure, Lifted, Path, PathSolution, PlanarError, PlanarInstance,
};

/// Candidates handed to the workers at a time; fixed so that results do not
/// depend on the thread count.
const BATCH: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictMode {
    /// Multiplicities up to `2|E|`; exhaustion proves infeasibility.
    Strict,
    /// Multiplicities up to the configured cap; exhaustion is qualified.
    Fast,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub max_multiplicity: u32,
    pub max_iterations: Option<usize>,
    pub theoretical_cap: bool,
    pub candidate_limit: usize,
    pub mode: VerdictMode,
    pub jobs: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            max_multiplicity: 2,
            max_iterations: None,
            theoretical_cap: false,
            candidate_limit: 100_000,
            mode: VerdictMode::Fast,
            jobs: None,
        }
    }
}

impl RunConfig {
    fn parallel(&self) -> bool {
        self.jobs != Some(1)
    }

    /// Multiplicity bound used on an instance with `edges` edges.
    pub fn multiplicity_for(&self, edges: usize) -> u32 {
        let full = u32::try_from(2 * edges).unwrap_or(u32::MAX);
        match self.mode {
            VerdictMode::Strict => full,
            VerdictMode::Fast => full.min(self.max_multiplicity),
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Planar(#[from] PlanarError),
    #[error(transparent)]
    Homology(#[from] HomologyError),
}

/// Everything needed to re-check a feasible answer: the terminal-normalized
/// instance the dual was built on, the winning labeling `φ`, the face
/// labeling `f` and the resulting `ψ` on all dual edges. Words use the
/// generator numbering of `commodities` (original 1-based numbers).
#[derive(Debug, Clone)]
pub struct Certificate {
    pub commodities: Vec<usize>,
    pub instance: PlanarInstance,
    pub faces: FaceStructure,
    pub dual: ExtendedDual,
    pub phi: Vec<GroupElement>,
    pub f: Vec<GroupElement>,
    pub psi: Vec<GroupElement>,
}

#[derive(Debug, Clone)]
pub enum Verdict {
    Feasible(PathSolution),
    Infeasible,
    InfeasibleAtCap,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub verdict: Verdict,
    pub certificate: Option<Certificate>,
    pub multiplicity: u32,
    /// Candidates run through the cohomology solver (up to the winner).
    pub candidates_tried: usize,
    pub truncated: bool,
    pub cap_hits: bool,
}

/// A shortest `K`-respecting path for commodity `i`, if any.
fn bfs_path(inst: &PlanarInstance, i: usize) -> Option<Path> {
    let (r, s) = inst.terminals[i];
    let mut pred: Vec<Option<usize>> = vec![None; inst.vertex_count()];
    let mut seen = vec![false; inst.vertex_count()];
    let mut out_edges = vec![Vec::new(); inst.vertex_count()];
    for (e, edge) in inst.edges.iter().enumerate() {
        if edge.allowed & (1 << i) != 0 {
            out_edges[edge.tail].push(e);
        }
    }
    seen[r] = true;
    let mut queue = VecDeque::from([r]);
    while let Some(v) = queue.pop_front() {
        for &e in &out_edges[v] {
            let w = inst.edges[e].head;
            if !seen[w] {
                seen[w] = true;
                pred[w] = Some(e);
                queue.push_back(w);
            }
        }
    }
    if !seen[s] {
        return None;
    }
    let mut edges = Vec::new();
    let mut v = s;
    while v != r {
        let e = pred[v].expect("reached vertices have a predecessor");
        edges.push(e);
        v = inst.edges[e].tail;
    }
    edges.reverse();
    let mut vertices = vec![r];
    vertices.extend(edges.iter().map(|&e| inst.edges[e].head));
    Some(Path { vertices, edges })
}

struct Trial {
    solution: PathSolution,
    phi: Vec<GroupElement>,
    f: Vec<GroupElement>,
    psi: Vec<GroupElement>,
    dual: ExtendedDual,
}

fn try_candidate(
    lifted: &Lifted,
    faces: &FaceStructure,
    restricted: &PlanarInstance,
    phi: &[GroupElement],
    opts: &CfpOptions,
    capped: &AtomicBool,
) -> Option<Trial> {
    let inst = &lifted.inst;
    // a labeling homologous to χ of a path system multiplies to 1 around
    // every non-terminal vertex
    if (0..inst.vertex_count()).any(|v| !inst.is_terminal(v) && !vertex_product(inst, phi, v).is_identity()) {
        return None;
    }
    let dual = build_extended_dual(inst, faces, phi);
    let norm = normalize_instance(&dual.cfp);
    let sol = match solve_cfp(&norm, opts) {
        Ok(CfpOutcome::Feasible(sol)) => sol,
        Ok(CfpOutcome::Infeasible(InfeasibleReason::IterationCapExceeded)) => {
            capped.store(true, Ordering::Relaxed);
            return None;
        }
        _ => return None,
    };
    let paths = extract_paths(inst, &sol.psi[..inst.edge_count()]).ok()?;
    let back = lifted.map_back(&paths, restricted);
    validate_solution(restricted, &back).ok()?;
    Some(Trial { solution: back, phi: phi.to_vec(), f: sol.f, psi: sol.psi, dual })
}

/// Decides `inst`: validation, reachability, candidate enumeration and one
/// cohomology problem per candidate until a path system is found.
pub fn solve_pipeline(inst: &PlanarInstance, cfg: &RunConfig) -> Result<Report, PipelineError> {
    par::with_jobs(cfg.jobs, || run(inst, cfg))
}

fn run(inst: &PlanarInstance, cfg: &RunConfig) -> Result<Report, PipelineError> {
    inst.validate()?;
    let k = inst.k();
    let report = |verdict, multiplicity| Report {
        verdict,
        certificate: None,
        multiplicity,
        candidates_tried: 0,
        truncated: false,
        cap_hits: false,
    };
    let mut single: Vec<Option<Path>> = Vec::with_capacity(k);
    for i in 0..k {
        match bfs_path(inst, i) {
            Some(p) => single.push(Some(p)),
            None => return Ok(report(Verdict::Infeasible, 0)),
        }
    }
    let covered: Vec<usize> =
        (0..k).filter(|&i| inst.graph.pairs().iter().any(|&(a, b)| a == i + 1 || b == i + 1)).collect();
    if covered.is_empty() {
        let paths = single.into_iter().map(|p| p.expect("all reachable")).collect();
        return Ok(report(Verdict::Feasible(PathSolution { paths }), 0));
    }
    let restricted = restrict_commodities(inst, &covered);
    let lifted = normalize_terminals(&restricted);
    let faces = trace_faces(&lifted.inst)?;
    let multiplicity = cfg.multiplicity_for(reduce_degree(&lifted.inst).inst.edge_count());
    let mut stream = CandidateStream::new(&lifted.inst, multiplicity)?;
    let opts = CfpOptions { max_iterations: cfg.max_iterations, theoretical_cap: cfg.theoretical_cap, parallel: cfg.parallel() };
    let capped = AtomicBool::new(false);
    let mut tried = 0usize;
    let mut truncated = false;
    loop {
        let room = cfg.candidate_limit - tried;
        if room == 0 {
            truncated = !stream.next_batch(1).is_empty();
            break;
        }
        let batch = stream.next_batch(BATCH.min(room));
        if batch.is_empty() {
            break;
        }
        let found = par::find_first(cfg.parallel(), &batch, |phi| {
            try_candidate(&lifted, &faces, &restricted, phi, &opts, &capped)
        });
        if let Some((idx, trial)) = found {
            let mut paths: Vec<Path> = single.into_iter().map(|p| p.expect("all reachable")).collect();
            for (j, &c) in covered.iter().enumerate() {
                paths[c] = trial.solution.paths[j].clone();
            }
            let solution = PathSolution { paths };
            debug_assert!(validate_solution(inst, &solution).is_ok());
            let certificate = Certificate {
                commodities: covered.iter().map(|c| c + 1).collect(),
                instance: lifted.inst.clone(),
                faces,
                dual: trial.dual,
                phi: trial.phi,
                f: trial.f,
                psi: trial.psi,
            };
            return Ok(Report {
                verdict: Verdict::Feasible(solution),
                certificate: Some(certificate),
                multiplicity,
                candidates_tried: tried + idx + 1,
                truncated: false,
                cap_hits: capped.load(Ordering::Relaxed),
            });
        }
        tried += batch.len();
    }
    let cap_hits = capped.load(Ordering::Relaxed);
    let verdict = if cfg.mode == VerdictMode::Strict && !truncated && !cap_hits {
        Verdict::Infeasible
    } else {
        Verdict::InfeasibleAtCap
    };
    Ok(Report { verdict, certificate: None, multiplicity, candidates_tried: tried, truncated, cap_hits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planar::fixtures::{build, star4};

    fn feasible(r: &Report) -> bool {
        matches!(r.verdict, Verdict::Feasible(_))
    }

    #[test]
    fn single_commodity_path() {
        let inst = build(1, &[], &[(0, 1), (1, 2)], &[&[1], &[-1, 2], &[-2]], &[(0, 2)]);
        let r = solve_pipeline(&inst, &RunConfig::default()).unwrap();
        match r.verdict {
            Verdict::Feasible(sol) => assert_eq!(sol.paths[0].vertices, vec![0, 1, 2]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn no_conflicts_means_reachability() {
        let r = solve_pipeline(&star4(&[]), &RunConfig::default()).unwrap();
        assert!(feasible(&r));
        assert!(r.certificate.is_none());
    }

    #[test]
    fn crossing_at_a_vertex_is_infeasible() {
        let r = solve_pipeline(&star4(&[(1, 2)]), &RunConfig::default()).unwrap();
        assert!(matches!(r.verdict, Verdict::InfeasibleAtCap));
    }

    #[test]
    fn ladder_is_feasible_with_certificate() {
        let inst = build(
            2,
            &[(1, 2)],
            &[(0, 1), (1, 2), (3, 4), (4, 5), (1, 4)],
            &[&[1], &[-1, 2, 5], &[-2], &[3], &[-3, -5, 4], &[-4]],
            &[(0, 2), (3, 5)],
        );
        let r = solve_pipeline(&inst, &RunConfig::default()).unwrap();
        let Verdict::Feasible(sol) = &r.verdict else { panic!("{:?}", r.verdict) };
        validate_solution(&inst, sol).unwrap();
        let cert = r.certificate.unwrap();
        assert!(cert.dual.cfp.is_feasible_labeling(&cert.f));
        assert_eq!(cert.dual.cfp.cohomologous(&cert.f), cert.psi);
    }

    #[test]
    fn unreachable_sink_is_infeasible() {
        let inst = build(1, &[], &[(1, 0)], &[&[-1], &[1]], &[(0, 1)]);
        let r = solve_pipeline(&inst, &RunConfig { mode: VerdictMode::Strict, ..RunConfig::default() }).unwrap();
        assert!(matches!(r.verdict, Verdict::Infeasible));
    }
}
