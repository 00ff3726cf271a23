use super::{End, HalfEdge, PlanarError, PlanarInstance};

/// Faces as closed dart walks. Dart `2e` runs along `e`, dart `2e+1` against
/// it; the face of a dart is the one on its left.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceStructure {
    pub faces: Vec<Vec<usize>>,
    pub face_of_dart: Vec<usize>,
    /// `position[v][h]`: index of half-edge `h` in the rotation at its vertex,
    /// stored per dart.
    position: Vec<usize>,
}

impl FaceStructure {
    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn left_face(&self, e: usize) -> usize {
        self.face_of_dart[2 * e]
    }

    pub fn right_face(&self, e: usize) -> usize {
        self.face_of_dart[2 * e + 1]
    }

    /// Face in the corner that follows rotation entry `j` at `v` clockwise.
    pub fn corner_face(&self, inst: &PlanarInstance, v: usize, j: usize) -> usize {
        let rot = &inst.rotation[v];
        self.face_of_dart[rot[(j + 1) % rot.len()].dart()]
    }

    pub fn rotation_index(&self, h: HalfEdge) -> usize {
        self.position[h.dart()]
    }
}

pub fn trace_faces(inst: &PlanarInstance) -> Result<FaceStructure, PlanarError> {
    let darts = 2 * inst.edge_count();
    let mut position = vec![0; darts];
    for rot in &inst.rotation {
        for (j, h) in rot.iter().enumerate() {
            position[h.dart()] = j;
        }
    }
    let next = |d: usize| {
        let h = HalfEdge { edge: d / 2, end: if d % 2 == 0 { End::Tail } else { End::Head } };
        let arrive = h.twin();
        let v = inst.vertex_of(arrive);
        let rot = &inst.rotation[v];
        rot[(position[arrive.dart()] + 1) % rot.len()].dart()
    };
    let mut face_of_dart = vec![usize::MAX; darts];
    let mut faces = Vec::new();
    for start in 0..darts {
        if face_of_dart[start] != usize::MAX {
            continue;
        }
        let id = faces.len();
        let mut walk = Vec::new();
        let mut d = start;
        while face_of_dart[d] == usize::MAX {
            face_of_dart[d] = id;
            walk.push(d);
            d = next(d);
        }
        faces.push(walk);
    }
    if faces.is_empty() && inst.vertex_count() == 1 {
        faces.push(Vec::new());
    }
    let (v, e, f) = (inst.vertex_count(), inst.edge_count(), faces.len());
    if v + f != e + 2 {
        return Err(PlanarError::Euler { vertices: v, edges: e, faces: f });
    }
    Ok(FaceStructure { faces, face_of_dart, position })
}
