//! Periodic lattices and their GF(2) chain complexes.
//!
//! Two cell complexes are built on the 3-torus:
//!
//! * [`ColorComplex`]: the tetrahedral decomposition of the body-centered
//!   cubic lattice. Coordinates are doubled so that the corner sublattice
//!   sits on even points and the center sublattice on odd points. Each
//!   tetrahedron is spanned by a corner-sublattice cubic edge and a
//!   perpendicular center-sublattice cubic edge crossing it.
//! * [`CubicComplex`]: the simple cubic lattice with vertices, edges,
//!   square faces and cubes.
//!
//! All cells are indexed lexicographically so runs are reproducible.

use crate::error::{Error, Result};
use crate::gf2::SparseGf2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::{BTreeSet, HashMap};

/// Vertex colors of the 4-colorable bcc complex. Corner-sublattice vertices
/// are red or green, center-sublattice vertices are blue or yellow.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Color {
    Red,
    Green,
    Blue,
    Yellow,
}

impl Color {
    pub const ALL: [Color; 4] = [Color::Red, Color::Green, Color::Blue, Color::Yellow];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeKind {
    /// Cubic edge of the corner sublattice (red-green).
    Corner { axis: usize },
    /// Cubic edge of the center sublattice (blue-yellow).
    Center { axis: usize },
    /// Edge between a corner vertex and an adjacent cube center.
    Connecting,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Vertex {
    /// Doubled integer coordinates in `0..2L`.
    pub coords: [usize; 3],
    pub color: Color,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Edge {
    /// Endpoints; for cubic edges the first one is the start and the second
    /// lies one step along `axis`.
    pub vertices: [usize; 2],
    pub kind: EdgeKind,
}

/// The 4-colored tetrahedral bcc complex with periodic boundaries.
#[derive(Clone, Debug)]
pub struct ColorComplex {
    linear_size: usize,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    tetrahedra: Vec<[usize; 4]>,
    tetrahedron_edges: Vec<[usize; 6]>,
    vertex_tetrahedra: Vec<Vec<usize>>,
    edge_tetrahedra: Vec<Vec<usize>>,
    vertex_edges: Vec<Vec<usize>>,
    vertex_lookup: HashMap<[usize; 3], usize>,
    corner_edge_lookup: HashMap<(usize, usize), usize>,
    triangle_count: usize,
}

fn wrap(x: isize, period: usize) -> usize {
    x.rem_euclid(period as isize) as usize
}

fn offset(c: [usize; 3], d: [isize; 3], period: usize) -> [usize; 3] {
    [
        wrap(c[0] as isize + d[0], period),
        wrap(c[1] as isize + d[1], period),
        wrap(c[2] as isize + d[2], period),
    ]
}

fn unit(axis: usize, step: isize) -> [isize; 3] {
    let mut d = [0; 3];
    d[axis] = step;
    d
}

fn add(a: [isize; 3], b: [isize; 3]) -> [isize; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn perpendicular(axis: usize) -> (usize, usize) {
    match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum EdgeKey {
    Cubic { start: usize, axis: usize },
    Connecting { corner: usize, center: usize },
}

impl ColorComplex {
    pub fn linear_size(&self) -> usize {
        self.linear_size
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn tetrahedra(&self) -> &[[usize; 4]] {
        &self.tetrahedra
    }

    pub fn tetrahedron_edges(&self) -> &[[usize; 6]] {
        &self.tetrahedron_edges
    }

    pub fn vertex_tetrahedra(&self, v: usize) -> &[usize] {
        &self.vertex_tetrahedra[v]
    }

    pub fn edge_tetrahedra(&self, e: usize) -> &[usize] {
        &self.edge_tetrahedra[e]
    }

    pub fn vertex_edges(&self, v: usize) -> &[usize] {
        &self.vertex_edges[v]
    }

    pub fn triangle_count(&self) -> usize {
        self.triangle_count
    }

    pub fn color(&self, v: usize) -> Color {
        self.vertices[v].color
    }

    pub fn vertex_at(&self, coords: [usize; 3]) -> Option<usize> {
        self.vertex_lookup.get(&coords).copied()
    }

    /// The other endpoint of edge `e` seen from vertex `v`.
    pub fn other_endpoint(&self, e: usize, v: usize) -> usize {
        let [a, b] = self.edges[e].vertices;
        if a == v {
            b
        } else {
            a
        }
    }

    /// Corner-sublattice cubic edge starting at cubic cell `cell` (the corner
    /// vertex at doubled coordinates `2 * cell`) along `axis`.
    pub fn corner_edge(&self, cell: [usize; 3], axis: usize) -> usize {
        let start = self.vertex_lookup[&[2 * cell[0], 2 * cell[1], 2 * cell[2]]];
        self.corner_edge_lookup[&(start, axis)]
    }

    /// Image of vertex `v` under a translation by one cubic cell along `axis`.
    pub fn translate_vertex(&self, v: usize, axis: usize) -> usize {
        let c = offset(self.vertices[v].coords, unit(axis, 2), 2 * self.linear_size);
        self.vertex_lookup[&c]
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.triangle_count as i64
            - self.tetrahedra.len() as i64
    }
}

/// Builds the periodic bcc tetrahedral complex with `linear_size` cubic
/// cells per axis. The size must be even so that the checkerboard coloring
/// of each sublattice is consistent across the periodic boundary.
pub fn build_bcc_complex(linear_size: usize) -> Result<ColorComplex> {
    if linear_size < 2 || linear_size % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "bcc linear size must be even and at least 2 (got {linear_size}); \
             odd sizes break the 4-coloring on the torus"
        )));
    }
    let l = linear_size;
    let period = 2 * l;

    let mut coords: Vec<[usize; 3]> = Vec::with_capacity(2 * l * l * l);
    for x in 0..period {
        for y in 0..period {
            for z in 0..period {
                if x % 2 == y % 2 && y % 2 == z % 2 {
                    coords.push([x, y, z]);
                }
            }
        }
    }
    let vertices: Vec<Vertex> = coords
        .iter()
        .map(|&c| {
            let parity = (c[0] / 2 + c[1] / 2 + c[2] / 2) % 2;
            let color = match (c[0] % 2 == 0, parity == 0) {
                (true, true) => Color::Red,
                (true, false) => Color::Green,
                (false, true) => Color::Blue,
                (false, false) => Color::Yellow,
            };
            Vertex { coords: c, color }
        })
        .collect();
    let vertex_lookup: HashMap<[usize; 3], usize> =
        coords.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let at = |c: [usize; 3]| vertex_lookup[&c];

    // Edges, collected with a geometric key and then sorted.
    let mut raw_edges: Vec<(EdgeKey, Edge)> = Vec::with_capacity(14 * l * l * l);
    for (v, vert) in vertices.iter().enumerate() {
        let is_corner = vert.coords[0] % 2 == 0;
        for axis in 0..3 {
            let w = at(offset(vert.coords, unit(axis, 2), period));
            let kind = if is_corner {
                EdgeKind::Corner { axis }
            } else {
                EdgeKind::Center { axis }
            };
            raw_edges.push((
                EdgeKey::Cubic { start: v, axis },
                Edge {
                    vertices: [v, w],
                    kind,
                },
            ));
        }
        if !is_corner {
            for dx in [-1, 1] {
                for dy in [-1, 1] {
                    for dz in [-1, 1] {
                        let c = at(offset(vert.coords, [dx, dy, dz], period));
                        raw_edges.push((
                            EdgeKey::Connecting { corner: c, center: v },
                            Edge {
                                vertices: [c, v],
                                kind: EdgeKind::Connecting,
                            },
                        ));
                    }
                }
            }
        }
    }
    raw_edges.sort_by_key(|(key, e)| {
        let [a, b] = e.vertices;
        let start = match key {
            EdgeKey::Cubic { start, .. } => *start,
            EdgeKey::Connecting { corner, .. } => *corner,
        };
        (a.min(b), a.max(b), start)
    });
    let edge_lookup: HashMap<EdgeKey, usize> = raw_edges
        .iter()
        .enumerate()
        .map(|(i, (k, _))| (*k, i))
        .collect();
    let edges: Vec<Edge> = raw_edges.into_iter().map(|(_, e)| e).collect();

    let mut corner_edge_lookup = HashMap::new();
    for (key, &idx) in &edge_lookup {
        if let EdgeKey::Cubic { start, axis } = *key {
            if vertices[start].coords[0] % 2 == 0 {
                corner_edge_lookup.insert((start, axis), idx);
            }
        }
    }

    // Tetrahedra: every corner cubic edge meets four perpendicular center
    // cubic edges around its midpoint.
    let mut raw_tets: Vec<([usize; 4], [usize; 6])> = Vec::with_capacity(12 * l * l * l);
    for (c0, vert) in vertices.iter().enumerate() {
        if vert.coords[0] % 2 != 0 {
            continue;
        }
        for axis in 0..3 {
            let c1 = at(offset(vert.coords, unit(axis, 2), period));
            let corner_edge = edge_lookup[&EdgeKey::Cubic { start: c0, axis }];
            let mid = unit(axis, 1);
            let (b, d) = perpendicular(axis);
            let mut center_edges: Vec<([isize; 3], usize)> = Vec::with_capacity(4);
            for s in [-1, 1] {
                center_edges.push((add(add(mid, unit(b, -1)), unit(d, s)), b));
                center_edges.push((add(add(mid, unit(d, -1)), unit(b, s)), d));
            }
            for (start_off, dir) in center_edges {
                let u0 = at(offset(vert.coords, start_off, period));
                let u1 = at(offset(vertices[u0].coords, unit(dir, 2), period));
                let center_edge = edge_lookup[&EdgeKey::Cubic {
                    start: u0,
                    axis: dir,
                }];
                let mut tv = [c0, c1, u0, u1];
                tv.sort_unstable();
                let mut te = [
                    corner_edge,
                    center_edge,
                    edge_lookup[&EdgeKey::Connecting { corner: c0, center: u0 }],
                    edge_lookup[&EdgeKey::Connecting { corner: c0, center: u1 }],
                    edge_lookup[&EdgeKey::Connecting { corner: c1, center: u0 }],
                    edge_lookup[&EdgeKey::Connecting { corner: c1, center: u1 }],
                ];
                te.sort_unstable();
                raw_tets.push((tv, te));
            }
        }
    }
    raw_tets.sort();
    debug_assert!(raw_tets.windows(2).all(|w| w[0].0 != w[1].0));
    let tetrahedra: Vec<[usize; 4]> = raw_tets.iter().map(|t| t.0).collect();
    let tetrahedron_edges: Vec<[usize; 6]> = raw_tets.iter().map(|t| t.1).collect();

    let mut vertex_tetrahedra = vec![Vec::new(); vertices.len()];
    for (t, tv) in tetrahedra.iter().enumerate() {
        for &v in tv {
            vertex_tetrahedra[v].push(t);
        }
    }
    let mut edge_tetrahedra = vec![Vec::new(); edges.len()];
    for (t, te) in tetrahedron_edges.iter().enumerate() {
        for &e in te {
            edge_tetrahedra[e].push(t);
        }
    }
    let mut vertex_edges = vec![Vec::new(); vertices.len()];
    for (e, edge) in edges.iter().enumerate() {
        vertex_edges[edge.vertices[0]].push(e);
        vertex_edges[edge.vertices[1]].push(e);
    }

    // Triangles are identified by their three edges; each tetrahedron has
    // four, each shared with one neighbouring tetrahedron.
    let mut triangles: BTreeSet<[usize; 3]> = BTreeSet::new();
    for te in &tetrahedron_edges {
        let ev: Vec<[usize; 2]> = te.iter().map(|&e| edges[e].vertices).collect();
        for i in 0..6 {
            for j in (i + 1)..6 {
                for k in (j + 1)..6 {
                    let mut deg: HashMap<usize, usize> = HashMap::new();
                    for idx in [i, j, k] {
                        for v in ev[idx] {
                            *deg.entry(v).or_default() += 1;
                        }
                    }
                    if deg.len() == 3 && deg.values().all(|&d| d == 2) {
                        triangles.insert([te[i], te[j], te[k]]);
                    }
                }
            }
        }
    }

    Ok(ColorComplex {
        linear_size,
        vertices,
        edges,
        tetrahedra,
        tetrahedron_edges,
        vertex_tetrahedra,
        edge_tetrahedra,
        vertex_edges,
        vertex_lookup,
        corner_edge_lookup,
        triangle_count: triangles.len(),
    })
}

/// Periodic simple cubic complex: vertices, edges, square faces and cubes.
///
/// Indexing: vertex `(x, y, z)` is `(x * L + y) * L + z`; edge `3v + a` starts
/// at `v` along axis `a`; face `3v + a` has normal `a` and corner `v`;
/// cube `v` has lowest corner `v`.
#[derive(Clone, Debug)]
pub struct CubicComplex {
    linear_size: usize,
    face_edges: Vec<[usize; 4]>,
    edge_faces: Vec<Vec<usize>>,
}

impl CubicComplex {
    pub fn linear_size(&self) -> usize {
        self.linear_size
    }

    pub fn num_vertices(&self) -> usize {
        self.linear_size.pow(3)
    }

    pub fn num_edges(&self) -> usize {
        3 * self.num_vertices()
    }

    pub fn num_faces(&self) -> usize {
        3 * self.num_vertices()
    }

    pub fn num_cubes(&self) -> usize {
        self.num_vertices()
    }

    pub fn vertex_index(&self, c: [usize; 3]) -> usize {
        let l = self.linear_size;
        ((c[0] % l) * l + (c[1] % l)) * l + (c[2] % l)
    }

    pub fn vertex_coords(&self, v: usize) -> [usize; 3] {
        let l = self.linear_size;
        [v / (l * l), (v / l) % l, v % l]
    }

    pub fn edge(&self, cell: [usize; 3], axis: usize) -> usize {
        3 * self.vertex_index(cell) + axis
    }

    pub fn face_edges(&self, f: usize) -> &[usize; 4] {
        &self.face_edges[f]
    }

    pub fn edge_faces(&self, e: usize) -> &[usize] {
        &self.edge_faces[e]
    }

    /// The six edges incident on vertex `v`.
    pub fn vertex_star(&self, v: usize) -> [usize; 6] {
        let c = self.vertex_coords(v);
        let l = self.linear_size as isize;
        let mut out = [0; 6];
        for a in 0..3 {
            out[2 * a] = 3 * v + a;
            let prev = offset(c, unit(a, -1), l as usize);
            out[2 * a + 1] = 3 * self.vertex_index(prev) + a;
        }
        out
    }

    /// The two cubes sharing face `f`.
    pub fn face_cubes(&self, f: usize) -> [usize; 2] {
        let v = f / 3;
        let a = f % 3;
        let prev = offset(self.vertex_coords(v), unit(a, -1), self.linear_size);
        [v, self.vertex_index(prev)]
    }
}

pub fn build_cubic_complex(linear_size: usize) -> Result<CubicComplex> {
    if linear_size < 2 {
        return Err(Error::InvalidParameter(format!(
            "cubic linear size must be at least 2 (got {linear_size})"
        )));
    }
    let l = linear_size;
    let n = l * l * l;
    let mut cx = CubicComplex {
        linear_size,
        face_edges: Vec::with_capacity(3 * n),
        edge_faces: vec![Vec::new(); 3 * n],
    };
    for v in 0..n {
        let c = cx.vertex_coords(v);
        for normal in 0..3 {
            let (b, d) = perpendicular(normal);
            let vb = cx.vertex_index(offset(c, unit(b, 1), l));
            let vd = cx.vertex_index(offset(c, unit(d, 1), l));
            let fe = [3 * v + b, 3 * v + d, 3 * vb + d, 3 * vd + b];
            cx.face_edges.push(fe);
        }
    }
    for (f, fe) in cx.face_edges.iter().enumerate() {
        for &e in fe {
            cx.edge_faces[e].push(f);
        }
    }
    Ok(cx)
}

/// A lattice complex of either family.
#[derive(Clone, Debug)]
pub enum Lattice {
    Bcc(ColorComplex),
    Cubic(CubicComplex),
}

impl Lattice {
    pub fn linear_size(&self) -> usize {
        match self {
            Lattice::Bcc(c) => c.linear_size(),
            Lattice::Cubic(c) => c.linear_size(),
        }
    }

    pub fn as_bcc(&self) -> Option<&ColorComplex> {
        match self {
            Lattice::Bcc(c) => Some(c),
            Lattice::Cubic(_) => None,
        }
    }

    pub fn as_cubic(&self) -> Option<&CubicComplex> {
        match self {
            Lattice::Cubic(c) => Some(c),
            Lattice::Bcc(_) => None,
        }
    }
}

/// Which chain complex to extract from a lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChainKind {
    /// bcc: B2 = vertices, B1 = tetrahedra, B0 = edges.
    XCorrection,
    /// bcc: B2 = edges, B1 = tetrahedra, B0 = vertices.
    ZCorrection,
    /// cubic: B2 = edges, B1 = square faces, B0 = cubes.
    Rpim,
    /// Hand-built complexes (toy codes).
    Custom,
}

/// `C2 --d2--> C1 --d1--> C0` over GF(2), with `d1 * d2 = 0`.
#[derive(Clone, Debug)]
pub struct ChainComplex {
    kind: ChainKind,
    boundary2: SparseGf2,
    boundary1: SparseGf2,
}

impl ChainComplex {
    /// Validates shapes and the chain condition.
    pub fn new(kind: ChainKind, boundary2: SparseGf2, boundary1: SparseGf2) -> Result<Self> {
        if boundary1.cols() != boundary2.rows() {
            return Err(Error::Structure(format!(
                "boundary maps do not compose: d2 has {} rows, d1 has {} columns",
                boundary2.rows(),
                boundary1.cols()
            )));
        }
        if !boundary1.compose(&boundary2).is_zero() {
            return Err(Error::Structure("d1 * d2 != 0".into()));
        }
        Ok(Self {
            kind,
            boundary2,
            boundary1,
        })
    }

    pub fn kind(&self) -> ChainKind {
        self.kind
    }

    /// |B2|: stabilizer generators, i.e. spins of the coupling model.
    pub fn dim2(&self) -> usize {
        self.boundary2.cols()
    }

    /// |B1|: qubits, i.e. interaction terms.
    pub fn dim1(&self) -> usize {
        self.boundary2.rows()
    }

    /// |B0|: syndrome bits.
    pub fn dim0(&self) -> usize {
        self.boundary1.rows()
    }

    pub fn boundary2(&self) -> &SparseGf2 {
        &self.boundary2
    }

    pub fn boundary1(&self) -> &SparseGf2 {
        &self.boundary1
    }
}

pub fn to_chain_complex(lattice: &Lattice, kind: ChainKind) -> Result<ChainComplex> {
    match (lattice, kind) {
        (Lattice::Bcc(cx), ChainKind::XCorrection) => {
            let d2 = SparseGf2::from_columns(
                cx.tetrahedra().len(),
                (0..cx.vertices().len())
                    .map(|v| cx.vertex_tetrahedra(v).to_vec())
                    .collect(),
            );
            let d1 = SparseGf2::from_columns(
                cx.edges().len(),
                cx.tetrahedron_edges().iter().map(|te| te.to_vec()).collect(),
            );
            ChainComplex::new(kind, d2, d1)
        }
        (Lattice::Bcc(cx), ChainKind::ZCorrection) => {
            let d2 = SparseGf2::from_columns(
                cx.tetrahedra().len(),
                (0..cx.edges().len())
                    .map(|e| cx.edge_tetrahedra(e).to_vec())
                    .collect(),
            );
            let d1 = SparseGf2::from_columns(
                cx.vertices().len(),
                cx.tetrahedra().iter().map(|tv| tv.to_vec()).collect(),
            );
            ChainComplex::new(kind, d2, d1)
        }
        (Lattice::Cubic(cx), ChainKind::Rpim) => {
            let d2 = SparseGf2::from_columns(
                cx.num_faces(),
                (0..cx.num_edges())
                    .map(|e| cx.edge_faces(e).to_vec())
                    .collect(),
            );
            let d1 = SparseGf2::from_columns(
                cx.num_cubes(),
                (0..cx.num_faces())
                    .map(|f| cx.face_cubes(f).to_vec())
                    .collect(),
            );
            ChainComplex::new(kind, d2, d1)
        }
        (lattice, kind) => Err(Error::InvalidParameter(format!(
            "chain kind {kind:?} is not defined on the {} lattice",
            match lattice {
                Lattice::Bcc(_) => "bcc",
                Lattice::Cubic(_) => "cubic",
            }
        ))),
    }
}

/// Compact description of a complex for golden-file comparisons.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexSummary {
    pub lattice: String,
    pub linear_size: usize,
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    /// Tetrahedra (bcc) or cubes (cubic).
    pub volumes: usize,
    pub euler_characteristic: i64,
    /// Vertex count per color; empty for the cubic lattice.
    pub color_histogram: Vec<usize>,
    pub incidence_checksum: String,
}

impl ComplexSummary {
    pub fn of(lattice: &Lattice) -> Self {
        let mut hasher = Sha256::new();
        match lattice {
            Lattice::Bcc(cx) => {
                for (tv, te) in cx.tetrahedra().iter().zip(cx.tetrahedron_edges()) {
                    for x in tv.iter().chain(te) {
                        hasher.update((*x as u64).to_le_bytes());
                    }
                }
                let mut hist = vec![0; 4];
                for v in cx.vertices() {
                    hist[v.color.index()] += 1;
                }
                ComplexSummary {
                    lattice: "bcc".into(),
                    linear_size: cx.linear_size(),
                    vertices: cx.vertices().len(),
                    edges: cx.edges().len(),
                    faces: cx.triangle_count(),
                    volumes: cx.tetrahedra().len(),
                    euler_characteristic: cx.euler_characteristic(),
                    color_histogram: hist,
                    incidence_checksum: hex(&hasher.finalize()),
                }
            }
            Lattice::Cubic(cx) => {
                for f in 0..cx.num_faces() {
                    for e in cx.face_edges(f) {
                        hasher.update((*e as u64).to_le_bytes());
                    }
                }
                ComplexSummary {
                    lattice: "cubic".into(),
                    linear_size: cx.linear_size(),
                    vertices: cx.num_vertices(),
                    edges: cx.num_edges(),
                    faces: cx.num_faces(),
                    volumes: cx.num_cubes(),
                    euler_characteristic: cx.num_vertices() as i64 - cx.num_edges() as i64
                        + cx.num_faces() as i64
                        - cx.num_cubes() as i64,
                    color_histogram: Vec::new(),
                    incidence_checksum: hex(&hasher.finalize()),
                }
            }
        }
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
