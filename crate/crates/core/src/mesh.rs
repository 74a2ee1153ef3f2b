//! Simplicial meshes of intervals (1D) and triangles (2D).
//!
//! Points are always stored as `[x, y]`; 1D meshes keep `y = 0`.

use std::collections::HashMap;
use std::io::Write;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FacetKind {
    Interior,
    Boundary,
}

#[derive(Clone, Debug)]
pub struct Facet {
    /// Two vertices in 2D (ordered along the first element's boundary), one in 1D.
    pub vertex_ids: Vec<usize>,
    /// First (lower-indexed) element and, for interior facets, the neighbour.
    pub elements: (usize, Option<usize>),
    /// Unit normal pointing out of `elements.0`.
    pub normal: Point,
    /// Length in 2D, 1 in 1D.
    pub measure: f64,
    pub kind: FacetKind,
}

/// Adjacency and orientation of a facet as seen by jump/average operators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TracePair {
    pub plus: usize,
    pub minus: Option<usize>,
    /// Outward normal of `plus`.
    pub normal: Point,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    dim: usize,
    vertices: Vec<Point>,
    elements: Vec<Vec<usize>>,
    facets: Vec<Facet>,
    element_facets: Vec<Vec<usize>>,
    boundary_facet_ids: Vec<usize>,
    parents: Option<Vec<usize>>,
    h_max: f64,
}

impl Mesh {
    /// Builds a mesh and its facet structure from vertices and positively
    /// oriented elements.
    pub fn new(dim: usize, vertices: Vec<Point>, elements: Vec<Vec<usize>>) -> Result<Self> {
        Self::with_parents(dim, vertices, elements, None)
    }

    fn with_parents(
        dim: usize,
        vertices: Vec<Point>,
        elements: Vec<Vec<usize>>,
        parents: Option<Vec<usize>>,
    ) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidMesh(format!("unsupported dimension {dim}")));
        }
        for (e, el) in elements.iter().enumerate() {
            if el.len() != dim + 1 || el.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidMesh(format!(
                    "element {e} has invalid connectivity"
                )));
            }
        }
        let mut mesh = Self {
            dim,
            vertices,
            elements,
            facets: Vec::new(),
            element_facets: Vec::new(),
            boundary_facet_ids: Vec::new(),
            parents,
            h_max: 0.0,
        };
        for e in 0..mesh.num_elements() {
            if mesh.element_measure(e) <= 0.0 {
                return Err(Error::InvalidMesh(format!(
                    "element {e} is not positively oriented"
                )));
            }
        }
        mesh.build_facets()?;
        mesh.h_max = (0..mesh.num_elements())
            .map(|e| mesh.element_diameter(e))
            .fold(0.0, f64::max);
        Ok(mesh)
    }

    fn build_facets(&mut self) -> Result<()> {
        let mut lookup: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut facets: Vec<Facet> = Vec::new();
        let mut element_facets = Vec::with_capacity(self.elements.len());
        for (e, el) in self.elements.iter().enumerate() {
            let local: Vec<(Vec<usize>, Point, f64)> = match self.dim {
                1 => vec![
                    (vec![el[0]], [-1.0, 0.0], 1.0),
                    (vec![el[1]], [1.0, 0.0], 1.0),
                ],
                _ => (0..3)
                    .map(|k| {
                        let (a, b) = (el[k], el[(k + 1) % 3]);
                        let (pa, pb) = (self.vertices[a], self.vertices[b]);
                        let t = [pb[0] - pa[0], pb[1] - pa[1]];
                        let len = t[0].hypot(t[1]);
                        (vec![a, b], [t[1] / len, -t[0] / len], len)
                    })
                    .collect(),
            };
            let mut ids = Vec::with_capacity(local.len());
            for (verts, normal, measure) in local {
                let mut key = verts.clone();
                key.sort_unstable();
                match lookup.get(&key) {
                    Some(&f) => {
                        let facet = &mut facets[f];
                        if facet.elements.1.is_some() {
                            return Err(Error::InvalidMesh(format!(
                                "facet {key:?} shared by more than two elements"
                            )));
                        }
                        facet.elements.1 = Some(e);
                        facet.kind = FacetKind::Interior;
                        ids.push(f);
                    }
                    None => {
                        lookup.insert(key, facets.len());
                        ids.push(facets.len());
                        facets.push(Facet {
                            vertex_ids: verts,
                            elements: (e, None),
                            normal,
                            measure,
                            kind: FacetKind::Boundary,
                        });
                    }
                }
            }
            element_facets.push(ids);
        }
        self.boundary_facet_ids = facets
            .iter()
            .enumerate()
            .filter(|(_, f)| f.kind == FacetKind::Boundary)
            .map(|(i, _)| i)
            .collect();
        self.facets = facets;
        self.element_facets = element_facets;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn elements(&self) -> &[Vec<usize>] {
        &self.elements
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn facet(&self, id: usize) -> Result<&Facet> {
        self.facets.get(id).ok_or(Error::UnknownFacet(id))
    }

    pub fn boundary_facet_ids(&self) -> &[usize] {
        &self.boundary_facet_ids
    }

    pub fn element_facets(&self, e: usize) -> &[usize] {
        &self.element_facets[e]
    }

    /// Parent element of each element, when this mesh came from [`refine`].
    pub fn parents(&self) -> Option<&[usize]> {
        self.parents.as_deref()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn num_facets(&self) -> usize {
        self.facets.len()
    }

    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    pub fn element_points(&self, e: usize) -> Vec<Point> {
        self.elements[e].iter().map(|&v| self.vertices[v]).collect()
    }

    /// Signed length or area.
    pub fn element_measure(&self, e: usize) -> f64 {
        let p = self.element_points(e);
        match self.dim {
            1 => p[1][0] - p[0][0],
            _ => {
                0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1])
                    - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]))
            }
        }
    }

    /// Longest edge (2D) or length (1D).
    pub fn element_diameter(&self, e: usize) -> f64 {
        let p = self.element_points(e);
        let mut d: f64 = 0.0;
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                d = d.max((p[i][0] - p[j][0]).hypot(p[i][1] - p[j][1]));
            }
        }
        d
    }

    pub fn element_centroid(&self, e: usize) -> Point {
        let p = self.element_points(e);
        let n = p.len() as f64;
        [
            p.iter().map(|q| q[0]).sum::<f64>() / n,
            p.iter().map(|q| q[1]).sum::<f64>() / n,
        ]
    }

    /// Length scale used by penalty terms on a facet: mean diameter of the
    /// adjacent elements.
    pub fn facet_h(&self, id: usize) -> f64 {
        let f = &self.facets[id];
        match f.elements.1 {
            Some(other) => {
                0.5 * (self.element_diameter(f.elements.0) + self.element_diameter(other))
            }
            None => self.element_diameter(f.elements.0),
        }
    }

    pub fn facet_trace_pair(&self, id: usize) -> Result<TracePair> {
        let f = self.facet(id)?;
        Ok(TracePair {
            plus: f.elements.0,
            minus: f.elements.1,
            normal: f.normal,
        })
    }

    /// Plain-text dump: `dim nv ne`, vertex lines, element lines (0-based).
    pub fn write_dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "{} {} {}",
            self.dim,
            self.num_vertices(),
            self.num_elements()
        )?;
        for v in &self.vertices {
            match self.dim {
                1 => writeln!(w, "{}", v[0])?,
                _ => writeln!(w, "{} {}", v[0], v[1])?,
            }
        }
        for el in &self.elements {
            let line: Vec<String> = el.iter().map(usize::to_string).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

/// `(0,1)²` split into `nx × ny` rectangles, each cut along its
/// lower-left to upper-right diagonal.
pub fn rectangle_mesh(nx: usize, ny: usize) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidMesh(
            "need at least one cell per direction".into(),
        ));
    }
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([i as f64 / nx as f64, j as f64 / ny as f64]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut elements = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (v00, v10, v01, v11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
            elements.push(vec![v00, v10, v11]);
            elements.push(vec![v00, v11, v01]);
        }
    }
    Mesh::new(2, vertices, elements)
}

pub fn unit_square_mesh(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidMesh("unit_square_mesh needs n >= 1".into()));
    }
    rectangle_mesh(n, n)
}

pub fn interval_mesh(a: f64, b: f64, n: usize) -> Result<Mesh> {
    if a.is_nan() || b.is_nan() || a >= b || n == 0 {
        return Err(Error::InvalidMesh(format!(
            "interval ({a}, {b}) with {n} elements"
        )));
    }
    let vertices = (0..=n)
        .map(|i| [a + (b - a) * i as f64 / n as f64, 0.0])
        .collect();
    let elements = (0..n).map(|i| vec![i, i + 1]).collect();
    Mesh::new(1, vertices, elements)
}

/// Uniform refinement: triangles into four congruent children through the
/// edge midpoints, intervals into two halves. Children of element `e` are
/// numbered consecutively from `4e` (2D) or `2e` (1D).
pub fn refine(mesh: &Mesh) -> Mesh {
    let mut vertices = mesh.vertices.clone();
    let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
    let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Point>| -> usize {
        let key = (a.min(b), a.max(b));
        *midpoints.entry(key).or_insert_with(|| {
            let (pa, pb) = (vertices[a], vertices[b]);
            vertices.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
            vertices.len() - 1
        })
    };
    let mut elements = Vec::new();
    let mut parents = Vec::new();
    for (e, el) in mesh.elements.iter().enumerate() {
        match mesh.dim {
            1 => {
                let m = midpoint(el[0], el[1], &mut vertices);
                elements.push(vec![el[0], m]);
                elements.push(vec![m, el[1]]);
                parents.extend([e, e]);
            }
            _ => {
                let (v0, v1, v2) = (el[0], el[1], el[2]);
                let m01 = midpoint(v0, v1, &mut vertices);
                let m12 = midpoint(v1, v2, &mut vertices);
                let m20 = midpoint(v2, v0, &mut vertices);
                elements.push(vec![v0, m01, m20]);
                elements.push(vec![m01, v1, m12]);
                elements.push(vec![m20, m12, v2]);
                elements.push(vec![m01, m12, m20]);
                parents.extend([e; 4]);
            }
        }
    }
    Mesh::with_parents(mesh.dim, vertices, elements, Some(parents))
        .expect("refinement of a valid mesh is valid")
}
