//! Polygonal meshes of the unit square: generation, validation, face
//! extraction, sub-triangulation and file I/O.

mod faces;
mod generate;
pub mod geometry;
mod io;
mod triangulate;

pub use faces::{extract_faces, Face, COINCIDENCE_TOL};
pub use generate::{generate_structured_triangular, generate_voronoi_lloyd, voronoi_from_seeds, DEFAULT_LLOYD_ITERS};
pub use geometry::Point2;
pub use io::{load_mesh, mesh_from_json, mesh_to_json, save_mesh};
pub use triangulate::subtriangulate;

use crate::error::{Error, Result};
use geometry::{diameter, is_convex, polygon_centroid, signed_area, triangle_area};
use triangulate::CENTROID;

#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    /// Counter-clockwise vertex loop.
    pub vertex_ids: Vec<usize>,
    pub diameter: f64,
    pub area: f64,
    pub centroid: Point2,
}

impl Polygon {
    fn new(vertex_ids: Vec<usize>, vertices: &[Point2]) -> Self {
        let pts: Vec<Point2> = vertex_ids.iter().map(|&v| vertices[v]).collect();
        Polygon {
            diameter: diameter(&pts),
            area: signed_area(&pts),
            centroid: polygon_centroid(&pts),
            vertex_ids,
        }
    }

    pub fn points(&self, vertices: &[Point2]) -> Vec<Point2> {
        self.vertex_ids.iter().map(|&v| vertices[v]).collect()
    }

    pub fn perimeter(&self, vertices: &[Point2]) -> f64 {
        let n = self.vertex_ids.len();
        (0..n)
            .map(|k| vertices[self.vertex_ids[k]].dist(vertices[self.vertex_ids[(k + 1) % n]]))
            .sum()
    }
}

/// An immutable, validated polygonal partition of the unit square.
#[derive(Debug, Clone)]
pub struct PolyMesh {
    vertices: Vec<Point2>,
    elements: Vec<Polygon>,
    faces: Vec<Face>,
    sub_tri: Vec<Vec<[usize; 3]>>,
    element_faces: Vec<Vec<usize>>,
    h: f64,
    theta: f64,
}

impl PolyMesh {
    /// Builds a mesh from counter-clockwise vertex loops. Missing
    /// sub-triangulations are generated (centroid fan or ear clipping); fan
    /// centroids are appended to the vertex list.
    pub fn from_loops(
        mut vertices: Vec<Point2>,
        loops: Vec<Vec<usize>>,
        sub_tri: Option<Vec<Vec<[usize; 3]>>>,
    ) -> Result<Self> {
        if loops.is_empty() {
            return Err(Error::MeshValidity("mesh has no elements".into()));
        }
        if let Some(p) = vertices.iter().position(|p| !p.is_finite()) {
            return Err(Error::MeshValidity(format!("vertex {p} is not finite")));
        }
        for (e, l) in loops.iter().enumerate() {
            if l.len() < 3 {
                return Err(Error::MeshValidity(format!("element {e} has {} vertices", l.len())));
            }
            if let Some(&v) = l.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::MeshValidity(format!("element {e} references missing vertex {v}")));
            }
        }
        let n_base = vertices.len();
        let elements: Vec<Polygon> = loops.into_iter().map(|l| Polygon::new(l, &vertices)).collect();
        for (e, el) in elements.iter().enumerate() {
            if el.area <= 0.0 {
                return Err(Error::MeshValidity(format!("element {e} has non-positive area {}", el.area)));
            }
            if !geometry::loop_is_simple(&el.vertex_ids, &vertices) {
                return Err(Error::MeshValidity(format!("element {e} is self-intersecting")));
            }
        }
        let sub_tri = match sub_tri {
            Some(st) => {
                if st.len() != elements.len() {
                    return Err(Error::MeshValidity("sub_tri length differs from element count".into()));
                }
                if st.iter().flatten().flatten().any(|&v| v >= n_base) {
                    return Err(Error::MeshValidity("sub_tri references a missing vertex".into()));
                }
                st
            }
            None => {
                let mut all = Vec::with_capacity(elements.len());
                for (e, el) in elements.iter().enumerate() {
                    let pts = el.points(&vertices);
                    let plan = triangulate::plan(&pts).map_err(|err| match err {
                        Error::MeshValidity(m) => Error::MeshValidity(format!("element {e}: {m}")),
                        other => other,
                    })?;
                    let needs_centroid = plan.iter().flatten().any(|&i| i == CENTROID);
                    let c_id = vertices.len();
                    if needs_centroid {
                        vertices.push(el.centroid);
                    }
                    let map = |i: usize| if i == CENTROID { c_id } else { el.vertex_ids[i] };
                    all.push(plan.into_iter().map(|t| [map(t[0]), map(t[1]), map(t[2])]).collect());
                }
                all
            }
        };
        let loops: Vec<Vec<usize>> = elements.iter().map(|e| e.vertex_ids.clone()).collect();
        let faces = extract_faces(&loops, &vertices)?;
        Self::from_parts(vertices, elements, faces, sub_tri)
    }

    /// Assembles a mesh from already consistent parts and validates it.
    pub(crate) fn from_parts(
        vertices: Vec<Point2>,
        elements: Vec<Polygon>,
        faces: Vec<Face>,
        sub_tri: Vec<Vec<[usize; 3]>>,
    ) -> Result<Self> {
        let mut element_faces = vec![Vec::new(); elements.len()];
        for (f, face) in faces.iter().enumerate() {
            element_faces[face.plus].push(f);
            if let Some(m) = face.minus {
                element_faces[m].push(f);
            }
        }
        let h = elements.iter().map(|e| e.diameter).fold(0.0, f64::max);
        let hmin = elements.iter().map(|e| e.diameter).fold(f64::INFINITY, f64::min);
        let mesh = PolyMesh {
            vertices,
            elements,
            faces,
            sub_tri,
            element_faces,
            h,
            theta: h / hmin,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn elements(&self) -> &[Polygon] {
        &self.elements
    }

    pub fn element(&self, e: usize) -> &Polygon {
        &self.elements[e]
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    /// Indices of the faces on the boundary of element `e`.
    pub fn element_faces(&self, e: usize) -> &[usize] {
        &self.element_faces[e]
    }

    pub fn sub_triangles(&self, e: usize) -> &[[usize; 3]] {
        &self.sub_tri[e]
    }

    pub fn sub_tri(&self) -> &[Vec<[usize; 3]>] {
        &self.sub_tri
    }

    pub fn triangle_points(&self, t: &[usize; 3]) -> [Point2; 3] {
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }

    /// Mesh size: the largest element diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Quasi-uniformity ratio max h_K / min h_K.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn element_points(&self, e: usize) -> Vec<Point2> {
        self.elements[e].points(&self.vertices)
    }

    /// Element adjacency through interior faces, sorted and deduplicated.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.elements.len()];
        for f in &self.faces {
            if let Some(m) = f.minus {
                adj[f.plus].push(m);
                adj[m].push(f.plus);
            }
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }

    pub fn max_faces_per_element(&self) -> usize {
        self.element_faces.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Checks the area partition, sub-triangulation, face partition and
    /// normal orientation invariants.
    pub fn validate(&self) -> Result<()> {
        let total: f64 = self.elements.iter().map(|e| e.area).sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::MeshValidity(format!("element areas sum to {total}, expected 1")));
        }
        for (e, el) in self.elements.iter().enumerate() {
            if el.vertex_ids.len() < 3 || el.area <= 0.0 {
                return Err(Error::MeshValidity(format!("element {e} is degenerate")));
            }
            let mut tri_area = 0.0;
            for t in &self.sub_tri[e] {
                let [a, b, c] = self.triangle_points(t);
                let ta = triangle_area(a, b, c);
                if ta <= 0.0 {
                    return Err(Error::MeshValidity(format!("element {e} has a non-positive sub-triangle")));
                }
                tri_area += ta;
            }
            if (tri_area - el.area).abs() > 1e-12 * el.area {
                return Err(Error::MeshValidity(format!(
                    "element {e}: sub-triangles cover {tri_area}, element area {}",
                    el.area
                )));
            }
            let covered: f64 = self.element_faces[e].iter().map(|&f| self.faces[f].length).sum();
            let perim = el.perimeter(&self.vertices);
            if (covered - perim).abs() > 1e-10 * perim {
                return Err(Error::MeshValidity(format!(
                    "element {e}: faces cover length {covered}, perimeter {perim}"
                )));
            }
        }
        for (i, f) in self.faces.iter().enumerate() {
            if f.length <= 0.0 {
                return Err(Error::MeshValidity(format!("face {i} has zero length")));
            }
            if let Some(m) = f.minus {
                let (pe, me) = (&self.elements[f.plus], &self.elements[m]);
                let convex = is_convex(&pe.points(&self.vertices)) && is_convex(&me.points(&self.vertices));
                let d = me.centroid - pe.centroid;
                if convex && f.normal[0] * d.x + f.normal[1] * d.y <= 0.0 {
                    return Err(Error::MeshValidity(format!("face {i} normal points into its plus element")));
                }
            }
        }
        Ok(())
    }
}
