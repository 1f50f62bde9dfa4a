//! Polytopal meshes: representation, validation and geometric primitives.

mod bench;
mod extrude;
mod geometry;
mod io;

use std::collections::HashMap;

pub use bench::{beam_fem, generate, BeamParams, Benchmark, BenchmarkId, Variant};
pub use extrude::{extrude, prism_tets, triangulate_polygon};
pub use geometry::{element_geometry, is_convex, ElementGeometry};
pub use io::{load_mesh, mesh_from_json, mesh_to_json, save_mesh};

use crate::error::{Error, Result};
use crate::hni::newell_normal;
use crate::material::MaterialParams;

/// Relative degeneracy tolerance.
pub const TAU_GEOM: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    /// Counter-clockwise vertex loop (2D).
    Polygon(Vec<usize>),
    /// Outward-oriented triangular faces (3D). `prism` holds the six nodes
    /// [a, b, c, a', b', c'] when the element came from extruding a triangle.
    Polyhedron {
        faces: Vec<[usize; 3]>,
        prism: Option<[usize; 6]>,
    },
}

impl Element {
    pub fn polyhedron(faces: Vec<[usize; 3]>) -> Self {
        Element::Polyhedron { faces, prism: None }
    }

    /// Local node list: loop order for polygons, prism order for prisms,
    /// otherwise order of first appearance in the face list.
    pub fn nodes(&self) -> Vec<usize> {
        match self {
            Element::Polygon(l) => l.clone(),
            Element::Polyhedron { prism: Some(p), .. } => p.to_vec(),
            Element::Polyhedron { faces, .. } => {
                let mut out: Vec<usize> = Vec::new();
                for f in faces {
                    for &v in f {
                        if !out.contains(&v) {
                            out.push(v);
                        }
                    }
                }
                out
            }
        }
    }

    pub fn faces(&self) -> Option<&[[usize; 3]]> {
        match self {
            Element::Polyhedron { faces, .. } => Some(faces),
            Element::Polygon(_) => None,
        }
    }

    pub fn is_tet(&self) -> bool {
        matches!(self, Element::Polyhedron { faces, prism: None } if faces.len() == 4 && self.nodes().len() == 4)
    }

    pub fn is_triangle(&self) -> bool {
        matches!(self, Element::Polygon(l) if l.len() == 3)
    }

    pub fn prism(&self) -> Option<[usize; 6]> {
        match self {
            Element::Polyhedron { prism, .. } => *prism,
            Element::Polygon(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub dimension: usize,
    /// Coordinates; z = 0 for 2D meshes.
    pub vertices: Vec<[f64; 3]>,
    pub elements: Vec<Element>,
    pub material: MaterialParams,
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm(a: &[f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

pub(crate) fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    norm(&sub(a, b))
}

fn cross2(o: &[f64; 3], a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn segments_intersect(p1: &[f64; 3], p2: &[f64; 3], q1: &[f64; 3], q2: &[f64; 3]) -> bool {
    let d1 = cross2(q1, q2, p1);
    let d2 = cross2(q1, q2, p2);
    let d3 = cross2(p1, p2, q1);
    let d4 = cross2(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |a: &[f64; 3], b: &[f64; 3], c: &[f64; 3], d: f64| {
        d == 0.0
            && c[0] >= a[0].min(b[0])
            && c[0] <= a[0].max(b[0])
            && c[1] >= a[1].min(b[1])
            && c[1] <= a[1].max(b[1])
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

/// Signed area of a 2D loop.
pub fn polygon_area(pts: &[[f64; 3]]) -> f64 {
    let n = pts.len();
    let mut a = 0.0;
    for i in 0..n {
        let p = &pts[i];
        let q = &pts[(i + 1) % n];
        a += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * a
}

/// True when the closed loop has no crossing or touching non-adjacent edges.
pub fn polygon_is_simple(pts: &[[f64; 3]]) -> bool {
    let n = pts.len();
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_intersect(&pts[i], &pts[(i + 1) % n], &pts[j], &pts[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

impl Mesh {
    /// Builds a mesh and checks every invariant.
    pub fn new(
        dimension: usize,
        vertices: Vec<[f64; 3]>,
        elements: Vec<Element>,
        material: MaterialParams,
    ) -> Result<Self> {
        let m = Mesh {
            dimension,
            vertices,
            elements,
            material,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn num_nodes(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_dofs(&self) -> usize {
        self.dimension * self.vertices.len()
    }

    pub fn element_coords(&self, e: usize) -> Vec<[f64; 3]> {
        self.elements[e]
            .nodes()
            .iter()
            .map(|&i| self.vertices[i])
            .collect()
    }

    /// Total measure of all elements.
    pub fn total_volume(&self) -> Result<f64> {
        let mut v = 0.0;
        for e in 0..self.elements.len() {
            v += element_geometry(self, e)?.volume;
        }
        Ok(v)
    }

    pub fn validate(&self) -> Result<()> {
        self.material.validate()?;
        if self.dimension != 2 && self.dimension != 3 {
            return Err(Error::Invalid(format!(
                "dimension must be 2 or 3, got {}",
                self.dimension
            )));
        }
        for (i, v) in self.vertices.iter().enumerate() {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Invalid(format!(
                    "vertex {i} has a non-finite coordinate"
                )));
            }
            if self.dimension == 2 && v[2] != 0.0 {
                return Err(Error::Invalid(format!(
                    "vertex {i} has z != 0 in a 2D mesh"
                )));
            }
        }
        for (e, el) in self.elements.iter().enumerate() {
            match (self.dimension, el) {
                (2, Element::Polygon(l)) => self.validate_polygon(e, l)?,
                (3, Element::Polyhedron { faces, prism }) => {
                    self.validate_polyhedron(e, faces)?;
                    if let Some(p) = prism {
                        let mut a = p.to_vec();
                        let mut b = Element::polyhedron(faces.clone()).nodes();
                        a.sort_unstable();
                        b.sort_unstable();
                        a.dedup();
                        if a != b || a.len() != 6 {
                            return Err(Error::validation(
                                e,
                                None,
                                "prism nodes do not match faces",
                            ));
                        }
                    }
                }
                _ => {
                    return Err(Error::validation(
                        e,
                        None,
                        "element kind does not match mesh dimension",
                    ))
                }
            }
        }
        Ok(())
    }

    fn validate_polygon(&self, e: usize, l: &[usize]) -> Result<()> {
        if l.len() < 3 {
            return Err(Error::validation(e, None, "loop has fewer than 3 vertices"));
        }
        if let Some(&i) = l.iter().find(|&&i| i >= self.vertices.len()) {
            return Err(Error::validation(
                e,
                None,
                format!("vertex index {i} out of range"),
            ));
        }
        let mut s = l.to_vec();
        s.sort_unstable();
        s.dedup();
        if s.len() != l.len() {
            return Err(Error::validation(e, None, "loop repeats a vertex"));
        }
        let pts: Vec<[f64; 3]> = l.iter().map(|&i| self.vertices[i]).collect();
        let h = diameter(&pts);
        for (k, w) in pts.iter().enumerate() {
            if dist(w, &pts[(k + 1) % pts.len()]) <= TAU_GEOM * h {
                return Err(Error::validation(e, Some(k), "zero-length edge"));
            }
        }
        let a = polygon_area(&pts);
        if a <= TAU_GEOM * h * h {
            if a < 0.0 {
                return Err(Error::validation(e, None, "loop is clockwise"));
            }
            return Err(Error::validation(e, None, "zero-area polygon"));
        }
        if !polygon_is_simple(&pts) {
            return Err(Error::validation(e, None, "loop is self-intersecting"));
        }
        Ok(())
    }

    fn validate_polyhedron(&self, e: usize, faces: &[[usize; 3]]) -> Result<()> {
        if faces.len() < 4 {
            return Err(Error::validation(e, None, "fewer than 4 faces"));
        }
        for (k, f) in faces.iter().enumerate() {
            if let Some(&i) = f.iter().find(|&&i| i >= self.vertices.len()) {
                return Err(Error::validation(
                    e,
                    Some(k),
                    format!("vertex index {i} out of range"),
                ));
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::validation(e, Some(k), "face repeats a vertex"));
            }
            let p = [
                self.vertices[f[0]],
                self.vertices[f[1]],
                self.vertices[f[2]],
            ];
            let lmax = dist(&p[0], &p[1])
                .max(dist(&p[1], &p[2]))
                .max(dist(&p[2], &p[0]));
            let area = 0.5 * norm(&newell_normal(&p));
            if area <= TAU_GEOM * lmax * lmax {
                return Err(Error::validation(e, Some(k), "zero-area face"));
            }
        }
        // Every directed edge must be matched by its reverse.
        let mut count: HashMap<(usize, usize), i64> = HashMap::new();
        for f in faces {
            for i in 0..3 {
                *count.entry((f[i], f[(i + 1) % 3])).or_insert(0) += 1;
            }
        }
        let excess = |a: usize, b: usize| {
            count.get(&(a, b)).copied().unwrap_or(0) - count.get(&(b, a)).copied().unwrap_or(0)
        };
        let mut worst: Option<(usize, usize)> = None;
        for (k, f) in faces.iter().enumerate() {
            let bad = (0..3).filter(|&i| excess(f[i], f[(i + 1) % 3]) > 0).count();
            if bad > 0 && worst.map_or(true, |(_, b)| bad > b) {
                worst = Some((k, bad));
            }
        }
        if let Some((k, _)) = worst {
            return Err(Error::validation(
                e,
                Some(k),
                "face orientation inconsistent with its neighbors (inward-oriented or open surface)",
            ));
        }
        let (s, amax) = crate::hni::closure_defect(&self.vertices, faces);
        if norm(&s) > crate::hni::closure_tolerance(&self.vertices, faces, amax) {
            return Err(Error::validation(e, None, "face set is not watertight"));
        }
        let g = element_geometry(self, e)?;
        if g.volume <= 0.0 {
            return Err(Error::validation(
                e,
                Some(0),
                "faces are oriented inward (negative volume)",
            ));
        }
        Ok(())
    }

    /// Element ids sharing a facet with element `e`, with the shared measure.
    pub fn neighbors(&self, e: usize) -> Vec<(usize, f64)> {
        let facets = |el: &Element| -> Vec<(Vec<usize>, f64)> {
            match el {
                Element::Polygon(l) => (0..l.len())
                    .map(|i| {
                        let a = l[i];
                        let b = l[(i + 1) % l.len()];
                        let mut k = vec![a, b];
                        k.sort_unstable();
                        (k, dist(&self.vertices[a], &self.vertices[b]))
                    })
                    .collect(),
                Element::Polyhedron { faces, .. } => faces
                    .iter()
                    .map(|f| {
                        let mut k = f.to_vec();
                        k.sort_unstable();
                        let p = [
                            self.vertices[f[0]],
                            self.vertices[f[1]],
                            self.vertices[f[2]],
                        ];
                        (k, 0.5 * norm(&newell_normal(&p)))
                    })
                    .collect(),
            }
        };
        let mine = facets(&self.elements[e]);
        let mut out: Vec<(usize, f64)> = Vec::new();
        for (o, el) in self.elements.iter().enumerate() {
            if o == e {
                continue;
            }
            let theirs = facets(el);
            let mut shared = 0.0;
            let mut any = false;
            for (k, a) in &mine {
                if theirs.iter().any(|(t, _)| t == k) {
                    shared += a;
                    any = true;
                }
            }
            if any {
                out.push((o, shared));
            }
        }
        out
    }
}

/// Max pairwise distance.
pub fn diameter(pts: &[[f64; 3]]) -> f64 {
    let mut h: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            h = h.max(dist(&pts[i], &pts[j]));
        }
    }
    h
}
