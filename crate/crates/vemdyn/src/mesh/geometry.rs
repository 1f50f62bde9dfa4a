use super::{diameter, dist, polygon_area, Element, Mesh, TAU_GEOM};
use crate::error::{Error, Result};
use crate::hni::{newell_normal, LocalMoments, Polytope, ScaledMoments};

/// Geometric data of one element in local numbering.
#[derive(Debug, Clone)]
pub struct ElementGeometry {
    pub dim: usize,
    /// Global node ids in local order.
    pub nodes: Vec<usize>,
    pub coords: Vec<[f64; 3]>,
    /// Boundary facets in local ids: triangles in 3D, edges (2 ids) in 2D.
    pub facets: Vec<Vec<usize>>,
    pub volume: f64,
    pub centroid: [f64; 3],
    pub diameter: f64,
    pub face_areas: Vec<f64>,
    pub face_normals: Vec<[f64; 3]>,
    pub scaled_moments: ScaledMoments,
    /// |E| <= tau * h^d
    pub degenerate: bool,
}

impl ElementGeometry {
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Scaled coordinates (x - x_E)/h_E of every node.
    pub fn scaled_coords(&self) -> Vec<[f64; 3]> {
        self.coords
            .iter()
            .map(|p| {
                [
                    (p[0] - self.centroid[0]) / self.diameter,
                    (p[1] - self.centroid[1]) / self.diameter,
                    (p[2] - self.centroid[2]) / self.diameter,
                ]
            })
            .collect()
    }
}

/// Geometry of element `e`; degenerate elements are flagged, not rejected.
pub fn element_geometry(mesh: &Mesh, e: usize) -> Result<ElementGeometry> {
    let el = mesh
        .elements
        .get(e)
        .ok_or_else(|| Error::Invalid(format!("element {e} out of range")))?;
    let nodes = el.nodes();
    let coords: Vec<[f64; 3]> = nodes.iter().map(|&i| mesh.vertices[i]).collect();
    let local = |g: usize| nodes.iter().position(|&n| n == g).unwrap();
    let h = diameter(&coords);
    let (facets, moments) = match el {
        Element::Polygon(_) => {
            let n = nodes.len();
            let facets: Vec<Vec<usize>> = (0..n).map(|i| vec![i, (i + 1) % n]).collect();
            let pts2: Vec<[f64; 2]> = coords.iter().map(|p| [p[0], p[1]]).collect();
            let lm = LocalMoments::compute(&Polytope::Polygon(&pts2))?;
            (facets, lm)
        }
        Element::Polyhedron { faces, .. } => {
            let facets: Vec<Vec<usize>> = faces
                .iter()
                .map(|f| f.iter().map(|&g| local(g)).collect())
                .collect();
            let lf: Vec<[usize; 3]> = facets.iter().map(|f| [f[0], f[1], f[2]]).collect();
            let lm = LocalMoments::compute(&Polytope::Polyhedron {
                vertices: &coords,
                faces: &lf,
            })?;
            (facets, lm)
        }
    };
    let mut face_areas = Vec::with_capacity(facets.len());
    let mut face_normals = Vec::with_capacity(facets.len());
    for f in &facets {
        if f.len() == 2 {
            let a = coords[f[0]];
            let b = coords[f[1]];
            let l = dist(&a, &b);
            face_areas.push(l);
            face_normals.push([(b[1] - a[1]) / l, -(b[0] - a[0]) / l, 0.0]);
        } else {
            let p: Vec<[f64; 3]> = f.iter().map(|&i| coords[i]).collect();
            let n = newell_normal(&p);
            let nn = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
            face_areas.push(0.5 * nn);
            if nn > 0.0 {
                face_normals.push([n[0] / nn, n[1] / nn, n[2] / nn]);
            } else {
                face_normals.push([0.0; 3]);
            }
        }
    }
    let dim = mesh.dimension;
    let volume = moments.volume();
    let centroid = moments.centroid();
    let scaled_moments = moments.scaled(dim, &centroid, h);
    let degenerate = volume <= TAU_GEOM * h.powi(dim as i32);
    Ok(ElementGeometry {
        dim,
        nodes,
        coords,
        facets,
        volume,
        centroid,
        diameter: h,
        face_areas,
        face_normals,
        scaled_moments,
        degenerate,
    })
}

/// True when every vertex lies on the inner side of every facet plane, within
/// tau * h_E.
pub fn is_convex(mesh: &Mesh, e: usize) -> Result<bool> {
    let g = element_geometry(mesh, e)?;
    let tol = TAU_GEOM * g.diameter;
    if g.dim == 2 {
        let n = g.coords.len();
        let area = polygon_area(&g.coords);
        if area <= 0.0 {
            return Ok(false);
        }
        for i in 0..n {
            let a = g.coords[i];
            let b = g.coords[(i + 1) % n];
            let l = dist(&a, &b);
            for p in &g.coords {
                let s = ((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])) / l;
                if s < -tol {
                    return Ok(false);
                }
            }
        }
        return Ok(true);
    }
    for (f, n) in g.facets.iter().zip(&g.face_normals) {
        let x = g.coords[f[0]];
        for p in &g.coords {
            let s = n[0] * (p[0] - x[0]) + n[1] * (p[1] - x[1]) + n[2] * (p[2] - x[2]);
            if s > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
