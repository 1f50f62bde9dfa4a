use super::{diameter, polygon_area, polygon_is_simple, Element, Mesh, TAU_GEOM};
use crate::error::{Error, Result};

fn tri_area(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

/// Triangulates a simple CCW polygon into CCW triangles of local indices.
///
/// Fans from the lowest-id vertex; when that fan would contain a degenerate
/// triangle (collinear vertices) the next-lowest apex is tried, and ear
/// clipping is the last resort.
pub fn triangulate_polygon(pts: &[[f64; 3]], ids: &[usize]) -> Vec<[usize; 3]> {
    let n = pts.len();
    let h = diameter(pts);
    let tol = TAU_GEOM * h * h;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&k| ids[k]);
    for &k in &order {
        let tris: Vec<[usize; 3]> = (1..n - 1)
            .map(|i| [k, (k + i) % n, (k + i + 1) % n])
            .collect();
        if tris
            .iter()
            .all(|t| tri_area(&pts[t[0]], &pts[t[1]], &pts[t[2]]) > tol)
        {
            return tris;
        }
    }
    ear_clip(pts, tol)
}

fn ear_clip(pts: &[[f64; 3]], tol: f64) -> Vec<[usize; 3]> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    let mut out = Vec::new();
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        for i in 0..m {
            let (a, b, c) = (idx[(i + m - 1) % m], idx[i], idx[(i + 1) % m]);
            if tri_area(&pts[a], &pts[b], &pts[c]) <= tol {
                continue;
            }
            let inside = idx.iter().any(|&p| {
                p != a
                    && p != b
                    && p != c
                    && tri_area(&pts[a], &pts[b], &pts[p]) >= 0.0
                    && tri_area(&pts[b], &pts[c], &pts[p]) >= 0.0
                    && tri_area(&pts[c], &pts[a], &pts[p]) >= 0.0
            });
            if !inside {
                out.push([a, b, c]);
                idx.remove(i);
                clipped = true;
                break;
            }
        }
        if !clipped {
            break;
        }
    }
    if idx.len() == 3 {
        out.push([idx[0], idx[1], idx[2]]);
    }
    out
}

/// Splits a prism [a, b, c, a', b', c'] into three tetrahedra so that every
/// quadrilateral face is cut by the diagonal through its lowest-id vertex.
pub fn prism_tets(p: [usize; 6]) -> [[usize; 4]; 3] {
    const PERM: [[usize; 6]; 6] = [
        [0, 1, 2, 3, 4, 5],
        [1, 2, 0, 4, 5, 3],
        [2, 0, 1, 5, 3, 4],
        [3, 5, 4, 0, 2, 1],
        [4, 3, 5, 1, 0, 2],
        [5, 4, 3, 2, 1, 0],
    ];
    let m = (0..6).min_by_key(|&k| p[k]).unwrap();
    let q: Vec<usize> = PERM[m].iter().map(|&k| p[k]).collect();
    let (v1, v2, v3, v4, v5, v6) = (q[0], q[1], q[2], q[3], q[4], q[5]);
    if v2.min(v6) < v3.min(v5) {
        [[v1, v2, v3, v6], [v1, v2, v6, v5], [v1, v5, v6, v4]]
    } else {
        [[v1, v2, v3, v5], [v1, v5, v3, v6], [v1, v5, v6, v4]]
    }
}

/// Splits a quad (outward orientation) by the diagonal through its lowest-id vertex.
pub(crate) fn split_quad(q: [usize; 4]) -> [[usize; 3]; 2] {
    let k = (0..4).min_by_key(|&i| q[i]).unwrap();
    let r = [q[k], q[(k + 1) % 4], q[(k + 2) % 4], q[(k + 3) % 4]];
    [[r[0], r[1], r[2]], [r[0], r[2], r[3]]]
}

/// Extrudes a 2D mesh along +z. Vertex i of layer l gets id l*n + i.
pub fn extrude(mesh2d: &Mesh, thickness: f64, layers: usize) -> Result<Mesh> {
    if mesh2d.dimension != 2 {
        return Err(Error::Invalid("extrude needs a 2D mesh".into()));
    }
    if !(thickness > 0.0) || layers == 0 {
        return Err(Error::Invalid(
            "thickness must be > 0 and layers >= 1".into(),
        ));
    }
    let n = mesh2d.vertices.len();
    let mut vertices = Vec::with_capacity(n * (layers + 1));
    for l in 0..=layers {
        let z = thickness * l as f64 / layers as f64;
        for v in &mesh2d.vertices {
            vertices.push([v[0], v[1], z]);
        }
    }
    let mut elements = Vec::new();
    for l in 0..layers {
        for (e, el) in mesh2d.elements.iter().enumerate() {
            let lp = match el {
                Element::Polygon(lp) => lp,
                Element::Polyhedron { .. } => unreachable!(),
            };
            let pts: Vec<[f64; 3]> = lp.iter().map(|&i| mesh2d.vertices[i]).collect();
            if !polygon_is_simple(&pts) || polygon_area(&pts) <= 0.0 {
                return Err(Error::validation(e, None, "non-simple 2D element"));
            }
            let bot: Vec<usize> = lp.iter().map(|&i| l * n + i).collect();
            let top: Vec<usize> = lp.iter().map(|&i| (l + 1) * n + i).collect();
            let mut faces = Vec::new();
            for t in triangulate_polygon(&pts, lp) {
                faces.push([bot[t[0]], bot[t[2]], bot[t[1]]]);
                faces.push([top[t[0]], top[t[1]], top[t[2]]]);
            }
            let m = lp.len();
            for i in 0..m {
                let j = (i + 1) % m;
                faces.extend(split_quad([bot[i], bot[j], top[j], top[i]]));
            }
            let prism = (m == 3).then(|| [bot[0], bot[1], bot[2], top[0], top[1], top[2]]);
            elements.push(Element::Polyhedron { faces, prism });
        }
    }
    Mesh::new(3, vertices, elements, mesh2d.material)
}
