//! Oracles, generators and invariant checks shared by the integration tests.

#![allow(dead_code)]

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use nalgebra::{DMatrix, Rotation3, Vector3};
use proptest::prelude::*;

use vemdyn::config::Config;
use vemdyn::eig::{element_system, jacobi_eigenvalues, mass_normalized, Method};
use vemdyn::mesh::{element_geometry, Element, Mesh};
use vemdyn::vem::element_matrices;
use vemdyn::MaterialParams;

pub type Check = Result<(), String>;

pub fn monomial(p: [f64; 3], e: [u32; 3]) -> f64 {
    p[0].powi(e[0] as i32) * p[1].powi(e[1] as i32) * p[2].powi(e[2] as i32)
}

pub fn exponents(max_degree: u32, dim: usize) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    for q in 0..=max_degree {
        for a in 0..=q {
            for b in 0..=q - a {
                let c = q - a - b;
                if dim == 2 && c > 0 {
                    continue;
                }
                out.push([a, b, c]);
            }
        }
    }
    out
}

fn gauss() -> GaussLegendre {
    GaussLegendre::new(NonZeroUsize::new(6).unwrap())
}

/// Signed integral of x^a y^b z^c over the tetrahedron (a, b, c, d) through the
/// collapsed-cube (Duffy) map and a tensor Gauss-Legendre rule.
pub fn tet_integral(v: [[f64; 3]; 4], e: [u32; 3]) -> f64 {
    let d = |i: usize, k: usize| v[i][k] - v[0][k];
    let det = d(1, 0) * (d(2, 1) * d(3, 2) - d(2, 2) * d(3, 1))
        - d(1, 1) * (d(2, 0) * d(3, 2) - d(2, 2) * d(3, 0))
        + d(1, 2) * (d(2, 0) * d(3, 1) - d(2, 1) * d(3, 0));
    let g = gauss();
    let val = g.integrate(0.0, 1.0, |s| {
        g.integrate(0.0, 1.0, |t| {
            g.integrate(0.0, 1.0, |r| {
                let (u, w1) = (s, 1.0 - s);
                let vv = w1 * t;
                let w = w1 * (1.0 - t) * r;
                let x = [0, 1, 2].map(|k| v[0][k] + u * d(1, k) + vv * d(2, k) + w * d(3, k));
                monomial(x, e) * w1 * w1 * (1.0 - t)
            })
        })
    });
    det * val
}

/// Signed integral of x^a y^b over the triangle (a, b, c).
pub fn tri_integral(v: [[f64; 2]; 3], e: [u32; 3]) -> f64 {
    let d = |i: usize, k: usize| v[i][k] - v[0][k];
    let det = d(1, 0) * d(2, 1) - d(1, 1) * d(2, 0);
    let g = gauss();
    let val = g.integrate(0.0, 1.0, |s| {
        g.integrate(0.0, 1.0, |t| {
            let (u, vv) = (s, (1.0 - s) * t);
            let x = [
                v[0][0] + u * d(1, 0) + vv * d(2, 0),
                v[0][1] + u * d(1, 1) + vv * d(2, 1),
                0.0,
            ];
            monomial(x, e) * (1.0 - s)
        })
    });
    det * val
}

/// Simplicial-decomposition oracle: cones from the first vertex of the first
/// face to every boundary facet, with signed volumes.
pub fn oracle_polyhedron(vertices: &[[f64; 3]], faces: &[[usize; 3]], e: [u32; 3]) -> f64 {
    let apex = vertices[faces[0][0]];
    faces
        .iter()
        .map(|f| tet_integral([apex, vertices[f[0]], vertices[f[1]], vertices[f[2]]], e))
        .sum()
}

pub fn oracle_polygon(pts: &[[f64; 2]], e: [u32; 3]) -> f64 {
    (1..pts.len() - 1)
        .map(|i| tri_integral([pts[0], pts[i], pts[i + 1]], e))
        .sum()
}

/// Outward faces of a tetrahedron, flipping when (a, b, c, d) is negatively
/// oriented.
pub fn tet_element(v: &[[f64; 3]], t: [usize; 4]) -> Element {
    let [a, b, c, d] = t;
    let p = [v[a], v[b], v[c], v[d]];
    let (b, c) = if signed_volume(&p) < 0.0 {
        (c, b)
    } else {
        (b, c)
    };
    Element::polyhedron(vec![[a, c, b], [a, b, d], [a, d, c], [b, c, d]])
}

pub fn signed_volume(p: &[[f64; 3]; 4]) -> f64 {
    let a = Vector3::from(p[1]) - Vector3::from(p[0]);
    let b = Vector3::from(p[2]) - Vector3::from(p[0]);
    let c = Vector3::from(p[3]) - Vector3::from(p[0]);
    a.dot(&b.cross(&c)) / 6.0
}

pub const CUBE_FACES: [[usize; 3]; 12] = [
    [0, 2, 1],
    [1, 2, 3],
    [4, 5, 6],
    [5, 7, 6],
    [0, 1, 4],
    [1, 5, 4],
    [2, 6, 3],
    [3, 6, 7],
    [0, 4, 2],
    [2, 4, 6],
    [1, 3, 5],
    [3, 7, 5],
];

pub fn cube_vertices() -> Vec<[f64; 3]> {
    (0..8)
        .map(|i| [(i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64])
        .collect()
}

pub fn unit_tet() -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let v = vec![[0., 0., 0.], [1., 0., 0.], [0., 1., 0.], [0., 0., 1.]];
    let f = vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]];
    (v, f)
}

pub fn single_element_mesh(vertices: Vec<[f64; 3]>, faces: Vec<[usize; 3]>) -> Mesh {
    Mesh::new(
        3,
        vertices,
        vec![Element::polyhedron(faces)],
        MaterialParams::steel(),
    )
    .expect("valid polyhedron")
}

fn transform(p: [f64; 3], r: &Rotation3<f64>, s: f64, t: [f64; 3]) -> [f64; 3] {
    let q = r * Vector3::from(p) * s;
    [q.x + t[0], q.y + t[1], q.z + t[2]]
}

pub fn rotation() -> impl Strategy<Value = Rotation3<f64>> {
    (-3.1f64..3.1, -1.5f64..1.5, -3.1f64..3.1)
        .prop_map(|(a, b, c)| Rotation3::from_euler_angles(a, b, c))
}

fn placement() -> impl Strategy<Value = (Rotation3<f64>, f64, [f64; 3])> {
    (
        rotation(),
        0.1f64..10.0,
        prop::array::uniform3(-5.0f64..5.0),
    )
}

/// Randomly perturbed, rotated, scaled and translated unit tetrahedron.
pub fn well_shaped_tet() -> impl Strategy<Value = [[f64; 3]; 4]> {
    (prop::array::uniform12(-0.15f64..0.15), placement()).prop_map(|(d, (r, s, t))| {
        let (base, _) = unit_tet();
        let mut out = [[0.0; 3]; 4];
        for i in 0..4 {
            let p = [
                base[i][0] + d[3 * i],
                base[i][1] + d[3 * i + 1],
                base[i][2] + d[3 * i + 2],
            ];
            out[i] = transform(p, &r, s, t);
        }
        out
    })
}

/// Perturbed hexahedron with 12 triangular faces.
pub fn perturbed_hex() -> impl Strategy<Value = Vec<[f64; 3]>> {
    (
        prop::collection::vec(prop::array::uniform3(-0.12f64..0.12), 8),
        placement(),
    )
        .prop_map(|(d, (r, s, t))| {
            cube_vertices()
                .iter()
                .zip(&d)
                .map(|(p, q)| transform([p[0] + q[0], p[1] + q[1], p[2] + q[2]], &r, s, t))
                .collect()
        })
}

/// Two tetrahedra sharing a face, as a mesh.
pub fn tet_pair() -> impl Strategy<Value = Mesh> {
    (
        prop::collection::vec(prop::array::uniform3(-0.15f64..0.15), 5),
        placement(),
    )
        .prop_map(|(d, (r, s, t))| {
            let base = [
                [0., 0., 0.],
                [1., 0., 0.],
                [0., 1., 0.],
                [0.3, 0.3, 1.],
                [0.3, 0.3, -1.],
            ];
            let v: Vec<[f64; 3]> = base
                .iter()
                .zip(&d)
                .map(|(p, q)| transform([p[0] + q[0], p[1] + q[1], p[2] + q[2]], &r, s, t))
                .collect();
            let els = vec![tet_element(&v, [0, 1, 2, 3]), tet_element(&v, [0, 1, 2, 4])];
            Mesh::new(3, v, els, MaterialParams::steel()).expect("valid pair")
        })
}

fn fro(a: &DMatrix<f64>) -> f64 {
    a.norm()
}

/// Π idempotent, Π·D = D, the same for the L² projector, and K_s·D = 0.
pub fn check_projectors(mesh: &Mesh, e: usize, cfg: &Config) -> Check {
    let g = element_geometry(mesh, e).map_err(|x| x.to_string())?;
    let mat = cfg.material(&mesh.material).map_err(|x| x.to_string())?;
    let em =
        element_matrices(&g, &mat, cfg.alpha0_for(mesh.dimension)).map_err(|x| x.to_string())?;
    let p = &em.projectors;
    let idem = fro(&(&p.pi * &p.pi - &p.pi)) / fro(&p.pi);
    if idem > 1e-10 {
        return Err(format!("element {e}: ‖ΠΠ−Π‖/‖Π‖ = {idem:e}"));
    }
    let repro = fro(&(&p.pi * &p.d - &p.d)) / fro(&p.d);
    if repro > 1e-10 {
        return Err(format!("element {e}: ‖ΠD−D‖/‖D‖ = {repro:e}"));
    }
    let idem0 = fro(&(&p.pi0 * &p.pi0 - &p.pi0)) / fro(&p.pi0);
    let (n, k) = p.d0.shape();
    let d = mesh.dimension;
    let mut d0 = DMatrix::zeros(d * n, d * k);
    for c in 0..d {
        d0.view_mut((c * n, c * k), (n, k)).copy_from(&p.d0);
    }
    let repro0 = fro(&(&p.pi0 * &d0 - &d0)) / fro(&d0);
    if idem0 > 1e-10 || repro0 > 1e-10 {
        return Err(format!(
            "element {e}: L² projector defects {idem0:e}, {repro0:e}"
        ));
    }
    check_patch(mesh, e, cfg)
}

/// K_s·D = 0 relative to ‖K‖‖D‖.
pub fn check_patch(mesh: &Mesh, e: usize, cfg: &Config) -> Check {
    let g = element_geometry(mesh, e).map_err(|x| x.to_string())?;
    let mat = cfg.material(&mesh.material).map_err(|x| x.to_string())?;
    let em =
        element_matrices(&g, &mat, cfg.alpha0_for(mesh.dimension)).map_err(|x| x.to_string())?;
    let d = &em.projectors.d;
    let ksd = fro(&(&em.k_s * d)) / (fro(&em.k) * fro(d));
    if ksd > 1e-10 {
        return Err(format!("element {e}: ‖K_s D‖ relative {ksd:e}"));
    }
    Ok(())
}

/// Eigenvalues of (K, M^ℓ) for one element, ascending.
pub fn element_eigenvalues(mesh: &Mesh, e: usize, method: Method, cfg: &Config) -> Vec<f64> {
    let s = element_system(mesh, e, method, cfg).expect("element system");
    jacobi_eigenvalues(&mass_normalized(&s.k, &s.lumped).expect("positive mass"))
}

pub fn rotate_mesh(mesh: &Mesh, r: &Rotation3<f64>) -> Mesh {
    let mut m = mesh.clone();
    for v in &mut m.vertices {
        *v = transform(*v, r, 1.0, [0.0; 3]);
    }
    m
}

/// Element eigenvalues unchanged by a rigid rotation to 1e-9 relative.
pub fn check_rotation(mesh: &Mesh, r: &Rotation3<f64>, method: Method, cfg: &Config) -> Check {
    let rm = rotate_mesh(mesh, r);
    for e in 0..mesh.elements.len() {
        let a = element_eigenvalues(mesh, e, method, cfg);
        let b = element_eigenvalues(&rm, e, method, cfg);
        let top = a.last().copied().unwrap_or(0.0).abs();
        let diff = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        if diff > 1e-9 * top {
            return Err(format!("element {e}: eigenvalue drift {:e}", diff / top));
        }
    }
    Ok(())
}

/// Σ_f area_f n_f = 0 per element to 1e-12 of the largest face area.
pub fn check_watertight(mesh: &Mesh) -> Check {
    for (e, el) in mesh.elements.iter().enumerate() {
        let Some(faces) = el.faces() else { continue };
        let mut s = Vector3::zeros();
        let mut amax: f64 = 0.0;
        for f in faces {
            let [a, b, c] = f.map(|i| Vector3::from(mesh.vertices[i]));
            let n = (b - a).cross(&(c - a)) * 0.5;
            amax = amax.max(n.norm());
            s += n;
        }
        if s.norm() > 1e-12 * amax {
            return Err(format!(
                "element {e}: closure defect {:e} (max area {amax:e})",
                s.norm()
            ));
        }
    }
    Ok(())
}

pub fn element_volume(mesh: &Mesh, e: usize) -> f64 {
    match &mesh.elements[e] {
        Element::Polygon(l) => {
            let pts: Vec<[f64; 2]> = l
                .iter()
                .map(|&i| [mesh.vertices[i][0], mesh.vertices[i][1]])
                .collect();
            oracle_polygon(&pts, [0, 0, 0])
        }
        Element::Polyhedron { faces, .. } => oracle_polyhedron(&mesh.vertices, faces, [0, 0, 0]),
    }
}

/// Each merged element's volume equals the sum over its constituents.
pub fn check_volume_additivity(fine: &Mesh, coarse: &Mesh, mapping: &[Vec<usize>]) -> Check {
    for (new, olds) in mapping.iter().enumerate() {
        let v = element_volume(coarse, new);
        let s: f64 = olds.iter().map(|&o| element_volume(fine, o)).sum();
        if (v - s).abs() > 1e-12 * s.abs() {
            return Err(format!("element {new}: volume {v:e} vs constituents {s:e}"));
        }
    }
    Ok(())
}
