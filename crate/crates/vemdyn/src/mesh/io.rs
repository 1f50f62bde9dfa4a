use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use super::{Element, Mesh};
use crate::error::{Error, Result};
use crate::material::MaterialParams;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MeshFile {
    dimension: usize,
    vertices: Vec<Vec<f64>>,
    elements: Vec<ElementFile>,
    material: MaterialFile,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ElementFile {
    #[serde(rename = "loop")]
    vloop: Option<Vec<usize>>,
    faces: Option<Vec<[usize; 3]>>,
    prism: Option<[usize; 6]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialFile {
    #[serde(rename = "E")]
    e: f64,
    nu: f64,
    rho: f64,
}

/// Parses and validates a mesh from JSON text.
pub fn mesh_from_json(text: &str) -> Result<Mesh> {
    let f: MeshFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if f.dimension != 2 && f.dimension != 3 {
        return Err(Error::Parse(format!(
            "dimension must be 2 or 3, got {}",
            f.dimension
        )));
    }
    let mut vertices = Vec::with_capacity(f.vertices.len());
    for (i, v) in f.vertices.iter().enumerate() {
        if v.len() != f.dimension {
            return Err(Error::Parse(format!(
                "vertex {i} has {} coordinates, expected {}",
                v.len(),
                f.dimension
            )));
        }
        let mut p = [0.0; 3];
        p[..v.len()].copy_from_slice(v);
        vertices.push(p);
    }
    let mut elements = Vec::with_capacity(f.elements.len());
    for (i, el) in f.elements.into_iter().enumerate() {
        let e = match (el.vloop, el.faces, el.prism) {
            (Some(l), None, None) => Element::Polygon(l),
            (None, Some(faces), prism) => Element::Polyhedron { faces, prism },
            _ => {
                return Err(Error::Parse(format!(
                    "element {i} must have exactly one of \"loop\" or \"faces\""
                )))
            }
        };
        elements.push(e);
    }
    let material = MaterialParams {
        youngs_modulus: f.material.e,
        poisson_ratio: f.material.nu,
        density: f.material.rho,
    };
    Mesh::new(f.dimension, vertices, elements, material)
}

pub fn load_mesh(path: &Path) -> Result<Mesh> {
    let text = std::fs::read_to_string(path)?;
    mesh_from_json(&text)
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

/// JSON text with 17 significant digits per number.
pub fn mesh_to_json(mesh: &Mesh) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{{\n  \"dimension\": {},\n  \"vertices\": [",
        mesh.dimension
    );
    for (i, v) in mesh.vertices.iter().enumerate() {
        let c: Vec<String> = v[..mesh.dimension].iter().map(|&x| num(x)).collect();
        let sep = if i + 1 < mesh.vertices.len() { "," } else { "" };
        let _ = writeln!(s, "    [{}]{sep}", c.join(", "));
    }
    s.push_str("  ],\n  \"elements\": [\n");
    for (i, el) in mesh.elements.iter().enumerate() {
        let sep = if i + 1 < mesh.elements.len() { "," } else { "" };
        match el {
            Element::Polygon(l) => {
                let _ = writeln!(s, "    {{\"loop\": [{}]}}{sep}", join(l));
            }
            Element::Polyhedron { faces, prism } => {
                let fs: Vec<String> = faces.iter().map(|f| format!("[{}]", join(f))).collect();
                let p = prism
                    .map(|p| format!(", \"prism\": [{}]", join(&p)))
                    .unwrap_or_default();
                let _ = writeln!(s, "    {{\"faces\": [{}]{p}}}{sep}", fs.join(", "));
            }
        }
    }
    let m = &mesh.material;
    let _ = writeln!(
        s,
        "  ],\n  \"material\": {{\"E\": {}, \"nu\": {}, \"rho\": {}}}\n}}",
        num(m.youngs_modulus),
        num(m.poisson_ratio),
        num(m.density)
    );
    s
}

pub fn save_mesh(mesh: &Mesh, path: &Path) -> Result<()> {
    std::fs::write(path, mesh_to_json(mesh))?;
    Ok(())
}
