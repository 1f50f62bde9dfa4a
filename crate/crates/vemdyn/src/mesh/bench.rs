//! Generators for the benchmark configurations.
//!
//! Catalog (ε is the degeneracy parameter):
//! - `tri2d`: unit square with nodes (0,0),(1,0),(1,ε),(1,1),(0,1); triangles
//!   [0,1,2] (thin), [0,2,3], [0,3,4] (right isosceles). VEM merges the first two.
//! - `prism3d`: `tri2d` extruded by a unit thickness; VEM merges the first two prisms.
//! - `wedge`: base (0,0,0),(1,0,0),(0,1,0); apex (1/2,1/2,ε) above, (1/3,1/3,-1/2) below.
//! - `kite`: (-1,0,ε),(1,0,ε),(0,-1,-ε),(0,1,-ε) joined to apex (0,0,1) through
//!   the face opposite (0,-1,-ε).
//! - `spireA/B/C`: spire (0,0,0),(0,ε,0),(0,0,ε),(1,0,0) with neighbors drawn from
//!   (0,0,-1),(0,-1,0),(1/2,1,0).
//! - `beamA/B`: tapered beam on [0,4]x[0,1], one element thick in z.

use std::fmt;
use std::str::FromStr;

use super::{extrude, prism_tets, Element, Mesh};
use crate::agglomerate::merge_groups;
use crate::error::{Error, Result};
use crate::material::MaterialParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BenchmarkId {
    Tri2d,
    Prism3d,
    Wedge,
    Kite,
    SpireA,
    SpireB,
    SpireC,
    BeamA,
    BeamB,
}

impl BenchmarkId {
    pub const ALL: [BenchmarkId; 9] = [
        BenchmarkId::Tri2d,
        BenchmarkId::Prism3d,
        BenchmarkId::Wedge,
        BenchmarkId::Kite,
        BenchmarkId::SpireA,
        BenchmarkId::SpireB,
        BenchmarkId::SpireC,
        BenchmarkId::BeamA,
        BenchmarkId::BeamB,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BenchmarkId::Tri2d => "tri2d",
            BenchmarkId::Prism3d => "prism3d",
            BenchmarkId::Wedge => "wedge",
            BenchmarkId::Kite => "kite",
            BenchmarkId::SpireA => "spireA",
            BenchmarkId::SpireB => "spireB",
            BenchmarkId::SpireC => "spireC",
            BenchmarkId::BeamA => "beamA",
            BenchmarkId::BeamB => "beamB",
        }
    }

    pub fn is_beam(&self) -> bool {
        matches!(self, BenchmarkId::BeamA | BenchmarkId::BeamB)
    }
}

impl fmt::Display for BenchmarkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchmarkId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BenchmarkId::ALL
            .iter()
            .find(|b| b.name().eq_ignore_ascii_case(s))
            .copied()
            .ok_or_else(|| Error::Invalid(format!("unknown benchmark id '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Fem,
    Vem,
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fem" => Ok(Variant::Fem),
            "vem" => Ok(Variant::Vem),
            _ => Err(Error::Invalid(format!("unknown variant '{s}' (fem|vem)"))),
        }
    }
}

/// Tapered beam layout. Top-row nodes of columns nx - kcut < j < nx drop
/// linearly onto a cut line that reaches `height - dy + delta` at column
/// nx - 1, so the top cell there is only `delta` thick; the last cell closes
/// back to full height at x = length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamParams {
    pub length: f64,
    pub height: f64,
    pub thickness: f64,
    pub nx: usize,
    pub ny: usize,
    pub kcut: usize,
    pub delta_a: f64,
    pub delta_b: f64,
}

impl Default for BeamParams {
    fn default() -> Self {
        BeamParams {
            length: 4.0,
            height: 1.0,
            thickness: 1.0 / 12.0,
            nx: 48,
            ny: 12,
            kcut: 27,
            delta_a: 1.65e-4,
            delta_b: 9.5e-10,
        }
    }
}

/// Generated mesh plus the element partition that turns the fem variant into
/// the vem variant.
#[derive(Debug, Clone)]
pub struct Benchmark {
    pub id: BenchmarkId,
    pub variant: Variant,
    pub mesh: Mesh,
    /// Groups of fem-variant element ids; one group per vem element.
    pub groups: Vec<Vec<usize>>,
}

fn tet(vertices: &[[f64; 3]], t: [usize; 4]) -> Element {
    let [a, b, c, d] = t;
    let p = |i: usize| vertices[i];
    let u = [p(b)[0] - p(a)[0], p(b)[1] - p(a)[1], p(b)[2] - p(a)[2]];
    let v = [p(c)[0] - p(a)[0], p(c)[1] - p(a)[1], p(c)[2] - p(a)[2]];
    let w = [p(d)[0] - p(a)[0], p(d)[1] - p(a)[1], p(d)[2] - p(a)[2]];
    let det = u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0])
        + u[2] * (v[0] * w[1] - v[1] * w[0]);
    let (b, c) = if det < 0.0 { (c, b) } else { (b, c) };
    Element::polyhedron(vec![[a, c, b], [a, b, d], [a, d, c], [b, c, d]])
}

/// Drops vertices not referenced by any element and renumbers.
fn compact(vertices: Vec<[f64; 3]>, tets: &[[usize; 4]]) -> (Vec<[f64; 3]>, Vec<[usize; 4]>) {
    let mut used: Vec<usize> = tets.iter().flatten().copied().collect();
    used.sort_unstable();
    used.dedup();
    let map = |i: usize| used.iter().position(|&u| u == i).unwrap();
    let v = used.iter().map(|&i| vertices[i]).collect();
    let t = tets.iter().map(|t| t.map(map)).collect();
    (v, t)
}

fn tet_mesh(vertices: Vec<[f64; 3]>, tets: &[[usize; 4]]) -> Result<Mesh> {
    let (v, t) = compact(vertices, tets);
    let elements = t.iter().map(|&k| tet(&v, k)).collect();
    Mesh::new(3, v, elements, MaterialParams::steel())
}

fn tri2d(eps: f64) -> Result<Mesh> {
    Mesh::new(
        2,
        vec![
            [0., 0., 0.],
            [1., 0., 0.],
            [1., eps, 0.],
            [1., 1., 0.],
            [0., 1., 0.],
        ],
        vec![
            Element::Polygon(vec![0, 1, 2]),
            Element::Polygon(vec![0, 2, 3]),
            Element::Polygon(vec![0, 3, 4]),
        ],
        MaterialParams::steel(),
    )
}

fn spire(eps: f64, id: BenchmarkId) -> Result<Mesh> {
    let v = vec![
        [0., 0., 0.],
        [0., eps, 0.],
        [0., 0., eps],
        [1., 0., 0.],
        [0., 0., -1.],
        [0., -1., 0.],
        [0.5, 1., 0.],
    ];
    let mut tets = vec![[0, 1, 2, 3], [0, 1, 3, 4]];
    match id {
        BenchmarkId::SpireB => tets.push([0, 2, 3, 5]),
        BenchmarkId::SpireC => tets.push([1, 3, 4, 6]),
        _ => {}
    }
    tet_mesh(v, &tets)
}

/// Beam fem mesh (tetrahedra) and the tet groups forming the vem elements.
pub fn beam_fem(p: &BeamParams, delta: f64) -> Result<(Mesh, Vec<Vec<usize>>)> {
    let (nx, ny) = (p.nx, p.ny);
    if ny < 2 || p.kcut < 2 || p.kcut > nx || !(delta > 0.0) {
        return Err(Error::Invalid("invalid beam parameters".into()));
    }
    let dx = p.length / nx as f64;
    let dy = p.height / ny as f64;
    if delta >= dy {
        return Err(Error::Invalid(
            "beam cut offset must be below the row height".into(),
        ));
    }
    let j0 = nx - p.kcut;
    let nid = |j: usize, r: usize| j * (ny + 1) + r;
    let mut v2 = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=nx {
        for r in 0..=ny {
            let mut y = r as f64 * dy;
            if r == ny && j > j0 && j < nx {
                y = p.height - (dy - delta) * (j - j0) as f64 / (p.kcut - 1) as f64;
            }
            v2.push([j as f64 * dx, y, 0.0]);
        }
    }
    let mut tris = Vec::new();
    for j in 0..nx {
        for r in 0..ny {
            let (a, b, c, d) = (nid(j, r), nid(j + 1, r), nid(j + 1, r + 1), nid(j, r + 1));
            tris.push(Element::Polygon(vec![a, b, c]));
            tris.push(Element::Polygon(vec![a, c, d]));
        }
    }
    let mut mat = MaterialParams::steel();
    mat.poisson_ratio = 0.0;
    let m2 = Mesh::new(2, v2, tris, mat)?;
    let prisms = extrude(&m2, p.thickness, 1)?;
    let mut elements = Vec::with_capacity(prisms.elements.len() * 3);
    for el in &prisms.elements {
        for t in prism_tets(el.prism().expect("extruded triangle")) {
            elements.push(tet(&prisms.vertices, t));
        }
    }
    let cell = |j: usize, r: usize| (j * ny + r) * 6;
    let mut groups = Vec::new();
    for j in 0..nx {
        for r in 0..ny {
            if j >= j0 && r == ny - 1 {
                continue;
            }
            let mut g: Vec<usize> = (cell(j, r)..cell(j, r) + 6).collect();
            if j >= j0 && r == ny - 2 {
                g.extend(cell(j, r + 1)..cell(j, r + 1) + 6);
            }
            groups.push(g);
        }
    }
    let mesh = Mesh::new(3, prisms.vertices, elements, mat)?;
    Ok((mesh, groups))
}

/// Builds benchmark `id`. `eps` is required for every non-beam benchmark.
pub fn generate(
    id: BenchmarkId,
    eps: Option<f64>,
    variant: Variant,
    beam: &BeamParams,
) -> Result<Benchmark> {
    let e = if id.is_beam() {
        0.0
    } else {
        let e = eps.ok_or_else(|| Error::Invalid(format!("benchmark {id} needs eps")))?;
        if !(e > 0.0 && e <= 1.0) {
            return Err(Error::Invalid(format!("eps = {e} outside (0, 1]")));
        }
        e
    };
    let (fem, groups) = match id {
        BenchmarkId::Tri2d => (tri2d(e)?, vec![vec![0, 1], vec![2]]),
        BenchmarkId::Prism3d => (extrude(&tri2d(e)?, 1.0, 1)?, vec![vec![0, 1], vec![2]]),
        BenchmarkId::Wedge => {
            let v = vec![
                [0., 0., 0.],
                [1., 0., 0.],
                [0., 1., 0.],
                [0.5, 0.5, e],
                [1. / 3., 1. / 3., -0.5],
            ];
            (
                tet_mesh(v, &[[0, 1, 2, 3], [0, 1, 2, 4]])?,
                vec![vec![0, 1]],
            )
        }
        BenchmarkId::Kite => {
            let v = vec![
                [-1., 0., e],
                [1., 0., e],
                [0., -1., -e],
                [0., 1., -e],
                [0., 0., 1.],
            ];
            (
                tet_mesh(v, &[[0, 1, 2, 3], [0, 1, 3, 4]])?,
                vec![vec![0, 1]],
            )
        }
        BenchmarkId::SpireA => (spire(e, id)?, vec![vec![0, 1]]),
        BenchmarkId::SpireB | BenchmarkId::SpireC => (spire(e, id)?, vec![vec![0, 1, 2]]),
        BenchmarkId::BeamA => beam_fem(beam, beam.delta_a)?,
        BenchmarkId::BeamB => beam_fem(beam, beam.delta_b)?,
    };
    let mesh = match variant {
        Variant::Fem => fem,
        Variant::Vem => merge_groups(&fem, &groups)?.0,
    };
    Ok(Benchmark {
        id,
        variant,
        mesh,
        groups,
    })
}
