//! Shape diagnostics and classification of pathological tetrahedra and prisms.

use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{dist, element_geometry, Element, Mesh, TAU_GEOM};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityThresholds {
    /// Dihedral angle threshold in degrees.
    pub theta_ang: f64,
    pub theta_face: f64,
    pub theta_edge: f64,
    pub theta_vol: f64,
}

impl Default for QualityThresholds {
    fn default() -> Self {
        QualityThresholds {
            theta_ang: 5.0,
            theta_face: 1e-4,
            theta_edge: 1e-3,
            theta_vol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Good,
    Wedge,
    SliverKite,
    Spire,
    ThinPrism,
    Degenerate,
    NotApplicable,
}

impl Classification {
    pub fn is_bad(&self) -> bool {
        !matches!(self, Classification::Good | Classification::NotApplicable)
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Classification::Good => "good",
            Classification::Wedge => "wedge",
            Classification::SliverKite => "sliver_kite",
            Classification::Spire => "spire",
            Classification::ThinPrism => "thin_prism",
            Classification::Degenerate => "degenerate",
            Classification::NotApplicable => "not_applicable",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    pub element: usize,
    pub min_dihedral: Option<f64>,
    pub max_dihedral: Option<f64>,
    pub min_edge: f64,
    pub min_face_area: f64,
    pub volume: f64,
    pub class: Classification,
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Interior dihedral angle (degrees) at edge p-q between the faces through r and s.
fn dihedral(p: &[f64; 3], q: &[f64; 3], r: &[f64; 3], s: &[f64; 3]) -> f64 {
    let e = sub(q, p);
    let ee = dot(&e, &e);
    let proj = |x: &[f64; 3]| {
        let d = sub(x, p);
        let t = dot(&d, &e) / ee;
        [d[0] - t * e[0], d[1] - t * e[1], d[2] - t * e[2]]
    };
    let u = proj(r);
    let w = proj(s);
    let c = cross(&u, &w);
    dot(&c, &c).sqrt().atan2(dot(&u, &w)).to_degrees()
}

/// The six dihedral angles of a tetrahedron, ordered by edges
/// (0,1),(0,2),(0,3),(1,2),(1,3),(2,3) of its node list.
pub fn dihedral_angles(mesh: &Mesh, e: usize) -> Result<[f64; 6]> {
    let el = &mesh.elements[e];
    if !el.is_tet() {
        return Err(Error::Invalid(format!("element {e} is not a tetrahedron")));
    }
    let p = mesh.element_coords(e);
    const EDGES: [(usize, usize, usize, usize); 6] = [
        (0, 1, 2, 3),
        (0, 2, 1, 3),
        (0, 3, 1, 2),
        (1, 2, 0, 3),
        (1, 3, 0, 2),
        (2, 3, 0, 1),
    ];
    Ok(EDGES.map(|(i, j, k, l)| dihedral(&p[i], &p[j], &p[k], &p[l])))
}

fn min_triangle_angle(p: &[[f64; 3]]) -> f64 {
    (0..3)
        .map(|i| {
            let a = sub(&p[(i + 1) % 3], &p[i]);
            let b = sub(&p[(i + 2) % 3], &p[i]);
            let c = cross(&a, &b);
            dot(&c, &c).sqrt().atan2(dot(&a, &b)).to_degrees()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Raw metrics plus a classification derived only from them and `th`.
pub fn classify(mesh: &Mesh, e: usize, th: &QualityThresholds) -> Result<QualityReport> {
    let g = element_geometry(mesh, e)?;
    let h = g.diameter;
    let el = &mesh.elements[e];
    let mut min_edge = f64::INFINITY;
    for f in &g.facets {
        for i in 0..f.len() {
            let a = f[i];
            let b = f[(i + 1) % f.len()];
            min_edge = min_edge.min(dist(&g.coords[a], &g.coords[b]));
        }
    }
    let (min_face_area, max_face_area) = if g.dim == 3 {
        g.face_areas
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &a| {
                (lo.min(a), hi.max(a))
            })
    } else {
        (g.volume, g.volume)
    };
    let mut rep = QualityReport {
        element: e,
        min_dihedral: None,
        max_dihedral: None,
        min_edge,
        min_face_area,
        volume: g.volume,
        class: Classification::NotApplicable,
    };
    let degenerate = g.volume < TAU_GEOM * h.powi(g.dim as i32);
    if el.is_tet() {
        let ang = dihedral_angles(mesh, e)?;
        let lo = ang.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ang.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        rep.min_dihedral = Some(lo);
        rep.max_dihedral = Some(hi);
        let tiny = g
            .face_areas
            .iter()
            .filter(|&&a| a < th.theta_face * max_face_area)
            .count();
        rep.class = if degenerate {
            Classification::Degenerate
        } else if min_face_area < th.theta_face * h * h && tiny == 1 {
            Classification::Spire
        } else if hi > 180.0 - th.theta_ang && lo < th.theta_ang {
            Classification::SliverKite
        } else if lo < th.theta_ang {
            Classification::Wedge
        } else {
            Classification::Good
        };
    } else if let Some(p) = el.prism() {
        let cap_edge = [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]
            .iter()
            .map(|&(a, b)| dist(&mesh.vertices[p[a]], &mesh.vertices[p[b]]))
            .fold(f64::INFINITY, f64::min);
        rep.class = if degenerate {
            Classification::Degenerate
        } else if cap_edge < th.theta_edge * h {
            Classification::ThinPrism
        } else {
            Classification::Good
        };
    } else if let Element::Polygon(l) = el {
        if l.len() == 3 {
            let ang = min_triangle_angle(&g.coords);
            rep.min_dihedral = Some(ang);
            rep.class = if degenerate {
                Classification::Degenerate
            } else if ang < th.theta_ang {
                Classification::Wedge
            } else {
                Classification::Good
            };
        }
    }
    Ok(rep)
}

pub fn classify_all(mesh: &Mesh, th: &QualityThresholds) -> Result<Vec<QualityReport>> {
    (0..mesh.elements.len())
        .map(|e| classify(mesh, e, th))
        .collect()
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.16e}")).unwrap_or_default()
}

/// CSV with header element_id,class,min_dihedral_deg,max_dihedral_deg,min_edge,min_face_area,volume.
pub fn report_csv(reports: &[QualityReport]) -> String {
    let mut s = String::from(
        "element_id,class,min_dihedral_deg,max_dihedral_deg,min_edge,min_face_area,volume\n",
    );
    for r in reports {
        let _ = writeln!(
            s,
            "{},{},{},{},{:.16e},{:.16e},{:.16e}",
            r.element,
            r.class,
            opt(r.min_dihedral),
            opt(r.max_dihedral),
            r.min_edge,
            r.min_face_area,
            r.volume
        );
    }
    s
}
