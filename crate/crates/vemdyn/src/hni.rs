//! Homogeneous numerical integration (HNI) of monomials over polygons and
//! polyhedra with planar faces.
//!
//! The volume integral of a homogeneous function of degree q reduces to a
//! weighted sum of face integrals, each face integral reduces to edge integrals,
//! and each edge integral reduces to vertex evaluations. Lower-degree terms are
//! reused bottom-up, so a full table up to degree `q` costs one pass per facet.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Exponents (a, b, c) of the monomial x^a y^b z^c.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MonomialExponent(pub [u32; 3]);

impl MonomialExponent {
    pub fn new(a: u32, b: u32, c: u32) -> Self {
        MonomialExponent([a, b, c])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl fmt::Display for MonomialExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.0[0], self.0[1], self.0[2])
    }
}

impl FromStr for MonomialExponent {
    type Err = Error;

    /// Parses "a,b" or "a,b,c"; negative or non-integer entries are rejected.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() < 2 || parts.len() > 3 {
            return Err(Error::Parse(format!(
                "exponent '{s}' must have 2 or 3 entries"
            )));
        }
        let mut e = [0u32; 3];
        for (i, p) in parts.iter().enumerate() {
            if p.starts_with('-') {
                return Err(Error::Invalid(format!("negative exponent in '{s}'")));
            }
            e[i] = p
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent entry '{p}'")))?;
        }
        Ok(MonomialExponent(e))
    }
}

/// Integration domain. Polygon loops are counter-clockwise; polyhedron faces
/// are triangles with outward orientation.
#[derive(Debug, Clone, Copy)]
pub enum Polytope<'a> {
    Polygon(&'a [[f64; 2]]),
    Polyhedron {
        vertices: &'a [[f64; 3]],
        faces: &'a [[usize; 3]],
    },
}

impl Polytope<'_> {
    pub fn dim(&self) -> usize {
        match self {
            Polytope::Polygon(_) => 2,
            Polytope::Polyhedron { .. } => 3,
        }
    }
}

/// Integrals of all monomials up to a fixed total degree.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialTable {
    max_degree: u32,
    vals: Vec<f64>,
}

impl MonomialTable {
    fn zeros(max_degree: u32) -> Self {
        let n = (max_degree + 1) as usize;
        MonomialTable {
            max_degree,
            vals: vec![0.0; n * n * n],
        }
    }

    fn idx(&self, a: u32, b: u32, c: u32) -> usize {
        let n = (self.max_degree + 1) as usize;
        a as usize + n * (b as usize + n * c as usize)
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    /// Integral of x^a y^b z^c; panics if the degree exceeds the table.
    pub fn get(&self, a: u32, b: u32, c: u32) -> f64 {
        assert!(a + b + c <= self.max_degree, "monomial degree beyond table");
        self.vals[self.idx(a, b, c)]
    }

    fn set(&mut self, a: u32, b: u32, c: u32, v: f64) {
        let i = self.idx(a, b, c);
        self.vals[i] = v;
    }

    fn add_scaled(&mut self, other: &MonomialTable, s: f64) {
        for (x, y) in self.vals.iter_mut().zip(&other.vals) {
            *x += s * y;
        }
    }
}

fn exponents_of_degree(q: u32, dim: usize) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    if dim == 2 {
        for a in (0..=q).rev() {
            out.push([a, q - a, 0]);
        }
    } else {
        for a in (0..=q).rev() {
            for b in (0..=q - a).rev() {
                out.push([a, b, q - a - b]);
            }
        }
    }
    out
}

fn monomial(p: &[f64; 3], e: [u32; 3]) -> f64 {
    p[0].powi(e[0] as i32) * p[1].powi(e[1] as i32) * p[2].powi(e[2] as i32)
}

/// Adds the Euler term sum_k e_k x0_k T[e - 1_k].
fn euler_term(t: &MonomialTable, e: [u32; 3], x0: &[f64; 3]) -> f64 {
    let mut s = 0.0;
    for k in 0..3 {
        if e[k] > 0 && x0[k] != 0.0 {
            let mut m = e;
            m[k] -= 1;
            s += e[k] as f64 * x0[k] * t.get(m[0], m[1], m[2]);
        }
    }
    s
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

fn norm(a: &[f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// Newell normal of a planar polygon (length = twice the area).
pub fn newell_normal(pts: &[[f64; 3]]) -> [f64; 3] {
    let mut n = [0.0; 3];
    let m = pts.len();
    for i in 0..m {
        let p = &pts[i];
        let q = &pts[(i + 1) % m];
        n[0] += (p[1] - q[1]) * (p[2] + q[2]);
        n[1] += (p[2] - q[2]) * (p[0] + q[0]);
        n[2] += (p[0] - q[0]) * (p[1] + q[1]);
    }
    n
}

/// Integrals over the segment p0-p1 (arc-length measure).
fn edge_table(p0: &[f64; 3], p1: &[f64; 3], max_degree: u32, dim: usize) -> MonomialTable {
    let mut t = MonomialTable::zeros(max_degree);
    let len = norm(&sub(p1, p0));
    for q in 0..=max_degree {
        for e in exponents_of_degree(q, dim) {
            let v = (len * monomial(p1, e) + euler_term(&t, e, p0)) / (1.0 + q as f64);
            t.set(e[0], e[1], e[2], v);
        }
    }
    t
}

/// Integrals over a planar polygonal face in 3D with unit normal `nf`.
fn face_table(pts: &[[f64; 3]], nf: &[f64; 3], max_degree: u32) -> MonomialTable {
    let m = pts.len();
    let x0 = pts[0];
    let mut edges = Vec::new();
    for i in 1..m.saturating_sub(1) {
        let a = &pts[i];
        let b = &pts[i + 1];
        let t = sub(b, a);
        let len = norm(&t);
        if len == 0.0 {
            continue;
        }
        let ne = cross(&t, nf);
        let nn = norm(&ne);
        if nn == 0.0 {
            continue;
        }
        let d = dot(&sub(a, &x0), &ne) / nn;
        edges.push((d, edge_table(a, b, max_degree, 3)));
    }
    let mut t = MonomialTable::zeros(max_degree);
    for q in 0..=max_degree {
        for e in exponents_of_degree(q, 3) {
            let mut s = euler_term(&t, e, &x0);
            for (d, et) in &edges {
                s += d * et.get(e[0], e[1], e[2]);
            }
            t.set(e[0], e[1], e[2], s / (2.0 + q as f64));
        }
    }
    t
}

/// Sum of area-weighted face normals, and the largest face area.
pub fn closure_defect(vertices: &[[f64; 3]], faces: &[[usize; 3]]) -> ([f64; 3], f64) {
    let mut s = [0.0; 3];
    let mut amax: f64 = 0.0;
    for f in faces {
        let p = [vertices[f[0]], vertices[f[1]], vertices[f[2]]];
        let n = newell_normal(&p);
        for k in 0..3 {
            s[k] += 0.5 * n[k];
        }
        amax = amax.max(0.5 * norm(&n));
    }
    (s, amax)
}

/// Largest admissible closure defect: 1e-12 of the largest face area plus the
/// rounding floor of the face cross products.
pub fn closure_tolerance(vertices: &[[f64; 3]], faces: &[[usize; 3]], amax: f64) -> f64 {
    let floor: f64 = faces
        .iter()
        .map(|f| {
            (0..3)
                .map(|i| {
                    let (a, b) = (vertices[f[i]], vertices[f[(i + 1) % 3]]);
                    let d = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
                    d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
                })
                .fold(0.0, f64::max)
        })
        .sum();
    1e-12 * amax + 64.0 * f64::EPSILON * floor
}

fn check_domain(p: &Polytope) -> Result<()> {
    match p {
        Polytope::Polygon(v) => {
            if v.len() < 3 {
                return Err(Error::Invalid("polygon needs at least 3 vertices".into()));
            }
        }
        Polytope::Polyhedron { vertices, faces } => {
            if faces.len() < 4 {
                return Err(Error::Invalid("polyhedron needs at least 4 faces".into()));
            }
            if faces.iter().flatten().any(|&i| i >= vertices.len()) {
                return Err(Error::Invalid("face index out of range".into()));
            }
            let (s, amax) = closure_defect(vertices, faces);
            if norm(&s) > closure_tolerance(vertices, faces, amax) {
                return Err(Error::Invalid(format!(
                    "polyhedron is not watertight (|sum a n| = {:e})",
                    norm(&s)
                )));
            }
        }
    }
    Ok(())
}

/// All monomial integrals up to `max_degree` over the polytope, in its own
/// coordinates.
pub fn integrate_all(p: &Polytope, max_degree: u32) -> Result<MonomialTable> {
    check_domain(p)?;
    let mut out = MonomialTable::zeros(max_degree);
    match p {
        Polytope::Polygon(v) => {
            let m = v.len();
            for i in 0..m {
                let a = [v[i][0], v[i][1], 0.0];
                let b = [v[(i + 1) % m][0], v[(i + 1) % m][1], 0.0];
                let t = sub(&b, &a);
                let len = norm(&t);
                if len == 0.0 {
                    continue;
                }
                let be = (t[1] * a[0] - t[0] * a[1]) / len;
                if be == 0.0 {
                    continue;
                }
                let et = edge_table(&a, &b, max_degree, 2);
                out.add_scaled(&et, be);
            }
        }
        Polytope::Polyhedron { vertices, faces } => {
            for f in faces.iter() {
                let pts = [vertices[f[0]], vertices[f[1]], vertices[f[2]]];
                let n = newell_normal(&pts);
                let nn = norm(&n);
                if nn == 0.0 {
                    continue;
                }
                let nf = [n[0] / nn, n[1] / nn, n[2] / nn];
                let bf = dot(&nf, &pts[0]);
                if bf == 0.0 {
                    continue;
                }
                let ft = face_table(&pts, &nf, max_degree);
                out.add_scaled(&ft, bf);
            }
        }
    }
    let dim = p.dim() as f64;
    for q in 0..=max_degree {
        for e in exponents_of_degree(q, 3) {
            let v = out.get(e[0], e[1], e[2]) / (dim + q as f64);
            out.set(e[0], e[1], e[2], v);
        }
    }
    Ok(out)
}

/// Integral of a single monomial over the polytope.
pub fn integrate_monomial(p: &Polytope, e: MonomialExponent) -> Result<f64> {
    if p.dim() == 2 && e.0[2] != 0 {
        return Err(Error::Invalid("z exponent on a 2D polygon".into()));
    }
    let t = integrate_all(p, e.degree())?;
    Ok(t.get(e.0[0], e.0[1], e.0[2]))
}

/// Order-<=2 integrals of the scaled monomials (x - x_E)/h_E.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledMoments {
    pub dim: usize,
    /// |E|
    pub volume: f64,
    /// integrals of xi, eta, zeta
    pub first: [f64; 3],
    /// integrals of xi_i * xi_j
    pub second: [[f64; 3]; 3],
}

fn binom(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Integral of (x - c)^e over the domain, from raw monomial integrals.
pub fn shifted_moment(raw: &MonomialTable, c: &[f64; 3], e: [u32; 3]) -> f64 {
    let mut s = 0.0;
    for i in 0..=e[0] {
        for j in 0..=e[1] {
            for k in 0..=e[2] {
                let coef = binom(e[0], i)
                    * binom(e[1], j)
                    * binom(e[2], k)
                    * (-c[0]).powi((e[0] - i) as i32)
                    * (-c[1]).powi((e[1] - j) as i32)
                    * (-c[2]).powi((e[2] - k) as i32);
                s += coef * raw.get(i, j, k);
            }
        }
    }
    s
}

/// Raw integrals up to degree 2 together with the reference point they are
/// taken about (the first vertex, which keeps the expansion well conditioned).
#[derive(Debug, Clone)]
pub struct LocalMoments {
    pub origin: [f64; 3],
    pub raw: MonomialTable,
}

impl LocalMoments {
    pub fn compute(p: &Polytope) -> Result<Self> {
        let origin = match p {
            Polytope::Polygon(v) => [v[0][0], v[0][1], 0.0],
            Polytope::Polyhedron { vertices, faces } => vertices[faces[0][0]],
        };
        let raw = match p {
            Polytope::Polygon(v) => {
                let local: Vec<[f64; 2]> = v
                    .iter()
                    .map(|q| [q[0] - origin[0], q[1] - origin[1]])
                    .collect();
                integrate_all(&Polytope::Polygon(&local), 2)?
            }
            Polytope::Polyhedron { vertices, faces } => {
                let local: Vec<[f64; 3]> = vertices.iter().map(|q| sub(q, &origin)).collect();
                integrate_all(
                    &Polytope::Polyhedron {
                        vertices: &local,
                        faces,
                    },
                    2,
                )?
            }
        };
        Ok(LocalMoments { origin, raw })
    }

    pub fn volume(&self) -> f64 {
        self.raw.get(0, 0, 0)
    }

    /// Volume centroid.
    pub fn centroid(&self) -> [f64; 3] {
        let v = self.volume();
        [
            self.origin[0] + self.raw.get(1, 0, 0) / v,
            self.origin[1] + self.raw.get(0, 1, 0) / v,
            self.origin[2] + self.raw.get(0, 0, 1) / v,
        ]
    }

    /// Scaled moments about (x_e, h_e) by binomial expansion of the raw table.
    pub fn scaled(&self, dim: usize, x_e: &[f64; 3], h_e: f64) -> ScaledMoments {
        let c = sub(x_e, &self.origin);
        let mut first = [0.0; 3];
        let mut second = [[0.0; 3]; 3];
        for i in 0..dim {
            let mut e = [0u32; 3];
            e[i] = 1;
            first[i] = shifted_moment(&self.raw, &c, e) / h_e;
            for j in i..dim {
                let mut e2 = [0u32; 3];
                e2[i] += 1;
                e2[j] += 1;
                let v = shifted_moment(&self.raw, &c, e2) / (h_e * h_e);
                second[i][j] = v;
                second[j][i] = v;
            }
        }
        ScaledMoments {
            dim,
            volume: self.volume(),
            first,
            second,
        }
    }
}

/// Scaled moment table about (x_e, h_e).
pub fn scaled_moments(p: &Polytope, x_e: &[f64; 3], h_e: f64) -> Result<ScaledMoments> {
    Ok(LocalMoments::compute(p)?.scaled(p.dim(), x_e, h_e))
}
