//! First-order virtual element stiffness and mass matrices.
//!
//! Local dofs are ordered [all x | all y | all z]. The vector monomial basis
//! lists rigid-body modes first, then strain modes; in 3D the twelve members are
//! (1,0,0), (0,1,0), (0,0,1), (0,-ζ,η), (ζ,0,-ξ), (-η,ξ,0), (0,ζ,η), (ζ,0,ξ),
//! (η,ξ,0), (ξ,0,0), (0,η,0), (0,0,ζ), and in 2D (1,0), (0,1), (-η,ξ), (η,ξ),
//! (ξ,0), (0,η), with ξ = (x - x_E)/h_E.

use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::material::MaterialParams;
use crate::mesh::ElementGeometry;

/// Stabilization scale α₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Alpha0 {
    /// α₀ = 1
    Unit,
    /// α₀ = h_E
    Diameter,
    Value(f64),
}

impl Alpha0 {
    pub fn value(&self, h: f64) -> f64 {
        match self {
            Alpha0::Unit => 1.0,
            Alpha0::Diameter => h,
            Alpha0::Value(v) => *v,
        }
    }

    /// Default policy: 1 in 2D, h_E in 3D.
    pub fn default_for(dim: usize) -> Self {
        if dim == 2 {
            Alpha0::Unit
        } else {
            Alpha0::Diameter
        }
    }
}

impl FromStr for Alpha0 {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "unit" | "one" => Ok(Alpha0::Unit),
            "diameter" | "h" | "h_e" => Ok(Alpha0::Diameter),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|v| *v > 0.0 && v.is_finite())
                .map(Alpha0::Value)
                .ok_or_else(|| Error::Parse(format!("bad alpha0 '{s}' (unit|diameter|<number>)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lumping {
    RowSum,
    DiagScale,
    /// Row-sum for convex elements, diagonal scaling otherwise.
    Auto,
}

impl FromStr for Lumping {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "row_sum" | "rowsum" | "row" => Ok(Lumping::RowSum),
            "diag_scale" | "diag" | "diagonal" => Ok(Lumping::DiagScale),
            "auto" => Ok(Lumping::Auto),
            _ => Err(Error::Parse(format!(
                "bad lumping '{s}' (row_sum|diag_scale|auto)"
            ))),
        }
    }
}

impl std::fmt::Display for Lumping {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Lumping::RowSum => "row_sum",
            Lumping::DiagScale => "diag_scale",
            Lumping::Auto => "auto",
        })
    }
}

/// Linear vector monomials m_α(ξ) = c_α + A_α ξ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VectorMonomialBasis {
    pub dim: usize,
}

impl VectorMonomialBasis {
    pub fn new(dim: usize) -> Self {
        assert!(dim == 2 || dim == 3);
        VectorMonomialBasis { dim }
    }

    pub fn len(&self) -> usize {
        if self.dim == 2 {
            6
        } else {
            12
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of rigid-body modes.
    pub fn rigid(&self) -> usize {
        if self.dim == 2 {
            3
        } else {
            6
        }
    }

    /// Number of Voigt strain components.
    pub fn voigt(&self) -> usize {
        if self.dim == 2 {
            3
        } else {
            6
        }
    }

    /// (constant part, linear part A with value_i = sum_j A[i][j] ξ_j).
    pub fn coefficients(&self, alpha: usize) -> ([f64; 3], [[f64; 3]; 3]) {
        let mut c = [0.0; 3];
        let mut a = [[0.0; 3]; 3];
        if self.dim == 3 {
            match alpha {
                0..=2 => c[alpha] = 1.0,
                3 => {
                    a[1][2] = -1.0;
                    a[2][1] = 1.0;
                }
                4 => {
                    a[0][2] = 1.0;
                    a[2][0] = -1.0;
                }
                5 => {
                    a[0][1] = -1.0;
                    a[1][0] = 1.0;
                }
                6 => {
                    a[1][2] = 1.0;
                    a[2][1] = 1.0;
                }
                7 => {
                    a[0][2] = 1.0;
                    a[2][0] = 1.0;
                }
                8 => {
                    a[0][1] = 1.0;
                    a[1][0] = 1.0;
                }
                9..=11 => a[alpha - 9][alpha - 9] = 1.0,
                _ => panic!("basis index out of range"),
            }
        } else {
            match alpha {
                0 | 1 => c[alpha] = 1.0,
                2 => {
                    a[0][1] = -1.0;
                    a[1][0] = 1.0;
                }
                3 => {
                    a[0][1] = 1.0;
                    a[1][0] = 1.0;
                }
                4 | 5 => a[alpha - 4][alpha - 4] = 1.0,
                _ => panic!("basis index out of range"),
            }
        }
        (c, a)
    }

    pub fn eval(&self, alpha: usize, xi: &[f64; 3]) -> [f64; 3] {
        let (c, a) = self.coefficients(alpha);
        let mut v = c;
        for i in 0..3 {
            for j in 0..3 {
                v[i] += a[i][j] * xi[j];
            }
        }
        v
    }

    /// Engineering Voigt strain of m_α((x - x_E)/h).
    pub fn strain(&self, alpha: usize, h: f64) -> Vec<f64> {
        let (_, a) = self.coefficients(alpha);
        if self.dim == 3 {
            vec![
                a[0][0] / h,
                a[1][1] / h,
                a[2][2] / h,
                (a[1][2] + a[2][1]) / h,
                (a[0][2] + a[2][0]) / h,
                (a[0][1] + a[1][0]) / h,
            ]
        } else {
            vec![a[0][0] / h, a[1][1] / h, (a[0][1] + a[1][0]) / h]
        }
    }
}

/// Traction σ·n from a Voigt stress vector.
fn traction(dim: usize, s: &[f64], n: &[f64; 3]) -> [f64; 3] {
    if dim == 3 {
        [
            s[0] * n[0] + s[5] * n[1] + s[4] * n[2],
            s[5] * n[0] + s[1] * n[1] + s[3] * n[2],
            s[4] * n[0] + s[3] * n[1] + s[2] * n[2],
        ]
    } else {
        [s[0] * n[0] + s[2] * n[1], s[2] * n[0] + s[1] * n[1], 0.0]
    }
}

/// Constitutive matrix: 3D Hooke (6x6) or plane strain (3x3).
pub fn constitutive(mat: &MaterialParams, dim: usize) -> DMatrix<f64> {
    if dim == 3 {
        let c = mat.c3d();
        DMatrix::from_fn(6, 6, |i, j| c[(i, j)])
    } else {
        let c = mat.c_plane_strain();
        DMatrix::from_fn(3, 3, |i, j| c[(i, j)])
    }
}

/// Energy and L² projector matrices of one element.
#[derive(Debug, Clone)]
pub struct ProjectorSet {
    pub d: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub g_tilde: DMatrix<f64>,
    pub b_hat: DMatrix<f64>,
    pub pi_star: DMatrix<f64>,
    pub pi: DMatrix<f64>,
    pub d0: DMatrix<f64>,
    pub g0: DMatrix<f64>,
    pub b0_hat: DMatrix<f64>,
    pub s0: DMatrix<f64>,
    pub pi0_star: DMatrix<f64>,
    pub pi0: DMatrix<f64>,
}

/// Element matrices with their ingredients.
#[derive(Debug, Clone)]
pub struct ElementMatrices {
    pub k: DMatrix<f64>,
    pub k_c: DMatrix<f64>,
    pub k_s: DMatrix<f64>,
    pub m: DMatrix<f64>,
    pub m_c: DMatrix<f64>,
    pub m_s: DMatrix<f64>,
    pub alpha0: f64,
    pub s_diag: DVector<f64>,
    pub c: DMatrix<f64>,
    pub b_tilde: DMatrix<f64>,
    pub sigma_star: DMatrix<f64>,
    pub h0: DMatrix<f64>,
    pub projectors: ProjectorSet,
}

/// D[i, α] = dof_i(m_α), rows ordered [all x | all y | all z].
pub fn build_dof_matrix(geom: &ElementGeometry) -> DMatrix<f64> {
    let basis = VectorMonomialBasis::new(geom.dim);
    let n = geom.num_nodes();
    let xi = geom.scaled_coords();
    let mut d = DMatrix::zeros(geom.dim * n, basis.len());
    for alpha in 0..basis.len() {
        for (a, x) in xi.iter().enumerate() {
            let v = basis.eval(alpha, x);
            for comp in 0..geom.dim {
                d[(comp * n + a, alpha)] = v[comp];
            }
        }
    }
    d
}

/// B̃ = ε(M̂): column α is the Voigt strain of m_α.
pub fn b_tilde(dim: usize, h: f64) -> DMatrix<f64> {
    let basis = VectorMonomialBasis::new(dim);
    let mut b = DMatrix::zeros(basis.voigt(), basis.len());
    for alpha in 0..basis.len() {
        for (i, s) in basis.strain(alpha, h).into_iter().enumerate() {
            b[(i, alpha)] = s;
        }
    }
    b
}

fn solve(g: &DMatrix<f64>, rhs: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let lu = g.clone().full_piv_lu();
    if !lu.is_invertible() {
        return Err(Error::Numerical(format!(
            "singular {what} (degenerate element)"
        )));
    }
    let x = lu
        .solve(rhs)
        .ok_or_else(|| Error::Numerical(format!("singular {what} (degenerate element)")))?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!("non-finite solve with {what}")));
    }
    Ok(x)
}

/// Energy projector: returns (G, G̃, B̂, Π*, Π) together with D.
#[allow(clippy::type_complexity)]
pub fn energy_projector(
    geom: &ElementGeometry,
    c: &DMatrix<f64>,
) -> Result<(
    DMatrix<f64>,
    DMatrix<f64>,
    DMatrix<f64>,
    DMatrix<f64>,
    DMatrix<f64>,
    DMatrix<f64>,
)> {
    let dim = geom.dim;
    let basis = VectorMonomialBasis::new(dim);
    let n = geom.num_nodes();
    let nm = basis.len();
    let r = basis.rigid();
    let d = build_dof_matrix(geom);
    let bt = b_tilde(dim, geom.diameter);
    let sigma = c * &bt;
    let g_tilde = bt.transpose() * &sigma * geom.volume;
    let dtd = d.transpose() * &d;
    let mut g = g_tilde.clone();
    for i in 0..r {
        for j in 0..nm {
            g[(i, j)] = dtd[(i, j)] / n as f64;
        }
    }
    let mut b_hat = DMatrix::zeros(nm, dim * n);
    for i in 0..r {
        for k in 0..dim * n {
            b_hat[(i, k)] = d[(k, i)] / n as f64;
        }
    }
    for (f, (area, normal)) in geom
        .facets
        .iter()
        .zip(geom.face_areas.iter().zip(&geom.face_normals))
    {
        let share = area / f.len() as f64;
        for alpha in r..nm {
            let s: Vec<f64> = sigma.column(alpha).iter().copied().collect();
            let t = traction(dim, &s, normal);
            for &kk in f {
                for comp in 0..dim {
                    b_hat[(alpha, comp * n + kk)] += t[comp] * share;
                }
            }
        }
    }
    let pi_star = solve(&g, &b_hat, "G")?;
    let pi = &d * &pi_star;
    Ok((d, g, g_tilde, b_hat, pi_star, pi))
}

/// L² projector: returns (D₀, G₀, B̂₀, S₀, Π⁰*, Π⁰).
#[allow(clippy::type_complexity)]
pub fn l2_projector(
    geom: &ElementGeometry,
) -> Result<(
    DMatrix<f64>,
    DMatrix<f64>,
    DMatrix<f64>,
    DMatrix<f64>,
    DMatrix<f64>,
    DMatrix<f64>,
)> {
    let dim = geom.dim;
    let n = geom.num_nodes();
    let h = geom.diameter;
    let xi = geom.scaled_coords();
    let d0 = DMatrix::from_fn(n, dim + 1, |a, j| if j == 0 { 1.0 } else { xi[a][j - 1] });
    let dtd = d0.transpose() * &d0;
    let mut g0 = DMatrix::zeros(dim + 1, dim + 1);
    for j in 0..=dim {
        g0[(0, j)] = dtd[(0, j)] / n as f64;
    }
    for i in 1..=dim {
        g0[(i, i)] = geom.volume / (h * h);
    }
    let mut b0 = DMatrix::zeros(dim + 1, n);
    for k in 0..n {
        b0[(0, k)] = 1.0 / n as f64;
    }
    for (f, (area, normal)) in geom
        .facets
        .iter()
        .zip(geom.face_areas.iter().zip(&geom.face_normals))
    {
        for &kk in f {
            for i in 0..dim {
                b0[(i + 1, kk)] += normal[i] * area / (dim as f64 * h);
            }
        }
    }
    let s0 = solve(&g0, &b0, "G0")?;
    let p0 = &d0 * &s0;
    let mut pi0_star = DMatrix::zeros(dim * (dim + 1), dim * n);
    let mut pi0 = DMatrix::zeros(dim * n, dim * n);
    for comp in 0..dim {
        pi0_star
            .view_mut((comp * (dim + 1), comp * n), (dim + 1, n))
            .copy_from(&s0);
        pi0.view_mut((comp * n, comp * n), (n, n)).copy_from(&p0);
    }
    Ok((d0, g0, b0, s0, pi0_star, pi0))
}

/// ρ times the order-<=2 moment matrix of (1, ξ, η, ζ).
pub fn moment_matrix(geom: &ElementGeometry, rho: f64) -> DMatrix<f64> {
    let dim = geom.dim;
    let sm = &geom.scaled_moments;
    DMatrix::from_fn(dim + 1, dim + 1, |i, j| {
        rho * match (i, j) {
            (0, 0) => sm.volume,
            (0, j) => sm.first[j - 1],
            (i, 0) => sm.first[i - 1],
            (i, j) => sm.second[i - 1][j - 1],
        }
    })
}

fn block_diag(a: &DMatrix<f64>, dim: usize) -> DMatrix<f64> {
    let n = a.nrows();
    let mut out = DMatrix::zeros(dim * n, dim * n);
    for comp in 0..dim {
        out.view_mut((comp * n, comp * n), (n, n)).copy_from(a);
    }
    out
}

/// Stiffness and mass of a virtual element.
pub fn element_matrices(
    geom: &ElementGeometry,
    mat: &MaterialParams,
    alpha0: Alpha0,
) -> Result<ElementMatrices> {
    let dim = geom.dim;
    let c = constitutive(mat, dim);
    let (d, g, g_tilde, b_hat, pi_star, pi) = energy_projector(geom, &c)?;
    let k_c = pi_star.transpose() * &g_tilde * &pi_star;
    let ndof = d.nrows();
    let m_count = VectorMonomialBasis::new(dim).voigt() as f64;
    let a0 = alpha0.value(geom.diameter);
    let floor = a0 * c.trace() / m_count;
    let s_diag = DVector::from_fn(ndof, |i, _| floor.max(k_c[(i, i)]));
    let ip = DMatrix::identity(ndof, ndof) - &pi;
    let k_s = ip.transpose() * DMatrix::from_diagonal(&s_diag) * &ip;
    let k = &k_c + &k_s;

    let (d0, g0, b0_hat, s0, pi0_star, pi0) = l2_projector(geom)?;
    let rho = mat.density;
    let h0 = moment_matrix(geom, rho);
    let mc1 = s0.transpose() * &h0 * &s0;
    let n = geom.num_nodes();
    let ip0 = DMatrix::identity(n, n) - &d0 * &s0;
    let ms1 = ip0.transpose() * &ip0 * (rho * geom.volume);
    let m_c = block_diag(&mc1, dim);
    let m_s = block_diag(&ms1, dim);
    let m = &m_c + &m_s;
    let bt = b_tilde(dim, geom.diameter);
    let sigma_star = &c * &bt;
    Ok(ElementMatrices {
        k,
        k_c,
        k_s,
        m,
        m_c,
        m_s,
        alpha0: a0,
        s_diag,
        c,
        b_tilde: bt,
        sigma_star,
        h0: block_diag(&h0, dim),
        projectors: ProjectorSet {
            d,
            g,
            g_tilde,
            b_hat,
            pi_star,
            pi,
            d0,
            g0,
            b0_hat,
            s0,
            pi0_star,
            pi0,
        },
    })
}

/// Diagonal lumped mass. `mode` must be RowSum or DiagScale.
pub fn lump(
    m: &DMatrix<f64>,
    mode: Lumping,
    rho: f64,
    volume: f64,
    dim: usize,
) -> Result<DVector<f64>> {
    match mode {
        Lumping::RowSum => {
            let l = DVector::from_fn(m.nrows(), |i, _| m.row(i).sum());
            if let Some(i) = l.iter().position(|&v| !(v > 0.0)) {
                return Err(Error::Numerical(format!(
                    "row-sum lumping gives non-positive mass at local dof {i}; use diag_scale"
                )));
            }
            Ok(l)
        }
        Lumping::DiagScale => {
            let tr = m.trace();
            let s = dim as f64 * rho * volume / tr;
            let l = DVector::from_fn(m.nrows(), |i, _| m[(i, i)] * s);
            if l.iter().any(|&v| !(v > 0.0)) {
                return Err(Error::Numerical(
                    "diagonal scaling gives non-positive mass".into(),
                ));
            }
            Ok(l)
        }
        Lumping::Auto => Err(Error::Invalid("lump() needs a concrete mode".into())),
    }
}
