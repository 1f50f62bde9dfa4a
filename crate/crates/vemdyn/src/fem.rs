//! Linear reference finite elements (tri3 plane strain, tet4, prism6).
//! Dofs are ordered [all x | all y | all z] as in the virtual elements.

use nalgebra::{DMatrix, Matrix3};

use crate::error::{Error, Result};
use crate::material::MaterialParams;
use crate::vem::constitutive;

/// Strain-displacement matrix from nodal shape-function gradients.
fn b_matrix(grads: &[[f64; 3]], dim: usize) -> DMatrix<f64> {
    let n = grads.len();
    if dim == 3 {
        let mut b = DMatrix::zeros(6, 3 * n);
        for (a, g) in grads.iter().enumerate() {
            let (x, y, z) = (a, n + a, 2 * n + a);
            b[(0, x)] = g[0];
            b[(1, y)] = g[1];
            b[(2, z)] = g[2];
            b[(3, y)] = g[2];
            b[(3, z)] = g[1];
            b[(4, x)] = g[2];
            b[(4, z)] = g[0];
            b[(5, x)] = g[1];
            b[(5, y)] = g[0];
        }
        b
    } else {
        let mut b = DMatrix::zeros(3, 2 * n);
        for (a, g) in grads.iter().enumerate() {
            b[(0, a)] = g[0];
            b[(1, n + a)] = g[1];
            b[(2, a)] = g[1];
            b[(2, n + a)] = g[0];
        }
        b
    }
}

fn block_diag(a: &DMatrix<f64>, dim: usize) -> DMatrix<f64> {
    let n = a.nrows();
    let mut out = DMatrix::zeros(dim * n, dim * n);
    for c in 0..dim {
        out.view_mut((c * n, c * n), (n, n)).copy_from(a);
    }
    out
}

fn simplex_mass(n: usize, rho_measure: f64, denom: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        rho_measure * if i == j { 2.0 } else { 1.0 } / denom
    })
}

/// Constant-strain tetrahedron: (K, consistent M).
pub fn tet4_matrices(
    v: &[[f64; 3]; 4],
    mat: &MaterialParams,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let j = Matrix3::from_fn(|r, c| v[c + 1][r] - v[0][r]);
    let det = j.determinant();
    if !(det > 0.0) {
        return Err(Error::Numerical(format!(
            "inverted or flat tetrahedron (6V = {det:e})"
        )));
    }
    let jinv_t = j
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular tetrahedron Jacobian".into()))?
        .transpose();
    let mut grads = [[0.0; 3]; 4];
    for a in 1..4 {
        let mut e = nalgebra::Vector3::zeros();
        e[a - 1] = 1.0;
        let g = jinv_t * e;
        grads[a] = [g[0], g[1], g[2]];
        for k in 0..3 {
            grads[0][k] -= g[k];
        }
    }
    let vol = det / 6.0;
    let b = b_matrix(&grads, 3);
    let c = constitutive(mat, 3);
    let k = b.transpose() * c * &b * vol;
    let m = block_diag(&simplex_mass(4, mat.density * vol, 20.0), 3);
    Ok((k, m))
}

/// Constant-strain plane-strain triangle (unit thickness): (K, consistent M).
pub fn tri3_matrices(
    v: &[[f64; 2]; 3],
    mat: &MaterialParams,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let det = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]);
    if !(det > 0.0) {
        return Err(Error::Numerical(format!(
            "inverted or flat triangle (2A = {det:e})"
        )));
    }
    let area = det / 2.0;
    let mut grads = [[0.0; 3]; 3];
    for a in 0..3 {
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        grads[a] = [(v[b][1] - v[c][1]) / det, (v[c][0] - v[b][0]) / det, 0.0];
    }
    let b = b_matrix(&grads, 2);
    let c = constitutive(mat, 2);
    let k = b.transpose() * c * &b * area;
    let m = block_diag(&simplex_mass(3, mat.density * area, 12.0), 2);
    Ok((k, m))
}

/// Linear six-node wedge [a, b, c, a', b', c'] with a 3-point triangle rule
/// times 2-point Gauss rule: (K, consistent M).
pub fn prism6_matrices(
    v: &[[f64; 3]; 6],
    mat: &MaterialParams,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let g = 1.0 / 3f64.sqrt();
    let tri = [
        (1.0 / 6.0, 1.0 / 6.0),
        (2.0 / 3.0, 1.0 / 6.0),
        (1.0 / 6.0, 2.0 / 3.0),
    ];
    let c = constitutive(mat, 3);
    let mut k = DMatrix::zeros(18, 18);
    let mut ms = DMatrix::zeros(6, 6);
    for &(r, s) in &tri {
        for t in [-g, g] {
            let w = 1.0 / 6.0;
            let l = [1.0 - r - s, r, s];
            let dl = [(-1.0, -1.0), (1.0, 0.0), (0.0, 1.0)];
            let mut n = [0.0; 6];
            let mut dn = [[0.0; 3]; 6];
            for i in 0..3 {
                n[i] = l[i] * (1.0 - t) / 2.0;
                n[i + 3] = l[i] * (1.0 + t) / 2.0;
                dn[i] = [
                    dl[i].0 * (1.0 - t) / 2.0,
                    dl[i].1 * (1.0 - t) / 2.0,
                    -l[i] / 2.0,
                ];
                dn[i + 3] = [
                    dl[i].0 * (1.0 + t) / 2.0,
                    dl[i].1 * (1.0 + t) / 2.0,
                    l[i] / 2.0,
                ];
            }
            // J[p][q] = d x_q / d ref_p
            let j = Matrix3::from_fn(|p, q| (0..6).map(|a| dn[a][p] * v[a][q]).sum());
            let det = j.determinant();
            if !(det > 0.0) {
                return Err(Error::Numerical(format!(
                    "non-positive prism Jacobian ({det:e}) at a quadrature point"
                )));
            }
            let jinv = j.try_inverse().unwrap();
            let grads: Vec<[f64; 3]> = dn
                .iter()
                .map(|d| {
                    let x = jinv * nalgebra::Vector3::new(d[0], d[1], d[2]);
                    [x[0], x[1], x[2]]
                })
                .collect();
            let b = b_matrix(&grads, 3);
            k += b.transpose() * &c * &b * (det * w);
            for a in 0..6 {
                for bb in 0..6 {
                    ms[(a, bb)] += mat.density * n[a] * n[bb] * det * w;
                }
            }
        }
    }
    Ok((k, block_diag(&ms, 3)))
}
