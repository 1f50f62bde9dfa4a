//! Element and global maximum frequencies and critical time steps.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::fem::{prism6_matrices, tet4_matrices, tri3_matrices};
use crate::mesh::{element_geometry, is_convex, Element, Mesh};
use crate::sparse::CsrMatrix;
use crate::vem::{element_matrices, lump, Lumping};

/// Relative threshold below which an eigenvalue counts as a rigid mode.
pub const ZERO_MODE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Fem,
    Vem,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Fem => "fem",
            Method::Vem => "vem",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fem" => Ok(Method::Fem),
            "vem" => Ok(Method::Vem),
            _ => Err(Error::Invalid(format!("unknown method '{s}' (fem|vem)"))),
        }
    }
}

/// Element stiffness and lumped mass in the dof order
/// [x of nodes | y of nodes | z of nodes].
#[derive(Debug, Clone)]
pub struct ElementSystem {
    pub nodes: Vec<usize>,
    pub k: DMatrix<f64>,
    pub lumped: DVector<f64>,
    pub lumping: Lumping,
}

fn lumping_for(mesh: &Mesh, e: usize, mode: Lumping) -> Result<Lumping> {
    Ok(match mode {
        Lumping::Auto if is_convex(mesh, e)? => Lumping::RowSum,
        Lumping::Auto => Lumping::DiagScale,
        m => m,
    })
}

fn with_element<T>(e: usize, r: Result<T>) -> Result<T> {
    r.map_err(|err| match err {
        Error::Numerical(m) => Error::Numerical(format!("element {e}: {m}")),
        Error::Invalid(m) => Error::Invalid(format!("element {e}: {m}")),
        other => other,
    })
}

/// Builds the stiffness and lumped mass of element `e` with `method`.
pub fn element_system(
    mesh: &Mesh,
    e: usize,
    method: Method,
    cfg: &Config,
) -> Result<ElementSystem> {
    with_element(e, build_element(mesh, e, method, cfg))
}

fn build_element(mesh: &Mesh, e: usize, method: Method, cfg: &Config) -> Result<ElementSystem> {
    let mat = cfg.material(&mesh.material)?;
    let dim = mesh.dimension;
    let mode = lumping_for(mesh, e, cfg.lumping)?;
    let el = &mesh.elements[e];
    match method {
        Method::Vem => {
            let g = element_geometry(mesh, e)?;
            let em = element_matrices(&g, &mat, cfg.alpha0_for(dim))?;
            let lumped = lump(&em.m, mode, mat.density, g.volume, dim)?;
            Ok(ElementSystem {
                nodes: g.nodes,
                k: em.k,
                lumped,
                lumping: mode,
            })
        }
        Method::Fem => {
            let (nodes, k, m, volume) = if let Some(p) = el.prism() {
                let v = p.map(|i| mesh.vertices[i]);
                let (k, m) = prism6_matrices(&v, &mat)?;
                let vol = m.sum() / (3.0 * mat.density);
                (p.to_vec(), k, m, vol)
            } else if el.is_tet() {
                let mut n = el.nodes();
                let mut v = [0usize; 4].map(|_| [0.0; 3]);
                for (i, &id) in n.iter().enumerate() {
                    v[i] = mesh.vertices[id];
                }
                if orient3(&v) < 0.0 {
                    n.swap(1, 2);
                    v.swap(1, 2);
                }
                let (k, m) = tet4_matrices(&v, &mat)?;
                let vol = m.sum() / (3.0 * mat.density);
                (n, k, m, vol)
            } else if let (true, Element::Polygon(l)) = (el.is_triangle(), el) {
                let v = [0, 1, 2].map(|i| {
                    let p = mesh.vertices[l[i]];
                    [p[0], p[1]]
                });
                let (k, m) = tri3_matrices(&v, &mat)?;
                let vol = m.sum() / (2.0 * mat.density);
                (l.clone(), k, m, vol)
            } else {
                return Err(Error::Invalid(
                    "linear FEM supports triangles, tetrahedra and tagged prisms only".into(),
                ));
            };
            let lumped = lump(&m, mode, mat.density, volume, dim)?;
            Ok(ElementSystem {
                nodes,
                k,
                lumped,
                lumping: mode,
            })
        }
    }
}

fn orient3(v: &[[f64; 3]; 4]) -> f64 {
    let d = |i: usize, k: usize| v[i][k] - v[0][k];
    d(1, 0) * (d(2, 1) * d(3, 2) - d(2, 2) * d(3, 1))
        - d(1, 1) * (d(2, 0) * d(3, 2) - d(2, 2) * d(3, 0))
        + d(1, 2) * (d(2, 0) * d(3, 1) - d(2, 1) * d(3, 0))
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut a = a.clone();
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let g = 100.0 * apq.abs();
                if apq == 0.0
                    || (a[(p, p)].abs() + g == a[(p, p)].abs()
                        && a[(q, q)].abs() + g == a[(q, q)].abs())
                {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                rotated = true;
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut e: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    e.sort_by(f64::total_cmp);
    e
}

/// L⁻¹ K L⁻¹ with L = sqrt(diag(m)).
pub fn mass_normalized(k: &DMatrix<f64>, m: &DVector<f64>) -> Result<DMatrix<f64>> {
    if let Some(i) = m.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::Numerical(format!(
            "non-positive lumped mass at local dof {i}"
        )));
    }
    let li: Vec<f64> = m.iter().map(|v| 1.0 / v.sqrt()).collect();
    let a = DMatrix::from_fn(k.nrows(), k.ncols(), |i, j| k[(i, j)] * li[i] * li[j]);
    Ok((&a + a.transpose()) * 0.5)
}

/// ω = sqrt(λ_max) of K x = λ M x for diagonal positive M.
pub fn element_max_frequency(k: &DMatrix<f64>, m: &DVector<f64>) -> Result<f64> {
    let a = mass_normalized(k, m)?;
    let lam = jacobi_eigenvalues(&a).last().copied().unwrap_or(0.0);
    Ok(lam.max(0.0).sqrt())
}

/// Number of eigenvalues below ZERO_MODE_TOL·λ_max.
pub fn count_zero_modes(eigs: &[f64]) -> usize {
    let lmax = eigs.iter().fold(0.0f64, |m, v| m.max(*v));
    eigs.iter().filter(|&&v| v < ZERO_MODE_TOL * lmax).count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeStepReport {
    pub method: Method,
    pub lumping: Lumping,
    /// Per-element maximum frequency (rad/s).
    pub omega: Vec<f64>,
    pub omega_star: f64,
    pub dt_crit: f64,
    pub argmax: usize,
}

impl TimeStepReport {
    /// CSV with header element_id,omega_max,dt_element followed by the
    /// summary line omega_star,dt_crit,argmax_element.
    pub fn csv(&self) -> String {
        let mut s = String::from("element_id,omega_max,dt_element\n");
        for (e, w) in self.omega.iter().enumerate() {
            let dt = if *w > 0.0 { 2.0 / w } else { f64::INFINITY };
            let _ = writeln!(s, "{e},{w:.16e},{dt:.16e}");
        }
        let _ = writeln!(s, "omega_star,dt_crit,argmax_element");
        let _ = writeln!(
            s,
            "{:.16e},{:.16e},{}",
            self.omega_star, self.dt_crit, self.argmax
        );
        s
    }
}

/// Element-by-element bound Δt_crit = 2/ω*, ω* = max_E ω_max^E.
pub fn critical_dt(mesh: &Mesh, method: Method, cfg: &Config) -> Result<TimeStepReport> {
    let omega: Vec<f64> = (0..mesh.elements.len())
        .into_par_iter()
        .map(|e| {
            let s = element_system(mesh, e, method, cfg)?;
            with_element(e, element_max_frequency(&s.k, &s.lumped))
        })
        .collect::<Result<_>>()?;
    let (argmax, omega_star) = omega.iter().copied().enumerate().fold(
        (0, 0.0f64),
        |(ai, am), (i, w)| if w > am { (i, w) } else { (ai, am) },
    );
    if !(omega_star > 0.0) {
        return Err(Error::Numerical("maximum frequency is zero".into()));
    }
    Ok(TimeStepReport {
        method,
        lumping: cfg.lumping,
        omega,
        omega_star,
        dt_crit: 2.0 / omega_star,
        argmax,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalEig {
    pub omega: f64,
    pub lambda: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(x: &mut [f64]) -> f64 {
    let n = dot(x, x).sqrt();
    x.iter_mut().for_each(|v| *v /= n);
    n
}

/// Largest eigenvalue of K x = λ M x on the free dofs by shifted power
/// iteration on L⁻¹KL⁻¹. The Rayleigh quotient never exceeds λ_max, so the
/// returned ω is a lower bound of the true maximum frequency.
pub fn global_max_frequency(
    k: &CsrMatrix,
    m: &[f64],
    free: &[bool],
    tol: f64,
    max_iter: usize,
) -> Result<GlobalEig> {
    let kf = k.principal_submatrix(free);
    let mf: Vec<f64> = m
        .iter()
        .zip(free)
        .filter(|(_, &f)| f)
        .map(|(v, _)| *v)
        .collect();
    if let Some(i) = mf.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::Numerical(format!(
            "non-positive lumped mass at free dof {i}"
        )));
    }
    let n = mf.len();
    if n == 0 {
        return Err(Error::Invalid("no free degrees of freedom".into()));
    }
    let li: Vec<f64> = mf.iter().map(|v| 1.0 / v.sqrt()).collect();
    let apply = |x: &[f64], tmp: &mut [f64], y: &mut [f64]| {
        for i in 0..n {
            tmp[i] = x[i] * li[i];
        }
        kf.mul_vec(tmp, y);
        for i in 0..n {
            y[i] *= li[i];
        }
    };
    let mut x: Vec<f64> = (0..n)
        .map(|i| {
            let h = (i as u64)
                .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                .rotate_left(17);
            0.5 + (h >> 11) as f64 / (1u64 << 53) as f64
        })
        .collect();
    normalize(&mut x);
    let mut y = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let mut rq = 0.0;
    let mut best = 0.0f64;
    let mut streak = 0;
    for it in 1..=max_iter {
        apply(&x, &mut tmp, &mut y);
        let new_rq = dot(&x, &y);
        best = best.max(new_rq);
        let res: f64 = x
            .iter()
            .zip(&y)
            .map(|(xi, yi)| (yi - new_rq * xi).powi(2))
            .sum::<f64>()
            .sqrt();
        let change = (new_rq - rq).abs();
        rq = new_rq;
        if change <= 1e-3 * tol * rq.abs() || res <= tol * rq.abs() {
            streak += 1;
        } else {
            streak = 0;
        }
        if streak >= 3 && it > 10 {
            let lambda = best.max(0.0);
            return Ok(GlobalEig {
                omega: lambda.sqrt(),
                lambda,
                iterations: it,
                converged: true,
            });
        }
        let sigma = 0.4 * rq.max(0.0);
        for i in 0..n {
            y[i] -= sigma * x[i];
        }
        if normalize(&mut y) == 0.0 {
            return Ok(GlobalEig {
                omega: 0.0,
                lambda: 0.0,
                iterations: it,
                converged: true,
            });
        }
        std::mem::swap(&mut x, &mut y);
    }
    log::warn!("power iteration hit the cap of {max_iter} iterations");
    let lambda = best.max(0.0);
    Ok(GlobalEig {
        omega: lambda.sqrt(),
        lambda,
        iterations: max_iter,
        converged: false,
    })
}
