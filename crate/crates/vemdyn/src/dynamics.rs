//! Assembly, explicit central-difference integration and the tapered-beam driver.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::eig::{critical_dt, element_system, global_max_frequency, GlobalEig, Method};
use crate::error::{Error, Result};
use crate::mesh::{generate, BenchmarkId, Mesh, Variant};
use crate::sparse::CsrMatrix;

/// Reference displacement u₀: the peak of s²(1-s)² for unit amplitude.
pub const U0: f64 = 1.0 / 16.0;

/// Assembled stiffness and lumped mass; global dof = component·N + node.
#[derive(Debug, Clone)]
pub struct System {
    pub dim: usize,
    pub num_nodes: usize,
    pub k: CsrMatrix,
    pub m: Vec<f64>,
}

impl System {
    pub fn num_dofs(&self) -> usize {
        self.m.len()
    }
}

/// Scatter-adds every element of `mesh` built with `method`.
pub fn assemble(mesh: &Mesh, method: Method, cfg: &Config) -> Result<System> {
    let dim = mesh.dimension;
    let n = mesh.num_nodes();
    let systems: Vec<_> = (0..mesh.elements.len())
        .into_par_iter()
        .map(|e| element_system(mesh, e, method, cfg))
        .collect::<Result<_>>()?;
    let mut m = vec![0.0; dim * n];
    let mut trip = Vec::with_capacity(systems.iter().map(|s| s.k.len()).sum());
    for s in &systems {
        let ne = s.nodes.len();
        let g = |i: usize| (i / ne) * n + s.nodes[i % ne];
        for i in 0..dim * ne {
            m[g(i)] += s.lumped[i];
            for j in 0..dim * ne {
                let v = s.k[(i, j)];
                if v != 0.0 {
                    trip.push((g(i), g(j), v));
                }
            }
        }
    }
    if let Some(i) = m.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::Numerical(format!(
            "assembled lumped mass is not positive at dof {i} (node {} unused?)",
            i % n
        )));
    }
    Ok(System {
        dim,
        num_nodes: n,
        k: CsrMatrix::from_triplets(dim * n, dim * n, &trip),
        m,
    })
}

/// Homogeneous fixed dofs plus dofs driven by amplitude·s²(1-s)², s = t/τ, for t < τ.
#[derive(Debug, Clone, PartialEq)]
pub struct BcSchedule {
    pub fixed: Vec<usize>,
    pub driven: Vec<usize>,
    pub amplitude: f64,
    pub tau: f64,
}

impl BcSchedule {
    pub fn ramp(&self, t: f64) -> f64 {
        if t < self.tau && t >= 0.0 {
            let s = t / self.tau;
            self.amplitude * s * s * (1.0 - s) * (1.0 - s)
        } else {
            0.0
        }
    }

    fn apply(&self, u: &mut [f64], t: f64) {
        for &d in &self.fixed {
            u[d] = 0.0;
        }
        let r = self.ramp(t);
        for &d in &self.driven {
            u[d] = r;
        }
    }

    pub fn free_mask(&self, ndof: usize) -> Vec<bool> {
        let mut free = vec![true; ndof];
        for &d in self.fixed.iter().chain(&self.driven) {
            free[d] = false;
        }
        free
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub a: Vec<f64>,
    pub t: f64,
    pub step: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct History {
    pub times: Vec<f64>,
    /// values[k][p] = u at probe dof p after step k (k = 0 is the initial state).
    pub values: Vec<Vec<f64>>,
    pub steps: usize,
    /// Step at which ‖u‖∞ exceeded the divergence limit or became non-finite.
    pub diverged_at: Option<usize>,
    pub final_state: SimState,
}

fn accel(sys: &System, u: &[f64], ku: &mut [f64], a: &mut [f64]) {
    sys.k.mul_vec(u, ku);
    for i in 0..a.len() {
        a[i] = -ku[i] / sys.m[i];
    }
}

/// Half-step central difference from rest. Stops early once
/// ‖u‖∞ > `limit` or any entry is non-finite.
pub fn central_difference_run(
    sys: &System,
    bcs: &BcSchedule,
    dt: f64,
    t_max: f64,
    probes: &[usize],
    limit: f64,
) -> Result<History> {
    if !(dt > 0.0 && dt.is_finite()) || !(t_max >= 0.0) {
        return Err(Error::Invalid(format!(
            "invalid time step {dt} or end time {t_max}"
        )));
    }
    let n = sys.num_dofs();
    let steps = (t_max / dt).ceil() as usize;
    let mut st = SimState {
        u: vec![0.0; n],
        v: vec![0.0; n],
        a: vec![0.0; n],
        t: 0.0,
        step: 0,
    };
    let mut ku = vec![0.0; n];
    bcs.apply(&mut st.u, 0.0);
    accel(sys, &st.u, &mut ku, &mut st.a);
    let mut times = Vec::with_capacity(steps + 1);
    let mut values = Vec::with_capacity(steps + 1);
    times.push(0.0);
    values.push(probes.iter().map(|&p| st.u[p]).collect());
    let mut diverged_at = None;
    for k in 1..=steps {
        let t = k as f64 * dt;
        for i in 0..n {
            st.v[i] += 0.5 * dt * st.a[i];
            st.u[i] += dt * st.v[i];
        }
        bcs.apply(&mut st.u, t);
        accel(sys, &st.u, &mut ku, &mut st.a);
        for i in 0..n {
            st.v[i] += 0.5 * dt * st.a[i];
        }
        st.t = t;
        st.step = k;
        times.push(t);
        values.push(probes.iter().map(|&p| st.u[p]).collect());
        let big = st.u.iter().any(|x| !x.is_finite() || x.abs() > limit);
        if big {
            diverged_at = Some(k);
            break;
        }
    }
    Ok(History {
        steps: st.step,
        times,
        values,
        diverged_at,
        final_state: st,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BeamCase {
    A,
    B,
}

impl BeamCase {
    pub fn id(&self) -> BenchmarkId {
        match self {
            BeamCase::A => BenchmarkId::BeamA,
            BeamCase::B => BenchmarkId::BeamB,
        }
    }
}

impl std::str::FromStr for BeamCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A" | "BEAMA" => Ok(BeamCase::A),
            "B" | "BEAMB" => Ok(BeamCase::B),
            _ => Err(Error::Invalid(format!("unknown beam case '{s}' (A|B)"))),
        }
    }
}

/// Which bound the step factor multiplies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepBasis {
    /// 2/ω* from the element-by-element bound.
    Element,
    /// 2/ω from the assembled eigenproblem.
    Global,
}

impl std::str::FromStr for StepBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "element" => Ok(StepBasis::Element),
            "global" => Ok(StepBasis::Global),
            _ => Err(Error::Invalid(format!(
                "unknown step basis '{s}' (element|global)"
            ))),
        }
    }
}

/// Boundary conditions of the beam: x = 0 clamped; at x = L the axial
/// displacement follows the ramp and the transverse ones are held at zero.
pub fn beam_bcs(mesh: &Mesh, length: f64, amplitude: f64, tau: f64) -> BcSchedule {
    let n = mesh.num_nodes();
    let tol = 1e-9 * length;
    let mut fixed = Vec::new();
    let mut driven = Vec::new();
    for (i, p) in mesh.vertices.iter().enumerate() {
        if p[0].abs() <= tol {
            fixed.extend((0..mesh.dimension).map(|c| c * n + i));
        } else if (p[0] - length).abs() <= tol {
            driven.push(i);
            fixed.extend((1..mesh.dimension).map(|c| c * n + i));
        }
    }
    BcSchedule {
        fixed,
        driven,
        amplitude,
        tau,
    }
}

/// Node at `target`, or the nearest node with a warning.
pub fn probe_node(mesh: &Mesh, target: [f64; 3]) -> usize {
    let d2 = |p: &[f64; 3]| (0..3).map(|k| (p[k] - target[k]).powi(2)).sum::<f64>();
    let (best, dist2) = mesh
        .vertices
        .iter()
        .enumerate()
        .map(|(i, p)| (i, d2(p)))
        .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    if dist2 > 1e-18 {
        log::warn!(
            "no node at {target:?}; using nearest node {best} at distance {:e}",
            dist2.sqrt()
        );
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub case: BeamCase,
    pub method: Method,
    pub step_basis: StepBasis,
    pub factor: f64,
    pub steps: usize,
    pub dt: f64,
    pub omega_star: f64,
    pub omega_global: Option<f64>,
    pub dt_crit_vem: f64,
    pub tau: f64,
    pub transit_time: f64,
    pub probe_node: usize,
    pub diverged_at: Option<usize>,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct BeamRun {
    pub summary: RunSummary,
    /// (t/T, u_x/u₀) at the probe.
    pub history: Vec<(f64, f64)>,
}

impl BeamRun {
    /// CSV with header t_norm,u_x_norm.
    pub fn history_csv(&self) -> String {
        let mut s = String::from("t_norm,u_x_norm\n");
        for (t, u) in &self.history {
            let _ = writeln!(s, "{t:.16e},{u:.16e}");
        }
        s
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary).expect("summary serializes")
    }
}

/// Global maximum frequency of an assembled beam with its constraints removed.
pub fn beam_global_frequency(sys: &System, bcs: &BcSchedule, cfg: &Config) -> Result<GlobalEig> {
    let free = bcs.free_mask(sys.num_dofs());
    let g = global_max_frequency(&sys.k, &sys.m, &free, cfg.power_tol, cfg.power_max_iter)?;
    if !g.converged {
        log::warn!(
            "global eigenvalue not converged; using best estimate {:e}",
            g.omega
        );
    }
    Ok(g)
}

/// Runs the tapered-beam problem with Δt = factor·Δt_crit(method, basis).
/// The ramp duration τ is always tau_steps·Δt_crit of the vem variant.
pub fn tapered_beam_experiment(
    case: BeamCase,
    method: Method,
    factor: f64,
    basis: StepBasis,
    cfg: &Config,
) -> Result<BeamRun> {
    if !(factor > 0.0) {
        return Err(Error::Invalid(format!(
            "step factor must be positive, got {factor}"
        )));
    }
    let start = Instant::now();
    let vem = generate(case.id(), None, Variant::Vem, &cfg.beam)?;
    let dt_vem = critical_dt(&vem.mesh, Method::Vem, cfg)?.dt_crit;
    let mesh = match method {
        Method::Vem => vem.mesh,
        Method::Fem => generate(case.id(), None, Variant::Fem, &cfg.beam)?.mesh,
    };
    let mat = cfg.material(&mesh.material)?;
    let length = cfg.beam.length;
    let transit = length / mat.bar_wave_speed();
    let tau = cfg.tau_steps * dt_vem;
    let bcs = beam_bcs(&mesh, length, 1.0, tau);
    let sys = assemble(&mesh, method, cfg)?;
    let omega_star = critical_dt(&mesh, method, cfg)?.omega_star;
    let (omega_global, dt_crit) = match basis {
        StepBasis::Element => (None, 2.0 / omega_star),
        StepBasis::Global => {
            let g = beam_global_frequency(&sys, &bcs, cfg)?;
            (Some(g.omega), 2.0 / g.omega)
        }
    };
    let dt = factor * dt_crit;
    let probe = probe_node(&mesh, [length / 2.0, cfg.beam.height / 2.0, 0.0]);
    let hist = central_difference_run(
        &sys,
        &bcs,
        dt,
        cfg.t_max_transits * transit,
        &[probe],
        1e3 * U0,
    )?;
    let history = hist
        .times
        .iter()
        .zip(&hist.values)
        .map(|(t, v)| (t / transit, v[0] / U0))
        .collect();
    Ok(BeamRun {
        summary: RunSummary {
            case,
            method,
            step_basis: basis,
            factor,
            steps: hist.steps,
            dt,
            omega_star,
            omega_global,
            dt_crit_vem: dt_vem,
            tau,
            transit_time: transit,
            probe_node: probe,
            diverged_at: hist.diverged_at,
            wall_seconds: start.elapsed().as_secs_f64(),
        },
        history,
    })
}

/// max |a(t) - b(t)| / max |b| with a linearly interpolated onto b's times.
pub fn history_difference(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let interp = |t: f64| -> Option<f64> {
        let k = a.partition_point(|p| p.0 < t);
        if k == 0 {
            return a.first().filter(|p| p.0 == t).map(|p| p.1);
        }
        if k == a.len() {
            return None;
        }
        let (t0, u0) = a[k - 1];
        let (t1, u1) = a[k];
        Some(u0 + (u1 - u0) * (t - t0) / (t1 - t0))
    };
    let scale = b.iter().fold(0.0f64, |m, p| m.max(p.1.abs()));
    let diff = b
        .iter()
        .filter_map(|&(t, u)| interp(t).map(|v| (v - u).abs()))
        .fold(0.0f64, f64::max);
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}
