//! Acceptance suite: one pass/fail line per criterion.

mod common;

use std::time::Instant;

use nalgebra::DMatrix;
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::{
    Config as PropConfig, RngAlgorithm, TestCaseError, TestRng, TestRunner,
};

use common::*;
use vemdyn::agglomerate::merge_groups;
use vemdyn::config::Config;
use vemdyn::dynamics::{
    assemble, beam_bcs, beam_global_frequency, history_difference, tapered_beam_experiment,
    BeamCase, StepBasis,
};
use vemdyn::eig::{critical_dt, element_system, jacobi_eigenvalues, Method};
use vemdyn::fem::{tet4_matrices, tri3_matrices};
use vemdyn::hni::{integrate_all, Polytope};
use vemdyn::mesh::{element_geometry, generate, BenchmarkId, Element, Mesh, Variant};
use vemdyn::vem::{element_matrices, Alpha0};
use vemdyn::MaterialParams;

type Outcome = Result<String, String>;

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        PropConfig::with_cases(cases),
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn bench_cfg() -> Config {
    Config {
        alpha0: Some(Alpha0::Unit),
        ..Config::default()
    }
}

fn gen(id: BenchmarkId, eps: Option<f64>, v: Variant) -> Mesh {
    generate(id, eps, v, &Config::default().beam)
        .expect("benchmark")
        .mesh
}

fn omega(id: BenchmarkId, eps: f64, method: Method) -> f64 {
    let v = match method {
        Method::Fem => Variant::Fem,
        Method::Vem => Variant::Vem,
    };
    critical_dt(&gen(id, Some(eps), v), method, &bench_cfg())
        .expect("timestep")
        .omega_star
}

fn within(x: f64, target: f64, rel: f64) -> bool {
    (x - target).abs() <= rel * target
}

fn verdict(fails: Vec<String>, ok: String) -> Outcome {
    if fails.is_empty() {
        Ok(ok)
    } else {
        Err(fails.join("; "))
    }
}

/// Every polytope used by the exactness check.
fn hni_domains() -> Vec<(String, Vec<[f64; 3]>, Vec<[usize; 3]>)> {
    let (tv, tf) = unit_tet();
    let mut out = vec![
        ("unit tet".to_string(), tv, tf),
        (
            "unit cube".to_string(),
            cube_vertices(),
            CUBE_FACES.to_vec(),
        ),
    ];
    let mut push = |name: &str, m: &Mesh| {
        for (e, el) in m.elements.iter().enumerate() {
            out.push((
                format!("{name} element {e}"),
                m.vertices.clone(),
                el.faces().unwrap().to_vec(),
            ));
        }
    };
    push("kite fem", &gen(BenchmarkId::Kite, Some(0.1), Variant::Fem));
    push("kite vem", &gen(BenchmarkId::Kite, Some(0.1), Variant::Vem));
    push(
        "spireC vem",
        &gen(BenchmarkId::SpireC, Some(0.1), Variant::Vem),
    );
    out
}

fn criterion1() -> Outcome {
    let mut fails = Vec::new();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (name, v, f) in hni_domains() {
        let t = integrate_all(
            &Polytope::Polyhedron {
                vertices: &v,
                faces: &f,
            },
            4,
        )
        .map_err(|e| e.to_string())?;
        let vol = oracle_polyhedron(&v, &f, [0, 0, 0]);
        let reach = v
            .iter()
            .map(|p| (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt())
            .fold(0.0, f64::max);
        for e in exponents(4, 3) {
            let exact = oracle_polyhedron(&v, &f, e);
            let got = t.get(e[0], e[1], e[2]);
            let q = (e[0] + e[1] + e[2]) as i32;
            let scale = exact.abs().max(vol.abs() * reach.powi(q));
            let err = (got - exact).abs() / scale;
            worst = worst.max(err);
            count += 1;
            if err > 1e-12 {
                fails.push(format!("{name} {e:?}: {got:e} vs {exact:e}"));
            }
        }
    }
    verdict(
        fails,
        format!("{count} moments, worst relative error {worst:.1e}"),
    )
}

fn permuted(a: &DMatrix<f64>, perm: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(perm[i], perm[j])])
}

fn rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm()
}

fn criterion2() -> Outcome {
    let mat = MaterialParams::steel();
    let mut worst: f64 = 0.0;
    let mut fails = Vec::new();
    let mut r = runner(100);
    for case in 0..100 {
        let t = well_shaped_tet()
            .new_tree(&mut r)
            .map_err(|e| e.to_string())?
            .current();
        let m = Mesh::new(3, t.to_vec(), vec![tet_element(&t, [0, 1, 2, 3])], mat)
            .map_err(|e| e.to_string())?;
        let g = element_geometry(&m, 0).map_err(|e| e.to_string())?;
        let em = element_matrices(&g, &mat, Alpha0::Unit).map_err(|e| e.to_string())?;
        let mut order: Vec<usize> = (0..4).collect();
        let mut c = [0, 1, 2, 3].map(|i| g.coords[i]);
        if signed_volume(&c) < 0.0 {
            order.swap(1, 2);
            c.swap(1, 2);
        }
        let (kf, mf) = tet4_matrices(&c, &mat).map_err(|e| e.to_string())?;
        let perm: Vec<usize> = (0..3)
            .flat_map(|d| order.iter().map(move |&i| 4 * d + i))
            .collect();
        let (ek, em_) = (
            rel(&permuted(&em.k, &perm), &kf),
            rel(&permuted(&em.m, &perm), &mf),
        );
        worst = worst.max(ek).max(em_);
        if ek > 1e-12 || em_ > 1e-12 {
            fails.push(format!("tet {case}: K {ek:.1e}, M {em_:.1e}"));
        }
    }
    let tri = [[0.1, -0.2], [1.3, 0.1], [0.2, 0.9]];
    let m2 = Mesh::new(
        2,
        tri.iter().map(|p| [p[0], p[1], 0.0]).collect(),
        vec![Element::Polygon(vec![0, 1, 2])],
        mat,
    )
    .map_err(|e| e.to_string())?;
    let g = element_geometry(&m2, 0).map_err(|e| e.to_string())?;
    let em = element_matrices(&g, &mat, Alpha0::Unit).map_err(|e| e.to_string())?;
    let (kf, mf) = tri3_matrices(&tri, &mat).map_err(|e| e.to_string())?;
    let (ek, em_) = (rel(&em.k, &kf), rel(&em.m, &mf));
    worst = worst.max(ek).max(em_);
    if ek > 1e-12 || em_ > 1e-12 {
        fails.push(format!("triangle: K {ek:.1e}, M {em_:.1e}"));
    }
    verdict(
        fails,
        format!("100 tets + 1 triangle, worst relative difference {worst:.1e}"),
    )
}

/// Benchmarks with the ε values of their tables.
fn benchmark_cases() -> Vec<(BenchmarkId, Option<f64>)> {
    let mut out = Vec::new();
    let list: [(BenchmarkId, &[f64]); 7] = [
        (BenchmarkId::Tri2d, &[1e-1, 1e-2, 1e-5, 1e-8]),
        (BenchmarkId::Prism3d, &[1e-1, 1e-5]),
        (BenchmarkId::Wedge, &[1e-1, 1e-3, 1e-5]),
        (BenchmarkId::Kite, &[1e-1, 1e-5]),
        (BenchmarkId::SpireA, &[1e-1, 1e-5, 1e-8]),
        (BenchmarkId::SpireB, &[1e-1, 1e-5, 1e-8]),
        (BenchmarkId::SpireC, &[1e-1, 1e-5, 1e-8]),
    ];
    for (id, eps) in list {
        out.extend(eps.iter().map(|&e| (id, Some(e))));
    }
    out.push((BenchmarkId::BeamA, None));
    out.push((BenchmarkId::BeamB, None));
    out
}

fn criterion3() -> Outcome {
    let mut fails = Vec::new();
    let mut checked = 0;
    for (id, eps) in benchmark_cases() {
        let cfg = if id.is_beam() {
            Config::default()
        } else {
            bench_cfg()
        };
        for (variant, method) in [(Variant::Fem, Method::Fem), (Variant::Vem, Method::Vem)] {
            let m = gen(id, eps, variant);
            let d = m.dimension;
            let rigid = d * (d + 1) / 2;
            let rho = m.material.density;
            let mut bad_kernel = 0;
            let mut bad_mass = Vec::new();
            for e in 0..m.elements.len() {
                checked += 1;
                let s = element_system(&m, e, method, &cfg).map_err(|x| x.to_string())?;
                let eig = jacobi_eigenvalues(&s.k);
                let top = eig.last().copied().unwrap();
                let zeros = eig.iter().filter(|&&l| l < 1e-8 * top).count();
                let negative = eig.iter().any(|&l| l < -1e-10 * top);
                if zeros != rigid || negative {
                    bad_kernel += 1;
                }
                let vol = element_geometry(&m, e).map_err(|x| x.to_string())?.volume;
                let total: f64 = s.lumped.iter().sum();
                let target = d as f64 * rho * vol;
                if s.lumped.iter().any(|&x| !(x > 0.0)) || (total - target).abs() > 1e-12 * target {
                    bad_mass.push(e);
                }
            }
            let tag = format!(
                "{id} {} {method}",
                eps.map(|x| format!("{x:e}")).unwrap_or_default()
            );
            if bad_kernel > 0 {
                fails.push(format!("{tag}: {bad_kernel} element(s) with wrong kernel"));
            }
            if !bad_mass.is_empty() {
                fails.push(format!("{tag}: lumped mass fails on {bad_mass:?}"));
            }
        }
    }
    verdict(fails, format!("{checked} element systems"))
}

fn criterion4() -> Outcome {
    let want = [(1e-1, 6.0e4, 3.1e4), (1e-5, 6.0e8, 5.2e4)];
    let mut fails = Vec::new();
    let mut seen = Vec::new();
    for (eps, wf, wv) in want {
        let (f, v) = (
            omega(BenchmarkId::Kite, eps, Method::Fem),
            omega(BenchmarkId::Kite, eps, Method::Vem),
        );
        seen.push(format!("ε={eps:e}: FEM {f:.3e} VEM {v:.3e}"));
        if !within(f, wf, 0.15) {
            fails.push(format!("ε={eps:e} FEM {f:.3e} vs {wf:e}"));
        }
        if !within(v, wv, 0.15) {
            fails.push(format!("ε={eps:e} VEM {v:.3e} vs {wv:e}"));
        }
    }
    verdict(fails, seen.join(", "))
}

fn criterion5() -> Outcome {
    let id = BenchmarkId::SpireC;
    let v5 = omega(id, 1e-5, Method::Vem);
    let v8 = omega(id, 1e-8, Method::Vem);
    let f5 = omega(id, 1e-5, Method::Fem);
    let ratio = f5 / v5;
    let mut fails = Vec::new();
    if !within(v5, 5.9e4, 0.15) {
        fails.push(format!("ω_VEM(1e-5) {v5:.3e} vs 5.9e4"));
    }
    if !within(v8, 5.9e5, 0.15) {
        fails.push(format!("ω_VEM(1e-8) {v8:.3e} vs 5.9e5"));
    }
    if !within(f5, 2.2e9, 0.15) {
        fails.push(format!("ω_FEM(1e-5) {f5:.3e} vs 2.2e9"));
    }
    if ratio < 1e4 {
        fails.push(format!("Δt ratio {ratio:.3e} < 1e4"));
    }
    verdict(
        fails,
        format!(
            "ω_VEM(1e-5) {v5:.3e}, ω_VEM(1e-8) {v8:.3e}, ω_FEM(1e-5) {f5:.3e}, ratio {ratio:.2e}"
        ),
    )
}

/// Least-squares slope of log ω against log ε.
fn fitted_exponent(eps: &[f64], w: &[f64]) -> f64 {
    let x: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let y: Vec<f64> = w.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    -sxy / sxx
}

fn criterion6() -> Outcome {
    let table: [(BenchmarkId, &[(f64, f64, f64)]); 3] = [
        (
            BenchmarkId::Tri2d,
            &[
                (1e-1, 1.5e5, 3.6e4),
                (1e-2, 1.5e6, 4.9e4),
                (1e-5, 1.5e9, 5.1e4),
                (1e-8, 1.5e12, 5.1e4),
            ],
        ),
        (
            BenchmarkId::Prism3d,
            &[(1e-1, 1.7e5, 4.9e4), (1e-5, 1.7e9, 1.0e5)],
        ),
        (
            BenchmarkId::Wedge,
            &[
                (1e-1, 1.7e5, 4.3e4),
                (1e-3, 1.7e7, 4.6e4),
                (1e-5, 1.7e9, 4.6e4),
            ],
        ),
    ];
    let sweep = [1e-1, 1e-3, 1e-5];
    let mut fails = Vec::new();
    let mut notes = Vec::new();
    for (id, rows) in table {
        let wf: Vec<f64> = sweep.iter().map(|&e| omega(id, e, Method::Fem)).collect();
        let p = fitted_exponent(&sweep, &wf);
        let growth = omega(id, 1e-5, Method::Vem) / omega(id, 1e-1, Method::Vem);
        notes.push(format!("{id}: exponent {p:.4}, VEM growth {growth:.2}"));
        if !(0.95..=1.05).contains(&p) {
            fails.push(format!("{id}: FEM exponent {p:.4}"));
        }
        if growth > 2.0 {
            fails.push(format!("{id}: VEM growth {growth:.2}"));
        }
        for &(eps, tf, tv) in rows {
            for (method, target) in [(Method::Fem, tf), (Method::Vem, tv)] {
                let w = omega(id, eps, method);
                if !(w <= 3.0 * target && w >= target / 3.0) {
                    fails.push(format!(
                        "{id} ε={eps:e} {method}: {w:.3e} vs table {target:.1e}"
                    ));
                }
            }
        }
    }
    verdict(fails, notes.join(", "))
}

fn criterion7() -> Outcome {
    let cfg = Config::default();
    let mut fails = Vec::new();
    let mut notes = Vec::new();
    let mut star = Vec::new();
    for id in [BenchmarkId::BeamA, BenchmarkId::BeamB] {
        for (variant, method) in [(Variant::Fem, Method::Fem), (Variant::Vem, Method::Vem)] {
            let m = gen(id, None, variant);
            let bound = critical_dt(&m, method, &cfg)
                .map_err(|e| e.to_string())?
                .omega_star;
            let sys = assemble(&m, method, &cfg).map_err(|e| e.to_string())?;
            let bcs = beam_bcs(&m, cfg.beam.length, 1.0, 1.0);
            let g = beam_global_frequency(&sys, &bcs, &cfg).map_err(|e| e.to_string())?;
            notes.push(format!(
                "{id} {method}: ω_global {:.3e} ≤ ω* {bound:.3e}",
                g.omega
            ));
            if g.omega > bound * (1.0 + 1e-6) {
                fails.push(format!(
                    "{id} {method}: ω_global {:.3e} > ω* {bound:.3e}",
                    g.omega
                ));
            }
            if id == BenchmarkId::BeamA {
                star.push(bound);
            }
        }
    }
    let ratio = star[0] / star[1];
    notes.push(format!("case A Δt ratio {ratio:.1}"));
    if !(100.0..=1000.0).contains(&ratio) {
        fails.push(format!("case A Δt ratio {ratio:.1} outside [100, 1000]"));
    }
    verdict(fails, notes.join(", "))
}

fn criterion8() -> Outcome {
    let cfg = Config::default();
    let run = |method, factor, basis| {
        tapered_beam_experiment(BeamCase::A, method, factor, basis, &cfg).map_err(|e| e.to_string())
    };
    let vem = run(Method::Vem, 0.9, StepBasis::Element)?;
    let fem = run(Method::Fem, 0.9, StepBasis::Global)?;
    let unstable = run(Method::Fem, 1.000001, StepBasis::Global)?;
    let diff = history_difference(&fem.history, &vem.history);
    let mut fails = Vec::new();
    if diff > 0.1 {
        fails.push(format!("history difference {diff:.4}"));
    }
    if vem.summary.diverged_at.is_some() || fem.summary.diverged_at.is_some() {
        fails.push("0.9× run diverged".into());
    }
    if unstable.summary.diverged_at.is_none() {
        fails.push("1.000001× FEM run stayed bounded".into());
    }
    let end = vem.history.last().map(|h| h.0).unwrap_or(0.0);
    if end < 3.0 - 1e-9 {
        fails.push(format!("history ends at t/T = {end:.3}"));
    }
    if vem.summary.wall_seconds > 10.0 {
        fails.push(format!("VEM run took {:.1} s", vem.summary.wall_seconds));
    }
    if fem.summary.wall_seconds > 600.0 {
        fails.push(format!("FEM run took {:.1} s", fem.summary.wall_seconds));
    }
    verdict(
        fails,
        format!(
            "L∞ difference {diff:.4}; FEM 1.000001× diverged at step {:?}; VEM {:.1} s, FEM {:.1} s",
            unstable.summary.diverged_at, vem.summary.wall_seconds, fem.summary.wall_seconds
        ),
    )
}

fn criterion9() -> Outcome {
    let cfg = Config::default();
    let mut fails = Vec::new();
    let mut prop = |name: &str, r: Result<(), String>| {
        if let Err(e) = r {
            fails.push(format!("{name}: {e}"));
        }
    };
    let run = |f: &dyn Fn(&mut TestRunner) -> Result<(), String>| f(&mut runner(100));
    prop(
        "projectors (hexahedra)",
        run(&|r| {
            r.run(&perturbed_hex(), |v| {
                let m = single_element_mesh(v, CUBE_FACES.to_vec());
                check_projectors(&m, 0, &cfg).map_err(TestCaseError::fail)
            })
            .map_err(|e| e.to_string())
        }),
    );
    prop(
        "projectors (merged tet pairs)",
        run(&|r| {
            r.run(&tet_pair(), |m| {
                let (mm, _) = merge_groups(&m, &[vec![0, 1]])
                    .map_err(|e| TestCaseError::fail(e.to_string()))?;
                check_projectors(&mm, 0, &cfg).map_err(TestCaseError::fail)
            })
            .map_err(|e| e.to_string())
        }),
    );
    prop(
        "rotation objectivity",
        run(&|r| {
            r.run(&(perturbed_hex(), rotation()), |(v, rot)| {
                let m = single_element_mesh(v, CUBE_FACES.to_vec());
                check_rotation(&m, &rot, Method::Vem, &cfg).map_err(TestCaseError::fail)
            })
            .map_err(|e| e.to_string())
        }),
    );
    prop(
        "agglomeration watertightness and volume",
        run(&|r| {
            r.run(&tet_pair(), |m| {
                let (mm, map) = merge_groups(&m, &[vec![0, 1]])
                    .map_err(|e| TestCaseError::fail(e.to_string()))?;
                check_watertight(&mm)
                    .and_then(|_| check_volume_additivity(&m, &mm, &map))
                    .map_err(TestCaseError::fail)
            })
            .map_err(|e| e.to_string())
        }),
    );
    verdict(fails, "4 randomized properties × 100 cases".into())
}

fn main() {
    let criteria: [(&str, f64, fn() -> Outcome); 9] = [
        ("HNI exactness", 1.0, criterion1),
        ("simplex equivalence", 1.0, criterion2),
        ("kernel and PSD", 5.0, criterion3),
        ("kite table", 5.0, criterion4),
        ("spire case C", 5.0, criterion5),
        ("scaling laws", 10.0, criterion6),
        ("element-eigenvalue inequality", 60.0, criterion7),
        ("beam dynamics", 600.0, criterion8),
        ("property suite", 60.0, criterion9),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (i, (name, budget, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !filter.is_empty() && !filter.iter().any(|a| a == &n.to_string()) {
            continue;
        }
        let t0 = Instant::now();
        let r = f();
        let secs = t0.elapsed().as_secs_f64();
        let (ok, detail) = match r {
            Ok(d) if secs <= *budget => (true, d),
            Ok(d) => (false, format!("{d}; took {secs:.2} s, budget {budget} s")),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {n} ({name}): {} [{secs:.2} s] {detail}",
            if ok { "PASS" } else { "FAIL" }
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
