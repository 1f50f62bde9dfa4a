//! Invariants quantified over every generated benchmark.

mod common;

use common::*;
use vemdyn::agglomerate::merge_groups;
use vemdyn::config::Config;
use vemdyn::dynamics::{assemble, central_difference_run, BcSchedule, U0};
use vemdyn::eig::{critical_dt, element_system, global_max_frequency, Method};
use vemdyn::mesh::{generate, BenchmarkId, Mesh, Variant};
use vemdyn::vem::{Alpha0, Lumping};

const SMALL: [(BenchmarkId, &[f64]); 7] = [
    (BenchmarkId::Tri2d, &[1e-1, 1e-2, 1e-5, 1e-8]),
    (BenchmarkId::Prism3d, &[1e-1, 1e-5]),
    (BenchmarkId::Wedge, &[1e-1, 1e-3, 1e-5]),
    (BenchmarkId::Kite, &[1e-1, 1e-5]),
    (BenchmarkId::SpireA, &[1e-1, 1e-5, 1e-8]),
    (BenchmarkId::SpireB, &[1e-1, 1e-5, 1e-8]),
    (BenchmarkId::SpireC, &[1e-1, 1e-5, 1e-8]),
];

fn all_cases() -> Vec<(BenchmarkId, Option<f64>)> {
    let mut out: Vec<_> = SMALL
        .iter()
        .flat_map(|(id, eps)| eps.iter().map(move |&e| (*id, Some(e))))
        .collect();
    out.push((BenchmarkId::BeamA, None));
    out.push((BenchmarkId::BeamB, None));
    out
}

fn bench_cfg() -> Config {
    Config {
        alpha0: Some(Alpha0::Unit),
        ..Config::default()
    }
}

fn pair(id: BenchmarkId, eps: Option<f64>) -> (Mesh, Mesh, Vec<Vec<usize>>) {
    let b = generate(id, eps, Variant::Fem, &Config::default().beam).unwrap();
    let (vem, map) = merge_groups(&b.mesh, &b.groups).unwrap();
    (b.mesh, vem, map)
}

fn collect(fails: Vec<String>) {
    assert!(fails.is_empty(), "{}", fails.join("\n"));
}

#[test]
fn every_benchmark_is_watertight() {
    let mut fails = Vec::new();
    for (id, eps) in all_cases() {
        let (fem, vem, _) = pair(id, eps);
        for (tag, m) in [("fem", &fem), ("vem", &vem)] {
            if let Err(e) = check_watertight(m) {
                fails.push(format!("{id} {eps:?} {tag}: {e}"));
            }
        }
    }
    collect(fails);
}

#[test]
fn agglomeration_conserves_volume() {
    let mut fails = Vec::new();
    for (id, eps) in all_cases() {
        let (fem, vem, map) = pair(id, eps);
        if let Err(e) = check_volume_additivity(&fem, &vem, &map) {
            fails.push(format!("{id} {eps:?}: {e}"));
        }
        let (a, b) = (fem.total_volume().unwrap(), vem.total_volume().unwrap());
        if (a - b).abs() > 1e-12 * a {
            fails.push(format!("{id} {eps:?}: total volume {a:e} vs {b:e}"));
        }
    }
    collect(fails);
}

#[test]
fn vem_variant_equals_merged_fem_variant() {
    for (id, eps) in all_cases() {
        let (_, merged, _) = pair(id, eps);
        let vem = generate(id, eps, Variant::Vem, &Config::default().beam)
            .unwrap()
            .mesh;
        assert_eq!(merged, vem, "{id} {eps:?}");
    }
}

#[test]
fn generators_are_deterministic() {
    for (id, eps) in all_cases() {
        for v in [Variant::Fem, Variant::Vem] {
            let a = generate(id, eps, v, &Config::default().beam).unwrap().mesh;
            let b = generate(id, eps, v, &Config::default().beam).unwrap().mesh;
            assert_eq!(
                vemdyn::mesh::mesh_to_json(&a),
                vemdyn::mesh::mesh_to_json(&b)
            );
        }
    }
}

#[test]
fn stability_term_vanishes_on_polynomials() {
    let mut fails = Vec::new();
    for (id, eps) in all_cases() {
        let (_, vem, _) = pair(id, eps);
        for e in 0..vem.elements.len() {
            if let Err(x) = check_patch(&vem, e, &bench_cfg()) {
                fails.push(format!("{id} {eps:?}: {x}"));
            }
        }
    }
    collect(fails);
}

#[test]
fn diag_scale_lumping_is_positive() {
    let cfg = Config {
        lumping: Lumping::DiagScale,
        ..bench_cfg()
    };
    for (id, eps) in all_cases() {
        let (_, vem, _) = pair(id, eps);
        for e in 0..vem.elements.len() {
            let s = element_system(&vem, e, Method::Vem, &cfg).unwrap();
            assert!(
                s.lumped.iter().all(|&m| m > 0.0),
                "{id} {eps:?} element {e}"
            );
        }
    }
}

#[test]
fn element_bound_dominates_global_frequency() {
    let cfg = bench_cfg();
    for &(id, eps) in &SMALL {
        for &e in eps {
            for (v, method) in [(Variant::Fem, Method::Fem), (Variant::Vem, Method::Vem)] {
                let m = generate(id, Some(e), v, &cfg.beam).unwrap().mesh;
                let bound = critical_dt(&m, method, &cfg).unwrap().omega_star;
                let sys = assemble(&m, method, &cfg).unwrap();
                let free = vec![true; sys.num_dofs()];
                let g = global_max_frequency(&sys.k, &sys.m, &free, 1e-10, 200_000).unwrap();
                assert!(
                    g.omega <= bound * (1.0 + 1e-6),
                    "{id} {e} {method}: {} > {bound}",
                    g.omega
                );
            }
        }
    }
}

#[test]
fn fem_frequency_grows_as_eps_shrinks() {
    let cfg = bench_cfg();
    for id in [BenchmarkId::Kite, BenchmarkId::Wedge] {
        let w: Vec<f64> = [1e-1, 1e-3, 1e-5]
            .iter()
            .map(|&e| {
                let m = generate(id, Some(e), Variant::Fem, &cfg.beam).unwrap().mesh;
                critical_dt(&m, Method::Fem, &cfg).unwrap().omega_star
            })
            .collect();
        assert!(w[0] < w[1] && w[1] < w[2], "{id}: {w:?}");
        let v: Vec<f64> = [1e-1, 1e-5]
            .iter()
            .map(|&e| {
                let m = generate(id, Some(e), Variant::Vem, &cfg.beam).unwrap().mesh;
                critical_dt(&m, Method::Vem, &cfg).unwrap().omega_star
            })
            .collect();
        assert!(v[1] / v[0] <= 2.0, "{id}: {v:?}");
    }
}

/// Free wedge pair with the upper apex driven in x.
fn wedge_run(method: Method, dt_of: impl Fn(f64, f64) -> f64) -> Option<usize> {
    let cfg = bench_cfg();
    let variant = match method {
        Method::Fem => Variant::Fem,
        Method::Vem => Variant::Vem,
    };
    let m = generate(BenchmarkId::Wedge, Some(1e-1), variant, &cfg.beam)
        .unwrap()
        .mesh;
    let sys = assemble(&m, method, &cfg).unwrap();
    let bcs = BcSchedule {
        fixed: vec![],
        driven: vec![3],
        amplitude: U0,
        tau: 1.0,
    };
    let free = bcs.free_mask(sys.num_dofs());
    let g = global_max_frequency(&sys.k, &sys.m, &free, 1e-12, 200_000).unwrap();
    let bound = critical_dt(&m, method, &cfg).unwrap().omega_star;
    let dt = dt_of(bound, g.omega);
    let bcs = BcSchedule {
        tau: 20.0 * dt,
        ..bcs
    };
    let h = central_difference_run(&sys, &bcs, dt, 4000.0 * dt, &[4], 1e3 * U0).unwrap();
    h.diverged_at
}

#[test]
fn stability_dichotomy_on_wedge_pair() {
    for method in [Method::Fem, Method::Vem] {
        assert_eq!(
            wedge_run(method, |bound, _| 0.9 * 2.0 / bound),
            None,
            "{method}"
        );
        assert!(
            wedge_run(method, |_, g| 1.2 * 2.0 / g).is_some(),
            "{method}"
        );
    }
}
