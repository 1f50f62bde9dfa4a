//! Regeneration of the benchmark tables as CSV.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::config::Config;
use crate::dynamics::{assemble, beam_bcs, beam_global_frequency};
use crate::eig::{critical_dt, Method, TimeStepReport};
use crate::error::Result;
use crate::mesh::{generate, BenchmarkId, Variant};
use crate::quality::classify_all;
use crate::vem::Alpha0;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.join(","));
        }
        s
    }
}

fn f(x: f64) -> String {
    format!("{x:.16e}")
}

fn eps_label(e: f64) -> String {
    format!("{e:e}")
}

/// Benchmarks of tables 1-6 run with α₀ = 1 unless the config sets it.
fn bench_cfg(cfg: &Config) -> Config {
    let mut c = cfg.clone();
    c.alpha0.get_or_insert(Alpha0::Unit);
    c
}

fn report(id: BenchmarkId, eps: f64, method: Method, cfg: &Config) -> Result<TimeStepReport> {
    let variant = match method {
        Method::Fem => Variant::Fem,
        Method::Vem => Variant::Vem,
    };
    let b = generate(id, Some(eps), variant, &cfg.beam)?;
    critical_dt(&b.mesh, method, cfg)
}

/// Two-column layout of tables 1-3: the worst element and a well-shaped
/// reference element (the last element of the mesh) per method.
fn paired_table(name: &str, id: BenchmarkId, eps_list: &[f64], cfg: &Config) -> Result<Table> {
    let cfg = bench_cfg(cfg);
    let mut t = Table::new(
        name,
        &[
            "eps",
            "method",
            "element",
            "omega_max",
            "ref_element",
            "omega_ref",
            "dt_ratio_vem_fem",
        ],
    );
    for &eps in eps_list {
        let fem = report(id, eps, Method::Fem, &cfg)?;
        let vem = report(id, eps, Method::Vem, &cfg)?;
        let ratio = fem.omega_star / vem.omega_star;
        for (m, r) in [(Method::Fem, &fem), (Method::Vem, &vem)] {
            let last = r.omega.len() - 1;
            let (re, rw) = if last == r.argmax {
                (String::new(), String::new())
            } else {
                (last.to_string(), f(r.omega[last]))
            };
            t.rows.push(vec![
                eps_label(eps),
                m.to_string(),
                r.argmax.to_string(),
                f(r.omega_star),
                re,
                rw,
                f(ratio),
            ]);
        }
    }
    Ok(t)
}

pub fn table1(cfg: &Config) -> Result<Table> {
    paired_table("table1", BenchmarkId::Tri2d, &[1e-1, 1e-2, 1e-5, 1e-8], cfg)
}

pub fn table2(cfg: &Config) -> Result<Table> {
    paired_table("table2", BenchmarkId::Prism3d, &[1e-1, 1e-5], cfg)
}

pub fn table3(cfg: &Config) -> Result<Table> {
    paired_table("table3", BenchmarkId::Wedge, &[1e-1, 1e-3, 1e-5], cfg)
}

/// Shape diagnostics of every element of the pathological tetrahedral meshes.
pub fn table4(cfg: &Config) -> Result<Table> {
    let mut t = Table::new(
        "table4",
        &[
            "benchmark",
            "eps",
            "element",
            "class",
            "min_dihedral_deg",
            "max_dihedral_deg",
            "min_edge",
            "min_face_area",
            "volume",
        ],
    );
    let ids = [
        BenchmarkId::Wedge,
        BenchmarkId::Kite,
        BenchmarkId::SpireA,
        BenchmarkId::SpireB,
        BenchmarkId::SpireC,
    ];
    for id in ids {
        for eps in [1e-1, 1e-3, 1e-5] {
            let m = generate(id, Some(eps), Variant::Fem, &cfg.beam)?.mesh;
            for r in classify_all(&m, &cfg.thresholds)? {
                t.rows.push(vec![
                    id.to_string(),
                    eps_label(eps),
                    r.element.to_string(),
                    r.class.to_string(),
                    r.min_dihedral.map(f).unwrap_or_default(),
                    r.max_dihedral.map(f).unwrap_or_default(),
                    f(r.min_edge),
                    f(r.min_face_area),
                    f(r.volume),
                ]);
            }
        }
    }
    Ok(t)
}

pub fn table5(cfg: &Config) -> Result<Table> {
    let cfg = bench_cfg(cfg);
    let mut t = Table::new(
        "table5",
        &["eps", "omega_fem", "omega_vem", "dt_ratio_vem_fem"],
    );
    for eps in [1e-1, 1e-5] {
        let fem = report(BenchmarkId::Kite, eps, Method::Fem, &cfg)?;
        let vem = report(BenchmarkId::Kite, eps, Method::Vem, &cfg)?;
        t.rows.push(vec![
            eps_label(eps),
            f(fem.omega_star),
            f(vem.omega_star),
            f(fem.omega_star / vem.omega_star),
        ]);
    }
    Ok(t)
}

pub fn table6(cfg: &Config) -> Result<Table> {
    let cfg = bench_cfg(cfg);
    let mut t = Table::new(
        "table6",
        &[
            "eps",
            "omega_fem",
            "vem_case",
            "omega_vem",
            "dt_ratio_vem_fem",
        ],
    );
    for eps in [1e-1, 1e-5, 1e-8] {
        let fem = report(BenchmarkId::SpireC, eps, Method::Fem, &cfg)?;
        for (case, id) in [
            ("A", BenchmarkId::SpireA),
            ("B", BenchmarkId::SpireB),
            ("C", BenchmarkId::SpireC),
        ] {
            let vem = report(id, eps, Method::Vem, &cfg)?;
            t.rows.push(vec![
                eps_label(eps),
                f(fem.omega_star),
                case.into(),
                f(vem.omega_star),
                f(fem.omega_star / vem.omega_star),
            ]);
        }
    }
    Ok(t)
}

/// Beam critical steps. The ratio uses the element bound for case A and the
/// global eigenvalue for case B.
pub fn table7(cfg: &Config) -> Result<Table> {
    let mut t = Table::new(
        "table7",
        &[
            "case",
            "omega_fem_element",
            "omega_fem_global",
            "omega_vem",
            "omega_vem_global",
            "dt_ratio_vem_fem",
            "ratio_basis",
            "steps_vem",
            "steps_fem",
        ],
    );
    for id in [BenchmarkId::BeamA, BenchmarkId::BeamB] {
        let mut g = Vec::new();
        for (variant, method) in [(Variant::Fem, Method::Fem), (Variant::Vem, Method::Vem)] {
            let mesh = generate(id, None, variant, &cfg.beam)?.mesh;
            let rep = critical_dt(&mesh, method, cfg)?;
            let sys = assemble(&mesh, method, cfg)?;
            let bcs = beam_bcs(&mesh, cfg.beam.length, 1.0, 1.0);
            let glob = beam_global_frequency(&sys, &bcs, cfg)?;
            g.push((rep.omega_star, glob.omega));
        }
        let [(fe, fg), (ve, vg)] = [g[0], g[1]];
        let global = id == BenchmarkId::BeamB;
        let wf = if global { fg } else { fe };
        let mat = cfg.material(&generate(id, None, Variant::Vem, &cfg.beam)?.mesh.material)?;
        let t_max = cfg.t_max_transits * cfg.beam.length / mat.bar_wave_speed();
        let steps = |w: f64| (t_max / (2.0 / w)).ceil() as u64;
        t.rows.push(vec![
            id.to_string(),
            f(fe),
            f(fg),
            f(ve),
            f(vg),
            f(wf / ve),
            if global { "global" } else { "element" }.into(),
            steps(ve).to_string(),
            steps(wf).to_string(),
        ]);
    }
    Ok(t)
}

/// All seven tables, computed in parallel.
pub fn all_tables(cfg: &Config) -> Result<Vec<Table>> {
    type Gen = fn(&Config) -> Result<Table>;
    let gens: [Gen; 7] = [table1, table2, table3, table4, table5, table6, table7];
    gens.par_iter().map(|g| g(cfg)).collect()
}

/// Writes table1.csv ... table7.csv into `dir`.
pub fn write_tables(cfg: &Config, dir: &Path) -> Result<Vec<Table>> {
    std::fs::create_dir_all(dir)?;
    let tables = all_tables(cfg)?;
    for t in &tables {
        std::fs::write(dir.join(format!("{}.csv", t.name)), t.csv())?;
    }
    Ok(tables)
}
