use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use vemdyn::agglomerate::{auto_agglomerate, mapping_csv, merge_groups, parse_groups, Strategy};
use vemdyn::config::Config;
use vemdyn::dynamics::{
    assemble, beam_bcs, tapered_beam_experiment, BcSchedule, BeamCase, StepBasis,
};
use vemdyn::eig::{critical_dt, global_max_frequency, Method};
use vemdyn::hni::{integrate_monomial, MonomialExponent, Polytope};
use vemdyn::mesh::{
    generate, load_mesh, mesh_to_json, save_mesh, BenchmarkId, Element, Mesh, Variant,
};
use vemdyn::quality::{classify_all, report_csv};
use vemdyn::tables::write_tables;
use vemdyn::vem::{Alpha0, Lumping};
use vemdyn::{Error, Result};

const EXIT_VALIDATION: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "vemdyn",
    about = "Virtual elements for explicit elastodynamics",
    disable_version_flag = true
)]
struct Cli {
    /// Print version and configuration hash
    #[arg(short = 'V', long = "version", global = true)]
    version: bool,
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Debug)]
struct Common {
    /// Key-value configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a configuration key (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Stabilization preset: unit, diameter or a number
    #[arg(long, global = true)]
    alpha0: Option<Alpha0>,
    /// Mass lumping: row_sum, diag_scale or auto
    #[arg(long, global = true)]
    lumping: Option<Lumping>,
    /// Worker threads for element sweeps (1 = serial)
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a benchmark mesh
    MeshGen {
        #[arg(long)]
        benchmark: BenchmarkId,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value = "fem")]
        variant: Variant,
        #[arg(long)]
        out: PathBuf,
        /// Also write the fem-to-vem merge groups
        #[arg(long)]
        groups_out: Option<PathBuf>,
    },
    /// Shape diagnostics as CSV
    Quality {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Merge elements into polytopal elements
    Agglomerate {
        #[arg(long)]
        mesh: PathBuf,
        /// One group of element ids per line
        #[arg(long, conflicts_with = "auto")]
        groups: Option<PathBuf>,
        /// Merge every non-good element with its neighbors
        #[arg(long)]
        auto: bool,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        mapping_out: Option<PathBuf>,
    },
    /// Element-by-element critical time step
    Timestep {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        method: Method,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximum frequency of the assembled system
    EigGlobal {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        method: Method,
        /// Constraints: none, or the tapered-beam end conditions
        #[arg(long, default_value = "none", value_parser = ["none", "beam"])]
        bcs: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tapered-beam explicit dynamics
    Simulate {
        #[arg(long, default_value = "A")]
        case: BeamCase,
        #[arg(long)]
        method: Method,
        /// Time step as a multiple of the critical step
        #[arg(long, default_value_t = 1.0)]
        factor: f64,
        #[arg(long, default_value = "element")]
        basis: StepBasis,
        #[arg(long)]
        history_out: PathBuf,
        #[arg(long)]
        summary_out: Option<PathBuf>,
    },
    /// Integrate a monomial over an element
    Integrate {
        #[arg(long, conflicts_with_all = ["mesh", "unit_cube"])]
        unit_tet: bool,
        #[arg(long, conflicts_with = "mesh")]
        unit_cube: bool,
        #[arg(long, requires = "element")]
        mesh: Option<PathBuf>,
        #[arg(long)]
        element: Option<usize>,
        /// Exponents a,b[,c]
        #[arg(long = "exp")]
        exponent: MonomialExponent,
    },
    /// Regenerate table1.csv ... table7.csv
    Tables {
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(c: &Common) -> Result<Config> {
    let mut cfg = match &c.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    for kv in &c.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(a) = c.alpha0 {
        cfg.alpha0 = Some(a);
    }
    if let Some(l) = c.lumping {
        cfg.lumping = l;
    }
    if let Some(t) = c.threads {
        cfg.threads = Some(t);
    }
    Ok(cfg)
}

fn config_hash(cfg: &Config) -> String {
    Sha256::digest(cfg.canonical().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write(p: &Path, text: &str) -> Result<()> {
    if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(p, text)?;
    Ok(())
}

fn element_integral(mesh: &Mesh, e: usize, exp: MonomialExponent) -> Result<f64> {
    let el = mesh
        .elements
        .get(e)
        .ok_or_else(|| Error::Invalid(format!("element {e} out of range")))?;
    match el {
        Element::Polygon(l) => {
            let pts: Vec<[f64; 2]> = l
                .iter()
                .map(|&i| [mesh.vertices[i][0], mesh.vertices[i][1]])
                .collect();
            integrate_monomial(&Polytope::Polygon(&pts), exp)
        }
        Element::Polyhedron { faces, .. } => integrate_monomial(
            &Polytope::Polyhedron {
                vertices: &mesh.vertices,
                faces,
            },
            exp,
        ),
    }
}

fn unit_cube() -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let v = (0..8)
        .map(|i| [(i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64])
        .collect();
    let f = vec![
        [0, 2, 1],
        [1, 2, 3],
        [4, 5, 6],
        [5, 7, 6],
        [0, 1, 4],
        [1, 5, 4],
        [2, 6, 3],
        [3, 6, 7],
        [0, 4, 2],
        [2, 4, 6],
        [1, 3, 5],
        [3, 7, 5],
    ];
    (v, f)
}

/// Returns Ok(true) on success and Ok(false) when a run diverged.
fn run(cmd: Command, cfg: &Config) -> Result<bool> {
    match cmd {
        Command::MeshGen {
            benchmark,
            eps,
            variant,
            out,
            groups_out,
        } => {
            let b = generate(benchmark, eps, variant, &cfg.beam)?;
            save_mesh(&b.mesh, &out)?;
            if let Some(g) = groups_out {
                let lines: Vec<String> = b
                    .groups
                    .iter()
                    .map(|g| {
                        g.iter()
                            .map(ToString::to_string)
                            .collect::<Vec<_>>()
                            .join(",")
                    })
                    .collect();
                write(&g, &(lines.join("\n") + "\n"))?;
            }
        }
        Command::Quality { mesh, out } => {
            let m = load_mesh(&mesh)?;
            emit(&out, &report_csv(&classify_all(&m, &cfg.thresholds)?))?;
        }
        Command::Agglomerate {
            mesh,
            groups,
            auto,
            out,
            mapping_out,
        } => {
            let m = load_mesh(&mesh)?;
            let (merged, mapping) = match (groups, auto) {
                (Some(g), _) => merge_groups(&m, &parse_groups(&std::fs::read_to_string(g)?)?)?,
                (None, true) => {
                    let r = auto_agglomerate(&m, &cfg.thresholds, Strategy::default())?;
                    for e in &r.unmerged {
                        log::warn!("bad element {e} has no neighbor to merge with");
                    }
                    (r.mesh, r.mapping)
                }
                (None, false) => {
                    return Err(Error::Invalid(
                        "agglomerate needs --groups or --auto".into(),
                    ))
                }
            };
            write(&out, &mesh_to_json(&merged))?;
            if let Some(p) = mapping_out {
                write(&p, &mapping_csv(&mapping))?;
            }
        }
        Command::Timestep { mesh, method, out } => {
            let m = load_mesh(&mesh)?;
            emit(&out, &critical_dt(&m, method, cfg)?.csv())?;
        }
        Command::EigGlobal {
            mesh,
            method,
            bcs,
            out,
        } => {
            let m = load_mesh(&mesh)?;
            let sys = assemble(&m, method, cfg)?;
            let schedule = if bcs == "beam" {
                beam_bcs(&m, cfg.beam.length, 0.0, 1.0)
            } else {
                BcSchedule {
                    fixed: vec![],
                    driven: vec![],
                    amplitude: 0.0,
                    tau: 1.0,
                }
            };
            let free = schedule.free_mask(sys.num_dofs());
            let g = global_max_frequency(&sys.k, &sys.m, &free, cfg.power_tol, cfg.power_max_iter)?;
            let bound = critical_dt(&m, method, cfg)?.omega_star;
            let json = serde_json::json!({
                "omega_global": g.omega,
                "lambda": g.lambda,
                "iterations": g.iterations,
                "converged": g.converged,
                "dt_global": 2.0 / g.omega,
                "omega_star": bound,
                "bound_holds": g.omega <= bound * (1.0 + 1e-6),
            });
            emit(
                &out,
                &(serde_json::to_string_pretty(&json).expect("json") + "\n"),
            )?;
            if !g.converged {
                return Err(Error::Numerical(format!(
                    "power iteration did not converge in {} iterations (best estimate {:e})",
                    g.iterations, g.omega
                )));
            }
        }
        Command::Simulate {
            case,
            method,
            factor,
            basis,
            history_out,
            summary_out,
        } => {
            let r = tapered_beam_experiment(case, method, factor, basis, cfg)?;
            write(&history_out, &r.history_csv())?;
            if let Some(p) = summary_out {
                write(&p, &(r.summary_json() + "\n"))?;
            }
            if let Some(k) = r.summary.diverged_at {
                eprintln!("error: run diverged at step {k}");
                return Ok(false);
            }
        }
        Command::Integrate {
            unit_tet,
            unit_cube: cube,
            mesh,
            element,
            exponent,
        } => {
            let v = if unit_tet {
                let v = [[0., 0., 0.], [1., 0., 0.], [0., 1., 0.], [0., 0., 1.]];
                let f = [[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]];
                integrate_monomial(
                    &Polytope::Polyhedron {
                        vertices: &v,
                        faces: &f,
                    },
                    exponent,
                )?
            } else if cube {
                let (v, f) = unit_cube();
                integrate_monomial(
                    &Polytope::Polyhedron {
                        vertices: &v,
                        faces: &f,
                    },
                    exponent,
                )?
            } else if let (Some(p), Some(e)) = (mesh, element) {
                element_integral(&load_mesh(&p)?, e, exponent)?
            } else {
                return Err(Error::Invalid(
                    "integrate needs --unit-tet, --unit-cube or --mesh with --element".into(),
                ));
            };
            println!("{v:.17e}");
        }
        Command::Tables { out } => {
            write_tables(cfg, &out)?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = match load_config(&cli.common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    if cli.version {
        println!(
            "vemdyn {} config {}",
            env!("CARGO_PKG_VERSION"),
            config_hash(&cfg)
        );
        return ExitCode::SUCCESS;
    }
    let Some(cmd) = cli.command else {
        eprintln!("error: no subcommand given (see --help)");
        return ExitCode::from(EXIT_VALIDATION);
    };
    if let Some(n) = cfg.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(EXIT_VALIDATION);
        }
    }
    match run(cmd, &cfg) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_NUMERICAL),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_VALIDATION
            })
        }
    }
}
