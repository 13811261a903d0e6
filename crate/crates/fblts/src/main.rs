//! Command-line front end: scenario runs, the convergence / CFL /
//! conservation / performance drivers, and mesh generation and checking.
//! All the logic lives in the library; this binary parses arguments,
//! dispatches, and maps errors to exit codes (0 success, 2 configuration
//! error, 3 runtime abort).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fblts::harness::{
    cfl_scan, conservation_driver, convergence_driver, perf_driver, run_scenario, CflScheme,
    ScenarioConfig,
};
use fblts::mesh::{build_periodic_hex_mesh, compute_perp_weights};
use fblts::{Error, Mesh};

#[derive(Parser)]
#[command(name = "fblts", about = "Multirate shallow-water solver on staggered polygonal meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Scenario configuration file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for record.csv / state_final.csv / report.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the configuration's random seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario to its end time.
    Run(ConfigArgs),
    /// Temporal convergence study against an RK4 reference.
    Converge {
        #[command(flatten)]
        common: ConfigArgs,
        /// Comma-separated coarse step sizes, e.g. "16,8,4,2".
        #[arg(long)]
        dts: String,
        /// Reference RK4 step size (at most min(dts)/8).
        #[arg(long = "ref-dt")]
        ref_dt: f64,
    },
    /// Bisect the largest stable step per scheme.
    CflScan {
        #[command(flatten)]
        common: ConfigArgs,
        /// Comma-separated schemes: rk4, rk32, fbrk32, fblts.
        #[arg(long, default_value = "rk4,rk32,fbrk32,fblts")]
        schemes: String,
    },
    /// Conservation soak: drift of mass, absolute vorticity, and PV volume.
    Conserve {
        #[command(flatten)]
        common: ConfigArgs,
        /// Number of coarse steps to run.
        #[arg(long, default_value_t = 200)]
        steps: usize,
    },
    /// Work-count and wall-time comparison at a common simulated duration.
    Perf(ConfigArgs),
    /// Mesh utilities.
    Mesh {
        #[command(subcommand)]
        command: MeshCommand,
    },
}

#[derive(Subcommand)]
enum MeshCommand {
    /// Generate a doubly periodic hexagonal mesh file.
    Gen {
        #[arg(long)]
        nx: usize,
        #[arg(long)]
        ny: usize,
        /// Cell spacing in meters.
        #[arg(long)]
        dc: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Validate a mesh file: invariants plus the flux-mapping properties.
    Check {
        #[arg(long)]
        mesh: PathBuf,
        /// Seed for the random flux fields of the consistency check.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::NonPositiveThickness { .. } | Error::Internal(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn load_config(common: &ConfigArgs) -> Result<ScenarioConfig, Error> {
    let mut config = ScenarioConfig::from_file(&common.config)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn dispatch(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run(common) => {
            let config = load_config(&common)?;
            let out = run_scenario(config, common.out.as_deref())?;
            if let Some(last) = out.record.rows.last() {
                println!(
                    "steps: {}  t = {:.3} s  mass = {:.10e}  max Courant = {:.4}  wall = {:.3} s",
                    last.step, last.time, last.mass, last.max_courant, out.wall_seconds
                );
            } else {
                println!("no steps taken (t_end = 0)");
            }
        }
        Command::Converge { common, dts, ref_dt } => {
            let config = load_config(&common)?;
            let dt_list = parse_f64_list(&dts)?;
            let report = convergence_driver(&config, &dt_list, ref_dt)?;
            print!("{}", report.to_csv());
            if let Some(dir) = &common.out {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
                report.save(&dir.join("report.csv"))?;
            }
        }
        Command::CflScan { common, schemes } => {
            let config = load_config(&common)?;
            let schemes = parse_schemes(&schemes, config.m)?;
            let report = cfl_scan(&config, &schemes)?;
            print!("{}", report.to_csv());
            if let Some(dir) = &common.out {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
                report.save(&dir.join("report.csv"))?;
            }
        }
        Command::Conserve { common, steps } => {
            let config = load_config(&common)?;
            let report = conservation_driver(&config, steps)?;
            print!("{}", report.to_csv());
            if let Some(dir) = &common.out {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
                report.save(&dir.join("report.csv"))?;
            }
        }
        Command::Perf(common) => {
            let config = load_config(&common)?;
            let report = perf_driver(&config)?;
            print!("{}", report.to_csv());
            if let Some(dir) = &common.out {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
                report.save(&dir.join("report.csv"))?;
            }
        }
        Command::Mesh { command } => match command {
            MeshCommand::Gen { nx, ny, dc, out } => {
                let mesh = build_periodic_hex_mesh(nx, ny, dc)?;
                mesh.save(&out)?;
                println!(
                    "wrote {}: {} cells, {} edges, {} vertices",
                    out.display(),
                    mesh.n_cells,
                    mesh.n_edges,
                    mesh.n_vertices
                );
            }
            MeshCommand::Check { mesh, seed } => {
                check_mesh(&mesh, seed)?;
            }
        },
    }
    Ok(())
}

fn parse_f64_list(text: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("bad step size {s:?}: {e}")))
        })
        .collect()
}

fn parse_schemes(text: &str, m: usize) -> Result<Vec<CflScheme>, Error> {
    text.split(',')
        .map(|s| match s.trim() {
            "rk4" => Ok(CflScheme::Rk4),
            "rk32" => Ok(CflScheme::Rk32),
            "fbrk32" => Ok(CflScheme::Fbrk32),
            "fblts" => Ok(CflScheme::Fblts { m }),
            other => Err(Error::Config(format!("unknown scheme {other:?}"))),
        })
        .collect()
}

/// Validate every mesh invariant, then exercise the flux-mapping weights on
/// seeded random fields: antisymmetry and the dual-divergence consistency
/// property.
fn check_mesh(path: &std::path::Path, seed: u64) -> Result<(), Error> {
    let mesh = Mesh::load(path)?;
    let report = mesh.validate();
    for check in &report.checks {
        println!(
            "{}: {} (worst index {}, magnitude {:.3e})",
            if check.pass { "pass" } else { "FAIL" },
            check.name,
            check.worst_index,
            check.worst_magnitude
        );
    }
    println!(
        "boundary edges: {} (conservation hypotheses {})",
        report.boundary_edges,
        if report.conservation_hypothesis { "hold" } else { "do not hold" }
    );

    // Reconstruct the weights and compare with the stored ones.
    let (edges_on_edge, weights) = compute_perp_weights(&mesh)?;
    let mut worst_weight_gap = 0.0f64;
    for e in 0..mesh.n_edges {
        if edges_on_edge[e] != mesh.edges_on_edge[e] {
            return Err(Error::MeshInvariant(format!(
                "edgesOnEdge mismatch at edge {e}"
            )));
        }
        for (slot, w) in weights[e].iter().enumerate() {
            worst_weight_gap = worst_weight_gap.max((w - mesh.perp_weights[e][slot]).abs());
        }
    }
    println!("stored vs recomputed flux weights: max gap {worst_weight_gap:.3e}");

    // Dual-divergence consistency on seeded pseudo-random flux fields.
    let mut rng_state = seed.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
    let mut next = move || {
        rng_state ^= rng_state << 13;
        rng_state ^= rng_state >> 7;
        rng_state ^= rng_state << 17;
        (rng_state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    let mut worst_resid = 0.0f64;
    for _ in 0..20 {
        let flux: Vec<f64> = (0..mesh.n_edges).map(|_| next()).collect();
        let fperp: Vec<f64> = (0..mesh.n_edges)
            .map(|e| {
                mesh.edges_on_edge[e]
                    .iter()
                    .zip(&mesh.perp_weights[e])
                    .map(|(&ep, &w)| w * flux[ep])
                    .sum()
            })
            .collect();
        for v in 0..mesh.n_vertices {
            let mut dual = 0.0;
            for (slot, &e) in mesh.edges_on_vertex[v].iter().enumerate() {
                dual += -mesh.edge_sign_on_vertex[v][slot] * mesh.d_edge[e] * fperp[e];
            }
            dual /= mesh.area_dual[v];
            let mut avg = 0.0;
            for (slot, &i) in mesh.cells_on_vertex[v].iter().enumerate() {
                let mut div = 0.0;
                for (s2, &e) in mesh.edges_on_cell[i].iter().enumerate() {
                    div += mesh.edge_sign_on_cell[i][s2] * mesh.l_edge[e] * flux[e];
                }
                avg += mesh.kite_area[v][slot] * (div / mesh.area_cell[i]);
            }
            avg /= mesh.area_dual[v];
            worst_resid = worst_resid.max((dual - avg).abs());
        }
    }
    println!("flux-mapping consistency residual over 20 random fields: {worst_resid:.3e}");

    let mean_d: f64 = mesh.d_edge.iter().sum::<f64>() / mesh.n_edges as f64;
    let tolerance = 1e-12 / mean_d;
    if !report.all_pass() || worst_resid > tolerance {
        return Err(Error::MeshInvariant(
            "mesh check failed; see report above".into(),
        ));
    }
    println!("mesh check passed");
    Ok(())
}
