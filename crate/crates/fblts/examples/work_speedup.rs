//! Work-count and wall-time comparison: RK4 and the global scheme at the
//! fine step against the multirate scheme at the coarse step, on a mesh
//! where a tenth of the cells are fine. The fast-tendency counters must
//! match the closed-form model derived from the region sizes exactly.
//!
//!     cargo run --release --example work_speedup

use fblts::harness::{perf_driver, FineMaskSpec, InitialCondition, MeshSpec, ScenarioConfig, Scheme};
use fblts::operators::PhysicsConfig;

fn main() {
    let config = ScenarioConfig {
        mesh: MeshSpec::Generate {
            nx: 64,
            ny: 64,
            dc: 1000.0,
        },
        initial: InitialCondition {
            background_h: 100.0,
            amplitude: 1.0,
            width: 6000.0,
            center: [0.5, 0.5],
        },
        physics: PhysicsConfig {
            rotation_on: true,
            advection_on: true,
            drag_coefficient: 2.5e-3,
            ..PhysicsConfig::default()
        },
        coriolis: 1e-4,
        scheme: Scheme::Fblts,
        dt: 2.0, // fine step; the multirate run uses m times this
        m: 4,
        fine_mask: Some(FineMaskSpec::Disk {
            cx: 0.5,
            cy: 0.5,
            radius: 10600.0,
        }),
        splitting: true,
        t_end: 800.0,
        ..ScenarioConfig::default()
    };

    let report = perf_driver(&config).expect("perf comparison failed");
    println!(
        "{:>8}  {:>7}  {:>6}  {:>10}  {:>14}  {:>14}  {:>8}  {:>8}",
        "scheme", "dt (s)", "steps", "wall (s)", "fast cell", "fast edge", "vs rk4", "vs fb32"
    );
    for row in &report.rows {
        println!(
            "{:>8}  {:>7.1}  {:>6}  {:>10.4}  {:>14}  {:>14}  {:>8.2}  {:>8.2}",
            row.label,
            row.dt,
            row.steps,
            row.wall_seconds,
            row.fast_cell_evals,
            row.fast_edge_evals,
            row.speedup_vs_rk4.unwrap_or(f64::NAN),
            row.speedup_vs_fbrk32.unwrap_or(f64::NAN),
        );
    }
    let fblts = report.row("fblts").unwrap();
    println!(
        "\nclosed-form model check: measured {} fast cell evals vs predicted {} -> {}",
        fblts.fast_cell_evals,
        fblts.predicted_fast_cell_evals.unwrap(),
        if Some(fblts.fast_cell_evals) == fblts.predicted_fast_cell_evals {
            "exact match"
        } else {
            "MISMATCH"
        }
    );
    let fbrk32 = report.row("fbrk32").unwrap();
    println!(
        "fast cell evals, global-at-fine over multirate: {:.2}x",
        fbrk32.fast_cell_evals as f64 / fblts.fast_cell_evals as f64
    );
}
