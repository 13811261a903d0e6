//! Run a Gaussian surface bump on a doubly periodic hexagonal mesh with the
//! forward-backward RK(3,2) scheme and print the diagnostics trail.
//!
//!     cargo run --release --example gravity_wave

use fblts::harness::{run_scenario, InitialCondition, MeshSpec, ScenarioConfig, Scheme};
use fblts::operators::PhysicsConfig;

fn main() {
    let config = ScenarioConfig {
        mesh: MeshSpec::Generate {
            nx: 32,
            ny: 32,
            dc: 1000.0,
        },
        initial: InitialCondition {
            background_h: 100.0,
            amplitude: 1.0,
            width: 3000.0,
            center: [0.5, 0.5],
        },
        physics: PhysicsConfig::gravity_wave(9.80665),
        scheme: Scheme::Fbrk32,
        dt: 10.0,
        t_end: 1200.0,
        ..ScenarioConfig::default()
    };

    let out = run_scenario(config, None).expect("run failed");
    let first = out.record.rows.first().unwrap();
    let last = out.record.rows.last().unwrap();
    println!("steps:             {}", last.step);
    println!("simulated time:    {:.1} s", last.time);
    println!("max Courant:       {:.4}", last.max_courant);
    println!(
        "mass drift:        {:.3e} (relative)",
        ((last.mass - first.mass) / first.mass).abs()
    );
    println!(
        "max |u| at end:    {:.4} m/s",
        out.state.u.iter().fold(0.0f64, |a, &b| a.max(b.abs()))
    );
    println!("wall time:         {:.3} s", out.wall_seconds);
}
