//! Temporal convergence of the multirate scheme on the gravity-wave case:
//! halving the coarse step (with the subcycling factor fixed at 4) should
//! show second-order error decay, both globally and on interface-one cells.
//!
//!     cargo run --release --example temporal_convergence

use fblts::harness::{convergence_driver, FineMaskSpec, MeshSpec, ScenarioConfig, Scheme};
use fblts::operators::PhysicsConfig;

fn main() {
    let config = ScenarioConfig {
        mesh: MeshSpec::Generate {
            nx: 32,
            ny: 32,
            dc: 1000.0,
        },
        physics: PhysicsConfig::gravity_wave(9.80665),
        scheme: Scheme::Fblts,
        m: 4,
        fine_mask: Some(FineMaskSpec::Disk {
            cx: 0.5,
            cy: 0.5,
            radius: 7000.0,
        }),
        dt: 16.0,
        t_end: 400.0,
        ..ScenarioConfig::default()
    };

    let report =
        convergence_driver(&config, &[16.0, 8.0, 4.0, 2.0], 0.2).expect("convergence study failed");

    println!("reference: RK4 at dt = {} s\n", report.reference_dt);
    println!(
        "{:>8}  {:>12}  {:>12}  {:>12}  {:>12}  {:>7}  {:>7}",
        "dt (s)", "rms(h)", "rms(u)", "rms(h)|IF1", "rms(u)|IF1", "ord(h)", "ord(u)"
    );
    for row in &report.rows {
        let f = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.4e}"));
        let o = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.3}"));
        println!(
            "{:>8}  {:>12}  {:>12}  {:>12}  {:>12}  {:>7}  {:>7}",
            row.dt,
            f(row.rms_h),
            f(row.rms_u),
            f(row.rms_h_if1),
            f(row.rms_u_if1),
            o(row.order_h),
            o(row.order_u),
        );
    }
}
