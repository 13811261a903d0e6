//! Long multirate run with rotation and nonlinear advection: total mass and
//! the prognostic absolute-vorticity companion should hold to roundoff.
//!
//!     cargo run --release --example conservation_soak

use fblts::harness::{conservation_driver, FineMaskSpec, ScenarioConfig, Scheme};
use fblts::operators::PhysicsConfig;

fn main() {
    let config = ScenarioConfig {
        physics: PhysicsConfig {
            rotation_on: true,
            advection_on: true,
            ..PhysicsConfig::default()
        },
        coriolis: 1e-4,
        scheme: Scheme::Fblts,
        m: 4,
        fine_mask: Some(FineMaskSpec::Disk {
            cx: 0.5,
            cy: 0.5,
            radius: 4500.0,
        }),
        dt: 10.0,
        splitting: true,
        ..ScenarioConfig::default()
    };

    let report = conservation_driver(&config, 200).expect("soak failed");
    println!("coarse steps:               {}", report.steps);
    println!("initial mass:               {:.10e} m^3", report.mass_initial);
    println!("mass drift:                 {:.3e} (relative)", report.mass_drift);
    println!(
        "initial absolute vorticity: {:.10e} m^2/s",
        report.vorticity_initial
    );
    println!(
        "vorticity drift:            {:.3e} (relative)",
        report.vorticity_drift
    );
    println!(
        "PV volume drift:            {:.3e} (relative)",
        report.pv_volume_drift
    );
}
