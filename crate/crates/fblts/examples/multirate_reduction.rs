//! The multirate step with a subcycling factor of one is the global scheme:
//! run both side by side on the nonlinear rotating system and print the
//! worst relative difference (it should be exactly zero).
//!
//!     cargo run --release --example multirate_reduction

use fblts::harness::{FineMaskSpec, RunPlan, Scenario, ScenarioConfig, Scheme};
use fblts::operators::PhysicsConfig;

fn main() {
    let mut config = ScenarioConfig {
        physics: PhysicsConfig {
            rotation_on: true,
            advection_on: true,
            ..PhysicsConfig::default()
        },
        coriolis: 1e-4,
        scheme: Scheme::Fblts,
        m: 1,
        fine_mask: Some(FineMaskSpec::Xband { lo: 0.0, hi: 0.4 }),
        dt: 10.0,
        t_end: 400.0,
        ..ScenarioConfig::default()
    };

    let scenario = Scenario::build(config.clone()).expect("scenario");
    let plan = RunPlan::from_config(&config);
    let multirate = fblts::harness::execute(&scenario, &plan).expect("multirate run");

    config.scheme = Scheme::Fbrk32;
    let scenario = Scenario::build(config.clone()).expect("scenario");
    let plan = RunPlan::from_config(&config);
    let global = fblts::harness::execute(&scenario, &plan).expect("global run");

    let scale_h = global.state.h.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let scale_u = global.state.u.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let diff_h = multirate
        .state
        .h
        .iter()
        .zip(&global.state.h)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    let diff_u = multirate
        .state
        .u
        .iter()
        .zip(&global.state.u)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);

    println!("steps:                     {}", (config.t_end / config.dt) as usize);
    println!("max |dh| (m = 1 vs global): {:.3e} of {:.3e}", diff_h, scale_h);
    println!("max |du| (m = 1 vs global): {:.3e} of {:.3e}", diff_u, scale_u);
    if diff_h == 0.0 && diff_u == 0.0 {
        println!("the m = 1 multirate step reproduces the global scheme exactly");
    }
}
