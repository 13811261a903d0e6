//! Integration checks on the global schemes: temporal order of FB-RK(3,2)
//! and the fourth-order error decay of RK4 on the gravity-wave scenario.

use fblts::diagnostics::rms_error;
use fblts::harness::{execute, RunPlan, Scenario, ScenarioConfig, Scheme};
use fblts::operators::PhysicsConfig;
use fblts::steppers::courant_number;

fn gravity_wave_scenario() -> Scenario {
    let config = ScenarioConfig {
        physics: PhysicsConfig::gravity_wave(9.80665),
        scheme: Scheme::Fbrk32,
        dt: 8.0,
        t_end: 160.0,
        ..ScenarioConfig::default()
    };
    Scenario::build(config).unwrap()
}

fn final_h(scenario: &Scenario, scheme: Scheme, dt: f64) -> Vec<f64> {
    let mut plan = RunPlan::from_config(&scenario.config);
    plan.scheme = scheme;
    plan.dt = dt;
    plan.collect_record = false;
    plan.track_vorticity = false;
    execute(scenario, &plan).unwrap().state.h
}

#[test]
fn fbrk32_global_error_decays_at_second_order() {
    let scenario = gravity_wave_scenario();
    let reference = final_h(&scenario, Scheme::Rk4, 0.25);
    let e1 = rms_error(&final_h(&scenario, Scheme::Fbrk32, 8.0), &reference).unwrap();
    let e2 = rms_error(&final_h(&scenario, Scheme::Fbrk32, 4.0), &reference).unwrap();
    let slope = (e1 / e2).log2();
    assert!(
        (1.8..=2.2).contains(&slope),
        "FB-RK(3,2) order {slope:.3} outside [1.8, 2.2] (errors {e1:.3e}, {e2:.3e})"
    );
}

#[test]
fn rk4_halving_reduces_error_about_sixteenfold() {
    let scenario = gravity_wave_scenario();
    let reference = final_h(&scenario, Scheme::Rk4, 0.25);
    let e1 = rms_error(&final_h(&scenario, Scheme::Rk4, 8.0), &reference).unwrap();
    let e2 = rms_error(&final_h(&scenario, Scheme::Rk4, 4.0), &reference).unwrap();
    let ratio = e1 / e2;
    assert!(
        (11.0..=21.0).contains(&ratio),
        "RK4 halving ratio {ratio:.2} not near 16 (errors {e1:.3e}, {e2:.3e})"
    );
}

#[test]
fn rk4_bump_run_completes_with_tiny_mass_drift() {
    use fblts::diagnostics::total_mass;
    use fblts::harness::MeshSpec;

    let config = ScenarioConfig {
        mesh: MeshSpec::Generate {
            nx: 32,
            ny: 32,
            dc: 1000.0,
        },
        physics: PhysicsConfig::gravity_wave(9.80665),
        scheme: Scheme::Rk4,
        dt: 10.0, // Courant number about 0.31 at H = 100 m
        t_end: 400.0,
        ..ScenarioConfig::default()
    };
    let scenario = Scenario::build(config.clone()).unwrap();
    let plan = RunPlan::from_config(&config);
    let out = execute(&scenario, &plan).unwrap();
    let mass0 = total_mass(&scenario.mesh, &scenario.initial.h);
    let mass1 = total_mass(&scenario.mesh, &out.state.h);
    assert!(((mass1 - mass0) / mass0).abs() <= 1e-12);
    let (nu, _) = courant_number(&scenario.mesh, &out.state, 9.80665, config.dt);
    assert!((0.25..0.4).contains(&nu), "Courant {nu}");
}

#[test]
fn courant_argmax_tracks_the_deepest_cell() {
    let scenario = gravity_wave_scenario();
    let mesh = &scenario.mesh;
    let mut state = scenario.initial.clone();
    // Make one cell much deeper; the wave speed peaks on its edges.
    state.h[17] = 400.0;
    let (_, edge) = courant_number(mesh, &state, 9.80665, 10.0);
    assert!(
        mesh.cells_on_edge[edge].contains(&17),
        "argmax edge {edge} not adjacent to the deep cell"
    );
}
