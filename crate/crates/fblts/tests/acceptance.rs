//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with its measured numbers (run with `--nocapture` to see them
//! on success). Tolerances are pinned here, next to the assertions.

use fblts::diagnostics::{rms_error, total_absolute_vorticity, total_mass};
use fblts::harness::{
    cfl_scan, conservation_driver, convergence_driver, perf_driver, CflScheme, FineMaskSpec,
    InitialCondition, MeshSpec, RunPlan, Scenario, ScenarioConfig, Scheme,
};
use fblts::lts::{
    coarse_advance, fblts_step, label_regions, predicted_fast_evals, predict_interface,
    LtsOptions,
};
use fblts::mesh::build_periodic_hex_mesh;
use fblts::operators::{
    edge_thickness_at, thickness_tendency, PhysicsConfig, State,
};
use fblts::steppers::{fbrk32_step, fbrk32_step_stages, FbWeights, RhsMode, StepContext};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, &b| a.max(b.abs()))
}

fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = max_abs(b).max(1.0e-30);
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0f64, f64::max)
        / scale
}

fn nonlinear_rotating_config() -> ScenarioConfig {
    ScenarioConfig {
        mesh: MeshSpec::Generate {
            nx: 16,
            ny: 16,
            dc: 1000.0,
        },
        initial: InitialCondition {
            background_h: 100.0,
            amplitude: 1.0,
            width: 3000.0,
            center: [0.5, 0.5],
        },
        physics: PhysicsConfig {
            g: 9.80665,
            rotation_on: true,
            advection_on: true,
            drag_coefficient: 0.0,
            wind_coefficient: 0.0,
            wind_velocity: [0.0, 0.0],
        },
        coriolis: 1.0e-4,
        scheme: Scheme::Fblts,
        weights: FbWeights::default(),
        dt: 10.0,
        m: 1,
        fine_mask: Some(FineMaskSpec::Xband { lo: 0.0, hi: 0.375 }),
        splitting: false,
        wide_halo: false,
        t_end: 200.0,
        seed: 0,
        track_vorticity: false,
    }
}

/// Criterion 1: with m = 1 the multirate step reproduces the global
/// FB-RK(3,2) trajectory to 1e-13 relative over 20 coarse steps of the
/// nonlinear rotating system.
#[test]
fn criterion_1_m1_reduction() {
    const TOL: f64 = 1.0e-13;
    let config = nonlinear_rotating_config();
    let scenario = Scenario::build(config.clone()).unwrap();
    let labels = scenario.labels.as_ref().unwrap();

    let mut lts_state = scenario.initial.clone();
    let mut global_state = scenario.initial.clone();
    let mut ctx = StepContext::new(config.dt, config.weights, config.physics);
    let opts = LtsOptions::new(1);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        lts_state = fblts_step(&scenario.mesh, &lts_state, labels, &mut ctx, &opts, RhsMode::Unsplit)
            .unwrap()
            .state;
        global_state = fbrk32_step(&scenario.mesh, &global_state, &mut ctx, RhsMode::Unsplit).unwrap();
        worst = worst.max(max_rel_diff(&lts_state.h, &global_state.h));
        worst = worst.max(max_rel_diff(&lts_state.u, &global_state.u));
    }
    assert!(
        worst <= TOL,
        "criterion 1 (m = 1 reduction): FAIL - max relative difference {worst:.3e} > {TOL:.0e}"
    );
    println!("criterion 1 (m = 1 reduction): PASS - max relative difference {worst:.3e} <= {TOL:.0e}");
}

/// Criterion 2: total mass drifts by at most 1e-12 relative over 200 coarse
/// steps with m = 4, a Gaussian bump, and rotation on.
#[test]
fn criterion_2_mass_conservation() {
    const TOL: f64 = 1.0e-12;
    let mut config = nonlinear_rotating_config();
    config.m = 4;
    config.splitting = true;
    let report = conservation_driver(&config, 200).unwrap();
    assert!(
        report.mass_drift <= TOL,
        "criterion 2 (mass conservation): FAIL - relative drift {:.3e} > {TOL:.0e}",
        report.mass_drift
    );
    println!(
        "criterion 2 (mass conservation): PASS - relative drift {:.3e} <= {TOL:.0e} over {} steps",
        report.mass_drift, report.steps
    );
}

/// Criterion 3: the prognostic absolute-vorticity companion drifts by at
/// most 1e-12 relative over the same 200-step run.
#[test]
fn criterion_3_absolute_vorticity_conservation() {
    const TOL: f64 = 1.0e-12;
    let mut config = nonlinear_rotating_config();
    config.m = 4;
    config.splitting = true;
    let report = conservation_driver(&config, 200).unwrap();
    assert!(
        report.vorticity_drift <= TOL,
        "criterion 3 (absolute vorticity conservation): FAIL - relative drift {:.3e} > {TOL:.0e}",
        report.vorticity_drift
    );
    println!(
        "criterion 3 (absolute vorticity conservation): PASS - relative drift {:.3e} <= {TOL:.0e} \
         (PV volume drift {:.3e})",
        report.vorticity_drift, report.pv_volume_drift
    );
}

/// Criterion 4: second-order temporal convergence of the multirate scheme
/// (m = 4) on the gravity-wave scenario, measured globally and restricted to
/// interface-one cells/edges, with the observed order of the finest pair in
/// [1.8, 2.2].
#[test]
fn criterion_4_temporal_order() {
    const ORDER_LO: f64 = 1.8;
    const ORDER_HI: f64 = 2.2;
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
    let report = convergence_driver(&config, &[16.0, 8.0, 4.0, 2.0], 0.2).unwrap();
    let finest = report.rows.last().unwrap();
    assert_eq!(finest.status, "ok", "finest run unstable");
    let orders = [
        ("h", finest.order_h),
        ("u", finest.order_u),
        ("h|IF1", finest.order_h_if1),
        ("u|IF1", finest.order_u_if1),
    ];
    let mut shown = Vec::new();
    for (name, order) in orders {
        let order = order.unwrap_or(f64::NAN);
        assert!(
            (ORDER_LO..=ORDER_HI).contains(&order),
            "criterion 4 (temporal order): FAIL - {name} order {order:.3} outside [{ORDER_LO}, {ORDER_HI}]\n{}",
            report.to_csv()
        );
        shown.push(format!("{name}: {order:.3}"));
    }
    println!(
        "criterion 4 (temporal order): PASS - finest-pair orders {} all in [{ORDER_LO}, {ORDER_HI}]",
        shown.join(", ")
    );
}

/// Criterion 5: the interface predictions are second-order accurate: their
/// worst gap against directly computed fine-step stage data shrinks by a
/// factor in [3.4, 4.6] when the coarse step halves.
#[test]
fn criterion_5_prediction_second_order() {
    const FACTOR_LO: f64 = 3.4;
    const FACTOR_HI: f64 = 4.6;
    let mesh = build_periodic_hex_mesh(24, 12, 1000.0).unwrap();
    let mask: Vec<bool> = (0..mesh.n_cells).map(|i| i % 24 < 9).collect();
    let labels = label_regions(&mesh, &mask, 2).unwrap();
    let cfg = PhysicsConfig::gravity_wave(9.80665);
    let weights = FbWeights::default();
    let m = 4usize;

    // A smooth moving state: bump plus a short spinup.
    let cx = mesh.lattice_a[0] * 0.5;
    let cy = mesh.lattice_b[1] * 0.5;
    let h: Vec<f64> = (0..mesh.n_cells)
        .map(|i| {
            let r = mesh.distance([mesh.x_cell[i], mesh.y_cell[i]], [cx, cy]);
            100.0 + (-(r / 4000.0) * (r / 4000.0)).exp()
        })
        .collect();
    let mut state = State::new(&mesh, h, vec![0.0; mesh.n_edges], 0.0).unwrap();
    let mut spin = StepContext::new(2.0, weights, cfg);
    for _ in 0..10 {
        state = fbrk32_step(&mesh, &state, &mut spin, RhsMode::Unsplit).unwrap();
    }

    // Worst prediction gap on interface one at one coarse step size.
    let gap = |dt: f64| -> f64 {
        let mut ctx = StepContext::new(dt, weights, cfg);
        let opts = LtsOptions::new(m);
        let cache = coarse_advance(&mesh, &state, &labels, &mut ctx, &opts, RhsMode::Unsplit).unwrap();

        // Direct fine-step reference: the global scheme at dt/m.
        let mut fine_ctx = StepContext::new(dt / m as f64, weights, cfg);
        let mut fine_state = state.clone();
        let mut worst = 0.0f64;
        for k in 0..m {
            let pred = predict_interface(&cache, &labels, k, m, weights).unwrap();
            let stages = fbrk32_step_stages(&mesh, &fine_state, &mut fine_ctx, RhsMode::Unsplit).unwrap();
            for (slot, &i) in labels.if1_cells.iter().enumerate() {
                worst = worst.max((pred.h_base[slot] - fine_state.h[i]).abs());
                worst = worst.max((pred.h_s1[slot] - stages.h_bar1[i]).abs());
                worst = worst.max((pred.h_s2[slot] - stages.h_bar2[i]).abs());
            }
            for (slot, &e) in labels.if1_edges.iter().enumerate() {
                worst = worst.max((pred.u_base[slot] - fine_state.u[e]).abs());
                worst = worst.max((pred.u_s1[slot] - stages.u_bar1[e]).abs());
                worst = worst.max((pred.u_s2[slot] - stages.u_bar2[e]).abs());
            }
            fine_state = State {
                h: stages.h_new,
                u: stages.u_new,
                t: fine_state.t + fine_ctx.dt,
            };
        }
        worst
    };

    let g1 = gap(8.0);
    let g2 = gap(4.0);
    assert!(g1 > 0.0 && g2 > 0.0, "prediction gaps vanished: {g1} {g2}");
    let factor = g1 / g2;
    assert!(
        (FACTOR_LO..=FACTOR_HI).contains(&factor),
        "criterion 5 (prediction order): FAIL - gap shrink factor {factor:.3} outside \
         [{FACTOR_LO}, {FACTOR_HI}] (gaps {g1:.3e} -> {g2:.3e})"
    );
    println!(
        "criterion 5 (prediction order): PASS - halving dt shrinks the worst gap by {factor:.3} \
         ({g1:.3e} -> {g2:.3e})"
    );
}

/// Criterion 6: flux-mapping antisymmetry at 1e-14, dual-divergence
/// consistency at 1e-12 over 20 random flux fields, and the discrete
/// divergence theorem at 1e-13 for random states.
#[test]
fn criterion_6_operator_correctness() {
    const ANTISYM_TOL: f64 = 1.0e-14;
    const CONSISTENCY_TOL: f64 = 1.0e-12;
    const DIVERGENCE_TOL: f64 = 1.0e-13;

    let mesh = build_periodic_hex_mesh(8, 8, 1000.0).unwrap();

    // (a) antisymmetry of l_{e'} w(e,e').
    let mut antisym = 0.0f64;
    for e in 0..mesh.n_edges {
        for (slot, &ep) in mesh.edges_on_edge[e].iter().enumerate() {
            let back = mesh.edges_on_edge[ep].iter().position(|&x| x == e).unwrap();
            antisym = antisym.max(
                (mesh.l_edge[ep] * mesh.perp_weights[e][slot]
                    + mesh.l_edge[e] * mesh.perp_weights[ep][back])
                    .abs(),
            );
        }
    }
    assert!(
        antisym <= ANTISYM_TOL,
        "criterion 6: FAIL - antisymmetry residual {antisym:.3e} > {ANTISYM_TOL:.0e}"
    );

    // (b) uniform-PV consistency over 20 random flux fields.
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    let mut consistency = 0.0f64;
    for _ in 0..20 {
        let flux: Vec<f64> = (0..mesh.n_edges).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let scale = max_abs(&flux);
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
            // Normalize against the flux scale over the cell spacing.
            consistency = consistency.max((dual - avg).abs() / (scale / 1000.0));
        }
    }
    assert!(
        consistency <= CONSISTENCY_TOL,
        "criterion 6: FAIL - consistency residual {consistency:.3e} > {CONSISTENCY_TOL:.0e}"
    );

    // (c) discrete divergence theorem for random (u, h).
    let mut divergence = 0.0f64;
    for _ in 0..20 {
        let h: Vec<f64> = (0..mesh.n_cells).map(|_| rng.gen_range(50.0..150.0)).collect();
        let u: Vec<f64> = (0..mesh.n_edges).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let dh = thickness_tendency(&mesh, &u, &h);
        let total: f64 = (0..mesh.n_cells).map(|i| mesh.area_cell[i] * dh[i]).sum();
        let scale: f64 = (0..mesh.n_cells)
            .map(|i| (mesh.area_cell[i] * dh[i]).abs())
            .sum::<f64>()
            .max(1e-30);
        divergence = divergence.max(total.abs() / scale);
    }
    assert!(
        divergence <= DIVERGENCE_TOL,
        "criterion 6: FAIL - divergence-theorem residual {divergence:.3e} > {DIVERGENCE_TOL:.0e}"
    );

    println!(
        "criterion 6 (operator correctness): PASS - antisymmetry {antisym:.3e} <= {ANTISYM_TOL:.0e}, \
         consistency {consistency:.3e} <= {CONSISTENCY_TOL:.0e}, \
         divergence {divergence:.3e} <= {DIVERGENCE_TOL:.0e}"
    );
}

/// Criterion 7: splitting fidelity. Over one simulated hour of the
/// drag-enabled gravity wave, the split and unsplit surface heights agree to
/// 1% of the bump amplitude in RMS; with the slow physics disabled the two
/// modes are identical.
#[test]
fn criterion_7_splitting_fidelity() {
    const RMS_FRACTION: f64 = 0.01;
    let amplitude = 1.0;
    let mut config = ScenarioConfig {
        mesh: MeshSpec::Generate {
            nx: 32,
            ny: 32,
            dc: 1000.0,
        },
        initial: InitialCondition {
            background_h: 100.0,
            amplitude,
            width: 3000.0,
            center: [0.5, 0.5],
        },
        physics: PhysicsConfig {
            g: 9.80665,
            rotation_on: false,
            advection_on: false,
            drag_coefficient: 2.5e-3,
            wind_coefficient: 0.0,
            wind_velocity: [0.0, 0.0],
        },
        scheme: Scheme::Fbrk32,
        dt: 10.0,
        t_end: 3600.0,
        ..ScenarioConfig::default()
    };

    let scenario = Scenario::build(config.clone()).unwrap();
    let mut plan = RunPlan::from_config(&config);
    plan.collect_record = false;
    plan.splitting = true;
    let split = fblts::harness::execute(&scenario, &plan).unwrap();
    plan.splitting = false;
    let unsplit = fblts::harness::execute(&scenario, &plan).unwrap();
    let rms = rms_error(&split.state.h, &unsplit.state.h).unwrap();
    assert!(
        rms <= RMS_FRACTION * amplitude,
        "criterion 7 (splitting fidelity): FAIL - RMS(h_split - h_unsplit) = {rms:.3e} m \
         > {RMS_FRACTION} * amplitude"
    );

    // With slow physics off, split and unsplit are the same computation.
    config.physics.drag_coefficient = 0.0;
    config.t_end = 600.0;
    let scenario = Scenario::build(config.clone()).unwrap();
    let mut plan = RunPlan::from_config(&config);
    plan.collect_record = false;
    plan.splitting = true;
    let split0 = fblts::harness::execute(&scenario, &plan).unwrap();
    plan.splitting = false;
    let unsplit0 = fblts::harness::execute(&scenario, &plan).unwrap();
    assert_eq!(
        split0.state.h, unsplit0.state.h,
        "criterion 7: FAIL - slow-free split and unsplit thickness differ"
    );
    assert_eq!(split0.state.u, unsplit0.state.u);

    println!(
        "criterion 7 (splitting fidelity): PASS - RMS difference {rms:.3e} m <= {:.3e} m after \
         one simulated hour; slow-free runs identical",
        RMS_FRACTION * amplitude
    );
}

/// Criterion 8: work accounting. Measured fast-tendency counts equal the
/// closed-form model exactly, and on a mesh with ~10% fine cells and m = 4
/// the multirate step does at least 2.5x fewer fast cell evaluations per
/// coarse interval than the global scheme at the fine step. Wall-time
/// speedup is reported without a gate.
#[test]
fn criterion_8_work_accounting() {
    const MIN_RATIO: f64 = 2.5;
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
        physics: PhysicsConfig::gravity_wave(9.80665),
        scheme: Scheme::Fblts,
        dt: 2.0,
        m: 4,
        fine_mask: Some(FineMaskSpec::Disk {
            cx: 0.5,
            cy: 0.5,
            radius: 10600.0,
        }),
        t_end: 80.0,
        ..ScenarioConfig::default()
    };

    // Check the fine fraction is near 10%.
    let scenario = Scenario::build(config.clone()).unwrap();
    let labels = scenario.labels.as_ref().unwrap();
    let fine_fraction = labels.fine_cells.len() as f64 / scenario.mesh.n_cells as f64;
    assert!(
        (0.08..=0.12).contains(&fine_fraction),
        "fine fraction {fine_fraction:.3} not near 10%"
    );

    let report = perf_driver(&config).unwrap();
    let fblts_row = report.row("fblts").unwrap();
    let fbrk32_row = report.row("fbrk32").unwrap();
    let rk4_row = report.row("rk4").unwrap();

    // Integer equality of measured and predicted counters.
    assert_eq!(
        Some(fblts_row.fast_cell_evals),
        fblts_row.predicted_fast_cell_evals,
        "criterion 8: FAIL - measured fast cell evals differ from the closed-form model"
    );
    assert_eq!(
        Some(fblts_row.fast_edge_evals),
        fblts_row.predicted_fast_edge_evals,
        "criterion 8: FAIL - measured fast edge evals differ from the closed-form model"
    );

    // Per coarse interval: the global scheme at the fine step does
    // 3 * m * nCells fast cell evaluations.
    let n_cells = scenario.mesh.n_cells as u64;
    let global_per_interval = 3 * config.m as u64 * n_cells;
    let (fblts_per_interval, _) = predicted_fast_evals(labels, config.m, config.wide_halo);
    let ratio = global_per_interval as f64 / fblts_per_interval as f64;
    assert!(
        ratio >= MIN_RATIO,
        "criterion 8 (work accounting): FAIL - fast cell-eval ratio {ratio:.3} < {MIN_RATIO}"
    );

    println!(
        "criterion 8 (work accounting): PASS - counters match the closed-form model exactly; \
         fast cell-eval ratio {ratio:.3} >= {MIN_RATIO} ({global_per_interval} vs \
         {fblts_per_interval} per coarse interval); wall speedup vs rk4 {:.2}, vs fbrk32 {:.2} \
         (informational)",
        fblts_row.speedup_vs_rk4.unwrap_or(f64::NAN),
        fblts_row.speedup_vs_fbrk32.unwrap_or(f64::NAN),
    );
    let _ = (fbrk32_row, rk4_row);
}

/// Criterion 9: the CFL scan finds the forward-backward weights admit at
/// least as large a step as the zero-weight base scheme; the ratio is
/// reported against the published 1.6-2.2 range as information only, and the
/// bisection is reproducible at its 1% width.
#[test]
fn criterion_9_cfl_behavior() {
    let config = ScenarioConfig {
        mesh: MeshSpec::Generate {
            nx: 12,
            ny: 12,
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
        t_end: 100.0,
        ..ScenarioConfig::default()
    };

    let report = cfl_scan(&config, &[CflScheme::Rk32, CflScheme::Fbrk32]).unwrap();
    let rk32 = report.row("rk32").unwrap().max_dt;
    let fbrk32 = report.row("fbrk32").unwrap().max_dt;
    assert!(
        fbrk32 >= rk32,
        "criterion 9 (CFL behavior): FAIL - optimized weights admit {fbrk32:.3} s < base {rk32:.3} s"
    );

    // Reproducibility at the bisection width.
    let again = cfl_scan(&config, &[CflScheme::Fbrk32]).unwrap();
    let fbrk32_again = again.row("fbrk32").unwrap().max_dt;
    let rel = (fbrk32 - fbrk32_again).abs() / fbrk32;
    assert!(
        rel <= 0.01,
        "criterion 9: FAIL - repeated scan moved by {rel:.3e} (> 1%)"
    );

    let ratio = fbrk32 / rk32;
    println!(
        "criterion 9 (CFL behavior): PASS - max stable dt {fbrk32:.3} s (optimized) vs \
         {rk32:.3} s (zero weights); ratio {ratio:.2} (published range 1.6-2.2, informational); \
         scan reproducible to 1%"
    );
}

/// Sanity rider for the suite: the conservation run used by criteria 2-3 is
/// exercised end to end through the public driver (mass and vorticity totals
/// of the initial state are the documented desk-scale values).
#[test]
fn acceptance_setup_sanity() {
    let config = nonlinear_rotating_config();
    let scenario = Scenario::build(config).unwrap();
    let mesh = &scenario.mesh;
    let mass = total_mass(mesh, &scenario.initial.h);
    assert!(mass > 0.0);
    let eta = vec![1.0e-4; mesh.n_vertices];
    let vort = total_absolute_vorticity(mesh, &eta);
    assert!((vort - 1.0e-4 * mesh.total_dual_area()).abs() < 1e-9);
    // Edge thickness of the initial bump stays positive everywhere.
    for e in 0..mesh.n_edges {
        assert!(edge_thickness_at(mesh, &scenario.initial.h, e) > 0.0);
    }
}
