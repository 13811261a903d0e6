//! The study drivers: temporal convergence, CFL bisection, work/wall-time
//! comparison, and conservation soak.

use std::path::Path;
use std::time::Instant;

use crate::diagnostics::{rms_error, speedup, total_absolute_vorticity, total_mass, total_pv_volume};
use crate::error::Error;
use crate::lts::{fblts_step, predicted_fast_evals, LtsOptions};
use crate::operators::vorticity_fields;
use crate::splitting::freeze_slow;
use crate::steppers::{fbrk32_step, rk4_step, FbWeights, RhsMode, StepContext};
use crate::Result;

use super::{execute, RunPlan, Scenario, ScenarioConfig, Scheme};

// ---------------------------------------------------------------------------
// Temporal convergence
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub dt: f64,
    pub status: String,
    pub rms_h: Option<f64>,
    pub rms_u: Option<f64>,
    pub rms_h_if1: Option<f64>,
    pub rms_u_if1: Option<f64>,
    /// Observed orders against the previous (2x coarser) row.
    pub order_h: Option<f64>,
    pub order_u: Option<f64>,
    pub order_h_if1: Option<f64>,
    pub order_u_if1: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub reference_dt: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "dt,status,rms_h,rms_u,rms_h_if1,rms_u_if1,order_h,order_u,order_h_if1,order_u_if1\n",
        );
        let fmt = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v:.9e}"));
        for r in &self.rows {
            s.push_str(&format!(
                "{:.9e},{},{},{},{},{},{},{},{},{}\n",
                r.dt,
                r.status,
                fmt(r.rms_h),
                fmt(r.rms_u),
                fmt(r.rms_h_if1),
                fmt(r.rms_u_if1),
                fmt(r.order_h),
                fmt(r.order_u),
                fmt(r.order_h_if1),
                fmt(r.order_u_if1),
            ));
        }
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path.display().to_string(), e))
    }
}

fn masked(values: &[f64], idx: &[usize]) -> Vec<f64> {
    idx.iter().map(|&i| values[i]).collect()
}

/// Run the multirate scheme at each coarse step size against an RK4
/// reference at `reference_dt`, reporting RMS errors on thickness and
/// velocity (globally and restricted to interface-one cells/edges) and the
/// observed orders between successive halvings.
pub fn convergence_driver(
    config: &ScenarioConfig,
    dt_list: &[f64],
    reference_dt: f64,
) -> Result<ConvergenceReport> {
    if dt_list.is_empty() {
        return Err(Error::Config("convergence study needs at least one dt".into()));
    }
    let dt_min = dt_list.iter().cloned().fold(f64::INFINITY, f64::min);
    if reference_dt > dt_min / 8.0 {
        return Err(Error::Config(format!(
            "reference dt {reference_dt} must be at most min(dt)/8 = {}",
            dt_min / 8.0
        )));
    }
    let mut config = config.clone();
    config.scheme = Scheme::Fblts;
    if config.fine_mask.is_none() {
        return Err(Error::Config("convergence study needs a fine_mask".into()));
    }
    config.validate()?;
    let scenario = Scenario::build(config.clone())?;
    let labels = scenario.labels.as_ref().unwrap();

    // Reference solution.
    let mut ref_plan = RunPlan::from_config(&config);
    ref_plan.scheme = Scheme::Rk4;
    ref_plan.dt = reference_dt;
    ref_plan.track_vorticity = false;
    ref_plan.collect_record = false;
    let reference = execute(&scenario, &ref_plan)?;

    let mut dts = dt_list.to_vec();
    dts.sort_by(|a, b| b.partial_cmp(a).unwrap());

    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &dt in &dts {
        let mut plan = RunPlan::from_config(&config);
        plan.dt = dt;
        plan.track_vorticity = false;
        plan.collect_record = false;
        let row = match execute(&scenario, &plan) {
            Ok(out) => {
                let rms_h = rms_error(&out.state.h, &reference.state.h)?;
                let rms_u = rms_error(&out.state.u, &reference.state.u)?;
                let rms_h_if1 = rms_error(
                    &masked(&out.state.h, &labels.if1_cells),
                    &masked(&reference.state.h, &labels.if1_cells),
                )?;
                let rms_u_if1 = rms_error(
                    &masked(&out.state.u, &labels.if1_edges),
                    &masked(&reference.state.u, &labels.if1_edges),
                )?;
                ConvergenceRow {
                    dt,
                    status: "ok".into(),
                    rms_h: Some(rms_h),
                    rms_u: Some(rms_u),
                    rms_h_if1: Some(rms_h_if1),
                    rms_u_if1: Some(rms_u_if1),
                    order_h: None,
                    order_u: None,
                    order_h_if1: None,
                    order_u_if1: None,
                }
            }
            Err(err) => ConvergenceRow {
                dt,
                status: format!("unstable: {err}"),
                rms_h: None,
                rms_u: None,
                rms_h_if1: None,
                rms_u_if1: None,
                order_h: None,
                order_u: None,
                order_h_if1: None,
                order_u_if1: None,
            },
        };
        rows.push(row);
    }

    // Observed orders between consecutive rows with a 2x step ratio.
    for i in 1..rows.len() {
        let (coarse, fine) = rows.split_at_mut(i);
        let prev = &coarse[i - 1];
        let cur = &mut fine[0];
        if (prev.dt / cur.dt - 2.0).abs() > 1e-9 {
            continue;
        }
        let order = |a: Option<f64>, b: Option<f64>| -> Option<f64> {
            match (a, b) {
                (Some(a), Some(b)) if a > 0.0 && b > 0.0 => Some((a / b).log2()),
                _ => None,
            }
        };
        cur.order_h = order(prev.rms_h, cur.rms_h);
        cur.order_u = order(prev.rms_u, cur.rms_u);
        cur.order_h_if1 = order(prev.rms_h_if1, cur.rms_h_if1);
        cur.order_u_if1 = order(prev.rms_u_if1, cur.rms_u_if1);
    }

    Ok(ConvergenceReport {
        reference_dt,
        rows,
    })
}

// ---------------------------------------------------------------------------
// CFL bisection scan
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CflScheme {
    Rk4,
    /// FB-RK(3,2) with zero weights: the underlying RK(3,2).
    Rk32,
    Fbrk32,
    /// Multirate with the given subcycling factor; the scanned step is the
    /// fine step and the coarse step is m times it.
    Fblts { m: usize },
}

impl CflScheme {
    pub fn label(self) -> String {
        match self {
            CflScheme::Rk4 => "rk4".into(),
            CflScheme::Rk32 => "rk32".into(),
            CflScheme::Fbrk32 => "fbrk32".into(),
            CflScheme::Fblts { m } => format!("fblts-m{m}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CflRow {
    pub label: String,
    /// Largest stable step found (the fine step for the multirate scheme).
    pub max_dt: f64,
    /// Coarse step at the frontier (equals max_dt for global schemes).
    pub coarse_dt: f64,
    pub m: usize,
    pub trials: usize,
}

#[derive(Debug, Clone)]
pub struct CflReport {
    pub test_steps: usize,
    pub rows: Vec<CflRow>,
}

impl CflReport {
    pub fn row(&self, label: &str) -> Option<&CflRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("scheme,max_dt,coarse_dt,m,trials\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{:.9e},{:.9e},{},{}\n",
                r.label, r.max_dt, r.coarse_dt, r.m, r.trials
            ));
        }
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path.display().to_string(), e))
    }
}

/// Number of coarse steps each stability trial runs.
pub const CFL_TEST_STEPS: usize = 200;

/// Velocity growth factor beyond which a trial counts as unstable.
const GROWTH_LIMIT: f64 = 10.0;

fn max_abs(u: &[f64]) -> f64 {
    u.iter().fold(0.0f64, |a, &b| a.max(b.abs()))
}

/// Run one stability trial: `n_steps` steps at the candidate step size.
/// Unstable means a positivity abort, a non-finite velocity, or the maximum
/// speed exceeding ten times its early-run reference.
fn stable_trial(scenario: &Scenario, scheme: CflScheme, dt: f64, n_steps: usize) -> Result<bool> {
    let config = &scenario.config;
    let mesh = &scenario.mesh;
    let weights = match scheme {
        CflScheme::Rk32 => FbWeights::zero(),
        _ => config.weights,
    };
    let mut ctx = StepContext::new(dt, weights, config.physics);
    let mut state = scenario.initial.clone();
    let mut u_ref = 0.0f64;

    for step in 1..=n_steps {
        let slow_cache = if config.splitting {
            match freeze_slow(mesh, &config.physics, &state, &mut ctx.counters) {
                Ok(c) => Some(c),
                Err(_) => return Ok(false),
            }
        } else {
            None
        };
        let mode = match &slow_cache {
            Some(c) => RhsMode::Split(&c.du),
            None => RhsMode::Unsplit,
        };
        let stepped = match scheme {
            CflScheme::Rk4 => rk4_step(mesh, &state, &mut ctx, mode),
            CflScheme::Rk32 | CflScheme::Fbrk32 => fbrk32_step(mesh, &state, &mut ctx, mode),
            CflScheme::Fblts { m } => {
                ctx.dt = dt * m as f64;
                let labels = scenario
                    .labels
                    .as_ref()
                    .ok_or_else(|| Error::Config("multirate scan needs a fine_mask".into()))?;
                let opts = LtsOptions::new(m);
                fblts_step(mesh, &state, labels, &mut ctx, &opts, mode).map(|o| o.state)
            }
        };
        state = match stepped {
            Ok(s) => s,
            Err(Error::NonPositiveThickness { .. }) => return Ok(false),
            Err(other) => return Err(other),
        };
        let umax = max_abs(&state.u);
        if !umax.is_finite() {
            return Ok(false);
        }
        if step <= 10 {
            u_ref = u_ref.max(umax);
        } else if u_ref > 0.0 && umax > GROWTH_LIMIT * u_ref {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Bisect the largest stable step size for each scheme to 1% relative width.
/// For the multirate entries the scanned step is the fine step, mirroring
/// the fine-region-first selection policy.
pub fn cfl_scan(config: &ScenarioConfig, schemes: &[CflScheme]) -> Result<CflReport> {
    let scenario = Scenario::build(config.clone())?;
    let mut rows = Vec::new();

    for &scheme in schemes {
        let mut trials = 0usize;
        let mut trial = |dt: f64| -> Result<bool> {
            trials += 1;
            stable_trial(&scenario, scheme, dt, CFL_TEST_STEPS)
        };

        // Find a stable lower bound starting from the configured step.
        let mut lo = config.dt;
        let mut attempts = 0;
        while !trial(lo)? {
            lo /= 2.0;
            attempts += 1;
            if attempts > 40 {
                return Err(Error::Config(format!(
                    "no stable step found for {} down to dt = {lo}",
                    scheme.label()
                )));
            }
        }
        // Find an unstable upper bound.
        let mut hi = 2.0 * lo;
        attempts = 0;
        while trial(hi)? {
            lo = hi;
            hi *= 2.0;
            attempts += 1;
            if attempts > 40 {
                return Err(Error::Config(format!(
                    "no unstable step found for {} up to dt = {hi}",
                    scheme.label()
                )));
            }
        }
        // Bisect to 1% relative width.
        while (hi - lo) / lo > 0.01 {
            let mid = 0.5 * (lo + hi);
            if trial(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }

        let m = match scheme {
            CflScheme::Fblts { m } => m,
            _ => 1,
        };
        rows.push(CflRow {
            label: scheme.label(),
            max_dt: lo,
            coarse_dt: lo * m as f64,
            m,
            trials,
        });
    }

    Ok(CflReport {
        test_steps: CFL_TEST_STEPS,
        rows,
    })
}

// ---------------------------------------------------------------------------
// Work and wall-time comparison
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct PerfRow {
    pub label: String,
    pub dt: f64,
    pub steps: usize,
    pub wall_seconds: f64,
    pub fast_cell_evals: u64,
    pub fast_edge_evals: u64,
    pub slow_cell_evals: u64,
    pub slow_edge_evals: u64,
    /// Closed-form prediction for the fast counters (multirate rows only).
    pub predicted_fast_cell_evals: Option<u64>,
    pub predicted_fast_edge_evals: Option<u64>,
    pub speedup_vs_rk4: Option<f64>,
    pub speedup_vs_fbrk32: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct PerfReport {
    pub rows: Vec<PerfRow>,
}

impl PerfReport {
    pub fn row(&self, label: &str) -> Option<&PerfRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "scheme,dt,steps,wall_seconds,fast_cell_evals,fast_edge_evals,\
             slow_cell_evals,slow_edge_evals,predicted_fast_cell_evals,\
             predicted_fast_edge_evals,speedup_vs_rk4,speedup_vs_fbrk32\n",
        );
        let fmt_u = |x: Option<u64>| x.map_or(String::new(), |v| v.to_string());
        let fmt_f = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v:.4}"));
        for r in &self.rows {
            s.push_str(&format!(
                "{},{:.9e},{},{:.6e},{},{},{},{},{},{},{},{}\n",
                r.label,
                r.dt,
                r.steps,
                r.wall_seconds,
                r.fast_cell_evals,
                r.fast_edge_evals,
                r.slow_cell_evals,
                r.slow_edge_evals,
                fmt_u(r.predicted_fast_cell_evals),
                fmt_u(r.predicted_fast_edge_evals),
                fmt_f(r.speedup_vs_rk4),
                fmt_f(r.speedup_vs_fbrk32),
            ));
        }
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path.display().to_string(), e))
    }
}

/// Run RK4 and FB-RK(3,2) at the fine step and the multirate scheme at the
/// coarse step (m times the fine step) over the same simulated duration,
/// comparing wall time and tendency-evaluation counts. The multirate fast
/// counters must match the closed-form model exactly.
pub fn perf_driver(config: &ScenarioConfig) -> Result<PerfReport> {
    let mut config = config.clone();
    if config.fine_mask.is_none() {
        return Err(Error::Config("perf comparison needs a fine_mask".into()));
    }
    config.scheme = Scheme::Fblts;
    config.validate()?;
    let scenario = Scenario::build(config.clone())?;
    let labels = scenario.labels.as_ref().unwrap();

    let fine_dt = config.dt;
    let coarse_dt = fine_dt * config.m as f64;
    let runs = [
        ("rk4", Scheme::Rk4, fine_dt, 1usize),
        ("fbrk32", Scheme::Fbrk32, fine_dt, 1),
        ("fblts", Scheme::Fblts, coarse_dt, config.m),
    ];

    let mut rows = Vec::new();
    for (label, scheme, dt, m) in runs {
        let mut plan = RunPlan::from_config(&config);
        plan.scheme = scheme;
        plan.dt = dt;
        plan.m = m;
        plan.track_vorticity = false;
        plan.collect_record = false;
        let start = Instant::now();
        let out = execute(&scenario, &plan)?;
        let wall = start.elapsed().as_secs_f64();
        let steps = (config.t_end / dt).round() as usize;
        let (pred_c, pred_e) = if scheme == Scheme::Fblts {
            let (c, e) = predicted_fast_evals(labels, m, config.wide_halo);
            (Some(c * steps as u64), Some(e * steps as u64))
        } else {
            (None, None)
        };
        rows.push(PerfRow {
            label: label.into(),
            dt,
            steps,
            wall_seconds: wall,
            fast_cell_evals: out.counters.fast_cell_evals,
            fast_edge_evals: out.counters.fast_edge_evals,
            slow_cell_evals: out.counters.slow_cell_evals,
            slow_edge_evals: out.counters.slow_edge_evals,
            predicted_fast_cell_evals: pred_c,
            predicted_fast_edge_evals: pred_e,
            speedup_vs_rk4: None,
            speedup_vs_fbrk32: None,
        });
    }

    let rk4_wall = rows[0].wall_seconds;
    let fbrk32_wall = rows[1].wall_seconds;
    for row in rows.iter_mut() {
        row.speedup_vs_rk4 = speedup(rk4_wall, row.wall_seconds).ok();
        row.speedup_vs_fbrk32 = speedup(fbrk32_wall, row.wall_seconds).ok();
    }

    Ok(PerfReport { rows })
}

// ---------------------------------------------------------------------------
// Conservation soak
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ConservationReport {
    pub steps: usize,
    pub mass_initial: f64,
    pub mass_drift: f64,
    pub vorticity_initial: f64,
    pub vorticity_drift: f64,
    pub pv_volume_initial: f64,
    pub pv_volume_drift: f64,
}

impl ConservationReport {
    pub fn to_csv(&self) -> String {
        format!(
            "quantity,initial,max_relative_drift\n\
             mass,{:.17e},{:.9e}\n\
             absolute_vorticity,{:.17e},{:.9e}\n\
             pv_volume,{:.17e},{:.9e}\n",
            self.mass_initial,
            self.mass_drift,
            self.vorticity_initial,
            self.vorticity_drift,
            self.pv_volume_initial,
            self.pv_volume_drift,
        )
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path.display().to_string(), e))
    }
}

/// Run `n_steps` coarse steps and report the worst relative drift of total
/// mass, prognostic absolute vorticity, and the PV volume integral.
pub fn conservation_driver(config: &ScenarioConfig, n_steps: usize) -> Result<ConservationReport> {
    let mut config = config.clone();
    config.t_end = config.dt * n_steps as f64;
    config.track_vorticity = true;
    config.validate()?;
    let scenario = Scenario::build(config.clone())?;

    let initial = &scenario.initial;
    let mass0 = total_mass(&scenario.mesh, &initial.h);
    let eta0 = vorticity_fields(&scenario.mesh, &config.physics, &initial.u, &initial.h)?.eta;
    let vort0 = total_absolute_vorticity(&scenario.mesh, &eta0);
    let pv0 = total_pv_volume(&scenario.mesh, &initial.h, &eta0)?.via_q;

    let plan = RunPlan::from_config(&config);
    let out = execute(&scenario, &plan)?;

    let rel = |current: f64, base: f64| -> f64 {
        (current - base).abs() / base.abs().max(f64::MIN_POSITIVE)
    };
    let mut mass_drift = 0.0f64;
    let mut vort_drift = 0.0f64;
    let mut pv_drift = 0.0f64;
    for row in &out.record.rows {
        mass_drift = mass_drift.max(rel(row.mass, mass0));
        vort_drift = vort_drift.max(rel(row.abs_vorticity, vort0));
        pv_drift = pv_drift.max(rel(row.pv_volume, pv0));
    }

    Ok(ConservationReport {
        steps: n_steps,
        mass_initial: mass0,
        mass_drift,
        vorticity_initial: vort0,
        vorticity_drift: vort_drift,
        pv_volume_initial: pv0,
        pv_volume_drift: pv_drift,
    })
}
