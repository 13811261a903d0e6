//! Scenario configuration and the run loop behind the CLI drivers: build a
//! mesh, lay down a Gaussian surface bump, step the chosen scheme to the end
//! time, and collect the diagnostics record.

mod drivers;

pub use drivers::{
    cfl_scan, conservation_driver, convergence_driver, perf_driver, CflReport, CflRow,
    CflScheme, ConservationReport, ConvergenceReport, ConvergenceRow, PerfReport, PerfRow,
};

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{total_mass, total_pv_volume, RunRecord, RunRow};
use crate::error::Error;
use crate::lts::{fblts_step, label_regions, LtsLabels, LtsOptions, VorticityFluxRecord};
use crate::mesh::{build_periodic_hex_mesh, Mesh};
use crate::operators::{pv_flux_field, vorticity_fields, PhysicsConfig, State, WorkCounters};
use crate::splitting::freeze_slow;
use crate::steppers::{
    courant_number, fbrk32_step_stages, rk4_step, FbWeights, RhsMode, StepContext,
};
use crate::Result;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshSpec {
    Generate { nx: usize, ny: usize, dc: f64 },
    Load { path: String },
}

impl Default for MeshSpec {
    fn default() -> Self {
        MeshSpec::Generate {
            nx: 16,
            ny: 16,
            dc: 1000.0,
        }
    }
}

/// Gaussian bump initial condition: h = H + A exp(-(r/width)^2), u = 0.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct InitialCondition {
    pub background_h: f64,
    pub amplitude: f64,
    pub width: f64,
    /// Bump center as fractions of the two domain lattice vectors.
    pub center: [f64; 2],
}

impl Default for InitialCondition {
    fn default() -> Self {
        InitialCondition {
            background_h: 100.0,
            amplitude: 1.0,
            width: 3000.0,
            center: [0.5, 0.5],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Rk4,
    Fbrk32,
    Fblts,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FineMaskSpec {
    /// Cells whose wrapped x coordinate lies in [lo, hi) fractions of the
    /// domain width.
    Xband { lo: f64, hi: f64 },
    /// Cells within `radius` meters of a center given in domain fractions.
    Disk { cx: f64, cy: f64, radius: f64 },
    /// Explicit cell list.
    Cells { cells: Vec<usize> },
}

impl FineMaskSpec {
    pub fn resolve(&self, mesh: &Mesh) -> Result<Vec<bool>> {
        let mut mask = vec![false; mesh.n_cells];
        match self {
            FineMaskSpec::Xband { lo, hi } => {
                let width = mesh.lattice_a[0];
                for i in 0..mesh.n_cells {
                    let frac = mesh.x_cell[i] / width;
                    mask[i] = frac >= *lo && frac < *hi;
                }
            }
            FineMaskSpec::Disk { cx, cy, radius } => {
                let center = [
                    cx * mesh.lattice_a[0] + cy * mesh.lattice_b[0],
                    cy * mesh.lattice_b[1],
                ];
                for i in 0..mesh.n_cells {
                    mask[i] =
                        mesh.distance([mesh.x_cell[i], mesh.y_cell[i]], center) <= *radius;
                }
            }
            FineMaskSpec::Cells { cells } => {
                for &i in cells {
                    if i >= mesh.n_cells {
                        return Err(Error::Config(format!(
                            "fine mask cell {i} out of range (< {})",
                            mesh.n_cells
                        )));
                    }
                    mask[i] = true;
                }
            }
        }
        Ok(mask)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub mesh: MeshSpec,
    pub initial: InitialCondition,
    pub physics: PhysicsConfig,
    /// Coriolis parameter applied uniformly to the mesh when rotation is on.
    pub coriolis: f64,
    pub scheme: Scheme,
    pub weights: FbWeights,
    /// Coarse time step (s).
    pub dt: f64,
    /// Subcycling factor for the multirate scheme.
    pub m: usize,
    pub fine_mask: Option<FineMaskSpec>,
    pub splitting: bool,
    pub wide_halo: bool,
    /// Simulated duration (s); must be an integer number of steps.
    pub t_end: f64,
    pub seed: u64,
    /// Advance the prognostic absolute-vorticity companion alongside the run.
    pub track_vorticity: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            mesh: MeshSpec::default(),
            initial: InitialCondition::default(),
            physics: PhysicsConfig::default(),
            coriolis: 0.0,
            scheme: Scheme::Fbrk32,
            weights: FbWeights::default(),
            dt: 10.0,
            m: 1,
            fine_mask: None,
            splitting: false,
            wide_halo: false,
            t_end: 100.0,
            seed: 0,
            track_vorticity: false,
        }
    }
}

impl ScenarioConfig {
    pub fn from_file(path: &Path) -> Result<ScenarioConfig> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let cfg: ScenarioConfig = serde_json::from_str(&text).map_err(|e| Error::Config(format!(
            "{}: {e}",
            path.display()
        )))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.physics.validate()?;
        self.weights.validate()?;
        if !(self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if self.m == 0 {
            return Err(Error::Config("m must be at least 1".into()));
        }
        if self.t_end < 0.0 {
            return Err(Error::Config("t_end must be nonnegative".into()));
        }
        if self.scheme == Scheme::Fblts && self.fine_mask.is_none() {
            return Err(Error::Config(
                "scheme \"fblts\" requires a fine_mask".into(),
            ));
        }
        if !(self.initial.background_h > 0.0) {
            return Err(Error::Config("background_h must be positive".into()));
        }
        Ok(())
    }

    fn steps_for(&self, dt: f64, t_end: f64) -> Result<usize> {
        let n = (t_end / dt).round();
        if (n * dt - t_end).abs() > 1e-6 * dt {
            return Err(Error::Config(format!(
                "t_end = {t_end} is not an integer number of steps of dt = {dt}"
            )));
        }
        Ok(n as usize)
    }
}

/// A built scenario: mesh, optional region labels, and the initial state.
pub struct Scenario {
    pub config: ScenarioConfig,
    pub mesh: Mesh,
    pub labels: Option<LtsLabels>,
    pub initial: State,
}

impl Scenario {
    pub fn build(config: ScenarioConfig) -> Result<Scenario> {
        config.validate()?;
        let mut mesh = match &config.mesh {
            MeshSpec::Generate { nx, ny, dc } => build_periodic_hex_mesh(*nx, *ny, *dc)?,
            MeshSpec::Load { path } => Mesh::load(Path::new(path))?,
        };
        if config.physics.rotation_on {
            mesh.coriolis_vertex = vec![config.coriolis; mesh.n_vertices];
        }
        for i in 0..mesh.n_cells {
            mesh.resting_depth[i] = config.initial.background_h;
        }

        let labels = match (&config.fine_mask, config.scheme) {
            (Some(spec), _) => {
                let mask = spec.resolve(&mesh)?;
                Some(label_regions(&mesh, &mask, 2)?)
            }
            (None, _) => None,
        };

        let ic = &config.initial;
        let center = [
            ic.center[0] * mesh.lattice_a[0] + ic.center[1] * mesh.lattice_b[0],
            ic.center[1] * mesh.lattice_b[1],
        ];
        let h: Vec<f64> = (0..mesh.n_cells)
            .map(|i| {
                let r = mesh.distance([mesh.x_cell[i], mesh.y_cell[i]], center);
                let arg = r / ic.width;
                ic.background_h + ic.amplitude * (-arg * arg).exp()
            })
            .collect();
        let initial = State::new(&mesh, h, vec![0.0; mesh.n_edges], 0.0)?;

        Ok(Scenario {
            config,
            mesh,
            labels,
            initial,
        })
    }
}

/// Per-run overrides so drivers can reuse one built scenario.
#[derive(Debug, Clone)]
pub struct RunPlan {
    pub scheme: Scheme,
    pub dt: f64,
    pub m: usize,
    pub weights: FbWeights,
    pub t_end: f64,
    pub splitting: bool,
    pub wide_halo: bool,
    pub track_vorticity: bool,
    pub collect_record: bool,
}

impl RunPlan {
    pub fn from_config(config: &ScenarioConfig) -> RunPlan {
        RunPlan {
            scheme: config.scheme,
            dt: config.dt,
            m: config.m,
            weights: config.weights,
            t_end: config.t_end,
            splitting: config.splitting,
            wide_halo: config.wide_halo,
            track_vorticity: config.track_vorticity,
            collect_record: true,
        }
    }
}

/// Output of one run.
#[derive(Debug)]
pub struct RunOutput {
    pub record: RunRecord,
    pub state: State,
    /// Prognostic companion absolute vorticity, when tracked.
    pub eta: Option<Vec<f64>>,
    pub counters: WorkCounters,
    pub wall_seconds: f64,
    /// Wall seconds spent in each multirate phase, summed over steps.
    pub phase_seconds: [f64; 4],
}

/// Step the scenario to `plan.t_end`.
pub fn execute(scenario: &Scenario, plan: &RunPlan) -> Result<RunOutput> {
    let mesh = &scenario.mesh;
    let config = &scenario.config;
    let n_steps = config.steps_for(plan.dt, plan.t_end)?;

    if plan.scheme == Scheme::Fblts && scenario.labels.is_none() {
        return Err(Error::Config("multirate run without region labels".into()));
    }

    let mut state = scenario.initial.clone();
    let mut ctx = StepContext::new(plan.dt, plan.weights, config.physics);
    let mut eta = if plan.track_vorticity {
        Some(vorticity_fields(mesh, &config.physics, &state.u, &state.h)?.eta)
    } else {
        None
    };
    let mut record = RunRecord::default();
    let mut phase_total = [0.0f64; 4];
    let wall_start = Instant::now();

    for step in 1..=n_steps {
        let step_start = Instant::now();
        let slow_cache = if plan.splitting {
            Some(freeze_slow(mesh, &config.physics, &state, &mut ctx.counters)?)
        } else {
            None
        };
        let mode = match &slow_cache {
            Some(cache) => RhsMode::Split(&cache.du),
            None => RhsMode::Unsplit,
        };

        let mut phases = [0.0f64; 4];
        let next;
        let mut fluxes: Option<VorticityFluxRecord> = None;
        match plan.scheme {
            Scheme::Rk4 => {
                next = rk4_step(mesh, &state, &mut ctx, mode)?;
            }
            Scheme::Fbrk32 => {
                let stages = fbrk32_step_stages(mesh, &state, &mut ctx, mode)?;
                if plan.track_vorticity {
                    fluxes = Some(VorticityFluxRecord {
                        coarse: pv_flux_field(
                            mesh,
                            &config.physics,
                            &stages.u_bar2,
                            &stages.h_bar2,
                        )?,
                        fine: Vec::new(),
                    });
                }
                next = State {
                    h: stages.h_new,
                    u: stages.u_new,
                    t: state.t + ctx.dt,
                };
            }
            Scheme::Fblts => {
                let labels = scenario.labels.as_ref().unwrap();
                let opts = LtsOptions {
                    m: plan.m,
                    wide_halo: plan.wide_halo,
                    record_fluxes: plan.track_vorticity,
                };
                let out = fblts_step(mesh, &state, labels, &mut ctx, &opts, mode)?;
                phases = out.phase_seconds;
                fluxes = out.fluxes;
                next = out.state;
            }
        }

        if let (Some(eta), Some(fluxes)) = (eta.as_mut(), fluxes.as_ref()) {
            let (labels, m) = match plan.scheme {
                Scheme::Fblts => (scenario.labels.as_ref(), plan.m),
                _ => (None, 1),
            };
            crate::diagnostics::step_prognostic_vorticity(mesh, labels, eta, fluxes, plan.dt, m)?;
        }

        state = next;
        for (acc, p) in phase_total.iter_mut().zip(phases) {
            *acc += p;
        }

        if plan.collect_record {
            let abs_vorticity = match &eta {
                Some(eta) => crate::diagnostics::total_absolute_vorticity(mesh, eta),
                None => {
                    let fields = vorticity_fields(mesh, &config.physics, &state.u, &state.h)?;
                    crate::diagnostics::total_absolute_vorticity(mesh, &fields.eta)
                }
            };
            let pv = match &eta {
                Some(eta) => total_pv_volume(mesh, &state.h, eta)?.via_q,
                None => {
                    let fields = vorticity_fields(mesh, &config.physics, &state.u, &state.h)?;
                    total_pv_volume(mesh, &state.h, &fields.eta)?.via_q
                }
            };
            let (max_courant, _) = courant_number(mesh, &state, config.physics.g, plan.dt);
            record.push(RunRow {
                step,
                time: state.t,
                mass: total_mass(mesh, &state.h),
                abs_vorticity,
                pv_volume: pv,
                max_courant,
                counters: ctx.counters,
                phase_seconds: phases,
                wall_seconds: step_start.elapsed().as_secs_f64(),
            });
        }
    }

    Ok(RunOutput {
        record,
        state,
        eta,
        counters: ctx.counters,
        wall_seconds: wall_start.elapsed().as_secs_f64(),
        phase_seconds: phase_total,
    })
}

/// Write the final state dump: one row per cell then per edge, with the
/// region label column (-1 when the run had no region decomposition).
pub fn write_state_dump(
    mesh: &Mesh,
    labels: Option<&LtsLabels>,
    state: &State,
    path: &Path,
) -> Result<()> {
    let mut s = String::from("kind,index,x,y,value,region\n");
    for i in 0..mesh.n_cells {
        let region = labels.map_or(-1, |l| l.cell_region[i].to_int());
        s.push_str(&format!(
            "cell,{i},{:.9e},{:.9e},{:.17e},{region}\n",
            mesh.x_cell[i], mesh.y_cell[i], state.h[i]
        ));
    }
    for e in 0..mesh.n_edges {
        let region = labels.map_or(-1, |l| l.edge_region[e].to_int());
        s.push_str(&format!(
            "edge,{e},{:.9e},{:.9e},{:.17e},{region}\n",
            mesh.x_edge[e], mesh.y_edge[e], state.u[e]
        ));
    }
    std::fs::write(path, s).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Run a scenario config end to end, optionally writing `record.csv` and
/// `state_final.csv` into `out_dir`.
pub fn run_scenario(config: ScenarioConfig, out_dir: Option<&Path>) -> Result<RunOutput> {
    let scenario = Scenario::build(config)?;
    let plan = RunPlan::from_config(&scenario.config);
    let out = execute(&scenario, &plan)?;
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        out.record.save(&dir.join("record.csv"))?;
        write_state_dump(
            &scenario.mesh,
            scenario.labels.as_ref(),
            &out.state,
            &dir.join("state_final.csv"),
        )?;
    }
    Ok(out)
}
