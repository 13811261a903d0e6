//! Conserved-quantity integrals, the prognostic absolute-vorticity companion
//! field, RMS error, and work/speedup accounting.
//!
//! The companion field advances absolute vorticity on dual cells with the
//! same stage and correction structure as the thickness equation, using the
//! q_hat * F_perp fluxes the main step recorded. It exists to make the exact
//! conservation of absolute vorticity observable: the main solver never
//! integrates the vorticity equation itself.

use crate::error::Error;
use crate::lts::{LtsLabels, VorticityFluxRecord};
use crate::mesh::Mesh;
use crate::operators::WorkCounters;
use crate::Result;

/// Total mass: sum of A_i h_i (m^3).
pub fn total_mass(mesh: &Mesh, h: &[f64]) -> f64 {
    (0..mesh.n_cells).map(|i| mesh.area_cell[i] * h[i]).sum()
}

/// Total absolute vorticity: sum of A_v eta_v (m^2/s).
pub fn total_absolute_vorticity(mesh: &Mesh, eta: &[f64]) -> f64 {
    (0..mesh.n_vertices).map(|v| mesh.area_dual[v] * eta[v]).sum()
}

/// The volume integral of potential vorticity, computed both ways: through
/// q = eta / h_v (so the integrand is A_v h_v q_v) and directly as A_v eta_v.
/// The two agree identically up to roundoff.
#[derive(Debug, Clone, Copy)]
pub struct PvVolume {
    pub via_q: f64,
    pub via_eta: f64,
}

pub fn total_pv_volume(mesh: &Mesh, h: &[f64], eta: &[f64]) -> Result<PvVolume> {
    let mut via_q = 0.0;
    let mut via_eta = 0.0;
    for v in 0..mesh.n_vertices {
        let hv = crate::operators::vertex_thickness_at(mesh, h, v);
        if !(hv > 0.0) {
            return Err(Error::NonPositiveThickness {
                cell: v,
                value: hv,
                context: "dual-cell thickness in PV volume integral".into(),
            });
        }
        let q = eta[v] / hv;
        via_q += mesh.area_dual[v] * hv * q;
        via_eta += mesh.area_dual[v] * eta[v];
    }
    Ok(PvVolume { via_q, via_eta })
}

/// Root-mean-square difference between a model field and a reference field.
pub fn rms_error(model: &[f64], reference: &[f64]) -> Result<f64> {
    if model.len() != reference.len() {
        return Err(Error::LengthMismatch {
            left: model.len(),
            right: reference.len(),
        });
    }
    if model.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = model
        .iter()
        .zip(reference)
        .map(|(m, s)| (s - m) * (s - m))
        .sum();
    Ok((sum / model.len() as f64).sqrt())
}

/// CPU-time speedup: baseline seconds over candidate seconds.
pub fn speedup(baseline_seconds: f64, candidate_seconds: f64) -> Result<f64> {
    if !(baseline_seconds > 0.0) || !(candidate_seconds > 0.0) {
        return Err(Error::NonPositiveInput(format!(
            "speedup needs positive timings, got ({baseline_seconds}, {candidate_seconds})"
        )));
    }
    Ok(baseline_seconds / candidate_seconds)
}

/// Dual-cell divergence tendency of a recorded flux field at one vertex:
/// (1/A_v) sum t_{e,v} d_e g_e.
#[inline]
fn vorticity_tendency_at(mesh: &Mesh, g: &[f64], v: usize) -> f64 {
    let mut sum = 0.0;
    for (slot, &e) in mesh.edges_on_vertex[v].iter().enumerate() {
        sum += mesh.edge_sign_on_vertex[v][slot] * mesh.d_edge[e] * g[e];
    }
    sum / mesh.area_dual[v]
}

/// Advance the prognostic absolute-vorticity companion by one coarse step
/// using the fluxes recorded by the main step. With labels, dual cells whose
/// three primal cells are all coarse interior take the single coarse update;
/// every other dual cell takes the subcycle-sum update, mirroring the fine
/// advancement plus interface correction of the thickness equation. Without
/// labels the whole dual mesh takes the coarse update (a global step).
pub fn step_prognostic_vorticity(
    mesh: &Mesh,
    labels: Option<&LtsLabels>,
    eta: &mut [f64],
    record: &VorticityFluxRecord,
    dt: f64,
    m: usize,
) -> Result<()> {
    if eta.len() != mesh.n_vertices {
        return Err(Error::LengthMismatch {
            left: eta.len(),
            right: mesh.n_vertices,
        });
    }
    match labels {
        None => {
            for v in 0..mesh.n_vertices {
                eta[v] += dt * vorticity_tendency_at(mesh, &record.coarse, v);
            }
        }
        Some(labels) => {
            if record.fine.len() != m {
                return Err(Error::Internal(format!(
                    "vorticity flux record holds {} subcycle fields, expected {m}",
                    record.fine.len()
                )));
            }
            let coef = dt / m as f64;
            for v in 0..mesh.n_vertices {
                let interior = mesh.cells_on_vertex[v]
                    .iter()
                    .all(|&i| labels.cell_region[i] == crate::lts::Region::CoarseInterior);
                if interior {
                    eta[v] += dt * vorticity_tendency_at(mesh, &record.coarse, v);
                } else {
                    let mut sum = 0.0;
                    for g in &record.fine {
                        sum += vorticity_tendency_at(mesh, g, v);
                    }
                    eta[v] += coef * sum;
                }
            }
        }
    }
    Ok(())
}

/// One diagnostics row per completed coarse step.
#[derive(Debug, Clone)]
pub struct RunRow {
    pub step: usize,
    pub time: f64,
    pub mass: f64,
    pub abs_vorticity: f64,
    pub pv_volume: f64,
    pub max_courant: f64,
    pub counters: WorkCounters,
    /// Coarse, predict, fine, correct phase seconds (zeros for global schemes).
    pub phase_seconds: [f64; 4],
    pub wall_seconds: f64,
}

/// Diagnostics time series for one run.
#[derive(Debug, Clone, Default)]
pub struct RunRecord {
    pub rows: Vec<RunRow>,
}

impl RunRecord {
    pub fn push(&mut self, row: RunRow) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "step,time,mass,abs_vorticity,pv_volume,max_courant,\
             fast_cell_evals,fast_edge_evals,slow_cell_evals,slow_edge_evals,\
             wall_coarse,wall_predict,wall_fine,wall_correct,wall_total\n",
        );
        for r in &self.rows {
            s.push_str(&format!(
                "{},{:.9e},{:.17e},{:.17e},{:.17e},{:.9e},{},{},{},{},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e}\n",
                r.step,
                r.time,
                r.mass,
                r.abs_vorticity,
                r.pv_volume,
                r.max_courant,
                r.counters.fast_cell_evals,
                r.counters.fast_edge_evals,
                r.counters.slow_cell_evals,
                r.counters.slow_edge_evals,
                r.phase_seconds[0],
                r.phase_seconds[1],
                r.phase_seconds[2],
                r.phase_seconds[3],
                r.wall_seconds,
            ));
        }
        s
    }

    /// The CSV with the machine-dependent wall-time columns removed; two
    /// runs of the same configuration produce identical deterministic parts.
    pub fn deterministic_csv(&self) -> String {
        self.to_csv()
            .lines()
            .map(|line| {
                let cut = line.split(',').take(10).collect::<Vec<_>>().join(",");
                format!("{cut}\n")
            })
            .collect()
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path.display().to_string(), e))
    }
}
