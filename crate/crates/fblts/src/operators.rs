//! Spatially discrete right-hand sides on the staggered mesh: the thickness
//! tendency (flux divergence), the momentum tendency split into its fast
//! (pressure gradient) and slow (rotational, advective, forcing) parts, and
//! the vorticity diagnostic chain.
//!
//! Every operator is a pure function of its inputs, evaluates per entity in a
//! fixed order, and can be restricted to a subset of cells or edges via
//! [`Span`]; a restricted evaluation produces bit-identical values to the
//! global one on the entities it covers. That contract is what the multirate
//! stepper's region-limited stages and the work counters rely on.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::mesh::Mesh;
use crate::Result;

/// Prognostic fields at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    /// Thickness per cell (m).
    pub h: Vec<f64>,
    /// Normal velocity per edge (m/s).
    pub u: Vec<f64>,
    /// Model time (s).
    pub t: f64,
}

impl State {
    pub fn new(mesh: &Mesh, h: Vec<f64>, u: Vec<f64>, t: f64) -> Result<State> {
        if h.len() != mesh.n_cells {
            return Err(Error::LengthMismatch {
                left: h.len(),
                right: mesh.n_cells,
            });
        }
        if u.len() != mesh.n_edges {
            return Err(Error::LengthMismatch {
                left: u.len(),
                right: mesh.n_edges,
            });
        }
        let state = State { h, u, t };
        state.check_positive("State::new")?;
        Ok(state)
    }

    /// Resting state with uniform thickness.
    pub fn uniform(mesh: &Mesh, h0: f64) -> State {
        State {
            h: vec![h0; mesh.n_cells],
            u: vec![0.0; mesh.n_edges],
            t: 0.0,
        }
    }

    pub fn check_positive(&self, context: &str) -> Result<()> {
        for (i, &h) in self.h.iter().enumerate() {
            if !(h > 0.0) {
                return Err(Error::NonPositiveThickness {
                    cell: i,
                    value: h,
                    context: context.to_string(),
                });
            }
        }
        Ok(())
    }
}

/// Momentum and thickness tendencies.
#[derive(Debug, Clone, PartialEq)]
pub struct TendencyPair {
    /// Per-cell thickness tendency (m/s).
    pub dh: Vec<f64>,
    /// Per-edge momentum tendency (m/s^2).
    pub du: Vec<f64>,
}

impl TendencyPair {
    pub fn zeros(mesh: &Mesh) -> TendencyPair {
        TendencyPair {
            dh: vec![0.0; mesh.n_cells],
            du: vec![0.0; mesh.n_edges],
        }
    }
}

/// Physical constants and forcing switches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhysicsConfig {
    /// Gravitational constant (m/s^2).
    pub g: f64,
    /// Include the Coriolis parameter in absolute vorticity.
    pub rotation_on: bool,
    /// Include the rotational/advective momentum terms (PV flux and kinetic
    /// energy gradient). Off reduces the momentum equation to the pure
    /// gravity-wave subsystem.
    pub advection_on: bool,
    /// Bottom drag coefficient (dimensionless).
    pub drag_coefficient: f64,
    /// Wind stress coefficient (dimensionless).
    pub wind_coefficient: f64,
    /// Fixed wind velocity vector (m/s).
    pub wind_velocity: [f64; 2],
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        PhysicsConfig {
            g: 9.80665,
            rotation_on: false,
            advection_on: true,
            drag_coefficient: 0.0,
            wind_coefficient: 0.0,
            wind_velocity: [0.0, 0.0],
        }
    }
}

impl PhysicsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.drag_coefficient < 0.0 || self.wind_coefficient < 0.0 {
            return Err(Error::Config(
                "drag and wind coefficients must be nonnegative".into(),
            ));
        }
        Ok(())
    }

    /// Gravity-wave subsystem only: no rotation, no advection, no forcing.
    pub fn gravity_wave(g: f64) -> PhysicsConfig {
        PhysicsConfig {
            g,
            rotation_on: false,
            advection_on: false,
            drag_coefficient: 0.0,
            wind_coefficient: 0.0,
            wind_velocity: [0.0, 0.0],
        }
    }
}

/// Vorticity diagnostic chain evaluated from one (u, h) pair.
#[derive(Debug, Clone)]
pub struct VorticityFields {
    /// Relative vorticity per vertex (1/s).
    pub zeta: Vec<f64>,
    /// Absolute vorticity per vertex (1/s).
    pub eta: Vec<f64>,
    /// Dual-cell thickness per vertex (m).
    pub h_vertex: Vec<f64>,
    /// Potential vorticity per vertex (1/(m s)).
    pub q: Vec<f64>,
    /// Potential vorticity interpolated to edges (1/(m s)).
    pub q_edge: Vec<f64>,
}

/// Tendency evaluation counters; one tick per cell for a thickness
/// evaluation, one per edge for a momentum evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkCounters {
    pub fast_cell_evals: u64,
    pub fast_edge_evals: u64,
    pub slow_cell_evals: u64,
    pub slow_edge_evals: u64,
}

impl WorkCounters {
    pub fn add(&mut self, other: &WorkCounters) {
        self.fast_cell_evals += other.fast_cell_evals;
        self.fast_edge_evals += other.fast_edge_evals;
        self.slow_cell_evals += other.slow_cell_evals;
        self.slow_edge_evals += other.slow_edge_evals;
    }
}

/// Evaluation extent: the whole index range or an explicit subset.
#[derive(Clone, Copy)]
pub enum Span<'a> {
    All,
    Only(&'a [usize]),
}

impl<'a> Span<'a> {
    pub fn count(self, n_all: usize) -> usize {
        match self {
            Span::All => n_all,
            Span::Only(s) => s.len(),
        }
    }

    pub fn iter(self, n_all: usize) -> SpanIter<'a> {
        match self {
            Span::All => SpanIter::All(0..n_all),
            Span::Only(s) => SpanIter::Only(s.iter()),
        }
    }
}

pub enum SpanIter<'a> {
    All(std::ops::Range<usize>),
    Only(std::slice::Iter<'a, usize>),
}

impl Iterator for SpanIter<'_> {
    type Item = usize;
    fn next(&mut self) -> Option<usize> {
        match self {
            SpanIter::All(r) => r.next(),
            SpanIter::Only(it) => it.next().copied(),
        }
    }
}

// ---------------------------------------------------------------------------
// Per-entity kernels. These are the single source of truth for each discrete
// expression; array-level operators and the steppers all route through them.
// ---------------------------------------------------------------------------

/// Centered edge thickness h_e = (h_{i1} + h_{i2}) / 2.
#[inline]
pub fn edge_thickness_at(mesh: &Mesh, h: &[f64], e: usize) -> f64 {
    let [c1, c2] = mesh.cells_on_edge[e];
    0.5 * (h[c1] + h[c2])
}

/// Thickness tendency at one cell: -(1/A_i) sum n_{e,i} l_e h_e u_e.
#[inline]
pub fn thickness_tendency_at(mesh: &Mesh, u: &[f64], h: &[f64], i: usize) -> f64 {
    let mut sum = 0.0;
    for (slot, &e) in mesh.edges_on_cell[i].iter().enumerate() {
        let flux = edge_thickness_at(mesh, h, e) * u[e];
        sum += mesh.edge_sign_on_cell[i][slot] * mesh.l_edge[e] * flux;
    }
    -sum / mesh.area_cell[i]
}

/// Tangential (dual) flux at one edge from the primal flux field.
#[inline]
pub fn perp_flux_at(mesh: &Mesh, flux: impl Fn(usize) -> f64, e: usize) -> f64 {
    let mut sum = 0.0;
    for (slot, &ep) in mesh.edges_on_edge[e].iter().enumerate() {
        sum += mesh.perp_weights[e][slot] * flux(ep);
    }
    sum
}

/// Kinetic energy per unit mass at one cell: (1/A_i) sum (l_e d_e / 4) u_e^2.
#[inline]
pub fn kinetic_energy_at(mesh: &Mesh, u: &[f64], i: usize) -> f64 {
    let mut sum = 0.0;
    for &e in &mesh.edges_on_cell[i] {
        sum += 0.25 * mesh.l_edge[e] * mesh.d_edge[e] * u[e] * u[e];
    }
    sum / mesh.area_cell[i]
}

/// Relative vorticity at one vertex: (1/A_v) sum t_{e,v} d_e u_e.
#[inline]
pub fn relative_vorticity_at(mesh: &Mesh, u: &[f64], v: usize) -> f64 {
    let mut circ = 0.0;
    for (slot, &e) in mesh.edges_on_vertex[v].iter().enumerate() {
        circ += mesh.edge_sign_on_vertex[v][slot] * mesh.d_edge[e] * u[e];
    }
    circ / mesh.area_dual[v]
}

/// Dual-cell thickness at one vertex: kite-area-weighted cell average.
#[inline]
pub fn vertex_thickness_at(mesh: &Mesh, h: &[f64], v: usize) -> f64 {
    let mut sum = 0.0;
    for (slot, &i) in mesh.cells_on_vertex[v].iter().enumerate() {
        sum += mesh.kite_area[v][slot] * h[i];
    }
    sum / mesh.area_dual[v]
}

/// Potential vorticity at one vertex: (zeta + f) / h_v.
#[inline]
fn pv_at(mesh: &Mesh, cfg: &PhysicsConfig, u: &[f64], h: &[f64], v: usize) -> Result<f64> {
    let zeta = relative_vorticity_at(mesh, u, v);
    let eta = if cfg.rotation_on {
        zeta + mesh.coriolis_vertex[v]
    } else {
        zeta
    };
    let hv = vertex_thickness_at(mesh, h, v);
    if !(hv > 0.0) {
        return Err(Error::NonPositiveThickness {
            cell: v,
            value: hv,
            context: "dual-cell thickness".into(),
        });
    }
    Ok(eta / hv)
}

/// Absolute-vorticity flux at one edge: q_hat_e * F_perp_e, the quantity
/// whose dual-cell divergence drives the prognostic vorticity companion.
#[inline]
pub fn pv_flux_at(mesh: &Mesh, cfg: &PhysicsConfig, u: &[f64], h: &[f64], e: usize) -> Result<f64> {
    let [v1, v2] = mesh.vertices_on_edge[e];
    let q_edge = 0.5 * (pv_at(mesh, cfg, u, h, v1)? + pv_at(mesh, cfg, u, h, v2)?);
    let f_perp = perp_flux_at(mesh, |ep| edge_thickness_at(mesh, h, ep) * u[ep], e);
    Ok(q_edge * f_perp)
}

/// The absolute-vorticity flux field for every edge.
pub fn pv_flux_field(mesh: &Mesh, cfg: &PhysicsConfig, u: &[f64], h: &[f64]) -> Result<Vec<f64>> {
    (0..mesh.n_edges)
        .map(|e| pv_flux_at(mesh, cfg, u, h, e))
        .collect()
}

/// Fast momentum tendency at one edge: -g * d(h + z_b)/dn.
#[inline]
pub fn momentum_fast_at(mesh: &Mesh, cfg: &PhysicsConfig, h: &[f64], e: usize) -> f64 {
    let [c1, c2] = mesh.cells_on_edge[e];
    -cfg.g * (h[c2] + mesh.bottom_elevation[c2] - h[c1] - mesh.bottom_elevation[c1])
        / mesh.d_edge[e]
}

/// Slow momentum tendency at one edge: PV flux, kinetic energy gradient,
/// bottom drag, and wind stress.
#[inline]
pub fn momentum_slow_at(
    mesh: &Mesh,
    cfg: &PhysicsConfig,
    u: &[f64],
    h: &[f64],
    e: usize,
) -> Result<f64> {
    let [c1, c2] = mesh.cells_on_edge[e];
    let mut du = 0.0;

    if cfg.advection_on {
        let [v1, v2] = mesh.vertices_on_edge[e];
        let q_edge = 0.5 * (pv_at(mesh, cfg, u, h, v1)? + pv_at(mesh, cfg, u, h, v2)?);
        let f_perp = perp_flux_at(mesh, |ep| edge_thickness_at(mesh, h, ep) * u[ep], e);
        let k1 = kinetic_energy_at(mesh, u, c1);
        let k2 = kinetic_energy_at(mesh, u, c2);
        du += -q_edge * f_perp - (k2 - k1) / mesh.d_edge[e];
    }

    if cfg.drag_coefficient > 0.0 || cfg.wind_coefficient > 0.0 {
        let he = edge_thickness_at(mesh, h, e);
        if !(he > 0.0) {
            return Err(Error::NonPositiveThickness {
                cell: e,
                value: he,
                context: "edge thickness in drag/wind forcing".into(),
            });
        }
        if cfg.drag_coefficient > 0.0 {
            let k1 = kinetic_energy_at(mesh, u, c1);
            let k2 = kinetic_energy_at(mesh, u, c2);
            let speed = (k1 + k2).max(0.0).sqrt();
            du += -cfg.drag_coefficient * speed * u[e] / he;
        }
        if cfg.wind_coefficient > 0.0 {
            let d = mesh.displacement(
                [mesh.x_cell[c1], mesh.y_cell[c1]],
                [mesh.x_cell[c2], mesh.y_cell[c2]],
            );
            let n = [d[0] / mesh.d_edge[e], d[1] / mesh.d_edge[e]];
            let wind_n = cfg.wind_velocity[0] * n[0] + cfg.wind_velocity[1] * n[1];
            let rel = wind_n - u[e];
            du += cfg.wind_coefficient * rel.abs() * rel / he;
        }
    }

    Ok(du)
}

// ---------------------------------------------------------------------------
// Span-level evaluations used by the steppers.
// ---------------------------------------------------------------------------

/// Thickness tendency on a span of cells. One fast cell-eval per cell.
pub fn thickness_tendency_span(
    mesh: &Mesh,
    u: &[f64],
    h: &[f64],
    out: &mut [f64],
    cells: Span<'_>,
    counters: &mut WorkCounters,
) {
    for i in cells.iter(mesh.n_cells) {
        out[i] = thickness_tendency_at(mesh, u, h, i);
    }
    counters.fast_cell_evals += cells.count(mesh.n_cells) as u64;
}

/// Fast momentum tendency on a span of edges. One fast edge-eval per edge.
pub fn momentum_fast_span(
    mesh: &Mesh,
    cfg: &PhysicsConfig,
    h: &[f64],
    out: &mut [f64],
    edges: Span<'_>,
    counters: &mut WorkCounters,
) {
    for e in edges.iter(mesh.n_edges) {
        out[e] = momentum_fast_at(mesh, cfg, h, e);
    }
    counters.fast_edge_evals += edges.count(mesh.n_edges) as u64;
}

/// Slow momentum tendency on a span of edges. One slow edge-eval per edge.
pub fn momentum_slow_span(
    mesh: &Mesh,
    cfg: &PhysicsConfig,
    u: &[f64],
    h: &[f64],
    out: &mut [f64],
    edges: Span<'_>,
    counters: &mut WorkCounters,
) -> Result<()> {
    for e in edges.iter(mesh.n_edges) {
        out[e] = momentum_slow_at(mesh, cfg, u, h, e)?;
    }
    counters.slow_edge_evals += edges.count(mesh.n_edges) as u64;
    Ok(())
}

// ---------------------------------------------------------------------------
// Whole-field operators.
// ---------------------------------------------------------------------------

/// Centered edge thickness for every edge.
pub fn edge_thickness(mesh: &Mesh, h: &[f64]) -> Vec<f64> {
    (0..mesh.n_edges).map(|e| edge_thickness_at(mesh, h, e)).collect()
}

/// Thickness tendency for every cell.
pub fn thickness_tendency(mesh: &Mesh, u: &[f64], h: &[f64]) -> Vec<f64> {
    (0..mesh.n_cells)
        .map(|i| thickness_tendency_at(mesh, u, h, i))
        .collect()
}

/// Map a primal flux field to the dual (tangential) flux field.
pub fn perp_flux(mesh: &Mesh, flux: &[f64]) -> Vec<f64> {
    (0..mesh.n_edges)
        .map(|e| perp_flux_at(mesh, |ep| flux[ep], e))
        .collect()
}

/// Kinetic energy per unit mass for every cell.
pub fn kinetic_energy(mesh: &Mesh, u: &[f64]) -> Vec<f64> {
    (0..mesh.n_cells)
        .map(|i| kinetic_energy_at(mesh, u, i))
        .collect()
}

/// The full vorticity diagnostic chain.
pub fn vorticity_fields(
    mesh: &Mesh,
    cfg: &PhysicsConfig,
    u: &[f64],
    h: &[f64],
) -> Result<VorticityFields> {
    let mut zeta = Vec::with_capacity(mesh.n_vertices);
    let mut eta = Vec::with_capacity(mesh.n_vertices);
    let mut h_vertex = Vec::with_capacity(mesh.n_vertices);
    let mut q = Vec::with_capacity(mesh.n_vertices);
    for v in 0..mesh.n_vertices {
        let z = relative_vorticity_at(mesh, u, v);
        let a = if cfg.rotation_on {
            z + mesh.coriolis_vertex[v]
        } else {
            z
        };
        let hv = vertex_thickness_at(mesh, h, v);
        if !(hv > 0.0) {
            return Err(Error::NonPositiveThickness {
                cell: v,
                value: hv,
                context: "dual-cell thickness".into(),
            });
        }
        zeta.push(z);
        eta.push(a);
        h_vertex.push(hv);
        q.push(a / hv);
    }
    let q_edge = (0..mesh.n_edges)
        .map(|e| {
            let [v1, v2] = mesh.vertices_on_edge[e];
            0.5 * (q[v1] + q[v2])
        })
        .collect();
    Ok(VorticityFields {
        zeta,
        eta,
        h_vertex,
        q,
        q_edge,
    })
}

/// Fast tendencies: thickness flux divergence and the pressure gradient.
pub fn tendency_fast(mesh: &Mesh, cfg: &PhysicsConfig, u: &[f64], h: &[f64]) -> TendencyPair {
    let mut scratch = WorkCounters::default();
    let mut pair = TendencyPair {
        dh: vec![0.0; mesh.n_cells],
        du: vec![0.0; mesh.n_edges],
    };
    thickness_tendency_span(mesh, u, h, &mut pair.dh, Span::All, &mut scratch);
    momentum_fast_span(mesh, cfg, h, &mut pair.du, Span::All, &mut scratch);
    pair
}

/// Slow tendencies: rotational/advective terms plus drag and wind forcing.
/// The thickness part is identically zero.
pub fn tendency_slow(mesh: &Mesh, cfg: &PhysicsConfig, u: &[f64], h: &[f64]) -> Result<TendencyPair> {
    let mut scratch = WorkCounters::default();
    let mut pair = TendencyPair {
        dh: vec![0.0; mesh.n_cells],
        du: vec![0.0; mesh.n_edges],
    };
    momentum_slow_span(mesh, cfg, u, h, &mut pair.du, Span::All, &mut scratch)?;
    Ok(pair)
}

/// Full tendencies, evaluated as the fieldwise sum fast + slow. Charges one
/// cell-eval per cell and one edge-eval per edge to the shared counters.
pub fn tendency_full(
    mesh: &Mesh,
    cfg: &PhysicsConfig,
    u: &[f64],
    h: &[f64],
    counters: &mut WorkCounters,
) -> Result<TendencyPair> {
    let fast = tendency_fast(mesh, cfg, u, h);
    let slow = tendency_slow(mesh, cfg, u, h)?;
    counters.fast_cell_evals += mesh.n_cells as u64;
    counters.fast_edge_evals += mesh.n_edges as u64;
    counters.slow_edge_evals += mesh.n_edges as u64;
    Ok(TendencyPair {
        dh: fast.dh.iter().zip(&slow.dh).map(|(a, b)| a + b).collect(),
        du: fast.du.iter().zip(&slow.du).map(|(a, b)| a + b).collect(),
    })
}
