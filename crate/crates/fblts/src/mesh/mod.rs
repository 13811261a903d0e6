//! TRiSK-style staggered mesh: primal polygonal cells, edges carrying normal
//! velocities, and a triangular dual whose cells (vertices) carry vorticity.
//!
//! Orientation conventions, fixed once here and relied on everywhere else:
//!
//! - `cells_on_edge[e] = [i1, i2]` defines the unit normal `n_e` as pointing
//!   from `i1` toward `i2`, so `n_sign[e] = [+1, -1]` on interior edges.
//! - `t_e = k x n_e` (rotate the normal 90 degrees counterclockwise).
//!   `vertices_on_edge[e] = [v1, v2]` is ordered so the displacement from
//!   `v1` to `v2` points along `+t_e`, and `t_sign[e] = [-1, +1]`.
//! - `edges_on_cell[i]` lists the cell's edges in counterclockwise order.

mod hex;
mod io;
mod perp;

pub use hex::build_periodic_hex_mesh;
pub use perp::compute_perp_weights;

use crate::error::Error;
use crate::Result;

/// Sentinel for the missing cell of a boundary edge.
pub const NO_CELL: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub n_cells: usize,
    pub n_edges: usize,
    pub n_vertices: usize,

    /// Per edge, the ordered cell pair fixing the normal direction.
    pub cells_on_edge: Vec<[usize; 2]>,
    /// Per cell, its edges in counterclockwise order.
    pub edges_on_cell: Vec<Vec<usize>>,
    /// Per edge, the dual-cell pair ordered along `+t_e`.
    pub vertices_on_edge: Vec<[usize; 2]>,
    /// Per vertex, the edges meeting there.
    pub edges_on_vertex: Vec<Vec<usize>>,
    /// Per vertex, the primal cells meeting there (aligned with `kite_area`).
    pub cells_on_vertex: Vec<Vec<usize>>,

    /// Primal cell areas (m^2).
    pub area_cell: Vec<f64>,
    /// Dual cell areas (m^2).
    pub area_dual: Vec<f64>,
    /// Per (vertex, adjacent cell) overlap areas, aligned with `cells_on_vertex`.
    pub kite_area: Vec<Vec<f64>>,
    /// Primal edge lengths l_e (m).
    pub l_edge: Vec<f64>,
    /// Dual edge lengths d_e, the distance between the two cell centers (m).
    pub d_edge: Vec<f64>,

    /// n_{e,i} for the two cells in `cells_on_edge` order.
    pub n_sign: Vec<[i8; 2]>,
    /// t_{e,v} for the two vertices in `vertices_on_edge` order.
    pub t_sign: Vec<[i8; 2]>,

    /// Per edge, the edges of the one or two cells sharing it (excluding itself).
    pub edges_on_edge: Vec<Vec<usize>>,
    /// Flux-mapping weights w_{e,e'}, aligned with `edges_on_edge`.
    pub perp_weights: Vec<Vec<f64>>,

    /// Bottom elevation z_b per cell (m).
    pub bottom_elevation: Vec<f64>,
    /// Resting depth H per cell (m).
    pub resting_depth: Vec<f64>,
    /// Coriolis parameter f per vertex (1/s).
    pub coriolis_vertex: Vec<f64>,

    pub x_cell: Vec<f64>,
    pub y_cell: Vec<f64>,
    pub x_edge: Vec<f64>,
    pub y_edge: Vec<f64>,
    pub x_vertex: Vec<f64>,
    pub y_vertex: Vec<f64>,
    /// Lattice vectors of the periodic domain.
    pub lattice_a: [f64; 2],
    pub lattice_b: [f64; 2],

    /// Derived: n_{e,i} aligned with `edges_on_cell` (computed, not serialized
    /// independently; reconstructed deterministically on load).
    pub edge_sign_on_cell: Vec<Vec<f64>>,
    /// Derived: t_{e,v} aligned with `edges_on_vertex`.
    pub edge_sign_on_vertex: Vec<Vec<f64>>,
}

impl Mesh {
    pub fn load(path: &std::path::Path) -> Result<Mesh> {
        io::load(path)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        io::save(self, path)
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.cells_on_edge[e][1] == NO_CELL
    }

    /// Minimum-image displacement from `p` to `q` on the periodic domain.
    pub fn displacement(&self, p: [f64; 2], q: [f64; 2]) -> [f64; 2] {
        let a = self.lattice_a;
        let b = self.lattice_b;
        let d0 = [q[0] - p[0], q[1] - p[1]];
        let mut best = d0;
        let mut best_n2 = d0[0] * d0[0] + d0[1] * d0[1];
        // Coarse reduction first, then scan the neighbor images.
        let kb = if b[1] != 0.0 { (d0[1] / b[1]).round() } else { 0.0 };
        let dr = [d0[0] - kb * b[0], d0[1] - kb * b[1]];
        let ka = if a[0] != 0.0 { (dr[0] / a[0]).round() } else { 0.0 };
        let dr = [dr[0] - ka * a[0], dr[1] - ka * a[1]];
        for ia in -1..=1 {
            for ib in -1..=1 {
                let cand = [
                    dr[0] + ia as f64 * a[0] + ib as f64 * b[0],
                    dr[1] + ia as f64 * a[1] + ib as f64 * b[1],
                ];
                let n2 = cand[0] * cand[0] + cand[1] * cand[1];
                if n2 < best_n2 {
                    best_n2 = n2;
                    best = cand;
                }
            }
        }
        best
    }

    /// Periodic distance between two points.
    pub fn distance(&self, p: [f64; 2], q: [f64; 2]) -> f64 {
        let d = self.displacement(p, q);
        (d[0] * d[0] + d[1] * d[1]).sqrt()
    }

    /// Rebuild the derived sign tables from the primary fields.
    pub(crate) fn rebuild_derived(&mut self) -> Result<()> {
        let mut esc = Vec::with_capacity(self.n_cells);
        for i in 0..self.n_cells {
            let mut row = Vec::with_capacity(self.edges_on_cell[i].len());
            for &e in &self.edges_on_cell[i] {
                let sign = if self.cells_on_edge[e][0] == i {
                    self.n_sign[e][0] as f64
                } else if self.cells_on_edge[e][1] == i {
                    self.n_sign[e][1] as f64
                } else {
                    return Err(Error::MeshField {
                        field: "edgesOnCell".into(),
                        index: i,
                        message: format!("edge {e} does not list cell {i} in cellsOnEdge"),
                    });
                };
                row.push(sign);
            }
            esc.push(row);
        }
        self.edge_sign_on_cell = esc;

        let mut esv = Vec::with_capacity(self.n_vertices);
        for v in 0..self.n_vertices {
            let mut row = Vec::with_capacity(self.edges_on_vertex[v].len());
            for &e in &self.edges_on_vertex[v] {
                let sign = if self.vertices_on_edge[e][0] == v {
                    self.t_sign[e][0] as f64
                } else if self.vertices_on_edge[e][1] == v {
                    self.t_sign[e][1] as f64
                } else {
                    return Err(Error::MeshField {
                        field: "edgesOnVertex".into(),
                        index: v,
                        message: format!("edge {e} does not list vertex {v} in verticesOnEdge"),
                    });
                };
                row.push(sign);
            }
            esv.push(row);
        }
        self.edge_sign_on_vertex = esv;
        Ok(())
    }

    pub fn total_cell_area(&self) -> f64 {
        self.area_cell.iter().sum()
    }

    pub fn total_dual_area(&self) -> f64 {
        self.area_dual.iter().sum()
    }

    /// Run every mesh invariant check, report-style (never fails).
    pub fn validate(&self) -> MeshReport {
        validate_mesh(self)
    }

    /// Validate and turn any failed invariant into an error naming the worst
    /// offender. Used on load.
    pub(crate) fn check_invariants(&self) -> Result<()> {
        let report = self.validate();
        for check in &report.checks {
            if !check.pass {
                return Err(Error::MeshInvariant(format!(
                    "{} (worst at index {}, magnitude {:.3e})",
                    check.name, check.worst_index, check.worst_magnitude
                )));
            }
        }
        Ok(())
    }
}

/// One invariant check result.
#[derive(Debug, Clone)]
pub struct MeshCheck {
    pub name: String,
    pub pass: bool,
    pub worst_index: usize,
    pub worst_magnitude: f64,
}

/// Report produced by [`validate_mesh`].
#[derive(Debug, Clone)]
pub struct MeshReport {
    pub checks: Vec<MeshCheck>,
    pub boundary_edges: usize,
    /// True when the mesh has no boundary edges, so the flux-cancellation
    /// arguments behind exact conservation apply.
    pub conservation_hypothesis: bool,
}

impl MeshReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

const AREA_RTOL: f64 = 1e-10;
const ANTISYM_RTOL: f64 = 1e-12;

/// Check every `Mesh` invariant, recording pass/fail with the worst offending
/// index and magnitude, plus boundary-edge detection.
pub fn validate_mesh(mesh: &Mesh) -> MeshReport {
    let mut checks = Vec::new();

    // Interior edges: n-sign pair must be (+1, -1); every edge t-sign pair
    // must multiply to -1.
    let mut worst = (0usize, 0.0f64);
    let mut pass = true;
    let mut boundary_edges = 0usize;
    for e in 0..mesh.n_edges {
        if mesh.is_boundary_edge(e) {
            boundary_edges += 1;
            continue;
        }
        if mesh.n_sign[e][0] != 1 || mesh.n_sign[e][1] != -1 {
            pass = false;
            worst = (e, (mesh.n_sign[e][0] as i32 * mesh.n_sign[e][1] as i32 + 1) as f64);
        }
    }
    checks.push(MeshCheck {
        name: "nSign orientation (+1, -1) per interior edge".into(),
        pass,
        worst_index: worst.0,
        worst_magnitude: worst.1,
    });

    let mut worst = (0usize, 0.0f64);
    let mut pass = true;
    for e in 0..mesh.n_edges {
        if mesh.t_sign[e][0] as i32 * mesh.t_sign[e][1] as i32 != -1 {
            pass = false;
            worst = (e, 2.0);
        }
    }
    checks.push(MeshCheck {
        name: "tSign product -1 per edge".into(),
        pass,
        worst_index: worst.0,
        worst_magnitude: worst.1,
    });

    // Area accounting: primal, dual, and kite tilings each cover the domain.
    let a_cells = mesh.total_cell_area();
    let a_dual = mesh.total_dual_area();
    let a_kite: f64 = mesh.kite_area.iter().flatten().sum();
    let dual_gap = (a_cells - a_dual).abs() / a_cells.max(f64::MIN_POSITIVE);
    checks.push(MeshCheck {
        name: "sum(areaDual) == sum(areaCell)".into(),
        pass: dual_gap <= AREA_RTOL,
        worst_index: 0,
        worst_magnitude: dual_gap,
    });
    let kite_gap = (a_cells - a_kite).abs() / a_cells.max(f64::MIN_POSITIVE);
    checks.push(MeshCheck {
        name: "sum(kiteArea) == sum(areaCell)".into(),
        pass: kite_gap <= AREA_RTOL,
        worst_index: 0,
        worst_magnitude: kite_gap,
    });

    // Euler characteristic of the torus (only meaningful without boundary).
    let euler = mesh.n_vertices as i64 - mesh.n_edges as i64 + mesh.n_cells as i64;
    checks.push(MeshCheck {
        name: "Euler characteristic V - E + C == 0".into(),
        pass: boundary_edges > 0 || euler == 0,
        worst_index: 0,
        worst_magnitude: euler as f64,
    });

    // Each edge appears in edgesOnCell of exactly its two cells, with the
    // matching sign.
    let mut worst = (0usize, 0.0f64);
    let mut pass = true;
    let mut appearances = vec![0usize; mesh.n_edges];
    'cells: for i in 0..mesh.n_cells {
        for (slot, &e) in mesh.edges_on_cell[i].iter().enumerate() {
            appearances[e] += 1;
            let on = mesh.cells_on_edge[e];
            if on[0] != i && on[1] != i {
                pass = false;
                worst = (e, 1.0);
                break 'cells;
            }
            let expect = if on[0] == i {
                mesh.n_sign[e][0] as f64
            } else {
                mesh.n_sign[e][1] as f64
            };
            if mesh.edge_sign_on_cell[i][slot] != expect {
                pass = false;
                worst = (e, 1.0);
                break 'cells;
            }
        }
    }
    for e in 0..mesh.n_edges {
        let expect = if mesh.is_boundary_edge(e) { 1 } else { 2 };
        if appearances[e] != expect {
            pass = false;
            worst = (e, appearances[e] as f64 - expect as f64);
        }
    }
    checks.push(MeshCheck {
        name: "edge membership in edgesOnCell matches cellsOnEdge/nSign".into(),
        pass,
        worst_index: worst.0,
        worst_magnitude: worst.1,
    });

    // Antisymmetry of the flux-mapping weights: l_{e'} w_{e,e'} = -l_e w_{e',e}.
    let mut worst = (0usize, 0.0f64);
    let scale: f64 = mesh
        .perp_weights
        .iter()
        .zip(&mesh.edges_on_edge)
        .flat_map(|(ws, es)| ws.iter().zip(es).map(|(w, &ep)| (mesh.l_edge[ep] * w).abs()))
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    for e in 0..mesh.n_edges {
        for (slot, &ep) in mesh.edges_on_edge[e].iter().enumerate() {
            let w_ee = mesh.perp_weights[e][slot];
            let w_pe = mesh.edges_on_edge[ep]
                .iter()
                .position(|&x| x == e)
                .map(|s| mesh.perp_weights[ep][s])
                .unwrap_or(0.0);
            let resid = (mesh.l_edge[ep] * w_ee + mesh.l_edge[e] * w_pe).abs();
            if resid > worst.1 {
                worst = (e, resid);
            }
        }
    }
    checks.push(MeshCheck {
        name: "perpWeights antisymmetry l'w(e,e') == -l w(e',e)".into(),
        pass: worst.1 / scale <= ANTISYM_RTOL,
        worst_index: worst.0,
        worst_magnitude: worst.1 / scale,
    });

    // Geometry positivity.
    let mut worst = (0usize, 0.0f64);
    let mut pass = true;
    for (i, &a) in mesh.area_cell.iter().enumerate() {
        if !(a > 0.0) {
            pass = false;
            worst = (i, a);
        }
    }
    for (v, &a) in mesh.area_dual.iter().enumerate() {
        if !(a > 0.0) {
            pass = false;
            worst = (v, a);
        }
    }
    for (e, (&l, &d)) in mesh.l_edge.iter().zip(&mesh.d_edge).enumerate() {
        if !(l > 0.0 && d > 0.0) {
            pass = false;
            worst = (e, l.min(d));
        }
    }
    checks.push(MeshCheck {
        name: "positive areas and edge lengths".into(),
        pass,
        worst_index: worst.0,
        worst_magnitude: worst.1,
    });

    MeshReport {
        checks,
        boundary_edges,
        conservation_hypothesis: boundary_edges == 0,
    }
}
