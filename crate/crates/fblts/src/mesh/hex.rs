//! Doubly periodic uniform hexagonal mesh with triangular dual.
//!
//! Cells live on a sheared (axial) lattice: cell (i, j) has center
//! x = dc*(i + j/2), y = dc*(sqrt(3)/2)*j, with both indices wrapping. Each
//! cell owns three edges (E at 0 deg, NE at 60 deg, NW at 120 deg) and two
//! vertices (the "up" and "down" triangle centers), which tiles the torus
//! with nEdges = 3*nCells and nVertices = 2*nCells.

use super::{compute_perp_weights, Mesh};
use crate::error::Error;
use crate::Result;

/// Build a doubly periodic uniform hexagonal mesh: `nx * ny` cells with
/// center spacing `dc` meters. Flat bottom, zero Coriolis, zero resting
/// depth; callers override those fields per scenario.
pub fn build_periodic_hex_mesh(nx: usize, ny: usize, dc: f64) -> Result<Mesh> {
    if nx < 4 || ny < 4 {
        return Err(Error::MeshSize(format!(
            "periodic hex mesh needs nx >= 4 and ny >= 4 so the radius-2 \
             stencil cannot wrap onto itself (got nx = {nx}, ny = {ny})"
        )));
    }
    if !(dc > 0.0) {
        return Err(Error::MeshSize(format!("cell spacing must be positive, got {dc}")));
    }

    let n_cells = nx * ny;
    let n_edges = 3 * n_cells;
    let n_vertices = 2 * n_cells;

    let sqrt3 = 3.0f64.sqrt();
    let area_cell_val = sqrt3 / 2.0 * dc * dc;
    let area_dual_val = sqrt3 / 4.0 * dc * dc;
    let kite_val = area_dual_val / 3.0;
    let l_val = dc / sqrt3;
    let d_val = dc;

    let nxi = nx as i64;
    let nyi = ny as i64;
    let cell = |i: i64, j: i64| -> usize {
        (j.rem_euclid(nyi) * nxi + i.rem_euclid(nxi)) as usize
    };
    // Edge slots: 0 = E (toward i+1,j), 1 = NE (toward i,j+1), 2 = NW (toward i-1,j+1).
    let edge = |i: i64, j: i64, slot: usize| -> usize { 3 * cell(i, j) + slot };
    // Vertex slots: 0 = up triangle of (i,j), 1 = down triangle of (i,j).
    let vert = |i: i64, j: i64, slot: usize| -> usize { 2 * cell(i, j) + slot };

    let mut cells_on_edge = vec![[0usize; 2]; n_edges];
    let mut vertices_on_edge = vec![[0usize; 2]; n_edges];
    let mut edges_on_cell = Vec::with_capacity(n_cells);
    let mut cells_on_vertex = vec![Vec::new(); n_vertices];
    let mut edges_on_vertex = vec![Vec::new(); n_vertices];
    let mut x_cell = vec![0.0; n_cells];
    let mut y_cell = vec![0.0; n_cells];
    let mut x_edge = vec![0.0; n_edges];
    let mut y_edge = vec![0.0; n_edges];
    let mut x_vertex = vec![0.0; n_vertices];
    let mut y_vertex = vec![0.0; n_vertices];

    let domain_x = nx as f64 * dc;

    for j in 0..nyi {
        for i in 0..nxi {
            let c = cell(i, j);
            let cx = dc * (i as f64 + 0.5 * j as f64);
            let cy = dc * (sqrt3 / 2.0) * j as f64;
            x_cell[c] = cx.rem_euclid(domain_x);
            y_cell[c] = cy;

            // The three owned edges, oriented from this cell outward.
            cells_on_edge[edge(i, j, 0)] = [c, cell(i + 1, j)];
            cells_on_edge[edge(i, j, 1)] = [c, cell(i, j + 1)];
            cells_on_edge[edge(i, j, 2)] = [c, cell(i - 1, j + 1)];

            // Vertex pairs ordered along t_e = k x n_e.
            vertices_on_edge[edge(i, j, 0)] = [vert(i, j - 1, 1), vert(i, j, 0)];
            vertices_on_edge[edge(i, j, 1)] = [vert(i, j, 0), vert(i - 1, j, 1)];
            vertices_on_edge[edge(i, j, 2)] = [vert(i - 1, j, 1), vert(i - 1, j, 0)];

            // Counterclockwise edge ring: E, NE, NW, W, SW, SE.
            edges_on_cell.push(vec![
                edge(i, j, 0),
                edge(i, j, 1),
                edge(i, j, 2),
                edge(i - 1, j, 0),
                edge(i, j - 1, 1),
                edge(i + 1, j - 1, 2),
            ]);

            // Up vertex of (i,j): cells counterclockwise starting north.
            let vu = vert(i, j, 0);
            cells_on_vertex[vu] = vec![cell(i, j + 1), c, cell(i + 1, j)];
            edges_on_vertex[vu] = vec![edge(i, j, 0), edge(i, j, 1), edge(i + 1, j, 2)];
            x_vertex[vu] = (cx + 0.5 * dc).rem_euclid(domain_x);
            y_vertex[vu] = cy + dc * sqrt3 / 6.0;

            // Down vertex of (i,j).
            let vd = vert(i, j, 1);
            cells_on_vertex[vd] = vec![cell(i + 1, j + 1), cell(i, j + 1), cell(i + 1, j)];
            edges_on_vertex[vd] = vec![edge(i + 1, j, 2), edge(i + 1, j, 1), edge(i, j + 1, 0)];
            x_vertex[vd] = (cx + dc).rem_euclid(domain_x);
            y_vertex[vd] = cy + dc * sqrt3 / 3.0;

            x_edge[edge(i, j, 0)] = (cx + 0.5 * dc).rem_euclid(domain_x);
            y_edge[edge(i, j, 0)] = cy;
            x_edge[edge(i, j, 1)] = (cx + 0.25 * dc).rem_euclid(domain_x);
            y_edge[edge(i, j, 1)] = cy + dc * sqrt3 / 4.0;
            x_edge[edge(i, j, 2)] = (cx - 0.25 * dc).rem_euclid(domain_x);
            y_edge[edge(i, j, 2)] = cy + dc * sqrt3 / 4.0;
        }
    }

    let mut mesh = Mesh {
        n_cells,
        n_edges,
        n_vertices,
        cells_on_edge,
        edges_on_cell,
        vertices_on_edge,
        edges_on_vertex,
        cells_on_vertex,
        area_cell: vec![area_cell_val; n_cells],
        area_dual: vec![area_dual_val; n_vertices],
        kite_area: vec![vec![kite_val; 3]; n_vertices],
        l_edge: vec![l_val; n_edges],
        d_edge: vec![d_val; n_edges],
        n_sign: vec![[1, -1]; n_edges],
        t_sign: vec![[-1, 1]; n_edges],
        edges_on_edge: Vec::new(),
        perp_weights: Vec::new(),
        bottom_elevation: vec![0.0; n_cells],
        resting_depth: vec![0.0; n_cells],
        coriolis_vertex: vec![0.0; n_vertices],
        x_cell,
        y_cell,
        x_edge,
        y_edge,
        x_vertex,
        y_vertex,
        lattice_a: [domain_x, 0.0],
        lattice_b: [ny as f64 * dc / 2.0, ny as f64 * dc * sqrt3 / 2.0],
        edge_sign_on_cell: Vec::new(),
        edge_sign_on_vertex: Vec::new(),
    };
    mesh.rebuild_derived()?;

    let (edges_on_edge, perp_weights) = compute_perp_weights(&mesh)?;
    mesh.edges_on_edge = edges_on_edge;
    mesh.perp_weights = perp_weights;
    Ok(mesh)
}
