//! Flux-mapping weights: the linear map from primal normal fluxes to dual
//! (tangential) fluxes.
//!
//! For each edge pair (e, e') sharing a cell i, the contribution is
//!
//! ```text
//!   c_i(e, e') = n_{e,i} * n_{e',i} * (Q_i(e', e) - 1/2)
//! ```
//!
//! where Q_i(e', e) sums the kite-area fractions kite(v,i)/A_i over the cell
//! corners passed when walking counterclockwise from e' to e (from the
//! corner ending e' through the corner starting e, inclusive). The dual flux
//! is `F_perp_e = (1/d_e) * sum_e' [sum_i c_i(e,e')] * l_e' * F_e'`; the
//! stored weight folds the length ratio in so that
//! `F_perp_e = sum_e' perp_weights[e][slot] * F_e'`.
//!
//! Two properties pin this construction down and are enforced by tests:
//! the matrix l_{e'} w_{e,e'} is antisymmetric, and the dual-cell divergence
//! of F_perp equals the kite-area-weighted average of the primal divergences
//! of F at every vertex. The raw coefficients are antisymmetrized pairwise
//! after assembly so the first property holds exactly in floating point.

use super::Mesh;
use crate::error::Error;
use crate::Result;

/// Compute `(edges_on_edge, perp_weights)` for a mesh whose connectivity and
/// kite areas are populated. Requires a triangular dual (vertex degree 3)
/// and no boundary edges.
#[allow(clippy::type_complexity)]
pub fn compute_perp_weights(mesh: &Mesh) -> Result<(Vec<Vec<usize>>, Vec<Vec<f64>>)> {
    for v in 0..mesh.n_vertices {
        if mesh.edges_on_vertex[v].len() != 3 || mesh.cells_on_vertex[v].len() != 3 {
            return Err(Error::UnsupportedTopology(format!(
                "vertex {v} has degree {} on the dual; only triangular duals are supported",
                mesh.edges_on_vertex[v].len()
            )));
        }
    }
    for e in 0..mesh.n_edges {
        if mesh.is_boundary_edge(e) {
            return Err(Error::UnsupportedTopology(format!(
                "edge {e} is a boundary edge; flux-mapping weights need a closed mesh"
            )));
        }
    }

    // Raw pair coefficients, indexed per edge by neighbor list.
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); mesh.n_edges];
    let mut raw: Vec<Vec<f64>> = vec![Vec::new(); mesh.n_edges];

    let push = |e: usize, ep: usize, c: f64, neighbors: &mut Vec<Vec<usize>>, raw: &mut Vec<Vec<f64>>| {
        if let Some(slot) = neighbors[e].iter().position(|&x| x == ep) {
            raw[e][slot] += c;
        } else {
            neighbors[e].push(ep);
            raw[e].push(c);
        }
    };

    for i in 0..mesh.n_cells {
        let ring = &mesh.edges_on_cell[i];
        let m = ring.len();
        // Kite fraction at the corner between ring[j] and ring[j+1].
        let mut corner_frac = Vec::with_capacity(m);
        for j in 0..m {
            let v = shared_vertex(mesh, ring[j], ring[(j + 1) % m]).ok_or_else(|| {
                Error::MeshField {
                    field: "edgesOnCell".into(),
                    index: i,
                    message: format!(
                        "consecutive edges {} and {} share no vertex",
                        ring[j],
                        ring[(j + 1) % m]
                    ),
                }
            })?;
            let slot = mesh.cells_on_vertex[v]
                .iter()
                .position(|&c| c == i)
                .ok_or_else(|| Error::MeshField {
                    field: "cellsOnVertex".into(),
                    index: v,
                    message: format!("vertex {v} does not list cell {i}"),
                })?;
            corner_frac.push(mesh.kite_area[v][slot] / mesh.area_cell[i]);
        }

        for j0 in 0..m {
            let ep = ring[j0];
            let n_ep = mesh.edge_sign_on_cell[i][j0];
            // Walk counterclockwise from e', accumulating corner fractions.
            let mut q = 0.0;
            for step in 1..m {
                let j = (j0 + step) % m;
                q += corner_frac[(j0 + step - 1) % m];
                let e = ring[j];
                let n_e = mesh.edge_sign_on_cell[i][j];
                let c = n_e * n_ep * (q - 0.5);
                push(e, ep, c, &mut neighbors, &mut raw);
            }
        }
    }

    // Enforce exact floating-point antisymmetry of l_{e'} c(e,e') by
    // pairwise averaging, then fold in the flux normalization.
    let mut weights: Vec<Vec<f64>> = vec![Vec::new(); mesh.n_edges];
    for e in 0..mesh.n_edges {
        weights[e] = vec![0.0; neighbors[e].len()];
    }
    for e in 0..mesh.n_edges {
        for (slot, &ep) in neighbors[e].iter().enumerate() {
            if ep < e {
                continue;
            }
            let back = neighbors[ep]
                .iter()
                .position(|&x| x == e)
                .ok_or_else(|| Error::Internal(format!("weight pair ({e},{ep}) not mirrored")))?;
            let anti = 0.5 * (raw[e][slot] - raw[ep][back]);
            weights[e][slot] = anti * mesh.l_edge[ep] / mesh.d_edge[e];
            weights[ep][back] = -anti * mesh.l_edge[e] / mesh.d_edge[ep];
        }
    }

    Ok((neighbors, weights))
}

fn shared_vertex(mesh: &Mesh, e1: usize, e2: usize) -> Option<usize> {
    let [a, b] = mesh.vertices_on_edge[e1];
    let [c, d] = mesh.vertices_on_edge[e2];
    if a == c || a == d {
        Some(a)
    } else if b == c || b == d {
        Some(b)
    } else {
        None
    }
}
