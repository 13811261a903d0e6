//! Region labeling for local time-stepping: fine cells, nested
//! interface-adjacent fine layers, the two coarse interface layers, and the
//! coarse interior, with the edge rule that an edge between two regions
//! belongs to the one closest to the fine region.

use crate::error::Error;
use crate::mesh::Mesh;
use crate::Result;

/// Cell/edge region taxonomy. `FineAdj(l)` is the l-th interface-adjacent
/// fine layer: the cells of F^l not already in F^(l-1), counting rings of
/// stencil radius `r` outward from the interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Fine,
    FineAdj(u8),
    Interface1,
    Interface2,
    CoarseInterior,
}

impl Region {
    /// Ordering along the fine-to-coarse axis; smaller is finer.
    pub fn fine_rank(self) -> u8 {
        match self {
            Region::Fine => 0,
            Region::FineAdj(l) => 6 - l,
            Region::Interface1 => 6,
            Region::Interface2 => 7,
            Region::CoarseInterior => 8,
        }
    }

    /// Broad class used by the stencil validation: 0 fine, 1 IF1, 2 IF2, 3 coarse.
    pub fn class(self) -> u8 {
        match self {
            Region::Fine | Region::FineAdj(_) => 0,
            Region::Interface1 => 1,
            Region::Interface2 => 2,
            Region::CoarseInterior => 3,
        }
    }

    pub fn is_fine(self) -> bool {
        self.class() == 0
    }

    /// Member of F^l (the l-th nested interface-adjacent set)?
    pub fn in_fine_adj(self, l: u8) -> bool {
        matches!(self, Region::FineAdj(m) if m <= l)
    }

    /// Stable integer encoding for state dumps.
    pub fn to_int(self) -> i32 {
        match self {
            Region::Fine => 0,
            Region::FineAdj(l) => l as i32,
            Region::Interface1 => 6,
            Region::Interface2 => 7,
            Region::CoarseInterior => 8,
        }
    }
}

/// Region assignment plus the precomputed index sets the stepper needs.
#[derive(Debug, Clone)]
pub struct LtsLabels {
    pub cell_region: Vec<Region>,
    pub edge_region: Vec<Region>,
    pub stencil_radius: usize,

    pub fine_cells: Vec<usize>,
    pub fine_edges: Vec<usize>,
    pub if1_cells: Vec<usize>,
    pub if1_edges: Vec<usize>,
    pub if2_cells: Vec<usize>,
    pub if2_edges: Vec<usize>,
    pub if12_cells: Vec<usize>,
    pub if12_edges: Vec<usize>,
    pub coarse_int_cells: Vec<usize>,
    pub coarse_int_edges: Vec<usize>,

    /// Coarse-advancement thickness extents for stages 1..3:
    /// (F^5 | F^3 | F^1) plus both interfaces plus the coarse interior.
    pub h_stage_cells: [Vec<usize>; 3],
    /// Velocity extents: (F^4 | F^2) plus interfaces plus interior for
    /// stages 1-2; interface-one plus interior for stage 3.
    pub u_stage_edges: [Vec<usize>; 3],
    /// Same extents with every fine-adjacent set widened to the whole fine
    /// region (the simpler implementation the shrinking sequence must match
    /// bit-for-bit on coarse and interface regions).
    pub h_stage_cells_wide: [Vec<usize>; 3],
    pub u_stage_edges_wide: [Vec<usize>; 3],

    /// Fine stage-3 evaluation sets: fine plus both interfaces (the
    /// correction summands are computed in the same pass).
    pub stage3_cells: Vec<usize>,
    pub stage3_edges: Vec<usize>,
}

fn neighbor_cells<'a>(mesh: &'a Mesh, i: usize) -> impl Iterator<Item = usize> + 'a {
    mesh.edges_on_cell[i].iter().filter_map(move |&e| {
        let [a, b] = mesh.cells_on_edge[e];
        if a == i {
            (b != crate::mesh::NO_CELL).then_some(b)
        } else {
            Some(a)
        }
    })
}

/// Multi-source BFS hop distance from `sources` over cell adjacency.
fn bfs_distance(mesh: &Mesh, sources: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut dist = vec![usize::MAX; mesh.n_cells];
    let mut frontier: Vec<usize> = Vec::new();
    for s in sources {
        dist[s] = 0;
        frontier.push(s);
    }
    let mut d = 0;
    while !frontier.is_empty() {
        d += 1;
        let mut next = Vec::new();
        for &i in &frontier {
            for j in neighbor_cells(mesh, i) {
                if dist[j] == usize::MAX {
                    dist[j] = d;
                    next.push(j);
                }
            }
        }
        frontier = next;
    }
    dist
}

/// Label every cell and edge given the fine-cell mask and the tendency
/// stencil radius (2 for this discretization).
pub fn label_regions(mesh: &Mesh, fine_mask: &[bool], r: usize) -> Result<LtsLabels> {
    if fine_mask.len() != mesh.n_cells {
        return Err(Error::LengthMismatch {
            left: fine_mask.len(),
            right: mesh.n_cells,
        });
    }
    if r == 0 {
        return Err(Error::Labels("stencil radius must be at least 1".into()));
    }
    let n_fine = fine_mask.iter().filter(|&&f| f).count();
    if n_fine == 0 {
        return Err(Error::Labels("fine mask selects no cells".into()));
    }
    if n_fine == mesh.n_cells {
        return Err(Error::Labels("fine mask selects every cell".into()));
    }

    let dist_to_fine = bfs_distance(
        mesh,
        (0..mesh.n_cells).filter(|&i| fine_mask[i]),
    );
    let dist_to_coarse = bfs_distance(
        mesh,
        (0..mesh.n_cells).filter(|&i| !fine_mask[i]),
    );

    // The coarse side must be deep enough to host r rings of interface one
    // and r rings of interface two.
    for ring in 1..=(2 * r) {
        if !(0..mesh.n_cells).any(|i| !fine_mask[i] && dist_to_fine[i] == ring) {
            return Err(Error::Labels(format!(
                "coarse region cannot host {r}-ring interface layers: \
                 no coarse cell at distance {ring} from the fine region"
            )));
        }
    }

    let mut cell_region = Vec::with_capacity(mesh.n_cells);
    for i in 0..mesh.n_cells {
        let region = if fine_mask[i] {
            let depth = dist_to_coarse[i];
            let layer = depth.div_ceil(r);
            if layer <= 5 {
                Region::FineAdj(layer as u8)
            } else {
                Region::Fine
            }
        } else {
            let d = dist_to_fine[i];
            if d <= r {
                Region::Interface1
            } else if d <= 2 * r {
                Region::Interface2
            } else {
                Region::CoarseInterior
            }
        };
        cell_region.push(region);
    }

    // Edge rule: take the label of the adjacent cell closest to the fine
    // region.
    let mut edge_region = Vec::with_capacity(mesh.n_edges);
    for e in 0..mesh.n_edges {
        let [c1, c2] = mesh.cells_on_edge[e];
        let r1 = cell_region[c1];
        let r2 = if c2 == crate::mesh::NO_CELL {
            r1
        } else {
            cell_region[c2]
        };
        edge_region.push(if r2.fine_rank() < r1.fine_rank() { r2 } else { r1 });
    }

    Ok(build_labels(mesh, cell_region, edge_region, r))
}

/// Labels marking the whole mesh as coarse interior. A multirate step with
/// these labels degenerates to a single global step.
pub fn all_coarse_labels(mesh: &Mesh) -> LtsLabels {
    build_labels(
        mesh,
        vec![Region::CoarseInterior; mesh.n_cells],
        vec![Region::CoarseInterior; mesh.n_edges],
        2,
    )
}

fn build_labels(
    mesh: &Mesh,
    cell_region: Vec<Region>,
    edge_region: Vec<Region>,
    r: usize,
) -> LtsLabels {
    let cells_where = |pred: &dyn Fn(Region) -> bool| -> Vec<usize> {
        (0..mesh.n_cells).filter(|&i| pred(cell_region[i])).collect()
    };
    let edges_where = |pred: &dyn Fn(Region) -> bool| -> Vec<usize> {
        (0..mesh.n_edges).filter(|&e| pred(edge_region[e])).collect()
    };

    let fine_cells = cells_where(&|r| r.is_fine());
    let fine_edges = edges_where(&|r| r.is_fine());
    let if1_cells = cells_where(&|r| r == Region::Interface1);
    let if1_edges = edges_where(&|r| r == Region::Interface1);
    let if2_cells = cells_where(&|r| r == Region::Interface2);
    let if2_edges = edges_where(&|r| r == Region::Interface2);
    let if12_cells = cells_where(&|r| matches!(r, Region::Interface1 | Region::Interface2));
    let if12_edges = edges_where(&|r| matches!(r, Region::Interface1 | Region::Interface2));
    let coarse_int_cells = cells_where(&|r| r == Region::CoarseInterior);
    let coarse_int_edges = edges_where(&|r| r == Region::CoarseInterior);

    let coarse_side_cell = |r: Region| !r.is_fine();
    let coarse_side_edge = |r: Region| !r.is_fine();

    let h_stage_cells = [
        cells_where(&|r| r.in_fine_adj(5) || coarse_side_cell(r)),
        cells_where(&|r| r.in_fine_adj(3) || coarse_side_cell(r)),
        cells_where(&|r| r.in_fine_adj(1) || coarse_side_cell(r)),
    ];
    let u_stage_edges = [
        edges_where(&|r| r.in_fine_adj(4) || coarse_side_edge(r)),
        edges_where(&|r| r.in_fine_adj(2) || coarse_side_edge(r)),
        edges_where(&|r| matches!(r, Region::Interface1 | Region::CoarseInterior)),
    ];
    let h_stage_cells_wide = [
        (0..mesh.n_cells).collect::<Vec<_>>(),
        (0..mesh.n_cells).collect::<Vec<_>>(),
        (0..mesh.n_cells).collect::<Vec<_>>(),
    ];
    let u_stage_edges_wide = [
        (0..mesh.n_edges).collect::<Vec<_>>(),
        (0..mesh.n_edges).collect::<Vec<_>>(),
        u_stage_edges[2].clone(),
    ];

    let stage3_cells = cells_where(&|r| {
        r.is_fine() || matches!(r, Region::Interface1 | Region::Interface2)
    });
    let stage3_edges = edges_where(&|r| {
        r.is_fine() || matches!(r, Region::Interface1 | Region::Interface2)
    });

    LtsLabels {
        cell_region,
        edge_region,
        stencil_radius: r,
        fine_cells,
        fine_edges,
        if1_cells,
        if1_edges,
        if2_cells,
        if2_edges,
        if12_cells,
        if12_edges,
        coarse_int_cells,
        coarse_int_edges,
        h_stage_cells,
        u_stage_edges,
        h_stage_cells_wide,
        u_stage_edges_wide,
        stage3_cells,
        stage3_edges,
    }
}

/// One stencil-rule violation found by [`validate_labels`].
#[derive(Debug, Clone)]
pub struct LabelViolation {
    /// "cell" or "edge".
    pub kind: &'static str,
    pub index: usize,
    pub own_region: Region,
    pub touched: usize,
    pub touched_region: Region,
}

/// Check that no radius-r stencil reaches more than one region class away:
/// fine stencils touch at most interface one, interface-one stencils at most
/// fine and interface two, and so on.
pub fn validate_labels(mesh: &Mesh, labels: &LtsLabels) -> Vec<LabelViolation> {
    let r = labels.stencil_radius;
    let mut violations = Vec::new();

    let ball = |seeds: &[usize], depth: usize| -> Vec<usize> {
        let mut seen: Vec<usize> = seeds.to_vec();
        let mut frontier = seeds.to_vec();
        for _ in 0..depth {
            let mut next = Vec::new();
            for &i in &frontier {
                for j in neighbor_cells(mesh, i) {
                    if !seen.contains(&j) {
                        seen.push(j);
                        next.push(j);
                    }
                }
            }
            frontier = next;
        }
        seen
    };

    for i in 0..mesh.n_cells {
        let own = labels.cell_region[i];
        for j in ball(&[i], r) {
            let other = labels.cell_region[j];
            if (own.class() as i8 - other.class() as i8).abs() > 1 {
                violations.push(LabelViolation {
                    kind: "cell",
                    index: i,
                    own_region: own,
                    touched: j,
                    touched_region: other,
                });
            }
        }
    }

    for e in 0..mesh.n_edges {
        let own = labels.edge_region[e];
        let [c1, c2] = mesh.cells_on_edge[e];
        let seeds = if c2 == crate::mesh::NO_CELL {
            vec![c1]
        } else {
            vec![c1, c2]
        };
        for j in ball(&seeds, r.saturating_sub(1)) {
            let other = labels.cell_region[j];
            if (own.class() as i8 - other.class() as i8).abs() > 1 {
                violations.push(LabelViolation {
                    kind: "edge",
                    index: e,
                    own_region: own,
                    touched: j,
                    touched_region: other,
                });
            }
        }
    }

    violations
}
