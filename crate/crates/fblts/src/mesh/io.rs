//! Mesh file format: a self-describing JSON document whose arrays carry the
//! mesh fields under their canonical names, all indices 0-based, floats
//! written with 17 significant digits so save/load round-trips bit-for-bit.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::Value;

use super::{Mesh, NO_CELL};
use crate::error::Error;
use crate::Result;

pub fn save(mesh: &Mesh, path: &Path) -> Result<()> {
    let mut s = String::with_capacity(1 << 20);
    s.push_str("{\n");
    writeln!(s, "  \"nCells\": {},", mesh.n_cells).unwrap();
    writeln!(s, "  \"nEdges\": {},", mesh.n_edges).unwrap();
    writeln!(s, "  \"nVertices\": {},", mesh.n_vertices).unwrap();

    write_index_pairs(
        &mut s,
        "cellsOnEdge",
        mesh.cells_on_edge.iter().map(|&[a, b]| {
            [
                a as i64,
                if b == NO_CELL { -1 } else { b as i64 },
            ]
        }),
    );
    write_index_rows(&mut s, "edgesOnCell", &mesh.edges_on_cell);
    write_index_pairs(
        &mut s,
        "verticesOnEdge",
        mesh.vertices_on_edge.iter().map(|&[a, b]| [a as i64, b as i64]),
    );
    write_index_rows(&mut s, "edgesOnVertex", &mesh.edges_on_vertex);
    write_index_rows(&mut s, "cellsOnVertex", &mesh.cells_on_vertex);
    write_f64_array(&mut s, "areaCell", &mesh.area_cell);
    write_f64_array(&mut s, "areaDual", &mesh.area_dual);
    write_f64_rows(&mut s, "kiteArea", &mesh.kite_area);
    write_f64_array(&mut s, "lEdge", &mesh.l_edge);
    write_f64_array(&mut s, "dEdge", &mesh.d_edge);
    write_index_pairs(
        &mut s,
        "nSign",
        mesh.n_sign.iter().map(|&[a, b]| [a as i64, b as i64]),
    );
    write_index_pairs(
        &mut s,
        "tSign",
        mesh.t_sign.iter().map(|&[a, b]| [a as i64, b as i64]),
    );
    write_index_rows(&mut s, "edgesOnEdge", &mesh.edges_on_edge);
    write_f64_rows(&mut s, "perpWeights", &mesh.perp_weights);
    write_f64_array(&mut s, "bottomElevation", &mesh.bottom_elevation);
    write_f64_array(&mut s, "restingDepth", &mesh.resting_depth);
    write_f64_array(&mut s, "coriolisVertex", &mesh.coriolis_vertex);
    write_f64_array(&mut s, "xCell", &mesh.x_cell);
    write_f64_array(&mut s, "yCell", &mesh.y_cell);
    write_f64_array(&mut s, "xEdge", &mesh.x_edge);
    write_f64_array(&mut s, "yEdge", &mesh.y_edge);
    write_f64_array(&mut s, "xVertex", &mesh.x_vertex);
    write_f64_array(&mut s, "yVertex", &mesh.y_vertex);
    writeln!(
        s,
        "  \"latticeA\": [{}, {}],",
        fmt_f64(mesh.lattice_a[0]),
        fmt_f64(mesh.lattice_a[1])
    )
    .unwrap();
    writeln!(
        s,
        "  \"latticeB\": [{}, {}]",
        fmt_f64(mesh.lattice_b[0]),
        fmt_f64(mesh.lattice_b[1])
    )
    .unwrap();
    s.push_str("}\n");

    std::fs::write(path, s).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn load(path: &Path) -> Result<Mesh> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;

    let n_cells = get_count(&doc, "nCells")?;
    let n_edges = get_count(&doc, "nEdges")?;
    let n_vertices = get_count(&doc, "nVertices")?;

    let cells_on_edge_raw = get_i64_pairs(&doc, "cellsOnEdge", n_edges)?;
    let mut cells_on_edge = Vec::with_capacity(n_edges);
    for (e, [a, b]) in cells_on_edge_raw.iter().enumerate() {
        let a = check_index("cellsOnEdge", e, *a, n_cells, false)?;
        let b = check_index("cellsOnEdge", e, *b, n_cells, true)?;
        cells_on_edge.push([a, b]);
    }

    let edges_on_cell = get_index_rows(&doc, "edgesOnCell", n_cells, n_edges)?;
    let vertices_on_edge_raw = get_i64_pairs(&doc, "verticesOnEdge", n_edges)?;
    let mut vertices_on_edge = Vec::with_capacity(n_edges);
    for (e, [a, b]) in vertices_on_edge_raw.iter().enumerate() {
        let a = check_index("verticesOnEdge", e, *a, n_vertices, false)?;
        let b = check_index("verticesOnEdge", e, *b, n_vertices, false)?;
        vertices_on_edge.push([a, b]);
    }
    let edges_on_vertex = get_index_rows(&doc, "edgesOnVertex", n_vertices, n_edges)?;
    let cells_on_vertex = get_index_rows(&doc, "cellsOnVertex", n_vertices, n_cells)?;

    let area_cell = get_f64_array(&doc, "areaCell", n_cells)?;
    let area_dual = get_f64_array(&doc, "areaDual", n_vertices)?;
    let kite_area = get_f64_rows(&doc, "kiteArea", n_vertices)?;
    for (v, row) in kite_area.iter().enumerate() {
        if row.len() != cells_on_vertex[v].len() {
            return Err(Error::MeshField {
                field: "kiteArea".into(),
                index: v,
                message: format!(
                    "row length {} does not match cellsOnVertex length {}",
                    row.len(),
                    cells_on_vertex[v].len()
                ),
            });
        }
    }
    let l_edge = get_f64_array(&doc, "lEdge", n_edges)?;
    let d_edge = get_f64_array(&doc, "dEdge", n_edges)?;

    let n_sign = get_sign_pairs(&doc, "nSign", n_edges)?;
    let t_sign = get_sign_pairs(&doc, "tSign", n_edges)?;
    for (e, [a, b]) in n_sign.iter().enumerate() {
        if cells_on_edge[e][1] != NO_CELL && a * b != -1 {
            return Err(Error::MeshField {
                field: "nSign".into(),
                index: e,
                message: format!("interior edge has nSign pair ({a}, {b}); product must be -1"),
            });
        }
    }
    for (e, [a, b]) in t_sign.iter().enumerate() {
        if a * b != -1 {
            return Err(Error::MeshField {
                field: "tSign".into(),
                index: e,
                message: format!("tSign pair ({a}, {b}); product must be -1"),
            });
        }
    }

    let edges_on_edge = get_index_rows(&doc, "edgesOnEdge", n_edges, n_edges)?;
    let perp_weights = get_f64_rows(&doc, "perpWeights", n_edges)?;
    for (e, row) in perp_weights.iter().enumerate() {
        if row.len() != edges_on_edge[e].len() {
            return Err(Error::MeshField {
                field: "perpWeights".into(),
                index: e,
                message: format!(
                    "row length {} does not match edgesOnEdge length {}",
                    row.len(),
                    edges_on_edge[e].len()
                ),
            });
        }
    }

    let bottom_elevation = get_f64_array(&doc, "bottomElevation", n_cells)?;
    let resting_depth = get_f64_array(&doc, "restingDepth", n_cells)?;
    let coriolis_vertex = get_f64_array(&doc, "coriolisVertex", n_vertices)?;
    let x_cell = get_f64_array(&doc, "xCell", n_cells)?;
    let y_cell = get_f64_array(&doc, "yCell", n_cells)?;
    let x_edge = get_f64_array(&doc, "xEdge", n_edges)?;
    let y_edge = get_f64_array(&doc, "yEdge", n_edges)?;
    let x_vertex = get_f64_array(&doc, "xVertex", n_vertices)?;
    let y_vertex = get_f64_array(&doc, "yVertex", n_vertices)?;
    let lattice_a = get_pair_f64(&doc, "latticeA")?;
    let lattice_b = get_pair_f64(&doc, "latticeB")?;

    let mut mesh = Mesh {
        n_cells,
        n_edges,
        n_vertices,
        cells_on_edge,
        edges_on_cell,
        vertices_on_edge,
        edges_on_vertex,
        cells_on_vertex,
        area_cell,
        area_dual,
        kite_area,
        l_edge,
        d_edge,
        n_sign,
        t_sign,
        edges_on_edge,
        perp_weights,
        bottom_elevation,
        resting_depth,
        coriolis_vertex,
        x_cell,
        y_cell,
        x_edge,
        y_edge,
        x_vertex,
        y_vertex,
        lattice_a,
        lattice_b,
        edge_sign_on_cell: Vec::new(),
        edge_sign_on_vertex: Vec::new(),
    };
    mesh.rebuild_derived()?;
    mesh.check_invariants()?;
    Ok(mesh)
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_f64_array(s: &mut String, name: &str, data: &[f64]) {
    write!(s, "  \"{name}\": [").unwrap();
    for (i, x) in data.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        s.push_str(&fmt_f64(*x));
    }
    s.push_str("],\n");
}

fn write_f64_rows(s: &mut String, name: &str, data: &[Vec<f64>]) {
    write!(s, "  \"{name}\": [").unwrap();
    for (i, row) in data.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        s.push('[');
        for (j, x) in row.iter().enumerate() {
            if j > 0 {
                s.push_str(", ");
            }
            s.push_str(&fmt_f64(*x));
        }
        s.push(']');
    }
    s.push_str("],\n");
}

fn write_index_rows(s: &mut String, name: &str, data: &[Vec<usize>]) {
    write!(s, "  \"{name}\": [").unwrap();
    for (i, row) in data.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        s.push('[');
        for (j, x) in row.iter().enumerate() {
            if j > 0 {
                s.push_str(", ");
            }
            write!(s, "{x}").unwrap();
        }
        s.push(']');
    }
    s.push_str("],\n");
}

fn write_index_pairs(s: &mut String, name: &str, data: impl Iterator<Item = [i64; 2]>) {
    write!(s, "  \"{name}\": [").unwrap();
    for (i, [a, b]) in data.enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        write!(s, "[{a}, {b}]").unwrap();
    }
    s.push_str("],\n");
}

fn field<'a>(doc: &'a Value, name: &str) -> Result<&'a Value> {
    doc.get(name).ok_or_else(|| Error::MeshField {
        field: name.into(),
        index: 0,
        message: "missing field".into(),
    })
}

fn get_count(doc: &Value, name: &str) -> Result<usize> {
    field(doc, name)?
        .as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| Error::MeshField {
            field: name.into(),
            index: 0,
            message: "expected a nonnegative integer".into(),
        })
}

fn get_array<'a>(doc: &'a Value, name: &str, len: usize) -> Result<&'a Vec<Value>> {
    let arr = field(doc, name)?.as_array().ok_or_else(|| Error::MeshField {
        field: name.into(),
        index: 0,
        message: "expected an array".into(),
    })?;
    if arr.len() != len {
        return Err(Error::MeshField {
            field: name.into(),
            index: arr.len().min(len),
            message: format!("expected length {len}, got {}", arr.len()),
        });
    }
    Ok(arr)
}

fn get_f64_array(doc: &Value, name: &str, len: usize) -> Result<Vec<f64>> {
    let arr = get_array(doc, name, len)?;
    arr.iter()
        .enumerate()
        .map(|(i, v)| {
            v.as_f64().ok_or_else(|| Error::MeshField {
                field: name.into(),
                index: i,
                message: "expected a number".into(),
            })
        })
        .collect()
}

fn get_f64_rows(doc: &Value, name: &str, len: usize) -> Result<Vec<Vec<f64>>> {
    let arr = get_array(doc, name, len)?;
    arr.iter()
        .enumerate()
        .map(|(i, row)| {
            let row = row.as_array().ok_or_else(|| Error::MeshField {
                field: name.into(),
                index: i,
                message: "expected an array row".into(),
            })?;
            row.iter()
                .map(|v| {
                    v.as_f64().ok_or_else(|| Error::MeshField {
                        field: name.into(),
                        index: i,
                        message: "expected a number".into(),
                    })
                })
                .collect()
        })
        .collect()
}

fn get_index_rows(doc: &Value, name: &str, len: usize, bound: usize) -> Result<Vec<Vec<usize>>> {
    let arr = get_array(doc, name, len)?;
    arr.iter()
        .enumerate()
        .map(|(i, row)| {
            let row = row.as_array().ok_or_else(|| Error::MeshField {
                field: name.into(),
                index: i,
                message: "expected an array row".into(),
            })?;
            row.iter()
                .map(|v| {
                    let x = v.as_u64().ok_or_else(|| Error::MeshField {
                        field: name.into(),
                        index: i,
                        message: "expected a nonnegative index".into(),
                    })? as usize;
                    if x >= bound {
                        return Err(Error::MeshField {
                            field: name.into(),
                            index: i,
                            message: format!("index {x} out of range (< {bound})"),
                        });
                    }
                    Ok(x)
                })
                .collect()
        })
        .collect()
}

fn get_i64_pairs(doc: &Value, name: &str, len: usize) -> Result<Vec<[i64; 2]>> {
    let arr = get_array(doc, name, len)?;
    arr.iter()
        .enumerate()
        .map(|(i, v)| {
            let pair = v.as_array().filter(|p| p.len() == 2).ok_or_else(|| {
                Error::MeshField {
                    field: name.into(),
                    index: i,
                    message: "expected a pair".into(),
                }
            })?;
            let a = pair[0].as_i64().ok_or_else(|| Error::MeshField {
                field: name.into(),
                index: i,
                message: "expected an integer".into(),
            })?;
            let b = pair[1].as_i64().ok_or_else(|| Error::MeshField {
                field: name.into(),
                index: i,
                message: "expected an integer".into(),
            })?;
            Ok([a, b])
        })
        .collect()
}

fn get_sign_pairs(doc: &Value, name: &str, len: usize) -> Result<Vec<[i8; 2]>> {
    let pairs = get_i64_pairs(doc, name, len)?;
    pairs
        .into_iter()
        .enumerate()
        .map(|(i, [a, b])| {
            if (a != 1 && a != -1) || (b != 1 && b != -1) {
                return Err(Error::MeshField {
                    field: name.into(),
                    index: i,
                    message: format!("signs must be +1 or -1, got ({a}, {b})"),
                });
            }
            Ok([a as i8, b as i8])
        })
        .collect()
}

fn check_index(name: &str, row: usize, value: i64, bound: usize, allow_missing: bool) -> Result<usize> {
    if value == -1 && allow_missing {
        return Ok(NO_CELL);
    }
    if value < 0 || value as usize >= bound {
        return Err(Error::MeshField {
            field: name.into(),
            index: row,
            message: format!("index {value} out of range (< {bound})"),
        });
    }
    Ok(value as usize)
}

fn get_pair_f64(doc: &Value, name: &str) -> Result<[f64; 2]> {
    let arr = get_array(doc, name, 2)?;
    Ok([
        arr[0].as_f64().ok_or_else(|| Error::MeshField {
            field: name.into(),
            index: 0,
            message: "expected a number".into(),
        })?,
        arr[1].as_f64().ok_or_else(|| Error::MeshField {
            field: name.into(),
            index: 1,
            message: "expected a number".into(),
        })?,
    ])
}
