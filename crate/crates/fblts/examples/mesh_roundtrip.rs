//! Generate a mesh, write it to the self-describing text format, read it
//! back, and confirm the round trip is bit-exact; then run the validation
//! report.
//!
//!     cargo run --release --example mesh_roundtrip

use fblts::mesh::build_periodic_hex_mesh;
use fblts::Mesh;

fn main() {
    let mesh = build_periodic_hex_mesh(8, 8, 1000.0).expect("mesh");
    let path = std::env::temp_dir().join("fblts_example_mesh.json");
    mesh.save(&path).expect("save");
    let loaded = Mesh::load(&path).expect("load");
    println!(
        "wrote and reloaded {} ({} cells, {} edges, {} vertices)",
        path.display(),
        loaded.n_cells,
        loaded.n_edges,
        loaded.n_vertices
    );
    println!("bit-exact round trip: {}", mesh == loaded);

    let report = loaded.validate();
    for check in &report.checks {
        println!(
            "  {}: {}",
            if check.pass { "pass" } else { "FAIL" },
            check.name
        );
    }
    println!(
        "boundary edges: {}; conservation hypotheses {}",
        report.boundary_edges,
        if report.conservation_hypothesis { "hold" } else { "do not hold" }
    );
    std::fs::remove_file(&path).ok();
}
