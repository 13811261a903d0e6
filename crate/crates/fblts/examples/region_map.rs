//! Label a mesh for local time-stepping and print the region decomposition:
//! fine interior, the five nested interface-adjacent fine layers, the two
//! coarse interface layers, and the coarse interior.
//!
//!     cargo run --release --example region_map

use fblts::lts::{label_regions, validate_labels, Region};
use fblts::mesh::build_periodic_hex_mesh;

fn main() {
    let nx = 40;
    let mesh = build_periodic_hex_mesh(nx, 8, 1000.0).expect("mesh");
    // Fine band: the left half of the strip.
    let mask: Vec<bool> = (0..mesh.n_cells).map(|i| i % nx < 20).collect();
    let labels = label_regions(&mesh, &mask, 2).expect("labels");

    let mut counts = std::collections::BTreeMap::new();
    for &r in &labels.cell_region {
        *counts.entry(format!("{r:?}")).or_insert(0usize) += 1;
    }
    println!("cell region sizes:");
    for (name, count) in &counts {
        println!("  {name:<16} {count}");
    }

    println!("\ncoarse-advancement stage extents (cells):");
    for (s, ext) in labels.h_stage_cells.iter().enumerate() {
        println!("  thickness stage {}: {}", s + 1, ext.len());
    }
    println!("velocity stage extents (edges):");
    for (s, ext) in labels.u_stage_edges.iter().enumerate() {
        println!("  velocity stage {}:  {}", s + 1, ext.len());
    }

    let violations = validate_labels(&mesh, &labels);
    println!(
        "\nstencil validation: {}",
        if violations.is_empty() {
            "no radius-2 stencil crosses more than one region class".to_string()
        } else {
            format!("{} violations", violations.len())
        }
    );

    // One text row of the strip as a quick visual.
    print!("\nrow 0 regions (column order): ");
    for i in 0..nx {
        let c = match labels.cell_region[i] {
            Region::Fine => 'F',
            Region::FineAdj(l) => char::from_digit(l as u32, 10).unwrap(),
            Region::Interface1 => 'i',
            Region::Interface2 => 'I',
            Region::CoarseInterior => 'C',
        };
        print!("{c}");
    }
    println!();
}
