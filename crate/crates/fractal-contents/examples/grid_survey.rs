//! Survey a couple of planar models on a grid: rasterize, measure the
//! distance field, and compare grid measurements against closed forms.
//!
//! Run with: cargo run --example grid_survey

use std::f64::consts::PI;

use fractal_contents::{
    boundary_length, covering_packing_counts, distance_transform, footprint_mt, lens_area,
    parallel_volume, rasterize, write_pgm, SetModel,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let h = 1.0 / 256.0;

    println!("== disc of radius 1, h = {h} ==");
    let disc = SetModel::Disc { radius: 1.0 };
    let grid = rasterize(&disc, h, 0.4)?;
    println!(
        "grid {} x {} cells, {} occupied (area {:.4}, disc area {:.4})",
        grid.nx,
        grid.ny,
        grid.occupied_count(),
        grid.occupied_count() as f64 * h * h,
        PI
    );
    let field = distance_transform(&grid)?;
    for eps in [0.1, 0.2, 0.3] {
        let v = parallel_volume(&field, eps)?;
        let exact = 2.0 * PI * eps + PI * eps * eps;
        println!(
            "V(A_{eps} \\ A) grid = {v:.5}, exact = {exact:.5}, rel err = {:+.2e}",
            (v - exact) / exact
        );
    }
    let len = boundary_length(&field, 0.25)?;
    println!(
        "level set at r = 0.25: length grid = {len:.5}, exact = {:.5}",
        2.0 * PI * 1.25
    );

    println!();
    println!("== gasket, h = {h} ==");
    let gasket = SetModel::SierpinskiGasket;
    let grid = rasterize(&gasket, h, 0.2)?;
    println!("grid {} x {} cells, {} occupied", grid.nx, grid.ny, grid.occupied_count());
    let field = distance_transform(&grid)?;
    let kappa = lens_area();
    for t in [16.0 * h, 32.0 * h] {
        let fp = footprint_mt(&field, t, 2.0 * h)?;
        let (theta, packing) = covering_packing_counts(&field, &fp, t)?;
        let v = parallel_volume(&field, t)?;
        println!(
            "t = {t:.5}: witnesses {}, covering {theta}, packing {packing}, \
             V = {v:.5} >= lens bound {:.5}",
            fp.cells.len(),
            packing as f64 * kappa * t * t
        );
    }

    let out = std::env::temp_dir().join("gasket.pgm");
    write_pgm(&grid, &out)?;
    println!("wrote {}", out.display());
    Ok(())
}
