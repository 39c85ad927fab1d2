// A small grid of Monte Carlo cells in the reference table CSV layout.
// Replications are seeded per index so the output does
// not depend on the number of threads.

use fpou::montecarlo::{emit_table, reference_grid, run_grid, TableLayout, TableStore};
use fpou::noise::LambdaMode;

pub fn run_example() -> fpou::Result<()> {
    let mut store = TableStore::new(None);
    let configs = reference_grid(10, 1.5, LambdaMode::Explicit(1.0), 100, 2024);
    let grid = run_grid(&configs, &mut store);
    print!("{}", emit_table(&grid, TableLayout::Both)?);

    // the fBm-like regime reports the likelihood estimator only
    let fbm = reference_grid(10, 1.5, LambdaMode::FbmSymmetric, 100, 2024);
    print!("{}", emit_table(&run_grid(&fbm[..3], &mut store), TableLayout::MleOnly)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> fpou::Result<()> {
    run_example()
}
