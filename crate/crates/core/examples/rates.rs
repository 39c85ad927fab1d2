// Estimator variance along a grid of m next to the rate `m^{3-α} κ(1-κ)`,
// with the fitted log-log slope.

use fpou::montecarlo::{emit_rates, run_rates, ExperimentConfig, TableStore};
use fpou::stats::log_log_slope;

pub fn run_example() -> fpou::Result<()> {
    let base = ExperimentConfig {
        alpha: 1.5,
        reps: 200,
        ..Default::default()
    };
    let mut store = TableStore::new(None);
    let rows = run_rates(&[8, 16, 32], &base, &mut store)?;
    print!("{}", emit_rates(&rows)?);
    let ms: Vec<f64> = rows.iter().map(|r| r.m as f64).collect();
    let var: Vec<f64> = rows.iter().map(|r| r.var_mle).collect();
    let bound: Vec<f64> = rows.iter().map(|r| r.bound).collect();
    println!(
        "slope of variance {:.3}, slope of rate {:.3}",
        log_log_slope(&ms, &var),
        log_log_slope(&ms, &bound)
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> fpou::Result<()> {
    run_example()
}
