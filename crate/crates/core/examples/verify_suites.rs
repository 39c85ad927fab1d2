// The invariant suites at reduced sizes, printing each check.

use fpou::montecarlo::{ExperimentConfig, TableStore};
use fpou::verify::{
    run_bound_suite, run_distribution_suite, run_identity_suite, run_martingale_suite, MartingaleOptions,
    VerifyReport,
};

fn show(report: &VerifyReport) {
    for c in &report.checks {
        println!(
            "{:<14} {:<40} {:?} measured {:.3e} threshold {:.3e}",
            report.suite, c.name, c.status, c.measured, c.threshold
        );
    }
}

pub fn run_example() -> fpou::Result<()> {
    let mut store = TableStore::new(None);
    let base = ExperimentConfig {
        m: 10,
        alpha: 2.0,
        reps: 20,
        ..Default::default()
    };
    show(&run_identity_suite(&base, &mut store)?);
    let grid = [(10, 0.6), (10, 0.9), (50, 0.75)];
    let moments = ExperimentConfig { reps: 500, ..base };
    show(&run_bound_suite(&grid, 2.0, 1.0, &moments, &mut store)?);
    let dist = ExperimentConfig { m: 100, alpha: 1.0, reps: 2000, ..base };
    show(&run_distribution_suite(&dist, &mut store)?);
    let mart = ExperimentConfig { reps: 400, ..base };
    show(&run_martingale_suite(&mart, MartingaleOptions::default(), &mut store)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> fpou::Result<()> {
    run_example()
}
