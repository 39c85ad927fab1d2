// The Volterra kernel and the triangular coefficient table built from it,
// including a round trip through the binary cache file.

use fpou::cache::load_or_build;
use fpou::kernel::{build_table, kernel_eval, kernel_exact, KernelParams, QuadMeta, TableSpec, DEFAULT_MAX_N};

pub fn run_example() -> fpou::Result<()> {
    let params = KernelParams::new(0.75)?;
    for (t, s) in [(1.0, 0.25), (1.0, 0.5), (1.0, 0.9)] {
        println!(
            "K({t}, {s}) closed form {:.12}  quadrature {:.12}",
            kernel_exact(t, s, &params)?,
            kernel_eval(t, s, &params, 32)?
        );
    }

    let table = build_table(10, 1.5, 0.75, 1.0, QuadMeta::default())?;
    println!("m = {}, n = {}, kappa = {:.6}", table.m(), table.n(), table.kappa());
    for k in 1..=4 {
        println!("row {k}: {:?}", table.row(k));
    }
    println!("F_1..F_4 = {:?}", (1..=4).map(|j| table.big_f(j)).collect::<Vec<_>>());

    let dir = std::env::temp_dir().join(format!("fpou-example-{}", std::process::id()));
    let spec = TableSpec::new(10, 1.5, 0.75, 1.0, QuadMeta::default())?;
    let first = load_or_build(&spec, Some(&dir), DEFAULT_MAX_N)?;
    let second = load_or_build(&spec, Some(&dir), DEFAULT_MAX_N)?;
    println!(
        "cache {:016x} reused on second load: {}, identical: {}",
        second.checksum,
        second.reused,
        first.table.entries() == second.table.entries()
    );
    let _ = std::fs::remove_dir_all(&dir);
    Ok(())
}

#[allow(dead_code)]
fn main() -> fpou::Result<()> {
    run_example()
}
