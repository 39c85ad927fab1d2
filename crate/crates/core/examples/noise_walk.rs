// Centered Poisson noise, its Bernoulli encoding and the fractional walk
// obtained by pushing it through the coefficient table.

use fpou::kernel::{build_table, QuadMeta};
use fpou::noise::{binomial_poisson_tv, fractional_path, sample_eta, stream_seed, to_bernoulli, NoiseSpec};
use fpou::stats;

pub fn run_example() -> fpou::Result<()> {
    let table = build_table(10, 2.0, 0.7, 1.0, QuadMeta::default())?;
    let spec = NoiseSpec::for_table(&table);
    let eta = sample_eta(spec, stream_seed(7, 0));
    println!(
        "n = {}, values {{{:.4}, {:.4}}}, sample mean {:.4}, variance {:.4} (exact {:.4})",
        spec.n,
        spec.low(),
        spec.high(),
        stats::mean(eta.values()),
        stats::variance(eta.values()),
        spec.variance()
    );
    let bits = to_bernoulli(&eta)?;
    println!("jumps observed: {}", bits.iter().filter(|&&b| b == 1).count());

    let walk = fractional_path(&table, eta.values())?;
    println!("fractional walk at t = 1, 5, 10: {:.4} {:.4} {:.4}", walk[10], walk[50], walk[100]);

    for n in [10, 100, 1000] {
        println!("TV(Binomial(n, 1/n), Poisson(1)) at n = {n}: {:.3e}", binomial_poisson_tv(n, 1.0)?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> fpou::Result<()> {
    run_example()
}
