//! Grid search over regularization parameters for all four reconstruction
//! methods, with the best run per method and the results as CSV.
//!
//! ```text
//! cargo run --release --example parameter_sweep -- [sigma] [out.csv]
//! ```

use jointrecon::io::write_results_csv;
use jointrecon::sweep::{
    enumerate_grid, powers_of_two, run_sweep, select_best, GridSpec, Method, Metric, SweepOptions,
};
use jointrecon::testbed::{generate_instance, PhantomSpec};
use jointrecon::KaczmarzSchedule;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::init();
    let mut args = std::env::args().skip(1);
    let sigma: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0.025);
    let out = args.next().unwrap_or_else(|| "sweep_results.csv".into());

    let instance = generate_instance(50, sigma, 1, &PhantomSpec::default_for(50))?;
    let grid = GridSpec {
        gamma: powers_of_two([0, 2, 4]),
        mu: powers_of_two([0, 2, 4]),
        alpha: powers_of_two([12, 15, 18]),
        lambda: powers_of_two([4, 8, 12]),
        methods: Method::ALL.to_vec(),
    };
    println!("{} combinations", enumerate_grid(&grid)?.len());

    let records = run_sweep(&instance, &grid, &SweepOptions::new(KaczmarzSchedule::ACADEMIC))?;
    write_results_csv(&records, &out)?;
    println!("wrote {out}\n");

    println!("{:<14} {:>8} {:>8} {:>10} {:>10} {:>10} {:>10}", "method", "l2", "ssim", "gamma", "mu", "alpha", "lambda");
    for method in Method::ALL {
        let runs: Vec<_> = records.iter().filter(|r| r.method == method).cloned().collect();
        let best = select_best(&runs, Metric::L2)?.best;
        println!(
            "{:<14} {:>8.4} {:>8.4} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.3e}",
            method.as_str(), best.l2_error, best.ssim, best.gamma, best.mu, best.alpha, best.lambda
        );
    }
    Ok(())
}
