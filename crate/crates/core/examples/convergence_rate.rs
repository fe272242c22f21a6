//! Discrepancy of the joint reconstruction against noise-free data while the
//! noise level is halved and the regularization follows it.
//!
//! ```text
//! cargo run --release --example convergence_rate -- [alpha_scale]
//! ```

use jointrecon::sweep::{rate_experiment, RateConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scale: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(1.0);
    let config = RateConfig {
        alpha_scale: scale,
        ..RateConfig::default()
    };
    let report = rate_experiment(&config, None)?;

    println!("{:>8} {:>10} {:>12} {:>12} {:>8}", "sigma", "delta+eps", "alpha", "discrepancy", "l2");
    for p in &report.points {
        println!(
            "{:>8.4} {:>10.4} {:>12.4e} {:>12.4e} {:>8.4}",
            p.sigma, p.noise, p.alpha, p.discrepancy, p.l2_error
        );
    }
    println!("\nlog-log slope: {:.3}", report.slope);
    Ok(())
}
