//! Joint reconstruction of image and system matrix on the 1D academic
//! instance, compared with an image-only reconstruction using the inexact
//! model matrix.
//!
//! ```text
//! cargo run --release --example academic_joint -- [sigma] [seed]
//! ```

use std::time::Instant;

use jointrecon::image_solver::{solve_c, CSchedule};
use jointrecon::joint::{solve_joint, JointConfig};
use jointrecon::metrics::{l2_error, ssim_1d, SsimOptions};
use jointrecon::testbed::{generate_instance, PhantomSpec};
use jointrecon::{KaczmarzSchedule, RegParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let sigma: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0.05);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1);

    let m = 50;
    let instance = generate_instance(m, sigma, seed, &PhantomSpec::default_for(m))?;
    let truth = instance.c_true.clone().expect("synthetic instance");
    let params = RegParams::new(2f64.powi(-16), 2f64.powi(-11), 0.25, 1.0)?;

    let started = Instant::now();
    let outcome = solve_joint(&instance, &params, &JointConfig::new(KaczmarzSchedule::ACADEMIC))?;
    let elapsed = started.elapsed();

    let baseline = solve_c(&instance.s_mod, &instance.u, &params, &CSchedule::sweeps(500))?.c_final;

    let opts = SsimOptions::default();
    let first = outcome.history.records.first().map(|r| r.objective.total);
    let last = outcome.history.last().map(|r| r.objective.total);
    println!("sigma = {sigma}, seed = {seed}, {} outer iterations in {elapsed:.2?}", outcome.history.len());
    println!("J: initial {:.6e}, first outer {:?}, last {:?}", outcome.history.initial_objective.total, first, last);
    println!(
        "joint      l2 = {:.4}  ssim = {:.4}",
        l2_error(&outcome.c, &truth)?,
        ssim_1d(&outcome.c, &truth, &opts)?
    );
    println!(
        "c with S_mod l2 = {:.4}  ssim = {:.4}",
        l2_error(&baseline, &truth)?,
        ssim_1d(&baseline, &truth, &opts)?
    );
    println!("\n  m   c*      joint   c(S_mod)");
    for (i, ((t, j), b)) in truth.iter().zip(outcome.c.iter()).zip(baseline.iter()).enumerate() {
        println!("{i:3}  {t:6.3}  {j:6.3}  {b:6.3}");
    }
    Ok(())
}
