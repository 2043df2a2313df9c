//! Simulating the network under bounded disturbances: the peak never
//! exceeds the certified gain, and the worst case is attained by the
//! constant unit input.
//!
//! ```bash
//! cargo run -p robustnet --example simulate_witness
//! ```

use robustnet::golden::three_node;
use robustnet::simulate::{simulate, witness_bound, DisturbanceSignal, Integrator, SimOptions, WitnessOptions};
use robustnet::Tolerances;

fn main() -> robustnet::Result<()> {
    let tol = Tolerances::default();
    let net = three_node();

    let report = witness_bound(&net, 4.0, 200, 7, &WitnessOptions::default(), &tol)?;
    println!(
        "{} random trials: max peak/amplitude {:.4} (bound 4, passed: {})",
        report.trials.len(),
        report.max_ratio,
        report.passed
    );

    let opts = SimOptions::new(40.0).step(0.01).integrator(Integrator::Exact).record_stride(500);
    let traj = simulate(&net, &DisturbanceSignal::ones(3), &opts)?;
    for (t, x) in traj.times.iter().zip(&traj.states) {
        println!("t = {t:>4.1}  x = [{:.6}, {:.6}, {:.6}]", x[0], x[1], x[2]);
    }
    println!("peak under the unit input: {:.9}", traj.global_peak);
    Ok(())
}
