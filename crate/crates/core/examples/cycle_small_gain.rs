//! The cycle small-gain condition: a quick necessary test that can refute
//! a proposed gain level without solving the full system.
//!
//! ```bash
//! cargo run -p robustnet --example cycle_small_gain
//! ```

use robustnet::{cycle_small_gain, robustness_vector, Network, Tolerances};

fn main() -> robustnet::Result<()> {
    let tol = Tolerances::default();
    let net = Network::from_triples(
        vec![1.0, 1.0, 2.0],
        &[(2, 1, 0.5), (1, 2, 0.5), (3, 2, 1.0), (1, 3, 0.5)],
    )?;
    let gamma = robustness_vector(&net, &tol)?.gamma();
    println!("minimal gamma: {gamma:.6}");

    for level in [gamma, 1.0] {
        let report = cycle_small_gain(&net, level, &tol)?;
        println!("level {level:.6}: {} cycle(s)", report.cycles.len());
        for c in &report.cycles {
            println!(
                "  {:?}: weight {:.4}, 1/(1-w) = {:.4}, violations at {:?}",
                c.nodes.iter().map(|n| n.get()).collect::<Vec<_>>(),
                c.weight,
                c.bound,
                c.checks.iter().filter(|k| !k.passes).map(|k| k.node.get()).collect::<Vec<_>>()
            );
        }
        println!("  necessary condition holds: {}", report.passes());
    }
    Ok(())
}
