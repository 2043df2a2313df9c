//! Robustness vector and minimal gain of a three-node cascade.
//!
//! ```bash
//! cargo run -p robustnet --example golden_example
//! ```

use robustnet::{analyze, Network, Tolerances};

fn main() -> robustnet::Result<()> {
    // x1 drives x2 and x3, x2 drives x3; every node decays at rate 1.
    let net = Network::from_triples(vec![1.0, 1.0, 1.0], &[(2, 1, 1.0), (3, 1, 1.0), (3, 2, 1.0)])?;
    let report = analyze(&net, &Tolerances::default())?;

    println!("stable:          {}", report.stable);
    println!("spectral radius: {}", report.spectral_radius);
    println!("u:               {:?}", report.u());
    println!("minimal gamma:   {}", report.gamma());
    println!("worst node(s):   {:?}", report.argmax.unwrap_or_default());
    Ok(())
}
