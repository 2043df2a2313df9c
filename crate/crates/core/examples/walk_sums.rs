//! Truncated weighted-walk sums converge to `u_j a_j - 1`, with a rigorous
//! bound on the part not yet summed.
//!
//! ```bash
//! cargo run -p robustnet --example walk_sums
//! ```

use robustnet::{robustness_vector, walk_sum_oracle, Network, NodeId, Tolerances};

fn main() -> robustnet::Result<()> {
    let tol = Tolerances::default();
    let net = Network::from_triples(vec![1.0, 1.0], &[(1, 2, 0.6), (2, 1, 0.5)])?;
    let u = robustness_vector(&net, &tol)?.u().to_vec();
    let target = NodeId::new(1);
    let limit = u[0] * net.a(target) - 1.0;
    println!("u_1 a_1 - 1 = {limit}");
    for k in [1, 5, 10, 20, 50] {
        let w = walk_sum_oracle(&net, target, k, &tol)?;
        println!(
            "K={k:>2}: sum {:.12}  gap {:.3e}  tail bound {:.3e}",
            w.sum,
            limit - w.sum,
            w.tail_bound
        );
    }
    Ok(())
}
