//! Making an edge addition scalable by raising the head's self-feedback,
//! and the local sufficient tests that avoid a global re-solve.
//!
//! ```bash
//! cargo run -p robustnet --example repair
//! ```

use robustnet::golden::four_node;
use robustnet::{
    analyze, apply, diagonal_dominance_check, propose_repair, robustness_vector,
    sufficient_local_check, Certificate, NewEdge, StructuralChange, Tolerances,
};

fn main() -> robustnet::Result<()> {
    let tol = Tolerances::default();
    let net = four_node();
    let edge = NewEdge::new(4, 2, 0.1);
    let cert = Certificate::from_report(&robustness_vector(&net, &tol)?).expect("stable");

    println!("local test with v = u passes: {}", sufficient_local_check(&net, &edge, &cert)?);

    let repair = propose_repair(&net, &edge, &cert, &tol)?;
    println!(
        "raise a[{}] from {} to {} (verified: {})",
        repair.node, repair.a_old, repair.a_new, repair.verified
    );

    let mut fixed = apply(&net, &StructuralChange::add_edge(edge))?.network;
    fixed = apply(&fixed, &repair.as_change())?.network;
    let report = analyze(&fixed, &tol)?;
    println!("repaired network: u = {:?}, gamma = {}", report.u(), report.gamma());

    // Uniform certificate on a diagonally dominant network.
    let dd = robustnet::Network::from_triples(vec![2.0, 2.0], &[(1, 2, 0.5)])?;
    for w in [0.5, 1.5] {
        let ok = diagonal_dominance_check(&dd, &NewEdge::new(2, 1, w), 1.0)?;
        println!("dominance test for edge 1 -> 2 with w={w} at gamma=1: {ok}");
    }
    Ok(())
}
