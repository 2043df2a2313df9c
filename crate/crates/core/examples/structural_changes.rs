//! Scalability verdicts for node and edge additions and removals.
//!
//! ```bash
//! cargo run -p robustnet --example structural_changes
//! ```

use robustnet::changes::VerdictOptions;
use robustnet::golden::three_node;
use robustnet::{apply, verdict, NewEdge, NodeId, StructuralChange, Tolerances};

fn show(label: &str, v: &robustnet::ChangeVerdict) {
    println!(
        "{label:<28} scalable={:<5} gamma {} -> {}",
        v.scalable,
        v.gamma_before,
        v.gamma_after.map_or("unstable".to_string(), |g| g.to_string())
    );
}

fn main() -> robustnet::Result<()> {
    let tol = Tolerances::default();
    let opts = VerdictOptions::default();
    let net = three_node();

    // A new node is scalable iff its own gain 1/a does not exceed gamma.
    for a in [0.2, 0.25, 1.0] {
        let v = verdict(&net, &StructuralChange::AddNode { a }, &tol, opts)?;
        show(&format!("add node a={a}"), &v);
    }

    let grown = apply(&net, &StructuralChange::AddNode { a: 0.25 })?.network;
    let edge = StructuralChange::add_edge(NewEdge::new(4, 2, 0.1));
    let v = verdict(&grown, &edge, &tol, opts)?;
    show("add edge 2 -> 4 (w=0.1)", &v);
    println!("  head reaches a maximiser: {:?}", v.path_to_argmax);
    println!("  lower bound on u_4:       {:?}", v.lower_bound);

    // Removals never hurt.
    let v = verdict(
        &net,
        &StructuralChange::RemoveEdge { to: NodeId::new(3), from: NodeId::new(2) },
        &tol,
        opts,
    )?;
    show("remove edge 2 -> 3", &v);
    let v = verdict(&net, &StructuralChange::RemoveNodeCascade { node: NodeId::new(1) }, &tol, opts)?;
    show("remove node 1 with edges", &v);
    println!("  relabelling: {:?}", v.index_map.map(|m| m.new_label));
    Ok(())
}
