//! Checking a scripted sequence of changes step by step.
//!
//! ```bash
//! cargo run -p robustnet --example change_sequence
//! ```

use robustnet::changes::VerdictOptions;
use robustnet::golden::three_node;
use robustnet::{check_sequence, NewEdge, NodeId, StructuralChange, Tolerances};

fn main() -> robustnet::Result<()> {
    let script = [
        StructuralChange::AddNode { a: 0.25 },
        StructuralChange::add_edge(NewEdge::new(4, 2, 0.1)),
        StructuralChange::SetSelfFeedback { node: NodeId::new(4), a: 0.3 },
    ];
    let report = check_sequence(&three_node(), &script, None, &Tolerances::default(), VerdictOptions::default())?;
    for (k, step) in report.steps.iter().enumerate() {
        println!(
            "step {}: {:?}\n        scalable {}, gamma {} -> {:?}",
            k + 1,
            step.change,
            step.scalable,
            step.gamma_before,
            step.gamma_after
        );
    }
    println!("final u = {:?}", report.final_report.u());
    println!("robust at {}: {}", report.gamma, report.gamma_robust);
    Ok(())
}
