//! Reading and writing networks, changes and certificates as JSON, and
//! exporting a trajectory as CSV.
//!
//! ```bash
//! cargo run -p robustnet --example file_formats
//! ```

use robustnet::format::{changes_from_json, network_from_json, network_to_json, to_json, trajectory_csv};
use robustnet::simulate::{simulate, DisturbanceSignal, SimOptions};
use robustnet::{analyze, Certificate, Tolerances};

const NETWORK: &str = r#"{
  "nodes": [{"id": 1, "a": "1"}, {"id": 2, "a": "0.5"}],
  "edges": [{"from": 1, "to": 2, "weight": "0.25"}]
}"#;

fn main() -> robustnet::Result<()> {
    let net = network_from_json(NETWORK)?;
    print!("{}", network_to_json(&net));

    let report = analyze(&net, &Tolerances::default())?;
    print!("{}", to_json(&report));
    let cert = Certificate::from_report(&report).expect("stable");
    print!("{}", to_json(&cert));

    let changes = changes_from_json(r#"[{"op": "add_node", "a": "2"}, {"op": "remove_edge", "to": 2, "from": 1}]"#)?;
    print!("{}", to_json(&changes));

    let traj = simulate(&net, &DisturbanceSignal::ones(2), &SimOptions::new(1.0).step(0.25))?;
    print!("{}", trajectory_csv(&traj));
    Ok(())
}
