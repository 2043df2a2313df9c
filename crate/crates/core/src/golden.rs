//! Small reference networks with hand-checkable robustness vectors.

use crate::model::Network;

/// Three nodes, unit self-feedback, edges 1→2, 1→3, 2→3 of unit weight.
/// Robustness vector `(1, 2, 4)`, minimal gain 4.
pub fn three_node() -> Network {
    Network::from_triples(vec![1.0, 1.0, 1.0], &[(2, 1, 1.0), (3, 1, 1.0), (3, 2, 1.0)])
        .expect("valid fixture")
}

/// [`three_node`] plus an isolated fourth node with `a_4 = 1/4`.
/// Robustness vector `(1, 2, 4, 4)`.
pub fn four_node() -> Network {
    Network::from_triples(
        vec![1.0, 1.0, 1.0, 0.25],
        &[(2, 1, 1.0), (3, 1, 1.0), (3, 2, 1.0)],
    )
    .expect("valid fixture")
}

/// Two unit-rate nodes coupled both ways with weight `m`.
/// Stable iff `m < 1`; the robustness vector is `1/(1 - m)` at both nodes.
pub fn symmetric_pair(m: f64) -> Network {
    Network::from_triples(vec![1.0, 1.0], &[(1, 2, m), (2, 1, m)]).expect("valid fixture")
}
