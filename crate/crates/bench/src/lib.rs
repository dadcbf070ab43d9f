//! Shared inputs for the gridcut benchmarks.

use gridcut_core::gridparse::{case_to_graph, parse_matpower};
use gridcut_core::pulseopt::{adiabatic_schedule, AdiabaticParams, DEFAULT_KNOTS};
use gridcut_core::{Layout, PhysicsConstants, PulseSchedule, WeightedGraph};

pub const CASE9: &str = include_str!("../../core/tests/fixtures/case9.m");

pub fn case9() -> WeightedGraph {
    case_to_graph(&parse_matpower(CASE9).expect("bundled case parses")).expect("bundled case converts")
}

/// `n` atoms on a circle with neighbours `spacing` μm apart.
pub fn ring_layout(n: usize, spacing: f64) -> Layout {
    let r = spacing / (2.0 * (std::f64::consts::PI / n as f64).sin());
    Layout::new(
        (0..n)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                (37.5 + r * a.cos(), 38.0 + r * a.sin())
            })
            .collect(),
    )
    .expect("ring is valid")
}

/// Unit-weight ring graph.
pub fn ring_graph(n: usize) -> WeightedGraph {
    WeightedGraph::new(n, (0..n).map(|k| (k, (k + 1) % n, 1.0))).expect("ring graph")
}

pub fn default_pulse() -> PulseSchedule {
    let c = PhysicsConstants::default();
    adiabatic_schedule(&AdiabaticParams::defaults(&c), 4.0, DEFAULT_KNOTS, &c).expect("default pulse")
}
