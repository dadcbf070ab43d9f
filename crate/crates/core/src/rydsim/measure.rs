use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution as _;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::StateVector;
use crate::error::{input_err, Result};
use crate::graph::{cost_of_index, Distribution, ShotHistogram, WeightedGraph};

/// Independent readout errors: `p01` flips a measured 0 to 1, `p10` a 1 to 0.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MeasurementNoise {
    pub p01: f64,
    pub p10: f64,
}

impl MeasurementNoise {
    pub fn new(p01: f64, p10: f64) -> Result<Self> {
        for p in [p01, p10] {
            if !(0.0..=1.0).contains(&p) {
                return Err(input_err!("flip probability {p} outside [0, 1]"));
            }
        }
        Ok(Self { p01, p10 })
    }

    pub fn is_trivial(&self) -> bool {
        self.p01 == 0.0 && self.p10 == 0.0
    }
}

/// Draws `shots` bitstrings from `distribution`, then applies readout flips.
pub fn sample(
    distribution: &Distribution,
    shots: u64,
    seed: u64,
    noise: Option<&MeasurementNoise>,
) -> Result<ShotHistogram> {
    if shots == 0 {
        return Err(input_err!("sampling needs at least one shot"));
    }
    let index = WeightedIndex::new(distribution.as_slice())
        .map_err(|e| input_err!("cannot sample from distribution: {e}"))?;
    let n = distribution.n_bits();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = BTreeMap::new();
    for _ in 0..shots {
        let mut k = index.sample(&mut rng) as u64;
        if let Some(noise) = noise.filter(|m| !m.is_trivial()) {
            for q in 0..n {
                let p = if k >> q & 1 == 0 { noise.p01 } else { noise.p10 };
                if rng.random::<f64>() < p {
                    k ^= 1 << q;
                }
            }
        }
        *counts.entry(k).or_insert(0) += 1;
    }
    ShotHistogram::from_counts(n, counts)
}

/// Exact output distribution of the readout channel.
pub fn apply_measurement_noise(distribution: &Distribution, noise: &MeasurementNoise) -> Distribution {
    let n = distribution.n_bits();
    let mut p = distribution.as_slice().to_vec();
    for q in 0..n {
        let bit = 1usize << q;
        for k0 in (0..p.len()).filter(|k| k & bit == 0) {
            let k1 = k0 | bit;
            let (a, b) = (p[k0], p[k1]);
            p[k0] = a * (1.0 - noise.p01) + b * noise.p10;
            p[k1] = a * noise.p01 + b * (1.0 - noise.p10);
        }
    }
    Distribution::new(n, p).expect("stochastic map keeps a valid distribution")
}

/// `Σ_z |ψ(z)|² cost(z)` with the MaxCut cost of `graph`.
pub fn expectation_cost(state: &StateVector, graph: &WeightedGraph) -> Result<f64> {
    if state.n_qubits() != graph.n_vertices() {
        return Err(input_err!(
            "state has {} qubits but the graph has {} vertices",
            state.n_qubits(),
            graph.n_vertices()
        ));
    }
    let edges = graph.edges();
    Ok(state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(k, a)| a.norm_sqr() * cost_of_index(edges, k as u64))
        .sum())
}
