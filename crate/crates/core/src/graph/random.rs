use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::WeightedGraph;
use crate::error::{input_err, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedGraph {
    pub graph: WeightedGraph,
    pub connected: bool,
}

/// G(n, p) random graph. Each unordered pair is kept with probability `p`; kept
/// edges draw a weight uniformly from `(w_low, w_high]` (the closed point
/// `w_low` is excluded so a zero lower bound never produces a zero weight).
pub fn gen_erdos_renyi(
    n: usize,
    p: f64,
    w_low: f64,
    w_high: f64,
    seed: u64,
) -> Result<GeneratedGraph> {
    if n < 2 {
        return Err(input_err!("random graphs need n >= 2, got {n}"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(input_err!("edge probability {p} outside [0, 1]"));
    }
    if !(w_low.is_finite() && w_high.is_finite()) || w_low > w_high || w_low < 0.0 {
        return Err(input_err!("invalid weight range [{w_low}, {w_high}]"));
    }
    if w_high <= 0.0 {
        return Err(input_err!("weight range [{w_low}, {w_high}] has no positive values"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            // both draws always happen so the stream layout does not depend on p
            let keep = rng.random::<f64>() < p;
            let u = rng.random::<f64>();
            if keep {
                edges.push((i, j, w_high - (w_high - w_low) * u));
            }
        }
    }
    let graph = WeightedGraph::new(n, edges)?;
    let connected = graph.is_connected();
    Ok(GeneratedGraph { graph, connected })
}
