use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input_err, Result};
use crate::graph::WeightedGraph;
use crate::rydsim::{Layout, PhysicsConstants, RegisterBounds};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lattice {
    Square,
    Honeycomb,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeInstance {
    pub graph: WeightedGraph,
    pub layout: Layout,
}

fn sites(lattice: Lattice, spacing: f64, bounds: &RegisterBounds) -> Vec<(f64, f64)> {
    let inside = |(x, y): (f64, f64)| x >= -1e-9 && y >= -1e-9 && x <= bounds.width + 1e-9 && y <= bounds.height + 1e-9;
    let mut out = Vec::new();
    match lattice {
        Lattice::Square => {
            let nx = (bounds.width / spacing).floor() as i64;
            let ny = (bounds.height / spacing).floor() as i64;
            for j in 0..=ny {
                for i in 0..=nx {
                    out.push((i as f64 * spacing, j as f64 * spacing));
                }
            }
        }
        Lattice::Honeycomb => {
            let s3 = 3f64.sqrt() * spacing;
            let reach = (bounds.width.max(bounds.height) / spacing).ceil() as i64 + 2;
            for n in -reach..=reach {
                for m in -reach..=2 * reach {
                    let (x, y) = (m as f64 * s3 + n as f64 * s3 / 2.0, n as f64 * 1.5 * spacing);
                    for p in [(x, y), (x, y + spacing)] {
                        if inside(p) {
                            out.push(p);
                        }
                    }
                }
            }
        }
    }
    out.retain(|&p| inside(p));
    out
}

/// `n` connected sites of a lattice with nearest-neighbour spacing `spacing`,
/// grown from the site nearest the box centre by adding a uniformly chosen
/// frontier site at each step. Edges join sites exactly `spacing` apart and
/// carry the pair weight at that distance.
pub fn lattice_graph(
    n: usize,
    lattice: Lattice,
    spacing: f64,
    seed: u64,
    bounds: &RegisterBounds,
    constants: &PhysicsConstants,
) -> Result<LatticeInstance> {
    if n < 2 {
        return Err(input_err!("lattice graphs need n >= 2, got {n}"));
    }
    if !(spacing >= bounds.min_spacing && spacing.is_finite()) {
        return Err(input_err!("lattice spacing {spacing} below the minimum atom spacing"));
    }
    let all = sites(lattice, spacing, bounds);
    let adjacent = |a: (f64, f64), b: (f64, f64)| ((a.0 - b.0).hypot(a.1 - b.1) - spacing).abs() < 1e-6 * spacing;
    let neighbours: Vec<Vec<usize>> = (0..all.len())
        .map(|i| (0..all.len()).filter(|&j| j != i && adjacent(all[i], all[j])).collect())
        .collect();

    let centre = (bounds.width / 2.0, bounds.height / 2.0);
    let dist_c = |p: (f64, f64)| (p.0 - centre.0).hypot(p.1 - centre.1);
    let start = (0..all.len())
        .min_by(|&a, &b| dist_c(all[a]).total_cmp(&dist_c(all[b])))
        .ok_or_else(|| input_err!("no lattice sites fit in the box"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = vec![start];
    let mut taken = vec![false; all.len()];
    taken[start] = true;
    let mut frontier: Vec<usize> = Vec::new();
    let mut in_frontier = vec![false; all.len()];
    let mut grow = |site: usize, frontier: &mut Vec<usize>, taken: &[bool]| {
        for &j in &neighbours[site] {
            if !taken[j] && !in_frontier[j] {
                in_frontier[j] = true;
                frontier.push(j);
            }
        }
    };
    grow(start, &mut frontier, &taken);
    while chosen.len() < n {
        if frontier.is_empty() {
            return Err(input_err!("only {} lattice sites fit in the box", chosen.len()));
        }
        let site = frontier.swap_remove(rng.random_range(0..frontier.len()));
        taken[site] = true;
        chosen.push(site);
        grow(site, &mut frontier, &taken);
    }

    let positions: Vec<(f64, f64)> = chosen.iter().map(|&s| all[s]).collect();
    let w = constants.pair_weight(spacing);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if adjacent(positions[i], positions[j]) {
                edges.push((i, j, w));
            }
        }
    }
    Ok(LatticeInstance {
        graph: WeightedGraph::new(n, edges)?,
        layout: Layout::new(positions)?,
    })
}
