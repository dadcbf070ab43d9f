//! Force-directed placement of graph vertices in the atom plane.
//!
//! Two force laws are available: the classic Fruchterman-Reingold pair
//! (`-k²/d`, `d²/k`) and a Rydberg-flavoured variant whose repulsion falls off
//! as `d⁻⁶`. In the Rydberg variant every pair may carry its own length scale
//! `k_ij`, shortened for pairs that share many triangles (see
//! [`clique_coupling`]).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input_err, Error, Result};
use crate::graph::WeightedGraph;
use crate::rydsim::{expectation_cost, Layout, PulseSchedule, RegisterBounds, RydbergSystem, SimConfig, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForceVariant {
    Classic,
    Rydberg,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbedParams {
    /// Hardware box and minimum atom spacing.
    pub bounds: RegisterBounds,
    /// Area per vertex used for the FR length scale, μm². `k_scale` defaults to
    /// `sqrt(area_per_vertex)`, i.e. `sqrt(Area / n)` with `Area = n · area_per_vertex`.
    pub area_per_vertex: f64,
    /// Overrides the length scale derived from the area.
    pub k_scale: Option<f64>,
    pub iterations: usize,
    /// Displacement cap of the first iteration, μm; decays linearly to zero.
    pub initial_temperature: f64,
    /// Clique exponent ρ.
    pub rho: f64,
    pub variant: ForceVariant,
    /// Scale attraction by `w_ij / max w`.
    pub weighted_attraction: bool,
    pub seed: u64,
}

impl Default for EmbedParams {
    fn default() -> Self {
        Self {
            bounds: RegisterBounds::default(),
            area_per_vertex: 6.5 * 6.5,
            k_scale: None,
            iterations: 300,
            initial_temperature: 5.0,
            rho: 0.5,
            variant: ForceVariant::Rydberg,
            weighted_attraction: true,
            seed: 0,
        }
    }
}

impl EmbedParams {
    pub fn validate(&self) -> Result<()> {
        let b = &self.bounds;
        if self.iterations == 0 {
            return Err(input_err!("at least one relaxation iteration is required"));
        }
        if !(b.min_spacing > 0.0 && b.width >= b.min_spacing && b.height >= b.min_spacing) {
            return Err(input_err!("box {}x{} cannot hold atoms {} μm apart", b.width, b.height, b.min_spacing));
        }
        if !(self.area_per_vertex > 0.0 && self.initial_temperature > 0.0 && self.rho.is_finite()) {
            return Err(input_err!("area, temperature and rho must be positive and finite"));
        }
        if let Some(k) = self.k_scale {
            if !(k > 0.0 && k.is_finite()) {
                return Err(input_err!("k_scale must be positive"));
            }
        }
        Ok(())
    }

    pub fn k_scale(&self) -> f64 {
        self.k_scale.unwrap_or(self.area_per_vertex.sqrt())
    }
}

/// Force magnitudes `(repulsive, attractive)` at separation `d` for length scale `k`.
/// The repulsive value is negative. `d` must be positive; callers regularize.
pub fn fr_forces(d: f64, k: f64, variant: ForceVariant) -> (f64, f64) {
    let d = d.max(f64::MIN_POSITIVE);
    let repulsive = match variant {
        ForceVariant::Classic => -k * k / d,
        ForceVariant::Rydberg => -(k / d).powi(6),
    };
    (repulsive, d * d / k)
}

/// Symmetric per-pair length scales.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    n: usize,
    values: Vec<f64>,
}

impl CouplingMatrix {
    pub fn uniform(n: usize, k: f64) -> Self {
        Self { n, values: vec![k; n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }
}

/// `k_ij = (T_ij / N_Δ)^ρ · k_scale`, where `T_ij` counts triangles through both
/// `i` and `j` and `N_Δ` all triangles. Pairs in no triangle keep `k_scale`.
pub fn clique_coupling(graph: &WeightedGraph, rho: f64, k_scale: f64) -> Result<CouplingMatrix> {
    if !rho.is_finite() {
        return Err(input_err!("rho must be finite"));
    }
    let n = graph.n_vertices();
    let mut adj = vec![false; n * n];
    for e in graph.edges() {
        adj[e.i * n + e.j] = true;
        adj[e.j * n + e.i] = true;
    }
    let mut shared = vec![0usize; n * n];
    let mut total = 0usize;
    for a in 0..n {
        for b in a + 1..n {
            if !adj[a * n + b] {
                continue;
            }
            for c in b + 1..n {
                if adj[a * n + c] && adj[b * n + c] {
                    total += 1;
                    for (x, y) in [(a, b), (a, c), (b, c)] {
                        shared[x * n + y] += 1;
                        shared[y * n + x] += 1;
                    }
                }
            }
        }
    }
    let mut m = CouplingMatrix::uniform(n, k_scale);
    if total > 0 {
        for (v, &t) in m.values.iter_mut().zip(&shared) {
            if t > 0 {
                *v = (t as f64 / total as f64).powf(rho) * k_scale;
            }
        }
    }
    Ok(m)
}

/// Layout plus the largest per-vertex displacement of each relaxation step.
#[derive(Debug, Clone)]
pub struct RelaxationTrace {
    pub layout: Layout,
    pub max_displacement: Vec<f64>,
}

pub fn fr_layout(graph: &WeightedGraph, params: &EmbedParams) -> Result<Layout> {
    fr_layout_traced(graph, params).map(|t| t.layout)
}

pub fn fr_layout_traced(graph: &WeightedGraph, params: &EmbedParams) -> Result<RelaxationTrace> {
    params.validate()?;
    let n = graph.n_vertices();
    let b = params.bounds;
    let k = params.k_scale();
    let coupling = match params.variant {
        ForceVariant::Classic => CouplingMatrix::uniform(n, k),
        ForceVariant::Rydberg => clique_coupling(graph, params.rho, k)?,
    };
    let w_max = graph.max_weight();
    let d_floor = b.min_spacing / 10.0;

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let side = (n as f64 * params.area_per_vertex).sqrt().min(b.width.min(b.height));
    let (cx, cy) = (b.width / 2.0, b.height / 2.0);
    let mut pos: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let x = cx + side * (rng.random::<f64>() - 0.5);
            let y = cy + side * (rng.random::<f64>() - 0.5);
            (x, y)
        })
        .collect();

    let mut trace = Vec::with_capacity(params.iterations);
    let mut cap = f64::INFINITY;
    let mut disp = vec![(0.0, 0.0); n];
    for it in 0..params.iterations {
        let temperature = params.initial_temperature * (1.0 - it as f64 / params.iterations as f64);
        disp.iter_mut().for_each(|v| *v = (0.0, 0.0));
        for i in 0..n {
            for j in i + 1..n {
                let (dx, dy) = (pos[i].0 - pos[j].0, pos[i].1 - pos[j].1);
                let d = dx.hypot(dy).max(d_floor);
                let (ux, uy) = if dx == 0.0 && dy == 0.0 { unit_for_pair(i, j) } else { (dx / d, dy / d) };
                let (rep, _) = fr_forces(d, coupling.get(i, j), params.variant);
                // rep < 0 pushes i away from j
                disp[i].0 -= rep * ux;
                disp[i].1 -= rep * uy;
                disp[j].0 += rep * ux;
                disp[j].1 += rep * uy;
            }
        }
        for e in graph.edges() {
            let (dx, dy) = (pos[e.i].0 - pos[e.j].0, pos[e.i].1 - pos[e.j].1);
            let d = dx.hypot(dy).max(d_floor);
            let (_, mut att) = fr_forces(d, coupling.get(e.i, e.j), params.variant);
            if params.weighted_attraction {
                att *= e.w / w_max;
            }
            let (ux, uy) = (dx / d, dy / d);
            disp[e.i].0 -= att * ux;
            disp[e.i].1 -= att * uy;
            disp[e.j].0 += att * ux;
            disp[e.j].1 += att * uy;
        }
        // displacement never grows once cooling starts
        let limit = temperature.min(cap);
        let mut step_max: f64 = 0.0;
        for (p, &(fx, fy)) in pos.iter_mut().zip(&disp) {
            let len = fx.hypot(fy);
            if len > 0.0 {
                let s = len.min(limit);
                let prev = *p;
                *p = clamp_to_box((p.0 + fx / len * s, p.1 + fy / len * s), &b);
                step_max = step_max.max((p.0 - prev.0).hypot(p.1 - prev.1));
            }
        }
        // rounding in the position update can overshoot the limit by an ulp
        cap = step_max.min(limit);
        trace.push(cap);
    }

    let centered = Layout::new(pos)?.centered_in(&b);
    let mut pos: Vec<(f64, f64)> = centered.positions().iter().map(|&p| clamp_to_box(p, &b)).collect();
    repair_spacing(&mut pos, &b)?;
    Ok(RelaxationTrace {
        layout: Layout::new(pos)?,
        max_displacement: trace,
    })
}

fn unit_for_pair(i: usize, j: usize) -> (f64, f64) {
    let angle = 2.399963229728653 * (i * 31 + j) as f64;
    (angle.cos(), angle.sin())
}

fn clamp_to_box(p: (f64, f64), b: &RegisterBounds) -> (f64, f64) {
    (p.0.clamp(0.0, b.width), p.1.clamp(0.0, b.height))
}

const REPAIR_PASSES: usize = 100;

/// Pushes too-close pairs apart along their separation until every pair is at
/// least `min_spacing` apart.
fn repair_spacing(pos: &mut [(f64, f64)], b: &RegisterBounds) -> Result<()> {
    let target = b.min_spacing * (1.0 + 1e-9);
    for _ in 0..REPAIR_PASSES {
        let mut clean = true;
        for i in 0..pos.len() {
            for j in i + 1..pos.len() {
                let (dx, dy) = (pos[j].0 - pos[i].0, pos[j].1 - pos[i].1);
                let d = dx.hypot(dy);
                if d >= b.min_spacing {
                    continue;
                }
                clean = false;
                let (ux, uy) = if d > 0.0 { (dx / d, dy / d) } else { unit_for_pair(i, j) };
                let need = target - d + 1e-6;
                let before = pos[i];
                pos[i] = clamp_to_box((pos[i].0 - ux * need / 2.0, pos[i].1 - uy * need / 2.0), b);
                // whatever the box stopped atom i from taking goes to atom j
                let moved = -((pos[i].0 - before.0) * ux + (pos[i].1 - before.1) * uy);
                let rest = need - moved;
                pos[j] = clamp_to_box((pos[j].0 + ux * rest, pos[j].1 + uy * rest), b);
            }
        }
        if clean {
            return Ok(());
        }
    }
    Err(Error::Capacity(format!(
        "could not place {} atoms {} μm apart inside {}x{} μm",
        pos.len(),
        b.min_spacing,
        b.width,
        b.height
    )))
}

/// Exact cost expectation after evolving `|0…0⟩` under `pulse` on each layout.
pub fn score_layouts(
    graph: &WeightedGraph,
    layouts: &[Layout],
    pulse: &PulseSchedule,
    sim: &SimConfig,
) -> Result<Vec<f64>> {
    layouts
        .par_iter()
        .map(|layout| {
            if layout.len() != graph.n_vertices() {
                return Err(input_err!("layout has {} atoms for {} vertices", layout.len(), graph.n_vertices()));
            }
            let system = RydbergSystem::new(layout, sim)?;
            let zero = StateVector::zero(layout.len())?;
            let psi = system.evolve(&zero, pulse, sim.dt, 0.0, pulse.t_max)?;
            expectation_cost(&psi, graph)
        })
        .collect()
}

/// Outcome of register selection.
#[derive(Debug, Clone)]
pub struct RegisterSelection {
    pub best: Layout,
    pub best_index: usize,
    pub costs: Vec<f64>,
    pub layouts: Vec<Layout>,
}

/// Builds `n_layouts` FR layouts with seeds `params.seed + k`, scores each under
/// `pulse`, and keeps the lowest cost (ties go to the lowest index).
pub fn select_register(
    graph: &WeightedGraph,
    n_layouts: usize,
    pulse: &PulseSchedule,
    sim: &SimConfig,
    params: &EmbedParams,
) -> Result<RegisterSelection> {
    if n_layouts == 0 {
        return Err(input_err!("at least one layout is required"));
    }
    let layouts = (0..n_layouts as u64)
        .into_par_iter()
        .map(|k| {
            let p = EmbedParams {
                seed: params.seed.wrapping_add(k),
                ..*params
            };
            fr_layout(graph, &p)
        })
        .collect::<Result<Vec<_>>>()?;
    let costs = score_layouts(graph, &layouts, pulse, sim)?;
    let best_index = argmin(&costs);
    Ok(RegisterSelection {
        best: layouts[best_index].clone(),
        best_index,
        costs,
        layouts,
    })
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = k;
        }
    }
    best
}
