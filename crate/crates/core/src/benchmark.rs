//! Cycle-wise fidelity benchmark.
//!
//! The register is evolved from `|0…0⟩` to the end of each cycle; the exact
//! output distribution is compared with a (possibly sampled and noisy) one via
//! `F = 2 Σ p0·p / Σ p0² - 1`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input_err, Error, Result};
use crate::graph::{brute_force_maxcut, ground_state_probability, Distribution, OracleResult, ProbabilityMap, WeightedGraph};
use crate::rydsim::{apply_measurement_noise, sample, Layout, MeasurementNoise, PulseSchedule, RydbergSystem, SimConfig, StateVector};

/// `2 (Σ p0(z) p(z)) / (Σ p0(z)²) - 1`.
pub fn fidelity_estimate(p0: &Distribution, p: &Distribution) -> Result<f64> {
    if p0.n_bits() != p.n_bits() {
        return Err(input_err!("distributions over {} and {} bits", p0.n_bits(), p.n_bits()));
    }
    let norm: f64 = p0.as_slice().iter().map(|v| v * v).sum();
    if !(norm > 0.0) {
        return Err(Error::Domain("reference distribution has no mass".into()));
    }
    let cross: f64 = p0.as_slice().iter().zip(p.as_slice()).map(|(a, b)| a * b).sum();
    Ok(2.0 * cross / norm - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub cycles: usize,
    /// Cycle length, μs.
    pub t_cycle: f64,
    /// Shots per cycle for the measured distribution; 0 uses exact probabilities.
    pub shots: u64,
    /// Shots for the reference distribution; 0 uses exact probabilities.
    pub reference_shots: u64,
    pub seed: u64,
    pub noise: Option<MeasurementNoise>,
    /// Carry the state from one cycle to the next instead of re-evolving.
    pub incremental: bool,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            cycles: 16,
            t_cycle: 0.25,
            shots: 0,
            reference_shots: 0,
            seed: 0,
            noise: None,
            incremental: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityTrace {
    pub cycle_times: Vec<f64>,
    pub fidelity: Vec<f64>,
    pub p_initial: Vec<f64>,
    pub p_ground: Vec<f64>,
}

impl FidelityTrace {
    pub fn len(&self) -> usize {
        self.cycle_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycle_times.is_empty()
    }

    /// Columns `t_us,fidelity,p_initial,p_ground`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_us,fidelity,p_initial,p_ground\n");
        for k in 0..self.len() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                self.cycle_times[k], self.fidelity[k], self.p_initial[k], self.p_ground[k]
            );
        }
        out
    }
}

struct CyclePoint {
    fidelity: f64,
    p_initial: f64,
    p_ground: f64,
}

fn score_cycle(exact: &Distribution, k: usize, cfg: &BenchmarkConfig, oracle: &OracleResult) -> Result<CyclePoint> {
    // distinct, reproducible streams per cycle and per role
    let seed = cfg.seed.wrapping_add(2 * k as u64);
    let reference = if cfg.reference_shots > 0 {
        sample(exact, cfg.reference_shots, seed.wrapping_add(1), None)?.to_distribution()
    } else {
        exact.clone()
    };
    let noise = cfg.noise.filter(|m| !m.is_trivial());
    let measured = match (cfg.shots, noise) {
        (0, None) => exact.clone(),
        (0, Some(m)) => apply_measurement_noise(exact, &m),
        (shots, m) => sample(exact, shots, seed, m.as_ref())?.to_distribution(),
    };
    Ok(CyclePoint {
        fidelity: fidelity_estimate(&reference, &measured)?,
        p_initial: measured.probability(0),
        p_ground: ground_state_probability(&measured, oracle)?,
    })
}

/// Runs `cfg.cycles` cycles of `cfg.t_cycle` under `schedule`.
pub fn fidelity_benchmark(
    graph: &WeightedGraph,
    layout: &Layout,
    schedule: &PulseSchedule,
    cfg: &BenchmarkConfig,
    sim: &SimConfig,
) -> Result<FidelityTrace> {
    if cfg.cycles == 0 || !(cfg.t_cycle > 0.0 && cfg.t_cycle.is_finite()) {
        return Err(input_err!("need at least one cycle of positive length"));
    }
    let t_end = cfg.cycles as f64 * cfg.t_cycle;
    if t_end > schedule.t_max * (1.0 + 1e-12) {
        return Err(input_err!("{} cycles of {} μs exceed the schedule length {}", cfg.cycles, cfg.t_cycle, schedule.t_max));
    }
    if layout.len() != graph.n_vertices() {
        return Err(input_err!("layout has {} atoms for {} vertices", layout.len(), graph.n_vertices()));
    }
    let oracle = brute_force_maxcut(graph)?;
    let system = RydbergSystem::new(layout, sim)?;
    let zero = StateVector::zero(layout.len())?;
    let end = |k: usize| (k as f64 * cfg.t_cycle).min(schedule.t_max);

    let distributions: Vec<Distribution> = if cfg.incremental {
        let mut state = zero;
        let mut out = Vec::with_capacity(cfg.cycles);
        for k in 1..=cfg.cycles {
            state = system.evolve(&state, schedule, sim.dt, end(k - 1), end(k))?;
            out.push(state.probabilities());
        }
        out
    } else {
        (1..=cfg.cycles)
            .into_par_iter()
            .map(|k| Ok(system.evolve(&zero, schedule, sim.dt, 0.0, end(k))?.probabilities()))
            .collect::<Result<_>>()?
    };

    let points = distributions
        .iter()
        .enumerate()
        .map(|(i, d)| score_cycle(d, i + 1, cfg, &oracle))
        .collect::<Result<Vec<_>>>()?;
    Ok(FidelityTrace {
        cycle_times: (1..=cfg.cycles).map(end).collect(),
        fidelity: points.iter().map(|p| p.fidelity).collect(),
        p_initial: points.iter().map(|p| p.p_initial).collect(),
        p_ground: points.iter().map(|p| p.p_ground).collect(),
    })
}
