//! Adiabatic pulse shaping.
//!
//! The pulse family has three parameters `p = (p0, p1, p2)`:
//!
//! ```text
//! Ω(t) = p0 (1 - [1 - sin²(π t / T)]^(p1/2))
//! Δ(t) = (2/π) p2 atan(p1 (t - T/2))
//! ```
//!
//! Ω rises from zero to `p0` at mid-sweep and returns to zero; Δ sweeps from
//! negative to positive through zero at `T/2`. The pipeline first picks the
//! register layout that scores best under the default pulse, then tunes `p`
//! with Nadam on the exact cost expectation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embed::{select_register, EmbedParams};
use crate::error::{input_err, Error, Result};
use crate::graph::{brute_force_maxcut, ground_state_probability, step_to_solution, Distribution, OracleResult, ShotHistogram, WeightedGraph};
use crate::optim::{central_difference, minimize, Bounds, Objective, OptimizerConfig};
use crate::rydsim::{
    expectation_cost, sample, Layout, MeasurementNoise, PhysicsConstants, PiecewiseConstant, PiecewiseLinear, PulseSchedule,
    RydbergSystem, SimConfig, StateVector,
};

/// Pulse parameters; `p0` and `p2` in rad/μs, `p1` dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticParams {
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
}

/// Shape parameter range searched by the optimizer.
pub const P1_RANGE: (f64, f64) = (0.1, 10.0);

impl AdiabaticParams {
    /// `p0 = 0.8 Ω_max`, `p1 = 2`, `p2 = 0.5 Δ_max`.
    pub fn defaults(constants: &PhysicsConstants) -> Self {
        Self {
            p0: 0.8 * constants.omega_max,
            p1: 2.0,
            p2: 0.5 * constants.delta_max,
        }
    }

    pub fn validate(&self, constants: &PhysicsConstants) -> Result<()> {
        let mut bad = Vec::new();
        if !(self.p0 > 0.0 && self.p0 <= constants.omega_max) {
            bad.push(format!("p0 = {} outside (0, {}]", self.p0, constants.omega_max));
        }
        if !(self.p1 > 0.0 && self.p1.is_finite()) {
            bad.push(format!("p1 = {} must be positive", self.p1));
        }
        if !(self.p2.abs() <= constants.delta_max) {
            bad.push(format!("|p2| = {} exceeds {}", self.p2.abs(), constants.delta_max));
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(bad.join("; ")))
        }
    }

    pub fn omega(&self, t: f64, t_max: f64) -> f64 {
        // |cos(πt/T)| written as a sine so the midpoint gives exactly 0
        let c = (std::f64::consts::PI * (0.5 * t_max - t) / t_max).sin().abs();
        self.p0 * (1.0 - c.powf(self.p1))
    }

    pub fn delta(&self, t: f64, t_max: f64) -> f64 {
        std::f64::consts::FRAC_2_PI * self.p2 * (self.p1 * (t - 0.5 * t_max)).atan()
    }

    fn to_unit(self, c: &PhysicsConstants) -> [f64; 3] {
        [self.p0 / c.omega_max, self.p1 / P1_SCALE, self.p2 / c.delta_max]
    }

    fn from_unit(x: &[f64], c: &PhysicsConstants) -> Self {
        Self {
            p0: x[0] * c.omega_max,
            p1: x[1] * P1_SCALE,
            p2: x[2] * c.delta_max,
        }
    }
}

/// The optimizer works on `(p0/Ω_max, p1/P1_SCALE, p2/Δ_max)` so all three
/// coordinates have comparable magnitude.
const P1_SCALE: f64 = 5.0;

fn unit_bounds() -> Bounds {
    Bounds::new(
        vec![0.01, P1_RANGE.0 / P1_SCALE, 0.0],
        vec![1.0, P1_RANGE.1 / P1_SCALE, 1.0],
    )
    .expect("static bounds are ordered")
}

pub const DEFAULT_KNOTS: usize = 101;

/// Samples the ansatz on `knots` equally spaced times over `[0, t_max]`.
pub fn adiabatic_schedule(params: &AdiabaticParams, t_max: f64, knots: usize, constants: &PhysicsConstants) -> Result<PulseSchedule> {
    if !(t_max > 0.0 && t_max.is_finite()) || knots < 2 {
        return Err(input_err!("need t_max > 0 and at least two knots"));
    }
    if !(params.p0.is_finite() && params.p1 > 0.0 && params.p1.is_finite() && params.p2.is_finite()) {
        return Err(input_err!("pulse parameters must be finite with p1 > 0"));
    }
    let times: Vec<f64> = (0..knots).map(|k| t_max * k as f64 / (knots - 1) as f64).collect();
    let schedule = PulseSchedule {
        t_max,
        omega: PiecewiseLinear::new(times.iter().map(|&t| (t, params.omega(t, t_max))).collect())?,
        delta_global: PiecewiseLinear::new(times.iter().map(|&t| (t, params.delta(t, t_max))).collect())?,
        phi: PiecewiseConstant::constant(0.0),
        local_detuning: None,
    };
    schedule.validate_hardware(constants)?;
    Ok(schedule)
}

/// Clamps a schedule into the hardware envelope; the flag reports any change.
pub fn project_to_hardware(schedule: &PulseSchedule, constants: &PhysicsConstants) -> (PulseSchedule, bool) {
    schedule.project_to_hardware(constants)
}

/// Pulse-shaping problem on a fixed register.
#[derive(Debug, Clone)]
pub struct PulseProblem<'a> {
    pub graph: &'a WeightedGraph,
    pub system: RydbergSystem,
    pub t_max: f64,
    pub knots: usize,
    pub sim: SimConfig,
}

impl<'a> PulseProblem<'a> {
    pub fn new(graph: &'a WeightedGraph, layout: &Layout, t_max: f64, sim: SimConfig) -> Result<Self> {
        if layout.len() != graph.n_vertices() {
            return Err(input_err!("layout has {} atoms for {} vertices", layout.len(), graph.n_vertices()));
        }
        Ok(Self {
            graph,
            system: RydbergSystem::new(layout, &sim)?,
            t_max,
            knots: DEFAULT_KNOTS,
            sim,
        })
    }

    pub fn final_state(&self, params: &AdiabaticParams, dt: f64) -> Result<StateVector> {
        let schedule = adiabatic_schedule(params, self.t_max, self.knots, &self.sim.constants)?;
        let zero = StateVector::zero(self.graph.n_vertices())?;
        self.system.evolve(&zero, &schedule, dt, 0.0, self.t_max)
    }

    pub fn cost(&self, params: &AdiabaticParams) -> Result<f64> {
        expectation_cost(&self.final_state(params, self.sim.dt)?, self.graph)
    }
}

impl Objective for PulseProblem<'_> {
    fn value(&self, x: &[f64]) -> Result<f64> {
        self.cost(&AdiabaticParams::from_unit(x, &self.sim.constants))
    }

    fn value_and_gradient(&self, x: &[f64], cfg: &OptimizerConfig, bounds: &Bounds) -> Result<(f64, Vec<f64>)> {
        // evaluate the stencil points concurrently, then difference them
        let mut points = vec![x.to_vec()];
        let h: Vec<f64> = x.iter().map(|v| cfg.fd_step * v.abs().max(1.0)).collect();
        for i in 0..x.len() {
            let center = x[i].max(bounds.lower[i] + h[i]).min(bounds.upper[i] - h[i]);
            for s in [1.0, -1.0] {
                let mut y = x.to_vec();
                y[i] = center + s * h[i];
                points.push(y);
            }
        }
        let values = points.par_iter().map(|p| self.value(p)).collect::<Result<Vec<_>>>()?;
        let grad = (0..x.len()).map(|i| (values[1 + 2 * i] - values[2 + 2 * i]) / (2.0 * h[i])).collect();
        Ok((values[0], grad))
    }
}

/// Result of [`optimize_pulse`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseOptimization {
    pub best: AdiabaticParams,
    pub best_cost: f64,
    pub trace: Vec<f64>,
    pub converged: bool,
}

/// Tunes `init` with Nadam/Adam on central-difference gradients, clipping to the
/// parameter box after every step.
pub fn optimize_pulse(problem: &PulseProblem<'_>, init: &AdiabaticParams, cfg: &OptimizerConfig) -> Result<PulseOptimization> {
    let c = &problem.sim.constants;
    init.validate(c)?;
    let bounds = unit_bounds();
    let r = minimize(problem, &init.to_unit(c), &bounds, cfg)?;
    Ok(PulseOptimization {
        best: AdiabaticParams::from_unit(&r.best_x, c),
        best_cost: r.best_cost,
        trace: r.trace,
        converged: r.converged,
    })
}

/// Convenience wrapper: cost of `params` on `layout`.
pub fn pulse_objective(graph: &WeightedGraph, layout: &Layout, params: &AdiabaticParams, t_max: f64, sim: &SimConfig) -> Result<f64> {
    PulseProblem::new(graph, layout, t_max, *sim)?.cost(params)
}

/// Gradient of the pulse cost in physical parameter units, by central differences.
pub fn pulse_gradient(problem: &PulseProblem<'_>, params: &AdiabaticParams, rel_step: f64) -> Result<[f64; 3]> {
    let c = problem.sim.constants;
    let x = params.to_unit(&c);
    let g = central_difference(|y| problem.value(y), &x, rel_step, &Bounds::unbounded(3))?;
    Ok([g[0] / c.omega_max, g[1] / P1_SCALE, g[2] / c.delta_max])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Number of candidate layouts (N_R).
    pub registers: usize,
    pub embed: EmbedParams,
    pub initial: Option<AdiabaticParams>,
    pub t_max: f64,
    pub knots: usize,
    pub optimizer: OptimizerConfig,
    /// Step used inside the optimization loop.
    pub sim: SimConfig,
    /// Step of the final evaluation.
    pub final_dt: f64,
    /// Shots drawn from the final state (0 for the exact distribution only).
    pub shots: u64,
    pub noise: Option<MeasurementNoise>,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            registers: 50,
            embed: EmbedParams::default(),
            initial: None,
            t_max: 4.0,
            knots: DEFAULT_KNOTS,
            optimizer: OptimizerConfig {
                learning_rate: 0.02,
                max_steps: 100,
                ..OptimizerConfig::default()
            },
            sim: SimConfig::default(),
            final_dt: 1e-4,
            shots: 0,
            noise: None,
            seed: 0,
        }
    }
}

/// Everything produced by [`run_adiabatic_pipeline`].
#[derive(Debug, Clone)]
pub struct RunReport {
    pub oracle: OracleResult,
    pub layout: Layout,
    pub best_layout_index: usize,
    pub layout_costs: Vec<f64>,
    pub initial_params: AdiabaticParams,
    pub params: AdiabaticParams,
    pub cost_trace: Vec<f64>,
    pub converged: bool,
    pub schedule: PulseSchedule,
    pub final_cost: f64,
    pub distribution: Distribution,
    pub histogram: Option<ShotHistogram>,
    /// P(GS) of the exact distribution.
    pub p_gs: f64,
    /// P(GS) of the shot histogram, if shots were drawn.
    pub p_gs_shots: Option<f64>,
    /// Step-to-solution for `p_gs`; `None` when it is undefined (P(GS) = 1).
    pub step_to_solution: Option<f64>,
}

pub fn run_adiabatic_pipeline(graph: &WeightedGraph, cfg: &PipelineConfig) -> Result<RunReport> {
    let n = graph.n_vertices();
    if n > cfg.sim.max_qubits {
        return Err(Error::Capacity(format!("{n} vertices exceeds the simulator limit of {}", cfg.sim.max_qubits)));
    }
    let constants = cfg.sim.constants;
    let oracle = brute_force_maxcut(graph)?;
    let init = cfg.initial.unwrap_or_else(|| AdiabaticParams::defaults(&constants));
    init.validate(&constants)?;

    let default_pulse = adiabatic_schedule(&init, cfg.t_max, cfg.knots, &constants)?;
    let embed = EmbedParams { seed: cfg.seed, ..cfg.embed };
    let selection = select_register(graph, cfg.registers, &default_pulse, &cfg.sim, &embed)?;

    let mut problem = PulseProblem::new(graph, &selection.best, cfg.t_max, cfg.sim)?;
    problem.knots = cfg.knots;
    let opt = optimize_pulse(&problem, &init, &cfg.optimizer)?;

    let schedule = adiabatic_schedule(&opt.best, cfg.t_max, cfg.knots, &constants)?;
    let psi = problem.final_state(&opt.best, cfg.final_dt)?;
    let final_cost = expectation_cost(&psi, graph)?;
    let distribution = psi.probabilities();
    let p_gs = ground_state_probability(&distribution, &oracle)?;
    let histogram = match cfg.shots {
        0 => None,
        shots => Some(sample(&distribution, shots, cfg.seed, cfg.noise.as_ref())?),
    };
    let p_gs_shots = histogram.as_ref().map(|h| ground_state_probability(h, &oracle)).transpose()?;
    Ok(RunReport {
        oracle,
        layout: selection.best,
        best_layout_index: selection.best_index,
        layout_costs: selection.costs,
        initial_params: init,
        params: opt.best,
        cost_trace: opt.trace,
        converged: opt.converged,
        schedule,
        final_cost,
        distribution,
        histogram,
        p_gs,
        p_gs_shots,
        step_to_solution: step_to_solution(p_gs.min(1.0)).ok(),
    })
}
