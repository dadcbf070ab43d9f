use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::state::apply_single_qubit;
use super::{interaction_weights, DiagonalTable, InteractionMatrix, Layout, PhysicsConstants, PulseSchedule, StateVector};
use crate::error::{input_err, Error, Result};

/// Numerical settings shared by all simulations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Strang step, μs.
    pub dt: f64,
    pub constants: PhysicsConstants,
    /// Registers larger than this are rejected before any allocation.
    pub max_qubits: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            constants: PhysicsConstants::default(),
            max_qubits: 16,
        }
    }
}

impl SimConfig {
    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(input_err!("time step must be positive, got {}", self.dt));
        }
        self.constants.validate()
    }
}

/// An atom register with its interaction matrix.
#[derive(Debug, Clone)]
pub struct RydbergSystem {
    layout: Option<Layout>,
    interactions: InteractionMatrix,
}

impl RydbergSystem {
    pub fn new(layout: &Layout, config: &SimConfig) -> Result<Self> {
        config.validate()?;
        if layout.len() > config.max_qubits {
            return Err(Error::Capacity(format!(
                "{} atoms exceeds the simulator limit of {}",
                layout.len(),
                config.max_qubits
            )));
        }
        Ok(Self {
            interactions: interaction_weights(layout, &config.constants)?,
            layout: Some(layout.clone()),
        })
    }

    /// A system defined only by its pair weights (no geometry).
    pub fn from_interactions(interactions: InteractionMatrix) -> Self {
        Self {
            layout: None,
            interactions,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.interactions.n()
    }

    pub fn layout(&self) -> Option<&Layout> {
        self.layout.as_ref()
    }

    pub fn interactions(&self) -> &InteractionMatrix {
        &self.interactions
    }

    pub fn diagonal(&self, local_detuning: Option<&[f64]>) -> Result<DiagonalTable> {
        DiagonalTable::new(&self.interactions, local_detuning)
    }

    /// Evolves `state` from `t_start` to `t_end` under `schedule` with Strang steps
    /// no longer than `dt`.
    pub fn evolve(
        &self,
        state: &StateVector,
        schedule: &PulseSchedule,
        dt: f64,
        t_start: f64,
        t_end: f64,
    ) -> Result<StateVector> {
        let table = self.diagonal(schedule.local_detuning.as_deref())?;
        let mut out = state.clone();
        evolve_in_place(&table, &mut out, schedule, dt, t_start, t_end)?;
        Ok(out)
    }
}

/// One-shot evolution: builds the system for `layout` and evolves `state`.
pub fn evolve(
    state: &StateVector,
    layout: &Layout,
    schedule: &PulseSchedule,
    config: &SimConfig,
    t_start: f64,
    t_end: f64,
) -> Result<StateVector> {
    RydbergSystem::new(layout, config)?.evolve(state, schedule, config.dt, t_start, t_end)
}

/// Strang integration against a prepared diagonal table.
///
/// Each step is `D(h/2) R(h) D(h/2)` with all controls sampled at the step
/// midpoint; the two diagonal halves between consecutive steps are fused.
pub(crate) fn evolve_in_place(
    table: &DiagonalTable,
    state: &mut StateVector,
    schedule: &PulseSchedule,
    dt: f64,
    t_start: f64,
    t_end: f64,
) -> Result<()> {
    if state.n_qubits() != table.n_qubits() {
        return Err(input_err!(
            "state has {} qubits but the register has {} atoms",
            state.n_qubits(),
            table.n_qubits()
        ));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(input_err!("time step must be positive, got {dt}"));
    }
    if !(t_end > t_start) {
        return Err(input_err!("empty interval [{t_start}, {t_end}]"));
    }
    schedule.check_defined_on(t_start, t_end)?;
    state.check_normalized()?;

    let span = t_end - t_start;
    let steps = ((span / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let h = span / steps as f64;
    let half = table.static_phases(h / 2.0);
    let full = table.static_phases(h);
    let n = table.n_qubits();
    let amps = state.amplitudes_mut();

    let mut prev_delta = 0.0;
    for s in 0..steps {
        let tm = t_start + (s as f64 + 0.5) * h;
        let delta = schedule.delta_global.eval(tm);
        if s == 0 {
            diagonal_step(amps, &half, &table.popcount_phases(delta, h / 2.0));
        } else {
            let fused = 0.5 * (prev_delta + delta);
            diagonal_step(amps, &full, &table.popcount_phases(fused, h));
        }
        let omega = schedule.omega.eval(tm);
        if omega != 0.0 {
            let u = rotation(omega, schedule.phi.eval(tm), h);
            for q in 0..n {
                apply_single_qubit(amps, q, u);
            }
        }
        prev_delta = delta;
    }
    diagonal_step(amps, &half, &table.popcount_phases(prev_delta, h / 2.0));
    Ok(())
}

#[inline]
fn diagonal_step(amps: &mut [Complex64], static_phase: &[Complex64], global: &[Complex64]) {
    for (k, (a, p)) in amps.iter_mut().zip(static_phase).enumerate() {
        *a *= p * global[k.count_ones() as usize];
    }
}

/// `exp(-i h (Ω/2)(X cos φ - Y sin φ))`.
pub(crate) fn rotation(omega: f64, phi: f64, h: f64) -> [[Complex64; 2]; 2] {
    let theta = 0.5 * omega * h;
    let (s, c) = theta.sin_cos();
    let minus_i_s = Complex64::new(0.0, -s);
    [
        [Complex64::new(c, 0.0), minus_i_s * Complex64::from_polar(1.0, phi)],
        [minus_i_s * Complex64::from_polar(1.0, -phi), Complex64::new(c, 0.0)],
    ]
}
