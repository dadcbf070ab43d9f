//! QAOA on the Rydberg simulator with per-atom detuning, plus the ideal
//! circuit-model baseline.
//!
//! With local detunings `Δ_i = 2 Σ_j w_ij` the linear Z terms of the register
//! Hamiltonian cancel, leaving `Σ w_ij Z_i Z_j` (plus a constant). A layer is
//! `γ_k` of free evolution under that diagonal (`Ω = 0`) followed by `β_k` with
//! the drive on (`Ω = Ω_mixer`, `φ = 0`). The initial `|+⟩^⊗n` is prepared by a
//! short `φ = -π/2` pulse. Both pulse segments have a constant Hamiltonian and
//! are propagated exactly.
//!
//! `γ` and `β` are evolution times in μs. Gradients are computed with the
//! adjoint method: one forward sweep and one backward sweep per evaluation.

mod lattice;

pub use lattice::{lattice_graph, Lattice, LatticeInstance};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input_err, Error, Result};
use crate::graph::{brute_force_maxcut, ground_state_probability, OracleResult, WeightedGraph};
use crate::optim::{minimize, Bounds, GradientMethod, Objective, OptimizerConfig};
use crate::rydsim::{
    rotation, ConstantHamiltonian, DiagonalTable, InteractionMatrix, Layout, PulseSchedule, RydbergSystem, SimConfig,
    StateVector,
};

/// Layer durations; `gammas[k]` and `betas[k]` belong to layer `k + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaParams {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl QaoaParams {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.len() != betas.len() {
            return Err(input_err!("{} gammas but {} betas", gammas.len(), betas.len()));
        }
        if gammas.iter().chain(&betas).any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(input_err!("layer durations must be finite and non-negative"));
        }
        Ok(Self { gammas, betas })
    }

    pub fn zeros(p: usize) -> Self {
        Self {
            gammas: vec![0.0; p],
            betas: vec![0.0; p],
        }
    }

    pub fn layers(&self) -> usize {
        self.gammas.len()
    }

    /// `[γ_1 … γ_p, β_1 … β_p]`.
    pub fn to_flat(&self) -> Vec<f64> {
        self.gammas.iter().chain(&self.betas).copied().collect()
    }

    pub fn from_flat(x: &[f64]) -> Self {
        let p = x.len() / 2;
        Self {
            gammas: x[..p].to_vec(),
            betas: x[p..].to_vec(),
        }
    }
}

/// How the drive amplitudes in [`QaoaHardwareConfig`] are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeReading {
    /// Values are angular rates in rad/μs.
    RadPerUs,
    /// Values are ordinary frequencies in MHz and get multiplied by 2π.
    Mhz,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QaoaHardwareConfig {
    pub omega_prep: f64,
    pub omega_mixer: f64,
    pub phi_prep: f64,
    pub phi_mixer: f64,
    /// Nearest-neighbour spacing α, μm.
    pub lattice_spacing: f64,
    /// Upper bound on every γ and β, μs.
    pub layer_cap: f64,
    pub amplitude_reading: AmplitudeReading,
}

impl Default for QaoaHardwareConfig {
    fn default() -> Self {
        Self {
            omega_prep: 5.0 * std::f64::consts::PI,
            omega_mixer: 2.0,
            phi_prep: -std::f64::consts::FRAC_PI_2,
            phi_mixer: 0.0,
            lattice_spacing: 12.0,
            layer_cap: 4.0,
            amplitude_reading: AmplitudeReading::RadPerUs,
        }
    }
}

impl QaoaHardwareConfig {
    fn scale(&self) -> f64 {
        match self.amplitude_reading {
            AmplitudeReading::RadPerUs => 1.0,
            AmplitudeReading::Mhz => std::f64::consts::TAU,
        }
    }

    /// Preparation amplitude in rad/μs.
    pub fn omega_prep_rad(&self) -> f64 {
        self.omega_prep * self.scale()
    }

    /// Mixer amplitude in rad/μs.
    pub fn omega_mixer_rad(&self) -> f64 {
        self.omega_mixer * self.scale()
    }

    /// Preparation time `π / (2 Ω_prep)`.
    pub fn prep_time(&self) -> f64 {
        std::f64::consts::PI / (2.0 * self.omega_prep_rad())
    }

    pub fn validate(&self, sim: &SimConfig) -> Result<()> {
        let c = &sim.constants;
        let (prep, mixer) = (self.omega_prep_rad(), self.omega_mixer_rad());
        if !(prep > 0.0 && prep <= c.omega_max * (1.0 + 1e-12)) {
            return Err(input_err!("preparation amplitude {prep} rad/μs outside (0, {}]", c.omega_max));
        }
        if !(mixer >= 0.0 && mixer <= c.omega_max * (1.0 + 1e-12)) {
            return Err(input_err!("mixer amplitude {mixer} rad/μs outside [0, {}]", c.omega_max));
        }
        if !(self.layer_cap > 0.0 && self.lattice_spacing > 0.0 && self.phi_prep.is_finite() && self.phi_mixer.is_finite()) {
            return Err(input_err!("layer cap and lattice spacing must be positive"));
        }
        Ok(())
    }
}

/// `Δ_i = 2 Σ_{j≠i} w_ij`, which cancels every single-Z term.
pub fn local_detunings(weights: &InteractionMatrix) -> Vec<f64> {
    (0..weights.n()).map(|i| 2.0 * weights.row_sum(i)).collect()
}

/// Scales `layout` about its centroid so its closest pair sits `spacing` apart,
/// then centres it in the default register box.
pub fn rescale_to_min_distance(layout: &Layout, spacing: f64) -> Result<Layout> {
    if layout.len() < 2 {
        return Ok(layout.clone());
    }
    let d = layout.min_distance();
    if !(d > 0.0) {
        return Err(Error::Domain("layout has coincident atoms".into()));
    }
    Ok(layout
        .scaled_about_centroid(spacing / d)
        .centered_in(&crate::rydsim::RegisterBounds::default()))
}

/// Mixer of a layered ansatz.
#[derive(Debug, Clone)]
enum Mixer {
    /// Register Hamiltonian with the drive on.
    Analog(ConstantHamiltonian),
    /// Ideal `Σ X_i`.
    Transverse(usize),
}

impl Mixer {
    fn propagate(&self, state: &mut StateVector, t: f64) -> Result<()> {
        match self {
            Mixer::Analog(h) => h.propagate(state, t),
            Mixer::Transverse(_) => {
                // exp(-i t X) per qubit
                state.apply_uniform_single_qubit(rotation(2.0, 0.0, t));
                Ok(())
            }
        }
    }

    fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        match self {
            Mixer::Analog(h) => h.apply(x, out),
            Mixer::Transverse(n) => {
                out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
                for q in 0..*n {
                    let bit = 1usize << q;
                    for (k, o) in out.iter_mut().enumerate() {
                        *o += x[k ^ bit];
                    }
                }
            }
        }
    }
}

/// Alternating-operator ansatz `Π_k e^{-i β_k H_b} e^{-i γ_k H_c}` on a fixed
/// initial state, with the expectation of a diagonal cost as objective.
#[derive(Debug, Clone)]
pub struct LayeredAnsatz {
    initial: StateVector,
    phase_energies: Vec<f64>,
    mixer: Mixer,
    cost: Vec<f64>,
    bounds_cap: f64,
}

impl LayeredAnsatz {
    /// Analog ansatz on a register: prepares `|+⟩` with the configured pulse
    /// and uses the register Hamiltonian for both layer halves.
    pub fn analog(graph: &WeightedGraph, layout: &Layout, hw: &QaoaHardwareConfig, sim: &SimConfig) -> Result<Self> {
        hw.validate(sim)?;
        if layout.len() != graph.n_vertices() {
            return Err(input_err!("layout has {} atoms for {} vertices", layout.len(), graph.n_vertices()));
        }
        let system = RydbergSystem::new(layout, sim)?;
        let detunings = local_detunings(system.interactions());
        let table = system.diagonal(Some(&detunings))?;
        let initial = prepare_plus_with(&table, hw)?;
        let mixer = ConstantHamiltonian::new(&table, 0.0, hw.omega_mixer_rad(), hw.phi_mixer)?;
        Ok(Self {
            initial,
            phase_energies: table.energies(0.0),
            mixer: Mixer::Analog(mixer),
            cost: graph.cost_table()?,
            bounds_cap: hw.layer_cap,
        })
    }

    /// Ideal circuit: exact `|+⟩^⊗n`, phase `e^{-iγ C/scale}` and mixer
    /// `e^{-iβ Σ X}`. The objective is the unscaled cost.
    pub fn circuit(graph: &WeightedGraph, cost_scale: f64, layer_cap: f64) -> Result<Self> {
        if !(cost_scale > 0.0 && cost_scale.is_finite()) {
            return Err(input_err!("cost scale must be positive"));
        }
        let n = graph.n_vertices();
        let cost = graph.cost_table()?;
        Ok(Self {
            initial: StateVector::plus(n)?,
            phase_energies: cost.iter().map(|c| c / cost_scale).collect(),
            mixer: Mixer::Transverse(n),
            cost,
            bounds_cap: layer_cap,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.initial.n_qubits()
    }

    pub fn initial_state(&self) -> &StateVector {
        &self.initial
    }

    pub fn bounds(&self, layers: usize) -> Bounds {
        Bounds::new(vec![0.0; 2 * layers], vec![self.bounds_cap; 2 * layers]).expect("cap is positive")
    }

    fn phase(&self, state: &mut StateVector, gamma: f64) {
        for (a, e) in state.amplitudes_mut().iter_mut().zip(&self.phase_energies) {
            *a *= Complex64::from_polar(1.0, -gamma * e);
        }
    }

    /// Applies the layers of `params` to `state`.
    pub fn apply_layers(&self, state: &StateVector, params: &QaoaParams) -> Result<StateVector> {
        if state.n_qubits() != self.n_qubits() {
            return Err(input_err!("state has {} qubits, ansatz {}", state.n_qubits(), self.n_qubits()));
        }
        let mut psi = state.clone();
        for (&g, &b) in params.gammas.iter().zip(&params.betas) {
            self.phase(&mut psi, g);
            self.mixer.propagate(&mut psi, b)?;
        }
        Ok(psi)
    }

    pub fn final_state(&self, params: &QaoaParams) -> Result<StateVector> {
        self.apply_layers(&self.initial, params)
    }

    pub fn expectation(&self, state: &StateVector) -> f64 {
        state.amplitudes().iter().zip(&self.cost).map(|(a, c)| a.norm_sqr() * c).sum()
    }

    pub fn cost(&self, params: &QaoaParams) -> Result<f64> {
        Ok(self.expectation(&self.final_state(params)?))
    }

    /// Cost and its gradient `[∂/∂γ…, ∂/∂β…]` by the adjoint method.
    pub fn cost_and_gradient(&self, params: &QaoaParams) -> Result<(f64, Vec<f64>)> {
        let p = params.layers();
        let mut phi = self.final_state(params)?;
        let value = self.expectation(&phi);
        let mut lambda = phi.clone();
        for (a, c) in lambda.amplitudes_mut().iter_mut().zip(&self.cost) {
            *a *= c;
        }
        let mut grad = vec![0.0; 2 * p];
        let mut scratch = vec![Complex64::new(0.0, 0.0); phi.dim()];
        for k in (0..p).rev() {
            self.mixer.apply(phi.amplitudes(), &mut scratch);
            grad[p + k] = 2.0 * overlap(lambda.amplitudes(), &scratch).im;
            self.mixer.propagate(&mut phi, -params.betas[k])?;
            self.mixer.propagate(&mut lambda, -params.betas[k])?;

            let hc: Complex64 = lambda
                .amplitudes()
                .iter()
                .zip(phi.amplitudes())
                .zip(&self.phase_energies)
                .map(|((l, f), e)| l.conj() * f * e)
                .sum();
            grad[k] = 2.0 * hc.im;
            self.phase(&mut phi, -params.gammas[k]);
            self.phase(&mut lambda, -params.gammas[k]);
        }
        Ok((value, grad))
    }
}

fn overlap(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn prepare_plus_with(table: &DiagonalTable, hw: &QaoaHardwareConfig) -> Result<StateVector> {
    let h = ConstantHamiltonian::new(table, 0.0, hw.omega_prep_rad(), hw.phi_prep)?;
    let mut psi = StateVector::zero(table.n_qubits())?;
    h.propagate(&mut psi, hw.prep_time())?;
    Ok(psi)
}

/// Evolves `|0…0⟩` for `π / (2 Ω_prep)` with the preparation pulse and the
/// cancelling local detunings switched on.
pub fn prepare_plus(layout: &Layout, hw: &QaoaHardwareConfig, sim: &SimConfig) -> Result<StateVector> {
    hw.validate(sim)?;
    let system = RydbergSystem::new(layout, sim)?;
    let table = system.diagonal(Some(&local_detunings(system.interactions())))?;
    prepare_plus_with(&table, hw)
}

/// Same preparation integrated with Strang steps of `sim.dt` (for cross-checks).
pub fn prepare_plus_strang(layout: &Layout, hw: &QaoaHardwareConfig, sim: &SimConfig) -> Result<StateVector> {
    hw.validate(sim)?;
    let system = RydbergSystem::new(layout, sim)?;
    let t0 = hw.prep_time();
    let schedule = PulseSchedule::constant(t0, hw.omega_prep_rad(), 0.0, hw.phi_prep)
        .with_local_detuning(local_detunings(system.interactions()));
    system.evolve(&StateVector::zero(layout.len())?, &schedule, sim.dt, 0.0, t0)
}

/// Runs the analog layers of `params` on `state`.
pub fn apply_qaoa_layers(
    state: &StateVector,
    graph: &WeightedGraph,
    layout: &Layout,
    params: &QaoaParams,
    hw: &QaoaHardwareConfig,
    sim: &SimConfig,
) -> Result<StateVector> {
    LayeredAnsatz::analog(graph, layout, hw, sim)?.apply_layers(state, params)
}

/// `⟨ψ_p|C|ψ_p⟩` with `C` built from the problem graph only.
pub fn qaoa_objective(
    graph: &WeightedGraph,
    layout: &Layout,
    params: &QaoaParams,
    hw: &QaoaHardwareConfig,
    sim: &SimConfig,
) -> Result<f64> {
    LayeredAnsatz::analog(graph, layout, hw, sim)?.cost(params)
}

struct AnsatzObjective<'a>(&'a LayeredAnsatz);

impl Objective for AnsatzObjective<'_> {
    fn value(&self, x: &[f64]) -> Result<f64> {
        self.0.cost(&QaoaParams::from_flat(x))
    }

    fn value_and_gradient(&self, x: &[f64], cfg: &OptimizerConfig, bounds: &Bounds) -> Result<(f64, Vec<f64>)> {
        match cfg.gradient {
            GradientMethod::Adjoint => self.0.cost_and_gradient(&QaoaParams::from_flat(x)),
            GradientMethod::CentralDifference => {
                let f0 = self.value(x)?;
                Ok((f0, crate::optim::central_difference(|y| self.value(y), x, cfg.fd_step, bounds)?))
            }
        }
    }
}

/// Outcome of one optimizer start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub params: QaoaParams,
    pub cost: f64,
    pub p_gs: f64,
    pub steps: usize,
    pub converged: bool,
    /// The objective became non-finite; excluded from the mean.
    pub failed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaReport {
    pub layers: usize,
    pub oracle: OracleResult,
    pub per_seed: Vec<SeedOutcome>,
    /// Mean P(GS) over non-failed seeds (0 when all failed).
    pub mean_p_gs: f64,
    pub mean_cost: f64,
    /// Index into `per_seed` of the highest-P(GS) non-failed seed.
    pub best: Option<usize>,
    pub n_failed: usize,
}

impl QaoaReport {
    pub fn best_p_gs(&self) -> f64 {
        self.best.map_or(0.0, |k| self.per_seed[k].p_gs)
    }
}

/// Optimizer defaults for QAOA: Adam with adjoint gradients.
pub fn default_qaoa_optimizer() -> OptimizerConfig {
    OptimizerConfig {
        algorithm: crate::optim::Algorithm::Adam,
        learning_rate: 0.05,
        max_steps: 2000,
        gradient: GradientMethod::Adjoint,
        convergence_tol: 1e-6,
        patience: 200,
        ..OptimizerConfig::default()
    }
}

/// Starts the optimizer from `n_seeds` random points (each entry uniform in
/// `[0, 1]`, drawn with seed `base_seed + s`) and collects per-seed results.
pub fn optimize_ansatz(
    ansatz: &LayeredAnsatz,
    oracle: &OracleResult,
    layers: usize,
    n_seeds: usize,
    base_seed: u64,
    opt: &OptimizerConfig,
) -> Result<QaoaReport> {
    if layers == 0 || n_seeds == 0 {
        return Err(input_err!("need at least one layer and one seed"));
    }
    let bounds = ansatz.bounds(layers);
    let per_seed = (0..n_seeds as u64)
        .into_par_iter()
        .map(|s| {
            let seed = base_seed.wrapping_add(s);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x0: Vec<f64> = (0..2 * layers).map(|_| rng.random::<f64>()).collect();
            match minimize(&AnsatzObjective(ansatz), &x0, &bounds, opt) {
                Ok(r) => {
                    let params = QaoaParams::from_flat(&r.best_x);
                    let psi = ansatz.final_state(&params)?;
                    Ok(SeedOutcome {
                        seed,
                        p_gs: ground_state_probability(&psi.probabilities(), oracle)?,
                        cost: r.best_cost,
                        params,
                        steps: r.trace.len(),
                        converged: r.converged,
                        failed: false,
                    })
                }
                Err(Error::NonFinite(_)) => Ok(SeedOutcome {
                    seed,
                    params: QaoaParams::from_flat(&x0),
                    cost: f64::NAN,
                    p_gs: 0.0,
                    steps: 0,
                    converged: false,
                    failed: true,
                }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let ok: Vec<&SeedOutcome> = per_seed.iter().filter(|s| !s.failed).collect();
    let mean = |f: fn(&SeedOutcome) -> f64| if ok.is_empty() { 0.0 } else { ok.iter().map(|s| f(s)).sum::<f64>() / ok.len() as f64 };
    let mut best: Option<usize> = None;
    for (k, s) in per_seed.iter().enumerate() {
        if !s.failed && best.is_none_or(|b| s.p_gs > per_seed[b].p_gs) {
            best = Some(k);
        }
    }
    Ok(QaoaReport {
        layers,
        oracle: oracle.clone(),
        mean_p_gs: mean(|s| s.p_gs),
        mean_cost: mean(|s| s.cost),
        best,
        n_failed: per_seed.len() - ok.len(),
        per_seed,
    })
}

/// Local-detuning QAOA on the register `layout`.
#[allow(clippy::too_many_arguments)]
pub fn optimize_qaoa(
    graph: &WeightedGraph,
    layout: &Layout,
    layers: usize,
    n_seeds: usize,
    base_seed: u64,
    hw: &QaoaHardwareConfig,
    sim: &SimConfig,
    opt: &OptimizerConfig,
) -> Result<QaoaReport> {
    let ansatz = LayeredAnsatz::analog(graph, layout, hw, sim)?;
    let oracle = brute_force_maxcut(graph)?;
    optimize_ansatz(&ansatz, &oracle, layers, n_seeds, base_seed, opt)
}

/// Ideal-circuit QAOA. The phase operator uses `C / max w` so that γ has the
/// same O(1) scale for every instance; the objective is the raw cost.
pub fn vanilla_qaoa(
    graph: &WeightedGraph,
    layers: usize,
    n_seeds: usize,
    base_seed: u64,
    layer_cap: f64,
    opt: &OptimizerConfig,
) -> Result<QaoaReport> {
    let scale = if graph.n_edges() == 0 { 1.0 } else { graph.max_weight() };
    let ansatz = LayeredAnsatz::circuit(graph, scale, layer_cap)?;
    let oracle = brute_force_maxcut(graph)?;
    optimize_ansatz(&ansatz, &oracle, layers, n_seeds, base_seed, opt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ProbabilityMap;
    use crate::rydsim::{linear_z_coefficients, PhysicsConstants};
    use std::f64::consts::PI;

    fn pair_layout(d: f64) -> Layout {
        Layout::new(vec![(30.0, 30.0), (30.0 + d, 30.0)]).unwrap()
    }

    #[test]
    fn detuning_examples() {
        let w = InteractionMatrix::from_values(3, vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(local_detunings(&w), vec![2.0, 4.0, 2.0]);
        let single = InteractionMatrix::from_values(1, vec![0.0]).unwrap();
        assert_eq!(local_detunings(&single), vec![0.0]);
    }

    #[test]
    fn cancellation_leaves_no_single_z() {
        let layout = Layout::new(vec![(10.0, 10.0), (17.0, 11.0), (12.0, 19.0), (21.0, 20.0)]).unwrap();
        let sys = RydbergSystem::new(&layout, &SimConfig::default()).unwrap();
        let table = sys.diagonal(Some(&local_detunings(sys.interactions()))).unwrap();
        for c in linear_z_coefficients(4, &table.energies(0.0)).unwrap() {
            assert!(c.abs() < 1e-10, "{c}");
        }
    }

    #[test]
    fn single_atom_preparation() {
        let hw = QaoaHardwareConfig::default();
        assert!((hw.prep_time() - 0.1).abs() < 1e-15);
        let psi = prepare_plus(&Layout::new(vec![(5.0, 5.0)]).unwrap(), &hw, &SimConfig::default()).unwrap();
        assert!(psi.fidelity(&StateVector::plus(1).unwrap()) > 1.0 - 1e-6);
    }

    #[test]
    fn preparation_needs_weak_interactions() {
        let hw = QaoaHardwareConfig::default();
        let sim = SimConfig::default();
        let plus2 = StateVector::plus(2).unwrap();
        assert!(prepare_plus(&pair_layout(12.0), &hw, &sim).unwrap().fidelity(&plus2) >= 0.99);
        assert!(prepare_plus(&pair_layout(4.0), &hw, &sim).unwrap().fidelity(&plus2) < 0.9);
        let strang = prepare_plus_strang(&pair_layout(12.0), &hw, &sim.with_dt(1e-5)).unwrap();
        assert!(strang.distance(&prepare_plus(&pair_layout(12.0), &hw, &sim).unwrap()) < 1e-6);
    }

    #[test]
    fn trivial_layers_are_identity() {
        let g = WeightedGraph::new(2, [(0, 1, 1.0)]).unwrap();
        let ansatz = LayeredAnsatz::analog(&g, &pair_layout(12.0), &QaoaHardwareConfig::default(), &SimConfig::default()).unwrap();
        let s = ansatz.initial_state().clone();
        assert_eq!(ansatz.apply_layers(&s, &QaoaParams::zeros(0)).unwrap(), s);
        assert!(ansatz.apply_layers(&s, &QaoaParams::zeros(3)).unwrap().distance(&s) < 1e-14);
    }

    #[test]
    fn mixer_quarter_turn_on_single_atom() {
        let g = WeightedGraph::new(1, std::iter::empty()).unwrap();
        let hw = QaoaHardwareConfig::default();
        let ansatz = LayeredAnsatz::analog(&g, &Layout::new(vec![(5.0, 5.0)]).unwrap(), &hw, &SimConfig::default()).unwrap();
        let beta = PI / (2.0 * hw.omega_mixer);
        let zero = StateVector::zero(1).unwrap();
        let out = ansatz.apply_layers(&zero, &QaoaParams::new(vec![0.7], vec![beta]).unwrap()).unwrap();
        // exp(-i (π/4) X)|0⟩
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((out.amplitudes()[0] - Complex64::new(h, 0.0)).norm() < 1e-12);
        assert!((out.amplitudes()[1] - Complex64::new(0.0, -h)).norm() < 1e-12);
    }

    #[test]
    fn cost_layer_only_changes_phases() {
        let g = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 0.5)]).unwrap();
        let layout = Layout::new(vec![(10.0, 10.0), (22.0, 10.0), (34.0, 10.0)]).unwrap();
        let ansatz = LayeredAnsatz::analog(&g, &layout, &QaoaHardwareConfig::default(), &SimConfig::default()).unwrap();
        let s = ansatz.apply_layers(ansatz.initial_state(), &QaoaParams::new(vec![0.3], vec![0.5]).unwrap()).unwrap();
        let mut t = s.clone();
        ansatz.phase(&mut t, 1.7);
        for (a, b) in s.probabilities().as_slice().iter().zip(t.probabilities().as_slice()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn layers_compose() {
        let g = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 0.5)]).unwrap();
        let layout = Layout::new(vec![(10.0, 10.0), (22.0, 10.0), (30.0, 18.0)]).unwrap();
        let ansatz = LayeredAnsatz::analog(&g, &layout, &QaoaHardwareConfig::default(), &SimConfig::default()).unwrap();
        let full = QaoaParams::new(vec![0.2, 0.9, 0.4], vec![0.3, 0.1, 0.8]).unwrap();
        let all = ansatz.final_state(&full).unwrap();
        let mut step = ansatz.initial_state().clone();
        for k in 0..3 {
            let one = QaoaParams::new(vec![full.gammas[k]], vec![full.betas[k]]).unwrap();
            step = ansatz.apply_layers(&step, &one).unwrap();
        }
        assert!(all.distance(&step) < 1e-12);
    }

    #[test]
    fn adjoint_matches_finite_differences() {
        let g = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 0.5), (0, 2, 0.8)]).unwrap();
        let layout = Layout::new(vec![(10.0, 10.0), (19.0, 10.0), (14.0, 17.0)]).unwrap();
        let sim = SimConfig::default();
        let analog = LayeredAnsatz::analog(&g, &layout, &QaoaHardwareConfig::default(), &sim).unwrap();
        let circuit = LayeredAnsatz::circuit(&g, 1.0, 4.0).unwrap();
        let params = QaoaParams::new(vec![0.3, 1.1], vec![0.7, 0.2]).unwrap();
        for ansatz in [&analog, &circuit] {
            let (_, grad) = ansatz.cost_and_gradient(&params).unwrap();
            let x = params.to_flat();
            for i in 0..x.len() {
                let h = 1e-6;
                let (mut xp, mut xm) = (x.clone(), x.clone());
                xp[i] += h;
                xm[i] -= h;
                let fd = (ansatz.cost(&QaoaParams::from_flat(&xp)).unwrap() - ansatz.cost(&QaoaParams::from_flat(&xm)).unwrap()) / (2.0 * h);
                assert!((fd - grad[i]).abs() < 1e-6, "component {i}: {fd} vs {}", grad[i]);
            }
        }
    }

    #[test]
    fn vanilla_single_edge_p1_is_exact() {
        let g = WeightedGraph::new(2, [(0, 1, 1.0)]).unwrap();
        let ansatz = LayeredAnsatz::circuit(&g, 1.0, 4.0).unwrap();
        let oracle = brute_force_maxcut(&g).unwrap();
        // the optimum sits at one of the quarter-period points
        let best = [(PI / 4.0, PI / 8.0), (PI / 4.0, 3.0 * PI / 8.0), (3.0 * PI / 4.0, PI / 8.0)]
            .iter()
            .map(|&(gm, bt)| {
                let psi = ansatz.final_state(&QaoaParams::new(vec![gm], vec![bt]).unwrap()).unwrap();
                ground_state_probability(&psi.probabilities(), &oracle).unwrap()
            })
            .fold(0.0, f64::max);
        assert!((best - 1.0).abs() < 1e-6, "{best}");
        let uniform = ansatz.final_state(&QaoaParams::zeros(1)).unwrap();
        assert!((ground_state_probability(&uniform.probabilities(), &oracle).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn vanilla_gauge_and_period() {
        let g = WeightedGraph::new(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        let c = 2.5;
        let scaled = g.scaled(c).unwrap();
        let a = LayeredAnsatz::circuit(&g, 1.0, 10.0).unwrap();
        let b = LayeredAnsatz::circuit(&scaled, 1.0, 10.0).unwrap();
        let p = QaoaParams::new(vec![0.4, 1.3], vec![0.2, 0.6]).unwrap();
        let q = QaoaParams::new(p.gammas.iter().map(|v| v / c).collect(), p.betas.clone()).unwrap();
        assert!(a.final_state(&p).unwrap().distance(&b.final_state(&q).unwrap()) < 1e-12);
        let shifted = QaoaParams::new(p.gammas.iter().map(|v| v + PI).collect(), p.betas.clone()).unwrap();
        assert!((a.final_state(&p).unwrap().fidelity(&a.final_state(&shifted).unwrap()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_edge_analog_optimum_near_minus_w() {
        let c = PhysicsConstants::default();
        let w = c.pair_weight(12.0);
        let g = WeightedGraph::new(2, [(0, 1, w)]).unwrap();
        let r = optimize_qaoa(&g, &pair_layout(12.0), 1, 4, 0, &QaoaHardwareConfig::default(), &SimConfig::default(), &default_qaoa_optimizer()).unwrap();
        let best = &r.per_seed[r.best.unwrap()];
        assert!(best.cost <= -0.95 * w, "cost {} vs {}", best.cost, -w);
        assert!(r.per_seed.iter().all(|s| (0.0..=1.0).contains(&s.p_gs)));
        assert!(r.best_p_gs() >= r.mean_p_gs);
        let d = ansatz_distribution_sum(&g);
        assert!((d - 1.0).abs() < 1e-12);
    }

    fn ansatz_distribution_sum(g: &WeightedGraph) -> f64 {
        let a = LayeredAnsatz::analog(g, &pair_layout(12.0), &QaoaHardwareConfig::default(), &SimConfig::default()).unwrap();
        a.initial_state().probabilities().total_probability()
    }
}
