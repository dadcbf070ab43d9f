//! Exact state-vector simulation of a driven Rydberg atom array.
//!
//! The simulated Hamiltonian, with `s_i = ±1` the Z eigenvalue of atom `i`
//! (`+1` ground, `-1` Rydberg), is
//!
//! ```text
//! H(t) = Δ(t)/2 Σ Z_i + Σ Δ_i/2 Z_i + Ω(t)/2 Σ [X_i cos φ(t) - Y_i sin φ(t)]
//!        + C6/4 Σ_{i<j} (Z_i - 1)(Z_j - 1) / d_ij^6
//! ```
//!
//! In number-operator form (`n = (1 - Z)/2`) the interaction term is
//! `C6 Σ n_i n_j / d^6` and the global detuning term is `Δ/2 · N - Δ Σ n_i`, so a
//! positive detuning favours Rydberg excitation.
//!
//! Time-dependent schedules are integrated with second-order Strang splitting
//! ([`RydbergSystem::evolve`]); segments with a constant Hamiltonian can be
//! propagated exactly with a Chebyshev expansion ([`ConstantHamiltonian`]).

mod evolve;
mod hamiltonian;
mod measure;
mod propagate;
mod schedule;
mod state;

pub use evolve::{evolve, RydbergSystem, SimConfig};
pub(crate) use evolve::rotation;
pub use hamiltonian::{linear_z_coefficients, DiagonalTable};
pub use measure::{apply_measurement_noise, expectation_cost, sample, MeasurementNoise};
pub use propagate::{bessel_j_sequence, ConstantHamiltonian};
pub use schedule::{PiecewiseConstant, PiecewiseLinear, PulseSchedule, ScheduleJson};
pub use state::StateVector;

use serde::{Deserialize, Serialize};

use crate::error::{input_err, Error, Result};

/// Physical constants and hardware bounds. All rates in rad/μs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicsConstants {
    /// Van der Waals coefficient, rad·μs⁻¹·μm⁶.
    pub c6: f64,
    /// Largest Rabi amplitude (2.51 MHz).
    pub omega_max: f64,
    /// Largest detuning magnitude (19.89 MHz).
    pub delta_max: f64,
}

impl Default for PhysicsConstants {
    fn default() -> Self {
        Self {
            c6: 5_420_441.0,
            omega_max: 15.8,
            delta_max: 125.0,
        }
    }
}

impl PhysicsConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c6", self.c6),
            ("omega_max", self.omega_max),
            ("delta_max", self.delta_max),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(input_err!("physics constant {name} = {v} must be positive"));
            }
        }
        Ok(())
    }

    /// Pair weight `C6 / (4 d^6)` at distance `d` μm.
    pub fn pair_weight(&self, d: f64) -> f64 {
        self.c6 / (4.0 * d.powi(6))
    }

    /// Distance at which the pair weight equals `w`.
    pub fn distance_for_weight(&self, w: f64) -> f64 {
        (self.c6 / (4.0 * w)).powf(1.0 / 6.0)
    }
}

/// Geometric constraints on atom registers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegisterBounds {
    pub min_spacing: f64,
    pub width: f64,
    pub height: f64,
}

impl Default for RegisterBounds {
    fn default() -> Self {
        Self {
            min_spacing: 4.0,
            width: 75.0,
            height: 76.0,
        }
    }
}

/// Atom positions in μm.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    positions: Vec<(f64, f64)>,
}

impl Layout {
    pub fn new(positions: Vec<(f64, f64)>) -> Result<Self> {
        if positions.is_empty() {
            return Err(input_err!("layout has no atoms"));
        }
        if positions.iter().any(|(x, y)| !(x.is_finite() && y.is_finite())) {
            return Err(input_err!("layout has non-finite coordinates"));
        }
        Ok(Self { positions })
    }

    pub fn positions(&self) -> &[(f64, f64)] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.positions[i], self.positions[j]);
        (a.0 - b.0).hypot(a.1 - b.1)
    }

    pub fn min_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                best = best.min(self.distance(i, j));
            }
        }
        best
    }

    /// Checks the spacing and bounding-box constraints.
    pub fn validate(&self, bounds: &RegisterBounds) -> Result<()> {
        const SLACK: f64 = 1e-9;
        for (k, &(x, y)) in self.positions.iter().enumerate() {
            if x < -SLACK || y < -SLACK || x > bounds.width + SLACK || y > bounds.height + SLACK {
                return Err(Error::Validation(format!(
                    "atom {k} at ({x:.3}, {y:.3}) is outside the {}x{} μm box",
                    bounds.width, bounds.height
                )));
            }
        }
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                let d = self.distance(i, j);
                if d < bounds.min_spacing - SLACK {
                    return Err(Error::Validation(format!(
                        "atoms {i} and {j} are {d:.3} μm apart (minimum {})",
                        bounds.min_spacing
                    )));
                }
            }
        }
        Ok(())
    }

    /// Positions scaled about the centroid by `factor`.
    pub fn scaled_about_centroid(&self, factor: f64) -> Self {
        let n = self.len() as f64;
        let cx = self.positions.iter().map(|p| p.0).sum::<f64>() / n;
        let cy = self.positions.iter().map(|p| p.1).sum::<f64>() / n;
        Self {
            positions: self
                .positions
                .iter()
                .map(|&(x, y)| (cx + factor * (x - cx), cy + factor * (y - cy)))
                .collect(),
        }
    }

    /// Translates so the bounding box of the atoms is centred in `bounds`.
    pub fn centered_in(&self, bounds: &RegisterBounds) -> Self {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for &(x, y) in &self.positions {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        let dx = bounds.width / 2.0 - (x0 + x1) / 2.0;
        let dy = bounds.height / 2.0 - (y0 + y1) / 2.0;
        Self {
            positions: self.positions.iter().map(|&(x, y)| (x + dx, y + dy)).collect(),
        }
    }

    /// Atom `perm[k]` of the result sits where atom `k` was.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.len() {
            return Err(input_err!("permutation length mismatch"));
        }
        let mut out = self.positions.clone();
        for (k, &p) in perm.iter().enumerate() {
            out[p] = self.positions[k];
        }
        Ok(Self { positions: out })
    }

    pub fn to_json(&self) -> LayoutJson {
        LayoutJson {
            positions_um: self.positions.iter().map(|&(x, y)| [x, y]).collect(),
        }
    }

    pub fn from_json(json: &LayoutJson) -> Result<Self> {
        Self::new(json.positions_um.iter().map(|p| (p[0], p[1])).collect())
    }
}

/// Layout file format: `{"positions_um": [[x, y], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutJson {
    pub positions_um: Vec<[f64; 2]>,
}

/// Symmetric pair-weight matrix `w_ij = C6 / (4 d_ij^6)` (rad/μs), zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionMatrix {
    n: usize,
    w: Vec<f64>,
}

impl InteractionMatrix {
    pub fn from_values(n: usize, w: Vec<f64>) -> Result<Self> {
        if w.len() != n * n {
            return Err(input_err!("interaction matrix needs {} entries", n * n));
        }
        for i in 0..n {
            for j in 0..n {
                let v = w[i * n + j];
                if !(v.is_finite() && v >= 0.0) || (v - w[j * n + i]).abs() > 0.0 {
                    return Err(input_err!("interaction matrix must be symmetric and non-negative"));
                }
            }
            if w[i * n + i] != 0.0 {
                return Err(input_err!("interaction matrix diagonal must be zero"));
            }
        }
        Ok(Self { n, w })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.n + j]
    }

    pub fn max(&self) -> f64 {
        self.w.iter().copied().fold(0.0, f64::max)
    }

    /// Σ_{j≠i} w_ij.
    pub fn row_sum(&self, i: usize) -> f64 {
        self.w[i * self.n..(i + 1) * self.n].iter().sum()
    }
}

pub fn interaction_weights(layout: &Layout, constants: &PhysicsConstants) -> Result<InteractionMatrix> {
    let n = layout.len();
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = layout.distance(i, j);
            if d <= 1e-9 {
                return Err(Error::Domain(format!("atoms {i} and {j} coincide")));
            }
            let v = constants.pair_weight(d);
            w[i * n + j] = v;
            w[j * n + i] = v;
        }
    }
    Ok(InteractionMatrix { n, w })
}
