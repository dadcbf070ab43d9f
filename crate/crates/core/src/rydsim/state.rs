use num_complex::Complex64;

use crate::error::{input_err, Result};
use crate::graph::Distribution;

/// Largest register the dense representation will allocate.
pub(crate) const MAX_STATE_QUBITS: usize = 26;

const NORM_TOLERANCE: f64 = 1e-8;

/// Dense amplitudes over `2^n` basis states; bit `k` of the index is atom `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`, every atom in the ground state.
    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: u64) -> Result<Self> {
        if n > MAX_STATE_QUBITS {
            return Err(crate::Error::Capacity(format!(
                "{n} qubits exceeds the dense state limit of {MAX_STATE_QUBITS}"
            )));
        }
        if index >> n != 0 {
            return Err(input_err!("basis index {index} does not fit in {n} qubits"));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << n];
        amps[index as usize] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// Uniform superposition `|+⟩^⊗n`.
    pub fn plus(n: usize) -> Result<Self> {
        let mut s = Self::zero(n)?;
        let a = Complex64::new((s.amps.len() as f64).sqrt().recip(), 0.0);
        s.amps.iter_mut().for_each(|x| *x = a);
        Ok(s)
    }

    /// Wraps raw amplitudes; rejects states whose norm is off by more than 1e-8.
    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1usize << n {
            return Err(input_err!("{n} qubits need {} amplitudes, got {}", 1usize << n, amps.len()));
        }
        let s = Self { n, amps };
        s.check_normalized()?;
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn check_normalized(&self) -> Result<()> {
        let norm = self.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(input_err!("state norm is {norm}, expected 1"));
        }
        Ok(())
    }

    pub fn probabilities(&self) -> Distribution {
        let probs = self.amps.iter().map(|a| a.norm_sqr()).collect();
        Distribution::new(self.n, probs).expect("squared moduli are valid probabilities")
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Euclidean distance between amplitude vectors.
    pub fn distance(&self, other: &Self) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Applies the same single-qubit unitary `[[u00, u01], [u10, u11]]` to every qubit.
    pub fn apply_uniform_single_qubit(&mut self, u: [[Complex64; 2]; 2]) {
        for q in 0..self.n {
            apply_single_qubit(&mut self.amps, q, u);
        }
    }
}

pub(crate) fn apply_single_qubit(amps: &mut [Complex64], q: usize, u: [[Complex64; 2]; 2]) {
    let bit = 1usize << q;
    for block in amps.chunks_exact_mut(bit << 1) {
        let (lo, hi) = block.split_at_mut(bit);
        for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x0, x1) = (*a0, *a1);
            *a0 = u[0][0] * x0 + u[0][1] * x1;
            *a1 = u[1][0] * x0 + u[1][1] * x1;
        }
    }
}
