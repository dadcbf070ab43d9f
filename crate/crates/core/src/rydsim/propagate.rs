use num_complex::Complex64;

use super::{DiagonalTable, StateVector};
use crate::error::{input_err, Result};

/// Bessel functions `J_0(x) … J_kmax(x)` for `x ≥ 0` by Miller's backward
/// recurrence, normalized with `J_0 + 2 Σ J_2k = 1`.
pub fn bessel_j_sequence(x: f64, kmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    assert!(x > 0.0 && x.is_finite(), "bessel_j_sequence needs finite x >= 0");
    let top = kmax.max(x.ceil() as usize);
    let mut m = top + 20 + (40.0 * top as f64).sqrt() as usize;
    m += m % 2;
    let (mut j_next, mut j_cur) = (0.0f64, 1e-300f64);
    let mut norm = 0.0;
    for k in (1..=m).rev() {
        let j_prev = 2.0 * k as f64 / x * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        if j_cur.abs() > 1e250 {
            j_cur *= 1e-250;
            j_next *= 1e-250;
            norm *= 1e-250;
            out.iter_mut().for_each(|v| *v *= 1e-250);
        }
        // j_cur now holds J_{k-1}
        let idx = k - 1;
        if idx <= kmax {
            out[idx] = j_cur;
        }
        if idx % 2 == 0 {
            norm += if idx == 0 { j_cur } else { 2.0 * j_cur };
        }
    }
    out.iter_mut().for_each(|v| *v /= norm);
    out
}

/// A time-independent Hamiltonian `D + (Ω/2) Σ (X cos φ - Y sin φ)` with diagonal `D`,
/// propagated exactly with a Chebyshev expansion.
#[derive(Debug, Clone)]
pub struct ConstantHamiltonian {
    n: usize,
    diagonal: Vec<f64>,
    omega: f64,
    phi: f64,
    center: f64,
    radius: f64,
}

/// Chebyshev terms are dropped once the Bessel weights fall below this.
const SERIES_TOLERANCE: f64 = 1e-16;

impl ConstantHamiltonian {
    /// Drive `omega` with phase `phi` over the diagonal table at global detuning `delta`.
    pub fn new(table: &DiagonalTable, delta: f64, omega: f64, phi: f64) -> Result<Self> {
        Self::from_diagonal(table.n_qubits(), table.energies(delta), omega, phi)
    }

    pub fn from_diagonal(n: usize, diagonal: Vec<f64>, omega: f64, phi: f64) -> Result<Self> {
        if diagonal.len() != 1usize << n {
            return Err(input_err!("diagonal over {n} qubits needs {} entries", 1usize << n));
        }
        if !(omega.is_finite() && phi.is_finite()) || diagonal.iter().any(|e| !e.is_finite()) {
            return Err(input_err!("Hamiltonian entries must be finite"));
        }
        let (lo, hi) = diagonal
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &e| (a.min(e), b.max(e)));
        let spread = 0.5 * omega.abs() * n as f64;
        let (lo, hi) = (lo - spread, hi + spread);
        let center = 0.5 * (lo + hi);
        // small margin keeps the scaled spectrum strictly inside [-1, 1]
        let radius = (0.5 * (hi - lo)).max(1e-12) * (1.0 + 1e-9) + 1e-12;
        Ok(Self {
            n,
            diagonal,
            omega,
            phi,
            center,
            radius,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// `out = H x`.
    pub fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        self.apply_shifted(x, out, 0.0, 1.0);
    }

    /// `out = (H - shift) x / scale`.
    fn apply_shifted(&self, x: &[Complex64], out: &mut [Complex64], shift: f64, scale: f64) {
        let inv = scale.recip();
        for (o, (&xv, &d)) in out.iter_mut().zip(x.iter().zip(&self.diagonal)) {
            *o = xv * ((d - shift) * inv);
        }
        if self.omega != 0.0 {
            let up = Complex64::from_polar(0.5 * self.omega * inv, self.phi);
            let down = up.conj();
            for q in 0..self.n {
                let bit = 1usize << q;
                for block_start in (0..x.len()).step_by(bit << 1) {
                    for k0 in block_start..block_start + bit {
                        let k1 = k0 | bit;
                        out[k0] += up * x[k1];
                        out[k1] += down * x[k0];
                    }
                }
            }
        }
    }

    /// `⟨x|H|y⟩`.
    pub fn matrix_element(&self, x: &StateVector, y: &StateVector) -> Complex64 {
        let mut hy = vec![Complex64::new(0.0, 0.0); y.dim()];
        self.apply(y.amplitudes(), &mut hy);
        x.amplitudes().iter().zip(&hy).map(|(a, b)| a.conj() * b).sum()
    }

    /// Applies `exp(-i H t)` in place; negative `t` propagates backwards.
    pub fn propagate(&self, state: &mut StateVector, t: f64) -> Result<()> {
        if state.n_qubits() != self.n {
            return Err(input_err!("state has {} qubits, Hamiltonian {}", state.n_qubits(), self.n));
        }
        if !t.is_finite() {
            return Err(input_err!("propagation time must be finite"));
        }
        if t == 0.0 {
            return Ok(());
        }
        let x = self.radius * t.abs();
        let mut kmax = (x + 10.0 * x.cbrt() + 20.0) as usize;
        let bessel = loop {
            let b = bessel_j_sequence(x, kmax + 5);
            if b[kmax - 2..].iter().all(|v| v.abs() < SERIES_TOLERANCE) {
                break b;
            }
            kmax *= 2;
        };
        let terms = bessel
            .iter()
            .rposition(|v| v.abs() >= SERIES_TOLERANCE)
            .map_or(1, |k| k + 1);
        // coefficients c_k = (2 - δ_k0)(-i)^k J_k(x); conjugated for backward time
        let coeff = |k: usize| -> Complex64 {
            let ipow = match k % 4 {
                0 => Complex64::new(1.0, 0.0),
                1 => Complex64::new(0.0, -1.0),
                2 => Complex64::new(-1.0, 0.0),
                _ => Complex64::new(0.0, 1.0),
            };
            let c = ipow * if k == 0 { bessel[0] } else { 2.0 * bessel[k] };
            if t < 0.0 {
                c.conj()
            } else {
                c
            }
        };

        let dim = state.dim();
        let amps = state.amplitudes_mut();
        let mut t_prev = amps.to_vec();
        let mut t_cur = vec![Complex64::new(0.0, 0.0); dim];
        self.apply_shifted(&t_prev, &mut t_cur, self.center, self.radius);
        let mut acc: Vec<Complex64> = t_prev.iter().map(|v| v * coeff(0)).collect();
        if terms > 1 {
            let c1 = coeff(1);
            acc.iter_mut().zip(&t_cur).for_each(|(a, v)| *a += c1 * v);
        }
        let mut scratch = vec![Complex64::new(0.0, 0.0); dim];
        for k in 2..terms {
            self.apply_shifted(&t_cur, &mut scratch, self.center, self.radius);
            let ck = coeff(k);
            for i in 0..dim {
                let next = 2.0 * scratch[i] - t_prev[i];
                t_prev[i] = t_cur[i];
                t_cur[i] = next;
                acc[i] += ck * next;
            }
        }
        let global = Complex64::from_polar(1.0, -self.center * t);
        for (a, v) in amps.iter_mut().zip(acc) {
            *a = global * v;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rydsim::{evolve::rotation, InteractionMatrix, PulseSchedule, RydbergSystem};

    #[test]
    fn bessel_reference_values() {
        let j = bessel_j_sequence(1.0, 3);
        assert!((j[0] - 0.7651976865579666).abs() < 1e-15);
        assert!((j[1] - 0.44005058574493355).abs() < 1e-15);
        let j = bessel_j_sequence(30.0, 40);
        assert!((j[0] - (-0.08636798358104233)).abs() < 1e-13);
        assert!(j[40].abs() < 1e-3);
    }

    #[test]
    fn single_qubit_rotation_is_exact() {
        let h = ConstantHamiltonian::from_diagonal(1, vec![0.0, 0.0], 2.0, 0.3).unwrap();
        let mut s = StateVector::zero(1).unwrap();
        h.propagate(&mut s, 0.9).unwrap();
        let u = rotation(2.0, 0.3, 0.9);
        assert!((s.amplitudes()[0] - u[0][0]).norm() < 1e-13);
        assert!((s.amplitudes()[1] - u[1][0]).norm() < 1e-13);
    }

    #[test]
    fn agrees_with_fine_strang_and_inverts() {
        let w = InteractionMatrix::from_values(3, vec![0.0, 3.0, 0.4, 3.0, 0.0, 1.2, 0.4, 1.2, 0.0]).unwrap();
        let sys = RydbergSystem::from_interactions(w);
        let local = vec![0.5, -1.0, 2.0];
        let table = sys.diagonal(Some(&local)).unwrap();
        let h = ConstantHamiltonian::new(&table, 1.5, 4.0, 0.7).unwrap();
        let start = StateVector::plus(3).unwrap();
        let mut exact = start.clone();
        h.propagate(&mut exact, 1.3).unwrap();
        let sched = PulseSchedule::constant(1.3, 4.0, 1.5, 0.7).with_local_detuning(local);
        let strang = sys.evolve(&start, &sched, 2e-5, 0.0, 1.3).unwrap();
        assert!(exact.distance(&strang) < 1e-6, "distance {}", exact.distance(&strang));
        h.propagate(&mut exact, -1.3).unwrap();
        assert!(exact.distance(&start) < 1e-12);
    }
}
