use num_complex::Complex64;

use super::InteractionMatrix;
use crate::error::{input_err, Result};

/// Diagonal part of the Hamiltonian over the computational basis.
///
/// The energy of basis state `k` at global detuning `Δ` is `Δ·h_k + S_k`, where
/// `h_k = (n - 2·popcount(k)) / 2` and `S_k` collects the time-independent
/// local-detuning and interaction terms.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalTable {
    n: usize,
    static_energy: Vec<f64>,
}

impl DiagonalTable {
    pub fn new(interactions: &InteractionMatrix, local_detuning: Option<&[f64]>) -> Result<Self> {
        let n = interactions.n();
        let zeros = vec![0.0; n];
        let local = match local_detuning {
            Some(d) if d.len() != n => {
                return Err(input_err!("{} local detunings for {n} atoms", d.len()));
            }
            Some(d) => d,
            None => &zeros,
        };
        if local.iter().any(|d| !d.is_finite()) {
            return Err(input_err!("local detunings must be finite"));
        }
        let dim = 1usize << n;
        let mut s = vec![0.0; dim];
        s[0] = local.iter().sum::<f64>() / 2.0;
        for k in 1..dim {
            let top = usize::BITS as usize - 1 - k.leading_zeros() as usize;
            let rest = k ^ (1 << top);
            // flipping s_top from +1 to -1 and switching on the n_top·n_j pairs
            let mut e = s[rest] - local[top];
            let mut bits = rest;
            while bits != 0 {
                let j = bits.trailing_zeros() as usize;
                e += 4.0 * interactions.get(top, j);
                bits &= bits - 1;
            }
            s[k] = e;
        }
        Ok(Self { n, static_energy: s })
    }

    /// Builds a table directly from static energies (mainly for tests and the
    /// ideal circuit model).
    pub fn from_static(n: usize, static_energy: Vec<f64>) -> Result<Self> {
        if static_energy.len() != 1usize << n {
            return Err(input_err!("table over {n} qubits needs {} entries", 1usize << n));
        }
        Ok(Self { n, static_energy })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn static_energies(&self) -> &[f64] {
        &self.static_energy
    }

    #[inline]
    pub fn h(&self, k: usize) -> f64 {
        (self.n as f64 - 2.0 * k.count_ones() as f64) / 2.0
    }

    /// Full diagonal energies at global detuning `delta`.
    pub fn energies(&self, delta: f64) -> Vec<f64> {
        self.static_energy
            .iter()
            .enumerate()
            .map(|(k, s)| delta * self.h(k) + s)
            .collect()
    }

    /// `(min, max)` of the energies at global detuning `delta`.
    pub fn energy_range(&self, delta: f64) -> (f64, f64) {
        self.static_energy
            .iter()
            .enumerate()
            .map(|(k, s)| delta * self.h(k) + s)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| (lo.min(e), hi.max(e)))
    }

    /// Phase factors `exp(-i τ S_k)`.
    pub(crate) fn static_phases(&self, tau: f64) -> Vec<Complex64> {
        self.static_energy
            .iter()
            .map(|&s| Complex64::from_polar(1.0, -tau * s))
            .collect()
    }

    /// Multiplies each amplitude by `exp(-i τ (Δ h_k + S_k))`.
    pub fn apply_phase(&self, amps: &mut [Complex64], delta: f64, tau: f64) {
        let global = self.popcount_phases(delta, tau);
        for (k, (a, &s)) in amps.iter_mut().zip(&self.static_energy).enumerate() {
            *a *= global[k.count_ones() as usize] * Complex64::from_polar(1.0, -tau * s);
        }
    }

    /// `exp(-i τ Δ h)` for each popcount `0..=n`.
    pub(crate) fn popcount_phases(&self, delta: f64, tau: f64) -> Vec<Complex64> {
        (0..=self.n)
            .map(|c| {
                let h = (self.n as f64 - 2.0 * c as f64) / 2.0;
                Complex64::from_polar(1.0, -tau * delta * h)
            })
            .collect()
    }
}

/// Coefficients `c_i` of the single-Z terms in the `{I, Z}` expansion of a
/// diagonal operator: `c_i = 2^-n Σ_z E(z) s_i(z)` with `s_i = +1` for bit 0.
pub fn linear_z_coefficients(n: usize, energies: &[f64]) -> Result<Vec<f64>> {
    if energies.len() != 1usize << n {
        return Err(input_err!("{n} qubits need {} energies", 1usize << n));
    }
    let scale = (energies.len() as f64).recip();
    Ok((0..n)
        .map(|i| {
            let bit = 1usize << i;
            let (mut plus, mut minus) = (0.0, 0.0);
            for (k, e) in energies.iter().enumerate() {
                if k & bit == 0 {
                    plus += e;
                } else {
                    minus += e;
                }
            }
            (plus - minus) * scale
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(w: f64) -> InteractionMatrix {
        InteractionMatrix::from_values(2, vec![0.0, w, w, 0.0]).unwrap()
    }

    #[test]
    fn energies_match_direct_formula() {
        let w = InteractionMatrix::from_values(3, vec![0.0, 1.0, 0.5, 1.0, 0.0, 2.0, 0.5, 2.0, 0.0]).unwrap();
        let local = [0.3, -0.7, 1.1];
        let t = DiagonalTable::new(&w, Some(&local)).unwrap();
        let delta = 0.9;
        for (k, e) in t.energies(delta).into_iter().enumerate() {
            let s: Vec<f64> = (0..3).map(|i| if k >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
            let mut direct = 0.0;
            for i in 0..3 {
                direct += delta / 2.0 * s[i] + local[i] / 2.0 * s[i];
                for j in i + 1..3 {
                    direct += w.get(i, j) * (s[i] - 1.0) * (s[j] - 1.0);
                }
            }
            assert!((e - direct).abs() < 1e-12, "k={k}: {e} vs {direct}");
        }
    }

    #[test]
    fn doubly_excited_pair_pays_four_w() {
        let t = DiagonalTable::new(&pair(2.5), None).unwrap();
        assert_eq!(t.static_energies(), &[0.0, 0.0, 0.0, 10.0]);
    }

    #[test]
    fn linear_coefficients_of_single_z() {
        // E = 0.5 Z_0 - 2 Z_1 + 3 Z_0 Z_1
        let e: Vec<f64> = (0..4)
            .map(|k: usize| {
                let s0 = if k & 1 == 0 { 1.0 } else { -1.0 };
                let s1 = if k & 2 == 0 { 1.0 } else { -1.0 };
                0.5 * s0 - 2.0 * s1 + 3.0 * s0 * s1
            })
            .collect();
        let c = linear_z_coefficients(2, &e).unwrap();
        assert!((c[0] - 0.5).abs() < 1e-15 && (c[1] + 2.0).abs() < 1e-15);
    }

    #[test]
    fn phase_preserves_modulus() {
        let t = DiagonalTable::new(&pair(1.0), Some(&[0.2, 0.4])).unwrap();
        let mut a = vec![Complex64::new(0.5, 0.0); 4];
        t.apply_phase(&mut a, 3.0, 0.7);
        assert!(a.iter().all(|x| (x.norm() - 0.5).abs() < 1e-15));
        let e = t.energies(3.0);
        for k in 0..4 {
            assert!((a[k] - Complex64::from_polar(0.5, -0.7 * e[k])).norm() < 1e-12);
        }
    }
}
