//! Collective angular-momentum (Dicke ladder) operators.
//!
//! The symmetric subspace of N two-level nuclei maps onto a single spin
//! j = N/2. Basis states |j, m⟩ are ordered by increasing m = −j … +j, so
//! index 0 is the collective ground state.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::params::N_ATOMS_CAP;

/// Dense matrix realizations of J₊, J₋ and J_z on the (N+1)-dimensional
/// ladder.
#[derive(Debug, Clone)]
pub struct CollectiveOperators {
    pub j_plus: Array2<C64>,
    pub j_minus: Array2<C64>,
    pub j_z: Array2<C64>,
}

/// Ladder coefficients c_k = ⟨j, m_{k+1}| J₊ |j, m_k⟩ = √(j(j+1) − m_k(m_k+1))
/// for k = 0 … N−1, with m_k = −j + k.
pub fn ladder_coefficients(n_atoms: usize) -> Vec<f64> {
    let j = n_atoms as f64 / 2.0;
    (0..n_atoms)
        .map(|k| {
            let m = -j + k as f64;
            (j * (j + 1.0) - m * (m + 1.0)).sqrt()
        })
        .collect()
}

/// m values along the ladder, m_k = −j + k.
pub fn m_values(n_atoms: usize) -> Vec<f64> {
    let j = n_atoms as f64 / 2.0;
    (0..=n_atoms).map(|k| -j + k as f64).collect()
}

/// Diagonal of J₊J₋: w_k = j(j+1) − m_k(m_k − 1) = c_{k−1}², with w_0 = 0.
pub fn jpjm_diagonal(n_atoms: usize) -> Vec<f64> {
    let j = n_atoms as f64 / 2.0;
    (0..=n_atoms)
        .map(|k| {
            let m = -j + k as f64;
            j * (j + 1.0) - m * (m - 1.0)
        })
        .collect()
}

/// Build the dense collective operators for an ensemble of `n_atoms` nuclei.
pub fn build_operators(n_atoms: usize) -> Result<CollectiveOperators> {
    if n_atoms == 0 {
        return Err(Error::Invalid("n_atoms must be at least 1".into()));
    }
    if n_atoms > N_ATOMS_CAP {
        return Err(Error::Invalid(format!(
            "n_atoms = {n_atoms} exceeds the dimension cap {N_ATOMS_CAP}"
        )));
    }
    let dim = n_atoms + 1;
    let c = ladder_coefficients(n_atoms);
    let m = m_values(n_atoms);

    let mut j_plus = Array2::<C64>::zeros((dim, dim));
    let mut j_minus = Array2::<C64>::zeros((dim, dim));
    let mut j_z = Array2::<C64>::zeros((dim, dim));
    for k in 0..n_atoms {
        j_plus[(k + 1, k)] = C64::new(c[k], 0.0);
        j_minus[(k, k + 1)] = C64::new(c[k], 0.0);
    }
    for k in 0..dim {
        j_z[(k, k)] = C64::new(m[k], 0.0);
    }
    Ok(CollectiveOperators { j_plus, j_minus, j_z })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn commutator(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
        a.dot(b) - b.dot(a)
    }

    #[test]
    fn rejects_zero_and_oversized() {
        assert!(build_operators(0).is_err());
        assert!(build_operators(N_ATOMS_CAP + 1).is_err());
    }

    #[test]
    fn n1_is_pauli() {
        let ops = build_operators(1).unwrap();
        // sigma_+ in the (ground, excited) ordering, sigma_z / 2 diagonal.
        assert_relative_eq!(ops.j_plus[(1, 0)].re, 1.0, max_relative = 1e-15);
        assert_relative_eq!(ops.j_plus[(0, 1)].norm(), 0.0);
        assert_relative_eq!(ops.j_minus[(0, 1)].re, 1.0, max_relative = 1e-15);
        assert_relative_eq!(ops.j_z[(0, 0)].re, -0.5);
        assert_relative_eq!(ops.j_z[(1, 1)].re, 0.5);
    }

    #[test]
    fn n2_ladder_coefficient() {
        // J+ |1,-1> = sqrt(2) |1,0>
        let ops = build_operators(2).unwrap();
        assert_relative_eq!(ops.j_plus[(1, 0)].re, 2.0_f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn ladder_invariant_and_commutators() {
        for n in [1, 2, 5, 12] {
            let ops = build_operators(n).unwrap();
            let j = n as f64 / 2.0;
            for k in 0..n {
                let m = -j + k as f64;
                let expect = (j * (j + 1.0) - m * (m + 1.0)).sqrt();
                assert_relative_eq!(ops.j_plus[(k + 1, k)].re, expect, max_relative = 1e-14);
            }
            // J- = J+ dagger
            let dag = ops.j_plus.t().mapv(|z| z.conj());
            assert!(ops
                .j_minus
                .iter()
                .zip(dag.iter())
                .all(|(a, b)| (a - b).norm() == 0.0));
            // [J+, J-] = 2 Jz and [Jz, J±] = ±J± as exact matrix identities
            let c1 = commutator(&ops.j_plus, &ops.j_minus);
            let two_jz = ops.j_z.mapv(|z| 2.0 * z);
            for (a, b) in c1.iter().zip(two_jz.iter()) {
                assert!((a - b).norm() < 1e-12);
            }
            let c2 = commutator(&ops.j_z, &ops.j_plus);
            for (a, b) in c2.iter().zip(ops.j_plus.iter()) {
                assert!((a - b).norm() < 1e-12);
            }
            let c3 = commutator(&ops.j_z, &ops.j_minus);
            for (a, b) in c3.iter().zip(ops.j_minus.iter()) {
                assert!((a + b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn n100_trace_jpjm_matches_direct_sum() {
        // Independent oracle: direct summation over the ladder.
        let n = 100;
        let ops = build_operators(n).unwrap();
        let prod = ops.j_plus.dot(&ops.j_minus);
        let trace: f64 = (0..=n).map(|k| prod[(k, k)].re).sum();
        let j = n as f64 / 2.0;
        let oracle: f64 = (0..=n)
            .map(|k| {
                let m = -j + k as f64;
                j * (j + 1.0) - m * (m - 1.0)
            })
            .sum();
        assert_relative_eq!(trace, oracle, max_relative = 1e-12);
    }
}
