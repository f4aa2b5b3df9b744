//! Dense-matrix reference construction of gate sequences.
//!
//! Every gate is expanded into a full `2^n x 2^n` operator from Kronecker
//! products of 2x2 blocks and projectors, independently of the statevector
//! kernels, so the two can be checked against each other at small `n`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::statevector::{Gate, Ket, Pauli, PauliString};

pub type CMatrix = DMatrix<Complex64>;

/// Largest register that may be expanded densely.
pub const MAX_DENSE_QUBITS: usize = 12;

fn mat2(m: [[Complex64; 2]; 2]) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[m[0][0], m[0][1], m[1][0], m[1][1]])
}

fn projector(bit: bool) -> CMatrix {
    let (a, b) = if bit { (0.0, 1.0) } else { (1.0, 0.0) };
    CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        Complex64::new(a, 0.0),
        Complex64::new(b, 0.0),
    ]))
}

/// Kronecker product over qubits `0..n`, using `factors[q]` or identity.
fn kron_all(n: usize, factors: &[(usize, CMatrix)]) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for q in 0..n {
        let f = factors
            .iter()
            .find(|(qq, _)| *qq == q)
            .map(|(_, m)| m.clone())
            .unwrap_or_else(|| CMatrix::identity(2, 2));
        out = out.kronecker(&f);
    }
    out
}

/// Full-register operator of a single gate.
pub fn gate_matrix(gate: &Gate, n: usize) -> Result<CMatrix> {
    gate.validate(n)?;
    Ok(expand(gate, n))
}

fn expand(gate: &Gate, n: usize) -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match gate {
        Gate::Hadamard(q) => {
            let m = CMatrix::from_row_slice(
                2,
                2,
                &[
                    Complex64::new(h, 0.0),
                    Complex64::new(h, 0.0),
                    Complex64::new(h, 0.0),
                    Complex64::new(-h, 0.0),
                ],
            );
            kron_all(n, &[(*q, m)])
        }
        Gate::Rotation {
            axis,
            target,
            angle,
        } => {
            // cos(t) I - i sin(t) V, assembled from the Pauli matrix itself
            let v = mat2(axis.matrix());
            let m = CMatrix::identity(2, 2) * Complex64::new(angle.cos(), 0.0)
                - v * Complex64::new(0.0, angle.sin());
            kron_all(n, &[(*target, m)])
        }
        Gate::Pauli { axis, target } => kron_all(n, &[(*target, mat2(axis.matrix()))]),
        Gate::Cnot { control, target } => {
            let off = kron_all(n, &[(*control, projector(false))]);
            let on = kron_all(
                n,
                &[
                    (*control, projector(true)),
                    (*target, mat2(Pauli::X.matrix())),
                ],
            );
            off + on
        }
        Gate::PatternControlled {
            controls,
            pattern,
            inner,
        } => {
            let proj_factors: Vec<(usize, CMatrix)> = controls
                .iter()
                .zip(pattern)
                .map(|(&q, &b)| (q, projector(b)))
                .collect();
            let proj = kron_all(n, &proj_factors);
            let dim = 1usize << n;
            let inner_full = expand(inner, n);
            &proj * inner_full + (CMatrix::identity(dim, dim) - proj)
        }
    }
}

/// Dense operator of a gate sequence (first gate acts first).
pub fn to_dense(gates: &[Gate], n: usize) -> Result<CMatrix> {
    if n > MAX_DENSE_QUBITS {
        return Err(Error::TooManyQubits(n));
    }
    let dim = 1usize << n;
    let mut u = CMatrix::identity(dim, dim);
    for g in gates {
        u = gate_matrix(g, n)? * u;
    }
    Ok(u)
}

/// Dense operator of a Pauli string.
pub fn pauli_matrix(obs: &PauliString) -> CMatrix {
    let factors: Vec<(usize, CMatrix)> = obs
        .labels()
        .iter()
        .enumerate()
        .map(|(q, p)| (q, mat2(p.matrix())))
        .collect();
    kron_all(obs.num_qubits(), &factors)
}

pub fn ket_to_vector(ket: &Ket) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_column_slice(ket.amplitudes())
}

/// Largest entry of `|U^dagger U - I|`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.nrows();
    let d = u.adjoint() * u - CMatrix::identity(n, n);
    d.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hadamard_matrix() {
        let u = to_dense(&[Gate::Hadamard(0)], 1).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expected = [h, h, h, -h];
        for (z, e) in u.transpose().iter().zip(expected) {
            assert!((z - Complex64::new(e, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn empty_is_identity() {
        let u = to_dense(&[], 2).unwrap();
        assert_eq!(u, CMatrix::identity(4, 4));
    }

    #[test]
    fn too_large() {
        assert_eq!(to_dense(&[], 13), Err(Error::TooManyQubits(13)));
    }

    #[test]
    fn cnot_big_endian() {
        let u = to_dense(&[Gate::cnot(0, 1)], 2).unwrap();
        // |10> (index 2) -> |11> (index 3)
        assert_eq!(u[(3, 2)], Complex64::new(1.0, 0.0));
        assert_eq!(u[(1, 1)], Complex64::new(1.0, 0.0));
        assert!(unitarity_defect(&u) < 1e-15);
    }
}
