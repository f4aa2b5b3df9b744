//! Dense n-qubit statevector with the gate kernels used by the random
//! parameterized circuits and their auxiliary-qubit extensions.
//!
//! Conventions, fixed crate-wide:
//!
//! * qubit 0 is the most significant bit of the basis index (big-endian), so
//!   `|q0 q1 ... q(n-1)>` has index `q0 * 2^(n-1) + ... + q(n-1)`;
//! * a Pauli rotation with angle `theta` is `exp(-i * theta * V)`, with no
//!   factor of one half. The eigenvalue gap of the generator is therefore 2
//!   and the exact two-term shift for a single rotation is `pi/4`;
//! * kets are never normalized implicitly. Linear combinations of circuit
//!   outputs carry whatever norm the combination produces.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Residue above which an expectation value is rejected as non-Hermitian.
pub const IMAGINARY_RESIDUE_LIMIT: f64 = 1e-9;

/// Single-qubit Pauli label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const AXES: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    /// 2x2 matrix in row-major order.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::I => [[ONE, ZERO], [ZERO, ONE]],
            Pauli::X => [[ZERO, ONE], [ONE, ZERO]],
            Pauli::Y => [[ZERO, -i], [i, ZERO]],
            Pauli::Z => [[ONE, ZERO], [ZERO, -ONE]],
        }
    }

    /// Matrix of `exp(-i * angle * self)`.
    pub fn rotation_matrix(self, angle: f64) -> [[Complex64; 2]; 2] {
        let (s, c) = angle.sin_cos();
        match self {
            Pauli::I => {
                let ph = Complex64::from_polar(1.0, -angle);
                [[ph, ZERO], [ZERO, ph]]
            }
            Pauli::X => [
                [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
                [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
            ],
            Pauli::Y => [
                [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
            ],
            Pauli::Z => [
                [Complex64::new(c, -s), ZERO],
                [ZERO, Complex64::new(c, s)],
            ],
        }
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

impl TryFrom<char> for Pauli {
    type Error = Error;

    fn try_from(c: char) -> Result<Self> {
        match c.to_ascii_uppercase() {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(Error::InvalidConfig(format!("unknown Pauli label {other:?}"))),
        }
    }
}

/// Tensor product of single-qubit Paulis, one label per qubit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    labels: Vec<Pauli>,
}

impl PauliString {
    pub fn new(labels: Vec<Pauli>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidConfig("empty Pauli string".into()));
        }
        Ok(Self { labels })
    }

    pub fn identity(num_qubits: usize) -> Self {
        Self {
            labels: vec![Pauli::I; num_qubits.max(1)],
        }
    }

    /// `Z` on the first two qubits, identity elsewhere.
    pub fn z1z2(num_qubits: usize) -> Result<Self> {
        if num_qubits < 2 {
            return Err(Error::InvalidConfig("Z1 Z2 needs at least two qubits".into()));
        }
        let mut labels = vec![Pauli::I; num_qubits];
        labels[0] = Pauli::Z;
        labels[1] = Pauli::Z;
        Ok(Self { labels })
    }

    pub fn labels(&self) -> &[Pauli] {
        &self.labels
    }

    pub fn num_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn is_identity(&self) -> bool {
        self.labels.iter().all(|&p| p == Pauli::I)
    }

    /// Bit masks `(flip, phase)` and the number of `Y` factors: the string maps
    /// `|b>` to `i^ny * (-1)^popcount(b & phase) |b ^ flip>`.
    fn masks(&self) -> (usize, usize, u32) {
        let n = self.labels.len();
        let mut flip = 0usize;
        let mut phase = 0usize;
        let mut ny = 0u32;
        for (q, p) in self.labels.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            match p {
                Pauli::I => {}
                Pauli::X => flip |= bit,
                Pauli::Y => {
                    flip |= bit;
                    phase |= bit;
                    ny += 1;
                }
                Pauli::Z => phase |= bit,
            }
        }
        (flip, phase, ny)
    }

    /// Returns `P|psi>`.
    pub fn apply(&self, state: &Ket) -> Result<Ket> {
        check_qubits(self.num_qubits(), state.num_qubits)?;
        let (flip, phase, ny) = self.masks();
        let global = Complex64::new(0.0, 1.0).powu(ny % 4);
        let mut out = vec![ZERO; state.amplitudes.len()];
        for (b, amp) in state.amplitudes.iter().enumerate() {
            let sign = if (b & phase).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            out[b ^ flip] = global * sign * amp;
        }
        Ok(Ket {
            num_qubits: state.num_qubits,
            amplitudes: out,
        })
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let labels = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(Pauli::try_from)
            .collect::<Result<Vec<_>>>()?;
        PauliString::new(labels)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.labels {
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// Complex amplitude vector over `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl Ket {
    /// `|0...0>`.
    pub fn zero(num_qubits: usize) -> Self {
        Self::basis(num_qubits, 0)
    }

    /// Computational basis state with the given (big-endian) index.
    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let dim = 1usize << num_qubits;
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index % dim] = ONE;
        Self {
            num_qubits,
            amplitudes,
        }
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(len));
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            num_qubits: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn scaled(mut self, factor: Complex64) -> Self {
        for a in &mut self.amplitudes {
            *a *= factor;
        }
        self
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: Complex64, other: &Ket, b: Complex64) -> Result<Ket> {
        check_qubits(self.num_qubits, other.num_qubits)?;
        let amplitudes = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(Ket {
            num_qubits: self.num_qubits,
            amplitudes,
        })
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.num_qubits)?;
        self.apply_unchecked(gate, 0, 0);
        Ok(())
    }

    /// Applies each gate in order; the first gate acts first.
    pub fn apply_all(&mut self, gates: &[Gate]) -> Result<()> {
        for gate in gates {
            gate.validate(self.num_qubits)?;
        }
        for gate in gates {
            self.apply_unchecked(gate, 0, 0);
        }
        Ok(())
    }

    /// Applies the inverse of a gate sequence: gates are undone last-first.
    pub fn unapply_all(&mut self, gates: &[Gate]) -> Result<()> {
        for gate in gates {
            gate.validate(self.num_qubits)?;
        }
        for gate in gates.iter().rev() {
            self.apply_unchecked(&gate.dagger(), 0, 0);
        }
        Ok(())
    }

    pub(crate) fn apply_unchecked(&mut self, gate: &Gate, cmask: usize, cval: usize) {
        match gate {
            Gate::Hadamard(q) => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                let m = [
                    [Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
                    [Complex64::new(h, 0.0), Complex64::new(-h, 0.0)],
                ];
                self.apply_single(*q, &m, cmask, cval);
            }
            Gate::Rotation { axis, target, angle } => {
                self.apply_single(*target, &axis.rotation_matrix(*angle), cmask, cval);
            }
            Gate::Pauli { axis, target } => {
                self.apply_single(*target, &axis.matrix(), cmask, cval);
            }
            Gate::Cnot { control, target } => {
                let bit = self.bit(*control);
                self.apply_single(*target, &Pauli::X.matrix(), cmask | bit, cval | bit);
            }
            Gate::PatternControlled {
                controls,
                pattern,
                inner,
            } => {
                let mut mask = cmask;
                let mut val = cval;
                for (&q, &on) in controls.iter().zip(pattern) {
                    let bit = self.bit(q);
                    mask |= bit;
                    if on {
                        val |= bit;
                    }
                }
                self.apply_unchecked(inner, mask, val);
            }
        }
    }

    fn bit(&self, qubit: usize) -> usize {
        1usize << (self.num_qubits - 1 - qubit)
    }

    fn apply_single(&mut self, qubit: usize, m: &[[Complex64; 2]; 2], cmask: usize, cval: usize) {
        let stride = self.bit(qubit);
        let dim = self.amplitudes.len();
        let amps = &mut self.amplitudes;
        let mut base = 0;
        while base < dim {
            for i0 in base..base + stride {
                if i0 & cmask != cval {
                    continue;
                }
                let i1 = i0 | stride;
                let a0 = amps[i0];
                let a1 = amps[i1];
                amps[i0] = m[0][0] * a0 + m[0][1] * a1;
                amps[i1] = m[1][0] * a0 + m[1][1] * a1;
            }
            base += 2 * stride;
        }
    }
}

/// Circuit element.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    Hadamard(usize),
    /// `exp(-i * angle * axis)` on `target`.
    Rotation { axis: Pauli, target: usize, angle: f64 },
    /// Bare Pauli operator; used for generator insertions, not as a circuit gate.
    Pauli { axis: Pauli, target: usize },
    Cnot { control: usize, target: usize },
    /// `inner` fires only when the control register reads `pattern`
    /// (`true` = |1>, `false` = |0>, i.e. an open control).
    PatternControlled {
        controls: Vec<usize>,
        pattern: Vec<bool>,
        inner: Box<Gate>,
    },
}

impl Gate {
    pub fn rotation(axis: Pauli, target: usize, angle: f64) -> Self {
        Gate::Rotation {
            axis,
            target,
            angle,
        }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::Cnot { control, target }
    }

    /// Every qubit the gate touches, controls included.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::Hadamard(q) => vec![*q],
            Gate::Rotation { target, .. } | Gate::Pauli { target, .. } => vec![*target],
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::PatternControlled {
                controls, inner, ..
            } => {
                let mut qs = controls.clone();
                qs.extend(inner.qubits());
                qs
            }
        }
    }

    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        for q in self.qubits() {
            if q >= num_qubits {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    num_qubits,
                });
            }
        }
        match self {
            Gate::Cnot { control, target } if control == target => {
                Err(Error::ControlIsTarget(*control))
            }
            Gate::PatternControlled {
                controls,
                pattern,
                inner,
            } => {
                if controls.len() != pattern.len() {
                    return Err(Error::PatternLength {
                        pattern: pattern.len(),
                        register: controls.len(),
                    });
                }
                let inner_qubits = inner.qubits();
                let mut seen = controls.clone();
                seen.sort_unstable();
                seen.dedup();
                if seen.len() != controls.len()
                    || controls.iter().any(|c| inner_qubits.contains(c))
                {
                    return Err(Error::OverlappingQubits);
                }
                inner.validate(num_qubits)
            }
            _ => Ok(()),
        }
    }

    /// Inverse gate.
    pub fn dagger(&self) -> Gate {
        match self {
            Gate::Rotation {
                axis,
                target,
                angle,
            } => Gate::Rotation {
                axis: *axis,
                target: *target,
                angle: -angle,
            },
            Gate::PatternControlled {
                controls,
                pattern,
                inner,
            } => Gate::PatternControlled {
                controls: controls.clone(),
                pattern: pattern.clone(),
                inner: Box::new(inner.dagger()),
            },
            other => other.clone(),
        }
    }
}

fn check_qubits(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Returns the state after `gate`.
pub fn apply_gate(state: &Ket, gate: &Gate) -> Result<Ket> {
    let mut out = state.clone();
    out.apply(gate)?;
    Ok(out)
}

/// Applies `gates` left to right.
pub fn run_circuit(state: &Ket, gates: &[Gate]) -> Result<Ket> {
    let mut out = state.clone();
    out.apply_all(gates)?;
    Ok(out)
}

/// `<a|b>`, conjugate-linear in `a`.
pub fn inner_product(a: &Ket, b: &Ket) -> Result<Complex64> {
    check_qubits(a.num_qubits, b.num_qubits)?;
    Ok(a
        .amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// `<a|P|b>` without materializing `P|b>`.
pub fn matrix_element(a: &Ket, obs: &PauliString, b: &Ket) -> Result<Complex64> {
    check_qubits(a.num_qubits, b.num_qubits)?;
    check_qubits(obs.num_qubits(), b.num_qubits)?;
    let (flip, phase, ny) = obs.masks();
    let global = Complex64::new(0.0, 1.0).powu(ny % 4);
    let mut acc = ZERO;
    for (idx, amp) in b.amplitudes.iter().enumerate() {
        let term = a.amplitudes[idx ^ flip].conj() * amp;
        if (idx & phase).count_ones() % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    Ok(global * acc)
}

/// `<psi|P|psi>`, not divided by `<psi|psi>`.
pub fn expectation(state: &Ket, obs: &PauliString) -> Result<f64> {
    let value = matrix_element(state, obs, state)?;
    let scale = state.norm_sqr().max(1.0);
    if value.im.abs() > IMAGINARY_RESIDUE_LIMIT * scale {
        return Err(Error::ImaginaryResidue(value.im));
    }
    Ok(value.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: &Ket, b: &Ket, tol: f64) -> bool {
        a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .all(|(x, y)| (x - y).norm() <= tol)
    }

    #[test]
    fn hadamard_on_zero() {
        let out = apply_gate(&Ket::zero(1), &Gate::Hadamard(0)).unwrap();
        assert!((out.amplitudes()[0] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((out.amplitudes()[1] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn zero_angle_rotation_is_identity() {
        let psi = Ket::from_amplitudes(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        for axis in Pauli::AXES {
            let out = apply_gate(&psi, &Gate::rotation(axis, 0, 0.0)).unwrap();
            assert_eq!(out, psi);
        }
    }

    #[test]
    fn cnot_truth_table_is_big_endian() {
        // |10>: qubit 0 set, index 2.
        let out = apply_gate(&Ket::basis(2, 0b10), &Gate::cnot(0, 1)).unwrap();
        assert_eq!(out, Ket::basis(2, 0b11));
        let out = apply_gate(&Ket::basis(2, 0b01), &Gate::cnot(0, 1)).unwrap();
        assert_eq!(out, Ket::basis(2, 0b01));
    }

    #[test]
    fn hadamard_twice_and_empty_circuit() {
        let psi = Ket::zero(1);
        let out = run_circuit(&psi, &[Gate::Hadamard(0), Gate::Hadamard(0)]).unwrap();
        assert!(close(&out, &psi, 1e-15));
        assert_eq!(run_circuit(&psi, &[]).unwrap(), psi);
    }

    #[test]
    fn rotation_conventions() {
        // exp(-i t Y)|0> = cos t |0> + sin t |1>
        let t = 0.3_f64;
        let out = apply_gate(&Ket::zero(1), &Gate::rotation(Pauli::Y, 0, t)).unwrap();
        assert!((out.amplitudes()[0] - c(t.cos(), 0.0)).norm() < 1e-15);
        assert!((out.amplitudes()[1] - c(t.sin(), 0.0)).norm() < 1e-15);
        // exp(-i t Z)|0> = e^{-it}|0>
        let out = apply_gate(&Ket::zero(1), &Gate::rotation(Pauli::Z, 0, t)).unwrap();
        assert!((out.amplitudes()[0] - Complex64::from_polar(1.0, -t)).norm() < 1e-15);
    }

    #[test]
    fn zz_expectations() {
        let zz: PauliString = "ZZ".parse().unwrap();
        assert_eq!(expectation(&Ket::basis(2, 0b00), &zz).unwrap(), 1.0);
        assert_eq!(expectation(&Ket::basis(2, 0b01), &zz).unwrap(), -1.0);
        let balanced = Ket::from_amplitudes(vec![c(0.5, 0.0); 4]).unwrap();
        assert!(expectation(&balanced, &zz).unwrap().abs() < 1e-15);
        let doubled = Ket::basis(2, 0).scaled(c(2.0, 0.0));
        assert_eq!(expectation(&doubled, &zz).unwrap(), 4.0);
    }

    #[test]
    fn y_string_phase() {
        // Y|0> = i|1>
        let y: PauliString = "Y".parse().unwrap();
        let out = y.apply(&Ket::zero(1)).unwrap();
        assert_eq!(out.amplitudes()[1], c(0.0, 1.0));
        assert_eq!(out.amplitudes()[0], c(0.0, 0.0));
    }

    #[test]
    fn inner_products() {
        let zero = Ket::basis(1, 0);
        let one = Ket::basis(1, 1);
        assert_eq!(inner_product(&zero, &zero).unwrap(), c(1.0, 0.0));
        assert_eq!(inner_product(&zero, &one).unwrap(), c(0.0, 0.0));
        let a = Ket::from_amplitudes(vec![c(0.0, 1.0), c(0.0, 0.0)]).unwrap();
        // conjugate-linear in the first slot
        assert_eq!(inner_product(&a, &zero).unwrap(), c(0.0, -1.0));
    }

    #[test]
    fn pattern_controlled_fires_on_pattern_only() {
        // controls [0,1] pattern 10, inner X on qubit 2
        let gate = Gate::PatternControlled {
            controls: vec![0, 1],
            pattern: vec![true, false],
            inner: Box::new(Gate::Pauli {
                axis: Pauli::X,
                target: 2,
            }),
        };
        let out = apply_gate(&Ket::basis(3, 0b100), &gate).unwrap();
        assert_eq!(out, Ket::basis(3, 0b101));
        let out = apply_gate(&Ket::basis(3, 0b110), &gate).unwrap();
        assert_eq!(out, Ket::basis(3, 0b110));
    }

    #[test]
    fn validation_errors() {
        let mut psi = Ket::zero(2);
        assert_eq!(
            psi.apply(&Gate::Hadamard(2)),
            Err(Error::QubitOutOfRange {
                index: 2,
                num_qubits: 2
            })
        );
        assert_eq!(psi.apply(&Gate::cnot(1, 1)), Err(Error::ControlIsTarget(1)));
        let bad = Gate::PatternControlled {
            controls: vec![0],
            pattern: vec![true, false],
            inner: Box::new(Gate::Hadamard(1)),
        };
        assert!(matches!(psi.apply(&bad), Err(Error::PatternLength { .. })));
        let zz: PauliString = "ZZZ".parse().unwrap();
        assert!(expectation(&psi, &zz).is_err());
        assert!(Ket::from_amplitudes(vec![c(1.0, 0.0); 3]).is_err());
        assert!(Ket::from_amplitudes(vec![c(f64::NAN, 0.0), c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn unapply_inverts() {
        let gates = vec![
            Gate::Hadamard(0),
            Gate::rotation(Pauli::X, 1, 0.7),
            Gate::cnot(0, 1),
            Gate::rotation(Pauli::Y, 0, -1.1),
        ];
        let mut psi = Ket::zero(2);
        psi.apply_all(&gates).unwrap();
        psi.unapply_all(&gates).unwrap();
        assert!(close(&psi, &Ket::zero(2), 1e-14));
    }
}
