//! Random parameterized quantum circuits: a Hadamard wall followed by `L`
//! layers of randomly-axed Pauli rotations and a CNOT chain.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::statevector::{expectation, run_circuit, Gate, Ket, Pauli, PauliString};

/// Full description of one circuit instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RpqcSpec {
    pub n: usize,
    #[serde(rename = "L")]
    pub layers: usize,
    pub seed: u64,
    /// `axes[l][i]`: rotation axis of qubit `i` in layer `l` (0-based storage).
    pub axes: Vec<Vec<Pauli>>,
    /// `thetas[l][i]`: rotation angle in radians, in `[0, 2pi)`.
    pub thetas: Vec<Vec<f64>>,
}

/// 1-based position of a rotation parameter: `layer` in `1..=L`, `qubit` in `1..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParamIndex {
    pub layer: usize,
    pub qubit: usize,
}

impl ParamIndex {
    pub const FIRST: ParamIndex = ParamIndex { layer: 1, qubit: 1 };

    pub fn new(layer: usize, qubit: usize) -> Self {
        Self { layer, qubit }
    }
}

impl RpqcSpec {
    pub fn new(axes: Vec<Vec<Pauli>>, thetas: Vec<Vec<f64>>, seed: u64) -> Result<Self> {
        let layers = axes.len();
        let n = axes.first().map_or(0, Vec::len);
        let spec = Self {
            n,
            layers,
            seed,
            axes,
            thetas,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("circuit needs at least one qubit".into()));
        }
        let shape_ok = self.axes.len() == self.layers
            && self.thetas.len() == self.layers
            && self.axes.iter().all(|row| row.len() == self.n)
            && self.thetas.iter().all(|row| row.len() == self.n);
        if !shape_ok {
            return Err(Error::InvalidConfig(format!(
                "axes/thetas must both be {}x{}",
                self.layers, self.n
            )));
        }
        if self.axes.iter().flatten().any(|&a| a == Pauli::I) {
            return Err(Error::InvalidConfig("rotation axis must be X, Y or Z".into()));
        }
        if self
            .thetas
            .iter()
            .flatten()
            .any(|t| !(0.0..TAU).contains(t))
        {
            return Err(Error::InvalidConfig("angles must lie in [0, 2pi)".into()));
        }
        Ok(())
    }

    pub fn num_params(&self) -> usize {
        self.n * self.layers
    }

    pub fn check_index(&self, k: ParamIndex) -> Result<()> {
        if k.layer == 0 || k.layer > self.layers || k.qubit == 0 || k.qubit > self.n {
            return Err(Error::ParamOutOfRange {
                layer: k.layer,
                qubit: k.qubit,
            });
        }
        Ok(())
    }

    pub fn theta(&self, k: ParamIndex) -> f64 {
        self.thetas[k.layer - 1][k.qubit - 1]
    }

    /// Stores `angle` wrapped into `[0, 2pi)`; rotations are 2pi-periodic.
    pub fn set_theta(&mut self, k: ParamIndex, angle: f64) {
        let wrapped = angle.rem_euclid(TAU);
        self.thetas[k.layer - 1][k.qubit - 1] = if wrapped >= TAU { 0.0 } else { wrapped };
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: RpqcSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Draws axes uniformly from `{X, Y, Z}` and angles uniformly from `[0, 2pi)`.
pub fn sample_rpqc(n: usize, layers: usize, seed: u64) -> Result<RpqcSpec> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!(
            "an RPQC needs at least 2 qubits for the Z1 Z2 observable, got {n}"
        )));
    }
    if layers == 0 {
        return Err(Error::InvalidConfig("an RPQC needs at least one layer".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut axes = Vec::with_capacity(layers);
    let mut thetas = Vec::with_capacity(layers);
    for _ in 0..layers {
        let mut axis_row = Vec::with_capacity(n);
        let mut theta_row = Vec::with_capacity(n);
        for _ in 0..n {
            axis_row.push(Pauli::AXES[rng.gen_range(0..3)]);
            theta_row.push(rng.gen_range(0.0..TAU));
        }
        axes.push(axis_row);
        thetas.push(theta_row);
    }
    Ok(RpqcSpec {
        n,
        layers,
        seed,
        axes,
        thetas,
    })
}

pub fn hadamard_wall(n: usize) -> Vec<Gate> {
    (0..n).map(Gate::Hadamard).collect()
}

/// `W_l`: CNOT chain with control `i`, target `i + 1`.
pub fn entangler(n: usize) -> Vec<Gate> {
    (0..n.saturating_sub(1)).map(|i| Gate::cnot(i, i + 1)).collect()
}

/// Rotations of one layer (qubit order) followed by the entangler.
pub fn layer_gates(axes: &[Pauli], thetas: &[f64]) -> Vec<Gate> {
    let n = axes.len();
    let mut gates: Vec<Gate> = axes
        .iter()
        .zip(thetas)
        .enumerate()
        .map(|(q, (&axis, &angle))| Gate::rotation(axis, q, angle))
        .collect();
    gates.extend(entangler(n));
    gates
}

/// Hadamard wall, then every layer in order.
pub fn build_gates(spec: &RpqcSpec) -> Vec<Gate> {
    let mut gates = hadamard_wall(spec.n);
    for (axes, thetas) in spec.axes.iter().zip(&spec.thetas) {
        gates.extend(layer_gates(axes, thetas));
    }
    gates
}

/// Position of parameter `k` in [`build_gates`] output.
pub fn gate_position(n: usize, k: ParamIndex) -> usize {
    let per_layer = n + n.saturating_sub(1);
    n + (k.layer - 1) * per_layer + (k.qubit - 1)
}

/// `E(theta) = <0|U^dagger H U|0>`.
pub fn energy(spec: &RpqcSpec, obs: &PauliString) -> Result<f64> {
    if obs.num_qubits() != spec.n {
        return Err(Error::DimensionMismatch {
            expected: spec.n,
            found: obs.num_qubits(),
        });
    }
    let psi = run_circuit(&Ket::zero(spec.n), &build_gates(spec))?;
    expectation(&psi, obs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_in_seed() {
        let a = sample_rpqc(4, 10, 7).unwrap();
        let b = sample_rpqc(4, 10, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_rpqc(4, 10, 8).unwrap());
    }

    #[test]
    fn rejects_single_qubit() {
        assert!(sample_rpqc(1, 3, 0).is_err());
        assert!(sample_rpqc(3, 0, 0).is_err());
    }

    #[test]
    fn gate_count() {
        let spec = sample_rpqc(3, 2, 1).unwrap();
        assert_eq!(build_gates(&spec).len(), 13);
    }

    #[test]
    fn gate_position_points_at_rotation() {
        let spec = sample_rpqc(4, 3, 5).unwrap();
        let gates = build_gates(&spec);
        for layer in 1..=3 {
            for qubit in 1..=4 {
                let k = ParamIndex::new(layer, qubit);
                match &gates[gate_position(4, k)] {
                    Gate::Rotation { target, angle, .. } => {
                        assert_eq!(*target, qubit - 1);
                        assert_eq!(*angle, spec.theta(k));
                    }
                    other => panic!("expected rotation, got {other:?}"),
                }
            }
        }
    }

    #[test]
    fn json_roundtrip_uses_flat_schema() {
        let spec = sample_rpqc(2, 2, 3).unwrap();
        let text = spec.to_json().unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["n", "L", "seed", "axes", "thetas"] {
            assert!(value.get(key).is_some(), "missing {key}");
        }
        assert_eq!(RpqcSpec::from_json(&text).unwrap(), spec);
    }

    #[test]
    fn identity_observable_energy_is_one() {
        let spec = sample_rpqc(3, 4, 11).unwrap();
        let e = energy(&spec, &PauliString::identity(3)).unwrap();
        assert!((e - 1.0).abs() < 1e-12);
    }

    #[test]
    fn set_theta_wraps() {
        let mut spec = sample_rpqc(2, 1, 0).unwrap();
        spec.set_theta(ParamIndex::FIRST, -0.5);
        assert!((spec.theta(ParamIndex::FIRST) - (TAU - 0.5)).abs() < 1e-15);
        spec.validate().unwrap();
    }
}
