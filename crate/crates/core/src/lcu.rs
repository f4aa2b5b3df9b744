//! Linear combinations `alpha I + beta U` of a circuit with the identity.
//!
//! Three forms live here:
//!
//! * the whole-circuit combination applied arithmetically to a ket, which
//!   is what every objective and gradient uses;
//! * the auxiliary-qubit circuit for one parameterized layer, where
//!   `ceil(log2 n)` ancillas prepared by `R_y` select which rotation fires and
//!   are then projected onto the uniform superposition;
//! * the staged adjustable / intermediate / fixed structure used to remove
//!   the combination layer by layer during training.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rpqc::{build_gates, hadamard_wall, layer_gates, ParamIndex, RpqcSpec};
use crate::statevector::{expectation, matrix_element, run_circuit, Gate, Ket, Pauli, PauliString};

/// Mixing weights of `alpha I + beta U`, with `alpha^2 + beta^2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LcuCoefficients {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for LcuCoefficients {
    fn default() -> Self {
        Self {
            alpha: FRAC_1_SQRT_2,
            beta: FRAC_1_SQRT_2,
        }
    }
}

impl LcuCoefficients {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() || (alpha * alpha + beta * beta - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "LCU coefficients must satisfy alpha^2 + beta^2 = 1, got ({alpha}, {beta})"
            )));
        }
        Ok(Self { alpha, beta })
    }

    /// `alpha = cos(phi/2)`, `beta = sin(phi/2)`: the weights an `R_y(phi)`
    /// ancilla preparation produces.
    pub fn from_prep_angle(phi: f64) -> Self {
        let (s, c) = (phi / 2.0).sin_cos();
        Self { alpha: c, beta: s }
    }
}

/// `alpha |input> + beta U |input>`.
pub fn lcu_state(coeff: LcuCoefficients, gates: &[Gate], input: &Ket) -> Result<Ket> {
    let evolved = run_circuit(input, gates)?;
    input.combine(
        Complex64::new(coeff.alpha, 0.0),
        &evolved,
        Complex64::new(coeff.beta, 0.0),
    )
}

/// `E'(theta) = <0|(alpha I + beta U)^dagger H (alpha I + beta U)|0>`.
pub fn energy_lcu(coeff: LcuCoefficients, spec: &RpqcSpec, obs: &PauliString) -> Result<f64> {
    check_obs(spec.n, obs)?;
    let psi = lcu_state(coeff, &build_gates(spec), &Ket::zero(spec.n))?;
    expectation(&psi, obs)
}

/// The same objective through its expansion
/// `alpha^2 <0|H|0> + 2 alpha beta Re<0|H U|0> + beta^2 E`.
pub fn energy_lcu_expanded(coeff: LcuCoefficients, spec: &RpqcSpec, obs: &PauliString) -> Result<f64> {
    check_obs(spec.n, obs)?;
    let zero = Ket::zero(spec.n);
    let u0 = run_circuit(&zero, &build_gates(spec))?;
    let h00 = matrix_element(&zero, obs, &zero)?.re;
    let cross = matrix_element(&zero, obs, &u0)?.re;
    let e = expectation(&u0, obs)?;
    let LcuCoefficients { alpha, beta } = coeff;
    Ok(alpha * alpha * h00 + 2.0 * alpha * beta * cross + beta * beta * e)
}

fn check_obs(n: usize, obs: &PauliString) -> Result<()> {
    if obs.num_qubits() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: obs.num_qubits(),
        });
    }
    Ok(())
}

/// One parameterized layer entangled with an ancilla register.
///
/// Register layout: ancillas occupy qubits `0..a`, the system occupies
/// `a..a+n`. System rotation `i` fires when the ancilla register reads the
/// big-endian `a`-bit encoding of `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct AncillaLayerSpec {
    pub n: usize,
    pub a: usize,
    /// `R_y(phi)` angles in the half-angle convention: an ancilla ends in
    /// `cos(phi/2)|0> + sin(phi/2)|1>`.
    pub prep_angles: Vec<f64>,
    /// Single-qubit gates, `unitaries[i]` acting on system qubit `i` (0-based).
    pub unitaries: Vec<Gate>,
    pub patterns: Vec<Vec<bool>>,
}

pub fn ancilla_count(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

fn binary_pattern(index: usize, width: usize) -> Vec<bool> {
    (0..width).map(|j| (index >> (width - 1 - j)) & 1 == 1).collect()
}

impl AncillaLayerSpec {
    pub fn new(prep_angles: Vec<f64>, unitaries: Vec<Gate>) -> Result<Self> {
        let n = unitaries.len();
        if n < 2 {
            return Err(Error::InvalidConfig(format!(
                "ancilla construction needs at least 2 system qubits, got {n}"
            )));
        }
        let a = ancilla_count(n);
        if prep_angles.len() != a {
            return Err(Error::InvalidConfig(format!(
                "{n} system qubits need {a} prep angles, got {}",
                prep_angles.len()
            )));
        }
        for (i, u) in unitaries.iter().enumerate() {
            if u.qubits() != vec![i] {
                return Err(Error::InvalidConfig(format!(
                    "unitary {i} must act on system qubit {i} only"
                )));
            }
        }
        let patterns = (0..n).map(|i| binary_pattern(i, a)).collect();
        Ok(Self {
            n,
            a,
            prep_angles,
            unitaries,
            patterns,
        })
    }

    /// The rotations of one RPQC layer, every ancilla prepared with `phi`.
    pub fn from_layer(axes: &[Pauli], thetas: &[f64], phi: f64) -> Result<Self> {
        let unitaries = axes
            .iter()
            .zip(thetas)
            .enumerate()
            .map(|(q, (&axis, &angle))| Gate::rotation(axis, q, angle))
            .collect::<Vec<_>>();
        let a = ancilla_count(unitaries.len());
        Self::new(vec![phi; a], unitaries)
    }

    pub fn total_qubits(&self) -> usize {
        self.a + self.n
    }
}

fn shift_gate(gate: &Gate, offset: usize) -> Gate {
    match gate {
        Gate::Hadamard(q) => Gate::Hadamard(q + offset),
        Gate::Rotation {
            axis,
            target,
            angle,
        } => Gate::Rotation {
            axis: *axis,
            target: target + offset,
            angle: *angle,
        },
        Gate::Pauli { axis, target } => Gate::Pauli {
            axis: *axis,
            target: target + offset,
        },
        Gate::Cnot { control, target } => Gate::cnot(control + offset, target + offset),
        Gate::PatternControlled {
            controls,
            pattern,
            inner,
        } => Gate::PatternControlled {
            controls: controls.iter().map(|c| c + offset).collect(),
            pattern: pattern.clone(),
            inner: Box::new(shift_gate(inner, offset)),
        },
    }
}

/// `R_y(phi_j)` on every ancilla, then one pattern-controlled rotation per
/// system qubit.
pub fn ancilla_circuit(layer: &AncillaLayerSpec) -> Result<Vec<Gate>> {
    if layer.n < 2 {
        return Err(Error::InvalidConfig("ancilla construction needs n >= 2".into()));
    }
    let controls: Vec<usize> = (0..layer.a).collect();
    let mut gates: Vec<Gate> = layer
        .prep_angles
        .iter()
        .enumerate()
        // exp(-i (phi/2) Y) is R_y(phi) in the half-angle convention
        .map(|(j, &phi)| Gate::rotation(Pauli::Y, j, phi / 2.0))
        .collect();
    for (u, pattern) in layer.unitaries.iter().zip(&layer.patterns) {
        gates.push(Gate::PatternControlled {
            controls: controls.clone(),
            pattern: pattern.clone(),
            inner: Box::new(shift_gate(u, layer.a)),
        });
    }
    Ok(gates)
}

/// Projects the leading `a` qubits onto `H^{(x)a}|0>` and returns the
/// unnormalized system residual.
pub fn post_select_ancillas(state: &Ket, a: usize) -> Result<Ket> {
    let total = state.num_qubits();
    if a >= total {
        return Err(Error::InvalidConfig(format!(
            "cannot post-select {a} ancillas out of {total} qubits"
        )));
    }
    let sys_dim = 1usize << (total - a);
    let amp = (1.0 / (1usize << a) as f64).sqrt();
    let mut residual = vec![Complex64::new(0.0, 0.0); sys_dim];
    for (idx, value) in state.amplitudes().iter().enumerate() {
        residual[idx % sys_dim] += value * amp;
    }
    Ket::from_amplitudes(residual)
}

/// Runs the ancilla layer on `|0...0>_anc (x) |system>` and post-selects.
pub fn ancilla_layer_action(layer: &AncillaLayerSpec, system: &Ket) -> Result<Ket> {
    if system.num_qubits() != layer.n {
        return Err(Error::DimensionMismatch {
            expected: layer.n,
            found: system.num_qubits(),
        });
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << layer.total_qubits()];
    amps[..system.dim()].copy_from_slice(system.amplitudes());
    let mut joint = Ket::from_amplitudes(amps)?;
    joint.apply_all(&ancilla_circuit(layer)?)?;
    post_select_ancillas(&joint, layer.a)
}

/// `(x)_i (alpha_i I + beta_i U_i)` applied to `system`, computed rotation by
/// rotation.
pub fn per_qubit_lcu(coeffs: &[LcuCoefficients], unitaries: &[Gate], system: &Ket) -> Result<Ket> {
    let mut psi = system.clone();
    for (c, u) in coeffs.iter().zip(unitaries) {
        psi = lcu_state(*c, std::slice::from_ref(u), &psi)?;
    }
    Ok(psi)
}

/// Rotation layers of one block, stored as parallel `axes` / `thetas` rows.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LayerBlock {
    pub axes: Vec<Vec<Pauli>>,
    pub thetas: Vec<Vec<f64>>,
}

impl LayerBlock {
    pub fn len(&self) -> usize {
        self.axes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axes.is_empty()
    }

    fn gates(&self) -> Vec<Gate> {
        self.axes
            .iter()
            .zip(&self.thetas)
            .flat_map(|(a, t)| layer_gates(a, t))
            .collect()
    }

    fn split_off_back(&mut self, count: usize) -> LayerBlock {
        let at = self.len() - count;
        LayerBlock {
            axes: self.axes.split_off(at),
            thetas: self.thetas.split_off(at),
        }
    }
}

/// Which block a layer currently belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    Adjustable,
    Intermediate,
    Fixed,
}

/// An RPQC split into three consecutive blocks.
///
/// In time order the circuit is: Hadamard wall, adjustable layers,
/// intermediate layers, fixed layers. While the adjustable block is non-empty
/// the wall and the adjustable layers form the `U(theta)` inside
/// `alpha I + beta U`; the intermediate and fixed blocks act as a plain
/// unitary afterwards. With an empty adjustable block the combination is
/// dropped and the circuit is an ordinary RPQC.
///
/// `fixed` is stored outermost-first: `fixed.axes[0]` is the last layer the
/// state passes through. Freezing therefore only ever appends to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StagedCircuit {
    pub stage: usize,
    pub n: usize,
    pub adjustable: LayerBlock,
    pub intermediate: LayerBlock,
    pub fixed: LayerBlock,
    pub coeff: LcuCoefficients,
    pub observable: PauliString,
}

impl StagedCircuit {
    /// Splits `spec` in time order into `adjustable` and `intermediate`
    /// leading blocks; the remaining layers become the fixed block.
    pub fn from_rpqc(
        spec: &RpqcSpec,
        adjustable: usize,
        intermediate: usize,
        observable: PauliString,
    ) -> Result<Self> {
        if adjustable + intermediate > spec.layers {
            return Err(Error::InvalidConfig(format!(
                "{adjustable} adjustable + {intermediate} intermediate layers exceed L = {}",
                spec.layers
            )));
        }
        check_obs(spec.n, &observable)?;
        let take = |from: usize, to: usize| LayerBlock {
            axes: spec.axes[from..to].to_vec(),
            thetas: spec.thetas[from..to].to_vec(),
        };
        let mut fixed = take(adjustable + intermediate, spec.layers);
        fixed.axes.reverse();
        fixed.thetas.reverse();
        Ok(Self {
            stage: 1,
            n: spec.n,
            adjustable: take(0, adjustable),
            intermediate: take(adjustable, adjustable + intermediate),
            fixed,
            coeff: LcuCoefficients::default(),
            observable,
        })
    }

    pub fn total_layers(&self) -> usize {
        self.adjustable.len() + self.intermediate.len() + self.fixed.len()
    }

    pub fn has_lcu(&self) -> bool {
        !self.adjustable.is_empty()
    }

    /// Block membership of 1-based time-ordered layer `layer`.
    pub fn block_of(&self, layer: usize) -> Option<BlockKind> {
        let a = self.adjustable.len();
        let m = self.intermediate.len();
        match layer {
            0 => None,
            l if l <= a => Some(BlockKind::Adjustable),
            l if l <= a + m => Some(BlockKind::Intermediate),
            l if l <= self.total_layers() => Some(BlockKind::Fixed),
            _ => None,
        }
    }

    /// Time-ordered `(axes, thetas)` of the fixed block.
    fn fixed_in_time_order(&self) -> LayerBlock {
        let mut block = self.fixed.clone();
        block.axes.reverse();
        block.thetas.reverse();
        block
    }

    /// The whole circuit as a plain RPQC, layers in time order.
    pub fn to_rpqc(&self, seed: u64) -> RpqcSpec {
        let fixed = self.fixed_in_time_order();
        let mut axes = self.adjustable.axes.clone();
        axes.extend(self.intermediate.axes.iter().cloned());
        axes.extend(fixed.axes);
        let mut thetas = self.adjustable.thetas.clone();
        thetas.extend(self.intermediate.thetas.iter().cloned());
        thetas.extend(fixed.thetas);
        RpqcSpec {
            n: self.n,
            layers: axes.len(),
            seed,
            axes,
            thetas,
        }
    }

    /// Gates acting on `|0>` before the combination: the wall plus the
    /// adjustable block, or the wall plus the intermediate block when there
    /// is no combination.
    pub fn inner_gates(&self) -> Vec<Gate> {
        let mut gates = hadamard_wall(self.n);
        if self.has_lcu() {
            gates.extend(self.adjustable.gates());
        } else {
            gates.extend(self.intermediate.gates());
        }
        gates
    }

    /// Gates applied after the combination.
    pub fn outer_gates(&self) -> Vec<Gate> {
        let mut gates = if self.has_lcu() {
            self.intermediate.gates()
        } else {
            Vec::new()
        };
        gates.extend(self.fixed_in_time_order().gates());
        gates
    }

    pub fn lcu_factor(&self) -> Option<LcuCoefficients> {
        self.has_lcu().then_some(self.coeff)
    }

    pub fn theta(&self, k: ParamIndex) -> Result<f64> {
        self.locate(k).map(|(block, l)| match block {
            BlockKind::Adjustable => self.adjustable.thetas[l][k.qubit - 1],
            BlockKind::Intermediate => self.intermediate.thetas[l][k.qubit - 1],
            BlockKind::Fixed => self.fixed.thetas[l][k.qubit - 1],
        })
    }

    /// Block and storage row of parameter `k`.
    pub fn locate(&self, k: ParamIndex) -> Result<(BlockKind, usize)> {
        if k.qubit == 0 || k.qubit > self.n {
            return Err(Error::ParamOutOfRange {
                layer: k.layer,
                qubit: k.qubit,
            });
        }
        let a = self.adjustable.len();
        match self.block_of(k.layer) {
            Some(BlockKind::Adjustable) => Ok((BlockKind::Adjustable, k.layer - 1)),
            Some(BlockKind::Intermediate) => Ok((BlockKind::Intermediate, k.layer - 1 - a)),
            Some(BlockKind::Fixed) => Ok((BlockKind::Fixed, self.total_layers() - k.layer)),
            None => Err(Error::ParamOutOfRange {
                layer: k.layer,
                qubit: k.qubit,
            }),
        }
    }

    /// Trainable parameters (adjustable then intermediate), time order.
    pub fn trainable(&self) -> Vec<ParamIndex> {
        let count = self.adjustable.len() + self.intermediate.len();
        (1..=count)
            .flat_map(|l| (1..=self.n).map(move |q| ParamIndex::new(l, q)))
            .collect()
    }

    pub fn trainable_thetas(&self) -> Vec<f64> {
        self.adjustable
            .thetas
            .iter()
            .chain(&self.intermediate.thetas)
            .flatten()
            .copied()
            .collect()
    }

    /// Writes trainable angles back (same order as [`Self::trainable`]),
    /// wrapped into `[0, 2pi)`.
    pub fn set_trainable_thetas(&mut self, values: &[f64]) -> Result<()> {
        let count = (self.adjustable.len() + self.intermediate.len()) * self.n;
        if values.len() != count {
            return Err(Error::DimensionMismatch {
                expected: count,
                found: values.len(),
            });
        }
        let wrap = |x: f64| {
            let w = x.rem_euclid(std::f64::consts::TAU);
            if w >= std::f64::consts::TAU {
                0.0
            } else {
                w
            }
        };
        let mut it = values.iter();
        for row in self
            .adjustable
            .thetas
            .iter_mut()
            .chain(self.intermediate.thetas.iter_mut())
        {
            for t in row.iter_mut() {
                *t = wrap(*it.next().expect("length checked"));
            }
        }
        Ok(())
    }

    /// Freezes the intermediate block and promotes the last `pending`
    /// adjustable layers (or all that remain) to intermediate.
    pub fn advance(&mut self, pending: usize) -> Result<()> {
        if self.intermediate.is_empty() && self.adjustable.is_empty() {
            return Err(Error::InvalidConfig("all layers are already fixed".into()));
        }
        let mut frozen = std::mem::take(&mut self.intermediate);
        frozen.axes.reverse();
        frozen.thetas.reverse();
        self.fixed.axes.extend(frozen.axes);
        self.fixed.thetas.extend(frozen.thetas);
        let take = pending.min(self.adjustable.len());
        self.intermediate = self.adjustable.split_off_back(take);
        self.stage += 1;
        Ok(())
    }

    pub fn to_checkpoint(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_checkpoint(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// `E''`: expectation of `H` after `fixed . intermediate . (alpha I + beta U)`
/// acting on `|0>`, with the combination omitted when the adjustable block is
/// empty.
pub fn energy_staged(sc: &StagedCircuit) -> Result<f64> {
    check_obs(sc.n, &sc.observable)?;
    let zero = Ket::zero(sc.n);
    let mut psi = match sc.lcu_factor() {
        Some(coeff) => lcu_state(coeff, &sc.inner_gates(), &zero)?,
        None => run_circuit(&zero, &sc.inner_gates())?,
    };
    psi.apply_all(&sc.outer_gates())?;
    expectation(&psi, &sc.observable)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rpqc::{energy, sample_rpqc};

    #[test]
    fn coefficient_constraint() {
        assert!(LcuCoefficients::new(0.6, 0.8).is_ok());
        assert!(LcuCoefficients::new(0.6, 0.6).is_err());
        let d = LcuCoefficients::default();
        assert!((d.alpha - d.beta).abs() < 1e-16);
        let p = LcuCoefficients::from_prep_angle(std::f64::consts::FRAC_PI_2);
        assert!((p.alpha - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((p.beta - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn degenerate_coefficients() {
        let spec = sample_rpqc(3, 2, 4).unwrap();
        let gates = build_gates(&spec);
        let zero = Ket::zero(3);
        let out = lcu_state(LcuCoefficients::new(1.0, 0.0).unwrap(), &gates, &zero).unwrap();
        assert_eq!(out, zero);
        let out = lcu_state(LcuCoefficients::new(0.0, 1.0).unwrap(), &gates, &zero).unwrap();
        assert_eq!(out, run_circuit(&zero, &gates).unwrap());
        let doubled = lcu_state(LcuCoefficients::default(), &[], &zero).unwrap();
        assert!((doubled.amplitudes()[0].re - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn energy_lcu_reductions() {
        let spec = sample_rpqc(2, 3, 9).unwrap();
        let zz = PauliString::z1z2(2).unwrap();
        let e = energy_lcu(LcuCoefficients::new(0.0, 1.0).unwrap(), &spec, &zz).unwrap();
        assert!((e - energy(&spec, &zz).unwrap()).abs() < 1e-14);
        let e = energy_lcu(LcuCoefficients::new(1.0, 0.0).unwrap(), &spec, &zz).unwrap();
        assert!((e - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ancilla_counts_and_patterns() {
        assert_eq!(ancilla_count(2), 1);
        assert_eq!(ancilla_count(3), 2);
        assert_eq!(ancilla_count(4), 2);
        assert_eq!(ancilla_count(5), 3);
        let layer = AncillaLayerSpec::from_layer(&[Pauli::Z, Pauli::X], &[0.1, 0.2], 1.0).unwrap();
        assert_eq!(layer.a, 1);
        assert_eq!(layer.patterns, vec![vec![false], vec![true]]);
        let gates = ancilla_circuit(&layer).unwrap();
        assert_eq!(gates.len(), 3);
        let layer = AncillaLayerSpec::from_layer(&[Pauli::Z; 4], &[0.1; 4], 1.0).unwrap();
        assert_eq!(
            layer.patterns,
            vec![
                vec![false, false],
                vec![false, true],
                vec![true, false],
                vec![true, true]
            ]
        );
        assert!(AncillaLayerSpec::from_layer(&[Pauli::Z], &[0.1], 1.0).is_err());
    }

    #[test]
    fn zero_prep_fires_only_first_branch() {
        let layer = AncillaLayerSpec::from_layer(&[Pauli::X; 4], &[0.4; 4], 0.0).unwrap();
        let system = Ket::zero(4);
        let mut amps = vec![Complex64::new(0.0, 0.0); 64];
        amps[0] = Complex64::new(1.0, 0.0);
        let mut joint = Ket::from_amplitudes(amps).unwrap();
        joint.apply_all(&ancilla_circuit(&layer).unwrap()).unwrap();
        // ancillas untouched: all weight in the first 16 amplitudes
        let anc_weight: f64 = joint.amplitudes()[16..].iter().map(|a| a.norm_sqr()).sum();
        assert!(anc_weight < 1e-28);
        let expected = run_circuit(&system, &layer.unitaries[..1]).unwrap();
        for (x, y) in joint.amplitudes()[..16].iter().zip(expected.amplitudes()) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn post_selection_projects_onto_plus() {
        let phi = Ket::from_amplitudes(vec![
            Complex64::new(0.6, 0.0),
            Complex64::new(0.0, 0.8),
        ])
        .unwrap();
        let h = FRAC_1_SQRT_2;
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for s in [h, h] {
            plus.extend(phi.amplitudes().iter().map(|a| a * s));
        }
        for s in [h, -h] {
            minus.extend(phi.amplitudes().iter().map(|a| a * s));
        }
        let out = post_select_ancillas(&Ket::from_amplitudes(plus).unwrap(), 1).unwrap();
        for (x, y) in out.amplitudes().iter().zip(phi.amplitudes()) {
            assert!((x - y).norm() < 1e-15);
        }
        let out = post_select_ancillas(&Ket::from_amplitudes(minus).unwrap(), 1).unwrap();
        assert!(out.norm_sqr() < 1e-30);
        assert!(post_select_ancillas(&Ket::zero(2), 2).is_err());
    }

    #[test]
    fn staged_reductions() {
        let spec = sample_rpqc(3, 4, 2).unwrap();
        let zz = PauliString::z1z2(3).unwrap();
        // all fixed: plain circuit
        let sc = StagedCircuit::from_rpqc(&spec, 0, 0, zz.clone()).unwrap();
        assert!((energy_staged(&sc).unwrap() - energy(&spec, &zz).unwrap()).abs() < 1e-14);
        // all adjustable: E' at 1/sqrt2
        let sc = StagedCircuit::from_rpqc(&spec, 4, 0, zz.clone()).unwrap();
        let lcu = energy_lcu(LcuCoefficients::default(), &spec, &zz).unwrap();
        assert!((energy_staged(&sc).unwrap() - lcu).abs() < 1e-14);
        assert_eq!(sc.to_rpqc(spec.seed), spec);
    }

    #[test]
    fn advance_schedule() {
        let spec = sample_rpqc(2, 6, 3).unwrap();
        let mut sc = StagedCircuit::from_rpqc(&spec, 4, 2, PauliString::z1z2(2).unwrap()).unwrap();
        let mut previous_fixed = sc.fixed.clone();
        let mut stages = 1;
        while !(sc.adjustable.is_empty() && sc.intermediate.is_empty()) {
            sc.advance(2).unwrap();
            stages += 1;
            assert_eq!(sc.total_layers(), 6);
            assert_eq!(sc.fixed.thetas[..previous_fixed.len()], previous_fixed.thetas[..]);
            previous_fixed = sc.fixed.clone();
            // circuit unchanged as a whole
            assert_eq!(sc.to_rpqc(spec.seed), spec);
        }
        assert_eq!(stages, 4);
        assert_eq!(sc.fixed.len(), 6);
        assert!(sc.advance(2).is_err());
    }

    #[test]
    fn checkpoint_roundtrip() {
        let spec = sample_rpqc(2, 3, 3).unwrap();
        let sc = StagedCircuit::from_rpqc(&spec, 2, 1, PauliString::z1z2(2).unwrap()).unwrap();
        let text = sc.to_checkpoint().unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["stage", "adjustable", "intermediate", "fixed", "coeff"] {
            assert!(value.get(key).is_some(), "missing {key}");
        }
        assert_eq!(StagedCircuit::from_checkpoint(&text).unwrap(), sc);
    }

    #[test]
    fn frozen_lookup() {
        let spec = sample_rpqc(2, 5, 3).unwrap();
        let sc = StagedCircuit::from_rpqc(&spec, 2, 1, PauliString::z1z2(2).unwrap()).unwrap();
        for layer in 1..=5 {
            for qubit in 1..=2 {
                let k = ParamIndex::new(layer, qubit);
                assert_eq!(sc.theta(k).unwrap(), spec.theta(k));
            }
        }
        assert_eq!(sc.block_of(3), Some(BlockKind::Intermediate));
        assert_eq!(sc.block_of(4), Some(BlockKind::Fixed));
        assert!(sc.theta(ParamIndex::new(6, 1)).is_err());
    }
}
