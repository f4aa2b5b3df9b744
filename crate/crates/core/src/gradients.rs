//! Exact single-parameter gradients of `E`, `E'` and `E''`.
//!
//! Every objective here has the shape
//!
//! ```text
//! psi = P (alpha |0> + beta U |0>),   value = <psi| H |psi>
//! ```
//!
//! where `U` is the "inner" gate list, `P` the "outer" gate list and the
//! combination is optional (`psi = P U |0>` for plain circuits). A rotation
//! `exp(-i theta V)` inside `U` splits it as `U = U_+ exp(-i theta V) U_-`,
//! and `d U / d theta = U_+ (-i V) U_- = -i R` with `U_-` including the
//! rotation itself.
//!
//! Three independent routes are provided: shift rules, the commutator forms
//! built from `R|0>`, and central finite differences. [`Objective::value_and_gradient`]
//! adds a reverse sweep that returns all trainable derivatives in one pass
//! for the optimizer.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lcu::{BlockKind, LcuCoefficients, StagedCircuit};
use crate::rpqc::{build_gates, gate_position, ParamIndex, RpqcSpec};
use crate::statevector::{expectation, matrix_element, run_circuit, Gate, Ket, Pauli, PauliString};

/// Which energy an [`Objective`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveKind {
    /// `E = <0|U^dagger H U|0>`
    Energy,
    /// `E'` with arbitrary `(alpha, beta)`
    Lcu,
    /// `E''` of a staged circuit
    Staged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ParameterShift,
    Analytic,
    FiniteDifference,
}

/// A gradient to compute: objective kind, target parameter and route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientRequest {
    pub objective: ObjectiveKind,
    pub target: ParamIndex,
    pub method: Method,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Block {
    Inner,
    Outer,
}

#[derive(Debug, Clone, Copy)]
struct Slot {
    index: ParamIndex,
    block: Block,
    pos: usize,
}

/// `U_-` (through the differentiated rotation), `U_+` (everything after it
/// inside the inner block) and the rotation generator.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitCircuit {
    pub u_minus: Vec<Gate>,
    pub u_plus: Vec<Gate>,
    pub generator: Pauli,
    pub target: usize,
}

/// Evaluable objective with its trainable rotations.
#[derive(Debug, Clone)]
pub struct Objective {
    kind: ObjectiveKind,
    n: usize,
    total_layers: usize,
    coeff: Option<LcuCoefficients>,
    inner: Vec<Gate>,
    outer: Vec<Gate>,
    obs: PauliString,
    slots: Vec<Slot>,
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

fn all_slots(spec: &RpqcSpec) -> Vec<Slot> {
    (1..=spec.layers)
        .flat_map(|l| (1..=spec.n).map(move |q| ParamIndex::new(l, q)))
        .map(|index| Slot {
            index,
            block: Block::Inner,
            pos: gate_position(spec.n, index),
        })
        .collect()
}

impl Objective {
    /// Plain circuit energy `E`.
    pub fn energy(spec: &RpqcSpec, obs: &PauliString) -> Result<Self> {
        check_obs(spec.n, obs)?;
        Ok(Self {
            kind: ObjectiveKind::Energy,
            n: spec.n,
            total_layers: spec.layers,
            coeff: None,
            inner: build_gates(spec),
            outer: Vec::new(),
            obs: obs.clone(),
            slots: all_slots(spec),
        })
    }

    /// `E'` for the whole-circuit combination `alpha I + beta U`.
    pub fn lcu(coeff: LcuCoefficients, spec: &RpqcSpec, obs: &PauliString) -> Result<Self> {
        check_obs(spec.n, obs)?;
        Ok(Self {
            kind: ObjectiveKind::Lcu,
            n: spec.n,
            total_layers: spec.layers,
            coeff: Some(coeff),
            inner: build_gates(spec),
            outer: Vec::new(),
            obs: obs.clone(),
            slots: all_slots(spec),
        })
    }

    /// `E''` of a staged circuit; adjustable and intermediate rotations are
    /// trainable, fixed ones are not.
    pub fn staged(sc: &StagedCircuit) -> Result<Self> {
        check_obs(sc.n, &sc.observable)?;
        let n = sc.n;
        let per_layer = n + n.saturating_sub(1);
        let a = sc.adjustable.len();
        let slots = sc
            .trainable()
            .into_iter()
            .map(|index| {
                let in_adjustable = index.layer <= a;
                if sc.has_lcu() && !in_adjustable {
                    Slot {
                        index,
                        block: Block::Outer,
                        pos: (index.layer - a - 1) * per_layer + index.qubit - 1,
                    }
                } else {
                    Slot {
                        index,
                        block: Block::Inner,
                        pos: gate_position(n, index),
                    }
                }
            })
            .collect();
        Ok(Self {
            kind: ObjectiveKind::Staged,
            n,
            total_layers: sc.total_layers(),
            coeff: sc.lcu_factor(),
            inner: sc.inner_gates(),
            outer: sc.outer_gates(),
            obs: sc.observable.clone(),
            slots,
        })
    }

    pub fn kind(&self) -> ObjectiveKind {
        self.kind
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Trainable parameters in evaluation order.
    pub fn params(&self) -> Vec<ParamIndex> {
        self.slots.iter().map(|s| s.index).collect()
    }

    /// Replaces the observable; the objective is linear in it.
    pub fn with_observable(&self, obs: &PauliString) -> Result<Self> {
        check_obs(self.n, obs)?;
        let mut out = self.clone();
        out.obs = obs.clone();
        Ok(out)
    }

    fn slot(&self, k: ParamIndex) -> Result<Slot> {
        if let Some(slot) = self.slots.iter().find(|s| s.index == k) {
            return Ok(*slot);
        }
        let in_range = k.layer >= 1 && k.layer <= self.total_layers && k.qubit >= 1 && k.qubit <= self.n;
        if in_range && self.kind == ObjectiveKind::Staged {
            Err(Error::FrozenParameter {
                layer: k.layer,
                qubit: k.qubit,
            })
        } else {
            Err(Error::ParamOutOfRange {
                layer: k.layer,
                qubit: k.qubit,
            })
        }
    }

    fn gate_mut(&mut self, slot: Slot) -> &mut Gate {
        match slot.block {
            Block::Inner => &mut self.inner[slot.pos],
            Block::Outer => &mut self.outer[slot.pos],
        }
    }

    fn gate(&self, slot: Slot) -> &Gate {
        match slot.block {
            Block::Inner => &self.inner[slot.pos],
            Block::Outer => &self.outer[slot.pos],
        }
    }

    pub fn angle(&self, k: ParamIndex) -> Result<f64> {
        match self.gate(self.slot(k)?) {
            Gate::Rotation { angle, .. } => Ok(*angle),
            other => unreachable!("parameter slot holds {other:?}"),
        }
    }

    /// Copy with parameter `k` moved by `delta`.
    pub fn shifted(&self, k: ParamIndex, delta: f64) -> Result<Self> {
        let slot = self.slot(k)?;
        let mut out = self.clone();
        if let Gate::Rotation { angle, .. } = out.gate_mut(slot) {
            *angle += delta;
        }
        Ok(out)
    }

    /// Sets all trainable angles, in [`Self::params`] order.
    pub fn set_angles(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.slots.len() {
            return Err(Error::DimensionMismatch {
                expected: self.slots.len(),
                found: values.len(),
            });
        }
        for (slot, &v) in self.slots.clone().iter().zip(values) {
            if let Gate::Rotation { angle, .. } = self.gate_mut(*slot) {
                *angle = v;
            }
        }
        Ok(())
    }

    fn start_state(&self) -> Result<(Ket, Ket)> {
        let zero = Ket::zero(self.n);
        let u0 = run_circuit(&zero, &self.inner)?;
        let start = match self.coeff {
            Some(c) => zero.combine(
                Complex64::new(c.alpha, 0.0),
                &u0,
                Complex64::new(c.beta, 0.0),
            )?,
            None => u0.clone(),
        };
        Ok((u0, start))
    }

    /// Final (generally unnormalized) state `psi`.
    pub fn state(&self) -> Result<Ket> {
        let (_, mut psi) = self.start_state()?;
        psi.apply_all(&self.outer)?;
        Ok(psi)
    }

    pub fn value(&self) -> Result<f64> {
        expectation(&self.state()?, &self.obs)
    }

    /// Splits the inner block around parameter `k`.
    pub fn split(&self, k: ParamIndex) -> Result<SplitCircuit> {
        let slot = self.slot(k)?;
        if slot.block != Block::Inner {
            return Err(Error::InvalidConfig(format!(
                "parameter ({}, {}) sits outside the combined block",
                k.layer, k.qubit
            )));
        }
        let (generator, target) = match &self.inner[slot.pos] {
            Gate::Rotation { axis, target, .. } => (*axis, *target),
            other => unreachable!("parameter slot holds {other:?}"),
        };
        Ok(SplitCircuit {
            u_minus: self.inner[..=slot.pos].to_vec(),
            u_plus: self.inner[slot.pos + 1..].to_vec(),
            generator,
            target,
        })
    }

    /// Whether `k` sees Fourier frequencies {1, 2} (inside a combination
    /// with non-zero `alpha`) rather than {2} only.
    fn has_first_harmonic(&self, k: ParamIndex) -> Result<bool> {
        let slot = self.slot(k)?;
        Ok(slot.block == Block::Inner && self.coeff.is_some_and(|c| c.alpha != 0.0 && c.beta != 0.0))
    }

    /// Value and derivatives for every trainable parameter (reverse sweep).
    pub fn value_and_gradient(&self) -> Result<(f64, Vec<f64>)> {
        let (u0, start) = self.start_state()?;
        let mut phi = start;
        phi.apply_all(&self.outer)?;
        let value = expectation(&phi, &self.obs)?;
        let mut chi = self.obs.apply(&phi)?;

        let mut grads = vec![0.0; self.slots.len()];
        let mut outer_slots = vec![None; self.outer.len()];
        let mut inner_slots = vec![None; self.inner.len()];
        for (i, s) in self.slots.iter().enumerate() {
            match s.block {
                Block::Inner => inner_slots[s.pos] = Some(i),
                Block::Outer => outer_slots[s.pos] = Some(i),
            }
        }

        reverse_sweep(&self.outer, &outer_slots, &mut phi, &mut chi, &mut grads, self.n)?;

        let beta = self.coeff.map_or(1.0, |c| c.beta);
        let mut chi = chi.scaled(Complex64::new(beta, 0.0));
        let mut phi = u0;
        reverse_sweep(&self.inner, &inner_slots, &mut phi, &mut chi, &mut grads, self.n)?;
        Ok((value, grads))
    }
}

fn single_pauli(axis: Pauli, target: usize, n: usize) -> PauliString {
    let mut labels = vec![Pauli::I; n];
    labels[target] = axis;
    PauliString::new(labels).expect("n >= 1")
}

/// Walks `gates` backwards with the forward state `phi` and the co-state
/// `chi` (both taken just after the last gate). A rotation contributes
/// `2 Im <chi|V|phi>` to its slot.
fn reverse_sweep(
    gates: &[Gate],
    slots: &[Option<usize>],
    phi: &mut Ket,
    chi: &mut Ket,
    grads: &mut [f64],
    n: usize,
) -> Result<()> {
    for (gate, slot) in gates.iter().zip(slots).rev() {
        if let (Some(i), Gate::Rotation { axis, target, .. }) = (slot, gate) {
            let v = single_pauli(*axis, *target, n);
            grads[*i] = 2.0 * matrix_element(chi, &v, phi)?.im;
        }
        let inv = gate.dagger();
        phi.apply(&inv)?;
        chi.apply(&inv)?;
    }
    Ok(())
}

/// Shift-rule derivative.
///
/// A rotation `exp(-i theta V)` enters a plain energy with frequencies
/// {0, 2}, giving the exact two-term rule `E(theta + pi/4) - E(theta - pi/4)`.
/// Inside `alpha I + beta U` the cross term adds frequency 1; there the
/// four-term rule for frequencies {1, 2} is used:
/// `c1 [f(+pi/4) - f(-pi/4)] - c3 [f(+3pi/4) - f(-3pi/4)]`,
/// `c_mu = 1 / (8 sin^2(x_mu / 2))`.
pub fn grad_param_shift(obj: &Objective, k: ParamIndex) -> Result<f64> {
    let eval = |delta: f64| obj.shifted(k, delta).and_then(|o| o.value());
    if obj.has_first_harmonic(k)? {
        let x1 = FRAC_PI_4;
        let x3 = 3.0 * FRAC_PI_4;
        let c1 = 1.0 / (8.0 * (x1 / 2.0).sin().powi(2));
        let c3 = 1.0 / (8.0 * (x3 / 2.0).sin().powi(2));
        Ok(c1 * (eval(x1)? - eval(-x1)?) - c3 * (eval(x3)? - eval(-x3)?))
    } else {
        Ok(eval(FRAC_PI_4)? - eval(-FRAC_PI_4)?)
    }
}

/// Central difference `[f(theta + h) - f(theta - h)] / 2h`.
pub fn grad_finite_diff(obj: &Objective, k: ParamIndex, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidConfig(format!("finite-difference step must be positive, got {h}")));
    }
    let plus = obj.shifted(k, h)?.value()?;
    let minus = obj.shifted(k, -h)?.value()?;
    Ok((plus - minus) / (2.0 * h))
}

/// The two terms of a derivative inside `alpha I + beta U`:
/// `interference = i alpha beta <0|R^dagger H' - H' R|0>` and
/// `circuit = beta^2 dE/dtheta`, with `H' = P^dagger H P`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LcuGradient {
    pub interference: f64,
    pub circuit: f64,
}

impl LcuGradient {
    pub fn total(&self) -> f64 {
        self.interference + self.circuit
    }
}

/// Commutator-form derivative for an inner-block parameter.
///
/// With `b = U_-|0>`, `c = U_+ b = U|0>` and `d = U_+ V b = R|0>`, and `P`
/// the outer block:
///
/// * `dE/dtheta = i <b|[V, U_+^dagger H' U_+]|b> = 2 Im <Pc|H|Pd>`;
/// * the interference term is `2 alpha beta Im <P0|H|Pd>`.
pub fn grad_commutator(obj: &Objective, k: ParamIndex) -> Result<LcuGradient> {
    let split = obj.split(k)?;
    let n = obj.n;
    let zero = Ket::zero(n);
    let b = run_circuit(&zero, &split.u_minus)?;
    let mut vb = b.clone();
    vb.apply(&Gate::Pauli {
        axis: split.generator,
        target: split.target,
    })?;
    let mut c = run_circuit(&b, &split.u_plus)?;
    let mut d = run_circuit(&vb, &split.u_plus)?;
    c.apply_all(&obj.outer)?;
    d.apply_all(&obj.outer)?;
    let de = 2.0 * matrix_element(&c, &obj.obs, &d)?.im;
    match obj.coeff {
        None => Ok(LcuGradient {
            interference: 0.0,
            circuit: de,
        }),
        Some(LcuCoefficients { alpha, beta }) => {
            let p0 = run_circuit(&zero, &obj.outer)?;
            let cross = matrix_element(&p0, &obj.obs, &d)?.im;
            Ok(LcuGradient {
                interference: 2.0 * alpha * beta * cross,
                circuit: beta * beta * de,
            })
        }
    }
}

/// Analytic derivative: commutator form for inner-block parameters, the
/// shift rule for plain-unitary (outer) parameters.
pub fn grad_analytic(obj: &Objective, k: ParamIndex) -> Result<f64> {
    match obj.slot(k)?.block {
        Block::Inner => Ok(grad_commutator(obj, k)?.total()),
        Block::Outer => grad_param_shift(obj, k),
    }
}

/// `dE/dtheta_k = i <0|U_-^dagger [V_k, U_+^dagger H U_+] U_-|0>`.
#[allow(non_snake_case)]
pub fn grad_analytic_E(spec: &RpqcSpec, obs: &PauliString, k: ParamIndex) -> Result<f64> {
    spec.check_index(k)?;
    grad_analytic(&Objective::energy(spec, obs)?, k)
}

/// `dE'/dtheta_k` split into its interference and circuit terms.
pub fn grad_lcu(coeff: LcuCoefficients, spec: &RpqcSpec, obs: &PauliString, k: ParamIndex) -> Result<LcuGradient> {
    spec.check_index(k)?;
    grad_commutator(&Objective::lcu(coeff, spec, obs)?, k)
}

/// `dE''/dtheta_k` for an adjustable or intermediate parameter.
pub fn grad_staged(sc: &StagedCircuit, k: ParamIndex) -> Result<f64> {
    if let (BlockKind::Fixed, _) = sc.locate(k)? {
        return Err(Error::FrozenParameter {
            layer: k.layer,
            qubit: k.qubit,
        });
    }
    grad_analytic(&Objective::staged(sc)?, k)
}

/// Default finite-difference step used by the oracle checks.
pub const FD_STEP: f64 = 1e-5;

/// Dispatches a [`GradientRequest`] against a prepared objective.
pub fn gradient(obj: &Objective, request: &GradientRequest) -> Result<f64> {
    if obj.kind() != request.objective {
        return Err(Error::InvalidConfig(format!(
            "request targets {:?} but objective is {:?}",
            request.objective,
            obj.kind()
        )));
    }
    match request.method {
        Method::ParameterShift => grad_param_shift(obj, request.target),
        Method::Analytic => grad_analytic(obj, request.target),
        Method::FiniteDifference => grad_finite_diff(obj, request.target, FD_STEP),
    }
}
