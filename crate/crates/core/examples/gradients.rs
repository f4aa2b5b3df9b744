//! Parameter-shift, analytic and finite-difference gradients of the plain,
//! combined and staged objectives.

use plateau::gradients::{grad_analytic, grad_commutator, grad_finite_diff, grad_param_shift, Objective, FD_STEP};
use plateau::lcu::{LcuCoefficients, StagedCircuit};
use plateau::rpqc::{sample_rpqc, ParamIndex};
use plateau::statevector::PauliString;

fn main() -> plateau::Result<()> {
    let spec = sample_rpqc(4, 6, 7)?;
    let obs = PauliString::z1z2(4)?;
    let k = ParamIndex::new(2, 2);
    let staged = StagedCircuit::from_rpqc(&spec, 3, 2, obs.clone())?;
    let objectives = [
        ("E", Objective::energy(&spec, &obs)?),
        ("E'", Objective::lcu(LcuCoefficients::from_prep_angle(1.0), &spec, &obs)?),
        ("E''", Objective::staged(&staged)?),
    ];
    for (name, obj) in &objectives {
        println!(
            "{name:>3}: shift {:+.10}  analytic {:+.10}  fd {:+.10}",
            grad_param_shift(obj, k)?,
            grad_analytic(obj, k)?,
            grad_finite_diff(obj, k, FD_STEP)?
        );
    }
    let parts = grad_commutator(&objectives[1].1, k)?;
    println!("E' split: interference {:+.6} + circuit {:+.6}", parts.interference, parts.circuit);

    let (value, grads) = objectives[0].1.value_and_gradient()?;
    let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
    println!("E = {value:+.6}, |grad E| = {norm:.6} over {} parameters", grads.len());
    Ok(())
}
