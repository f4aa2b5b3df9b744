//! The alpha I + beta U objective, and what the pattern-controlled ancilla
//! circuit produces after post-selection compared with the per-qubit product.

use plateau::dense::ket_to_vector;
use plateau::lcu::{
    ancilla_layer_action, energy_lcu, energy_lcu_expanded, per_qubit_lcu, AncillaLayerSpec, LcuCoefficients,
};
use plateau::rpqc::{hadamard_wall, sample_rpqc};
use plateau::statevector::{run_circuit, Ket, PauliString};

fn main() -> plateau::Result<()> {
    let spec = sample_rpqc(4, 5, 3)?;
    let obs = PauliString::z1z2(4)?;
    for phi in [0.0, 0.5, std::f64::consts::FRAC_PI_2, 3.0] {
        let c = LcuCoefficients::from_prep_angle(phi);
        println!(
            "phi = {phi:.3}  alpha = {:.3} beta = {:.3}  E' = {:+.6}  (expanded {:+.6})",
            c.alpha,
            c.beta,
            energy_lcu(c, &spec, &obs)?,
            energy_lcu_expanded(c, &spec, &obs)?
        );
    }

    let phi = 1.2;
    let layer = AncillaLayerSpec::from_layer(&spec.axes[0], &spec.thetas[0], phi)?;
    let system = run_circuit(&Ket::zero(4), &hadamard_wall(4))?;
    let via_ancilla = ket_to_vector(&ancilla_layer_action(&layer, &system)?);
    let product = ket_to_vector(&per_qubit_lcu(
        &[LcuCoefficients::from_prep_angle(phi); 4],
        &layer.unitaries,
        &system,
    )?);
    let overlap = via_ancilla.dotc(&product).norm() / (via_ancilla.norm() * product.norm());
    println!("{} ancillas; |cos angle| between ancilla output and product form: {overlap:.4}", layer.a);
    Ok(())
}
