//! Apply a few gates to |000> and read off amplitudes and a Pauli expectation.

use plateau::statevector::{expectation, run_circuit, Gate, Ket, Pauli, PauliString};

fn main() -> plateau::Result<()> {
    let gates = [
        Gate::Hadamard(0),
        Gate::cnot(0, 1),
        Gate::rotation(Pauli::Y, 2, std::f64::consts::FRAC_PI_8),
    ];
    let psi = run_circuit(&Ket::zero(3), &gates)?;
    for (i, a) in psi.amplitudes().iter().enumerate() {
        if a.norm() > 1e-12 {
            println!("|{i:03b}>  {:+.4} {:+.4}i", a.re, a.im);
        }
    }
    let zz = PauliString::z1z2(3)?;
    println!("<Z1 Z2> = {:.6}", expectation(&psi, &zz)?);
    println!("norm^2  = {:.15}", psi.norm_sqr());
    Ok(())
}
