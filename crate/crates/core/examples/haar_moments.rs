//! Monte Carlo checks of Haar first/second moments and the gradient-variance
//! closed forms for dense unitaries.

use plateau::dense::pauli_matrix;
use plateau::haar::{default_generator, haar_moment1_check, haar_moment2_check, mc_grad_variance, variance_exact, GradStructure};
use plateau::lcu::LcuCoefficients;
use plateau::rng::rng_from_seed;
use plateau::statevector::{Pauli, PauliString};

fn main() -> plateau::Result<()> {
    let mut rng = rng_from_seed(1);
    let n = 4;
    let zz = pauli_matrix(&PauliString::z1z2(2)?);
    let xi = pauli_matrix(&PauliString::new(vec![Pauli::X, Pauli::I])?);
    let r = haar_moment1_check(n, &zz, &xi, 20_000, &mut rng)?;
    println!("first moment:  {:+.5} vs {:+.5} ({:.2} sigma)", r.estimate, r.closed_form, r.sigmas());
    let r = haar_moment2_check(n, [&zz, &xi, &zz, &xi], 20_000, &mut rng)?;
    println!("second moment: {:+.5} vs {:+.5} ({:.2} sigma)", r.estimate, r.closed_form, r.sigmas());

    let v = default_generator(n)?;
    for s in GradStructure::ALL {
        let r = mc_grad_variance(s, &zz, 20_000, &mut rng)?;
        println!(
            "{:<9} MC {:.5}  closed form {:.5}  exact {:.5}",
            s.name(),
            r.estimate,
            r.closed_form,
            variance_exact(s, &zz, &v, LcuCoefficients::default())
        );
    }
    Ok(())
}
