//! Sample a random parameterized circuit, print its layout and energy, and
//! round-trip it through JSON.

use plateau::rpqc::{energy, sample_rpqc, RpqcSpec};
use plateau::statevector::PauliString;

fn main() -> plateau::Result<()> {
    let spec = sample_rpqc(4, 3, 42)?;
    for (l, (axes, thetas)) in spec.axes.iter().zip(&spec.thetas).enumerate() {
        let row: Vec<String> = axes.iter().zip(thetas).map(|(a, t)| format!("{a:?}({t:.3})")).collect();
        println!("layer {}: {}", l + 1, row.join(" "));
    }
    let obs = PauliString::z1z2(4)?;
    println!("E = <Z1 Z2> = {:.6}", energy(&spec, &obs)?);

    let back = RpqcSpec::from_json(&spec.to_json()?)?;
    assert_eq!(back, spec);
    println!("json round trip ok ({} parameters)", spec.num_params());
    Ok(())
}
