//! Staged training toward a target expectation, compared with training the
//! plain circuit for the same number of epochs.

use plateau::experiments::{expectation_variance, train_baseline, train_staged, TrainConfig};
use plateau::statevector::PauliString;

fn main() -> plateau::Result<()> {
    let obs = PauliString::z1z2(6)?;
    let config = TrainConfig::new(6, 20, 0.05, 2, 15, 4);
    let staged = train_staged(&config, &obs)?;
    let baseline = train_baseline(6, 20, 0.05, config.total_epochs(), &obs, 4)?;
    for trace in [&staged, &baseline] {
        let last = trace.epochs();
        println!(
            "{:<8} epochs {last}  final <H> {:+.6}  cost {:.2e}  fixed layers {}  late variance {:.2e}",
            trace.structure.name(),
            trace.final_expectation,
            trace.final_cost,
            trace.final_fixed_layers,
            expectation_variance(trace, last / 3, last)?
        );
    }
    for r in staged.records.iter().step_by(config.epochs_per_stage) {
        println!("  stage {:>2} fixed {:>2} epoch {:>3} E'' {:+.5}", r.stage, r.fixed_layers, r.epoch, r.expectation);
    }
    Ok(())
}
