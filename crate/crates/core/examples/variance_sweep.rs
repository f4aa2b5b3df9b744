//! Gradient variance of d theta_{1,1} versus qubit count for the three
//! circuit structures, written as CSV to stdout.

use plateau::experiments::{fit_log_slope, variance_sweep, write_csv, Structure, SweepConfig};

fn main() -> plateau::Result<()> {
    let mut rows = Vec::new();
    for structure in Structure::ALL {
        let mut config = SweepConfig::new(structure, vec![2, 4, 6, 8], vec![20], 3);
        config.samples = 60;
        config.pending = 5;
        let records = variance_sweep(&config)?;
        eprintln!("{structure}: log-variance slope per qubit {:+.3}", fit_log_slope(&records)?);
        rows.extend(records);
    }
    write_csv(std::io::stdout().lock(), &rows)
}
