//! Experiment drivers: gradient-variance sweeps over qubits and layers,
//! gradient histograms, log-slope fits, Adam, and staged versus baseline
//! training.

mod adam;
mod output;
mod sweep;
mod train;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use output::{write_csv, write_json, OutputFormat};
pub use sweep::{
    aggregate_variance, fit_log_slope, gradient_histogram, layer_sweep, sample_gradient, variance_sweep,
    GradientHistogram, GradientSample, SweepConfig, VarianceRecord, DEFAULT_PENDING, DEFAULT_SAMPLES,
};
pub use train::{
    expectation_variance, train_baseline, train_staged, train_staged_with, EpochRecord, TrainConfig, TrainRow,
    TrainTrace,
};

/// Circuit structure whose `theta_{1,1}` gradient is studied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Structure {
    /// Plain RPQC energy `E`.
    Design2,
    /// Whole circuit inside `(I + U)/sqrt 2`.
    Lcu,
    /// Staged circuit: leading `p` layers combined, the rest fixed.
    Proposed,
}

impl Structure {
    pub const ALL: [Structure; 3] = [Structure::Design2, Structure::Lcu, Structure::Proposed];

    pub fn name(self) -> &'static str {
        match self {
            Structure::Design2 => "design2",
            Structure::Lcu => "lcu",
            Structure::Proposed => "proposed",
        }
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Structure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Self::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown structure {s:?}; expected design2, lcu or proposed")))
    }
}
