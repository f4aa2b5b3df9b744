use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Structure;
use crate::error::{Error, Result};
use crate::gradients::{grad_commutator, Objective};
use crate::lcu::{LcuCoefficients, StagedCircuit};
use crate::rng::derive_seed;
use crate::rpqc::{sample_rpqc, ParamIndex};
use crate::statevector::PauliString;

/// Circuits drawn per sweep point unless overridden.
pub const DEFAULT_SAMPLES: usize = 100;

/// Combined leading layers of the proposed structure in variance sweeps.
pub const DEFAULT_PENDING: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub structure: Structure,
    pub qubits: Vec<usize>,
    pub layers: Vec<usize>,
    pub samples: usize,
    pub pending: usize,
    pub seed: u64,
}

impl SweepConfig {
    pub fn new(structure: Structure, qubits: Vec<usize>, layers: Vec<usize>, seed: u64) -> Self {
        Self {
            structure,
            qubits,
            layers,
            samples: DEFAULT_SAMPLES,
            pending: DEFAULT_PENDING,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.qubits.is_empty() || self.layers.is_empty() {
            return Err(Error::InvalidConfig("qubit and layer ranges must be non-empty".into()));
        }
        if self.samples < 2 {
            return Err(Error::InvalidConfig(format!(
                "a sample variance needs at least 2 samples, got {}",
                self.samples
            )));
        }
        if let Some(&n) = self.qubits.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidConfig(format!("need n >= 2, got {n}")));
        }
        if let Some(&l) = self.layers.iter().find(|&&l| l == 0) {
            return Err(Error::InvalidConfig(format!("need L >= 1, got {l}")));
        }
        if self.structure == Structure::Proposed {
            check_pending(self.pending, self.layers.iter().copied())?;
        }
        Ok(())
    }
}

fn check_pending(pending: usize, layers: impl IntoIterator<Item = usize>) -> Result<()> {
    if pending == 0 {
        return Err(Error::InvalidConfig("pending layer count must be >= 1".into()));
    }
    if let Some(l) = layers.into_iter().find(|&l| pending > l) {
        return Err(Error::InvalidConfig(format!("pending p = {pending} exceeds L = {l}")));
    }
    Ok(())
}

/// Sample variance of `d theta_{1,1}` at one `(n, L)` point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceRecord {
    pub structure: Structure,
    pub n: usize,
    #[serde(rename = "L")]
    pub layers: usize,
    pub samples: usize,
    pub variance: f64,
    pub seed: u64,
    #[serde(skip)]
    pub mean: f64,
}

impl VarianceRecord {
    /// Whether the sample mean lies within `k` standard errors of zero.
    pub fn mean_within(&self, k: f64) -> bool {
        self.mean.abs() <= k * (self.variance / self.samples as f64).sqrt()
    }
}

/// One row of a gradient histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientSample {
    pub structure: Structure,
    pub n: usize,
    #[serde(rename = "L")]
    pub layers: usize,
    pub sample_index: usize,
    pub gradient: f64,
}

/// `d theta_{1,1}` of one freshly drawn circuit.
///
/// `design2` differentiates `E`, `lcu` differentiates `E'` with
/// `alpha = beta = 1/sqrt 2`, and `proposed` differentiates `E''` with the
/// first `pending` layers combined and the remaining `L - pending` fixed.
pub fn sample_gradient(structure: Structure, n: usize, layers: usize, pending: usize, seed: u64) -> Result<f64> {
    let spec = sample_rpqc(n, layers, seed)?;
    let obs = PauliString::z1z2(n)?;
    let objective = match structure {
        Structure::Design2 => Objective::energy(&spec, &obs)?,
        Structure::Lcu => Objective::lcu(LcuCoefficients::default(), &spec, &obs)?,
        Structure::Proposed => {
            check_pending(pending, [layers])?;
            Objective::staged(&StagedCircuit::from_rpqc(&spec, pending, 0, obs)?)?
        }
    };
    Ok(grad_commutator(&objective, ParamIndex::FIRST)?.total())
}

/// Per-sample seed: a pure function of the master seed and `(n, L, i)`, so
/// structures compared under one master seed see the same circuits.
fn sample_seed(master: u64, n: usize, layers: usize, i: usize) -> u64 {
    derive_seed(master, &[n as u64, layers as u64, i as u64])
}

fn point_gradients(structure: Structure, n: usize, layers: usize, samples: usize, pending: usize, seed: u64) -> Result<Vec<f64>> {
    (0..samples)
        .into_par_iter()
        .map(|i| sample_gradient(structure, n, layers, pending, sample_seed(seed, n, layers, i)))
        .collect()
}

fn mean_and_variance(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, var)
}

fn run_points(config: &SweepConfig) -> Result<Vec<VarianceRecord>> {
    config.validate()?;
    let mut records = Vec::with_capacity(config.qubits.len() * config.layers.len());
    for &n in &config.qubits {
        for &layers in &config.layers {
            let grads = point_gradients(config.structure, n, layers, config.samples, config.pending, config.seed)?;
            let (mean, variance) = mean_and_variance(&grads);
            records.push(VarianceRecord {
                structure: config.structure,
                n,
                layers,
                samples: config.samples,
                variance,
                seed: config.seed,
                mean,
            });
        }
    }
    Ok(records)
}

/// Variance at every `(n, L)` of the configured grids, qubits outermost.
pub fn variance_sweep(config: &SweepConfig) -> Result<Vec<VarianceRecord>> {
    run_points(config)
}

/// Same evaluation as [`variance_sweep`], intended for a layer grid at
/// fixed qubit counts.
pub fn layer_sweep(config: &SweepConfig) -> Result<Vec<VarianceRecord>> {
    run_points(config)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientHistogram {
    pub structure: Structure,
    pub n: usize,
    #[serde(rename = "L")]
    pub layers: usize,
    pub seed: u64,
    pub gradients: Vec<f64>,
    pub mean: f64,
    /// Variance of the fitted normal, i.e. the sample variance.
    pub variance: f64,
}

impl GradientHistogram {
    pub fn rows(&self) -> Vec<GradientSample> {
        self.gradients
            .iter()
            .enumerate()
            .map(|(i, &g)| GradientSample {
                structure: self.structure,
                n: self.n,
                layers: self.layers,
                sample_index: i,
                gradient: g,
            })
            .collect()
    }

    pub fn standard_error(&self) -> f64 {
        (self.variance / self.gradients.len() as f64).sqrt()
    }
}

/// Raw `d theta_{1,1}` samples with their mean and variance.
pub fn gradient_histogram(
    structure: Structure,
    n: usize,
    layers: usize,
    samples: usize,
    pending: usize,
    seed: u64,
) -> Result<GradientHistogram> {
    let config = SweepConfig {
        structure,
        qubits: vec![n],
        layers: vec![layers],
        samples,
        pending,
        seed,
    };
    config.validate()?;
    let gradients = point_gradients(structure, n, layers, samples, pending, seed)?;
    let (mean, variance) = mean_and_variance(&gradients);
    Ok(GradientHistogram {
        structure,
        n,
        layers,
        seed,
        gradients,
        mean,
        variance,
    })
}

/// Least-squares slope of `ln(variance)` against `n`.
pub fn fit_log_slope(records: &[VarianceRecord]) -> Result<f64> {
    if records.len() < 3 {
        return Err(Error::InvalidConfig(format!(
            "slope fit needs at least 3 points, got {}",
            records.len()
        )));
    }
    if let Some(r) = records.iter().find(|r| !(r.variance > 0.0)) {
        return Err(Error::NonPositiveVariance(r.variance));
    }
    let m = records.len() as f64;
    let xs: Vec<f64> = records.iter().map(|r| r.n as f64).collect();
    let ys: Vec<f64> = records.iter().map(|r| r.variance.ln()).collect();
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidConfig("slope fit needs at least two distinct n".into()));
    }
    Ok(sxy / sxx)
}

/// Whole-circuit variance: the sample variance of every parameter's
/// derivative, averaged over parameters. Only `design2` and `lcu` apply.
pub fn aggregate_variance(structure: Structure, n: usize, layers: usize, samples: usize, seed: u64) -> Result<VarianceRecord> {
    if structure == Structure::Proposed {
        return Err(Error::InvalidConfig("aggregate variance is defined for design2 and lcu".into()));
    }
    if samples < 2 {
        return Err(Error::InvalidConfig("a sample variance needs at least 2 samples".into()));
    }
    let obs = PauliString::z1z2(n)?;
    let grads: Vec<Vec<f64>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let spec = sample_rpqc(n, layers, sample_seed(seed, n, layers, i))?;
            let objective = match structure {
                Structure::Lcu => Objective::lcu(LcuCoefficients::default(), &spec, &obs)?,
                _ => Objective::energy(&spec, &obs)?,
            };
            Ok(objective.value_and_gradient()?.1)
        })
        .collect::<Result<_>>()?;
    let params = grads[0].len();
    let mut total = 0.0;
    let mut mean_total = 0.0;
    for k in 0..params {
        let column: Vec<f64> = grads.iter().map(|g| g[k]).collect();
        let (mean, var) = mean_and_variance(&column);
        total += var;
        mean_total += mean;
    }
    Ok(VarianceRecord {
        structure,
        n,
        layers,
        samples,
        variance: total / params as f64,
        seed,
        mean: mean_total / params as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(n: usize, variance: f64) -> VarianceRecord {
        VarianceRecord {
            structure: Structure::Design2,
            n,
            layers: 1,
            samples: 2,
            variance,
            seed: 0,
            mean: 0.0,
        }
    }

    #[test]
    fn slope_of_exact_exponential() {
        let recs: Vec<_> = (2..=8).map(|n| record(n, 2f64.powi(-(n as i32)))).collect();
        let slope = fit_log_slope(&recs).unwrap();
        assert!((slope + std::f64::consts::LN_2).abs() < 1e-9);
        let flat: Vec<_> = (2..=5).map(|n| record(n, 0.3)).collect();
        assert!(fit_log_slope(&flat).unwrap().abs() < 1e-12);
    }

    #[test]
    fn slope_errors() {
        assert!(fit_log_slope(&[record(2, 1.0), record(3, 1.0)]).is_err());
        assert_eq!(
            fit_log_slope(&[record(2, 1.0), record(3, 0.0), record(4, 1.0)]),
            Err(Error::NonPositiveVariance(0.0))
        );
    }

    #[test]
    fn identical_samples_have_zero_variance() {
        // both samples share one circuit seed
        let a = sample_gradient(Structure::Design2, 3, 4, 1, 42).unwrap();
        let b = sample_gradient(Structure::Design2, 3, 4, 1, 42).unwrap();
        let (_, var) = mean_and_variance(&[a, b]);
        assert_eq!(var, 0.0);
    }

    #[test]
    fn config_validation() {
        let mut c = SweepConfig::new(Structure::Proposed, vec![2, 3], vec![5], 1);
        assert!(c.validate().is_err()); // pending 20 > L = 5
        c.pending = 5;
        c.validate().unwrap();
        c.samples = 1;
        assert!(c.validate().is_err());
        let bad_n = SweepConfig::new(Structure::Design2, vec![1], vec![5], 1);
        assert!(bad_n.validate().is_err());
    }

    #[test]
    fn proposed_with_full_pending_is_lcu() {
        for seed in 0..5 {
            let p = sample_gradient(Structure::Proposed, 3, 4, 4, seed).unwrap();
            let l = sample_gradient(Structure::Lcu, 3, 4, 4, seed).unwrap();
            assert!((p - l).abs() < 1e-12);
        }
    }

    #[test]
    fn sweep_is_deterministic() {
        let mut c = SweepConfig::new(Structure::Lcu, vec![2, 3], vec![3], 5);
        c.samples = 8;
        assert_eq!(variance_sweep(&c).unwrap(), variance_sweep(&c).unwrap());
    }
}
