use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamConfig, AdamState};
use super::Structure;
use crate::error::{Error, Result};
use crate::gradients::Objective;
use crate::lcu::StagedCircuit;
use crate::rpqc::{energy, sample_rpqc};
use crate::statevector::PauliString;

/// Staged-training configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub n: usize,
    #[serde(rename = "L")]
    pub layers: usize,
    pub target: f64,
    pub pending: usize,
    pub epochs_per_stage: usize,
    pub seed: u64,
    pub adam: AdamConfig,
}

impl TrainConfig {
    pub fn new(n: usize, layers: usize, target: f64, pending: usize, epochs_per_stage: usize, seed: u64) -> Self {
        Self {
            n,
            layers,
            target,
            pending,
            epochs_per_stage,
            seed,
            adam: AdamConfig::default(),
        }
    }

    pub fn stages(&self) -> usize {
        self.layers / self.pending.max(1)
    }

    /// Epoch budget of the staged run, also used for the baseline.
    pub fn total_epochs(&self) -> usize {
        self.stages() * self.epochs_per_stage
    }

    pub fn validate(&self) -> Result<()> {
        check_target(self.target)?;
        if self.pending == 0 || !self.layers.is_multiple_of(self.pending) {
            return Err(Error::InvalidConfig(format!(
                "pending p = {} must be positive and divide L = {}",
                self.pending, self.layers
            )));
        }
        Ok(())
    }
}

fn check_target(target: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&target) {
        return Err(Error::InvalidConfig(format!("target {target} is outside [-1, 1]")));
    }
    Ok(())
}

/// Objective value and cost after `epoch` optimizer updates (`epoch = 0`
/// is the untrained circuit).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub stage: usize,
    pub fixed_layers: usize,
    pub expectation: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub structure: Structure,
    pub target: f64,
    pub initial: EpochRecord,
    /// Epochs `1..=total`, consecutive.
    pub records: Vec<EpochRecord>,
    /// Plain-circuit expectation of the trained parameters.
    pub final_expectation: f64,
    pub final_cost: f64,
    pub final_fixed_layers: usize,
}

/// One CSV/JSON training row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRow {
    pub run: usize,
    pub structure: Structure,
    pub target: f64,
    pub epoch: usize,
    pub stage: usize,
    pub expectation: f64,
    pub cost: f64,
}

impl TrainTrace {
    /// Rows for epoch 0 (initial evaluation) through the last epoch.
    pub fn rows(&self, run: usize) -> Vec<TrainRow> {
        std::iter::once(&self.initial)
            .chain(&self.records)
            .map(|r| TrainRow {
                run,
                structure: self.structure,
                target: self.target,
                epoch: r.epoch,
                stage: r.stage,
                expectation: r.expectation,
                cost: r.cost,
            })
            .collect()
    }

    pub fn epochs(&self) -> usize {
        self.records.len()
    }
}

/// Sample variance of the recorded expectations over epochs `from..=to`.
pub fn expectation_variance(trace: &TrainTrace, from: usize, to: usize) -> Result<f64> {
    let xs: Vec<f64> = trace
        .records
        .iter()
        .filter(|r| (from..=to).contains(&r.epoch))
        .map(|r| r.expectation)
        .collect();
    if xs.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "epochs {from}..={to} hold {} records; need at least 2",
            xs.len()
        )));
    }
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    Ok(xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0))
}

struct Trainer {
    target: f64,
    adam: AdamState,
    params: Vec<f64>,
    epoch: usize,
}

impl Trainer {
    fn cost(&self, value: f64) -> f64 {
        (value - self.target).powi(2)
    }

    /// Runs `epochs` updates on `objective`, starting from `self.params`.
    /// Returns the updated objective and one record per update.
    fn run(&mut self, mut objective: Objective, epochs: usize, stage: usize, fixed: usize) -> Result<(Objective, Vec<EpochRecord>)> {
        let mut out = Vec::with_capacity(epochs);
        objective.set_angles(&self.params)?;
        for _ in 0..epochs {
            let (value, grads) = objective.value_and_gradient()?;
            let scale = 2.0 * (value - self.target);
            let cost_grads: Vec<f64> = grads.iter().map(|g| scale * g).collect();
            adam_step(&mut self.adam, &mut self.params, &cost_grads)?;
            objective.set_angles(&self.params)?;
            self.epoch += 1;
            let after = objective.value()?;
            out.push(EpochRecord {
                epoch: self.epoch,
                stage,
                fixed_layers: fixed,
                expectation: after,
                cost: self.cost(after),
            });
        }
        Ok((objective, out))
    }
}

/// Staged training: `L / p` stages of `epochs_per_stage` Adam epochs on
/// `(E'' - target)^2`, each followed by freezing the intermediate block.
pub fn train_staged(config: &TrainConfig, obs: &PauliString) -> Result<TrainTrace> {
    train_staged_with(config, obs, |_| {})
}

/// [`train_staged`] that also hands the circuit to `observe` after every
/// stage transition.
pub fn train_staged_with(
    config: &TrainConfig,
    obs: &PauliString,
    mut observe: impl FnMut(&StagedCircuit),
) -> Result<TrainTrace> {
    config.validate()?;
    let spec = sample_rpqc(config.n, config.layers, config.seed)?;
    let p = config.pending;
    let mut circuit = StagedCircuit::from_rpqc(&spec, config.layers - p, p, obs.clone())?;

    let initial_value = Objective::staged(&circuit)?.value()?;
    let params = circuit.trainable_thetas();
    let mut trainer = Trainer {
        target: config.target,
        adam: AdamState::new(params.len(), config.adam),
        params,
        epoch: 0,
    };
    let initial = EpochRecord {
        epoch: 0,
        stage: 1,
        fixed_layers: 0,
        expectation: initial_value,
        cost: trainer.cost(initial_value),
    };

    let mut records = Vec::with_capacity(config.total_epochs());
    for stage in 1..=config.stages() {
        let fixed = circuit.fixed.len();
        let (_, recs) = trainer.run(Objective::staged(&circuit)?, config.epochs_per_stage, stage, fixed)?;
        records.extend(recs);
        circuit.set_trainable_thetas(&trainer.params)?;
        circuit.advance(p)?;
        // The retained parameters are a prefix of the previous ordering.
        let keep = circuit.trainable().len();
        trainer.params.truncate(keep);
        trainer.adam.truncate(keep);
        observe(&circuit);
    }

    let final_expectation = energy(&circuit.to_rpqc(config.seed), obs)?;
    Ok(TrainTrace {
        structure: Structure::Proposed,
        target: config.target,
        initial,
        records,
        final_expectation,
        final_cost: trainer.cost(final_expectation),
        final_fixed_layers: circuit.fixed.len(),
    })
}

/// All parameters of the plain circuit trained jointly on `(E - target)^2`.
pub fn train_baseline(
    n: usize,
    layers: usize,
    target: f64,
    epochs: usize,
    obs: &PauliString,
    seed: u64,
) -> Result<TrainTrace> {
    train_baseline_with(n, layers, target, epochs, obs, seed, AdamConfig::default())
}

fn train_baseline_with(
    n: usize,
    layers: usize,
    target: f64,
    epochs: usize,
    obs: &PauliString,
    seed: u64,
    adam: AdamConfig,
) -> Result<TrainTrace> {
    check_target(target)?;
    let spec = sample_rpqc(n, layers, seed)?;
    let objective = Objective::energy(&spec, obs)?;
    let initial_value = objective.value()?;
    let params: Vec<f64> = spec.thetas.iter().flatten().copied().collect();
    let mut trainer = Trainer {
        target,
        adam: AdamState::new(params.len(), adam),
        params,
        epoch: 0,
    };
    let initial = EpochRecord {
        epoch: 0,
        stage: 1,
        fixed_layers: 0,
        expectation: initial_value,
        cost: trainer.cost(initial_value),
    };
    let (objective, records) = trainer.run(objective, epochs, 1, 0)?;
    let final_expectation = objective.value()?;
    Ok(TrainTrace {
        structure: Structure::Design2,
        target,
        initial,
        records,
        final_expectation,
        final_cost: trainer.cost(final_expectation),
        final_fixed_layers: 0,
    })
}
