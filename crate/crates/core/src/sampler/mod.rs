//! Pauli-frame trajectory sampling of the mitigated protocol.
//!
//! Each run propagates a Pauli frame through the blocks, samples faults,
//! post-selects on the syndrome round that ends each block and multiplies
//! in a draw from the block's quasi-probability table. Three estimators are
//! offered: plain per-shot sampling, an exact-stratum estimator for ideal
//! syndrome rounds, and a resampled particle population for noisy rounds.

pub mod extraction;
pub mod faultset;
pub mod frame;
pub mod oracle;
pub mod plain;
pub mod plan;
pub mod population;
pub mod stratified;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub use extraction::ExtractionRound;
pub use faultset::FaultSet;
pub use oracle::{exact_oracle, OracleResult};
pub use plan::{ExecutionPlan, ProtocolSpec};

/// How the syndrome round at the end of each block is modelled.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum SyndromeModel {
    Ideal,
    /// Each reported bit flips independently with probability `p_m`.
    ReadoutFlip { p_m: f64 },
    /// Cat-state extraction of every generator with `m_ancilla` ancillas,
    /// under the circuit noise model.
    CatExtraction { m_ancilla: usize },
}

impl SyndromeModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SyndromeModel::Ideal => Ok(()),
            SyndromeModel::ReadoutFlip { p_m } => {
                if !(0.0..=0.5).contains(&p_m) {
                    return Err(invalid(format!("p_m = {p_m} must lie in [0, 0.5]")));
                }
                Ok(())
            }
            SyndromeModel::CatExtraction { m_ancilla } => {
                if m_ancilla == 0 {
                    return Err(invalid("m_ancilla must be positive"));
                }
                Ok(())
            }
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SyndromeModel::Ideal => "ideal",
            SyndromeModel::ReadoutFlip { .. } => "readout",
            SyndromeModel::CatExtraction { .. } => "cat",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// Stratified for ideal rounds, population otherwise.
    #[default]
    Auto,
    Plain,
    Stratified,
    Population,
}

impl SamplingMode {
    pub fn label(&self) -> &'static str {
        match self {
            SamplingMode::Auto => "auto",
            SamplingMode::Plain => "plain",
            SamplingMode::Stratified => "stratified",
            SamplingMode::Population => "population",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub mode: SamplingMode,
    /// Trajectory budget (plain and stratified).
    pub shots: u64,
    /// Stop early once the standard error falls below this.
    pub target_stderr: Option<f64>,
    /// Minimum accepted trajectories before early stopping.
    pub min_accepted: u64,
    pub seed: u64,
    /// Population size per replicate (population mode).
    pub particles: usize,
    /// Independent replicates (population mode).
    pub replicates: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            mode: SamplingMode::Auto,
            shots: 100_000,
            target_stderr: None,
            min_accepted: 10_000,
            seed: 0,
            particles: 4096,
            replicates: 16,
        }
    }
}

/// Outcome of one plain trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub accepted: bool,
    /// Product of table signs (+1 or -1).
    pub sign: i8,
    /// Product of table norms.
    pub gamma: f64,
    /// `gamma * sign * indicator`, 0 when rejected.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub mode: SamplingMode,
    pub estimate: f64,
    pub stderr: f64,
    pub n_attempted: u64,
    pub n_accepted: u64,
    /// Estimated probability that every syndrome round accepts.
    pub p_accept: f64,
    pub p_accept_stderr: f64,
    /// `prod_k gamma_k`.
    pub gamma_total: f64,
    pub mean_abs_gamma: f64,
    /// `gamma_total^2 / p_accept`.
    pub cost_observed: f64,
    /// Per-round acceptance fractions (population mode), else empty.
    pub round_acceptance: Vec<f64>,
    pub wall_time_s: f64,
}

impl RunResult {
    pub fn acceptance_rate(&self) -> f64 {
        if self.n_attempted == 0 {
            0.0
        } else {
            self.n_accepted as f64 / self.n_attempted as f64
        }
    }
}

/// Reproducible stream for chunk `index` under master `seed`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Runs the plan with the requested estimator.
pub fn run(plan: &ExecutionPlan, opts: &RunOptions) -> Result<RunResult> {
    let mode = match opts.mode {
        SamplingMode::Auto => {
            if plan.model == SyndromeModel::Ideal {
                SamplingMode::Stratified
            } else {
                SamplingMode::Population
            }
        }
        m => m,
    };
    match mode {
        SamplingMode::Plain => plain::run_plain(plan, opts),
        SamplingMode::Stratified => stratified::run_stratified(plan, opts),
        SamplingMode::Population => population::run_population(plan, opts),
        SamplingMode::Auto => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::NoiseSpec;

    fn plan(n: usize, t: usize, model: SyndromeModel) -> ExecutionPlan {
        let mut spec = ProtocolSpec::ideal(n, t);
        spec.noise = NoiseSpec::new(1e-3, 1e-2).unwrap();
        spec.model = model;
        ExecutionPlan::for_protocol(&spec).unwrap().0
    }

    fn check(plan: &ExecutionPlan, mode: SamplingMode, shots: u64) {
        let exact = exact_oracle(plan).unwrap();
        let opts = RunOptions {
            mode,
            shots,
            seed: 7,
            particles: 20_000,
            replicates: 8,
            ..RunOptions::default()
        };
        let r = run(plan, &opts).unwrap();
        let z = (r.estimate - exact.fidelity) / r.stderr;
        assert!(z.abs() < 4.5, "{mode:?} {:?}: {} vs {} (se {})", plan.model, r.estimate, exact.fidelity, r.stderr);
        if mode != SamplingMode::Stratified {
            let pz = (r.p_accept - exact.acceptance) / r.p_accept_stderr.max(1e-12);
            assert!(pz.abs() < 4.5, "acceptance {} vs {}", r.p_accept, exact.acceptance);
        }
    }

    #[test]
    fn samplers_match_oracle_ideal() {
        let p = plan(6, 2, SyndromeModel::Ideal);
        check(&p, SamplingMode::Plain, 200_000);
        check(&p, SamplingMode::Stratified, 100_000);
        check(&p, SamplingMode::Population, 0);
        let p = plan(4, 3, SyndromeModel::Ideal);
        check(&p, SamplingMode::Stratified, 100_000);
    }

    #[test]
    fn samplers_match_oracle_noisy_rounds() {
        let p = plan(4, 2, SyndromeModel::ReadoutFlip { p_m: 1e-2 });
        check(&p, SamplingMode::Plain, 200_000);
        check(&p, SamplingMode::Population, 0);
        let p = plan(4, 1, SyndromeModel::CatExtraction { m_ancilla: 2 });
        check(&p, SamplingMode::Plain, 200_000);
        check(&p, SamplingMode::Population, 0);
    }

    #[test]
    fn runs_are_reproducible() {
        let p = plan(6, 2, SyndromeModel::Ideal);
        let opts = RunOptions {
            shots: 10_000,
            seed: 3,
            ..RunOptions::default()
        };
        let a = run(&p, &opts).unwrap();
        let b = run(&p, &opts).unwrap();
        assert_eq!(a.estimate, b.estimate);
        assert_eq!(a.n_accepted, b.n_accepted);
    }
}
