//! Plain Monte Carlo: independent trajectories, ratio estimator.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use super::frame::ghz_fidelity_indicator;
use super::plan::ExecutionPlan;
use super::{stream_rng, RunOptions, RunResult, SamplingMode, ShotRecord, SyndromeModel};
use crate::error::{Error, Result};
use crate::pauli::PauliString;

pub(crate) const CHUNK: u64 = 2048;
const CHUNKS_PER_BATCH: u64 = 16;

/// Scratch buffers reused across shots.
#[derive(Default)]
pub struct Scratch {
    fired: Vec<usize>,
}

/// One trajectory using precomputed propagated faults.
pub fn run_shot<R: Rng + ?Sized>(plan: &ExecutionPlan, rng: &mut R, scratch: &mut Scratch) -> ShotRecord {
    let mut frame = PauliString::identity(plan.n());
    let mut sign: i8 = 1;
    for b in &plan.blocks {
        plan.bench.circuit.conjugate_range(&mut frame, b.layers.clone());
        b.faults.sample(rng, &mut scratch.fired);
        b.faults.apply(&mut frame, &scratch.fired);
        let mut reported = plan.syndrome(&frame);
        match plan.model {
            SyndromeModel::Ideal => {}
            SyndromeModel::ReadoutFlip { p_m } => {
                for a in 0..plan.bench.code.num_generators() {
                    if rng.gen::<f64>() < p_m {
                        reported ^= 1 << a;
                    }
                }
            }
            SyndromeModel::CatExtraction { .. } => {
                let ex = &plan.extraction.as_ref().unwrap().faults;
                ex.sample(rng, &mut scratch.fired);
                reported ^= ex.mask_of(&scratch.fired);
                ex.apply(&mut frame, &scratch.fired);
            }
        }
        if reported != 0 {
            return ShotRecord {
                accepted: false,
                sign: 0,
                gamma: plan.gamma_total,
                value: 0.0,
            };
        }
        if plan.pec {
            let e = &b.table.entries[b.sampler.sample(rng)];
            frame.mul_assign_unchecked(&e.pauli);
            sign *= e.sign;
        }
    }
    let value = plan.gamma_total * sign as f64 * ghz_fidelity_indicator(plan, &frame);
    ShotRecord {
        accepted: true,
        sign,
        gamma: plan.gamma_total,
        value,
    }
}

/// Ratio estimate `sum value / #accepted` with its delta-method standard error.
pub fn estimate(records: &[ShotRecord]) -> Result<(f64, f64)> {
    let mut m = Moments::default();
    for r in records {
        m.push(r);
    }
    m.ratio()
}

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Moments {
    pub attempted: u64,
    pub accepted: u64,
    pub sum: f64,
    pub sum_sq: f64,
    pub sum_abs_gamma: f64,
}

impl Moments {
    pub fn push(&mut self, r: &ShotRecord) {
        self.attempted += 1;
        if r.accepted {
            self.accepted += 1;
            self.sum += r.value;
            self.sum_sq += r.value * r.value;
            self.sum_abs_gamma += r.gamma.abs();
        }
    }

    pub fn merge(&mut self, o: &Moments) {
        self.attempted += o.attempted;
        self.accepted += o.accepted;
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
        self.sum_abs_gamma += o.sum_abs_gamma;
    }

    /// Mean over accepted samples and its standard error.
    pub fn ratio(&self) -> Result<(f64, f64)> {
        if self.accepted == 0 {
            return Err(Error::NoData);
        }
        let n = self.accepted as f64;
        let mean = self.sum / n;
        let var = if self.accepted > 1 {
            ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        Ok((mean, (var / n).sqrt()))
    }
}

/// Runs fixed-size chunks with per-chunk streams in batches until the shot
/// budget is used or the stopping rule fires. Merging happens in chunk
/// order, so results do not depend on the thread count.
pub(crate) fn drive(
    opts: &RunOptions,
    chunk: impl Fn(u64, u64) -> Moments + Sync,
    stderr_of: impl Fn(&Moments) -> Option<f64>,
) -> Moments {
    let total_chunks = opts.shots.div_ceil(CHUNK).max(1);
    let mut acc = Moments::default();
    let mut next = 0u64;
    while next < total_chunks {
        let end = (next + CHUNKS_PER_BATCH).min(total_chunks);
        let parts: Vec<Moments> = (next..end)
            .into_par_iter()
            .map(|c| {
                let count = CHUNK.min(opts.shots.saturating_sub(c * CHUNK)).max(1);
                chunk(c, count)
            })
            .collect();
        for p in &parts {
            acc.merge(p);
        }
        next = end;
        if let Some(target) = opts.target_stderr {
            if acc.accepted >= opts.min_accepted {
                if let Some(se) = stderr_of(&acc) {
                    if se <= target {
                        break;
                    }
                }
            }
        }
    }
    acc
}

pub fn run_plain(plan: &ExecutionPlan, opts: &RunOptions) -> Result<RunResult> {
    let start = Instant::now();
    let m = drive(
        opts,
        |c, count| {
            let mut rng = stream_rng(opts.seed, c);
            let mut scratch = Scratch::default();
            let mut m = Moments::default();
            for _ in 0..count {
                m.push(&run_shot(plan, &mut rng, &mut scratch));
            }
            m
        },
        |m| m.ratio().ok().map(|r| r.1),
    );
    let (estimate, stderr) = m.ratio()?;
    let p = m.accepted as f64 / m.attempted as f64;
    let p_se = (p * (1.0 - p) / m.attempted as f64).sqrt();
    Ok(RunResult {
        mode: SamplingMode::Plain,
        estimate,
        stderr,
        n_attempted: m.attempted,
        n_accepted: m.accepted,
        p_accept: p,
        p_accept_stderr: p_se,
        gamma_total: plan.gamma_total,
        mean_abs_gamma: m.sum_abs_gamma / m.accepted as f64,
        cost_observed: plan.gamma_total.powi(2) / p,
        round_acceptance: Vec::new(),
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimate_of_fixed_records() {
        let r = |a: bool, v: f64| ShotRecord {
            accepted: a,
            sign: 1,
            gamma: 1.0,
            value: v,
        };
        let (m, se) = estimate(&[r(true, 1.0), r(true, 0.0), r(false, 0.0), r(true, 1.0)]).unwrap();
        assert!((m - 2.0 / 3.0).abs() < 1e-15);
        assert!(se > 0.0);
        assert!(matches!(estimate(&[r(false, 0.0)]), Err(Error::NoData)));
    }
}
