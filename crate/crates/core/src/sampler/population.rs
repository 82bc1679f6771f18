//! Resampled particle population for noisy syndrome rounds.
//!
//! A population of frames runs through the blocks together. After each
//! syndrome round the accepted fraction `a_k` is recorded and the survivors
//! are resampled back to full size, so `prod_k a_k` estimates the overall
//! acceptance probability even when it is far too small for direct
//! sampling. Independent replicates give the standard errors.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use super::plan::ExecutionPlan;
use super::{stream_rng, RunOptions, RunResult, SamplingMode, SyndromeModel};
use crate::error::{invalid, Error, Result};
use crate::pauli::PauliString;

#[derive(Clone, Debug)]
pub struct Replicate {
    pub estimate: f64,
    pub p_accept: f64,
    pub acceptance: Vec<f64>,
    pub accepted: u64,
    pub attempted: u64,
}

/// One replicate with `particles` frames.
pub fn run_replicate<R: Rng + ?Sized>(plan: &ExecutionPlan, particles: usize, rng: &mut R) -> Result<Replicate> {
    if particles == 0 {
        return Err(invalid("need at least one particle"));
    }
    let n = plan.n();
    let mut frames = vec![PauliString::identity(n); particles];
    let mut signs = vec![1i8; particles];
    let mut next_frames = frames.clone();
    let mut next_signs = signs.clone();
    let mut survivors = Vec::with_capacity(particles);
    let mut fired = Vec::new();
    let mut acceptance = Vec::with_capacity(plan.blocks.len());
    let mut log_p = 0.0;
    let (mut accepted, mut attempted) = (0u64, 0u64);
    let ngen = plan.bench.code.num_generators();
    for b in &plan.blocks {
        survivors.clear();
        for (i, frame) in frames.iter_mut().enumerate() {
            plan.bench.circuit.conjugate_range(frame, b.layers.clone());
            b.faults.sample(rng, &mut fired);
            b.faults.apply(frame, &fired);
            let mut reported = plan.syndrome(frame);
            match plan.model {
                SyndromeModel::Ideal => {}
                SyndromeModel::ReadoutFlip { p_m } => {
                    for a in 0..ngen {
                        if rng.gen::<f64>() < p_m {
                            reported ^= 1 << a;
                        }
                    }
                }
                SyndromeModel::CatExtraction { .. } => {
                    let ex = &plan.extraction.as_ref().unwrap().faults;
                    ex.sample(rng, &mut fired);
                    reported ^= ex.mask_of(&fired);
                    ex.apply(frame, &fired);
                }
            }
            if reported == 0 {
                survivors.push(i);
            }
        }
        attempted += particles as u64;
        accepted += survivors.len() as u64;
        if survivors.is_empty() {
            return Err(Error::NoData);
        }
        let a = survivors.len() as f64 / particles as f64;
        acceptance.push(a);
        log_p += a.ln();
        // systematic resampling of the survivors
        let u: f64 = rng.gen();
        let s = survivors.len() as f64;
        for j in 0..particles {
            let src = survivors[(((j as f64 + u) * s / particles as f64) as usize).min(survivors.len() - 1)];
            next_frames[j].clone_from(&frames[src]);
            next_signs[j] = signs[src];
        }
        std::mem::swap(&mut frames, &mut next_frames);
        std::mem::swap(&mut signs, &mut next_signs);
        if plan.pec {
            for (frame, sign) in frames.iter_mut().zip(signs.iter_mut()) {
                let e = &b.table.entries[b.sampler.sample(rng)];
                frame.mul_assign_unchecked(&e.pauli);
                *sign *= e.sign;
            }
        }
    }
    let total: f64 = frames
        .iter()
        .zip(&signs)
        .map(|(f, &s)| if plan.indicator(f) { s as f64 } else { 0.0 })
        .sum();
    Ok(Replicate {
        estimate: plan.gamma_total * total / particles as f64,
        p_accept: log_p.exp(),
        acceptance,
        accepted,
        attempted,
    })
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn run_population(plan: &ExecutionPlan, opts: &RunOptions) -> Result<RunResult> {
    let start = Instant::now();
    if opts.replicates < 2 {
        return Err(invalid("population mode needs at least two replicates"));
    }
    let reps = (0..opts.replicates as u64)
        .into_par_iter()
        .map(|r| run_replicate(plan, opts.particles, &mut stream_rng(opts.seed, r)))
        .collect::<Result<Vec<_>>>()?;
    let (estimate, stderr) = mean_and_se(&reps.iter().map(|r| r.estimate).collect::<Vec<_>>());
    let (p_accept, p_accept_stderr) = mean_and_se(&reps.iter().map(|r| r.p_accept).collect::<Vec<_>>());
    let rounds = plan.blocks.len();
    let round_acceptance = (0..rounds)
        .map(|k| reps.iter().map(|r| r.acceptance[k]).sum::<f64>() / reps.len() as f64)
        .collect();
    Ok(RunResult {
        mode: SamplingMode::Population,
        estimate,
        stderr,
        n_attempted: reps.iter().map(|r| r.attempted).sum(),
        n_accepted: reps.iter().map(|r| r.accepted).sum(),
        p_accept,
        p_accept_stderr,
        gamma_total: plan.gamma_total,
        mean_abs_gamma: plan.gamma_total,
        cost_observed: plan.gamma_total.powi(2) / p_accept,
        round_acceptance,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}
