//! Stratified estimator for ideal syndrome rounds.
//!
//! With ideal rounds the blocks are independent once conditioned on
//! acceptance: block `k` accepts with the exact probability `p_k`, and given
//! acceptance it is "trivial" (no fault and an identity table draw) with
//! probability `1 - e_k`. The all-trivial stratum has a known value, so only
//! trajectories with at least one non-trivial block are sampled:
//!
//! `F = P0 * V0 + (1 - P0) * E[V | some block non-trivial]`.

use std::time::Instant;

use rand::Rng;

use super::faultset::FaultSet;
use super::plain::{drive, Moments};
use super::plan::ExecutionPlan;
use super::{stream_rng, RunOptions, RunResult, SamplingMode, ShotRecord, SyndromeModel};
use crate::error::{invalid, Result};
use crate::pauli::PauliString;

struct BlockStrata {
    /// P(at least one fault | accepted)
    f: f64,
    /// P(non-trivial | accepted)
    e: f64,
    identity_sign: i8,
}

pub struct Stratified<'a> {
    plan: &'a ExecutionPlan,
    strata: Vec<BlockStrata>,
    selector: FaultSet,
    /// Probability that every block is trivial.
    pub p0: f64,
    /// Value of the all-trivial stratum.
    pub v0: f64,
}

impl<'a> Stratified<'a> {
    pub fn new(plan: &'a ExecutionPlan) -> Result<Self> {
        if plan.model != SyndromeModel::Ideal {
            return Err(invalid("stratified sampling needs ideal syndrome rounds"));
        }
        let mut strata = Vec::with_capacity(plan.blocks.len());
        let mut v0 = plan.gamma_total;
        for b in &plan.blocks {
            let f = if b.faults.is_empty() {
                0.0
            } else {
                (1.0 - b.faults.p_none() / b.p_accept).max(0.0)
            };
            let (g, identity_sign) = if plan.pec {
                let id = b.table.identity_index();
                (1.0 - b.sampler.q_identity, id.map_or(1, |i| b.table.entries[i].sign))
            } else {
                (0.0, 1)
            };
            let e = 1.0 - (1.0 - f) * (1.0 - g);
            v0 *= identity_sign as f64;
            strata.push(BlockStrata {
                f,
                e,
                identity_sign,
            });
        }
        let p0: f64 = strata.iter().map(|s| 1.0 - s.e).product();
        let selector = FaultSet::new(
            vec![PauliString::identity(0); strata.len()],
            vec![0; strata.len()],
            strata.iter().map(|s| s.e.min(1.0 - 1e-300)).collect(),
        );
        Ok(Stratified {
            plan,
            strata,
            selector,
            p0,
            v0,
        })
    }

    /// One trajectory conditioned on at least one non-trivial block.
    pub fn conditional_shot<R: Rng + ?Sized>(&self, rng: &mut R, nontrivial: &mut Vec<usize>, fired: &mut Vec<usize>) -> ShotRecord {
        let plan = self.plan;
        self.selector.sample_at_least_one(rng, nontrivial);
        let mut frame = PauliString::identity(plan.n());
        let mut sign: i8 = 1;
        for s in &self.strata[..nontrivial[0]] {
            sign *= s.identity_sign;
        }
        let mut next = 0;
        for k in nontrivial[0]..plan.blocks.len() {
            let b = &plan.blocks[k];
            let st = &self.strata[k];
            plan.bench.circuit.conjugate_range(&mut frame, b.layers.clone());
            if next < nontrivial.len() && nontrivial[next] == k {
                next += 1;
                let with_faults = st.f > 0.0 && rng.gen::<f64>() * st.e < st.f;
                let entry = if with_faults {
                    loop {
                        b.faults.sample_at_least_one(rng, fired);
                        if b.faults.mask_of(fired) == 0 {
                            break;
                        }
                    }
                    b.faults.apply(&mut frame, fired);
                    if plan.pec {
                        Some(b.sampler.sample(rng))
                    } else {
                        None
                    }
                } else {
                    Some(b.sampler.sample_non_identity(rng))
                };
                if let Some(i) = entry {
                    let e = &b.table.entries[i];
                    frame.mul_assign_unchecked(&e.pauli);
                    sign *= e.sign;
                }
            } else {
                sign *= st.identity_sign;
            }
        }
        let ind = if plan.indicator(&frame) { 1.0 } else { 0.0 };
        ShotRecord {
            accepted: true,
            sign,
            gamma: plan.gamma_total,
            value: plan.gamma_total * sign as f64 * ind,
        }
    }

    fn combine(&self, m: &Moments) -> Result<(f64, f64)> {
        if self.p0 >= 1.0 {
            return Ok((self.v0, 0.0));
        }
        let (mean, se) = m.ratio()?;
        Ok((self.p0 * self.v0 + (1.0 - self.p0) * mean, (1.0 - self.p0) * se))
    }
}

pub fn run_stratified(plan: &ExecutionPlan, opts: &RunOptions) -> Result<RunResult> {
    let start = Instant::now();
    let st = Stratified::new(plan)?;
    let p_accept = plan.p_accept_ideal();
    let (estimate, stderr, m) = if st.p0 >= 1.0 {
        (st.v0, 0.0, Moments::default())
    } else {
        let m = drive(
            opts,
            |c, count| {
                let mut rng = stream_rng(opts.seed, c);
                let (mut a, mut b) = (Vec::new(), Vec::new());
                let mut m = Moments::default();
                for _ in 0..count {
                    m.push(&st.conditional_shot(&mut rng, &mut a, &mut b));
                }
                m
            },
            |m| st.combine(m).ok().map(|r| r.1),
        );
        let (e, s) = st.combine(&m)?;
        (e, s, m)
    };
    Ok(RunResult {
        mode: SamplingMode::Stratified,
        estimate,
        stderr,
        n_attempted: m.attempted,
        n_accepted: m.accepted,
        p_accept,
        p_accept_stderr: 0.0,
        gamma_total: plan.gamma_total,
        mean_abs_gamma: plan.gamma_total,
        cost_observed: plan.gamma_total.powi(2) / p_accept,
        round_acceptance: plan.blocks.iter().map(|b| b.p_accept).collect(),
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}
