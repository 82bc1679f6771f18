//! Closed-form cost expressions and the two toy models.

use serde::{Deserialize, Serialize};

use crate::compiler::PecTable;
use crate::error::{invalid, Result};
use crate::noise::NoiseSpec;

/// Per-cycle data entering the cost: table norm and acceptance probability.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleCost {
    pub gamma: f64,
    pub p_success: f64,
}

impl From<&PecTable> for CycleCost {
    fn from(t: &PecTable) -> Self {
        CycleCost {
            gamma: t.gamma,
            p_success: t.p_success,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    /// `prod gamma_k^2 / p_k`.
    pub total: f64,
    /// `prod 1 / p_k`.
    pub postselect: f64,
    /// `prod gamma_k^2`.
    pub gamma2: f64,
}

pub fn total_cost_qedpec(cycles: &[CycleCost]) -> Result<CostBreakdown> {
    let mut log_post = 0.0;
    let mut log_g2 = 0.0;
    for (k, c) in cycles.iter().enumerate() {
        if !(c.p_success > 0.0 && c.p_success <= 1.0 + 1e-12) {
            return Err(invalid(format!("cycle {k}: acceptance probability {} outside (0, 1]", c.p_success)));
        }
        if !(c.gamma >= 1.0 - 1e-12) {
            return Err(invalid(format!("cycle {k}: gamma {} below 1", c.gamma)));
        }
        log_post -= c.p_success.ln();
        log_g2 += 2.0 * c.gamma.ln();
    }
    Ok(CostBreakdown {
        total: (log_post + log_g2).exp(),
        postselect: log_post.exp(),
        gamma2: log_g2.exp(),
    })
}

/// Unencoded PEC on the bare `n`-qubit GHZ circuit of `2(n-3)` layers:
/// `[1 + 2((n-4) p1 + p2)]^{2(n-3)}`.
pub fn pure_pec_cost(n: usize, spec: &NoiseSpec) -> Result<f64> {
    if n < 4 {
        return Err(invalid(format!("n = {n} is below 4")));
    }
    let per_layer = 1.0 + 2.0 * ((n as f64 - 4.0) * spec.p1 + spec.p2);
    Ok(per_layer.powf(2.0 * (n as f64 - 3.0)))
}

/// Total weight of one compiled layer of the Iceberg GHZ benchmark.
pub fn layer_weight(n: usize, spec: &NoiseSpec) -> f64 {
    2.0 * spec.p2 + (n as f64 - 4.0) * spec.p1
}

/// `exp(sum_m W_m^2) - 1` for the given block weights.
pub fn b1_from_weights(weights: &[f64]) -> f64 {
    weights.iter().map(|w| w * w).sum::<f64>().exp_m1()
}

/// Perturbative scale for the GHZ benchmark with `T` logical gates per block,
/// `W_m = 2 T_m (2 p2 + (n-4) p1)`.
pub fn perturbative_bound_b1(n: usize, t: usize, spec: &NoiseSpec) -> Result<f64> {
    if n < 4 || t == 0 {
        return Err(invalid(format!("n = {n}, T = {t}")));
    }
    let gates = n - 3;
    let wl = layer_weight(n, spec);
    let mut weights = vec![2.0 * t as f64 * wl; gates / t];
    if gates % t != 0 {
        weights.push(2.0 * (gates % t) as f64 * wl);
    }
    Ok(b1_from_weights(&weights))
}

/// Parameters of the two toy models: error rate `gamma`, total time `T`,
/// detection period `tau`, code-space dimension `N` (model A only).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToyParams {
    pub gamma: f64,
    pub t_total: f64,
    pub tau: f64,
    pub levels: f64,
}

impl ToyParams {
    fn check(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.t_total > 0.0 && self.tau > 0.0) {
            return Err(invalid("toy model needs positive gamma, T and tau"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToyA {
    pub p_success: f64,
    pub gamma_a: f64,
    /// `[gamma_A^2 / p_succ]^{T / tau}`.
    pub exact: f64,
    /// `gamma T (1 + 4/N) + gamma^2 T tau (2/N - 7/N^2)`.
    pub expanded_log: f64,
    /// Exact `ln` of the post-selection factor.
    pub log_postselect: f64,
    /// Exact `ln` of the `gamma^2` factor.
    pub log_gamma2: f64,
}

/// Depolarising toy model on an `N`-dimensional code space with detection
/// every `tau`.
pub fn toy_model_a(p: &ToyParams) -> Result<ToyA> {
    p.check()?;
    if p.levels < 2.0 {
        return Err(invalid("model A needs N >= 2"));
    }
    let n = p.levels;
    let x = p.gamma * p.tau;
    let perr = -(-x).exp_m1();
    let p_success = 1.0 - perr * (1.0 - 2.0 / n);
    let gamma_a = 1.0 + 3.0 / n * x.exp_m1();
    let cycles = p.t_total / p.tau;
    let log_postselect = -cycles * p_success.ln();
    let log_gamma2 = 2.0 * cycles * gamma_a.ln();
    let gt = p.gamma * p.t_total;
    Ok(ToyA {
        p_success,
        gamma_a,
        exact: (log_postselect + log_gamma2).exp(),
        expanded_log: gt * (1.0 + 4.0 / n) + p.gamma * gt * p.tau * (2.0 / n - 7.0 / (n * n)),
        log_postselect,
        log_gamma2,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToyB {
    /// `[(3/2) e^{gamma tau} - 1/2]^{2 T / tau}`.
    pub exact: f64,
    /// `3 gamma T - (3/4) gamma^2 T tau`.
    pub expanded_log: f64,
}

/// Single-qubit dephasing toy model mitigated periodically every `tau`.
pub fn toy_model_b(p: &ToyParams) -> Result<ToyB> {
    p.check()?;
    let x = p.gamma * p.tau;
    let base = 1.5 * x.exp() - 0.5;
    let gt = p.gamma * p.t_total;
    Ok(ToyB {
        exact: (2.0 * p.t_total / p.tau * base.ln()).exp(),
        expanded_log: 3.0 * gt - 0.75 * p.gamma * gt * p.tau,
    })
}

/// Model B mitigated once at the end: `((3/2) e^{gamma T} - 1/2)^2`.
pub fn toy_b_single_shot(gamma_t: f64) -> f64 {
    (1.5 * gamma_t.exp() - 0.5).powi(2)
}

/// Leading-order log-cost gap between periodic detection and one final
/// detection: `gamma T (1 - 4/N)`.
pub fn zeno_separation(levels: f64, gamma_t: f64) -> f64 {
    gamma_t * (1.0 - 4.0 / levels)
}
