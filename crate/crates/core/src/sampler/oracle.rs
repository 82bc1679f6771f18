//! Exact evaluation of small instances.
//!
//! The frame distribution is held densely over all `4^n` Paulis (times the
//! reported bits during a cat round). Each fault is a two-point convolution,
//! which sums over every fault subset exactly; the table step is a signed
//! convolution. Two arrays are carried: the signed mitigated one and the
//! plain probability distribution without table draws.

use super::plan::ExecutionPlan;
use super::SyndromeModel;
use crate::error::{Error, Result};
use crate::pauli::PauliString;

pub const MAX_ORACLE_QUBITS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleResult {
    /// Mitigated estimator mean `N / D`.
    pub fidelity: f64,
    /// Fidelity after detection only.
    pub fidelity_qedc: f64,
    /// Probability that every round accepts.
    pub acceptance: f64,
}

fn convolve(dist: &mut Vec<f64>, tmp: &mut Vec<f64>, shift: usize, w: f64) {
    tmp.clone_from(dist);
    for (i, v) in dist.iter_mut().enumerate() {
        *v = (1.0 - w) * tmp[i] + w * tmp[i ^ shift];
    }
}

pub fn exact_oracle(plan: &ExecutionPlan) -> Result<OracleResult> {
    let n = plan.n();
    if n > MAX_ORACLE_QUBITS {
        return Err(Error::SizeLimit(format!("exact oracle limited to {MAX_ORACLE_QUBITS} qubits, got {n}")));
    }
    let size = 1usize << (2 * n);
    let paulis: Vec<PauliString> = (0..size).map(|i| PauliString::from_dense_index(n, i)).collect();
    let syn: Vec<u64> = paulis.iter().map(|p| plan.syndrome(p)).collect();
    let ngen = plan.bench.code.num_generators();
    let nrep = 1usize << ngen;

    let mut signed = vec![0.0; size];
    let mut plain = vec![0.0; size];
    signed[0] = 1.0;
    plain[0] = 1.0;
    let mut tmp = vec![0.0; size];

    for b in &plan.blocks {
        // gates
        let perm: Vec<usize> = paulis
            .iter()
            .map(|p| {
                let mut q = p.clone();
                plan.bench.circuit.conjugate_range(&mut q, b.layers.clone());
                q.dense_index()
            })
            .collect();
        for arr in [&mut signed, &mut plain] {
            tmp.iter_mut().for_each(|v| *v = 0.0);
            for (i, &j) in perm.iter().enumerate() {
                tmp[j] += arr[i];
            }
            std::mem::swap(arr, &mut tmp);
        }
        // faults, propagated to the block end
        for (p, &w) in b.faults.paulis.iter().zip(&b.faults.weights) {
            let d = p.dense_index();
            convolve(&mut signed, &mut tmp, d, w);
            convolve(&mut plain, &mut tmp, d, w);
        }
        // syndrome round
        match plan.model {
            SyndromeModel::Ideal => {
                for arr in [&mut signed, &mut plain] {
                    for (i, v) in arr.iter_mut().enumerate() {
                        if syn[i] != 0 {
                            *v = 0.0;
                        }
                    }
                }
            }
            SyndromeModel::ReadoutFlip { p_m } => {
                for arr in [&mut signed, &mut plain] {
                    for (i, v) in arr.iter_mut().enumerate() {
                        let flips = syn[i].count_ones() as i32;
                        *v *= p_m.powi(flips) * (1.0 - p_m).powi(ngen as i32 - flips);
                    }
                }
            }
            SyndromeModel::CatExtraction { .. } => {
                let ex = &plan.extraction.as_ref().unwrap().faults;
                for arr in [&mut signed, &mut plain] {
                    // joint (frame, reported bits), index = frame * nrep + bits
                    let mut joint = vec![0.0; size * nrep];
                    for (i, &v) in arr.iter().enumerate() {
                        joint[i * nrep + syn[i] as usize] = v;
                    }
                    let mut jt = vec![0.0; size * nrep];
                    for ((p, &mask), &w) in ex.paulis.iter().zip(&ex.masks).zip(&ex.weights) {
                        let shift = p.dense_index() * nrep + mask as usize;
                        convolve(&mut joint, &mut jt, shift, w);
                    }
                    for (i, v) in arr.iter_mut().enumerate() {
                        *v = joint[i * nrep];
                    }
                }
            }
        }
        // table draw on the signed array
        if plan.pec {
            tmp.clone_from(&signed);
            signed.iter_mut().for_each(|v| *v = 0.0);
            for e in &b.table.entries {
                let c = b.table.gamma * e.sign as f64 * e.prob;
                let d = e.pauli.dense_index();
                for (i, v) in signed.iter_mut().enumerate() {
                    *v += c * tmp[i ^ d];
                }
            }
        }
    }
    let acceptance: f64 = plain.iter().sum();
    if !(acceptance > 0.0) {
        return Err(Error::NoData);
    }
    let mut num = 0.0;
    let mut num_qedc = 0.0;
    for (i, p) in paulis.iter().enumerate() {
        if plan.indicator(p) {
            num += signed[i];
            num_qedc += plain[i];
        }
    }
    Ok(OracleResult {
        fidelity: num / acceptance,
        fidelity_qedc: num_qedc / acceptance,
        acceptance,
    })
}
