//! Circuit-level Pauli noise.
//!
//! Before each layer every qubit touched by a two-qubit gate pair receives
//! the 15 non-identity two-qubit Paulis at rate `p2/15` each, and every other
//! qubit (single-qubit gate or idle) receives X, Y, Z at `p1/3` each.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::{GateLayer, LayeredCircuit};
use crate::error::{invalid, Error, Result};
use crate::pauli::{Pauli, PauliString};

/// Blocks must satisfy `W < DEFAULT_MAX_BLOCK_WEIGHT` unless overridden.
pub const DEFAULT_MAX_BLOCK_WEIGHT: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub p1: f64,
    pub p2: f64,
}

impl NoiseSpec {
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        for (name, v) in [("p1", p1), ("p2", p2)] {
            if !(0.0..1.0).contains(&v) || !v.is_finite() {
                return Err(invalid(format!("{name} = {v} must lie in [0, 1)")));
            }
        }
        Ok(NoiseSpec { p1, p2 })
    }

    /// `p1 = 1e-4`, `p2 = 1e-3`.
    pub fn standard() -> Self {
        NoiseSpec { p1: 1e-4, p2: 1e-3 }
    }

    pub fn w1(&self) -> f64 {
        self.p1 / 3.0
    }

    pub fn w2(&self) -> f64 {
        self.p2 / 15.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FaultLocation {
    /// Index within the block, in layer order.
    pub id: usize,
    /// Global layer index; the fault acts just before this layer's gates.
    pub layer: usize,
    pub pauli: PauliString,
    pub weight: f64,
}

#[derive(Clone, Debug)]
pub struct BlockFaults {
    pub block: usize,
    pub faults: Vec<FaultLocation>,
}

impl BlockFaults {
    pub fn total_weight(&self) -> f64 {
        self.faults.iter().map(|f| f.weight).sum()
    }

    pub fn len(&self) -> usize {
        self.faults.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faults.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.faults.iter().map(|f| f.weight).collect()
    }
}

/// All `(pauli, weight)` fault terms applied before `layer`, for a register
/// of `width` qubits. Zero-rate terms are omitted.
pub fn layer_fault_terms(layer: &GateLayer, width: usize, spec: &NoiseSpec) -> Result<Vec<(PauliString, f64)>> {
    let mut out = Vec::new();
    let mut in_pair = vec![false; width];
    let (w1, w2) = (spec.w1(), spec.w2());
    for g in layer.gates() {
        if !g.is_two_qubit() {
            continue;
        }
        let qs = g.qubits();
        for &q in &qs {
            in_pair[q] = true;
        }
        if w2 > 0.0 {
            for a in Pauli::ALL {
                for b in Pauli::ALL {
                    if a == Pauli::I && b == Pauli::I {
                        continue;
                    }
                    out.push((PauliString::from_sparse(width, &[(qs[0], a), (qs[1], b)])?, w2));
                }
            }
        }
    }
    if w1 > 0.0 {
        for q in (0..width).filter(|&q| !in_pair[q]) {
            for a in Pauli::NON_IDENTITY {
                out.push((PauliString::single(width, q, a)?, w1));
            }
        }
    }
    Ok(out)
}

/// Fault locations of one block with the default validity limit.
pub fn block_faults(circuit: &LayeredCircuit, block: usize, spec: &NoiseSpec) -> Result<BlockFaults> {
    block_faults_with_limit(circuit, block, spec, DEFAULT_MAX_BLOCK_WEIGHT)
}

/// Fault locations of one block; errors if the total weight reaches `limit`.
pub fn block_faults_with_limit(
    circuit: &LayeredCircuit,
    block: usize,
    spec: &NoiseSpec,
    limit: f64,
) -> Result<BlockFaults> {
    let range = circuit.block_range(block)?;
    let mut faults = Vec::new();
    for layer in range {
        for (pauli, weight) in layer_fault_terms(&circuit.layers()[layer], circuit.width(), spec)? {
            faults.push(FaultLocation {
                id: faults.len(),
                layer,
                pauli,
                weight,
            });
        }
    }
    let out = BlockFaults { block, faults };
    let w = out.total_weight();
    if w >= limit {
        return Err(Error::Validity {
            block,
            weight: w,
            limit,
        });
    }
    Ok(out)
}

/// Multiplies every weight by `1 + r` with `r ~ U[-r_max, r_max]`, seeded.
pub fn perturb_weights(faults: &BlockFaults, r_max: f64, seed: u64) -> Result<BlockFaults> {
    if !(0.0..1.0).contains(&r_max) {
        return Err(invalid(format!("r_max = {r_max} must lie in [0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = faults.clone();
    for f in &mut out.faults {
        let r: f64 = if r_max > 0.0 { rng.gen_range(-r_max..=r_max) } else { 0.0 };
        f.weight *= 1.0 + r;
        if !(f.weight > 0.0 && f.weight < 1.0) {
            return Err(invalid(format!("perturbed weight {} left (0, 1)", f.weight)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::build_ghz_logical_circuit;

    #[test]
    fn per_layer_weight_matches_closed_form() {
        let spec = NoiseSpec::standard();
        for n in [4, 10, 30] {
            let b = build_ghz_logical_circuit(n, 1).unwrap();
            let bf = block_faults(&b.circuit, 0, &spec).unwrap();
            let per_layer = 2.0 * spec.p2 + (n as f64 - 4.0) * spec.p1;
            assert!((bf.total_weight() - 2.0 * per_layer).abs() < 1e-15);
            assert_eq!(bf.len(), 2 * (2 * 15 + 3 * (n - 4)));
            for (i, f) in bf.faults.iter().enumerate() {
                assert_eq!(f.id, i);
            }
        }
    }

    #[test]
    fn zero_rates_dropped() {
        let b = build_ghz_logical_circuit(8, 1).unwrap();
        let bf = block_faults(&b.circuit, 0, &NoiseSpec::new(0.0, 1e-3).unwrap()).unwrap();
        assert_eq!(bf.len(), 60);
        assert!(bf.faults.iter().all(|f| f.pauli.weight() <= 2 && f.weight > 0.0));
    }

    #[test]
    fn validity_limit_enforced() {
        let b = build_ghz_logical_circuit(200, 13).unwrap();
        let err = block_faults(&b.circuit, 0, &NoiseSpec::standard()).unwrap_err();
        assert!(matches!(err, Error::Validity { .. }));
        assert!(block_faults_with_limit(&b.circuit, 0, &NoiseSpec::standard(), 0.9).is_ok());
    }

    #[test]
    fn perturbation_is_seeded_and_bounded() {
        let b = build_ghz_logical_circuit(10, 2).unwrap();
        let bf = block_faults(&b.circuit, 0, &NoiseSpec::standard()).unwrap();
        let a = perturb_weights(&bf, 0.3, 7).unwrap();
        let c = perturb_weights(&bf, 0.3, 7).unwrap();
        assert_eq!(a.weights(), c.weights());
        for (x, y) in a.faults.iter().zip(&bf.faults) {
            let r = x.weight / y.weight - 1.0;
            assert!(r.abs() <= 0.3 + 1e-12);
        }
        assert_eq!(perturb_weights(&bf, 0.0, 1).unwrap().weights(), bf.weights());
        assert!(perturb_weights(&bf, 1.5, 1).is_err());
        assert!(NoiseSpec::new(-0.1, 0.0).is_err());
    }
}
