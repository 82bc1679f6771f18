//! Reference single-trajectory operations, layer by layer.
//!
//! These follow the physical order directly (faults, then gates, per layer)
//! and serve as the ground truth for the faster samplers.

use rand::Rng;

use super::plan::ExecutionPlan;
use super::SyndromeModel;
use crate::clifford::LayeredCircuit;
use crate::compiler::{PecTable, TableSampler};
use crate::error::{Error, Result};
use crate::noise::BlockFaults;
use crate::pauli::PauliString;

/// Applies the faults flagged in `fired` (indexed like `faults.faults`) and
/// the gates of `block`, layer by layer.
pub fn apply_block(
    frame: &mut PauliString,
    circuit: &LayeredCircuit,
    block: usize,
    faults: &BlockFaults,
    fired: &[bool],
) -> Result<()> {
    if frame.n_qubits() != circuit.width() {
        return Err(Error::DimensionMismatch {
            expected: circuit.width(),
            found: frame.n_qubits(),
        });
    }
    let range = circuit.block_range(block)?;
    let mut next = 0;
    for layer in range {
        while next < faults.faults.len() && faults.faults[next].layer == layer {
            if fired[next] {
                frame.mul_assign_unchecked(&faults.faults[next].pauli);
            }
            next += 1;
        }
        circuit.layers()[layer].conjugate(frame);
    }
    Ok(())
}

/// Samples each fault of the block independently and applies the block.
pub fn run_block<R: Rng + ?Sized>(
    frame: &mut PauliString,
    circuit: &LayeredCircuit,
    block: usize,
    faults: &BlockFaults,
    rng: &mut R,
) -> Result<()> {
    let fired: Vec<bool> = faults.faults.iter().map(|f| rng.gen::<f64>() < f.weight).collect();
    apply_block(frame, circuit, block, faults, &fired)
}

/// One syndrome round on `frame`; returns the reported bits. Cat extraction
/// also updates the frame with back-propagated ancilla errors.
pub fn measure_syndrome<R: Rng + ?Sized>(plan: &ExecutionPlan, frame: &mut PauliString, rng: &mut R) -> Result<u64> {
    let s = plan.syndrome(frame);
    match plan.model {
        SyndromeModel::Ideal => Ok(s),
        SyndromeModel::ReadoutFlip { p_m } => {
            let mut flips = 0u64;
            for a in 0..plan.bench.code.num_generators() {
                if rng.gen::<f64>() < p_m {
                    flips |= 1 << a;
                }
            }
            Ok(s ^ flips)
        }
        SyndromeModel::CatExtraction { .. } => {
            let ex = plan.extraction.as_ref().expect("cat model carries an extraction round");
            let (bits, out) = ex.circuit.sample_round(frame, rng)?;
            *frame = out;
            Ok(bits)
        }
    }
}

/// Draws a table entry, multiplies it into the frame and returns its sign.
pub fn apply_pec_sample<R: Rng + ?Sized>(frame: &mut PauliString, table: &PecTable, sampler: &TableSampler, rng: &mut R) -> i8 {
    let e = &table.entries[sampler.sample(rng)];
    frame.mul_assign_unchecked(&e.pauli);
    e.sign
}

/// 1 iff the final frame commutes with every target stabilizer generator.
pub fn ghz_fidelity_indicator(plan: &ExecutionPlan, frame: &PauliString) -> f64 {
    if plan.indicator(frame) {
        1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::plan::ProtocolSpec;
    use crate::sampler::stream_rng;

    /// Running faults layer by layer equals conjugating the incoming frame
    /// through the block and multiplying in the propagated faults.
    #[test]
    fn layerwise_equals_propagated() {
        let (plan, _) = ExecutionPlan::for_protocol(&ProtocolSpec::ideal(12, 3)).unwrap();
        let mut rng = stream_rng(1, 2);
        for (k, b) in plan.blocks.iter().enumerate() {
            for _ in 0..50 {
                let mut f0 = PauliString::identity(12);
                for q in 0..12 {
                    f0.set(q, crate::pauli::Pauli::ALL[rng.gen_range(0..4)]);
                }
                let fired: Vec<bool> = (0..b.located.len()).map(|_| rng.gen::<f64>() < 0.05).collect();
                let mut slow = f0.clone();
                apply_block(&mut slow, &plan.bench.circuit, k, &b.located, &fired).unwrap();
                let mut fast = f0.clone();
                plan.bench.circuit.conjugate_range(&mut fast, b.layers.clone());
                let idx: Vec<usize> = (0..fired.len()).filter(|&i| fired[i]).collect();
                b.faults.apply(&mut fast, &idx);
                assert_eq!(slow, fast);
            }
        }
    }
}
