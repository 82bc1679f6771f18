//! Cat-state syndrome extraction.
//!
//! Every generator (pure X or pure Z type) is read out with `m` ideal cat
//! ancillas. Data qubit number `i` of the generator's support couples to
//! ancilla `i mod m`; the couplings run in `ceil(w/m)` batches. Z-type checks
//! use CZ(data, ancilla), X-type checks use CNOT(ancilla -> data). Noise acts
//! before each batch as in the circuit model, on the joint register. The
//! reported bit is the parity of the ancilla Z components; ancillas are then
//! discarded.

use rand::Rng;

use super::faultset::FaultSet;
use crate::clifford::{Gate, GateLayer};
use crate::code::StabilizerCode;
use crate::error::{invalid, Error, Result};
use crate::noise::{layer_fault_terms, NoiseSpec};
use crate::pauli::PauliString;

#[derive(Clone, Debug)]
pub struct CatCircuit {
    pub n: usize,
    pub m: usize,
    /// `(generator index, batch layers)` in readout order.
    pub checks: Vec<(usize, Vec<GateLayer>)>,
    /// Fault terms before each batch layer, indexed like `checks`.
    pub faults: Vec<Vec<Vec<(PauliString, f64)>>>,
}

impl CatCircuit {
    pub fn new(code: &StabilizerCode, m: usize, spec: &NoiseSpec) -> Result<Self> {
        if m == 0 {
            return Err(invalid("need at least one ancilla"));
        }
        let n = code.n();
        let width = n + m;
        let mut checks = Vec::new();
        let mut faults = Vec::new();
        for (a, g) in code.generators().iter().enumerate() {
            let z_type = g.x_count() == 0;
            let x_type = g.z_count() == 0;
            if !(z_type || x_type) {
                return Err(invalid(format!("generator {g} is neither X- nor Z-type")));
            }
            let support: Vec<usize> = (0..n).filter(|&q| g.get(q) != crate::pauli::Pauli::I).collect();
            let mut layers = Vec::new();
            for batch in support.chunks(m) {
                let gates = batch
                    .iter()
                    .enumerate()
                    .map(|(i, &q)| {
                        let anc = n + i;
                        if z_type {
                            Gate::Cz(q, anc)
                        } else {
                            Gate::cnot(anc, q)
                        }
                    })
                    .collect();
                layers.push(GateLayer::new(gates, width)?);
            }
            let terms = layers
                .iter()
                .map(|l| layer_fault_terms(l, width, spec))
                .collect::<Result<Vec<_>>>()?;
            checks.push((a, layers));
            faults.push(terms);
        }
        Ok(CatCircuit { n, m, checks, faults })
    }

    /// One extraction round on `data_frame` with the faults flagged in
    /// `fired[check][layer][term]`. Returns reported bits (bit = generator
    /// index) and the data frame afterwards.
    pub fn run_round(&self, data_frame: &PauliString, fired: &[Vec<Vec<bool>>]) -> Result<(u64, PauliString)> {
        if data_frame.n_qubits() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: data_frame.n_qubits(),
            });
        }
        let mut joint = data_frame.widen(self.n + self.m)?;
        let mut bits = 0u64;
        for (c, (a, layers)) in self.checks.iter().enumerate() {
            for (l, layer) in layers.iter().enumerate() {
                for (t, (p, _)) in self.faults[c][l].iter().enumerate() {
                    if fired[c][l][t] {
                        joint.mul_assign_unchecked(p);
                    }
                }
                layer.conjugate(&mut joint);
            }
            let mut parity = false;
            for q in self.n..self.n + self.m {
                parity ^= joint.z_bit(q);
                joint.set_x_bit(q, false);
                joint.set_z_bit(q, false);
            }
            if parity {
                bits |= 1 << a;
            }
        }
        Ok((bits, joint.slice(0, self.n)?))
    }

    /// Samples every fault term independently and runs a round.
    pub fn sample_round<R: Rng + ?Sized>(&self, data_frame: &PauliString, rng: &mut R) -> Result<(u64, PauliString)> {
        let fired: Vec<Vec<Vec<bool>>> = self
            .faults
            .iter()
            .map(|check| {
                check
                    .iter()
                    .map(|terms| terms.iter().map(|(_, w)| rng.gen::<f64>() < *w).collect())
                    .collect()
            })
            .collect();
        self.run_round(data_frame, &fired)
    }

    pub fn num_fault_terms(&self) -> usize {
        self.faults.iter().flatten().map(Vec::len).sum()
    }

    fn empty_selection(&self) -> Vec<Vec<Vec<bool>>> {
        self.faults
            .iter()
            .map(|c| c.iter().map(|t| vec![false; t.len()]).collect())
            .collect()
    }
}

/// Precomputed effect of every extraction fault: a round is linear in the
/// incoming frame and the fired faults, so
/// `reported = syndrome(frame) ^ XOR flips` and `frame ^= XOR residuals`.
#[derive(Clone, Debug)]
pub struct ExtractionRound {
    /// Residual data Paulis (as `paulis`) and flip masks (as `masks`).
    pub faults: FaultSet,
    pub circuit: CatCircuit,
}

impl ExtractionRound {
    pub fn new(code: &StabilizerCode, m: usize, spec: &NoiseSpec) -> Result<Self> {
        let circuit = CatCircuit::new(code, m, spec)?;
        let n = circuit.n;
        let zero = PauliString::identity(n);
        let mut paulis = Vec::new();
        let mut masks = Vec::new();
        let mut weights = Vec::new();
        let mut sel = circuit.empty_selection();
        for c in 0..circuit.faults.len() {
            for l in 0..circuit.faults[c].len() {
                for t in 0..circuit.faults[c][l].len() {
                    sel[c][l][t] = true;
                    let (bits, residual) = circuit.run_round(&zero, &sel)?;
                    sel[c][l][t] = false;
                    paulis.push(residual);
                    masks.push(bits);
                    weights.push(circuit.faults[c][l][t].1);
                }
            }
        }
        Ok(ExtractionRound {
            faults: FaultSet::new(paulis, masks, weights),
            circuit,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::stream_rng;
    use rand::Rng;

    #[test]
    fn ideal_round_reports_syndrome() {
        let code = StabilizerCode::iceberg(6).unwrap();
        let ex = CatCircuit::new(&code, 4, &NoiseSpec::new(0.0, 0.0).unwrap()).unwrap();
        assert_eq!(ex.checks[0].1.len(), 2);
        let sel = ex.empty_selection();
        for s in ["XIIIII", "ZIIIII", "YIIIII", "XXIIII", "IYIIZI"] {
            let f: PauliString = s.parse().unwrap();
            let (bits, out) = ex.run_round(&f, &sel).unwrap();
            assert_eq!(bits, code.syndrome(&f).unwrap().0, "{s}");
            assert_eq!(out, f);
        }
    }

    #[test]
    fn ancilla_errors_spread_to_data() {
        let code = StabilizerCode::iceberg(4).unwrap();
        let ex = ExtractionRound::new(&code, 2, &NoiseSpec::standard()).unwrap();
        // some single faults flip a reported bit without touching the data,
        // and some leave a data residual that commutes with both checks
        assert!(ex.faults.masks.iter().zip(&ex.faults.paulis).any(|(m, p)| *m != 0 && p.is_identity()));
        assert!(ex
            .faults
            .masks
            .iter()
            .zip(&ex.faults.paulis)
            .any(|(m, p)| *m == 0 && !p.is_identity() && code.accepts(p).unwrap()));
    }

    #[test]
    fn precomputed_effects_are_linear() {
        let code = StabilizerCode::iceberg(8).unwrap();
        let spec = NoiseSpec::new(0.05, 0.2).unwrap();
        let ex = ExtractionRound::new(&code, 3, &spec).unwrap();
        let mut rng = stream_rng(9, 0);
        for _ in 0..200 {
            let mut frame = PauliString::identity(8);
            for q in 0..8 {
                frame.set(q, crate::pauli::Pauli::ALL[rng.gen_range(0..4)]);
            }
            let mut sel = ex.circuit.empty_selection();
            let mut fired = Vec::new();
            let mut idx = 0;
            for c in sel.iter_mut() {
                for l in c.iter_mut() {
                    for t in l.iter_mut() {
                        if rng.gen::<f64>() < 0.05 {
                            *t = true;
                            fired.push(idx);
                        }
                        idx += 1;
                    }
                }
            }
            let (bits, out) = ex.circuit.run_round(&frame, &sel).unwrap();
            let mut lin = frame.clone();
            ex.faults.apply(&mut lin, &fired);
            let lin_bits = code.syndrome(&frame).unwrap().0 ^ ex.faults.mask_of(&fired);
            assert_eq!(bits, lin_bits);
            assert_eq!(out, lin);
        }
    }
}
