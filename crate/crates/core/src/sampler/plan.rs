//! Everything a sampler needs, precomputed once per protocol instance.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::extraction::ExtractionRound;
use super::faultset::FaultSet;
use super::SyndromeModel;
use crate::clifford::{build_ghz_logical_circuit, commutes_with_all, GhzBenchmark};
use crate::code::{trivial_syndrome_probability, Syndrome};
use crate::compiler::{compile_propagated, propagate_faults, CompileOptions, CompiledBlock, PecTable, PropagatedFault, TableSampler};
use crate::error::{invalid, Error, Result};
use crate::noise::{block_faults_with_limit, perturb_weights, BlockFaults, NoiseSpec};
use crate::pauli::PauliString;

/// SplitMix64 step, used to derive independent seeds from `(seed, index)`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x6A09_E667_F3BC_C909);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Full description of one GHZ protocol instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub n: usize,
    pub t: usize,
    pub noise: NoiseSpec,
    pub compile: CompileOptions,
    pub model: SyndromeModel,
    /// Apply the quasi-probability tables; `false` gives detection only.
    pub pec: bool,
    /// Execution weights are drawn as `w (1 + r)`, `r ~ U[-r_max, r_max]`;
    /// tables always use the nominal weights.
    pub r_max: f64,
    pub drift_seed: u64,
    /// Nonstandard: add accepted single extraction faults to the tables.
    pub extraction_first_order: bool,
}

impl ProtocolSpec {
    pub fn ideal(n: usize, t: usize) -> Self {
        ProtocolSpec {
            n,
            t,
            noise: NoiseSpec::standard(),
            compile: CompileOptions::default(),
            model: SyndromeModel::Ideal,
            pec: true,
            r_max: 0.0,
            drift_seed: 0,
            extraction_first_order: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExecBlock {
    pub layers: Range<usize>,
    /// Execution faults propagated to the block end.
    pub faults: FaultSet,
    /// Execution faults at their layers, for the reference sampler.
    pub located: BlockFaults,
    pub table: PecTable,
    pub sampler: TableSampler,
    /// Exact probability that an ideal syndrome round accepts this block's
    /// faults, given an accepted incoming frame.
    pub p_accept: f64,
}

#[derive(Clone, Debug)]
pub struct ExecutionPlan {
    pub bench: GhzBenchmark,
    pub blocks: Vec<ExecBlock>,
    pub model: SyndromeModel,
    pub extraction: Option<ExtractionRound>,
    pub pec: bool,
    pub gamma_total: f64,
}

impl ExecutionPlan {
    /// `tables[k]` is applied after block `k`; `None` disables mitigation.
    pub fn new(
        bench: GhzBenchmark,
        tables: Option<Vec<PecTable>>,
        exec_faults: Vec<BlockFaults>,
        model: SyndromeModel,
        extraction_noise: &NoiseSpec,
    ) -> Result<Self> {
        model.validate()?;
        let nb = bench.circuit.num_blocks();
        if exec_faults.len() != nb {
            return Err(invalid(format!("{} fault lists for {nb} blocks", exec_faults.len())));
        }
        if let Some(t) = &tables {
            if t.len() != nb {
                return Err(invalid(format!("{} tables for {nb} blocks", t.len())));
            }
        }
        let n = bench.n;
        let s = bench.code.num_generators();
        let mut blocks = Vec::with_capacity(nb);
        for (k, located) in exec_faults.into_iter().enumerate() {
            let props = propagate_faults(&bench.circuit, k, &located, &bench.code)?;
            let p_accept = trivial_syndrome_probability(props.iter().map(|f| (f.mask, f.weight)), s);
            let faults = FaultSet::new(
                props.iter().map(|f| f.pauli.clone()).collect(),
                props.iter().map(|f| f.mask.0).collect(),
                props.iter().map(|f| f.weight).collect(),
            );
            let table = match &tables {
                Some(t) => t[k].clone(),
                None => PecTable::identity(n, k, p_accept),
            };
            for e in &table.entries {
                if e.pauli.n_qubits() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: e.pauli.n_qubits(),
                    });
                }
                if !bench.code.syndrome_unchecked(&e.pauli).is_trivial() {
                    return Err(invalid(format!("table entry {} is detectable", e.pauli)));
                }
            }
            blocks.push(ExecBlock {
                layers: bench.circuit.block_range(k)?,
                faults,
                located,
                sampler: TableSampler::new(&table),
                table,
                p_accept,
            });
        }
        let extraction = match model {
            SyndromeModel::CatExtraction { m_ancilla } => Some(ExtractionRound::new(&bench.code, m_ancilla, extraction_noise)?),
            _ => None,
        };
        let gamma_total = blocks.iter().map(|b| b.table.gamma).product();
        Ok(ExecutionPlan {
            bench,
            blocks,
            model,
            extraction,
            pec: tables.is_some(),
            gamma_total,
        })
    }

    /// Builds the benchmark, compiles the tables from nominal weights and
    /// prepares (possibly drifted) execution faults.
    pub fn for_protocol(spec: &ProtocolSpec) -> Result<(Self, Vec<CompiledBlock>)> {
        spec.model.validate()?;
        let bench = build_ghz_logical_circuit(spec.n, spec.t)?;
        let nb = bench.circuit.num_blocks();
        let limit = spec.compile.max_block_weight;
        let nominal = (0..nb)
            .map(|k| block_faults_with_limit(&bench.circuit, k, &spec.noise, limit))
            .collect::<Result<Vec<_>>>()?;
        let extension = match (spec.extraction_first_order, spec.model) {
            (true, SyndromeModel::CatExtraction { m_ancilla }) => {
                Some(extraction_single_faults(&bench, m_ancilla, &spec.noise)?)
            }
            (true, _) => return Err(invalid("the extraction extension needs the cat syndrome model")),
            _ => None,
        };
        let compiled = {
            use rayon::prelude::*;
            nominal
                .par_iter()
                .enumerate()
                .map(|(k, f)| {
                    let mut props = propagate_faults(&bench.circuit, k, f, &bench.code)?;
                    if let Some(ext) = &extension {
                        props.extend(ext.iter().cloned());
                    }
                    compile_propagated(k, &props, spec.n, &spec.compile)
                })
                .collect::<Result<Vec<_>>>()?
        };
        let exec = if spec.r_max > 0.0 {
            nominal
                .iter()
                .enumerate()
                .map(|(k, f)| perturb_weights(f, spec.r_max, derive_seed(spec.drift_seed, k as u64)))
                .collect::<Result<Vec<_>>>()?
        } else {
            nominal
        };
        let tables = spec.pec.then(|| compiled.iter().map(|c| c.table.clone()).collect());
        let plan = ExecutionPlan::new(bench, tables, exec, spec.model, &spec.noise)?;
        Ok((plan, compiled))
    }

    pub fn n(&self) -> usize {
        self.bench.n
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Exact acceptance probability of the whole run with ideal rounds.
    pub fn p_accept_ideal(&self) -> f64 {
        self.blocks.iter().map(|b| b.p_accept).product()
    }

    #[inline]
    pub fn indicator(&self, frame: &PauliString) -> bool {
        commutes_with_all(frame, &self.bench.final_generators)
    }

    #[inline]
    pub fn syndrome(&self, frame: &PauliString) -> u64 {
        self.bench.code.syndrome_unchecked(frame).0
    }
}

/// Single extraction faults as extra first-order branches: the rejection
/// mask combines the reported flips (low bits) with the syndrome of the data
/// residual (high bits), so only faults that are silent now and later pass.
fn extraction_single_faults(bench: &GhzBenchmark, m: usize, spec: &NoiseSpec) -> Result<Vec<PropagatedFault>> {
    let round = ExtractionRound::new(&bench.code, m, spec)?;
    let s = bench.code.num_generators();
    let f = &round.faults;
    Ok((0..f.len())
        .map(|i| {
            let later = bench.code.syndrome_unchecked(&f.paulis[i]).0;
            PropagatedFault {
                id: usize::MAX - i,
                pauli: f.paulis[i].clone(),
                weight: f.weights[i],
                mask: Syndrome(f.masks[i] | (later << s)),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_basics() {
        let (plan, compiled) = ExecutionPlan::for_protocol(&ProtocolSpec::ideal(10, 2)).unwrap();
        assert_eq!(plan.num_blocks(), 4);
        assert_eq!(compiled.len(), 4);
        let g: f64 = compiled.iter().map(|c| c.gamma()).product();
        assert!((plan.gamma_total - g).abs() < 1e-15);
        for b in &plan.blocks {
            assert!(b.p_accept < 1.0 && b.p_accept > 0.9);
            // exact acceptance exceeds the first-order value by O(W^2)
            assert!(b.p_accept >= b.table.p_success - 1e-15);
        }
    }

    #[test]
    fn seeds_differ() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
        assert_eq!(derive_seed(5, 7), derive_seed(5, 7));
    }

    #[test]
    fn drift_keeps_tables_nominal() {
        let mut spec = ProtocolSpec::ideal(8, 1);
        let (p0, _) = ExecutionPlan::for_protocol(&spec).unwrap();
        spec.r_max = 0.3;
        spec.drift_seed = 11;
        let (p1, _) = ExecutionPlan::for_protocol(&spec).unwrap();
        assert_eq!(p0.blocks[0].table, p1.blocks[0].table);
        assert_ne!(p0.blocks[0].faults.weights, p1.blocks[0].faults.weights);
    }
}
