//! Order-K compilation of per-block quasi-probability tables.
//!
//! For one block the accepted part of the fault expansion is collected by
//! total degree, normalised by the acceptance probability, inverted with a
//! truncated Neumann series and turned into a sampling table.

pub mod certify;
pub mod channel;
pub mod series;
pub mod table;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::{GhzBenchmark, LayeredCircuit};
use crate::code::{StabilizerCode, Syndrome};
use crate::error::{invalid, Error, Result};
use crate::noise::{block_faults_with_limit, BlockFaults, NoiseSpec, DEFAULT_MAX_BLOCK_WEIGHT};
use crate::pauli::PauliString;

pub use channel::ChannelPoly;
pub use series::DegreeSeries;
pub use table::{to_sampling_table, PecEntry, PecTable, TableSampler};

/// How the accepted expansion is divided by the acceptance probability.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Formal series division, truncated at order K.
    Series,
    /// Numeric division by the evaluated order-K acceptance probability;
    /// at K = 1 this gives the rescaled weights `w / p`.
    #[default]
    Rescaled,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompileOptions {
    pub order: usize,
    pub normalization: Normalization,
    /// Table entries with `|c| < prune_relative * sum|c|` are dropped.
    pub prune_relative: f64,
    pub max_block_weight: f64,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            order: 1,
            normalization: Normalization::Rescaled,
            prune_relative: 1e-15,
            max_block_weight: DEFAULT_MAX_BLOCK_WEIGHT,
        }
    }
}

impl CompileOptions {
    pub fn with_order(order: usize) -> Self {
        CompileOptions {
            order,
            ..Default::default()
        }
    }
}

/// A fault location conjugated to the end of its block.
#[derive(Clone, Debug, PartialEq)]
pub struct PropagatedFault {
    pub id: usize,
    pub pauli: PauliString,
    pub weight: f64,
    /// Rejection mask; a set of faults is accepted iff the XOR of masks is 0.
    pub mask: Syndrome,
}

/// Conjugates every fault of `faults` to the end of `block`.
///
/// Works backwards through the block keeping the images of all single-qubit
/// X and Z under the remaining layers, so each fault costs a few XORs.
pub fn propagate_faults(
    circuit: &LayeredCircuit,
    block: usize,
    faults: &BlockFaults,
    code: &StabilizerCode,
) -> Result<Vec<PropagatedFault>> {
    let range = circuit.block_range(block)?;
    let n = circuit.width();
    if code.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: code.n(),
        });
    }
    for f in &faults.faults {
        if !range.contains(&f.layer) {
            return Err(invalid(format!("fault {} at layer {} lies outside block {block}", f.id, f.layer)));
        }
        if f.pauli.n_qubits() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: f.pauli.n_qubits(),
            });
        }
    }
    // images[2q] = U X_q U^dag, images[2q + 1] = U Z_q U^dag for the layers
    // after the current one
    let mut images: Vec<PauliString> = (0..2 * n)
        .map(|i| {
            let mut p = PauliString::identity(n);
            if i % 2 == 0 {
                p.set_x_bit(i / 2, true);
            } else {
                p.set_z_bit(i / 2, true);
            }
            p
        })
        .collect();
    let mut order: Vec<usize> = (0..faults.faults.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(faults.faults[i].layer));
    let mut out: Vec<Option<PropagatedFault>> = vec![None; faults.faults.len()];
    let mut current = range.end;
    let mut idx = 0;
    while current > range.start {
        let layer = current - 1;
        // fold layer `layer` into the images
        let mut updates = Vec::new();
        for g in circuit.layers()[layer].gates() {
            for q in g.qubits() {
                for (slot, is_x) in [(2 * q, true), (2 * q + 1, false)] {
                    let mut b = PauliString::identity(n);
                    if is_x {
                        b.set_x_bit(q, true);
                    } else {
                        b.set_z_bit(q, true);
                    }
                    g.conjugate(&mut b);
                    let mut img = PauliString::identity(n);
                    for r in g.qubits() {
                        if b.x_bit(r) {
                            img.mul_assign_unchecked(&images[2 * r]);
                        }
                        if b.z_bit(r) {
                            img.mul_assign_unchecked(&images[2 * r + 1]);
                        }
                    }
                    updates.push((slot, img));
                }
            }
        }
        for (slot, img) in updates {
            images[slot] = img;
        }
        while idx < order.len() && faults.faults[order[idx]].layer == layer {
            let f = &faults.faults[order[idx]];
            let mut p = PauliString::identity(n);
            for (w, (&xw, &zw)) in f.pauli.x_words().iter().zip(f.pauli.z_words()).enumerate() {
                let mut bits = xw | zw;
                while bits != 0 {
                    let q = w * 64 + bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    if f.pauli.x_bit(q) {
                        p.mul_assign_unchecked(&images[2 * q]);
                    }
                    if f.pauli.z_bit(q) {
                        p.mul_assign_unchecked(&images[2 * q + 1]);
                    }
                }
            }
            let mask = code.syndrome_unchecked(&p);
            out[order[idx]] = Some(PropagatedFault {
                id: f.id,
                pauli: p,
                weight: f.weight,
                mask,
            });
            idx += 1;
        }
        current = layer;
    }
    Ok(out.into_iter().map(|f| f.expect("every fault lies in the block")).collect())
}

/// Elementary symmetric sums `e_0..=e_k` of `weights`.
pub fn elementary_symmetric(weights: impl IntoIterator<Item = f64>, k: usize) -> Vec<f64> {
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for w in weights {
        for l in (1..=k).rev() {
            e[l] += w * e[l - 1];
        }
    }
    e
}

/// `e_l(S \ {w})` from `e_l(S)`.
fn remove_weight(e: &[f64], w: f64) -> Vec<f64> {
    let mut out = vec![0.0; e.len()];
    out[0] = 1.0;
    for l in 1..e.len() {
        out[l] = e[l] - w * out[l - 1];
    }
    out
}

/// Degree series of `prod_{i in I} w_i prod_{j not in I} (1 - w_j)` through
/// `order`, given `e_all` = elementary symmetric sums of all weights.
pub fn branch_series(e_all: &[f64], members: &[f64], order: usize) -> DegreeSeries {
    let r = members.len();
    if r > order {
        return DegreeSeries::zero(order);
    }
    let mut e = e_all[..=order - r].to_vec();
    for &w in members {
        e = remove_weight(&e, w);
    }
    let w_i: f64 = members.iter().product();
    let mut c = vec![0.0; order + 1];
    for d in r..=order {
        let sgn = if (d - r) % 2 == 0 { 1.0 } else { -1.0 };
        c[d] = w_i * sgn * e[d - r];
    }
    DegreeSeries::from_coeffs(c)
}

/// Coefficient series of branch `ids` (indices into `faults.faults`).
pub fn branch_coefficient(ids: &[usize], faults: &BlockFaults, order: usize) -> Result<DegreeSeries> {
    let mut seen = std::collections::HashSet::new();
    for &i in ids {
        if i >= faults.faults.len() || !seen.insert(i) {
            return Err(invalid(format!("bad fault subset {ids:?}")));
        }
    }
    let e = elementary_symmetric(faults.faults.iter().map(|f| f.weight), order);
    let members: Vec<f64> = ids.iter().map(|&i| faults.faults[i].weight).collect();
    Ok(branch_series(&e, &members, order))
}

/// Number of fault subsets of size `<= order` among `m` faults.
pub fn branch_count(m: usize, order: usize) -> u128 {
    let mut total = 0u128;
    let mut c = 1u128;
    for r in 0..=order.min(m) {
        total += c;
        c = c * (m - r) as u128 / (r + 1) as u128;
    }
    total
}

#[derive(Clone, Debug)]
pub struct Branch {
    pub fault_ids: Vec<usize>,
    pub propagated: PauliString,
    pub coefficient: DegreeSeries,
    pub accepted: bool,
}

/// Calls `visit(ids, mask)` for every subset of at most `order` faults, in
/// lexicographic order of the index sets.
fn for_each_subset(masks: &[Syndrome], order: usize, mut visit: impl FnMut(&[usize], Syndrome)) {
    fn rec(
        masks: &[Syndrome],
        order: usize,
        start: usize,
        ids: &mut Vec<usize>,
        mask: Syndrome,
        visit: &mut dyn FnMut(&[usize], Syndrome),
    ) {
        visit(ids, mask);
        if ids.len() == order {
            return;
        }
        for i in start..masks.len() {
            ids.push(i);
            rec(masks, order, i + 1, ids, mask ^ masks[i], visit);
            ids.pop();
        }
    }
    let mut ids = Vec::with_capacity(order);
    rec(masks, order, 0, &mut ids, Syndrome::TRIVIAL, &mut visit);
}

fn product_of(props: &[PropagatedFault], ids: &[usize], n: usize) -> PauliString {
    let mut p = PauliString::identity(n);
    for &i in ids {
        p.mul_assign_unchecked(&props[i].pauli);
    }
    p
}

/// Every fault subset of size `<= order` with its propagated product,
/// coefficient series and acceptance flag. Memory grows like `m^order`;
/// the compiler itself streams over accepted branches instead.
pub fn enumerate_branches(
    faults: &BlockFaults,
    circuit: &LayeredCircuit,
    block: usize,
    code: &StabilizerCode,
    order: usize,
) -> Result<Vec<Branch>> {
    let props = propagate_faults(circuit, block, faults, code)?;
    let count = branch_count(props.len(), order);
    if count > 50_000_000 {
        return Err(Error::SizeLimit(format!("{count} branches")));
    }
    let e = elementary_symmetric(props.iter().map(|f| f.weight), order);
    let masks: Vec<Syndrome> = props.iter().map(|f| f.mask).collect();
    let n = circuit.width();
    let mut out = Vec::with_capacity(count as usize);
    for_each_subset(&masks, order, |ids, mask| {
        let members: Vec<f64> = ids.iter().map(|&i| props[i].weight).collect();
        out.push(Branch {
            fault_ids: ids.iter().map(|&i| props[i].id).collect(),
            propagated: product_of(&props, ids, n),
            coefficient: branch_series(&e, &members, order),
            accepted: mask.is_trivial(),
        });
    });
    Ok(out)
}

/// Accepted, normalised order-K channel `id + R`.
#[derive(Clone, Debug)]
pub struct ReducedChannel {
    pub channel: ChannelPoly,
    /// Order-K acceptance probability as a series (constant term 1).
    pub p_success: DegreeSeries,
    pub normalization: Normalization,
    pub branches_visited: u128,
    pub branches_accepted: u128,
}

impl ReducedChannel {
    pub fn p_success_value(&self) -> f64 {
        self.p_success.eval()
    }

    /// `R = channel - id`.
    pub fn r(&self) -> ChannelPoly {
        self.channel.minus_identity()
    }
}

/// Unnormalised accepted expansion `sum_{I accepted, |I| <= K} a_I P_I`.
pub fn accepted_expansion(props: &[PropagatedFault], n: usize, order: usize) -> Result<(ChannelPoly, u128, u128)> {
    for f in props {
        if f.pauli.n_qubits() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: f.pauli.n_qubits(),
            });
        }
    }
    let e = elementary_symmetric(props.iter().map(|f| f.weight), order);
    let masks: Vec<Syndrome> = props.iter().map(|f| f.mask).collect();
    let mut acc = ChannelPoly::zero(n, order);
    let mut visited = 0u128;
    let mut accepted = 0u128;
    let mut members = Vec::with_capacity(order);
    for_each_subset(&masks, order, |ids, mask| {
        visited += 1;
        if !mask.is_trivial() {
            return;
        }
        accepted += 1;
        members.clear();
        members.extend(ids.iter().map(|&i| props[i].weight));
        let s = branch_series(&e, &members, order);
        let key = product_of(props, ids, n);
        acc.entry_mut(&key).add_assign(&s);
    });
    Ok((acc, visited, accepted))
}

/// Builds the normalised reduced channel of a block from its propagated faults.
pub fn reduced_channel(
    props: &[PropagatedFault],
    n: usize,
    order: usize,
    normalization: Normalization,
) -> Result<ReducedChannel> {
    let (acc, visited, accepted) = accepted_expansion(props, n, order)?;
    let mut p_success = DegreeSeries::zero(order);
    for (_, s) in acc.sorted_terms() {
        p_success.add_assign(s);
    }
    let id = PauliString::identity(n);
    let channel = match normalization {
        Normalization::Series => {
            let recip = p_success.reciprocal()?;
            let mut ch = ChannelPoly::zero(n, order);
            for (p, s) in acc.sorted_terms() {
                ch.add_term_unchecked(p, &s.mul_truncated(&recip, order));
            }
            ch
        }
        Normalization::Rescaled => {
            let p = p_success.eval();
            if !(p > 0.0) {
                return Err(Error::Compilation(format!("order-{order} acceptance probability {p} is not positive")));
            }
            let mut ch = ChannelPoly::identity(n, order);
            for (q, s) in acc.sorted_terms() {
                if q.is_identity() {
                    continue;
                }
                let scaled = s.scaled(1.0 / p);
                ch.add_term_unchecked(q, &scaled);
                ch.entry_mut(&id).add_scaled(&scaled, -1.0);
            }
            ch
        }
    };
    Ok(ReducedChannel {
        channel,
        p_success,
        normalization,
        branches_visited: visited,
        branches_accepted: accepted,
    })
}

/// `sum_{r <= K} (-R)^r`, truncated at degree K.
pub fn neumann_invert(reduced: &ChannelPoly, order: usize) -> Result<ChannelPoly> {
    let r = reduced.minus_identity();
    let mut inv = ChannelPoly::identity(reduced.n(), order);
    let mut term = ChannelPoly::identity(reduced.n(), order);
    for k in 1..=order {
        term = term.compose_truncated(&r, order)?;
        let sgn = if k % 2 == 0 { 1.0 } else { -1.0 };
        inv.add_assign(&term.scaled(sgn));
    }
    inv.prune_zero();
    Ok(inv)
}

#[derive(Clone, Debug)]
pub struct CompiledBlock {
    pub block: usize,
    pub num_faults: usize,
    pub total_weight: f64,
    pub reduced: ReducedChannel,
    pub inverse: ChannelPoly,
    pub table: PecTable,
}

impl CompiledBlock {
    pub fn gamma(&self) -> f64 {
        self.table.gamma
    }

    pub fn p_success(&self) -> f64 {
        self.table.p_success
    }
}

/// Compiles one block from already propagated faults.
pub fn compile_propagated(
    block: usize,
    props: &[PropagatedFault],
    n: usize,
    options: &CompileOptions,
) -> Result<CompiledBlock> {
    if options.order == 0 {
        return Err(invalid("order K must be at least 1"));
    }
    let total_weight: f64 = props.iter().map(|f| f.weight).sum();
    if total_weight >= options.max_block_weight {
        return Err(Error::Validity {
            block,
            weight: total_weight,
            limit: options.max_block_weight,
        });
    }
    let reduced = reduced_channel(props, n, options.order, options.normalization)?;
    let inverse = neumann_invert(&reduced.channel, options.order)?;
    let table = to_sampling_table(&inverse, block, reduced.p_success_value(), options.prune_relative)?;
    Ok(CompiledBlock {
        block,
        num_faults: props.len(),
        total_weight,
        reduced,
        inverse,
        table,
    })
}

/// Collects faults, propagates them and compiles one block.
pub fn compile_block(
    circuit: &LayeredCircuit,
    block: usize,
    code: &StabilizerCode,
    spec: &NoiseSpec,
    options: &CompileOptions,
) -> Result<CompiledBlock> {
    let faults = block_faults_with_limit(circuit, block, spec, options.max_block_weight)?;
    let props = propagate_faults(circuit, block, &faults, code)?;
    compile_propagated(block, &props, circuit.width(), options)
}

/// Compiles every block of a benchmark, in parallel over blocks.
pub fn compile_benchmark(bench: &GhzBenchmark, spec: &NoiseSpec, options: &CompileOptions) -> Result<Vec<CompiledBlock>> {
    (0..bench.circuit.num_blocks())
        .into_par_iter()
        .map(|b| compile_block(&bench.circuit, b, &bench.code, spec, options))
        .collect()
}
