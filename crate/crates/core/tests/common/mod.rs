//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use qedpec::clifford::{Gate, GateLayer, LayeredCircuit};
use qedpec::noise::{BlockFaults, FaultLocation};
use qedpec::{Pauli, PauliString};

/// A small random block: a few layers of random Clifford gates and at most
/// `max_faults` Pauli faults at random layers.
pub struct RandomBlock {
    pub circuit: LayeredCircuit,
    pub faults: BlockFaults,
}

pub fn random_pauli<R: Rng>(rng: &mut R, n: usize) -> PauliString {
    loop {
        let mut p = PauliString::identity(n);
        let support = rng.gen_range(1..=n.min(3));
        let mut qs: Vec<usize> = (0..n).collect();
        qs.shuffle(rng);
        for &q in &qs[..support] {
            let s = [Pauli::X, Pauli::Y, Pauli::Z][rng.gen_range(0..3)];
            p.set(q, s);
        }
        if !p.is_identity() {
            return p;
        }
    }
}

pub fn random_layer<R: Rng>(rng: &mut R, n: usize) -> GateLayer {
    let mut qs: Vec<usize> = (0..n).collect();
    qs.shuffle(rng);
    let mut gates = Vec::new();
    let mut i = 0;
    while i < n {
        match rng.gen_range(0..5) {
            0 if i + 1 < n => {
                gates.push(Gate::cnot(qs[i], qs[i + 1]));
                i += 2;
            }
            1 if i + 1 < n => {
                gates.push(Gate::Cz(qs[i], qs[i + 1]));
                i += 2;
            }
            2 => {
                gates.push(Gate::H(qs[i]));
                i += 1;
            }
            3 => {
                gates.push(Gate::S(qs[i]));
                i += 1;
            }
            _ => i += 1,
        }
    }
    GateLayer::new(gates, n).unwrap()
}

pub fn random_block<R: Rng>(rng: &mut R, max_faults: usize) -> RandomBlock {
    let n = [4, 6, 8][rng.gen_range(0..3)];
    let depth = rng.gen_range(1..=3);
    let layers: Vec<GateLayer> = (0..depth).map(|_| random_layer(rng, n)).collect();
    let circuit = LayeredCircuit::single_block(n, layers).unwrap();
    let m = rng.gen_range(1..=max_faults);
    let faults = (0..m)
        .map(|id| FaultLocation {
            id,
            layer: rng.gen_range(0..depth),
            pauli: random_pauli(rng, n),
            weight: rng.gen_range(1e-4..0.035),
        })
        .collect();
    RandomBlock {
        circuit,
        faults: BlockFaults { block: 0, faults },
    }
}

/// Polynomial in a formal weight scale `t`, lowest degree first.
pub type Poly = Vec<f64>;

/// Exact accepted expansion with every weight replaced by `w t`:
/// for each accepted Pauli, the polynomial
/// `sum_I prod_{i in I} w_i t prod_{j not in I} (1 - w_j t)`,
/// plus the acceptance polynomial. Faults are pushed through the circuit
/// one gate at a time and acceptance is read off the parities of X and Z.
pub struct ExactExpansion {
    pub accepted: BTreeMap<PauliString, Poly>,
    pub p_success: Poly,
    pub m: usize,
}

pub fn iceberg_trivial(p: &PauliString) -> bool {
    let n = p.n_qubits();
    let xs = (0..n).filter(|&q| p.x_bit(q)).count();
    let zs = (0..n).filter(|&q| p.z_bit(q)).count();
    xs % 2 == 0 && zs % 2 == 0
}

fn push_through(circuit: &LayeredCircuit, p: &PauliString, from: usize) -> PauliString {
    let mut out = p.clone();
    for layer in &circuit.layers()[from..] {
        for g in layer.gates() {
            g.conjugate(&mut out);
        }
    }
    out
}

fn mul(a: &PauliString, b: &PauliString) -> PauliString {
    let n = a.n_qubits();
    let mut out = PauliString::identity(n);
    for q in 0..n {
        out.set_x_bit(q, a.x_bit(q) ^ b.x_bit(q));
        out.set_z_bit(q, a.z_bit(q) ^ b.z_bit(q));
    }
    out
}

pub fn exact_expansion(block: &RandomBlock) -> ExactExpansion {
    let n = block.circuit.width();
    let ends: Vec<(PauliString, f64)> = block
        .faults
        .faults
        .iter()
        .map(|f| (push_through(&block.circuit, &f.pauli, f.layer), f.weight))
        .collect();
    let m = ends.len();
    let mut accepted: BTreeMap<PauliString, Poly> = BTreeMap::new();
    for subset in 0u32..(1 << m) {
        let mut poly = vec![0.0; m + 1];
        poly[0] = 1.0;
        let mut pauli = PauliString::identity(n);
        for (i, (p, w)) in ends.iter().enumerate() {
            // multiply by (w t) or (1 - w t)
            let mut next = vec![0.0; m + 1];
            if subset >> i & 1 == 1 {
                pauli = mul(&pauli, p);
                for d in 0..m {
                    next[d + 1] += w * poly[d];
                }
            } else {
                for d in 0..=m {
                    next[d] += poly[d];
                    if d < m {
                        next[d + 1] -= w * poly[d];
                    }
                }
            }
            poly = next;
        }
        if iceberg_trivial(&pauli) {
            let acc = accepted.entry(pauli).or_insert_with(|| vec![0.0; m + 1]);
            for d in 0..=m {
                acc[d] += poly[d];
            }
        }
    }
    let mut p_success = vec![0.0; m + 1];
    for poly in accepted.values() {
        for d in 0..=m {
            p_success[d] += poly[d];
        }
    }
    ExactExpansion { accepted, p_success, m }
}

/// First `order + 1` coefficients of `a / b` with `b[0] = 1`.
pub fn series_divide(a: &[f64], b: &[f64], order: usize) -> Poly {
    let mut q = vec![0.0; order + 1];
    for d in 0..=order {
        let mut v = a.get(d).copied().unwrap_or(0.0);
        for j in 1..=d {
            v -= b.get(j).copied().unwrap_or(0.0) * q[d - j];
        }
        q[d] = v / b[0];
    }
    q
}

pub fn eval(p: &[f64]) -> f64 {
    p.iter().sum()
}

/// Least-squares slope of `y` against `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Worst deviations between the compiled series-normalised channel of a
/// random block and the exact expansion truncated at the same order.
pub struct OracleComparison {
    pub m: usize,
    pub order: usize,
    pub channel_err: f64,
    pub p_success_err: f64,
    pub eta: f64,
    pub gap: f64,
}

pub fn compare_with_oracle(seed: u64) -> OracleComparison {
    use qedpec::code::StabilizerCode;
    use qedpec::compiler::certify::eta_bruteforce;
    use qedpec::compiler::{propagate_faults, reduced_channel, Normalization};
    use rand::SeedableRng;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let block = random_block(&mut rng, 12);
    let order = 1 + (seed % 3) as usize;
    let n = block.circuit.width();
    let code = StabilizerCode::iceberg(n).unwrap();
    let props = propagate_faults(&block.circuit, 0, &block.faults, &code).unwrap();
    let reduced = reduced_channel(&props, n, order, Normalization::Series).unwrap();
    let exact = exact_expansion(&block);

    let mut p_success_err = 0.0f64;
    for d in 0..=order {
        let want = exact.p_success.get(d).copied().unwrap_or(0.0);
        p_success_err = p_success_err.max((reduced.p_success.coeff(d) - want).abs());
    }
    let mut channel_err = 0.0f64;
    for (p, poly) in &exact.accepted {
        let want = series_divide(poly, &exact.p_success, order);
        for (d, w) in want.iter().enumerate() {
            let got = reduced.channel.get(p).map(|s| s.coeff(d)).unwrap_or(0.0);
            channel_err = channel_err.max((got - w).abs());
        }
    }
    for (p, s) in reduced.channel.iter() {
        if !exact.accepted.contains_key(p) {
            for c in s.coeffs() {
                channel_err = channel_err.max(c.abs());
            }
        }
    }

    let p_exact = eval(&exact.p_success);
    let mut gap = 0.0;
    for (p, poly) in &exact.accepted {
        gap += (eval(poly) / p_exact - reduced.channel.coefficient(p)).abs();
    }
    for (p, s) in reduced.channel.iter() {
        if !exact.accepted.contains_key(p) {
            gap += s.eval().abs();
        }
    }
    let eta = eta_bruteforce(&props, &reduced).unwrap().eta;
    OracleComparison {
        m: exact.m,
        order,
        channel_err,
        p_success_err,
        eta,
        gap,
    }
}
