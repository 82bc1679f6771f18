//! Numerical certificates for compiled blocks.
//!
//! `zeta` measures how far the truncated inverse is from inverting the
//! truncated channel; `eta` compares the truncated channel with the exact
//! normalised accepted channel (brute force, small blocks only).

use serde::{Deserialize, Serialize};

use super::channel::{ChannelPoly, StableMap};
use super::{CompiledBlock, PropagatedFault, ReducedChannel};
use crate::error::{Error, Result};
use crate::pauli::PauliString;

pub const DEFAULT_RESIDUE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaCertificate {
    /// `|| N^{-1} o N - id ||_1` evaluated at the block weights.
    pub zeta: f64,
    /// Largest coefficient of degree `<= K` in `N^{-1} o N - id`.
    pub max_low_degree_residue: f64,
}

/// Checks the formal identity `N^{-1} o N = id + O(w^{K+1})` and returns
/// `zeta`. Errors with `Compilation` if a low-degree coefficient exceeds `tol`.
pub fn zeta_certificate(
    inverse: &ChannelPoly,
    reduced: &ChannelPoly,
    order: usize,
    tol: f64,
    max_pairs: usize,
) -> Result<ZetaCertificate> {
    let b = inverse.compose_full(reduced, max_pairs)?.minus_identity();
    let mut max_low = 0.0f64;
    let mut zeta = 0.0;
    for (_, s) in b.sorted_terms() {
        for d in 0..=order.min(s.order()) {
            max_low = max_low.max(s.coeff(d).abs());
        }
        zeta += s.eval().abs();
    }
    if max_low > tol {
        return Err(Error::Compilation(format!(
            "formal inverse residue {max_low:.3e} exceeds {tol:.1e}"
        )));
    }
    Ok(ZetaCertificate {
        zeta,
        max_low_degree_residue: max_low,
    })
}

/// Exact accepted channel of a small block by enumerating all `2^m` fault
/// subsets: returns the unnormalised accepted coefficients and the exact
/// acceptance probability.
pub fn exact_accepted_channel(props: &[PropagatedFault], n: usize) -> Result<(Vec<(PauliString, f64)>, f64)> {
    let m = props.len();
    if m > 20 {
        return Err(Error::SizeLimit(format!("brute force over 2^{m} subsets")));
    }
    let mut acc: StableMap<PauliString, f64> = StableMap::default();
    fn rec(
        props: &[PropagatedFault],
        i: usize,
        prob: f64,
        pauli: &mut PauliString,
        mask: u64,
        acc: &mut StableMap<PauliString, f64>,
    ) {
        if i == props.len() {
            if mask == 0 {
                *acc.entry(pauli.clone()).or_insert(0.0) += prob;
            }
            return;
        }
        let f = &props[i];
        rec(props, i + 1, prob * (1.0 - f.weight), pauli, mask, acc);
        pauli.mul_assign_unchecked(&f.pauli);
        rec(props, i + 1, prob * f.weight, pauli, mask ^ f.mask.0, acc);
        pauli.mul_assign_unchecked(&f.pauli);
    }
    let mut p = PauliString::identity(n);
    rec(props, 0, 1.0, &mut p, 0, &mut acc);
    let mut v: Vec<(PauliString, f64)> = acc.into_iter().collect();
    v.sort_by(|a, b| (!a.0.is_identity(), &a.0).cmp(&(!b.0.is_identity(), &b.0)));
    let p_exact = v.iter().map(|(_, c)| c).sum();
    Ok((v, p_exact))
}

#[derive(Clone, Debug)]
pub struct EtaCertificate {
    /// `|| N_exact - (id + R) ||_1`.
    pub eta: f64,
    pub p_exact: f64,
    /// Normalised exact accepted channel.
    pub exact: Vec<(PauliString, f64)>,
}

pub fn eta_bruteforce(props: &[PropagatedFault], reduced: &ReducedChannel) -> Result<EtaCertificate> {
    let n = reduced.channel.n();
    let (raw, p_exact) = exact_accepted_channel(props, n)?;
    let exact: Vec<(PauliString, f64)> = raw.into_iter().map(|(p, c)| (p, c / p_exact)).collect();
    let mut diff: StableMap<PauliString, f64> = StableMap::default();
    for (p, c) in &exact {
        *diff.entry(p.clone()).or_insert(0.0) += c;
    }
    for (p, c) in reduced.channel.evaluate() {
        *diff.entry(p).or_insert(0.0) -= c;
    }
    let mut keys: Vec<_> = diff.into_iter().collect();
    keys.sort_by(|a, b| a.0.cmp(&b.0));
    let eta = keys.iter().map(|(_, d)| d.abs()).sum();
    Ok(EtaCertificate { eta, p_exact, exact })
}

/// `|| A o B - id ||_1` for channels given by numeric coefficients.
pub fn compose_l1_minus_identity(a: &[(PauliString, f64)], b: &[(PauliString, f64)]) -> f64 {
    let mut out: StableMap<PauliString, f64> = StableMap::default();
    for (p, x) in a {
        for (q, y) in b {
            let mut k = p.clone();
            k.mul_assign_unchecked(q);
            *out.entry(k).or_insert(0.0) += x * y;
        }
    }
    let mut v: Vec<_> = out.into_iter().collect();
    v.sort_by(|x, y| x.0.cmp(&y.0));
    v.iter()
        .map(|(p, c)| if p.is_identity() { (c - 1.0).abs() } else { c.abs() })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificates {
    pub block: usize,
    pub num_faults: usize,
    pub total_weight: f64,
    pub gamma: f64,
    pub p_success: f64,
    pub zeta: Option<f64>,
    pub max_low_degree_residue: Option<f64>,
    pub eta: Option<f64>,
    /// `zeta + gamma * eta` when both are known.
    pub epsilon: Option<f64>,
    /// Analytic scale `W^{K+1}` of the truncation error.
    pub w_scale: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct CertifyOptions {
    pub tol: f64,
    pub bruteforce_max_faults: usize,
    pub max_pairs: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            tol: DEFAULT_RESIDUE_TOL,
            bruteforce_max_faults: 20,
            max_pairs: 20_000_000,
        }
    }
}

/// Certificates for one compiled block. `zeta` is skipped (None) when the
/// composition is too large; `eta` only for blocks with few faults.
pub fn certify_block(block: &CompiledBlock, props: &[PropagatedFault], opts: &CertifyOptions) -> Result<Certificates> {
    let order = block.reduced.channel.order();
    let zeta = match zeta_certificate(&block.inverse, &block.reduced.channel, order, opts.tol, opts.max_pairs) {
        Ok(z) => Some(z),
        Err(Error::SizeLimit(_)) => None,
        Err(e) => return Err(e),
    };
    let eta = if props.len() <= opts.bruteforce_max_faults {
        Some(eta_bruteforce(props, &block.reduced)?.eta)
    } else {
        None
    };
    let gamma = block.table.gamma;
    let epsilon = match (zeta, eta) {
        (Some(z), Some(e)) => Some(z.zeta + gamma * e),
        _ => None,
    };
    Ok(Certificates {
        block: block.block,
        num_faults: block.num_faults,
        total_weight: block.total_weight,
        gamma,
        p_success: block.table.p_success,
        zeta: zeta.map(|z| z.zeta),
        max_low_degree_residue: zeta.map(|z| z.max_low_degree_residue),
        eta,
        epsilon,
        w_scale: block.total_weight.powi(order as i32 + 1),
    })
}

/// `prod_k (1 + eps_k) - 1`.
pub fn end_to_end_bound(eps: &[f64]) -> f64 {
    eps.iter().fold(1.0, |acc, e| acc * (1.0 + e)) - 1.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::build_ghz_logical_circuit;
    use crate::compiler::{compile_propagated, propagate_faults, CompileOptions, Normalization};
    use crate::noise::{block_faults, NoiseSpec};

    #[test]
    fn certificates_on_small_block() {
        let b = build_ghz_logical_circuit(4, 1).unwrap();
        // keep only the first 16 faults so brute force stays cheap
        let mut f = block_faults(&b.circuit, 0, &NoiseSpec::new(1e-3, 1e-2).unwrap()).unwrap();
        f.faults.truncate(16);
        let props = propagate_faults(&b.circuit, 0, &f, &b.code).unwrap();
        for normalization in [Normalization::Series, Normalization::Rescaled] {
            for order in 1..=3 {
                let opts = CompileOptions {
                    order,
                    normalization,
                    ..Default::default()
                };
                let blk = compile_propagated(0, &props, 4, &opts).unwrap();
                let c = certify_block(&blk, &props, &CertifyOptions::default()).unwrap();
                assert!(c.max_low_degree_residue.unwrap() < 1e-12);
                let eta = c.eta.unwrap();
                assert!(eta < 10.0 * c.w_scale, "order {order}: eta {eta} vs W^(K+1) {}", c.w_scale);
                // inverse applied to the exact channel stays within the bound
                let exact = eta_bruteforce(&props, &blk.reduced).unwrap().exact;
                let gap = compose_l1_minus_identity(&blk.inverse.evaluate(), &exact);
                assert!(gap <= c.epsilon.unwrap() + 1e-14);
            }
        }
    }

    #[test]
    fn bound_composition() {
        assert!((end_to_end_bound(&[0.1, 0.2]) - 0.32).abs() < 1e-15);
        assert_eq!(end_to_end_bound(&[]), 0.0);
    }
}
