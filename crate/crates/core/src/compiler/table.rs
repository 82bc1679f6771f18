//! Quasi-probability sampling tables.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::channel::ChannelPoly;
use crate::error::{Error, Result};
use crate::pauli::PauliString;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PecEntry {
    pub pauli: PauliString,
    pub prob: f64,
    pub sign: i8,
}

/// Table for one block: Pauli `P` is drawn with probability `prob` and the
/// shot weight is multiplied by `gamma * sign`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PecTable {
    pub block: usize,
    pub order: usize,
    pub gamma: f64,
    /// Order-K acceptance probability used for cost accounting.
    pub p_success: f64,
    pub entries: Vec<PecEntry>,
}

pub const TABLE_HEADER: &str = "# qedpec-table v1";

impl PecTable {
    /// Trivial table (no mitigation): identity with probability 1.
    pub fn identity(n: usize, block: usize, p_success: f64) -> Self {
        PecTable {
            block,
            order: 0,
            gamma: 1.0,
            p_success,
            entries: vec![PecEntry {
                pauli: PauliString::identity(n),
                prob: 1.0,
                sign: 1,
            }],
        }
    }

    /// Signed coefficient `gamma * sign * prob` of entry `i`.
    pub fn coefficient(&self, i: usize) -> f64 {
        let e = &self.entries[i];
        self.gamma * e.sign as f64 * e.prob
    }

    /// Cost contribution `gamma^2 / p_success`.
    pub fn cost(&self) -> f64 {
        self.gamma * self.gamma / self.p_success
    }

    pub fn identity_index(&self) -> Option<usize> {
        self.entries.iter().position(|e| e.pauli.is_identity())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{TABLE_HEADER}");
        let _ = writeln!(s, "block {}", self.block);
        let _ = writeln!(s, "order {}", self.order);
        let _ = writeln!(s, "gamma {:.16e}", self.gamma);
        let _ = writeln!(s, "p_success {:.16e}", self.p_success);
        let _ = writeln!(s, "entries {}", self.entries.len());
        for e in &self.entries {
            let sign = if e.sign < 0 { '-' } else { '+' };
            let _ = writeln!(s, "{} {:.16e} {sign}", e.pauli, e.prob);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let perr = |m: &str| Error::Parse(format!("table: {m}"));
        if lines.next() != Some(TABLE_HEADER) {
            return Err(perr("missing header"));
        }
        let mut field = |name: &str| -> Result<String> {
            let l = lines.next().ok_or_else(|| perr(&format!("missing {name}")))?;
            let (k, v) = l.split_once(' ').ok_or_else(|| perr(&format!("bad line {l:?}")))?;
            if k != name {
                return Err(perr(&format!("expected {name}, found {k}")));
            }
            Ok(v.trim().to_string())
        };
        let num = |v: String| -> Result<f64> { v.parse::<f64>().map_err(|e| perr(&e.to_string())) };
        let int = |v: String| -> Result<usize> { v.parse::<usize>().map_err(|e| perr(&e.to_string())) };
        let block = int(field("block")?)?;
        let order = int(field("order")?)?;
        let gamma = num(field("gamma")?)?;
        let p_success = num(field("p_success")?)?;
        let count = int(field("entries")?)?;
        let mut entries = Vec::with_capacity(count);
        for l in lines {
            let parts: Vec<&str> = l.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(perr(&format!("bad entry {l:?}")));
            }
            let sign = match parts[2] {
                "+" => 1,
                "-" => -1,
                s => return Err(perr(&format!("bad sign {s:?}"))),
            };
            entries.push(PecEntry {
                pauli: parts[0].parse()?,
                prob: parts[1].parse().map_err(|_| perr(&format!("bad probability {:?}", parts[1])))?,
                sign,
            });
        }
        if entries.len() != count {
            return Err(perr(&format!("expected {count} entries, found {}", entries.len())));
        }
        Ok(PecTable {
            block,
            order,
            gamma,
            p_success,
            entries,
        })
    }
}

/// Turns the numeric coefficients of `inverse` into a table. Coefficients
/// with `|c| < prune_relative * sum|c|` are dropped.
pub fn to_sampling_table(
    inverse: &ChannelPoly,
    block: usize,
    p_success: f64,
    prune_relative: f64,
) -> Result<PecTable> {
    let coeffs = inverse.evaluate();
    let total: f64 = coeffs.iter().map(|(_, c)| c.abs()).sum();
    let kept: Vec<(PauliString, f64)> = coeffs
        .into_iter()
        .filter(|(_, c)| c.abs() >= prune_relative * total && *c != 0.0)
        .collect();
    let gamma: f64 = kept.iter().map(|(_, c)| c.abs()).sum();
    if !(gamma >= 1.0 - 1e-12) {
        return Err(Error::Compilation(format!("table norm gamma = {gamma} is below 1")));
    }
    let entries = kept
        .into_iter()
        .map(|(pauli, c)| PecEntry {
            pauli,
            prob: c.abs() / gamma,
            sign: if c < 0.0 { -1 } else { 1 },
        })
        .collect();
    Ok(PecTable {
        block,
        order: inverse.order(),
        gamma,
        p_success,
        entries,
    })
}

/// Inverse-CDF sampler over a table, plus a variant conditioned on a
/// non-identity draw.
#[derive(Clone, Debug)]
pub struct TableSampler {
    cdf: Vec<f64>,
    /// CDF over non-identity entries only (indices into `entries`).
    cdf_non_id: Vec<f64>,
    non_id: Vec<usize>,
    /// Probability of the identity entry (0 if absent).
    pub q_identity: f64,
}

impl TableSampler {
    pub fn new(t: &PecTable) -> Self {
        let mut cdf = Vec::with_capacity(t.entries.len());
        let mut acc = 0.0;
        for e in &t.entries {
            acc += e.prob;
            cdf.push(acc);
        }
        let mut q_identity = 0.0;
        let mut non_id = Vec::new();
        let mut cdf_non_id = Vec::new();
        let mut acc2 = 0.0;
        for (i, e) in t.entries.iter().enumerate() {
            if e.pauli.is_identity() {
                q_identity += e.prob;
            } else {
                acc2 += e.prob;
                non_id.push(i);
                cdf_non_id.push(acc2);
            }
        }
        TableSampler {
            cdf,
            cdf_non_id,
            non_id,
            q_identity,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = rng.gen::<f64>() * self.cdf.last().copied().unwrap_or(1.0);
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }

    /// Draw conditioned on a non-identity entry. Panics if there is none.
    pub fn sample_non_identity<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cdf_non_id.last().expect("table has no non-identity entry");
        let u = rng.gen::<f64>() * total;
        let k = self.cdf_non_id.partition_point(|&c| c <= u).min(self.non_id.len() - 1);
        self.non_id[k]
    }

    pub fn has_non_identity(&self) -> bool {
        !self.non_id.is_empty()
    }
}
