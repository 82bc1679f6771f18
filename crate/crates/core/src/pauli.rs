//! Phase-free Pauli strings.
//!
//! A string on `n` qubits is stored as two packed bit vectors `x` and `z`;
//! qubit `q` carries `X^x Z^z` up to phase. Multiplication is XOR and two
//! strings commute iff their symplectic product is even.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    pub const NON_IDENTITY: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

#[inline]
fn words_for(n: usize) -> usize {
    n.div_ceil(64)
}

/// Pauli string on `n` qubits, ignoring global phase.
///
/// The derived ordering (width, then x words, then z words) is used as the
/// canonical order for deterministic output.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        let w = words_for(n);
        PauliString {
            n,
            x: vec![0; w],
            z: vec![0; w],
        }
    }

    pub fn single(n: usize, qubit: usize, p: Pauli) -> Result<Self> {
        Self::from_sparse(n, &[(qubit, p)])
    }

    /// Builds a string from `(qubit, pauli)` pairs. Repeated qubits multiply.
    pub fn from_sparse(n: usize, ops: &[(usize, Pauli)]) -> Result<Self> {
        let mut s = Self::identity(n);
        for &(q, p) in ops {
            if q >= n {
                return Err(Error::OutOfRange(format!("qubit {q} on {n} qubits")));
            }
            let (px, pz) = p.bits();
            let cur = s.get(q);
            let (cx, cz) = cur.bits();
            s.set(q, Pauli::from_bits(cx ^ px, cz ^ pz));
        }
        Ok(s)
    }

    /// `X` on every qubit in `support`.
    pub fn x_on(n: usize, support: &[usize]) -> Result<Self> {
        let ops: Vec<_> = support.iter().map(|&q| (q, Pauli::X)).collect();
        Self::from_sparse(n, &ops)
    }

    /// `Z` on every qubit in `support`.
    pub fn z_on(n: usize, support: &[usize]) -> Result<Self> {
        let ops: Vec<_> = support.iter().map(|&q| (q, Pauli::Z)).collect();
        Self::from_sparse(n, &ops)
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    #[inline]
    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    #[inline]
    pub fn x_bit(&self, q: usize) -> bool {
        (self.x[q >> 6] >> (q & 63)) & 1 == 1
    }

    #[inline]
    pub fn z_bit(&self, q: usize) -> bool {
        (self.z[q >> 6] >> (q & 63)) & 1 == 1
    }

    #[inline]
    pub fn set_x_bit(&mut self, q: usize, v: bool) {
        let m = 1u64 << (q & 63);
        if v {
            self.x[q >> 6] |= m;
        } else {
            self.x[q >> 6] &= !m;
        }
    }

    #[inline]
    pub fn set_z_bit(&mut self, q: usize, v: bool) {
        let m = 1u64 << (q & 63);
        if v {
            self.z[q >> 6] |= m;
        } else {
            self.z[q >> 6] &= !m;
        }
    }

    #[inline]
    pub fn flip_x_bit(&mut self, q: usize) {
        self.x[q >> 6] ^= 1u64 << (q & 63);
    }

    #[inline]
    pub fn flip_z_bit(&mut self, q: usize) {
        self.z[q >> 6] ^= 1u64 << (q & 63);
    }

    #[inline]
    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x_bit(q), self.z_bit(q))
    }

    #[inline]
    pub fn set(&mut self, q: usize, p: Pauli) {
        let (x, z) = p.bits();
        self.set_x_bit(q, x);
        self.set_z_bit(q, z);
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().all(|&w| w == 0) && self.z.iter().all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    /// Number of qubits with an X component (X or Y).
    pub fn x_count(&self) -> usize {
        self.x.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of qubits with a Z component (Z or Y).
    pub fn z_count(&self) -> usize {
        self.z.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn check_dim(&self, other: &PauliString) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }

    /// Product up to phase.
    pub fn multiply(&self, other: &PauliString) -> Result<PauliString> {
        self.check_dim(other)?;
        let mut out = self.clone();
        out.mul_assign_unchecked(other);
        Ok(out)
    }

    /// In-place product; widths must match (checked in debug builds only).
    #[inline]
    pub fn mul_assign_unchecked(&mut self, other: &PauliString) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.x.iter_mut().zip(&other.x) {
            *a ^= b;
        }
        for (a, b) in self.z.iter_mut().zip(&other.z) {
            *a ^= b;
        }
    }

    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        self.check_dim(other)?;
        Ok(!self.anticommutes_unchecked(other))
    }

    /// Parity of the symplectic product; widths must match.
    #[inline]
    pub fn anticommutes_unchecked(&self, other: &PauliString) -> bool {
        debug_assert_eq!(self.n, other.n);
        let mut acc = 0u64;
        for i in 0..self.x.len() {
            acc ^= (self.x[i] & other.z[i]) ^ (self.z[i] & other.x[i]);
        }
        acc.count_ones() & 1 == 1
    }

    /// Restriction to qubits `[start, start + len)`.
    pub fn slice(&self, start: usize, len: usize) -> Result<PauliString> {
        if start + len > self.n {
            return Err(Error::OutOfRange(format!(
                "slice {start}..{} of {} qubits",
                start + len,
                self.n
            )));
        }
        let mut out = PauliString::identity(len);
        for q in 0..len {
            out.set(q, self.get(start + q));
        }
        Ok(out)
    }

    /// Embeds `self` into a wider register at offset 0.
    pub fn widen(&self, n: usize) -> Result<PauliString> {
        if n < self.n {
            return Err(invalid(format!("cannot widen {} qubits to {n}", self.n)));
        }
        let mut out = PauliString::identity(n);
        out.x[..self.x.len()].copy_from_slice(&self.x);
        out.z[..self.z.len()].copy_from_slice(&self.z);
        Ok(out)
    }

    /// Dense index `sum_q (x_q + 2 z_q) 4^q`, for `n <= 31`.
    pub fn dense_index(&self) -> usize {
        debug_assert!(self.n <= 31);
        let mut idx = 0usize;
        for q in 0..self.n {
            let d = self.x_bit(q) as usize | ((self.z_bit(q) as usize) << 1);
            idx |= d << (2 * q);
        }
        idx
    }

    pub fn from_dense_index(n: usize, idx: usize) -> PauliString {
        let mut p = PauliString::identity(n);
        for q in 0..n {
            let d = (idx >> (2 * q)) & 3;
            p.set_x_bit(q, d & 1 == 1);
            p.set_z_bit(q, d & 2 == 2);
        }
        p
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::with_capacity(self.n);
        for q in 0..self.n {
            s.push(self.get(q).symbol());
        }
        f.write_str(&s)
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let n = s.chars().count();
        let mut p = PauliString::identity(n);
        for (q, c) in s.chars().enumerate() {
            let op = Pauli::from_symbol(c)
                .ok_or_else(|| Error::Parse(format!("invalid Pauli symbol {c:?} at position {q}")))?;
            p.set(q, op);
        }
        Ok(p)
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn single_qubit_table() {
        assert_eq!(p("X").multiply(&p("Z")).unwrap(), p("Y"));
        assert_eq!(p("Y").multiply(&p("Y")).unwrap(), p("I"));
        assert!(!p("X").commutes(&p("Z")).unwrap());
        assert!(!p("X").commutes(&p("Y")).unwrap());
        assert!(p("X").commutes(&p("X")).unwrap());
        assert!(p("I").commutes(&p("Y")).unwrap());
    }

    #[test]
    fn two_qubit_commutation() {
        assert!(p("XX").commutes(&p("ZZ")).unwrap());
        assert!(!p("XI").commutes(&p("ZZ")).unwrap());
        assert!(p("XY").commutes(&p("YX")).unwrap());
    }

    #[test]
    fn mismatched_width_rejected() {
        assert!(matches!(
            p("XX").multiply(&p("X")),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(p("XX").commutes(&p("XXX")).is_err());
    }

    #[test]
    fn text_round_trip_wide() {
        let mut s = String::new();
        for i in 0..517 {
            s.push(['I', 'X', 'Y', 'Z'][(i * 7 + i / 3) % 4]);
        }
        assert_eq!(p(&s).to_string(), s);
        assert!("IXQ".parse::<PauliString>().is_err());
    }

    #[test]
    fn sparse_builder_and_weights() {
        let a = PauliString::from_sparse(70, &[(0, Pauli::X), (65, Pauli::Z), (69, Pauli::Y)]).unwrap();
        assert_eq!(a.weight(), 3);
        assert_eq!(a.x_count(), 2);
        assert_eq!(a.z_count(), 2);
        assert!(PauliString::single(3, 3, Pauli::X).is_err());
        let b = PauliString::from_sparse(2, &[(0, Pauli::X), (0, Pauli::Z)]).unwrap();
        assert_eq!(b.to_string(), "YI");
    }

    #[test]
    fn dense_index_round_trip() {
        for idx in 0..256 {
            assert_eq!(PauliString::from_dense_index(4, idx).dense_index(), idx);
        }
    }

    #[test]
    fn serde_as_string() {
        let a = p("IXYZ");
        let j = serde_json::to_string(&a).unwrap();
        assert_eq!(j, "\"IXYZ\"");
        let b: PauliString = serde_json::from_str(&j).unwrap();
        assert_eq!(a, b);
    }
}
