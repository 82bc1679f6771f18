//! Stabilizer codes for error detection.
//!
//! Only detection is used: a frame is accepted iff it commutes with every
//! generator. The Iceberg `[[n, n-2, 2]]` code is built in.

use crate::error::{invalid, Error, Result};
use crate::pauli::PauliString;

/// Syndrome bits; bit `a` is set iff the frame anticommutes with generator `a`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Syndrome(pub u64);

impl Syndrome {
    pub const TRIVIAL: Syndrome = Syndrome(0);

    #[inline]
    pub fn is_trivial(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn bit(self, a: usize) -> bool {
        (self.0 >> a) & 1 == 1
    }
}

impl std::ops::BitXor for Syndrome {
    type Output = Syndrome;
    fn bitxor(self, rhs: Syndrome) -> Syndrome {
        Syndrome(self.0 ^ rhs.0)
    }
}

impl std::ops::BitXorAssign for Syndrome {
    fn bitxor_assign(&mut self, rhs: Syndrome) {
        self.0 ^= rhs.0;
    }
}

#[derive(Clone, Debug)]
pub struct StabilizerCode {
    name: String,
    n: usize,
    generators: Vec<PauliString>,
    logical_x: Vec<PauliString>,
    logical_z: Vec<PauliString>,
}

impl StabilizerCode {
    /// Checks the usual invariants: commuting generators, logicals commuting
    /// with the stabilizer group, and canonical logical anticommutation.
    pub fn new(
        name: impl Into<String>,
        n: usize,
        generators: Vec<PauliString>,
        logical_x: Vec<PauliString>,
        logical_z: Vec<PauliString>,
    ) -> Result<Self> {
        if generators.is_empty() || generators.len() > 64 {
            return Err(invalid(format!(
                "need between 1 and 64 generators, got {}",
                generators.len()
            )));
        }
        if logical_x.len() != logical_z.len() {
            return Err(invalid("logical X and Z lists differ in length"));
        }
        for g in generators.iter().chain(&logical_x).chain(&logical_z) {
            if g.n_qubits() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: g.n_qubits(),
                });
            }
        }
        for (a, g) in generators.iter().enumerate() {
            for h in &generators[a + 1..] {
                if g.anticommutes_unchecked(h) {
                    return Err(invalid("stabilizer generators must commute"));
                }
            }
            for l in logical_x.iter().chain(&logical_z) {
                if g.anticommutes_unchecked(l) {
                    return Err(invalid(format!("logical {l} anticommutes with generator {g}")));
                }
            }
        }
        for (i, lx) in logical_x.iter().enumerate() {
            for (j, lz) in logical_z.iter().enumerate() {
                if lx.anticommutes_unchecked(lz) != (i == j) {
                    return Err(invalid(format!("logical pair ({i}, {j}) has wrong commutation")));
                }
            }
            for ly in &logical_x[i + 1..] {
                if lx.anticommutes_unchecked(ly) {
                    return Err(invalid("logical X operators anticommute"));
                }
            }
        }
        for (i, lz) in logical_z.iter().enumerate() {
            for lw in &logical_z[i + 1..] {
                if lz.anticommutes_unchecked(lw) {
                    return Err(invalid("logical Z operators anticommute"));
                }
            }
        }
        Ok(StabilizerCode {
            name: name.into(),
            n,
            generators,
            logical_x,
            logical_z,
        })
    }

    /// Iceberg code on even `n >= 4`: stabilizers `Z^n`, `X^n`; logical
    /// qubit `j` in `1..=n-2` has `Z_j = Z_0 Z_{j+1}` and `X_j = X_1 X_{j+1}`.
    pub fn iceberg(n: usize) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(invalid(format!("Iceberg code needs even n >= 4, got {n}")));
        }
        let all: Vec<usize> = (0..n).collect();
        let gens = vec![PauliString::z_on(n, &all)?, PauliString::x_on(n, &all)?];
        let mut lx = Vec::with_capacity(n - 2);
        let mut lz = Vec::with_capacity(n - 2);
        for j in 1..=n - 2 {
            lx.push(PauliString::x_on(n, &[1, j + 1])?);
            lz.push(PauliString::z_on(n, &[0, j + 1])?);
        }
        Self::new("iceberg", n, gens, lx, lz)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of logical qubits.
    pub fn k(&self) -> usize {
        self.logical_x.len()
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    /// Logical X of logical qubit `j` (1-based, as in the Iceberg labels).
    pub fn logical_x(&self, j: usize) -> Result<&PauliString> {
        j.checked_sub(1)
            .and_then(|i| self.logical_x.get(i))
            .ok_or_else(|| Error::OutOfRange(format!("logical qubit {j}")))
    }

    pub fn logical_z(&self, j: usize) -> Result<&PauliString> {
        j.checked_sub(1)
            .and_then(|i| self.logical_z.get(i))
            .ok_or_else(|| Error::OutOfRange(format!("logical qubit {j}")))
    }

    pub fn syndrome(&self, p: &PauliString) -> Result<Syndrome> {
        if p.n_qubits() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: p.n_qubits(),
            });
        }
        Ok(self.syndrome_unchecked(p))
    }

    #[inline]
    pub fn syndrome_unchecked(&self, p: &PauliString) -> Syndrome {
        let mut s = 0u64;
        for (a, g) in self.generators.iter().enumerate() {
            if g.anticommutes_unchecked(p) {
                s |= 1 << a;
            }
        }
        Syndrome(s)
    }

    pub fn accepts(&self, p: &PauliString) -> Result<bool> {
        Ok(self.syndrome(p)?.is_trivial())
    }
}

/// Closed form for the Iceberg code: accepted iff both the X-support and the
/// Z-support have even size.
pub fn iceberg_accepts(p: &PauliString) -> bool {
    p.x_count() % 2 == 0 && p.z_count() % 2 == 0
}

/// Probability that independent faults (syndrome `s_i`, rate `w_i`) leave a
/// trivial total syndrome, by summing over the characters of `GF(2)^s`:
/// `P = 2^{-s} sum_chi prod_i (1 - 2 w_i [chi . s_i odd])`.
pub fn trivial_syndrome_probability(
    faults: impl IntoIterator<Item = (Syndrome, f64)>,
    num_generators: usize,
) -> f64 {
    assert!(num_generators <= 16, "character sum limited to 16 generators");
    let nchar = 1usize << num_generators;
    // log-products per character, with sign tracked for factors <= 0
    let mut log_mag = vec![0.0f64; nchar];
    let mut neg = vec![false; nchar];
    let mut zero = vec![false; nchar];
    for (s, w) in faults {
        let f = 1.0 - 2.0 * w;
        for chi in 1..nchar {
            if (chi as u64 & s.0).count_ones() & 1 == 1 {
                if f == 0.0 {
                    zero[chi] = true;
                } else {
                    log_mag[chi] += f.abs().ln();
                    if f < 0.0 {
                        neg[chi] = !neg[chi];
                    }
                }
            }
        }
    }
    let mut total = 1.0;
    for chi in 1..nchar {
        if zero[chi] {
            continue;
        }
        let v = log_mag[chi].exp();
        total += if neg[chi] { -v } else { v };
    }
    total / nchar as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Pauli;

    #[test]
    fn iceberg_logicals() {
        let c = StabilizerCode::iceberg(6).unwrap();
        assert_eq!(c.k(), 4);
        assert_eq!(c.logical_z(1).unwrap().to_string(), "ZIZIII");
        assert_eq!(c.logical_x(4).unwrap().to_string(), "IXIIIX");
        assert!(c.logical_x(0).is_err());
        assert!(c.logical_x(5).is_err());
        assert!(StabilizerCode::iceberg(5).is_err());
        assert!(StabilizerCode::iceberg(2).is_err());
    }

    #[test]
    fn single_qubit_errors_detected() {
        let n = 8;
        let c = StabilizerCode::iceberg(n).unwrap();
        for q in 0..n {
            for p in Pauli::NON_IDENTITY {
                let e = PauliString::single(n, q, p).unwrap();
                assert!(!c.accepts(&e).unwrap());
            }
        }
    }

    #[test]
    fn only_three_two_qubit_paulis_accepted() {
        let n = 6;
        let c = StabilizerCode::iceberg(n).unwrap();
        let mut accepted = Vec::new();
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                if a == Pauli::I && b == Pauli::I {
                    continue;
                }
                let e = PauliString::from_sparse(n, &[(2, a), (4, b)]).unwrap();
                if c.accepts(&e).unwrap() {
                    accepted.push((a, b));
                }
            }
        }
        assert_eq!(
            accepted,
            vec![(Pauli::X, Pauli::X), (Pauli::Y, Pauli::Y), (Pauli::Z, Pauli::Z)]
        );
    }

    #[test]
    fn character_sum_matches_enumeration() {
        let faults = [
            (Syndrome(1), 0.1),
            (Syndrome(2), 0.05),
            (Syndrome(3), 0.2),
            (Syndrome(0), 0.3),
            (Syndrome(1), 0.07),
        ];
        let mut brute = 0.0;
        for mask in 0u32..32 {
            let mut pr = 1.0;
            let mut s = Syndrome(0);
            for (i, &(si, w)) in faults.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    pr *= w;
                    s ^= si;
                } else {
                    pr *= 1.0 - w;
                }
            }
            if s.is_trivial() {
                brute += pr;
            }
        }
        let fast = trivial_syndrome_probability(faults, 2);
        assert!((brute - fast).abs() < 1e-15, "{brute} vs {fast}");
    }
}
