//! Pauli channels with degree-series coefficients.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::BuildHasherDefault;

use super::series::DegreeSeries;
use crate::error::{Error, Result};
use crate::pauli::PauliString;

/// Fixed-key hasher so that iteration order, and hence floating-point
/// summation order, is reproducible across runs.
pub(crate) type StableMap<K, V> = HashMap<K, V, BuildHasherDefault<DefaultHasher>>;

/// `sum_P c_P(w) P(.)P` with each `c_P` a [`DegreeSeries`].
#[derive(Clone, Debug)]
pub struct ChannelPoly {
    n: usize,
    order: usize,
    terms: StableMap<PauliString, DegreeSeries>,
}

impl ChannelPoly {
    pub fn zero(n: usize, order: usize) -> Self {
        ChannelPoly {
            n,
            order,
            terms: StableMap::default(),
        }
    }

    pub fn identity(n: usize, order: usize) -> Self {
        let mut c = Self::zero(n, order);
        c.terms.insert(PauliString::identity(n), DegreeSeries::one(order));
        c
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, p: &PauliString) -> Option<&DegreeSeries> {
        self.terms.get(p)
    }

    /// Numeric coefficient of `p` (0 if absent).
    pub fn coefficient(&self, p: &PauliString) -> f64 {
        self.terms.get(p).map_or(0.0, DegreeSeries::eval)
    }

    pub fn add_term(&mut self, p: &PauliString, s: &DegreeSeries) -> Result<()> {
        if p.n_qubits() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: p.n_qubits(),
            });
        }
        self.add_term_unchecked(p, s);
        Ok(())
    }

    pub(crate) fn add_term_unchecked(&mut self, p: &PauliString, s: &DegreeSeries) {
        let order = self.order;
        match self.terms.get_mut(p) {
            Some(e) => e.add_assign(&s.truncated(order)),
            None => {
                self.terms.insert(p.clone(), s.truncated(order));
            }
        }
    }

    pub(crate) fn entry_mut(&mut self, p: &PauliString) -> &mut DegreeSeries {
        let order = self.order;
        if !self.terms.contains_key(p) {
            self.terms.insert(p.clone(), DegreeSeries::zero(order));
        }
        self.terms.get_mut(p).unwrap()
    }

    /// Terms sorted with the identity first, then in canonical Pauli order.
    pub fn sorted_terms(&self) -> Vec<(&PauliString, &DegreeSeries)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| (!a.0.is_identity(), a.0).cmp(&(!b.0.is_identity(), b.0)));
        v
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, &DegreeSeries)> {
        self.terms.iter()
    }

    /// `self - id`.
    pub fn minus_identity(&self) -> ChannelPoly {
        let mut out = self.clone();
        let id = PauliString::identity(self.n);
        out.entry_mut(&id).add_scaled(&DegreeSeries::one(self.order), -1.0);
        out
    }

    pub fn scaled(&self, k: f64) -> ChannelPoly {
        let mut out = self.clone();
        for s in out.terms.values_mut() {
            *s = s.scaled(k);
        }
        out
    }

    pub fn add_assign(&mut self, other: &ChannelPoly) {
        for (p, s) in other.sorted_terms() {
            self.add_term_unchecked(p, s);
        }
    }

    /// Drops terms whose series vanish identically.
    pub fn prune_zero(&mut self) {
        self.terms.retain(|_, s| !s.is_zero());
    }

    /// Composition (Pauli product on keys, series product on coefficients)
    /// keeping total degree `<= order`.
    pub fn compose_truncated(&self, other: &ChannelPoly, order: usize) -> Result<ChannelPoly> {
        self.compose_impl(other, order, usize::MAX)
    }

    /// Untruncated composition. Fails with `SizeLimit` if more than
    /// `max_pairs` term pairs would be multiplied.
    pub fn compose_full(&self, other: &ChannelPoly, max_pairs: usize) -> Result<ChannelPoly> {
        self.compose_impl(other, self.order + other.order, max_pairs)
    }

    fn compose_impl(&self, other: &ChannelPoly, order: usize, max_pairs: usize) -> Result<ChannelPoly> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        // bucket the right operand by lowest non-zero degree
        let mut buckets: Vec<Vec<(&PauliString, &DegreeSeries)>> = vec![Vec::new(); other.order + 1];
        for (q, b) in other.sorted_terms() {
            if let Some(d) = b.min_degree() {
                buckets[d].push((q, b));
            }
        }
        let left = self.sorted_terms();
        let mut pairs = 0usize;
        for (_, a) in &left {
            if let Some(da) = a.min_degree() {
                for bucket in buckets.iter().take((order + 1).saturating_sub(da)) {
                    pairs += bucket.len();
                }
            }
        }
        if pairs > max_pairs {
            return Err(Error::SizeLimit(format!(
                "composition needs {pairs} term products (limit {max_pairs})"
            )));
        }
        let mut out = ChannelPoly::zero(self.n, order);
        let mut key = PauliString::identity(self.n);
        for (p, a) in left {
            let Some(da) = a.min_degree() else { continue };
            for bucket in buckets.iter().take((order + 1).saturating_sub(da)) {
                for &(q, b) in bucket {
                    key.clone_from(p);
                    key.mul_assign_unchecked(q);
                    let prod = a.mul_truncated(b, order);
                    out.entry_mut(&key).add_assign(&prod);
                }
            }
        }
        Ok(out)
    }

    /// `(P, c_P)` with numeric coefficients, identity first then canonical order.
    pub fn evaluate(&self) -> Vec<(PauliString, f64)> {
        self.sorted_terms()
            .into_iter()
            .map(|(p, s)| (p.clone(), s.eval()))
            .collect()
    }

    /// `sum_P |c_P|` of the numeric coefficients.
    pub fn l1_eval(&self) -> f64 {
        self.sorted_terms().iter().map(|(_, s)| s.eval().abs()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn compose_multiplies_keys() {
        let mut a = ChannelPoly::identity(2, 2);
        a.add_term(&p("XI"), &DegreeSeries::monomial(2, 1, 0.1)).unwrap();
        let mut b = ChannelPoly::identity(2, 2);
        b.add_term(&p("ZI"), &DegreeSeries::monomial(2, 1, 0.2)).unwrap();
        let c = a.compose_truncated(&b, 2).unwrap();
        assert!((c.coefficient(&p("YI")) - 0.02).abs() < 1e-15);
        assert!((c.coefficient(&p("XI")) - 0.1).abs() < 1e-15);
        assert_eq!(c.coefficient(&p("II")), 1.0);
        let c1 = a.compose_truncated(&b, 1).unwrap();
        assert_eq!(c1.coefficient(&p("YI")), 0.0);
        let full = a.compose_full(&b, 100).unwrap();
        assert_eq!(full.order(), 4);
        assert!(a.compose_full(&b, 1).is_err());
        assert!(a.compose_truncated(&ChannelPoly::identity(3, 2), 2).is_err());
    }

    #[test]
    fn sorted_identity_first() {
        let mut a = ChannelPoly::zero(2, 1);
        a.add_term(&p("XX"), &DegreeSeries::one(1)).unwrap();
        a.add_term(&p("II"), &DegreeSeries::one(1)).unwrap();
        a.add_term(&p("IX"), &DegreeSeries::one(1)).unwrap();
        let keys: Vec<String> = a.sorted_terms().iter().map(|(k, _)| k.to_string()).collect();
        assert_eq!(keys[0], "II");
    }
}
