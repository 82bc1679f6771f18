//! Truncated power series in the total fault degree.

use crate::error::{Error, Result};

/// Coefficients `c_0..=c_order` of a series in the total fault degree. Each
/// coefficient is the numeric sum over all monomials of that degree.
#[derive(Clone, Debug, PartialEq)]
pub struct DegreeSeries {
    coeffs: Vec<f64>,
}

impl DegreeSeries {
    pub fn zero(order: usize) -> Self {
        DegreeSeries {
            coeffs: vec![0.0; order + 1],
        }
    }

    pub fn one(order: usize) -> Self {
        Self::monomial(order, 0, 1.0)
    }

    /// `value` at `degree`; degrees above `order` are dropped.
    pub fn monomial(order: usize, degree: usize, value: f64) -> Self {
        let mut s = Self::zero(order);
        if degree <= order {
            s.coeffs[degree] = value;
        }
        s
    }

    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least the constant term");
        DegreeSeries { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, degree: usize) -> f64 {
        self.coeffs.get(degree).copied().unwrap_or(0.0)
    }

    /// Sum of all coefficients, i.e. the series evaluated at the block's weights.
    pub fn eval(&self) -> f64 {
        self.coeffs.iter().sum()
    }

    pub fn min_degree(&self) -> Option<usize> {
        self.coeffs.iter().position(|&c| c != 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn truncated(&self, order: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.resize(order + 1, 0.0);
        DegreeSeries { coeffs: c }
    }

    pub fn add_assign(&mut self, other: &DegreeSeries) {
        if other.coeffs.len() > self.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), 0.0);
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
    }

    pub fn add_scaled(&mut self, other: &DegreeSeries, k: f64) {
        if other.coeffs.len() > self.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), 0.0);
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += k * b;
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        DegreeSeries {
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    /// Product keeping degrees `<= order`.
    pub fn mul_truncated(&self, other: &DegreeSeries, order: usize) -> Self {
        let mut out = vec![0.0; order + 1];
        for (i, &a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate().take(order + 1 - i) {
                out[i + j] += a * b;
            }
        }
        DegreeSeries { coeffs: out }
    }

    /// Full product of order `self.order() + other.order()`.
    pub fn mul_full(&self, other: &DegreeSeries) -> Self {
        self.mul_truncated(other, self.order() + other.order())
    }

    /// Reciprocal to the same order; the constant term must be 1.
    pub fn reciprocal(&self) -> Result<Self> {
        if (self.coeffs[0] - 1.0).abs() > 1e-12 {
            return Err(Error::Compilation(format!(
                "series reciprocal needs constant term 1, got {}",
                self.coeffs[0]
            )));
        }
        let k = self.order();
        let mut r = vec![0.0; k + 1];
        r[0] = 1.0;
        for d in 1..=k {
            let mut s = 0.0;
            for j in 1..=d {
                s += self.coeffs[j] * r[d - j];
            }
            r[d] = -s;
        }
        Ok(DegreeSeries { coeffs: r })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reciprocal_of_one_minus_x() {
        let s = DegreeSeries::from_coeffs(vec![1.0, -0.5, 0.0, 0.0]);
        let r = s.reciprocal().unwrap();
        assert_eq!(r.coeffs(), &[1.0, 0.5, 0.25, 0.125]);
        let p = s.mul_truncated(&r, 3);
        assert_eq!(p.coeffs(), &[1.0, 0.0, 0.0, 0.0]);
        assert!(DegreeSeries::from_coeffs(vec![2.0, 1.0]).reciprocal().is_err());
    }

    #[test]
    fn truncated_and_full_products() {
        let a = DegreeSeries::from_coeffs(vec![1.0, 2.0]);
        let b = DegreeSeries::from_coeffs(vec![3.0, 4.0]);
        assert_eq!(a.mul_truncated(&b, 1).coeffs(), &[3.0, 10.0]);
        assert_eq!(a.mul_full(&b).coeffs(), &[3.0, 10.0, 8.0]);
        assert_eq!(a.eval(), 3.0);
        assert_eq!(DegreeSeries::monomial(2, 3, 1.0), DegreeSeries::zero(2));
        assert_eq!(DegreeSeries::monomial(2, 1, 5.0).min_degree(), Some(1));
    }
}
