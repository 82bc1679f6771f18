//! Independent Bernoulli faults sampled by skipping.
//!
//! Fault `i` fires with probability `w_i = 1 - exp(-h_i)`. Laying the hazards
//! `h_i` end to end, fault `i` fires iff a unit-rate Poisson process has a
//! point inside its interval, so the firing set is found with a binary search
//! per fired fault instead of one draw per fault.

use rand::Rng;

use crate::pauli::PauliString;

#[derive(Clone, Debug)]
pub struct FaultSet {
    pub paulis: Vec<PauliString>,
    pub masks: Vec<u64>,
    pub weights: Vec<f64>,
    /// `hazard[i] = sum_{l < i} -ln(1 - w_l)`, length `m + 1`.
    hazard: Vec<f64>,
}

impl FaultSet {
    pub fn new(paulis: Vec<PauliString>, masks: Vec<u64>, weights: Vec<f64>) -> Self {
        assert_eq!(paulis.len(), weights.len());
        assert_eq!(masks.len(), weights.len());
        let mut hazard = Vec::with_capacity(weights.len() + 1);
        let mut h = 0.0;
        hazard.push(0.0);
        for &w in &weights {
            h += -(-w).ln_1p();
            hazard.push(h);
        }
        FaultSet {
            paulis,
            masks,
            weights,
            hazard,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total_hazard(&self) -> f64 {
        *self.hazard.last().unwrap()
    }

    /// Probability that no fault fires.
    pub fn p_none(&self) -> f64 {
        (-self.total_hazard()).exp()
    }

    /// First index whose interval contains hazard position `t`, if any.
    #[inline]
    fn locate(&self, t: f64) -> Option<usize> {
        let j = self.hazard.partition_point(|&h| h <= t);
        if j == 0 || j >= self.hazard.len() {
            None
        } else {
            Some(j - 1)
        }
    }

    /// Appends the firing faults with index `>= start` to `out`.
    pub fn sample_from<R: Rng + ?Sized>(&self, rng: &mut R, start: usize, out: &mut Vec<usize>) {
        let mut pos = self.hazard[start];
        loop {
            let e = -(1.0 - rng.gen::<f64>()).ln();
            match self.locate(pos + e) {
                Some(i) => {
                    out.push(i);
                    pos = self.hazard[i + 1];
                }
                None => return,
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<usize>) {
        out.clear();
        self.sample_from(rng, 0, out);
    }

    /// Samples the firing set conditioned on at least one fault firing.
    pub fn sample_at_least_one<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<usize>) {
        out.clear();
        let total = self.total_hazard();
        assert!(total > 0.0, "no faults to condition on");
        let p_any = -(-total).exp_m1();
        let u = rng.gen::<f64>() * p_any;
        let t = -(-u).ln_1p();
        let i = self.locate(t).unwrap_or(self.len() - 1);
        out.push(i);
        self.sample_from(rng, i + 1, out);
    }

    /// XOR of the masks of `fired`.
    #[inline]
    pub fn mask_of(&self, fired: &[usize]) -> u64 {
        fired.iter().fold(0, |m, &i| m ^ self.masks[i])
    }

    #[inline]
    pub fn apply(&self, frame: &mut PauliString, fired: &[usize]) {
        for &i in fired {
            frame.mul_assign_unchecked(&self.paulis[i]);
        }
    }
}
