//! Compensated accumulation of complex terms.

use crate::theta::Scalar;

/// Neumaier-compensated sum of complex terms (real and imaginary parts
/// compensated independently), tracking the largest term modulus.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    re: Neumaier,
    im: Neumaier,
    max_abs: f64,
    count: usize,
}

#[derive(Debug, Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, term: Scalar) {
        self.re.add(term.re);
        self.im.add(term.im);
        self.max_abs = self.max_abs.max(term.norm());
        self.count += 1;
    }

    pub fn value(&self) -> Scalar {
        Scalar::new(self.re.value(), self.im.value())
    }

    /// Largest `|term|` seen so far.
    pub fn max_abs_term(&self) -> f64 {
        self.max_abs
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }
}

impl FromIterator<Scalar> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = Scalar>>(iter: I) -> Self {
        let mut s = Self::new();
        for t in iter {
            s.add(t);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_small_terms() {
        let terms = [1e16, 1.0, -1e16, 1.0].map(|v| Scalar::new(v, -v));
        let s: CompensatedSum = terms.into_iter().collect();
        assert_eq!(s.value(), Scalar::new(2.0, -2.0));
        assert_eq!(s.max_abs_term(), Scalar::new(1e16, 1e16).norm());
        assert_eq!(s.len(), 4);
    }

    #[test]
    fn empty_sum_is_zero() {
        let s = CompensatedSum::new();
        assert!(s.is_empty());
        assert_eq!(s.value(), Scalar::new(0.0, 0.0));
    }
}
