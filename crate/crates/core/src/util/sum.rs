//! Neumaier compensated summation.
//!
//! Mass totals and conservation checks must resolve drifts near one ulp of
//! the total; a plain left-to-right sum of M terms loses log2(M) bits.

#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Compensated sum of a slice.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let mut acc = NeumaierSum::new();
    for &v in values {
        acc.add(v);
    }
    acc.total()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancellation() {
        // 1 + 2^-60 repeated: naive sum stays at 1.
        let mut acc = NeumaierSum::new();
        acc.add(1.0);
        let tiny = (2.0f64).powi(-60);
        for _ in 0..1 << 20 {
            acc.add(tiny);
        }
        let expected = 1.0 + tiny * (1 << 20) as f64;
        assert!((acc.total() - expected).abs() < 1e-18);
    }

    #[test]
    fn matches_exact_on_integers() {
        let vals: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(compensated_sum(&vals), 499_500.0);
    }
}
