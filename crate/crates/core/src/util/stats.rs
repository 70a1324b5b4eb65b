//! Small-sample estimators used throughout: means with standard errors,
//! medians, jackknife over blocks, and a running Welford accumulator.

/// Online mean/variance accumulator (Welford).
#[derive(Debug, Clone, Copy, Default)]
pub struct Running {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Running {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; NaN for n < 2.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            f64::NAN
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }

    /// Merge two accumulators (associative up to rounding).
    pub fn merge(&self, other: &Running) -> Running {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let mean = self.mean + d * other.n as f64 / n as f64;
        let m2 = self.m2 + other.m2 + d * d * (self.n as f64 * other.n as f64) / n as f64;
        Running { n, mean, m2 }
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    crate::util::compensated_sum(xs) / xs.len() as f64
}

pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    xs.iter().map(|&x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn stderr_of_mean(xs: &[f64]) -> f64 {
    (sample_variance(xs) / xs.len() as f64).sqrt()
}

/// Median; NaN on empty input. Sorts a copy.
pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Leave-one-block-out jackknife for the mean of an autocorrelated series.
///
/// Returns (mean, stderr). The block length should exceed the correlation
/// time; callers use 4x the maximum lag of interest.
pub fn block_jackknife_mean(series: &[f64], block_len: usize) -> (f64, f64) {
    assert!(block_len >= 1);
    let n_blocks = series.len() / block_len;
    if n_blocks < 2 {
        return (mean(series), f64::NAN);
    }
    let used = n_blocks * block_len;
    let total: f64 = crate::util::compensated_sum(&series[..used]);
    let full_mean = total / used as f64;
    let mut pseudo = Vec::with_capacity(n_blocks);
    for b in 0..n_blocks {
        let block_sum: f64 =
            crate::util::compensated_sum(&series[b * block_len..(b + 1) * block_len]);
        let loo_mean = (total - block_sum) / (used - block_len) as f64;
        pseudo.push(loo_mean);
    }
    let pm = mean(&pseudo);
    let var = pseudo.iter().map(|&p| (p - pm) * (p - pm)).sum::<f64>() * (n_blocks - 1) as f64
        / n_blocks as f64;
    (full_mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welford_matches_direct() {
        let xs = [1.0, 2.0, 4.0, 8.0, 16.0];
        let mut r = Running::new();
        for &x in &xs {
            r.push(x);
        }
        assert!((r.mean() - mean(&xs)).abs() < 1e-12);
        assert!((r.variance() - sample_variance(&xs)).abs() < 1e-12);
    }

    #[test]
    fn merge_is_consistent() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64).sin()).collect();
        let mut a = Running::new();
        let mut b = Running::new();
        for &x in &xs[..37] {
            a.push(x);
        }
        for &x in &xs[37..] {
            b.push(x);
        }
        let m = a.merge(&b);
        assert!((m.mean() - mean(&xs)).abs() < 1e-12);
        assert!((m.variance() - sample_variance(&xs)).abs() < 1e-12);
    }

    #[test]
    fn median_odd_even() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn jackknife_on_iid_matches_naive_stderr() {
        // For iid data the block jackknife reproduces the plain stderr.
        let xs: Vec<f64> = (0..4096).map(|i| ((i * 2654435761_usize) % 997) as f64).collect();
        let (m, se) = block_jackknife_mean(&xs, 8);
        assert!((m - mean(&xs)).abs() < 1e-9);
        let naive = stderr_of_mean(&xs);
        assert!((se - naive).abs() / naive < 0.2);
    }
}
