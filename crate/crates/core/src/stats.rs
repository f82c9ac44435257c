use serde::{Deserialize, Serialize};

/// One-pass mean and variance (Welford), mergeable across independent streams.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Combines two accumulators (Chan et al. pairwise update).
    pub fn merge(&mut self, other: &RunningStats) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n_a = self.count as f64;
        let n_b = other.count as f64;
        let n = n_a + n_b;
        let delta = other.mean - self.mean;
        self.mean += delta * n_b / n;
        self.m2 += other.m2 + delta * delta * n_a * n_b / n;
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; zero with fewer than two observations.
    pub fn variance(&self) -> f64 {
        if self.count > 1 {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        } else {
            0.0
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Standard error of the mean, `std_dev / sqrt(n)`.
    pub fn std_error(&self) -> f64 {
        if self.count > 1 {
            self.std_dev() / (self.count as f64).sqrt()
        } else {
            0.0
        }
    }
}

impl FromIterator<f64> for RunningStats {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = RunningStats::new();
        for x in iter {
            s.push(x);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_pass(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn constant_stream_has_zero_variance() {
        let s: RunningStats = std::iter::repeat_n(1.25, 1000).collect();
        assert_eq!(s.mean(), 1.25);
        assert_eq!(s.variance(), 0.0);
    }

    #[test]
    fn empty_and_single() {
        let s = RunningStats::new();
        assert_eq!(s.variance(), 0.0);
        assert_eq!(s.std_error(), 0.0);
        let s: RunningStats = [3.0].into_iter().collect();
        assert_eq!(s.mean(), 3.0);
        assert_eq!(s.variance(), 0.0);
    }

    proptest! {
        #[test]
        fn matches_two_pass(xs in prop::collection::vec(-1e3f64..1e3, 2..200)) {
            let s: RunningStats = xs.iter().copied().collect();
            let (m, v) = two_pass(&xs);
            prop_assert!((s.mean() - m).abs() <= 1e-9 * (1.0 + m.abs()));
            prop_assert!((s.variance() - v).abs() <= 1e-7 * (1.0 + v.abs()));
        }

        #[test]
        fn merge_equals_concatenation(
            xs in prop::collection::vec(-1e3f64..1e3, 0..100),
            ys in prop::collection::vec(-1e3f64..1e3, 0..100),
        ) {
            let mut a: RunningStats = xs.iter().copied().collect();
            let b: RunningStats = ys.iter().copied().collect();
            a.merge(&b);
            let all: RunningStats = xs.iter().chain(ys.iter()).copied().collect();
            prop_assert_eq!(a.count(), all.count());
            prop_assert!((a.mean() - all.mean()).abs() <= 1e-9 * (1.0 + all.mean().abs()));
            prop_assert!((a.variance() - all.variance()).abs() <= 1e-7 * (1.0 + all.variance()));
        }
    }
}
