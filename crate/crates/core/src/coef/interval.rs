use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// The domain `I ⊆ ℝ` of the coefficient functions. Endpoints may be
/// infinite; numerical work always stays strictly inside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Result<Self, Error> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::Invalid(format!("empty interval ({lo}, {hi})")));
        }
        Ok(Interval { lo, hi, lo_closed: lo_closed && lo.is_finite(), hi_closed: hi_closed && hi.is_finite() })
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, false, false).expect("lo < hi")
    }

    pub fn contains_interior(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    /// Whether `a` may serve as a lower integration limit: inside the
    /// interval or at a finite endpoint.
    pub fn admits_limit(&self, a: f64) -> bool {
        a >= self.lo && a <= self.hi && a.is_finite()
    }

    /// A bounded sub-window used for sampling. Infinite ends are cut at a
    /// distance of 4 from the finite end (or to `[-2, 2]` for the real line).
    pub fn window(&self) -> (f64, f64) {
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => (self.lo, self.hi),
            (true, false) => (self.lo, self.lo + 4.0),
            (false, true) => (self.hi - 4.0, self.hi),
            (false, false) => (-2.0, 2.0),
        }
    }

    /// `n` sorted points drawn uniformly from the central 90% of the window.
    pub fn sample_points<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        let (lo, hi) = self.window();
        let margin = 0.05 * (hi - lo);
        let mut pts: Vec<f64> = (0..n).map(|_| rng.random_range(lo + margin..hi - margin)).collect();
        pts.sort_by(f64::total_cmp);
        pts
    }

    /// `n` evenly spaced interior points of the window, endpoints excluded.
    pub fn even_points(&self, n: usize) -> Vec<f64> {
        let (lo, hi) = self.window();
        (1..=n).map(|i| lo + (hi - lo) * i as f64 / (n + 1) as f64).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_empty() {
        assert!(Interval::new(1.0, 1.0, false, false).is_err());
        assert!(Interval::new(2.0, 1.0, false, false).is_err());
    }

    #[test]
    fn samples_stay_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for iv in [Interval::open(0.0, f64::INFINITY), Interval::open(f64::NEG_INFINITY, f64::INFINITY), Interval::open(1.0, 2.0)] {
            for x in iv.sample_points(50, &mut rng) {
                assert!(iv.contains_interior(x));
            }
            for x in iv.even_points(9) {
                assert!(iv.contains_interior(x));
            }
        }
    }
}
