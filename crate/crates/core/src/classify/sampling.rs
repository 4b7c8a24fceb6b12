//! Deterministic sampling of grid points and node sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Interval;

/// Per-item generator: the stream index is the item index, so results do not
/// depend on how work is scheduled across threads.
pub fn item_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Scales of the deterministic Chebyshev node sets, as fractions of the
/// sampling region.
pub const CHEBYSHEV_SCALES: [f64; 3] = [1.0, 0.1, 0.01];

const MAX_DRAWS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplingPlan {
    pub grid_points: usize,
    pub node_sets: usize,
    /// Distance of sampled points from either endpoint, relative to `|I|`.
    pub endpoint_offset: f64,
    /// Minimum pairwise node separation, relative to `|I|`.
    pub min_separation: f64,
    pub seed: u64,
    /// Certified witnesses kept per criterion.
    pub max_witnesses: usize,
    /// Big-precision re-evaluations attempted per criterion.
    pub max_certify: usize,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        SamplingPlan {
            grid_points: 257,
            node_sets: 200,
            endpoint_offset: 1e-6,
            min_separation: 1e-4,
            seed: 42,
            max_witnesses: 16,
            max_certify: 256,
        }
    }
}

impl SamplingPlan {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 3 {
            return Err(Error::InvalidInput("grid must have at least 3 points".into()));
        }
        if self.node_sets < 1 {
            return Err(Error::InvalidInput("at least one node set is required".into()));
        }
        if !(self.endpoint_offset > 0.0 && self.endpoint_offset < 0.25) {
            return Err(Error::InvalidInput("endpoint offset must lie in (0, 0.25)".into()));
        }
        if !(self.min_separation >= 0.0 && self.min_separation < 0.5) {
            return Err(Error::InvalidInput("node separation must lie in [0, 0.5)".into()));
        }
        if self.max_witnesses < 1 || self.max_certify < 1 {
            return Err(Error::InvalidInput("witness limits must be positive".into()));
        }
        Ok(())
    }

    /// The closed region `[lo + off, hi - off]` every sample is drawn from.
    pub fn region(&self, interval: &Interval) -> Result<(f64, f64)> {
        let w = interval.width();
        if !w.is_finite() || w <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "sampling needs a bounded interval of positive width, got {interval}"
            )));
        }
        let off = self.endpoint_offset * w;
        Ok((interval.lo + off, interval.hi - off))
    }

    /// `grid_points` equispaced points of the region.
    pub fn grid(&self, interval: &Interval) -> Result<Vec<f64>> {
        let (a, b) = self.region(interval)?;
        let m = self.grid_points - 1;
        Ok((0..=m).map(|k| map_unit(a, b, k as f64 / m as f64)).collect())
    }

    /// Random node sets followed by the Chebyshev sets, each sorted ascending.
    pub fn node_sets(&self, interval: &Interval, n: usize) -> Result<Vec<Vec<f64>>> {
        let (a, b) = self.region(interval)?;
        let sep = self.min_separation / (1.0 - 2.0 * self.endpoint_offset);
        if n > 1 && sep * (n - 1) as f64 >= 1.0 {
            return Err(Error::InvalidInput(format!(
                "{n} nodes cannot keep the minimum separation"
            )));
        }
        let mut sets = Vec::with_capacity(self.node_sets + 9);
        for index in 0..self.node_sets {
            let mut rng = item_rng(self.seed, index as u64);
            let mut us = draw_separated(&mut rng, n, sep)?;
            us.sort_by(f64::total_cmp);
            sets.push(us.into_iter().map(|u| map_unit(a, b, u)).collect());
        }
        for us in chebyshev_sets(n) {
            sets.push(us.into_iter().map(|u| map_unit(a, b, u)).collect());
        }
        Ok(sets)
    }
}

fn map_unit(a: f64, b: f64, u: f64) -> f64 {
    if u >= 1.0 {
        b
    } else {
        a + (b - a) * u
    }
}

fn draw_separated(rng: &mut ChaCha8Rng, n: usize, sep: f64) -> Result<Vec<f64>> {
    for _ in 0..MAX_DRAWS {
        let us: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let ok = (0..n).all(|i| (0..i).all(|j| (us[i] - us[j]).abs() >= sep));
        if ok {
            return Ok(us);
        }
    }
    Err(Error::InvalidInput("could not draw a separated node set".into()))
}

/// Chebyshev points at three scales and three centres, in unit coordinates.
pub fn chebyshev_sets(n: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for &s in &CHEBYSHEV_SCALES {
        let r = s / 2.0;
        for c in [r, 0.5, 1.0 - r] {
            let mut us: Vec<f64> = (0..n)
                .map(|k| {
                    let x = ((2 * k + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos();
                    (c + r * x).clamp(0.0, 1.0)
                })
                .collect();
            us.sort_by(f64::total_cmp);
            out.push(us);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_stays_interior() {
        let plan = SamplingPlan::default();
        let i = Interval::closed_open(0.0, 1.0).unwrap();
        let g = plan.grid(&i).unwrap();
        assert_eq!(g.len(), 257);
        assert!(g.iter().all(|&t| i.is_interior(t)));
        assert!((g[0] - 1e-6).abs() < 1e-18);
    }

    #[test]
    fn node_sets_are_separated_and_deterministic() {
        let plan = SamplingPlan::default();
        let i = Interval::open(0.0, 2.0).unwrap();
        let a = plan.node_sets(&i, 3).unwrap();
        assert_eq!(a, plan.node_sets(&i, 3).unwrap());
        assert_eq!(a.len(), 209);
        for s in &a[..200] {
            assert!(s.windows(2).all(|w| w[1] - w[0] >= 2e-4 * (1.0 - 2e-6) - 1e-15));
            assert!(s.iter().all(|&t| i.is_interior(t)));
        }
        let b = plan.clone().with_seed(43).node_sets(&i, 3).unwrap();
        assert_ne!(a[0], b[0]);
    }

    #[test]
    fn node_sets_scale_with_interval() {
        let plan = SamplingPlan::default();
        let a = plan.node_sets(&Interval::closed_open(0.0, 0.17).unwrap(), 2).unwrap();
        let b = plan.node_sets(&Interval::closed_open(0.0, 1.0).unwrap(), 2).unwrap();
        for (x, y) in a.iter().flatten().zip(b.iter().flatten()) {
            assert!((x / 0.17 - y).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_plans() {
        let i = Interval::real_line();
        assert!(SamplingPlan::default().grid(&i).is_err());
        let plan = SamplingPlan {
            grid_points: 2,
            ..SamplingPlan::default()
        };
        assert!(plan.validate().is_err());
    }

    #[test]
    fn streams_differ_by_index() {
        let x: f64 = item_rng(1, 0).gen();
        let y: f64 = item_rng(1, 1).gen();
        assert_ne!(x, y);
        assert_eq!(x, item_rng(1, 0).gen::<f64>());
    }
}
