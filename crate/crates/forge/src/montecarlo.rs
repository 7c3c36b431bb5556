//! Approximation-ratio estimates: seeded Monte Carlo over bucketed rank
//! vectors, and exact enumeration over all orders for small graphs.

use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use ranking_core::graph::{maximum_matching_size, permutations};
use ranking_core::{BucketedRankVector, Engine, Graph, Permutation, Vertex};

use crate::error::{ForgeError, Result};

/// z for a two-sided 95% normal interval.
const Z_95: f64 = 1.959_963_984_540_054;

/// Largest graph the exact mode will enumerate (n! orders).
pub const EXACT_VERTEX_LIMIT: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioEstimate {
    pub mean: f64,
    pub samples: u64,
    /// 95% half-width from the sample variance; 0 for exact results.
    pub half_width: f64,
    pub seed: u64,
    pub k: u32,
    pub optimum: usize,
}

impl RatioEstimate {
    pub fn lower(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.half_width
    }

    pub fn contains(&self, value: f64) -> bool {
        (self.lower()..=self.upper()).contains(&value)
    }
}

/// E|R(σ)| / |M*| as a fraction, over every order of the vertices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactRatio {
    pub numerator: u64,
    pub denominator: u64,
    pub orders: u64,
    pub optimum: usize,
}

impl ExactRatio {
    pub fn ratio(&self) -> Ratio<u64> {
        Ratio::new(self.numerator, self.denominator)
    }

    pub fn value(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

fn optimum(g: &Graph) -> Result<usize> {
    let size = match g.designated_matching() {
        Some(m) => m.size(),
        None => maximum_matching_size(g)?,
    };
    if size == 0 {
        return Err(ForgeError::EmptyOptimum);
    }
    Ok(size)
}

/// Independent generator for one trial, so results do not depend on how
/// trials are split across workers.
fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Mean of |R(σ)|/|M*| over `trials` seeded bucketed draws.
pub fn monte_carlo_ratio(g: &Graph, trials: u64, k: u32, seed: u64) -> Result<RatioEstimate> {
    if trials < 2 {
        return Err(ForgeError::InvalidParameter(format!(
            "need at least 2 trials for a variance, got {trials}"
        )));
    }
    if k == 0 {
        return Err(ForgeError::InvalidParameter("k must be ≥ 1".into()));
    }
    let opt = optimum(g)?;
    let n = g.vertex_count();
    let vertices: Vec<Vertex> = g.vertices().collect();
    // integer sums keep the reduction order-independent
    let (sum, sum_sq) = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(u64, u64)> {
            let mut rng = trial_rng(seed, t);
            let rv = BucketedRankVector::sample_with(&vertices, n, k, &mut rng)?;
            let size = Engine::FAITHFUL.matching(g, &rv, &[])?.size() as u64;
            Ok((size, size * size))
        })
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    let count = trials as f64;
    let opt_f = opt as f64;
    let mean = sum as f64 / count / opt_f;
    let mean_sq = sum_sq as f64 / count / (opt_f * opt_f);
    let variance = ((mean_sq - mean * mean) * count / (count - 1.0)).max(0.0);
    Ok(RatioEstimate {
        mean,
        samples: trials,
        half_width: Z_95 * (variance / count).sqrt(),
        seed,
        k,
        optimum: opt,
    })
}

/// Every order of the vertices with equal weight.
pub fn exact_ratio(g: &Graph) -> Result<ExactRatio> {
    let n = g.vertex_count();
    if n > EXACT_VERTEX_LIMIT {
        return Err(ranking_core::Error::SizeLimit {
            n,
            limit: EXACT_VERTEX_LIMIT,
        }
        .into());
    }
    let opt = optimum(g)?;
    let orders = permutations(n);
    let total = orders
        .par_iter()
        .map(|order| -> Result<u64> {
            let p = Permutation::from_order(n, order)?;
            Ok(Engine::FAITHFUL.matching(g, &p, &[])?.size() as u64)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let count = orders.len() as u64;
    Ok(ExactRatio {
        numerator: total,
        denominator: count * opt as u64,
        orders: count,
        optimum: opt,
    })
}

impl From<&ExactRatio> for RatioEstimate {
    fn from(e: &ExactRatio) -> Self {
        RatioEstimate {
            mean: e.value(),
            samples: e.orders,
            half_width: 0.0,
            seed: 0,
            k: 0,
            optimum: e.optimum,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ranking_core::graph::{appendix_counterexample, generate_family, Family};

    fn family(f: Family) -> Graph {
        generate_family(&f).unwrap()
    }

    #[test]
    fn complete_graphs_are_perfect() {
        for n in [2, 4] {
            let g = family(Family::Complete { n });
            let mc = monte_carlo_ratio(&g, 500, 3, 1).unwrap();
            assert_eq!(mc.mean, 1.0);
            assert_eq!(mc.half_width, 0.0);
            assert_eq!(exact_ratio(&g).unwrap().ratio(), Ratio::new(1, 1));
        }
    }

    #[test]
    fn path_of_four_exact() {
        let e = exact_ratio(&family(Family::Path { n: 4 })).unwrap();
        assert_eq!(e.ratio(), Ratio::new(7, 8));
        assert_eq!(e.orders, 24);
    }

    #[test]
    fn hand_count_on_path_of_three() {
        // P3 a-b-c: every order matches exactly one edge
        let e = exact_ratio(&family(Family::Path { n: 3 })).unwrap();
        assert_eq!(e.ratio(), Ratio::new(1, 1));
    }

    #[test]
    fn monte_carlo_brackets_exact() {
        for g in [family(Family::Path { n: 4 }), appendix_counterexample().unwrap()] {
            let exact = exact_ratio(&g).unwrap().value();
            let mc = monte_carlo_ratio(&g, 20_000, 4, 11).unwrap();
            // two half-widths is about four standard errors
            assert!((mc.mean - exact).abs() <= 2.0 * mc.half_width, "{mc:?} vs {exact}");
            assert!(mc.half_width > 0.0);
        }
    }

    #[test]
    fn seeded_runs_repeat() {
        let g = family(Family::Cycle { n: 6 });
        let a = monte_carlo_ratio(&g, 1000, 5, 99).unwrap();
        let b = monte_carlo_ratio(&g, 1000, 5, 99).unwrap();
        assert_eq!(a, b);
        let c = monte_carlo_ratio(&g, 1000, 5, 100).unwrap();
        assert_ne!(a.mean, c.mean);
    }

    #[test]
    fn rejects_bad_inputs() {
        let single = Graph::new(1, &[]).unwrap();
        assert!(matches!(monte_carlo_ratio(&single, 10, 2, 0), Err(ForgeError::EmptyOptimum)));
        let k2 = family(Family::Complete { n: 2 });
        assert!(monte_carlo_ratio(&k2, 1, 2, 0).is_err());
        assert!(monte_carlo_ratio(&k2, 10, 0, 0).is_err());
        assert!(exact_ratio(&family(Family::Path { n: 11 })).is_err());
    }
}
