//! Seeded generators for random instances.
//!
//! Spaces use integer grid coordinates, so every distance is the square root
//! of an integer. Radii are placed halfway between consecutive distinct
//! distances, which keeps every distance well away from every radius.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classifiers::{DeterministicClassifier, RandomizedClassifier};
use crate::domain::{Atom, FiniteMetricSpace, Label, LabeledDistribution, Neighborhoods, Norm};
use crate::scalar::{self, Scalar};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Positive weights with integer numerators in `1..=max_numerator`, normalized.
pub fn random_weights<S: Scalar, R: Rng + ?Sized>(rng: &mut R, m: usize, max_numerator: i64) -> Vec<S> {
    let nums: Vec<i64> = (0..m).map(|_| rng.gen_range(1..=max_numerator)).collect();
    let total: i64 = nums.iter().sum();
    nums.into_iter().map(|k| S::ratio(k, total)).collect()
}

/// `n` points with integer coordinates in `0..=max_coord` in `dim` dimensions.
pub fn random_grid_space<R: Rng + ?Sized>(rng: &mut R, n: usize, dim: usize, max_coord: i32) -> FiniteMetricSpace {
    let pts = (0..n).map(|_| (0..dim).map(|_| rng.gen_range(0..=max_coord) as f64).collect()).collect();
    FiniteMetricSpace::from_points(pts, Norm::L2).expect("grid points are finite")
}

/// A radius strictly between two consecutive distinct distances (or above the
/// largest one), chosen uniformly among those gaps.
pub fn safe_eps<R: Rng + ?Sized>(rng: &mut R, space: &FiniteMetricSpace) -> f64 {
    let mut d: Vec<f64> = space.distances().iter().flatten().copied().collect();
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    d.dedup();
    let k = rng.gen_range(0..d.len());
    if k + 1 < d.len() {
        (d[k] + d[k + 1]) / 2.0
    } else {
        d[k] + 0.5
    }
}

/// Random atoms over `n` points, at most `max_atoms` of them, masses with
/// integer numerators in `1..=6`.
pub fn random_distribution<S: Scalar, R: Rng + ?Sized>(rng: &mut R, n: usize, max_atoms: usize) -> LabeledDistribution<S> {
    let mut pairs: Vec<(usize, Label)> = (0..n).flat_map(|p| Label::BOTH.map(|l| (p, l))).collect();
    pairs.shuffle(rng);
    let count = rng.gen_range(1..=max_atoms.min(pairs.len()).max(1));
    let mut chosen = pairs[..count].to_vec();
    chosen.sort();
    let masses = random_weights::<S, _>(rng, count, 6);
    LabeledDistribution::new(chosen.into_iter().zip(masses).map(|((point, label), mass)| Atom { point, label, mass }).collect())
        .expect("generated masses are positive and normalized")
}

/// h with values k/den, den drawn from `1..=max_den`.
pub fn random_randomized<S: Scalar, R: Rng + ?Sized>(rng: &mut R, n: usize, max_den: i64) -> RandomizedClassifier<S> {
    let probs = (0..n)
        .map(|_| {
            let den = rng.gen_range(1..=max_den);
            S::ratio(rng.gen_range(0..=den), den)
        })
        .collect();
    RandomizedClassifier::new(probs).expect("k/den lies in [0, 1]")
}

pub fn random_deterministic<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DeterministicClassifier {
    DeterministicClassifier::new((0..n).map(|_| Label::from_bool(rng.gen_bool(0.5))).collect())
}

/// Row-stochastic matrix with integer row weights in `0..=max_weight`, each row
/// having a positive entry.
pub fn random_stochastic_rows<S: Scalar, R: Rng + ?Sized>(rng: &mut R, n: usize, max_weight: i64) -> Vec<Vec<S>> {
    (0..n)
        .map(|_| {
            let mut w: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=max_weight)).collect();
            if w.iter().all(|&x| x == 0) {
                let j = rng.gen_range(0..n);
                w[j] = 1;
            }
            let total: i64 = w.iter().sum();
            w.into_iter().map(|k| S::ratio(k, total)).collect()
        })
        .collect()
}

/// Integer payoff matrix with entries in `lo..=hi`.
pub fn random_payoff<S: Scalar, R: Rng + ?Sized>(rng: &mut R, m: usize, n: usize, lo: i64, hi: i64) -> Vec<Vec<S>> {
    (0..m).map(|_| (0..n).map(|_| S::ratio(rng.gen_range(lo..=hi), 1)).collect()).collect()
}

/// Random subsets of `0..n` as bit masks.
pub fn random_masks<R: Rng + ?Sized>(rng: &mut R, n: usize, count: usize) -> Vec<u128> {
    let full = if n == 128 { u128::MAX } else { (1u128 << n) - 1 };
    (0..count).map(|_| rng.gen::<u128>() & full).collect()
}

/// A full random instance: space, distribution, radius and balls.
#[derive(Debug, Clone)]
pub struct Instance<S> {
    pub space: FiniteMetricSpace,
    pub dist: LabeledDistribution<S>,
    pub eps: f64,
    pub nbhd: Neighborhoods,
}

/// Grid space with `1..=max_points` points in the plane on `0..=6`.
pub fn random_instance<S: Scalar, R: Rng + ?Sized>(rng: &mut R, max_points: usize) -> Instance<S> {
    let n = rng.gen_range(1..=max_points);
    let space = random_grid_space(rng, n, 2, 6);
    let eps = safe_eps(rng, &space);
    let dist = random_distribution(rng, n, 2 * n);
    let nbhd = space.neighborhoods(eps).expect("generated radius is valid");
    Instance { space, dist, eps, nbhd }
}

/// Smallest gap between `eps` and any pairwise distance.
pub fn eps_margin(space: &FiniteMetricSpace, eps: f64) -> f64 {
    space.distances().iter().flatten().map(|d| (d - eps).abs()).fold(f64::INFINITY, f64::min)
}

/// Sums to one, for sanity checks in generators.
pub fn is_normalized<S: Scalar>(w: &[S]) -> bool {
    scalar::sum(w.iter().cloned()).agrees(&S::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    #[test]
    fn generators_are_reproducible() {
        let a: Instance<Rational> = random_instance(&mut rng(7), 8);
        let b: Instance<Rational> = random_instance(&mut rng(7), 8);
        assert_eq!(a.space, b.space);
        assert_eq!(a.dist, b.dist);
        assert_eq!(a.eps, b.eps);
    }

    #[test]
    fn radius_keeps_margin() {
        let mut r = rng(11);
        for _ in 0..200 {
            let inst: Instance<Rational> = random_instance(&mut r, 8);
            assert!(eps_margin(&inst.space, inst.eps) > 1e-9);
        }
    }

    #[test]
    fn weights_and_rows_are_normalized() {
        let mut r = rng(5);
        for m in 1..8 {
            assert!(is_normalized(&random_weights::<Rational, _>(&mut r, m, 12)));
            for row in random_stochastic_rows::<Rational, _>(&mut r, m, 3) {
                assert!(is_normalized(&row));
            }
        }
    }
}
