//! Noise-injection classifiers over finite noise kernels and their
//! thresholded (randomized smoothing) counterparts.

use crate::classifiers::{adv_risk, Classifier, DeterministicClassifier, RandomizedClassifier};
use crate::derandomize::{best_of_profile, level_set, risk_profile, LevelSetSpec, RiskProfile};
use crate::domain::{FiniteMetricSpace, LabeledDistribution, Neighborhoods};
use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};

/// Denominator used when rationalizing Gaussian weights.
pub const GAUSSIAN_DENOMINATOR: f64 = 1e6;

/// Row i is the distribution of the perturbed point given input x_i.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseKernel<S> {
    rows: Vec<Vec<S>>,
}

impl<S: Scalar> NoiseKernel<S> {
    pub fn new(rows: Vec<Vec<S>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidKernel("no rows".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidKernel(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            if let Some(w) = row.iter().find(|w| **w < S::zero()) {
                return Err(Error::InvalidKernel(format!("row {i} has negative weight {w}")));
            }
            let total = scalar::sum(row.iter().cloned());
            if !total.agrees(&S::one()) {
                return Err(Error::InvalidKernel(format!("row {i} sums to {total}, not 1")));
            }
        }
        Ok(NoiseKernel { rows })
    }

    pub fn identity(n: usize) -> Self {
        NoiseKernel { rows: (0..n).map(|i| (0..n).map(|j| if i == j { S::one() } else { S::zero() }).collect()).collect() }
    }

    /// Every row uniform over the domain.
    pub fn uniform(n: usize) -> Self {
        NoiseKernel { rows: vec![vec![S::ratio(1, n as i64); n]; n] }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Vec<S>] {
        &self.rows
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[S]) -> Result<Vec<S>> {
        if v.len() != self.len() {
            return Err(Error::DomainMismatch { expected: self.len(), found: v.len() });
        }
        Ok(self.rows.iter().map(|row| scalar::sum(row.iter().zip(v).map(|(a, b)| a.clone() * b.clone()))).collect())
    }

    /// Matrix product, so that `(K·L) v = K (L v)`.
    pub fn compose(&self, other: &NoiseKernel<S>) -> Result<NoiseKernel<S>> {
        let n = self.len();
        if other.len() != n {
            return Err(Error::DomainMismatch { expected: n, found: other.len() });
        }
        let rows = (0..n)
            .map(|i| (0..n).map(|j| scalar::sum((0..n).map(|k| self.rows[i][k].clone() * other.rows[k][j].clone()))).collect())
            .collect();
        Ok(NoiseKernel { rows })
    }
}

/// Truncated Gaussian weights exp(−d²/2σ²) for d ≤ radius, rounded to
/// multiples of 10⁻⁶ and renormalized exactly.
pub fn gaussian_grid_kernel<S: Scalar>(space: &FiniteMetricSpace, sigma: f64, radius: f64) -> Result<NoiseKernel<S>> {
    if space.coords().is_none() {
        return Err(Error::InvalidKernel("Gaussian kernel needs point coordinates".into()));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidKernel(format!("sigma must be positive, got {sigma}")));
    }
    let n = space.len();
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let ints: Vec<i64> = (0..n)
            .map(|j| {
                let d = space.distance(i, j);
                if d <= radius {
                    (GAUSSIAN_DENOMINATOR * (-d * d / (2.0 * sigma * sigma)).exp()).round() as i64
                } else {
                    0
                }
            })
            .collect();
        let total: i64 = ints.iter().sum();
        if total == 0 {
            return Err(Error::InvalidKernel(format!("row {i} is empty for truncation radius {radius}")));
        }
        rows.push(ints.into_iter().map(|k| S::ratio(k, total)).collect());
    }
    NoiseKernel::new(rows)
}

/// x_i ↦ Σ_j K[i][j] f(x_j).
pub fn noise_inject<S: Scalar>(f: &DeterministicClassifier, kernel: &NoiseKernel<S>) -> Result<RandomizedClassifier<S>> {
    let bits: Vec<S> = (0..Classifier::<S>::len(f)).map(|i| f.prob_one(i)).collect();
    RandomizedClassifier::new(kernel.apply(&bits)?)
}

/// 1{(noise-injected f)(x) > α}.
pub fn rs_classifier<S: Scalar>(f: &DeterministicClassifier, kernel: &NoiseKernel<S>, alpha: &S) -> Result<DeterministicClassifier> {
    let spec = LevelSetSpec::strict(alpha.clone())?;
    let h = noise_inject(f, kernel)?;
    let g = DeterministicClassifier::from_fn(h.len(), |i| h.probs()[i] > *alpha);
    debug_assert_eq!(g, level_set(&h, &spec));
    Ok(g)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingReport<S> {
    pub ni_risk: S,
    pub curve: RiskProfile<S>,
    pub best_alpha: S,
    pub best_risk: S,
}

impl<S: Scalar> SmoothingReport<S> {
    pub fn dominates(&self) -> bool {
        self.best_risk <= self.ni_risk || self.best_risk.agrees(&self.ni_risk)
    }

    pub fn strictly_dominates(&self) -> bool {
        self.best_risk < self.ni_risk && !self.best_risk.agrees(&self.ni_risk)
    }
}

/// Noise-injection risk against the α-sweep of its smoothed thresholds.
pub fn rs_dominance_report<S: Scalar>(
    f: &DeterministicClassifier,
    kernel: &NoiseKernel<S>,
    d: &LabeledDistribution<S>,
    nbhd: &Neighborhoods,
) -> Result<SmoothingReport<S>> {
    let h = noise_inject(f, kernel)?;
    let ni_risk = adv_risk(&h, d, nbhd)?;
    let curve = risk_profile(&h, d, nbhd)?;
    let (best_alpha, best_risk) = best_of_profile(&curve);
    Ok(SmoothingReport { ni_risk, curve, best_alpha, best_risk })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Label, Norm};
    use crate::random;
    use crate::Rational;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn grid(n: usize) -> FiniteMetricSpace {
        FiniteMetricSpace::from_points((0..n).map(|i| vec![i as f64]).collect(), Norm::L2).unwrap()
    }

    #[test]
    fn kernel_validation() {
        assert!(NoiseKernel::new(vec![vec![q(1, 2), q(1, 3)], vec![q(0, 1), q(1, 1)]]).is_err());
        assert!(NoiseKernel::new(vec![vec![q(3, 2), q(-1, 2)], vec![q(0, 1), q(1, 1)]]).is_err());
        assert!(NoiseKernel::<Rational>::new(vec![vec![q(1, 1)]]).is_ok());
    }

    #[test]
    fn tiny_sigma_gives_identity() {
        let k: NoiseKernel<Rational> = gaussian_grid_kernel(&grid(4), 0.3, 0.5).unwrap();
        assert_eq!(k, NoiseKernel::identity(4));
    }

    #[test]
    fn symmetric_neighbors_get_equal_weight() {
        let k: NoiseKernel<Rational> = gaussian_grid_kernel(&grid(3), 1.0, 1.5).unwrap();
        assert_eq!(k.rows()[1][0], k.rows()[1][2]);
    }

    #[test]
    fn gaussian_rows_match_formula() {
        let k: NoiseKernel<Rational> = gaussian_grid_kernel(&grid(5), 1.0, 2.0).unwrap();
        for i in 0..5 {
            let raw: Vec<f64> = (0..5)
                .map(|j| {
                    let d = (i as f64 - j as f64).abs();
                    if d <= 2.0 {
                        (-d * d / 2.0).exp()
                    } else {
                        0.0
                    }
                })
                .collect();
            let total: f64 = raw.iter().sum();
            for j in 0..5 {
                assert!((k.rows()[i][j].as_f64() - raw[j] / total).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn gaussian_errors() {
        assert!(gaussian_grid_kernel::<Rational>(&grid(3), 1.0, -1.0).is_err());
        assert!(gaussian_grid_kernel::<Rational>(&grid(3), 0.0, 1.0).is_err());
        let abstract_space = FiniteMetricSpace::from_distances(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(gaussian_grid_kernel::<Rational>(&abstract_space, 1.0, 1.0).is_err());
    }

    #[test]
    fn noise_inject_examples() {
        let f = DeterministicClassifier::from_bits(&[1, 0, 1, 1]).unwrap();
        let id = NoiseKernel::<Rational>::identity(4);
        assert_eq!(noise_inject(&f, &id).unwrap(), f.to_randomized());
        let ones = DeterministicClassifier::constant(4, Label::One);
        let k: NoiseKernel<Rational> = gaussian_grid_kernel(&grid(4), 1.0, 3.0).unwrap();
        assert!(noise_inject(&ones, &k).unwrap().probs().iter().all(|p| *p == q(1, 1)));
        let u = NoiseKernel::<Rational>::uniform(4);
        assert!(noise_inject(&f, &u).unwrap().probs().iter().all(|p| *p == q(3, 4)));
        assert_eq!(rs_classifier(&f, &id, &q(1, 2)).unwrap(), f);
        assert_eq!(rs_classifier(&ones, &k, &q(9, 10)).unwrap(), ones);
    }

    #[test]
    fn identity_kernel_curve_is_flat() {
        let space = grid(4);
        let nb = space.neighborhoods(1.0).unwrap();
        let mut r = random::rng(2);
        let d = random::random_distribution::<Rational, _>(&mut r, 4, 6);
        let f = DeterministicClassifier::from_bits(&[0, 1, 1, 0]).unwrap();
        let rep = rs_dominance_report(&f, &NoiseKernel::identity(4), &d, &nb).unwrap();
        assert!(rep.curve.is_constant());
        assert_eq!(rep.best_risk, rep.ni_risk);
    }

    proptest! {
        #[test]
        fn smoothing_properties(seed in any::<u64>(), n in 1usize..7) {
            let mut r = random::rng(seed);
            let space = random::random_grid_space(&mut r, n, 2, 5);
            let eps = random::safe_eps(&mut r, &space);
            let nb = space.neighborhoods(eps).unwrap();
            let d = random::random_distribution::<Rational, _>(&mut r, n, 2 * n);
            let f = random::random_deterministic(&mut r, n);
            let k = NoiseKernel::new(random::random_stochastic_rows::<Rational, _>(&mut r, n, 3)).unwrap();
            let rep = rs_dominance_report(&f, &k, &d, &nb).unwrap();
            prop_assert!(rep.dominates());
            let h = noise_inject(&f, &k).unwrap();
            for j in 0..=8 {
                let alpha = q(j, 8);
                let g = rs_classifier(&f, &k, &alpha).unwrap();
                prop_assert_eq!(g, level_set(&h, &LevelSetSpec::strict(alpha).unwrap()));
            }
            // K(K f) == (K K) f
            let twice = k.apply(h.probs()).unwrap();
            let composed = noise_inject(&f, &k.compose(&k).unwrap()).unwrap();
            prop_assert_eq!(&twice[..], composed.probs());
        }
    }
}
