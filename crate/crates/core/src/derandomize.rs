//! Level-set classifiers, the breakpoint decomposition of a randomized
//! classifier's adversarial risk, and Monte-Carlo classifiers.

use crate::classifiers::{adv_risk, zero_one_loss, Classifier, DeterministicClassifier, RandomizedClassifier};
use crate::domain::{Label, LabeledDistribution, Neighborhoods};
use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparator {
    /// h(x) > α
    Strict,
    /// h(x) ≥ α
    Weak,
}

impl Comparator {
    pub fn holds<S: Scalar>(self, value: &S, alpha: &S) -> bool {
        match self {
            Comparator::Strict => value > alpha,
            Comparator::Weak => value >= alpha,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetSpec<S> {
    pub alpha: S,
    pub comparator: Comparator,
}

impl<S: Scalar> LevelSetSpec<S> {
    pub fn new(alpha: S, comparator: Comparator) -> Result<Self> {
        if !scalar::in_unit_interval(&alpha) {
            return Err(Error::InvalidProbability(format!("threshold {alpha} is outside [0, 1]")));
        }
        Ok(LevelSetSpec { alpha, comparator })
    }

    pub fn strict(alpha: S) -> Result<Self> {
        Self::new(alpha, Comparator::Strict)
    }
}

/// 1{h > α} or 1{h ≥ α}.
pub fn level_set<S: Scalar, C: Classifier<S> + ?Sized>(h: &C, spec: &LevelSetSpec<S>) -> DeterministicClassifier {
    DeterministicClassifier::from_fn(h.len(), |i| spec.comparator.holds(&h.prob_one(i), &spec.alpha))
}

/// The step function α ↦ R_ε(h^α) on [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct RiskProfile<S> {
    /// 0 = v_0 < v_1 < … < v_m = 1.
    pub breakpoints: Vec<S>,
    /// Risk of the strict level set on the open interval (v_i, v_{i+1}).
    pub interval_risks: Vec<S>,
    /// Risk of the weak level set at each breakpoint.
    pub point_risks_weak: Vec<S>,
}

impl<S: Scalar> RiskProfile<S> {
    pub fn intervals(&self) -> impl Iterator<Item = (&S, &S, &S)> {
        self.breakpoints.windows(2).zip(&self.interval_risks).map(|(w, r)| (&w[0], &w[1], r))
    }

    pub fn midpoint(&self, i: usize) -> S {
        (self.breakpoints[i].clone() + self.breakpoints[i + 1].clone()) / S::from_u8(2).unwrap()
    }

    /// Σ (v_{i+1} − v_i) · R_i.
    pub fn integral(&self) -> S {
        scalar::sum(self.intervals().map(|(lo, hi, r)| (hi.clone() - lo.clone()) * r.clone()))
    }

    pub fn min_risk(&self) -> S {
        scalar::min_of(self.interval_risks.iter().cloned()).expect("profile has at least one interval")
    }

    /// Whether α ↦ R_ε(h^α) takes at least two values.
    pub fn is_constant(&self) -> bool {
        self.interval_risks.iter().all(|r| *r == self.interval_risks[0])
    }
}

/// Sorted distinct values of h together with 0 and 1.
pub fn breakpoints<S: Scalar, C: Classifier<S> + ?Sized>(h: &C) -> Vec<S> {
    let mut v: Vec<S> = (0..h.len()).map(|i| h.prob_one(i)).collect();
    v.push(S::zero());
    v.push(S::one());
    v.sort_by(scalar::cmp);
    v.dedup();
    v
}

pub fn risk_profile<S: Scalar, C: Classifier<S> + ?Sized>(
    h: &C,
    d: &LabeledDistribution<S>,
    nbhd: &Neighborhoods,
) -> Result<RiskProfile<S>> {
    let breakpoints = breakpoints(h);
    let two = S::from_u8(2).unwrap();
    let interval_risks = breakpoints
        .windows(2)
        .map(|w| {
            let mid = (w[0].clone() + w[1].clone()) / two.clone();
            adv_risk(&level_set(h, &LevelSetSpec { alpha: mid, comparator: Comparator::Strict }), d, nbhd)
        })
        .collect::<Result<Vec<S>>>()?;
    let point_risks_weak = breakpoints
        .iter()
        .map(|v| adv_risk(&level_set(h, &LevelSetSpec { alpha: v.clone(), comparator: Comparator::Weak }), d, nbhd))
        .collect::<Result<Vec<S>>>()?;
    Ok(RiskProfile { breakpoints, interval_risks, point_risks_weak })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck<S> {
    pub lhs: S,
    pub rhs: S,
    pub equal: bool,
}

impl<S: Scalar> IdentityCheck<S> {
    pub fn new(lhs: S, rhs: S) -> Self {
        let equal = lhs.agrees(&rhs);
        IdentityCheck { lhs, rhs, equal }
    }
}

/// Compares R_ε(h) with the exact integral of α ↦ R_ε(h^α).
pub fn integral_identity<S: Scalar, C: Classifier<S> + ?Sized>(
    h: &C,
    d: &LabeledDistribution<S>,
    nbhd: &Neighborhoods,
) -> Result<IdentityCheck<S>> {
    let lhs = adv_risk(h, d, nbhd)?;
    let rhs = risk_profile(h, d, nbhd)?.integral();
    Ok(IdentityCheck::new(lhs, rhs))
}

/// Midpoint of the leftmost interval with minimal level-set risk, and that risk.
pub fn best_level_set<S: Scalar, C: Classifier<S> + ?Sized>(
    h: &C,
    d: &LabeledDistribution<S>,
    nbhd: &Neighborhoods,
) -> Result<(S, S)> {
    let profile = risk_profile(h, d, nbhd)?;
    Ok(best_of_profile(&profile))
}

pub fn best_of_profile<S: Scalar>(profile: &RiskProfile<S>) -> (S, S) {
    let mut best = 0;
    for (i, r) in profile.interval_risks.iter().enumerate() {
        if *r < profile.interval_risks[best] {
            best = i;
        }
    }
    (profile.midpoint(best), profile.interval_risks[best].clone())
}

/// Points of `ball` at which the loss against label `y` is maximal, sorted.
pub fn loss_argmax<S: Scalar, C: Classifier<S> + ?Sized>(c: &C, ball: &[usize], y: Label) -> Vec<usize> {
    let losses: Vec<S> = ball.iter().map(|&j| zero_one_loss(c, j, y)).collect();
    let Some(top) = scalar::max_of(losses.iter().cloned()) else {
        return Vec::new();
    };
    ball.iter().zip(&losses).filter(|(_, l)| **l == top).map(|(&j, _)| j).collect()
}

/// Every maximizer of the h-loss over the ball around `x` also maximizes the
/// loss of each level set h^α, for α at every breakpoint and every interval midpoint.
pub fn attack_argmax_inclusion_check<S: Scalar, C: Classifier<S> + ?Sized>(
    h: &C,
    nbhd: &Neighborhoods,
    x: usize,
    y: Label,
) -> bool {
    let ball = nbhd.ball(x);
    let h_arg = loss_argmax(h, ball, y);
    let bps = breakpoints(h);
    let two = S::from_u8(2).unwrap();
    let mids = bps.windows(2).map(|w| (w[0].clone() + w[1].clone()) / two.clone());
    let mut alphas: Vec<S> = bps.iter().cloned().chain(mids).collect();
    alphas.sort_by(scalar::cmp);
    alphas.into_iter().all(|alpha| {
        let f = level_set(h, &LevelSetSpec { alpha, comparator: Comparator::Strict });
        let f_arg = loss_argmax::<S, _>(&f, ball, y);
        h_arg.iter().all(|j| f_arg.contains(j))
    })
}

/// k draws, predict 1 when more than t of them are 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinomialParams {
    k: u32,
    t: u32,
}

impl BinomialParams {
    pub fn new(k: u32, t: u32) -> Result<Self> {
        if k == 0 || t >= k {
            return Err(Error::InvalidBinomial { k, t });
        }
        Ok(BinomialParams { k, t })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn t(&self) -> u32 {
        self.t
    }
}

fn binomial_coefficient<S: Scalar>(n: u32, r: u32) -> S {
    let mut c = S::one();
    for i in 0..r {
        c = c * S::from_u32(n - i).unwrap() / S::from_u32(i + 1).unwrap();
    }
    c
}

fn power<S: Scalar>(base: &S, exp: u32) -> S {
    (0..exp).fold(S::one(), |acc, _| acc * base.clone())
}

/// F_{k,t}(p) = P[Binomial(k, p) ≤ t].
pub fn binomial_cdf<S: Scalar>(params: BinomialParams, p: &S) -> Result<S> {
    if !scalar::in_unit_interval(p) {
        return Err(Error::InvalidProbability(format!("{p} is outside [0, 1]")));
    }
    let q = S::one() - p.clone();
    Ok(scalar::sum((0..=params.t).map(|i| {
        binomial_coefficient::<S>(params.k, i) * power(p, i) * power(&q, params.k - i)
    })))
}

/// x ↦ 1 − F_{k,t}(h(x)).
pub fn monte_carlo_classifier<S: Scalar, C: Classifier<S> + ?Sized>(
    h: &C,
    params: BinomialParams,
) -> Result<RandomizedClassifier<S>> {
    let probs = (0..h.len())
        .map(|i| binomial_cdf(params, &h.prob_one(i)).map(|f| S::one() - f))
        .collect::<Result<Vec<_>>>()?;
    RandomizedClassifier::new(probs)
}

/// Checks h^α = (h_{k,t})^{1−F_{k,t}(α)} pointwise.
pub fn mc_levelset_identity<S: Scalar, C: Classifier<S> + ?Sized>(h: &C, params: BinomialParams, alpha: &S) -> Result<bool> {
    let lhs = level_set(h, &LevelSetSpec::strict(alpha.clone())?);
    let mc = monte_carlo_classifier(h, params)?;
    let shifted = S::one() - binomial_cdf(params, alpha)?;
    let rhs = level_set(&mc, &LevelSetSpec::strict(shifted)?);
    Ok(lhs == rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Atom, FiniteMetricSpace, Norm};
    use crate::Rational;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn h(vals: &[(i64, i64)]) -> RandomizedClassifier<Rational> {
        RandomizedClassifier::new(vals.iter().map(|&(n, d)| q(n, d)).collect()).unwrap()
    }

    fn line(xs: &[f64]) -> FiniteMetricSpace {
        FiniteMetricSpace::from_points(xs.iter().map(|&x| vec![x]).collect(), Norm::L2).unwrap()
    }

    #[test]
    fn level_set_examples() {
        let one = h(&[(1, 1), (1, 1)]);
        assert_eq!(level_set(&one, &LevelSetSpec::strict(q(0, 1)).unwrap()).bits(), vec![1, 1]);
        assert_eq!(level_set(&one, &LevelSetSpec::strict(q(1, 1)).unwrap()).bits(), vec![0, 0]);
        let two = h(&[(1, 4), (3, 4)]);
        assert_eq!(level_set(&two, &LevelSetSpec::strict(q(1, 2)).unwrap()).bits(), vec![0, 1]);
        assert_eq!(level_set(&two, &LevelSetSpec::new(q(3, 4), Comparator::Weak).unwrap()).bits(), vec![0, 1]);
        assert!(LevelSetSpec::strict(q(2, 1)).is_err());
    }

    #[test]
    fn profile_of_constant_half() {
        let s = line(&[0.0, 1.0]);
        let nb = s.neighborhoods(0.0).unwrap();
        let d = LabeledDistribution::new(vec![
            Atom { point: 0, label: Label::Zero, mass: q(1, 2) },
            Atom { point: 1, label: Label::One, mass: q(1, 2) },
        ])
        .unwrap();
        let hh = h(&[(1, 2), (1, 2)]);
        let p = risk_profile(&hh, &d, &nb).unwrap();
        assert_eq!(p.breakpoints, vec![q(0, 1), q(1, 2), q(1, 1)]);
        assert_eq!(p.interval_risks.len(), 2);
        let check = integral_identity(&hh, &d, &nb).unwrap();
        assert!(check.equal);
        assert_eq!(check.lhs, q(1, 2));
    }

    #[test]
    fn deterministic_profile_has_one_interval() {
        let s = line(&[0.0, 1.0, 2.0]);
        let nb = s.neighborhoods(1.0).unwrap();
        let d = LabeledDistribution::new(vec![
            Atom { point: 0, label: Label::Zero, mass: q(1, 2) },
            Atom { point: 2, label: Label::One, mass: q(1, 2) },
        ])
        .unwrap();
        let f = h(&[(0, 1), (1, 1), (1, 1)]);
        let p = risk_profile(&f, &d, &nb).unwrap();
        assert_eq!(p.breakpoints.len(), 2);
        assert_eq!(p.interval_risks[0], adv_risk(&f, &d, &nb).unwrap());
        assert_eq!(best_level_set(&f, &d, &nb).unwrap(), (q(1, 2), p.interval_risks[0].clone()));
    }

    #[test]
    fn binomial_examples() {
        let p11 = BinomialParams::new(1, 0).unwrap();
        assert_eq!(binomial_cdf(p11, &q(1, 3)).unwrap(), q(2, 3));
        let p31 = BinomialParams::new(3, 1).unwrap();
        assert_eq!(binomial_cdf(p31, &q(1, 2)).unwrap(), q(1, 2));
        assert_eq!(binomial_cdf(BinomialParams::new(2, 0).unwrap(), &q(1, 3)).unwrap(), q(4, 9));
        assert!(BinomialParams::new(3, 3).is_err());
        assert!(BinomialParams::new(0, 0).is_err());
        assert!(binomial_cdf(p31, &q(3, 2)).is_err());
        let mc = monte_carlo_classifier(&h(&[(0, 1), (1, 1), (1, 2)]), p31).unwrap();
        assert_eq!(mc.probs(), &[q(0, 1), q(1, 1), q(1, 2)]);
        assert!(mc_levelset_identity(&h(&[(1, 4), (3, 4)]), p31, &q(1, 2)).unwrap());
        assert!(mc_levelset_identity(&h(&[(1, 4), (3, 4)]), p31, &q(1, 1)).unwrap());
    }

    #[test]
    fn binomial_cdf_matches_outcome_enumeration() {
        // sum over all 2^k outcome strings
        for k in 1..=6u32 {
            for t in 0..k {
                let params = BinomialParams::new(k, t).unwrap();
                let p = q(2, 7);
                let mut want = q(0, 1);
                for mask in 0u32..(1 << k) {
                    let ones = mask.count_ones();
                    if ones <= t {
                        want += power(&p, ones) * power(&(q(1, 1) - p.clone()), k - ones);
                    }
                }
                assert_eq!(binomial_cdf(params, &p).unwrap(), want);
            }
        }
    }

    #[test]
    fn argmax_inclusion_singleton_and_unique() {
        let s = line(&[0.0, 1.0, 2.0]);
        let hh = h(&[(1, 5), (3, 5), (2, 5)]);
        let nb0 = s.neighborhoods(0.0).unwrap();
        assert!(attack_argmax_inclusion_check(&hh, &nb0, 1, Label::Zero));
        let nb = s.neighborhoods(1.0).unwrap();
        assert_eq!(loss_argmax(&hh, nb.ball(0), Label::Zero), vec![1]);
        assert!(attack_argmax_inclusion_check(&hh, &nb, 0, Label::Zero));
        assert!(attack_argmax_inclusion_check(&hh, &nb, 2, Label::One));
    }

    fn instance() -> impl Strategy<Value = (Vec<i32>, Vec<(usize, u8, i64)>, Vec<i64>, i64)> {
        (1usize..7).prop_flat_map(|n| {
            (
                proptest::collection::vec(0i32..10, n),
                proptest::collection::btree_map((0..n, 0u8..2), 1i64..6, 1..6)
                    .prop_map(|m| m.into_iter().map(|((p, l), w)| (p, l, w)).collect()),
                proptest::collection::vec(0i64..=20, n),
                1i64..=20,
            )
        })
    }

    fn build(
        coords: &[i32],
        atoms: &[(usize, u8, i64)],
        nums: &[i64],
        den: i64,
    ) -> (FiniteMetricSpace, LabeledDistribution<Rational>, RandomizedClassifier<Rational>) {
        let space = line(&coords.iter().map(|&c| c as f64).collect::<Vec<_>>());
        let total: i64 = atoms.iter().map(|a| a.2).sum();
        let d = LabeledDistribution::new(
            atoms.iter().map(|&(p, l, w)| Atom { point: p, label: Label::from_bit(l).unwrap(), mass: q(w, total) }).collect(),
        )
        .unwrap();
        let hh = RandomizedClassifier::new(nums.iter().map(|&k| q(k.min(den), den)).collect()).unwrap();
        (space, d, hh)
    }

    proptest! {
        #[test]
        fn integral_identity_and_profile_structure((c, a, nums, den) in instance(), eps in 0u8..5) {
            let (space, d, hh) = build(&c, &a, &nums, den);
            let nb = space.neighborhoods(eps as f64 + 0.5).unwrap();
            let check = integral_identity(&hh, &d, &nb).unwrap();
            prop_assert!(check.equal);
            let p = risk_profile(&hh, &d, &nb).unwrap();
            for i in 0..p.interval_risks.len() {
                prop_assert_eq!(&p.interval_risks[i], &p.point_risks_weak[i + 1]);
                // a second interior point gives the same risk
                let lo = p.breakpoints[i].clone();
                let hi = p.breakpoints[i + 1].clone();
                let other = lo.clone() + (hi - lo) / q(3, 1);
                let r = adv_risk(&level_set(&hh, &LevelSetSpec::strict(other).unwrap()), &d, &nb).unwrap();
                prop_assert_eq!(&r, &p.interval_risks[i]);
            }
            let (alpha, best) = best_of_profile(&p);
            prop_assert!(best <= check.lhs);
            if !p.is_constant() {
                prop_assert!(best < check.lhs);
            }
            prop_assert!(scalar::in_unit_interval(&alpha));
        }

        #[test]
        fn profile_matches_dense_grid((c, a, nums, den) in instance(), eps in 0u8..5) {
            let (space, d, hh) = build(&c, &a, &nums, den);
            let nb = space.neighborhoods(eps as f64 + 0.5).unwrap();
            let p = risk_profile(&hh, &d, &nb).unwrap();
            // breakpoints are multiples of 1/den; odd multiples of 1/(2·den) hit every interval interior
            let grid = 2 * den;
            let mut grid_min: Option<Rational> = None;
            for j in (1..grid).step_by(2) {
                let alpha = q(j, grid);
                let r = adv_risk(&level_set(&hh, &LevelSetSpec::strict(alpha.clone()).unwrap()), &d, &nb).unwrap();
                let idx = p.breakpoints.windows(2).position(|w| w[0] < alpha && alpha < w[1]).unwrap();
                prop_assert_eq!(&r, &p.interval_risks[idx]);
                grid_min = Some(match grid_min { Some(m) if m <= r => m, _ => r });
            }
            prop_assert_eq!(grid_min.unwrap(), p.min_risk());
        }

        #[test]
        fn argmax_inclusion_always_holds((c, a, nums, den) in instance(), eps in 0u8..5, x in 0usize..7, y in 0u8..2) {
            let (space, _, hh) = build(&c, &a, &nums, den);
            let nb = space.neighborhoods(eps as f64 + 0.5).unwrap();
            prop_assert!(attack_argmax_inclusion_check(&hh, &nb, x % space.len(), Label::from_bit(y).unwrap()));
        }

        #[test]
        fn level_sets_are_antitone(nums in proptest::collection::vec(0i64..=16, 1..10), a1 in 0i64..=16, a2 in 0i64..=16) {
            let hh = RandomizedClassifier::new(nums.iter().map(|&k| q(k, 16)).collect()).unwrap();
            let (lo, hi) = (a1.min(a2), a1.max(a2));
            for cmp in [Comparator::Strict, Comparator::Weak] {
                let low = level_set(&hh, &LevelSetSpec::new(q(lo, 16), cmp).unwrap());
                let high = level_set(&hh, &LevelSetSpec::new(q(hi, 16), cmp).unwrap());
                prop_assert!(high.le(&low));
            }
        }

        #[test]
        fn monte_carlo_transform_is_increasing(k in 1u32..9, t in 0u32..8, a in 0i64..=30, b in 0i64..=30) {
            prop_assume!(t < k && a != b);
            let params = BinomialParams::new(k, t).unwrap();
            let (lo, hi) = (q(a.min(b), 30), q(a.max(b), 30));
            let g = |p: &Rational| q(1, 1) - binomial_cdf(params, p).unwrap();
            prop_assert!(g(&lo) < g(&hi));
        }
    }
}
