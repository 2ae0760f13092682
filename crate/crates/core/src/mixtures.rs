//! Finite mixtures of deterministic classifiers, weighted ensembles, the
//! subset-sum α-levels and the exact decomposition of a mixture's adversarial
//! risk into ensemble risks.

use std::collections::BTreeSet;

use rand::Rng;

use crate::classifiers::{adv_loss, adv_risk, zero_one_loss, Classifier, DeterministicClassifier, RandomizedClassifier};
use crate::derandomize::IdentityCheck;
use crate::domain::{FiniteMetricSpace, Label, LabeledDistribution, Neighborhoods};
use crate::error::{Error, Result};
use crate::random;
use crate::scalar::{self, Scalar};

pub const MAX_ALPHA_COMPONENTS: usize = 20;
pub const MAX_CLOSURE_SIZE: usize = 4096;
pub const MAX_LABELING_DOMAIN: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct Mixture<S> {
    components: Vec<DeterministicClassifier>,
    weights: Vec<S>,
}

impl<S: Scalar> Mixture<S> {
    pub fn new(components: Vec<DeterministicClassifier>, weights: Vec<S>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidMixture("no components".into()));
        }
        if components.len() != weights.len() {
            return Err(Error::InvalidMixture(format!(
                "{} components but {} weights",
                components.len(),
                weights.len()
            )));
        }
        let n = components[0].len();
        if let Some(c) = components.iter().find(|c| Classifier::<S>::len(*c) != n) {
            return Err(Error::DomainMismatch { expected: n, found: Classifier::<S>::len(c) });
        }
        if let Some(w) = weights.iter().find(|w| **w <= S::zero()) {
            return Err(Error::InvalidMixture(format!("weight {w} is not strictly positive")));
        }
        let total = scalar::sum(weights.iter().cloned());
        if !total.agrees(&S::one()) {
            return Err(Error::InvalidMixture(format!("weights sum to {total}, not 1")));
        }
        Ok(Mixture { components, weights })
    }

    /// Equal weights 1/m.
    pub fn uniform(components: Vec<DeterministicClassifier>) -> Result<Self> {
        let m = components.len() as i64;
        let weights = vec![S::ratio(1, m.max(1)); components.len()];
        Self::new(components, weights)
    }

    pub fn components(&self) -> &[DeterministicClassifier] {
        &self.components
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn m(&self) -> usize {
        self.components.len()
    }

    pub fn is_uniform(&self) -> bool {
        self.weights.iter().all(|w| *w == self.weights[0])
    }

    /// x ↦ Σ q_j f_j(x).
    pub fn to_randomized(&self) -> RandomizedClassifier<S> {
        RandomizedClassifier::new((0..Classifier::<S>::len(self)).map(|i| self.prob_one(i)).collect())
            .expect("convex combination of indicators lies in [0, 1]")
    }
}

impl<S: Scalar> Classifier<S> for Mixture<S> {
    fn len(&self) -> usize {
        Classifier::<S>::len(&self.components[0])
    }

    fn prob_one(&self, i: usize) -> S {
        scalar::sum(self.components.iter().zip(&self.weights).filter(|(c, _)| c.label(i).is_one()).map(|(_, w)| w.clone()))
    }
}

pub fn mixture_to_randomized<S: Scalar>(mix: &Mixture<S>) -> RandomizedClassifier<S> {
    mix.to_randomized()
}

/// Expected pointwise 0-1 loss, no perturbation.
pub fn natural_risk<S: Scalar, C: Classifier<S> + ?Sized>(c: &C, d: &LabeledDistribution<S>) -> Result<S> {
    d.check_domain(c.len())?;
    Ok(scalar::sum(d.atoms().iter().map(|a| a.mass.clone() * zero_one_loss(c, a.point, a.label))))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NaturalRiskCheck<S> {
    pub identity: IdentityCheck<S>,
    pub min_component_risk: S,
    pub dominates_min: bool,
}

/// Natural risk of the mixture against the q-weighted component risks.
pub fn natural_risk_decomposition<S: Scalar>(mix: &Mixture<S>, d: &LabeledDistribution<S>) -> Result<NaturalRiskCheck<S>> {
    let lhs = natural_risk(mix, d)?;
    let risks = mix.components.iter().map(|f| natural_risk::<S, _>(f, d)).collect::<Result<Vec<_>>>()?;
    let rhs = scalar::sum(risks.iter().zip(&mix.weights).map(|(r, w)| r.clone() * w.clone()));
    let min_component_risk = scalar::min_of(risks).expect("mixture has components");
    let dominates_min = lhs >= min_component_risk || lhs.agrees(&min_component_risk);
    Ok(NaturalRiskCheck { identity: IdentityCheck::new(lhs, rhs), min_component_risk, dominates_min })
}

/// Sorted distinct subset sums of the weights: 0 = α_0 < … < α_n = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaLevels<S> {
    pub levels: Vec<S>,
}

impl<S: Scalar> AlphaLevels<S> {
    /// α_{n−i} = 1 − α_i for every i.
    pub fn is_complement_symmetric(&self) -> bool {
        let n = self.levels.len();
        (0..n).all(|i| self.levels[n - 1 - i].agrees(&(S::one() - self.levels[i].clone())))
    }
}

pub fn alpha_levels<S: Scalar>(weights: &[S]) -> Result<AlphaLevels<S>> {
    if weights.len() > MAX_ALPHA_COMPONENTS {
        return Err(Error::CapExceeded { what: "mixture components for subset sums", cap: MAX_ALPHA_COMPONENTS, got: weights.len() });
    }
    let mut sums = vec![S::zero()];
    for w in weights {
        let shifted: Vec<S> = sums.iter().map(|s| s.clone() + w.clone()).collect();
        sums.extend(shifted);
        sums.sort_by(scalar::cmp);
        sums.dedup();
    }
    Ok(AlphaLevels { levels: sums })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Ge,
    Gt,
    Le,
    Lt,
}

impl Relation {
    pub fn holds<S: Scalar>(self, lhs: &S, rhs: &S) -> bool {
        match self {
            Relation::Ge => lhs >= rhs,
            Relation::Gt => lhs > rhs,
            Relation::Le => lhs <= rhs,
            Relation::Lt => lhs < rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedEnsembleSpec<S> {
    pub alpha: S,
    pub relation: Relation,
}

/// x ↦ 1{Σ q_j f_j(x) R α}.
pub fn weighted_ensemble<S: Scalar>(mix: &Mixture<S>, spec: &WeightedEnsembleSpec<S>) -> Result<DeterministicClassifier> {
    if !scalar::in_unit_interval(&spec.alpha) {
        return Err(Error::InvalidProbability(format!("ensemble threshold {} is outside [0, 1]", spec.alpha)));
    }
    Ok(DeterministicClassifier::from_fn(Classifier::<S>::len(mix), |i| spec.relation.holds(&mix.prob_one(i), &spec.alpha)))
}

fn ensemble_ge<S: Scalar>(mix: &Mixture<S>, alpha: &S) -> DeterministicClassifier {
    DeterministicClassifier::from_fn(Classifier::<S>::len(mix), |i| mix.prob_one(i) >= *alpha)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionTerm<S> {
    pub alpha: S,
    pub gap: S,
    pub ensemble_risk: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition<S> {
    pub terms: Vec<DecompositionTerm<S>>,
    pub identity: IdentityCheck<S>,
    pub min_ensemble_risk: S,
}

impl<S: Scalar> Decomposition<S> {
    /// Whether some ensemble has risk strictly below the mixture.
    pub fn strictly_improves(&self) -> bool {
        self.min_ensemble_risk < self.identity.lhs
    }
}

/// R_ε(mix) against Σ_i (α_i − α_{i−1}) R_ε(w_{α_i, ≥}).
pub fn adv_risk_decomposition<S: Scalar>(
    mix: &Mixture<S>,
    d: &LabeledDistribution<S>,
    nbhd: &Neighborhoods,
) -> Result<Decomposition<S>> {
    let levels = alpha_levels(&mix.weights)?.levels;
    let terms = levels
        .windows(2)
        .map(|w| {
            let risk = adv_risk::<S, _>(&ensemble_ge(mix, &w[1]), d, nbhd)?;
            Ok(DecompositionTerm { alpha: w[1].clone(), gap: w[1].clone() - w[0].clone(), ensemble_risk: risk })
        })
        .collect::<Result<Vec<_>>>()?;
    finish_decomposition(mix, d, nbhd, terms)
}

fn finish_decomposition<S: Scalar>(
    mix: &Mixture<S>,
    d: &LabeledDistribution<S>,
    nbhd: &Neighborhoods,
    terms: Vec<DecompositionTerm<S>>,
) -> Result<Decomposition<S>> {
    let lhs = adv_risk(mix, d, nbhd)?;
    let rhs = scalar::sum(terms.iter().map(|t| t.gap.clone() * t.ensemble_risk.clone()));
    let min_ensemble_risk = scalar::min_of(terms.iter().map(|t| t.ensemble_risk.clone())).expect("at least one level gap");
    Ok(Decomposition { terms, identity: IdentityCheck::new(lhs, rhs), min_ensemble_risk })
}

/// For uniform weights: R_ε(mix) against (1/m) Σ_{i=1..m} R_ε(w_{i/m, ≥}).
pub fn uniform_decomposition<S: Scalar>(
    mix: &Mixture<S>,
    d: &LabeledDistribution<S>,
    nbhd: &Neighborhoods,
) -> Result<Decomposition<S>> {
    if !mix.is_uniform() {
        return Err(Error::InvalidMixture("weights are not uniform".into()));
    }
    let m = mix.m() as i64;
    let terms = (1..=m)
        .map(|i| {
            let alpha = S::ratio(i, m);
            let risk = adv_risk::<S, _>(&ensemble_ge(mix, &alpha), d, nbhd)?;
            Ok(DecompositionTerm { alpha, gap: S::ratio(1, m), ensemble_risk: risk })
        })
        .collect::<Result<Vec<_>>>()?;
    finish_decomposition(mix, d, nbhd, terms)
}

/// Points grouped by the mixture's adversarial loss against label `y`,
/// as `(level, points)` pairs sorted by level.
pub fn a_sets<S: Scalar>(mix: &Mixture<S>, nbhd: &Neighborhoods, y: Label) -> Vec<(S, Vec<usize>)> {
    let mut groups: Vec<(S, Vec<usize>)> = Vec::new();
    for x in 0..nbhd.len() {
        let loss = adv_loss(mix, nbhd, x, y);
        match groups.iter_mut().find(|(l, _)| *l == loss) {
            Some((_, pts)) => pts.push(x),
            None => groups.push((loss, vec![x])),
        }
    }
    groups.sort_by(|a, b| scalar::cmp(&a.0, &b.0));
    groups
}

/// For every α-level: the ε-expansion of {w_{α,≥} = 1} equals the union of
/// the class-0 A-sets with level at least α.
pub fn ensemble_expansion_identity<S: Scalar>(mix: &Mixture<S>, space: &FiniteMetricSpace, eps: f64) -> Result<bool> {
    let nbhd = space.neighborhoods(eps)?;
    let groups = a_sets(mix, &nbhd, Label::Zero);
    for alpha in alpha_levels(&mix.weights)?.levels {
        let expanded = space.eps_expansion(&ensemble_ge(mix, &alpha).ones(), eps)?;
        let mut union: Vec<usize> = groups.iter().filter(|(l, _)| *l >= alpha).flat_map(|(_, p)| p.iter().copied()).collect();
        union.sort_unstable();
        if expanded != union {
            return Ok(false);
        }
    }
    Ok(true)
}

fn union(a: &DeterministicClassifier, b: &DeterministicClassifier) -> DeterministicClassifier {
    DeterministicClassifier::from_fn(a.labels().len(), |i| a.label(i).is_one() || b.label(i).is_one())
}

fn intersection(a: &DeterministicClassifier, b: &DeterministicClassifier) -> DeterministicClassifier {
    DeterministicClassifier::from_fn(a.labels().len(), |i| a.label(i).is_one() && b.label(i).is_one())
}

fn check_family(family: &[DeterministicClassifier]) -> Result<usize> {
    let n = family.first().map(|f| f.labels().len()).ok_or_else(|| Error::InvalidInput("empty family".into()))?;
    if let Some(f) = family.iter().find(|f| f.labels().len() != n) {
        return Err(Error::DomainMismatch { expected: n, found: f.labels().len() });
    }
    Ok(n)
}

/// Smallest superfamily closed under pairwise union and intersection.
///
/// Original members keep their order (duplicates dropped); new sets are
/// appended in discovery order.
pub fn closure_under_union_intersection(family: &[DeterministicClassifier]) -> Result<Vec<DeterministicClassifier>> {
    check_family(family)?;
    let mut seen = BTreeSet::new();
    let mut out: Vec<DeterministicClassifier> = Vec::new();
    for f in family {
        if seen.insert(f.clone()) {
            out.push(f.clone());
        }
    }
    let mut k = 0;
    while k < out.len() {
        for j in 0..k {
            for g in [union(&out[k], &out[j]), intersection(&out[k], &out[j])] {
                if seen.insert(g.clone()) {
                    if out.len() >= MAX_CLOSURE_SIZE {
                        return Err(Error::CapExceeded { what: "closure size", cap: MAX_CLOSURE_SIZE, got: out.len() + 1 });
                    }
                    out.push(g);
                }
            }
        }
        k += 1;
    }
    Ok(out)
}

pub fn is_closed(family: &[DeterministicClassifier]) -> bool {
    let set: BTreeSet<&DeterministicClassifier> = family.iter().collect();
    family.iter().all(|a| family.iter().all(|b| set.contains(&union(a, b)) && set.contains(&intersection(a, b))))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSample<S> {
    pub members: Vec<usize>,
    pub weights: Vec<S>,
    pub risk: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominanceReport<S> {
    /// The lower bound every sample must respect.
    pub floor: S,
    pub samples: Vec<MixtureSample<S>>,
    pub violations: Vec<usize>,
}

impl<S: Scalar> DominanceReport<S> {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn min_sample_risk(&self) -> Option<S> {
        scalar::min_of(self.samples.iter().map(|s| s.risk.clone()))
    }
}

/// Draws a mixture over a random nonempty sub-tuple of `family` with weights
/// having integer numerators in `1..=max_numerator`.
pub fn sample_mixture<S: Scalar, R: Rng + ?Sized>(
    family: &[DeterministicClassifier],
    max_numerator: i64,
    rng: &mut R,
) -> Result<(Vec<usize>, Mixture<S>)> {
    let size = rng.gen_range(1..=family.len());
    let members = rand::seq::index::sample(rng, family.len(), size).into_vec();
    let weights = random::random_weights(rng, size, max_numerator);
    let mix = Mixture::new(members.iter().map(|&i| family[i].clone()).collect(), weights)?;
    Ok((members, mix))
}

fn sampled_report<S: Scalar>(
    family: &[DeterministicClassifier],
    d: &LabeledDistribution<S>,
    nbhd: &Neighborhoods,
    floor: S,
    num_q_samples: usize,
    seed: u64,
) -> Result<DominanceReport<S>> {
    let mut rng = random::rng(seed);
    let mut samples = Vec::with_capacity(num_q_samples);
    let mut violations = Vec::new();
    for s in 0..num_q_samples {
        let (members, mix) = sample_mixture::<S, _>(family, 12, &mut rng)?;
        let risk = adv_risk(&mix, d, nbhd)?;
        if risk < floor && !risk.agrees(&floor) {
            violations.push(s);
        }
        samples.push(MixtureSample { members, weights: mix.weights, risk });
    }
    Ok(DominanceReport { floor, samples, violations })
}

/// On a union/intersection-closed family, sampled mixtures never beat the best member.
pub fn closed_family_dominance_check<S: Scalar>(
    family: &[DeterministicClassifier],
    d: &LabeledDistribution<S>,
    nbhd: &Neighborhoods,
    num_q_samples: usize,
    seed: u64,
) -> Result<DominanceReport<S>> {
    check_family(family)?;
    if !is_closed(family) {
        return Err(Error::NotClosed);
    }
    let risks = family.iter().map(|f| adv_risk::<S, _>(f, d, nbhd)).collect::<Result<Vec<_>>>()?;
    let floor = scalar::min_of(risks).expect("family is nonempty");
    sampled_report(family, d, nbhd, floor, num_q_samples, seed)
}

/// Minimum adversarial risk over all 2^n labelings, and a leftmost minimizer
/// in binary counting order.
pub fn best_labeling<S: Scalar>(d: &LabeledDistribution<S>, nbhd: &Neighborhoods) -> Result<(S, DeterministicClassifier)> {
    let n = nbhd.len();
    if n > MAX_LABELING_DOMAIN {
        return Err(Error::CapExceeded { what: "domain size for labeling enumeration", cap: MAX_LABELING_DOMAIN, got: n });
    }
    let mut best: Option<(S, DeterministicClassifier)> = None;
    for mask in 0u32..(1u32 << n) {
        let f = DeterministicClassifier::from_fn(n, |i| mask >> i & 1 == 1);
        let r = adv_risk::<S, _>(&f, d, nbhd)?;
        if best.as_ref().is_none_or(|(b, _)| r < *b) {
            best = Some((r, f));
        }
    }
    Ok(best.expect("at least one labeling"))
}

/// Sampled mixtures of `family` never beat the best labeling of the whole domain.
pub fn mixtures_dominated_by_all_labelings<S: Scalar>(
    family: &[DeterministicClassifier],
    d: &LabeledDistribution<S>,
    nbhd: &Neighborhoods,
    num_q_samples: usize,
    seed: u64,
) -> Result<DominanceReport<S>> {
    check_family(family)?;
    let (floor, _) = best_labeling(d, nbhd)?;
    sampled_report(family, d, nbhd, floor, num_q_samples, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Atom, Norm};
    use crate::Rational;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn bits(b: &[u8]) -> DeterministicClassifier {
        DeterministicClassifier::from_bits(b).unwrap()
    }

    #[test]
    fn mixture_validation() {
        assert!(Mixture::new(vec![bits(&[0])], vec![q(1, 2)]).is_err());
        assert!(Mixture::new(vec![bits(&[0]), bits(&[1])], vec![q(1, 1), q(0, 1)]).is_err());
        assert!(Mixture::new(vec![bits(&[0]), bits(&[1, 1])], vec![q(1, 2), q(1, 2)]).is_err());
        assert!(Mixture::<Rational>::new(vec![], vec![]).is_err());
    }

    #[test]
    fn to_randomized_examples() {
        let m1 = Mixture::new(vec![bits(&[0, 1, 1])], vec![q(1, 1)]).unwrap();
        assert_eq!(m1.to_randomized().probs(), &[q(0, 1), q(1, 1), q(1, 1)]);
        let m2 = Mixture::<Rational>::uniform(vec![bits(&[0, 1, 1]), bits(&[1, 0, 0])]).unwrap();
        assert_eq!(m2.to_randomized().probs(), &[q(1, 2), q(1, 2), q(1, 2)]);
    }

    #[test]
    fn alpha_level_examples() {
        assert_eq!(alpha_levels(&[q(1, 2), q(1, 2)]).unwrap().levels, vec![q(0, 1), q(1, 2), q(1, 1)]);
        assert_eq!(alpha_levels(&[q(1, 1)]).unwrap().levels, vec![q(0, 1), q(1, 1)]);
        let l = alpha_levels(&[q(1, 2), q(1, 3), q(1, 6)]).unwrap();
        assert_eq!(l.levels, [0, 1, 2, 3, 4, 5, 6].iter().map(|&k| q(k, 6)).collect::<Vec<_>>());
        assert!(l.is_complement_symmetric());
        assert!(alpha_levels(&vec![q(1, 21); 21]).is_err());
    }

    #[test]
    fn ensemble_examples() {
        let f1 = bits(&[1, 1, 0, 0]);
        let f2 = bits(&[1, 0, 1, 0]);
        let mix = Mixture::uniform(vec![f1, f2]).unwrap();
        let ge = |a| weighted_ensemble(&mix, &WeightedEnsembleSpec { alpha: a, relation: Relation::Ge }).unwrap().bits();
        assert_eq!(ge(q(1, 1)), vec![1, 0, 0, 0]);
        assert_eq!(ge(q(1, 2)), vec![1, 1, 1, 0]);
        assert_eq!(ge(q(0, 1)), vec![1, 1, 1, 1]);
        let lt = weighted_ensemble(&mix, &WeightedEnsembleSpec { alpha: q(1, 2), relation: Relation::Lt }).unwrap();
        assert_eq!(lt.bits(), vec![0, 0, 0, 1]);
    }

    #[test]
    fn natural_risk_average() {
        let d = LabeledDistribution::new(vec![Atom { point: 0, label: Label::One, mass: q(1, 1) }]).unwrap();
        let mix = Mixture::uniform(vec![bits(&[1]), bits(&[0])]).unwrap();
        let check = natural_risk_decomposition(&mix, &d).unwrap();
        assert!(check.identity.equal);
        assert_eq!(check.identity.lhs, q(1, 2));
        assert!(check.dominates_min);
    }

    #[test]
    fn closure_examples() {
        let chain = vec![bits(&[0, 0, 0]), bits(&[1, 0, 0]), bits(&[1, 1, 0])];
        assert_eq!(closure_under_union_intersection(&chain).unwrap(), chain);
        let pair = vec![bits(&[1, 1, 0]), bits(&[0, 1, 1])];
        let closed = closure_under_union_intersection(&pair).unwrap();
        assert_eq!(closed, vec![bits(&[1, 1, 0]), bits(&[0, 1, 1]), bits(&[1, 1, 1]), bits(&[0, 1, 0])]);
        assert!(is_closed(&closed));
        assert_eq!(closure_under_union_intersection(&closed).unwrap(), closed);
    }

    #[test]
    fn closure_cap_is_enforced() {
        // all singletons of 13 points generate 2^13 - 1 nonempty sets
        let family: Vec<_> = (0..13).map(|i| DeterministicClassifier::indicator(13, &[i]).unwrap()).collect();
        assert!(matches!(closure_under_union_intersection(&family), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn non_closed_family_is_rejected() {
        let space = FiniteMetricSpace::from_points(vec![vec![0.0], vec![1.0]], Norm::L2).unwrap();
        let nb = space.neighborhoods(0.0).unwrap();
        let d = LabeledDistribution::new(vec![Atom { point: 0, label: Label::One, mass: q(1, 1) }]).unwrap();
        let fam = vec![bits(&[1, 0]), bits(&[0, 1])];
        assert_eq!(closed_family_dominance_check(&fam, &d, &nb, 5, 1), Err(Error::NotClosed));
    }

    #[test]
    fn zero_radius_labeling_minimum_is_bayes() {
        let space = FiniteMetricSpace::from_points(vec![vec![0.0], vec![1.0], vec![2.0]], Norm::L2).unwrap();
        let nb = space.neighborhoods(0.0).unwrap();
        let d = LabeledDistribution::new(vec![
            Atom { point: 0, label: Label::One, mass: q(1, 4) },
            Atom { point: 0, label: Label::Zero, mass: q(1, 8) },
            Atom { point: 1, label: Label::Zero, mass: q(3, 8) },
            Atom { point: 1, label: Label::One, mass: q(1, 8) },
            Atom { point: 2, label: Label::One, mass: q(1, 8) },
        ])
        .unwrap();
        // Bayes: per point, the smaller class mass
        let want = q(1, 8) + q(1, 8);
        assert_eq!(best_labeling(&d, &nb).unwrap().0, want);
    }

    fn closure_oracle(family: &[DeterministicClassifier]) -> BTreeSet<DeterministicClassifier> {
        let mut set: BTreeSet<_> = family.iter().cloned().collect();
        loop {
            let items: Vec<_> = set.iter().cloned().collect();
            let before = set.len();
            for a in &items {
                for b in &items {
                    set.insert(union(a, b));
                    set.insert(intersection(a, b));
                }
            }
            if set.len() == before {
                return set;
            }
        }
    }

    fn family_strategy(n: usize) -> impl Strategy<Value = Vec<DeterministicClassifier>> {
        proptest::collection::vec(proptest::collection::vec(0u8..2, n), 1..5)
            .prop_map(|v| v.iter().map(|b| bits(b)).collect())
    }

    fn setup() -> impl Strategy<Value = (Vec<i32>, Vec<(usize, u8, i64)>, Vec<DeterministicClassifier>, Vec<i64>)> {
        (1usize..7).prop_flat_map(|n| {
            (
                proptest::collection::vec(0i32..10, n),
                proptest::collection::btree_map((0..n, 0u8..2), 1i64..6, 1..6)
                    .prop_map(|m| m.into_iter().map(|((p, l), w)| (p, l, w)).collect()),
                proptest::collection::vec(proptest::collection::vec(0u8..2, n), 1..6)
                    .prop_map(|v| v.iter().map(|b| bits(b)).collect::<Vec<_>>()),
                proptest::collection::vec(1i64..=12, 6),
            )
        })
    }

    fn build(
        coords: &[i32],
        atoms: &[(usize, u8, i64)],
        comps: Vec<DeterministicClassifier>,
        nums: &[i64],
    ) -> (FiniteMetricSpace, LabeledDistribution<Rational>, Mixture<Rational>) {
        let space = FiniteMetricSpace::from_points(coords.iter().map(|&c| vec![c as f64]).collect(), Norm::L2).unwrap();
        let total: i64 = atoms.iter().map(|a| a.2).sum();
        let d = LabeledDistribution::new(
            atoms.iter().map(|&(p, l, w)| Atom { point: p, label: Label::from_bit(l).unwrap(), mass: q(w, total) }).collect(),
        )
        .unwrap();
        let m = comps.len();
        let wsum: i64 = nums[..m].iter().sum();
        let mix = Mixture::new(comps, nums[..m].iter().map(|&k| q(k, wsum)).collect()).unwrap();
        (space, d, mix)
    }

    proptest! {
        #[test]
        fn closure_matches_fixpoint_oracle(family in family_strategy(6)) {
            let closed = closure_under_union_intersection(&family).unwrap();
            let got: BTreeSet<_> = closed.iter().cloned().collect();
            prop_assert_eq!(got.len(), closed.len());
            prop_assert_eq!(got, closure_oracle(&family));
        }

        #[test]
        fn decomposition_holds((c, a, comps, nums) in setup(), eps in 0u8..5) {
            let (space, d, mix) = build(&c, &a, comps, &nums);
            let nb = space.neighborhoods(eps as f64 + 0.5).unwrap();
            let dec = adv_risk_decomposition(&mix, &d, &nb).unwrap();
            prop_assert!(dec.identity.equal);
            prop_assert!(dec.terms.iter().all(|t| t.gap > q(0, 1)));
            prop_assert_eq!(scalar::sum(dec.terms.iter().map(|t| t.gap.clone())), q(1, 1));
            prop_assert!(dec.min_ensemble_risk <= dec.identity.lhs);
            let levels = alpha_levels(mix.weights()).unwrap();
            prop_assert!(levels.is_complement_symmetric());
            prop_assert!(ensemble_expansion_identity(&mix, &space, eps as f64 + 0.5).unwrap());
            let nat = natural_risk_decomposition(&mix, &d).unwrap();
            prop_assert!(nat.identity.equal && nat.dominates_min);
        }

        #[test]
        fn uniform_corollary_holds((c, a, comps, nums) in setup(), eps in 0u8..5) {
            let (space, d, _) = build(&c, &a, comps.clone(), &nums);
            let mix = Mixture::uniform(comps).unwrap();
            let nb = space.neighborhoods(eps as f64 + 0.5).unwrap();
            let dec = uniform_decomposition(&mix, &d, &nb).unwrap();
            prop_assert!(dec.identity.equal);
            prop_assert_eq!(dec.identity.rhs, adv_risk_decomposition(&mix, &d, &nb).unwrap().identity.rhs);
        }

        #[test]
        fn ensembles_are_antitone((c, a, comps, nums) in setup(), a1 in 0i64..=12, a2 in 0i64..=12) {
            let (_, _, mix) = build(&c, &a, comps, &nums);
            let (lo, hi) = (q(a1.min(a2), 12), q(a1.max(a2), 12));
            let w = |alpha| weighted_ensemble(&mix, &WeightedEnsembleSpec { alpha, relation: Relation::Ge }).unwrap();
            prop_assert!(w(hi).le(&w(lo)));
        }

        #[test]
        fn randomized_matches_weighted_sum((c, a, comps, nums) in setup()) {
            let (_, _, mix) = build(&c, &a, comps, &nums);
            let h = mix.to_randomized();
            for i in 0..h.len() {
                let mut s = q(0, 1);
                for (f, w) in mix.components().iter().zip(mix.weights()) {
                    if f.label(i).is_one() { s += w.clone(); }
                }
                prop_assert_eq!(&h.probs()[i], &s);
            }
        }
    }
}
