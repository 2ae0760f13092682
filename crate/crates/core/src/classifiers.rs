//! Deterministic and randomized binary classifiers with exact 0-1 loss,
//! adversarial loss and adversarial risk.

use crate::domain::{FiniteMetricSpace, Label, LabeledDistribution, Neighborhoods};
use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};

/// Anything that assigns each domain point a probability of predicting class 1.
pub trait Classifier<S: Scalar> {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// h(x_i), the probability of predicting class 1 at point `i`.
    fn prob_one(&self, i: usize) -> S;
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DeterministicClassifier {
    labels: Vec<Label>,
}

impl DeterministicClassifier {
    pub fn new(labels: Vec<Label>) -> Self {
        DeterministicClassifier { labels }
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        Ok(DeterministicClassifier { labels: bits.iter().map(|&b| Label::from_bit(b)).collect::<Result<_>>()? })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize) -> bool) -> Self {
        DeterministicClassifier { labels: (0..n).map(|i| Label::from_bool(f(i))).collect() }
    }

    pub fn constant(n: usize, label: Label) -> Self {
        DeterministicClassifier { labels: vec![label; n] }
    }

    /// Indicator of the given set of points.
    pub fn indicator(n: usize, ones: &[usize]) -> Result<Self> {
        let mut labels = vec![Label::Zero; n];
        for &i in ones {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, size: n });
            }
            labels[i] = Label::One;
        }
        Ok(DeterministicClassifier { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> Label {
        self.labels[i]
    }

    pub fn bits(&self) -> Vec<u8> {
        self.labels.iter().map(|l| l.bit()).collect()
    }

    /// F = f⁻¹(1), sorted.
    pub fn ones(&self) -> Vec<usize> {
        (0..self.labels.len()).filter(|&i| self.labels[i].is_one()).collect()
    }

    pub fn flipped(&self) -> Self {
        DeterministicClassifier { labels: self.labels.iter().map(|l| l.flip()).collect() }
    }

    /// Pointwise `self <= other`.
    pub fn le(&self, other: &Self) -> bool {
        self.labels.len() == other.labels.len() && self.labels.iter().zip(&other.labels).all(|(a, b)| a <= b)
    }

    pub fn to_randomized<S: Scalar>(&self) -> RandomizedClassifier<S> {
        RandomizedClassifier { probs: (0..self.len()).map(|i| Classifier::<S>::prob_one(self, i)).collect() }
    }
}

impl<S: Scalar> Classifier<S> for DeterministicClassifier {
    fn len(&self) -> usize {
        self.labels.len()
    }

    fn prob_one(&self, i: usize) -> S {
        if self.labels[i].is_one() {
            S::one()
        } else {
            S::zero()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomizedClassifier<S> {
    probs: Vec<S>,
}

impl<S: Scalar> RandomizedClassifier<S> {
    pub fn new(probs: Vec<S>) -> Result<Self> {
        if let Some(i) = probs.iter().position(|p| !scalar::in_unit_interval(p)) {
            return Err(Error::InvalidProbability(format!("h(x_{i}) = {} is outside [0, 1]", probs[i])));
        }
        Ok(RandomizedClassifier { probs })
    }

    pub fn constant(n: usize, p: S) -> Result<Self> {
        Self::new(vec![p; n])
    }

    pub fn probs(&self) -> &[S] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<S> {
        self.probs
    }

    /// Some(f) when every value is 0 or 1.
    pub fn as_deterministic(&self) -> Option<DeterministicClassifier> {
        self.probs
            .iter()
            .map(|p| {
                if p.is_zero() {
                    Some(Label::Zero)
                } else if p.is_one() {
                    Some(Label::One)
                } else {
                    None
                }
            })
            .collect::<Option<Vec<_>>>()
            .map(DeterministicClassifier::new)
    }
}

impl<S: Scalar> Classifier<S> for RandomizedClassifier<S> {
    fn len(&self) -> usize {
        self.probs.len()
    }

    fn prob_one(&self, i: usize) -> S {
        self.probs[i].clone()
    }
}

/// h(x) when y = 0, 1 − h(x) when y = 1.
pub fn zero_one_loss<S: Scalar, C: Classifier<S> + ?Sized>(c: &C, x: usize, y: Label) -> S {
    let p = c.prob_one(x);
    match y {
        Label::Zero => p,
        Label::One => S::one() - p,
    }
}

/// Worst-case loss over the ball around `x`.
pub fn adv_loss<S: Scalar, C: Classifier<S> + ?Sized>(c: &C, nbhd: &Neighborhoods, x: usize, y: Label) -> S {
    scalar::max_of(nbhd.ball(x).iter().map(|&j| zero_one_loss(c, j, y))).expect("balls contain their center")
}

fn check_shapes<S: Scalar, C: Classifier<S> + ?Sized>(c: &C, d: &LabeledDistribution<S>, nbhd: &Neighborhoods) -> Result<()> {
    if c.len() != nbhd.len() {
        return Err(Error::DomainMismatch { expected: nbhd.len(), found: c.len() });
    }
    d.check_domain(nbhd.len())
}

/// Σ over atoms of mass × adversarial loss.
pub fn adv_risk<S: Scalar, C: Classifier<S> + ?Sized>(c: &C, d: &LabeledDistribution<S>, nbhd: &Neighborhoods) -> Result<S> {
    check_shapes(c, d, nbhd)?;
    Ok(scalar::sum(d.atoms().iter().map(|a| a.mass.clone() * adv_loss(c, nbhd, a.point, a.label))))
}

/// [`adv_risk`] with balls computed on the fly.
pub fn adv_risk_at<S: Scalar, C: Classifier<S> + ?Sized>(
    c: &C,
    d: &LabeledDistribution<S>,
    space: &FiniteMetricSpace,
    eps: f64,
) -> Result<S> {
    adv_risk(c, d, &space.neighborhoods(eps)?)
}

/// Expected adversarial loss under p_y.
pub fn class_conditional_adv_risk<S: Scalar, C: Classifier<S> + ?Sized>(
    c: &C,
    d: &LabeledDistribution<S>,
    nbhd: &Neighborhoods,
    y: Label,
) -> Result<S> {
    check_shapes(c, d, nbhd)?;
    let cond = d.conditional(y)?;
    Ok(scalar::sum(cond.into_iter().map(|(x, p)| p * adv_loss(c, nbhd, x, y))))
}
