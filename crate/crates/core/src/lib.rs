//! Exact adversarial-risk calculus for binary classifiers on finite domains.
//!
//! Every probability, weight and risk is a [`Scalar`]. The exact
//! instantiation [`Rational`] never rounds, so identities between risks are
//! checked with plain equality. Float instantiations (`f64`, `f32`) trade
//! exactness for speed and compare through [`Scalar::agrees`].

pub mod classifiers;
pub mod complexity;
pub mod derandomize;
pub mod domain;
pub mod error;
pub mod games;
pub mod geometry;
pub mod instances;
pub mod io;
pub mod mixtures;
pub mod random;
pub mod report;
pub mod scalar;
pub mod smoothing;

pub use classifiers::{
    adv_loss, adv_risk, adv_risk_at, class_conditional_adv_risk, zero_one_loss, Classifier, DeterministicClassifier,
    RandomizedClassifier,
};
pub use domain::{Atom, FiniteMetricSpace, Label, LabeledDistribution, Neighborhoods, Norm};
pub use error::{Error, Result};
pub use scalar::Scalar;

/// Exact arbitrary-precision fraction, always in lowest terms with a positive denominator.
pub type Rational = num_rational::BigRational;

pub type ExactRandomizedClassifier = RandomizedClassifier<Rational>;
pub type FloatRandomizedClassifier = RandomizedClassifier<f64>;
pub type ExactDistribution = LabeledDistribution<Rational>;
pub type FloatDistribution = LabeledDistribution<f64>;
pub type ExactMixture = mixtures::Mixture<Rational>;
pub type ExactNoiseKernel = smoothing::NoiseKernel<Rational>;
pub type ExactGame = games::GameMatrix<Rational>;
pub type ExactEquilibrium = games::Equilibrium<Rational>;
pub type ExactRiskProfile = derandomize::RiskProfile<Rational>;
