//! JSON document formats for instances, classifiers, mixtures, kernels, games
//! and experiment configuration.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::classifiers::{DeterministicClassifier, RandomizedClassifier};
use crate::domain::{Atom, FiniteMetricSpace, Label, LabeledDistribution, Norm};
use crate::error::{Error, Result};
use crate::games::GameMatrix;
use crate::mixtures::Mixture;
use crate::scalar::parse_rational;
use crate::smoothing::{gaussian_grid_kernel, NoiseKernel};
use crate::Rational;

pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    parse_json(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// An exact number written as `"p/q"`, a decimal string, or a JSON number.
/// JSON floats are read through their shortest decimal form, so `0.1` means 1/10.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalDoc {
    Text(String),
    Int(i64),
    Float(f64),
}

impl RationalDoc {
    pub fn to_rational(&self) -> Result<Rational> {
        let text = match self {
            RationalDoc::Text(s) => s.clone(),
            RationalDoc::Int(i) => i.to_string(),
            RationalDoc::Float(x) if x.is_finite() => format!("{x}"),
            RationalDoc::Float(x) => return Err(Error::Parse(format!("non-finite number {x}"))),
        };
        parse_rational(&text).ok_or_else(|| Error::Parse(format!("not a rational number: {text:?}")))
    }
}

impl From<&Rational> for RationalDoc {
    fn from(r: &Rational) -> Self {
        RationalDoc::Text(r.to_string())
    }
}

fn rationals(docs: &[RationalDoc]) -> Result<Vec<Rational>> {
    docs.iter().map(RationalDoc::to_rational).collect()
}

fn labels(bits: &[u8]) -> Result<DeterministicClassifier> {
    DeterministicClassifier::from_bits(bits)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormDoc {
    #[default]
    L2,
    Linf,
}

impl From<NormDoc> for Norm {
    fn from(n: NormDoc) -> Self {
        match n {
            NormDoc::L2 => Norm::L2,
            NormDoc::Linf => Norm::LInf,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomDoc {
    pub point: usize,
    pub label: u8,
    pub mass: RationalDoc,
}

/// Exactly one of `points` or `dist` must be present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub norm: NormDoc,
    pub atoms: Vec<AtomDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedInstance {
    pub space: FiniteMetricSpace,
    pub dist: LabeledDistribution<Rational>,
    pub eps: Option<f64>,
}

impl InstanceDoc {
    pub fn load(&self) -> Result<LoadedInstance> {
        let space = match (&self.points, &self.dist) {
            (Some(p), None) => FiniteMetricSpace::from_points(p.clone(), self.norm.into())?,
            (None, Some(d)) => FiniteMetricSpace::from_distances(d.clone())?,
            _ => return Err(Error::InvalidInput("instance needs exactly one of \"points\" or \"dist\"".into())),
        };
        let atoms = self
            .atoms
            .iter()
            .map(|a| Ok(Atom { point: a.point, label: Label::from_bit(a.label)?, mass: a.mass.to_rational()? }))
            .collect::<Result<Vec<_>>>()?;
        let dist = LabeledDistribution::new(atoms)?;
        dist.check_domain(space.len())?;
        Ok(LoadedInstance { space, dist, eps: self.eps })
    }
}

/// Exactly one of `labels` or `probs` must be present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probs: Option<Vec<RationalDoc>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LoadedClassifier {
    Deterministic(DeterministicClassifier),
    Randomized(RandomizedClassifier<Rational>),
}

impl LoadedClassifier {
    pub fn len(&self) -> usize {
        match self {
            LoadedClassifier::Deterministic(f) => f.len(),
            LoadedClassifier::Randomized(h) => h.probs().len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_randomized(&self) -> RandomizedClassifier<Rational> {
        match self {
            LoadedClassifier::Deterministic(f) => f.to_randomized(),
            LoadedClassifier::Randomized(h) => h.clone(),
        }
    }
}

impl ClassifierDoc {
    pub fn load(&self) -> Result<LoadedClassifier> {
        match (&self.labels, &self.probs) {
            (Some(l), None) => Ok(LoadedClassifier::Deterministic(labels(l)?)),
            (None, Some(p)) => Ok(LoadedClassifier::Randomized(RandomizedClassifier::new(rationals(p)?)?)),
            _ => Err(Error::InvalidInput("classifier needs exactly one of \"labels\" or \"probs\"".into())),
        }
    }
}

/// Weights default to uniform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureDoc {
    pub components: Vec<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<RationalDoc>>,
}

impl MixtureDoc {
    pub fn load(&self) -> Result<Mixture<Rational>> {
        let comps = self.components.iter().map(|c| labels(c)).collect::<Result<Vec<_>>>()?;
        match &self.weights {
            Some(w) => Mixture::new(comps, rationals(w)?),
            None => Mixture::uniform(comps),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDoc {
    pub classifiers: Vec<Vec<u8>>,
}

impl FamilyDoc {
    pub fn load(&self) -> Result<Vec<DeterministicClassifier>> {
        self.classifiers.iter().map(|c| labels(c)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameDoc {
    pub payoff: Vec<Vec<RationalDoc>>,
}

impl GameDoc {
    pub fn load(&self) -> Result<GameMatrix<Rational>> {
        GameMatrix::new(self.payoff.iter().map(|r| rationals(r)).collect::<Result<Vec<_>>>()?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianDoc {
    pub sigma: f64,
    pub radius: f64,
}

/// Either explicit stochastic rows or a truncated Gaussian over the
/// instance's coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum KernelDoc {
    Rows(Vec<Vec<RationalDoc>>),
    Gaussian(GaussianDoc),
}

impl KernelDoc {
    pub fn load(&self, space: &FiniteMetricSpace) -> Result<NoiseKernel<Rational>> {
        let k = match self {
            KernelDoc::Rows(rows) => NoiseKernel::new(rows.iter().map(|r| rationals(r)).collect::<Result<Vec<_>>>()?)?,
            KernelDoc::Gaussian(g) => gaussian_grid_kernel(space, g.sigma, g.radius)?,
        };
        if k.len() != space.len() {
            return Err(Error::DomainMismatch { expected: space.len(), found: k.len() });
        }
        Ok(k)
    }
}

/// Configuration shared by all subcommands. Paths are relative to the
/// directory holding the config file. Command-line flags override fields.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classifier: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixture: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub game: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instances: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    #[test]
    fn rational_forms() {
        for (doc, want) in [
            (r#""1/3""#, Rational::ratio(1, 3)),
            (r#""0.25""#, Rational::ratio(1, 4)),
            ("2", Rational::ratio(2, 1)),
            ("0.1", Rational::ratio(1, 10)),
        ] {
            let d: RationalDoc = parse_json(doc).unwrap();
            assert_eq!(d.to_rational().unwrap(), want, "{doc}");
        }
        let bad: RationalDoc = parse_json(r#""1/0""#).unwrap();
        assert!(bad.to_rational().is_err());
    }

    #[test]
    fn instance_from_points() {
        let doc: InstanceDoc = parse_json(
            r#"{"points": [[0], [1], [3]], "atoms": [{"point": 0, "label": 0, "mass": "1/3"}, {"point": 2, "label": 1, "mass": "2/3"}], "eps": 1.0}"#,
        )
        .unwrap();
        let inst = doc.load().unwrap();
        assert_eq!(inst.space.len(), 3);
        assert_eq!(inst.space.distance(0, 2), 3.0);
        assert_eq!(inst.dist.atoms()[1].mass, Rational::ratio(2, 3));
        assert_eq!(inst.eps, Some(1.0));
    }

    #[test]
    fn instance_rejects_bad_documents() {
        let both = r#"{"points": [[0]], "dist": [[0]], "atoms": [{"point": 0, "label": 0, "mass": "1"}]}"#;
        assert!(parse_json::<InstanceDoc>(both).unwrap().load().is_err());
        let out_of_range = r#"{"points": [[0]], "atoms": [{"point": 4, "label": 0, "mass": "1"}]}"#;
        assert!(parse_json::<InstanceDoc>(out_of_range).unwrap().load().is_err());
        let bad_mass = r#"{"points": [[0]], "atoms": [{"point": 0, "label": 0, "mass": "1/2"}]}"#;
        assert!(parse_json::<InstanceDoc>(bad_mass).unwrap().load().is_err());
        assert!(parse_json::<InstanceDoc>(r#"{"points": [[0]], "atoms": [], "extra": 1}"#).is_err());
    }

    #[test]
    fn classifiers_and_mixtures() {
        let c: ClassifierDoc = parse_json(r#"{"probs": ["1/3", "1"]}"#).unwrap();
        assert_eq!(c.load().unwrap().to_randomized().probs()[0], Rational::ratio(1, 3));
        let c: ClassifierDoc = parse_json(r#"{"labels": [0, 1, 1]}"#).unwrap();
        assert!(matches!(c.load().unwrap(), LoadedClassifier::Deterministic(_)));
        assert!(parse_json::<ClassifierDoc>(r#"{"labels": [2]}"#).unwrap().load().is_err());

        let m: MixtureDoc = parse_json(r#"{"components": [[0, 1], [1, 1]]}"#).unwrap();
        assert!(m.load().unwrap().is_uniform());
        let m: MixtureDoc = parse_json(r#"{"components": [[0, 1], [1, 1]], "weights": ["1/4", "1/2"]}"#).unwrap();
        assert!(m.load().is_err());
    }

    #[test]
    fn games_and_kernels() {
        let g: GameDoc = parse_json(r#"{"payoff": [["1", 0], [0, "1"]]}"#).unwrap();
        assert_eq!(g.load().unwrap().rows(), 2);
        let space = FiniteMetricSpace::from_points(vec![vec![0.0], vec![1.0]], Norm::L2).unwrap();
        let k: KernelDoc = parse_json(r#"{"rows": [["1/2", "1/2"], [0, 1]]}"#).unwrap();
        assert_eq!(k.load(&space).unwrap().len(), 2);
        let k: KernelDoc = parse_json(r#"{"gaussian": {"sigma": 1.0, "radius": 1.0}}"#).unwrap();
        assert_eq!(k.load(&space).unwrap().len(), 2);
        let k: KernelDoc = parse_json(r#"{"rows": [["1"]]}"#).unwrap();
        assert!(k.load(&space).is_err());
    }

    #[test]
    fn config_rejects_unknown_fields() {
        let c: ExperimentConfig = parse_json(r#"{"instance": "a.json", "seed": 7, "eps": 0.5}"#).unwrap();
        assert_eq!(c.seed, Some(7));
        assert!(parse_json::<ExperimentConfig>(r#"{"sed": 7}"#).is_err());
    }
}
