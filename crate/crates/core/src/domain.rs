//! Finite metric spaces, closed ε-balls, ε-expansions and labeled point-mass
//! distributions.
//!
//! On a finite domain every supremum over a ball is a maximum, which is what
//! lets the rest of the crate compute adversarial risks exactly.

use std::collections::BTreeSet;
use std::fmt;

use log::warn;

use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};

/// Binary class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Zero,
    One,
}

impl Label {
    pub const BOTH: [Label; 2] = [Label::Zero, Label::One];

    pub fn from_bit(bit: u8) -> Result<Self> {
        match bit {
            0 => Ok(Label::Zero),
            1 => Ok(Label::One),
            other => Err(Error::InvalidInput(format!("label must be 0 or 1, got {other}"))),
        }
    }

    pub fn from_bool(one: bool) -> Self {
        if one {
            Label::One
        } else {
            Label::Zero
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            Label::Zero => 0,
            Label::One => 1,
        }
    }

    pub fn is_one(self) -> bool {
        self == Label::One
    }

    pub fn flip(self) -> Self {
        match self {
            Label::Zero => Label::One,
            Label::One => Label::Zero,
        }
    }

    /// `-1` for class 0, `+1` for class 1.
    pub fn sign(self) -> f64 {
        match self {
            Label::Zero => -1.0,
            Label::One => 1.0,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bit())
    }
}

/// Distance-matrix builders for coordinate input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Norm {
    #[default]
    L2,
    LInf,
}

impl Norm {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        let diffs = a.iter().zip(b).map(|(x, y)| (x - y).abs());
        match self {
            Norm::L2 => diffs.map(|d| d * d).sum::<f64>().sqrt(),
            Norm::LInf => diffs.fold(0.0, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    coords: Option<Vec<Vec<f64>>>,
    dist: Vec<Vec<f64>>,
}

impl FiniteMetricSpace {
    /// Builds a space from an explicit distance matrix.
    ///
    /// The matrix must be square, finite, nonnegative, symmetric and zero on
    /// the diagonal. Triangle-inequality violations are logged, not rejected.
    pub fn from_distances(dist: Vec<Vec<f64>>) -> Result<Self> {
        let n = dist.len();
        if n == 0 {
            return Err(Error::InvalidMetric("empty domain".into()));
        }
        for (i, row) in dist.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidMetric(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            for (j, &d) in row.iter().enumerate() {
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::InvalidMetric(format!("dist[{i}][{j}] = {d} is not a finite nonnegative number")));
                }
            }
            if row[i] != 0.0 {
                return Err(Error::InvalidMetric(format!("dist[{i}][{i}] = {} must be 0", row[i])));
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if dist[i][j] != dist[j][i] {
                    return Err(Error::InvalidMetric(format!("dist[{i}][{j}] != dist[{j}][{i}]")));
                }
            }
        }
        let space = FiniteMetricSpace { coords: None, dist };
        let violations = space.triangle_violations();
        if violations > 0 {
            warn!("distance matrix violates the triangle inequality in {violations} triples");
        }
        Ok(space)
    }

    /// Builds a space from coordinates, with distances induced by `norm`.
    pub fn from_points(points: Vec<Vec<f64>>, norm: Norm) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::InvalidMetric("empty domain".into()));
        }
        let d = points[0].len();
        if d == 0 {
            return Err(Error::InvalidMetric("points must have at least one coordinate".into()));
        }
        if let Some(bad) = points.iter().position(|p| p.len() != d || p.iter().any(|c| !c.is_finite())) {
            return Err(Error::InvalidMetric(format!("point {bad} has the wrong dimension or a non-finite coordinate")));
        }
        let dist = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { norm.distance(&points[i], &points[j]) }).collect())
            .collect();
        Ok(FiniteMetricSpace { coords: Some(points), dist })
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    pub fn coords(&self) -> Option<&[Vec<f64>]> {
        self.coords.as_deref()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.dist[i][j]
    }

    pub fn distances(&self) -> &[Vec<f64>] {
        &self.dist
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index, size: self.len() })
        }
    }

    /// Number of ordered triples `(i, j, k)` with `d(i,k) > d(i,j) + d(j,k)`.
    pub fn triangle_violations(&self) -> usize {
        let n = self.len();
        let mut count = 0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let slack = self.dist[i][j] + self.dist[j][k] - self.dist[i][k];
                    if slack < -1e-12 * (1.0 + self.dist[i][k]) {
                        count += 1;
                    }
                }
            }
        }
        count
    }

    /// Closed ball `{j : d(x, j) <= eps}`, sorted ascending.
    pub fn ball(&self, x: usize, eps: f64) -> Result<Vec<usize>> {
        self.check_index(x)?;
        check_eps(eps)?;
        Ok(self.ball_unchecked(x, eps))
    }

    fn ball_unchecked(&self, x: usize, eps: f64) -> Vec<usize> {
        self.dist[x].iter().enumerate().filter(|(_, &d)| d <= eps).map(|(j, _)| j).collect()
    }

    /// `{x : min_{f in set} d(x, f) <= eps}`, sorted ascending. Empty for an empty set.
    pub fn eps_expansion(&self, set: &[usize], eps: f64) -> Result<Vec<usize>> {
        check_eps(eps)?;
        for &f in set {
            self.check_index(f)?;
        }
        Ok((0..self.len()).filter(|&x| set.iter().any(|&f| self.dist[x][f] <= eps)).collect())
    }

    /// Precomputes every ball of radius `eps`.
    pub fn neighborhoods(&self, eps: f64) -> Result<Neighborhoods> {
        check_eps(eps)?;
        let balls = (0..self.len()).map(|x| self.ball_unchecked(x, eps)).collect();
        Ok(Neighborhoods { eps, balls })
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() && eps >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("radius must be a finite nonnegative number, got {eps}")))
    }
}

/// All closed balls of one radius over one space: the attacker's move sets.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighborhoods {
    eps: f64,
    balls: Vec<Vec<usize>>,
}

impl Neighborhoods {
    /// Builds neighborhoods from explicit move sets (each must contain its center).
    pub fn from_balls(eps: f64, balls: Vec<Vec<usize>>) -> Result<Self> {
        let n = balls.len();
        for (x, ball) in balls.iter().enumerate() {
            if !ball.contains(&x) {
                return Err(Error::InvalidMetric(format!("ball around {x} does not contain its center")));
            }
            if let Some(&bad) = ball.iter().find(|&&j| j >= n) {
                return Err(Error::IndexOutOfRange { index: bad, size: n });
            }
        }
        Ok(Neighborhoods { eps, balls })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    pub fn ball(&self, x: usize) -> &[usize] {
        &self.balls[x]
    }

    pub fn balls(&self) -> &[Vec<usize>] {
        &self.balls
    }
}

/// One point mass of the joint distribution over domain × labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom<S> {
    pub point: usize,
    pub label: Label,
    pub mass: S,
}

/// Point-mass distribution over `(x, y)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDistribution<S> {
    atoms: Vec<Atom<S>>,
}

impl<S: Scalar> LabeledDistribution<S> {
    /// Validates strictly positive masses summing to one and unique `(point, label)` pairs.
    pub fn new(atoms: Vec<Atom<S>>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution("no atoms".into()));
        }
        let mut seen = BTreeSet::new();
        for atom in &atoms {
            if atom.mass <= S::zero() {
                return Err(Error::InvalidDistribution(format!(
                    "atom ({}, {}) has nonpositive mass {}",
                    atom.point, atom.label, atom.mass
                )));
            }
            if !seen.insert((atom.point, atom.label)) {
                return Err(Error::InvalidDistribution(format!(
                    "duplicate atom for point {} and label {}",
                    atom.point, atom.label
                )));
            }
        }
        let total = scalar::sum(atoms.iter().map(|a| a.mass.clone()));
        if !total.agrees(&S::one()) {
            return Err(Error::InvalidDistribution(format!("masses sum to {total}, not 1")));
        }
        Ok(LabeledDistribution { atoms })
    }

    pub fn atoms(&self) -> &[Atom<S>] {
        &self.atoms
    }

    /// Largest point index referenced plus one.
    pub fn min_domain_size(&self) -> usize {
        self.atoms.iter().map(|a| a.point + 1).max().unwrap_or(0)
    }

    /// Errors unless every atom's point lies in a domain of size `n`.
    pub fn check_domain(&self, n: usize) -> Result<()> {
        match self.atoms.iter().find(|a| a.point >= n) {
            Some(a) => Err(Error::IndexOutOfRange { index: a.point, size: n }),
            None => Ok(()),
        }
    }

    /// ν(y): total mass carried by label `y`.
    pub fn marginal(&self, label: Label) -> S {
        scalar::sum(self.atoms.iter().filter(|a| a.label == label).map(|a| a.mass.clone()))
    }

    /// p_y as `(point, conditional mass)` pairs; errors when ν(y) = 0.
    pub fn conditional(&self, label: Label) -> Result<Vec<(usize, S)>> {
        let nu = self.marginal(label);
        if nu.is_zero() {
            return Err(Error::EmptyClass(label.bit()));
        }
        Ok(self
            .atoms
            .iter()
            .filter(|a| a.label == label)
            .map(|a| (a.point, a.mass.clone() / nu.clone()))
            .collect())
    }

    /// Same masses, every label flipped.
    pub fn flipped(&self) -> Self {
        LabeledDistribution {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom { point: a.point, label: a.label.flip(), mass: a.mass.clone() })
                .collect(),
        }
    }
}
