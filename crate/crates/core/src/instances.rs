//! Small hand-built instances with known answers.

use crate::classifiers::{adv_risk, DeterministicClassifier};
use crate::complexity::region_count;
use crate::domain::{Atom, FiniteMetricSpace, Label, LabeledDistribution, Norm};
use crate::error::Result;
use crate::games::{defender_attack_matrix, prune_dominated_columns, solve_zero_sum_exact, DEFAULT_MAX_COLUMNS};
use crate::geometry::{find_robust_angle, joint_attack_distance, robust_at, LinearClassifier, LinearInstance};
use crate::mixtures::{best_labeling, Mixture};
use crate::scalar::Scalar;
use crate::smoothing::{gaussian_grid_kernel, NoiseKernel};
use crate::Rational;

fn q(n: i64, d: i64) -> Rational {
    Rational::ratio(n, d)
}

/// One point at the origin of a line with class 0, two classifiers that each
/// flag a different side of it within reach of the attacker.
#[derive(Debug, Clone)]
pub struct WarmUp {
    pub space: FiniteMetricSpace,
    pub dist: LabeledDistribution<Rational>,
    pub eps: f64,
    pub f1: DeterministicClassifier,
    pub f2: DeterministicClassifier,
}

pub fn warm_up() -> WarmUp {
    let xs = [0.0, 0.8, -0.8, 3.0, -3.0];
    let space = FiniteMetricSpace::from_points(xs.iter().map(|&x| vec![x]).collect(), Norm::L2).expect("finite points");
    let dist = LabeledDistribution::new(vec![Atom { point: 0, label: Label::Zero, mass: q(1, 1) }]).expect("one unit atom");
    let f1 = DeterministicClassifier::from_fn(xs.len(), |i| xs[i] > 0.5);
    let f2 = DeterministicClassifier::from_fn(xs.len(), |i| xs[i] < -0.5);
    WarmUp { space, dist, eps: 1.0, f1, f2 }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WarmUpReport {
    pub pure_risks: [Rational; 2],
    pub mixture_risk: Rational,
    pub pruned_payoff: Vec<Vec<Rational>>,
    pub game_value: Rational,
    pub row_strategy: Vec<Rational>,
    pub best_labeling_risk: Rational,
}

impl WarmUpReport {
    pub fn matches_expected(&self) -> bool {
        let half = q(1, 2);
        self.pure_risks == [q(1, 1), q(1, 1)]
            && self.mixture_risk == half
            && self.game_value == half
            && self.row_strategy == vec![half.clone(), half]
            && self.best_labeling_risk == q(0, 1)
    }
}

pub fn warm_up_report() -> Result<WarmUpReport> {
    let w = warm_up();
    let nb = w.space.neighborhoods(w.eps)?;
    let pure_risks = [adv_risk::<Rational, _>(&w.f1, &w.dist, &nb)?, adv_risk::<Rational, _>(&w.f2, &w.dist, &nb)?];
    let family = [w.f1.clone(), w.f2.clone()];
    let mix = Mixture::<Rational>::uniform(family.to_vec())?;
    let mixture_risk = adv_risk(&mix, &w.dist, &nb)?;
    let game = defender_attack_matrix(&family, &w.dist, &nb, DEFAULT_MAX_COLUMNS)?;
    let (pruned, _) = prune_dominated_columns(&game);
    let eq = solve_zero_sum_exact(&game)?;
    let (best_labeling_risk, _) = best_labeling(&w.dist, &nb)?;
    Ok(WarmUpReport {
        pure_risks,
        mixture_risk,
        pruned_payoff: pruned.payoff().to_vec(),
        game_value: eq.value,
        row_strategy: eq.row_strategy,
        best_labeling_risk,
    })
}

/// Four labeled points in the plane and two mirrored linear classifiers.
#[derive(Debug, Clone)]
pub struct LinearExample {
    pub instance: LinearInstance<Rational>,
    pub f1: LinearClassifier,
    pub f2: LinearClassifier,
}

pub fn linear_example() -> LinearExample {
    let instance = LinearInstance {
        points: vec![vec![0.0, 1.0], vec![-2.7, 1.1], vec![2.7, 1.1], vec![0.0, -2.0]],
        labels: vec![Label::One, Label::Zero, Label::Zero, Label::Zero],
        masses: vec![q(1, 2), q(1, 6), q(1, 6), q(1, 6)],
        eps: 1.0,
    };
    let w2 = 0.565132728;
    let b = 0.536876091;
    let f1 = LinearClassifier::new(vec![0.825, w2], b).expect("nonzero normal");
    let f2 = LinearClassifier::new(vec![-0.825, w2], b).expect("nonzero normal");
    LinearExample { instance, f1, f2 }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearExampleReport {
    pub risk_f1: Rational,
    pub risk_f2: Rational,
    pub mixture_risk: Rational,
    pub mixture_losses: Vec<Rational>,
    pub f1_robust: Vec<bool>,
    pub f2_robust: Vec<bool>,
    /// Distance from the last point to the set both classifiers misclassify.
    pub pair_attack_distance: f64,
    /// No unit-normal classifier is robust at points 1, 2 and 4 (resp. 1, 3, 4).
    pub impossible_left: bool,
    pub impossible_right: bool,
    /// With a radius of 0.1 a robust classifier for points 1, 2, 4 exists.
    pub relaxed_feasible: bool,
}

impl LinearExampleReport {
    pub fn matches_expected(&self) -> bool {
        let h = q(1, 2);
        self.risk_f1 == q(1, 3)
            && self.risk_f2 == q(1, 3)
            && self.mixture_risk == q(1, 4)
            && self.mixture_losses == vec![q(0, 1), h.clone(), h.clone(), h]
            && self.pair_attack_distance > 1.0
            && self.impossible_left
            && self.impossible_right
            && self.relaxed_feasible
    }
}

pub fn linear_example_report(resolution: usize) -> Result<LinearExampleReport> {
    let ex = linear_example();
    let inst = &ex.instance;
    let comps = [ex.f1.clone(), ex.f2.clone()];
    let weights = [q(1, 2), q(1, 2)];
    let robust = |f: &LinearClassifier| inst.points.iter().zip(&inst.labels).map(|(x, y)| robust_at(f, x, *y, inst.eps)).collect();
    let triplet = |idx: [usize; 3]| idx.iter().map(|&i| (inst.points[i].clone(), inst.labels[i])).collect::<Vec<_>>();
    Ok(LinearExampleReport {
        risk_f1: inst.risk(&ex.f1),
        risk_f2: inst.risk(&ex.f2),
        mixture_risk: inst.mixture_risk(&comps, &weights)?,
        mixture_losses: inst.mixture_losses(&comps, &weights)?,
        f1_robust: robust(&ex.f1),
        f2_robust: robust(&ex.f2),
        pair_attack_distance: joint_attack_distance(&comps, &inst.points[3], inst.labels[3])?,
        impossible_left: find_robust_angle(&triplet([0, 1, 3]), inst.eps, resolution).is_none(),
        impossible_right: find_robust_angle(&triplet([0, 2, 3]), inst.eps, resolution).is_none(),
        relaxed_feasible: find_robust_angle(&triplet([0, 1, 3]), 0.1, resolution).is_some(),
    })
}

/// No classifier robust at the given triplet exists among `resolution` angles.
pub fn impossibility_scan(resolution: usize) -> bool {
    let ex = linear_example();
    let inst = &ex.instance;
    let pts: Vec<_> = [0, 1, 3].iter().map(|&i| (inst.points[i].clone(), inst.labels[i])).collect();
    find_robust_angle(&pts, inst.eps, resolution).is_none()
}

/// Eight grid points on a line, class 0 on the left half and class 1 on the
/// right, with a boundary classifier and a truncated Gaussian kernel.
#[derive(Debug, Clone)]
pub struct TwoClusters {
    pub space: FiniteMetricSpace,
    pub dist: LabeledDistribution<Rational>,
    pub eps: f64,
    pub f: DeterministicClassifier,
    pub kernel: NoiseKernel<Rational>,
}

pub fn two_clusters() -> Result<TwoClusters> {
    let n = 8;
    let space = FiniteMetricSpace::from_points((0..n).map(|i| vec![i as f64]).collect(), Norm::L2)?;
    let dist = LabeledDistribution::new(
        (0..n).map(|i| Atom { point: i, label: Label::from_bool(i >= n / 2), mass: q(1, n as i64) }).collect(),
    )?;
    let f = DeterministicClassifier::from_fn(n, |i| i >= n / 2);
    let kernel = gaussian_grid_kernel(&space, 1.0, 2.0)?;
    Ok(TwoClusters { space, dist, eps: 1.0, f, kernel })
}

/// Three lines in general position.
pub fn three_lines() -> Vec<LinearClassifier> {
    vec![
        LinearClassifier::new(vec![1.0, 0.0], 0.0).expect("nonzero normal"),
        LinearClassifier::new(vec![0.0, 1.0], 0.0).expect("nonzero normal"),
        LinearClassifier::new(vec![1.0, 1.0], -1.0).expect("nonzero normal"),
    ]
}

pub fn three_line_regions() -> Result<usize> {
    region_count(&three_lines())
}
