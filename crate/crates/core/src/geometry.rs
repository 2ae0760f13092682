//! Linear classifiers in two or three dimensions under ℓ2 attacks.
//!
//! Labels map to signs with class 1 as +1 and class 0 as −1. A classifier
//! predicts class 1 exactly when w·x + b > 0.

use crate::domain::Label;
use crate::error::{Error, Result};
use crate::games::solve_linear;
use crate::scalar::{self, Scalar};

pub const MAX_DIM: usize = 3;
pub const MAX_HALFSPACES: usize = 6;
pub const MAX_LINEAR_COMPONENTS: usize = 6;
/// Slack allowed when checking a projected point against its constraints.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearClassifier {
    w: Vec<f64>,
    b: f64,
}

impl LinearClassifier {
    pub fn new(w: Vec<f64>, b: f64) -> Result<Self> {
        if w.is_empty() || w.len() > MAX_DIM {
            return Err(Error::InvalidGeometry(format!("dimension must be 1..={MAX_DIM}, got {}", w.len())));
        }
        if !b.is_finite() || w.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidGeometry("non-finite coefficient".into()));
        }
        if w.iter().all(|&c| c == 0.0) {
            return Err(Error::InvalidGeometry("normal vector must be nonzero".into()));
        }
        Ok(LinearClassifier { w, b })
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        dot(&self.w, x) + self.b
    }

    pub fn predict(&self, x: &[f64]) -> Label {
        Label::from_bool(self.score(x) > 0.0)
    }

    /// Closed set {z : y(w·z + b) ≤ 0} as a single halfspace.
    pub fn misclassification_region(&self, y: Label) -> Halfspace {
        let s = y.sign();
        Halfspace { a: self.w.iter().map(|c| s * c).collect(), c: -s * self.b }
    }
}

/// y(w·x + b) > ε‖w‖: no point of the closed ε-ball is misclassified.
pub fn robust_at(f: &LinearClassifier, x: &[f64], y: Label, eps: f64) -> bool {
    y.sign() * f.score(x) > eps * norm(&f.w)
}

/// {z : a·z ≤ c}.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub a: Vec<f64>,
    pub c: f64,
}

impl Halfspace {
    pub fn contains(&self, z: &[f64], tol: f64) -> bool {
        dot(&self.a, z) <= self.c + tol * (1.0 + self.c.abs() + norm(&self.a) * norm(z))
    }
}

/// Subsets of `0..n` with at most `k` elements, smallest first.
fn small_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![vec![]];
    for size in 1..=k.min(n) {
        for mask in 0u32..(1u32 << n) {
            if mask.count_ones() as usize == size {
                out.push((0..n).filter(|i| mask >> i & 1 == 1).collect());
            }
        }
    }
    out
}

/// Euclidean projection of `x` onto the intersection of `halfspaces`, with its distance.
///
/// Every set of at most d constraints is treated as active in turn: `x` is
/// projected onto their common hyperplane intersection, infeasible candidates
/// are dropped and the closest remaining candidate is returned.
pub fn project_onto_polytope(x: &[f64], halfspaces: &[Halfspace]) -> Result<(Vec<f64>, f64)> {
    let d = x.len();
    if d == 0 || d > MAX_DIM {
        return Err(Error::InvalidGeometry(format!("dimension must be 1..={MAX_DIM}, got {d}")));
    }
    if halfspaces.len() > MAX_HALFSPACES {
        return Err(Error::CapExceeded { what: "halfspaces", cap: MAX_HALFSPACES, got: halfspaces.len() });
    }
    if let Some(h) = halfspaces.iter().find(|h| h.a.len() != d) {
        return Err(Error::DomainMismatch { expected: d, found: h.a.len() });
    }
    let mut best: Option<(Vec<f64>, f64)> = None;
    for active in small_subsets(halfspaces.len(), d) {
        let Some(z) = project_onto_flat(x, &active.iter().map(|&i| &halfspaces[i]).collect::<Vec<_>>()) else {
            continue;
        };
        if !halfspaces.iter().all(|h| h.contains(&z, FEASIBILITY_TOLERANCE)) {
            continue;
        }
        let dist = norm(&x.iter().zip(&z).map(|(a, b)| a - b).collect::<Vec<_>>());
        if best.as_ref().is_none_or(|(_, bd)| dist < *bd) {
            best = Some((z, dist));
        }
    }
    best.ok_or(Error::Infeasible)
}

/// x − Aᵀ(AAᵀ)⁻¹(Ax − c); `None` when the normals are dependent.
fn project_onto_flat(x: &[f64], active: &[&Halfspace]) -> Option<Vec<f64>> {
    if active.is_empty() {
        return Some(x.to_vec());
    }
    let gram: Vec<Vec<f64>> = active.iter().map(|p| active.iter().map(|q| dot(&p.a, &q.a)).collect()).collect();
    let resid: Vec<f64> = active.iter().map(|h| dot(&h.a, x) - h.c).collect();
    let lambda = solve_linear(gram, resid)?;
    let mut z = x.to_vec();
    for (h, l) in active.iter().zip(&lambda) {
        for (zi, ai) in z.iter_mut().zip(&h.a) {
            *zi -= l * ai;
        }
    }
    Some(z)
}

/// Largest total weight of components that one perturbation within `eps`
/// misclassifies simultaneously.
pub fn mixture_adv_loss_linear<S: Scalar>(
    components: &[LinearClassifier],
    weights: &[S],
    x: &[f64],
    y: Label,
    eps: f64,
) -> Result<S> {
    let m = components.len();
    if m == 0 || m != weights.len() {
        return Err(Error::InvalidMixture(format!("{m} components but {} weights", weights.len())));
    }
    if m > MAX_LINEAR_COMPONENTS {
        return Err(Error::CapExceeded { what: "linear mixture components", cap: MAX_LINEAR_COMPONENTS, got: m });
    }
    let mut best = S::zero();
    for mask in 1u32..(1u32 << m) {
        let members: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
        let total = scalar::sum(members.iter().map(|&i| weights[i].clone()));
        if total <= best {
            continue;
        }
        let regions: Vec<Halfspace> = members.iter().map(|&i| components[i].misclassification_region(y)).collect();
        match project_onto_polytope(x, &regions) {
            Ok((_, dist)) if dist <= eps => best = total,
            Ok(_) | Err(Error::Infeasible) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(best)
}

/// Distance from `x` to the set misclassified by every classifier in `components` at once.
pub fn joint_attack_distance(components: &[LinearClassifier], x: &[f64], y: Label) -> Result<f64> {
    let regions: Vec<Halfspace> = components.iter().map(|f| f.misclassification_region(y)).collect();
    Ok(project_onto_polytope(x, &regions)?.1)
}

/// Labeled points with masses, for the worked linear example.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearInstance<S> {
    pub points: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
    pub masses: Vec<S>,
    pub eps: f64,
}

impl<S: Scalar> LinearInstance<S> {
    pub fn risk(&self, f: &LinearClassifier) -> S {
        scalar::sum(
            self.points
                .iter()
                .zip(&self.labels)
                .zip(&self.masses)
                .filter(|((x, y), _)| !robust_at(f, x, **y, self.eps))
                .map(|(_, m)| m.clone()),
        )
    }

    pub fn mixture_losses(&self, components: &[LinearClassifier], weights: &[S]) -> Result<Vec<S>> {
        self.points
            .iter()
            .zip(&self.labels)
            .map(|(x, y)| mixture_adv_loss_linear(components, weights, x, *y, self.eps))
            .collect()
    }

    pub fn mixture_risk(&self, components: &[LinearClassifier], weights: &[S]) -> Result<S> {
        let losses = self.mixture_losses(components, weights)?;
        Ok(scalar::sum(losses.into_iter().zip(&self.masses).map(|(l, m)| l * m.clone())))
    }
}

/// First angle θ (of `resolution` equally spaced in [0, 2π)) at which some
/// offset b makes the unit-normal classifier (cos θ, sin θ) robust at every
/// point, together with the admissible open b-interval.
pub fn find_robust_angle(points: &[(Vec<f64>, Label)], eps: f64, resolution: usize) -> Option<(f64, f64, f64)> {
    (0..resolution).find_map(|k| {
        let theta = std::f64::consts::TAU * k as f64 / resolution as f64;
        let w = [theta.cos(), theta.sin()];
        let mut lower = f64::NEG_INFINITY;
        let mut upper = f64::INFINITY;
        for (x, y) in points {
            let s = dot(&w, x);
            match y {
                Label::One => lower = lower.max(eps - s),
                Label::Zero => upper = upper.min(-s - eps),
            }
        }
        (lower < upper).then_some((theta, lower, upper))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use proptest::prelude::*;

    fn f1() -> LinearClassifier {
        LinearClassifier::new(vec![0.825, 0.565132728], 0.536876091).unwrap()
    }

    #[test]
    fn robustness_condition() {
        assert!(robust_at(&f1(), &[0.0, 1.0], Label::One, 1.0));
        assert!(!robust_at(&f1(), &[0.0, -2.0], Label::Zero, 1.0));
        let g = LinearClassifier::new(vec![1.0, 0.0], 0.0).unwrap();
        assert!(robust_at(&g, &[0.5, 3.0], Label::One, 0.0));
        // boundary of the margin counts as attackable
        assert!(!robust_at(&g, &[1.0, 0.0], Label::One, 1.0));
        assert_eq!(g.predict(&[0.0, 5.0]), Label::Zero);
    }

    #[test]
    fn classifier_validation() {
        assert!(LinearClassifier::new(vec![0.0, 0.0], 1.0).is_err());
        assert!(LinearClassifier::new(vec![1.0; 4], 0.0).is_err());
        assert!(LinearClassifier::new(vec![f64::NAN], 0.0).is_err());
    }

    #[test]
    fn projection_trivial_cases() {
        let h = Halfspace { a: vec![1.0, 1.0], c: 1.0 };
        let (z, d) = project_onto_polytope(&[0.0, 0.0], std::slice::from_ref(&h)).unwrap();
        assert_eq!((z, d), (vec![0.0, 0.0], 0.0));
        let (_, d) = project_onto_polytope(&[2.0, 2.0], &[h]).unwrap();
        assert!((d - 3.0 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn projection_onto_wedge_corner() {
        // {x ≤ 0} ∩ {y ≤ 0}, point in the opposite quadrant projects to the apex
        let hs = vec![Halfspace { a: vec![1.0, 0.0], c: 0.0 }, Halfspace { a: vec![0.0, 1.0], c: 0.0 }];
        let (z, d) = project_onto_polytope(&[3.0, 4.0], &hs).unwrap();
        assert!(z.iter().all(|c| c.abs() < 1e-12));
        assert!((d - 5.0).abs() < 1e-12);
    }

    #[test]
    fn projection_infeasible_and_caps() {
        let hs = vec![Halfspace { a: vec![1.0], c: 0.0 }, Halfspace { a: vec![-1.0], c: -1.0 }];
        assert_eq!(project_onto_polytope(&[0.5], &hs), Err(Error::Infeasible));
        let many = vec![Halfspace { a: vec![1.0], c: 0.0 }; 7];
        assert!(project_onto_polytope(&[0.0], &many).is_err());
    }

    #[test]
    fn single_robust_classifier_has_zero_mixture_loss() {
        let g = LinearClassifier::new(vec![1.0, 0.0], 0.0).unwrap();
        let loss = mixture_adv_loss_linear(&[g], &[Rational::ratio(1, 1)], &[5.0, 0.0], Label::One, 1.0).unwrap();
        assert_eq!(loss, Rational::ratio(0, 1));
    }

    fn grid_distance(x: &[f64], hs: &[Halfspace]) -> Option<f64> {
        // 1000 x 1000 grid on [-5, 5]^2 plus exact tolerance of one cell diagonal
        let steps = 1000;
        let mut best: Option<f64> = None;
        for i in 0..=steps {
            for j in 0..=steps {
                let z = [-5.0 + 10.0 * i as f64 / steps as f64, -5.0 + 10.0 * j as f64 / steps as f64];
                if hs.iter().all(|h| dot(&h.a, &z) <= h.c) {
                    let d = ((z[0] - x[0]).powi(2) + (z[1] - x[1]).powi(2)).sqrt();
                    best = Some(best.map_or(d, |b: f64| b.min(d)));
                }
            }
        }
        best
    }

    #[test]
    fn projection_matches_grid_search() {
        use rand::Rng;
        let mut r = crate::random::rng(17);
        let mut checked = 0;
        while checked < 4 {
            let k = r.gen_range(1..=3);
            let hs: Vec<Halfspace> = (0..k)
                .map(|_| {
                    let t: f64 = r.gen_range(0.0..std::f64::consts::TAU);
                    Halfspace { a: vec![t.cos(), t.sin()], c: r.gen_range(-1.0..1.0) }
                })
                .collect();
            let x = [r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0)];
            let Ok((z, d)) = project_onto_polytope(&x, &hs) else { continue };
            if z.iter().any(|c| c.abs() > 4.5) {
                continue;
            }
            if let Some(g) = grid_distance(&x, &hs) {
                // grid cell diagonal bounds the discretization error
                assert!(d <= g + 1e-9 && g - d <= 0.01 * 2f64.sqrt() + 1e-9, "{d} vs {g}");
                checked += 1;
            }
        }
    }

    proptest! {
        #[test]
        fn projection_is_feasible_and_no_farther_than_samples(
            normals in proptest::collection::vec((0.0f64..std::f64::consts::TAU, -1.0f64..1.0), 1..5),
            x in (-3.0f64..3.0, -3.0f64..3.0),
            probes in proptest::collection::vec((-4.0f64..4.0, -4.0f64..4.0), 50),
        ) {
            let hs: Vec<Halfspace> = normals.iter().map(|&(t, c)| Halfspace { a: vec![t.cos(), t.sin()], c }).collect();
            let x = [x.0, x.1];
            match project_onto_polytope(&x, &hs) {
                Ok((z, d)) => {
                    prop_assert!(hs.iter().all(|h| h.contains(&z, 1e-7)));
                    for (px, py) in probes {
                        let p = [px, py];
                        if hs.iter().all(|h| dot(&h.a, &p) <= h.c) {
                            prop_assert!(d <= ((px - x[0]).powi(2) + (py - x[1]).powi(2)).sqrt() + 1e-9);
                        }
                    }
                }
                Err(e) => {
                    prop_assert_eq!(e, Error::Infeasible);
                    for (px, py) in probes {
                        prop_assert!(!hs.iter().all(|h| dot(&h.a, &[px, py]) <= h.c - 1e-9));
                    }
                }
            }
        }

        #[test]
        fn mixture_loss_monotone_and_matches_singleton(
            t in 0.0f64..std::f64::consts::TAU, b in -2.0f64..2.0,
            u in 0.0f64..std::f64::consts::TAU, c in -2.0f64..2.0,
            x in (-3.0f64..3.0, -3.0f64..3.0), y in 0u8..2, e1 in 0.0f64..3.0, e2 in 0.0f64..3.0,
        ) {
            let f = LinearClassifier::new(vec![t.cos(), t.sin()], b).unwrap();
            let g = LinearClassifier::new(vec![u.cos(), u.sin()], c).unwrap();
            let y = Label::from_bit(y).unwrap();
            let x = [x.0, x.1];
            let w = [Rational::ratio(1, 3), Rational::ratio(2, 3)];
            let (lo, hi) = (e1.min(e2), e1.max(e2));
            let l_lo = mixture_adv_loss_linear(&[f.clone(), g.clone()], &w, &x, y, lo).unwrap();
            let l_hi = mixture_adv_loss_linear(&[f.clone(), g], &w, &x, y, hi).unwrap();
            prop_assert!(l_lo <= l_hi);
            let margin = y.sign() * f.score(&x) - lo;
            prop_assume!(margin.abs() > 1e-9);
            let single = mixture_adv_loss_linear(std::slice::from_ref(&f), &[Rational::ratio(1, 1)], &x, y, lo).unwrap();
            prop_assert_eq!(single == Rational::ratio(0, 1), robust_at(&f, &x, y, lo));
        }
    }
}
