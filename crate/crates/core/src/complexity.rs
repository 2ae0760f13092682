//! Finite range spaces and the complexity measures built on them: VC and
//! dual VC dimension, growth functions, region counts of line arrangements,
//! exact dual Rademacher complexity and the finite-sample approximation
//! experiment for uniform mixtures.

use std::collections::BTreeSet;

use rand::Rng;

use crate::classifiers::{adv_risk, zero_one_loss, DeterministicClassifier};
use crate::domain::{Label, LabeledDistribution, Neighborhoods};
use crate::error::{Error, Result};
use crate::geometry::LinearClassifier;
use crate::mixtures::Mixture;
use crate::random;
use crate::scalar::{self, Scalar};
use crate::Rational;

pub const MAX_GROUND: usize = 128;
/// Subset-times-range checks allowed in one VC computation.
pub const MAX_VC_WORK: u64 = 50_000_000;
pub const MAX_GROWTH_SUBSETS: u64 = 1_000_000;
pub const MAX_EXACT_RADEMACHER_K: usize = 20;
pub const MAX_LINES: usize = 6;
pub const LINE_OFFSET: f64 = 1e-3;
pub const FAR_RADIUS: f64 = 1e3;
pub const MAX_INTERSECTION_COORD: f64 = 100.0;

fn full_mask(n: usize) -> u128 {
    if n == 128 {
        u128::MAX
    } else {
        (1u128 << n) - 1
    }
}

/// A ground set `0..n` and a family of its subsets stored as bit masks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RangeSpace {
    ground_size: usize,
    ranges: Vec<u128>,
}

impl RangeSpace {
    /// Duplicate ranges are dropped, keeping first occurrences in order.
    pub fn new(ground_size: usize, ranges: Vec<u128>) -> Result<Self> {
        if ground_size > MAX_GROUND {
            return Err(Error::CapExceeded { what: "range space ground size", cap: MAX_GROUND, got: ground_size });
        }
        let full = full_mask(ground_size);
        if let Some(r) = ranges.iter().find(|r| **r & !full != 0) {
            return Err(Error::InvalidRangeSpace(format!("range {r:#x} leaves the ground set of {ground_size} points")));
        }
        let mut seen = BTreeSet::new();
        let ranges = ranges.into_iter().filter(|r| seen.insert(*r)).collect();
        Ok(RangeSpace { ground_size, ranges })
    }

    pub fn from_sets(ground_size: usize, sets: &[Vec<usize>]) -> Result<Self> {
        let mut masks = Vec::with_capacity(sets.len());
        for s in sets {
            let mut m = 0u128;
            for &i in s {
                if i >= ground_size {
                    return Err(Error::IndexOutOfRange { index: i, size: ground_size });
                }
                m |= 1 << i;
            }
            masks.push(m);
        }
        Self::new(ground_size, masks)
    }

    /// Ground set = domain points, one range per classifier's 1-set.
    pub fn from_classifiers(family: &[DeterministicClassifier]) -> Result<Self> {
        let n = family.first().map(|f| f.labels().len()).unwrap_or(0);
        let sets: Vec<Vec<usize>> = family.iter().map(|f| f.ones()).collect();
        if let Some(f) = family.iter().find(|f| f.labels().len() != n) {
            return Err(Error::DomainMismatch { expected: n, found: f.labels().len() });
        }
        Self::from_sets(n, &sets)
    }

    pub fn ground_size(&self) -> usize {
        self.ground_size
    }

    pub fn ranges(&self) -> &[u128] {
        &self.ranges
    }

    /// Number of distinct traces {r ∩ subset}.
    pub fn projection_count(&self, subset: u128) -> usize {
        self.ranges.iter().map(|r| r & subset).collect::<BTreeSet<_>>().len()
    }

    pub fn shatters(&self, subset: u128) -> bool {
        let k = subset.count_ones();
        k < 128 && self.projection_count(subset) as u128 == 1u128 << k
    }
}

/// Calls `f` on each k-subset of `0..n` as a mask, in lexicographic order of
/// index tuples, until it returns `true`.
fn any_k_subset(n: usize, k: usize, mut f: impl FnMut(u128) -> bool) -> bool {
    if k > n {
        return false;
    }
    let mut c: Vec<usize> = (0..k).collect();
    loop {
        let mask = c.iter().fold(0u128, |m, &i| m | 1 << i);
        if f(mask) {
            return true;
        }
        let mut i = k;
        loop {
            if i == 0 {
                return false;
            }
            i -= 1;
            if c[i] < n - k + i {
                c[i] += 1;
                for j in (i + 1)..k {
                    c[j] = c[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Largest k such that some k-subset is shattered.
///
/// Sizes are tried in increasing order; since subsets of shattered sets are
/// shattered, the search stops at the first size with no shattered subset.
/// No k-set can be shattered by fewer than 2^k ranges, which bounds the search.
pub fn vc_dimension(s: &RangeSpace) -> Result<usize> {
    let n = s.ground_size;
    let r = s.ranges.len();
    if r == 0 {
        return Err(Error::InvalidRangeSpace("no ranges; VC dimension is undefined".into()));
    }
    let mut work = 0u64;
    let mut vc = 0;
    for k in 1..=n {
        if k >= 127 || (1usize << k.min(63)) > r {
            break;
        }
        work = work.saturating_add(binomial(n as u64, k as u64).saturating_mul(r as u64));
        if work > MAX_VC_WORK {
            return Err(Error::CapExceeded { what: "VC search work", cap: MAX_VC_WORK as usize, got: work.min(usize::MAX as u64) as usize });
        }
        if any_k_subset(n, k, |m| s.shatters(m)) {
            vc = k;
        } else {
            break;
        }
    }
    Ok(vc)
}

/// Ground set = range indices; one range per original point x, holding the
/// indices of the ranges that contain x. Duplicates are dropped.
pub fn dual_range_space(s: &RangeSpace) -> Result<RangeSpace> {
    let r = s.ranges.len();
    if r > MAX_GROUND {
        return Err(Error::CapExceeded { what: "ranges for the dual space", cap: MAX_GROUND, got: r });
    }
    let ranges = (0..s.ground_size)
        .map(|x| s.ranges.iter().enumerate().filter(|(_, rg)| *rg >> x & 1 == 1).fold(0u128, |m, (i, _)| m | 1 << i))
        .collect();
    RangeSpace::new(r, ranges)
}

/// Maximum number of distinct traces on an m-subset of the ground set.
pub fn growth_function(s: &RangeSpace, m: usize) -> Result<usize> {
    let n = s.ground_size;
    if m > n {
        return Err(Error::InvalidRangeSpace(format!("growth function at m = {m} exceeds the ground size {n}")));
    }
    let subsets = binomial(n as u64, m as u64);
    if subsets > MAX_GROWTH_SUBSETS {
        return Err(Error::CapExceeded { what: "subsets for the growth function", cap: MAX_GROWTH_SUBSETS as usize, got: subsets.min(usize::MAX as u64) as usize });
    }
    let cap = 1usize.checked_shl(m as u32).unwrap_or(usize::MAX).min(s.ranges.len());
    let mut best = 0;
    any_k_subset(n, m, |mask| {
        best = best.max(s.projection_count(mask));
        best >= cap
    });
    Ok(best)
}

/// Maximum number of regions cut out by m ranges.
pub fn dual_growth_function(s: &RangeSpace, m: usize) -> Result<usize> {
    growth_function(&dual_range_space(s)?, m)
}

/// Σ_{i ≤ d} C(m, i).
pub fn sauer_bound(m: usize, d: usize) -> u64 {
    (0..=d.min(m)).map(|i| binomial(m as u64, i as u64)).fold(0u64, u64::saturating_add)
}

/// VC* ≤ 2^{VC+1}, both computed by brute force.
pub fn dual_vc_bound_check(s: &RangeSpace) -> Result<(usize, usize, bool)> {
    let vc = vc_dimension(s)?;
    let dual = dual_range_space(s)?;
    let dual_vc = if dual.ranges.is_empty() { 0 } else { vc_dimension(&dual)? };
    let holds = vc + 1 >= 64 || (dual_vc as u64) <= 1u64 << (vc + 1);
    Ok((vc, dual_vc, holds))
}

/// Π(m) ≤ Σ_{i ≤ VC} C(m, i) for every m up to the ground size.
pub fn sauer_check(s: &RangeSpace) -> Result<bool> {
    let vc = vc_dimension(s)?;
    for m in 0..=s.ground_size {
        if growth_function(s, m)? as u64 > sauer_bound(m, vc) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Sample points of a line arrangement in the plane.
///
/// For each pair of crossing lines, the crossing is offset by δ along the
/// four bisector directions ±d̂_i ± d̂_j; every line also contributes the
/// foot of the perpendicular from the origin offset by ±δ along its normal;
/// eight far points on a circle of radius 10³ are added. Every cell of an
/// arrangement in general position contains a sample.
pub fn line_arrangement_samples(lines: &[LinearClassifier]) -> Result<Vec<[f64; 2]>> {
    if lines.is_empty() || lines.len() > MAX_LINES {
        return Err(Error::InvalidGeometry(format!("need 1..={MAX_LINES} lines, got {}", lines.len())));
    }
    if let Some(l) = lines.iter().find(|l| l.dim() != 2) {
        return Err(Error::InvalidGeometry(format!("lines must be two-dimensional, got dimension {}", l.dim())));
    }
    let normal = |l: &LinearClassifier| {
        let w = l.w();
        let len = (w[0] * w[0] + w[1] * w[1]).sqrt();
        [w[0] / len, w[1] / len]
    };
    let mut pts = Vec::new();
    for i in 0..lines.len() {
        for j in (i + 1)..lines.len() {
            let (a, b) = (lines[i].w(), lines[j].w());
            let det = a[0] * b[1] - a[1] * b[0];
            if det.abs() < 1e-12 * (1.0 + a[0].abs() + a[1].abs()) * (1.0 + b[0].abs() + b[1].abs()) {
                continue;
            }
            // a·p = −b_i, b·p = −b_j
            let (ci, cj) = (-lines[i].b(), -lines[j].b());
            let p = [(ci * b[1] - a[1] * cj) / det, (a[0] * cj - ci * b[0]) / det];
            if p.iter().any(|c| c.abs() > MAX_INTERSECTION_COORD) {
                return Err(Error::InvalidGeometry(format!("lines {i} and {j} cross outside the supported window")));
            }
            let (ni, nj) = (normal(&lines[i]), normal(&lines[j]));
            let (di, dj) = ([-ni[1], ni[0]], [-nj[1], nj[0]]);
            for si in [1.0, -1.0] {
                for sj in [1.0, -1.0] {
                    pts.push([
                        p[0] + LINE_OFFSET * (si * di[0] + sj * dj[0]),
                        p[1] + LINE_OFFSET * (si * di[1] + sj * dj[1]),
                    ]);
                }
            }
        }
    }
    for l in lines {
        let n = normal(l);
        let w = l.w();
        let len = (w[0] * w[0] + w[1] * w[1]).sqrt();
        let foot = [-l.b() / len * n[0], -l.b() / len * n[1]];
        for s in [1.0, -1.0] {
            pts.push([foot[0] + s * LINE_OFFSET * n[0], foot[1] + s * LINE_OFFSET * n[1]]);
        }
    }
    for k in 0..8 {
        let t = std::f64::consts::TAU * k as f64 / 8.0;
        pts.push([FAR_RADIUS * t.cos(), FAR_RADIUS * t.sin()]);
    }
    Ok(pts)
}

/// Ground = arrangement samples, one range per line holding the samples on its positive side.
pub fn lines_region_space(lines: &[LinearClassifier]) -> Result<RangeSpace> {
    let pts = line_arrangement_samples(lines)?;
    let ranges = lines
        .iter()
        .map(|l| pts.iter().enumerate().filter(|(_, p)| l.score(&p[..]) > 0.0).fold(0u128, |m, (i, _)| m | 1 << i))
        .collect();
    RangeSpace::new(pts.len(), ranges)
}

/// Number of distinct sign vectors over the arrangement samples.
pub fn region_count(lines: &[LinearClassifier]) -> Result<usize> {
    let pts = line_arrangement_samples(lines)?;
    Ok(pts
        .iter()
        .map(|p| lines.iter().map(|l| l.score(&p[..]) > 0.0).collect::<Vec<_>>())
        .collect::<BTreeSet<_>>()
        .len())
}

/// K classifiers over a finite evaluation set B, with a label.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierTuple {
    classifiers: Vec<DeterministicClassifier>,
    label: Label,
}

impl ClassifierTuple {
    pub fn new(classifiers: Vec<DeterministicClassifier>, label: Label) -> Result<Self> {
        let b = classifiers.first().map(|c| c.labels().len()).ok_or_else(|| Error::InvalidInput("empty classifier tuple".into()))?;
        if b == 0 {
            return Err(Error::InvalidInput("empty evaluation set".into()));
        }
        if let Some(c) = classifiers.iter().find(|c| c.labels().len() != b) {
            return Err(Error::DomainMismatch { expected: b, found: c.labels().len() });
        }
        Ok(ClassifierTuple { classifiers, label })
    }

    pub fn k(&self) -> usize {
        self.classifiers.len()
    }

    pub fn points(&self) -> usize {
        self.classifiers[0].labels().len()
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn classifiers(&self) -> &[DeterministicClassifier] {
        &self.classifiers
    }

    pub fn with_label(&self, label: Label) -> Self {
        ClassifierTuple { classifiers: self.classifiers.clone(), label }
    }

    /// The same classifiers restricted to the points in `subset`.
    pub fn restrict(&self, subset: &[usize]) -> Result<Self> {
        let cs = self.classifiers.iter().map(|c| DeterministicClassifier::new(subset.iter().map(|&i| c.label(i)).collect())).collect();
        Self::new(cs, self.label)
    }

    /// Bit i of entry x is set when classifier i errs at x.
    fn error_masks(&self) -> Vec<u32> {
        (0..self.points())
            .map(|x| self.classifiers.iter().enumerate().filter(|(_, c)| c.label(x) != self.label).fold(0u32, |m, (i, _)| m | 1 << i))
            .collect()
    }

    /// Bit i of entry x is set when classifier i predicts 1 at x.
    fn one_masks(&self) -> Vec<u32> {
        (0..self.points())
            .map(|x| self.classifiers.iter().enumerate().filter(|(_, c)| c.label(x).is_one()).fold(0u32, |m, (i, _)| m | 1 << i))
            .collect()
    }

    /// Distinct output patterns (h_1(x), …, h_K(x)) over B.
    pub fn pattern_count(&self) -> usize {
        self.one_masks().into_iter().collect::<BTreeSet<_>>().len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RademacherMode {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum RademacherValue {
    Exact(Rational),
    Estimate(f64),
}

impl RademacherValue {
    pub fn as_f64(&self) -> f64 {
        match self {
            RademacherValue::Exact(r) => r.as_f64(),
            RademacherValue::Estimate(v) => *v,
        }
    }
}

/// Σ over all sign vectors of max_x Σ σ_i v_i(x), with v encoded by bit masks
/// and values in {0, 1} (`pm = false`) or {−1, +1} (`pm = true`).
fn signed_sup_total(masks: &[u32], k: usize, pm: bool) -> i64 {
    let all = if k == 32 { u32::MAX } else { (1u32 << k) - 1 };
    let mut total = 0i64;
    for plus in 0..=all {
        let best = masks
            .iter()
            .map(|&v| {
                let pos = (v & plus).count_ones() as i64 - (v & !plus & all).count_ones() as i64;
                if pm {
                    // h̃ = 2v − 1, Σσh̃ = 2Σσv − Σσ
                    let sigma_sum = 2 * plus.count_ones() as i64 - k as i64;
                    2 * pos - sigma_sum
                } else {
                    pos
                }
            })
            .max()
            .expect("evaluation set is nonempty");
        total += best;
        if plus == all {
            break;
        }
    }
    total
}

/// E_σ max_{x ∈ B} (1/K) Σ σ_i 1{h_i(x) ≠ y}, exactly.
pub fn dual_rademacher_exact(t: &ClassifierTuple) -> Result<Rational> {
    let k = t.k();
    if k > MAX_EXACT_RADEMACHER_K {
        return Err(Error::CapExceeded { what: "classifiers for exact Rademacher enumeration", cap: MAX_EXACT_RADEMACHER_K, got: k });
    }
    let total = signed_sup_total(&t.error_masks(), k, false);
    Ok(Rational::ratio(total, (1i64 << k) * k as i64))
}

/// E_σ max_{x ∈ B} (1/K) Σ σ_i (2h_i(x) − 1), exactly.
pub fn pm_rademacher_exact(t: &ClassifierTuple) -> Result<Rational> {
    let k = t.k();
    if k > MAX_EXACT_RADEMACHER_K {
        return Err(Error::CapExceeded { what: "classifiers for exact Rademacher enumeration", cap: MAX_EXACT_RADEMACHER_K, got: k });
    }
    let total = signed_sup_total(&t.one_masks(), k, true);
    Ok(Rational::ratio(total, (1i64 << k) * k as i64))
}

/// Seeded Monte-Carlo estimate of the dual Rademacher complexity.
pub fn dual_rademacher_mc(t: &ClassifierTuple, samples: usize, seed: u64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::InvalidInput("need at least one Monte-Carlo sample".into()));
    }
    let mut rng = random::rng(seed);
    let errs: Vec<Vec<bool>> = (0..t.points()).map(|x| t.classifiers.iter().map(|c| c.label(x) != t.label).collect()).collect();
    let k = t.k() as f64;
    let mut acc = 0.0;
    for _ in 0..samples {
        let sigma: Vec<f64> = (0..t.k()).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
        acc += errs
            .iter()
            .map(|e| e.iter().zip(&sigma).filter(|(b, _)| **b).map(|(_, s)| s).sum::<f64>() / k)
            .fold(f64::NEG_INFINITY, f64::max);
    }
    Ok(acc / samples as f64)
}

pub fn dual_rademacher(t: &ClassifierTuple, mode: RademacherMode) -> Result<RademacherValue> {
    match mode {
        RademacherMode::Exact => dual_rademacher_exact(t).map(RademacherValue::Exact),
        RademacherMode::MonteCarlo { samples, seed } => dual_rademacher_mc(t, samples, seed).map(RademacherValue::Estimate),
    }
}

/// Exact-versus-float `value ≤ bound`, converting the bound to an exact fraction.
pub fn rational_le_f64(value: &Rational, bound: f64) -> bool {
    match scalar::rational_from_f64(bound) {
        Some(b) => *value <= b,
        None => bound == f64::INFINITY,
    }
}

/// K nested threshold classifiers on an n-point line: h_j is 1 on the last ⌊j·n/K⌋ points.
pub fn nested_thresholds(n_points: usize, k: usize) -> Result<ClassifierTuple> {
    if n_points == 0 || k == 0 {
        return Err(Error::InvalidInput("need at least one point and one classifier".into()));
    }
    let cs = (1..=k)
        .map(|j| {
            let s = j * n_points / k;
            DeterministicClassifier::from_fn(n_points, |i| i >= n_points - s)
        })
        .collect();
    ClassifierTuple::new(cs, Label::Zero)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub value: Rational,
    pub bound: f64,
    pub holds: bool,
}

/// Exact dual Rademacher complexity of nested thresholds against √(ln K / K).
pub fn nested_threshold_bound_check(n_points: usize, k: usize) -> Result<BoundCheck> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("the √(ln K / K) bound needs K ≥ 2, got {k}")));
    }
    let value = dual_rademacher_exact(&nested_thresholds(n_points, k)?)?;
    let bound = ((k as f64).ln() / k as f64).sqrt();
    let holds = rational_le_f64(&value, bound);
    Ok(BoundCheck { value, bound, holds })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MassartReport {
    /// E_σ sup_x (1/K) Σ σ_i h̃_i(x) with h̃ = 2h − 1.
    pub value: Rational,
    pub patterns: usize,
    pub bound: f64,
    pub holds: bool,
    pub vc: usize,
    /// √(2^{VC+2} ln K / K), present when K ≥ 2.
    pub chained_bound: Option<f64>,
    pub chained_holds: bool,
}

pub fn massart_bound_check(t: &ClassifierTuple) -> Result<MassartReport> {
    let value = pm_rademacher_exact(t)?;
    let patterns = t.pattern_count();
    let k = t.k() as f64;
    let bound = (2.0 * (patterns as f64).ln() / k).sqrt();
    let holds = rational_le_f64(&value, bound);
    let vc = vc_dimension(&RangeSpace::from_classifiers(&t.classifiers)?)?;
    let chained_bound = (t.k() >= 2).then(|| ((2f64.powi(vc as i32 + 2)) * k.ln() / k).sqrt());
    let chained_holds = chained_bound.is_none_or(|b| rational_le_f64(&value, b));
    Ok(MassartReport { value, patterns, bound, holds, vc, chained_bound, chained_holds })
}

pub const MAX_APPROX_FAMILY: usize = 12;
pub const MAX_APPROX_DOMAIN: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct ApproximationReport {
    /// Risk of the uniform mixture over the whole family.
    pub mu_risk: Rational,
    pub vc: usize,
    pub trial_risks: Vec<Rational>,
    pub min_trial_risk: Rational,
    pub mean_trial_risk: f64,
    /// R(μ) + 2^{VC/2} √(ln K / K).
    pub vc_bound: f64,
    pub vc_bound_holds: bool,
    /// Per trial: E over atoms of the exact dual Rademacher complexity on the ball.
    pub rademacher: Vec<Rational>,
    /// R(μ) + mean Rademacher term.
    pub rademacher_bound: f64,
    pub rademacher_bound_holds: bool,
    pub mean_rademacher: f64,
    /// E over atoms of sup over the ball of |μ-loss − mixture-loss|.
    pub absolute: DeviationCheck,
    /// Same with the signed difference mixture-loss − μ-loss; this is the
    /// direction that bounds the sampled mixture's excess risk.
    pub sample_excess: DeviationCheck,
    /// Same with μ-loss − mixture-loss.
    pub mu_excess: DeviationCheck,
}

impl ApproximationReport {
    /// Both signed deviations stay within twice the Rademacher term.
    pub fn one_sided_holds(&self) -> bool {
        self.sample_excess.holds && self.mu_excess.holds
    }
}

/// Per-trial deviations compared with 2·Rademacher across trials.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationCheck {
    pub deviations: Vec<Rational>,
    pub mean: f64,
    /// Standard error of (deviation − 2·Rademacher) across trials.
    pub standard_error: f64,
    /// mean ≤ 2·mean Rademacher + 3 standard errors.
    pub holds: bool,
}

impl DeviationCheck {
    fn new(deviations: Vec<Rational>, rademacher: &[Rational]) -> Self {
        let diffs: Vec<f64> = deviations.iter().zip(rademacher).map(|(dv, r)| dv.as_f64() - 2.0 * r.as_f64()).collect();
        let dm = mean(&diffs);
        let var = if diffs.len() > 1 { diffs.iter().map(|x| (x - dm).powi(2)).sum::<f64>() / (diffs.len() - 1) as f64 } else { 0.0 };
        let standard_error = (var / diffs.len() as f64).sqrt();
        let mean_dev = mean(&deviations.iter().map(Scalar::as_f64).collect::<Vec<_>>());
        let mean_rad = mean(&rademacher.iter().map(Scalar::as_f64).collect::<Vec<_>>());
        DeviationCheck { holds: mean_dev <= 2.0 * mean_rad + 3.0 * standard_error, deviations, mean: mean_dev, standard_error }
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Draws K i.i.d. members of `family` per trial and compares the uniform
/// K-mixture with the uniform mixture over the whole family.
pub fn approximation_experiment(
    family: &[DeterministicClassifier],
    d: &LabeledDistribution<Rational>,
    nbhd: &Neighborhoods,
    k: usize,
    num_trials: usize,
    seed: u64,
) -> Result<ApproximationReport> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("need K ≥ 2, got {k}")));
    }
    if family.is_empty() || family.len() > MAX_APPROX_FAMILY {
        return Err(Error::CapExceeded { what: "family size", cap: MAX_APPROX_FAMILY, got: family.len() });
    }
    if nbhd.len() > MAX_APPROX_DOMAIN {
        return Err(Error::CapExceeded { what: "domain size", cap: MAX_APPROX_DOMAIN, got: nbhd.len() });
    }
    if num_trials == 0 {
        return Err(Error::InvalidInput("need at least one trial".into()));
    }
    let mu = Mixture::<Rational>::uniform(family.to_vec())?;
    let mu_risk = adv_risk(&mu, d, nbhd)?;
    let vc = vc_dimension(&RangeSpace::from_classifiers(family)?)?;
    let mut rng = random::rng(seed);
    let (mut trial_risks, mut rademacher) = (Vec::new(), Vec::new());
    let (mut absolute, mut sample_excess, mut mu_excess) = (Vec::new(), Vec::new(), Vec::new());
    let zero = Rational::ratio(0, 1);
    for _ in 0..num_trials {
        let draws: Vec<DeterministicClassifier> = (0..k).map(|_| family[rng.gen_range(0..family.len())].clone()).collect();
        let mix = Mixture::<Rational>::uniform(draws.clone())?;
        trial_risks.push(adv_risk(&mix, d, nbhd)?);
        let tuple = ClassifierTuple::new(draws, Label::Zero)?;
        let (mut rad, mut abs, mut up, mut down) = (zero.clone(), zero.clone(), zero.clone(), zero.clone());
        for a in d.atoms() {
            let ball = nbhd.ball(a.point);
            rad += a.mass.clone() * dual_rademacher_exact(&tuple.with_label(a.label).restrict(ball)?)?;
            let diffs: Vec<Rational> =
                ball.iter().map(|&x| zero_one_loss(&mix, x, a.label) - zero_one_loss(&mu, x, a.label)).collect();
            let sup = |v: Vec<Rational>| scalar::max_of(v).expect("ball is nonempty");
            abs += a.mass.clone() * sup(diffs.iter().map(Scalar::abs_value).collect());
            up += a.mass.clone() * sup(diffs.clone());
            down += a.mass.clone() * sup(diffs.iter().map(|v| -v.clone()).collect());
        }
        rademacher.push(rad);
        absolute.push(abs);
        sample_excess.push(up);
        mu_excess.push(down);
    }
    let min_trial_risk = scalar::min_of(trial_risks.iter().cloned()).expect("at least one trial");
    let mean_trial_risk = mean(&trial_risks.iter().map(Scalar::as_f64).collect::<Vec<_>>());
    let kf = k as f64;
    let vc_bound = mu_risk.as_f64() + 2f64.powf(vc as f64 / 2.0) * (kf.ln() / kf).sqrt();
    let mean_rademacher = mean(&rademacher.iter().map(Scalar::as_f64).collect::<Vec<_>>());
    let rademacher_bound = mu_risk.as_f64() + mean_rademacher;
    Ok(ApproximationReport {
        vc_bound_holds: rational_le_f64(&min_trial_risk, vc_bound),
        rademacher_bound_holds: rational_le_f64(&min_trial_risk, rademacher_bound),
        absolute: DeviationCheck::new(absolute, &rademacher),
        sample_excess: DeviationCheck::new(sample_excess, &rademacher),
        mu_excess: DeviationCheck::new(mu_excess, &rademacher),
        mu_risk,
        vc,
        trial_risks,
        min_trial_risk,
        mean_trial_risk,
        vc_bound,
        rademacher,
        rademacher_bound,
        mean_rademacher,
    })
}
