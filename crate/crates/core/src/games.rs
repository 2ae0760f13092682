//! Zero-sum matrix games: the row player (defender) minimizes, the column
//! player (attacker) maximizes.

use log::debug;

use crate::classifiers::{zero_one_loss, Classifier};
use crate::domain::{LabeledDistribution, Neighborhoods};
use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};

/// Largest smaller dimension accepted by the exact solver.
pub const MAX_EXACT_DIM: usize = 8;
/// Support pairs the exact solver may examine before giving up.
pub const MAX_SUPPORT_PAIRS: usize = 2_000_000;
pub const DEFAULT_MAX_COLUMNS: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct GameMatrix<S> {
    payoff: Vec<Vec<S>>,
}

impl<S: Scalar> GameMatrix<S> {
    pub fn new(payoff: Vec<Vec<S>>) -> Result<Self> {
        let n = payoff.first().map(Vec::len).unwrap_or(0);
        if payoff.is_empty() || n == 0 {
            return Err(Error::InvalidGame("payoff matrix must have at least one row and one column".into()));
        }
        if let Some(i) = payoff.iter().position(|r| r.len() != n) {
            return Err(Error::InvalidGame(format!("row {i} has {} entries, expected {n}", payoff[i].len())));
        }
        Ok(GameMatrix { payoff })
    }

    pub fn rows(&self) -> usize {
        self.payoff.len()
    }

    pub fn cols(&self) -> usize {
        self.payoff[0].len()
    }

    pub fn payoff(&self) -> &[Vec<S>] {
        &self.payoff
    }

    pub fn entry(&self, i: usize, j: usize) -> &S {
        &self.payoff[i][j]
    }

    /// Payoff of each pure row against the column mix `y`.
    pub fn row_payoffs(&self, y: &[S]) -> Vec<S> {
        self.payoff.iter().map(|row| scalar::sum(row.iter().zip(y).map(|(a, b)| a.clone() * b.clone()))).collect()
    }

    /// Payoff of each pure column against the row mix `x`.
    pub fn col_payoffs(&self, x: &[S]) -> Vec<S> {
        (0..self.cols())
            .map(|j| scalar::sum(self.payoff.iter().zip(x).map(|(row, xi)| row[j].clone() * xi.clone())))
            .collect()
    }

    pub fn transpose(&self) -> Self {
        GameMatrix { payoff: (0..self.cols()).map(|j| self.payoff.iter().map(|r| r[j].clone()).collect()).collect() }
    }

    fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        GameMatrix { payoff: rows.iter().map(|&i| cols.iter().map(|&j| self.payoff[i][j].clone()).collect()).collect() }
    }
}

fn ge<S: Scalar>(a: &S, b: &S) -> bool {
    a >= b || a.agrees(b)
}

/// Indices of columns that survive removal of weakly dominated columns.
/// Among identical columns the first is kept.
pub fn undominated_columns<S: Scalar>(g: &GameMatrix<S>) -> Vec<usize> {
    let n = g.cols();
    let col = |j: usize| (0..g.rows()).map(move |i| &g.payoff[i][j]);
    (0..n)
        .filter(|&j| {
            !(0..n).any(|k| {
                if k == j {
                    return false;
                }
                let dominates = col(k).zip(col(j)).all(|(a, b)| ge(a, b));
                let identical = col(k).zip(col(j)).all(|(a, b)| a.agrees(b));
                dominates && (!identical || k < j)
            })
        })
        .collect()
}

/// Indices of rows that survive removal of weakly dominated rows (the row player minimizes).
pub fn undominated_rows<S: Scalar>(g: &GameMatrix<S>) -> Vec<usize> {
    let m = g.rows();
    (0..m)
        .filter(|&i| {
            !(0..m).any(|k| {
                if k == i {
                    return false;
                }
                let dominates = g.payoff[k].iter().zip(&g.payoff[i]).all(|(a, b)| ge(b, a));
                let identical = g.payoff[k].iter().zip(&g.payoff[i]).all(|(a, b)| a.agrees(b));
                dominates && (!identical || k < i)
            })
        })
        .collect()
}

/// The game restricted to its undominated columns, with their original indices.
pub fn prune_dominated_columns<S: Scalar>(g: &GameMatrix<S>) -> (GameMatrix<S>, Vec<usize>) {
    let cols = undominated_columns(g);
    let rows: Vec<usize> = (0..g.rows()).collect();
    (g.select(&rows, &cols), cols)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium<S> {
    pub value: S,
    pub row_strategy: Vec<S>,
    pub col_strategy: Vec<S>,
    /// Payoff of every pure row against `col_strategy`; each is ≥ value.
    pub row_certificate: Vec<S>,
    /// Payoff of every pure column against `row_strategy`; each is ≤ value.
    pub col_certificate: Vec<S>,
}

impl<S: Scalar> Equilibrium<S> {
    fn from_strategies(g: &GameMatrix<S>, value: S, row_strategy: Vec<S>, col_strategy: Vec<S>) -> Self {
        let row_certificate = g.row_payoffs(&col_strategy);
        let col_certificate = g.col_payoffs(&row_strategy);
        Equilibrium { value, row_strategy, col_strategy, row_certificate, col_certificate }
    }

    /// Re-checks feasibility and the no-deviation inequalities against `g`.
    pub fn verify(&self, g: &GameMatrix<S>) -> bool {
        let simplex = |p: &[S]| p.iter().all(|x| ge(x, &S::zero())) && scalar::sum(p.iter().cloned()).agrees(&S::one());
        simplex(&self.row_strategy)
            && simplex(&self.col_strategy)
            && self.row_strategy.len() == g.rows()
            && self.col_strategy.len() == g.cols()
            && g.row_payoffs(&self.col_strategy).iter().all(|p| ge(p, &self.value))
            && g.col_payoffs(&self.row_strategy).iter().all(|p| ge(&self.value, p))
    }
}

/// Solves `a z = b` by Gaussian elimination; `None` when singular.
pub fn solve_linear<S: Scalar>(mut a: Vec<Vec<S>>, mut b: Vec<S>) -> Option<Vec<S>> {
    let n = b.len();
    for c in 0..n {
        let pivot = (c..n).max_by(|&r, &s| scalar::cmp(&a[r][c].abs_value(), &a[s][c].abs_value()))?;
        if a[pivot][c].agrees(&S::zero()) {
            return None;
        }
        a.swap(c, pivot);
        b.swap(c, pivot);
        for r in 0..n {
            if r != c && !a[r][c].is_zero() {
                let factor = a[r][c].clone() / a[c][c].clone();
                for k in c..n {
                    let delta = factor.clone() * a[c][k].clone();
                    a[r][k] = a[r][k].clone() - delta;
                }
                let delta = factor * b[c].clone();
                b[r] = b[r].clone() - delta;
            }
        }
    }
    Some((0..n).map(|i| b[i].clone() / a[i][i].clone()).collect())
}

/// Mix over `cols` that equalizes the rows in `rows`, plus that common payoff.
fn equalizer<S: Scalar>(g: &GameMatrix<S>, rows: &[usize], cols: &[usize]) -> Option<(Vec<S>, S)> {
    let s = rows.len();
    let mut a = Vec::with_capacity(s + 1);
    for &i in rows {
        let mut r: Vec<S> = cols.iter().map(|&j| g.payoff[i][j].clone()).collect();
        r.push(-S::one());
        a.push(r);
    }
    let mut last = vec![S::one(); s];
    last.push(S::zero());
    a.push(last);
    let mut b = vec![S::zero(); s];
    b.push(S::one());
    let mut z = solve_linear(a, b)?;
    let v = z.pop()?;
    Some((z, v))
}

/// Advances `c` to the next `k`-combination of `0..n` in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < n - k + i {
            c[i] += 1;
            for j in (i + 1)..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Exact equilibrium by support enumeration over square supports.
///
/// Weakly dominated rows and columns are removed first. Supports are tried by
/// size, then row support, then column support, each in lexicographic order;
/// the first pair whose equalizing strategies are feasible and pass the
/// no-deviation check is returned.
pub fn solve_zero_sum_exact<S: Scalar>(g: &GameMatrix<S>) -> Result<Equilibrium<S>> {
    let rows = undominated_rows(g);
    let cols = undominated_columns(g);
    let reduced = g.select(&rows, &cols);
    let (m, n) = (reduced.rows(), reduced.cols());
    if m.min(n) > MAX_EXACT_DIM {
        return Err(Error::CapExceeded { what: "smaller game dimension after pruning (use the iterative solver)", cap: MAX_EXACT_DIM, got: m.min(n) });
    }
    debug!("exact solver on {m}x{n} game (from {}x{})", g.rows(), g.cols());
    let mut examined = 0usize;
    for s in 1..=m.min(n) {
        let mut rs: Vec<usize> = (0..s).collect();
        loop {
            let mut cs: Vec<usize> = (0..s).collect();
            loop {
                examined += 1;
                if examined > MAX_SUPPORT_PAIRS {
                    return Err(Error::CapExceeded { what: "support pairs (use the iterative solver)", cap: MAX_SUPPORT_PAIRS, got: examined });
                }
                if let Some(eq) = try_support(&reduced, &rs, &cs) {
                    let mut row_strategy = vec![S::zero(); g.rows()];
                    for (k, &i) in rows.iter().enumerate() {
                        row_strategy[i] = eq.0[k].clone();
                    }
                    let mut col_strategy = vec![S::zero(); g.cols()];
                    for (k, &j) in cols.iter().enumerate() {
                        col_strategy[j] = eq.1[k].clone();
                    }
                    let out = Equilibrium::from_strategies(g, eq.2, row_strategy, col_strategy);
                    debug_assert!(out.verify(g));
                    return Ok(out);
                }
                if !next_combination(&mut cs, n) {
                    break;
                }
            }
            if !next_combination(&mut rs, m) {
                break;
            }
        }
    }
    Err(Error::InvalidGame("no equilibrium found by support enumeration".into()))
}

fn try_support<S: Scalar>(g: &GameMatrix<S>, rs: &[usize], cs: &[usize]) -> Option<(Vec<S>, Vec<S>, S)> {
    let (y_sup, v) = equalizer(g, rs, cs)?;
    if y_sup.iter().any(|p| !ge(p, &S::zero())) {
        return None;
    }
    let (x_sup, w) = equalizer(&g.transpose(), cs, rs)?;
    if x_sup.iter().any(|p| !ge(p, &S::zero())) || !v.agrees(&w) {
        return None;
    }
    let mut x = vec![S::zero(); g.rows()];
    for (k, &i) in rs.iter().enumerate() {
        x[i] = x_sup[k].clone();
    }
    let mut y = vec![S::zero(); g.cols()];
    for (k, &j) in cs.iter().enumerate() {
        y[j] = y_sup[k].clone();
    }
    let rows_ok = g.row_payoffs(&y).iter().all(|p| ge(p, &v));
    let cols_ok = g.col_payoffs(&x).iter().all(|p| ge(&v, p));
    (rows_ok && cols_ok).then_some((x, y, v))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxEquilibrium {
    pub row_strategy: Vec<f64>,
    pub col_strategy: Vec<f64>,
    /// min over rows of the row payoff against the averaged column mix.
    pub lower: f64,
    /// max over columns of the column payoff against the averaged row mix.
    pub upper: f64,
    pub gap: f64,
    pub iterations: usize,
}

impl ApproxEquilibrium {
    pub fn value(&self) -> f64 {
        (self.lower + self.upper) / 2.0
    }
}

/// Step size of the self-play dynamics on payoffs rescaled to [0, 1].
pub const ITERATIVE_STEP: f64 = 1.0;

fn softmax(scores: &[f64], out: &mut [f64]) {
    let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for (o, s) in out.iter_mut().zip(scores) {
        *o = (s - top).exp();
        total += *o;
    }
    out.iter_mut().for_each(|o| *o /= total);
}

fn certified_bounds(a: &[Vec<f64>], x: &[f64], y: &[f64]) -> (f64, f64) {
    let lower = a.iter().map(|r| r.iter().zip(y).map(|(p, q)| p * q).sum::<f64>()).fold(f64::INFINITY, f64::min);
    let upper = (0..y.len()).map(|j| a.iter().zip(x).map(|(r, p)| r[j] * p).sum::<f64>()).fold(f64::NEG_INFINITY, f64::max);
    (lower, upper)
}

/// Optimistic multiplicative-weights self-play.
///
/// Both the averaged and the current strategies are checked every 16 steps;
/// the first pair whose certified duality gap (in the original payoff scale)
/// is at most `gap_tolerance` is returned.
pub fn solve_zero_sum_iterative<S: Scalar>(g: &GameMatrix<S>, gap_tolerance: f64, max_iters: usize) -> Result<ApproxEquilibrium> {
    let a: Vec<Vec<f64>> = g.payoff.iter().map(|r| r.iter().map(Scalar::as_f64).collect()).collect();
    let (m, n) = (g.rows(), g.cols());
    let lo = a.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let hi = a.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let scaled: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|v| (v - lo) / span).collect()).collect();

    let mut x = vec![1.0 / m as f64; m];
    let mut y = vec![1.0 / n as f64; n];
    let mut x_sum = vec![0.0; m];
    let mut y_sum = vec![0.0; n];
    let mut row_cum = vec![0.0; m];
    let mut col_cum = vec![0.0; n];
    let mut row_last = vec![0.0; m];
    let mut col_last = vec![0.0; n];
    let mut scores_r = vec![0.0; m];
    let mut scores_c = vec![0.0; n];
    let mut best = f64::INFINITY;

    for t in 1..=max_iters {
        for (s, v) in x_sum.iter_mut().zip(&x) {
            *s += v;
        }
        for (s, v) in y_sum.iter_mut().zip(&y) {
            *s += v;
        }
        for i in 0..m {
            row_last[i] = scaled[i].iter().zip(&y).map(|(p, q)| p * q).sum();
            row_cum[i] += row_last[i];
        }
        for j in 0..n {
            col_last[j] = (0..m).map(|i| scaled[i][j] * x[i]).sum();
            col_cum[j] += col_last[j];
        }
        if t % 16 == 0 || t == max_iters || t == 1 {
            let xa: Vec<f64> = x_sum.iter().map(|s| s / t as f64).collect();
            let ya: Vec<f64> = y_sum.iter().map(|s| s / t as f64).collect();
            for (xs, ys) in [(xa, ya), (x.clone(), y.clone())] {
                let (lower, upper) = certified_bounds(&a, &xs, &ys);
                let gap = (upper - lower).max(0.0);
                best = best.min(gap);
                if gap <= gap_tolerance {
                    return Ok(ApproxEquilibrium { row_strategy: xs, col_strategy: ys, lower, upper, gap, iterations: t });
                }
            }
        }
        // defender minimizes loss, attacker maximizes gain; optimism adds the last step once more
        for i in 0..m {
            scores_r[i] = -ITERATIVE_STEP * (row_cum[i] + row_last[i]);
        }
        for j in 0..n {
            scores_c[j] = ITERATIVE_STEP * (col_cum[j] + col_last[j]);
        }
        softmax(&scores_r, &mut x);
        softmax(&scores_c, &mut y);
    }
    Err(Error::NoConvergence { tolerance: gap_tolerance, iterations: max_iters, gap: best })
}

/// Rows are classifiers, columns are joint attacks choosing one point of each
/// atom's ball; an entry is the resulting risk of that row.
///
/// Columns enumerate the product of balls with the first atom varying slowest.
pub fn defender_attack_matrix<S: Scalar, C: Classifier<S>>(
    family: &[C],
    d: &LabeledDistribution<S>,
    nbhd: &Neighborhoods,
    max_columns: usize,
) -> Result<GameMatrix<S>> {
    if family.is_empty() {
        return Err(Error::InvalidGame("empty classifier family".into()));
    }
    for f in family {
        if f.len() != nbhd.len() {
            return Err(Error::DomainMismatch { expected: nbhd.len(), found: f.len() });
        }
    }
    d.check_domain(nbhd.len())?;
    let balls: Vec<&[usize]> = d.atoms().iter().map(|a| nbhd.ball(a.point)).collect();
    let mut count = 1usize;
    for b in &balls {
        count = count.saturating_mul(b.len());
        if count > max_columns {
            return Err(Error::CapExceeded { what: "attack columns", cap: max_columns, got: count });
        }
    }
    let mut choice = vec![0usize; balls.len()];
    let mut payoff: Vec<Vec<S>> = vec![Vec::with_capacity(count); family.len()];
    for _ in 0..count {
        for (r, f) in family.iter().enumerate() {
            let v = scalar::sum(
                d.atoms().iter().zip(&choice).zip(&balls).map(|((a, &c), b)| a.mass.clone() * zero_one_loss(f, b[c], a.label)),
            );
            payoff[r].push(v);
        }
        for k in (0..choice.len()).rev() {
            choice[k] += 1;
            if choice[k] < balls[k].len() {
                break;
            }
            choice[k] = 0;
        }
    }
    GameMatrix::new(payoff)
}
