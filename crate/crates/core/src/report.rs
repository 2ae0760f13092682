//! Plain tables rendered as CSV. Exact values appear as `p/q` fractions next
//! to their correctly rounded binary64 decimal.

use std::io::Write;

use crate::derandomize::{IdentityCheck, RiskProfile};
use crate::error::{Error, Result};
use crate::games::Equilibrium;
use crate::mixtures::Decomposition;
use crate::scalar::Scalar;
use crate::smoothing::SmoothingReport;
use crate::Rational;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(header: I) -> Self {
        Table { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push<I: IntoIterator<Item = S>, S: Into<String>>(&mut self, row: I) {
        self.rows.push(row.into_iter().map(Into::into).collect());
    }

    /// Rows may differ in length (footers).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
        w.write_record(&self.header).map_err(io_error)?;
        for r in &self.rows {
            w.write_record(r).map_err(io_error)?;
        }
        w.flush().map_err(|e| Error::InvalidInput(format!("write failed: {e}")))
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::InvalidInput(e.to_string()))
    }
}

fn io_error(e: csv::Error) -> Error {
    Error::InvalidInput(format!("CSV write failed: {e}"))
}

/// `p/q`, or `p` for integers.
pub fn fraction(r: &Rational) -> String {
    r.to_string()
}

/// Shortest decimal that round-trips the nearest binary64.
pub fn decimal(r: &Rational) -> String {
    format!("{}", r.as_f64())
}

/// `[numerator, denominator, decimal]`.
pub fn exact_fields(r: &Rational) -> [String; 3] {
    [r.numer().to_string(), r.denom().to_string(), decimal(r)]
}

pub fn profile_table(profile: &RiskProfile<Rational>, identity: &IdentityCheck<Rational>) -> Table {
    let mut t = Table::new(["interval_lo", "interval_hi", "risk_num", "risk_den", "risk_decimal"]);
    for (lo, hi, r) in profile.intervals() {
        let [n, d, x] = exact_fields(r);
        t.push([fraction(lo), fraction(hi), n, d, x]);
    }
    push_identity(&mut t, identity);
    t
}

fn push_identity(t: &mut Table, identity: &IdentityCheck<Rational>) {
    t.push([
        "lhs".to_string(),
        fraction(&identity.lhs),
        decimal(&identity.lhs),
        "rhs".to_string(),
        fraction(&identity.rhs),
        decimal(&identity.rhs),
        "equal".to_string(),
        identity.equal.to_string(),
    ]);
}

pub fn decomposition_table(dec: &Decomposition<Rational>) -> Table {
    let mut t = Table::new(["alpha_i", "gap", "ensemble_risk", "ensemble_risk_decimal"]);
    for term in &dec.terms {
        t.push([fraction(&term.alpha), fraction(&term.gap), fraction(&term.ensemble_risk), decimal(&term.ensemble_risk)]);
    }
    push_identity(&mut t, &dec.identity);
    t
}

pub fn smoothing_table(rep: &SmoothingReport<Rational>) -> Table {
    let mut t = Table::new(["alpha_lo", "alpha_hi", "rs_risk", "rs_risk_decimal", "ni_risk", "ni_risk_decimal"]);
    for (lo, hi, r) in rep.curve.intervals() {
        t.push([fraction(lo), fraction(hi), fraction(r), decimal(r), fraction(&rep.ni_risk), decimal(&rep.ni_risk)]);
    }
    t.push([
        "best_alpha".to_string(),
        fraction(&rep.best_alpha),
        "best_risk".to_string(),
        fraction(&rep.best_risk),
        decimal(&rep.best_risk),
    ]);
    t
}

pub fn equilibrium_table(eq: &Equilibrium<Rational>) -> Table {
    let mut t = Table::new(["kind", "index", "probability", "probability_decimal", "payoff", "payoff_decimal"]);
    t.push(["value".to_string(), String::new(), String::new(), String::new(), fraction(&eq.value), decimal(&eq.value)]);
    for (i, (p, v)) in eq.row_strategy.iter().zip(&eq.row_certificate).enumerate() {
        t.push(["row".to_string(), i.to_string(), fraction(p), decimal(p), fraction(v), decimal(v)]);
    }
    for (j, (p, v)) in eq.col_strategy.iter().zip(&eq.col_certificate).enumerate() {
        t.push(["col".to_string(), j.to_string(), fraction(p), decimal(p), fraction(v), decimal(v)]);
    }
    t
}
