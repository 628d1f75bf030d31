//! Outcomes, joint distributions and conditional tables.
//!
//! A two-photon coincidence experiment has four outcomes `(σ, ω)` with
//! `σ` the value at splitter 1 and `ω` the value at splitter 2. Every rule in
//! the crate manipulates these four numbers directly, so they are stored as
//! an explicit table rather than a parametric form.

use std::fmt;
use std::ops::Neg;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Slack allowed when validating closed-form probabilities.
pub const PROB_TOL: f64 = 1e-9;

/// A detector value, `+1` or `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const ALL: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }

    fn index(self) -> usize {
        match self {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Outcome::Plus => "+",
            Outcome::Minus => "-",
        }
    }
}

impl Neg for Outcome {
    type Output = Outcome;

    fn neg(self) -> Outcome {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl Serialize for Outcome {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.symbol())
    }
}

impl<'de> Deserialize<'de> for Outcome {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        match s.as_str() {
            "+" => Ok(Outcome::Plus),
            "-" => Ok(Outcome::Minus),
            other => Err(serde::de::Error::custom(format!("outcome must be \"+\" or \"-\", got {other:?}"))),
        }
    }
}

/// Which photon of the pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Party {
    One,
    Two,
}

impl Party {
    pub fn number(self) -> u8 {
        match self {
            Party::One => 1,
            Party::Two => 2,
        }
    }

    pub fn other(self) -> Party {
        match self {
            Party::One => Party::Two,
            Party::Two => Party::One,
        }
    }
}

/// A single invariant failure found by [`validate_distribution`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonFinite { first: Outcome, second: Outcome },
    Negative { first: Outcome, second: Outcome, value: f64, tolerance: f64 },
    Normalization { sum: f64, tolerance: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFinite { first, second } => {
                write!(f, "entry ({first},{second}) is not finite")
            }
            Violation::Negative { first, second, value, tolerance } => {
                write!(f, "entry ({first},{second}) = {value} is negative beyond tolerance {tolerance:e}")
            }
            Violation::Normalization { sum, tolerance } => {
                write!(f, "entries sum to {sum}, not 1 within {tolerance:e}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

const PAIRS: [(Outcome, Outcome); 4] = [
    (Outcome::Plus, Outcome::Plus),
    (Outcome::Plus, Outcome::Minus),
    (Outcome::Minus, Outcome::Plus),
    (Outcome::Minus, Outcome::Minus),
];

/// Checks the four entries `(++, +-, -+, --)` against nonnegativity and
/// normalization, reporting every violated invariant.
pub fn validate_distribution(entries: [f64; 4]) -> ValidationReport {
    let mut report = ValidationReport::default();
    for (&(first, second), &value) in PAIRS.iter().zip(entries.iter()) {
        if !value.is_finite() {
            report.violations.push(Violation::NonFinite { first, second });
        } else if value < -PROB_TOL {
            report.violations.push(Violation::Negative { first, second, value, tolerance: PROB_TOL });
        }
    }
    let sum: f64 = entries.iter().sum();
    if sum.is_finite() && (sum - 1.0).abs() > PROB_TOL {
        report.violations.push(Violation::Normalization { sum, tolerance: PROB_TOL });
    }
    report
}

/// Coincidence probabilities `P(σ, ω)`, party 1's outcome first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointDistribution {
    entries: [f64; 4],
}

fn slot(first: Outcome, second: Outcome) -> usize {
    2 * first.index() + second.index()
}

impl JointDistribution {
    pub fn new(pp: f64, pm: f64, mp: f64, mm: f64) -> Result<Self> {
        Self::from_entries([pp, pm, mp, mm])
    }

    /// Entries in the order `(++, +-, -+, --)`.
    pub fn from_entries(entries: [f64; 4]) -> Result<Self> {
        let report = validate_distribution(entries);
        if report.is_ok() {
            Ok(Self { entries })
        } else {
            Err(Error::InvalidDistribution(report))
        }
    }

    /// Builds a distribution from `f(σ, ω)` evaluated on every outcome pair.
    pub fn from_fn(mut f: impl FnMut(Outcome, Outcome) -> f64) -> Result<Self> {
        let mut entries = [0.0; 4];
        for (slot, &(s, w)) in entries.iter_mut().zip(PAIRS.iter()) {
            *slot = f(s, w);
        }
        Self::from_entries(entries)
    }

    pub fn uniform() -> Self {
        Self { entries: [0.25; 4] }
    }

    pub fn get(&self, first: Outcome, second: Outcome) -> f64 {
        self.entries[slot(first, second)]
    }

    pub fn entries(&self) -> [f64; 4] {
        self.entries
    }

    /// Iterates `((σ, ω), P(σ, ω))` in the order `++, +-, -+, --`.
    pub fn iter(&self) -> impl Iterator<Item = ((Outcome, Outcome), f64)> + '_ {
        PAIRS.iter().copied().zip(self.entries.iter().copied())
    }

    /// `E = Σ σω P(σ, ω)`.
    pub fn correlation(&self) -> Correlation {
        let e = self.iter().map(|((s, w), p)| s.sign() * w.sign() * p).sum();
        Correlation(e)
    }

    pub fn marginal(&self, party: Party) -> Marginal {
        let mut m = [0.0; 2];
        for ((s, w), p) in self.iter() {
            let own = match party {
                Party::One => s,
                Party::Two => w,
            };
            m[own.index()] += p;
        }
        Marginal(m)
    }

    /// Probability of total value `+` (equal outcomes) or `-` (opposite).
    pub fn total_value_probability(&self, total: Outcome) -> f64 {
        let equal = self.get(Outcome::Plus, Outcome::Plus) + self.get(Outcome::Minus, Outcome::Minus);
        let opposite = self.get(Outcome::Plus, Outcome::Minus) + self.get(Outcome::Minus, Outcome::Plus);
        match total {
            Outcome::Plus => equal,
            Outcome::Minus => opposite,
        }
    }

    /// Swaps the roles of the two parties.
    pub fn transpose(&self) -> Self {
        let [pp, pm, mp, mm] = self.entries;
        Self { entries: [pp, mp, pm, mm] }
    }

    /// Relabels `+ <-> -` on both parties at once.
    pub fn negate_labels(&self) -> Self {
        let [pp, pm, mp, mm] = self.entries;
        Self { entries: [mm, mp, pm, pp] }
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries.iter().zip(other.entries.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointRepr {
    pp: f64,
    pm: f64,
    mp: f64,
    mm: f64,
}

impl Serialize for JointDistribution {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let [pp, pm, mp, mm] = self.entries;
        JointRepr { pp, pm, mp, mm }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for JointDistribution {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = JointRepr::deserialize(d)?;
        JointDistribution::new(r.pp, r.pm, r.mp, r.mm).map_err(serde::de::Error::custom)
    }
}

/// Single-party outcome probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Marginal(pub [f64; 2]);

impl Marginal {
    pub fn get(&self, outcome: Outcome) -> f64 {
        self.0[outcome.index()]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.0[0] - other.0[0]).abs().max((self.0[1] - other.0[1]).abs())
    }
}

/// `c(σ' | ω)`: probability that the non-before particle yields `σ'` given
/// the partner yields `ω` in a before impact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalTable {
    // columns[given][outcome]
    columns: [[f64; 2]; 2],
}

impl ConditionalTable {
    pub fn from_fn(mut f: impl FnMut(Outcome, Outcome) -> f64) -> Result<Self> {
        let mut columns = [[0.0; 2]; 2];
        for given in Outcome::ALL {
            for outcome in Outcome::ALL {
                columns[given.index()][outcome.index()] = f(outcome, given);
            }
        }
        let table = Self { columns };
        table.validate()?;
        Ok(table)
    }

    /// The table with every entry 1/2.
    pub fn uniform() -> Self {
        Self { columns: [[0.5; 2]; 2] }
    }

    pub fn get(&self, outcome: Outcome, given: Outcome) -> f64 {
        self.columns[given.index()][outcome.index()]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for given in Outcome::ALL {
            for outcome in Outcome::ALL {
                d = d.max((self.get(outcome, given) - other.get(outcome, given)).abs());
            }
        }
        d
    }

    fn validate(&self) -> Result<()> {
        for given in Outcome::ALL {
            let col = self.columns[given.index()];
            for &value in &col {
                if !value.is_finite() || !(-PROB_TOL..=1.0 + PROB_TOL).contains(&value) {
                    return Err(Error::ConditionalOutOfRange { value });
                }
            }
            let sum = col[0] + col[1];
            if (sum - 1.0).abs() > PROB_TOL {
                return Err(Error::InvalidConditional { given, sum, tolerance: PROB_TOL });
            }
        }
        Ok(())
    }
}

/// A correlation coefficient `E ∈ [-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Correlation(f64);

impl Correlation {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value.abs() <= 1.0 + PROB_TOL {
            Ok(Self(value))
        } else {
            Err(Error::CorrelationOutOfRange(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<Correlation> for f64 {
    fn from(c: Correlation) -> f64 {
        c.0
    }
}
