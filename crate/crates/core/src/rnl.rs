//! Timing-dependent joint probabilities.
//!
//! The rule used for a pair depends on the experiment label:
//!
//! * `(b,b)`: both photons answer locally, so the joint is the incoherent
//!   two-class mixture.
//! * `(a,b)` and `(b,a)`: the non-before photon correlates with the before
//!   one by the usual entangled rule.
//! * `(a,a)`: each photon conditions on what its partner *would* have
//!   produced in a before impact. The joint is
//!   `P(σ',ω') = Σ_{σ,ω} P_bb(σ,ω) · c₁(σ'|ω) · c₂(ω'|σ)`, with the
//!   conditionals recovered from the measurable `(a,b)` joints as
//!   `c(σ|ω) = P_ab(σ,ω) / P_b(ω)`.
//!
//! For the Bell state this composition has the closed form
//! `E = cos 2α · cos 2β · cos² 2(α+β)`, and for any equal-weight preparation
//! the correlations factor as `E_aa = E_bb · E_ab · E_ba`.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{ConditionalTable, Correlation, JointDistribution, Marginal, Outcome, Party, PROB_TOL};
use crate::quantum::{entangled_joint, mixture_joint, AnalyzerSettings, TwoPhotonState};
use crate::timing::{classify_experiment, ExperimentLabel, ImpactClass, Marking, SetupGeometry};

/// Tolerance for identities that hold exactly in real arithmetic.
pub const IDENTITY_TOL: f64 = 1e-12;

/// Before-marginals at or below this are treated as zero when conditioning.
pub const DEGENERATE_MARGINAL: f64 = PROB_TOL;

/// Conditional table from a joint indexed `(non-before outcome, before
/// outcome)` and the before photon's marginal.
pub fn conditional_table(joint_ab: &JointDistribution, before_marginal: &Marginal) -> Result<ConditionalTable> {
    for given in Outcome::ALL {
        if before_marginal.get(given) <= DEGENERATE_MARGINAL {
            return Err(Error::DegenerateConditioning(given));
        }
    }
    ConditionalTable::from_fn(|o, given| joint_ab.get(o, given) / before_marginal.get(given))
}

/// Like [`conditional_table`], but a zero-probability conditioning outcome
/// gets the uniform column instead of an error. That column carries zero
/// weight in the two-non-before sum. Returns the degenerate outcomes.
fn conditional_table_total(
    joint_ab: &JointDistribution,
    before_marginal: &Marginal,
) -> Result<(ConditionalTable, Vec<Outcome>)> {
    let degenerate: Vec<Outcome> =
        Outcome::ALL.into_iter().filter(|&g| before_marginal.get(g) <= DEGENERATE_MARGINAL).collect();
    let table = ConditionalTable::from_fn(|o, given| {
        if degenerate.contains(&given) {
            0.5
        } else {
            joint_ab.get(o, given) / before_marginal.get(given)
        }
    })?;
    Ok((table, degenerate))
}

/// Conditional table for maximally entangled preparations: `c(σ|ω) = 2 P_ab(σ,ω)`.
pub fn conditional_table_maxent(joint_ab: &JointDistribution) -> Result<ConditionalTable> {
    for party in [Party::One, Party::Two] {
        let m = joint_ab.marginal(party);
        if (m.get(Outcome::Plus) - 0.5).abs() > PROB_TOL || (m.get(Outcome::Minus) - 0.5).abs() > PROB_TOL {
            return Err(Error::NotMaximallyEntangled {
                party: party.number(),
                plus: m.get(Outcome::Plus),
                minus: m.get(Outcome::Minus),
            });
        }
    }
    ConditionalTable::from_fn(|o, given| 2.0 * joint_ab.get(o, given))
}

/// Joint for two non-before impacts.
///
/// `cond1(σ'|ω)` is photon 1's non-before answer given photon 2's before
/// value; `cond2(ω'|σ)` the mirror image.
pub fn two_nonbefore_joint(
    bb: &JointDistribution,
    cond1: &ConditionalTable,
    cond2: &ConditionalTable,
) -> Result<JointDistribution> {
    JointDistribution::from_fn(|s_new, w_new| {
        bb.iter().map(|((s, w), p)| p * cond1.get(s_new, w) * cond2.get(w_new, s)).sum()
    })
}

/// `cos 2α · cos 2β · cos² 2(α+β)`.
pub fn rnl_correlation_closed_form(settings: &AnalyzerSettings) -> Correlation {
    let (a, b) = (settings.alpha, settings.beta);
    let sum = (2.0 * (a + b)).cos();
    Correlation::new((2.0 * a).cos() * (2.0 * b).cos() * sum * sum).expect("product of cosines lies in [-1, 1]")
}

/// `|E_aa − E_bb · E_ab · E_ba|`.
pub fn product_law_residual(bb: Correlation, ab: Correlation, ba: Correlation, aa: Correlation) -> f64 {
    (aa.value() - bb.value() * ab.value() * ba.value()).abs()
}

/// The joint distribution under each of the four experiment labels for one
/// preparation and one pair of analyzer settings.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelJoints {
    pub bb: JointDistribution,
    pub ab: JointDistribution,
    pub ba: JointDistribution,
    pub aa: JointDistribution,
    /// Photon 1's non-before conditionals on photon 2's before value.
    pub cond1: ConditionalTable,
    /// Photon 2's non-before conditionals on photon 1's before value.
    pub cond2: ConditionalTable,
    pub warnings: Vec<String>,
}

impl LabelJoints {
    pub fn compute(state: &TwoPhotonState, settings: &AnalyzerSettings) -> Result<Self> {
        let bb = mixture_joint(state, settings)?;
        let coherent = entangled_joint(state, settings)?;
        let (ab, ba) = (coherent, coherent);

        let mut warnings = Vec::new();
        let (cond1, degenerate2) = conditional_table_total(&ab, &ab.marginal(Party::Two))?;
        // photon 2 is the non-before one: index its joint (ω', σ)
        let (cond2, degenerate1) = conditional_table_total(&ba.transpose(), &ba.marginal(Party::One))?;
        for (party, outcomes) in [(2, degenerate2), (1, degenerate1)] {
            for o in outcomes {
                warnings.push(format!(
                    "degenerate conditioning: photon {party} before-outcome {o} has zero probability; uniform conditional used"
                ));
            }
        }
        let aa = two_nonbefore_joint(&bb, &cond1, &cond2)?;
        Ok(Self { bb, ab, ba, aa, cond1, cond2, warnings })
    }

    pub fn get(&self, label: ExperimentLabel) -> &JointDistribution {
        use ImpactClass::*;
        match (label.first, label.second) {
            (Before, Before) => &self.bb,
            (NonBefore, Before) => &self.ab,
            (Before, NonBefore) => &self.ba,
            (NonBefore, NonBefore) => &self.aa,
        }
    }
}

/// A named numerical check with its tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self { name: name.into(), residual, tolerance, pass: residual <= tolerance }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionReport {
    pub label: ExperimentLabel,
    pub rnl: JointDistribution,
    pub qm: JointDistribution,
    pub rnl_e: Correlation,
    pub qm_e: Correlation,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub joints: LabelJoints,
}

struct JointWithE<'a>(&'a JointDistribution);

impl Serialize for JointWithE<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let [pp, pm, mp, mm] = self.0.entries();
        let mut st = s.serialize_struct("Joint", 5)?;
        st.serialize_field("pp", &pp)?;
        st.serialize_field("pm", &pm)?;
        st.serialize_field("mp", &mp)?;
        st.serialize_field("mm", &mm)?;
        st.serialize_field("E", &self.0.correlation().value())?;
        st.end()
    }
}

impl Serialize for PredictionReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("PredictionReport", 5)?;
        st.serialize_field("label", &self.label)?;
        st.serialize_field("rnl", &JointWithE(&self.rnl))?;
        st.serialize_field("qm", &JointWithE(&self.qm))?;
        st.serialize_field("checks", &self.checks)?;
        st.serialize_field("warnings", &self.warnings)?;
        st.end()
    }
}

/// Per-photon no-signaling residuals: the largest change of photon `i`'s
/// marginal when its own impact switches between before and non-before,
/// the partner's class held fixed.
pub fn no_signaling_check(report: &PredictionReport) -> [Check; 2] {
    no_signaling_residuals(&report.joints)
        .map(|(party, r)| Check::new(format!("no_signaling_photon{}", party.number()), r, PROB_TOL))
}

fn no_signaling_residuals(joints: &LabelJoints) -> [(Party, f64); 2] {
    use ImpactClass::*;
    [Party::One, Party::Two].map(|party| {
        let mut worst: f64 = 0.0;
        for partner in [Before, NonBefore] {
            let label = |own| match party {
                Party::One => ExperimentLabel { first: own, second: partner },
                Party::Two => ExperimentLabel { first: partner, second: own },
            };
            let a = joints.get(label(NonBefore)).marginal(party);
            let b = joints.get(label(Before)).marginal(party);
            worst = worst.max(a.max_abs_diff(&b));
        }
        (party, worst)
    })
}

/// Closed-form correlation of the Bell state under each label.
pub fn bell_correlation(label: ExperimentLabel, settings: &AnalyzerSettings) -> f64 {
    let (a, b) = (settings.alpha, settings.beta);
    match label {
        ExperimentLabel::BB => (2.0 * a).cos() * (2.0 * b).cos(),
        ExperimentLabel::AA => rnl_correlation_closed_form(settings).value(),
        _ => (2.0 * (a + b)).cos(),
    }
}

/// Classifies the setup and evaluates the matching rule next to the
/// timing-blind quantum prediction.
pub fn predict(setup: &SetupGeometry, state: &TwoPhotonState, settings: &AnalyzerSettings) -> Result<PredictionReport> {
    let label = classify_experiment(setup)?.label;
    let joints = LabelJoints::compute(state, settings)?;
    let rnl = *joints.get(label);
    let qm = match setup.marking1 {
        // classification already rejected mixed markings
        Marking::Distinguishable => joints.bb,
        Marking::Indistinguishable => entangled_joint(state, settings)?,
    };

    let mut checks = Vec::new();
    let mut warnings = joints.warnings.clone();

    let partial = PredictionReport {
        label,
        rnl,
        qm,
        rnl_e: rnl.correlation(),
        qm_e: qm.correlation(),
        checks: Vec::new(),
        warnings: Vec::new(),
        joints,
    };
    checks.extend(no_signaling_check(&partial));
    let joints = &partial.joints;

    if state.is_equal_weight() {
        let residual = product_law_residual(
            joints.bb.correlation(),
            joints.ab.correlation(),
            joints.ba.correlation(),
            joints.aa.correlation(),
        );
        checks.push(Check::new("product_law", residual, IDENTITY_TOL));
        let maxent1 = conditional_table_maxent(&joints.ab)?;
        let maxent2 = conditional_table_maxent(&joints.ba.transpose())?;
        let residual = joints.cond1.max_abs_diff(&maxent1).max(joints.cond2.max_abs_diff(&maxent2));
        checks.push(Check::new("conditional_maxent", residual, IDENTITY_TOL));
    } else {
        warnings.push(
            "outside the equal-weight hypothesis: product law and maximal-entanglement conditionals not checked".into(),
        );
    }

    if state.is_bell() {
        let residual = (partial.rnl_e.value() - bell_correlation(label, settings)).abs();
        checks.push(Check::new("closed_form", residual, IDENTITY_TOL));
    }

    Ok(PredictionReport { checks, warnings, ..partial })
}
