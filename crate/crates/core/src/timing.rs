//! Before / non-before classification of beam-splitter impacts.
//!
//! Each splitter judges the partner's impact in its own inertial rest frame
//! at the moment of impact. Geometry is one-dimensional: positions and
//! velocities are measured along the source–splitter axis in the laboratory
//! frame.
//!
//! Two boundary conventions coexist. The classifier treats a vanishing
//! simultaneity gap as non-before (the partner's impact is "not later"),
//! while the feasibility planner quotes the strict bound `δt < VL/c²`. The
//! boundary itself has measure zero and both are reported as is.

use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::dd::{two_prod, two_sum, DoubleDouble};
use crate::error::{Error, Result};
use crate::grid::LinearGrid;

/// Speed of light in vacuum, m/s (exact by definition of the metre).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default fraction of `δt_max` held back as a safety margin by the planner.
pub const DEFAULT_SAFETY_MARGIN: f64 = 0.1;

fn c_squared() -> DoubleDouble {
    two_prod(SPEED_OF_LIGHT, SPEED_OF_LIGHT)
}

fn check_velocity(v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::NonFinite("velocity"));
    }
    if v.abs() >= SPEED_OF_LIGHT {
        return Err(Error::Superluminal(v));
    }
    Ok(())
}

/// A photon hitting its beam-splitter, in laboratory coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpactEvent {
    /// Lab time of the impact, s.
    pub t: f64,
    /// Lab position of the splitter at impact, m.
    pub x: f64,
    /// Splitter velocity at impact, m/s.
    pub v: f64,
}

impl ImpactEvent {
    pub fn new(t: f64, x: f64, v: f64) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::NonFinite("impact time"));
        }
        if !x.is_finite() {
            return Err(Error::NonFinite("impact position"));
        }
        check_velocity(v)?;
        Ok(Self { t, x, v })
    }
}

/// Whether pair membership is knowable after the splitters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Marking {
    /// `u`: sub-ensemble membership is in principle unknowable.
    #[serde(rename = "u")]
    Indistinguishable,
    /// `d`: sub-ensemble membership is in principle knowable.
    #[serde(rename = "d")]
    Distinguishable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImpactClass {
    Before,
    NonBefore,
}

impl ImpactClass {
    /// `b` for before, `a` for non-before.
    pub fn letter(self) -> char {
        match self {
            ImpactClass::Before => 'b',
            ImpactClass::NonBefore => 'a',
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ImpactClass::Before => "before",
            ImpactClass::NonBefore => "non_before",
        }
    }
}

/// The experiment `e = (class₁, class₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExperimentLabel {
    pub first: ImpactClass,
    pub second: ImpactClass,
}

impl ExperimentLabel {
    pub const BB: Self = Self { first: ImpactClass::Before, second: ImpactClass::Before };
    pub const AB: Self = Self { first: ImpactClass::NonBefore, second: ImpactClass::Before };
    pub const BA: Self = Self { first: ImpactClass::Before, second: ImpactClass::NonBefore };
    pub const AA: Self = Self { first: ImpactClass::NonBefore, second: ImpactClass::NonBefore };

    pub const ALL: [Self; 4] = [Self::BB, Self::AB, Self::BA, Self::AA];
}

impl fmt::Display for ExperimentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.first.letter(), self.second.letter())
    }
}

impl Serialize for ExperimentLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetupGeometry {
    pub event1: ImpactEvent,
    pub event2: ImpactEvent,
    pub marking1: Marking,
    pub marking2: Marking,
}

impl SetupGeometry {
    pub fn new(event1: ImpactEvent, event2: ImpactEvent, marking1: Marking, marking2: Marking) -> Result<Self> {
        let event1 = ImpactEvent::new(event1.t, event1.x, event1.v)?;
        let event2 = ImpactEvent::new(event2.t, event2.x, event2.v)?;
        Ok(Self { event1, event2, marking1, marking2 })
    }

    /// Splitter 1 at rest at the origin hit at `t = δt`; splitter 2 at
    /// `x = L` hit at `t = 0` while moving with velocity `v2`.
    ///
    /// `v2 = -V` is the approaching-splitter configuration in which both
    /// impacts are non-before when `0 < δt < VL/c²`.
    pub fn moving_splitter(delay: f64, distance: f64, v2: f64, marking: Marking) -> Result<Self> {
        Self::new(ImpactEvent::new(delay, 0.0, 0.0)?, ImpactEvent::new(0.0, distance, v2)?, marking, marking)
    }
}

/// Time ordering of `own` relative to `other` as judged in the inertial frame
/// moving at `frame_velocity`, scaled by `1/γ`.
///
/// Returns `Δ = (t_own − t_other) − v (x_own − x_other) / c²`. `Δ ≥ 0` exactly
/// when `own` does not precede `other` in that frame. The product and the
/// division are evaluated in double-double so the sign is reliable right up
/// to the cancellation point.
pub fn simultaneity_gap(own: &ImpactEvent, other: &ImpactEvent, frame_velocity: f64) -> Result<f64> {
    check_velocity(frame_velocity)?;
    let dt = two_sum(own.t, -other.t);
    let dx = two_sum(own.x, -other.x);
    let shift = dx.mul_f64(frame_velocity).div(c_squared());
    Ok(dt.sub(shift).to_f64())
}

/// Classifies the impact at `own`'s splitter, judged in that splitter's frame.
pub fn classify_impact(
    own: &ImpactEvent,
    other: &ImpactEvent,
    own_marking: Marking,
    other_marking: Marking,
) -> Result<ImpactClass> {
    use Marking::*;
    match (own_marking, other_marking) {
        (Distinguishable, Distinguishable) => {
            // Timing is irrelevant, but the inputs still have to be physical.
            check_velocity(own.v)?;
            Ok(ImpactClass::Before)
        }
        (Indistinguishable, Indistinguishable) => {
            let gap = simultaneity_gap(own, other, own.v)?;
            Ok(if gap < 0.0 { ImpactClass::Before } else { ImpactClass::NonBefore })
        }
        _ => Err(Error::MixedMarkings),
    }
}

/// Result of classifying both impacts of a setup.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Classification {
    pub label: ExperimentLabel,
    pub class1: ImpactClass,
    pub class2: ImpactClass,
    /// Gap of impact 1 against impact 2 in splitter 1's frame, s.
    pub gap1: f64,
    /// Gap of impact 2 against impact 1 in splitter 2's frame, s.
    pub gap2: f64,
}

pub fn classify_experiment(setup: &SetupGeometry) -> Result<Classification> {
    let (e1, e2) = (&setup.event1, &setup.event2);
    let class1 = classify_impact(e1, e2, setup.marking1, setup.marking2)?;
    let class2 = classify_impact(e2, e1, setup.marking2, setup.marking1)?;
    Ok(Classification {
        label: ExperimentLabel { first: class1, second: class2 },
        class1,
        class2,
        gap1: simultaneity_gap(e1, e2, e1.v)?,
        gap2: simultaneity_gap(e2, e1, e2.v)?,
    })
}

/// `VL/c²`: supremum of the lab delay `δt` that keeps the impact at a
/// splitter approaching its partner with speed `V` over distance `L`
/// non-before.
pub fn max_delay(speed: f64, distance: f64) -> Result<f64> {
    if !speed.is_finite() || !distance.is_finite() {
        return Err(Error::NonFinite("feasibility input"));
    }
    if speed < 0.0 || distance < 0.0 {
        return Err(Error::Domain(format!("speed and distance must be nonnegative (V = {speed}, L = {distance})")));
    }
    check_velocity(speed)?;
    Ok(two_prod(speed, distance).div(c_squared()).to_f64())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeasibilityRow {
    #[serde(rename = "V_mps")]
    pub speed: f64,
    #[serde(rename = "L_m")]
    pub distance: f64,
    #[serde(rename = "dt_max_s")]
    pub max_delay: f64,
    /// `(1 − margin)·δt_max`, a delay target with headroom.
    #[serde(rename = "dt_safe_s")]
    pub safe_delay: f64,
}

/// Evaluates [`max_delay`] over a `speed × distance` grid, speed-major.
pub fn feasibility_sweep(speeds: &LinearGrid, distances: &LinearGrid, margin: f64) -> Result<Vec<FeasibilityRow>> {
    speeds.validate()?;
    distances.validate()?;
    if !(0.0..1.0).contains(&margin) {
        return Err(Error::Domain(format!("safety margin {margin} outside [0, 1)")));
    }
    let mut rows = Vec::with_capacity(speeds.steps * distances.steps);
    for speed in speeds.values() {
        for distance in distances.values() {
            let max_delay = max_delay(speed, distance)?;
            rows.push(FeasibilityRow { speed, distance, max_delay, safe_delay: (1.0 - margin) * max_delay });
        }
    }
    Ok(rows)
}

pub const FEASIBILITY_CSV_HEADER: &str = "V_mps,L_m,dt_max_s";

/// Writes rows as CSV, every value in scientific notation with 17
/// significant digits.
pub fn write_feasibility_csv<W: Write>(rows: &[FeasibilityRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{FEASIBILITY_CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{:.16e},{:.16e},{:.16e}", r.speed, r.distance, r.max_delay)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use ImpactClass::*;
    use Marking::*;

    fn ev(t: f64, x: f64, v: f64) -> ImpactEvent {
        ImpactEvent::new(t, x, v).unwrap()
    }

    #[test]
    fn gap_examples() {
        let a = ev(1.5, 3.0, 0.0);
        assert_eq!(simultaneity_gap(&a, &a, 1e5).unwrap(), 0.0);

        let own = ev(1e-10, 0.0, 0.0);
        let other = ev(0.0, 0.0, 0.0);
        assert_eq!(simultaneity_gap(&own, &other, 0.0).unwrap(), 1e-10);
    }

    #[test]
    fn gap_vanishes_exactly_on_feasibility_boundary() {
        // V·L = c²·2⁻⁴⁰ exactly, so VL/c² = 2⁻⁴⁰ with no rounding anywhere.
        let distance = SPEED_OF_LIGHT;
        let speed = SPEED_OF_LIGHT * 2f64.powi(-40);
        let delay = 2f64.powi(-40);
        assert_eq!(max_delay(speed, distance).unwrap(), delay);

        let setup = SetupGeometry::moving_splitter(delay, distance, -speed, Indistinguishable).unwrap();
        let gap = simultaneity_gap(&setup.event2, &setup.event1, -speed).unwrap();
        assert_eq!(gap, 0.0);
        let class = classify_impact(&setup.event2, &setup.event1, Indistinguishable, Indistinguishable).unwrap();
        assert_eq!(class, NonBefore);
    }

    #[test]
    fn superluminal_frame_rejected() {
        let a = ev(0.0, 0.0, 0.0);
        assert!(matches!(simultaneity_gap(&a, &a, SPEED_OF_LIGHT), Err(Error::Superluminal(_))));
        assert!(matches!(ImpactEvent::new(0.0, 0.0, 3e8), Err(Error::Superluminal(_))));
    }

    #[test]
    fn resting_splitter_with_later_impact_is_non_before() {
        let s = SetupGeometry::moving_splitter(1e-11, 1e5, -100.0, Indistinguishable).unwrap();
        let c = classify_impact(&s.event1, &s.event2, Indistinguishable, Indistinguishable).unwrap();
        assert_eq!(c, NonBefore);
    }

    #[test]
    fn distinguishable_pair_is_always_before() {
        let s = SetupGeometry::moving_splitter(1e-11, 1e5, -100.0, Distinguishable).unwrap();
        let c = classify_experiment(&s).unwrap();
        assert_eq!(c.label, ExperimentLabel::BB);
    }

    #[test]
    fn approaching_splitter_inside_window_is_non_before() {
        let bound = max_delay(100.0, 1e5).unwrap();
        let s = SetupGeometry::moving_splitter(0.5 * bound, 1e5, -100.0, Indistinguishable).unwrap();
        let c = classify_impact(&s.event2, &s.event1, Indistinguishable, Indistinguishable).unwrap();
        assert_eq!(c, NonBefore);
    }

    #[test]
    fn experiment_labels() {
        let bound = max_delay(100.0, 1e5).unwrap();
        let approach = SetupGeometry::moving_splitter(0.5 * bound, 1e5, -100.0, Indistinguishable).unwrap();
        assert_eq!(classify_experiment(&approach).unwrap().label, ExperimentLabel::AA);

        let recede = SetupGeometry::moving_splitter(0.5 * bound, 1e5, 100.0, Indistinguishable).unwrap();
        assert_eq!(classify_experiment(&recede).unwrap().label, ExperimentLabel::AB);

        let rest = SetupGeometry::moving_splitter(1e-9, 1e5, 0.0, Indistinguishable).unwrap();
        assert_eq!(classify_experiment(&rest).unwrap().label, ExperimentLabel::AB);

        let late = SetupGeometry::moving_splitter(2.0 * bound, 1e5, -100.0, Indistinguishable).unwrap();
        assert_eq!(classify_experiment(&late).unwrap().label, ExperimentLabel::AB);
    }

    #[test]
    fn mixed_markings_rejected() {
        let a = ev(0.0, 0.0, 0.0);
        let b = ev(1.0, 1.0, 0.0);
        assert_eq!(classify_impact(&a, &b, Indistinguishable, Distinguishable), Err(Error::MixedMarkings));
        let s = SetupGeometry::new(a, b, Distinguishable, Indistinguishable).unwrap();
        assert_eq!(classify_experiment(&s), Err(Error::MixedMarkings));
    }

    #[test]
    fn max_delay_examples() {
        let d = max_delay(100.0, 1e5).unwrap();
        assert!((d - 1.1127e-10).abs() / 1.1127e-10 < 1e-4);
        assert_eq!(max_delay(0.0, 1e5).unwrap(), 0.0);
        let d4 = max_delay(100.0, 1e4).unwrap();
        assert!((d4 - d / 10.0).abs() <= 1e-25);
        assert!(max_delay(-1.0, 1.0).is_err());
        assert!(max_delay(1.0, -1.0).is_err());
        assert!(max_delay(SPEED_OF_LIGHT, 1.0).is_err());
    }

    #[test]
    fn sweep_shapes() {
        let rows =
            feasibility_sweep(&LinearGrid::point(100.0), &LinearGrid::point(1e5), DEFAULT_SAFETY_MARGIN).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].max_delay, max_delay(100.0, 1e5).unwrap());
        assert!((rows[0].safe_delay - 0.9 * rows[0].max_delay).abs() < 1e-25);

        let rows = feasibility_sweep(&LinearGrid::point(100.0), &LinearGrid::new(1e4, 2e4, 2).unwrap(), 0.1).unwrap();
        assert!((rows[1].max_delay - 2.0 * rows[0].max_delay).abs() <= 1e-26);

        let rows = feasibility_sweep(&LinearGrid::point(0.0), &LinearGrid::new(1.0, 1e6, 5).unwrap(), 0.1).unwrap();
        assert!(rows.iter().all(|r| r.max_delay == 0.0));

        let bad = LinearGrid { start: 2.0, stop: 1.0, steps: 3 };
        assert!(feasibility_sweep(&bad, &LinearGrid::point(1.0), 0.1).is_err());
        let empty = LinearGrid { start: 1.0, stop: 2.0, steps: 0 };
        assert!(feasibility_sweep(&LinearGrid::point(1.0), &empty, 0.1).is_err());
    }

    #[test]
    fn sweep_monotone() {
        let rows =
            feasibility_sweep(&LinearGrid::new(0.0, 1000.0, 7).unwrap(), &LinearGrid::new(0.0, 2e5, 9).unwrap(), 0.1)
                .unwrap();
        for i in 0..7 {
            for j in 0..9 {
                let here = rows[i * 9 + j].max_delay;
                if j + 1 < 9 {
                    assert!(rows[i * 9 + j + 1].max_delay >= here);
                }
                if i + 1 < 7 {
                    assert!(rows[(i + 1) * 9 + j].max_delay >= here);
                }
            }
        }
    }

    #[test]
    fn csv_format() {
        let rows = feasibility_sweep(&LinearGrid::point(100.0), &LinearGrid::point(1e5), 0.1).unwrap();
        let mut buf = Vec::new();
        write_feasibility_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("V_mps,L_m,dt_max_s"));
        let row = lines.next().unwrap();
        assert!(row.starts_with("1.0000000000000000e2,1.0000000000000000e5,1.11265005"), "{row}");
        assert_eq!(lines.next(), None);
    }

    fn event() -> impl Strategy<Value = ImpactEvent> {
        (-1e-6f64..1e-6, -1e5f64..1e5, -1e6f64..1e6).prop_map(|(t, x, v)| ev(t, x, v))
    }

    proptest! {
        #[test]
        fn gap_antisymmetric(a in event(), b in event(), v in -1e6f64..1e6) {
            prop_assert_eq!(simultaneity_gap(&a, &b, v).unwrap(), -simultaneity_gap(&b, &a, v).unwrap());
        }

        #[test]
        fn rest_frame_is_lab_ordering(t1 in -1.0f64..1.0, t2 in -1.0f64..1.0, x1 in -1e5f64..1e5, x2 in -1e5f64..1e5) {
            let a = ev(t1, x1, 0.0);
            let b = ev(t2, x2, 0.0);
            let c = classify_impact(&a, &b, Indistinguishable, Indistinguishable).unwrap();
            prop_assert_eq!(c == Before, t1 < t2);
        }

        #[test]
        fn distinguishable_overrides_timing(a in event(), b in event()) {
            let s = SetupGeometry::new(a, b, Distinguishable, Distinguishable).unwrap();
            prop_assert_eq!(classify_experiment(&s).unwrap().label, ExperimentLabel::BB);
        }

        #[test]
        fn translation_invariant(a in event(), b in event(), dt in -1e-6f64..1e-6, dx in -1e5f64..1e5) {
            let gap1 = simultaneity_gap(&a, &b, a.v).unwrap();
            let gap2 = simultaneity_gap(&b, &a, b.v).unwrap();
            // skip pairs sitting within rounding of the boundary
            prop_assume!(gap1.abs() > 1e-15 && gap2.abs() > 1e-15);
            let base = classify_experiment(&SetupGeometry::new(a, b, Indistinguishable, Indistinguishable).unwrap()).unwrap();
            let a2 = ev(a.t + dt, a.x + dx, a.v);
            let b2 = ev(b.t + dt, b.x + dx, b.v);
            let moved = classify_experiment(&SetupGeometry::new(a2, b2, Indistinguishable, Indistinguishable).unwrap()).unwrap();
            prop_assert_eq!(base.label, moved.label);
        }
    }
}
