//! Experiment configuration files.
//!
//! Strict JSON: unknown keys are rejected, every physical quantity carries
//! its unit in the key name, angles are in degrees. See `book/src/config.md`
//! for the full schema.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::grid::LinearGrid;
use crate::quantum::{AnalyzerSettings, TwoPhotonState};
use crate::timing::{ImpactEvent, Marking, SetupGeometry, DEFAULT_SAFETY_MARGIN, SPEED_OF_LIGHT};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub geometry: Geometry,
    pub markings: Markings,
    pub state: StateSpec,
    pub angles: Angles,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub montecarlo: Option<MonteCarloSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feasibility: Option<FeasibilitySpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    pub splitter1: SplitterImpact,
    pub splitter2: SplitterImpact,
}

/// Lab-frame impact of a photon on its splitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitterImpact {
    pub t_s: f64,
    pub x_m: f64,
    pub v_mps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Markings {
    pub photon1: Marking,
    pub photon2: Marking,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Bell,
    /// Unnormalized class weights as `[re, im]` pairs.
    TwoClass {
        hh: [f64; 2],
        vv: [f64; 2],
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Angles {
    pub alpha_deg: f64,
    pub beta_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Vary α, hold β at `angles.beta_deg`.
    Alpha,
    /// Vary β, hold α at `angles.alpha_deg`.
    Beta,
    /// β = α.
    Diagonal,
    /// β = −α.
    AntiDiagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub start_deg: f64,
    pub stop_deg: f64,
    pub steps: usize,
}

impl SweepSpec {
    /// `(α°, β°)` for every sweep point, in order.
    pub fn points(&self, angles: &Angles) -> Vec<(f64, f64)> {
        let grid = LinearGrid { start: self.start_deg, stop: self.stop_deg, steps: self.steps };
        grid.values()
            .map(|x| match self.axis {
                SweepAxis::Alpha => (x, angles.beta_deg),
                SweepAxis::Beta => (angles.alpha_deg, x),
                SweepAxis::Diagonal => (x, x),
                // + 0.0 turns -0.0 into 0.0
                SweepAxis::AntiDiagonal => (x, -x + 0.0),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloSpec {
    pub pairs: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeasibilitySpec {
    pub speed_mps: LinearGrid,
    pub distance_m: LinearGrid,
    #[serde(default = "default_margin")]
    pub safety_margin: f64,
}

fn default_margin() -> f64 {
    DEFAULT_SAFETY_MARGIN
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<FieldError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigErrors> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ConfigErrors(vec![FieldError {
            path: if path == "." { "$".into() } else { path },
            message: e.into_inner().to_string(),
        }])
    })?;
    let errors = config.validate();
    if errors.is_empty() {
        Ok(config)
    } else {
        Err(ConfigErrors(errors))
    }
}

impl ExperimentConfig {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Semantic checks beyond the JSON shape; returns every problem found.
    pub fn validate(&self) -> Vec<FieldError> {
        let mut errors = Vec::new();
        let mut err = |path: &str, message: String| errors.push(FieldError { path: path.into(), message });

        if self.schema != SCHEMA_VERSION {
            err("schema", format!("unsupported schema version {} (expected {SCHEMA_VERSION})", self.schema));
        }
        for (name, s) in [("splitter1", &self.geometry.splitter1), ("splitter2", &self.geometry.splitter2)] {
            for (field, value) in [("t_s", s.t_s), ("x_m", s.x_m), ("v_mps", s.v_mps)] {
                if !value.is_finite() {
                    err(&format!("geometry.{name}.{field}"), "must be finite".into());
                }
            }
            if s.v_mps.abs() >= SPEED_OF_LIGHT {
                err(
                    &format!("geometry.{name}.v_mps"),
                    format!("superluminal velocity {} m/s (need |v| < {SPEED_OF_LIGHT})", s.v_mps),
                );
            }
        }
        if let StateSpec::TwoClass { hh, vv } = self.state {
            if hh.iter().chain(vv.iter()).any(|x| !x.is_finite()) {
                err("state.two_class", "weights must be finite".into());
            } else if hh.iter().chain(vv.iter()).all(|&x| x == 0.0) {
                err("state.two_class", "weights are both zero".into());
            }
        }
        for (field, value) in [("alpha_deg", self.angles.alpha_deg), ("beta_deg", self.angles.beta_deg)] {
            if !value.is_finite() {
                err(&format!("angles.{field}"), "must be finite".into());
            }
        }
        if let Some(sweep) = &self.sweep {
            let grid = LinearGrid { start: sweep.start_deg, stop: sweep.stop_deg, steps: sweep.steps };
            if let Err(e) = grid.validate() {
                err("sweep", e.to_string());
            }
        }
        if let Some(mc) = &self.montecarlo {
            if mc.pairs == 0 {
                err("montecarlo.pairs", "must be at least 1".into());
            }
        }
        if let Some(f) = &self.feasibility {
            for (field, grid) in [("speed_mps", &f.speed_mps), ("distance_m", &f.distance_m)] {
                if let Err(e) = grid.validate() {
                    err(&format!("feasibility.{field}"), e.to_string());
                } else if grid.start < 0.0 {
                    err(&format!("feasibility.{field}"), format!("start {} is negative", grid.start));
                }
            }
            if f.speed_mps.stop >= SPEED_OF_LIGHT {
                err("feasibility.speed_mps.stop", format!("must be below {SPEED_OF_LIGHT}"));
            }
            if !(0.0..1.0).contains(&f.safety_margin) {
                err("feasibility.safety_margin", format!("{} outside [0, 1)", f.safety_margin));
            }
        }
        errors
    }

    pub fn setup(&self) -> crate::Result<SetupGeometry> {
        let ev = |s: &SplitterImpact| ImpactEvent::new(s.t_s, s.x_m, s.v_mps);
        SetupGeometry::new(
            ev(&self.geometry.splitter1)?,
            ev(&self.geometry.splitter2)?,
            self.markings.photon1,
            self.markings.photon2,
        )
    }

    pub fn state(&self) -> crate::Result<TwoPhotonState> {
        match self.state {
            StateSpec::Bell => Ok(TwoPhotonState::bell()),
            StateSpec::TwoClass { hh, vv } => {
                TwoPhotonState::two_class(Complex64::new(hh[0], hh[1]), Complex64::new(vv[0], vv[1]))
            }
        }
    }

    pub fn settings(&self) -> crate::Result<AnalyzerSettings> {
        AnalyzerSettings::from_degrees(self.angles.alpha_deg, self.angles.beta_deg)
    }

    /// Planner grids: the explicit `feasibility` block, or the single point
    /// `V = |v₂|`, `L = |x₂ − x₁|` taken from the geometry.
    pub fn feasibility_grids(&self) -> (LinearGrid, LinearGrid, f64) {
        match &self.feasibility {
            Some(f) => (f.speed_mps, f.distance_m, f.safety_margin),
            None => {
                let g = &self.geometry;
                (
                    LinearGrid::point(g.splitter2.v_mps.abs()),
                    LinearGrid::point((g.splitter2.x_m - g.splitter1.x_m).abs()),
                    DEFAULT_SAFETY_MARGIN,
                )
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) const MINIMAL: &str = r#"{
        "schema": 1,
        "geometry": {
            "splitter1": {"t_s": 5e-11, "x_m": 0, "v_mps": 0},
            "splitter2": {"t_s": 0, "x_m": 100000, "v_mps": -100}
        },
        "markings": {"photon1": "u", "photon2": "u"},
        "state": "bell",
        "angles": {"alpha_deg": 45, "beta_deg": -45}
    }"#;

    fn with(key_path: &[&str], value: serde_json::Value) -> String {
        let mut v: serde_json::Value = serde_json::from_str(MINIMAL).unwrap();
        let mut slot = &mut v;
        for k in &key_path[..key_path.len() - 1] {
            slot = &mut slot[*k];
        }
        slot[key_path[key_path.len() - 1]] = value;
        v.to_string()
    }

    #[test]
    fn minimal_config_parses() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.angles, Angles { alpha_deg: 45.0, beta_deg: -45.0 });
        assert_eq!(c.state, StateSpec::Bell);
        assert_eq!(c.markings.photon2, Marking::Indistinguishable);
        assert!(c.setup().is_ok());
    }

    #[test]
    fn superluminal_velocity_rejected() {
        let text = with(&["geometry", "splitter2", "v_mps"], serde_json::json!(3e8));
        let e = parse_config(&text).unwrap_err();
        assert_eq!(e.0.len(), 1);
        assert_eq!(e.0[0].path, "geometry.splitter2.v_mps");
        assert!(e.0[0].message.contains("superluminal"));
    }

    #[test]
    fn missing_angles_named() {
        let mut v: serde_json::Value = serde_json::from_str(MINIMAL).unwrap();
        v.as_object_mut().unwrap().remove("angles");
        let e = parse_config(&v.to_string()).unwrap_err();
        assert!(e.0[0].message.contains("missing field `angles`"), "{e}");
    }

    #[test]
    fn missing_nested_field_has_path() {
        let mut v: serde_json::Value = serde_json::from_str(MINIMAL).unwrap();
        v["geometry"]["splitter1"].as_object_mut().unwrap().remove("x_m");
        let e = parse_config(&v.to_string()).unwrap_err();
        assert_eq!(e.0[0].path, "geometry.splitter1");
        assert!(e.0[0].message.contains("x_m"));
    }

    #[test]
    fn unknown_key_rejected() {
        let text = with(&["angles", "gamma_deg"], serde_json::json!(1.0));
        let e = parse_config(&text).unwrap_err();
        assert!(e.0[0].message.contains("unknown field `gamma_deg`"), "{e}");
        assert_eq!(e.0[0].path, "angles.gamma_deg");
    }

    #[test]
    fn several_problems_reported_together() {
        let mut v: serde_json::Value = serde_json::from_str(MINIMAL).unwrap();
        v["schema"] = 7.into();
        v["geometry"]["splitter1"]["v_mps"] = serde_json::json!(-4e8);
        v["montecarlo"] = serde_json::json!({"pairs": 0, "seed": 1});
        let e = parse_config(&v.to_string()).unwrap_err();
        let paths: Vec<&str> = e.0.iter().map(|f| f.path.as_str()).collect();
        assert_eq!(paths, ["schema", "geometry.splitter1.v_mps", "montecarlo.pairs"]);
    }

    #[test]
    fn two_class_state() {
        let text = with(&["state"], serde_json::json!({"two_class": {"hh": [0.8, 0.0], "vv": [-0.6, 0.0]}}));
        let c = parse_config(&text).unwrap();
        let s = c.state().unwrap();
        assert!((s.hh().re - 0.8).abs() < 1e-15);
        let zero = with(&["state"], serde_json::json!({"two_class": {"hh": [0, 0], "vv": [0, 0]}}));
        assert_eq!(parse_config(&zero).unwrap_err().0[0].path, "state.two_class");
    }

    #[test]
    fn sweep_points() {
        let spec = SweepSpec { axis: SweepAxis::AntiDiagonal, start_deg: 0.0, stop_deg: 90.0, steps: 91 };
        let pts = spec.points(&Angles { alpha_deg: 0.0, beta_deg: 0.0 });
        assert_eq!(pts[0], (0.0, 0.0));
        assert!(pts[0].1.is_sign_positive());
        assert_eq!(pts[90], (90.0, -90.0));
        let spec = SweepSpec { axis: SweepAxis::Beta, start_deg: 0.0, stop_deg: 10.0, steps: 3 };
        assert_eq!(spec.points(&Angles { alpha_deg: 7.0, beta_deg: 0.0 })[1], (7.0, 5.0));
    }

    #[test]
    fn feasibility_defaults_to_geometry() {
        let c = parse_config(MINIMAL).unwrap();
        let (v, l, m) = c.feasibility_grids();
        assert_eq!((v.start, l.start, m), (100.0, 100000.0, 0.1));
    }

    fn finite() -> impl Strategy<Value = f64> {
        -1e6f64..1e6
    }

    prop_compose! {
        fn any_config()(
            t in prop::array::uniform2(-1e-6f64..1e-6),
            x in prop::array::uniform2(finite()),
            v in prop::array::uniform2(-2.9e8f64..2.9e8),
            d in prop::array::uniform2(any::<bool>()),
            bell in any::<bool>(),
            w in prop::array::uniform4(0.1f64..1.0),
            angles in prop::array::uniform2(-360.0f64..360.0),
            sweep in prop::option::of((0.0f64..90.0, 1usize..100)),
            mc in prop::option::of((1u64..10_000_000, any::<u64>())),
        ) -> ExperimentConfig {
            let mark = |d: bool| if d { Marking::Distinguishable } else { Marking::Indistinguishable };
            ExperimentConfig {
                schema: SCHEMA_VERSION,
                geometry: Geometry {
                    splitter1: SplitterImpact { t_s: t[0], x_m: x[0], v_mps: v[0] },
                    splitter2: SplitterImpact { t_s: t[1], x_m: x[1], v_mps: v[1] },
                },
                markings: Markings { photon1: mark(d[0]), photon2: mark(d[1]) },
                state: if bell { StateSpec::Bell } else { StateSpec::TwoClass { hh: [w[0], w[1]], vv: [w[2], w[3]] } },
                angles: Angles { alpha_deg: angles[0], beta_deg: angles[1] },
                sweep: sweep.map(|(stop, steps)| SweepSpec {
                    axis: SweepAxis::AntiDiagonal,
                    start_deg: if steps == 1 { stop } else { 0.0 },
                    stop_deg: stop,
                    steps,
                }),
                montecarlo: mc.map(|(pairs, seed)| MonteCarloSpec { pairs, seed }),
                feasibility: None,
            }
        }
    }

    proptest! {
        #[test]
        fn serialize_parse_round_trip(c in any_config()) {
            prop_assert!(c.validate().is_empty());
            let back = parse_config(&c.to_json()).unwrap();
            prop_assert_eq!(back, c);
        }
    }
}
