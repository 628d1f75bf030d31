//! Standard quantum predictions for a two-photon polarization state.
//!
//! Each photon passes a polarization rotator (angle `α` for photon 1, `β` for
//! photon 2) and then a polarizing beam-splitter. Outcome `+` is the H port,
//! `-` the V port, for both photons. Flipping the convention on both sides
//! leaves every correlation unchanged.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{JointDistribution, Outcome, PROB_TOL};

/// Amplitudes over `|HH⟩, |HV⟩, |VH⟩, |VV⟩` (photon 1 first).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPhotonState {
    amplitudes: [Complex64; 4],
}

const HH: usize = 0;
const HV: usize = 1;
const VH: usize = 2;
const VV: usize = 3;

impl TwoPhotonState {
    pub fn new(amplitudes: [Complex64; 4]) -> Result<Self> {
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite("amplitude"));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > PROB_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amplitudes })
    }

    /// `(|HH⟩ − |VV⟩)/√2`.
    pub fn bell() -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            amplitudes: [
                Complex64::new(r, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(-r, 0.0),
            ],
        }
    }

    /// Normalized `w_HH |HH⟩ + w_VV |VV⟩`.
    pub fn two_class(w_hh: Complex64, w_vv: Complex64) -> Result<Self> {
        let norm = (w_hh.norm_sqr() + w_vv.norm_sqr()).sqrt();
        if !norm.is_finite() {
            return Err(Error::NonFinite("class weight"));
        }
        if norm == 0.0 {
            return Err(Error::Domain("two-class weights are both zero".into()));
        }
        let zero = Complex64::new(0.0, 0.0);
        Self::new([w_hh / norm, zero, zero, w_vv / norm])
    }

    pub fn amplitudes(&self) -> [Complex64; 4] {
        self.amplitudes
    }

    pub fn hh(&self) -> Complex64 {
        self.amplitudes[HH]
    }

    pub fn vv(&self) -> Complex64 {
        self.amplitudes[VV]
    }

    /// True when the `|HV⟩` and `|VH⟩` components vanish.
    pub fn is_two_class(&self) -> bool {
        self.amplitudes[HV].norm_sqr() <= PROB_TOL && self.amplitudes[VH].norm_sqr() <= PROB_TOL
    }

    /// Two-class state with both classes equally populated.
    pub fn is_equal_weight(&self) -> bool {
        self.is_two_class()
            && (self.hh().norm_sqr() - 0.5).abs() <= PROB_TOL
            && (self.vv().norm_sqr() - 0.5).abs() <= PROB_TOL
    }

    /// The state equals [`TwoPhotonState::bell`] up to a global phase.
    pub fn is_bell(&self) -> bool {
        // a_VV = -a_HH with equal weights
        self.is_equal_weight() && (self.vv() + self.hh()).norm_sqr() <= PROB_TOL
    }

    pub fn with_global_phase(&self, phase: f64) -> Self {
        let u = Complex64::from_polar(1.0, phase);
        Self { amplitudes: self.amplitudes.map(|a| a * u) }
    }
}

/// Rotator angles in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyzerSettings {
    pub alpha: f64,
    pub beta: f64,
}

impl AnalyzerSettings {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::NonFinite("analyzer angle"));
        }
        Ok(Self { alpha, beta })
    }

    pub fn from_degrees(alpha_deg: f64, beta_deg: f64) -> Result<Self> {
        Self::new(alpha_deg.to_radians(), beta_deg.to_radians())
    }

    /// Both angles reduced to `[0, π)`; every prediction is π-periodic.
    pub fn reduced(&self) -> Self {
        let r = |a: f64| a.rem_euclid(std::f64::consts::PI);
        Self { alpha: r(self.alpha), beta: r(self.beta) }
    }

    pub fn swapped(&self) -> Self {
        Self { alpha: self.beta, beta: self.alpha }
    }
}

/// Single-photon rotation `R(θ)`: `|H⟩ → cos θ|H⟩ + sin θ|V⟩`,
/// `|V⟩ → −sin θ|H⟩ + cos θ|V⟩`. Indexed `[out][in]` with H = 0, V = 1.
fn rotation(theta: f64) -> [[f64; 2]; 2] {
    let (s, c) = theta.sin_cos();
    [[c, -s], [s, c]]
}

fn port(o: Outcome) -> usize {
    match o {
        Outcome::Plus => 0,
        Outcome::Minus => 1,
    }
}

/// Builds the joint and divides out the rounding drift of its total, which
/// the state's own norm tolerance would otherwise let through.
fn normalized(f: impl FnMut(Outcome, Outcome) -> f64) -> Result<JointDistribution> {
    let raw = JointDistribution::from_fn(f)?;
    let total: f64 = raw.entries().iter().sum();
    JointDistribution::from_entries(raw.entries().map(|p| p / total))
}

/// Coherent prediction for indistinguishable (`u, u`) impacts.
pub fn entangled_joint(state: &TwoPhotonState, settings: &AnalyzerSettings) -> Result<JointDistribution> {
    let r1 = rotation(settings.alpha);
    let r2 = rotation(settings.beta);
    let a = state.amplitudes();
    normalized(|s, w| {
        let (i, j) = (port(s), port(w));
        let mut amp = Complex64::new(0.0, 0.0);
        for k in 0..2 {
            for l in 0..2 {
                amp += a[2 * k + l] * (r1[i][k] * r2[j][l]);
            }
        }
        amp.norm_sqr()
    })
}

/// Incoherent prediction for distinguishable (`d, d`) impacts: the pair is
/// `(H, H)` with probability `|a_HH|²` and `(V, V)` with `|a_VV|²`, and each
/// photon passes its analyzer independently.
pub fn mixture_joint(state: &TwoPhotonState, settings: &AnalyzerSettings) -> Result<JointDistribution> {
    if !state.is_two_class() {
        return Err(Error::UnsupportedPreparation);
    }
    let w_h = state.hh().norm_sqr();
    let w_v = state.vv().norm_sqr();
    let (c1, s1) = (settings.alpha.cos().powi(2), settings.alpha.sin().powi(2));
    let (c2, s2) = (settings.beta.cos().powi(2), settings.beta.sin().powi(2));
    // P(H-port | H, θ) = cos²θ, P(H-port | V, θ) = sin²θ
    let pass = |o: Outcome, h_port: f64, v_port: f64| match o {
        Outcome::Plus => h_port,
        Outcome::Minus => v_port,
    };
    normalized(|s, w| w_h * pass(s, c1, s1) * pass(w, c2, s2) + w_v * pass(s, s1, c1) * pass(w, s2, c2))
}
