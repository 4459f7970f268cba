//! RIS configuration schemes.
//!
//! Location-driven: [`tposj_configure`] assigns one-bit phases from the
//! Fresnel zone of each element and switches elements near a phase-flip
//! boundary to absorption. CSI-driven references: [`nearest_phase_bits`],
//! [`continuous_conjugate`], [`greedy_onebit_search`] and the
//! [`exhaustive_onebit`] oracle. [`random_configuration`] is the floor.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;

use crate::channel::CascadedGains;
use crate::error::{Error, Result};
use crate::geometry::{zone_of, FresnelMap, Point3, RisGeometry, MIN_FOCAL_DISTANCE};

/// Largest element count accepted by [`exhaustive_onebit`].
pub const MAX_EXHAUSTIVE_ELEMENTS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementMode {
    Reflect,
    Absorb,
}

impl ElementMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ElementMode::Reflect => "reflect",
            ElementMode::Absorb => "absorb",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseModel {
    /// Phases restricted to `{0, π}`.
    OneBit,
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RisConfiguration {
    modes: Vec<ElementMode>,
    phases: Vec<f64>,
    model: PhaseModel,
}

impl RisConfiguration {
    pub fn new(modes: Vec<ElementMode>, phases: Vec<f64>, model: PhaseModel) -> Result<Self> {
        if modes.len() != phases.len() {
            return Err(Error::LengthMismatch {
                expected: modes.len(),
                actual: phases.len(),
            });
        }
        if phases.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("phase"));
        }
        if model == PhaseModel::OneBit && phases.iter().any(|&t| t != 0.0 && t != PI) {
            return Err(Error::InvalidParameter("one-bit phases must be exactly 0 or pi".into()));
        }
        Ok(Self { modes, phases, model })
    }

    pub fn all_reflect_one_bit(phases: Vec<f64>) -> Result<Self> {
        Self::new(vec![ElementMode::Reflect; phases.len()], phases, PhaseModel::OneBit)
    }

    pub fn all_reflect_continuous(phases: Vec<f64>) -> Result<Self> {
        Self::new(vec![ElementMode::Reflect; phases.len()], phases, PhaseModel::Continuous)
    }

    /// One-bit, all reflecting; `true` bits map to phase π.
    pub fn from_bits(bits: &[bool]) -> Self {
        Self {
            modes: vec![ElementMode::Reflect; bits.len()],
            phases: bits.iter().map(|&b| if b { PI } else { 0.0 }).collect(),
            model: PhaseModel::OneBit,
        }
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[ElementMode] {
        &self.modes
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn phase_model(&self) -> PhaseModel {
        self.model
    }

    pub fn reflect_count(&self) -> usize {
        self.modes.iter().filter(|m| **m == ElementMode::Reflect).count()
    }

    pub fn is_reflecting(&self, index: usize) -> bool {
        self.modes[index] == ElementMode::Reflect
    }

    /// Phase bits (`true` for π) of a one-bit configuration.
    pub fn bits(&self) -> Option<Vec<bool>> {
        (self.model == PhaseModel::OneBit).then(|| self.phases.iter().map(|&t| t == PI).collect())
    }

    fn is_all_reflect_one_bit(&self) -> bool {
        self.model == PhaseModel::OneBit && self.modes.iter().all(|m| *m == ElementMode::Reflect)
    }
}

/// How step one of TPOSJ maps an element's excess path to a phase bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BucketingRule {
    /// Phase 0 in odd Fresnel zones, π in even ones.
    #[default]
    ZoneParity,
    /// The bit closest to the direct-path phase; flips sit at zone centers.
    NearestPhase,
}

impl BucketingRule {
    pub fn as_str(&self) -> &'static str {
        match self {
            BucketingRule::ZoneParity => "zone-parity",
            BucketingRule::NearestPhase => "nearest-phase",
        }
    }
}

impl fmt::Display for BucketingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BucketingRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zone-parity" => Ok(BucketingRule::ZoneParity),
            "nearest-phase" => Ok(BucketingRule::NearestPhase),
            other => Err(Error::InvalidParameter(format!("unknown bucketing rule '{other}'"))),
        }
    }
}

/// TPOSJ robustness threshold `xi` (meters, within `[0, λ/2]`) and rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TposjParams {
    pub xi: f64,
    pub rule: BucketingRule,
}

impl TposjParams {
    pub fn new(xi: f64, rule: BucketingRule) -> Self {
        Self { xi, rule }
    }

    pub fn validate(&self, wavelength: f64) -> Result<()> {
        let max = wavelength / 2.0;
        if !(self.xi >= 0.0 && self.xi <= max) {
            return Err(Error::XiOutOfRange { xi: self.xi, max });
        }
        Ok(())
    }
}

/// `0` for odd zones, `π` for even zones.
pub fn zone_parity_phases(map: &FresnelMap) -> Vec<f64> {
    map.zones().iter().map(|&m| parity_phase(m)).collect()
}

fn parity_phase(zone: u64) -> f64 {
    if zone % 2 == 1 {
        0.0
    } else {
        PI
    }
}

/// Bit closest to the direct-path phase reference: `0` iff
/// `cos(2π·δ/λ) ≥ 0`, evaluated from zone parity and residual.
fn nearest_phase_from_residual(zone: u64, residual: f64, wavelength: f64) -> f64 {
    let quarter = wavelength / 4.0;
    let flip = if zone % 2 == 1 {
        residual > quarter
    } else {
        residual < quarter
    };
    if flip {
        PI
    } else {
        0.0
    }
}

/// Residual measured from the phase-flip loci of `rule`.
fn flip_residual(residual: f64, wavelength: f64, rule: BucketingRule) -> f64 {
    match rule {
        BucketingRule::ZoneParity => residual,
        BucketingRule::NearestPhase => {
            let half = wavelength / 2.0;
            let shifted = residual + wavelength / 4.0;
            if shifted >= half {
                shifted - half
            } else {
                shifted
            }
        }
    }
}

/// Step two of TPOSJ: reflect iff the distance to the nearest flip locus is
/// at least `(λ/2 − ξ)/2`.
fn tposj_mode(rho: f64, wavelength: f64, xi: f64) -> ElementMode {
    let half = wavelength / 2.0;
    let distance = rho.min(half - rho);
    if distance < (half - xi) / 2.0 {
        ElementMode::Absorb
    } else {
        ElementMode::Reflect
    }
}

fn tposj_element(zone: u64, residual: f64, wavelength: f64, params: &TposjParams) -> (ElementMode, f64) {
    let theta = match params.rule {
        BucketingRule::ZoneParity => parity_phase(zone),
        BucketingRule::NearestPhase => nearest_phase_from_residual(zone, residual, wavelength),
    };
    let rho = flip_residual(residual, wavelength, params.rule);
    (tposj_mode(rho, wavelength, params.xi), theta)
}

/// Two-step position-aided on/off state judgement from a Fresnel map of
/// the presumed geometry.
pub fn tposj_configure(map: &FresnelMap, params: &TposjParams) -> Result<RisConfiguration> {
    let lam = map.wavelength();
    params.validate(lam)?;
    let (modes, phases) = map
        .zones()
        .iter()
        .zip(map.residuals())
        .map(|(&m, &r)| tposj_element(m, r, lam, params))
        .unzip();
    Ok(RisConfiguration {
        modes,
        phases,
        model: PhaseModel::OneBit,
    })
}

/// TPOSJ straight from terminal locations, counting the elementary
/// operations performed (distance evaluations, bucketing, phase and mode
/// assignments).
pub fn tposj_configure_counted(
    tx: Point3,
    rx: Point3,
    geom: &RisGeometry,
    wavelength: f64,
    params: &TposjParams,
) -> Result<(RisConfiguration, u64)> {
    params.validate(wavelength)?;
    let los = tx.distance(&rx);
    if los < MIN_FOCAL_DISTANCE {
        return Err(Error::DegenerateFoci { distance: los });
    }
    let mut ops = 0u64;
    let mut modes = Vec::with_capacity(geom.len());
    let mut phases = Vec::with_capacity(geom.len());
    for i in 0..geom.nx() {
        for j in 0..geom.ny() {
            let q = geom.element_position(i, j);
            let delta = (tx.distance(&q) + q.distance(&rx) - los).max(0.0);
            ops += 2;
            let (zone, residual) = zone_of(delta, wavelength);
            ops += 1;
            let (mode, theta) = tposj_element(zone, residual, wavelength, params);
            ops += 2;
            modes.push(mode);
            phases.push(theta);
        }
    }
    Ok((
        RisConfiguration {
            modes,
            phases,
            model: PhaseModel::OneBit,
        },
        ops,
    ))
}

/// Phase reference for CSI-driven schemes: the direct path when present,
/// otherwise the element with the shortest total path.
pub fn phase_reference(gains: &CascadedGains) -> f64 {
    if gains.has_direct_path() {
        gains.direct().arg()
    } else {
        gains
            .shortest_path_element()
            .map(|i| gains.gains()[i].arg())
            .unwrap_or(0.0)
    }
}

/// One-bit quantization of the ideal phases: `θ = 0` iff
/// `cos(arg cₙ − ref) ≥ 0`.
pub fn nearest_phase_bits(gains: &CascadedGains) -> Vec<f64> {
    let reference = phase_reference(gains);
    gains
        .gains()
        .iter()
        .map(|c| if (c.arg() - reference).cos() >= 0.0 { 0.0 } else { PI })
        .collect()
}

/// Ideal continuous phases aligning every element with the reference.
pub fn continuous_conjugate(gains: &CascadedGains) -> RisConfiguration {
    let reference = phase_reference(gains);
    RisConfiguration {
        modes: vec![ElementMode::Reflect; gains.len()],
        phases: gains.gains().iter().map(|c| (reference - c.arg()).rem_euclid(TAU)).collect(),
        model: PhaseModel::Continuous,
    }
}

/// All reflecting, phases i.i.d. uniform on `{0, π}`.
pub fn random_configuration<R: Rng + ?Sized>(n: usize, rng: &mut R) -> RisConfiguration {
    RisConfiguration {
        modes: vec![ElementMode::Reflect; n],
        phases: (0..n).map(|_| if rng.random::<bool>() { PI } else { 0.0 }).collect(),
        model: PhaseModel::OneBit,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyOutcome {
    pub config: RisConfiguration,
    pub sweeps: usize,
    pub flip_tests: u64,
    /// True if the last sweep made no flip.
    pub converged: bool,
    /// `|h_eff|²` at the start and after every accepted flip.
    pub objective_trace: Vec<f64>,
}

/// Coordinate ascent on `|h_eff|²` over one-bit phases: flip any bit that
/// strictly improves the objective until a full sweep changes nothing.
pub fn greedy_onebit_search(gains: &CascadedGains, init: &RisConfiguration, max_sweeps: usize) -> Result<GreedyOutcome> {
    if init.len() != gains.len() {
        return Err(Error::LengthMismatch {
            expected: gains.len(),
            actual: init.len(),
        });
    }
    if !init.is_all_reflect_one_bit() {
        return Err(Error::InvalidParameter(
            "greedy search needs an all-reflect one-bit start".into(),
        ));
    }
    let mut bits: Vec<bool> = init.phases.iter().map(|&t| t == PI).collect();
    let mut terms: Vec<Complex64> = gains
        .gains()
        .iter()
        .zip(&bits)
        .map(|(c, &b)| if b { -c } else { *c })
        .collect();
    let mut h = gains.direct() + terms.iter().sum::<Complex64>();
    let mut objective = h.norm_sqr();
    let mut trace = vec![objective];
    let mut flip_tests = 0u64;
    let mut sweeps = 0;
    let mut converged = false;

    while sweeps < max_sweeps {
        sweeps += 1;
        let mut flipped = false;
        for n in 0..terms.len() {
            flip_tests += 1;
            let candidate = h - 2.0 * terms[n];
            let value = candidate.norm_sqr();
            if value > objective {
                h = candidate;
                objective = value;
                terms[n] = -terms[n];
                bits[n] = !bits[n];
                trace.push(objective);
                flipped = true;
            }
        }
        if !flipped {
            converged = true;
            break;
        }
    }

    Ok(GreedyOutcome {
        config: RisConfiguration::from_bits(&bits),
        sweeps,
        flip_tests,
        converged,
        objective_trace: trace,
    })
}

/// Visits all `2ⁿ` one-bit patterns in reflected Gray-code order, updating
/// the effective channel with one term per step. `visit` receives the
/// pattern (bit `n` set means element `n` at phase π) and `|h_eff|²`.
pub fn for_each_onebit_state<F: FnMut(u32, f64)>(gains: &CascadedGains, mut visit: F) -> Result<()> {
    let n = gains.len();
    if n > MAX_EXHAUSTIVE_ELEMENTS {
        return Err(Error::TooManyElements {
            n,
            max: MAX_EXHAUSTIVE_ELEMENTS,
        });
    }
    let mut terms: Vec<Complex64> = gains.gains().to_vec();
    let mut h = gains.direct() + terms.iter().sum::<Complex64>();
    let mut pattern = 0u32;
    visit(pattern, h.norm_sqr());
    for step in 1u32..(1u32 << n) {
        let bit = step.trailing_zeros() as usize;
        h -= 2.0 * terms[bit];
        terms[bit] = -terms[bit];
        pattern ^= 1 << bit;
        visit(pattern, h.norm_sqr());
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustiveOutcome {
    pub config: RisConfiguration,
    pub objective: f64,
    pub states: u64,
}

/// Global optimum of `|h_eff|²` over all one-bit, all-reflect patterns.
/// Exact ties go to the lexicographically smallest bit pattern, element 0
/// first.
pub fn exhaustive_onebit(gains: &CascadedGains) -> Result<ExhaustiveOutcome> {
    let n = gains.len() as u32;
    let lex_key = |pattern: u32| if n == 0 { 0 } else { pattern.reverse_bits() >> (32 - n) };
    let mut best = (f64::NEG_INFINITY, u32::MAX, 0u32);
    let mut states = 0u64;
    for_each_onebit_state(gains, |pattern, value| {
        states += 1;
        let key = lex_key(pattern);
        if value > best.0 || (value == best.0 && key < best.1) {
            best = (value, key, pattern);
        }
    })?;
    let bits: Vec<bool> = (0..n).map(|i| best.2 & (1 << i) != 0).collect();
    Ok(ExhaustiveOutcome {
        config: RisConfiguration::from_bits(&bits),
        objective: best.0,
        states,
    })
}
