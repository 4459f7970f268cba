//! Spherical-wave free-space channel through a passive RIS.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::beamforming::{ElementMode, RisConfiguration};
use crate::error::{Error, Result};
use crate::geometry::{wavelength, Point3, RisGeometry, Vec3};

/// Minimum separation accepted by [`freespace_gain`].
pub const MIN_LINK_DISTANCE: f64 = 1e-9;

/// `10^((dBm − 30)/10)` watts. Integral decades are computed exactly.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    let exponent = (dbm - 30.0) / 10.0;
    if exponent.fract() == 0.0 && exponent.abs() <= 22.0 {
        let magnitude = 10f64.powi(exponent.abs() as i32);
        if exponent >= 0.0 {
            magnitude
        } else {
            1.0 / magnitude
        }
    } else {
        10f64.powf(exponent)
    }
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// A single narrowband link through one RIS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub frequency: f64,
    pub tx_true: Point3,
    pub rx_true: Point3,
    pub rx_presumed: Point3,
    pub transmit_power: f64,
    pub noise_power: f64,
    pub los_blocked: bool,
    pub seed: u64,
}

impl Scenario {
    /// 28 GHz, tx at (0, 12, 0), rx at (5, 0, 0), 30 dBm transmit power,
    /// −90 dBm noise, direct path blocked, exact rx location.
    pub fn nominal() -> Self {
        let rx = Vec3::new(5.0, 0.0, 0.0);
        Self {
            frequency: 28e9,
            tx_true: Vec3::new(0.0, 12.0, 0.0),
            rx_true: rx,
            rx_presumed: rx,
            transmit_power: dbm_to_watts(30.0),
            noise_power: dbm_to_watts(-90.0),
            los_blocked: true,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.frequency.is_finite() && self.frequency > 0.0) {
            return Err(Error::InvalidParameter(format!("frequency {} must be positive", self.frequency)));
        }
        if !(self.transmit_power.is_finite() && self.transmit_power >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "transmit power {} must be nonnegative",
                self.transmit_power
            )));
        }
        if !(self.noise_power.is_finite() && self.noise_power > 0.0) {
            return Err(Error::InvalidParameter(format!("noise power {} must be positive", self.noise_power)));
        }
        if !(self.tx_true.is_finite() && self.rx_true.is_finite() && self.rx_presumed.is_finite()) {
            return Err(Error::NonFinite("scenario position"));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        wavelength(self.frequency)
    }

    pub fn snr(&self, h: Complex64) -> f64 {
        self.transmit_power * h.norm_sqr() / self.noise_power
    }
}

/// `(λ / 4πd)·exp(−i·2πd/λ)` with `d = ‖a − b‖`.
pub fn freespace_gain(a: Point3, b: Point3, wavelength: f64) -> Result<Complex64> {
    let d = a.distance(&b);
    if d < MIN_LINK_DISTANCE {
        return Err(Error::CoincidentPoints { distance: d });
    }
    Ok(gain_at_distance(d, wavelength))
}

fn gain_at_distance(d: f64, wavelength: f64) -> Complex64 {
    // Reduce the phase in cycles before scaling to radians.
    let cycles = (d / wavelength).fract();
    Complex64::from_polar(wavelength / (4.0 * PI * d), -2.0 * PI * cycles)
}

/// Per-element cascaded gains `tx → element → rx` plus the direct path.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadedGains {
    wavelength: f64,
    gains: Vec<Complex64>,
    path_lengths: Vec<f64>,
    direct: Complex64,
}

impl CascadedGains {
    /// Assembles gains from raw parts; `path_lengths` are the total
    /// `tx → element → rx` distances used to pick the NLoS phase reference.
    pub fn from_parts(wavelength: f64, gains: Vec<Complex64>, path_lengths: Vec<f64>, direct: Complex64) -> Result<Self> {
        if gains.len() != path_lengths.len() {
            return Err(Error::LengthMismatch {
                expected: gains.len(),
                actual: path_lengths.len(),
            });
        }
        Ok(Self {
            wavelength,
            gains,
            path_lengths,
            direct,
        })
    }

    /// NLoS gains with all path lengths equal; element 0 becomes the phase
    /// reference.
    pub fn from_gains(gains: Vec<Complex64>) -> Self {
        let n = gains.len();
        Self {
            wavelength: 1.0,
            gains,
            path_lengths: vec![0.0; n],
            direct: Complex64::new(0.0, 0.0),
        }
    }

    pub fn with_direct(mut self, direct: Complex64) -> Self {
        self.direct = direct;
        self
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn gains(&self) -> &[Complex64] {
        &self.gains
    }

    pub fn path_lengths(&self) -> &[f64] {
        &self.path_lengths
    }

    pub fn direct(&self) -> Complex64 {
        self.direct
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    pub fn has_direct_path(&self) -> bool {
        self.direct != Complex64::new(0.0, 0.0)
    }

    /// `Σ|cₙ|`, the coherent-combining ceiling of the reflected part.
    pub fn magnitude_sum(&self) -> f64 {
        self.gains.iter().map(|c| c.norm()).sum()
    }

    /// Index of the element with the shortest total path (first on ties).
    pub fn shortest_path_element(&self) -> Option<usize> {
        self.path_lengths
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
    }
}

/// Cascaded gains between arbitrary terminals, e.g. presumed positions.
pub fn cascaded_gains_between(tx: Point3, rx: Point3, geom: &RisGeometry, wavelength: f64, los_blocked: bool) -> Result<CascadedGains> {
    let mut gains = Vec::with_capacity(geom.len());
    let mut path_lengths = Vec::with_capacity(geom.len());
    for i in 0..geom.nx() {
        for j in 0..geom.ny() {
            let q = geom.element_position(i, j);
            let d1 = tx.distance(&q);
            let d2 = q.distance(&rx);
            if d1 < MIN_LINK_DISTANCE || d2 < MIN_LINK_DISTANCE {
                return Err(Error::CoincidentPoints { distance: d1.min(d2) });
            }
            gains.push(gain_at_distance(d1, wavelength) * gain_at_distance(d2, wavelength));
            path_lengths.push(d1 + d2);
        }
    }
    let direct = if los_blocked {
        Complex64::new(0.0, 0.0)
    } else {
        freespace_gain(tx, rx, wavelength)?
    };
    CascadedGains::from_parts(wavelength, gains, path_lengths, direct)
}

/// Gains of the true link in `scenario`.
pub fn cascaded_gains(scenario: &Scenario, geom: &RisGeometry) -> Result<CascadedGains> {
    cascaded_gains_between(
        scenario.tx_true,
        scenario.rx_true,
        geom,
        scenario.wavelength(),
        scenario.los_blocked,
    )
}

/// `h_d + Σ βₙ·exp(iθₙ)·cₙ` with `βₙ = 1` for reflecting elements.
pub fn effective_channel(gains: &CascadedGains, config: &RisConfiguration) -> Result<Complex64> {
    if gains.len() != config.len() {
        return Err(Error::LengthMismatch {
            expected: gains.len(),
            actual: config.len(),
        });
    }
    let reflected: Complex64 = gains
        .gains()
        .iter()
        .zip(config.modes().iter().zip(config.phases()))
        .filter(|(_, (mode, _))| **mode == ElementMode::Reflect)
        .map(|(c, (_, theta))| c * Complex64::cis(*theta))
        .sum();
    Ok(gains.direct() + reflected)
}

/// `log₂(1 + P·|h|²/σ²)` in bits/s/Hz.
pub fn spectral_efficiency(h_eff: Complex64, transmit_power: f64, noise_power: f64) -> f64 {
    (transmit_power * h_eff.norm_sqr() / noise_power).ln_1p() / std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PlaneFrame;

    #[test]
    fn dbm_conversions_are_exact() {
        assert_eq!(dbm_to_watts(30.0), 1.0);
        assert_eq!(dbm_to_watts(-90.0), 1e-12);
        assert_eq!(dbm_to_watts(0.0), 1e-3);
        assert!((watts_to_dbm(dbm_to_watts(17.5)) - 17.5).abs() < 1e-12);
    }

    #[test]
    fn full_cycle_gain_is_positive_real() {
        let lam = 0.01;
        let g = freespace_gain(Vec3::ZERO, Vec3::new(lam, 0.0, 0.0), lam).unwrap();
        assert!((g.norm() - 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert!(g.arg().abs() < 1e-12);
    }

    #[test]
    fn gain_halves_with_doubled_distance() {
        let lam = 0.0107;
        let g1 = freespace_gain(Vec3::ZERO, Vec3::new(0.0, 3.3, 0.0), lam).unwrap();
        let g2 = freespace_gain(Vec3::ZERO, Vec3::new(0.0, 6.6, 0.0), lam).unwrap();
        assert!((g1.norm() / g2.norm() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn nominal_direct_gain_magnitude() {
        let s = Scenario::nominal();
        let lam = s.wavelength();
        let g = freespace_gain(s.tx_true, s.rx_true, lam).unwrap();
        assert!((g.norm() - lam / (4.0 * PI * 13.0)).abs() < 1e-18);
    }

    #[test]
    fn coincident_points_rejected() {
        assert!(matches!(
            freespace_gain(Vec3::ZERO, Vec3::ZERO, 0.01),
            Err(Error::CoincidentPoints { .. })
        ));
    }

    #[test]
    fn origin_element_in_nominal_scene() {
        let s = Scenario::nominal();
        let lam = s.wavelength();
        let frame = PlaneFrame::bisector(Vec3::ZERO, s.tx_true, s.rx_true).unwrap();
        let geom = RisGeometry::new(frame, 1, 1, lam / 2.0).unwrap();
        let g = cascaded_gains(&s, &geom).unwrap();
        let c = g.gains()[0];
        assert!((c.norm() - lam * lam / (16.0 * PI * PI * 60.0)).abs() < 1e-22);
        let expected = -2.0 * PI * 17.0 / lam;
        let diff = (c.arg() - expected).rem_euclid(2.0 * PI);
        assert!(diff.min(2.0 * PI - diff) < 1e-9, "phase off by {diff}");
        assert_eq!(g.direct(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn direct_path_present_when_unblocked() {
        let s = Scenario {
            los_blocked: false,
            ..Scenario::nominal()
        };
        let frame = PlaneFrame::bisector(Vec3::ZERO, s.tx_true, s.rx_true).unwrap();
        let geom = RisGeometry::new(frame, 2, 2, 0.005).unwrap();
        let g = cascaded_gains(&s, &geom).unwrap();
        assert!(g.has_direct_path());
        assert!(g.gains().iter().all(|c| c.norm() > 0.0 && c.norm().is_finite()));
    }

    #[test]
    fn spectral_efficiency_examples() {
        assert_eq!(spectral_efficiency(Complex64::new(1.0, 0.0), 0.0, 1.0), 0.0);
        assert!((spectral_efficiency(Complex64::new(0.0, 1e-6), 1.0, 1e-12) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch_rejected() {
        let g = CascadedGains::from_gains(vec![Complex64::new(1.0, 0.0); 3]);
        let cfg = RisConfiguration::all_reflect_one_bit(vec![0.0; 2]).unwrap();
        assert!(matches!(effective_channel(&g, &cfg), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn invalid_scenarios_rejected() {
        let mut s = Scenario::nominal();
        s.noise_power = 0.0;
        assert!(s.validate().is_err());
        let mut s = Scenario::nominal();
        s.frequency = -1.0;
        assert!(s.validate().is_err());
        assert!(Scenario::nominal().validate().is_ok());
    }
}
