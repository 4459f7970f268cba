//! Parametric location-error models. Presumed positions are the true ones
//! plus a sampled error.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{Point3, Vec3, Vector3};

/// Subset of coordinate axes that carry error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AxisMask {
    pub x: bool,
    pub y: bool,
    pub z: bool,
}

impl AxisMask {
    pub const ALL: AxisMask = AxisMask {
        x: true,
        y: true,
        z: true,
    };
    pub const NONE: AxisMask = AxisMask {
        x: false,
        y: false,
        z: false,
    };

    pub fn count(&self) -> usize {
        [self.x, self.y, self.z].iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    fn as_array(&self) -> [bool; 3] {
        [self.x, self.y, self.z]
    }
}

impl Default for AxisMask {
    fn default() -> Self {
        Self::ALL
    }
}

impl fmt::Display for AxisMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("none");
        }
        for (on, c) in self.as_array().iter().zip(['x', 'y', 'z']) {
            if *on {
                write!(f, "{c}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for AxisMask {
    type Err = Error;

    /// Accepts `none` or any combination of `x`, `y`, `z`, e.g. `xz`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "none" {
            return Ok(Self::NONE);
        }
        let mut mask = Self::NONE;
        for c in s.chars().filter(|c| !matches!(c, ',' | ' ')) {
            let slot = match c {
                'x' => &mut mask.x,
                'y' => &mut mask.y,
                'z' => &mut mask.z,
                _ => return Err(Error::InvalidParameter(format!("unknown axis '{c}' in mask '{s}'"))),
            };
            *slot = true;
        }
        if mask.is_empty() {
            return Err(Error::InvalidParameter(format!("empty axis mask '{s}'")));
        }
        Ok(mask)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErrorKind {
    /// Error of length `epsilon` in a uniformly random direction.
    FixedMagnitude { epsilon: f64 },
    /// Independent zero-mean normal error with per-axis standard deviation.
    GaussianPerAxis { sigma: [f64; 3] },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorModel {
    pub kind: ErrorKind,
    pub mask: AxisMask,
}

impl ErrorModel {
    pub fn fixed_magnitude(epsilon: f64) -> Self {
        Self {
            kind: ErrorKind::FixedMagnitude { epsilon },
            mask: AxisMask::ALL,
        }
    }

    pub fn gaussian(sigma: [f64; 3]) -> Self {
        Self {
            kind: ErrorKind::GaussianPerAxis { sigma },
            mask: AxisMask::ALL,
        }
    }

    pub fn with_mask(mut self, mask: AxisMask) -> Self {
        self.mask = mask;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            ErrorKind::FixedMagnitude { epsilon } => {
                if !(epsilon.is_finite() && epsilon >= 0.0) {
                    return Err(Error::InvalidParameter(format!("error magnitude {epsilon} must be >= 0")));
                }
                if epsilon > 0.0 && self.mask.is_empty() {
                    return Err(Error::EmptyAxisMask(epsilon));
                }
            }
            ErrorKind::GaussianPerAxis { sigma } => {
                if sigma.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
                    return Err(Error::InvalidParameter(format!("axis deviations {sigma:?} must be >= 0")));
                }
            }
        }
        Ok(())
    }
}

/// Draws one error vector. Masked-off axes are exactly zero.
pub fn sample_location_error<R: Rng + ?Sized>(model: &ErrorModel, rng: &mut R) -> Result<Vector3> {
    model.validate()?;
    let mask = model.mask.as_array();
    match model.kind {
        ErrorKind::FixedMagnitude { epsilon } => {
            if epsilon == 0.0 {
                return Ok(Vec3::ZERO);
            }
            Ok(random_direction(mask, rng) * epsilon)
        }
        ErrorKind::GaussianPerAxis { sigma } => {
            let mut e = [0.0; 3];
            for k in 0..3 {
                if mask[k] {
                    let z: f64 = rng.sample(StandardNormal);
                    e[k] = sigma[k] * z;
                }
            }
            Ok(Vec3::from(e))
        }
    }
}

/// Uniform direction on the unit sphere of the enabled axes.
fn random_direction<R: Rng + ?Sized>(mask: [bool; 3], rng: &mut R) -> Vector3 {
    let enabled = mask.iter().filter(|b| **b).count();
    if enabled == 1 {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        return Vec3::from(mask.map(|on| if on { sign } else { 0.0 }));
    }
    loop {
        let mut d = [0.0; 3];
        for k in 0..3 {
            if mask[k] {
                d[k] = rng.sample(StandardNormal);
            }
        }
        if let Some(unit) = Vec3::from(d).normalized() {
            return unit;
        }
    }
}

/// Applies one error draw to a true position.
pub fn presumed_position<R: Rng + ?Sized>(truth: Point3, model: &ErrorModel, rng: &mut R) -> Result<Point3> {
    Ok(truth + sample_location_error(model, rng)?)
}

/// Independent RNG for one work item, derived from the run seed and a
/// stream label so results do not depend on execution order.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
