//! TDD frame accounting: pilot and control overhead per beamforming scheme
//! and the data rate left after it.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrameScheme {
    /// Pilots only for localization on the enabled RISs, independent of
    /// the element count.
    LocationDriven,
    /// Cascaded channel estimation with one pilot per element.
    CePerElement,
    /// Parametric estimation with one pilot per propagation path.
    CeParametric,
}

impl FrameScheme {
    pub const ALL: [FrameScheme; 3] = [
        FrameScheme::LocationDriven,
        FrameScheme::CePerElement,
        FrameScheme::CeParametric,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            FrameScheme::LocationDriven => "location-driven",
            FrameScheme::CePerElement => "ce-per-element",
            FrameScheme::CeParametric => "ce-parametric",
        }
    }
}

impl fmt::Display for FrameScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FrameScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown frame scheme '{s}'")))
    }
}

/// One TDD frame: uplink pilots, control signalling, then data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameModel {
    pub frame_length: u64,
    /// Symbols per pilot; the per-element and per-path unit as well.
    pub uplink_pilot_cost: u64,
    pub control_cost: u64,
    pub scheme: FrameScheme,
    pub num_ris: u64,
    pub elements_per_ris: u64,
    pub paths_per_ris: u64,
    /// Share of RISs enabled for localization, in `(0, 1]`.
    pub enabled_ris_fraction: f64,
    /// Whether the localization method needs uplink pilots at all.
    pub pilots_required: bool,
}

impl Default for FrameModel {
    fn default() -> Self {
        Self {
            frame_length: 10_000,
            uplink_pilot_cost: 1,
            control_cost: 10,
            scheme: FrameScheme::LocationDriven,
            num_ris: 1,
            elements_per_ris: 6400,
            paths_per_ris: 3,
            enabled_ris_fraction: 1.0,
            pilots_required: true,
        }
    }
}

impl FrameModel {
    pub fn with_scheme(mut self, scheme: FrameScheme) -> Self {
        self.scheme = scheme;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.frame_length == 0 {
            return Err(Error::InvalidParameter("frame length must be positive".into()));
        }
        if self.num_ris == 0 {
            return Err(Error::InvalidParameter("at least one RIS is required".into()));
        }
        let f = self.enabled_ris_fraction;
        if !(f > 0.0 && f <= 1.0) {
            return Err(Error::InvalidParameter(format!("enabled RIS fraction {f} outside (0, 1]")));
        }
        Ok(())
    }

    /// Number of RISs taking part in localization.
    pub fn enabled_ris(&self) -> u64 {
        // Shave a few ulps so that e.g. 3 × (1/3) counts as one RIS.
        let raw = self.num_ris as f64 * self.enabled_ris_fraction;
        ((raw * (1.0 - 1e-12)).ceil() as u64).clamp(1, self.num_ris)
    }
}

/// Pilot plus control symbols the scheme asks for, whether or not they fit
/// in the frame.
pub fn required_overhead(model: &FrameModel) -> Result<u64> {
    model.validate()?;
    let pilots = match model.scheme {
        FrameScheme::LocationDriven => {
            if model.pilots_required {
                model.uplink_pilot_cost * model.enabled_ris()
            } else {
                0
            }
        }
        FrameScheme::CePerElement => model.num_ris * model.elements_per_ris * model.uplink_pilot_cost,
        FrameScheme::CeParametric => model.num_ris * model.paths_per_ris * model.uplink_pilot_cost,
    };
    Ok(pilots + model.control_cost)
}

pub fn overhead_symbols(model: &FrameModel) -> Result<u64> {
    let overhead = required_overhead(model)?;
    if overhead > model.frame_length {
        return Err(Error::OverheadExceedsFrame {
            overhead,
            frame_length: model.frame_length,
        });
    }
    Ok(overhead)
}

/// Spectral efficiency scaled by the data share of the frame.
pub fn effective_rate(se: f64, model: &FrameModel) -> Result<f64> {
    let overhead = overhead_symbols(model)?;
    Ok(se * (model.frame_length - overhead) as f64 / model.frame_length as f64)
}

/// Smallest element count in `1..=n_max` at which location-driven operation
/// (spectral efficiency `se_location`) out-delivers per-element channel
/// estimation (`se_csi`) on `base`. Counts where the per-element overhead
/// no longer fits the frame count as a location-driven win.
pub fn location_driven_crossover(se_location: f64, se_csi: f64, base: &FrameModel, n_max: u64) -> Result<Option<u64>> {
    let loc = effective_rate(se_location, &base.with_scheme(FrameScheme::LocationDriven))?;
    for n in 1..=n_max {
        let ce_model = FrameModel {
            elements_per_ris: n,
            scheme: FrameScheme::CePerElement,
            ..*base
        };
        let ce = match effective_rate(se_csi, &ce_model) {
            Ok(rate) => rate,
            Err(Error::OverheadExceedsFrame { .. }) => 0.0,
            Err(e) => return Err(e),
        };
        if loc > ce {
            return Ok(Some(n));
        }
    }
    Ok(None)
}
