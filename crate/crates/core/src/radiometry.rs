//! Solar background photon numbers, link attenuation and the conventional
//! LIDAR parameters.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::constants::{DEFAULT_PULSE_WIDTH, DEFAULT_WAVELENGTH, PLANCK, SPEED_OF_LIGHT};
use crate::error::{bail, Result};

/// One-way atmospheric transmissivity at 1064 nm.
pub const DEFAULT_ATMOSPHERIC_TRANSMISSIVITY: f64 = 0.856;

/// Inputs of the solar background estimate. Wavelengths in metres, the
/// filter bandwidth in nanometres to match the flux unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolarBackgroundParams {
    /// Spectral radiant flux at the receiver, W m⁻² nm⁻¹.
    pub solar_flux: f64,
    /// Receiver area, m².
    pub receiver_area: f64,
    /// Detection bandwidth, nm.
    pub bandwidth_nm: f64,
    /// Detection gate, s.
    pub gate_duration: f64,
    pub wavelength: f64,
    /// Carried for reference; already folded into `solar_flux`.
    pub field_of_view: f64,
    /// Carried for reference; already folded into `solar_flux`.
    pub albedo: f64,
}

impl Default for SolarBackgroundParams {
    fn default() -> Self {
        Self {
            solar_flux: 7.49e-10,
            receiver_area: core::f64::consts::PI * 0.25,
            bandwidth_nm: 0.00708,
            gate_duration: DEFAULT_PULSE_WIDTH,
            wavelength: DEFAULT_WAVELENGTH,
            field_of_view: 1.33e-8,
            albedo: 0.3,
        }
    }
}

impl SolarBackgroundParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("solar_flux", self.solar_flux),
            ("bandwidth", self.bandwidth_nm),
            ("gate_duration", self.gate_duration),
            ("wavelength", self.wavelength),
            ("field_of_view", self.field_of_view),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                bail!(InvalidArgument, "{name} must be positive, got {v}");
            }
        }
        if !(self.receiver_area >= 0.0) {
            bail!(InvalidArgument, "receiver area must be non-negative, got {}", self.receiver_area);
        }
        if !(0.0..=1.0).contains(&self.albedo) {
            bail!(InvalidArgument, "albedo must lie in [0, 1], got {}", self.albedo);
        }
        Ok(())
    }
}

/// `n̄_B = (λ N_λ / (h c)) · A · Δλ · T`.
pub fn solar_mean_photon_number(p: &SolarBackgroundParams) -> Result<f64> {
    p.validate()?;
    let photon_rate_per_watt = p.wavelength / (PLANCK * SPEED_OF_LIGHT);
    Ok(photon_rate_per_watt * p.solar_flux * p.receiver_area * p.bandwidth_nm * p.gate_duration)
}

/// Background spread evenly over `modes` temporal modes.
pub fn per_mode_background(total: f64, modes: usize) -> Result<f64> {
    if modes == 0 {
        bail!(InvalidArgument, "mode count must be at least 1");
    }
    if !(total >= 0.0) {
        bail!(InvalidArgument, "background photon number must be non-negative, got {total}");
    }
    Ok(total / modes as f64)
}

/// Per-mode thermal occupations for a flat background over `modes` modes.
pub fn flat_background(total: f64, modes: usize) -> Result<Vec<f64>> {
    let each = per_mode_background(total, modes)?;
    Ok(alloc::vec![each; modes])
}

/// Spatial coupling and round-trip transmission combined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub smm: f64,
    pub atmospheric_transmissivity: f64,
    /// `smm · T_atm²`.
    pub attenuation: f64,
}

pub fn link_attenuation(smm: f64, atmospheric_transmissivity: f64) -> Result<LinkBudget> {
    if !(0.0..=1.0).contains(&smm) {
        bail!(InvalidArgument, "spatial coupling must lie in [0, 1], got {smm}");
    }
    if !(atmospheric_transmissivity > 0.0 && atmospheric_transmissivity <= 1.0) {
        bail!(InvalidArgument, "transmissivity must lie in (0, 1], got {atmospheric_transmissivity}");
    }
    Ok(LinkBudget {
        smm,
        atmospheric_transmissivity,
        attenuation: smm * atmospheric_transmissivity * atmospheric_transmissivity,
    })
}

/// The co-located conventional LIDAR whose return leaks into the detection
/// window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConventionalLidarParams {
    pub amplitude: Complex64,
    /// Magnitude of the multiply-scattered amplitude added to every
    /// temporal mode.
    pub multiple_scatter: f64,
    /// Its phase, rad.
    pub scatter_phase: f64,
    /// Always 0: the conventional pulse is the fundamental mode.
    pub tm_order: usize,
    pub reflector_radius: f64,
    pub pulse_width: f64,
}

impl ConventionalLidarParams {
    pub const DEFAULT_AMPLITUDE: f64 = 7.66e7;
    pub const DEFAULT_REFLECTOR_RADIUS: f64 = 100e-6;
    pub const DEFAULT_SCATTER_SWEEP: [f64; 4] = [0.0, 10.0, 100.0, 1000.0];

    pub fn new(amplitude: Complex64, multiple_scatter: f64, reflector_radius: f64) -> Result<Self> {
        if !(reflector_radius > 0.0) {
            bail!(InvalidArgument, "conventional reflector radius must be positive");
        }
        if !(multiple_scatter >= 0.0) {
            bail!(InvalidArgument, "multiple-scattering magnitude must be non-negative");
        }
        Ok(Self { amplitude, multiple_scatter, scatter_phase: 0.0, tm_order: 0, reflector_radius, pulse_width: DEFAULT_PULSE_WIDTH })
    }

    pub fn with_scatter(&self, multiple_scatter: f64) -> Self {
        Self { multiple_scatter, ..*self }
    }

    /// Complex amplitude for a given magnitude at the configured phase.
    pub fn scatter_amplitude(&self, magnitude: f64) -> Complex64 {
        Complex64::from_polar(magnitude, self.scatter_phase)
    }
}

impl Default for ConventionalLidarParams {
    fn default() -> Self {
        Self {
            amplitude: Complex64::new(Self::DEFAULT_AMPLITUDE, 0.0),
            multiple_scatter: 0.0,
            scatter_phase: 0.0,
            tm_order: 0,
            reflector_radius: Self::DEFAULT_REFLECTOR_RADIUS,
            pulse_width: DEFAULT_PULSE_WIDTH,
        }
    }
}
