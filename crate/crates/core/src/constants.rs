//! Physical constants (SI, exact CODATA values) and model defaults shared
//! across modules.

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Number of Hermite-Gaussian temporal modes kept in every truncated basis.
pub const DEFAULT_MODE_COUNT: usize = 40;

/// Working wavelength of both the signal and the conventional LIDAR, m.
pub const DEFAULT_WAVELENGTH: f64 = 1064e-9;

/// Transform-limited pulse width of the TM(0) pulse, s.
pub const DEFAULT_PULSE_WIDTH: f64 = 200e-12;

/// Angular carrier frequency for a vacuum wavelength.
pub fn angular_frequency(wavelength: f64) -> f64 {
    2.0 * core::f64::consts::PI * SPEED_OF_LIGHT / wavelength
}
