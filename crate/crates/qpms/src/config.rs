//! Run configuration: a flat TOML document whose keys carry their units.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use qpms_core::atmosphere::{build_profile, GddConvention, ProfileConfig, RefractivityModel};
use qpms_core::beam_optics::{BeamGeometry, ReceiverSpec, ReflectorSpec};
use qpms_core::detection::{log_radii, DetectionPipeline, ScenarioConfig};
use qpms_core::radiometry::{flat_background, solar_mean_photon_number, ConventionalLidarParams, SolarBackgroundParams};
use qpms_core::sfg_stats::{default_schmidt_model, SchmidtModel, ThermalScaling};

use crate::io;
use crate::CliError;

/// Every knob of a run. Missing keys take the defaults below, unknown keys
/// are an error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub wavelength_nm: f64,
    pub pulse_width_ps: f64,
    pub spectral_samples: usize,

    pub lowest_layer: usize,
    pub highest_layer: usize,
    pub layer_thickness_km: f64,
    /// Replace the atmosphere by vacuum (identity overlap matrix).
    pub vacuum: bool,
    pub gdd_doubled: bool,

    pub waist_radius_mm: f64,
    pub range_km: f64,
    pub receiver_radius_m: f64,
    pub reflector_radius_um: f64,
    pub reflectivity: f64,
    pub atmospheric_transmissivity: f64,

    pub solar_flux_w_m2_nm: f64,
    pub filter_bandwidth_nm: f64,
    pub field_of_view_sr: f64,
    pub albedo: f64,

    pub conventional_amplitude: f64,
    pub conventional_reflector_radius_um: f64,
    pub delta_alpha_c: f64,
    pub delta_alpha_c_phase_rad: f64,

    pub target_ssmd: f64,
    pub max_alpha_sq: f64,
    pub thermal_eta_scaling: bool,

    /// Schmidt coefficients; the built-in 40-mode profile when absent.
    pub schmidt_file: Option<PathBuf>,

    pub sweep_radius_min_um: f64,
    pub sweep_radius_max_um: f64,
    pub sweep_radius_count: usize,
    pub sweep_delta_alpha_c: Vec<f64>,

    pub kernel_file: Option<PathBuf>,
    pub decompose_basis_size: usize,

    /// Directory that relative file keys resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            wavelength_nm: 1064.0,
            pulse_width_ps: 200.0,
            spectral_samples: 4096,
            lowest_layer: 5,
            highest_layer: 100,
            layer_thickness_km: 1.0,
            vacuum: false,
            gdd_doubled: false,
            waist_radius_mm: 6.77,
            range_km: 695.0,
            receiver_radius_m: 0.5,
            reflector_radius_um: 100.0,
            reflectivity: 0.05,
            atmospheric_transmissivity: 0.856,
            solar_flux_w_m2_nm: 7.49e-10,
            filter_bandwidth_nm: 0.00708,
            field_of_view_sr: 1.33e-8,
            albedo: 0.3,
            conventional_amplitude: 7.66e7,
            conventional_reflector_radius_um: 100.0,
            delta_alpha_c: 0.0,
            delta_alpha_c_phase_rad: 0.0,
            target_ssmd: 2.0,
            max_alpha_sq: DetectionPipeline::DEFAULT_MAX_ALPHA_SQ,
            thermal_eta_scaling: false,
            schmidt_file: None,
            sweep_radius_min_um: 2000.0,
            sweep_radius_max_um: 200_000.0,
            sweep_radius_count: 21,
            sweep_delta_alpha_c: ConventionalLidarParams::DEFAULT_SCATTER_SWEEP.to_vec(),
            kernel_file: None,
            decompose_basis_size: 12,
            base_dir: PathBuf::new(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength_nm / 1e9
    }

    pub fn pulse_width(&self) -> f64 {
        self.pulse_width_ps / 1e12
    }

    pub fn gdd_convention(&self) -> GddConvention {
        if self.gdd_doubled {
            GddConvention::Doubled
        } else {
            GddConvention::AsPrinted
        }
    }

    pub fn thermal_scaling(&self) -> ThermalScaling {
        if self.thermal_eta_scaling {
            ThermalScaling::LossScaled
        } else {
            ThermalScaling::Unscaled
        }
    }

    pub fn schmidt_model(&self) -> Result<SchmidtModel, CliError> {
        match &self.schmidt_file {
            Some(p) => io::read_schmidt_file(&self.resolve(p)),
            None => Ok(default_schmidt_model()),
        }
    }

    pub fn solar(&self) -> SolarBackgroundParams {
        SolarBackgroundParams {
            solar_flux: self.solar_flux_w_m2_nm,
            receiver_area: core::f64::consts::PI * self.receiver_radius_m * self.receiver_radius_m,
            bandwidth_nm: self.filter_bandwidth_nm,
            gate_duration: self.pulse_width(),
            wavelength: self.wavelength(),
            field_of_view: self.field_of_view_sr,
            albedo: self.albedo,
        }
    }

    pub fn sweep_radii(&self) -> Vec<f64> {
        if self.sweep_radius_count == 1 {
            return vec![self.sweep_radius_min_um / 1e6];
        }
        log_radii(self.sweep_radius_min_um / 1e6, self.sweep_radius_max_um / 1e6, self.sweep_radius_count)
    }

    pub fn scenario(&self) -> Result<ScenarioConfig, CliError> {
        let wavelength = self.wavelength();
        let beam = BeamGeometry::new(self.waist_radius_mm / 1e3, wavelength)?;
        let qpms_reflector = ReflectorSpec::new(self.reflector_radius_um / 1e6, self.reflectivity)?;
        let conventional_reflector = ReflectorSpec::new(self.conventional_reflector_radius_um / 1e6, self.reflectivity)?;
        let receiver = ReceiverSpec::new(self.receiver_radius_m)?;
        let profile_cfg = ProfileConfig {
            lowest_layer_index: self.lowest_layer,
            highest_layer_index: self.highest_layer,
            layer_thickness: self.layer_thickness_km * 1e3,
            model: RefractivityModel::STANDARD_AIR,
        };
        let mut atmosphere = build_profile(wavelength, &profile_cfg)?;
        if self.vacuum {
            atmosphere = atmosphere.to_vacuum();
        }
        let schmidt = self.schmidt_model()?;
        let solar = self.solar();
        let background = flat_background(solar_mean_photon_number(&solar)?, schmidt.len())?;
        let mut conventional = ConventionalLidarParams::new(
            Complex64::new(self.conventional_amplitude, 0.0),
            self.delta_alpha_c,
            conventional_reflector.radius,
        )?;
        conventional.scatter_phase = self.delta_alpha_c_phase_rad;
        conventional.pulse_width = self.pulse_width();
        if self.range_km.is_nan() || self.range_km <= 0.0 {
            return Err(CliError::Usage(format!("range_km must be positive, got {}", self.range_km)));
        }
        let s = ScenarioConfig {
            beam,
            qpms_reflector,
            conventional_reflector,
            receiver,
            range: self.range_km * 1e3,
            atmospheric_transmissivity: self.atmospheric_transmissivity,
            atmosphere,
            pulse_width: self.pulse_width(),
            gdd_convention: self.gdd_convention(),
            schmidt,
            background,
            conventional,
            target_ssmd: self.target_ssmd,
            thermal_scaling: self.thermal_scaling(),
            max_alpha_sq: self.max_alpha_sq,
            spectral_samples: self.spectral_samples,
        };
        s.validate()?;
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_defaults_match_the_builtin_ones() {
        let text = include_str!("../config/default.toml");
        assert_eq!(RunConfig::parse(text).unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::parse("wavelength = 1064.0").is_err());
        assert!(RunConfig::parse("wavelength_nm = 1064.0").is_ok());
    }

    #[test]
    fn default_scenario_agrees_with_the_core_default() {
        let ours = RunConfig::default().scenario().unwrap();
        let core = ScenarioConfig::default_scenario().unwrap();
        assert_eq!(ours.beam, core.beam);
        assert_eq!(ours.qpms_reflector, core.qpms_reflector);
        assert_eq!(ours.atmosphere, core.atmosphere);
        assert_eq!(ours.schmidt, core.schmidt);
        for (a, b) in ours.background.iter().zip(&core.background) {
            assert!((a - b).abs() <= 1e-12 * b);
        }
    }
}
