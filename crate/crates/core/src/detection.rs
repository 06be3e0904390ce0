//! SSMD between signal-only and noise-only idler statistics, the minimum
//! signal strength reaching a target SSMD, and reflector-radius sweeps.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent methods shadow it when std is linked
use num_traits::Float;

use crate::atmosphere::{build_profile, AtmosphereProfile, Compensation, GddConvention, OverlapMatrix, OverlapProblem, ProfileConfig};
use crate::beam_optics::{smm_coefficient, BeamGeometry, ReceiverSpec, ReflectorSpec, SmmResult, SmmScenario};
use crate::constants::{angular_frequency, DEFAULT_PULSE_WIDTH, DEFAULT_WAVELENGTH};
use crate::error::{bail, Error, Result};
use crate::hg_modes::{sigma_from_pulse_width, DEFAULT_SAMPLES};
use crate::radiometry::{
    flat_background, link_attenuation, solar_mean_photon_number, ConventionalLidarParams, SolarBackgroundParams,
    DEFAULT_ATMOSPHERIC_TRANSMISSIVITY,
};
use crate::sfg_stats::{default_schmidt_model, noise_state, signal_state, DetectionStats, SchmidtModel, ThermalScaling};

/// Signal pulses occupy this HG order.
pub const SIGNAL_TM_ORDER: usize = 3;
pub const DEFAULT_TARGET_SSMD: f64 = 2.0;
/// Required closeness of the achieved SSMD to the target.
pub const SSMD_TOLERANCE: f64 = 1e-3;
/// Relative bracket width at which bisection stops.
const BRACKET_RESOLUTION: f64 = 1e-13;
/// Points sampled across the final bracket expansion to confirm monotonicity.
const MONOTONICITY_SAMPLES: usize = 16;

/// `(n̄_S − n̄_B)/√(Δn̄_S² + Δn̄_B²)` on the idler totals.
pub fn ssmd(signal: &DetectionStats, noise: &DetectionStats) -> Result<f64> {
    let var = signal.total_variance + noise.total_variance;
    if !(var > 0.0) {
        bail!(UndefinedStatistic, "SSMD is undefined when both variances vanish");
    }
    Ok((signal.total_mean - noise.total_mean) / var.sqrt())
}

/// Everything the solver needs once the optics have been reduced to numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionPipeline {
    /// Overlap column of the signal's HG order.
    pub signal_column: Vec<Complex64>,
    /// Overlap column of the conventional pulse's HG order.
    pub noise_column: Vec<Complex64>,
    pub schmidt: SchmidtModel,
    /// Per-mode thermal background.
    pub background: Vec<f64>,
    pub eta: f64,
    pub eta_c: f64,
    pub alpha_c: Complex64,
    pub scatter: Complex64,
    pub thermal_scaling: ThermalScaling,
    pub target_ssmd: f64,
    /// `|α|²` beyond which the target is declared unreachable.
    pub max_alpha_sq: f64,
}

impl DetectionPipeline {
    pub const DEFAULT_MAX_ALPHA_SQ: f64 = 1e30;

    pub fn noise_stats(&self) -> Result<DetectionStats> {
        let state = noise_state(self.alpha_c, self.scatter, self.eta_c, &self.noise_column, &self.background, self.thermal_scaling)?;
        crate::sfg_stats::convert_state(&state, &self.schmidt)
    }

    pub fn signal_stats(&self, alpha_sq: f64) -> Result<DetectionStats> {
        let state = signal_state(Complex64::new(alpha_sq.sqrt(), 0.0), self.eta, &self.signal_column)?;
        crate::sfg_stats::convert_state(&state, &self.schmidt)
    }

    pub fn ssmd_at(&self, alpha_sq: f64, noise: &DetectionStats) -> Result<f64> {
        ssmd(&self.signal_stats(alpha_sq)?, noise)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinSignal {
    pub alpha_sq: f64,
    /// Idler total mean of the signal-only state at `alpha_sq`.
    pub signal_mean: f64,
    pub ssmd: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
}

/// Smallest `|α|²` at which the SSMD reaches the pipeline's target, by
/// bisection on `log|α|²` after expanding a bracket in factors of 10.
pub fn min_signal_for_target(p: &DetectionPipeline) -> Result<MinSignal> {
    if !(p.target_ssmd > 0.0) {
        bail!(InvalidArgument, "target SSMD must be positive, got {}", p.target_ssmd);
    }
    let noise = p.noise_stats()?;
    let target = p.target_ssmd;
    let f = |x: f64| p.ssmd_at(x, &noise);

    if noise.total_variance > 0.0 && f(0.0)? >= target {
        bail!(InvalidArgument, "SSMD without signal already reaches the target");
    }
    let (mut lo, mut hi) = (1.0, 1.0);
    if f(hi)? < target {
        while f(hi)? < target {
            lo = hi;
            hi *= 10.0;
            if hi > p.max_alpha_sq {
                bail!(NoSolution, "SSMD {target} not reached for |α|² up to {:.1e}", p.max_alpha_sq);
            }
        }
    } else {
        while f(lo)? >= target {
            hi = lo;
            lo /= 10.0;
            if lo < 1e-300 {
                bail!(NoSolution, "SSMD exceeds the target for every resolvable |α|²");
            }
        }
    }
    let bracket = (lo, hi);

    let samples: Vec<(f64, f64)> = (0..MONOTONICITY_SAMPLES)
        .map(|i| {
            let x = lo * (hi / lo).powf(i as f64 / (MONOTONICITY_SAMPLES - 1) as f64);
            f(x).map(|s| (x, s))
        })
        .collect::<Result<_>>()?;
    if samples.windows(2).any(|w| w[1].1 < w[0].1) {
        return Err(Error::NonMonotone { samples });
    }

    let mut iterations = 0;
    while hi / lo - 1.0 > BRACKET_RESOLUTION {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let achieved = f(hi)?;
    if (achieved - target).abs() >= SSMD_TOLERANCE {
        bail!(Precision, "bisection ended at SSMD {achieved}, target {target}");
    }
    Ok(MinSignal { alpha_sq: hi, signal_mean: p.signal_stats(hi)?.total_mean, ssmd: achieved, bracket, iterations })
}

/// Closed form for a Poissonian signal: with `s = Σ λ_n² η |c_n|²`, the
/// signal idler has mean = variance = `s|α|²`, so SSMD = T at
/// `s|α|² = n̄_B + T²/2 + T √(T²/4 + n̄_B + V_B)`.
pub fn closed_form_min_signal(p: &DetectionPipeline) -> Result<f64> {
    let noise = p.noise_stats()?;
    let s: f64 = p
        .schmidt
        .coefficients()
        .iter()
        .zip(&p.signal_column)
        .map(|(l, c)| l * l * p.eta * c.norm_sqr())
        .sum();
    if p.schmidt.mixing().is_some() {
        bail!(InvalidArgument, "closed form assumes the identity mixing");
    }
    if !(s > 0.0) {
        bail!(NoSolution, "signal never reaches the idler");
    }
    let t = p.target_ssmd;
    let m = noise.total_mean + 0.5 * t * t + t * (0.25 * t * t + noise.total_mean + noise.total_variance).sqrt();
    Ok(m / s)
}

// ---------------------------------------------------------------------------
// Scenario and sweep
// ---------------------------------------------------------------------------

/// Full physical scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub beam: BeamGeometry,
    pub qpms_reflector: ReflectorSpec,
    pub conventional_reflector: ReflectorSpec,
    pub receiver: ReceiverSpec,
    /// Transmitter-to-reflector distance, m.
    pub range: f64,
    pub atmospheric_transmissivity: f64,
    pub atmosphere: AtmosphereProfile,
    pub pulse_width: f64,
    pub gdd_convention: GddConvention,
    pub schmidt: SchmidtModel,
    pub background: Vec<f64>,
    pub conventional: ConventionalLidarParams,
    pub target_ssmd: f64,
    pub thermal_scaling: ThermalScaling,
    pub max_alpha_sq: f64,
    /// Spectral grid resolution for the overlap matrix.
    pub spectral_samples: usize,
}

impl ScenarioConfig {
    /// Default scenario at 1064 nm with a 100 µm reflector on both legs.
    pub fn default_scenario() -> Result<Self> {
        let smm = SmmScenario::default();
        let schmidt = default_schmidt_model();
        let solar = SolarBackgroundParams { receiver_area: smm.receiver.area(), ..SolarBackgroundParams::default() };
        let background = flat_background(solar_mean_photon_number(&solar)?, schmidt.len())?;
        Ok(Self {
            beam: smm.beam,
            qpms_reflector: smm.reflector,
            conventional_reflector: ReflectorSpec::new(ConventionalLidarParams::DEFAULT_REFLECTOR_RADIUS, smm.reflector.reflectivity)?,
            receiver: smm.receiver,
            range: smm.range,
            atmospheric_transmissivity: DEFAULT_ATMOSPHERIC_TRANSMISSIVITY,
            atmosphere: build_profile(DEFAULT_WAVELENGTH, &ProfileConfig::default())?,
            pulse_width: DEFAULT_PULSE_WIDTH,
            gdd_convention: GddConvention::AsPrinted,
            schmidt,
            background,
            conventional: ConventionalLidarParams::default(),
            target_ssmd: DEFAULT_TARGET_SSMD,
            thermal_scaling: ThermalScaling::Unscaled,
            max_alpha_sq: DetectionPipeline::DEFAULT_MAX_ALPHA_SQ,
            spectral_samples: DEFAULT_SAMPLES,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.schmidt.len() <= SIGNAL_TM_ORDER {
            bail!(InvalidArgument, "Schmidt model needs more than {SIGNAL_TM_ORDER} modes");
        }
        if self.background.len() != self.schmidt.len() {
            bail!(InvalidArgument, "{} background entries for {} modes", self.background.len(), self.schmidt.len());
        }
        if self.conventional.tm_order != 0 {
            bail!(InvalidArgument, "the conventional pulse must be the fundamental mode");
        }
        if !(self.target_ssmd > 0.0) {
            bail!(InvalidArgument, "target SSMD must be positive");
        }
        if (self.atmosphere.wavelength - self.beam.wavelength).abs() > 1e-6 * self.beam.wavelength {
            bail!(InvalidArgument, "atmosphere profile and beam use different wavelengths");
        }
        Ok(())
    }

    pub fn smm_scenario(&self, reflector: ReflectorSpec) -> SmmScenario {
        SmmScenario { beam: self.beam, reflector, receiver: self.receiver, range: self.range }
    }

    /// Compensated overlap problem for this scenario's basis size.
    pub fn overlap_problem(&self) -> Result<OverlapProblem> {
        let sigma = sigma_from_pulse_width(self.pulse_width, self.beam.wavelength)?;
        OverlapProblem::new(
            &self.atmosphere,
            self.schmidt.len(),
            sigma,
            angular_frequency(self.beam.wavelength),
            Compensation::Compensated(self.gdd_convention),
            self.spectral_samples,
        )
    }
}

/// Link efficiency `C_SMM · T_atm²` for one reflector.
pub fn link_efficiency(scenario: &ScenarioConfig, reflector: ReflectorSpec) -> Result<(SmmResult, f64)> {
    let smm = smm_coefficient(&scenario.smm_scenario(reflector))?;
    let eta = link_attenuation(smm.value, scenario.atmospheric_transmissivity)?.attenuation;
    if !(eta > 0.0) {
        bail!(Precision, "link efficiency underflows to zero for a {:.3e} m reflector", reflector.radius);
    }
    Ok((smm, eta))
}

/// Radius-independent parts of a sweep, computed once.
#[derive(Debug, Clone)]
pub struct SweepContext {
    pub scenario: ScenarioConfig,
    pub overlap: OverlapMatrix,
    pub conventional_smm: SmmResult,
    pub eta_c: f64,
}

impl SweepContext {
    pub fn new(scenario: &ScenarioConfig) -> Result<Self> {
        let problem = scenario.overlap_problem()?;
        Self::with_overlap(scenario, problem.solve()?)
    }

    /// Reuses an overlap matrix computed elsewhere (e.g. column-parallel).
    pub fn with_overlap(scenario: &ScenarioConfig, overlap: OverlapMatrix) -> Result<Self> {
        scenario.validate()?;
        if overlap.size() != scenario.schmidt.len() {
            bail!(InvalidArgument, "overlap matrix size {} does not match the Schmidt model", overlap.size());
        }
        let (conventional_smm, eta_c) = link_efficiency(scenario, scenario.conventional_reflector)?;
        Ok(Self { scenario: scenario.clone(), overlap, conventional_smm, eta_c })
    }

    pub fn pipeline(&self, eta: f64, scatter: f64) -> DetectionPipeline {
        let s = &self.scenario;
        DetectionPipeline {
            signal_column: self.overlap.column(SIGNAL_TM_ORDER).to_vec(),
            noise_column: self.overlap.column(s.conventional.tm_order).to_vec(),
            schmidt: s.schmidt.clone(),
            background: s.background.clone(),
            eta,
            eta_c: self.eta_c,
            alpha_c: s.conventional.amplitude,
            scatter: s.conventional.scatter_amplitude(scatter),
            thermal_scaling: s.thermal_scaling,
            target_ssmd: s.target_ssmd,
            max_alpha_sq: s.max_alpha_sq,
        }
    }

    /// Solves every δα_c for one radius; the link efficiency is computed once.
    pub fn rows_for_radius(&self, radius: f64, scatters: &[f64]) -> Vec<SweepRow> {
        let eta = ReflectorSpec::new(radius, self.scenario.qpms_reflector.reflectivity)
            .and_then(|r| link_efficiency(&self.scenario, r));
        scatters
            .iter()
            .map(|&scatter| {
                let outcome = match &eta {
                    Ok((_, eta)) => min_signal_for_target(&self.pipeline(*eta, scatter)),
                    Err(e) => Err(e.clone()),
                };
                SweepRow::new(radius, scatter, self.scenario.conventional.amplitude.norm_sqr(), outcome)
            })
            .collect()
    }

    /// Sequential sweep; rows ordered by radius, then δα_c.
    pub fn run(&self, radii: &[f64], scatters: &[f64]) -> Result<SweepResult> {
        check_radii(radii)?;
        Ok(SweepResult { rows: radii.iter().flat_map(|&r| self.rows_for_radius(r, scatters)).collect() })
    }
}

pub fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0)) || radii.windows(2).any(|w| !(w[1] > w[0])) {
        bail!(InvalidArgument, "radii must be positive and strictly ascending");
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub radius: f64,
    pub delta_alpha_c: f64,
    /// `|α|²`, NaN when the row failed.
    pub alpha_sq: f64,
    /// `|α|² / |α_c|²`.
    pub ratio: f64,
    pub ssmd: f64,
    pub converged: bool,
    pub error: Option<String>,
}

impl SweepRow {
    fn new(radius: f64, delta_alpha_c: f64, alpha_c_sq: f64, outcome: Result<MinSignal>) -> Self {
        match outcome {
            Ok(m) => Self {
                radius,
                delta_alpha_c,
                alpha_sq: m.alpha_sq,
                ratio: m.alpha_sq / alpha_c_sq,
                ssmd: m.ssmd,
                converged: true,
                error: None,
            },
            Err(e) => Self {
                radius,
                delta_alpha_c,
                alpha_sq: f64::NAN,
                ratio: f64::NAN,
                ssmd: f64::NAN,
                converged: false,
                error: Some(format!("{e}")),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Converged rows for one δα_c, in radius order.
    pub fn curve(&self, delta_alpha_c: f64) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| r.delta_alpha_c == delta_alpha_c && r.converged).collect()
    }

    /// Radius at which the ratio first drops to 1 or below (log-linear
    /// interpolation between the bracketing rows).
    pub fn crossing_radius(&self, delta_alpha_c: f64) -> Option<f64> {
        let curve = self.curve(delta_alpha_c);
        curve.windows(2).find(|w| w[0].ratio > 1.0 && w[1].ratio <= 1.0).map(|w| {
            let (r0, r1) = (w[0].radius.ln(), w[1].radius.ln());
            let (q0, q1) = (w[0].ratio.ln(), w[1].ratio.ln());
            (r0 + (0.0 - q0) * (r1 - r0) / (q1 - q0)).exp()
        })
    }
}

/// `n` log-spaced radii from `lo` to `hi`.
pub fn log_radii(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return alloc::vec![lo];
    }
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize, j: usize) -> Vec<Complex64> {
        (0..n).map(|k| Complex64::new(if k == j { 1.0 } else { 0.0 }, 0.0)).collect()
    }

    fn ideal(eta: f64) -> DetectionPipeline {
        let mut c = alloc::vec![0.0; 8];
        c[3] = 1.0;
        DetectionPipeline {
            signal_column: unit(8, 3),
            noise_column: unit(8, 0),
            schmidt: SchmidtModel::new(c).unwrap(),
            background: alloc::vec![0.0; 8],
            eta,
            eta_c: 1.0,
            alpha_c: Complex64::new(0.0, 0.0),
            scatter: Complex64::new(0.0, 0.0),
            thermal_scaling: ThermalScaling::Unscaled,
            target_ssmd: 2.0,
            max_alpha_sq: DetectionPipeline::DEFAULT_MAX_ALPHA_SQ,
        }
    }

    #[test]
    fn ssmd_basics() {
        let s = DetectionStats { per_mode_mean: alloc::vec![4.0], per_mode_variance: alloc::vec![4.0], total_mean: 4.0, total_variance: 4.0 };
        let quiet = DetectionStats { per_mode_mean: alloc::vec![0.0], per_mode_variance: alloc::vec![1e-30], total_mean: 0.0, total_variance: 1e-30 };
        assert!((ssmd(&s, &quiet).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(ssmd(&s, &s).unwrap(), 0.0);
        let dead = DetectionStats { per_mode_mean: alloc::vec![0.0], per_mode_variance: alloc::vec![0.0], total_mean: 0.0, total_variance: 0.0 };
        assert!(matches!(ssmd(&dead, &dead), Err(Error::UndefinedStatistic(_))));
    }

    #[test]
    fn zero_noise_analytic_solutions() {
        let m = min_signal_for_target(&ideal(1.0)).unwrap();
        assert!((m.alpha_sq - 4.0).abs() < 1e-6, "{}", m.alpha_sq);
        assert!((m.signal_mean - 4.0).abs() < 1e-6);
        let m = min_signal_for_target(&ideal(0.25)).unwrap();
        assert!((m.alpha_sq - 16.0).abs() < 1e-6);
        assert!((m.signal_mean - 4.0).abs() < 1e-6);
    }

    #[test]
    fn solver_matches_closed_form_with_noise() {
        let mut p = ideal(0.3);
        p.background = alloc::vec![0.01; 8];
        p.scatter = Complex64::new(0.2, 0.0);
        p.alpha_c = Complex64::new(1.5, 0.0);
        p.eta_c = 0.4;
        p.schmidt = default_schmidt_model_small();
        let exact = closed_form_min_signal(&p).unwrap();
        let solved = min_signal_for_target(&p).unwrap();
        assert!((solved.alpha_sq - exact).abs() / exact < 1e-9);
        assert!((solved.ssmd - 2.0).abs() < 1e-9);
    }

    fn default_schmidt_model_small() -> SchmidtModel {
        SchmidtModel::new(alloc::vec![0.014, 0.014, 0.07, 0.7, 0.07, 0.014, 0.014, 0.0]).unwrap()
    }

    #[test]
    fn unreachable_target_is_no_solution() {
        let mut p = ideal(1.0);
        p.max_alpha_sq = 1.0;
        assert!(matches!(min_signal_for_target(&p), Err(Error::NoSolution(_))));
    }
}
