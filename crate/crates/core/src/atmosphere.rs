//! Layered dispersive atmosphere and its action on temporal modes.
//!
//! The atmosphere between `lowest_layer_index` and `highest_layer_index` is
//! split into 1 km layers. Each layer carries the refractive index evaluated
//! at its mid-altitude:
//!
//! ```text
//! n(λ, h) − 1 = A(λ) · ρ(h) / ρ_ref,    A(λ) = a · (1 + b/λ²)
//! ```
//!
//! with a two-term Cauchy fit for standard air at 0 °C and 101 325 Pa and the
//! 1976 U.S. Standard Atmosphere density profile. Because the Cauchy term is
//! quadratic in ω, the accumulated double-pass phase `2 Σ k_q(ω) L_q` is an
//! exact cubic in `Δω = ω − ω0`, so group delay, GDD and the residual cubic
//! term come out analytically without grid differentiation.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent methods shadow it when std is linked
use num_traits::Float;

use crate::constants::{angular_frequency, SPEED_OF_LIGHT};
use crate::error::{bail, Result};
use crate::hg_modes::{hg_family, overlap_unchecked, SampledAmplitude, UniformGrid, DEFAULT_SAMPLES};

/// Column-norm deviation beyond which an overlap matrix is rejected.
const UNITARITY_LIMIT: f64 = 1e-4;

// ---------------------------------------------------------------------------
// Standard atmosphere
// ---------------------------------------------------------------------------

const EARTH_RADIUS: f64 = 6_356_766.0;
const G0: f64 = 9.806_65;
const MOLAR_MASS_AIR: f64 = 0.028_964_4;
const GAS_CONSTANT: f64 = 8.314_32;
const SEA_LEVEL_PRESSURE: f64 = 101_325.0;

/// (base geopotential height m, base temperature K, lapse rate K/m)
const USSA_LAYERS: [(f64, f64, f64); 7] = [
    (0.0, 288.15, -0.0065),
    (11_000.0, 216.65, 0.0),
    (20_000.0, 216.65, 0.001),
    (32_000.0, 228.65, 0.0028),
    (47_000.0, 270.65, 0.0),
    (51_000.0, 270.65, -0.0028),
    (71_000.0, 214.65, -0.002),
];
const USSA_TOP_GEOPOTENTIAL: f64 = 84_852.0;
const USSA_TOP_GEOMETRIC: f64 = 86_000.0;
/// Tabulated 1976 standard density at 100 km, kg/m³.
const DENSITY_100KM: f64 = 5.604e-7;

/// Air density (kg/m³) of the 1976 U.S. Standard Atmosphere at a geometric
/// altitude. Below 86 km this is the hydrostatic piecewise-lapse model; above
/// it, an exponential joined continuously at 86 km and passing through the
/// tabulated 100 km density.
pub fn standard_density(altitude: f64) -> f64 {
    if altitude > USSA_TOP_GEOMETRIC {
        let rho_top = lapse_density(USSA_TOP_GEOPOTENTIAL);
        let scale = (100_000.0 - USSA_TOP_GEOMETRIC) / (rho_top / DENSITY_100KM).ln();
        return rho_top * (-(altitude - USSA_TOP_GEOMETRIC) / scale).exp();
    }
    let geopotential = EARTH_RADIUS * altitude / (EARTH_RADIUS + altitude);
    lapse_density(geopotential)
}

fn lapse_density(geopotential: f64) -> f64 {
    let k = G0 * MOLAR_MASS_AIR / GAS_CONSTANT;
    let mut pressure = SEA_LEVEL_PRESSURE;
    for (i, &(base, t_base, lapse)) in USSA_LAYERS.iter().enumerate() {
        let top = USSA_LAYERS.get(i + 1).map_or(f64::INFINITY, |l| l.0);
        let h = geopotential.min(top) - base;
        let temperature = t_base + lapse * h;
        pressure *= if lapse == 0.0 {
            (-k * h / t_base).exp()
        } else {
            (t_base / temperature).powf(k / lapse)
        };
        if geopotential <= top {
            return pressure * MOLAR_MASS_AIR / (GAS_CONSTANT * temperature);
        }
    }
    unreachable!("last layer is unbounded")
}

// ---------------------------------------------------------------------------
// Refractivity
// ---------------------------------------------------------------------------

/// Two-term Cauchy refractivity `(n − 1) = a·(1 + b/λ²)` at a reference
/// density; scaled linearly with density elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefractivityModel {
    pub a: f64,
    /// Dispersion coefficient, m².
    pub b: f64,
    /// Density the coefficients refer to, kg/m³.
    pub reference_density: f64,
}

impl RefractivityModel {
    /// Standard dry air at 0 °C and 101 325 Pa: a = 2.879e-4, b = 5.67e-3 µm².
    pub const STANDARD_AIR: Self = Self { a: 2.879e-4, b: 5.67e-15, reference_density: 1.292_27 };

    /// Valid wavelength range of the fit, m.
    pub const VALID_RANGE: (f64, f64) = (0.4e-6, 2.0e-6);

    /// `n − 1` at the given wavelength and density.
    pub fn refractivity(&self, wavelength: f64, density: f64) -> f64 {
        self.a * (1.0 + self.b / (wavelength * wavelength)) * density / self.reference_density
    }
}

// ---------------------------------------------------------------------------
// Profile
// ---------------------------------------------------------------------------

/// Parameters for [`build_profile`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileConfig {
    pub lowest_layer_index: usize,
    pub highest_layer_index: usize,
    /// Layer thickness `L_q`, m.
    pub layer_thickness: f64,
    pub model: RefractivityModel,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self {
            lowest_layer_index: 5,
            highest_layer_index: 100,
            layer_thickness: 1000.0,
            model: RefractivityModel::STANDARD_AIR,
        }
    }
}

/// One atmospheric layer. Layer `q` spans `[(q−1)·L, q·L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layer {
    pub index: usize,
    pub base_altitude: f64,
    pub thickness: f64,
    /// ρ(mid-altitude) / ρ_ref.
    pub density_ratio: f64,
}

impl Layer {
    pub fn mid_altitude(&self) -> f64 {
        self.base_altitude + 0.5 * self.thickness
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtmosphereProfile {
    pub wavelength: f64,
    pub layers: Vec<Layer>,
    pub model: RefractivityModel,
}

impl AtmosphereProfile {
    /// Mean refractive index of one layer at `wavelength`.
    pub fn refractive_index(&self, layer: &Layer, wavelength: f64) -> f64 {
        1.0 + self.model.refractivity(wavelength, layer.density_ratio * self.model.reference_density)
    }

    /// Same geometry with every index equal to one.
    pub fn to_vacuum(&self) -> Self {
        let layers = self.layers.iter().map(|l| Layer { density_ratio: 0.0, ..*l }).collect();
        Self { wavelength: self.wavelength, layers, model: self.model }
    }

    pub fn total_thickness(&self) -> f64 {
        self.layers.iter().map(|l| l.thickness).sum()
    }

    /// FNV-1a over the layer data; identifies the profile in exported metadata.
    pub fn fingerprint(&self) -> u64 {
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |x: u64| {
            for byte in x.to_le_bytes() {
                hash ^= u64::from(byte);
                hash = hash.wrapping_mul(0x0100_0000_01b3);
            }
        };
        eat(self.wavelength.to_bits());
        eat(self.model.a.to_bits());
        eat(self.model.b.to_bits());
        for l in &self.layers {
            eat(l.index as u64);
            eat(l.base_altitude.to_bits());
            eat(l.thickness.to_bits());
            eat(l.density_ratio.to_bits());
        }
        hash
    }
}

/// Builds the layered profile for `wavelength`.
pub fn build_profile(wavelength: f64, config: &ProfileConfig) -> Result<AtmosphereProfile> {
    let (lo, hi) = RefractivityModel::VALID_RANGE;
    if !(lo..=hi).contains(&wavelength) {
        bail!(
            InvalidArgument,
            "wavelength {:.1} nm is outside the refractivity fit range 400–2000 nm",
            wavelength * 1e9
        );
    }
    if config.lowest_layer_index == 0 || config.highest_layer_index < config.lowest_layer_index {
        bail!(
            InvalidArgument,
            "layer indices must satisfy 1 ≤ lowest ≤ highest, got {}..{}",
            config.lowest_layer_index,
            config.highest_layer_index
        );
    }
    if !(config.layer_thickness > 0.0) {
        bail!(InvalidArgument, "layer thickness must be positive");
    }
    let layers = (config.lowest_layer_index..=config.highest_layer_index)
        .map(|q| {
            let base = (q - 1) as f64 * config.layer_thickness;
            let mid = base + 0.5 * config.layer_thickness;
            Layer {
                index: q,
                base_altitude: base,
                thickness: config.layer_thickness,
                density_ratio: standard_density(mid) / config.model.reference_density,
            }
        })
        .collect();
    Ok(AtmosphereProfile { wavelength, layers, model: config.model })
}

// ---------------------------------------------------------------------------
// Spectral phase
// ---------------------------------------------------------------------------

/// Cubic phase `c0 + c1·Δ + c2·Δ² + c3·Δ³` in `Δ = ω − ω0`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpectralPhase {
    /// Constant term reduced to `[0, 2π)`.
    pub constant: f64,
    /// Group delay, s.
    pub linear: f64,
    /// Half the GDD, s².
    pub quadratic: f64,
    /// One sixth of the third-order dispersion, s³.
    pub cubic: f64,
}

impl SpectralPhase {
    pub fn eval(&self, d: f64) -> f64 {
        self.constant + d * (self.linear + d * (self.quadratic + d * self.cubic))
    }

    /// The accumulated double-pass phase `2 Σ_q k_q(ω) L_q` expanded about `omega0`.
    pub fn double_pass(profile: &AtmosphereProfile, omega0: f64) -> Self {
        let m = &profile.model;
        // n_q − 1 = α_q (1 + β ω²),  β = b/(2πc)²
        let beta = m.b / (2.0 * PI * SPEED_OF_LIGHT).powi(2);
        let (mut s1, mut s3) = (0.0, 0.0);
        for layer in &profile.layers {
            let alpha = m.a * layer.density_ratio;
            s1 += layer.thickness * (1.0 + alpha);
            s3 += layer.thickness * alpha * beta;
        }
        let scale = 2.0 / SPEED_OF_LIGHT;
        let constant = scale * (s1 * omega0 + s3 * omega0.powi(3));
        Self {
            constant: constant - (constant / (2.0 * PI)).floor() * 2.0 * PI,
            linear: scale * (s1 + 3.0 * s3 * omega0 * omega0),
            quadratic: scale * 3.0 * s3 * omega0,
            cubic: scale * s3,
        }
    }

    /// Group delay dispersion `d²Φ/dω²` at ω0, s².
    pub fn gdd(&self) -> f64 {
        2.0 * self.quadratic
    }
}

/// How the second-order compensation term is weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GddConvention {
    /// `(ω−ω0)² Σ k''_q L_q`: exactly the second-order Taylor term of the
    /// double-pass phase, so GDD is fully removed.
    #[default]
    AsPrinted,
    /// `(ω−ω0)² Σ k''_q 2L_q`: over-compensates by the same amount again.
    Doubled,
}

impl GddConvention {
    fn factor(self) -> f64 {
        match self {
            GddConvention::AsPrinted => 1.0,
            GddConvention::Doubled => 2.0,
        }
    }
}

/// Multiplies a spectral amplitude by `exp(−i·2 Σ_q k_q(ω) L_q)`, the full
/// double-pass propagation phase about the grid centre.
pub fn apply_double_pass_dispersion(mode: &SampledAmplitude, profile: &AtmosphereProfile) -> SampledAmplitude {
    let phase = SpectralPhase::double_pass(profile, mode.grid.center());
    mode.with_phase(|d| -phase.eval(d))
}

/// Removes group delay and (per `convention`) group delay dispersion about
/// `center`: multiplies by `exp(+i(Δ·GD + Δ²·g·Σk''L))`.
pub fn compensate(
    mode: &SampledAmplitude,
    profile: &AtmosphereProfile,
    center: f64,
    convention: GddConvention,
) -> SampledAmplitude {
    let phase = SpectralPhase::double_pass(profile, center);
    let shift = mode.grid.center() - center;
    let g = convention.factor();
    mode.with_phase(|d| {
        let d = d + shift;
        d * phase.linear + g * d * d * phase.quadratic
    })
}

/// Whether the overlap matrix sees the compensated amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Compensation {
    /// Dispersed amplitude in the frame of the pulse's group arrival: the
    /// constant phase and the group delay are a pure shift of the detection
    /// window, everything from GDD upward is kept.
    Uncompensated,
    /// Group delay and GDD removed per the given convention.
    Compensated(GddConvention),
}

impl Compensation {
    /// Phase left on the amplitude after the (possibly absent) compensation,
    /// with the constant and group-delay terms dropped.
    pub fn residual(self, full: &SpectralPhase) -> SpectralPhase {
        let removed = match self {
            Compensation::Uncompensated => 0.0,
            Compensation::Compensated(c) => c.factor(),
        };
        SpectralPhase {
            constant: 0.0,
            linear: 0.0,
            quadratic: (1.0 - removed) * full.quadratic,
            cubic: full.cubic,
        }
    }

    pub fn is_compensated(self) -> bool {
        matches!(self, Compensation::Compensated(_))
    }
}

// ---------------------------------------------------------------------------
// Overlap matrix
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapMetadata {
    pub profile_fingerprint: u64,
    pub sigma: f64,
    pub omega0: f64,
    pub samples: usize,
}

/// `c_{k,j} = (1/2π)∫ f_k*(ω) f̃_j(ω) dω` for `k, j < n`.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapMatrix {
    n: usize,
    /// Column-major: entry (k, j) at `j·n + k`.
    entries: Vec<Complex64>,
    pub compensation: Compensation,
    pub metadata: OverlapMetadata,
}

impl OverlapMatrix {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, k: usize, j: usize) -> Complex64 {
        self.entries[j * self.n + k]
    }

    pub fn column(&self, j: usize) -> &[Complex64] {
        &self.entries[j * self.n..(j + 1) * self.n]
    }

    pub fn compensated(&self) -> bool {
        self.compensation.is_compensated()
    }

    /// `Σ_k |c_{k,j}|²` for every column.
    pub fn column_norms(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.column(j).iter().map(|c| c.norm_sqr()).sum()).collect()
    }

    /// Largest `|c_{k,j}|²` with `k ≠ j`.
    pub fn max_off_diagonal(&self) -> f64 {
        let mut best = 0.0f64;
        for j in 0..self.n {
            for k in (0..self.n).filter(|&k| k != j) {
                best = best.max(self.get(k, j).norm_sqr());
            }
        }
        best
    }
}

/// Shared state for computing overlap-matrix columns independently.
pub struct OverlapProblem {
    family: Vec<SampledAmplitude>,
    residual: SpectralPhase,
    pub compensation: Compensation,
    pub metadata: OverlapMetadata,
}

impl OverlapProblem {
    pub fn new(
        profile: &AtmosphereProfile,
        n: usize,
        sigma: f64,
        omega0: f64,
        compensation: Compensation,
        samples: usize,
    ) -> Result<Self> {
        let full = SpectralPhase::double_pass(profile, omega0);
        let mut problem = Self::with_phase(n, sigma, omega0, compensation.residual(&full), samples)?;
        problem.compensation = compensation;
        problem.metadata.profile_fingerprint = profile.fingerprint();
        Ok(problem)
    }

    /// Problem for an arbitrary residual spectral phase.
    pub fn with_phase(n: usize, sigma: f64, omega0: f64, residual: SpectralPhase, samples: usize) -> Result<Self> {
        if n == 0 {
            bail!(InvalidArgument, "overlap matrix needs at least one mode");
        }
        let grid = UniformGrid::for_orders(omega0, sigma, n - 1, samples)?;
        let family = hg_family(omega0, sigma, n, &grid)?;
        Ok(Self {
            family,
            residual,
            compensation: Compensation::Uncompensated,
            metadata: OverlapMetadata { profile_fingerprint: 0, sigma, omega0, samples },
        })
    }

    pub fn size(&self) -> usize {
        self.family.len()
    }

    /// Column `j`: overlaps of every `f_k` with the propagated `f_j`.
    pub fn column(&self, j: usize) -> Vec<Complex64> {
        let residual = self.residual;
        let propagated = self.family[j].with_phase(|d| -residual.eval(d));
        self.family.iter().map(|fk| overlap_unchecked(fk, &propagated)).collect()
    }

    /// Assembles columns (in order `0..n`) and checks unitarity of the lower
    /// half of the basis; the top columns of a truncated basis leak into modes
    /// beyond `n` by construction.
    pub fn assemble(&self, columns: Vec<Vec<Complex64>>) -> Result<OverlapMatrix> {
        let n = self.size();
        let mut entries = Vec::with_capacity(n * n);
        for column in columns {
            entries.extend(column);
        }
        let matrix = OverlapMatrix { n, entries, compensation: self.compensation, metadata: self.metadata };
        for (j, norm) in matrix.column_norms().into_iter().enumerate().take(n.div_ceil(2)) {
            if (norm - 1.0).abs() > UNITARITY_LIMIT {
                bail!(
                    Precision,
                    "column {j} of the overlap matrix has norm {norm:.6}; the basis or grid cannot hold the dispersed mode"
                );
            }
        }
        Ok(matrix)
    }

    pub fn solve(&self) -> Result<OverlapMatrix> {
        self.assemble((0..self.size()).map(|j| self.column(j)).collect())
    }
}

/// Overlap matrix on the default grid resolution.
pub fn overlap_matrix(
    profile: &AtmosphereProfile,
    n: usize,
    sigma: f64,
    omega0: f64,
    compensation: Compensation,
) -> Result<OverlapMatrix> {
    OverlapProblem::new(profile, n, sigma, omega0, compensation, DEFAULT_SAMPLES)?.solve()
}

/// Carrier angular frequency of a profile's working wavelength.
pub fn profile_center(profile: &AtmosphereProfile) -> f64 {
    angular_frequency(profile.wavelength)
}

/// Rows for profile export: (layer index, base altitude m, refractive index).
pub fn profile_table(profile: &AtmosphereProfile) -> Vec<(usize, f64, f64)> {
    profile
        .layers
        .iter()
        .map(|l| (l.index, l.base_altitude, profile.refractive_index(l, profile.wavelength)))
        .collect()
}

/// Column `j` as a vector of `n` complex overlaps; convenience for callers
/// that only need one input mode.
pub fn overlap_column(matrix: &OverlapMatrix, j: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); matrix.size()];
    out.copy_from_slice(matrix.column(j));
    out
}
