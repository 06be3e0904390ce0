//! Transverse Gaussian beam, circular specular reflector and receiver coupling.
//!
//! Everything is radially symmetric about the beam axis, so transverse
//! integrals are one-dimensional in `r` with the `2πr` measure and free-space
//! propagation is a zeroth-order Hankel transform.
//!
//! Propagation from the reflector to the receiver keeps the quadratic phase
//! inside the transform (Fresnel form). For the default geometry the Fresnel
//! number is far below one and this is the Fraunhofer integral; keeping the
//! term makes a large mirror hand back the freely propagated beam exactly.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent methods shadow it when std is linked
use num_traits::Float;

use crate::error::{bail, Result};

/// Fresnel number at or below which the far-field form is considered valid.
pub const FRAUNHOFER_LIMIT: f64 = 0.1;
/// Coverage (in units of the local beam radius) required of a sampling grid.
pub const GRID_COVERAGE: f64 = 5.0;
/// A reflector at least this many beam radii wide does not clip the beam.
const TRANSPARENT_MASK: f64 = 6.0;
/// Relative change under grid doubling beyond which C_SMM is rejected.
const REFINEMENT_TOLERANCE: f64 = 1e-3;
/// Quadrature nodes per radian of phase variation.
const NODES_PER_RADIAN: f64 = 4.0;
/// Nodes per beam radius of Gaussian envelope.
const NODES_PER_WIDTH: f64 = 24.0;
const MIN_NODES: usize = 65;
/// Cap on source × receiver kernel evaluations for one C_SMM evaluation.
const MAX_KERNEL_EVALUATIONS: f64 = 6e7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamGeometry {
    /// `W0`, e⁻¹ amplitude radius at the waist, m.
    pub waist_radius: f64,
    pub wavelength: f64,
}

impl BeamGeometry {
    pub fn new(waist_radius: f64, wavelength: f64) -> Result<Self> {
        if !(waist_radius > 0.0 && wavelength > 0.0) || !waist_radius.is_finite() || !wavelength.is_finite() {
            bail!(InvalidArgument, "waist radius and wavelength must be positive, got {waist_radius} and {wavelength}");
        }
        Ok(Self { waist_radius, wavelength })
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    pub fn rayleigh_range(&self) -> f64 {
        PI * self.waist_radius * self.waist_radius / self.wavelength
    }

    /// `W(z) = W0·√(1 + (z/z_R)²)`.
    pub fn width_at(&self, z: f64) -> f64 {
        self.waist_radius * (1.0 + (z / self.rayleigh_range()).powi(2)).sqrt()
    }

    /// `1/R_c(z)`, zero at the waist.
    pub fn inverse_curvature(&self, z: f64) -> f64 {
        let zr = self.rayleigh_range();
        z / (z * z + zr * zr)
    }

    pub fn gouy_phase(&self, z: f64) -> f64 {
        (z / self.rayleigh_range()).atan()
    }

    /// Far-field half-angle divergence `λ/(πW0)`.
    pub fn divergence(&self) -> f64 {
        self.wavelength / (PI * self.waist_radius)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectorSpec {
    pub radius: f64,
    /// Power reflectivity `r_spec`.
    pub reflectivity: f64,
}

impl ReflectorSpec {
    pub const DEFAULT_REFLECTIVITY: f64 = 0.05;

    pub fn new(radius: f64, reflectivity: f64) -> Result<Self> {
        if !(radius > 0.0) {
            bail!(InvalidArgument, "reflector radius must be positive, got {radius}");
        }
        if !(reflectivity > 0.0 && reflectivity <= 1.0) {
            bail!(InvalidArgument, "reflectivity must lie in (0, 1], got {reflectivity}");
        }
        Ok(Self { radius, reflectivity })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiverSpec {
    pub aperture_radius: f64,
}

impl ReceiverSpec {
    pub fn new(aperture_radius: f64) -> Result<Self> {
        if !(aperture_radius > 0.0) {
            bail!(InvalidArgument, "aperture radius must be positive, got {aperture_radius}");
        }
        Ok(Self { aperture_radius })
    }

    pub fn area(&self) -> f64 {
        PI * self.aperture_radius * self.aperture_radius
    }
}

/// Radially symmetric complex field sampled on `[0, r_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    pub grid: Vec<f64>,
    pub values: Vec<Complex64>,
    /// Path length from the transmitter, m.
    pub range: f64,
}

impl RadialField {
    pub fn new(grid: Vec<f64>, values: Vec<Complex64>, range: f64) -> Result<Self> {
        if grid.len() < 2 || grid.len() != values.len() {
            bail!(InvalidArgument, "radial field needs ≥ 2 samples and one value per grid point");
        }
        if grid[0] != 0.0 || grid.windows(2).any(|w| !(w[1] > w[0])) {
            bail!(InvalidArgument, "radial grid must start at 0 and increase strictly");
        }
        Ok(Self { grid, values, range })
    }

    /// `∫ |ψ|² 2πr dr` over the grid.
    pub fn power(&self) -> f64 {
        let w = radial_weights(&self.grid);
        self.values.iter().zip(&w).map(|(v, w)| v.norm_sqr() * w).sum()
    }

    /// `∫ a* b 2πr dr`; both fields must share the grid.
    pub fn overlap(&self, other: &RadialField) -> Result<Complex64> {
        if self.grid != other.grid {
            bail!(InvalidArgument, "overlap needs both fields on the same radial grid");
        }
        let w = radial_weights(&self.grid);
        Ok(self.values.iter().zip(&other.values).zip(&w).map(|((a, b), w)| a.conj() * b * w).sum())
    }
}

/// `n` (odd) uniform samples on `[0, r_max]`.
pub fn uniform_radial_grid(r_max: f64, n: usize) -> Vec<f64> {
    let n = n.max(3) | 1;
    let h = r_max / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { r_max } else { i as f64 * h }).collect()
}

/// `2πr`-measure quadrature weights: Simpson on odd-length uniform grids,
/// trapezoid otherwise.
fn radial_weights(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let h = grid[n - 1] / (n - 1) as f64;
    let uniform = grid.iter().enumerate().all(|(i, &r)| (r - i as f64 * h).abs() <= 1e-9 * grid[n - 1]);
    let base: Vec<f64> = if uniform && n % 2 == 1 {
        simpson_weights(n, h)
    } else {
        (0..n)
            .map(|i| {
                let left = if i > 0 { grid[i] - grid[i - 1] } else { 0.0 };
                let right = if i + 1 < n { grid[i + 1] - grid[i] } else { 0.0 };
                0.5 * (left + right)
            })
            .collect()
    };
    base.into_iter().zip(grid).map(|(w, r)| 2.0 * PI * r * w).collect()
}

fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let c = if i == 0 || i == n - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * h / 3.0
        })
        .collect()
}

/// `2π·frac(d/λ)`: the propagation phase `k·d` reduced without forming it.
fn wrapped_phase(distance: f64, wavelength: f64) -> f64 {
    let cycles = distance / wavelength;
    2.0 * PI * (cycles - cycles.floor())
}

/// Paraxial Gaussian at range `z`:
/// `√(2/π)/W(z) · exp(−r²/W² + ikr²/(2R_c) + ikz − iζ(z))`, unit power.
fn gaussian_value(geom: &BeamGeometry, z: f64, r: f64) -> Complex64 {
    let w = geom.width_at(z);
    let k = geom.wavenumber();
    let amp = (2.0 / PI).sqrt() / w * (-r * r / (w * w)).exp();
    let phase = 0.5 * k * r * r * geom.inverse_curvature(z) + wrapped_phase(z, geom.wavelength) - geom.gouy_phase(z);
    Complex64::from_polar(amp, phase)
}

/// Unit-power Gaussian beam at range `z` sampled on `grid`.
pub fn gaussian_at_range(geom: &BeamGeometry, z: f64, grid: &[f64]) -> Result<RadialField> {
    if !(z >= 0.0) {
        bail!(InvalidArgument, "range must be non-negative, got {z}");
    }
    let w = geom.width_at(z);
    let r_max = grid.last().copied().unwrap_or(0.0);
    if r_max < GRID_COVERAGE * w {
        bail!(
            Precision,
            "radial grid reaches {r_max:.3e} m but the beam at {z:.3e} m needs {:.3e} m",
            GRID_COVERAGE * w
        );
    }
    let values = grid.iter().map(|&r| gaussian_value(geom, z, r)).collect();
    RadialField::new(grid.to_vec(), values, z)
}

/// Multiplies by `√r_spec` inside the reflector radius and zeroes outside.
pub fn apply_reflector(field: &RadialField, reflector: &ReflectorSpec) -> RadialField {
    let t = reflector.reflectivity.sqrt();
    let values = field
        .grid
        .iter()
        .zip(&field.values)
        .map(|(&r, &v)| if r <= reflector.radius { v * t } else { Complex64::new(0.0, 0.0) })
        .collect();
    RadialField { grid: field.grid.clone(), values, range: field.range }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Propagated {
    pub field: RadialField,
    /// `a²/(λL)` with `a` the outermost non-zero source sample.
    pub fresnel_number: f64,
    pub fraunhofer_valid: bool,
}

/// Free-space propagation over `distance` onto `receiver_grid`:
///
/// ```text
/// U(ρ) = (k/(iL)) e^{ikL} e^{ikρ²/(2L)} ∫ u(r) e^{ikr²/(2L)} J0(krρ/L) r dr
/// ```
///
/// evaluated by direct quadrature on the source grid.
pub fn propagate(field: &RadialField, distance: f64, wavelength: f64, receiver_grid: &[f64]) -> Result<Propagated> {
    if !(distance > 0.0 && wavelength > 0.0) {
        bail!(InvalidArgument, "distance and wavelength must be positive");
    }
    let weights = radial_weights(&field.grid);
    let k = 2.0 * PI / wavelength;
    // u(r)·e^{ikr²/2L}·(2πr dr)/(2π)
    let source: Vec<(f64, Complex64)> = field
        .grid
        .iter()
        .zip(&field.values)
        .zip(&weights)
        .filter(|((_, v), _)| v.norm_sqr() > 0.0)
        .map(|((&r, &v), &w)| (r, v * Complex64::from_polar(w / (2.0 * PI), 0.5 * k * r * r / distance)))
        .collect();
    let support = source.iter().map(|s| s.0).fold(0.0, f64::max);
    let prefactor = Complex64::new(0.0, -k / distance) * Complex64::from_polar(1.0, wrapped_phase(distance, wavelength));
    let values = receiver_grid
        .iter()
        .map(|&rho| {
            let scale = k * rho / distance;
            let sum: Complex64 = source.iter().map(|&(r, s)| s * libm::j0(scale * r)).sum();
            prefactor * Complex64::from_polar(1.0, 0.5 * k * rho * rho / distance) * sum
        })
        .collect();
    let fresnel_number = support * support / (wavelength * distance);
    Ok(Propagated {
        field: RadialField::new(receiver_grid.to_vec(), values, field.range + distance)?,
        fresnel_number,
        fraunhofer_valid: fresnel_number <= FRAUNHOFER_LIMIT,
    })
}

/// Transmitter, reflector at range `L`, receiver back at the transmitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmmScenario {
    pub beam: BeamGeometry,
    pub reflector: ReflectorSpec,
    pub receiver: ReceiverSpec,
    pub range: f64,
}

impl SmmScenario {
    pub const DEFAULT_WAIST_RADIUS: f64 = 6.77e-3;
    pub const DEFAULT_RANGE: f64 = 695e3;
    pub const DEFAULT_APERTURE_RADIUS: f64 = 0.5;
    pub const DEFAULT_REFLECTOR_RADIUS: f64 = 100e-6;

    pub fn with_reflector_radius(&self, radius: f64) -> Result<Self> {
        Ok(Self { reflector: ReflectorSpec::new(radius, self.reflector.reflectivity)?, ..*self })
    }
}

impl Default for SmmScenario {
    fn default() -> Self {
        Self {
            beam: BeamGeometry { waist_radius: Self::DEFAULT_WAIST_RADIUS, wavelength: crate::constants::DEFAULT_WAVELENGTH },
            reflector: ReflectorSpec { radius: Self::DEFAULT_REFLECTOR_RADIUS, reflectivity: ReflectorSpec::DEFAULT_REFLECTIVITY },
            receiver: ReceiverSpec { aperture_radius: Self::DEFAULT_APERTURE_RADIUS },
            range: Self::DEFAULT_RANGE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmmMethod {
    /// Direct source × receiver quadrature.
    Quadrature,
    /// Reflector wider than the beam: the return is the freely propagated
    /// beam scaled by `√r_spec`, and only the aperture clipping remains.
    TransparentMask,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmmResult {
    pub value: f64,
    pub method: SmmMethod,
    pub source_nodes: usize,
    pub receiver_nodes: usize,
    /// Relative change between the base and the doubled grids.
    pub refinement_change: f64,
    pub fresnel_number: f64,
    pub fraunhofer_valid: bool,
}

/// Spatial mode-mismatch coefficient
/// `C = |∫_aperture ψ0*(2L) ψ1(2L) 2πρ dρ|²`, with `ψ0` the unit-power beam
/// freely propagated to `2L` and `ψ1` the return from the masked reflector.
pub fn smm_coefficient(s: &SmmScenario) -> Result<SmmResult> {
    if !(s.range > 0.0) {
        bail!(InvalidArgument, "range must be positive, got {}", s.range);
    }
    let beam = &s.beam;
    let l = s.range;
    let w_l = beam.width_at(l);
    let w_2l = beam.width_at(2.0 * l);
    let r_src = s.reflector.radius;
    let fresnel_number = r_src.min(TRANSPARENT_MASK * w_l).powi(2) / (beam.wavelength * l);

    if r_src >= TRANSPARENT_MASK * w_l {
        let clip = 1.0 - (-2.0 * (s.receiver.aperture_radius / w_2l).powi(2)).exp();
        return Ok(SmmResult {
            value: s.reflector.reflectivity * clip * clip,
            method: SmmMethod::TransparentMask,
            source_nodes: 0,
            receiver_nodes: 0,
            refinement_change: 0.0,
            fresnel_number,
            fraunhofer_valid: fresnel_number <= FRAUNHOFER_LIMIT,
        });
    }

    let k = beam.wavenumber();
    // ψ0 is negligible beyond a few widths, so a huge aperture adds nothing.
    let rho_max = s.receiver.aperture_radius.min(TRANSPARENT_MASK * w_2l);
    let src_phase = 0.5 * k * r_src * r_src * (beam.inverse_curvature(l) + 1.0 / l) + k * r_src * rho_max / l;
    let rcv_phase = 0.5 * k * rho_max * rho_max * (1.0 / l - beam.inverse_curvature(2.0 * l)).abs() + k * r_src * rho_max / l;
    let n_src = node_count(src_phase, r_src / w_l);
    let n_rcv = node_count(rcv_phase, rho_max / w_2l);
    let evaluations = (2 * n_src) as f64 * (2 * n_rcv) as f64;
    if evaluations > MAX_KERNEL_EVALUATIONS {
        bail!(
            Precision,
            "reflector radius {r_src:.3e} m needs ~{evaluations:.1e} kernel evaluations, above the {MAX_KERNEL_EVALUATIONS:.0e} budget"
        );
    }

    let coarse = smm_quadrature(s, rho_max, n_src, n_rcv)?;
    let fine = smm_quadrature(s, rho_max, 2 * n_src - 1, 2 * n_rcv - 1)?;
    let change = if fine > 0.0 { (fine - coarse).abs() / fine } else { 0.0 };
    if change > REFINEMENT_TOLERANCE {
        bail!(Precision, "C_SMM changed by {change:.2e} (relative) under grid doubling");
    }
    Ok(SmmResult {
        value: fine,
        method: SmmMethod::Quadrature,
        source_nodes: 2 * n_src - 1,
        receiver_nodes: 2 * n_rcv - 1,
        refinement_change: change,
        fresnel_number,
        fraunhofer_valid: fresnel_number <= FRAUNHOFER_LIMIT,
    })
}

fn node_count(phase_span: f64, widths: f64) -> usize {
    let n = (phase_span * NODES_PER_RADIAN).max(widths * NODES_PER_WIDTH).ceil();
    (n as usize).max(MIN_NODES) | 1
}

fn smm_quadrature(s: &SmmScenario, rho_max: f64, n_src: usize, n_rcv: usize) -> Result<f64> {
    let l = s.range;
    let src_grid = uniform_radial_grid(s.reflector.radius, n_src);
    let incident = RadialField::new(src_grid.clone(), src_grid.iter().map(|&r| gaussian_value(&s.beam, l, r)).collect(), l)?;
    let reflected = apply_reflector(&incident, &s.reflector);
    let rcv_grid = uniform_radial_grid(rho_max, n_rcv);
    let returned = propagate(&reflected, l, s.beam.wavelength, &rcv_grid)?.field;
    let reference = RadialField::new(rcv_grid.clone(), rcv_grid.iter().map(|&r| gaussian_value(&s.beam, 2.0 * l, r)).collect(), 2.0 * l)?;
    Ok(reference.overlap(&returned)?.norm_sqr())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambertianRatio {
    pub ratio: f64,
    pub divergence: f64,
    pub diffraction: f64,
    /// Reflector within ten wavelengths: geometric optics no longer applies.
    pub physical_optics_warning: bool,
}

/// Order-of-magnitude specular-to-Lambertian ratio `1/θ_eff²` with
/// `θ_eff² = (λ/(πW0))² + (0.618λ/R)²`.
pub fn specular_to_lambertian_ratio(waist_radius: f64, wavelength: f64, reflector_radius: f64) -> Result<LambertianRatio> {
    let geom = BeamGeometry::new(waist_radius, wavelength)?;
    if !(reflector_radius > 0.0) {
        bail!(InvalidArgument, "reflector radius must be positive, got {reflector_radius}");
    }
    let divergence = geom.divergence();
    let diffraction = 0.618 * wavelength / reflector_radius;
    Ok(LambertianRatio {
        ratio: 1.0 / (divergence * divergence + diffraction * diffraction),
        divergence,
        diffraction,
        physical_optics_warning: reflector_radius <= 10.0 * wavelength,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn beam() -> BeamGeometry {
        BeamGeometry::new(6.77e-3, 1064e-9).unwrap()
    }

    #[test]
    fn geometry_identities() {
        let b = beam();
        let zr = b.rayleigh_range();
        assert!((zr - PI * 6.77e-3f64.powi(2) / 1064e-9).abs() / zr < 1e-12);
        assert!((b.width_at(zr) - 2f64.sqrt() * b.waist_radius).abs() < 1e-15);
        let w = b.width_at(695e3);
        assert!((w - 34.8).abs() < 0.1, "W(L) = {w}");
        assert!((b.divergence() - 50e-6).abs() < 0.1e-6);
    }

    #[test]
    fn gaussian_field_is_unit_power_and_matches_waist_profile() {
        let b = beam();
        let grid = uniform_radial_grid(6.0 * b.waist_radius, 2001);
        let f = gaussian_at_range(&b, 0.0, &grid).unwrap();
        assert!((f.power() - 1.0).abs() < 1e-6);
        let i = grid.iter().position(|&r| r >= b.waist_radius).unwrap();
        // e^{-1} amplitude radius at the waist
        let rel = f.values[i].norm() / f.values[0].norm();
        assert!((rel - (-(grid[i] / b.waist_radius).powi(2)).exp()).abs() < 1e-12);
        assert!(f.values.iter().all(|v| v.im.abs() <= 1e-12 * v.norm() || v.norm() < 1e-300));

        let far = 695e3;
        let grid = uniform_radial_grid(6.0 * b.width_at(far), 2001);
        let g = gaussian_at_range(&b, far, &grid).unwrap();
        assert!((g.power() - 1.0).abs() < 1e-6);
        assert!(gaussian_at_range(&b, far, &uniform_radial_grid(3.0 * b.width_at(far), 101)).is_err());
    }

    #[test]
    fn reflector_mask() {
        let b = beam();
        let w = b.width_at(1000.0);
        let grid = uniform_radial_grid(6.0 * w, 4001);
        let f = gaussian_at_range(&b, 1000.0, &grid).unwrap();
        let wide = apply_reflector(&f, &ReflectorSpec::new(1e3, 1.0).unwrap());
        assert_eq!(wide.values, f.values);
        let attenuated = apply_reflector(&f, &ReflectorSpec::new(1e3, 0.05).unwrap());
        assert!((attenuated.power() - 0.05 * f.power()).abs() < 1e-12);
        // Encircled energy of a Gaussian, on a grid ending exactly at R.
        let r = w / 10.0;
        let fine = uniform_radial_grid(r, 401);
        let inner = RadialField::new(fine.clone(), fine.iter().map(|&x| gaussian_value(&b, 1000.0, x)).collect(), 1000.0).unwrap();
        let kept = apply_reflector(&inner, &ReflectorSpec::new(r, 0.05).unwrap()).power();
        let expected = 0.05 * (1.0 - (-2.0 * (r / w).powi(2)).exp());
        assert!((kept - expected).abs() / expected < 1e-8);
    }

    #[test]
    fn waist_propagates_to_the_analytic_beam() {
        let b = BeamGeometry::new(1e-3, 1064e-9).unwrap();
        let l = 50.0 * b.rayleigh_range();
        let src = gaussian_at_range(&b, 0.0, &uniform_radial_grid(6e-3, 801)).unwrap();
        let rcv = uniform_radial_grid(5.0 * b.width_at(l), 401);
        let out = propagate(&src, l, b.wavelength, &rcv).unwrap();
        let exact = gaussian_at_range(&b, l, &rcv).unwrap();
        for (a, e) in out.field.values.iter().zip(&exact.values) {
            assert!((a - e).norm() < 1e-6 * exact.values[0].norm());
        }
        assert!((out.field.power() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn fresnel_step_from_mid_range_reaches_the_beam_at_double_range() {
        let b = BeamGeometry::new(1e-3, 1064e-9).unwrap();
        let l = b.rayleigh_range();
        let src = gaussian_at_range(&b, l, &uniform_radial_grid(6.0 * b.width_at(l), 1601)).unwrap();
        let rcv = uniform_radial_grid(5.0 * b.width_at(2.0 * l), 201);
        let out = propagate(&src, l, b.wavelength, &rcv).unwrap();
        let exact = gaussian_at_range(&b, 2.0 * l, &rcv).unwrap();
        for (a, e) in out.field.values.iter().zip(&exact.values) {
            assert!((a - e).norm() < 1e-6 * exact.values[0].norm());
        }
        assert!(!out.fraunhofer_valid);
    }

    #[test]
    fn small_disk_gives_the_airy_pattern() {
        // Wide waist: the disk is uniformly illuminated with a flat phase.
        let b = BeamGeometry::new(1.0, 1064e-9).unwrap();
        let radius = 1e-4;
        let l = 1e4;
        let src_grid = uniform_radial_grid(radius, 401);
        let src = RadialField::new(src_grid.clone(), src_grid.iter().map(|&r| gaussian_value(&b, 0.0, r)).collect(), 0.0).unwrap();
        let k = b.wavenumber();
        let first_zero = 0.61 * b.wavelength * l / radius;
        let rcv = uniform_radial_grid(3.0 * first_zero, 61);
        let out = propagate(&src, l, b.wavelength, &rcv).unwrap();
        assert!(out.fraunhofer_valid);
        let u0 = out.field.values[0].norm();
        for (i, &rho) in rcv.iter().enumerate().skip(1) {
            let x = k * radius * rho / l;
            let airy = (2.0 * libm::j1(x) / x).abs();
            assert!((out.field.values[i].norm() / u0 - airy).abs() < 1e-6, "ρ = {rho}");
        }
    }

    #[test]
    fn specular_ratio_anchor_and_limits() {
        let r = specular_to_lambertian_ratio(6.77e-3, 1064e-9, 50e-6).unwrap();
        assert!((r.ratio - 5782.0).abs() / 5782.0 < 0.01, "{}", r.ratio);
        assert!(!r.physical_optics_warning);
        let wide = specular_to_lambertian_ratio(6.77e-3, 1064e-9, 1e3).unwrap().ratio;
        let limit = (PI * 6.77e-3 / 1064e-9).powi(2);
        assert!((wide - limit).abs() / limit < 1e-6);
        assert!(specular_to_lambertian_ratio(6.77e-3, 1064e-9, 25e-6).unwrap().ratio < r.ratio);
        assert!(specular_to_lambertian_ratio(6.77e-3, 1064e-9, 5e-6).unwrap().physical_optics_warning);
    }

    #[test]
    fn default_anchor_is_small_and_converged() {
        let res = smm_coefficient(&SmmScenario::default()).unwrap();
        assert_eq!(res.method, SmmMethod::Quadrature);
        assert!(res.value > 0.0 && res.value < 0.05);
        assert!(res.refinement_change < 1e-3);
        assert!(res.fraunhofer_valid);
        // Point-reflector estimate: |ψ0(0)|·|U(0)|·πa².
        let s = SmmScenario::default();
        let k = s.beam.wavenumber();
        let u0 = k / s.range * 0.05f64.sqrt() * (2.0 / PI).sqrt() / s.beam.width_at(s.range) * 0.5 * 1e-8;
        let psi0 = (2.0 / PI).sqrt() / s.beam.width_at(2.0 * s.range);
        let estimate = (psi0 * u0 * PI * 0.25).powi(2);
        assert!((res.value - estimate).abs() / estimate < 0.05, "{} vs {}", res.value, estimate);
    }

    #[test]
    fn transparent_mask_limit() {
        let s = SmmScenario::default();
        let huge = smm_coefficient(&s.with_reflector_radius(1e4).unwrap()).unwrap();
        assert_eq!(huge.method, SmmMethod::TransparentMask);
        let w2 = s.beam.width_at(2.0 * s.range);
        let clip = 1.0 - (-2.0 * 0.25 / (w2 * w2)).exp();
        assert!((huge.value - 0.05 * clip * clip).abs() < 1e-18);
        let open = SmmScenario {
            reflector: ReflectorSpec::new(1e4, 1.0).unwrap(),
            receiver: ReceiverSpec::new(1e4).unwrap(),
            ..s
        };
        assert!((smm_coefficient(&open).unwrap().value - 1.0).abs() < 1e-12);
    }
}
