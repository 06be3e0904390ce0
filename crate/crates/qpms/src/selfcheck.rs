//! Acceptance suite: each criterion reports what it measured against what it
//! expected.

use std::fmt;

use num_complex::Complex64;

use qpms_core::atmosphere::{build_profile, Compensation, GddConvention, OverlapMatrix, OverlapProblem, ProfileConfig};
use qpms_core::beam_optics::{smm_coefficient, specular_to_lambertian_ratio, ReceiverSpec, ReflectorSpec, SmmMethod, SmmScenario};
use qpms_core::constants::{angular_frequency, DEFAULT_MODE_COUNT, DEFAULT_PULSE_WIDTH, DEFAULT_WAVELENGTH};
use qpms_core::detection::{log_radii, min_signal_for_target, DetectionPipeline, SweepResult};
use qpms_core::hg_modes::{hg_family, hg_time_amplitude, overlap, sigma_from_pulse_width, TemporalModeSpec, UniformGrid, DEFAULT_SAMPLES};
use qpms_core::radiometry::{per_mode_background, solar_mean_photon_number, SolarBackgroundParams};
use qpms_core::sfg_stats::{convert, decompose_green_kernel, fock_oracle_moments, ModeMoments, SampledKernel, SchmidtModel, ThermalScaling};

use crate::commands::{parallel_sweep, solve_overlap, sweep_context};
use crate::RunConfig;

pub const CRITERIA: usize = 11;

#[derive(Debug, Clone)]
pub struct Check {
    pub id: usize,
    pub name: &'static str,
    pub measured: String,
    pub expected: String,
    pub tolerance: String,
    pub passed: bool,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let id = if self.id == 0 { "-".to_string() } else { self.id.to_string() };
        write!(
            f,
            "[{status}] {id:>2} {}: measured {}; expected {}; tolerance {}",
            self.name, self.measured, self.expected, self.tolerance
        )
    }
}

struct Builder {
    id: usize,
    name: &'static str,
    expected: String,
    tolerance: String,
}

impl Builder {
    fn new(id: usize, name: &'static str, expected: impl Into<String>, tolerance: impl Into<String>) -> Self {
        Self { id, name, expected: expected.into(), tolerance: tolerance.into() }
    }

    fn finish(self, outcome: Result<(String, bool), String>) -> Check {
        let (measured, passed) = outcome.unwrap_or_else(|e| (format!("error: {e}"), false));
        Check { id: self.id, name: self.name, measured, expected: self.expected, tolerance: self.tolerance, passed }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn s<E: fmt::Display>(e: E) -> String {
    e.to_string()
}

pub fn criterion(id: usize) -> Check {
    match id {
        1 => lambertian_ratio(),
        2 => solar_background(),
        3 => hg_orthonormality(),
        4 => dispersion_unitarity(&default_overlaps()),
        5 => compensation_efficacy(&default_overlaps()),
        6 => oracle_equivalence(),
        7 => statistics_preservation(),
        8 => kernel_decomposition(),
        9 => smm_properties(),
        10 => strength_ratio_shape(),
        11 => analytic_solver(),
        _ => panic!("no criterion {id}"),
    }
}

pub fn run_all() -> Vec<Check> {
    let overlaps = default_overlaps();
    vec![
        lambertian_ratio(),
        solar_background(),
        hg_orthonormality(),
        dispersion_unitarity(&overlaps),
        compensation_efficacy(&overlaps),
        oracle_equivalence(),
        statistics_preservation(),
        kernel_decomposition(),
        smm_properties(),
        strength_ratio_shape(),
        analytic_solver(),
    ]
}

/// Range check on a configured Schmidt file.
pub fn schmidt_file_check(coefficients: &[f64]) -> Check {
    let b = Builder::new(0, "Schmidt file invariants", "every λ_n in [0, 1], at least 4 modes", "exact");
    let bad: Vec<String> = coefficients
        .iter()
        .enumerate()
        .filter(|(_, c)| !(0.0..=1.0).contains(*c))
        .map(|(n, c)| format!("λ_{n} = {c}"))
        .collect();
    let measured = if bad.is_empty() { format!("{} modes in range", coefficients.len()) } else { bad.join(", ") };
    b.finish(Ok((measured, bad.is_empty() && coefficients.len() > 3)))
}

fn lambertian_ratio() -> Check {
    let b = Builder::new(1, "specular-to-Lambertian ratio", "5782", "1 %");
    b.finish(specular_to_lambertian_ratio(6.77e-3, 1064e-9, 50e-6).map_err(s).map(|r| {
        (format!("{:.1}", r.ratio), rel(r.ratio, 5782.0) <= 0.01)
    }))
}

fn solar_background() -> Check {
    let b = Builder::new(2, "solar background", "n̄_B = 0.0045, per mode 1.125e-4", "2 %");
    let outcome = (|| {
        let p = SolarBackgroundParams { receiver_area: 0.785, ..SolarBackgroundParams::default() };
        let total = solar_mean_photon_number(&p).map_err(s)?;
        let per = per_mode_background(total, DEFAULT_MODE_COUNT).map_err(s)?;
        Ok((format!("n̄_B = {total:.5e}, per mode {per:.5e}"), rel(total, 0.0045) <= 0.02 && rel(per, 1.125e-4) <= 0.02))
    })();
    b.finish(outcome)
}

fn hg_orthonormality() -> Check {
    let b = Builder::new(3, "HG orthonormality (orders 0..9)", "identity Gram matrix", "1e-8 elementwise");
    let outcome = (|| {
        let sigma = sigma_from_pulse_width(DEFAULT_PULSE_WIDTH, DEFAULT_WAVELENGTH).map_err(s)?;
        let w0 = angular_frequency(DEFAULT_WAVELENGTH);
        let grid = UniformGrid::for_orders(w0, sigma, 9, DEFAULT_SAMPLES).map_err(s)?;
        let family = hg_family(w0, sigma, 10, &grid).map_err(s)?;
        let mut worst: f64 = 0.0;
        for (i, a) in family.iter().enumerate() {
            for (j, c) in family.iter().enumerate() {
                let g = overlap(a, c).map_err(s)?;
                let expected = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - Complex64::new(expected, 0.0)).norm());
            }
        }
        Ok((format!("max |G − I| = {worst:.2e}"), worst <= 1e-8))
    })();
    b.finish(outcome)
}

/// Default-profile overlap matrices: uncompensated, compensated as printed,
/// compensated with the doubled GDD term.
pub struct Overlaps(Result<[OverlapMatrix; 3], String>);

pub fn default_overlaps() -> Overlaps {
    let run = || {
        let profile = build_profile(DEFAULT_WAVELENGTH, &ProfileConfig::default()).map_err(s)?;
        let sigma = sigma_from_pulse_width(DEFAULT_PULSE_WIDTH, DEFAULT_WAVELENGTH).map_err(s)?;
        let w0 = angular_frequency(DEFAULT_WAVELENGTH);
        let solve = |c| -> Result<OverlapMatrix, String> {
            let problem = OverlapProblem::new(&profile, DEFAULT_MODE_COUNT, sigma, w0, c, DEFAULT_SAMPLES).map_err(s)?;
            solve_overlap(&problem).map_err(s)
        };
        Ok([
            solve(Compensation::Uncompensated)?,
            solve(Compensation::Compensated(GddConvention::AsPrinted))?,
            solve(Compensation::Compensated(GddConvention::Doubled))?,
        ])
    };
    Overlaps(run())
}

fn dispersion_unitarity(o: &Overlaps) -> Check {
    let b = Builder::new(4, "dispersion unitarity (N = 40, j ≤ 6)", "Σ_k |c_kj|² = 1", "1e-6");
    let outcome = o.0.clone().map(|[unc, comp, _]| {
        let worst = [&unc, &comp]
            .iter()
            .flat_map(|m| m.column_norms().into_iter().take(7))
            .map(|n| (n - 1.0).abs())
            .fold(0.0, f64::max);
        (format!("max |Σ − 1| = {worst:.2e}"), worst <= 1e-6)
    });
    b.finish(outcome)
}

fn compensation_efficacy(o: &Overlaps) -> Check {
    let b = Builder::new(
        5,
        "compensation efficacy (200 ps, j ≤ 6)",
        "compensated |c_jj|² ≥ 0.99; uncompensated < compensated",
        "exact",
    );
    let outcome = o.0.clone().map(|[unc, comp, doubled]| {
        let diag = |m: &OverlapMatrix| -> Vec<f64> { (0..7).map(|j| m.get(j, j).norm_sqr()).collect() };
        let (du, dc, dd) = (diag(&unc), diag(&comp), diag(&doubled));
        let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
        let gap = du.iter().zip(&dc).map(|(u, c)| c - u).fold(f64::INFINITY, f64::min);
        let passed = dc.iter().all(|&d| d >= 0.99) && du.iter().zip(&dc).all(|(u, c)| u < c);
        let measured = format!(
            "min |c_jj|²: compensated {:.12}, uncompensated {:.12}, doubled-GDD {:.12}; min gap {gap:.2e}",
            min(&dc),
            min(&du),
            min(&dd)
        );
        (measured, passed)
    });
    b.finish(outcome)
}

fn oracle_equivalence() -> Check {
    let b = Builder::new(6, "number-basis oracle equivalence", "closed-form moments = oracle moments", "1e-6 relative");
    let outcome = (|| {
        let mut worst: f64 = 0.0;
        for r in [0.0, 0.5, 1.0, 2.0] {
            for n in [0.0, 0.1, 0.5] {
                for lambda in [0.014, 0.07, 0.7, 1.0] {
                    let (om, os) = fock_oracle_moments(Complex64::new(r, 0.0), n, lambda, 40).map_err(s)?;
                    let model = SchmidtModel::new(vec![lambda]).map_err(s)?;
                    let st = convert(&[ModeMoments::displaced_thermal(r * r, n)], &model).map_err(s)?;
                    let second = st.total_variance + st.total_mean * st.total_mean;
                    if st.total_mean == 0.0 {
                        worst = worst.max(om.abs()).max(os.abs());
                    } else {
                        worst = worst.max(rel(om, st.total_mean)).max(rel(os, second));
                    }
                }
            }
        }
        Ok((format!("max relative deviation {worst:.2e} over 48 points"), worst <= 1e-6))
    })();
    b.finish(outcome)
}

fn statistics_preservation() -> Check {
    let b = Builder::new(7, "statistics preservation", "coherent: var = m; thermal: var = m² + m", "1e-12 relative");
    let outcome = (|| {
        let mut worst: f64 = 0.0;
        for lambda in [0.014, 0.07, 0.3, 0.7, 1.0] {
            let model = SchmidtModel::new(vec![lambda]).map_err(s)?;
            for y in [1e-3, 0.5, 4.0, 1e3, 1e9] {
                let st = convert(&[ModeMoments::displaced_thermal(y, 0.0)], &model).map_err(s)?;
                worst = worst.max(rel(st.total_variance, st.total_mean));
            }
            for n in [1e-4, 0.1, 1.0, 50.0] {
                let st = convert(&[ModeMoments::displaced_thermal(0.0, n)], &model).map_err(s)?;
                let m = st.total_mean;
                worst = worst.max(rel(st.total_variance, m * m + m));
            }
        }
        Ok((format!("max relative deviation {worst:.2e}"), worst <= 1e-12))
    })();
    b.finish(outcome)
}

fn unit(size: usize, j: usize) -> Vec<Complex64> {
    (0..size).map(|k| Complex64::new(if k == j { 1.0 } else { 0.0 }, 0.0)).collect()
}

/// `Σ μ u(t) v*(t')` with `u`, `v` given as HG coefficient vectors.
pub fn synthetic_kernel(grid: UniformGrid, sigma: f64, terms: &[(f64, Vec<Complex64>, Vec<Complex64>)]) -> Result<SampledKernel, String> {
    let n = grid.samples();
    let size = terms.iter().map(|t| t.1.len().max(t.2.len())).max().unwrap_or(0);
    let modes: Vec<Vec<Complex64>> = (0..size)
        .map(|j| Ok(hg_time_amplitude(&TemporalModeSpec::new(j, 0.0, sigma).map_err(s)?, &grid).map_err(s)?.values))
        .collect::<Result<_, String>>()?;
    let combine = |c: &[Complex64]| -> Vec<Complex64> {
        (0..n).map(|i| c.iter().zip(&modes).map(|(a, f)| a * f[i]).sum()).collect()
    };
    let mut values = vec![Complex64::new(0.0, 0.0); n * n];
    for (mu, u, v) in terms {
        let (us, vs) = (combine(u), combine(v));
        for a in 0..n {
            for b in 0..n {
                values[a * n + b] += us[a] * vs[b].conj() * *mu;
            }
        }
    }
    SampledKernel::new(grid, values).map_err(s)
}

fn kernel_decomposition() -> Check {
    let b = Builder::new(
        8,
        "kernel decomposition (M = 12)",
        "known singular values and mixing weights; reconstruction error < 1e-3",
        "1e-6",
    );
    let outcome = (|| {
        let sigma = sigma_from_pulse_width(DEFAULT_PULSE_WIDTH, DEFAULT_WAVELENGTH).map_err(s)?;
        let grid = UniformGrid::for_orders(0.0, 1.0 / sigma, 11, 301).map_err(s)?;

        let mus = [0.05, 0.7, 0.3, 0.014, 0.5, 0.2];
        let terms: Vec<_> = mus.iter().enumerate().map(|(j, &m)| (m, unit(12, j), unit(12, j))).collect();
        let d = decompose_green_kernel(&synthetic_kernel(grid, sigma, &terms)?, sigma, 12).map_err(s)?;
        let mut order: Vec<usize> = (0..mus.len()).collect();
        order.sort_by(|&a, &c| mus[c].total_cmp(&mus[a]));
        let v = d.model.mixing().ok_or("no mixing matrix")?;
        let mut value_err: f64 = 0.0;
        let mut weight_err: f64 = 0.0;
        for (i, &j) in order.iter().enumerate() {
            value_err = value_err.max((d.model.coefficients()[i] - mus[j]).abs());
            for (k, e) in unit(12, j).iter().enumerate() {
                weight_err = weight_err.max((v[(k, i)] - e).norm());
            }
        }
        value_err = d.model.coefficients()[mus.len()..].iter().fold(value_err, |a, &c| a.max(c));
        let diag_recon = d.reconstruction_error;

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut g = vec![Complex64::new(0.0, 0.0); 12];
        g[2] = Complex64::new(h, 0.0);
        g[4] = Complex64::new(h, 0.0);
        let d = decompose_green_kernel(&synthetic_kernel(grid, sigma, &[(0.9, unit(12, 3), g.clone())])?, sigma, 12).map_err(s)?;
        let c = d.model.coefficients();
        value_err = value_err.max((c[0] - 0.9).abs()).max(c[1]);
        let v = d.model.mixing().ok_or("no mixing matrix")?;
        for (k, e) in g.iter().enumerate() {
            weight_err = weight_err.max((v[(k, 0)] - e).norm());
        }
        let recon = diag_recon.max(d.reconstruction_error);
        let measured = format!("singular values off by {value_err:.2e}, weights by {weight_err:.2e}, reconstruction {recon:.2e}");
        Ok((measured, value_err <= 1e-6 && weight_err <= 1e-6 && recon < 1e-3))
    })();
    b.finish(outcome)
}

fn smm_properties() -> Check {
    let b = Builder::new(
        9,
        "C_SMM properties",
        "monotone in R (10 µm–10 cm); linear in r_spec; C(R→0) → 0; C(R→∞, r_spec = 1) → clipping-only value; grid doubling stable",
        "linearity 1e-9, limit 1e-6, refinement 1e-3",
    );
    let outcome = (|| {
        let base = SmmScenario::default();
        let mut values = Vec::new();
        let mut refinement: f64 = 0.0;
        for r in log_radii(10e-6, 0.1, 10) {
            let res = smm_coefficient(&base.with_reflector_radius(r).map_err(s)?).map_err(s)?;
            refinement = refinement.max(res.refinement_change);
            values.push(res.value);
        }
        let monotone = values.windows(2).all(|w| w[1] >= w[0]);

        let mut linear: f64 = 0.0;
        for r in [30e-6, 1e-3, 0.05] {
            let full = SmmScenario { reflector: ReflectorSpec::new(r, 1.0).map_err(s)?, ..base };
            let half = SmmScenario { reflector: ReflectorSpec::new(r, 0.5).map_err(s)?, ..base };
            let (a, h) = (smm_coefficient(&full).map_err(s)?.value, smm_coefficient(&half).map_err(s)?.value);
            linear = linear.max(rel(h, 0.5 * a));
        }

        let tiny = smm_coefficient(&base.with_reflector_radius(1e-7).map_err(s)?).map_err(s)?.value;

        // Near field (L = z_R) so the mirror can be wider than the beam and
        // still be integrated directly; the aperture clips at W(2L).
        let mut nf = base;
        nf.range = nf.beam.rayleigh_range();
        let w_2l = nf.beam.width_at(2.0 * nf.range);
        nf.receiver = ReceiverSpec::new(w_2l).map_err(s)?;
        let clip = 1.0 - (-2.0f64).exp();
        let wide = nf.with_reflector_radius(4.0 * nf.beam.width_at(nf.range)).map_err(s)?;
        let wide = SmmScenario { reflector: ReflectorSpec::new(wide.reflector.radius, 1.0).map_err(s)?, ..wide };
        let res = smm_coefficient(&wide).map_err(s)?;
        let limit_err = rel(res.value, clip * clip);
        let quadrature = res.method == SmmMethod::Quadrature;

        let measured = format!(
            "monotone {monotone}; linearity {linear:.2e}; C(0.1 µm) = {tiny:.2e}; wide mirror {:.9} vs clip² {:.9} ({limit_err:.2e}); refinement {refinement:.2e}",
            res.value,
            clip * clip
        );
        let passed = monotone && linear <= 1e-9 && tiny < 1e-30 && quadrature && limit_err <= 1e-6 && refinement < 1e-3;
        Ok((measured, passed))
    })();
    b.finish(outcome)
}

pub fn strength_ratio_shape() -> Check {
    let b = Builder::new(
        10,
        "strength-ratio curves",
        "ratio non-increasing in R, ordered by δα_c ∈ {0, 10, 100}, ratio = 1 crossing, |SSMD − 2| < 1e-3",
        "1e-3 on SSMD",
    );
    let outcome = (|| {
        let cfg = RunConfig::default();
        let ctx = sweep_context(&cfg.scenario().map_err(s)?).map_err(s)?;
        let scatters = [0.0, 10.0, 100.0];
        let radii = cfg.sweep_radii();
        let sweep = parallel_sweep(&ctx, &radii, &scatters).map_err(s)?;
        Ok(judge_sweep(&sweep, &scatters, cfg.target_ssmd))
    })();
    b.finish(outcome)
}

/// Shape checks on a finished sweep.
pub fn judge_sweep(sweep: &SweepResult, scatters: &[f64], target: f64) -> (String, bool) {
    let converged = sweep.rows.iter().filter(|r| r.converged).count();
    let closure = sweep.rows.iter().filter(|r| r.converged).map(|r| (r.ssmd - target).abs()).fold(0.0, f64::max);
    let monotone = scatters.iter().all(|&d| sweep.curve(d).windows(2).all(|w| w[1].ratio <= w[0].ratio));
    let ordered = scatters.windows(2).all(|p| {
        sweep.curve(p[0]).iter().zip(sweep.curve(p[1])).all(|(lo, hi)| hi.ratio > lo.ratio)
    });
    let crossings: Vec<Option<f64>> = scatters.iter().map(|&d| sweep.crossing_radius(d)).collect();
    let listed: Vec<String> = scatters
        .iter()
        .zip(&crossings)
        .map(|(d, c)| match c {
            Some(r) => format!("δα_c = {d}: {:.3} cm", r * 100.0),
            None => format!("δα_c = {d}: none"),
        })
        .collect();
    let measured = format!(
        "{converged}/{} rows converged; monotone {monotone}; ordered {ordered}; crossings [{}]; max |SSMD − 2| {closure:.2e}",
        sweep.rows.len(),
        listed.join(", ")
    );
    let passed = converged == sweep.rows.len() && monotone && ordered && crossings.iter().all(Option::is_some) && closure < 1e-3;
    (measured, passed)
}

fn analytic_solver() -> Check {
    let b = Builder::new(11, "analytic solver case", "|α|² = 4", "1e-6");
    let mut c = vec![0.0; 8];
    c[3] = 1.0;
    let outcome = SchmidtModel::new(c).map_err(s).and_then(|schmidt| {
        let p = DetectionPipeline {
            signal_column: unit(8, 3),
            noise_column: unit(8, 0),
            schmidt,
            background: vec![0.0; 8],
            eta: 1.0,
            eta_c: 1.0,
            alpha_c: Complex64::new(0.0, 0.0),
            scatter: Complex64::new(0.0, 0.0),
            thermal_scaling: ThermalScaling::Unscaled,
            target_ssmd: 2.0,
            max_alpha_sq: DetectionPipeline::DEFAULT_MAX_ALPHA_SQ,
        };
        let m = min_signal_for_target(&p).map_err(s)?;
        Ok((format!("|α|² = {:.12}", m.alpha_sq), (m.alpha_sq - 4.0).abs() <= 1e-6))
    });
    b.finish(outcome)
}
