//! One function per CLI command. Each returns the bytes to emit plus an
//! optional failure that still lets partial output be written.

use std::fmt::Write as _;

use rayon::prelude::*;

use qpms_core::atmosphere::{Compensation, OverlapMatrix, OverlapProblem};
use qpms_core::beam_optics::{SmmMethod, SmmResult};
use qpms_core::detection::{check_radii, closed_form_min_signal, link_efficiency, min_signal_for_target, ScenarioConfig, SweepContext, SweepResult};
use qpms_core::hg_modes::sigma_from_pulse_width;
use qpms_core::constants::angular_frequency;
use qpms_core::radiometry::{per_mode_background, solar_mean_photon_number};
use qpms_core::sfg_stats::{decompose_green_kernel, ThermalScaling};

use crate::io::{fmt_f64, read_kernel_csv, Table};
use crate::{selfcheck, CliError, RunConfig};

pub struct Output {
    pub bytes: Vec<u8>,
    /// Reported after the output has been written.
    pub failure: Option<CliError>,
}

impl Output {
    fn ok(bytes: Vec<u8>) -> Self {
        Self { bytes, failure: None }
    }
}

/// Column-parallel overlap matrix; columns are merged in index order so the
/// result does not depend on scheduling.
pub fn solve_overlap(problem: &OverlapProblem) -> Result<OverlapMatrix, CliError> {
    let columns: Vec<_> = (0..problem.size()).into_par_iter().map(|j| problem.column(j)).collect();
    Ok(problem.assemble(columns)?)
}

pub fn sweep_context(scenario: &ScenarioConfig) -> Result<SweepContext, CliError> {
    let overlap = solve_overlap(&scenario.overlap_problem()?)?;
    Ok(SweepContext::with_overlap(scenario, overlap)?)
}

/// Radius-parallel sweep, rows ordered by radius then δα_c.
pub fn parallel_sweep(ctx: &SweepContext, radii: &[f64], scatters: &[f64]) -> Result<SweepResult, CliError> {
    check_radii(radii)?;
    let rows = radii.par_iter().map(|&r| ctx.rows_for_radius(r, scatters)).collect::<Vec<_>>().concat();
    Ok(SweepResult { rows })
}

/// `key = value` lines.
struct Report(String);

impl Report {
    fn new() -> Self {
        Self(String::new())
    }

    fn num(&mut self, key: &str, v: f64) -> &mut Self {
        self.text(key, &fmt_f64(v))
    }

    fn text(&mut self, key: &str, v: &str) -> &mut Self {
        let _ = writeln!(self.0, "{key} = {v}");
        self
    }

    fn into_bytes(self) -> Vec<u8> {
        self.0.into_bytes()
    }
}

fn scaling_name(s: ThermalScaling) -> &'static str {
    match s {
        ThermalScaling::Unscaled => "unscaled",
        ThermalScaling::LossScaled => "loss-scaled",
    }
}

fn on_off(b: bool) -> &'static str {
    if b {
        "on"
    } else {
        "off"
    }
}

pub fn overlap_matrix(cfg: &RunConfig) -> Result<Output, CliError> {
    let s = cfg.scenario()?;
    let sigma = sigma_from_pulse_width(s.pulse_width, s.beam.wavelength)?;
    let omega0 = angular_frequency(s.beam.wavelength);
    let n = s.schmidt.len();
    let mut t = Table::new(["compensated", "k", "j", "re", "im", "abs2"])?;
    t.comment("pulse_width_ps", fmt_f64(cfg.pulse_width_ps));
    t.comment("modes", n);
    t.comment("gdd_doubled", on_off(cfg.gdd_doubled));
    t.comment("vacuum", cfg.vacuum);
    for compensation in [Compensation::Uncompensated, Compensation::Compensated(s.gdd_convention)] {
        let problem = OverlapProblem::new(&s.atmosphere, n, sigma, omega0, compensation, s.spectral_samples)?;
        let m = solve_overlap(&problem)?;
        let flag = if compensation.is_compensated() { "1" } else { "0" };
        for j in 0..n {
            for k in 0..n {
                let c = m.get(k, j);
                t.row([flag.to_string(), k.to_string(), j.to_string(), fmt_f64(c.re), fmt_f64(c.im), fmt_f64(c.norm_sqr())])?;
            }
        }
    }
    Ok(Output::ok(t.into_bytes()?))
}

fn smm_lines(r: &mut Report, prefix: &str, smm: &SmmResult) {
    r.num(&format!("{prefix}c_smm"), smm.value);
    r.text(
        &format!("{prefix}method"),
        match smm.method {
            SmmMethod::Quadrature => "quadrature",
            SmmMethod::TransparentMask => "transparent-mask",
        },
    );
    r.text(&format!("{prefix}source_nodes"), &smm.source_nodes.to_string());
    r.text(&format!("{prefix}receiver_nodes"), &smm.receiver_nodes.to_string());
    r.num(&format!("{prefix}refinement_change"), smm.refinement_change);
    r.num(&format!("{prefix}fresnel_number"), smm.fresnel_number);
    r.text(&format!("{prefix}fraunhofer_valid"), &smm.fraunhofer_valid.to_string());
}

pub fn smm(cfg: &RunConfig) -> Result<Output, CliError> {
    let s = cfg.scenario()?;
    let (smm, eta) = link_efficiency(&s, s.qpms_reflector)?;
    let (conv, eta_c) = link_efficiency(&s, s.conventional_reflector)?;
    let mut r = Report::new();
    r.num("reflector_radius_um", s.qpms_reflector.radius * 1e6).num("reflectivity", s.qpms_reflector.reflectivity);
    smm_lines(&mut r, "", &smm);
    r.num("eta", eta);
    r.num("conventional_reflector_radius_um", s.conventional_reflector.radius * 1e6);
    smm_lines(&mut r, "conventional_", &conv);
    r.num("eta_c", eta_c);
    Ok(Output::ok(r.into_bytes()))
}

pub fn background(cfg: &RunConfig) -> Result<Output, CliError> {
    let s = cfg.scenario()?;
    let total = solar_mean_photon_number(&cfg.solar())?;
    let mut t = Table::new(["mode", "n_b"])?;
    t.comment("n_b_total", fmt_f64(total));
    t.comment("n_b_per_mode", fmt_f64(per_mode_background(total, s.schmidt.len())?));
    t.comment("receiver_area_m2", fmt_f64(cfg.solar().receiver_area));
    for (n, b) in s.background.iter().enumerate() {
        t.row([n.to_string(), fmt_f64(*b)])?;
    }
    Ok(Output::ok(t.into_bytes()?))
}

pub fn min_signal(cfg: &RunConfig) -> Result<Output, CliError> {
    let s = cfg.scenario()?;
    let ctx = sweep_context(&s)?;
    let (smm, eta) = link_efficiency(&s, s.qpms_reflector)?;
    let p = ctx.pipeline(eta, cfg.delta_alpha_c);
    let m = min_signal_for_target(&p)?;
    let noise = p.noise_stats()?;
    let alpha_c_sq = s.conventional.amplitude.norm_sqr();
    let mut r = Report::new();
    r.num("reflector_radius_um", s.qpms_reflector.radius * 1e6)
        .num("c_smm", smm.value)
        .num("eta", eta)
        .num("eta_c", ctx.eta_c)
        .num("delta_alpha_c", cfg.delta_alpha_c)
        .num("alpha_c_sq", alpha_c_sq)
        .num("alpha_sq", m.alpha_sq)
        .num("ratio", m.alpha_sq / alpha_c_sq)
        .num("ssmd", m.ssmd)
        .num("target_ssmd", s.target_ssmd)
        .num("signal_mean", m.signal_mean)
        .num("noise_mean", noise.total_mean)
        .num("noise_variance", noise.total_variance)
        .num("closed_form_alpha_sq", closed_form_min_signal(&p)?)
        .text("iterations", &m.iterations.to_string())
        .text("gdd_doubled", on_off(cfg.gdd_doubled))
        .text("thermal_scaling", scaling_name(s.thermal_scaling));
    Ok(Output::ok(r.into_bytes()))
}

pub fn sweep(cfg: &RunConfig) -> Result<Output, CliError> {
    let s = cfg.scenario()?;
    let ctx = sweep_context(&s)?;
    let result = parallel_sweep(&ctx, &cfg.sweep_radii(), &cfg.sweep_delta_alpha_c)?;
    let mut t = Table::new(["radius_um", "delta_alpha_c", "alpha_sq", "ratio", "ssmd", "converged", "error"])?;
    let mut constants = toml::map::Map::new();
    if let toml::Value::Table(all) = toml::Value::try_from(cfg).map_err(|e| CliError::Usage(e.to_string()))? {
        constants = all;
    }
    for (key, value) in &constants {
        if !key.starts_with("sweep_") && key != "kernel_file" && key != "decompose_basis_size" {
            t.comment(key, value);
        }
    }
    t.comment("eta_c", fmt_f64(ctx.eta_c));
    t.comment("thermal_scaling", scaling_name(s.thermal_scaling));
    for row in &result.rows {
        t.row([
            fmt_f64(row.radius * 1e6),
            fmt_f64(row.delta_alpha_c),
            fmt_f64(row.alpha_sq),
            fmt_f64(row.ratio),
            fmt_f64(row.ssmd),
            row.converged.to_string(),
            row.error.clone().unwrap_or_default(),
        ])?;
    }
    let failed = result.rows.iter().filter(|r| !r.converged).count();
    let failure = (failed > 0).then(|| CliError::Numerical(format!("{failed} of {} sweep rows did not converge", result.rows.len())));
    Ok(Output { bytes: t.into_bytes()?, failure })
}

pub fn decompose(cfg: &RunConfig) -> Result<Output, CliError> {
    let path = cfg.kernel_file.as_ref().ok_or_else(|| CliError::Usage("decompose needs kernel_file in the config".into()))?;
    let kernel = read_kernel_csv(&cfg.resolve(path))?;
    let sigma = sigma_from_pulse_width(cfg.pulse_width(), cfg.wavelength())?;
    let d = decompose_green_kernel(&kernel, sigma, cfg.decompose_basis_size)?;
    if d.truncation_warning {
        eprintln!(
            "warning: reconstruction error {:.3e} with {} HG modes; the basis is too small for this kernel",
            d.reconstruction_error, cfg.decompose_basis_size
        );
    }
    let mut t = Table::new(["schmidt_index", "lambda", "hg_order", "v_re", "v_im", "u_re", "u_im"])?;
    t.comment("basis_size", cfg.decompose_basis_size);
    t.comment("reconstruction_error", fmt_f64(d.reconstruction_error));
    t.comment("truncation_warning", d.truncation_warning);
    let v = d.model.mixing().ok_or_else(|| CliError::Numerical("decomposition returned no mixing matrix".into()))?;
    for (n, lambda) in d.model.coefficients().iter().enumerate() {
        for k in 0..v.nrows() {
            let (vk, uk) = (v[(k, n)], d.output_vectors[(k, n)]);
            t.row([n.to_string(), fmt_f64(*lambda), k.to_string(), fmt_f64(vk.re), fmt_f64(vk.im), fmt_f64(uk.re), fmt_f64(uk.im)])?;
        }
    }
    Ok(Output::ok(t.into_bytes()?))
}

pub fn selfcheck(cfg: &RunConfig) -> Result<Output, CliError> {
    let mut checks = Vec::new();
    if let Some(p) = &cfg.schmidt_file {
        let raw = crate::io::read_schmidt_coefficients(&cfg.resolve(p))?;
        checks.push(selfcheck::schmidt_file_check(&raw));
    }
    checks.extend(selfcheck::run_all());
    let mut text = String::new();
    for c in &checks {
        let _ = writeln!(text, "{c}");
    }
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| c.name.to_string()).collect();
    let _ = writeln!(text, "{} of {} checks passed", checks.len() - failed.len(), checks.len());
    let failure = (!failed.is_empty()).then(|| CliError::Acceptance(format!("failed: {}", failed.join(", "))));
    Ok(Output { bytes: text.into_bytes(), failure })
}
