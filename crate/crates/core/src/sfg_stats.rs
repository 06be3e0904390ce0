//! Idler photon-number statistics of mode-selective sum-frequency conversion.
//!
//! Each input temporal mode carries a displaced thermal state: a coherent
//! amplitude on top of thermal occupation `n̄`. Conversion of Schmidt mode `n`
//! acts as a beamsplitter of transmissivity `λ_n²` towards the idler, so the
//! idler moments follow from the input moments alone:
//!
//! ```text
//! ⟨b†b⟩     = λ² ⟨A†A⟩
//! ⟨(b†b)²⟩  = λ⁴ ⟨(A†A)²⟩ + λ²(1 − λ²) ⟨A†A⟩
//! ```

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)] // inherent methods shadow it when std is linked
use num_traits::Float;

use crate::error::{bail, Result};
use crate::hg_modes::{hg_time_amplitude, TemporalModeSpec, UniformGrid};

/// Orthonormality tolerance for mixing matrices.
pub const ORTHONORMAL_TOLERANCE: f64 = 1e-8;
/// Most negative variance tolerated as round-off.
const VARIANCE_FLOOR: f64 = -1e-12;
/// Reconstruction error above which a decomposition is flagged as truncated.
pub const TRUNCATION_WARNING: f64 = 0.05;

/// Conversion efficiencies `λ_n` per Schmidt mode, optionally with the map
/// from HG orders to Schmidt modes.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtModel {
    coefficients: Vec<f64>,
    /// `V_{j,n} = ⟨f_j|φ_n⟩`: rows are HG orders, columns Schmidt modes.
    mixing: Option<DMatrix<Complex64>>,
}

impl SchmidtModel {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() {
            bail!(InvalidArgument, "a Schmidt model needs at least one coefficient");
        }
        if let Some((n, l)) = coefficients.iter().enumerate().find(|(_, l)| !(0.0..=1.0).contains(*l)) {
            bail!(InvalidArgument, "coefficient λ_{n} = {l} is outside [0, 1]");
        }
        Ok(Self { coefficients, mixing: None })
    }

    pub fn with_mixing(coefficients: Vec<f64>, mixing: DMatrix<Complex64>) -> Result<Self> {
        let mut model = Self::new(coefficients)?;
        if mixing.ncols() != model.coefficients.len() {
            bail!(
                InvalidArgument,
                "mixing matrix has {} columns for {} coefficients",
                mixing.ncols(),
                model.coefficients.len()
            );
        }
        check_orthonormal(&mixing)?;
        model.mixing = Some(mixing);
        Ok(model)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn mixing(&self) -> Option<&DMatrix<Complex64>> {
        self.mixing.as_ref()
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.coefficients.iter().map(|l| l * l).sum()
    }
}

/// The conversion profile used throughout: strongest on order 3 with weaker
/// leakage into its neighbours, 40 modes.
pub fn default_schmidt_model() -> SchmidtModel {
    let mut c = vec![0.0; crate::constants::DEFAULT_MODE_COUNT];
    c[3] = 0.7;
    c[2] = 0.07;
    c[4] = 0.07;
    for n in [0, 1, 5, 6] {
        c[n] = 0.014;
    }
    SchmidtModel { coefficients: c, mixing: None }
}

fn check_orthonormal(v: &DMatrix<Complex64>) -> Result<()> {
    let gram = v.adjoint() * v;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let expected = if i == j { 1.0 } else { 0.0 };
            let dev = (gram[(i, j)] - expected).norm();
            if dev > ORTHONORMAL_TOLERANCE {
                bail!(InvalidArgument, "mixing columns are not orthonormal: Gram entry ({i}, {j}) is off by {dev:.2e}");
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Moments
// ---------------------------------------------------------------------------

/// First two moments of a mode's photon number. The variance is carried
/// alongside the raw second moment so large means do not lose it to
/// cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeMoments {
    pub mean: f64,
    pub second_moment: f64,
    pub variance: f64,
}

impl ModeMoments {
    /// From raw moments; the variance is their difference.
    pub fn from_raw(mean: f64, second_moment: f64) -> Self {
        Self { mean, second_moment, variance: second_moment - mean * mean }
    }

    /// Displaced thermal state with coherent intensity `y = |β|²` and thermal
    /// occupation `n̄`: second moment `y(4n̄ + y) + 2n̄² + y + n̄`.
    pub fn displaced_thermal(y: f64, thermal: f64) -> Self {
        let mean = y + thermal;
        Self {
            mean,
            second_moment: y * (4.0 * thermal + y) + 2.0 * thermal * thermal + mean,
            variance: y * (2.0 * thermal + 1.0) + thermal * (thermal + 1.0),
        }
    }
}

/// Per-mode coherent amplitudes and thermal occupations.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeState {
    pub amplitudes: Vec<Complex64>,
    pub thermal: Vec<f64>,
}

impl ModeState {
    pub fn new(amplitudes: Vec<Complex64>, thermal: Vec<f64>) -> Result<Self> {
        if amplitudes.len() != thermal.len() {
            bail!(InvalidArgument, "{} amplitudes but {} thermal occupations", amplitudes.len(), thermal.len());
        }
        if let Some(n) = thermal.iter().find(|n| !(**n >= 0.0)) {
            bail!(InvalidArgument, "thermal occupation must be non-negative, got {n}");
        }
        Ok(Self { amplitudes, thermal })
    }

    pub fn moments(&self) -> Vec<ModeMoments> {
        self.amplitudes
            .iter()
            .zip(&self.thermal)
            .map(|(a, &n)| ModeMoments::displaced_thermal(a.norm_sqr(), n))
            .collect()
    }

    /// Re-expresses the state in the Schmidt basis: `a_n = Σ_j V*_{j,n} α_j`,
    /// `n̄_n = Σ_j |V_{j,n}|² n̄_j`.
    pub fn project(&self, mixing: &DMatrix<Complex64>) -> Result<Self> {
        if mixing.nrows() != self.amplitudes.len() {
            bail!(
                InvalidArgument,
                "mixing matrix has {} rows for {} input modes",
                mixing.nrows(),
                self.amplitudes.len()
            );
        }
        check_orthonormal(mixing)?;
        let (amplitudes, thermal) = (0..mixing.ncols())
            .map(|n| {
                let col = mixing.column(n);
                let a: Complex64 = col.iter().zip(&self.amplitudes).map(|(v, a)| v.conj() * a).sum();
                let t: f64 = col.iter().zip(&self.thermal).map(|(v, t)| v.norm_sqr() * t).sum();
                (a, t)
            })
            .unzip();
        Ok(Self { amplitudes, thermal })
    }
}

fn check_efficiency(name: &str, eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta <= 1.0) {
        bail!(InvalidArgument, "{name} must lie in (0, 1], got {eta}");
    }
    Ok(())
}

/// Signal-only state: amplitude `√η · c_{n,j} · α` on every mode `n`.
pub fn signal_state(alpha: Complex64, eta: f64, column: &[Complex64]) -> Result<ModeState> {
    check_efficiency("η", eta)?;
    let amplitudes = column.iter().map(|c| c * alpha * eta.sqrt()).collect();
    ModeState::new(amplitudes, vec![0.0; column.len()])
}

pub fn signal_input_moments(alpha: Complex64, eta: f64, column: &[Complex64]) -> Result<Vec<ModeMoments>> {
    Ok(signal_state(alpha, eta, column)?.moments())
}

/// Whether the per-mode background occupation is scaled by the transmitter
/// leg's loss `(1 − η_c)` before it enters the noise state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThermalScaling {
    /// Background occupation used directly.
    #[default]
    Unscaled,
    /// Background occupation multiplied by `1 − η_c`.
    LossScaled,
}

/// Noise-only state: amplitude `√η_c · c_{n,0} · α_c + δα_c` and thermal
/// occupation `n̄_{B,n}` on every mode `n`.
pub fn noise_state(
    alpha_c: Complex64,
    scatter: Complex64,
    eta_c: f64,
    column: &[Complex64],
    background: &[f64],
    scaling: ThermalScaling,
) -> Result<ModeState> {
    check_efficiency("η_c", eta_c)?;
    if background.len() != column.len() {
        bail!(InvalidArgument, "{} background occupations for {} modes", background.len(), column.len());
    }
    let factor = match scaling {
        ThermalScaling::Unscaled => 1.0,
        ThermalScaling::LossScaled => 1.0 - eta_c,
    };
    let amplitudes = column.iter().map(|c| c * alpha_c * eta_c.sqrt() + scatter).collect();
    ModeState::new(amplitudes, background.iter().map(|n| n * factor).collect())
}

pub fn noise_input_moments(
    alpha_c: Complex64,
    scatter: Complex64,
    eta_c: f64,
    column: &[Complex64],
    background: &[f64],
    scaling: ThermalScaling,
) -> Result<Vec<ModeMoments>> {
    Ok(noise_state(alpha_c, scatter, eta_c, column, background, scaling)?.moments())
}

/// Idler statistics after conversion.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionStats {
    pub per_mode_mean: Vec<f64>,
    pub per_mode_variance: Vec<f64>,
    pub total_mean: f64,
    /// Sum of per-mode variances (modes are independent).
    pub total_variance: f64,
}

impl DetectionStats {
    pub fn total_std(&self) -> f64 {
        self.total_variance.sqrt()
    }
}

/// Maps input moments through the conversion efficiencies.
pub fn convert(moments: &[ModeMoments], model: &SchmidtModel) -> Result<DetectionStats> {
    if moments.len() != model.len() {
        bail!(InvalidArgument, "{} mode moments for a {}-mode Schmidt model", moments.len(), model.len());
    }
    let mut per_mode_mean = Vec::with_capacity(moments.len());
    let mut per_mode_variance = Vec::with_capacity(moments.len());
    for (n, (m, &l)) in moments.iter().zip(model.coefficients()).enumerate() {
        let t = l * l;
        let mean = t * m.mean;
        // ⟨(b†b)²⟩ − ⟨b†b⟩² with λ⁴⟨A†A⟩² cancelled analytically.
        let variance = t * t * m.variance + t * (1.0 - t) * m.mean;
        if variance < VARIANCE_FLOOR * (mean * mean + mean).max(1.0) {
            bail!(Internal, "mode {n}: output variance {variance:e} is negative; input moments are inconsistent");
        }
        per_mode_mean.push(mean);
        per_mode_variance.push(variance.max(0.0));
    }
    Ok(DetectionStats {
        total_mean: per_mode_mean.iter().sum(),
        total_variance: per_mode_variance.iter().sum(),
        per_mode_mean,
        per_mode_variance,
    })
}

/// Converts a state given in the HG basis, projecting onto the Schmidt modes
/// first when the model carries a mixing matrix.
pub fn convert_state(state: &ModeState, model: &SchmidtModel) -> Result<DetectionStats> {
    match model.mixing() {
        Some(v) => convert(&state.project(v)?.moments(), model),
        None => convert(&state.moments(), model),
    }
}

// ---------------------------------------------------------------------------
// Number-basis oracle
// ---------------------------------------------------------------------------

/// `⟨n⟩` and `⟨n²⟩` of a displaced thermal state after loss `λ²`, computed in
/// a truncated number basis without using the moment formulas above.
pub fn fock_oracle_moments(alpha: Complex64, thermal: f64, lambda: f64, cutoff: usize) -> Result<(f64, f64)> {
    if !(thermal >= 0.0) || !(0.0..=1.0).contains(&lambda) {
        bail!(InvalidArgument, "need n̄ ≥ 0 and λ ∈ [0, 1]");
    }
    if cutoff < 2 {
        bail!(InvalidArgument, "cutoff must be at least 2");
    }
    let x = alpha.norm_sqr();
    // Thermal weights p_k = n̄^k/(1+n̄)^{k+1}.
    let ratio = thermal / (1.0 + thermal);
    let weights: Vec<f64> = (0..cutoff).map(|k| ratio.powi(k as i32) / (1.0 + thermal)).collect();

    // Diagonal of ρ = Σ_k p_k D|k⟩⟨k|D†.
    let mut input = vec![0.0; cutoff];
    for (k, &p) in weights.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for (m, slot) in input.iter_mut().enumerate() {
            *slot += p * displaced_number_probability(m, k, x);
        }
    }
    let deficit = 1.0 - input.iter().sum::<f64>();
    if deficit > 1e-8 {
        bail!(Cutoff, "cutoff {cutoff} leaves a norm deficit of {deficit:.2e}");
    }

    // Binomial loss with transmissivity T = λ²: P'(j) = Σ_n P(n) C(n,j) T^j (1−T)^{n−j}.
    let t = lambda * lambda;
    let mut output = vec![0.0; cutoff];
    for (n, &p) in input.iter().enumerate() {
        let mut binom = 1.0;
        for (j, slot) in output.iter_mut().enumerate().take(n + 1) {
            if j > 0 {
                binom *= (n + 1 - j) as f64 / j as f64;
            }
            *slot += p * binom * t.powi(j as i32) * (1.0 - t).powi((n - j) as i32);
        }
    }
    let mean = output.iter().enumerate().map(|(j, p)| j as f64 * p).sum();
    let second = output.iter().enumerate().map(|(j, p)| (j * j) as f64 * p).sum();
    Ok((mean, second))
}

/// `|⟨m|D(α)|k⟩|²` with `x = |α|²`:
/// `(n<!/n>!) x^{n>−n<} e^{−x} [L_{n<}^{(n>−n<)}(x)]²`.
fn displaced_number_probability(m: usize, k: usize, x: f64) -> f64 {
    let (lo, hi) = if m < k { (m, k) } else { (k, m) };
    let d = hi - lo;
    let mut ln_ratio = 0.0;
    for i in lo + 1..=hi {
        ln_ratio -= (i as f64).ln();
    }
    let lag = laguerre(lo, d as f64, x);
    if x == 0.0 {
        return if d == 0 { lag * lag } else { 0.0 };
    }
    (ln_ratio + d as f64 * x.ln() - x).exp() * lag * lag
}

/// Generalized Laguerre polynomial `L_n^{(a)}(x)` by upward recurrence.
fn laguerre(n: usize, a: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + a - x;
    for i in 1..n {
        let i = i as f64;
        let next = ((2.0 * i + 1.0 + a - x) * cur - (i + a) * prev) / (i + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

// ---------------------------------------------------------------------------
// Green-kernel decomposition
// ---------------------------------------------------------------------------

/// Conversion kernel `G(t, t')` sampled on a square time grid centred on 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledKernel {
    pub grid: UniformGrid,
    /// Row-major: `G(t_i, t'_j)` at `i·n + j`.
    pub values: Vec<Complex64>,
}

impl SampledKernel {
    pub fn new(grid: UniformGrid, values: Vec<Complex64>) -> Result<Self> {
        let n = grid.samples();
        if values.len() != n * n {
            bail!(InvalidArgument, "kernel needs {} samples for a {n}-point grid, got {}", n * n, values.len());
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn<F: Fn(f64, f64) -> Complex64>(grid: UniformGrid, f: F) -> Self {
        let n = grid.samples();
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                values.push(f(grid.point(i), grid.point(j)));
            }
        }
        Self { grid, values }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelDecomposition {
    /// Singular values (descending) with the input-side vectors as mixing.
    pub model: SchmidtModel,
    /// Output-side vectors `U_{k,n} = ⟨f_k|ψ_n⟩`.
    pub output_vectors: DMatrix<Complex64>,
    /// `‖G − Σ λ_n ψ_n φ_n*‖ / ‖G‖` on the sampling grid.
    pub reconstruction_error: f64,
    pub truncation_warning: bool,
}

/// Projects the kernel onto `basis_size` time-domain HG modes of spectral
/// width `sigma` and takes the singular value decomposition of the result.
pub fn decompose_green_kernel(kernel: &SampledKernel, sigma: f64, basis_size: usize) -> Result<KernelDecomposition> {
    if basis_size == 0 || basis_size > crate::constants::DEFAULT_MODE_COUNT {
        bail!(InvalidArgument, "basis size must be between 1 and 40, got {basis_size}");
    }
    let grid = kernel.grid;
    let n = grid.samples();
    let modes: Vec<Vec<Complex64>> = (0..basis_size)
        .map(|j| Ok(hg_time_amplitude(&TemporalModeSpec::new(j, 0.0, sigma)?, &grid)?.values))
        .collect::<Result<_>>()?;
    let w: Vec<f64> = (0..n).map(|i| grid.weight(i)).collect();

    // P_{kj} = Σ_{a,b} w_a w_b f_k*(t_a) G(t_a, t_b) f_j(t_b), in two stages.
    let mut half = vec![Complex64::new(0.0, 0.0); basis_size * n];
    for (k, fk) in modes.iter().enumerate() {
        for a in 0..n {
            let coeff = fk[a].conj() * w[a];
            let row = &kernel.values[a * n..(a + 1) * n];
            for (b, g) in row.iter().enumerate() {
                half[k * n + b] += coeff * g;
            }
        }
    }
    let projected = DMatrix::from_fn(basis_size, basis_size, |k, j| {
        (0..n).map(|b| half[k * n + b] * modes[j][b] * w[b]).sum::<Complex64>()
    });

    let svd = projected.clone().svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => bail!(Internal, "singular value decomposition returned no vectors"),
    };
    let mut order: Vec<usize> = (0..basis_size).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let v_full = v_t.adjoint();

    let mut values = Vec::with_capacity(basis_size);
    let mut v = DMatrix::zeros(basis_size, basis_size);
    let mut out = DMatrix::zeros(basis_size, basis_size);
    for (col, &idx) in order.iter().enumerate() {
        let s = svd.singular_values[idx];
        if s > 1.0 + 1e-9 {
            bail!(InvalidArgument, "kernel has singular value {s:.6} > 1; conversion efficiencies cannot exceed one");
        }
        values.push(s.min(1.0));
        // Make the largest-magnitude input entry real positive; rotate the
        // output vector by the same phase so λ stays real.
        let vc = v_full.column(idx);
        let pivot = (0..basis_size).fold(0, |best, r| if vc[r].norm() > vc[best].norm() { r } else { best });
        let phase = if vc[pivot].norm() > 0.0 { vc[pivot].conj() / vc[pivot].norm() } else { Complex64::new(1.0, 0.0) };
        for r in 0..basis_size {
            v[(r, col)] = vc[r] * phase;
            out[(r, col)] = u[(r, idx)] * phase;
        }
    }

    // Reconstruction from the truncated expansion, weighted Frobenius norm.
    let (mut err, mut norm) = (0.0, 0.0);
    let mut rec_half = vec![Complex64::new(0.0, 0.0); basis_size * n];
    for k in 0..basis_size {
        for b in 0..n {
            rec_half[k * n + b] = (0..basis_size).map(|j| projected[(k, j)] * modes[j][b].conj()).sum();
        }
    }
    for a in 0..n {
        for b in 0..n {
            let rec: Complex64 = (0..basis_size).map(|k| modes[k][a] * rec_half[k * n + b]).sum();
            let g = kernel.values[a * n + b];
            let ww = w[a] * w[b];
            err += (g - rec).norm_sqr() * ww;
            norm += g.norm_sqr() * ww;
        }
    }
    let reconstruction_error = if norm > 0.0 { (err / norm).sqrt() } else { 0.0 };
    Ok(KernelDecomposition {
        model: SchmidtModel::with_mixing(values, v)?,
        output_vectors: out,
        reconstruction_error,
        truncation_warning: reconstruction_error > TRUNCATION_WARNING,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_column(n: usize, j: usize) -> Vec<Complex64> {
        (0..n).map(|k| Complex64::new(if k == j { 1.0 } else { 0.0 }, 0.0)).collect()
    }

    #[test]
    fn default_model() {
        let m = default_schmidt_model();
        assert_eq!(m.len(), 40);
        assert_eq!(m.coefficients()[3], 0.7);
        assert_eq!(m.coefficients()[7], 0.0);
        assert!((m.sum_of_squares() - (0.49 + 2.0 * 0.0049 + 4.0 * 0.000196)).abs() < 1e-15);
        assert!(SchmidtModel::new(vec![0.5, 1.5]).is_err());
    }

    #[test]
    fn signal_moments() {
        let col = unit_column(8, 3);
        let zero = signal_input_moments(Complex64::new(0.0, 0.0), 1.0, &col).unwrap();
        assert!(zero.iter().all(|m| m.mean == 0.0 && m.second_moment == 0.0));
        let m = signal_input_moments(Complex64::new(2.0, 0.0), 1.0, &col).unwrap();
        assert_eq!((m[3].mean, m[3].second_moment), (4.0, 20.0));
        let mut col = col;
        col[3] = Complex64::from_polar(0.99f64.sqrt(), 0.3);
        let m = signal_input_moments(Complex64::new(10.0, 0.0), 0.5, &col).unwrap();
        assert!((m[3].mean - 49.5).abs() < 1e-12);
        assert!((m[3].second_moment - 49.5 * 50.5).abs() < 1e-9);
        assert!(signal_input_moments(Complex64::new(1.0, 0.0), 0.0, &col).is_err());
    }

    #[test]
    fn noise_moments() {
        let col = unit_column(4, 0);
        let zero = Complex64::new(0.0, 0.0);
        let m = noise_input_moments(zero, zero, 1.0, &col, &[0.5; 4], ThermalScaling::Unscaled).unwrap();
        assert!(m.iter().all(|m| m.mean == 0.5 && m.second_moment == 1.0));
        let m = noise_input_moments(Complex64::new(2.0, 0.0), zero, 1.0, &col, &[0.0; 4], ThermalScaling::Unscaled).unwrap();
        assert_eq!((m[0].mean, m[0].second_moment), (4.0, 20.0));
        assert_eq!(m[1].mean, 0.0);
        let m = ModeMoments::displaced_thermal(1.0, 0.1);
        assert!((m.mean - 1.1).abs() < 1e-15 && (m.second_moment - 2.52).abs() < 1e-14);
        let scaled = noise_state(zero, zero, 0.25, &col, &[0.4; 4], ThermalScaling::LossScaled).unwrap();
        assert!((scaled.thermal[2] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn convert_limits() {
        let moments: Vec<ModeMoments> = (0..5).map(|i| ModeMoments::displaced_thermal(i as f64, 0.2)).collect();
        let one = convert(&moments, &SchmidtModel::new(vec![1.0; 5]).unwrap()).unwrap();
        for (i, m) in moments.iter().enumerate() {
            assert!((one.per_mode_mean[i] - m.mean).abs() < 1e-15);
            assert!((one.per_mode_variance[i] - m.variance).abs() < 1e-12);
        }
        let none = convert(&moments, &SchmidtModel::new(vec![0.0; 5]).unwrap()).unwrap();
        assert_eq!((none.total_mean, none.total_variance), (0.0, 0.0));
        let x = 3.7;
        let mut c = vec![0.0; 5];
        c[3] = 0.7;
        let coh = convert(&[ModeMoments::displaced_thermal(0.0, 0.0), ModeMoments::displaced_thermal(0.0, 0.0), ModeMoments::displaced_thermal(0.0, 0.0), ModeMoments::displaced_thermal(x, 0.0), ModeMoments::displaced_thermal(0.0, 0.0)], &SchmidtModel::new(c).unwrap()).unwrap();
        assert!((coh.per_mode_mean[3] - 0.49 * x).abs() < 1e-14);
        assert!((coh.per_mode_variance[3] - 0.49 * x).abs() < 1e-13);
        let bad = [ModeMoments::from_raw(2.0, 1.0)];
        assert!(matches!(convert(&bad, &SchmidtModel::new(vec![1.0]).unwrap()), Err(crate::Error::Internal(_))));
    }

    #[test]
    fn oracle_simple_states() {
        let (m, s) = fock_oracle_moments(Complex64::new(1.0, 0.0), 0.0, 1.0, 30).unwrap();
        assert!((m - 1.0).abs() < 1e-12 && (s - 2.0).abs() < 1e-12);
        let (m, s) = fock_oracle_moments(Complex64::new(0.0, 0.0), 0.3, 1.0, 30).unwrap();
        assert!((m - 0.3).abs() < 1e-12 && (s - 0.48).abs() < 1e-12);
        assert!(matches!(fock_oracle_moments(Complex64::new(3.0, 0.0), 0.5, 1.0, 10), Err(crate::Error::Cutoff(_))));
    }

    #[test]
    fn oracle_matches_formulas() {
        let alpha = Complex64::new(0.6, 0.8);
        let (m, s) = fock_oracle_moments(alpha, 0.2, 0.7, 40).unwrap();
        let stats = convert(&[ModeMoments::displaced_thermal(1.0, 0.2)], &SchmidtModel::new(vec![0.7]).unwrap()).unwrap();
        let second = stats.per_mode_variance[0] + stats.per_mode_mean[0].powi(2);
        assert!((m - stats.total_mean).abs() / m < 1e-10);
        assert!((s - second).abs() / s < 1e-10);
    }

    #[test]
    fn projection() {
        let state = ModeState::new(vec![Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0)], vec![0.1; 3]).unwrap();
        let id = DMatrix::<Complex64>::identity(3, 3);
        assert_eq!(state.project(&id).unwrap(), state);
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let mut v = DMatrix::<Complex64>::zeros(3, 3);
        v[(1, 0)] = Complex64::new(h, 0.0);
        v[(2, 0)] = Complex64::new(h, 0.0);
        v[(1, 1)] = Complex64::new(h, 0.0);
        v[(2, 1)] = Complex64::new(-h, 0.0);
        v[(0, 2)] = Complex64::new(1.0, 0.0);
        let p = state.project(&v).unwrap();
        assert!((p.amplitudes[0] - Complex64::new(2.0 * h, 0.0)).norm() < 1e-15);
        assert!(p.thermal.iter().all(|t| (t - 0.1).abs() < 1e-15));
        v[(0, 2)] = Complex64::new(2.0, 0.0);
        assert!(state.project(&v).is_err());
    }

    #[test]
    fn laguerre_closed_forms() {
        let x = 1.3;
        let a = 2.0;
        assert!((laguerre(2, a, x) - (x * x / 2.0 - (a + 2.0) * x + (a + 2.0) * (a + 1.0) / 2.0)).abs() < 1e-14);
        // ⟨m|D|0⟩ is Poissonian.
        let p: f64 = (0..5).map(|m| displaced_number_probability(m, 0, x)).sum();
        let poisson: f64 = (0..5).map(|m| (-x).exp() * x.powi(m) / (1..=m).map(|i| i as f64).product::<f64>()).sum();
        assert!((p - poisson).abs() < 1e-14);
    }
}
