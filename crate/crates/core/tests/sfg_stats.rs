use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use qpms_core::hg_modes::{hg_time_amplitude, TemporalModeSpec, UniformGrid};
use qpms_core::sfg_stats::{
    convert, decompose_green_kernel, default_schmidt_model, fock_oracle_moments, signal_input_moments, ModeMoments,
    SampledKernel, SchmidtModel,
};

const SIGMA: f64 = 1.178e10;

fn single(moments: ModeMoments, lambda: f64) -> (f64, f64) {
    let s = convert(&[moments], &SchmidtModel::new(vec![lambda]).unwrap()).unwrap();
    (s.total_mean, s.total_variance)
}

proptest! {
    #[test]
    fn coherent_input_stays_poissonian(y in 0.0f64..1e6, lambda in 0.0f64..=1.0) {
        let (mean, var) = single(ModeMoments::displaced_thermal(y, 0.0), lambda);
        prop_assert!((var - mean).abs() <= 1e-12 * mean.max(1e-300));
    }

    #[test]
    fn thermal_input_stays_thermal(n in 0.0f64..100.0, lambda in 0.0f64..=1.0) {
        let (mean, var) = single(ModeMoments::displaced_thermal(0.0, n), lambda);
        let m = lambda * lambda * n;
        prop_assert!((mean - m).abs() <= 1e-15 * m.max(1e-300));
        prop_assert!((var - (m * m + m)).abs() <= 1e-12 * (m * m + m).max(1e-300));
    }

    #[test]
    fn oracle_agrees_for_arbitrary_phase(r in 0.0f64..2.0, phase in 0.0f64..6.3, n in 0.0f64..0.5, lambda in 0.0f64..=1.0) {
        let alpha = Complex64::from_polar(r, phase);
        let (om, os) = fock_oracle_moments(alpha, n, lambda, 40).unwrap();
        let (mean, var) = single(ModeMoments::displaced_thermal(r * r, n), lambda);
        let second = var + mean * mean;
        prop_assert!((om - mean).abs() <= 1e-6 * mean.max(1e-12));
        prop_assert!((os - second).abs() <= 1e-6 * second.max(1e-12));
    }

    #[test]
    fn total_mean_grows_with_each_coefficient(n in 0usize..40, bump in 0.0f64..0.3) {
        let base = default_schmidt_model();
        let moments = vec![ModeMoments::displaced_thermal(0.3, 0.01); 40];
        let mut c = base.coefficients().to_vec();
        c[n] = (c[n] + bump).min(1.0);
        let before = convert(&moments, &base).unwrap().total_mean;
        let after = convert(&moments, &SchmidtModel::new(c).unwrap()).unwrap().total_mean;
        prop_assert!(after >= before);
    }
}

#[test]
fn oracle_grid() {
    for r in [0.0, 0.5, 1.0, 2.0] {
        for n in [0.0, 0.1, 0.5] {
            for lambda in [0.014, 0.07, 0.7, 1.0] {
                let (om, os) = fock_oracle_moments(Complex64::new(r, 0.0), n, lambda, 40).unwrap();
                let (mean, var) = single(ModeMoments::displaced_thermal(r * r, n), lambda);
                let second = var + mean * mean;
                if mean == 0.0 {
                    assert!(om.abs() < 1e-15 && os.abs() < 1e-15);
                    continue;
                }
                assert!((om - mean).abs() / mean < 1e-6, "α={r} n̄={n} λ={lambda}");
                assert!((os - second).abs() / second < 1e-6, "α={r} n̄={n} λ={lambda}");
            }
        }
    }
}

#[test]
fn signal_through_default_model() {
    let mut col = vec![Complex64::new(0.0, 0.0); 40];
    col[3] = Complex64::new(1.0, 0.0);
    let m = signal_input_moments(Complex64::new(3.0, 0.0), 1.0, &col).unwrap();
    let s = convert(&m, &default_schmidt_model()).unwrap();
    assert!((s.total_mean - 0.49 * 9.0).abs() < 1e-12);
    assert!((s.total_variance - s.total_mean).abs() < 1e-12);
}

// ---------------------------------------------------------------------------
// Kernel decomposition
// ---------------------------------------------------------------------------

fn time_grid(max_order: usize) -> UniformGrid {
    UniformGrid::for_orders(0.0, 1.0 / SIGMA, max_order, 301).unwrap()
}

fn modes(grid: &UniformGrid, count: usize) -> Vec<Vec<Complex64>> {
    (0..count)
        .map(|j| hg_time_amplitude(&TemporalModeSpec::new(j, 0.0, SIGMA).unwrap(), grid).unwrap().values)
        .collect()
}

/// `Σ_k μ_k u_k(t) v_k*(t')` with `u`, `v` combinations of HG modes.
fn kernel(grid: UniformGrid, terms: &[(f64, Vec<Complex64>, Vec<Complex64>)]) -> SampledKernel {
    let n = grid.samples();
    let size = terms.iter().map(|t| t.1.len().max(t.2.len())).max().unwrap();
    let f = modes(&grid, size);
    let combine = |coeffs: &[Complex64], i: usize| -> Complex64 { coeffs.iter().zip(&f).map(|(c, fj)| c * fj[i]).sum() };
    let mut values = vec![Complex64::new(0.0, 0.0); n * n];
    for (mu, u, v) in terms {
        let us: Vec<Complex64> = (0..n).map(|i| combine(u, i)).collect();
        let vs: Vec<Complex64> = (0..n).map(|i| combine(v, i)).collect();
        for a in 0..n {
            for b in 0..n {
                values[a * n + b] += us[a] * vs[b].conj() * *mu;
            }
        }
    }
    SampledKernel::new(grid, values).unwrap()
}

fn unit(size: usize, j: usize) -> Vec<Complex64> {
    (0..size).map(|k| Complex64::new(if k == j { 1.0 } else { 0.0 }, 0.0)).collect()
}

#[test]
fn separable_kernel_has_one_schmidt_mode() {
    let grid = time_grid(11);
    let k = kernel(grid, &[(0.7, unit(12, 3), unit(12, 3))]);
    let d = decompose_green_kernel(&k, SIGMA, 12).unwrap();
    let c = d.model.coefficients();
    assert!((c[0] - 0.7).abs() < 1e-6);
    assert!(c[1..].iter().all(|&l| l < 1e-6));
    let v = d.model.mixing().unwrap();
    for j in 0..12 {
        let expected = if j == 3 { 1.0 } else { 0.0 };
        assert!((v[(j, 0)] - Complex64::new(expected, 0.0)).norm() < 1e-6);
    }
    assert!(d.reconstruction_error < 1e-3);
    assert!(!d.truncation_warning);
}

#[test]
fn diagonal_kernel_recovers_sorted_values() {
    let mus = [0.05, 0.7, 0.3, 0.014, 0.5, 0.2];
    let grid = time_grid(11);
    let terms: Vec<_> = mus.iter().enumerate().map(|(j, &mu)| (mu, unit(12, j), unit(12, j))).collect();
    let d = decompose_green_kernel(&kernel(grid, &terms), SIGMA, 12).unwrap();
    let mut sorted = mus.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    for (got, want) in d.model.coefficients().iter().zip(&sorted) {
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
    }
    assert!(d.reconstruction_error < 1e-3);
}

#[test]
fn rank_one_kernel_with_mixed_input() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut g = vec![Complex64::new(0.0, 0.0); 12];
    g[2] = Complex64::new(h, 0.0);
    g[4] = Complex64::new(h, 0.0);
    let d = decompose_green_kernel(&kernel(time_grid(11), &[(0.9, unit(12, 3), g)]), SIGMA, 12).unwrap();
    let c = d.model.coefficients();
    assert!((c[0] - 0.9).abs() < 1e-6 && c[1] < 1e-6);
    let v = d.model.mixing().unwrap();
    assert!((v[(2, 0)].re - h).abs() < 1e-6 && (v[(4, 0)].re - h).abs() < 1e-6);
    assert!(v[(2, 0)].im.abs() < 1e-6);
    assert!((d.output_vectors[(3, 0)].norm() - 1.0).abs() < 1e-6);
}

#[test]
fn singular_values_are_basis_independent() {
    // Same spectrum, input and output modes rotated by fixed unitaries.
    let mus = [0.8, 0.4, 0.1];
    let grid = time_grid(11);
    let direct: Vec<_> = mus.iter().enumerate().map(|(j, &m)| (m, unit(12, j), unit(12, j))).collect();
    let rotation = |seed: f64| -> DMatrix<Complex64> {
        let a = DMatrix::from_fn(6, 6, |i, j| Complex64::new(((i * 7 + j * 3) as f64 * seed).sin(), ((i + 2 * j) as f64 * seed).cos()));
        a.qr().q()
    };
    let (ru, rv) = (rotation(0.37), rotation(1.91));
    let rotated: Vec<_> = mus
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let u: Vec<Complex64> = (0..6).map(|i| ru[(i, k)]).collect();
            let v: Vec<Complex64> = (0..6).map(|i| rv[(i, k)]).collect();
            (m, u, v)
        })
        .collect();
    let a = decompose_green_kernel(&kernel(grid, &direct), SIGMA, 12).unwrap();
    let b = decompose_green_kernel(&kernel(grid, &rotated), SIGMA, 12).unwrap();
    for (x, y) in a.model.coefficients().iter().zip(b.model.coefficients()) {
        assert!((x - y).abs() < 1e-8);
    }
}

#[test]
fn small_basis_flags_truncation() {
    let grid = time_grid(11);
    let terms: Vec<_> = (0..10).map(|j| (0.5, unit(12, j), unit(12, j))).collect();
    let d = decompose_green_kernel(&kernel(grid, &terms), SIGMA, 4).unwrap();
    assert!(d.truncation_warning);
    assert!(d.reconstruction_error > 0.05);
}

#[test]
fn over_unity_kernel_is_rejected() {
    let d = decompose_green_kernel(&kernel(time_grid(11), &[(1.5, unit(12, 0), unit(12, 0))]), SIGMA, 12);
    assert!(d.is_err());
}
