use super::*;
use crate::airy::{AiryOracle, AIRY_OMEGA1};

fn linear_basis(c: f64, sigma2: f64, r_max: f64, h: f64, k: usize) -> SpectralBasis {
    let p = Potential::linear(c, sigma2.sqrt()).unwrap();
    solve_spectrum(&p, r_max, h, k).unwrap()
}

#[test]
fn airy_ground_state_energy_and_function() {
    // sigma^2 = 2, q = r: the operator is d^2/dr^2 - r, e_0 = omega_1 and
    // phi_0 = Ai(r - omega_1) normalised.
    let basis = linear_basis(1.0, 2.0, 20.0, 1e-3, 3);
    assert!((basis.eigenvalue(0) - AIRY_OMEGA1).abs() < 1e-3, "e0 = {}", basis.eigenvalue(0));

    let oracle = AiryOracle::default();
    let norm = oracle.ai_prime(oracle.first_zero()).abs();
    let mut worst = 0.0f64;
    for i in 0..basis.grid_len() {
        let r = basis.r_at(i);
        let reference = oracle.ai(r - AIRY_OMEGA1) / norm;
        worst = worst.max((basis.eigenfunction(0)[i] - reference).abs());
    }
    assert!(worst < 1e-4, "sup |phi0 - Ai| = {worst}");
}

#[test]
fn airy_chi_closed_forms() {
    assert!((airy_chi(1.0, 2f64.sqrt()) - 1.0).abs() < 1e-15);
    assert!((airy_chi(1.0, 1.0) - 2f64.powf(1.0 / 3.0)).abs() < 1e-12);
    assert!((airy_chi(4.0, 2f64.sqrt()) - 4f64.powf(1.0 / 3.0)).abs() < 1e-12);
    // e_0 = c omega_1 / chi, cross-checked against the grid solver.
    let e0 = airy_ground_energy(4.0, 2f64.sqrt());
    assert!((e0 - 4.0 * AIRY_OMEGA1 / 4f64.powf(1.0 / 3.0)).abs() < 1e-12);
    assert!((e0 - 5.89).abs() < 0.01);
    let basis = linear_basis(4.0, 2.0, 12.0, 1e-3, 1);
    assert!((basis.eigenvalue(0) - e0).abs() < 1e-3);
}

#[test]
fn unit_diffusivity_linear_potential() {
    // sigma = 1, c = 1: e_0 = omega_1 / 2^(1/3).
    let basis = linear_basis(1.0, 1.0, 16.0, 1e-3, 1);
    let expected = AIRY_OMEGA1 / 2f64.powf(1.0 / 3.0);
    assert!((expected - 1.85576).abs() < 1e-5);
    assert!((basis.eigenvalue(0) - expected).abs() < 1e-3);
}

#[test]
fn harmonic_half_line_is_odd_oscillator() {
    // sigma^2 = 2, q = r^2: Dirichlet wall keeps the odd oscillator levels
    // 3, 7, 11, ...
    let p = Potential::power_law(1.0, 2.0, 2f64.sqrt()).unwrap();
    let basis = solve_spectrum(&p, 10.0, 1e-3, 3).unwrap();
    assert!((basis.eigenvalue(0) - 3.0).abs() < 1e-3, "e0 = {}", basis.eigenvalue(0));
    assert!((basis.eigenvalue(1) - 7.0).abs() < 5e-3, "e1 = {}", basis.eigenvalue(1));
    assert!((basis.eigenvalue(2) - 11.0).abs() < 2e-2, "e2 = {}", basis.eigenvalue(2));
}

#[test]
fn invariants_hold_for_a_mid_size_basis() {
    let basis = linear_basis(1.0, 2.0, 16.0, 2e-3, 6);
    basis.validate().unwrap();
    // Explicit sign-change recount.
    for j in 0..basis.len() {
        assert_eq!(interior_sign_changes(basis.eigenfunction(j)), j);
    }
}

#[test]
fn mesh_refinement_is_second_order() {
    let e = |h: f64| linear_basis(1.0, 2.0, 16.0, h, 1).eigenvalue(0);
    let (c, m, f) = (e(4e-3), e(2e-3), e(1e-3));
    let ratio = (c - m) / (m - f);
    assert!((3.3..4.7).contains(&ratio), "refinement ratio {ratio}");
}

#[test]
fn truncation_radius_is_immaterial() {
    let a = linear_basis(1.0, 2.0, 15.0, 1e-3, 1).eigenvalue(0);
    let b = linear_basis(1.0, 2.0, 30.0, 1e-3, 1).eigenvalue(0);
    assert!((a - b).abs() < 1e-8, "|de0| = {}", (a - b).abs());
}

#[test]
fn grid_preconditions_are_enforced() {
    let p = Potential::linear(1.0, 1.0).unwrap();
    assert!(matches!(solve_spectrum(&p, 10.0, 3e-3, 1), Err(SpectralError::InvalidArgument(_))));
    assert!(matches!(solve_spectrum(&p, 0.01, 1e-3, 9), Err(SpectralError::InvalidArgument(_))));
    assert!(Potential::power_law(-1.0, 1.0, 1.0).is_err());
    assert!(Potential::linear(1.0, 0.0).is_err());
    assert!(Potential::tabulated(vec![(0.0, 0.0), (1.0, 2.0), (2.0, 1.0)], 0.5, 1.0).is_err());
}

#[test]
fn drift_vanishes_at_the_mode_and_pushes_off_the_wall() {
    let basis = linear_basis(1.0, 2.0, 20.0, 1e-3, 1);
    let phi0 = basis.eigenfunction(0);
    let argmax = (0..phi0.len()).max_by(|&a, &b| phi0[a].total_cmp(&phi0[b])).unwrap();
    let r_star = basis.r_at(argmax);
    let drift = basis.fs_drift(r_star).unwrap();
    assert!(drift.abs() < 10.0 * basis.grid_step(), "drift at mode {drift}");
    assert!(basis.fs_drift(0.05).unwrap() > 0.0);
    assert!(basis.fs_drift(0.002).is_ok());
    assert!(basis.fs_drift(1e-4).is_err());
    assert!(basis.fs_drift(19.9995).is_err());
}

#[test]
fn drift_matches_airy_logarithmic_derivative() {
    // q = r, sigma^2 = 2 at r = 1: drift = 2 Ai'(1 - omega_1)/Ai(1 - omega_1).
    let basis = linear_basis(1.0, 2.0, 20.0, 1e-3, 1);
    let oracle = AiryOracle::default();
    let expected = 2.0 * oracle.ai_prime(1.0 - AIRY_OMEGA1) / oracle.ai(1.0 - AIRY_OMEGA1);
    let got = basis.fs_drift(1.0).unwrap();
    assert!((got - expected).abs() < 1e-4, "drift {got} vs {expected}");
}

#[test]
fn slater_determinant_structure() {
    let basis = linear_basis(1.0, 2.0, 16.0, 2e-3, 4);
    // Repeated coordinates kill the determinant.
    assert!(basis.slater(&[2.0, 2.0]).unwrap().abs() < 1e-10);
    assert!(basis.slater(&[3.0, 2.0, 2.0]).unwrap().abs() < 1e-10);
    // Swapping two rows flips the sign.
    let d = basis.slater(&[3.0, 1.0]).unwrap();
    let swapped = basis.slater(&[1.0, 3.0]).unwrap();
    assert!((d + swapped).abs() <= 1e-13 * d.abs());
    // n = 2 expansion against the raw eigenfunctions.
    let direct = basis.phi(0, 3.0) * basis.phi(1, 1.0) - basis.phi(1, 3.0) * basis.phi(0, 1.0);
    assert!((d - direct).abs() < 1e-12 * direct.abs().max(1.0));
    // Size guard.
    assert!(matches!(basis.slater(&[1.0, 2.0, 3.0, 4.0, 5.0]), Err(SpectralError::Size(_))));
}

#[test]
fn dyson_drift_reduces_and_matches_finite_differences() {
    let basis = linear_basis(1.0, 2.0, 16.0, 2e-3, 4);
    // n = 1: gradient of log phi_0, i.e. fs_drift / sigma^2.
    let g = basis.dyson_drift(&[1.3]).unwrap();
    assert!((g[0] - basis.fs_drift(1.3).unwrap() / basis.sigma2()).abs() < 1e-10);

    // Finite differences of log |Delta| at a generic interior point.
    let r = [3.1, 1.7, 0.9];
    let g = basis.dyson_drift(&r).unwrap();
    let eps = 1e-5;
    for i in 0..3 {
        let mut plus = r.to_vec();
        let mut minus = r.to_vec();
        plus[i] += eps;
        minus[i] -= eps;
        let fd = (basis.slater(&plus).unwrap().abs().ln() - basis.slater(&minus).unwrap().abs().ln())
            / (2.0 * eps);
        assert!((g[i] - fd).abs() < 1e-5, "component {i}: {} vs {fd}", g[i]);
    }

    // Near-collision repulsion: (d_1 - d_2) log Delta > 0 when r_1 > r_2.
    let g = basis.dyson_drift(&[1.501, 1.5]).unwrap();
    assert!(g[0] - g[1] > 100.0, "repulsion {:?}", g);

    // Ordering precondition.
    assert!(basis.dyson_drift(&[1.0, 2.0]).is_err());
    assert!(basis.dyson_drift(&[2.0, 2.0]).is_err());
}

#[test]
fn semigroup_conserves_constants_and_mixes() {
    let basis = linear_basis(1.0, 2.0, 16.0, 2e-3, 6);
    let m = basis.grid_len();
    let ones = vec![1.0; m];
    let out = basis.semigroup_apply(0.7, &ones).unwrap();
    let cdf = basis.ground_cdf();
    for i in 0..m {
        let r = basis.r_at(i);
        // Check on the bulk of mu_0.
        if cdf.eval(r) > 1e-6 && cdf.eval(r) < 1.0 - 1e-6 {
            assert!((out[i] - 1.0).abs() < 1e-6, "S^t 1 at r={r}: {}", out[i]);
        }
    }

    // Long time: converges to the mu_0 average of f at rate e_1 - e_0.
    let f: Vec<f64> = (0..m).map(|i| (0.8 * basis.r_at(i)).sin()).collect();
    let phi0 = basis.eigenfunction(0);
    let mu0_avg: f64 = basis.grid_step() * f.iter().zip(phi0).map(|(a, b)| a * b * b).sum::<f64>();
    let t = 20.0 / (basis.eigenvalue(1) - basis.eigenvalue(0));
    let out = basis.semigroup_apply(t, &f).unwrap();
    for i in 0..m {
        let r = basis.r_at(i);
        if cdf.eval(r) > 1e-6 && cdf.eval(r) < 1.0 - 1e-6 {
            assert!((out[i] - mu0_avg).abs() < 1e-4, "r={r}: {} vs {mu0_avg}", out[i]);
        }
    }

    // Reversibility in mu_0: <S^t f, g>_{mu_0} = <f, S^t g>_{mu_0}.
    let g: Vec<f64> = (0..m).map(|i| (-0.3 * basis.r_at(i)).exp()).collect();
    let sf = basis.semigroup_apply(0.4, &f).unwrap();
    let sg = basis.semigroup_apply(0.4, &g).unwrap();
    let ip = |a: &[f64], b: &[f64]| -> f64 {
        basis.grid_step()
            * a.iter()
                .zip(b)
                .zip(phi0)
                .map(|((x, y), p)| x * y * p * p)
                .sum::<f64>()
    };
    assert!((ip(&sf, &g) - ip(&f, &sg)).abs() < 1e-8);

    assert!(basis.semigroup_apply(-0.1, &f).is_err());
    assert!(basis.semigroup_apply(0.1, &f[1..]).is_err());
}

#[test]
fn sde_is_deterministic_under_seed() {
    let basis = linear_basis(1.0, 2.0, 16.0, 2e-3, 2);
    let a = simulate_diffusion(&basis, &[1.0], 1e-3, 2000, 7).unwrap();
    let b = simulate_diffusion(&basis, &[1.0], 1e-3, 2000, 7).unwrap();
    let c = simulate_diffusion(&basis, &[1.0], 1e-3, 2000, 8).unwrap();
    assert_eq!(a.state(2000), b.state(2000));
    assert_ne!(a.state(2000), c.state(2000));
}

#[test]
fn sde_brownian_msd_smoke() {
    // Free potential in a huge box: the scheme must reproduce Brownian
    // mean-square displacement sigma^2 t within 5%.
    let p = Potential::free(2f64.sqrt()).unwrap();
    let basis = solve_spectrum(&p, 2000.0, 0.5, 1).unwrap();
    let t_final = 4.0;
    let steps = 400;
    let mut acc = 0.0;
    let replicas = 4000;
    for rep in 0..replicas {
        let path = simulate_diffusion(&basis, &[1000.0], t_final / steps as f64, steps, 1000 + rep).unwrap();
        let d = path.last_state()[0] - 1000.0;
        acc += d * d;
    }
    let msd = acc / replicas as f64;
    let expected = basis.sigma2() * t_final;
    assert!((msd - expected).abs() < 0.05 * expected, "msd {msd} vs {expected}");
}

#[test]
fn sde_rejects_bad_starts() {
    let basis = linear_basis(1.0, 2.0, 16.0, 2e-3, 2);
    assert!(simulate_diffusion(&basis, &[-1.0], 1e-3, 10, 1).is_err());
    assert!(simulate_diffusion(&basis, &[1.0, 2.0], 1e-3, 10, 1).is_err());
    assert!(simulate_diffusion(&basis, &[2.0, 2.0], 1e-3, 10, 1).is_err());
    assert!(simulate_diffusion(&basis, &[2.0, 1.0, 0.5, 0.2], 1e-3, 10, 1).is_err());
}
