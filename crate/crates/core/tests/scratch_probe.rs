// Temporary numeric probe; deleted before delivery.
use fslab::airy::FsAiryDensity;
use fslab::stats::{ks_lattice_midpoint, ks_lattice_raw};
use fslab::walks::{marginal_height, EnsembleSpec, StepKernel, TiltPotential};

#[test]
fn probe_verify_fs_numbers() {
    let chi = 2f64.powf(1.0 / 3.0);
    let reference = FsAiryDensity::new(chi);
    for lambda in [0.1, 0.03, 0.01] {
        let tilt = TiltPotential::power_law(lambda, 1.0).unwrap();
        let h = tilt.h_lambda().unwrap();
        let n = (10.0 * h * h).ceil() as usize;
        let m = (8.0 * h).ceil() as i64;
        let spec =
            EnsembleSpec::new(StepKernel::simple(), tilt, n, vec![0], vec![0], m).unwrap();
        let t0 = std::time::Instant::now();
        let marg = marginal_height(&spec, 0).unwrap();
        let atoms: Vec<(f64, f64)> =
            marg.iter().enumerate().map(|(x, &p)| (x as f64 / h, p)).collect();
        let ks_mid = ks_lattice_midpoint(&atoms, |r| reference.cdf(r));
        let ks_raw = ks_lattice_raw(&atoms, |r| reference.cdf(r));
        println!(
            "lambda={lambda:<5} H={h:.4} N={n} M={m} ks_mid={ks_mid:.5} ks_raw={ks_raw:.5} ({:?})",
            t0.elapsed()
        );
    }
}

#[test]
fn probe_moments() {
    let chi = 2f64.powf(1.0 / 3.0);
    let reference = FsAiryDensity::new(chi);
    // Reference moments by quadrature.
    let (mut m1, mut m2) = (0.0, 0.0);
    let dx = 1e-4;
    for i in 0..120_000 {
        let r = (i as f64 + 0.5) * dx;
        let w = reference.density(r) * dx;
        m1 += r * w;
        m2 += r * r * w;
    }
    println!("reference: mean={m1:.5} var={:.5}", m2 - m1 * m1);
    for lambda in [0.1, 0.03, 0.01, 0.003, 0.001] {
        let tilt = TiltPotential::power_law(lambda, 1.0).unwrap();
        let h = tilt.h_lambda().unwrap();
        let n = (10.0 * h * h).ceil() as usize;
        let m = (8.0 * h).ceil() as i64;
        let spec =
            EnsembleSpec::new(StepKernel::simple(), tilt, n, vec![0], vec![0], m).unwrap();
        let marg = marginal_height(&spec, 0).unwrap();
        let (mut e1, mut e2) = (0.0, 0.0);
        for (x, &p) in marg.iter().enumerate() {
            let r = x as f64 / h;
            e1 += r * p;
            e2 += r * r * p;
        }
        println!("lambda={lambda:<6} H={h:.4} mean={e1:.5} var={:.5}", e2 - e1 * e1);
    }
}

#[test]
fn probe_wall_gauge() {
    let chi = 2f64.powf(1.0 / 3.0);
    let reference = FsAiryDensity::new(chi);
    for lambda in [0.1, 0.03, 0.01] {
        let tilt = TiltPotential::power_law(lambda, 1.0).unwrap();
        let h = tilt.h_lambda().unwrap();
        let n = (10.0 * h * h).ceil() as usize;
        let m = (8.0 * h).ceil() as i64;
        let spec =
            EnsembleSpec::new(StepKernel::simple(), tilt, n, vec![0], vec![0], m).unwrap();
        let marg = marginal_height(&spec, 0).unwrap();
        let atoms: Vec<(f64, f64)> =
            marg.iter().enumerate().map(|(x, &p)| ((x as f64 + 1.0) / h, p)).collect();
        let ks_mid = ks_lattice_midpoint(&atoms, |r| reference.cdf(r));
        let ks_raw = ks_lattice_raw(&atoms, |r| reference.cdf(r));
        println!("lambda={lambda:<5} H={h:.4} N={n} M={m} ks_mid={ks_mid:.5} ks_raw={ks_raw:.5}");
    }
    // Boundary-uniformity probe at u1 = v1 = ceil(H).
    for lambda in [0.1, 0.03, 0.01] {
        let tilt = TiltPotential::power_law(lambda, 1.0).unwrap();
        let h = tilt.h_lambda().unwrap();
        let n = (10.0 * h * h).ceil() as usize;
        let m = (8.0 * h).ceil() as i64;
        let b = h.ceil() as i64;
        let spec =
            EnsembleSpec::new(StepKernel::simple(), tilt, n, vec![b], vec![b], m).unwrap();
        let marg = marginal_height(&spec, 0).unwrap();
        let atoms: Vec<(f64, f64)> =
            marg.iter().enumerate().map(|(x, &p)| ((x as f64 + 1.0) / h, p)).collect();
        let ks_mid = ks_lattice_midpoint(&atoms, |r| reference.cdf(r));
        println!("boundary=ceilH lambda={lambda:<5} ks_mid={ks_mid:.5}");
    }
}

#[test]
fn probe_sde_occupation() {
    use fslab::spectral::{simulate_diffusion, solve_spectrum, Potential};
    use fslab::stats::ks_samples_vs_cdf;
    let p = Potential::linear(1.0, 2f64.sqrt()).unwrap();
    let basis = solve_spectrum(&p, 16.0, 1e-3, 2).unwrap();
    let cdf = basis.ground_cdf();
    for seed in [11u64, 22, 33] {
        let t0 = std::time::Instant::now();
        let path = simulate_diffusion(&basis, &[1.0], 1e-4, 10_000_000, seed).unwrap();
        let mut xs: Vec<f64> = path.coordinate(0).collect();
        let ks = ks_samples_vs_cdf(&mut xs, |r| cdf.eval(r));
        println!("seed={seed} ks={ks:.5} elapsed={:?}", t0.elapsed());
    }
}

#[test]
fn probe_sde_seed_scan() {
    use fslab::spectral::{simulate_diffusion, solve_spectrum, Potential};
    use fslab::stats::ks_samples_vs_cdf;
    let p = Potential::linear(1.0, 2f64.sqrt()).unwrap();
    let basis = solve_spectrum(&p, 16.0, 1e-3, 2).unwrap();
    let cdf = basis.ground_cdf();
    let mut all = vec![];
    for seed in 1u64..=14 {
        let path = simulate_diffusion(&basis, &[1.3], 1e-4, 10_000_000, seed).unwrap();
        let mut xs: Vec<f64> = path.coordinate(0).collect();
        let ks = ks_samples_vs_cdf(&mut xs, |r| cdf.eval(r));
        all.push(ks);
        println!("seed={seed} ks={ks:.5}");
    }
    all.sort_by(f64::total_cmp);
    println!("median={:.5}", all[all.len() / 2]);
}
