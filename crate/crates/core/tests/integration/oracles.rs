use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use toruslab::free_convolution::{sigma_sq, FreeConvState};
use toruslab::measure::AtomicMeasure;
use toruslab::random_matrix::{gue_sample, HermitianMatrix};
use toruslab::resolvent_flow::{flow_step, FlowState};
use toruslab::seed::derive_seed;
use toruslab::stats::{ks_statistic, ks_two_sample};
use toruslab::torus_spectrum::{mode_vector, ModeIndex, TorusSpec};
use toruslab::field::LatticeField;
use toruslab::fourier_diagnostic::{local_fourier, max_coefficient};
use toruslab::lab::experiments::endpoint_law_distance;

fn semicircle_cdf(x: f64, t: f64) -> f64 {
    let u = (x / (2.0 * t.sqrt())).clamp(-1.0, 1.0);
    0.5 + (u * (1.0 - u * u).sqrt() + u.asin()) / PI
}

#[test]
fn semicircle_quantiles_and_inverse() {
    let t = 0.4;
    let s = FreeConvState::new(&AtomicMeasure::dirac(0.0), t, 1e-10).unwrap();
    let q = s.quantiles(16).unwrap();
    for (i, &g) in q.gammas.iter().enumerate() {
        assert!((semicircle_cdf(g, t) - i as f64 / 16.0).abs() < 1e-8, "i = {i}");
    }
    assert!(q.gammas[8].abs() < 1e-9);
    for &l in &[-1.0, -0.3, 0.2, 1.1] {
        assert!((s.psi_inv(l).unwrap() - l / 2.0).abs() < 1e-9);
        if l.abs() < t.sqrt() {
            assert!((s.v_t(l) - (t - l * l).sqrt()).abs() < 1e-9);
            assert!((s.psi_t(l) - 2.0 * l).abs() < 1e-8);
        }
    }
}

#[test]
fn sigma_sq_for_constant_diagonal() {
    let n = 40;
    let t = 0.2;
    let d = vec![0.0; n];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut q: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.random(), rng.random())).collect();
    let norm = q.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    q.iter_mut().for_each(|x| *x /= norm);
    let s = FreeConvState::new(&AtomicMeasure::dirac(0.0), t, 1e-10).unwrap();
    for k in [1, 7, 20, 33, 40] {
        let (_, y) = s.quantile(k, n).unwrap();
        let v = s.v_t(y);
        let expected = t / (y * y + v * v);
        assert!((sigma_sq(&q, k, &d, t).unwrap() - expected).abs() < 1e-8 * expected.max(1.0));
    }
}

#[test]
fn flow_increment_variance_and_one_step_law() {
    let n = 4;
    let (dt, steps, paths) = (0.01, 10, 10_000);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut acc = 0.0;
    let mut first = Vec::with_capacity(paths);
    for _ in 0..paths {
        let mut s = FlowState::diagonal(&vec![0.0; n], dt).unwrap();
        flow_step(&mut s, &mut rng);
        first.push(s.h.get(0, 1).re);
        for _ in 1..steps {
            flow_step(&mut s, &mut rng);
        }
        acc += s.h.get(1, 2).norm_sqr();
    }
    let t = dt * steps as f64;
    let var = acc / paths as f64;
    assert!((var / (t / n as f64) - 1.0).abs() < 0.05, "variance {var}");
    // Re of an off-diagonal increment is N(0, dt/(2n))
    let sd = (dt / (2.0 * n as f64)).sqrt();
    let normal = statrs::distribution::Normal::new(0.0, sd).unwrap();
    use statrs::distribution::ContinuousCDF;
    assert!(ks_statistic(&first, |x| normal.cdf(x)) <= 0.02);
}

#[test]
fn flow_endpoint_matches_direct_perturbation() {
    let d: Vec<f64> = (0..60).map(|i| -1.0 + i as f64 / 30.0).collect();
    assert!(endpoint_law_distance(&d, 0.1, 10, 10, 5).unwrap() <= 0.05);
}

#[test]
fn gue_entry_variance() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let draws = 10_000;
    let (mut off, mut diag) = (0.0, 0.0);
    for _ in 0..draws {
        let w = gue_sample(8, &mut rng);
        off += w.get(3, 5).norm_sqr();
        diag += w.get(1, 1).norm_sqr();
    }
    assert!((off / draws as f64 * 8.0 - 1.0).abs() < 0.05);
    assert!((diag / draws as f64 * 8.0 - 1.0).abs() < 0.05);
    let h = HermitianMatrix::from_real_diagonal(&[1.0, 2.0]);
    assert!(h.is_hermitian());
}

#[test]
fn derived_seeds_have_no_collisions_and_avalanche() {
    let mut seen: Vec<u64> = (0..1_000_000u64).map(|i| derive_seed(42, "collisions", i)).collect();
    seen.sort_unstable();
    seen.dedup();
    assert_eq!(seen.len(), 1_000_000);
    let mut flipped = 0u32;
    for i in 0..1000u64 {
        flipped += (derive_seed(42, "avalanche", i) ^ derive_seed(42, "avalanche", i + 1)).count_ones();
    }
    let rate = flipped as f64 / (1000.0 * 64.0);
    assert!((0.4..=0.6).contains(&rate), "avalanche {rate}");
}

#[test]
fn torus_mode_has_a_large_local_coefficient() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let n = 40;
        let spec = TorusSpec::random(n, &mut rng).unwrap();
        let m = ModeIndex { j: rng.random_range(0..n), k: rng.random_range(0..n) };
        let u = LatticeField::square(mode_vector(&spec, m)).unwrap();
        let ell = rng.random_range(4..20);
        let o = (rng.random_range(0..n - ell), rng.random_range(0..n - ell));
        let tab = local_fourier(&u, ell, o).unwrap();
        assert!(max_coefficient(&tab).2 >= ell as f64 / 25.0);
    }
}

#[test]
fn two_sample_ks_detects_shift() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let a: Vec<f64> = (0..2000).map(|_| rng.random::<f64>()).collect();
    let b: Vec<f64> = (0..2000).map(|_| rng.random::<f64>() + 0.2).collect();
    assert!(ks_two_sample(&a, &b) > 0.15);
    let c: Vec<f64> = (0..2000).map(|_| rng.random::<f64>()).collect();
    assert!(ks_two_sample(&a, &c) < 0.06);
}
