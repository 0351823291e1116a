use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use toruslab::field::LatticeField;
use toruslab::fourier_diagnostic::{local_fourier, local_fourier_direct, max_coefficient};
use toruslab::free_convolution::FreeConvState;
use toruslab::measure::{Atom, AtomicMeasure};
use toruslab::resolvent_flow::{record_observables, simulate_path, FlowObservable, FlowState};
use toruslab::spectral_density::{rho, CauchyKernel, CauchySmooth};
use toruslab::torus_spectrum::{spectral_measure_2d, torus_adjacency, torus_eigenvalues, TorusSpec};
use toruslab::random_matrix::{hermitian_eigenvalues, HermitianMatrix};

fn field_strategy(side: usize) -> impl Strategy<Value = LatticeField> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), side * side)
        .prop_map(move |v| LatticeField::new(side, side, v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap())
}

fn atoms_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, 1..12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fourier_parseval_and_fast_equals_direct(u in field_strategy(9), ell in 1usize..9, ox in 0usize..3, oy in 0usize..3) {
        let ell = ell.min(9 - ox.max(oy));
        let fast = local_fourier(&u, ell, (ox, oy)).unwrap();
        let direct = local_fourier_direct(&u, ell, (ox, oy)).unwrap();
        for (a, b) in fast.coefficients.iter().zip(&direct.coefficients) {
            prop_assert!((a - b).norm() < 1e-10);
        }
        let energy: f64 = fast.coefficients.iter().map(|c| c.norm_sqr()).sum();
        let window = u.sub_box((ox, oy), ell, ell).unwrap().norm_sqr();
        prop_assert!((energy - window).abs() < 1e-10 * (1.0 + window));
        let max_u = u.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        prop_assert!(max_coefficient(&fast).2 <= ell as f64 * max_u + 1e-12);
    }

    #[test]
    fn fourier_phase_equivariance(u in field_strategy(6), theta in 0.0f64..std::f64::consts::TAU) {
        let p = Complex64::from_polar(1.0, theta);
        let a = local_fourier(&u, 6, (0, 0)).unwrap();
        let b = local_fourier(&u.scaled(p), 6, (0, 0)).unwrap();
        for (x, y) in a.coefficients.iter().zip(&b.coefficients) {
            prop_assert!((x * p - y).norm() < 1e-12);
        }
        prop_assert!((max_coefficient(&a).2 - max_coefficient(&b).2).abs() < 1e-12);
    }

    #[test]
    fn subordination_bounds(xs in atoms_strategy(), t in 0.01f64..2.0, lams in prop::collection::vec(-6.0f64..6.0, 8)) {
        let s = FreeConvState::new(&AtomicMeasure::uniform(&xs), t, 1e-10).unwrap();
        let mut sorted = lams.clone();
        sorted.sort_by(f64::total_cmp);
        let mut prev = f64::NEG_INFINITY;
        for &l in &sorted {
            let v = s.v_t(l);
            prop_assert!(v >= 0.0 && v <= t.sqrt() + 1e-12);
            let p = s.psi_t(l);
            prop_assert!((p - l).abs() <= t.sqrt() + 1e-9);
            prop_assert!(p >= prev - 1e-9);
            prev = p;
            let y = s.psi_inv(l).unwrap();
            prop_assert!((s.psi_t(y) - l).abs() <= 1e-8);
            prop_assert!((y - l).abs() <= t.sqrt() + 1e-9);
            prop_assert!(s.density(l).unwrap() >= 0.0);
        }
    }

    #[test]
    fn quantiles_are_monotone(xs in atoms_strategy(), t in 0.05f64..1.0, n in 1usize..12) {
        let s = FreeConvState::new(&AtomicMeasure::uniform(&xs), t, 1e-10).unwrap();
        let q = s.quantiles(n).unwrap();
        prop_assert_eq!(q.gammas.len(), n + 1);
        prop_assert!(q.gammas.windows(2).all(|w| w[0] <= w[1]));
        for (i, &g) in q.gammas.iter().enumerate().skip(1).take(n.saturating_sub(1)) {
            prop_assert!((s.cdf(g).unwrap() - i as f64 / n as f64).abs() < 1e-6);
        }
    }

    #[test]
    fn cauchy_derivative_bound(
        atoms in prop::collection::vec((-4.0f64..4.0, -1.0f64..1.0, -1.0f64..1.0), 1..10),
        eta in 0.05f64..1.0,
        lambda in -5.0f64..5.0,
    ) {
        let nu = AtomicMeasure::new(atoms.iter().map(|&(x, a, b)| Atom { location: x, weight: Complex64::new(a, b) }).collect());
        let abs_nu = AtomicMeasure::new(nu.atoms.iter().map(|a| Atom { location: a.location, weight: a.weight.norm().into() }).collect());
        let k = CauchyKernel::new(eta).unwrap();
        let h = 1e-5 * eta;
        let fp = (nu.cauchy_smooth(k, lambda + h) - nu.cauchy_smooth(k, lambda - h)) / (2.0 * h);
        prop_assert!(abs_nu.cauchy_smooth(k, lambda).re / eta - fp.norm() >= -1e-6);
    }

    #[test]
    fn rho_symmetries(a in -4i64..5, b in -4i64..5, lambda in 0.01f64..3.99, neg in any::<bool>()) {
        let l = if neg { -lambda } else { lambda };
        let r = rho(a, b, l, 1e-9).unwrap();
        prop_assert!((r - rho(b, a, l, 1e-9).unwrap()).abs() < 1e-8);
        prop_assert!((r - rho(-a, b, l, 1e-9).unwrap()).abs() < 1e-8);
        let parity = if (a + b).rem_euclid(2) == 0 { r } else { -r };
        prop_assert!((rho(a, b, -l, 1e-9).unwrap() - parity).abs() < 1e-8);
    }

    #[test]
    fn torus_spectrum_matches_dense(n in 2usize..6, c in 0.0f64..1.0, d in 0.0f64..1.0) {
        let spec = TorusSpec::new(n, c, d).unwrap();
        let mut ev = torus_eigenvalues(&spec);
        ev.sort_by(f64::total_cmp);
        let dense = hermitian_eigenvalues(&torus_adjacency(&spec)).unwrap();
        for (x, y) in ev.iter().zip(&dense) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn spectral_measure_total_mass(n in 3usize..10, c in 0.0f64..1.0, d in 0.0f64..1.0, a in -2i64..3, b in -2i64..3) {
        let mu = spectral_measure_2d(n, c, d, a, b).unwrap();
        let target = if a == 0 && b == 0 { 1.0 } else { 0.0 };
        // the total mass is the (a, b) entry of the identity
        prop_assert!((mu.total_weight() - Complex64::new(target, 0.0)).norm() < 1e-10);
        prop_assert!(mu.total_variation() <= 1.0 + 1e-10);
    }

    #[test]
    fn flow_observable_bounds(seed in any::<u64>(), im in 0.05f64..1.0, re in -2.0f64..2.0) {
        let d: Vec<f64> = (0..12).map(|i| -1.0 + i as f64 / 6.0).collect();
        let z = Complex64::new(re, im);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let path = simulate_path(&HermitianMatrix::from_real_diagonal(&d), z, &[0, 5, 11], 0.01, 5, 1, &mut rng).unwrap();
        for r in &path.records {
            prop_assert!(r.m.im > 0.0);
            prop_assert!(r.dm.norm() <= r.m.im / im + 1e-12);
            for g in &r.g {
                prop_assert!(g.im >= 0.0 && g.im <= 1.0 / im + 1e-12);
            }
        }
    }
}

#[test]
fn observables_reject_real_z() {
    assert!(FlowObservable::new(3, Complex64::new(0.0, 0.0), vec![0]).is_err());
    let state = FlowState::diagonal(&[0.0, 1.0], 0.1).unwrap();
    let mut obs = FlowObservable::new(3, Complex64::new(0.0, 1.0), vec![0]).unwrap();
    assert!(record_observables(&mut obs, &state).is_err());
}
