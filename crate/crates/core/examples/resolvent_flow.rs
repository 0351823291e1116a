//! Drift residual of the Stieltjes transform along the GUE flow, with and without drift.
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use toruslab::random_matrix::HermitianMatrix;
use toruslab::resolvent_flow::{drift_residual, qv_check, simulate_paths};

fn main() -> toruslab::Result<()> {
    let n = 100;
    let d: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / n as f64).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let paths = simulate_paths(&HermitianMatrix::from_real_diagonal(&d), Complex64::new(0.5, 0.1), &[n / 2], 0.01, 50, 200, &mut rng)?;
    println!("with drift    {:.2}", drift_residual(&paths, true)?.statistic);
    println!("without drift {:.2}", drift_residual(&paths, false)?.statistic);
    let qv = qv_check(&paths[0], 0)?;
    println!("quadratic variation ratio {:.3}", qv.ratio());
    Ok(())
}
