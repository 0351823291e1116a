//! Sample the Gaussian wave on a small window and compare its empirical covariance.
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use toruslab::gaussian_wave::{covariance_distance, empirical_covariance, sample_wave, wave_covariance, Window};

fn main() -> toruslab::Result<()> {
    let m = wave_covariance(0.5, Window::new(2), 1e-10)?;
    println!("window dim {}, smallest eigenvalue {:.3e}", m.dim(), m.smallest_eigenvalue()?);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for count in [100, 1000, 10000] {
        let fields = sample_wave(&m, count, &mut rng)?;
        let (_, rel) = covariance_distance(&empirical_covariance(&fields)?, &m.entries)?;
        println!("{count:>6} samples: relative Frobenius distance {rel:.4}");
    }
    Ok(())
}
