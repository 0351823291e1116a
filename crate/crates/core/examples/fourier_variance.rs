//! Fourier variance of the Gaussian wave by the quadratic form and by angle sampling.
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use toruslab::fourier_diagnostic::{wave_fourier_variance, VarianceMethod};

fn main() -> toruslab::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (energy, ell) = (0.5, 8);
    for (s, t) in [(0, 0), (1, 2), (3, 5), (7, 7)] {
        let q = wave_fourier_variance(energy, ell, s, t, VarianceMethod::QuadraticForm, 0, 1e-10, &mut rng)?;
        let e = wave_fourier_variance(energy, ell, s, t, VarianceMethod::Expectation, 20000, 1e-10, &mut rng)?;
        println!("(s,t) = ({s},{t}): quadratic {:.4}, sampled {:.4} ± {:.4}", q.value, e.value, e.stderr);
    }
    Ok(())
}
