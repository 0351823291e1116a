//! Perturb a torus adjacency by GUE noise and look at local Fourier mass of an eigenvector.
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use toruslab::field::LatticeField;
use toruslab::fourier_diagnostic::{local_fourier, max_coefficient};
use toruslab::random_matrix::{hermitian_eig, perturb};
use toruslab::torus_spectrum::{torus_adjacency, TorusSpec};

fn main() -> toruslab::Result<()> {
    let n = 24;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let spec = TorusSpec::random(n, &mut rng)?;
    let a = torus_adjacency(&spec);
    for gamma in [0.5, 1.0, 1.5] {
        let t = (n as f64).powf(-2.0 * gamma);
        let es = hermitian_eig(&perturb(&a, t, &mut rng)?, 1e-8)?;
        let k = es.eigenvalues.iter().position(|&l| l > 0.5).unwrap_or(0);
        let u = LatticeField::square(es.vector(k).iter().map(|x| x * n as f64).collect())?;
        let (s, tt, c) = max_coefficient(&local_fourier(&u, 8, (4, 4))?);
        println!("γ = {gamma}: λ = {:.4}, max |û| / ℓ = {:.3} at ({s},{tt})", es.eigenvalues[k], c / 8.0);
    }
    Ok(())
}
