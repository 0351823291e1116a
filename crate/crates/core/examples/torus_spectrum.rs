//! Closed-form torus spectrum against a dense eigensolver, and its Stieltjes transform.
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use toruslab::random_matrix::hermitian_eigenvalues;
use toruslab::torus_spectrum::{torus_adjacency, torus_eigenvalues, torus_stieltjes, TorusSpec};

fn main() -> toruslab::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let spec = TorusSpec::random(12, &mut rng)?;
    let mut closed = torus_eigenvalues(&spec);
    closed.sort_by(f64::total_cmp);
    let dense = hermitian_eigenvalues(&torus_adjacency(&spec))?;
    let dev = closed.iter().zip(&dense).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("n = 12, c = {:.4}, d = {:.4}: max eigenvalue deviation {dev:.2e}", spec.c(), spec.d());
    let z = Complex64::new(0.5, 0.05);
    let direct: Complex64 = closed.iter().map(|l| 1.0 / (l - z)).sum::<Complex64>() / closed.len() as f64;
    println!("m(z) closed form {:.6}, from eigenvalues {:.6}", torus_stieltjes(&spec, z), direct);
    Ok(())
}
