//! Tabulate ρ_{a,b} for a few offsets and print the neighbour-sum identity.
use toruslab::spectral_density::{rho, rho_integral};

fn main() -> toruslab::Result<()> {
    let tol = 1e-10;
    println!("∫ρ_00 = {:.12}", rho_integral(0, 0, -4.0, 4.0, tol)?);
    println!("{:>6} {:>12} {:>12} {:>12}", "λ", "ρ_00", "ρ_10", "ρ_11");
    for i in 0..8 {
        let l = -3.5 + i as f64;
        println!("{l:>6.2} {:>12.6} {:>12.6} {:>12.6}", rho(0, 0, l, tol)?, rho(1, 0, l, tol)?, rho(1, 1, l, tol)?);
    }
    // Σ over the four neighbours of ρ_{a,b} equals λ ρ_{a,b}
    let (a, b, l) = (2, 1, 0.7);
    let sum = rho(a + 1, b, l, tol)? + rho(a - 1, b, l, tol)? + rho(a, b + 1, l, tol)? + rho(a, b - 1, l, tol)?;
    println!("neighbour sum {sum:.3e} vs λρ {:.3e}", l * rho(a, b, l, tol)?);
    Ok(())
}
