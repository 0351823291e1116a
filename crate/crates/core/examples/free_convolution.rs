//! Free convolution of a two-atom measure with the semicircle law.
use toruslab::free_convolution::FreeConvState;
use toruslab::measure::AtomicMeasure;

fn main() -> toruslab::Result<()> {
    let mu = AtomicMeasure::uniform(&[-1.0, 1.0]);
    for t in [0.1, 0.5, 1.5] {
        let s = FreeConvState::new(&mu, t, 1e-10)?;
        let support: Vec<String> = s.support().iter().map(|(a, b)| format!("[{a:.4}, {b:.4}]")).collect();
        println!("t = {t}: support {}, mass {:.8}", support.join(" ∪ "), s.total_mass(1e-10));
        let q = s.quantiles(4)?;
        println!("  quartiles {:?}", q.gammas.iter().map(|g| (g * 1e4).round() / 1e4).collect::<Vec<_>>());
    }
    Ok(())
}
