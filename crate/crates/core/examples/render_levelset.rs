//! Render the sign pattern of a torus mode as a PPM image.
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use toruslab::field::LatticeField;
use toruslab::lab::render::{render_levelset, ImageFormat};
use toruslab::torus_spectrum::{mode_vector, ModeIndex, TorusSpec};

fn main() -> toruslab::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let spec = TorusSpec::random(48, &mut rng)?;
    let u = LatticeField::square(mode_vector(&spec, ModeIndex { j: 5, k: 9 }))?;
    let path = std::env::temp_dir().join("torus_mode.ppm");
    render_levelset(&u, &path, 4, false, ImageFormat::Ppm)?;
    println!("wrote {}", path.display());
    Ok(())
}
