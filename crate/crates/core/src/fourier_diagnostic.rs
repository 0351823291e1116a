//! Local Fourier transforms of ℓ×ℓ windows and the dominant-coefficient
//! statistic that tells product-like eigenvectors from Gaussian waves.
//!
//! `û(ℓ, s, t) = (1/ℓ) Σ_{x,y=0}^{ℓ-1} e^{-2πi(xs + yt)/ℓ} u(o + (x, y))`.

use std::f64::consts::PI;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::field::LatticeField;
use crate::spectral_density::{AnglePairSampler, RhoRatioTable};

/// Coefficients `û(ℓ, s, t)` stored row-major as `s·ℓ + t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierTable {
    pub ell: usize,
    pub coefficients: Vec<Complex64>,
}

impl FourierTable {
    #[inline]
    pub fn get(&self, s: usize, t: usize) -> Complex64 {
        self.coefficients[s * self.ell + t]
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
        w.write_record(["s", "t", "re", "im", "abs"])?;
        for s in 0..self.ell {
            for t in 0..self.ell {
                let v = self.get(s, t);
                w.write_record([
                    s.to_string(),
                    t.to_string(),
                    format!("{:.17e}", v.re),
                    format!("{:.17e}", v.im),
                    format!("{:.17e}", v.norm()),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn check_window(u: &LatticeField, ell: usize, origin: (usize, usize)) -> Result<()> {
    if ell == 0 || origin.0 + ell > u.nx || origin.1 + ell > u.ny {
        return Err(invalid(format!(
            "{ell}×{ell} window at {origin:?} is outside the {}×{} field",
            u.nx, u.ny
        )));
    }
    Ok(())
}

/// Local Fourier transform by two passes of one-dimensional FFTs.
pub fn local_fourier(u: &LatticeField, ell: usize, origin: (usize, usize)) -> Result<FourierTable> {
    check_window(u, ell, origin)?;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(ell);
    let mut data: Vec<Complex64> = (0..ell)
        .flat_map(|x| (0..ell).map(move |y| (x, y)))
        .map(|(x, y)| u.get(origin.0 + x, origin.1 + y))
        .collect();
    // transform along y (contiguous rows), then along x via a transpose
    fft.process(&mut data);
    let mut tr = vec![Complex64::new(0.0, 0.0); ell * ell];
    for x in 0..ell {
        for t in 0..ell {
            tr[t * ell + x] = data[x * ell + t];
        }
    }
    fft.process(&mut tr);
    let scale = 1.0 / ell as f64;
    let mut coefficients = vec![Complex64::new(0.0, 0.0); ell * ell];
    for t in 0..ell {
        for s in 0..ell {
            coefficients[s * ell + t] = tr[t * ell + s] * scale;
        }
    }
    Ok(FourierTable { ell, coefficients })
}

/// The defining `O(ℓ⁴)` double sum.
pub fn local_fourier_direct(u: &LatticeField, ell: usize, origin: (usize, usize)) -> Result<FourierTable> {
    check_window(u, ell, origin)?;
    let w = 2.0 * PI / ell as f64;
    let mut coefficients = Vec::with_capacity(ell * ell);
    for s in 0..ell {
        for t in 0..ell {
            let mut acc = Complex64::new(0.0, 0.0);
            for x in 0..ell {
                for y in 0..ell {
                    let ph = -w * ((x * s) % ell + (y * t) % ell) as f64;
                    acc += Complex64::from_polar(1.0, ph) * u.get(origin.0 + x, origin.1 + y);
                }
            }
            coefficients.push(acc / ell as f64);
        }
    }
    Ok(FourierTable { ell, coefficients })
}

/// Largest coefficient; ties go to the lexicographically first `(s, t)`.
pub fn max_coefficient(table: &FourierTable) -> (usize, usize, f64) {
    let mut best = (0, 0, f64::NEG_INFINITY);
    for s in 0..table.ell {
        for t in 0..table.ell {
            let m = table.get(s, t).norm();
            if m > best.2 {
                best = (s, t, m);
            }
        }
    }
    best
}

/// Fraction of tables whose largest coefficient is at least `threshold_factor · ℓ`.
pub fn dominant_fraction(tables: &[FourierTable], threshold_factor: f64) -> Result<f64> {
    if tables.is_empty() {
        return Err(invalid("dominant_fraction of no fields"));
    }
    let hits = tables
        .iter()
        .filter(|t| max_coefficient(t).2 >= threshold_factor * t.ell as f64)
        .count();
    Ok(hits as f64 / tables.len() as f64)
}

/// How [`wave_fourier_variance`] evaluates `Var(ℓ, s, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarianceMethod {
    /// Deterministic quadratic form of `M(E)` against the Fourier phases.
    QuadraticForm,
    /// Monte Carlo over the random angle pair `(A, B)`.
    Expectation,
}

/// A variance value and its Monte-Carlo standard error (zero for the quadratic form).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub value: f64,
    pub stderr: f64,
}

/// `Var(ℓ, s, t) = E|Ẑ(ℓ, s, t)|²` from a ratio table covering offsets `< ℓ`.
///
/// Uses `(1/ℓ²) Σ_{a,b} M(a,b) (ℓ-|a|)(ℓ-|b|) e^{-i(a s' + b t')}`, `s' = 2πs/ℓ`.
pub fn wave_variance_quadratic(table: &RhoRatioTable, ell: usize, s: usize, t: usize) -> Result<f64> {
    if table.max_offset + 1 < ell {
        return Err(invalid(format!("ratio table reaches offset {}, need {}", table.max_offset, ell - 1)));
    }
    let l = ell as i64;
    let w = 2.0 * PI / ell as f64;
    let (sp, tp) = (w * s as f64, w * t as f64);
    // the kernel is even in a and in b separately, so the phases reduce to cosines
    let cs: Vec<f64> = (0..l).map(|a| (a as f64 * sp).cos() * if a == 0 { 1.0 } else { 2.0 }).collect();
    let ct: Vec<f64> = (0..l).map(|b| (b as f64 * tp).cos() * if b == 0 { 1.0 } else { 2.0 }).collect();
    let mut acc = 0.0;
    for a in 0..l {
        let wa = (l - a) as f64 * cs[a as usize];
        for b in 0..l {
            acc += table.ratio(a, b) * wa * (l - b) as f64 * ct[b as usize];
        }
    }
    Ok(acc / (ell * ell) as f64)
}

#[inline]
fn dirichlet_sq(ell: usize, u: f64) -> f64 {
    let h = 0.5 * u;
    let den = h.sin();
    if den.abs() < 1e-12 {
        (ell * ell) as f64
    } else {
        let num = (ell as f64 * h).sin();
        (num * num) / (den * den)
    }
}

/// Monte-Carlo estimate of `(1/ℓ²) E |Σ_x e^{ix s_A}|² |Σ_y e^{iy t_B}|²`.
pub fn wave_variance_expectation<R: Rng + ?Sized>(
    sampler: &AnglePairSampler,
    ell: usize,
    s: usize,
    t: usize,
    budget: usize,
    rng: &mut R,
) -> Result<VarianceEstimate> {
    if budget < 2 {
        return Err(invalid("expectation method needs at least 2 samples"));
    }
    let w = 2.0 * PI / ell as f64;
    let (sp, tp) = (w * s as f64, w * t as f64);
    let norm = (ell * ell) as f64;
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..budget {
        let p = sampler.sample(rng);
        let v = dirichlet_sq(ell, p.alpha - sp) * dirichlet_sq(ell, p.beta - tp) / norm;
        sum += v;
        sum_sq += v * v;
    }
    let k = budget as f64;
    let mean = sum / k;
    let var = ((sum_sq - k * mean * mean) / (k - 1.0)).max(0.0);
    Ok(VarianceEstimate { value: mean, stderr: (var / k).sqrt() })
}

/// `Var(ℓ, s, t)` of the Gaussian wave at energy `E`, by either method.
pub fn wave_fourier_variance<R: Rng + ?Sized>(
    energy: f64,
    ell: usize,
    s: usize,
    t: usize,
    method: VarianceMethod,
    budget: usize,
    tol: f64,
    rng: &mut R,
) -> Result<VarianceEstimate> {
    if s >= ell || t >= ell {
        return Err(invalid("(s, t) must lie in {0..ℓ-1}²"));
    }
    match method {
        VarianceMethod::QuadraticForm => {
            let table = RhoRatioTable::new(energy, ell - 1, tol)?;
            Ok(VarianceEstimate { value: wave_variance_quadratic(&table, ell, s, t)?, stderr: 0.0 })
        }
        VarianceMethod::Expectation => {
            let sampler = AnglePairSampler::new(energy)?;
            wave_variance_expectation(&sampler, ell, s, t, budget, rng)
        }
    }
}

/// `s` folded into `(-ℓ/2, ℓ/2]`.
pub fn fold_frequency(s: usize, ell: usize) -> i64 {
    let s = s as i64;
    let l = ell as i64;
    if 2 * s > l {
        s - l
    } else {
        s
    }
}

#[inline]
fn mod_2pi_dist(x: f64) -> f64 {
    let r = x.rem_euclid(2.0 * PI);
    r.min(2.0 * PI - r)
}

/// Sampled level curve `2cos α + 2cos β = |E|` in `[-π, π]²`.
#[derive(Debug, Clone)]
pub struct LevelCurve {
    pub energy: f64,
    points: Vec<(f64, f64)>,
}

impl LevelCurve {
    pub fn new(energy: f64, samples: usize) -> Result<Self> {
        if energy == 0.0 || !(energy.abs() < 4.0) {
            return Err(invalid(format!("level curve needs E in (-4,4)\\{{0}}, got {energy}")));
        }
        // E < 0 is reduced to |E| by the checkerboard symmetry, see `scaled_frequency`
        let e = energy.abs();
        let mut points = Vec::with_capacity(4 * samples);
        for i in 0..samples {
            let alpha = -PI + 2.0 * PI * (i as f64 + 0.5) / samples as f64;
            let c = 0.5 * e - alpha.cos();
            if c.abs() <= 1.0 {
                let beta = c.acos();
                points.push((alpha, beta));
                points.push((alpha, -beta));
                points.push((beta, alpha));
                points.push((-beta, alpha));
            }
        }
        Ok(Self { energy, points })
    }

    /// `inf_{(α,β) ∈ γ} ‖(a - α, b - β)‖_{∞, mod 2π}`.
    pub fn distance(&self, a: f64, b: f64) -> f64 {
        self.points
            .iter()
            .map(|&(x, y)| mod_2pi_dist(a - x).max(mod_2pi_dist(b - y)))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Scaled frequency `(2πs/ℓ, 2πt/ℓ)` with `s, t` folded; shifted by `(π, π)` for `E < 0`.
pub fn scaled_frequency(energy: f64, ell: usize, s: usize, t: usize) -> (f64, f64) {
    let w = 2.0 * PI / ell as f64;
    let (mut a, mut b) = (w * fold_frequency(s, ell) as f64, w * fold_frequency(t, ell) as f64);
    if energy < 0.0 {
        a = (a + 2.0 * PI).rem_euclid(2.0 * PI) - PI;
        b = (b + 2.0 * PI).rem_euclid(2.0 * PI) - PI;
    }
    (a, b)
}

/// Result of the exhaustive geometric scan over all `(s, t)` at one `ℓ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricScan {
    pub ell: usize,
    pub energy: f64,
    /// Frequencies within `ℓ^{-1/2}` of the level curve.
    pub near_count: usize,
    /// Largest `Var/ℓ` among frequencies farther than `ℓ^{-1/2}`.
    pub far_max_ratio: f64,
    /// `max over near frequencies of min(|α'|, |β'|)`.
    pub near_delta: f64,
    /// `acos((|E| - 2)/2)`, the half-side of the square containing the curve.
    pub square_half_side: f64,
}

/// Checks the off-curve bound `Var ≤ 16ℓ` and the coordinate filter on every `(s, t)`.
pub fn geometric_scan(table: &RhoRatioTable, ell: usize, curve: &LevelCurve) -> Result<GeometricScan> {
    let radius = (ell as f64).powf(-0.5);
    let mut near_count = 0;
    let mut far_max_ratio = 0.0f64;
    let mut near_delta = 0.0f64;
    for s in 0..ell {
        for t in 0..ell {
            let (a, b) = scaled_frequency(curve.energy, ell, s, t);
            let dist = curve.distance(a, b);
            if dist <= radius {
                near_count += 1;
                near_delta = near_delta.max(a.abs().min(b.abs()));
            } else {
                let v = wave_variance_quadratic(table, ell, s, t)?;
                far_max_ratio = far_max_ratio.max(v / ell as f64);
            }
        }
    }
    Ok(GeometricScan {
        ell,
        energy: curve.energy,
        near_count,
        far_max_ratio,
        near_delta,
        square_half_side: (0.5 * (curve.energy.abs() - 2.0)).acos(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_pure_frequency() {
        let ell = 8;
        let ones = LatticeField::from_fn(10, 10, |_, _| Complex64::new(1.0, 0.0));
        let t = local_fourier(&ones, ell, (1, 2)).unwrap();
        assert!((t.get(0, 0).re - ell as f64).abs() < 1e-12);
        assert_eq!(max_coefficient(&t), (0, 0, t.get(0, 0).norm()));
        let (s0, t0) = (3usize, 5usize);
        let wave = LatticeField::from_fn(ell, ell, |x, y| {
            Complex64::from_polar(1.0, 2.0 * PI * (x * s0 + y * t0) as f64 / ell as f64)
        });
        let tab = local_fourier(&wave, ell, (0, 0)).unwrap();
        for s in 0..ell {
            for t in 0..ell {
                let target = if (s, t) == (s0, t0) { ell as f64 } else { 0.0 };
                assert!((tab.get(s, t).norm() - target).abs() < 1e-10);
            }
        }
        assert!(local_fourier(&ones, 11, (0, 0)).is_err());
    }

    #[test]
    fn folding() {
        assert_eq!(fold_frequency(3, 8), 3);
        assert_eq!(fold_frequency(4, 8), 4);
        assert_eq!(fold_frequency(5, 8), -3);
    }
}
