//! Finite complex measures on the real line.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::spectral_density::{CauchyKernel, CauchySmooth};

/// A single atom `weight · δ(location)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub weight: Complex64,
}

/// Finitely many atoms with complex weights.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AtomicMeasure {
    pub atoms: Vec<Atom>,
}

impl AtomicMeasure {
    pub fn new(atoms: Vec<Atom>) -> Self {
        Self { atoms }
    }

    /// Probability measure with equal real weights at `locations`.
    pub fn uniform(locations: &[f64]) -> Self {
        let w = Complex64::new(1.0 / locations.len() as f64, 0.0);
        Self::new(locations.iter().map(|&x| Atom { location: x, weight: w }).collect())
    }

    pub fn dirac(location: f64) -> Self {
        Self::new(vec![Atom { location, weight: Complex64::new(1.0, 0.0) }])
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_weight(&self) -> Complex64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// `Σ |w_i|`.
    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight.norm()).sum()
    }

    pub fn locations(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.location).collect()
    }

    /// `∫ f dμ`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> Complex64 {
        self.atoms.iter().map(|a| a.weight * f(a.location)).sum()
    }

    /// Stieltjes transform `Σ w_i / (x_i - z)`.
    pub fn stieltjes(&self, z: Complex64) -> Result<Complex64> {
        if !(z.im > 0.0) {
            return Err(invalid(format!("Stieltjes transform needs Im z > 0, got {z}")));
        }
        Ok(self.atoms.iter().map(|a| a.weight / (a.location - z)).sum())
    }

    /// Convolution: atoms at pairwise sums, weights multiplied.
    pub fn convolve(&self, other: &Self) -> Self {
        let mut atoms = Vec::with_capacity(self.len() * other.len());
        for x in &self.atoms {
            for y in &other.atoms {
                atoms.push(Atom { location: x.location + y.location, weight: x.weight * y.weight });
            }
        }
        Self::new(atoms)
    }

    /// Sorts atoms by location, then by weight, so equal measures compare equal.
    pub fn canonical_sort(&mut self) {
        self.atoms.sort_by(|p, q| {
            p.location
                .total_cmp(&q.location)
                .then(p.weight.re.total_cmp(&q.weight.re))
                .then(p.weight.im.total_cmp(&q.weight.im))
        });
    }

    /// Total weight in the half-open interval `[lo, hi)`.
    pub fn mass_in(&self, lo: f64, hi: f64) -> Complex64 {
        self.atoms
            .iter()
            .filter(|a| a.location >= lo && a.location < hi)
            .map(|a| a.weight)
            .sum()
    }

    /// Largest atom-wise distance to `other` after canonical sorting of both.
    pub fn max_atom_distance(&self, other: &Self) -> Option<f64> {
        if self.len() != other.len() {
            return None;
        }
        let (mut p, mut q) = (self.clone(), other.clone());
        p.canonical_sort();
        q.canonical_sort();
        Some(
            p.atoms
                .iter()
                .zip(&q.atoms)
                .map(|(x, y)| (x.location - y.location).abs().max((x.weight - y.weight).norm()))
                .fold(0.0, f64::max),
        )
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
        w.write_record(["location", "re_weight", "im_weight"])?;
        for a in &self.atoms {
            w.write_record([
                format!("{:.17e}", a.location),
                format!("{:.17e}", a.weight.re),
                format!("{:.17e}", a.weight.im),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

impl CauchySmooth for AtomicMeasure {
    type Output = Complex64;
    fn cauchy_smooth(&self, kernel: CauchyKernel, lambda: f64) -> Complex64 {
        self.atoms.iter().map(|a| a.weight * kernel.eval(a.location - lambda)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_density::cauchy_smooth;

    #[test]
    fn unit_atom_smoothing() {
        let m = AtomicMeasure::dirac(0.3);
        let eta = 0.05;
        assert!((cauchy_smooth(&m, eta, 0.3).unwrap().re - 1.0 / eta).abs() < 1e-12);
        assert!((cauchy_smooth(&m, eta, 0.3 + eta).unwrap().re - 0.5 / eta).abs() < 1e-12);
    }

    #[test]
    fn stieltjes_of_dirac() {
        let m = AtomicMeasure::dirac(0.0);
        let s = m.stieltjes(Complex64::new(0.0, 1.0)).unwrap();
        assert!((s - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!(m.stieltjes(Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn convolution_and_mass() {
        let a = AtomicMeasure::uniform(&[-1.0, 1.0]);
        let c = a.convolve(&a);
        assert_eq!(c.len(), 4);
        assert!((c.total_weight().re - 1.0).abs() < 1e-15);
        assert!((c.mass_in(0.0, 0.5).re - 0.5).abs() < 1e-15);
        assert!((c.mass_in(-2.0, 2.0).re - 0.75).abs() < 1e-15);
    }
}
