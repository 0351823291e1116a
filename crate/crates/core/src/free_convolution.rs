//! Free convolution of a discrete probability measure with the semicircle
//! law of variance `t`.
//!
//! For `y` real, `v_t(y)` is the smallest `v ≥ 0` with
//! `∫ dμ(x) / ((x-y)² + v²) ≤ 1/t`, and `ψ_t(y) = y - t ∫ (x-y)/((x-y)² + v²) dμ`
//! maps the real line homeomorphically onto itself. The density of
//! `μ ⊞ σ_t` is `p_t(λ) = v_t(ψ_t⁻¹(λ)) / (πt)`.
//!
//! The distribution function is evaluated without quadrature: along the
//! boundary curve `ω(y) = y + i v_t(y)` the subordination relation
//! `z = ω - t m_μ(ω)` integrates to
//! `F(ψ_t(y)) = (1/π) [ -Σ w_j arg(x_j - ω) - (t/2) Im m_μ(ω)² ]`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::measure::AtomicMeasure;
use crate::quad::{bisect, tanh_sinh};
use crate::spectral_density::DensityGrid;

pub const DEFAULT_ROOT_TOL: f64 = 1e-10;

/// A probability measure `μ` (finitely many real atoms) and the semicircle variance `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeConvState {
    locations: Vec<f64>,
    weights: Vec<f64>,
    pub t: f64,
    pub root_tol: f64,
}

/// `γ_0 ≤ … ≤ γ_n` with `∫_{-∞}^{γ_i} p_t = i/n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileTable {
    pub gammas: Vec<f64>,
    /// `ψ_t⁻¹(γ_i)`.
    pub preimages: Vec<f64>,
}

impl FreeConvState {
    /// Requires real, non-negative weights summing to 1 (to `1e-12`).
    pub fn new(mu: &AtomicMeasure, t: f64, root_tol: f64) -> Result<Self> {
        if !(t > 0.0) || !(root_tol > 0.0) {
            return Err(invalid("free convolution needs t > 0 and root_tol > 0"));
        }
        if mu.is_empty() {
            return Err(invalid("free convolution of an empty measure"));
        }
        let mut atoms: Vec<(f64, f64)> = Vec::with_capacity(mu.len());
        for a in &mu.atoms {
            if a.weight.im != 0.0 || a.weight.re < 0.0 || !a.location.is_finite() {
                return Err(invalid("free convolution needs a positive measure with real weights"));
            }
            atoms.push((a.location, a.weight.re));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("measure has total mass {total}, expected 1")));
        }
        atoms.sort_by(|p, q| p.0.total_cmp(&q.0));
        Ok(Self {
            locations: atoms.iter().map(|a| a.0).collect(),
            weights: atoms.iter().map(|a| a.1).collect(),
            t,
            root_tol,
        })
    }

    /// Empirical measure of `values`.
    pub fn empirical(values: &[f64], t: f64) -> Result<Self> {
        Self::new(&AtomicMeasure::uniform(values), t, DEFAULT_ROOT_TOL)
    }

    /// Discretizes a tabulated density with trapezoid weights.
    pub fn from_density_grid(grid: &DensityGrid, t: f64) -> Result<Self> {
        let g = &grid.grid;
        let mut w = vec![0.0; g.len()];
        for i in 0..g.len().saturating_sub(1) {
            let h = 0.5 * (g[i + 1] - g[i]);
            w[i] += h * grid.values[i];
            w[i + 1] += h * grid.values[i + 1];
        }
        let total: f64 = w.iter().sum();
        let atoms = g
            .iter()
            .zip(&w)
            .map(|(&x, &wi)| crate::measure::Atom { location: x, weight: Complex64::new(wi / total, 0.0) })
            .collect();
        Self::new(&AtomicMeasure::new(atoms), t, DEFAULT_ROOT_TOL)
    }

    fn spread(&self) -> f64 {
        self.t.sqrt()
    }

    /// `∫ dμ / ((x-y)² + v²)`.
    fn inverse_square(&self, y: f64, v: f64) -> f64 {
        let v2 = v * v;
        self.locations
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w / ((x - y) * (x - y) + v2))
            .sum()
    }

    /// `m_μ(ω) = Σ w / (x - ω)`.
    pub fn stieltjes_mu(&self, omega: Complex64) -> Complex64 {
        self.locations.iter().zip(&self.weights).map(|(&x, &w)| w / (x - omega)).sum()
    }

    pub fn v_t(&self, y: f64) -> f64 {
        let target = 1.0 / self.t;
        let at_zero = self.inverse_square(y, 0.0);
        if at_zero.is_finite() && at_zero <= target {
            return 0.0;
        }
        // I(√t) ≤ 1/t always, and I is decreasing in v
        bisect(|v| self.inverse_square(y, v) - target, 0.0, self.spread(), self.root_tol).unwrap_or(self.spread())
    }

    fn psi_with(&self, y: f64, v: f64) -> f64 {
        let v2 = v * v;
        let s: f64 = self
            .locations
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * (x - y) / ((x - y) * (x - y) + v2))
            .sum();
        y - self.t * s
    }

    pub fn psi_t(&self, y: f64) -> f64 {
        self.psi_with(y, self.v_t(y))
    }

    /// `ψ_t⁻¹(λ)`, by bisection on `[λ - √t, λ + √t]`.
    pub fn psi_inv(&self, lambda: f64) -> Result<f64> {
        let r = self.spread() * (1.0 + 1e-12) + self.root_tol;
        bisect(|y| self.psi_t(y) - lambda, lambda - r, lambda + r, self.root_tol)
    }

    pub fn density(&self, lambda: f64) -> Result<f64> {
        let y = self.psi_inv(lambda)?;
        Ok(self.v_t(y) / (PI * self.t))
    }

    /// Stieltjes transform of `p_t` continued to the real axis: `((y - λ) + i v)/t` at `y = ψ_t⁻¹(λ)`.
    pub fn stieltjes_real(&self, lambda: f64) -> Result<Complex64> {
        let y = self.psi_inv(lambda)?;
        Ok(Complex64::new(y - lambda, self.v_t(y)) / self.t)
    }

    /// `F(ψ_t(y))`, the distribution function of `μ ⊞ σ_t` in the pre-image variable.
    pub fn cdf_at_preimage(&self, y: f64) -> f64 {
        let v = self.v_t(y);
        let omega = Complex64::new(y, v);
        let mut arg_sum = 0.0;
        for (&x, &w) in self.locations.iter().zip(&self.weights) {
            // arg(x - ω) ∈ [-π, 0]
            let a = if v == 0.0 {
                if x > y { 0.0 } else { -PI }
            } else {
                (-v).atan2(x - y)
            };
            arg_sum += w * a;
        }
        let m = self.stieltjes_mu(omega);
        let value = (-arg_sum - 0.5 * self.t * (m * m).im) / PI;
        value.clamp(0.0, 1.0)
    }

    pub fn cdf(&self, lambda: f64) -> Result<f64> {
        Ok(self.cdf_at_preimage(self.psi_inv(lambda)?))
    }

    /// Connected components of the support of `p_t`, as `λ`-intervals.
    pub fn support(&self) -> Vec<(f64, f64)> {
        let target = 1.0 / self.t;
        let excess = |y: f64| self.inverse_square(y, 0.0) - target;
        let xs = &self.locations;
        let spread = self.spread();
        let mut edges_y: Vec<(f64, f64)> = Vec::new();
        let mut lo = bisect(excess, xs[0] - 2.0 * spread - 1.0, xs[0] - 1e-300_f64.max(1e-15 * (1.0 + xs[0].abs())), self.root_tol * 1e-2)
            .unwrap_or(xs[0] - spread);
        for w in xs.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b - a <= 0.0 {
                continue;
            }
            // the excess is convex between atoms; locate its minimum from the sign of the derivative
            let deriv = |y: f64| -> f64 {
                xs.iter().zip(&self.weights).map(|(&x, &wt)| 2.0 * wt / (x - y).powi(3)).sum()
            };
            let eps = 1e-12 * (b - a);
            let ymin = bisect(deriv, a + eps, b - eps, 1e-14 * (b - a).max(1e-300)).unwrap_or(0.5 * (a + b));
            if excess(ymin) < 0.0 {
                let left = bisect(excess, a + eps, ymin, self.root_tol * 1e-2).unwrap_or(ymin);
                let right = bisect(excess, ymin, b - eps, self.root_tol * 1e-2).unwrap_or(ymin);
                edges_y.push((lo, left));
                lo = right;
            }
        }
        let last = *xs.last().unwrap();
        let hi = bisect(excess, last + 1e-15 * (1.0 + last.abs()), last + 2.0 * spread + 1.0, self.root_tol * 1e-2)
            .unwrap_or(last + spread);
        edges_y.push((lo, hi));
        edges_y
            .into_iter()
            .map(|(a, b)| (self.psi_with(a, 0.0), self.psi_with(b, 0.0)))
            .collect()
    }

    /// `∫ p_t` by tanh-sinh quadrature on each support component.
    pub fn total_mass(&self, tol: f64) -> f64 {
        self.support()
            .iter()
            .map(|&(a, b)| tanh_sinh(|l| self.density(l).unwrap_or(0.0), a, b, tol).value)
            .sum()
    }

    /// Quantiles `γ_0..γ_n`; each solves `F(ψ_t(y)) = i/n` for `y`, then `γ_i = ψ_t(y)`.
    pub fn quantiles(&self, n: usize) -> Result<QuantileTable> {
        if n == 0 {
            return Err(invalid("quantiles need n ≥ 1"));
        }
        let support = self.support();
        let lo_l = support.first().unwrap().0;
        let hi_l = support.last().unwrap().1;
        let y_lo = self.psi_inv(lo_l)?;
        let y_hi = self.psi_inv(hi_l)?;
        let mut gammas = Vec::with_capacity(n + 1);
        let mut preimages = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let q = i as f64 / n as f64;
            let y = if i == 0 {
                y_lo
            } else if i == n {
                y_hi
            } else {
                bisect(|y| self.cdf_at_preimage(y) - q, y_lo, y_hi, self.root_tol)?
            };
            preimages.push(y);
            gammas.push(self.psi_t(y));
        }
        // enforce monotonicity against round-off in flat stretches
        for i in 1..gammas.len() {
            if gammas[i] < gammas[i - 1] {
                gammas[i] = gammas[i - 1];
            }
        }
        Ok(QuantileTable { gammas, preimages })
    }

    /// `γ_{k,t}` and its pre-image for a single `k`.
    pub fn quantile(&self, k: usize, n: usize) -> Result<(f64, f64)> {
        if k > n || n == 0 {
            return Err(invalid("quantile index out of range"));
        }
        let support = self.support();
        let y_lo = self.psi_inv(support.first().unwrap().0)?;
        let y_hi = self.psi_inv(support.last().unwrap().1)?;
        if k == 0 {
            return Ok((self.psi_t(y_lo), y_lo));
        }
        if k == n {
            return Ok((self.psi_t(y_hi), y_hi));
        }
        let q = k as f64 / n as f64;
        let y = bisect(|y| self.cdf_at_preimage(y) - q, y_lo, y_hi, self.root_tol)?;
        Ok((self.psi_t(y), y))
    }
}

/// `σ²(q, k) = Σ |q_j|² t / ((d_j - y)² + v_t(y)²)` with `y = ψ_t⁻¹(γ_{k,t})`,
/// `μ` the empirical measure of `d`.
pub fn sigma_sq(q: &[Complex64], k: usize, d: &[f64], t: f64) -> Result<f64> {
    if q.len() != d.len() {
        return Err(invalid("q and D must have the same length"));
    }
    let norm: f64 = q.iter().map(|x| x.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(invalid(format!("q must be a unit vector, ‖q‖² = {norm}")));
    }
    let n = d.len();
    if k == 0 || k > n {
        return Err(invalid("k must lie in 1..=n"));
    }
    let state = FreeConvState::empirical(d, t)?;
    let (_, y) = state.quantile(k, n)?;
    let v = state.v_t(y);
    Ok(q
        .iter()
        .zip(d)
        .map(|(qj, &dj)| qj.norm_sqr() * t / ((dj - y) * (dj - y) + v * v))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dirac(t: f64) -> FreeConvState {
        FreeConvState::new(&AtomicMeasure::dirac(0.0), t, DEFAULT_ROOT_TOL).unwrap()
    }

    #[test]
    fn dirac_closed_forms() {
        let t = 0.3;
        let s = dirac(t);
        assert!((s.v_t(0.0) - t.sqrt()).abs() < 1e-9);
        assert!((s.v_t(0.2) - (t - 0.04f64).sqrt()).abs() < 1e-9);
        assert_eq!(s.v_t(0.6), 0.0);
        assert!((s.psi_t(0.25) - 0.5).abs() < 1e-8);
        assert!((s.psi_inv(0.5).unwrap() - 0.25).abs() < 1e-8);
        assert!((s.density(0.0).unwrap() - 1.0 / (PI * t.sqrt())).abs() < 1e-8);
        let sup = s.support();
        assert_eq!(sup.len(), 1);
        assert!((sup[0].0 + 2.0 * t.sqrt()).abs() < 1e-8 && (sup[0].1 - 2.0 * t.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn dirac_cdf_is_semicircle_cdf() {
        let t: f64 = 0.5;
        let s = dirac(t);
        let r = 2.0 * t.sqrt();
        for &l in &[-1.2, -0.5, 0.0, 0.3, 1.1] {
            let x: f64 = l / r;
            let exact = 0.5 + (x * (1.0 - x * x).sqrt() + x.asin()) / PI;
            assert!((s.cdf(l).unwrap() - exact).abs() < 1e-8, "λ={l}");
        }
    }

    #[test]
    fn separated_atoms_have_two_components() {
        let mu = AtomicMeasure::uniform(&[-2.0, 2.0]);
        let s = FreeConvState::new(&mu, 0.05, DEFAULT_ROOT_TOL).unwrap();
        assert_eq!(s.support().len(), 2);
        assert!((s.total_mass(1e-10) - 1.0).abs() < 1e-7);
    }
}
