//! Spectral densities of the one- and two-dimensional integer lattices.
//!
//! `d_a` is the density of the spectral measure of the adjacency operator of
//! ℤ between two sites at distance `a` (an arcsine law weighted by a
//! Chebyshev polynomial), and `rho(a, b, ·) = d_a * d_b` is the corresponding
//! density for ℤ².  Both are evaluated with singularity-aware quadrature.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::quad::{tanh_sinh, tanh_sinh_split};

/// Default absolute accuracy for lattice density quadrature.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Minimal distance from the singular abscissae `0` and `±4` used by the
/// default tabulation grids.
pub const SINGULAR_CLAMP: f64 = 1e-3;

/// A lattice offset `(a, b)` in ℤ².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OffsetPair {
    pub a: i64,
    pub b: i64,
}

impl OffsetPair {
    pub fn new(a: i64, b: i64) -> Self {
        Self { a, b }
    }
}

/// Chebyshev polynomial of the first kind, by the three-term recurrence.
pub fn chebyshev_t(degree: u64, x: f64) -> f64 {
    match degree {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut prev, mut cur) = (1.0, x);
            for _ in 1..degree {
                let next = 2.0 * x * cur - prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// `d_a(t) = T_|a|(t/2) / (π √(4 - t²))` on `|t| < 2`, zero outside.
pub fn chebyshev_arcsine_density(a: i64, t: f64) -> Result<f64> {
    if t.abs() == 2.0 {
        return Err(LabError::SingularAbscissa(t));
    }
    if t.abs() > 2.0 {
        return Ok(0.0);
    }
    Ok(chebyshev_t(a.unsigned_abs(), 0.5 * t) / (PI * ((2.0 - t) * (2.0 + t)).sqrt()))
}

/// Partner angle on the level curve `2cos(s) + 2cos(r) = lambda`, returned as
/// `(r, sin r)`. Only valid for `lambda > 0` and `s` in `[0, acos(lambda/4)]`.
#[inline]
fn curve_partner(lambda: f64, s: f64) -> (f64, f64) {
    let c = 0.5 * lambda - s.cos();
    let half = (0.5 * s).sin();
    let one_plus = 0.5 * lambda + 2.0 * half * half;
    let one_minus = 1.0 - 0.5 * lambda + s.cos();
    let sin_r = (one_plus * one_minus).max(0.0).sqrt();
    (sin_r.atan2(c), sin_r)
}

fn rho_positive(a: i64, b: i64, lambda: f64, tol: f64) -> f64 {
    // After substituting θ = 2cos(s) for the first factor and splitting the
    // level curve at its diagonal point, both halves are integrals over
    // [0, acos(λ/4)] of a bounded integrand.
    let s_m = (0.25 * lambda).acos();
    let mut breaks = vec![0.0];
    let knee = lambda.sqrt();
    if knee < 0.5 * s_m {
        breaks.push(knee);
    }
    breaks.push(s_m);
    let piece = |p: i64, q: i64| {
        let (p, q) = (p as f64, q as f64);
        tanh_sinh_split(
            |s| {
                let (r, sin_r) = curve_partner(lambda, s);
                (p * s).cos() * (q * r).cos() / sin_r
            },
            &breaks,
            tol,
        )
        .value
    };
    let total = if a.abs() == b.abs() { 2.0 * piece(a, b) } else { piece(a, b) + piece(b, a) };
    total / (2.0 * PI * PI)
}

/// `rho_{a,b}(lambda) = (d_a * d_b)(lambda)` to absolute accuracy `tol`.
pub fn rho(a: i64, b: i64, lambda: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(invalid("tol must be positive"));
    }
    if lambda == 0.0 || lambda.abs() == 4.0 {
        return Err(LabError::SingularAbscissa(lambda));
    }
    if lambda.abs() > 4.0 {
        return Ok(0.0);
    }
    let v = rho_positive(a.abs(), b.abs(), lambda.abs(), tol);
    // d_a(-t) = (-1)^a d_a(t)
    if lambda < 0.0 && (a + b).rem_euclid(2) == 1 {
        Ok(-v)
    } else {
        Ok(v)
    }
}

/// Normalized ratio `rho_{a,b}(E) / rho_{0,0}(E)`.
pub fn rho_ratio(a: i64, b: i64, energy: f64, tol: f64) -> Result<f64> {
    let base = rho(0, 0, energy, tol)?;
    Ok(rho(a, b, energy, tol)? / base)
}

/// Integral of `rho_{a,b}` over `[lo, hi]`, split at the singular points.
pub fn rho_integral(a: i64, b: i64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (lo, hi) = (lo.max(-4.0), hi.min(4.0));
    if lo >= hi {
        return Ok(0.0);
    }
    let mut breaks = vec![lo];
    if lo < 0.0 && hi > 0.0 {
        breaks.push(0.0);
    }
    breaks.push(hi);
    let inner = tol * 1e-2;
    Ok(tanh_sinh_split(|x| rho(a, b, x, inner).unwrap_or(0.0), &breaks, tol).value)
}

/// Table of `rho_{a,b}(E) / rho_{0,0}(E)` for `0 ≤ a, b ≤ max_offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoRatioTable {
    pub energy: f64,
    pub max_offset: usize,
    pub tol: f64,
    values: Vec<f64>,
}

impl RhoRatioTable {
    pub fn new(energy: f64, max_offset: usize, tol: f64) -> Result<Self> {
        use rayon::prelude::*;
        if energy == 0.0 || !(energy.abs() < 4.0) {
            return Err(invalid(format!("ratio table needs E in (-4,4)\\{{0}}, got {energy}")));
        }
        let m = max_offset + 1;
        let base = rho(0, 0, energy, tol)?;
        // only a ≤ b is computed; the table is symmetric
        let pairs: Vec<(usize, usize)> = (0..m).flat_map(|a| (a..m).map(move |b| (a, b))).collect();
        let vals = pairs
            .par_iter()
            .map(|&(a, b)| rho(a as i64, b as i64, energy, tol).map(|v| v / base))
            .collect::<Result<Vec<_>>>()?;
        let mut values = vec![0.0; m * m];
        for (&(a, b), v) in pairs.iter().zip(vals) {
            values[a * m + b] = v;
            values[b * m + a] = v;
        }
        Ok(Self { energy, max_offset, tol, values })
    }

    /// `rho_{a,b}(E) / rho_{0,0}(E)`; panics if `|a|` or `|b|` exceeds the table.
    #[inline]
    pub fn ratio(&self, a: i64, b: i64) -> f64 {
        let m = self.max_offset + 1;
        self.values[a.unsigned_abs() as usize * m + b.unsigned_abs() as usize]
    }
}

/// Root `q` of `q + 1/q = w` with `|q| < 1`.
#[inline]
pub(crate) fn inner_root(w: Complex64) -> Complex64 {
    let disc = (w * w - 4.0).sqrt();
    let plus = w + disc;
    let minus = w - disc;
    let big = if plus.norm_sqr() >= minus.norm_sqr() { plus } else { minus };
    2.0 / big
}

/// Stieltjes transform `∫ d_a(x) / (x - w) dx` of the one-dimensional density.
pub fn arcsine_stieltjes(a: i64, w: Complex64) -> Complex64 {
    let q = inner_root(w);
    -q.powu(a.unsigned_abs() as u32 + 1) / (1.0 - q * q)
}

fn lattice_stieltjes_part(a: i64, b: i64, z: Complex64, tol: f64, imag: bool) -> f64 {
    let mut breaks = vec![0.0];
    for shift in [-2.0, 2.0] {
        let c = 0.5 * (z.re - shift);
        if c.abs() < 1.0 {
            breaks.push(c.acos());
        }
    }
    breaks.push(PI);
    breaks.sort_by(|x, y| x.total_cmp(y));
    let a = a as f64;
    let q = tanh_sinh_split(
        |s| {
            let v = (a * s).cos() * arcsine_stieltjes(b, z - 2.0 * s.cos());
            if imag { v.im } else { v.re }
        },
        &breaks,
        tol,
    );
    q.value / PI
}

/// Stieltjes transform `∫ rho_{a,b}(x) / (x - z) dx` for `Im z > 0`.
pub fn lattice_stieltjes(a: i64, b: i64, z: Complex64, tol: f64) -> Result<Complex64> {
    if !(z.im > 0.0) {
        return Err(invalid("Stieltjes transform needs Im z > 0"));
    }
    Ok(Complex64::new(
        lattice_stieltjes_part(a, b, z, tol, false),
        lattice_stieltjes_part(a, b, z, tol, true),
    ))
}

/// `(kappa_eta * rho_{a,b})(lambda) = Im` of the lattice Stieltjes transform at `lambda + i eta`.
pub fn smoothed_rho(a: i64, b: i64, eta: f64, lambda: f64, tol: f64) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(invalid("eta must be positive"));
    }
    Ok(lattice_stieltjes_part(a, b, Complex64::new(lambda, eta), tol, true))
}

/// The kernel `kappa_eta(x) = eta / (x² + eta²)`, i.e. π times the Cauchy density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CauchyKernel {
    eta: f64,
}

impl CauchyKernel {
    pub fn new(eta: f64) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(invalid(format!("Cauchy kernel needs eta > 0, got {eta}")));
        }
        Ok(Self { eta })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.eta / (x * x + self.eta * self.eta)
    }
}

/// Anything that can be convolved with `kappa_eta` and evaluated at a point.
pub trait CauchySmooth {
    type Output;
    fn cauchy_smooth(&self, kernel: CauchyKernel, lambda: f64) -> Self::Output;
}

/// `(kappa_eta * f)(lambda)` for a density grid or an atomic measure.
pub fn cauchy_smooth<S: CauchySmooth>(source: &S, eta: f64, lambda: f64) -> Result<S::Output> {
    Ok(source.cauchy_smooth(CauchyKernel::new(eta)?, lambda))
}

/// The smooth density `rho_{a,b}` itself, smoothed through its Stieltjes transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeDensity {
    pub offset: OffsetPair,
    pub tol: f64,
}

impl CauchySmooth for LatticeDensity {
    type Output = f64;
    fn cauchy_smooth(&self, kernel: CauchyKernel, lambda: f64) -> f64 {
        lattice_stieltjes_part(
            self.offset.a,
            self.offset.b,
            Complex64::new(lambda, kernel.eta()),
            self.tol,
            true,
        )
    }
}

/// A real density tabulated on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub offset: OffsetPair,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Abscissae where the density is singular; never tabulated.
    pub singular_points: Vec<f64>,
    pub tol: f64,
}

#[derive(Serialize, Deserialize)]
struct DensitySidecar {
    a: i64,
    b: i64,
    tol: f64,
    singular_points: Vec<f64>,
    points: usize,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("density grid must be strictly increasing"));
    }
    Ok(())
}

impl DensityGrid {
    /// Uniform grid on `[-4, 4]` avoiding `0` and `±4` by [`SINGULAR_CLAMP`].
    pub fn default_rho_abscissae(count: usize) -> Vec<f64> {
        let lo = -4.0 + SINGULAR_CLAMP;
        let hi = 4.0 - SINGULAR_CLAMP;
        (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .filter(|x| x.abs() >= SINGULAR_CLAMP)
            .collect()
    }

    /// Tabulates `rho_{a,b}` on `grid`. Any singular abscissa on the grid is an error.
    pub fn tabulate_rho(a: i64, b: i64, grid: &[f64], tol: f64) -> Result<Self> {
        check_grid(grid)?;
        let values = grid.iter().map(|&x| rho(a, b, x, tol)).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            offset: OffsetPair::new(a, b),
            grid: grid.to_vec(),
            values,
            singular_points: vec![-4.0, 0.0, 4.0],
            tol,
        })
    }

    /// Tabulates the one-dimensional density `d_a` (stored with `b = 0`).
    pub fn tabulate_arcsine(a: i64, grid: &[f64]) -> Result<Self> {
        check_grid(grid)?;
        let values = grid
            .iter()
            .map(|&x| chebyshev_arcsine_density(a, x))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            offset: OffsetPair::new(a, 0),
            grid: grid.to_vec(),
            values,
            singular_points: vec![-2.0, 2.0],
            tol: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Trapezoid integral over the tabulated range.
    pub fn integral(&self) -> f64 {
        crate::quad::trapezoid(&self.grid, &self.values)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
        w.write_record(["lambda", "value"])?;
        for (x, v) in self.grid.iter().zip(&self.values) {
            w.write_record([format!("{x:.17e}"), format!("{v:.17e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_sidecar(&self, path: &Path) -> Result<()> {
        let meta = DensitySidecar {
            a: self.offset.a,
            b: self.offset.b,
            tol: self.tol,
            singular_points: self.singular_points.clone(),
            points: self.grid.len(),
        };
        let mut f = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut f, &meta)?;
        f.write_all(b"\n")?;
        Ok(())
    }

    /// Reads a `lambda,value` CSV and its JSON sidecar.
    pub fn read(csv_path: &Path, sidecar_path: &Path) -> Result<Self> {
        let meta: DensitySidecar = serde_json::from_reader(File::open(sidecar_path)?)?;
        let mut r = csv::Reader::from_path(csv_path)?;
        let mut grid = Vec::new();
        let mut values = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| invalid(format!("bad CSV field in {}", csv_path.display())))
            };
            grid.push(parse(0)?);
            values.push(parse(1)?);
        }
        check_grid(&grid)?;
        Ok(Self {
            offset: OffsetPair::new(meta.a, meta.b),
            grid,
            values,
            singular_points: meta.singular_points,
            tol: meta.tol,
        })
    }
}

impl CauchySmooth for DensityGrid {
    type Output = f64;
    fn cauchy_smooth(&self, kernel: CauchyKernel, lambda: f64) -> f64 {
        let weighted: Vec<f64> = self
            .grid
            .iter()
            .zip(&self.values)
            .map(|(&x, &v)| v * kernel.eval(x - lambda))
            .collect();
        crate::quad::trapezoid(&self.grid, &weighted)
    }
}

/// `‖f_1‖_p` where `f_1(t) = ∫_{-∞}^t (kappa_1 - π δ)`, so `|f_1(t)| = atan(1/|t|)`.
///
/// Integrated on `[-T, T]` with `T = 1e6`; the remaining tail uses
/// `atan(1/t) ≤ 1/t`.
pub fn f1_lp_norm(p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(invalid(format!("‖f_1‖_p diverges for p = {p} ≤ 1")));
    }
    const T: f64 = 1e6;
    let near = tanh_sinh(|t: f64| (1.0 / t).atan().powf(p), 0.0, 1.0, 1e-14).value;
    // t = 1/v on [1, T]
    let far = tanh_sinh(|v: f64| v.atan().powf(p) / (v * v), 1.0 / T, 1.0, 1e-14).value;
    let tail = T.powf(1.0 - p) / (p - 1.0);
    Ok((2.0 * (near + far + tail)).powf(1.0 / p))
}

/// `c_{eps,p} = eps^{-1/p} + c_p eps^{-3/2}` with `c_p = 8 ‖f_1‖_p`.
pub fn continuity_constants(epsilon: f64, p: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(invalid(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    let c_p = 8.0 * f1_lp_norm(p)?;
    Ok(epsilon.powf(-1.0 / p) + c_p * epsilon.powf(-1.5))
}

/// A point `(alpha, beta)` on the level curve `2cos(alpha) + 2cos(beta) = E`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnglePair {
    pub alpha: f64,
    pub beta: f64,
}

const ANGLE_TABLE: usize = 4096;

/// Inverse-CDF sampler for the random angles `(A, B)` whose characteristic
/// function is `rho_{a,b}(E) / rho_{0,0}(E)`.
///
/// The level curve is parametrized by `tau ∈ [0, 2 s_m]`: the first half
/// follows `s = tau`, the second half follows the partner angle, so the
/// curve density is bounded everywhere (away from `E = 0`).
#[derive(Debug, Clone)]
pub struct AnglePairSampler {
    energy: f64,
    s_m: f64,
    taus: Vec<f64>,
    cdf: Vec<f64>,
}

impl AnglePairSampler {
    pub fn new(energy: f64) -> Result<Self> {
        if !(energy.abs() < 4.0) || energy == 0.0 {
            return Err(invalid(format!("angle sampling needs E in (-4,4)\\{{0}}, got {energy}")));
        }
        let lam = energy.abs();
        let s_m = (0.25 * lam).acos();
        let density = |tau: f64| {
            let x = if tau <= s_m { tau } else { 2.0 * s_m - tau };
            1.0 / curve_partner(lam, x.max(0.0)).1
        };
        let taus: Vec<f64> = (0..ANGLE_TABLE)
            .map(|i| 2.0 * s_m * i as f64 / (ANGLE_TABLE - 1) as f64)
            .collect();
        // three-point Gauss-Legendre per cell
        let g = (0.6f64).sqrt();
        let mut cdf = Vec::with_capacity(ANGLE_TABLE);
        cdf.push(0.0);
        for w in taus.windows(2) {
            let (c, h) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            let cell = h * (5.0 * density(c - g * h) + 8.0 * density(c) + 5.0 * density(c + g * h)) / 9.0;
            cdf.push(cdf.last().unwrap() + cell);
        }
        let total = *cdf.last().unwrap();
        cdf.iter_mut().for_each(|v| *v /= total);
        Ok(Self { energy, s_m, taus, cdf })
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Curve point (both angles in `[0, π]`) for the parameter `tau`.
    fn curve_point(&self, tau: f64) -> (f64, f64) {
        let lam = self.energy.abs();
        let (s, r) = if tau <= self.s_m {
            (tau, curve_partner(lam, tau).0)
        } else {
            let r = (2.0 * self.s_m - tau).max(0.0);
            (curve_partner(lam, r).0, r)
        };
        if self.energy < 0.0 { (PI - s, PI - r) } else { (s, r) }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> AnglePair {
        let u: f64 = rng.random();
        let idx = self.cdf.partition_point(|&c| c <= u).clamp(1, ANGLE_TABLE - 1);
        let (c0, c1) = (self.cdf[idx - 1], self.cdf[idx]);
        let frac = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        let tau = self.taus[idx - 1] + frac * (self.taus[idx] - self.taus[idx - 1]);
        let (s, r) = self.curve_point(tau);
        let sa = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let sb = if rng.random::<bool>() { 1.0 } else { -1.0 };
        AnglePair { alpha: sa * s, beta: sb * r }
    }
}

/// Draws one angle pair. Builds the CDF table on every call; use
/// [`AnglePairSampler`] for batches.
pub fn angle_pair_sample<R: Rng + ?Sized>(energy: f64, rng: &mut R) -> Result<AnglePair> {
    Ok(AnglePairSampler::new(energy)?.sample(rng))
}

/// Marginal density of `A`: `d_0(E - 2cos(alpha)) / (2π rho_{0,0}(E))` on its support.
pub fn alpha_marginal_density(energy: f64, alpha: f64, tol: f64) -> Result<f64> {
    let arg = energy - 2.0 * alpha.cos();
    if arg.abs() >= 2.0 {
        return Ok(0.0);
    }
    Ok(chebyshev_arcsine_density(0, arg)? / (2.0 * PI * rho(0, 0, energy, tol)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn arcsine_density_values() {
        assert!((chebyshev_arcsine_density(0, 0.0).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert!(chebyshev_arcsine_density(1, 0.0).unwrap().abs() < 1e-15);
        let v = chebyshev_arcsine_density(2, 1.0).unwrap();
        assert!((v + 1.0 / (2.0 * PI * 3f64.sqrt())).abs() < 1e-14);
        assert!(matches!(chebyshev_arcsine_density(3, 2.0), Err(LabError::SingularAbscissa(_))));
        assert_eq!(chebyshev_arcsine_density(3, 2.5).unwrap(), 0.0);
    }

    #[test]
    fn rho_rejects_singular_points() {
        for x in [0.0, 4.0, -4.0] {
            assert!(matches!(rho(0, 0, x, 1e-8), Err(LabError::SingularAbscissa(_))));
        }
        assert_eq!(rho(1, 2, 4.5, 1e-8).unwrap(), 0.0);
    }

    #[test]
    fn rho_matches_elliptic_closed_form() {
        // rho_{0,0}(E) = K(k)/(2π²), k² = 1 - E²/16 (arithmetic-geometric mean for K).
        for e in [0.3, 1.0, 2.0, 3.5] {
            let k2: f64 = 1.0 - e * e / 16.0;
            let (mut x, mut y) = (1.0f64, (1.0 - k2).sqrt());
            for _ in 0..40 {
                let (nx, ny) = (0.5 * (x + y), (x * y).sqrt());
                x = nx;
                y = ny;
            }
            let kk = PI / (2.0 * x);
            let exact = kk / (2.0 * PI * PI);
            assert!((rho(0, 0, e, 1e-10).unwrap() - exact).abs() < 1e-9, "E={e}");
        }
    }

    #[test]
    fn cauchy_kernel_requires_positive_eta() {
        assert!(CauchyKernel::new(0.0).is_err());
        assert!(CauchyKernel::new(-1.0).is_err());
        assert_eq!(CauchyKernel::new(2.0).unwrap().eval(0.0), 0.5);
    }

    #[test]
    fn arcsine_stieltjes_matches_quadrature() {
        let z = Complex64::new(0.7, 0.3);
        for a in 0..4 {
            let direct = |imag: bool| {
                tanh_sinh(
                    |s: f64| {
                        let v = ((a as f64) * s).cos() / (Complex64::new(2.0 * s.cos(), 0.0) - z) / PI;
                        if imag { v.im } else { v.re }
                    },
                    0.0,
                    PI,
                    1e-13,
                )
                .value
            };
            let got = arcsine_stieltjes(a, z);
            assert!((got.re - direct(false)).abs() < 1e-11);
            assert!((got.im - direct(true)).abs() < 1e-11);
        }
    }

    #[test]
    fn f1_norm_and_constants() {
        // ‖f_1‖_2² = 2∫_0^∞ atan(1/t)² dt = 2π ln 2
        let n2 = f1_lp_norm(2.0).unwrap();
        assert!((n2 * n2 - 2.0 * PI * 2f64.ln()).abs() / (2.0 * PI * 2f64.ln()) < 1e-4);
        assert!(f1_lp_norm(1.0).is_err());
        let c1 = continuity_constants(1.0, 2.0).unwrap();
        assert!((c1 - (1.0 + 8.0 * n2)).abs() < 1e-12);
        let mut prev = f64::INFINITY;
        for eps in [0.05, 0.1, 0.3, 0.6, 0.9] {
            let c = continuity_constants(eps, 3.0).unwrap();
            assert!(c < prev);
            prev = c;
        }
    }

    #[test]
    fn angle_pairs_lie_on_level_curve() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for e in [2.0, -1.3, 0.2, 3.9] {
            let sampler = AnglePairSampler::new(e).unwrap();
            for _ in 0..1000 {
                let p = sampler.sample(&mut rng);
                assert!((2.0 * p.alpha.cos() + 2.0 * p.beta.cos() - e).abs() < 1e-12);
            }
        }
        assert!(AnglePairSampler::new(0.0).is_err());
        assert!(AnglePairSampler::new(4.0).is_err());
    }
}
