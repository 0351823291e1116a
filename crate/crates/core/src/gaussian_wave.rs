//! The Gaussian wave at energy `E`: a circularly symmetric complex Gaussian
//! field on ℤ² with covariance `M(p, q) = rho_{p-q}(E) / rho_{0,0}(E)`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use faer::Mat;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::field::LatticeField;
use crate::random_matrix::{hermitian_eig, HermitianMatrix, DEFAULT_RTOL};
use crate::spectral_density::RhoRatioTable;

/// The square of offsets `|x|, |y| ≤ w`, enumerated row-major (`x` outer).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub half_width: usize,
}

impl Window {
    pub fn new(half_width: usize) -> Self {
        Self { half_width }
    }

    pub fn side(&self) -> usize {
        2 * self.half_width + 1
    }

    pub fn len(&self) -> usize {
        self.side() * self.side()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn offsets(&self) -> Vec<(i64, i64)> {
        let w = self.half_width as i64;
        (-w..=w).flat_map(|x| (-w..=w).map(move |y| (x, y))).collect()
    }

    /// Position of `(x, y)` in the enumeration.
    pub fn index(&self, x: i64, y: i64) -> Option<usize> {
        let w = self.half_width as i64;
        if x.abs() > w || y.abs() > w {
            return None;
        }
        Some(((x + w) * (2 * w + 1) + (y + w)) as usize)
    }

    /// Whether all four lattice neighbours of `(x, y)` are in the window.
    pub fn is_interior(&self, x: i64, y: i64) -> bool {
        let w = self.half_width as i64;
        x.abs() < w && y.abs() < w
    }

    /// Restricts a field to the window centred at `centre`.
    pub fn extract(&self, field: &LatticeField, centre: (usize, usize)) -> Result<ComplexField> {
        let w = self.half_width;
        if centre.0 < w || centre.1 < w {
            return Err(invalid("window leaves the field"));
        }
        let b = field.sub_box((centre.0 - w, centre.1 - w), self.side(), self.side())?;
        Ok(ComplexField { window: *self, values: b.values })
    }
}

/// Field values indexed by a [`Window`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexField {
    pub window: Window,
    pub values: Vec<Complex64>,
}

impl ComplexField {
    pub fn get(&self, x: i64, y: i64) -> Complex64 {
        self.values[self.window.index(x, y).expect("offset inside window")]
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
        w.write_record(["dx", "dy", "re", "im"])?;
        for ((x, y), v) in self.window.offsets().into_iter().zip(&self.values) {
            w.write_record([x.to_string(), y.to_string(), format!("{:.17e}", v.re), format!("{:.17e}", v.im)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `M(E)` restricted to a window.
#[derive(Debug, Clone)]
pub struct WindowCovariance {
    pub energy: f64,
    pub window: Window,
    pub tol: f64,
    pub entries: Mat<Complex64>,
    table: RhoRatioTable,
}

#[derive(Serialize)]
struct CovarianceMeta {
    energy: f64,
    half_width: usize,
    tol: f64,
}

impl WindowCovariance {
    pub fn dim(&self) -> usize {
        self.window.len()
    }

    /// Kernel value `M(a, b) = rho_{a,b}(E) / rho_{0,0}(E)` for `|a|, |b| ≤ 2w`.
    pub fn kernel(&self, a: i64, b: i64) -> f64 {
        self.table.ratio(a, b)
    }

    pub fn smallest_eigenvalue(&self) -> Result<f64> {
        let h = HermitianMatrix::from_mat_symmetrized(self.entries.as_ref())?;
        Ok(crate::random_matrix::hermitian_eigenvalues(&h)?[0])
    }

    /// Writes the translation-invariant kernel as `dx,dy,re,im` and a JSON sidecar.
    pub fn write(&self, csv_path: &Path, json_path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_writer(BufWriter::new(File::create(csv_path)?));
        w.write_record(["dx", "dy", "re", "im"])?;
        let r = 2 * self.window.half_width as i64;
        for a in -r..=r {
            for b in -r..=r {
                w.write_record([a.to_string(), b.to_string(), format!("{:.17e}", self.kernel(a, b)), "0".into()])?;
            }
        }
        w.flush()?;
        let meta = CovarianceMeta { energy: self.energy, half_width: self.window.half_width, tol: self.tol };
        let mut f = BufWriter::new(File::create(json_path)?);
        serde_json::to_writer_pretty(&mut f, &meta)?;
        f.write_all(b"\n")?;
        Ok(())
    }
}

/// Builds `M(E)` on `window` from a table of density ratios.
pub fn wave_covariance(energy: f64, window: Window, tol: f64) -> Result<WindowCovariance> {
    if energy == 0.0 || !(energy.abs() < 4.0) {
        return Err(invalid(format!("wave covariance needs E in (-4,4)\\{{0}}, got {energy}")));
    }
    let table = RhoRatioTable::new(energy, 2 * window.half_width, tol)?;
    Ok(covariance_from_table(table, window))
}

/// Builds `M(E)` from an existing ratio table covering offsets up to `2w`.
pub fn covariance_from_table(table: RhoRatioTable, window: Window) -> WindowCovariance {
    let offs = window.offsets();
    let n = offs.len();
    let entries = Mat::<Complex64>::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(table.ratio(offs[i].0 - offs[j].0, offs[i].1 - offs[j].1), 0.0)
        }
    });
    WindowCovariance { energy: table.energy, window, tol: table.tol, entries, table }
}

/// PSD square root `L` of a covariance, with `L L* = M` after clipping.
#[derive(Debug, Clone)]
pub struct WaveSampler {
    window: Window,
    root: Mat<Complex64>,
    pub min_eigenvalue: f64,
}

impl WaveSampler {
    /// Eigenvalues in `[-10·tol, 0)` are set to zero; anything more negative is an error.
    pub fn new(m: &WindowCovariance) -> Result<Self> {
        let h = HermitianMatrix::from_mat_symmetrized(m.entries.as_ref())?;
        let es = hermitian_eig(&h, DEFAULT_RTOL)?;
        let min = es.eigenvalues[0];
        let clip = 10.0 * m.tol;
        if min < -clip {
            return Err(LabError::CovarianceNotPsd { min_eigenvalue: min, clip });
        }
        let n = m.dim();
        let sq: Vec<f64> = es.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
        let scaled = Mat::<Complex64>::from_fn(n, n, |i, k| es.vectors[(i, k)] * sq[k]);
        let root = &scaled * es.vectors.adjoint();
        Ok(Self { window: m.window, root, min_eigenvalue: min })
    }

    /// `Z = L(g₁ + i g₂)/√2`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ComplexField {
        let n = self.window.len();
        let g: Vec<Complex64> = (0..n)
            .map(|_| {
                let a: f64 = StandardNormal.sample(rng);
                let b: f64 = StandardNormal.sample(rng);
                Complex64::new(a, b) * FRAC_1_SQRT_2
            })
            .collect();
        let mut values = vec![Complex64::new(0.0, 0.0); n];
        for (k, gk) in g.iter().enumerate() {
            for (i, v) in values.iter_mut().enumerate() {
                *v += self.root[(i, k)] * gk;
            }
        }
        ComplexField { window: self.window, values }
    }
}

/// `count` independent samples of the Gaussian wave with covariance `m`.
pub fn sample_wave<R: Rng + ?Sized>(m: &WindowCovariance, count: usize, rng: &mut R) -> Result<Vec<ComplexField>> {
    let sampler = WaveSampler::new(m)?;
    Ok((0..count).map(|_| sampler.sample(rng)).collect())
}

/// `M̂(p, q) = (1/count) Σ_i Z_i(p) conj(Z_i(q))`.
pub fn empirical_covariance(fields: &[ComplexField]) -> Result<Mat<Complex64>> {
    let first = fields.first().ok_or_else(|| invalid("empirical covariance of no fields"))?;
    let n = first.values.len();
    if fields.iter().any(|f| f.values.len() != n) {
        return Err(invalid("fields live on different windows"));
    }
    let mut acc = Mat::<Complex64>::zeros(n, n);
    for f in fields {
        for q in 0..n {
            let cq = f.values[q].conj();
            for p in q..n {
                acc[(p, q)] += f.values[p] * cq;
            }
        }
    }
    let inv = 1.0 / fields.len() as f64;
    for q in 0..n {
        for p in q..n {
            let v = acc[(p, q)] * inv;
            acc[(p, q)] = v;
            acc[(q, p)] = v.conj();
        }
    }
    Ok(acc)
}

/// Largest entrywise deviation and relative Frobenius distance `‖M̂ - M‖/‖M‖`.
pub fn covariance_distance(mhat: &Mat<Complex64>, m: &Mat<Complex64>) -> Result<(f64, f64)> {
    if mhat.nrows() != m.nrows() || mhat.ncols() != m.ncols() {
        return Err(invalid("covariance_distance: shape mismatch"));
    }
    let mut max_abs = 0.0f64;
    let mut diff = 0.0;
    let mut base = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let d = (mhat[(i, j)] - m[(i, j)]).norm();
            max_abs = max_abs.max(d);
            diff += d * d;
            base += m[(i, j)].norm_sqr();
        }
    }
    Ok((max_abs, (diff / base).sqrt()))
}

/// Pearson correlation of the real parts of the off-diagonal entries of `M̂` and `M`.
pub fn entrywise_correlation(mhat: &Mat<Complex64>, m: &Mat<Complex64>) -> Result<f64> {
    if mhat.nrows() != m.nrows() || mhat.ncols() != m.ncols() {
        return Err(invalid("entrywise_correlation: shape mismatch"));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if i != j {
                xs.push(mhat[(i, j)].re);
                ys.push(m[(i, j)].re);
            }
        }
    }
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// `Σ_{nbrs of p} Z(nbr) - E·Z(p)` at an interior window point.
pub fn eigen_defect(z: &ComplexField, energy: f64, x: i64, y: i64) -> Complex64 {
    z.get(x + 1, y) + z.get(x - 1, y) + z.get(x, y + 1) + z.get(x, y - 1) - energy * z.get(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_enumeration() {
        let w = Window::new(1);
        assert_eq!(w.offsets()[0], (-1, -1));
        assert_eq!(w.offsets()[4], (0, 0));
        assert_eq!(w.index(0, 0), Some(4));
        assert_eq!(w.index(2, 0), None);
    }

    #[test]
    fn covariance_diagonal_and_bounds() {
        let m = wave_covariance(2.0, Window::new(2), 1e-9).unwrap();
        for i in 0..m.dim() {
            assert_eq!(m.entries[(i, i)].re, 1.0);
            for j in 0..m.dim() {
                assert!(m.entries[(i, j)].norm() <= 1.0 + 1e-9);
            }
        }
        assert!(wave_covariance(0.0, Window::new(1), 1e-8).is_err());
        assert!(wave_covariance(4.0, Window::new(1), 1e-8).is_err());
    }

    #[test]
    fn distance_identities() {
        let m = wave_covariance(1.0, Window::new(1), 1e-9).unwrap().entries;
        assert_eq!(covariance_distance(&m, &m).unwrap(), (0.0, 0.0));
        let z = Mat::<Complex64>::zeros(m.nrows(), m.ncols());
        assert!((covariance_distance(&z, &m).unwrap().0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empirical_of_ones_is_rank_one() {
        let f = ComplexField { window: Window::new(1), values: vec![Complex64::new(1.0, 0.0); 9] };
        let m = empirical_covariance(&[f]).unwrap();
        assert!((0..9).all(|i| (0..9).all(|j| m[(i, j)] == Complex64::new(1.0, 0.0))));
        assert!(empirical_covariance(&[]).is_err());
    }
}
