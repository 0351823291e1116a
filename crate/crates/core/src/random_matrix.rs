//! GUE sampling, dense Hermitian eigensystems and eigenvector overlaps.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use faer::{Mat, MatRef, Side};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};

/// Default relative tolerance of the eigensolver contract.
pub const DEFAULT_RTOL: f64 = 1e-9;

/// Largest dimension the experiments are meant to run at.
pub const DESK_SCALE_MAX_DIM: usize = 4096;

/// Above this dimension only a random sample of columns is verified.
const FULL_CHECK_DIM: usize = 512;
const SAMPLED_COLUMNS: usize = 16;

/// Dense complex Hermitian matrix. The lower triangle is always the exact
/// conjugate of the upper one.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    mat: Mat<Complex64>,
}

impl HermitianMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { mat: Mat::zeros(dim, dim) }
    }

    /// Builds the matrix from its upper triangle; `f(i, i)` contributes its real part only.
    pub fn from_upper<F: FnMut(usize, usize) -> Complex64>(dim: usize, mut f: F) -> Self {
        let mut mat = Mat::<Complex64>::zeros(dim, dim);
        for j in 0..dim {
            for i in 0..=j {
                let v = f(i, j);
                if i == j {
                    mat[(i, i)] = Complex64::new(v.re, 0.0);
                } else {
                    mat[(i, j)] = v;
                    mat[(j, i)] = v.conj();
                }
            }
        }
        Self { mat }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut h = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            h.mat[(i, i)] = Complex64::new(d, 0.0);
        }
        h
    }

    /// Symmetrizes an arbitrary square matrix as `(M + M*)/2`.
    pub fn from_mat_symmetrized(m: MatRef<'_, Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(invalid("matrix must be square"));
        }
        let n = m.nrows();
        Ok(Self::from_upper(n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj())))
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.mat[(i, j)]
    }

    /// Sets entry `(i, j)` and its mirror.
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        if i == j {
            self.mat[(i, i)] = Complex64::new(v.re, 0.0);
        } else {
            self.mat[(i, j)] = v;
            self.mat[(j, i)] = v.conj();
        }
    }

    pub fn as_mat(&self) -> MatRef<'_, Complex64> {
        self.mat.as_ref()
    }

    pub fn is_hermitian(&self) -> bool {
        let n = self.dim();
        (0..n).all(|j| (0..=j).all(|i| self.mat[(i, j)] == self.mat[(j, i)].conj()))
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, other: &Self, s: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(invalid("dimension mismatch"));
        }
        let n = self.dim();
        Ok(Self::from_upper(n, |i, j| self.mat[(i, j)] + s * other.mat[(i, j)]))
    }

    /// In-place `self += s·other`, preserving exact Hermiticity.
    pub fn add_scaled_in_place(&mut self, other: &Self, s: f64) {
        let n = self.dim();
        for j in 0..n {
            for i in 0..=j {
                let v = self.mat[(i, j)] + s * other.mat[(i, j)];
                self.set(i, j, v);
            }
        }
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            let vj = v[j];
            if vj == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.mat[(i, j)] * vj;
            }
        }
        out
    }

    /// Spectral norm, from the extreme eigenvalues.
    pub fn operator_norm(&self) -> Result<f64> {
        let ev = hermitian_eigenvalues(self)?;
        Ok(ev.first().map_or(0.0, |x| x.abs()).max(ev.last().map_or(0.0, |x| x.abs())))
    }

    /// Flat binary format: `u64` little-endian dimension, then row-major
    /// `(re, im)` pairs as little-endian `f64`.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        let n = self.dim();
        w.write_all(&(n as u64).to_le_bytes())?;
        for i in 0..n {
            for j in 0..n {
                let v = self.mat[(i, j)];
                w.write_all(&v.re.to_le_bytes())?;
                w.write_all(&v.im.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut buf = [0u8; 8];
        r.read_exact(&mut buf)?;
        let n = u64::from_le_bytes(buf) as usize;
        let mut mat = Mat::<Complex64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                r.read_exact(&mut buf)?;
                let re = f64::from_le_bytes(buf);
                r.read_exact(&mut buf)?;
                let im = f64::from_le_bytes(buf);
                mat[(i, j)] = Complex64::new(re, im);
            }
        }
        let h = Self { mat };
        if !h.is_hermitian() {
            return Err(invalid(format!("{} does not hold a Hermitian matrix", path.display())));
        }
        Ok(h)
    }

    /// JSON sidecar for [`write_binary`](Self::write_binary).
    pub fn write_metadata(&self, path: &Path, meta: &serde_json::Value) -> Result<()> {
        let doc = serde_json::json!({ "dim": self.dim(), "layout": "row-major complex f64 LE", "meta": meta });
        let mut f = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut f, &doc)?;
        f.write_all(b"\n")?;
        Ok(())
    }
}

/// GUE matrix `W = M + M*` whose entries (diagonal included) have variance `1/dim`.
pub fn gue_sample<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianMatrix {
    let n = dim as f64;
    let off = (0.5 / n).sqrt();
    let diag = (1.0 / n).sqrt();
    HermitianMatrix::from_upper(dim, |i, j| {
        let g1: f64 = StandardNormal.sample(rng);
        if i == j {
            Complex64::new(diag * g1, 0.0)
        } else {
            let g2: f64 = StandardNormal.sample(rng);
            Complex64::new(off * g1, off * g2)
        }
    })
}

/// `A + √t · W` with a fresh GUE matrix `W`.
pub fn perturb<R: Rng + ?Sized>(a: &HermitianMatrix, t: f64, rng: &mut R) -> Result<HermitianMatrix> {
    if !(t >= 0.0) {
        return Err(invalid(format!("perturbation strength t must be non-negative, got {t}")));
    }
    if t == 0.0 {
        return Ok(a.clone());
    }
    let w = gue_sample(a.dim(), rng);
    let mut out = a.clone();
    out.add_scaled_in_place(&w, t.sqrt());
    Ok(out)
}

/// Ascending eigenvalues and orthonormal eigenvectors (columns).
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    pub vectors: Mat<Complex64>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        (0..self.dim()).map(|i| self.vectors[(i, k)]).collect()
    }

    /// `(1/N) Σ 1/(λ_j - z)`.
    pub fn stieltjes(&self, z: Complex64) -> Complex64 {
        let s: Complex64 = self.eigenvalues.iter().map(|&l| 1.0 / (l - z)).sum();
        s / self.dim() as f64
    }

    /// Diagonal resolvent entry `⟨(H - z)^{-1} e_x, e_x⟩`.
    pub fn resolvent_diagonal(&self, x: usize, z: Complex64) -> Complex64 {
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(k, &l)| self.vectors[(x, k)].norm_sqr() / (l - z))
            .sum()
    }

    /// Worst residual `‖Hv - λv‖/‖H‖` and orthogonality defect over `columns`.
    pub fn defects(&self, h: &HermitianMatrix, columns: &[usize]) -> (f64, f64) {
        let norm = self
            .eigenvalues
            .first()
            .map_or(0.0, |x| x.abs())
            .max(self.eigenvalues.last().map_or(0.0, |x| x.abs()))
            .max(f64::MIN_POSITIVE);
        let n = self.dim();
        let mut residual = 0.0f64;
        let mut ortho = 0.0f64;
        for &k in columns {
            let v = self.vector(k);
            let hv = h.mul_vec(&v);
            let r = hv
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - self.eigenvalues[k] * b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            residual = residual.max(r / norm);
            for &j in columns {
                let ip: Complex64 = (0..n).map(|i| self.vectors[(i, j)].conj() * v[i]).sum();
                let target = if j == k { 1.0 } else { 0.0 };
                ortho = ortho.max((ip - target).norm());
            }
        }
        (residual, ortho)
    }
}

fn eigen_raw(h: &HermitianMatrix) -> Result<EigenSystem> {
    let evd = h
        .mat
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| LabError::EigDidNotConverge { worst_residual: f64::NAN })?;
    let s = evd.S().column_vector();
    let eigenvalues: Vec<f64> = (0..h.dim()).map(|i| s[i].re).collect();
    Ok(EigenSystem { eigenvalues, vectors: evd.U().to_owned() })
}

/// Dense Hermitian eigendecomposition with a verified residual contract.
///
/// Up to dimension 512 every column is checked; above that a fixed set of
/// 16 evenly spread columns is checked, which keeps verification `O(N²)`.
pub fn hermitian_eig(h: &HermitianMatrix, rtol: f64) -> Result<EigenSystem> {
    let es = eigen_raw(h)?;
    let n = h.dim();
    let columns: Vec<usize> = if n <= FULL_CHECK_DIM {
        (0..n).collect()
    } else {
        (0..SAMPLED_COLUMNS).map(|i| i * (n - 1) / (SAMPLED_COLUMNS - 1)).collect()
    };
    let (residual, ortho) = es.defects(h, &columns);
    let worst = residual.max(ortho);
    if !(worst <= rtol) {
        return Err(LabError::EigDidNotConverge { worst_residual: worst });
    }
    Ok(es)
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(h: &HermitianMatrix) -> Result<Vec<f64>> {
    let mut ev = h
        .mat
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| LabError::EigDidNotConverge { worst_residual: f64::NAN })?;
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Eigenpairs in a spectral window, each with an independent uniform phase.
#[derive(Debug, Clone)]
pub struct WindowedEigenpairs {
    pub indices: Vec<usize>,
    pub eigenvalues: Vec<f64>,
    pub vectors: Vec<Vec<Complex64>>,
}

/// All eigenpairs with eigenvalue in `[lo, hi)`, rescaled to norm `norm_scale`
/// and multiplied by independent uniform phases.
pub fn window_eigenpairs<R: Rng + ?Sized>(
    es: &EigenSystem,
    lo: f64,
    hi: f64,
    norm_scale: f64,
    rng: &mut R,
) -> Result<WindowedEigenpairs> {
    if !(lo < hi) {
        return Err(invalid(format!("spectral window [{lo}, {hi}) is empty")));
    }
    let indices: Vec<usize> = (0..es.dim()).filter(|&k| es.eigenvalues[k] >= lo && es.eigenvalues[k] < hi).collect();
    if indices.is_empty() {
        return Err(LabError::EmptyWindow { lo, hi });
    }
    let mut vectors = Vec::with_capacity(indices.len());
    for &k in &indices {
        let v = es.vector(k);
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let phase = Complex64::from_polar(norm_scale / norm, 2.0 * PI * rng.random::<f64>());
        vectors.push(v.into_iter().map(|x| x * phase).collect());
    }
    Ok(WindowedEigenpairs {
        eigenvalues: indices.iter().map(|&k| es.eigenvalues[k]).collect(),
        indices,
        vectors,
    })
}

/// `v(k, j) = ⟨u_{j,0}, u_{k,t}⟩`: row `k` is `u_{k,t}` expressed in the basis `(u_{j,0})`.
pub fn overlap_matrix(es0: &EigenSystem, est: &EigenSystem) -> Result<Mat<Complex64>> {
    if es0.dim() != est.dim() {
        return Err(invalid("overlap_matrix: dimension mismatch"));
    }
    let prod = es0.vectors.adjoint() * &est.vectors;
    Ok(prod.transpose().to_owned())
}

/// Rows `ks` of [`overlap_matrix`], i.e. `out[(r, j)] = v(ks[r], j)`.
pub fn overlap_rows(es0: &EigenSystem, est: &EigenSystem, ks: &[usize]) -> Result<Mat<Complex64>> {
    if es0.dim() != est.dim() {
        return Err(invalid("overlap_rows: dimension mismatch"));
    }
    let n = est.dim();
    let cols = Mat::<Complex64>::from_fn(n, ks.len(), |i, r| est.vectors[(i, ks[r])]);
    let prod = es0.vectors.adjoint() * &cols;
    Ok(prod.transpose().to_owned())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationResult {
    pub lhs: f64,
    pub k_size: usize,
    pub k2_size: usize,
    pub b: usize,
    /// `|K| / b`.
    pub bound: f64,
}

/// The eigenvector concentration statistic for small perturbations.
///
/// `K` holds the unperturbed indices inside `[E_l + 1/N, E_u - 1/N]` with
/// `|m(λ + i/N)| ≤ (Nt)^{-1/2}`; `K₂` the perturbed indices in `[E_l, E_u]`;
/// `b` counts unperturbed eigenvalues in `[E_l - 3√t, E_u + 3√t]`.
pub fn concentration_statistic(
    es0: &EigenSystem,
    est: &EigenSystem,
    e_l: f64,
    e_u: f64,
    t: f64,
) -> Result<ConcentrationResult> {
    if es0.dim() != est.dim() {
        return Err(invalid("concentration_statistic: dimension mismatch"));
    }
    if !(e_l < e_u) || !(t >= 0.0) {
        return Err(invalid("concentration_statistic needs E_l < E_u and t ≥ 0"));
    }
    let n = es0.dim();
    let nf = n as f64;
    let stieltjes_cap = if t > 0.0 { (nf * t).powf(-0.5) } else { f64::INFINITY };
    let k_set: Vec<usize> = (0..n)
        .filter(|&j| {
            let l = es0.eigenvalues[j];
            l >= e_l + 1.0 / nf
                && l <= e_u - 1.0 / nf
                && es0.stieltjes(Complex64::new(l, 1.0 / nf)).norm() <= stieltjes_cap
        })
        .collect();
    let k2: Vec<usize> = (0..n).filter(|&k| est.eigenvalues[k] >= e_l && est.eigenvalues[k] <= e_u).collect();
    if k2.is_empty() {
        return Err(LabError::EmptyWindow { lo: e_l, hi: e_u });
    }
    let margin = 3.0 * t.sqrt();
    let b = es0.eigenvalues.iter().filter(|&&l| l >= e_l - margin && l <= e_u + margin).count();
    let v = overlap_rows(es0, est, &k2)?;
    let mut total = 0.0;
    for (r, &k) in k2.iter().enumerate() {
        let lk = est.eigenvalues[k];
        for &j in &k_set {
            if (lk - es0.eigenvalues[j]).abs() < 1.0 / nf {
                total += v[(r, j)].norm_sqr();
            }
        }
    }
    Ok(ConcentrationResult {
        lhs: total / k2.len() as f64,
        k_size: k_set.len(),
        k2_size: k2.len(),
        b,
        bound: if b == 0 { 0.0 } else { k_set.len() as f64 / b as f64 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_and_pauli() {
        let h = HermitianMatrix::from_real_diagonal(&[3.0, -1.0, 2.0]);
        let es = hermitian_eig(&h, DEFAULT_RTOL).unwrap();
        assert_eq!(es.eigenvalues, vec![-1.0, 2.0, 3.0]);
        assert!((es.vectors[(1, 0)].norm() - 1.0).abs() < 1e-14);
        assert!((es.vectors[(0, 2)].norm() - 1.0).abs() < 1e-14);
        let x = HermitianMatrix::from_upper(2, |i, j| if i == j { 0.0.into() } else { 1.0.into() });
        let es = hermitian_eig(&x, DEFAULT_RTOL).unwrap();
        assert!((es.eigenvalues[0] + 1.0).abs() < 1e-14 && (es.eigenvalues[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gue_is_hermitian_and_perturb_zero_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = gue_sample(20, &mut rng);
        assert!(w.is_hermitian());
        let p = perturb(&w, 0.0, &mut rng).unwrap();
        assert_eq!(p, w);
        assert!(perturb(&w, -1.0, &mut rng).is_err());
    }

    #[test]
    fn overlap_of_identical_systems_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let w = gue_sample(30, &mut rng);
        let es = hermitian_eig(&w, DEFAULT_RTOL).unwrap();
        let v = overlap_matrix(&es, &es).unwrap();
        for i in 0..30 {
            for j in 0..30 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((v[(i, j)].norm() - target).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn binary_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = gue_sample(7, &mut rng);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("w.bin");
        w.write_binary(&p).unwrap();
        assert_eq!(HermitianMatrix::read_binary(&p).unwrap(), w);
    }

    #[test]
    fn window_norms_and_empty_window() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let w = gue_sample(40, &mut rng);
        let es = hermitian_eig(&w, DEFAULT_RTOL).unwrap();
        let all = window_eigenpairs(&es, -10.0, 10.0, 40f64.sqrt(), &mut rng).unwrap();
        assert_eq!(all.indices.len(), 40);
        for v in &all.vectors {
            let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            assert!((norm - 40f64.sqrt()).abs() < 1e-10);
        }
        assert!(matches!(
            window_eigenpairs(&es, 5.0, 6.0, 1.0, &mut rng),
            Err(LabError::EmptyWindow { .. })
        ));
    }
}
