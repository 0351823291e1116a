//! The discrete torus with twisted boundary conditions.
//!
//! `A_{c,d} = A_c ⊗ I + I ⊗ A_d` acts on `{0..n-1}²`, flattened as `x·n + y`
//! with `x` the coordinate carrying the phase `c`. The cycle `A_c` has unit
//! weights except on the wrap-around edge, where
//! `A_c[n-1][0] = e^{2πinc}` and `A_c[0][n-1] = e^{-2πinc}`, so that
//! `v_k(x) = e^{2πi x (k/n + c)}` is an eigenvector with eigenvalue
//! `2cos(2π(k/n + c))`.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::measure::{Atom, AtomicMeasure};
use crate::quad::{tanh_sinh_split, trapezoid};
use crate::random_matrix::HermitianMatrix;
use crate::spectral_density::{rho, smoothed_rho, DEFAULT_TOL};

/// Side length and boundary phases of a torus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusSpec {
    n: usize,
    c: f64,
    d: f64,
}

impl TorusSpec {
    /// Phases are reduced modulo 1.
    pub fn new(n: usize, c: f64, d: f64) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!("torus side must be at least 2, got {n}")));
        }
        if !c.is_finite() || !d.is_finite() {
            return Err(invalid("boundary phases must be finite"));
        }
        Ok(Self { n, c: c.rem_euclid(1.0), d: d.rem_euclid(1.0) })
    }

    /// Boundary phases drawn uniformly from `[0,1)²`.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        let c = rng.random::<f64>();
        let d = rng.random::<f64>();
        Self::new(n, c, d)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        x * self.n + y
    }
}

/// Mode `(j, k)`: frequency `j` along the `c` coordinate and `k` along `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeIndex {
    pub j: usize,
    pub k: usize,
}

#[inline]
fn cycle_angle(n: usize, c: f64, k: usize) -> f64 {
    2.0 * PI * (k as f64 / n as f64 + c)
}

/// `2cos(2π(j/n + c)) + 2cos(2π(k/n + d))`.
pub fn mode_eigenvalue(spec: &TorusSpec, m: ModeIndex) -> f64 {
    2.0 * cycle_angle(spec.n, spec.c, m.j).cos() + 2.0 * cycle_angle(spec.n, spec.d, m.k).cos()
}

/// All `n²` torus eigenvalues in mode order `j·n + k`.
pub fn torus_eigenvalues(spec: &TorusSpec) -> Vec<f64> {
    let xs: Vec<f64> = (0..spec.n).map(|j| 2.0 * cycle_angle(spec.n, spec.c, j).cos()).collect();
    let ys: Vec<f64> = (0..spec.n).map(|k| 2.0 * cycle_angle(spec.n, spec.d, k).cos()).collect();
    xs.iter().flat_map(|x| ys.iter().map(move |y| x + y)).collect()
}

/// Eigenvector `e^{2πi(x(j/n+c) + y(k/n+d))}`, of ℓ²-norm `n`.
pub fn mode_vector(spec: &TorusSpec, m: ModeIndex) -> Vec<Complex64> {
    let n = spec.n;
    let a = cycle_angle(n, spec.c, m.j);
    let b = cycle_angle(n, spec.d, m.k);
    let mut v = Vec::with_capacity(n * n);
    for x in 0..n {
        for y in 0..n {
            v.push(Complex64::from_polar(1.0, a * x as f64 + b * y as f64));
        }
    }
    v
}

/// Dense `n × n` cycle adjacency with boundary phase `c`.
pub fn cycle_adjacency(n: usize, c: f64) -> Result<HermitianMatrix> {
    if n < 2 {
        return Err(invalid("cycle needs n ≥ 2"));
    }
    let mut upper = vec![Complex64::new(0.0, 0.0); n * n];
    let wrap = Complex64::from_polar(1.0, 2.0 * PI * n as f64 * c);
    for x in 0..n - 1 {
        upper[x * n + x + 1] += 1.0;
    }
    // A[0][n-1] = conj(A[n-1][0])
    upper[n - 1] += wrap.conj();
    Ok(HermitianMatrix::from_upper(n, |i, j| upper[i * n + j]))
}

/// Dense `n² × n²` torus adjacency `A_{c,d}`.
pub fn torus_adjacency(spec: &TorusSpec) -> HermitianMatrix {
    let n = spec.n;
    let ac = cycle_adjacency(n, spec.c).expect("validated spec");
    let ad = cycle_adjacency(n, spec.d).expect("validated spec");
    HermitianMatrix::from_upper(n * n, |p, q| {
        let (x1, y1) = (p / n, p % n);
        let (x2, y2) = (q / n, q % n);
        let mut v = Complex64::new(0.0, 0.0);
        if y1 == y2 {
            v += ac.get(x1, x2);
        }
        if x1 == x2 {
            v += ad.get(y1, y2);
        }
        v
    })
}

/// `μ_{c,a} = (1/n) Σ_k e^{iaθ_k} δ(2cos θ_k)`, `θ_k = 2π(k/n + c)`.
pub fn spectral_measure_1d(n: usize, c: f64, a: i64) -> Result<AtomicMeasure> {
    if n == 0 || a.unsigned_abs() as usize >= n {
        return Err(invalid(format!("spectral_measure_1d needs |a| < n, got a = {a}, n = {n}")));
    }
    let w = 1.0 / n as f64;
    Ok(AtomicMeasure::new(
        (0..n)
            .map(|k| {
                let th = cycle_angle(n, c, k);
                Atom { location: 2.0 * th.cos(), weight: Complex64::from_polar(w, a as f64 * th) }
            })
            .collect(),
    ))
}

/// `μ_{c,d,a,b} = μ_{c,a} * μ_{d,b}` with `n²` atoms.
pub fn spectral_measure_2d(n: usize, c: f64, d: f64, a: i64, b: i64) -> Result<AtomicMeasure> {
    Ok(spectral_measure_1d(n, c, a)?.convolve(&spectral_measure_1d(n, d, b)?))
}

/// Closed form of `(1/n) Σ_k e^{iaθ_k} / (2cos θ_k - z)`, `θ_k = 2π(k/n + c)`, for `z ∉ [-2, 2]`.
///
/// Expanding `1/(2cos θ - z)` in powers of `q` with `q + 1/q = z`, `|q| < 1`,
/// and summing the geometric series over the aliases of `a` modulo `n`.
pub fn cycle_resolvent(n: usize, c: f64, a: i64, z: Complex64) -> Complex64 {
    if a < 0 {
        return cycle_resolvent(n, -c, -a, z);
    }
    let nn = n as i64;
    let phi = 2.0 * PI * c;
    let wraps = a / nn;
    let a0 = (a % nn) as i32;
    let alias = Complex64::from_polar(1.0, (wraps * nn) as f64 * phi);
    let q = crate::spectral_density::inner_root(z);
    let qn = q.powi(n as i32);
    let e = Complex64::from_polar(1.0, n as f64 * phi);
    let pre = -q / (1.0 - q * q);
    pre * alias * (q.powi(n as i32 - a0) * e / (1.0 - qn * e) + q.powi(a0) / (1.0 - qn * e.conj()))
}

/// Stieltjes transform of `μ_{c,d,0,0}`, i.e. `Tr(A_{c,d} - z)^{-1} / n²`, in `O(n)`.
pub fn torus_stieltjes(spec: &TorusSpec, z: Complex64) -> Complex64 {
    let n = spec.n;
    let s: Complex64 = (0..n)
        .map(|j| cycle_resolvent(n, spec.d, 0, z - 2.0 * cycle_angle(n, spec.c, j).cos()))
        .sum();
    s / n as f64
}

/// Precomputed first factor `μ_{c,a}` for repeated smoothing of `μ_{c,a} * μ_{d,b}`.
#[derive(Debug, Clone)]
pub struct SmoothedMeasure2d {
    n: usize,
    d: f64,
    b: i64,
    eta: f64,
    first: Vec<(f64, Complex64)>,
}

impl SmoothedMeasure2d {
    pub fn new(spec: &TorusSpec, a: i64, b: i64, eta: f64) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(invalid("eta must be positive"));
        }
        let first = spectral_measure_1d(spec.n, spec.c, a)?
            .atoms
            .into_iter()
            .map(|x| (x.location, x.weight))
            .collect();
        Ok(Self { n: spec.n, d: spec.d, b, eta, first })
    }

    /// `(κ_η * μ_{c,a} * μ_{d,b})(λ)` in `O(n)`.
    pub fn eval(&self, lambda: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(x, w) in &self.first {
            let z = Complex64::new(lambda - x, self.eta);
            let k = if self.b == 0 {
                Complex64::new(cycle_resolvent(self.n, self.d, 0, z).im, 0.0)
            } else {
                let plus = cycle_resolvent(self.n, self.d, self.b, z);
                let minus = cycle_resolvent(self.n, self.d, -self.b, z).conj();
                (plus - minus) / Complex64::new(0.0, 2.0)
            };
            acc += w * k;
        }
        acc
    }
}

/// `(t/η) · (κ_η * μ_{c,a} * μ_{d,b})(λ)`, the entry `(t/((A-λ)² + η²))(u + (a,b), u)`
/// for any `u` whose translate stays inside the box.
pub fn torus_b_entry(spec: &TorusSpec, t: f64, eta: f64, lambda: f64, a: i64, b: i64) -> Result<Complex64> {
    if !(t > 0.0) {
        return Err(invalid("t must be positive"));
    }
    Ok(SmoothedMeasure2d::new(spec, a, b, eta)?.eval(lambda) * (t / eta))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityEstimate {
    pub integral: f64,
    /// `π / (2n²η)`.
    pub reference: f64,
    pub ratio: f64,
    pub warnings: Vec<String>,
}

/// Default λ-grid for the regularity integral: spacing `η/4` on `[-4.5, 4.5]`.
pub fn regularity_grid(eta: f64) -> Vec<f64> {
    let h = (eta / 4.0).min(0.05);
    let count = (9.0 / h).ceil() as usize + 1;
    (0..count).map(|i| -4.5 + 9.0 * i as f64 / (count - 1) as f64).collect()
}

/// Monte-Carlo estimate of `∫ Var(κ_η * μ_{C,D,a,b})(λ) dλ` over uniform boundary phases.
///
/// Each `(C, D)` comes from `draw`; the sample variance uses the `T - 1` denominator.
pub fn variance_regularity_estimate<F>(
    n: usize,
    eta: f64,
    a: i64,
    b: i64,
    lambda_grid: &[f64],
    trials: usize,
    mut draw: F,
) -> Result<RegularityEstimate>
where
    F: FnMut(usize) -> (f64, f64),
{
    if trials < 2 {
        return Err(invalid("variance needs at least 2 trials"));
    }
    let nf = n as f64;
    if !(eta >= nf.powi(-2) && eta <= nf * nf) {
        return Err(invalid(format!("eta = {eta} outside [n^-2, n^2]")));
    }
    let mut warnings = Vec::new();
    if (a.abs() + b.abs()) as f64 > nf.sqrt() {
        warnings.push(format!("|a|+|b| = {} exceeds n^(1/2)", a.abs() + b.abs()));
    }
    let g = lambda_grid.len();
    let mut sum = vec![Complex64::new(0.0, 0.0); g];
    let mut sum_sq = vec![0.0; g];
    for trial in 0..trials {
        let (c, d) = draw(trial);
        let sm = SmoothedMeasure2d::new(&TorusSpec::new(n, c, d)?, a, b, eta)?;
        for (i, &l) in lambda_grid.iter().enumerate() {
            let v = sm.eval(l);
            sum[i] += v;
            sum_sq[i] += v.norm_sqr();
        }
    }
    let tf = trials as f64;
    let var: Vec<f64> = sum
        .iter()
        .zip(&sum_sq)
        .map(|(s, q)| ((q - s.norm_sqr() / tf) / (tf - 1.0)).max(0.0))
        .collect();
    let integral = trapezoid(lambda_grid, &var);
    let reference = PI / (2.0 * nf * nf * eta);
    Ok(RegularityEstimate { integral, reference, ratio: integral / reference, warnings })
}

/// `Σ_J count_J²` over half-open bins `[lo + i·width, lo + (i+1)·width)` covering `[lo, hi)`.
pub fn binned_square_sum(values: &[f64], lo: f64, hi: f64, width: f64) -> f64 {
    let bins = ((hi - lo) / width).round() as usize;
    let mut counts = vec![0u64; bins];
    for &v in values {
        if v >= lo && v < hi {
            let i = (((v - lo) / width).floor() as usize).min(bins - 1);
            counts[i] += 1;
        }
    }
    counts.iter().map(|&c| (c * c) as f64).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosePairs {
    /// Monte-Carlo mean of `Σ_J (n² μ(J))²`.
    pub statistic: f64,
    /// `statistic / (n² r)`.
    pub normalized: f64,
    pub r: f64,
    pub r_adjusted: bool,
}

/// Close-pair statistic on `[E - r, E + r]` with bins of length `n^{-2}`.
///
/// Bin masses are counted in eigenvalues (`n² μ_{C,0} * μ_{D,0}(J)`).
/// `r` is rounded so that `n·r` is a positive integer.
pub fn close_pairs_statistic<F>(n: usize, energy: f64, r: f64, trials: usize, mut draw: F) -> Result<ClosePairs>
where
    F: FnMut(usize) -> (f64, f64),
{
    if !(energy > 0.0 && energy < 4.0) {
        return Err(invalid(format!("close pairs needs E in (0,4), got {energy}")));
    }
    if trials == 0 || !(r > 0.0) {
        return Err(invalid("close pairs needs r > 0 and trials ≥ 1"));
    }
    let nf = n as f64;
    let steps = (nf * r).round().max(1.0);
    let r_used = steps / nf;
    let mut total = 0.0;
    for trial in 0..trials {
        let (c, d) = draw(trial);
        let ev = torus_eigenvalues(&TorusSpec::new(n, c, d)?);
        total += binned_square_sum(&ev, energy - r_used, energy + r_used, 1.0 / (nf * nf));
    }
    let statistic = total / trials as f64;
    Ok(ClosePairs {
        statistic,
        normalized: statistic / (nf * nf * r_used),
        r: r_used,
        r_adjusted: (r_used - r).abs() > 1e-12 * r.abs(),
    })
}

/// `∫_{α - 8π/n}^{β + 8π/n} ρ_{0,0}`, the upper bound for `μ_{c,0} * μ_{d,0}([α, β])`.
pub fn window_mass_upper_bound(n: usize, alpha: f64, beta: f64, tol: f64) -> Result<f64> {
    let lo = (alpha - 8.0 * PI / n as f64).max(-4.0);
    let hi = (beta + 8.0 * PI / n as f64).min(4.0);
    if lo >= hi {
        return Ok(0.0);
    }
    let mut breaks = vec![lo];
    if lo < 0.0 && hi > 0.0 {
        breaks.push(0.0);
    }
    breaks.push(hi);
    Ok(tanh_sinh_split(|x| rho(0, 0, x, tol).unwrap_or(0.0), &breaks, tol).value)
}

/// Leading terms `2rρ(E₀) ∓ (16π/n)ρ(E₀)` of the two-sided bracket for
/// `μ_{c,0} * μ_{d,0}([E₀ - r, E₀ + r])`; the `O(r²)` remainder is left to the caller.
pub fn window_mass_bracket(n: usize, e0: f64, r: f64, tol: f64) -> Result<(f64, f64)> {
    let rho0 = rho(0, 0, e0, tol)?;
    let centre = 2.0 * r * rho0;
    let slack = 16.0 * PI / n as f64 * rho0;
    Ok((centre - slack, centre + slack))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NiceReport {
    pub ok: bool,
    /// `min (threshold - L² distance²)` over all scales and offsets.
    pub worst_margin: f64,
    /// `2ℓn^{-9ε}` with `ℓ = 2n^{-3ε}`.
    pub threshold: f64,
    /// `(πρ_{0,0}(E) - n^{-ε}) t`; skipped when not positive.
    pub eta_lower: f64,
    pub eta_lower_skipped: bool,
    pub etas: Vec<f64>,
    pub offsets: Vec<(i64, i64)>,
}

/// Checks the smoothing-scale parameter constraints `15ε < min(2(1-γ-ε), 1/6)` and `8ε < γ`.
pub fn check_phase_parameters(epsilon: f64, gamma: f64) -> Result<()> {
    if !(epsilon > 0.0) {
        return Err(invalid("epsilon must be positive"));
    }
    let rhs = (2.0 * (1.0 - gamma - epsilon)).min(1.0 / 6.0);
    if !(15.0 * epsilon < rhs) {
        return Err(invalid(format!(
            "15ε < min(2(1-γ-ε), 1/6) violated: 15ε = {}, rhs = {rhs}",
            15.0 * epsilon
        )));
    }
    if !(8.0 * epsilon < gamma) {
        return Err(invalid(format!("8ε < γ violated: 8ε = {}, γ = {gamma}", 8.0 * epsilon)));
    }
    Ok(())
}

/// Offsets with `|a| + |b| ≤ radius`.
pub fn diamond_offsets(radius: f64) -> Vec<(i64, i64)> {
    let r = radius.floor() as i64;
    let mut out = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            if a.abs() + b.abs() <= r {
                out.push((a, b));
            }
        }
    }
    out
}

/// Dyadic ladder `t n^{-2ε} · 2^k`, `k = 0..=b`, with `b` minimal such that the top is ≥ 10.
pub fn dyadic_etas(base: f64) -> Vec<f64> {
    let mut out = vec![base];
    while *out.last().unwrap() < 10.0 {
        out.push(out.last().unwrap() * 2.0);
    }
    out
}

const NICE_GRID: usize = 4096;

/// The niceness predicate for boundary phases `(c, d)`.
pub fn nice_pair_check(n: usize, c: f64, d: f64, energy: f64, epsilon: f64, gamma: f64) -> Result<NiceReport> {
    check_phase_parameters(epsilon, gamma)?;
    let nf = n as f64;
    let t = nf.powf(-2.0 * gamma);
    let spec = TorusSpec::new(n, c, d)?;
    let rho0 = rho(0, 0, energy, DEFAULT_TOL)?;
    let eta_lower = (PI * rho0 - nf.powf(-epsilon)) * t;
    let eta_upper = (PI * rho0 + nf.powf(-epsilon)) * t;
    let mut etas = Vec::new();
    if eta_lower > 0.0 {
        etas.push(eta_lower);
    }
    etas.push(eta_upper);
    etas.extend(dyadic_etas(t * nf.powf(-2.0 * epsilon)));
    let offsets = diamond_offsets(nf.powf(epsilon));
    let ell = 2.0 * nf.powf(-3.0 * epsilon);
    let threshold = 2.0 * ell * nf.powf(-9.0 * epsilon);

    let mut reference: HashMap<(i64, i64, usize), Vec<f64>> = HashMap::new();
    let mut worst = f64::INFINITY;
    for (ei, &eta) in etas.iter().enumerate() {
        let half = 8.0 + 3.0 * eta;
        let grid: Vec<f64> = (0..NICE_GRID).map(|i| -half + 2.0 * half * i as f64 / (NICE_GRID - 1) as f64).collect();
        for &(a, b) in &offsets {
            let key = (a.abs().min(b.abs()), a.abs().max(b.abs()), ei);
            let refv = match reference.get(&key) {
                Some(v) => v,
                None => {
                    let v = grid
                        .iter()
                        .map(|&l| smoothed_rho(key.0, key.1, eta, l, DEFAULT_TOL))
                        .collect::<Result<Vec<_>>>()?;
                    reference.entry(key).or_insert(v)
                }
            };
            let sm = SmoothedMeasure2d::new(&spec, a, b, eta)?;
            let sq: Vec<f64> = grid.iter().zip(refv).map(|(&l, &r)| (sm.eval(l) - r).norm_sqr()).collect();
            worst = worst.min(threshold - trapezoid(&grid, &sq));
        }
    }
    Ok(NiceReport {
        ok: worst >= 0.0,
        worst_margin: worst,
        threshold,
        eta_lower,
        eta_lower_skipped: eta_lower <= 0.0,
        etas,
        offsets,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub n: usize,
    pub energy: f64,
    pub ell: f64,
    pub t: f64,
    pub epsilon: f64,
    pub samples: usize,
    /// Smallest `c` with `Im m(λ + iη) ∈ (1/c, c)` at every sampled `λ` and dyadic `η`.
    pub fitted_c: f64,
    /// `max_η ℙ_λ(Im m(λ + iη) ∉ (1/c, c))` at `c = reference_c`.
    pub regularity_failure: f64,
    pub reference_c: f64,
    pub eta_lower: f64,
    pub eta_upper: f64,
    /// `ℙ_λ(Im m(λ + iη_ℓ) ≤ η_ℓ/t + N^{-ε})`; `None` when `η_ℓ ≤ 0`.
    pub lower_failure: Option<f64>,
    /// `ℙ_λ(Im m(λ + iη_u) ≥ η_u/t - N^{-ε})`.
    pub upper_failure: f64,
    /// `ℙ_λ(|(t/η_u) Im m(λ + iη_u) - 1| > delta)`, the diagonal local-limit condition.
    pub diagonal_limit_failure: f64,
    pub delta: f64,
    /// `η · Im m(λ + iη)` non-decreasing along the dyadic ladder at every sampled `λ`.
    pub monotone: bool,
    pub warnings: Vec<String>,
}

/// Empirical failure probabilities of the spectral hypotheses for `A_{c,d}` on `[E ± ℓ]`.
#[allow(clippy::too_many_arguments)]
pub fn window_condition_report<R: Rng + ?Sized>(
    spec: &TorusSpec,
    energy: f64,
    ell: f64,
    t: f64,
    epsilon: f64,
    samples: usize,
    reference_c: f64,
    delta: f64,
    rng: &mut R,
) -> Result<ConditionReport> {
    if samples == 0 || !(ell > 0.0) || !(t > 0.0) {
        return Err(invalid("condition report needs samples ≥ 1, ell > 0, t > 0"));
    }
    let nf = spec.n as f64;
    let big_n = nf * nf;
    let mut warnings = Vec::new();
    if t < big_n.powf(epsilon - 1.0) || t > big_n.powf(-2.0 * epsilon) {
        warnings.push(format!("t = {t} outside [N^(ε-1), N^(-2ε)] with N = {big_n}"));
    }
    let rho0 = rho(0, 0, energy, DEFAULT_TOL)?;
    let eta_lower = (PI * rho0 - nf.powf(-epsilon)) * t;
    let eta_upper = (PI * rho0 + nf.powf(-epsilon)) * t;
    let shift = big_n.powf(-epsilon);
    let ladder = dyadic_etas(t * big_n.powf(-epsilon));

    let mut fitted_c = 1.0f64;
    let mut reg_fail = vec![0usize; ladder.len()];
    let mut lower_fail = 0usize;
    let mut upper_fail = 0usize;
    let mut diag_fail = 0usize;
    let mut monotone = true;
    for _ in 0..samples {
        let l = energy - ell + 2.0 * ell * rng.random::<f64>();
        let mut prev = 0.0;
        for (i, &eta) in ladder.iter().enumerate() {
            let im = torus_stieltjes(spec, Complex64::new(l, eta)).im;
            fitted_c = fitted_c.max(im).max(1.0 / im);
            if !(im > 1.0 / reference_c && im < reference_c) {
                reg_fail[i] += 1;
            }
            if eta * im < prev * (1.0 - 1e-12) {
                monotone = false;
            }
            prev = eta * im;
        }
        if eta_lower > 0.0 {
            let im = torus_stieltjes(spec, Complex64::new(l, eta_lower)).im;
            if im <= eta_lower / t + shift {
                lower_fail += 1;
            }
        }
        let im_u = torus_stieltjes(spec, Complex64::new(l, eta_upper)).im;
        if im_u >= eta_upper / t - shift {
            upper_fail += 1;
        }
        if ((t / eta_upper) * im_u - 1.0).abs() > delta {
            diag_fail += 1;
        }
    }
    if eta_lower <= 0.0 {
        warnings.push(format!("η_ℓ = {eta_lower} is not positive at this scale; lower condition skipped"));
    }
    let s = samples as f64;
    Ok(ConditionReport {
        n: spec.n,
        energy,
        ell,
        t,
        epsilon,
        samples,
        fitted_c: fitted_c * (1.0 + 1e-12),
        regularity_failure: reg_fail.iter().map(|&k| k as f64 / s).fold(0.0, f64::max),
        reference_c,
        eta_lower,
        eta_upper,
        lower_failure: (eta_lower > 0.0).then(|| lower_fail as f64 / s),
        upper_failure: upper_fail as f64 / s,
        diagonal_limit_failure: diag_fail as f64 / s,
        delta,
        monotone,
        warnings,
    })
}

/// Monte-Carlo estimate of `ℙ(|Re(ξ₁ + ξ₂ + ξ₃ + ξ₄)| < 1/n²)` for independent uniform `n`-th roots of unity.
pub fn roots_of_unity_close_prob<R: Rng + ?Sized>(n: usize, trials: usize, rng: &mut R) -> Result<f64> {
    if n == 0 || trials == 0 {
        return Err(invalid("need n ≥ 1 and trials ≥ 1"));
    }
    let cosines: Vec<f64> = (0..n).map(|k| (2.0 * PI * k as f64 / n as f64).cos()).collect();
    let cut = 1.0 / (n * n) as f64;
    let mut hits = 0usize;
    for _ in 0..trials {
        let s: f64 = (0..4).map(|_| cosines[rng.random_range(0..n)]).sum();
        if s.abs() < cut {
            hits += 1;
        }
    }
    Ok(hits as f64 / trials as f64)
}

/// Exact value of the same probability by enumerating all `n⁴` quadruples.
pub fn roots_of_unity_close_exact(n: usize) -> f64 {
    let cosines: Vec<f64> = (0..n).map(|k| (2.0 * PI * k as f64 / n as f64).cos()).collect();
    let cut = 1.0 / (n * n) as f64;
    let mut hits = 0u64;
    for &a in &cosines {
        for &b in &cosines {
            for &c in &cosines {
                for &d in &cosines {
                    if (a + b + c + d).abs() < cut {
                        hits += 1;
                    }
                }
            }
        }
    }
    hits as f64 / (n as f64).powi(4)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_eigenvalues() {
        let s = TorusSpec::new(4, 0.0, 0.0).unwrap();
        assert!((mode_eigenvalue(&s, ModeIndex { j: 0, k: 0 }) - 4.0).abs() < 1e-15);
        assert!((mode_eigenvalue(&s, ModeIndex { j: 1, k: 2 }) + 2.0).abs() < 1e-14);
    }

    #[test]
    fn n2_measure() {
        let m = spectral_measure_1d(2, 0.0, 0).unwrap();
        assert!((m.atoms[0].location - 2.0).abs() < 1e-15 && (m.atoms[1].location + 2.0).abs() < 1e-15);
        assert!((m.atoms[0].weight.re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cycle_resolvent_matches_atom_sum() {
        for &(n, c) in &[(7usize, 0.13), (12, 0.71), (5, 0.0)] {
            for a in -(n as i64) - 3..(n as i64) + 3 {
                for z in [Complex64::new(0.3, 0.05), Complex64::new(-2.5, 0.01), Complex64::new(1.9, 1e-3)] {
                    let direct: Complex64 = (0..n)
                        .map(|k| {
                            let th = cycle_angle(n, c, k);
                            Complex64::from_polar(1.0, a as f64 * th) / (2.0 * th.cos() - z)
                        })
                        .sum::<Complex64>()
                        / n as f64;
                    let fast = cycle_resolvent(n, c, a, z);
                    assert!((fast - direct).norm() < 1e-9 * (1.0 + direct.norm()), "n={n} a={a} z={z}");
                }
            }
        }
    }

    #[test]
    fn roots_small_cases() {
        assert_eq!(roots_of_unity_close_exact(1), 0.0);
        assert!((roots_of_unity_close_exact(2) - 0.375).abs() < 1e-15);
    }

    #[test]
    fn binned_square_sum_counts_pairs() {
        let v = [0.01, 0.05, 0.15, 0.32, 0.33, 0.35, 1.0];
        // bins of 0.1 on [0, 1): {0.01,0.05}, {0.15}, {0.32,0.33,0.35}
        assert_eq!(binned_square_sum(&v, 0.0, 1.0, 0.1), 4.0 + 1.0 + 9.0);
    }

    #[test]
    fn parameter_constraints() {
        assert!(check_phase_parameters(0.01, 0.5).is_ok());
        assert!(check_phase_parameters(0.02, 0.1).is_err());
        assert!(check_phase_parameters(0.05, 0.5).is_err());
    }
}
