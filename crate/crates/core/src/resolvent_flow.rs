//! Hermitian Brownian motion started from a deterministic matrix, and the
//! resolvent observables `m_t(z)` and `G_t(x, x, z)` along its paths.
//!
//! Increments are `√dt · W` with `W` GUE, so every entry of `W_t - W_0` has
//! variance `t/n`. Under this flow
//! `dm = m ∂_z m dt + dM` and `dG(x,x) = m ∂_z G(x,x) dt + dM(x,x)`, with
//! `d[M(x,x)] = (Im G(x,x))² / (n (Im z)²) dt`.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::random_matrix::{gue_sample, hermitian_eig, HermitianMatrix, DEFAULT_RTOL};

/// Current matrix `W_t`, elapsed time and step size.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub h: HermitianMatrix,
    pub t: f64,
    pub dt: f64,
    pub steps: u64,
}

impl FlowState {
    pub fn new(h0: HermitianMatrix, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(invalid(format!("flow step must be positive, got {dt}")));
        }
        Ok(Self { h: h0, t: 0.0, dt, steps: 0 })
    }

    pub fn diagonal(d: &[f64], dt: f64) -> Result<Self> {
        Self::new(HermitianMatrix::from_real_diagonal(d), dt)
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }
}

/// Advances `W_t` by one exact Gaussian increment of size `state.dt`.
pub fn flow_step<R: Rng + ?Sized>(state: &mut FlowState, rng: &mut R) {
    let w = gue_sample(state.dim(), rng);
    state.h.add_scaled_in_place(&w, state.dt.sqrt());
    state.t += state.dt;
    state.steps += 1;
}

/// Observables at one recorded time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowRecord {
    pub step: u64,
    pub t: f64,
    pub m: Complex64,
    /// `∂_z m_t(z)`.
    pub dm: Complex64,
    /// `G_t(x, x, z)` for each tracked site.
    pub g: Vec<Complex64>,
    /// `∂_z G_t(x, x, z)`.
    pub dg: Vec<Complex64>,
}

/// Recorded time series of `m_t(z)` and `G_t(x, x, z)` along one path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowObservable {
    pub n: usize,
    pub z: Complex64,
    pub xs: Vec<usize>,
    pub records: Vec<FlowRecord>,
}

impl FlowObservable {
    pub fn new(n: usize, z: Complex64, xs: Vec<usize>) -> Result<Self> {
        if !(z.im > 0.0) {
            return Err(invalid(format!("observables need Im z > 0, got {z}")));
        }
        if let Some(&x) = xs.iter().find(|&&x| x >= n) {
            return Err(invalid(format!("site {x} outside 0..{n}")));
        }
        Ok(Self { n, z, xs, records: Vec::new() })
    }

    /// CSV `step,t,re_m,im_m,re_G_x,im_G_x,...`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
        let mut header = vec!["step".to_string(), "t".into(), "re_m".into(), "im_m".into()];
        for x in &self.xs {
            header.push(format!("re_G_{x}"));
            header.push(format!("im_G_{x}"));
        }
        w.write_record(&header)?;
        for r in &self.records {
            let mut row = vec![r.step.to_string(), format!("{:.17e}", r.t), format!("{:.17e}", r.m.re), format!("{:.17e}", r.m.im)];
            for g in &r.g {
                row.push(format!("{:.17e}", g.re));
                row.push(format!("{:.17e}", g.im));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Appends `m_t(z)`, `G_t(x,x,z)` and their `z`-derivatives from one eigensolve.
pub fn record_observables(obs: &mut FlowObservable, state: &FlowState) -> Result<()> {
    if state.dim() != obs.n {
        return Err(invalid("observable and flow dimensions differ"));
    }
    let es = hermitian_eig(&state.h, DEFAULT_RTOL)?;
    let z = obs.z;
    let nf = obs.n as f64;
    let inv: Vec<Complex64> = es.eigenvalues.iter().map(|&l| 1.0 / (l - z)).collect();
    let m: Complex64 = inv.iter().sum::<Complex64>() / nf;
    let dm: Complex64 = inv.iter().map(|r| r * r).sum::<Complex64>() / nf;
    let mut g = Vec::with_capacity(obs.xs.len());
    let mut dg = Vec::with_capacity(obs.xs.len());
    for &x in &obs.xs {
        let (mut gx, mut dgx) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for (k, r) in inv.iter().enumerate() {
            let w = es.vectors[(x, k)].norm_sqr();
            gx += w * r;
            dgx += w * r * r;
        }
        g.push(gx);
        dg.push(dgx);
    }
    obs.records.push(FlowRecord { step: state.steps, t: state.t, m, dm, g, dg });
    Ok(())
}

/// Runs one path of `steps` steps, recording every `record_every`-th state (and the start).
pub fn simulate_path<R: Rng + ?Sized>(
    h0: &HermitianMatrix,
    z: Complex64,
    xs: &[usize],
    dt: f64,
    steps: usize,
    record_every: usize,
    rng: &mut R,
) -> Result<FlowObservable> {
    let every = record_every.max(1);
    let mut state = FlowState::new(h0.clone(), dt)?;
    let mut obs = FlowObservable::new(h0.dim(), z, xs.to_vec())?;
    record_observables(&mut obs, &state)?;
    for s in 1..=steps {
        flow_step(&mut state, rng);
        if s % every == 0 {
            record_observables(&mut obs, &state)?;
        }
    }
    Ok(obs)
}

/// Independent paths from `h0`, each on its own ChaCha8 stream seeded from `rng`.
pub fn simulate_paths<R: Rng + ?Sized>(
    h0: &HermitianMatrix,
    z: Complex64,
    xs: &[usize],
    dt: f64,
    steps: usize,
    paths: usize,
    rng: &mut R,
) -> Result<Vec<FlowObservable>> {
    let seeds: Vec<u64> = (0..paths).map(|_| rng.random()).collect();
    seeds
        .par_iter()
        .map(|&s| simulate_path(h0, z, xs, dt, steps, 1, &mut ChaCha8Rng::seed_from_u64(s)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftResidual {
    /// `max_step |mean| / stderr` of the complex residual `Δm - m ∂_z m Δt`.
    pub statistic: f64,
    pub worst_step: usize,
    pub steps: usize,
    pub paths: usize,
    pub drift_included: bool,
}

/// Ensemble test of the drift identity for `m_t`.
///
/// The residual per step is complex; its standard error is
/// `sqrt((Var Re + Var Im) / paths)`, so `|mean|/stderr` is a `|N_ℂ(0,1)|` under the identity.
/// With `include_drift = false` the drift is not subtracted, which is the negative control.
pub fn drift_residual(paths: &[FlowObservable], include_drift: bool) -> Result<DriftResidual> {
    if paths.len() < 2 {
        return Err(invalid("drift_residual needs at least two paths"));
    }
    let steps = paths[0].records.len().saturating_sub(1);
    if steps == 0 || paths.iter().any(|p| p.records.len() != steps + 1) {
        return Err(invalid("paths must share a common, non-empty record schedule"));
    }
    let p = paths.len() as f64;
    let mut statistic = 0.0f64;
    let mut worst_step = 0;
    for s in 0..steps {
        let res: Vec<Complex64> = paths
            .iter()
            .map(|path| {
                let (a, b) = (&path.records[s], &path.records[s + 1]);
                let drift = if include_drift { a.m * a.dm * (b.t - a.t) } else { Complex64::new(0.0, 0.0) };
                b.m - a.m - drift
            })
            .collect();
        let mean = res.iter().sum::<Complex64>() / p;
        let var = res.iter().map(|r| (r - mean).norm_sqr()).sum::<f64>() / (p - 1.0);
        let se = (var / p).sqrt();
        let score = if se > 0.0 { mean.norm() / se } else { f64::INFINITY };
        if score > statistic {
            statistic = score;
            worst_step = s;
        }
    }
    Ok(DriftResidual { statistic, worst_step, steps, paths: paths.len(), drift_included: include_drift })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QvCheck {
    pub realized: f64,
    pub predicted: f64,
}

impl QvCheck {
    pub fn ratio(&self) -> f64 {
        self.realized / self.predicted
    }
}

/// Realized versus predicted quadratic variation of the martingale part of `G_t(x,x,z)`.
///
/// `x_slot` indexes `path.xs`. Realized is `Σ |ΔG - m ∂_z G Δt|²`; predicted is the
/// left-point quadrature of `(Im G)² / (n (Im z)²)`.
pub fn qv_check(path: &FlowObservable, x_slot: usize) -> Result<QvCheck> {
    if x_slot >= path.xs.len() {
        return Err(invalid(format!("site slot {x_slot} not recorded")));
    }
    if path.records.len() < 2 {
        return Err(invalid("qv_check needs at least two records"));
    }
    let scale = 1.0 / (path.n as f64 * path.z.im * path.z.im);
    let (mut realized, mut predicted) = (0.0, 0.0);
    for w in path.records.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let dt = b.t - a.t;
        let inc = b.g[x_slot] - a.g[x_slot] - a.m * a.dg[x_slot] * dt;
        realized += inc.norm_sqr();
        predicted += scale * a.g[x_slot].im * a.g[x_slot].im * dt;
    }
    Ok(QvCheck { realized, predicted })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppingTime {
    /// Fraction of paths with `|m_s(z)| ≥ threshold` for some recorded `s ≤ t_final`.
    pub probability: f64,
    pub threshold: f64,
    pub paths: usize,
    pub steps: usize,
}

/// Empirical `P(τ ≤ t_final)` for `τ = inf{s : |m_s(z)| ≥ threshold}`.
///
/// `threshold` defaults to `2 (n t_final)^{-1/2}`; requires `Im z = 1/n` and
/// `|m_0(z)| ≤ (n t_final)^{-1/2}`. `|m_s|` is monitored at each of `steps` steps.
pub fn stopping_time_experiment<R: Rng + ?Sized>(
    d: &[f64],
    t_final: f64,
    z: Complex64,
    threshold: Option<f64>,
    paths: usize,
    steps: usize,
    rng: &mut R,
) -> Result<StoppingTime> {
    let n = d.len();
    let nf = n as f64;
    if n == 0 || paths == 0 {
        return Err(invalid("stopping_time_experiment needs n ≥ 1 and at least one path"));
    }
    if (z.im - 1.0 / nf).abs() > 1e-12 / nf {
        return Err(invalid(format!("Im z must equal 1/n = {}, got {}", 1.0 / nf, z.im)));
    }
    if !(t_final >= 0.0) {
        return Err(invalid("t_final must be non-negative"));
    }
    if t_final == 0.0 {
        return Ok(StoppingTime { probability: 0.0, threshold: threshold.unwrap_or(f64::INFINITY), paths, steps: 0 });
    }
    let cap = (nf * t_final).powf(-0.5);
    let m0: Complex64 = d.iter().map(|&x| 1.0 / (x - z)).sum::<Complex64>() / nf;
    if m0.norm() > cap {
        return Err(invalid(format!("initial |m_0(z)| = {} exceeds (nt)^(-1/2) = {cap}", m0.norm())));
    }
    let threshold = threshold.unwrap_or(2.0 * cap);
    let steps = steps.max(1);
    let dt = t_final / steps as f64;
    let h0 = HermitianMatrix::from_real_diagonal(d);
    let seeds: Vec<u64> = (0..paths).map(|_| rng.random()).collect();
    let hits: Vec<bool> = seeds
        .par_iter()
        .map(|&s| -> Result<bool> {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let mut state = FlowState::new(h0.clone(), dt)?;
            for _ in 0..steps {
                flow_step(&mut state, &mut rng);
                let ev = crate::random_matrix::hermitian_eigenvalues(&state.h)?;
                let m: Complex64 = ev.iter().map(|&l| 1.0 / (l - z)).sum::<Complex64>() / nf;
                if m.norm() >= threshold {
                    return Ok(true);
                }
            }
            Ok(false)
        })
        .collect::<Result<_>>()?;
    let count = hits.iter().filter(|&&h| h).count();
    Ok(StoppingTime { probability: count as f64 / paths as f64, threshold, paths, steps })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_start_observables() {
        let d = [-1.0, 0.5, 2.0];
        let state = FlowState::diagonal(&d, 0.01).unwrap();
        let z = Complex64::new(0.3, 0.2);
        let mut obs = FlowObservable::new(3, z, vec![0, 1, 2]).unwrap();
        record_observables(&mut obs, &state).unwrap();
        let r = &obs.records[0];
        for (x, &dx) in d.iter().enumerate() {
            assert!((r.g[x] - 1.0 / (dx - z)).norm() < 1e-12);
            assert!((r.dg[x] - 1.0 / ((dx - z) * (dx - z))).norm() < 1e-12);
        }
        assert!(r.dm.norm() <= r.m.im / z.im + 1e-12);
    }

    #[test]
    fn hermitian_after_many_steps() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = FlowState::diagonal(&[0.0; 4], 1e-3).unwrap();
        for _ in 0..10_000 {
            flow_step(&mut s, &mut rng);
        }
        assert!(s.h.is_hermitian());
        assert!((s.t - 10.0).abs() < 1e-9);
    }

    #[test]
    fn zero_horizon_never_stops() {
        let d: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = stopping_time_experiment(&d, 0.0, Complex64::new(0.5, 0.1), None, 5, 3, &mut rng).unwrap();
        assert_eq!(r.probability, 0.0);
    }
}
