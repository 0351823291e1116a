//! Rectangular complex fields on a box of ℤ².

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Values on `{0..nx-1} × {0..ny-1}`, stored row-major as `x·ny + y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeField {
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<Complex64>,
}

impl LatticeField {
    pub fn new(nx: usize, ny: usize, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != nx * ny {
            return Err(invalid(format!("field of {} values cannot be {nx}×{ny}", values.len())));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(invalid("field values must be finite"));
        }
        Ok(Self { nx, ny, values })
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Complex64>(nx: usize, ny: usize, mut f: F) -> Self {
        let mut values = Vec::with_capacity(nx * ny);
        for x in 0..nx {
            for y in 0..ny {
                values.push(f(x, y));
            }
        }
        Self { nx, ny, values }
    }

    /// A torus eigenvector (length `n²`) viewed as an `n × n` field.
    pub fn square(values: Vec<Complex64>) -> Result<Self> {
        let n = (values.len() as f64).sqrt().round() as usize;
        Self::new(n, n, values)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Complex64 {
        self.values[x * self.ny + y]
    }

    /// The `w × h` sub-box starting at `origin`.
    pub fn sub_box(&self, origin: (usize, usize), w: usize, h: usize) -> Result<Self> {
        if origin.0 + w > self.nx || origin.1 + h > self.ny {
            return Err(invalid(format!(
                "box {w}×{h} at {origin:?} leaves the {}×{} field",
                self.nx, self.ny
            )));
        }
        Ok(Self::from_fn(w, h, |x, y| self.get(origin.0 + x, origin.1 + y)))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self { nx: self.nx, ny: self.ny, values: self.values.iter().map(|v| v * s).collect() }
    }
}
