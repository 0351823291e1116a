//! Level-set images of the real part of a field.
//!
//! Pixels are two-tone by the sign of `Re u` (`Re u ≥ 0` dark), or with
//! `banded` four quantile bands of `Re u`. Each lattice site becomes a
//! `scale × scale` block; row `x` of the field is image row `x`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{invalid, Result};
use crate::field::LatticeField;

const NEGATIVE: [u8; 3] = [242, 238, 226];
const POSITIVE: [u8; 3] = [28, 54, 112];
const BANDS: [[u8; 3]; 4] = [[242, 238, 226], [170, 196, 222], [84, 128, 178], [28, 54, 112]];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Ppm,
    Svg,
}

impl ImageFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ppm" => Ok(Self::Ppm),
            "svg" => Ok(Self::Svg),
            _ => Err(invalid(format!("unknown image format `{s}`"))),
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            Self::Ppm => "ppm",
            Self::Svg => "svg",
        }
    }
}

/// Colour of every site, row-major.
pub fn site_colours(field: &LatticeField, banded: bool) -> Vec<[u8; 3]> {
    let re: Vec<f64> = field.values.iter().map(|v| v.re).collect();
    if !banded {
        return re.iter().map(|&x| if x >= 0.0 { POSITIVE } else { NEGATIVE }).collect();
    }
    let mut sorted = re.clone();
    sorted.sort_by(f64::total_cmp);
    let q = |p: f64| sorted[((sorted.len() - 1) as f64 * p).round() as usize];
    let cuts = [q(0.25), q(0.5), q(0.75)];
    re.iter()
        .map(|&x| BANDS[cuts.iter().filter(|&&c| x > c).count()])
        .collect()
}

pub fn render_levelset(field: &LatticeField, path: &Path, scale: usize, banded: bool, format: ImageFormat) -> Result<()> {
    if scale == 0 || field.nx == 0 || field.ny == 0 {
        return Err(invalid("image needs a non-empty field and scale ≥ 1"));
    }
    let colours = site_colours(field, banded);
    let mut w = BufWriter::new(File::create(path)?);
    match format {
        ImageFormat::Ppm => {
            let (width, height) = (field.ny * scale, field.nx * scale);
            write!(w, "P6\n{width} {height}\n255\n")?;
            let mut row = Vec::with_capacity(width * 3);
            for x in 0..field.nx {
                row.clear();
                for y in 0..field.ny {
                    for _ in 0..scale {
                        row.extend_from_slice(&colours[x * field.ny + y]);
                    }
                }
                for _ in 0..scale {
                    w.write_all(&row)?;
                }
            }
        }
        ImageFormat::Svg => {
            let (width, height) = (field.ny * scale, field.nx * scale);
            writeln!(
                w,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" shape-rendering=\"crispEdges\">"
            )?;
            for x in 0..field.nx {
                for y in 0..field.ny {
                    let [r, g, b] = colours[x * field.ny + y];
                    writeln!(
                        w,
                        "<rect x=\"{}\" y=\"{}\" width=\"{scale}\" height=\"{scale}\" fill=\"#{r:02x}{g:02x}{b:02x}\"/>",
                        y * scale,
                        x * scale
                    )?;
                }
            }
            writeln!(w, "</svg>")?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a field from CSV with header `x,y,re,im`; the box is `max x + 1` by `max y + 1`.
pub fn read_field_csv(path: &Path) -> Result<LatticeField> {
    let mut r = csv::Reader::from_path(path)?;
    let mut rows: Vec<(usize, usize, f64, f64)> = Vec::new();
    for rec in r.deserialize() {
        rows.push(rec?);
    }
    if rows.is_empty() {
        return Err(invalid("field CSV has no rows"));
    }
    let nx = rows.iter().map(|r| r.0).max().unwrap() + 1;
    let ny = rows.iter().map(|r| r.1).max().unwrap() + 1;
    let mut values = vec![num_complex::Complex64::new(0.0, 0.0); nx * ny];
    for (x, y, re, im) in rows {
        values[x * ny + y] = num_complex::Complex64::new(re, im);
    }
    LatticeField::new(nx, ny, values)
}

/// Writes a field as CSV `x,y,re,im`.
pub fn write_field_csv(field: &LatticeField, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "y", "re", "im"])?;
    for x in 0..field.nx {
        for y in 0..field.ny {
            let v = field.get(x, y);
            w.write_record([x.to_string(), y.to_string(), format!("{:.17e}", v.re), format!("{:.17e}", v.im)])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn ppm_pixels(path: &Path) -> (usize, usize, Vec<u8>) {
        let bytes = std::fs::read(path).unwrap();
        let text = String::from_utf8_lossy(&bytes[..20]).to_string();
        let mut it = text.split_whitespace();
        assert_eq!(it.next(), Some("P6"));
        let w: usize = it.next().unwrap().parse().unwrap();
        let h: usize = it.next().unwrap().parse().unwrap();
        (w, h, bytes[bytes.len() - w * h * 3..].to_vec())
    }

    #[test]
    fn constant_and_checkerboard() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.ppm");
        let ones = LatticeField::from_fn(3, 5, |_, _| Complex64::new(1.0, 0.0));
        render_levelset(&ones, &p, 2, false, ImageFormat::Ppm).unwrap();
        let (w, h, px) = ppm_pixels(&p);
        assert_eq!((w, h), (10, 6));
        assert!(px.chunks(3).all(|c| c == POSITIVE));
        let cb = LatticeField::from_fn(4, 4, |x, y| Complex64::new(if (x + y) % 2 == 0 { 1.0 } else { -1.0 }, 0.0));
        render_levelset(&cb, &p, 1, false, ImageFormat::Ppm).unwrap();
        let (_, _, px) = ppm_pixels(&p);
        for (i, c) in px.chunks(3).enumerate() {
            let (x, y) = (i / 4, i % 4);
            assert_eq!(c, if (x + y) % 2 == 0 { POSITIVE } else { NEGATIVE });
        }
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        let f = LatticeField::from_fn(3, 2, |x, y| Complex64::new(x as f64, -(y as f64)));
        write_field_csv(&f, &p).unwrap();
        assert_eq!(read_field_csv(&p).unwrap(), f);
    }
}
