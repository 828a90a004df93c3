//! Named initial data. Every preset has zero mean in `x` on each line `y = const`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{KpError, Result};
use crate::field::Field2D;
use crate::grid::{fft_index, Grid2D};
use crate::kpf2;
use crate::rng::band_limited_field;

fn one() -> f64 {
    1.0
}

fn three() -> i64 {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// `A ∂x exp(−(x²/σx² + y²/σy²))`.
    Gaussian {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        sigma_x: f64,
        #[serde(default = "one")]
        sigma_y: f64,
    },
    /// `A cos(kx·2πx/Lx + ky·2πy/Ly)` with integer `kx ≠ 0`.
    SingleMode {
        kx: i64,
        #[serde(default)]
        ky: i64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Random real trigonometric polynomial, `1 ≤ |kx| ≤ band`, `|ky| ≤ band`.
    RandomBand {
        #[serde(default = "three")]
        band: i64,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        seed: u64,
    },
    /// A field stored in the KPF2 container; its grid must match the run grid.
    File { path: String },
}

impl InitialData {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(KpError::InvalidParameter(m));
        match *self {
            Self::Gaussian {
                amplitude,
                sigma_x,
                sigma_y,
            } => {
                if !amplitude.is_finite() || !(sigma_x > 0.0 && sigma_y > 0.0) {
                    return bad(format!(
                        "gaussian needs finite amplitude and positive widths, got A={amplitude}, σx={sigma_x}, σy={sigma_y}"
                    ));
                }
            }
            Self::SingleMode { kx, amplitude, .. } => {
                if kx == 0 || !amplitude.is_finite() {
                    return bad(format!("single_mode needs kx ≠ 0 and finite amplitude, got kx={kx}"));
                }
            }
            Self::RandomBand { band, amplitude, .. } => {
                if band < 1 || !amplitude.is_finite() {
                    return bad(format!("random_band needs band ≥ 1 and finite amplitude, got band={band}"));
                }
            }
            Self::File { .. } => {}
        }
        Ok(())
    }

    /// Replace the seed of a random preset.
    pub fn with_seed(mut self, s: u64) -> Self {
        if let Self::RandomBand { seed, .. } = &mut self {
            *seed = s;
        }
        self
    }

    pub fn build(&self, grid: &Grid2D) -> Result<Field2D> {
        self.validate()?;
        match *self {
            Self::Gaussian {
                amplitude,
                sigma_x,
                sigma_y,
            } => {
                let (sx, sy) = (sigma_x * sigma_x, sigma_y * sigma_y);
                Ok(Field2D::from_real_fn(grid, |x, y| {
                    amplitude * (-2.0 * x / sx) * (-(x * x / sx + y * y / sy)).exp()
                }))
            }
            Self::SingleMode { kx, ky, amplitude } => {
                let (nx, ny) = (grid.nx(), grid.ny());
                match (fft_index(kx, nx), fft_index(ky, ny), fft_index(-kx, nx), fft_index(-ky, ny)) {
                    (Some(i), Some(j), Some(i2), Some(j2)) if 2 * kx.unsigned_abs() < nx as u64 => {
                        let mut c = vec![Complex64::new(0.0, 0.0); grid.len()];
                        let a = Complex64::new(0.5 * amplitude * grid.lx() * grid.ly(), 0.0);
                        c[grid.index(i, j)] += a;
                        c[grid.index(i2, j2)] += a;
                        Field2D::from_coeffs(grid, c)
                    }
                    _ => Err(KpError::InvalidParameter(format!(
                        "mode ({kx}, {ky}) is not resolved on a {nx}x{ny} grid"
                    ))),
                }
            }
            Self::RandomBand { band, amplitude, seed } => Ok(band_limited_field(grid, band, seed).scaled(amplitude)),
            Self::File { ref path } => {
                let f = kpf2::load(path)?;
                let h = f.grid();
                if (h.nx(), h.ny(), h.lx(), h.ly()) != (grid.nx(), grid.ny(), grid.lx(), grid.ly()) {
                    return Err(KpError::GridMismatch(format!("{path} does not match the run grid")));
                }
                Ok(f)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> Grid2D {
        Grid2D::new(8.0 * PI, 8.0 * PI, 64, 64).unwrap()
    }

    #[test]
    fn gaussian_matches_its_closed_form() {
        let g = grid();
        let u = InitialData::Gaussian {
            amplitude: 0.5,
            sigma_x: 1.5,
            sigma_y: 2.0,
        }
        .build(&g)
        .unwrap();
        let phys = u.to_real();
        let (ix, iy) = (37, 29);
        let (x, y) = (g.x(ix), g.y(iy));
        let exact = 0.5 * (-2.0 * x / 2.25) * (-(x * x / 2.25 + y * y / 4.0)).exp();
        assert!((phys[g.index(ix, iy)] - exact).abs() < 1e-12);
        // ‖∂x e^{−x²/σx²−y²/σy²}‖² = (π/2) σy/σx
        let l2 = 0.5 * (PI / 2.0 * 2.0 / 1.5).sqrt();
        assert!((u.l2_norm() - l2).abs() < 1e-10 * l2);
    }

    #[test]
    fn single_mode_is_a_cosine() {
        let g = grid();
        let u = InitialData::SingleMode {
            kx: 2,
            ky: -1,
            amplitude: 3.0,
        }
        .build(&g)
        .unwrap();
        let phys = u.to_real();
        let (x, y) = (g.x(5), g.y(11));
        let exact = 3.0 * (2.0 * 2.0 * PI / g.lx() * x - 2.0 * PI / g.ly() * y).cos();
        assert!((phys[g.index(5, 11)] - exact).abs() < 1e-12);
        let bad = InitialData::SingleMode {
            kx: 40,
            ky: 0,
            amplitude: 1.0,
        };
        assert!(bad.build(&g).is_err());
        assert!(InitialData::SingleMode { kx: 0, ky: 1, amplitude: 1.0 }.validate().is_err());
    }

    #[test]
    fn seeds_and_parsing() {
        let j = r#"{"preset":"random_band","seed":4}"#;
        let d: InitialData = serde_json::from_str(j).unwrap();
        assert_eq!(d, InitialData::RandomBand { band: 3, amplitude: 1.0, seed: 4 });
        assert_eq!(d.clone().with_seed(9), InitialData::RandomBand { band: 3, amplitude: 1.0, seed: 9 });
        assert!(serde_json::from_str::<InitialData>(r#"{"preset":"gaussian","width":2}"#).is_err());
        let g = grid();
        assert_eq!(d.build(&g).unwrap(), d.build(&g).unwrap());
    }
}
