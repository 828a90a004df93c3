//! Periodic spatial discretization of the plane.
//!
//! Physical samples sit at `x = -Lx/2 + ix * Lx/Nx` (likewise for `y`), so
//! the box is centered on the origin. Wavenumbers are stored in FFT order:
//! index `i` carries the signed integer `k = i` for `i < N/2` and `k = i - N`
//! otherwise, with `xi = 2πk/Lx`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{KpError, Result};

/// How the `xi = 0` column of coefficients is treated.
///
/// Every operator involving `1/xi` needs that column to vanish, so fields are
/// forced to be mean-zero in `x` for every `y` when they are constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum ZeroModePolicy {
    #[default]
    ZeroOut,
}

#[derive(Debug)]
struct Tables {
    xi: Vec<f64>,
    mu: Vec<f64>,
}

/// Periodic box `[-Lx/2, Lx/2) x [-Ly/2, Ly/2)` with `Nx x Ny` modes.
#[derive(Debug, Clone)]
pub struct Grid2D {
    lx: f64,
    ly: f64,
    nx: usize,
    ny: usize,
    policy: ZeroModePolicy,
    tables: Arc<Tables>,
}

impl PartialEq for Grid2D {
    fn eq(&self, other: &Self) -> bool {
        self.lx == other.lx
            && self.ly == other.ly
            && self.nx == other.nx
            && self.ny == other.ny
            && self.policy == other.policy
    }
}

/// Signed integer wavenumber of FFT index `i` on an `n`-point axis.
#[inline]
pub fn signed_index(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// FFT index of signed wavenumber `k`, if it is representable on `n` points.
#[inline]
pub fn fft_index(k: i64, n: usize) -> Option<usize> {
    let half = (n / 2) as i64;
    if k < -half || k >= half {
        None
    } else if k >= 0 {
        Some(k as usize)
    } else {
        Some((k + n as i64) as usize)
    }
}

pub(crate) fn wavenumbers(n: usize, len: f64) -> Vec<f64> {
    (0..n)
        .map(|i| 2.0 * PI * signed_index(i, n) as f64 / len)
        .collect()
}

pub(crate) fn check_axis(name: &str, n: usize, len: f64) -> Result<()> {
    if n == 0 || n % 2 != 0 {
        return Err(KpError::InvalidGrid(format!(
            "{name} mode count must be even and positive, got {n}"
        )));
    }
    if !(len.is_finite() && len > 0.0) {
        return Err(KpError::InvalidGrid(format!(
            "{name} box length must be positive and finite, got {len}"
        )));
    }
    Ok(())
}

impl Grid2D {
    pub fn new(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<Self> {
        check_axis("x", nx, lx)?;
        check_axis("y", ny, ly)?;
        Ok(Self {
            lx,
            ly,
            nx,
            ny,
            policy: ZeroModePolicy::ZeroOut,
            tables: Arc::new(Tables {
                xi: wavenumbers(nx, lx),
                mu: wavenumbers(ny, ly),
            }),
        })
    }

    /// Desk-scale default: `Lx = Ly = 32π`, `256 x 256` modes.
    pub fn desk_default() -> Self {
        Self::new(32.0 * PI, 32.0 * PI, 256, 256).expect("default grid is valid")
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }
    pub fn ly(&self) -> f64 {
        self.ly
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn policy(&self) -> ZeroModePolicy {
        self.policy
    }

    /// Wavenumber table in `x`, FFT order.
    pub fn xi_table(&self) -> &[f64] {
        &self.tables.xi
    }
    /// Wavenumber table in `y`, FFT order.
    pub fn mu_table(&self) -> &[f64] {
        &self.tables.mu
    }
    #[inline]
    pub fn xi(&self, i: usize) -> f64 {
        self.tables.xi[i]
    }
    #[inline]
    pub fn mu(&self, j: usize) -> f64 {
        self.tables.mu[j]
    }
    pub fn dxi(&self) -> f64 {
        2.0 * PI / self.lx
    }
    pub fn dmu(&self) -> f64 {
        2.0 * PI / self.ly
    }
    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }
    pub fn dy(&self) -> f64 {
        self.ly / self.ny as f64
    }
    #[inline]
    pub fn x(&self, ix: usize) -> f64 {
        -0.5 * self.lx + ix as f64 * self.dx()
    }
    #[inline]
    pub fn y(&self, iy: usize) -> f64 {
        -0.5 * self.ly + iy as f64 * self.dy()
    }
    /// Physical cell area `dx dy`.
    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }
    /// Plancherel weight of one frequency cell: `dξ dμ / (2π)^2 = 1/(Lx Ly)`.
    pub fn freq_weight(&self) -> f64 {
        1.0 / (self.lx * self.ly)
    }
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    /// Same box, `factor` times as many modes per axis.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.lx, self.ly, self.nx * factor, self.ny * factor)
    }

    /// Wavenumbers in ascending order (FFT order unshuffled).
    pub fn xi_sorted(&self) -> Vec<f64> {
        sorted(&self.tables.xi)
    }
    pub fn mu_sorted(&self) -> Vec<f64> {
        sorted(&self.tables.mu)
    }
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|p| v[(p + n / 2) % n]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_are_increasing_with_single_zero() {
        let g = Grid2D::new(10.0, 4.0, 16, 8).unwrap();
        for t in [g.xi_sorted(), g.mu_sorted()] {
            assert!(t.windows(2).all(|w| w[0] < w[1]));
            assert_eq!(t.iter().filter(|&&v| v == 0.0).count(), 1);
        }
        assert_eq!(g.xi(0), 0.0);
        assert!((g.xi(8) + 2.0 * PI * 8.0 / 10.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_odd_or_empty_axes() {
        assert!(Grid2D::new(1.0, 1.0, 15, 8).is_err());
        assert!(Grid2D::new(1.0, 1.0, 0, 8).is_err());
        assert!(Grid2D::new(-1.0, 1.0, 16, 8).is_err());
        assert!(Grid2D::new(1.0, f64::NAN, 16, 8).is_err());
    }

    #[test]
    fn index_round_trip() {
        for n in [2usize, 8, 16] {
            for i in 0..n {
                assert_eq!(fft_index(signed_index(i, n), n), Some(i));
            }
            assert_eq!(fft_index(n as i64 / 2, n), None);
        }
    }
}
