//! Fields on the plane stored as continuous-normalization Fourier coefficients.
//!
//! `coeffs[i*Ny + j]` approximates `f̂(ξ_i, μ_j) = ∫ f(x,y) e^{-i(xξ+yμ)} dx dy`,
//! with the quadrature factor `dx dy` baked into the forward transform. The
//! matching Plancherel identity is `‖f‖²_{L²} = Σ |f̂|² / (Lx Ly)`, and every
//! frequency-side norm in this crate uses that measure.

use num_complex::Complex64;

use crate::error::{KpError, Result};
use crate::fft::{fft_all, parity_sign};
use crate::grid::{Grid2D, ZeroModePolicy};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    grid: Grid2D,
    coeffs: Vec<Complex64>,
}

impl Field2D {
    pub fn zeros(grid: &Grid2D) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: vec![ZERO; grid.len()],
        }
    }

    /// Wrap coefficients in FFT order; the zero-mode policy is applied.
    pub fn from_coeffs(grid: &Grid2D, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(KpError::GridMismatch(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        let mut f = Self {
            grid: grid.clone(),
            coeffs,
        };
        f.apply_policy();
        Ok(f)
    }

    /// Coefficients from a function of `(ξ, μ)`.
    pub fn from_spectrum(grid: &Grid2D, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let mut coeffs = Vec::with_capacity(grid.len());
        for i in 0..grid.nx() {
            for j in 0..grid.ny() {
                coeffs.push(f(grid.xi(i), grid.mu(j)));
            }
        }
        let mut out = Self {
            grid: grid.clone(),
            coeffs,
        };
        out.apply_policy();
        out
    }

    /// Forward transform of physical samples laid out as `[ix*Ny + iy]`.
    pub fn from_physical(grid: &Grid2D, samples: &[Complex64]) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(KpError::GridMismatch(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        Ok(Self::from_physical_raw(grid, samples.to_vec()).with_policy())
    }

    pub fn from_real(grid: &Grid2D, samples: &[f64]) -> Result<Self> {
        let c: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Self::from_physical(grid, &c)
    }

    /// Sample a real function of `(x, y)` on the grid and transform it.
    pub fn from_real_fn(grid: &Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut s = Vec::with_capacity(grid.len());
        for ix in 0..grid.nx() {
            for iy in 0..grid.ny() {
                s.push(Complex64::new(f(grid.x(ix), grid.y(iy)), 0.0));
            }
        }
        Self::from_physical_raw(grid, s).with_policy()
    }

    /// Transform without applying the zero-mode policy (intermediate products).
    pub(crate) fn from_physical_raw(grid: &Grid2D, mut buf: Vec<Complex64>) -> Self {
        let shape = [grid.nx(), grid.ny()];
        fft_all(&mut buf, &shape, false);
        let h = grid.cell_area();
        for i in 0..grid.nx() {
            let si = parity_sign(i) * h;
            for j in 0..grid.ny() {
                buf[i * grid.ny() + j] *= si * parity_sign(j);
            }
        }
        Self {
            grid: grid.clone(),
            coeffs: buf,
        }
    }

    pub(crate) fn from_raw(grid: &Grid2D, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.len());
        Self {
            grid: grid.clone(),
            coeffs,
        }
    }

    fn with_policy(mut self) -> Self {
        self.apply_policy();
        self
    }

    fn apply_policy(&mut self) {
        match self.grid.policy() {
            ZeroModePolicy::ZeroOut => {
                let ny = self.grid.ny();
                self.coeffs[..ny].iter_mut().for_each(|c| *c = ZERO);
            }
        }
    }

    /// Inverse transform to physical samples.
    pub fn to_physical(&self) -> Vec<Complex64> {
        let g = &self.grid;
        let mut buf = self.coeffs.clone();
        for i in 0..g.nx() {
            let si = parity_sign(i);
            for j in 0..g.ny() {
                buf[i * g.ny() + j] *= si * parity_sign(j);
            }
        }
        fft_all(&mut buf, &[g.nx(), g.ny()], true);
        let norm = 1.0 / (g.lx() * g.ly());
        buf.iter_mut().for_each(|v| *v *= norm);
        buf
    }

    /// Real part of the physical samples.
    pub fn to_real(&self) -> Vec<f64> {
        self.to_physical().into_iter().map(|c| c.re).collect()
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }
    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }
    #[inline]
    pub fn coeff(&self, i: usize, j: usize) -> Complex64 {
        self.coeffs[self.grid.index(i, j)]
    }

    /// `‖f‖_{L²}` via Plancherel.
    pub fn l2_norm(&self) -> f64 {
        (self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.freq_weight()).sqrt()
    }

    /// `‖f‖_{L²}` by quadrature of the physical samples.
    pub fn l2_norm_physical(&self) -> f64 {
        let s: f64 = self.to_physical().iter().map(|c| c.norm_sqr()).sum();
        (s * self.grid.cell_area()).sqrt()
    }

    /// Pointwise multiplier in frequency space; the policy is re-applied.
    pub fn map(&self, f: impl Fn(f64, f64, Complex64) -> Complex64) -> Self {
        let g = &self.grid;
        let mut coeffs = Vec::with_capacity(g.len());
        for i in 0..g.nx() {
            let xi = g.xi(i);
            for j in 0..g.ny() {
                coeffs.push(f(xi, g.mu(j), self.coeffs[i * g.ny() + j]));
            }
        }
        Self::from_raw(g, coeffs).with_policy()
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self::from_raw(&self.grid, self.coeffs.iter().map(|c| c * a).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self::from_raw(
            &self.grid,
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scaled(-1.0))
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(KpError::GridMismatch(
                "fields live on different grids".into(),
            ));
        }
        Ok(())
    }

    /// `∂x f`.
    pub fn dx(&self) -> Self {
        self.map(|xi, _, c| c * Complex64::new(0.0, xi))
    }

    /// `∂x⁻¹∂y f`, i.e. multiplication by `μ/ξ`.
    pub fn dx_inv_dy(&self) -> Self {
        self.map(|xi, mu, c| if xi == 0.0 { ZERO } else { c * (mu / xi) })
    }

    /// `y·f`, by multiplication of the physical samples.
    pub fn mul_y(&self) -> Self {
        let g = &self.grid;
        let mut s = self.to_physical();
        for ix in 0..g.nx() {
            for iy in 0..g.ny() {
                s[ix * g.ny() + iy] *= g.y(iy);
            }
        }
        Self::from_physical_raw(g, s).with_policy()
    }

    /// Re-interpret the same coefficient array on another grid of equal shape.
    pub(crate) fn regrid(self, grid: &Grid2D) -> Self {
        debug_assert_eq!(grid.len(), self.grid.len());
        Self {
            grid: grid.clone(),
            coeffs: self.coeffs,
        }
    }

    /// Maximum violation of `f̂(-ξ,-μ) = conj f̂(ξ,μ)` relative to the largest
    /// coefficient, ignoring the unpaired Nyquist lines.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let g = &self.grid;
        let (nx, ny) = (g.nx(), g.ny());
        let scale = self
            .coeffs
            .iter()
            .map(|c| c.norm())
            .fold(0.0_f64, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0_f64;
        for i in 0..nx {
            if i == nx / 2 {
                continue;
            }
            let ii = (nx - i) % nx;
            for j in 0..ny {
                if j == ny / 2 {
                    continue;
                }
                let jj = (ny - j) % ny;
                let d = (self.coeff(i, j) - self.coeff(ii, jj).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst / scale
    }
}
