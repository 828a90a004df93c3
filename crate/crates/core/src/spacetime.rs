//! Space-time fields `f(x, y, t)` held as coefficients `f̂(ξ, μ, τ)`.
//!
//! The time box is `[-Lt/2, Lt/2)` with `Nt` samples and the same
//! continuous-normalization convention as [`Field2D`]: the forward transform
//! carries `dx dy dt`, and `‖f‖²_{L²} = Σ |f̂|² / (Lx Ly Lt)`. Storage order is
//! `[(i*Ny + j)*Nt + k]`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{KpError, Result};
use crate::fft::{fft_all, fft_axis, parity_sign};
use crate::field::Field2D;
use crate::grid::{check_axis, wavenumbers, Grid2D};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct FieldST {
    grid: Grid2D,
    nt: usize,
    lt: f64,
    taus: Vec<f64>,
    coeffs: Vec<Complex64>,
}

impl FieldST {
    pub fn zeros(grid: &Grid2D, nt: usize, lt: f64) -> Result<Self> {
        check_axis("t", nt, lt)?;
        Ok(Self {
            grid: grid.clone(),
            nt,
            lt,
            taus: wavenumbers(nt, lt),
            coeffs: vec![ZERO; grid.len() * nt],
        })
    }

    pub fn from_coeffs(grid: &Grid2D, nt: usize, lt: f64, coeffs: Vec<Complex64>) -> Result<Self> {
        let mut f = Self::zeros(grid, nt, lt)?;
        if coeffs.len() != f.coeffs.len() {
            return Err(KpError::GridMismatch(format!(
                "expected {} coefficients, got {}",
                f.coeffs.len(),
                coeffs.len()
            )));
        }
        f.coeffs = coeffs;
        f.apply_policy();
        Ok(f)
    }

    pub fn from_spectrum(
        grid: &Grid2D,
        nt: usize,
        lt: f64,
        f: impl Fn(f64, f64, f64) -> Complex64,
    ) -> Result<Self> {
        let mut out = Self::zeros(grid, nt, lt)?;
        out.coeffs = out.collect(|xi, mu, tau, _| f(xi, mu, tau));
        out.apply_policy();
        Ok(out)
    }

    /// Forward transform of samples laid out as `[(ix*Ny + iy)*Nt + it]`.
    pub fn from_physical(grid: &Grid2D, nt: usize, lt: f64, samples: &[Complex64]) -> Result<Self> {
        let mut f = Self::zeros(grid, nt, lt)?;
        if samples.len() != f.coeffs.len() {
            return Err(KpError::GridMismatch(format!(
                "expected {} samples, got {}",
                f.coeffs.len(),
                samples.len()
            )));
        }
        f.coeffs = samples.to_vec();
        f.forward_in_place();
        f.apply_policy();
        Ok(f)
    }

    /// Build from spatial coefficients sampled at `t_k`, one [`Field2D`] per slice.
    pub fn from_time_slices(slices: &[Field2D], lt: f64) -> Result<Self> {
        let first = slices
            .first()
            .ok_or_else(|| KpError::InvalidGrid("no time slices".into()))?;
        let grid = first.grid().clone();
        let nt = slices.len();
        let mut f = Self::zeros(&grid, nt, lt)?;
        for (k, s) in slices.iter().enumerate() {
            first.check_same_grid(s)?;
            for (p, c) in s.coeffs().iter().enumerate() {
                f.coeffs[p * nt + k] = *c;
            }
        }
        f.time_forward();
        f.apply_policy();
        Ok(f)
    }

    /// Spatial coefficients at each time sample.
    pub fn time_slices(&self) -> Vec<Field2D> {
        let mut g = self.clone();
        g.time_inverse();
        let nt = self.nt;
        (0..nt)
            .map(|k| {
                let c = (0..self.grid.len()).map(|p| g.coeffs[p * nt + k]).collect();
                Field2D::from_raw(&self.grid, c)
            })
            .collect()
    }

    pub fn to_physical(&self) -> Vec<Complex64> {
        let mut g = self.clone();
        g.signs();
        fft_all(&mut g.coeffs, &self.shape(), true);
        let norm = 1.0 / (self.grid.lx() * self.grid.ly() * self.lt);
        g.coeffs.iter_mut().for_each(|v| *v *= norm);
        g.coeffs
    }

    fn shape(&self) -> [usize; 3] {
        [self.grid.nx(), self.grid.ny(), self.nt]
    }

    fn signs(&mut self) {
        let (ny, nt) = (self.grid.ny(), self.nt);
        for (p, c) in self.coeffs.iter_mut().enumerate() {
            let (i, j, k) = (p / (ny * nt), (p / nt) % ny, p % nt);
            *c *= parity_sign(i) * parity_sign(j) * parity_sign(k);
        }
    }

    fn forward_in_place(&mut self) {
        let shape = self.shape();
        fft_all(&mut self.coeffs, &shape, false);
        self.signs();
        let h = self.grid.cell_area() * self.dt();
        self.coeffs.iter_mut().for_each(|v| *v *= h);
    }

    fn time_forward(&mut self) {
        let shape = self.shape();
        fft_axis(&mut self.coeffs, &shape, 2, false);
        let dt = self.dt();
        let nt = self.nt;
        for (p, c) in self.coeffs.iter_mut().enumerate() {
            *c *= parity_sign(p % nt) * dt;
        }
    }

    fn time_inverse(&mut self) {
        let (nt, lt) = (self.nt, self.lt);
        for (p, c) in self.coeffs.iter_mut().enumerate() {
            *c *= parity_sign(p % nt) / lt;
        }
        let shape = self.shape();
        fft_axis(&mut self.coeffs, &shape, 2, true);
    }

    fn apply_policy(&mut self) {
        let n = self.grid.ny() * self.nt;
        self.coeffs[..n].iter_mut().for_each(|c| *c = ZERO);
    }

    fn collect(&self, f: impl Fn(f64, f64, f64, Complex64) -> Complex64) -> Vec<Complex64> {
        let g = &self.grid;
        let mut out = Vec::with_capacity(self.coeffs.len());
        for i in 0..g.nx() {
            let xi = g.xi(i);
            for j in 0..g.ny() {
                let mu = g.mu(j);
                let base = (i * g.ny() + j) * self.nt;
                for k in 0..self.nt {
                    out.push(f(xi, mu, self.taus[k], self.coeffs[base + k]));
                }
            }
        }
        out
    }

    /// Pointwise multiplier in `(ξ, μ, τ)`; the zero-mode policy is re-applied.
    pub fn map(&self, f: impl Fn(f64, f64, f64, Complex64) -> Complex64) -> Self {
        let mut out = self.clone();
        out.coeffs = self.collect(f);
        out.apply_policy();
        out
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }
    pub fn nt(&self) -> usize {
        self.nt
    }
    pub fn lt(&self) -> f64 {
        self.lt
    }
    pub fn dt(&self) -> f64 {
        self.lt / self.nt as f64
    }
    pub fn dtau(&self) -> f64 {
        2.0 * PI / self.lt
    }
    #[inline]
    pub fn t(&self, k: usize) -> f64 {
        -0.5 * self.lt + k as f64 * self.dt()
    }
    #[inline]
    pub fn tau(&self, k: usize) -> f64 {
        self.taus[k]
    }
    pub fn tau_table(&self) -> &[f64] {
        &self.taus
    }
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }
    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.grid.ny() + j) * self.nt + k
    }
    #[inline]
    pub fn coeff(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.coeffs[self.index(i, j, k)]
    }
    /// Plancherel weight `1/(Lx Ly Lt)` of one frequency cell.
    pub fn freq_weight(&self) -> f64 {
        self.grid.freq_weight() / self.lt
    }

    pub fn l2_norm(&self) -> f64 {
        (self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.freq_weight()).sqrt()
    }

    pub fn scaled(&self, a: Complex64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= a);
        out
    }

    pub fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid || self.nt != other.nt || self.lt != other.lt {
            return Err(KpError::GridMismatch(
                "space-time fields live on different grids".into(),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        out.coeffs
            .iter_mut()
            .zip(&other.coeffs)
            .for_each(|(a, b)| *a += b);
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    /// Multiply by a coordinate along one axis (`1` = y, `2` = t), i.e. apply
    /// `i∂_μ` or `i∂_τ` to the coefficients with spectral accuracy.
    fn mul_coordinate(&self, axis: usize) -> Self {
        let shape = self.shape();
        let n = shape[axis];
        let len = if axis == 1 { self.grid.ly() } else { self.lt };
        let h = len / n as f64;
        let stride: usize = shape[axis + 1..].iter().product();
        let mut out = self.clone();
        let pos = |p: usize| (p / stride) % n;
        for (p, c) in out.coeffs.iter_mut().enumerate() {
            *c *= parity_sign(pos(p));
        }
        fft_axis(&mut out.coeffs, &shape, axis, true);
        for (p, c) in out.coeffs.iter_mut().enumerate() {
            let q = pos(p);
            *c *= (-0.5 * len + q as f64 * h) / n as f64;
        }
        fft_axis(&mut out.coeffs, &shape, axis, false);
        for (p, c) in out.coeffs.iter_mut().enumerate() {
            *c *= parity_sign(pos(p));
        }
        out
    }

    /// `t·f`.
    pub fn mul_t(&self) -> Self {
        self.mul_coordinate(2)
    }

    /// `y·f`.
    pub fn mul_y(&self) -> Self {
        self.mul_coordinate(1)
    }

    /// Same coefficients embedded in a box with `factor` times as many modes per axis.
    fn padded(&self, factor: usize) -> Result<Self> {
        let g2 = self.grid.refined(factor)?;
        let nt2 = self.nt * factor;
        let mut out = Self::zeros(&g2, nt2, self.lt)?;
        let g = &self.grid;
        for i in 0..g.nx() {
            let i2 = remap(i, g.nx(), g2.nx());
            for j in 0..g.ny() {
                let j2 = remap(j, g.ny(), g2.ny());
                for k in 0..self.nt {
                    let k2 = remap(k, self.nt, nt2);
                    let p = out.index(i2, j2, k2);
                    out.coeffs[p] = self.coeff(i, j, k);
                }
            }
        }
        Ok(out)
    }

    fn truncated_to(&self, like: &Self) -> Self {
        let mut out = like.clone();
        let g = &like.grid;
        for i in 0..g.nx() {
            let i2 = remap(i, g.nx(), self.grid.nx());
            for j in 0..g.ny() {
                let j2 = remap(j, g.ny(), self.grid.ny());
                for k in 0..like.nt {
                    let k2 = remap(k, like.nt, self.nt);
                    let p = out.index(i, j, k);
                    out.coeffs[p] = self.coeff(i2, j2, k2);
                }
            }
        }
        out
    }

    /// Coefficients of the pointwise product `f·g`, computed on a grid with
    /// twice the modes per axis so that no aliasing enters the retained modes.
    /// The `ξ = 0` column of the product is kept.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let a = self.padded(2)?.to_physical();
        let b = other.padded(2)?.to_physical();
        let prod: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        let mut big = Self::zeros(&self.grid.refined(2)?, 2 * self.nt, self.lt)?;
        big.coeffs = prod;
        big.forward_in_place();
        Ok(big.truncated_to(self))
    }

    /// `∂x f`.
    pub fn dx(&self) -> Self {
        self.map(|xi, _, _, c| c * Complex64::new(0.0, xi))
    }
}

fn remap(i: usize, n: usize, n2: usize) -> usize {
    if i < n / 2 {
        i
    } else {
        n2 - (n - i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid2D {
        Grid2D::new(8.0 * PI, 8.0 * PI, 32, 32).unwrap()
    }

    fn bump(x: f64, y: f64, t: f64) -> f64 {
        x * (-(x * x + 0.5 * y * y + t * t)).exp()
    }

    fn sampled(g: &Grid2D, nt: usize, lt: f64, f: impl Fn(f64, f64, f64) -> f64) -> Vec<Complex64> {
        let dt = lt / nt as f64;
        let mut s = Vec::new();
        for ix in 0..g.nx() {
            for iy in 0..g.ny() {
                for it in 0..nt {
                    s.push(Complex64::new(f(g.x(ix), g.y(iy), -0.5 * lt + it as f64 * dt), 0.0));
                }
            }
        }
        s
    }

    #[test]
    fn round_trip_and_parseval() {
        let g = grid();
        let s = sampled(&g, 32, 12.0, bump);
        let f = FieldST::from_physical(&g, 32, 12.0, &s).unwrap();
        let back = f.to_physical();
        let err = s.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
        let phys: f64 = s.iter().map(|c| c.norm_sqr()).sum::<f64>() * g.cell_area() * 12.0 / 32.0;
        assert!((f.l2_norm() - phys.sqrt()).abs() / phys.sqrt() < 1e-12);
    }

    #[test]
    fn slices_agree_with_full_transform() {
        let g = grid();
        let s = sampled(&g, 16, 8.0, bump);
        let f = FieldST::from_physical(&g, 16, 8.0, &s).unwrap();
        let slices = f.time_slices();
        let k = 5;
        let t = f.t(k);
        let direct = Field2D::from_real_fn(&g, |x, y| bump(x, y, t));
        let d = direct.sub(&slices[k]).unwrap().l2_norm();
        assert!(d < 1e-12 * direct.l2_norm());
        let again = FieldST::from_time_slices(&slices, 8.0).unwrap();
        let e = again.sub(&f).unwrap().l2_norm();
        assert!(e < 1e-12 * f.l2_norm());
    }

    #[test]
    fn coordinate_multiplication() {
        let g = grid();
        let (nt, lt) = (16, 10.0);
        let f = FieldST::from_physical(&g, nt, lt, &sampled(&g, nt, lt, bump)).unwrap();
        let ty = FieldST::from_physical(&g, nt, lt, &sampled(&g, nt, lt, |x, y, t| t * y * bump(x, y, t)))
            .unwrap();
        let d = f.mul_t().mul_y().sub(&ty).unwrap().l2_norm();
        assert!(d < 1e-12 * ty.l2_norm(), "{d}");
    }

    #[test]
    fn product_is_alias_free() {
        let g = Grid2D::new(2.0 * PI, 2.0 * PI, 8, 8).unwrap();
        let (nt, lt) = (8, 2.0 * PI);
        // cos(3x)·cos(3x) = (1 + cos 6x)/2; 6 is not representable on 8 points
        // and must vanish rather than fold back onto ±2.
        let f = FieldST::from_physical(&g, nt, lt, &sampled(&g, nt, lt, |x, _, _| (3.0 * x).cos())).unwrap();
        let p = f.product(&f).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                for k in 0..8 {
                    let c = p.coeff(i, j, k);
                    if i == 0 && j == 0 && k == 0 {
                        assert!((c.re - 0.5 * (2.0 * PI).powi(3)).abs() < 1e-9);
                    } else {
                        assert!(c.norm() < 1e-9, "{i} {j} {k} {c}");
                    }
                }
            }
        }
    }
}
