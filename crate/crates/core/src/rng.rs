//! Seeded random inputs for the estimate battery.
//!
//! Every generator draws from `ChaCha8Rng::seed_from_u64(seed)`, and random
//! coefficients are indexed by signed wavenumber, so refining a grid that
//! keeps the box fixed reproduces the same continuous function.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cutoff::psi;
use crate::error::Result;
use crate::field::Field2D;
use crate::grid::{fft_index, Grid2D};
use crate::spacetime::FieldST;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn unit(r: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
}

/// Real trigonometric polynomial with `1 ≤ |kx| ≤ band`, `|ky| ≤ band`.
pub fn band_limited_field(grid: &Grid2D, band: i64, seed: u64) -> Field2D {
    let mut r = rng(seed);
    let mut c = vec![Complex64::new(0.0, 0.0); grid.len()];
    let (nx, ny) = (grid.nx(), grid.ny());
    for kx in 1..=band {
        for ky in -band..=band {
            let v = unit(&mut r);
            if let (Some(i), Some(j), Some(i2), Some(j2)) = (
                fft_index(kx, nx),
                fft_index(ky, ny),
                fft_index(-kx, nx),
                fft_index(-ky, ny),
            ) {
                c[grid.index(i, j)] = v;
                c[grid.index(i2, j2)] = v.conj();
            }
        }
    }
    Field2D::from_coeffs(grid, c).expect("grid-sized buffer")
}

/// Real space-time trigonometric polynomial, spatial band as in
/// [`band_limited_field`] and `|kτ| ≤ tau_band`.
pub fn band_limited_st(grid: &Grid2D, nt: usize, lt: f64, band: i64, tau_band: i64, seed: u64) -> Result<FieldST> {
    let mut r = rng(seed);
    let mut c = vec![Complex64::new(0.0, 0.0); grid.len() * nt];
    let (nx, ny) = (grid.nx(), grid.ny());
    let idx = |i: usize, j: usize, k: usize| (i * ny + j) * nt + k;
    for kx in 1..=band {
        for ky in -band..=band {
            for kt in -tau_band..=tau_band {
                let v = unit(&mut r);
                if let (Some(i), Some(j), Some(k), Some(i2), Some(j2), Some(k2)) = (
                    fft_index(kx, nx),
                    fft_index(ky, ny),
                    fft_index(kt, nt),
                    fft_index(-kx, nx),
                    fft_index(-ky, ny),
                    fft_index(-kt, nt),
                ) {
                    c[idx(i, j, k)] = v;
                    c[idx(i2, j2, k2)] = v.conj();
                }
            }
        }
    }
    FieldST::from_coeffs(grid, nt, lt, c)
}

/// Localized real wave packets `ψ(t) Σ a_q e^{-|x-x_q|²/σ²} cos(k_q·x + ν_q t + φ_q)`
/// with `σ = 2`, centers within 1/2 of the origin, `1 ≤ |k_{q,x}| ≤ 3/2`,
/// `|k_{q,y}| ≤ 1/2` and `|ν_q| ≤ 4`.
///
/// Keeping the carrier away from `ξ = 0` bounds the `y` group velocity
/// `2|μ/ξ|`, so `S(t)` does not carry the packet across the periodic box.
pub fn packet_st(grid: &Grid2D, nt: usize, lt: f64, seed: u64) -> Result<FieldST> {
    let mut r = rng(seed);
    let packets: Vec<[f64; 7]> = (0..3)
        .map(|_| {
            [
                r.gen_range(0.2..1.0),
                r.gen_range(-0.5..0.5),
                r.gen_range(-0.5..0.5),
                r.gen_range(1.0..1.5) * if r.gen::<bool>() { 1.0 } else { -1.0 },
                r.gen_range(-0.5..0.5),
                r.gen_range(-4.0..4.0),
                r.gen_range(0.0..2.0 * PI),
            ]
        })
        .collect();
    let dt = lt / nt as f64;
    let mut s = Vec::with_capacity(grid.len() * nt);
    for ix in 0..grid.nx() {
        let x = grid.x(ix);
        for iy in 0..grid.ny() {
            let y = grid.y(iy);
            for it in 0..nt {
                let t = -0.5 * lt + it as f64 * dt;
                let cut = psi(t);
                let mut v = 0.0;
                if cut > 0.0 {
                    for p in &packets {
                        let env = (-((x - p[1]).powi(2) + (y - p[2]).powi(2)) / 4.0).exp();
                        v += p[0] * env * (p[3] * x + p[4] * y + p[5] * t + p[6]).cos();
                    }
                }
                s.push(Complex64::new(cut * v, 0.0));
            }
        }
    }
    FieldST::from_physical(grid, nt, lt, &s)
}

/// Smooth decaying profile on a uniform `μ` grid: a sum of three random
/// Gaussians with widths in `[1, 2]` and centers in `[-2, 2]`.
pub fn gaussian_mixture_1d(n: usize, len: f64, seed: u64) -> Vec<Complex64> {
    let mut r = rng(seed);
    let parts: Vec<[f64; 4]> = (0..3)
        .map(|_| {
            [
                r.gen_range(-1.0..1.0),
                r.gen_range(-1.0..1.0),
                r.gen_range(-2.0..2.0),
                r.gen_range(1.0..2.0),
            ]
        })
        .collect();
    let h = len / n as f64;
    (0..n)
        .map(|k| {
            let mu = -0.5 * len + k as f64 * h;
            parts
                .iter()
                .map(|p| Complex64::new(p[0], p[1]) * (-((mu - p[2]) / p[3]).powi(2)).exp())
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refinement_reproduces_the_same_function() {
        let g = Grid2D::new(4.0 * PI, 4.0 * PI, 16, 16).unwrap();
        let f = band_limited_field(&g, 3, 11);
        let h = band_limited_field(&g.refined(2).unwrap(), 3, 11);
        assert!((f.l2_norm() - h.l2_norm()).abs() < 1e-13 * f.l2_norm());
        assert!(f.conjugate_symmetry_defect() < 1e-15);
        assert_eq!(band_limited_field(&g, 3, 11), f);
        let a = band_limited_st(&g, 16, 8.0, 2, 3, 5).unwrap();
        let b = band_limited_st(&g.refined(2).unwrap(), 16, 8.0, 2, 3, 5).unwrap();
        assert!((a.l2_norm() - b.l2_norm()).abs() < 1e-13 * a.l2_norm());
    }
}
