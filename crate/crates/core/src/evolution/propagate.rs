//! Linear group `S(t)` and the pseudo-spectral nonlinearity.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::field::Field2D;
use crate::grid::{signed_index, Grid2D};
use crate::symbol::DispersionParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Dealias {
    #[default]
    TwoThirds,
    None,
}

/// `ω` on the grid in FFT order; zero on the `ξ = 0` column.
pub fn omega_table(grid: &Grid2D, params: &DispersionParams) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.len());
    for i in 0..grid.nx() {
        let xi = grid.xi(i);
        for j in 0..grid.ny() {
            out.push(if xi == 0.0 { 0.0 } else { params.omega(xi, grid.mu(j)) });
        }
    }
    out
}

/// `e^{itω}` on the grid.
pub fn propagator(grid: &Grid2D, params: &DispersionParams, t: f64) -> Vec<Complex64> {
    omega_table(grid, params)
        .into_iter()
        .map(|w| Complex64::from_polar(1.0, t * w))
        .collect()
}

/// `S(t)u₀`: every coefficient multiplied by `e^{itω(ξ,μ)}`.
pub fn linear_propagate(u0: &Field2D, t: f64, params: &DispersionParams) -> Field2D {
    if t == 0.0 {
        return u0.clone();
    }
    let e = propagator(u0.grid(), params, t);
    let c = u0.coeffs().iter().zip(&e).map(|(a, b)| a * b).collect();
    Field2D::from_coeffs(u0.grid(), c).expect("same grid")
}

/// Largest retained `|k|` under the two-thirds rule on an `n`-point axis.
pub fn dealias_cutoff(n: usize) -> i64 {
    (n as i64 - 1) / 3
}

fn truncate(c: &mut [Complex64], grid: &Grid2D) {
    let (kx, ky) = (dealias_cutoff(grid.nx()), dealias_cutoff(grid.ny()));
    let ny = grid.ny();
    for i in 0..grid.nx() {
        let xi_out = signed_index(i, grid.nx()).abs() > kx;
        for j in 0..ny {
            if xi_out || signed_index(j, ny).abs() > ky {
                c[i * ny + j] = Complex64::new(0.0, 0.0);
            }
        }
    }
}

/// `β ∂x(u²)`: square in physical space, differentiate in coefficient space.
///
/// With [`Dealias::TwoThirds`] the input is truncated to `|k| ≤ (N-1)/3` per
/// axis before squaring and the product is truncated again, which removes all
/// aliasing from the quadratic term.
pub fn nonlinear_term(u: &Field2D, beta: f64, dealias: Dealias) -> Field2D {
    let g = u.grid();
    let mut c = u.coeffs().to_vec();
    if dealias == Dealias::TwoThirds {
        truncate(&mut c, g);
    }
    let phys = Field2D::from_raw(g, c).to_physical();
    let sq: Vec<Complex64> = phys.iter().map(|v| v * v).collect();
    let mut p = Field2D::from_physical_raw(g, sq).into_coeffs();
    if dealias == Dealias::TwoThirds {
        truncate(&mut p, g);
    }
    for i in 0..g.nx() {
        let f = Complex64::new(0.0, beta * g.xi(i));
        for v in &mut p[i * g.ny()..(i + 1) * g.ny()] {
            *v *= f;
        }
    }
    Field2D::from_coeffs(g, p).expect("same grid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::fft_index;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn group_property() {
        let p = DispersionParams::kp1();
        let g = Grid2D::new(4.0 * PI, 4.0 * PI, 16, 16).unwrap();
        let u = Field2D::from_real_fn(&g, |x, y| x * (-(x * x + y * y)).exp());
        assert_eq!(linear_propagate(&u, 0.0, &p), u);
        let back = linear_propagate(&linear_propagate(&u, 1.7, &p), -1.7, &p);
        assert!(back.sub(&u).unwrap().l2_norm() < 1e-14 * u.l2_norm());
        let a = linear_propagate(&linear_propagate(&u, 0.3, &p), 0.4, &p);
        let b = linear_propagate(&u, 0.7, &p);
        assert!(a.sub(&b).unwrap().l2_norm() < 1e-13 * u.l2_norm());
    }

    #[test]
    fn cosine_squared() {
        let g = Grid2D::new(2.0 * PI, 2.0 * PI, 16, 16).unwrap();
        let u = Field2D::from_real_fn(&g, |x, _| x.cos());
        let n = nonlinear_term(&u, 1.0, Dealias::TwoThirds).to_real();
        for ix in 0..16 {
            for iy in 0..16 {
                let x = g.x(ix);
                assert!((n[ix * 16 + iy] + (2.0 * x).sin()).abs() < 1e-13);
            }
        }
        assert_eq!(nonlinear_term(&Field2D::zeros(&g), 1.0, Dealias::TwoThirds).l2_norm(), 0.0);
    }

    #[test]
    fn matches_convolution_sum() {
        let g = Grid2D::new(3.0, 5.0, 16, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        // band |k| ≤ 5, symmetrized so u is real
        let mut c = vec![Complex64::new(0.0, 0.0); g.len()];
        for kx in 1..=5i64 {
            for ky in -5..=5i64 {
                let v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let i = fft_index(kx, 16).unwrap();
                let j = fft_index(ky, 16).unwrap();
                c[g.index(i, j)] = v;
                let i2 = fft_index(-kx, 16).unwrap();
                let j2 = fft_index(-ky, 16).unwrap();
                c[g.index(i2, j2)] = v.conj();
            }
        }
        let u = Field2D::from_coeffs(&g, c.clone()).unwrap();
        let fast = nonlinear_term(&u, -1.0, Dealias::TwoThirds);
        let mut scale = 0.0_f64;
        let mut worst = 0.0_f64;
        for kx in -5..=5i64 {
            for ky in -5..=5i64 {
                let mut acc = Complex64::new(0.0, 0.0);
                for ax in -5..=5i64 {
                    for ay in -5..=5i64 {
                        let (bx, by) = (kx - ax, ky - ay);
                        if bx.abs() > 5 || by.abs() > 5 {
                            continue;
                        }
                        let a = c[g.index(fft_index(ax, 16).unwrap(), fft_index(ay, 16).unwrap())];
                        let b = c[g.index(fft_index(bx, 16).unwrap(), fft_index(by, 16).unwrap())];
                        acc += a * b;
                    }
                }
                let xi = 2.0 * PI * kx as f64 / 3.0;
                let exact = -acc * Complex64::new(0.0, xi) / (g.lx() * g.ly());
                let got = fast.coeff(fft_index(kx, 16).unwrap(), fft_index(ky, 16).unwrap());
                scale = scale.max(exact.norm());
                worst = worst.max((exact - got).norm());
            }
        }
        assert!(worst < 1e-10 * scale, "{worst} {scale}");
    }
}
