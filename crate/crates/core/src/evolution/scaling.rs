//! Scaling symmetry `u_λ(x, y, t) = λ² u(λx, λ²y, λ³t)`.

use num_complex::Complex64;

use crate::error::{KpError, Result};
use crate::field::Field2D;
use crate::grid::{fft_index, signed_index, Grid2D};
use crate::norms::{besov_norm, weighted_besov_norm};

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(KpError::InvalidParameter(format!(
            "lambda must be positive and finite, got {lambda}"
        )));
    }
    Ok(())
}

/// Box `(Lx/λ, Ly/λ²)` with the same mode counts.
pub fn scaled_grid(grid: &Grid2D, lambda: f64) -> Result<Grid2D> {
    check_lambda(lambda)?;
    Grid2D::new(grid.lx() / lambda, grid.ly() / (lambda * lambda), grid.nx(), grid.ny())
}

/// `û_λ(ξ, μ) = λ⁻¹ û₀(ξ/λ, μ/λ²)` on the box `(Lx/λ, Ly/λ²)`.
///
/// Index `(i, j)` of the new box carries wavenumber `(λξ_i, λ²μ_j)`, so the
/// rescaling is the same coefficient array times `1/λ`.
pub fn scaling_transform(u0: &Field2D, lambda: f64) -> Result<Field2D> {
    let g = scaled_grid(u0.grid(), lambda)?;
    Ok(u0.scaled(1.0 / lambda).regrid(&g))
}

fn ratio_of(a: f64, b: f64, axis: &str) -> Result<usize> {
    let r = a / b;
    let k = r.round();
    if k < 1.0 || (r - k).abs() > 1e-9 * k {
        return Err(KpError::Incompatible(format!(
            "{axis}: target wavenumbers map to non-lattice source points (ratio {r})"
        )));
    }
    Ok(k as usize)
}

/// Rescale onto an arbitrary `target` grid without interpolation.
///
/// Target wavenumber `ξ` needs `û₀` at `ξ/λ`, which must be a source lattice
/// point: `Lx_src / (λ Lx_tgt)` and `Ly_src / (λ² Ly_tgt)` must be positive
/// integers. Modes outside the source table are zero.
pub fn scaling_transform_onto(u0: &Field2D, lambda: f64, target: &Grid2D) -> Result<Field2D> {
    check_lambda(lambda)?;
    let src = u0.grid();
    let rx = ratio_of(src.lx(), lambda * target.lx(), "x")?;
    let ry = ratio_of(src.ly(), lambda * lambda * target.ly(), "y")?;
    let mut c = vec![Complex64::new(0.0, 0.0); target.len()];
    for i in 0..target.nx() {
        let Some(si) = fft_index(signed_index(i, target.nx()) * rx as i64, src.nx()) else {
            continue;
        };
        for j in 0..target.ny() {
            let Some(sj) = fft_index(signed_index(j, target.ny()) * ry as i64, src.ny()) else {
                continue;
            };
            c[target.index(i, j)] = u0.coeff(si, sj) / lambda;
        }
    }
    Field2D::from_coeffs(target, c)
}

/// `s₁ = −1/2 − 2 s₂`, the first critical index given the second.
pub fn critical_indices(s2: f64) -> f64 {
    -0.5 - 2.0 * s2
}

/// Exponent `1/2 − 2ε` obtained by changing variables in both norms:
/// `‖u_λ‖_{B^{2,1}_s} ~ λ^{1/2}` and `‖u_λ‖_{P^{2,1}_{s-1}} ~ λ^{-3/2}` as `λ → 0`.
pub fn rescaled_product_exponent(eps: f64) -> f64 {
    0.5 - 2.0 * eps
}

/// `(‖u_λ‖_{B^{2,1}_s}^{1-ε} ‖u_λ‖_{P^{2,1}_{s-1}}^{ε}, λ^{1-4ε})`.
pub fn badrescal_check(u0: &Field2D, lambda: f64, s: f64, eps: f64) -> Result<(f64, f64)> {
    check_lambda(lambda)?;
    if lambda > 1.0 {
        return Err(KpError::InvalidParameter(format!("lambda must be ≤ 1, got {lambda}")));
    }
    if s < 1.0 {
        return Err(KpError::InvalidParameter(format!("s must be ≥ 1, got {s}")));
    }
    let u = scaling_transform(u0, lambda)?;
    let b = besov_norm(&u, s).total;
    let p = weighted_besov_norm(&u, s - 1.0).total;
    Ok((b.powf(1.0 - eps) * p.powf(eps), lambda.powf(1.0 - 4.0 * eps)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::loglog_fit;
    use std::f64::consts::PI;

    fn gauss(g: &Grid2D) -> Field2D {
        Field2D::from_real_fn(g, |x, y| -2.0 * x * (-(x * x + y * y)).exp())
    }

    #[test]
    fn energy_factors() {
        let g = Grid2D::new(8.0 * PI, 8.0 * PI, 64, 64).unwrap();
        let u = gauss(&g);
        assert_eq!(scaling_transform(&u, 1.0).unwrap(), u);
        let v = scaling_transform(&u, 2.0).unwrap();
        let r = |a: f64, b: f64| a / b;
        assert!((r(v.l2_norm(), u.l2_norm()) - 2f64.sqrt()).abs() < 1e-12);
        assert!((r(v.dx().l2_norm(), u.dx().l2_norm()) - 2f64.powf(1.5)).abs() < 1e-12);
        assert!((r(v.dx_inv_dy().l2_norm(), u.dx_inv_dy().l2_norm()) - 2f64.powf(1.5)).abs() < 1e-12);
    }

    #[test]
    fn onto_target_grid() {
        let g = Grid2D::new(8.0 * PI, 16.0 * PI, 32, 32).unwrap();
        let u = gauss(&g);
        let direct = scaling_transform(&u, 2.0).unwrap();
        let same = scaling_transform_onto(&u, 2.0, direct.grid()).unwrap();
        assert_eq!(same, direct);
        // λ = 2 onto the source box itself needs û₀ at half-integer indices
        assert!(matches!(
            scaling_transform_onto(&u, 2.0, &g),
            Err(KpError::Incompatible(_))
        ));
        // λ = 1/2 onto the source box subsamples the source lattice
        let half = scaling_transform_onto(&u, 0.5, &g).unwrap();
        assert_eq!(half.coeff(1, 1), u.coeff(2, 4) * 2.0);
        assert!(scaling_transform(&u, -1.0).is_err());
    }

    #[test]
    fn critical_relation() {
        assert_eq!(critical_indices(0.0), -0.5);
        assert_eq!(critical_indices(-0.25), 0.0);
        assert_eq!(critical_indices(-0.5), 0.5);
    }

    #[test]
    fn rescaled_product_slope() {
        let g = Grid2D::new(8.0 * PI, 8.0 * PI, 64, 64).unwrap();
        let u = gauss(&g);
        let (l1, b1) = badrescal_check(&u, 1.0, 1.0, 0.3).unwrap();
        assert_eq!(b1, 1.0);
        let expect = besov_norm(&u, 1.0).total.powf(0.7) * weighted_besov_norm(&u, 0.0).total.powf(0.3);
        assert!((l1 - expect).abs() < 1e-12 * expect);
        assert_eq!(badrescal_check(&u, 0.5, 1.0, 0.25).unwrap().1, 1.0);
        // asymptotic regime: w → 1 only like 1 + O(λ), so fit at small λ
        let lambdas: Vec<f64> = (8..12).map(|k| 0.5f64.powi(k)).collect();
        for eps in [0.0, 0.1, 0.25] {
            let lhs: Vec<f64> = lambdas.iter().map(|&l| badrescal_check(&u, l, 1.0, eps).unwrap().0).collect();
            let fit = loglog_fit(&lambdas, &lhs).unwrap();
            let target = rescaled_product_exponent(eps);
            assert!((fit.slope - target).abs() < 0.02, "eps {eps}: slope {} vs {target}", fit.slope);
        }
    }
}
