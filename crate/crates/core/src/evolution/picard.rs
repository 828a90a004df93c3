//! Fixed-point iteration for the truncated Duhamel formulation
//! `v = ψ(t)S(t)u₀ − ψ(t)∫₀ᵗ S(t−t′) β∂x(v²)(t′) dt′`.
//!
//! Time is sampled with step `Δ = (1/2)/slices` on the box `[-2, 2)`, which
//! holds the support of `ψ` with room to spare. The `t′` integral is a
//! cumulative trapezoid of `S(−t′)∂x(v²)` starting at `t = 0`.

use num_complex::Complex64;

use super::propagate::{nonlinear_term, omega_table};
use super::stepper::SolverConfig;
use crate::cutoff::psi;
use crate::error::{KpError, Result};
use crate::field::Field2D;
use crate::norms::{besov_norm, weighted_besov_norm, xsb_norm};
use crate::spacetime::FieldST;
use crate::symbol::DispersionParams;

/// Length of the time box.
pub const TIME_BOX: f64 = 4.0;

#[derive(Debug, Clone)]
pub struct PicardOutcome {
    /// Iterates `v₀, v₁, …`; only the last is kept unless
    /// `picard_keep_iterates` is set.
    pub iterates: Vec<FieldST>,
    pub converged: bool,
    pub iterations: usize,
    /// `‖v_{n+1} − v_n‖_{X_{1-ε₀,1/2}}`.
    pub diffs: Vec<f64>,
    /// Successive ratios `diffs[n+1] / diffs[n]`.
    pub ratios: Vec<f64>,
    /// `‖v − L(v)‖_{X_{1-ε₀,1/2}}` at the returned solution.
    pub residual: f64,
    step: f64,
}

impl PicardOutcome {
    pub fn solution(&self) -> &FieldST {
        self.iterates.last().expect("at least one iterate")
    }

    /// Spatial field at time `t`, which must be a multiple of the slice step.
    pub fn at(&self, t: f64) -> Result<Field2D> {
        let sol = self.solution();
        let q = t / self.step;
        if (q - q.round()).abs() > 1e-9 || t.abs() >= 1.0 {
            return Err(KpError::InvalidParameter(format!(
                "t = {t} is not a stored time slice"
            )));
        }
        let k = (sol.nt() as i64 / 2 + q.round() as i64) as usize;
        Ok(sol.time_slices().swap_remove(k))
    }
}

/// `‖u₀‖_{B^{2,1}_{1-ε₀}} + ‖u₀‖_{P^{2,1}_{-ε₀}}`, the size the solver requires to be small.
pub fn data_norm(u0: &Field2D, eps0: f64) -> f64 {
    besov_norm(u0, 1.0 - eps0).total + weighted_besov_norm(u0, -eps0).total
}

struct Operator<'a> {
    u0: &'a Field2D,
    params: &'a DispersionParams,
    cfg: &'a SolverConfig,
    omega: Vec<f64>,
    nt: usize,
    delta: f64,
}

impl<'a> Operator<'a> {
    fn t(&self, k: usize) -> f64 {
        (k as f64 - (self.nt / 2) as f64) * self.delta
    }

    fn active(&self, k: usize) -> bool {
        psi(self.t(k)) > 0.0
    }

    fn rotate(&self, c: &[Complex64], t: f64) -> Vec<Complex64> {
        c.iter()
            .zip(&self.omega)
            .map(|(a, w)| a * Complex64::from_polar(1.0, t * w))
            .collect()
    }

    /// `L(v)` on the time samples; `None` stands for `v = 0`.
    fn apply(&self, v: Option<&[Field2D]>) -> Vec<Field2D> {
        let g = self.u0.grid();
        let n = g.len();
        let zero = vec![Complex64::new(0.0, 0.0); n];
        let k0 = self.nt / 2;
        let g_at = |k: usize| -> Vec<Complex64> {
            match v {
                Some(v) if self.active(k) => {
                    let nl = nonlinear_term(&v[k], self.params.beta, self.cfg.dealias);
                    self.rotate(nl.coeffs(), -self.t(k))
                }
                _ => zero.clone(),
            }
        };
        let mut integral = vec![zero.clone(); self.nt];
        if v.is_some() {
            let mut prev = g_at(k0);
            for k in k0 + 1..self.nt {
                let cur = g_at(k);
                let acc: Vec<Complex64> = (0..n)
                    .map(|p| integral[k - 1][p] + 0.5 * self.delta * (prev[p] + cur[p]))
                    .collect();
                integral[k] = acc;
                prev = cur;
            }
            let mut prev = g_at(k0);
            for k in (0..k0).rev() {
                let cur = g_at(k);
                let acc: Vec<Complex64> = (0..n)
                    .map(|p| integral[k + 1][p] - 0.5 * self.delta * (prev[p] + cur[p]))
                    .collect();
                integral[k] = acc;
                prev = cur;
            }
        }
        (0..self.nt)
            .map(|k| {
                let t = self.t(k);
                let cut = psi(t);
                if cut == 0.0 {
                    return Field2D::zeros(g);
                }
                let d: Vec<Complex64> = self.u0.coeffs().iter().zip(&integral[k]).map(|(a, b)| a - b).collect();
                let c = self.rotate(&d, t).into_iter().map(|x| x * cut).collect();
                Field2D::from_coeffs(g, c).expect("same grid")
            })
            .collect()
    }
}

fn to_st(slices: &[Field2D]) -> Result<FieldST> {
    FieldST::from_time_slices(slices, TIME_BOX)
}

fn diff_norm(a: &[Field2D], b: &[Field2D], s: f64, params: &DispersionParams) -> Result<f64> {
    let d: Vec<Field2D> = a.iter().zip(b).map(|(x, y)| x.sub(y)).collect::<Result<_>>()?;
    Ok(xsb_norm(&to_st(&d)?, s, 0.5, params).total)
}

/// Iterate `v_{n+1} = L(v_n)` from `v₀ = ψ(t)S(t)u₀` until the
/// `X_{1-ε₀,1/2}` difference drops below `picard_tol`.
pub fn picard_solve(u0: &Field2D, cfg: &SolverConfig, params: &DispersionParams) -> Result<PicardOutcome> {
    cfg.validate()?;
    params.validate()?;
    let size = data_norm(u0, cfg.picard_eps0);
    if size > cfg.picard_smallness {
        return Err(KpError::DataTooLarge {
            norm: size,
            threshold: cfg.picard_smallness,
        });
    }
    let delta = 0.5 / cfg.picard_slices as f64;
    let op = Operator {
        u0,
        params,
        cfg,
        omega: omega_table(u0.grid(), params),
        nt: (TIME_BOX / delta).round() as usize,
        delta,
    };
    let s = 1.0 - cfg.picard_eps0;
    let mut v = op.apply(None);
    let mut iterates = vec![to_st(&v)?];
    let mut diffs = Vec::new();
    let mut ratios = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.picard_max_iters {
        let next = op.apply(Some(&v));
        let d = diff_norm(&next, &v, s, params)?;
        if let Some(prev) = diffs.last() {
            ratios.push(if *prev > 0.0 { d / prev } else { 0.0 });
        }
        diffs.push(d);
        iterations += 1;
        if !d.is_finite() {
            return Err(KpError::BlowUp {
                t: 0.0,
                detail: format!("Picard iterate {iterations} is not finite"),
            });
        }
        v = next;
        if !cfg.picard_keep_iterates {
            iterates.clear();
        }
        iterates.push(to_st(&v)?);
        if d < cfg.picard_tol {
            converged = true;
            break;
        }
    }
    let residual = diff_norm(&op.apply(Some(&v)), &v, s, params)?;
    Ok(PicardOutcome {
        iterates,
        converged,
        iterations,
        diffs,
        ratios,
        residual,
        step: delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2D;
    use std::f64::consts::PI;

    fn cfg() -> SolverConfig {
        SolverConfig {
            picard_slices: 16,
            ..SolverConfig::picard()
        }
    }

    #[test]
    fn zero_data_converges_immediately() {
        let g = Grid2D::new(4.0 * PI, 4.0 * PI, 16, 16).unwrap();
        let out = picard_solve(&Field2D::zeros(&g), &cfg(), &DispersionParams::kp1()).unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations, 1);
        assert_eq!(out.solution().l2_norm(), 0.0);
    }

    #[test]
    fn large_data_is_rejected() {
        let g = Grid2D::new(4.0 * PI, 4.0 * PI, 16, 16).unwrap();
        let u = Field2D::from_real_fn(&g, |x, y| 10.0 * x * (-(x * x + y * y)).exp());
        let e = picard_solve(&u, &cfg(), &DispersionParams::kp1()).unwrap_err();
        assert!(matches!(e, KpError::DataTooLarge { .. }));
    }

    #[test]
    fn linear_part_is_cut_off_propagator() {
        let g = Grid2D::new(4.0 * PI, 4.0 * PI, 16, 16).unwrap();
        let u = Field2D::from_real_fn(&g, |x, y| 1e-4 * x * (-(x * x + y * y)).exp());
        let p = DispersionParams::kp1();
        let c = SolverConfig {
            picard_max_iters: 1,
            picard_keep_iterates: true,
            ..cfg()
        };
        let out = picard_solve(&u, &c, &p).unwrap();
        let v0 = out.iterates[0].time_slices();
        let k = v0.len() / 2 + 24; // t = 0.75
        let expect = crate::evolution::linear_propagate(&u, 0.75, &p).scaled(psi(0.75));
        assert!(v0[k].sub(&expect).unwrap().l2_norm() < 1e-13 * u.l2_norm());
    }
}
