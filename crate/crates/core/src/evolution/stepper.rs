//! Integrating-factor RK4 time stepping and conserved quantities.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::propagate::{nonlinear_term, omega_table, Dealias};
use crate::error::{KpError, Result};
use crate::field::Field2D;
use crate::grid::Grid2D;
use crate::report::f17;
use crate::symbol::DispersionParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Stepper {
    #[default]
    IntegratingFactorRK4,
    PicardIteration,
}

fn default_max_iters() -> usize {
    40
}
fn default_tol() -> f64 {
    1e-12
}
fn default_slices() -> usize {
    64
}
fn default_eps0() -> f64 {
    1.0 / 32.0
}
fn default_smallness() -> f64 {
    1e-2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    #[serde(default)]
    pub dealias: Dealias,
    #[serde(default)]
    pub stepper: Stepper,
    #[serde(default = "default_max_iters")]
    pub picard_max_iters: usize,
    #[serde(default = "default_tol")]
    pub picard_tol: f64,
    /// Duhamel quadrature slices on `[0, 1/2]`.
    #[serde(default = "default_slices")]
    pub picard_slices: usize,
    /// `ε₀` of the `X_{1-ε₀,1/2}` convergence norm.
    #[serde(default = "default_eps0")]
    pub picard_eps0: f64,
    /// Bound on `‖u₀‖_{B^{2,1}_{1-ε₀} ∩ P^{2,1}_{-ε₀}}` accepted by the Picard solver.
    #[serde(default = "default_smallness")]
    pub picard_smallness: f64,
    /// Keep every iterate instead of only the last one.
    #[serde(default)]
    pub picard_keep_iterates: bool,
}

impl SolverConfig {
    pub fn rk4(dt: f64, t_final: f64) -> Self {
        Self {
            dt,
            t_final,
            dealias: Dealias::TwoThirds,
            stepper: Stepper::IntegratingFactorRK4,
            picard_max_iters: default_max_iters(),
            picard_tol: default_tol(),
            picard_slices: default_slices(),
            picard_eps0: default_eps0(),
            picard_smallness: default_smallness(),
            picard_keep_iterates: false,
        }
    }

    pub fn picard() -> Self {
        Self {
            stepper: Stepper::PicardIteration,
            ..Self::rk4(1.0 / 128.0, 0.5)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(KpError::InvalidParameter(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return bad(format!("T must be positive, got {}", self.t_final));
        }
        if !(self.picard_tol > 0.0) {
            return bad(format!("picard_tol must be positive, got {}", self.picard_tol));
        }
        if self.picard_slices == 0 || self.picard_max_iters == 0 {
            return bad("picard_slices and picard_max_iters must be positive".into());
        }
        if !(self.picard_eps0 >= 0.0 && self.picard_eps0 < 1.0) {
            return bad(format!("picard_eps0 must lie in [0, 1), got {}", self.picard_eps0));
        }
        Ok(())
    }
}

/// Integrating-factor RK4 for `v = e^{-itω}û` with a fixed step `h`.
pub struct IfRk4 {
    grid: Grid2D,
    beta: f64,
    dealias: Dealias,
    h: f64,
    e_half: Vec<Complex64>,
    e_full: Vec<Complex64>,
}

impl IfRk4 {
    pub fn new(grid: &Grid2D, params: &DispersionParams, dealias: Dealias, h: f64) -> Self {
        let om = omega_table(grid, params);
        Self {
            grid: grid.clone(),
            beta: params.beta,
            dealias,
            h,
            e_half: om.iter().map(|w| Complex64::from_polar(1.0, 0.5 * h * w)).collect(),
            e_full: om.iter().map(|w| Complex64::from_polar(1.0, h * w)).collect(),
        }
    }

    fn rhs(&self, c: Vec<Complex64>) -> Vec<Complex64> {
        let u = Field2D::from_raw(&self.grid, c);
        nonlinear_term(&u, -self.beta, self.dealias).into_coeffs()
    }

    pub fn advance(&self, u: &Field2D) -> Field2D {
        let h = self.h;
        let (eh, ef) = (&self.e_half, &self.e_full);
        let c = u.coeffs();
        let n = c.len();
        let a = self.rhs(c.to_vec());
        let b = self.rhs((0..n).map(|p| eh[p] * (c[p] + 0.5 * h * a[p])).collect());
        let cc = self.rhs((0..n).map(|p| eh[p] * c[p] + 0.5 * h * b[p]).collect());
        let d = self.rhs((0..n).map(|p| ef[p] * c[p] + h * eh[p] * cc[p]).collect());
        let out = (0..n)
            .map(|p| {
                ef[p] * c[p] + h / 6.0 * (ef[p] * a[p] + 2.0 * eh[p] * (b[p] + cc[p]) + d[p])
            })
            .collect();
        Field2D::from_coeffs(&self.grid, out).expect("same grid")
    }
}

fn check_finite(u: &Field2D, t: f64) -> Result<()> {
    if let Some(p) = u.coeffs().iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(KpError::BlowUp {
            t,
            detail: format!("non-finite coefficient at flat index {p}"),
        });
    }
    Ok(())
}

/// One step of size `cfg.dt`.
pub fn step(u: &Field2D, cfg: &SolverConfig, params: &DispersionParams) -> Result<Field2D> {
    cfg.validate()?;
    if cfg.stepper != Stepper::IntegratingFactorRK4 {
        return Err(KpError::InvalidParameter(
            "step requires the IntegratingFactorRK4 stepper".into(),
        ));
    }
    let out = IfRk4::new(u.grid(), params, cfg.dealias, cfg.dt).advance(u);
    check_finite(&out, cfg.dt)?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservedDiagnostics {
    pub t: f64,
    pub l2: f64,
    pub hamiltonian: f64,
    pub energy_norm: f64,
}

/// `H(u) = ∫ u_x² − γ(∂x⁻¹∂y u)² − (2β/3) u³`, the invariant of the flow.
pub fn hamiltonian(u: &Field2D, params: &DispersionParams) -> f64 {
    let ux = u.dx().l2_norm();
    let uy = u.dx_inv_dy().l2_norm();
    let cubic: f64 = u.to_real().iter().map(|v| v * v * v).sum::<f64>() * u.grid().cell_area();
    ux * ux - params.gamma * uy * uy - 2.0 * params.beta / 3.0 * cubic
}

pub fn conserved_diagnostics(u: &Field2D, params: &DispersionParams) -> ConservedDiagnostics {
    diagnostics_at(u, params, 0.0)
}

pub fn diagnostics_at(u: &Field2D, params: &DispersionParams, t: f64) -> ConservedDiagnostics {
    let l2 = u.l2_norm();
    ConservedDiagnostics {
        t,
        l2,
        hamiltonian: hamiltonian(u, params),
        energy_norm: l2 + u.dx().l2_norm() + u.dx_inv_dy().l2_norm(),
    }
}

pub const DIAGNOSTICS_HEADER: &str = "t,l2,hamiltonian,energy_norm";

pub fn write_diagnostics_csv(rows: &[ConservedDiagnostics], mut w: impl Write) -> Result<()> {
    writeln!(w, "{DIAGNOSTICS_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            f17(r.t),
            f17(r.l2),
            f17(r.hamiltonian),
            f17(r.energy_norm)
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub final_field: Field2D,
    pub diagnostics: Vec<ConservedDiagnostics>,
}

/// Advance to `cfg.T` with IF-RK4, recording diagnostics every `every` steps
/// (and at both ends). A final partial step lands exactly on `T`.
pub fn evolve(
    u0: &Field2D,
    cfg: &SolverConfig,
    params: &DispersionParams,
    every: usize,
) -> Result<Trajectory> {
    cfg.validate()?;
    params.validate()?;
    let full = (cfg.t_final / cfg.dt * (1.0 + 1e-12)).floor() as usize;
    let rest = cfg.t_final - full as f64 * cfg.dt;
    let stepper = IfRk4::new(u0.grid(), params, cfg.dealias, cfg.dt);
    let every = every.max(1);
    let mut diags = vec![diagnostics_at(u0, params, 0.0)];
    let mut u = u0.clone();
    for n in 1..=full {
        u = stepper.advance(&u);
        let t = n as f64 * cfg.dt;
        check_finite(&u, t)?;
        if n % every == 0 || (n == full && rest <= 0.0) {
            diags.push(diagnostics_at(&u, params, t));
        }
    }
    if rest > 0.0 {
        u = IfRk4::new(u0.grid(), params, cfg.dealias, rest).advance(&u);
        check_finite(&u, cfg.t_final)?;
        diags.push(diagnostics_at(&u, params, cfg.t_final));
    }
    Ok(Trajectory {
        final_field: u,
        diagnostics: diags,
    })
}
