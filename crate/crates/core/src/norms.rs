//! Function-space norms: `B^{2,1}_s`, `P^{2,1}_r`, `E∩P`, `X_{s,b}`,
//! `Y_{s,r,b}` and `Z_{s,b}`, each with a per-shell breakdown.
//!
//! Frequency integrals use the Plancherel measure of the grid, so a point
//! mass of unit `L²` norm at `(ξ, μ)` has `‖·‖_{B^{2,1}_s} = w(ξ,μ)^s`.

use std::fmt;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{KpError, Result};
use crate::field::Field2D;
use crate::report::f17;
use crate::shells::{frequency_shell, in_chi1, modulation_shell, CHI_THRESHOLD};
use crate::spacetime::FieldST;
use crate::symbol::{weight_w, DispersionParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpaceId {
    B21s,
    P21r,
    EP,
    Xsb,
    Ysrb,
    Zsb,
}

impl fmt::Display for SpaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::B21s => "B21s",
            Self::P21r => "P21r",
            Self::EP => "EP",
            Self::Xsb => "Xsb",
            Self::Ysrb => "Ysrb",
            Self::Zsb => "Zsb",
        };
        f.write_str(s)
    }
}

/// One term of the outer `ℓ¹` sum.
///
/// `axis` is `xi`/`mu` for the `χ₁`/`χ₂` branches of a spatial norm and
/// `tau-xi`/`tau-mu` for space-time norms, where `j` is the modulation shell.
/// `Y` and `Z` reports prefix the axis with the component (`t:`, `y:`, `x:`).
#[derive(Debug, Clone, PartialEq)]
pub struct ShellEntry {
    pub axis: String,
    pub j: Option<u32>,
    pub m: u32,
    pub contribution: f64,
}

impl ShellEntry {
    pub fn label(&self) -> String {
        match self.j {
            Some(j) => format!("{j}:{}", self.m),
            None => self.m.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormReport {
    pub space: SpaceId,
    pub s: Option<f64>,
    pub r: Option<f64>,
    pub b: Option<f64>,
    pub total: f64,
    pub shells: Vec<ShellEntry>,
    /// Largest shell index the grid can populate.
    pub truncation: u32,
}

pub const CSV_HEADER: &str = "space,param_s,param_r,param_b,axis,shell,contribution,total";

fn opt(v: Option<f64>) -> String {
    v.map(f17).unwrap_or_default()
}

impl NormReport {
    /// `ℓ²` over shells of the same contributions (never larger than `total`).
    pub fn l2_over_shells(&self) -> f64 {
        self.shells
            .iter()
            .map(|e| e.contribution * e.contribution)
            .sum::<f64>()
            .sqrt()
    }

    pub fn write_csv_rows(&self, mut w: impl Write) -> Result<()> {
        for e in &self.shells {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                self.space,
                opt(self.s),
                opt(self.r),
                opt(self.b),
                e.axis,
                e.label(),
                f17(e.contribution),
                f17(self.total)
            )?;
        }
        Ok(())
    }

    fn from_parts(space: SpaceId, s: Option<f64>, r: Option<f64>, b: Option<f64>, shells: Vec<ShellEntry>, truncation: u32) -> Self {
        let total = shells.iter().map(|e| e.contribution).sum();
        Self {
            space,
            s,
            r,
            b,
            total,
            shells,
            truncation,
        }
    }

    fn combine(space: SpaceId, s: Option<f64>, r: Option<f64>, b: Option<f64>, parts: &[(&str, &NormReport)]) -> Self {
        let mut shells = Vec::new();
        let mut truncation = 0;
        for (tag, rep) in parts {
            truncation = truncation.max(rep.truncation);
            for e in &rep.shells {
                shells.push(ShellEntry {
                    axis: format!("{tag}:{}", e.axis),
                    ..e.clone()
                });
            }
        }
        Self::from_parts(space, s, r, b, shells, truncation)
    }
}

pub fn write_csv(reports: &[NormReport], mut w: impl Write) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in reports {
        r.write_csv_rows(&mut w)?;
    }
    Ok(())
}

const MAX_SHELL: usize = 64;

/// Squared shell masses `[branch][j][m]`, branch 0 = `χ₁` (shell in ξ),
/// branch 1 = `χ₂` (shell in μ).
#[derive(Clone)]
struct Acc {
    nj: usize,
    v: Vec<f64>,
}

impl Acc {
    fn new(nj: usize) -> Self {
        Self {
            nj,
            v: vec![0.0; 2 * nj * MAX_SHELL],
        }
    }
    #[inline]
    fn add(&mut self, branch: usize, j: u32, m: u32, x: f64) {
        let j = (j as usize).min(self.nj - 1);
        let m = (m as usize).min(MAX_SHELL - 1);
        self.v[(branch * self.nj + j) * MAX_SHELL + m] += x;
    }
    fn entries(&self, b: f64, axes: [&str; 2], with_j: bool) -> Vec<ShellEntry> {
        let mut out = Vec::new();
        for branch in 0..2 {
            for j in 0..self.nj {
                for m in 0..MAX_SHELL {
                    let a = self.v[(branch * self.nj + j) * MAX_SHELL + m];
                    if a > 0.0 {
                        out.push(ShellEntry {
                            axis: axes[branch].to_string(),
                            j: with_j.then_some(j as u32),
                            m: m as u32,
                            contribution: 2f64.powf(j as f64 * b) * a.sqrt(),
                        });
                    }
                }
            }
        }
        out
    }
}

/// `X_{s,b}`-type shell sums for frequency samples that do not live on a
/// periodic grid. Callers add already weighted squared masses.
#[derive(Clone)]
pub struct ShellAccumulator {
    acc: Acc,
    c: f64,
}

impl Default for ShellAccumulator {
    fn default() -> Self {
        Self::new()
    }
}

impl ShellAccumulator {
    pub fn new() -> Self {
        Self {
            acc: Acc::new(MAX_SHELL),
            c: CHI_THRESHOLD,
        }
    }

    /// Add `mass` at spatial frequency `(ξ, μ)` and modulation shell `j`.
    pub fn add(&mut self, xi: f64, mu: f64, j: u32, mass: f64) {
        let (branch, m) = spatial_shell(xi, mu, self.c);
        self.acc.add(branch, j, m, mass);
    }

    pub fn merge(&mut self, other: &Self) {
        for (a, b) in self.acc.v.iter_mut().zip(&other.acc.v) {
            *a += b;
        }
    }

    /// `Σ 2^{jb} (mass)^{1/2}` over all `(branch, j, m)` shells.
    pub fn total(&self, b: f64) -> f64 {
        self.acc.entries(b, ["", ""], true).iter().map(|e| e.contribution).sum()
    }
}

/// Shell of `(ξ, μ)` in the `B^{2,1}` decomposition: `(branch, index)`.
#[inline]
fn spatial_shell(xi: f64, mu: f64, c: f64) -> (usize, u32) {
    if in_chi1(xi, mu, c) {
        (0, frequency_shell(xi))
    } else {
        (1, frequency_shell(mu))
    }
}

fn spatial_truncation(f: &Field2D) -> u32 {
    let g = f.grid();
    let a = g.xi_table().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let b = g.mu_table().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    frequency_shell(a).max(frequency_shell(b))
}

fn spatial_report(f: &Field2D, s: f64, c: f64, space: SpaceId) -> NormReport {
    let g = f.grid();
    let fw = g.freq_weight();
    let mut acc = Acc::new(1);
    for i in 0..g.nx() {
        let xi = g.xi(i);
        if xi == 0.0 {
            continue;
        }
        for j in 0..g.ny() {
            let mu = g.mu(j);
            let a = f.coeff(i, j).norm_sqr();
            if a == 0.0 {
                continue;
            }
            let (branch, m) = spatial_shell(xi, mu, c);
            acc.add(branch, 0, m, weight_w(xi, mu).powf(2.0 * s) * a * fw);
        }
    }
    let shells = acc.entries(0.0, ["xi", "mu"], false);
    let (sp, rp) = match space {
        SpaceId::P21r => (None, Some(s)),
        _ => (Some(s), None),
    };
    NormReport::from_parts(space, sp, rp, None, shells, spatial_truncation(f))
}

/// `‖f‖_{B^{2,1}_s}` with the default `χ₁/χ₂` threshold.
pub fn besov_norm(f: &Field2D, s: f64) -> NormReport {
    besov_norm_with(f, s, CHI_THRESHOLD)
}

/// `‖f‖_{B^{2,1}_s}` with `χ₁ = {|ξ| ≥ c|μ|/|ξ|}`.
pub fn besov_norm_with(f: &Field2D, s: f64, c: f64) -> NormReport {
    spatial_report(f, s, c, SpaceId::B21s)
}

/// How `∂_μ f̂` is formed on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum MuDerivative {
    /// Transform of `-i y f(x, y)`; exact under the transform convention.
    #[default]
    Spectral,
    /// Second-order centered difference in `μ`, zero beyond the table ends.
    FiniteDifference,
}

pub fn mu_derivative(f: &Field2D, route: MuDerivative) -> Field2D {
    match route {
        MuDerivative::Spectral => {
            let y = f.mul_y();
            y.map(|_, _, c| c * Complex64::new(0.0, -1.0))
        }
        MuDerivative::FiniteDifference => {
            let g = f.grid();
            let ny = g.ny();
            let h = 2.0 * g.dmu();
            let mut out = vec![Complex64::new(0.0, 0.0); g.len()];
            for i in 0..g.nx() {
                for j in 0..ny {
                    let up = if j + 1 == ny / 2 { None } else { Some((j + 1) % ny) };
                    let dn = if j == ny / 2 { None } else { Some((j + ny - 1) % ny) };
                    let a = up.map(|q| f.coeff(i, q)).unwrap_or_default();
                    let b = dn.map(|q| f.coeff(i, q)).unwrap_or_default();
                    out[i * ny + j] = (a - b) / h;
                }
            }
            Field2D::from_coeffs(g, out).expect("same grid")
        }
    }
}

/// `‖f‖_{P^{2,1}_r}`: the `B^{2,1}_r` structure applied to `∂_μ f̂`.
pub fn weighted_besov_norm(f: &Field2D, r: f64) -> NormReport {
    weighted_besov_norm_with(f, r, CHI_THRESHOLD, MuDerivative::Spectral)
}

pub fn weighted_besov_norm_with(f: &Field2D, r: f64, c: f64, route: MuDerivative) -> NormReport {
    spatial_report(&mu_derivative(f, route), r, c, SpaceId::P21r)
}

/// `(‖f‖ + ‖∂x f‖ + ‖∂x⁻¹∂y f‖, ‖y f‖)`.
pub fn energy_space_norm(f: &Field2D) -> (f64, f64) {
    let e = f.l2_norm() + f.dx().l2_norm() + f.dx_inv_dy().l2_norm();
    (e, f.mul_y().l2_norm())
}

/// `E∩P` norm `e + p` as a report with one entry per component.
pub fn energy_space_report(f: &Field2D) -> NormReport {
    let parts = [
        ("l2", f.l2_norm()),
        ("dx", f.dx().l2_norm()),
        ("dxinv_dy", f.dx_inv_dy().l2_norm()),
        ("y", f.mul_y().l2_norm()),
    ];
    let shells = parts
        .iter()
        .map(|(a, v)| ShellEntry {
            axis: a.to_string(),
            j: None,
            m: 0,
            contribution: *v,
        })
        .collect();
    NormReport::from_parts(SpaceId::EP, None, None, None, shells, 0)
}

/// `‖f‖_{B^{2,1}_s} + ‖f‖_{P^{2,1}_{s-1}}`, the initial-data norm paired with `Z_s`.
pub fn bp_norm(f: &Field2D, s: f64) -> f64 {
    besov_norm(f, s).total + weighted_besov_norm(f, s - 1.0).total
}

/// `‖F‖_{X_{s,b}}`.
pub fn xsb_norm(f: &FieldST, s: f64, b: f64, params: &DispersionParams) -> NormReport {
    xsb_norm_with(f, s, b, params, CHI_THRESHOLD)
}

pub fn xsb_norm_with(f: &FieldST, s: f64, b: f64, params: &DispersionParams, c: f64) -> NormReport {
    let g = f.grid();
    let nt = f.nt();
    let fw = f.freq_weight();
    let tau_max = f.tau_table().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut acc = Acc::new(MAX_SHELL);
    let mut jmax = 0;
    for i in 0..g.nx() {
        let xi = g.xi(i);
        if xi == 0.0 {
            continue;
        }
        for j in 0..g.ny() {
            let mu = g.mu(j);
            let (branch, m) = spatial_shell(xi, mu, c);
            let w2s = weight_w(xi, mu).powf(2.0 * s);
            let om = params.omega(xi, mu);
            jmax = jmax.max(modulation_shell(om.abs() + tau_max));
            let base = f.index(i, j, 0);
            for k in 0..nt {
                let a = f.coeffs()[base + k].norm_sqr();
                if a == 0.0 {
                    continue;
                }
                let js = modulation_shell(f.tau(k) - om);
                acc.add(branch, js, m, w2s * a * fw);
            }
        }
    }
    let shells = acc.entries(b, ["tau-xi", "tau-mu"], true);
    let trunc = spatial_truncation(&Field2D::zeros(g)).max(jmax);
    NormReport::from_parts(SpaceId::Xsb, Some(s), None, Some(b), shells, trunc)
}

/// `‖t F‖_{X_{s,b}} + ‖y F‖_{X_{r,b}}`.
pub fn ysrb_norm(f: &FieldST, s: f64, r: f64, b: f64, params: &DispersionParams) -> NormReport {
    let t = xsb_norm(&f.mul_t(), s, b, params);
    let y = xsb_norm(&f.mul_y(), r, b, params);
    NormReport::combine(SpaceId::Ysrb, Some(s), Some(r), Some(b), &[("t", &t), ("y", &y)])
}

/// `‖F‖_{Z_{s,b}} = ‖F‖_{X_{s,b}} + ‖F‖_{Y_{s,s-1,b}}`.
pub fn zsb_norm(f: &FieldST, s: f64, b: f64, params: &DispersionParams) -> NormReport {
    let x = xsb_norm(f, s, b, params);
    let y = ysrb_norm(f, s, s - 1.0, b, params);
    NormReport::combine(SpaceId::Zsb, Some(s), Some(s - 1.0), Some(b), &[("x", &x), ("y", &y)])
}

fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}

/// `(‖f‖_{E∩P} / ‖f‖_{B^{2,1}_1 ∩ P^{2,1}_0}, ‖f‖_{B^{2,1}_{1-ε} ∩ P^{2,1}_{-ε}} / ‖f‖_{E∩P})`.
pub fn embedding_check(f: &Field2D, eps: f64) -> Result<(f64, f64)> {
    if !(eps > 0.0) {
        return Err(KpError::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let (e, p) = energy_space_norm(f);
    let ep = e + p;
    let up = ratio(ep, bp_norm(f, 1.0));
    let down = ratio(bp_norm(f, 1.0 - eps), ep);
    Ok((up, down))
}

/// `‖f‖_{B^{2,1}_s}` with threshold `C` over the same norm with threshold 1/2.
pub fn constant_robustness_check(f: &Field2D, s: f64, c: f64) -> Result<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(KpError::InvalidParameter(format!("C must be positive, got {c}")));
    }
    Ok(ratio(besov_norm_with(f, s, c).total, besov_norm(f, s).total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2D;
    use std::f64::consts::PI;

    fn point(g: &Grid2D, i: usize, j: usize) -> Field2D {
        // unit L² mass: |c|² / (Lx Ly) = 1
        let mut c = vec![Complex64::new(0.0, 0.0); g.len()];
        c[g.index(i, j)] = Complex64::new((g.lx() * g.ly()).sqrt(), 0.0);
        Field2D::from_coeffs(g, c).unwrap()
    }

    #[test]
    fn point_mass_values() {
        let g = Grid2D::new(2.0 * PI, 2.0 * PI, 8, 8).unwrap();
        let f = point(&g, 1, 0);
        let rep = besov_norm(&f, 1.5);
        assert!((rep.total - 2f64.powf(1.5)).abs() < 1e-12);
        assert_eq!(rep.shells.len(), 1);
        assert_eq!(rep.shells[0].m, 0);
        let (e, _) = energy_space_norm(&point(&g, 2, 3));
        assert!((e - weight_w(2.0, 3.0)).abs() < 1e-12);
        assert_eq!(besov_norm(&Field2D::zeros(&g), 1.0).total, 0.0);
        assert_eq!(embedding_check(&Field2D::zeros(&g), 0.1).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn on_surface_and_off_surface_points() {
        let params = DispersionParams::kp1();
        let g = Grid2D::new(2.0 * PI, 2.0 * PI, 8, 8).unwrap();
        // ω(1, 0) = 1 = τ on a time box of length 2π
        let (nt, lt) = (16, 2.0 * PI);
        let vol = (g.lx() * g.ly() * lt).sqrt();
        let mk = |k: usize| {
            let mut c = vec![Complex64::new(0.0, 0.0); g.len() * nt];
            c[(g.index(1, 0)) * nt + k] = Complex64::new(vol, 0.0);
            FieldST::from_coeffs(&g, nt, lt, c).unwrap()
        };
        let on = xsb_norm(&mk(1), 1.0, 0.5, &params);
        assert!((on.total - 2.0).abs() < 1e-12);
        // τ = 6 gives modulation 5, shell j = 3
        let off = xsb_norm(&mk(6), 1.0, 0.5, &params);
        assert_eq!(off.shells[0].j, Some(3));
        assert!((off.total - 2f64.powf(1.5) * 2.0).abs() < 1e-12);
    }

    #[test]
    fn mu_derivative_routes_agree_on_gaussian() {
        let g = Grid2D::new(16.0 * PI, 16.0 * PI, 64, 256).unwrap();
        let f = Field2D::from_real_fn(&g, |x, y| x * (-(x * x + (y - 0.5) * (y - 0.5))).exp());
        let a = mu_derivative(&f, MuDerivative::Spectral);
        let b = mu_derivative(&f, MuDerivative::FiniteDifference);
        let d = a.sub(&b).unwrap().l2_norm() / a.l2_norm();
        // second order in dμ = 1/8
        assert!(d < 0.05, "{d}");
    }

    #[test]
    fn csv_rows() {
        let g = Grid2D::new(2.0 * PI, 2.0 * PI, 8, 8).unwrap();
        let mut out = Vec::new();
        write_csv(&[besov_norm(&point(&g, 1, 0), 1.0)], &mut out).unwrap();
        let s = String::from_utf8(out).unwrap();
        let lines: Vec<_> = s.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert!(lines[1].starts_with("B21s,1.0000000000000000e0,,,xi,0,"));
    }
}
