//! Empirical left/right sides of the linear, maximal-function, Sobolev and
//! bilinear inequalities, plus a seeded battery that records the ratios.
//!
//! Mixed norms use grid quadrature: `L^∞` over an axis is the max over grid
//! lines, `L^p` is a discrete power sum with the cell measure, and time
//! integrals over `[0, T]` use the trapezoid rule. Frequency-side norms use
//! the Plancherel measure.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::cutoff::psi;
use crate::error::{KpError, Result};
use crate::evolution::{linear_propagate, omega_table};
use crate::field::Field2D;
use crate::grid::{fft_index, signed_index, Grid2D};
use crate::norms::{besov_norm, weighted_besov_norm, xsb_norm, ysrb_norm};
use crate::report::f17;
use crate::rng::{band_limited_field, band_limited_st, gaussian_mixture_1d, packet_st, rng};
use crate::shells::{modulation_shell, project, Band, RegionMask};
use crate::spacetime::FieldST;
use crate::symbol::{
    bilinear_resonance, gradient_bound_kp1_valid, gradient_lower_bound, resonance_by_difference,
    symbol_gradient_norm, weight_w, DispersionParams,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateId {
    Strichartz,
    FoliatedStrichartz,
    SmoothingPlusMinus,
    SmoothingZero,
    MaximalMuTau,
    MaximalXiTau,
    WeightedSobolev,
    LinearHomogeneous,
    LinearHomogeneousY,
    LinearInhomogeneous,
    LinearInhomogeneousY,
    CutoffStability,
    Bilinear,
    BilinearY,
    Resonance,
    GradientBound,
}

impl EstimateId {
    pub const ALL: [EstimateId; 16] = [
        Self::Strichartz,
        Self::FoliatedStrichartz,
        Self::SmoothingPlusMinus,
        Self::SmoothingZero,
        Self::MaximalMuTau,
        Self::MaximalXiTau,
        Self::WeightedSobolev,
        Self::LinearHomogeneous,
        Self::LinearHomogeneousY,
        Self::LinearInhomogeneous,
        Self::LinearInhomogeneousY,
        Self::CutoffStability,
        Self::Bilinear,
        Self::BilinearY,
        Self::Resonance,
        Self::GradientBound,
    ];

    /// Inequalities with a hidden constant, checked for bounded ratios.
    pub const INEQUALITIES: [EstimateId; 14] = [
        Self::Strichartz,
        Self::FoliatedStrichartz,
        Self::SmoothingPlusMinus,
        Self::SmoothingZero,
        Self::MaximalMuTau,
        Self::MaximalXiTau,
        Self::WeightedSobolev,
        Self::LinearHomogeneous,
        Self::LinearHomogeneousY,
        Self::LinearInhomogeneous,
        Self::LinearInhomogeneousY,
        Self::CutoffStability,
        Self::Bilinear,
        Self::BilinearY,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Strichartz => "strichartz",
            Self::FoliatedStrichartz => "foliated_strichartz",
            Self::SmoothingPlusMinus => "smoothing_plus_minus",
            Self::SmoothingZero => "smoothing_zero",
            Self::MaximalMuTau => "maximal_mu_tau",
            Self::MaximalXiTau => "maximal_xi_tau",
            Self::WeightedSobolev => "weighted_sobolev",
            Self::LinearHomogeneous => "linear_homogeneous",
            Self::LinearHomogeneousY => "linear_homogeneous_y",
            Self::LinearInhomogeneous => "linear_inhomogeneous",
            Self::LinearInhomogeneousY => "linear_inhomogeneous_y",
            Self::CutoffStability => "cutoff_stability",
            Self::Bilinear => "bilinear",
            Self::BilinearY => "bilinear_y",
            Self::Resonance => "resonance",
            Self::GradientBound => "gradient_bound",
        }
    }

    /// Exact identities and pointwise bounds rather than `≲` inequalities.
    pub fn is_exact(&self) -> bool {
        matches!(self, Self::Resonance | Self::GradientBound)
    }
}

impl fmt::Display for EstimateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimateId {
    type Err = KpError;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| KpError::InvalidParameter(format!("unknown estimate id '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateSample {
    pub estimate_id: EstimateId,
    pub seed: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub input_descriptor: String,
}

/// `lhs / rhs`, with `0/0 = 0`.
pub fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs == 0.0 {
        if lhs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        lhs / rhs
    }
}

impl EstimateSample {
    pub fn new(estimate_id: EstimateId, lhs: f64, rhs: f64) -> Self {
        Self {
            estimate_id,
            seed: 0,
            lhs,
            rhs,
            ratio: ratio(lhs, rhs),
            input_descriptor: String::new(),
        }
    }

    pub fn with_input(mut self, seed: u64, descriptor: impl Into<String>) -> Self {
        self.seed = seed;
        self.input_descriptor = descriptor.into();
        self
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(KpError::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

/// Trapezoid nodes and weights on `[0, T]` with `panels` panels.
fn trapezoid(t_final: f64, panels: usize) -> Vec<(f64, f64)> {
    let h = t_final / panels as f64;
    (0..=panels)
        .map(|k| {
            let w = if k == 0 || k == panels { 0.5 * h } else { h };
            (k as f64 * h, w)
        })
        .collect()
}

/// Default panel count for time integrals over `[0, T]`.
pub const TIME_PANELS: usize = 64;

/// `‖S(t)u₀‖_{L⁴([0,T], L⁴)}` against `‖u₀‖_{L²}`.
pub fn strichartz_check(u0: &Field2D, t_final: f64, params: &DispersionParams) -> Result<EstimateSample> {
    strichartz_check_with(u0, t_final, TIME_PANELS, params)
}

pub fn strichartz_check_with(
    u0: &Field2D,
    t_final: f64,
    panels: usize,
    params: &DispersionParams,
) -> Result<EstimateSample> {
    positive("T", t_final)?;
    let cell = u0.grid().cell_area();
    let mut acc = 0.0;
    for (t, w) in trapezoid(t_final, panels.max(1)) {
        let v = linear_propagate(u0, t, params).to_physical();
        acc += w * cell * v.iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>();
    }
    Ok(EstimateSample::new(EstimateId::Strichartz, acc.powf(0.25), u0.l2_norm()))
}

/// `‖(χ_j |F̂|)ˇ‖_{L⁴_{x,y,t}}` against `2^{j/2} ‖χ_j F̂‖_{L²}`, where
/// `χ_j` selects the modulation shell `j` of `τ − ω(ξ, μ)`.
pub fn foliated_strichartz_check(f: &FieldST, j: u32, params: &DispersionParams) -> Result<EstimateSample> {
    let g = f.grid();
    let nt = f.nt();
    let mut c = vec![Complex64::new(0.0, 0.0); f.coeffs().len()];
    let mut mass = 0.0;
    for (p, om) in omega_table(g, params).iter().enumerate() {
        for k in 0..nt {
            let q = p * nt + k;
            if modulation_shell(f.tau(k) - om) == j {
                let a = f.coeffs()[q].norm();
                c[q] = Complex64::new(a, 0.0);
                mass += a * a;
            }
        }
    }
    let h = FieldST::from_coeffs(g, nt, f.lt(), c)?;
    let cell = g.cell_area() * f.dt();
    let l4 = (cell * h.to_physical().iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>()).powf(0.25);
    let rhs = 2f64.powf(0.5 * j as f64) * (mass * f.freq_weight()).sqrt();
    Ok(EstimateSample::new(EstimateId::FoliatedStrichartz, l4, rhs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothingRegion {
    /// `‖∂x S(t)P±u₀‖_{L^∞_x L²_y L²_t}`.
    PlusMinus,
    /// `‖D_x^{1/2} S(t)P₀u₀‖_{L^∞_y L²_x L²_t}`.
    Zero,
}

/// Smoothing effect on the window `t ∈ [0, T]`.
///
/// On a periodic box the time integral cannot run over all of ℝ, so the
/// left side grows like `√T`; only ratios at a fixed window are comparable.
pub fn smoothing_check(
    u0: &Field2D,
    which: SmoothingRegion,
    t_final: f64,
    params: &DispersionParams,
) -> Result<EstimateSample> {
    positive("T", t_final)?;
    let band = Band::default();
    let (prepared, id) = match which {
        SmoothingRegion::PlusMinus => {
            let p = project(u0, RegionMask::Plus(band)).add(&project(u0, RegionMask::Minus(band)))?;
            (p.dx(), EstimateId::SmoothingPlusMinus)
        }
        SmoothingRegion::Zero => {
            let p = project(u0, RegionMask::Zero(band));
            (p.map(|xi, _, c| c * xi.abs().sqrt()), EstimateId::SmoothingZero)
        }
    };
    let g = u0.grid();
    let (nx, ny) = (g.nx(), g.ny());
    // accumulate Σ_t w_t |v|² per point, then reduce over the inner axis
    let mut acc = vec![0.0; g.len()];
    for (t, w) in trapezoid(t_final, TIME_PANELS) {
        let v = linear_propagate(&prepared, t, params).to_physical();
        for (a, z) in acc.iter_mut().zip(&v) {
            *a += w * z.norm_sqr();
        }
    }
    let lhs = match which {
        SmoothingRegion::PlusMinus => (0..nx)
            .map(|ix| (g.dy() * (0..ny).map(|iy| acc[ix * ny + iy]).sum::<f64>()).sqrt())
            .fold(0.0, f64::max),
        SmoothingRegion::Zero => (0..ny)
            .map(|iy| (g.dx() * (0..nx).map(|ix| acc[ix * ny + iy]).sum::<f64>()).sqrt())
            .fold(0.0, f64::max),
    };
    Ok(EstimateSample::new(id, lhs, u0.l2_norm()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiplierKind {
    /// `m(μ, τ)`; the left side is `L²_x L^p_{y,t}`.
    MuTau,
    /// `w(ξ, τ)`; the left side is `L²_y L^p_{x,t}`.
    XiTau,
}

/// Fourier multiplier in one spatial frequency and `τ`, stored as
/// `values[spatial_index * Nt + k]` in FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct Multiplier {
    pub kind: MultiplierKind,
    pub values: Vec<f64>,
}

impl Multiplier {
    pub fn from_fn(kind: MultiplierKind, like: &FieldST, f: impl Fn(f64, f64) -> f64) -> Self {
        let g = like.grid();
        let (n, freq): (usize, &[f64]) = match kind {
            MultiplierKind::MuTau => (g.ny(), g.mu_table()),
            MultiplierKind::XiTau => (g.nx(), g.xi_table()),
        };
        let values = (0..n)
            .flat_map(|a| (0..like.nt()).map(move |k| (a, k)))
            .map(|(a, k)| f(freq[a], like.tau(k)))
            .collect();
        Self { kind, values }
    }

    /// Uniform `[0, 1)` values on `|k| ≤ band`, `|kτ| ≤ tau_band`, indexed by
    /// signed wavenumber so that refinement keeps the same function.
    pub fn random(kind: MultiplierKind, like: &FieldST, band: i64, tau_band: i64, seed: u64) -> Self {
        let g = like.grid();
        let nt = like.nt();
        let n = match kind {
            MultiplierKind::MuTau => g.ny(),
            MultiplierKind::XiTau => g.nx(),
        };
        let mut r = rng(seed);
        let mut values = vec![0.0; n * nt];
        for a in -band..=band {
            for kt in -tau_band..=tau_band {
                let v: f64 = r.gen();
                if let (Some(i), Some(k)) = (fft_index(a, n), fft_index(kt, nt)) {
                    values[i * nt + k] = v;
                }
            }
        }
        Self { kind, values }
    }

    /// `‖m‖_{L^q}` with the Plancherel measure `dν dτ / (2π)²`; `q = ∞` allowed.
    pub fn norm(&self, like: &FieldST, q: f64) -> f64 {
        let g = like.grid();
        let len = match self.kind {
            MultiplierKind::MuTau => g.ly(),
            MultiplierKind::XiTau => g.lx(),
        };
        if q.is_infinite() {
            return self.values.iter().fold(0.0, |m, v| m.max(v.abs()));
        }
        let cell = 1.0 / (len * like.lt());
        (cell * self.values.iter().map(|v| v.abs().powf(q)).sum::<f64>()).powf(1.0 / q)
    }
}

/// Inner exponent `p ∈ {2, 4, ∞}` of the maximal-function family. The
/// multiplier is measured in `L^q` with `1/q = 1/2 − 1/p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaximalExponent {
    Two,
    Four,
    Infinity,
}

impl MaximalExponent {
    fn p(self) -> f64 {
        match self {
            Self::Two => 2.0,
            Self::Four => 4.0,
            Self::Infinity => f64::INFINITY,
        }
    }
    fn q(self) -> f64 {
        match self {
            Self::Two => f64::INFINITY,
            Self::Four => 4.0,
            Self::Infinity => 2.0,
        }
    }
}

/// `‖T_m f‖_{L²_x L^p_{y,t}}` (or `L²_y L^p_{x,t}`) against `‖m‖_{L^q} ‖f̂‖_{L²}`.
pub fn maximal_check(f: &FieldST, m: &Multiplier, p: MaximalExponent) -> Result<EstimateSample> {
    let g = f.grid();
    let (nx, ny, nt) = (g.nx(), g.ny(), f.nt());
    let expect = match m.kind {
        MultiplierKind::MuTau => ny * nt,
        MultiplierKind::XiTau => nx * nt,
    };
    if m.values.len() != expect {
        return Err(KpError::GridMismatch(format!(
            "multiplier has {} values, expected {expect}",
            m.values.len()
        )));
    }
    let c: Vec<Complex64> = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(q, v)| {
            let (i, j, k) = (q / (ny * nt), (q / nt) % ny, q % nt);
            let a = match m.kind {
                MultiplierKind::MuTau => j,
                MultiplierKind::XiTau => i,
            };
            v * m.values[a * nt + k]
        })
        .collect();
    let v = FieldST::from_coeffs(g, nt, f.lt(), c)?.to_physical();
    let (outer, inner, d_outer, d_inner) = match m.kind {
        MultiplierKind::MuTau => (nx, ny, g.dx(), g.dy()),
        MultiplierKind::XiTau => (ny, nx, g.dy(), g.dx()),
    };
    let at = |o: usize, n: usize, k: usize| match m.kind {
        MultiplierKind::MuTau => v[(o * ny + n) * nt + k].norm(),
        MultiplierKind::XiTau => v[(n * ny + o) * nt + k].norm(),
    };
    let pe = p.p();
    let mut sq = 0.0;
    for o in 0..outer {
        let inner_norm = if pe.is_infinite() {
            (0..inner)
                .flat_map(|n| (0..nt).map(move |k| (n, k)))
                .fold(0.0_f64, |acc, (n, k)| acc.max(at(o, n, k)))
        } else {
            let s: f64 = (0..inner)
                .flat_map(|n| (0..nt).map(move |k| (n, k)))
                .map(|(n, k)| at(o, n, k).powf(pe))
                .sum();
            (d_inner * f.dt() * s).powf(1.0 / pe)
        };
        sq += d_outer * inner_norm * inner_norm;
    }
    let id = match m.kind {
        MultiplierKind::MuTau => EstimateId::MaximalMuTau,
        MultiplierKind::XiTau => EstimateId::MaximalXiTau,
    };
    Ok(EstimateSample::new(id, sq.sqrt(), m.norm(f, p.q()) * f.l2_norm()))
}

/// Spectral derivative of periodic samples on a box of length `len`.
fn spectral_derivative(f: &[Complex64], len: f64) -> Vec<Complex64> {
    let n = f.len();
    let mut planner = FftPlanner::<f64>::new();
    let mut buf = f.to_vec();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let s = signed_index(k, n);
        *c *= if n % 2 == 0 && k == n / 2 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, 2.0 * std::f64::consts::PI * s as f64 / len)
        };
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.iter_mut().for_each(|c| *c /= n as f64);
    buf
}

/// `‖f‖_{L^p_μ}` against `‖w^{ε₀} f‖^{1−θ} ‖w^{−ε₀} f′‖^θ` with `θ = (p−2)/2p`,
/// for `f` sampled at `μ_k = −len/2 + k·len/n` and `w = w(ξ, μ)`.
pub fn weighted_sobolev_check(f: &[Complex64], len: f64, xi: f64, eps0: f64, p: f64) -> Result<EstimateSample> {
    positive("len", len)?;
    if !(p > 2.0) {
        return Err(KpError::InvalidParameter(format!("p must exceed 2, got {p}")));
    }
    if f.is_empty() {
        return Err(KpError::InvalidParameter("empty sample array".into()));
    }
    let n = f.len();
    let h = len / n as f64;
    let mu = |k: usize| -0.5 * len + k as f64 * h;
    let df = spectral_derivative(f, len);
    let lhs = if p.is_infinite() {
        f.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    } else {
        (h * f.iter().map(|z| z.norm().powf(p)).sum::<f64>()).powf(1.0 / p)
    };
    let mut a = 0.0;
    let mut b = 0.0;
    for k in 0..n {
        let w = weight_w(xi, mu(k));
        a += w.powf(2.0 * eps0) * f[k].norm_sqr();
        b += w.powf(-2.0 * eps0) * df[k].norm_sqr();
    }
    let theta = if p.is_infinite() { 0.5 } else { (p - 2.0) / (2.0 * p) };
    let rhs = (h * a).sqrt().powf(1.0 - theta) * (h * b).sqrt().powf(theta);
    Ok(EstimateSample::new(EstimateId::WeightedSobolev, lhs, rhs))
}

/// Time box used to represent `ψ(t)S(t)u₀` and Duhamel integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeBox {
    pub nt: usize,
    pub lt: f64,
}

impl Default for TimeBox {
    fn default() -> Self {
        Self { nt: 128, lt: 8.0 }
    }
}

fn check_time_box(nt: usize, lt: f64) -> Result<()> {
    if lt < 2.0 {
        return Err(KpError::InvalidParameter(format!(
            "time box length {lt} cannot hold the support |t| < 1 of the cutoff"
        )));
    }
    crate::grid::check_axis("t", nt, lt)
}

/// Space-time field of `ψ(t) S(t) u₀`, so that its transform is `ψ̂(τ − ω) û₀`.
pub fn cutoff_propagated(u0: &Field2D, tb: TimeBox, params: &DispersionParams) -> Result<FieldST> {
    check_time_box(tb.nt, tb.lt)?;
    let dt = tb.lt / tb.nt as f64;
    let slices: Vec<Field2D> = (0..tb.nt)
        .map(|k| {
            let t = -0.5 * tb.lt + k as f64 * dt;
            let c = psi(t);
            if c == 0.0 {
                Field2D::zeros(u0.grid())
            } else {
                linear_propagate(u0, t, params).scaled(c)
            }
        })
        .collect();
    FieldST::from_time_slices(&slices, tb.lt)
}

/// `‖ψ(t)S(t)u₀‖_{X_{s,1/2}}` against `‖u₀‖_{B^{2,1}_s}`.
pub fn linear_homogeneous_check(
    u0: &Field2D,
    s: f64,
    tb: TimeBox,
    params: &DispersionParams,
) -> Result<EstimateSample> {
    let f = cutoff_propagated(u0, tb, params)?;
    let lhs = xsb_norm(&f, s, 0.5, params).total;
    Ok(EstimateSample::new(EstimateId::LinearHomogeneous, lhs, besov_norm(u0, s).total))
}

/// `‖ψ(t)S(t)u₀‖_{Y_{s,s−1,1/2}}` against `‖u₀‖_{P^{2,1}_{s−1}} + ‖u₀‖_{B^{2,1}_s}`.
pub fn linear_homogeneous_y_check(
    u0: &Field2D,
    s: f64,
    tb: TimeBox,
    params: &DispersionParams,
) -> Result<EstimateSample> {
    let f = cutoff_propagated(u0, tb, params)?;
    let lhs = ysrb_norm(&f, s, s - 1.0, 0.5, params).total;
    let rhs = weighted_besov_norm(u0, s - 1.0).total + besov_norm(u0, s).total;
    Ok(EstimateSample::new(EstimateId::LinearHomogeneousY, lhs, rhs))
}

/// `ψ(t) ∫₀ᵗ S(t − t′) h(t′) dt′` on the time box of `h`.
///
/// `h` is a trigonometric polynomial in `t`, so each mode integrates exactly:
/// `∫₀ᵗ e^{iω(t−t′)} e^{iτt′} dt′ = (e^{iτt} − e^{iωt}) / (i(τ − ω))`.
pub fn duhamel(h: &FieldST, params: &DispersionParams) -> Result<FieldST> {
    let (nt, lt) = (h.nt(), h.lt());
    check_time_box(nt, lt)?;
    let g = h.grid();
    let times: Vec<usize> = (0..nt).filter(|&m| psi(h.t(m)) > 0.0).collect();
    let taus = h.tau_table();
    // e^{iτ_k t_m} for the active times
    let phase: Vec<Complex64> = times
        .iter()
        .flat_map(|&m| taus.iter().map(move |&tau| Complex64::from_polar(1.0, tau * h.t(m))))
        .collect();
    let omega = omega_table(g, params);
    let mut out = vec![vec![Complex64::new(0.0, 0.0); g.len()]; nt];
    for (p, &om) in omega.iter().enumerate() {
        let c = &h.coeffs()[p * nt..(p + 1) * nt];
        if c.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
            continue;
        }
        for (a, &m) in times.iter().enumerate() {
            let t = h.t(m);
            let ew = Complex64::from_polar(1.0, om * t);
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..nt {
                if c[k] == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let d = taus[k] - om;
                let kernel = if (d * t).abs() < 1e-8 {
                    ew * t * Complex64::new(1.0, 0.5 * d * t)
                } else {
                    (phase[a * nt + k] - ew) / Complex64::new(0.0, d)
                };
                acc += c[k] * kernel;
            }
            out[m][p] = acc * (psi(t) / lt);
        }
    }
    let slices: Vec<Field2D> = out
        .into_iter()
        .map(|c| Field2D::from_coeffs(g, c))
        .collect::<Result<_>>()?;
    FieldST::from_time_slices(&slices, lt)
}

/// `‖ψ∫₀ᵗ S(t−t′)h dt′‖_{X_{s,1/2}}` against `‖h‖_{X_{s,−1/2}}`.
pub fn linear_inhomogeneous_check(h: &FieldST, s: f64, params: &DispersionParams) -> Result<EstimateSample> {
    let d = duhamel(h, params)?;
    let lhs = xsb_norm(&d, s, 0.5, params).total;
    let rhs = xsb_norm(h, s, -0.5, params).total;
    Ok(EstimateSample::new(EstimateId::LinearInhomogeneous, lhs, rhs))
}

/// `‖ψ∫₀ᵗ S(t−t′)h dt′‖_{Y_{s,s−1,1/2}}` against
/// `‖h‖_{X_{s,−1/2}} + ‖th‖_{X_{s,−1/2}} + ‖yh‖_{X_{s−1,−1/2}}`.
pub fn linear_inhomogeneous_y_check(h: &FieldST, s: f64, params: &DispersionParams) -> Result<EstimateSample> {
    let d = duhamel(h, params)?;
    let lhs = ysrb_norm(&d, s, s - 1.0, 0.5, params).total;
    let rhs = xsb_norm(h, s, -0.5, params).total
        + xsb_norm(&h.mul_t(), s, -0.5, params).total
        + xsb_norm(&h.mul_y(), s - 1.0, -0.5, params).total;
    Ok(EstimateSample::new(EstimateId::LinearInhomogeneousY, lhs, rhs))
}

/// `ψ(t) f`.
pub fn time_cutoff(f: &FieldST) -> Result<FieldST> {
    let slices: Vec<Field2D> = f
        .time_slices()
        .into_iter()
        .enumerate()
        .map(|(k, s)| s.scaled(psi(f.t(k))))
        .collect();
    FieldST::from_time_slices(&slices, f.lt())
}

/// `‖ψ f‖_{X_{s,1/2}}` against `‖f‖_{X_{s,1/2}}`.
pub fn cutoff_stability_check(f: &FieldST, s: f64, params: &DispersionParams) -> Result<EstimateSample> {
    let lhs = xsb_norm(&time_cutoff(f)?, s, 0.5, params).total;
    Ok(EstimateSample::new(EstimateId::CutoffStability, lhs, xsb_norm(f, s, 0.5, params).total))
}

fn check_bilinear_params(eps0: f64, eps0_max: f64, eps: f64) -> Result<()> {
    if !(eps0 > 0.0 && eps0 < eps0_max) {
        return Err(KpError::InvalidParameter(format!(
            "eps0 must lie in (0, {eps0_max}), got {eps0}"
        )));
    }
    if !(eps > 0.25 && eps < 1.0) {
        return Err(KpError::InvalidParameter(format!("eps must lie in (1/4, 1), got {eps}")));
    }
    Ok(())
}

/// `X_{1−ε₀,1/2}` and `Y_{1−ε₀,−ε₀,1/2}` norms of one factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorNorms {
    pub x: f64,
    pub y: f64,
}

impl FactorNorms {
    pub fn of(u: &FieldST, eps0: f64, params: &DispersionParams) -> Self {
        let s = 1.0 - eps0;
        Self {
            x: xsb_norm(u, s, 0.5, params).total,
            y: ysrb_norm(u, s, -eps0, 0.5, params).total,
        }
    }

    /// `‖·‖_X + ‖·‖_X^{1−ε} ‖·‖_Y^{ε}`.
    pub fn mixed(&self, eps: f64) -> f64 {
        self.x + self.x.powf(1.0 - eps) * self.y.powf(eps)
    }
}

/// Right side of the `X` bilinear estimate from the factor norms.
pub fn bilinear_rhs(u: FactorNorms, v: FactorNorms, eps: f64) -> f64 {
    u.x * v.mixed(eps) + v.x * u.mixed(eps)
}

/// `‖∂x(uv)‖_{X_{1−ε₀,−1/2}}` against
/// `‖u‖_X(‖v‖_X + ‖v‖_X^{1−ε}‖v‖_Y^ε) + ‖v‖_X(‖u‖_X + ‖u‖_X^{1−ε}‖u‖_Y^ε)`
/// with `X = X_{1−ε₀,1/2}` and `Y = Y_{1−ε₀,−ε₀,1/2}`.
pub fn bilinear_estimate_check(
    u: &FieldST,
    v: &FieldST,
    eps0: f64,
    eps: f64,
    params: &DispersionParams,
) -> Result<EstimateSample> {
    check_bilinear_params(eps0, 0.125, eps)?;
    let lhs = xsb_norm(&u.product(v)?.dx(), 1.0 - eps0, -0.5, params).total;
    let rhs = bilinear_rhs(FactorNorms::of(u, eps0, params), FactorNorms::of(v, eps0, params), eps);
    Ok(EstimateSample::new(EstimateId::Bilinear, lhs, rhs))
}

/// `‖∂x(uv)‖_{Y_{1−ε₀,−ε₀,−1/2}}` against
/// `‖u‖_Y(‖v‖_X + ‖v‖_X^{1−ε}‖v‖_Y^ε) + ‖v‖_Y(‖u‖_X + ‖u‖_X^{1−ε}‖u‖_Y^ε)`.
pub fn bilinear_y_estimate_check(
    u: &FieldST,
    v: &FieldST,
    eps0: f64,
    eps: f64,
    params: &DispersionParams,
) -> Result<EstimateSample> {
    check_bilinear_params(eps0, 0.0625, eps)?;
    let lhs = ysrb_norm(&u.product(v)?.dx(), 1.0 - eps0, -eps0, -0.5, params).total;
    let (a, b) = (FactorNorms::of(u, eps0, params), FactorNorms::of(v, eps0, params));
    let rhs = a.y * b.mixed(eps) + b.y * a.mixed(eps);
    Ok(EstimateSample::new(EstimateId::BilinearY, lhs, rhs))
}

fn log_uniform(r: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (r.gen_range(lo.ln()..hi.ln())).exp()
}

/// Log-uniform magnitude in `[lo, hi]` with a random sign.
fn signed_log_uniform(r: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    let v = log_uniform(r, lo, hi);
    if r.gen::<bool>() {
        v
    } else {
        -v
    }
}

/// Factored resonance against direct symbol differencing at `count` random
/// frequency pairs with `|ξ|, |μ|` log-uniform in `[1/10, 10]`.
///
/// `lhs` is the absolute disagreement, `rhs` the scale
/// `|ω(ξ₁+ξ₂, μ₁+μ₂)| + |ω(ξ₁, μ₁)| + |ω(ξ₂, μ₂)|` of the cancelling terms,
/// so `ratio` is the relative deviation.
pub fn resonance_samples(seed: u64, count: usize, params: &DispersionParams) -> Result<Vec<EstimateSample>> {
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x1 = signed_log_uniform(&mut r, 0.1, 10.0);
        let m1 = signed_log_uniform(&mut r, 0.1, 10.0);
        let x2 = signed_log_uniform(&mut r, 0.1, 10.0);
        let m2 = signed_log_uniform(&mut r, 0.1, 10.0);
        if (x1 + x2).abs() < 1e-3 {
            continue;
        }
        let a = bilinear_resonance((x1, m1), (x2, m2), params)?;
        let b = resonance_by_difference((x1, m1), (x2, m2), params)?;
        let scale = params.omega(x1 + x2, m1 + m2).abs() + params.omega(x1, m1).abs() + params.omega(x2, m2).abs();
        out.push(
            EstimateSample::new(EstimateId::Resonance, (a - b).abs(), scale)
                .with_input(seed, format!("xi1={x1:.6e} mu1={m1:.6e} xi2={x2:.6e} mu2={m2:.6e}")),
        );
    }
    Ok(out)
}

/// `lhs` = lower bound (`|ξ|` for KP-I, `ξ²` for KP-II), `rhs` = `|∇ω|`; every
/// ratio must be at most 1. KP-I samples keep `|ξ| ≥ 1/3`, where the bound holds.
pub fn gradient_samples(seed: u64, count: usize, params: &DispersionParams) -> Result<Vec<EstimateSample>> {
    let mut r = rng(seed);
    let lo = if params.is_kp1() { 1.0 / 3.0 } else { 1e-3 };
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let xi = signed_log_uniform(&mut r, lo, 1e3);
        let mu = signed_log_uniform(&mut r, 1e-3, 1e3);
        debug_assert!(!params.is_kp1() || gradient_bound_kp1_valid(xi));
        let g = symbol_gradient_norm(xi, mu, params)?;
        out.push(
            EstimateSample::new(EstimateId::GradientBound, gradient_lower_bound(xi, params), g)
                .with_input(seed, format!("xi={xi:.6e} mu={mu:.6e}")),
        );
    }
    Ok(out)
}

/// Inputs and parameters for the seeded battery.
#[derive(Debug, Clone, PartialEq)]
pub struct BatterySetup {
    pub grid: Grid2D,
    pub time: TimeBox,
    /// Spatial band `|k|, |l| ≤ band` of random trigonometric inputs.
    pub band: i64,
    /// Temporal band `|kτ| ≤ tau_band` of random space-time inputs.
    pub tau_band: i64,
    /// Time window for Strichartz and smoothing.
    pub window: f64,
    pub eps0: f64,
    pub eps: f64,
    /// Sample count and box length of the one-dimensional Sobolev inputs.
    pub sobolev_n: usize,
    pub sobolev_len: f64,
    pub sobolev_p: f64,
}

impl BatterySetup {
    /// `4π × 4π` box with `n × n` modes, `Nt = 128` on `[-4, 4)`.
    pub fn standard(n: usize) -> Result<Self> {
        let four_pi = 4.0 * std::f64::consts::PI;
        Ok(Self {
            grid: Grid2D::new(four_pi, four_pi, n, n)?,
            time: TimeBox::default(),
            band: 3,
            tau_band: 16,
            window: 1.0,
            eps0: 1.0 / 32.0,
            eps: 0.5,
            sobolev_n: 4 * n,
            sobolev_len: 32.0,
            sobolev_p: 4.0,
        })
    }

    /// Same inputs with twice the spatial modes.
    pub fn refined(&self) -> Result<Self> {
        Ok(Self {
            grid: self.grid.refined(2)?,
            sobolev_n: 2 * self.sobolev_n,
            ..self.clone()
        })
    }

    fn s(&self) -> f64 {
        1.0 - self.eps0
    }

    fn random_st(&self, seed: u64) -> Result<FieldST> {
        band_limited_st(&self.grid, self.time.nt, self.time.lt, self.band, self.tau_band, seed)
    }
}

/// Second independent stream derived from a sample seed.
fn companion(seed: u64) -> u64 {
    seed ^ 0x9E37_79B9_7F4A_7C15
}

/// One battery sample of estimate `id` with inputs drawn from `seed`.
pub fn battery_sample(
    id: EstimateId,
    seed: u64,
    setup: &BatterySetup,
    params: &DispersionParams,
) -> Result<EstimateSample> {
    let g = &setup.grid;
    let trig = || format!("trig band={} grid={}x{}", setup.band, g.nx(), g.ny());
    let trig_st = || {
        format!(
            "trig band={} tau_band={} grid={}x{}x{}",
            setup.band,
            setup.tau_band,
            g.nx(),
            g.ny(),
            setup.time.nt
        )
    };
    let sample = match id {
        EstimateId::Strichartz => {
            strichartz_check(&band_limited_field(g, setup.band, seed), setup.window, params)?.with_input(seed, trig())
        }
        EstimateId::SmoothingPlusMinus | EstimateId::SmoothingZero => {
            let which = if id == EstimateId::SmoothingZero {
                SmoothingRegion::Zero
            } else {
                SmoothingRegion::PlusMinus
            };
            smoothing_check(&band_limited_field(g, setup.band, seed), which, setup.window, params)?
                .with_input(seed, trig())
        }
        EstimateId::FoliatedStrichartz => {
            let f = setup.random_st(seed)?;
            let omega = omega_table(g, params);
            let mut shells: Vec<u32> = Vec::new();
            for (p, om) in omega.iter().enumerate() {
                for k in 0..f.nt() {
                    if f.coeffs()[p * f.nt() + k].norm() > 0.0 {
                        shells.push(modulation_shell(f.tau(k) - om));
                    }
                }
            }
            shells.sort_unstable();
            shells.dedup();
            let j = shells[rng(companion(seed)).gen_range(0..shells.len())];
            foliated_strichartz_check(&f, j, params)?.with_input(seed, format!("{} j={j}", trig_st()))
        }
        EstimateId::MaximalMuTau | EstimateId::MaximalXiTau => {
            let kind = if id == EstimateId::MaximalMuTau {
                MultiplierKind::MuTau
            } else {
                MultiplierKind::XiTau
            };
            let f = setup.random_st(seed)?;
            let m = Multiplier::random(kind, &f, setup.band, setup.tau_band, companion(seed));
            maximal_check(&f, &m, MaximalExponent::Infinity)?.with_input(seed, format!("{} p=inf", trig_st()))
        }
        EstimateId::WeightedSobolev => {
            let f = gaussian_mixture_1d(setup.sobolev_n, setup.sobolev_len, seed);
            let xi = rng(companion(seed)).gen_range(0.5..2.0);
            weighted_sobolev_check(&f, setup.sobolev_len, xi, setup.eps0, setup.sobolev_p)?.with_input(
                seed,
                format!("gauss3 n={} xi={xi:.6} p={}", setup.sobolev_n, setup.sobolev_p),
            )
        }
        EstimateId::LinearHomogeneous => {
            linear_homogeneous_check(&band_limited_field(g, setup.band, seed), setup.s(), setup.time, params)?
                .with_input(seed, trig())
        }
        EstimateId::LinearHomogeneousY => {
            let u0 = packet_st(g, setup.time.nt, setup.time.lt, seed)?
                .time_slices()
                .swap_remove(setup.time.nt / 2);
            linear_homogeneous_y_check(&u0, setup.s(), setup.time, params)?
                .with_input(seed, format!("packets grid={}x{}", g.nx(), g.ny()))
        }
        EstimateId::LinearInhomogeneous => {
            linear_inhomogeneous_check(&setup.random_st(seed)?, setup.s(), params)?.with_input(seed, trig_st())
        }
        EstimateId::LinearInhomogeneousY => {
            let h = packet_st(g, setup.time.nt, setup.time.lt, seed)?;
            linear_inhomogeneous_y_check(&h, setup.s(), params)?
                .with_input(seed, format!("packets grid={}x{}x{}", g.nx(), g.ny(), setup.time.nt))
        }
        EstimateId::CutoffStability => {
            cutoff_stability_check(&setup.random_st(seed)?, setup.s(), params)?.with_input(seed, trig_st())
        }
        EstimateId::Bilinear | EstimateId::BilinearY => {
            let u = packet_st(g, setup.time.nt, setup.time.lt, seed)?;
            let v = packet_st(g, setup.time.nt, setup.time.lt, companion(seed))?;
            let desc = format!("packets grid={}x{}x{} eps={}", g.nx(), g.ny(), setup.time.nt, setup.eps);
            if id == EstimateId::Bilinear {
                bilinear_estimate_check(&u, &v, setup.eps0, setup.eps, params)?.with_input(seed, desc)
            } else {
                bilinear_y_estimate_check(&u, &v, setup.eps0, setup.eps, params)?.with_input(seed, desc)
            }
        }
        EstimateId::Resonance => {
            return Ok(resonance_samples(seed, 1, params)?.remove(0));
        }
        EstimateId::GradientBound => {
            return Ok(gradient_samples(seed, 1, params)?.remove(0));
        }
    };
    Ok(sample)
}

/// Every `(id, seed)` sample, in the order of `ids` then `seeds`.
///
/// Samples are computed in parallel and collected in order, so the result
/// does not depend on the thread count.
pub fn run_battery(
    ids: &[EstimateId],
    seeds: &[u64],
    setup: &BatterySetup,
    params: &DispersionParams,
) -> Result<Vec<EstimateSample>> {
    let jobs: Vec<(EstimateId, u64)> = ids.iter().flat_map(|&id| seeds.iter().map(move |&s| (id, s))).collect();
    jobs.par_iter()
        .map(|&(id, seed)| battery_sample(id, seed, setup, params))
        .collect()
}

/// `base, base + 1, …` (`count` seeds).
pub fn seed_range(base: u64, count: usize) -> Vec<u64> {
    (0..count as u64).map(|k| base.wrapping_add(k)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateSummary {
    pub estimate_id: EstimateId,
    pub count: usize,
    pub max: f64,
    pub median: f64,
}

/// Max and median ratio per estimate, in order of first appearance.
pub fn summarize(samples: &[EstimateSample]) -> Vec<EstimateSummary> {
    let mut ids: Vec<EstimateId> = Vec::new();
    for s in samples {
        if !ids.contains(&s.estimate_id) {
            ids.push(s.estimate_id);
        }
    }
    ids.into_iter()
        .map(|id| {
            let mut r: Vec<f64> = samples.iter().filter(|s| s.estimate_id == id).map(|s| s.ratio).collect();
            r.sort_by(f64::total_cmp);
            let n = r.len();
            let median = if n % 2 == 1 { r[n / 2] } else { 0.5 * (r[n / 2 - 1] + r[n / 2]) };
            EstimateSummary {
                estimate_id: id,
                count: n,
                max: r[n - 1],
                median,
            }
        })
        .collect()
}

pub const ESTIMATES_HEADER: &str = "estimate_id,seed,lhs,rhs,ratio";

/// Sample rows followed by `id,max,,,value` and `id,median,,,value` per estimate.
pub fn write_estimates_csv(samples: &[EstimateSample], mut w: impl Write) -> Result<()> {
    writeln!(w, "{ESTIMATES_HEADER}")?;
    for s in samples {
        writeln!(w, "{},{},{},{},{}", s.estimate_id, s.seed, f17(s.lhs), f17(s.rhs), f17(s.ratio))?;
    }
    for s in summarize(samples) {
        writeln!(w, "{},max,,,{}", s.estimate_id, f17(s.max))?;
        writeln!(w, "{},median,,,{}", s.estimate_id, f17(s.median))?;
    }
    Ok(())
}

/// Max ratio on the setup grid and on the doubled grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementRow {
    pub estimate_id: EstimateId,
    pub coarse_max: f64,
    pub fine_max: f64,
    /// `|fine − coarse| / coarse`.
    pub relative_change: f64,
}

pub fn refinement_study(
    ids: &[EstimateId],
    seeds: &[u64],
    setup: &BatterySetup,
    params: &DispersionParams,
) -> Result<Vec<RefinementRow>> {
    let coarse = summarize(&run_battery(ids, seeds, setup, params)?);
    let fine = summarize(&run_battery(ids, seeds, &setup.refined()?, params)?);
    Ok(coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| RefinementRow {
            estimate_id: c.estimate_id,
            coarse_max: c.max,
            fine_max: f.max,
            relative_change: ratio((f.max - c.max).abs(), c.max),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutoff::psi_hat;
    use std::f64::consts::PI;

    fn grid() -> Grid2D {
        Grid2D::new(4.0 * PI, 4.0 * PI, 16, 16).unwrap()
    }

    fn mode(g: &Grid2D, i: usize, j: usize, c: f64) -> Field2D {
        let mut v = vec![Complex64::new(0.0, 0.0); g.len()];
        v[g.index(i, j)] = Complex64::new(c, 0.0);
        Field2D::from_coeffs(g, v).unwrap()
    }

    #[test]
    fn zero_inputs_give_zero_ratio() {
        let g = grid();
        let p = DispersionParams::kp2();
        let z = Field2D::zeros(&g);
        let zs = FieldST::zeros(&g, 16, 8.0).unwrap();
        assert_eq!(strichartz_check(&z, 1.0, &p).unwrap().ratio, 0.0);
        assert_eq!(smoothing_check(&z, SmoothingRegion::Zero, 1.0, &p).unwrap().ratio, 0.0);
        assert_eq!(foliated_strichartz_check(&zs, 0, &p).unwrap().ratio, 0.0);
        let m = Multiplier::from_fn(MultiplierKind::MuTau, &zs, |_, _| 0.0);
        assert_eq!(maximal_check(&zs, &m, MaximalExponent::Infinity).unwrap().ratio, 0.0);
        assert_eq!(weighted_sobolev_check(&[Complex64::new(0.0, 0.0); 8], 4.0, 1.0, 0.1, 4.0).unwrap().ratio, 0.0);
        let tb = TimeBox { nt: 16, lt: 8.0 };
        assert_eq!(linear_homogeneous_check(&z, 1.0, tb, &p).unwrap().ratio, 0.0);
        assert_eq!(linear_inhomogeneous_check(&zs, 1.0, &p).unwrap().ratio, 0.0);
        assert_eq!(cutoff_stability_check(&zs, 1.0, &p).unwrap().ratio, 0.0);
        assert_eq!(bilinear_estimate_check(&zs, &zs, 0.05, 0.5, &p).unwrap().ratio, 0.0);
    }

    #[test]
    fn strichartz_single_mode() {
        let g = grid();
        let u = mode(&g, 2, 3, 5.0);
        let area = g.lx() * g.ly();
        let t = 0.7;
        let s = strichartz_check(&u, t, &DispersionParams::kp1()).unwrap();
        let expect = (t * area).powf(0.25) * 5.0 / area;
        assert!((s.lhs - expect).abs() < 1e-12 * expect);
        assert!((s.rhs - 5.0 / area.sqrt()).abs() < 1e-14);
        assert!(strichartz_check(&u, 0.0, &DispersionParams::kp1()).is_err());
    }

    #[test]
    fn foliated_point_mass() {
        let g = grid();
        let p = DispersionParams::kp2();
        let (nt, lt) = (16, 8.0);
        let om = p.omega(g.xi(2), g.mu(1));
        // put the mass at the lattice τ nearest ω
        let taus = crate::grid::wavenumbers(nt, lt);
        let k = (0..nt).min_by(|&a, &b| (taus[a] - om).abs().total_cmp(&(taus[b] - om).abs())).unwrap();
        assert!((taus[k] - om).abs() < 1.0);
        let mut c = vec![Complex64::new(0.0, 0.0); g.len() * nt];
        c[g.index(2, 1) * nt + k] = Complex64::new(0.0, 3.0);
        let f = FieldST::from_coeffs(&g, nt, lt, c).unwrap();
        let s = foliated_strichartz_check(&f, 0, &p).unwrap();
        let vol = g.lx() * g.ly() * lt;
        assert!((s.ratio - vol.powf(-0.25)).abs() < 1e-12);
        assert_eq!(foliated_strichartz_check(&f, 1, &p).unwrap().ratio, 0.0);
    }

    #[test]
    fn smoothing_zero_region_single_mode() {
        let g = grid();
        // ξ = 1, μ = 1: ξ² = |μ| lies in the P₀ band
        let u = mode(&g, 2, 2, 4.0);
        assert!(RegionMask::Zero(Band::default()).contains(g.xi(2), g.mu(2)));
        let t = 0.8;
        let s = smoothing_check(&u, SmoothingRegion::Zero, t, &DispersionParams::kp1()).unwrap();
        let expect = g.xi(2).abs().sqrt() * (t / g.ly()).sqrt();
        assert!((s.ratio - expect).abs() < 1e-12);
        // the same mode has no P± part
        assert_eq!(smoothing_check(&u, SmoothingRegion::PlusMinus, t, &DispersionParams::kp1()).unwrap().lhs, 0.0);
    }

    #[test]
    fn maximal_single_cell_is_sharp() {
        let g = grid();
        let (nt, lt) = (16, 8.0);
        let mut c = vec![Complex64::new(0.0, 0.0); g.len() * nt];
        c[g.index(1, 2) * nt + 3] = Complex64::new(2.0, -1.0);
        let f = FieldST::from_coeffs(&g, nt, lt, c).unwrap();
        for kind in [MultiplierKind::MuTau, MultiplierKind::XiTau] {
            let target = match kind {
                MultiplierKind::MuTau => g.mu(2),
                MultiplierKind::XiTau => g.xi(1),
            };
            let tau = f.tau(3);
            let m = Multiplier::from_fn(kind, &f, |a, t| if a == target && t == tau { 1.0 } else { 0.0 });
            for p in [MaximalExponent::Two, MaximalExponent::Four, MaximalExponent::Infinity] {
                let s = maximal_check(&f, &m, p).unwrap();
                assert!((s.ratio - 1.0).abs() < 1e-12, "{kind:?} {p:?}: {}", s.ratio);
            }
        }
    }

    #[test]
    fn maximal_bounded_by_cauchy_schwarz() {
        let g = grid();
        let f = band_limited_st(&g, 32, 8.0, 3, 6, 9).unwrap();
        for kind in [MultiplierKind::MuTau, MultiplierKind::XiTau] {
            let m = Multiplier::random(kind, &f, 3, 6, 10);
            for p in [MaximalExponent::Two, MaximalExponent::Four, MaximalExponent::Infinity] {
                let s = maximal_check(&f, &m, p).unwrap();
                assert!(s.ratio > 0.0 && s.ratio <= 1.0 + 1e-12, "{kind:?} {p:?}: {}", s.ratio);
            }
        }
    }

    #[test]
    fn sobolev_gaussian_closed_form() {
        // f = e^{-μ²/2}: ‖f‖∞ = 1, ‖f‖² = √π, ‖f′‖² = √π/2
        let (n, len) = (512, 40.0);
        let f: Vec<Complex64> = (0..n)
            .map(|k| {
                let mu = -0.5 * len + k as f64 * len / n as f64;
                Complex64::new((-0.5 * mu * mu).exp(), 0.0)
            })
            .collect();
        let s = weighted_sobolev_check(&f, len, 1.0, 0.0, f64::INFINITY).unwrap();
        assert!((s.lhs - 1.0).abs() < 1e-14);
        let rhs = (PI.sqrt() * PI.sqrt() / 2.0).powf(0.25);
        assert!((s.rhs - rhs).abs() < 1e-12, "{} vs {rhs}", s.rhs);
        assert!(s.ratio <= 2f64.sqrt());
        assert!(weighted_sobolev_check(&f, len, 1.0, 0.0, 2.0).is_err());
    }

    /// `Σ_j 2^{j/2} (Σ_k χ_j(τ_k − ω) ψ̂(τ_k − ω)² / Lt)^{1/2}` with `ψ̂` by quadrature.
    fn lambda_oracle(om: f64, nt: usize, lt: f64) -> f64 {
        let taus = crate::grid::wavenumbers(nt, lt);
        let mut per = vec![0.0; 40];
        for &tau in &taus {
            let d = tau - om;
            per[modulation_shell(d) as usize] += psi_hat(d).powi(2) / lt;
        }
        per.iter().enumerate().map(|(j, v)| 2f64.powf(0.5 * j as f64) * v.sqrt()).sum()
    }

    #[test]
    fn linear_homogeneous_single_mode() {
        let g = grid();
        let p = DispersionParams::kp1();
        let tb = TimeBox { nt: 512, lt: 8.0 };
        let u = mode(&g, 3, 2, 2.0);
        let s = linear_homogeneous_check(&u, 0.7, tb, &p).unwrap();
        let om = p.omega(g.xi(3), g.mu(2));
        let expect = lambda_oracle(om, tb.nt, tb.lt);
        assert!((s.ratio - expect).abs() < 1e-6 * expect, "{} vs {expect}", s.ratio);
    }

    #[test]
    fn duhamel_single_modulation() {
        // h = e^{iτ₀t} on one spatial mode: the Duhamel integral is
        // (e^{iτ₀t} − e^{iωt})/(i(τ₀ − ω)) times ψ, whose transform is
        // (ψ̂(τ − τ₀) − ψ̂(τ − ω))/(i(τ₀ − ω)).
        let g = grid();
        let p = DispersionParams::kp2();
        let (nt, lt) = (512, 8.0);
        let (i, j, k0) = (2, 1, 5);
        let mut c = vec![Complex64::new(0.0, 0.0); g.len() * nt];
        c[g.index(i, j) * nt + k0] = Complex64::new(lt, 0.0);
        let h = FieldST::from_coeffs(&g, nt, lt, c).unwrap();
        let d = duhamel(&h, &p).unwrap();
        let om = p.omega(g.xi(i), g.mu(j));
        let tau0 = h.tau(k0);
        let mut err: f64 = 0.0;
        for k in 0..nt {
            let tau = h.tau(k);
            let expect = Complex64::new(psi_hat(tau - tau0) - psi_hat(tau - om), 0.0) / Complex64::new(0.0, tau0 - om);
            err = err.max((d.coeff(i, j, k) - expect).norm());
        }
        assert!(err < 1e-6, "max error {err}");
        let s = linear_inhomogeneous_check(&h, 1.0, &p).unwrap();
        assert!(s.ratio.is_finite() && s.ratio > 0.0);
    }

    #[test]
    fn cutoff_is_identity_where_psi_is_one() {
        let g = grid();
        let p = DispersionParams::kp2();
        // f supported in |t| < 1/2 after sampling
        let nt = 64;
        let lt = 8.0;
        let f0 = band_limited_field(&g, 2, 4);
        let slices: Vec<Field2D> = (0..nt)
            .map(|k| {
                let t = -0.5 * lt + k as f64 * lt / nt as f64;
                if t.abs() < 0.5 {
                    f0.scaled(1.0 - 4.0 * t * t)
                } else {
                    Field2D::zeros(&g)
                }
            })
            .collect();
        let f = FieldST::from_time_slices(&slices, lt).unwrap();
        let s = cutoff_stability_check(&f, 0.9, &p).unwrap();
        assert!((s.ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bilinear_on_surface_modes() {
        // single on-surface modes: ∂x(uv) is one mode at the sum frequency with
        // modulation equal to minus the resonance
        let g = grid();
        let p = DispersionParams::kp2();
        let (nt, lt) = (64, 2.0 * PI);
        let (i1, j1, i2, j2) = (1, 1, 2, 0);
        let (x1, m1, x2, m2) = (g.xi(i1), g.mu(j1), g.xi(i2), g.mu(j2));
        let f = FieldST::zeros(&g, nt, lt).unwrap();
        // lt = 2π gives integer τ; choose the nearest lattice point to ω
        let near = |om: f64| (0..nt).min_by(|&a, &b| (f.tau(a) - om).abs().total_cmp(&(f.tau(b) - om).abs())).unwrap();
        let (k1, k2) = (near(p.omega(x1, m1)), near(p.omega(x2, m2)));
        let single = |i, j, k| {
            let mut c = vec![Complex64::new(0.0, 0.0); g.len() * nt];
            c[g.index(i, j) * nt + k] = Complex64::new(1.0, 0.0);
            FieldST::from_coeffs(&g, nt, lt, c).unwrap()
        };
        let (u, v) = (single(i1, j1, k1), single(i2, j2, k2));
        let eps0 = 0.05;
        let s = bilinear_estimate_check(&u, &v, eps0, 0.5, &p).unwrap();
        let vol = g.lx() * g.ly() * lt;
        let (xs, ms, ts) = (x1 + x2, m1 + m2, f.tau(k1) + f.tau(k2));
        let jmod = modulation_shell(ts - p.omega(xs, ms));
        let lhs = 2f64.powf(-0.5 * jmod as f64) * weight_w(xs, ms).powf(1.0 - eps0) * xs.abs() / vol / vol.sqrt();
        assert!((s.lhs - lhs).abs() < 1e-12 * lhs, "{} vs {lhs}", s.lhs);
        let xu = xsb_norm(&u, 1.0 - eps0, 0.5, &p).total;
        let ju = modulation_shell(f.tau(k1) - p.omega(x1, m1));
        let expect_xu = 2f64.powf(0.5 * ju as f64) * weight_w(x1, m1).powf(1.0 - eps0) / vol.sqrt();
        assert!((xu - expect_xu).abs() < 1e-12 * expect_xu);
        assert!(bilinear_estimate_check(&u, &v, 0.2, 0.5, &p).is_err());
        assert!(bilinear_estimate_check(&u, &v, 0.05, 0.2, &p).is_err());
        assert!(bilinear_y_estimate_check(&u, &v, 0.07, 0.5, &p).is_err());
    }

    #[test]
    fn exact_identities() {
        for p in [DispersionParams::kp1(), DispersionParams::kp2()] {
            let r = resonance_samples(3, 2000, &p).unwrap();
            assert!(r.iter().all(|s| s.ratio <= 1e-10), "{:?}", r.iter().map(|s| s.ratio).fold(0.0, f64::max));
            let g = gradient_samples(4, 2000, &p).unwrap();
            assert!(g.iter().all(|s| s.ratio <= 1.0));
        }
    }

    #[test]
    fn battery_is_deterministic_and_csv_has_summaries() {
        let setup = BatterySetup::standard(16).unwrap();
        let p = DispersionParams::kp2();
        let ids = [EstimateId::Strichartz, EstimateId::WeightedSobolev];
        let seeds = seed_range(100, 3);
        let a = run_battery(&ids, &seeds, &setup, &p).unwrap();
        let b = run_battery(&ids, &seeds, &setup, &p).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 6);
        assert_eq!(a[1].seed, 101);
        let mut buf = Vec::new();
        write_estimates_csv(&a, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(ESTIMATES_HEADER));
        assert!(text.contains("strichartz,max,,,"));
        assert!(text.contains("weighted_sobolev,median,,,"));
        assert_eq!("bilinear_y".parse::<EstimateId>().unwrap(), EstimateId::BilinearY);
    }
}
