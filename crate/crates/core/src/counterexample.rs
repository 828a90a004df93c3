//! Sharpness example for the bilinear estimate with `ε < 1/4`.
//!
//! Two frequency boxes near the KP-I dispersion surface `τ = ξ³ + μ²/ξ`:
//! `E₁ = [α/2, α] × [−6α², 6α²] × {|τ − ω| ≤ 1}` and
//! `E₂ = [N, N+α] × [√3N², √3N² + α²] × {|τ − ω| ≤ 1}` with `α = N^{−1/2}`,
//! carrying `û = α^{−3/2} χ_{E₁}` and `v̂ = N^{−1} α^{−3/2} χ_{E₂}`.
//!
//! The `τ` extent near `4N³` rules out a global grid. Both functions are
//! separable in `(ξ, μ, τ − ω)`, so the `τ` convolution collapses to the
//! tabulated kernel `K = c * c` of the modulation profile, and the `(ξ, μ)`
//! convolution is a direct sum over the two boxes' lattices.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{KpError, Result};
use crate::fit::{loglog_fit, LogLogFit};
use crate::norms::ShellAccumulator;
use crate::report::f17;
use crate::shells::modulation_shell;
use crate::symbol::{weight_w, DispersionParams};

/// Half-width of the modulation band `|τ − ω| ≤ 1`.
pub const MODULATION_HALF_WIDTH: f64 = 1.0;
/// Smallest accepted frequency parameter.
pub const MIN_N: f64 = 16.0;
/// Smallest accepted number of lattice cells per box scale.
pub const MIN_RESOLUTION: usize = 8;
/// Sub-cells per lattice cell in the quadrature of the factor norms.
const SUBCELLS: usize = 4;

/// Indicator of `[lo, hi]` with a cosine taper of width `h` centered on each edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Taper {
    pub lo: f64,
    pub hi: f64,
    pub h: f64,
}

impl Taper {
    pub fn value(&self, x: f64) -> f64 {
        let half = 0.5 * self.h;
        if x <= self.lo - half || x >= self.hi + half {
            0.0
        } else if x < self.lo + half {
            0.5 * (1.0 + (PI * (x - self.lo) / self.h).sin())
        } else if x > self.hi - half {
            0.5 * (1.0 - (PI * (x - self.hi) / self.h).sin())
        } else {
            1.0
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let half = 0.5 * self.h;
        let k = PI / self.h;
        if x <= self.lo - half || x >= self.hi + half {
            0.0
        } else if x < self.lo + half {
            0.5 * k * (k * (x - self.lo)).cos()
        } else if x > self.hi - half {
            -0.5 * k * (k * (x - self.hi)).cos()
        } else {
            0.0
        }
    }

    /// Lattice nodes `lo + k h`, `k = 0..=cells`; the taper gives the end
    /// nodes the value 1/2, so `Σ value · h` is the interval length.
    fn lattice(&self) -> Vec<(f64, f64)> {
        let cells = ((self.hi - self.lo) / self.h).round() as usize;
        (0..=cells)
            .map(|k| {
                let x = self.lo + k as f64 * self.h;
                (x, self.value(x))
            })
            .collect()
    }

    /// Midpoint nodes over the support with `SUBCELLS` nodes per cell:
    /// `(x, value, derivative, weight)`.
    fn quadrature(&self) -> Vec<(f64, f64, f64, f64)> {
        let a = self.lo - 0.5 * self.h;
        let cells = ((self.hi - self.lo) / self.h).round() as usize + 1;
        let n = cells * SUBCELLS;
        let d = (self.hi - self.lo + self.h) / n as f64;
        (0..n)
            .map(|k| {
                let x = a + (k as f64 + 0.5) * d;
                (x, self.value(x), self.derivative(x), d)
            })
            .collect()
    }
}

/// One frequency box: tapered indicators in `ξ`, `μ` and `τ − ω(ξ, μ)`,
/// scaled by `amplitude`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyBox {
    pub xi: Taper,
    pub mu: Taper,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexamplePair {
    pub n: f64,
    pub alpha: f64,
    /// Lattice cells per `α/2` in `ξ`, per `α²` in `μ` and per modulation
    /// band width 2.
    pub resolution: usize,
    pub e1: FrequencyBox,
    pub e2: FrequencyBox,
    /// Modulation profile `c(τ − ω)`.
    pub modulation: Taper,
}

/// Build the pair for frequency parameter `n` with `resolution` cells per box scale.
///
/// Lattice steps are `α/(2R)` in `ξ`, `α²/R` in `μ` and `2/R` for the
/// modulation taper, so `E₁` spans `R × 12R` cells and `E₂` spans `2R × R`.
pub fn build_pair(n: f64, resolution: usize) -> Result<CounterexamplePair> {
    if !(n >= MIN_N && n.is_finite()) {
        return Err(KpError::InvalidParameter(format!("N must be at least {MIN_N}, got {n}")));
    }
    if resolution < MIN_RESOLUTION {
        return Err(KpError::TooCoarse(format!(
            "resolution {resolution} cannot resolve the α and α² scales (need ≥ {MIN_RESOLUTION} cells per box side)"
        )));
    }
    let r = resolution as f64;
    let alpha = n.powf(-0.5);
    let a2 = alpha * alpha;
    let hxi = alpha / (2.0 * r);
    let hmu = a2 / r;
    let amp = alpha.powf(-1.5);
    let e1 = FrequencyBox {
        xi: Taper { lo: 0.5 * alpha, hi: alpha, h: hxi },
        mu: Taper { lo: -6.0 * a2, hi: 6.0 * a2, h: hmu },
        amplitude: amp,
    };
    let mu2 = 3f64.sqrt() * n * n;
    let e2 = FrequencyBox {
        xi: Taper { lo: n, hi: n + alpha, h: hxi },
        mu: Taper { lo: mu2, hi: mu2 + a2, h: hmu },
        amplitude: amp / n,
    };
    if e1.xi.hi + 0.5 * hxi >= e2.xi.lo - 0.5 * hxi {
        return Err(KpError::TooCoarse("E1 and E2 overlap in ξ".into()));
    }
    Ok(CounterexamplePair {
        n,
        alpha,
        resolution,
        e1,
        e2,
        modulation: Taper {
            lo: -MODULATION_HALF_WIDTH,
            hi: MODULATION_HALF_WIDTH,
            h: 2.0 * MODULATION_HALF_WIDTH / r,
        },
    })
}

fn kp1() -> DispersionParams {
    DispersionParams::kp1()
}

/// `∫ χ_j(s) c(s)² ds` and `∫ χ_j(s) c′(s)² ds` per modulation shell `j`.
fn modulation_moments(c: &Taper) -> (Vec<f64>, Vec<f64>) {
    let n = 20_000;
    let a = c.lo - c.h;
    let d = (c.hi - c.lo + 2.0 * c.h) / n as f64;
    let mut m0 = vec![0.0; 4];
    let mut m1 = vec![0.0; 4];
    for k in 0..n {
        let s = a + (k as f64 + 0.5) * d;
        let j = modulation_shell(s) as usize;
        m0[j] += c.value(s).powi(2) * d;
        m1[j] += c.derivative(s).powi(2) * d;
    }
    (m0, m1)
}

/// Plancherel factor `(2π)^{-3}` of frequency-side integrals.
fn plancherel() -> f64 {
    (2.0 * PI).powi(-3)
}

impl CounterexamplePair {
    /// `∫ χ_{E₁}` over the tapered box; equals `(α/2)(12α²)(2) = 12α³`.
    pub fn volume_e1(&self) -> f64 {
        let s = |t: &Taper| t.lattice().iter().map(|(_, v)| v * t.h).sum::<f64>();
        s(&self.e1.xi) * s(&self.e1.mu) * s(&self.modulation)
    }

    /// `‖f̂‖_{L²(dξ dμ dτ)}` of one box, without the Plancherel factor.
    pub fn box_l2(&self, b: &FrequencyBox) -> f64 {
        let q = |t: &Taper| t.quadrature().iter().map(|p| p.1 * p.1 * p.3).sum::<f64>();
        let (m0, _) = modulation_moments(&self.modulation);
        b.amplitude * (q(&b.xi) * q(&b.mu) * m0.iter().sum::<f64>()).sqrt()
    }

    /// `(‖f‖_{X_{1,1/2}}, ‖f‖_{Y_{1,0,1/2}})` of one box in the Plancherel measure.
    ///
    /// `t f` and `y f` correspond to `∂_τ f̂` and `∂_μ f̂`; with
    /// `f̂ = A a(ξ) b(μ) c(τ − ω)` the cross term of `∂_μ f̂` vanishes because
    /// `c c′` is odd.
    pub fn factor_norms(&self, b: &FrequencyBox) -> (f64, f64) {
        let p = kp1();
        let (m0, m1) = modulation_moments(&self.modulation);
        let mut x = ShellAccumulator::new();
        let mut yt = ShellAccumulator::new();
        let mut ym = ShellAccumulator::new();
        let a2 = b.amplitude * b.amplitude * plancherel();
        let mus = b.mu.quadrature();
        for (xi, av, _, wx) in b.xi.quadrature() {
            if av == 0.0 {
                continue;
            }
            for &(mu, bv, bd, wm) in &mus {
                let w2 = weight_w(xi, mu).powi(2);
                let dmu = -2.0 * p.gamma * mu / xi;
                let cell = a2 * av * av * wx * wm;
                for j in 0..m0.len() {
                    x.add(xi, mu, j as u32, cell * bv * bv * w2 * m0[j]);
                    yt.add(xi, mu, j as u32, cell * bv * bv * w2 * m1[j]);
                    ym.add(xi, mu, j as u32, cell * (bd * bd * m0[j] + bv * bv * dmu * dmu * m1[j]));
                }
            }
        }
        (x.total(0.5), yt.total(0.5) + ym.total(0.5))
    }

    fn kernel(&self) -> Kernel {
        Kernel::new(&self.modulation)
    }

    /// Output lattice of the `(ξ, μ)` convolution: lower corner and node counts.
    fn sum_lattice(&self) -> ((f64, usize), (f64, usize)) {
        let nxi = self.e1.xi.lattice().len() + self.e2.xi.lattice().len() - 1;
        let nmu = self.e1.mu.lattice().len() + self.e2.mu.lattice().len() - 1;
        ((self.e1.xi.lo + self.e2.xi.lo, nxi), (self.e1.mu.lo + self.e2.mu.lo, nmu))
    }

    /// Weighted resonance centers `(ω₁ + ω₂, weight)` contributing to output node `(kx, km)`.
    fn contributions(&self, kx: usize, km: usize) -> Vec<(f64, f64)> {
        let p = kp1();
        let (x1, m1) = (self.e1.xi.lattice(), self.e1.mu.lattice());
        let (x2, m2) = (self.e2.xi.lattice(), self.e2.mu.lattice());
        let w = self.e1.amplitude * self.e2.amplitude * self.e1.xi.h * self.e1.mu.h;
        let mut out = Vec::new();
        for (i1, &(xa, av)) in x1.iter().enumerate() {
            let Some(i2) = kx.checked_sub(i1).filter(|&i| i < x2.len()) else {
                continue;
            };
            let (xb, bv) = x2[i2];
            if av * bv == 0.0 {
                continue;
            }
            for (j1, &(ma, cv)) in m1.iter().enumerate() {
                let Some(j2) = km.checked_sub(j1).filter(|&j| j < m2.len()) else {
                    continue;
                };
                let (mb, dv) = m2[j2];
                let a = av * bv * cv * dv;
                if a != 0.0 {
                    out.push((p.omega(xa, ma) + p.omega(xb, mb), w * a));
                }
            }
        }
        out
    }

    /// `‖∂x(uv)‖_{X_{1,−1/2}}` in the Plancherel measure.
    pub fn lhs(&self) -> f64 {
        let p = kp1();
        let kernel = self.kernel();
        let ((x0, nxi), (m0, nmu)) = self.sum_lattice();
        let (hx, hm) = (self.e1.xi.h, self.e1.mu.h);
        let ds = self.modulation.h / 4.0;
        // (uv)^ = (2π)^{-3} û * v̂; the norm carries another (2π)^{-3}
        let scale = plancherel().powi(3) * hx * hm * ds;
        let rows: Vec<ShellAccumulator> = (0..nxi)
            .into_par_iter()
            .map(|kx| {
                let xi = x0 + kx as f64 * hx;
                let mut acc = ShellAccumulator::new();
                let mut f = Vec::new();
                for km in 0..nmu {
                    let mu = m0 + km as f64 * hm;
                    let terms = self.contributions(kx, km);
                    if terms.is_empty() {
                        continue;
                    }
                    let om = p.omega(xi, mu);
                    let lo = terms.iter().map(|t| t.0).fold(f64::INFINITY, f64::min) - om - kernel.reach;
                    let hi = terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max) - om + kernel.reach;
                    let k0 = (lo / ds).floor() as i64;
                    let len = ((hi / ds).ceil() as i64 - k0 + 1) as usize;
                    f.clear();
                    f.resize(len, 0.0);
                    for &(center, wq) in &terms {
                        let c = center - om;
                        let a = (((c - kernel.reach) / ds).floor() as i64 - k0).max(0) as usize;
                        let b = ((((c + kernel.reach) / ds).ceil() as i64 - k0) as usize).min(len - 1);
                        for (k, v) in f.iter_mut().enumerate().take(b + 1).skip(a) {
                            let s = (k0 + k as i64) as f64 * ds;
                            *v += wq * kernel.eval(s - c);
                        }
                    }
                    let w2 = (weight_w(xi, mu) * xi).powi(2);
                    for (k, v) in f.iter().enumerate() {
                        if *v != 0.0 {
                            let s = (k0 + k as i64) as f64 * ds;
                            acc.add(xi, mu, modulation_shell(s), scale * w2 * v * v);
                        }
                    }
                }
                acc
            })
            .collect();
        let mut total = ShellAccumulator::new();
        for r in &rows {
            total.merge(r);
        }
        total.total(-0.5)
    }

    /// Distance from `τ = 4N³` to the `τ` support of `û * v̂` at the sumset
    /// node `(N + α, √3N² + α²)`, and that point's distance to the surface.
    pub fn sumset_check(&self) -> (f64, f64) {
        let p = kp1();
        let r = self.resolution;
        let kernel = self.kernel();
        let target = 4.0 * self.n.powi(3);
        let dist = self
            .contributions(r, 7 * r)
            .iter()
            .map(|(c, _)| ((c - target).abs() - kernel.reach).max(0.0))
            .fold(f64::INFINITY, f64::min);
        let xi = self.n + self.alpha;
        let mu = 3f64.sqrt() * self.n * self.n + self.alpha * self.alpha;
        (dist, (target - p.omega(xi, mu)).abs())
    }
}

/// `K(σ) = ∫ c(s) c(σ − s) ds`, tabulated and linearly interpolated.
struct Kernel {
    step: f64,
    table: Vec<f64>,
    reach: f64,
}

impl Kernel {
    fn new(c: &Taper) -> Self {
        let reach = 2.0 * (c.hi + 0.5 * c.h);
        let step = c.h / 64.0;
        let n = (reach / step).ceil() as usize + 1;
        let quad = c.quadrature_fine();
        let table = (0..=n)
            .map(|k| {
                let sigma = k as f64 * step;
                quad.iter().map(|&(s, v, w)| v * c.value(sigma - s) * w).sum()
            })
            .collect();
        Self { step, table, reach }
    }

    fn eval(&self, sigma: f64) -> f64 {
        let x = sigma.abs() / self.step;
        let k = x.floor() as usize;
        if k + 1 >= self.table.len() {
            return 0.0;
        }
        let f = x - k as f64;
        self.table[k] * (1.0 - f) + self.table[k + 1] * f
    }
}

impl Taper {
    fn quadrature_fine(&self) -> Vec<(f64, f64, f64)> {
        let a = self.lo - 0.5 * self.h;
        let n = 4096;
        let d = (self.hi - self.lo + self.h) / n as f64;
        (0..n)
            .map(|k| {
                let x = a + (k as f64 + 0.5) * d;
                (x, self.value(x), d)
            })
            .collect()
    }
}

/// Both sides of the bilinear estimate for one pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sides {
    pub lhs: f64,
    pub x_u: f64,
    pub x_v: f64,
    pub y_u: f64,
    pub y_v: f64,
}

impl Sides {
    /// `lhs / (x_u(x_v + x_v^{1−ε} y_v^ε) + x_v(x_u + x_u^{1−ε} y_u^ε))`.
    pub fn ratio_indicator(&self, eps: f64) -> f64 {
        let rhs = self.x_u * (self.x_v + self.x_v.powf(1.0 - eps) * self.y_v.powf(eps))
            + self.x_v * (self.x_u + self.x_u.powf(1.0 - eps) * self.y_u.powf(eps));
        self.lhs / rhs
    }
}

pub fn compute_sides(pair: &CounterexamplePair) -> Sides {
    let (x_u, y_u) = pair.factor_norms(&pair.e1);
    let (x_v, y_v) = pair.factor_norms(&pair.e2);
    Sides {
        lhs: pair.lhs(),
        x_u,
        x_v,
        y_u,
        y_v,
    }
}

pub fn evaluate_sides(pair: &CounterexamplePair, eps: f64) -> (Sides, f64) {
    let s = compute_sides(pair);
    (s, s.ratio_indicator(eps))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: f64,
    pub eps: f64,
    pub sides: Sides,
    pub ratio_indicator: f64,
}

/// Sides for every `N` (computed once per `N`) and every `ε`.
pub fn sweep(ns: &[f64], eps: &[f64], resolution: usize) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &n in ns {
        let sides = compute_sides(&build_pair(n, resolution)?);
        for &e in eps {
            rows.push(SweepRow {
                n,
                eps: e,
                sides,
                ratio_indicator: sides.ratio_indicator(e),
            });
        }
    }
    Ok(rows)
}

fn check_ns(ns: &[f64]) -> Result<()> {
    if ns.len() < 4 {
        return Err(KpError::InvalidParameter(format!(
            "a growth fit needs at least 4 values of N, got {}",
            ns.len()
        )));
    }
    Ok(())
}

/// Log-log fit of `ratio_indicator` against `N` for the rows with this `ε`.
pub fn growth_fit(rows: &[SweepRow], eps: f64) -> Result<LogLogFit> {
    let sel: Vec<&SweepRow> = rows.iter().filter(|r| r.eps == eps).collect();
    let ns: Vec<f64> = sel.iter().map(|r| r.n).collect();
    check_ns(&ns)?;
    loglog_fit(&ns, &sel.iter().map(|r| r.ratio_indicator).collect::<Vec<_>>())
}

/// Log-log fit of one side component against `N` (one row per `N`).
pub fn component_fit(rows: &[SweepRow], pick: impl Fn(&Sides) -> f64) -> Result<LogLogFit> {
    let mut ns = Vec::new();
    let mut ys = Vec::new();
    for r in rows {
        if !ns.contains(&r.n) {
            ns.push(r.n);
            ys.push(pick(&r.sides));
        }
    }
    check_ns(&ns)?;
    loglog_fit(&ns, &ys)
}

/// Fit residual above which a growth fit is flagged.
pub const RESIDUAL_FLAG: f64 = 0.05;

/// Tolerance on the indicator growth exponent `max(1/4 − ε, 0)`.
pub const SLOPE_TOLERANCE: f64 = 0.08;
/// Largest slope accepted above `ε = 1/4`, where the estimate holds.
pub const SLOPE_CEILING: f64 = 0.02;

/// Expected indicator growth exponent for this `ε`.
pub fn expected_slope(eps: f64) -> f64 {
    (0.25 - eps).max(0.0)
}

/// Whether a fitted indicator slope matches the expected growth for `ε`.
pub fn slope_matches(eps: f64, slope: f64) -> bool {
    if eps > 0.25 {
        slope <= SLOPE_CEILING
    } else {
        (slope - expected_slope(eps)).abs() <= SLOPE_TOLERANCE
    }
}

pub const SWEEP_HEADER: &str = "N,eps,lhs,x_u,x_v,y_u,y_v,ratio_indicator";
pub const FIT_HEADER: &str = "eps,slope,intercept,residual";

pub fn write_sweep_csv(rows: &[SweepRow], mut w: impl Write) -> Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in rows {
        let s = &r.sides;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            f17(r.n),
            f17(r.eps),
            f17(s.lhs),
            f17(s.x_u),
            f17(s.x_v),
            f17(s.y_u),
            f17(s.y_v),
            f17(r.ratio_indicator)
        )?;
    }
    Ok(())
}

pub fn write_fit_csv(fits: &[(f64, LogLogFit)], mut w: impl Write) -> Result<()> {
    writeln!(w, "{FIT_HEADER}")?;
    for (eps, f) in fits {
        writeln!(w, "{},{},{},{}", f17(*eps), f17(f.slope), f17(f.intercept), f17(f.residual))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction() {
        let p = build_pair(16.0, 8).unwrap();
        assert_eq!(p.alpha, 0.25);
        assert!((p.e2.mu.lo - 443.405_006_737_633_8).abs() < 1e-9);
        assert!((p.volume_e1() - 12.0 * p.alpha.powi(3)).abs() < 1e-12 * p.alpha.powi(3));
        assert!(matches!(build_pair(8.0, 8), Err(KpError::InvalidParameter(_))));
        assert!(matches!(build_pair(16.0, 4), Err(KpError::TooCoarse(_))));
    }

    #[test]
    fn taper_integrates_to_length() {
        let t = Taper { lo: -1.0, hi: 1.0, h: 0.25 };
        let q: f64 = t.quadrature().iter().map(|p| p.1 * p.3).sum();
        assert!((q - 2.0).abs() < 1e-12);
        let lat: f64 = t.lattice().iter().map(|p| p.1 * t.h).sum();
        assert!((lat - 2.0).abs() < 1e-12);
        assert_eq!(t.value(-1.0), 0.5);
        assert_eq!(t.value(0.0), 1.0);
        assert_eq!(t.value(1.2), 0.0);
        let k = Kernel::new(&t);
        // ∫K = (∫c)²
        let d = 1e-3;
        let total: f64 = (-3000..=3000).map(|i| k.eval(i as f64 * d) * d).sum();
        assert!((total - 4.0).abs() < 1e-3, "{total}");
    }

    #[test]
    fn normalizations() {
        // ‖û‖ is √(12 ∫a²∫b²∫c² / (|E₁| widths)) ≈ √12, and N‖v̂‖ ≈ √2
        for n in [16.0, 64.0] {
            let p = build_pair(n, 8).unwrap();
            let u = p.box_l2(&p.e1);
            let v = p.box_l2(&p.e2) * n;
            assert!(u > 3.0 && u < 12f64.sqrt(), "{u}");
            assert!(v > 1.2 && v < 2f64.sqrt(), "{v}");
        }
    }

    #[test]
    fn sumset_reaches_the_surface() {
        for n in [16.0, 32.0, 64.0, 128.0] {
            let p = build_pair(n, 8).unwrap();
            let (dist, surf) = p.sumset_check();
            assert!(dist <= 4.0, "N={n}: {dist}");
            // ω(N+α, √3N²+α²) − 4N³ → 6 + 2√3 as N grows
            assert!((surf - 6.0 - 2.0 * 3f64.sqrt()).abs() < 1.0, "N={n}: {surf}");
        }
    }

    #[test]
    fn slope_expectations() {
        assert!(slope_matches(0.0, 0.25) && slope_matches(0.0, 0.17) && !slope_matches(0.0, 0.34));
        assert!(slope_matches(0.25, -0.08) && !slope_matches(0.25, 0.09));
        assert!(slope_matches(0.35, 0.02) && !slope_matches(0.35, 0.03));
        assert_eq!(expected_slope(0.1), 0.15);
    }
}
