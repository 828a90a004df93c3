//! Dyadic shells and frequency-region indicators.

use serde::{Deserialize, Serialize};

use crate::field::Field2D;

/// Index `m` of the frequency shell containing `s`.
///
/// `θ₀ = χ{|s| ≤ 1}` and `θ_m = χ{2^{m-1} < |s| ≤ 2^m}` for `m ≥ 1`, so every
/// real number lands in exactly one shell.
pub fn frequency_shell(s: f64) -> u32 {
    let a = s.abs();
    if a <= 1.0 {
        return 0;
    }
    let mut m = a.log2().ceil() as i64;
    // correct log2 rounding at exact powers of two
    while m > 1 && a <= 2f64.powi(m as i32 - 1) {
        m -= 1;
    }
    while a > 2f64.powi(m as i32) {
        m += 1;
    }
    m.max(1) as u32
}

/// Index `j` of the modulation shell: `χ₀ = χ{|s| < 1}`,
/// `χ_j = χ{2^{j-1} ≤ |s| < 2^j}`.
pub fn modulation_shell(s: f64) -> u32 {
    let a = s.abs();
    if a < 1.0 {
        return 0;
    }
    let mut j = a.log2().floor() as i64 + 1;
    while j > 1 && a < 2f64.powi(j as i32 - 1) {
        j -= 1;
    }
    while a >= 2f64.powi(j as i32) {
        j += 1;
    }
    j as u32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    Xi,
    Mu,
}

/// Keep only coefficients whose `axis` frequency lies in shell `m`.
pub fn dyadic_shell_mask(field: &Field2D, axis: Axis, m: u32) -> Field2D {
    field.map(|xi, mu, c| {
        let s = match axis {
            Axis::Xi => xi,
            Axis::Mu => mu,
        };
        if frequency_shell(s) == m {
            c
        } else {
            c * 0.0
        }
    })
}

/// Band constants for `P₊, P₋, P₀`: `P₀` keeps `lo·|μ|/|ξ| ≤ |ξ| ≤ hi·|μ|/|ξ|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Default for Band {
    fn default() -> Self {
        Self {
            lo: 0.125,
            hi: 8.0,
        }
    }
}

/// Default threshold of the `χ₁/χ₂` split.
pub const CHI_THRESHOLD: f64 = 0.5;

/// Frequency regions of the plane.
///
/// `Chi1`/`Chi2` split at `|ξ| = c|μ|/|ξ|`, `Plus`/`Minus`/`Zero` use a
/// [`Band`]. Lines with `ξ = 0` belong to `Chi2` and `Minus`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RegionMask {
    Chi1 { c: f64 },
    Chi2 { c: f64 },
    Plus(Band),
    Minus(Band),
    Zero(Band),
}

impl RegionMask {
    pub fn chi1() -> Self {
        Self::Chi1 { c: CHI_THRESHOLD }
    }
    pub fn chi2() -> Self {
        Self::Chi2 { c: CHI_THRESHOLD }
    }

    #[inline]
    pub fn contains(&self, xi: f64, mu: f64) -> bool {
        // |ξ| ≥ c|μ|/|ξ|  ⇔  ξ² ≥ c|μ| for ξ ≠ 0
        let x2 = xi * xi;
        let am = mu.abs();
        match *self {
            Self::Chi1 { c } => xi != 0.0 && x2 >= c * am,
            Self::Chi2 { c } => xi == 0.0 || x2 < c * am,
            Self::Plus(b) => xi != 0.0 && x2 > b.hi * am,
            Self::Zero(b) => xi != 0.0 && x2 >= b.lo * am && x2 <= b.hi * am,
            Self::Minus(b) => xi == 0.0 || x2 < b.lo * am,
        }
    }
}

/// `χ₁` membership with threshold `c`.
#[inline]
pub fn in_chi1(xi: f64, mu: f64, c: f64) -> bool {
    RegionMask::Chi1 { c }.contains(xi, mu)
}

/// Multiply coefficients by the region's indicator.
pub fn project(field: &Field2D, mask: RegionMask) -> Field2D {
    field.map(|xi, mu, c| if mask.contains(xi, mu) { c } else { c * 0.0 })
}
