//! Dispersion symbol of the KP linear flow and the quantities built from it.

use serde::{Deserialize, Serialize};

use crate::error::{KpError, Result};

/// Coefficients of `u_t + u_xxx + γ ∂x⁻¹∂y² u + β ∂x(u²) = 0`.
///
/// `γ < 0` is KP-I, `γ > 0` is KP-II. `|β| = 1` throughout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionParams {
    pub gamma: f64,
    pub beta: f64,
}

impl DispersionParams {
    pub fn new(gamma: f64, beta: f64) -> Result<Self> {
        let p = Self { gamma, beta };
        p.validate()?;
        Ok(p)
    }

    /// KP-I with `γ = -1, β = 1`.
    pub fn kp1() -> Self {
        Self {
            gamma: -1.0,
            beta: 1.0,
        }
    }

    /// KP-II with `γ = 1, β = 1`.
    pub fn kp2() -> Self {
        Self {
            gamma: 1.0,
            beta: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.gamma.is_finite() || self.gamma == 0.0 {
            return Err(KpError::InvalidParameter(format!(
                "gamma must be finite and nonzero, got {}",
                self.gamma
            )));
        }
        if (self.beta.abs() - 1.0).abs() > 1e-12 {
            return Err(KpError::InvalidParameter(format!(
                "|beta| must equal 1, got {}",
                self.beta
            )));
        }
        Ok(())
    }

    pub fn is_kp1(&self) -> bool {
        self.gamma < 0.0
    }

    /// `ω(ξ, μ)` without the `ξ ≠ 0` check, for inner loops that already skip that line.
    #[inline]
    pub fn omega(&self, xi: f64, mu: f64) -> f64 {
        xi * xi * xi - self.gamma * mu * mu / xi
    }
}

fn nonzero_xi(xi: f64, what: &str) -> Result<()> {
    if xi == 0.0 || !xi.is_finite() {
        Err(KpError::Domain(format!("{what} requires finite xi != 0, got {xi}")))
    } else {
        Ok(())
    }
}

/// `ω(ξ, μ) = ξ³ − γ μ²/ξ`.
pub fn dispersion_symbol(xi: f64, mu: f64, params: &DispersionParams) -> Result<f64> {
    nonzero_xi(xi, "dispersion symbol")?;
    Ok(params.omega(xi, mu))
}

/// Gradient of `ω`: `(3ξ² + γ μ²/ξ², −2γ μ/ξ)`.
pub fn symbol_gradient(xi: f64, mu: f64, params: &DispersionParams) -> Result<(f64, f64)> {
    nonzero_xi(xi, "symbol gradient")?;
    let r = mu / xi;
    Ok((3.0 * xi * xi + params.gamma * r * r, -2.0 * params.gamma * r))
}

/// Euclidean norm of the gradient of `ω`.
pub fn symbol_gradient_norm(xi: f64, mu: f64, params: &DispersionParams) -> Result<f64> {
    let (a, b) = symbol_gradient(xi, mu, params)?;
    Ok(a.hypot(b))
}

/// Lower bound on `|∇ω|` for the sign of `γ`: `|ξ|` for KP-I, `ξ²` for KP-II.
///
/// For KP-I with `|γ| = 1` the bound holds exactly when `|ξ| ≥ 1/3`; below
/// that, `μ = 0` gives `|∇ω| = 3ξ² < |ξ|`. [`gradient_bound_kp1_valid`]
/// encodes the region.
pub fn gradient_lower_bound(xi: f64, params: &DispersionParams) -> f64 {
    if params.is_kp1() {
        xi.abs()
    } else {
        xi * xi
    }
}

/// Region where `|∇ω| ≥ |ξ|` holds for every `μ` (KP-I, `γ = -1`).
pub fn gradient_bound_kp1_valid(xi: f64) -> bool {
    xi.abs() >= 1.0 / 3.0
}

/// Resonance `ω(ξ₁+ξ₂, μ₁+μ₂) − ω(ξ₁,μ₁) − ω(ξ₂,μ₂)` in factored form:
/// `ξ₁ξ₂/(ξ₁+ξ₂) · (3(ξ₁+ξ₂)² + γ(μ₁/ξ₁ − μ₂/ξ₂)²)`.
pub fn bilinear_resonance(
    k1: (f64, f64),
    k2: (f64, f64),
    params: &DispersionParams,
) -> Result<f64> {
    let (x1, m1) = k1;
    let (x2, m2) = k2;
    nonzero_xi(x1, "resonance")?;
    nonzero_xi(x2, "resonance")?;
    nonzero_xi(x1 + x2, "resonance (sum)")?;
    Ok(resonance_unchecked(x1, m1, x2, m2, params.gamma))
}

#[inline]
pub(crate) fn resonance_unchecked(x1: f64, m1: f64, x2: f64, m2: f64, gamma: f64) -> f64 {
    let s = x1 + x2;
    let d = m1 / x1 - m2 / x2;
    x1 * x2 / s * (3.0 * s * s + gamma * d * d)
}

/// Same quantity by direct differencing of the symbol.
pub fn resonance_by_difference(
    k1: (f64, f64),
    k2: (f64, f64),
    params: &DispersionParams,
) -> Result<f64> {
    let sum = dispersion_symbol(k1.0 + k2.0, k1.1 + k2.1, params)?;
    Ok(sum - dispersion_symbol(k1.0, k1.1, params)? - dispersion_symbol(k2.0, k2.1, params)?)
}

/// Spatial weight `w(ξ, μ) = 1 + |ξ| + |μ|/|ξ|`; defined as 1 on `ξ = 0`,
/// where fields carry no mass.
#[inline]
pub fn weight_w(xi: f64, mu: f64) -> f64 {
    if xi == 0.0 {
        1.0
    } else {
        1.0 + xi.abs() + mu.abs() / xi.abs()
    }
}
