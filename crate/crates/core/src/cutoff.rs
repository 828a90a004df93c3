//! Smooth time cutoff `ψ`: equal to 1 on `|t| ≤ 1/2`, supported in `|t| < 1`.

fn f(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// Smooth step from 1 at `s ≤ 0` to 0 at `s ≥ 1`.
fn q(s: f64) -> f64 {
    let a = f(1.0 - s);
    a / (f(s) + a)
}

pub fn psi(t: f64) -> f64 {
    let a = t.abs();
    if a <= 0.5 {
        1.0
    } else if a < 1.0 {
        q(2.0 * (a - 0.5))
    } else {
        0.0
    }
}

/// `ψ̂(τ) = ∫ ψ(t) e^{-itτ} dt = 2∫₀¹ ψ(t) cos(tτ) dt`.
///
/// Trapezoid rule on a smooth compactly supported integrand; the panel count
/// grows with `|τ|` to resolve the oscillation.
pub fn psi_hat(tau: f64) -> f64 {
    let n = (4096.0_f64).max(64.0 * tau.abs()).min(1.0e7) as usize;
    let h = 1.0 / n as f64;
    let mut acc = 0.5 * psi(0.0);
    for k in 1..n {
        let t = k as f64 * h;
        acc += psi(t) * (t * tau).cos();
    }
    2.0 * h * acc
}
