//! Direct-summation norm oracles shared by the integration tests.
//!
//! These recompute the shell decompositions from the definitions, without
//! the library's shell helpers.

#![allow(dead_code)]

use std::collections::BTreeMap;

use kp_core::{DispersionParams, Field2D, FieldST, Grid2D};
use num_complex::Complex64;
use rand::Rng;

pub fn weight(xi: f64, mu: f64) -> f64 {
    1.0 + xi.abs() + mu.abs() / xi.abs()
}

/// `0` for `|s| ≤ 1`, else the least `m` with `|s| ≤ 2^m`.
pub fn freq_shell(s: f64) -> u32 {
    let a = s.abs();
    let mut m = 0;
    let mut top = 1.0;
    while a > top {
        m += 1;
        top *= 2.0;
    }
    m
}

/// `0` for `|s| < 1`, else the least `j` with `|s| < 2^j`.
pub fn mod_shell(s: f64) -> u32 {
    let a = s.abs();
    let mut j = 0;
    let mut top = 1.0;
    while a >= top {
        j += 1;
        top *= 2.0;
    }
    j
}

/// Branch and index of `(ξ, μ)`: `χ₁ = {ξ² ≥ |μ|/2}` is shelled in `ξ`, the rest in `μ`.
fn spatial(xi: f64, mu: f64) -> (u8, u32) {
    if xi * xi >= 0.5 * mu.abs() {
        (0, freq_shell(xi))
    } else {
        (1, freq_shell(mu))
    }
}

pub fn besov_oracle(f: &Field2D, s: f64) -> f64 {
    besov_of(f.grid(), s, |i, j| f.coeff(i, j))
}

/// `B^{2,1}_s` sum of the grid samples `coeff(i, j)` of a transform.
pub fn besov_of(g: &Grid2D, s: f64, coeff: impl Fn(usize, usize) -> Complex64) -> f64 {
    let mut shells: BTreeMap<(u8, u32), f64> = BTreeMap::new();
    for i in 0..g.nx() {
        for j in 0..g.ny() {
            let (xi, mu) = (g.xi(i), g.mu(j));
            if xi == 0.0 {
                continue;
            }
            let mass = coeff(i, j).norm_sqr() / (g.lx() * g.ly());
            *shells.entry(spatial(xi, mu)).or_default() += weight(xi, mu).powf(2.0 * s) * mass;
        }
    }
    shells.values().map(|v| v.sqrt()).sum()
}

pub fn xsb_oracle(f: &FieldST, s: f64, b: f64, p: &DispersionParams) -> f64 {
    let g = f.grid();
    let mut shells: BTreeMap<(u8, u32, u32), f64> = BTreeMap::new();
    for i in 0..g.nx() {
        for j in 0..g.ny() {
            let (xi, mu) = (g.xi(i), g.mu(j));
            if xi == 0.0 {
                continue;
            }
            let om = xi.powi(3) - p.gamma * mu * mu / xi;
            let (branch, m) = spatial(xi, mu);
            for k in 0..f.nt() {
                let mass = f.coeff(i, j, k).norm_sqr() / (g.lx() * g.ly() * f.lt());
                let jm = mod_shell(f.tau(k) - om);
                *shells.entry((branch, jm, m)).or_default() += weight(xi, mu).powf(2.0 * s) * mass;
            }
        }
    }
    shells
        .iter()
        .map(|((_, j, _), v)| 2f64.powf(b * *j as f64) * v.sqrt())
        .sum()
}

pub fn random_field(g: &Grid2D, r: &mut impl Rng) -> Field2D {
    let c = (0..g.len())
        .map(|_| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
        .collect();
    Field2D::from_coeffs(g, c).unwrap()
}

pub fn random_st(g: &Grid2D, nt: usize, lt: f64, r: &mut impl Rng) -> FieldST {
    let c = (0..g.len() * nt)
        .map(|_| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
        .collect();
    FieldST::from_coeffs(g, nt, lt, c).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
