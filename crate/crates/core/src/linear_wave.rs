//! Exact radial linear flow outside the unit ball.
//!
//! Radial solutions of the free wave equation with `u(t, 1) = 0` are
//! `r u(t, r) = ψ(t + r) − ψ(t + 2 − r)`, where `ψ` is read off the initial
//! data. Everything here is built on a tabulated `ψ` and its derivative, so
//! the propagator is exact up to quadrature and interpolation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::RadialField;
use crate::numerics::{cumulative_integral, derivative, hermite3, hermite3_slope, simpson};

/// Snap tolerance for treating `t / dr` as an integer shift.
const SHIFT_SNAP: f64 = 1e-9;

/// `ψ` and `ψ'` on the nodes `σ_j = 1 + j·dσ`, `j = −n…n`.
///
/// Outside `[2 − R_sup, R_sup]` (the data's influence interval) `ψ` is constant;
/// evaluation is permitted up to `reach` beyond that interval.
#[derive(Debug, Clone)]
pub struct PsiFunction {
    pub d_sigma: f64,
    pub n: usize,
    pub psi: Vec<f64>,
    pub psi_prime: Vec<f64>,
    pub reach: f64,
}

/// Builds `ψ` from Dirichlet data `(u₀, u₁)` with no extension window.
pub fn psi_from_data(data: &RadialField) -> Result<PsiFunction> {
    data.validate()?;
    let n = data.n_intervals();
    let h = data.dr;
    let radii = data.radii();
    let ru1: Vec<f64> = (0..=n).map(|i| radii[i] * data.ut[i]).collect();
    let ru0: Vec<f64> = (0..=n).map(|i| radii[i] * data.u[i]).collect();
    let a = cumulative_integral(&ru1, h);
    let d_ru0 = derivative(&ru0, h);

    let mut psi = vec![0.0; 2 * n + 1];
    let mut dpsi = vec![0.0; 2 * n + 1];
    for i in 0..=n {
        // σ = r_i > 1
        psi[n + i] = 0.5 * (a[i] + ru0[i]);
        dpsi[n + i] = 0.5 * (ru1[i] + d_ru0[i]);
        // σ = 2 − r_i < 1
        psi[n - i] = 0.5 * (a[i] - ru0[i]);
        dpsi[n - i] = 0.5 * (-ru1[i] + d_ru0[i]);
    }
    // Branch joint: both formulas give ψ(1) = 0; average the slopes.
    psi[n] = 0.0;
    dpsi[n] = 0.5 * d_ru0[0];
    Ok(PsiFunction {
        d_sigma: h,
        n,
        psi,
        psi_prime: dpsi,
        reach: 0.0,
    })
}

impl PsiFunction {
    /// Allows evaluation up to `t_max` beyond the influence interval.
    pub fn with_reach(mut self, t_max: f64) -> Self {
        self.reach = t_max.abs();
        self
    }

    pub fn sigma(&self, idx: usize) -> f64 {
        1.0 + (idx as f64 - self.n as f64) * self.d_sigma
    }

    pub fn window(&self) -> (f64, f64) {
        let half = self.n as f64 * self.d_sigma + self.reach;
        (1.0 - half, 1.0 + half)
    }

    /// `(ψ, ψ')` at `σ = 1 + pos·dσ`.
    pub fn eval_pos(&self, pos: f64) -> Result<(f64, f64)> {
        let n = self.n as f64;
        if pos.abs() > n + self.reach / self.d_sigma + SHIFT_SNAP {
            let (lo, hi) = self.window();
            return Err(Error::OutOfWindow {
                sigma: 1.0 + pos * self.d_sigma,
                lo,
                hi,
            });
        }
        if pos >= n {
            return Ok((self.psi[2 * self.n], 0.0));
        }
        if pos <= -n {
            return Ok((self.psi[0], 0.0));
        }
        let x = pos + n;
        let j = (x.floor() as usize).min(2 * self.n - 1);
        let frac = x - j as f64;
        let h = self.d_sigma;
        let (y0, y1) = (self.psi[j], self.psi[j + 1]);
        let (d0, d1) = (self.psi_prime[j], self.psi_prime[j + 1]);
        if frac == 0.0 {
            return Ok((y0, d0));
        }
        Ok((
            hermite3(y0, d0, y1, d1, h, frac * h),
            hermite3_slope(y0, d0, y1, d1, h, frac * h),
        ))
    }

    /// `(ψ(σ), ψ'(σ))`.
    pub fn eval(&self, sigma: f64) -> Result<(f64, f64)> {
        self.eval_pos((sigma - 1.0) / self.d_sigma)
    }

    /// The free solution at time `t` on `n_out + 1` nodes `1 + i·dσ`.
    pub fn propagate(&self, t: f64, n_out: usize) -> Result<RadialField> {
        let mut tau = t / self.d_sigma;
        if (tau - tau.round()).abs() < SHIFT_SNAP {
            tau = tau.round();
        }
        let mut out = RadialField::zeros(self.d_sigma, n_out);
        out.time = t;
        for i in 1..=n_out {
            let (p_plus, d_plus) = self.eval_pos(tau + i as f64)?;
            let (p_minus, d_minus) = self.eval_pos(tau - i as f64)?;
            let r = out.r(i);
            out.u[i] = (p_plus - p_minus) / r;
            out.ut[i] = (d_plus - d_minus) / r;
        }
        // u(t, 1) = ψ(t+1) − ψ(t+1) = 0; ∂ₜ(ru) vanishes there as well.
        Ok(out)
    }

    /// `2∫_R^∞ ψ'² + 2∫_{−∞}^{2−R} ψ'²`.
    pub fn exterior_energy(&self, big_r: f64) -> f64 {
        let sq: Vec<f64> = self.psi_prime.iter().map(|v| v * v).collect();
        let cum = cumulative_integral(&sq, self.d_sigma);
        let total = cum[2 * self.n];
        let at = |sigma: f64| -> f64 {
            // ∫_{σ_min}^{σ} ψ'² dσ, Hermite in the running integral.
            let x = (sigma - 1.0) / self.d_sigma + self.n as f64;
            if x <= 0.0 {
                return 0.0;
            }
            if x >= (2 * self.n) as f64 {
                return total;
            }
            let j = x.floor() as usize;
            let frac = x - j as f64;
            let h = self.d_sigma;
            hermite3(cum[j], sq[j], cum[j + 1], sq[j + 1], h, frac * h)
        };
        2.0 * (total - at(big_r)) + 2.0 * at(2.0 - big_r)
    }
}

/// Exact free evolution of `data` by time `t`, on the input grid.
pub fn evolve_linear(data: &RadialField, t: f64) -> Result<RadialField> {
    evolve_linear_on(data, t, data.n_intervals())
}

/// Exact free evolution of `data` by time `t`, on `n_out` cells of the input spacing.
pub fn evolve_linear_on(data: &RadialField, t: f64, n_out: usize) -> Result<RadialField> {
    let reach = t.abs() + (n_out as f64 * data.dr - data.n_intervals() as f64 * data.dr).max(0.0);
    let psi = psi_from_data(data)?.with_reach(reach);
    let mut out = psi.propagate(t, n_out)?;
    out.time = data.time + t;
    Ok(out)
}

/// Running integral of `f` evaluated at an arbitrary `x` inside the grid,
/// cubic Hermite in the cumulative values with `f` as slope.
fn integral_from(f: &[f64], h: f64, x0: f64) -> f64 {
    let cum = cumulative_integral(f, h);
    let n = f.len() - 1;
    let total = cum[n];
    let x = x0 / h;
    if x <= 0.0 {
        return total;
    }
    if x >= n as f64 {
        return 0.0;
    }
    let j = x.floor() as usize;
    let frac = x - j as f64;
    total - hermite3(cum[j], f[j], cum[j + 1], f[j + 1], h, frac * h)
}

/// `∫_R^∞ (∂ᵣ(r u₀))² + r² u₁² dr` for data on the grid.
pub fn exterior_energy(data: &RadialField, big_r: f64) -> Result<f64> {
    if !(big_r >= 1.0) {
        return Err(Error::InvalidRange(format!("R = {big_r} < 1")));
    }
    Ok(channel_energy(data, big_r))
}

/// `∫_ρ^∞ (∂ᵣ(r u))² + (∂ₜ(r u))² dr` of a field (the exterior energy beyond `ρ`).
pub fn channel_energy(field: &RadialField, rho: f64) -> f64 {
    let radii = field.radii();
    let ru: Vec<f64> = radii.iter().zip(&field.u).map(|(r, u)| r * u).collect();
    let d_ru = derivative(&ru, field.dr);
    let f: Vec<f64> = (0..field.len())
        .map(|i| {
            let v = radii[i] * field.ut[i];
            d_ru[i] * d_ru[i] + v * v
        })
        .collect();
    integral_from(&f, field.dr, rho - 1.0)
}

/// Which asymptotic direction a radiation profile describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

/// Radiation field `G_±` on the nodes `η_j = 1 + (offset + j)·dη`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiationProfile {
    pub d_eta: f64,
    pub offset: i64,
    pub g: Vec<f64>,
    pub sign: Sign,
}

impl RadiationProfile {
    pub fn eta(&self, j: usize) -> f64 {
        1.0 + (self.offset + j as i64) as f64 * self.d_eta
    }

    /// `G(1 + k·dη)`, zero outside the tabulated window.
    pub fn at_node(&self, k: i64) -> f64 {
        let j = k - self.offset;
        if j < 0 || j as usize >= self.g.len() {
            0.0
        } else {
            self.g[j as usize]
        }
    }

    /// `∫ G²` (Simpson over the window).
    pub fn l2_norm_sq(&self) -> f64 {
        let sq: Vec<f64> = self.g.iter().map(|v| v * v).collect();
        simpson(&sq, self.d_eta)
    }

    /// `∫_{a}^∞ G²`.
    pub fn l2_norm_sq_from(&self, a: f64) -> f64 {
        let sq: Vec<f64> = self.g.iter().map(|v| v * v).collect();
        integral_from(&sq, self.d_eta, a - self.eta(0))
    }

    /// Discrete `L²` distance to another profile on the same lattice.
    pub fn l2_distance(&self, other: &RadiationProfile) -> f64 {
        let lo = self.offset.min(other.offset);
        let hi = (self.offset + self.g.len() as i64).max(other.offset + other.g.len() as i64);
        let sq: Vec<f64> = (lo..hi)
            .map(|k| (self.at_node(k) - other.at_node(k)).powi(2))
            .collect();
        simpson(&sq, self.d_eta).sqrt()
    }
}

/// `(G₊, G₋)` of the free solution with data `data`: `G₊(σ) = ψ'(2 − σ)`,
/// `G₋(σ) = ψ'(σ)`.
pub fn radiation_fields(data: &RadialField) -> Result<(RadiationProfile, RadiationProfile)> {
    let psi = psi_from_data(data)?;
    let n = psi.n as i64;
    let g_minus = RadiationProfile {
        d_eta: psi.d_sigma,
        offset: -n,
        g: psi.psi_prime.clone(),
        sign: Sign::Minus,
    };
    let g_plus = RadiationProfile {
        d_eta: psi.d_sigma,
        offset: -n,
        g: psi.psi_prime.iter().rev().copied().collect(),
        sign: Sign::Plus,
    };
    Ok((g_plus, g_minus))
}

/// Initial data whose radiation field (in the profile's direction) is `g`.
///
/// For `G₊`: `u₀(r) = r⁻¹ ∫_1^r (G(τ) + G(2−τ)) dτ`, `u₁(r) = r⁻¹ (G(2−r) − G(r))`.
pub fn data_from_radiation(g: &RadiationProfile) -> Result<RadialField> {
    let first = g.offset;
    let last = g.offset + g.g.len() as i64 - 1;
    let n = first.abs().max(last.abs()).max(1) as usize;
    let h = g.d_eta;
    let orient = match g.sign {
        Sign::Plus => 1.0,
        Sign::Minus => -1.0,
    };
    let sum: Vec<f64> = (0..=n as i64)
        .map(|i| g.at_node(i) + g.at_node(-i))
        .collect();
    let ru0 = cumulative_integral(&sum, h);
    let mut data = RadialField::zeros(h, n);
    for i in 1..=n {
        let r = data.r(i);
        data.u[i] = ru0[i] / r;
        data.ut[i] = orient * (g.at_node(-(i as i64)) - g.at_node(i as i64)) / r;
    }
    data.ut[0] = 0.0;
    Ok(data)
}
