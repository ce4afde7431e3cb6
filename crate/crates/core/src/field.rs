//! Radial fields `(u, ∂ₜu)` sampled on `r_i = 1 + i·dr`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{derivative, simpson};

/// Samples below this fraction of the field maximum are treated as outside the support.
pub const SUPPORT_CUTOFF: f64 = 1e-14;

/// State of the flow at one time: `u` and `∂ₜu` on a uniform grid starting at `r = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialField {
    pub dr: f64,
    pub u: Vec<f64>,
    pub ut: Vec<f64>,
    pub time: f64,
}

impl RadialField {
    /// Checked constructor: Dirichlet condition, finite samples, matching lengths.
    pub fn new(dr: f64, u: Vec<f64>, ut: Vec<f64>, time: f64) -> Result<Self> {
        let f = Self { dr, u, ut, time };
        f.validate()?;
        Ok(f)
    }

    pub fn zeros(dr: f64, n_intervals: usize) -> Self {
        Self {
            dr,
            u: vec![0.0; n_intervals + 1],
            ut: vec![0.0; n_intervals + 1],
            time: 0.0,
        }
    }

    /// Samples `(u0, u1)` on `[1, r_end]`; `u(1)` and `∂ₜu(1)` are set to zero.
    pub fn from_fn<F, G>(dr: f64, r_end: f64, u0: F, u1: G) -> Self
    where
        F: Fn(f64) -> f64,
        G: Fn(f64) -> f64,
    {
        let n = ((r_end - 1.0) / dr).round() as usize;
        let mut f = Self::zeros(dr, n);
        for i in 1..=n {
            let r = f.r(i);
            f.u[i] = u0(r);
            f.ut[i] = u1(r);
        }
        f
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dr > 0.0 && self.dr.is_finite()) {
            return Err(Error::InvalidField(format!("dr = {}", self.dr)));
        }
        if self.u.len() != self.ut.len() || self.u.is_empty() {
            return Err(Error::InvalidField(format!(
                "sample counts differ or are empty: {} vs {}",
                self.u.len(),
                self.ut.len()
            )));
        }
        if self.u[0] != 0.0 {
            return Err(Error::InvalidField(format!("u(1) = {} violates Dirichlet", self.u[0])));
        }
        if let Some(i) = self
            .u
            .iter()
            .chain(self.ut.iter())
            .position(|v| !v.is_finite())
        {
            return Err(Error::InvalidField(format!("non-finite sample at index {i}")));
        }
        Ok(())
    }

    #[inline]
    pub fn r(&self, i: usize) -> f64 {
        1.0 + i as f64 * self.dr
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn n_intervals(&self) -> usize {
        self.u.len() - 1
    }

    pub fn r_end(&self) -> f64 {
        self.r(self.n_intervals())
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.r(i)).collect()
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            dr: self.dr,
            u: self.u.iter().map(|v| lambda * v).collect(),
            ut: self.ut.iter().map(|v| lambda * v).collect(),
            time: self.time,
        }
    }

    /// `self + lambda · other` on the common part of the grids.
    pub fn axpy(&self, lambda: f64, other: &RadialField) -> Self {
        let n = self.len().min(other.len());
        Self {
            dr: self.dr,
            u: (0..n).map(|i| self.u[i] + lambda * other.u[i]).collect(),
            ut: (0..n).map(|i| self.ut[i] + lambda * other.ut[i]).collect(),
            time: self.time,
        }
    }

    /// Same field on `n_intervals` cells: zero-padded or truncated.
    pub fn resized(&self, n_intervals: usize) -> Self {
        let mut f = self.clone();
        f.u.resize(n_intervals + 1, 0.0);
        f.ut.resize(n_intervals + 1, 0.0);
        f
    }

    /// Radius of the last sample above [`SUPPORT_CUTOFF`] times the maximum, or 1 for zero data.
    pub fn support_radius(&self) -> f64 {
        let max = self
            .u
            .iter()
            .chain(self.ut.iter())
            .fold(0.0f64, |a, v| a.max(v.abs()));
        if max == 0.0 {
            return 1.0;
        }
        let cut = SUPPORT_CUTOFF * max;
        (0..self.len())
            .rev()
            .find(|&i| self.u[i].abs() > cut || self.ut[i].abs() > cut)
            .map_or(1.0, |i| self.r(i))
    }

    /// Zeroes every sample below [`SUPPORT_CUTOFF`] times the maximum.
    pub fn truncate_support(&mut self) {
        let max = self
            .u
            .iter()
            .chain(self.ut.iter())
            .fold(0.0f64, |a, v| a.max(v.abs()));
        let cut = SUPPORT_CUTOFF * max;
        for v in self.u.iter_mut().chain(self.ut.iter_mut()) {
            if v.abs() <= cut {
                *v = 0.0;
            }
        }
    }

    pub fn max_abs_u(&self) -> f64 {
        self.u.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    /// `∂ᵣu` on the grid.
    pub fn du(&self) -> Vec<f64> {
        derivative(&self.u, self.dr)
    }

    /// `∫|∇u|² = ∫_1^∞ (∂ᵣu)² r² dr`. Beyond the grid `u ≈ c/r` with
    /// `c = r_N u_N` is assumed, contributing `c²/r_N`.
    pub fn gradient_integral(&self) -> f64 {
        let du = self.du();
        let f: Vec<f64> = du
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let r = self.r(i);
                d * d * r * r
            })
            .collect();
        let r_end = self.r_end();
        let c = r_end * self.u[self.n_intervals()];
        simpson(&f, self.dr) + c * c / r_end
    }

    /// `∫(∂ₜu)² = ∫_1^∞ (∂ₜu)² r² dr` (no tail: `∂ₜu` is taken to vanish beyond the grid).
    pub fn kinetic_integral(&self) -> f64 {
        let f: Vec<f64> = self
            .ut
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let r = self.r(i);
                v * v * r * r
            })
            .collect();
        simpson(&f, self.dr)
    }

    /// `∫|u|^{2m+2}` with the same `c/r` tail as [`RadialField::gradient_integral`].
    pub fn potential_integral(&self, m: u32) -> f64 {
        let p = 2 * m as i32 + 2;
        let f: Vec<f64> = self
            .u
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let r = self.r(i);
                v.abs().powi(p) * r * r
            })
            .collect();
        let r_end = self.r_end();
        let c = r_end * self.u[self.n_intervals()];
        simpson(&f, self.dr) + c.abs().powi(p) / ((p - 3) as f64 * r_end.powi(p - 3))
    }

    /// Squared energy-space norm `∫|∇u|² + ∫(∂ₜu)²`.
    pub fn h_norm_sq(&self) -> f64 {
        self.gradient_integral() + self.kinetic_integral()
    }

    pub fn h_norm(&self) -> f64 {
        self.h_norm_sq().sqrt()
    }

    /// `E = ½∫|∇u|² + ½∫(∂ₜu)² − ∫|u|^{2m+2}/(2m+2)`.
    pub fn energy(&self, m: u32) -> f64 {
        0.5 * self.gradient_integral() + 0.5 * self.kinetic_integral()
            - self.potential_integral(m) / (2.0 * m as f64 + 2.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_dirichlet_violation_and_nan() {
        assert!(RadialField::new(0.1, vec![1.0, 0.0], vec![0.0, 0.0], 0.0).is_err());
        assert!(RadialField::new(0.1, vec![0.0, f64::NAN], vec![0.0, 0.0], 0.0).is_err());
        assert!(RadialField::new(0.1, vec![0.0, 1.0], vec![0.0], 0.0).is_err());
        assert!(RadialField::new(0.0, vec![0.0], vec![0.0], 0.0).is_err());
        assert!(RadialField::new(0.1, vec![0.0, 1.0], vec![0.0, 2.0], 0.0).is_ok());
    }

    #[test]
    fn grid_nodes() {
        let f = RadialField::zeros(0.25, 8);
        assert_eq!(f.r(0), 1.0);
        assert_eq!(f.r_end(), 3.0);
        assert_eq!(f.len(), 9);
    }

    #[test]
    fn gradient_integral_of_inverse_r_profile() {
        // u = 1/r - 1/r²: ∫_1^∞ (-1/r + 2/r²)² dr = 1 - 2 + 4/3.
        let f = RadialField::from_fn(1e-3, 400.0, |r| 1.0 / r - 1.0 / (r * r), |_| 0.0);
        let exact = 1.0 / 3.0;
        assert!((f.gradient_integral() - exact).abs() < 1e-5, "{}", f.gradient_integral());
    }

    #[test]
    fn support_radius_of_bump() {
        let f = RadialField::from_fn(0.01, 20.0, |r| (-(r - 3.0).powi(2)).exp() * (r - 1.0), |_| 0.0);
        let s = f.support_radius();
        // exp(-x²)·2 ≈ 1e-14·max at x ≈ 5.7
        assert!(s > 8.0 && s < 9.5, "{s}");
    }
}
