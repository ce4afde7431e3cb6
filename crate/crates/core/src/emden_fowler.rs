//! The Emden–Fowler profile `h'' + s^{-4} h^{2m+1} = 0` with `h(s) ~ s` at the
//! origin, its zeros, and the stationary solutions `Q_k` sampled from it.
//!
//! Every stationary solution outside the unit ball is a rescaling of the single
//! profile `Z_1(ρ) = h(1/ρ)`: with `s_k` the k-th positive zero of `h`,
//! `Q_k(r) = s_k^{-1/m} h(s_k / r)`. All integration therefore happens in the
//! `s` variable, where the equation is smooth.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::RadialField;
use crate::numerics::{gauss_legendre, simpson};
use crate::ode::DormandPrince;

/// Start of the numerical integration; `[0, s₀]` is covered by the series.
pub const SERIES_START: f64 = 1e-3;
/// Default relative tolerance of the profile integrator.
pub const DEFAULT_TOL: f64 = 1e-10;
/// `find_zeros` gives up extending the profile beyond this abscissa.
pub const ZERO_SEARCH_CEILING: f64 = 1e12;
/// Intervals of the logarithmic radial grid used for tabulating `Q_k`.
pub const LOG_GRID_INTERVALS: usize = 24_000;
/// `Q_k` varies on radii up to about `s_k / s_0`; family members are tabulated
/// at least to `TABULATION_FACTOR · s_k`.
pub const TABULATION_FACTOR: f64 = 300.0;

#[derive(Debug, Clone, Copy)]
struct Node {
    s: f64,
    h: f64,
    dh: f64,
    ddh: f64,
}

/// Dense-output solution of the Emden–Fowler equation on `[s₀, s_max]`.
///
/// Between integrator nodes the profile is the quintic Hermite interpolant of
/// `(h, h', h'')`, with `h''` taken from the equation itself.
#[derive(Debug, Clone)]
pub struct HProfile {
    m: u32,
    tol: f64,
    series_start: f64,
    nodes: Vec<Node>,
}

fn rhs(m: u32, s: f64, h: f64) -> f64 {
    -h.powi(2 * m as i32 + 1) / s.powi(4)
}

/// Integrates the profile from the two-term series at `s₀` up to `s_max`.
pub fn integrate_h(m: u32, s_max: f64, tol: f64) -> Result<HProfile> {
    if m < 3 {
        return Err(Error::InvalidParameter(format!("m = {m}, need m >= 3")));
    }
    if !(tol > 0.0 && tol < 1e-6) {
        return Err(Error::InvalidParameter(format!("tol = {tol}, need 0 < tol < 1e-6")));
    }
    let s0 = SERIES_START;
    if !(s_max > s0) {
        return Err(Error::InvalidRange(format!("s_max = {s_max} <= s0 = {s0}")));
    }
    let (h0, dh0) = series(m, s0);
    let start = Node {
        s: s0,
        h: h0,
        dh: dh0,
        ddh: rhs(m, s0, h0),
    };
    let mut profile = HProfile {
        m,
        tol,
        series_start: s0,
        nodes: vec![start],
    };
    profile.advance(s_max)?;
    Ok(profile)
}

/// Two-term expansion near the origin obtained from one Picard iteration.
fn series(m: u32, s: f64) -> (f64, f64) {
    let p = 2.0 * m as f64;
    let h = s - s.powf(p - 1.0) / ((p - 1.0) * (p - 2.0));
    let dh = 1.0 - s.powf(p - 2.0) / (p - 2.0);
    (h, dh)
}

impl HProfile {
    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn series_start(&self) -> f64 {
        self.series_start
    }

    pub fn s_max(&self) -> f64 {
        self.nodes.last().map_or(self.series_start, |n| n.s)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    fn advance(&mut self, s_max: f64) -> Result<()> {
        let m = self.m;
        let last = *self.nodes.last().expect("profile has a start node");
        if s_max <= last.s {
            return Ok(());
        }
        // Steps are sized at a hundredth of `tol` so that the quintic interpolant's
        // second derivative, not just its value, stays within `tol`.
        let mut dp = DormandPrince::new(self.tol * 1e-2);
        dp.atol = self.tol * 1e-4;
        dp.h_init = last.s * 1e-3;
        let nodes = &mut self.nodes;
        dp.integrate(
            |s, y: &[f64; 2]| [y[1], rhs(m, s, y[0])],
            last.s,
            [last.h, last.dh],
            s_max,
            |s, y| {
                nodes.push(Node {
                    s,
                    h: y[0],
                    dh: y[1],
                    ddh: rhs(m, s, y[0]),
                })
            },
        )?;
        Ok(())
    }

    /// A copy of this profile continued up to `s_max`.
    pub fn extended(&self, s_max: f64) -> Result<HProfile> {
        let mut p = self.clone();
        p.advance(s_max)?;
        Ok(p)
    }

    fn interval(&self, s: f64) -> Option<usize> {
        let n = self.nodes.len();
        if n < 2 || s < self.nodes[0].s || s > self.nodes[n - 1].s {
            return None;
        }
        let idx = self.nodes.partition_point(|node| node.s <= s);
        Some(idx.clamp(1, n - 1) - 1)
    }

    fn hermite(&self, i: usize, s: f64) -> [f64; 3] {
        let a = &self.nodes[i];
        let b = &self.nodes[i + 1];
        let hh = b.s - a.s;
        let t = (s - a.s) / hh;
        let (t2, t3) = (t * t, t * t * t);
        let (t4, t5) = (t3 * t, t3 * t2);
        let basis = [
            1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5,
            t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5,
            0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5,
            10.0 * t3 - 15.0 * t4 + 6.0 * t5,
            -4.0 * t3 + 7.0 * t4 - 3.0 * t5,
            0.5 * t3 - t4 + 0.5 * t5,
        ];
        let d1 = [
            -30.0 * t2 + 60.0 * t3 - 30.0 * t4,
            1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4,
            t - 4.5 * t2 + 6.0 * t3 - 2.5 * t4,
            30.0 * t2 - 60.0 * t3 + 30.0 * t4,
            -12.0 * t2 + 28.0 * t3 - 15.0 * t4,
            1.5 * t2 - 4.0 * t3 + 2.5 * t4,
        ];
        let d2 = [
            -60.0 * t + 180.0 * t2 - 120.0 * t3,
            -36.0 * t + 96.0 * t2 - 60.0 * t3,
            1.0 - 9.0 * t + 18.0 * t2 - 10.0 * t3,
            60.0 * t - 180.0 * t2 + 120.0 * t3,
            -24.0 * t + 84.0 * t2 - 60.0 * t3,
            3.0 * t - 12.0 * t2 + 10.0 * t3,
        ];
        let coef = [a.h, hh * a.dh, hh * hh * a.ddh, b.h, hh * b.dh, hh * hh * b.ddh];
        let dot = |w: &[f64; 6]| w.iter().zip(coef.iter()).map(|(x, y)| x * y).sum::<f64>();
        [dot(&basis), dot(&d1) / hh, dot(&d2) / (hh * hh)]
    }

    /// `(h(s), h'(s))`. Below the series start the two-term series is used.
    pub fn eval(&self, s: f64) -> Result<(f64, f64)> {
        if s <= 0.0 {
            return Err(Error::OutOfTable(s));
        }
        if s < self.series_start {
            return Ok(series(self.m, s));
        }
        let i = self.interval(s).ok_or(Error::OutOfTable(s))?;
        let v = self.hermite(i, s);
        Ok((v[0], v[1]))
    }

    /// Second derivative of the dense interpolant (for residual checks).
    pub fn second_derivative(&self, s: f64) -> Result<f64> {
        let i = self.interval(s).ok_or(Error::OutOfTable(s))?;
        Ok(self.hermite(i, s)[2])
    }

    /// `h(s)` only.
    pub fn value(&self, s: f64) -> Result<f64> {
        self.eval(s).map(|v| v.0)
    }

    /// Bisects the dense interpolant of component `comp` (0 = h, 1 = h') on
    /// every node interval where it changes sign, collecting up to `count` roots.
    fn roots(&self, comp: usize, count: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(count);
        let val = |n: &Node| if comp == 0 { n.h } else { n.dh };
        for i in 0..self.nodes.len() - 1 {
            if out.len() >= count {
                break;
            }
            let (a, b) = (&self.nodes[i], &self.nodes[i + 1]);
            let (fa, fb) = (val(a), val(b));
            if fb == 0.0 {
                out.push(b.s);
                continue;
            }
            if fa == 0.0 || fa.signum() == fb.signum() {
                continue;
            }
            let (mut lo, mut hi) = (a.s, b.s);
            let sign_lo = fa.signum();
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let fm = self.hermite(i, mid)[comp];
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if fm.signum() == sign_lo {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        out
    }

    fn extend_until<F: Fn(&HProfile) -> usize>(&self, count: usize, found: F) -> Result<HProfile> {
        let mut p = self.clone();
        loop {
            let have = found(&p);
            if have >= count {
                return Ok(p);
            }
            let next = p.s_max() * 4.0;
            if next > ZERO_SEARCH_CEILING {
                return Err(Error::ZerosExhausted {
                    found: have,
                    ceiling: ZERO_SEARCH_CEILING,
                });
            }
            p.advance(next)?;
        }
    }

    /// The first `count` extrema `X_0 < X_1 < …` of `h` (zeros of `h'`).
    pub fn find_extrema(&self, count: usize) -> Result<Vec<f64>> {
        let p = self.extend_until(count, |p| p.roots(1, count).len())?;
        Ok(p.roots(1, count))
    }

    /// Evaluates `Z_ℓ(r) = sign(ℓ) α^{1/m} Z_1(α r)` with `α = |ℓ|^{m/(1-m)}`,
    /// where `Z_1(ρ) = h(1/ρ)`.
    pub fn sample_z(&self, ell: f64, r: f64) -> Result<f64> {
        self.sample_z_with_derivative(ell, r).map(|v| v.0)
    }

    /// `(Z_ℓ(r), Z_ℓ'(r))`.
    pub fn sample_z_with_derivative(&self, ell: f64, r: f64) -> Result<(f64, f64)> {
        if ell == 0.0 || !ell.is_finite() {
            return Err(Error::InvalidParameter(format!("ell = {ell}")));
        }
        let m = self.m as f64;
        let alpha = ell.abs().powf(m / (1.0 - m));
        let rho = alpha * r;
        if !(rho > 0.0) {
            return Err(Error::OutOfTable(rho));
        }
        let s = 1.0 / rho;
        let (h, dh) = self.eval(s).map_err(|_| Error::OutOfTable(rho))?;
        let amp = ell.signum() * alpha.powf(1.0 / m);
        // d/dr h(1/(αr)) = -h'(s) / (α r²)
        Ok((amp * h, -amp * dh / (alpha * r * r)))
    }

    /// `∫_0^{s_end} h^{2m+2} s^{-4} ds`, which equals `∫_{1/s_end}^∞ Z_1^{2m+2} ρ² dρ`.
    fn potential_integral_to(&self, s_end: f64) -> Result<f64> {
        let p = 2 * self.m as i32 + 2;
        let s0 = self.series_start;
        // h ≈ s on [0, s₀]
        let mut total = s0.powi(p - 3) / (p - 3) as f64;
        if s_end > self.s_max() {
            return Err(Error::OutOfTable(s_end));
        }
        for i in 0..self.nodes.len() - 1 {
            let a = self.nodes[i].s;
            if a >= s_end {
                break;
            }
            let b = self.nodes[i + 1].s.min(s_end);
            total += gauss_legendre(|s| self.hermite(i, s)[0].powi(p) / s.powi(4), a, b);
        }
        Ok(total)
    }
}

/// The first `count` positive zeros of `h`, extending the integration window
/// internally when the profile is too short.
pub fn find_zeros(profile: &HProfile, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let p = profile.extend_until(count, |p| p.roots(0, count).len())?;
    Ok(p.roots(0, count))
}

/// One member `Q_k` of the stationary family, tabulated on a logarithmic grid
/// of `[1, r_tab_max]`.
#[derive(Debug, Clone)]
pub struct StationaryProfile {
    pub k: usize,
    pub m: u32,
    /// k-th zero of `h`; the scaling radius is `r_k = 1/s_k`.
    pub s_k: f64,
    pub r_tab_max: f64,
    /// Radii of the tabulation (`r_i = r_tab_max^{i/N}`).
    pub r: Vec<f64>,
    pub q: Vec<f64>,
    pub dq: Vec<f64>,
    /// Numerical estimate of `lim r Q_k(r)`.
    pub c_k: f64,
    /// `E(Q_k, 0)` by direct quadrature with closed-form tails.
    pub energy: f64,
    profile: Arc<HProfile>,
}

impl StationaryProfile {
    /// `Q_k(r)`; `Q_k(1) = 0` exactly.
    pub fn value(&self, r: f64) -> f64 {
        self.value_and_derivative(r).0
    }

    /// `(Q_k(r), Q_k'(r))` for any `r >= 1`.
    pub fn value_and_derivative(&self, r: f64) -> (f64, f64) {
        let s = self.s_k / r;
        let amp = self.s_k.powf(-1.0 / self.m as f64);
        let (h, dh) = self
            .profile
            .eval(s)
            .expect("Q_k is defined on r >= 1 by construction");
        let q = if r == 1.0 { 0.0 } else { amp * h };
        (q, -amp * dh * self.s_k / (r * r))
    }

    /// `(sign·Q_k, 0)` sampled on `r_i = 1 + i·dr` up to `r_end`.
    pub fn to_field(&self, sign: f64, dr: f64, r_end: f64) -> RadialField {
        RadialField::from_fn(dr, r_end, |r| sign * self.value(r), |_| 0.0)
    }

    /// `c_k = s_k^{(m-1)/m}`, the exact asymptotic constant.
    pub fn c_k_analytic(&self) -> f64 {
        self.s_k.powf((self.m as f64 - 1.0) / self.m as f64)
    }

    /// Sign changes of the tabulated samples on `(1, r_tab_max]`.
    pub fn sign_changes(&self) -> usize {
        count_sign_changes(&self.q[1..])
    }

    pub fn h_profile(&self) -> &HProfile {
        &self.profile
    }

    fn log_step(&self) -> f64 {
        self.r_tab_max.ln() / (self.r.len() - 1) as f64
    }

    /// Gradient and potential integrals `(∫|∇Q|², ∫|Q|^{2m+2})` over `Ω` in the
    /// radial measure `r² dr`, each with its closed-form tail beyond `r_tab_max`.
    /// Also returns the gradient tail on its own.
    pub fn integrals(&self) -> (f64, f64, f64) {
        let p = 2 * self.m as i32 + 2;
        let dx = self.log_step();
        let grad: Vec<f64> = (0..self.r.len())
            .map(|i| self.dq[i] * self.dq[i] * self.r[i].powi(3))
            .collect();
        let pot: Vec<f64> = (0..self.r.len())
            .map(|i| self.q[i].powi(p) * self.r[i].powi(3))
            .collect();
        let big_r = self.r_tab_max;
        let c = self.c_k;
        let grad_tail = c * c / big_r;
        let pot_tail = c.powi(p) / ((p - 3) as f64 * big_r.powi(p - 3));
        (
            simpson(&grad, dx) + grad_tail,
            simpson(&pot, dx) + pot_tail,
            grad_tail,
        )
    }
}

/// Number of strict sign changes in a sequence, ignoring exact zeros.
pub fn count_sign_changes(v: &[f64]) -> usize {
    let mut last = 0.0f64;
    let mut n = 0;
    for &x in v {
        if x == 0.0 {
            continue;
        }
        if last != 0.0 && x.signum() != last.signum() {
            n += 1;
        }
        last = x;
    }
    n
}

/// Builds `Q_k` from an existing profile (extended as needed).
pub fn stationary_from_profile(
    profile: &HProfile,
    k: usize,
    r_tab_max: f64,
) -> Result<StationaryProfile> {
    if !(r_tab_max > 10.0) {
        return Err(Error::InvalidRange(format!("r_tab_max = {r_tab_max}, need > 10")));
    }
    let zeros = find_zeros(profile, k + 1)?;
    let s_k = zeros[k];
    let profile = if profile.s_max() < s_k {
        profile.extended(s_k * 1.01)?
    } else {
        profile.clone()
    };
    let m = profile.m;
    let mut sp = StationaryProfile {
        k,
        m,
        s_k,
        r_tab_max,
        r: Vec::new(),
        q: Vec::new(),
        dq: Vec::new(),
        c_k: 0.0,
        energy: 0.0,
        profile: Arc::new(profile),
    };
    let n = LOG_GRID_INTERVALS;
    let dx = r_tab_max.ln() / n as f64;
    sp.r = (0..=n).map(|i| (i as f64 * dx).exp()).collect();
    sp.r[0] = 1.0;
    let (q, dq): (Vec<f64>, Vec<f64>) = sp.r.iter().map(|&r| sp.value_and_derivative(r)).unzip();
    sp.q = q;
    sp.dq = dq;
    sp.q[0] = 0.0;

    // r Q(r) = c (1 - a r^{-(2m-2)} + …): eliminate the leading correction
    // between r_tab_max and r_tab_max/2.
    let e = 2.0 * m as f64 - 2.0;
    let r1 = r_tab_max;
    let r2 = r_tab_max / 2.0;
    let (f1, f2) = (r1 * sp.value(r1), r2 * sp.value(r2));
    let w = 2f64.powf(-e);
    sp.c_k = (f1 - w * f2) / (1.0 - w);

    let (grad, pot, _) = sp.integrals();
    sp.energy = 0.5 * grad - pot / (2.0 * m as f64 + 2.0);
    Ok(sp)
}

/// Builds `Q_k` for exponent `m`, tabulated on `[1, r_tab_max]`.
pub fn build_q(m: u32, k: usize, r_tab_max: f64) -> Result<StationaryProfile> {
    let profile = integrate_h(m, 4.0, DEFAULT_TOL)?;
    stationary_from_profile(&profile, k, r_tab_max)
}

/// Energy of a stationary state computed two ways.
#[derive(Debug, Clone, Copy)]
pub struct StationaryEnergy {
    /// `½∫|∇Q|² − ∫|Q|^{2m+2}/(2m+2)` over `Ω` with closed-form tails.
    pub direct: f64,
    /// `m/(2(m+1)) r_k^{-(m-2)/m} ∫_{r_k}^∞ |Z_1|^{2m+2} r² dr`, integrated in `s`.
    pub scaled: f64,
    /// `|∫|∇Q|² − ∫|Q|^{2m+2}| / ∫|∇Q|²`.
    pub pohozaev_gap: f64,
}

pub fn energy_of_q(q: &StationaryProfile) -> Result<StationaryEnergy> {
    let (grad, pot, grad_tail) = q.integrals();
    let fraction = grad_tail / grad;
    if fraction > 0.01 {
        return Err(Error::TailTooFat { fraction });
    }
    let m = q.m as f64;
    let direct = 0.5 * grad - pot / (2.0 * m + 2.0);
    let z_int = q.profile.potential_integral_to(q.s_k)?;
    let scaled = m / (2.0 * (m + 1.0)) * q.s_k.powf((m - 2.0) / m) * z_int;
    Ok(StationaryEnergy {
        direct,
        scaled,
        pohozaev_gap: (grad - pot).abs() / grad,
    })
}

/// A shared profile together with its zeros, from which any `Q_k` is cut.
#[derive(Debug, Clone)]
pub struct StationaryFamily {
    profile: HProfile,
    r_tab_max: f64,
    members: Vec<StationaryProfile>,
}

impl StationaryFamily {
    /// Builds `Q_0 … Q_{k_max}` for exponent `m`, each tabulated far enough
    /// out for its closed-form tail to be negligible.
    pub fn new(m: u32, k_max: usize) -> Result<Self> {
        Self::with_tabulation(m, k_max, 1e3)
    }

    /// As [`StationaryFamily::new`], with `r_tab_max` as the minimum tabulation radius.
    pub fn with_tabulation(m: u32, k_max: usize, r_tab_max: f64) -> Result<Self> {
        let profile = integrate_h(m, 4.0, DEFAULT_TOL)?;
        let zeros = find_zeros(&profile, k_max + 1)?;
        let profile = profile.extended(zeros[k_max] * 1.01)?;
        let members = (0..=k_max)
            .map(|k| {
                let r_tab = r_tab_max.max(TABULATION_FACTOR * zeros[k]);
                stationary_from_profile(&profile, k, r_tab)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            profile,
            r_tab_max,
            members,
        })
    }

    pub fn m(&self) -> u32 {
        self.profile.m
    }

    pub fn k_max(&self) -> usize {
        self.members.len() - 1
    }

    pub fn r_tab_max(&self) -> f64 {
        self.r_tab_max
    }

    pub fn get(&self, k: usize) -> Option<&StationaryProfile> {
        self.members.get(k)
    }

    pub fn members(&self) -> &[StationaryProfile] {
        &self.members
    }

    pub fn h_profile(&self) -> &HProfile {
        &self.profile
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(integrate_h(2, 5.0, 1e-10), Err(Error::InvalidParameter(_))));
        assert!(matches!(integrate_h(3, 5.0, 1e-3), Err(Error::InvalidParameter(_))));
        assert!(matches!(integrate_h(3, 1e-4, 1e-10), Err(Error::InvalidRange(_))));
    }

    #[test]
    fn starts_on_the_series() {
        let p = integrate_h(3, 2e-2, 1e-10).unwrap();
        let s0 = p.series_start();
        let (h, dh) = p.eval(s0).unwrap();
        assert!((h / s0 - 1.0).abs() <= s0.powi(4));
        assert!((dh - 1.0).abs() <= s0.powi(4));
        for s in [s0, 2.0 * s0, 5e-3, 1e-2, 2e-2] {
            let ratio = p.value(s).unwrap() / s;
            assert!((1.0 - 1e-4..=1.0).contains(&ratio), "s = {s}: {ratio}");
        }
    }

    #[test]
    fn sign_is_constant_between_zeros() {
        // The second zero lies beyond s = 50; find_zeros extends the window.
        let p = integrate_h(3, 50.0, 1e-10).unwrap();
        let zeros = find_zeros(&p, 2).unwrap();
        assert_eq!(zeros.len(), 2);
        let p = p.extended(zeros[1]).unwrap();
        let mut bounds = vec![p.series_start()];
        bounds.extend(&zeros);
        for w in bounds.windows(2) {
            let sign = p.value(0.5 * (w[0] + w[1])).unwrap().signum();
            for j in 1..50 {
                let s = w[0] + (w[1] - w[0]) * j as f64 / 50.0;
                assert_eq!(p.value(s).unwrap().signum(), sign);
            }
        }
    }

    #[test]
    fn zeros_are_sharp() {
        let ext = integrate_h(3, 2e4, 1e-10).unwrap();
        let zeros = find_zeros(&ext, 6).unwrap();
        let extrema = ext.find_extrema(7).unwrap();
        for (j, z) in zeros.iter().enumerate() {
            let amp = ext.value(extrema[j + 1]).unwrap().abs();
            assert!(ext.value(*z).unwrap().abs() <= 1e-12 * amp);
        }
    }

    #[test]
    fn out_of_table_is_reported() {
        let p = integrate_h(3, 5.0, 1e-10).unwrap();
        assert!(matches!(p.eval(6.0), Err(Error::OutOfTable(_))));
        // Z_1(ρ) = h(1/ρ): ρ = 0.1 needs s = 10.
        assert!(matches!(p.sample_z(1.0, 0.1), Err(Error::OutOfTable(_))));
    }

    #[test]
    fn sign_change_counter() {
        assert_eq!(count_sign_changes(&[0.0, 1.0, 0.0, -2.0, -1.0, 3.0]), 2);
        assert_eq!(count_sign_changes(&[]), 0);
    }

    #[test]
    fn small_tabulation_is_too_fat() {
        let q = build_q(3, 0, 10.5).unwrap();
        let e = energy_of_q(&q);
        // tail c²/R relative to the gradient integral at R ≈ 10 is a few percent
        if let Err(Error::TailTooFat { fraction }) = e {
            assert!(fraction > 0.01);
        }
    }
}
