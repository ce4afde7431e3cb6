//! Energy-space functionals, distances to stationary states, radiation
//! extraction and the virial quantity.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::emden_fowler::{StationaryFamily, StationaryProfile};
use crate::error::{Error, Result};
use crate::field::RadialField;
use crate::linear_wave::{data_from_radiation, psi_from_data, PsiFunction, RadiationProfile, Sign};
use crate::nonlinear_wave::{Event, Trajectory};
use crate::numerics::{derivative, simpson};

/// Relative residual below which a run is classified.
pub const DEFAULT_THRESHOLD: f64 = 1e-2;
pub const DEFAULT_FAMILY_K_MAX: usize = 4;
/// Default extraction time as a fraction of the final snapshot time.
pub const DEFAULT_EXTRACT_FRACTION: f64 = 0.8;

/// `E(u, ∂ₜu)` with closed-form tails, Simpson in `r² dr`.
pub fn energy(field: &RadialField, m: u32) -> f64 {
    field.energy(m)
}

/// Sign of a stationary state `±Q_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Plus,
    Minus,
}

impl Polarity {
    pub fn factor(self) -> f64 {
        match self {
            Polarity::Plus => 1.0,
            Polarity::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Target<'a> {
    Zero,
    Stationary {
        sign: Polarity,
        profile: &'a StationaryProfile,
    },
}

/// `(u − sQ, ∂ₜu)` on the field's grid.
fn minus_target(field: &RadialField, target: Target<'_>) -> RadialField {
    let mut d = field.clone();
    if let Target::Stationary { sign, profile } = target {
        let s = sign.factor();
        for i in 1..d.len() {
            d.u[i] -= s * profile.value(d.r(i));
        }
    }
    d
}

/// `‖(u − sQ, ∂ₜu)‖_{Ḣ¹×L²}`; `Q` is evaluated exactly at the grid nodes and
/// the remainder beyond the grid is taken as `c/r`.
pub fn h_distance(field: &RadialField, target: Target<'_>) -> f64 {
    minus_target(field, target).h_norm()
}

/// Both one-sided radiation estimators at time `T` and their average.
#[derive(Debug, Clone)]
pub struct RadiationEstimate {
    pub t_extract: f64,
    /// `½(∂ᵣ(r w) − r∂ₜw)` at `r = η + T`, the profile used downstream.
    pub profile: RadiationProfile,
    /// `∂ᵣ(r w)` at `r = η + T`.
    pub from_dr: Vec<f64>,
    /// `−r ∂ₜw` at `r = η + T`.
    pub from_dt: Vec<f64>,
}

impl RadiationEstimate {
    /// Discrete `L²` distance between the two estimators.
    pub fn disagreement(&self) -> f64 {
        let sq: Vec<f64> = self
            .from_dr
            .iter()
            .zip(&self.from_dt)
            .map(|(a, b)| (a - b).powi(2))
            .collect();
        simpson(&sq, self.profile.d_eta).sqrt()
    }
}

/// Radiation estimators of a single state `w` observed at time `field.time`.
pub fn radiation_of_state(field: &RadialField) -> RadiationEstimate {
    let radii = field.radii();
    let rw: Vec<f64> = radii.iter().zip(&field.u).map(|(r, u)| r * u).collect();
    let d_rw = derivative(&rw, field.dr);
    let from_dt: Vec<f64> = radii.iter().zip(&field.ut).map(|(r, v)| -r * v).collect();
    let g = d_rw
        .iter()
        .zip(&from_dt)
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    let offset = -(field.time / field.dr).round() as i64;
    RadiationEstimate {
        t_extract: field.time,
        profile: RadiationProfile {
            d_eta: field.dr,
            offset,
            g,
            sign: Sign::Plus,
        },
        from_dr: d_rw,
        from_dt,
    }
}

fn extraction_snapshot(traj: &Trajectory, t_extract: f64) -> Result<&RadialField> {
    if !traj.is_completed() {
        return Err(Error::NotApplicable(format!(
            "trajectory ended with {:?}",
            traj.event
        )));
    }
    let last = traj
        .last()
        .ok_or_else(|| Error::InsufficientData("trajectory has no snapshots".into()))?;
    let snap = traj.snapshot_near(t_extract).expect("non-empty");
    if (snap.time - t_extract).abs() > 0.5 * snap.dr + 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "t_extract = {t_extract} is not a snapshot time"
        )));
    }
    if snap.time < DEFAULT_EXTRACT_FRACTION * last.time - 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "t_extract = {t_extract} is earlier than {DEFAULT_EXTRACT_FRACTION}·t_final"
        )));
    }
    Ok(snap)
}

/// Radiation field `Ĝ` read off the snapshot at `t_extract`.
pub fn extract_radiation(traj: &Trajectory, t_extract: f64) -> Result<RadiationProfile> {
    Ok(extract_radiation_detailed(traj, t_extract)?.profile)
}

/// As [`extract_radiation`], also returning the two individual estimators.
pub fn extract_radiation_detailed(traj: &Trajectory, t_extract: f64) -> Result<RadiationEstimate> {
    Ok(radiation_of_state(extraction_snapshot(traj, t_extract)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChosenQ {
    Zero,
    Stationary { sign: Polarity, k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    Scattering,
    ConvergesToQ { sign: Polarity, k: usize },
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergySplit {
    pub data_energy: f64,
    pub stationary_energy: f64,
    pub radiation_energy: f64,
    /// `|E(data) − E(Q) − radiation_energy| / |E(data)|`.
    pub relative_gap: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolutionReport {
    pub chosen_q: ChosenQ,
    /// `(t, ‖u(t) − v_L(t) − Q‖_𝓗)`.
    pub residual_history: Vec<(f64, f64)>,
    pub radiation_energy: f64,
    pub classification: Classification,
    /// `‖(u₀, u₁)‖_𝓗`; thresholds are relative to it.
    pub data_norm: f64,
    pub final_relative_residual: f64,
    pub t_extract: f64,
    pub theta_s: f64,
    pub theta_q: f64,
    pub energy_split: EnergySplit,
    /// `‖∂ᵣ-estimator − ∂ₜ-estimator‖` at extraction.
    pub estimator_disagreement: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolutionOptions {
    /// Defaults to the first snapshot at or after `0.8·t_final`.
    pub t_extract: Option<f64>,
    pub theta_s: f64,
    pub theta_q: f64,
}

impl Default for ResolutionOptions {
    fn default() -> Self {
        Self {
            t_extract: None,
            theta_s: DEFAULT_THRESHOLD,
            theta_q: DEFAULT_THRESHOLD,
        }
    }
}

/// Resolution of a completed trajectory against `{0} ∪ {±Q_k : k ≤ family_k_max}`.
pub fn resolution_report(traj: &Trajectory, family_k_max: usize) -> Result<ResolutionReport> {
    let family = StationaryFamily::new(traj.m, family_k_max)?;
    resolution_report_with(traj, &family, &ResolutionOptions::default())
}

struct Candidate<'a> {
    chosen: ChosenQ,
    target: Target<'a>,
}

/// Linear solution `v_L` whose outgoing radiation field is `Ĝ`, ready to be
/// sampled at any time up to the trajectory's end.
struct LinearReconstruction {
    psi: PsiFunction,
    n_out: usize,
}

impl LinearReconstruction {
    fn new(g: &RadiationProfile, n_out: usize, t_max: f64) -> Result<Self> {
        let v0 = data_from_radiation(g)?;
        let reach = t_max + n_out as f64 * g.d_eta;
        Ok(Self {
            psi: psi_from_data(&v0)?.with_reach(reach),
            n_out,
        })
    }

    fn at(&self, t: f64) -> Result<RadialField> {
        self.psi.propagate(t, self.n_out)
    }
}

fn residual_at(
    snap: &RadialField,
    lin: &LinearReconstruction,
    target: Target<'_>,
) -> Result<f64> {
    let v = lin.at(snap.time)?;
    Ok(h_distance(&snap.axpy(-1.0, &v), target))
}

/// [`resolution_report`] with an explicit family and options.
///
/// For each candidate `Q`, `Ĝ` is extracted from `u(T) − Q` at `T = t_extract`
/// and `v_L` is rebuilt from it; the candidate minimising the residual at the
/// final snapshot is selected.
pub fn resolution_report_with(
    traj: &Trajectory,
    family: &StationaryFamily,
    opts: &ResolutionOptions,
) -> Result<ResolutionReport> {
    let last = traj
        .last()
        .ok_or_else(|| Error::InsufficientData("trajectory has no snapshots".into()))?;
    let t_extract = match opts.t_extract {
        Some(t) => t,
        None => {
            let t_min = DEFAULT_EXTRACT_FRACTION * last.time - 1e-9;
            traj.snapshots
                .iter()
                .find(|s| s.time >= t_min)
                .expect("the last snapshot qualifies")
                .time
        }
    };
    let snap = extraction_snapshot(traj, t_extract)?;
    let first = &traj.snapshots[0];
    let data_norm = first.h_norm();
    let n_out = last.n_intervals();

    let mut candidates = vec![Candidate {
        chosen: ChosenQ::Zero,
        target: Target::Zero,
    }];
    for q in family.members() {
        for sign in [Polarity::Plus, Polarity::Minus] {
            candidates.push(Candidate {
                chosen: ChosenQ::Stationary { sign, k: q.k },
                target: Target::Stationary { sign, profile: q },
            });
        }
    }

    let scored: Vec<(usize, f64)> = candidates
        .par_iter()
        .enumerate()
        .map(|(idx, c)| -> Result<(usize, f64)> {
            let est = radiation_of_state(&minus_target(snap, c.target));
            let lin = LinearReconstruction::new(&est.profile, n_out, last.time)?;
            Ok((idx, residual_at(last, &lin, c.target)?))
        })
        .collect::<Result<_>>()?;
    let (best, _) = scored
        .iter()
        .copied()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least the zero candidate");
    let chosen = &candidates[best];

    let est = radiation_of_state(&minus_target(snap, chosen.target));
    let lin = LinearReconstruction::new(&est.profile, n_out, last.time)?;
    let residual_history = traj
        .snapshots
        .par_iter()
        .map(|s| Ok((s.time, residual_at(s, &lin, chosen.target)?)))
        .collect::<Result<Vec<_>>>()?;
    let final_residual = residual_history.last().map_or(0.0, |p| p.1);
    let final_relative_residual = if data_norm > 0.0 {
        final_residual / data_norm
    } else {
        final_residual
    };

    let classification = match chosen.chosen {
        ChosenQ::Zero if final_relative_residual < opts.theta_s => Classification::Scattering,
        ChosenQ::Stationary { sign, k } if final_relative_residual < opts.theta_q => {
            Classification::ConvergesToQ { sign, k }
        }
        _ => Classification::Undecided,
    };

    let radiation_energy = est.profile.l2_norm_sq();
    let data_energy = first.energy(traj.m);
    let stationary_energy = match chosen.target {
        Target::Zero => 0.0,
        Target::Stationary { profile, .. } => profile.energy,
    };
    let gap = (data_energy - stationary_energy - radiation_energy).abs();
    let energy_split = EnergySplit {
        data_energy,
        stationary_energy,
        radiation_energy,
        relative_gap: if data_energy != 0.0 {
            gap / data_energy.abs()
        } else {
            gap
        },
    };

    Ok(ResolutionReport {
        chosen_q: chosen.chosen,
        residual_history,
        radiation_energy,
        classification,
        data_norm,
        final_relative_residual,
        t_extract,
        theta_s: opts.theta_s,
        theta_q: opts.theta_q,
        energy_split,
        estimator_disagreement: est.disagreement(),
    })
}

/// `J(f) = (∫|∇f|²)^{m+1} / ∫|f|^{2m+2}` in the radial measure.
pub fn sobolev_quotient(f: &RadialField, m: u32) -> Result<f64> {
    if f.u.iter().all(|v| *v == 0.0) {
        return Err(Error::DegenerateInput("f is identically zero".into()));
    }
    if f.u[0] != 0.0 {
        return Err(Error::InvalidField(format!("f(1) = {}", f.u[0])));
    }
    let grad = f.gradient_integral();
    let pot = f.potential_integral(m);
    Ok(grad.powi(m as i32 + 1) / pot)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VirialSample {
    pub t: f64,
    pub y: f64,
    pub y_prime: f64,
    pub y_double_prime: f64,
    /// `2m∫|∇u|² + (2m+4)∫(∂ₜu)² − 4(m+1)E`.
    pub surrogate: f64,
}

/// `1` on `[0, 2]`, `0` on `[3, ∞)`, quintic smoothstep in between.
pub fn virial_cutoff(rho: f64) -> f64 {
    let x = rho - 2.0;
    if x <= 0.0 {
        1.0
    } else if x >= 1.0 {
        0.0
    } else {
        1.0 - x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
    }
}

/// `y(t) = ∫ φ(r/t) u² r² dr`.
pub fn virial_y(field: &RadialField) -> f64 {
    let t = field.time;
    let f: Vec<f64> = (0..field.len())
        .map(|i| {
            let r = field.r(i);
            let u = field.u[i];
            virial_cutoff(r / t) * u * u * r * r
        })
        .collect();
    simpson(&f, field.dr)
}

/// Virial samples at every snapshot with `t > 0`, derivatives by second-order
/// differences over the (possibly non-uniform) snapshot times.
pub fn virial_series(traj: &Trajectory) -> Result<Vec<VirialSample>> {
    let snaps: Vec<&RadialField> = traj.snapshots.iter().filter(|s| s.time > 0.0).collect();
    if snaps.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} snapshots with t > 0, need 3",
            snaps.len()
        )));
    }
    if let Event::BlowUp { t } | Event::NumericalFailure { t } = traj.event {
        if snaps.last().is_some_and(|s| s.time >= t) {
            return Err(Error::NotApplicable(format!("blow-up at t = {t}")));
        }
    }
    let m = traj.m as f64;
    let t: Vec<f64> = snaps.iter().map(|s| s.time).collect();
    let y: Vec<f64> = snaps.par_iter().map(|s| virial_y(s)).collect();
    let surrogate: Vec<f64> = snaps
        .par_iter()
        .map(|s| {
            let g = s.gradient_integral();
            let k = s.kinetic_integral();
            2.0 * m * g + (2.0 * m + 4.0) * k - 4.0 * (m + 1.0) * s.energy(traj.m)
        })
        .collect();
    let n = t.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Three-point stencil centred where possible, shifted inward at the ends.
        let c = i.clamp(1, n - 2);
        let (t0, t1, t2) = (t[c - 1], t[c], t[c + 1]);
        let (y0, y1, y2) = (y[c - 1], y[c], y[c + 1]);
        let h0 = t1 - t0;
        let h1 = t2 - t1;
        let ddy = 2.0 * (y0 / (h0 * (h0 + h1)) - y1 / (h0 * h1) + y2 / (h1 * (h0 + h1)));
        let x = t[i];
        // Derivative of the interpolating parabola at x.
        let dy = y0 * ((x - t1) + (x - t2)) / ((t0 - t1) * (t0 - t2))
            + y1 * ((x - t0) + (x - t2)) / ((t1 - t0) * (t1 - t2))
            + y2 * ((x - t0) + (x - t1)) / ((t2 - t0) * (t2 - t1));
        out.push(VirialSample {
            t: x,
            y: y[i],
            y_prime: dy,
            y_double_prime: ddy,
            surrogate: surrogate[i],
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_of_zero_and_kinetic_only() {
        let z = RadialField::zeros(0.01, 200);
        assert_eq!(energy(&z, 3), 0.0);
        let f = RadialField::from_fn(0.01, 10.0, |_| 0.0, |r| (r - 1.0) * (-(r - 3.0f64).powi(2)).exp());
        assert_eq!(energy(&f, 3), 0.5 * f.kinetic_integral());
    }

    #[test]
    fn cutoff_shape() {
        assert_eq!(virial_cutoff(0.5), 1.0);
        assert_eq!(virial_cutoff(2.0), 1.0);
        assert_eq!(virial_cutoff(3.0), 0.0);
        assert!((virial_cutoff(2.5) - 0.5).abs() < 1e-15);
        let mut last = 1.0;
        for i in 0..=100 {
            let v = virial_cutoff(2.0 + i as f64 / 100.0);
            assert!(v <= last);
            last = v;
        }
    }

    #[test]
    fn sobolev_quotient_rejects_zero() {
        let z = RadialField::zeros(0.01, 10);
        assert!(matches!(sobolev_quotient(&z, 3), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn radiation_of_zero_state_is_zero() {
        let mut z = RadialField::zeros(0.01, 100);
        z.time = 0.5;
        let est = radiation_of_state(&z);
        assert!(est.profile.g.iter().all(|v| *v == 0.0));
        assert_eq!(est.profile.offset, -50);
        assert_eq!(est.disagreement(), 0.0);
    }
}
