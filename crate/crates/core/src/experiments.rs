//! Dynamical experiments: amplitude sweeps across the ground-state threshold,
//! one-pass probes around stationary states, and exterior energy channels.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    extract_radiation, h_distance, resolution_report_with, Classification, Polarity,
    ResolutionOptions, Target, DEFAULT_FAMILY_K_MAX,
};
use crate::emden_fowler::{StationaryFamily, StationaryProfile};
use crate::error::{Error, Result};
use crate::field::RadialField;
use crate::linear_wave::channel_energy;
use crate::nonlinear_wave::{
    evolve_nonlinear, time_reversed, EvolutionConfig, Event, Trajectory, TrajectoryStore,
};
use crate::numerics::{derivative, simpson};

pub const GAUSSIAN_CENTER: f64 = 3.0;
/// Radius beyond which the Gaussian profile is below `10⁻¹⁴` of its maximum.
pub const GAUSSIAN_SUPPORT: f64 = 11.1;

/// `(1 − 1/r)·exp(−(r − 3)²/2)` in `u₀`, `u₁ = 0`, sampled up to `r_end`.
pub fn gaussian_bump(dr: f64, r_end: f64) -> RadialField {
    RadialField::from_fn(
        dr,
        r_end,
        |r| (1.0 - 1.0 / r) * (-(r - GAUSSIAN_CENTER).powi(2) / 2.0).exp(),
        |_| 0.0,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Scattering,
    BlowUp,
    ConvergesToQ { sign: Polarity, k: usize },
    Undecided,
}

impl Outcome {
    fn from_classification(c: Classification) -> Self {
        match c {
            Classification::Scattering => Outcome::Scattering,
            Classification::ConvergesToQ { sign, k } => Outcome::ConvergesToQ { sign, k },
            Classification::Undecided => Outcome::Undecided,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub lambda: f64,
    pub energy: f64,
    /// `∫|∇(λu₀)|²`.
    pub gradient: f64,
    pub outcome: Outcome,
    pub blowup_time: Option<f64>,
}

/// Comparison with the dichotomy predicted for `E < E(Q₀, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubThresholdCheck {
    pub lambda: f64,
    pub energy: f64,
    pub gradient: f64,
    pub predicted: Outcome,
    pub observed: Outcome,
    pub consistent: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub lambda_grid: Vec<f64>,
    pub outcomes: Vec<Outcome>,
    pub energies: Vec<f64>,
    pub threshold_bracket: (f64, f64),
    pub bracket_outcomes: (Outcome, Outcome),
    pub bisection: Vec<SweepPoint>,
    pub grid_points: Vec<SweepPoint>,
    pub sub_threshold_checks: Vec<SubThresholdCheck>,
    /// Amplitudes that scattered above an amplitude that blew up.
    pub monotonicity_violations: Vec<f64>,
    /// Smallest `h_distance` to `±Q₀` over the snapshots of the two bracket runs.
    pub bracket_q0_distance: f64,
    pub ground_state_energy: f64,
    pub ground_state_gradient: f64,
    pub evolutions: usize,
    pub config: EvolutionConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Target `(λ_high − λ_low)/λ_low`.
    pub rel_width: f64,
    pub max_bisections: usize,
    pub family_k_max: usize,
    pub resolution: ResolutionOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            rel_width: 1e-3,
            max_bisections: 12,
            family_k_max: DEFAULT_FAMILY_K_MAX,
            resolution: ResolutionOptions::default(),
        }
    }
}

fn classify(traj: &Trajectory, family: &StationaryFamily, opts: &ResolutionOptions) -> Result<Outcome> {
    match traj.event {
        Event::BlowUp { .. } => Ok(Outcome::BlowUp),
        Event::NumericalFailure { .. } => Ok(Outcome::Undecided),
        Event::Completed => Ok(Outcome::from_classification(
            resolution_report_with(traj, family, opts)?.classification,
        )),
    }
}

fn blowup_time(traj: &Trajectory) -> Option<f64> {
    match traj.event {
        Event::BlowUp { t } => Some(t),
        _ => None,
    }
}

fn min_distance_to_q0(traj: &Trajectory, q0: &StationaryProfile) -> f64 {
    traj.snapshots
        .par_iter()
        .map(|s| {
            [Polarity::Plus, Polarity::Minus]
                .into_iter()
                .map(|sign| h_distance(s, Target::Stationary { sign, profile: q0 }))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min)
}

/// [`dichotomy_sweep_with`] with default options and a freshly built family.
pub fn dichotomy_sweep(
    base_data: &RadialField,
    lambda_grid: &[f64],
    cfg: &EvolutionConfig,
) -> Result<SweepResult> {
    let opts = SweepOptions::default();
    let family = StationaryFamily::new(cfg.m, opts.family_k_max)?;
    dichotomy_sweep_with(base_data, lambda_grid, cfg, &family, &opts)
}

/// Evolves `λ·base_data` for every `λ` in the grid (in parallel), brackets the
/// lowest blow-up amplitude that has a non-blow-up neighbour below it, and
/// bisects that bracket.
pub fn dichotomy_sweep_with(
    base_data: &RadialField,
    lambda_grid: &[f64],
    cfg: &EvolutionConfig,
    family: &StationaryFamily,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    if lambda_grid.len() < 2 || lambda_grid.iter().any(|l| !(*l > 0.0)) {
        return Err(Error::InvalidParameter(
            "lambda_grid needs at least two positive amplitudes".into(),
        ));
    }
    let q0 = family
        .get(0)
        .ok_or_else(|| Error::InvalidParameter("family has no ground state".into()))?;
    let (g_q0, _, _) = q0.integrals();
    let mut grid: Vec<f64> = lambda_grid.to_vec();
    grid.sort_by(f64::total_cmp);

    let run = |lambda: f64| -> Result<(SweepPoint, Trajectory)> {
        let data = base_data.scaled(lambda);
        let traj = evolve_nonlinear(&data, cfg)?;
        let outcome = classify(&traj, family, &opts.resolution)?;
        Ok((
            SweepPoint {
                lambda,
                energy: data.energy(cfg.m),
                gradient: data.gradient_integral(),
                outcome,
                blowup_time: blowup_time(&traj),
            },
            traj,
        ))
    };

    let store = TrajectoryStore::new();
    let grid_points: Vec<SweepPoint> = grid
        .par_iter()
        .map(|&lambda| {
            let (p, traj) = run(lambda)?;
            store.insert(format!("{lambda:e}"), traj);
            Ok(p)
        })
        .collect::<Result<_>>()?;
    let mut evolutions = grid.len();

    let first_blow = grid_points
        .iter()
        .position(|p| p.outcome == Outcome::BlowUp)
        .filter(|&j| j > 0)
        .ok_or(Error::NoTransitionInRange)?;
    let mut lo = grid_points[first_blow - 1];
    let mut hi = grid_points[first_blow];
    let mut lo_traj = store.get(&format!("{:e}", lo.lambda)).expect("stored");
    let mut hi_traj = store.get(&format!("{:e}", hi.lambda)).expect("stored");
    drop(store);

    let mut bisection = Vec::new();
    while (hi.lambda - lo.lambda) / lo.lambda > opts.rel_width && bisection.len() < opts.max_bisections {
        let mid = 0.5 * (lo.lambda + hi.lambda);
        let (p, traj) = run(mid)?;
        evolutions += 1;
        bisection.push(p);
        if p.outcome == Outcome::BlowUp {
            hi = p;
            hi_traj = traj.into();
        } else {
            lo = p;
            lo_traj = traj.into();
        }
    }

    let e_q0 = q0.energy;
    let sub_threshold_checks = grid_points
        .iter()
        .filter(|p| p.energy < e_q0)
        .map(|p| {
            let predicted = if p.gradient < g_q0 {
                Outcome::Scattering
            } else {
                Outcome::BlowUp
            };
            SubThresholdCheck {
                lambda: p.lambda,
                energy: p.energy,
                gradient: p.gradient,
                predicted,
                observed: p.outcome,
                consistent: predicted == p.outcome,
            }
        })
        .collect();

    let mut all: Vec<SweepPoint> = grid_points.iter().chain(&bisection).copied().collect();
    all.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    let monotonicity_violations = match all.iter().position(|p| p.outcome == Outcome::BlowUp) {
        Some(j) => all[j..]
            .iter()
            .filter(|p| p.outcome == Outcome::Scattering)
            .map(|p| p.lambda)
            .collect(),
        None => Vec::new(),
    };

    let bracket_q0_distance = min_distance_to_q0(&lo_traj, q0).min(min_distance_to_q0(&hi_traj, q0));

    Ok(SweepResult {
        lambda_grid: grid,
        outcomes: grid_points.iter().map(|p| p.outcome).collect(),
        energies: grid_points.iter().map(|p| p.energy).collect(),
        threshold_bracket: (lo.lambda, hi.lambda),
        bracket_outcomes: (lo.outcome, hi.outcome),
        bisection,
        grid_points,
        sub_threshold_checks,
        monotonicity_violations,
        bracket_q0_distance,
        ground_state_energy: e_q0,
        ground_state_gradient: g_q0,
        evolutions,
        config: cfg.clone(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OnePassResult {
    pub k: usize,
    pub sign: Polarity,
    pub delta_in: f64,
    pub epsilon_out: f64,
    /// First snapshot time with `‖u(t) − (±Q_k, 0)‖_𝓗 > ε`.
    pub exit_time: f64,
    pub revisit_detected: bool,
    /// `(t, min over {0, ±Q_j} of h_distance)` after the exit.
    pub min_family_distance_after_exit: Vec<(f64, f64)>,
    /// `(t, ‖u(t) − (±Q_k, 0)‖_𝓗)` over the whole run.
    pub distance_to_q_k: Vec<(f64, f64)>,
    pub event: Event,
    pub config: EvolutionConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnePassOptions {
    /// `ε = epsilon_factor·δ`.
    pub epsilon_factor: f64,
    pub family_k_max: usize,
}

impl Default for OnePassOptions {
    fn default() -> Self {
        Self {
            epsilon_factor: 10.0,
            family_k_max: DEFAULT_FAMILY_K_MAX,
        }
    }
}

/// Probe around `+Q_k` with default options.
pub fn one_pass_probe(
    k: usize,
    perturbation: &RadialField,
    delta: f64,
    cfg: &EvolutionConfig,
) -> Result<OnePassResult> {
    let opts = OnePassOptions::default();
    let family = StationaryFamily::new(cfg.m, opts.family_k_max.max(k))?;
    one_pass_probe_with(&family, k, Polarity::Plus, perturbation, delta, cfg, &opts)
}

/// Evolves `(±Q_k, 0) + p` with `p` rescaled to `‖p‖_𝓗 = δ`, finds the first
/// exit past `ε`, then tracks the distance to the nearest family member.
pub fn one_pass_probe_with(
    family: &StationaryFamily,
    k: usize,
    sign: Polarity,
    perturbation: &RadialField,
    delta: f64,
    cfg: &EvolutionConfig,
    opts: &OnePassOptions,
) -> Result<OnePassResult> {
    if !(delta >= 0.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta}")));
    }
    let epsilon = opts.epsilon_factor * delta;
    if !(epsilon > delta) {
        return Err(Error::InvalidParameter(format!(
            "epsilon = {epsilon} must exceed delta = {delta}"
        )));
    }
    let q = family
        .get(k)
        .ok_or_else(|| Error::InvalidParameter(format!("k = {k} exceeds the family")))?;
    let n = cfg.n_intervals();
    let p = perturbation.resized(n);
    let norm = p.h_norm();
    let p = if norm > 0.0 { p.scaled(delta / norm) } else { p };
    let data = q.to_field(sign.factor(), cfg.dr, cfg.domain_end).resized(n).axpy(1.0, &p);
    let traj = evolve_nonlinear(&data, cfg)?;

    let own = Target::Stationary { sign, profile: q };
    let distance_to_q_k: Vec<(f64, f64)> = traj
        .snapshots
        .par_iter()
        .map(|s| (s.time, h_distance(s, own)))
        .collect();
    let exit_time = match distance_to_q_k.iter().find(|(_, d)| *d > epsilon) {
        Some(&(t, _)) => t,
        None => match traj.event {
            Event::BlowUp { t } | Event::NumericalFailure { t } => t,
            Event::Completed => return Err(Error::NoExit),
        },
    };

    let mut targets = vec![Target::Zero];
    for member in family.members() {
        for s in [Polarity::Plus, Polarity::Minus] {
            targets.push(Target::Stationary { sign: s, profile: member });
        }
    }
    let min_family_distance_after_exit: Vec<(f64, f64)> = traj
        .snapshots
        .par_iter()
        .filter(|s| s.time > exit_time)
        .map(|s| {
            let d = targets
                .iter()
                .map(|t| h_distance(s, *t))
                .fold(f64::INFINITY, f64::min);
            (s.time, d)
        })
        .collect();
    let revisit_detected = min_family_distance_after_exit.iter().any(|(_, d)| *d < delta);

    Ok(OnePassResult {
        k,
        sign,
        delta_in: delta,
        epsilon_out: epsilon,
        exit_time,
        revisit_detected,
        min_family_distance_after_exit,
        distance_to_q_k,
        event: traj.event,
        config: cfg.clone(),
    })
}

/// One row of the exterior energy series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSample {
    /// Negative for the backward run.
    pub t: f64,
    /// `∫_{R+|t|}^∞ (∂ᵣ(ru))² + (∂ₜ(ru))² dr`.
    pub exterior_ru: f64,
    /// `∫_{R+|t|}^∞ ((∂ᵣu)² + (∂ₜu)²) r² dr`.
    pub exterior_grad: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelSeries {
    pub big_r: f64,
    pub samples: Vec<ChannelSample>,
    pub forward_event: Event,
    pub backward_event: Event,
    /// `2∫_R^∞ Ĝ²` from the radiation read off the final forward snapshot.
    pub forward_radiation_limit: Option<f64>,
    pub config: EvolutionConfig,
}

/// `∫_ρ^∞ ((∂ᵣu)² + (∂ₜu)²) r² dr` with the same `c/r` tail as the field norms.
pub fn exterior_gradient_energy(field: &RadialField, rho: f64) -> f64 {
    let du = derivative(&field.u, field.dr);
    let start = (((rho - 1.0) / field.dr).ceil().max(0.0) as usize).min(field.n_intervals());
    let f: Vec<f64> = (start..field.len())
        .map(|i| {
            let r = field.r(i);
            (du[i] * du[i] + field.ut[i] * field.ut[i]) * r * r
        })
        .collect();
    let r_end = field.r_end();
    let c = r_end * field.u[field.n_intervals()];
    simpson(&f, field.dr) + c * c / r_end
}

/// Exterior energy beyond `R + |t|` for the forward and the backward evolution.
pub fn channels_experiment(data: &RadialField, big_r: f64, cfg: &EvolutionConfig) -> Result<ChannelSeries> {
    if !(big_r >= 1.0) {
        return Err(Error::InvalidRange(format!("R = {big_r} < 1")));
    }
    let (fwd, bwd) = rayon::join(
        || evolve_nonlinear(data, cfg),
        || evolve_nonlinear(&time_reversed(data), cfg),
    );
    let (fwd, bwd) = (fwd?, bwd?);
    let sample = |s: &RadialField, sign: f64| {
        let rho = big_r + s.time;
        ChannelSample {
            t: sign * s.time,
            exterior_ru: channel_energy(s, rho),
            exterior_grad: exterior_gradient_energy(s, rho),
        }
    };
    let mut samples: Vec<ChannelSample> = bwd
        .snapshots
        .iter()
        .rev()
        .filter(|s| s.time > 0.0)
        .map(|s| sample(s, -1.0))
        .collect();
    samples.extend(fwd.snapshots.iter().map(|s| sample(s, 1.0)));
    let forward_radiation_limit = match (fwd.event, fwd.last()) {
        (Event::Completed, Some(last)) if last.time > 0.0 => {
            Some(2.0 * extract_radiation(&fwd, last.time)?.l2_norm_sq_from(big_r))
        }
        _ => None,
    };
    Ok(ChannelSeries {
        big_r,
        samples,
        forward_event: fwd.event,
        backward_event: bwd.event,
        forward_radiation_limit,
        config: cfg.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_is_dirichlet_and_compact() {
        let g = gaussian_bump(1e-2, 20.0);
        assert_eq!(g.u[0], 0.0);
        assert!(g.support_radius() <= GAUSSIAN_SUPPORT);
        assert!(g.support_radius() > GAUSSIAN_SUPPORT - 0.2);
    }

    #[test]
    fn grid_without_transition_is_rejected() {
        let base = gaussian_bump(1e-2, 12.0);
        let cfg = EvolutionConfig::causal(3, 1e-2, base.support_radius(), 2.0, 50);
        let family = StationaryFamily::new(3, 0).unwrap();
        let opts = SweepOptions {
            family_k_max: 0,
            ..SweepOptions::default()
        };
        let r = dichotomy_sweep_with(&base, &[0.1, 0.2], &cfg, &family, &opts);
        assert!(matches!(r, Err(Error::NoTransitionInRange)));
    }

    #[test]
    fn zero_data_channels_are_zero() {
        let z = RadialField::zeros(1e-2, 200);
        let cfg = EvolutionConfig::causal(3, 1e-2, 1.0, 3.0, 50);
        let s = channels_experiment(&z, 1.0, &cfg).unwrap();
        assert!(s.samples.iter().all(|c| c.exterior_ru == 0.0 && c.exterior_grad == 0.0));
        assert!(matches!(
            channels_experiment(&z, 0.5, &cfg),
            Err(Error::InvalidRange(_))
        ));
    }
}
